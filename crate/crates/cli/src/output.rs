use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};

/// Formats `x` with 17 significant digits, plain decimal where that stays
/// readable and scientific otherwise.
pub fn sig17(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..16).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.16e}")
    }
}

pub fn join17(xs: &[f64]) -> String {
    xs.iter().map(|v| sig17(*v)).collect::<Vec<_>>().join(" ")
}

/// Reads a JSON config object; `None` when no path is given.
pub fn read_config(path: Option<&Path>) -> Result<Map<String, Value>> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    match serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))? {
        Value::Object(m) => Ok(m),
        _ => Err(crate::UsageError(format!("config {} is not a JSON object", path.display())).into()),
    }
}

/// Overlays the flags that were given onto the config file: flags win,
/// absent flags (null or false) leave config values in place.
pub fn merge<T>(flags: &T, config: &Map<String, Value>) -> Result<T>
where
    T: Serialize + serde::de::DeserializeOwned,
{
    let mut merged = config.clone();
    if let Value::Object(given) = serde_json::to_value(flags)? {
        for (k, v) in given {
            match v {
                Value::Null | Value::Bool(false) => {
                    merged.entry(k).or_insert(v);
                }
                Value::Array(ref a) if a.is_empty() => {
                    merged.entry(k).or_insert(v);
                }
                _ => {
                    merged.insert(k, v);
                }
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| crate::UsageError(format!("bad parameters: {e}")).into())
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    pub seed: Option<u64>,
    pub threads: usize,
    pub version: &'static str,
    pub started_unix: f64,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<PathBuf>,
}

pub struct Run {
    command: String,
    started: Instant,
    started_unix: f64,
    threads: usize,
}

impl Run {
    pub fn start(command: &str, threads: usize) -> Self {
        Self {
            command: command.into(),
            started: Instant::now(),
            started_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs_f64())
                .unwrap_or(0.0),
            threads,
        }
    }

    pub fn manifest(&self, parameters: &impl Serialize, seed: Option<u64>, outputs: Vec<PathBuf>) -> Result<RunManifest> {
        Ok(RunManifest {
            command: self.command.clone(),
            parameters: serde_json::to_value(parameters)?,
            seed,
            threads: self.threads,
            version: env!("CARGO_PKG_VERSION"),
            started_unix: self.started_unix,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            outputs,
        })
    }
}

/// `out.json` -> `out.json.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn write_manifest(out: &Path, m: &RunManifest) -> Result<()> {
    let path = manifest_path(out);
    fs::write(&path, serde_json::to_string_pretty(m)? + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn write_csv(path: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r
            .iter()
            .map(|c| if c.contains([',', '"', '\n']) { format!("\"{}\"", c.replace('"', "\"\"")) } else { c.clone() })
            .collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    if let Some(p) = path {
        fs::write(p, &s).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(s)
}
