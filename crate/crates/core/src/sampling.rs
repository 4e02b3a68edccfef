//! Low-discrepancy point sets for the verification sweeps.

/// Joe-Kuo direction-number seeds `(degree, a, m_1..m_s)` for dimensions 2..=5.
const JOE_KUO: [(u32, u32, &[u32]); 4] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
];

const BITS: usize = 32;

/// Gray-code Sobol sequence in up to five dimensions. The first point (the
/// origin) is skipped.
#[derive(Debug, Clone)]
pub struct Sobol {
    dirs: Vec<[u32; BITS]>,
    state: Vec<u32>,
    index: u32,
}

impl Sobol {
    pub fn new(dim: usize) -> Self {
        assert!((1..=JOE_KUO.len() + 1).contains(&dim), "Sobol dimension {dim} unsupported");
        let mut dirs = Vec::with_capacity(dim);
        let mut first = [0u32; BITS];
        for (i, v) in first.iter_mut().enumerate() {
            *v = 1 << (31 - i);
        }
        dirs.push(first);
        for &(s, a, m) in JOE_KUO.iter().take(dim - 1) {
            let s = s as usize;
            let mut v = [0u32; BITS];
            for i in 0..s.min(BITS) {
                v[i] = m[i] << (31 - i);
            }
            for i in s..BITS {
                let mut x = v[i - s] ^ (v[i - s] >> s);
                for k in 1..s {
                    x ^= ((a >> (s - 1 - k)) & 1) * v[i - k];
                }
                v[i] = x;
            }
            dirs.push(v);
        }
        Self {
            dirs,
            state: vec![0; dim],
            index: 0,
        }
    }

    pub fn next_point(&mut self) -> Vec<f64> {
        // rightmost zero bit of the current index picks the direction
        let c = (!self.index).trailing_zeros() as usize;
        self.index += 1;
        for (x, d) in self.state.iter_mut().zip(&self.dirs) {
            *x ^= d[c];
        }
        self.state
            .iter()
            .map(|&x| x as f64 / (1u64 << 32) as f64)
            .collect()
    }
}

/// `n` Sobol points mapped affinely to `[lo, hi]^dim`.
pub fn sobol_box(n: usize, dim: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    let mut seq = Sobol::new(dim);
    (0..n)
        .map(|_| seq.next_point().into_iter().map(|u| lo + (hi - lo) * u).collect())
        .collect()
}
