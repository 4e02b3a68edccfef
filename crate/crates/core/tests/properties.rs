use proptest::prelude::*;

use regret_lab::closed_form::{
    comb_set_array, hamiltonian_argmax, phi, u4_array, u4_derivatives, v2d, v3_raw, ExpertSubset,
    RegretState,
};
use regret_lab::game_solver::{dpp_inner, dpp_inner_dual, SubsetCosts};
use regret_lab::rbm_sim::{skorokhod_push, ReflectionSpec};

fn point() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(-3.0..3.0f64)
}

/// Points with every sorted gap above `0.01`, so FD stencils stay in one chamber.
fn chamber_point() -> impl Strategy<Value = [f64; 4]> {
    (point(), prop::array::uniform3(0.01..1.5f64), Just(())).prop_map(|(p, g, _)| {
        let mut idx = [0usize, 1, 2, 3];
        idx.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
        let mut out = [0.0; 4];
        let mut z = p[idx[0]];
        out[idx[0]] = z;
        for k in 1..4 {
            z += g[k - 1];
            out[idx[k]] = z;
        }
        out
    })
}

fn sorted_gaps(x: &[f64; 4]) -> [f64; 3] {
    let mut z = *x;
    z.sort_by(f64::total_cmp);
    [z[1] - z[0], z[2] - z[1], z[3] - z[2]]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn translation(x in point(), lam in prop::sample::select(vec![-5.0, 0.3, 10.0])) {
        let shifted = x.map(|v| v + lam);
        prop_assert!((u4_array(&shifted) - u4_array(&x) - lam).abs() <= 1e-12 * (1.0 + lam.abs()));
    }

    #[test]
    fn monotone(x in point(), t in 0.0..2.0f64, i in 0usize..4) {
        let mut y = x;
        y[i] += t;
        prop_assert!(u4_array(&y) >= u4_array(&x) - 1e-12);
    }

    #[test]
    fn decomposition(x in point()) {
        let s = RegretState::new(x.to_vec()).unwrap();
        let lhs = u4_array(&x);
        prop_assert!((lhs - phi(&s) - v3_raw(sorted_gaps(&x))).abs() <= 1e-12);
    }

    #[test]
    fn diagonal(a in 0.0..4.0f64, b in 0.0..4.0f64) {
        prop_assert!((v3_raw([a, b, a]) - v2d(a, b).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn gradient_in_simplex(x in point()) {
        let (g, _) = u4_derivatives(&x);
        for gi in g {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&gi));
        }
        prop_assert!((g.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn hessian_structure(x in point()) {
        let (_, h) = u4_derivatives(&x);
        for i in 0..4 {
            prop_assert!(h[i].iter().sum::<f64>().abs() <= 1e-10);
            for j in 0..4 {
                prop_assert!((h[i][j] - h[j][i]).abs() <= 1e-10);
            }
        }
        for j in ExpertSubset::all(4) {
            let d = j.quadratic_form(&h) - j.complement(4).quadratic_form(&h);
            prop_assert!(d.abs() <= 1e-10);
        }
    }

    #[test]
    fn gradient_matches_differences(x in chamber_point()) {
        let (g, _) = u4_derivatives(&x);
        let err = |h: f64| {
            (0..4).map(|i| {
                let mut a = x;
                let mut b = x;
                a[i] += h;
                b[i] -= h;
                ((u4_array(&a) - u4_array(&b)) / (2.0 * h) - g[i]).abs()
            }).fold(0.0, f64::max)
        };
        let (e1, e2) = (err(1e-3), err(5e-4));
        prop_assert!(e1 <= 1e-5);
        // below ~1e-10 round-off dominates and the ratio says nothing
        prop_assert!(e1 <= 1e-10 || (2.5..6.0).contains(&(e1 / e2)), "e1 {} e2 {}", e1, e2);
    }

    #[test]
    fn hessian_continuous_across_ties(x in point(), a in 0usize..3) {
        let mut z = x;
        z.sort_by(f64::total_cmp);
        z[a + 1] = z[a];
        let (_, h0) = u4_derivatives(&z);
        for s in [-1e-7, 1e-7] {
            let mut y = z;
            y[a + 1] += s;
            let (_, h1) = u4_derivatives(&y);
            for i in 0..4 {
                for j in 0..4 {
                    prop_assert!((h0[i][j] - h1[i][j]).abs() < 1e-4);
                }
            }
        }
    }

    #[test]
    fn argmax_closed_under_complement(x in point()) {
        let s = RegretState::new(x.to_vec()).unwrap();
        let am = hamiltonian_argmax(&s, 1e-9).unwrap();
        for j in &am {
            prop_assert!(am.contains(&j.complement(4)));
        }
        let c = comb_set_array(&x);
        prop_assert!(am.contains(&c));
        prop_assert!(!(am.len() <= 2 && am.iter().all(|j| j.is_empty() || j.len() == 4)));
    }

    #[test]
    fn dpp_shift_monotone_duality(
        c in prop::collection::vec(-1.0..1.0f64, 8),
        bump in prop::collection::vec(0.0..0.5f64, 8),
        k in -3.0..3.0f64,
    ) {
        let base = SubsetCosts::new(3, c.clone()).unwrap();
        let (v, _) = dpp_inner(&base).unwrap();
        let (d, _) = dpp_inner_dual(&base).unwrap();
        prop_assert!((v - d).abs() <= 1e-9);
        let shifted = SubsetCosts::new(3, c.iter().map(|x| x + k).collect()).unwrap();
        prop_assert!((dpp_inner(&shifted).unwrap().0 - v - k).abs() <= 1e-10);
        let up = SubsetCosts::new(3, c.iter().zip(&bump).map(|(x, b)| x + b).collect()).unwrap();
        prop_assert!(dpp_inner(&up).unwrap().0 >= v - 1e-12);
    }

    #[test]
    fn push_lands_in_orthant(y in prop::array::uniform3(-2.0..2.0f64)) {
        let spec = ReflectionSpec::three_gap();
        let (out, dl) = skorokhod_push(&y, &spec).unwrap();
        for i in 0..3 {
            prop_assert!(out[i] >= -1e-10 && dl[i] >= 0.0);
            prop_assert!(dl[i] == 0.0 || out[i] <= 1e-10);
        }
    }
}

#[test]
fn all_permutations() {
    let x = [0.3, -1.2, 2.0, 0.7];
    let u = u4_array(&x);
    let mut count = 0;
    let mut p = [0usize, 1, 2, 3];
    // Heap's algorithm
    let mut c = [0usize; 4];
    let mut check = |p: &[usize; 4]| {
        count += 1;
        assert!((u4_array(&p.map(|k| x[k])) - u).abs() <= 1e-12);
    };
    check(&p);
    let mut i = 0;
    while i < 4 {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            check(&p);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    assert_eq!(count, 24);
}
