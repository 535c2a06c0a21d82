use igam::pla::{fit_pla, weighted_correlations, weighted_norms, Basis, ThresholdGrid};
use proptest::prelude::*;

fn naive_pair(x: &[f64], b: &[f64], w: &[f64], t: &[f64]) -> [Vec<f64>; 4] {
    let mut out = [vec![0.0; t.len()], vec![0.0; t.len()], vec![0.0; t.len()], vec![0.0; t.len()]];
    for (k, &eta) in t.iter().enumerate() {
        for i in 0..x.len() {
            let h = (x[i] - eta).max(0.0);
            let r = (eta - x[i]).max(0.0);
            out[0][k] += w[i] * h * h;
            out[1][k] += w[i] * r * r;
            out[2][k] += w[i] * b[i] * h;
            out[3][k] += w[i] * b[i] * r;
        }
    }
    out
}

fn abs_scale(x: &[f64], b: &[f64], w: &[f64], eta: f64) -> f64 {
    x.iter()
        .zip(b)
        .zip(w)
        .map(|((x, b), w)| w * (x - eta).abs() * (x - eta).abs().max(b.abs()))
        .sum::<f64>()
        .max(1e-300)
}

/// Dense Gaussian elimination with partial pivoting.
fn gauss(mut a: Vec<Vec<f64>>, mut y: Vec<f64>) -> Vec<f64> {
    let n = y.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        y.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            y[r] -= f * y[c];
        }
    }
    let mut q = vec![0.0; n];
    for c in (0..n).rev() {
        let s: f64 = (c + 1..n).map(|k| a[c][k] * q[k]).sum();
        q[c] = (y[c] - s) / a[c][c];
    }
    q
}

fn column(x: &[f64], b: Basis, t: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| match b {
            Basis::Constant => 1.0,
            Basis::Hinge(j) => (v - t[j]).max(0.0),
            Basis::ReverseHinge(j) => (t[j] - v).max(0.0),
        })
        .collect()
}

fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
    (10usize..200, 1usize..40).prop_flat_map(|(n, l)| {
        (
            prop::collection::vec(prop_oneof![(-4i32..4).prop_map(f64::from), -4.0f64..4.0], n),
            prop::collection::vec(-3.0f64..3.0, n),
            prop::collection::vec(0.05f64..3.0, n),
            prop::collection::vec(-5.0f64..5.0, l),
        )
    })
}

fn prepare(mut x: Vec<f64>, mut t: Vec<f64>) -> (Vec<f64>, ThresholdGrid) {
    x.sort_by(f64::total_cmp);
    t.sort_by(f64::total_cmp);
    t.dedup();
    (x, ThresholdGrid::new(t).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernels_match_double_loop((x, b, w, t) in instance()) {
        let (x, grid) = prepare(x, t);
        let norms = weighted_norms(&x, &w, &grid);
        let corr = weighted_correlations(&x, &b, &w, &grid);
        let nv = naive_pair(&x, &b, &w, grid.thresholds());
        for (k, &eta) in grid.thresholds().iter().enumerate() {
            let s = abs_scale(&x, &b, &w, eta);
            prop_assert!((norms.hinge[k] - nv[0][k]).abs() <= 1e-9 * s);
            prop_assert!((norms.rhinge[k] - nv[1][k]).abs() <= 1e-9 * s);
            prop_assert!((corr.hinge[k] - nv[2][k]).abs() <= 1e-9 * s);
            prop_assert!((corr.rhinge[k] - nv[3][k]).abs() <= 1e-9 * s);
        }
    }

    #[test]
    fn coefficients_solve_regularized_normal_equations(
        (x, r, w, t) in instance(),
        lambda in 0.01f64..2.0,
        k in 1usize..6,
        pairwise: bool,
    ) {
        let (xs, grid) = prepare(x.clone(), t);
        let fit = fit_pla(&x, &r, &w, &grid, lambda, k, pairwise).unwrap();
        let th = grid.thresholds();
        let cols: Vec<Vec<f64>> = fit.selected.iter().map(|&b| column(&x, b, th)).collect();
        let dot = |a: &[f64], c: &[f64]| a.iter().zip(c).zip(&w).map(|((a, c), w)| w * a * c).sum::<f64>();
        let n = x.len() as f64;
        let m = cols.len();
        let mut a = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in 0..m {
                a[i][j] = dot(&cols[i], &cols[j]);
            }
            if fit.selected[i] != Basis::Constant {
                a[i][i] += lambda * n;
            }
        }
        let y: Vec<f64> = cols.iter().map(|c| dot(c, &r)).collect();
        let q = gauss(a, y);
        let oracle = |v: f64| -> f64 {
            fit.selected.iter().zip(&q).map(|(&b, q)| q * column(&[v], b, th)[0]).sum()
        };
        let scale = r.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for &v in &xs {
            prop_assert!((fit.function.evaluate(v) - oracle(v)).abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn objective_never_increases((x, r, w, t) in instance(), lambda in 0.0f64..2.0, k in 1usize..8, pairwise: bool) {
        let (_, grid) = prepare(x.clone(), t);
        let fit = fit_pla(&x, &r, &w, &grid, lambda, k, pairwise).unwrap();
        for p in fit.objective_trace.windows(2) {
            prop_assert!(p[1] <= p[0] + 1e-12 * p[0].abs().max(1.0));
        }
    }

    #[test]
    fn fitted_function_is_linear_between_thresholds((x, r, w, t) in instance()) {
        let (_, grid) = prepare(x.clone(), t);
        let g = fit_pla(&x, &r, &w, &grid, 0.5, 4, true).unwrap().function;
        let th = grid.thresholds();
        for p in th.windows(2) {
            let (a, b) = (p[0], p[1]);
            let (ga, gb) = (g.evaluate(a), g.evaluate(b));
            for i in 1..8 {
                let s = i as f64 / 8.0;
                let v = a + s * (b - a);
                let line = ga + s * (gb - ga);
                prop_assert!((g.evaluate(v) - line).abs() <= 1e-12 * ga.abs().max(gb.abs()).max(1.0));
            }
        }
    }
}

#[test]
fn single_hinge_is_recovered_exactly() {
    let x = [-1.0, 0.0, 1.0, 2.0];
    let r = [0.0, 0.0, 1.0, 2.0];
    let grid = ThresholdGrid::new(vec![0.0]).unwrap();
    let g = fit_pla(&x, &r, &[1.0; 4], &grid, 0.0, 1, true).unwrap().function;
    for i in 0..=300 {
        let v = -1.0 + 0.01 * i as f64;
        assert!((g.evaluate(v) - v.max(0.0)).abs() <= 1e-8, "x = {v}");
    }
}
