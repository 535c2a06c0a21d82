use igam::constraints::{is_feasible, project, project_decreasing, project_increasing, ConstraintKind};
use igam::dataset::{apply_normalization, fit_normalization, parse_csv, scaled_weights, write_csv, CsvOptions, Dataset};
use igam::eval::rnmse;
use igam::gam::TrainConfig;
use proptest::prelude::*;

fn anchors_and_values() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..=64).prop_flat_map(|m| {
        (
            prop::collection::vec(0.01f64..3.0, m).prop_map(|gaps| {
                gaps.iter()
                    .scan(-2.0, |acc, g| {
                        *acc += g;
                        Some(*acc)
                    })
                    .collect()
            }),
            prop::collection::vec(-50.0f64..50.0, m),
        )
    })
}

fn kind() -> impl Strategy<Value = ConstraintKind> {
    prop::sample::select(ConstraintKind::ALL.to_vec())
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn scale(v: &[f64]) -> f64 {
    v.iter().fold(1.0f64, |m, x| m.max(x.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn projection_is_feasible_and_idempotent((a, v) in anchors_and_values(), k in kind()) {
        let p = project(k, &v, &a).unwrap().values;
        prop_assert!(is_feasible(k, &p, &a));
        let again = project(k, &p, &a).unwrap();
        prop_assert!(again.max_displacement <= 1e-12 * scale(&p));
    }

    #[test]
    fn monotone_envelopes_are_dual(v in prop::collection::vec(-1e3f64..1e3, 1..64)) {
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        let dual: Vec<f64> = project_increasing(&neg).iter().map(|x| -x).collect();
        prop_assert!(max_diff(&project_decreasing(&v), &dual) <= 1e-12 * scale(&v));
    }

    #[test]
    fn curvature_projections_are_dual((a, v) in anchors_and_values()) {
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        let convex_neg = project(ConstraintKind::Convex, &neg, &a).unwrap().values;
        let concave = project(ConstraintKind::Concave, &v, &a).unwrap().values;
        let dual: Vec<f64> = convex_neg.iter().map(|x| -x).collect();
        prop_assert!(max_diff(&concave, &dual) <= 1e-12 * scale(&v));
    }

    #[test]
    fn monotone_projection_is_order_preserving(v in prop::collection::vec(-10.0f64..10.0, 2..40), shift in 0.0f64..5.0) {
        // raising every entry cannot lower any output
        let up: Vec<f64> = v.iter().map(|x| x + shift).collect();
        let (p, q) = (project_increasing(&v), project_increasing(&up));
        prop_assert!(p.iter().zip(&q).all(|(a, b)| *b >= *a - 1e-12));
    }

    #[test]
    fn normalization_round_trips(cols in prop::collection::vec(prop::collection::vec(-1e4f64..1e4, 12), 1..4), y in prop::collection::vec(-50.0f64..50.0, 12)) {
        let names = (0..cols.len()).map(|i| format!("f{i}")).collect();
        let d = Dataset::new(names, cols.clone(), y.clone(), None).unwrap();
        let s = fit_normalization(&d, true).unwrap();
        let n = apply_normalization(&d, &s).unwrap();
        for (j, col) in cols.iter().enumerate() {
            let st = s.features[j];
            prop_assert!(st.scale > 0.0);
            for (i, &raw) in col.iter().enumerate() {
                let back = st.inverse(n.column(j)[i]);
                prop_assert!((back - raw).abs() <= 1e-12 * raw.abs().max(st.scale));
            }
        }
        let t = s.target.unwrap();
        for (i, &raw) in y.iter().enumerate() {
            prop_assert!((t.inverse(n.target()[i]) - raw).abs() <= 1e-12 * raw.abs().max(t.scale));
        }
    }

    #[test]
    fn rnmse_is_scale_invariant(y in prop::collection::vec(prop_oneof![0.5f64..100.0, -100.0f64..-0.5], 1..50), noise in prop::collection::vec(-1.0f64..1.0, 50), c in prop_oneof![0.01f64..100.0, -100.0f64..-0.01]) {
        let yhat: Vec<f64> = y.iter().zip(&noise).map(|(a, e)| a + e).collect();
        let base = rnmse(&y, &yhat).unwrap();
        let ys: Vec<f64> = y.iter().map(|v| v * c).collect();
        let ps: Vec<f64> = yhat.iter().map(|v| v * c).collect();
        prop_assert!((rnmse(&ys, &ps).unwrap() - base).abs() <= 1e-12 * base.max(1.0));
    }

    #[test]
    fn doubling_then_halving_is_exact(w in prop::collection::vec(1e-3f64..1e3, 1..100), pick in prop::collection::vec(any::<bool>(), 100), times in 1usize..20) {
        let rows: Vec<usize> = (0..w.len()).filter(|&i| pick[i]).collect();
        let mut v = w.clone();
        for _ in 0..times {
            v = scaled_weights(&v, &rows, 2.0).unwrap();
        }
        for _ in 0..times {
            v = scaled_weights(&v, &rows, 0.5).unwrap();
        }
        prop_assert_eq!(v, w);
    }

    #[test]
    fn config_text_round_trips(lambda in 0.0f64..10.0, k in 1usize..20, step in 1e-3f64..1.0, rounds in 1usize..5000, alpha in 0.0f64..0.99, grid in 1usize..1024, pairwise: bool, stdz: bool, seed: u64) {
        let c = TrainConfig { lambda, k_basis: k, step, rounds, alpha, grid_size: grid, pairwise, standardize_target: stdz, seed, warm_start: false };
        let back = TrainConfig::from_kv(&c.to_kv()).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn csv_round_trips(cols in prop::collection::vec(prop::collection::vec(-1e6f64..1e6, 8), 1..5), y in prop::collection::vec(-1e6f64..1e6, 8)) {
        let names = (0..cols.len()).map(|i| format!("c{i}")).collect();
        let d = Dataset::new(names, cols, y, None).unwrap();
        let mut buf = Vec::new();
        write_csv(&d, "target", &mut buf).unwrap();
        prop_assert_eq!(parse_csv(&buf[..], &CsvOptions::new("target")).unwrap(), d);
    }
}
