use std::path::Path;

use ncgm::composite::{composite_objective, prox_gradient_step, CompositeProblem};
use ncgm::diagnostics::{parse_trace_csv, relative_error, trace_to_csv, Flags, Trace, TraceRow};
use ncgm::momentum::{momentum_coefficient, MomentumKind};
use ncgm::problem::{gaussian_sensing_matrix, sign_projection, sparse_signal};
use ncgm::prox::{prox_l1, prox_l1_minus_l2, reg_value, RegularizerKind};
use ncgm::Vector;
use proptest::prelude::*;

fn vec_strategy(n: usize, r: f64) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-r..r, n).prop_map(Vector::from_vec)
}

fn dims_and_vecs(r: f64) -> impl Strategy<Value = (Vector, Vector)> {
    (1usize..12).prop_flat_map(move |n| (vec_strategy(n, r), vec_strategy(n, r)))
}

fn prox_objective(kind: RegularizerKind, z: &Vector, y: &Vector, lam: f64) -> f64 {
    0.5 * (z - y).norm_squared() + lam * reg_value(kind, z)
}

fn opt_f64() -> impl Strategy<Value = Option<f64>> {
    prop_oneof![Just(None), any::<f64>().prop_filter("finite", |v| v.is_finite()).prop_map(Some)]
}

prop_compose! {
    fn row()(iter in 0usize..1_000_000,
             objective in any::<f64>(),
             rel_error in opt_f64(),
             norm in any::<f64>(),
             alpha in opt_f64(),
             beta in opt_f64(),
             bits in 0u8..32) -> TraceRow {
        TraceRow { iter, objective, rel_error, norm, alpha, beta, flags: Flags::from_bits_truncate(bits) }
    }
}

proptest! {
    #[test]
    fn l1_prox_beats_perturbations((y, d) in dims_and_vecs(3.0), lam in 0.01f64..2.0, eps in 1e-4f64..0.5) {
        let z = prox_l1(&y, lam);
        let base = prox_objective(RegularizerKind::L1, &z, &y, lam);
        let other = prox_objective(RegularizerKind::L1, &(&z + &d * eps), &y, lam);
        prop_assert!(base <= other + 1e-12);
    }

    #[test]
    fn l12_prox_beats_perturbations((y, d) in dims_and_vecs(3.0), lam in 0.01f64..2.0, eps in 1e-4f64..0.5) {
        let z = prox_l1_minus_l2(&y, lam);
        let base = prox_objective(RegularizerKind::L1MinusL2, &z, &y, lam);
        let other = prox_objective(RegularizerKind::L1MinusL2, &(&z + &d * eps), &y, lam);
        prop_assert!(base <= other + 1e-12);
        prop_assert!(base <= prox_objective(RegularizerKind::L1MinusL2, &Vector::zeros(y.len()), &y, lam) + 1e-12);
    }

    #[test]
    fn sign_projection_is_idempotent((v, x) in dims_and_vecs(2.0)) {
        let w = sign_projection(&v, &x);
        prop_assert_eq!(sign_projection(&w, &x), w.clone());
        for i in 0..x.len() {
            if x[i] > 0.0 {
                prop_assert_eq!(w[i], 1.0);
            } else if x[i] < 0.0 {
                prop_assert_eq!(w[i], -1.0);
            } else {
                prop_assert!(w[i].abs() <= 1.0);
            }
        }
    }

    #[test]
    fn relative_error_is_scale_invariant((x, xs) in dims_and_vecs(5.0), c in 0.1f64..10.0) {
        prop_assume!(xs.norm() > 1e-3);
        let r = relative_error(&x, &xs).unwrap();
        let rc = relative_error(&(&x * c), &(&xs * c)).unwrap();
        prop_assert!((r - rc).abs() <= 1e-12 * r.max(1.0));
        prop_assert_eq!(relative_error(&xs, &xs).unwrap(), 0.0);
    }

    #[test]
    fn csv_round_trip(rows in prop::collection::vec(row(), 0..20)) {
        let mut trace = Trace::new("t");
        trace.rows = rows;
        let text = trace_to_csv(&trace);
        let back = parse_trace_csv("t", &text, Path::new("t.csv")).unwrap();
        prop_assert_eq!(back.rows.len(), trace.rows.len());
        for (a, b) in back.rows.iter().zip(&trace.rows) {
            prop_assert_eq!(a.iter, b.iter);
            prop_assert!(a.objective.to_bits() == b.objective.to_bits() || (a.objective.is_nan() && b.objective.is_nan()));
            prop_assert!(a.norm.to_bits() == b.norm.to_bits() || (a.norm.is_nan() && b.norm.is_nan()));
            prop_assert_eq!(a.rel_error, b.rel_error);
            prop_assert_eq!(a.alpha, b.alpha);
            prop_assert_eq!(a.beta, b.beta);
            prop_assert_eq!(a.flags, b.flags);
        }
        prop_assert_eq!(trace_to_csv(&back), text);
    }

    #[test]
    fn generators_are_deterministic(seed in any::<u64>(), n in 4usize..64) {
        let s = n / 4;
        prop_assert_eq!(sparse_signal(n, s, seed).unwrap(), sparse_signal(n, s, seed).unwrap());
        prop_assert_eq!(gaussian_sensing_matrix(3, n, seed).unwrap(), gaussian_sensing_matrix(3, n, seed).unwrap());
        let x = sparse_signal(n, s, seed).unwrap();
        prop_assert_eq!(x.iter().filter(|v| **v != 0.0).count(), s);
    }

    #[test]
    fn fletcher_reeves_coefficient_is_nonnegative((g, gp) in dims_and_vecs(3.0)) {
        prop_assume!(gp.norm() > 1e-6);
        let beta = momentum_coefficient(MomentumKind::Fr, &g, &gp, &g).unwrap();
        prop_assert!(beta >= 0.0);
        prop_assert!((beta - g.norm_squared() / gp.norm_squared()).abs() <= 1e-12 * beta.max(1.0));
    }

    #[test]
    fn short_prox_gradient_steps_descend(seed in 0u64..1000, lam in 0.01f64..1.0, l12 in any::<bool>(), frac in 0.1f64..1.0) {
        let a = gaussian_sensing_matrix(6, 10, seed).unwrap();
        let b = Vector::from_fn(6, |i, _| (i as f64 * 0.7).sin());
        let reg = if l12 { RegularizerKind::L1MinusL2 } else { RegularizerKind::L1 };
        let p = CompositeProblem::new(a, b, lam, reg).unwrap();
        let mut x = Vector::from_fn(10, |i, _| (i as f64 * 1.3).cos());
        let delta = frac / p.lipschitz();
        for _ in 0..10 {
            let next = prox_gradient_step(&p, &x, delta).unwrap();
            let (f0, f1) = (composite_objective(&p, &x).unwrap(), composite_objective(&p, &next).unwrap());
            prop_assert!(f1 <= f0 + 1e-12 * f0.abs().max(1.0));
            x = next;
        }
    }
}
