//! Sparsity regularizers and their proximal operators.
//!
//! For a regularizer `f` and a parameter `mu > 0` the proximal operator is
//!
//! ```text
//! prox_f(x; mu) = argmin_y  mu f(y) + 1/2 ||x - y||^2
//! ```
//!
//! Both supported regularizers have closed forms. The nonconvex `l1 - l2`
//! operator is set-valued when `||y||_inf <= mu`; [`prox_l1_minus_l2`]
//! returns a single deterministic selection.

use serde::{Deserialize, Serialize};

use crate::linalg::{norm2, norm_inf, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularizerKind {
    L1,
    L1MinusL2,
}

impl RegularizerKind {
    pub fn value(self, x: &Vector) -> f64 {
        reg_value(self, x)
    }

    pub fn prox(self, x: &Vector, mu: f64) -> Vector {
        match self {
            RegularizerKind::L1 => prox_l1(x, mu),
            RegularizerKind::L1MinusL2 => prox_l1_minus_l2(x, mu),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RegularizerKind::L1 => "l1",
            RegularizerKind::L1MinusL2 => "l12",
        }
    }
}

/// `||x||_1` or `||x||_1 - ||x||_2`; the latter is nonnegative by
/// Cauchy-Schwarz, so tiny negative rounding is clamped away.
pub fn reg_value(kind: RegularizerKind, x: &Vector) -> f64 {
    let l1 = x.lp_norm(1);
    match kind {
        RegularizerKind::L1 => l1,
        RegularizerKind::L1MinusL2 => (l1 - norm2(x)).max(0.0),
    }
}

fn soft_threshold(v: f64, mu: f64) -> f64 {
    if v > mu {
        v - mu
    } else if v < -mu {
        v + mu
    } else {
        0.0
    }
}

/// Soft thresholding, `sign(x) * max(|x| - mu, 0)` componentwise.
pub fn prox_l1(x: &Vector, mu: f64) -> Vector {
    x.map(|v| soft_threshold(v, mu))
}

/// Proximal operator of `||.||_1 - ||.||_2`.
///
/// When `||y||_inf > lam` the minimizer is the soft-thresholded vector `z`
/// pushed outward to norm `||z|| + lam`. Otherwise every minimizer is
/// supported on the entries of maximal magnitude with norm `||y||_inf`; we
/// return the one concentrated on the first such index (exact floating-point
/// comparison). `y = 0` maps to `0`.
pub fn prox_l1_minus_l2(y: &Vector, lam: f64) -> Vector {
    let peak = norm_inf(y);
    if peak > lam {
        let z = prox_l1(y, lam);
        let nz = norm2(&z);
        return z * ((nz + lam) / nz);
    }
    let mut out = Vector::zeros(y.len());
    if peak == 0.0 {
        return out;
    }
    if let Some(i) = y.iter().position(|v| v.abs() == peak) {
        out[i] = y[i].signum() * peak;
    }
    out
}

/// Euclidean distance from `v` to the subdifferential of `||.||_1` at `x`.
pub fn l1_subdiff_distance(x: &Vector, v: &Vector) -> f64 {
    assert_eq!(x.len(), v.len(), "l1_subdiff_distance: length mismatch");
    x.iter()
        .zip(v.iter())
        .map(|(&xi, &vi)| {
            let target = if xi > 0.0 {
                1.0
            } else if xi < 0.0 {
                -1.0
            } else {
                vi.clamp(-1.0, 1.0)
            };
            (vi - target).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// The subgradient of `||.||_2` used by the `l1 - l2` stationarity test and
/// DCA: `x / ||x||`, and `0` at the origin.
pub fn l2_subgradient(x: &Vector) -> Vector {
    let n = norm2(x);
    if n == 0.0 {
        Vector::zeros(x.len())
    } else {
        x / n
    }
}

/// Distance of `-grad / lambda` (shifted by the `l2` subgradient for the
/// nonconvex case) to `d||x||_1`. Zero at stationary points of
/// `lambda f(x) + g(x)` with `grad = grad g(x)`.
pub fn stationarity_residual(kind: RegularizerKind, x: &Vector, grad: &Vector, lambda: f64) -> f64 {
    let mut v = -grad / lambda;
    if kind == RegularizerKind::L1MinusL2 {
        v += l2_subgradient(x);
    }
    l1_subdiff_distance(x, &v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn prox_objective(kind: RegularizerKind, y: &Vector, mu: f64, c: &Vector) -> f64 {
        mu * reg_value(kind, c) + 0.5 * (c - y).norm_squared()
    }

    #[test]
    fn reg_values() {
        assert_eq!(reg_value(RegularizerKind::L1, &v(&[3.0, -4.0])), 7.0);
        assert_eq!(reg_value(RegularizerKind::L1MinusL2, &v(&[3.0, -4.0])), 2.0);
        assert_eq!(reg_value(RegularizerKind::L1MinusL2, &v(&[0.0, -2.5, 0.0])), 0.0);
    }

    #[test]
    fn soft_threshold_formula() {
        assert_eq!(prox_l1(&v(&[3.0, -0.5, 1.0]), 1.0), v(&[2.0, 0.0, 0.0]));
        let x = v(&[0.3, -1.2, 7.0]);
        assert_relative_eq!(prox_l1(&x, 1e-15), x, epsilon = 1e-12);
    }

    #[test]
    fn soft_threshold_beats_local_grid() {
        let x = v(&[0.81, -0.12, 0.4, -1.7, 0.05, 0.37]);
        let mu = 0.37;
        let p = prox_l1(&x, mu);
        let base = prox_objective(RegularizerKind::L1, &x, mu, &p);
        for i in 0..x.len() {
            for k in -20..=20 {
                let mut q = p.clone();
                q[i] += k as f64 * 1e-3;
                assert!(base <= prox_objective(RegularizerKind::L1, &x, mu, &q) + 1e-15);
            }
        }
    }

    #[test]
    fn l12_prox_large_branch() {
        assert_relative_eq!(prox_l1_minus_l2(&v(&[2.0, 0.0]), 1.0), v(&[2.0, 0.0]), epsilon = 1e-15);
        let out = prox_l1_minus_l2(&v(&[-3.0, 3.0]), 1.0);
        let s = 2.0_f64.sqrt();
        let expected = 2.0 * (2.0 * s + 1.0) / (2.0 * s);
        assert_relative_eq!(out, v(&[-expected, expected]), epsilon = 1e-12);
        assert_relative_eq!(expected, 2.707106781186548, epsilon = 1e-12);
    }

    #[test]
    fn l12_prox_matches_grid_on_two_dimensional_example() {
        // brute force over [-4, 4]^2 at step 1e-3 around the symmetric axis
        let y = v(&[-3.0, 3.0]);
        let out = prox_l1_minus_l2(&y, 1.0);
        let f = |a: f64, b: f64| {
            let c = v(&[a, b]);
            prox_objective(RegularizerKind::L1MinusL2, &y, 1.0, &c)
        };
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..=800 {
            let a = -4.0 + 0.01 * i as f64;
            for j in 0..=800 {
                let b = -4.0 + 0.01 * j as f64;
                let val = f(a, b);
                if val < best.0 {
                    best = (val, a, b);
                }
            }
        }
        let (mut val, mut a0, mut b0) = best;
        for i in -20..=20 {
            for j in -20..=20 {
                let a = best.1 + 1e-3 * i as f64;
                let b = best.2 + 1e-3 * j as f64;
                let fv = f(a, b);
                if fv < val {
                    val = fv;
                    a0 = a;
                    b0 = b;
                }
            }
        }
        assert!(f(out[0], out[1]) <= val + 1e-12);
        assert!((a0 - out[0]).abs() < 2e-3 && (b0 - out[1]).abs() < 2e-3);
    }

    #[test]
    fn l12_prox_small_branch_selects_first_peak() {
        assert_eq!(prox_l1_minus_l2(&v(&[0.5, 0.3]), 1.0), v(&[0.5, 0.0]));
        assert_eq!(prox_l1_minus_l2(&v(&[0.2, -0.6, 0.6]), 1.0), v(&[0.0, -0.6, 0.0]));
        assert_eq!(prox_l1_minus_l2(&v(&[0.0, 0.0]), 0.5), v(&[0.0, 0.0]));
    }

    #[test]
    fn l12_prox_one_dimensional_is_identity() {
        for &y in &[-2.0, -0.3, 0.0, 0.7, 5.0] {
            assert_relative_eq!(prox_l1_minus_l2(&v(&[y]), 1.0)[0], y, epsilon = 1e-14);
        }
    }

    #[test]
    fn subdiff_distance_cases() {
        assert_eq!(l1_subdiff_distance(&v(&[1.0, 0.0]), &v(&[1.0, 0.0])), 0.0);
        assert_eq!(l1_subdiff_distance(&v(&[1.0, 0.0]), &v(&[1.0, 2.0])), 1.0);
        assert_eq!(l1_subdiff_distance(&v(&[-1.0]), &v(&[0.5])), 1.5);
    }

    #[test]
    fn l2_subgradient_at_origin_is_zero() {
        assert_eq!(l2_subgradient(&v(&[0.0, 0.0])), v(&[0.0, 0.0]));
        assert_relative_eq!(l2_subgradient(&v(&[3.0, 4.0])), v(&[0.6, 0.8]), epsilon = 1e-15);
    }
}
