//! Nonlinear conjugate gradient momentum coefficients.
//!
//! All four rules share the gradient difference `y = g_curr - g_prev`:
//!
//! | kind | numerator          | denominator         |
//! |------|--------------------|---------------------|
//! | FR   | `‖g_curr‖²`        | `‖g_prev‖²`         |
//! | PR   | `⟨g_curr, y⟩`      | `‖g_prev‖²`         |
//! | HS   | `⟨g_curr, y⟩`      | `-⟨x_curr, y⟩`      |
//! | DY   | `‖g_curr‖²`        | `-⟨x_curr, y⟩`      |
//!
//! The HS/DY denominators pair the difference with the current iterate.
//! [`HsDyDenominator::Conventional`] swaps in the textbook `⟨d, y⟩`, with `d`
//! the previous search direction.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentumKind {
    Fr,
    Pr,
    Hs,
    Dy,
}

impl MomentumKind {
    pub const ALL: [MomentumKind; 4] = [
        MomentumKind::Fr,
        MomentumKind::Pr,
        MomentumKind::Hs,
        MomentumKind::Dy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MomentumKind::Fr => "fr",
            MomentumKind::Pr => "pr",
            MomentumKind::Hs => "hs",
            MomentumKind::Dy => "dy",
        }
    }
}

impl FromStr for MomentumKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MomentumKind::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown momentum kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HsDyDenominator {
    /// `-⟨x_curr, g_curr - g_prev⟩`
    #[default]
    Iterate,
    /// `⟨d_prev, g_curr - g_prev⟩`
    Conventional,
}

/// Denominators at or below this fraction of their natural scale count as
/// zero.
pub const DENOMINATOR_RTOL: f64 = 1e-14;

fn ratio(numerator: f64, denominator: f64, scale: f64) -> Result<f64> {
    if denominator.abs() <= DENOMINATOR_RTOL * scale || denominator == 0.0 {
        Err(Error::ZeroDenominator { denominator })
    } else {
        Ok(numerator / denominator)
    }
}

fn coefficient(
    kind: MomentumKind,
    g_curr: &Vector,
    g_prev: &Vector,
    anchor: &Vector,
    anchor_sign: f64,
) -> Result<f64> {
    let gg = g_curr.norm_squared();
    match kind {
        MomentumKind::Fr | MomentumKind::Pr => {
            let den = g_prev.norm_squared();
            let num = if kind == MomentumKind::Fr {
                gg
            } else {
                gg - g_curr.dot(g_prev)
            };
            ratio(num, den, gg.max(den))
        }
        MomentumKind::Hs | MomentumKind::Dy => {
            let y = g_curr - g_prev;
            let den = anchor_sign * anchor.dot(&y);
            let num = if kind == MomentumKind::Hs {
                g_curr.dot(&y)
            } else {
                gg
            };
            ratio(num, den, anchor.norm() * y.norm())
        }
    }
}

/// Momentum coefficient with the iterate-paired HS/DY denominators.
pub fn momentum_coefficient(
    kind: MomentumKind,
    g_curr: &Vector,
    g_prev: &Vector,
    x_curr: &Vector,
) -> Result<f64> {
    coefficient(kind, g_curr, g_prev, x_curr, -1.0)
}

/// Momentum coefficient with the textbook HS/DY denominators `⟨d, y⟩`.
pub fn conventional_momentum_coefficient(
    kind: MomentumKind,
    g_curr: &Vector,
    g_prev: &Vector,
    direction: &Vector,
) -> Result<f64> {
    coefficient(kind, g_curr, g_prev, direction, 1.0)
}

/// Dispatches on the denominator convention. `direction` is only read for
/// [`HsDyDenominator::Conventional`].
pub fn momentum_with(
    kind: MomentumKind,
    denominator: HsDyDenominator,
    g_curr: &Vector,
    g_prev: &Vector,
    x_curr: &Vector,
    direction: &Vector,
) -> Result<f64> {
    match denominator {
        HsDyDenominator::Iterate => momentum_coefficient(kind, g_curr, g_prev, x_curr),
        HsDyDenominator::Conventional => {
            conventional_momentum_coefficient(kind, g_curr, g_prev, direction)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn fletcher_reeves_ratio() {
        let b = momentum_coefficient(MomentumKind::Fr, &v(&[0.6, 0.8]), &v(&[2.0, 0.0]), &v(&[0.0, 0.0]));
        assert!((b.unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn polak_ribiere_vanishes_for_equal_gradients() {
        let g = v(&[1.5, -0.2, 3.0]);
        let b = momentum_coefficient(MomentumKind::Pr, &g, &g, &v(&[1.0, 1.0, 1.0])).unwrap();
        assert_eq!(b, 0.0);
    }

    #[test]
    fn dai_yuan_detects_orthogonal_denominator() {
        let err = momentum_coefficient(MomentumKind::Dy, &v(&[0.0, 1.0]), &v(&[1.0, 0.0]), &v(&[1.0, 1.0]));
        assert!(matches!(err, Err(Error::ZeroDenominator { .. })));
    }

    #[test]
    fn hestenes_stiefel_uses_negated_iterate_product() {
        // y = [-1, 2], <g, y> = 4, -<x, y> = 1 for x = [1, 0]
        let b = momentum_coefficient(MomentumKind::Hs, &v(&[0.0, 2.0]), &v(&[1.0, 0.0]), &v(&[1.0, 0.0])).unwrap();
        assert!((b - 4.0).abs() < 1e-15);
        let c = conventional_momentum_coefficient(MomentumKind::Hs, &v(&[0.0, 2.0]), &v(&[1.0, 0.0]), &v(&[1.0, 0.0]))
            .unwrap();
        assert!((c + 4.0).abs() < 1e-15);
    }

    #[test]
    fn zero_previous_gradient_is_an_error() {
        let err = momentum_coefficient(MomentumKind::Fr, &v(&[1.0]), &v(&[0.0]), &v(&[1.0]));
        assert!(err.is_err());
    }

    #[test]
    fn parse_kinds() {
        assert_eq!("FR".parse::<MomentumKind>().unwrap(), MomentumKind::Fr);
        assert!("xx".parse::<MomentumKind>().is_err());
    }
}
