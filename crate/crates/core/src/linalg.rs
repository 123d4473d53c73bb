//! Dense double-precision linear algebra used throughout the crate.
//!
//! Storage and the decompositions come from `nalgebra`; this module pins the
//! conventions the rest of the crate relies on: dimension checks surface as
//! [`Error::DimensionMismatch`], singular values are sorted in descending
//! order, and every rank decision uses the same relative cutoff
//! [`RANK_TOL`]` * sigma_max`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type DenseMatrix = DMatrix<f64>;

/// Relative singular-value cutoff for every rank decision.
pub const RANK_TOL: f64 = 1e-10;

fn check(op: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            op,
            expected,
            found,
        })
    }
}

/// `A x`
pub fn matvec(a: &DenseMatrix, x: &Vector) -> Result<Vector> {
    check("matvec", a.ncols(), x.len())?;
    Ok(a * x)
}

/// `A' x`
pub fn matvec_t(a: &DenseMatrix, x: &Vector) -> Result<Vector> {
    check("matvec_t", a.nrows(), x.len())?;
    Ok(a.tr_mul(x))
}

pub fn norm2(x: &Vector) -> f64 {
    x.norm()
}

pub fn norm_inf(x: &Vector) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn dot(x: &Vector, y: &Vector) -> Result<f64> {
    check("dot", x.len(), y.len())?;
    Ok(x.dot(y))
}

/// Singular values of a matrix, largest first.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub singular_values: Vec<f64>,
}

impl Spectrum {
    pub fn spectral_norm(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn smallest(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }

    /// `sigma_max / sigma_min`; infinite for a singular matrix.
    pub fn cond(&self) -> f64 {
        let min = self.smallest();
        if min == 0.0 {
            f64::INFINITY
        } else {
            self.spectral_norm() / min
        }
    }

    /// Number of singular values above `rel_tol * sigma_max`.
    pub fn rank_with(&self, rel_tol: f64) -> usize {
        let cutoff = rel_tol * self.spectral_norm();
        self.singular_values
            .iter()
            .filter(|&&s| s > cutoff && s > 0.0)
            .count()
    }

    pub fn rank(&self) -> usize {
        self.rank_with(RANK_TOL)
    }
}

fn sort_descending(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut values: Vec<f64> = values.into_iter().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

pub fn svd_spectrum(a: &DenseMatrix) -> Spectrum {
    if a.is_empty() {
        return Spectrum {
            singular_values: Vec::new(),
        };
    }
    let values = a.clone().singular_values();
    Spectrum {
        singular_values: sort_descending(values.iter().copied()),
    }
}

struct ThinSvd {
    u: DenseMatrix,
    s: Vec<f64>,
    v_t: DenseMatrix,
}

fn thin_svd(a: &DenseMatrix) -> ThinSvd {
    let svd = a.clone().svd(true, true);
    ThinSvd {
        u: svd.u.expect("left singular vectors requested"),
        s: svd.singular_values.iter().copied().collect(),
        v_t: svd.v_t.expect("right singular vectors requested"),
    }
}

fn cutoff(s: &[f64]) -> f64 {
    RANK_TOL * s.iter().fold(0.0_f64, |m, &v| m.max(v))
}

/// Minimum-norm least-squares solution of `A x = y` through the
/// pseudo-inverse.
pub fn least_squares_solve(a: &DenseMatrix, y: &Vector) -> Result<Vector> {
    check("least_squares_solve", a.nrows(), y.len())?;
    if a.is_empty() {
        return Ok(Vector::zeros(a.ncols()));
    }
    let ThinSvd { u, s, v_t } = thin_svd(a);
    let tol = cutoff(&s);
    let mut coeffs = u.tr_mul(y);
    for (c, &sv) in coeffs.iter_mut().zip(&s) {
        *c = if sv > tol && sv > 0.0 { *c / sv } else { 0.0 };
    }
    Ok(v_t.tr_mul(&coeffs))
}

/// Orthonormal basis of the numerical column space of `m`, one column per
/// retained singular value.
pub fn orthonormal_range_basis(m: &DenseMatrix) -> DenseMatrix {
    if m.is_empty() {
        return DenseMatrix::zeros(m.nrows(), 0);
    }
    let ThinSvd { u, s, .. } = thin_svd(m);
    let tol = cutoff(&s);
    let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] > tol && s[i] > 0.0).collect();
    DenseMatrix::from_fn(m.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

/// Applies the orthogonal projector `U U'` for an orthonormal `U`.
pub fn project_onto(basis: &DenseMatrix, v: &Vector) -> Vector {
    basis * basis.tr_mul(v)
}

pub fn all_finite(x: &Vector) -> bool {
    x.iter().all(|v| v.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn matvec_basics() {
        let x = Vector::from_vec(vec![3.0, 4.0]);
        assert_eq!(matvec(&DenseMatrix::identity(2, 2), &x).unwrap(), x);
        let d = DenseMatrix::from_diagonal(&Vector::from_vec(vec![1.0, 2.0]));
        assert_eq!(
            matvec(&d, &Vector::from_element(2, 1.0)).unwrap().as_slice(),
            &[1.0, 2.0]
        );
        let z = matvec(&DenseMatrix::zeros(3, 2), &x).unwrap();
        assert_eq!(z, Vector::zeros(3));
    }

    #[test]
    fn matvec_rejects_mismatch() {
        let err = matvec(&DenseMatrix::zeros(2, 3), &Vector::zeros(2)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 3, found: 2, .. }));
        assert!(matvec_t(&DenseMatrix::zeros(2, 3), &Vector::zeros(3)).is_err());
        assert!(dot(&Vector::zeros(2), &Vector::zeros(3)).is_err());
    }

    #[test]
    fn norms_and_dot() {
        assert_eq!(norm2(&Vector::from_vec(vec![3.0, 4.0])), 5.0);
        assert_eq!(norm_inf(&Vector::from_vec(vec![0.5, -0.7])), 0.7);
        let d = dot(
            &Vector::from_vec(vec![1.0, 1.0]),
            &Vector::from_vec(vec![-1.0, 1.0]),
        )
        .unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn spectrum_of_diagonal() {
        let d = DenseMatrix::from_diagonal(&Vector::from_vec(vec![1.0, 4.0]));
        let s = svd_spectrum(&d);
        assert_relative_eq!(s.singular_values[0], 4.0, max_relative = 1e-12);
        assert_relative_eq!(s.singular_values[1], 1.0, max_relative = 1e-12);
        assert_relative_eq!(s.cond(), 4.0, max_relative = 1e-12);
        assert_eq!(s.rank(), 2);
    }

    #[test]
    fn spectrum_of_orthonormal_matrix() {
        let theta = 0.3_f64;
        let q = DenseMatrix::from_row_slice(
            2,
            2,
            &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()],
        );
        for s in svd_spectrum(&q).singular_values {
            assert_relative_eq!(s, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn singular_matrix_has_infinite_condition() {
        let s = svd_spectrum(&DenseMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]));
        assert_eq!(s.rank(), 1);
        assert!(s.cond() > 1e12);
    }

    #[test]
    fn least_squares_identity_and_consistent() {
        let y = Vector::from_vec(vec![0.3, -2.0, 5.0]);
        let sol = least_squares_solve(&DenseMatrix::identity(3, 3), &y).unwrap();
        assert_relative_eq!(sol, y, epsilon = 1e-12);

        let a = DenseMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
        let sol = least_squares_solve(&a, &Vector::from_vec(vec![1.0, 1.0])).unwrap();
        assert_relative_eq!(sol[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn range_basis_of_duplicated_columns() {
        let m = DenseMatrix::from_column_slice(3, 2, &[1.0, 2.0, 2.0, 1.0, 2.0, 2.0]);
        let u = orthonormal_range_basis(&m);
        assert_eq!(u.ncols(), 1);
        assert_relative_eq!(u.column(0).norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn range_basis_of_identity_is_complete() {
        let u = orthonormal_range_basis(&DenseMatrix::identity(3, 3));
        assert_relative_eq!(&u * u.transpose(), DenseMatrix::identity(3, 3), epsilon = 1e-12);
    }
}
