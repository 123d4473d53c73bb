//! Gradient schemes for `g(x) = 1/2 x'Ax + x'b` with symmetric PSD `A`.
//!
//! Every scheme takes either a fixed step or the exact line-search step
//! along its direction. FRGD is gradient descent with Fletcher-Reeves
//! momentum; with the exact step it is classic linear CG, with a fixed step
//! it needs no line search at all.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{relative_error, BoundReport, BoundRow, Flags, Recorder, Trace, TraceRow};
use crate::error::{Error, Result};
use crate::linalg::{all_finite, svd_spectrum, DenseMatrix, Vector};
use crate::momentum::{momentum_coefficient, MomentumKind};

#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    pub a: DenseMatrix,
    pub b: Vector,
    pub ground_truth: Option<Vector>,
}

impl QuadraticProblem {
    /// Checks shape and symmetry (`||A - A'||_F <= 1e-12 ||A||_F`).
    pub fn new(a: DenseMatrix, b: Vector) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidArgument(format!(
                "quadratic matrix must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.len() != a.nrows() {
            return Err(Error::DimensionMismatch {
                op: "QuadraticProblem::new",
                expected: a.nrows(),
                found: b.len(),
            });
        }
        let asym = (&a - a.transpose()).norm();
        if asym > 1e-12 * a.norm() {
            return Err(Error::InvalidArgument(format!(
                "quadratic matrix is not symmetric (||A - A'||_F = {asym:e})"
            )));
        }
        Ok(QuadraticProblem {
            a,
            b,
            ground_truth: None,
        })
    }

    pub fn with_ground_truth(mut self, x_star: Vector) -> Self {
        self.ground_truth = Some(x_star);
        self
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn objective(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(&self.a * x)) + x.dot(&self.b)
    }

    fn gradient(&self, x: &Vector) -> Vector {
        &self.a * x + &self.b
    }

    fn check_dim(&self, op: &'static str, x: &Vector) -> Result<()> {
        if x.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                op,
                expected: self.dim(),
                found: x.len(),
            })
        }
    }
}

/// `A x + b`
pub fn quad_grad(p: &QuadraticProblem, x: &Vector) -> Result<Vector> {
    p.check_dim("quad_grad", x)?;
    Ok(p.gradient(x))
}

/// Step `alpha` minimizing `g(x + alpha d)`.
pub fn exact_line_search(p: &QuadraticProblem, x: &Vector, dir: &Vector) -> Result<f64> {
    p.check_dim("exact_line_search", x)?;
    p.check_dim("exact_line_search", dir)?;
    Ok(line_search(p, &p.gradient(x), dir)?)
}

fn line_search(p: &QuadraticProblem, grad: &Vector, dir: &Vector) -> Result<f64> {
    let curvature = dir.dot(&(&p.a * dir));
    if curvature <= 1e-14 * dir.norm_squared() {
        return Err(Error::DegenerateDirection { curvature });
    }
    Ok(-dir.dot(grad) / curvature)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothAlgorithm {
    Gd,
    /// Steepest descent; only valid with the exact step.
    Sd,
    /// Heavy-ball momentum with a constant coefficient.
    Gdm { beta: f64 },
    Nag,
    /// Gradient descent with Fletcher-Reeves momentum.
    Frgd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepMode {
    Fixed(f64),
    ExactLineSearch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothSolverSpec {
    pub algorithm: SmoothAlgorithm,
    pub step: StepMode,
    pub max_iters: usize,
    /// Stop once `||grad g|| <= stop_tol`.
    pub stop_tol: f64,
    pub record_every: usize,
    /// Keep every iterate in [`SmoothRun::iterates`].
    pub keep_iterates: bool,
}

impl SmoothSolverSpec {
    pub fn new(algorithm: SmoothAlgorithm, step: StepMode, max_iters: usize) -> Self {
        SmoothSolverSpec {
            algorithm,
            step,
            max_iters,
            stop_tol: 0.0,
            record_every: 1,
            keep_iterates: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.max_iters == 0 || self.record_every == 0 {
            return bad("max_iters and record_every must be positive");
        }
        if !(self.stop_tol >= 0.0) {
            return bad("stop_tol must be nonnegative");
        }
        if let StepMode::Fixed(alpha) = self.step {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return bad("fixed step must be positive and finite");
            }
        }
        match self.algorithm {
            SmoothAlgorithm::Sd if self.step != StepMode::ExactLineSearch => {
                bad("steepest descent requires the exact line-search step")
            }
            SmoothAlgorithm::Gdm { beta } if !beta.is_finite() => bad("GDM beta must be finite"),
            _ => Ok(()),
        }
    }

    /// Short name such as `frgd-fx` or `nag-ls`.
    pub fn label(&self) -> String {
        let alg = match self.algorithm {
            SmoothAlgorithm::Gd => "gd",
            SmoothAlgorithm::Sd => return "sd".to_string(),
            SmoothAlgorithm::Gdm { .. } => "gdm",
            SmoothAlgorithm::Nag => "nag",
            SmoothAlgorithm::Frgd => "frgd",
        };
        let step = match self.step {
            StepMode::Fixed(_) => "fx",
            StepMode::ExactLineSearch => "ls",
        };
        format!("{alg}-{step}")
    }
}

#[derive(Debug, Clone)]
pub struct SmoothRun {
    pub trace: Trace,
    pub x: Vector,
    /// `x_0, x_1, ...` when [`SmoothSolverSpec::keep_iterates`] is set.
    pub iterates: Vec<Vector>,
}

/// Next term of `t_{l+1} = (1 + sqrt(4 t_l^2 + 1)) / 2`.
pub fn nesterov_t_next(t: f64) -> f64 {
    0.5 * (1.0 + (4.0 * t * t + 1.0).sqrt())
}

pub fn run_smooth(p: &QuadraticProblem, spec: &SmoothSolverSpec, x0: &Vector) -> Result<SmoothRun> {
    spec.validate()?;
    p.check_dim("run_smooth", x0)?;
    let started = Instant::now();

    let mut rec = Recorder::new(spec.label(), spec.record_every, spec.max_iters);
    rec.meta_mut().spec = serde_json::to_string(spec).ok();

    let make_row = |iter: usize, x: &Vector, grad: &Vector, alpha, beta, flags| TraceRow {
        iter,
        objective: p.objective(x),
        rel_error: p
            .ground_truth
            .as_ref()
            .and_then(|xs| relative_error(x, xs).ok()),
        norm: grad.norm(),
        alpha,
        beta,
        flags,
    };

    let mut x = x0.clone();
    let mut grad = p.gradient(&x);
    let mut prev_grad: Option<Vector> = None;
    let mut dir = Vector::zeros(x.len());
    let mut iterates = Vec::new();
    if spec.keep_iterates {
        iterates.push(x.clone());
    }
    // NAG extrapolation state
    let mut t = 1.0;
    let mut y_prev = x.clone();

    rec.push(make_row(0, &x, &grad, None, None, Flags::empty()), true);

    for l in 0..spec.max_iters {
        if grad.norm() <= spec.stop_tol {
            rec.push(make_row(l, &x, &grad, None, None, Flags::CONVERGED), true);
            break;
        }
        let mut flags = Flags::empty();
        let mut beta = None;

        dir = match spec.algorithm {
            SmoothAlgorithm::Gd | SmoothAlgorithm::Sd | SmoothAlgorithm::Nag => -&grad,
            SmoothAlgorithm::Gdm { beta: b } => {
                if l > 0 {
                    beta = Some(b);
                }
                &dir * b - &grad
            }
            SmoothAlgorithm::Frgd => match &prev_grad {
                None => -&grad,
                Some(g_prev) => {
                    let b = match momentum_coefficient(MomentumKind::Fr, &grad, g_prev, &x) {
                        Ok(b) => b,
                        Err(_) => {
                            flags |= Flags::ZERO_DENOMINATOR;
                            0.0
                        }
                    };
                    beta = Some(b);
                    &dir * b - &grad
                }
            },
        };

        let alpha = match spec.step {
            StepMode::Fixed(a) => a,
            StepMode::ExactLineSearch => match line_search(p, &grad, &dir) {
                Ok(a) => a,
                Err(_) => {
                    rec.push(
                        make_row(l, &x, &grad, None, None, Flags::DEGENERATE_DIRECTION),
                        true,
                    );
                    break;
                }
            },
        };

        if spec.algorithm == SmoothAlgorithm::Nag {
            let y = &x + &dir * alpha;
            let t_next = nesterov_t_next(t);
            let c = (t - 1.0) / t_next;
            x = &y + (&y - &y_prev) * c;
            beta = Some(c);
            y_prev = y;
            t = t_next;
        } else {
            x.axpy(alpha, &dir, 1.0);
        }
        prev_grad = Some(std::mem::replace(&mut grad, p.gradient(&x)));
        if spec.keep_iterates {
            iterates.push(x.clone());
        }

        let objective_ok = p.objective(&x).is_finite();
        if !(objective_ok && all_finite(&x) && all_finite(&grad)) {
            flags |= Flags::DIVERGED;
        }
        let stop = flags.contains(Flags::DIVERGED) || grad.norm() <= spec.stop_tol;
        if grad.norm() <= spec.stop_tol && !flags.contains(Flags::DIVERGED) {
            flags |= Flags::CONVERGED;
        }
        rec.push(make_row(l + 1, &x, &grad, Some(alpha), beta, flags), stop);
        if stop {
            break;
        }
    }

    Ok(SmoothRun {
        trace: rec.finish(started),
        x,
        iterates,
    })
}

/// Relative slack allowed on the bound comparison.
pub const BOUND_SLACK: f64 = 1e-8;

/// Checks the fixed-step FRGD residual bound
///
/// ```text
/// ||r_l|| <= 2 (1 + K_l) ((sqrt(k) - 1) / (sqrt(k) + 1))^l ||r_0||,
/// K_l = l alpha (1 + l rho / 2) ||A|| kappa(Z_{l+1})
/// ```
///
/// along a sequence of iterates, where `r_l = A x_l + b`, `k = kappa(A)`,
/// `rho` bounds `||r_i|| / ||r_j||` over `0 <= j <= i <= l - 1` and `Z_{l+1}`
/// stacks the normalized residuals `r_0 .. r_l`. Rows stop at the first `l`
/// where `Z_{l+1}` loses full column rank (or a residual vanishes).
pub fn verify_convergence_bound(
    p: &QuadraticProblem,
    iterates: &[Vector],
    alpha: f64,
) -> Result<BoundReport> {
    let spectrum = svd_spectrum(&p.a);
    let (smax, smin) = (spectrum.spectral_norm(), spectrum.smallest());
    if !(smin > 1e-10 * smax) {
        return Err(Error::Singular {
            ratio: if smax > 0.0 { smin / smax } else { 0.0 },
        });
    }
    for x in iterates {
        p.check_dim("verify_convergence_bound", x)?;
    }
    let kappa_a = smax / smin;
    let sk = kappa_a.sqrt();
    let rate = (sk - 1.0) / (sk + 1.0);

    let residuals: Vec<Vector> = iterates.iter().map(|x| p.gradient(x)).collect();
    let norms: Vec<f64> = residuals.iter().map(|r| r.norm()).collect();
    let r0 = norms.first().copied().unwrap_or(0.0);

    let mut report = BoundReport {
        rows: Vec::new(),
        kappa_a,
        spectral_norm_a: smax,
        alpha,
        rho: 1.0,
        truncated_at: None,
    };
    let n = p.dim();
    let mut z = DenseMatrix::zeros(n, 0);
    let mut rho = 1.0_f64;
    let mut min_norm = f64::INFINITY;

    for (l, (r, &norm)) in residuals.iter().zip(&norms).enumerate() {
        if l >= 1 {
            // extend the ratio bound with i = l - 1 against every j <= i
            min_norm = min_norm.min(norms[l - 1]);
            rho = rho.max(norms[l - 1] / min_norm);
        }
        if norm == 0.0 || l + 1 > n {
            report.truncated_at = Some(l);
            break;
        }
        z = z.insert_column(l, 0.0);
        z.set_column(l, &(r / norm));
        let zs = svd_spectrum(&z);
        let z_rank = zs.rank();
        if z_rank < l + 1 {
            report.truncated_at = Some(l);
            break;
        }
        let kappa_z = zs.cond();
        let lf = l as f64;
        let k_bound_without_alpha = lf * (1.0 + lf * rho / 2.0) * smax * kappa_z;
        let k_bound = alpha * k_bound_without_alpha;
        let rhs = 2.0 * (1.0 + k_bound) * rate.powi(l as i32) * r0;
        report.rows.push(BoundRow {
            l,
            lhs: norm,
            k_bound,
            k_bound_without_alpha,
            rhs,
            holds: norm <= rhs * (1.0 + BOUND_SLACK),
            z_rank,
            rho,
            kappa_z,
        });
        report.rho = rho;
    }
    Ok(report)
}
