//! Proximal-gradient solvers for `lambda f(x) + 1/2 ||Ax - b||^2`.
//!
//! Every iteration works with points that carry `x`, `Ax` and the smooth
//! gradient `A'(Ax - b)` together. Extrapolated points are affine
//! combinations of stored points, and the smooth gradient is affine in `x`,
//! so they are formed without touching `A`. A step then costs two
//! matrix-vector products (three or four for APG).

use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{relative_error, Flags, Recorder, Trace, TraceRow};
use crate::error::{Error, Result};
use crate::linalg::{all_finite, norm2, DenseMatrix, Vector};
use crate::momentum::{momentum_with, HsDyDenominator, MomentumKind};
use crate::prox::{l2_subgradient, prox_l1, RegularizerKind};
use crate::smooth::nesterov_t_next;

#[derive(Debug, Clone)]
pub struct CompositeProblem {
    pub a: DenseMatrix,
    pub b: Vector,
    pub lambda: f64,
    pub reg: RegularizerKind,
    pub ground_truth: Option<Vector>,
}

impl CompositeProblem {
    pub fn new(a: DenseMatrix, b: Vector, lambda: f64, reg: RegularizerKind) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::DimensionMismatch {
                op: "CompositeProblem::new",
                expected: a.nrows(),
                found: b.len(),
            });
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be positive and finite, got {lambda}"
            )));
        }
        Ok(CompositeProblem {
            a,
            b,
            lambda,
            reg,
            ground_truth: None,
        })
    }

    pub fn with_ground_truth(mut self, x: Vector) -> Self {
        self.ground_truth = Some(x);
        self
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        let mut p = CompositeProblem::new(self.a.clone(), self.b.clone(), lambda, self.reg)?;
        p.ground_truth = self.ground_truth.clone();
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn check_dim(&self, op: &'static str, x: &Vector) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                op,
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `lambda reg(x) + 1/2 ||Ax - b||^2`.
    pub fn objective(&self, x: &Vector) -> Result<f64> {
        self.check_dim("composite_objective", x)?;
        Ok(self.value(x, &(&self.a * x)))
    }

    /// `A'(Ax - b)`.
    pub fn smooth_gradient(&self, x: &Vector) -> Result<Vector> {
        self.check_dim("smooth_gradient", x)?;
        Ok(self.a.tr_mul(&(&self.a * x - &self.b)))
    }

    /// `||A||_2^2`, the Lipschitz constant of the smooth gradient.
    pub fn lipschitz(&self) -> f64 {
        let s = crate::linalg::svd_spectrum(&self.a).spectral_norm();
        s * s
    }

    fn value(&self, x: &Vector, ax: &Vector) -> f64 {
        self.lambda * self.reg.value(x) + 0.5 * (ax - &self.b).norm_squared()
    }

    fn point(&self, x: Vector) -> Point {
        let ax = &self.a * &x;
        self.complete(x, ax)
    }

    fn complete(&self, x: Vector, ax: Vector) -> Point {
        let grad = self.a.tr_mul(&(&ax - &self.b));
        Point { x, ax, grad }
    }

    fn rel_error(&self, x: &Vector) -> Option<f64> {
        self.ground_truth
            .as_ref()
            .and_then(|xs| relative_error(x, xs).ok())
    }
}

pub fn composite_objective(p: &CompositeProblem, x: &Vector) -> Result<f64> {
    p.objective(x)
}

/// `prox_reg(x - delta A'(Ax - b); delta lambda)`.
pub fn prox_gradient_step(p: &CompositeProblem, x: &Vector, delta: f64) -> Result<Vector> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    let g = p.smooth_gradient(x)?;
    Ok(p.reg.prox(&(x - g * delta), delta * p.lambda))
}

#[derive(Debug, Clone)]
struct Point {
    x: Vector,
    ax: Vector,
    grad: Vector,
}

fn affine(terms: &[(f64, &Point)]) -> Point {
    let (c0, p0) = terms[0];
    let mut out = Point {
        x: &p0.x * c0,
        ax: &p0.ax * c0,
        grad: &p0.grad * c0,
    };
    for &(c, p) in &terms[1..] {
        out.x.axpy(c, &p.x, 1.0);
        out.ax.axpy(c, &p.ax, 1.0);
        out.grad.axpy(c, &p.grad, 1.0);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompositeAlgorithm {
    Ista,
    Fista,
    Apg,
    MomentumProx(MomentumKind),
    Dca,
}

impl CompositeAlgorithm {
    pub const ALL: [CompositeAlgorithm; 8] = [
        CompositeAlgorithm::Ista,
        CompositeAlgorithm::Fista,
        CompositeAlgorithm::Apg,
        CompositeAlgorithm::MomentumProx(MomentumKind::Fr),
        CompositeAlgorithm::MomentumProx(MomentumKind::Pr),
        CompositeAlgorithm::MomentumProx(MomentumKind::Hs),
        CompositeAlgorithm::MomentumProx(MomentumKind::Dy),
        CompositeAlgorithm::Dca,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CompositeAlgorithm::Ista => "ista",
            CompositeAlgorithm::Fista => "fista",
            CompositeAlgorithm::Apg => "apg",
            CompositeAlgorithm::MomentumProx(MomentumKind::Fr) => "frprox",
            CompositeAlgorithm::MomentumProx(MomentumKind::Pr) => "prprox",
            CompositeAlgorithm::MomentumProx(MomentumKind::Hs) => "hsprox",
            CompositeAlgorithm::MomentumProx(MomentumKind::Dy) => "dyprox",
            CompositeAlgorithm::Dca => "dca",
        }
    }
}

impl FromStr for CompositeAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        CompositeAlgorithm::ALL
            .into_iter()
            .find(|a| a.name() == lower)
            .ok_or_else(|| {
                let names: Vec<_> = CompositeAlgorithm::ALL.iter().map(|a| a.name()).collect();
                Error::InvalidArgument(format!(
                    "unknown solver `{s}`; valid names: {}",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeSolverSpec {
    pub algorithm: CompositeAlgorithm,
    pub delta: f64,
    /// Iteration budget; for DCA the budget on inner iterations.
    pub max_iters: usize,
    /// Stop once `||x+ - x|| / max(1, ||x||) <= stop_tol`. Zero disables the
    /// test except for DCA, whose outer loop also stops on an exact repeat.
    pub stop_tol: f64,
    /// DCA subproblem tolerance on the same relative change.
    pub inner_tol: f64,
    pub inner_max: usize,
    pub record_every: usize,
    pub denominator: HsDyDenominator,
    /// Clamp the momentum coefficient to `[.., 1]`. Off by default.
    pub cap_beta: bool,
}

impl CompositeSolverSpec {
    pub fn new(algorithm: CompositeAlgorithm, delta: f64, max_iters: usize) -> Self {
        CompositeSolverSpec {
            algorithm,
            delta,
            max_iters,
            stop_tol: 0.0,
            inner_tol: 1e-8,
            inner_max: 1000,
            record_every: 1,
            denominator: HsDyDenominator::default(),
            cap_beta: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad("delta must be positive and finite");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive");
        }
        if self.record_every == 0 {
            return bad("record_every must be positive");
        }
        if !(self.stop_tol >= 0.0) || !(self.inner_tol >= 0.0) {
            return bad("tolerances must be nonnegative");
        }
        if self.algorithm == CompositeAlgorithm::Dca && self.inner_max == 0 {
            return bad("inner_max must be positive");
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        self.algorithm.name().to_string()
    }
}

#[derive(Debug, Clone)]
pub struct CompositeRun {
    pub trace: Trace,
    pub x: Vector,
    /// `F` at each DCA outer iterate, starting with `x0`. Empty otherwise.
    pub outer_objectives: Vec<f64>,
}

/// APG keeps `x^l` when both candidates are worse by at most this relative
/// amount. For `delta <= 1/L` such an increase can only come from rounding in
/// the objective evaluation.
pub const ROUNDING_SLACK: f64 = 1e-13;

/// Objective level treated as a runaway, relative to `|F(x0)| + 1`.
pub const DIVERGENCE_FACTOR: f64 = 1e12;

fn runaway(f: f64, f0: f64, pt: &Point) -> bool {
    !f.is_finite() || f > DIVERGENCE_FACTOR * (f0.abs() + 1.0) || !all_finite(&pt.x)
}

fn relative_change(new: &Vector, old: &Vector) -> (f64, f64) {
    let change = norm2(&(new - old));
    (change, change / norm2(old).max(1.0))
}

struct Stepper<'a> {
    p: &'a CompositeProblem,
    delta: f64,
}

impl Stepper<'_> {
    fn target(&self, y: &Point, tilt: Option<&Vector>) -> Vector {
        let mut z = &y.x - &y.grad * self.delta;
        if let Some(s) = tilt {
            z.axpy(self.delta, s, 1.0);
        }
        z
    }

    fn step(&self, y: &Point) -> Point {
        let z = self.p.reg.prox(&self.target(y, None), self.delta * self.p.lambda);
        self.p.point(z)
    }
}

/// Runs ISTA, FISTA, APG or a momentum-prox variant from `x0`.
///
/// Row `l` holds `F(x^l)`, the relative error when a ground truth is known,
/// `||x^l - x^{l-1}||` as `norm`, `delta` as `alpha` and the extrapolation
/// coefficient as `beta`. All extrapolating methods start with
/// `x^{-1} = x^0`.
///
/// APG keeps `x^l` when both candidates exceed `F(x^l)` by no more than
/// [`ROUNDING_SLACK`] relative; otherwise it takes the better candidate.
pub fn run_composite(
    p: &CompositeProblem,
    spec: &CompositeSolverSpec,
    x0: &Vector,
) -> Result<CompositeRun> {
    spec.validate()?;
    p.check_dim("run_composite", x0)?;
    if spec.algorithm == CompositeAlgorithm::Dca {
        return Err(Error::InvalidArgument("use run_dca for DCA".into()));
    }
    let started = Instant::now();
    let mut rec = Recorder::new(spec.label(), spec.record_every, spec.max_iters);
    rec.meta_mut().spec = serde_json::to_string(spec).ok();
    let stepper = Stepper { p, delta: spec.delta };

    let mut x = p.point(x0.clone());
    let f0 = p.value(&x.x, &x.ax);
    rec.push(
        TraceRow {
            iter: 0,
            objective: f0,
            rel_error: p.rel_error(&x.x),
            norm: 0.0,
            alpha: None,
            beta: None,
            flags: Flags::empty(),
        },
        true,
    );
    let mut x_prev = x.clone();
    let mut u = x.clone();
    let mut t = 1.0;
    let mut f_curr = f0;

    for l in 0..spec.max_iters {
        let mut flags = Flags::empty();
        let mut beta = None;
        let next = match spec.algorithm {
            CompositeAlgorithm::Ista => stepper.step(&x),
            CompositeAlgorithm::Fista => {
                let t_next = nesterov_t_next(t);
                let c = (t - 1.0) / t_next;
                t = t_next;
                beta = Some(c);
                stepper.step(&affine(&[(1.0 + c, &x), (-c, &x_prev)]))
            }
            CompositeAlgorithm::Apg => {
                let t_next = nesterov_t_next(t);
                let a = t / t_next;
                let c = (t - 1.0) / t_next;
                t = t_next;
                beta = Some(c);
                let y = affine(&[(1.0 - a + c, &x), (a, &u), (-c, &x_prev)]);
                u = stepper.step(&y);
                let vx = p.reg.prox(&stepper.target(&x, None), spec.delta * p.lambda);
                let vax = &p.a * &vx;
                let fu = p.value(&u.x, &u.ax);
                let fv = p.value(&vx, &vax);
                let keep = fu.min(fv) > f_curr && fu.min(fv) - f_curr <= ROUNDING_SLACK * f_curr.abs().max(1.0);
                if keep {
                    x.clone()
                } else if fu <= fv {
                    u.clone()
                } else {
                    p.complete(vx, vax)
                }
            }
            CompositeAlgorithm::MomentumProx(kind) => {
                if l == 0 {
                    stepper.step(&x)
                } else {
                    let direction = &x.x - &x_prev.x;
                    let mut b = match momentum_with(
                        kind,
                        spec.denominator,
                        &x.grad,
                        &x_prev.grad,
                        &x.x,
                        &direction,
                    ) {
                        Ok(b) => b,
                        Err(_) => {
                            flags |= Flags::ZERO_DENOMINATOR;
                            0.0
                        }
                    };
                    if spec.cap_beta {
                        b = b.min(1.0);
                    }
                    beta = Some(b);
                    stepper.step(&affine(&[(1.0 + b, &x), (-b, &x_prev)]))
                }
            }
            CompositeAlgorithm::Dca => unreachable!("rejected above"),
        };

        let f = p.value(&next.x, &next.ax);
        f_curr = f;
        let (change, rel_change) = relative_change(&next.x, &x.x);
        x_prev = std::mem::replace(&mut x, next);
        if runaway(f, f0, &x) {
            flags |= Flags::DIVERGED;
        } else if spec.stop_tol > 0.0 && rel_change <= spec.stop_tol {
            flags |= Flags::CONVERGED;
        }
        let stop = flags.intersects(Flags::DIVERGED | Flags::CONVERGED);
        rec.push(
            TraceRow {
                iter: l + 1,
                objective: f,
                rel_error: p.rel_error(&x.x),
                norm: change,
                alpha: Some(spec.delta),
                beta,
                flags,
            },
            stop,
        );
        if stop {
            break;
        }
    }

    Ok(CompositeRun {
        trace: rec.finish(started),
        x: x.x,
        outer_objectives: Vec::new(),
    })
}

/// DCA for `l1 - l2`: each outer step linearizes `-lambda ||x||_2` at the
/// current iterate (tilt `lambda x / ||x||`, zero at the origin) and solves
/// the resulting `l1` problem by FISTA, warm-started with a fresh momentum
/// sequence. Trace rows are indexed by the cumulative inner iteration count
/// and hold `F` at each inner iterate; `max_iters` bounds that count.
pub fn run_dca(p: &CompositeProblem, spec: &CompositeSolverSpec, x0: &Vector) -> Result<CompositeRun> {
    spec.validate()?;
    p.check_dim("run_dca", x0)?;
    if p.reg != RegularizerKind::L1MinusL2 {
        return Err(Error::InvalidArgument("DCA requires the l1 - l2 regularizer".into()));
    }
    let started = Instant::now();
    let mut rec = Recorder::new(spec.label(), spec.record_every, spec.max_iters);
    rec.meta_mut().spec = serde_json::to_string(spec).ok();
    let stepper = Stepper { p, delta: spec.delta };
    let mu = spec.delta * p.lambda;

    let mut x = p.point(x0.clone());
    let f0 = p.value(&x.x, &x.ax);
    let mut outer_objectives = vec![f0];
    rec.push(
        TraceRow {
            iter: 0,
            objective: f0,
            rel_error: p.rel_error(&x.x),
            norm: 0.0,
            alpha: None,
            beta: None,
            flags: Flags::empty(),
        },
        true,
    );

    let mut total = 0;
    'outer: while total < spec.max_iters {
        let tilt = l2_subgradient(&x.x) * p.lambda;
        let mut z = x.clone();
        let mut z_prev = z.clone();
        let mut t = 1.0;
        let mut inner = 0;
        let mut solved = false;
        while inner < spec.inner_max && total < spec.max_iters {
            let t_next = nesterov_t_next(t);
            let c = (t - 1.0) / t_next;
            t = t_next;
            let y = affine(&[(1.0 + c, &z), (-c, &z_prev)]);
            let next = p.point(prox_l1(&stepper.target(&y, Some(&tilt)), mu));
            let f = p.value(&next.x, &next.ax);
            let (change, rel_change) = relative_change(&next.x, &z.x);
            z_prev = std::mem::replace(&mut z, next);
            inner += 1;
            total += 1;
            let mut flags = Flags::empty();
            let diverged = runaway(f, f0, &z);
            if diverged {
                flags |= Flags::DIVERGED;
            }
            solved = rel_change <= spec.inner_tol;
            if !solved && inner == spec.inner_max {
                flags |= Flags::INNER_BUDGET;
            }
            rec.push(
                TraceRow {
                    iter: total,
                    objective: f,
                    rel_error: p.rel_error(&z.x),
                    norm: change,
                    alpha: Some(spec.delta),
                    beta: Some(c),
                    flags,
                },
                diverged,
            );
            if diverged {
                x = z;
                break 'outer;
            }
            if solved {
                break;
            }
        }
        let (_, outer_change) = relative_change(&z.x, &x.x);
        x = z;
        outer_objectives.push(p.value(&x.x, &x.ax));
        if solved && outer_change <= spec.stop_tol {
            rec.push(
                TraceRow {
                    iter: total,
                    objective: p.value(&x.x, &x.ax),
                    rel_error: p.rel_error(&x.x),
                    norm: 0.0,
                    alpha: Some(spec.delta),
                    beta: None,
                    flags: Flags::CONVERGED,
                },
                true,
            );
            break;
        }
    }

    Ok(CompositeRun {
        trace: rec.finish(started),
        x: x.x,
        outer_objectives,
    })
}

/// Dispatches to [`run_dca`] or [`run_composite`].
pub fn solve(p: &CompositeProblem, spec: &CompositeSolverSpec, x0: &Vector) -> Result<CompositeRun> {
    if spec.algorithm == CompositeAlgorithm::Dca {
        run_dca(p, spec, x0)
    } else {
        run_composite(p, spec, x0)
    }
}

/// Decade grid `1e-4, ..., 1e1` used for both `delta` and `lambda`.
pub const TUNING_GRID: [f64; 6] = [1e-4, 1e-3, 1e-2, 1e-1, 1e0, 1e1];

/// No divergence flag, finite objectives and `F(final) <= F(x0)`.
pub fn is_convergent(trace: &Trace) -> bool {
    let (Some(first), Some(last)) = (trace.rows.first(), trace.rows.last()) else {
        return false;
    };
    !trace.diverged()
        && trace.objectives().all(f64::is_finite)
        && last.objective <= first.objective
}

#[derive(Debug, Clone)]
pub struct TuningPoint {
    pub value: f64,
    pub final_objective: f64,
    pub convergent: bool,
}

#[derive(Debug, Clone)]
pub struct TuningOutcome {
    /// Grid value with the smallest final objective among convergent runs.
    pub best: Option<f64>,
    pub points: Vec<TuningPoint>,
}

fn select(points: Vec<TuningPoint>) -> TuningOutcome {
    let best = points
        .iter()
        .filter(|pt| pt.convergent)
        .min_by(|a, b| a.final_objective.total_cmp(&b.final_objective))
        .map(|pt| pt.value);
    TuningOutcome { best, points }
}

fn tuning_point(value: f64, run: &CompositeRun) -> TuningPoint {
    TuningPoint {
        value,
        final_objective: run.trace.last().map_or(f64::NAN, |r| r.objective),
        convergent: is_convergent(&run.trace),
    }
}

/// Runs `spec` at each step size in `grid`.
pub fn tune_delta(
    p: &CompositeProblem,
    spec: &CompositeSolverSpec,
    x0: &Vector,
    grid: &[f64],
) -> Result<TuningOutcome> {
    let mut points = Vec::with_capacity(grid.len());
    for &delta in grid {
        let mut s = spec.clone();
        s.delta = delta;
        points.push(tuning_point(delta, &solve(p, &s, x0)?));
    }
    Ok(select(points))
}

/// Runs `spec` on `p` with each `lambda` in `grid`.
pub fn tune_lambda(
    p: &CompositeProblem,
    spec: &CompositeSolverSpec,
    x0: &Vector,
    grid: &[f64],
) -> Result<TuningOutcome> {
    let mut points = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let q = p.with_lambda(lambda)?;
        points.push(tuning_point(lambda, &solve(&q, spec, x0)?));
    }
    Ok(select(points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn identity_problem(reg: RegularizerKind) -> CompositeProblem {
        CompositeProblem::new(DenseMatrix::identity(2, 2), v(&[3.0, -0.5]), 1.0, reg).unwrap()
    }

    #[test]
    fn objective_examples() {
        let p = identity_problem(RegularizerKind::L1);
        assert_relative_eq!(p.objective(&v(&[2.0, 0.0])).unwrap(), 2.625, epsilon = 1e-15);
        assert_relative_eq!(p.objective(&v(&[0.0, 0.0])).unwrap(), 0.5 * 9.25, epsilon = 1e-15);
        let x = v(&[0.0, 1.7]);
        let q = CompositeProblem::new(DenseMatrix::identity(2, 2), x.clone(), 0.4, RegularizerKind::L1MinusL2).unwrap();
        assert_eq!(q.objective(&x).unwrap(), 0.0);
    }

    #[test]
    fn prox_step_examples() {
        let p = identity_problem(RegularizerKind::L1);
        assert_eq!(prox_gradient_step(&p, &v(&[0.0, 0.0]), 1.0).unwrap(), v(&[2.0, 0.0]));
        let big = CompositeProblem::new(DenseMatrix::identity(2, 2), v(&[3.0, -0.5]), 100.0, RegularizerKind::L1).unwrap();
        assert_eq!(prox_gradient_step(&big, &v(&[0.0, 0.0]), 1.0).unwrap(), v(&[0.0, 0.0]));
        assert!(prox_gradient_step(&p, &v(&[0.0, 0.0]), 0.0).is_err());
    }

    #[test]
    fn identity_fixed_point_for_every_algorithm() {
        for alg in CompositeAlgorithm::ALL {
            if alg == CompositeAlgorithm::Dca {
                continue;
            }
            let p = identity_problem(RegularizerKind::L1);
            let run = run_composite(&p, &CompositeSolverSpec::new(alg, 1.0, 6), &v(&[0.0, 0.0])).unwrap();
            for row in &run.trace.rows[1..] {
                assert_relative_eq!(row.objective, 2.625, epsilon = 1e-14);
            }
            assert_relative_eq!(run.x, v(&[2.0, 0.0]), epsilon = 1e-14);
        }
    }

    #[test]
    fn momentum_prox_first_beta_is_absent() {
        let p = identity_problem(RegularizerKind::L1);
        let spec = CompositeSolverSpec::new(CompositeAlgorithm::MomentumProx(MomentumKind::Fr), 0.5, 3);
        let run = run_composite(&p, &spec, &v(&[0.0, 0.0])).unwrap();
        assert_eq!(run.trace.rows[1].beta, None);
        assert!(run.trace.rows[2].beta.is_some());
    }

    #[test]
    fn dca_rejects_l1() {
        let p = identity_problem(RegularizerKind::L1);
        let spec = CompositeSolverSpec::new(CompositeAlgorithm::Dca, 1.0, 5);
        assert!(run_dca(&p, &spec, &v(&[0.0, 0.0])).is_err());
        assert!(run_composite(&p, &spec, &v(&[0.0, 0.0])).is_err());
    }

    #[test]
    fn dca_first_subproblem_is_plain_l1() {
        // from the origin the tilt is zero, so the first inner step is ISTA on l1
        let p = CompositeProblem::new(DenseMatrix::identity(2, 2), v(&[3.0, -0.5]), 1.0, RegularizerKind::L1MinusL2)
            .unwrap();
        let mut spec = CompositeSolverSpec::new(CompositeAlgorithm::Dca, 1.0, 1);
        spec.record_every = 1;
        let run = run_dca(&p, &spec, &v(&[0.0, 0.0])).unwrap();
        assert_eq!(run.x, v(&[2.0, 0.0]));
    }

    #[test]
    fn dca_identity_beats_l1_solution() {
        let b = v(&[0.0, 2.0, 0.0]);
        let p = CompositeProblem::new(DenseMatrix::identity(3, 3), b.clone(), 0.5, RegularizerKind::L1MinusL2).unwrap();
        let spec = CompositeSolverSpec::new(CompositeAlgorithm::Dca, 1.0, 200);
        let run = run_dca(&p, &spec, &Vector::zeros(3)).unwrap();
        let l1_solution = prox_l1(&b, 0.5);
        assert!(p.objective(&run.x).unwrap() <= p.objective(&l1_solution).unwrap() + 1e-15);
        assert_relative_eq!(run.x, b, epsilon = 1e-10);
    }

    #[test]
    fn parse_algorithm_names() {
        assert_eq!("FRprox".parse::<CompositeAlgorithm>().unwrap(), CompositeAlgorithm::MomentumProx(MomentumKind::Fr));
        let err = "newton".parse::<CompositeAlgorithm>().unwrap_err().to_string();
        assert!(err.contains("fista") && err.contains("dca"));
    }

    #[test]
    fn selection_prefers_smallest_convergent_objective() {
        let pts = vec![
            TuningPoint { value: 1.0, final_objective: -5.0, convergent: false },
            TuningPoint { value: 2.0, final_objective: 1.0, convergent: true },
            TuningPoint { value: 3.0, final_objective: 0.5, convergent: true },
        ];
        assert_eq!(select(pts).best, Some(3.0));
    }
}
