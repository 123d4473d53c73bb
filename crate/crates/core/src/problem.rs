//! Seeded test-instance generation.
//!
//! # Random source
//!
//! All randomness comes from xoshiro256++ seeded through SplitMix64
//! (`Xoshiro256PlusPlus::seed_from_u64`), which has published reference
//! outputs. On top of the raw 64-bit stream:
//!
//! * uniforms are `(u >> 11) * 2^-53`, in `[0, 1)`;
//! * normals use Box-Muller on a pair of uniforms `(u1, u2)` as
//!   `sqrt(-2 ln(1 - u1)) * (cos, sin)(2 pi u2)`, returning the cosine
//!   branch first and caching the sine branch;
//! * a bounded draw in `0..k` is the high word of `u * k` (128-bit product);
//! * independent streams for one recipe come from [`derive_seed`].
//!
//! Matrices are filled in row-major order. Every generator is a pure
//! function of its arguments and seed.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::composite::CompositeProblem;
use crate::error::{Error, Result};
use crate::linalg::{
    least_squares_solve, norm2, orthonormal_range_basis, project_onto, DenseMatrix, Vector,
};
use crate::prox::RegularizerKind;
use crate::smooth::QuadraticProblem;

pub struct SeededRng {
    inner: Xoshiro256PlusPlus,
    spare: Option<f64>,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng {
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * (1.0 - u1).ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// Draw from `0..k`.
    pub fn below(&mut self, k: usize) -> usize {
        ((self.next_u64() as u128 * k as u128) >> 64) as usize
    }
}

/// SplitMix64 finalizer of `seed + stream * golden`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Laplacian of the `n`-cycle: 2 on the diagonal, -1 between neighbours,
/// including the wrap-around corners.
pub fn circular_graph_laplacian(n: usize) -> Result<DenseMatrix> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "circular graph needs at least 3 nodes, got {n}"
        )));
    }
    let mut l = DenseMatrix::zeros(n, n);
    for i in 0..n {
        l[(i, i)] = 2.0;
        l[(i, (i + 1) % n)] = -1.0;
        l[((i + 1) % n, i)] = -1.0;
    }
    Ok(l)
}

/// Quadratic on the cycle Laplacian with the unit impulse `e_1`.
///
/// `e_1` has a component along the constant null vector, so the raw problem
/// `1/2 x'Lx + x'e_1` is unbounded below in that direction. With `centered`
/// the impulse is projected onto `Range(L)` and negated, giving
/// `b = -(e_1 - 1/n)` and the minimum-norm minimizer `x* = L^+ (e_1 - 1/n)`
/// as ground truth. Without it, `b = e_1` and no ground truth is attached.
pub fn laplacian_quadratic(n: usize, centered: bool) -> Result<QuadraticProblem> {
    let l = circular_graph_laplacian(n)?;
    let mut impulse = Vector::zeros(n);
    impulse[0] = 1.0;
    if !centered {
        return QuadraticProblem::new(l, impulse);
    }
    let centred = impulse.add_scalar(-1.0 / n as f64);
    let x_star = least_squares_solve(&l, &centred)?;
    Ok(QuadraticProblem::new(l, -centred)?.with_ground_truth(x_star))
}

fn gaussian_matrix(rows: usize, cols: usize, scale: f64, rng: &mut SeededRng) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            m[(r, c)] = scale * rng.normal();
        }
    }
    m
}

fn gaussian_vector(n: usize, rng: &mut SeededRng) -> Vector {
    Vector::from_iterator(n, (0..n).map(|_| rng.normal()))
}

/// I.i.d. `N(0, 1/m)` entries, so columns have unit norm in expectation.
pub fn gaussian_sensing_matrix(m: usize, n: usize, seed: u64) -> Result<DenseMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("sensing matrix must be nonempty".into()));
    }
    let mut rng = SeededRng::new(seed);
    Ok(gaussian_matrix(m, n, 1.0 / (m as f64).sqrt(), &mut rng))
}

/// `G'G + I` with `G` an `n x n` standard Gaussian matrix.
pub fn random_spd(n: usize, seed: u64) -> DenseMatrix {
    let mut rng = SeededRng::new(seed);
    let g = gaussian_matrix(n, n, 1.0, &mut rng);
    let mut a = g.tr_mul(&g);
    for i in 0..n {
        a[(i, i)] += 1.0;
    }
    // G'G is symmetric up to rounding in the product; make it exact
    (&a + a.transpose()) * 0.5
}

pub fn gaussian_vector_seeded(n: usize, seed: u64) -> Vector {
    gaussian_vector(n, &mut SeededRng::new(seed))
}

/// Smallest magnitude accepted for a nonzero of [`sparse_signal`].
pub const NONZERO_FLOOR: f64 = 0.1;

/// `s`-sparse vector: support drawn uniformly without replacement (partial
/// Fisher-Yates), then standard normal values in increasing index order,
/// redrawn while their magnitude is below [`NONZERO_FLOOR`].
pub fn sparse_signal(n: usize, s: usize, seed: u64) -> Result<Vector> {
    if s > n {
        return Err(Error::InvalidArgument(format!(
            "sparsity {s} exceeds dimension {n}"
        )));
    }
    let mut rng = SeededRng::new(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..s {
        let j = i + rng.below(n - i);
        idx.swap(i, j);
    }
    let mut support = idx[..s].to_vec();
    support.sort_unstable();
    let mut x = Vector::zeros(n);
    for i in support {
        let mut v = rng.normal();
        while v.abs() < NONZERO_FLOOR {
            v = rng.normal();
        }
        x[i] = v;
    }
    Ok(x)
}

/// Adds seeded Gaussian noise rescaled so that
/// `20 log10(||clean|| / ||noise||) = snr_db`.
pub fn add_noise_snr(clean: &Vector, snr_db: f64, seed: u64) -> Result<Vector> {
    let clean_norm = norm2(clean);
    if clean_norm == 0.0 {
        return Err(Error::ZeroVector("clean signal"));
    }
    let raw = gaussian_vector(clean.len(), &mut SeededRng::new(seed));
    let target = clean_norm * 10f64.powf(-snr_db / 20.0);
    let scale = target / norm2(&raw);
    Ok(clean + raw * scale)
}

/// Euclidean projection of `v` onto the multi-valued sign set of `x_star`.
pub fn sign_projection(v: &Vector, x_star: &Vector) -> Vector {
    assert_eq!(v.len(), x_star.len(), "sign_projection: length mismatch");
    v.zip_map(x_star, |vi, xi| {
        if xi > 0.0 {
            1.0
        } else if xi < 0.0 {
            -1.0
        } else {
            vi.clamp(-1.0, 1.0)
        }
    })
}

/// Right-hand side making `x_star` stationary.
#[derive(Debug, Clone)]
pub struct Construction {
    pub b: Vector,
    /// The subgradient of `||.||_1` at `x_star` certifying stationarity.
    pub w: Vector,
    /// Solution of `A' y = w - shift`.
    pub y: Vector,
    pub converged: bool,
    pub iterations: usize,
    /// `||(w - shift) - UU'(w - shift)||` at exit.
    pub residual: f64,
}

pub const CONSTRUCTION_TOL: f64 = 1e-12;
pub const CONSTRUCTION_MAX_ITERS: usize = 10_000;

fn construct(
    a: &DenseMatrix,
    lambda: f64,
    x_star: &Vector,
    shift: &Vector,
    max_iters: usize,
    tol: f64,
) -> Result<Construction> {
    if a.ncols() != x_star.len() {
        return Err(Error::DimensionMismatch {
            op: "construct_rhs",
            expected: a.ncols(),
            found: x_star.len(),
        });
    }
    if norm2(x_star) == 0.0 {
        return Err(Error::ZeroVector("x_star"));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument("lambda must be positive".into()));
    }
    let at = a.transpose();
    let basis = orthonormal_range_basis(&at);
    let mut w = sign_projection(&Vector::zeros(x_star.len()), x_star);
    let mut iterations = 0;
    let (converged, residual) = loop {
        let u = &w - shift;
        let proj = project_onto(&basis, &u);
        let residual = norm2(&(&u - &proj));
        if residual <= tol {
            break (true, residual);
        }
        if iterations == max_iters {
            break (false, residual);
        }
        w = sign_projection(&(proj + shift), x_star);
        iterations += 1;
    };
    let y = least_squares_solve(&at, &(&w - shift))?;
    let b = &y * lambda + a * x_star;
    Ok(Construction {
        b,
        w,
        y,
        converged,
        iterations,
        residual,
    })
}

/// Alternating projections between `Sign(x*)` and `Range(A')` for the `l1`
/// problem, then `b = lambda y + A x*` with `A'y = w`.
pub fn construct_l1_rhs(
    a: &DenseMatrix,
    lambda: f64,
    x_star: &Vector,
    max_iters: usize,
    tol: f64,
) -> Result<Construction> {
    construct(a, lambda, x_star, &Vector::zeros(x_star.len()), max_iters, tol)
}

/// The `l1 - l2` variant: the range projection acts on `w - x*/||x*||`.
/// May fail to converge when `A` is highly coherent.
pub fn construct_l12_rhs(
    a: &DenseMatrix,
    lambda: f64,
    x_star: &Vector,
    max_iters: usize,
    tol: f64,
) -> Result<Construction> {
    let nx = norm2(x_star);
    if nx == 0.0 {
        return Err(Error::ZeroVector("x_star"));
    }
    construct(a, lambda, x_star, &(x_star / nx), max_iters, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    QuadLaplacian,
    SparseRandom,
    SparseConstructed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemRecipe {
    pub family: Family,
    pub rows: usize,
    pub cols: usize,
    pub sparsity: usize,
    pub snr_db: f64,
    pub lambda: f64,
    pub seed: u64,
    pub reg: RegularizerKind,
}

impl ProblemRecipe {
    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidArgument("rows and cols must be positive".into()));
        }
        if self.sparsity == 0 || self.sparsity > self.cols {
            return Err(Error::InvalidArgument(format!(
                "sparsity must lie in 1..={}, got {}",
                self.cols, self.sparsity
            )));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::InvalidArgument("lambda must be positive".into()));
        }
        Ok(())
    }

    /// First 16 hex digits of the SHA-256 of the recipe's JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("recipe serializes");
        Sha256::digest(&json)[..8]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Serializable sparse-recovery instance; `matrix` is row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub family: Family,
    pub dims: [usize; 2],
    pub seed: u64,
    pub lambda: f64,
    pub reg: RegularizerKind,
    pub matrix: Vec<f64>,
    pub b: Vec<f64>,
    pub x_star: Vec<f64>,
}

impl Instance {
    pub fn new(
        family: Family,
        seed: u64,
        lambda: f64,
        reg: RegularizerKind,
        a: &DenseMatrix,
        b: &Vector,
        x_star: &Vector,
    ) -> Self {
        let matrix = (0..a.nrows())
            .flat_map(|r| (0..a.ncols()).map(move |c| (r, c)))
            .map(|(r, c)| a[(r, c)])
            .collect();
        Instance {
            family,
            dims: [a.nrows(), a.ncols()],
            seed,
            lambda,
            reg,
            matrix,
            b: b.iter().copied().collect(),
            x_star: x_star.iter().copied().collect(),
        }
    }

    pub fn matrix(&self) -> Result<DenseMatrix> {
        let [rows, cols] = self.dims;
        if self.matrix.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                op: "Instance::matrix",
                expected: rows * cols,
                found: self.matrix.len(),
            });
        }
        Ok(DenseMatrix::from_row_slice(rows, cols, &self.matrix))
    }

    pub fn problem(&self) -> Result<CompositeProblem> {
        let a = self.matrix()?;
        let b = Vector::from_column_slice(&self.b);
        let x_star = Vector::from_column_slice(&self.x_star);
        Ok(CompositeProblem::new(a, b, self.lambda, self.reg)?.with_ground_truth(x_star))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedInstance {
    pub instance: Instance,
    /// `A x_true` before noise, for random instances.
    pub clean: Option<Vector>,
    /// Construction attempts used (1 when the first seed worked).
    pub attempts: usize,
    pub construction: Option<Construction>,
}

/// Seed used by construction attempt `k` (zero-based).
pub fn attempt_seed(seed: u64, attempt: usize) -> u64 {
    if attempt == 0 {
        seed
    } else {
        derive_seed(seed, 1000 + attempt as u64)
    }
}

const MATRIX_STREAM: u64 = 1;
const SIGNAL_STREAM: u64 = 2;
const NOISE_STREAM: u64 = 3;

/// Builds a sparse-recovery instance. Constructed recipes retry with fresh
/// seeds until the construction converges, up to `max_attempts`.
pub fn generate_sparse(
    recipe: &ProblemRecipe,
    max_attempts: usize,
    construction_max_iters: usize,
    construction_tol: f64,
) -> Result<GeneratedInstance> {
    recipe.validate()?;
    match recipe.family {
        Family::QuadLaplacian => Err(Error::InvalidArgument(
            "generate_sparse needs a sparse family".into(),
        )),
        Family::SparseRandom => {
            let a = gaussian_sensing_matrix(recipe.rows, recipe.cols, derive_seed(recipe.seed, MATRIX_STREAM))?;
            let x = sparse_signal(recipe.cols, recipe.sparsity, derive_seed(recipe.seed, SIGNAL_STREAM))?;
            let clean = &a * &x;
            let b = add_noise_snr(&clean, recipe.snr_db, derive_seed(recipe.seed, NOISE_STREAM))?;
            Ok(GeneratedInstance {
                instance: Instance::new(recipe.family, recipe.seed, recipe.lambda, recipe.reg, &a, &b, &x),
                clean: Some(clean),
                attempts: 1,
                construction: None,
            })
        }
        Family::SparseConstructed => {
            let mut last_residual = f64::NAN;
            for attempt in 0..max_attempts {
                let seed = attempt_seed(recipe.seed, attempt);
                let a = gaussian_sensing_matrix(recipe.rows, recipe.cols, derive_seed(seed, MATRIX_STREAM))?;
                let x = sparse_signal(recipe.cols, recipe.sparsity, derive_seed(seed, SIGNAL_STREAM))?;
                let c = match recipe.reg {
                    RegularizerKind::L1 => {
                        construct_l1_rhs(&a, recipe.lambda, &x, construction_max_iters, construction_tol)?
                    }
                    RegularizerKind::L1MinusL2 => {
                        construct_l12_rhs(&a, recipe.lambda, &x, construction_max_iters, construction_tol)?
                    }
                };
                if c.converged {
                    return Ok(GeneratedInstance {
                        instance: Instance::new(recipe.family, recipe.seed, recipe.lambda, recipe.reg, &a, &c.b, &x),
                        clean: None,
                        attempts: attempt + 1,
                        construction: Some(c),
                    });
                }
                last_residual = c.residual;
            }
            Err(Error::ConstructionFailed {
                attempts: max_attempts,
                residual: last_residual,
            })
        }
    }
}
