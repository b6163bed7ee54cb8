//! Smallest eigenvalues of Gram matrices `G[j, k] = gamma(f_j - f_k)` indexed
//! by a frequency set.
//!
//! [`ToeplitzOperator`] applies `G` through a circulant embedding of the
//! Toeplitz matrix on the ambient window, so a product costs two FFTs of
//! length about `4N` regardless of how sparse `F` is. The eigensolver is a
//! thick-restart Lanczos iteration with full reorthogonalization.

use std::sync::Arc;

use num_complex::Complex;
use num_traits::{Float, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::fft::smooth_len;
use crate::kernels::Autocorrelation;
use crate::linalg::symmetric_eigen;
use crate::scalar::Real;
use crate::sequences::FrequencySet;

/// A Hermitian linear map on `C^dim`.
pub trait HermitianOperator<T: Real>: Sync {
    fn dim(&self) -> usize;

    /// `y = A x`; both slices have length `dim`.
    fn apply(&self, x: &[Complex<T>], y: &mut [Complex<T>]);
}

/// `G[j, k] = gamma(f_j - f_k)` for `f_j` in `F ∩ [0, N)`.
pub struct ToeplitzOperator<T: Real> {
    indices: Vec<usize>,
    window: usize,
    gamma: Vec<T>,
    /// FFT of the circulant first column, divided by the FFT length.
    spectrum: Vec<Complex<T>>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> std::fmt::Debug for ToeplitzOperator<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ToeplitzOperator")
            .field("dim", &self.indices.len())
            .field("window", &self.window)
            .field("max_lag", &(self.gamma.len() - 1))
            .field("embedding", &self.spectrum.len())
            .finish()
    }
}

impl<T: Real> ToeplitzOperator<T> {
    /// Gram matrix of `gamma` on `F ∩ [0, n)`. Lags beyond the stored ones
    /// are zero. Positive semidefiniteness of `gamma` is not required.
    pub fn build(gamma: &Autocorrelation<T>, set: &FrequencySet, n: usize) -> Result<Self> {
        if n == 0 {
            return invalid("window length must be at least 1");
        }
        let top = i64::try_from(n).map_err(|_| Error::InvalidArgument("window too large".into()))?;
        let indices: Vec<usize> = set.elements_in(0, top - 1).iter().map(|&f| f as usize).collect();
        if indices.is_empty() {
            return Err(Error::Undefined(format!("F ∩ [0, {n}) is empty")));
        }
        let used = gamma.max_lag().min(n - 1);
        let gamma: Vec<T> = gamma.values()[..=used].to_vec();
        // lags wrap around modulo m, so m >= n + used keeps the band clean
        let m = smooth_len(n + used);
        let mut column = vec![Complex::zero(); m];
        column[0] = Complex::new(gamma[0], T::zero());
        for (k, &g) in gamma.iter().enumerate().skip(1) {
            column[k] = Complex::new(g, T::zero());
            column[m - k] = Complex::new(g, T::zero());
        }
        let mut planner = FftPlanner::<T>::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        forward.process(&mut column);
        let inv_m = T::one() / T::from_usize_lossy(m);
        column.iter_mut().for_each(|z| *z = z.scale(inv_m));
        Ok(Self { indices, window: n, gamma, spectrum: column, forward, inverse })
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Sorted positions `F ∩ [0, N)`.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// `gamma(k)` as used by the operator.
    pub fn lag(&self, k: i64) -> T {
        self.gamma.get(k.unsigned_abs() as usize).copied().unwrap_or_else(T::zero)
    }

    /// Matrix-vector product; fails on a length mismatch.
    pub fn matvec(&self, v: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if v.len() != self.dim() {
            return invalid(format!("vector has length {}, operator dimension is {}", v.len(), self.dim()));
        }
        let mut y = vec![Complex::zero(); v.len()];
        self.apply(v, &mut y);
        Ok(y)
    }

    /// Dense real symmetric matrix, for checks at small dimension.
    pub fn to_dense(&self) -> Result<Vec<Vec<T>>> {
        const MAX_DENSE: usize = 4096;
        if self.dim() > MAX_DENSE {
            return Err(Error::ResourceLimit(format!("dense form limited to dimension {MAX_DENSE}")));
        }
        Ok(self
            .indices
            .iter()
            .map(|&a| self.indices.iter().map(|&b| self.lag(a as i64 - b as i64)).collect())
            .collect())
    }
}

impl<T: Real> HermitianOperator<T> for ToeplitzOperator<T> {
    fn dim(&self) -> usize {
        self.indices.len()
    }

    fn apply(&self, x: &[Complex<T>], y: &mut [Complex<T>]) {
        let mut buf = vec![Complex::zero(); self.spectrum.len()];
        for (&i, &v) in self.indices.iter().zip(x) {
            buf[i] = v;
        }
        self.forward.process(&mut buf);
        buf.iter_mut().zip(&self.spectrum).for_each(|(b, s)| *b *= *s);
        self.inverse.process(&mut buf);
        for (out, &i) in y.iter_mut().zip(&self.indices) {
            *out = buf[i];
        }
    }
}

/// Explicit Hermitian matrix stored by rows.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseHermitian<T> {
    rows: Vec<Vec<Complex<T>>>,
}

impl<T: Real> DenseHermitian<T> {
    pub fn new(rows: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return invalid("matrix is not square");
        }
        Ok(Self { rows })
    }

    pub fn from_real(rows: &[Vec<T>]) -> Result<Self> {
        Self::new(rows.iter().map(|r| r.iter().map(|&x| Complex::new(x, T::zero())).collect()).collect())
    }
}

impl<T: Real> HermitianOperator<T> for DenseHermitian<T> {
    fn dim(&self) -> usize {
        self.rows.len()
    }

    fn apply(&self, x: &[Complex<T>], y: &mut [Complex<T>]) {
        for (out, row) in y.iter_mut().zip(&self.rows) {
            *out = row.iter().zip(x).map(|(&a, &b)| a * b).sum();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosConfig {
    /// Convergence when `||A x - theta x|| <= tol * ||A||_est`.
    pub tol: f64,
    /// Budget of Lanczos matrix-vector products.
    pub max_iter: usize,
    pub seed: u64,
    /// Largest basis before a thick restart; capped at the dimension.
    pub max_krylov: usize,
    /// Power iterations for the norm estimate.
    pub norm_iterations: usize,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 10_000, seed: 0, max_krylov: 400, norm_iterations: 20 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigResult<T> {
    pub lambda_min: T,
    /// `||A x - lambda x|| / ||x||` of the returned Ritz vector.
    pub residual_norm: T,
    /// Lanczos matrix-vector products.
    pub iterations: usize,
    pub converged: bool,
    /// Power-iteration estimate of `||A||`.
    pub norm_estimate: T,
}

type Vector<T> = Vec<Complex<T>>;

fn random_vector<T: Real>(n: usize, rng: &mut ChaCha8Rng) -> Vector<T> {
    (0..n).map(|_| Complex::new(T::lit(rng.gen_range(-1.0..1.0)), T::lit(rng.gen_range(-1.0..1.0)))).collect()
}

fn dot<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm<T: Real>(a: &[Complex<T>]) -> T {
    a.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

fn normalize<T: Real>(a: &mut [Complex<T>]) -> T {
    let len = norm(a);
    if len > T::zero() {
        a.iter_mut().for_each(|z| *z = z.unscale(len));
    }
    len
}

/// Removes the components along the two newest basis vectors first, then
/// runs classical Gram-Schmidt over the whole basis, repeated once when a
/// pass cancels more than `1 - 1/sqrt(2)` of the norm. Returns the
/// accumulated projection coefficients.
fn orthogonalize<T: Real>(basis: &[Vector<T>], w: &mut [Complex<T>]) -> Vec<Complex<T>> {
    let mut total = vec![Complex::zero(); basis.len()];
    for (i, v) in basis.iter().enumerate().skip(basis.len().saturating_sub(2)) {
        let c = dot(v, w);
        w.iter_mut().zip(v).for_each(|(x, &b)| *x -= b * c);
        total[i] += c;
    }
    let mut before = norm(w);
    for _ in 0..2 {
        let coeffs: Vec<Complex<T>> = basis.par_iter().map(|v| dot(v, w)).collect();
        const CHUNK: usize = 1 << 14;
        w.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
            let start = c * CHUNK;
            for (v, &h) in basis.iter().zip(&coeffs) {
                for (x, &b) in chunk.iter_mut().zip(&v[start..]) {
                    *x -= b * h;
                }
            }
        });
        total.iter_mut().zip(&coeffs).for_each(|(t, &c)| *t += c);
        let after = norm(w);
        if after > before * T::lit(std::f64::consts::FRAC_1_SQRT_2) {
            break;
        }
        before = after;
    }
    total
}

fn estimate_norm<T: Real, A: HermitianOperator<T> + ?Sized>(op: &A, rng: &mut ChaCha8Rng, iterations: usize) -> T {
    let n = op.dim();
    let mut v = random_vector::<T>(n, rng);
    normalize(&mut v);
    let mut w = vec![Complex::zero(); n];
    let mut best = T::zero();
    for _ in 0..iterations.max(1) {
        op.apply(&v, &mut w);
        let len = norm(&w);
        best = best.max(len);
        if len == T::zero() {
            break;
        }
        v.iter_mut().zip(&w).for_each(|(a, &b)| *a = b.unscale(len));
    }
    best
}

fn combine<T: Real>(basis: &[Vector<T>], y: &[T]) -> Vector<T> {
    let n = basis[0].len();
    let mut x = vec![Complex::zero(); n];
    for (v, &c) in basis.iter().zip(y) {
        x.iter_mut().zip(v).for_each(|(a, &b)| *a += b.scale(c));
    }
    x
}

fn true_residual<T: Real, A: HermitianOperator<T> + ?Sized>(op: &A, x: &[Complex<T>], theta: T) -> T {
    let mut ax = vec![Complex::zero(); x.len()];
    op.apply(x, &mut ax);
    ax.iter_mut().zip(x).for_each(|(a, &b)| *a -= b.scale(theta));
    norm(&ax) / norm(x)
}

/// Smallest eigenvalue with the default Krylov size and norm estimate.
pub fn smallest_eigenvalue<T: Real, A: HermitianOperator<T> + ?Sized>(
    op: &A,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<EigResult<T>> {
    smallest_eigenvalue_with(op, &LanczosConfig { tol, max_iter, seed, ..LanczosConfig::default() })
}

/// Thick-restart Lanczos for the smallest eigenvalue.
///
/// The basis is fully reorthogonalized and the projected matrix is read off
/// the Gram-Schmidt coefficients, so after a restart it has an arrow shape.
/// When the basis reaches `max_krylov` vectors the smaller half of the Ritz
/// vectors is kept together with the current residual direction.
pub fn smallest_eigenvalue_with<T: Real, A: HermitianOperator<T> + ?Sized>(
    op: &A,
    cfg: &LanczosConfig,
) -> Result<EigResult<T>> {
    if !(cfg.tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {}", cfg.tol));
    }
    if cfg.max_iter == 0 {
        return invalid("max_iter must be positive");
    }
    if cfg.max_krylov < 3 {
        return invalid("max_krylov must be at least 3");
    }
    let n = op.dim();
    if n == 0 {
        return Err(Error::Undefined("operator of dimension zero".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let norm_estimate = estimate_norm(op, &mut rng, cfg.norm_iterations);
    let scale = if norm_estimate > T::zero() { norm_estimate } else { T::one() };
    let threshold = T::lit(cfg.tol) * scale;
    let breakdown = T::lit(100.0) * T::epsilon() * scale;
    let m = cfg.max_krylov.min(n);

    let mut basis: Vec<Vector<T>> = Vec::with_capacity(m + 1);
    let mut start = random_vector::<T>(n, &mut rng);
    normalize(&mut start);
    basis.push(start);
    let mut h = vec![vec![T::zero(); m]; m];
    let mut w = vec![Complex::zero(); n];
    let mut iterations = 0;

    loop {
        let j = basis.len() - 1;
        op.apply(&basis[j], &mut w);
        iterations += 1;
        let coeffs = orthogonalize(&basis, &mut w);
        for (i, c) in coeffs.iter().enumerate() {
            h[i][j] = c.re;
            h[j][i] = c.re;
        }
        let size = j + 1;
        let beta = if size == n { T::zero() } else { norm(&w) };
        let full = size == m;
        let out_of_budget = iterations >= cfg.max_iter;
        let check = size <= 64 || size.is_multiple_of(8) || full || out_of_budget || beta <= breakdown;
        if check {
            let block: Vec<Vec<T>> = h[..size].iter().map(|row| row[..size].to_vec()).collect();
            let eig = symmetric_eigen(&block)?;
            let theta = eig.values[0];
            let estimate = Float::abs(beta * eig.vectors[0][size - 1]);
            if estimate <= threshold || out_of_budget {
                let x = combine(&basis[..size], &eig.vectors[0]);
                let residual_norm = true_residual(op, &x, theta);
                let converged = residual_norm <= threshold;
                if converged || out_of_budget {
                    return Ok(EigResult { lambda_min: theta, residual_norm, iterations, converged, norm_estimate });
                }
            }
            if full {
                let keep = (m / 2).max(1);
                let mut next: Vec<Vector<T>> = eig.vectors[..keep].iter().map(|y| combine(&basis[..size], y)).collect();
                h.iter_mut().for_each(|row| row.iter_mut().for_each(|x| *x = T::zero()));
                for (i, &theta) in eig.values[..keep].iter().enumerate() {
                    h[i][i] = theta;
                }
                basis.clear();
                basis.append(&mut next);
            }
        }
        if beta <= breakdown {
            // invariant subspace: continue from a fresh direction
            let mut fresh = random_vector::<T>(n, &mut rng);
            orthogonalize(&basis, &mut fresh);
            if normalize(&mut fresh) <= breakdown {
                return Err(Error::Numerical("could not extend an exhausted Krylov basis".into()));
            }
            basis.push(fresh);
        } else {
            basis.push(w.iter().map(|z| z.unscale(beta)).collect());
        }
    }
}

/// One row of [`riesz_lower_bound_scan`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow<T> {
    pub n: usize,
    pub dim: usize,
    pub lambda_min: T,
    pub residual: T,
    pub iterations: usize,
    pub converged: bool,
}

/// `lambda_min` of the Gram matrix on `F ∩ [0, N)` for increasing `N`.
/// For nested windows interlacing makes the values nonincreasing.
pub fn riesz_lower_bound_scan<T: Real>(
    gamma: &Autocorrelation<T>,
    set: &FrequencySet,
    sizes: &[usize],
    cfg: &LanczosConfig,
) -> Result<Vec<ScanRow<T>>> {
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("window sizes must be strictly increasing");
    }
    sizes
        .iter()
        .map(|&n| {
            let op = ToeplitzOperator::build(gamma, set, n)?;
            let r = smallest_eigenvalue_with(&op, cfg)?;
            Ok(ScanRow {
                n,
                dim: op.dim(),
                lambda_min: r.lambda_min,
                residual: r.residual_norm,
                iterations: r.iterations,
                converged: r.converged,
            })
        })
        .collect()
}
