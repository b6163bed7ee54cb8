//! Trigonometric polynomials, probability measures on the circle `T = R/Z`
//! and the map `p -> |p|^2`.
//!
//! Fourier coefficients follow `mu_hat(k) = ∫ e^{-2 pi i k x} dmu(x)`, so a
//! density is recovered as `sum_k mu_hat(k) e^{2 pi i k x}`.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::{Float, Zero};

use crate::error::{invalid, Error, Result};
use crate::fft::{autocorrelate, eval_on_grid};
use crate::scalar::{cis_turns, frac, Real};
use crate::sequences::FrequencySet;

/// Relative tolerance for the Hermitian symmetry `mu_hat(-k) = conj(mu_hat(k))`.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Grid points per `2d + 1` used by default in [`nonnegativity_check`].
pub const DEFAULT_GRID_FACTOR: usize = 8;

/// Allowed undershoot of the grid minimum, relative to `mu_hat(0)`.
pub const NONNEGATIVITY_TOL: f64 = 1e-10;

/// `p(x) = sum_k c_k e^{2 pi i k x}` with finitely many nonzero `c_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial<T> {
    coeffs: BTreeMap<i64, Complex<T>>,
}

impl<T: Real> TrigPolynomial<T> {
    /// Exact zeros are dropped so that `support()` is the true support.
    pub fn new(coeffs: impl IntoIterator<Item = (i64, Complex<T>)>) -> Self {
        let mut map = BTreeMap::new();
        for (k, c) in coeffs {
            *map.entry(k).or_insert_with(Complex::zero) += c;
        }
        map.retain(|_, c: &mut Complex<T>| !c.is_zero());
        Self { coeffs: map }
    }

    /// Coefficients `dense[j]` at frequency `offset + j`.
    pub fn from_dense(offset: i64, dense: &[Complex<T>]) -> Self {
        Self::new(dense.iter().enumerate().map(|(j, &c)| (offset + j as i64, c)))
    }

    /// Real coefficients, convenient in tests and examples.
    pub fn from_real(coeffs: impl IntoIterator<Item = (i64, T)>) -> Self {
        Self::new(coeffs.into_iter().map(|(k, c)| (k, Complex::new(c, T::zero()))))
    }

    /// `(1/sqrt|S|) sum_{j in S} e_j`.
    pub fn uniform(frequencies: &[i64]) -> Self {
        let c = T::one() / T::from_usize_lossy(frequencies.len()).sqrt();
        Self::from_real(frequencies.iter().map(|&k| (k, c)))
    }

    pub fn coeff(&self, k: i64) -> Complex<T> {
        self.coeffs.get(&k).copied().unwrap_or_else(Complex::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex<T>)> + '_ {
        self.coeffs.iter().map(|(&k, &c)| (k, c))
    }

    pub fn support(&self) -> Vec<i64> {
        self.coeffs.keys().copied().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_frequency(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_frequency(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// `sum |c_k|^2`, which equals `∫ |p|^2` by Parseval.
    pub fn norm_sqr(&self) -> T {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        Self { coeffs: self.coeffs.iter().map(|(&k, &c)| (k, c.unscale(n))).collect() }
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::new(self.coeffs.iter().map(|(&k, &c)| (k, c * s)))
    }

    /// Frequency shift: multiplication by `e^{2 pi i m x}`.
    pub fn modulate(&self, m: i64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|(&k, &c)| (k + m, c)).collect() }
    }

    /// Dense coefficient vector starting at the minimal frequency.
    pub fn dense(&self) -> (i64, Vec<Complex<T>>) {
        let (Some(lo), Some(hi)) = (self.min_frequency(), self.max_frequency()) else {
            return (0, Vec::new());
        };
        let mut out = vec![Complex::zero(); (hi - lo) as usize + 1];
        for (&k, &c) in &self.coeffs {
            out[(k - lo) as usize] = c;
        }
        (lo, out)
    }

    pub fn eval(&self, x: T) -> Complex<T> {
        self.coeffs.iter().map(|(&k, &c)| c * cis_turns(T::from_i64(k).unwrap() * x)).sum()
    }

    /// Whether every frequency with a nonzero coefficient lies in `set`.
    pub fn is_supported_in(&self, set: &FrequencySet) -> bool {
        self.coeffs.keys().all(|&k| set.contains(k))
    }

    /// Largest coefficient difference over the union of both supports.
    pub fn max_coeff_distance(&self, other: &Self) -> T {
        self.coeffs
            .keys()
            .chain(other.coeffs.keys())
            .map(|&k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(T::zero(), T::max)
    }
}

/// A point mass at `location` in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom<T> {
    pub location: T,
    pub mass: T,
}

/// Fourier data `mu_hat(k)` for `|k| <= d`, stored densely with lag `-d`
/// first; coefficients outside the window are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigMeasure<T> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> TrigMeasure<T> {
    /// `centered` must have odd length `2d + 1`.
    pub fn new(centered: Vec<Complex<T>>) -> Result<Self> {
        if centered.len() % 2 != 1 {
            return invalid(format!("coefficient window has even length {}", centered.len()));
        }
        Ok(Self { coeffs: centered })
    }

    /// From a sparse map; missing frequencies are zero.
    pub fn from_map(map: &BTreeMap<i64, Complex<T>>) -> Self {
        let d = map.keys().map(|k| k.unsigned_abs()).max().unwrap_or(0) as i64;
        let mut coeffs = vec![Complex::zero(); 2 * d as usize + 1];
        for (&k, &c) in map {
            coeffs[(k + d) as usize] = c;
        }
        Self { coeffs }
    }

    /// Real even data `values[k] = mu_hat(k) = mu_hat(-k)` for `k = 0..=d`.
    pub fn from_even_real(values: &[T]) -> Self {
        let d = values.len().saturating_sub(1);
        let mut coeffs = vec![Complex::zero(); 2 * d + 1];
        for (k, &v) in values.iter().enumerate() {
            coeffs[d + k] = Complex::new(v, T::zero());
            coeffs[d - k] = Complex::new(v, T::zero());
        }
        Self { coeffs }
    }

    /// Half-width of the stored window.
    pub fn degree(&self) -> usize {
        self.coeffs.len() / 2
    }

    pub fn coeff(&self, k: i64) -> Complex<T> {
        let d = self.degree() as i64;
        if k.abs() > d {
            Complex::zero()
        } else {
            self.coeffs[(k + d) as usize]
        }
    }

    pub fn centered(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    /// `(k, mu_hat(k))` for `k = -d..=d`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex<T>)> + '_ {
        let d = self.degree() as i64;
        self.coeffs.iter().enumerate().map(move |(i, &c)| (i as i64 - d, c))
    }

    /// Largest `|k|` with `|mu_hat(k)| > rel_tol * max |mu_hat|`.
    pub fn effective_degree(&self, rel_tol: T) -> usize {
        let peak = self.coeffs.iter().map(|c| c.norm()).fold(T::zero(), T::max);
        let cut = rel_tol * peak;
        let d = self.degree();
        (0..=d).rev().find(|&k| self.coeffs[d + k].norm() > cut || self.coeffs[d - k].norm() > cut).unwrap_or(0)
    }

    /// Copy restricted to `|k| <= degree`.
    pub fn truncated(&self, degree: usize) -> Self {
        let d = self.degree();
        if degree >= d {
            return self.clone();
        }
        Self { coeffs: self.coeffs[d - degree..=d + degree].to_vec() }
    }

    /// Frequencies with `|mu_hat(k)| > rel_tol * mu_hat(0)`.
    pub fn support(&self, rel_tol: T) -> Vec<i64> {
        let cut = rel_tol * Float::abs(self.coeff(0).re);
        self.iter().filter(|(_, c)| c.norm() > cut).map(|(k, _)| k).collect()
    }

    /// `max_k |mu_hat(-k) - conj(mu_hat(k))|`.
    pub fn hermitian_defect(&self) -> T {
        let d = self.degree();
        (0..=d).map(|k| (self.coeffs[d - k] - self.coeffs[d + k].conj()).norm()).fold(T::zero(), T::max)
    }

    pub fn is_hermitian(&self) -> bool {
        let peak = self.coeffs.iter().map(|c| c.norm()).fold(T::zero(), T::max);
        self.hermitian_defect() <= T::lit(HERMITIAN_TOL) * peak.max(T::min_positive_value())
    }

    /// Real values of the density at `x = j / n`.
    pub fn grid_values(&self, n: usize) -> Vec<T> {
        eval_on_grid(&self.coeffs, n).into_iter().map(|z| z.re).collect()
    }

    pub fn eval(&self, x: T) -> Complex<T> {
        self.iter().map(|(k, c)| c * cis_turns(T::from_i64(k).unwrap() * x)).sum()
    }
}

/// A probability measure on the circle, held either as a trigonometric
/// density or as a finite list of atoms; the two are never summed.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralMeasure<T> {
    Trig(TrigMeasure<T>),
    Atomic(Vec<Atom<T>>),
}

impl<T: Real> SpectralMeasure<T> {
    pub fn trig(centered: Vec<Complex<T>>) -> Result<Self> {
        TrigMeasure::new(centered).map(Self::Trig)
    }

    pub fn from_map(map: &BTreeMap<i64, Complex<T>>) -> Self {
        Self::Trig(TrigMeasure::from_map(map))
    }

    /// Real coefficient pairs, e.g. `[(-1, 0.5), (0, 1.0), (1, 0.5)]`.
    pub fn from_real_pairs(pairs: &[(i64, T)]) -> Self {
        let map = pairs.iter().map(|&(k, v)| (k, Complex::new(v, T::zero()))).collect();
        Self::from_map(&map)
    }

    /// Atom masses must be nonnegative; locations are reduced mod 1.
    pub fn atomic(atoms: Vec<Atom<T>>) -> Result<Self> {
        if let Some(a) = atoms.iter().find(|a| !(a.mass >= T::zero())) {
            return invalid(format!("atom mass {} is negative", a.mass));
        }
        Ok(Self::Atomic(atoms.into_iter().map(|a| Atom { location: frac(a.location), mass: a.mass }).collect()))
    }

    /// The Dirac mass at 0.
    pub fn dirac() -> Self {
        Self::Atomic(vec![Atom { location: T::zero(), mass: T::one() }])
    }

    /// Lebesgue measure: `mu_hat(k) = [k = 0]`.
    pub fn lebesgue() -> Self {
        Self::Trig(TrigMeasure { coeffs: vec![Complex::new(T::one(), T::zero())] })
    }

    /// `mu_hat(k)` for any `k`; atoms contribute `sum m e^{-2 pi i k loc}`.
    pub fn coeff(&self, k: i64) -> Complex<T> {
        match self {
            Self::Trig(t) => t.coeff(k),
            Self::Atomic(atoms) => {
                let kf = T::from_i64(k).unwrap();
                atoms.iter().map(|a| cis_turns(-kf * a.location).scale(a.mass)).sum()
            }
        }
    }

    pub fn total_mass(&self) -> T {
        match self {
            Self::Trig(t) => t.coeff(0).re,
            Self::Atomic(atoms) => atoms.iter().map(|a| a.mass).sum(),
        }
    }

    pub fn as_trig(&self) -> Result<&TrigMeasure<T>> {
        match self {
            Self::Trig(t) => Ok(t),
            Self::Atomic(_) => invalid("operation needs the trigonometric representation"),
        }
    }

    pub fn atoms(&self) -> Option<&[Atom<T>]> {
        match self {
            Self::Atomic(a) => Some(a),
            Self::Trig(_) => None,
        }
    }
}

/// Anything with Fourier coefficients on a (possibly unbounded) window.
pub trait FourierData<T: Real> {
    /// Largest `|k|` for which coefficients are known; `None` = all `k`.
    fn known_up_to(&self) -> Option<usize>;

    /// Coefficient at `k`; callers stay within [`FourierData::known_up_to`].
    fn fourier_coeff(&self, k: i64) -> Complex<T>;
}

impl<T: Real> FourierData<T> for SpectralMeasure<T> {
    fn known_up_to(&self) -> Option<usize> {
        match self {
            Self::Trig(t) => Some(t.degree()),
            Self::Atomic(_) => None,
        }
    }

    fn fourier_coeff(&self, k: i64) -> Complex<T> {
        self.coeff(k)
    }
}

/// `s(p) = |p|^2` as Fourier data:
/// `mu_hat(k) = sum_j c_j conj(c_{j-k})`, on the window `|k| <= max - min`.
pub fn squared_modulus<T: Real>(p: &TrigPolynomial<T>) -> SpectralMeasure<T> {
    let (_, dense) = p.dense();
    if dense.is_empty() {
        return SpectralMeasure::Trig(TrigMeasure { coeffs: vec![Complex::zero()] });
    }
    let mut coeffs = autocorrelate(&dense);
    // lag 0 is a sum of squares; drop its rounding-level imaginary part
    let mid = coeffs.len() / 2;
    coeffs[mid] = Complex::new(p.norm_sqr(), T::zero());
    SpectralMeasure::Trig(TrigMeasure { coeffs })
}

/// Translation by `tau`: coefficients pick up `e^{-2 pi i k tau}`, atoms move.
pub fn rotate<T: Real>(mu: &SpectralMeasure<T>, tau: T) -> SpectralMeasure<T> {
    match mu {
        SpectralMeasure::Trig(t) => SpectralMeasure::Trig(TrigMeasure {
            coeffs: t
                .iter()
                .map(|(k, c)| if k == 0 { c } else { c * cis_turns(-T::from_i64(k).unwrap() * tau) })
                .collect(),
        }),
        SpectralMeasure::Atomic(atoms) => SpectralMeasure::Atomic(
            atoms.iter().map(|a| Atom { location: frac(a.location + tau), mass: a.mass }).collect(),
        ),
    }
}

/// Outcome of the grid nonnegativity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonnegativityReport<T> {
    pub min_value: T,
    /// Grid point where the minimum occurs.
    pub at: T,
    pub grid_points: usize,
    pub pass: bool,
}

/// Evaluates the density on `grid_factor * (2d + 1)` equispaced points and
/// passes when the minimum is at least `-1e-10 * mu_hat(0)`.
pub fn nonnegativity_check<T: Real>(mu: &SpectralMeasure<T>, grid_factor: usize) -> Result<NonnegativityReport<T>> {
    let t = mu.as_trig()?;
    if grid_factor == 0 {
        return invalid("grid factor must be positive");
    }
    if !t.is_hermitian() {
        return invalid(format!("coefficients are not Hermitian (defect {})", t.hermitian_defect()));
    }
    let n = grid_factor * (2 * t.degree() + 1);
    let values = t.grid_values(n);
    let (argmin, min_value) =
        values
            .iter()
            .copied()
            .enumerate()
            .fold((0, T::infinity()), |best, (i, v)| if v < best.1 { (i, v) } else { best });
    let floor = -T::lit(NONNEGATIVITY_TOL) * t.coeff(0).re;
    Ok(NonnegativityReport {
        min_value,
        at: T::from_usize_lossy(argmin) / T::from_usize_lossy(n),
        grid_points: n,
        pass: min_value >= floor,
    })
}

/// Samples `(x, density(x))` on `n` equispaced points, for plotting.
pub fn grid_samples<T: Real>(mu: &SpectralMeasure<T>, n: usize) -> Result<Vec<(T, T)>> {
    if n == 0 {
        return invalid("grid size must be positive");
    }
    let t = mu.as_trig()?;
    let nf = T::from_usize_lossy(n);
    Ok(t.grid_values(n).into_iter().enumerate().map(|(j, v)| (T::from_usize_lossy(j) / nf, v)).collect())
}

/// `max_{|k| <= K} |mu1_hat(k) - mu2_hat(k)| / (1 + |k|)`.
pub fn weak_star_distance<T: Real>(mu1: &SpectralMeasure<T>, mu2: &SpectralMeasure<T>, max_freq: usize) -> T {
    (-(max_freq as i64)..=max_freq as i64)
        .map(|k| (mu1.coeff(k) - mu2.coeff(k)).norm() / T::from_u64(1 + k.unsigned_abs()).unwrap())
        .fold(T::zero(), T::max)
}

/// Wiener's average `S_N = (1/(2N+1)) sum_{|k|<=N} |mu_hat(k)|^2`, which
/// tends to the sum of squared atom masses.
pub fn wiener_atom_statistic<T: Real, D: FourierData<T> + ?Sized>(data: &D, n: usize) -> Result<T> {
    if let Some(known) = data.known_up_to() {
        if known < n {
            return Err(Error::InvalidArgument(format!("coefficients known only for |k| <= {known}, need {n}")));
        }
    }
    let mut terms: Vec<T> = (-(n as i64)..=n as i64).map(|k| data.fourier_coeff(k).norm_sqr()).collect();
    Ok(pairwise_sum(&mut terms) / T::from_usize_lossy(2 * n + 1))
}

/// Pairwise summation with a fixed reduction order.
pub(crate) fn pairwise_sum<T: Real>(xs: &mut [T]) -> T {
    match xs.len() {
        0 => T::zero(),
        1 => xs[0],
        n => {
            let (a, b) = xs.split_at_mut(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}
