//! Generalized Fejer kernels `K_d(F)`, empirical autocorrelations of
//! indicator sequences, and the atomic weak* limit of `K_d(F)` for Bohr
//! sets.

use num_complex::Complex;
use num_traits::Float;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::fft::{chirp_eval, pair_counts};
use crate::linalg::symmetric_eigen;
use crate::measures::{Atom, FourierData, SpectralMeasure, TrigMeasure};
use crate::scalar::{circle_distance, frac, Real};
use crate::sequences::{BinarySequence, FrequencySet, Provenance};

/// Tolerance of the Toeplitz positive semidefiniteness spot check.
pub const PSD_TOL: f64 = 1e-8;

/// Largest lag for which [`Autocorrelation::psd_defect`] builds the dense
/// Toeplitz matrix.
pub const PSD_CHECK_MAX_LAG: usize = 64;

/// Atoms of the Bohr limit closer than this (on the circle) are merged.
pub const ATOM_MERGE_TOL: f64 = 1e-12;

/// Intervals of the local Simpson quadrature in [`kernel_vs_limit`].
pub const LOCAL_QUADRATURE_INTERVALS: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Fourier coefficients of `K_d(F)`, so `gamma(0) = 1`.
    Kernel,
    /// `(1/N) sum x[n] x[n+k]`, so `gamma(0)` is the density.
    Density,
    /// As `Density` after subtracting the mean of the sequence.
    Centered,
}

/// Even real lag sequence `gamma(k)`, `|k| <= L`.
#[derive(Debug, Clone, PartialEq)]
pub struct Autocorrelation<T> {
    values: Vec<T>,
    normalization: Normalization,
}

impl<T: Real> Autocorrelation<T> {
    /// `values[k] = gamma(k)` for `k = 0..=L`; requires `gamma(0) > 0`.
    pub fn new(values: Vec<T>, normalization: Normalization) -> Result<Self> {
        match values.first() {
            Some(&g0) if g0 > T::zero() => Ok(Self { values, normalization }),
            Some(&g0) => invalid(format!("gamma(0) = {g0} must be positive")),
            None => invalid("autocorrelation needs at least gamma(0)"),
        }
    }

    pub fn max_lag(&self) -> usize {
        self.values.len() - 1
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// `gamma(k)`, zero beyond the stored lags.
    pub fn value(&self, k: i64) -> T {
        self.values.get(k.unsigned_abs() as usize).copied().unwrap_or_else(T::zero)
    }

    /// `gamma(0), gamma(1), ..., gamma(L)`.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Truncation to lags `<= max_lag`.
    pub fn banded(&self, max_lag: usize) -> Self {
        Self { values: self.values[..=max_lag.min(self.max_lag())].to_vec(), normalization: self.normalization }
    }

    /// Multiplies by the triangle `1 - |k|/(L+1)`. The product of two
    /// positive definite sequences is positive definite, so a PSD input
    /// stays PSD after this band limitation.
    pub fn fejer_tapered(&self, max_lag: usize) -> Self {
        let l = max_lag.min(self.max_lag());
        let denom = T::from_usize_lossy(l + 1);
        let values = (0..=l).map(|k| self.values[k] * (T::one() - T::from_usize_lossy(k) / denom)).collect();
        Self { values, normalization: self.normalization }
    }

    pub fn to_measure(&self) -> SpectralMeasure<T> {
        SpectralMeasure::Trig(TrigMeasure::from_even_real(&self.values))
    }

    /// Negative of the smallest eigenvalue of `[gamma(j - k)]` over lags
    /// `<= min(L, 64)`, clipped at zero.
    pub fn psd_defect(&self) -> Result<T> {
        let l = self.max_lag().min(PSD_CHECK_MAX_LAG);
        let a: Vec<Vec<T>> = (0..=l).map(|i| (0..=l).map(|j| self.values[i.abs_diff(j)]).collect()).collect();
        let eig = symmetric_eigen(&a)?;
        Ok((-eig.values[0]).max(T::zero()))
    }

    pub fn is_psd(&self) -> Result<bool> {
        Ok(self.psd_defect()? <= T::lit(PSD_TOL) * self.values[0])
    }
}

impl<T: Real> FourierData<T> for Autocorrelation<T> {
    fn known_up_to(&self) -> Option<usize> {
        Some(self.max_lag())
    }

    fn fourier_coeff(&self, k: i64) -> Complex<T> {
        Complex::new(self.value(k), T::zero())
    }
}

/// Coefficients of `K_d(F)`: the number of pairs in `F ∩ [-d, d]` at each
/// difference, divided by `|F ∩ [-d, d]|`. Counts are exact integers.
pub fn fejer_kernel_coeffs<T: Real>(set: &FrequencySet, d: u64) -> Result<SpectralMeasure<T>> {
    let d = i64::try_from(d).map_err(|_| Error::InvalidArgument("d too large".into()))?;
    let elements = set.elements_in(-d, d);
    if elements.is_empty() {
        return Err(Error::Undefined(format!("F ∩ [-{d}, {d}] is empty")));
    }
    let counts = pair_counts(elements)?;
    let size = T::from_usize_lossy(elements.len());
    let values: Vec<T> = counts.iter().map(|&c| T::from_u64(c).unwrap() / size).collect();
    Ok(SpectralMeasure::Trig(TrigMeasure::from_even_real(&values)))
}

fn ones_count(x: &BinarySequence) -> Result<(Vec<i64>, usize)> {
    let ones = x.ones();
    if ones.is_empty() {
        return Err(Error::Undefined("autocorrelation of an all-zero sequence".into()));
    }
    let n = ones.len();
    Ok((ones, n))
}

/// `c(k) = (1/N) sum_{n=0}^{N-1-k} x[n] x[n+k]`, `0 <= k <= L < N`.
pub fn empirical_autocorrelation<T: Real>(x: &BinarySequence, max_lag: usize) -> Result<Autocorrelation<T>> {
    let n = x.len();
    if max_lag >= n {
        return invalid(format!("max lag {max_lag} must be below the window length {n}"));
    }
    let (ones, _) = ones_count(x)?;
    let counts = pair_counts(&ones)?;
    let nf = T::from_usize_lossy(n);
    let values = (0..=max_lag).map(|k| T::from_u64(counts.get(k).copied().unwrap_or(0)).unwrap() / nf).collect();
    Autocorrelation::new(values, Normalization::Density)
}

/// Autocorrelation of `x - mean(x)` with the same `1/N` normalization.
/// Removes the trivial atom at 0 carried by a set of positive density.
pub fn centered_autocorrelation<T: Real>(x: &BinarySequence, max_lag: usize) -> Result<Autocorrelation<T>> {
    let n = x.len();
    if max_lag >= n {
        return invalid(format!("max lag {max_lag} must be below the window length {n}"));
    }
    let (ones, total) = ones_count(x)?;
    if total == n {
        return Err(Error::Undefined("centered autocorrelation of a constant sequence".into()));
    }
    let counts = pair_counts(&ones)?;
    // prefix[i] = number of ones in x[0..i]
    let mut prefix = vec![0u64; n + 1];
    for (i, &b) in x.bits().iter().enumerate() {
        prefix[i + 1] = prefix[i] + b as u64;
    }
    let nf = n as f64;
    let rho = total as f64 / nf;
    let values = (0..=max_lag)
        .map(|k| {
            let pairs = counts.get(k).copied().unwrap_or(0) as f64;
            let head = prefix[n - k] as f64;
            let tail = (prefix[n] - prefix[k]) as f64;
            let v = (pairs - rho * (head + tail) + rho * rho * (n - k) as f64) / nf;
            T::lit(v)
        })
        .collect();
    Autocorrelation::new(values, Normalization::Centered)
}

/// One term `j` of the Bohr limit before merging.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BohrTerm<T> {
    pub j: i64,
    pub location: T,
    pub mass: T,
}

/// Truncated limit measure of `K_d(F)` for a Bohr set with window `[a0, a1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BohrLimit<T> {
    /// Merged atoms, sorted by location.
    pub measure: SpectralMeasure<T>,
    /// Unmerged terms for `j = -jmax..=jmax`.
    pub terms: Vec<BohrTerm<T>>,
    /// `1 - sum of masses`; the mass carried by `|j| > jmax`.
    pub remainder: T,
}

/// `|chi_A_hat(j)|^2` for `A = [a0, a1)`.
pub fn interval_fourier_sq<T: Real>(a0: T, a1: T, j: i64) -> T {
    let width = a1 - a0;
    if j == 0 {
        return width * width;
    }
    let pj = T::PI() * T::from_i64(j).unwrap();
    let s = (pj * width).sin();
    s * s / (pj * pj)
}

/// Atoms at `frac(-j alpha)` with masses `|chi_A_hat(j)|^2 / (a1 - a0)` for
/// `|j| <= jmax`.
pub fn bohr_limit_atoms<T: Real>(alpha: T, a0: T, a1: T, jmax: i64) -> Result<BohrLimit<T>> {
    if jmax < 0 {
        return invalid(format!("jmax must be nonnegative, got {jmax}"));
    }
    if !(a0 >= T::zero() && a0 < a1 && a1 <= T::one()) {
        return invalid(format!("need 0 <= a0 < a1 <= 1, got [{a0}, {a1})"));
    }
    let width = a1 - a0;
    let terms: Vec<BohrTerm<T>> = (-jmax..=jmax)
        .map(|j| BohrTerm {
            j,
            location: frac(-T::from_i64(j).unwrap() * alpha),
            mass: interval_fourier_sq(a0, a1, j) / width,
        })
        .collect();

    let mut sorted: Vec<Atom<T>> = terms.iter().map(|t| Atom { location: t.location, mass: t.mass }).collect();
    sorted.sort_by(|a, b| a.location.partial_cmp(&b.location).unwrap());
    let tol = T::lit(ATOM_MERGE_TOL);
    let mut merged: Vec<Atom<T>> = Vec::with_capacity(sorted.len());
    for atom in sorted {
        match merged.last_mut() {
            Some(last) if circle_distance(last.location, atom.location) <= tol => last.mass += atom.mass,
            _ => merged.push(atom),
        }
    }
    if merged.len() > 1 {
        let last = merged[merged.len() - 1];
        if circle_distance(last.location, merged[0].location) <= tol {
            merged[0].mass += last.mass;
            merged.pop();
        }
    }
    let total: T = merged.iter().map(|a| a.mass).sum();
    Ok(BohrLimit { measure: SpectralMeasure::Atomic(merged), terms, remainder: T::one() - total })
}

/// Acceptance rule for one row of [`kernel_vs_limit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitTolerance {
    /// Relative error allowed where the predicted mass exceeds `zero_floor`.
    pub relative: f64,
    /// Predicted masses below this count as zero; the empirical mass must
    /// then stay below it too.
    pub zero_floor: f64,
}

impl Default for LimitTolerance {
    fn default() -> Self {
        Self { relative: 0.05, zero_floor: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelLimitRow<T> {
    pub j: i64,
    pub location: T,
    pub predicted: T,
    pub empirical: T,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelLimitReport<T> {
    pub rows: Vec<KernelLimitRow<T>>,
    /// Some pair of integration windows overlaps on the circle.
    pub overlap_warning: bool,
    /// `|F ∩ [-d, d]|`.
    pub kernel_size: usize,
}

/// Parameters of the kernel-versus-limit comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelLimitParams<T> {
    pub alpha: T,
    pub a0: T,
    pub a1: T,
    pub d: u64,
    pub jmax: i64,
    pub half_width: T,
    pub tolerance: LimitTolerance,
}

/// Integrates `K_d(F)` over `[loc - h, loc + h]` around each predicted atom
/// `loc = frac(-j alpha)`, `|j| <= jmax`, and compares with the predicted
/// mass.
pub fn kernel_vs_limit<T: Real>(set: &FrequencySet, params: &KernelLimitParams<T>) -> Result<KernelLimitReport<T>> {
    let KernelLimitParams { alpha, a0, a1, d, jmax, half_width, tolerance } = *params;
    if let Provenance::Bohr { alpha: pa, a0: p0, a1: p1, .. } = *set.provenance() {
        if pa != alpha.as_f64() || p0 != a0.as_f64() || p1 != a1.as_f64() {
            return invalid("set was generated from different Bohr parameters");
        }
    }
    if !(half_width > T::zero() && half_width < T::lit(0.5)) {
        return invalid(format!("half width {half_width} must lie in (0, 1/2)"));
    }
    let di = i64::try_from(d).map_err(|_| Error::InvalidArgument("d too large".into()))?;
    let elements = set.elements_in(-di, di);
    let (Some(&first), Some(&last)) = (elements.first(), elements.last()) else {
        return Err(Error::Undefined(format!("F ∩ [-{d}, {d}] is empty")));
    };
    let limit = bohr_limit_atoms(alpha, a0, a1, jmax)?;

    let mut indicator = vec![Complex::new(T::zero(), T::zero()); (last - first) as usize + 1];
    for &n in elements {
        indicator[(n - first) as usize] = Complex::new(T::one(), T::zero());
    }
    let size = T::from_usize_lossy(elements.len());

    let rows: Vec<KernelLimitRow<T>> = limit
        .terms
        .par_iter()
        .map(|term| {
            let empirical = local_mass(&indicator, size, term.location, half_width);
            let pass = if term.mass.as_f64() > tolerance.zero_floor {
                Float::abs(empirical - term.mass) <= T::lit(tolerance.relative) * term.mass
            } else {
                empirical.as_f64() <= tolerance.zero_floor
            };
            KernelLimitRow { j: term.j, location: term.location, predicted: term.mass, empirical, pass }
        })
        .collect();

    let mut locations: Vec<T> = limit.terms.iter().map(|t| t.location).collect();
    locations.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let two_h = half_width + half_width;
    let overlap_warning = locations.windows(2).any(|w| circle_distance(w[0], w[1]) < two_h)
        || (locations.len() > 1 && circle_distance(locations[0], locations[locations.len() - 1]) < two_h);

    Ok(KernelLimitReport { rows, overlap_warning, kernel_size: elements.len() })
}

/// Composite Simpson integral of `|sum_n a_n e^{2 pi i n x}|^2 / size` over
/// `[center - h, center + h]`.
fn local_mass<T: Real>(indicator: &[Complex<T>], size: T, center: T, h: T) -> T {
    let q = LOCAL_QUADRATURE_INTERVALS;
    let start = (center - h).as_f64();
    let step = (h + h).as_f64() / q as f64;
    let values = chirp_eval(indicator, start, step, q + 1);
    let (two, four) = (T::lit(2.0), T::lit(4.0));
    let weighted: T = values
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let w = if i == 0 || i == q {
                T::one()
            } else if i % 2 == 1 {
                four
            } else {
                two
            };
            w * z.norm_sqr()
        })
        .sum();
    weighted * T::lit(step) / T::lit(3.0) / size
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{nonnegativity_check, squared_modulus, TrigPolynomial};
    use crate::sequences::{gen_bohr, gen_thue_morse};

    fn coeff_map(mu: &SpectralMeasure<f64>) -> Vec<(i64, f64)> {
        mu.as_trig().unwrap().iter().filter(|(_, c)| c.norm() > 0.0).map(|(k, c)| (k, c.re)).collect()
    }

    #[test]
    fn fejer_examples() {
        let z = FrequencySet::explicit((-10, 11), -10..11).unwrap();
        let mu = fejer_kernel_coeffs::<f64>(&z, 1).unwrap();
        assert_eq!(coeff_map(&mu), vec![(-2, 1.0 / 3.0), (-1, 2.0 / 3.0), (0, 1.0), (1, 2.0 / 3.0), (2, 1.0 / 3.0)]);

        let f = FrequencySet::from_elements([0, 1, 3]);
        let mu = fejer_kernel_coeffs::<f64>(&f, 3).unwrap();
        let third = 1.0 / 3.0;
        assert_eq!(
            coeff_map(&mu),
            vec![(-3, third), (-2, third), (-1, third), (0, 1.0), (1, third), (2, third), (3, third)]
        );

        let single = FrequencySet::from_elements([5]);
        assert_eq!(coeff_map(&fejer_kernel_coeffs::<f64>(&single, 5).unwrap()), vec![(0, 1.0)]);
        assert!(matches!(fejer_kernel_coeffs::<f64>(&single, 4), Err(Error::Undefined(_))));

        // classical kernel on {0..d}
        let classical = FrequencySet::from_elements(0..=1);
        assert_eq!(coeff_map(&fejer_kernel_coeffs::<f64>(&classical, 1).unwrap()), vec![(-1, 0.5), (0, 1.0), (1, 0.5)]);
    }

    #[test]
    fn fejer_equals_squared_modulus_of_uniform_polynomial() {
        let f = FrequencySet::from_elements([-7, -2, 0, 1, 4, 9, 13]);
        let mu = fejer_kernel_coeffs::<f64>(&f, 9).unwrap();
        let p = TrigPolynomial::<f64>::uniform(f.elements_in(-9, 9));
        let s = squared_modulus(&p);
        for k in -20..=20 {
            assert!((mu.coeff(k) - s.coeff(k)).norm() < 1e-14, "k={k}");
        }
        assert!(nonnegativity_check(&mu, 8).unwrap().pass);
    }

    #[test]
    fn empirical_autocorrelation_examples() {
        let ones = BinarySequence::new(vec![1; 10]);
        let ac = empirical_autocorrelation::<f64>(&ones, 9).unwrap();
        for k in 0..10 {
            assert!((ac.value(k) - (10 - k) as f64 / 10.0).abs() < 1e-15);
        }
        let alt = BinarySequence::new((0..20).map(|i| (i % 2) as u8).collect());
        assert_eq!(empirical_autocorrelation::<f64>(&alt, 3).unwrap().value(1), 0.0);
        assert!(empirical_autocorrelation::<f64>(&ones, 10).is_err());
        assert!(empirical_autocorrelation::<f64>(&BinarySequence::new(vec![0; 5]), 2).is_err());
    }

    #[test]
    fn centered_matches_direct_sum() {
        let x = gen_thue_morse(1000).unwrap().indicator();
        let ac = centered_autocorrelation::<f64>(&x, 40).unwrap();
        let b: Vec<f64> = x.bits().iter().map(|&v| v as f64).collect();
        let mean = b.iter().sum::<f64>() / b.len() as f64;
        for k in [0usize, 1, 7, 40] {
            let direct: f64 = (0..b.len() - k).map(|n| (b[n] - mean) * (b[n + k] - mean)).sum::<f64>() / b.len() as f64;
            assert!((ac.value(k as i64) - direct).abs() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn autocorrelation_psd_spot_check() {
        let x = gen_thue_morse(4096).unwrap().indicator();
        assert!(empirical_autocorrelation::<f64>(&x, 64).unwrap().is_psd().unwrap());
        let bad = Autocorrelation::new(vec![1.0, 0.9, -0.9], Normalization::Kernel).unwrap();
        assert!(!bad.is_psd().unwrap());
        assert!(Autocorrelation::new(vec![0.0, 0.1], Normalization::Kernel).is_err());
    }

    #[test]
    fn bohr_atom_examples() {
        let alpha = std::f64::consts::SQRT_2 - 1.0;
        let lim = bohr_limit_atoms(alpha, 0.0, 0.5, 3).unwrap();
        let mass = |j: i64| lim.terms.iter().find(|t| t.j == j).unwrap().mass;
        assert!((mass(0) - 0.5).abs() < 1e-15);
        let two_over_pi2 = 2.0 / std::f64::consts::PI.powi(2);
        assert!((mass(1) - two_over_pi2).abs() < 1e-15);
        assert!((mass(-1) - two_over_pi2).abs() < 1e-15);
        assert!(mass(2) < 1e-30);
        let loc1 = lim.terms.iter().find(|t| t.j == 1).unwrap().location;
        assert!((loc1 - (1.0 - alpha)).abs() < 1e-15);

        let lim = bohr_limit_atoms(alpha, 0.0, 0.5, 99).unwrap();
        assert!(lim.remainder > 0.0 && lim.remainder < 1e-2);

        let whole = bohr_limit_atoms(alpha, 0.0, 1.0, 10).unwrap();
        let atoms = whole.measure.atoms().unwrap();
        let heavy: Vec<_> = atoms.iter().filter(|a| a.mass > 1e-20).collect();
        assert_eq!(heavy.len(), 1);
        assert_eq!((heavy[0].location, heavy[0].mass), (0.0, 1.0));

        assert!(bohr_limit_atoms(alpha, 0.0, 0.5, -1).is_err());
    }

    #[test]
    fn bohr_atoms_merge_for_rational_rotation() {
        // alpha = 1/4 puts j and j + 4 on the same point
        let lim = bohr_limit_atoms(0.25, 0.0, 0.5, 8).unwrap();
        assert_eq!(lim.measure.atoms().unwrap().len(), 4);
    }

    #[test]
    fn local_quadrature_matches_exact_integration() {
        // oracle: integrate each Fourier mode of K_d exactly
        let alpha = std::f64::consts::SQRT_2 - 1.0;
        let f = gen_bohr(alpha, 0.0, 0.0, 0.5, 2001).unwrap();
        let d = 2000u64;
        let mu = fejer_kernel_coeffs::<f64>(&f, d).unwrap();
        let params = KernelLimitParams {
            alpha,
            a0: 0.0,
            a1: 0.5,
            d,
            jmax: 2,
            half_width: 0.01,
            tolerance: LimitTolerance::default(),
        };
        let report = kernel_vs_limit(&f, &params).unwrap();
        for row in &report.rows {
            let (a, b) = (row.location - 0.01, row.location + 0.01);
            let exact: f64 = mu
                .as_trig()
                .unwrap()
                .iter()
                .map(|(k, c)| {
                    if k == 0 {
                        c.re * (b - a)
                    } else {
                        let w = std::f64::consts::TAU * k as f64;
                        let prim = |x: f64| Complex::new((w * x).sin(), -(w * x).cos()) / w;
                        (c * (prim(b) - prim(a))).re
                    }
                })
                .sum();
            assert!((row.empirical - exact).abs() < 1e-6, "j={} {} vs {}", row.j, row.empirical, exact);
        }
    }

    #[test]
    fn degenerate_kernel_is_lebesgue() {
        let alpha = std::f64::consts::SQRT_2 - 1.0;
        let f = gen_bohr(alpha, 0.0, 0.0, 0.5, 100).unwrap();
        let params = KernelLimitParams {
            alpha,
            a0: 0.0,
            a1: 0.5,
            d: 0,
            jmax: 2,
            half_width: 1e-3,
            tolerance: LimitTolerance::default(),
        };
        let report = kernel_vs_limit(&f, &params).unwrap();
        assert_eq!(report.kernel_size, 1);
        for row in report.rows {
            assert!((row.empirical - 2e-3).abs() < 1e-12);
        }
    }

    #[test]
    fn overlap_flag() {
        let alpha = std::f64::consts::SQRT_2 - 1.0;
        let f = gen_bohr(alpha, 0.0, 0.0, 0.5, 100).unwrap();
        let mut params = KernelLimitParams {
            alpha,
            a0: 0.0,
            a1: 0.5,
            d: 50,
            jmax: 3,
            half_width: 1e-3,
            tolerance: LimitTolerance::default(),
        };
        assert!(!kernel_vs_limit(&f, &params).unwrap().overlap_warning);
        params.half_width = 0.1;
        assert!(kernel_vs_limit(&f, &params).unwrap().overlap_warning);
        params.alpha = 0.3;
        assert!(kernel_vs_limit(&f, &params).is_err());
    }
}
