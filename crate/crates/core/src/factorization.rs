//! Fejer-Riesz factorization of nonnegative trigonometric polynomials,
//! enumeration of every factor with the same squared modulus, phase
//! retrieval under a support constraint, and a numerical rank test for the
//! differential of `p -> |p|^2`.
//!
//! A measure with coefficients on `{-d..d}` is written as
//! `Q(z) = sum_k mu_hat(k) z^(k+d)`, a polynomial of degree `2d` whose roots
//! come in pairs `r, 1/conj(r)`. A factor picks one root from each pair.

use std::collections::HashMap;

use num_complex::Complex;
use num_traits::{Float, Zero};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::linalg::{horner, polynomial_roots, singular_values};
use crate::measures::{
    nonnegativity_check, squared_modulus, SpectralMeasure, TrigMeasure, TrigPolynomial, DEFAULT_GRID_FACTOR,
};
use crate::scalar::Real;
use crate::sequences::{difference_set, FrequencySet};

/// Tolerances of the factorization routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorizationConfig {
    /// Root pairs within this distance of the unit circle are one double root.
    pub on_circle_tol: f64,
    /// Pairs this close to the circle are tested for being a double root.
    pub near_circle_probe: f64,
    /// Largest accepted `|r_out conj(r_in) - 1|`.
    pub pairing_limit: f64,
    /// Largest accepted coefficient error of `|p|^2`, relative to `mu_hat(0)`.
    pub residual_tol: f64,
    /// Factors closer than this (relative to `sqrt(mu_hat(0))`) are equal.
    pub dedup_tol: f64,
    /// Enumeration guard on the degree.
    pub max_enumeration_degree: usize,
}

impl Default for FactorizationConfig {
    fn default() -> Self {
        Self {
            on_circle_tol: 1e-8,
            near_circle_probe: 1e-5,
            pairing_limit: 1e-6,
            residual_tol: 1e-8,
            dedup_tol: 1e-8,
            max_enumeration_degree: 20,
        }
    }
}

/// Coefficients below this fraction of the largest `|mu_hat|` are ignored
/// when reading off the degree.
const DEGREE_CUTOFF: f64 = 1e-14;

/// Retrieved coefficients below this fraction of the norm are set to zero.
pub const SUPPORT_ZERO_TOL: f64 = 1e-9;

/// Largest `|F|` accepted by [`phase_retrieval_constrained`].
pub const MAX_RETRIEVAL_SET: usize = 20;

/// Largest `|F|` accepted by [`jacobian_rank`].
pub const MAX_JACOBIAN_SET: usize = 256;

/// Singular values above this fraction of `max(sigma_max, 1)` count towards
/// the rank.
pub const RANK_TOL: f64 = 1e-6;

/// One reciprocal pair of roots of `Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootPair<T> {
    /// Root in the closed unit disk.
    pub inner: Complex<T>,
    /// Its reflection `1/conj(inner)`, as computed.
    pub outer: Complex<T>,
    /// Double root on the circle; contributes the same root to every factor.
    pub on_circle: bool,
    /// `|outer conj(inner) - 1|` of the computed roots.
    pub pairing_residual: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationResult<T> {
    /// Factor with every root in the closed unit disk and first coefficient
    /// real positive.
    pub canonical: TrigPolynomial<T>,
    /// Every distinct factor, canonical first, when enumerated.
    pub all_factors: Option<Vec<TrigPolynomial<T>>>,
    /// `max_k | |q|^2 hat(k) - mu_hat(k) |` for each entry of `all_factors`.
    pub factor_residuals: Vec<T>,
    pub roots: Vec<RootPair<T>>,
    /// Coefficient error of the canonical factor.
    pub residual: T,
    pub max_pairing_residual: T,
    /// Remarks such as collapsed on-circle pairs.
    pub notes: Vec<String>,
}

impl<T: Real> FactorizationResult<T> {
    pub fn on_circle_pairs(&self) -> usize {
        self.roots.iter().filter(|r| r.on_circle).count()
    }

    pub fn degree(&self) -> usize {
        self.roots.len()
    }
}

struct Prepared<T> {
    degree: usize,
    mu: TrigMeasure<T>,
    mu0: T,
    pairs: Vec<RootPair<T>>,
    max_pairing_residual: T,
}

fn prepare<T: Real>(mu: &SpectralMeasure<T>, cfg: &FactorizationConfig) -> Result<Prepared<T>> {
    let report = nonnegativity_check(mu, DEFAULT_GRID_FACTOR)?;
    if !report.pass {
        return Err(Error::NotAMeasure { min_value: report.min_value.as_f64(), at: report.at.as_f64() });
    }
    let trig = mu.as_trig()?;
    let mu0 = trig.coeff(0).re;
    if mu0 <= T::zero() {
        return Err(Error::NotAMeasure { min_value: mu0.as_f64(), at: 0.0 });
    }
    let d = trig.effective_degree(T::lit(DEGREE_CUTOFF));
    let trig = trig.truncated(d);
    if d == 0 {
        return Ok(Prepared { degree: 0, mu: trig, mu0, pairs: Vec::new(), max_pairing_residual: T::zero() });
    }
    let q: Vec<Complex<T>> = trig.centered().to_vec();
    let roots = polynomial_roots(&q)?;
    let pairs = pair_roots(&q, roots, cfg)?;
    let max_pairing_residual = pairs.iter().map(|p| p.pairing_residual).fold(T::zero(), T::max);
    Ok(Prepared { degree: d, mu: trig, mu0, pairs, max_pairing_residual })
}

/// Greedy reciprocal matching: the innermost remaining root is paired with
/// the remaining root closest to its reflection.
fn pair_roots<T: Real>(
    q: &[Complex<T>],
    mut roots: Vec<Complex<T>>,
    cfg: &FactorizationConfig,
) -> Result<Vec<RootPair<T>>> {
    roots.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap().then(a.arg().partial_cmp(&b.arg()).unwrap()));
    let dq: Vec<Complex<T>> = (1..q.len()).map(|k| q[k] * T::from_usize_lossy(k)).collect();
    let q_scale: T = q.iter().map(|c| c.norm()).sum();
    let one = Complex::new(T::one(), T::zero());
    let mut pairs = Vec::with_capacity(roots.len() / 2);
    let mut used = vec![false; roots.len()];
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let r = roots[i];
        let (j, res) = (0..roots.len())
            .filter(|&j| !used[j])
            .map(|j| (j, (roots[j] * r.conj() - one).norm()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .ok_or_else(|| Error::Numerical("odd number of roots".into()))?;
        used[j] = true;
        let s = roots[j];
        if res.as_f64() > cfg.pairing_limit {
            return Err(Error::Conditioning {
                pairing_residual: res.as_f64(),
                limit: cfg.pairing_limit,
                detail: format!("root {r} has no reciprocal partner (closest {s})"),
            });
        }
        let reflected = one / s.conj();
        let mid = (r + reflected) * T::lit(0.5);
        let dist = |z: Complex<T>| Float::abs(z.norm() - T::one()).as_f64();
        let mut pair = RootPair { inner: mid, outer: one / mid.conj(), on_circle: false, pairing_residual: res };
        if dist(r).max(dist(s)) <= cfg.near_circle_probe {
            if let Some(rho) = double_root(q, &dq, mid, q_scale, cfg.on_circle_tol) {
                pair = RootPair { inner: rho, outer: rho, on_circle: true, pairing_residual: res };
            } else if dist(r).max(dist(s)) <= cfg.on_circle_tol {
                let rho = mid.unscale(mid.norm());
                pair = RootPair { inner: rho, outer: rho, on_circle: true, pairing_residual: res };
            }
        }
        if !pair.on_circle && pair.inner.norm() > T::one() {
            std::mem::swap(&mut pair.inner, &mut pair.outer);
        }
        pairs.push(pair);
    }
    Ok(pairs)
}

/// Newton on `Q'` from `start`; returns the limit if it is a root of `Q` on
/// the circle.
fn double_root<T: Real>(
    q: &[Complex<T>],
    dq: &[Complex<T>],
    start: Complex<T>,
    q_scale: T,
    circle_tol: f64,
) -> Option<Complex<T>> {
    let mut z = start;
    for _ in 0..20 {
        let (d1, d2) = horner(dq, z);
        if d2.is_zero() {
            break;
        }
        let step = d1 / d2;
        z -= step;
        if step.norm() <= T::epsilon() * z.norm() {
            break;
        }
    }
    let (qz, _) = horner(q, z);
    let on_circle = Float::abs(z.norm() - T::one()).as_f64() <= circle_tol;
    let is_root = qz.norm() <= T::lit(1e-12) * q_scale;
    (on_circle && is_root && (z - start).norm().as_f64() <= 1e-4).then_some(z)
}

/// Expands `prod (z - r)`, rescales to `sum |c|^2 = mu0` and rotates the
/// first nonzero coefficient onto the positive real axis.
fn build_factor<T: Real>(roots: impl Iterator<Item = Complex<T>>, mu0: T) -> TrigPolynomial<T> {
    let mut c = vec![Complex::new(T::one(), T::zero())];
    for r in roots {
        c.push(Complex::zero());
        for i in (0..c.len()).rev() {
            let prev = if i > 0 { c[i - 1] } else { Complex::zero() };
            c[i] = prev - r * c[i];
        }
    }
    let energy: T = c.iter().map(|z| z.norm_sqr()).sum();
    let scale = (mu0 / energy).sqrt();
    let peak = c.iter().map(|z| z.norm()).fold(T::zero(), T::max);
    let lead = c.iter().position(|z| z.norm() > T::lit(1e-14) * peak).unwrap_or(0);
    let phase = c[lead].conj().unscale(c[lead].norm());
    let mut out: Vec<Complex<T>> = c.iter().map(|&z| z * phase * scale).collect();
    out[lead] = Complex::new(c[lead].norm() * scale, T::zero());
    TrigPolynomial::from_dense(0, &out)
}

/// `max_k | |p|^2 hat(k) - mu_hat(k) |`.
pub fn factor_residual<T: Real>(p: &TrigPolynomial<T>, mu: &TrigMeasure<T>) -> T {
    let sm = squared_modulus(p);
    let span = sm.as_trig().map(|t| t.degree()).unwrap_or(0).max(mu.degree()) as i64;
    (-span..=span).map(|k| (sm.coeff(k) - mu.coeff(k)).norm()).fold(T::zero(), T::max)
}

fn accept<T: Real>(residual: T, prep: &Prepared<T>, cfg: &FactorizationConfig) -> Result<()> {
    if residual > T::lit(cfg.residual_tol) * prep.mu0 {
        return Err(Error::Numerical(format!(
            "factor residual {residual:e} exceeds {:e} * mu_hat(0) (degree {}, max pairing residual {:e})",
            cfg.residual_tol, prep.degree, prep.max_pairing_residual
        )));
    }
    Ok(())
}

fn on_circle_note<T: Real>(prep: &Prepared<T>) -> Vec<String> {
    let k = prep.pairs.iter().filter(|p| p.on_circle).count();
    if k == 0 {
        Vec::new()
    } else {
        vec![format!("{k} root pair(s) on the unit circle; at most 2^{} distinct factors", prep.degree - k)]
    }
}

/// Canonical Fejer-Riesz factor.
pub fn fejer_riesz<T: Real>(mu: &SpectralMeasure<T>) -> Result<FactorizationResult<T>> {
    fejer_riesz_with(mu, &FactorizationConfig::default())
}

pub fn fejer_riesz_with<T: Real>(mu: &SpectralMeasure<T>, cfg: &FactorizationConfig) -> Result<FactorizationResult<T>> {
    let prep = prepare(mu, cfg)?;
    let canonical = build_factor(prep.pairs.iter().map(|p| p.inner), prep.mu0);
    let residual = factor_residual(&canonical, &prep.mu);
    accept(residual, &prep, cfg)?;
    Ok(FactorizationResult {
        canonical,
        all_factors: None,
        factor_residuals: Vec::new(),
        notes: on_circle_note(&prep),
        roots: prep.pairs,
        residual,
        max_pairing_residual: prep.max_pairing_residual,
    })
}

fn selection_factor<T: Real>(prep: &Prepared<T>, free: &[usize], mask: u64) -> TrigPolynomial<T> {
    let mut roots: Vec<Complex<T>> = prep.pairs.iter().map(|p| p.inner).collect();
    for (bit, &i) in free.iter().enumerate() {
        if mask >> bit & 1 == 1 {
            roots[i] = prep.pairs[i].outer;
        }
    }
    build_factor(roots.into_iter(), prep.mu0)
}

fn free_pairs<T: Real>(prep: &Prepared<T>, cfg: &FactorizationConfig) -> Result<Vec<usize>> {
    if prep.degree > cfg.max_enumeration_degree {
        return Err(Error::ResourceLimit(format!(
            "degree {} exceeds the enumeration guard {}",
            prep.degree, cfg.max_enumeration_degree
        )));
    }
    Ok(prep.pairs.iter().enumerate().filter(|(_, p)| !p.on_circle).map(|(i, _)| i).collect())
}

/// Every factor `q` with `|q|^2 = mu`, one per choice of root in each
/// off-circle pair, deduplicated. Selection `0` (all inner roots) comes
/// first; the rest follow in binary order of the selection mask.
pub fn enumerate_factorizations<T: Real>(mu: &SpectralMeasure<T>) -> Result<FactorizationResult<T>> {
    enumerate_factorizations_with(mu, &FactorizationConfig::default())
}

pub fn enumerate_factorizations_with<T: Real>(
    mu: &SpectralMeasure<T>,
    cfg: &FactorizationConfig,
) -> Result<FactorizationResult<T>> {
    let prep = prepare(mu, cfg)?;
    let free = free_pairs(&prep, cfg)?;
    let candidates: Vec<(TrigPolynomial<T>, T)> = (0..1u64 << free.len())
        .into_par_iter()
        .map(|mask| {
            let q = selection_factor(&prep, &free, mask);
            let r = factor_residual(&q, &prep.mu);
            (q, r)
        })
        .collect();

    let tol = T::lit(cfg.dedup_tol) * prep.mu0.sqrt();
    let key = |q: &TrigPolynomial<T>| (q.coeff(0).re / tol).floor().to_i64().unwrap_or(i64::MAX);
    let mut buckets: HashMap<i64, Vec<usize>> = HashMap::new();
    let mut kept: Vec<usize> = Vec::new();
    for (i, (q, _)) in candidates.iter().enumerate() {
        let k = key(q);
        let duplicate = (k.saturating_sub(1)..=k.saturating_add(1))
            .filter_map(|b| buckets.get(&b))
            .flatten()
            .any(|&j| candidates[j].0.max_coeff_distance(q) <= tol);
        if !duplicate {
            buckets.entry(k).or_default().push(i);
            kept.push(i);
        }
    }

    let mut factors = Vec::with_capacity(kept.len());
    let mut residuals = Vec::with_capacity(kept.len());
    for &i in &kept {
        accept(candidates[i].1, &prep, cfg)?;
        factors.push(candidates[i].0.clone());
        residuals.push(candidates[i].1);
    }
    let mut notes = on_circle_note(&prep);
    if kept.len() < candidates.len() {
        notes.push(format!("{} coincident factor(s) removed", candidates.len() - kept.len()));
    }
    Ok(FactorizationResult {
        canonical: factors[0].clone(),
        residual: residuals[0],
        all_factors: Some(factors),
        factor_residuals: residuals,
        notes,
        roots: prep.pairs,
        max_pairing_residual: prep.max_pairing_residual,
    })
}

/// A factor whose support, after a frequency shift, lies in `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct Retrieved<T> {
    pub p: TrigPolynomial<T>,
    /// Frequency shift applied to the factor on `{0..d}`.
    pub shift: i64,
    pub residual: T,
    /// Position of the factor in the enumeration order.
    pub factor_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Retrieval<T> {
    Found(Retrieved<T>),
    /// No enumerated factor fits in `F`.
    NotFound {
        searched: usize,
    },
}

fn check_support<T: Real>(mu: &SpectralMeasure<T>, set: &FrequencySet) -> Result<()> {
    let trig = mu.as_trig()?;
    let diffs = difference_set(set);
    match trig.support(T::lit(1e-12)).into_iter().find(|&k| !diffs.contains(k)) {
        Some(frequency) => Err(Error::InfeasibleBySupport { frequency }),
        None => Ok(()),
    }
}

/// Shift `m` with `supp(q) + m ⊆ F`, trying the elements of `F` in order as
/// the image of `min supp(q)`.
fn fitting_shift<T: Real>(q: &TrigPolynomial<T>, set: &FrequencySet) -> Option<i64> {
    let support = q.support();
    let &low = support.first()?;
    set.support().iter().map(|&f| f - low).find(|&m| support.iter().all(|&s| set.contains(s + m)))
}

fn trim_small<T: Real>(q: &TrigPolynomial<T>) -> TrigPolynomial<T> {
    let cut = T::lit(SUPPORT_ZERO_TOL) * q.norm_sqr().sqrt();
    TrigPolynomial::new(q.iter().filter(|(_, c)| c.norm() >= cut))
}

/// Finds `p` with frequencies in `F` and `|p|^2 = mu` by filtering the
/// enumerated factors on their support.
pub fn phase_retrieval_constrained<T: Real>(mu: &SpectralMeasure<T>, set: &FrequencySet) -> Result<Retrieval<T>> {
    phase_retrieval_constrained_with(mu, set, &FactorizationConfig::default())
}

pub fn phase_retrieval_constrained_with<T: Real>(
    mu: &SpectralMeasure<T>,
    set: &FrequencySet,
    cfg: &FactorizationConfig,
) -> Result<Retrieval<T>> {
    if set.is_empty() {
        return Err(Error::Undefined("P(F) is empty for empty F".into()));
    }
    if set.len() > MAX_RETRIEVAL_SET {
        return Err(Error::ResourceLimit(format!(
            "|F| = {} exceeds the retrieval guard {MAX_RETRIEVAL_SET}",
            set.len()
        )));
    }
    check_support(mu, set)?;
    let prep = prepare(mu, cfg)?;
    let free = free_pairs(&prep, cfg)?;
    let total = 1usize << free.len();
    let found = (0..total as u64).into_par_iter().find_map_first(|mask| {
        let q = trim_small(&selection_factor(&prep, &free, mask));
        let shift = fitting_shift(&q, set)?;
        let residual = factor_residual(&q, &prep.mu);
        (residual <= T::lit(cfg.residual_tol) * prep.mu0).then(|| Retrieved {
            p: q.modulate(shift),
            shift,
            residual,
            factor_index: mask as usize,
        })
    });
    Ok(match found {
        Some(r) => Retrieval::Found(r),
        None => Retrieval::NotFound { searched: total },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Membership<T> {
    Member(Retrieved<T>),
    /// A search outcome, not a proof of non-membership.
    NotMemberWithinSearch {
        searched: usize,
    },
    InfeasibleBySupport {
        frequency: i64,
    },
}

/// Decides `mu ∈ s(P(F))` for finite `F` by constrained phase retrieval.
pub fn membership_check<T: Real>(mu: &SpectralMeasure<T>, set: &FrequencySet) -> Result<Membership<T>> {
    match phase_retrieval_constrained(mu, set) {
        Ok(Retrieval::Found(r)) => Ok(Membership::Member(r)),
        Ok(Retrieval::NotFound { searched }) => Ok(Membership::NotMemberWithinSearch { searched }),
        Err(Error::InfeasibleBySupport { frequency }) => Ok(Membership::InfeasibleBySupport { frequency }),
        Err(e) => Err(e),
    }
}

/// `mu_hat(k)` for `k` in `diffs`, from coefficients `c` on the sorted set `f`.
fn coefficients_on_differences<T: Real>(
    f: &[i64],
    c: &[Complex<T>],
    index: &HashMap<i64, usize>,
    n_diffs: usize,
) -> Vec<Complex<T>> {
    let mut out = vec![Complex::zero(); n_diffs];
    for (a, &ca) in f.iter().zip(c) {
        for (b, &cb) in f.iter().zip(c) {
            out[index[&(a - b)]] += ca * cb.conj();
        }
    }
    out
}

/// Numerical rank of the differential of `p -> |p|^2` restricted to the
/// unit sphere of `P(F)`, from central differences with step `fd_step`.
/// Phase invariance makes the rank at most `2|F| - 2`.
pub fn jacobian_rank<T: Real>(p: &TrigPolynomial<T>, set: &FrequencySet, fd_step: T) -> Result<usize> {
    if !(fd_step > T::zero()) {
        return invalid(format!("finite difference step must be positive, got {fd_step}"));
    }
    if set.is_empty() || set.len() > MAX_JACOBIAN_SET {
        return invalid(format!("need 1 <= |F| <= {MAX_JACOBIAN_SET}, got {}", set.len()));
    }
    if p.is_zero() || !p.is_supported_in(set) {
        return invalid("p must be a nonzero polynomial with frequencies in F");
    }
    let f = set.support();
    let n = f.len();
    let diffs = difference_set(set);
    let index: HashMap<i64, usize> = diffs.support().iter().enumerate().map(|(i, &k)| (k, i)).collect();

    let norm = p.norm_sqr().sqrt();
    let x: Vec<T> = f
        .iter()
        .flat_map(|&k| {
            let c = p.coeff(k) / norm;
            [c.re, c.im]
        })
        .collect();
    let tangent = sphere_tangent_basis(&x);

    let evaluate = |y: &[T]| -> Vec<T> {
        let len = y.iter().map(|v| *v * *v).sum::<T>().sqrt();
        let c: Vec<Complex<T>> = (0..n).map(|j| Complex::new(y[2 * j], y[2 * j + 1]) / len).collect();
        coefficients_on_differences(f, &c, &index, index.len()).into_iter().flat_map(|z| [z.re, z.im]).collect()
    };

    let columns: Vec<Vec<T>> = tangent
        .iter()
        .map(|t| {
            let plus: Vec<T> = x.iter().zip(t).map(|(&a, &b)| a + fd_step * b).collect();
            let minus: Vec<T> = x.iter().zip(t).map(|(&a, &b)| a - fd_step * b).collect();
            let (fp, fm) = (evaluate(&plus), evaluate(&minus));
            fp.iter().zip(&fm).map(|(&a, &b)| (a - b) / (fd_step + fd_step)).collect()
        })
        .collect();
    if columns.is_empty() {
        return Ok(0);
    }
    let rows = columns[0].len();
    let jac: Vec<Vec<T>> = (0..rows).map(|r| columns.iter().map(|col| col[r]).collect()).collect();
    let sv = singular_values(&jac)?;
    // On the unit sphere the differential has norm of order one unless the
    // map is constant, in which case the columns hold only rounding noise.
    let top = sv.first().copied().unwrap_or(T::zero()).max(T::one());
    Ok(sv.iter().filter(|&&s| s > T::lit(RANK_TOL) * top).count())
}

/// Orthonormal basis of the complement of the unit vector `x`.
fn sphere_tangent_basis<T: Real>(x: &[T]) -> Vec<Vec<T>> {
    let dim = x.len();
    let mut basis: Vec<Vec<T>> = vec![x.to_vec()];
    for e in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut v = vec![T::zero(); dim];
        v[e] = T::one();
        for _ in 0..2 {
            for b in &basis {
                let dot: T = v.iter().zip(b).map(|(&p, &q)| p * q).sum();
                v.iter_mut().zip(b).for_each(|(p, &q)| *p -= dot * q);
            }
        }
        let len = v.iter().map(|&p| p * p).sum::<T>().sqrt();
        if len > T::lit(1e-6) {
            basis.push(v.into_iter().map(|p| p / len).collect());
        }
    }
    basis.remove(0);
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::fejer_kernel_coeffs;

    fn measure(pairs: &[(i64, f64)]) -> SpectralMeasure<f64> {
        SpectralMeasure::from_real_pairs(pairs)
    }

    fn poly(pairs: &[(i64, f64)]) -> TrigPolynomial<f64> {
        TrigPolynomial::from_real(pairs.iter().copied())
    }

    fn from_roots(roots: &[Complex<f64>]) -> TrigPolynomial<f64> {
        build_factor(roots.iter().copied(), 1.0)
    }

    #[test]
    fn fejer_kernel_factor() {
        let h = 0.5f64.sqrt();
        let res = fejer_riesz(&measure(&[(-1, 0.5), (0, 1.0), (1, 0.5)])).unwrap();
        assert!(res.canonical.max_coeff_distance(&poly(&[(0, h), (1, h)])) < 1e-8);
        assert!(res.residual <= 1e-8);
        assert_eq!(res.on_circle_pairs(), 1);
    }

    #[test]
    fn trivial_factor() {
        let res = fejer_riesz(&measure(&[(0, 1.0)])).unwrap();
        assert_eq!(res.canonical, poly(&[(0, 1.0)]));
        let all = enumerate_factorizations(&measure(&[(0, 1.0)])).unwrap();
        assert_eq!(all.all_factors.unwrap().len(), 1);
    }

    #[test]
    fn roundtrip_degree_eight() {
        let p0 =
            TrigPolynomial::new((0..=8).map(|k| (k, Complex::new((k as f64 * 1.7).sin(), (k as f64 * 0.3).cos()))));
        let mu = squared_modulus(&p0.normalized());
        let res = fejer_riesz(&mu).unwrap();
        assert!(res.residual <= 1e-8);
        assert!(res.roots.iter().all(|r| r.inner.norm() <= 1.0 + 1e-10));
        let c0 = res.canonical.coeff(0);
        assert!(c0.re > 0.0 && c0.im == 0.0);
    }

    #[test]
    fn negative_density_rejected() {
        let err = fejer_riesz(&measure(&[(-1, 0.9), (0, 1.0), (1, 0.9)])).unwrap_err();
        assert!(matches!(err, Error::NotAMeasure { .. }));
    }

    #[test]
    fn eight_factors_of_generic_cubic() {
        let roots = [Complex::new(0.5, 0.1), Complex::new(-0.3, 0.6), Complex::new(2.0, -1.0)];
        let mu = squared_modulus(&from_roots(&roots));
        let res = enumerate_factorizations(&mu).unwrap();
        let factors = res.all_factors.unwrap();
        assert_eq!(factors.len(), 8);
        for q in &factors {
            let c0 = q.coeff(0);
            assert!(c0.re > 0.0 && c0.im == 0.0);
        }
        assert!(res.factor_residuals.iter().all(|&r| r <= 1e-8));
        // the canonical factor comes first and has its roots inside
        assert!(res.roots.iter().all(|r| r.inner.norm() < 1.0));
    }

    #[test]
    fn on_circle_root_collapses_choices() {
        let res = enumerate_factorizations(&measure(&[(-1, 0.5), (0, 1.0), (1, 0.5)])).unwrap();
        assert_eq!(res.all_factors.unwrap().len(), 1);
        assert_eq!(res.notes.len(), 1);
    }

    #[test]
    fn enumeration_guard() {
        let p = TrigPolynomial::<f64>::uniform(&(0..=21).collect::<Vec<_>>()).normalized();
        let err = enumerate_factorizations(&squared_modulus(&p)).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit(_)));
    }

    #[test]
    fn retrieval_examples() {
        let h = 0.5f64.sqrt();
        let f = FrequencySet::from_elements([0, 2]);
        let mu = measure(&[(-2, 0.5), (0, 1.0), (2, 0.5)]);
        match phase_retrieval_constrained(&mu, &f).unwrap() {
            Retrieval::Found(r) => {
                assert_eq!(r.p.support(), vec![0, 2]);
                assert!(r.p.max_coeff_distance(&poly(&[(0, h), (2, h)])) < 1e-8);
            }
            other => panic!("{other:?}"),
        }

        let f = FrequencySet::from_elements([0, 3]);
        let mu = measure(&[(-1, 0.1), (0, 1.0), (1, 0.1)]);
        assert!(matches!(phase_retrieval_constrained(&mu, &f), Err(Error::InfeasibleBySupport { frequency: -1 })));
    }

    #[test]
    fn retrieval_uses_modulation() {
        let f = FrequencySet::from_elements([5, 6]);
        let mu = measure(&[(-1, 0.5), (0, 1.0), (1, 0.5)]);
        let Retrieval::Found(r) = phase_retrieval_constrained(&mu, &f).unwrap() else { panic!() };
        assert_eq!(r.shift, 5);
        assert_eq!(r.p.support(), vec![5, 6]);
    }

    #[test]
    fn membership_examples() {
        let f = FrequencySet::from_elements([0, 1, 3]);
        let mu = fejer_kernel_coeffs::<f64>(&f, 3).unwrap();
        let Membership::Member(w) = membership_check(&mu, &f).unwrap() else { panic!() };
        let third = (1.0f64 / 3.0).sqrt();
        assert!(w.p.max_coeff_distance(&poly(&[(0, third), (1, third), (3, third)])) < 1e-8);
        assert_eq!(w.p.support(), vec![0, 1, 3]);

        // |(1 + e_1 + e_2)/sqrt3|^2 needs three consecutive frequencies
        let mu = measure(&[(-2, 1.0 / 3.0), (-1, 2.0 / 3.0), (0, 1.0), (1, 2.0 / 3.0), (2, 1.0 / 3.0)]);
        assert!(matches!(membership_check(&mu, &f).unwrap(), Membership::NotMemberWithinSearch { .. }));

        let mu = measure(&[(-2, 0.49), (0, 1.0), (2, 0.49)]);
        assert!(matches!(membership_check(&mu, &f).unwrap(), Membership::Member(_)));

        let g = FrequencySet::from_elements([0, 3]);
        assert!(matches!(membership_check(&mu, &g).unwrap(), Membership::InfeasibleBySupport { frequency: -2 }));
    }

    #[test]
    fn jacobian_rank_examples() {
        let f0 = FrequencySet::from_elements([0]);
        assert_eq!(jacobian_rank(&poly(&[(0, 1.0)]), &f0, 1e-6).unwrap(), 0);

        let f01 = FrequencySet::from_elements([0, 1]);
        let p = TrigPolynomial::new([(0, Complex::new(0.6, 0.2)), (1, Complex::new(-0.3, 0.7))]);
        assert_eq!(jacobian_rank(&p, &f01, 1e-6).unwrap(), 2);

        let f013 = FrequencySet::from_elements([0, 1, 3]);
        let p = TrigPolynomial::new([
            (0, Complex::new(0.6, 0.2)),
            (1, Complex::new(-0.3, 0.7)),
            (3, Complex::new(0.1, -0.4)),
        ]);
        assert_eq!(jacobian_rank(&p, &f013, 1e-6).unwrap(), 4);
        assert!(jacobian_rank(&p, &f01, 1e-6).is_err());
    }
}
