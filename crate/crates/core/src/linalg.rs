//! Small dense kernels: symmetric eigendecomposition, complex Hessenberg QR
//! for polynomial roots, and singular values.
//!
//! Sizes here are at most a few hundred (Lanczos projections, companion
//! matrices of degree-`2d` polynomials, Jacobians of small sets), so the
//! textbook `O(n^3)` algorithms are adequate.

use num_complex::Complex;
use num_traits::{Float, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending.
/// `vectors[k]` is the unit eigenvector for `values[k]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: Vec<Vec<T>>,
}

/// Householder tridiagonalization followed by implicit QL with Wilkinson
/// shifts. Only the lower triangle of `a` is read.
pub fn symmetric_eigen<T: Real>(a: &[Vec<T>]) -> Result<SymmetricEigen<T>> {
    let n = a.len();
    if n == 0 {
        return Ok(SymmetricEigen { values: Vec::new(), vectors: Vec::new() });
    }
    if a.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument("matrix is not square".into()));
    }
    let mut v: Vec<Vec<T>> = (0..n).map(|i| (0..n).map(|j| if j <= i { a[i][j] } else { a[j][i] }).collect()).collect();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tridiagonalize(&mut v, &mut d, &mut e);
    tridiagonal_ql(&mut v, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = order.iter().map(|&k| (0..n).map(|i| v[i][k]).collect()).collect();
    Ok(SymmetricEigen { values, vectors })
}

fn tridiagonalize<T: Real>(v: &mut [Vec<T>], d: &mut [T], e: &mut [T]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[n - 1][j];
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for k in 0..i {
            scale += Float::abs(d[k]);
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = T::zero();
                v[j][i] = T::zero();
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in j + 1..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = T::zero();
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[n - 1][i] = v[i][i];
        v[i][i] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[k][i + 1] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = T::zero();
    }
    v[n - 1][n - 1] = T::one();
    e[0] = T::zero();
}

fn tridiagonal_ql<T: Real>(v: &mut [Vec<T>], d: &mut [T], e: &mut [T]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let eps = T::epsilon();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    for l in 0..n {
        tst1 = tst1.max(Float::abs(d[l]) + Float::abs(e[l]));
        let mut m = l;
        while m < n - 1 && Float::abs(e[m]) > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > 60 {
                    return Err(Error::Numerical("tridiagonal QL did not converge".into()));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (T::lit(2.0) * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for row in v.iter_mut() {
                        let h = row[i + 1];
                        row[i + 1] = s * row[i] + c * h;
                        row[i] = c * row[i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if Float::abs(e[l]) <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    Ok(())
}

/// Singular values (descending) via the eigenvalues of `A^T A`.
/// Relative accuracy is about `sqrt(eps)` for the small ones, which is
/// enough for rank decisions at thresholds well above that.
pub fn singular_values<T: Real>(a: &[Vec<T>]) -> Result<Vec<T>> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let mut gram = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: T = (0..m).map(|r| a[r][i] * a[r][j]).sum();
            gram[i][j] = s;
            gram[j][i] = s;
        }
    }
    let eig = symmetric_eigen(&gram)?;
    Ok(eig.values.iter().rev().map(|&l| l.max(T::zero()).sqrt()).collect())
}

#[inline]
fn cabs1<T: Real>(z: Complex<T>) -> T {
    Float::abs(z.re) + Float::abs(z.im)
}

/// Parlett-Reinsch balancing by powers of two; similarity preserves the
/// spectrum.
pub fn balance<T: Real>(a: &mut [Vec<Complex<T>>]) {
    let n = a.len();
    let two = T::lit(2.0);
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = T::zero();
            let mut r = T::zero();
            for j in 0..n {
                if j != i {
                    c += cabs1(a[j][i]);
                    r += cabs1(a[i][j]);
                }
            }
            if c == T::zero() || r == T::zero() {
                continue;
            }
            let s = c + r;
            let mut f = T::one();
            let mut g = r / two;
            while c < g {
                f *= two;
                c *= two * two;
            }
            g = r * two;
            while c > g {
                f /= two;
                c /= two * two;
            }
            if (c + r) / f < T::lit(0.95) * s {
                done = false;
                let inv = T::one() / f;
                for j in 0..n {
                    a[i][j] *= inv;
                    a[j][i] *= f;
                }
            }
        }
    }
}

/// Eigenvalues of an upper Hessenberg complex matrix by single-shift QR
/// with Givens rotations and Wilkinson shifts.
pub fn hessenberg_eigenvalues<T: Real>(mut h: Vec<Vec<Complex<T>>>) -> Result<Vec<Complex<T>>> {
    let n = h.len();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return Ok(out);
    }
    let eps = T::epsilon();
    let zero = Complex::zero();
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let limit = 60 * n.max(4);
    loop {
        if hi == 0 {
            out.push(h[0][0]);
            break;
        }
        let mut l = hi;
        while l > 0 {
            let scale = cabs1(h[l - 1][l - 1]) + cabs1(h[l][l]);
            if cabs1(h[l][l - 1]) <= eps * scale || h[l][l - 1] == zero {
                h[l][l - 1] = zero;
                break;
            }
            l -= 1;
        }
        if l == hi {
            out.push(h[hi][hi]);
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > limit {
            return Err(Error::Numerical("Hessenberg QR iteration did not converge".into()));
        }

        let a = h[hi - 1][hi - 1];
        let b = h[hi - 1][hi];
        let c = h[hi][hi - 1];
        let d = h[hi][hi];
        let mu = if iter.is_multiple_of(11) {
            // exceptional shift to break cycles
            d + Complex::new(T::lit(0.75) * cabs1(c), T::lit(0.4375) * cabs1(c))
        } else {
            let half = T::lit(0.5);
            let m = (a - d) * half;
            let disc = (m * m + b * c).sqrt();
            let (p, q) = (m + disc, m - disc);
            // eigenvalue of the trailing 2x2 block closest to d
            let denom = if p.norm_sqr() >= q.norm_sqr() { p } else { q };
            if denom == zero {
                d
            } else {
                d - b * c / denom
            }
        };

        for i in l..=hi {
            h[i][i] -= mu;
        }
        let mut rotations = Vec::with_capacity(hi - l);
        for k in l..hi {
            let x = h[k][k];
            let y = h[k + 1][k];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (cr, sr) =
                if r == T::zero() { (Complex::new(T::one(), T::zero()), zero) } else { (x.unscale(r), y.unscale(r)) };
            for j in k..=hi {
                let u = h[k][j];
                let w = h[k + 1][j];
                h[k][j] = cr.conj() * u + sr.conj() * w;
                h[k + 1][j] = -sr * u + cr * w;
            }
            rotations.push((cr, sr));
        }
        for (idx, &(cr, sr)) in rotations.iter().enumerate() {
            let k = l + idx;
            let last = (k + 2).min(hi);
            for i in l..=last {
                let u = h[i][k];
                let w = h[i][k + 1];
                h[i][k] = u * cr + w * sr;
                h[i][k + 1] = -u * sr.conj() + w * cr.conj();
            }
        }
        for i in l..=hi {
            h[i][i] += mu;
        }
    }
    Ok(out)
}

/// Evaluates `sum c[k] z^k` (ascending coefficients) and its derivative.
pub fn horner<T: Real>(c: &[Complex<T>], z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let mut p = Complex::zero();
    let mut dp = Complex::zero();
    for &ck in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + ck;
    }
    (p, dp)
}

/// All complex roots of `sum c[k] z^k`, as eigenvalues of the balanced
/// companion matrix, each refined by a few guarded Newton steps.
pub fn polynomial_roots<T: Real>(c: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    let top = c.iter().rposition(|z| !z.is_zero());
    let Some(top) = top else {
        return Err(Error::InvalidArgument("zero polynomial has no finite root set".into()));
    };
    let c = &c[..=top];
    let zeros_at_origin = c.iter().position(|z| !z.is_zero()).unwrap_or(0);
    let reduced = &c[zeros_at_origin..];
    let n = reduced.len() - 1;
    let mut roots = vec![Complex::zero(); zeros_at_origin];
    if n == 0 {
        return Ok(roots);
    }
    let lead = reduced[n];
    let mut comp = vec![vec![Complex::zero(); n]; n];
    for j in 0..n {
        comp[0][j] = -reduced[n - 1 - j] / lead;
    }
    for i in 1..n {
        comp[i][i - 1] = Complex::new(T::one(), T::zero());
    }
    balance(&mut comp);
    let eig = hessenberg_eigenvalues(comp)?;
    roots.extend(eig.into_iter().map(|z| newton_polish(reduced, z, 4)));
    Ok(roots)
}

/// Newton refinement that only accepts steps reducing `|p(z)|`.
pub fn newton_polish<T: Real>(c: &[Complex<T>], mut z: Complex<T>, steps: usize) -> Complex<T> {
    let (mut pz, mut dpz) = horner(c, z);
    for _ in 0..steps {
        if dpz.is_zero() || pz.is_zero() {
            break;
        }
        let cand = z - pz / dpz;
        let (pc, dpc) = horner(c, cand);
        if pc.norm() < pz.norm() {
            z = cand;
            pz = pc;
            dpz = dpc;
        } else {
            break;
        }
    }
    z
}
