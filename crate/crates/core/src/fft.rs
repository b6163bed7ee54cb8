//! FFT building blocks: exact pair counting, autocorrelation, uniform-grid
//! evaluation of trigonometric polynomials and the chirp-z transform.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Counts are recovered from a floating point convolution and must land
/// this close to an integer.
pub const COUNT_ROUNDING_TOL: f64 = 1e-6;

/// Smallest power of two `>= n`.
pub fn fft_len(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

/// Smallest `2^a 3^b 5^c >= n`. Never larger than [`fft_len`].
pub fn smooth_len(n: usize) -> usize {
    let n = n.max(1);
    let mut best = fft_len(n);
    let mut p5 = 1;
    while p5 < best {
        let mut p35 = p5;
        while p35 < best {
            let mut m = p35;
            while m < n {
                m *= 2;
            }
            best = best.min(m);
            p35 *= 3;
        }
        p5 *= 5;
    }
    best
}

/// `counts[k] = #{(a, b) in S x S : a - b = k}` for `k = 0 ..= max S - min S`.
/// Negative lags follow from symmetry.
pub fn pair_counts(sorted: &[i64]) -> Result<Vec<u64>> {
    let (Some(&first), Some(&last)) = (sorted.first(), sorted.last()) else {
        return Ok(Vec::new());
    };
    let span = (last - first) as usize + 1;
    let m = fft_len(2 * span);
    let mut buf = vec![Complex::new(0.0f64, 0.0); m];
    for &n in sorted {
        buf[(n - first) as usize].re += 1.0;
    }
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(m).process(&mut buf);
    for z in buf.iter_mut() {
        *z = Complex::new(z.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    buf[..span]
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let x = z.re * scale;
            let r = x.round();
            if (x - r).abs() > COUNT_ROUNDING_TOL || r < 0.0 {
                Err(Error::Numerical(format!("pair count at lag {k} is {x}, not an integer")))
            } else {
                Ok(r as u64)
            }
        })
        .collect()
}

/// Linear autocorrelation `r[k] = sum_j c[j + k] conj(c[j])` for
/// `k = -(n-1) ..= n-1`, returned with lag `-(n-1)` first.
pub fn autocorrelate<T: Real>(c: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = c.len();
    if n == 0 {
        return Vec::new();
    }
    if n <= 64 {
        let mut out = vec![Complex::new(T::zero(), T::zero()); 2 * n - 1];
        for k in 0..n {
            let mut acc = Complex::new(T::zero(), T::zero());
            for j in 0..n - k {
                acc += c[j + k] * c[j].conj();
            }
            out[n - 1 + k] = acc;
            out[n - 1 - k] = acc.conj();
        }
        return out;
    }
    let m = fft_len(2 * n);
    let mut buf = vec![Complex::new(T::zero(), T::zero()); m];
    buf[..n].copy_from_slice(c);
    let mut planner = FftPlanner::<T>::new();
    planner.plan_fft_forward(m).process(&mut buf);
    for z in buf.iter_mut() {
        *z = Complex::new(z.norm_sqr(), T::zero());
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    let scale = T::one() / T::from_usize_lossy(m);
    let mut out = vec![Complex::new(T::zero(), T::zero()); 2 * n - 1];
    out[n - 1] = buf[0] * scale;
    for k in 1..n {
        out[n - 1 + k] = buf[k] * scale;
        out[n - 1 - k] = buf[m - k] * scale;
    }
    out
}

/// Values of `sum_{k=-d}^{d} a[k + d] e^{2 pi i k x}` at `x = j / n`,
/// `j = 0 .. n`. Frequencies alias modulo `n`, which is exact on the grid.
pub fn eval_on_grid<T: Real>(centered: &[Complex<T>], n: usize) -> Vec<Complex<T>> {
    assert!(n > 0 && centered.len() % 2 == 1);
    let d = (centered.len() / 2) as i64;
    let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
    for (i, &a) in centered.iter().enumerate() {
        let k = i as i64 - d;
        buf[k.rem_euclid(n as i64) as usize] += a;
    }
    FftPlanner::<T>::new().plan_fft_inverse(n).process(&mut buf);
    buf
}

#[inline]
fn cis_f64<T: Real>(turns: f64) -> Complex<T> {
    let t = turns - turns.floor();
    let a = std::f64::consts::TAU * t;
    Complex::new(T::lit(a.cos()), T::lit(a.sin()))
}

/// Chirp-z evaluation of `sum_{n=0}^{L-1} a[n] e^{2 pi i n (x0 + m step)}`
/// for `m = 0 .. count`. Phases are reduced in `f64`.
pub fn chirp_eval<T: Real>(a: &[Complex<T>], x0: f64, step: f64, count: usize) -> Vec<Complex<T>> {
    let l = a.len();
    if l == 0 || count == 0 {
        return vec![Complex::new(T::zero(), T::zero()); count];
    }
    // n m = (n^2 + m^2 - (m - n)^2) / 2
    let half_sq = |k: i64| -> f64 {
        // exact while k^2 < 2^53
        let k = k.unsigned_abs() as f64;
        k * k * 0.5
    };
    let m_len = fft_len(l + count - 1);
    let mut u = vec![Complex::new(T::zero(), T::zero()); m_len];
    for (n, &an) in a.iter().enumerate() {
        let phase = n as f64 * x0 + step * half_sq(n as i64);
        u[n] = an * cis_f64::<T>(phase);
    }
    // kernel v[t] = w^{-t^2/2}, t in [-(l-1), count-1], stored circularly
    let mut v = vec![Complex::new(T::zero(), T::zero()); m_len];
    for t in -(l as i64 - 1)..count as i64 {
        v[t.rem_euclid(m_len as i64) as usize] = cis_f64::<T>(-step * half_sq(t));
    }
    let mut planner = FftPlanner::<T>::new();
    let fwd = planner.plan_fft_forward(m_len);
    fwd.process(&mut u);
    fwd.process(&mut v);
    for (x, y) in u.iter_mut().zip(&v) {
        *x *= *y;
    }
    planner.plan_fft_inverse(m_len).process(&mut u);
    let scale = T::one() / T::from_usize_lossy(m_len);
    (0..count).map(|m| u[m] * scale * cis_f64::<T>(step * half_sq(m as i64))).collect()
}
