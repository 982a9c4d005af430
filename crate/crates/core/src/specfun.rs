//! Real-argument Bessel functions of orders 0 and 1, the order-0 spherical
//! Bessel function, and the first-kind Hankel functions built from them.
//!
//! Two branches are used:
//!
//! * `t < ASYMPTOTIC_THRESHOLD`: the ascending power series, summed in
//!   double-double arithmetic. The series terms grow to roughly
//!   `e^t / (2 pi t)` before they cancel, so plain `f64` summation would lose
//!   up to 9 digits at the switchover point; double-double keeps the absolute
//!   error near one ulp of the result.
//! * `t >= ASYMPTOTIC_THRESHOLD`: Hankel's asymptotic expansion
//!   `J = sqrt(2/(pi t)) (P cos w - Q sin w)`, `Y = sqrt(2/(pi t)) (P sin w + Q cos w)`,
//!   truncated once the terms drop below `1e-17`. At `t = 25` the smallest
//!   term of the divergent tail is about `e^-50`, so the truncation is exact
//!   to working precision from the switchover point onward.
//!
//! Both branches agree to ~1e-16 absolute at the seam (see the unit tests).

use std::f64::consts::{FRAC_1_PI, FRAC_1_SQRT_2, FRAC_2_PI, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Arguments at or above this value use the asymptotic expansion.
pub const ASYMPTOTIC_THRESHOLD: f64 = 25.0;

/// Below this argument `sin(t)/t` is replaced by its Taylor polynomial.
pub const SPHERICAL_SERIES_THRESHOLD: f64 = 1e-4;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn check_finite(name: &str, t: f64) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name}: argument {t} is not finite")))
    }
}

fn check_nonnegative(name: &str, t: f64) -> Result<()> {
    check_finite(name, t)?;
    if t < 0.0 {
        return Err(Error::Domain(format!("{name}: argument {t} is negative")));
    }
    Ok(())
}

fn check_positive(name: &str, t: f64) -> Result<()> {
    check_finite(name, t)?;
    if t <= 0.0 {
        return Err(Error::Singularity(format!(
            "{name}: argument {t} is not positive (the function diverges at 0)"
        )));
    }
    Ok(())
}

/// Bessel function of the first kind, order 0.
pub fn bessel_j0(t: f64) -> Result<f64> {
    check_nonnegative("bessel_j0", t)?;
    Ok(j0_j1(t).0)
}

/// Bessel function of the first kind, order 1.
pub fn bessel_j1(t: f64) -> Result<f64> {
    check_nonnegative("bessel_j1", t)?;
    Ok(j0_j1(t).1)
}

/// Bessel function of the second kind, order 0.
pub fn bessel_y0(t: f64) -> Result<f64> {
    check_positive("bessel_y0", t)?;
    Ok(all_orders(t)[2])
}

/// Bessel function of the second kind, order 1.
pub fn bessel_y1(t: f64) -> Result<f64> {
    check_positive("bessel_y1", t)?;
    Ok(all_orders(t)[3])
}

/// `H_0^(1)(t) = J_0(t) + i Y_0(t)`.
pub fn hankel1_0(t: f64) -> Result<Complex64> {
    check_positive("hankel1_0", t)?;
    let [j0, _, y0, _] = all_orders(t);
    Ok(Complex64::new(j0, y0))
}

/// `H_1^(1)(t) = J_1(t) + i Y_1(t)`.
pub fn hankel1_1(t: f64) -> Result<Complex64> {
    check_positive("hankel1_1", t)?;
    let [_, j1, _, y1] = all_orders(t);
    Ok(Complex64::new(j1, y1))
}

/// Spherical Bessel function `j_0(t) = sin(t)/t`, with `j_0(0) = 1`.
pub fn spherical_j0(t: f64) -> Result<f64> {
    check_finite("spherical_j0", t)?;
    Ok(sph_j0(t))
}

/// `(J_0(t), J_1(t))` for `t >= 0`, without argument checks.
#[inline]
pub(crate) fn j0_j1(t: f64) -> (f64, f64) {
    if t < ASYMPTOTIC_THRESHOLD {
        series_j(t)
    } else {
        let [j0, j1, _, _] = asymptotic(t);
        (j0, j1)
    }
}

/// `[J_0, J_1, Y_0, Y_1]` at `t > 0`, without argument checks.
#[inline]
pub(crate) fn all_orders(t: f64) -> [f64; 4] {
    if t < ASYMPTOTIC_THRESHOLD {
        let (j0, j1) = series_j(t);
        let (y0, y1) = series_y(t, j0, j1);
        [j0, j1, y0, y1]
    } else {
        asymptotic(t)
    }
}

#[inline]
pub(crate) fn sph_j0(t: f64) -> f64 {
    if t.abs() < SPHERICAL_SERIES_THRESHOLD {
        let t2 = t * t;
        1.0 - t2 / 6.0 * (1.0 - t2 / 20.0)
    } else {
        t.sin() / t
    }
}

/// Derivative `j_0'(t) = (t cos t - sin t) / t^2`.
#[inline]
pub(crate) fn sph_j0_prime(t: f64) -> f64 {
    if t.abs() < 1.0 {
        // sum_{n>=1} (-1)^n 2n t^(2n-1) / (2n+1)!
        let t2 = t * t;
        let mut term = -t / 3.0;
        let mut sum = term;
        let mut n = 1.0_f64;
        while term.abs() > 1e-18 * sum.abs() {
            // ratio of consecutive terms: -(n+1) t^2 / (n (2n+2)(2n+3))
            term *= -(n + 1.0) * t2 / (n * (2.0 * n + 2.0) * (2.0 * n + 3.0));
            sum += term;
            n += 1.0;
        }
        sum
    } else {
        let (s, c) = t.sin_cos();
        (t * c - s) / (t * t)
    }
}

// ---------------------------------------------------------------------------
// Ascending series in double-double arithmetic.

#[derive(Clone, Copy, Debug)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

impl DoubleDouble {
    const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    #[inline]
    fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }

    #[inline]
    fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        let (hi, lo) = quick_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi));
        Self { hi, lo }
    }

    #[inline]
    fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let (p, e) = two_prod(q1, b);
        let (s, f) = two_sum(self.hi, -p);
        let q2 = (s + (f - e + self.lo)) / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo }
    }

    #[inline]
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

const SERIES_CUTOFF: f64 = 1e-34;
const SERIES_MAX_TERMS: usize = 200;

/// `(h, (t/2)^2)` with the square kept in double-double.
#[inline]
fn half_and_quarter_square(t: f64) -> (f64, DoubleDouble) {
    let h = 0.5 * t;
    let (hi, lo) = two_prod(h, h);
    (h, DoubleDouble { hi, lo })
}

fn series_j(t: f64) -> (f64, f64) {
    let (h, q) = half_and_quarter_square(t);
    let neg_q = q.neg();

    // J0 = sum (-q)^m / (m!)^2 ; J1 = h * sum (-q)^m / (m! (m+1)!)
    let mut a = DoubleDouble::ONE;
    let mut b = DoubleDouble::ONE;
    let mut sa = a;
    let mut sb = b;
    for m in 1..SERIES_MAX_TERMS {
        let mf = m as f64;
        a = a.mul(neg_q).div_f64(mf * mf);
        b = b.mul(neg_q).div_f64(mf * (mf + 1.0));
        sa = sa.add(a);
        sb = sb.add(b);
        if mf > q.hi && a.hi.abs() < SERIES_CUTOFF && b.hi.abs() < SERIES_CUTOFF {
            break;
        }
    }
    (sa.to_f64(), h * sb.to_f64())
}

fn series_y(t: f64, j0: f64, j1: f64) -> (f64, f64) {
    let (h, q) = half_and_quarter_square(t);
    let neg_q = q.neg();

    // Y0 = (2/pi) [ (ln(t/2) + gamma) J0 - sum_{m>=1} H_m (-q)^m / (m!)^2 ]
    // Y1 = (1/pi) [ 2 (ln(t/2) + gamma) J1 - h sum_{m>=0} (H_m + H_{m+1}) (-q)^m / (m! (m+1)!) ] - 2/(pi t)
    let mut a = DoubleDouble::ONE;
    let mut b = DoubleDouble::ONE;
    let mut harmonic = DoubleDouble::ZERO;
    let mut harmonic_next = DoubleDouble::ONE;
    let mut s0 = DoubleDouble::ZERO;
    let mut s1 = b.mul(harmonic.add(harmonic_next));
    for m in 1..SERIES_MAX_TERMS {
        let mf = m as f64;
        a = a.mul(neg_q).div_f64(mf * mf);
        b = b.mul(neg_q).div_f64(mf * (mf + 1.0));
        harmonic = harmonic_next;
        harmonic_next = harmonic_next.add(DoubleDouble::ONE.div_f64(mf + 1.0));
        s0 = s0.add(a.mul(harmonic));
        s1 = s1.add(b.mul(harmonic.add(harmonic_next)));
        if mf > q.hi && a.hi.abs() < SERIES_CUTOFF && b.hi.abs() < SERIES_CUTOFF {
            break;
        }
    }
    let log_term = h.ln() + EULER_GAMMA;
    let y0 = FRAC_2_PI * (log_term * j0 - s0.to_f64());
    let y1 = FRAC_1_PI * (2.0 * log_term * j1 - h * s1.to_f64()) - FRAC_2_PI / t;
    (y0, y1)
}

// ---------------------------------------------------------------------------
// Hankel asymptotic expansion.

const ASYMPTOTIC_CUTOFF: f64 = 1e-17;

/// `(P_nu(t), Q_nu(t))` for `mu = 4 nu^2`.
#[inline]
fn hankel_pq(mu: f64, t: f64) -> (f64, f64) {
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0_f64;
    let eight_t = 8.0 * t;
    for k in 1..64_u32 {
        let odd = f64::from(2 * k - 1);
        let next = a * (mu - odd * odd) / (f64::from(k) * eight_t);
        if next.abs() > a.abs() {
            // divergent tail; unreachable for t >= ASYMPTOTIC_THRESHOLD
            break;
        }
        a = next;
        match k % 4 {
            0 => p += a,
            1 => q += a,
            2 => p -= a,
            _ => q -= a,
        }
        if a.abs() < ASYMPTOTIC_CUTOFF {
            break;
        }
    }
    (p, q)
}

#[inline]
fn asymptotic(t: f64) -> [f64; 4] {
    let (s, c) = t.sin_cos();
    // w0 = t - pi/4 ; w1 = w0 - pi/2
    let cos_w0 = (c + s) * FRAC_1_SQRT_2;
    let sin_w0 = (s - c) * FRAC_1_SQRT_2;
    let amp = (2.0 / (PI * t)).sqrt();
    let (p0, q0) = hankel_pq(0.0, t);
    let (p1, q1) = hankel_pq(4.0, t);
    [
        amp * (p0 * cos_w0 - q0 * sin_w0),
        amp * (p1 * sin_w0 + q1 * cos_w0),
        amp * (p0 * sin_w0 + q0 * cos_w0),
        amp * (q1 * sin_w0 - p1 * cos_w0),
    ]
}
