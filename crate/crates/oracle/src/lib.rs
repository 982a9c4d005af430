//! Reference values of `J0, J1, Y0, Y1` and `sin(t)/t`, computed in
//! multi-precision arithmetic and rounded once to `f64`.
//!
//! Small arguments use the ascending power series with enough guard bits to
//! absorb the cancellation; large arguments use the Hankel asymptotic
//! expansion summed to its smallest term, which is far below `f64`
//! resolution past [`ASYMPTOTIC_FROM`].

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

const RM: RoundingMode = RoundingMode::ToEven;
const PREC: usize = 384;
pub const ASYMPTOTIC_FROM: f64 = 40.0;
const EULER_GAMMA: &str = "0.57721566490153286060651209008240243104215933593992359880576723488486772677766467";

pub struct Oracle {
    cc: Consts,
    pi: BigFloat,
    gamma: BigFloat,
}

/// The four cylinder functions at one argument.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cylinder {
    pub j0: f64,
    pub j1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Default for Oracle {
    fn default() -> Self {
        Self::new()
    }
}

impl Oracle {
    pub fn new() -> Self {
        let mut cc = Consts::new().expect("constant cache");
        let pi = cc.pi(PREC, RM);
        let gamma = BigFloat::parse(EULER_GAMMA, Radix::Dec, PREC, RM, &mut cc);
        Self { cc, pi, gamma }
    }

    fn narrow(&mut self, x: &BigFloat) -> f64 {
        if x.is_zero() {
            return 0.0;
        }
        x.format(Radix::Dec, RM, &mut self.cc)
            .expect("formatting a finite value")
            .parse()
            .expect("decimal output parses as f64")
    }

    fn num(v: f64) -> BigFloat {
        BigFloat::from_f64(v, PREC)
    }

    /// `J0, J1, Y0, Y1` at `t > 0`.
    pub fn cylinder(&mut self, t: f64) -> Cylinder {
        assert!(t > 0.0 && t.is_finite(), "oracle argument must be positive, got {t}");
        let [j0, j1, y0, y1] = if t < ASYMPTOTIC_FROM {
            self.series(t)
        } else {
            let (j0, y0) = self.hankel(0, t);
            let (j1, y1) = self.hankel(1, t);
            [j0, j1, y0, y1]
        };
        Cylinder {
            j0: self.narrow(&j0),
            j1: self.narrow(&j1),
            y0: self.narrow(&y0),
            y1: self.narrow(&y1),
        }
    }

    /// `sin(t)/t`, with the value 1 at the origin.
    pub fn spherical_j0(&mut self, t: f64) -> f64 {
        if t == 0.0 {
            return 1.0;
        }
        let x = Self::num(t);
        let s = x.sin(PREC, RM, &mut self.cc).div(&x, PREC, RM);
        self.narrow(&s)
    }

    /// The power-series branch at any `t > 0`, for checking the seam.
    #[doc(hidden)]
    pub fn series_for_test(&mut self, t: f64) -> Cylinder {
        let [j0, j1, y0, y1] = self.series(t);
        Cylinder {
            j0: self.narrow(&j0),
            j1: self.narrow(&j1),
            y0: self.narrow(&y0),
            y1: self.narrow(&y1),
        }
    }

    fn series(&mut self, t: f64) -> [BigFloat; 4] {
        let x = Self::num(t);
        let half = x.div(&Self::num(2.0), PREC, RM);
        let q = half.mul(&half, PREC, RM).neg(); // -(t/2)^2
        let tiny = -(PREC as i32) - 8;

        // term_m = (-1)^m (t/2)^(2m) / (m!)^2 and the J1 analogue with
        // (t/2)^(2m+1) / (m! (m+1)!); harmonic numbers H_m ride along.
        let mut a = Self::num(1.0);
        let mut b = half.clone();
        let mut h = Self::num(0.0);
        let mut j0 = a.clone();
        let mut j1 = b.clone();
        let mut s0 = Self::num(0.0); // sum_{m>=1} (-1)^(m+1) H_m (t^2/4)^m/(m!)^2
        let mut s1 = b.mul(&Self::num(1.0).sub(&self.gamma.mul(&Self::num(2.0), PREC, RM), PREC, RM), PREC, RM);
        let mut m = 1u64;
        loop {
            let mf = Self::num(m as f64);
            a = a.mul(&q, PREC, RM).div(&mf.mul(&mf, PREC, RM), PREC, RM);
            b = b.mul(&q, PREC, RM).div(&mf.mul(&Self::num((m + 1) as f64), PREC, RM), PREC, RM);
            h = h.add(&Self::num(1.0).div(&mf, PREC, RM), PREC, RM);
            let h_next = h.add(&Self::num(1.0).div(&Self::num((m + 1) as f64), PREC, RM), PREC, RM);
            j0 = j0.add(&a, PREC, RM);
            j1 = j1.add(&b, PREC, RM);
            s0 = s0.sub(&a.mul(&h, PREC, RM), PREC, RM);
            let psi_sum = h.add(&h_next, PREC, RM).sub(&self.gamma.mul(&Self::num(2.0), PREC, RM), PREC, RM);
            s1 = s1.add(&b.mul(&psi_sum, PREC, RM), PREC, RM);
            m += 1;
            let small = |v: &BigFloat| v.is_zero() || v.exponent().is_some_and(|e| e < tiny);
            if m > 8 && small(&a) && small(&b) {
                break;
            }
        }
        let two_over_pi = Self::num(2.0).div(&self.pi, PREC, RM);
        let log_term = half.ln(PREC, RM, &mut self.cc);
        let y0 = two_over_pi.mul(
            &log_term.add(&self.gamma, PREC, RM).mul(&j0, PREC, RM).add(&s0, PREC, RM),
            PREC,
            RM,
        );
        let y1 = two_over_pi
            .mul(&j1, PREC, RM)
            .mul(&log_term, PREC, RM)
            .sub(&two_over_pi.div(&x, PREC, RM), PREC, RM)
            .sub(&s1.div(&self.pi, PREC, RM), PREC, RM);
        [j0, j1, y0, y1]
    }

    /// `(J_n, Y_n)` from `sqrt(2/(pi t)) (P cos chi -/+ Q sin chi)`.
    fn hankel(&mut self, n: u32, t: f64) -> (BigFloat, BigFloat) {
        let x = Self::num(t);
        let mu = Self::num((4 * n * n) as f64);
        let eight_x = x.mul(&Self::num(8.0), PREC, RM);
        let mut p = Self::num(1.0);
        let mut q = Self::num(0.0);
        let mut term = Self::num(1.0);
        let mut last_exp = i32::MAX;
        for k in 1..10_000u32 {
            let odd = Self::num(((2 * k - 1) * (2 * k - 1)) as f64);
            term = term
                .mul(&mu.sub(&odd, PREC, RM), PREC, RM)
                .div(&eight_x.mul(&Self::num(k as f64), PREC, RM), PREC, RM);
            if term.is_zero() {
                break;
            }
            let e = term.exponent().expect("finite term");
            if e >= last_exp || e < -(PREC as i32) - 8 {
                break;
            }
            last_exp = e;
            let signed = if (k / 2) % 2 == 1 { term.neg() } else { term.clone() };
            if k % 2 == 0 {
                p = p.add(&signed, PREC, RM);
            } else {
                q = q.add(&signed, PREC, RM);
            }
        }
        let phase = Self::num(0.5 * n as f64 + 0.25).mul(&self.pi, PREC, RM);
        let chi = x.sub(&phase, PREC, RM);
        let (s, c) = (chi.sin(PREC, RM, &mut self.cc), chi.cos(PREC, RM, &mut self.cc));
        let amp = Self::num(2.0)
            .div(&self.pi.mul(&x, PREC, RM), PREC, RM)
            .sqrt(PREC, RM);
        let j = amp.mul(&p.mul(&c, PREC, RM).sub(&q.mul(&s, PREC, RM), PREC, RM), PREC, RM);
        let y = amp.mul(&p.mul(&s, PREC, RM).add(&q.mul(&c, PREC, RM), PREC, RM), PREC, RM);
        (j, y)
    }
}
