//! Minimal double-double arithmetic (~31 significant digits).
//!
//! The root-equation diagnostics compare quantities whose true differences
//! sit far below the f64 roundoff of the values themselves (for example the
//! truncation error of the asymptotic root expansion at large argument, or
//! the effective-ε extracted from two nearly equal bounds). This module
//! provides just enough extended precision to make those comparisons
//! meaningful: the four operations, square and n-th roots, integer powers,
//! and a Newton refiner for the binomial root equation.
//!
//! Classic error-free transformations (Dekker/Knuth); no FMA assumed.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
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
    const SPLITTER: f64 = 134217729.0; // 2^27 + 1
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ahi, alo) = split(a);
    let (bhi, blo) = split(b);
    (p, ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const PI: Dd = Dd {
        hi: std::f64::consts::PI,
        lo: 1.2246467991473532e-16,
    };
    pub const TWO_PI: Dd = Dd {
        hi: std::f64::consts::TAU,
        lo: 2.4492935982947064e-16,
    };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact conversion for integers below ~2^106.
    pub fn from_u128(x: u128) -> Dd {
        let hi = x as f64;
        let r = x as i128 - hi as i128;
        let (s, e) = two_sum(hi, r as f64);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn powi(self, e: u32) -> Dd {
        let mut result = Dd::ONE;
        let mut base = self;
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result * base;
            }
            base = base * base;
            e >>= 1;
        }
        result
    }

    pub fn sqrt(self) -> Dd {
        assert!(self.hi >= 0.0, "dd sqrt of negative");
        if self.hi == 0.0 {
            return Dd::ZERO;
        }
        let mut y = Dd::from_f64(self.hi.sqrt());
        for _ in 0..2 {
            y = (y + self / y) * 0.5;
        }
        y
    }

    /// Positive n-th root by Newton iteration from an f64 seed.
    pub fn nth_root(self, n: u32) -> Dd {
        assert!(self.hi > 0.0 && n >= 1, "dd nth_root needs x > 0, n >= 1");
        if n == 1 {
            return self;
        }
        let mut y = Dd::from_f64(self.to_f64().powf(1.0 / n as f64));
        for _ in 0..3 {
            let num = y.powi(n) - self;
            let den = y.powi(n - 1) * n as f64;
            y = y - num / den;
        }
        y
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let (hi, lo) = quick_two_sum(p1, p2 + self.hi * b.lo + self.lo * b.hi);
        Dd { hi, lo }
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    fn mul(self, b: f64) -> Dd {
        let (p1, p2) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p1, p2 + self.lo * b);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * q1;
        let q2 = r.hi / b.hi;
        let r = r - b * q2;
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }
}

impl Div<f64> for Dd {
    type Output = Dd;
    fn div(self, b: f64) -> Dd {
        self / Dd::from_f64(b)
    }
}

/// Unit-ball volume `ω_n` by the recurrence `ω_n = 2π/n · ω_{n-2}`, in
/// double-double.
pub fn unit_ball_volume_dd(n: usize) -> Dd {
    assert!(n >= 1);
    let mut k = if n % 2 == 0 { 2 } else { 1 };
    let mut omega = if n % 2 == 0 {
        Dd::PI
    } else {
        Dd::from_f64(2.0)
    };
    while k < n {
        k += 2;
        omega = omega * Dd::TWO_PI / k as f64;
    }
    omega
}

/// Exact binomial coefficient, valid for `p <= 64`.
fn binomial_u128(p: u32, j: u32) -> u128 {
    let mut c: u128 = 1;
    for i in 0..j {
        c = c * (p - i) as u128 / (i + 1) as u128;
    }
    c
}

/// `(t+1)^p - t^p = Σ_{j<p} C(p,j) t^j` evaluated in double-double.
pub fn binomial_diff_dd(t: Dd, p: u32) -> Dd {
    assert!((1..=64).contains(&p));
    let mut acc = Dd::from_u128(binomial_u128(p, p - 1));
    for j in (0..p - 1).rev() {
        acc = acc * t + Dd::from_u128(binomial_u128(p, j));
    }
    acc
}

fn binomial_diff_deriv_dd(t: Dd, p: u32) -> Dd {
    let mut acc = Dd::from_u128((p - 1) as u128 * binomial_u128(p, p - 1));
    for j in (1..p - 1).rev() {
        acc = acc * t + Dd::from_u128(j as u128 * binomial_u128(p, j));
    }
    acc
}

/// Refines a root of `(t+1)^p - t^p = rhs` to double-double accuracy from an
/// f64-accurate seed.
pub fn refine_binomial_root(p: u32, rhs: Dd, seed: f64) -> Dd {
    assert!((2..=64).contains(&p));
    let mut t = Dd::from_f64(seed.max(0.0));
    for _ in 0..4 {
        let f = binomial_diff_dd(t, p) - rhs;
        let df = binomial_diff_deriv_dd(t, p);
        t = t - f / df;
        if t.hi < 0.0 {
            t = Dd::ZERO;
        }
    }
    t
}
