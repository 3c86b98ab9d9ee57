//! Scalar interval arithmetic.
//!
//! Results are widened outward by a relative factor of [`OUTWARD_REL`] after
//! every operation instead of using directed rounding. Enclosures are
//! therefore rigorous up to that margin; an exact zero stays exactly zero.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative outward inflation applied to every computed bound.
pub const OUTWARD_REL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

#[inline]
fn outward(lo: f64, hi: f64) -> Interval {
    Interval {
        lo: lo - OUTWARD_REL * lo.abs(),
        hi: hi + OUTWARD_REL * hi.abs(),
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::InvalidInterval(0));
        }
        Ok(Interval { lo, hi })
    }

    pub const fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Largest absolute value in the interval.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn scale(self, k: f64) -> Interval {
        if k >= 0.0 {
            outward(self.lo * k, self.hi * k)
        } else {
            outward(self.hi * k, self.lo * k)
        }
    }

    pub fn powi(self, n: u32) -> Interval {
        if n == 0 {
            return Interval::point(1.0);
        }
        if n == 1 {
            return self;
        }
        let e = n as i32;
        let (a, b) = (self.lo.powi(e), self.hi.powi(e));
        if n % 2 == 1 || self.lo >= 0.0 {
            outward(a, b)
        } else if self.hi <= 0.0 {
            outward(b, a)
        } else {
            outward(0.0, a.max(b))
        }
    }

    pub fn exp(self) -> Interval {
        outward(self.lo.exp(), self.hi.exp())
    }

    pub fn sin(self) -> Interval {
        if self.width() >= TAU {
            return Interval { lo: -1.0, hi: 1.0 };
        }
        let (a, b) = (self.lo.sin(), self.hi.sin());
        let mut lo = a.min(b);
        let mut hi = a.max(b);
        if hits_lattice(self, FRAC_PI_2, TAU) {
            hi = 1.0;
        }
        if hits_lattice(self, -FRAC_PI_2, TAU) {
            lo = -1.0;
        }
        clamp_unit(outward(lo, hi))
    }

    pub fn cos(self) -> Interval {
        if self.width() >= TAU {
            return Interval { lo: -1.0, hi: 1.0 };
        }
        let (a, b) = (self.lo.cos(), self.hi.cos());
        let mut lo = a.min(b);
        let mut hi = a.max(b);
        if hits_lattice(self, 0.0, TAU) {
            hi = 1.0;
        }
        if hits_lattice(self, PI, TAU) {
            lo = -1.0;
        }
        clamp_unit(outward(lo, hi))
    }

    /// Tangent; fails when the interval reaches a pole.
    pub fn tan(self) -> Result<Interval> {
        if self.width() >= PI || hits_lattice(self, FRAC_PI_2, PI) {
            return Err(Error::domain(format!(
                "tan is unbounded on [{}, {}] (contains a pole)",
                self.lo, self.hi
            )));
        }
        Ok(outward(self.lo.tan(), self.hi.tan()))
    }
}

/// Does `[lo, hi]` contain a point `offset + k * period` for some integer k?
fn hits_lattice(x: Interval, offset: f64, period: f64) -> bool {
    let k = ((x.lo - offset) / period).ceil();
    offset + k * period <= x.hi
}

fn clamp_unit(x: Interval) -> Interval {
    Interval {
        lo: x.lo.max(-1.0),
        hi: x.hi.min(1.0),
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        outward(self.lo + rhs.lo, self.hi + rhs.hi)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        outward(self.lo - rhs.hi, self.hi - rhs.lo)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let p = [self.lo * rhs.lo, self.lo * rhs.hi, self.hi * rhs.lo, self.hi * rhs.hi];
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        outward(lo, hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Interval, lo: f64, hi: f64) -> bool {
        (a.lo - lo).abs() < 1e-9 && (a.hi - hi).abs() < 1e-9 && a.lo <= lo && a.hi >= hi
    }

    #[test]
    fn even_power_uses_power_rule() {
        let x = Interval::new(-1.0, 2.0).unwrap();
        assert!(close(x.powi(2), 0.0, 4.0));
        // naive multiplication would give [-2, 4]
        assert!(close(x * x, -2.0, 4.0));
        assert!(close(Interval::new(-3.0, -2.0).unwrap().powi(2), 4.0, 9.0));
        assert!(close(Interval::new(-2.0, 1.0).unwrap().powi(3), -8.0, 1.0));
    }

    #[test]
    fn sine_over_half_period() {
        let s = Interval::new(0.0, PI).unwrap().sin();
        assert!(s.lo <= 0.0 && s.lo > -1e-9);
        assert_eq!(s.hi, 1.0);
        let s = Interval::new(-0.3, 0.2).unwrap().sin();
        assert!(close(s, (-0.3f64).sin(), 0.2f64.sin()));
        let s = Interval::new(3.0, 3.5).unwrap().sin();
        assert!(close(s, 3.5f64.sin(), 3.0f64.sin()));
    }

    #[test]
    fn cosine_extrema() {
        let c = Interval::new(-1.0, 1.0).unwrap().cos();
        assert_eq!(c.hi, 1.0);
        assert!(close(c, 1f64.cos(), 1.0));
        let c = Interval::new(3.0, 3.3).unwrap().cos();
        assert_eq!(c.lo, -1.0);
        let c = Interval::new(0.0, 10.0).unwrap().cos();
        assert_eq!((c.lo, c.hi), (-1.0, 1.0));
    }

    #[test]
    fn tangent_pole_is_an_error() {
        assert!(Interval::new(1.0, 2.0).unwrap().tan().is_err());
        assert!(Interval::new(-2.0, -1.0).unwrap().tan().is_err());
        let t = Interval::new(-0.5, 1.2).unwrap().tan().unwrap();
        assert!(close(t, (-0.5f64).tan(), 1.2f64.tan()));
    }

    #[test]
    fn zero_stays_exact() {
        let z = Interval::point(0.0);
        let x = Interval::new(-5.0, 7.0).unwrap();
        assert_eq!(z * x, Interval::point(0.0));
        assert_eq!(z + z, Interval::point(0.0));
        assert_eq!(x.scale(0.0), Interval::point(0.0));
    }

    #[test]
    fn rejects_inverted_bounds() {
        assert!(Interval::new(1.0, 0.0).is_err());
        assert!(Interval::new(f64::NAN, 0.0).is_err());
    }
}
