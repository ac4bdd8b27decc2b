//! Truncated Laurent series in pi with exact rational coefficients.
//!
//! A series carries a window [lo, hi]: coefficients outside the window are
//! not stored. `lo` acts as a support floor and `hi` as a precision ceiling;
//! operations compute the window on which the result is exact given exact
//! inputs, following the usual truncated-series rules. Substitution by the
//! Frobenius maps negative powers to series with unbounded principal parts
//! (the annulus expansions); those are truncated at the requested floor and
//! the dropped tails are p-adically small, which the oracle quantifies by
//! recomputing at a deeper window.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt;

#[derive(Clone, PartialEq)]
pub struct LaurentSeries {
    p: u64,
    lo: i64,
    hi: i64,
    coeffs: Vec<BigRational>,
}

impl fmt::Debug for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentSeries[{}..{}](", self.lo, self.hi)?;
        let mut first = true;
        for d in self.lo..=self.hi {
            let c = self.get(d);
            if !c.is_zero() {
                if !first {
                    write!(f, " + ")?;
                }
                write!(f, "({})pi^{}", c, d)?;
                first = false;
                if d - self.lo > 12 {
                    write!(f, " + ...")?;
                    break;
                }
            }
        }
        write!(f, ")")
    }
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// p-adic valuation of a rational; None for zero.
pub fn vp(p: u64, x: &BigRational) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    Some(crate::scalar::vp_rational(x, p))
}

impl LaurentSeries {
    pub fn zero(p: u64, lo: i64, hi: i64) -> Self {
        assert!(lo <= hi, "empty window");
        LaurentSeries {
            p,
            lo,
            hi,
            coeffs: vec![BigRational::zero(); (hi - lo + 1) as usize],
        }
    }

    pub fn monomial(p: u64, c: BigRational, d: i64, lo: i64, hi: i64) -> Self {
        let mut s = Self::zero(p, lo, hi);
        if d >= lo && d <= hi {
            s.set(d, c);
        }
        s
    }

    pub fn one(p: u64, lo: i64, hi: i64) -> Self {
        Self::monomial(p, BigRational::one(), 0, lo, hi)
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn get(&self, d: i64) -> BigRational {
        if d < self.lo || d > self.hi {
            BigRational::zero()
        } else {
            self.coeffs[(d - self.lo) as usize].clone()
        }
    }

    pub fn set(&mut self, d: i64, c: BigRational) {
        assert!(d >= self.lo && d <= self.hi, "degree out of window");
        self.coeffs[(d - self.lo) as usize] = c;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Lowest degree with nonzero coefficient inside the window.
    pub fn valuation(&self) -> Option<i64> {
        (self.lo..=self.hi).find(|&d| !self.get(d).is_zero())
    }

    /// Re-windows to [lo, hi], copying known coefficients and filling with
    /// zeros elsewhere. Only valid when the caller knows the series is
    /// exactly supported on its stored window (or accepts the truncation);
    /// used to keep window-intersection arithmetic from eroding real
    /// coefficients in term accumulations.
    pub fn padded(&self, lo: i64, hi: i64) -> Self {
        let mut out = Self::zero(self.p, lo, hi);
        for d in self.lo.max(lo)..=self.hi.min(hi) {
            out.set(d, self.get(d));
        }
        out
    }

    /// Restricts to a smaller window; an empty overlap yields a zero series
    /// on a single-point window.
    pub fn truncate(&self, lo: i64, hi: i64) -> Self {
        let l = lo.max(self.lo);
        let h = hi.min(self.hi);
        if h < l {
            return Self::zero(self.p, lo.min(hi), lo.min(hi));
        }
        let mut s = Self::zero(self.p, l, h);
        for d in l..=h {
            s.set(d, self.get(d));
        }
        s
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p);
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        let mut s = Self::zero(self.p, lo, hi);
        for d in lo..=hi {
            s.set(d, self.get(d) + other.get(d));
        }
        s
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p);
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        let mut s = Self::zero(self.p, lo, hi);
        for d in lo..=hi {
            s.set(d, self.get(d) - other.get(d));
        }
        s
    }

    pub fn neg(&self) -> Self {
        let mut s = self.clone();
        for c in &mut s.coeffs {
            *c = -c.clone();
        }
        s
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut s = self.clone();
        for x in &mut s.coeffs {
            *x = x.clone() * c;
        }
        s
    }

    /// Multiplication over the full support window [lo1+lo2, hi1+hi2].
    /// Operands are treated as exactly supported on their windows; callers
    /// holding hi-truncated infinite series truncate the result to their
    /// reliable window themselves.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p);
        let lo = self.lo + other.lo;
        let hi = self.hi + other.hi;
        let mut s = Self::zero(self.p, lo, hi);
        for d1 in self.lo..=self.hi {
            let c1 = self.get(d1);
            if c1.is_zero() {
                continue;
            }
            for d2 in other.lo..=other.hi {
                let d = d1 + d2;
                if d < lo || d > hi {
                    continue;
                }
                let c2 = other.get(d2);
                if c2.is_zero() {
                    continue;
                }
                let prev = s.get(d);
                s.set(d, prev + &c1 * c2);
            }
        }
        s
    }

    /// Multiplies by pi^k (window shifts with the series).
    pub fn shift(&self, k: i64) -> Self {
        LaurentSeries {
            p: self.p,
            lo: self.lo + k,
            hi: self.hi + k,
            coeffs: self.coeffs.clone(),
        }
    }

    /// Multiplicative inverse of a series whose lowest stored coefficient is
    /// nonzero: geometric expansion around the leading term.
    pub fn invert(&self) -> Self {
        let v = self.valuation().expect("cannot invert the zero series");
        let c = self.get(v);
        // f = c pi^v (1 + u), u supported in degrees >= 1
        let len = self.hi - v; // number of higher terms available
        let mut u = Self::zero(self.p, 0, len);
        for d in 0..=len {
            u.set(d, self.get(v + d) / &c);
        }
        u.set(0, BigRational::zero());
        // (1 + u)^{-1} = sum (-u)^n, n <= len since u has valuation >= 1
        let mut inv_unit = Self::one(self.p, 0, len);
        let mut pow = Self::one(self.p, 0, len);
        for _ in 0..len.max(0) {
            pow = pow.mul(&u).neg().truncate(0, len);
            if pow.is_zero() {
                break;
            }
            inv_unit = inv_unit.add(&pow);
        }
        let mut out = inv_unit.shift(-v);
        let cinv = c.recip();
        out = out.scale(&cinv);
        out
    }

    /// The minimal p-adic valuation over stored coefficients; None if zero.
    pub fn min_coeff_valuation(&self) -> Option<i64> {
        self.coeffs
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| crate::scalar::vp_rational(c, self.p))
            .min()
    }
}

/// v_p of the difference of two series over the overlap window; None when
/// they agree exactly there.
pub fn agreement_valuation(a: &LaurentSeries, b: &LaurentSeries) -> Option<i64> {
    a.sub(b).min_coeff_valuation()
}
