//! Operators on truncated Laurent series: Frobenius, the gamma action,
//! the differential, the trace operator psi, logarithm series and residues.

use super::series::{rat_int, LaurentSeries};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Binomial coefficient C(a, k) for rational a.
fn binom(a: &BigRational, k: u64) -> BigRational {
    let mut acc = BigRational::one();
    for i in 0..k {
        acc = acc * (a - BigRational::from_integer(BigInt::from(i))) / BigRational::from_integer(BigInt::from(i + 1));
    }
    acc
}

/// (1 + pi)^a - 1 as a series on [1, hi]; finite when a is a nonnegative
/// integer, binomial expansion otherwise.
pub fn one_plus_pi_pow_minus_one(p: u64, a: &BigRational, hi: i64) -> LaurentSeries {
    use num_traits::{Signed, ToPrimitive};
    // nonnegative integer exponents give a polynomial; keep its window tight
    // so downstream multiplications stay sparse
    let eff_hi = if a.is_integer() && !a.numer().is_negative() {
        a.to_integer().to_i64().map(|v| v.min(hi)).unwrap_or(hi).max(1)
    } else {
        hi.max(1)
    };
    let mut s = LaurentSeries::zero(p, 1, eff_hi);
    for k in 1..=eff_hi {
        s.set(k, binom(a, k as u64));
    }
    s
}

/// phi(pi) = (1 + pi)^p - 1, a polynomial of degree p.
pub fn phi_pi(p: u64, hi: i64) -> LaurentSeries {
    one_plus_pi_pow_minus_one(p, &rat_int(p as i64), hi.max(p as i64))
}

/// The annulus expansion of phi(pi)^{-1} on [lo, hi]: writing
/// phi(pi) = pi^p (1 + p w) with w supported on [1-p, -1], invert by the
/// p-adically convergent geometric series. Coefficients inside the window
/// are exact; the principal part continues below lo with p-adically small
/// coefficients.
pub fn phi_pi_inv(p: u64, lo: i64, hi: i64) -> LaurentSeries {
    let pp = p as i64;
    let phip = phi_pi(p, pp);
    // w = (phi(pi) - pi^p) / (p pi^p), supported on [1-p, -1]
    let mut w = LaurentSeries::zero(p, 1 - pp, -1);
    for d in 1..pp {
        w.set(d - pp, phip.get(d) / rat_int(p as i64));
    }
    // (1 + p w)^{-1} = sum (-p w)^n; (w^n) has degrees in [n(1-p), -n]
    let work_lo = lo + pp; // account for the final pi^{-p} shift
    let work_hi = hi + pp;
    let mut acc = LaurentSeries::one(p, work_lo.min(0), work_hi.max(0));
    let mut pow = LaurentSeries::one(p, work_lo.min(0), work_hi.max(0));
    let minus_pw = w.scale(&rat_int(-(p as i64)));
    let mut n = 0i64;
    loop {
        n += 1;
        if -n < work_lo {
            break;
        }
        pow = pow.mul(&minus_pw).truncate(work_lo.min(0), work_hi.max(0));
        // re-window to keep degrees we still need
        let mut padded = LaurentSeries::zero(p, work_lo.min(0), work_hi.max(0));
        for d in pow.lo().max(work_lo.min(0))..=pow.hi().min(work_hi.max(0)) {
            padded.set(d, pow.get(d));
        }
        pow = padded;
        if pow.is_zero() {
            break;
        }
        acc = acc.add(&pow);
    }
    acc.shift(-pp).truncate(lo, hi)
}

/// phi(pi)^k for any integer k, on the window [lo, hi].
pub fn phi_pi_pow(p: u64, k: i64, lo: i64, hi: i64) -> LaurentSeries {
    if k == 0 {
        return LaurentSeries::one(p, lo, hi);
    }
    if k > 0 {
        let base = phi_pi(p, hi.max(p as i64));
        let mut acc = LaurentSeries::one(p, 0, hi.max(1));
        for _ in 0..k {
            acc = acc.mul(&base).truncate(0.min(lo), hi);
        }
        return acc.truncate(lo, hi);
    }
    let inv = phi_pi_inv(p, lo - 1, hi.max(0) + 1);
    let mut acc = LaurentSeries::one(p, lo - 1, hi.max(0) + 1);
    for _ in 0..(-k) {
        acc = acc.mul(&inv).truncate(lo - 1, hi.max(0) + 1);
    }
    acc.truncate(lo, hi)
}

/// base^e on a working window, by square and multiply; `base_inv` supplies
/// the expansion of base^{-1} when e < 0.
pub(crate) fn series_pow(
    base: &LaurentSeries,
    base_inv: Option<&LaurentSeries>,
    e: i64,
    lo: i64,
    hi: i64,
) -> LaurentSeries {
    let p = base.prime();
    if e == 0 {
        return LaurentSeries::one(p, lo, hi);
    }
    // For negative exponents the inverse is an hi-truncated infinite
    // series; each squaring erodes the trustworthy top by the valuation of
    // the factors, so the working ceiling carries |e| degrees of headroom.
    let work_hi = hi + e.unsigned_abs() as i64 + 2;
    let b = if e > 0 {
        base.padded(lo - 1, work_hi)
    } else {
        base_inv
            .expect("negative exponent needs an inverse")
            .padded(lo - 1, work_hi)
    };
    let mut exp = e.unsigned_abs();
    let mut acc = LaurentSeries::one(p, lo - 1, work_hi);
    let mut sq = b;
    loop {
        if exp & 1 == 1 {
            acc = acc.mul(&sq).padded(lo - 1, work_hi);
        }
        exp >>= 1;
        if exp == 0 {
            break;
        }
        sq = sq.mul(&sq).padded(lo - 1, work_hi);
    }
    acc.padded(lo, hi)
}

/// Substitution f(pi) -> f(x(pi)): the nonnegative part by a Horner scheme
/// in the sparse polynomial x, the principal part by sequential powers of
/// the inverse expansion. Sequential inverse powers stay exact on the
/// window because a series supported in negative degrees only pulls
/// coefficients from higher degrees.
fn substitute(
    f: &LaurentSeries,
    x: &LaurentSeries,
    x_inv: Option<&LaurentSeries>,
    lo: i64,
    hi: i64,
) -> LaurentSeries {
    let p = f.prime();
    let mut acc = LaurentSeries::zero(p, lo, hi);
    if f.lo() <= 0 && f.hi() >= 0 {
        acc = acc.add(&LaurentSeries::monomial(p, f.get(0), 0, lo, hi));
    }
    if f.hi() > 0 {
        // Horner from the top: h = sum_{k >= 1} f_k x^{k-1}, then h * x
        let work_hi = hi.max(1) + 1;
        let mut h = LaurentSeries::zero(p, 0, work_hi);
        for k in (1..=f.hi()).rev() {
            if k < f.hi() {
                h = h.mul(x).padded(0, work_hi);
            }
            let c = f.get(k);
            if !c.is_zero() {
                let prev = h.get(0);
                h.set(0, prev + c);
            }
        }
        acc = acc.add(&h.mul(x).padded(lo, hi));
    }
    if f.lo() < 0 {
        let inv = x_inv.expect("principal part needs an inverse expansion");
        let mut pow = LaurentSeries::one(p, lo - 1, hi + 1);
        for k in 1..=(-f.lo()) {
            pow = pow.mul(inv).padded(lo - 1, hi + 1);
            let c = f.get(-k);
            if !c.is_zero() {
                acc = acc.add(&pow.scale(&c).padded(lo, hi));
            }
        }
    }
    acc
}

/// Frobenius substitution pi -> (1+pi)^p - 1. The output covers the full
/// image support [lo, p * hi]; for an exactly supported input every stored
/// coefficient is exact apart from the p-adically small truncated tails
/// below `lo` created by negative powers. When the input is itself
/// hi-truncated, only degrees up to f.hi() are reliable and the caller
/// truncates.
pub fn phi_act(f: &LaurentSeries, lo: i64) -> LaurentSeries {
    let p = f.prime();
    let hi = if f.hi() >= 0 { f.hi() * p as i64 } else { f.hi() };
    let base = phi_pi(p, p as i64);
    let inv;
    let inv_ref = if f.lo() < 0 {
        inv = phi_pi_inv(p, lo - 1, hi + 1);
        Some(&inv)
    } else {
        None
    };
    substitute(f, &base, inv_ref, lo, hi)
}

/// The gamma action pi -> (1+pi)^a - 1 for a in Z_p^* given as a rational.
/// Tail-free: negative powers have finite principal parts.
pub fn gamma_act(f: &LaurentSeries, a: &BigRational, lo_hint: i64) -> LaurentSeries {
    let p = f.prime();
    let hi = f.hi();
    let lo = f.lo().min(lo_hint);
    let g = one_plus_pi_pow_minus_one(p, a, hi - lo.min(0) + 2);
    let inv;
    let inv_ref = if f.lo() < 0 {
        // pad the (possibly tight polynomial) window before inverting so
        // the geometric expansion reaches the degrees we need
        inv = g.padded(1, hi - lo + 2).invert().padded(lo - 1, hi + 1);
        Some(&inv)
    } else {
        None
    };
    substitute(f, &g, inv_ref, lo, hi)
}

/// The differential operator (1 + pi) d/dpi.
pub fn partial(f: &LaurentSeries) -> LaurentSeries {
    let p = f.prime();
    let lo = f.lo() - 1;
    let hi = f.hi() - 1;
    let mut out = LaurentSeries::zero(p, lo, hi);
    for d in lo..=hi {
        // coefficient of pi^d in f' + pi f': (d+1) f_{d+1} + d f_d
        let mut c = f.get(d + 1) * rat_int(d + 1);
        c = c + f.get(d) * rat_int(d);
        out.set(d, c);
    }
    out
}

/// t = log(1 + pi) on [1, hi].
pub fn t_series(p: u64, hi: i64) -> LaurentSeries {
    let mut s = LaurentSeries::zero(p, 1, hi.max(1));
    for k in 1..=hi.max(1) {
        let sign = if k % 2 == 1 { 1 } else { -1 };
        s.set(k, BigRational::new(BigInt::from(sign), BigInt::from(k)));
    }
    s
}

/// t^j for any integer j, on [j, hi].
pub fn t_pow(p: u64, j: i64, hi: i64) -> LaurentSeries {
    let span = (hi - j).max(1) + 2;
    let t = t_series(p, span);
    if j == 0 {
        return LaurentSeries::one(p, 0, hi);
    }
    if j > 0 {
        let mut acc = LaurentSeries::one(p, 0, span);
        for _ in 0..j {
            acc = acc.mul(&t);
        }
        return acc.truncate(j, hi);
    }
    let tinv = t.invert();
    let mut acc = LaurentSeries::one(p, tinv.lo(), tinv.hi());
    for _ in 0..(-j) {
        acc = acc.mul(&tinv);
    }
    acc.truncate(j, hi)
}

/// log of a 1-unit series: f = 1 + g with g supported away from degree 0 in
/// one direction (positive degrees, or negative degrees with p-divisible
/// coefficients); the alternating series is degree-wise finite in both
/// cases.
pub fn log_one_plus(g: &LaurentSeries, lo: i64, hi: i64) -> LaurentSeries {
    let p = g.prime();
    let mut acc = LaurentSeries::zero(p, lo, hi);
    let mut pow = LaurentSeries::one(p, lo.min(0), hi.max(0));
    let mut n = 0i64;
    loop {
        n += 1;
        pow = pow.mul(g);
        let mut repad = LaurentSeries::zero(p, lo.min(0), hi.max(0));
        for d in pow.lo().max(lo.min(0))..=pow.hi().min(hi.max(0)) {
            repad.set(d, pow.get(d));
        }
        pow = repad;
        if pow.is_zero() {
            break;
        }
        let sign = if n % 2 == 1 { 1 } else { -1 };
        let term = pow.scale(&BigRational::new(BigInt::from(sign), BigInt::from(n)));
        acc = acc.add(&term.truncate(lo, hi));
        // termination: g supported >= 1 pushes pow's valuation up; g
        // supported <= -1 pushes its top degree down
        if n > (hi - lo) + 4 {
            break;
        }
    }
    acc
}

/// ell(pi) = (1/p) log(pi^p / phi(pi)): supported on negative degrees, with
/// exact coefficients inside the window.
pub fn ell_pi(p: u64, lo: i64) -> LaurentSeries {
    let pp = p as i64;
    let phip = phi_pi(p, pp);
    // pi^p/phi(pi) = 1/(1 + p w): log = -log(1 + p w)
    let mut pw = LaurentSeries::zero(p, 1 - pp, -1);
    for d in 1..pp {
        pw.set(d - pp, phip.get(d));
    }
    let l = log_one_plus(&pw, lo, -1);
    l.neg().scale(&BigRational::new(BigInt::one(), BigInt::from(p)))
}

/// res(f dt) = the pi^{-1} coefficient of f/(1+pi); exact when f is fully
/// known below its window floor (finite principal part).
pub fn residue(f: &LaurentSeries) -> BigRational {
    let mut acc = BigRational::zero();
    // 1/(1+pi) = sum (-pi)^k: coefficient of pi^{-1} in the product picks
    // f_j (-1)^{-1-j} for j <= -1
    let mut d = -1i64;
    while d >= f.lo() {
        let c = f.get(d);
        if !c.is_zero() {
            let sign = if (-1 - d) % 2 == 0 { 1 } else { -1 };
            acc += c * rat_int(sign);
        }
        d -= 1;
    }
    acc
}

/// Power sums of the roots of (1+X)^p - (1+V) as Laurent polynomials in V,
/// for exponents in [kmin, kmax]; used by the trace operator.
fn power_sums(p: u64, kmin: i64, kmax: i64) -> std::collections::BTreeMap<i64, LaurentSeries> {
    use std::collections::BTreeMap;
    let pp = p as i64;
    // P(X) = X^p + sum_{i=1}^{p-1} C(p,i) X^i - V; coefficients a_i:
    //   a_i = C(p, i) for 1 <= i <= p-1, a_0 = -V.
    // Work with Laurent polynomials in V on a window wide enough for both
    // directions.
    let v_lo = kmin.min(0) - 1;
    let v_hi = (kmax / pp).max(0) + 1;
    let mono = |c: BigRational, d: i64| LaurentSeries::monomial(p, c, d, v_lo, v_hi);
    let binomial = |i: u64| -> BigRational {
        let mut acc = BigRational::one();
        for t in 0..i {
            acc = acc * BigRational::from_integer(BigInt::from(p - t))
                / BigRational::from_integer(BigInt::from(t + 1));
        }
        acc
    };
    // every power sum we need is exactly supported inside [v_lo, v_hi], so
    // intermediates are re-padded to the full working window to keep the
    // window-intersection arithmetic from eroding real coefficients
    let pad = |f: &LaurentSeries| -> LaurentSeries {
        let mut out = LaurentSeries::zero(p, v_lo, v_hi);
        for d in f.lo().max(v_lo)..=f.hi().min(v_hi) {
            out.set(d, f.get(d));
        }
        out
    };
    let mut s: BTreeMap<i64, LaurentSeries> = BTreeMap::new();
    s.insert(0, mono(rat_int(pp), 0));
    // Newton's identities upward: for 1 <= k <= p:
    //   s_k = -k a_{p-k} - sum_{i=1}^{k-1} a_{p-i} s_{k-i}
    // and for k > p:
    //   s_k = -sum_{i=1}^{p} a_{p-i} s_{k-i}.
    let a = |i: i64| -> LaurentSeries {
        // coefficient of X^i
        if i == 0 {
            mono(BigRational::one(), 1).neg() // -V
        } else if i > 0 && i < pp {
            mono(binomial(i as u64), 0)
        } else if i == pp {
            mono(BigRational::one(), 0)
        } else {
            LaurentSeries::zero(p, v_lo, v_hi)
        }
    };
    for k in 1..=kmax.max(pp) {
        let mut acc = LaurentSeries::zero(p, v_lo, v_hi);
        let top = if k <= pp { k - 1 } else { pp };
        for i in 1..=top {
            let term = pad(&a(pp - i).mul(&s[&(k - i)]));
            acc = acc.add(&term);
        }
        if k <= pp {
            acc = acc.add(&a(pp - k).scale(&rat_int(k)));
        }
        s.insert(k, acc.neg());
    }
    // downward: a_0 s_{k-p} = -(s_k + sum_{i=1}^{p-1} a_{p-i} s_{k-i}),
    // i.e. s_{k-p} = (s_k + sum a_{p-i} s_{k-i}) / V  (a_0 = -V).
    let mut k = pp - 1;
    while k - pp >= kmin {
        let mut acc = s[&k].clone();
        for i in 1..pp {
            acc = pad(&acc).add(&pad(&a(pp - i).mul(&s[&(k - i)])));
        }
        // divide by V: shift degrees down by one
        s.insert(k - pp, pad(&acc.shift(-1)));
        k -= 1;
    }
    s
}

/// The trace operator: psi(f) picks the phi-divisible part of the trace
/// over the fibers of the degree-p Frobenius cover, computed through power
/// sums of the fiber polynomial so no root of unity is ever materialized.
/// The output is reliable on roughly the window divided by p.
pub fn psi_act(f: &LaurentSeries) -> LaurentSeries {
    let p = f.prime();
    let pp = p as i64;
    let (lo, hi) = (f.lo(), f.hi());
    let out_lo = lo.div_euclid(pp) + 1;
    let out_hi = hi.div_euclid(pp);
    let out_lo = out_lo.min(out_hi);
    let sums = power_sums(p, lo, hi);
    let mut acc = LaurentSeries::zero(p, out_lo, out_hi);
    for k in lo..=hi {
        let c = f.get(k);
        if c.is_zero() {
            continue;
        }
        let sk = &sums[&k];
        for d in out_lo..=out_hi {
            let add = sk.get(d) * &c;
            if !add.is_zero() {
                let prev = acc.get(d);
                acc.set(d, prev + add);
            }
        }
    }
    acc.scale(&BigRational::new(BigInt::one(), BigInt::from(p)))
}

/// Series with a polynomial dependence on the formal symbol ell = log pi;
/// coefficient i is the ell^i coefficient.
#[derive(Clone, Debug)]
pub struct LogExtSeries {
    pub coeffs: Vec<LaurentSeries>,
}

impl LogExtSeries {
    pub fn constant(f: LaurentSeries) -> Self {
        LogExtSeries { coeffs: vec![f] }
    }

    pub fn ell(p: u64, lo: i64, hi: i64) -> Self {
        LogExtSeries {
            coeffs: vec![LaurentSeries::zero(p, lo, hi), LaurentSeries::one(p, lo, hi)],
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// The monodromy operator N = -(1 - 1/p)^{-1} d/d ell; lowers the ell
    /// degree by one.
    pub fn n_op(&self) -> Self {
        let p = self.coeffs[0].prime();
        let c = -BigRational::one()
            / (BigRational::one() - BigRational::new(BigInt::one(), BigInt::from(p)));
        let mut out = Vec::new();
        for (i, f) in self.coeffs.iter().enumerate().skip(1) {
            out.push(f.scale(&(c.clone() * rat_int(i as i64))));
        }
        if out.is_empty() {
            out.push(LaurentSeries::zero(p, self.coeffs[0].lo(), self.coeffs[0].hi()));
        }
        LogExtSeries { coeffs: out }
    }

    /// Frobenius action: coefficients through phi_act and ell through
    /// phi(ell) = p ell + log(phi(pi)/pi^p).
    pub fn phi_act(&self, lo: i64) -> Self {
        let p = self.coeffs[0].prime();
        let hi = self.coeffs[0].hi();
        // log(phi(pi)/pi^p) = log(1 + p w) = -p ell(pi)
        let corr = ell_pi(p, lo).scale(&rat_int(-(p as i64)));
        // phi(ell)^i = (p ell + corr)^i expanded binomially
        let mut out: Vec<LaurentSeries> = vec![LaurentSeries::zero(p, lo, hi); self.coeffs.len()];
        for (i, f) in self.coeffs.iter().enumerate() {
            let phi_f = phi_act(f, lo);
            // (p ell + corr)^i = sum_j C(i,j) p^j corr^{i-j} ell^j
            let mut corr_pow = LaurentSeries::one(p, lo, hi);
            // compute corr powers lazily: corr^(i-j) starting from j = i down
            let mut terms: Vec<LaurentSeries> = vec![LaurentSeries::one(p, lo, hi)];
            for _ in 0..i {
                corr_pow = corr_pow.mul(&corr).truncate(lo, hi);
                terms.push(corr_pow.clone());
            }
            for j in 0..=i {
                let c = binom(&rat_int(i as i64), j as u64)
                    * BigRational::from_integer(BigInt::from(p).pow(j as u32));
                let t = phi_f.mul(&terms[i - j]).scale(&c).truncate(lo, hi);
                let mut prev = out[j].clone();
                prev = prev.add(&t);
                out[j] = prev;
            }
        }
        LogExtSeries { coeffs: out }
    }
}

/// The gamma action on ell splits as gamma(ell) = ell + log chi(gamma) + s
/// with s a rational series; only the series part is returned here, the
/// capped constant is reported separately by the caller.
pub fn gamma_ell_correction_series(p: u64, hi: i64) -> LaurentSeries {
    // gamma(pi)/pi = chi (1 + s(pi)): s = gamma(pi)/(chi pi) - 1
    let chi = rat_int(1 + p as i64);
    let g = one_plus_pi_pow_minus_one(p, &chi, hi + 2);
    let unit = g.shift(-1).scale(&chi.recip());
    let mut s = unit.clone();
    s.set(0, unit.get(0) - BigRational::one());
    log_one_plus(&s, 1, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::super::series::rat;

    #[test]
    fn phi_of_pi_is_the_frobenius_polynomial() {
        let p = 3;
        let f = LaurentSeries::monomial(p, rat_int(1), 1, -2, 9);
        let g = phi_act(&f, -2);
        // (1+pi)^3 - 1 = 3 pi + 3 pi^2 + pi^3
        assert_eq!(g.get(1), rat_int(3));
        assert_eq!(g.get(2), rat_int(3));
        assert_eq!(g.get(3), rat_int(1));
        assert!(g.get(-1).is_zero());
    }

    #[test]
    fn partial_of_t_is_one() {
        let p = 3;
        let t = t_series(p, 30);
        let dt = partial(&t);
        assert_eq!(dt.get(0), rat_int(1));
        for d in 1..=dt.hi() {
            assert!(dt.get(d).is_zero(), "degree {d}");
        }
    }

    #[test]
    fn residues() {
        let p = 3;
        // res((1/pi) dt) = 1
        let f = LaurentSeries::monomial(p, rat_int(1), -1, -4, 10);
        assert_eq!(residue(&f), rat_int(1));
        // res(t^{-1} dt) = 1
        let tinv = t_pow(p, -1, 10);
        assert_eq!(residue(&tinv), rat_int(1));
        // res(d(f) dt-form) = 0 for Laurent f
        let mut g = LaurentSeries::zero(p, -3, 12);
        g.set(-3, rat(2, 5));
        g.set(-1, rat_int(4));
        g.set(2, rat(-1, 7));
        assert_eq!(residue(&partial(&g)), rat_int(0));
    }

    #[test]
    fn phi_inverse_is_annulus_expansion() {
        // phi(pi) * phi_pi_inv = 1 on the reliable window
        let p = 3;
        let inv = phi_pi_inv(p, -30, 6);
        let phip = phi_pi(p, 4);
        let prod = phip.mul(&inv);
        assert_eq!(prod.get(0), rat_int(1));
        for d in prod.lo().max(-20)..=prod.hi() {
            if d != 0 {
                assert!(prod.get(d).is_zero(), "degree {d}");
            }
        }
        // tail coefficients decay p-adically
        let v = inv.get(-15);
        assert!(crate::scalar::vp_rational(&v, p) >= 3);
    }

    #[test]
    fn psi_after_phi_is_identity() {
        let p = 3;
        let mut f = LaurentSeries::zero(p, -3, 12);
        f.set(-3, rat_int(2));
        f.set(-1, rat(1, 2));
        f.set(0, rat_int(5));
        f.set(4, rat(-7, 4));
        let phif = phi_act(&f, -40);
        let back = psi_act(&phif);
        for d in back.lo()..=back.hi() {
            assert_eq!(back.get(d), f.get(d), "degree {d}");
        }
        assert!(back.lo() <= -3 && back.hi() >= 4);
    }

    #[test]
    fn psi_of_one_and_pi() {
        let p = 3;
        let one = LaurentSeries::one(p, -6, 12);
        let po = psi_act(&one);
        assert_eq!(po.get(0), rat_int(1));
        let pi = LaurentSeries::monomial(p, rat_int(1), 1, -6, 12);
        let ppi = psi_act(&pi);
        // trace of pi over the fiber is -p, so psi(pi) = -1
        assert_eq!(ppi.get(0), rat_int(-1));
    }

    #[test]
    fn operator_commutation_on_random_series() {
        // partial gamma = chi(gamma) gamma partial and partial phi = p phi partial
        let p = 3;
        let chi = rat_int(1 + p as i64);
        let mut f = LaurentSeries::zero(p, -2, 25);
        f.set(-2, rat(3, 2));
        f.set(1, rat_int(-4));
        f.set(3, rat(1, 9));
        let lhs = partial(&gamma_act(&f, &chi, -8));
        let rhs = gamma_act(&partial(&f), &chi, -8).scale(&chi);
        let lo = lhs.lo().max(rhs.lo());
        let hi = lhs.hi().min(rhs.hi()).min(20);
        for d in lo..=hi {
            assert_eq!(lhs.get(d), rhs.get(d), "gamma commutation at {d}");
        }
        let lhs = partial(&phi_act(&f, -30));
        let rhs = phi_act(&partial(&f), -30).scale(&rat_int(p as i64));
        for d in lhs.lo().max(rhs.lo()).max(-12)..=lhs.hi().min(rhs.hi()).min(20) {
            assert_eq!(lhs.get(d), rhs.get(d), "phi commutation at {d}");
        }
    }

    #[test]
    fn ell_pi_kill_by_psi() {
        let p = 3;
        let l = ell_pi(p, -45);
        let pl = psi_act(&l);
        for d in pl.lo()..=pl.hi().min(-1) {
            assert!(pl.get(d).is_zero(), "degree {d}: {:?}", pl.get(d));
        }
    }

    #[test]
    fn log_ext_monodromy_and_frobenius() {
        let p = 3;
        let ell = LogExtSeries::ell(p, -10, 20);
        // N(ell) = -(1 - 1/p)^{-1}
        let n = ell.n_op();
        assert_eq!(n.coeffs.len(), 1);
        let expect = -BigRational::one() / (BigRational::one() - rat(1, p as i64));
        assert_eq!(n.coeffs[0].get(0), expect);
        // N(phi(ell)) = p phi(N ell): both sides are constants
        let phi_ell = ell.phi_act(-10);
        let lhs = phi_ell.n_op();
        assert_eq!(lhs.coeffs.len(), 1);
        let rhs = expect * rat_int(p as i64);
        assert_eq!(lhs.coeffs[0].get(0), rhs);
        for d in lhs.coeffs[0].lo()..=lhs.coeffs[0].hi() {
            if d != 0 {
                assert!(lhs.coeffs[0].get(d).is_zero());
            }
        }
    }

    #[test]
    fn gamma_ell_correction_is_a_plain_series() {
        let p = 3;
        let s = gamma_ell_correction_series(p, 15);
        // the series part has no constant term and starts at degree 1
        assert!(s.lo() >= 1 || s.get(0).is_zero());
        assert!(!s.is_zero());
    }
}
