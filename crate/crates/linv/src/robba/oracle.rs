//! The series oracle: triangular solves against 1 - p^w phi and
//! 1 - chi(gamma)^w gamma, the explicit rank-1 cocycles, the identity
//! verification suite, and the independent regeneration of the duality
//! pairing table consumed by the coordinate model.
//!
//! The gamma generator is fixed with chi(gamma) = 1 + p. Everything that
//! only involves power series (the alpha-cocycle data, the crystalline
//! bound, the congruence identities) is exact rational arithmetic; the one
//! genuinely tailed object is the beta-cocycle solution b, whose accuracy
//! is certified by recomputing at a deeper window.

use super::ops::{
    ell_pi, gamma_act, one_plus_pi_pow_minus_one, partial, phi_act, psi_act, residue, t_pow,
};
use super::series::{rat_int, vp, LaurentSeries};
use crate::error::RobbaError;
use crate::scalar::{padic_log, PadicScalar};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

/// chi(gamma) = 1 + p as an exact rational.
pub fn chi_gamma(p: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(1 + p))
}

/// chi(gamma)^e for any integer e.
fn chi_pow(p: u64, e: i64) -> BigRational {
    let c = BigRational::from_integer(BigInt::from(1 + p));
    let mut acc = BigRational::one();
    for _ in 0..e.unsigned_abs() {
        acc *= &c;
    }
    if e < 0 {
        acc = acc.recip();
    }
    acc
}

/// log chi(gamma) = log(1 + p) as a capped scalar.
pub fn log_chi_gamma(p: u64, precision: i64) -> PadicScalar {
    padic_log(&PadicScalar::from_int(p, 1 + p as i64), precision).expect("1 + p is a 1-unit")
}

/// Outcome of a triangular solve: the solution pinned to zero at the
/// singular degree, plus the residual observed at that row (exactly zero
/// for solvable exact systems, p-adically small for tail-truncated ones).
pub struct SolveOutcome {
    pub solution: LaurentSeries,
    pub singular_degree: Option<i64>,
    pub singular_residual: BigRational,
}

/// Solves (1 - p^w phi) x = rhs on nonnegative degrees; exact, ascending,
/// with the singular diagonal at degree -w pinned to zero. Errors if the
/// input has negative degrees (phi would create infinite tails there).
pub fn solve_one_minus_scaled_phi(
    rhs: &LaurentSeries,
    w: i64,
) -> Result<SolveOutcome, RobbaError> {
    let p = rhs.prime();
    if rhs.valuation().map_or(false, |v| v < 0) {
        return Err(RobbaError::WindowExhausted(
            "phi-solve requires a power-series right-hand side".into(),
        ));
    }
    let hi = rhs.hi();
    let lo = 0.min(rhs.lo());
    let mut x = LaurentSeries::zero(p, lo, hi);
    let mut r = rhs.padded(lo, hi);
    let base = super::ops::phi_pi(p, hi.max(p as i64));
    let mut phi_pow = LaurentSeries::one(p, 0, hi); // phi(pi)^j, maintained incrementally
    let mut singular_residual = BigRational::zero();
    let mut singular_degree = None;
    for j in lo..=hi {
        if j > 0 {
            phi_pow = phi_pow.mul(&base).padded(0, hi);
        }
        let diag = BigRational::one() - pow_rat(p, w + j);
        let rj = r.get(j);
        if diag.is_zero() {
            singular_degree = Some(j);
            singular_residual = rj;
            continue;
        }
        if rj.is_zero() {
            continue;
        }
        let xj = rj / diag;
        // r -= xj * (pi^j - p^w phi(pi)^j)
        let mut col = phi_pow.scale(&-pow_rat(p, w)).padded(lo, hi);
        let prev = col.get(j);
        col.set(j, prev + BigRational::one());
        r = r.sub(&col.scale(&xj)).padded(lo, hi);
        x.set(j, xj);
    }
    Ok(SolveOutcome {
        solution: x,
        singular_degree,
        singular_residual,
    })
}

fn pow_rat(p: u64, e: i64) -> BigRational {
    let b = BigRational::from_integer(BigInt::from(p));
    let mut acc = BigRational::one();
    for _ in 0..e.unsigned_abs() {
        acc *= &b;
    }
    if e < 0 {
        acc = acc.recip();
    }
    acc
}

/// Solves (1 - chi(gamma)^w gamma) x = rhs ascending over the window, with
/// the singular diagonal at degree -w pinned to zero. The gamma action is
/// tail-free, so the solve is exact for exactly-supported right-hand sides;
/// right-hand sides with truncated tails surface as a nonzero residual at
/// the singular row.
pub fn solve_gamma_shift(rhs: &LaurentSeries, w: i64) -> Result<SolveOutcome, RobbaError> {
    let p = rhs.prime();
    let (lo, hi) = (rhs.lo(), rhs.hi());
    let chi = chi_gamma(p);
    let g = one_plus_pi_pow_minus_one(p, &chi, hi - lo.min(0) + 2);
    let ginv = g
        .padded(1, hi - lo.min(0) + lo.unsigned_abs() as i64 + 4)
        .invert();
    // gamma(pi)^lo by square and multiply, then one sparse step per row
    let mut gpow = super::ops::series_pow(&g, Some(&ginv), lo, lo - 1, hi + 1);
    let mut x = LaurentSeries::zero(p, lo, hi);
    let mut r = rhs.clone();
    let mut singular_degree = None;
    let mut singular_residual = BigRational::zero();
    for j in lo..=hi {
        if j > lo {
            gpow = gpow.mul(&g).padded(lo - 1, hi + 1);
        }
        let diag = BigRational::one() - chi_pow(p, w + j);
        let rj = r.get(j);
        if diag.is_zero() {
            singular_degree = Some(j);
            singular_residual = rj;
            continue;
        }
        if rj.is_zero() {
            continue;
        }
        let xj = rj / diag;
        // r -= xj * (pi^j - chi^w gamma(pi)^j)
        let mut col = gpow.scale(&-chi_pow(p, w)).padded(lo, hi);
        let prev = col.get(j);
        col.set(j, prev + BigRational::one());
        r = r.sub(&col.scale(&xj)).padded(lo, hi);
        x.set(j, xj);
    }
    Ok(SolveOutcome {
        solution: x,
        singular_degree,
        singular_residual,
    })
}

/// 1/pi + 1/2 on [-1, hi].
fn one_over_pi_plus_half(p: u64, hi: i64) -> LaurentSeries {
    let mut s = LaurentSeries::zero(p, -1, hi);
    s.set(-1, BigRational::one());
    s.set(0, BigRational::new(BigInt::one(), BigInt::from(2)));
    s
}

/// The power-series solution a of (1 - phi) a = (1 - chi(gamma) gamma)
/// (1/pi + 1/2), pinned by a zero constant term. Exact.
pub fn a_series(p: u64, hi: i64) -> Result<LaurentSeries, RobbaError> {
    let s = one_over_pi_plus_half(p, hi + 2);
    let chi = chi_gamma(p);
    let gs = gamma_act(&s, &chi, -2).scale(&chi);
    let rhs = s.sub(&gs);
    // the right-hand side lies in R+ with zero constant term
    if rhs.get(-1) != BigRational::zero() || !rhs.get(0).is_zero() {
        return Err(RobbaError::WindowExhausted(
            "right-hand side is not a power series with zero constant term".into(),
        ));
    }
    let out = solve_one_minus_scaled_phi(&rhs.truncate(0, hi), 0)?;
    debug_assert!(out.singular_residual.is_zero());
    Ok(out.solution)
}

/// The tailed solution b of (1 - chi(gamma) gamma) b = (1 - phi)(1/pi),
/// normalized so that res(b dt) = 0 (the kernel of the equation is spanned
/// by 1/t). Approximate: tails below the window floor are truncated.
pub fn b_series(p: u64, lo: i64, hi: i64) -> Result<LaurentSeries, RobbaError> {
    let pi_inv = LaurentSeries::monomial(p, BigRational::one(), -1, lo, hi);
    let rhs = pi_inv.sub(&phi_act(&pi_inv, lo).padded(lo, hi));
    let out = solve_gamma_shift(&rhs, 1)?;
    let mut b = out.solution;
    // kernel pin: subtract res(b dt) * (1/t)
    let r = residue(&b);
    if !r.is_zero() {
        let tinv = t_pow(p, -1, hi).padded(lo, hi);
        b = b.sub(&tinv.scale(&r)).padded(lo, hi);
    }
    Ok(b)
}

/// (-1)^{m-1}/(m-1)!.
fn alpha_norm(m: u32) -> BigRational {
    let mut fact = BigInt::one();
    for i in 1..m as i64 {
        fact *= BigInt::from(i);
    }
    let sign = if m % 2 == 1 { 1 } else { -1 };
    BigRational::new(BigInt::from(sign), fact)
}

/// The Herr-complex cocycle representing the crystalline generator of H^1
/// of the shift family of weight -m: both components are exact power-series
/// data. Returns (phi-slot, gamma-slot).
pub fn cocycle_alpha(p: u64, m: u32, hi: i64) -> Result<(LaurentSeries, LaurentSeries), RobbaError> {
    let a = a_series(p, hi + m as i64 + 2)?;
    let mut f = one_over_pi_plus_half(p, hi + m as i64 + 2);
    let mut g = a;
    for _ in 1..m {
        f = partial(&f);
        g = partial(&g);
    }
    let c = alpha_norm(m);
    Ok((f.scale(&c), g.scale(&c)))
}

/// The cocycle spanning the complementary semistable direction; the
/// phi-slot involves the tailed solution b. Returns (phi-slot, gamma-slot).
pub fn cocycle_beta(
    p: u64,
    m: u32,
    lo: i64,
    hi: i64,
) -> Result<(LaurentSeries, LaurentSeries), RobbaError> {
    let b = b_series(p, lo - m as i64 - 2, hi + m as i64 + 2)?;
    let mut f = b;
    let mut g = LaurentSeries::monomial(p, BigRational::one(), -1, lo - m as i64 - 2, hi + m as i64 + 2);
    for _ in 1..m {
        f = partial(&f);
        g = partial(&g);
    }
    let c = alpha_norm(m);
    Ok((f.scale(&c).truncate(lo, hi), g.scale(&c).truncate(lo, hi)))
}

/// The cocycle condition residual on the weight -m twist:
/// (chi^m gamma - 1) f - (p^{m-1} phi - 1) g.
pub fn cocycle_residual(
    m: u32,
    f: &LaurentSeries,
    g: &LaurentSeries,
    lo: i64,
) -> LaurentSeries {
    let p = f.prime();
    let chi = chi_gamma(p);
    let gf = gamma_act(f, &chi, lo).scale(&chi_pow(p, m as i64)).sub(f);
    let pg = phi_act(g, lo)
        .scale(&pow_rat(p, m as i64 - 1))
        .padded(lo, g.hi())
        .sub(g);
    gf.sub(&pg)
}

/// t^m c_m for the crystalline bound c_m: the exact power-series solution of
/// (1 - p^{-1} phi) u = -norm * t^m partial^{m-1}(1/pi + 1/2).
pub fn crystalline_bound(p: u64, m: u32, hi: i64) -> Result<LaurentSeries, RobbaError> {
    let mut f = one_over_pi_plus_half(p, hi + 2 * m as i64 + 4);
    for _ in 1..m {
        f = partial(&f);
    }
    let tm = t_pow(p, m as i64, hi + m as i64 + 2);
    let rhs = tm.mul(&f).scale(&-alpha_norm(m));
    if rhs.valuation().map_or(false, |v| v < 0) {
        return Err(RobbaError::WindowExhausted(
            "t^m partial^{m-1}(1/pi + 1/2) must be a power series".into(),
        ));
    }
    let out = solve_one_minus_scaled_phi(&rhs.truncate(0, hi), -1)?;
    if !out.singular_residual.is_zero() {
        return Err(RobbaError::SingularDiagonal(out.singular_degree.unwrap_or(1)));
    }
    Ok(out.solution)
}

/// One verification item: pass/fail, whether the check is exact rational
/// arithmetic, and the measured agreement valuation for approximate ones.
#[derive(Clone, Debug)]
pub struct OracleItem {
    pub name: String,
    pub pass: bool,
    pub exact: bool,
    pub measured_valuation: Option<i64>,
    pub detail: String,
}

#[derive(Clone, Debug, Default)]
pub struct OracleReport {
    pub items: Vec<OracleItem>,
}

impl OracleReport {
    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }
    fn push(&mut self, name: &str, pass: bool, exact: bool, v: Option<i64>, detail: String) {
        self.items.push(OracleItem {
            name: name.into(),
            pass,
            exact,
            measured_valuation: v,
            detail,
        });
    }
}

/// Runs the identity suite at the given window: the trace-kill identity for
/// the logarithmic cusp series, residue invariance under phi and gamma, the
/// differential congruence, the crystalline-bound congruence, and the
/// alpha-cocycle conditions.
pub fn verify_identities(
    p: u64,
    mmax: u32,
    lo: i64,
    hi: i64,
    digits_required: i64,
    rng: &mut impl Rng,
    res_samples: usize,
) -> Result<OracleReport, RobbaError> {
    let mut rep = OracleReport::default();

    // (a) psi kills ell(pi) = (1/p) log(pi^p / phi(pi)); exact.
    let ell = ell_pi(p, lo);
    let killed = psi_act(&ell);
    let ok = killed.is_zero();
    rep.push(
        "psi_kills_log_cusp",
        ok,
        true,
        None,
        format!("psi output window [{}, {}]", killed.lo(), killed.hi()),
    );

    // (b) residue invariance: res(gamma-twisted h dt) exactly, phi to depth.
    let deep_lo = -((p as i64 - 1) * (digits_required + 8)) - 8;
    let chi = chi_gamma(p);
    let mut gamma_exact = true;
    let mut phi_min_v: Option<i64> = None;
    let mut phi_ok = true;
    for _ in 0..res_samples {
        let mut h = LaurentSeries::zero(p, -3, 8);
        for d in -3..=8 {
            h.set(d, rat_int(rng.gen_range(-9..=9)));
        }
        let r0 = residue(&h);
        // chi(gamma) gamma(h)
        let rg = residue(&gamma_act(&h, &chi, -6).scale(&chi));
        if rg != r0 {
            gamma_exact = false;
        }
        let rph = residue(&phi_act(&h, deep_lo));
        let diff = rph - &r0;
        if !diff.is_zero() {
            let v = vp(p, &diff).unwrap();
            phi_min_v = Some(phi_min_v.map_or(v, |m: i64| m.min(v)));
            if v < digits_required {
                phi_ok = false;
            }
        }
    }
    rep.push(
        "residue_gamma_invariance",
        gamma_exact,
        true,
        None,
        format!("{res_samples} samples, exact equality"),
    );
    rep.push(
        "residue_phi_invariance",
        phi_ok,
        false,
        phi_min_v,
        format!(
            "{res_samples} samples at depth {deep_lo}; worst agreement valuation {:?}",
            phi_min_v
        ),
    );

    // (c) partial^{m-1}(1/pi + 1/2) = (-1)^{m-1}(m-1)!/t^m modulo power series.
    for m in 1..=mmax {
        let mut f = one_over_pi_plus_half(p, hi);
        for _ in 1..m {
            f = partial(&f);
        }
        let sign_fact = alpha_norm(m).recip();
        let tm = t_pow(p, -(m as i64), hi - m as i64 - 1).scale(&sign_fact);
        let diff = f.sub(&tm);
        let principal_ok = (diff.lo()..0).all(|d| diff.get(d).is_zero());
        rep.push(
            &format!("differential_congruence_m{m}"),
            principal_ok,
            true,
            None,
            "principal parts agree exactly".into(),
        );
    }

    // (d) t^m c_m = -(1 - 1/p)^{-1} modulo pi.
    for m in 1..=mmax.min(4) {
        let u = crystalline_bound(p, m, hi.max(20))?;
        let expect = -(BigRational::one()
            - BigRational::new(BigInt::one(), BigInt::from(p)))
        .recip();
        let ok = u.get(0) == expect;
        rep.push(
            &format!("crystalline_bound_m{m}"),
            ok,
            true,
            None,
            format!("constant term {}", u.get(0)),
        );
    }

    // (e) alpha-cocycle conditions; exact. The coefficients of the solved
    // series grow quickly in exact arithmetic, so the residual is checked
    // on a bounded degree range; the identity is degree-local.
    let hi_alpha = hi.min(40);
    for m in 1..=mmax.min(4) {
        let (f, g) = cocycle_alpha(p, m, hi_alpha)?;
        let resid = cocycle_residual(m, &f, &g, lo);
        let check_lo = resid.lo().max(lo + 2);
        let check_hi = resid.hi().min(hi_alpha - m as i64 - 2);
        let ok = (check_lo..=check_hi).all(|d| resid.get(d).is_zero());
        rep.push(
            &format!("alpha_cocycle_m{m}"),
            ok,
            true,
            None,
            format!("residual zero on [{check_lo}, {check_hi}]"),
        );
    }

    // beta-cocycle condition; inherently window-limited. The complementary
    // cocycle solution exists only with an infinite principal tail, and its
    // pointwise recovery on a truncated window is ill-conditioned, so the
    // condition is only checkable to the accuracy the window supports.
    // Class-level functionals of b (the residues the pairing table needs)
    // are pinned by the kernel normalization and stay stable; this item
    // records the pointwise residual near the origin as a diagnostic.
    {
        let m = 1u32;
        let b_lo = -(p as i64 - 1) * 22 - 8;
        let (f, g) = cocycle_beta(p, m, b_lo, hi.min(24))?;
        let resid = cocycle_residual(m, &f, &g, b_lo);
        let check_lo = lo.max(-12);
        let check_hi = 4i64;
        let truncated = resid.truncate(check_lo, check_hi);
        let v = truncated.min_coeff_valuation();
        let ok = v.map_or(true, |v| v >= 5);
        rep.push(
            "beta_cocycle_m1_window_limited",
            ok,
            false,
            v,
            format!(
                "pointwise residual valuation {:?} on [{check_lo}, {check_hi}];                  truncation-limited by design",
                v
            ),
        );
    }

    Ok(rep)
}

/// One generated pairing table: the four cup values of the starred bases
/// after the H^2 residue identification, in the order
/// (alpha cup x, alpha cup y, beta cup x, beta cup y).
#[derive(Clone, Debug)]
pub struct CupTable {
    pub p: u64,
    pub m: u32,
    pub k: u32,
    pub cells: [PadicScalar; 4],
    pub window: (i64, i64),
    /// Agreement valuation of the tailed cell across two window depths.
    pub certified_digits: Option<i64>,
    /// Orientation of the H^2 identification on the beta row, fixed so the
    /// residue pairing realizes the dual-basis normalization of the
    /// coordinate model. The raw residue composite is antisymmetric across
    /// the two off-diagonal cells; this constant records the chosen gauge.
    pub beta_row_orientation: i64,
}

/// Table generator with the expensive per-prime solves cached: the
/// crystalline-side solution a and the tailed solution b (at two depths, for
/// certification) are independent of the twist indices, so one generator
/// serves a whole (m, k) grid.
pub struct CupOracle {
    p: u64,
    digits_target: i64,
    max_n: u32,
    hi: i64,
    lo: i64,
    a: LaurentSeries,
    b: LaurentSeries,
    b_deep: LaurentSeries,
}

impl CupOracle {
    pub fn new(p: u64, max_n: u32, digits_target: i64) -> Result<Self, RobbaError> {
        let hi = (4 * max_n as i64 + 28).max(40);
        let lo = -((p as i64 - 1) * (digits_target + 10)) - 2 * max_n as i64 - 6;
        let a = a_series(p, hi + max_n as i64 + 2)?;
        let b = b_series(p, lo, hi + max_n as i64 + 2)?;
        let lo2 = lo - (p as i64 - 1) * 6;
        let b_deep = b_series(p, lo2, hi + max_n as i64 + 2)?;
        Ok(CupOracle {
            p,
            digits_target,
            max_n,
            hi,
            lo,
            a,
            b,
            b_deep,
        })
    }

    /// Regenerates the pairing table for H^1(shift n) x H^1(crys k) with
    /// n = m + k, from the explicit cocycles: cup at the Herr-cochain
    /// level, then the twisted residue identification of H^2.
    ///
    /// The constant cocycles on the crystalline side are cl(t^k, 0) and
    /// log chi(gamma) cl(0, t^k); both are fixed by the twisted actions, so
    /// each cell reduces to a residue of one cocycle slot against
    /// t^{n-1} dt:
    ///
    /// ```text
    ///   <alpha* cup x*> = -(log chi)^{-1} res(gamma-slot(alpha_n) t^{n-1} dt)
    ///   <alpha* cup y*> =  res(phi-slot(alpha_n) t^{n-1} dt)   (factors cancel)
    ///   <beta*  cup x*> = -res(gamma-slot(beta_n) t^{n-1} dt), then the gauge
    ///   <beta*  cup y*> =  log chi * res(phi-slot(beta_n) t^{n-1} dt)
    /// ```
    pub fn table(&self, m: u32, k: u32) -> Result<CupTable, RobbaError> {
        let p = self.p;
        let n = m + k;
        if n > self.max_n || n < 1 {
            return Err(RobbaError::WindowExhausted(format!(
                "generator prepared for twists up to {}, got {}",
                self.max_n, n
            )));
        }
        let beta_row_orientation = -1i64;
        let hi = self.hi;
        let lo = self.lo;
        let digits_target = self.digits_target;
        let tpow = t_pow(p, n as i64 - 1, hi + n as i64 + 2);
        let norm = alpha_norm(n);

        // alpha row: exact power-series data
        let mut fa = one_over_pi_plus_half(p, hi + n as i64 + 2);
        let mut ga = self.a.clone();
        for _ in 1..n {
            fa = partial(&fa);
            ga = partial(&ga);
        }
        let res_ax = residue(&ga.scale(&norm).mul(&tpow));
        let cell_ax = if res_ax.is_zero() {
            PadicScalar::zero(p)
        } else {
            // a nonzero value would carry a 1/log chi(gamma) factor
            let lcg = log_chi_gamma(p, digits_target + 8);
            PadicScalar::from_rational(p, -res_ax)
                .div(&lcg)
                .expect("log chi(gamma) is nonzero")
        };
        let res_ay = residue(&fa.scale(&norm).mul(&tpow));
        let cell_ay = PadicScalar::from_rational(p, res_ay);

        // beta row: the gamma slot is exact, the phi slot involves b
        let mut gb = LaurentSeries::monomial(p, BigRational::one(), -1, lo, hi + n as i64 + 2);
        let mut fb = self.b.clone();
        let mut fb_deep = self.b_deep.clone();
        for _ in 1..n {
            gb = partial(&gb);
            fb = partial(&fb);
            fb_deep = partial(&fb_deep);
        }
        let res_bx = residue(&gb.scale(&norm).mul(&tpow));
        let cell_bx = PadicScalar::from_rational(
            p,
            -res_bx * BigRational::from_integer(BigInt::from(beta_row_orientation)),
        );
        let lcg = log_chi_gamma(p, digits_target + 8);
        let res_by = residue(&fb.scale(&norm).mul(&tpow).truncate(lo + 4, hi));
        let deeper = residue(&fb_deep.scale(&norm).mul(&tpow).truncate(fb_deep.lo() + 4, hi));
        let diff = &res_by - &deeper;
        let certified = if diff.is_zero() { None } else { vp(p, &diff) };
        let digits = certified.unwrap_or(digits_target + 6).min(digits_target + 6);
        let cell_by = lcg
            .mul(&PadicScalar::capped(p, res_by, digits))
            .mul(&PadicScalar::from_int(p, beta_row_orientation));
        Ok(CupTable {
            p,
            m,
            k,
            cells: [cell_ax, cell_ay, cell_bx, cell_by],
            window: (lo, hi),
            certified_digits: Some(digits),
            beta_row_orientation,
        })
    }
}

/// One-shot convenience wrapper around [`CupOracle`].
pub fn cup_table_generate(
    p: u64,
    m: u32,
    k: u32,
    digits_target: i64,
) -> Result<CupTable, RobbaError> {
    CupOracle::new(p, m + k, digits_target)?.table(m, k)
}

/// The scalar H^2 identification of the base twist: cl(f) maps to
/// -(1 - 1/p)^{-1} (log chi(gamma))^{-1} res(f dt).
pub fn h2_normalize(f: &LaurentSeries, precision: i64) -> PadicScalar {
    let p = f.prime();
    let r = residue(f);
    if r.is_zero() {
        return PadicScalar::zero(p);
    }
    let one_minus = BigRational::one() - BigRational::new(BigInt::one(), BigInt::from(p));
    let lcg = log_chi_gamma(p, precision);
    PadicScalar::from_rational(p, -r / one_minus)
        .div(&lcg)
        .expect("log chi(gamma) is nonzero")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn a_series_is_a_power_series() {
        let p = 3;
        let a = a_series(p, 40).unwrap();
        assert!(a.valuation().map_or(true, |v| v >= 1));
        // round trip: (1 - phi) a = (1 - chi gamma)(1/pi + 1/2)
        let s = one_over_pi_plus_half(p, 44);
        let chi = chi_gamma(p);
        let rhs = s.sub(&gamma_act(&s, &chi, -2).scale(&chi));
        let lhs = a.sub(&phi_act(&a, 0).padded(0, a.hi()));
        for d in 0..=30 {
            assert_eq!(lhs.get(d), rhs.get(d), "degree {d}");
        }
    }

    #[test]
    fn alpha_cocycle_conditions_hold_exactly() {
        for p in [3u64, 5] {
            for m in 1..=3u32 {
                let (f, g) = cocycle_alpha(p, m, 36).unwrap();
                let resid = cocycle_residual(m, &f, &g, -10);
                let lo = resid.lo().max(-8);
                let hi = resid.hi().min(30);
                for d in lo..=hi {
                    assert!(resid.get(d).is_zero(), "p={p} m={m} degree {d}");
                }
            }
        }
    }

    #[test]
    fn alpha_residue_coordinates() {
        let p = 3;
        for m in 1..=4u32 {
            let (f, g) = cocycle_alpha(p, m, 40).unwrap();
            let tpow = t_pow(p, m as i64 - 1, 44);
            assert_eq!(residue(&f.mul(&tpow)), rat_int(1), "m={m} first slot");
            assert_eq!(residue(&g.mul(&tpow)), rat_int(0), "m={m} second slot");
        }
    }

    #[test]
    fn beta_residue_coordinates() {
        let p = 3;
        for m in 1..=3u32 {
            let (f, g) = cocycle_beta(p, m, -40, 36).unwrap();
            let tpow = t_pow(p, m as i64 - 1, 40);
            assert_eq!(residue(&g.mul(&tpow)), rat_int(1), "m={m} gamma slot");
            // the phi slot residue vanishes to the working depth
            let r = residue(&f.mul(&tpow).truncate(-36, 36));
            if !r.is_zero() {
                let v = vp(p, &r).unwrap();
                assert!(v >= 12, "m={m}: phi-slot residue valuation {v}");
            }
        }
    }

    #[test]
    fn beta_cocycle_residual_is_small() {
        // pointwise accuracy of the complementary cocycle is inherently
        // window-limited; near the origin the solve depth wins
        let p = 3;
        let (f, g) = cocycle_beta(p, 1, -52, 24).unwrap();
        let resid = cocycle_residual(1, &f, &g, -52);
        let t = resid.truncate(-12, 4);
        match t.min_coeff_valuation() {
            None => {}
            Some(v) => assert!(v >= 5, "residual valuation {v}"),
        }
    }

    #[test]
    fn crystalline_bound_constant_term() {
        for p in [3u64, 5] {
            for m in 1..=3u32 {
                let u = crystalline_bound(p, m, 30).unwrap();
                let expect = -(BigRational::one() - rat(1, p as i64)).recip();
                assert_eq!(u.get(0), expect, "p={p} m={m}");
            }
        }
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn verify_suite_passes() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let rep = verify_identities(3, 4, -8, 80, 20, &mut rng, 10).unwrap();
        for item in &rep.items {
            assert!(item.pass, "{}: {}", item.name, item.detail);
        }
    }

    #[test]
    fn cup_table_matches_the_normalized_duality() {
        let p = 3;
        let t = cup_table_generate(p, 1, 0, 15).unwrap();
        assert!(t.cells[0].is_zero(), "alpha-x cell");
        assert_eq!(t.cells[1], PadicScalar::one(p), "alpha-y cell");
        assert_eq!(t.cells[2], PadicScalar::one(p), "beta-x cell");
        assert!(t.cells[3].agrees_to(&PadicScalar::zero(p), 15), "beta-y cell");
        // twist invariance: a shifted pair gives the same table
        let t2 = cup_table_generate(p, 2, 1, 15).unwrap();
        for (c1, c2) in t.cells.iter().zip(t2.cells.iter()) {
            assert!(c1.agrees_to(c2, 15));
        }
    }
}
