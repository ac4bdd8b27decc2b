//! Coordinates on H^1 for the two semistable rank-1 families.
//!
//! The families are indexed by the character on units: `CrysUnit(m)` is the
//! crystalline family with Frobenius 1 and Hodge jump m >= 0, `Shift(m)` the
//! family with Frobenius p^{-1} and Hodge jump -m <= -1. Their H^1 is two
//! dimensional, with distinguished bases (x*_m, y*_m) and (alpha*_m,
//! beta*_m): x* spans the crystalline line, y* the complementary direction
//! (at m = 0 these are the unramified and cyclotomic coordinates), alpha*
//! spans H^1_f and beta* the extra semistable direction.
//!
//! The duality pairing is normalized so that (alpha*_n, beta*_n) is dual to
//! (y*_k, x*_k) whenever n - k >= 1: the Gram matrix on the ordered bases is
//! [[0, 1], [1, 0]], independent of the twist. The series oracle regenerates
//! this table from explicit cocycles.

use crate::error::Rank1Error;
use crate::filtered::{CharacterParam, FilteredPhiNModule};
use crate::scalar::{padic_log, PadicScalar};
use crate::stcoh::StClass;

/// The two semistable rank-1 families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rank1Family {
    /// Frobenius 1, Hodge jump m >= 0 (character x^{-m} on the unit side).
    CrysUnit(u32),
    /// Frobenius p^{-1}, Hodge jump -m <= -1 (character |x| x^m).
    Shift(u32),
}

impl Rank1Family {
    /// Classifies a character parameter into one of the two families.
    pub fn from_character(param: &CharacterParam) -> Result<Self, Rank1Error> {
        let p = param.phi_value.prime();
        if param.weight >= 0 && param.phi_value == PadicScalar::p_pow(p, -param.weight) {
            return Ok(Rank1Family::CrysUnit(param.weight as u32));
        }
        if param.weight <= -1 && param.phi_value == PadicScalar::p_pow(p, -param.weight - 1) {
            return Ok(Rank1Family::Shift((-param.weight) as u32));
        }
        Err(Rank1Error::UnsupportedCharacter(format!(
            "weight {}, delta(p) = {}",
            param.weight, param.phi_value
        )))
    }

    pub fn character(&self, p: u64) -> CharacterParam {
        match self {
            Rank1Family::CrysUnit(m) => CharacterParam {
                weight: *m as i64,
                phi_value: PadicScalar::p_pow(p, -(*m as i64)),
            },
            Rank1Family::Shift(m) => CharacterParam {
                weight: -(*m as i64),
                phi_value: PadicScalar::p_pow(p, *m as i64 - 1),
            },
        }
    }

    /// The one-dimensional filtered module realizing the family.
    pub fn model(&self, p: u64) -> FilteredPhiNModule {
        FilteredPhiNModule::from_character(p, &self.character(p))
    }

    /// (dim H^0, dim H^1, dim H^1_f, dim H^1_st).
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        match self {
            Rank1Family::CrysUnit(_) => (1, 2, 1, 1),
            Rank1Family::Shift(_) => (0, 2, 1, 2),
        }
    }
}

/// Dimension table for a rank-1 character: (H^0, H^1, H^1_f, H^1_st).
pub fn h_dims(param: &CharacterParam) -> Result<(usize, usize, usize, usize), Rank1Error> {
    Ok(Rank1Family::from_character(param)?.dims())
}

/// Coordinates of an H^1 class in the distinguished basis of its family:
/// (a, b) means a alpha* + b beta* on the shift side and a x* + b y* on the
/// crystalline side.
#[derive(Clone, Debug, PartialEq)]
pub struct H1Coord {
    pub family: Rank1Family,
    pub a: PadicScalar,
    pub b: PadicScalar,
}

impl H1Coord {
    pub fn new(family: Rank1Family, a: PadicScalar, b: PadicScalar) -> Self {
        H1Coord { family, a, b }
    }

    pub fn prime(&self) -> u64 {
        self.a.prime()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

/// Expresses a class in H^1 of the st complex of a Shift(m) model in the
/// (alpha*_m, beta*_m) basis: the comparison sends alpha*_m to -cl(1,0,0)
/// and beta*_m to -cl(0,0,1).
pub fn stclass_to_alphabeta(c: &StClass) -> Result<H1Coord, Rank1Error> {
    let m = c.parent();
    let p = m.prime();
    let param = m
        .rank1_classify()
        .map_err(|e| Rank1Error::WrongParent(e.to_string()))?;
    let family = Rank1Family::from_character(&param)?;
    let Rank1Family::Shift(_) = family else {
        return Err(Rank1Error::WrongParent(
            "expected a shift-family model with Frobenius p^{-1} and negative jump".into(),
        ));
    };
    // On the model A = Q_p: tangent = A (Fil^0 = 0), Im g is spanned by
    // (1, 1 - p^{-1}, 0), so the canonical representative of cl(x, y, z) is
    // (0, y - (1 - p^{-1}) x, z) and
    //   cl(x,y,z) = u cl(1,0,0) + v cl(0,0,1),  u = x - y/(1-p^{-1}), v = z.
    let (xt, y, z) = c.parts();
    let one_minus_pinv = PadicScalar::one(p).sub(&PadicScalar::from_ratio(p, 1, p as i64));
    let u = xt[0].sub(&y[0].div(&one_minus_pinv).expect("1 - 1/p is a unit"));
    let v = z[0].clone();
    Ok(H1Coord::new(family, u.neg(), v.neg()))
}

/// The duality pairing <., .>: H^1(Shift(n)) x H^1(CrysUnit(k)) -> Q_p for
/// n - k >= 1, with Gram matrix [[0, 1], [1, 0]] on the ordered bases
/// (alpha*, beta*) x (x*, y*).
pub fn pair(a: &H1Coord, b: &H1Coord) -> Result<PadicScalar, Rank1Error> {
    let (Rank1Family::Shift(n), Rank1Family::CrysUnit(k)) = (a.family, b.family) else {
        return Err(Rank1Error::OutOfDomain(
            "pairing takes a shift-side class and a crystalline-side class".into(),
        ));
    };
    if (n as i64) - (k as i64) < 1 {
        return Err(Rank1Error::TargetH2Vanishes(n, k));
    }
    // <alpha*, y*> = 1, <beta*, x*> = 1, the diagonal cells vanish.
    Ok(a.a.mul(&b.b).add(&a.b.mul(&b.a)))
}

/// Kummer-map coordinates in H^1 of Shift(1): kappa(u) = -log(u) alpha* for
/// u = 1 mod p, and kappa(p) = -beta*.
pub fn kummer_coords(u: &PadicScalar, precision: i64) -> Result<H1Coord, Rank1Error> {
    let p = u.prime();
    let family = Rank1Family::Shift(1);
    if let Some(x) = u.as_exact() {
        use num_traits::One;
        if *x == num_rational::BigRational::from_integer(p.into()) {
            return Ok(H1Coord::new(
                family,
                PadicScalar::zero(p),
                PadicScalar::from_int(p, -1),
            ));
        }
        if x.is_one() {
            return Ok(H1Coord::new(family, PadicScalar::zero(p), PadicScalar::zero(p)));
        }
    }
    let log = padic_log(u, precision).map_err(|e| Rank1Error::OutOfDomain(e.to_string()))?;
    Ok(H1Coord::new(family, log.neg(), PadicScalar::zero(p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stcoh::{StClass, StComplex};

    fn q(p: u64, n: i64, d: i64) -> PadicScalar {
        PadicScalar::from_ratio(p, n, d)
    }

    #[test]
    fn family_classification_and_dims() {
        let p = 3;
        // |x| x^m family
        for m in 1..=6u32 {
            let param = Rank1Family::Shift(m).character(p);
            assert_eq!(h_dims(&param).unwrap(), (0, 2, 1, 2));
        }
        // x^{-m} family
        for m in 0..=6u32 {
            let param = Rank1Family::CrysUnit(m).character(p);
            assert_eq!(h_dims(&param).unwrap(), (1, 2, 1, 1));
        }
        // |x| alone (weight 0, delta(p) = p^{-1}) is outside both families
        let bad = CharacterParam { weight: 0, phi_value: q(p, 1, 3) };
        assert!(matches!(h_dims(&bad), Err(Rank1Error::UnsupportedCharacter(_))));
    }

    #[test]
    fn stclass_comparison_basis_images() {
        let p = 3;
        for m in 1..=3u32 {
            let model = Rank1Family::Shift(m).model(p);
            let complex = StComplex::new(&model);
            // cl(1,0,0) -> -alpha*
            let c = StClass::from_parts(
                &complex,
                &[PadicScalar::one(p)],
                &[PadicScalar::zero(p)],
                &[PadicScalar::zero(p)],
            )
            .unwrap();
            let coord = stclass_to_alphabeta(&c).unwrap();
            assert_eq!(coord.a, q(p, -1, 1));
            assert!(coord.b.is_zero());
            // cl(0,0,1) -> -beta*
            let c = StClass::from_parts(
                &complex,
                &[PadicScalar::zero(p)],
                &[PadicScalar::zero(p)],
                &[PadicScalar::one(p)],
            )
            .unwrap();
            let coord = stclass_to_alphabeta(&c).unwrap();
            assert!(coord.a.is_zero());
            assert_eq!(coord.b, q(p, -1, 1));
        }
    }

    #[test]
    fn stclass_comparison_on_the_extension_class() {
        // cl(-lambda, 0, 1) -> lambda alpha* - beta*
        let p = 3;
        let lambda = 2i64;
        let model = Rank1Family::Shift(1).model(p);
        let complex = StComplex::new(&model);
        let c = StClass::from_parts(
            &complex,
            &[q(p, -lambda, 1)],
            &[PadicScalar::zero(p)],
            &[PadicScalar::one(p)],
        )
        .unwrap();
        let coord = stclass_to_alphabeta(&c).unwrap();
        assert_eq!(coord.a, q(p, lambda, 1));
        assert_eq!(coord.b, q(p, -1, 1));
        // zero class
        let z = StClass::zero(&complex);
        let coord = stclass_to_alphabeta(&z).unwrap();
        assert!(coord.is_zero());
    }

    #[test]
    fn comparison_rejects_wrong_parent() {
        let p = 3;
        let model = Rank1Family::CrysUnit(1).model(p);
        let complex = StComplex::new(&model);
        let c = StClass::zero(&complex);
        assert!(matches!(
            stclass_to_alphabeta(&c),
            Err(Rank1Error::WrongParent(_))
        ));
    }

    #[test]
    fn comparison_is_linear() {
        let p = 5;
        let model = Rank1Family::Shift(2).model(p);
        let complex = StComplex::new(&model);
        let c1 = StClass::from_parts(&complex, &[q(p, 3, 1)], &[q(p, 1, 1)], &[q(p, 2, 1)]).unwrap();
        let c2 = StClass::from_parts(&complex, &[q(p, -1, 2)], &[q(p, 0, 1)], &[q(p, 7, 1)]).unwrap();
        let lhs = stclass_to_alphabeta(&c1.add(&c2)).unwrap();
        let r1 = stclass_to_alphabeta(&c1).unwrap();
        let r2 = stclass_to_alphabeta(&c2).unwrap();
        assert_eq!(lhs.a, r1.a.add(&r2.a));
        assert_eq!(lhs.b, r1.b.add(&r2.b));
    }

    #[test]
    fn pairing_table_is_the_permutation_gram_matrix() {
        let p = 3;
        for n in 1..=4u32 {
            for k in 0..n {
                let alpha = H1Coord::new(Rank1Family::Shift(n), PadicScalar::one(p), PadicScalar::zero(p));
                let beta = H1Coord::new(Rank1Family::Shift(n), PadicScalar::zero(p), PadicScalar::one(p));
                let xs = H1Coord::new(Rank1Family::CrysUnit(k), PadicScalar::one(p), PadicScalar::zero(p));
                let ys = H1Coord::new(Rank1Family::CrysUnit(k), PadicScalar::zero(p), PadicScalar::one(p));
                assert!(pair(&alpha, &xs).unwrap().is_zero());
                assert_eq!(pair(&alpha, &ys).unwrap(), PadicScalar::one(p));
                assert_eq!(pair(&beta, &xs).unwrap(), PadicScalar::one(p));
                assert!(pair(&beta, &ys).unwrap().is_zero());
            }
        }
        // vanishing target
        let alpha = H1Coord::new(Rank1Family::Shift(1), PadicScalar::one(p), PadicScalar::zero(p));
        let xs = H1Coord::new(Rank1Family::CrysUnit(1), PadicScalar::one(p), PadicScalar::zero(p));
        assert!(matches!(pair(&alpha, &xs), Err(Rank1Error::TargetH2Vanishes(1, 1))));
    }

    #[test]
    fn pairing_is_perfect() {
        // the Gram matrix [[0,1],[1,0]] is invertible: any class pairing to
        // zero with both x* and y* is zero
        let p = 3;
        let c = H1Coord::new(Rank1Family::Shift(2), q(p, 4, 1), q(p, -5, 3));
        let xs = H1Coord::new(Rank1Family::CrysUnit(1), PadicScalar::one(p), PadicScalar::zero(p));
        let ys = H1Coord::new(Rank1Family::CrysUnit(1), PadicScalar::zero(p), PadicScalar::one(p));
        let px = pair(&c, &xs).unwrap();
        let py = pair(&c, &ys).unwrap();
        assert_eq!(px, c.b);
        assert_eq!(py, c.a);
    }

    #[test]
    fn kummer_values() {
        let p = 3;
        let kp = kummer_coords(&PadicScalar::from_int(p, p as i64), 20).unwrap();
        assert!(kp.a.is_zero());
        assert_eq!(kp.b, q(p, -1, 1));
        let k1 = kummer_coords(&PadicScalar::one(p), 20).unwrap();
        assert!(k1.is_zero());
        let k4 = kummer_coords(&PadicScalar::from_int(p, 4), 20).unwrap();
        let log4 = padic_log(&PadicScalar::from_int(p, 4), 20).unwrap();
        assert_eq!(k4.a, log4.neg());
        assert!(k4.b.is_zero());
        // units not congruent to 1 are out of domain
        assert!(kummer_coords(&PadicScalar::from_int(p, 2), 20).is_err());
    }

    #[test]
    fn extension_coords_match_connecting_rank() {
        // for random extensions of the unit object by a shift model, the
        // rank of the connecting map equals 1 exactly when the coordinate
        // vector of the class is nonzero
        let mut r = crate::sample::rng(77);
        let p = 3;
        for _ in 0..6 {
            let model = Rank1Family::Shift(2).model(p);
            let c = crate::sample::random_st_class(&mut r, &model);
            let coord = stclass_to_alphabeta(&c).unwrap();
            let (x, incl, proj) = crate::stcoh::extension_from_class(&c).unwrap();
            let unit = FilteredPhiNModule::unit(p);
            let seq = crate::stcoh::StrictSequence { sub: &model, mid: &x, quot: &unit, incl, proj };
            let les = crate::stcoh::les_st(&seq).unwrap();
            assert!(les.exact);
            let rank = les.delta0.iter().filter(|c| !c.is_zero()).count();
            assert_eq!(rank == 1, !coord.is_zero());
        }
    }
}
