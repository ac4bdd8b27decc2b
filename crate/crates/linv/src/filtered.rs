//! Filtered (phi,N)-modules over Q_p.
//!
//! A module carries an invertible Frobenius matrix `phi`, a nilpotent
//! monodromy operator `N` with N phi = p phi N, and an exhaustive decreasing
//! filtration stored as a sparse jump list. The filtration lives on the
//! underlying space and is not required to be stable under phi or N.
//!
//! Matrices act on column vectors throughout; column j of `N` is the image
//! of the j-th basis vector.

use crate::error::{LinAlgError, ModuleError};
use crate::linalg::{
    det, kernel, solve_linear, unit_vector, vec_is_zero, vec_sub, QpMatrix, QpVector, QuotientSpace,
    Subspace,
};
use crate::scalar::{check_prime, vp_rational, PadicScalar};

/// Decreasing exhaustive filtration with finitely many jumps.
///
/// Steps are sorted by ascending jump. A step `(j, S)` records `Fil^j = S`;
/// between consecutive jumps the filtration is constant, below the first jump
/// it is the full space, and above the last jump it is zero. Listed
/// subspaces strictly decrease.
#[derive(Clone, Debug, PartialEq)]
pub struct Filtration {
    p: u64,
    ambient: usize,
    steps: Vec<(i64, Subspace)>,
}

impl Filtration {
    pub fn new(p: u64, ambient: usize, mut steps: Vec<(i64, Subspace)>) -> Result<Self, ModuleError> {
        steps.sort_by_key(|(j, _)| *j);
        for w in steps.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(ModuleError::Invalid(format!(
                    "duplicate filtration jump {}",
                    w[0].0
                )));
            }
        }
        let f = Filtration { p, ambient, steps };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<(), ModuleError> {
        if let Some((_, first)) = self.steps.first() {
            if first.dim() != self.ambient {
                return Err(ModuleError::Invalid(
                    "filtration is not exhaustive: lowest step is not the full space".into(),
                ));
            }
        } else {
            return Err(ModuleError::Invalid("empty filtration".into()));
        }
        for w in self.steps.windows(2) {
            let (_, a) = &w[0];
            let (j, b) = &w[1];
            if !a.contains_space(b) {
                return Err(ModuleError::Invalid(format!(
                    "filtration steps are not nested at jump {}",
                    j
                )));
            }
            if a.dim() == b.dim() {
                return Err(ModuleError::Invalid(format!(
                    "filtration step at jump {} does not strictly decrease",
                    j
                )));
            }
        }
        Ok(())
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn steps(&self) -> &[(i64, Subspace)] {
        &self.steps
    }

    /// Fil^i as a subspace.
    pub fn at(&self, i: i64) -> Subspace {
        // Fil^i = S_t for the first step with jump >= i; zero above the last.
        for (j, s) in &self.steps {
            if i <= *j {
                return s.clone();
            }
        }
        Subspace::zero_space(self.p, self.ambient)
    }

    /// All jumps where the filtration drops, with multiplicities.
    pub fn jumps(&self) -> Vec<(i64, usize)> {
        let mut out = Vec::new();
        for (t, (j, s)) in self.steps.iter().enumerate() {
            let next_dim = if t + 1 < self.steps.len() {
                self.steps[t + 1].1.dim()
            } else {
                0
            };
            let mult = s.dim() - next_dim;
            if mult > 0 {
                out.push((*j, mult));
            }
        }
        out
    }

    /// Smallest index i with Fil^i strictly below the full space, minus one;
    /// i.e. the largest i with Fil^i = everything.
    pub fn lowest_jump(&self) -> i64 {
        self.steps[0].0
    }

    pub fn highest_jump(&self) -> i64 {
        self.steps.last().unwrap().0
    }

    /// Image filtration under an invertible change of basis.
    pub fn map(&self, m: &QpMatrix) -> Result<Self, ModuleError> {
        let steps = self
            .steps
            .iter()
            .map(|(j, s)| Ok((*j, s.apply_map(m).map_err(lin_err)?)))
            .collect::<Result<Vec<_>, ModuleError>>()?;
        Filtration::new(self.p, m.rows(), steps)
    }
}

fn lin_err(e: LinAlgError) -> ModuleError {
    ModuleError::Invalid(format!("linear algebra failure: {e}"))
}

/// A finite-dimensional filtered (phi,N)-module over Q_p.
#[derive(Clone, Debug, PartialEq)]
pub struct FilteredPhiNModule {
    p: u64,
    dim: usize,
    phi: QpMatrix,
    n_op: QpMatrix,
    fil: Filtration,
}

/// One validation item: name, pass/fail, detail.
#[derive(Clone, Debug)]
pub struct CheckItem {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub items: Vec<CheckItem>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }
    fn push(&mut self, name: &'static str, pass: bool, detail: impl Into<String>) {
        self.items.push(CheckItem {
            name,
            pass,
            detail: detail.into(),
        });
    }
}

/// Parameter of a continuous character delta of Q_p^*: delta(u) = u^{-weight}
/// on units and delta(p) = phi_value.
#[derive(Clone, Debug, PartialEq)]
pub struct CharacterParam {
    pub weight: i64,
    pub phi_value: PadicScalar,
}

impl CharacterParam {
    /// Frobenius eigenvalue of the associated rank-1 module: delta(p) p^weight.
    pub fn frobenius_eigenvalue(&self) -> PadicScalar {
        self.phi_value.mul(&PadicScalar::p_pow(self.phi_value.prime(), self.weight))
    }
}

impl FilteredPhiNModule {
    pub fn new(
        p: u64,
        phi: QpMatrix,
        n_op: QpMatrix,
        fil: Filtration,
    ) -> Result<Self, ModuleError> {
        check_prime(p).map_err(|e| ModuleError::Invalid(e.to_string()))?;
        let dim = phi.rows();
        if !phi.is_square() || !n_op.is_square() || n_op.rows() != dim || fil.ambient() != dim {
            return Err(ModuleError::Invalid("inconsistent dimensions".into()));
        }
        let m = FilteredPhiNModule { p, dim, phi, n_op, fil };
        let report = m.validate();
        if !report.all_pass() {
            let failing: Vec<&str> = report
                .items
                .iter()
                .filter(|i| !i.pass)
                .map(|i| i.name)
                .collect();
            return Err(ModuleError::Invalid(format!(
                "validation failed: {}",
                failing.join(", ")
            )));
        }
        Ok(m)
    }

    /// Builds without validating; used for error-path tests and reports.
    pub fn new_unchecked(p: u64, phi: QpMatrix, n_op: QpMatrix, fil: Filtration) -> Self {
        let dim = phi.rows();
        FilteredPhiNModule { p, dim, phi, n_op, fil }
    }

    /// Checks every structural invariant, report style.
    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::default();
        rep.push(
            "prime",
            check_prime(self.p).is_ok(),
            format!("p = {}", self.p),
        );
        let invertible = match det(&self.phi) {
            Ok(d) => !d.is_zero(),
            Err(_) => false,
        };
        rep.push("phi_invertible", invertible, "det(phi) != 0");
        // N^dim = 0
        let mut pow = QpMatrix::identity(self.p, self.dim);
        for _ in 0..self.dim {
            pow = pow.matmul(&self.n_op);
        }
        rep.push("n_nilpotent", pow.is_zero(), format!("N^{} = 0", self.dim));
        let lhs = self.n_op.matmul(&self.phi);
        let rhs = self
            .phi
            .matmul(&self.n_op)
            .scale(&PadicScalar::from_int(self.p, self.p as i64));
        rep.push(
            "n_phi_relation",
            lhs == rhs,
            if lhs == rhs {
                "N phi = p phi N".to_string()
            } else {
                "N phi != p phi N".to_string()
            },
        );
        rep.push(
            "filtration",
            self.fil.validate().is_ok(),
            "exhaustive, nested, strictly decreasing at listed jumps",
        );
        rep
    }

    pub fn prime(&self) -> u64 {
        self.p
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn phi(&self) -> &QpMatrix {
        &self.phi
    }
    pub fn n_op(&self) -> &QpMatrix {
        &self.n_op
    }
    pub fn filtration(&self) -> &Filtration {
        &self.fil
    }

    pub fn phi_inverse(&self) -> QpMatrix {
        let p = self.p;
        let cols: Vec<QpVector> = (0..self.dim)
            .map(|j| {
                solve_linear(&self.phi, &unit_vector(p, self.dim, j))
                    .expect("phi is invertible")
                    .0
            })
            .collect();
        QpMatrix::from_rows(p, cols).transpose()
    }

    /// The unit object: one-dimensional, phi = 1, N = 0, jump at 0.
    pub fn unit(p: u64) -> Self {
        let phi = QpMatrix::identity(p, 1);
        let n = QpMatrix::zeros(p, 1, 1);
        let fil = Filtration::new(p, 1, vec![(0, Subspace::full(p, 1))]).unwrap();
        FilteredPhiNModule::new(p, phi, n, fil).unwrap()
    }

    /// Rank-1 module attached to a character parameter: single Hodge jump at
    /// `weight`, Frobenius eigenvalue delta(p) p^weight.
    pub fn from_character(p: u64, param: &CharacterParam) -> Self {
        let alpha = param.frobenius_eigenvalue();
        let mut phi = QpMatrix::zeros(p, 1, 1);
        phi.set(0, 0, alpha);
        let n = QpMatrix::zeros(p, 1, 1);
        let fil = Filtration::new(p, 1, vec![(param.weight, Subspace::full(p, 1))]).unwrap();
        FilteredPhiNModule::new(p, phi, n, fil).unwrap()
    }

    /// Tensor product with the usual filtration, Frobenius and Leibniz N.
    pub fn tensor(&self, other: &Self) -> Result<Self, ModuleError> {
        if self.p != other.p {
            return Err(ModuleError::PrimeMismatch(self.p, other.p));
        }
        let p = self.p;
        let d1 = self.dim;
        let d2 = other.dim;
        let phi = self.phi.kron(&other.phi);
        let n = self
            .n_op
            .kron(&QpMatrix::identity(p, d2))
            .add(&QpMatrix::identity(p, d1).kron(&other.n_op));
        // Fil^i = sum over j+k = i of Fil^j (x) Fil^k, supported on finitely
        // many (j, k) pairs read off the two jump lists.
        let jumps1: Vec<i64> = self.fil.steps().iter().map(|(j, _)| *j).collect();
        let jumps2: Vec<i64> = other.fil.steps().iter().map(|(j, _)| *j).collect();
        let mut candidates: Vec<i64> = Vec::new();
        for a in &jumps1 {
            for b in &jumps2 {
                candidates.push(a + b);
            }
        }
        candidates.sort_unstable();
        candidates.dedup();
        let mut steps: Vec<(i64, Subspace)> = Vec::new();
        for &i in &candidates {
            let mut acc = Subspace::zero_space(p, d1 * d2);
            for &j in &jumps1 {
                let s1 = self.fil.at(j);
                let s2 = other.fil.at(i - j);
                if s1.dim() == 0 || s2.dim() == 0 {
                    continue;
                }
                let mut rows = Vec::new();
                for v in s1.basis_rows() {
                    for w in s2.basis_rows() {
                        rows.push(kron_vec(&v, &w));
                    }
                }
                let piece = Subspace::from_rows(p, d1 * d2, rows).map_err(lin_err)?;
                acc = acc.sum(&piece).map_err(lin_err)?;
            }
            // drop steps equal to the following one to keep drops strict
            if let Some((_, last)) = steps.last() {
                if *last == acc {
                    steps.pop();
                }
            }
            steps.push((i, acc));
        }
        // remove trailing zero-dimensional steps: Fil above the top jump is 0
        while steps.last().map_or(false, |(_, s)| s.dim() == 0) {
            steps.pop();
        }
        let fil = Filtration::new(p, d1 * d2, steps)?;
        FilteredPhiNModule::new(p, phi, n, fil)
    }

    /// Twisted dual: phi^*(f) = p^{-1} f . phi^{-1}, N^* = -N^t, and
    /// Fil^i of the dual is the annihilator of Fil^{-i}. With this index
    /// convention a Hodge jump at w dualizes to a jump at -w-1, the dual of
    /// the unit object is the rank-1 module with Frobenius p^{-1} and jump
    /// -1, and the annihilator of an admissible subspace is admissible for
    /// the dual.
    pub fn dual(&self) -> Result<Self, ModuleError> {
        let p = self.p;
        let phi_star = self
            .phi_inverse()
            .transpose()
            .scale(&PadicScalar::from_ratio(p, 1, p as i64));
        let n_star = self.n_op.transpose().scale(&PadicScalar::from_int(p, -1));
        let mut js: Vec<i64> = self
            .fil
            .steps()
            .iter()
            .flat_map(|(j, _)| [-*j, -*j - 1])
            .collect();
        js.sort_unstable();
        js.dedup();
        let mut steps: Vec<(i64, Subspace)> = Vec::new();
        let mut last_dim = usize::MAX;
        for i in js {
            let ann = annihilator(&self.fil.at(-i)).map_err(lin_err)?;
            if ann.dim() != last_dim {
                last_dim = ann.dim();
                steps.push((i, ann));
            } else if let Some(s) = steps.last_mut() {
                s.0 = i;
            }
        }
        while steps.last().map_or(false, |(_, s): &(i64, Subspace)| s.dim() == 0) {
            steps.pop();
        }
        let fil = Filtration::new(p, self.dim, steps)?;
        FilteredPhiNModule::new(p, phi_star, n_star, fil)
    }

    /// Direct sum with block structures.
    pub fn direct_sum(&self, other: &Self) -> Result<Self, ModuleError> {
        if self.p != other.p {
            return Err(ModuleError::PrimeMismatch(self.p, other.p));
        }
        let p = self.p;
        let d = self.dim + other.dim;
        let embed1 = |v: &QpVector| -> QpVector {
            let mut w = crate::linalg::zero_vector(p, d);
            w[..self.dim].clone_from_slice(v);
            w
        };
        let embed2 = |v: &QpVector| -> QpVector {
            let mut w = crate::linalg::zero_vector(p, d);
            w[self.dim..].clone_from_slice(v);
            w
        };
        let block = |a: &QpMatrix, b: &QpMatrix| {
            QpMatrix::from_fn(p, d, d, |i, j| {
                if i < self.dim && j < self.dim {
                    a.get(i, j).clone()
                } else if i >= self.dim && j >= self.dim {
                    b.get(i - self.dim, j - self.dim).clone()
                } else {
                    PadicScalar::zero(p)
                }
            })
        };
        let phi = block(&self.phi, &other.phi);
        let n = block(&self.n_op, &other.n_op);
        let mut js: Vec<i64> = self
            .fil
            .steps()
            .iter()
            .chain(other.fil.steps())
            .map(|(j, _)| *j)
            .collect();
        js.sort_unstable();
        js.dedup();
        let mut steps = Vec::new();
        for j in js {
            let mut rows: Vec<QpVector> = self.fil.at(j).basis_rows().iter().map(&embed1).collect();
            rows.extend(other.fil.at(j).basis_rows().iter().map(&embed2));
            steps.push((j, Subspace::from_rows(p, d, rows).map_err(lin_err)?));
        }
        let fil = Filtration::new(p, d, steps)?;
        FilteredPhiNModule::new(p, phi, n, fil)
    }

    /// Conjugates every structure by an invertible change of basis.
    pub fn conjugate(&self, pmat: &QpMatrix) -> Result<Self, ModuleError> {
        let p = self.p;
        let pinv_cols: Vec<QpVector> = (0..self.dim)
            .map(|j| {
                solve_linear(pmat, &unit_vector(p, self.dim, j))
                    .map(|(x, _)| x)
                    .map_err(|_| ModuleError::Invalid("conjugation matrix is singular".into()))
            })
            .collect::<Result<_, _>>()?;
        let pinv = QpMatrix::from_rows(p, pinv_cols).transpose();
        let phi = pmat.matmul(&self.phi).matmul(&pinv);
        let n = pmat.matmul(&self.n_op).matmul(&pinv);
        let fil = self.fil.map(pmat)?;
        FilteredPhiNModule::new(p, phi, n, fil)
    }

    /// ker N with the induced Frobenius: the maximal crystalline submodule.
    pub fn crystalline_part(&self) -> Subspace {
        Subspace::from_rows(self.p, self.dim, kernel(&self.n_op).expect("exact kernel"))
            .expect("kernel basis is well-formed")
    }

    /// ker(phi - lambda) as a subspace.
    pub fn eigenspace(&self, lambda: &PadicScalar) -> Subspace {
        let m = self.phi.sub(&QpMatrix::identity(self.p, self.dim).scale(lambda));
        Subspace::from_rows(self.p, self.dim, kernel(&m).expect("exact kernel")).unwrap()
    }

    /// True iff ker(phi - lambda) = ker(phi - lambda)^2.
    pub fn check_semisimple_at(&self, lambda: &PadicScalar) -> bool {
        let m = self.phi.sub(&QpMatrix::identity(self.p, self.dim).scale(lambda));
        let m2 = m.matmul(&m);
        let k1 = kernel(&m).expect("exact kernel").len();
        let k2 = kernel(&m2).expect("exact kernel").len();
        k1 == k2
    }

    /// Semisimplicity of Frobenius at 1 and p^{-1} (condition used by the
    /// canonical filtration).
    pub fn semisimple_at_one_and_p_inv(&self) -> bool {
        self.check_semisimple_at(&PadicScalar::one(self.p))
            && self.check_semisimple_at(&PadicScalar::from_ratio(self.p, 1, self.p as i64))
    }

    pub fn is_stable(&self, s: &Subspace) -> bool {
        s.is_stable_under(&self.phi) && s.is_stable_under(&self.n_op)
    }

    /// Tangent space M / Fil^0 as a coordinatized quotient.
    pub fn tangent(&self) -> QuotientSpace {
        QuotientSpace::new(self.fil.at(0))
    }

    pub fn tangent_dim(&self) -> usize {
        self.dim - self.fil.at(0).dim()
    }

    /// Classifies a rank-1 module by its character parameter.
    pub fn rank1_classify(&self) -> Result<CharacterParam, ModuleError> {
        if self.dim != 1 {
            return Err(ModuleError::Invalid(format!(
                "rank1_classify needs dim 1, got {}",
                self.dim
            )));
        }
        let alpha = self.phi.get(0, 0).clone();
        let k = self.fil.lowest_jump();
        Ok(CharacterParam {
            weight: k,
            phi_value: alpha.mul(&PadicScalar::p_pow(self.p, -k)),
        })
    }

    /// For phi = lambda * id (which forces N = 0), splits the module into
    /// rank-1 characters delta_i(p) = lambda p^{-k_i} indexed by the Hodge
    /// jumps, together with a filtration-adapted splitting basis. Vectors
    /// are listed by jump descending.
    pub fn decompose_scalar_phi(&self) -> Result<Vec<(CharacterParam, QpVector)>, ModuleError> {
        let p = self.p;
        let lambda = self.phi.get(0, 0).clone();
        let scalar_id = QpMatrix::identity(p, self.dim).scale(&lambda);
        if self.phi != scalar_id {
            return Err(ModuleError::PhiNotScalar);
        }
        if !self.n_op.is_zero() {
            return Err(ModuleError::Invalid(
                "N must vanish when phi is scalar".into(),
            ));
        }
        // adapted basis: walk jumps from the deepest filtration step upward
        let mut out = Vec::new();
        let mut jumps: Vec<(i64, usize)> = self.fil.jumps();
        jumps.sort_by_key(|(j, _)| -*j);
        let mut span = Subspace::zero_space(p, self.dim);
        for (j, _) in jumps {
            let fil_j = self.fil.at(j);
            let reps = span.quotient_reps(&fil_j).map_err(lin_err)?;
            for v in reps {
                out.push((
                    CharacterParam {
                        weight: j,
                        phi_value: lambda.mul(&PadicScalar::p_pow(p, -j)),
                    },
                    v.clone(),
                ));
                span = span
                    .sum(&Subspace::from_rows(p, self.dim, vec![v]).map_err(lin_err)?)
                    .map_err(lin_err)?;
            }
        }
        Ok(out)
    }

    /// Translates a full stable flag into rank-1 character parameters: the
    /// Frobenius eigenvalue on each graded line together with the Hodge
    /// weight induced by the flag (the largest index at which the filtration
    /// still meets the flag step outside the previous one).
    pub fn refinement_to_parameters(
        &self,
        flag: &[Subspace],
    ) -> Result<Vec<CharacterParam>, ModuleError> {
        let p = self.p;
        if flag.len() != self.dim {
            return Err(ModuleError::Invalid(format!(
                "flag must have {} steps, got {}",
                self.dim,
                flag.len()
            )));
        }
        let mut prev = Subspace::zero_space(p, self.dim);
        let mut out = Vec::new();
        for (idx, step) in flag.iter().enumerate() {
            if step.dim() != idx + 1 || !step.contains_space(&prev) {
                return Err(ModuleError::Invalid(format!(
                    "flag step {idx} must strictly grow by one dimension"
                )));
            }
            if !self.is_stable(step) {
                return Err(ModuleError::FlagNotStable(idx));
            }
            // Frobenius eigenvalue on the graded line
            let reps = prev.quotient_reps(step).map_err(lin_err)?;
            let v = reps
                .first()
                .ok_or_else(|| ModuleError::Invalid("empty graded piece".into()))?;
            let fv = prev.reduce(&self.phi.apply(v));
            let rv = prev.reduce(v);
            let alpha = proportionality(&fv, &rv).ok_or_else(|| {
                ModuleError::EigenvalueNotRational(format!(
                    "graded Frobenius at step {idx} is not scalar over Q_p"
                ))
            })?;
            // Hodge weight: largest j with Fil^j meeting step outside prev
            let mut weight = None;
            let mut candidates: Vec<i64> =
                self.fil.steps().iter().map(|(j, _)| *j).collect();
            candidates.sort_unstable_by_key(|j| -*j);
            for j in candidates {
                let meet = self.fil.at(j).intersect(step).map_err(lin_err)?;
                if !prev.contains_space(&meet) {
                    weight = Some(j);
                    break;
                }
            }
            let k = weight.ok_or_else(|| {
                ModuleError::Invalid("flag step does not meet the filtration".into())
            })?;
            out.push(CharacterParam {
                weight: k,
                phi_value: alpha.mul(&PadicScalar::p_pow(p, -k)),
            });
            prev = step.clone();
        }
        Ok(out)
    }

    /// Admissibility of a stable subspace D: the projection D -> M / Fil^0
    /// is bijective.
    pub fn admissible_check(&self, d_sub: &Subspace) -> Result<bool, ModuleError> {
        if !self.is_stable(d_sub) {
            return Err(ModuleError::NotPhiNStable);
        }
        let fil0 = self.fil.at(0);
        let meets = d_sub.intersect(&fil0).map_err(lin_err)?;
        Ok(d_sub.dim() == self.tangent_dim() && meets.dim() == 0)
    }

    /// The canonical filtration D_{-1} <= D_0 = D <= D_1 attached to an
    /// admissible D, computed literally:
    ///   D_{-1} = (1 - p^{-1} phi^{-1}) D + N(D^{phi=1})
    ///   D_1    = D + M^{phi=1} /\ N^{-1}(D^{phi=p^{-1}})
    pub fn canonical_filtration(
        &self,
        d_sub: &Subspace,
    ) -> Result<(Subspace, Subspace, Subspace), ModuleError> {
        if !self.semisimple_at_one_and_p_inv() {
            return Err(ModuleError::PreconditionFailed(
                "Frobenius is not semisimple at 1 and p^{-1}".into(),
            ));
        }
        if !self.admissible_check(d_sub)? {
            return Err(ModuleError::PreconditionFailed(
                "subspace is not admissible".into(),
            ));
        }
        let p = self.p;
        let one = PadicScalar::one(p);
        let p_inv = PadicScalar::from_ratio(p, 1, p as i64);
        let phi_inv = self.phi_inverse();
        let op = QpMatrix::identity(p, self.dim).sub(&phi_inv.scale(&p_inv));
        let eig1 = self.eigenspace(&one);
        let eig_pinv = self.eigenspace(&p_inv);

        let part1 = d_sub.apply_map(&op).map_err(lin_err)?;
        let d_phi1 = d_sub.intersect(&eig1).map_err(lin_err)?;
        let part2 = d_phi1.apply_map(&self.n_op).map_err(lin_err)?;
        let d_minus = part1.sum(&part2).map_err(lin_err)?;

        let d_pinv = d_sub.intersect(&eig_pinv).map_err(lin_err)?;
        let n_preimage = preimage(&self.n_op, &d_pinv).map_err(lin_err)?;
        let y = eig1.intersect(&n_preimage).map_err(lin_err)?;
        let d_plus = d_sub.sum(&y).map_err(lin_err)?;
        Ok((d_minus, d_sub.clone(), d_plus))
    }

    /// Checks the three characterizing properties of the canonical
    /// filtration, report style.
    pub fn verify_filtration_properties(
        &self,
        d_sub: &Subspace,
        triple: &(Subspace, Subspace, Subspace),
    ) -> ValidationReport {
        let p = self.p;
        let (dm, d0, d1) = triple;
        let mut rep = ValidationReport::default();
        rep.push("D1_endpoints", d0 == d_sub, "D_0 = D");
        rep.push(
            "nesting",
            d0.contains_space(dm) && d1.contains_space(d0),
            "D_{-1} <= D_0 <= D_1",
        );
        rep.push(
            "stability",
            self.is_stable(dm) && self.is_stable(d0) && self.is_stable(d1),
            "each step is phi- and N-stable",
        );
        // D2a: (M/D_1)^{phi=1, N=0} = 0
        let d2a = match self.quotient_fixed_part(d1) {
            Ok(dim) => dim == 0,
            Err(_) => false,
        };
        rep.push("D2_quotient_has_no_invariants", d2a, "(M/D_1)^{phi=1,N=0} = 0");
        // D2b: D_{-1} = (1 - p^{-1} phi^{-1}) D_{-1} + N(D_{-1})
        let p_inv = PadicScalar::from_ratio(p, 1, p as i64);
        let op = QpMatrix::identity(p, self.dim).sub(&self.phi_inverse().scale(&p_inv));
        let d2b = match (dm.apply_map(&op), dm.apply_map(&self.n_op)) {
            (Ok(a), Ok(b)) => a.sum(&b).map(|s| s == *dm).unwrap_or(false),
            _ => false,
        };
        rep.push("D2_regeneration", d2b, "D_{-1} = (1-p^{-1}phi^{-1})D_{-1} + N(D_{-1})");
        // D3: (D_0/D_{-1})^{phi=p^{-1}} full and (D_1/D_0)^{phi=1} full
        let d3a = self.quotient_is_eigen(dm, d0, &p_inv);
        let d3b = self.quotient_is_eigen(d0, d1, &PadicScalar::one(p));
        rep.push("D3_lower_graded", d3a, "(D_0/D_{-1})^{phi=p^{-1}} = D_0/D_{-1}");
        rep.push("D3_upper_graded", d3b, "(D_1/D_0)^{phi=1} = D_1/D_0");
        rep
    }

    /// dim of (M/S)^{phi=1, N=0} for a stable S.
    fn quotient_fixed_part(&self, s: &Subspace) -> Result<usize, ModuleError> {
        let p = self.p;
        let q = QuotientSpace::new(s.clone());
        let n = q.dim();
        if n == 0 {
            return Ok(0);
        }
        // matrices of induced phi - 1 and N in quotient coordinates
        let mut rows_phi = Vec::with_capacity(n);
        let mut rows_n = Vec::with_capacity(n);
        for k in 0..n {
            let e = q.lift(&unit_vector(p, n, k));
            let phi_e = q.coords(&self.phi.apply(&e));
            let n_e = q.coords(&self.n_op.apply(&e));
            rows_phi.push(phi_e);
            rows_n.push(n_e);
        }
        let phi_bar = QpMatrix::from_rows(p, rows_phi).transpose();
        let n_bar = QpMatrix::from_rows(p, rows_n).transpose();
        let phi_minus_1 = phi_bar.sub(&QpMatrix::identity(p, n));
        // stack [phi-1; N] and take the kernel
        let stacked = QpMatrix::from_fn(p, 2 * n, n, |i, j| {
            if i < n {
                phi_minus_1.get(i, j).clone()
            } else {
                n_bar.get(i - n, j).clone()
            }
        });
        Ok(kernel(&stacked).map_err(lin_err)?.len())
    }

    /// Whether phi acts as the scalar lambda on big/small.
    fn quotient_is_eigen(&self, small: &Subspace, big: &Subspace, lambda: &PadicScalar) -> bool {
        match small.quotient_reps(big) {
            Ok(reps) => reps.iter().all(|v| {
                let w = vec_sub(&self.phi.apply(v), &crate::linalg::vec_scale(lambda, v));
                small.contains(&w)
            }),
            Err(_) => false,
        }
    }

    /// Verifies that the canonical filtration of the dual at ann(D) consists
    /// of the annihilators of the canonical filtration of (M, D).
    pub fn dual_filtration_check(&self, d_sub: &Subspace) -> Result<bool, ModuleError> {
        let (dm, d0, d1) = self.canonical_filtration(d_sub)?;
        let dual = self.dual()?;
        let d_star = annihilator(d_sub).map_err(lin_err)?;
        let (em, e0, e1) = dual.canonical_filtration(&d_star)?;
        Ok(em == annihilator(&d1).map_err(lin_err)?
            && e0 == annihilator(&d0).map_err(lin_err)?
            && e1 == annihilator(&dm).map_err(lin_err)?)
    }

    /// Hodge numbers, Newton slopes (valuation data), and the weak
    /// admissibility flag checked over the lattice generated by rational
    /// eigenvectors.
    pub fn hodge_newton(&self) -> HodgeNewton {
        let p = self.p;
        let t_h: i64 = self.fil.jumps().iter().map(|(j, m)| j * *m as i64).sum();
        let det_phi = det(&self.phi).expect("phi exact");
        let t_n = vp_rational(det_phi.as_exact().expect("exact pipeline"), p);
        let hodge = self.fil.jumps();
        // rational eigenvalues by rational root search on the char poly
        let eigen = self.rational_eigen_data();
        let mut admissible = t_h == t_n;
        let mut checked_lattice = true;
        if admissible {
            let mut vectors: Vec<QpVector> = Vec::new();
            for (_, basis) in &eigen {
                vectors.extend(basis.iter().cloned());
            }
            if vectors.len() > 16 {
                checked_lattice = false;
            } else {
                for mask in 1u32..(1 << vectors.len()) {
                    let rows: Vec<QpVector> = vectors
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask & (1 << i) != 0)
                        .map(|(_, v)| v.clone())
                        .collect();
                    let sub = Subspace::from_rows(p, self.dim, rows).expect("well-formed");
                    if !self.is_stable(&sub) || sub.dim() == 0 {
                        continue;
                    }
                    let th_sub: i64 = {
                        let mut acc = 0i64;
                        let mut prev_dim = sub.dim();
                        let mut steps: Vec<(i64, usize)> = Vec::new();
                        let mut all_jumps: Vec<i64> =
                            self.fil.steps().iter().map(|(j, _)| *j).collect();
                        all_jumps.sort_unstable();
                        for j in all_jumps {
                            let dim_j = self
                                .fil
                                .at(j + 1)
                                .intersect(&sub)
                                .map(|s| s.dim())
                                .unwrap_or(0);
                            if dim_j < prev_dim {
                                steps.push((j, prev_dim - dim_j));
                                prev_dim = dim_j;
                            }
                        }
                        for (j, m) in steps {
                            acc += j * m as i64;
                        }
                        acc
                    };
                    let tn_sub: i64 = {
                        // det of phi restricted to sub
                        let basis = sub.basis_rows();
                        let coords: Vec<QpVector> = basis
                            .iter()
                            .map(|v| sub.coordinates(&self.phi.apply(v)).expect("stable"))
                            .collect();
                        let m = QpMatrix::from_rows(p, coords).transpose();
                        let d = det(&m).expect("exact");
                        vp_rational(d.as_exact().expect("exact"), p)
                    };
                    if th_sub > tn_sub {
                        admissible = false;
                        break;
                    }
                }
            }
        }
        HodgeNewton {
            hodge_jumps: hodge,
            newton_valuation: t_n,
            hodge_total: t_h,
            weakly_admissible: admissible,
            lattice_fully_checked: checked_lattice,
        }
    }

    /// Rational eigenvalues (found by rational-root search on the
    /// characteristic polynomial) with eigenvector bases.
    pub fn rational_eigen_data(&self) -> Vec<(PadicScalar, Vec<QpVector>)> {
        let p = self.p;
        let charpoly = char_poly(&self.phi);
        let roots = rational_roots(&charpoly);
        roots
            .into_iter()
            .filter_map(|r| {
                let lam = PadicScalar::from_rational(p, r);
                let es = self.eigenspace(&lam);
                if es.dim() > 0 {
                    Some((lam, es.basis_rows()))
                } else {
                    None
                }
            })
            .collect()
    }

    /// Restriction of structures to a stable subspace, in its echelon basis.
    pub fn submodule(&self, s: &Subspace) -> Result<(FilteredPhiNModule, Vec<QpVector>), ModuleError> {
        if !self.is_stable(s) {
            return Err(ModuleError::NotPhiNStable);
        }
        let p = self.p;
        let basis = s.basis_rows();
        let k = basis.len();
        let coord_map = |v: &QpVector| s.coordinates(v).expect("stable subspace");
        let phi_rows: Vec<QpVector> = basis.iter().map(|v| coord_map(&self.phi.apply(v))).collect();
        let n_rows: Vec<QpVector> = basis.iter().map(|v| coord_map(&self.n_op.apply(v))).collect();
        let phi = QpMatrix::from_rows(p, phi_rows).transpose();
        let n = QpMatrix::from_rows(p, n_rows).transpose();
        let mut steps = Vec::new();
        let mut last_dim = usize::MAX;
        for (j, _) in self.fil.steps() {
            let inter = self.fil.at(*j).intersect(s).map_err(lin_err)?;
            let rows: Vec<QpVector> = inter.basis_rows().iter().map(|v| coord_map(v)).collect();
            let sub = Subspace::from_rows(p, k, rows).map_err(lin_err)?;
            if sub.dim() != last_dim {
                last_dim = sub.dim();
                steps.push((*j, sub));
            } else if let Some(step) = steps.last_mut() {
                step.0 = *j;
            }
        }
        while steps.last().map_or(false, |(_, s)| s.dim() == 0) {
            steps.pop();
        }
        let fil = Filtration::new(p, k, steps)?;
        Ok((FilteredPhiNModule::new(p, phi, n, fil)?, basis))
    }

    /// Quotient by a stable subspace, with the coordinate map.
    pub fn quotient_module(&self, s: &Subspace) -> Result<(FilteredPhiNModule, QuotientSpace), ModuleError> {
        if !self.is_stable(s) {
            return Err(ModuleError::NotPhiNStable);
        }
        let p = self.p;
        let q = QuotientSpace::new(s.clone());
        let n_dim = q.dim();
        let mut phi_rows = Vec::with_capacity(n_dim);
        let mut n_rows = Vec::with_capacity(n_dim);
        for k in 0..n_dim {
            let e = q.lift(&unit_vector(p, n_dim, k));
            phi_rows.push(q.coords(&self.phi.apply(&e)));
            n_rows.push(q.coords(&self.n_op.apply(&e)));
        }
        let phi = QpMatrix::from_rows(p, phi_rows).transpose();
        let n = QpMatrix::from_rows(p, n_rows).transpose();
        let mut steps: Vec<(i64, Subspace)> = Vec::new();
        let mut last_dim = usize::MAX;
        for (j, _) in self.fil.steps() {
            let rows: Vec<QpVector> = self
                .fil
                .at(*j)
                .basis_rows()
                .iter()
                .map(|v| q.coords(v))
                .collect();
            let sub = Subspace::from_rows(p, n_dim, rows).map_err(lin_err)?;
            if sub.dim() != last_dim {
                last_dim = sub.dim();
                steps.push((*j, sub));
            } else if let Some(step) = steps.last_mut() {
                step.0 = *j;
            }
        }
        while steps.last().map_or(false, |(_, s)| s.dim() == 0) {
            steps.pop();
        }
        let fil = Filtration::new(p, n_dim, steps)?;
        Ok((FilteredPhiNModule::new(p, phi, n, fil)?, q))
    }
}

/// Hodge/Newton summary.
#[derive(Clone, Debug)]
pub struct HodgeNewton {
    pub hodge_jumps: Vec<(i64, usize)>,
    pub newton_valuation: i64,
    pub hodge_total: i64,
    pub weakly_admissible: bool,
    pub lattice_fully_checked: bool,
}

/// v in fv = alpha * rv: the scalar if the vectors are proportional.
fn proportionality(fv: &[PadicScalar], rv: &[PadicScalar]) -> Option<PadicScalar> {
    let k = rv.iter().position(|x| !x.is_zero())?;
    let alpha = fv[k].div(&rv[k]).ok()?;
    let diff = vec_sub(fv, &crate::linalg::vec_scale(&alpha, rv));
    if vec_is_zero(&diff) {
        Some(alpha)
    } else {
        None
    }
}

/// Annihilator of a subspace: functionals vanishing on it (row-vector
/// coordinates in the dual basis).
pub fn annihilator(s: &Subspace) -> Result<Subspace, LinAlgError> {
    let rows = kernel(s.basis_matrix())?;
    Subspace::from_rows(s.prime(), s.ambient(), rows)
}

/// Preimage of a subspace under a linear map: { v : m v in s }.
pub fn preimage(m: &QpMatrix, s: &Subspace) -> Result<Subspace, LinAlgError> {
    let p = m.prime();
    let q = QuotientSpace::new(s.clone());
    let n = m.cols();
    let mut rows = Vec::with_capacity(n);
    for j in 0..n {
        rows.push(q.coords(&m.col(j)));
    }
    // constraint matrix has these as columns
    let c = QpMatrix::from_rows(p, rows).transpose();
    Subspace::from_rows(p, n, kernel(&c)?)
}

/// Kronecker product of coordinate vectors.
pub fn kron_vec(a: &[PadicScalar], b: &[PadicScalar]) -> QpVector {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x.mul(y));
        }
    }
    out
}

/// Characteristic polynomial by the Faddeev–LeVerrier recurrence;
/// coefficients returned from the constant term up.
pub fn char_poly(m: &QpMatrix) -> Vec<num_rational::BigRational> {
    use num_rational::BigRational;
    use num_traits::{One, Zero};
    let n = m.rows();
    let p = m.prime();
    let mut a_k = m.clone();
    let mut cs = vec![BigRational::one()]; // leading coefficient
    for k in 1..=n {
        let mut tr = BigRational::zero();
        for i in 0..n {
            tr += a_k.get(i, i).as_exact().expect("exact pipeline").clone();
        }
        let ck = -tr / BigRational::from_integer(k.into());
        cs.push(ck.clone());
        if k < n {
            let ck_scalar = PadicScalar::from_rational(p, ck);
            let adj = a_k.add(&QpMatrix::identity(p, n).scale(&ck_scalar));
            a_k = m.matmul(&adj);
        }
    }
    // cs = [1, c_{n-1}, ..., c_0] for x^n + c_{n-1} x^{n-1} + ... + c_0
    let mut out = vec![BigRational::zero(); n + 1];
    for (i, c) in cs.into_iter().enumerate() {
        out[n - i] = c;
    }
    out
}

/// Rational roots of a polynomial with rational coefficients (constant term
/// first). Complete when the divisor enumeration stays within bounds.
pub fn rational_roots(coeffs: &[num_rational::BigRational]) -> Vec<num_rational::BigRational> {
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{Signed, Zero};
    // clear denominators
    let mut lcm = BigInt::from(1);
    for c in coeffs {
        lcm = num_integer::Integer::lcm(&lcm, c.denom());
    }
    let ints: Vec<BigInt> = coeffs
        .iter()
        .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
        .collect();
    // strip zero roots
    let mut low = 0usize;
    while low < ints.len() && ints[low].is_zero() {
        low += 1;
    }
    let mut roots = Vec::new();
    if low > 0 {
        roots.push(BigRational::zero());
    }
    if low >= ints.len() {
        return roots;
    }
    let a0 = ints[low].abs();
    let an = ints.last().unwrap().abs();
    let d0 = small_divisors(&a0);
    let dn = small_divisors(&an);
    let eval = |x: &BigRational| -> BigRational {
        let mut acc = BigRational::zero();
        for c in coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    };
    for n in &d0 {
        for d in &dn {
            for sign in [1i64, -1] {
                let cand = BigRational::new(n * BigInt::from(sign), d.clone());
                if eval(&cand).is_zero() && !roots.contains(&cand) {
                    roots.push(cand);
                }
            }
        }
    }
    roots
}

fn small_divisors(n: &num_bigint::BigInt) -> Vec<num_bigint::BigInt> {
    use num_bigint::BigInt;
    use num_traits::{One, Zero};
    let mut out = vec![BigInt::one()];
    if n.is_zero() {
        return out;
    }
    let cap = BigInt::from(1_000_000u64);
    let mut d = BigInt::from(2u64);
    let mut m = n.clone();
    let mut primes: Vec<(BigInt, u32)> = Vec::new();
    while &d * &d <= m && d <= cap {
        let mut e = 0u32;
        while num_integer::Integer::is_multiple_of(&m, &d) {
            m /= &d;
            e += 1;
        }
        if e > 0 {
            primes.push((d.clone(), e));
        }
        d += 1;
    }
    if !m.is_one() {
        primes.push((m, 1));
    }
    for (q, e) in primes {
        let base = out.clone();
        let mut qq = BigInt::one();
        for _ in 0..e {
            qq *= &q;
            for b in &base {
                out.push(b * &qq);
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vec_scale;

    fn q(p: u64, n: i64, d: i64) -> PadicScalar {
        PadicScalar::from_ratio(p, n, d)
    }

    fn vec(p: u64, xs: &[i64]) -> QpVector {
        xs.iter().map(|&x| PadicScalar::from_int(p, x)).collect()
    }

    /// The two-dimensional semistable module with phi = diag(p^{-1}, 1),
    /// N e2 = e1, and the middle filtration line spanned by e2 - lambda e1
    /// on the jump window (-k, k-1].
    fn vk_module(p: u64, k: i64, lambda: (i64, i64)) -> FilteredPhiNModule {
        let phi = QpMatrix::from_i64(p, &[&[(1, p as i64), (0, 1)], &[(0, 1), (1, 1)]]);
        let n = QpMatrix::from_i64(p, &[&[(0, 1), (1, 1)], &[(0, 1), (0, 1)]]);
        let line = Subspace::from_rows(
            p,
            2,
            vec![vec![q(p, -lambda.0, lambda.1), PadicScalar::one(p)]],
        )
        .unwrap();
        let fil = Filtration::new(
            p,
            2,
            vec![(-k, Subspace::full(p, 2)), (k - 1, line)],
        )
        .unwrap();
        FilteredPhiNModule::new(p, phi, n, fil).unwrap()
    }

    /// Weight-2k companion: phi = diag(p^{k-1}, p^k), N d2 = d1, middle line
    /// d2 - lambda d1 on (0, 2k-1].
    fn weight2k_module(p: u64, k: i64, lambda: i64) -> FilteredPhiNModule {
        let pk1 = PadicScalar::p_pow(p, k - 1);
        let pk = PadicScalar::p_pow(p, k);
        let mut phi = QpMatrix::zeros(p, 2, 2);
        phi.set(0, 0, pk1);
        phi.set(1, 1, pk);
        let n = QpMatrix::from_i64(p, &[&[(0, 1), (1, 1)], &[(0, 1), (0, 1)]]);
        let line = Subspace::from_rows(p, 2, vec![vec![q(p, -lambda, 1), PadicScalar::one(p)]]).unwrap();
        let fil = Filtration::new(p, 2, vec![(0, Subspace::full(p, 2)), (2 * k - 1, line)]).unwrap();
        FilteredPhiNModule::new(p, phi, n, fil).unwrap()
    }

    #[test]
    fn validate_semistable_shape() {
        let m = vk_module(3, 1, (2, 1));
        assert!(m.validate().all_pass());
    }

    #[test]
    fn validate_crystalline() {
        let p = 5;
        let phi = QpMatrix::from_i64(p, &[&[(2, 1), (1, 1)], &[(0, 1), (7, 1)]]);
        let n = QpMatrix::zeros(p, 2, 2);
        let fil = Filtration::new(p, 2, vec![(0, Subspace::full(p, 2))]).unwrap();
        assert!(FilteredPhiNModule::new(p, phi, n, fil).unwrap().validate().all_pass());
    }

    #[test]
    fn validate_names_broken_relation() {
        // phi = identity with nonzero N violates N phi = p phi N
        let p = 3;
        let phi = QpMatrix::identity(p, 2);
        let n = QpMatrix::from_i64(p, &[&[(0, 1), (0, 1)], &[(1, 1), (0, 1)]]);
        let fil = Filtration::new(p, 2, vec![(0, Subspace::full(p, 2))]).unwrap();
        let m = FilteredPhiNModule::new_unchecked(p, phi, n, fil);
        let rep = m.validate();
        assert!(!rep.all_pass());
        let failed: Vec<_> = rep.items.iter().filter(|i| !i.pass).map(|i| i.name).collect();
        assert_eq!(failed, vec!["n_phi_relation"]);
    }

    #[test]
    fn unit_is_a_unit_for_tensor() {
        let p = 3;
        let m = vk_module(p, 2, (1, 1));
        let u = FilteredPhiNModule::unit(p);
        assert_eq!(u.tensor(&m).unwrap(), m);
        assert_eq!(m.tensor(&u).unwrap(), m);
    }

    #[test]
    fn biduality() {
        let m = vk_module(3, 1, (2, 1));
        assert_eq!(m.dual().unwrap().dual().unwrap(), m);
        let m2 = weight2k_module(5, 2, 3);
        assert_eq!(m2.dual().unwrap().dual().unwrap(), m2);
    }

    #[test]
    fn dual_of_quotient_line_has_p_inverse_frobenius() {
        // functionals vanishing on D = span(e1) inside the dual of the
        // two-dimensional semistable module: phi^* acts by p^{-1} there
        let p = 3;
        let m = vk_module(p, 1, (2, 1));
        let dual = m.dual().unwrap();
        let d = Subspace::from_rows(p, 2, vec![vec(p, &[1, 0])]).unwrap();
        let ann = annihilator(&d).unwrap();
        assert_eq!(ann.dim(), 1);
        let v = &ann.basis_rows()[0];
        let fv = dual.phi().apply(v);
        let expected = vec_scale(&q(p, 1, p as i64), v);
        assert_eq!(fv, expected);
    }

    #[test]
    fn tensor_dual_compatibility() {
        // Each dual carries one cyclotomic twist, so dualizing a tensor
        // product picks up exactly one twist less than tensoring the duals:
        // dual(M1) (x) dual(M2) = dual(M1 (x) M2) (x) T where T is the
        // rank-1 module with Frobenius p^{-1} and Hodge jump -1.
        let p = 3;
        let m1 = vk_module(p, 1, (2, 1));
        let m2 = FilteredPhiNModule::from_character(
            p,
            &CharacterParam { weight: 1, phi_value: PadicScalar::p_pow(p, -1) },
        );
        let twist = FilteredPhiNModule::from_character(
            p,
            &CharacterParam { weight: -1, phi_value: PadicScalar::one(p) },
        );
        let lhs = m1.dual().unwrap().tensor(&m2.dual().unwrap()).unwrap();
        let rhs = m1.tensor(&m2).unwrap().dual().unwrap().tensor(&twist).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn semisimplicity_checks() {
        let p = 3;
        let diag = {
            let mut phi = QpMatrix::zeros(p, 2, 2);
            phi.set(0, 0, PadicScalar::one(p));
            phi.set(1, 1, q(p, 1, 3));
            let fil = Filtration::new(p, 2, vec![(0, Subspace::full(p, 2))]).unwrap();
            FilteredPhiNModule::new(p, phi, QpMatrix::zeros(p, 2, 2), fil).unwrap()
        };
        assert!(diag.check_semisimple_at(&PadicScalar::one(p)));
        assert!(diag.check_semisimple_at(&q(p, 1, 3)));
        let jordan = {
            let phi = QpMatrix::from_i64(p, &[&[(1, 1), (1, 1)], &[(0, 1), (1, 1)]]);
            let fil = Filtration::new(p, 2, vec![(0, Subspace::full(p, 2))]).unwrap();
            FilteredPhiNModule::new(p, phi, QpMatrix::zeros(p, 2, 2), fil).unwrap()
        };
        assert!(!jordan.check_semisimple_at(&PadicScalar::one(p)));
        let m = vk_module(p, 1, (2, 1));
        assert!(m.semisimple_at_one_and_p_inv());
    }

    #[test]
    fn rank1_classification() {
        let p = 3;
        // alpha = p^{-1}, jump -k: delta(p) = p^{k-1}, weight -k
        for k in 1..=3i64 {
            let m = FilteredPhiNModule::new(
                p,
                QpMatrix::from_i64(p, &[&[(1, p as i64)]]),
                QpMatrix::zeros(p, 1, 1),
                Filtration::new(p, 1, vec![(-k, Subspace::full(p, 1))]).unwrap(),
            )
            .unwrap();
            let c = m.rank1_classify().unwrap();
            assert_eq!(c.weight, -k);
            assert_eq!(c.phi_value, PadicScalar::p_pow(p, k - 1));
        }
        // alpha = 1, jump k-1: delta = x^{1-k}
        let k = 3i64;
        let m = FilteredPhiNModule::new(
            p,
            QpMatrix::identity(p, 1),
            QpMatrix::zeros(p, 1, 1),
            Filtration::new(p, 1, vec![(k - 1, Subspace::full(p, 1))]).unwrap(),
        )
        .unwrap();
        let c = m.rank1_classify().unwrap();
        assert_eq!(c.weight, k - 1);
        assert_eq!(c.phi_value, PadicScalar::p_pow(p, 1 - k));
        // alpha = 1, jump 0: the unit object
        let u = FilteredPhiNModule::unit(p);
        let c = u.rank1_classify().unwrap();
        assert_eq!(c.weight, 0);
        assert_eq!(c.phi_value, PadicScalar::one(p));
        assert_eq!(FilteredPhiNModule::from_character(p, &c), u);
    }

    #[test]
    fn scalar_phi_decomposition() {
        let p = 3;
        // lambda = 1, jumps (0, -1)
        let fil = Filtration::new(
            p,
            2,
            vec![
                (-1, Subspace::full(p, 2)),
                (0, Subspace::from_rows(p, 2, vec![vec(p, &[1, 0])]).unwrap()),
            ],
        )
        .unwrap();
        let m = FilteredPhiNModule::new(p, QpMatrix::identity(p, 2), QpMatrix::zeros(p, 2, 2), fil)
            .unwrap();
        let parts = m.decompose_scalar_phi().unwrap();
        assert_eq!(parts.len(), 2);
        // listed by jump descending: weight 0 first, then weight -1
        assert_eq!(parts[0].0.weight, 0);
        assert_eq!(parts[0].0.phi_value, PadicScalar::one(p));
        assert_eq!(parts[1].0.weight, -1);
        assert_eq!(parts[1].0.phi_value, PadicScalar::from_int(p, p as i64));
        // the splitting basis is filtration-adapted
        assert!(m.filtration().at(0).contains(&parts[0].1));

        // lambda = p^{-1}, single jump -m
        let m1 = FilteredPhiNModule::new(
            p,
            QpMatrix::from_i64(p, &[&[(1, 3)]]),
            QpMatrix::zeros(p, 1, 1),
            Filtration::new(p, 1, vec![(-2, Subspace::full(p, 1))]).unwrap(),
        )
        .unwrap();
        let parts = m1.decompose_scalar_phi().unwrap();
        assert_eq!(parts[0].0.weight, -2);
        assert_eq!(parts[0].0.phi_value, PadicScalar::from_int(p, 3));
        // consistency with rank1_classify in dimension 1
        assert_eq!(parts[0].0, m1.rank1_classify().unwrap());

        // non-scalar phi is rejected
        let bad = vk_module(p, 1, (1, 1));
        assert!(matches!(bad.decompose_scalar_phi(), Err(ModuleError::PhiNotScalar)));
    }

    #[test]
    fn refinement_parameters_for_weight2k() {
        let p = 3;
        let k = 2i64;
        let m = weight2k_module(p, k, 3);
        let flag = vec![
            Subspace::from_rows(p, 2, vec![vec(p, &[1, 0])]).unwrap(),
            Subspace::full(p, 2),
        ];
        let params = m.refinement_to_parameters(&flag).unwrap();
        // (alpha_1 = p^{k-1}, k_1 = 0) and (alpha_2 = p^k, k_2 = 2k-1)
        assert_eq!(params[0].weight, 0);
        assert_eq!(params[0].phi_value, PadicScalar::p_pow(p, k - 1));
        assert_eq!(params[1].weight, 2 * k - 1);
        assert_eq!(params[1].phi_value, PadicScalar::p_pow(p, 1 - k));
    }

    #[test]
    fn refinement_of_split_module_matches_rank1() {
        let p = 5;
        let a = FilteredPhiNModule::from_character(
            p,
            &CharacterParam { weight: -1, phi_value: PadicScalar::one(p) },
        );
        let b = FilteredPhiNModule::from_character(
            p,
            &CharacterParam { weight: 2, phi_value: q(p, 2, 1) },
        );
        let m = a.direct_sum(&b).unwrap();
        let flag = vec![
            Subspace::from_rows(p, 2, vec![vec(p, &[1, 0])]).unwrap(),
            Subspace::full(p, 2),
        ];
        let params = m.refinement_to_parameters(&flag).unwrap();
        assert_eq!(params[0], a.rank1_classify().unwrap());
        assert_eq!(params[1], b.rank1_classify().unwrap());
    }

    #[test]
    fn unstable_flag_rejected() {
        let p = 3;
        let m = vk_module(p, 1, (2, 1));
        // span(e2) is not N-stable: N e2 = e1
        let flag = vec![
            Subspace::from_rows(p, 2, vec![vec(p, &[0, 1])]).unwrap(),
            Subspace::full(p, 2),
        ];
        assert!(matches!(
            m.refinement_to_parameters(&flag),
            Err(ModuleError::FlagNotStable(0))
        ));
    }

    #[test]
    fn admissibility() {
        let p = 3;
        let m = vk_module(p, 1, (2, 1));
        let d = Subspace::from_rows(p, 2, vec![vec(p, &[1, 0])]).unwrap();
        assert!(m.admissible_check(&d).unwrap());
        // the zero subspace fails when the tangent space is nonzero
        let zero = Subspace::zero_space(p, 2);
        assert!(!m.admissible_check(&zero).unwrap());
        // a stable line inside Fil^0 fails by the intersection criterion
        let phi = QpMatrix::from_i64(p, &[&[(1, 1), (0, 1)], &[(0, 1), (1, 3)]]);
        let fil = Filtration::new(
            p,
            2,
            vec![
                (-1, Subspace::full(p, 2)),
                (0, Subspace::from_rows(p, 2, vec![vec(p, &[1, 0])]).unwrap()),
            ],
        )
        .unwrap();
        let m2 = FilteredPhiNModule::new(p, phi, QpMatrix::zeros(p, 2, 2), fil).unwrap();
        let fil0_line = Subspace::from_rows(p, 2, vec![vec(p, &[1, 0])]).unwrap();
        assert!(!m2.admissible_check(&fil0_line).unwrap());
    }

    #[test]
    fn canonical_filtration_on_vk() {
        let p = 3;
        let m = vk_module(p, 1, (2, 1));
        let d = Subspace::from_rows(p, 2, vec![vec(p, &[1, 0])]).unwrap();
        let (dm, d0, d1) = m.canonical_filtration(&d).unwrap();
        assert_eq!(dm.dim(), 0);
        assert_eq!(d0, d);
        assert_eq!(d1.dim(), 2);
        let rep = m.verify_filtration_properties(&d, &(dm, d0, d1));
        assert!(rep.all_pass(), "{:?}", rep.items);
    }

    #[test]
    fn canonical_filtration_collapses_for_full_tangent() {
        // all Hodge jumps negative: Fil^0 = 0, D = M is admissible
        let p = 3;
        let mut phi = QpMatrix::zeros(p, 2, 2);
        phi.set(0, 0, q(p, 1, 3));
        phi.set(1, 1, q(p, 2, 3));
        let fil = Filtration::new(p, 2, vec![(-1, Subspace::full(p, 2))]).unwrap();
        let m = FilteredPhiNModule::new(p, phi, QpMatrix::zeros(p, 2, 2), fil).unwrap();
        let d = Subspace::full(p, 2);
        let (_, d0, d1) = m.canonical_filtration(&d).unwrap();
        assert_eq!(d0.dim(), 2);
        assert_eq!(d1.dim(), 2);
    }

    #[test]
    fn perturbed_triples_fail_verification() {
        let p = 3;
        let m = vk_module(p, 1, (2, 1));
        let d = Subspace::from_rows(p, 2, vec![vec(p, &[1, 0])]).unwrap();
        let (dm, d0, d1) = m.canonical_filtration(&d).unwrap();
        // dropping the phi = 1 line from D_1 breaks D2
        let bad = (dm.clone(), d0.clone(), d0.clone());
        let rep = m.verify_filtration_properties(&d, &bad);
        assert!(rep.items.iter().any(|i| i.name == "D2_quotient_has_no_invariants" && !i.pass));
        // wrong middle step breaks D1
        let bad2 = (dm, d1.clone(), d1);
        let rep2 = m.verify_filtration_properties(&d, &bad2);
        assert!(rep2.items.iter().any(|i| i.name == "D1_endpoints" && !i.pass));
    }

    #[test]
    fn dual_filtration_on_vk() {
        let p = 3;
        let m = vk_module(p, 1, (2, 1));
        let d = Subspace::from_rows(p, 2, vec![vec(p, &[1, 0])]).unwrap();
        assert!(m.dual_filtration_check(&d).unwrap());
    }

    #[test]
    fn random_canonical_filtration_properties() {
        let mut r = crate::sample::rng(41);
        for _ in 0..12 {
            let (m, d) = crate::sample::random_c3_with_admissible(&mut r, 3, 3);
            let triple = m.canonical_filtration(&d).unwrap();
            let rep = m.verify_filtration_properties(&d, &triple);
            assert!(rep.all_pass(), "{:?}", rep.items);
            assert!(m.dual_filtration_check(&d).unwrap());
        }
    }

    #[test]
    fn canonical_filtration_is_basis_equivariant() {
        let p = 3;
        let mut r = crate::sample::rng(42);
        let (m, d) = crate::sample::random_c3_with_admissible(&mut r, p, 3);
        let (dm, d0, d1) = m.canonical_filtration(&d).unwrap();
        for _ in 0..5 {
            let pm = crate::sample::random_invertible(&mut r, p, 3);
            let mc = m.conjugate(&pm).unwrap();
            let dc = d.apply_map(&pm).unwrap();
            let (em, e0, e1) = mc.canonical_filtration(&dc).unwrap();
            assert_eq!(em, dm.apply_map(&pm).unwrap());
            assert_eq!(e0, d0.apply_map(&pm).unwrap());
            assert_eq!(e1, d1.apply_map(&pm).unwrap());
        }
    }

    #[test]
    fn hodge_newton_summary() {
        let p = 3;
        let u = FilteredPhiNModule::unit(p);
        let hn = u.hodge_newton();
        assert_eq!(hn.hodge_total, 0);
        assert_eq!(hn.newton_valuation, 0);
        assert!(hn.weakly_admissible);

        let m = vk_module(p, 2, (1, 1));
        let hn = m.hodge_newton();
        assert_eq!(hn.newton_valuation, -1);
        assert_eq!(hn.hodge_total, -1);
        assert!(hn.weakly_admissible);

        // shifting the top jump up by one breaks weak admissibility
        let phi = QpMatrix::from_i64(p, &[&[(1, p as i64), (0, 1)], &[(0, 1), (1, 1)]]);
        let n = QpMatrix::from_i64(p, &[&[(0, 1), (1, 1)], &[(0, 1), (0, 1)]]);
        let line = Subspace::from_rows(p, 2, vec![vec![q(p, -1, 1), PadicScalar::one(p)]]).unwrap();
        let fil = Filtration::new(p, 2, vec![(-2, Subspace::full(p, 2)), (2, line)]).unwrap();
        let m2 = FilteredPhiNModule::new(p, phi, n, fil).unwrap();
        let hn2 = m2.hodge_newton();
        assert!(!hn2.weakly_admissible);
    }

    #[test]
    fn char_poly_and_roots() {
        let p = 3;
        let m = QpMatrix::from_i64(p, &[&[(2, 1), (0, 1)], &[(0, 1), (1, 3)]]);
        let cp = char_poly(&m);
        // (x - 2)(x - 1/3) = x^2 - 7/3 x + 2/3
        use num_rational::BigRational;
        assert_eq!(cp[2], BigRational::from_integer(1.into()));
        assert_eq!(cp[1], BigRational::new((-7).into(), 3.into()));
        assert_eq!(cp[0], BigRational::new(2.into(), 3.into()));
        let roots = rational_roots(&cp);
        assert!(roots.contains(&BigRational::from_integer(2.into())));
        assert!(roots.contains(&BigRational::new(1.into(), 3.into())));
    }
}
