//! Precision-aware linear algebra over Q_p.
//!
//! Matrices act on column vectors. Subspaces are stored as reduced row
//! echelon bases, which are unique per subspace, so subspace equality is
//! representation equality. Echelon reduction pivots on entries of minimal
//! p-adic valuation to avoid precision loss when capped entries are present;
//! on exact input everything here is exact.

use crate::error::LinAlgError;
use crate::scalar::PadicScalar;
use std::fmt;

pub type QpVector = Vec<PadicScalar>;

#[derive(Clone, PartialEq)]
pub struct QpMatrix {
    p: u64,
    rows: usize,
    cols: usize,
    data: Vec<PadicScalar>,
}

impl fmt::Debug for QpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QpMatrix {}x{} (p={})", self.rows, self.cols, self.p)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl QpMatrix {
    pub fn zeros(p: u64, rows: usize, cols: usize) -> Self {
        QpMatrix {
            p,
            rows,
            cols,
            data: vec![PadicScalar::zero(p); rows * cols],
        }
    }

    pub fn identity(p: u64, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.set(i, i, PadicScalar::one(p));
        }
        m
    }

    pub fn from_fn(p: u64, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> PadicScalar) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        QpMatrix { p, rows, cols, data }
    }

    /// Builds a matrix from rationals given as (numerator, denominator) pairs.
    pub fn from_i64(p: u64, entries: &[&[(i64, i64)]]) -> Self {
        let rows = entries.len();
        let cols = if rows == 0 { 0 } else { entries[0].len() };
        Self::from_fn(p, rows, cols, |i, j| {
            let (n, d) = entries[i][j];
            PadicScalar::from_ratio(p, n, d)
        })
    }

    pub fn from_rows(p: u64, rows: Vec<QpVector>) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        for row in &rows {
            assert_eq!(row.len(), c, "ragged rows");
        }
        QpMatrix {
            p,
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &PadicScalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: PadicScalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> QpVector {
        (0..self.cols).map(|j| self.get(i, j).clone()).collect()
    }

    pub fn col(&self, j: usize) -> QpVector {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.p, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.p, self.rows, self.cols, |i, j| self.get(i, j).add(other.get(i, j)))
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.p, self.rows, self.cols, |i, j| self.get(i, j).sub(other.get(i, j)))
    }

    pub fn scale(&self, c: &PadicScalar) -> Self {
        Self::from_fn(self.p, self.rows, self.cols, |i, j| self.get(i, j).mul(c))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        Self::from_fn(self.p, self.rows, other.cols, |i, j| {
            let mut acc = PadicScalar::zero(self.p);
            for k in 0..self.cols {
                acc = acc.add(&self.get(i, k).mul(other.get(k, j)));
            }
            acc
        })
    }

    /// Matrix times column vector.
    pub fn apply(&self, v: &[PadicScalar]) -> QpVector {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = PadicScalar::zero(self.p);
                for k in 0..self.cols {
                    acc = acc.add(&self.get(i, k).mul(&v[k]));
                }
                acc
            })
            .collect()
    }

    /// Kronecker product; block (i1, j1) is A[i1][j1] * B.
    pub fn kron(&self, other: &Self) -> Self {
        Self::from_fn(
            self.p,
            self.rows * other.rows,
            self.cols * other.cols,
            |i, j| {
                let (i1, i2) = (i / other.rows, i % other.rows);
                let (j1, j2) = (j / other.cols, j % other.cols);
                self.get(i1, j1).mul(other.get(i2, j2))
            },
        )
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Minimal precision floor over all entries; None means fully exact.
    pub fn precision_floor(&self) -> Option<i64> {
        self.data.iter().filter_map(|x| x.precision_floor()).min()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

/// Result of reduced row echelon elimination.
pub struct Echelon {
    pub rref: QpMatrix,
    /// pivots[k] = column of the k-th pivot row.
    pub pivots: Vec<usize>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Reduced row echelon form with minimal-valuation pivoting.
pub fn rref(m: &QpMatrix) -> Result<Echelon, LinAlgError> {
    let mut a = m.clone();
    let p = a.p;
    let mut pivots = Vec::new();
    let mut r = 0usize;
    for col in 0..a.cols {
        if r >= a.rows {
            break;
        }
        // pick the nonzero entry of minimal valuation in this column
        let mut best: Option<(usize, i64)> = None;
        let mut saw_capped_zero = false;
        for i in r..a.rows {
            let e = a.get(i, col);
            match e.val() {
                Some(v) => {
                    if best.map_or(true, |(_, bv)| v < bv) {
                        best = Some((i, v));
                    }
                }
                None => {
                    if e.precision_floor().is_some() {
                        saw_capped_zero = true;
                    }
                }
            }
        }
        let Some((piv_row, _)) = best else {
            if saw_capped_zero {
                return Err(LinAlgError::PrecisionExhausted(col));
            }
            continue;
        };
        a.swap_rows(r, piv_row);
        let inv = PadicScalar::one(p)
            .div(a.get(r, col))
            .map_err(|_| LinAlgError::PrecisionExhausted(col))?;
        for j in 0..a.cols {
            let v = a.get(r, j).mul(&inv);
            a.set(r, j, v);
        }
        for i in 0..a.rows {
            if i != r && !a.get(i, col).is_zero() {
                let factor = a.get(i, col).clone();
                for j in 0..a.cols {
                    let v = a.get(i, j).sub(&factor.mul(a.get(r, j)));
                    a.set(i, j, v);
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    // drop numerically-zero tail rows by zeroing them exactly
    Ok(Echelon { rref: a, pivots })
}

pub fn rank(m: &QpMatrix) -> usize {
    rref(m).map(|e| e.rank()).unwrap_or(0)
}

/// Basis of the (right) kernel of m, as vectors.
pub fn kernel(m: &QpMatrix) -> Result<Vec<QpVector>, LinAlgError> {
    let p = m.p;
    let ech = rref(m)?;
    let free: Vec<usize> = (0..m.cols).filter(|c| !ech.pivots.contains(c)).collect();
    let mut basis = Vec::with_capacity(free.len());
    for &f in &free {
        let mut v = vec![PadicScalar::zero(p); m.cols];
        v[f] = PadicScalar::one(p);
        for (k, &pc) in ech.pivots.iter().enumerate() {
            v[pc] = ech.rref.get(k, f).neg();
        }
        basis.push(v);
    }
    Ok(basis)
}

/// Solves A x = b. Returns one particular solution (free variables set to
/// zero) together with a kernel basis.
pub fn solve_linear(a: &QpMatrix, b: &[PadicScalar]) -> Result<(QpVector, Vec<QpVector>), LinAlgError> {
    if b.len() != a.rows {
        return Err(LinAlgError::DimensionMismatch(format!(
            "rhs length {} vs {} rows",
            b.len(),
            a.rows
        )));
    }
    let p = a.p;
    let mut aug = QpMatrix::zeros(p, a.rows, a.cols + 1);
    for i in 0..a.rows {
        for j in 0..a.cols {
            aug.set(i, j, a.get(i, j).clone());
        }
        aug.set(i, a.cols, b[i].clone());
    }
    let ech = rref(&aug)?;
    if ech.pivots.contains(&a.cols) {
        return Err(LinAlgError::InconsistentSystem);
    }
    let mut x = vec![PadicScalar::zero(p); a.cols];
    for (k, &pc) in ech.pivots.iter().enumerate() {
        x[pc] = ech.rref.get(k, a.cols).clone();
    }
    Ok((x, kernel(a)?))
}

/// Determinant by elimination; exact on exact input.
pub fn det(m: &QpMatrix) -> Result<PadicScalar, LinAlgError> {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let p = m.p;
    let mut a = m.clone();
    let n = a.rows;
    let mut acc = PadicScalar::one(p);
    for col in 0..n {
        let mut best: Option<(usize, i64)> = None;
        for i in col..n {
            if let Some(v) = a.get(i, col).val() {
                if best.map_or(true, |(_, bv)| v < bv) {
                    best = Some((i, v));
                }
            }
        }
        let Some((piv, _)) = best else {
            return Ok(PadicScalar::zero(p));
        };
        if piv != col {
            a.swap_rows(col, piv);
            acc = acc.neg();
        }
        let pv = a.get(col, col).clone();
        acc = acc.mul(&pv);
        let inv = PadicScalar::one(p)
            .div(&pv)
            .map_err(|_| LinAlgError::PrecisionExhausted(col))?;
        for i in (col + 1)..n {
            if !a.get(i, col).is_zero() {
                let factor = a.get(i, col).mul(&inv);
                for j in col..n {
                    let v = a.get(i, j).sub(&factor.mul(a.get(col, j)));
                    a.set(i, j, v);
                }
            }
        }
    }
    Ok(acc)
}

/// det*(f) = det(f | im f) for f semisimple at zero; the empty product is 1.
pub fn det_star(f: &QpMatrix) -> Result<PadicScalar, LinAlgError> {
    assert!(f.is_square());
    let p = f.p;
    let image = Subspace::from_rows(p, f.cols, (0..f.cols).map(|j| f.col(j)).collect())?;
    let ker = Subspace::from_rows(p, f.cols, kernel(f)?)?;
    if image.intersect(&ker)?.dim() != 0 {
        return Err(LinAlgError::NotSemisimpleAtZero);
    }
    if image.dim() == 0 {
        return Ok(PadicScalar::one(p));
    }
    // matrix of f restricted to its image, in the image basis
    let basis = image.basis_rows();
    let mut coords = Vec::with_capacity(basis.len());
    for v in &basis {
        let fv = f.apply(v);
        coords.push(image.coordinates(&fv).expect("image is f-stable"));
    }
    det(&QpMatrix::from_rows(p, coords).transpose())
}

/// A linear subspace of Q_p^n, stored as a reduced-echelon row basis.
#[derive(Clone, PartialEq)]
pub struct Subspace {
    p: u64,
    ambient: usize,
    basis: QpMatrix,
    pivots: Vec<usize>,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace dim {} of Q_p^{}: {:?}", self.dim(), self.ambient, self.basis)
    }
}

impl Subspace {
    pub fn from_rows(p: u64, ambient: usize, rows: Vec<QpVector>) -> Result<Self, LinAlgError> {
        for r in &rows {
            if r.len() != ambient {
                return Err(LinAlgError::DimensionMismatch(format!(
                    "vector length {} in ambient {}",
                    r.len(),
                    ambient
                )));
            }
        }
        if rows.is_empty() {
            return Ok(Self::zero_space(p, ambient));
        }
        let m = QpMatrix::from_rows(p, rows);
        let ech = rref(&m)?;
        let r = ech.rank();
        let basis = QpMatrix::from_fn(p, r, ambient, |i, j| ech.rref.get(i, j).clone());
        Ok(Subspace {
            p,
            ambient,
            basis,
            pivots: ech.pivots,
        })
    }

    pub fn zero_space(p: u64, ambient: usize) -> Self {
        Subspace {
            p,
            ambient,
            basis: QpMatrix::zeros(p, 0, ambient),
            pivots: vec![],
        }
    }

    pub fn full(p: u64, ambient: usize) -> Self {
        Subspace {
            p,
            ambient,
            basis: QpMatrix::identity(p, ambient),
            pivots: (0..ambient).collect(),
        }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn basis_rows(&self) -> Vec<QpVector> {
        (0..self.basis.rows()).map(|i| self.basis.row(i)).collect()
    }

    pub fn basis_matrix(&self) -> &QpMatrix {
        &self.basis
    }

    fn check_ambient(&self, other: &Self) -> Result<(), LinAlgError> {
        if self.ambient != other.ambient {
            return Err(LinAlgError::DimensionMismatch(format!(
                "ambient {} vs {}",
                self.ambient, other.ambient
            )));
        }
        Ok(())
    }

    /// Reduces v modulo this subspace: the result has zeros in all pivot
    /// coordinates and lies in the same coset as v.
    pub fn reduce(&self, v: &[PadicScalar]) -> QpVector {
        assert_eq!(v.len(), self.ambient);
        let mut w = v.to_vec();
        for (k, &pc) in self.pivots.iter().enumerate() {
            if !w[pc].is_zero() {
                let c = w[pc].clone();
                for j in 0..self.ambient {
                    w[j] = w[j].sub(&c.mul(self.basis.get(k, j)));
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[PadicScalar]) -> bool {
        self.reduce(v).iter().all(|x| x.is_zero())
    }

    pub fn contains_space(&self, other: &Self) -> bool {
        other.basis_rows().iter().all(|v| self.contains(v))
    }

    /// Coordinates of v in this subspace's echelon basis, if v lies in it.
    pub fn coordinates(&self, v: &[PadicScalar]) -> Option<QpVector> {
        let coords: QpVector = self.pivots.iter().map(|&c| v[c].clone()).collect();
        // verify membership
        let mut w = v.to_vec();
        for (k, c) in coords.iter().enumerate() {
            for j in 0..self.ambient {
                w[j] = w[j].sub(&c.mul(self.basis.get(k, j)));
            }
        }
        if w.iter().all(|x| x.is_zero()) {
            Some(coords)
        } else {
            None
        }
    }

    pub fn sum(&self, other: &Self) -> Result<Self, LinAlgError> {
        self.check_ambient(other)?;
        let mut rows = self.basis_rows();
        rows.extend(other.basis_rows());
        Self::from_rows(self.p, self.ambient, rows)
    }

    pub fn intersect(&self, other: &Self) -> Result<Self, LinAlgError> {
        self.check_ambient(other)?;
        // kernel of [U^t | V^t] gives coefficient pairs (a, -b) with aU = bV
        let du = self.dim();
        let dv = other.dim();
        if du == 0 || dv == 0 {
            return Ok(Self::zero_space(self.p, self.ambient));
        }
        let stacked = QpMatrix::from_fn(self.p, self.ambient, du + dv, |i, j| {
            if j < du {
                self.basis.get(j, i).clone()
            } else {
                other.basis.get(j - du, i).neg()
            }
        });
        let ker = kernel(&stacked)?;
        let rows: Vec<QpVector> = ker
            .iter()
            .map(|k| {
                (0..self.ambient)
                    .map(|j| {
                        let mut acc = PadicScalar::zero(self.p);
                        for (t, coef) in k.iter().take(du).enumerate() {
                            acc = acc.add(&coef.mul(self.basis.get(t, j)));
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        Self::from_rows(self.p, self.ambient, rows)
    }

    /// Any complement W with self (+) W = full ambient space: the standard
    /// basis vectors at the non-pivot coordinates.
    pub fn complement(&self) -> Self {
        let p = self.p;
        let rows: Vec<QpVector> = (0..self.ambient)
            .filter(|c| !self.pivots.contains(c))
            .map(|c| {
                let mut v = vec![PadicScalar::zero(p); self.ambient];
                v[c] = PadicScalar::one(p);
                v
            })
            .collect();
        Self::from_rows(p, self.ambient, rows).expect("standard vectors are well-formed")
    }

    /// Coset representatives for other/self (requires self <= other).
    pub fn quotient_reps(&self, other: &Self) -> Result<Vec<QpVector>, LinAlgError> {
        self.check_ambient(other)?;
        let mut reps: Vec<QpVector> = Vec::new();
        let mut span = self.clone();
        for v in other.basis_rows() {
            let r = span.reduce(&v);
            if !r.iter().all(|x| x.is_zero()) {
                reps.push(r.clone());
                span = span.sum(&Self::from_rows(self.p, self.ambient, vec![r])?)?;
            }
        }
        Ok(reps)
    }

    /// Image of this subspace under a linear map (matrix acting on columns).
    pub fn apply_map(&self, m: &QpMatrix) -> Result<Self, LinAlgError> {
        let rows: Vec<QpVector> = self.basis_rows().iter().map(|v| m.apply(v)).collect();
        Self::from_rows(self.p, m.rows(), rows)
    }

    /// Whether this subspace is stable under the map (columns convention).
    pub fn is_stable_under(&self, m: &QpMatrix) -> bool {
        self.basis_rows().iter().all(|v| self.contains(&m.apply(v)))
    }
}

/// Canonical coordinates on ambient/sub: the non-pivot coordinates of the
/// sub-reduced vector.
#[derive(Clone, Debug)]
pub struct QuotientSpace {
    sub: Subspace,
    nonpivot: Vec<usize>,
}

impl QuotientSpace {
    pub fn new(sub: Subspace) -> Self {
        let nonpivot = (0..sub.ambient()).filter(|c| !sub.pivots().contains(c)).collect();
        QuotientSpace { sub, nonpivot }
    }

    pub fn dim(&self) -> usize {
        self.nonpivot.len()
    }

    pub fn sub(&self) -> &Subspace {
        &self.sub
    }

    pub fn ambient(&self) -> usize {
        self.sub.ambient()
    }

    pub fn coords(&self, v: &[PadicScalar]) -> QpVector {
        let r = self.sub.reduce(v);
        self.nonpivot.iter().map(|&c| r[c].clone()).collect()
    }

    /// The canonical lift placing coordinates at the non-pivot columns.
    pub fn lift(&self, coords: &[PadicScalar]) -> QpVector {
        assert_eq!(coords.len(), self.dim());
        let p = self.sub.prime();
        let mut v = vec![PadicScalar::zero(p); self.ambient()];
        for (k, &c) in self.nonpivot.iter().enumerate() {
            v[c] = coords[k].clone();
        }
        v
    }
}

/// Standard basis vector.
pub fn unit_vector(p: u64, n: usize, i: usize) -> QpVector {
    let mut v = vec![PadicScalar::zero(p); n];
    v[i] = PadicScalar::one(p);
    v
}

pub fn zero_vector(p: u64, n: usize) -> QpVector {
    vec![PadicScalar::zero(p); n]
}

pub fn vec_add(a: &[PadicScalar], b: &[PadicScalar]) -> QpVector {
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

pub fn vec_sub(a: &[PadicScalar], b: &[PadicScalar]) -> QpVector {
    a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
}

pub fn vec_scale(c: &PadicScalar, a: &[PadicScalar]) -> QpVector {
    a.iter().map(|x| c.mul(x)).collect()
}

pub fn vec_is_zero(a: &[PadicScalar]) -> bool {
    a.iter().all(|x| x.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn m(p: u64, e: &[&[(i64, i64)]]) -> QpMatrix {
        QpMatrix::from_i64(p, e)
    }

    fn v(p: u64, xs: &[i64]) -> QpVector {
        xs.iter().map(|&x| PadicScalar::from_int(p, x)).collect()
    }

    #[test]
    fn identity_solve() {
        let p = 5;
        let a = QpMatrix::identity(p, 2);
        let b = v(p, &[1, 5]);
        let (x, ker) = solve_linear(&a, &b).unwrap();
        assert_eq!(x, b);
        assert!(ker.is_empty());
    }

    #[test]
    fn rank_one_system() {
        let p = 3;
        let a = m(p, &[&[(1, 1), (1, 1)], &[(1, 1), (1, 1)]]);
        let b = v(p, &[2, 2]);
        let (x, ker) = solve_linear(&a, &b).unwrap();
        assert_eq!(x, v(p, &[2, 0]));
        assert_eq!(ker.len(), 1);
        // kernel spanned by (1, -1) up to scale
        let k = &ker[0];
        assert!(k[0].add(&k[1]).is_zero());
        assert!(!k[0].is_zero());
    }

    #[test]
    fn inconsistent_detected() {
        let p = 3;
        let a = m(p, &[&[(1, 1), (1, 1)], &[(1, 1), (1, 1)]]);
        let b = v(p, &[1, 2]);
        assert!(matches!(solve_linear(&a, &b), Err(LinAlgError::InconsistentSystem)));
    }

    fn random_matrix(rng: &mut ChaCha8Rng, p: u64, n: usize, c: usize) -> QpMatrix {
        QpMatrix::from_fn(p, n, c, |_, _| {
            PadicScalar::from_ratio(p, rng.gen_range(-9..=9), *[1, 1, 1, 3].iter().nth(rng.gen_range(0..4)).unwrap())
        })
    }

    #[test]
    fn random_solve_multiplies_back() {
        let p = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut done = 0;
        while done < 10 {
            let a = random_matrix(&mut rng, p, 4, 4);
            if rank(&a) < 4 {
                continue;
            }
            let b: QpVector = (0..4).map(|_| PadicScalar::from_int(p, rng.gen_range(-20..20))).collect();
            let (x, ker) = solve_linear(&a, &b).unwrap();
            assert!(ker.is_empty());
            assert_eq!(a.apply(&x), b);
            done += 1;
        }
    }

    #[test]
    fn kernel_exactness_and_rank_nullity() {
        let p = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..25 {
            let r = rng.gen_range(1..5);
            let c = rng.gen_range(1..6);
            let a = random_matrix(&mut rng, p, r, c);
            let ker = kernel(&a).unwrap();
            for k in &ker {
                assert!(vec_is_zero(&a.apply(k)));
            }
            assert_eq!(rank(&a) + ker.len(), c);
        }
    }

    #[test]
    fn subspace_sum_intersection_dims() {
        let p = 3;
        let e1 = Subspace::from_rows(p, 2, vec![v(p, &[1, 0])]).unwrap();
        let e2 = Subspace::from_rows(p, 2, vec![v(p, &[0, 1])]).unwrap();
        assert_eq!(e1.sum(&e2).unwrap().dim(), 2);
        assert_eq!(e1.intersect(&e2).unwrap().dim(), 0);
        assert_eq!(e1.sum(&e1).unwrap(), e1);
        assert_eq!(e1.intersect(&e1).unwrap(), e1);
    }

    #[test]
    fn random_modular_law_dims() {
        let p = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..25 {
            let du = rng.gen_range(0..4);
            let dv = rng.gen_range(0..4);
            let u = Subspace::from_rows(p, 4, (0..du).map(|_| random_matrix(&mut rng, p, 1, 4).row(0)).collect()).unwrap();
            let w = Subspace::from_rows(p, 4, (0..dv).map(|_| random_matrix(&mut rng, p, 1, 4).row(0)).collect()).unwrap();
            let s = u.sum(&w).unwrap();
            let i = u.intersect(&w).unwrap();
            assert_eq!(u.dim() + w.dim(), s.dim() + i.dim());
            assert!(s.contains_space(&u));
            assert!(u.contains_space(&i));
            let c = u.complement();
            assert_eq!(u.sum(&c).unwrap().dim(), 4);
            assert_eq!(u.intersect(&c).unwrap().dim(), 0);
        }
    }

    #[test]
    fn det_star_cases() {
        let p = 3;
        // zero map on Q_p^2: empty product
        let z = QpMatrix::zeros(p, 2, 2);
        assert_eq!(det_star(&z).unwrap(), PadicScalar::one(p));
        // diag(0, 3)
        let d = m(p, &[&[(0, 1), (0, 1)], &[(0, 1), (3, 1)]]);
        assert_eq!(det_star(&d).unwrap(), PadicScalar::from_int(p, 3));
        // diag(2, 5): image is everything
        let d2 = m(p, &[&[(2, 1), (0, 1)], &[(0, 1), (5, 1)]]);
        assert_eq!(det_star(&d2).unwrap(), PadicScalar::from_int(p, 10));
        // nilpotent [[0,1],[0,0]]: ker = im
        let n = m(p, &[&[(0, 1), (1, 1)], &[(0, 1), (0, 1)]]);
        assert!(matches!(det_star(&n), Err(LinAlgError::NotSemisimpleAtZero)));
    }

    #[test]
    fn det_star_basis_independent() {
        let p = 5;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        // f = diag(0, 2, 7) conjugated by random invertible P
        let f = m(p, &[&[(0, 1), (0, 1), (0, 1)], &[(0, 1), (2, 1), (0, 1)], &[(0, 1), (0, 1), (7, 1)]]);
        let expected = PadicScalar::from_int(p, 14);
        let mut done = 0;
        while done < 5 {
            let pm = random_matrix(&mut rng, p, 3, 3);
            if rank(&pm) < 3 {
                continue;
            }
            let pinv_cols: Vec<QpVector> = (0..3)
                .map(|j| solve_linear(&pm, &unit_vector(p, 3, j)).unwrap().0)
                .collect();
            let pinv = QpMatrix::from_rows(p, pinv_cols).transpose();
            let conj = pm.matmul(&f).matmul(&pinv);
            assert_eq!(det_star(&conj).unwrap(), expected);
            done += 1;
        }
    }

    #[test]
    fn quotient_coords_roundtrip() {
        let p = 3;
        let s = Subspace::from_rows(p, 3, vec![v(p, &[1, 2, 0])]).unwrap();
        let q = QuotientSpace::new(s);
        assert_eq!(q.dim(), 2);
        let x = v(p, &[5, 1, 7]);
        let c = q.coords(&x);
        let lifted = q.lift(&c);
        // x - lifted must lie in the subspace
        assert!(q.sub().contains(&vec_sub(&x, &lifted)));
    }
}
