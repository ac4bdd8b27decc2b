//! Seeded random generators for modules, admissible subspaces, strict
//! extensions and cohomology classes. Used by the verification suites; all
//! randomness is deterministic given the seed.

use crate::filtered::{FilteredPhiNModule, Filtration};
use crate::linalg::{kernel, vec_add, vec_scale, QpMatrix, QpVector, Subspace};
use crate::scalar::PadicScalar;
use crate::stcoh::{StClass, StComplex};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Random invertible integer matrix: a product of elementary shears and a
/// permutation, so the inverse is exact and well conditioned p-adically.
pub fn random_invertible(r: &mut StdRng, p: u64, n: usize) -> QpMatrix {
    let mut m = QpMatrix::identity(p, n);
    if n <= 1 {
        return m;
    }
    for _ in 0..(2 * n) {
        let i = r.gen_range(0..n);
        let mut j = r.gen_range(0..n);
        while j == i {
            j = r.gen_range(0..n);
        }
        let c = PadicScalar::from_int(p, r.gen_range(-3..=3));
        // row_i += c * row_j
        for k in 0..n {
            let v = m.get(i, k).add(&c.mul(m.get(j, k)));
            m.set(i, k, v);
        }
    }
    m
}

fn random_unit(r: &mut StdRng, p: u64) -> i64 {
    loop {
        let u = r.gen_range(1..=6i64);
        if u % p as i64 != 0 {
            return u;
        }
    }
}

/// Ladder data: diagonal Frobenius with eigenvalue chains lambda, lambda/p,
/// ... and the shift monodromy, which satisfies N phi = p phi N by
/// construction. Frobenius is diagonalizable, hence semisimple everywhere.
fn ladder_phi_n(r: &mut StdRng, p: u64, dim: usize) -> (QpMatrix, QpMatrix) {
    let mut lengths = Vec::new();
    let mut left = dim;
    while left > 0 {
        let l = r.gen_range(1..=left.min(3));
        lengths.push(l);
        left -= l;
    }
    let mut phi = QpMatrix::zeros(p, dim, dim);
    let mut n = QpMatrix::zeros(p, dim, dim);
    let mut idx = 0usize;
    for l in lengths {
        let unit = random_unit(r, p);
        let e = r.gen_range(-1..=1i64);
        for s in 0..l {
            let lam = PadicScalar::from_int(p, unit).mul(&PadicScalar::p_pow(p, e - s as i64));
            phi.set(idx + s, idx + s, lam);
            if s + 1 < l {
                // N maps the step-s vector to the step-(s+1) vector
                n.set(idx + s + 1, idx + s, PadicScalar::one(p));
            }
        }
        idx += l;
    }
    (phi, n)
}

fn random_nested_filtration(r: &mut StdRng, p: u64, dim: usize) -> Filtration {
    let nsteps = r.gen_range(1..=3.min(dim));
    let mut dims: Vec<usize> = vec![dim];
    while dims.len() < nsteps {
        let last = *dims.last().unwrap();
        if last <= 1 {
            break;
        }
        dims.push(r.gen_range(1..last));
    }
    let mut jump = r.gen_range(-3..=0i64);
    let mut steps = Vec::new();
    let mut current = Subspace::full(p, dim);
    for (t, target) in dims.iter().enumerate() {
        if t > 0 {
            // random subspace of `current` with the target dimension
            let basis = current.basis_rows();
            let rows: Vec<QpVector> = (0..*target)
                .map(|_| {
                    let mut acc = crate::linalg::zero_vector(p, dim);
                    for b in &basis {
                        let c = PadicScalar::from_int(p, r.gen_range(-2..=2));
                        acc = vec_add(&acc, &vec_scale(&c, b));
                    }
                    acc
                })
                .collect();
            let sub = Subspace::from_rows(p, dim, rows).expect("well-formed");
            if sub.dim() != *target || sub.dim() >= current.dim() {
                // resample on degenerate draws
                continue;
            }
            current = sub;
        }
        steps.push((jump, current.clone()));
        jump += r.gen_range(1..=2i64);
    }
    Filtration::new(p, dim, steps).expect("nested by construction")
}

/// Random filtered module with invertible rational Frobenius, a compatible
/// nilpotent monodromy and a random filtration, conjugated into a random
/// basis.
pub fn random_module(r: &mut StdRng, p: u64, dim: usize) -> FilteredPhiNModule {
    loop {
        let (phi, n) = ladder_phi_n(r, p, dim);
        let fil = random_nested_filtration(r, p, dim);
        let m = match FilteredPhiNModule::new(p, phi, n, fil) {
            Ok(m) => m,
            Err(_) => continue,
        };
        let pm = random_invertible(r, p, dim);
        if let Ok(c) = m.conjugate(&pm) {
            return c;
        }
    }
}

/// Random module with semisimple Frobenius at 1 and p^{-1} together with an
/// admissible stable subspace: the filtration is built so that Fil^0 is a
/// complement of the chosen ladder-tail subspace.
pub fn random_c3_with_admissible(r: &mut StdRng, p: u64, dim: usize) -> (FilteredPhiNModule, Subspace) {
    loop {
        let (phi, n) = ladder_phi_n(r, p, dim);
        // D = random union of ladder tails: stable under phi and N.
        // A tail is closed under N (which shifts down the ladder).
        let mut tail_cols: Vec<usize> = Vec::new();
        for j in 0..dim {
            // include column j with probability ~1/2; closure under N below
            if r.gen_bool(0.5) {
                tail_cols.push(j);
            }
        }
        // close under N: if j is in, every k with N^t(e_j)-chain must be in
        let mut changed = true;
        while changed {
            changed = false;
            let snapshot = tail_cols.clone();
            for &j in &snapshot {
                for k in 0..dim {
                    if !n.get(k, j).is_zero() && !tail_cols.contains(&k) {
                        tail_cols.push(k);
                        changed = true;
                    }
                }
            }
        }
        tail_cols.sort_unstable();
        if tail_cols.is_empty() || tail_cols.len() == dim {
            continue;
        }
        let d_rows: Vec<QpVector> = tail_cols
            .iter()
            .map(|&j| crate::linalg::unit_vector(p, dim, j))
            .collect();
        let d_sub = Subspace::from_rows(p, dim, d_rows).expect("unit vectors");
        // Fil^0 = complement of D, shifted by random D-components
        let comp = d_sub.complement();
        let c_rows: Vec<QpVector> = comp
            .basis_rows()
            .iter()
            .map(|v| {
                let mut acc = v.clone();
                for b in d_sub.basis_rows() {
                    let c = PadicScalar::from_int(p, r.gen_range(-2..=2));
                    acc = vec_add(&acc, &vec_scale(&c, &b));
                }
                acc
            })
            .collect();
        let c_sub = Subspace::from_rows(p, dim, c_rows).expect("well-formed");
        if c_sub.dim() + d_sub.dim() != dim || c_sub.intersect(&d_sub).unwrap().dim() != 0 {
            continue;
        }
        let j1 = r.gen_range(-3..=-1i64);
        let j2 = r.gen_range(0..=2i64);
        let mut steps = vec![(j1, Subspace::full(p, dim)), (j2, c_sub.clone())];
        if c_sub.dim() > 1 && r.gen_bool(0.5) {
            let deeper_rows: Vec<QpVector> = c_sub.basis_rows().into_iter().take(c_sub.dim() - 1).collect();
            let deeper = Subspace::from_rows(p, dim, deeper_rows).unwrap();
            steps.push((j2 + r.gen_range(1..=2i64), deeper));
        }
        let fil = match Filtration::new(p, dim, steps) {
            Ok(f) => f,
            Err(_) => continue,
        };
        let m = match FilteredPhiNModule::new(p, phi, n, fil) {
            Ok(m) => m,
            Err(_) => continue,
        };
        // conjugate module and subspace together
        let pm = random_invertible(r, p, dim);
        let mc = match m.conjugate(&pm) {
            Ok(c) => c,
            Err(_) => continue,
        };
        let dc = d_sub.apply_map(&pm).expect("invertible");
        if !mc.semisimple_at_one_and_p_inv() {
            continue;
        }
        match mc.admissible_check(&dc) {
            Ok(true) => return (mc, dc),
            _ => continue,
        }
    }
}

/// Random strict short exact sequence 0 -> A -> X -> B -> 0: the middle term
/// is a graph-twisted direct sum whose off-diagonal blocks solve the
/// N phi = p phi N compatibility equation.
pub fn random_strict_extension(
    r: &mut StdRng,
    a: &FilteredPhiNModule,
    b: &FilteredPhiNModule,
) -> Option<(FilteredPhiNModule, QpMatrix, QpMatrix)> {
    let p = a.prime();
    let (da, db) = (a.dim(), b.dim());
    let dx = da + db;
    // Solve N_A U - p U N_B + W phi_B - p phi_A W = 0 for (U, W).
    let nu = da * db;
    let constraint = QpMatrix::from_fn(p, nu, 2 * nu, |row, col| {
        let (i, j) = (row / db, row % db);
        if col < nu {
            // coefficient of U_{k,l} in (N_A U - p U N_B)_{i,j}
            let (k, l) = (col / db, col % db);
            let mut c = PadicScalar::zero(p);
            if l == j {
                c = c.add(a.n_op().get(i, k));
            }
            if k == i {
                c = c.sub(&PadicScalar::from_int(p, p as i64).mul(b.n_op().get(l, j)));
            }
            c
        } else {
            // coefficient of W_{k,l} in (W phi_B - p phi_A W)_{i,j}
            let (k, l) = ((col - nu) / db, (col - nu) % db);
            let mut c = PadicScalar::zero(p);
            if k == i {
                c = c.add(b.phi().get(l, j));
            }
            if l == j {
                c = c.sub(&PadicScalar::from_int(p, p as i64).mul(a.phi().get(i, k)));
            }
            c
        }
    });
    let ker = kernel(&constraint).ok()?;
    let mut uvec = crate::linalg::zero_vector(p, 2 * nu);
    for k in &ker {
        let c = PadicScalar::from_int(p, r.gen_range(-2..=2));
        uvec = vec_add(&uvec, &vec_scale(&c, k));
    }
    let u = QpMatrix::from_fn(p, da, db, |i, j| uvec[i * db + j].clone());
    let w = QpMatrix::from_fn(p, da, db, |i, j| uvec[nu + i * db + j].clone());
    let phi = QpMatrix::from_fn(p, dx, dx, |i, j| {
        if i < da && j < da {
            a.phi().get(i, j).clone()
        } else if i < da {
            u.get(i, j - da).clone()
        } else if j >= da {
            b.phi().get(i - da, j - da).clone()
        } else {
            PadicScalar::zero(p)
        }
    });
    let n = QpMatrix::from_fn(p, dx, dx, |i, j| {
        if i < da && j < da {
            a.n_op().get(i, j).clone()
        } else if i < da {
            w.get(i, j - da).clone()
        } else if j >= da {
            b.n_op().get(i - da, j - da).clone()
        } else {
            PadicScalar::zero(p)
        }
    });
    // filtration through a random linear section of the projection
    let sect = QpMatrix::from_fn(p, da, db, |_, _| PadicScalar::from_int(p, r.gen_range(-2..=2)));
    let mut jumps: Vec<i64> = a
        .filtration()
        .steps()
        .iter()
        .chain(b.filtration().steps())
        .map(|(j, _)| *j)
        .collect();
    jumps.sort_unstable();
    jumps.dedup();
    let mut steps = Vec::new();
    let mut last_dim = usize::MAX;
    for j in jumps {
        let mut rows: Vec<QpVector> = a
            .filtration()
            .at(j)
            .basis_rows()
            .iter()
            .map(|v| {
                let mut w = crate::linalg::zero_vector(p, dx);
                w[..da].clone_from_slice(v);
                w
            })
            .collect();
        for bvec in b.filtration().at(j).basis_rows() {
            let top = sect.apply(&bvec);
            let mut w = crate::linalg::zero_vector(p, dx);
            w[..da].clone_from_slice(&top);
            w[da..].clone_from_slice(&bvec);
            rows.push(w);
        }
        let sub = Subspace::from_rows(p, dx, rows).ok()?;
        if sub.dim() != last_dim {
            last_dim = sub.dim();
            steps.push((j, sub));
        } else if let Some(s) = steps.last_mut() {
            s.0 = j;
        }
    }
    while steps.last().map_or(false, |(_, s)| s.dim() == 0) {
        steps.pop();
    }
    let fil = Filtration::new(p, dx, steps).ok()?;
    let x = FilteredPhiNModule::new(p, phi, n, fil).ok()?;
    let incl = QpMatrix::from_fn(p, dx, da, |i, j| {
        if i == j {
            PadicScalar::one(p)
        } else {
            PadicScalar::zero(p)
        }
    });
    let proj = QpMatrix::from_fn(p, db, dx, |i, j| {
        if j == i + da {
            PadicScalar::one(p)
        } else {
            PadicScalar::zero(p)
        }
    });
    Some((x, incl, proj))
}

/// Random 1-cocycle class of the st complex of m.
pub fn random_st_class(r: &mut StdRng, m: &FilteredPhiNModule) -> StClass {
    let p = m.prime();
    let complex = StComplex::new(m);
    let t = complex.tangent_dim();
    let d = m.dim();
    // kernel of h = N y - (p phi - 1) z on (x, y, z)
    let h = QpMatrix::from_fn(p, d, t + 2 * d, |i, j| {
        if j < t {
            PadicScalar::zero(p)
        } else if j < t + d {
            m.n_op().get(i, j - t).clone()
        } else {
            let c = j - t - d;
            let mut v = m.phi().get(i, c).mul(&PadicScalar::from_int(p, p as i64)).neg();
            if i == c {
                v = v.add(&PadicScalar::one(p));
            }
            v
        }
    });
    let ker = kernel(&h).expect("exact kernel");
    let mut v = crate::linalg::zero_vector(p, t + 2 * d);
    for k in &ker {
        let c = PadicScalar::from_int(p, r.gen_range(-3..=3));
        v = vec_add(&v, &vec_scale(&c, k));
    }
    let xt = v[..t].to_vec();
    let y = v[t..t + d].to_vec();
    let z = v[t + d..].to_vec();
    StClass::from_parts(&complex, &xt, &y, &z).expect("kernel vectors are cocycles")
}
