//! Exact p-adic computer algebra for L-invariants of semistable
//! representations, computed from filtered (phi,N)-module data.
//!
//! The crate provides, bottom up:
//!
//! * [`scalar`], [`linalg`]: exact arithmetic over Q_p with precision floors
//!   and echelon-form linear algebra (kernels, images, quotients, det*).
//! * [`filtered`]: the category of filtered (phi,N)-modules: validation,
//!   tensor/dual/unit, rank-1 classification, refinements, admissible
//!   submodules and the canonical five-step filtration.
//! * [`stcoh`]: the semistable and crystalline cohomology complexes of a
//!   filtered module, cup products, connecting maps, and the dictionary
//!   between extensions and H^1 classes.
//! * [`rank1`]: the coordinate model of H^0/H^1/H^2 for the two semistable
//!   rank-1 families, with the normalized dual bases and the pairing table.
//! * [`robba`]: truncated Laurent-series calculus (Frobenius, gamma,
//!   differential and trace operators, residues) used as an independent
//!   oracle for the identities and pairing tables the engine consumes.
//! * [`engine`]: condition checks, the W-decomposition, the local image,
//!   and the L-invariant with its local/global factorization, plus the
//!   interpolation factor and the two-dimensional modular constructors.
//! * [`io`]: JSON input/output schemas for the CLI.

pub mod error;
pub mod scalar;
pub mod linalg;
pub mod filtered;
pub mod stcoh;
pub mod sample;
pub mod rank1;
pub mod robba;
pub mod engine;
pub mod io;
