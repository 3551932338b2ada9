//! Exact linear algebra kernels: integer Smith normal form with certificates,
//! field elimination, and finitely generated abelian group arithmetic.

pub mod field;
pub mod group;
pub mod int;

pub use field::{is_prime, FMat, Field, Fp};
pub use group::{exactness_at, CoordVec, ExactnessReport, GroupData, InducedMap, Ring, ZQuotient};
pub use int::{kernel, rank, reduce_lattice_columns, smith, solve, IMat, Snf, SnfWant, SparseVec};
