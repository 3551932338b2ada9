//! Coarse geometry at desk scale.
//!
//! Everything here works on *finite presentations* of coarse spaces: a point
//! table together with a normalized chain of entourages `E_0 ⊆ E_1 ⊆ … ⊆ E_N`.
//! Infinite spaces enter as window families (an ambient tag plus a regeneration
//! rule at larger radius), and every answer is exact on the given window and
//! explicitly depth-relative.
//!
//! The crate is organized around the pipeline
//!
//! ```text
//! space ──► maps / actions ──► homotopy cylinders ──► rips complexes
//!   │                                                    │
//!   └────────► tuple (co)chain complexes ◄───────────────┘
//!                          │
//!                  exact homology engine (Smith normal form towers)
//! ```
//!
//! See the `examples/` directory for one runnable program per capability and
//! the `coarsehom` binary for the JSON-driven command line.

pub mod complexes;
pub mod error;
pub mod harness;
pub mod homology;
pub mod homotopy;
pub mod jsonio;
pub mod linalg;
pub mod maps;
pub mod rips;
pub mod space;

pub use error::{CoarseError, Result};
pub use space::{Ambient, CoarseSpace, Entourage, EntourageChain, PointId, SubsetRef};
