//! Geometry, level schemes and Brillouin-zone paths shared by every solver.

mod lattice;
mod levels;
mod path;

pub use lattice::{reciprocal_vectors, BasisKind, Extent, LatticeSpec, Sublattice};
pub use levels::{level_shift_matrix, LevelScheme, Polarization};
pub use path::{BzPath, KPoint};
