//! Numerical toolkit for relative-entropy quantum discord.
//!
//! Modules, bottom-up:
//!
//! - [`matfun`]: dense complex kernel (Hermitian eigensystems, spectral
//!   functions, tensor products, partial traces).
//! - [`states`]: validated density matrices and seeded generators.
//! - [`entropy`]: von Neumann, relative, conditional and conditional mutual entropies.
//! - [`measurements`]: projection-valued measures.
//! - [`channels`]: Kraus maps, adjoints and the Petz recovery map.
//! - [`discord`]: one-sided, symmetric and N-partite discord, zero-discord
//!   constructors and commutator characterizations.
//! - [`ssa`]: measurement isometry, conditional-mutual-information identities
//!   and doubly SSA-saturating block states.
//! - [`dynamics`]: closed bipartite evolution and entropy-rate formulas.
//! - [`io`]: JSON and CSV formats shared with the command-line tool.
//!
//! All entropies are in bits.

pub mod channels;
pub mod discord;
pub mod dynamics;
pub mod entropy;
pub mod error;
pub mod io;
pub mod matfun;
pub mod measurements;
pub mod ssa;
pub mod states;

pub use error::{Error, Result};
