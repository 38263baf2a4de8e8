//! Exact construction and certification of finite configurations in real
//! Grassmannians: lattice minimal sections, Clifford-group eigenspace
//! families and spreads of totally isotropic binary subspaces.

pub mod binquad;
pub mod cli;
pub mod clifford;
pub mod error;
pub mod exactalg;
pub mod grassmann;
pub mod lattice;
pub mod zonal;

pub use error::{Error, Result};
