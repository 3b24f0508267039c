//! Subshifts of finite type on the lamplighter group and their supporting machinery.

pub mod cli;
pub mod csp;
pub mod error;
pub mod group;
pub mod kari;
pub mod render;
pub mod solver;
pub mod substitutions;
pub mod tilesets;
pub mod universal;
pub mod wang;
pub mod xtree;

pub use error::{Error, Result};
