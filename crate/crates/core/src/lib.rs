pub mod algebra;
pub mod asymptotics;
pub mod config;
pub mod error;
pub mod geometry;
pub mod heat;
pub mod io;
pub mod linalg;
pub mod mellin;
pub mod powers;
pub mod special;
pub mod symbols;
pub mod tip;
pub mod verify;

pub use error::{Error, Result};
