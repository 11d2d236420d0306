pub mod beta;
pub mod burgers;
pub mod cli;
pub mod corona;
pub mod cubes;
pub mod error;
pub mod graphs;
pub mod heis;
pub mod hull;
pub mod index;
pub mod io;
pub mod optim;
pub mod partition;
pub mod planes;
pub mod predyadic;
pub mod scenarios;
pub mod tolerance;
pub mod verify;

pub use error::{Error, Result};
pub use heis::{Angle, HPoint};
pub use tolerance::Tolerance;
