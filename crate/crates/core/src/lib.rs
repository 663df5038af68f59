pub mod asp;
pub mod boltzmann;
pub mod combinatorics;
pub mod error;
pub mod estimate;
pub mod peeling;
pub mod rng;
pub mod verify;
pub mod walk;

pub use error::{Error, Result};
