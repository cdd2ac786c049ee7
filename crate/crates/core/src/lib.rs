pub mod algebra;
pub mod coefficient;
pub mod cohomology;
pub mod dmodule;
pub mod error;
pub mod formality;
pub mod graphs;
pub mod hkr;
pub mod json;
pub mod polydiff;
pub mod polyvector;
pub mod random;
pub mod weighted;
pub mod weights;

pub use error::{Error, Result};
