pub mod cli;
pub mod density;
pub mod diagnostics;
pub mod error;
pub mod ginibre;
pub mod hmc;
pub mod io;
pub mod linalg;
pub mod oracles;
pub mod povm;
pub mod recipes;
pub mod rng;
pub mod sample_set;
pub mod state;
pub mod weights;
