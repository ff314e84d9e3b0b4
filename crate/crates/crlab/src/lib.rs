pub mod assembly;
pub mod cli;
pub mod error;
pub mod femspace;
pub mod infsup;
pub mod linalg;
pub mod mesh;
pub mod orthopoly;
pub mod rightinverse;
pub mod verify;

pub use error::{Error, Result};
