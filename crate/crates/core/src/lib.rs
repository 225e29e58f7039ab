pub mod asymptotics;
pub mod cli;
pub mod curvature;
pub mod error;
pub mod grid;
pub mod height_field;
pub mod inequalities;
pub mod linalg;
pub mod plap;
pub mod report;
pub mod rigidity;
pub mod verify;

pub use error::{Error, Result};
