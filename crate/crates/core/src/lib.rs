//! Steiner minimal trees in `l_p^d`: local optimality certificates, degree
//! bounds, extremal constructions and an exhaustive small-instance solver.

pub mod certificates;
pub mod constructions;
pub mod degree_bounds;
pub mod error;
pub mod instance;
pub mod lp_geometry;
pub mod roots;
pub mod smt_solver;

pub use error::{Error, Result};
pub use lp_geometry::{LpExponent, Point};
