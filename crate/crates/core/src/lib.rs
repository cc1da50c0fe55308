//! Geometric quantum drives.
//!
//! Classical geodesics on the Bolza surface, the torus, the Klein bottle and
//! the real projective plane are used as drive protocols for small quantum
//! systems. Time-averaged responses along ergodic drives converge to
//! Berry-curvature invariants of the parent Hamiltonian.

pub mod error;
pub mod ergodicity;
pub mod evolution;
pub mod experiment;
pub mod hp;
pub mod hyperbolic;
pub mod io;
pub mod models;
pub mod response;
pub mod topology;
pub mod trajectories;

pub use error::{Error, Result};
pub use hp::{HpComplex, Precision};

