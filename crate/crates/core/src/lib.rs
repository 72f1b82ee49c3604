//! Chern character forms, holonomy, super parallel transport and the
//! Bismut–Chern character on discretized free loop space.

pub mod error;
pub mod geometry;
pub mod grassmann;
pub mod linalg;
pub mod loopspace;
pub mod rng;
pub mod superpath;
pub mod transport;

pub use error::{Error, Result};
pub use grassmann::{GrassmannElement, IndexSet};
