//! DGform: goal-oriented deformable-object manipulation policy learning on
//! dynamic heterogeneous graphs, with a surrogate height-field dough
//! environment, demonstration-guided training, model-based rollouts, and a
//! bimanual GMM/LQT trajectory planner.

pub mod config;
pub mod env;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod net;
pub mod percept;

pub use error::{DgformError, Result};
