//! Geometric experience augmentation for mobile robots.
//!
//! Rendered or recorded views are re-projected to new camera poses and models, and
//! trajectories are optimized against a collision cost that is conditioned on the
//! robot's size and velocity limits. A small simulator closes the loop with
//! topological navigation over synthetic scenes.

pub mod cli;
pub mod cloud;
pub mod error;
pub mod geometry;
pub mod navsim;
pub mod objective;
pub mod optimizer;
pub mod scene;
pub mod suite;
pub mod viewsynth;

pub use error::{Error, Result};
