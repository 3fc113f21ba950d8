//! Non-uniform rectilinear grid generation for FDTD electromagnetic solvers,
//! with companion RF analysis.
//!
//! - [`scene`]: scene tree, JSON parsing and depth-first shape flattening
//! - [`meshgen`]: per-axis mesh line generation and the CFL timestep
//! - [`analysis`]: link budget, path loss and reflecting-surface channel math
//! - [`scatter`]: physical-optics plate patterns and their lobe metrics
//! - [`cli`]: the `emgrid` command-line front end

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod meshgen;
pub mod scatter;
pub mod scene;

pub use meshgen::{generate, ExcitationSpec, Grid, MeshParams};
pub use scene::{parse_scene, SceneNode};
