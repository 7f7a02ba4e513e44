//! Defensive formation generation for ice hockey.
//!
//! Five defenders run density-weighted Voronoi coverage over the left half
//! of the rink while replaying recorded attacker trajectories. Defenders
//! inside the house area may be assigned a pass cut, enforced through an
//! ellipsoidal control barrier function between the targeted attacker and
//! the puck holder.
//!
//! Module map:
//! - [`field`]: rink geometry, zones, integration grid
//! - [`density`]: the weight field built from attacker state
//! - [`coverage`]: Voronoi partition, centroids, nominal inputs, cost
//! - [`cbf`]: ellipsoidal and line barriers, QP safety filter
//! - [`engine`]: pair selection and the simulation loop
//! - [`scene`], [`trace`], [`render`]: file formats and SVG output

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cbf;
pub mod coverage;
pub mod density;
pub mod engine;
pub mod field;
pub mod render;
pub mod scene;
pub mod trace;

pub use cbf::{CbfParams, EllipseCbf, LineCbf};
pub use coverage::{ControlInput, DefenderState, VoronoiPartition};
pub use density::{DensityParams, OffensiveFrame, OffensivePlayer, WeightField};
pub use engine::{run, run_with, step, SimParams, SimTrace};
pub use field::{FieldSpec, Grid, Point2};
pub use scene::{load_scene, Scene};
