//! Route planning for vessels in ice-covered oceans.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`mesh`] reads gridded sea-ice concentration, bathymetry and currents,
//!    splits a quadtree over the region where the data is complex, and
//!    links the leaves into a neighbour graph with compass case codes.
//! 2. [`vessel`] turns each cell's ice into a resistance, a safe speed and a
//!    fuel burn rate.
//! 3. [`planner`] optimises the crossing point between every pair of
//!    adjacent cells with [`crossing`] and runs Dijkstra between waypoints.
//! 4. [`smoother`] pulls the mesh path off the cell centres, re-solving each
//!    crossing with latitude-corrected solvers and inserting cells where
//!    the optimum leaves the shared boundary.
//!
//! [`validate`] checks finished routes against unaveraged ice data and
//! [`pipeline`] wires the stages together for the command-line tool.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod crossing;
pub mod error;
pub mod geo;
pub mod mesh;
pub mod pipeline;
pub mod planner;
pub mod route;
pub mod smoother;
pub mod synthetic;
pub mod validate;
pub mod vessel;

pub use error::{Error, Result};
pub use geo::{GeoPoint, Units};
