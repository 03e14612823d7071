//! OSM road geometry plus DEM/LiDAR terrain in, OpenDRIVE 1.4 and OBJ meshes out.
//!
//! Stages: [`geo`] (OSM parsing, local frame, road graph), [`terrain`] (DEM,
//! point clouds, ground rasters), [`registration`] (ICP fine-tuning of
//! centerlines), [`converter`] (graph to [`odr`] map), [`meshgen`] (road and
//! terrain meshes) and [`cli`] (the `twinmap` command). [`synth`] builds the
//! synthetic fixtures used by tests and examples.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod geo;
pub mod geom;
pub mod terrain;
pub mod registration;
pub mod odr;
pub mod config;
pub mod converter;
pub mod meshgen;
pub mod synth;
pub mod cli;
