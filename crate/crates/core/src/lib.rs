//! Offline sonification of geolocated reef observations.
//!
//! The pipeline clusters observations by position (OPTICS), maps each
//! cluster's bleaching, depth and PAR onto two synthesized sound layers, and
//! places every cluster as a source on a third-order ambisonic sphere.
//!
//! ```text
//! ingest -> clustering -> mapping -> synthesis -> ambisonics -> renderer
//! ```
//!
//! See the `examples/` directory for one runnable program per stage.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ambisonics;
pub mod cli;
pub mod clustering;
pub mod error;
pub mod ingest;
pub mod mapping;
pub mod pipeline;
pub mod renderer;
pub mod synthesis;

pub use error::{Error, Result};
