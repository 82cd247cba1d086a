//! Lane-detection post-processing.
//!
//! A binary lane-marking mask goes through:
//!
//! 1. [`instance::label_instances`]: breadth-first flood fill into marking instances,
//! 2. [`geometry`]: a four-point homography into the bird's-eye view (BEV),
//! 3. [`cluster::cluster_instances`]: attentive voting that groups markings into dividers,
//! 4. [`curve`]: a second-degree fit per divider, projected back into the image.
//!
//! [`seg`] holds the segmentation-side numerics (penalized soft dice loss,
//! its gradient, accuracy, network shape arithmetic). [`synth`] and [`eval`]
//! generate and score synthetic scenes; [`bench`] times the stages.

pub mod bench;
pub mod cluster;
pub mod config;
pub mod curve;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod imageio;
pub mod instance;
pub mod lanes_io;
pub mod overlay;
pub mod pipeline;
pub mod seg;
pub mod synth;

pub use cluster::{cluster_instances, facing_point, fit_line, vote, BevInstance, Clustering, FittedLine};
pub use config::{Crop, PipelineConfig};
pub use curve::{back_project, fit_curve, sample_curve, LaneCurve, Polyline};
pub use error::{Error, ErrorCategory, Result};
pub use geometry::{
    estimate_homography, invert, transform_instance, transform_point, Homography, PointR2,
    QuadCorrespondence,
};
pub use instance::{extremal_pixels, label_instances, BinaryMask, Connectivity, Instance, Pixel};
pub use pipeline::{crop_and_resize, run_frame, FrameResult, Lane, Pipeline, StageTimings};
pub use synth::{generate_synthetic_scene, SynthParams, SyntheticScene, TruthLane};
