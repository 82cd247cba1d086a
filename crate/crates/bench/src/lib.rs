//! Fixtures shared by the criterion benches.

use lanevote_core::{
    generate_synthetic_scene, BinaryMask, Pipeline, PipelineConfig, SynthParams,
};

pub fn default_pipeline() -> Pipeline {
    Pipeline::new(PipelineConfig::default()).expect("default config is valid")
}

/// A busy but realistic frame: four dashed dividers with light noise and occlusion.
pub fn scene_mask(pipeline: &Pipeline, seed: u64) -> BinaryMask {
    let params = SynthParams {
        num_lanes: 4,
        noise_rate: 0.0005,
        occlusion_rate: 0.1,
        ..SynthParams::default()
    };
    generate_synthetic_scene(&params, pipeline, seed)
        .expect("valid synthetic parameters")
        .mask
}
