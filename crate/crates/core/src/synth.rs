//! Seeded synthetic lane scenes with pixel-level ground truth.
//!
//! Lane dividers are drawn as parallel quadratics in the bird's-eye view,
//! cut into dashes, and rasterized into the image through the calibration:
//! an image pixel is lit when its center maps into a visible dash. Only
//! painted, unoccluded markings are labeled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curve::LaneCurve;
use crate::error::{Error, Result};
use crate::geometry::{transform_point, PointR2};
use crate::instance::BinaryMask;
use crate::pipeline::Pipeline;

/// Assignment label of background pixels.
pub const LABEL_BACKGROUND: u8 = 0;
/// Assignment label of pixels switched on by noise.
pub const LABEL_NOISE: u8 = 255;

/// BEV depth covered by synthetic markings.
const BEV_Y_RANGE: (f64, f64) = (0.0, 480.0);
/// Reference row (nearest the vehicle) where lane offsets are anchored.
const BEV_Y_REF: f64 = 480.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub num_lanes: usize,
    /// Largest `|c2|` of the shared road curvature, in BEV units.
    pub curvature_range: f64,
    /// Largest `|dx/dy|` of the shared heading at the reference row.
    pub heading_range: f64,
    /// Lateral distance between neighbouring dividers (BEV px).
    pub lane_spacing: f64,
    pub dash_length: f64,
    pub gap_length: f64,
    /// Offset of the dash pattern along y; dashes start at `y_min + phase + k·period`.
    pub dash_phase: f64,
    pub dash_width: f64,
    /// Probability each pixel is flipped.
    pub noise_rate: f64,
    /// Probability each dash is hidden.
    pub occlusion_rate: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            num_lanes: 3,
            curvature_range: 1e-4,
            heading_range: 0.03,
            lane_spacing: 48.0,
            dash_length: 80.0,
            gap_length: 40.0,
            dash_phase: 0.0,
            dash_width: 6.0,
            noise_rate: 0.0,
            occlusion_rate: 0.0,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let rate = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be in [0, 1], got {v}")))
            }
        };
        rate("noise_rate", self.noise_rate)?;
        rate("occlusion_rate", self.occlusion_rate)?;
        if self.num_lanes == 0 {
            return Err(Error::config("num_lanes must be >= 1"));
        }
        let positive = [
            ("dash_length", self.dash_length),
            ("dash_width", self.dash_width),
            ("lane_spacing", self.lane_spacing),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be > 0, got {v}")));
            }
        }
        let non_negative = [
            ("curvature_range", self.curvature_range),
            ("heading_range", self.heading_range),
            ("gap_length", self.gap_length),
            ("dash_phase", self.dash_phase),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Ground-truth curve of one visible lane divider.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthLane {
    pub divider: usize,
    /// BEV curve; `cluster_id` holds the divider index and the y range spans
    /// the divider's visible dashes.
    pub curve: LaneCurve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub mask: BinaryMask,
    pub truth: Vec<TruthLane>,
    /// Row-major per-pixel labels: [`LABEL_BACKGROUND`], `divider + 1`, or [`LABEL_NOISE`].
    pub assignment: Vec<u8>,
}

impl SyntheticScene {
    pub fn label(&self, row: usize, col: usize) -> u8 {
        self.assignment[row * self.mask.width() + col]
    }
}

struct Divider {
    curve: LaneCurve,
    /// Visible dash intervals in BEV y.
    dashes: Vec<(f64, f64)>,
}

/// Draws a scene at the pipeline's target size. Identical inputs give
/// bit-identical scenes.
pub fn generate_synthetic_scene(
    params: &SynthParams,
    pipeline: &Pipeline,
    seed: u64,
) -> Result<SyntheticScene> {
    params.validate()?;
    if params.num_lanes > 250 {
        return Err(Error::config("num_lanes must be <= 250"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (rows, cols) = pipeline.config().target_size;

    let c2 = rng.random_range(-1.0..=1.0) * params.curvature_range;
    let heading = rng.random_range(-1.0..=1.0) * params.heading_range;
    let center = 240.0 + rng.random_range(-8.0..=8.0);
    let first = center - params.lane_spacing * (params.num_lanes - 1) as f64 / 2.0;

    let period = params.dash_length + params.gap_length;
    let (y_lo, y_hi) = BEV_Y_RANGE;
    let mut dividers = Vec::with_capacity(params.num_lanes);
    for lane in 0..params.num_lanes {
        let base = first + params.lane_spacing * lane as f64 + rng.random_range(-3.0..=3.0);
        // x = base + heading·(y − ref) + c2·(y − ref)², expanded in y.
        let curve = LaneCurve {
            c2,
            c1: heading - 2.0 * c2 * BEV_Y_REF,
            c0: base - heading * BEV_Y_REF + c2 * BEV_Y_REF * BEV_Y_REF,
            y_min: y_lo,
            y_max: y_hi,
            cluster_id: lane,
            degree: 2,
        };
        let mut dashes = Vec::new();
        let mut start = y_lo + params.dash_phase % period - period;
        while start < y_hi {
            let (a, b) = (start.max(y_lo), (start + params.dash_length).min(y_hi));
            start += period;
            if b <= a {
                continue;
            }
            // draw unconditionally so the stream does not depend on earlier outcomes
            let hidden = rng.random_bool(params.occlusion_rate);
            if !hidden {
                dashes.push((a, b));
            }
        }
        dividers.push(Divider { curve, dashes });
    }

    let half_width = params.dash_width / 2.0;
    let mut bits = vec![false; rows * cols];
    let mut assignment = vec![LABEL_BACKGROUND; rows * cols];
    let mut seen = vec![(f64::INFINITY, f64::NEG_INFINITY); dividers.len()];
    for r in 0..rows {
        for c in 0..cols {
            let center = PointR2::new(c as f64 + 0.5, r as f64 + 0.5);
            let Ok(p) = transform_point(pipeline.to_bev(), center) else {
                continue;
            };
            if !(p.y >= y_lo && p.y <= y_hi) {
                continue;
            }
            for (d, div) in dividers.iter().enumerate() {
                if (p.x - div.curve.x_at(p.y)).abs() <= half_width
                    && div.dashes.iter().any(|&(a, b)| p.y >= a && p.y <= b)
                {
                    bits[r * cols + c] = true;
                    assignment[r * cols + c] = (d + 1) as u8;
                    seen[d] = (seen[d].0.min(p.y), seen[d].1.max(p.y));
                    break;
                }
            }
        }
    }

    if params.noise_rate > 0.0 {
        for (bit, label) in bits.iter_mut().zip(assignment.iter_mut()) {
            if rng.random_bool(params.noise_rate) {
                *bit = !*bit;
                *label = if *bit { LABEL_NOISE } else { LABEL_BACKGROUND };
            }
        }
    }

    let truth = dividers
        .iter()
        .enumerate()
        .filter(|(d, _)| seen[*d].0 <= seen[*d].1)
        .map(|(d, div)| {
            let (first_y, last_y) = div
                .dashes
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(a, b)| {
                    (lo.min(a), hi.max(b))
                });
            TruthLane {
                divider: d,
                curve: LaneCurve {
                    y_min: first_y,
                    y_max: last_y,
                    ..div.curve
                },
            }
        })
        .collect();

    Ok(SyntheticScene {
        mask: BinaryMask::from_bits(rows, cols, bits)?,
        truth,
        assignment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PipelineConfig;

    fn pipeline() -> Pipeline {
        Pipeline::new(PipelineConfig::default()).unwrap()
    }

    #[test]
    fn noiseless_scene_labels_every_pixel() {
        let p = SynthParams {
            num_lanes: 1,
            curvature_range: 0.0,
            heading_range: 0.0,
            ..SynthParams::default()
        };
        let s = generate_synthetic_scene(&p, &pipeline(), 3).unwrap();
        assert!(s.mask.count_ones() > 0);
        for (bit, label) in s.mask.bits().iter().zip(&s.assignment) {
            assert_eq!(*bit, *label == 1);
        }
        assert_eq!(s.truth.len(), 1);
        assert_eq!((s.truth[0].curve.c1, s.truth[0].curve.c2), (0.0, 0.0));
        assert_eq!((s.truth[0].curve.y_min, s.truth[0].curve.y_max), (0.0, 440.0));
    }

    #[test]
    fn deterministic_per_seed() {
        let p = SynthParams {
            noise_rate: 0.001,
            occlusion_rate: 0.3,
            ..SynthParams::default()
        };
        let a = generate_synthetic_scene(&p, &pipeline(), 42).unwrap();
        let b = generate_synthetic_scene(&p, &pipeline(), 42).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic_scene(&p, &pipeline(), 43).unwrap();
        assert_ne!(a.mask, c.mask);
    }

    #[test]
    fn full_occlusion_leaves_nothing() {
        let p = SynthParams {
            occlusion_rate: 1.0,
            ..SynthParams::default()
        };
        let s = generate_synthetic_scene(&p, &pipeline(), 1).unwrap();
        assert_eq!(s.mask.count_ones(), 0);
        assert!(s.truth.is_empty());
    }

    #[test]
    fn rejects_bad_params() {
        let bad = [
            SynthParams {
                num_lanes: 0,
                ..SynthParams::default()
            },
            SynthParams {
                noise_rate: 1.5,
                ..SynthParams::default()
            },
            SynthParams {
                occlusion_rate: -0.1,
                ..SynthParams::default()
            },
            SynthParams {
                dash_width: 0.0,
                ..SynthParams::default()
            },
        ];
        for p in bad {
            assert!(matches!(
                generate_synthetic_scene(&p, &pipeline(), 0),
                Err(Error::Config(_))
            ));
        }
    }
}
