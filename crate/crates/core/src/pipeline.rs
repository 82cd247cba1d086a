//! Post-segmentation pipeline: instance labeling → bird's-eye view →
//! attentive voting → per-cluster curve fitting → back-projection.
//!
//! The segmentation network is not part of this crate; frames enter as
//! binary lane-marking masks.

use std::time::Instant;

use crate::cluster::{cluster_instances, BevInstance, Clustering, SAME_Y_TOLERANCE};
use crate::config::PipelineConfig;
use crate::curve::{back_project, fit_curve, sample_curve, LaneCurve, Polyline};
use crate::error::{Error, Result};
use crate::geometry::{estimate_homography, invert, transform_instance, Homography, PointR2};
use crate::instance::{label_instances, BinaryMask, Instance};

/// Removes the crop margins, then nearest-neighbor resizes to the target size.
///
/// Output pixel `(r, c)` reads source pixel `(⌊r·h/H⌋, ⌊c·w/W⌋)` of the cropped frame.
pub fn crop_and_resize(mask: &BinaryMask, config: &PipelineConfig) -> Result<BinaryMask> {
    let c = config.crop;
    let (h, w) = (mask.height(), mask.width());
    if c.top + c.bottom >= h || c.left + c.right >= w {
        return Err(Error::config(format!(
            "crop {}/{}/{}/{} (top/bottom/left/right) leaves nothing of a {h}x{w} mask",
            c.top, c.bottom, c.left, c.right
        )));
    }
    let (ch, cw) = (h - c.top - c.bottom, w - c.left - c.right);
    let (th, tw) = config.target_size;
    if th == 0 || tw == 0 {
        return Err(Error::config("resize target must be at least 1x1"));
    }
    let mut out = BinaryMask::new(th, tw)?;
    for r in 0..th {
        let sr = c.top + r * ch / th;
        for col in 0..tw {
            let sc = c.left + col * cw / tw;
            if mask.get(sr, sc) {
                out.set(r, col, true);
            }
        }
    }
    Ok(out)
}

/// Wall-clock milliseconds spent in each stage of one frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StageTimings {
    pub detect_ms: f64,
    pub bev_ms: f64,
    pub vote_ms: f64,
    pub fit_ms: f64,
}

impl StageTimings {
    pub fn total_ms(&self) -> f64 {
        self.detect_ms + self.bev_ms + self.vote_ms + self.fit_ms
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.detect_ms, self.bev_ms, self.vote_ms, self.fit_ms]
    }

    pub const STAGE_NAMES: [&'static str; 4] = ["detect", "bev", "vote", "fit"];
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lane {
    /// BEV-space curve.
    pub curve: LaneCurve,
    /// Image-space samples of the curve.
    pub polyline: Polyline,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameResult {
    pub frame_size: (usize, usize),
    /// Every labeled instance, in id order.
    pub instances: Vec<Instance>,
    /// Ids of instances left out of voting because their BEV points share one
    /// row, which gives them no orientation.
    pub flat_instances: Vec<usize>,
    pub clustering: Clustering,
    /// One lane per cluster, in cluster id order.
    pub lanes: Vec<Lane>,
    pub timings: StageTimings,
}

impl FrameResult {
    pub fn num_instances(&self) -> usize {
        self.instances.len()
    }

    pub fn num_clusters(&self) -> usize {
        self.clustering.num_clusters()
    }
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// A validated configuration with its homographies precomputed.
#[derive(Debug, Clone)]
pub struct Pipeline {
    config: PipelineConfig,
    to_bev: Homography,
    to_image: Homography,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        let to_bev = estimate_homography(&config.calibration)?;
        let to_image = invert(&to_bev)?;
        Ok(Self {
            config,
            to_bev,
            to_image,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    /// Image → BEV.
    pub fn to_bev(&self) -> &Homography {
        &self.to_bev
    }

    /// BEV → image.
    pub fn to_image(&self) -> &Homography {
        &self.to_image
    }

    /// Maps instances into the BEV, separating out those with no y extent.
    pub fn bev_instances(&self, instances: &[Instance]) -> Result<(Vec<BevInstance>, Vec<usize>)> {
        let mut bev = Vec::with_capacity(instances.len());
        let mut flat = Vec::new();
        for inst in instances {
            let b = BevInstance::new(inst.id, transform_instance(&self.to_bev, inst)?)?;
            if b.y_extent() <= SAME_Y_TOLERANCE {
                flat.push(inst.id);
            } else {
                bev.push(b);
            }
        }
        Ok((bev, flat))
    }

    /// Fits, samples and back-projects one lane per cluster.
    pub fn fit_lanes(&self, bev: &[BevInstance], clustering: &Clustering) -> Result<Vec<Lane>> {
        let mut points_of: Vec<Vec<PointR2>> = vec![Vec::new(); clustering.num_clusters()];
        for inst in bev {
            if let Some(c) = clustering.cluster_of(inst.id) {
                points_of[c].extend_from_slice(&inst.points);
            }
        }
        points_of
            .iter()
            .enumerate()
            .map(|(cid, pts)| {
                let curve = fit_curve(pts, cid)?;
                let samples = sample_curve(&curve, self.config.sample_count)?;
                let polyline = back_project(&self.to_image, &samples)?;
                Ok(Lane { curve, polyline })
            })
            .collect()
    }

    /// Runs every post-segmentation stage on a mask of the target size.
    pub fn run_frame(&self, mask: &BinaryMask) -> Result<FrameResult> {
        let (th, tw) = self.config.target_size;
        if (mask.height(), mask.width()) != (th, tw) {
            return Err(Error::validation(format!(
                "mask is {}x{}, pipeline expects {th}x{tw}",
                mask.height(),
                mask.width()
            )));
        }
        let mut timings = StageTimings::default();

        let t = Instant::now();
        let instances = label_instances(mask, self.config.connectivity, self.config.min_instance_size);
        timings.detect_ms = elapsed_ms(t);

        let t = Instant::now();
        let (bev, flat_instances) = self.bev_instances(&instances)?;
        timings.bev_ms = elapsed_ms(t);

        let t = Instant::now();
        let clustering = cluster_instances(&bev, self.config.eta)?;
        timings.vote_ms = elapsed_ms(t);

        let t = Instant::now();
        let lanes = self.fit_lanes(&bev, &clustering)?;
        timings.fit_ms = elapsed_ms(t);

        Ok(FrameResult {
            frame_size: (th, tw),
            instances,
            flat_instances,
            clustering,
            lanes,
            timings,
        })
    }
}

/// One-shot convenience wrapper around [`Pipeline::run_frame`].
pub fn run_frame(mask: &BinaryMask, config: &PipelineConfig) -> Result<FrameResult> {
    Pipeline::new(config.clone())?.run_frame(mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Crop;

    fn pattern(h: usize, w: usize) -> BinaryMask {
        let bits = (0..h * w).map(|i| (i * 7919 + i / w) % 5 == 0).collect();
        BinaryMask::from_bits(h, w, bits).unwrap()
    }

    #[test]
    fn resize_identity_at_target_size() {
        let m = pattern(360, 480);
        assert_eq!(crop_and_resize(&m, &PipelineConfig::default()).unwrap(), m);
    }

    #[test]
    fn resize_decimates_by_two() {
        let src = pattern(720, 960);
        let out = crop_and_resize(&src, &PipelineConfig::default()).unwrap();
        for r in 0..360 {
            for c in 0..480 {
                assert_eq!(out.get(r, c), src.get(2 * r, 2 * c));
            }
        }
    }

    #[test]
    fn crop_shifts_rows() {
        let src = pattern(460, 480);
        let cfg = PipelineConfig {
            crop: Crop {
                top: 100,
                ..Crop::default()
            },
            ..PipelineConfig::default()
        };
        let out = crop_and_resize(&src, &cfg).unwrap();
        for r in 0..360 {
            for c in 0..480 {
                assert_eq!(out.get(r, c), src.get(r + 100, c));
            }
        }
    }

    #[test]
    fn degenerate_crop_is_config_error() {
        let cfg = PipelineConfig {
            crop: Crop {
                top: 200,
                bottom: 160,
                ..Crop::default()
            },
            ..PipelineConfig::default()
        };
        assert!(matches!(crop_and_resize(&pattern(360, 480), &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn empty_frame_has_no_lanes() {
        let r = run_frame(&BinaryMask::new(360, 480).unwrap(), &PipelineConfig::default()).unwrap();
        assert_eq!((r.num_instances(), r.num_clusters(), r.lanes.len()), (0, 0, 0));
        assert!(r.timings.total_ms() >= 0.0);
    }

    #[test]
    fn wrong_size_is_rejected() {
        let r = run_frame(&BinaryMask::new(10, 10).unwrap(), &PipelineConfig::default());
        assert!(matches!(r, Err(Error::Validation(_))));
    }

    #[test]
    fn single_solid_marking() {
        let mut m = BinaryMask::new(360, 480).unwrap();
        for r in 210..350 {
            for c in 236..244 {
                m.set(r, c, true);
            }
        }
        let res = run_frame(&m, &PipelineConfig::default()).unwrap();
        assert_eq!((res.num_instances(), res.num_clusters(), res.lanes.len()), (1, 1, 1));
        assert_eq!(res.lanes[0].polyline.points().len(), 50);
    }

    #[test]
    fn one_row_blob_is_left_out_of_voting() {
        let mut m = BinaryMask::new(360, 480).unwrap();
        for c in 100..130 {
            m.set(300, c, true);
        }
        let res = run_frame(&m, &PipelineConfig::default()).unwrap();
        assert_eq!(res.num_instances(), 1);
        assert_eq!(res.flat_instances, vec![0]);
        assert!(res.lanes.is_empty());
    }
}
