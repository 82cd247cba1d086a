//! Scoring pipeline output against synthetic ground truth.

use std::collections::BTreeMap;

use crate::curve::LaneCurve;
use crate::error::{Error, Result};
use crate::pipeline::FrameResult;
use crate::synth::{SyntheticScene, TruthLane, LABEL_BACKGROUND};

/// Default match tolerance on mean lateral error, in BEV pixels.
pub const LATERAL_TOLERANCE: f64 = 2.0;

/// Number of y positions used to compare two curves.
const COMPARE_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaneMetrics {
    pub truth_lanes: usize,
    pub fitted_lanes: usize,
    /// Truth dividers matched one-to-one by a lane within tolerance.
    pub matched: usize,
    pub recall: f64,
    /// Mean over paired dividers of their mean lateral error; NaN when nothing pairs.
    pub mean_lateral_error: f64,
    pub paired: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub purity: f64,
    pub lanes: LaneMetrics,
}

fn overlap(a: &LaneCurve, b: &LaneCurve) -> Option<(f64, f64)> {
    let lo = a.y_min.max(b.y_min);
    let hi = a.y_max.min(b.y_max);
    (hi > lo).then_some((lo, hi))
}

fn sample_ys(lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    (0..COMPARE_SAMPLES).map(move |k| lo + (hi - lo) * k as f64 / (COMPARE_SAMPLES - 1) as f64)
}

/// Mean `|x_fit(y) − x_truth(y)|` over the shared y range, if any.
pub fn mean_lateral_error(fit: &LaneCurve, truth: &LaneCurve) -> Option<f64> {
    let (lo, hi) = overlap(fit, truth)?;
    let sum: f64 = sample_ys(lo, hi).map(|y| (fit.x_at(y) - truth.x_at(y)).abs()).sum();
    Some(sum / COMPARE_SAMPLES as f64)
}

/// Largest `|x_fit(y) − x_truth(y)|` over `[y_lo, y_hi]`.
pub fn max_lateral_error(fit: &LaneCurve, truth: &LaneCurve, y_lo: f64, y_hi: f64) -> f64 {
    sample_ys(y_lo, y_hi)
        .map(|y| (fit.x_at(y) - truth.x_at(y)).abs())
        .fold(0.0, f64::max)
}

/// Greedy one-to-one pairing of truth dividers and fitted lanes by ascending
/// lateral error; a divider counts as recalled when its pair is within `tolerance`.
pub fn evaluate_lanes(fitted: &[LaneCurve], truth: &[TruthLane], tolerance: f64) -> LaneMetrics {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (t, tl) in truth.iter().enumerate() {
        for (f, fl) in fitted.iter().enumerate() {
            if let Some(e) = mean_lateral_error(fl, &tl.curve) {
                pairs.push((e, t, f));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut truth_used = vec![false; truth.len()];
    let mut fit_used = vec![false; fitted.len()];
    let (mut matched, mut paired, mut err_sum) = (0, 0, 0.0);
    for (e, t, f) in pairs {
        if truth_used[t] || fit_used[f] {
            continue;
        }
        truth_used[t] = true;
        fit_used[f] = true;
        paired += 1;
        err_sum += e;
        if e < tolerance {
            matched += 1;
        }
    }
    LaneMetrics {
        truth_lanes: truth.len(),
        fitted_lanes: fitted.len(),
        matched,
        recall: if truth.is_empty() {
            1.0
        } else {
            matched as f64 / truth.len() as f64
        },
        mean_lateral_error: if paired == 0 {
            f64::NAN
        } else {
            err_sum / paired as f64
        },
        paired,
    }
}

/// Most frequent key; ties go to the smallest.
fn majority<K: Ord + Copy>(counts: &BTreeMap<K, usize>) -> Option<K> {
    counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(k, _)| *k)
}

/// Fraction of clustered instances whose truth divider equals the majority
/// divider of their cluster. Each instance takes the majority label of its pixels.
pub fn cluster_purity(result: &FrameResult, truth: &SyntheticScene) -> f64 {
    let mut inst_label = BTreeMap::new();
    for inst in &result.instances {
        if result.clustering.cluster_of(inst.id).is_none() {
            continue;
        }
        let mut counts = BTreeMap::new();
        for p in &inst.pixels {
            *counts.entry(truth.label(p.row, p.col)).or_insert(0) += 1;
        }
        inst_label.insert(inst.id, majority(&counts).unwrap_or(LABEL_BACKGROUND));
    }
    if inst_label.is_empty() {
        return 1.0;
    }
    let mut cluster_counts: BTreeMap<usize, BTreeMap<u8, usize>> = BTreeMap::new();
    for (id, label) in &inst_label {
        let c = result.clustering.cluster_of(*id).expect("clustered");
        *cluster_counts.entry(c).or_default().entry(*label).or_insert(0) += 1;
    }
    let cluster_major: BTreeMap<usize, u8> = cluster_counts
        .iter()
        .map(|(c, counts)| (*c, majority(counts).expect("non-empty")))
        .collect();
    let pure = inst_label
        .iter()
        .filter(|(id, label)| cluster_major[&result.clustering.cluster_of(**id).unwrap()] == **label)
        .count();
    pure as f64 / inst_label.len() as f64
}

/// Cluster purity plus lane recall and lateral error.
pub fn evaluate(result: &FrameResult, truth: &SyntheticScene) -> Result<Metrics> {
    let size = (truth.mask.height(), truth.mask.width());
    if result.frame_size != size {
        return Err(Error::validation(format!(
            "result frame {:?} does not match truth frame {size:?}",
            result.frame_size
        )));
    }
    for inst in &result.instances {
        if inst.pixels.iter().any(|p| !truth.mask.get(p.row, p.col)) {
            return Err(Error::validation(format!(
                "instance {} covers pixels that are off in the truth mask",
                inst.id
            )));
        }
    }
    let fitted: Vec<LaneCurve> = result.lanes.iter().map(|l| l.curve).collect();
    Ok(Metrics {
        purity: cluster_purity(result, truth),
        lanes: evaluate_lanes(&fitted, &truth.truth, LATERAL_TOLERANCE),
    })
}
