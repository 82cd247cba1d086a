//! Soft dice loss with a false-positive penalty, its analytic gradient, and
//! the pixel accuracy metric.
//!
//! The penalty comes from rewriting the ground truth before it enters the
//! numerator: every zero entry becomes `-alpha`, so predicted mass on
//! background-truth entries lowers the overlap term instead of being ignored.

use super::volume::{volume_mean, ScoreVolume};
use crate::error::{Error, Result};

/// Penalty and smoothing constants of the custom dice loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParams {
    pub alpha: f64,
    pub epsilon: f64,
}

impl LossParams {
    pub const DEFAULT_ALPHA: f64 = 1e-2;
    pub const DEFAULT_EPSILON: f64 = 1e-5;

    pub fn new(alpha: f64, epsilon: f64) -> Result<Self> {
        let p = Self { alpha, epsilon };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::validation(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::validation(format!(
                "epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

impl Default for LossParams {
    fn default() -> Self {
        Self {
            alpha: Self::DEFAULT_ALPHA,
            epsilon: Self::DEFAULT_EPSILON,
        }
    }
}

/// Replaces every zero entry of a one-hot ground truth with `-alpha`.
///
/// `alpha = 0` is accepted and returns the input unchanged.
pub fn modify_ground_truth(gt: &ScoreVolume, alpha: f64) -> Result<ScoreVolume> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::validation(format!("alpha must be >= 0, got {alpha}")));
    }
    gt.validate_one_hot()?;
    let mut out = gt.clone();
    for v in out.values_mut() {
        if *v == 0.0 {
            // 0.0 - 0.0 keeps a positive zero, so alpha = 0 is bit-identical.
            *v = 0.0 - alpha;
        }
    }
    Ok(out)
}

fn check_inputs(gt: &ScoreVolume, pred: &ScoreVolume, p: &LossParams) -> Result<()> {
    p.validate()?;
    gt.ensure_same_shape(pred)?;
    gt.validate_one_hot()?;
    pred.validate_probabilities()
}

fn hadamard(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

/// Per-channel numerator and denominator of the dice ratio.
struct ChannelTerms {
    numerator: f64,
    denominator: f64,
}

fn channel_terms(
    gt: &ScoreVolume,
    modified: &ScoreVolume,
    pred: &ScoreVolume,
    k: usize,
    eps: f64,
) -> Result<ChannelTerms> {
    let (g, gh, y) = (gt.channel(k), modified.channel(k), pred.channel(k));
    let numerator = 2.0 * volume_mean(&hadamard(gh, y))? + eps;
    let denominator = volume_mean(&hadamard(g, g))? + volume_mean(&hadamard(y, y))? + eps;
    Ok(ChannelTerms {
        numerator,
        denominator,
    })
}

/// Negative sum over channels of the smoothed dice ratio computed against the
/// false-positive-penalizing ground truth.
pub fn custom_dice_loss(gt: &ScoreVolume, pred: &ScoreVolume, p: &LossParams) -> Result<f64> {
    check_inputs(gt, pred, p)?;
    let modified = modify_ground_truth(gt, p.alpha)?;
    let mut loss = 0.0;
    for k in 0..gt.channels() {
        let t = channel_terms(gt, &modified, pred, k, p.epsilon)?;
        loss -= t.numerator / t.denominator;
    }
    Ok(loss)
}

/// Analytic derivative of [`custom_dice_loss`] with respect to every prediction entry.
///
/// For channel `k` with `N = H·W`, numerator `A` and denominator `B`:
/// `dL/dy[i,j,k] = -(2·ĝ[i,j,k]·B - 2·y[i,j,k]·A) / (N·B²)`.
/// Channels do not interact, so the gradient for channel `k` only reads channel `k`.
pub fn custom_dice_loss_gradient(
    gt: &ScoreVolume,
    pred: &ScoreVolume,
    p: &LossParams,
) -> Result<ScoreVolume> {
    check_inputs(gt, pred, p)?;
    let modified = modify_ground_truth(gt, p.alpha)?;
    let n = (gt.height() * gt.width()) as f64;
    let plane = gt.height() * gt.width();
    let mut grad = ScoreVolume::zeros(gt.height(), gt.width(), gt.channels())?;
    for k in 0..gt.channels() {
        let ChannelTerms {
            numerator: a,
            denominator: b,
        } = channel_terms(gt, &modified, pred, k, p.epsilon)?;
        let scale = -2.0 / (n * b * b);
        let (gh, y) = (modified.channel(k), pred.channel(k));
        let out = &mut grad.values_mut()[k * plane..(k + 1) * plane];
        for ((o, &ghv), &yv) in out.iter_mut().zip(gh).zip(y) {
            *o = scale * (ghv * b - yv * a);
        }
    }
    Ok(grad)
}

fn argmax_channel(v: &ScoreVolume, i: usize, j: usize) -> usize {
    let mut best = 0;
    for k in 1..v.channels() {
        if v.get(i, j, k) > v.get(i, j, best) {
            best = k;
        }
    }
    best
}

/// Fraction of pixels whose arg-max channel agrees between prediction and truth.
/// Ties resolve to the lowest channel index.
pub fn pixel_accuracy(gt: &ScoreVolume, pred: &ScoreVolume) -> Result<f64> {
    gt.ensure_same_shape(pred)?;
    gt.validate_one_hot()?;
    let mut hits = 0usize;
    for i in 0..gt.height() {
        for j in 0..gt.width() {
            if argmax_channel(gt, i, j) == argmax_channel(pred, i, j) {
                hits += 1;
            }
        }
    }
    Ok(hits as f64 / (gt.height() * gt.width()) as f64)
}
