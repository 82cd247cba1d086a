//! Pipeline configuration and its flat `dotted.key=value` text form.
//!
//! ```text
//! # lines starting with '#' are comments
//! crop.top=40
//! cluster.eta=20
//! calibration.src=100,200 380,200 460,360 20,360
//! ```
//!
//! Keys missing from a file keep their defaults; unknown keys are rejected.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{estimate_homography, PointR2, QuadCorrespondence};
use crate::instance::Connectivity;
use crate::seg::LossParams;

/// Pixel margins removed before resizing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Crop {
    pub top: usize,
    pub bottom: usize,
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub crop: Crop,
    /// `(rows, cols)` after resizing.
    pub target_size: (usize, usize),
    /// Gray levels strictly above this become lane pixels.
    pub mask_threshold: u8,
    pub connectivity: Connectivity,
    pub min_instance_size: usize,
    pub calibration: QuadCorrespondence,
    pub eta: f64,
    pub sample_count: usize,
    pub loss: LossParams,
}

/// Image trapezoid → BEV rectangle for a 360×480 frame. The road plane between
/// rows 200 and 360 maps onto a 480-unit-deep strip.
pub const DEFAULT_CALIBRATION: QuadCorrespondence = QuadCorrespondence {
    src: [
        PointR2::new(100.0, 200.0),
        PointR2::new(380.0, 200.0),
        PointR2::new(460.0, 360.0),
        PointR2::new(20.0, 360.0),
    ],
    dst: [
        PointR2::new(120.0, 0.0),
        PointR2::new(360.0, 0.0),
        PointR2::new(360.0, 480.0),
        PointR2::new(120.0, 480.0),
    ],
};

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            crop: Crop::default(),
            target_size: (360, 480),
            mask_threshold: 127,
            connectivity: Connectivity::Eight,
            min_instance_size: 15,
            calibration: DEFAULT_CALIBRATION,
            eta: 20.0,
            sample_count: 50,
            loss: LossParams::default(),
        }
    }
}

fn format_quad(q: &[PointR2; 4]) -> String {
    q.iter()
        .map(|p| format!("{},{}", p.x, p.y))
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(format!("{key}: cannot parse {value:?}")))
}

fn parse_quad(key: &str, value: &str) -> Result<[PointR2; 4]> {
    let pts = value
        .split_whitespace()
        .map(|pair| {
            let (x, y) = pair
                .split_once(',')
                .ok_or_else(|| Error::config(format!("{key}: expected x,y but got {pair:?}")))?;
            Ok(PointR2::new(parse_num(key, x)?, parse_num(key, y)?))
        })
        .collect::<Result<Vec<_>>>()?;
    pts.try_into()
        .map_err(|v: Vec<_>| Error::config(format!("{key}: expected 4 corners, got {}", v.len())))
}

impl PipelineConfig {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let c = &self.crop;
        let _ = writeln!(s, "crop.top={}", c.top);
        let _ = writeln!(s, "crop.bottom={}", c.bottom);
        let _ = writeln!(s, "crop.left={}", c.left);
        let _ = writeln!(s, "crop.right={}", c.right);
        let _ = writeln!(s, "resize.rows={}", self.target_size.0);
        let _ = writeln!(s, "resize.cols={}", self.target_size.1);
        let _ = writeln!(s, "mask.threshold={}", self.mask_threshold);
        let _ = writeln!(s, "detect.connectivity={}", self.connectivity.neighbors());
        let _ = writeln!(s, "detect.min_size={}", self.min_instance_size);
        let _ = writeln!(s, "calibration.src={}", format_quad(&self.calibration.src));
        let _ = writeln!(s, "calibration.dst={}", format_quad(&self.calibration.dst));
        let _ = writeln!(s, "cluster.eta={}", self.eta);
        let _ = writeln!(s, "curve.samples={}", self.sample_count);
        let _ = writeln!(s, "loss.alpha={}", self.loss.alpha);
        let _ = writeln!(s, "loss.epsilon={}", self.loss.epsilon);
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}: expected key=value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "crop.top" => cfg.crop.top = parse_num(key, value)?,
                "crop.bottom" => cfg.crop.bottom = parse_num(key, value)?,
                "crop.left" => cfg.crop.left = parse_num(key, value)?,
                "crop.right" => cfg.crop.right = parse_num(key, value)?,
                "resize.rows" => cfg.target_size.0 = parse_num(key, value)?,
                "resize.cols" => cfg.target_size.1 = parse_num(key, value)?,
                "mask.threshold" => cfg.mask_threshold = parse_num(key, value)?,
                "detect.connectivity" => {
                    cfg.connectivity = Connectivity::from_neighbors(parse_num(key, value)?)
                        .ok_or_else(|| Error::config(format!("{key}: must be 4 or 8")))?
                }
                "detect.min_size" => cfg.min_instance_size = parse_num(key, value)?,
                "calibration.src" => cfg.calibration.src = parse_quad(key, value)?,
                "calibration.dst" => cfg.calibration.dst = parse_quad(key, value)?,
                "cluster.eta" => cfg.eta = parse_num(key, value)?,
                "curve.samples" => cfg.sample_count = parse_num(key, value)?,
                "loss.alpha" => cfg.loss.alpha = parse_num(key, value)?,
                "loss.epsilon" => cfg.loss.epsilon = parse_num(key, value)?,
                other => return Err(Error::config(format!("unknown key {other:?}"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_size.0 == 0 || self.target_size.1 == 0 {
            return Err(Error::config("resize target must be at least 1x1"));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::config(format!("cluster.eta must be > 0, got {}", self.eta)));
        }
        if self.sample_count < 2 {
            return Err(Error::config("curve.samples must be >= 2"));
        }
        self.loss
            .validate()
            .map_err(|e| Error::config(e.to_string()))?;
        estimate_homography(&self.calibration).map_err(|e| Error::config(e.to_string()))?;
        Ok(())
    }
}
