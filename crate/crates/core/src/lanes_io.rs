//! Text format for fitted (and ground-truth) lanes.
//!
//! Two lines per lane, numbers printed with 9 significant digits:
//!
//! ```text
//! <id> <c0> <c1> <c2> <y_min> <y_max>
//! <x>,<y> <x>,<y> ...
//! ```
//!
//! The first line describes the BEV curve `x = c2·y² + c1·y + c0`; the second
//! is the image-space polyline.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::curve::{back_project, sample_curve, LaneCurve};
use crate::error::{Error, Result};
use crate::geometry::PointR2;
use crate::imageio::{write_pgm, GrayImage};
use crate::pipeline::{Lane, Pipeline};
use crate::synth::SyntheticScene;

/// Formats like C's `%.9g`.
pub fn format_sig9(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-4..DIGITS).contains(&exp) {
        trim(&format!("{:.*}", (DIGITS - 1 - exp) as usize, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaneRecord {
    pub id: usize,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub polyline: Vec<PointR2>,
}

impl LaneRecord {
    pub fn from_curve(curve: &LaneCurve, polyline: &[PointR2]) -> Self {
        Self {
            id: curve.cluster_id,
            c0: curve.c0,
            c1: curve.c1,
            c2: curve.c2,
            y_min: curve.y_min,
            y_max: curve.y_max,
            polyline: polyline.to_vec(),
        }
    }

    pub fn curve(&self) -> LaneCurve {
        let degree = if self.c2 != 0.0 {
            2
        } else if self.c1 != 0.0 {
            1
        } else {
            0
        };
        LaneCurve {
            c0: self.c0,
            c1: self.c1,
            c2: self.c2,
            y_min: self.y_min,
            y_max: self.y_max,
            cluster_id: self.id,
            degree,
        }
    }
}

pub fn format_lanes(records: &[LaneRecord]) -> String {
    let mut s = String::new();
    for r in records {
        let _ = writeln!(
            s,
            "{} {} {} {} {} {}",
            r.id,
            format_sig9(r.c0),
            format_sig9(r.c1),
            format_sig9(r.c2),
            format_sig9(r.y_min),
            format_sig9(r.y_max)
        );
        let pts: Vec<String> = r
            .polyline
            .iter()
            .map(|p| format!("{},{}", format_sig9(p.x), format_sig9(p.y)))
            .collect();
        let _ = writeln!(s, "{}", pts.join(" "));
    }
    s
}

pub fn lane_records(lanes: &[Lane]) -> Vec<LaneRecord> {
    lanes
        .iter()
        .map(|l| LaneRecord::from_curve(&l.curve, l.polyline.points()))
        .collect()
}

fn parse_f64(line: usize, tok: &str) -> Result<f64> {
    tok.parse()
        .map_err(|_| Error::validation(format!("line {line}: bad number {tok:?}")))
}

pub fn parse_lanes(text: &str) -> Result<Vec<LaneRecord>> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    if lines.len() % 2 != 0 {
        return Err(Error::validation("lane file has a header without a polyline"));
    }
    lines
        .chunks(2)
        .map(|pair| {
            let (hn, header) = pair[0];
            let (pn, poly) = pair[1];
            let toks: Vec<&str> = header.split_whitespace().collect();
            if toks.len() != 6 {
                return Err(Error::validation(format!(
                    "line {hn}: expected 6 fields, got {}",
                    toks.len()
                )));
            }
            let id = toks[0]
                .parse()
                .map_err(|_| Error::validation(format!("line {hn}: bad id {:?}", toks[0])))?;
            let polyline = poly
                .split_whitespace()
                .map(|pair| {
                    let (x, y) = pair.split_once(',').ok_or_else(|| {
                        Error::validation(format!("line {pn}: expected x,y but got {pair:?}"))
                    })?;
                    Ok(PointR2::new(parse_f64(pn, x)?, parse_f64(pn, y)?))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(LaneRecord {
                id,
                c0: parse_f64(hn, toks[1])?,
                c1: parse_f64(hn, toks[2])?,
                c2: parse_f64(hn, toks[3])?,
                y_min: parse_f64(hn, toks[4])?,
                y_max: parse_f64(hn, toks[5])?,
                polyline,
            })
        })
        .collect()
}

pub fn read_lanes(path: impl AsRef<Path>) -> Result<Vec<LaneRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_lanes(&text).map_err(|e| Error::io(path, e))
}

pub fn write_lanes(path: impl AsRef<Path>, records: &[LaneRecord]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_lanes(records)).map_err(|e| Error::io(path, e))
}

/// Where the per-pixel divider map of a truth file lives: `truth.txt` → `truth.assign.pgm`.
pub fn assignment_path(truth_path: &Path) -> PathBuf {
    truth_path.with_extension("assign.pgm")
}

/// Truth curves in lane format (id = divider index), image polylines sampled
/// through `pipeline`'s inverse calibration.
pub fn truth_records(scene: &SyntheticScene, pipeline: &Pipeline) -> Result<Vec<LaneRecord>> {
    scene
        .truth
        .iter()
        .map(|t| {
            let samples = sample_curve(&t.curve, pipeline.config().sample_count)?;
            let poly = back_project(pipeline.to_image(), &samples)?;
            Ok(LaneRecord::from_curve(&t.curve, poly.points()))
        })
        .collect()
}

/// Writes the truth lanes to `path` and the assignment graymap next to it.
pub fn write_truth(path: impl AsRef<Path>, scene: &SyntheticScene, pipeline: &Pipeline) -> Result<()> {
    let path = path.as_ref();
    write_lanes(path, &truth_records(scene, pipeline)?)?;
    let img = GrayImage {
        width: scene.mask.width(),
        height: scene.mask.height(),
        data: scene.assignment.clone(),
    };
    write_pgm(assignment_path(path), &img)
}
