//! Projective mapping between the camera image plane and the bird's-eye view.
//!
//! Pixel `(row, col)` is treated as the continuous point `(col + 0.5, row + 0.5)`.

use crate::error::{Error, Result};
use crate::instance::{Instance, Pixel};

/// Below this magnitude a homogeneous coordinate is treated as zero.
pub const W_EPSILON: f64 = 1e-12;
/// Smallest accepted `|det|` of a normalized homography.
pub const DET_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PointR2 {
    pub x: f64,
    pub y: f64,
}

impl PointR2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn pixel_center(p: Pixel) -> Self {
        Self::new(p.col as f64 + 0.5, p.row as f64 + 0.5)
    }

    pub fn midpoint(self, other: Self) -> Self {
        Self::new((self.x + other.x) * 0.5, (self.y + other.y) * 0.5)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// z-component of `(b - a) × (c - a)`.
pub fn cross(a: PointR2, b: PointR2, c: PointR2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Normalized 3×3 projective transform (`m[2][2] == 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    m: [[f64; 3]; 3],
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn mul3(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn adjugate(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    [
        [
            m[1][1] * m[2][2] - m[1][2] * m[2][1],
            m[0][2] * m[2][1] - m[0][1] * m[2][2],
            m[0][1] * m[1][2] - m[0][2] * m[1][1],
        ],
        [
            m[1][2] * m[2][0] - m[1][0] * m[2][2],
            m[0][0] * m[2][2] - m[0][2] * m[2][0],
            m[0][2] * m[1][0] - m[0][0] * m[1][2],
        ],
        [
            m[1][0] * m[2][1] - m[1][1] * m[2][0],
            m[0][1] * m[2][0] - m[0][0] * m[2][1],
            m[0][0] * m[1][1] - m[0][1] * m[1][0],
        ],
    ]
}

impl Homography {
    pub const IDENTITY: Homography = Homography {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    /// Scales `m` so that `m[2][2] == 1` and checks invertibility.
    pub fn from_matrix(m: [[f64; 3]; 3]) -> Result<Self> {
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::validation("homography has non-finite entries"));
        }
        let s = m[2][2];
        if s.abs() <= W_EPSILON {
            return Err(Error::validation(format!(
                "homography cannot be normalized: m[2][2] = {s:e}"
            )));
        }
        let mut n = m;
        for v in n.iter_mut().flatten() {
            *v /= s;
        }
        n[2][2] = 1.0;
        let det = det3(&n);
        if !(det.abs() > DET_EPSILON) {
            return Err(Error::validation(format!("homography is singular: det = {det:e}")));
        }
        Ok(Self { m: n })
    }

    pub fn matrix(&self) -> &[[f64; 3]; 3] {
        &self.m
    }

    pub fn determinant(&self) -> f64 {
        det3(&self.m)
    }

    /// The map that applies `first`, then `self`.
    pub fn compose(&self, first: &Homography) -> Result<Homography> {
        Homography::from_matrix(mul3(&self.m, &first.m))
    }
}

/// Four image-plane corners and their bird's-eye-view targets, each ordered
/// top-left, top-right, bottom-right, bottom-left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadCorrespondence {
    pub src: [PointR2; 4],
    pub dst: [PointR2; 4],
}

/// Sign of the (consistent) turn direction of a quad, or an error if any
/// three corners are collinear or the quad is not convex.
fn quad_orientation(q: &[PointR2; 4], which: &str) -> Result<f64> {
    if q.iter().any(|p| !p.is_finite()) {
        return Err(Error::Calibration(format!("{which} quad has non-finite corners")));
    }
    let mut extent: f64 = 0.0;
    for a in q {
        for b in q {
            extent = extent.max(a.distance(*b));
        }
    }
    let tol = 1e-12 * extent * extent;
    for skip in 0..4 {
        let tri: Vec<PointR2> = (0..4).filter(|&i| i != skip).map(|i| q[i]).collect();
        if cross(tri[0], tri[1], tri[2]).abs() <= tol {
            return Err(Error::Calibration(format!(
                "{which} quad has three collinear corners"
            )));
        }
    }
    let turns: Vec<f64> = (0..4)
        .map(|i| cross(q[i], q[(i + 1) % 4], q[(i + 2) % 4]).signum())
        .collect();
    if turns.iter().any(|&t| t != turns[0]) {
        return Err(Error::Calibration(format!("{which} quad is not convex")));
    }
    Ok(turns[0])
}

/// Projective map taking the unit square `(0,0),(1,0),(1,1),(0,1)` onto `q`.
fn square_to_quad(q: &[PointR2; 4]) -> Result<[[f64; 3]; 3]> {
    let [p0, p1, p2, p3] = *q;
    let sx = p0.x - p1.x + p2.x - p3.x;
    let sy = p0.y - p1.y + p2.y - p3.y;
    let (dx1, dx2) = (p1.x - p2.x, p3.x - p2.x);
    let (dy1, dy2) = (p1.y - p2.y, p3.y - p2.y);
    let den = dx1 * dy2 - dx2 * dy1;
    if den == 0.0 {
        return Err(Error::Calibration("corners 1..3 are collinear".into()));
    }
    let g = (sx * dy2 - dx2 * sy) / den;
    let h = (dx1 * sy - sx * dy1) / den;
    Ok([
        [p1.x - p0.x + g * p1.x, p3.x - p0.x + h * p3.x, p0.x],
        [p1.y - p0.y + g * p1.y, p3.y - p0.y + h * p3.y, p0.y],
        [g, h, 1.0],
    ])
}

/// Exact four-point homography taking each `src` corner onto its `dst` corner.
///
/// Built as `square→dst ∘ (square→src)⁻¹` from closed-form square-to-quad maps.
pub fn estimate_homography(c: &QuadCorrespondence) -> Result<Homography> {
    let o_src = quad_orientation(&c.src, "source")?;
    let o_dst = quad_orientation(&c.dst, "destination")?;
    if o_src != o_dst {
        return Err(Error::Calibration(
            "source and destination corners are ordered inconsistently".into(),
        ));
    }
    let to_src = square_to_quad(&c.src)?;
    let to_dst = square_to_quad(&c.dst)?;
    let det = det3(&to_src);
    if det.abs() <= DET_EPSILON {
        return Err(Error::Calibration(format!("source map is singular (det {det:e})")));
    }
    // The adjugate is the inverse up to scale, which normalization removes.
    let m = mul3(&to_dst, &adjugate(&to_src));
    Homography::from_matrix(m).map_err(|e| Error::Calibration(e.to_string()))
}

pub fn transform_point(h: &Homography, p: PointR2) -> Result<PointR2> {
    let m = &h.m;
    let w = m[2][0] * p.x + m[2][1] * p.y + m[2][2];
    if !(w.abs() > W_EPSILON) {
        return Err(Error::ProjectiveDegeneracy { w });
    }
    Ok(PointR2::new(
        (m[0][0] * p.x + m[0][1] * p.y + m[0][2]) / w,
        (m[1][0] * p.x + m[1][1] * p.y + m[1][2]) / w,
    ))
}

pub fn invert(h: &Homography) -> Result<Homography> {
    let det = h.determinant();
    if !(det.abs() > DET_EPSILON) {
        return Err(Error::validation(format!("cannot invert singular homography (det {det:e})")));
    }
    let mut inv = adjugate(&h.m);
    for v in inv.iter_mut().flatten() {
        *v /= det;
    }
    Homography::from_matrix(inv)
}

/// Maps every pixel center of `inst`, preserving pixel order.
pub fn transform_instance(h: &Homography, inst: &Instance) -> Result<Vec<PointR2>> {
    inst.pixels
        .iter()
        .map(|&p| transform_point(h, PointR2::pixel_center(p)))
        .collect()
}
