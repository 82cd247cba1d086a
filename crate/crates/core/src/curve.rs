//! Second-degree lane curves in the bird's-eye view and their projection back
//! into the image.

use crate::cluster::SAME_Y_TOLERANCE;
use crate::error::{Error, Result};
use crate::geometry::{transform_point, Homography, PointR2};

/// Consecutive back-projected points closer than this are merged.
pub const DUPLICATE_TOLERANCE: f64 = 1e-6;

/// `x = c2·y² + c1·y + c0` over `[y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaneCurve {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub cluster_id: usize,
    /// Polynomial degree actually fitted (0, 1 or 2).
    pub degree: u8,
}

impl LaneCurve {
    pub fn x_at(&self, y: f64) -> f64 {
        self.c2 * y * y + self.c1 * y + self.c0
    }
}

/// Ordered image-space points, strictly monotonic in y.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    points: Vec<PointR2>,
}

impl Polyline {
    pub fn new(points: Vec<PointR2>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::validation(format!(
                "polyline needs at least 2 points, got {}",
                points.len()
            )));
        }
        let increasing = points.windows(2).all(|w| w[1].y > w[0].y);
        let decreasing = points.windows(2).all(|w| w[1].y < w[0].y);
        if !(increasing || decreasing) {
            return Err(Error::validation("polyline is not strictly monotonic in y"));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[PointR2] {
        &self.points
    }

    pub fn into_points(self) -> Vec<PointR2> {
        self.points
    }
}

/// Solves the symmetric positive-definite system `a·x = b` by Cholesky factorization.
fn solve_spd<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Result<[f64; N]> {
    for j in 0..N {
        let mut d = a[j][j];
        for k in 0..j {
            d -= a[j][k] * a[j][k];
        }
        if !(d > 0.0) {
            return Err(Error::validation("normal matrix is not positive definite"));
        }
        let d = d.sqrt();
        a[j][j] = d;
        for i in j + 1..N {
            let mut s = a[i][j];
            for k in 0..j {
                s -= a[i][k] * a[j][k];
            }
            a[i][j] = s / d;
        }
    }
    for i in 0..N {
        for k in 0..i {
            b[i] -= a[i][k] * b[k];
        }
        b[i] /= a[i][i];
    }
    for i in (0..N).rev() {
        for k in i + 1..N {
            b[i] -= a[k][i] * b[k];
        }
        b[i] /= a[i][i];
    }
    Ok(b)
}

/// Least-squares polynomial in normalized `t`, returned as `[q0, q1, q2]`.
fn fit_normalized<const N: usize>(ts: &[f64], xs: &[f64]) -> Result<[f64; 3]> {
    let mut ata = [[0.0; N]; N];
    let mut atb = [0.0; N];
    for (&t, &x) in ts.iter().zip(xs) {
        let mut pow = [1.0; N];
        for k in 1..N {
            pow[k] = pow[k - 1] * t;
        }
        for r in 0..N {
            atb[r] += pow[r] * x;
            for c in 0..N {
                ata[r][c] += pow[r] * pow[c];
            }
        }
    }
    let q = solve_spd(ata, atb)?;
    let mut out = [0.0; 3];
    out[..N].copy_from_slice(&q);
    Ok(out)
}

/// Fits `x(y)` by least squares with degree `min(2, distinct_y - 1)`.
///
/// `y` is mapped onto `[-1, 1]` before the normal equations are formed and the
/// coefficients are expanded back afterwards.
pub fn fit_curve(points: &[PointR2], cluster_id: usize) -> Result<LaneCurve> {
    if points.is_empty() {
        return Err(Error::validation("cannot fit a curve to zero points"));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::validation("curve points must be finite"));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)));

    let y_min = sorted[0].y;
    let y_max = sorted[sorted.len() - 1].y;
    let distinct_y = 1 + sorted
        .windows(2)
        .filter(|w| w[1].y - w[0].y > SAME_Y_TOLERANCE)
        .count();
    let degree = distinct_y.saturating_sub(1).min(2) as u8;

    let x_mean = sorted.iter().map(|p| p.x).sum::<f64>() / sorted.len() as f64;
    if degree == 0 {
        return Ok(LaneCurve {
            c0: x_mean,
            c1: 0.0,
            c2: 0.0,
            y_min,
            y_max,
            cluster_id,
            degree,
        });
    }

    // t = u·y + v maps [y_min, y_max] onto [-1, 1].
    let mid = 0.5 * (y_min + y_max);
    let half = 0.5 * (y_max - y_min);
    let (u, v) = (1.0 / half, -mid / half);
    let ts: Vec<f64> = sorted.iter().map(|p| (p.y - mid) / half).collect();
    // Fitting deviations from the mean keeps the right-hand side small, which
    // matters once the coefficients are expanded back far from the data.
    let xs: Vec<f64> = sorted.iter().map(|p| p.x - x_mean).collect();
    let [q0, q1, q2] = if degree == 1 {
        fit_normalized::<2>(&ts, &xs)?
    } else {
        fit_normalized::<3>(&ts, &xs)?
    };

    Ok(LaneCurve {
        c0: x_mean + (q0 + q1 * v + q2 * v * v),
        c1: q1 * u + 2.0 * q2 * u * v,
        c2: q2 * u * u,
        y_min,
        y_max,
        cluster_id,
        degree,
    })
}

/// `n` points with y evenly spaced over the curve's extent.
pub fn sample_curve(curve: &LaneCurve, n: usize) -> Result<Vec<PointR2>> {
    if n < 2 {
        return Err(Error::validation(format!("need at least 2 samples, got {n}")));
    }
    if curve.y_min == curve.y_max {
        return Err(Error::DegenerateExtent(curve.y_min));
    }
    let span = curve.y_max - curve.y_min;
    Ok((0..n)
        .map(|k| {
            let y = if k == n - 1 {
                curve.y_max
            } else {
                curve.y_min + span * k as f64 / (n - 1) as f64
            };
            PointR2::new(curve.x_at(y), y)
        })
        .collect())
}

/// Maps samples through `h_inv`, merging consecutive near-duplicates.
pub fn back_project(h_inv: &Homography, samples: &[PointR2]) -> Result<Polyline> {
    let mut out: Vec<PointR2> = Vec::with_capacity(samples.len());
    for &s in samples {
        let p = transform_point(h_inv, s)?;
        if out.last().is_some_and(|q| q.distance(p) < DUPLICATE_TOLERANCE) {
            continue;
        }
        out.push(p);
    }
    Polyline::new(out)
}
