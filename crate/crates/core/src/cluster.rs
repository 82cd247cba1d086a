//! Unsupervised attentive voting.
//!
//! Every pair of lane-marking instances in the bird's-eye view casts a vote:
//! a facing point `P` is placed between the two markings, and the vote is the
//! sum of the perpendicular distances from `P` to each marking's fitted line.
//! Pairs voting below `eta` belong to the same lane divider; dividers are the
//! connected components of that relation.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::PointR2;

/// Points closer than this in y are treated as sharing one row.
pub const SAME_Y_TOLERANCE: f64 = 1e-9;

/// A lane-marking instance mapped into the bird's-eye view.
#[derive(Debug, Clone, PartialEq)]
pub struct BevInstance {
    pub id: usize,
    pub points: Vec<PointR2>,
    /// Point with the largest y (nearest the vehicle).
    pub bottom: PointR2,
    /// Point with the smallest y.
    pub top: PointR2,
}

impl BevInstance {
    /// Picks the extremal points; y ties go to the smaller x, then the earlier point.
    pub fn new(id: usize, points: Vec<PointR2>) -> Result<Self> {
        let first = *points
            .first()
            .ok_or_else(|| Error::validation(format!("BEV instance {id} has no points")))?;
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::validation(format!("BEV instance {id} has non-finite points")));
        }
        let (mut bottom, mut top) = (first, first);
        for &p in &points[1..] {
            if p.y > bottom.y || (p.y == bottom.y && p.x < bottom.x) {
                bottom = p;
            }
            if p.y < top.y || (p.y == top.y && p.x < top.x) {
                top = p;
            }
        }
        Ok(Self {
            id,
            points,
            bottom,
            top,
        })
    }

    pub fn y_extent(&self) -> f64 {
        self.bottom.y - self.top.y
    }
}

/// Line `x = slope·y + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedLine {
    pub slope: f64,
    pub intercept: f64,
    /// Set when the fit came from a single point: the line is the vertical
    /// `x = x₀` rather than a least-squares solution.
    pub vertical_fallback: bool,
}

impl FittedLine {
    pub fn x_at(&self, y: f64) -> f64 {
        self.slope * y + self.intercept
    }

    /// Perpendicular distance from `p` to the line.
    pub fn distance(&self, p: PointR2) -> f64 {
        (p.x - self.slope * p.y - self.intercept).abs() / (1.0 + self.slope * self.slope).sqrt()
    }
}

/// Least-squares fit of `x` as a linear function of `y` (closed-form normal equations).
pub fn fit_line(points: &[PointR2]) -> Result<FittedLine> {
    match points {
        [] => Err(Error::validation("cannot fit a line to zero points")),
        [p] => Ok(FittedLine {
            slope: 0.0,
            intercept: p.x,
            vertical_fallback: true,
        }),
        _ => {
            let n = points.len() as f64;
            let (mut sx, mut sy) = (0.0, 0.0);
            let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for p in points {
                sx += p.x;
                sy += p.y;
                y_lo = y_lo.min(p.y);
                y_hi = y_hi.max(p.y);
            }
            if y_hi - y_lo <= SAME_Y_TOLERANCE {
                return Err(Error::DegenerateOrientation {
                    points: points.len(),
                    y: y_lo,
                });
            }
            let (mx, my) = (sx / n, sy / n);
            let (mut syy, mut sxy) = (0.0, 0.0);
            for p in points {
                let dy = p.y - my;
                syy += dy * dy;
                sxy += dy * (p.x - mx);
            }
            let slope = sxy / syy;
            Ok(FittedLine {
                slope,
                intercept: mx - slope * my,
                vertical_fallback: false,
            })
        }
    }
}

/// Orders a pair as `(lower, upper)`: the lower instance reaches further down
/// (larger bottom y); ties go to the smaller id.
fn lower_upper<'a>(a: &'a BevInstance, b: &'a BevInstance) -> (&'a BevInstance, &'a BevInstance) {
    if a.bottom.y > b.bottom.y || (a.bottom.y == b.bottom.y && a.id < b.id) {
        (a, b)
    } else {
        (b, a)
    }
}

/// Midpoint between the top of the lower instance and the bottom of the upper one.
pub fn facing_point(li: &BevInstance, lj: &BevInstance) -> PointR2 {
    let (lower, upper) = lower_upper(li, lj);
    lower.top.midpoint(upper.bottom)
}

fn vote_with_lines(
    a: &BevInstance,
    line_a: &FittedLine,
    b: &BevInstance,
    line_b: &FittedLine,
) -> f64 {
    // Canonical id order keeps the floating-point sum identical for (a,b) and (b,a).
    let ((first, first_line), (second, second_line)) = if a.id <= b.id {
        ((a, line_a), (b, line_b))
    } else {
        ((b, line_b), (a, line_a))
    };
    let p = facing_point(first, second);
    first_line.distance(p) + second_line.distance(p)
}

/// `d₁ + d₂`: distances from the facing point to each instance's fitted line.
pub fn vote(li: &BevInstance, lj: &BevInstance) -> Result<f64> {
    if li.id == lj.id {
        return Err(Error::validation(format!("vote needs two instances, got id {} twice", li.id)));
    }
    let (line_i, line_j) = (fit_line(&li.points)?, fit_line(&lj.points)?);
    Ok(vote_with_lines(li, &line_i, lj, &line_j))
}

/// Disjoint-set forest with path compression and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(len: usize) -> Self {
        Self {
            parent: (0..len).collect(),
            size: vec![1; len],
        }
    }

    pub fn find(&mut self, id: usize) -> usize {
        let mut root = id;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = id;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] >= self.size[rb] {
            self.parent[rb] = ra;
            self.size[ra] += self.size[rb];
        } else {
            self.parent[ra] = rb;
            self.size[rb] += self.size[ra];
        }
    }
}

/// Instance id → lane-divider cluster id. Cluster ids are dense and ordered by
/// the smallest instance id they contain.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Clustering {
    pub assignment: BTreeMap<usize, usize>,
}

impl Clustering {
    pub fn num_clusters(&self) -> usize {
        self.assignment.values().max().map_or(0, |m| m + 1)
    }

    pub fn cluster_of(&self, instance_id: usize) -> Option<usize> {
        self.assignment.get(&instance_id).copied()
    }

    /// Member instance ids of each cluster, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_clusters()];
        for (&inst, &c) in &self.assignment {
            out[c].push(inst);
        }
        out
    }

    /// Builds the canonical clustering from arbitrary group labels.
    pub fn from_groups(groups: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let by_id: BTreeMap<usize, usize> = groups.into_iter().collect();
        let mut relabel = BTreeMap::new();
        let assignment = by_id
            .into_iter()
            .map(|(id, g)| {
                let next = relabel.len();
                (id, *relabel.entry(g).or_insert(next))
            })
            .collect();
        Self { assignment }
    }
}

/// Merges every pair whose vote is below `eta` and returns the connected components.
pub fn cluster_instances(instances: &[BevInstance], eta: f64) -> Result<Clustering> {
    if !(eta > 0.0) || eta.is_nan() {
        return Err(Error::validation(format!("eta must be > 0, got {eta}")));
    }
    let mut order: Vec<usize> = (0..instances.len()).collect();
    order.sort_by_key(|&i| instances[i].id);
    if order.windows(2).any(|w| instances[w[0]].id == instances[w[1]].id) {
        return Err(Error::validation("instance ids must be unique"));
    }
    let sorted: Vec<&BevInstance> = order.iter().map(|&i| &instances[i]).collect();
    let lines = sorted
        .iter()
        .map(|inst| fit_line(&inst.points))
        .collect::<Result<Vec<_>>>()?;

    let mut uf = UnionFind::new(sorted.len());
    for a in 0..sorted.len() {
        for b in a + 1..sorted.len() {
            if vote_with_lines(sorted[a], &lines[a], sorted[b], &lines[b]) < eta {
                uf.union(a, b);
            }
        }
    }
    Ok(Clustering::from_groups(
        (0..sorted.len()).map(|k| (sorted[k].id, uf.find(k))),
    ))
}
