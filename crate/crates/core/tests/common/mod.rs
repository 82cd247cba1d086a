//! Independent reference implementations used as test oracles. Nothing here
//! calls into the code paths it checks.
#![allow(dead_code)]

use lanevote_core::cluster::{vote, BevInstance};
use lanevote_core::geometry::{PointR2, QuadCorrespondence};
use lanevote_core::instance::{BinaryMask, Connectivity, Pixel};
use lanevote_core::seg::ScoreVolume;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// dice loss
// ---------------------------------------------------------------------------

/// Direct scalar evaluation of the penalized dice loss over nested loops.
/// `pred` is indexed like `gt` (flat channel-planar) but is not range-checked,
/// so finite differences may step outside [0, 1].
pub fn reference_loss(gt: &ScoreVolume, pred: &[f64], alpha: f64, eps: f64) -> f64 {
    let (h, w, c) = (gt.height(), gt.width(), gt.channels());
    let n = (h * w) as f64;
    let mut loss = 0.0;
    for k in 0..c {
        let (mut overlap, mut gg, mut pp) = (0.0, 0.0, 0.0);
        for i in 0..h {
            for j in 0..w {
                let g = gt.get(i, j, k);
                let p = pred[(k * h + i) * w + j];
                let g_hat = if g == 0.0 { -alpha } else { g };
                overlap += g_hat * p;
                gg += g * g;
                pp += p * p;
            }
        }
        loss -= (2.0 * overlap / n + eps) / (gg / n + pp / n + eps);
    }
    loss
}

/// Central finite-difference gradient of [`reference_loss`].
pub fn fd_gradient(gt: &ScoreVolume, pred: &[f64], alpha: f64, eps: f64, h: f64) -> Vec<f64> {
    let mut x = pred.to_vec();
    (0..x.len())
        .map(|idx| {
            let orig = x[idx];
            x[idx] = orig + h;
            let up = reference_loss(gt, &x, alpha, eps);
            x[idx] = orig - h;
            let down = reference_loss(gt, &x, alpha, eps);
            x[idx] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `max |a - b| / max |a|` over all entries.
pub fn max_relative_error(analytic: &[f64], reference: &[f64]) -> f64 {
    let scale = analytic.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = analytic
        .iter()
        .zip(reference)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    diff / scale
}

pub fn random_one_hot(rng: &mut ChaCha8Rng, h: usize, w: usize, c: usize) -> ScoreVolume {
    let classes: Vec<usize> = (0..h * w).map(|_| rng.random_range(0..c)).collect();
    ScoreVolume::one_hot(h, w, c, &classes).unwrap()
}

pub fn random_prediction(rng: &mut ChaCha8Rng, h: usize, w: usize, c: usize) -> ScoreVolume {
    let vals = (0..h * w * c).map(|_| rng.random_range(0.0..=1.0)).collect();
    ScoreVolume::new(h, w, c, vals).unwrap()
}

// ---------------------------------------------------------------------------
// connected components
// ---------------------------------------------------------------------------

fn uf_find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Union-find labeling: every true pixel is unioned with each true neighbor.
/// Components are returned as sorted pixel lists ordered by their first
/// (row-major) pixel.
pub fn union_find_components(mask: &BinaryMask, connectivity: Connectivity) -> Vec<Vec<Pixel>> {
    let (h, w) = (mask.height(), mask.width());
    let mut parent: Vec<usize> = (0..h * w).collect();
    let eight = connectivity == Connectivity::Eight;
    for r in 0..h {
        for c in 0..w {
            if !mask.get(r, c) {
                continue;
            }
            for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    if (dr, dc) == (0, 0) || (!eight && dr != 0 && dc != 0) {
                        continue;
                    }
                    let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                    if nr < 0 || nc < 0 || nr >= h as i64 || nc >= w as i64 {
                        continue;
                    }
                    let (nr, nc) = (nr as usize, nc as usize);
                    if mask.get(nr, nc) {
                        let a = uf_find(&mut parent, r * w + c);
                        let b = uf_find(&mut parent, nr * w + nc);
                        parent[a] = b;
                    }
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<Pixel>> = Default::default();
    let mut first_seen: Vec<usize> = Vec::new();
    for idx in 0..h * w {
        if mask.bits()[idx] {
            let root = uf_find(&mut parent, idx);
            let entry = groups.entry(root).or_default();
            if entry.is_empty() {
                first_seen.push(root);
            }
            entry.push(Pixel::new(idx / w, idx % w));
        }
    }
    first_seen
        .into_iter()
        .map(|root| groups.remove(&root).unwrap())
        .collect()
}

pub fn random_mask(rng: &mut ChaCha8Rng, h: usize, w: usize, density: f64) -> BinaryMask {
    let bits = (0..h * w).map(|_| rng.random_bool(density)).collect();
    BinaryMask::from_bits(h, w, bits).unwrap()
}

// ---------------------------------------------------------------------------
// linear algebra
// ---------------------------------------------------------------------------

/// Gaussian elimination with partial pivoting on a dense `n × n` system.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Homography from the 8×8 direct linear system with `h33 = 1`.
pub fn homography_8x8(c: &QuadCorrespondence) -> [[f64; 3]; 3] {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (s, d) in c.src.iter().zip(&c.dst) {
        a.push(vec![s.x, s.y, 1.0, 0.0, 0.0, 0.0, -d.x * s.x, -d.x * s.y]);
        b.push(d.x);
        a.push(vec![0.0, 0.0, 0.0, s.x, s.y, 1.0, -d.y * s.x, -d.y * s.y]);
        b.push(d.y);
    }
    let h = gauss_solve(a, b).expect("non-singular correspondence");
    [[h[0], h[1], h[2]], [h[3], h[4], h[5]], [h[6], h[7], 1.0]]
}

pub fn apply_matrix(m: &[[f64; 3]; 3], p: PointR2) -> PointR2 {
    let w = m[2][0] * p.x + m[2][1] * p.y + m[2][2];
    PointR2::new(
        (m[0][0] * p.x + m[0][1] * p.y + m[0][2]) / w,
        (m[1][0] * p.x + m[1][1] * p.y + m[1][2]) / w,
    )
}

/// Random projective matrix that stays well away from degeneracy over the
/// box `[0, 500]²`.
pub fn random_homography_matrix(rng: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
    let theta = rng.random_range(-0.6..0.6);
    let s = rng.random_range(0.5..2.0);
    let shear = rng.random_range(-0.3..0.3);
    let (sin, cos) = f64::sin_cos(theta);
    [
        [s * cos, -s * sin + shear, rng.random_range(-100.0..100.0)],
        [s * sin, s * cos, rng.random_range(-100.0..100.0)],
        [
            rng.random_range(-4e-4..4e-4),
            rng.random_range(-4e-4..4e-4),
            1.0,
        ],
    ]
}

/// Raw-sum 2×2 normal equations for `x = a·y + b`, solved by Cramer's rule.
pub fn line_fit_oracle(points: &[PointR2]) -> (f64, f64) {
    let n = points.len() as f64;
    let (mut sy, mut syy, mut sx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for p in points {
        sy += p.y;
        syy += p.y * p.y;
        sx += p.x;
        sxy += p.x * p.y;
    }
    let det = syy * n - sy * sy;
    ((sxy * n - sy * sx) / det, (syy * sx - sy * sxy) / det)
}

/// Least-squares `x = c2·y² + c1·y + c0` from the raw 3×3 normal equations,
/// accumulated and solved by Gaussian elimination in exact rational
/// arithmetic, rounded to `f64` only at the end. Returns `[c0, c1, c2]`.
pub fn quadratic_fit_oracle(points: &[PointR2]) -> [f64; 3] {
    use num::{BigRational, ToPrimitive, Zero};

    let exact = |v: f64| BigRational::from_float(v).expect("finite input");
    let mut s: Vec<BigRational> = vec![BigRational::zero(); 5];
    let mut t: Vec<BigRational> = vec![BigRational::zero(); 3];
    for p in points {
        let y = exact(p.y);
        let x = exact(p.x);
        let mut pw = BigRational::from_integer(1.into());
        for k in 0..5 {
            if k < 3 {
                t[k] += &pw * &x;
            }
            s[k] += &pw;
            pw *= &y;
        }
    }
    let mut a: Vec<Vec<BigRational>> = (0..3)
        .map(|r| (0..3).map(|c| s[r + c].clone()).collect())
        .collect();
    for col in 0..3 {
        let pivot = (col..3).find(|&r| !a[r][col].is_zero()).expect("well-posed fit");
        a.swap(col, pivot);
        t.swap(col, pivot);
        for row in col + 1..3 {
            let f = &a[row][col] / &a[col][col];
            for k in col..3 {
                let v = &f * &a[col][k];
                a[row][k] -= v;
            }
            let v = &f * &t[col];
            t[row] -= v;
        }
    }
    let mut c = vec![BigRational::zero(); 3];
    for row in (0..3).rev() {
        let mut acc = t[row].clone();
        for k in row + 1..3 {
            acc -= &a[row][k] * &c[k];
        }
        c[row] = acc / &a[row][row];
    }
    [
        c[0].to_f64().unwrap(),
        c[1].to_f64().unwrap(),
        c[2].to_f64().unwrap(),
    ]
}

/// Noisy samples of a random gently curved lane, unsorted.
pub fn random_cluster(r: &mut ChaCha8Rng) -> Vec<PointR2> {
    let c2 = r.random_range(-1e-3..1e-3);
    let c1 = r.random_range(-1.0..1.0);
    let c0 = r.random_range(100.0..400.0);
    let y0 = r.random_range(0.0..300.0);
    let y1 = r.random_range(y0 + 50.0..480.0);
    let n = r.random_range(20..200);
    (0..n)
        .map(|_| {
            let y = r.random_range(y0..y1);
            PointR2::new(c2 * y * y + c1 * y + c0 + r.random_range(-2.0..2.0), y)
        })
        .collect()
}

pub fn rss(points: &[PointR2], c: [f64; 3]) -> f64 {
    points
        .iter()
        .map(|p| {
            let r = p.x - (c[2] * p.y * p.y + c[1] * p.y + c[0]);
            r * r
        })
        .sum()
}

// ---------------------------------------------------------------------------
// clustering
// ---------------------------------------------------------------------------

/// Connected components of the graph with an edge wherever `vote < eta`,
/// found by depth-first search. Returns groups of instance ids, each sorted,
/// ordered by smallest member.
pub fn vote_graph_components(instances: &[BevInstance], eta: f64) -> Vec<Vec<usize>> {
    let n = instances.len();
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                adj[i][j] = vote(&instances[i], &instances[j]).unwrap() < eta;
            }
        }
    }
    let mut seen = vec![false; n];
    let mut groups = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let mut group = Vec::new();
        while let Some(v) = stack.pop() {
            group.push(instances[v].id);
            for u in 0..n {
                if adj[v][u] && !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        group.sort_unstable();
        groups.push(group);
    }
    groups.sort();
    groups
}

/// Up to `max_n` short near-vertical segments scattered over a BEV-sized area.
pub fn random_bev_instances(rng: &mut ChaCha8Rng, max_n: usize) -> Vec<BevInstance> {
    let n = rng.random_range(1..=max_n);
    let mut ids: Vec<usize> = (0..n).map(|k| k * 3 + rng.random_range(0..3)).collect();
    // shuffle so input order differs from id order
    for i in (1..ids.len()).rev() {
        let j = rng.random_range(0..=i);
        ids.swap(i, j);
    }
    ids.into_iter()
        .map(|id| {
            let x0 = rng.random_range(100.0..300.0);
            let y0 = rng.random_range(0.0..400.0);
            let len = rng.random_range(10.0..80.0);
            let slope = rng.random_range(-0.2..0.2);
            let m = rng.random_range(2..30);
            let pts = (0..m)
                .map(|k| {
                    let y = y0 + len * k as f64 / (m - 1) as f64;
                    PointR2::new(x0 + slope * (y - y0) + rng.random_range(-1.0..1.0), y)
                })
                .collect();
            BevInstance::new(id, pts).unwrap()
        })
        .collect()
}
