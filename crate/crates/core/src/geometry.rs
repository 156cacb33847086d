//! Finite point sets in `R^d`: Minkowski averages, planar hulls and Hausdorff
//! distances between samples.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng as _;

use crate::math::{abs, cos, dist2, floor, powf, sin};
use crate::{rng_from_seed, Error, Result};

/// A labelled, nonempty, finite sample of points of a common dimension.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PointSet {
    pub label: String,
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
}

impl PointSet {
    pub fn new(label: impl Into<String>, dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        let set = Self {
            label: label.into(),
            dim,
            points,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::invalid("point set dimension must be positive"));
        }
        if self.points.is_empty() {
            return Err(Error::Empty("point set"));
        }
        for p in &self.points {
            if p.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: p.len(),
                });
            }
            if !crate::math::all_finite(p) {
                return Err(Error::NonFinite("point coordinates"));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Counterclockwise, strictly convex vertex list starting at the
/// lexicographically smallest vertex.
///
/// `degenerate` is set when the input spans fewer than two dimensions; the
/// "polygon" is then a single point or a segment given by its two endpoints.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HullPolygon {
    pub vertices: Vec<[f64; 2]>,
    pub degenerate: bool,
}

impl HullPolygon {
    /// Whether `p` lies in the closed polygon, up to `tol` on the edge tests.
    pub fn contains(&self, p: [f64; 2], tol: f64) -> bool {
        let v = &self.vertices;
        match v.len() {
            0 => false,
            1 => abs(v[0][0] - p[0]) <= tol && abs(v[0][1] - p[1]) <= tol,
            2 => segment_distance(v[0], v[1], p) <= tol,
            n => (0..n).all(|i| {
                let a = v[i];
                let b = v[(i + 1) % n];
                let len = dist2(&a, &b);
                cross(a, b, p) >= -tol * len
            }),
        }
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segment_distance(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0)
    };
    dist2(&[a[0] + t * ab[0], a[1] + t * ab[1]], &p)
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Andrew's monotone chain.
pub fn convex_hull_2d(set: &PointSet) -> Result<HullPolygon> {
    set.validate()?;
    if set.dim != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: set.dim,
        });
    }
    let mut pts: Vec<[f64; 2]> = set.points.iter().map(|p| [p[0], p[1]]).collect();
    pts.sort_by(|a, b| lex_cmp(a, b));
    pts.dedup();
    if pts.len() == 1 {
        return Ok(HullPolygon {
            vertices: pts,
            degenerate: true,
        });
    }
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() <= 2 {
        // collinear input: lower chain is [min, max], upper chain [max, min]
        let first = pts[0];
        let last = pts[pts.len() - 1];
        return Ok(HullPolygon {
            vertices: vec![first, last],
            degenerate: true,
        });
    }
    Ok(HullPolygon {
        vertices: lower,
        degenerate: false,
    })
}

/// Symmetric Hausdorff distance between two finite samples (Euclidean metric).
pub fn hausdorff_distance(p: &PointSet, q: &PointSet) -> Result<f64> {
    p.validate()?;
    q.validate()?;
    if p.dim != q.dim {
        return Err(Error::DimensionMismatch {
            expected: p.dim,
            found: q.dim,
        });
    }
    let sp = SortedCloud::new(&p.points);
    let sq = SortedCloud::new(&q.points);
    Ok(directed(&p.points, &sq).max(directed(&q.points, &sp)))
}

fn directed(from: &[Vec<f64>], to: &SortedCloud<'_>) -> f64 {
    let mut worst = 0.0f64;
    for x in from {
        // the nearest neighbour distance only matters if it can beat `worst`
        let d = to.nearest(x, worst);
        if d > worst {
            worst = d;
        }
    }
    worst
}

/// Points sorted on their first coordinate for pruned nearest-neighbour queries.
struct SortedCloud<'a> {
    pts: Vec<&'a [f64]>,
    keys: Vec<f64>,
}

impl<'a> SortedCloud<'a> {
    fn new(points: &'a [Vec<f64>]) -> Self {
        let mut pts: Vec<&[f64]> = points.iter().map(|p| p.as_slice()).collect();
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
        let keys = pts.iter().map(|p| p[0]).collect();
        Self { pts, keys }
    }

    /// Distance from `x` to the cloud; may stop early (returning a value
    /// `<= floor`) once some point is closer than `floor`.
    fn nearest(&self, x: &[f64], floor: f64) -> f64 {
        let start = self.keys.partition_point(|k| *k < x[0]);
        let mut best2 = f64::INFINITY;
        let floor2 = floor * floor;
        let mut up = start;
        let mut down = start;
        loop {
            let mut progressed = false;
            if up < self.pts.len() {
                let gap = self.keys[up] - x[0];
                if gap * gap < best2 {
                    best2 = best2.min(sq_dist(self.pts[up], x));
                    up += 1;
                    progressed = true;
                } else {
                    up = self.pts.len();
                }
            }
            if down > 0 {
                let gap = x[0] - self.keys[down - 1];
                if gap * gap < best2 {
                    best2 = best2.min(sq_dist(self.pts[down - 1], x));
                    down -= 1;
                    progressed = true;
                } else {
                    down = 0;
                }
            }
            if best2 <= floor2 || !progressed {
                break;
            }
        }
        crate::math::sqrt(best2)
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `{ (1/n) sum_i v_i : v_i in V_i }`, thinned to at most `cap` points.
///
/// Sums are built one set at a time. Exact duplicates (to 1e-12) are merged.
/// Whenever an intermediate sum holds more than `cap` points it is thinned on
/// a voxel grid: the cell size grows until at most `cap` cells are occupied and
/// one representative per cell, chosen with the seeded generator, survives.
pub fn minkowski_average(sets: &[PointSet], cap: usize, seed: u64) -> Result<PointSet> {
    let first = sets.first().ok_or(Error::Empty("list of point sets"))?;
    if cap == 0 {
        return Err(Error::invalid("cap must be positive"));
    }
    for s in sets {
        s.validate()?;
        if s.dim != first.dim {
            return Err(Error::DimensionMismatch {
                expected: first.dim,
                found: s.dim,
            });
        }
    }
    let dim = first.dim;
    let mut rng = rng_from_seed(seed);
    let mut acc: Vec<f64> = Vec::new();
    for p in &first.points {
        acc.extend_from_slice(p);
    }
    let mut hint = None;
    acc = reduce(acc, dim, cap, &mut rng, &mut hint);
    for s in &sets[1..] {
        let mut next = Vec::with_capacity(acc.len() / dim * s.len() * dim);
        for a in acc.chunks(dim) {
            for v in &s.points {
                next.extend(a.iter().zip(v).map(|(x, y)| x + y));
            }
        }
        acc = reduce(next, dim, cap, &mut rng, &mut hint);
    }
    let scale = 1.0 / sets.len() as f64;
    let points = acc
        .chunks(dim)
        .map(|p| p.iter().map(|x| x * scale).collect())
        .collect();
    Ok(PointSet {
        label: format_label(sets),
        dim,
        points,
    })
}

fn format_label(sets: &[PointSet]) -> String {
    if sets.len() == 1 {
        return sets[0].label.clone();
    }
    alloc::format!("minkowski-average(n={})", sets.len())
}

fn reduce(
    flat: Vec<f64>,
    dim: usize,
    cap: usize,
    rng: &mut crate::Rng,
    hint: &mut Option<f64>,
) -> Vec<f64> {
    // Far above the cap the exact pass is skipped; voxels merge duplicates too.
    if flat.len() / dim > 16 * cap {
        return thin(flat, dim, cap, rng, hint);
    }
    let deduped = dedup_flat(flat, dim);
    if deduped.len() / dim <= cap {
        return deduped;
    }
    thin(deduped, dim, cap, rng, hint)
}

fn dedup_flat(flat: Vec<f64>, dim: usize) -> Vec<f64> {
    let n = flat.len() / dim;
    let mut idx: Vec<usize> = (0..n).collect();
    let pt = |i: usize| &flat[i * dim..(i + 1) * dim];
    idx.sort_by(|&a, &b| lex_cmp(pt(a), pt(b)));
    let mut out: Vec<f64> = Vec::with_capacity(flat.len());
    let mut last: Option<usize> = None;
    for i in idx {
        let dup = last.is_some_and(|l| {
            pt(l)
                .iter()
                .zip(pt(i))
                .all(|(x, y)| abs(x - y) <= 1e-12 * (1.0 + abs(*x)))
        });
        if !dup {
            out.extend_from_slice(pt(i));
            last = Some(i);
        }
    }
    out
}

/// `hint` carries the previous cell size, relative to the bounding box, so that
/// successive sums usually need a single counting pass.
fn thin(flat: Vec<f64>, dim: usize, cap: usize, rng: &mut crate::Rng, hint: &mut Option<f64>) -> Vec<f64> {
    let n = flat.len() / dim;
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in flat.chunks(dim) {
        for k in 0..dim {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let extent = lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max).max(1e-300);
    let volume: f64 = lo
        .iter()
        .zip(&hi)
        .map(|(l, h)| (h - l).max(extent * 1e-9))
        .product();
    let tiebreak: Vec<u64> = (0..n).map(|_| rng.gen()).collect();
    // Returns one representative per occupied cell: the point with the
    // smallest tiebreak draw. Small boxes use a dense cell table, otherwise the
    // packed cell indices are sorted.
    let bits = (64 / dim).clamp(1, 32) as u32;
    let max_index = ((1u64 << bits) - 1) as i64;
    let representatives = |cell: f64| -> Vec<u32> {
        let per_axis: Vec<u64> = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| floor((h - l) / cell) as u64 + 1)
            .collect();
        let total = per_axis
            .iter()
            .try_fold(1u64, |acc, k| acc.checked_mul(*k))
            .filter(|t| *t <= 4 * n as u64 + 1024);
        if let Some(total) = total {
            let mut table = vec![(u64::MAX, u32::MAX); total as usize];
            for (i, p) in flat.chunks(dim).enumerate() {
                let mut key = 0u64;
                for k in 0..dim {
                    let c = (floor((p[k] - lo[k]) / cell) as u64).min(per_axis[k] - 1);
                    key = key * per_axis[k] + c;
                }
                let slot = &mut table[key as usize];
                if tiebreak[i] < slot.0 {
                    *slot = (tiebreak[i], i as u32);
                }
            }
            table.into_iter().filter(|s| s.1 != u32::MAX).map(|s| s.1).collect()
        } else {
            let mut v: Vec<(u64, u64, u32)> = flat
                .chunks(dim)
                .zip(&tiebreak)
                .enumerate()
                .map(|(i, (p, t))| {
                    let key = p.iter().zip(&lo).fold(0u64, |k, (x, l)| {
                        let c = (floor((x - l) / cell) as i64).clamp(0, max_index);
                        k.checked_shl(bits).unwrap_or(0) | c as u64
                    });
                    (key, *t, i as u32)
                })
                .collect();
            v.sort_unstable();
            let mut reps = Vec::new();
            let mut prev = None;
            for (key, _, i) in v {
                if prev != Some(key) {
                    reps.push(i);
                    prev = Some(key);
                }
            }
            reps
        }
    };
    // A few multiplicative corrections aiming just under `cap`, then a
    // geometric ladder if none of them fit.
    let mut cell = match *hint {
        Some(rel) => rel * extent,
        None => powf(volume / cap as f64, 1.0 / dim as f64),
    };
    let mut best: Option<(f64, Vec<u32>)> = None;
    for _ in 0..6 {
        let reps = representatives(cell);
        let c = reps.len();
        if c <= cap && best.as_ref().map_or(true, |(_, b)| c > b.len()) {
            best = Some((cell, reps));
        }
        if c <= cap && c * 10 >= cap * 9 {
            break;
        }
        let ratio = powf(c as f64 / (0.95 * cap as f64), 1.0 / dim as f64);
        cell *= ratio.clamp(0.5, 2.0);
    }
    let (cell, reps) = match best {
        Some(b) => b,
        None => loop {
            cell *= 1.1;
            let reps = representatives(cell);
            if reps.len() <= cap {
                break (cell, reps);
            }
        },
    };
    *hint = Some(cell / extent);
    let mut out = Vec::with_capacity(reps.len() * dim);
    for i in reps {
        let i = i as usize;
        out.extend_from_slice(&flat[i * dim..(i + 1) * dim]);
    }
    dedup_flat(out, dim)
}

/// Angle-uniform sample of the unit sphere of the `l_{1/2}` quasi-norm in the
/// plane: `(sgn(cos t) cos^4 t, sgn(sin t) sin^4 t)`.
pub fn l_half_sphere(samples: usize) -> PointSet {
    let mut points = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = 2.0 * core::f64::consts::PI * i as f64 / samples as f64;
        let (c, s) = (cos(t), sin(t));
        let x = (c * c) * (c * c);
        let y = (s * s) * (s * s);
        points.push(vec![x.copysign(c), y.copysign(s)]);
    }
    PointSet {
        label: alloc::format!("l_half_sphere({samples})"),
        dim: 2,
        points,
    }
}

/// Square lattice of spacing `1/per_unit` restricted to the closed unit `l_1` ball.
pub fn l1_ball_lattice(per_unit: usize) -> PointSet {
    let k = per_unit as i64;
    let h = 1.0 / per_unit as f64;
    let mut points = Vec::new();
    for i in -k..=k {
        let rem = k - i.abs();
        for j in -rem..=rem {
            points.push(vec![i as f64 * h, j as f64 * h]);
        }
    }
    PointSet {
        label: alloc::format!("l1_ball_lattice({per_unit})"),
        dim: 2,
        points,
    }
}
