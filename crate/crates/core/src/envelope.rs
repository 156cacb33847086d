//! Convex envelopes (biconjugates) of functions known on a finite grid, and
//! the nonconvexity measures `rho` and `rho_k`.
//!
//! A [`SampledFunction`] is `+inf` off its grid, so `f**` is the lower convex
//! hull of the points `(g_j, f(g_j))` and is finite exactly on `Co(grid)`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::lp::{LinearProgram, Relation};
use crate::math::abs;
use crate::{Error, Result};

/// Largest grid accepted for envelopes in dimension two and up.
pub const MAX_MULTIDIM_GRID: usize = 512;
/// Largest number of (target, subset) pairs `rho_k` will examine.
pub const RHO_K_BUDGET: u128 = 2_000_000;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampledFunction {
    pub dim: usize,
    pub grid: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(dim: usize, grid: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        let f = Self { dim, grid, values };
        f.validate()?;
        Ok(f)
    }

    /// One-dimensional function from abscissae and values.
    pub fn from_1d(xs: &[f64], values: Vec<f64>) -> Result<Self> {
        Self::new(1, xs.iter().map(|x| vec![*x]).collect(), values)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::invalid("function dimension must be positive"));
        }
        if self.grid.is_empty() {
            return Err(Error::Empty("function grid"));
        }
        if self.grid.len() != self.values.len() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.len(),
                found: self.values.len(),
            });
        }
        if !crate::math::all_finite(&self.values) {
            return Err(Error::NonFinite("function values"));
        }
        for g in &self.grid {
            if g.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: g.len(),
                });
            }
            if !crate::math::all_finite(g) {
                return Err(Error::NonFinite("grid points"));
            }
        }
        if self.dim == 1 {
            if self.grid.windows(2).any(|w| w[0][0] >= w[1][0]) {
                return Err(Error::invalid("1-D grid must be strictly increasing"));
            }
        } else {
            let mut sorted: Vec<&Vec<f64>> = self.grid.iter().collect();
            sorted.sort_by(|a, b| lex(a, b));
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::invalid("grid points must be pairwise distinct"));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Index of the smallest value (lowest index on ties).
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (j, v) in self.values.iter().enumerate() {
            if *v < self.values[best] {
                best = j;
            }
        }
        best
    }

    /// Value at a grid point, if `x` is one (exact match).
    pub fn value_at(&self, x: &[f64]) -> Option<f64> {
        self.grid.iter().position(|g| g.as_slice() == x).map(|j| self.values[j])
    }
}

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// `f**` restricted to what a grid function needs.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvexEnvelope {
    pub dim: usize,
    /// 1-D: vertices of the lower hull, left to right. Otherwise the grid
    /// points where the envelope touches `f`.
    pub breakpoints: Vec<Vec<f64>>,
    pub breakpoint_values: Vec<f64>,
    /// Envelope value at every point of the source grid (same order).
    pub grid_values: Vec<f64>,
}

impl ConvexEnvelope {
    /// `f**(x)`; `+inf` outside the convex hull of the grid.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        if self.dim == 1 {
            return Ok(interpolate(&self.breakpoints, &self.breakpoint_values, x[0]));
        }
        lower_value(&self.breakpoints, &self.breakpoint_values, x)
    }
}

fn interpolate(bx: &[Vec<f64>], by: &[f64], x: f64) -> f64 {
    let n = bx.len();
    if x < bx[0][0] || x > bx[n - 1][0] {
        return f64::INFINITY;
    }
    let i = bx.partition_point(|b| b[0] <= x);
    if i == 0 {
        return by[0];
    }
    let (x0, y0) = (bx[i - 1][0], by[i - 1]);
    if x == x0 || i == n {
        return y0;
    }
    let (x1, y1) = (bx[i][0], by[i]);
    let t = (x - x0) / (x1 - x0);
    y0 + t * (y1 - y0)
}

/// `min sum a_j y_j` s.t. `sum a_j p_j = x`, `a` on the simplex.
fn lower_value(points: &[Vec<f64>], values: &[f64], x: &[f64]) -> Result<f64> {
    let mut lp = LinearProgram::minimize(values.to_vec());
    for k in 0..x.len() {
        lp.add(points.iter().map(|p| p[k]).collect(), Relation::Eq, x[k]);
    }
    lp.add(vec![1.0; points.len()], Relation::Eq, 1.0);
    match lp.solve() {
        Ok(s) => Ok(s.objective),
        Err(Error::Infeasible) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Convex envelope of a grid function.
///
/// 1-D grids use a monotone-chain lower hull; collinear points are not kept as
/// breakpoints. Higher-dimensional grids (at most [`MAX_MULTIDIM_GRID`] points)
/// solve one small LP per grid point.
pub fn biconjugate(f: &SampledFunction) -> Result<ConvexEnvelope> {
    f.validate()?;
    if f.dim == 1 {
        let mut hull: Vec<usize> = Vec::new();
        for j in 0..f.len() {
            while hull.len() >= 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                let (ax, ay) = (f.grid[a][0], f.values[a]);
                let (bx, by) = (f.grid[b][0], f.values[b]);
                let (cx, cy) = (f.grid[j][0], f.values[j]);
                // b is dropped unless it lies strictly below the chord a-c
                if (bx - ax) * (cy - ay) - (by - ay) * (cx - ax) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(j);
        }
        let breakpoints: Vec<Vec<f64>> = hull.iter().map(|&j| f.grid[j].clone()).collect();
        let breakpoint_values: Vec<f64> = hull.iter().map(|&j| f.values[j]).collect();
        let grid_values = f
            .grid
            .iter()
            .zip(&f.values)
            .map(|(g, v)| interpolate(&breakpoints, &breakpoint_values, g[0]).min(*v))
            .collect();
        return Ok(ConvexEnvelope {
            dim: 1,
            breakpoints,
            breakpoint_values,
            grid_values,
        });
    }
    if f.len() > MAX_MULTIDIM_GRID {
        return Err(Error::Unsupported(alloc::format!(
            "envelope of a {}-D grid with {} points (limit {MAX_MULTIDIM_GRID})",
            f.dim,
            f.len()
        )));
    }
    let mut grid_values = Vec::with_capacity(f.len());
    for (g, v) in f.grid.iter().zip(&f.values) {
        grid_values.push(lower_value(&f.grid, &f.values, g)?.min(*v));
    }
    let tol = touch_tol(&f.values);
    let (mut breakpoints, mut breakpoint_values) = (Vec::new(), Vec::new());
    for j in 0..f.len() {
        if f.values[j] - grid_values[j] <= tol {
            breakpoints.push(f.grid[j].clone());
            breakpoint_values.push(f.values[j]);
        }
    }
    Ok(ConvexEnvelope {
        dim: f.dim,
        breakpoints,
        breakpoint_values,
        grid_values,
    })
}

/// Gaps below this are rounding noise and count as zero.
fn touch_tol(values: &[f64]) -> f64 {
    1e-12 * (1.0 + values.iter().fold(0.0f64, |m, v| m.max(abs(*v))))
}

/// `rho(f) = max_grid (f - f**)` together with the first grid index attaining it.
pub fn rho_with_argmax(f: &SampledFunction) -> Result<(f64, usize)> {
    let env = biconjugate(f)?;
    Ok(max_gap(f, &env))
}

fn max_gap(f: &SampledFunction, env: &ConvexEnvelope) -> (f64, usize) {
    let tol = touch_tol(&f.values);
    let mut best = (0.0, f.argmin());
    for (j, (v, e)) in f.values.iter().zip(&env.grid_values).enumerate() {
        let gap = v - e;
        if gap > tol && gap > best.0 {
            best = (gap, j);
        }
    }
    best
}

pub fn rho(f: &SampledFunction) -> Result<f64> {
    Ok(rho_with_argmax(f)?.0)
}

/// `k`-th nonconvexity measure on the grid.
///
/// The supremum runs over grid targets `y` and `k`-subsets `{x_j}` of the grid
/// with `y = sum a_j x_j` exactly (`a` on the simplex); each term is
/// `f(y) - min_a sum a_j f(x_j)`. Restricting to combinations that land on the
/// grid keeps `rho_k <= rho`. For `k >= dim + 1` the value is `rho` itself.
pub fn rho_k(f: &SampledFunction, k: usize) -> Result<f64> {
    f.validate()?;
    if k == 0 {
        return Err(Error::invalid("rho_k needs k >= 1"));
    }
    if k == 1 {
        return Ok(0.0);
    }
    let env = biconjugate(f)?;
    let (rho, _) = max_gap(f, &env);
    if k > f.dim || rho == 0.0 {
        return Ok(rho);
    }
    let tol = touch_tol(&f.values);
    let targets: Vec<usize> = (0..f.len())
        .filter(|&j| f.values[j] - env.grid_values[j] > tol)
        .collect();
    let needed = targets.len() as u128 * binomial(f.len() as u128 - 1, k as u128);
    if needed > RHO_K_BUDGET {
        return Err(Error::BudgetExceeded {
            needed,
            limit: RHO_K_BUDGET,
        });
    }
    let mut best = 0.0f64;
    let mut subset = vec![0usize; k];
    for &y in &targets {
        let others: Vec<usize> = (0..f.len()).filter(|&j| j != y).collect();
        let cap = f.values[y] - env.grid_values[y];
        if cap <= best {
            continue;
        }
        for (i, s) in subset.iter_mut().enumerate() {
            *s = i;
        }
        loop {
            let pts: Vec<Vec<f64>> = subset.iter().map(|&i| f.grid[others[i]].clone()).collect();
            let vals: Vec<f64> = subset.iter().map(|&i| f.values[others[i]]).collect();
            let v = if k == 2 {
                segment_value(&pts, &vals, &f.grid[y])
            } else {
                lower_value(&pts, &vals, &f.grid[y])?
            };
            let gap = f.values[y] - v;
            if gap > best {
                best = gap;
            }
            if !next_combination(&mut subset, others.len()) {
                break;
            }
        }
    }
    Ok(if best > tol { best.min(rho) } else { 0.0 })
}

/// Value at `y` of the chord between two points, `+inf` if `y` is off the segment.
fn segment_value(pts: &[Vec<f64>], vals: &[f64], y: &[f64]) -> f64 {
    let d: Vec<f64> = pts[1].iter().zip(&pts[0]).map(|(b, a)| b - a).collect();
    let r: Vec<f64> = y.iter().zip(&pts[0]).map(|(y, a)| y - a).collect();
    let dd = crate::math::dot(&d, &d);
    let t = crate::math::dot(&r, &d) / dd;
    if !(0.0..=1.0).contains(&t) {
        return f64::INFINITY;
    }
    let scale = crate::math::sqrt(dd);
    let off = r
        .iter()
        .zip(&d)
        .map(|(r, d)| abs(r - t * d))
        .fold(0.0, f64::max);
    if off > 1e-12 * (1.0 + scale) {
        return f64::INFINITY;
    }
    vals[0] + t * (vals[1] - vals[0])
}

pub(crate) fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

/// Advances a sorted `k`-combination of `0..n` in lexicographic order.
pub(crate) fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NonconvexityReport {
    pub rho: f64,
    pub argmax: Vec<f64>,
    pub rho_k: BTreeMap<usize, f64>,
}

pub fn nonconvexity_report(f: &SampledFunction, ks: &[usize]) -> Result<NonconvexityReport> {
    let (rho, arg) = rho_with_argmax(f)?;
    let mut map = BTreeMap::new();
    for &k in ks {
        map.insert(k, rho_k(f, k)?);
    }
    Ok(NonconvexityReport {
        rho,
        argmax: f.grid[arg].clone(),
        rho_k: map,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::sqrt;

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    fn sqrt_abs(n: usize) -> SampledFunction {
        let xs = linspace(-1.0, 1.0, n);
        let ys = xs.iter().map(|x| sqrt(abs(*x))).collect();
        SampledFunction::from_1d(&xs, ys).unwrap()
    }

    /// Brute-force envelope at each grid point: best chord over all pairs.
    fn chord_oracle(f: &SampledFunction) -> Vec<f64> {
        let n = f.len();
        (0..n)
            .map(|y| {
                let x = f.grid[y][0];
                let mut best = f.values[y];
                for a in 0..=y {
                    for b in y..n {
                        if a == b {
                            continue;
                        }
                        let (xa, xb) = (f.grid[a][0], f.grid[b][0]);
                        let t = (x - xa) / (xb - xa);
                        best = best.min(f.values[a] + t * (f.values[b] - f.values[a]));
                    }
                }
                best
            })
            .collect()
    }

    #[test]
    fn convex_input_is_its_own_envelope() {
        let xs = linspace(-1.0, 1.0, 101);
        let ys: Vec<f64> = xs.iter().map(|x| 0.3 * x * x - 0.1 * x).collect();
        let f = SampledFunction::from_1d(&xs, ys.clone()).unwrap();
        let env = biconjugate(&f).unwrap();
        assert_eq!(env.grid_values, ys);
        assert_eq!(rho(&f).unwrap(), 0.0);
    }

    #[test]
    fn sqrt_abs_envelope_is_abs() {
        let f = sqrt_abs(201);
        let env = biconjugate(&f).unwrap();
        let oracle = chord_oracle(&f);
        for ((g, e), o) in f.grid.iter().zip(&env.grid_values).zip(&oracle) {
            assert!((e - o).abs() < 1e-12);
            assert!((e - abs(g[0])).abs() < 1e-12);
        }
        let (r, arg) = rho_with_argmax(&f).unwrap();
        assert!((r - 0.25).abs() < 1e-2);
        assert!((abs(f.grid[arg][0]) - 0.25).abs() < 1e-9);
    }

    #[test]
    fn two_point_flat_function() {
        let f = SampledFunction::from_1d(&[0.0, 1.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(biconjugate(&f).unwrap().grid_values, vec![0.0, 0.0]);
        assert_eq!(rho(&f).unwrap(), 0.0);
    }

    #[test]
    fn evaluation_outside_domain_is_infinite() {
        let env = biconjugate(&sqrt_abs(11)).unwrap();
        assert_eq!(env.evaluate(&[1.5]).unwrap(), f64::INFINITY);
        assert!((env.evaluate(&[0.55]).unwrap() - 0.55).abs() < 1e-12);
    }

    #[test]
    fn rho_k_in_one_dimension() {
        let f = sqrt_abs(41);
        let r = rho(&f).unwrap();
        assert_eq!(rho_k(&f, 1).unwrap(), 0.0);
        assert_eq!(rho_k(&f, 2).unwrap(), r);
        assert_eq!(rho_k(&f, 3).unwrap(), r);
    }

    fn two_d(values: impl Fn(f64, f64) -> f64, n: usize) -> SampledFunction {
        let xs = linspace(-1.0, 1.0, n);
        let mut grid = Vec::new();
        let mut vals = Vec::new();
        for &x in &xs {
            for &y in &xs {
                grid.push(vec![x, y]);
                vals.push(values(x, y));
            }
        }
        SampledFunction::new(2, grid, vals).unwrap()
    }

    #[test]
    fn two_dimensional_envelope() {
        let convex = two_d(|x, y| x * x + y * y, 5);
        assert_eq!(rho(&convex).unwrap(), 0.0);
        // -(x^2+y^2) on the 3x3 grid: envelope is the plane through the
        // corners at -2, so the centre gap is 2 and the edge midpoints gap 1.
        let concave = two_d(|x, y| -(x * x + y * y), 3);
        let env = biconjugate(&concave).unwrap();
        for e in &env.grid_values {
            assert!((e + 2.0).abs() < 1e-9);
        }
        assert!((rho(&concave).unwrap() - 2.0).abs() < 1e-9);
        // pairs through the centre: opposite corners give -2, so rho_2 = 2 as well
        assert!((rho_k(&concave, 2).unwrap() - 2.0).abs() < 1e-9);
        assert!((rho_k(&concave, 3).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn rho_2_can_be_smaller_than_rho_in_2d() {
        // Bump only at the centroid of a triangle: no grid pair has it on its segment.
        let grid = vec![vec![0.0, 0.0], vec![3.0, 0.0], vec![0.0, 3.0], vec![1.0, 1.0]];
        let f = SampledFunction::new(2, grid, vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!((rho(&f).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(rho_k(&f, 2).unwrap(), 0.0);
        assert!((rho_k(&f, 3).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(SampledFunction::from_1d(&[0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(SampledFunction::from_1d(&[0.0, 1.0], vec![1.0]).is_err());
        assert!(SampledFunction::from_1d(&[0.0], vec![f64::NAN]).is_err());
    }

    #[test]
    fn combinations_enumerate_all() {
        let mut c = vec![0, 1];
        let mut count = 1;
        while next_combination(&mut c, 5) {
            count += 1;
        }
        assert_eq!(count, 10);
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(40, 3), 9880);
    }
}
