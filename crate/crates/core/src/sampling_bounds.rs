//! Tail bounds for sampling without replacement, the variance proxy `sigma_m`,
//! and the approximate-Helly constraint-sampling bound, with Monte-Carlo and
//! exhaustive checkers for each.
//!
//! Tail bounds describe estimating the mean `v_bar` of a population
//! `v_1..v_N` by the mean of `m` draws without replacement. `r_v` is the
//! population radius `max ||v_i - v_bar||` and `sigma_m` is computed on the same
//! population. The Hoeffding-Serfling form is stated for the weighted atoms
//! `v_i / N`, so its radius is `max(r_v / N, r_lambda)` with `r_lambda = max_i lambda_i`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample as sample_indices;

use crate::caratheodory::NormSpec;
use crate::envelope::{binomial, next_combination};
use crate::lp::{LinearProgram, Relation};
use crate::math::{abs, exp, ln, norm2, sqrt};
use crate::{Error, Result, Rng};

/// Largest population for which [`SigmaMode::Exact`] enumerates histories.
pub const SIGMA_EXACT_MAX_N: usize = 10;
/// Largest number of `k`-subsets [`constraint_sampling_experiment`] enumerates.
pub const SUBSET_LIMIT: u128 = 200_000;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TailBoundParams {
    pub n: usize,
    pub m: usize,
    pub epsilon: f64,
    pub delta0: f64,
    pub r_v: f64,
    pub r_lambda: f64,
    /// Smoothness constant `D` of the norm, `>= 1`.
    pub d_smooth: f64,
    pub sigma_m: f64,
    pub c: f64,
}

impl TailBoundParams {
    /// Uniform weights over `population`: `r_v` from the centered population,
    /// `r_lambda = 1/N`, `D` from `norm`, `c = 2 log(4 dim)`.
    pub fn for_population(
        population: &[Vec<f64>],
        m: usize,
        epsilon: f64,
        norm: NormSpec,
        sigma_m: f64,
    ) -> Result<Self> {
        let dim = check_population(population)?;
        let mean = population_mean(population);
        let r_v = population
            .iter()
            .map(|v| norm.norm(&crate::math::sub(v, &mean)))
            .fold(0.0, f64::max);
        let p = Self {
            n: population.len(),
            m,
            epsilon,
            delta0: 0.5,
            r_v,
            r_lambda: 1.0 / population.len() as f64,
            d_smooth: norm.smoothness().unwrap_or(1.0),
            sigma_m,
            c: crate::caratheodory::default_constant(dim),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 || self.m > self.n {
            return Err(Error::invalid(format!(
                "need 1 <= m <= N, got m = {}, N = {}",
                self.m, self.n
            )));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::invalid("epsilon must be nonnegative"));
        }
        if !(self.delta0 > 0.0 && self.delta0 < 1.0) {
            return Err(Error::invalid("delta0 must lie in (0, 1)"));
        }
        if !(self.r_v >= 0.0 && self.r_lambda >= 0.0 && self.sigma_m >= 0.0)
            || !self.r_v.is_finite()
            || !self.sigma_m.is_finite()
        {
            return Err(Error::invalid("radii and sigma_m must be finite and nonnegative"));
        }
        if !(self.d_smooth >= 1.0) || !(self.c > 0.0) {
            return Err(Error::invalid("need D >= 1 and c > 0"));
        }
        Ok(())
    }

    /// `(m - 1) / N`.
    pub fn alpha_m(&self) -> f64 {
        (self.m as f64 - 1.0) / self.n as f64
    }
}

fn check_population(population: &[Vec<f64>]) -> Result<usize> {
    let first = population.first().ok_or(Error::Empty("population"))?;
    let dim = first.len();
    for v in population {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
        if !crate::math::all_finite(v) {
            return Err(Error::NonFinite("population"));
        }
    }
    Ok(dim)
}

pub fn population_mean(population: &[Vec<f64>]) -> Vec<f64> {
    let mut mean = vec![0.0; population.first().map_or(0, |v| v.len())];
    for v in population {
        crate::math::axpy(&mut mean, 1.0 / population.len() as f64, v);
    }
    mean
}

/// `2 exp(-alpha_m eps^2 / (2 N (1 - alpha_m) R^2))`, `R = max(r_v / N, r_lambda)`.
pub fn hoeffding_serfling_tail(p: &TailBoundParams) -> Result<f64> {
    p.validate()?;
    let n = p.n as f64;
    let r = (p.r_v / n).max(p.r_lambda);
    if !(r > 0.0) {
        return Err(Error::invalid("Hoeffding-Serfling needs a positive radius"));
    }
    let a = p.alpha_m();
    if a >= 1.0 {
        return Ok(0.0);
    }
    let t = 2.0 * exp(-a * p.epsilon * p.epsilon / (2.0 * n * (1.0 - a) * r * r));
    Ok(t.clamp(0.0, 1.0))
}

/// `2 exp(-m eps^2 / (2 (2 D^2 ((N - m)/N) sigma_m^2 + eps r_v / 3)))`.
pub fn bennett_serfling_tail(p: &TailBoundParams) -> Result<f64> {
    p.validate()?;
    let n = p.n as f64;
    let m = p.m as f64;
    let var = 2.0 * p.d_smooth * p.d_smooth * ((n - m) / n) * p.sigma_m * p.sigma_m;
    let denom = 2.0 * (var + p.epsilon * p.r_v / 3.0);
    if denom <= 0.0 {
        return Ok(if p.epsilon > 0.0 { 0.0 } else { 1.0 });
    }
    Ok((2.0 * exp(-m * p.epsilon * p.epsilon / denom)).clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SamplingRatio {
    /// Clamped to `(0, 1]`.
    pub ratio: f64,
    /// Before clamping.
    pub raw: f64,
    /// `ceil(ratio N)`.
    pub m: usize,
    /// False when the raw ratio exceeds 1: no sample size meets the tail target.
    pub attainable: bool,
}

/// Smallest `alpha = m/N` with Bennett-Serfling tail `<= delta0`:
/// `[2 L (2 (D s)^2 + eps r_v / 3) / N] / [eps^2 + 2 L 2 (D s)^2 / N]`,
/// `L = ln(2 / delta0)`, `s = sigma_m` in both places.
pub fn required_sampling_ratio(p: &TailBoundParams) -> Result<SamplingRatio> {
    p.validate()?;
    let n = p.n as f64;
    let l = ln(2.0 / p.delta0);
    let ds2 = 2.0 * (p.d_smooth * p.sigma_m) * (p.d_smooth * p.sigma_m);
    let num = 2.0 * l * (ds2 + p.epsilon * p.r_v / 3.0) / n;
    let den = p.epsilon * p.epsilon + 2.0 * l * ds2 / n;
    let raw = if den > 0.0 { num / den } else { f64::INFINITY };
    let ratio = if raw > 0.0 { raw.min(1.0) } else { f64::MIN_POSITIVE };
    let m = (crate::math::ceil(ratio * n - 1e-12) as usize).clamp(1, p.n);
    Ok(SamplingRatio {
        ratio,
        raw,
        m,
        attainable: raw <= 1.0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SigmaMode {
    /// Every sampling history; `N <= 10`.
    Exact,
    /// Maximum over sampled histories: a lower estimate.
    MonteCarlo { trials: usize, seed: u64 },
    /// Each conditional variance replaced by `r^2` (Euclidean) or `(2 r)^2`,
    /// `r = max ||v_i - v_bar||`: an upper estimate.
    UpperBound,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SigmaEstimate {
    pub value: f64,
    /// True for the Monte-Carlo lower estimate.
    pub lower_estimate: bool,
}

/// `sigma_m^2 = ess sup sum_k w_k E_{k-1} ||V_k - E_{k-1} V_k||^2 / sum_k w_k`,
/// `w_k = (N - k)^-2`. Given the first `k - 1` draws, `E_{k-1}` averages over
/// the remaining population, so each term is the variance of what is left.
pub fn sigma_m(population: &[Vec<f64>], m: usize, norm: NormSpec, mode: SigmaMode) -> Result<SigmaEstimate> {
    check_population(population)?;
    norm.validate()?;
    let n = population.len();
    if m == 0 || m >= n {
        return Err(Error::invalid(format!("sigma_m needs 1 <= m <= N - 1, got m = {m}, N = {n}")));
    }
    let w: Vec<f64> = (1..=m).map(|k| 1.0 / ((n - k) as f64 * (n - k) as f64)).collect();
    let wsum: f64 = w.iter().sum();
    let remaining_var = |drawn: &[bool]| -> f64 {
        let rest: Vec<&Vec<f64>> = population
            .iter()
            .zip(drawn)
            .filter(|(_, d)| !**d)
            .map(|(v, _)| v)
            .collect();
        let mut mean = vec![0.0; rest[0].len()];
        for v in &rest {
            crate::math::axpy(&mut mean, 1.0 / rest.len() as f64, v);
        }
        rest.iter()
            .map(|v| {
                let d = norm.norm(&crate::math::sub(v, &mean));
                d * d
            })
            .sum::<f64>()
            / rest.len() as f64
    };
    let (value, lower) = match mode {
        SigmaMode::Exact => {
            if n > SIGMA_EXACT_MAX_N {
                return Err(Error::Unsupported(format!(
                    "exact sigma_m enumerates histories only for N <= {SIGMA_EXACT_MAX_N}, got {n}"
                )));
            }
            // best[S] = largest weighted sum of the terms k = |S|+1..m over histories extending S.
            let full = 1usize << n;
            let mut best = vec![0.0f64; full];
            let mut drawn = vec![false; n];
            for s in (0..full).rev() {
                let k = s.count_ones() as usize;
                if k >= m {
                    continue;
                }
                for (i, d) in drawn.iter_mut().enumerate() {
                    *d = s & (1 << i) != 0;
                }
                let here = w[k] * remaining_var(&drawn);
                let next = if k + 1 < m {
                    (0..n)
                        .filter(|i| s & (1 << i) == 0)
                        .map(|i| best[s | (1 << i)])
                        .fold(0.0, f64::max)
                } else {
                    0.0
                };
                best[s] = here + next;
            }
            (best[0] / wsum, false)
        }
        SigmaMode::MonteCarlo { trials, seed } => {
            if trials == 0 {
                return Err(Error::invalid("Monte-Carlo sigma_m needs trials >= 1"));
            }
            let mut rng = crate::rng_from_seed(seed);
            let mut top = 0.0f64;
            let mut drawn = vec![false; n];
            for _ in 0..trials {
                drawn.iter_mut().for_each(|d| *d = false);
                let order = sample_indices(&mut rng, n, m.saturating_sub(1).max(1));
                let mut acc = 0.0;
                for k in 0..m {
                    acc += w[k] * remaining_var(&drawn);
                    if k + 1 < m {
                        drawn[order.index(k)] = true;
                    }
                }
                top = top.max(acc);
            }
            (top / wsum, true)
        }
        SigmaMode::UpperBound => {
            let mean = population_mean(population);
            let r = population
                .iter()
                .map(|v| norm.norm(&crate::math::sub(v, &mean)))
                .fold(0.0, f64::max);
            let r = if norm == NormSpec::L2 { r } else { 2.0 * r };
            (r * r, false)
        }
    };
    Ok(SigmaEstimate {
        value: sqrt(value.max(0.0)),
        lower_estimate: lower,
    })
}

/// Fraction of `trials` seeded `m`-samples whose mean is at distance `>= epsilon`
/// from the population mean.
pub fn empirical_tail(
    population: &[Vec<f64>],
    m: usize,
    epsilon: f64,
    norm: NormSpec,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let dim = check_population(population)?;
    norm.validate()?;
    let n = population.len();
    if m == 0 || m > n {
        return Err(Error::invalid("need 1 <= m <= N"));
    }
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let mean = population_mean(population);
    let mut rng = crate::rng_from_seed(seed);
    let mut hits = 0usize;
    let mut s = vec![0.0; dim];
    for _ in 0..trials {
        s.iter_mut().for_each(|x| *x = 0.0);
        if m == n {
            s.copy_from_slice(&mean);
        } else {
            for i in sample_indices(&mut rng, n, m) {
                crate::math::axpy(&mut s, 1.0 / m as f64, &population[i]);
            }
        }
        if norm.norm(&crate::math::sub(&s, &mean)) >= epsilon {
            hits += 1;
        }
    }
    Ok(hits as f64 / trials as f64)
}

/// `alpha sqrt((m - k) / (k (m - 1)))` with `m = min(n, d + 1)`; zero once `k >= m`.
pub fn helly_point_distance(alpha: f64, n: usize, k: usize, d: usize) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("need 0 < k <= n, got k = {k}, n = {n}")));
    }
    if !(alpha >= 0.0) {
        return Err(Error::invalid("alpha must be nonnegative"));
    }
    Ok(alpha * helly_factor(n.min(d + 1), k))
}

/// `sqrt((m - k) / (k (m - 1)))`, zero for `k >= m`.
pub fn helly_factor(m: usize, k: usize) -> f64 {
    if k >= m {
        return 0.0;
    }
    sqrt((m - k) as f64 / (k as f64 * (m - 1) as f64))
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HellyParams {
    pub n_constraints: usize,
    pub k: usize,
    pub d: usize,
    /// Diameter of the level set `{f_0 <= f_0(x*)}`; may be infinite.
    pub diameter: f64,
    pub l0: f64,
    pub l: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl HellyParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > self.n_constraints {
            return Err(Error::invalid("need 0 < k <= n"));
        }
        if self.l.len() != self.n_constraints || self.lambda.len() != self.n_constraints {
            return Err(Error::DimensionMismatch {
                expected: self.n_constraints,
                found: self.l.len().min(self.lambda.len()),
            });
        }
        let bad = |x: &f64| !(*x >= 0.0) || !x.is_finite();
        if bad(&self.l0) || self.l.iter().any(bad) || self.lambda.iter().any(bad) {
            return Err(Error::invalid("Lipschitz constants and multipliers must be finite and >= 0"));
        }
        if !(self.diameter >= 0.0) {
            return Err(Error::invalid("diameter must be nonnegative"));
        }
        Ok(())
    }

    /// `L_0 + sum_i lambda_i L_i`.
    pub fn weighted_lipschitz(&self) -> f64 {
        self.l0 + self.lambda.iter().zip(&self.l).map(|(a, b)| a * b).sum::<f64>()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstraintSamplingBound {
    /// `+inf` when vacuous.
    pub value: f64,
    pub vacuous: bool,
    /// The `m` used in the Helly factor.
    pub m: usize,
    pub factor: f64,
}

/// `(L_0 + sum lambda_i L_i) (D / 2) sqrt((m - k) / (k (m - 1)))`, `m = min(n, d + 1)`.
pub fn constraint_sampling_bound(h: &HellyParams) -> Result<ConstraintSamplingBound> {
    constraint_sampling_bound_with_m(h, h.n_constraints.min(h.d + 1))
}

/// Same bound with `m` supplied, e.g. `min(active count, d + 1)`.
pub fn constraint_sampling_bound_with_m(h: &HellyParams, m: usize) -> Result<ConstraintSamplingBound> {
    h.validate()?;
    if m == 0 {
        return Err(Error::invalid("m must be positive"));
    }
    let factor = helly_factor(m, h.k);
    if h.diameter.is_infinite() {
        return Ok(ConstraintSamplingBound {
            value: f64::INFINITY,
            vacuous: true,
            m,
            factor,
        });
    }
    Ok(ConstraintSamplingBound {
        value: h.weighted_lipschitz() * h.diameter / 2.0 * factor,
        vacuous: false,
        m,
        factor,
    })
}

/// `min c'x s.t. a_i'x <= b_i`, `x` in the box `[-r, r]^d`. The box is the
/// domain of the objective: it is kept in every subproblem and never sampled.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoxedLp {
    pub c: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(rename = "A"))]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub box_radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoxedLpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// Multipliers of the rows of `a`, `>= 0`.
    pub lambda: Vec<f64>,
}

impl BoxedLp {
    pub fn validate(&self) -> Result<()> {
        let d = self.c.len();
        if d == 0 {
            return Err(Error::Empty("objective"));
        }
        if self.a.len() != self.b.len() {
            return Err(Error::DimensionMismatch {
                expected: self.a.len(),
                found: self.b.len(),
            });
        }
        for row in &self.a {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
        }
        if !(self.box_radius > 0.0) || !self.box_radius.is_finite() {
            return Err(Error::invalid("box radius must be positive and finite"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    /// Solves with only the rows in `rows`.
    pub fn solve_subset(&self, rows: &[usize]) -> Result<BoxedLpSolution> {
        let d = self.dim();
        let r = self.box_radius;
        // Shift x = y - r so that y >= 0, y <= 2r.
        let mut lp = LinearProgram::minimize(self.c.clone());
        for &i in rows {
            let shift: f64 = self.a[i].iter().sum::<f64>() * r;
            lp.add(self.a[i].clone(), Relation::Le, self.b[i] + shift);
        }
        for j in 0..d {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            lp.add(e, Relation::Le, 2.0 * r);
        }
        let sol = lp.solve()?;
        let x: Vec<f64> = sol.x.iter().map(|y| y - r).collect();
        let mut lambda = vec![0.0; self.a.len()];
        for (pos, &i) in rows.iter().enumerate() {
            lambda[i] = (-sol.duals[pos]).max(0.0);
        }
        Ok(BoxedLpSolution {
            value: crate::math::dot(&self.c, &x),
            x,
            lambda,
        })
    }

    pub fn solve(&self) -> Result<BoxedLpSolution> {
        self.solve_subset(&(0..self.a.len()).collect::<Vec<_>>())
    }

    /// Diameter of `{x in box : c'x <= level}` from its vertices.
    pub fn level_set_diameter(&self, level: f64) -> f64 {
        let d = self.dim();
        let r = self.box_radius;
        // Hyperplanes: 2d box faces and the level plane.
        let mut planes: Vec<(Vec<f64>, f64)> = Vec::with_capacity(2 * d + 1);
        for j in 0..d {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            planes.push((e.clone(), r));
            e[j] = -1.0;
            planes.push((e, r));
        }
        planes.push((self.c.clone(), level));
        let inside = |x: &[f64]| {
            x.iter().all(|v| abs(*v) <= r * (1.0 + 1e-9)) && crate::math::dot(&self.c, x) <= level + 1e-9 * (1.0 + abs(level))
        };
        let mut verts: Vec<Vec<f64>> = Vec::new();
        let mut pick: Vec<usize> = (0..d).collect();
        loop {
            let rows: Vec<&[f64]> = pick.iter().map(|&i| planes[i].0.as_slice()).collect();
            let rhs: Vec<f64> = pick.iter().map(|&i| planes[i].1).collect();
            if let Some(x) = solve_square(&rows, &rhs) {
                if inside(&x) {
                    verts.push(x);
                }
            }
            if !next_combination(&mut pick, planes.len()) {
                break;
            }
        }
        let mut diam = 0.0f64;
        for i in 0..verts.len() {
            for j in i + 1..verts.len() {
                diam = diam.max(crate::math::dist2(&verts[i], &verts[j]));
            }
        }
        diam
    }
}

/// Solves the square system `rows x = rhs` by Gaussian elimination with partial pivoting.
fn solve_square(rows: &[&[f64]], rhs: &[f64]) -> Option<Vec<f64>> {
    let d = rhs.len();
    let mut m: Vec<Vec<f64>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut v = r.to_vec();
            v.push(*b);
            v
        })
        .collect();
    for col in 0..d {
        let p = (col..d).max_by(|&a, &b| abs(m[a][col]).total_cmp(&abs(m[b][col])))?;
        if abs(m[p][col]) < 1e-12 {
            return None;
        }
        m.swap(col, p);
        for r in 0..d {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..=d {
                    let v = m[col][c];
                    m[r][c] -= f * v;
                }
            }
        }
    }
    Some((0..d).map(|i| m[i][d] / m[i][i]).collect())
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstraintSamplingReport {
    pub k: usize,
    pub optimum: f64,
    pub lambda: Vec<f64>,
    /// Rows active at the optimum.
    pub active: usize,
    pub diameter: f64,
    pub bound: ConstraintSamplingBound,
    /// The bound with `m = min(active, d + 1)`.
    pub bound_active: ConstraintSamplingBound,
    pub subsets: usize,
    pub exhaustive: bool,
    /// `max_J f_0(x*) - f_0(x_J)`.
    pub max_slack: f64,
    /// `min_J f_0(x*) - f_0(x_J)`.
    pub min_slack: f64,
    pub failed_subsets: usize,
}

impl ConstraintSamplingReport {
    /// Every examined subset within the bound.
    pub fn worst_case_holds(&self, tol: f64) -> bool {
        self.max_slack <= self.bound.value + tol
    }

    /// Some examined subset within the bound.
    pub fn best_case_holds(&self, tol: f64) -> bool {
        self.min_slack <= self.bound.value + tol
    }
}

/// Solves `lp` on `k`-subsets of its rows and compares the slack to the bound.
/// `trials = None` enumerates every subset (up to [`SUBSET_LIMIT`]); otherwise
/// `trials` uniform subsets are drawn with `seed`.
pub fn constraint_sampling_experiment(
    lp: &BoxedLp,
    k: usize,
    trials: Option<usize>,
    seed: u64,
) -> Result<ConstraintSamplingReport> {
    lp.validate()?;
    let n = lp.a.len();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("need 0 < k <= n, got k = {k}, n = {n}")));
    }
    let full = lp.solve()?;
    let active = (0..n)
        .filter(|&i| lp.b[i] - crate::math::dot(&lp.a[i], &full.x) <= 1e-7 * (1.0 + abs(lp.b[i])))
        .count();
    let diameter = lp.level_set_diameter(full.value);
    let h = HellyParams {
        n_constraints: n,
        k,
        d: lp.dim(),
        diameter,
        l0: norm2(&lp.c),
        l: lp.a.iter().map(|r| norm2(r)).collect(),
        lambda: full.lambda.clone(),
    };
    let bound = constraint_sampling_bound(&h)?;
    let bound_active = constraint_sampling_bound_with_m(&h, active.max(1).min(lp.dim() + 1))?;

    let mut max_slack = f64::NEG_INFINITY;
    let mut min_slack = f64::INFINITY;
    let mut failed = 0;
    let mut subsets = 0;
    let mut visit = |rows: &[usize]| {
        subsets += 1;
        match lp.solve_subset(rows) {
            Ok(s) => {
                let slack = full.value - s.value;
                max_slack = max_slack.max(slack);
                min_slack = min_slack.min(slack);
            }
            Err(_) => failed += 1,
        }
    };
    let exhaustive = trials.is_none();
    match trials {
        None => {
            let count = binomial(n as u128, k as u128);
            if count > SUBSET_LIMIT {
                return Err(Error::BudgetExceeded {
                    needed: count,
                    limit: SUBSET_LIMIT,
                });
            }
            let mut pick: Vec<usize> = (0..k).collect();
            loop {
                visit(&pick);
                if !next_combination(&mut pick, n) {
                    break;
                }
            }
        }
        Some(t) => {
            let mut rng: Rng = crate::rng_from_seed(seed);
            for _ in 0..t.max(1) {
                let mut pick = sample_indices(&mut rng, n, k).into_vec();
                pick.sort_unstable();
                visit(&pick);
            }
        }
    }
    Ok(ConstraintSamplingReport {
        k,
        optimum: full.value,
        lambda: full.lambda,
        active,
        diameter,
        bound,
        bound_active,
        subsets,
        exhaustive,
        max_slack,
        min_slack,
        failed_subsets: failed,
    })
}
