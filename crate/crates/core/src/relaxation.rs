//! Separable problems `min sum_i f_i(x_i) s.t. Ax <= b`, their convex
//! relaxation, purification, and the duality-gap certificates.
//!
//! Every block is a [`SampledFunction`], so `f_i**` is the lower hull of its
//! grid points and the relaxation is an LP over per-block simplex weights.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::caratheodory::{default_constant, NormSpec, DEFAULT_RETRIES};
use crate::envelope::{rho, rho_k, SampledFunction};
use crate::lp::{LinearProgram, Relation};
use crate::math::{abs, ceil, dot, norm2, sqrt};
use crate::shapley_folkman::{approx_sf_decompose, sf_decompose, ApproxSFParams, BlockFamily};
use crate::{Error, Result, Rng};

/// Row `k` counts as active when `b_k - (Ax*)_k <= ACTIVE_TOL * (1 + |b_k|)`.
pub const ACTIVE_TOL: f64 = 1e-7;
/// Largest number of atom selections `perturbed_value` enumerates.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;
/// Largest number of atom choices tried when computing `M_V` exactly.
pub const MV_ENUMERATION_LIMIT: u128 = 100_000;

const THETA_ZERO: f64 = 1e-12;
const FEAS_TOL: f64 = 1e-9;

/// Alternative description `{x : exists u, Bx + Cu <= d}` of the coupling polytope.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExtendedFormulation {
    pub b: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub d: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeparableProblem {
    pub blocks: Vec<SampledFunction>,
    /// `m x d`, columns grouped by block.
    #[cfg_attr(feature = "serde", serde(rename = "A"))]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    /// When set, the relaxation is solved over this formulation instead of `Ax <= b`.
    /// Enumeration and feasibility checks still use `Ax <= b`.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub extended: Option<ExtendedFormulation>,
}

impl SeparableProblem {
    pub fn new(blocks: Vec<SampledFunction>, a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let p = Self {
            blocks,
            a,
            b,
            extended: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_extended(mut self, ext: ExtendedFormulation) -> Result<Self> {
        self.extended = Some(ext);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::Empty("blocks"));
        }
        for f in &self.blocks {
            f.validate()?;
        }
        let d = self.dim();
        check_matrix(&self.a, d, "A")?;
        if self.a.len() != self.b.len() {
            return Err(Error::DimensionMismatch {
                expected: self.a.len(),
                found: self.b.len(),
            });
        }
        if !crate::math::all_finite(&self.b) {
            return Err(Error::NonFinite("b"));
        }
        if let Some(ext) = &self.extended {
            check_matrix(&ext.b, d, "B")?;
            let q = ext.b.len();
            if ext.c.len() != q || ext.d.len() != q {
                return Err(Error::DimensionMismatch {
                    expected: q,
                    found: ext.c.len().min(ext.d.len()),
                });
            }
            let k = ext.c.first().map_or(0, |r| r.len());
            check_matrix(&ext.c, k, "C")?;
            if !crate::math::all_finite(&ext.d) {
                return Err(Error::NonFinite("d"));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.blocks.len()
    }

    /// Number of coupling rows.
    pub fn m(&self) -> usize {
        self.a.len()
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|f| f.dim).sum()
    }

    /// First column of each block.
    pub fn offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n());
        let mut o = 0;
        for f in &self.blocks {
            out.push(o);
            o += f.dim;
        }
        out
    }

    /// `[i][j]` = `A_i g_ij`.
    pub fn images(&self) -> Vec<Vec<Vec<f64>>> {
        images_of(&self.blocks, &self.offsets(), &self.a)
    }

    /// Objective and `Ax` of the selection `g_{i, choice[i]}`.
    pub fn evaluate(&self, choice: &[usize]) -> Result<(f64, Vec<f64>)> {
        if choice.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: choice.len(),
            });
        }
        let offs = self.offsets();
        let mut val = 0.0;
        let mut ax = vec![0.0; self.m()];
        for (i, (&j, f)) in choice.iter().zip(&self.blocks).enumerate() {
            if j >= f.len() {
                return Err(Error::invalid(format!("block {i} has no atom {j}")));
            }
            val += f.values[j];
            for (k, row) in self.a.iter().enumerate() {
                ax[k] += dot(&row[offs[i]..offs[i] + f.dim], &f.grid[j]);
            }
        }
        Ok((val, ax))
    }

    /// Whether `Ax <= b + u` holds up to a relative `1e-9`.
    pub fn is_feasible(&self, ax: &[f64], u: Option<&[f64]>) -> bool {
        self.b.iter().enumerate().all(|(k, bk)| {
            let rhs = bk + u.map_or(0.0, |u| u[k]);
            ax[k] <= rhs + FEAS_TOL * (1.0 + abs(rhs))
        })
    }
}

fn check_matrix(m: &[Vec<f64>], cols: usize, name: &'static str) -> Result<()> {
    for row in m {
        if row.len() != cols {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: row.len(),
            });
        }
        if !crate::math::all_finite(row) {
            return Err(Error::NonFinite(name));
        }
    }
    Ok(())
}

fn images_of(blocks: &[SampledFunction], offs: &[usize], rows: &[Vec<f64>]) -> Vec<Vec<Vec<f64>>> {
    blocks
        .iter()
        .zip(offs)
        .map(|(f, &o)| {
            f.grid
                .iter()
                .map(|g| rows.iter().map(|r| dot(&r[o..o + f.dim], g)).collect())
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RelaxationSolution {
    /// Per-block simplex weights over grid atoms.
    pub theta: Vec<Vec<f64>>,
    pub x_star: Vec<f64>,
    pub value: f64,
    /// Multipliers of the coupling rows, `>= 0`.
    pub dual_lambda: Vec<f64>,
    pub slack: Vec<f64>,
    pub active_set: Vec<usize>,
    /// Coupling rows the solution refers to: `A` and `b`, or `B` and `d - C u*`
    /// for an extended formulation.
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    /// `sum_k lambda_k w_k`.
    pub complementarity: f64,
    /// Largest `(rows x* - rhs)_k`, clipped at 0.
    pub max_violation: f64,
    pub nonzeros: usize,
    pub iterations: usize,
}

impl RelaxationSolution {
    /// `m~`, the number of active rows.
    pub fn m_tilde(&self) -> usize {
        self.active_set.len()
    }

    /// Blocks with more than one nonzero weight.
    pub fn mixed_blocks(&self) -> Vec<usize> {
        (0..self.theta.len())
            .filter(|&i| self.theta[i].iter().filter(|t| **t > 0.0).count() > 1)
            .collect()
    }
}

pub fn solve_relaxation(p: &SeparableProblem) -> Result<RelaxationSolution> {
    p.validate()?;
    let n = p.n();
    let offs = p.offsets();
    let (rows, rhs0, cmat): (&[Vec<f64>], &[f64], Option<&[Vec<f64>]>) = match &p.extended {
        Some(e) => (&e.b, &e.d, Some(&e.c)),
        None => (&p.a, &p.b, None),
    };
    let nu = cmat.and_then(|c| c.first()).map_or(0, |r| r.len());
    let images = images_of(&p.blocks, &offs, rows);
    let start: Vec<usize> = p
        .blocks
        .iter()
        .scan(0, |s, f| {
            let o = *s;
            *s += f.len();
            Some(o)
        })
        .collect();
    let n_theta: usize = p.blocks.iter().map(|f| f.len()).sum();
    let mut obj = Vec::with_capacity(n_theta + nu);
    for f in &p.blocks {
        obj.extend_from_slice(&f.values);
    }
    obj.resize(n_theta + nu, 0.0);
    let mut lp = LinearProgram::minimize(obj);
    for v in 0..nu {
        lp.set_free(n_theta + v);
    }
    for (i, f) in p.blocks.iter().enumerate() {
        let mut row = vec![0.0; n_theta + nu];
        row[start[i]..start[i] + f.len()].fill(1.0);
        lp.add(row, Relation::Eq, 1.0);
    }
    for (k, r) in rhs0.iter().enumerate() {
        let mut row = vec![0.0; n_theta + nu];
        for (i, f) in p.blocks.iter().enumerate() {
            for j in 0..f.len() {
                row[start[i] + j] = images[i][j][k];
            }
        }
        if let Some(c) = cmat {
            row[n_theta..].copy_from_slice(&c[k]);
        }
        lp.add(row, Relation::Le, *r);
    }
    let sol = lp.solve()?;

    let mut theta = Vec::with_capacity(n);
    for (i, f) in p.blocks.iter().enumerate() {
        let mut t: Vec<f64> = sol.x[start[i]..start[i] + f.len()]
            .iter()
            .map(|v| if *v < THETA_ZERO { 0.0 } else { *v })
            .collect();
        let s: f64 = t.iter().sum();
        if !(s > 0.0) {
            return Err(Error::Singular(format!("block {i} has no weight in the LP solution")));
        }
        t.iter_mut().for_each(|v| *v /= s);
        theta.push(t);
    }
    let mut x_star = vec![0.0; p.dim()];
    let mut value = 0.0;
    for (i, f) in p.blocks.iter().enumerate() {
        for (j, t) in theta[i].iter().enumerate() {
            if *t > 0.0 {
                crate::math::axpy(&mut x_star[offs[i]..offs[i] + f.dim], *t, &f.grid[j]);
                value += t * f.values[j];
            }
        }
    }
    let u_star = &sol.x[n_theta..];
    let rhs: Vec<f64> = match cmat {
        Some(c) => rhs0.iter().zip(c).map(|(d, row)| d - dot(row, u_star)).collect(),
        None => rhs0.to_vec(),
    };
    let dual_lambda: Vec<f64> = (0..rhs.len()).map(|k| (-sol.duals[n + k]).max(0.0)).collect();
    let mut slack = Vec::with_capacity(rhs.len());
    let mut active_set = Vec::new();
    let mut max_violation = 0.0f64;
    for (k, row) in rows.iter().enumerate() {
        let gap = rhs[k] - dot(row, &x_star);
        max_violation = max_violation.max(-gap);
        slack.push(gap.max(0.0));
        if gap <= ACTIVE_TOL * (1.0 + abs(rhs[k])) {
            active_set.push(k);
        }
    }
    let complementarity = dual_lambda.iter().zip(&slack).map(|(l, w)| l * w).sum();
    let nonzeros = theta.iter().flatten().filter(|t| **t > 0.0).count();
    Ok(RelaxationSolution {
        theta,
        x_star,
        value,
        dual_lambda,
        slack,
        active_set,
        rows: rows.to_vec(),
        rhs,
        complementarity,
        max_violation,
        nonzeros,
        iterations: sol.iterations,
    })
}

/// `Psi(lambda) = sum_i min_j [f_i(g_ij) + lambda' A_i g_ij] - lambda' b`.
pub fn dual_value(p: &SeparableProblem, lambda: &[f64]) -> Result<f64> {
    if lambda.len() != p.m() {
        return Err(Error::DimensionMismatch {
            expected: p.m(),
            found: lambda.len(),
        });
    }
    if lambda.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
        return Err(Error::invalid("lambda must be finite and nonnegative"));
    }
    let images = p.images();
    let mut psi = -dot(lambda, &p.b);
    for (f, img) in p.blocks.iter().zip(&images) {
        psi += f
            .values
            .iter()
            .zip(img)
            .map(|(v, g)| v + dot(lambda, g))
            .fold(f64::INFINITY, f64::min);
    }
    Ok(psi)
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Purification {
    /// Atom chosen in each block.
    pub choice: Vec<usize>,
    pub x_hat: Vec<f64>,
    pub upper: f64,
    pub feasible: bool,
    /// `max(0, (A x_hat - b)_k)`.
    pub violation: Vec<f64>,
}

/// Dual-greedy rounding: mixed blocks take the supported atom minimizing
/// `f_i(g_ij) + lambda' A_i g_ij`, lowest index on ties.
pub fn purify(p: &SeparableProblem, sol: &RelaxationSolution) -> Result<Purification> {
    check_solution(p, sol)?;
    let offs = p.offsets();
    let images = images_of(&p.blocks, &offs, &sol.rows);
    let choice: Vec<usize> = sol
        .theta
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let mut best: Option<(usize, f64)> = None;
            for (j, w) in t.iter().enumerate() {
                if *w <= 0.0 {
                    continue;
                }
                let s = p.blocks[i].values[j] + dot(&sol.dual_lambda, &images[i][j]);
                match best {
                    Some((_, b)) if s >= b - 1e-12 * (1.0 + abs(b)) => {}
                    _ => best = Some((j, s)),
                }
            }
            best.map_or(0, |b| b.0)
        })
        .collect();
    finish_purification(p, choice)
}

/// Randomized rounding: each mixed block draws atom `j` with probability `theta_ij`.
pub fn purify_randomized(
    p: &SeparableProblem,
    sol: &RelaxationSolution,
    rng: &mut Rng,
) -> Result<Purification> {
    check_solution(p, sol)?;
    let choice = sol
        .theta
        .iter()
        .map(|t| {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut last = 0;
            for (j, w) in t.iter().enumerate() {
                if *w > 0.0 {
                    acc += w;
                    last = j;
                    if u < acc {
                        return j;
                    }
                }
            }
            last
        })
        .collect();
    finish_purification(p, choice)
}

fn finish_purification(p: &SeparableProblem, choice: Vec<usize>) -> Result<Purification> {
    let (upper, ax) = p.evaluate(&choice)?;
    let offs = p.offsets();
    let mut x_hat = vec![0.0; p.dim()];
    for (i, &j) in choice.iter().enumerate() {
        x_hat[offs[i]..offs[i] + p.blocks[i].dim].copy_from_slice(&p.blocks[i].grid[j]);
    }
    let violation: Vec<f64> = ax.iter().zip(&p.b).map(|(a, b)| (a - b).max(0.0)).collect();
    Ok(Purification {
        choice,
        x_hat,
        upper,
        feasible: p.is_feasible(&ax, None),
        violation,
    })
}

fn check_solution(p: &SeparableProblem, sol: &RelaxationSolution) -> Result<()> {
    if sol.theta.len() != p.n() {
        return Err(Error::DimensionMismatch {
            expected: p.n(),
            found: sol.theta.len(),
        });
    }
    for (t, f) in sol.theta.iter().zip(&p.blocks) {
        if t.len() != f.len() {
            return Err(Error::DimensionMismatch {
                expected: f.len(),
                found: t.len(),
            });
        }
    }
    if sol.dual_lambda.len() != sol.rows.len() {
        return Err(Error::DimensionMismatch {
            expected: sol.rows.len(),
            found: sol.dual_lambda.len(),
        });
    }
    Ok(())
}

/// `rho(f_i)` for every block.
pub fn block_rhos(p: &SeparableProblem) -> Result<Vec<f64>> {
    p.blocks.iter().map(rho).collect()
}

/// Sum of the `count` largest entries.
pub fn sum_largest(values: &[f64], count: usize) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v.iter().take(count).sum()
}

/// Sum of the `m~ + 1` largest `rho(f_i)`.
pub fn gap_bound_basic(p: &SeparableProblem, sol: &RelaxationSolution) -> Result<f64> {
    Ok(sum_largest(&block_rhos(p)?, sol.m_tilde() + 1))
}

/// `max sum_i profiles[i][beta_i - 1]` over `beta_i in [1, profiles[i].len()]`
/// with `sum beta_i = budget`. A budget above `sum len` is clamped.
pub fn refined_from_profiles(profiles: &[Vec<f64>], budget: usize) -> Result<f64> {
    let n = profiles.len();
    if profiles.iter().any(|p| p.is_empty()) {
        return Err(Error::Empty("rho_k profile"));
    }
    if budget < n {
        return Err(Error::invalid(format!(
            "budget {budget} is below the block count {n}"
        )));
    }
    let cap: usize = profiles.iter().map(|p| p.len()).sum();
    let budget = budget.min(cap);
    // best[s] = max over the blocks seen so far with sum beta = s.
    let mut best = vec![f64::NEG_INFINITY; budget + 1];
    best[0] = 0.0;
    for prof in profiles {
        let mut next = vec![f64::NEG_INFINITY; budget + 1];
        for s in 0..=budget {
            if best[s] == f64::NEG_INFINITY {
                continue;
            }
            for (k, r) in prof.iter().enumerate() {
                let t = s + k + 1;
                if t > budget {
                    break;
                }
                next[t] = next[t].max(best[s] + r);
            }
        }
        best = next;
    }
    Ok(best[budget])
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RefinedBound {
    pub value: f64,
    pub budget: usize,
    /// `profiles[i][k - 1] = rho_k(f_i)`, `k = 1..=m~+2`.
    pub profiles: Vec<Vec<f64>>,
    /// Blocks whose `rho_k` hit the enumeration budget and used `rho` instead.
    pub fallback_blocks: Vec<usize>,
}

/// `max sum rho_{beta_i}(f_i)` over `beta_i in [1, m~+2]`, `sum beta_i = budget`.
pub fn gap_bound_refined(p: &SeparableProblem, sol: &RelaxationSolution, budget: usize) -> Result<RefinedBound> {
    let kmax = sol.m_tilde() + 2;
    let mut profiles = Vec::with_capacity(p.n());
    let mut fallback_blocks = Vec::new();
    for (i, f) in p.blocks.iter().enumerate() {
        let mut prof = Vec::with_capacity(kmax);
        for k in 1..=kmax {
            match rho_k(f, k) {
                Ok(v) => prof.push(v),
                Err(Error::BudgetExceeded { .. }) => {
                    if !fallback_blocks.contains(&i) {
                        fallback_blocks.push(i);
                    }
                    prof.push(rho(f)?);
                }
                Err(e) => return Err(e),
            }
        }
        profiles.push(prof);
    }
    let value = refined_from_profiles(&profiles, budget)?;
    Ok(RefinedBound {
        value,
        budget,
        profiles,
        fallback_blocks,
    })
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GapCertificate {
    /// Relaxation value.
    pub lower: f64,
    /// Objective at the purified point.
    pub upper: f64,
    pub upper_feasible: bool,
    /// Mixed blocks of the relaxation solution.
    pub s_set: Vec<usize>,
    pub n: usize,
    pub m: usize,
    pub m_tilde: usize,
    /// Sum of the `m~ + 1` largest `rho`.
    pub bound_basic: f64,
    /// Same with the full row count `m`.
    pub bound_basic_full_m: f64,
    /// Refined bound at budget `n + m~ + 1`.
    pub bound_refined: f64,
    pub refined_budget: usize,
    pub refined_fallback_blocks: Vec<usize>,
    pub approx: Option<ApproxTerms>,
}

impl GapCertificate {
    /// `upper - lower`.
    pub fn observed_gap(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ApproxTerms {
    pub gamma: f64,
    pub c: f64,
    /// `n + 1 + 2 m~ c / (gamma^2 + c)` before rounding.
    pub s_formula: f64,
    /// Rounded up and clamped to `[n, n + m~ + 1]`.
    pub s: usize,
    /// Nonzero weights in the sampled representation.
    pub s_actual: usize,
    /// Budget of the rho term, `max(s, s_actual)`.
    pub rho_budget: usize,
    pub sample_size: usize,
    /// Mixed blocks and mixed coefficients of the exact epigraph decomposition.
    pub q: usize,
    pub n_coefficients: usize,
    pub u1: f64,
    /// Active rows only.
    pub u2: Vec<f64>,
    /// Shift of all `m` rows under which the sampled point satisfies `Ax <= b + u`:
    /// `u2` on active rows, `max(0, (Ax - b)_k)` elsewhere.
    pub u2_full: Vec<f64>,
    /// `max(|u1|, ||u2||_2)`.
    pub u_norm: f64,
    /// `sqrt(2 m~) (R_v + R_lambda M_V) gamma`.
    pub u_bound: f64,
    pub r_v: f64,
    pub r_lambda: f64,
    pub m_v: f64,
    /// False when `M_V` is the Frobenius upper bound.
    pub m_v_exact: bool,
    pub rho_term: f64,
    /// `|u1| + rho_term`.
    pub gap: f64,
    pub bound_violated: bool,
    pub attempts: usize,
    /// Per-block convex weights of the sampled representation.
    pub weights: BTreeMap<usize, Vec<(usize, f64)>>,
}

/// Basic and refined bounds plus the purified upper value.
pub fn certificate(p: &SeparableProblem, sol: &RelaxationSolution) -> Result<GapCertificate> {
    check_solution(p, sol)?;
    let rhos = block_rhos(p)?;
    let n = p.n();
    let mt = sol.m_tilde();
    let pur = purify(p, sol)?;
    let refined = gap_bound_refined(p, sol, n + mt + 1)?;
    Ok(GapCertificate {
        lower: sol.value,
        upper: pur.upper,
        upper_feasible: pur.feasible,
        s_set: sol.mixed_blocks(),
        n,
        m: sol.rows.len(),
        m_tilde: mt,
        bound_basic: sum_largest(&rhos, mt + 1),
        bound_basic_full_m: sum_largest(&rhos, sol.rows.len() + 1),
        bound_refined: refined.value,
        refined_budget: refined.budget,
        refined_fallback_blocks: refined.fallback_blocks,
        approx: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ApproxOptions {
    /// Sampling constant; `None` uses `2 log(4 (m~ + 1 + q))`.
    pub c: Option<f64>,
    pub max_attempts: usize,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        Self {
            c: None,
            max_attempts: DEFAULT_RETRIES,
        }
    }
}

/// Certificate from a sampled representation of `z*` over the epigraph atoms
/// `(f_i(g_ij), A_I,i g_ij)`, `I` the active rows.
pub fn gap_bound_approx(
    p: &SeparableProblem,
    sol: &RelaxationSolution,
    gamma: f64,
    seed: u64,
    opts: &ApproxOptions,
) -> Result<GapCertificate> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::invalid("gamma must be positive and finite"));
    }
    let mut cert = certificate(p, sol)?;
    let n = p.n();
    let mt = sol.m_tilde();
    let dim = mt + 1;
    let offs = p.offsets();
    let active_rows: Vec<Vec<f64>> = sol.active_set.iter().map(|&k| sol.rows[k].clone()).collect();
    let images = images_of(&p.blocks, &offs, &active_rows);
    let atoms: Vec<Vec<Vec<f64>>> = p
        .blocks
        .iter()
        .zip(&images)
        .map(|(f, img)| {
            f.values
                .iter()
                .zip(img)
                .map(|(v, g)| {
                    let mut z = Vec::with_capacity(dim);
                    z.push(*v);
                    z.extend_from_slice(g);
                    z
                })
                .collect()
        })
        .collect();
    let family = BlockFamily::new(dim, atoms.clone(), sol.theta.clone())?;
    let z_star = family.point();
    let exact = sf_decompose(&family)?;
    let q = exact.mixed.len();
    let n_coef: usize = exact.mixed.iter().map(|i| exact.combos[i].len()).sum();

    let c = opts.c.unwrap_or_else(|| default_constant(dim + q));
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::invalid("c must be positive and finite"));
    }
    let s_formula = (n + 1) as f64 + 2.0 * mt as f64 * c / (gamma * gamma + c);
    let s = (ceil(s_formula - 1e-9) as usize).clamp(n, n + mt + 1);
    let sample_size = (s + q).saturating_sub(n).clamp(1, n_coef.max(1));
    let (m_v, m_v_exact) = sup_mv(&atoms, &exact.mixed);
    let profiles = gap_bound_refined(p, sol, n)?.profiles;

    let mut rng = crate::rng_from_seed(seed);
    let mut params = ApproxSFParams::new(1.0);
    params.norm = NormSpec::L2;
    params.c = Some(c);
    params.sample_size = Some(sample_size);
    params.max_attempts = 1;
    let mut best: Option<ApproxTerms> = None;
    let attempts = opts.max_attempts.max(1);
    for attempt in 1..=attempts {
        let res = approx_sf_decompose(&family, &params, &mut rng)?;
        let weights = res.normalized();
        let mut z_bar = vec![0.0; dim];
        let mut x_bar = vec![0.0; p.dim()];
        let mut s_actual = 0;
        for (&i, list) in &weights {
            for &(j, w) in list {
                crate::math::axpy(&mut z_bar, w, &atoms[i][j]);
                let f = &p.blocks[i];
                crate::math::axpy(&mut x_bar[offs[i]..offs[i] + f.dim], w, &f.grid[j]);
                s_actual += 1;
            }
        }
        let u1 = z_star[0] - z_bar[0];
        let u2: Vec<f64> = (1..dim).map(|k| z_bar[k] - z_star[k]).collect();
        let ax_bar: Vec<f64> = p.a.iter().map(|r| dot(r, &x_bar)).collect();
        let u2_full: Vec<f64> = (0..p.m())
            .map(|k| match sol.active_set.iter().position(|&a| a == k) {
                Some(pos) if p.extended.is_none() => u2[pos],
                _ => (ax_bar[k] - p.b[k]).max(0.0),
            })
            .collect();
        let u_norm = abs(u1).max(norm2(&u2));
        let u_bound = sqrt(2.0 * mt as f64) * (res.r_v + res.r_lambda * m_v) * gamma;
        let violated = u_norm > u_bound + 1e-9 * (1.0 + abs(z_star[0]) + norm2(&z_star[1..]));
        let rho_budget = s.max(s_actual);
        let rho_term = refined_from_profiles(&profiles, rho_budget)?;
        let terms = ApproxTerms {
            gamma,
            c,
            s_formula,
            s,
            s_actual,
            rho_budget,
            sample_size,
            q,
            n_coefficients: n_coef,
            u1,
            u2,
            u2_full,
            u_norm,
            u_bound,
            r_v: res.r_v,
            r_lambda: res.r_lambda,
            m_v,
            m_v_exact,
            rho_term,
            gap: abs(u1) + rho_term,
            bound_violated: violated,
            attempts: attempt,
            weights,
        };
        if !violated {
            best = Some(terms);
            break;
        }
        if best.as_ref().map_or(true, |b| terms.u_norm < b.u_norm) {
            best = Some(terms);
        }
    }
    let mut terms = best.expect("at least one attempt");
    if terms.bound_violated {
        terms.attempts = attempts;
    }
    cert.approx = Some(terms);
    Ok(cert)
}

/// `sup_{||u||_2 <= 1, v_i in F_i} ||sum_i u_i v_i||_2` over the listed blocks:
/// the largest singular value over every choice of one atom per block, or the
/// Frobenius bound `sqrt(sum_i max_j ||v_ij||^2)` when there are too many choices.
fn sup_mv(atoms: &[Vec<Vec<f64>>], blocks: &[usize]) -> (f64, bool) {
    if blocks.is_empty() {
        return (0.0, true);
    }
    let total = blocks
        .iter()
        .try_fold(1u128, |acc, &i| acc.checked_mul(atoms[i].len() as u128))
        .unwrap_or(u128::MAX);
    if total > MV_ENUMERATION_LIMIT {
        let fro: f64 = blocks
            .iter()
            .map(|&i| atoms[i].iter().map(|z| dot(z, z)).fold(0.0, f64::max))
            .sum();
        return (sqrt(fro), false);
    }
    let q = blocks.len();
    let mut pick = vec![0usize; q];
    let mut best = 0.0f64;
    loop {
        let mut gram = vec![0.0; q * q];
        for a in 0..q {
            for b in a..q {
                let v = dot(&atoms[blocks[a]][pick[a]], &atoms[blocks[b]][pick[b]]);
                gram[a * q + b] = v;
                gram[b * q + a] = v;
            }
        }
        let top = crate::linalg::symmetric_max_eigenvalue(gram, q).max(0.0);
        best = best.max(sqrt(top));
        let mut k = 0;
        loop {
            if k == q {
                return (best, true);
            }
            pick[k] += 1;
            if pick[k] < atoms[blocks[k]].len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Perturbed {
    /// The nonconvex problem, by enumeration of grid selections.
    P,
    /// Its convex relaxation, by LP.
    CoP,
}

/// `h(u)`: optimal value with constraints `Ax <= b + u`; `+inf` when infeasible.
pub fn perturbed_value(p: &SeparableProblem, u: &[f64], which: Perturbed) -> Result<f64> {
    if u.len() != p.m() {
        return Err(Error::DimensionMismatch {
            expected: p.m(),
            found: u.len(),
        });
    }
    if !crate::math::all_finite(u) {
        return Err(Error::NonFinite("perturbation"));
    }
    let rhs: Vec<f64> = p.b.iter().zip(u).map(|(b, u)| b + u).collect();
    match which {
        Perturbed::P => Ok(enumerate_min(p, &rhs)?.map_or(f64::INFINITY, |e| e.0)),
        Perturbed::CoP => {
            let q = SeparableProblem {
                blocks: p.blocks.clone(),
                a: p.a.clone(),
                b: rhs,
                extended: None,
            };
            match solve_relaxation(&q) {
                Ok(s) => Ok(s.value),
                Err(Error::Infeasible) => Ok(f64::INFINITY),
                Err(e) => Err(e),
            }
        }
    }
}

/// Optimal selection of `min sum f_i(g_i) s.t. Ax <= b`, `None` if no selection is feasible.
pub fn brute_force(p: &SeparableProblem) -> Result<Option<(f64, Vec<usize>)>> {
    enumerate_min(p, &p.b)
}

fn enumerate_min(p: &SeparableProblem, rhs: &[f64]) -> Result<Option<(f64, Vec<usize>)>> {
    p.validate()?;
    let needed = p
        .blocks
        .iter()
        .try_fold(1u128, |acc, f| acc.checked_mul(f.len() as u128))
        .unwrap_or(u128::MAX);
    if needed > ENUMERATION_LIMIT {
        return Err(Error::BudgetExceeded {
            needed,
            limit: ENUMERATION_LIMIT,
        });
    }
    let n = p.n();
    let m = p.m();
    let images = p.images();
    // Suffix minima for pruning: objective and each row separately.
    let mut fmin = vec![0.0; n + 1];
    let mut rmin = vec![vec![0.0; m]; n + 1];
    for i in (0..n).rev() {
        let f = &p.blocks[i];
        fmin[i] = fmin[i + 1] + f.values.iter().copied().fold(f64::INFINITY, f64::min);
        for k in 0..m {
            rmin[i][k] = rmin[i + 1][k] + images[i].iter().map(|g| g[k]).fold(f64::INFINITY, f64::min);
        }
    }
    let tol: Vec<f64> = rhs.iter().map(|r| FEAS_TOL * (1.0 + abs(*r))).collect();
    let mut st = Search {
        p,
        images: &images,
        rhs,
        tol: &tol,
        fmin: &fmin,
        rmin: &rmin,
        pick: vec![0; n],
        best: f64::INFINITY,
        best_pick: None,
    };
    let mut ax = vec![0.0; m];
    st.descend(0, 0.0, &mut ax);
    Ok(st.best_pick.map(|c| (st.best, c)))
}

struct Search<'a> {
    p: &'a SeparableProblem,
    images: &'a [Vec<Vec<f64>>],
    rhs: &'a [f64],
    tol: &'a [f64],
    fmin: &'a [f64],
    rmin: &'a [Vec<f64>],
    pick: Vec<usize>,
    best: f64,
    best_pick: Option<Vec<usize>>,
}

impl Search<'_> {
    fn descend(&mut self, i: usize, val: f64, ax: &mut [f64]) {
        if i == self.p.n() {
            if val < self.best {
                self.best = val;
                self.best_pick = Some(self.pick.clone());
            }
            return;
        }
        let f = &self.p.blocks[i];
        for j in 0..f.len() {
            let v = val + f.values[j];
            if v + self.fmin[i + 1] >= self.best {
                continue;
            }
            let g = &self.images[i][j];
            let ok = (0..ax.len()).all(|k| ax[k] + g[k] + self.rmin[i + 1][k] <= self.rhs[k] + self.tol[k]);
            if !ok {
                continue;
            }
            for k in 0..ax.len() {
                ax[k] += g[k];
            }
            self.pick[i] = j;
            self.descend(i + 1, v, ax);
            for k in 0..ax.len() {
                ax[k] -= g[k];
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NonlinearBound {
    /// `(m + 1) rho_f`.
    pub objective_gap: f64,
    /// `(m + 1) rho_g` in every row.
    pub constraint_shift: Vec<f64>,
}

/// Gap and constraint shift for separable nonlinear constraints `sum g_i(x_i) <= b`.
pub fn gap_bound_nonlinear(rho_f_bar: f64, rho_g_bar: f64, m: usize) -> Result<NonlinearBound> {
    if !(rho_f_bar >= 0.0 && rho_g_bar >= 0.0) || !rho_f_bar.is_finite() || !rho_g_bar.is_finite() {
        return Err(Error::invalid("nonconvexity levels must be finite and nonnegative"));
    }
    let k = (m + 1) as f64;
    Ok(NonlinearBound {
        objective_gap: k * rho_f_bar,
        constraint_shift: vec![k * rho_g_bar; m],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{separable_problem, SeparableConfig};

    fn block(xs: &[f64], vals: &[f64]) -> SampledFunction {
        SampledFunction::from_1d(xs, vals.to_vec()).unwrap()
    }

    fn hump() -> SampledFunction {
        block(&[-1.0, 0.0, 1.0], &[0.0, 0.25, 0.0])
    }

    #[test]
    fn convex_blocks_without_binding_rows() {
        let blocks = vec![block(&[0.0, 1.0, 2.0], &[1.0, 0.0, 1.0]), block(&[0.0, 1.0], &[3.0, 2.0])];
        let p = SeparableProblem::new(blocks, vec![vec![1.0, 1.0]], vec![10.0]).unwrap();
        let sol = solve_relaxation(&p).unwrap();
        assert!((sol.value - 2.0).abs() < 1e-12);
        assert!(sol.active_set.is_empty());
        let cert = certificate(&p, &sol).unwrap();
        assert_eq!(cert.bound_basic, 0.0);
        assert_eq!(cert.observed_gap(), 0.0);
    }

    #[test]
    fn single_flat_block_mixes() {
        let p = SeparableProblem::new(vec![block(&[0.0, 1.0], &[0.0, 0.0])], vec![vec![1.0]], vec![0.5]).unwrap();
        let sol = solve_relaxation(&p).unwrap();
        assert_eq!(sol.value, 0.0);
        assert!(sol.x_star[0] <= 0.5 + 1e-12);
    }

    #[test]
    fn lp_duals_close_the_gap_and_bound_enumeration() {
        let cfg = SeparableConfig {
            n_min: 8,
            n_max: 8,
            grid_sizes: vec![5],
            m_min: 2,
            m_max: 2,
            b_slack: 0.5,
        };
        let mut rng = crate::rng_from_seed(21);
        for _ in 0..30 {
            let p = separable_problem(&mut rng, &cfg);
            let sol = solve_relaxation(&p).unwrap();
            let (bf, _) = brute_force(&p).unwrap().unwrap();
            assert!(sol.value <= bf + 1e-9);
            assert!(sol.nonzeros <= p.n() + sol.m_tilde());
            assert!(sol.max_violation <= 1e-8 && sol.complementarity <= 1e-6);
            let psi = dual_value(&p, &sol.dual_lambda).unwrap();
            assert!((psi - sol.value).abs() <= 1e-8, "{psi} vs {}", sol.value);
            for _ in 0..5 {
                let l: Vec<f64> = (0..2).map(|_| rng.gen_range(0.0..3.0)).collect();
                assert!(dual_value(&p, &l).unwrap() <= sol.value + 1e-9);
            }
        }
    }

    #[test]
    fn dual_at_zero_is_sum_of_minima() {
        let blocks = vec![hump(), block(&[0.0, 1.0], &[0.3, 0.7])];
        let p = SeparableProblem::new(blocks, vec![vec![1.0, 1.0]], vec![0.0]).unwrap();
        assert!((dual_value(&p, &[0.0]).unwrap() - 0.3).abs() < 1e-15);
        assert!(dual_value(&p, &[-1.0]).is_err());
    }

    #[test]
    fn dual_is_concave_on_segments() {
        let mut rng = crate::rng_from_seed(8);
        let p = separable_problem(&mut rng, &SeparableConfig::default());
        for _ in 0..50 {
            let a: Vec<f64> = (0..p.m()).map(|_| rng.gen_range(0.0..2.0)).collect();
            let b: Vec<f64> = (0..p.m()).map(|_| rng.gen_range(0.0..2.0)).collect();
            let t: f64 = rng.gen();
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| t * x + (1.0 - t) * y).collect();
            let lhs = dual_value(&p, &mid).unwrap();
            let rhs = t * dual_value(&p, &a).unwrap() + (1.0 - t) * dual_value(&p, &b).unwrap();
            assert!(lhs >= rhs - 1e-12);
        }
    }

    #[test]
    fn purify_keeps_pure_blocks_and_breaks_ties_low() {
        let blocks = vec![block(&[0.0, 1.0, 2.0], &[1.0, 0.0, 1.0])];
        let p = SeparableProblem::new(blocks.clone(), vec![vec![1.0]], vec![5.0]).unwrap();
        let sol = solve_relaxation(&p).unwrap();
        let pur = purify(&p, &sol).unwrap();
        assert_eq!(pur.choice, vec![1]);
        assert_eq!(pur.upper, sol.value);

        let p = SeparableProblem::new(blocks, vec![vec![0.0]], vec![0.0]).unwrap();
        let sol = RelaxationSolution {
            theta: vec![vec![0.5, 0.0, 0.5]],
            x_star: vec![1.0],
            value: 1.0,
            dual_lambda: vec![0.0],
            slack: vec![0.0],
            active_set: vec![0],
            rows: p.a.clone(),
            rhs: p.b.clone(),
            complementarity: 0.0,
            max_violation: 0.0,
            nonzeros: 2,
            iterations: 0,
        };
        assert_eq!(purify(&p, &sol).unwrap().choice, vec![0]);
    }

    #[test]
    fn binary_knapsack_gap_exceeds_zero_rho() {
        // Two-point grids have rho = 0, yet the grid problem keeps an integrality gap.
        let p = SeparableProblem::new(vec![block(&[0.0, 1.0], &[1.0, 0.0])], vec![vec![1.0]], vec![0.5]).unwrap();
        let sol = solve_relaxation(&p).unwrap();
        assert!((sol.value - 0.5).abs() < 1e-12);
        assert_eq!(gap_bound_basic(&p, &sol).unwrap(), 0.0);
        let (bf, choice) = brute_force(&p).unwrap().unwrap();
        assert_eq!((bf, choice), (1.0, vec![0]));
        let pur = purify(&p, &sol).unwrap();
        assert!(pur.upper >= bf);
    }

    #[test]
    fn randomized_purification_is_seeded() {
        let mut rng = crate::rng_from_seed(4);
        let p = separable_problem(&mut rng, &SeparableConfig::default());
        let sol = solve_relaxation(&p).unwrap();
        let a = purify_randomized(&p, &sol, &mut crate::rng_from_seed(9)).unwrap();
        let b = purify_randomized(&p, &sol, &mut crate::rng_from_seed(9)).unwrap();
        assert_eq!(a, b);
        for (i, &j) in a.choice.iter().enumerate() {
            assert!(sol.theta[i][j] > 0.0);
        }
    }

    #[test]
    fn basic_bound_takes_largest_rhos() {
        let blocks = vec![hump(); 5];
        let mut a = vec![vec![0.0; 5]];
        a[0][0] = 1.0;
        let p = SeparableProblem::new(blocks, a, vec![-0.5]).unwrap();
        let sol = solve_relaxation(&p).unwrap();
        assert_eq!(sol.m_tilde(), 1);
        assert!((gap_bound_basic(&p, &sol).unwrap() - 0.5).abs() < 1e-15);
        assert!((sum_largest(&[0.1, 0.3, 0.2], 10) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn refined_profiles_example() {
        let prof = vec![vec![0.0, 0.3, 0.3], vec![0.0, 0.1, 0.4]];
        assert!((refined_from_profiles(&prof, 4).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(refined_from_profiles(&prof, 2).unwrap(), 0.0);
        assert!(refined_from_profiles(&prof, 1).is_err());
        // Brute force over every split.
        for budget in 2..=8 {
            let mut best = f64::NEG_INFINITY;
            for b0 in 1..=3 {
                for b1 in 1..=3 {
                    if b0 + b1 == budget.min(6) {
                        best = best.max(prof[0][b0 - 1] + prof[1][b1 - 1]);
                    }
                }
            }
            assert_eq!(refined_from_profiles(&prof, budget).unwrap(), best);
        }
    }

    #[test]
    fn refined_matches_basic_for_line_blocks() {
        let mut rng = crate::rng_from_seed(13);
        for _ in 0..40 {
            let p = separable_problem(&mut rng, &SeparableConfig::default());
            let sol = solve_relaxation(&p).unwrap();
            let r = gap_bound_refined(&p, &sol, p.n() + sol.m_tilde() + 1).unwrap();
            assert!((r.value - gap_bound_basic(&p, &sol).unwrap()).abs() < 1e-12);
            assert_eq!(gap_bound_refined(&p, &sol, p.n()).unwrap().value, 0.0);
        }
    }

    #[test]
    fn approx_certificate_limits() {
        let mut rng = crate::rng_from_seed(17);
        for seed in 0..20 {
            let p = separable_problem(&mut rng, &SeparableConfig::default());
            let sol = solve_relaxation(&p).unwrap();
            let opts = ApproxOptions::default();
            let c = gap_bound_approx(&p, &sol, 1e-9, seed, &opts).unwrap();
            let a = c.approx.as_ref().unwrap();
            assert_eq!(a.s, p.n() + sol.m_tilde() + 1);
            assert!(a.u_norm < 1e-9);
            assert!((a.gap - c.bound_refined).abs() < 1e-8);
            let c = gap_bound_approx(&p, &sol, 1e9, seed, &opts).unwrap();
            let a = c.approx.unwrap();
            assert_eq!(a.s, p.n() + 1);
            assert!(!a.bound_violated);
        }
        assert!(gap_bound_approx(
            &SeparableProblem::new(vec![hump()], vec![vec![1.0]], vec![0.0]).unwrap(),
            &solve_relaxation(&SeparableProblem::new(vec![hump()], vec![vec![1.0]], vec![0.0]).unwrap()).unwrap(),
            0.0,
            0,
            &ApproxOptions::default()
        )
        .is_err());
    }

    #[test]
    fn mv_is_largest_singular_value() {
        // Two orthogonal unit atoms and their negatives: sigma_max = 1.
        let atoms = vec![vec![vec![1.0, 0.0], vec![-1.0, 0.0]], vec![vec![0.0, 1.0], vec![1.0, 0.0]]];
        let (mv, exact) = sup_mv(&atoms, &[0, 1]);
        assert!(exact);
        // Picking (1,0) twice gives sqrt(2).
        assert!((mv - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn perturbed_values() {
        let mut rng = crate::rng_from_seed(31);
        for _ in 0..30 {
            let p = separable_problem(&mut rng, &SeparableConfig::default());
            let sol = solve_relaxation(&p).unwrap();
            let zero = vec![0.0; p.m()];
            let h = perturbed_value(&p, &zero, Perturbed::CoP).unwrap();
            assert!((h - sol.value).abs() < 1e-9);
            let big = vec![1e3; p.m()];
            let free: f64 = p.blocks.iter().map(|f| f.values.iter().copied().fold(f64::INFINITY, f64::min)).sum();
            for which in [Perturbed::P, Perturbed::CoP] {
                assert!((perturbed_value(&p, &big, which).unwrap() - free).abs() < 1e-9);
            }
            let u: Vec<f64> = (0..p.m()).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let v: Vec<f64> = u.iter().map(|x| x + rng.gen_range(0.0..0.5)).collect();
            for which in [Perturbed::P, Perturbed::CoP] {
                assert!(perturbed_value(&p, &u, which).unwrap() >= perturbed_value(&p, &v, which).unwrap() - 1e-9);
            }
        }
    }

    #[test]
    fn infeasible_perturbation_is_infinite() {
        let p = SeparableProblem::new(vec![hump()], vec![vec![1.0]], vec![0.0]).unwrap();
        for which in [Perturbed::P, Perturbed::CoP] {
            assert_eq!(perturbed_value(&p, &[-5.0], which).unwrap(), f64::INFINITY);
        }
    }

    #[test]
    fn extended_formulation_matches_direct_solve() {
        // x0 + x1 <= 1 written as x0 + u <= 1, x1 - u <= 0.
        let blocks = vec![block(&[0.0, 1.0], &[0.0, -1.0]), block(&[0.0, 1.0], &[0.0, -2.0])];
        let p = SeparableProblem::new(blocks, vec![vec![1.0, 1.0]], vec![1.0]).unwrap();
        let direct = solve_relaxation(&p).unwrap();
        let ext = ExtendedFormulation {
            b: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            c: vec![vec![1.0], vec![-1.0]],
            d: vec![1.0, 0.0],
        };
        let q = p.clone().with_extended(ext).unwrap();
        let via = solve_relaxation(&q).unwrap();
        assert!((direct.value - via.value).abs() < 1e-9);
        assert_eq!(via.rows.len(), 2);
    }

    #[test]
    fn nonlinear_bound_formula() {
        let z = gap_bound_nonlinear(0.0, 0.0, 3).unwrap();
        assert_eq!(z.objective_gap, 0.0);
        assert_eq!(z.constraint_shift, vec![0.0; 3]);
        let b = gap_bound_nonlinear(0.25, 0.1, 2).unwrap();
        assert_eq!(b.objective_gap, 0.75);
        assert!(b.constraint_shift.iter().all(|s| *s == b.constraint_shift[0]));
        assert!(gap_bound_nonlinear(-1.0, 0.0, 1).is_err());
    }

    #[test]
    fn brute_force_budget() {
        let p = SeparableProblem::new(vec![hump(); 13], vec![], vec![]).unwrap();
        assert!(matches!(perturbed_value(&p, &[], Perturbed::P), Err(Error::BudgetExceeded { .. })));
    }
}
