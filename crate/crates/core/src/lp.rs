//! Dense two-phase simplex with Bland's anti-cycling rule.
//!
//! Sized for desk-scale problems (tens of rows, a few hundred columns). Every
//! solve returns a basic (vertex) solution together with the shadow prices of
//! the rows, `duals[i] = d(optimal value) / d(rhs[i])`. For a `<=` row of a
//! minimization the shadow price is nonpositive, so the Lagrange multiplier is
//! its negation.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::math::abs;
use crate::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const MAX_ITERATIONS: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `minimize c^T x` subject to linear rows; variables are `>= 0` unless marked free.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinearProgram {
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
    free: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub duals: Vec<f64>,
    pub iterations: usize,
}

impl LinearProgram {
    pub fn minimize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            constraints: Vec::new(),
            free: vec![false; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn set_free(&mut self, var: usize) {
        self.free[var] = true;
    }

    pub fn add(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        assert_eq!(coeffs.len(), self.objective.len(), "row length must match variable count");
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn solve(&self) -> Result<LpSolution> {
        if !crate::math::all_finite(&self.objective)
            || self
                .constraints
                .iter()
                .any(|c| !c.rhs.is_finite() || !crate::math::all_finite(&c.coeffs))
        {
            return Err(Error::NonFinite("linear program"));
        }
        Simplex::build(self).run()
    }
}

struct Simplex<'a> {
    lp: &'a LinearProgram,
    rows: usize,
    /// total columns excluding rhs
    cols: usize,
    /// expanded structural columns
    n_struct: usize,
    first_art: usize,
    /// maps expanded structural column -> (original var, sign)
    struct_map: Vec<(usize, f64)>,
    /// per row: the column that was basic initially (+e_i after normalization)
    init_col: Vec<usize>,
    row_sign: Vec<f64>,
    t: Vec<f64>,
    z: Vec<f64>,
    basis: Vec<usize>,
    iterations: usize,
}

impl<'a> Simplex<'a> {
    fn build(lp: &'a LinearProgram) -> Self {
        let rows = lp.constraints.len();
        let mut struct_map = Vec::new();
        for (j, &free) in lp.free.iter().enumerate() {
            struct_map.push((j, 1.0));
            if free {
                struct_map.push((j, -1.0));
            }
        }
        let n_struct = struct_map.len();
        let mut row_sign = vec![1.0; rows];
        let mut rel = Vec::with_capacity(rows);
        for (i, c) in lp.constraints.iter().enumerate() {
            let (s, r) = if c.rhs < 0.0 {
                let flipped = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (-1.0, flipped)
            } else {
                (1.0, c.relation)
            };
            row_sign[i] = s;
            rel.push(r);
        }
        let n_slack = rel.iter().filter(|r| **r != Relation::Eq).count();
        let n_art = rel.iter().filter(|r| **r != Relation::Le).count();
        let first_art = n_struct + n_slack;
        let cols = first_art + n_art;
        let width = cols + 1;
        let mut t = vec![0.0; rows * width];
        let mut basis = vec![0; rows];
        let mut init_col = vec![0; rows];
        let mut next_slack = n_struct;
        let mut next_art = first_art;
        for (i, c) in lp.constraints.iter().enumerate() {
            let s = row_sign[i];
            let row = &mut t[i * width..(i + 1) * width];
            for (k, &(j, sg)) in struct_map.iter().enumerate() {
                row[k] = s * sg * c.coeffs[j];
            }
            row[cols] = s * c.rhs;
            match rel[i] {
                Relation::Le => {
                    row[next_slack] = 1.0;
                    basis[i] = next_slack;
                    init_col[i] = next_slack;
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -1.0;
                    next_slack += 1;
                    row[next_art] = 1.0;
                    basis[i] = next_art;
                    init_col[i] = next_art;
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = 1.0;
                    basis[i] = next_art;
                    init_col[i] = next_art;
                    next_art += 1;
                }
            }
        }
        Simplex {
            lp,
            rows,
            cols,
            n_struct,
            first_art,
            struct_map,
            init_col,
            row_sign,
            t,
            z: vec![0.0; width],
            basis,
            iterations: 0,
        }
    }

    #[inline]
    fn width(&self) -> usize {
        self.cols + 1
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width() + j]
    }

    fn set_costs(&mut self, cost: &[f64]) {
        let w = self.width();
        self.z.clear();
        self.z.extend_from_slice(cost);
        self.z.push(0.0);
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..w {
                    self.z[j] -= cb * self.t[i * w + j];
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width();
        let p = self.t[r * w + c];
        for j in 0..w {
            self.t[r * w + j] /= p;
        }
        self.t[r * w + c] = 1.0;
        let (before, rest) = self.t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_mut(w).chain(after.chunks_mut(w)) {
            let f = row[c];
            if f != 0.0 {
                for (x, pv) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        let f = self.z[c];
        if f != 0.0 {
            for (x, pv) in self.z.iter_mut().zip(prow.iter()) {
                *x -= f * pv;
            }
            self.z[c] = 0.0;
        }
        self.basis[r] = c;
        self.iterations += 1;
    }

    /// Runs Bland's rule over columns `< limit`.
    fn optimize(&mut self, limit: usize) -> Result<()> {
        loop {
            if self.iterations > MAX_ITERATIONS {
                return Err(Error::NotConverged(format!(
                    "simplex exceeded {MAX_ITERATIONS} pivots"
                )));
            }
            let Some(enter) = (0..limit).find(|&j| self.z[j] < -COST_TOL) else {
                return Ok(());
            };
            let rhs_col = self.cols;
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, enter);
                if a > PIVOT_TOL {
                    let ratio = self.at(i, rhs_col) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            let tie = abs(ratio - lr) <= 1e-12 * (1.0 + abs(lr));
                            if ratio < lr && !tie || tie && self.basis[i] < self.basis[li] {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return Err(Error::Unbounded),
                Some((r, _)) => self.pivot(r, enter),
            }
        }
    }

    fn run(mut self) -> Result<LpSolution> {
        let rhs_col = self.cols;
        // Phase 1.
        if self.first_art < self.cols {
            let mut cost = vec![0.0; self.cols];
            for c in cost.iter_mut().skip(self.first_art) {
                *c = 1.0;
            }
            self.set_costs(&cost);
            self.optimize(self.cols)?;
            let infeas = -self.z[rhs_col];
            let scale = 1.0
                + self
                    .lp
                    .constraints
                    .iter()
                    .map(|c| abs(c.rhs))
                    .fold(0.0, f64::max);
            if infeas > 1e-8 * scale {
                return Err(Error::Infeasible);
            }
            // Drive artificials out of the basis where possible; rows where that
            // fails are redundant and keep a zero-valued artificial.
            for i in 0..self.rows {
                if self.basis[i] >= self.first_art {
                    let mut best: Option<(usize, f64)> = None;
                    for j in 0..self.first_art {
                        let a = abs(self.at(i, j));
                        if a > PIVOT_TOL && best.map_or(true, |(_, b)| a > b) {
                            best = Some((j, a));
                        }
                    }
                    if let Some((j, _)) = best {
                        self.pivot(i, j);
                    }
                }
            }
        }
        // Phase 2.
        let mut cost = vec![0.0; self.cols];
        for (k, &(j, sg)) in self.struct_map.iter().enumerate() {
            cost[k] = sg * self.lp.objective[j];
        }
        self.set_costs(&cost);
        self.optimize(self.first_art)?;

        let mut xs = vec![0.0; self.n_struct];
        for i in 0..self.rows {
            let b = self.basis[i];
            if b < self.n_struct {
                xs[b] = self.at(i, rhs_col).max(0.0);
            }
        }
        let mut x = vec![0.0; self.lp.num_vars()];
        for (k, &(j, sg)) in self.struct_map.iter().enumerate() {
            x[j] += sg * xs[k];
        }
        let duals = (0..self.rows)
            .map(|i| -self.z[self.init_col[i]] * self.row_sign[i])
            .collect();
        let objective = crate::math::dot(&self.lp.objective, &x);
        Ok(LpSolution {
            x,
            objective,
            duals,
            iterations: self.iterations,
        })
    }
}
