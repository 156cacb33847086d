//! Exact and approximate Shapley-Folkman decompositions.
//!
//! Given `x = sum_i sum_j lambda_ij v_ij` with per-block simplex weights, the
//! exact decomposition rewrites `x` so that at most `d` blocks use more than
//! one atom. It lifts every atom to `(v_ij; e_i)` and runs the conic
//! Carathéodory reduction in `R^{d+n}`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample as sample_indices;

use crate::caratheodory::{default_constant, reduce_conic, sample_size_formula, NormSpec};
use crate::math::{abs, ceil, norm2, sqrt};
use crate::{Error, Result, Rng};

/// Blocks `V_i` (lists of atoms in `R^dim`) with simplex weights per block.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlockFamily {
    pub dim: usize,
    pub blocks: Vec<Vec<Vec<f64>>>,
    pub weights: Vec<Vec<f64>>,
}

impl BlockFamily {
    pub fn new(dim: usize, blocks: Vec<Vec<Vec<f64>>>, weights: Vec<Vec<f64>>) -> Result<Self> {
        let f = Self {
            dim,
            blocks,
            weights,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::Empty("block family"));
        }
        if self.blocks.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.blocks.len(),
                found: self.weights.len(),
            });
        }
        for (b, w) in self.blocks.iter().zip(&self.weights) {
            if b.is_empty() {
                return Err(Error::Empty("block"));
            }
            if b.len() != w.len() {
                return Err(Error::DimensionMismatch {
                    expected: b.len(),
                    found: w.len(),
                });
            }
            for a in b {
                if a.len() != self.dim {
                    return Err(Error::DimensionMismatch {
                        expected: self.dim,
                        found: a.len(),
                    });
                }
                if !crate::math::all_finite(a) {
                    return Err(Error::NonFinite("block atoms"));
                }
            }
            if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(Error::invalid("block weights must be finite and nonnegative"));
            }
            let s: f64 = w.iter().sum();
            if abs(s - 1.0) > 1e-9 {
                return Err(Error::invalid(alloc::format!(
                    "block weights must sum to 1, got {s}"
                )));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.blocks.len()
    }

    /// `x = sum_i sum_j lambda_ij v_ij`.
    pub fn point(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        for (b, w) in self.blocks.iter().zip(&self.weights) {
            for (a, l) in b.iter().zip(w) {
                crate::math::axpy(&mut x, *l, a);
            }
        }
        x
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SFDecomposition {
    /// Block -> the single atom it uses.
    pub extremal: BTreeMap<usize, usize>,
    /// Blocks that keep a genuine convex combination (`|S| <= d`).
    pub mixed: Vec<usize>,
    /// Block in `mixed` -> `(atom, weight)` pairs on the simplex.
    pub combos: BTreeMap<usize, Vec<(usize, f64)>>,
    pub x: Vec<f64>,
    pub reconstructed: Vec<f64>,
    /// `||x - reconstructed||_2`.
    pub error: f64,
    /// Nonzero weights over all blocks.
    pub nonzeros: usize,
}

impl SFDecomposition {
    /// Per-block `(atom, weight)` list, extremal blocks included.
    pub fn block_weights(&self, i: usize) -> Vec<(usize, f64)> {
        match self.extremal.get(&i) {
            Some(&j) => vec![(j, 1.0)],
            None => self.combos.get(&i).cloned().unwrap_or_default(),
        }
    }
}

const DEDUP_TOL: f64 = 1e-12;

pub fn sf_decompose(family: &BlockFamily) -> Result<SFDecomposition> {
    family.validate()?;
    let d = family.dim;
    let x = family.point();
    let mut extremal = BTreeMap::new();
    // (block, representative atom indices, merged weights)
    let mut pending: Vec<(usize, Vec<usize>, Vec<f64>)> = Vec::new();
    for (i, (b, w)) in family.blocks.iter().zip(&family.weights).enumerate() {
        if let Some(j) = w.iter().position(|l| *l >= 1.0 - 1e-12) {
            extremal.insert(i, j);
            continue;
        }
        let mut reps: Vec<usize> = Vec::new();
        let mut ws: Vec<f64> = Vec::new();
        for (j, a) in b.iter().enumerate() {
            if w[j] <= 0.0 {
                continue;
            }
            let same = reps.iter().position(|&r| {
                b[r].iter()
                    .zip(a)
                    .all(|(p, q)| abs(p - q) <= DEDUP_TOL * (1.0 + abs(*p)))
            });
            match same {
                Some(k) => ws[k] += w[j],
                None => {
                    reps.push(j);
                    ws.push(w[j]);
                }
            }
        }
        if reps.len() == 1 {
            extremal.insert(i, reps[0]);
        } else {
            pending.push((i, reps, ws));
        }
    }

    let np = pending.len();
    let mut combos = BTreeMap::new();
    let mut mixed = Vec::new();
    if np > 0 {
        let mut atoms = Vec::new();
        let mut weights = Vec::new();
        let mut owner = Vec::new();
        for (k, (i, reps, ws)) in pending.iter().enumerate() {
            for (r, w) in reps.iter().zip(ws) {
                let mut z = family.blocks[*i][*r].clone();
                z.resize(d + np, 0.0);
                z[d + k] = 1.0;
                atoms.push(z);
                weights.push(*w);
                owner.push((k, *r));
            }
        }
        let reduced = reduce_conic(&atoms, &weights)?;
        let mut per_block: Vec<Vec<(usize, f64)>> = vec![Vec::new(); np];
        for (&a, &w) in reduced.atom_indices.iter().zip(&reduced.weights) {
            let (k, r) = owner[a];
            per_block[k].push((r, w));
        }
        for (k, mut list) in per_block.into_iter().enumerate() {
            let i = pending[k].0;
            match list.len() {
                0 => {
                    return Err(Error::Singular(alloc::format!(
                        "block {i} lost all of its weight in the conic reduction"
                    )))
                }
                1 => {
                    extremal.insert(i, list[0].0);
                }
                _ => {
                    let s: f64 = list.iter().map(|p| p.1).sum();
                    for p in &mut list {
                        p.1 /= s;
                    }
                    mixed.push(i);
                    combos.insert(i, list);
                }
            }
        }
    }
    mixed.sort_unstable();
    let mut reconstructed = vec![0.0; d];
    for (&i, &j) in &extremal {
        crate::math::axpy(&mut reconstructed, 1.0, &family.blocks[i][j]);
    }
    for (&i, list) in &combos {
        for &(j, w) in list {
            crate::math::axpy(&mut reconstructed, w, &family.blocks[i][j]);
        }
    }
    let error = crate::math::dist2(&x, &reconstructed);
    let nonzeros = extremal.len() + combos.values().map(|l| l.len()).sum::<usize>();
    Ok(SFDecomposition {
        extremal,
        mixed,
        combos,
        x,
        reconstructed,
        error,
        nonzeros,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ApproxSFParams {
    pub epsilon: f64,
    /// Scale of the point block in the lift; `None` saturates `beta D R_v = gamma R_lambda`.
    pub beta: Option<f64>,
    /// Scale of the indicator block; `None` uses `q / sqrt(d + q)`.
    pub gamma: Option<f64>,
    pub norm: NormSpec,
    /// Sampling constant; `None` uses `2 log(4 (d + q))`.
    pub c: Option<f64>,
    /// Overrides the computed number of sampled coefficients.
    pub sample_size: Option<usize>,
    pub max_attempts: usize,
}

impl ApproxSFParams {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            beta: None,
            gamma: None,
            norm: NormSpec::L2,
            c: None,
            sample_size: None,
            max_attempts: crate::caratheodory::DEFAULT_RETRIES,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ApproxSFResult {
    pub x: Vec<f64>,
    pub x_hat: Vec<f64>,
    /// Blocks outside `S u T` and the atom each uses.
    pub extremal: BTreeMap<usize, usize>,
    /// Block in `S u T` -> `mu_i`.
    pub mu: BTreeMap<usize, f64>,
    /// Block in `S u T` -> sampled `(atom, mu_ij)`; empty for blocks that drew nothing.
    pub sampled: BTreeMap<usize, Vec<(usize, f64)>>,
    /// Block in `S u T` -> its exact-decomposition weights.
    pub exact_weights: BTreeMap<usize, Vec<(usize, f64)>>,
    pub s_set: Vec<usize>,
    pub t_set: Vec<usize>,
    pub q: usize,
    /// Coefficients drawn, out of `n_coefficients` mixed ones.
    pub m: usize,
    pub n_coefficients: usize,
    pub x_error: f64,
    pub sum_error: f64,
    pub deviation: f64,
    pub x_error_bound: f64,
    pub sum_error_bound: f64,
    pub deviation_bound: f64,
    pub bound_violated: bool,
    pub attempts: usize,
    pub epsilon: f64,
    pub beta: f64,
    pub gamma: f64,
    pub c: f64,
    pub norm: NormSpec,
    pub r_v: f64,
    pub r_lambda: f64,
}

impl ApproxSFResult {
    /// Whether `|S| <= m - q`.
    pub fn s_within_m_minus_q(&self) -> bool {
        self.s_set.len() + self.q <= self.m || self.q == 0
    }

    /// Whether the sharper `|S| <= (m - |T|) / 2` held on this draw.
    pub fn s_within_half(&self) -> bool {
        2 * self.s_set.len() + self.t_set.len() <= self.m || self.q == 0
    }

    /// Per-block convex weights of a point of `sum V_i + sum_S Co(V_i)`:
    /// sampled weights renormalized by `mu_i`; blocks that drew nothing take
    /// their heaviest exact atom.
    pub fn normalized(&self) -> BTreeMap<usize, Vec<(usize, f64)>> {
        let mut out = BTreeMap::new();
        for (&i, &j) in &self.extremal {
            out.insert(i, vec![(j, 1.0)]);
        }
        for (&i, list) in &self.sampled {
            if list.is_empty() {
                let exact = &self.exact_weights[&i];
                let mut best = exact[0];
                for &p in exact {
                    if p.1 > best.1 {
                        best = p;
                    }
                }
                out.insert(i, vec![(best.0, 1.0)]);
            } else {
                let s: f64 = list.iter().map(|p| p.1).sum();
                out.insert(i, list.iter().map(|&(j, w)| (j, w / s)).collect());
            }
        }
        out
    }
}

pub fn approx_sf_decompose(
    family: &BlockFamily,
    params: &ApproxSFParams,
    rng: &mut Rng,
) -> Result<ApproxSFResult> {
    if !(params.epsilon > 0.0) {
        return Err(Error::invalid("epsilon must be positive"));
    }
    params.norm.validate()?;
    for (name, v) in [("beta", params.beta), ("gamma", params.gamma), ("c", params.c)] {
        if let Some(v) = v {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(alloc::format!("{name} must be positive and finite")));
            }
        }
    }
    let sf = sf_decompose(family)?;
    let d = family.dim;
    let q = sf.mixed.len();
    let smooth = params.norm.smoothness().unwrap_or(1.0);

    // The mixed coefficients are the sampling population.
    let mut coeffs: Vec<(usize, usize, f64)> = Vec::new();
    for &i in &sf.mixed {
        for &(j, w) in &sf.combos[&i] {
            coeffs.push((i, j, w));
        }
    }
    let n_coef = coeffs.len();
    let mut r_v = 0.0f64;
    let mut r_lambda = 0.0f64;
    for &(i, j, w) in &coeffs {
        let scaled: Vec<f64> = family.blocks[i][j].iter().map(|x| x * w).collect();
        r_v = r_v.max(params.norm.norm(&scaled));
        r_lambda = r_lambda.max(w);
    }
    let gamma = params
        .gamma
        .unwrap_or_else(|| if q == 0 { 1.0 } else { q as f64 / sqrt((d + q) as f64) });
    let beta = params.beta.unwrap_or_else(|| {
        if r_v > 0.0 {
            gamma * r_lambda / (smooth * r_v)
        } else {
            1.0
        }
    });
    let c = params.c.unwrap_or_else(|| default_constant(d + q));
    let qf = q as f64;
    let eps = params.epsilon;

    let exact_weights: BTreeMap<usize, Vec<(usize, f64)>> =
        sf.mixed.iter().map(|&i| (i, sf.combos[&i].clone())).collect();
    let mut base = ApproxSFResult {
        x: sf.x.clone(),
        x_hat: sf.reconstructed.clone(),
        extremal: sf.extremal.clone(),
        mu: BTreeMap::new(),
        sampled: BTreeMap::new(),
        exact_weights,
        s_set: Vec::new(),
        t_set: Vec::new(),
        q,
        m: n_coef,
        n_coefficients: n_coef,
        x_error: 0.0,
        sum_error: 0.0,
        deviation: 0.0,
        x_error_bound: qf * eps / beta,
        sum_error_bound: qf * eps,
        deviation_bound: qf * eps / gamma,
        bound_violated: false,
        attempts: 0,
        epsilon: eps,
        beta,
        gamma,
        c,
        norm: params.norm,
        r_v,
        r_lambda,
    };
    if q == 0 {
        base.x_hat = sf.x.clone();
        return Ok(base);
    }

    let r = (beta * smooth * r_v).max(gamma * r_lambda);
    let m = match params.sample_size {
        Some(m) => m.clamp(1, n_coef),
        None => sample_size_formula(n_coef, r / qf, eps, c),
    };
    base.m = m;
    let mut extremal_sum = vec![0.0; d];
    for (&i, &j) in &sf.extremal {
        crate::math::axpy(&mut extremal_sum, 1.0, &family.blocks[i][j]);
    }
    let scale = n_coef as f64 / m as f64;
    let mut best: Option<ApproxSFResult> = None;
    let attempts = params.max_attempts.max(1);
    for attempt in 1..=attempts {
        let mut picked = sample_indices(rng, n_coef, m).into_vec();
        picked.sort_unstable();
        let mut sampled: BTreeMap<usize, Vec<(usize, f64)>> =
            sf.mixed.iter().map(|&i| (i, Vec::new())).collect();
        for k in picked {
            let (i, j, w) = coeffs[k];
            sampled.get_mut(&i).expect("mixed block").push((j, scale * w));
        }
        let mut x_hat = extremal_sum.clone();
        let mut mu = BTreeMap::new();
        let (mut s_set, mut t_set) = (Vec::new(), Vec::new());
        for (&i, list) in &sampled {
            let mut mi = 0.0;
            for &(j, w) in list {
                crate::math::axpy(&mut x_hat, w, &family.blocks[i][j]);
                mi += w;
            }
            mu.insert(i, mi);
            if list.len() >= 2 {
                s_set.push(i);
            } else {
                t_set.push(i);
            }
        }
        let x_error = params.norm.norm(&crate::math::sub(&sf.x, &x_hat));
        let sum_error = abs(mu.values().sum::<f64>() - qf);
        let deviation = norm2(&mu.values().map(|v| v - 1.0).collect::<Vec<_>>());
        let ok = x_error <= base.x_error_bound
            && sum_error <= base.sum_error_bound
            && deviation <= base.deviation_bound;
        let candidate = ApproxSFResult {
            x_hat,
            mu,
            sampled,
            s_set,
            t_set,
            x_error,
            sum_error,
            deviation,
            bound_violated: !ok,
            attempts: attempt,
            ..base.clone()
        };
        if ok {
            return Ok(candidate);
        }
        let excess = |r: &ApproxSFResult| {
            (r.x_error / r.x_error_bound)
                .max(r.sum_error / r.sum_error_bound)
                .max(r.deviation / r.deviation_bound)
        };
        if best.as_ref().map_or(true, |b| excess(&candidate) < excess(b)) {
            best = Some(candidate);
        }
    }
    let mut b = best.expect("at least one attempt");
    b.attempts = attempts;
    Ok(b)
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorollaryBound {
    pub m: usize,
    /// `|S| <= m - d`, clamped to `[0, d]`.
    pub s_bound: usize,
    /// `sqrt(2d) (R_v / R_lambda + M_V) eps`.
    pub x_error_bound: f64,
}

/// Sampling size and error bound of the simplified approximate decomposition:
/// `m = ceil(1 + 2d t / (1 + t))`, `t = c (D R_lambda / eps)^2`.
pub fn corollary_error_bound(
    r_v: f64,
    r_lambda: f64,
    m_v: f64,
    d: usize,
    epsilon: f64,
    c: f64,
    smoothness: f64,
) -> Result<CorollaryBound> {
    if !(r_lambda > 0.0 && epsilon > 0.0 && c > 0.0 && smoothness > 0.0) || r_v < 0.0 || m_v < 0.0 {
        return Err(Error::invalid("corollary bound needs positive parameters"));
    }
    let s = smoothness * r_lambda / epsilon;
    let t = c * s * s;
    let frac = if t.is_infinite() { 1.0 } else { t / (1.0 + t) };
    let m = ceil(1.0 + 2.0 * d as f64 * frac) as usize;
    Ok(CorollaryBound {
        m,
        s_bound: m.saturating_sub(d).min(d),
        x_error_bound: sqrt(2.0 * d as f64) * (r_v / r_lambda + m_v) * epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    fn random_family(rng: &mut Rng, n: usize, d: usize, atoms: usize) -> BlockFamily {
        let blocks: Vec<Vec<Vec<f64>>> = (0..n)
            .map(|_| (0..atoms).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect())
            .collect();
        let weights = (0..n)
            .map(|_| {
                let w: Vec<f64> = (0..atoms).map(|_| rng.gen_range(0.05..1.0)).collect();
                let s: f64 = w.iter().sum();
                w.into_iter().map(|x| x / s).collect()
            })
            .collect();
        BlockFamily::new(d, blocks, weights).unwrap()
    }

    #[test]
    fn singleton_blocks_are_extremal() {
        let f = BlockFamily::new(1, vec![vec![vec![0.0]], vec![vec![1.0]]], vec![vec![1.0], vec![1.0]])
            .unwrap();
        let sf = sf_decompose(&f).unwrap();
        assert!(sf.mixed.is_empty());
        assert_eq!(sf.reconstructed, vec![1.0]);
    }

    #[test]
    fn two_binary_blocks() {
        let b = vec![vec![0.0], vec![1.0]];
        let f = BlockFamily::new(1, vec![b.clone(), b], vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let sf = sf_decompose(&f).unwrap();
        assert!(sf.mixed.len() <= 1);
        assert!(!sf.extremal.is_empty());
        assert!(sf.error < 1e-12);
    }

    #[test]
    fn twenty_blocks_in_r3() {
        let mut rng = crate::rng_from_seed(9);
        let f = random_family(&mut rng, 20, 3, 2);
        let sf = sf_decompose(&f).unwrap();
        assert!(sf.mixed.len() <= 3);
        assert!(sf.error <= 1e-8);
        assert!(sf.mixed.len() <= sf.nonzeros - f.n());
    }

    #[test]
    fn duplicate_atoms_are_merged() {
        let b = vec![vec![1.0, 0.0], vec![1.0, 0.0]];
        let f = BlockFamily::new(2, vec![b], vec![vec![0.3, 0.7]]).unwrap();
        let sf = sf_decompose(&f).unwrap();
        assert_eq!(sf.extremal.get(&0), Some(&0));
    }

    #[test]
    fn approx_with_no_mixed_blocks() {
        let f = BlockFamily::new(1, vec![vec![vec![0.5]]], vec![vec![1.0]]).unwrap();
        let r = approx_sf_decompose(&f, &ApproxSFParams::new(0.1), &mut crate::rng_from_seed(0)).unwrap();
        assert_eq!(r.q, 0);
        assert_eq!(r.x_hat, r.x);
        assert_eq!((r.x_error, r.sum_error, r.deviation), (0.0, 0.0, 0.0));
    }

    #[test]
    fn approx_full_sample_recovers_exact() {
        let mut rng = crate::rng_from_seed(4);
        let f = random_family(&mut rng, 10, 3, 3);
        let sf = sf_decompose(&f).unwrap();
        let mut p = ApproxSFParams::new(0.5);
        p.sample_size = Some(usize::MAX);
        let r = approx_sf_decompose(&f, &p, &mut rng).unwrap();
        assert_eq!(r.m, r.n_coefficients);
        assert_eq!(r.s_set, sf.mixed);
        assert!(r.x_error < 1e-12 && r.sum_error < 1e-12 && r.deviation < 1e-12);
        assert!(!r.bound_violated);
    }

    #[test]
    fn approx_thirty_blocks_in_r4() {
        let mut rng = crate::rng_from_seed(6);
        let f = random_family(&mut rng, 30, 4, 4);
        let mut p = ApproxSFParams::new(0.5);
        p.beta = Some(1.0);
        p.gamma = Some(1.0);
        let r = approx_sf_decompose(&f, &p, &mut rng).unwrap();
        assert!(!r.bound_violated);
        assert!(r.x_error <= r.q as f64 * 0.5);
        assert!(r.sum_error <= r.q as f64 * 0.5);
        assert!(r.deviation <= r.q as f64 * 0.5);
        // errors are recomputed from the sampled representation
        let mut xh = vec![0.0; 4];
        for (&i, &j) in &r.extremal {
            crate::math::axpy(&mut xh, 1.0, &f.blocks[i][j]);
        }
        for (&i, l) in &r.sampled {
            for &(j, w) in l {
                crate::math::axpy(&mut xh, w, &f.blocks[i][j]);
            }
        }
        assert!(crate::math::dist2(&xh, &r.x_hat) < 1e-12);
    }

    #[test]
    fn corollary_examples() {
        // c (D R_lambda / eps)^2 = 1  ->  m = 1 + d
        let b = corollary_error_bound(1.0, 0.1, 0.0, 3, 0.1, 1.0, 1.0).unwrap();
        assert_eq!(b.m, 4);
        assert_eq!(b.s_bound, 1);
        // eps -> 0: m -> 1 + 2d, |S| bound clamped to d
        let b = corollary_error_bound(1.0, 0.1, 0.0, 3, 1e-9, 1.0, 1.0).unwrap();
        assert_eq!(b.m, 7);
        assert_eq!(b.s_bound, 3);
    }
}
