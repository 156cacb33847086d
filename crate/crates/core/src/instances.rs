//! Seeded random instances shared by the tests, the acceptance suite and the CLI.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::envelope::SampledFunction;
use crate::relaxation::SeparableProblem;
use crate::sampling_bounds::BoxedLp;
use crate::shapley_folkman::BlockFamily;
use crate::Rng;

/// Shape of a random separable problem with one-dimensional blocks.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeparableConfig {
    pub n_min: usize,
    pub n_max: usize,
    /// Grid sizes to draw from.
    pub grid_sizes: Vec<usize>,
    pub m_min: usize,
    pub m_max: usize,
    /// `b = A x_sel + U[0, b_slack]` for a random selection `x_sel`.
    pub b_slack: f64,
}

impl Default for SeparableConfig {
    fn default() -> Self {
        Self {
            n_min: 2,
            n_max: 10,
            grid_sizes: vec![2, 3, 4],
            m_min: 1,
            m_max: 3,
            b_slack: 0.5,
        }
    }
}

/// Blocks on sorted uniform grids in `[-1, 1]` with values in `[0, 1]`,
/// `A` uniform in `[-1, 1]`. Feasible by construction.
pub fn separable_problem(rng: &mut Rng, cfg: &SeparableConfig) -> SeparableProblem {
    let n = rng.gen_range(cfg.n_min..=cfg.n_max);
    let m = rng.gen_range(cfg.m_min..=cfg.m_max);
    let mut blocks = Vec::with_capacity(n);
    let mut sel = Vec::with_capacity(n);
    for _ in 0..n {
        let k = *cfg.grid_sizes.choose(rng).expect("grid sizes");
        let mut xs: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        xs.sort_by(f64::total_cmp);
        let vals: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0)).collect();
        sel.push(xs[rng.gen_range(0..k)]);
        blocks.push(SampledFunction::from_1d(&xs, vals).expect("valid grid"));
    }
    let a: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let b = a
        .iter()
        .map(|row| crate::math::dot(row, &sel) + rng.gen_range(0.0..=cfg.b_slack))
        .collect();
    SeparableProblem::new(blocks, a, b).expect("consistent shapes")
}

/// `n` blocks of `1..=max_atoms` atoms in `[-1, 1]^dim` with random simplex weights.
pub fn block_family(rng: &mut Rng, dim: usize, n: usize, max_atoms: usize) -> BlockFamily {
    let mut blocks = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for _ in 0..n {
        let k = rng.gen_range(1..=max_atoms);
        blocks.push(random_points(rng, k, dim));
        weights.push(simplex_weights(rng, k));
    }
    BlockFamily::new(dim, blocks, weights).expect("consistent shapes")
}

/// `count` points uniform in `[-1, 1]^dim`.
pub fn random_points(rng: &mut Rng, count: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect()
}

/// Normalized exponential draws, i.e. uniform on the simplex.
pub fn simplex_weights(rng: &mut Rng, k: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..k).map(|_| -crate::math::ln(1.0 - rng.gen::<f64>())).collect();
    let s: f64 = w.iter().sum();
    if s > 0.0 {
        w.iter_mut().for_each(|x| *x /= s);
    } else {
        w = vec![1.0 / k as f64; k];
    }
    w
}

/// Two clusters of `dim`-vectors around `+-center`, spread `spread`.
pub fn two_cluster_population(rng: &mut Rng, n: usize, dim: usize, center: f64, spread: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let c = if i % 2 == 0 { center } else { -center };
            (0..dim).map(|_| c + spread * rng.gen_range(-1.0..1.0)).collect()
        })
        .collect()
}

/// `n` random unit rows in dimension `d`, all strictly satisfied at a random
/// point of the box `[-1, 1]^d`, with a random unit objective.
pub fn boxed_lp(rng: &mut Rng, d: usize, n: usize) -> BoxedLp {
    let unit = |rng: &mut Rng| loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let l = crate::math::norm2(&v);
        if l > 1e-3 && l <= 1.0 {
            return v.iter().map(|x| x / l).collect::<Vec<f64>>();
        }
    };
    let x0: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let c = unit(rng);
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for _ in 0..n {
        let row = unit(rng);
        b.push(crate::math::dot(&row, &x0) + rng.gen_range(0.05..1.0));
        a.push(row);
    }
    BoxedLp {
        c,
        a,
        b,
        box_radius: 1.0,
    }
}

/// `n` scalars: uniform, two-cluster, or skewed, chosen by `kind % 3`.
pub fn scalar_population(rng: &mut Rng, n: usize, kind: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let v = match kind % 3 {
                0 => rng.gen_range(-1.0..1.0),
                1 => (if i % 2 == 0 { 0.8 } else { -0.8 }) + 0.1 * rng.gen_range(-1.0..1.0),
                _ => {
                    let u: f64 = rng.gen();
                    u * u * u
                }
            };
            vec![v]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_instances_are_feasible_and_seeded() {
        let cfg = SeparableConfig::default();
        let mut r1 = crate::rng_from_seed(11);
        let mut r2 = crate::rng_from_seed(11);
        for _ in 0..20 {
            let p = separable_problem(&mut r1, &cfg);
            assert_eq!(p, separable_problem(&mut r2, &cfg));
            assert!((2..=10).contains(&p.n()) && (1..=3).contains(&p.m()));
            assert!(crate::relaxation::brute_force(&p).unwrap().is_some());
        }
    }

    #[test]
    fn simplex_weights_sum_to_one() {
        let mut rng = crate::rng_from_seed(3);
        for k in 1..8 {
            let w = simplex_weights(&mut rng, k);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(w.iter().all(|x| *x >= 0.0));
        }
    }
}
