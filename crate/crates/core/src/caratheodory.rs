//! Exact and approximate Carathéodory representations.
//!
//! - [`reduce_conic`] / [`reduce_convex`]: drop atoms from a conic (convex)
//!   combination until the survivors are linearly (affinely) independent.
//! - [`fw_approx`]: sparse convex approximation by Frank-Wolfe.
//! - [`required_sample_size`] and [`sample_without_replacement`]: keep a large
//!   uniformly sampled fraction of the coefficients, rescaled by `N/m`.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample as sample_indices;

use crate::math::{abs, ceil, dot, ln, norm2, norm_inf, norm_p, sqrt};
use crate::{Error, Result, Rng};

/// Sparse nonnegative combination `sum_k weights[k] * atoms[atom_indices[k]]`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConicCombination {
    pub atom_indices: Vec<usize>,
    pub weights: Vec<f64>,
    pub target_dim: usize,
}

impl ConicCombination {
    pub fn support(&self) -> usize {
        self.atom_indices.len()
    }

    pub fn combine(&self, atoms: &[Vec<f64>]) -> Vec<f64> {
        let mut x = vec![0.0; self.target_dim];
        for (&j, &w) in self.atom_indices.iter().zip(&self.weights) {
            crate::math::axpy(&mut x, w, &atoms[j]);
        }
        x
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Norm used to measure approximation errors.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum NormSpec {
    L2,
    /// `l_p` with `p >= 2`.
    Lp(f64),
    Linf,
}

impl NormSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NormSpec::Lp(p) if !(p >= 2.0) || !p.is_finite() => {
                Err(Error::invalid(alloc::format!("l_p norm needs finite p >= 2, got {p}")))
            }
            _ => Ok(()),
        }
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        match *self {
            NormSpec::L2 => norm2(v),
            NormSpec::Lp(p) => norm_p(v, p),
            NormSpec::Linf => norm_inf(v),
        }
    }

    /// The `D` of a `(2, D)`-smooth space: 1 for `l_2`, `sqrt(p - 1)` for
    /// `l_p`. `l_inf` has none and goes through the `log(4d)` bound instead.
    pub fn smoothness(&self) -> Option<f64> {
        match *self {
            NormSpec::L2 => Some(1.0),
            NormSpec::Lp(p) => Some(sqrt(p - 1.0)),
            NormSpec::Linf => None,
        }
    }
}

fn check_atoms(atoms: &[Vec<f64>], weights: &[f64]) -> Result<usize> {
    let first = atoms.first().ok_or(Error::Empty("atoms"))?;
    let dim = first.len();
    if weights.len() != atoms.len() {
        return Err(Error::DimensionMismatch {
            expected: atoms.len(),
            found: weights.len(),
        });
    }
    for a in atoms {
        if a.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: a.len(),
            });
        }
        if !crate::math::all_finite(a) {
            return Err(Error::NonFinite("atoms"));
        }
    }
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite("weights"));
    }
    if weights.iter().any(|w| *w < 0.0) {
        return Err(Error::invalid("weights must be nonnegative"));
    }
    Ok(dim)
}

/// Conic Carathéodory: same sum, at most `D` atoms.
///
/// One Gauss-Jordan pass puts the active columns in reduced row-echelon form.
/// Each non-pivot column `j` then gives a null vector (`z_j = 1`, pivot
/// entries `-T[r, j]`); stepping along it zeroes one weight. If that weight
/// belongs to a pivot column, the row is re-pivoted onto `j`. The surviving
/// columns are independent, and a least-squares solve on them removes the
/// accumulated rounding when it keeps every weight nonnegative.
pub fn reduce_conic(atoms: &[Vec<f64>], weights: &[f64]) -> Result<ConicCombination> {
    let dim = check_atoms(atoms, weights)?;
    let target = {
        let mut x = vec![0.0; dim];
        for (a, w) in atoms.iter().zip(weights) {
            crate::math::axpy(&mut x, *w, a);
        }
        x
    };
    let cols: Vec<usize> = (0..atoms.len()).filter(|&j| weights[j] > 0.0).collect();
    let k = cols.len();
    let mut w: Vec<f64> = cols.iter().map(|&j| weights[j]).collect();
    let scale = cols
        .iter()
        .flat_map(|&j| atoms[j].iter())
        .fold(0.0f64, |m, x| m.max(abs(*x)));
    let pivot_tol = 1e-12 * scale;

    // Row-major tableau, `dim x k`.
    let mut t = vec![0.0; dim * k];
    for (c, &j) in cols.iter().enumerate() {
        for r in 0..dim {
            t[r * k + c] = atoms[j][r];
        }
    }
    let mut row_of: Vec<Option<usize>> = vec![None; k];
    let mut col_of: Vec<Option<usize>> = vec![None; dim];
    let pivot = |t: &mut [f64], r: usize, c: usize| {
        let p = t[r * k + c];
        for x in &mut t[r * k..(r + 1) * k] {
            *x /= p;
        }
        t[r * k + c] = 1.0;
        for rr in 0..dim {
            if rr == r {
                continue;
            }
            let f = t[rr * k + c];
            if f != 0.0 {
                for cc in 0..k {
                    t[rr * k + cc] -= f * t[r * k + cc];
                }
                t[rr * k + c] = 0.0;
            }
        }
    };
    if scale > 0.0 {
        for c in 0..k {
            let mut best: Option<(usize, f64)> = None;
            for r in 0..dim {
                if col_of[r].is_none() {
                    let a = abs(t[r * k + c]);
                    if a > pivot_tol && best.map_or(true, |(_, b)| a > b) {
                        best = Some((r, a));
                    }
                }
            }
            if let Some((r, _)) = best {
                pivot(&mut t, r, c);
                row_of[c] = Some(r);
                col_of[r] = Some(c);
            }
        }
    }
    if !crate::math::all_finite(&t) {
        return Err(Error::Singular("non-finite tableau in conic reduction".into()));
    }

    let mut alive = vec![true; k];
    for j in 0..k {
        if row_of[j].is_some() || !alive[j] {
            continue;
        }
        // j is a non-pivot column; walk along its null vector until it or a
        // pivot column drops out. Pivot columns only enter via re-pivoting
        // onto j, so j is handled exactly once.
        let colmax = (0..dim).fold(0.0f64, |m, r| m.max(abs(t[r * k + j])));
        let ztol = 1e-12 * (1.0 + colmax);
        let mut step = w[j];
        let mut leave: Option<usize> = None; // pivot row that leaves, None = j leaves
        for r in 0..dim {
            let Some(b) = col_of[r] else { continue };
            let tr = t[r * k + j];
            if tr < -ztol {
                let ratio = w[b] / -tr;
                if ratio < step {
                    step = ratio;
                    leave = Some(r);
                }
            }
        }
        for r in 0..dim {
            if let Some(b) = col_of[r] {
                let tr = t[r * k + j];
                if tr != 0.0 {
                    w[b] = (w[b] + step * tr).max(0.0);
                }
            }
        }
        match leave {
            None => {
                w[j] = 0.0;
                alive[j] = false;
            }
            Some(r) => {
                let b = col_of[r].expect("pivot row");
                w[j] -= step;
                w[b] = 0.0;
                alive[b] = false;
                row_of[b] = None;
                pivot(&mut t, r, j);
                row_of[j] = Some(r);
                col_of[r] = Some(j);
            }
        }
    }

    let mut support: Vec<usize> = (0..k).filter(|&c| alive[c] && w[c] > 0.0).collect();
    support.sort_unstable();
    let mut out_w: Vec<f64> = support.iter().map(|&c| w[c]).collect();
    let support_atoms: Vec<&[f64]> = support.iter().map(|&c| atoms[cols[c]].as_slice()).collect();
    if let Some(ls) = crate::linalg::least_squares(&support_atoms, &target) {
        if ls.iter().all(|x| *x >= 0.0)
            && residual(&support_atoms, &ls, &target) <= residual(&support_atoms, &out_w, &target)
        {
            out_w = ls;
        }
    }
    let mut atom_indices = Vec::with_capacity(support.len());
    let mut weights_out = Vec::with_capacity(support.len());
    for (c, wt) in support.iter().zip(out_w) {
        if wt > 0.0 {
            atom_indices.push(cols[*c]);
            weights_out.push(wt);
        }
    }
    Ok(ConicCombination {
        atom_indices,
        weights: weights_out,
        target_dim: dim,
    })
}

fn residual(cols: &[&[f64]], w: &[f64], target: &[f64]) -> f64 {
    let mut r = target.to_vec();
    for (c, x) in cols.iter().zip(w) {
        crate::math::axpy(&mut r, -x, c);
    }
    norm2(&r)
}

/// Convex Carathéodory: at most `D + 1` atoms, weights stay on the simplex.
pub fn reduce_convex(atoms: &[Vec<f64>], weights: &[f64]) -> Result<ConicCombination> {
    let dim = check_atoms(atoms, weights)?;
    let total: f64 = weights.iter().sum();
    if abs(total - 1.0) > 1e-9 {
        return Err(Error::invalid(alloc::format!(
            "convex weights must sum to 1, got {total}"
        )));
    }
    let lifted: Vec<Vec<f64>> = atoms
        .iter()
        .map(|a| {
            let mut v = a.clone();
            v.push(1.0);
            v
        })
        .collect();
    let mut c = reduce_conic(&lifted, weights)?;
    let s: f64 = c.weights.iter().sum();
    for w in &mut c.weights {
        *w /= s;
    }
    c.target_dim = dim;
    Ok(c)
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FwResult {
    pub combination: ConicCombination,
    /// Final `||target - combination||_p`.
    pub error: f64,
    /// `ceil(8 p D_p^2 / eps^2)` with `D_p = max ||atom||_p`.
    pub budget: usize,
    /// Euclidean residual after each iterate (nonincreasing).
    pub residuals: Vec<f64>,
}

/// Atom budget of the approximate Carathéodory lemma.
pub fn fw_budget(atoms: &[Vec<f64>], epsilon: f64, p: f64) -> usize {
    let dp = atoms.iter().map(|a| norm_p(a, p)).fold(0.0, f64::max);
    let b = ceil(8.0 * p * dp * dp / (epsilon * epsilon));
    if b >= usize::MAX as f64 {
        usize::MAX
    } else {
        (b as usize).max(1)
    }
}

/// Frank-Wolfe on `min ||target - v||_2^2` over `Co(atoms)` with exact line
/// search, stopping once the `l_p` error is at most `epsilon`.
///
/// Fails with [`Error::NotConverged`] when the atom budget is exhausted or the
/// iteration stalls first, which signals a target outside the hull.
pub fn fw_approx(target: &[f64], atoms: &[Vec<f64>], epsilon: f64, p: f64) -> Result<FwResult> {
    let dim = check_atoms(atoms, &vec![0.0; atoms.len()])?;
    if target.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: target.len(),
        });
    }
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon must be positive"));
    }
    NormSpec::Lp(p).validate()?;
    let budget = fw_budget(atoms, epsilon, p);
    let mut start = 0;
    let mut best = f64::INFINITY;
    for (j, a) in atoms.iter().enumerate() {
        let d = crate::math::dist2(a, target);
        if d < best {
            best = d;
            start = j;
        }
    }
    let mut lam = vec![0.0; atoms.len()];
    lam[start] = 1.0;
    let mut x = atoms[start].clone();
    let mut residuals = vec![crate::math::dist2(&x, target)];
    let finish = |lam: &[f64], x: &[f64], residuals: Vec<f64>| {
        let (atom_indices, weights): (Vec<usize>, Vec<f64>) = lam
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(j, w)| (j, *w))
            .unzip();
        FwResult {
            combination: ConicCombination {
                atom_indices,
                weights,
                target_dim: dim,
            },
            error: norm_p(&crate::math::sub(target, x), p),
            budget,
            residuals,
        }
    };
    loop {
        let err = norm_p(&crate::math::sub(target, &x), p);
        if err <= epsilon {
            return Ok(finish(&lam, &x, residuals));
        }
        let support = lam.iter().filter(|w| **w > 0.0).count();
        if support >= budget {
            return Err(Error::NotConverged(alloc::format!(
                "Frank-Wolfe used its budget of {budget} atoms with error {err}"
            )));
        }
        let g = crate::math::sub(&x, target);
        let mut s = 0;
        let mut best = f64::INFINITY;
        for (j, a) in atoms.iter().enumerate() {
            let v = dot(&g, a);
            if v < best {
                best = v;
                s = j;
            }
        }
        let d = crate::math::sub(&atoms[s], &x);
        let gd = dot(&g, &d);
        let dd = dot(&d, &d);
        if gd >= -1e-15 * (1.0 + dot(&g, &g)) || dd == 0.0 {
            return Err(Error::NotConverged(alloc::format!(
                "Frank-Wolfe stalled at error {err}; target is likely outside the hull"
            )));
        }
        let step = (-gd / dd).min(1.0);
        for l in lam.iter_mut() {
            *l *= 1.0 - step;
        }
        lam[s] += step;
        crate::math::axpy(&mut x, step, &d);
        residuals.push(crate::math::dist2(&x, target));
    }
}

/// Which high-sampling-ratio theorem sizes the sample.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SamplingVariant {
    /// Hoeffding-Serfling per coordinate plus a union bound: `c = 2 log(4d)`.
    Linf,
    /// Banach-space version in a `(2, D)`-smooth norm. `c = None` uses
    /// [`default_constant`]. An `l_inf` norm falls back to [`SamplingVariant::Linf`].
    Banach { norm: NormSpec, c: Option<f64> },
}

impl SamplingVariant {
    pub fn norm(&self) -> NormSpec {
        match *self {
            SamplingVariant::Linf => NormSpec::Linf,
            SamplingVariant::Banach { norm, .. } => norm,
        }
    }
}

/// `2 log(4d)`, the constant of the `l_inf` theorem.
pub fn default_constant(dim: usize) -> f64 {
    2.0 * ln(4.0 * dim.max(1) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SamplingPlan {
    pub n_atoms: usize,
    pub dim: usize,
    pub epsilon: f64,
    /// Failure probability per draw allowed by the theorem.
    pub delta0: f64,
    pub r_v: f64,
    pub r_lambda: f64,
    pub r: f64,
    pub c: f64,
    pub m: usize,
    pub variant: SamplingVariant,
}

impl SamplingPlan {
    /// Lower bound on the success probability of one draw implied by the
    /// Hoeffding-Serfling tail and the union bound over `dim + 1` scalar
    /// statements (coordinates and the weight sum).
    pub fn implied_confidence(&self) -> f64 {
        if self.m >= self.n_atoms {
            return 1.0;
        }
        let alpha = (self.m as f64 - 1.0) / self.n_atoms as f64;
        let tail = 2.0
            * crate::math::exp(
                -alpha * self.epsilon * self.epsilon
                    / (2.0 * self.n_atoms as f64 * (1.0 - alpha) * self.r * self.r),
            );
        (1.0 - (self.dim as f64 + 1.0) * tail).clamp(0.0, 1.0)
    }
}

/// `R_v = max_j ||lambda_j V_j||` and `R_lambda = max_j lambda_j`.
pub fn radii(atoms: &[Vec<f64>], weights: &[f64], norm: NormSpec) -> (f64, f64) {
    let mut rv = 0.0f64;
    let mut rl = 0.0f64;
    for (a, w) in atoms.iter().zip(weights) {
        let scaled: Vec<f64> = a.iter().map(|x| x * w).collect();
        rv = rv.max(norm.norm(&scaled));
        rl = rl.max(abs(*w));
    }
    (rv, rl)
}

/// `m = ceil(1 + N t / (1 + t))` clamped to `[1, N]`, `t = c (sqrt(N) R / eps)^2`.
pub fn sample_size_formula(n_atoms: usize, r: f64, epsilon: f64, c: f64) -> usize {
    let n = n_atoms as f64;
    let s = sqrt(n) * r / epsilon;
    let t = c * s * s;
    let frac = if t.is_infinite() { 1.0 } else { t / (1.0 + t) };
    let m = ceil(1.0 + n * frac);
    (m as usize).clamp(1, n_atoms.max(1))
}

pub fn required_sample_size(
    n_atoms: usize,
    dim: usize,
    epsilon: f64,
    r_v: f64,
    r_lambda: f64,
    variant: SamplingVariant,
) -> Result<SamplingPlan> {
    if n_atoms < 2 {
        return Err(Error::invalid("sampling needs at least two atoms"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon must be positive"));
    }
    if !(r_v >= 0.0 && r_lambda >= 0.0) {
        return Err(Error::invalid("radii must be nonnegative"));
    }
    let (r, c) = match variant {
        SamplingVariant::Linf
        | SamplingVariant::Banach {
            norm: NormSpec::Linf,
            ..
        } => (r_v.max(r_lambda), default_constant(dim)),
        SamplingVariant::Banach { norm, c } => {
            norm.validate()?;
            let d = norm.smoothness().unwrap_or(1.0);
            let c = c.unwrap_or_else(|| default_constant(dim));
            if !(c > 0.0) {
                return Err(Error::invalid("sampling constant c must be positive"));
            }
            ((d * r_v).max(r_lambda), c)
        }
    };
    Ok(SamplingPlan {
        n_atoms,
        dim,
        epsilon,
        delta0: 0.5,
        r_v,
        r_lambda,
        r,
        c,
        m: sample_size_formula(n_atoms, r, epsilon, c),
        variant,
    })
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleOutcome {
    /// Sampled atoms with `mu_j = (N/m) lambda_j`.
    pub combination: ConicCombination,
    /// `||x - x_hat||` in the plan's norm.
    pub x_error: f64,
    /// `|sum mu - 1|`.
    pub weight_error: f64,
    pub attempts: usize,
    /// False when every attempt missed `epsilon`; the best attempt is returned.
    pub within_tolerance: bool,
}

pub const DEFAULT_RETRIES: usize = 64;

/// Uniform `m`-subset without replacement, rescaled by `N/m`, redrawn until
/// both errors are at most `plan.epsilon` or `max_attempts` draws are used.
pub fn sample_without_replacement(
    atoms: &[Vec<f64>],
    weights: &[f64],
    plan: &SamplingPlan,
    rng: &mut Rng,
    max_attempts: usize,
) -> Result<SampleOutcome> {
    let dim = check_atoms(atoms, weights)?;
    let n = atoms.len();
    if plan.n_atoms != n {
        return Err(Error::DimensionMismatch {
            expected: plan.n_atoms,
            found: n,
        });
    }
    if plan.m == 0 || plan.m > n {
        return Err(Error::invalid("sample size must lie in [1, N]"));
    }
    let norm = plan.variant.norm();
    let mut x = vec![0.0; dim];
    for (a, w) in atoms.iter().zip(weights) {
        crate::math::axpy(&mut x, *w, a);
    }
    let scale = n as f64 / plan.m as f64;
    let mut best: Option<SampleOutcome> = None;
    for attempt in 1..=max_attempts.max(1) {
        let mut idx = sample_indices(rng, n, plan.m).into_vec();
        idx.sort_unstable();
        let mu: Vec<f64> = idx.iter().map(|&j| scale * weights[j]).collect();
        let combination = ConicCombination {
            atom_indices: idx,
            weights: mu,
            target_dim: dim,
        };
        let xh = combination.combine(atoms);
        let x_error = norm.norm(&crate::math::sub(&x, &xh));
        let weight_error = abs(combination.weight_sum() - 1.0);
        let ok = x_error <= plan.epsilon && weight_error <= plan.epsilon;
        let outcome = SampleOutcome {
            combination,
            x_error,
            weight_error,
            attempts: attempt,
            within_tolerance: ok,
        };
        if ok {
            return Ok(outcome);
        }
        let worse = |o: &SampleOutcome| o.x_error.max(o.weight_error);
        if best.as_ref().map_or(true, |b| worse(&outcome) < worse(b)) {
            best = Some(outcome);
        }
    }
    let mut b = best.expect("at least one attempt");
    b.attempts = max_attempts.max(1);
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    fn recompute(atoms: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; atoms[0].len()];
        for (a, w) in atoms.iter().zip(w) {
            crate::math::axpy(&mut x, *w, a);
        }
        x
    }

    #[test]
    fn single_atom_unchanged() {
        let c = reduce_conic(&[vec![1.0, 2.0]], &[1.0]).unwrap();
        assert_eq!(c.atom_indices, vec![0]);
        assert_eq!(c.weights, vec![1.0]);
    }

    #[test]
    fn basis_atoms_unchanged() {
        let atoms = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let c = reduce_conic(&atoms, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(c.atom_indices, vec![0, 1, 2]);
        assert_eq!(c.weights, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn random_planar_conic_reduction() {
        let mut rng = crate::rng_from_seed(5);
        for _ in 0..200 {
            let atoms: Vec<Vec<f64>> =
                (0..5).map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
            let w: Vec<f64> = (0..5).map(|_| rng.gen_range(0.1..1.0)).collect();
            let c = reduce_conic(&atoms, &w).unwrap();
            assert!(c.support() <= 2);
            assert!(c.weights.iter().all(|w| *w > 0.0));
            let want = recompute(&atoms, &w);
            let got = c.combine(&atoms);
            assert!(crate::math::dist2(&want, &got) <= 1e-10 * (1.0 + norm2(&want)));
        }
    }

    #[test]
    fn convex_reduction_of_hexagon_centroid() {
        let atoms: Vec<Vec<f64>> = (0..6)
            .map(|k| {
                let t = core::f64::consts::PI * k as f64 / 3.0;
                vec![crate::math::cos(t), crate::math::sin(t)]
            })
            .collect();
        let c = reduce_convex(&atoms, &[1.0 / 6.0; 6]).unwrap();
        assert!(c.support() <= 3);
        assert!((c.weight_sum() - 1.0).abs() < 1e-12);
        assert!(norm2(&c.combine(&atoms)) < 1e-12);
    }

    #[test]
    fn convex_reduction_keeps_small_inputs() {
        let atoms = vec![vec![0.0], vec![1.0]];
        let c = reduce_convex(&atoms, &[0.5, 0.5]).unwrap();
        assert_eq!(c.atom_indices, vec![0, 1]);
        assert_eq!(c.weights, vec![0.5, 0.5]);
        let c = reduce_convex(&atoms, &[0.0, 1.0]).unwrap();
        assert_eq!(c.atom_indices, vec![1]);
    }

    #[test]
    fn duplicated_and_zero_atoms() {
        let atoms = vec![vec![1.0, 1.0], vec![1.0, 1.0], vec![0.0, 0.0], vec![2.0, 2.0]];
        let c = reduce_conic(&atoms, &[1.0, 1.0, 5.0, 1.0]).unwrap();
        assert_eq!(c.support(), 1);
        let got = c.combine(&atoms);
        assert!((got[0] - 4.0).abs() < 1e-12 && (got[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn fw_budget_formula() {
        // 8 * 2 * 1^2 / 0.5^2
        let atoms = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(fw_budget(&atoms, 0.5, 2.0), 64);
    }

    #[test]
    fn fw_on_an_atom_is_exact() {
        let atoms = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, -1.0]];
        let r = fw_approx(&[0.0, 1.0], &atoms, 0.1, 2.0).unwrap();
        assert_eq!(r.combination.atom_indices, vec![1]);
        assert_eq!(r.error, 0.0);
    }

    #[test]
    fn fw_centroid_of_unit_vectors() {
        let mut rng = crate::rng_from_seed(1);
        let atoms: Vec<Vec<f64>> = (0..50)
            .map(|_| {
                let v: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let n = norm2(&v);
                v.into_iter().map(|x| x / n).collect()
            })
            .collect();
        let target = recompute(&atoms, &[1.0 / 50.0; 50]);
        let r = fw_approx(&target, &atoms, 0.3, 2.0).unwrap();
        let resid = norm2(&crate::math::sub(&target, &r.combination.combine(&atoms)));
        assert!(resid <= 0.3);
        assert!(r.combination.support() <= r.budget);
        assert!(r.residuals.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn fw_outside_hull_fails() {
        let atoms = vec![vec![0.0], vec![1.0]];
        assert!(matches!(fw_approx(&[3.0], &atoms, 0.1, 2.0), Err(Error::NotConverged(_))));
    }

    #[test]
    fn sample_size_examples() {
        // N = 100, d = 4, R = 0.1, eps = 0.5
        let plan = required_sample_size(100, 4, 0.5, 0.1, 0.1, SamplingVariant::Linf).unwrap();
        let t = 2.0 * libm::log(16.0) * (10.0f64 * 0.1 / 0.5).powi(2);
        assert_eq!(plan.m, libm::ceil(1.0 + 100.0 * t / (1.0 + t)) as usize);
        // c (sqrt(N) R / eps)^2 = 1  ->  1 + ceil(N/2)
        let plan = required_sample_size(
            101,
            3,
            1.0,
            0.0,
            1.0 / libm::sqrt(101.0),
            SamplingVariant::Banach { norm: NormSpec::L2, c: Some(1.0) },
        )
        .unwrap();
        assert_eq!(plan.m, 1 + 51);
        // huge epsilon: m -> 1
        let plan = required_sample_size(100, 4, 1e9, 0.1, 0.1, SamplingVariant::Linf).unwrap();
        assert_eq!(plan.m, 2);
    }

    #[test]
    fn full_sample_is_exact() {
        let atoms = vec![vec![1.0, 2.0], vec![3.0, -1.0], vec![0.0, 0.5]];
        let w = [0.2, 0.3, 0.5];
        let mut plan = required_sample_size(3, 2, 1e-3, 1.0, 1.0, SamplingVariant::Linf).unwrap();
        plan.m = 3;
        let out = sample_without_replacement(&atoms, &w, &plan, &mut crate::rng_from_seed(0), 4).unwrap();
        assert!(out.x_error < 1e-15 && out.weight_error < 1e-15 && out.within_tolerance);
    }

    #[test]
    fn single_nonzero_weight_error_is_reported_exactly() {
        let atoms: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let mut w = [0.0; 10];
        w[3] = 1.0;
        let mut plan = required_sample_size(10, 1, 10.0, 1.0, 1.0, SamplingVariant::Linf).unwrap();
        plan.m = 4;
        let mut rng = crate::rng_from_seed(2);
        for _ in 0..20 {
            let out = sample_without_replacement(&atoms, &w, &plan, &mut rng, 1).unwrap();
            let hit = out.combination.atom_indices.contains(&3);
            let expect = if hit { (10.0 / 4.0 - 1.0f64).abs() } else { 1.0 };
            assert!((out.weight_error - expect).abs() < 1e-15);
        }
    }
}
