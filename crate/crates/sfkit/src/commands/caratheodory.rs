use serde::Serialize;
use sfkit_core::caratheodory::{
    fw_approx, radii, reduce_conic, reduce_convex, required_sample_size, sample_without_replacement,
    NormSpec, SamplingPlan, SamplingVariant,
};
use sfkit_core::math::{axpy, norm2};

use super::Vectors;
use crate::cli::{CaratheodoryArgs, CaratheodoryMode, Ctx, NormArg};
use crate::error::CliError;
use crate::io::read_json;

#[derive(Serialize)]
struct Output {
    mode: CaratheodoryMode,
    indices: Vec<usize>,
    weights: Vec<f64>,
    /// Distance from the target in the mode's norm.
    error: f64,
    /// Support size, or the sample size in sample mode.
    m: usize,
    target: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    budget: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weight_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    attempts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    plan: Option<SamplingPlan>,
}

pub fn run(args: &CaratheodoryArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    let atoms = read_json::<Vectors>(&args.atoms)?.into_rows();
    let weights: Vec<f64> = match &args.weights {
        Some(p) => read_json(p)?,
        None => vec![1.0 / atoms.len().max(1) as f64; atoms.len()],
    };
    if atoms.is_empty() {
        return Err(CliError::Parse("no atoms".into()));
    }
    if weights.len() != atoms.len() {
        return Err(CliError::Parse(format!(
            "{} weights for {} atoms",
            weights.len(),
            atoms.len()
        )));
    }
    let dim = atoms[0].len();
    let mut target = vec![0.0; dim];
    for (a, w) in atoms.iter().zip(&weights) {
        if a.len() != dim {
            return Err(CliError::Parse("atoms differ in length".into()));
        }
        axpy(&mut target, *w, a);
    }
    let tol = 1e-8 * (1.0 + norm2(&target));

    let out = match args.mode {
        CaratheodoryMode::Exact | CaratheodoryMode::Convex => {
            let convex = matches!(args.mode, CaratheodoryMode::Convex);
            let c = if convex {
                reduce_convex(&atoms, &weights)?
            } else {
                reduce_conic(&atoms, &weights)?
            };
            let err = norm2(&sfkit_core::math::sub(&c.combine(&atoms), &target));
            let limit = if convex { dim + 1 } else { dim };
            ctx.checks.require(
                "support_bound",
                c.support() <= limit,
                format!("support {} <= {limit}", c.support()),
            );
            ctx.checks.require("reconstruction", err <= tol, format!("error {err:e}"));
            if convex {
                let s = c.weight_sum();
                ctx.checks
                    .require("weights_on_simplex", (s - 1.0).abs() <= 1e-10, format!("sum {s}"));
            }
            Output {
                mode: args.mode,
                m: c.support(),
                indices: c.atom_indices,
                weights: c.weights,
                error: err,
                target,
                budget: None,
                weight_error: None,
                attempts: None,
                plan: None,
            }
        }
        CaratheodoryMode::Fw => {
            let r = fw_approx(&target, &atoms, args.eps, args.p)?;
            ctx.checks
                .require("within_eps", r.error <= args.eps, format!("error {} <= {}", r.error, args.eps));
            ctx.checks.require(
                "within_budget",
                r.combination.support() <= r.budget,
                format!("{} atoms, budget {}", r.combination.support(), r.budget),
            );
            Output {
                mode: args.mode,
                m: r.combination.support(),
                indices: r.combination.atom_indices,
                weights: r.combination.weights,
                error: r.error,
                target,
                budget: Some(r.budget),
                weight_error: None,
                attempts: None,
                plan: None,
            }
        }
        CaratheodoryMode::Sample => {
            let variant = match args.norm {
                NormArg::Linf => SamplingVariant::Linf,
                other => SamplingVariant::Banach {
                    norm: other.spec(args.lp_p),
                    c: args.c,
                },
            };
            let norm: NormSpec = variant.norm();
            let (rv, rl) = radii(&atoms, &weights, norm);
            let plan = required_sample_size(atoms.len(), dim, args.eps, rv, rl, variant)?;
            let mut rng = sfkit_core::rng_from_seed(ctx.seed);
            let s = sample_without_replacement(&atoms, &weights, &plan, &mut rng, args.retries)?;
            ctx.checks.require(
                "within_eps",
                s.within_tolerance,
                format!(
                    "x error {}, weight error {}, eps {} after {} draws",
                    s.x_error, s.weight_error, args.eps, s.attempts
                ),
            );
            Output {
                mode: args.mode,
                m: plan.m,
                indices: s.combination.atom_indices,
                weights: s.combination.weights,
                error: s.x_error,
                target,
                budget: None,
                weight_error: Some(s.weight_error),
                attempts: Some(s.attempts),
                plan: Some(plan),
            }
        }
    };
    ctx.write_json(&args.out, &out)
}
