use serde::Serialize;
use sfkit_core::shapley_folkman::{approx_sf_decompose, sf_decompose, ApproxSFParams, ApproxSFResult, BlockFamily, SFDecomposition};

use crate::cli::{Ctx, SfArgs};
use crate::error::CliError;
use crate::io::read_json;

#[derive(Serialize)]
struct Report {
    n: usize,
    dim: usize,
    mixed_blocks: usize,
    error: f64,
    nonzeros: usize,
}

#[derive(Serialize)]
#[serde(untagged)]
enum Decomposition {
    Exact(SFDecomposition),
    Approx(ApproxSFResult),
}

#[derive(Serialize)]
struct Output {
    approx: bool,
    decomposition: Decomposition,
    report: Report,
}

pub fn run(args: &SfArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    let fam: BlockFamily = read_json(&args.family)?;
    fam.validate()?;
    let (n, d) = (fam.n(), fam.dim);
    let out = if args.approx {
        let mut params = ApproxSFParams::new(args.eps);
        params.norm = args.norm.spec(args.lp_p);
        params.c = args.c;
        params.max_attempts = args.retries;
        let r = approx_sf_decompose(&fam, &params, &mut sfkit_core::rng_from_seed(ctx.seed))?;
        let disjoint = r.s_set.iter().all(|i| !r.t_set.contains(i));
        ctx.checks.require(
            "error_within_bound",
            !r.bound_violated,
            format!(
                "x error {} <= {}, weight error {} <= {} after {} draws",
                r.x_error, r.x_error_bound, r.sum_error, r.sum_error_bound, r.attempts
            ),
        );
        ctx.checks
            .require("s_t_disjoint", disjoint, format!("|S| = {}, |T| = {}", r.s_set.len(), r.t_set.len()));
        ctx.checks.require("q_at_most_d", r.q <= d, format!("q = {}", r.q));
        let report = Report {
            n,
            dim: d,
            mixed_blocks: r.s_set.len(),
            error: r.x_error,
            nonzeros: r.sampled.values().map(Vec::len).sum::<usize>() + r.extremal.len(),
        };
        Output {
            approx: true,
            decomposition: Decomposition::Approx(r),
            report,
        }
    } else {
        let s = sf_decompose(&fam)?;
        let scale = 1.0 + sfkit_core::math::norm2(&s.x);
        ctx.checks.require(
            "mixed_at_most_d",
            s.mixed.len() <= d,
            format!("{} mixed blocks, d = {d}", s.mixed.len()),
        );
        ctx.checks
            .require("reconstruction", s.error <= 1e-8 * scale, format!("error {:e}", s.error));
        ctx.checks.require(
            "nonzeros_at_most_d_plus_n",
            s.nonzeros <= d + n,
            format!("{} nonzeros", s.nonzeros),
        );
        let report = Report {
            n,
            dim: d,
            mixed_blocks: s.mixed.len(),
            error: s.error,
            nonzeros: s.nonzeros,
        };
        Output {
            approx: false,
            decomposition: Decomposition::Exact(s),
            report,
        }
    };
    ctx.write_json(&args.out, &out)
}
