use sfkit_core::sampling_bounds::{constraint_sampling_experiment, BoxedLp};

use crate::cli::{ConstraintsArgs, Ctx};
use crate::error::CliError;
use crate::io::{fmt_f64, read_json, Table};

const TOL: f64 = 1e-7;

pub fn run(args: &ConstraintsArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    let lp: BoxedLp = read_json(&args.lp)?;
    lp.validate()?;
    let mut t = Table::new([
        "k",
        "n_constraints",
        "dim",
        "optimum",
        "active",
        "diameter",
        "helly_m",
        "factor",
        "bound",
        "bound_active",
        "subsets",
        "exhaustive",
        "failed_subsets",
        "max_slack",
        "min_slack",
        "worst_case_holds",
        "best_case_holds",
    ]);
    for (i, &k) in args.k.iter().enumerate() {
        let r = constraint_sampling_experiment(&lp, k, args.trials, ctx.seed.wrapping_add(i as u64))?;
        let worst = r.worst_case_holds(TOL);
        let best = r.best_case_holds(TOL);
        t.push(vec![
            k.to_string(),
            lp.a.len().to_string(),
            lp.dim().to_string(),
            fmt_f64(r.optimum),
            r.active.to_string(),
            fmt_f64(r.diameter),
            r.bound.m.to_string(),
            fmt_f64(r.bound.factor),
            fmt_f64(r.bound.value),
            fmt_f64(r.bound_active.value),
            r.subsets.to_string(),
            r.exhaustive.to_string(),
            r.failed_subsets.to_string(),
            fmt_f64(r.max_slack),
            fmt_f64(r.min_slack),
            worst.to_string(),
            best.to_string(),
        ]);
        if k >= r.bound.m {
            ctx.checks.require(
                &format!("bound_zero_at_k_{k}"),
                r.bound.value == 0.0,
                format!("k = {k} >= m = {}", r.bound.m),
            );
        }
        ctx.checks.require(
            &format!("some_subset_within_bound_k_{k}"),
            best,
            format!("min slack {} <= bound {}", r.min_slack, r.bound.value),
        );
        // The bound is proven for some k-subset, not for every one.
        ctx.checks.inform(
            &format!("every_subset_within_bound_k_{k}"),
            worst,
            format!("max slack {} <= bound {}", r.max_slack, r.bound.value),
        );
    }
    ctx.write_csv(&args.out, &t)
}
