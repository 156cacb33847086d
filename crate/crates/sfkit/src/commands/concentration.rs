use sfkit_core::caratheodory::NormSpec;
use sfkit_core::sampling_bounds::{
    bennett_serfling_tail, empirical_tail, hoeffding_serfling_tail, required_sampling_ratio, sigma_m, SigmaMode,
    TailBoundParams, SIGMA_EXACT_MAX_N,
};

use super::Vectors;
use crate::cli::{ConcentrationArgs, Ctx, SigmaArg};
use crate::error::CliError;
use crate::io::{fmt_f64, read_json, Table};

pub fn run(args: &ConcentrationArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    let pop = read_json::<Vectors>(&args.pop)?.into_rows();
    let n = pop.len();
    if args.m == 0 || args.m > n {
        return Err(CliError::Parse(format!("need 1 <= m <= N, got m = {}, N = {n}", args.m)));
    }
    if args.eps.is_empty() {
        return Err(CliError::Parse("no eps values".into()));
    }
    let norm = NormSpec::L2;
    let mode = match args.sigma {
        SigmaArg::Auto if n <= SIGMA_EXACT_MAX_N => SigmaMode::Exact,
        SigmaArg::Auto | SigmaArg::Upper => SigmaMode::UpperBound,
        SigmaArg::Exact => SigmaMode::Exact,
        SigmaArg::Mc => SigmaMode::MonteCarlo {
            trials: args.sigma_trials,
            seed: ctx.seed,
        },
    };
    // Nothing is left to vary once the whole population is drawn.
    let (sigma, lower_estimate) = if args.m == n {
        (0.0, false)
    } else {
        let s = sigma_m(&pop, args.m, norm, mode)?;
        (s.value, s.lower_estimate)
    };
    let mode_name = match mode {
        SigmaMode::Exact => "exact",
        SigmaMode::MonteCarlo { .. } => "mc",
        SigmaMode::UpperBound => "upper",
    };

    let mut t = Table::new([
        "N",
        "m",
        "eps",
        "sigma_m",
        "sigma_mode",
        "bound_hs",
        "bound_bs",
        "empirical",
        "mc_stderr",
        "required_m",
        "required_attainable",
    ]);
    for (i, &eps) in args.eps.iter().enumerate() {
        let mut p = TailBoundParams::for_population(&pop, args.m, eps, norm, sigma)?;
        p.delta0 = args.delta0;
        p.validate()?;
        let hs = hoeffding_serfling_tail(&p)?;
        let bs = bennett_serfling_tail(&p)?;
        let emp = empirical_tail(&pop, args.m, eps, norm, args.trials, ctx.seed.wrapping_add(i as u64))?;
        let se = (emp * (1.0 - emp) / args.trials as f64).sqrt();
        let ratio = required_sampling_ratio(&p)?;
        t.push(vec![
            n.to_string(),
            args.m.to_string(),
            fmt_f64(eps),
            fmt_f64(sigma),
            mode_name.into(),
            fmt_f64(hs),
            fmt_f64(bs),
            fmt_f64(emp),
            fmt_f64(se),
            ratio.m.to_string(),
            ratio.attainable.to_string(),
        ]);
        ctx.checks.require(
            &format!("hoeffding_serfling_eps_{eps}"),
            emp <= hs + 3.0 * se,
            format!("empirical {emp} <= {hs} + 3 x {se}"),
        );
        let detail = format!("empirical {emp} <= {bs} + 3 x {se}");
        let name = format!("bennett_serfling_eps_{eps}");
        if lower_estimate {
            // A lower estimate of sigma_m does not give a valid bound.
            ctx.checks.inform(&name, emp <= bs + 3.0 * se, detail);
        } else {
            ctx.checks.require(&name, emp <= bs + 3.0 * se, detail);
        }
    }
    ctx.write_csv(&args.out, &t)
}
