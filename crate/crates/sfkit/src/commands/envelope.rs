use serde::Serialize;
use sfkit_core::envelope::{biconjugate, nonconvexity_report, SampledFunction};

use crate::cli::{Ctx, EnvelopeArgs};
use crate::error::CliError;
use crate::io::{fmt_f64, read_json, sibling, Table};

#[derive(Serialize)]
struct Summary {
    dim: usize,
    points: usize,
    rho: f64,
    rho_argmax: Vec<f64>,
    /// `(k, rho_k)` pairs.
    rho_k: Vec<(usize, f64)>,
    breakpoints: Vec<Vec<f64>>,
    breakpoint_values: Vec<f64>,
}

pub fn run(args: &EnvelopeArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    let f: SampledFunction = read_json(&args.input)?;
    f.validate()?;
    let env = biconjugate(&f)?;
    let ks: Vec<usize> = (1..=args.rho_k.unwrap_or(0)).collect();
    let report = nonconvexity_report(&f, &ks)?;

    let mut header: Vec<String> = (0..f.dim).map(|k| format!("x{k}")).collect();
    header.extend(["f", "envelope", "gap"].map(String::from));
    let mut t = Table::new(header);
    for ((x, v), e) in f.grid.iter().zip(&f.values).zip(&env.grid_values) {
        let mut row: Vec<String> = x.iter().map(|c| fmt_f64(*c)).collect();
        row.extend([fmt_f64(*v), fmt_f64(*e), fmt_f64(v - e)]);
        t.push(row);
    }
    ctx.write_csv(&args.out, &t)?;
    let summary = Summary {
        dim: f.dim,
        points: f.len(),
        rho: report.rho,
        rho_argmax: report.argmax.clone(),
        rho_k: report.rho_k.iter().map(|(k, v)| (*k, *v)).collect(),
        breakpoints: env.breakpoints.clone(),
        breakpoint_values: env.breakpoint_values.clone(),
    };
    ctx.write_json(&sibling(&args.out, ".json"), &summary)?;

    let below = f.values.iter().zip(&env.grid_values).all(|(v, e)| *e <= v + 1e-9);
    ctx.checks.require("envelope_below_f", below, "f** <= f on the grid");
    ctx.checks
        .require("rho_nonnegative", report.rho >= 0.0, format!("rho = {}", report.rho));
    if !ks.is_empty() {
        let vals: Vec<f64> = report.rho_k.values().copied().collect();
        ctx.checks.require("rho_1_zero", vals[0] == 0.0, format!("rho_1 = {}", vals[0]));
        let mono = vals.windows(2).all(|w| w[1] >= w[0] - 1e-12);
        let capped = vals.iter().all(|v| *v <= report.rho + 1e-9);
        ctx.checks.require(
            "rho_k_nondecreasing_and_capped",
            mono && capped,
            "rho_k nondecreasing and <= rho",
        );
        if let Some(v) = report.rho_k.get(&(f.dim + 1)) {
            ctx.checks.require(
                "rho_d_plus_1_equals_rho",
                (v - report.rho).abs() <= 1e-9 * (1.0 + report.rho.abs()),
                format!("rho_{} = {v}, rho = {}", f.dim + 1, report.rho),
            );
        }
    }
    Ok(())
}
