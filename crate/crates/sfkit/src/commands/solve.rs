use serde::Serialize;
use sfkit_core::relaxation::{
    brute_force, certificate, gap_bound_approx, gap_bound_refined, perturbed_value, purify, solve_relaxation,
    ApproxOptions, GapCertificate, Perturbed, Purification, RelaxationSolution, SeparableProblem,
};
use sfkit_core::Error;

use crate::cli::{CertKind, Ctx, SolveArgs};
use crate::error::CliError;
use crate::io::{fmt_f64, read_json, sibling, Table};

const TOL: f64 = 1e-6;

#[derive(Serialize)]
struct BruteForce {
    value: Option<f64>,
    choice: Option<Vec<usize>>,
}

#[derive(Serialize)]
struct PerturbedValues {
    /// `h_CoP(u2)`.
    cop: f64,
    /// `h_P(u2)`, absent when enumeration is too large.
    p: Option<f64>,
}

#[derive(Serialize)]
struct Output {
    cert: CertKind,
    /// The bound selected by `cert`.
    bound: f64,
    certificate: GapCertificate,
    purified: Purification,
    relaxation: RelaxationSolution,
    /// Absent when skipped or too large to enumerate.
    brute_force: Option<BruteForce>,
    perturbed: Option<PerturbedValues>,
}

pub fn run(args: &SolveArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    let p: SeparableProblem = read_json(&args.input)?;
    p.validate()?;
    let sol = solve_relaxation(&p)?;
    let mut cert = match args.cert {
        CertKind::Approx => {
            let opts = ApproxOptions {
                c: args.c,
                max_attempts: args.retries,
            };
            gap_bound_approx(&p, &sol, args.gamma, ctx.seed, &opts)?
        }
        _ => certificate(&p, &sol)?,
    };
    if let Some(budget) = args.budget {
        let r = gap_bound_refined(&p, &sol, budget)?;
        cert.bound_refined = r.value;
        cert.refined_budget = r.budget;
        cert.refined_fallback_blocks = r.fallback_blocks;
    }
    let bound = match args.cert {
        CertKind::Basic => cert.bound_basic,
        CertKind::Refined => cert.bound_refined,
        CertKind::Approx => cert.approx.as_ref().map_or(f64::NAN, |a| a.gap),
    };

    let brute = if args.no_brute_force {
        None
    } else {
        match brute_force(&p) {
            Ok(r) => Some(BruteForce {
                value: r.as_ref().map(|x| x.0),
                choice: r.map(|x| x.1),
            }),
            Err(Error::BudgetExceeded { .. }) => None,
            Err(e) => return Err(e.into()),
        }
    };
    let perturbed = match &cert.approx {
        Some(a) => {
            let cop = perturbed_value(&p, &a.u2_full, Perturbed::CoP)?;
            let hp = match perturbed_value(&p, &a.u2_full, Perturbed::P) {
                Ok(v) => Some(v),
                Err(Error::BudgetExceeded { .. }) => None,
                Err(e) => return Err(e.into()),
            };
            Some(PerturbedValues { cop, p: hp })
        }
        None => None,
    };

    let checks = &mut ctx.checks;
    checks.require(
        "relaxation_feasible",
        sol.max_violation <= 1e-8,
        format!("max violation {:e}", sol.max_violation),
    );
    checks.require(
        "complementary_slackness",
        sol.complementarity <= TOL,
        format!("residual {:e}", sol.complementarity),
    );
    checks.require(
        "refined_le_basic",
        cert.bound_refined <= cert.bound_basic + TOL,
        format!("refined {} basic {}", cert.bound_refined, cert.bound_basic),
    );
    if cert.upper_feasible {
        checks.require(
            "lower_le_upper",
            cert.lower <= cert.upper + TOL,
            format!("lower {} upper {}", cert.lower, cert.upper),
        );
    }
    if let Some(BruteForce { value: Some(v), .. }) = &brute {
        checks.require(
            "relaxation_below_optimum",
            cert.lower <= v + TOL,
            format!("CoP {} P {v}", cert.lower),
        );
        checks.require(
            "optimum_within_bound",
            *v <= cert.lower + bound + TOL,
            format!("P {v} <= CoP {} + bound {bound}", cert.lower),
        );
    }
    if let (Some(a), Some(h)) = (&cert.approx, &perturbed) {
        checks.require(
            "perturbation_within_bound",
            !a.bound_violated,
            format!("|u| {} <= {} after {} draws", a.u_norm, a.u_bound, a.attempts),
        );
        if let Some(hp) = h.p {
            checks.require(
                "perturbed_relaxation_below",
                h.cop <= hp + TOL,
                format!("h_CoP(u) {} h_P(u) {hp}", h.cop),
            );
            checks.require(
                "perturbed_within_gap",
                hp <= cert.lower + a.gap + TOL,
                format!("h_P(u) {hp} <= h_CoP(0) {} + gap {}", cert.lower, a.gap),
            );
        }
    }

    let mut t = Table::new([
        "cert", "n", "m", "m_tilde", "lower", "upper", "upper_feasible", "bound_basic", "bound_refined",
        "bound", "brute_force", "observed_gap",
    ]);
    let bf = brute.as_ref().and_then(|b| b.value).map(fmt_f64).unwrap_or_default();
    t.push(vec![
        format!("{:?}", args.cert).to_lowercase(),
        cert.n.to_string(),
        cert.m.to_string(),
        cert.m_tilde.to_string(),
        fmt_f64(cert.lower),
        fmt_f64(cert.upper),
        cert.upper_feasible.to_string(),
        fmt_f64(cert.bound_basic),
        fmt_f64(cert.bound_refined),
        fmt_f64(bound),
        bf,
        fmt_f64(cert.observed_gap()),
    ]);
    let purified = purify(&p, &sol)?;
    let out = Output {
        cert: args.cert,
        bound,
        certificate: cert,
        purified,
        relaxation: sol,
        brute_force: brute,
        perturbed,
    };
    ctx.write_json(&args.out, &out)?;
    ctx.write_csv(&sibling(&args.out, ".csv"), &t)
}
