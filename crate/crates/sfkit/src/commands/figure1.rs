use sfkit_core::geometry::{convex_hull_2d, hausdorff_distance, l1_ball_lattice, l_half_sphere, minkowski_average};

use super::SetList;
use crate::cli::{Ctx, Figure1Args};
use crate::error::CliError;
use crate::io::{fmt_f64, read_json, Table};
use crate::svg::Panel;

pub fn run(args: &Figure1Args, ctx: &mut Ctx) -> Result<(), CliError> {
    if let Some(path) = &args.sets {
        return user_sets(args, path, ctx);
    }
    if args.n_list.is_empty() || args.n_list.contains(&0) {
        return Err(CliError::Parse("n-list must hold positive integers".into()));
    }
    if args.samples < 4 || args.lattice == 0 {
        return Err(CliError::Parse("need samples >= 4 and lattice >= 1".into()));
    }
    let sphere = l_half_sphere(args.samples);
    let ball = l1_ball_lattice(args.lattice);
    let mut t = Table::new(["n", "d_h", "points", "hull_vertices"]);
    let mut dh = Vec::with_capacity(args.n_list.len());
    for &n in &args.n_list {
        let copies = vec![sphere.clone(); n];
        let avg = minkowski_average(&copies, args.cap, ctx.seed)?;
        let d = hausdorff_distance(&avg, &ball)?;
        let hull = convex_hull_2d(&avg)?;
        t.push(vec![
            n.to_string(),
            fmt_f64(d),
            avg.len().to_string(),
            hull.vertices.len().to_string(),
        ]);
        let title = format!("average of {n} l_1/2 spheres, d_H = {d:.4}");
        ctx.write_svg(
            &args.out.join(format!("figure1_n{n}.svg")),
            &Panel {
                title: &title,
                points: &avg.points,
                hull: Some(&hull.vertices),
                window: Some((-1.1, 1.1)),
            },
        )?;
        dh.push((n, d));
    }
    ctx.write_csv(&args.out.join("figure1.csv"), &t)?;

    let mut sorted = dh.clone();
    sorted.sort_by_key(|p| p.0);
    let nonincreasing = sorted.windows(2).all(|w| w[1].1 <= w[0].1);
    let strict = sorted.windows(2).all(|w| w[1].1 < w[0].1 || w[1].0 == w[0].0);
    let detail = sorted
        .iter()
        .map(|(n, d)| format!("d_H({n}) = {d:.6}"))
        .collect::<Vec<_>>()
        .join(", ");
    ctx.checks.require("d_h_nonincreasing", nonincreasing, detail.clone());
    ctx.checks.inform("d_h_strictly_decreasing", strict, detail);
    if let (Some(first), Some(last)) = (sorted.first(), sorted.last()) {
        if last.0 > first.0 {
            ctx.checks.inform(
                "d_h_halved",
                last.1 < first.1 / 2.0,
                format!("d_H({}) = {} vs d_H({}) / 2 = {}", last.0, last.1, first.0, first.1 / 2.0),
            );
        }
    }
    Ok(())
}

/// One panel: the average of the uploaded sets.
fn user_sets(args: &Figure1Args, path: &std::path::Path, ctx: &mut Ctx) -> Result<(), CliError> {
    let sets = read_json::<SetList>(path)?.into_vec();
    for s in &sets {
        s.validate()?;
        if s.dim != 2 {
            return Err(CliError::Parse(format!("set '{}' is not 2-D", s.label)));
        }
    }
    let avg = minkowski_average(&sets, args.cap, ctx.seed)?;
    let hull = convex_hull_2d(&avg)?;
    let title = format!("average of {} sets", sets.len());
    ctx.write_svg(
        &args.out.join("figure1_sets.svg"),
        &Panel {
            title: &title,
            points: &avg.points,
            hull: Some(&hull.vertices),
            window: None,
        },
    )?;
    let mut t = Table::new(["n", "points", "hull_vertices"]);
    t.push(vec![
        sets.len().to_string(),
        avg.len().to_string(),
        hull.vertices.len().to_string(),
    ]);
    ctx.write_csv(&args.out.join("figure1.csv"), &t)?;
    ctx.checks.require(
        "cardinality_within_cap",
        avg.len() <= args.cap,
        format!("{} points", avg.len()),
    );
    Ok(())
}
