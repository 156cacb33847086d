use sfkit_core::geometry::{convex_hull_2d, minkowski_average, HullPolygon, PointSet};

use super::{same_set, SetList};
use crate::cli::{Ctx, HullArgs, MinkowskiArgs};
use crate::error::CliError;
use crate::io::{read_json, sibling, Table};
use crate::svg::Panel;

pub fn minkowski(args: &MinkowskiArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    let sets = read_json::<SetList>(&args.input)?.into_vec();
    for s in &sets {
        s.validate()?;
    }
    let avg = minkowski_average(&sets, args.cap, ctx.seed)?;

    ctx.write_csv(&args.out, &points_table(&avg))?;
    ctx.write_json(&sibling(&args.out, ".json"), &avg)?;
    let hull = if avg.dim == 2 {
        Some(convex_hull_2d(&avg)?)
    } else {
        None
    };
    if let (true, Some(h)) = (args.svg, &hull) {
        let title = format!("average of {} sets", sets.len());
        ctx.write_svg(
            &sibling(&args.out, ".svg"),
            &Panel {
                title: &title,
                points: &avg.points,
                hull: Some(&h.vertices),
                window: None,
            },
        )?;
    }

    ctx.checks.require(
        "cardinality_within_cap",
        avg.len() <= args.cap,
        format!("{} points, cap {}", avg.len(), args.cap),
    );
    if sets.len() == 1 && sets[0].len() <= args.cap {
        ctx.checks.require(
            "single_set_identity",
            same_set(&avg.points, &sets[0].points),
            "average of one set equals the set",
        );
    }
    Ok(())
}

pub fn hull(args: &HullArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    let set: PointSet = read_json(&args.input)?;
    set.validate()?;
    if set.dim != 2 {
        return Err(CliError::Parse(format!("hull needs dim = 2, got {}", set.dim)));
    }
    let h = convex_hull_2d(&set)?;
    let mut t = Table::new(["x", "y"]);
    for v in &h.vertices {
        t.push_floats(v);
    }
    ctx.write_csv(&args.out, &t)?;
    ctx.write_json(&sibling(&args.out, ".json"), &h)?;
    if args.svg {
        ctx.write_svg(
            &sibling(&args.out, ".svg"),
            &Panel {
                title: &set.label,
                points: &set.points,
                hull: Some(&h.vertices),
                window: None,
            },
        )?;
    }

    let outside = set
        .points
        .iter()
        .filter(|p| !h.contains([p[0], p[1]], 1e-9))
        .count();
    ctx.checks
        .require("input_inside_hull", outside == 0, format!("{outside} points outside"));
    ctx.checks.require(
        "strictly_convex_ccw",
        strictly_convex(&h),
        format!("{} vertices", h.vertices.len()),
    );
    Ok(())
}

fn strictly_convex(h: &HullPolygon) -> bool {
    let v = &h.vertices;
    if v.len() < 3 {
        return true;
    }
    (0..v.len()).all(|i| {
        let (a, b, c) = (v[i], v[(i + 1) % v.len()], v[(i + 2) % v.len()]);
        (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]) > 0.0
    })
}

pub(crate) fn points_table(set: &PointSet) -> Table {
    let mut t = Table::new((0..set.dim).map(|k| format!("x{k}")));
    for p in &set.points {
        t.push_floats(p);
    }
    t
}
