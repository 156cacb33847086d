use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn sfkit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfkit"))
        .args(args)
        .current_dir(dir)
        .env_remove("SFKIT_SEED")
        .output()
        .expect("binary runs")
}

fn put(dir: &Path, name: &str, v: &Value) {
    fs::write(dir.join(name), serde_json::to_vec(v).unwrap()).unwrap();
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn help_lists_every_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let o = sfkit(dir.path(), &["--help"]);
    let text = String::from_utf8(o.stdout).unwrap();
    for cmd in [
        "minkowski",
        "hull",
        "envelope",
        "caratheodory",
        "sf",
        "solve",
        "concentration",
        "constraints",
        "figure1",
    ] {
        assert!(text.contains(cmd), "{cmd} missing from --help");
    }
}

#[test]
fn minkowski_of_one_set_is_the_set() {
    let dir = tempfile::tempdir().unwrap();
    put(dir.path(), "s.json", &json!([{"label": "a", "dim": 2, "points": [[0, 0], [1, 0]]}]));
    let o = sfkit(dir.path(), &["minkowski", "--in", "s.json", "--cap", "10", "--svg"]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(dir.path().join("minkowski.csv")).unwrap(), "x0,x1\n0.0,0.0\n1.0,0.0\n");
    let m = read_json(&dir.path().join("minkowski.manifest.json"));
    assert_eq!(m["passed"], true);
    assert_eq!(m["outputs"], json!(["minkowski.csv", "minkowski.json", "minkowski.svg"]));
}

#[test]
fn minkowski_average_of_binary_sets() {
    let dir = tempfile::tempdir().unwrap();
    let s = json!({"label": "b", "dim": 1, "points": [[0], [1]]});
    put(dir.path(), "s.json", &json!([s, s]));
    assert_eq!(code(&sfkit(dir.path(), &["minkowski", "--in", "s.json", "--out", "avg.csv"])), 0);
    assert_eq!(fs::read_to_string(dir.path().join("avg.csv")).unwrap(), "x0\n0.0\n0.5\n1.0\n");
}

#[test]
fn hull_of_square_with_center() {
    let dir = tempfile::tempdir().unwrap();
    put(
        dir.path(),
        "sq.json",
        &json!({"label": "sq", "dim": 2, "points": [[1, 1], [0, 0], [0.5, 0.5], [1, 0], [0, 1]]}),
    );
    assert_eq!(code(&sfkit(dir.path(), &["hull", "--in", "sq.json"])), 0);
    assert_eq!(
        fs::read_to_string(dir.path().join("hull.csv")).unwrap(),
        "x,y\n0.0,0.0\n1.0,0.0\n1.0,1.0\n0.0,1.0\n"
    );
}

#[test]
fn envelope_of_sqrt_abs() {
    let dir = tempfile::tempdir().unwrap();
    let xs: Vec<f64> = (0..201).map(|i| -1.0 + 2.0 * i as f64 / 200.0).collect();
    let grid: Vec<Vec<f64>> = xs.iter().map(|x| vec![*x]).collect();
    let vals: Vec<f64> = xs.iter().map(|x| x.abs().sqrt()).collect();
    put(dir.path(), "f.json", &json!({"dim": 1, "grid": grid, "values": vals}));
    let o = sfkit(dir.path(), &["envelope", "--in", "f.json", "--out", "env.csv", "--rho-k", "3"]);
    assert_eq!(code(&o), 0);
    let s = read_json(&dir.path().join("env.json"));
    assert!((s["rho"].as_f64().unwrap() - 0.25).abs() <= 0.01);
    assert_eq!(s["rho_k"][0], json!([1, 0.0]));
    let csv = fs::read_to_string(dir.path().join("env.csv")).unwrap();
    assert!(csv.starts_with("x0,f,envelope,gap\n"));
    assert_eq!(csv.lines().count(), 202);
}

#[test]
fn caratheodory_modes_report_support() {
    let dir = tempfile::tempdir().unwrap();
    put(dir.path(), "atoms.json", &json!([[1, 0], [0, 1], [1, 1], [0.5, 0.2], [0.3, 0.9], [0.1, 0.1]]));
    for (mode, limit) in [("exact", 2), ("convex", 3), ("fw", 6), ("sample", 6)] {
        let out = format!("{mode}.json");
        let o = sfkit(
            dir.path(),
            &["caratheodory", "--mode", mode, "--atoms", "atoms.json", "--eps", "0.3", "--seed", "7", "--out", &out],
        );
        assert_eq!(code(&o), 0, "{mode}: {}", String::from_utf8_lossy(&o.stderr));
        let r = read_json(&dir.path().join(&out));
        assert!(r["indices"].as_array().unwrap().len() <= limit);
        assert_eq!(r["indices"].as_array().unwrap().len(), r["weights"].as_array().unwrap().len());
        assert!(r["error"].as_f64().unwrap() <= 0.3);
        assert!(r["m"].as_u64().is_some());
    }
}

#[test]
fn sf_exact_and_approx() {
    let dir = tempfile::tempdir().unwrap();
    put(
        dir.path(),
        "fam.json",
        &json!({
            "dim": 1,
            "blocks": [[[0], [1]], [[0], [1]], [[0], [1]]],
            "weights": [[0.5, 0.5], [0.5, 0.5], [0.5, 0.5]]
        }),
    );
    assert_eq!(code(&sfkit(dir.path(), &["sf", "--family", "fam.json"])), 0);
    let r = read_json(&dir.path().join("sf.json"));
    assert!(r["report"]["mixed_blocks"].as_u64().unwrap() <= 1);
    assert!(r["report"]["error"].as_f64().unwrap() <= 1e-12);

    let o = sfkit(dir.path(), &["sf", "--family", "fam.json", "--approx", "--eps", "0.5", "--out", "a.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_json(&dir.path().join("a.json"))["approx"], true);
}

fn convex_problem() -> Value {
    let f = json!({"dim": 1, "grid": [[-1], [0], [1]], "values": [1, 0, 1]});
    json!({"blocks": [f, f, f], "A": [[1, 1, 1]], "b": [5]})
}

#[test]
fn solve_convex_instance_has_zero_gap() {
    let dir = tempfile::tempdir().unwrap();
    put(dir.path(), "p.json", &convex_problem());
    for cert in ["basic", "refined", "approx"] {
        let o = sfkit(dir.path(), &["solve", "--in", "p.json", "--cert", cert, "--gamma", "0.5"]);
        assert_eq!(code(&o), 0, "{cert}: {}", String::from_utf8_lossy(&o.stderr));
        let r = read_json(&dir.path().join("certificate.json"));
        assert_eq!(r["certificate"]["lower"], r["certificate"]["upper"]);
        assert_eq!(r["bound"].as_f64().unwrap(), 0.0);
        let csv = fs::read_to_string(dir.path().join("certificate.csv")).unwrap();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.lines().nth(1).unwrap().starts_with(cert));
    }
}

#[test]
fn failed_check_exits_one_and_still_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    // Two-point grids have rho = 0, yet picking at most two of four items keeps a gap.
    let f = json!({"dim": 1, "grid": [[0], [1]], "values": [0, -1]});
    put(dir.path(), "p.json", &json!({"blocks": [f, f, f, f], "A": [[1, 1, 1, 1]], "b": [2.5]}));
    let o = sfkit(dir.path(), &["solve", "--in", "p.json", "--cert", "basic"]);
    assert_eq!(code(&o), 1);
    let m = read_json(&dir.path().join("certificate.manifest.json"));
    assert_eq!(m["passed"], false);
    assert_eq!(m["exit_code"], 1);
    let failed: Vec<&str> = m["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["optimum_within_bound"]);
}

#[test]
fn malformed_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.json"), "{\"dim\": 1").unwrap();
    let o = sfkit(dir.path(), &["envelope", "--in", "bad.json"]);
    assert_eq!(code(&o), 2);
    let m = read_json(&dir.path().join("envelope.manifest.json"));
    assert_eq!(m["exit_code"], 2);
    assert!(m["error"].as_str().unwrap().contains("bad.json"));
    assert_eq!(code(&sfkit(dir.path(), &["envelope", "--in", "missing.json"])), 2);
    // Shape errors caught by validation are input errors too.
    put(dir.path(), "ragged.json", &json!({"dim": 1, "grid": [[0], [1]], "values": [0]}));
    assert_eq!(code(&sfkit(dir.path(), &["envelope", "--in", "ragged.json"])), 2);
}

#[test]
fn unwritable_output_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    put(dir.path(), "s.json", &json!({"label": "a", "dim": 2, "points": [[0, 0]]}));
    fs::write(dir.path().join("blocker"), "").unwrap();
    let o = sfkit(
        dir.path(),
        &["hull", "--in", "s.json", "--out", "blocker/h.csv", "--manifest", "m.json"],
    );
    assert_eq!(code(&o), 3);
    assert_eq!(read_json(&dir.path().join("m.json"))["exit_code"], 3);
}

#[test]
fn seed_comes_from_env_unless_given() {
    let dir = tempfile::tempdir().unwrap();
    put(dir.path(), "s.json", &json!({"label": "a", "dim": 2, "points": [[0, 0]]}));
    let bin = env!("CARGO_BIN_EXE_sfkit");
    let run = |extra: &[&str]| {
        Command::new(bin)
            .args(["hull", "--in", "s.json"])
            .args(extra)
            .current_dir(dir.path())
            .env("SFKIT_SEED", "41")
            .status()
            .unwrap();
        read_json(&dir.path().join("hull.manifest.json"))["seed"].clone()
    };
    assert_eq!(run(&[]), 41);
    assert_eq!(run(&["--seed", "5"]), 5);
    assert_eq!(code(&sfkit(dir.path(), &["hull", "--in", "s.json"])), 0);
    assert_eq!(read_json(&dir.path().join("hull.manifest.json"))["seed"], 0);
}

#[test]
fn concentration_on_two_clusters() {
    let dir = tempfile::tempdir().unwrap();
    let pop: Vec<f64> = (0..60).map(|i| if i % 2 == 0 { 0.8 } else { -0.8 } + 0.01 * (i % 7) as f64).collect();
    put(dir.path(), "pop.json", &json!(pop));
    let o = sfkit(
        dir.path(),
        &["concentration", "--pop", "pop.json", "--m", "30", "--eps", "0.05,0.1,0.2", "--trials", "4000", "--seed", "3"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("concentration.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    for col in ["bound_hs", "bound_bs", "empirical", "sigma_m"] {
        assert!(header.contains(&col));
    }
    assert_eq!(lines.count(), 3);
}

#[test]
fn constraints_report_rows_per_k() {
    let dir = tempfile::tempdir().unwrap();
    // The box corner (-1, -1, -1) is cut off by three planes.
    put(
        dir.path(),
        "lp.json",
        &json!({
            "c": [1, 1, 1],
            "A": [[-1, 0, 0], [0, -1, 0], [0, 0, -1], [-1, -1, -1]],
            "b": [0.5, 0.5, 0.5, 2.0],
            "box_radius": 1.0
        }),
    );
    let o = sfkit(dir.path(), &["constraints", "--lp", "lp.json", "--k", "2,4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("constraints.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][0], "4");
    // All four rows: bound zero and no slack.
    assert_eq!(rows[1][8], "0.0");
    assert!(rows[1][13].parse::<f64>().unwrap().abs() < 1e-9);
}

#[test]
fn figure1_panels_and_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let o = sfkit(dir.path(), &["figure1", "--n-list", "1", "--out", "one", "--deterministic"]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(dir.path().join("one/figure1.csv")).unwrap();
    let dh: f64 = csv.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    // (1/2, 1/2) is on the l_1 sphere; the l_1/2 sphere passes through (1/4, 1/4).
    assert!((dh - 0.5f64.sqrt() / 2.0).abs() < 1e-12);
    assert!(dir.path().join("one/figure1_n1.svg").exists());

    let o = sfkit(dir.path(), &["figure1", "--n-list", "1,2,10", "--out", "three", "--deterministic"]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(dir.path().join("three/figure1.csv")).unwrap();
    let d: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(d[2] < d[1] && d[1] < d[0]);
    let svgs = fs::read_dir(dir.path().join("three"))
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "svg"))
        .count();
    assert_eq!(svgs, 3);
    let svg = fs::read_to_string(dir.path().join("three/figure1_n2.svg")).unwrap();
    assert!(!svg.contains("unix time"));
}

#[test]
fn figure1_with_uploaded_sets() {
    let dir = tempfile::tempdir().unwrap();
    let sets: Vec<Value> = (0..5)
        .map(|k| {
            let pts: Vec<[f64; 2]> = (0..6).map(|i| [i as f64, ((i * (k + 1)) % 5) as f64]).collect();
            json!({"label": format!("digit{k}"), "dim": 2, "points": pts})
        })
        .collect();
    put(dir.path(), "digits.json", &json!(sets));
    let o = sfkit(dir.path(), &["figure1", "--sets", "digits.json", "--out", "fig"]);
    assert_eq!(code(&o), 0);
    let svgs: Vec<_> = fs::read_dir(dir.path().join("fig"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".svg"))
        .collect();
    assert_eq!(svgs, ["figure1_sets.svg"]);
}

#[test]
fn shipped_schemas_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas");
    let mut count = 0;
    for e in fs::read_dir(dir).unwrap() {
        let v = read_json(&e.unwrap().path());
        assert!(v["$schema"].as_str().unwrap().contains("json-schema.org"));
        count += 1;
    }
    assert!(count >= 8);
}
