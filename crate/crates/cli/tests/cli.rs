use std::path::Path;
use std::process::{Command, Output};

use floorscope::synth::plant_topology;
use floorscope::topology::{complete, dominant_eight_eight};
use floorscope::TannerGraph;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

fn floorscope(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_floorscope"))
        .args(args)
        .env_remove("FLOORSCOPE_WORKERS")
        .env_remove("FLOORSCOPE_WORK_BOUND")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = floorscope(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_code(dir: &Path, name: &str, g: &TannerGraph) -> String {
    let p = dir.join(name);
    std::fs::write(&p, g.to_alist()).unwrap();
    p.to_str().unwrap().to_string()
}

fn totals(dir: &Path) -> Vec<(f64, f64)> {
    std::fs::read_to_string(dir.join("totals.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (f[0], f[1])
        })
        .collect()
}

#[test]
fn missing_input_is_a_usage_error() {
    let out = floorscope(&["search", "--alist", "/no/such/file.alist", "--max-a", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/file.alist"));
    assert_eq!(
        floorscope(&["search", "--max-a", "3"]).status.code(),
        Some(2)
    );
    assert_eq!(
        floorscope(&["estimate", "--ebno", "6:3:1"]).status.code(),
        Some(2)
    );
}

#[test]
fn search_finds_the_planted_set() {
    let tmp = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    // sparse enough that the filler holds no K5 of its own
    let p = plant_topology(&complete(5), 600, 6, 12, &mut rng, 200).unwrap();
    let alist = write_code(tmp.path(), "k5.alist", &p.graph);
    let out = tmp.path().join("run");
    ok(&[
        "search",
        "--alist",
        &alist,
        "--max-a",
        "5",
        "--out",
        path(&out),
    ]);
    let cat: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("catalog.json")).unwrap()).unwrap();
    let sets = cat.as_array().unwrap();
    assert_eq!(sets.len(), 1);
    let vars: Vec<usize> = serde_json::from_value(sets[0]["vars"].clone()).unwrap();
    assert_eq!(vars, p.set_vars);
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary, "a,b,class,multiplicity\n5,10,[4 4 4 4 4],1\n");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "search");
    assert_eq!(manifest["config"]["max_a"], 5);
    assert_eq!(manifest["code_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn estimate_is_reproducible_and_decreasing() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&["estimate", "--ebno", "3:6:0.25", "--out", path(&a)]);
    ok(&["estimate", "--ebno", "3:6:0.25", "--out", path(&b)]);
    for f in ["estimate.csv", "totals.csv"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let t = totals(&a);
    assert_eq!(t.len(), 13);
    assert!(t.windows(2).all(|w| w[1].1 < w[0].1));
}

#[test]
fn gains_lower_predicted_ber() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&["estimate", "--ebno", "5", "--out", path(&a)]);
    ok(&["estimate", "--ebno", "5", "--no-gains", "--out", path(&b)]);
    assert!(totals(&a)[0].1 <= totals(&b)[0].1);
}

#[test]
fn flags_override_config_file() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"ebno": "4:5:0.5", "iters": 10}"#).unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&["estimate", "--config", path(&cfg), "--out", path(&a)]);
    assert_eq!(
        totals(&a).iter().map(|t| t.0).collect::<Vec<_>>(),
        vec![4.0, 4.5, 5.0]
    );
    ok(&[
        "estimate",
        "--config",
        path(&cfg),
        "--ebno",
        "6",
        "--out",
        path(&b),
    ]);
    assert_eq!(totals(&b).len(), 1);
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(b.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["iters"], 10);
    assert_eq!(m["config"]["ebno"], "6");

    std::fs::write(&cfg, r#"{"ebnoo": "4"}"#).unwrap();
    assert_eq!(
        floorscope(&["estimate", "--config", path(&cfg)])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn families_from_a_search_catalog() {
    let tmp = TempDir::new().unwrap();
    let fams = tmp.path().join("fams.json");
    std::fs::write(
        &fams,
        r#"[{"vars": [0,1,2,3,4,5,6,7], "a": 8, "b": 8, "deg_profile": [], "unsat_checks": []},
            {"vars": [8,9,10,11,12,13,14,15], "a": 8, "b": 8, "deg_profile": [], "unsat_checks": []}]"#,
    )
    .unwrap();
    let out = tmp.path().join("o");
    ok(&["estimate", "--families", path(&fams), "--out", path(&out)]);
    let csv = std::fs::read_to_string(out.join("estimate.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("5,8,8,2,"));
}

#[test]
fn report_joins_sources() {
    let tmp = TempDir::new().unwrap();
    let est = tmp.path().join("est");
    ok(&["estimate", "--ebno", "3:4:0.5", "--out", path(&est)]);
    let est_json = est.join("estimate.json");

    let rep = tmp.path().join("rep");
    ok(&["report", "--analytic", path(&est_json), "--out", path(&rep)]);
    let csv = std::fs::read_to_string(rep.join("report.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "ebno_db,source,ber,fer,ber_std_error,fer_std_error"
    );
    assert_eq!(lines.len(), 4);
    assert!(lines[1..]
        .iter()
        .all(|l| l.split(',').nth(1) == Some("analytic")));

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let p = plant_topology(&dominant_eight_eight(), 512, 6, 16, &mut rng, 200).unwrap();
    let alist = write_code(tmp.path(), "planted.alist", &p.graph);
    let targets = tmp.path().join("targets.json");
    std::fs::write(
        &targets,
        serde_json::json!([{ "vars": p.set_vars }]).to_string(),
    )
    .unwrap();
    let sim = tmp.path().join("sim");
    ok(&[
        "simulate",
        "--alist",
        &alist,
        "--ebno",
        "3.5",
        "--mode",
        "is",
        "--targets",
        path(&targets),
        "--shift",
        "0.25",
        "--frames",
        "2e2",
        "--iters",
        "20",
        "--seed",
        "5",
        "--out",
        path(&sim),
    ]);
    let joined = tmp.path().join("joined");
    ok(&[
        "report",
        "--analytic",
        path(&est_json),
        "--sim",
        path(&sim.join("sim.json")),
        "--out",
        path(&joined),
    ]);
    let csv = std::fs::read_to_string(joined.join("report.csv")).unwrap();
    let at: Vec<&str> = csv.lines().filter(|l| l.starts_with("3.5,")).collect();
    assert_eq!(at.len(), 2);
    assert!(at[0].contains(",analytic,") && at[1].contains(",is,"));

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let other = plant_topology(&dominant_eight_eight(), 512, 6, 16, &mut rng, 200).unwrap();
    let alist2 = write_code(tmp.path(), "other.alist", &other.graph);
    let sim2 = tmp.path().join("sim2");
    ok(&[
        "simulate",
        "--alist",
        &alist2,
        "--ebno",
        "3.5",
        "--frames",
        "64",
        "--out",
        path(&sim2),
    ]);
    let bad = floorscope(&[
        "report",
        "--sim",
        path(&sim.join("sim.json")),
        "--sim",
        path(&sim2.join("sim.json")),
    ]);
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn simulation_is_reproducible_from_its_seed() {
    let tmp = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let p = plant_topology(&dominant_eight_eight(), 512, 6, 16, &mut rng, 200).unwrap();
    let alist = write_code(tmp.path(), "planted.alist", &p.graph);
    let run = |workers: &str| {
        ok(&[
            "simulate",
            "--alist",
            &alist,
            "--ebno",
            "3",
            "--frames",
            "300",
            "--iters",
            "20",
            "--seed",
            "9",
            "--workers",
            workers,
        ])
        .stdout
    };
    let one = run("1");
    assert_eq!(one, run("2"));
    let r: serde_json::Value = serde_json::from_slice(&one).unwrap();
    assert_eq!(r["frames"], 300);
}

#[test]
fn topology_enumeration_and_de() {
    let out = ok(&[
        "enumerate-topologies",
        "--a",
        "6",
        "--b",
        "6",
        "--absent",
        "5,10",
    ]);
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["pruned_by"]["residual_a"], 5);
    assert_eq!(
        floorscope(&[
            "enumerate-topologies",
            "--a",
            "6",
            "--b",
            "6",
            "--absent",
            "5"
        ])
        .status
        .code(),
        Some(2)
    );

    let de = ok(&["de", "--ebno", "4:5:1", "--iters", "3"]);
    let text = String::from_utf8(de.stdout).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text.starts_with("ebno_db,iteration,m_v2c,m_ex,g_i\n4,1,"));
}
