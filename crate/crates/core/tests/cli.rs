mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use netshape::graph::{read_edge_list_file, EdgeListFormat, HazardMatrix, LoadOptions};
use netshape::shaping::{netshape_edge, ActionMode, FeasibleSetSpec, ShapingOptions};

fn netshape(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netshape"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .parse()
        .unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn radius_of_edgeless_graph() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", "# netshape-graph v1 n=5\n");
    let o = netshape(&["radius", &g, "--n0", "2"]);
    assert!(o.status.success(), "{o:?}");
    let out = stdout(&o);
    assert_eq!(field(&out, "rho"), 0.0);
    assert_eq!(field(&out, "bound"), 2.0);
}

#[test]
fn radius_of_single_edge() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.tsv", "0\t1\t1\n");
    let o = netshape(&["radius", &g, "--weighted", "--weighting", "hazard"]);
    assert!(o.status.success(), "{o:?}");
    assert!((field(&stdout(&o), "rho") - 0.5).abs() < 1e-12);
}

#[test]
fn radius_matches_dense_oracle_on_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = common::rng(21);
    let g = common::random_digraph(15, 50, &mut r);
    let h = common::random_hazard(&g, 0.0, 1.0, &mut r);
    let path = dir.path().join("h.tsv");
    h.save(&path).unwrap();
    let o = netshape(&["radius", path.to_str().unwrap(), "--weighted", "--weighting", "hazard"]);
    assert!(o.status.success(), "{o:?}");
    let want = common::dense_radius(&h);
    assert!((field(&stdout(&o), "rho") - want).abs() <= 1e-8);
}

#[test]
fn io_and_parse_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.txt");
    assert_eq!(netshape(&["radius", missing.to_str().unwrap()]).status.code(), Some(2));
    let bad = write(dir.path(), "bad.txt", "0 1\n1 x\n");
    let o = netshape(&["radius", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn shape_with_zero_budget_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.tsv", "0\t1\t1\n1\t2\t0.5\n2\t0\t2\n");
    let out = dir.path().join("out");
    let o = netshape(&[
        "shape", &g, "--weighted", "--weighting", "hazard", "--budget", "0", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{o:?}");
    let iterations = field(&stdout(&o), "iterations") as usize;
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), iterations + 1);
    let alloc = fs::read_to_string(out.join("allocation.tsv")).unwrap();
    assert!(alloc.lines().all(|l| l.ends_with("\t0")), "{alloc}");
    let shaped = read_edge_list_file(
        out.join("shaped_hazard.tsv"),
        LoadOptions {
            format: EdgeListFormat::Weighted,
            undirected: false,
        },
    )
    .unwrap();
    assert_eq!(shaped.weights.unwrap(), vec![1.0, 0.5, 2.0]);
}

#[test]
fn shape_star_matches_library_result() {
    let dir = tempfile::tempdir().unwrap();
    let body: String = (1..=3).map(|l| format!("0\t{l}\t1\n{l}\t0\t1\n")).collect();
    let g = write(dir.path(), "star.tsv", &body);
    let out = dir.path().join("out");
    let o = netshape(&[
        "shape", &g, "--weighted", "--weighting", "hazard", "--mode", "edge", "--budget", "2",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{o:?}");

    let loaded = read_edge_list_file(
        &g,
        LoadOptions {
            format: EdgeListFormat::Weighted,
            undirected: false,
        },
    )
    .unwrap();
    let h = HazardMatrix::new(loaded.graph, loaded.weights.unwrap()).unwrap();
    let spec = FeasibleSetSpec::scaled(h, 0.0, 2.0, ActionMode::Edge).unwrap();
    let res = netshape_edge(&spec, &ShapingOptions::default()).unwrap();
    let mut want = Vec::new();
    res.averaged.write_tsv(&mut want).unwrap();
    assert_eq!(fs::read(out.join("allocation.tsv")).unwrap(), want);
}

#[test]
fn node_budget_above_node_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", "0 1\n1 2\n");
    let o = netshape(&["shape", &g, "--budget", "4", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
}

fn trivalency_graph(dir: &Path) -> String {
    let mut r = common::rng(5);
    let g = common::random_digraph(200, 1200, &mut r);
    let mut f = Vec::new();
    netshape::graph::write_edge_list(&g, &mut f).unwrap();
    write(dir, "g.txt", &String::from_utf8(f).unwrap())
}

fn sweep(dir: &Path, g: &str, name: &str, extra: &[&str]) -> Vec<u8> {
    let out = dir.join(name);
    let mut args = vec![
        "sweep", g, "--out", out.to_str().unwrap(), "--set", "levels=0.05,0.1,0.2", "--set",
        "runs=300", "--set", "selection_samples=100", "--budget", "1,4,10,20", "--set", "t_cap=200",
    ];
    args.extend_from_slice(extra);
    let o = netshape(&args);
    assert!(o.status.success(), "{o:?}");
    fs::read(out.join("sweep.csv")).unwrap()
}

#[test]
fn sweep_is_deterministic_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let g = trivalency_graph(dir.path());
    let a = sweep(dir.path(), &g, "a", &["--threads", "1"]);
    let b = sweep(dir.path(), &g, "b", &["--threads", "1"]);
    let c = sweep(dir.path(), &g, "c", &["--threads", "8"]);
    assert_eq!(a, b);
    assert_eq!(a, c);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("method,k,rho,sigma_mean,sigma_stderr,wall_time_ms,seed,error\n"));
    assert_eq!(text.lines().count(), 1 + 5 * 4);
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 8);
        assert!(cols[7].is_empty(), "{line}");
        let sigma: f64 = cols[3].parse().unwrap();
        assert!((1.0..=200.0).contains(&sigma));
    }
}

#[test]
fn netshape_radius_is_nonincreasing_in_budget() {
    let dir = tempfile::tempdir().unwrap();
    let g = trivalency_graph(dir.path());
    let csv = sweep(dir.path(), &g, "n", &["--method", "netshape", "--set", "eval=radius"]);
    let rhos: Vec<f64> = String::from_utf8(csv)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(rhos.len(), 4);
    assert!(rhos.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{rhos:?}");
}

#[test]
fn zero_budget_rand_reports_unmodified_influence() {
    let dir = tempfile::tempdir().unwrap();
    let chain = write(dir.path(), "chain.txt", "0 1\n1 2\n");
    let out = dir.path().join("o");
    let o = netshape(&[
        "sweep", &chain, "--out", out.to_str().unwrap(), "--method", "rand", "--budget", "0",
        "--set", "weighting=uniform", "--set", "probability=0.5", "--set", "runs=4000",
        "--set", "eval=influence",
    ]);
    assert!(o.status.success(), "{o:?}");
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let (mean, se): (f64, f64) = (row[3].parse().unwrap(), row[4].parse().unwrap());
    // the selected influencer is node 0, whose exact expected reach is 1.75
    assert!((mean - 1.75).abs() <= 3.0 * se, "{mean} ± {se}");
    let meta = fs::read_to_string(out.join("metadata.txt")).unwrap();
    assert!(meta.contains("influencers = 0\n"), "{meta}");
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", "0 1\n1 2\n2 0\n");
    let out = dir.path().join("o");
    let cfg = write(
        dir.path(),
        "exp.cfg",
        &format!(
            "graph = {g}\nweighting = uniform\nprobability = 0.4\nmethod = degree\nmethod = netshape\n\
             eval = radius\nbudget = 1\nbudget = 2\nout = {}\n",
            out.display()
        ),
    );
    let o = netshape(&["--config", &cfg, "sweep", "--set", "budget=0.5", "--plot"]);
    assert!(o.status.success(), "{o:?}");
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3, "{csv}");
    assert!(out.join("rho.svg").exists());
    let o = netshape(&["--config", &cfg, "sweep", "--set", "budget=2", "--set", "budget=1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("strictly increasing"));
}

#[test]
fn baseline_and_simulate_verbs() {
    let dir = tempfile::tempdir().unwrap();
    let body: String = (1..=5).map(|l| format!("0 {l}\n")).collect();
    let g = write(dir.path(), "star.txt", &body);
    let out = dir.path().join("o");
    let o = netshape(&[
        "baseline", &g, "--policy", "degree", "--budget", "1", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("picked = 0\n"));
    assert_eq!(field(&stdout(&o), "rho_after"), 0.0);

    let o = netshape(&[
        "simulate", &g, "--set", "weighting=uniform", "--set", "probability=0", "--seeds", "0,3",
        "--runs", "10", "--dump", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(field(&stdout(&o), "sigma_mean"), 2.0);
    let runs = fs::read_to_string(out.join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 11);
}
