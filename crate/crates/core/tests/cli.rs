use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

struct Dir(PathBuf);

impl Dir {
    fn new(name: &str) -> Self {
        let p = std::env::temp_dir().join(format!("metric-lens-cli-{name}-{}", std::process::id()));
        std::fs::create_dir_all(&p).unwrap();
        Dir(p)
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.0.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }
}

impl Drop for Dir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metric-lens")).current_dir(dir).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

const STAR: &str = "# a star\n0 1\n0 2\n0 3 2\n";

#[test]
fn tree_check_exit_codes() {
    let d = Dir::new("tree");
    d.write("star.txt", STAR);
    d.write("c4.txt", "0 1\n1 2\n2 3\n3 0\n");
    let ok = run(&d.0, &["tree-check", "star.txt"]);
    assert_eq!(ok.status.code(), Some(0));
    let r = json(&ok);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["command"], "tree-check");
    assert_eq!(r["pass"], true);
    assert_eq!(r["results"]["delta4"], 0.0);

    let bad = run(&d.0, &["tree-check", "c4.txt"]);
    assert_eq!(bad.status.code(), Some(1));
    let r = json(&bad);
    assert_eq!(r["pass"], false);
    // 4-cycle: sums 2, 2, 4 -> defect 1
    assert_eq!(r["results"]["delta4"], 1.0);
}

#[test]
fn input_errors_exit_2_with_a_json_error() {
    let d = Dir::new("errors");
    let missing = run(&d.0, &["validate", "nope.csv"]);
    assert_eq!(missing.status.code(), Some(2));
    assert_eq!(json(&missing)["error"]["kind"], "Io");

    d.write("bad.csv", "0,1,5\n1,0,1\n5,1,0\n");
    let r = run(&d.0, &["validate", "bad.csv"]);
    assert_eq!(r.status.code(), Some(2));
    let e = json(&r);
    assert!(e["error"]["details"]["violations"].as_array().is_some_and(|v| !v.is_empty()));

    d.write("garbled.txt", "0 1\n1 two\n");
    let r = run(&d.0, &["validate", "garbled.txt"]);
    assert_eq!(r.status.code(), Some(2));
    assert_eq!(json(&r)["error"]["details"]["line"], 2);

    let usage = run(&d.0, &["lens-scan"]);
    assert_eq!(usage.status.code(), Some(2));
    assert!(!usage.stderr.is_empty());
    assert_eq!(json(&usage)["error"]["kind"], "Usage");

    assert_eq!(run(&d.0, &["--help"]).status.code(), Some(0));
    assert_eq!(run(&d.0, &["--version"]).status.code(), Some(0));
}

#[test]
fn generate_then_scan() {
    let d = Dir::new("generate");
    let g = run(&d.0, &["generate", "--spec", r#"{"kind":"path","n":6}"#, "--out", "p.csv"]);
    assert_eq!(g.status.code(), Some(0));
    let text = std::fs::read_to_string(d.0.join("p.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "0,1,2,3,4,5");

    let scan = json(&run(&d.0, &["lens-scan", "p.csv", "--witnesses"]));
    assert_eq!(scan["results"]["exhaustive"], true);
    // Path intervals with an even number of points are not balls: one unit gap.
    assert_eq!(scan["results"]["sup_gap_add"], 1.0);
    assert_eq!(scan["allowances"]["quantum"], 1.0);
    assert_eq!(scan["results"]["witness_summary"]["excess_beyond_offset"], 0);
}

#[test]
fn lens_demo_csv() {
    let d = Dir::new("demo");
    let out = run(&d.0, &["lens-demo", "--r1", "1", "--h-list", "0.5,0.1,0.005", "--samples", "1000", "--csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "h,diam,ratio,sampled");
    let ratios: Vec<f64> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    for (r, h) in ratios.iter().zip([0.5, 0.1, 0.005]) {
        let oracle = 2.0 * (2.0 / h + 1.0f64).sqrt();
        assert!((r - oracle).abs() < 1e-9, "{r} vs {oracle}");
    }
}

#[test]
fn out_file_and_timing() {
    let d = Dir::new("out");
    d.write("star.txt", STAR);
    let r = run(&d.0, &["hyperbolicity", "star.txt", "--out", "rep.json"]);
    assert_eq!(r.status.code(), Some(0));
    assert!(r.stdout.is_empty());
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(d.0.join("rep.json")).unwrap()).unwrap();
    assert!(rep.get("wall_time_ms").is_none());
    assert_eq!(rep["config"]["seed"], 0);

    let timed = json(&run(&d.0, &["--timing", "hyperbolicity", "star.txt"]));
    assert!(timed["wall_time_ms"].as_f64().is_some());
}

#[test]
fn lens_bound_single_check_and_search() {
    let d = Dir::new("bound");
    run(&d.0, &["generate", "--spec", r#"{"kind":"grid","rows":9,"cols":9}"#, "--out", "g.json"]);
    let one = run(&d.0, &["lens-bound", "g.json", "--x", "0", "--y", "80", "--t", "0.5", "--h", "0"]);
    assert_eq!(one.status.code(), Some(1));
    let r = json(&one);
    // Every vertex at distance 8 from both corners: the anti-diagonal, diameter 16.
    assert_eq!(r["results"]["diam"], 16.0);

    run(&d.0, &["generate", "--spec", r#"{"kind":"path","n":9}"#, "--out", "p.csv"]);
    let path = run(&d.0, &["lens-bound", "p.csv"]);
    assert_eq!(path.status.code(), Some(0));
    assert_eq!(json(&path)["results"]["failures"], 0);
}

#[test]
fn cone_md_and_stokes_pipeline() {
    let d = Dir::new("cone");
    run(&d.0, &["generate", "--spec", r#"{"kind":"star","leaves":3,"weight":1}"#, "--out", "s.csv"]);
    d.write("loop.json", r#"{"space_ref": "s.csv", "points": [1, 0, 2, 0, 3, 0, 1]}"#);
    let cone = run(&d.0, &["cone", "s.csv", "--loop", "loop.json", "--base", "0", "--grid", "24", "--map-out", "m.json"]);
    assert_eq!(cone.status.code(), Some(0), "{}", String::from_utf8_lossy(&cone.stdout));
    let r = json(&cone);
    assert_eq!(r["results"]["boundary_reproduces_loop"], true);
    assert_eq!(r["results"]["inner_disc_constant"], true);

    let md = json(&run(&d.0, &["md-field", "--map", "m.json"]));
    assert!(md["results"]["degeneracy"]["fraction_degenerate"].as_f64().unwrap() >= 0.95);

    let st = json(&run(&d.0, &["stokes", "--map", "m.json", "--f", "distance:1", "--pi", "distance:2"]));
    assert_eq!(st["results"]["boundary_integral"], 0.0);
    assert_eq!(st["results"]["area_integral"], 0.0);

    let li = json(&run(&d.0, &["loop-integral", "s.csv", "--loop", "loop.json", "--f", "bump:1:1", "--pi", "distance:0"]));
    assert_eq!(li["results"]["value"], 0.0);
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let d = Dir::new("threads");
    run(&d.0, &["generate", "--spec", r#"{"kind":"random_tree","n":60,"seed":11}"#, "--out", "t.csv"]);
    for args in [
        &["hyperbolicity", "t.csv", "--budget", "5000", "--seed", "3"][..],
        &["lens-scan", "t.csv", "--pairs", "2000", "--seed", "5", "--witnesses"][..],
        &["rescale", "t.csv", "--scales", "1,2"][..],
    ] {
        let mut a = vec!["--threads", "1"];
        a.extend_from_slice(args);
        let mut b = vec!["--threads", "8"];
        b.extend_from_slice(args);
        let (x, y) = (run(&d.0, &a), run(&d.0, &b));
        assert_eq!(x.stdout, y.stdout, "{args:?}");
        assert!(!x.stdout.is_empty());
    }
}
