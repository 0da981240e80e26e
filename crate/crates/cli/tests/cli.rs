use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use relbound::exponents::Gallager;
use relbound::BoundCurve;
use serde_json::Value;
use tempfile::TempDir;

const TYPEWRITER: &str = r#"{"type":"classical","W":[
  [0.5,0.5,0,0,0],[0,0.5,0.5,0,0],[0,0,0.5,0.5,0],[0,0,0,0.5,0.5],[0.5,0,0,0,0.5]]}"#;
const BSC: &str = r#"{"type":"classical","W":[[0.9,0.1],[0.1,0.9]]}"#;
const TRINE: &str = r#"{"type":"cq","dim":2,"states":[
  {"re":[[1,0],[0,0]]},
  {"re":[[0.25,-0.4330127018922193],[-0.4330127018922193,0.75]]},
  {"re":[[0.5,0],[0,0.5]]}]}"#;
const PENTAGON: &str = "# C5\n5\n0 1\n1 2\n2 3\n3 4\n4 0\n";

struct Sandbox(TempDir);

impl Sandbox {
    fn new() -> Self {
        Sandbox(tempfile::tempdir().unwrap())
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.0.path().join(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }
}

fn relbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relbound")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn assert_ok(out: &Output) {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn report_on_typewriter() {
    let sb = Sandbox::new();
    let input = sb.file("tw.json", TYPEWRITER);
    let out = sb.path("report.json");
    assert_ok(&relbound(&["report", "--input", s(&input), "--out", s(&out), "--seed", "7"]));
    let r = json(&out);
    assert!((r["r_infinity"].as_f64().unwrap() - (2.5f64).ln()).abs() < 1e-4, "{}", r["r_infinity"]);
    assert!((r["theta"].as_f64().unwrap() - 0.5 * 5f64.ln()).abs() < 1e-4);
    assert!(r["cutoff"].as_f64().unwrap() > 0.0);
    assert_eq!(r["zero_rate"], "inf");
    assert_eq!(r["status"], "ok");
    assert!(r["recheck_residual"].as_f64().unwrap() <= 1e-6);
    assert_eq!(r["settings"]["seed"], 7);
}

#[test]
fn umbrella_is_infinite_below_theta() {
    let sb = Sandbox::new();
    let input = sb.file("tw.json", TYPEWRITER);
    let out = sb.path("umbrella.csv");
    assert_ok(&relbound(&["umbrella", "--input", s(&input), "--out", s(&out), "--R", "0.2:1.4:7", "--seed", "1"]));
    let curves = BoundCurve::read_csv(fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(curves.len(), 1);
    let theta = 0.5 * 5f64.ln();
    for p in &curves[0].points {
        if p.r <= theta {
            assert!(p.e.is_infinite(), "R = {} gives {}", p.r, p.e);
        } else if p.r > 1.0 {
            assert!(p.e.is_finite(), "R = {}", p.r);
        }
    }
    assert!(fs::read_to_string(&out).unwrap().contains(",inf,"));
    assert_eq!(json(&sb.path("umbrella.json"))["status"], "ok");
}

#[test]
fn usage_and_parse_errors_exit_one() {
    let sb = Sandbox::new();
    let input = sb.file("bsc.json", BSC);
    let out = sb.path("x.csv");
    let empty = relbound(&["umbrella", "--input", s(&input), "--out", s(&out), "--R", "0.1:0.5:0", "--seed", "1"]);
    assert_eq!(empty.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&empty.stderr).contains("empty"));

    let no_seed = relbound(&["umbrella", "--input", s(&input), "--out", s(&out), "--R", "0.1:0.5:3"]);
    assert_eq!(no_seed.status.code(), Some(1));

    let bad = sb.file("bad.json", r#"{"type":"classical","W":[[0.9,0.08],[0.1,0.9]]}"#);
    let invalid = relbound(&["report", "--input", s(&bad), "--out", s(&sb.path("r.json")), "--seed", "1"]);
    assert_eq!(invalid.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&invalid.stderr).contains("row 0"));
    assert!(!sb.path("r.json").exists());

    let no_grid = relbound(&["exponent", "--input", s(&input), "--out", s(&out), "--seed", "1"]);
    assert_eq!(no_grid.status.code(), Some(1));

    let graph = sb.file("c5.txt", PENTAGON);
    let wrong_kind = relbound(&["exponent", "--input", s(&graph), "--out", s(&out), "--R", "0.1", "--seed", "1"]);
    assert_eq!(wrong_kind.status.code(), Some(1));
}

#[test]
fn threads_variable_is_honored() {
    let sb = Sandbox::new();
    let input = sb.file("bsc.json", BSC);
    let out = sb.path("r.json");
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_relbound"))
            .args(["report", "--input", s(&input), "--out", s(&out), "--seed", "1"])
            .env("RELBOUND_THREADS", v)
            .output()
            .unwrap()
    };
    assert_ok(&run("1"));
    assert_eq!(json(&out)["settings"]["threads"], 1);
    assert_eq!(run("zero").status.code(), Some(1));
}

#[test]
fn esp_dominates_umbrella_on_bsc() {
    let sb = Sandbox::new();
    let input = sb.file("bsc.json", BSC);
    let (exp, umb, merged) = (sb.path("exp.csv"), sb.path("umb.csv"), sb.path("cmp.csv"));
    // below R ≈ 0.03 esp blows up and the umbrella, tending to the zero-rate exponent, wins
    let grid = "0.05:0.6:12";
    assert_ok(&relbound(&["exponent", "--input", s(&input), "--out", s(&exp), "--R", grid, "--seed", "1"]));
    assert_ok(&relbound(&["umbrella", "--input", s(&input), "--out", s(&umb), "--R", grid, "--seed", "1"]));
    let out = relbound(&[
        "compare", "--input", s(&exp), "--input", s(&umb), "--bounds", "esp,umbrella", "--out", s(&merged),
    ]);
    assert_ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("dominance: esp"));
    let summary = json(&sb.path("cmp.json"));
    assert_eq!(summary["dominance"], "esp");
    let table = fs::read_to_string(&merged).unwrap();
    assert!(table.starts_with("R,esp,umbrella,smallest"));
    assert_eq!(table.lines().count(), 13);

    assert_ok(&relbound(&["exponent", "--input", s(&input), "--out", s(&exp), "--R", "0.02", "--seed", "1"]));
    assert_ok(&relbound(&["umbrella", "--input", s(&input), "--out", s(&umb), "--R", "0.02", "--seed", "1"]));
    let low = relbound(&["compare", "--input", s(&exp), "--input", s(&umb), "--bounds", "esp,umbrella", "--out", s(&merged)]);
    assert!(String::from_utf8_lossy(&low.stdout).contains("dominance: umbrella"));
}

#[test]
fn compare_ties_and_grid_mismatch() {
    let sb = Sandbox::new();
    let input = sb.file("bsc.json", BSC);
    let (a, b, c) = (sb.path("a.csv"), sb.path("b.csv"), sb.path("c.csv"));
    for (p, grid) in [(&a, "0.1:0.3:3"), (&b, "0.1:0.3:3"), (&c, "0.4:0.6:3")] {
        assert_ok(&relbound(&["umbrella", "--input", s(&input), "--out", s(p), "--R", grid, "--seed", "1"]));
    }
    let tie = relbound(&["compare", "--input", s(&a), "--input", s(&b), "--out", s(&sb.path("t.csv"))]);
    assert_ok(&tie);
    assert_eq!(json(&sb.path("t.json"))["dominance"], "tie");

    let mismatch = relbound(&["compare", "--input", s(&a), "--input", s(&c), "--out", s(&sb.path("m.csv"))]);
    assert_eq!(mismatch.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&mismatch.stderr).contains("rate grid"));
}

#[test]
fn exponent_report_reevaluates_at_optimizers() {
    let sb = Sandbox::new();
    let input = sb.file("trine.json", TRINE);
    let out = sb.path("exp.csv");
    assert_ok(&relbound(&["exponent", "--input", s(&input), "--out", s(&out), "--R", "0.05:0.5:6", "--seed", "3"]));
    let report = json(&sb.path("exp.json"));
    assert!(report["recheck_residual"].as_f64().unwrap() <= 1e-6);
    let channel = relbound::Channel::from_json(TRINE).unwrap().to_cq();
    let gal = Gallager::new(&channel);
    let mut checked = 0;
    for curve in report["curves"].as_array().unwrap() {
        if curve["bound_name"] == "eex" {
            continue;
        }
        for p in curve["points"].as_array().unwrap() {
            let (Some(e), Some(rho)) = (p["e"].as_f64(), p["params"]["rho"].as_f64()) else {
                continue;
            };
            let r = p["r"].as_f64().unwrap();
            let weights: Vec<f64> = p["params"]["p"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
            let again = (gal.e0(rho, &weights) - rho * r).max(0.0);
            assert!((again - e).abs() <= 1e-6, "R = {r}: {e} vs {again}");
            checked += 1;
        }
    }
    assert!(checked >= 6);
}

#[test]
fn theta_on_pentagon_graph() {
    let sb = Sandbox::new();
    let input = sb.file("c5.txt", PENTAGON);
    let out = sb.path("theta.csv");
    assert_ok(&relbound(&["theta", "--input", s(&input), "--out", s(&out), "--trials", "5", "--seed", "2"]));
    let r = json(&sb.path("theta.json"));
    assert!((r["lovasz"].as_f64().unwrap() - 0.5 * 5f64.ln()).abs() < 1e-4);
    assert!(r["probe"]["min_r_infinity"].as_f64().unwrap() >= 0.5 * 5f64.ln() - 1e-4);
    assert!(fs::read_to_string(&out).unwrap().starts_with("rho,theta\ninf,"));
}

#[test]
fn theta_on_channel_grid() {
    let sb = Sandbox::new();
    let input = sb.file("bsc.json", BSC);
    let out = sb.path("theta.csv");
    assert_ok(&relbound(&["theta", "--input", s(&input), "--out", s(&out), "--rho", "1,2,4", "--seed", "2"]));
    let text = fs::read_to_string(&out).unwrap();
    let values: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 3);
    // ϑ(1) is the cutoff rate −log((1 + 2√(pq))/2)
    assert!((values[0] + 0.8f64.ln()).abs() < 1e-5);
    assert!(values.windows(2).all(|w| w[1] <= w[0] + 1e-9));
}

#[test]
fn divergence_and_hypotest() {
    let sb = Sandbox::new();
    let input = sb.file("bsc.json", BSC);
    let div = sb.path("div.csv");
    assert_ok(&relbound(&["divergence", "--input", s(&input), "--out", s(&div), "--s", "0.25,0.5", "--seed", "1"]));
    let text = fs::read_to_string(&div).unwrap();
    assert!(text.starts_with("x,x2,fidelity,bhattacharyya,chernoff,s_star,mu(0.25),mu(0.5)"));
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    // BSC(0.1) rows: d_B = d_C = −log 0.6
    assert!((row[3] + 0.6f64.ln()).abs() < 1e-9);
    assert!((row[4] + 0.6f64.ln()).abs() < 1e-9);
    assert!((row[7] - 0.6f64.ln()).abs() < 1e-9);

    let hyp = sb.path("hyp.csv");
    assert_ok(&relbound(&["hypotest", "--input", s(&input), "--out", s(&hyp), "--R", "0.1:2:5", "--seed", "1"]));
    let r = json(&sb.path("hyp.json"));
    assert!((r["chernoff"]["distance"].as_f64().unwrap() + 0.6f64.ln()).abs() < 1e-9);
    assert_eq!(r["thresholds"].as_array().unwrap().len(), 19);
    let curve = &BoundCurve::read_csv(fs::File::open(&hyp).unwrap()).unwrap()[0];
    assert!(curve.is_non_increasing(1e-9));
}

#[test]
fn radius_certificates() {
    let sb = Sandbox::new();
    let input = sb.file("trine.json", TRINE);
    let out = sb.path("radius.csv");
    assert_ok(&relbound(&["radius", "--input", s(&input), "--out", s(&out), "--rho", "0.5,1,2,8", "--seed", "1"]));
    let r = json(&sb.path("radius.json"));
    let certs = r["certificates"].as_array().unwrap();
    assert_eq!(certs.len(), 4);
    assert!(certs.iter().all(|c| c["residual"].as_f64().unwrap() <= 1e-5));
    assert!(r["recheck_residual"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn csv_output_name_must_differ_from_report() {
    let sb = Sandbox::new();
    let input = sb.file("bsc.json", BSC);
    let out = relbound(&["umbrella", "--input", s(&input), "--out", s(&sb.path("u.json")), "--R", "0.3", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
}
