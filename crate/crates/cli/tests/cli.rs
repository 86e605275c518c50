use std::process::{Command, Output};

use serde_json::Value;

fn sturm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sturm")).args(args).output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = sturm(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_str().unwrap().parse().unwrap()
}

#[test]
fn root_bands_only() {
    let out = sturm(&["bands", "--a", "1", "--levels", "0", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0], "word,level,type,lo,hi,length");
}

#[test]
fn band_json_contains_the_roots() {
    let v = json(&["bands", "--a", "1", "--lambda", "24", "--levels", "3"]);
    let bands = v["bands"].as_array().unwrap();
    let level0: Vec<(f64, f64)> = bands
        .iter()
        .filter(|b| b["level"] == 0)
        .map(|b| (num(&b["lo"]), num(&b["hi"])))
        .collect();
    assert_eq!(level0, [(-2.0, 2.0), (22.0, 26.0)]);
    assert_eq!(v["precision"], 17);
    let csv = sturm(&["bands", "--a", "1,2", "--levels", "2", "--format", "csv"]);
    assert!(String::from_utf8(csv.stdout).unwrap().starts_with("word,level,type,lo,hi,length\n"));
}

#[test]
fn budget_exhaustion_flags_partial_output() {
    let out = sturm(&["bands", "--levels", "12", "--budget", "50"]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["truncated"], true);
}

#[test]
fn usage_errors() {
    assert_eq!(sturm(&["chars", "--lambda", "19"]).status.code(), Some(64));
    assert_eq!(sturm(&["chars", "--a", "0"]).status.code(), Some(64));
    assert_eq!(sturm(&["pressure", "--s-min", "2", "--s-max", "1"]).status.code(), Some(64));
}

#[test]
fn pressure_curve_geometry() {
    let args = ["pressure", "--a", "1", "--lambda", "24", "--s-min", "-1", "--s-max", "2", "--steps", "61"];
    let v = json(&args);
    let grid = v["grid"].as_array().unwrap();
    assert_eq!(grid.len(), 61);
    let p: Vec<f64> = grid.iter().map(|g| num(&g["P"])).collect();
    assert!(p.windows(2).all(|w| w[1] < w[0]));
    let ab = &v["abscissae"];
    let (d, dim) = (num(&ab["d"]), num(&ab["D"]));
    // tangent at s = 0 meets the axis at d
    assert!((-num(&v["P0"]) / num(&v["dP0"]) - d).abs() < 1e-12);
    // P changes sign at D
    let s: Vec<f64> = grid.iter().map(|g| num(&g["s"])).collect();
    let i = s.iter().position(|&x| x > dim).unwrap();
    assert!(p[i - 1] > 0.0 && p[i] < 0.0);
    assert_eq!(sturm(&args).stdout, sturm(&args).stdout);
}

#[test]
fn characteristics_chain_and_rotation() {
    let v = json(&["chars", "--a", "1", "--lambda", "24"]);
    let xs: Vec<f64> = ["gamma", "d", "D", "T"].iter().map(|k| num(&v[k])).collect();
    assert!(xs[0] > 0.0 && xs[3] < 1.0);
    assert!(xs.windows(2).all(|w| w[0] < w[1]));
    let x = json(&["chars", "--a", "1,2"]);
    let y = json(&["chars", "--a", "2,1"]);
    for k in ["gamma", "d", "D", "T"] {
        assert!((num(&x[k]) - num(&y[k])).abs() < 1e-8, "{k}");
    }
}

#[test]
fn asymptotic_tables() {
    let v = json(&["asymptotics", "--a", "1,1", "--no-sweep"]);
    assert_eq!(v["F_lower"], "-4/3");
    assert_eq!(v["rho_gamma"]["exact"], "(3/4)*log((3+sqrt(5))/2)");
    let v = json(&["asymptotics", "--a", "2,3", "--no-sweep"]);
    assert_eq!((v["F_lower"].as_str(), v["F_upper"].as_str()), (Some("-3"), Some("-2")));
    let v = json(&["asymptotics", "--a", "1", "--no-sweep"]);
    assert!((num(&v["rho_d"]["value"]) - 0.87052).abs() < 1e-5);
    assert!(v["rho_D"].is_null());
}

#[test]
fn multifractal_grid() {
    let v = json(&["multifractal", "--a", "1", "--beta-steps", "9"]);
    let dim = num(&json(&["chars", "--a", "1"])["D"]);
    let (lo, hi) = (num(&v["beta_min"]), num(&v["beta_max"]));
    let pts = v["points"].as_array().unwrap();
    assert_eq!(pts.len(), 9);
    let f: Vec<f64> = pts.iter().map(|p| num(&p["dim"])).collect();
    for p in pts {
        let b = num(&p["beta"]);
        assert!(lo < b && b < hi);
    }
    assert!(f.iter().all(|&x| x <= dim + 1e-6));
    assert!(f.windows(3).all(|w| w[0] - 2.0 * w[1] + w[2] <= 1e-8));
    let csv = sturm(&["multifractal", "--beta-steps", "3", "--format", "csv"]);
    assert_eq!(String::from_utf8(csv.stdout).unwrap().lines().count(), 4);
}

#[test]
fn verify_filters() {
    let out = sturm(&["verify", "--only", "charpoly"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["charpoly[1]"]);
    let out = sturm(&["verify", "--deep", "--only", "charpoly,mean_cycle"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 4);
}

#[test]
fn output_file() {
    let path = std::env::temp_dir().join(format!("sturm-cli-test-{}.csv", std::process::id()));
    let out = sturm(&["chars", "--format", "csv", "-o", path.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("a,lambda,gamma,d,D,T\n1,"));
    std::fs::remove_file(path).unwrap();
}
