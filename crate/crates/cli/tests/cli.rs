use std::f64::consts::PI;
use std::process::{Command, Output};

use polyapprox::convex_hull;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyapprox"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    v
}

/// Header row of a CSV document plus the number of data rows, each checked
/// to have as many fields as the header.
fn csv_shape(text: &str) -> (String, usize) {
    let mut lines = text.lines();
    let header = lines.next().expect("header").to_string();
    let width = header.split(',').count();
    let mut rows = 0;
    for line in lines {
        assert_eq!(line.split(',').count(), width, "{line}");
        rows += 1;
    }
    (header, rows)
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&["scaling", "--help"]).status.code(), Some(0));
}

#[test]
fn configuration_errors_exit_one() {
    let cases: [&[&str]; 8] = [
        &["frobnicate"],
        &["asp", "--body", "ball:r=1,n=3", "--p", "1", "--bogus"],
        &["asp", "--body", "cube:side=1", "--p", "1"],
        &["asp", "--body", "ball:r=-1,n=3", "--p", "1"],
        &["asp", "--body", "ball:r=1,n=3", "--p", "-3"],
        &[
            "asp",
            "--body",
            "ball:r=1,n=3",
            "--p",
            "1",
            "--format",
            "csv",
        ],
        &["bpcheck", "--body", "ball:r=1,n=3"],
        &[
            "construct",
            "--body",
            "ball:r=1,n=2",
            "--n-points",
            "100",
            "--density",
            "nope",
        ],
    ];
    for args in cases {
        let o = run(args);
        assert_eq!(
            o.status.code(),
            Some(1),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(o.stdout.is_empty());
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn numerical_failure_exits_two() {
    // c = 3^{-2} π² / 1 > 1 for the unit disc with the affine-optimal density
    let o = run(&[
        "construct",
        "--body",
        "ball:r=1,n=2",
        "--n-points",
        "3",
        "--trials",
        "2",
        "--shrink",
        "asymptotic",
    ]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(String::from_utf8_lossy(&o.stderr).contains("shrink factor"));
}

#[test]
fn asp_of_the_unit_sphere() {
    let v = json(&run(&["asp", "--body", "ball:r=1,n=3", "--p", "1"]));
    assert_eq!(v["command"], "asp");
    assert_eq!(v["config"]["p"], "1");
    let value = v["result"]["value"].as_f64().unwrap();
    assert!((value / (4.0 * PI) - 1.0).abs() < 1e-12, "{value}");

    let v = json(&run(&["asp", "--body", "ellipsoid:a=2,b=1", "--p", "inf"]));
    assert!(v["result"]["value"].as_f64().unwrap() > 0.0);
    let v = json(&run(&["asp", "--body", "ellipsoid:a=2,b=1", "--p", "-inf"]));
    assert!(v["result"]["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn bodyinfo_reports_the_catalogue_quantities() {
    let v = json(&run(&["bodyinfo", "--body", "ellipsoid:a=2,b=1"]));
    let r = &v["result"];
    assert_eq!(r["dim"], 2);
    assert!((r["volume"].as_f64().unwrap() - 2.0 * PI).abs() < 1e-9);
    assert!((r["as_n"]["value"].as_f64().unwrap() - 2.0 * PI).abs() < 1e-6);
}

#[test]
fn verify_table_passes_on_the_ellipsoid() {
    let o = run(&["verify", "--body", "ellipsoid:a=1.5,b=1,c=0.75"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let (header, rows) = csv_shape(&text);
    assert_eq!(header, "identity,lhs,rhs,rel_error,tolerance,pass");
    assert_eq!(rows, 13);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")), "{text}");
}

#[test]
fn deficit_table_schema() {
    let o = run(&[
        "deficit",
        "--body",
        "ball:r=1,n=2",
        "--schedule",
        "50,100,200",
        "--trials",
        "50",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = csv_shape(&stdout(&o));
    assert_eq!(
        header,
        "n_points,trials,mean_deficit,stderr,normalized,target,ratio"
    );
    assert_eq!(rows, 3);
}

#[test]
fn scaling_writes_csv_json_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("scaling.svg");
    let out = dir.path().join("scaling.csv");
    let args = [
        "scaling",
        "--body",
        "ball:r=1,n=2",
        "--schedule",
        "50,100,200",
        "--trials",
        "20",
        "--pilots",
        "40",
        "--plot",
        plot.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    let o = run(&args);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(o.stdout.is_empty());
    let (header, rows) = csv_shape(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(
        header,
        "n_points,trials,shrink_c,mean_delta_s,stderr,rescaled_mean,bound_ratio_max,seed"
    );
    assert_eq!(rows, 3);
    let svg = std::fs::read_to_string(&plot).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));

    let v = json(&run(&[
        "scaling",
        "--body",
        "ball:r=1,n=2",
        "--schedule",
        "50,100,200",
        "--trials",
        "20",
        "--pilots",
        "40",
        "--format",
        "json",
    ]));
    assert_eq!(v["result"]["rows"].as_array().unwrap().len(), 3);
    assert_eq!(v["result"]["expected_slope"], -2.0);
    assert_eq!(v["config"]["schedule"], serde_json::json!([50, 100, 200]));
}

#[test]
fn construct_writes_a_loadable_witness() {
    let dir = tempfile::tempdir().unwrap();
    let witness = dir.path().join("witness.json");
    let v = json(&run(&[
        "construct",
        "--body",
        "ellipsoid:a=2,b=1",
        "--n-points",
        "200",
        "--trials",
        "10",
        "--pilots",
        "40",
        "--witness",
        witness.to_str().unwrap(),
    ]));
    let r = &v["result"];
    assert_eq!(r["trials"], 10);
    let c = r["shrink_c"].as_f64().unwrap();
    assert!(c > 0.0 && c < 1.0);
    let p = polyapprox::Polytope::from_json(&std::fs::read_to_string(&witness).unwrap()).unwrap();
    assert_eq!(p.dim, 2);
    assert!(p.vertex_count() <= 200);
}

#[test]
fn deviate_against_a_polytope_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("square.json");
    let square = convex_hull(&[[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]], 2).unwrap();
    std::fs::write(&path, square.to_json()).unwrap();
    let v = json(&run(&[
        "deviate",
        "--body",
        "ball:r=1,n=2",
        "--polytope",
        path.to_str().unwrap(),
        "--volume",
    ]));
    let s = &v["result"]["surface"]["delta"];
    let (value, se) = (
        s["value"].as_f64().unwrap(),
        s["std_error"].as_f64().unwrap(),
    );
    assert!(
        (value - (8.0 - 2.0 * PI)).abs() <= 3.0 * se,
        "{value} ± {se}"
    );
    let vol = &v["result"]["volume"];
    let (value, se) = (
        vol["value"].as_f64().unwrap(),
        vol["std_error"].as_f64().unwrap(),
    );
    assert!((value - (4.0 - PI)).abs() <= 3.0 * se, "{value} ± {se}");

    let o = run(&[
        "deviate",
        "--body",
        "ball:r=1,n=3",
        "--polytope",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["deviate", "--body", "ball:r=1,n=2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn curve_bodies_load_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.json");
    std::fs::write(&path, r#"{"a0": 1.0, "harmonics": [[3, 0.05, 0.0]]}"#).unwrap();
    let body = format!("curve2d:{}", path.display());
    let o = run(&["verify", "--body", &body]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().skip(1).all(|l| l.ends_with(",true")));

    // h + h'' < 0 somewhere
    std::fs::write(&path, r#"{"a0": 1.0, "harmonics": [[3, 0.5, 0.0]]}"#).unwrap();
    assert_eq!(run(&["verify", "--body", &body]).status.code(), Some(1));
}

#[test]
fn same_seed_gives_identical_bytes() {
    let args = [
        "deficit",
        "--body",
        "ellipsoid:a=2,b=1",
        "--schedule",
        "50,100,200",
        "--trials",
        "30",
        "--seed",
        "7",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let mut other = args.to_vec();
    let last = other.len() - 1;
    other[last] = "8";
    assert_ne!(run(&other).stdout, a.stdout);

    let j = [
        "bpcheck",
        "--body",
        "ball:r=1,n=2",
        "--samples",
        "50000",
        "--format",
        "json",
    ];
    assert_eq!(run(&j).stdout, run(&j).stdout);
}
