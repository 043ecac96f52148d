use std::path::PathBuf;
use std::process::{Command, Output};

fn ruelle(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ruelle"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    let _ = std::fs::remove_file(&path);
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("valid json")
}

fn csv_header(o: &Output) -> (String, String) {
    let text = stdout(o);
    let mut lines = text.lines();
    (
        lines.next().unwrap().to_string(),
        lines.next().unwrap().to_string(),
    )
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(ruelle(&["--help"]).status.code(), Some(0));
    assert_eq!(ruelle(&["--version"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(ruelle(&["bogus"]).status.code(), Some(1));
    assert_eq!(ruelle(&["spectrum"]).status.code(), Some(1));
    assert_eq!(
        ruelle(&["scan", "--gamma", "2", "--t", "0:1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        ruelle(&["verify", "--gamma", "2", "--format", "csv"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn malformed_potential_reports_the_path() {
    let path = scratch("bad.json");
    std::fs::write(
        &path,
        r#"{"alphabet":["a","b"],"kind":"finite-depth","factors":[[0.1,"x"]]}"#,
    )
    .unwrap();
    let o = ruelle(&["spectrum", "--potential", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("factors[0][1]"));
}

#[test]
fn probe_outside_its_regime_exits_one() {
    let o = ruelle(&["probe", "--gamma", "2.5", "--samples", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("regime"));
}

#[test]
fn verify_passes_on_a_finite_depth_potential() {
    let path = scratch("finite.json");
    std::fs::write(&path, r#"{"alphabet":["a","b","c"],"kind":"finite-depth","log_g0":0.3,"factors":[[0.2,-0.4,0.1],[1,0,-1]]}"#)
        .unwrap();
    let o = ruelle(&[
        "verify",
        "--potential",
        path.to_str().unwrap(),
        "--mc-samples",
        "2000",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v = json(&o);
    assert_eq!(v["result"]["passed"], true);
    assert_eq!(v["metadata"]["rng"], "chacha8");
}

#[test]
fn csv_column_orders() {
    let cases: [(&[&str], &str); 6] = [
        (
            &["classify", "--gamma", "1.8", "--format", "csv"],
            "n,v,s_lo,s_hi",
        ),
        (
            &["spectrum", "--gamma", "2", "--format", "csv"],
            "symbol,equilibrium_weight,conformal_limit",
        ),
        (
            &["eigen", "--gamma", "2", "--j-max", "20", "--format", "csv"],
            "j,mean,var,partial_mean,partial_var",
        ),
        (
            &[
                "sample",
                "--gamma",
                "2",
                "--samples",
                "50",
                "--max-depth",
                "100",
                "--format",
                "csv",
            ],
            "depth,q05,q25,q50,q75,q95",
        ),
        (
            &["regimes", "--scan", "1.2:2:0.4", "--format", "csv"],
            "gamma,log_lambda,regime,h_rho_lp,measures",
        ),
        (
            &["scan", "--gamma", "2", "--t", "0:1:0.5", "--format", "csv"],
            "t,log_lambda,error",
        ),
    ];
    for (args, header) in cases {
        let o = ruelle(args);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let (meta, head) = csv_header(&o);
        assert!(meta.starts_with("# tool=ruelle "), "{args:?}");
        assert_eq!(head, header, "{args:?}");
    }
}

#[test]
fn scan_rows_are_inclusive() {
    let o = ruelle(&["scan", "--gamma", "2", "--t", "0:1:0.25", "--format", "csv"]);
    assert_eq!(stdout(&o).lines().count(), 2 + 5);
}

#[test]
fn seed_controls_samples_and_hash() {
    let run = |seed: &str| {
        json(&ruelle(&[
            "sample",
            "--gamma",
            "1.8",
            "--samples",
            "100",
            "--max-depth",
            "50",
            "--seed",
            seed,
        ]))
    };
    let (a, b, c) = (run("1"), run("1"), run("2"));
    assert_eq!(a, b);
    assert_ne!(a["result"], c["result"]);
    assert_ne!(a["metadata"]["config_hash"], c["metadata"]["config_hash"]);
}

#[test]
fn out_file_matches_stdout() {
    let path = scratch("spectrum.json");
    let args = ["spectrum", "--gamma", "1.6"];
    let direct = ruelle(&args);
    let o = ruelle(&[&args[..], &["--out", path.to_str().unwrap()]].concat());
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
}

#[test]
fn log_appends_one_line_per_run() {
    let log = scratch("runs.jsonl");
    for g in ["1.8", "3"] {
        let o = ruelle(&["regimes", "--gamma", g, "--log", log.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    let text = std::fs::read_to_string(&log).unwrap();
    let lines: Vec<serde_json::Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    assert!(lines
        .iter()
        .all(|l| l["command"] == "regimes" && l["passed"] == true));
}

#[test]
fn eigen_evaluates_prefixes() {
    let long = vec!["1"; 400].join(",");
    let o = ruelle(&[
        "eigen", "--gamma", "3", "--i-max", "4", "--tol", "0.01", "--prefix", &long, "--prefix",
        "1,-1",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let evals = json(&o)["result"]["evaluations"].clone();
    assert!(evals[0]["h"]["log_value"].as_f64().unwrap() > 0.0);
    assert!(evals[1]["h"]["error"]
        .as_str()
        .unwrap()
        .contains("prefix too short"));
}
