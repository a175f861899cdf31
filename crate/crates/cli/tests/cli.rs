use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_rindler-entropy");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("RINDLER_ENTROPY_THREADS").output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn records(csv_text: &str) -> (csv::StringRecord, Vec<csv::StringRecord>) {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    let header = r.headers().unwrap().clone();
    let rows = r.records().map(|x| x.unwrap()).collect();
    (header, rows)
}

fn column(header: &csv::StringRecord, name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn error_record(out: &Output) -> serde_json::Value {
    serde_json::from_slice(out.stderr.trim_ascii()).unwrap()
}

// Sum over Fock levels of the accelerated GHZ2 spectra, in plain floats.
fn ghz2_sum(theta: f64, lambda: f64, q: f64) -> f64 {
    let l2 = lambda * lambda;
    let (c2, s2) = (theta.cos().powi(2), theta.sin().powi(2));
    let (mut joint, mut marginal) = (0.0, 0.0);
    for n in 0..10_000 {
        let w = l2.powi(n) * (1.0 - l2);
        if w == 0.0 {
            break;
        }
        let n = n as f64;
        joint += (w * (c2 + s2 * (n + 1.0) * (1.0 - l2))).powf(q);
        marginal += (w * (c2 + s2 * n * (1.0 - l2) / l2)).powf(q);
    }
    (1.0 - joint / marginal) / (q - 1.0)
}

#[test]
fn pure_ghz_entropy_matches_direct_sum() {
    for (lambda, q) in [(0.5, 2.0), (0.3, 4.0), (0.8, 1.5)] {
        let out = stdout(&run(&["entropy", "--family", "pure-ghz", "--n", "2", "--theta", "pi/4", "--lambda", &lambda.to_string(), "--q", &q.to_string()]));
        let (h, rows) = records(&out);
        assert_eq!(rows.len(), 1);
        let s: f64 = rows[0][column(&h, "S")].parse().unwrap();
        let expected = ghz2_sum(std::f64::consts::FRAC_PI_4, lambda, q);
        assert!(s < 0.0);
        assert!((s - expected).abs() <= 1e-8 * expected.abs(), "{s} vs {expected}");
        assert_eq!(&rows[0][column(&h, "path")], "analytic");
    }
}

#[test]
fn fully_mixed_ghz_is_separable() {
    let out = stdout(&run(&["entropy", "--family", "mixed-ghz", "--n", "2", "--p", "1", "--lambda", "0.5", "--q", "2"]));
    let (h, rows) = records(&out);
    let s: f64 = rows[0][column(&h, "S")].parse().unwrap();
    assert!(s > 0.0);
    assert_eq!(&rows[0][column(&h, "path")], "numeric");
}

#[test]
fn csv_round_trip_is_byte_identical() {
    let out = stdout(&run(&["sweep", "--family", "mixed-w", "--n", "3", "--lambda-grid", "0.1:0.9:5", "--p-grid", "0,0.3,0.6", "--q", "2"]));
    let (h, rows) = records(&out);
    assert_eq!(rows.len(), 15);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&h).unwrap();
    for r in &rows {
        w.write_record(r).unwrap();
    }
    assert_eq!(String::from_utf8(w.into_inner().unwrap()).unwrap(), out);
}

#[test]
fn json_lines_carry_the_same_values() {
    let csv_out = stdout(&run(&["sweep", "--family", "pure-w3", "--n", "3", "--lambda-grid", "0.2,0.6", "--q-schedule", "2,4"]));
    let json_out = stdout(&run(&["--format", "json", "sweep", "--family", "pure-w3", "--n", "3", "--lambda-grid", "0.2,0.6", "--q-schedule", "2,4"]));
    let (h, rows) = records(&csv_out);
    let objs: Vec<serde_json::Value> = json_out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(objs.len(), rows.len());
    for (r, o) in rows.iter().zip(&objs) {
        let s: f64 = r[column(&h, "S")].parse().unwrap();
        assert!((s - o["S"].as_f64().unwrap()).abs() <= 1e-11 * s.abs().max(1.0));
        assert!(r[column(&h, "p")].is_empty());
    }
}

#[test]
fn invalid_input_exits_2_with_json_record() {
    for args in [
        &["entropy", "--family", "mixed-ghz", "--n", "2", "--p", "2", "--lambda", "0.5", "--q", "2"][..],
        &["entropy", "--family", "pure-ghz", "--n", "2", "--lambda", "1.0", "--q", "2"],
        &["entropy", "--family", "pure-ghz", "--n", "2", "--lambda", "0.5", "--q", "-1"],
        &["entropy", "--family", "nope", "--lambda", "0.5", "--q", "2"],
        &["--threads", "0", "entropy", "--family", "pure-ghz", "--n", "2", "--lambda", "0.5", "--q", "2"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let rec = error_record(&out);
        assert_eq!(rec["exit_code"], 2);
        assert!(rec["error"].is_string() && rec["message"].is_string());
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn truncation_failure_exits_3_with_context() {
    let out = run(&["entropy", "--family", "pure-ghz", "--n", "2", "--lambda", "0.9", "--q", "2", "--n-max", "3", "--path", "numeric"]);
    assert_eq!(out.status.code(), Some(3));
    let rec = error_record(&out);
    assert_eq!(rec["error"], "trace_deficit");
    assert_eq!(rec["exit_code"], 3);
    assert_eq!(rec["lambda"], 0.9);
    assert_eq!(rec["q"], 2.0);
}

#[test]
fn reproduce_ghz_offsets_are_close_to_table() {
    let out = stdout(&run(&["reproduce"]));
    let (h, rows) = records(&out);
    assert_eq!(rows.len(), 8);
    let targets = [(2, 2.0 / 3.0), (3, 0.56), (4, 0.53), (5, 0.51)];
    for (n, b) in targets {
        let row = rows
            .iter()
            .find(|r| &r[column(&h, "column")] == "ghz" && r[column(&h, "n")] == *n.to_string())
            .unwrap();
        let got: f64 = row[column(&h, "b")].parse().unwrap();
        assert!((got - b).abs() <= 0.02, "N = {n}: b = {got}");
        assert_eq!(&row[column(&h, "pure")], "NS");
    }
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let args = ["transition", "--family", "mixed-w", "--n", "3", "--lambda-grid", "0.05:0.95:19", "--q-schedule", "10,50,150"];
    let single = stdout(&run(&[&["--threads", "1"][..], &args].concat()));
    for t in ["2", "4", "7"] {
        assert_eq!(stdout(&run(&[&["--threads", t][..], &args].concat())), single);
    }
    let via_env = Command::new(BIN).args(args).env("RINDLER_ENTROPY_THREADS", "3").output().unwrap();
    assert_eq!(stdout(&via_env), single);
}

#[test]
fn thread_env_var_is_validated() {
    let out = Command::new(BIN)
        .args(["entropy", "--family", "pure-ghz", "--n", "2", "--lambda", "0.5", "--q", "2"])
        .env("RINDLER_ENTROPY_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let ok = Command::new(BIN)
        .args(["--threads", "2", "entropy", "--family", "pure-ghz", "--n", "2", "--lambda", "0.5", "--q", "2"])
        .env("RINDLER_ENTROPY_THREADS", "many")
        .output()
        .unwrap();
    assert!(ok.status.success(), "flag wins over the environment");
}

#[test]
fn transition_file_fits_like_direct_fit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let path_str = path.to_str().unwrap();
    let grid = "0.05:0.95:19";
    stdout(&run(&["--output", path_str, "transition", "--family", "mixed-ghz", "--n", "2", "--lambda-grid", grid, "--q", "150"]));
    let from_file = stdout(&run(&["fit", "--input", path_str]));
    let direct = stdout(&run(&["fit", "--family", "mixed-ghz", "--n", "2", "--lambda-grid", grid, "--q", "150"]));
    let (h, file_rows) = records(&from_file);
    let (_, direct_rows) = records(&direct);
    for name in ["b", "x_exp", "y_exp"] {
        let a: f64 = file_rows[0][column(&h, name)].parse().unwrap();
        let d: f64 = direct_rows[0][column(&h, name)].parse().unwrap();
        assert!((a - d).abs() < 1e-8, "{name}: {a} vs {d}");
    }
    assert_eq!(&file_rows[0][column(&h, "n_points")], "19");
    let b: f64 = file_rows[0][column(&h, "b")].parse().unwrap();
    assert!((b - 2.0 / 3.0).abs() < 0.02);
}

#[test]
fn help_and_unknown_flags() {
    assert!(run(&["--help"]).status.success());
    let out = run(&["entropy", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["error"], "usage");
}
