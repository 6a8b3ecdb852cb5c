use std::process::{Command, Output};

fn freeframe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freeframe"))
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .env_remove("FREEFRAME_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn frame_table_first_rows() {
    let o = freeframe(&["frame-table", "--max-n", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 5);
    assert_eq!(&rows[0][4], "");
    assert_eq!(rows[0][5].parse::<f64>().unwrap(), 0.04);
    let words: Vec<&str> = rows.iter().map(|r| &r[4]).collect();
    assert_eq!(words, ["", "a", "b", "A", "B"]);
}

#[test]
fn generator_sum_interval_contains_the_norm() {
    let o = freeframe(&["norm", "--element", "data/gen-sum.json", "--radius", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let (lo, hi) = (v["lower"].as_f64().unwrap(), v["upper"].as_f64().unwrap());
    let exact = 2.0 * 3f64.sqrt();
    assert!(lo <= exact && exact <= hi, "[{lo}, {hi}]");
    assert_eq!(v["radius"], 8);
}

#[test]
fn exit_codes() {
    assert_eq!(freeframe(&["--no-such-flag"]).status.code(), Some(1));
    assert_eq!(freeframe(&["--help"]).status.code(), Some(0));
    assert_eq!(freeframe(&["norm", "--element", "missing.json"]).status.code(), Some(1));
    assert_eq!(freeframe(&["--threads", "0", "params"]).status.code(), Some(1));
    let o = freeframe(&["frame-table", "--max-n", "100000000000"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn malformed_element_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, r#"{"level": 1, "terms": [{"word": "ax", "coeff": [1, 0]}]}"#).unwrap();
    let o = freeframe(&["norm", "--element", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn output_file_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("out.csv");
    let args = ["reconstruct", "--element", "data/gen-sum.json", "--m-list", "125,5038", "--radius", "4", "--seed", "3"];
    let mut with_out = args.to_vec();
    with_out.extend(["--output", p.to_str().unwrap()]);
    let o = freeframe(&with_out);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let written = std::fs::read_to_string(&p).unwrap();
    assert!(written.starts_with("m,l1_error,norm_lower,norm_upper\n"));
    assert_eq!(stdout(&freeframe(&args)), written);
    assert_eq!(stdout(&freeframe(&args)), written);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("run.conf");
    std::fs::write(&p, "# sweep settings\nformat = json\nradius = 3\n").unwrap();
    let o = freeframe(&["--config", p.to_str().unwrap(), "norm", "--element", "data/gen-sum.json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["radius"], 3);
    let o = freeframe(&["--config", p.to_str().unwrap(), "--radius", "2", "norm", "--element", "data/gen-sum.json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["radius"], 2);
}

#[test]
fn json_tables_are_single_documents() {
    let o = freeframe(&["params", "--k-max", "4", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schedule"].as_array().unwrap().len(), 4);
    assert!(v["schedule_sup_bound"].as_f64().unwrap() > 1.0);
    let o = freeframe(&["lebesgue", "--max-K", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn basis_norm_of_a_singleton() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.json");
    std::fs::write(&p, r#"{"level": 1, "entries": [{"index": 1, "coeff": [1, 0]}]}"#).unwrap();
    let o = freeframe(&["basis-norm", "--coeffs", p.to_str().unwrap(), "--radius", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    // x_1 is the identity, so |||e_1||| = ‖δ_e‖ = 1
    assert!(v["lower"].as_f64().unwrap() <= 1.0 + 1e-12 && v["upper"].as_f64().unwrap() >= 1.0 - 1e-12);
    let o = freeframe(&["basis-norm", "--coeffs", p.to_str().unwrap(), "--level", "2"]);
    assert_eq!(o.status.code(), Some(1));
}
