use std::path::PathBuf;
use std::process::{Command, Output};

fn pairs(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../pairs")
        .join(name)
}

fn symrd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symrd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(o)).unwrap()
}

#[test]
fn validate_reports_exact_constants() {
    let p = pairs("ternary_hamming.json");
    let v = json(&symrd(&["validate", "--pair", p.to_str().unwrap()]));
    assert_eq!(v["d_star"], "2/3");
    assert_eq!(v["sigma2"], "2/9");
    assert_eq!(v["size"], 3);
}

#[test]
fn rdcurve_csv_has_unit_labelled_columns() {
    let out = stdout(&symrd(&["rdcurve", "--points", "3"]));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("D,R_nats,R_bits,lambda_star,slope"));
    let mid: Vec<f64> = lines
        .nth(1)
        .unwrap()
        .split(',')
        .map(|s| s.parse().unwrap())
        .collect();
    // Binary Hamming at D = 1/4: ln 2 - h(1/4), slope -ln 3.
    assert_eq!(mid[0], 0.25);
    assert!((mid[1] - 0.130812035941137).abs() < 1e-12);
    assert!((mid[1] / mid[2] - std::f64::consts::LN_2).abs() < 1e-12);
    assert!((mid[4] + 3f64.ln()).abs() < 1e-12);
}

#[test]
fn ballprob_is_exact() {
    let v = json(&symrd(&["ballprob", "--n", "16", "--D", "1/4", "--exact"]));
    assert_eq!(v["prob_rational"], "2517/65536");
    assert_eq!(v["approx"], false);
    let v = json(&symrd(&["ballprob", "--n", "16", "--D", "1/4", "--log"]));
    assert_eq!(v["approx"], true);
    assert!((v["log_prob_nats"].as_f64().unwrap() - (2517f64 / 65536.0).ln()).abs() < 1e-9);
}

#[test]
fn ldbounds_brackets_the_exact_value() {
    let v = json(&symrd(&["ldbounds", "--n", "500", "--D", "1/4"]));
    let (lo, ex, hi) = (
        v["log_lower_nats"].as_f64().unwrap(),
        v["log_exact_nats"].as_f64().unwrap(),
        v["log_upper_nats"].as_f64().unwrap(),
    );
    assert!(lo <= ex && ex <= hi);
    assert_eq!(v["n0"], 418);
}

#[test]
fn encode_decode_roundtrip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src.txt");
    let bin = dir.path().join("msg.symrd");
    let rec = dir.path().join("rec.txt");
    let p = pairs("ternary_hamming.json");
    let p = p.to_str().unwrap();
    let text = "abcabbacbcaacbbcabacbbca";
    std::fs::write(&src, text).unwrap();
    let s = |p: &PathBuf| p.to_str().unwrap().to_owned();
    let v = json(&symrd(&[
        "encode",
        "--pair",
        p,
        "--n",
        "12",
        "--D",
        "1/3",
        "--scheme",
        "elias",
        "--seed",
        "7",
        "--input",
        &s(&src),
        "--output",
        &s(&bin),
    ]));
    assert_eq!(v["blocks"], 2);
    assert_eq!(v["header_bytes"], 87);
    let bytes = std::fs::read(&bin).unwrap();
    assert_eq!(&bytes[..6], b"SYMRD1");
    stdout(&symrd(&[
        "decode",
        "--pair",
        p,
        "--input",
        &s(&bin),
        "--output",
        &s(&rec),
    ]));
    let out = std::fs::read_to_string(&rec).unwrap();
    let out = out.trim();
    assert_eq!(out.len(), text.len());
    // Each block of 12 is within 4 mismatches.
    for (a, b) in text.as_bytes().chunks(12).zip(out.as_bytes().chunks(12)) {
        assert!(a.iter().zip(b).filter(|(x, y)| x != y).count() <= 4);
    }
    // The container is bound to its pair.
    let wrong = symrd(&["decode", "--input", &s(&bin), "--output", &s(&rec)]);
    assert!(!wrong.status.success());
}

#[test]
fn sweep_and_converse_tables() {
    let out = stdout(&symrd(&[
        "redundancy-sweep",
        "--D",
        "1/4",
        "--n-grid",
        "64,128",
    ]));
    let header = out.lines().next().unwrap();
    assert!(header.starts_with("n,p_exact,ln_p,h_i_nats,e_len_golomb_bits,e_len_elias_bits,r_i,"));
    assert_eq!(out.lines().count(), 3);
    let out = stdout(&symrd(&[
        "converse-bound",
        "--D",
        "1/4",
        "--nmin",
        "100",
        "--nmax",
        "110",
        "--step",
        "5",
    ]));
    let rows: Vec<Vec<String>> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    for r in rows {
        let lower: f64 = r[1].parse().unwrap();
        let ach: f64 = r[2].parse().unwrap();
        assert!(lower <= ach);
    }
}

#[test]
fn same_seed_same_bytes() {
    let args = [
        "redundancy-sweep",
        "--D",
        "1/4",
        "--n-grid",
        "16,32",
        "--trials",
        "50",
        "--seed",
        "4",
    ];
    assert_eq!(stdout(&symrd(&args)), stdout(&symrd(&args)));
}

#[test]
fn verify_all_passes_and_flags_tampering() {
    let ok = symrd(&[
        "verify-all",
        "--pair",
        pairs("binary_hamming.json").to_str().unwrap(),
    ]);
    let text = stdout(&ok);
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
    let bad = symrd(&[
        "verify-all",
        "--pair",
        pairs("tampered.json").to_str().unwrap(),
    ]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).starts_with("FAIL [model] pair validates"));
}

#[test]
fn straightline_demo_small() {
    let v = json(&symrd(&[
        "straightline-demo",
        "--n-grid",
        "32",
        "--trials",
        "200",
        "--out",
        "json",
    ]));
    assert!((v["segment"]["d_end"].as_f64().unwrap() - 0.4).abs() < 1e-15);
    assert_eq!(v["rows"][0]["mode"], "encoded");
}

#[test]
fn bad_arguments_fail_cleanly() {
    let o = symrd(&["ballprob", "--n", "8", "--D", "0.25"]);
    assert!(!o.status.success());
    let o = symrd(&[
        "encode", "--n", "8", "--D", "1/2", "--input", "x", "--output", "y",
    ]);
    assert_eq!(o.status.code(), Some(2));
}
