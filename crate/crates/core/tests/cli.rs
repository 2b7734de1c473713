use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmwave-ia"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn validate_passes() {
    let o = bin(&["validate"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows = data_lines(&text);
    assert_eq!(rows[0], "check,expected,observed,status");
    assert_eq!(rows.len(), 1 + 18);
    assert!(rows[1..].iter().all(|r| r.ends_with(",PASS")), "{text}");
}

#[test]
fn table3_slot_column() {
    let o = bin(&["table3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows = data_lines(&text);
    let slots: Vec<&str> = rows[1..]
        .iter()
        .map(|r| r.split(',').nth(3).unwrap())
        .collect();
    assert_eq!(slots, ["80", "144", "28", "44", "32", "64"]);
    assert!(rows[3].starts_with("iterative 64x4,64,4,28,>3160,>1769.600,160,89.600"));
    assert!(rows[2].contains(",125,360.000,10,28.800"));
}

#[test]
fn header_echoes_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", "[budget]\ntau_db = -3.0\n");
    let o = bin(&[
        "sweep-distance",
        "--config",
        &cfg,
        "--distance",
        "50",
        "--trials",
        "200",
        "--seed",
        "9",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(
        text.contains("# overrides = budget.tau_db, run.seed, run.trials"),
        "{text}"
    );
    assert!(text.contains("# budget.tau_db = -3.0"));
    assert!(text.contains("# seed = 9"));
    let rows = data_lines(&text);
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("exhaustive 64x16,64,16,144,50,0.00001,"));
    assert!(rows[1].ends_with(",28.800,9,200"));
}

#[test]
fn sweep_tsig_default_grid() {
    let o = bin(&[
        "sweep-tsig",
        "--procedure",
        "iterative",
        "--ue-beams",
        "4",
        "--trials",
        "300",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows = data_lines(&text);
    assert_eq!(rows.len(), 11);
    assert!(rows[1..]
        .iter()
        .all(|r| r.starts_with("iterative 64x4,64,4,28,95,")));
    let pmd: Vec<f64> = rows[1..]
        .iter()
        .map(|r| r.split(',').nth(6).unwrap().parse().unwrap())
        .collect();
    assert!(pmd.windows(2).all(|w| w[1] <= w[0]), "{pmd:?}");
}

#[test]
fn invalid_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[run]\nphi_ov = 0.0\n");
    let o = bin(&["validate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("run.phi_ov"), "{err}");

    let o = bin(&["validate", "--config", "/nonexistent/cfg.toml"]);
    assert_eq!(o.status.code(), Some(2));
    let o = bin(&["sweep-distance", "--procedure", "random"]);
    assert_eq!(o.status.code(), Some(2));
    let o = bin(&["sweep-distance", "--ue-beams", "6"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unreachable_target_exits_3_with_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("min.csv");
    let o = bin(&[
        "min-tsig",
        "--distance",
        "35,400",
        "--trials",
        "2000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    let text = std::fs::read_to_string(&out).unwrap();
    let rows = data_lines(&text);
    assert_eq!(rows.len(), 3);
    assert!(rows[1].contains(",35,0.01,0.00001,"), "{}", rows[1]);
    assert!(rows[2].contains(",400,0.01,unreachable,"), "{}", rows[2]);
}

#[test]
fn unwritable_output_exits_4() {
    let o = bin(&["validate", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn seed_controls_body() {
    let run = |seed: &str| {
        stdout(&bin(&[
            "sweep-distance",
            "--distance",
            "120",
            "--trials",
            "3000",
            "--seed",
            seed,
        ]))
    };
    let (a, b, c) = (run("5"), run("5"), run("6"));
    assert_eq!(a, b);
    assert_ne!(data_lines(&a)[1], data_lines(&c)[1]);
}
