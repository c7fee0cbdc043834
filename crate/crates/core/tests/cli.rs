use std::process::{Command, Output};

fn nls(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nls"))
        .args(args)
        .env("NLS_THREADS", "2")
        .output()
        .expect("spawn nls")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

const SMALL_SOLVE: &[&str] = &["solve", "--cells", "64", "--tau", "0.01", "--tend", "0.03"];

#[test]
fn no_arguments_is_usage_error() {
    assert_eq!(nls(&[]).status.code(), Some(1));
}

#[test]
fn help_and_version_exit_zero() {
    let o = nls(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("solve"));
    assert_eq!(nls(&["--version"]).status.code(), Some(0));
}

#[test]
fn bad_values_exit_one() {
    assert_eq!(nls(&["solve", "--scheme", "rk4"]).status.code(), Some(1));
    assert_eq!(nls(&["solve", "--tau", "-1"]).status.code(), Some(1));
    assert_eq!(nls(&["solve", "--bogus", "1"]).status.code(), Some(1));
}

#[test]
fn solve_writes_one_row_per_step() {
    let o = nls(SMALL_SOLVE);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = parse_csv(&stdout(&o));
    assert_eq!(header[0], "step");
    assert_eq!(rows.len(), 3);
    let t: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(t.windows(2).all(|w| w[1] > w[0]));
    assert!((t[2] - 0.03).abs() < 1e-12);
}

#[test]
fn csv_floats_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let mut args = SMALL_SOLVE.to_vec();
    let p = path.to_str().unwrap();
    args.extend(["--out", p]);
    assert_eq!(nls(&args).status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let (_, rows) = parse_csv(&text);
    for row in &rows {
        for cell in &row[1..7] {
            let x: f64 = cell.parse().unwrap();
            assert_eq!(x.to_bits(), format!("{x:.16e}").parse::<f64>().unwrap().to_bits());
            assert_eq!(&format!("{x:.16e}"), cell);
        }
    }
}

#[test]
fn output_is_deterministic() {
    assert_eq!(stdout(&nls(SMALL_SOLVE)), stdout(&nls(SMALL_SOLVE)));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small run\ncells = 64\ntau = 0.01\ntend = 0.05\n").unwrap();
    let c = cfg.to_str().unwrap();

    let (_, rows) = parse_csv(&stdout(&nls(&["solve", "--config", c])));
    assert_eq!(rows.len(), 5);
    let (_, rows) = parse_csv(&stdout(&nls(&["solve", "--config", c, "--tend", "0.02"])));
    assert_eq!(rows.len(), 2);
}

#[test]
fn malformed_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "cells 64\n").unwrap();
    let o = nls(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
}

#[test]
fn fixed_point_failure_exits_two() {
    let o = nls(&["solve", "--cells", "64", "--tau", "0.01", "--tend", "0.03", "--max-iters", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dispersion_table_has_orders() {
    let o = nls(&["dispersion", "--scheme", "mbdf2", "--k", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = parse_csv(&stdout(&o));
    assert_eq!(rows.len(), 3);
    let col = header.iter().position(|h| h == "order").unwrap();
    let order: f64 = rows[2][col].parse().unwrap();
    assert!((order - 2.0).abs() < 1e-3, "{order}");
}
