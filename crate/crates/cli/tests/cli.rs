//! End-to-end checks of the command-line front end: deterministic bytes,
//! CSV schemas, defaults, config-file handling, and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_padetime"))
}

fn run_ok(args: &[&str]) -> String {
    let out = bin().args(args).output().expect("spawn");
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 csv")
}

fn run_raw(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines
        .next()
        .expect("header")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn col_index(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn tmp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("padetime-cli-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn spectral_rows_and_determinism() {
    let args = [
        "spectral", "--M", "3", "--rho-inf", "0.8", "--x-min", "1e-3", "--x-max", "1e3",
        "--points", "400",
    ];
    let first = run_ok(&args);
    let second = run_ok(&args);
    assert_eq!(first, second, "repeated runs must be byte-identical");

    let (header, rows) = parse_csv(&first);
    assert_eq!(header, ["x", "rho", "phase", "period_error", "damping_ratio"]);
    assert_eq!(rows.len(), 400);

    let xi = col_index(&header, "x");
    let mut prev = 0.0;
    for row in &rows {
        let x: f64 = row[xi].parse().unwrap();
        assert!(x > prev);
        prev = x;
    }
}

#[test]
fn spectral_diagonal_rho_is_exactly_one() {
    let text = run_ok(&["spectral", "--M", "3", "--rho-inf", "1.0", "--points", "50"]);
    let (header, rows) = parse_csv(&text);
    let ri = col_index(&header, "rho");
    for row in &rows {
        assert_eq!(row[ri], "1.00000000000e0", "x = {}", row[0]);
    }
}

#[test]
fn spectral_hht_column_reaches_the_limit() {
    let text = run_ok(&[
        "spectral", "--M", "2", "--rho-inf", "0.53846", "--hht-alpha", "-0.3", "--x-min",
        "1e-3", "--x-max", "1e4", "--points", "60",
    ]);
    let (header, rows) = parse_csv(&text);
    let hi = col_index(&header, "hht_rho");
    let last: f64 = rows.last().unwrap()[hi].parse().unwrap();
    assert!((last - 0.53846).abs() <= 1e-3, "hht_rho tail {last}");
    // phase columns go empty past x = 1 under the HHT convention
    let pi = col_index(&header, "hht_phase");
    let xi = col_index(&header, "x");
    for row in &rows {
        let x: f64 = row[xi].parse().unwrap();
        if x > 1.0 {
            assert!(row[pi].is_empty(), "x={x}");
        }
    }
}

#[test]
fn simulate_row_count_matches_duration() {
    let text = run_ok(&[
        "simulate", "--problem", "rod", "--elements", "200", "--M", "2", "--rho-inf", "0.8",
        "--cfl", "20", "--duration", "0.004",
    ]);
    let (header, rows) = parse_csv(&text);
    assert_eq!(header[0], "t");
    // dt = 20 * 1 / c, so rows = round(0.004 * c / 20)
    let c = (3e7f64 / 0.00073).sqrt();
    let want = (0.004 * c / 20.0).round() as usize;
    assert_eq!(rows.len(), want);
}

#[test]
fn simulate_three_dof_defaults() {
    let text = run_ok(&["simulate", "--problem", "three-dof", "--duration", "1.4"]);
    let (header, rows) = parse_csv(&text);
    assert_eq!(
        header,
        ["t", "d0_u", "d0_v", "d0_a", "d1_u", "d1_v", "d1_a"]
    );
    // default step size 0.14
    let t0: f64 = rows[0][0].parse().unwrap();
    assert!((t0 - 0.14).abs() < 1e-12);
    assert_eq!(rows.len(), 10);

    // the defaults are exactly rho_inf = 0, M = 3: spelling them out must
    // reproduce the same bytes
    let explicit = run_ok(&[
        "simulate", "--problem", "three-dof", "--duration", "1.4", "--M", "3", "--rho-inf",
        "0", "--dt", "0.14",
    ]);
    assert_eq!(text, explicit);
}

#[test]
fn simulate_scalar_wave_reference_columns_match_library() {
    let text = run_ok(&[
        "simulate", "--problem", "scalar-wave", "--elements", "8", "--M", "2", "--cfl", "2",
        "--duration", "0.5", "--reference",
    ]);
    let (header, rows) = parse_csv(&text);
    let ti = col_index(&header, "t");
    let ui = col_index(&header, "d24_ref_u");
    let vi = col_index(&header, "d24_ref_v");
    for row in &rows {
        let t: f64 = row[ti].parse().unwrap();
        let (u_want, v_want) =
            padetime::problems::scalar_wave_reference(0.5, 0.5, t, 199, 1.0, 1.0, 1.0);
        let u: f64 = row[ui].parse().unwrap();
        let v: f64 = row[vi].parse().unwrap();
        assert!((u - u_want).abs() <= 1e-10 * u_want.abs().max(1.0));
        assert!((v - v_want).abs() <= 1e-10 * v_want.abs().max(1.0));
    }
}

#[test]
fn convergence_orders() {
    for (order, rho, want) in [(1usize, "1.0", 2.0), (2, "1.0", 4.0), (2, "0.8", 3.0)] {
        let text = run_ok(&[
            "convergence", "--M", &order.to_string(), "--rho-inf", rho,
        ]);
        let (header, rows) = parse_csv(&text);
        assert_eq!(header, ["dt", "error", "order_estimate"]);
        assert!(rows[0][2].is_empty(), "first row carries no estimate");
        let last: f64 = rows.last().unwrap()[2].parse().unwrap();
        assert!(
            (last - want).abs() <= 0.25,
            "M={order} rho={rho}: terminal order {last}"
        );
    }
}

#[test]
fn compare_matches_between_second_order_methods() {
    // same dt, no dissipation on either side: the two second-order methods
    // agree to their common order
    let text = run_ok(&[
        "compare", "--problem", "three-dof", "--M", "1", "--rho-inf", "1.0", "--hht-alpha",
        "0", "--dt", "0.01", "--duration", "0.1",
    ]);
    let (header, rows) = parse_csv(&text);
    let pu = col_index(&header, "pade_d1_u");
    let hu = col_index(&header, "hht_d1_u");
    let ht = col_index(&header, "hht_t");
    let last = rows.last().unwrap();
    let t: f64 = last[0].parse().unwrap();
    let t_hht: f64 = last[ht].parse().unwrap();
    assert!((t - 0.1).abs() < 1e-12);
    assert_eq!(t, t_hht, "same grid, nearest step is the same step");
    let a: f64 = last[pu].parse().unwrap();
    let b: f64 = last[hu].parse().unwrap();
    assert!((a - b).abs() <= 1e-2 * a.abs().max(1e-12), "pade {a} vs hht {b}");
}

#[test]
fn compare_rod_defaults_put_hht_on_a_finer_grid() {
    let text = run_ok(&[
        "compare", "--problem", "rod", "--elements", "50", "--M", "2", "--rho-inf", "0.8",
        "--duration", "0.002",
    ]);
    let (header, rows) = parse_csv(&text);
    let ht = col_index(&header, "hht_t");
    // scheme at CFL = 10 L = 10, reference at CFL = 1: the matched HHT
    // instants must sit within half an HHT step of each row's time
    let c = (3e7f64 / 0.00073).sqrt();
    let hht_dt = 4.0 / c;
    for row in &rows {
        let t: f64 = row[0].parse().unwrap();
        let t_hht: f64 = row[ht].parse().unwrap();
        assert!((t - t_hht).abs() <= hht_dt / 2.0 + 1e-12, "t={t} matched {t_hht}");
    }
    // ten scheme steps over the duration
    assert_eq!(rows.len(), 10);
}

#[test]
fn config_file_supplies_values_and_flags_override() {
    let path = tmp_path("spectral.cfg");
    std::fs::write(
        &path,
        "M = 3\nrho-inf = 1.0\npoints = 10\nx-min = 1e-2\nx-max = 1e2 # inline comment\n",
    )
    .unwrap();
    let from_file = run_ok(&["spectral", "--config", path.to_str().unwrap()]);
    let (_, rows) = parse_csv(&from_file);
    assert_eq!(rows.len(), 10);

    let overridden = run_ok(&[
        "spectral", "--config", path.to_str().unwrap(), "--points", "7",
    ]);
    let (_, rows) = parse_csv(&overridden);
    assert_eq!(rows.len(), 7);
    std::fs::remove_file(&path).ok();
}

#[test]
fn usage_errors_exit_with_code_2() {
    let cases: &[&[&str]] = &[
        &["spectral"],                                              // missing M
        &["spectral", "--M", "3", "--x-min", "10", "--x-max", "1"], // bad range
        &["simulate", "--problem", "bimaterial"],                   // missing duration
        &["simulate", "--problem", "rod", "--dt", "1e-5", "--cfl", "10", "--duration", "1e-3"],
        &["simulate", "--problem", "three-dof", "--cfl", "10", "--duration", "1.0"],
        &["compare", "--problem", "rod", "--M", "2"],               // missing duration
        &["convergence"],                                           // missing M
        &["convergence", "--M", "2", "--levels", "1"],
    ];
    for args in cases {
        let out = run_raw(args);
        assert_eq!(out.status.code(), Some(2), "args {args:?}");
    }
}

#[test]
fn file_output_matches_stdout() {
    let path = tmp_path("out.csv");
    let args_file = [
        "spectral", "--M", "2", "--rho-inf", "0.5", "--points", "20", "--out",
        path.to_str().unwrap(),
    ];
    let out = run_raw(&args_file);
    assert!(out.status.success());
    let from_file = std::fs::read_to_string(&path).unwrap();
    let from_stdout = run_ok(&["spectral", "--M", "2", "--rho-inf", "0.5", "--points", "20"]);
    assert_eq!(from_file, from_stdout);
    std::fs::remove_file(&path).ok();
}
