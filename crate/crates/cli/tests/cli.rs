use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varqfi"))
        .args(args)
        .output()
        .expect("run varqfi")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("varqfi-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn bound_reports_documented_values() {
    let o = run(&["bound", "eq16", "mean_n=2", "var_n=12", "eta=0.5"]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "eq16 mean_n=2 var_n=12 eta=0.5 value=6.85714285714\n"
    );

    let o = run(&["bound", "eq17", "r=0", "eta=0.9"]);
    assert!(stdout(&o).trim_end().ends_with("value=0"));
}

#[test]
fn oracle_lossless_pure_state() {
    let o = run(&["oracle", "r=0.3", "eta=1", "nT=0", "lambda=0"]);
    assert!(o.status.success());
    let line = stdout(&o);
    let value: f64 = line
        .trim()
        .rsplit_once("value=")
        .unwrap()
        .1
        .parse()
        .unwrap();
    let n = 0.3f64.sinh().powi(2);
    let four_var = 8.0 * n * (n + 1.0);
    assert!((value - four_var).abs() / four_var < 1e-5, "{line}");
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["bound", "eq99", "r=1"][..],
        &["bound", "eq15", "foo=1"],
        &["bound", "eq15", "mean_n=1"],
        &["bound", "eq15", "r=0.3", "eta=1.5"],
        &["fig1", "--n-min", "10", "--n-max", "1"],
        &["fig3", "--flux-points", "1"],
        &["fig3", "--eta", "0"],
        &["fig1", "--plot", "x.gp"],
        &["fig1", "--tol-rel", "0"],
        &["fig1", "--threads", "0"],
    ] {
        let o = run(args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let o = run(&["bound", "nope"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("eq15, eq16, eq17, eq21, eq22, eq25"));
}

#[test]
fn numerical_failure_exits_with_three() {
    // squeezed vacuum too large for the product-space cap
    let o = run(&["oracle", "r=3", "eta=0.5", "nT=5"]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn csv_format() {
    let o = run(&["fig1", "--nt", "10", "--n-points", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "mean_n,n_T,cq_min,exact_qfi");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0.1,10,"));
    assert!(lines[3].starts_with("100,10,"));
}

#[test]
fn fig2_oracle_column_is_partial() {
    let o = run(&["fig2", "--oracle", "--r-points", "6", "--r-max", "1.05"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "mean_n,cq_min,im_opt,oracle_qfi");
    // r = 0.05, 0.25, ..., 1.05: the last two rows exceed the default oracle range
    assert!(lines[1..5].iter().all(|l| !l.ends_with(',')));
    assert!(lines[5..].iter().all(|l| l.ends_with(',')));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));

    let o = run(&["fig2", "--r-points", "3"]);
    assert_eq!(stdout(&o).lines().next(), Some("mean_n,cq_min,im_opt"));
}

#[test]
fn fig3_includes_lossless_reference() {
    let o = run(&[
        "fig3",
        "--flux-min",
        "100",
        "--flux-max",
        "1000",
        "--flux-points",
        "2",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "flux_N,eta,mse_bound,beta_star,error");
    assert_eq!(lines.len(), 5);
    assert!(lines[3].starts_with("100,1,") && lines[3].ends_with(",1,"));
}

#[test]
fn out_and_plot_files() {
    let dir = scratch("plot");
    let csv = dir.join("fig3.csv");
    let gp = dir.join("fig3.gp");
    let o = run(&[
        "fig3",
        "--flux-points",
        "3",
        "--out",
        csv.to_str().unwrap(),
        "--plot",
        gp.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let data = std::fs::read_to_string(&csv).unwrap();
    assert!(data.starts_with("flux_N,eta,mse_bound,beta_star,error\n"));
    let script = std::fs::read_to_string(&gp).unwrap();
    assert!(script.contains(csv.to_str().unwrap()));
    assert!(script.contains("set datafile separator ','"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = scratch("config");
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "# fig1 settings\nnt = 10\nn_points = 2\neta = 0.5\n").unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "fig1", "--eta", "0.8"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let reference = run(&["fig1", "--nt", "10", "--n-points", "2", "--eta", "0.8"]);
    assert_eq!(o.stdout, reference.stdout);

    std::fs::write(&cfg, "eta=0.5\nvar_n=12\n").unwrap();
    let o = run(&[
        "bound",
        "eq16",
        "--config",
        cfg.to_str().unwrap(),
        "mean_n=2",
    ]);
    assert!(stdout(&o).ends_with("value=6.85714285714\n"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn seed_is_accepted_and_ignored() {
    let a = run(&["fig1", "--n-points", "4", "--seed", "7"]);
    let b = run(&["fig1", "--n-points", "4"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}
