use std::path::Path;
use std::process::Command;

fn poro(args: &[&str], dir: &Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_poro"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn convergence_writes_table_and_echo() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = poro(
        &["convergence", "--problem", "example1", "--h-max", "1/2", "--levels", "2", "--out", "o"],
        dir.path(),
    );
    assert_eq!(code, 0);
    assert!(stdout.contains("convergence_example1_theta1.csv"));
    let csv = std::fs::read_to_string(dir.path().join("o/convergence_example1_theta1.csv")).unwrap();
    assert!(csv.starts_with("# poro "));
    assert!(csv.contains("#   levels = 2\n"));
    let echo = std::fs::read_to_string(dir.path().join("o/config.txt")).unwrap();
    assert!(echo.starts_with("command = convergence\nproblem = example1\n"));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = poro(&["convergence", "--problem", "example1", "--theta", "2", "--out", "o"], dir.path());
    assert_eq!(code, 1);
    assert!(err.contains("{0, 1}"), "{err}");
    std::fs::write(dir.path().join("bad.cfg"), "edema.young = 9010\nedema.colour = red\n").unwrap();
    let (code, _, err) = poro(&["edema", "--config", "bad.cfg", "--out", "o"], dir.path());
    assert_eq!(code, 1);
    assert!(err.contains("line 2") && err.contains("edema.colour"), "{err}");
    let (code, _, _) = poro(&["sweep", "--param", "nu", "--multipliers", "0.3,0.5", "--out", "o"], dir.path());
    assert_eq!(code, 1);
}

#[test]
fn solver_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("gmres.cfg"), "solver = gmres\ntol = 1e-30\nmax_iter = 1\n").unwrap();
    let (code, _, err) = poro(
        &["run", "--problem", "example1", "--h", "1/2", "--dt", "1/4", "--config", "gmres.cfg", "--out", "o"],
        dir.path(),
    );
    assert_eq!(code, 2, "{err}");
}

#[test]
fn single_run_writes_fields() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = poro(&["run", "--problem", "exactness", "--h", "1/4", "--dt", "1/4", "--out", "o"], dir.path());
    assert_eq!(code, 0, "{err}");
    let vtk = std::fs::read_to_string(dir.path().join("o/run_exactness.vtk")).unwrap();
    let d = poro::vtk::parse_vtk(&vtk).unwrap();
    assert_eq!(d.points.len(), 25);
    let csv = std::fs::read_to_string(dir.path().join("o/run_exactness.csv")).unwrap();
    let (_, rows) = poro::csv::parse_table(&csv).unwrap();
    let p_l2: f64 = rows[0][7].parse().unwrap();
    assert!(p_l2 < 1e-9, "{p_l2}");
}

#[test]
fn edema_on_a_small_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "edema.geometry = annulus 20 62 4 24\nedema.dt = 30\nedema.final_time = 60\nexport_vtk = true\n";
    std::fs::write(dir.path().join("e.cfg"), cfg).unwrap();
    let (code, _, err) = poro(&["edema", "--config", "e.cfg", "--out", "o"], dir.path());
    assert_eq!(code, 0, "{err}");
    for f in ["edema_normal.csv", "edema_injury.csv", "edema_injury.vtk"] {
        assert!(dir.path().join("o").join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("o/edema_injury.csv")).unwrap();
    let (h, rows) = poro::csv::parse_table(&csv).unwrap();
    assert_eq!(h, ["t_min", "p_max_Pa", "u_max_mm"]);
    assert_eq!(rows.len(), 3);
}
