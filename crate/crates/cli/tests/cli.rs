use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hextop::export::{read_density_csv, read_history_csv};

fn hextop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hextop")).args(args).output().unwrap()
}

fn run_in(dir: &Path, extra: &[&str]) -> Output {
    let out = dir.to_str().unwrap();
    let mut args = vec!["run", "-q", "--hnex", "12", "--hney", "4", "--rfill", "0.48*sqrt3", "-o", out];
    args.extend_from_slice(extra);
    hextop(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_three_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mbb");
    let o = run_in(&out, &["--maxiter", "15"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("final obj="));

    let history = read_history_csv(out.join("history.csv")).unwrap();
    assert_eq!(history.len(), 15);
    assert!(history.iter().all(|r| (r.volume_fraction - 0.5).abs() < 1e-3));
    let density = read_density_csv(out.join("density.csv")).unwrap();
    assert_eq!(density.len(), 48);
    assert_eq!(density[0].element, 1);
    let svg = fs::read_to_string(out.join("design.svg")).unwrap();
    assert_eq!(svg.matches("<polygon").count(), 48);

    let mut names: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names, ["density.csv", "design.svg", "history.csv"]);
}

#[test]
fn progress_lines_unless_quiet() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = hextop(&["run", "--hnex", "6", "--hney", "2", "--rfill", "1.5", "--maxiter", "3", "-o", out]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 4);
}

#[test]
fn every_violation_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let o = run_in(&out, &["--ft", "3", "--volfrac", "1.5", "--penal", "0.5"]);
    assert!(!o.status.success());
    let err = stderr(&o);
    for needle in ["ft", "volfrac", "penal"] {
        assert!(err.contains(needle), "missing {needle} in {err}");
    }
    assert!(!out.exists());
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = hextop(&["run", "--radius", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_leaves_nothing_behind() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "not a directory").unwrap();
    let o = run_in(&blocker.join("out"), &["--maxiter", "2"]);
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("error:"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    assert_eq!(fs::read_to_string(&blocker).unwrap(), "not a directory");
}

#[test]
fn identical_arguments_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert!(run_in(out, &["--ft", "2", "--maxiter", "10"]).status.success());
    }
    for name in ["history.csv", "density.csv", "design.svg"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.cfg");
    fs::write(&config, "# small beam\nhnex = 8\nhney = 3\nrfill = 1.2*sqrt3\nmaxiter = 50\n").unwrap();
    let out = dir.path().join("out");
    let o = hextop(&[
        "run",
        "-q",
        "--config",
        config.to_str().unwrap(),
        "--maxiter",
        "4",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).trim_end().ends_with("iters=4"));
    assert_eq!(read_density_csv(out.join("density.csv")).unwrap().len(), 24);
}

#[test]
fn bad_config_line_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.cfg");
    fs::write(&config, "hnex = 8\nwidth = 3\n").unwrap();
    let o = hextop(&["run", "--config", config.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn custom_problem_file() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("beam.txt");
    fs::write(&problem, "load = 1 20.78 0.5 y -1\nclamp = left xy\nvoid_circle = 6 7 2.5\n").unwrap();
    let out = dir.path().join("out");
    let o = hextop(&[
        "run",
        "-q",
        "--problem",
        "custom",
        "--problem-file",
        problem.to_str().unwrap(),
        "--hnex",
        "12",
        "--hney",
        "8",
        "--rfill",
        "1.5*sqrt3",
        "--volfrac",
        "0.4",
        "--maxiter",
        "5",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let density = read_density_csv(out.join("density.csv")).unwrap();
    assert!(density.iter().any(|r| r.density == 0.0));
}

#[test]
fn mesh_and_k0_subcommands() {
    let o = hextop(&["mesh", "--hnex", "2", "--hney", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mesh = hextop::build_mesh(hextop::MeshSpec::new(2, 2).unwrap()).unwrap();
    assert_eq!(text, mesh.to_csv());

    let o = hextop(&["k0"]);
    assert!(o.status.success());
    let rows: Vec<Vec<f64>> = stdout(&o)
        .lines()
        .map(|l| l.split(',').map(|v| v.trim().parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 12);
    for i in 0..12 {
        assert_eq!(rows[i].len(), 12);
        for j in 0..12 {
            assert!((rows[i][j] - rows[j][i]).abs() <= 1e-12);
        }
    }

    let o = hextop(&["k0", "--nu", "0.5"]);
    assert!(!o.status.success());
}
