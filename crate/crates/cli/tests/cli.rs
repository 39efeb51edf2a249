use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn monoflow(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monoflow"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn quick_scenario(dir: &Path, body: &str) -> String {
    let p = dir.join("s.toml");
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const VEE: &str = r#"
name = "vee"
[graph]
preset = "sign"
[initial]
expr = "abs(x - 0.5)"
[boundary]
left = 0.5
right = 0.5
[discretization]
n = 81
dt = 2e-4
t_final = 0.02
"#;

#[test]
fn run_then_verify_and_facets() {
    let tmp = tempfile::tempdir().unwrap();
    let s = quick_scenario(tmp.path(), VEE);
    let o = monoflow(&["run", &s, "--out", "r"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["series.csv", "series.json", "scenario.toml", "run.json"] {
        assert!(tmp.path().join("r").join(f).exists(), "{f}");
    }

    let v = monoflow(&["verify", "r"], tmp.path());
    assert!(v.status.success());
    assert!(stdout(&v).contains("energy"));

    let f = monoflow(&["facets", "r"], tmp.path());
    assert!(f.status.success());
    let text = stdout(&f);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,theta,xi_minus,xi_plus,a,b,speed_predicted,speed_measured"
    );
    let row: Vec<f64> = lines
        .last()
        .unwrap()
        .split(',')
        .map(|c| c.parse().unwrap())
        .collect();
    // half-width near sqrt(2 t) = 0.2 at t = 0.02
    assert!((0.5 * (row[3] - row[2]) - 0.2).abs() < 0.02, "{row:?}");
}

#[test]
fn verify_exit_code_reflects_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let s = quick_scenario(tmp.path(), VEE);
    assert!(monoflow(&["run", &s, "--out", "r"], tmp.path()).status.success());
    // Energy strictly decreases, so demanding a negative tolerance that no
    // margin can beat forces a failure.
    let o = monoflow(&["verify", "r", "--suite", "energy", "--tol-energy=-1"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn compare_against_oracle_and_run() {
    let tmp = tempfile::tempdir().unwrap();
    let s = quick_scenario(tmp.path(), VEE);
    assert!(monoflow(&["run", &s, "--out", "a"], tmp.path()).status.success());
    assert!(monoflow(&["run", &s, "--out", "b"], tmp.path()).status.success());
    let o = monoflow(&["compare", "a", "--oracle", "tv-vee", "--plot-dir", "plots"], tmp.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("width_err"));
    assert!(tmp.path().join("plots/diagnostics.dat").exists());
    assert!(tmp.path().join("plots/facets.dat").exists());

    let o = monoflow(&["compare", "a", "b"], tmp.path());
    assert!(o.status.success());
    let last = stdout(&o).lines().last().unwrap().to_string();
    let l2: f64 = last.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert_eq!(l2, 0.0);

    // a scenario file against its own archive
    let o = monoflow(&["compare", &s, "a"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let last = stdout(&o).lines().last().unwrap().to_string();
    assert_eq!(last.split_whitespace().nth(1).unwrap().parse::<f64>().unwrap(), 0.0);
}

#[test]
fn archives_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let s = quick_scenario(tmp.path(), VEE);
    assert!(monoflow(&["run", &s, "--out", "a"], tmp.path()).status.success());
    assert!(monoflow(&["run", &s, "--out", "b"], tmp.path()).status.success());
    for f in ["series.csv", "series.json", "scenario.toml"] {
        let x = fs::read(tmp.path().join("a").join(f)).unwrap();
        let y = fs::read(tmp.path().join("b").join(f)).unwrap();
        assert!(x == y, "{f} differs");
    }
}

#[test]
fn oracle_point_value() {
    let tmp = tempfile::tempdir().unwrap();
    let o = monoflow(&["oracle", "tv-vee", "--at", "0.02,0.5"], tmp.path());
    assert!(o.status.success());
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 0.2).abs() < 1e-12);

    let o = monoflow(&["oracle", "heat-fourier", "--scenario", "heat", "--at", "0.1", "--n", "11"], tmp.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 12);

    // Past the facet collision time the law no longer applies.
    let o = monoflow(&["oracle", "tv-vee", "--at", "0.2,0.5"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_reports_an_order() {
    let tmp = tempfile::tempdir().unwrap();
    let s = quick_scenario(tmp.path(), VEE);
    let o = monoflow(&["sweep-epsilon", &s, "--epsilons", "0.1,0.05,0.025"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("fitted order"));
}

#[test]
fn bad_inputs_are_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let no_boundary = quick_scenario(
        tmp.path(),
        "[graph]\npreset = \"sign\"\n[initial]\nexpr = \"x\"\n[discretization]\nn = 11\ndt = 1e-3\nt_final = 0.01\n",
    );
    let o = monoflow(&["run", &no_boundary], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Dirichlet"));

    let o = monoflow(&["verify", "missing"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn presets_are_listed() {
    let tmp = tempfile::tempdir().unwrap();
    let o = monoflow(&["presets"], tmp.path());
    assert!(stdout(&o).lines().any(|l| l == "tv_vee"));
}
