use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cantorproj")).args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn repo(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel).to_string_lossy().into_owned()
}

#[test]
fn dimension_of_middle_third() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["dimension", "--spec", "builtin:middle-third"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("d = 0.6309297536"), "{stdout}");
}

#[test]
fn exit_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let too_large = bin(&["decompose", "--spec", "builtin:middle-third", "--rho0", "1/2"], dir.path());
    assert_eq!(too_large.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&too_large.stderr).contains("too large"));

    let budget = bin(&["energy", "--spec", "builtin:middle-third", "--max-squares", "100"], dir.path());
    assert_eq!(budget.status.code(), Some(2));

    let no_spec = bin(&["energy"], dir.path());
    assert_eq!(no_spec.status.code(), Some(1));
    let bad_factor = bin(&["energy", "--spec", "builtin:golden", "--factor", "2"], dir.path());
    assert_eq!(bad_factor.status.code(), Some(1));
    let bad_grid = bin(&["scan", "--spec", "builtin:golden", "--grid", "8"], dir.path());
    assert_eq!(bad_grid.status.code(), Some(1));
    let unknown = bin(&["frobnicate"], dir.path());
    assert_eq!(unknown.status.code(), Some(1));
}

#[test]
fn verify_passes_on_defaults_and_fails_without_good_angles() {
    let dir = tempfile::tempdir().unwrap();
    let ok = bin(&["verify", "--spec", "builtin:middle-third"], dir.path());
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let checks = std::fs::read_to_string(dir.path().join("checks.csv")).unwrap();
    assert!(checks.lines().skip(2).all(|l| l.contains(",PASS,")), "{checks}");
    assert!(dir.path().join("report.json").exists());
    assert!(dir.path().join("report.txt").exists());

    // Every angle is bad when ε exceeds π, leaving the density check nothing
    // to certify.
    let fail = bin(&["verify", "--spec", "builtin:middle-third", "--epsilon", "1000", "--grid", "64"], dir.path());
    assert_eq!(fail.status.code(), Some(3));
}

#[test]
fn artifacts_carry_the_metadata_line() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["decompose", "project", "scan", "energy", "density", "verify"] {
        let o = bin(&[cmd, "--spec", "builtin:golden", "--steps", "3", "--grid", "64", "--dump"], dir.path());
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let mut csvs = 0;
    for entry in std::fs::read_dir(dir.path()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "csv" || e == "txt") {
            let text = std::fs::read_to_string(&path).unwrap();
            let first = text.lines().next().unwrap();
            assert!(first.starts_with("# cantorproj ") && first.contains(" config="), "{}: {first}", path.display());
            csvs += 1;
        }
    }
    assert!(csvs >= 10, "{csvs}");
}

#[test]
fn energy_artifacts_are_deterministic() {
    let args = [
        "energy",
        "--spec",
        "builtin:full-interval",
        "--rho0",
        "1/16",
        "--factor",
        "1/2",
        "--steps",
        "4",
        "--pair-cap",
        "4096",
        "--samples",
        "50000",
    ];
    let runs: Vec<_> = ["1", "1", "4"]
        .iter()
        .map(|jobs| {
            let dir = tempfile::tempdir().unwrap();
            let mut a = args.to_vec();
            a.extend(["--jobs", jobs]);
            assert_eq!(bin(&a, dir.path()).status.code(), Some(0));
            let e = std::fs::read(dir.path().join("energy.csv")).unwrap();
            let an = std::fs::read(dir.path().join("annuli.csv")).unwrap();
            (e, an)
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
    let text = String::from_utf8(runs[0].0.clone()).unwrap();
    // the last two steps exceed the pair cap and are estimates
    assert!(text.lines().last().unwrap().contains(",0,"), "{text}");
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, format!("spec = {:?}\nsteps = 2\nrho0 = \"1/9\"\n", repo("specs/middle_third.toml"))).unwrap();
    let cfg = cfg.to_string_lossy().into_owned();

    let o = bin(&["decompose", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("decomposition_1.csv").exists());
    assert!(!dir.path().join("decomposition_2.csv").exists());

    let o = bin(&["decompose", "--config", &cfg, "--steps", "3"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let rows = std::fs::read_to_string(dir.path().join("decomposition_2.csv")).unwrap().lines().count() - 2;
    // ρ = 1/81: 8 pieces per factor
    assert_eq!(rows, 64);

    std::fs::write(dir.path().join("bad.toml"), "speck = 1").unwrap();
    let bad = dir.path().join("bad.toml").to_string_lossy().into_owned();
    assert_eq!(bin(&["validate", "--config", &bad], dir.path()).status.code(), Some(1));
}

#[test]
fn spec_file_and_builtin_share_a_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let header = |spec: &str| {
        let o = bin(&["energy", "--spec", spec, "--steps", "2"], dir.path());
        assert_eq!(o.status.code(), Some(0));
        std::fs::read_to_string(dir.path().join("energy.csv")).unwrap().lines().next().unwrap().to_string()
    };
    assert_eq!(header("builtin:middle-third"), header(&repo("specs/middle_third.toml")));
    assert_ne!(header("builtin:middle-third"), header("builtin:golden"));
}
