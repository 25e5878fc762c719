use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sedkit::forecast::read_scenarios_binary;
use sedkit::lp::{parse_lp, solve_lp};

fn data(path: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(path)
        .canonicalize()
        .unwrap()
}

fn sedkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sedkit")).args(args).output().unwrap()
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn run(config: &Path, out: &Path, args: &[&str]) -> Output {
    let mut all = vec![
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--jobs",
        "1",
    ];
    all.extend_from_slice(args);
    sedkit(&all)
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn prints_schema() {
    let out = sedkit(&["--print-schema"]);
    ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("[forecast]"));
}

#[test]
fn dispatch_matches_golden_and_dumps_parseable_lp() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&data("configs/three_bus.toml"), dir.path(), &["dispatch", "--dump-lp"]);
    ok(&out);
    let golden: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/three_bus_dispatch.json"))
            .unwrap(),
    )
    .unwrap();
    let want = golden["objective"].as_f64().unwrap();
    let summary = csv_rows(&dir.path().join("summary.csv"));
    let objective: f64 = summary.iter().find(|r| r[0] == "objective").unwrap()[1]
        .parse()
        .unwrap();
    assert!((objective - want).abs() <= 1e-6 * want);
    let lp = parse_lp(&fs::read_to_string(dir.path().join("dispatch.lp")).unwrap()).unwrap();
    let sol = solve_lp(&lp, &Default::default()).unwrap();
    assert!((sol.objective - want).abs() <= 1e-6 * want);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "dispatch");
    assert!(manifest["outputs"]["dispatch.csv"].is_string());
}

#[test]
fn dispatch_from_scenario_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = data("configs/three_bus.toml");
    ok(&run(&cfg, dir.path(), &["scenarios", "--count", "5", "--binary"]));
    let bin = dir.path().join("scenarios.bin");
    let set = read_scenarios_binary(fs::File::open(&bin).unwrap()).unwrap();
    assert_eq!(set.len(), 5);
    let germ: Vec<String> = set.germs.row(3).iter().map(|v| format!("{v:?}")).collect();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&run(
        &cfg,
        &a,
        &["dispatch", "--scenarios", bin.to_str().unwrap(), "--index", "3"],
    ));
    ok(&run(&cfg, &b, &["dispatch", &format!("--germ={}", germ.join(","))]));
    assert_eq!(
        fs::read(a.join("dispatch.csv")).unwrap(),
        fs::read(b.join("dispatch.csv")).unwrap()
    );
}

fn study_config(dir: &Path) -> PathBuf {
    let text = fs::read_to_string(data("configs/three_bus.toml"))
        .unwrap()
        .replace("../cases/", &format!("{}/", data("cases").display()))
        .replace("mc_sizes = [10, 100, 1000]", "mc_sizes = [10, 100]")
        .replace("cv_samples = 200", "cv_samples = 20");
    let path = dir.join("study.toml");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn study_is_verified_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = study_config(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&run(&cfg, &a, &["study", "--verify"]));
    ok(&run(&cfg, &b, &["study", "--verify"]));
    for f in [
        "report.csv",
        "plot.csv",
        "fits.csv",
        "surrogate.pce",
        "cross_validation.csv",
        "manifest.json",
    ] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f} differs"
        );
    }
    let c = dir.path().join("c");
    ok(&run(&cfg, &c, &["--seed", "8", "study"]));
    assert_ne!(
        fs::read(a.join("report.csv")).unwrap(),
        fs::read(c.join("report.csv")).unwrap()
    );
}

#[test]
fn kl_on_synthetic_wind() {
    let dir = tempfile::tempdir().unwrap();
    ok(&run(&data("configs/kl_synthetic.toml"), dir.path(), &["kl"]));
    for row in csv_rows(&dir.path().join("kl/summary.csv")) {
        let fraction: f64 = row[4].parse().unwrap();
        assert!(fraction >= 90.0, "{row:?}");
        assert_eq!(row[5], "false");
    }
    assert!(dir.path().join("kl/wy_a.kl").exists());
}

fn wind_config(dir: &Path, files: &[(&str, &Path)]) -> PathBuf {
    let mut text = String::from("[wind]\ntruncation = 6\nsites = [\n");
    for (label, path) in files {
        text += &format!("  {{ label = \"{label}\", path = \"{}\" }},\n", path.display());
    }
    text += "]\n";
    let path = dir.join("wind.toml");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn kl_cloned_sites_have_unit_dcor() {
    let dir = tempfile::tempdir().unwrap();
    ok(&run(
        &data("configs/kl_synthetic.toml"),
        &dir.path().join("syn"),
        &["synth-wind"],
    ));
    let file = dir.path().join("syn/wind/wy_a.csv");
    let cfg = wind_config(dir.path(), &[("one", &file), ("two", &file)]);
    ok(&run(&cfg, &dir.path().join("out"), &["kl"]));
    let rows = csv_rows(&dir.path().join("out/kl/dcor.csv"));
    let first = rows.iter().find(|r| r[2] == "1").unwrap();
    assert!((first[4].parse::<f64>().unwrap() - 1.0).abs() < 1e-12, "{first:?}");
}

#[test]
fn kl_flags_constant_wind() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("timestamp,speed_mps,power_mw\n");
    for day in 1..=20 {
        for k in 0..144 {
            csv += &format!("2004-01-{day:02} {:02}:{:02}:00,7.5,40\n", k / 6, (k % 6) * 10);
        }
    }
    let file = dir.path().join("flat.csv");
    fs::write(&file, csv).unwrap();
    let cfg = wind_config(dir.path(), &[("flat", &file)]);
    let out = run(&cfg, &dir.path().join("out"), &["kl"]);
    ok(&out);
    let row = &csv_rows(&dir.path().join("out/kl/summary.csv"))[0];
    assert!(row[3].parse::<f64>().unwrap() < 1e-20, "{row:?}");
    assert_eq!(row[5], "true");
    assert!(String::from_utf8_lossy(&out.stderr).contains("constant"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = sedkit(&["--config", dir.path().join("none.toml").to_str().unwrap(), "dispatch"]);
    assert_eq!(missing.status.code(), Some(2));

    let cfg = dir.path().join("bad_case.toml");
    fs::write(&cfg, "[case]\npath = \"nowhere.case\"\n").unwrap();
    assert_eq!(
        sedkit(&["--config", cfg.to_str().unwrap(), "dispatch"]).status.code(),
        Some(2)
    );

    fs::write(dir.path().join("broken.case"), "CASE\nname x\nperiods two\n").unwrap();
    fs::write(&cfg, "[case]\npath = \"broken.case\"\n").unwrap();
    let out = sedkit(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
        "dispatch",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken.case:3"));

    fs::write(&cfg, "seed = 1\nunknown = 3\n").unwrap();
    assert_eq!(
        sedkit(&["--config", cfg.to_str().unwrap(), "kl"]).status.code(),
        Some(2)
    );
}
