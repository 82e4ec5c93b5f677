use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ltesched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ltesched"))
        .args(args)
        .env_remove("LTESCHED_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn files_ending(dir: &Path, suffix: &str) -> Vec<String> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(suffix))
        .collect()
}

const SMALL: &str = r#"
name = "small"
duration = 2.0
seed = 3
ues = [10.0, 14.0, 17.0]

[channel]
kind = "flat"
doppler_hz = 120.0

[[scheduler]]
kind = "bets"

[[scheduler]]
kind = "ftgs"
"#;

#[test]
fn solve_ftgs_prints_table() {
    let o = ltesched(&["solve-ftgs", "--sinrs-db", "10,11.7041,12.9248"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("i,gamma_db,alpha,p,rbar_over_w"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    let total: f64 = rows.iter().map(|r| r[3]).sum();
    assert!((total - 1.0).abs() < 1e-4, "sum p = {total}");
    assert!(
        rows.windows(2).all(|w| w[1][2] > w[0][2]),
        "alpha not increasing"
    );
}

#[test]
fn solve_ftgs_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let sinrs = dir.path().join("sinrs.txt");
    fs::write(&sinrs, "10\n15\n").unwrap();
    let out = dir.path().join("ftgs.csv");
    let o = ltesched(&[
        "solve-ftgs",
        "--sinrs-db",
        sinrs.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(out).unwrap().lines().count(), 3);
}

#[test]
fn channel_info_reports_delay_spread() {
    let o = ltesched(&["channel-info", "--pdp", "urban"]);
    assert!(o.status.success());
    let line = stdout(&o)
        .lines()
        .find(|l| l.starts_with("tau_rms_ns:"))
        .unwrap()
        .to_string();
    let ns: f64 = line["tau_rms_ns:".len()..].trim().parse().unwrap();
    assert!((ns - 990.94).abs() < 0.1, "{ns}");
}

#[test]
fn channel_info_reads_profile_file() {
    let dir = tempfile::tempdir().unwrap();
    let pdp = dir.path().join("two.pdp");
    // two equal taps 1 µs apart: τ_rms = 500 ns
    fs::write(&pdp, "0 0\n1000 0\n").unwrap();
    let o = ltesched(&["channel-info", "--pdp", pdp.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("tau_rms_ns: 500"), "{}", stdout(&o));
}

#[test]
fn run_writes_summary_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("small.toml");
    fs::write(&scenario, SMALL).unwrap();
    let out = dir.path().join("out");
    let o = ltesched(&[
        "run",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
        "--log-allocations",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let summary = fs::read_to_string(out.join("small-summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3, "{summary}");
    assert_eq!(files_ending(&out, ".json").len(), 2);
    assert_eq!(files_ending(&out, "-allocations.csv").len(), 2);
    for name in files_ending(&out, ".json") {
        let text = fs::read_to_string(out.join(name)).unwrap();
        assert!(text.contains("\"cell_efficiency\""));
    }
}

#[test]
fn bad_configuration_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            "unknown-key.toml",
            SMALL.replace("seed = 3", "seed = 3\nsede = 4"),
        ),
        (
            "bad-beta.toml",
            SMALL.replace("kind = \"bets\"", "kind = \"bets\"\nbeta = 1.5"),
        ),
        ("not-toml.toml", "ues = [".to_string()),
    ];
    for (name, text) in cases {
        let path = dir.path().join(name);
        fs::write(&path, text).unwrap();
        let o = ltesched(&[
            "run",
            "--scenario",
            path.to_str().unwrap(),
            "--out-dir",
            dir.path().join("out").to_str().unwrap(),
        ]);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{name}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let o = ltesched(&["solve-ftgs", "--sinrs-db", "10,abc"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_writes_one_csv_per_ue_count() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("base.toml");
    fs::write(
        &base,
        "duration = 1.0\nseed = 1\nues = [15.0]\n\n[channel]\nkind = \"flat\"\ndoppler_hz = 120.0\n\n[scheduler]\nkind = \"ftgs\"\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = ltesched(&[
        "sweep",
        "--vary",
        "mu_db",
        "--values",
        "23,24",
        "--n-ues",
        "4,6",
        "--scenario-base",
        base.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csvs = files_ending(&out, ".csv");
    assert_eq!(csvs.len(), 2, "{csvs:?}");
    for name in csvs {
        let text = fs::read_to_string(out.join(name)).unwrap();
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        let phi = header.iter().position(|h| *h == "phi").unwrap();
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 2);
        for row in rows {
            let v: f64 = row.split(',').nth(phi).unwrap().parse().unwrap();
            assert!(v.is_finite() && v > -1.0, "{row}");
        }
    }
}
