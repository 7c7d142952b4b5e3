use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn oodsim(args: &[&str], out_root: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oodsim"))
        .args(args)
        .env("OODSIM_OUT_DIR", out_root)
        .current_dir(out_root)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn simulate(root: &Path, mu: &str, dir: &Path) {
    let out = oodsim(
        &[
            "simulate",
            "--preset",
            "paper",
            "--mu",
            mu,
            "--out",
            dir.to_str().unwrap(),
        ],
        root,
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

fn write(root: &Path, name: &str, text: &str) -> String {
    let path = root.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn simulate_writes_csv_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run0");
    simulate(tmp.path(), "0", &dir);

    let csv = std::fs::read_to_string(dir.join("timeseries.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t_s,s_mm,section,v_tA_mms,v_tB_mms,v_tC_mms,d_A_mm,d_B_mm,d_C_mm,comp_A_mm,comp_B_mm,comp_C_mm"
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 12);
    assert_eq!(first[3], "50.265482");

    let summary: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    let total = summary["total_time_s"].as_f64().unwrap();
    assert!((total - 56.2).abs() < 0.05, "{total}");
    assert_eq!(
        summary["reference"]["estimate_time_s"].as_f64(),
        Some(60.04)
    );
}

#[test]
fn default_output_root_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = oodsim(&["simulate", "--preset", "paper", "--mu", "30"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let written: Vec<_> = std::fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(written.len(), 1, "{written:?}");
    let dir = tmp.path().join(&written[0]);
    assert!(dir.join("timeseries.csv").is_file());
    assert!(dir.join("summary.json").is_file());
}

fn section_speed_multisets(dir: &Path) -> Vec<Vec<String>> {
    let csv = std::fs::read_to_string(dir.join("timeseries.csv")).unwrap();
    let mut per_section: Vec<Vec<String>> = Vec::new();
    for line in csv.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let section: usize = fields[2].parse().unwrap();
        let mut speeds: Vec<String> = fields[3..6].iter().map(|s| s.to_string()).collect();
        speeds.sort();
        if per_section.len() <= section {
            per_section.resize(section + 1, Vec::new());
        }
        per_section[section] = speeds;
    }
    per_section
}

#[test]
fn rolling_by_120_degrees_gives_the_same_speeds() {
    let tmp = tempfile::tempdir().unwrap();
    simulate(tmp.path(), "0", &tmp.path().join("a"));
    simulate(tmp.path(), "120", &tmp.path().join("b"));
    let a = section_speed_multisets(&tmp.path().join("a"));
    let b = section_speed_multisets(&tmp.path().join("b"));
    assert_eq!(a.len(), 5);
    assert_eq!(a, b);
}

#[test]
fn several_orientations_run_into_separate_directories() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("batch");
    let out = oodsim(
        &[
            "simulate",
            "--preset",
            "paper",
            "--mu",
            "0",
            "--mu",
            "30",
            "--mu",
            "60",
            "--out",
            out_dir.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let mut dirs: Vec<_> = std::fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    dirs.sort();
    assert_eq!(dirs.len(), 3);
    for dir in &dirs {
        assert!(dir.join("summary.json").is_file());
    }
}

#[test]
fn tight_bend_is_a_geometry_error() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write(
        tmp.path(),
        "tight.json",
        r#"{"network": {"pipe": {"inner_radius_mm": 100},
            "sections": [{"type": "straight", "length_mm": 500}, {"type": "bend", "radius_mm": 100, "sweep_deg": 90}]}}"#,
    );
    let out = oodsim(&["simulate", "--config", &config], tmp.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(
        stderr(&out).contains("bend radius must exceed pipe radius"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn parse_errors_name_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    for (text, field) in [
        (
            r#"{"network": "paper", "robot": {"input_rpm": "fast"}}"#,
            "robot.input_rpm",
        ),
        (r#"{"network": "paper", "gear": {"j": -2}}"#, "gear.j"),
        (
            r#"{"network": "paper", "robot": {"lenght_mm": 200}}"#,
            "lenght_mm",
        ),
        (
            r#"{"network": {"pipe": {"inner_radius_mm": 50}, "sections": [{"type": "straight"}]}}"#,
            "sections[0].length_mm",
        ),
    ] {
        let config = write(tmp.path(), "bad.json", text);
        let out = oodsim(&["simulate", "--config", &config], tmp.path());
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert!(stderr(&out).contains(field), "{text}: {}", stderr(&out));
    }
    let out = oodsim(&["simulate", "--config", "{not json"], tmp.path());
    assert_eq!(
        out.status.code(),
        Some(1),
        "missing config file is an I/O failure"
    );
}

#[test]
fn unknown_law_is_an_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = oodsim(
        &["simulate", "--preset", "paper", "--law", "magic"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("differential"));
}

#[test]
fn locked_law_is_selectable() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("locked");
    let out = oodsim(
        &[
            "simulate",
            "--preset",
            "paper",
            "--law",
            "locked",
            "--out",
            dir.to_str().unwrap(),
            "--format",
            "json",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let summary: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(summary["law"], "locked");
    let slip = summary["signed_slip_mm"].as_array().unwrap();
    assert!(slip[0].as_f64().unwrap() > 600.0);

    let laws = oodsim(&["laws"], tmp.path());
    assert!(stdout(&laws).contains("locked") && stdout(&laws).contains("differential"));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = write(tmp.path(), "file", "not a directory");
    let out = oodsim(
        &[
            "simulate",
            "--preset",
            "paper",
            "--out",
            &format!("{blocker}/run"),
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn geartrain_equal_load() {
    let tmp = tempfile::tempdir().unwrap();
    let default = oodsim(
        &["geartrain", "--input-rpm", "120", "--format", "json"],
        tmp.path(),
    );
    let ones = oodsim(
        &[
            "geartrain",
            "--input-rpm",
            "120",
            "--ratios",
            "1,1,1",
            "--format",
            "json",
        ],
        tmp.path(),
    );
    assert_eq!(default.status.code(), Some(0));
    assert_eq!(stdout(&default), stdout(&ones));
    let v: Value = serde_json::from_str(&stdout(&default)).unwrap();
    assert_eq!(v["output_rpm"], serde_json::json!([12.0, 12.0, 12.0]));
}

#[test]
fn geartrain_bend_rim_speeds() {
    let tmp = tempfile::tempdir().unwrap();
    let out = oodsim(
        &[
            "geartrain",
            "--input-rpm",
            "120",
            "--ratios",
            "0.6706,1.1647,1.1647",
            "--rim",
            "--ds",
            "80",
            "--format",
            "json",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rim: Vec<f64> = v["rim_mm_s"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    for (got, want) in rim.iter().zip([33.7, 58.5, 58.5]) {
        assert!((got - want).abs() < 0.05, "{rim:?}");
    }
    let text = oodsim(
        &["geartrain", "--ratios", "0.6706,1.1647,1.1647", "--rim"],
        tmp.path(),
    );
    assert!(stdout(&text).contains("33.7"), "{}", stdout(&text));
}

#[test]
fn geartrain_rejects_bad_ratios() {
    let tmp = tempfile::tempdir().unwrap();
    for ratios in ["1,0,1", "1,-1,1", "1,1"] {
        let out = oodsim(&["geartrain", "--ratios", ratios], tmp.path());
        assert_eq!(out.status.code(), Some(2), "{ratios}: {}", stderr(&out));
    }
}

#[test]
fn report_needs_every_orientation() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    simulate(tmp.path(), "0", &a);
    simulate(tmp.path(), "60", &b);
    let out = oodsim(
        &["report", a.to_str().unwrap(), b.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("30"), "{}", stderr(&out));
}

#[test]
fn report_json_is_machine_readable_and_flags_tampering() {
    let tmp = tempfile::tempdir().unwrap();
    let dirs: Vec<_> = ["0", "30", "60"]
        .iter()
        .map(|m| {
            let dir = tmp.path().join(format!("mu{m}"));
            simulate(tmp.path(), m, &dir);
            dir.display().to_string()
        })
        .collect();
    let mut args = vec!["report", "--format", "json"];
    args.extend(dirs.iter().map(String::as_str));
    let before: Value = serde_json::from_str(&stdout(&oodsim(&args, tmp.path()))).unwrap();
    let rows = before["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 18);
    assert!(rows
        .iter()
        .all(|r| !r["citation"].as_str().unwrap().is_empty()));
    let flagged_before = rows.iter().filter(|r| r["within_bound"] == false).count();

    let csv_path = Path::new(&dirs[1]).join("timeseries.csv");
    let csv = std::fs::read_to_string(&csv_path)
        .unwrap()
        .replace("50.265482", "45.000000");
    std::fs::write(&csv_path, csv).unwrap();
    let out = oodsim(&args, tmp.path());
    assert_eq!(out.status.code(), Some(4));
    let after: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let flagged_after = after["rows"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["within_bound"] == false)
        .count();
    assert!(flagged_after > flagged_before);
}

#[test]
fn dump_config_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let first = oodsim(
        &[
            "simulate",
            "--preset",
            "paper",
            "--mu",
            "30",
            "--dt-ms",
            "0.5",
            "--dump-config",
        ],
        tmp.path(),
    );
    assert_eq!(first.status.code(), Some(0));
    let path = write(tmp.path(), "dump.json", &stdout(&first));
    let second = oodsim(
        &["simulate", "--config", &path, "--dump-config"],
        tmp.path(),
    );
    assert_eq!(stdout(&first), stdout(&second));
    let v: Value = serde_json::from_str(&stdout(&first)).unwrap();
    assert_eq!(v["mu_deg"], 30.0);
    assert_eq!(v["dt_ms"], 0.5);
}

#[test]
fn network_prints_a_reloadable_descriptor() {
    let tmp = tempfile::tempdir().unwrap();
    let out = oodsim(&["network", "--preset", "paper"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["sections"].as_array().unwrap().len(), 5);
    let path = write(
        tmp.path(),
        "net.json",
        &format!(r#"{{"network": {}}}"#, stdout(&out)),
    );
    let again = oodsim(
        &[
            "simulate", "--config", &path, "--format", "json", "--out", "x",
        ],
        tmp.path(),
    );
    assert_eq!(again.status.code(), Some(0), "{}", stderr(&again));
}
