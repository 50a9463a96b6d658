//! End-to-end tests of the command-line interface: exit codes, file
//! outputs and pipeline consistency.

use std::path::Path;
use std::process::{Command, Output};

fn swarmgait(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swarmgait"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn generate_then_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = swarmgait(
        &[
            "generate", "--height", "1.70", "--mass", "70", "--steps", "4", "--seed", "42",
            "--out", "g.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("stable: 21/21 (100.0%)"), "{text}");
    assert!(text.contains("pelvis advance"));
    assert!(dir.path().join("g.csv").exists());

    let check = swarmgait(
        &["check", "--in", "g.csv", "--height", "1.70", "--mass", "70"],
        dir.path(),
    );
    assert!(check.status.success(), "{}", stderr(&check));
    let text = stdout(&check);
    assert!(text.contains("all 21 records pass"), "{text}");
    assert!(!text.contains("FAIL"));
}

#[test]
fn identical_seeds_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = swarmgait(
            &["generate", "--steps", "3", "--seed", "7", "--out", name],
            dir.path(),
        );
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn plot_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    swarmgait(
        &["generate", "--steps", "2", "--seed", "1", "--out", "g.csv"],
        dir.path(),
    );
    let out = swarmgait(
        &[
            "plot",
            "--in",
            "g.csv",
            "--channel",
            "com",
            "--out",
            "g.svg",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let svg = std::fs::read_to_string(dir.path().join("g.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<polyline").count(), 2);

    let bad = swarmgait(
        &[
            "plot",
            "--in",
            "g.csv",
            "--channel",
            "nope",
            "--out",
            "x.svg",
        ],
        dir.path(),
    );
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn compare_self_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    swarmgait(
        &["generate", "--steps", "2", "--seed", "5", "--out", "g.csv"],
        dir.path(),
    );
    let out = swarmgait(&["compare", "--a", "g.csv", "--b", "g.csv"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("com_x"));
    for line in text.lines().skip(1) {
        assert!(
            line.contains("0e0") || line.contains("0.000000e0"),
            "{line}"
        );
    }
}

#[test]
fn compare_against_marker_capture() {
    let dir = tempfile::tempdir().unwrap();
    swarmgait(
        &["generate", "--steps", "2", "--seed", "5", "--out", "g.csv"],
        dir.path(),
    );
    let mut markers = String::from("frame,marker,x,y,z\n");
    for frame in 0..4 {
        for marker in [
            "hip_left",
            "knee_left",
            "ankle_left",
            "foot_left",
            "hip_right",
            "knee_right",
            "ankle_right",
            "foot_right",
        ] {
            markers.push_str(&format!("{frame},{marker},0.1,0.0,0.4\n"));
        }
    }
    std::fs::write(dir.path().join("ref.csv"), markers).unwrap();
    let out = swarmgait(&["compare", "--a", "g.csv", "--b", "ref.csv"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    // Joint position channels intersect; foot markers have no counterpart.
    assert!(text.contains("hip_left_x"));
    assert!(!text.contains("foot_left_x"));
}

#[test]
fn ik_solves_and_reports_unreachable() {
    let dir = tempfile::tempdir().unwrap();
    let ok = swarmgait(
        &[
            "ik",
            "--hip",
            "0,0,0.901",
            "--target",
            "0.2,0,0.2",
            "--height",
            "1.70",
        ],
        dir.path(),
    );
    assert!(ok.status.success(), "{}", stderr(&ok));
    let text = stdout(&ok);
    assert!(text.contains("theta_hip"));
    assert!(text.contains("theta_knee"));

    let unreachable = swarmgait(
        &[
            "ik",
            "--hip",
            "0,0,0.901",
            "--target",
            "0,0,-0.1",
            "--height",
            "1.70",
        ],
        dir.path(),
    );
    assert_eq!(unreachable.status.code(), Some(2));
    assert!(stderr(&unreachable).contains("Unreachable"));
}

#[test]
fn fitness_mode_flag_selects_the_distance_form() {
    let dir = tempfile::tempdir().unwrap();
    let euclid = swarmgait(
        &[
            "generate",
            "--steps",
            "2",
            "--seed",
            "3",
            "--fitness-mode",
            "euclid",
            "--out",
            "e.csv",
        ],
        dir.path(),
    );
    assert!(euclid.status.success(), "{}", stderr(&euclid));

    let l1 = swarmgait(
        &[
            "generate",
            "--steps",
            "2",
            "--seed",
            "3",
            "--fitness-mode",
            "l1",
            "--out",
            "l.csv",
        ],
        dir.path(),
    );
    assert!(l1.status.success(), "{}", stderr(&l1));
    // The fitness column differs between modes; the geometry does not.
    let e = std::fs::read_to_string(dir.path().join("e.csv")).unwrap();
    let l = std::fs::read_to_string(dir.path().join("l.csv")).unwrap();
    assert_ne!(e, l);

    let bad = swarmgait(
        &[
            "generate", "--steps", "1", "--fitness-mode", "manhattan", "--out", "x.csv",
        ],
        dir.path(),
    );
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn usage_and_input_errors_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    // No subcommand: usage error.
    let usage = swarmgait(&[], dir.path());
    assert_eq!(usage.status.code(), Some(1));

    // Malformed point: usage error.
    let point = swarmgait(&["ik", "--hip", "1,2", "--target", "0,0,0"], dir.path());
    assert_eq!(point.status.code(), Some(1));

    // Missing input file: input error.
    let missing = swarmgait(&["check", "--in", "nope.csv"], dir.path());
    assert_eq!(missing.status.code(), Some(2));

    // Invalid config value: input error naming the key.
    std::fs::write(dir.path().join("bad.json"), br#"{"height": -3}"#).unwrap();
    let bad = swarmgait(
        &["generate", "--config", "bad.json", "--out", "g.csv"],
        dir.path(),
    );
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("height"));
}

#[test]
fn infeasible_step_writes_partial_and_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.json"), br#"{"step_length": 0.48}"#).unwrap();
    let out = swarmgait(
        &[
            "generate", "--config", "cfg.json", "--steps", "4", "--out", "g.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("partial trajectory"));
    let csv = std::fs::read_to_string(dir.path().join("g.csv")).unwrap();
    assert_eq!(csv.trim_end().lines().count(), 2); // header + standing record
}

#[test]
fn flags_override_config_values() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.json"),
        br#"{"seed": 1, "steps": 2, "height": 1.60}"#,
    )
    .unwrap();
    // Same config, flag forces the seed used by the file-less run.
    swarmgait(
        &[
            "generate", "--config", "cfg.json", "--seed", "9", "--out", "a.csv",
        ],
        dir.path(),
    );
    swarmgait(
        &[
            "generate", "--height", "1.60", "--steps", "2", "--seed", "9", "--out", "b.csv",
        ],
        dir.path(),
    );
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}
