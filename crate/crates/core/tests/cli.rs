use std::path::PathBuf;
use std::process::{Command, Output};

use qmeasure::cli::presets::PRESETS;

fn qmeasure(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmeasure")).args(args).output().expect("spawn qmeasure")
}

fn fixture(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    path.to_string_lossy().into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn presets_listing_names_main_scenarios() {
    let out = qmeasure(&["presets"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for name in ["epr_bohm", "stern_gerlach", "telepathy"] {
        assert!(text.contains(name), "{name} missing from\n{text}");
    }
}

#[test]
fn every_listed_preset_runs() {
    let listing = stdout(&qmeasure(&["presets"]));
    for preset in PRESETS {
        assert!(listing.contains(preset.name));
        let out = qmeasure(&["run", preset.name]);
        assert_eq!(out.status.code(), Some(0), "{}: {}", preset.name, stderr(&out));
    }
}

#[test]
fn epr_table_shows_singlet_amplitudes() {
    let out = qmeasure(&["run", "epr_bohm"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("final_amp_re[↑↓]: 0.707106781"), "{text}");
    assert!(text.contains("final_amp_re[↓↑]: -0.707106781"), "{text}");
    assert!(text.contains("p_j|i[0,0]: 1.000000000"), "{text}");
}

#[test]
fn telepathy_gaps_in_table_output() {
    let born = stdout(&qmeasure(&["run", "telepathy_born"]));
    assert!(born.contains("signaling_gap: 0.000000"), "{born}");
    let nonborn = stdout(&qmeasure(&["run", "telepathy_nonborn"]));
    assert!(nonborn.contains("signaling_gap: 0.1196"), "{nonborn}");
}

#[test]
fn records_output_is_byte_identical_across_runs() {
    for name in ["telepathy_nonborn", "ll_random", "two_pointer_degenerate"] {
        let a = qmeasure(&["run", name, "--format", "records"]);
        let b = qmeasure(&["run", name, "--format", "records"]);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "{name}");
        for line in stdout(&a).lines() {
            let (key, value) = line.split_once('=').expect("key=value");
            assert!(key.starts_with(name), "{line}");
            assert!(value.parse::<f64>().is_ok_and(f64::is_finite), "{line}");
        }
    }
}

#[test]
fn scenario_file_path_runs() {
    let path = fixture("../../scenarios/stern_gerlach.scn");
    let out = qmeasure(&["run", &path, "--format", "records"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("stern_gerlach."));
}

#[test]
fn corrupted_projector_exits_3() {
    let out = qmeasure(&["run", &fixture("corrupted_projector.scn")]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("InvalidProjectorFamily"), "{}", stderr(&out));
}

#[test]
fn unknown_field_exits_2_with_line() {
    let out = qmeasure(&["run", &fixture("bad_field.scn")]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("line 3") && err.contains("colour"), "{err}");
}

#[test]
fn missing_file_exits_2() {
    let out = qmeasure(&["run", "no/such/file.scn"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_single_trial_reports_every_battery() {
    let out = qmeasure(&["verify", "--trials", "1", "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    for battery in qmeasure::cli::verify::battery_names() {
        assert!(text.contains(battery), "{battery}");
    }
}

#[test]
fn verify_rejects_zero_trials() {
    let out = qmeasure(&["verify", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(2));
}
