use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flash-dva"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn error_line(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("an error line");
    serde_json::from_str(line).unwrap_or_else(|e| panic!("not JSON ({e}): {line}"))
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn mi_of_a_well_separated_mixture() {
    let out = cli(&["mi", "0,100,200,300,1,1,1,1"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert!((v["mi_bits"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn malformed_mixture_is_an_argument_error() {
    let out = cli(&["mi", "1,2,3"]);
    assert!(!out.status.success());
    let e = error_line(&out);
    assert_eq!(e["kind"], "argument");
    assert!(e["error"].as_str().unwrap().contains("8 numbers"));
}

#[test]
fn unknown_preset_and_missing_command_fail_cleanly() {
    let out = cli(&["preset", "fig99"]);
    assert!(!out.status.success());
    assert_eq!(error_line(&out)["kind"], "config");

    let out = cli(&[]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_line(&out)["kind"], "usage");
}

#[test]
fn run_writes_csv_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let svg = dir.path().join("out.svg");
    let cfg = dir.path().join("exp.toml");
    std::fs::write(
        &cfg,
        format!(
            "preset = \"tiny\"\nmax_cycles = 300\nwordlines = 9\ncells_per_wordline = 130\n\
             output_csv = {:?}\noutput_plot = {:?}\n",
            csv.to_str().unwrap(),
            svg.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = cli(&["run", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["preset"], "tiny");
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 1 + 2 * 4);
    assert!(svg.exists());

    // plot re-renders the CSV next to it
    let out = cli(&["plot", csv.to_str().unwrap(), "ber"]);
    assert!(out.status.success());
    assert!(dir.path().join("out-ber.svg").exists());
    let out = cli(&["plot", csv.to_str().unwrap(), "pie"]);
    assert_eq!(error_line(&out)["kind"], "argument");
}

#[test]
fn config_typos_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "max_cycle = 300\n").unwrap();
    let out = cli(&["run", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    assert_eq!(error_line(&out)["kind"], "config");

    let out = cli(&["run", dir.path().join("absent.toml").to_str().unwrap()]);
    assert_eq!(error_line(&out)["kind"], "io");
}

fn write_histogram(path: &Path, rows: &[(f64, u64)]) {
    let mut text = String::from("upper,count\n");
    for (u, c) in rows {
        text.push_str(&format!("{u},{c}\n"));
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn fit_reads_a_histogram() {
    use flash_dva::estimation::{equal_prob_boundaries, predict_bin_probs, BOUNDARY_TOL, SEARCH_RANGE};
    use flash_dva::info::GaussianMixtureModel;

    let truth = GaussianMixtureModel::scaled_levels(1.0, &[2.8, 5.2, 6.4, 7.86], [0.35, 0.08, 0.08, 0.08]);
    let bounds = equal_prob_boundaries(&truth, 9, SEARCH_RANGE, BOUNDARY_TOL).unwrap();
    let probs = predict_bin_probs(&truth, &bounds);
    let mut rows: Vec<(f64, u64)> = bounds.iter().zip(&probs).map(|(b, p)| (*b, (p * 1e6).round() as u64)).collect();
    rows.push((f64::INFINITY, (probs[8] * 1e6).round() as u64));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hist.csv");
    write_histogram(&path, &rows);
    let out = cli(&["fit", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    for l in 0..4 {
        let m = v["model"]["means"][l].as_f64().unwrap();
        assert!((m - truth.means[l]).abs() < 0.02, "level {l}: {m}");
    }
}
