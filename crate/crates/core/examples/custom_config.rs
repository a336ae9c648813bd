//! Parses an experiment from TOML text, runs it and writes the CSV and an
//! MI plot next to each other in a temporary directory.
use flash_dva::harness::{emit_csv, emit_plot, run_experiment, ExperimentConfig, PlotKind};

const CONFIG: &str = r#"
preset = "noisy-writes"
model = "model1"
write_policy = "dva_joint_alternating"
write_order = "alternating"
max_cycles = 1500
wordlines = 17
cells_per_wordline = 514
seed = 42
retention_noise = false
"#;

fn main() -> flash_dva::Result<()> {
    let cfg = ExperimentConfig::from_toml(CONFIG)?;
    let run = run_experiment(&cfg)?;
    let dir = std::env::temp_dir().join("flash-dva-custom");
    std::fs::create_dir_all(&dir).expect("temp dir");
    emit_csv(&run.records, &dir.join("records.csv"))?;
    emit_plot(&run.records, PlotKind::Mi, &dir.join("mi.svg"))?;
    println!("{} epochs, final alpha {:?}", run.summary.epochs, run.summary.final_alpha);
    println!("written to {}", dir.display());
    Ok(())
}
