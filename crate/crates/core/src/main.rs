use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use flash_dva::channel::ParityTag;
use flash_dva::estimation::{lm_fit, prior_model};
use flash_dva::harness::{self, ExperimentConfig, PlotKind, RunResult};
use flash_dva::info::{hermite_rule, mutual_information_gh, GaussianMixtureModel, DEFAULT_HERMITE_ORDER};
use flash_dva::lattice::VoltageHistogram;
use flash_dva::{FlashError, Result};

#[derive(Parser)]
#[command(name = "flash-dva", version, about = "MLC flash read-channel simulator with adaptive voltage control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config file.
    Run { config: PathBuf },
    /// Run a built-in experiment.
    Preset {
        name: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for the CSV, plots and summary.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mutual information of a four-level Gaussian mixture given as
    /// `m0,m1,m2,m3,s0,s1,s2,s3`.
    Mi {
        mixture: String,
        #[arg(long, default_value_t = DEFAULT_HERMITE_ORDER)]
        order: usize,
    },
    /// Fit a mixture to a histogram CSV with `upper,count` rows (last upper = inf).
    Fit {
        histogram: PathBuf,
        /// Scale of the written levels used for the starting guess.
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
    },
    /// Render an SVG chart (mi, alpha or ber) from an epoch CSV.
    Plot {
        records: PathBuf,
        kind: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", serde_json::json!({ "error": first, "kind": "usage" }));
            return ExitCode::from(2);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": e.to_string(), "kind": e.kind() }));
            ExitCode::FAILURE
        }
    }
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let result = harness::run_experiment(&cfg)?;
            if let Some(path) = &cfg.output_csv {
                harness::emit_csv(&result.records, path)?;
            }
            if let Some(path) = &cfg.output_plot {
                harness::emit_plot(&result.records, PlotKind::Mi, path)?;
            }
            print_json(&result.summary)
        }
        Command::Preset { name, seed, out } => {
            let mut cfg = harness::preset(&name)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let result = harness::run_experiment(&cfg)?;
            if let Some(dir) = out {
                write_outputs(&result, &dir)?;
            }
            print_json(&result.summary)
        }
        Command::Mi { mixture, order } => {
            let model = parse_mixture(&mixture)?;
            let mi = mutual_information_gh(&model, &hermite_rule(order)?);
            print_json(&serde_json::json!({ "mi_bits": mi, "order": order }))
        }
        Command::Fit { histogram, alpha } => {
            let hist = read_histogram(&histogram)?;
            let base = flash_dva::channel::ChannelParams::paper_appendix().default_thresholds;
            let fit = lm_fit(&hist, &prior_model(&base.map(|v| alpha * v)))?;
            print_json(&fit)
        }
        Command::Plot { records, kind, out } => {
            let kind: PlotKind = kind.parse()?;
            let recs = harness::read_csv(&records)?;
            let path = out.unwrap_or_else(|| plot_path(&records, &kind));
            harness::emit_plot(&recs, kind, &path)?;
            print_json(&serde_json::json!({ "plot": path }))
        }
    }
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| FlashError::Argument(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn write_outputs(result: &RunResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| FlashError::io(dir, e))?;
    let name = &result.config.preset;
    harness::emit_csv(&result.records, &dir.join(format!("{name}.csv")))?;
    for (kind, tag) in [(PlotKind::Mi, "mi"), (PlotKind::Alpha, "alpha"), (PlotKind::Ber, "ber")] {
        harness::emit_plot(&result.records, kind, &dir.join(format!("{name}-{tag}.svg")))?;
    }
    let summary = dir.join(format!("{name}-summary.json"));
    let text = serde_json::to_string_pretty(&result.summary).map_err(|e| FlashError::Argument(e.to_string()))?;
    std::fs::write(&summary, text).map_err(|e| FlashError::io(&summary, e))
}

fn plot_path(records: &Path, kind: &PlotKind) -> PathBuf {
    let stem = records.file_stem().and_then(|s| s.to_str()).unwrap_or("records");
    let tag = match kind {
        PlotKind::Mi => "mi",
        PlotKind::Alpha => "alpha",
        PlotKind::Ber => "ber",
    };
    records.with_file_name(format!("{stem}-{tag}.svg"))
}

fn parse_mixture(text: &str) -> Result<GaussianMixtureModel> {
    let vals: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| FlashError::Argument(format!("mixture parameters: {e}")))?;
    if vals.len() != 8 {
        return Err(FlashError::Argument(format!(
            "expected 8 numbers (4 means then 4 sigmas), got {}",
            vals.len()
        )));
    }
    GaussianMixtureModel::new([vals[0], vals[1], vals[2], vals[3]], [vals[4], vals[5], vals[6], vals[7]])
}

fn read_histogram(path: &Path) -> Result<VoltageHistogram> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => FlashError::io(path, io),
        other => FlashError::Argument(format!("{other:?}")),
    })?;
    let mut bounds = Vec::new();
    let mut counts = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let upper: f64 = rec
            .get(0)
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| FlashError::Argument(format!("bad upper edge in {rec:?}")))?;
        let count: u64 = rec
            .get(1)
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| FlashError::Argument(format!("bad count in {rec:?}")))?;
        if upper.is_finite() {
            bounds.push(upper);
        }
        counts.push(count);
    }
    VoltageHistogram::new(bounds, counts, ParityTag::Combined)
}
