use flash_dva::channel::Parity;
use flash_dva::harness::{
    emit_csv, emit_plot, preset, read_csv, render_svg, run_experiment, write_csv, ExperimentConfig, PlotKind,
    CSV_COLUMNS, PRESET_NAMES,
};

/// Any change to a preset's definition changes its hash; update this table
/// only together with a deliberate change to the experiment.
const PINNED: &[(&str, &str)] = &[
    ("fixed-model2", "7a1c00f47ed36958f97d60f838392d2e82b98225d96999c32d4b3eddb5574dee"),
    ("fixed-model1", "ec85c920ea0d2ba12386a0395bd035bdd89979af364bb1c304f428b692b1bc41"),
    ("fig4", "794f4ccd1665a9ca71c5ad81ce1c6c96e1e0d2d7bd221adf96dbe993ea70f68a"),
    ("fig5", "1a571c4dc51d8a1f5ef37d91ec3de537436c342afaf48c9752fd7808cf2083b5"),
    ("fig6", "7f9d6448f30691aaf6e369cf03124a023fa6dc7b3d003dc4885ac6e8f1469fff"),
    ("fig7", "9ecca3db982f288f77f59f36c2cb9056ec458408f09e3c0dbc9f2a65aae83708"),
    ("fig8", "d6c387aa02ccee44297c609a8b2bd73d22762005eb55d7d399db4ff4a1612198"),
    ("fig9-fixed-fixed", "1a3ab3bec182752455094aaa99650556633161500182234d8e71cdf8dba3921b"),
    ("fig9-fixed-dta", "30ea2de89f8fc41070230aa4c974e804aac51d83b248e4b414442b506beb77eb"),
    ("fig9-dva-dta", "303e2f83847d3067efecf2c22e5b7b932ed400c336f9363d5f58647088d16e33"),
    ("fig10", "31d81d06fa0835a4992aff66a06ae770c2fcf12d8b079801466cbac32c478f60"),
    ("fig11", "7189e42abafc81c39f130bf117aff2755f64ae60230b46f67808b531da510687"),
    ("quant256", "d8a2cb2e31662f5efbd633ab11891bce562c7646461364e7e01c0e78cf9c8d15"),
];

fn small(cfg: ExperimentConfig, cycles: u64) -> ExperimentConfig {
    ExperimentConfig {
        wordlines: 17,
        cells_per_wordline: 514,
        max_cycles: cycles,
        ..cfg
    }
}

fn csv_text(cfg: &ExperimentConfig) -> String {
    let run = run_experiment(cfg).unwrap();
    let mut out = Vec::new();
    write_csv(&run.records, &mut out).unwrap();
    String::from_utf8(out).unwrap()
}

#[test]
fn preset_hashes_are_pinned() {
    assert_eq!(PINNED.len(), PRESET_NAMES.len());
    let mut wrong = Vec::new();
    for (name, hash) in PINNED {
        let actual = preset(name).unwrap().hash();
        if actual != *hash {
            wrong.push(format!("{name}: {actual}"));
        }
    }
    assert!(wrong.is_empty(), "changed presets:\n{}", wrong.join("\n"));
}

#[test]
fn noiseless_channel_keeps_two_bits_for_the_whole_run() {
    let cfg = small(
        ExperimentConfig {
            programming_noise: false,
            wearout_noise: false,
            retention_noise: false,
            programming_error: false,
            cell_to_cell: false,
            ..ExperimentConfig::default()
        },
        1000,
    );
    let run = run_experiment(&cfg).unwrap();
    assert_eq!(run.records.len(), 2 * 11);
    for r in &run.records {
        assert!((r.mi_true - 2.0).abs() < 1e-9, "{r:?}");
        assert_eq!(r.ber, 0.0);
    }
    assert_eq!(run.summary.lifetime.cycles, 1000);
    assert!(run.summary.lifetime.censored);
}

#[test]
fn same_seed_same_bytes() {
    let cfg = small(preset("fig8").unwrap(), 600);
    let a = csv_text(&cfg);
    assert_eq!(a, csv_text(&cfg));
    let other = ExperimentConfig { seed: cfg.seed + 1, ..cfg };
    assert_ne!(a, csv_text(&other));
}

#[test]
fn csv_and_plots_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_experiment(&small(preset("fig9-fixed-dta").unwrap(), 500)).unwrap();
    let path = dir.path().join("records.csv");
    emit_csv(&run.records, &path).unwrap();

    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_COLUMNS.join(","));
    assert_eq!(lines.len(), run.records.len() + 1);
    assert!(lines.iter().all(|l| l.split(',').count() == CSV_COLUMNS.len()));
    assert_eq!(read_csv(&path).unwrap(), run.records);

    for kind in [PlotKind::Mi, PlotKind::Alpha, PlotKind::Ber] {
        let svg = dir.path().join(format!("{kind:?}.svg"));
        emit_plot(&run.records, kind, &svg).unwrap();
        let doc = std::fs::read_to_string(&svg).unwrap();
        assert!(doc.starts_with("<svg") || doc.starts_with("<?xml"));
        assert!(doc.trim_end().ends_with("</svg>"));
    }
    assert!(render_svg(&[], PlotKind::Mi).is_err());
    assert!(emit_csv(&[], &dir.path().join("empty.csv")).is_err());
    assert!(emit_csv(&run.records, &dir.path().join("missing/records.csv")).is_err());
}

#[test]
fn fixed_allocation_information_declines() {
    let run = run_experiment(&small(preset("fixed-model2").unwrap(), 3000)).unwrap();
    for parity in Parity::ALL {
        let mi: Vec<f64> = run.parity_records(parity).map(|r| r.mi_true).collect();
        let rises = mi.windows(2).filter(|w| w[1] > w[0]).count();
        assert!(mi.last() < mi.first());
        assert!(rises <= mi.len() / 10, "{} of {} steps rise", rises, mi.len());
    }
}

#[test]
fn lifetime_follows_true_information() {
    let run = run_experiment(&small(preset("fig8").unwrap(), 1500)).unwrap();
    let cfg = &run.config;
    for (parity, life) in [(Parity::Even, run.summary.lifetime_even), (Parity::Odd, run.summary.lifetime_odd)] {
        let recs: Vec<_> = run.parity_records(parity).collect();
        match recs.iter().position(|r| r.mi_true < cfg.target_mi) {
            Some(k) => {
                assert!(!life.censored);
                assert!(life.cycles <= recs[k].cycle);
                assert!(k == 0 || life.cycles >= recs[k - 1].cycle);
            }
            None => assert!(life.censored && life.cycles == cfg.max_cycles),
        }
    }
}

#[test]
fn estimation_records_carry_fit_diagnostics() {
    let run = run_experiment(&small(preset("fig8").unwrap(), 300)).unwrap();
    for r in &run.records {
        assert!(r.mi_assumed.is_some() && r.fit_residual.is_some() && r.fit_iters.is_some());
        assert!((0.0..=2.0).contains(&r.mi_true));
    }
    let ideal = run_experiment(&small(preset("fig5").unwrap(), 300)).unwrap();
    assert!(ideal.records.iter().all(|r| r.mi_assumed.is_none()));
}
