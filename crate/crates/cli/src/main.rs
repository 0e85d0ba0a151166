//! Command-line verifier for the bump-condition inequality suites.

mod config;
mod report;
mod suites;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use bumpcert_core::dyadic::{a2_constant, a2_extremal_pair, bump_constant, orlicz_bump_constant, Lattice, WeightKind};
use bumpcert_core::gauge::{BumpGauge, YoungFunction};
use clap::{Parser, Subcommand};
use rayon::prelude::*;

use config::ExperimentConfig;
use report::RunReport;
use suites::{Context, Suite};

#[derive(Parser)]
#[command(name = "bumpcert", version, about = "Randomized verification of two-weight bump inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one verifier suite and write its report.
    Verify {
        suite: Suite,
        /// ExperimentConfig JSON; defaults apply to every omitted field.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        /// Replay a single trial.
        #[arg(long, conflicts_with = "trials")]
        trial: Option<u64>,
        #[arg(long, default_value = "bumpcert-out")]
        out: PathBuf,
    },
    /// Print the summary of a finished run.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Print A₂, Orlicz and n_Ψ bump constants of the configured weights.
    Bump {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Failure that maps to exit status 2.
struct Usage(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Verify {
            suite,
            config,
            seed,
            trials,
            trial,
            out,
        } => verify(suite, config.as_deref(), seed, trials, trial, &out),
        Command::Report { input } => show_report(&input),
        Command::Bump { config } => bump(&config).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn verify(
    suite: Suite,
    config: Option<&Path>,
    seed: Option<u64>,
    trials: Option<u64>,
    trial: Option<u64>,
    out: &Path,
) -> std::result::Result<bool, Usage> {
    let mut cfg = load_config(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(t) = trials {
        cfg.trials = t;
    }
    let ctx = Context::new(suite, cfg)?;
    let ids: Vec<u64> = match trial {
        Some(k) => vec![k],
        None => (0..ctx.cfg.trials).collect(),
    };
    let outputs: Vec<_> = ids.par_iter().map(|&t| ctx.run_trial(t)).collect();
    let mut ledger: Option<String> = None;
    let mut rows = Vec::with_capacity(outputs.len());
    for o in outputs {
        if let Some(l) = o.ledger {
            ledger.get_or_insert_with(String::new).push_str(&l);
        }
        rows.push(o.row);
    }
    let report = RunReport::new(&ctx, rows, ledger);
    report.write(out)?;
    print!("{}", report::markdown(&report.summary));
    println!("\nreport written to {}", out.display());
    Ok(report.summary.pass)
}

fn show_report(dir: &Path) -> std::result::Result<bool, Usage> {
    let summary = report::load_summary(dir)?;
    print!("{}", report::markdown(&summary));
    Ok(summary.pass)
}

fn young_for(g: &bumpcert_core::gauge::GaugeSpec) -> Result<YoungFunction> {
    Ok(YoungFunction::log_power(g.alpha())?)
}

fn bump_row(lat: &Lattice, v: &[f64], w: &[f64], gauges: &Gauges) -> [(f64, String); 3] {
    let path = |id| {
        let p = lat.path(id);
        if p.is_empty() {
            "root".to_string()
        } else {
            p
        }
    };
    let a2 = a2_constant(lat, v, w);
    let orl = orlicz_bump_constant(lat, v, w, &gauges.phi2, &gauges.phi1);
    let nb = bump_constant(lat, v, w, &gauges.g2, &gauges.g1);
    [
        (a2.value, path(a2.cell)),
        (orl.value, path(orl.cell)),
        (nb.value, path(nb.cell)),
    ]
}

struct Gauges {
    g1: BumpGauge,
    g2: BumpGauge,
    phi1: YoungFunction,
    phi2: YoungFunction,
}

fn bump(config: &Path) -> std::result::Result<(), Usage> {
    let cfg = ExperimentConfig::load(config)?;
    let lat = cfg.lattice.build()?;
    let (s1, s2) = cfg.gauge_specs();
    let (g1, g2) = cfg.gauges()?;
    let gauges = Gauges {
        g1,
        g2,
        phi1: young_for(&s1)?,
        phi2: young_for(&s2)?,
    };
    let specs = &cfg.weights;
    let (v, w) = match (specs.v.as_ref(), specs.w.as_ref()) {
        (None, None) => return Err(anyhow!("weights: configure weights.v and/or weights.w").into()),
        (Some(s), None) | (None, Some(s)) => s.generate_pair_seeded(&lat, s.seed)?,
        (Some(a), Some(b)) => (
            a.generate_pair_seeded(&lat, a.seed)?.0,
            b.generate_pair_seeded(&lat, b.seed)?.1,
        ),
    };
    println!("v paired with gauge2 {}, w paired with gauge {}\n", serde_json::to_string(&s2)?, serde_json::to_string(&s1)?);
    println!("| quantity | value | attained at |\n|---|---|---|");
    let labels = [
        "A₂: sup ⟨v⟩^½⟨w⟩^½",
        "Orlicz: sup ‖v‖_Φ₂‖w‖_Φ₁",
        "n_Ψ: sup n_Ψ₂(N^v)·n_Ψ₁(N^w)",
    ];
    for (label, (value, cell)) in labels.iter().zip(bump_row(&lat, &v, &w, &gauges)) {
        println!("| {label} | {value:.6e} | {cell} |");
    }
    let extremal = [&specs.v, &specs.w]
        .iter()
        .any(|s| matches!(s.as_ref().map(|s| &s.kind), Some(WeightKind::A2ExtremalPair { .. })));
    if extremal {
        println!("\nExtremal pair sweep\n\n| a | A₂ | Orlicz | n_Ψ |\n|---|---|---|---|");
        for a in [0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 0.99] {
            let (v, w) = a2_extremal_pair(&lat, a)?;
            let [x, y, z] = bump_row(&lat, &v, &w, &gauges);
            println!("| {a} | {:.6e} | {:.6e} | {:.6e} |", x.0, y.0, z.0);
        }
    }
    Ok(())
}
