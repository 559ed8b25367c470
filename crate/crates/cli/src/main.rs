//! `ordcollab`: synthesize corpora, featurize, train and evaluate.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use ordcollab_core::corpus::Dataset;
use ordcollab_core::eval::{
    load_dataset, logo_splits, read_report, render_report, run_fold, run_on_dataset, run_sweep, write_report,
    SweepGrid, REPORT_JSON, SUMMARY_CSV,
};
use ordcollab_core::nn::{LossKind, Snapshot};
use ordcollab_core::synth::{generate_corpus, write_synth_corpus, SynthConfig};

use config::{corpus_path, invalid, load_json, output_dir, resolve_seed, write_file, ExperimentArgs, Invalid};

#[derive(Debug, Parser)]
#[command(name = "ordcollab", version = ordcollab_core::VERSION, about = "Ordinal collaboration-quality classification toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic corpus.
    Synth {
        /// Synthesis config (JSON); defaults are used when omitted.
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Write the feature dataset of a corpus as CSV.
    Featurize {
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Train a network on one fold and save its snapshot.
    Train {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Held-out group of the fold to train.
        #[arg(long)]
        fold: String,
    },
    /// Run leave-one-group-out evaluation and write a report.
    Eval {
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Evaluate every τ × n × loss × balancing combination.
    Sweep {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.55,0.75,0.95")]
        taus: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "200,500,1000")]
        ns: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "oce")]
        losses: Vec<LossKind>,
        #[arg(long = "balancing-grid", value_delimiter = ',', default_value = "false")]
        balancing_grid: Vec<bool>,
        /// Cells evaluated at once (defaults to the number of CPUs).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print report files (or directories holding report.json) as text.
    Report {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_validation(&e) {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn is_validation(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<Invalid>().is_some()
            || c.downcast_ref::<ordcollab_core::Error>()
                .is_some_and(|e| e.is_validation())
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { config, seed, out } => synth(config.as_deref(), seed, &out),
        Command::Featurize { exp } => featurize(&exp),
        Command::Train { exp, fold } => train(&exp, &fold),
        Command::Eval { exp } => eval(&exp),
        Command::Sweep {
            exp,
            taus,
            ns,
            losses,
            balancing_grid,
            jobs,
        } => sweep(
            &exp,
            SweepGrid {
                taus,
                n_per_class: ns,
                losses,
                class_balancing: balancing_grid,
            },
            jobs,
        ),
        Command::Report { paths } => report(&paths),
    }
}

fn synth(config: Option<&Path>, seed: Option<u64>, out: &Path) -> Result<()> {
    let (mut cfg, config_seed) = match config {
        Some(p) => {
            let (cfg, has_seed): (SynthConfig, bool) = load_json(p)?;
            let s = has_seed.then_some(cfg.seed);
            (cfg, s)
        }
        None => (SynthConfig::default(), None),
    };
    cfg.seed = resolve_seed(seed, config_seed)?;
    cfg.validate().map_err(|e| invalid(e.to_string()))?;
    let corpus = generate_corpus(&cfg)?;
    write_synth_corpus(out, &corpus).with_context(|| format!("writing corpus to {}", out.display()))?;
    write_file(
        &out.join("synth_config.json"),
        &(serde_json::to_string_pretty(&cfg)? + "\n"),
    )?;
    println!(
        "wrote {} task recordings ({} tasks, seed {}) to {}",
        corpus.tasks.len(),
        corpus.truth.len(),
        cfg.seed,
        out.display()
    );
    Ok(())
}

fn dataset_for(exp: &ExperimentArgs) -> Result<(ordcollab_core::eval::ExperimentConfig, Dataset)> {
    let cfg = exp.resolve()?;
    let corpus = corpus_path(&cfg)?;
    let data = load_dataset(&corpus, &cfg).with_context(|| format!("loading corpus {}", corpus.display()))?;
    Ok((cfg, data))
}

fn featurize(exp: &ExperimentArgs) -> Result<()> {
    let (cfg, data) = dataset_for(exp)?;
    let out = cfg
        .output_dir
        .clone()
        .ok_or_else(|| invalid("featurize needs --out <file.csv>"))?;
    data.write_csv(&out)?;
    println!(
        "wrote {} samples ({}-dim {}) to {}",
        data.len(),
        data.dim(),
        data.feature_kind,
        out.display()
    );
    Ok(())
}

fn train(exp: &ExperimentArgs, fold: &str) -> Result<()> {
    let (cfg, data) = dataset_for(exp)?;
    if cfg.model != ordcollab_core::eval::ModelKind::Mlp {
        return Err(invalid("train needs a network model; --baseline has nothing to save"));
    }
    let out = output_dir(&cfg)?;
    let folds = logo_splits(&data, &cfg.pinned())?;
    let (index, spec) = folds
        .iter()
        .enumerate()
        .find(|(_, f)| f.held_out_group == fold)
        .ok_or_else(|| {
            let groups: Vec<&str> = folds.iter().map(|f| f.held_out_group.as_str()).collect();
            invalid(format!(
                "no fold holds out group {fold:?}; available: {}",
                groups.join(", ")
            ))
        })?;
    let outcome = run_fold(&data, spec, index, &cfg).map_err(|e| anyhow!(e).context(format!("fold {fold}")))?;
    let trained = outcome.model.expect("network model");
    let path = if out.extension().is_some_and(|e| e == "json") {
        out
    } else {
        out.join(format!("model_{fold}.json"))
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Snapshot::from_model(&trained.model, Some(&cfg.train)).save(&path)?;
    let r = &outcome.result;
    println!(
        "fold {fold}: best epoch {} (test loss {:.4}); precision {:.4} recall {:.4} f1 {:.4}; model saved to {}",
        trained.best_epoch,
        trained.best_test_loss,
        r.precision,
        r.recall,
        r.f1,
        path.display()
    );
    Ok(())
}

fn eval(exp: &ExperimentArgs) -> Result<()> {
    let (cfg, data) = dataset_for(exp)?;
    let out = output_dir(&cfg)?;
    let report = run_on_dataset(&data, &cfg)?;
    write_report(&out, &report)?;
    print!("{}", render_report(&report));
    println!("\nreport written to {}", out.display());
    Ok(())
}

fn sweep(exp: &ExperimentArgs, grid: SweepGrid, jobs: Option<usize>) -> Result<()> {
    let (cfg, data) = dataset_for(exp)?;
    let out = output_dir(&cfg)?;
    grid.validate().map_err(|e| invalid(e.to_string()))?;
    for cell in grid.cells() {
        cell.apply(&cfg)
            .validate()
            .map_err(|e| invalid(format!("sweep cell {}: {e}", cell.name())))?;
    }
    let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let results = run_sweep(&data, &cfg, &grid, &out, jobs)?;
    println!("{:<28} {:>16} {:>16} {:>16}", "cell", "precision", "recall", "f1");
    for (cell, r) in &results {
        let s = &r.summary;
        println!(
            "{:<28} {:>7.4} ± {:<6.4} {:>7.4} ± {:<6.4} {:>7.4} ± {:<6.4}",
            cell.name(),
            s.precision.mean,
            s.precision.std,
            s.recall.mean,
            s.recall.std,
            s.f1.mean,
            s.f1.std
        );
    }
    println!(
        "\n{} reports and {} written to {}",
        results.len(),
        SUMMARY_CSV,
        out.display()
    );
    Ok(())
}

fn report(paths: &[PathBuf]) -> Result<()> {
    for (i, p) in paths.iter().enumerate() {
        let file = if p.is_dir() { p.join(REPORT_JSON) } else { p.clone() };
        let r = read_report(&file).map_err(|e| invalid(format!("{}: {e}", file.display())))?;
        if i > 0 {
            println!();
        }
        if paths.len() > 1 {
            println!("== {}", file.display());
        }
        print!("{}", render_report(&r));
    }
    Ok(())
}
