mod config;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use regemt::evaluation::{ablate, cross_lingual_eval, evaluate, ScoringInput};
use regemt::metrics::Scorer;
use regemt::report::fixed6;

use crate::config::{Loaded, RunConfig, CONFIG_HELP};

#[derive(Parser)]
#[command(name = "regemt", version, about = "Score, ensemble and evaluate machine-translation metrics")]
#[command(after_long_help = CONFIG_HELP)]
struct Cli {
    /// Worker threads for segment scoring (default: all cores)
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON, see `regemt help <command>`)
    #[arg(long, value_name = "PATH")]
    config: PathBuf,

    /// Output directory, overriding `output_dir` from the config
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write per-segment metric scores to scores.tsv
    #[command(after_long_help = CONFIG_HELP)]
    Score(Common),
    /// Fit RegEMT and Reg-base on the train split and report test correlations
    #[command(after_long_help = CONFIG_HELP)]
    Evaluate(Common),
    /// Correlation-driven feature elimination, written to ablation.csv
    #[command(after_long_help = CONFIG_HELP)]
    Ablate(Common),
    /// Fit on one dataset's train split, evaluate on another's test split
    #[command(after_long_help = CONFIG_HELP)]
    Crosslingual {
        #[command(flatten)]
        common: Common,
        /// Configuration of the evaluated dataset; its metric settings must
        /// match the fitting configuration
        #[arg(long, value_name = "PATH")]
        eval_config: PathBuf,
    },
}

enum Failure {
    Validation(String),
    Data(String),
}

impl From<regemt::Error> for Failure {
    fn from(e: regemt::Error) -> Self {
        match e {
            regemt::Error::Config(_) | regemt::Error::FeatureMismatch { .. } => Failure::Validation(e.to_string()),
            other => Failure::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

fn read_config(path: &Path, needs_reg_base: bool) -> Result<RunConfig, Failure> {
    let cfg = RunConfig::read(path).map_err(Failure::Validation)?;
    let problems = cfg.problems(needs_reg_base);
    if !problems.is_empty() {
        return Err(regemt::Error::Config(problems).into());
    }
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig, common: &Common) -> Result<PathBuf, Failure> {
    let dir = common.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    let path = dir.join(name);
    log::info!("writing {}", path.display());
    Ok(BufWriter::new(File::create(path)?))
}

fn input(loaded: &Loaded) -> ScoringInput<'_> {
    ScoringInput {
        dataset: &loaded.dataset,
        resources: &loaded.resources,
        external: loaded.external.as_ref(),
    }
}

fn cmd_score(common: &Common) -> Result<(), Failure> {
    let cfg = read_config(&common.config, false)?;
    let dir = out_dir(&cfg, common)?;
    let loaded = cfg.load()?;
    let scorer = Scorer::new(&loaded.dataset, &cfg.metric_config(), &loaded.resources)?;
    let mut table = scorer.score_all(&loaded.dataset)?;
    if let Some(ext) = &loaded.external {
        table.join(ext)?;
    }
    // no split here: placeholders come from the whole dataset
    let all: Vec<usize> = (0..table.ids().len()).collect();
    let placeholders = table.placeholders(&all);
    let mut out = create(&dir, "scores.tsv")?;
    table.write_tsv(&mut out, &placeholders)?;
    out.flush()?;
    Ok(())
}

fn cmd_evaluate(common: &Common) -> Result<(), Failure> {
    let cfg = read_config(&common.config, true)?;
    let dir = out_dir(&cfg, common)?;
    let loaded = cfg.load()?;
    let eval = evaluate(&input(&loaded), &cfg.pipeline())?;

    let mut out = create(&dir, "results.tsv")?;
    eval.write_results(&mut out, &loaded.dataset.name)?;
    out.flush()?;
    let mut out = create(&dir, "correlations.tsv")?;
    eval.correlations.write_tsv(&mut out)?;
    out.flush()?;
    let mut out = create(&dir, "scores.tsv")?;
    eval.prepared.table.write_tsv(&mut out, &eval.placeholders)?;
    out.flush()?;
    eval.model.save(dir.join("model.json"))?;
    eval.reg_base.save(dir.join("reg-base-model.json"))?;
    for (name, rho) in &eval.results {
        println!("{name}\t{}", fixed6(*rho));
    }
    Ok(())
}

fn cmd_ablate(common: &Common) -> Result<(), Failure> {
    let cfg = read_config(&common.config, false)?;
    let dir = out_dir(&cfg, common)?;
    let loaded = cfg.load()?;
    let curve = ablate(&input(&loaded), &cfg.pipeline())?;
    let mut out = create(&dir, "ablation.csv")?;
    curve.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn cmd_crosslingual(common: &Common, eval_config: &Path) -> Result<(), Failure> {
    let fit_cfg = read_config(&common.config, false)?;
    let eval_cfg = read_config(eval_config, false)?;
    if eval_cfg.metric_config() != fit_cfg.metric_config() {
        return Err(Failure::Validation(format!(
            "{} and {} configure different metrics",
            common.config.display(),
            eval_config.display()
        )));
    }
    let dir = out_dir(&fit_cfg, common)?;
    let fit = fit_cfg.load()?;
    let eval = eval_cfg.load()?;
    let rho = cross_lingual_eval(&input(&fit), &input(&eval), &fit_cfg.pipeline())?;
    let mut out = create(&dir, "crosslingual.tsv")?;
    writeln!(out, "fit\teval\tRegEMT-X")?;
    writeln!(out, "{}\t{}\t{}", fit.dataset.name, eval.dataset.name, fixed6(rho))?;
    out.flush()?;
    println!("RegEMT-X\t{}", fixed6(rho));
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Score(c) => cmd_score(c),
        Command::Evaluate(c) => cmd_evaluate(c),
        Command::Ablate(c) => cmd_ablate(c),
        Command::Crosslingual { common, eval_config } => cmd_crosslingual(common, eval_config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
