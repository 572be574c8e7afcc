use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use viboost_core::datagen::{self, GenSpec};
use viboost_core::gibbs::{run_gibbs, GibbsProblem};
use viboost_core::hypotheses::{build_stumps, Dataset};
use viboost_core::viboost;
use viboost_lab::config::{parse_grid, parse_log_odds, Algorithm, DataSource, ExperimentSpec};
use viboost_lab::experiment::{repeat_rng, run_experiment};
use viboost_lab::loaders::{load_dense_csv, load_sparse_binary, write_dense_csv};
use viboost_lab::report::NoiseReportJson;
use viboost_lab::{LabError, LabResult};

#[derive(Parser)]
#[command(name = "viboost-lab", version, about = "Boosting with label-noise inference")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset as CSV.
    GenData(GenDataArgs),
    /// Train VIBoost once and print the noise report as JSON.
    Train(TrainArgs),
    /// Run a repeated protocol from a config file.
    Experiment(ExperimentArgs),
    /// Sample the full posterior of a small instance.
    Gibbs(GibbsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    Step,
    LongServedio,
    SparseText,
    Generic,
}

#[derive(Args)]
struct GenDataArgs {
    generator: Generator,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Type prior (step, generic).
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    /// Wing half-width (long-servedio).
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Label flip rate (long-servedio, sparse-text).
    #[arg(long, default_value_t = 0.2)]
    noise: f64,
    /// Number of examples (long-servedio) or documents (sparse-text).
    #[arg(long, default_value_t = 1200)]
    count: usize,
    #[arg(long, default_value_t = 2000)]
    vocab: usize,
    /// `step:AT`, `linear:SLOPE,INTERCEPT` or `constant:V` (generic).
    #[arg(long, default_value = "linear:0.05,0")]
    log_odds: String,
    /// Noise grade of noisy labels (generic).
    #[arg(long, default_value_t = 3f64.ln())]
    grade: f64,
    /// `LO:HI:COUNT` instance grid (generic).
    #[arg(long, default_value = "-99:99:100")]
    grid: String,
}

/// Flags that override config-file settings.
#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long, value_parser = ["viboost", "adaboost", "adaboost-smoothed", "gibbs"])]
    algo: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    mu0: Option<f64>,
    #[arg(long = "mu0-prime")]
    mu0_prime: Option<f64>,
    /// Beta hyperparameters as `Z1,Z2`.
    #[arg(long)]
    zeta: Option<String>,
    #[arg(long, overrides_with = "no_elbo")]
    elbo: bool,
    #[arg(long = "no-elbo", overrides_with = "elbo")]
    no_elbo: bool,
}

impl Overrides {
    fn spec(&self) -> LabResult<ExperimentSpec> {
        let mut spec = match &self.config {
            Some(path) => ExperimentSpec::from_file(path)?,
            None => ExperimentSpec::default(),
        };
        let mut set = |section: &str, key: &str, value: String| spec.set(section, key, &value);
        if let Some(v) = self.seed {
            set("protocol", "seed", v.to_string())?;
        }
        if let Some(v) = self.rounds {
            set("protocol", "rounds", v.to_string())?;
        }
        if let Some(v) = self.repeats {
            set("protocol", "repeats", v.to_string())?;
        }
        if let Some(v) = &self.algo {
            set("protocol", "algorithm", v.clone())?;
        }
        if let Some(v) = &self.out {
            set("protocol", "output_dir", v.display().to_string())?;
        }
        if let Some(v) = self.tau {
            set("viboost", "tau", v.to_string())?;
            set("adaboost", "tau", v.to_string())?;
        }
        if let Some(v) = self.mu0 {
            set("viboost", "mu0", v.to_string())?;
            set("adaboost", "mu0", v.to_string())?;
            set("gibbs", "mu0", v.to_string())?;
        }
        if let Some(v) = self.mu0_prime {
            set("viboost", "mu0_prime", v.to_string())?;
            set("gibbs", "mu0_prime", v.to_string())?;
        }
        if let Some(v) = &self.zeta {
            set("viboost", "zeta", v.clone())?;
            set("gibbs", "zeta", v.clone())?;
        }
        if self.elbo {
            set("viboost", "elbo", "true".into())?;
        }
        if self.no_elbo {
            set("viboost", "elbo", "false".into())?;
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset file; without it the configured data source is used.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, value_parser = ["dense-csv", "sparse-binary"], default_value = "dense-csv")]
    format: String,
    /// The dense CSV starts with a header row.
    #[arg(long)]
    header: bool,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct GibbsArgs {
    /// Dense CSV with at most 20 examples; a step-dataset sample otherwise.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    header: bool,
    /// Examples drawn from the step dataset when no file is given.
    #[arg(long, default_value_t = 6)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    #[arg(long, default_value_t = 20_000)]
    iters: usize,
    #[arg(long, default_value_t = 2_000)]
    burnin: usize,
    #[arg(long, default_value_t = 1)]
    thin: usize,
    /// Trace CSV destination; standard output when absent.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

fn output(path: Option<&PathBuf>) -> LabResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).map_err(|e| LabError::Io {
            path: p.clone(),
            source: e,
        })?),
        None => Box::new(io::stdout().lock()),
    })
}

fn io_err(path: Option<&PathBuf>, e: io::Error) -> LabError {
    LabError::Io {
        path: path.cloned().unwrap_or_else(|| PathBuf::from("<stdout>")),
        source: e,
    }
}

fn gen_data(a: &GenDataArgs) -> LabResult<()> {
    let mut rng = repeat_rng(a.seed, 0);
    let data = match a.generator {
        Generator::Step => datagen::make_step_dataset(a.theta, &mut rng)?,
        Generator::LongServedio => datagen::make_long_servedio(a.n, a.noise, a.count, &mut rng)?,
        Generator::SparseText => datagen::make_sparse_text(a.count, a.vocab, a.noise, &mut rng)?,
        Generator::Generic => {
            let spec = GenSpec {
                domain: parse_grid(&a.grid)?,
                log_odds: parse_log_odds(&a.log_odds)?,
                noise_grade: a.grade,
                type_prior: a.theta,
            };
            datagen::generate_labels(&spec, &mut rng)?
        }
    };
    let out = output(a.out.as_ref())?;
    write_dense_csv(&data, out).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => io_err(a.out.as_ref(), io),
        other => LabError::Config(format!("{other:?}")),
    })
}

fn train(a: &TrainArgs) -> LabResult<()> {
    let spec = a.overrides.spec()?;
    if spec.algorithm != Algorithm::VIBoost {
        return Err(LabError::Config("train runs VIBoost only; use experiment for other algorithms".into()));
    }
    let data: Dataset = match &a.data {
        Some(path) if a.format == "sparse-binary" => load_sparse_binary(path)?,
        Some(path) => load_dense_csv(path, a.header)?,
        None => spec.source.materialize(&mut repeat_rng(spec.seed, 0))?,
    };
    let space = build_stumps(&data)?;
    let space = if spec.include_constant { space } else { space.without_constant()? };
    let outcome = viboost::run(&data, &space, &spec.vi_config())?;
    println!("{}", NoiseReportJson::new(&outcome.report, &outcome).to_json());
    Ok(())
}

fn experiment(a: &ExperimentArgs) -> LabResult<()> {
    if a.overrides.config.is_none() {
        return Err(LabError::Config("experiment needs --config".into()));
    }
    let spec = a.overrides.spec()?;
    let table = run_experiment(&spec)?;
    if spec.output_dir.is_none() {
        table.write_csv(io::stdout().lock()).map_err(|e| io_err(None, e))?;
    } else {
        let last = table.rounds - 1;
        eprintln!(
            "{} repeats of {}: final train error {:.4}",
            table.repeats.len(),
            table.algorithm,
            table.train_error.mean[last]
        );
    }
    Ok(())
}

fn gibbs(a: &GibbsArgs) -> LabResult<()> {
    let spec = a.overrides.spec()?;
    let mut rng = repeat_rng(spec.seed, 0);
    let data = match &a.data {
        Some(path) => load_dense_csv(path, a.header)?,
        None => {
            let full = DataSource::Step { theta: a.theta }.materialize(&mut rng)?;
            if a.n < 1 || a.n > full.n() {
                return Err(LabError::Config(format!("n must lie in 1..={}", full.n())));
            }
            let picks: Vec<usize> = (0..a.n).map(|i| i * full.n() / a.n).collect();
            full.subset(&picks)?
        }
    };
    let space = build_stumps(&data)?;
    let problem = GibbsProblem::from_space(&data, &space)?;
    let trace = run_gibbs(&problem, &spec.gibbs.hyper, a.iters, a.burnin, a.thin, &mut rng)?;
    let dest = a.trace.as_ref().or(a.overrides.out.as_ref());
    let out = output(dest)?;
    trace.write_csv(out).map_err(|e| io_err(dest, e))?;
    eprintln!(
        "E[theta] = {:.4}, E[xi] = {:.4} over {} samples",
        trace.mean_theta(),
        trace.mean_xi(),
        trace.samples.len()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::GenData(a) => gen_data(a),
        Command::Train(a) => train(a),
        Command::Experiment(a) => experiment(a),
        Command::Gibbs(a) => gibbs(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
