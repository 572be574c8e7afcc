//! Experiment description and its `key = value` file format.
//!
//! ```text
//! [data]
//! source = long-servedio
//! n = 10
//! noise = 0.2
//! count = 1200
//!
//! [protocol]
//! algorithm = viboost
//! train_count = 200
//! test_count = 1000
//! rounds = 50
//! repeats = 40
//! seed = 7
//! ```

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use viboost_core::datagen::{self, GenSpec, LogOdds};
use viboost_core::gibbs::GibbsHyper;
use viboost_core::hypotheses::Dataset;
use viboost_core::viboost::{AlphaRule, VIConfig};

use crate::error::{LabError, LabResult};
use crate::loaders;

#[derive(Debug, Clone)]
pub enum DataSource {
    Step { theta: f64 },
    LongServedio { n: usize, noise: f64, count: usize },
    /// Synthetic stand-in for a document collection; not real text.
    SparseText { docs: usize, vocab: usize, flip: f64 },
    /// 1-D grid labeled by an arbitrary generator.
    Generic { spec: GenSpec },
    DenseCsv { path: PathBuf, header: bool },
    SparseBinary { path: PathBuf },
}

impl DataSource {
    pub fn is_generated(&self) -> bool {
        !matches!(self, DataSource::DenseCsv { .. } | DataSource::SparseBinary { .. })
    }

    /// Produce a dataset: draw from the generator or read the file.
    pub fn materialize<R: Rng + ?Sized>(&self, rng: &mut R) -> LabResult<Dataset> {
        Ok(match self {
            DataSource::Step { theta } => datagen::make_step_dataset(*theta, rng)?,
            DataSource::LongServedio { n, noise, count } => datagen::make_long_servedio(*n, *noise, *count, rng)?,
            DataSource::SparseText { docs, vocab, flip } => datagen::make_sparse_text(*docs, *vocab, *flip, rng)?,
            DataSource::Generic { spec } => datagen::generate_labels(spec, rng)?,
            DataSource::DenseCsv { path, header } => loaders::load_dense_csv(path, *header)?,
            DataSource::SparseBinary { path } => loaders::load_sparse_binary(path)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    VIBoost,
    AdaBoost,
    AdaBoostSmoothed,
    Gibbs,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::VIBoost => "viboost",
            Algorithm::AdaBoost => "adaboost",
            Algorithm::AdaBoostSmoothed => "adaboost-smoothed",
            Algorithm::Gibbs => "gibbs",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = LabError;

    fn from_str(s: &str) -> LabResult<Self> {
        match s {
            "viboost" => Ok(Algorithm::VIBoost),
            "adaboost" => Ok(Algorithm::AdaBoost),
            "adaboost-smoothed" => Ok(Algorithm::AdaBoostSmoothed),
            "gibbs" => Ok(Algorithm::Gibbs),
            other => Err(LabError::Config(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// How each repeat divides the examples into training and test sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitRule {
    /// Train on everything; no test set.
    All,
    /// Random fraction for training, the rest for testing.
    Fraction(f64),
    /// Fixed counts; `test = None` tests on every remaining example.
    Counts { train: usize, test: Option<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsSettings {
    pub iters: usize,
    pub burnin: usize,
    pub thin: usize,
    pub hyper: GibbsHyper,
}

impl Default for GibbsSettings {
    fn default() -> Self {
        Self {
            iters: 20_000,
            burnin: 2_000,
            thin: 1,
            hyper: GibbsHyper::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub source: DataSource,
    pub algorithm: Algorithm,
    pub split: SplitRule,
    pub rounds: usize,
    pub repeats: usize,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    /// Draw a fresh dataset for each repeat when the source is a generator.
    pub regenerate: bool,
    /// Keep the stump that predicts +1 everywhere.
    pub include_constant: bool,
    pub viboost: VIConfig,
    pub adaboost_mu0: f64,
    pub adaboost_tau: f64,
    pub gibbs: GibbsSettings,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            source: DataSource::Step { theta: 0.5 },
            algorithm: Algorithm::VIBoost,
            split: SplitRule::All,
            rounds: 50,
            repeats: 1,
            seed: 0,
            output_dir: None,
            regenerate: true,
            include_constant: true,
            viboost: VIConfig::default(),
            adaboost_mu0: 1.0,
            adaboost_tau: 1.0,
            gibbs: GibbsSettings::default(),
        }
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> LabResult<T> {
    value
        .parse()
        .map_err(|_| LabError::Config(format!("{key}: cannot parse {value:?}")))
}

fn boolean(key: &str, value: &str) -> LabResult<bool> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(LabError::Config(format!("{key}: expected a boolean, got {value:?}"))),
    }
}

/// Parse `a,b`.
pub fn pair(key: &str, value: &str) -> LabResult<[f64; 2]> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok([num(key, a)?, num(key, b)?]),
        _ => Err(LabError::Config(format!("{key}: expected two comma-separated values, got {value:?}"))),
    }
}

/// `step:AT`, `linear:SLOPE,INTERCEPT` or `constant:V`.
pub fn parse_log_odds(value: &str) -> LabResult<LogOdds> {
    let (kind, args) = value.split_once(':').unwrap_or((value, ""));
    match kind {
        "step" => Ok(LogOdds::Step {
            at: if args.is_empty() { 0.0 } else { num("log_odds", args)? },
        }),
        "linear" => {
            let [slope, intercept] = pair("log_odds", args)?;
            Ok(LogOdds::Linear { slope, intercept })
        }
        "constant" => Ok(LogOdds::Constant(num("log_odds", args)?)),
        _ => Err(LabError::Config(format!("log_odds: unknown form {value:?}"))),
    }
}

/// `LO:HI:COUNT`, evenly spaced and inclusive.
pub fn parse_grid(value: &str) -> LabResult<Vec<Vec<f64>>> {
    let parts: Vec<&str> = value.split(':').collect();
    let [lo, hi, count] = parts.as_slice() else {
        return Err(LabError::Config(format!("grid: expected LO:HI:COUNT, got {value:?}")));
    };
    let (lo, hi, count): (f64, f64, usize) = (num("grid", lo)?, num("grid", hi)?, num("grid", count)?);
    if count < 1 || !(lo <= hi) {
        return Err(LabError::Config(format!("grid: empty range {value:?}")));
    }
    if count == 1 {
        return Ok(vec![vec![lo]]);
    }
    let step = (hi - lo) / (count - 1) as f64;
    Ok((0..count).map(|i| vec![lo + step * i as f64]).collect())
}

fn bare_message(e: LabError) -> String {
    match e {
        LabError::Config(m) => m,
        other => other.to_string(),
    }
}

impl ExperimentSpec {
    pub fn from_file(path: impl AsRef<Path>) -> LabResult<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            LabError::Parse { line, column, message, .. } => LabError::Parse {
                path: path.to_path_buf(),
                line,
                column,
                message,
            },
            other => other,
        })
    }

    /// Parse a config file body on top of the defaults.
    pub fn parse(text: &str) -> LabResult<Self> {
        let mut spec = Self::default();
        let mut section = String::new();
        // `source` decides how the other [data] keys are read, so apply it first.
        let mut data_keys = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |message: String| LabError::Parse {
                path: PathBuf::from("<config>"),
                line: k + 1,
                column: 1,
                message,
            };
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                if !["data", "protocol", "viboost", "adaboost", "stumps", "gibbs"].contains(&section.as_str()) {
                    return Err(at(format!("unknown section [{section}]")));
                }
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(at(format!("expected key = value, got {line:?}")));
            };
            let (key, value) = (key.trim(), value.trim());
            if section.is_empty() {
                return Err(at(format!("{key} appears before any section header")));
            }
            if section == "data" {
                data_keys.push((k + 1, key.to_string(), value.to_string()));
                continue;
            }
            spec.set(&section, key, value).map_err(|e| at(bare_message(e)))?;
        }
        data_keys.sort_by_key(|(_, key, _)| key != "source");
        for (line, key, value) in data_keys {
            spec.set("data", &key, &value).map_err(|e| LabError::Parse {
                path: PathBuf::from("<config>"),
                line,
                column: 1,
                message: bare_message(e),
            })?;
        }
        spec.validate()?;
        Ok(spec)
    }

    /// Apply one setting. Command-line overrides go through here too.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> LabResult<()> {
        let unknown = || LabError::Config(format!("unknown key {key:?} in [{section}]"));
        match section {
            "data" => self.set_data(key, value)?,
            "protocol" => match key {
                "algorithm" => self.algorithm = value.parse()?,
                "rounds" => self.rounds = num(key, value)?,
                "repeats" => self.repeats = num(key, value)?,
                "seed" => self.seed = num(key, value)?,
                "output_dir" => self.output_dir = Some(PathBuf::from(value)),
                "regenerate" => self.regenerate = boolean(key, value)?,
                "split" => match value {
                    "all" => self.split = SplitRule::All,
                    _ => return Err(LabError::Config(format!("split: only \"all\" is named, got {value:?}"))),
                },
                "train_fraction" => self.split = SplitRule::Fraction(num(key, value)?),
                "train_count" => {
                    let test = match self.split {
                        SplitRule::Counts { test, .. } => test,
                        _ => None,
                    };
                    self.split = SplitRule::Counts {
                        train: num(key, value)?,
                        test,
                    }
                }
                "test_count" => {
                    let SplitRule::Counts { train, .. } = self.split else {
                        return Err(LabError::Config("test_count needs train_count first".into()));
                    };
                    self.split = SplitRule::Counts {
                        train,
                        test: Some(num(key, value)?),
                    }
                }
                _ => return Err(unknown()),
            },
            "viboost" => {
                let v = &mut self.viboost;
                match key {
                    "mu0" => v.mu0 = num(key, value)?,
                    "mu0_prime" => v.mu0_prime = num(key, value)?,
                    "zeta" => v.zeta = pair(key, value)?,
                    "tau" => v.tau = num(key, value)?,
                    "elbo" => v.elbo_enabled = boolean(key, value)?,
                    "inner_tol" => v.inner_tol = num(key, value)?,
                    "inner_max" => v.inner_max = num(key, value)?,
                    "fixed_inner" => v.fixed_inner = num(key, value)?,
                    "alpha_rule" => {
                        v.alpha_rule = match value {
                            "approximate" => AlphaRule::Approximate,
                            "exact" => AlphaRule::Exact,
                            _ => return Err(LabError::Config(format!("alpha_rule: unknown rule {value:?}"))),
                        }
                    }
                    "init_phi" => v.init_phi = num(key, value)?,
                    "init_omega" => v.init_omega = pair(key, value)?,
                    "init_eta" => v.init_eta = pair(key, value)?,
                    _ => return Err(unknown()),
                }
            }
            "adaboost" => match key {
                "mu0" => self.adaboost_mu0 = num(key, value)?,
                "tau" => self.adaboost_tau = num(key, value)?,
                _ => return Err(unknown()),
            },
            "stumps" => match key {
                "include_constant" => self.include_constant = boolean(key, value)?,
                _ => return Err(unknown()),
            },
            "gibbs" => {
                let g = &mut self.gibbs;
                match key {
                    "iters" => g.iters = num(key, value)?,
                    "burnin" => g.burnin = num(key, value)?,
                    "thin" => g.thin = num(key, value)?,
                    "mu0" => g.hyper.mu0 = num(key, value)?,
                    "mu0_prime" => g.hyper.mu0_prime = num(key, value)?,
                    "zeta" => g.hyper.zeta = pair(key, value)?,
                    _ => return Err(unknown()),
                }
            }
            _ => return Err(LabError::Config(format!("unknown section [{section}]"))),
        }
        Ok(())
    }

    fn set_data(&mut self, key: &str, value: &str) -> LabResult<()> {
        let bad = || LabError::Config(format!("key {key:?} does not apply to this data source"));
        if key == "source" {
            self.source = match value {
                "step" => DataSource::Step { theta: 0.5 },
                "long-servedio" => DataSource::LongServedio {
                    n: 10,
                    noise: 0.2,
                    count: 1200,
                },
                "sparse-text" => DataSource::SparseText {
                    docs: 145,
                    vocab: 2000,
                    flip: 0.1,
                },
                "generic" => DataSource::Generic {
                    spec: GenSpec {
                        domain: datagen::step_domain(),
                        log_odds: LogOdds::Linear {
                            slope: 0.05,
                            intercept: 0.0,
                        },
                        noise_grade: 3f64.ln(),
                        type_prior: 0.5,
                    },
                },
                "dense-csv" => DataSource::DenseCsv {
                    path: PathBuf::new(),
                    header: false,
                },
                "sparse-binary" => DataSource::SparseBinary { path: PathBuf::new() },
                other => return Err(LabError::Config(format!("unknown data source {other:?}"))),
            };
            return Ok(());
        }
        match (&mut self.source, key) {
            (DataSource::Step { theta }, "theta") => *theta = num(key, value)?,
            (DataSource::LongServedio { n, .. }, "n") => *n = num(key, value)?,
            (DataSource::LongServedio { noise, .. }, "noise") => *noise = num(key, value)?,
            (DataSource::LongServedio { count, .. }, "count") => *count = num(key, value)?,
            (DataSource::SparseText { docs, .. }, "docs") => *docs = num(key, value)?,
            (DataSource::SparseText { vocab, .. }, "vocab") => *vocab = num(key, value)?,
            (DataSource::SparseText { flip, .. }, "flip") => *flip = num(key, value)?,
            (DataSource::Generic { spec }, "theta") => spec.type_prior = num(key, value)?,
            (DataSource::Generic { spec }, "noise_grade") => spec.noise_grade = num(key, value)?,
            (DataSource::Generic { spec }, "log_odds") => spec.log_odds = parse_log_odds(value)?,
            (DataSource::Generic { spec }, "grid") => spec.domain = parse_grid(value)?,
            (DataSource::DenseCsv { path, .. } | DataSource::SparseBinary { path }, "path") => *path = PathBuf::from(value),
            (DataSource::DenseCsv { header, .. }, "header") => *header = boolean(key, value)?,
            _ => return Err(bad()),
        }
        Ok(())
    }

    pub fn validate(&self) -> LabResult<()> {
        if self.repeats < 1 {
            return Err(LabError::Config("repeats must be at least 1".into()));
        }
        if self.rounds < 1 {
            return Err(LabError::Config("rounds must be at least 1".into()));
        }
        match self.split {
            SplitRule::Fraction(f) if !(f > 0.0 && f < 1.0) => {
                return Err(LabError::Config(format!("train_fraction must lie in (0, 1), got {f}")))
            }
            SplitRule::Counts { train: 0, .. } => return Err(LabError::Config("train_count must be at least 1".into())),
            _ => {}
        }
        if let DataSource::DenseCsv { path, .. } | DataSource::SparseBinary { path } = &self.source {
            if path.as_os_str().is_empty() {
                return Err(LabError::Config("file data source needs a path".into()));
            }
        }
        let vi = VIConfig {
            rounds: self.rounds,
            ..self.viboost.clone()
        };
        vi.validate().map_err(|e| LabError::Config(e.to_string()))?;
        if !(self.adaboost_mu0 >= 0.0) || !(self.adaboost_tau > 0.0) {
            return Err(LabError::Config("adaboost mu0 must be ≥ 0 and tau positive".into()));
        }
        let g = &self.gibbs;
        g.hyper.validate().map_err(|e| LabError::Config(e.to_string()))?;
        if g.thin < 1 || g.iters <= g.burnin {
            return Err(LabError::Config("gibbs needs thin ≥ 1 and iters > burnin".into()));
        }
        if self.algorithm == Algorithm::Gibbs && (g.iters - g.burnin) / g.thin < self.rounds {
            return Err(LabError::Config("gibbs keeps fewer samples than there are rounds".into()));
        }
        Ok(())
    }

    /// VIBoost settings with the experiment's round count.
    pub fn vi_config(&self) -> VIConfig {
        VIConfig {
            rounds: self.rounds,
            ..self.viboost.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_long_servedio_protocol() {
        let spec = ExperimentSpec::parse(
            "# comment\n[protocol]\nalgorithm = adaboost\ntrain_count = 200\ntest_count = 1000\nrounds = 50\nrepeats = 40\n\
             [data]\nnoise = 0.2\nsource = long-servedio\nn = 10\n[stumps]\ninclude_constant = false\n",
        )
        .unwrap();
        assert_eq!(spec.algorithm, Algorithm::AdaBoost);
        assert_eq!(
            spec.split,
            SplitRule::Counts {
                train: 200,
                test: Some(1000)
            }
        );
        assert!(matches!(spec.source, DataSource::LongServedio { n: 10, count: 1200, .. }));
        assert!(!spec.include_constant);
        assert_eq!((spec.rounds, spec.repeats), (50, 40));
    }

    #[test]
    fn viboost_section() {
        let spec = ExperimentSpec::parse("[viboost]\nzeta = 2, 3\nelbo = true\nalpha_rule = exact\n").unwrap();
        assert_eq!(spec.viboost.zeta, [2.0, 3.0]);
        assert!(spec.viboost.elbo_enabled);
        assert_eq!(spec.viboost.alpha_rule, AlphaRule::Exact);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            ExperimentSpec::parse("[protocol]\nrepeats = many\n"),
            Err(LabError::Parse { line: 2, .. })
        ));
        assert!(ExperimentSpec::parse("[nowhere]\n").is_err());
        assert!(ExperimentSpec::parse("rounds = 3\n").is_err());
        assert!(ExperimentSpec::parse("[protocol]\nrepeats = 0\n").is_err());
        assert!(ExperimentSpec::parse("[protocol]\ntrain_fraction = 1.0\n").is_err());
        assert!(ExperimentSpec::parse("[data]\nsource = step\ncount = 3\n").is_err());
        assert!(ExperimentSpec::parse("[data]\nsource = dense-csv\n").is_err());
    }

    #[test]
    fn grid_and_log_odds() {
        assert_eq!(parse_grid("-1:1:3").unwrap(), vec![vec![-1.0], vec![0.0], vec![1.0]]);
        assert!(matches!(parse_log_odds("linear:2,1").unwrap(), LogOdds::Linear { slope, intercept } if slope == 2.0 && intercept == 1.0));
        assert!(parse_log_odds("quadratic:1").is_err());
    }
}
