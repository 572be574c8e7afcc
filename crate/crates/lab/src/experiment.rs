//! Repeated train/test runs and their aggregation.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use viboost_core::adaboost::{run_adaboost, AdaConfig};
use viboost_core::gibbs::{run_gibbs, GibbsProblem};
use viboost_core::hypotheses::{build_stumps, Dataset, Ensemble, StumpSpace};
use viboost_core::viboost;

use crate::config::{Algorithm, ExperimentSpec, SplitRule};
use crate::error::{LabError, LabResult};
use crate::plots::emit_plots;

pub const CSV_VERSION_LINE: &str = "# viboost-lab v1";

/// Random stream for one repeat: the experiment seed selects the key, the
/// repeat index selects an independent ChaCha stream.
pub fn repeat_rng(seed: u64, repeat: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(repeat as u64);
    rng
}

/// Shuffle `0..n` and cut it into training and test indices.
pub fn split_indices<R: rand::Rng + ?Sized>(n: usize, rule: SplitRule, rng: &mut R) -> LabResult<(Vec<usize>, Vec<usize>)> {
    let mut idx: Vec<usize> = (0..n).collect();
    let (train, test) = match rule {
        SplitRule::All => return Ok((idx, Vec::new())),
        SplitRule::Fraction(f) => {
            if n < 2 {
                return Err(LabError::Config("a fractional split needs at least two examples".into()));
            }
            let train = ((f * n as f64).round() as usize).clamp(1, n - 1);
            (train, n - train)
        }
        SplitRule::Counts { train, test } => {
            let test = test.unwrap_or(n.saturating_sub(train));
            if train + test > n {
                return Err(LabError::Config(format!("split needs {train} + {test} examples, dataset has {n}")));
            }
            (train, test)
        }
    };
    idx.shuffle(rng);
    let test_idx = idx[train..train + test].to_vec();
    idx.truncate(train);
    Ok((idx, test_idx))
}

/// Per-round traces of a single repeat.
#[derive(Debug, Clone, PartialEq)]
pub struct RepeatResult {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub train_error: Vec<f64>,
    pub test_error: Option<Vec<f64>>,
    pub snr: Option<Vec<f64>>,
    pub noise_grade: Option<Vec<f64>>,
}

/// Mean and standard error per round.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
}

impl Series {
    /// Aggregate equal-length traces; the standard error uses the sample
    /// variance and is 0 for a single trace.
    pub fn aggregate(traces: &[&[f64]]) -> Series {
        let r = traces.len();
        let len = traces.first().map_or(0, |t| t.len());
        let mut mean = Vec::with_capacity(len);
        let mut se = Vec::with_capacity(len);
        for t in 0..len {
            let m = traces.iter().map(|tr| tr[t]).sum::<f64>() / r as f64;
            let s = if r > 1 {
                let var = traces.iter().map(|tr| (tr[t] - m).powi(2)).sum::<f64>() / (r - 1) as f64;
                (var / r as f64).sqrt()
            } else {
                0.0
            };
            mean.push(m);
            se.push(s);
        }
        Series { mean, se }
    }

    pub fn last_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub algorithm: Algorithm,
    pub rounds: usize,
    pub train_error: Series,
    pub test_error: Option<Series>,
    pub snr: Option<Series>,
    pub noise_grade: Option<Series>,
    pub repeats: Vec<RepeatResult>,
}

fn aggregate_optional(repeats: &[RepeatResult], pick: impl Fn(&RepeatResult) -> Option<&Vec<f64>>) -> Option<Series> {
    let traces: Option<Vec<&[f64]>> = repeats.iter().map(|r| pick(r).map(Vec::as_slice)).collect();
    traces.map(|t| Series::aggregate(&t))
}

impl ResultTable {
    pub fn from_repeats(algorithm: Algorithm, rounds: usize, repeats: Vec<RepeatResult>) -> Self {
        let train: Vec<&[f64]> = repeats.iter().map(|r| r.train_error.as_slice()).collect();
        Self {
            algorithm,
            rounds,
            train_error: Series::aggregate(&train),
            test_error: aggregate_optional(&repeats, |r| r.test_error.as_ref()),
            snr: aggregate_optional(&repeats, |r| r.snr.as_ref()),
            noise_grade: aggregate_optional(&repeats, |r| r.noise_grade.as_ref()),
            repeats,
        }
    }

    /// Per-round summary: `round,train_error_mean,train_error_se,…`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CSV_VERSION_LINE}")?;
        writeln!(out, "# algorithm={} repeats={}", self.algorithm, self.repeats.len())?;
        writeln!(
            out,
            "round,train_error_mean,train_error_se,test_error_mean,test_error_se,snr_mean,snr_se,noise_grade_mean,noise_grade_se"
        )?;
        let cell = |s: &Option<Series>, t: usize| match s {
            Some(s) => format!("{},{}", s.mean[t], s.se[t]),
            None => "NA,NA".to_string(),
        };
        for t in 0..self.rounds {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                t + 1,
                self.train_error.mean[t],
                self.train_error.se[t],
                cell(&self.test_error, t),
                cell(&self.snr, t),
                cell(&self.noise_grade, t)
            )?;
        }
        Ok(())
    }

    /// Raw per-repeat values: `repeat,round,train_error,test_error,snr,noise_grade`.
    pub fn write_repeats_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CSV_VERSION_LINE}")?;
        writeln!(out, "repeat,round,train_error,test_error,snr,noise_grade")?;
        let cell = |v: &Option<Vec<f64>>, t: usize| v.as_ref().map_or("NA".to_string(), |v| v[t].to_string());
        for (r, rep) in self.repeats.iter().enumerate() {
            for t in 0..self.rounds {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r,
                    t + 1,
                    rep.train_error[t],
                    cell(&rep.test_error, t),
                    cell(&rep.snr, t),
                    cell(&rep.noise_grade, t)
                )?;
            }
        }
        Ok(())
    }
}

/// Traces produced by one algorithm run on one split.
struct Traces {
    train_error: Vec<f64>,
    test_error: Option<Vec<f64>>,
    snr: Option<Vec<f64>>,
    noise_grade: Option<Vec<f64>>,
}

fn stump_space(train: &Dataset, include_constant: bool) -> LabResult<StumpSpace> {
    let space = build_stumps(train)?;
    Ok(if include_constant { space } else { space.without_constant()? })
}

fn run_gibbs_blocks<R: rand::Rng + ?Sized>(
    spec: &ExperimentSpec,
    train: &Dataset,
    test: Option<&Dataset>,
    space: &StumpSpace,
    rng: &mut R,
) -> LabResult<Traces> {
    let problem = GibbsProblem::from_space(train, space)?;
    let g = &spec.gibbs;
    let trace = run_gibbs(&problem, &g.hyper, g.iters, g.burnin, g.thin, rng)?;
    let kept = trace.samples.len();
    let m = space.len();
    let mut out = Traces {
        train_error: Vec::with_capacity(spec.rounds),
        test_error: test.map(|_| Vec::with_capacity(spec.rounds)),
        snr: Some(Vec::with_capacity(spec.rounds)),
        noise_grade: Some(Vec::with_capacity(spec.rounds)),
    };
    let (mut sum_c, mut sum_theta, mut sum_xi, mut used) = (vec![0.0; m], 0.0, 0.0, 0usize);
    for block in 1..=spec.rounds {
        let end = kept * block / spec.rounds;
        for s in &trace.samples[used..end] {
            for (acc, c) in sum_c.iter_mut().zip(&s.c) {
                *acc += c;
            }
            sum_theta += s.theta;
            sum_xi += s.xi;
        }
        used = end;
        let k = used as f64;
        let ensemble = Ensemble {
            stages: sum_c.iter().zip(space.stumps()).map(|(c, s)| (c / k, *s)).collect(),
        };
        out.train_error.push(ensemble.error(train));
        if let (Some(v), Some(t)) = (out.test_error.as_mut(), test) {
            v.push(ensemble.error(t));
        }
        let theta = sum_theta / k;
        out.snr.as_mut().unwrap().push(theta / (1.0 - theta));
        out.noise_grade.as_mut().unwrap().push(sum_xi / k);
    }
    Ok(out)
}

fn run_algorithm<R: rand::Rng + ?Sized>(
    spec: &ExperimentSpec,
    train: &Dataset,
    test: Option<&Dataset>,
    rng: &mut R,
) -> LabResult<Traces> {
    let space = stump_space(train, spec.include_constant)?;
    let ada = |mu0: f64| -> LabResult<Traces> {
        let cfg = AdaConfig {
            rounds: spec.rounds,
            smoothing_mu0: mu0,
            tau: spec.adaboost_tau,
        };
        let out = run_adaboost(train, &space, &cfg)?;
        Ok(Traces {
            train_error: out.ensemble.error_trace(train),
            test_error: test.map(|t| out.ensemble.error_trace(t)),
            snr: None,
            noise_grade: None,
        })
    };
    match spec.algorithm {
        Algorithm::VIBoost => {
            let out = viboost::run(train, &space, &spec.vi_config())?;
            Ok(Traces {
                train_error: out.rounds.iter().map(|r| r.train_error).collect(),
                test_error: test.map(|t| out.ensemble.error_trace(t)),
                snr: Some(out.rounds.iter().map(|r| r.snr).collect()),
                noise_grade: Some(out.rounds.iter().map(|r| r.noise_grade).collect()),
            })
        }
        Algorithm::AdaBoost => ada(0.0),
        Algorithm::AdaBoostSmoothed => ada(spec.adaboost_mu0),
        Algorithm::Gibbs => run_gibbs_blocks(spec, train, test, &space, rng),
    }
}

/// Run one repeat from its own random stream.
pub fn run_repeat(spec: &ExperimentSpec, shared: Option<&Dataset>, repeat: usize) -> LabResult<RepeatResult> {
    let mut rng = repeat_rng(spec.seed, repeat);
    let fresh;
    let data = match shared {
        Some(d) => d,
        None => {
            fresh = spec.source.materialize(&mut rng)?;
            &fresh
        }
    };
    let (train_idx, test_idx) = split_indices(data.n(), spec.split, &mut rng)?;
    let train = data.subset(&train_idx)?;
    let test = if test_idx.is_empty() {
        None
    } else {
        Some(data.subset(&test_idx)?)
    };
    let traces = run_algorithm(spec, &train, test.as_ref(), &mut rng)?;
    Ok(RepeatResult {
        train_indices: train_idx,
        test_indices: test_idx,
        train_error: traces.train_error,
        test_error: traces.test_error,
        snr: traces.snr,
        noise_grade: traces.noise_grade,
    })
}

/// Run every repeat, aggregate, and write outputs when an output directory
/// is configured.
pub fn run_experiment(spec: &ExperimentSpec) -> LabResult<ResultTable> {
    spec.validate()?;
    // Files and fixed datasets are shared; generators draw per repeat.
    let shared = if spec.source.is_generated() && spec.regenerate {
        None
    } else {
        Some(spec.source.materialize(&mut repeat_rng(spec.seed, usize::MAX))?)
    };
    let repeats = (0..spec.repeats)
        .into_par_iter()
        .map(|r| run_repeat(spec, shared.as_ref(), r))
        .collect::<LabResult<Vec<_>>>()?;
    let table = ResultTable::from_repeats(spec.algorithm, spec.rounds, repeats);
    if let Some(dir) = &spec.output_dir {
        write_outputs(&table, dir)?;
    }
    Ok(table)
}

/// `results.csv`, `repeats.csv` and the SVG charts.
pub fn write_outputs(table: &ResultTable, dir: &Path) -> LabResult<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    let mut written = Vec::new();
    let results = dir.join("results.csv");
    let mut buf = Vec::new();
    table.write_csv(&mut buf).expect("write to memory");
    fs::write(&results, buf).map_err(|e| LabError::io(&results, e))?;
    written.push(results);
    let raw = dir.join("repeats.csv");
    let mut buf = Vec::new();
    table.write_repeats_csv(&mut buf).expect("write to memory");
    fs::write(&raw, buf).map_err(|e| LabError::io(&raw, e))?;
    written.push(raw);
    written.extend(emit_plots(table, dir)?);
    Ok(written)
}
