use serde::Serialize;
use viboost_core::viboost::{BoostOutcome, NoiseReport};

/// JSON shape printed by `train`.
#[derive(Debug, Serialize)]
pub struct NoiseReportJson<'a> {
    pub snr: f64,
    pub noise_grade: f64,
    pub per_example_true_prob: &'a [f64],
    pub elbo_trace: &'a [f64],
    pub rounds: usize,
    pub train_error: f64,
}

impl<'a> NoiseReportJson<'a> {
    pub fn new(report: &'a NoiseReport, outcome: &BoostOutcome) -> Self {
        Self {
            snr: report.snr,
            noise_grade: report.noise_grade,
            per_example_true_prob: &report.per_example_true_prob,
            elbo_trace: &report.elbo_trace,
            rounds: outcome.rounds.len(),
            train_error: outcome.rounds.last().map_or(f64::NAN, |r| r.train_error),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
