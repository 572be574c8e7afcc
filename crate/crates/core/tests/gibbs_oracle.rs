mod oracle;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use viboost_core::gibbs::{run_gibbs, run_gibbs_from, GibbsHyper, GibbsProblem, GibbsState};

use oracle::{enumerate_posterior, micro_instance};

fn problem() -> GibbsProblem {
    let (data, space) = micro_instance();
    GibbsProblem::from_space(&data, &space).unwrap()
}

fn exact(problem: &GibbsProblem) -> oracle::Enumeration {
    let rows: Vec<Vec<i8>> = (0..problem.m()).map(|m| problem.row(m).to_vec()).collect();
    enumerate_posterior(problem.labels(), &rows, 1.0, 1.0, [1.0, 1.0], 20.0, 0.2)
}

fn mask(w: &[u8]) -> usize {
    w.iter().enumerate().map(|(k, &v)| (v as usize) << k).sum()
}

#[test]
fn chain_matches_enumeration() {
    let problem = problem();
    let truth = exact(&problem);
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let trace = run_gibbs(&problem, &GibbsHyper::default(), 202_000, 2_000, 1, &mut rng).unwrap();
    let theta = trace.mean_theta();
    assert!((theta - truth.mean_theta).abs() <= 0.02, "{theta} vs {}", truth.mean_theta);

    let mut freq = vec![0.0; truth.probs.len()];
    for s in &trace.samples {
        freq[mask(&s.w)] += 1.0;
    }
    let total = trace.samples.len() as f64;
    let tv = 0.5 * freq.iter().zip(&truth.probs).map(|(f, p)| (f / total - p).abs()).sum::<f64>();
    assert!(tv <= 0.03, "total variation {tv}");
}

#[test]
fn dispersed_chains_agree() {
    let problem = problem();
    let hyper = GibbsHyper::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let low = GibbsState {
        c: vec![-6.0; 3],
        xi: -5.0,
        w: vec![0; 6],
        theta: 0.02,
    };
    let high = GibbsState {
        c: vec![6.0; 3],
        xi: 5.0,
        w: vec![1; 6],
        theta: 0.98,
    };
    let a = run_gibbs_from(low, &problem, &hyper, 20_000, 10_000, 1, &mut rng).unwrap();
    let b = run_gibbs_from(high, &problem, &hyper, 20_000, 10_000, 1, &mut rng).unwrap();
    assert!((a.mean_theta() - b.mean_theta()).abs() <= 0.02);
}
