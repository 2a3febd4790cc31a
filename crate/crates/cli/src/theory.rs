//! `theory`: cover, 1-NN error, sample-size and Lipschitz tables for the toy map.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use surco_core::theory::{
    check_cover, lipschitz_scan, nn1_predict, sample_complexity_bound, toy_direct_map,
    toy_surrogate_map, BoxDomain, LabeledDataset,
};

use crate::config::ExperimentConfig;
use crate::error::CliResult;

type SolutionMap = fn(&[f64]) -> Vec<f64>;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TheoryRow {
    pub config_hash: String,
    /// `n0`, `cover` or `lipschitz`.
    pub table: &'static str,
    pub label: &'static str,
    pub n: Option<usize>,
    pub epsilon: Option<f64>,
    pub lipschitz: Option<f64>,
    pub delta: Option<f64>,
    pub n0: Option<f64>,
    pub covered: Option<bool>,
    pub max_gap: Option<f64>,
    pub max_error: Option<f64>,
    pub trials: Option<usize>,
    pub covered_trials: Option<usize>,
    pub spacing: Option<f64>,
    pub ratio: Option<f64>,
    pub clusters: Option<usize>,
    pub d_min: Option<f64>,
    pub points: Option<usize>,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn linspace(n: usize) -> Vec<Vec<f64>> {
    if n == 1 {
        return vec![vec![FRAC_PI_2 / 2.0]];
    }
    (0..n).map(|i| vec![FRAC_PI_2 * (i as f64 / (n - 1) as f64)]).collect()
}

pub fn theory_rows(cfg: &ExperimentConfig) -> CliResult<Vec<TheoryRow>> {
    let t = &cfg.theory;
    let hash = cfg.hash();
    let domain = BoxDomain::interval(0.0, FRAC_PI_2)?;
    let delta = t.epsilon / t.lipschitz;
    let n0 = sample_complexity_bound(&domain, t.lipschitz, t.epsilon);
    let base = TheoryRow {
        config_hash: hash,
        epsilon: Some(t.epsilon),
        lipschitz: Some(t.lipschitz),
        ..TheoryRow::default()
    };
    let mut rows = vec![TheoryRow {
        table: "n0",
        label: "interval",
        delta: Some(delta),
        n0: Some(n0),
        ..base.clone()
    }];

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for &n in &t.dataset_sizes {
        let data = LabeledDataset::from_map(domain.clone(), linspace(n), toy_surrogate_map)?;
        let cover = check_cover(&data, delta, t.lipschitz, t.epsilon)?;
        let mut max_error: f64 = 0.0;
        for _ in 0..t.probes {
            let q = [rng.gen_range(0.0..FRAC_PI_2)];
            max_error = max_error.max(dist(nn1_predict(&data, &q)?, &toy_surrogate_map(&q)));
        }
        let mut covered_trials = 0;
        for _ in 0..t.random_trials {
            let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(0.0..FRAC_PI_2)]).collect();
            let random = LabeledDataset::from_map(domain.clone(), pts, toy_surrogate_map)?;
            covered_trials += check_cover(&random, delta, t.lipschitz, t.epsilon)?.covered as usize;
        }
        rows.push(TheoryRow {
            table: "cover",
            label: "even",
            n: Some(n),
            delta: Some(delta),
            n0: Some(n0),
            covered: Some(cover.covered),
            max_gap: Some(cover.max_gap),
            max_error: (t.probes > 0).then_some(max_error),
            trials: Some(t.random_trials),
            covered_trials: Some(covered_trials),
            ..base.clone()
        });
    }

    let maps: [(&'static str, SolutionMap); 2] =
        [("direct", toy_direct_map), ("surrogate", toy_surrogate_map)];
    for (label, map) in maps {
        for r in lipschitz_scan(label, map, &domain, &t.spacings, t.link_radius)? {
            rows.push(TheoryRow {
                table: "lipschitz",
                label,
                spacing: Some(r.spacing),
                ratio: Some(r.ratio),
                clusters: Some(r.clusters),
                d_min: r.d_min,
                points: Some(r.points),
                ..base.clone()
            });
        }
    }
    Ok(rows)
}

pub fn cmd_theory(cfg: &ExperimentConfig) -> CliResult<String> {
    let rows = theory_rows(cfg)?;
    let path = cfg.out.join("theory.csv");
    crate::write_csv(&path, &rows)?;
    crate::write_resolved_config(cfg)?;
    Ok(format!("{} rows; wrote {}", rows.len(), path.display()))
}
