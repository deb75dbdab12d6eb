//! Grid sweeps over dimension and accuracy, with CSV rows and a JSON summary.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use qstoch_core::fixtures::{make_fixture, ProblemInstance};
use qstoch_core::par::map_items;
use qstoch_core::rng::mix64;
use qstoch_core::stats::{mean_se, ols};
use qstoch_core::{run_trial, Rng, RunRecord};

use crate::config::ExperimentConfig;

pub const CSV_HEADER: [&str; 10] = [
    "algorithm",
    "fixture",
    "d",
    "epsilon",
    "seed",
    "queries",
    "classical_samples",
    "metric",
    "wall_ms",
    "degraded",
];

const FIXTURE_STREAM: u64 = 0xf1c7;

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: std::io::Error },
    #[error("fixture for d = {d}: {source}")]
    Fixture { d: usize, source: qstoch_core::Error },
    #[error("trial {seed} at d = {d}, eps = {epsilon}: {source}")]
    Trial {
        d: usize,
        epsilon: f64,
        seed: u64,
        source: qstoch_core::Error,
    },
}

/// Aggregate of one `(d, eps)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub d: usize,
    pub epsilon: f64,
    pub trials: u64,
    pub mean_queries: f64,
    /// Mean compensated charge, see [`qstoch_core::QueryLedger::expected_queries`].
    pub mean_expected_queries: f64,
    pub mean_classical_samples: f64,
    pub mean_metric: f64,
    pub metric_se: f64,
    pub degraded: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub d: usize,
    pub slope: Option<f64>,
    pub slope_se: Option<f64>,
    pub realized_slope: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub algorithm: String,
    pub fixture: String,
    pub seed: u64,
    pub trials: u64,
    pub cells: Vec<CellSummary>,
    pub fits: Vec<SlopeFit>,
    /// Pooled exponent of `ln(queries)` against `ln(1/eps)`, one intercept
    /// per dimension; `null` with fewer than two accuracies.
    pub slope: Option<f64>,
    pub slope_se: Option<f64>,
    pub predicted_exponent: f64,
}

impl Summary {
    /// Pretty JSON with keys in sorted order.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("summary serializes");
        let mut s = serde_json::to_string_pretty(&value).expect("value serializes");
        s.push('\n');
        s
    }
}

#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub records: Vec<RunRecord>,
    pub csv: String,
    pub summary: Summary,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SweepOptions {
    /// Worker threads; 0 keeps the default.
    pub jobs: usize,
}

/// Stream of one trial, determined by `(seed, d, eps)` and the trial seed.
pub fn trial_rng(trial_seed: u64, d: usize, epsilon: f64) -> Rng {
    Rng::new(trial_seed, mix64(mix64(d as u64) ^ epsilon.to_bits()))
}

pub fn fixture_for(cfg: &ExperimentConfig, d: usize) -> qstoch_core::Result<ProblemInstance> {
    make_fixture(cfg.fixture, d, &cfg.params, &mut Rng::new(cfg.seed, FIXTURE_STREAM ^ d as u64))
}

fn run_cell(
    cfg: &ExperimentConfig,
    problem: &ProblemInstance,
    d: usize,
    epsilon: f64,
) -> Result<Vec<RunRecord>, SweepError> {
    let backend = cfg.backend.build();
    (0..cfg.trials)
        .map(|t| {
            let seed = cfg.seed.wrapping_add(t);
            let mut rng = trial_rng(seed, d, epsilon);
            run_trial(cfg.algorithm, problem, epsilon, &backend, seed, &mut rng).map_err(|source| {
                SweepError::Trial {
                    d,
                    epsilon,
                    seed,
                    source,
                }
            })
        })
        .map(|r| {
            r.map(|mut rec| {
                if !cfg.output.timing {
                    rec.wall_ms = 0;
                }
                rec
            })
        })
        .collect()
}

pub fn csv_body(records: &[RunRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in records {
        w.write_record([
            r.algorithm.name().to_string(),
            r.fixture.clone(),
            r.d.to_string(),
            r.epsilon.to_string(),
            r.seed.to_string(),
            r.queries.to_string(),
            r.classical_samples.to_string(),
            r.metric.to_string(),
            r.wall_ms.to_string(),
            r.degraded.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

fn summarize_cell(d: usize, epsilon: f64, recs: &[RunRecord]) -> CellSummary {
    let col = |f: fn(&RunRecord) -> f64| recs.iter().map(f).collect::<Vec<_>>();
    let (mean_metric, metric_se) = mean_se(&col(|r| r.metric));
    CellSummary {
        d,
        epsilon,
        trials: recs.len() as u64,
        mean_queries: mean_se(&col(|r| r.queries as f64)).0,
        mean_expected_queries: mean_se(&col(|r| r.expected_queries)).0,
        mean_classical_samples: mean_se(&col(|r| r.classical_samples as f64)).0,
        mean_metric,
        metric_se,
        degraded: recs.iter().filter(|r| r.degraded).count() as u64,
    }
}

/// OLS of `y` on `x` after removing each group's mean; the residual degrees
/// of freedom account for one intercept per group.
pub fn pooled_slope(groups: &[Vec<(f64, f64)>]) -> Option<(f64, f64)> {
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut centered = Vec::new();
    for g in groups.iter().filter(|g| !g.is_empty()) {
        let n = g.len() as f64;
        let mx = g.iter().map(|p| p.0).sum::<f64>() / n;
        let my = g.iter().map(|p| p.1).sum::<f64>() / n;
        for &(x, y) in g {
            sxx += (x - mx) * (x - mx);
            sxy += (x - mx) * (y - my);
            centered.push((x - mx, y - my));
        }
    }
    if !(sxx > 0.0) {
        return None;
    }
    let slope = sxy / sxx;
    let n_groups = groups.iter().filter(|g| !g.is_empty()).count();
    let dof = centered.len() as f64 - n_groups as f64 - 1.0;
    let rss: f64 = centered.iter().map(|(x, y)| (y - slope * x).powi(2)).sum();
    let se = if dof > 0.0 { (rss / dof / sxx).sqrt() } else { f64::NAN };
    Some((slope, se))
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

pub fn summarize(cfg: &ExperimentConfig, cells: &[((usize, f64), Vec<RunRecord>)]) -> Summary {
    let summaries: Vec<CellSummary> = cells.iter().map(|((d, e), r)| summarize_cell(*d, *e, r)).collect();
    let mut by_d: BTreeMap<usize, Vec<&CellSummary>> = BTreeMap::new();
    for c in &summaries {
        by_d.entry(c.d).or_default().push(c);
    }
    let point = |c: &CellSummary, realized: bool| {
        let q = if realized { c.mean_queries } else { c.mean_expected_queries };
        ((1.0 / c.epsilon).ln(), q.ln())
    };
    let fits = by_d
        .iter()
        .map(|(&d, cs)| {
            let xs: Vec<f64> = cs.iter().map(|c| point(c, false).0).collect();
            let ys: Vec<f64> = cs.iter().map(|c| point(c, false).1).collect();
            let yr: Vec<f64> = cs.iter().map(|c| point(c, true).1).collect();
            let fit = ols(&xs, &ys);
            SlopeFit {
                d,
                slope: fit.and_then(|f| finite(f.slope)),
                slope_se: fit.and_then(|f| finite(f.slope_se)),
                realized_slope: ols(&xs, &yr).and_then(|f| finite(f.slope)),
            }
        })
        .collect();
    let groups: Vec<Vec<(f64, f64)>> = by_d
        .values()
        .map(|cs| cs.iter().map(|c| point(c, false)).collect())
        .collect();
    let pooled = pooled_slope(&groups);
    Summary {
        algorithm: cfg.algorithm.name().to_string(),
        fixture: cfg.fixture.name().to_string(),
        seed: cfg.seed,
        trials: cfg.trials,
        cells: summaries,
        fits,
        slope: pooled.and_then(|p| finite(p.0)),
        slope_se: pooled.and_then(|p| finite(p.1)),
        predicted_exponent: cfg.algorithm.predicted_exponent(),
    }
}

/// Run every `(d, eps)` cell. Cells run concurrently, trials inside a cell
/// in order, and the output is ordered by `(d, eps, seed)`.
pub fn run_sweep(cfg: &ExperimentConfig, opts: SweepOptions) -> Result<SweepOutput, SweepError> {
    let mut problems = BTreeMap::new();
    for d in cfg.dims() {
        let p = fixture_for(cfg, d).map_err(|source| SweepError::Fixture { d, source })?;
        problems.insert(d, p);
    }
    let keys: Vec<(usize, f64)> = cfg
        .dims()
        .into_iter()
        .flat_map(|d| cfg.epsilons.iter().map(move |&e| (d, e)))
        .collect();
    let results = qstoch_core::par::with_jobs(opts.jobs, || {
        map_items(&keys, |&(d, e)| run_cell(cfg, &problems[&d], d, e))
    });
    let mut cells = Vec::with_capacity(keys.len());
    for (key, res) in keys.into_iter().zip(results) {
        cells.push((key, res?));
    }
    cells.sort_by(|a, b| a.0 .0.cmp(&b.0 .0).then(b.0 .1.total_cmp(&a.0 .1)));
    let records: Vec<RunRecord> = cells.iter().flat_map(|(_, r)| r.iter().cloned()).collect();
    Ok(SweepOutput {
        csv: csv_body(&records),
        summary: summarize(cfg, &cells),
        records,
    })
}

fn create(path: &Path) -> Result<File, SweepError> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| SweepError::Output {
            path: path.display().to_string(),
            source,
        })?;
    }
    File::create(path).map_err(|source| SweepError::Output {
        path: path.display().to_string(),
        source,
    })
}

/// Open the output files, run the sweep and write both files. Output paths
/// are checked before any trial runs.
pub fn run_sweep_to_files(
    cfg: &ExperimentConfig,
    opts: SweepOptions,
    csv_path: Option<&Path>,
    json_path: Option<&Path>,
) -> Result<SweepOutput, SweepError> {
    let mut csv_file = csv_path.map(create).transpose()?;
    let mut json_file = json_path.map(create).transpose()?;
    let out = run_sweep(cfg, opts)?;
    let write = |f: &mut File, path: &Path, body: &str| {
        f.write_all(body.as_bytes()).map_err(|source| SweepError::Output {
            path: path.display().to_string(),
            source,
        })
    };
    if let (Some(f), Some(p)) = (csv_file.as_mut(), csv_path) {
        write(f, p, &out.csv)?;
    }
    if let (Some(f), Some(p)) = (json_file.as_mut(), json_path) {
        write(f, p, &out.summary.to_json())?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pooled_slope_ignores_group_offsets() {
        let a: Vec<(f64, f64)> = (0..4).map(|i| (i as f64, 2.0 * i as f64 + 1.0)).collect();
        let b: Vec<(f64, f64)> = (0..4).map(|i| (i as f64, 2.0 * i as f64 - 5.0)).collect();
        let (s, se) = pooled_slope(&[a, b]).unwrap();
        assert!((s - 2.0).abs() < 1e-12);
        assert!(se.abs() < 1e-6);
        assert!(pooled_slope(&[vec![(1.0, 2.0)]]).is_none());
    }

    #[test]
    fn header_is_stable() {
        let body = csv_body(&[]);
        assert_eq!(
            body,
            "algorithm,fixture,d,epsilon,seed,queries,classical_samples,metric,wall_ms,degraded\n"
        );
    }
}
