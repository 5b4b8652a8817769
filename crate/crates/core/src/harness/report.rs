use std::fs;
use std::path::{Path, PathBuf};

use log::warn;

use super::config::{ExperimentConfig, Method};
use super::output::*;
use super::run::RunInfo;
use crate::error::{Error, Result};

/// Per-seed figures of one finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFigures {
    pub method: Method,
    pub seed: u64,
    pub config_hash: String,
    pub final_reward: Option<f64>,
    pub eval_reward: f64,
    pub energy_j: f64,
    pub recognition_pct: f64,
    pub collection_pct: f64,
    pub completion_s: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation; zero for a single value.
fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Mean per-agent return over the last `window` non-mimicry episodes.
pub fn final_window_reward(curve: &[CurveRecord], window: usize) -> Option<f64> {
    let mut episodes: Vec<u64> = curve.iter().filter(|r| !r.mimicry).map(|r| r.episode).collect();
    episodes.sort_unstable();
    episodes.dedup();
    let first = *episodes[episodes.len().saturating_sub(window)..].first()?;
    let rewards: Vec<f64> = curve.iter().filter(|r| !r.mimicry && r.episode >= first).map(|r| r.reward).collect();
    Some(mean(&rewards))
}

fn run_dirs(root: &Path) -> Result<Vec<(Method, u64, PathBuf)>> {
    let mut out = Vec::new();
    for method in Method::ALL {
        let dir = root.join(method.name());
        if !dir.is_dir() {
            continue;
        }
        for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let path = entry.map_err(|e| Error::io(&dir, e))?.path();
            let seed = path
                .file_name()
                .and_then(|n| n.to_str())
                .and_then(|n| n.strip_prefix("seed_"))
                .and_then(|s| s.parse::<u64>().ok());
            if let (Some(seed), true) = (seed, path.is_dir()) {
                out.push((method, seed, path));
            }
        }
    }
    out.sort_by_key(|r| (r.0, r.1));
    Ok(out)
}

/// Reads the figures of every successful run below `root`, refusing to mix
/// outputs of different configurations.
pub fn collect_runs(root: &Path) -> Result<Vec<RunFigures>> {
    let mut figures = Vec::new();
    let mut hash: Option<String> = None;
    for (method, seed, dir) in run_dirs(root)? {
        let info_path = dir.join(RUN_INFO);
        if let Ok(text) = fs::read_to_string(&info_path) {
            if let Ok(info) = serde_json::from_str::<RunInfo>(&text) {
                if !info.ok {
                    warn!("skipping failed run {}", dir.display());
                    continue;
                }
            }
        }
        let cfg = ExperimentConfig::load(&dir.join(CONFIG_ECHO), None)?;
        let metrics: Vec<MetricsRecord> = read_csv(&dir.join(METRICS))?;
        if metrics.is_empty() {
            return Err(Error::contract(format!("{} has no evaluation rows", dir.display())));
        }
        let curve: Vec<CurveRecord> = if method.learner().is_some() {
            read_csv(&dir.join(LEARNING_CURVE))?
        } else {
            Vec::new()
        };
        let run_hash = cfg.hash();
        let file_hashes = metrics.iter().map(|m| &m.config_hash).chain(curve.iter().map(|c| &c.config_hash));
        for h in std::iter::once(&run_hash).chain(file_hashes) {
            match &hash {
                None => hash = Some(h.clone()),
                Some(first) if first != h => return Err(Error::MixedConfig(first.clone(), h.clone())),
                Some(_) => {}
            }
        }
        let col = |f: fn(&MetricsRecord) -> f64| mean(&metrics.iter().map(f).collect::<Vec<_>>());
        figures.push(RunFigures {
            method,
            seed,
            config_hash: run_hash,
            final_reward: final_window_reward(&curve, cfg.trainer.final_window),
            eval_reward: col(|m| m.reward),
            energy_j: col(|m| m.energy_j),
            recognition_pct: col(|m| m.recognition_pct),
            collection_pct: col(|m| m.collection_pct),
            completion_s: col(|m| m.completion_s),
        });
    }
    Ok(figures)
}

/// One summary row per algorithm: mean and standard deviation across seeds
/// of the per-seed figures.
pub fn summarize(runs: &[RunFigures]) -> Vec<SummaryRecord> {
    let mut out = Vec::new();
    for method in Method::ALL {
        let rs: Vec<&RunFigures> = runs.iter().filter(|r| r.method == method).collect();
        if rs.is_empty() {
            continue;
        }
        let stat = |f: fn(&RunFigures) -> f64| {
            let xs: Vec<f64> = rs.iter().map(|r| f(r)).collect();
            (mean(&xs), std_dev(&xs))
        };
        let finals: Vec<f64> = rs.iter().filter_map(|r| r.final_reward).collect();
        let (fm, fs) = if finals.is_empty() {
            (None, None)
        } else {
            (Some(mean(&finals)), Some(std_dev(&finals)))
        };
        let (er, ers) = stat(|r| r.eval_reward);
        let (en, ens) = stat(|r| r.energy_j);
        let (rc, rcs) = stat(|r| r.recognition_pct);
        let (co, cos) = stat(|r| r.collection_pct);
        let (cp, cps) = stat(|r| r.completion_s);
        out.push(SummaryRecord {
            config_hash: rs[0].config_hash.clone(),
            algorithm: method.name().to_string(),
            runs: rs.len(),
            final_reward_mean: fm,
            final_reward_std: fs,
            eval_reward_mean: er,
            eval_reward_std: ers,
            energy_j_mean: en,
            energy_j_std: ens,
            recognition_pct_mean: rc,
            recognition_pct_std: rcs,
            collection_pct_mean: co,
            collection_pct_std: cos,
            completion_s_mean: cp,
            completion_s_std: cps,
        });
    }
    out
}

type Column = (&'static str, fn(&SummaryRecord) -> Option<(f64, f64)>);

const COLUMNS: [Column; 6] = [
    ("final_reward", |s| s.final_reward_mean.zip(s.final_reward_std)),
    ("eval_reward", |s| Some((s.eval_reward_mean, s.eval_reward_std))),
    ("recognition_pct", |s| Some((s.recognition_pct_mean, s.recognition_pct_std))),
    ("collection_pct", |s| Some((s.collection_pct_mean, s.collection_pct_std))),
    ("energy_j", |s| Some((s.energy_j_mean, s.energy_j_std))),
    ("completion_s", |s| Some((s.completion_s_mean, s.completion_s_std))),
];

/// Each algorithm's figures followed by the difference of means for every
/// ordered pair of algorithms (`subject = "a-b"` holds `mean(a) − mean(b)`).
pub fn compare_algorithms(summary: &[SummaryRecord]) -> Vec<ReportRecord> {
    let mut out = Vec::new();
    for s in summary {
        for (metric, get) in COLUMNS {
            if let Some((m, sd)) = get(s) {
                out.push(ReportRecord {
                    config_hash: s.config_hash.clone(),
                    kind: "algorithm".into(),
                    subject: s.algorithm.clone(),
                    metric: metric.into(),
                    mean: m,
                    std: Some(sd),
                });
            }
        }
    }
    for a in summary {
        for b in summary {
            if a.algorithm == b.algorithm {
                continue;
            }
            for (metric, get) in COLUMNS {
                if let (Some((ma, _)), Some((mb, _))) = (get(a), get(b)) {
                    out.push(ReportRecord {
                        config_hash: a.config_hash.clone(),
                        kind: "delta".into(),
                        subject: format!("{}-{}", a.algorithm, b.algorithm),
                        metric: metric.into(),
                        mean: ma - mb,
                        std: None,
                    });
                }
            }
        }
    }
    out
}

/// Rebuilds `summary.csv` and `report.csv` in `root` from the run
/// directories below it.
pub fn aggregate(root: &Path) -> Result<Vec<SummaryRecord>> {
    let runs = collect_runs(root)?;
    let summary = summarize(&runs);
    write_csv(&root.join(SUMMARY), &summary)?;
    write_csv(&root.join(REPORT), &compare_algorithms(&summary))?;
    Ok(summary)
}
