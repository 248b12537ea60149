//! Batches over scenes x strategies x seeds, the aggregate table and its
//! on-disk form.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::episode::{run_scenario, spl, EpisodeResult, StrategyKind};
use crate::error::Result;
use crate::metrics::median;

pub const RESULTS_FILE: &str = "results.csv";

/// One row of the aggregate table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub scene: String,
    pub strategy: StrategyKind,
    pub episodes: usize,
    pub successes: usize,
    pub sr_percent: Option<f64>,
    pub median_ttr: Option<f64>,
    pub spl_percent: Option<f64>,
    pub setup_error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BatchReport {
    pub rows: Vec<CellSummary>,
    pub episodes: Vec<EpisodeResult>,
}

/// Aggregates the episodes of one scene x strategy cell.
pub fn summarize(scene: &str, strategy: StrategyKind, episodes: &[&EpisodeResult]) -> CellSummary {
    let n = episodes.len();
    let successes = episodes.iter().filter(|e| e.success).count();
    let ttrs: Vec<f64> = episodes.iter().filter_map(|e| e.time_to_reach).collect();
    let owned: Vec<EpisodeResult> = episodes.iter().map(|&e| e.clone()).collect();
    CellSummary {
        scene: scene.to_string(),
        strategy,
        episodes: n,
        successes,
        sr_percent: (n > 0).then(|| 100.0 * successes as f64 / n as f64),
        median_ttr: median(&ttrs),
        spl_percent: spl(&owned).ok().map(|v| 100.0 * v),
        setup_error: None,
    }
}

/// File name of an episode log.
pub fn episode_file_name(scene: &str, strategy: StrategyKind, seed: u64) -> String {
    let clean: String = scene.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect();
    format!("episode-{clean}-{strategy}-{seed}.json")
}

/// Runs every (scene, strategy, seed) of the config in parallel. A setup
/// error in any episode of a cell marks the whole cell and leaves the other
/// cells untouched.
pub fn run_batch(cfg: &ScenarioConfig) -> Result<BatchReport> {
    cfg.validate()?;
    let scenes = cfg.batch_scenes();
    let strategies = cfg.batch_strategies();
    let seeds = cfg.batch_seeds();
    let mut jobs: Vec<(usize, usize, u64)> = Vec::new();
    for a in 0..scenes.len() {
        for b in 0..strategies.len() {
            jobs.extend(seeds.iter().map(|&s| (a, b, s)));
        }
    }
    let outcomes: Vec<Result<EpisodeResult>> =
        jobs.par_iter().map(|&(a, b, s)| run_scenario(cfg, &scenes[a], strategies[b], s)).collect();

    let mut rows = Vec::new();
    let mut episodes = Vec::new();
    for (a, scene) in scenes.iter().enumerate() {
        for (b, &strategy) in strategies.iter().enumerate() {
            let cell: Vec<&Result<EpisodeResult>> =
                jobs.iter().zip(&outcomes).filter(|((ja, jb, _), _)| *ja == a && *jb == b).map(|(_, o)| o).collect();
            if let Some(Err(e)) = cell.iter().find(|o| o.is_err()) {
                rows.push(CellSummary {
                    scene: scene.clone(),
                    strategy,
                    episodes: 0,
                    successes: 0,
                    sr_percent: None,
                    median_ttr: None,
                    spl_percent: None,
                    setup_error: Some(e.to_string()),
                });
                continue;
            }
            let ok: Vec<&EpisodeResult> = cell.iter().filter_map(|o| o.as_ref().ok()).collect();
            rows.push(summarize(scene, strategy, &ok));
            episodes.extend(ok.into_iter().cloned());
        }
    }
    Ok(BatchReport { rows, episodes })
}

/// Writes `results.csv` and one JSON log per episode into `dir`.
pub fn write_report(report: &BatchReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join(RESULTS_FILE))?;
    for row in &report.rows {
        w.serialize(row)?;
    }
    w.flush()?;
    for e in &report.episodes {
        fs::write(dir.join(episode_file_name(&e.scene, e.strategy, e.seed)), e.to_json())?;
    }
    Ok(())
}

pub fn read_results_csv(path: &Path) -> Result<Vec<CellSummary>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows: std::result::Result<Vec<CellSummary>, csv::Error> = r.deserialize().collect();
    Ok(rows?)
}

/// Recomputes the aggregate table from the episode logs in `dir`, one row
/// per scene x strategy, ordered by scene then strategy.
pub fn aggregate_from_logs(dir: &Path) -> Result<Vec<CellSummary>> {
    let mut names: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("episode-") && n.ends_with(".json"))
        })
        .collect();
    names.sort();
    let mut cells: BTreeMap<(String, StrategyKind), Vec<EpisodeResult>> = BTreeMap::new();
    for p in names {
        let e: EpisodeResult = serde_json::from_str(&fs::read_to_string(&p)?)?;
        cells.entry((e.scene.clone(), e.strategy)).or_default().push(e);
    }
    Ok(cells
        .into_iter()
        .map(|((scene, strategy), mut eps)| {
            eps.sort_by_key(|e| e.seed);
            let refs: Vec<&EpisodeResult> = eps.iter().collect();
            summarize(&scene, strategy, &refs)
        })
        .collect())
}
