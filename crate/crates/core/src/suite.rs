//! Batch evaluation of navigation episodes over scenes and a parameter grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::navsim::{run_episode, scene_graph, NavConfig, NavMetrics};
use crate::objective::RobotParams;
use crate::scene::SceneDescription;

/// Cartesian grid of robot parameters; any empty axis yields no episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    pub r_s: Vec<f64>,
    pub r_s_prime: Vec<f64>,
    pub omega_max: Vec<f64>,
}

impl ParamGrid {
    pub fn single(params: &RobotParams) -> Self {
        Self {
            r_s: vec![params.r_s],
            r_s_prime: vec![params.r_s_prime],
            omega_max: vec![params.omega_max],
        }
    }

    /// Parameter sets in grid order, `r_s` outermost.
    pub fn expand(&self, base: &RobotParams) -> Vec<RobotParams> {
        let mut out = Vec::new();
        for &r_s in &self.r_s {
            for &r_s_prime in &self.r_s_prime {
                for &omega_max in &self.omega_max {
                    out.push(RobotParams {
                        r_s,
                        r_s_prime,
                        omega_max,
                        ..*base
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub scene: usize,
    pub r_s: f64,
    pub r_s_prime: f64,
    pub omega_max: f64,
    pub metrics: NavMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub r_s: f64,
    pub r_s_prime: f64,
    pub omega_max: f64,
    pub episodes: usize,
    pub task_completion: f64,
    pub goal_arrival_rate: f64,
    pub collision_free_rate: f64,
    pub aborted: usize,
    pub mean_path_length: f64,
    pub min_clearance: Option<f64>,
    pub mean_min_clearance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub scenes: usize,
    pub episodes: Vec<EpisodeRow>,
    pub groups: Vec<GroupSummary>,
}

impl SuiteReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn summarize(rows: &[&EpisodeRow]) -> GroupSummary {
    let n = rows.len() as f64;
    let rate =
        |f: &dyn Fn(&NavMetrics) -> bool| rows.iter().filter(|r| f(&r.metrics)).count() as f64 / n;
    let clearances: Vec<f64> = rows
        .iter()
        .filter_map(|r| r.metrics.min_clearance)
        .collect();
    GroupSummary {
        r_s: rows[0].r_s,
        r_s_prime: rows[0].r_s_prime,
        omega_max: rows[0].omega_max,
        episodes: rows.len(),
        task_completion: rows.iter().map(|r| r.metrics.task_completion).sum::<f64>() / n,
        goal_arrival_rate: rate(&|m| m.goal_arrival),
        collision_free_rate: rate(&|m| m.collision_free),
        aborted: rows.iter().filter(|r| r.metrics.aborted.is_some()).count(),
        mean_path_length: rows.iter().map(|r| r.metrics.path_length).sum::<f64>() / n,
        min_clearance: clearances.iter().copied().reduce(f64::min),
        mean_min_clearance: (!clearances.is_empty())
            .then(|| clearances.iter().sum::<f64>() / clearances.len() as f64),
    }
}

/// Runs every scene against every parameter set. Episodes run in parallel; the report
/// order (scene-major, then grid order) does not depend on scheduling.
pub fn evaluate_suite(
    scenes: &[SceneDescription],
    grid: &ParamGrid,
    base: &RobotParams,
    cfg: &NavConfig,
) -> Result<SuiteReport> {
    cfg.validate()?;
    let sets = grid.expand(base);
    let graphs = scenes
        .par_iter()
        .map(|s| scene_graph(s, cfg))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, RobotParams)> = (0..scenes.len())
        .flat_map(|i| sets.iter().map(move |p| (i, *p)))
        .collect();
    let episodes = jobs
        .par_iter()
        .map(|(i, p)| {
            let metrics = match run_episode(&scenes[*i], &graphs[*i], p, cfg) {
                Ok(ep) => ep.metrics,
                Err(e) => NavMetrics {
                    task_completion: 0.0,
                    goal_arrival: false,
                    collision_free: true,
                    path_length: 0.0,
                    steps: 0,
                    min_clearance: None,
                    aborted: Some(e.to_string()),
                },
            };
            EpisodeRow {
                scene: *i,
                r_s: p.r_s,
                r_s_prime: p.r_s_prime,
                omega_max: p.omega_max,
                metrics,
            }
        })
        .collect::<Vec<_>>();
    let groups = sets
        .iter()
        .filter_map(|p| {
            let rows: Vec<&EpisodeRow> = episodes
                .iter()
                .filter(|r| {
                    r.r_s == p.r_s && r.r_s_prime == p.r_s_prime && r.omega_max == p.omega_max
                })
                .collect();
            (!rows.is_empty()).then(|| summarize(&rows))
        })
        .collect();
    Ok(SuiteReport {
        scenes: scenes.len(),
        episodes,
        groups,
    })
}
