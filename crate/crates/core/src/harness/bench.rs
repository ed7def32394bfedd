use std::fmt::Write;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::backend::{request_plan, BackendError, Endpoint};
use super::metrics::{sdf, spl, sr, MetricRecord, SdfMode};
use super::regimes::{run_regime, LandmarkRegime, RegimeResult};
use crate::fixtures;
use crate::nav_agent::{run_episode, EpisodeConfig, TrialRecord};
use crate::perception::NoiseModel;
use crate::planner::PlanError;
use crate::priori_map::{
    load_map_spec, segment_path, MapConfig, MapError, PrioriMapSpec, SemanticPrioriMap,
};
use crate::world_sim::{
    build_world, generate_map, generate_tasks, task_pool, Difficulty, MapParams, Task, World,
    WorldError, DEFAULT_CORRIDOR_WIDTH,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapSource {
    /// A bundled fixture by name.
    Fixture(String),
    /// A map spec file.
    File(PathBuf),
    /// `count` generated maps with seeds `seed`, `seed + 1`, ...
    Generated {
        rooms: usize,
        #[serde(default = "default_branches")]
        branches: usize,
        #[serde(default = "default_map_count")]
        count: usize,
        #[serde(default)]
        seed: u64,
    },
}

fn default_branches() -> usize {
    2
}

fn default_map_count() -> usize {
    10
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Backend {
    /// Plans from the symbolic planner.
    #[default]
    Oracle,
    /// Plans requested over HTTP.
    External(Endpoint),
}

/// One column group of the results table: a named agent configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    #[serde(default)]
    pub episode: EpisodeConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeConfig {
    #[serde(default = "default_regimes")]
    pub regimes: Vec<LandmarkRegime>,
    pub false_negative_rate: f64,
    #[serde(default = "default_regime_trials")]
    pub trials: usize,
    #[serde(default = "default_regime_budget")]
    pub budget: usize,
}

fn default_regimes() -> Vec<LandmarkRegime> {
    LandmarkRegime::ALL.to_vec()
}

fn default_regime_trials() -> usize {
    100
}

fn default_regime_budget() -> usize {
    15
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub maps: MapSource,
    #[serde(default = "default_difficulties")]
    pub difficulties: Vec<Difficulty>,
    /// Trials per difficulty; every condition runs the same tasks.
    pub trials: usize,
    #[serde(default = "default_conditions")]
    pub conditions: Vec<Condition>,
    /// Noise applied in every condition; each trial gets its own stream.
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default)]
    pub sdf_mode: SdfMode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub backend: Backend,
    /// Localization trials over the landmark-density corridors.
    #[serde(default)]
    pub regimes: Option<RegimeConfig>,
}

fn default_name() -> String {
    "benchmark".into()
}

fn default_difficulties() -> Vec<Difficulty> {
    Difficulty::ALL.to_vec()
}

fn default_conditions() -> Vec<Condition> {
    vec![Condition {
        name: "fine".into(),
        episode: EpisodeConfig::default(),
    }]
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid benchmark config: {0}")]
    Config(String),
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("cannot read map `{path}`: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("not enough {difficulty} tasks: {found} of {requested}")]
    NotEnoughTasks {
        difficulty: Difficulty,
        requested: usize,
        found: usize,
    },
    #[error("backend unavailable: {0}")]
    Backend(BackendError),
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: &str| Err(BenchError::Config(m.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.difficulties.is_empty() {
            return bad("no difficulties selected");
        }
        if self.conditions.is_empty() {
            return bad("no conditions");
        }
        if let Some(c) = self.conditions.iter().find(|c| !c.episode.is_valid()) {
            return Err(BenchError::Config(format!(
                "condition `{}` has invalid settings",
                c.name
            )));
        }
        if !self.noise.is_valid() {
            return bad("noise model out of range");
        }
        if let MapSource::Generated { rooms, count, .. } = self.maps {
            if rooms == 0 || count == 0 {
                return bad("generated maps need rooms and count of at least 1");
            }
        }
        if let Some(r) = &self.regimes {
            if r.trials == 0 || !(0.0..=1.0).contains(&r.false_negative_rate) {
                return bad(
                    "regime trials must be at least 1 and the false-negative rate in [0, 1]",
                );
            }
        }
        Ok(())
    }
}

/// Aggregates for one condition and difficulty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub condition: String,
    pub difficulty: Difficulty,
    pub trials: usize,
    pub sr: f64,
    pub spl: f64,
    pub sdf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeRow {
    pub regime: LandmarkRegime,
    pub trials: usize,
    pub sr: f64,
    pub sdf_as_written: f64,
    pub sdf_penalizing: f64,
    pub mean_detections: f64,
}

impl From<&RegimeResult> for RegimeRow {
    fn from(r: &RegimeResult) -> Self {
        Self {
            regime: r.regime,
            trials: r.trials,
            sr: r.sr,
            sdf_as_written: r.sdf_as_written,
            sdf_penalizing: r.sdf_penalizing,
            mean_detections: r.mean_detections,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResults {
    pub name: String,
    pub sdf_mode: SdfMode,
    pub cells: Vec<Cell>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub regimes: Vec<RegimeRow>,
}

impl BenchmarkResults {
    pub fn cell(&self, condition: &str, difficulty: Difficulty) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.condition == condition && c.difficulty == difficulty)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("results serialize") + "\n"
    }

    /// Conditions as rows, one SR/SPL/SDF group per difficulty; a second
    /// table for localization regimes when present.
    pub fn to_table(&self) -> String {
        let mut difficulties: Vec<Difficulty> = Vec::new();
        let mut conditions: Vec<&str> = Vec::new();
        for c in &self.cells {
            if !difficulties.contains(&c.difficulty) {
                difficulties.push(c.difficulty);
            }
            if !conditions.contains(&c.condition.as_str()) {
                conditions.push(&c.condition);
            }
        }
        let w = conditions
            .iter()
            .map(|c| c.len())
            .max()
            .unwrap_or(0)
            .max("condition".len());
        let mut out = String::new();
        let _ = write!(out, "{:<w$}", "condition");
        for d in &difficulties {
            let _ = write!(out, " | {:^22}", d.to_string());
        }
        out.push('\n');
        let _ = write!(out, "{:<w$}", "");
        for _ in &difficulties {
            let _ = write!(out, " | {:>6} {:>7} {:>7}", "SR", "SPL", "SDF");
        }
        out.push('\n');
        out.push_str(&"-".repeat(w + difficulties.len() * 25));
        out.push('\n');
        for cond in &conditions {
            let _ = write!(out, "{:<w$}", cond);
            for d in &difficulties {
                match self.cell(cond, *d) {
                    Some(c) => {
                        let _ = write!(out, " | {:>6.1} {:>7.1} {:>7.1}", c.sr, c.spl, c.sdf);
                    }
                    None => {
                        let _ = write!(out, " | {:>6} {:>7} {:>7}", "-", "-", "-");
                    }
                }
            }
            out.push('\n');
        }
        if !self.regimes.is_empty() {
            out.push('\n');
            let _ = writeln!(
                out,
                "{:<10} | {:>6} | {:>6} | {:>15} | {:>15} | {:>7}",
                "regime", "trials", "SR", "SDF as-written", "SDF penalizing", "mean d"
            );
            out.push_str(&"-".repeat(75));
            out.push('\n');
            for r in &self.regimes {
                let _ = writeln!(
                    out,
                    "{:<10} | {:>6} | {:>6.1} | {:>15.1} | {:>15.1} | {:>7.2}",
                    r.regime.to_string(),
                    r.trials,
                    r.sr,
                    r.sdf_as_written,
                    r.sdf_penalizing,
                    r.mean_detections
                );
            }
        }
        out
    }
}

/// A compiled map with its simulated building.
pub struct MapCase {
    pub spec: PrioriMapSpec,
    pub map: SemanticPrioriMap,
    pub world: World,
}

impl MapCase {
    pub fn new(spec: PrioriMapSpec) -> Result<Self, BenchError> {
        let map = segment_path(&spec, &MapConfig::default())?;
        let world = build_world(&spec, DEFAULT_CORRIDOR_WIDTH)?;
        Ok(Self { spec, map, world })
    }
}

/// A task bound to the map it was drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchTask {
    pub map: usize,
    pub task: Task,
}

/// Tasks for one difficulty, spread over the maps. Generated sources draw
/// from extra seeds when a map has too few tasks of that difficulty.
pub fn collect_tasks(
    source: &MapSource,
    difficulty: Difficulty,
    trials: usize,
    seed: u64,
    cases: &mut Vec<MapCase>,
) -> Result<Vec<BenchTask>, BenchError> {
    let mut out = Vec::new();
    let salt = seed.wrapping_mul(31).wrapping_add(difficulty as u64 + 1);
    match source {
        MapSource::Generated {
            rooms,
            branches,
            count,
            seed: map_seed,
        } => {
            let per_map = trials.div_ceil(*count);
            let mut k = 0;
            while out.len() < trials {
                if k >= count * 4 + 8 {
                    return Err(BenchError::NotEnoughTasks {
                        difficulty,
                        requested: trials,
                        found: out.len(),
                    });
                }
                if k >= cases.len() {
                    let spec = generate_map(&MapParams {
                        rooms: *rooms,
                        branches: *branches,
                        seed: map_seed + k as u64,
                    });
                    cases.push(MapCase::new(spec)?);
                }
                let case = &cases[k];
                let available = task_pool(&case.world, &case.map, difficulty).len();
                let n = per_map.min(available).min(trials - out.len());
                if n > 0 {
                    let tasks = generate_tasks(
                        &case.world,
                        &case.map,
                        difficulty,
                        n,
                        salt ^ ((k as u64) << 16),
                    )
                    .map_err(|e| BenchError::Config(e.to_string()))?;
                    out.extend(tasks.into_iter().map(|task| BenchTask { map: k, task }));
                }
                k += 1;
            }
        }
        MapSource::Fixture(_) | MapSource::File(_) => {
            if cases.is_empty() {
                cases.push(MapCase::new(load_source(source)?)?);
            }
            let case = &cases[0];
            let tasks =
                generate_tasks(&case.world, &case.map, difficulty, trials, salt).map_err(|_| {
                    BenchError::NotEnoughTasks {
                        difficulty,
                        requested: trials,
                        found: task_pool(&case.world, &case.map, difficulty).len(),
                    }
                })?;
            out.extend(tasks.into_iter().map(|task| BenchTask { map: 0, task }));
        }
    }
    Ok(out)
}

fn load_source(source: &MapSource) -> Result<PrioriMapSpec, BenchError> {
    match source {
        MapSource::Fixture(name) => {
            fixtures::load(name).ok_or_else(|| BenchError::UnknownFixture(name.clone()))
        }
        MapSource::File(path) => {
            let f = std::fs::File::open(path).map_err(|source| BenchError::Io {
                path: path.clone(),
                source,
            })?;
            Ok(load_map_spec(f)?)
        }
        MapSource::Generated { .. } => unreachable!("generated maps are built per seed"),
    }
}

/// One finished episode with where it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub condition: String,
    pub difficulty: Difficulty,
    pub map: usize,
    pub trial: usize,
    pub record: TrialRecord,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRun {
    pub results: BenchmarkResults,
    pub episodes: Vec<EpisodeLog>,
}

/// Run every condition on the same tasks and aggregate per cell.
pub fn run_benchmark(config: &BenchmarkConfig) -> Result<BenchmarkRun, BenchError> {
    config.validate()?;
    let mut cases = Vec::new();
    let mut cells = Vec::new();
    let mut episodes = Vec::new();
    for &difficulty in &config.difficulties {
        let tasks = collect_tasks(
            &config.maps,
            difficulty,
            config.trials,
            config.seed,
            &mut cases,
        )?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed ^ difficulty as u64);
        let noise_seeds: Vec<u64> = tasks.iter().map(|_| rng.random()).collect();
        let plans = match &config.backend {
            Backend::Oracle => vec![None; tasks.len()],
            Backend::External(endpoint) => tasks
                .iter()
                .map(|t| {
                    let case = &cases[t.map];
                    match request_plan(&case.map, &t.task.nav_task(), endpoint) {
                        Ok(p) => Ok(Some(p)),
                        Err(BackendError::MalformedPlan(_) | BackendError::MalformedReply(_)) => {
                            Ok(Some(crate::planner::NavPlan {
                                steps: Vec::new(),
                                source: crate::planner::PlanSource::ExternalBackend,
                            }))
                        }
                        Err(e) => Err(BenchError::Backend(e)),
                    }
                })
                .collect::<Result<Vec<_>, _>>()?,
        };
        for cond in &config.conditions {
            let mut records = Vec::with_capacity(tasks.len());
            for (i, t) in tasks.iter().enumerate() {
                let case = &cases[t.map];
                let ep = EpisodeConfig {
                    noise: NoiseModel {
                        seed: noise_seeds[i],
                        ..config.noise
                    },
                    ..cond.episode
                };
                let record = run_episode(&case.world, &case.map, &t.task, plans[i].clone(), &ep);
                records.push(MetricRecord::from(&record));
                episodes.push(EpisodeLog {
                    condition: cond.name.clone(),
                    difficulty,
                    map: t.map,
                    trial: i,
                    record,
                });
            }
            cells.push(Cell {
                condition: cond.name.clone(),
                difficulty,
                trials: records.len(),
                sr: sr(&records).unwrap_or(0.0),
                spl: spl(&records).unwrap_or(0.0),
                sdf: sdf(&records, config.sdf_mode).unwrap_or(0.0),
            });
        }
    }
    let regimes = match &config.regimes {
        Some(r) => r
            .regimes
            .iter()
            .map(|&g| {
                RegimeRow::from(&run_regime(
                    g,
                    r.false_negative_rate,
                    r.trials,
                    r.budget,
                    config.seed,
                ))
            })
            .collect(),
        None => Vec::new(),
    };
    Ok(BenchmarkRun {
        results: BenchmarkResults {
            name: config.name.clone(),
            sdf_mode: config.sdf_mode,
            cells,
            regimes,
        },
        episodes,
    })
}
