use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use pmnav::harness::{
    render_trajectory, request_plan, run_benchmark, BenchmarkConfig, Endpoint, MapCase,
};
use pmnav::nav_agent::{run_episode, write_jsonl, EpisodeConfig, Event, Outcome, TrialRecord};
use pmnav::planner::{
    format_plan, parse_plan_response, plan, render_hcot_prompt, NavTask, PlannerConfig,
};
use pmnav::priori_map::{load_map_spec, render_annotated_map, render_semantic_text, PrioriMapSpec};
use pmnav::world_sim::{generate_map, oracle_length, Difficulty, MapParams, Pose, Task};

#[derive(Parser)]
#[command(
    name = "pmnav",
    version,
    about = "Priori-map guided navigation toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MapEmit {
    Text,
    Svg,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlanEmit {
    Plan,
    Prompt,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a map spec and print its semantic text or annotated SVG.
    ParseMap {
        spec: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        emit: MapEmit,
    },
    /// Plan from a start segment to a target room.
    Plan {
        spec: PathBuf,
        #[arg(long)]
        start: String,
        #[arg(long)]
        target: String,
        #[arg(long, value_enum, default_value = "plan")]
        emit: PlanEmit,
        /// Ask this HTTP endpoint for the plan instead of the symbolic planner.
        #[arg(long)]
        backend: Option<String>,
        #[arg(long, default_value_t = 30_000)]
        timeout_ms: u64,
    },
    /// Run one episode in the simulated building.
    Simulate {
        spec: PathBuf,
        #[arg(long)]
        task: PathBuf,
        /// Write the trajectory drawing here.
        #[arg(long)]
        render: Option<PathBuf>,
        /// Write the event log here, one JSON object per line.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Run a benchmark config and write results.json, results.txt and episodes.jsonl.
    Bench {
        config: PathBuf,
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
    },
    /// Generate a map spec from JSON parameters (a file or an inline object).
    GenMap {
        params: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Why a command did not succeed.
enum Failure {
    /// Bad arguments or unreadable or invalid input files.
    Input(anyhow::Error),
    /// The command ran but the navigation task failed.
    Task(String),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.into())
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::ParseMap { spec, emit } => parse_map(&spec, emit),
        Command::Plan {
            spec,
            start,
            target,
            emit,
            backend,
            timeout_ms,
        } => plan_cmd(&spec, start, target, emit, backend, timeout_ms),
        Command::Simulate {
            spec,
            task,
            render,
            log,
        } => simulate(&spec, &task, render.as_deref(), log.as_deref()),
        Command::Bench { config, out } => bench(&config, &out),
        Command::GenMap { params, out } => gen_map(&params, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Task(msg)) => {
            eprintln!("task failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read_spec(path: &Path) -> anyhow::Result<PrioriMapSpec> {
    let f = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    load_map_spec(f).with_context(|| format!("invalid map spec {}", path.display()))
}

fn load_case(path: &Path) -> anyhow::Result<MapCase> {
    MapCase::new(read_spec(path)?).map_err(|e| anyhow!("{e}"))
}

fn write_out(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn parse_map(spec: &Path, emit: MapEmit) -> CmdResult {
    let spec = read_spec(spec)?;
    let map = pmnav::priori_map::segment_path(&spec, &Default::default())
        .context("cannot compile map")?;
    let text = match emit {
        MapEmit::Text => render_semantic_text(&map),
        MapEmit::Svg => render_annotated_map(&map),
    };
    write_out(None, &text)?;
    Ok(())
}

fn plan_cmd(
    spec: &Path,
    start: String,
    target: String,
    emit: PlanEmit,
    backend: Option<String>,
    timeout_ms: u64,
) -> CmdResult {
    let spec = read_spec(spec)?;
    let map = pmnav::priori_map::segment_path(&spec, &Default::default())
        .context("cannot compile map")?;
    let task = NavTask {
        start_segment: start,
        target_room: target,
        initial_heading: None,
    };
    match emit {
        PlanEmit::Prompt => {
            // resolve ids first so a typo is an input error, not a prompt
            plan(&map, &task, &PlannerConfig::default())?;
            write_out(None, &render_hcot_prompt(&map, &task))?;
        }
        PlanEmit::Plan => {
            let p = match backend {
                Some(url) => request_plan(&map, &task, &Endpoint { url, timeout_ms })
                    .map_err(|e| Failure::Task(e.to_string()))?,
                None => plan(&map, &task, &PlannerConfig::default())?.1,
            };
            write_out(None, &(format_plan(&p) + "\n"))?;
        }
    }
    Ok(())
}

/// Task file for `simulate`. Only the start pose and target are required.
#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct SimTask {
    start_pose: Pose,
    target_room: String,
    /// Defaults to the segment nearest the start pose.
    #[serde(default)]
    start_segment: Option<String>,
    /// Plan text to follow instead of the symbolic planner's.
    #[serde(default)]
    plan: Option<String>,
    #[serde(default)]
    episode: EpisodeConfig,
}

#[derive(Serialize)]
struct SimSummary<'a> {
    target_room: &'a str,
    success: bool,
    outcome: Outcome,
    path_length: f64,
    shortest_length: f64,
    steps_used: usize,
    step_budget: usize,
    detections_made: usize,
    localized_segment: Option<&'a str>,
    plan: String,
}

fn nearest_segment(case: &MapCase, p: pmnav::geom::Vec2) -> Option<String> {
    (0..case.map.segments.len())
        .min_by(|&a, &b| {
            case.map
                .segment_geometry(a)
                .distance_to(p)
                .total_cmp(&case.map.segment_geometry(b).distance_to(p))
        })
        .map(|s| case.map.segments[s].id.clone())
}

fn simulate(spec: &Path, task_path: &Path, render: Option<&Path>, log: Option<&Path>) -> CmdResult {
    let case = load_case(spec)?;
    let text = fs::read_to_string(task_path)
        .with_context(|| format!("cannot read {}", task_path.display()))?;
    let st: SimTask = serde_json::from_str(&text)
        .with_context(|| format!("invalid task file {}", task_path.display()))?;
    if !st.episode.is_valid() {
        return Err(Failure::Input(anyhow!("episode settings out of range")));
    }
    let start = st.start_pose.position();
    let start_segment = match st.start_segment {
        Some(s) => s,
        None => nearest_segment(&case, start).ok_or_else(|| anyhow!("map has no segments"))?,
    };
    let nav = NavTask {
        start_segment: start_segment.clone(),
        target_room: st.target_room.clone(),
        initial_heading: None,
    };
    let shortest = oracle_length(&case.map, start, &nav)?;
    let task = Task {
        start_pose: st.start_pose,
        start_segment,
        target_room: st.target_room,
        difficulty: Difficulty::Easy,
        oracle_steps: (shortest / case.world.motion.forward_step - 1e-9)
            .ceil()
            .max(0.0) as usize,
        shortest_length: shortest.max(f64::MIN_POSITIVE),
    };
    let given = match &st.plan {
        Some(text) => Some(parse_plan_response(text, &case.map)?),
        None => None,
    };
    let record = run_episode(&case.world, &case.map, &task, given, &st.episode);
    if let Some(path) = render {
        fs::write(path, render_trajectory(&case.world, &record))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    if let Some(path) = log {
        let f =
            fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
        write_jsonl(&record.events, BufWriter::new(f))?;
    }
    print_summary(&record)?;
    if record.success {
        Ok(())
    } else {
        Err(Failure::Task(format!("{:?}", record.outcome)))
    }
}

fn print_summary(r: &TrialRecord) -> anyhow::Result<()> {
    let s = SimSummary {
        target_room: &r.target_room,
        success: r.success,
        outcome: r.outcome,
        path_length: r.path_length,
        shortest_length: r.shortest_length,
        steps_used: r.steps_used,
        step_budget: r.step_budget,
        detections_made: r.detections_made,
        localized_segment: r.localized_segment.as_deref(),
        plan: format_plan(&r.plan),
    };
    println!("{}", serde_json::to_string_pretty(&s)?);
    Ok(())
}

#[derive(Serialize)]
struct EventLine<'a> {
    condition: &'a str,
    difficulty: Difficulty,
    map: usize,
    trial: usize,
    #[serde(flatten)]
    event: &'a Event,
}

fn bench(config: &Path, out: &Path) -> CmdResult {
    let text =
        fs::read_to_string(config).with_context(|| format!("cannot read {}", config.display()))?;
    let cfg: BenchmarkConfig = serde_json::from_str(&text)
        .with_context(|| format!("invalid benchmark config {}", config.display()))?;
    let run = run_benchmark(&cfg)?;
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    fs::write(out.join("results.json"), run.results.to_json())?;
    let table = run.results.to_table();
    fs::write(out.join("results.txt"), &table)?;
    let mut w = BufWriter::new(fs::File::create(out.join("episodes.jsonl"))?);
    for ep in &run.episodes {
        for event in &ep.record.events {
            let line = EventLine {
                condition: &ep.condition,
                difficulty: ep.difficulty,
                map: ep.map,
                trial: ep.trial,
                event,
            };
            serde_json::to_writer(&mut w, &line)?;
            w.write_all(b"\n")?;
        }
    }
    w.flush()?;
    print!("{table}");
    Ok(())
}

fn gen_map(params: &str, out: Option<&Path>) -> CmdResult {
    let text = if params.trim_start().starts_with('{') {
        params.to_string()
    } else {
        fs::read_to_string(params).with_context(|| format!("cannot read {params}"))?
    };
    let p: MapParams = serde_json::from_str(&text).context("invalid map parameters")?;
    if p.rooms == 0 {
        return Err(Failure::Input(anyhow!("rooms must be at least 1")));
    }
    write_out(out, &(generate_map(&p).to_json() + "\n"))?;
    Ok(())
}
