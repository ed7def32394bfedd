//! Scoring and experiment orchestration: SR/SPL/SDF metrics, benchmark
//! runs over generated maps, landmark-density localization trials,
//! trajectory rendering and the external model backend.

mod backend;
mod bench;
mod metrics;
mod regimes;
mod render;

pub use backend::{
    call_backend, coarse_direction_request, parse_coarse_reply, plan_request, request_plan,
    BackendError, BackendRequest, BackendResponse, Endpoint, ViewDescriptor, ViewDetection,
};
pub use bench::{
    collect_tasks, run_benchmark, Backend, BenchError, BenchTask, BenchmarkConfig,
    BenchmarkResults, BenchmarkRun, Cell, Condition, EpisodeLog, MapCase, MapSource, RegimeConfig,
    RegimeRow,
};
pub use metrics::{sdf, spl, sr, MetricError, MetricRecord, SdfMode};
pub use regimes::{regime_map, run_regime, LandmarkRegime, RegimeResult, REGIME_START};
pub use render::render_trajectory;
