//! Stress models, generated traces, timing and fault injection.

use std::fmt::Write as _;
use std::io;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use cspmon_core::lts::{determinize, synthesize_lts, SynthesisLimits};
use cspmon_core::monitor::check_trace;
use cspmon_core::syntax::{parse_entry, parse_spec, validate_spec};
use cspmon_core::{Event, Lts, Mode, Observed, Value};

/// `n` processes over `n` events where every process offers every event
/// and `e_j` always leads to `S_j`: `n` states and `n * n` transitions.
pub fn generate_worst_case_model(n: usize) -> String {
    assert!(n >= 1, "model size must be positive");
    let mut out = String::with_capacity(n * n * 16 + 32 * n);
    out.push_str("channel ");
    for j in 0..n {
        if j > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "e_{j}");
    }
    out.push('\n');
    for i in 0..n {
        let _ = write!(out, "S_{i} = ");
        for j in 0..n {
            if j > 0 {
                out.push_str(" [] ");
            }
            let _ = write!(out, "e_{j} -> S_{j}");
        }
        out.push('\n');
    }
    out
}

pub const WORST_CASE_ENTRY: &str = "S_0";

/// `len` events drawn uniformly from `e_0 .. e_(n-1)`.
pub fn generate_trace(n: usize, len: usize, seed: u64) -> Vec<Event> {
    assert!(n >= 1, "alphabet size must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| Event::bare(format!("e_{}", rng.gen_range(0..n)))).collect()
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("bad plan: {0}")]
    Plan(String),
    #[error("synthesis of the size-{n} model failed: {reason}")]
    Synthesis { n: usize, reason: String },
    #[error("trace of length {len} failed on the size-{n} model")]
    TraceFailed { n: usize, len: usize },
    #[error("cannot write results: {0}")]
    Io(#[from] io::Error),
    #[error("cannot write results: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchPlan {
    pub model_sizes: Vec<usize>,
    pub trace_lengths: Vec<usize>,
    pub repetitions: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl Default for BenchPlan {
    fn default() -> Self {
        BenchPlan {
            model_sizes: vec![100, 200, 500, 1000, 2000],
            trace_lengths: vec![1_000, 10_000, 100_000],
            repetitions: 10,
            seed: 0,
            output: None,
        }
    }
}

impl BenchPlan {
    fn validate(&self) -> Result<(), BenchError> {
        if self.model_sizes.contains(&0) {
            return Err(BenchError::Plan("model sizes must be positive".into()));
        }
        if self.trace_lengths.contains(&0) {
            return Err(BenchError::Plan("trace lengths must be positive".into()));
        }
        if self.repetitions == 0 {
            return Err(BenchError::Plan("repetitions must be at least 1".into()));
        }
        Ok(())
    }
}

/// One CSV row. Synthesis rows leave the trace and check columns empty;
/// check rows leave `synth_s` empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n_states: usize,
    pub n_transitions: usize,
    pub trace_len: Option<usize>,
    pub rep: Option<usize>,
    pub seed: u64,
    pub synth_s: Option<f64>,
    pub check_s: Option<f64>,
    pub mean_event_s: Option<f64>,
}

/// Parse, validate, synthesize and determinize one model, timed.
pub fn synthesize_timed(source: &str, entry: &str) -> Result<(Lts, Duration), String> {
    let limits = SynthesisLimits::default();
    let start = Instant::now();
    let spec = validate_spec(parse_spec(source).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let entry = spec
        .resolve_entry(&parse_entry(entry).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let lts = synthesize_lts(&spec, &entry, &limits).map_err(|e| e.to_string())?;
    let lts = determinize(&lts, &limits).map_err(|e| e.to_string())?;
    Ok((lts, start.elapsed()))
}

/// Runs the plan in order: per size, the averaged synthesis row, then one
/// check row per length and repetition. Rows are also written to
/// `plan.output` when set.
pub fn run_bench(plan: &BenchPlan) -> Result<Vec<BenchRow>, BenchError> {
    plan.validate()?;
    let mut rows = Vec::new();
    for &n in &plan.model_sizes {
        let source = generate_worst_case_model(n);
        let mut total = Duration::ZERO;
        let mut oracle = None;
        for _ in 0..plan.repetitions {
            let (lts, t) = synthesize_timed(&source, WORST_CASE_ENTRY)
                .map_err(|reason| BenchError::Synthesis { n, reason })?;
            total += t;
            oracle = Some(lts);
        }
        let oracle = Arc::new(oracle.expect("at least one repetition"));
        let (n_states, n_transitions) = (oracle.state_count(), oracle.transition_count());
        rows.push(BenchRow {
            n_states,
            n_transitions,
            trace_len: None,
            rep: None,
            seed: plan.seed,
            synth_s: Some(total.as_secs_f64() / plan.repetitions as f64),
            check_s: None,
            mean_event_s: None,
        });
        for &len in &plan.trace_lengths {
            for rep in 0..plan.repetitions {
                let seed = plan.seed.wrapping_add(rep as u64);
                let trace = generate_trace(n, len, seed).into_iter().map(Observed::Event);
                let report = check_trace(oracle.clone(), Mode::Strict, trace).expect("determinized");
                if !report.verdict.is_pass() {
                    return Err(BenchError::TraceFailed { n, len });
                }
                rows.push(BenchRow {
                    n_states,
                    n_transitions,
                    trace_len: Some(len),
                    rep: Some(rep),
                    seed,
                    synth_s: None,
                    check_s: Some(report.check_time.as_secs_f64()),
                    mean_event_s: Some(report.mean_event_time().as_secs_f64()),
                });
            }
        }
    }
    if let Some(path) = &plan.output {
        let mut w = csv::Writer::from_path(path)?;
        for r in &rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(rows)
}

/// Least-squares line through the points: `(slope, intercept, r_squared)`.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

const ROS_TOPICS: [&str; 4] = ["/odom", "/cmd_vel", "/battery_state", "/tf"];

/// The rover mission log: `mission_start`, five inspect/move blocks for
/// waypoints 1, 2, 3, 4, 0 each wrapped in `radiation_level.Green`, then
/// `mission_complete`. ROS topic chatter fills the gaps, 243 lines in all.
pub fn rover_trace() -> Vec<Observed> {
    let ev = |s: String| Observed::Event(s.parse().expect("canonical event"));
    let mut topics = ROS_TOPICS.iter().cycle();
    let mut noise = |out: &mut Vec<Observed>, k: usize| {
        out.extend(topics.by_ref().take(k).map(|t| Observed::Unmapped(t.to_string())));
    };
    let mut out = vec![ev("mission_start".into())];
    noise(&mut out, 37);
    for (i, wp) in [1, 2, 3, 4, 0].into_iter().enumerate() {
        out.push(ev("radiation_level.Green".into()));
        out.push(ev(format!("inspect.{wp}")));
        out.push(ev(format!("move.{wp}")));
        out.push(ev("radiation_level.Green".into()));
        noise(&mut out, if i == 4 { 36 } else { 37 });
    }
    out.push(ev("mission_complete".into()));
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FaultKind {
    /// The first `radiation_level.Green` becomes `radiation_level.Red`.
    RadiationViolation,
    SwapAdjacent(usize),
    ParamMismatch(usize, Value),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FaultError {
    #[error("position {position} is outside a trace of {len} events")]
    Position { position: usize, len: usize },
    #[error("no radiation_level.Green event to replace")]
    NoGreen,
    #[error("event at position {0} does not carry exactly one value")]
    NotParameterised(usize),
}

/// Applies one fault. Returns the mutated trace and a one-line description.
pub fn inject_fault(trace: &[Observed], kind: &FaultKind) -> Result<(Vec<Observed>, String), FaultError> {
    let mut out = trace.to_vec();
    let bounds = |position: usize, need: usize| {
        if position + need > trace.len() {
            Err(FaultError::Position {
                position,
                len: trace.len(),
            })
        } else {
            Ok(())
        }
    };
    let description = match kind {
        FaultKind::RadiationViolation => {
            let green = Observed::Event("radiation_level.Green".parse().expect("event"));
            let i = trace.iter().position(|e| *e == green).ok_or(FaultError::NoGreen)?;
            out[i] = Observed::Event("radiation_level.Red".parse().expect("event"));
            format!("position {i}: radiation_level.Green replaced by radiation_level.Red")
        }
        FaultKind::SwapAdjacent(i) => {
            bounds(*i, 2)?;
            out.swap(*i, i + 1);
            format!("positions {i} and {}: swapped {} and {}", i + 1, trace[*i], trace[i + 1])
        }
        FaultKind::ParamMismatch(i, v) => {
            bounds(*i, 1)?;
            let Observed::Event(e) = &trace[*i] else {
                return Err(FaultError::NotParameterised(*i));
            };
            if e.values.len() != 1 {
                return Err(FaultError::NotParameterised(*i));
            }
            let new = Event::new(e.channel.clone(), vec![v.clone()]);
            let d = format!("position {i}: {e} replaced by {new}");
            out[*i] = Observed::Event(new);
            d
        }
    };
    Ok((out, description))
}
