//! Command-line entry point.

use std::ffi::OsString;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use cspmon_core::lts::SynthesisLimits;
use cspmon_core::{Mode, Session};

use crate::bench::{run_bench, BenchPlan};
use crate::config::{load_config, Config, Input};
use crate::mapping::{load_mapping, Mapping};
use crate::pipeline::{build_oracle, gate, CliError, Oracle, OracleRequest};
use crate::report::{append_csv, verdict_json, CheckSummary};
use crate::server::{Server, SummarySink};
use crate::trace::read_trace;

#[derive(Parser, Debug)]
#[command(name = "cspmon", version, about = "Check event traces against a CSP specification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a trace file offline.
    Check(CheckArgs),
    /// Check events arriving over TCP or WebSocket.
    Listen(ListenArgs),
    /// Synthesize the LTS and print its size.
    Synth(ModelArgs),
    /// Run only the determinism gate.
    Detcheck(ModelArgs),
    /// Time synthesis and checking on worst-case models.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    config: PathBuf,
    /// Trace file, overriding the configured input.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    mode: Option<Mode>,
    /// Also write the report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Append a timing row to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write one NDJSON verdict per event, as the server would reply.
    #[arg(long)]
    verdicts: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ListenArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    port: Option<u16>,
    #[arg(long)]
    mode: Option<Mode>,
    /// Serve one connection, then exit with its verdict.
    #[arg(long)]
    once: bool,
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long, conflicts_with_all = ["spec", "entry"], required_unless_present = "spec")]
    config: Option<PathBuf>,
    #[arg(long, requires = "entry")]
    spec: Option<PathBuf>,
    #[arg(long)]
    entry: Option<String>,
    /// Observable events or channel names, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "config")]
    observable: Option<Vec<String>>,
    /// Write the synthesized LTS dump here.
    #[arg(long)]
    export: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [100usize, 200, 500, 1000, 2000])]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [1000usize, 10_000, 100_000])]
    lengths: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Runs the CLI with process stdout and stderr.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_cli_with(args, &mut io::stdout().lock(), &mut io::stderr().lock())
}

/// Runs the CLI writing to the given streams. Returns the exit code.
pub fn run_cli_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    3
                }
            };
        }
    };
    let result = match cli.command {
        Command::Check(a) => check(a, out),
        Command::Listen(a) => listen(a, out, err),
        Command::Synth(a) => synth(a, out),
        Command::Detcheck(a) => detcheck(a, out),
        Command::Bench(a) => bench(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn request(cfg: &Config) -> OracleRequest<'_> {
    OracleRequest {
        spec_path: &cfg.spec_path,
        entry: &cfg.entry_process,
        observable: cfg.observable_events.as_deref(),
        limits: cfg.limits,
    }
}

fn oracle_and_mapping(cfg: &Config) -> Result<(Oracle, Mapping), CliError> {
    let oracle = build_oracle(&request(cfg))?;
    let mapping = match &cfg.mapping_path {
        Some(p) => load_mapping(p)?,
        None => Mapping::default(),
    };
    mapping.validate(&oracle.alphabet)?;
    Ok((oracle, mapping))
}

fn create(path: &Path) -> Result<File, CliError> {
    File::create(path).map_err(|e| CliError::io(format!("cannot create {}", path.display()), e))
}

fn check(a: CheckArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let mut cfg = load_config(&a.config)?;
    if let Some(m) = a.mode {
        cfg.mode = m;
    }
    let trace_path = match (a.trace, &cfg.input) {
        (Some(p), _) => p,
        (None, Input::TraceFile(p)) => p.clone(),
        (None, Input::Listen { .. }) => {
            return Err(CliError::Usage(
                "the config listens on a socket; pass --trace or use `listen`".into(),
            ))
        }
    };
    let (oracle, mapping) = oracle_and_mapping(&cfg)?;
    let read_err = |e| CliError::io(format!("cannot read {}", trace_path.display()), e);
    let events = read_trace(&trace_path, &mapping).map_err(read_err)?;
    let mut verdicts = a.verdicts.as_deref().map(create).transpose()?.map(io::BufWriter::new);
    let write_err = |e| CliError::io("cannot write verdicts", e);

    let mut session = Session::new(oracle.lts.clone(), cfg.mode).expect("determinized");
    let mut check_time = Duration::ZERO;
    let mut total = 0;
    let mut fail_line: Option<String> = None;
    for e in events {
        let e = e.map_err(read_err)?;
        total += 1;
        let line = match &fail_line {
            Some(l) => l.clone(),
            None => {
                let (v, spent) = session.step_timed(e);
                check_time += spent;
                let line = verdict_json(&v);
                if !v.is_pass() {
                    fail_line = Some(line.clone());
                }
                line
            }
        };
        if let Some(w) = verdicts.as_mut() {
            writeln!(w, "{line}").map_err(write_err)?;
        }
    }
    if let Some(mut w) = verdicts {
        w.flush().map_err(write_err)?;
    }

    let verdict = session.verdict();
    let spec = cfg.spec_path.display().to_string();
    let summary = CheckSummary {
        spec: &spec,
        entry: &cfg.entry_process,
        mode: cfg.mode,
        oracle_states: oracle.lts.state_count(),
        oracle_transitions: oracle.lts.transition_count(),
        verdict: &verdict,
        events_checked: session.steps_checked(),
        total_events: total,
        synth_time: oracle.synth_time,
        check_time,
    };
    let text = summary.render();
    let _ = out.write_all(text.as_bytes());
    if let Some(p) = a.report.as_ref().or(cfg.report_path.as_ref()) {
        fs::write(p, &text).map_err(|e| CliError::io(format!("cannot write {}", p.display()), e))?;
    }
    if let Some(p) = &a.csv {
        append_csv(p, &summary.csv_row()).map_err(|e| CliError::io(format!("cannot write {}", p.display()), e))?;
    }
    Ok(if verdict.is_pass() { 0 } else { 1 })
}

fn listen(a: ListenArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let mut cfg = load_config(&a.config)?;
    if let Some(m) = a.mode {
        cfg.mode = m;
    }
    let Input::Listen { protocol, host, port } = cfg.input.clone() else {
        return Err(CliError::Usage("the config has no `listen` input".into()));
    };
    let port = a.port.unwrap_or(port);
    let (oracle, mapping) = oracle_and_mapping(&cfg)?;
    let sink = match &cfg.report_path {
        Some(p) => {
            let f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(p)
                .map_err(|e| CliError::io(format!("cannot open {}", p.display()), e))?;
            SummarySink::File(Arc::new(Mutex::new(f)))
        }
        None => SummarySink::Stderr,
    };
    let addr = format!("{host}:{port}");
    let server = Server::bind(&addr, protocol, oracle.lts.clone(), cfg.mode, mapping, sink)
        .map_err(|e| CliError::io(format!("cannot bind {addr}"), e))?;
    let local = server.local_addr().map_err(|e| CliError::io("cannot bind", e))?;
    let _ = writeln!(out, "listening on {local} ({protocol}, {} mode)", cfg.mode);
    let _ = out.flush();
    let _ = err.flush();
    if a.once {
        let v = server.run_once().map_err(|e| CliError::io("connection failed", e))?;
        Ok(if v.is_pass() { 0 } else { 1 })
    } else {
        server.run().map_err(|e| CliError::io("accept failed", e))?;
        Ok(0)
    }
}

fn model_config(a: &ModelArgs) -> Result<Config, CliError> {
    if let Some(p) = &a.config {
        return Ok(load_config(p)?);
    }
    let (Some(spec), Some(entry)) = (&a.spec, &a.entry) else {
        return Err(CliError::Usage("pass --config, or --spec and --entry".into()));
    };
    Ok(Config {
        spec_path: spec.clone(),
        entry_process: entry.clone(),
        mode: Mode::default(),
        observable_events: a.observable.clone(),
        mapping_path: None,
        input: Input::TraceFile(PathBuf::new()),
        limits: SynthesisLimits::default(),
        report_path: None,
    })
}

fn synth(a: ModelArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = model_config(&a)?;
    let oracle = build_oracle(&request(&cfg))?;
    let raw = &oracle.synthesized;
    let _ = writeln!(out, "states {}", raw.state_count());
    let _ = writeln!(out, "transitions {}", raw.transition_count());
    let _ = writeln!(
        out,
        "oracle {} states, {} transitions",
        oracle.lts.state_count(),
        oracle.lts.transition_count()
    );
    let _ = writeln!(out, "synthesis time {:.6}s", oracle.synth_time.as_secs_f64());
    if let Some(p) = &a.export {
        fs::write(p, raw.dump()).map_err(|e| CliError::io(format!("cannot write {}", p.display()), e))?;
    }
    Ok(0)
}

fn detcheck(a: ModelArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = model_config(&a)?;
    let gated = gate(&request(&cfg))?;
    if let Some(p) = &a.export {
        fs::write(p, gated.hidden.dump()).map_err(|e| CliError::io(format!("cannot write {}", p.display()), e))?;
    }
    match gated.witness {
        None => {
            let _ = writeln!(out, "deterministic");
            Ok(0)
        }
        Some(w) => Err(CliError::Nondeterministic(w)),
    }
}

fn bench(a: BenchArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let plan = BenchPlan {
        model_sizes: a.sizes,
        trace_lengths: a.lengths,
        repetitions: a.reps,
        seed: a.seed,
        output: a.out.clone(),
    };
    let rows = run_bench(&plan).map_err(|e| CliError::Usage(e.to_string()))?;
    if a.out.is_none() {
        let mut w = csv::Writer::from_writer(out);
        for r in &rows {
            w.serialize(r).map_err(|e| CliError::Usage(e.to_string()))?;
        }
        let _ = w.flush();
    }
    Ok(0)
}
