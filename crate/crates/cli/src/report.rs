//! Human-readable reports, CSV timing rows and wire payloads.
//!
//! Everything except the `time:` line is a function of the inputs, so two
//! runs on the same inputs differ only on that line.

use std::fmt::Write as _;
use std::fs::OpenOptions;
use std::io;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;

use cspmon_core::{Mode, Verdict};

#[derive(Debug, Clone)]
pub struct CheckSummary<'a> {
    pub spec: &'a str,
    pub entry: &'a str,
    pub mode: Mode,
    pub oracle_states: usize,
    pub oracle_transitions: usize,
    pub verdict: &'a Verdict,
    pub events_checked: usize,
    pub total_events: usize,
    pub synth_time: Duration,
    pub check_time: Duration,
}

impl CheckSummary<'_> {
    pub fn total_time(&self) -> Duration {
        self.synth_time + self.check_time
    }

    pub fn mean_event_time(&self) -> Duration {
        if self.events_checked == 0 {
            Duration::ZERO
        } else {
            self.check_time / self.events_checked as u32
        }
    }

    pub fn verdict_word(&self) -> &'static str {
        if self.verdict.is_pass() {
            "pass"
        } else {
            "fail"
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "spec: {}", self.spec);
        let _ = writeln!(out, "entry: {}", self.entry);
        let _ = writeln!(out, "mode: {}", self.mode);
        let _ = writeln!(
            out,
            "oracle: {} states, {} transitions",
            self.oracle_states, self.oracle_transitions
        );
        let _ = writeln!(out, "events checked: {}/{}", self.events_checked, self.total_events);
        let _ = writeln!(out, "verdict: {}", self.verdict_word());
        if let Some(f) = self.verdict.failure() {
            let _ = writeln!(out, "failing event: {} (event {})", f.event, f.index + 1);
            let _ = writeln!(out, "{}", f.counterexample);
        }
        let _ = writeln!(
            out,
            "time: total {:.6}s, synthesis {:.6}s, checking {:.6}s, mean/event {:.9}s",
            self.total_time().as_secs_f64(),
            self.synth_time.as_secs_f64(),
            self.check_time.as_secs_f64(),
            self.mean_event_time().as_secs_f64()
        );
        out
    }

    pub fn csv_row(&self) -> CsvRow {
        CsvRow {
            total_s: self.total_time().as_secs_f64(),
            synth_s: self.synth_time.as_secs_f64(),
            check_s: self.check_time.as_secs_f64(),
            mean_event_s: self.mean_event_time().as_secs_f64(),
            events_checked: self.events_checked,
            total_events: self.total_events,
            verdict: self.verdict_word(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CsvRow {
    pub total_s: f64,
    pub synth_s: f64,
    pub check_s: f64,
    pub mean_event_s: f64,
    pub events_checked: usize,
    pub total_events: usize,
    pub verdict: &'static str,
}

/// Appends one row, writing the header first when the file is new or empty.
pub fn append_csv(path: &Path, row: &CsvRow) -> io::Result<()> {
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let fresh = file.metadata()?.len() == 0;
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    w.serialize(row)?;
    w.flush()
}

#[derive(Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
enum Reply {
    Pass,
    Fail {
        failing_event: String,
        acceptable: Vec<String>,
        trace_len: usize,
    },
}

/// One NDJSON reply for a step verdict, without the trailing newline.
pub fn verdict_json(v: &Verdict) -> String {
    let reply = match v.failure() {
        None => Reply::Pass,
        Some(f) => Reply::Fail {
            failing_event: f.event.to_string(),
            acceptable: f.counterexample.acceptable.iter().map(ToString::to_string).collect(),
            trace_len: f.counterexample.failing_trace.len(),
        },
    };
    serde_json::to_string(&reply).expect("reply serializes")
}

pub fn error_json(message: &str) -> String {
    serde_json::json!({ "error": message }).to_string()
}
