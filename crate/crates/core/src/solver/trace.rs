//! Per-iteration solve records, their JSON-lines form, and an independent
//! re-check of the line-search acceptance certificates.

use std::fmt;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use super::DirectionKind;
use crate::geometry::SpherePoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// `||X(p_K)|| < tol_residual`.
    Singularity,
    /// The search direction vanished away from a singularity.
    StationaryPoint,
    MaxIters,
    LineSearchStall,
    /// Pure Newton only: the Newton system was not acceptably solvable.
    SingularClarkeElement,
}

impl SolveStatus {
    pub fn is_solved(self) -> bool {
        self == SolveStatus::Singularity
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Singularity => "singularity",
            SolveStatus::StationaryPoint => "stationary_point",
            SolveStatus::MaxIters => "max_iters",
            SolveStatus::LineSearchStall => "line_search_stall",
            SolveStatus::SingularClarkeElement => "singular_clarke_element",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The step taken from `p_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub alpha: f64,
    pub backtracks: usize,
    pub kind: DirectionKind,
    /// `phi'(p_k)^T v_k`.
    pub slope: f64,
    /// Nonmonotone reference value the step was tested against.
    pub reference: f64,
}

/// State at `p_k`, plus the step leaving it (absent on the last record).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterRecord {
    pub k: usize,
    pub residual: f64,
    pub merit: f64,
    pub m_k: usize,
    pub step: Option<StepRecord>,
}

#[derive(Debug, Clone)]
pub struct SolveTrace {
    pub records: Vec<IterRecord>,
    pub status: SolveStatus,
    pub final_point: SpherePoint,
    pub wall_time_s: f64,
}

impl SolveTrace {
    /// Number of steps taken.
    pub fn iterations(&self) -> usize {
        self.records.iter().filter(|r| r.step.is_some()).count()
    }

    pub fn final_residual(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.residual)
    }

    /// Equality of everything except wall time.
    pub fn same_run(&self, other: &SolveTrace) -> bool {
        self.records == other.records
            && self.status == other.status
            && self.final_point == other.final_point
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for r in &self.records {
            let line = JsonlRecord::Iter(IterLine::from(r));
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        let terminal = JsonlRecord::Terminal(TerminalLine {
            status: self.status,
            iters: self.iterations(),
            wall_time_s: self.wall_time_s,
        });
        serde_json::to_writer(&mut out, &terminal)?;
        out.write_all(b"\n")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterLine {
    pub k: usize,
    pub res: f64,
    pub merit: f64,
    pub alpha: Option<f64>,
    pub backtracks: Option<usize>,
    pub kind: Option<DirectionKind>,
    pub m_k: usize,
    pub slope: Option<f64>,
    pub reference: Option<f64>,
}

impl From<&IterRecord> for IterLine {
    fn from(r: &IterRecord) -> Self {
        Self {
            k: r.k,
            res: r.residual,
            merit: r.merit,
            alpha: r.step.map(|s| s.alpha),
            backtracks: r.step.map(|s| s.backtracks),
            kind: r.step.map(|s| s.kind),
            m_k: r.m_k,
            slope: r.step.map(|s| s.slope),
            reference: r.step.map(|s| s.reference),
        }
    }
}

impl IterLine {
    pub fn to_record(&self) -> Option<IterRecord> {
        let step = match (
            self.alpha,
            self.backtracks,
            self.kind,
            self.slope,
            self.reference,
        ) {
            (Some(alpha), Some(backtracks), Some(kind), Some(slope), Some(reference)) => {
                Some(StepRecord {
                    alpha,
                    backtracks,
                    kind,
                    slope,
                    reference,
                })
            }
            (None, None, None, None, None) => None,
            _ => return None,
        };
        Some(IterRecord {
            k: self.k,
            residual: self.res,
            merit: self.merit,
            m_k: self.m_k,
            step,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerminalLine {
    pub status: SolveStatus,
    pub iters: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonlRecord {
    Iter(IterLine),
    Terminal(TerminalLine),
}

/// Parses a trace written by [`SolveTrace::write_jsonl`].
pub fn read_trace_jsonl<R: BufRead>(input: R) -> io::Result<(Vec<IterRecord>, TerminalLine)> {
    let mut records = Vec::new();
    let mut terminal = None;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if terminal.is_some() {
            return Err(invalid("record after terminal line"));
        }
        match serde_json::from_str::<JsonlRecord>(&line)? {
            JsonlRecord::Iter(it) => records.push(
                it.to_record()
                    .ok_or_else(|| invalid("partial step fields"))?,
            ),
            JsonlRecord::Terminal(t) => terminal = Some(t),
        }
    }
    let terminal = terminal.ok_or_else(|| invalid("missing terminal line"))?;
    Ok((records, terminal))
}

fn invalid(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.to_owned())
}

/// A failed acceptance check at iteration `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateViolation {
    pub k: usize,
    pub what: String,
}

/// Re-verifies from records alone: the memory rule `m_k = min(m_{k-1}+1, M)`
/// with `m_0 = 0`, the recorded reference, negative slopes, and the acceptance
/// inequality `phi(p_{k+1}) <= max_{j<=m_k} phi(p_{k-j}) + sigma alpha_k slope_k`.
/// Pure Newton traces are checked with `unit_steps = true`, which replaces the
/// acceptance test by `alpha_k = 1`.
pub fn verify_certificates(
    records: &[IterRecord],
    sigma: f64,
    depth: usize,
    unit_steps: bool,
) -> Vec<CertificateViolation> {
    let mut out = Vec::new();
    let mut flag = |k: usize, what: String| out.push(CertificateViolation { k, what });
    let mut prev_m: Option<usize> = None;
    for (idx, r) in records.iter().enumerate() {
        if r.k != idx {
            flag(idx, format!("record index {} out of sequence", r.k));
        }
        let expected_m = match prev_m {
            None => 0,
            Some(m) => (m + 1).min(depth),
        };
        if !unit_steps && r.m_k != expected_m {
            flag(idx, format!("m_k = {} but rule gives {expected_m}", r.m_k));
        }
        prev_m = Some(r.m_k);
        let Some(step) = r.step else {
            if idx + 1 != records.len() {
                flag(idx, "missing step before the last record".into());
            }
            continue;
        };
        if !(step.slope < 0.0) {
            flag(idx, format!("slope {} is not negative", step.slope));
        }
        let Some(next) = records.get(idx + 1) else {
            flag(idx, "step without a successor record".into());
            continue;
        };
        if unit_steps {
            if step.alpha != 1.0 {
                flag(idx, format!("pure Newton step with alpha {}", step.alpha));
            }
            continue;
        }
        let lo = idx.saturating_sub(r.m_k);
        let reference = records[lo..=idx]
            .iter()
            .map(|q| q.merit)
            .fold(f64::NEG_INFINITY, f64::max);
        if reference != step.reference {
            flag(
                idx,
                format!("recorded reference {} != {}", step.reference, reference),
            );
        }
        let bound = reference + sigma * step.alpha * step.slope;
        if !(next.merit <= bound) {
            flag(
                idx,
                format!("phi(p_k+1) = {} exceeds {}", next.merit, bound),
            );
        }
    }
    out
}
