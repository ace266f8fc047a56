//! Newton iterations for `X(p) = 0` on the sphere.
//!
//! [`nm_solve`] is the local method: `p_{k+1} = exp_{p_k}(-V_k^{-1} X(p_k))`
//! with no safeguards. [`gnm_solve`] globalizes it with the merit
//! `phi = ||X||^2 / 2`, a gradient fallback when the Newton system cannot be
//! solved, and a nonmonotone Armijo search whose reference is the largest of
//! the last `m_k + 1` merit values.

mod config;
mod direction;
mod line_search;
mod trace;

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use config::SolverConfig;
pub use direction::{
    merit, merit_gradient, newton_direction, Direction, DirectionError, DirectionKind,
    ZERO_DIRECTION_TOL,
};
pub use line_search::{
    line_search, memory_index, nonmonotone_reference, LineSearchError, LineSearchOutcome,
};
pub use trace::{
    read_trace_jsonl, verify_certificates, CertificateViolation, IterLine, IterRecord, JsonlRecord,
    SolveStatus, SolveTrace, StepRecord, TerminalLine,
};

use crate::error::{check_dim, Result};
use crate::field::VectorField;
use crate::geometry::{exp_raw, SpherePoint};
use direction::direction_from;

/// Which driver to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Globalized Newton with nonmonotone memory `depth`.
    Gnm { depth: usize },
    /// Pure local Newton.
    Nm,
}

impl Method {
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Gnm { depth } => write!(f, "GNM(M={depth})"),
            Method::Nm => f.write_str("NM"),
        }
    }
}

/// Runs `method`; for `Gnm` the depth overrides `cfg.nonmonotone_depth`.
pub fn solve<F: VectorField + ?Sized>(
    field: &F,
    p0: &SpherePoint,
    method: Method,
    cfg: &SolverConfig,
) -> Result<SolveTrace> {
    match method {
        Method::Nm => nm_solve(field, p0, cfg),
        Method::Gnm { depth } => gnm_solve(field, p0, &cfg.clone().with_depth(depth)),
    }
}

/// Local Newton method. Every step has `alpha = 1`; a Newton system that is
/// not acceptably solvable ends the run with `SingularClarkeElement`.
pub fn nm_solve<F: VectorField + ?Sized>(
    field: &F,
    p0: &SpherePoint,
    cfg: &SolverConfig,
) -> Result<SolveTrace> {
    run(field, p0, cfg, false)
}

/// Globalized Newton method with nonmonotone line search.
pub fn gnm_solve<F: VectorField + ?Sized>(
    field: &F,
    p0: &SpherePoint,
    cfg: &SolverConfig,
) -> Result<SolveTrace> {
    run(field, p0, cfg, true)
}

fn run<F: VectorField + ?Sized>(
    field: &F,
    p0: &SpherePoint,
    cfg: &SolverConfig,
    globalized: bool,
) -> Result<SolveTrace> {
    cfg.validate()?;
    check_dim(field.dim(), p0.dim())?;
    let start = Instant::now();
    let depth = if globalized { cfg.nonmonotone_depth } else { 0 };

    let mut p = p0.clone();
    let mut x = field.eval(&p)?;
    let mut merits = vec![0.5 * x.coords().norm_squared()];
    let mut records = Vec::new();

    let status = loop {
        let k = records.len();
        let residual = x.norm();
        let m_k = memory_index(k, depth);
        let mut record = IterRecord {
            k,
            residual,
            merit: merits[k],
            m_k,
            step: None,
        };
        if residual < cfg.tol_residual {
            records.push(record);
            break SolveStatus::Singularity;
        }
        if k >= cfg.max_iters {
            records.push(record);
            break SolveStatus::MaxIters;
        }
        let elem = field.clarke_element(&p)?;
        let dir = match direction_from(&x, &elem, cfg, globalized) {
            Ok(d) => d,
            Err(DirectionError::ZeroDirection) => {
                records.push(record);
                break SolveStatus::StationaryPoint;
            }
            Err(DirectionError::SingularClarkeElement) => {
                records.push(record);
                break SolveStatus::SingularClarkeElement;
            }
            Err(DirectionError::Field(e)) => return Err(e),
        };
        let reference = nonmonotone_reference(&merits, k, depth);
        let (alpha, backtracks, next_p, next_x, next_merit) = if globalized {
            match line_search(field, &p, &dir, reference, cfg) {
                Ok(out) => (out.alpha, out.backtracks, out.point, out.value, out.merit),
                Err(LineSearchError::Field(e)) => return Err(e),
                Err(LineSearchError::NotDescent(_) | LineSearchError::Stall(_)) => {
                    records.push(record);
                    break SolveStatus::LineSearchStall;
                }
            }
        } else {
            let q = exp_raw(&p, dir.vector.coords());
            let xq = field.eval(&q)?;
            let mq = 0.5 * xq.coords().norm_squared();
            (1.0, 0, q, xq, mq)
        };
        record.step = Some(StepRecord {
            alpha,
            backtracks,
            kind: dir.kind,
            slope: dir.slope,
            reference,
        });
        records.push(record);
        p = next_p;
        x = next_x;
        merits.push(next_merit);
    };

    Ok(SolveTrace {
        records,
        status,
        final_point: p,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
