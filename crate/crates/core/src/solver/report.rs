//! CSV export of solver traces.

use std::io::Write;

use serde::Serialize;

use super::alternating::RfiResult;
use crate::error::Result;

#[derive(Serialize)]
struct ReportRow {
    iteration: usize,
    objective: f64,
    step1_ms: f64,
    step2_ms: f64,
}

/// `iteration,objective,step1_ms,step2_ms`, one row per outer iteration.
pub fn write_report<W: Write>(result: &RfiResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in &result.trace {
        w.serialize(ReportRow {
            iteration: r.iteration,
            objective: r.objective,
            step1_ms: r.step1_ms,
            step2_ms: r.step2_ms,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// `t,phase,inner_iters,wall_ms,objective`, one row per phase of the
/// reduced-complexity solver. Writes only the header for other solvers.
pub fn write_phases<W: Write>(result: &RfiResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if result.phases.is_empty() {
        w.write_record(["t", "phase", "inner_iters", "wall_ms", "objective"])?;
    }
    for p in &result.phases {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}
