//! CSV emission for simulation traces.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::engine::SimTrace;

pub const TRACE_HEADER: &str = "t,defender_id,x,y,ux,uy,paired_with,h,clamped";
pub const DIAGNOSTICS_HEADER: &str = "t,cost,pairs,dropped,clamped,infeasible";

/// Fixed six-decimal formatting without a `-0.000000`.
pub fn fmt6(v: f64) -> String {
    let s = format!("{v:.6}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_owned()
    } else {
        s
    }
}

/// One row per defender per step, ordered by time then defender id.
pub fn write_trace_to<W: Write>(trace: &SimTrace, mut out: W) -> io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for rec in &trace.records {
        for (i, (p, u)) in rec.positions.iter().zip(&rec.u).enumerate() {
            let (paired, h) = match rec.pair_for(i) {
                Some(pr) => (pr.attacker.to_string(), fmt6(pr.h)),
                None => (String::new(), String::new()),
            };
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                fmt6(rec.t),
                i + 1,
                fmt6(p.x),
                fmt6(p.y),
                fmt6(u.x),
                fmt6(u.y),
                paired,
                h,
                u8::from(rec.clamped[i]),
            )?;
        }
    }
    out.flush()
}

pub fn write_trace(trace: &SimTrace, path: impl AsRef<Path>) -> io::Result<()> {
    write_trace_to(trace, BufWriter::new(File::create(path)?))
}

/// Per-step summary: coverage cost and flag counts.
pub fn write_diagnostics_to<W: Write>(trace: &SimTrace, mut out: W) -> io::Result<()> {
    writeln!(out, "{DIAGNOSTICS_HEADER}")?;
    for rec in &trace.records {
        let count = |flags: &[bool]| flags.iter().filter(|f| **f).count();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt6(rec.t),
            fmt6(rec.cost),
            rec.pairs.len(),
            rec.dropped.len(),
            count(&rec.clamped),
            count(&rec.infeasible),
        )?;
    }
    out.flush()
}

pub fn write_diagnostics(trace: &SimTrace, path: impl AsRef<Path>) -> io::Result<()> {
    write_diagnostics_to(trace, BufWriter::new(File::create(path)?))
}
