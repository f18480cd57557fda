//! CSV rendering of regret traces.

use std::io::Write;

use crate::error::{Error, Result};

use super::run::{RegretTrace, RunLabel};

pub const TRACE_HEADER: &str = "step,cum_regret,alg,env,seed,rep";

/// Decimal rendering with 12 significant digits, trailing zeros trimmed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let exponent: i32 = sci
        .split('e')
        .nth(1)
        .and_then(|e| e.parse().ok())
        .unwrap_or(0);
    let decimals = (11 - exponent).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

fn check_field(field: &str) -> Result<()> {
    if field.contains([',', '\n', '\r', '"']) {
        return Err(Error::InvalidParameter(format!(
            "label '{field}' cannot be written to CSV"
        )));
    }
    Ok(())
}

/// Writes the header followed by one row per step of every trace, in order.
pub fn write_traces<W: Write>(out: &mut W, traces: &[RegretTrace]) -> Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for trace in traces {
        let l = &trace.label;
        check_field(&l.alg)?;
        check_field(&l.env)?;
        for (i, v) in trace.cum_regret.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                i + 1,
                format_sig(*v),
                l.alg,
                l.env,
                l.seed,
                l.rep
            )?;
        }
    }
    Ok(())
}

pub fn traces_to_csv(traces: &[RegretTrace]) -> Result<String> {
    let mut buf = Vec::new();
    write_traces(&mut buf, traces)?;
    Ok(String::from_utf8(buf).expect("CSV output is ASCII"))
}

/// Parses trace CSV back into traces, grouping consecutive rows that share a
/// label.
pub fn parse_traces(text: &str) -> Result<Vec<RegretTrace>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == TRACE_HEADER => {}
        other => {
            return Err(Error::InvalidParameter(format!(
                "expected header '{TRACE_HEADER}', found {other:?}"
            )))
        }
    }
    let mut traces: Vec<RegretTrace> = Vec::new();
    for (n, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Error::InvalidParameter(format!("malformed CSV row {}: '{line}'", n + 2));
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(bad());
        }
        let step: usize = fields[0].parse().map_err(|_| bad())?;
        let value: f64 = fields[1].parse().map_err(|_| bad())?;
        let label = RunLabel::new(
            fields[2],
            fields[3],
            fields[4].parse().map_err(|_| bad())?,
            fields[5].parse().map_err(|_| bad())?,
        );
        let continues = traces
            .last()
            .is_some_and(|t| t.label == label && t.len() + 1 == step);
        if continues {
            traces.last_mut().unwrap().cum_regret.push(value);
        } else if step == 1 {
            traces.push(RegretTrace {
                label,
                cum_regret: vec![value],
            });
        } else {
            return Err(bad());
        }
    }
    Ok(traces)
}
