//! CSV export of peeling traces and hull series.
//!
//! Each file starts with a `#schema=<name>/<version>` line, then a header.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{HullRecord, HullSeries, StepRecord};
use crate::error::{Error, Result};
use crate::params::{Side, Transition};

pub const TRACE_SCHEMA: &str = "peel-trace/1";
pub const HULL_SCHEMA: &str = "hull-series/1";

#[derive(Serialize, Deserialize)]
struct TraceRow {
    step: u64,
    edge: u32,
    event: String,
    k: usize,
    delta_p: i64,
    delta_v: u64,
    filler_seed: u64,
    perimeter: u64,
    volume: u64,
}

fn event_name(t: Transition) -> (&'static str, usize) {
    match t {
        Transition::Fresh => ("fresh", 0),
        Transition::Swallow { side: Side::Left, k } => ("left", k),
        Transition::Swallow { side: Side::Right, k } => ("right", k),
    }
}

fn schema_line<W: Write>(w: &mut W, schema: &str) -> Result<()> {
    writeln!(w, "#schema={schema}")?;
    Ok(())
}

fn check_schema<R: BufRead>(r: &mut R, schema: &str) -> Result<()> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let got = line.trim_end().strip_prefix("#schema=").unwrap_or("");
    if got != schema {
        return Err(Error::Parse(format!("expected schema {schema}, found `{}`", line.trim_end())));
    }
    Ok(())
}

pub fn write_trace_csv<W: Write>(mut w: W, records: &[StepRecord]) -> Result<()> {
    schema_line(&mut w, TRACE_SCHEMA)?;
    let mut cw = csv::Writer::from_writer(w);
    for r in records {
        let (event, k) = event_name(r.transition);
        cw.serialize(TraceRow {
            step: r.step,
            edge: r.edge,
            event: event.into(),
            k,
            delta_p: r.delta_p,
            delta_v: r.delta_v,
            filler_seed: r.filler_seed,
            perimeter: r.perimeter,
            volume: r.volume,
        })?;
    }
    cw.flush()?;
    Ok(())
}

pub fn read_trace_csv<R: BufRead>(mut r: R) -> Result<Vec<StepRecord>> {
    check_schema(&mut r, TRACE_SCHEMA)?;
    let mut cr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for row in cr.deserialize() {
        let row: TraceRow = row?;
        let transition = match row.event.as_str() {
            "fresh" => Transition::Fresh,
            "left" => Transition::Swallow { side: Side::Left, k: row.k },
            "right" => Transition::Swallow { side: Side::Right, k: row.k },
            other => return Err(Error::Parse(format!("unknown event `{other}`"))),
        };
        out.push(StepRecord {
            step: row.step,
            edge: row.edge,
            transition,
            delta_p: row.delta_p,
            delta_v: row.delta_v,
            filler_seed: row.filler_seed,
            perimeter: row.perimeter,
            volume: row.volume,
        });
    }
    Ok(out)
}

pub fn write_hull_csv<W: Write>(mut w: W, series: &HullSeries) -> Result<()> {
    schema_line(&mut w, HULL_SCHEMA)?;
    writeln!(w, "#truncated={}", series.truncated)?;
    let mut cw = csv::Writer::from_writer(w);
    for h in &series.records {
        cw.serialize(h)?;
    }
    cw.flush()?;
    Ok(())
}

pub fn read_hull_csv<R: BufRead>(mut r: R) -> Result<HullSeries> {
    check_schema(&mut r, HULL_SCHEMA)?;
    let mut line = String::new();
    r.read_line(&mut line)?;
    let truncated = match line.trim_end() {
        "#truncated=true" => true,
        "#truncated=false" => false,
        other => return Err(Error::Parse(format!("bad truncation line `{other}`"))),
    };
    let mut cr = csv::Reader::from_reader(r);
    let records = cr.deserialize::<HullRecord>().collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(HullSeries { records, truncated })
}
