//! File formats: `trace.csv`, `metrics.json` and `sweep.csv`.
//!
//! Trace columns, in order: `t`, `delta_1..delta_K`, `q_1..q_K`, `b`,
//! `total_power`, `objective`, `evaluations`, `infeasible`. `b` is a string
//! of `K` digits, sensor 1 first. Floats are written in shortest
//! round-trip form, so reading a trace back gives identical values.
//!
//! Sweep columns: `param`, `value`, `seed`, `avg_total_power`,
//! `avg_queue_sum`, `max_aoi`, `theorem_b`, `evaluations`, `infeasible`,
//! `avg_aoi_1..avg_aoi_K`, `tail_avg_aoi_1..tail_avg_aoi_K`.
//!
//! The layouts are versioned by [`crate::sim::SCHEMA_VERSION`], which is
//! also stored in `metrics.json`.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sim::{RunMetrics, TraceRecord};
use crate::sweep::SweepRow;

pub fn trace_header(sensors: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=sensors).map(|k| format!("delta_{k}")));
    h.extend((1..=sensors).map(|k| format!("q_{k}")));
    h.extend(
        ["b", "total_power", "objective", "evaluations", "infeasible"]
            .iter()
            .map(|s| s.to_string()),
    );
    h
}

fn bits(sampling: &[bool]) -> String {
    sampling.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Streaming trace writer.
pub struct TraceWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(writer: W, sensors: usize) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(writer);
        inner.write_record(trace_header(sensors))?;
        Ok(TraceWriter { inner })
    }

    pub fn write(&mut self, rec: &TraceRecord) -> Result<()> {
        let mut row = Vec::with_capacity(6 + 2 * rec.aoi.len());
        row.push(rec.t.to_string());
        row.extend(rec.aoi.iter().map(u32::to_string));
        row.extend(rec.queues.iter().map(f64::to_string));
        row.push(bits(&rec.sampling));
        row.push(rec.total_power.to_string());
        row.push(rec.objective.to_string());
        row.push(rec.evaluations.to_string());
        row.push(rec.infeasible.to_string());
        self.inner.write_record(&row)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

pub fn write_trace_csv(path: impl AsRef<Path>, trace: &[TraceRecord]) -> Result<()> {
    let sensors = trace.first().map_or(0, |r| r.aoi.len());
    let mut w = TraceWriter::new(std::fs::File::create(path)?, sensors)?;
    for rec in trace {
        w.write(rec)?;
    }
    w.finish()
}

fn parse<T: std::str::FromStr>(field: &str, what: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::config(format!("bad {what} value {field:?} in trace")))
}

pub fn read_trace<R: Read>(reader: R) -> Result<Vec<TraceRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let width = rdr.headers()?.len();
    if width < 6 || (width - 6) % 2 != 0 {
        return Err(Error::config(format!("trace has {width} columns")));
    }
    let k = (width - 6) / 2;
    if rdr.headers()?.iter().collect::<Vec<_>>() != trace_header(k) {
        return Err(Error::config("unexpected trace header"));
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let f = |i: usize| row.get(i).unwrap_or_default();
        out.push(TraceRecord {
            t: parse(f(0), "t")?,
            aoi: (1..=k).map(|i| parse(f(i), "delta")).collect::<Result<_>>()?,
            queues: (k + 1..=2 * k).map(|i| parse(f(i), "q")).collect::<Result<_>>()?,
            sampling: f(2 * k + 1).chars().map(|c| c == '1').collect(),
            total_power: parse(f(2 * k + 2), "total_power")?,
            objective: parse(f(2 * k + 3), "objective")?,
            evaluations: parse(f(2 * k + 4), "evaluations")?,
            infeasible: parse(f(2 * k + 5), "infeasible")?,
        });
    }
    Ok(out)
}

pub fn read_trace_csv(path: impl AsRef<Path>) -> Result<Vec<TraceRecord>> {
    read_trace(std::fs::File::open(path)?)
}

pub fn write_metrics_json(path: impl AsRef<Path>, metrics: &RunMetrics) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, metrics)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn write_sweep<W: Write>(writer: W, rows: &[SweepRow]) -> Result<()> {
    let sensors = rows.first().map_or(0, |r| r.metrics.avg_aoi.len());
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = [
        "param",
        "value",
        "seed",
        "avg_total_power",
        "avg_queue_sum",
        "max_aoi",
        "theorem_b",
        "evaluations",
        "infeasible",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((1..=sensors).map(|k| format!("avg_aoi_{k}")));
    header.extend((1..=sensors).map(|k| format!("tail_avg_aoi_{k}")));
    w.write_record(&header)?;
    for r in rows {
        let m = &r.metrics;
        let mut row = vec![
            r.param.to_string(),
            r.value.to_string(),
            r.seed.to_string(),
            m.avg_total_power.to_string(),
            m.avg_queue_sum.to_string(),
            m.max_aoi.to_string(),
            m.theorem_b.to_string(),
            m.evaluations.to_string(),
            m.infeasible.to_string(),
        ];
        row.extend(m.avg_aoi.iter().map(f64::to_string));
        row.extend(m.tail_avg_aoi.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv(path: impl AsRef<Path>, rows: &[SweepRow]) -> Result<()> {
    write_sweep(std::fs::File::create(path)?, rows)
}
