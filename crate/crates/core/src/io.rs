//! CSV and JSON formats.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which parses
//! back to the identical `f64`.

use std::io::{Read, Write};

use crate::agents::{AgentEnsemble, FitRecord, HistogramEstimate};
use crate::error::{Error, Result};
use crate::grid::{Density, Grid};
use crate::operator::IterationReport;

pub const DENSITY_HEADER: [&str; 2] = ["x", "density"];
pub const REPORT_HEADER: [&str; 6] = [
    "step",
    "norm",
    "mean",
    "mass_defect",
    "dist_to_target",
    "step_delta",
];
pub const ENSEMBLE_HEADER: [&str; 2] = ["agent_id", "money"];
pub const HISTOGRAM_HEADER: [&str; 3] = ["bin_left", "bin_right", "density"];

/// Relative tolerance on node positions read from foreign files.
const NODE_TOLERANCE: f64 = 1e-9;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(field: &str, line: usize, what: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|e| Error::Parse {
        line,
        message: format!("{what}: {e}"),
    })
}

fn parse_usize(field: &str, line: usize, what: &str) -> Result<usize> {
    field.trim().parse::<usize>().map_err(|e| Error::Parse {
        line,
        message: format!("{what}: {e}"),
    })
}

fn reader<R: Read>(input: R, header: &[&str]) -> Result<csv::Reader<R>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(input);
    let found = rdr.headers()?.clone();
    if found.iter().map(str::trim).ne(header.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header `{}`, found `{}`",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    Ok(rdr)
}

fn record_line(rec: &csv::StringRecord, fallback: usize) -> usize {
    rec.position().map_or(fallback, |p| p.line() as usize)
}

pub fn write_density<W: Write>(y: &Density, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DENSITY_HEADER)?;
    for (x, v) in y.grid().nodes().zip(y.values()) {
        w.write_record([fmt_f64(x), fmt_f64(*v)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a density; the grid is reconstructed from the node column, which
/// must be uniform and start at 0.
pub fn read_density<R: Read>(input: R) -> Result<Density> {
    let mut rdr = reader(input, &DENSITY_HEADER)?;
    let mut xs = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = record_line(&rec, i + 2);
        xs.push(parse_f64(&rec[0], line, "x")?);
        values.push(parse_f64(&rec[1], line, "density")?);
    }
    let n = xs.len();
    let x_max = *xs.last().ok_or(Error::Parse {
        line: 1,
        message: "no data rows".into(),
    })?;
    let grid = Grid::new(n, x_max)?;
    for (i, &x) in xs.iter().enumerate() {
        if !((x - grid.node(i)).abs() <= NODE_TOLERANCE * x_max) {
            return Err(Error::Parse {
                line: i + 2,
                message: format!("node {x} is off the uniform grid (expected {})", grid.node(i)),
            });
        }
    }
    Density::new(grid, values)
}

pub fn write_reports<W: Write>(reports: &[IterationReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_HEADER)?;
    for r in reports {
        w.write_record([
            r.step.to_string(),
            fmt_f64(r.norm),
            fmt_f64(r.mean),
            fmt_f64(r.mass_defect),
            fmt_f64(r.dist_to_target),
            fmt_f64(r.step_delta),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_reports<R: Read>(input: R) -> Result<Vec<IterationReport>> {
    let mut rdr = reader(input, &REPORT_HEADER)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = record_line(&rec, i + 2);
        out.push(IterationReport {
            step: parse_usize(&rec[0], line, "step")?,
            norm: parse_f64(&rec[1], line, "norm")?,
            mean: parse_f64(&rec[2], line, "mean")?,
            mass_defect: parse_f64(&rec[3], line, "mass_defect")?,
            dist_to_target: parse_f64(&rec[4], line, "dist_to_target")?,
            step_delta: parse_f64(&rec[5], line, "step_delta")?,
        });
    }
    Ok(out)
}

pub fn write_ensemble<W: Write>(ens: &AgentEnsemble, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ENSEMBLE_HEADER)?;
    for (i, m) in ens.money().iter().enumerate() {
        w.write_record([i.to_string(), fmt_f64(*m)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an ensemble snapshot; agent ids must be `0, 1, 2, …` in order.
pub fn read_ensemble_money<R: Read>(input: R) -> Result<Vec<f64>> {
    let mut rdr = reader(input, &ENSEMBLE_HEADER)?;
    let mut money = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = record_line(&rec, i + 2);
        let id = parse_usize(&rec[0], line, "agent_id")?;
        if id != i {
            return Err(Error::Parse {
                line,
                message: format!("agent_id {id} out of sequence (expected {i})"),
            });
        }
        let m = parse_f64(&rec[1], line, "money")?;
        if !(m.is_finite() && m >= 0.0) {
            return Err(Error::Parse {
                line,
                message: format!("money {m} must be finite and >= 0"),
            });
        }
        money.push(m);
    }
    Ok(money)
}

pub fn write_histogram<W: Write>(hist: &HistogramEstimate, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HISTOGRAM_HEADER)?;
    for (b, d) in hist.densities.iter().enumerate() {
        w.write_record([
            fmt_f64(hist.bin_edges[b]),
            fmt_f64(hist.bin_edges[b + 1]),
            fmt_f64(*d),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_fit<W: Write>(fit: &FitRecord, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, fit)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_fit<R: Read>(input: R) -> Result<FitRecord> {
    Ok(serde_json::from_reader(input)?)
}
