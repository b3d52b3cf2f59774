//! CSV emission and parsing, plus the console summary.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use uplink_core::sim::write_trace_csv;
use uplink_core::Scheme;

use crate::config::SweepAxis;
use crate::sweep::{ComparisonRow, EngineTag, ResultRow, SweepOutput};

/// Column list of `results.csv`.
pub const RESULT_HEADER: [&str; 36] = [
    "axis", "value", "scheme", "engine", "devices", "aggregate_rate", "coverage", "fdp", "fdp_se",
    "throughput", "throughput_se", "cp_sf7", "cp_sf8", "cp_sf9", "cp_sf10", "cp_sf11", "cp_sf12",
    "fcp_sf7", "fcp_sf8", "fcp_sf9", "fcp_sf10", "fcp_sf11", "fcp_sf12", "fcp_se_sf7",
    "fcp_se_sf8", "fcp_se_sf9", "fcp_se_sf10", "fcp_se_sf11", "fcp_se_sf12", "fsp_sf7", "fsp_sf8",
    "fsp_sf9", "fsp_sf10", "fsp_sf11", "fsp_sf12", "status",
];

/// Column list of `comparison.csv`.
pub const COMPARISON_HEADER: [&str; 8] = [
    "value", "scheme", "sf", "analytic_fcp", "simulated_fcp", "simulated_se", "upper_bound", "holds",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn record(row: &ResultRow) -> Vec<String> {
    let mut rec = vec![
        row.axis.name().to_string(),
        row.value.to_string(),
        row.scheme.name().to_string(),
        row.engine.name().to_string(),
        row.devices.map(|d| d.to_string()).unwrap_or_default(),
        row.aggregate_rate.to_string(),
        opt(row.coverage),
        opt(row.fdp),
        opt(row.fdp_se),
        opt(row.throughput),
        opt(row.throughput_se),
    ];
    for block in [&row.cp, &row.fcp, &row.fcp_se, &row.fsp] {
        rec.extend(block.iter().map(|&v| opt(v)));
    }
    rec.push(row.status.clone());
    rec
}

pub fn write_rows<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULT_HEADER)?;
    for row in rows {
        w.write_record(record(row))?;
    }
    w.flush()?;
    Ok(())
}

fn field(rec: &csv::StringRecord, i: usize) -> Result<&str> {
    rec.get(i).with_context(|| format!("missing column `{}`", RESULT_HEADER[i]))
}

fn number(rec: &csv::StringRecord, i: usize) -> Result<f64> {
    let s = field(rec, i)?;
    s.parse().with_context(|| format!("column `{}`: bad number `{s}`", RESULT_HEADER[i]))
}

fn maybe(rec: &csv::StringRecord, i: usize) -> Result<Option<f64>> {
    if field(rec, i)?.is_empty() {
        Ok(None)
    } else {
        number(rec, i).map(Some)
    }
}

/// Parses a `results.csv` back into rows.
pub fn read_rows<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(RESULT_HEADER) {
        bail!("unexpected header: {}", header.iter().collect::<Vec<_>>().join(","));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let axis = match field(&rec, 0)? {
            "devices" => SweepAxis::Devices,
            "rate" => SweepAxis::Rate,
            other => bail!("unknown axis `{other}`"),
        };
        let scheme: Scheme = field(&rec, 2)?.parse()?;
        let engine = match field(&rec, 3)? {
            "analytic" => EngineTag::Analytic,
            "simulate" => EngineTag::Simulate,
            other => bail!("unknown engine `{other}`"),
        };
        let devices = match field(&rec, 4)? {
            "" => None,
            s => Some(s.parse().with_context(|| format!("bad device count `{s}`"))?),
        };
        let block = |start: usize| -> Result<[Option<f64>; 6]> {
            let mut out = [None; 6];
            for (k, slot) in out.iter_mut().enumerate() {
                *slot = maybe(&rec, start + k)?;
            }
            Ok(out)
        };
        rows.push(ResultRow {
            axis,
            value: number(&rec, 1)?,
            scheme,
            engine,
            devices,
            aggregate_rate: number(&rec, 5)?,
            coverage: maybe(&rec, 6)?,
            fdp: maybe(&rec, 7)?,
            fdp_se: maybe(&rec, 8)?,
            throughput: maybe(&rec, 9)?,
            throughput_se: maybe(&rec, 10)?,
            cp: block(11)?,
            fcp: block(17)?,
            fcp_se: block(23)?,
            fsp: block(29)?,
            status: field(&rec, 35)?.to_string(),
        });
    }
    Ok(rows)
}

pub fn write_comparison<W: Write>(out: W, rows: &[ComparisonRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPARISON_HEADER)?;
    for c in rows {
        w.write_record([
            c.value.to_string(),
            c.scheme.name().to_string(),
            c.sf.value().to_string(),
            c.analytic_fcp.to_string(),
            c.simulated_fcp.to_string(),
            c.simulated_se.to_string(),
            c.upper.to_string(),
            c.holds.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Files written by [`emit_report`].
#[derive(Debug, Clone, Default)]
pub struct Emitted {
    pub files: Vec<PathBuf>,
    pub comparison: Vec<ComparisonRow>,
}

impl Emitted {
    pub fn comparison_failures(&self) -> usize {
        self.comparison.iter().filter(|c| !c.holds).count()
    }
}

fn create(path: &Path) -> Result<io::BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(io::BufWriter::new(f))
}

/// Writes `results.csv`, `comparison.csv` when both engines ran, and one
/// `trace-<scheme>-<value>.csv` per recorded trace.
pub fn emit_report(output: &SweepOutput, dir: &Path) -> Result<Emitted> {
    if output.rows.is_empty() {
        bail!("nothing to report");
    }
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut emitted = Emitted::default();

    let path = dir.join("results.csv");
    write_rows(create(&path)?, &output.rows)?;
    emitted.files.push(path);

    let both = output.rows.iter().any(|r| r.engine == EngineTag::Analytic)
        && output.rows.iter().any(|r| r.engine == EngineTag::Simulate);
    if both {
        emitted.comparison = crate::sweep::compare(&output.rows);
        let path = dir.join("comparison.csv");
        write_comparison(create(&path)?, &emitted.comparison)?;
        emitted.files.push(path);
    }

    for t in &output.traces {
        let path = dir.join(format!("trace-{}-{}.csv", t.scheme, t.value));
        write_trace_csv(create(&path)?, &t.frames, &t.verdicts)
            .with_context(|| format!("cannot write {}", path.display()))?;
        emitted.files.push(path);
    }
    Ok(emitted)
}

fn cell(v: Option<f64>, digits: usize) -> String {
    v.map(|x| format!("{x:.digits$}")).unwrap_or_else(|| "-".into())
}

/// Fixed-width table of the headline numbers.
pub fn summary_table(rows: &[ResultRow]) -> String {
    let mut s = format!(
        "{:<9} {:<9} {:>10} {:>9} {:>8} {:>8} {:>11}  {}\n",
        "scheme", "engine", "value", "lambda", "cover", "fdp", "thr[B/s]", "status"
    );
    for r in rows {
        s.push_str(&format!(
            "{:<9} {:<9} {:>10} {:>9.4} {:>8} {:>8} {:>11}  {}\n",
            r.scheme.name(),
            r.engine.name(),
            r.value,
            r.aggregate_rate,
            cell(r.coverage, 4),
            cell(r.fdp, 4),
            cell(r.throughput, 2),
            r.status
        ));
    }
    s
}
