//! CSV and JSON encodings. Floats are written in shortest round-trip form,
//! so reading a file back reproduces every value bit for bit.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ChainConfig;
use crate::dynamics::StroboscopicTrace;
use crate::error::{Error, Result};
use crate::spectrum::{QuasienergySpectrum, TmPrediction};
use crate::sweep::{GridMetadata, SweepGrid, SweepSpec};
use crate::tm::TmInterval;

pub const FORMAT_TAG: &str = "floquet-tm/1";

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// Shortest round-trip decimal; exponent notation outside `[1e-5, 1e16)`.
fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

/// One trace as `epsilon,n,polarization,entropy` rows, plus `sz_<i>` and
/// `abs_overlap_<j>` columns when the trace carries them. `epsilon` is the
/// imperfection of site 1.
pub fn write_trace_csv<W: Write>(w: W, trace: &StroboscopicTrace, epsilon: f64) -> Result<()> {
    let mut out = csv_writer(w);
    let mut header = vec!["epsilon".to_string(), "n".into(), "polarization".into(), "entropy".into()];
    if let Some(rows) = &trace.per_site_polarization {
        header.extend((1..=rows.first().map_or(0, Vec::len)).map(|i| format!("sz_{i}")));
    }
    if let Some(rows) = &trace.eigen_overlaps {
        header.extend((1..=rows.first().map_or(0, Vec::len)).map(|j| format!("abs_overlap_{j}")));
    }
    out.write_record(&header)?;
    for (i, &n) in trace.steps.iter().enumerate() {
        let mut rec = vec![num(epsilon), n.to_string(), num(trace.polarization[i]), num(trace.entropy[i])];
        if let Some(rows) = &trace.per_site_polarization {
            rec.extend(rows[i].iter().map(|&x| num(x)));
        }
        if let Some(rows) = &trace.eigen_overlaps {
            rec.extend(rows[i].iter().map(|z| num(z.norm())));
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Grid as long-format CSV, one row per `(value, n)`. The first column is
/// named after the sweep axis.
pub fn write_grid_csv<W: Write>(w: W, grid: &SweepGrid) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record([grid.spec.axis.label(), "n", "polarization", "entropy"])?;
    for (r, &value) in grid.spec.values.iter().enumerate() {
        let v = num(value);
        for n in 0..grid.steps() {
            out.write_record([v.as_str(), &n.to_string(), &num(grid.polarization[r][n]), &num(grid.entropy[r][n])])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Contents of a long-format CSV (trace or grid): rows grouped by the value
/// in the first column, in order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub axis_label: String,
    pub values: Vec<f64>,
    pub steps: Vec<Vec<usize>>,
    pub polarization: Vec<Vec<f64>>,
    pub entropy: Vec<Vec<f64>>,
}

impl CsvTable {
    /// Row `i` as a trace for a chain of `n_qubits`.
    pub fn trace(&self, i: usize, n_qubits: usize) -> StroboscopicTrace {
        StroboscopicTrace {
            n_qubits,
            entropy_block: crate::dynamics::SiteSet::first(),
            steps: self.steps[i].clone(),
            polarization: self.polarization[i].clone(),
            entropy: self.entropy[i].clone(),
            per_site_polarization: None,
            eigen_overlaps: None,
        }
    }
}

fn parse<T: std::str::FromStr>(field: &str, line: u64, what: &str) -> Result<T> {
    field.trim().parse().map_err(|_| Error::Format(format!("line {line}: cannot parse {what} from {field:?}")))
}

pub fn read_csv_table<R: Read>(r: R) -> Result<CsvTable> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(r);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (Some(ni), Some(pi), Some(ei)) = (col("n"), col("polarization"), col("entropy")) else {
        return Err(Error::Format("CSV needs n, polarization and entropy columns".into()));
    };
    if ni == 0 {
        return Err(Error::Format("first CSV column must hold the parameter value".into()));
    }
    let mut table = CsvTable {
        axis_label: headers.get(0).unwrap_or_default().trim().to_string(),
        values: Vec::new(),
        steps: Vec::new(),
        polarization: Vec::new(),
        entropy: Vec::new(),
    };
    let mut slot: BTreeMap<u64, usize> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| rec.get(i).ok_or_else(|| Error::Format(format!("line {line}: missing column {i}")));
        let value: f64 = parse(field(0)?, line, "parameter value")?;
        let idx = *slot.entry(value.to_bits()).or_insert_with(|| {
            table.values.push(value);
            table.steps.push(Vec::new());
            table.polarization.push(Vec::new());
            table.entropy.push(Vec::new());
            table.values.len() - 1
        });
        table.steps[idx].push(parse(field(ni)?, line, "step")?);
        table.polarization[idx].push(parse(field(pi)?, line, "polarization")?);
        table.entropy[idx].push(parse(field(ei)?, line, "entropy")?);
    }
    Ok(table)
}

#[derive(Serialize, Deserialize)]
struct TraceFile {
    format: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    config: Option<ChainConfig>,
    trace: StroboscopicTrace,
}

#[derive(Serialize, Deserialize)]
struct GridFile {
    format: String,
    kind: String,
    spec: SweepSpec,
    polarization: Vec<Vec<f64>>,
    entropy: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    abs_overlaps: Option<Vec<Vec<Vec<f64>>>>,
    metadata: GridMetadata,
}

/// Parses a document and checks its `format` and `kind` tags before decoding the body.
fn read_tagged<T: serde::de::DeserializeOwned, R: Read>(r: R, expected: &str) -> Result<T> {
    let doc: serde_json::Value = serde_json::from_reader(r)?;
    let tag = |key: &str| doc.get(key).and_then(|v| v.as_str()).unwrap_or_default().to_string();
    check_tag(&tag("format"), &tag("kind"), expected)?;
    Ok(serde_json::from_value(doc)?)
}

fn check_tag(format: &str, kind: &str, expected: &str) -> Result<()> {
    if format != FORMAT_TAG {
        return Err(Error::Format(format!("unsupported format {format:?}, expected {FORMAT_TAG:?}")));
    }
    if kind != expected {
        return Err(Error::Format(format!("expected a {expected} file, found {kind:?}")));
    }
    Ok(())
}

pub fn write_trace_json<W: Write>(w: W, trace: &StroboscopicTrace, config: Option<&ChainConfig>) -> Result<()> {
    let file =
        TraceFile { format: FORMAT_TAG.into(), kind: "trace".into(), config: config.cloned(), trace: trace.clone() };
    serde_json::to_writer_pretty(w, &file)?;
    Ok(())
}

pub fn read_trace_json<R: Read>(r: R) -> Result<(StroboscopicTrace, Option<ChainConfig>)> {
    let file: TraceFile = read_tagged(r, "trace")?;
    Ok((file.trace, file.config))
}

pub fn write_grid_json<W: Write>(w: W, grid: &SweepGrid) -> Result<()> {
    let file = GridFile {
        format: FORMAT_TAG.into(),
        kind: "grid".into(),
        spec: grid.spec.clone(),
        polarization: grid.polarization.clone(),
        entropy: grid.entropy.clone(),
        abs_overlaps: grid.abs_overlaps.clone(),
        metadata: grid.metadata.clone(),
    };
    serde_json::to_writer_pretty(w, &file)?;
    Ok(())
}

pub fn read_grid_json<R: Read>(r: R) -> Result<SweepGrid> {
    let file: GridFile = read_tagged(r, "grid")?;
    let rows = file.spec.values.len();
    let steps = file.spec.n_max + 1;
    let shape_ok = |m: &Vec<Vec<f64>>| m.len() == rows && m.iter().all(|r| r.len() == steps);
    if !shape_ok(&file.polarization) || !shape_ok(&file.entropy) {
        return Err(Error::Format(format!("grid data is not {rows} x {steps}")));
    }
    Ok(SweepGrid {
        spec: file.spec,
        polarization: file.polarization,
        entropy: file.entropy,
        abs_overlaps: file.abs_overlaps,
        metadata: file.metadata,
    })
}

/// Detected intervals, one row each, tagged with the parameter value of the
/// trace they came from. Unlabeled intervals leave `k` and `l` empty.
pub fn write_intervals_csv<W: Write>(w: W, axis_label: &str, rows: &[(f64, TmInterval)]) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record([
        axis_label,
        "n_start",
        "n_end",
        "duration",
        "center",
        "mean_abs_polarization",
        "mean_entropy",
        "k",
        "l",
    ])?;
    for (value, iv) in rows {
        let (k, l) = iv.label.map_or((String::new(), String::new()), |lb| (lb.k.to_string(), lb.l.to_string()));
        out.write_record([
            num(*value),
            iv.n_start.to_string(),
            iv.n_end.to_string(),
            iv.duration.to_string(),
            num(iv.center()),
            num(iv.mean_abs_polarization),
            num(iv.mean_entropy),
            k,
            l,
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Eigenphases in `(-π, π]`, optionally next to a reference spectrum.
pub fn write_spectrum_csv<W: Write>(
    w: W,
    spectrum: &QuasienergySpectrum,
    reference: Option<&QuasienergySpectrum>,
) -> Result<()> {
    let mut out = csv_writer(w);
    let mut numeric = spectrum.eigenphases.clone();
    numeric.sort_by(f64::total_cmp);
    match reference {
        None => {
            out.write_record(["index", "eigenphase"])?;
            for (i, t) in numeric.iter().enumerate() {
                out.write_record([i.to_string(), num(*t)])?;
            }
        }
        Some(r) => {
            let mut analytic = r.eigenphases.clone();
            analytic.sort_by(f64::total_cmp);
            out.write_record(["index", "eigenphase", "reference", "difference"])?;
            for (i, (t, a)) in numeric.iter().zip(&analytic).enumerate() {
                out.write_record([i.to_string(), num(*t), num(*a), num(t - a)])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_prediction_csv<W: Write>(w: W, prediction: &TmPrediction) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["k", "ell", "g", "epsilon", "xi_value", "omega1_t", "omega2_t"])?;
    let p = prediction;
    out.write_record([
        p.k.to_string(),
        p.ell.to_string(),
        num(p.g),
        num(p.epsilon),
        num(p.xi_value),
        num(p.omega1_t),
        num(p.omega2_t),
    ])?;
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SpectrumFile<'a> {
    format: &'a str,
    kind: &'a str,
    eigenphases: Vec<f64>,
    max_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference: Option<Vec<f64>>,
}

/// Sorted eigenphases as JSON, with the eigenpair residual when known.
pub fn write_spectrum_json<W: Write>(
    w: W,
    spectrum: &QuasienergySpectrum,
    max_residual: Option<f64>,
    reference: Option<&QuasienergySpectrum>,
) -> Result<()> {
    let sorted = |s: &QuasienergySpectrum| {
        let mut v = s.eigenphases.clone();
        v.sort_by(f64::total_cmp);
        v
    };
    let file = SpectrumFile {
        format: FORMAT_TAG,
        kind: "spectrum",
        eigenphases: sorted(spectrum),
        max_residual,
        reference: reference.map(sorted),
    };
    serde_json::to_writer_pretty(w, &file)?;
    Ok(())
}

#[derive(Serialize)]
struct IntervalRow<'a> {
    value: f64,
    #[serde(flatten)]
    interval: &'a TmInterval,
    center: f64,
}

#[derive(Serialize)]
struct IntervalsFile<'a> {
    format: &'a str,
    kind: &'a str,
    axis: &'a str,
    intervals: Vec<IntervalRow<'a>>,
}

pub fn write_intervals_json<W: Write>(w: W, axis_label: &str, rows: &[(f64, TmInterval)]) -> Result<()> {
    let file = IntervalsFile {
        format: FORMAT_TAG,
        kind: "intervals",
        axis: axis_label,
        intervals: rows.iter().map(|(v, iv)| IntervalRow { value: *v, interval: iv, center: iv.center() }).collect(),
    };
    serde_json::to_writer_pretty(w, &file)?;
    Ok(())
}

/// Lowercase hex SHA-256 digest.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
struct PredictionFile<'a> {
    format: &'a str,
    kind: &'a str,
    #[serde(flatten)]
    prediction: &'a TmPrediction,
}

pub fn write_prediction_json<W: Write>(w: W, prediction: &TmPrediction) -> Result<()> {
    serde_json::to_writer_pretty(w, &PredictionFile { format: FORMAT_TAG, kind: "tm_prediction", prediction })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::SiteSet;
    use crate::sweep::{run_sweep_sequential, SweepAxis};

    fn small_grid() -> SweepGrid {
        let spec = SweepSpec {
            base: ChainConfig::uniform(2, 0.05, 0.0),
            axis: SweepAxis::EpsilonUniform,
            values: vec![0.0, 0.0436, 0.1],
            n_max: 12,
            entropy_block: SiteSet::first(),
            record_overlaps: false,
        };
        run_sweep_sequential(&spec).unwrap()
    }

    #[test]
    fn grid_csv_round_trip_is_exact() {
        let grid = small_grid();
        let mut buf = Vec::new();
        write_grid_csv(&mut buf, &grid).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("epsilon,n,polarization,entropy\n"));
        let table = read_csv_table(buf.as_slice()).unwrap();
        assert_eq!(table.values, grid.spec.values);
        assert_eq!(table.polarization, grid.polarization);
        assert_eq!(table.entropy, grid.entropy);
    }

    #[test]
    fn grid_json_round_trip_is_exact() {
        let grid = small_grid();
        let mut buf = Vec::new();
        write_grid_json(&mut buf, &grid).unwrap();
        assert!(String::from_utf8_lossy(&buf).contains(FORMAT_TAG));
        assert_eq!(read_grid_json(buf.as_slice()).unwrap(), grid);
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let grid = small_grid();
        let mut buf = Vec::new();
        write_trace_json(&mut buf, &grid.row(0), None).unwrap();
        assert!(matches!(read_grid_json(buf.as_slice()), Err(Error::Format(_))));
        let (trace, cfg) = read_trace_json(buf.as_slice()).unwrap();
        assert_eq!(trace, grid.row(0));
        assert!(cfg.is_none());
    }

    #[test]
    fn number_formatting_round_trips() {
        for x in [0.0, -0.0, 2.0, -2.0, 0.1, 2.770397466955098e-17, 1e-5, 9.99e-6, 1e16, 123456.789, f64::MIN_POSITIVE]
        {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(num(2.0), "2");
        assert_eq!(num(2.770397466955098e-17), "2.770397466955098e-17");
    }

    #[test]
    fn malformed_csv() {
        assert!(read_csv_table("epsilon,n,pol\n0,0,1\n".as_bytes()).is_err());
        assert!(read_csv_table("epsilon,n,polarization,entropy\n0,0,abc,0\n".as_bytes()).is_err());
    }
}
