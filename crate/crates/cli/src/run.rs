use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use floquet_tm::io::{self, CsvTable};
use floquet_tm::spectrum::analytic_two_qubit_spectrum;
use floquet_tm::sweep::run_trajectory;
use floquet_tm::{
    compose_floquet, detect_flat_regions, label_intervals, quasienergy_spectrum, run_sweep, tm_epsilon_for,
    ChainConfig, DetectionParams, PulseMode, StroboscopicTrace, SweepSpec, TmInterval,
};

use crate::args::{Command, DetectArgs, EvolveArgs, Format, PredictArgs, SpectrumArgs, SweepArgs};
use crate::UsageError;

/// A file produced by a command, held in memory until it is written.
pub struct Artifact {
    pub file_name: String,
    pub bytes: Vec<u8>,
}

/// What a command computed: its files and the chain configuration it used.
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub config: Option<ChainConfig>,
}

fn artifact(
    stem: &str,
    format: Format,
    write: impl FnOnce(&mut Vec<u8>) -> floquet_tm::Result<()>,
) -> Result<Artifact> {
    let mut bytes = Vec::new();
    write(&mut bytes)?;
    Ok(Artifact { file_name: format!("{stem}.{}", format.extension()), bytes })
}

pub fn execute(command: &Command) -> Result<Outcome> {
    match command {
        Command::Evolve(a) => evolve(a),
        Command::Sweep(a) => sweep(a),
        Command::Spectrum(a) => spectrum(a),
        Command::PredictTm(a) => predict(a),
        Command::DetectTm(a) => detect(a),
        Command::Replay(_) => unreachable!("replay is resolved before execution"),
    }
}

fn evolve(a: &EvolveArgs) -> Result<Outcome> {
    let cfg = a.chain.config()?;
    let block = a.entropy_block.sites(cfg.n_qubits);
    let trace = run_trajectory(&cfg, a.steps, &block, a.overlaps, a.per_site)?;
    let out = artifact("trace", a.output.format, |w| match a.output.format {
        Format::Csv => io::write_trace_csv(w, &trace, cfg.pulse_imperfections[0]),
        Format::Json => io::write_trace_json(w, &trace, Some(&cfg)),
    })?;
    Ok(Outcome { artifacts: vec![out], config: Some(cfg) })
}

fn sweep(a: &SweepArgs) -> Result<Outcome> {
    let cfg = a.chain.config()?;
    let spec = SweepSpec {
        entropy_block: a.entropy_block.sites(cfg.n_qubits),
        base: cfg.clone(),
        axis: a.axis()?,
        values: a.values()?,
        n_max: a.steps,
        record_overlaps: a.overlaps,
    };
    if a.overlaps && a.output.format == Format::Csv {
        return Err(UsageError("--overlaps in a sweep needs --format json".into()).into());
    }
    let grid = run_sweep(&spec)?;
    let out = artifact("grid", a.output.format, |w| match a.output.format {
        Format::Csv => io::write_grid_csv(w, &grid),
        Format::Json => io::write_grid_json(w, &grid),
    })?;
    Ok(Outcome { artifacts: vec![out], config: Some(cfg) })
}

/// The closed-form spectrum applies to two identical, undetuned qubits with
/// instantaneous pulses.
fn has_closed_form(cfg: &ChainConfig) -> bool {
    cfg.n_qubits == 2
        && cfg.mode == PulseMode::Instantaneous
        && cfg.detunings.iter().all(|&d| d == 0.0)
        && cfg.pulse_imperfections[0] == cfg.pulse_imperfections[1]
        && cfg.pulse_imperfections[0] >= 0.0
}

fn spectrum(a: &SpectrumArgs) -> Result<Outcome> {
    let cfg = a.chain.config()?;
    let f = compose_floquet(&cfg)?;
    let numeric = quasienergy_spectrum(&f)?;
    let reference = if has_closed_form(&cfg) {
        Some(analytic_two_qubit_spectrum(cfg.pulse_imperfections[0], cfg.coupling)?)
    } else {
        None
    };
    let out = artifact("spectrum", a.output.format, |w| match a.output.format {
        Format::Csv => io::write_spectrum_csv(w, &numeric, reference.as_ref()),
        Format::Json => io::write_spectrum_json(w, &numeric, Some(numeric.max_residual(&f)), reference.as_ref()),
    })?;
    Ok(Outcome { artifacts: vec![out], config: Some(cfg) })
}

fn predict(a: &PredictArgs) -> Result<Outcome> {
    let p = tm_epsilon_for(a.k, a.ell, a.g)?;
    let out = artifact("prediction", a.output.format, |w| match a.output.format {
        Format::Csv => io::write_prediction_csv(w, &p),
        Format::Json => io::write_prediction_json(w, &p),
    })?;
    Ok(Outcome { artifacts: vec![out], config: None })
}

/// One trace to scan, with the `(g, ε)` used to label its intervals.
struct Subject {
    value: f64,
    trace: StroboscopicTrace,
    g: f64,
    epsilon: f64,
}

fn load_subjects(a: &DetectArgs, path: &Path) -> Result<(String, Vec<Subject>)> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        if let Ok(grid) = io::read_grid_json(bytes.as_slice()) {
            let subjects = (0..grid.rows())
                .map(|i| {
                    let cfg = grid.spec.config_for(grid.spec.values[i]);
                    Subject {
                        value: grid.spec.values[i],
                        trace: grid.row(i),
                        g: cfg.coupling,
                        epsilon: cfg.pulse_imperfections[0],
                    }
                })
                .collect();
            return Ok((grid.spec.axis.label().to_string(), subjects));
        }
        let (trace, cfg) = io::read_trace_json(bytes.as_slice())
            .with_context(|| format!("{} is neither a trace nor a grid file", path.display()))?;
        let (g, epsilon) = match &cfg {
            Some(c) => (c.coupling, c.pulse_imperfections[0]),
            None => (a.chain.g, a.chain.epsilon[0]),
        };
        return Ok(("epsilon".into(), vec![Subject { value: epsilon, trace, g, epsilon }]));
    }
    let table: CsvTable = io::read_csv_table(bytes.as_slice())?;
    let n = a.chain.n_qubits;
    let subjects = (0..table.values.len())
        .map(|i| {
            let v = table.values[i];
            let (g, epsilon) = match table.axis_label.as_str() {
                "epsilon" => (a.chain.g, v),
                "g" => (v, a.chain.epsilon[0]),
                _ => (a.chain.g, a.chain.epsilon[0]),
            };
            Subject { value: v, trace: table.trace(i, n), g, epsilon }
        })
        .collect();
    Ok((table.axis_label, subjects))
}

fn detect(a: &DetectArgs) -> Result<Outcome> {
    let (axis, subjects, config) = match &a.input {
        Some(path) => {
            let (axis, subjects) = load_subjects(a, path)?;
            (axis, subjects, None)
        }
        None => {
            let cfg = a.chain.config()?;
            let trace = run_trajectory(&cfg, a.steps, &floquet_tm::SiteSet::first(), false, false)?;
            let eps = cfg.pulse_imperfections[0];
            ("epsilon".to_string(), vec![Subject { value: eps, trace, g: cfg.coupling, epsilon: eps }], Some(cfg))
        }
    };
    let mut rows: Vec<(f64, TmInterval)> = Vec::new();
    for s in &subjects {
        let defaults = DetectionParams::for_chain(s.trace.n_qubits);
        let params = DetectionParams {
            window: a.window,
            threshold: a.threshold.unwrap_or(defaults.threshold),
            entropy_floor: a.entropy_floor.unwrap_or(defaults.entropy_floor),
        };
        let mut found = detect_flat_regions(&s.trace, &params)?;
        if s.g > 0.0 && !found.is_empty() {
            found = label_intervals(&found, s.g, s.epsilon, a.k_max)?;
        }
        rows.extend(found.into_iter().map(|iv| (s.value, iv)));
    }
    let out = artifact("intervals", a.output.format, |w| match a.output.format {
        Format::Csv => io::write_intervals_csv(w, &axis, &rows),
        Format::Json => io::write_intervals_json(w, &axis, &rows),
    })?;
    Ok(Outcome { artifacts: vec![out], config })
}
