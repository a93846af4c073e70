//! Result files: `energy.csv`, `theta_final.csv`, `fields_<step>.csv` and
//! `report.json`.

use crate::error::{CliError, CliResult};
use crate::Simulation;
use maxheat_core::coupled::GronwallBound;
use maxheat_core::state::{fmt_full, write_field_snapshot, FieldState, ThetaField};
use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize)]
pub struct PicardSummary {
    pub iterations: usize,
    pub converged: bool,
    pub deltas: Vec<f64>,
    pub contraction_ratios: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report<'a> {
    pub version: &'static str,
    pub config: &'a crate::config::RunConfig,
    pub steps: usize,
    pub dt: f64,
    pub t_final: f64,
    #[serde(rename = "gronwall_N")]
    pub gronwall_n: f64,
    pub gronwall: GronwallBound,
    #[serde(rename = "E0")]
    pub e0: f64,
    #[serde(rename = "max_E")]
    pub max_e: f64,
    #[serde(rename = "min_E")]
    pub min_e: f64,
    pub max_abs_residual: f64,
    pub max_cg_iterations: usize,
    pub picard: Option<PicardSummary>,
    pub wall_time_s: f64,
    pub threads: usize,
}

impl Simulation {
    pub fn report(&self) -> Report<'_> {
        let e = &self.run.energy.samples;
        Report {
            version: env!("CARGO_PKG_VERSION"),
            config: &self.config,
            steps: self.run.steps,
            dt: self.coupled.dt,
            t_final: self.coupled.t_final,
            gronwall_n: self.run.bound.n,
            gronwall: self.run.bound,
            e0: e[0],
            max_e: e.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            min_e: e.iter().copied().fold(f64::INFINITY, f64::min),
            max_abs_residual: self.run.residual.iter().fold(0.0, |m: f64, r| m.max(r.abs())),
            max_cg_iterations: self.run.cg_iterations.iter().copied().max().unwrap_or(0),
            picard: self.picard.as_ref().map(|p| PicardSummary {
                iterations: p.iterations(),
                converged: p.converged,
                deltas: p.deltas.clone(),
                contraction_ratios: p.contraction_ratios.clone(),
            }),
            wall_time_s: self.wall_time.as_secs_f64(),
            threads: self.threads,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> CliError + '_ {
    move |e| match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::Io {
            path: path.display().to_string(),
            source,
        },
        other => CliError::parse(&path.display().to_string(), format!("{other:?}")),
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

/// `step,t,E,dissipation,residual` (plus `picard_iter` for Picard runs).
/// The last row has no step after it, so its power columns are empty.
pub fn write_energy_csv<W: Write>(sim: &Simulation, w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let picard = sim.picard.as_ref().map(|p| p.iterations().to_string());
    let mut header = vec!["step", "t", "E", "dissipation", "residual"];
    if picard.is_some() {
        header.push("picard_iter");
    }
    out.write_record(&header)?;
    let run = &sim.run;
    let dt = sim.coupled.dt;
    for (n, e) in run.energy.samples.iter().enumerate() {
        let (diss, res) = match run.power.get(n) {
            Some(p) => (fmt_full(p.dissipation), fmt_full(run.residual[n])),
            None => (String::new(), String::new()),
        };
        let mut row = vec![n.to_string(), fmt_full(n as f64 * dt), fmt_full(*e), diss, res];
        if let Some(k) = &picard {
            row.push(k.clone());
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_theta_csv<W: Write>(sim: &Simulation, theta: &ThetaField, w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "y", "theta"])?;
    for (k, v) in theta.theta.iter().enumerate() {
        let (x, y) = sim.domain.node_xy(k);
        out.write_record([fmt_full(x), fmt_full(y), fmt_full(*v)])?;
    }
    out.flush()?;
    Ok(())
}

/// Writes every result file into `dir` and returns the paths written.
pub fn write_outputs(sim: &Simulation, dir: &Path) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();

    let p = dir.join("energy.csv");
    write_energy_csv(sim, create(&p)?).map_err(csv_err(&p))?;
    written.push(p);

    let p = dir.join("theta_final.csv");
    write_theta_csv(sim, &sim.run.final_theta, create(&p)?).map_err(csv_err(&p))?;
    written.push(p);

    if sim.config.output.fields {
        let run = &sim.run;
        let mut snaps: Vec<(usize, &FieldState, &ThetaField)> = run
            .snapshot_steps
            .iter()
            .zip(&run.field_snapshots)
            .zip(&run.theta_snapshots)
            .map(|((&s, f), t)| (s, f, t))
            .collect();
        if run.snapshot_steps.last() != Some(&run.steps) {
            snaps.push((run.steps, &run.final_fields, &run.final_theta));
        }
        for (step, fields, theta) in snaps {
            let p = dir.join(format!("fields_{step}.csv"));
            let mut w = create(&p)?;
            write_field_snapshot(&mut w, fields, theta, &sim.domain)
                .and_then(|_| w.flush())
                .map_err(io_err(&p))?;
            written.push(p);
        }
    }

    let p = dir.join("report.json");
    let mut w = create(&p)?;
    serde_json::to_writer_pretty(&mut w, &sim.report())
        .map_err(std::io::Error::from)
        .and_then(|_| writeln!(w))
        .and_then(|_| w.flush())
        .map_err(io_err(&p))?;
    written.push(p);
    Ok(written)
}
