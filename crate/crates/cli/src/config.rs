//! The JSON run configuration and its translation into solver inputs.

use crate::error::{CliError, CliResult};
use maxheat_core::coupled::{CoupledConfig, SolverMode, DEFAULT_PICARD_MAX_ITER, DEFAULT_PICARD_TOL};
use maxheat_core::domain::{build_domain, Domain, DomainKind};
use maxheat_core::heat::DEFAULT_CG_TOL;
use maxheat_core::materials::{
    ConductivityLaw, ConductivityModel, PhysicalConstants, SourceG, SpatialProfile, TimeProfile,
};
use maxheat_core::maxwell::{cfl_limit, DEFAULT_CFL_SAFETY};
use maxheat_core::oracle::annulus_b0;
use maxheat_core::state::{FieldState, ThetaField};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Environment variable consulted when `threads` is absent.
pub const THREADS_ENV: &str = "MAXHEAT_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    #[serde(default = "unit_constants")]
    pub constants: ConstantsConfig,
    pub conductivity: ConductivityConfig,
    #[serde(default)]
    pub source: SourceConfig,
    pub initial: InitialConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainShape {
    Rectangle,
    Annulus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub kind: DomainShape,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    pub eps: f64,
    pub mu: f64,
    pub kappa: f64,
}

fn unit_constants() -> ConstantsConfig {
    ConstantsConfig {
        eps: 1.0,
        mu: 1.0,
        kappa: 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    Constant,
    AffineClamped,
    Tabulated,
}

/// Union of the parameters of every law; which ones are required depends on
/// `kind`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<f64>>,
    /// Two-column `xi,sigma` CSV, as an alternative to inline arrays.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConductivityConfig {
    pub kind: LawKind,
    #[serde(default)]
    pub params: LawParams,
    /// Declared bound on `|sigma|`; derived from the law when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma0: Option<f64>,
    /// Declared Lipschitz bound; derived from the law when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma1: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    #[default]
    Zero,
    Separable,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub kind: SourceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<SourceParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceParams {
    pub amplitude: f64,
    /// Angular frequency; 0 gives a constant-in-time source.
    #[serde(default)]
    pub omega: f64,
    #[serde(default)]
    pub phase: f64,
    /// Gaussian centre and width; a uniform profile when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    /// Everything zero.
    Zero,
    /// `B = B0` on the annulus, `D = 0`.
    AnnulusB0,
    /// Constant `B = (bx, by)`, `D = 0`.
    UniformB,
    /// `Dz = amplitude sin(m pi x / W) sin(k pi y / H)`, `B = 0`.
    CavityMode,
    /// Single-column CSV files in storage order.
    Files,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub by: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dz_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bx_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub by_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub kind: InitialKind,
    #[serde(default)]
    pub params: InitialParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    /// Explicit step; mutually exclusive with `cfl_auto`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Use `cfl_safety` times the stability limit.
    #[serde(default)]
    pub cfl_auto: bool,
    #[serde(default = "default_cfl_safety")]
    pub cfl_safety: f64,
    /// Final time; alternatively give `steps`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

fn default_cfl_safety() -> f64 {
    DEFAULT_CFL_SAFETY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub mode: SolverMode,
    #[serde(default = "default_picard_tol")]
    pub picard_tol: f64,
    #[serde(default = "default_picard_max_iter")]
    pub picard_max_iter: usize,
    #[serde(default = "default_cg_tol")]
    pub cg_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cg_max_iter: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            mode: SolverMode::Monolithic,
            picard_tol: DEFAULT_PICARD_TOL,
            picard_max_iter: DEFAULT_PICARD_MAX_ITER,
            cg_tol: DEFAULT_CG_TOL,
            cg_max_iter: None,
        }
    }
}

fn default_picard_tol() -> f64 {
    DEFAULT_PICARD_TOL
}

fn default_picard_max_iter() -> usize {
    DEFAULT_PICARD_MAX_ITER
}

fn default_cg_tol() -> f64 {
    DEFAULT_CG_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    /// Keep every `snapshot_stride`-th step; 0 keeps only the final one.
    #[serde(default)]
    pub snapshot_stride: usize,
    /// Write `fields_<step>.csv` for kept steps.
    #[serde(default)]
    pub fields: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_out_dir(),
            snapshot_stride: 0,
            fields: false,
        }
    }
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn require<T: Copy>(v: Option<T>, key: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::config(key, "missing"))
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::config("<json>", e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        // an unreadable config is a configuration problem, not an output failure
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(path.display().to_string(), e.to_string()))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::config(path.display().to_string(), e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// `threads`, else `MAXHEAT_THREADS`, else `None` (all cores).
    pub fn resolved_threads(&self) -> CliResult<Option<usize>> {
        let n = match self.threads {
            Some(n) => Some(n),
            None => match std::env::var(THREADS_ENV) {
                Ok(s) => Some(s.trim().parse::<usize>().map_err(|_| {
                    CliError::config(THREADS_ENV, format!("not a thread count: {s:?}"))
                })?),
                Err(_) => None,
            },
        };
        if n == Some(0) {
            return Err(CliError::config("threads", "must be at least 1"));
        }
        Ok(n)
    }

    pub fn build_domain(&self) -> CliResult<Domain> {
        let d = &self.domain;
        let kind = match d.kind {
            DomainShape::Annulus => {
                if d.width.is_some() || d.height.is_some() {
                    return Err(CliError::config("domain", "the annulus takes no width or height"));
                }
                DomainKind::Annulus
            }
            DomainShape::Rectangle => DomainKind::Rectangle {
                width: d.width.unwrap_or(1.0),
                height: d.height.unwrap_or(1.0),
            },
        };
        Ok(build_domain(kind, d.n)?)
    }

    pub fn conductivity_model(&self) -> CliResult<ConductivityModel> {
        let c = &self.conductivity;
        let p = &c.params;
        let law = match c.kind {
            LawKind::Constant => ConductivityLaw::Constant(require(p.value, "conductivity.params.value")?),
            LawKind::AffineClamped => {
                let lo = require(p.lo, "conductivity.params.lo")?;
                let hi = require(p.hi, "conductivity.params.hi")?;
                if lo > hi {
                    return Err(CliError::config("conductivity.params", "lo must not exceed hi"));
                }
                ConductivityLaw::AffineClamped {
                    a: require(p.a, "conductivity.params.a")?,
                    b: require(p.b, "conductivity.params.b")?,
                    lo,
                    hi,
                }
            }
            LawKind::Tabulated => match (&p.file, &p.xi, &p.sigma) {
                (Some(f), None, None) => ConductivityLaw::from_csv(f)?,
                (None, Some(xi), Some(sigma)) => ConductivityLaw::tabulated(xi.clone(), sigma.clone())?,
                _ => {
                    return Err(CliError::config(
                        "conductivity.params",
                        "a table needs either `file` or both `xi` and `sigma`",
                    ))
                }
            },
        };
        let (s0, s1) = natural_bounds(&law);
        Ok(ConductivityModel {
            law,
            sigma0: c.sigma0.unwrap_or(s0),
            sigma1: c.sigma1.unwrap_or(s1),
        })
    }

    pub fn source(&self) -> CliResult<SourceG> {
        match (self.source.kind, &self.source.params) {
            (SourceKind::Zero, None) => Ok(SourceG::Zero),
            (SourceKind::Zero, Some(_)) => Err(CliError::config("source.params", "not used by a zero source")),
            (SourceKind::Separable, None) => Err(CliError::config("source.params", "missing")),
            (SourceKind::Separable, Some(p)) => {
                let time = if p.omega == 0.0 && p.phase == 0.0 {
                    TimeProfile::Constant { amplitude: p.amplitude }
                } else {
                    TimeProfile::Sine {
                        amplitude: p.amplitude,
                        omega: p.omega,
                        phase: p.phase,
                    }
                };
                let space = match (p.center, p.width) {
                    (None, None) => SpatialProfile::Uniform,
                    (Some([x0, y0]), Some(width)) if width > 0.0 => SpatialProfile::Gaussian { x0, y0, width },
                    _ => {
                        return Err(CliError::config(
                            "source.params",
                            "a Gaussian needs `center` and a positive `width`",
                        ))
                    }
                };
                Ok(SourceG::Separable { time, space })
            }
        }
    }

    /// Initial fields and temperature on `dom`.
    pub fn initial_data(&self, dom: &Domain) -> CliResult<(FieldState, ThetaField)> {
        let p = &self.initial.params;
        let zero_theta = ThetaField::zeros(dom);
        match self.initial.kind {
            InitialKind::Zero => Ok((FieldState::zeros(dom), zero_theta)),
            InitialKind::AnnulusB0 => {
                if self.domain.kind != DomainShape::Annulus {
                    return Err(CliError::config("initial.kind", "annulus_b0 needs the annulus domain"));
                }
                let err = std::cell::RefCell::new(None);
                let f = FieldState::sample(dom, |_, _| 0.0, |x, y| {
                    annulus_b0(x, y).unwrap_or_else(|e| {
                        err.borrow_mut().get_or_insert(e);
                        (0.0, 0.0)
                    })
                });
                match err.into_inner() {
                    Some(e) => Err(e.into()),
                    None => Ok((f, zero_theta)),
                }
            }
            InitialKind::UniformB => {
                let b = (require(p.bx, "initial.params.bx")?, require(p.by, "initial.params.by")?);
                Ok((FieldState::sample(dom, |_, _| 0.0, |_, _| b), zero_theta))
            }
            InitialKind::CavityMode => {
                let DomainKind::Rectangle { width, height } = dom.kind else {
                    return Err(CliError::config("initial.kind", "cavity_mode needs a rectangle"));
                };
                let a = p.amplitude.unwrap_or(1.0);
                let m = p.m.unwrap_or(1) as f64;
                let k = p.k.unwrap_or(1) as f64;
                let pi = std::f64::consts::PI;
                let f = FieldState::sample(
                    dom,
                    |x, y| a * (m * pi * x / width).sin() * (k * pi * y / height).sin(),
                    |_, _| (0.0, 0.0),
                );
                Ok((f, zero_theta))
            }
            InitialKind::Files => {
                let l = dom.layout;
                let read = |path: &Option<PathBuf>, len: usize| -> CliResult<Vec<f64>> {
                    match path {
                        Some(p) => read_column(p, len),
                        None => Ok(vec![0.0; len]),
                    }
                };
                let fields = FieldState {
                    dz: read(&p.dz_file, l.node_count())?,
                    bx: read(&p.bx_file, l.bx_count())?,
                    by: read(&p.by_file, l.by_count())?,
                    t: 0.0,
                };
                let theta = ThetaField {
                    theta: read(&p.theta_file, l.node_count())?,
                    t: 0.0,
                };
                Ok((fields, theta))
            }
        }
    }

    /// Resolves everything into solver inputs.
    pub fn coupled(&self) -> CliResult<(Domain, CoupledConfig)> {
        let dom = self.build_domain()?;
        let c = &self.constants;
        let consts = PhysicalConstants::new(c.eps, c.mu, c.kappa)?;
        let (initial, theta0) = self.initial_data(&dom)?;
        let t = &self.time;
        let dt = match (t.dt, t.cfl_auto) {
            (Some(dt), false) => dt,
            (None, true) => cfl_limit(&dom, &consts, t.cfl_safety),
            (Some(_), true) => return Err(CliError::config("time", "give either `dt` or `cfl_auto`, not both")),
            (None, false) => return Err(CliError::config("time.dt", "missing (or set `cfl_auto`)")),
        };
        let t_final = match (t.t_final, t.steps) {
            (Some(tf), None) => tf,
            (None, Some(s)) => s as f64 * dt,
            (Some(_), Some(_)) => return Err(CliError::config("time", "give either `t_final` or `steps`, not both")),
            (None, None) => return Err(CliError::config("time.t_final", "missing (or set `steps`)")),
        };
        let s = &self.solver;
        let mut cfg = CoupledConfig::new(consts, self.conductivity_model()?, initial, theta0, t_final, dt);
        cfg.source = self.source()?;
        cfg.cfl_safety = t.cfl_safety;
        cfg.mode = s.mode;
        cfg.picard_tol = s.picard_tol;
        cfg.picard_max_iter = s.picard_max_iter;
        cfg.cg_tol = s.cg_tol;
        cfg.cg_max_iter = s.cg_max_iter;
        cfg.snapshot_stride = self.output.snapshot_stride;
        cfg.validate(&dom)?;
        Ok((dom, cfg))
    }
}

/// Exact `sup |sigma|` and Lipschitz constant of a law over the real line.
fn natural_bounds(law: &ConductivityLaw) -> (f64, f64) {
    match law {
        ConductivityLaw::Constant(v) => (v.abs(), 0.0),
        ConductivityLaw::AffineClamped { b, lo, hi, .. } => {
            (lo.abs().max(hi.abs()), if lo < hi { b.abs() } else { 0.0 })
        }
        ConductivityLaw::Tabulated { xi, sigma } => {
            let s0 = sigma.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let s1 = xi
                .windows(2)
                .zip(sigma.windows(2))
                .fold(0.0_f64, |m, (x, s)| m.max(((s[1] - s[0]) / (x[1] - x[0])).abs()));
            (s0, s1)
        }
    }
}

/// Reads a single-column CSV (optional header) with exactly `len` values.
fn read_column(path: &Path, len: usize) -> CliResult<Vec<f64>> {
    let shown = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|source| CliError::Io {
        path: shown.clone(),
        source,
    })?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut out = Vec::with_capacity(len);
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::parse(&shown, e.to_string()))?;
        match rec.get(0).map(str::parse::<f64>) {
            Some(Ok(v)) => out.push(v),
            _ if row == 0 => continue,
            _ => return Err(CliError::parse(&shown, format!("row {}: not a number", row + 1))),
        }
    }
    if out.len() != len {
        return Err(CliError::parse(&shown, format!("expected {len} values, found {}", out.len())));
    }
    Ok(out)
}
