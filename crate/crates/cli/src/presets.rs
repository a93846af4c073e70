//! Named scenarios with recommended parameters.

use crate::config::*;
use maxheat_core::coupled::SolverMode;
use std::path::PathBuf;

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    build: fn() -> RunConfig,
}

impl Preset {
    pub fn config(&self) -> RunConfig {
        (self.build)()
    }
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "annulus_static_b",
        summary: "annulus, curl-free B0 = (y, -x)/r^2, D = 0: heated by a constant field energy",
        build: annulus_static_b,
    },
    Preset {
        name: "square_uniform_b",
        summary: "unit square, uniform B = (1, 0): E stays 1/2, theta tends to the torsion profile",
        build: square_uniform_b,
    },
    Preset {
        name: "cavity_mode",
        summary: "lossless unit-square cavity, Dz = sin(pi x) sin(pi y): 2000 leapfrog steps",
        build: cavity_mode,
    },
    Preset {
        name: "zero_data",
        summary: "all data zero: the solution stays identically zero",
        build: zero_data,
    },
    Preset {
        name: "dissipative_cavity",
        summary: "unit-square cavity mode with conductivity 0.5: the field energy decays",
        build: dissipative_cavity,
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

/// Overrides applied on top of a preset from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub mode: Option<SolverMode>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(n) = self.n {
            cfg.domain.n = n;
        }
        if let Some(m) = self.mode {
            cfg.solver.mode = m;
        }
        if let Some(out) = &self.out {
            cfg.output.dir = out.clone();
        }
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
    }
}

fn base(name: &str, shape: DomainShape, sigma: f64, initial: InitialConfig, time: TimeConfig) -> RunConfig {
    RunConfig {
        domain: DomainConfig {
            kind: shape,
            n: 128,
            width: None,
            height: None,
        },
        constants: ConstantsConfig {
            eps: 1.0,
            mu: 1.0,
            kappa: 1.0,
        },
        conductivity: ConductivityConfig {
            kind: LawKind::Constant,
            params: LawParams {
                value: Some(sigma),
                ..LawParams::default()
            },
            sigma0: None,
            sigma1: None,
        },
        source: SourceConfig::default(),
        initial,
        time,
        solver: SolverConfig::default(),
        output: OutputConfig {
            dir: PathBuf::from("out").join(name),
            ..OutputConfig::default()
        },
        threads: None,
    }
}

fn auto_until(t_final: f64) -> TimeConfig {
    TimeConfig {
        dt: None,
        cfl_auto: true,
        cfl_safety: maxheat_core::maxwell::DEFAULT_CFL_SAFETY,
        t_final: Some(t_final),
        steps: None,
    }
}

fn kind(kind: InitialKind) -> InitialConfig {
    InitialConfig {
        kind,
        params: InitialParams::default(),
    }
}

fn annulus_static_b() -> RunConfig {
    base("annulus_static_b", DomainShape::Annulus, 1.0, kind(InitialKind::AnnulusB0), auto_until(0.5))
}

fn square_uniform_b() -> RunConfig {
    let initial = InitialConfig {
        kind: InitialKind::UniformB,
        params: InitialParams {
            bx: Some(1.0),
            by: Some(0.0),
            ..InitialParams::default()
        },
    };
    base("square_uniform_b", DomainShape::Rectangle, 1.0, initial, auto_until(0.6))
}

fn cavity_mode() -> RunConfig {
    let time = TimeConfig {
        t_final: None,
        steps: Some(2000),
        ..auto_until(0.0)
    };
    base("cavity_mode", DomainShape::Rectangle, 0.0, kind(InitialKind::CavityMode), time)
}

fn zero_data() -> RunConfig {
    base("zero_data", DomainShape::Rectangle, 1.0, kind(InitialKind::Zero), auto_until(0.1))
}

fn dissipative_cavity() -> RunConfig {
    base("dissipative_cavity", DomainShape::Rectangle, 0.5, kind(InitialKind::CavityMode), auto_until(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_resolves() {
        for p in PRESETS {
            let mut cfg = p.config();
            cfg.domain.n = 16;
            cfg.coupled().unwrap_or_else(|e| panic!("{}: {e}", p.name));
        }
    }

    #[test]
    fn overrides_apply() {
        let mut cfg = find("zero_data").unwrap().config();
        Overrides {
            n: Some(24),
            mode: Some(SolverMode::Picard),
            out: Some("x".into()),
            threads: Some(2),
        }
        .apply(&mut cfg);
        assert_eq!(cfg.domain.n, 24);
        assert_eq!(cfg.solver.mode, SolverMode::Picard);
        assert_eq!(cfg.output.dir, PathBuf::from("x"));
        assert_eq!(cfg.threads, Some(2));
    }

    #[test]
    fn unknown_preset() {
        assert!(find("nope").is_none());
    }
}
