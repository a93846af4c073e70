//! Time-domain simulation of microwave heating in 2D.
//!
//! The electromagnetic field (out-of-plane `Dz`, in-plane `B`) lives on a
//! staggered Yee grid and is advanced by leapfrog. The temperature obeys a
//! heat equation whose source is the total field energy
//! `E(t) = 1/2 int (Dz^2/eps + |B|^2/mu)`, and the electric conductivity
//! depends on temperature. [`coupled`] advances both together, either
//! monolithically or by Picard iteration on `E(t)`.
//!
//! ```
//! use maxheat_core::prelude::*;
//!
//! let dom = build_domain(DomainKind::unit_square(), 32)?;
//! let fields = FieldState::sample(&dom, |_, _| 0.0, |_, _| (1.0, 0.0));
//! let cfg = CoupledConfig::new(
//!     PhysicalConstants::unit(),
//!     ConductivityModel::constant(1.0),
//!     fields,
//!     ThetaField::zeros(&dom),
//!     0.1,
//!     0.01,
//! );
//! let run = run_monolithic(&cfg, &dom)?;
//! assert!(run.energy.samples.iter().all(|&e| (e - 0.5).abs() < 1e-12));
//! # Ok::<(), maxheat_core::Error>(())
//! ```

pub mod coupled;
pub mod domain;
mod error;
pub mod heat;
pub mod materials;
pub mod maxwell;
pub mod oracle;
pub mod reduce;
pub mod state;

pub use error::{Error, Result};

/// The types and entry points most programs need.
pub mod prelude {
    pub use crate::coupled::{
        continuity_probe, gronwall_bound, picard_run, picard_t, run, run_monolithic,
        CoupledConfig, CoupledRun, GronwallBound, PicardReport, SolverMode,
    };
    pub use crate::domain::{build_domain, integrate_nodal, Domain, DomainKind};
    pub use crate::heat::{heat_step, solve_heat_trajectory, HeatStepParams};
    pub use crate::materials::{
        sigma_field, ConductivityLaw, ConductivityModel, PhysicalConstants, SourceG,
        SpatialProfile, TimeProfile,
    };
    pub use crate::maxwell::{maxwell_step, run_linear, MaxwellStepParams, StaggeredState};
    pub use crate::state::{total_energy, EnergyTrajectory, FieldState, ThetaField};
    pub use crate::{Error, Result};
}

// Compile and run the guide's code listings as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/grid.md")]
    mod grid {}
    #[doc = include_str!("../../../book/src/maxwell.md")]
    mod maxwell {}
    #[doc = include_str!("../../../book/src/heat.md")]
    mod heat {}
    #[doc = include_str!("../../../book/src/coupling.md")]
    mod coupling {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
