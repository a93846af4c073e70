//! Command-line driver: JSON configuration, scenario presets, result files
//! and a self-check suite.

pub mod config;
mod error;
pub mod output;
pub mod presets;
pub mod verify;

pub use config::RunConfig;
pub use error::{CliError, CliResult};

use maxheat_core::coupled::{run, CoupledConfig, CoupledRun, PicardReport};
use maxheat_core::domain::Domain;
use std::time::{Duration, Instant};

/// A finished run with everything needed to write its outputs.
#[derive(Debug)]
pub struct Simulation {
    pub config: RunConfig,
    pub domain: Domain,
    pub coupled: CoupledConfig,
    pub run: CoupledRun,
    pub picard: Option<PicardReport>,
    pub wall_time: Duration,
    pub threads: usize,
}

/// Runs `config` on a dedicated thread pool sized by its `threads` setting.
pub fn simulate(config: &RunConfig) -> CliResult<Simulation> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.resolved_threads()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::config("threads", e.to_string()))?;
    pool.install(|| {
        let start = Instant::now();
        let (domain, coupled) = config.coupled()?;
        log::info!(
            "{} nodes, dt = {:e}, {} steps, {:?}",
            domain.node_count(),
            coupled.dt,
            coupled.steps(),
            coupled.mode
        );
        let (run, picard) = run(&coupled, &domain)?;
        Ok(Simulation {
            config: config.clone(),
            domain,
            coupled,
            run,
            picard,
            wall_time: start.elapsed(),
            threads: rayon::current_num_threads(),
        })
    })
}
