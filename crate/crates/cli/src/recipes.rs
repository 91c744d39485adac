//! Canned runs that regenerate each figure dataset with one command.
//!
//! | recipe | content | alpha | r1 |
//! |---|---|---|---|
//! | fig1 | approach to the coexistence equilibrium, 10 years | 0.6e-4 | 0 |
//! | fig2 | r1 sweep, 0..0.35, 141 points | 0.6e-4 | swept |
//! | fig3 | strange attractor, 10 years after 20 discarded | 0.6e-4 | 0.35 |
//! | fig4 | limit cycle, 10 years after 20 discarded | 1e-4 | 0 |
//! | fig5 | r1 sweep, 0..0.35, 141 points | 1e-4 | swept |
//! | fig6 | strange attractor, 10 years after 20 discarded | 1e-4 | 0.25 |
//! | fig7 | periodic window, 10 years after 20 discarded | 1e-4 | 0.28 |
//! | fig8 | alpha sweep, 0.169e-4..1.2e-4, 42 points | swept | 0.25 |
//! | fig9 | alpha sweep, 0.169e-4..1.2e-4, 42 points | swept | 0.35 |
//!
//! Sweeps use continuation. Everything not listed (other parameters, x0,
//! solver settings, classification settings) comes from the resolved config.

use std::path::Path;

use borerdyn::analysis::{sweep, SweepParam, SweepSpec};
use borerdyn::integrate::{integrate_discard_transient, IntegrationSettings};

use crate::config::RunConfig;
use crate::{output, CliError};

const DISCARD: f64 = 7300.0;
const WINDOW: f64 = 3650.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Recipe {
    Trajectory {
        n: u8,
        alpha: f64,
        r1: f64,
        discard: f64,
    },
    Sweep {
        n: u8,
        fixed: f64,
        spec: SweepSpec,
    },
}

impl Recipe {
    pub fn from_name(name: &str) -> Option<Recipe> {
        let n: u8 = name.strip_prefix("fig")?.parse().ok()?;
        let r1_sweep = SweepSpec::new(SweepParam::R1, 0.0, 0.35, 141);
        let alpha_sweep = SweepSpec::new(SweepParam::Alpha, 0.169e-4, 1.2e-4, 42);
        let traj = |alpha, r1, discard| Recipe::Trajectory {
            n,
            alpha,
            r1,
            discard,
        };
        Some(match n {
            1 => traj(0.6e-4, 0.0, 0.0),
            2 => Recipe::Sweep {
                n,
                fixed: 0.6e-4,
                spec: r1_sweep,
            },
            3 => traj(0.6e-4, 0.35, DISCARD),
            4 => traj(1e-4, 0.0, DISCARD),
            5 => Recipe::Sweep {
                n,
                fixed: 1e-4,
                spec: r1_sweep,
            },
            6 => traj(1e-4, 0.25, DISCARD),
            7 => traj(1e-4, 0.28, DISCARD),
            8 => Recipe::Sweep {
                n,
                fixed: 0.25,
                spec: alpha_sweep,
            },
            9 => Recipe::Sweep {
                n,
                fixed: 0.35,
                spec: alpha_sweep,
            },
            _ => return None,
        })
    }

    /// The config actually used: `base` with the recipe's choices applied.
    pub fn config(&self, base: &RunConfig) -> RunConfig {
        let mut cfg = base.clone();
        match *self {
            Recipe::Trajectory { alpha, r1, .. } => {
                cfg.params = cfg.params.with_alpha(alpha).with_r1(r1);
                cfg.integration = IntegrationSettings {
                    t_end: cfg.integration.t_start + WINDOW,
                    ..cfg.integration
                };
            }
            Recipe::Sweep { fixed, spec, .. } => {
                cfg.params = match spec.param {
                    SweepParam::R1 => cfg.params.with_alpha(fixed),
                    SweepParam::Alpha => cfg.params.with_r1(fixed),
                };
                cfg.sweep = spec;
            }
        }
        cfg
    }
}

/// Run a recipe, writing `figN.csv`, `figN.config.json` and, for sweeps,
/// `figN.json`. Returns the file names written.
pub fn run(recipe: Recipe, base: &RunConfig, out: &Path) -> Result<Vec<String>, CliError> {
    let cfg = recipe.config(base);
    let mut files = Vec::new();
    match recipe {
        Recipe::Trajectory { n, discard, .. } => {
            let traj =
                integrate_discard_transient(&cfg.params, &cfg.x0, discard, WINDOW, &cfg.integration)?;
            let f = format!("fig{n}.csv");
            output::write_trajectory(&out.join(&f), &traj)?;
            files.push(f);
        }
        Recipe::Sweep { n, .. } => {
            let res = sweep(&cfg.params, &cfg.x0, &cfg.integration, &cfg.sweep, &cfg.analysis)?;
            let f = format!("fig{n}.csv");
            output::write_sweep(&out.join(&f), &res, cfg.analysis.var_index, cfg.analysis.cluster_tol)?;
            files.push(f);
            let f = format!("fig{n}.json");
            output::write_json(&out.join(&f), &output::sweep_summary(&res))?;
            files.push(f);
        }
    }
    let n = match recipe {
        Recipe::Trajectory { n, .. } | Recipe::Sweep { n, .. } => n,
    };
    let f = format!("fig{n}.config.json");
    output::write_json(&out.join(&f), &cfg)?;
    files.push(f);
    Ok(files)
}
