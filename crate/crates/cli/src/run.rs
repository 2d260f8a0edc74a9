//! The four run modes. Each computes everything first and returns the files
//! to write, so a failed run leaves nothing behind.

use crate::config::{Mode, RunConfig, Scope, TruncationSection};
use crate::error::CliError;
use crate::files;
use cap_core::baseline::{optimize_eta_with, QuadraticAbsorber};
use cap_core::inversion::{
    build_composite_with, survival_of, CompositeOptions, TruncationPolicy, TruncationScope,
    DEFAULT_RESOLUTION,
};
use cap_core::optimize::{optimize_barriers, ObjectiveSpec, OptimizerConfig};
use cap_core::transfer::{amplitudes, reflect_with_wall};
use cap_core::{BarrierChain, Wavenumber};
use serde::Serialize;
use std::path::Path;

pub const DEFAULT_SEED: u64 = 0;

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub resolution: Option<usize>,
}

pub struct Outcome {
    pub files: Vec<(&'static str, Vec<u8>)>,
    /// One line per target for the console.
    pub report: Vec<String>,
}

#[derive(Debug, Default, Serialize)]
struct Results {
    k_targets: Vec<f64>,
    survivals: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    best_f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    restarts_used: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    f_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    slices: Option<usize>,
}

#[derive(Serialize)]
struct Summary<'a> {
    tool: &'static str,
    version: &'static str,
    mode: &'static str,
    seed: u64,
    resolution: usize,
    results: Results,
    config: &'a RunConfig,
}

fn wavenumbers(ks: &[f64]) -> Result<Vec<Wavenumber>, CliError> {
    Ok(ks.iter().map(|&k| Wavenumber::new(k)).collect::<Result<_, _>>()?)
}

/// `[k, survival, R, T]` for an open chain or one closed by a wall.
fn scan_row(chain: &BarrierChain, k: f64, wall: bool) -> Result<[f64; 4], CliError> {
    let wn = Wavenumber::new(k)?;
    if wall {
        let r = reflect_with_wall(chain, wn)?.norm_sqr();
        Ok([k, r, r, 0.0])
    } else {
        let a = amplitudes(chain, wn)?;
        let (r, t) = (a.reflection_probability(), a.transmission_probability());
        Ok([k, a.survival(), r, t])
    }
}

fn scan(chain: &BarrierChain, grid: &[f64], wall: bool) -> Result<Vec<[f64; 4]>, CliError> {
    grid.iter().map(|&k| scan_row(chain, k, wall)).collect()
}

fn survivals(chain: &BarrierChain, ks: &[f64], wall: bool) -> Result<Vec<f64>, CliError> {
    ks.iter()
        .map(|&k| Ok(survival_of(chain, Wavenumber::new(k)?, wall)?))
        .collect()
}

/// The effective policy, so the summary reproduces the run without defaults.
fn truncation_echo(p: &TruncationPolicy) -> TruncationSection {
    TruncationSection {
        cap: Some(p.cap),
        target_survival: p.target_survival,
        scope: Some(match p.scope {
            TruncationScope::FirstUnit => Scope::FirstUnit,
            TruncationScope::AllButLast => Scope::AllButLast,
            TruncationScope::AllUnits => Scope::AllUnits,
        }),
        scale_with_length: Some(p.scale_with_length),
    }
}

fn report_lines(ks: &[f64], s: &[f64]) -> Vec<String> {
    ks.iter()
        .zip(s)
        .map(|(k, s)| format!("S({k}) = {s:.6e}"))
        .collect()
}

pub fn run(mode: Mode, config: &RunConfig, base_dir: &Path, overrides: Overrides) -> Result<Outcome, CliError> {
    config.validate(mode)?;
    let seed = overrides.seed.or(config.seed).unwrap_or(DEFAULT_SEED);
    let resolution = overrides.resolution.or(config.resolution).unwrap_or(DEFAULT_RESOLUTION);
    if let Some(res) = overrides.resolution {
        let mut probe = config.clone();
        probe.resolution = Some(res);
        probe.validate(mode)?;
    }
    let mut echo = config.clone();
    echo.mode = Some(mode);
    echo.seed = Some(seed);
    echo.resolution = Some(resolution);

    let mut results = Results {
        k_targets: config.k_targets.clone(),
        ..Results::default()
    };
    let mut files = Vec::new();
    let grid = config.scan_grid();

    match mode {
        Mode::Invert => {
            let inv = config.invert.as_ref().expect("validated");
            let options = CompositeOptions {
                resolution,
                policy: config.truncation_policy()?,
                wall_terminated: inv.wall_terminated,
                refine: inv.refine,
            };
            echo.truncation = Some(truncation_echo(&options.policy));
            let comp = build_composite_with(&wavenumbers(&config.k_targets)?, &inv.unit_lengths, &options)?;
            let wall = comp.wall_terminated;
            results.survivals = survivals(&comp.chain, &config.k_targets, wall)?;
            results.cap = Some(comp.cap);
            files.push(("profile.csv", files::profile_csv(&comp.chain)));
            files.push(("scan.csv", files::scan_csv(&scan(&comp.chain, &grid, wall)?)));
        }
        Mode::Optimize => {
            let opt = config.optimize.as_ref().expect("validated");
            let defaults = OptimizerConfig::default();
            let oc = OptimizerConfig {
                restarts: opt.restarts.unwrap_or(defaults.restarts),
                seed,
                gradient_tolerance: opt.gradient_tolerance.unwrap_or(defaults.gradient_tolerance),
                relative_f_tolerance: opt.relative_f_tolerance.unwrap_or(defaults.relative_f_tolerance),
                max_iterations: opt.max_iterations.unwrap_or(defaults.max_iterations),
                ..defaults
            };
            let spec = ObjectiveSpec::from_values(&config.k_targets)?;
            let res = optimize_barriers(opt.n_barriers, opt.total_length, &spec, &oc)?;
            let chain = res.best_params.chain();
            results.survivals = survivals(&chain, &config.k_targets, false)?;
            results.best_f = Some(res.best_f);
            results.restarts_used = Some(res.restarts_used);
            results.converged = Some(res.converged);
            files.push((
                "heights.csv",
                files::heights_csv(res.best_params.heights(), res.best_params.width()),
            ));
            files.push(("scan.csv", files::scan_csv(&scan(&chain, &grid, false)?)));
        }
        Mode::Baseline => {
            let base = config.baseline.as_ref().expect("validated");
            let slices = base
                .slices
                .unwrap_or_else(|| ((resolution as f64 * base.length).round() as usize).max(100));
            let spec = ObjectiveSpec::from_values(&config.k_targets)?;
            let opt = optimize_eta_with(&spec, base.length, (base.bracket[0], base.bracket[1]), slices)?;
            let chain = QuadraticAbsorber::new(opt.eta, base.length, slices)?.chain()?;
            results.survivals = survivals(&chain, &config.k_targets, false)?;
            results.eta_star = Some(opt.eta);
            results.f_star = Some(opt.f);
            results.slices = Some(slices);
            files.push(("eta_scan.csv", files::eta_scan_csv(&opt.scan)));
            files.push(("profile.csv", files::profile_csv(&chain)));
            files.push(("scan.csv", files::scan_csv(&scan(&chain, &grid, false)?)));
        }
        Mode::Scan => {
            let rep = config.replay.as_ref().expect("validated");
            let chain = match (&rep.profile, &rep.heights) {
                (Some(p), _) => files::read_profile(&base_dir.join(p))?,
                (None, Some(h)) => files::read_heights(&base_dir.join(h))?,
                (None, None) => unreachable!("validated"),
            };
            let mut ks = config.k_targets.clone();
            if let Some(kf) = &rep.k_file {
                ks.extend(files::read_k_file(&base_dir.join(kf))?);
                crate::config::validate_k_list("k_file", &ks)?;
            }
            results.survivals = survivals(&chain, &ks, rep.wall_terminated)?;
            results.k_targets = ks;
            if !grid.is_empty() {
                files.push(("scan.csv", files::scan_csv(&scan(&chain, &grid, rep.wall_terminated)?)));
            }
        }
    }

    let report = report_lines(&results.k_targets, &results.survivals);
    let summary = Summary {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        mode: mode.name(),
        seed,
        resolution,
        results,
        config: &echo,
    };
    let text = toml::to_string(&summary).map_err(|e| CliError::Output(e.to_string()))?;
    files.push(("summary.toml", text.into_bytes()));
    Ok(Outcome { files, report })
}
