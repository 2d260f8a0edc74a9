//! Run configuration files (TOML).

use crate::error::CliError;
use cap_core::inversion::{TruncationPolicy, TruncationScope, DEFAULT_CAP, MIN_RESOLUTION};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const DEFAULT_SCAN_POINTS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Invert,
    Optimize,
    Baseline,
    Scan,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Invert => "invert",
            Mode::Optimize => "optimize",
            Mode::Baseline => "baseline",
            Mode::Scan => "scan",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional; must agree with the subcommand when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub k_targets: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invert: Option<InvertSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<TruncationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimize: Option<OptimizeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replay: Option<ReplaySection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvertSection {
    pub unit_lengths: Vec<f64>,
    #[serde(default)]
    pub wall_terminated: bool,
    #[serde(default = "yes")]
    pub refine: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    FirstUnit,
    AllButLast,
    AllUnits,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_survival: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope: Option<Scope>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_with_length: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSection {
    pub n_barriers: usize,
    pub total_length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradient_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_f_tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineSection {
    pub length: f64,
    pub bracket: [f64; 2],
    /// Defaults to `resolution × length`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slices: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub k_min: f64,
    pub k_max: f64,
    #[serde(default = "default_scan_points")]
    pub n_points: usize,
}

fn default_scan_points() -> usize {
    DEFAULT_SCAN_POINTS
}

/// Input of the `scan` subcommand: a profile or heights CSV written earlier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplaySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heights: Option<PathBuf>,
    /// Extra target wavenumbers, one per line under a `k` header.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_file: Option<PathBuf>,
    #[serde(default)]
    pub wall_terminated: bool,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(bad(format!("{name} must be positive and finite, got {v}")))
    }
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))
}

pub fn validate_k_list(name: &str, ks: &[f64]) -> Result<(), CliError> {
    for (i, &k) in ks.iter().enumerate() {
        positive(name, k)?;
        if ks[..i].contains(&k) {
            return Err(bad(format!("{name} contains {k} twice")));
        }
    }
    Ok(())
}

impl RunConfig {
    /// Checks everything the chosen mode needs before any work is done.
    pub fn validate(&self, mode: Mode) -> Result<(), CliError> {
        if let Some(m) = self.mode {
            if m != mode {
                return Err(bad(format!(
                    "config is for mode '{}' but the subcommand is '{}'",
                    m.name(),
                    mode.name()
                )));
            }
        }
        if mode != Mode::Scan && self.k_targets.is_empty() {
            return Err(bad("k_targets must not be empty"));
        }
        validate_k_list("k_targets", &self.k_targets)?;
        if let Some(res) = self.resolution {
            if res < MIN_RESOLUTION {
                return Err(bad(format!("resolution must be at least {MIN_RESOLUTION}, got {res}")));
            }
        }
        if let Some(scan) = &self.scan {
            if !(scan.k_min > 0.0 && scan.k_min < scan.k_max && scan.k_max.is_finite()) {
                return Err(bad(format!(
                    "scan needs 0 < k_min < k_max, got {} and {}",
                    scan.k_min, scan.k_max
                )));
            }
            if scan.n_points < 2 {
                return Err(bad("scan n_points must be at least 2"));
            }
        }
        self.truncation_policy()?;
        match mode {
            Mode::Invert => self.validate_invert(),
            Mode::Optimize => self.validate_optimize(),
            Mode::Baseline => self.validate_baseline(),
            Mode::Scan => self.validate_replay(),
        }
    }

    fn validate_invert(&self) -> Result<(), CliError> {
        let inv = self.invert.as_ref().ok_or_else(|| bad("missing [invert] section"))?;
        if inv.unit_lengths.len() != self.k_targets.len() {
            return Err(bad(format!(
                "{} k_targets but {} unit_lengths",
                self.k_targets.len(),
                inv.unit_lengths.len()
            )));
        }
        for &l in &inv.unit_lengths {
            positive("unit_lengths", l)?;
        }
        if inv.unit_lengths[0] != 1.0 {
            return Err(bad(format!(
                "the first unit length must be 1, got {}",
                inv.unit_lengths[0]
            )));
        }
        Ok(())
    }

    fn validate_optimize(&self) -> Result<(), CliError> {
        let opt = self.optimize.as_ref().ok_or_else(|| bad("missing [optimize] section"))?;
        if opt.n_barriers == 0 {
            return Err(bad("n_barriers must be at least 1"));
        }
        positive("total_length", opt.total_length)?;
        if opt.restarts == Some(0) {
            return Err(bad("restarts must be at least 1"));
        }
        if opt.max_iterations == Some(0) {
            return Err(bad("max_iterations must be at least 1"));
        }
        if let Some(t) = opt.gradient_tolerance {
            positive("gradient_tolerance", t)?;
        }
        if let Some(t) = opt.relative_f_tolerance {
            positive("relative_f_tolerance", t)?;
        }
        Ok(())
    }

    fn validate_baseline(&self) -> Result<(), CliError> {
        let base = self.baseline.as_ref().ok_or_else(|| bad("missing [baseline] section"))?;
        positive("length", base.length)?;
        let [lo, hi] = base.bracket;
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
            return Err(bad(format!("bracket needs 0 <= lo < hi, got [{lo}, {hi}]")));
        }
        if base.slices == Some(0) {
            return Err(bad("slices must be at least 1"));
        }
        Ok(())
    }

    fn validate_replay(&self) -> Result<(), CliError> {
        let rep = self.replay.as_ref().ok_or_else(|| bad("missing [replay] section"))?;
        match (&rep.profile, &rep.heights) {
            (Some(_), None) | (None, Some(_)) => {}
            _ => return Err(bad("[replay] needs exactly one of profile or heights")),
        }
        if self.k_targets.is_empty() && rep.k_file.is_none() && self.scan.is_none() {
            return Err(bad("nothing to evaluate: give k_targets, a k_file or a [scan] section"));
        }
        Ok(())
    }

    pub fn truncation_policy(&self) -> Result<TruncationPolicy, CliError> {
        let default = TruncationPolicy::default();
        let Some(t) = &self.truncation else {
            return Ok(default);
        };
        let scope = match t.scope {
            None => default.scope,
            Some(Scope::FirstUnit) => TruncationScope::FirstUnit,
            Some(Scope::AllButLast) => TruncationScope::AllButLast,
            Some(Scope::AllUnits) => TruncationScope::AllUnits,
        };
        TruncationPolicy::new(
            t.cap.unwrap_or(DEFAULT_CAP),
            t.target_survival,
            scope,
            t.scale_with_length.unwrap_or(default.scale_with_length),
        )
        .map_err(|e| bad(e.to_string()))
    }

    /// Scan grid: the `[scan]` section, or 0.5·min(k) to 2·max(k) when absent.
    pub fn scan_grid(&self) -> Vec<f64> {
        let (lo, hi, n) = match &self.scan {
            Some(s) => (s.k_min, s.k_max, s.n_points),
            None => {
                let min = self.k_targets.iter().copied().fold(f64::INFINITY, f64::min);
                let max = self.k_targets.iter().copied().fold(0.0, f64::max);
                if self.k_targets.is_empty() {
                    return Vec::new();
                }
                (0.5 * min, 2.0 * max, DEFAULT_SCAN_POINTS)
            }
        };
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }
}
