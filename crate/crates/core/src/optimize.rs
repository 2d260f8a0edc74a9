//! Square-barrier absorbers found by minimising summed survival.
//!
//! The absorber is `N` equal-width complex barriers on `[0, total_length]`.
//! The objective is `f = Σₐ S(kₐ)` over the selected wavenumbers, minimised
//! over the `2N` real parameters by BFGS from several random starts.

use crate::error::{CapError, Result};
use crate::scatter::{BarrierChain, Wavenumber};
use crate::transfer::{survival_at, survival_gradient};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Heights of `N` equal-width barriers covering `[0, total_length]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierParams {
    total_length: f64,
    heights: Vec<Complex64>,
}

impl BarrierParams {
    pub fn new(total_length: f64, heights: Vec<Complex64>) -> Result<Self> {
        if heights.is_empty() {
            return Err(CapError::InvalidParameters("need at least one barrier".into()));
        }
        if !(total_length.is_finite() && total_length > 0.0) {
            return Err(CapError::InvalidParameters(format!(
                "total length must be positive, got {total_length}"
            )));
        }
        Ok(BarrierParams {
            total_length,
            heights,
        })
    }

    /// `n` transparent barriers.
    pub fn zeros(n: usize, total_length: f64) -> Result<Self> {
        BarrierParams::new(total_length, vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn n_barriers(&self) -> usize {
        self.heights.len()
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn heights(&self) -> &[Complex64] {
        &self.heights
    }

    pub fn width(&self) -> f64 {
        self.total_length / self.heights.len() as f64
    }

    pub fn chain(&self) -> BarrierChain {
        BarrierChain::uniform(0.0, self.total_length, &self.heights)
            .expect("validated on construction")
    }

    /// Flat parameter vector `(Re V₁, Im V₁, …, Re V_N, Im V_N)`.
    pub fn to_vec(&self) -> Vec<f64> {
        self.heights.iter().flat_map(|v| [v.re, v.im]).collect()
    }

    fn with_vec(&self, x: &[f64]) -> BarrierParams {
        BarrierParams {
            total_length: self.total_length,
            heights: x.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect(),
        }
    }
}

/// Wavenumbers at which survival is summed (unit weights).
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    k_points: Vec<Wavenumber>,
}

impl ObjectiveSpec {
    pub fn new(k_points: Vec<Wavenumber>) -> Result<Self> {
        if k_points.is_empty() {
            return Err(CapError::InvalidParameters("need at least one k point".into()));
        }
        for (i, k) in k_points.iter().enumerate() {
            if k_points[..i].contains(k) {
                return Err(CapError::DuplicateWavenumber(k.value()));
            }
        }
        Ok(ObjectiveSpec { k_points })
    }

    pub fn from_values(ks: &[f64]) -> Result<Self> {
        ObjectiveSpec::new(ks.iter().map(|&k| Wavenumber::new(k)).collect::<Result<_>>()?)
    }

    pub fn k_points(&self) -> &[Wavenumber] {
        &self.k_points
    }

    pub fn k_max(&self) -> f64 {
        self.k_points.iter().map(|k| k.value()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub seed: u64,
    /// Stop when the gradient norm falls below this.
    pub gradient_tolerance: f64,
    /// Stop when `f` has improved by less than this fraction over `stall_window` iterations.
    pub relative_f_tolerance: f64,
    pub stall_window: usize,
    pub max_iterations: usize,
    /// Keep `(iteration, f)` of the winning local search.
    pub record_trace: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 20,
            seed: 0,
            gradient_tolerance: 1e-8,
            relative_f_tolerance: 1e-12,
            stall_window: 5,
            max_iterations: 2000,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best_params: BarrierParams,
    pub best_f: f64,
    pub per_point_survivals: Vec<f64>,
    /// Local searches that started from a finite objective.
    pub restarts_used: usize,
    /// Whether the winning search met a stopping tolerance rather than
    /// running out of iterations or step length.
    pub converged: bool,
    pub trace: Option<Vec<(usize, f64)>>,
}

/// Survival at each k point.
pub fn per_point_survivals(params: &BarrierParams, spec: &ObjectiveSpec) -> Result<Vec<f64>> {
    let chain = params.chain();
    spec.k_points.iter().map(|&k| survival_at(&chain, k)).collect()
}

/// Summed survival `f = Σₐ S(kₐ)`.
pub fn objective(params: &BarrierParams, spec: &ObjectiveSpec) -> Result<f64> {
    Ok(per_point_survivals(params, spec)?.iter().sum())
}

/// Objective and its gradient in the order of [`BarrierParams::to_vec`].
pub fn objective_and_gradient(params: &BarrierParams, spec: &ObjectiveSpec) -> Result<(f64, Vec<f64>)> {
    let chain = params.chain();
    let mut f = 0.0;
    let mut grad = vec![0.0; 2 * params.n_barriers()];
    for &k in &spec.k_points {
        let (s, g) = survival_gradient(&chain, k)?;
        f += s;
        for (pair, gj) in grad.chunks_mut(2).zip(&g) {
            pair[0] += gj.d_re;
            pair[1] += gj.d_im;
        }
    }
    Ok((f, grad))
}

pub fn objective_gradient(params: &BarrierParams, spec: &ObjectiveSpec) -> Result<Vec<f64>> {
    objective_and_gradient(params, spec).map(|(_, g)| g)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct LocalResult {
    x: Vec<f64>,
    f: f64,
    converged: bool,
    trace: Vec<(usize, f64)>,
}

/// Finite objective and gradient, or `None` when the point is rejected.
fn evaluate(template: &BarrierParams, spec: &ObjectiveSpec, x: &[f64]) -> Option<(f64, Vec<f64>)> {
    let (f, g) = objective_and_gradient(&template.with_vec(x), spec).ok()?;
    (f.is_finite() && g.iter().all(|v| v.is_finite())).then_some((f, g))
}

/// BFGS with Armijo backtracking. Accepted iterates never increase `f`.
fn local_search(
    template: &BarrierParams,
    spec: &ObjectiveSpec,
    x0: Vec<f64>,
    config: &OptimizerConfig,
    step_scale: f64,
) -> Option<LocalResult> {
    let n = x0.len();
    let (mut f, mut g) = evaluate(template, spec, &x0)?;
    let mut x = x0;
    let mut h = identity(n);
    let mut fresh_h = true;
    let mut history = vec![f];
    let mut trace = vec![(0, f)];
    let mut converged = false;

    for iter in 1..=config.max_iterations {
        if dot(&g, &g).sqrt() < config.gradient_tolerance {
            converged = true;
            break;
        }
        let mut dir: Vec<f64> = h.iter().map(|row| -dot(row, &g)).collect();
        let mut slope = dot(&g, &dir);
        if !(slope < 0.0) {
            h = identity(n);
            fresh_h = true;
            dir = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let mut alpha = if fresh_h {
            (step_scale / dot(&dir, &dir).sqrt()).min(1.0)
        } else {
            1.0
        };

        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + alpha * d).collect();
            if let Some((ft, gt)) = evaluate(template, spec, &trial) {
                if ft <= f + 1e-4 * alpha * slope {
                    accepted = Some((trial, ft, gt));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((xn, fnew, gn)) = accepted else {
            if fresh_h {
                break;
            }
            h = identity(n);
            fresh_h = true;
            continue;
        };

        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if fresh_h {
                let scale = sy / dot(&y, &y);
                h.iter_mut().flatten().for_each(|v| *v *= scale);
            }
            bfgs_update(&mut h, &s, &y, sy);
            fresh_h = false;
        }
        x = xn;
        f = fnew;
        g = gn;
        history.push(f);
        trace.push((iter, f));

        let w = config.stall_window;
        if history.len() > w {
            let old = history[history.len() - 1 - w];
            if old - f <= config.relative_f_tolerance * old.abs() {
                converged = true;
                break;
            }
        }
    }
    Some(LocalResult {
        x,
        f,
        converged,
        trace,
    })
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Inverse-Hessian update `H ← (I − ρsyᵀ)H(I − ρysᵀ) + ρssᵀ`.
fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let rho = 1.0 / sy;
    let hy: Vec<f64> = h.iter().map(|row| dot(row, y)).collect();
    let yhy = dot(y, &hy);
    for i in 0..s.len() {
        for j in 0..s.len() {
            h[i][j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
        }
    }
}

/// Random starts: `Re Vⱼ ~ U[−k²ₘₐₓ, k²ₘₐₓ]`, `Im Vⱼ ~ U[−5k²ₘₐₓ, 0]`.
fn draw_starts(n: usize, spec: &ObjectiveSpec, config: &OptimizerConfig) -> Vec<Vec<f64>> {
    let k2 = spec.k_max().powi(2);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    (0..config.restarts)
        .map(|_| {
            (0..n)
                .flat_map(|_| [k2 * rng.gen_range(-1.0..=1.0), -5.0 * k2 * rng.gen_range(0.0..=1.0)])
                .collect::<Vec<f64>>()
        })
        .collect()
}

/// Multi-start minimisation of the summed survival over `n` equal barriers.
///
/// Restarts run in parallel; the result depends only on the seed.
pub fn optimize_barriers(
    n: usize,
    total_length: f64,
    spec: &ObjectiveSpec,
    config: &OptimizerConfig,
) -> Result<OptimizationResult> {
    let template = BarrierParams::zeros(n, total_length)?;
    if config.restarts == 0 {
        return Err(CapError::InvalidParameters("need at least one restart".into()));
    }
    let starts = draw_starts(n, spec, config);
    let step_scale = spec.k_max().powi(2);
    let results: Vec<Option<LocalResult>> = starts
        .into_par_iter()
        .map(|x0| local_search(&template, spec, x0, config, step_scale))
        .collect();

    let restarts_used = results.iter().filter(|r| r.is_some()).count();
    // first index wins ties
    let best = results
        .into_iter()
        .flatten()
        .reduce(|best, r| if r.f < best.f { r } else { best })
        .ok_or(CapError::NoFiniteStart)?;

    let best_params = template.with_vec(&best.x);
    let per_point_survivals = per_point_survivals(&best_params, spec)?;
    Ok(OptimizationResult {
        best_f: per_point_survivals.iter().sum(),
        per_point_survivals,
        best_params,
        restarts_used,
        converged: best.converged,
        trace: config.record_trace.then_some(best.trace),
    })
}
