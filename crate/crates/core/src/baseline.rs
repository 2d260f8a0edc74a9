//! The conventional `V = −iηx²` absorber, used as a reference.

use crate::error::{CapError, Result};
use crate::optimize::ObjectiveSpec;
use crate::scatter::{BarrierChain, SquareBarrier, Wavenumber};
use crate::transfer::survival_at;
use num_complex::Complex64;

/// Slices used by [`optimize_eta`].
pub const DEFAULT_SLICES: usize = 2000;

/// Points of the coarse η scan.
pub const SCAN_POINTS: usize = 200;

/// Lowest grid point above zero, relative to the upper bracket end, when the
/// bracket starts at η = 0 (a log grid cannot reach zero).
const ZERO_BRACKET_SPAN: f64 = 1e-4;

/// `−iηx²` on `[0, length]`, evaluated as `slices` midpoint-sampled barriers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticAbsorber {
    pub eta: f64,
    pub length: f64,
    pub slices: usize,
}

impl QuadraticAbsorber {
    pub fn new(eta: f64, length: f64, slices: usize) -> Result<Self> {
        if !(eta.is_finite() && eta >= 0.0) {
            return Err(CapError::InvalidParameters(format!(
                "eta must be non-negative, got {eta}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(CapError::InvalidParameters(format!(
                "length must be positive, got {length}"
            )));
        }
        if slices == 0 {
            return Err(CapError::InvalidParameters("need at least one slice".into()));
        }
        Ok(QuadraticAbsorber { eta, length, slices })
    }

    pub fn chain(&self) -> Result<BarrierChain> {
        let width = self.length / self.slices as f64;
        let segments = (0..self.slices)
            .map(|i| {
                let x = (i as f64 + 0.5) * width;
                SquareBarrier::new(width, Complex64::new(0.0, -self.eta * x * x))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BarrierChain::new(0.0, segments))
    }
}

pub fn baseline_survival(absorber: &QuadraticAbsorber, k: Wavenumber) -> Result<f64> {
    survival_at(&absorber.chain()?, k)
}

/// Summed survival of the absorber over the spec's k points.
pub fn baseline_objective(absorber: &QuadraticAbsorber, spec: &ObjectiveSpec) -> Result<f64> {
    let chain = absorber.chain()?;
    spec.k_points().iter().map(|&k| survival_at(&chain, k)).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtaOptimum {
    pub eta: f64,
    pub f: f64,
    /// Coarse scan as `(η, f)` pairs, with the refined optimum inserted in order.
    pub scan: Vec<(f64, f64)>,
}

/// Log-spaced grid over the bracket; a zero lower end is kept as a separate point.
fn scan_grid(lo: f64, hi: f64) -> Vec<f64> {
    let (first, count) = if lo == 0.0 {
        (hi * ZERO_BRACKET_SPAN, SCAN_POINTS - 1)
    } else {
        (lo, SCAN_POINTS)
    };
    let (a, b) = (first.ln(), hi.ln());
    let logs = (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp());
    let mut grid: Vec<f64> = if lo == 0.0 { vec![0.0] } else { Vec::new() };
    grid.extend(logs);
    grid
}

/// η minimising the summed survival over `[lo, hi]` at [`DEFAULT_SLICES`].
pub fn optimize_eta(spec: &ObjectiveSpec, length: f64, bracket: (f64, f64)) -> Result<EtaOptimum> {
    optimize_eta_with(spec, length, bracket, DEFAULT_SLICES)
}

/// Coarse log scan followed by golden-section refinement between the
/// neighbours of the best grid point.
pub fn optimize_eta_with(
    spec: &ObjectiveSpec,
    length: f64,
    bracket: (f64, f64),
    slices: usize,
) -> Result<EtaOptimum> {
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
        return Err(CapError::InvalidBracket(lo, hi));
    }
    let f = |eta: f64| baseline_objective(&QuadraticAbsorber::new(eta, length, slices)?, spec);

    let grid = scan_grid(lo, hi);
    let scan = grid
        .iter()
        .map(|&eta| Ok((eta, f(eta)?)))
        .collect::<Result<Vec<_>>>()?;
    let best = scan
        .iter()
        .enumerate()
        .fold(0, |b, (i, p)| if p.1 < scan[b].1 { i } else { b });
    if best == 0 || best == scan.len() - 1 {
        return Err(CapError::BracketTooNarrow(scan[best].0));
    }

    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (scan[best - 1].0, scan[best + 1].0);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > 1e-10 * b {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    let (eta, f_star) = [(c, fc), (d, fd), scan[best]]
        .into_iter()
        .fold((f64::NAN, f64::INFINITY), |acc, p| if p.1 < acc.1 { p } else { acc });
    let mut scan = scan;
    if let Err(at) = scan.binary_search_by(|p| p.0.total_cmp(&eta)) {
        scan.insert(at, (eta, f_star));
    }
    Ok(EtaOptimum {
        eta,
        f: f_star,
        scan,
    })
}
