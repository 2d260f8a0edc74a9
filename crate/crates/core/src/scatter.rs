//! Core value types shared by every design and evaluation routine.

use crate::error::{CapError, Result};
use num_complex::Complex64;

/// Dimensionless incident wavenumber, always strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Wavenumber(f64);

impl Wavenumber {
    pub fn new(k: f64) -> Result<Self> {
        if k.is_finite() && k > 0.0 {
            Ok(Wavenumber(k))
        } else {
            Err(CapError::InvalidWavenumber(k))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Wavenumber {
    type Error = CapError;

    fn try_from(k: f64) -> Result<Self> {
        Wavenumber::new(k)
    }
}

/// Constant complex potential over a finite width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareBarrier {
    width: f64,
    pub height: Complex64,
}

impl SquareBarrier {
    pub fn new(width: f64, height: Complex64) -> Result<Self> {
        if width.is_finite() && width > 0.0 {
            Ok(SquareBarrier { width, height })
        } else {
            Err(CapError::InvalidWidth(width))
        }
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.width
    }
}

/// Contiguous run of square barriers starting at `start`.
///
/// Segment `i + 1` begins where segment `i` ends, so positions are implied by
/// the widths. This is the representation every evaluation goes through.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierChain {
    start: f64,
    segments: Vec<SquareBarrier>,
}

impl BarrierChain {
    pub fn new(start: f64, segments: Vec<SquareBarrier>) -> Self {
        BarrierChain { start, segments }
    }

    /// Empty chain anchored at `start`, to be grown with [`BarrierChain::push`].
    pub fn empty(start: f64) -> Self {
        BarrierChain {
            start,
            segments: Vec::new(),
        }
    }

    /// Chain of `heights.len()` equal-width barriers covering `[start, start + total_length]`.
    pub fn uniform(start: f64, total_length: f64, heights: &[Complex64]) -> Result<Self> {
        if heights.is_empty() {
            return Err(CapError::EmptyChain);
        }
        let width = total_length / heights.len() as f64;
        let segments = heights
            .iter()
            .map(|&v| SquareBarrier::new(width, v))
            .collect::<Result<Vec<_>>>()?;
        Ok(BarrierChain { start, segments })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn segments(&self) -> &[SquareBarrier] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(|s| s.width).sum()
    }

    /// Right edge of the last segment.
    pub fn end(&self) -> f64 {
        self.positioned().last().map_or(self.start, |(x, s)| x + s.width)
    }

    pub fn push(&mut self, barrier: SquareBarrier) {
        self.segments.push(barrier);
    }

    /// Appends `other`'s segments after the current right edge; `other.start` is ignored.
    pub fn extend_from(&mut self, other: &BarrierChain) {
        self.segments.extend_from_slice(&other.segments);
    }

    /// Concatenation of `self` followed by `other` (placed at `self.end()`).
    pub fn concat(&self, other: &BarrierChain) -> BarrierChain {
        let mut out = self.clone();
        out.extend_from(other);
        out
    }

    pub fn translated(&self, shift: f64) -> BarrierChain {
        BarrierChain {
            start: self.start + shift,
            segments: self.segments.clone(),
        }
    }

    /// Iterates `(left_edge, segment)` pairs.
    pub fn positioned(&self) -> impl Iterator<Item = (f64, &SquareBarrier)> + '_ {
        let mut x = self.start;
        self.segments.iter().map(move |s| {
            let left = x;
            x += s.width;
            (left, s)
        })
    }

    /// True when every height has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.segments.iter().all(|s| s.height.im == 0.0)
    }
}

/// Complex potential sampled on a uniform grid over `[start, start + length]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPotential {
    start: f64,
    length: f64,
    values: Vec<Complex64>,
}

impl SampledPotential {
    pub fn new(start: f64, length: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(CapError::InvalidSamples(format!(
                "length must be positive, got {length}"
            )));
        }
        if values.len() < 2 {
            return Err(CapError::InvalidSamples(format!(
                "need at least 2 samples, got {}",
                values.len()
            )));
        }
        Ok(SampledPotential {
            start,
            length,
            values,
        })
    }

    /// Samples `f` at `samples` evenly spaced points including both ends.
    pub fn from_fn(
        start: f64,
        length: f64,
        samples: usize,
        f: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        let n = samples.max(1);
        let step = length / (n.saturating_sub(1).max(1)) as f64;
        let values = (0..samples).map(|j| f(start + j as f64 * step)).collect();
        SampledPotential::new(start, length, values)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.values.len() - 1) as f64
    }

    /// Linear interpolation between grid samples; clamps outside the support.
    ///
    /// A position that lands on a grid point returns that sample unchanged.
    pub fn at(&self, x: f64) -> Complex64 {
        let last = self.values.len() - 1;
        let s = ((x - self.start) / self.spacing()).clamp(0.0, last as f64);
        let j = (s.floor() as usize).min(last);
        let frac = s - j as f64;
        if frac == 0.0 || j == last {
            self.values[j]
        } else {
            self.values[j] * (1.0 - frac) + self.values[j + 1] * frac
        }
    }
}

/// The four scattering amplitudes at one wavenumber, global-origin phases.
///
/// For left incidence the wave is `e^{ikx} + r_left·e^{−ikx}` on the left and
/// `t_left·e^{ikx}` on the right; right incidence is the mirror image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringAmplitudes {
    pub k: Wavenumber,
    pub t_left: Complex64,
    pub t_right: Complex64,
    pub r_left: Complex64,
    pub r_right: Complex64,
}

impl ScatteringAmplitudes {
    /// Amplitudes of an empty region: full transmission, no reflection.
    pub fn transparent(k: Wavenumber) -> Self {
        ScatteringAmplitudes {
            k,
            t_left: Complex64::new(1.0, 0.0),
            t_right: Complex64::new(1.0, 0.0),
            r_left: Complex64::new(0.0, 0.0),
            r_right: Complex64::new(0.0, 0.0),
        }
    }

    pub fn reflection_probability(&self) -> f64 {
        self.r_left.norm_sqr()
    }

    pub fn transmission_probability(&self) -> f64 {
        self.t_left.norm_sqr()
    }

    pub fn survival(&self) -> f64 {
        survival(self)
    }
}

/// Probability `|r_left|² + |t_left|²` that a left-incident particle is not
/// absorbed. Not clamped: emitting potentials can give values above one.
pub fn survival(amps: &ScatteringAmplitudes) -> f64 {
    amps.r_left.norm_sqr() + amps.t_left.norm_sqr()
}
