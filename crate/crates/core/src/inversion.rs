//! Perfectly absorbing composite potentials by polynomial inversion.
//!
//! Each unit prescribes a polynomial wavefunction `Ψ(y)` on its scaled
//! support `y = (x − z)/L ∈ [0, 1]` and reads the potential back from the
//! stationary equation, `V = k² + ψ''/ψ`. The first unit swallows an
//! incident wave completely at `k₁`: `Ψ(0) = 1`, `Ψ'(0) = ik̂`, and `Ψ` and
//! `Ψ'` vanish at the right edge. Every later unit is placed to the right of
//! the composite built so far and is given exactly the left reflection that
//! cancels the composite's reflection at its own design wavenumber, while
//! transmitting nothing. Absorption at earlier wavenumbers is untouched
//! because the composite already transmits nothing there.
//!
//! The potentials diverge where `Ψ` vanishes, so samples are clamped
//! ([`TruncationPolicy`]) before the unit is sliced into square barriers.

use crate::compose::required_r2;
use crate::error::{CapError, Result};
use crate::scatter::{BarrierChain, SampledPotential, ScatteringAmplitudes, Wavenumber};
use crate::transfer::{amplitudes, discretize, reflect_with_wall};
use num_complex::Complex64;

/// Default clamp on `|Re V|` and `|Im V|`.
pub const DEFAULT_CAP: f64 = 1e3;

/// Default number of slices per unit length.
pub const DEFAULT_RESOLUTION: usize = 2000;

/// Lowest resolution accepted by [`build_composite`].
pub const MIN_RESOLUTION: usize = 100;

/// Every unit is sliced at least this finely, however short it is.
pub const MIN_UNIT_SLICES: usize = 200;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// One polynomial-designed potential unit on `[start, start + length]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InversionUnit {
    design_k: Wavenumber,
    start: f64,
    length: f64,
    coefficients: Vec<Complex64>,
    r_target: Complex64,
}

impl InversionUnit {
    pub fn design_k(&self) -> Wavenumber {
        self.design_k
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn end(&self) -> f64 {
        self.start + self.length
    }

    /// Coefficients `b₀, b₁, …` of `Ψ(y) = Σ bⱼ yʲ`.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// Local-frame left reflection the unit realises at its design wavenumber.
    pub fn r_target(&self) -> Complex64 {
        self.r_target
    }

    /// Quadratic units end on a hard wall.
    pub fn is_wall_terminated(&self) -> bool {
        self.coefficients.len() == 3
    }

    /// Scaled wavenumber `k̂ = L·k`.
    pub fn local_wavenumber(&self) -> f64 {
        self.length * self.design_k.value()
    }

    pub fn psi(&self, y: f64) -> Complex64 {
        self.coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &b| acc * y + b)
    }

    pub fn d_psi(&self, y: f64) -> Complex64 {
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, (j, &b)| acc * y + b * j as f64)
    }

    pub fn d2_psi(&self, y: f64) -> Complex64 {
        self.coefficients
            .iter()
            .enumerate()
            .skip(2)
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, (j, &b)| {
                acc * y + b * (j * (j - 1)) as f64
            })
    }

    /// Unclamped potential `k² + Ψ''(y)/(L²·Ψ(y))` at global position `x`.
    ///
    /// Returns `None` at an exact zero of `Ψ`.
    pub fn potential_at(&self, x: f64) -> Option<Complex64> {
        let y = (x - self.start) / self.length;
        let psi = self.psi(y);
        if psi.norm() < 1e-150 {
            return None;
        }
        let k = self.design_k.value();
        Some(k * k + self.d2_psi(y) / (psi * (self.length * self.length)))
    }
}

/// `Ψ(0) = 1 + r`, `Ψ'(0) = ik̂(1 − r)`, `Ψ(1) = Ψ'(1) = 0`.
fn cubic_coefficients(r: Complex64, k_hat: f64) -> Vec<Complex64> {
    let ik = I * k_hat;
    vec![
        1.0 + r,
        ik * (1.0 - r),
        -(3.0 + 2.0 * ik) - r * (3.0 - 2.0 * ik),
        (2.0 + ik) + r * (2.0 - ik),
    ]
}

/// `Ψ(0) = 1 + r`, `Ψ'(0) = ik̂(1 − r)`, `Ψ(1) = 0`.
fn quadratic_coefficients(r: Complex64, k_hat: f64) -> Vec<Complex64> {
    let b0 = 1.0 + r;
    let b1 = I * k_hat * (1.0 - r);
    vec![b0, b1, -(b0 + b1)]
}

fn check_support(z: f64, length: f64) -> Result<()> {
    if !(z.is_finite() && length.is_finite() && length > 0.0) {
        return Err(CapError::InvalidParameters(format!(
            "unit support must be finite with positive length, got z = {z}, L = {length}"
        )));
    }
    Ok(())
}

/// First unit on `[0, 1]`, perfectly absorbing at `k1`.
pub fn build_first_unit(k1: Wavenumber) -> InversionUnit {
    InversionUnit {
        design_k: k1,
        start: 0.0,
        length: 1.0,
        coefficients: cubic_coefficients(Complex64::new(0.0, 0.0), k1.value()),
        r_target: Complex64::new(0.0, 0.0),
    }
}

/// Local-frame reflection the next unit must realise: the back-solved global
/// value rotated into the frame whose origin is the unit's left edge.
fn local_target(composite_amps: &ScatteringAmplitudes, z: f64, k_new: Wavenumber) -> Result<Complex64> {
    if (composite_amps.k.value() - k_new.value()).abs() > 1e-12 * k_new.value() {
        return Err(CapError::MismatchedWavenumber(
            composite_amps.k.value(),
            k_new.value(),
        ));
    }
    let global = required_r2(composite_amps)?;
    Ok(global * Complex64::from_polar(1.0, -2.0 * k_new.value() * z))
}

/// Cubic unit on `[z, z + length]` that completes absorption at `k_new`
/// behind a composite whose amplitudes at `k_new` are `composite_amps`.
pub fn build_next_unit(
    composite_amps: &ScatteringAmplitudes,
    z: f64,
    length: f64,
    k_new: Wavenumber,
) -> Result<InversionUnit> {
    check_support(z, length)?;
    let r = local_target(composite_amps, z, k_new)?;
    Ok(InversionUnit {
        design_k: k_new,
        start: z,
        length,
        coefficients: cubic_coefficients(r, length * k_new.value()),
        r_target: r,
    })
}

/// Quadratic unit ending on a hard wall at `z + length`; only `Ψ(1) = 0` is
/// imposed at the right edge.
pub fn build_wall_unit(
    composite_amps: &ScatteringAmplitudes,
    z: f64,
    length: f64,
    k_new: Wavenumber,
) -> Result<InversionUnit> {
    check_support(z, length)?;
    let r = local_target(composite_amps, z, k_new)?;
    Ok(InversionUnit {
        design_k: k_new,
        start: z,
        length,
        coefficients: quadratic_coefficients(r, length * k_new.value()),
        r_target: r,
    })
}

/// Which units of a composite the clamp applies to.
///
/// An unclamped unit ends in an impenetrable `1/(1 − y)²` wall, so every
/// unit that must pass waves on to a later unit has to be clamped. The last
/// unit has nothing behind it and can keep its full profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TruncationScope {
    FirstUnit,
    /// Every unit except the last is clamped.
    #[default]
    AllButLast,
    AllUnits,
}

/// Clamp applied to sampled inversion potentials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    /// Bound on `|Re V|` and `|Im V|`.
    pub cap: f64,
    /// When set, [`build_composite`] replaces `cap` by the value that makes
    /// the first unit's survival at its design wavenumber equal this target.
    pub target_survival: Option<f64>,
    pub scope: TruncationScope,
    /// Clamp `L²·V` instead of `V`, i.e. apply `cap` in each unit's own scaled variables.
    pub scale_with_length: bool,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            cap: DEFAULT_CAP,
            target_survival: None,
            scope: TruncationScope::AllButLast,
            scale_with_length: true,
        }
    }
}

impl TruncationPolicy {
    pub fn new(
        cap: f64,
        target_survival: Option<f64>,
        scope: TruncationScope,
        scale_with_length: bool,
    ) -> Result<Self> {
        let policy = TruncationPolicy {
            cap,
            target_survival,
            scope,
            scale_with_length,
        };
        policy.validate()?;
        Ok(policy)
    }

    /// Default policy with a different clamp.
    pub fn with_cap(cap: f64) -> Result<Self> {
        let policy = TruncationPolicy {
            cap,
            ..TruncationPolicy::default()
        };
        policy.validate()?;
        Ok(policy)
    }

    /// No effective clamp; only exact zeros of `Ψ` are mapped to finite values.
    pub fn unclamped() -> Self {
        TruncationPolicy {
            cap: f64::MAX,
            target_survival: None,
            scope: TruncationScope::FirstUnit,
            scale_with_length: false,
        }
    }

    /// Clamp on `|Re V|` and `|Im V|` for a unit of the given length.
    pub fn cap_for_length(&self, length: f64) -> f64 {
        if self.scale_with_length {
            self.cap / (length * length)
        } else {
            self.cap
        }
    }

    /// Whether unit `index` of a composite whose last unit is `last` is clamped.
    pub fn applies_to(&self, index: usize, last: usize) -> bool {
        match self.scope {
            TruncationScope::FirstUnit => index == 0,
            TruncationScope::AllButLast => index == 0 || index < last,
            TruncationScope::AllUnits => true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cap > 0.0) || self.cap.is_nan() {
            return Err(CapError::InvalidTruncation(format!(
                "cap must be positive, got {}",
                self.cap
            )));
        }
        if let Some(t) = self.target_survival {
            if !(t > 0.0 && t < 1.0) {
                return Err(CapError::InvalidTruncation(format!(
                    "target survival must lie in (0, 1), got {t}"
                )));
            }
        }
        Ok(())
    }
}

fn clamp_sample(unit: &InversionUnit, x: f64, cap: f64) -> Complex64 {
    let v = unit.potential_at(x).unwrap_or_else(|| {
        // exact zero of Ψ: the potential diverges with the sign of Ψ''
        let num = unit.d2_psi((x - unit.start) / unit.length);
        let k = unit.design_k.value();
        Complex64::new(k * k + cap * num.re.signum(), cap * num.im.signum())
    });
    let part = |p: f64| if p.is_nan() { cap } else { p.clamp(-cap, cap) };
    Complex64::new(part(v.re), part(v.im))
}

/// Potential of `unit` on `samples` uniform grid points over its support,
/// real and imaginary parts clamped to `±policy.cap`.
pub fn sample_unit(
    unit: &InversionUnit,
    samples: usize,
    policy: &TruncationPolicy,
) -> Result<SampledPotential> {
    policy.validate()?;
    if samples < 2 {
        return Err(CapError::InvalidSamples(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    SampledPotential::from_fn(unit.start, unit.length, samples, |x| {
        clamp_sample(unit, x, policy.cap)
    })
}

/// Slices `unit` into `slices` square barriers at exact midpoint values.
///
/// The sampling grid has `2·slices + 1` points so every slice midpoint is a
/// grid point and no interpolation is involved.
pub fn discretize_unit(unit: &InversionUnit, slices: usize, policy: &TruncationPolicy) -> Result<BarrierChain> {
    let sampled = sample_unit(unit, 2 * slices.max(1) + 1, policy)?;
    discretize(&sampled, slices)
}

/// Survival at `k` of a chain that is either open or closed by a hard wall.
pub fn survival_of(chain: &BarrierChain, k: Wavenumber, wall_terminated: bool) -> Result<f64> {
    if wall_terminated {
        Ok(reflect_with_wall(chain, k)?.norm_sqr())
    } else {
        Ok(amplitudes(chain, k)?.survival())
    }
}

/// Slices given to a unit of `length` at `resolution` slices per unit length.
pub fn unit_slices(length: f64, resolution: usize) -> usize {
    ((length * resolution as f64).round() as usize).max(MIN_UNIT_SLICES)
}

/// Clamp that brings the first unit's survival at its design wavenumber to `target`.
///
/// Survival falls as the clamp is raised, so the cap is bisected in log scale.
pub fn cap_for_target_survival(
    unit: &InversionUnit,
    slices: usize,
    target: f64,
    wall_terminated: bool,
) -> Result<f64> {
    let k = unit.design_k;
    let survival_for = |log_cap: f64| -> Result<f64> {
        let policy = TruncationPolicy::with_cap(10f64.powf(log_cap))?;
        survival_of(&discretize_unit(unit, slices, &policy)?, k, wall_terminated)
    };
    let (mut lo, mut hi) = (0.0f64, 8.0f64);
    let (s_lo, s_hi) = (survival_for(lo)?, survival_for(hi)?);
    if !(target <= s_lo && target >= s_hi) {
        return Err(CapError::UnreachableTruncation {
            target,
            low: s_hi,
            high: s_lo,
        });
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if survival_for(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(10f64.powf(0.5 * (lo + hi)))
}

/// A composite of inversion units and its square-barrier discretisation.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositePotential {
    pub units: Vec<InversionUnit>,
    pub chain: BarrierChain,
    /// Number of slices of each unit, in order.
    pub unit_slices: Vec<usize>,
    /// Clamp applied to the first unit (found by search in target-survival mode).
    pub cap: f64,
    pub wall_terminated: bool,
}

impl CompositePotential {
    pub fn survival(&self, k: Wavenumber) -> Result<f64> {
        survival_of(&self.chain, k, self.wall_terminated)
    }

    /// Reflection and transmission probabilities at `k` (transmission is
    /// zero behind a wall).
    pub fn probabilities(&self, k: Wavenumber) -> Result<(f64, f64)> {
        if self.wall_terminated {
            Ok((reflect_with_wall(&self.chain, k)?.norm_sqr(), 0.0))
        } else {
            let a = amplitudes(&self.chain, k)?;
            Ok((a.reflection_probability(), a.transmission_probability()))
        }
    }
}

/// Settings of a composite build beyond the design wavenumbers and lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeOptions {
    /// Slices per unit length.
    pub resolution: usize,
    pub policy: TruncationPolicy,
    /// Close the last unit with a hard wall (quadratic last unit).
    pub wall_terminated: bool,
    /// After the unit-by-unit construction, adjust the design reflections of
    /// units 2…n together so that the discretised, truncated composite
    /// reflects nothing at k₂…kₙ.
    pub refine: bool,
}

impl Default for CompositeOptions {
    fn default() -> Self {
        CompositeOptions {
            resolution: DEFAULT_RESOLUTION,
            policy: TruncationPolicy::default(),
            wall_terminated: false,
            refine: true,
        }
    }
}

/// Builds a composite absorbing at every wavenumber of `k_list` with the
/// default joint refinement enabled.
pub fn build_composite(
    k_list: &[Wavenumber],
    lengths: &[f64],
    resolution: usize,
    policy: &TruncationPolicy,
    wall_terminated: bool,
) -> Result<CompositePotential> {
    build_composite_with(
        k_list,
        lengths,
        &CompositeOptions {
            resolution,
            policy: *policy,
            wall_terminated,
            refine: true,
        },
    )
}

fn validate_design(k_list: &[Wavenumber], lengths: &[f64], resolution: usize) -> Result<()> {
    if k_list.is_empty() {
        return Err(CapError::InvalidParameters("no design wavenumbers".into()));
    }
    if k_list.len() != lengths.len() {
        return Err(CapError::InvalidParameters(format!(
            "{} wavenumbers but {} unit lengths",
            k_list.len(),
            lengths.len()
        )));
    }
    if (lengths[0] - 1.0).abs() > 1e-12 {
        return Err(CapError::InvalidParameters(format!(
            "the first unit sets the length scale and must have length 1, got {}",
            lengths[0]
        )));
    }
    if let Some(&bad) = lengths.iter().find(|&&l| !(l.is_finite() && l > 0.0)) {
        return Err(CapError::InvalidParameters(format!(
            "unit lengths must be positive, got {bad}"
        )));
    }
    if resolution < MIN_RESOLUTION {
        return Err(CapError::InvalidParameters(format!(
            "resolution must be at least {MIN_RESOLUTION}, got {resolution}"
        )));
    }
    for (i, k) in k_list.iter().enumerate() {
        if k_list[..i].iter().any(|other| other == k) {
            return Err(CapError::DuplicateWavenumber(k.value()));
        }
    }
    Ok(())
}

/// Builds a composite absorbing at every wavenumber of `k_list`.
///
/// Unit `i` has length `lengths[i]` and starts where unit `i − 1` ends. The
/// amplitudes fed into each back-solve come from the discretised and
/// truncated composite, the same model that is evaluated afterwards.
pub fn build_composite_with(
    k_list: &[Wavenumber],
    lengths: &[f64],
    options: &CompositeOptions,
) -> Result<CompositePotential> {
    let policy = &options.policy;
    policy.validate()?;
    validate_design(k_list, lengths, options.resolution)?;

    let wall_terminated = options.wall_terminated;
    let last = k_list.len() - 1;
    let slices: Vec<usize> = lengths
        .iter()
        .map(|&l| unit_slices(l, options.resolution))
        .collect();

    let first = if wall_terminated && last == 0 {
        build_wall_unit(&ScatteringAmplitudes::transparent(k_list[0]), 0.0, 1.0, k_list[0])?
    } else {
        build_first_unit(k_list[0])
    };
    let cap = match policy.target_survival {
        Some(target) => {
            cap_for_target_survival(&first, slices[0], target, wall_terminated && last == 0)?
        }
        None => policy.cap,
    };
    let truncated = TruncationPolicy {
        cap,
        target_survival: None,
        ..*policy
    };
    let policies: Vec<TruncationPolicy> = (0..=last)
        .map(|i| {
            if truncated.applies_to(i, last) {
                TruncationPolicy {
                    cap: truncated.cap_for_length(lengths[i]),
                    ..truncated
                }
            } else {
                TruncationPolicy::unclamped()
            }
        })
        .collect();

    let mut chain = discretize_unit(&first, slices[0], &policies[0])?;
    let mut units = vec![first];
    for i in 1..=last {
        let k = k_list[i];
        let z = chain.end();
        let amps = amplitudes(&chain, k)?;
        let unit = if wall_terminated && i == last {
            build_wall_unit(&amps, z, lengths[i], k)?
        } else {
            build_next_unit(&amps, z, lengths[i], k)?
        };
        chain.extend_from(&discretize_unit(&unit, slices[i], &policies[i])?);
        units.push(unit);
    }

    if options.refine && last >= 1 {
        let refined = refine_design_reflections(&units, &slices, &policies, wall_terminated)?;
        units = refined.0;
        chain = refined.1;
    }

    Ok(CompositePotential {
        units,
        chain,
        unit_slices: slices,
        cap,
        wall_terminated,
    })
}

impl InversionUnit {
    /// Same support and design wavenumber, polynomial rebuilt for reflection `r`.
    fn with_design_reflection(&self, r: Complex64) -> InversionUnit {
        let k_hat = self.local_wavenumber();
        let coefficients = if self.is_wall_terminated() {
            quadratic_coefficients(r, k_hat)
        } else {
            cubic_coefficients(r, k_hat)
        };
        InversionUnit {
            coefficients,
            r_target: r,
            ..self.clone()
        }
    }
}

/// Newton iteration on the design reflections of units 2…n.
///
/// Unknowns are `r₂…rₙ` (real and imaginary parts), residuals are the
/// composite's left reflection at `k₂…kₙ`. The unit-by-unit construction is
/// exact only while every added unit is opaque at the earlier wavenumbers;
/// truncating intermediate units lets them transmit, so the later units
/// disturb the earlier cancellations. Iterates are accepted only when the
/// residual norm decreases, so the result is never worse than the start.
fn refine_design_reflections(
    units: &[InversionUnit],
    slices: &[usize],
    policies: &[TruncationPolicy],
    wall_terminated: bool,
) -> Result<(Vec<InversionUnit>, BarrierChain)> {
    const MAX_ITER: usize = 50;
    const TOL: f64 = 1e-15;

    let head = discretize_unit(&units[0], slices[0], &policies[0])?;
    let assemble = |rs: &[Complex64]| -> Result<(Vec<InversionUnit>, BarrierChain)> {
        let mut chain = head.clone();
        let mut out = vec![units[0].clone()];
        for (i, &r) in rs.iter().enumerate() {
            let unit = units[i + 1].with_design_reflection(r);
            chain.extend_from(&discretize_unit(&unit, slices[i + 1], &policies[i + 1])?);
            out.push(unit);
        }
        Ok((out, chain))
    };
    let residual = |rs: &[Complex64]| -> Result<Vec<f64>> {
        let (_, chain) = assemble(rs)?;
        let mut f = Vec::with_capacity(2 * rs.len());
        for unit in &units[1..] {
            let r = if wall_terminated {
                reflect_with_wall(&chain, unit.design_k)?
            } else {
                amplitudes(&chain, unit.design_k)?.r_left
            };
            f.extend([r.re, r.im]);
        }
        Ok(f)
    };
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();

    let m = 2 * (units.len() - 1);
    let mut rs: Vec<Complex64> = units[1..].iter().map(|u| u.r_target).collect();
    let mut f = residual(&rs)?;
    'newton: for _ in 0..MAX_ITER {
        if norm(&f) < TOL {
            break;
        }
        let mut jac = vec![vec![0.0; m]; m];
        for j in 0..m {
            let mut probe = rs.clone();
            let h = 1e-7 * (1.0 + probe[j / 2].norm());
            probe[j / 2] += if j % 2 == 0 {
                Complex64::new(h, 0.0)
            } else {
                Complex64::new(0.0, h)
            };
            let Ok(fp) = residual(&probe) else {
                break 'newton;
            };
            for (row, (a, b)) in jac.iter_mut().zip(fp.iter().zip(&f)) {
                row[j] = (a - b) / h;
            }
        }
        let Some(step) = solve_linear(jac, f.iter().map(|x| -x).collect()) else {
            break;
        };
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<Complex64> = rs
                .iter()
                .enumerate()
                .map(|(i, r)| r + Complex64::new(step[2 * i], step[2 * i + 1]) * scale)
                .collect();
            if let Ok(ft) = residual(&trial) {
                if norm(&ft) < norm(&f) {
                    rs = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    assemble(&rs)
}

/// Gaussian elimination with partial pivoting.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col] == 0.0 || !a[pivot][col].is_finite() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for c in col..n {
                a[row][c] -= factor * a[col][c];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}
