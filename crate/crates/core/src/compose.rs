//! Multiple-scattering composition of two contiguous units.
//!
//! With unit 1 on the left and unit 2 on the right, summing every path that
//! bounces `n` times between the units gives a geometric series in
//! `r2ˡ·r1ʳ`, always used here in closed form.

use crate::error::{CapError, Result};
use crate::scatter::ScatteringAmplitudes;
use crate::transfer::SINGULARITY_THRESHOLD;
use num_complex::Complex64;

fn check_same_k(a1: &ScatteringAmplitudes, a2: &ScatteringAmplitudes) -> Result<()> {
    let (k1, k2) = (a1.k.value(), a2.k.value());
    if (k1 - k2).abs() > 1e-12 * k1.max(k2) {
        return Err(CapError::MismatchedWavenumber(k1, k2));
    }
    Ok(())
}

/// Amplitudes of unit 1 followed by unit 2, both in the global phase convention.
pub fn compose_amplitudes(
    a1: &ScatteringAmplitudes,
    a2: &ScatteringAmplitudes,
) -> Result<ScatteringAmplitudes> {
    check_same_k(a1, a2)?;
    let den = Complex64::new(1.0, 0.0) - a2.r_left * a1.r_right;
    let modulus = den.norm();
    if !(modulus > SINGULARITY_THRESHOLD) {
        return Err(CapError::ResonanceDenominator {
            k: a1.k.value(),
            modulus,
        });
    }
    let bounce = den.finv();
    Ok(ScatteringAmplitudes {
        k: a1.k,
        t_left: a1.t_left * a2.t_left * bounce,
        r_left: a1.r_left + a1.t_left * a2.r_left * a1.t_right * bounce,
        t_right: a2.t_right * a1.t_right * bounce,
        r_right: a2.r_right + a2.t_right * a1.r_right * a2.t_left * bounce,
    })
}

/// Left reflection amplitude a second unit with zero left transmission must
/// have so that the composite neither reflects nor transmits.
pub fn required_r2(a1: &ScatteringAmplitudes) -> Result<Complex64> {
    let den = a1.r_left * a1.r_right - a1.t_left * a1.t_right;
    let modulus = den.norm();
    if !(modulus > SINGULARITY_THRESHOLD) {
        return Err(CapError::DegenerateBacksolve {
            k: a1.k.value(),
            modulus,
        });
    }
    Ok(a1.r_left.fdiv(den))
}
