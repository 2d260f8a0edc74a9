//! Exact scattering of piecewise-constant chains via 2×2 transfer matrices.
//!
//! A transfer matrix maps the coefficients `(A, B)` of
//! `ψ = A·e^{ikx} + B·e^{−ikx}` on the left of a region to the pair on its
//! right. All phases refer to the global origin, so matrices of adjacent
//! regions multiply directly and amplitudes compose without bookkeeping.
//!
//! Inside a slab of height `V` the interior solution is propagated with the
//! building blocks `cos(qd)`, `sin(qd)/q` and `q·sin(qd)` where `q² = k² − V`.
//! All three are even in `q`, so the square-root branch never matters.

use crate::error::{CapError, Result};
use crate::scatter::{BarrierChain, SampledPotential, ScatteringAmplitudes, SquareBarrier, Wavenumber};
use num_complex::Complex64;

/// Largest `|Im q|·width` accepted before the hyperbolic growth is declared an overflow.
pub const MAX_GROWTH: f64 = 700.0;

/// Moduli below this are treated as poles of the scattering amplitudes.
pub const SINGULARITY_THRESHOLD: f64 = 1e-14;

/// Below this `|q²|·width²` the slab blocks are summed as power series.
const SERIES_THRESHOLD: f64 = 1e-3;

type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

const IDENTITY: Mat2 = [[ONE, ZERO], [ZERO, ONE]];

/// Plane-wave coefficients at `x` to `(ψ, ψ')`.
fn to_local(k: f64, x: f64) -> Mat2 {
    let e = Complex64::from_polar(1.0, k * x);
    let ei = e.conj();
    let ik = I * k;
    [[e, ei], [ik * e, -ik * ei]]
}

/// `(ψ, ψ')` at `x` back to plane-wave coefficients.
fn from_local(k: f64, x: f64) -> Mat2 {
    let e = Complex64::from_polar(1.0, k * x);
    let ei = e.conj();
    let inv_2ik = 1.0 / (2.0 * I * k);
    [[ei * 0.5, ei * inv_2ik], [e * 0.5, -e * inv_2ik]]
}

/// Interior propagator blocks `(cos(qd), sin(qd)/q, q·sin(qd))` and their
/// derivatives with respect to `w = q²`.
struct SlabBlocks {
    c: Complex64,
    sq: Complex64,
    qs: Complex64,
    dc: Complex64,
    dsq: Complex64,
    dqs: Complex64,
}

fn slab_blocks(w: Complex64, d: f64, k: f64) -> Result<SlabBlocks> {
    let q = w.sqrt();
    let growth = q.im.abs() * d;
    if growth > MAX_GROWTH {
        return Err(CapError::Overflow { k, growth });
    }
    let z = w * (d * d);
    let (c, sq, dsq) = if z.norm() < SERIES_THRESHOLD {
        // cos(√z) = Σ (−z)ⁿ/(2n)!, sin(√z)/√z = Σ (−z)ⁿ/(2n+1)!
        let mut c = ZERO;
        let mut s = ZERO;
        let mut ds = ZERO;
        let mut pow = ONE; // (−z)ⁿ
        let mut fact_even = 1.0; // (2n)!
        for n in 0..8 {
            let fact_odd = fact_even * (2 * n + 1) as f64;
            c += pow / fact_even;
            s += pow / fact_odd;
            if n + 1 < 8 {
                // d/dz of (−z)^{n+1}/(2n+3)! = −(n+1)(−z)ⁿ/(2n+3)!
                let fact_next_odd = fact_odd * ((2 * n + 2) * (2 * n + 3)) as f64;
                ds -= pow * ((n + 1) as f64) / fact_next_odd;
            }
            pow *= -z;
            fact_even = fact_odd * (2 * n + 2) as f64;
        }
        (c, s * d, ds * (d * d * d))
    } else {
        let u = q * d;
        let c = u.cos();
        let sq = u.sin() / q;
        (c, sq, (c * d - sq) / (2.0 * w))
    };
    let qs = w * sq;
    Ok(SlabBlocks {
        c,
        sq,
        qs,
        dc: -sq * (d / 2.0),
        dsq,
        dqs: (sq + c * d) / 2.0,
    })
}

/// 2×2 transfer matrix over `span = (x_left, x_right)` at wavenumber `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
    pub k: Wavenumber,
    pub span: (f64, f64),
}

impl TransferMatrix {
    fn from_mat(m: Mat2, k: Wavenumber, span: (f64, f64)) -> Self {
        TransferMatrix {
            m11: m[0][0],
            m12: m[0][1],
            m21: m[1][0],
            m22: m[1][1],
            k,
            span,
        }
    }

    fn mat(&self) -> Mat2 {
        [[self.m11, self.m12], [self.m21, self.m22]]
    }

    pub fn identity(k: Wavenumber, x: f64) -> Self {
        TransferMatrix::from_mat(IDENTITY, k, (x, x))
    }

    pub fn det(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    /// Matrix of `self`'s region followed by `next`'s region on its right.
    pub fn then(&self, next: &TransferMatrix) -> TransferMatrix {
        TransferMatrix::from_mat(
            mat_mul(&next.mat(), &self.mat()),
            self.k,
            (self.span.0, next.span.1),
        )
    }

    /// Reads the scattering amplitudes off the matrix (uses `det = 1`).
    pub fn amplitudes(&self) -> Result<ScatteringAmplitudes> {
        let modulus = self.m22.norm();
        if !(modulus >= SINGULARITY_THRESHOLD) {
            return Err(CapError::SpectralSingularity {
                k: self.k.value(),
                modulus,
            });
        }
        // fdiv/finv keep |m22|² from overflowing for opaque chains
        let t = self.m22.finv();
        Ok(ScatteringAmplitudes {
            k: self.k,
            t_left: t,
            t_right: t,
            r_left: -self.m21.fdiv(self.m22),
            r_right: self.m12.fdiv(self.m22),
        })
    }
}

/// Derivatives of one slab matrix with respect to the real and imaginary
/// parts of its height. The matrix is holomorphic in `V`, so
/// `dm_d_im = i·dm_d_re`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferGradient {
    pub dm_d_re: [[Complex64; 2]; 2],
    pub dm_d_im: [[Complex64; 2]; 2],
}

/// Partial derivatives of the survival with respect to one slab height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalGradient {
    pub d_re: f64,
    pub d_im: f64,
}

fn slab_parts(
    barrier: &SquareBarrier,
    position: f64,
    k: Wavenumber,
) -> Result<(Mat2, Mat2)> {
    let kv = k.value();
    let d = barrier.width();
    let w = Complex64::new(kv * kv, 0.0) - barrier.height;
    let b = slab_blocks(w, d, kv)?;
    let right = from_local(kv, position + d);
    let left = to_local(kv, position);
    let prop = [[b.c, b.sq], [-b.qs, b.c]];
    // dP/dV = −dP/dw
    let dprop = [[-b.dc, -b.dsq], [b.dqs, -b.dc]];
    let m = if barrier.height == ZERO {
        IDENTITY
    } else {
        mat_mul(&right, &mat_mul(&prop, &left))
    };
    let dm = mat_mul(&right, &mat_mul(&dprop, &left));
    Ok((m, dm))
}

/// Transfer matrix of a single slab whose left edge sits at `position`.
pub fn slab_matrix(barrier: &SquareBarrier, position: f64, k: Wavenumber) -> Result<TransferMatrix> {
    let (m, _) = slab_parts(barrier, position, k)?;
    Ok(TransferMatrix::from_mat(
        m,
        k,
        (position, position + barrier.width()),
    ))
}

/// Exact derivative of [`slab_matrix`] with respect to the slab height.
pub fn slab_gradient(barrier: &SquareBarrier, position: f64, k: Wavenumber) -> Result<TransferGradient> {
    let (_, dm) = slab_parts(barrier, position, k)?;
    let mut dm_im = dm;
    for row in dm_im.iter_mut() {
        for v in row.iter_mut() {
            *v *= I;
        }
    }
    Ok(TransferGradient {
        dm_d_re: dm,
        dm_d_im: dm_im,
    })
}

/// Ordered product of the slab matrices, leftmost slab applied first.
pub fn chain_matrix(chain: &BarrierChain, k: Wavenumber) -> Result<TransferMatrix> {
    if chain.is_empty() {
        return Err(CapError::EmptyChain);
    }
    let mut m = IDENTITY;
    for (x, slab) in chain.positioned() {
        let (s, _) = slab_parts(slab, x, k)?;
        m = mat_mul(&s, &m);
    }
    Ok(TransferMatrix::from_mat(m, k, (chain.start(), chain.end())))
}

pub fn amplitudes(chain: &BarrierChain, k: Wavenumber) -> Result<ScatteringAmplitudes> {
    chain_matrix(chain, k)?.amplitudes()
}

/// Survival `|r_left|² + |t_left|²` of an open chain.
pub fn survival_at(chain: &BarrierChain, k: Wavenumber) -> Result<f64> {
    Ok(amplitudes(chain, k)?.survival())
}

/// Left reflection amplitude with a hard wall (`ψ = 0`) at the chain's right edge.
pub fn reflect_with_wall(chain: &BarrierChain, k: Wavenumber) -> Result<Complex64> {
    let m = chain_matrix(chain, k)?;
    let e = Complex64::from_polar(1.0, k.value() * chain.end());
    let ei = e.conj();
    let den = m.m12 * e + m.m22 * ei;
    let modulus = den.norm();
    if !(modulus >= SINGULARITY_THRESHOLD) {
        return Err(CapError::SpectralSingularity {
            k: k.value(),
            modulus,
        });
    }
    Ok(-(m.m11 * e + m.m21 * ei).fdiv(den))
}

/// Equal-width slices over the sampled support, each at its midpoint value.
pub fn discretize(potential: &SampledPotential, slices: usize) -> Result<BarrierChain> {
    if slices == 0 {
        return Err(CapError::InvalidSamples("slices must be at least 1".into()));
    }
    let width = potential.length() / slices as f64;
    let z = potential.start();
    let segments = (0..slices)
        .map(|i| SquareBarrier::new(width, potential.at(z + (i as f64 + 0.5) * width)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BarrierChain::new(z, segments))
}

/// Survival and its exact partials with respect to every slab height.
pub fn survival_gradient(chain: &BarrierChain, k: Wavenumber) -> Result<(f64, Vec<SurvivalGradient>)> {
    if chain.is_empty() {
        return Err(CapError::EmptyChain);
    }
    let parts = chain
        .positioned()
        .map(|(x, s)| slab_parts(s, x, k))
        .collect::<Result<Vec<_>>>()?;
    let n = parts.len();

    // prefix[j] = M_{j−1}…M_0, suffix[j] = M_{n−1}…M_{j+1}
    let mut prefix = Vec::with_capacity(n);
    let mut acc = IDENTITY;
    for (m, _) in &parts {
        prefix.push(acc);
        acc = mat_mul(m, &acc);
    }
    let total = acc;
    let mut suffix = vec![IDENTITY; n];
    let mut acc = IDENTITY;
    for j in (0..n).rev() {
        suffix[j] = acc;
        acc = mat_mul(&acc, &parts[j].0);
    }

    let m22 = total[1][1];
    let modulus = m22.norm();
    if !(modulus >= SINGULARITY_THRESHOLD) {
        return Err(CapError::SpectralSingularity {
            k: k.value(),
            modulus,
        });
    }
    let t = m22.finv();
    let r = -total[1][0].fdiv(m22);
    let s = r.norm_sqr() + t.norm_sqr();

    let grads = (0..n)
        .map(|j| {
            let dm = mat_mul(&suffix[j], &mat_mul(&parts[j].1, &prefix[j]));
            // r = −m21/m22, t = 1/m22
            let dt = -dm[1][1] * t * t;
            let dr = -(dm[1][0] + r * dm[1][1]) * t;
            let along = |scale: Complex64| {
                2.0 * ((r.conj() * dr * scale).re + (t.conj() * dt * scale).re)
            };
            SurvivalGradient {
                d_re: along(ONE),
                d_im: along(I),
            }
        })
        .collect();
    Ok((s, grads))
}

/// Exact partials `(∂S/∂Re Vⱼ, ∂S/∂Im Vⱼ)` for every slab `j`.
pub fn chain_gradient(chain: &BarrierChain, k: Wavenumber) -> Result<Vec<SurvivalGradient>> {
    survival_gradient(chain, k).map(|(_, g)| g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn wn(k: f64) -> Wavenumber {
        Wavenumber::new(k).unwrap()
    }

    fn barrier(w: f64, v: Complex64) -> SquareBarrier {
        SquareBarrier::new(w, v).unwrap()
    }

    /// Textbook transmission probability of a real rectangular barrier.
    fn rectangular_transmission(v: f64, d: f64, k: f64) -> f64 {
        let e = k * k;
        let q = Complex64::new(e - v, 0.0).sqrt();
        let s = (q * d).sin();
        1.0 / (1.0 + v * v * s.norm_sqr() / (4.0 * e * (e - v)).abs())
    }

    #[test]
    fn transparent_slab_is_identity() {
        let m = slab_matrix(&barrier(1.0, c(0.0, 0.0)), 0.0, wn(1.0)).unwrap();
        assert_eq!((m.m11, m.m12, m.m21, m.m22), (ONE, ZERO, ZERO, ONE));
    }

    #[test]
    fn matches_rectangular_barrier_closed_form() {
        for &(v, d, k) in &[(2.0, 1.0, 2.0), (2.0, 1.0, 1.0), (5.0, 0.3, 1.7), (-3.0, 2.0, 0.6)] {
            for &pos in &[0.0, 0.37, -2.5] {
                let chain = BarrierChain::new(pos, vec![barrier(d, c(v, 0.0))]);
                let a = amplitudes(&chain, wn(k)).unwrap();
                assert_relative_eq!(
                    a.transmission_probability(),
                    rectangular_transmission(v, d, k),
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn real_barrier_conserves_flux() {
        let chain = BarrierChain::new(0.0, vec![barrier(1.0, c(2.0, 0.0))]);
        let s = survival_at(&chain, wn(2.0)).unwrap();
        assert!((s - 1.0).abs() < 1e-10);
    }

    #[test]
    fn complex_slab_has_unit_determinant() {
        let m = slab_matrix(&barrier(0.7, c(1.0, -5.0)), 0.0, wn(1.3)).unwrap();
        assert!((m.det() - ONE).norm() < 1e-10);
    }

    #[test]
    fn degenerate_interior_uses_linear_limit() {
        // V = k² exactly: q = 0, interior solutions are linear.
        let k = 1.5;
        let chain = BarrierChain::new(0.0, vec![barrier(1.0, c(k * k, 0.0))]);
        let m = chain_matrix(&chain, wn(k)).unwrap();
        assert!((m.det() - ONE).norm() < 1e-12);
        // the closed form is continuous across q = 0
        let t = rectangular_transmission(k * k + 1e-7, 1.0, k);
        assert_relative_eq!(m.amplitudes().unwrap().transmission_probability(), t, max_relative = 1e-6);
    }

    #[test]
    fn series_and_closed_form_blocks_agree_at_the_switch() {
        let d = 0.9;
        for &zmag in &[0.999e-3, 1.001e-3] {
            let w = Complex64::from_polar(zmag / (d * d), 0.7);
            let b = slab_blocks(w, d, 1.0).unwrap();
            let q = w.sqrt();
            assert_relative_eq!(b.c.re, (q * d).cos().re, max_relative = 1e-13);
            assert!((b.sq - (q * d).sin() / q).norm() < 1e-13);
        }
    }

    #[test]
    fn overflow_is_reported() {
        let chain = BarrierChain::new(0.0, vec![barrier(1.0, c(1e6, 0.0))]);
        assert!(matches!(chain_matrix(&chain, wn(1.0)), Err(CapError::Overflow { .. })));
    }

    #[test]
    fn opaque_chain_reflects_instead_of_vanishing() {
        // |m22|² overflows f64 here while |m22| itself does not
        let chain = BarrierChain::new(0.0, vec![barrier(1.032, c(-2.35e5, 5.9e5))]);
        let m = chain_matrix(&chain, wn(1.94)).unwrap();
        assert!(m.m22.norm() > 1e160);
        let a = m.amplitudes().unwrap();
        assert!(a.r_left.norm() > 0.9);
        let (s, g) = survival_gradient(&chain, wn(1.94)).unwrap();
        assert!((s - a.survival()).abs() < 1e-12);
        assert!(g.iter().all(|d| d.d_re.is_finite() && d.d_im.is_finite()));
        assert!(reflect_with_wall(&chain, wn(1.94)).unwrap().norm() > 0.9);
    }

    #[test]
    fn empty_chain_is_rejected() {
        assert_eq!(chain_matrix(&BarrierChain::empty(0.0), wn(1.0)), Err(CapError::EmptyChain));
    }

    #[test]
    fn single_slab_chain_equals_slab_matrix() {
        let b = barrier(0.4, c(3.0, -2.0));
        let chain = BarrierChain::new(0.3, vec![b]);
        assert_eq!(chain_matrix(&chain, wn(1.1)).unwrap(), slab_matrix(&b, 0.3, wn(1.1)).unwrap());
    }

    #[test]
    fn two_empty_slabs_give_identity() {
        let chain = BarrierChain::uniform(0.0, 2.0, &[ZERO, ZERO]).unwrap();
        let m = chain_matrix(&chain, wn(0.8)).unwrap();
        assert_eq!((m.m11, m.m22), (ONE, ONE));
        let a = m.amplitudes().unwrap();
        assert_eq!((a.r_left, a.t_left), (ZERO, ONE));
    }

    #[test]
    fn hard_wall_on_empty_slab_is_a_lossless_mirror() {
        let chain = BarrierChain::new(0.0, vec![barrier(1.0, ZERO)]);
        for &k in &[0.3, 1.0, 2.7] {
            let r = reflect_with_wall(&chain, wn(k)).unwrap();
            assert!((r.norm() - 1.0).abs() < 1e-12);
            // ψ = e^{ikx} + r e^{−ikx} vanishes at x = 1
            let psi = Complex64::from_polar(1.0, k) + r * Complex64::from_polar(1.0, -k);
            assert!(psi.norm() < 1e-12);
        }
    }

    #[test]
    fn discretize_uses_midpoints() {
        let p = SampledPotential::from_fn(0.0, 1.0, 11, |x| c(x, 0.0)).unwrap();
        let one = discretize(&p, 1).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one.segments()[0].height, c(0.5, 0.0));
        let flat = SampledPotential::from_fn(2.0, 3.0, 5, |_| c(4.0, -1.0)).unwrap();
        let chain = discretize(&flat, 7).unwrap();
        assert!(chain.segments().iter().all(|s| s.height == c(4.0, -1.0)));
        assert!((chain.end() - 5.0).abs() < 1e-14);
        assert!(discretize(&flat, 0).is_err());
    }

    fn central_difference(chain: &BarrierChain, k: Wavenumber, j: usize, dir: Complex64, h: f64) -> f64 {
        let bump = |sign: f64| {
            let mut segs = chain.segments().to_vec();
            segs[j].height += dir * (sign * h);
            survival_at(&BarrierChain::new(chain.start(), segs), k).unwrap()
        };
        (bump(1.0) - bump(-1.0)) / (2.0 * h)
    }

    fn assert_close(analytic: f64, numeric: f64, rel: f64) {
        let scale = analytic.abs().max(numeric.abs()).max(1e-3);
        assert!(
            (analytic - numeric).abs() <= rel * scale,
            "analytic {analytic} vs finite difference {numeric}"
        );
    }

    #[test]
    fn gradient_matches_finite_differences_on_complex_chain() {
        let chain = BarrierChain::new(
            0.2,
            vec![barrier(0.3, c(2.0, -1.5)), barrier(0.5, c(-1.0, -0.4)), barrier(0.25, c(4.0, 0.7))],
        );
        let k = wn(1.7);
        let g = chain_gradient(&chain, k).unwrap();
        for (j, gj) in g.iter().enumerate() {
            assert_close(gj.d_re, central_difference(&chain, k, j, ONE, 1e-6), 1e-6);
            assert_close(gj.d_im, central_difference(&chain, k, j, I, 1e-6), 1e-6);
        }
    }

    #[test]
    fn real_chain_gradient_in_imaginary_direction() {
        let chain = BarrierChain::uniform(0.0, 1.2, &[c(3.0, 0.0), c(-2.0, 0.0), c(1.0, 0.0)]).unwrap();
        let k = wn(2.3);
        let g = chain_gradient(&chain, k).unwrap();
        for (j, gj) in g.iter().enumerate() {
            assert_close(gj.d_im, central_difference(&chain, k, j, I, 1e-6), 1e-6);
            // real perturbations of a real chain keep S = 1
            assert!(gj.d_re.abs() < 1e-10);
        }
    }

    #[test]
    fn transparent_slab_is_stationary_under_real_perturbation() {
        let chain = BarrierChain::new(0.0, vec![barrier(1.0, ZERO)]);
        let g = chain_gradient(&chain, wn(1.0)).unwrap();
        assert!(g[0].d_re.abs() < 1e-12);
    }

    #[test]
    fn slab_gradient_matches_finite_differences() {
        let b = barrier(0.6, c(2.5, -3.0));
        let k = wn(1.4);
        let g = slab_gradient(&b, 0.1, k).unwrap();
        let h = 1e-6;
        for (dir, dm) in [(ONE, g.dm_d_re), (I, g.dm_d_im)] {
            let plus = slab_matrix(&SquareBarrier::new(0.6, b.height + dir * h).unwrap(), 0.1, k).unwrap();
            let minus = slab_matrix(&SquareBarrier::new(0.6, b.height - dir * h).unwrap(), 0.1, k).unwrap();
            let fd = [
                [(plus.m11 - minus.m11) / (2.0 * h), (plus.m12 - minus.m12) / (2.0 * h)],
                [(plus.m21 - minus.m21) / (2.0 * h), (plus.m22 - minus.m22) / (2.0 * h)],
            ];
            for r in 0..2 {
                for col in 0..2 {
                    let err = (fd[r][col] - dm[r][col]).norm() / dm[r][col].norm().max(1e-3);
                    assert!(err < 1e-6, "entry ({r},{col}) rel err {err}");
                }
            }
        }
    }

    fn real_chain() -> impl Strategy<Value = (BarrierChain, f64)> {
        (
            proptest::collection::vec((0.1..2.0f64, -10.0..10.0f64), 1..=6),
            -3.0..3.0f64,
            0.5..10.0f64,
        )
            .prop_map(|(segs, start, k)| {
                let segs = segs.into_iter().map(|(w, v)| barrier(w, c(v, 0.0))).collect();
                (BarrierChain::new(start, segs), k)
            })
    }

    fn complex_chain() -> impl Strategy<Value = BarrierChain> {
        proptest::collection::vec((0.1..1.0f64, -5.0..5.0f64, -5.0..1.0f64), 1..=5).prop_map(|segs| {
            BarrierChain::new(0.0, segs.into_iter().map(|(w, re, im)| barrier(w, c(re, im))).collect())
        })
    }

    proptest! {
        #[test]
        fn real_chains_are_unitary_with_unit_determinant((chain, k) in real_chain()) {
            let m = chain_matrix(&chain, wn(k)).unwrap();
            // the stored entries carry relative rounding, so det is only
            // resolvable to about |m22|²·ε
            prop_assert!((m.det() - ONE).norm() < 1e-10 * m.m22.norm_sqr().max(1.0));
            let a = m.amplitudes().unwrap();
            prop_assert!((a.survival() - 1.0).abs() < 1e-10);
            prop_assert_eq!(a.t_left, a.t_right);
            let r = reflect_with_wall(&chain, wn(k)).unwrap();
            prop_assert!((r.norm() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn origin_shift_covariance(chain in complex_chain(), origin in -3.0..3.0f64, k in 0.5..5.0f64) {
            // moving the origin to `origin` is translating the chain by −origin
            let a = amplitudes(&chain, wn(k)).unwrap();
            let b = amplitudes(&chain.translated(-origin), wn(k)).unwrap();
            let phase = Complex64::from_polar(1.0, -2.0 * k * origin);
            prop_assert!((b.r_left - a.r_left * phase).norm() < 1e-12);
            prop_assert!((b.t_left - a.t_left).norm() < 1e-12);
        }

        #[test]
        fn complex_chain_determinant(chain in complex_chain(), k in 0.5..5.0f64) {
            let m = chain_matrix(&chain, wn(k)).unwrap();
            prop_assert!((m.det() - ONE).norm() < 1e-10 * m.m22.norm_sqr().max(1.0));
        }
    }
}
