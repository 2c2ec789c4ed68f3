//! Resonance width from real variational quantities.
//!
//! Given the resonance position `E`, the boundary probability density
//! `p = |u(r0)|^2` of the unit-interior-norm state, and the support radius,
//! the width follows without any complex-valued calculation:
//!
//! * `l = 0`: closed form `gamma = p sqrt(2E + (p/2)^2)`.
//! * `l = 1`: the real root of a cubic in `Im k`, then
//!   `gamma = 2 |Im k| sqrt(2E + Im(k)^2)`.
//! * any `l`: damped fixed-point iteration coupling `gamma` to
//!   `Re k` and the outgoing-factor logarithmic derivative.
//!
//! With positive parameters the cubic has no positive real root; the
//! physical root is the negative one, `x = Im k < 0` on the outgoing branch
//! `Re k > 0`, and the width is `-2 x sqrt(2E + x^2) > 0`.

use num_complex::Complex64;
use thiserror::Error;

use crate::bessel::{outgoing_vl, outgoing_vl_deriv};

#[derive(Debug, Error)]
pub enum WidthError {
    #[error("operation expects l = {expected}, input has l = {got}")]
    WrongAngularMomentum { expected: u32, got: u32 },
    #[error("invalid width input: {reason}")]
    InvalidInput { reason: String },
    #[error("below threshold: radicand {radicand:e} is negative")]
    BelowThreshold { radicand: f64 },
    #[error("cubic has no root in the physical bracket; coefficients (c2, c1, c0) = {coefficients:?}")]
    NoRoot { coefficients: [f64; 3] },
    #[error("cubic has {count} roots in the physical bracket, expected a unique one; coefficients (c2, c1, c0) = {coefficients:?}")]
    MultipleRoots {
        coefficients: [f64; 3],
        count: usize,
    },
    #[error("outgoing factor v_l vanishes at the iterate k = {k}")]
    OutgoingPole { k: Complex64 },
    #[error("fixed point did not converge in {iterations} iterations; last gamma = {last:e}, step = {step:e}")]
    NoConvergence {
        iterations: usize,
        last: f64,
        step: f64,
    },
}

/// Real inputs of the width extraction: `energy` and `boundary_density`
/// are exactly the quantities a stabilization calculation produces, with
/// the unit-norm convention on `[0, r0]` so the density ratio denominator
/// is one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthInput {
    /// Resonance position (Hartree); positive for a state above threshold.
    pub energy: f64,
    /// `|u(r0)|^2` with unit norm on `[0, r0]` (1/Bohr).
    pub boundary_density: f64,
    /// Support radius of the potential (Bohr).
    pub support_radius: f64,
    pub l: u32,
}

fn validate(input: &WidthInput) -> Result<(), WidthError> {
    let bad = |reason: String| Err(WidthError::InvalidInput { reason });
    if !(input.boundary_density >= 0.0 && input.boundary_density.is_finite()) {
        return bad(format!(
            "boundary density must be >= 0, got {}",
            input.boundary_density
        ));
    }
    if !(input.support_radius > 0.0 && input.support_radius.is_finite()) {
        return bad(format!(
            "support radius must be > 0, got {}",
            input.support_radius
        ));
    }
    if !input.energy.is_finite() {
        return bad(format!("energy must be finite, got {}", input.energy));
    }
    Ok(())
}

/// s-wave closed form `gamma = p sqrt(2E + (p/2)^2)`.
pub fn gamma_s_wave(input: &WidthInput) -> Result<f64, WidthError> {
    validate(input)?;
    if input.l != 0 {
        return Err(WidthError::WrongAngularMomentum {
            expected: 0,
            got: input.l,
        });
    }
    let p = input.boundary_density;
    let radicand = 2.0 * input.energy + 0.25 * p * p;
    if radicand < 0.0 {
        return Err(WidthError::BelowThreshold { radicand });
    }
    Ok(p * radicand.sqrt())
}

/// Coefficients `(c2, c1, c0)` of the p-wave cubic
/// `x^3 + c2 x^2 + c1 x + c0 = 0` in `x = Im k`.
fn p_wave_cubic(energy: f64, p: f64, r0: f64) -> [f64; 3] {
    [
        1.0 / r0 + 0.5 * p,
        energy + 0.5 / (r0 * r0) + 0.5 * p / r0,
        0.5 * energy * p,
    ]
}

/// p-wave width via the unique physical root of the cubic in `Im k`.
///
/// The root is bracketed in `[0, p/2 + 1/r0 + sqrt(2E)]` (as `|Im k|`),
/// uniqueness is asserted by sign counting, and the root is polished by
/// safeguarded Newton to a residual below `1e-12`.
pub fn gamma_p_wave(input: &WidthInput) -> Result<f64, WidthError> {
    validate(input)?;
    if input.l != 1 {
        return Err(WidthError::WrongAngularMomentum {
            expected: 1,
            got: input.l,
        });
    }
    if input.energy <= 0.0 {
        return Err(WidthError::BelowThreshold {
            radicand: input.energy,
        });
    }
    let p = input.boundary_density;
    if p == 0.0 {
        return Ok(0.0);
    }
    let r0 = input.support_radius;
    let energy = input.energy;
    let [c2, c1, c0] = p_wave_cubic(energy, p, r0);
    // in y = -x > 0 the cubic reads q(y) = y^3 - c2 y^2 + c1 y - c0
    let q = |y: f64| ((y - c2) * y + c1) * y - c0;
    let dq = |y: f64| (3.0 * y - 2.0 * c2) * y + c1;

    let y_max = 0.5 * p + 1.0 / r0 + (2.0 * energy).sqrt();
    const SAMPLES: usize = 2000;
    let mut bracket = None;
    let mut crossings = 0;
    let mut prev = q(0.0);
    for i in 1..=SAMPLES {
        let y = y_max * i as f64 / SAMPLES as f64;
        let val = q(y);
        if prev.signum() != val.signum() {
            crossings += 1;
            if bracket.is_none() {
                bracket = Some((y_max * (i - 1) as f64 / SAMPLES as f64, y));
            }
        }
        prev = val;
    }
    let coefficients = [c2, c1, c0];
    let (mut lo, mut hi) = match (crossings, bracket) {
        (1, Some(b)) => b,
        (0, _) => return Err(WidthError::NoRoot { coefficients }),
        (count, _) => {
            return Err(WidthError::MultipleRoots {
                coefficients,
                count,
            })
        }
    };

    let scale = c2.abs().max(c1.abs()).max(c0.abs()).max(1.0);
    let mut y = 0.5 * (lo + hi);
    for _ in 0..200 {
        let val = q(y);
        if val.abs() < 1e-14 * scale {
            break;
        }
        if val < 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let step = val / dq(y);
        let newton = y - step;
        y = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    debug_assert!(q(y).abs() < 1e-12 * scale);
    Ok(2.0 * y * (2.0 * energy + y * y).sqrt())
}

/// Width for arbitrary `l` by damped fixed-point iteration:
/// from `gamma_m` form `k` on the `Re k > 0` branch, evaluate the imaginary
/// part of the outgoing-factor logarithmic derivative at `r0`, and update
/// `gamma_{m+1} = (Re k + Im(v_l'/v_l)) p`.
///
/// Must agree with the closed forms for `l = 0, 1`; damping at factor 0.5 is
/// engaged only if the undamped iteration oscillates.
pub fn gamma_general(input: &WidthInput) -> Result<f64, WidthError> {
    validate(input)?;
    if input.energy <= 0.0 {
        return Err(WidthError::BelowThreshold {
            radicand: input.energy,
        });
    }
    let p = input.boundary_density;
    if p == 0.0 {
        return Ok(0.0);
    }
    let energy = input.energy;
    let r0 = input.support_radius;
    let l = input.l;

    let mut gamma = p * (2.0 * energy).sqrt();
    let mut damp = 1.0;
    let mut prev_step: Option<f64> = None;
    let mut flips = 0;
    const MAX_ITER: usize = 500;
    let mut step = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let re_k = ((energy * energy + 0.25 * gamma * gamma).sqrt() + energy).sqrt();
        let k = Complex64::new(re_k, -0.5 * gamma / re_k);
        let v = outgoing_vl(l, k, r0);
        if v.norm() < 1e-280 {
            return Err(WidthError::OutgoingPole { k });
        }
        let im_term = (outgoing_vl_deriv(l, k, r0) / v).im;
        let next = (re_k + im_term) * p;
        step = next - gamma;
        if let Some(ps) = prev_step {
            if ps.signum() != step.signum() && ps != 0.0 && step != 0.0 {
                flips += 1;
                if flips >= 2 {
                    damp = 0.5;
                }
            }
        }
        prev_step = Some(step);
        gamma += damp * step;
        if step.abs() < 1e-12 * gamma.abs().max(1.0) {
            if gamma < 0.0 {
                return Err(WidthError::NoConvergence {
                    iterations: MAX_ITER,
                    last: gamma,
                    step,
                });
            }
            return Ok(gamma.max(0.0));
        }
    }
    Err(WidthError::NoConvergence {
        iterations: MAX_ITER,
        last: gamma,
        step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(energy: f64, p: f64, r0: f64, l: u32) -> WidthInput {
        WidthInput {
            energy,
            boundary_density: p,
            support_radius: r0,
            l,
        }
    }

    #[test]
    fn s_wave_closed_form_values() {
        assert_eq!(gamma_s_wave(&input(0.3, 0.0, 6.0, 0)).unwrap(), 0.0);
        // at threshold the width reduces to p^2/2
        let g = gamma_s_wave(&input(0.0, 0.2, 6.0, 0)).unwrap();
        assert!((g - 0.02).abs() < 1e-16);
        assert!(matches!(
            gamma_s_wave(&input(-1.0, 0.2, 6.0, 0)),
            Err(WidthError::BelowThreshold { .. })
        ));
        assert!(matches!(
            gamma_s_wave(&input(0.3, 0.1, 6.0, 1)),
            Err(WidthError::WrongAngularMomentum { .. })
        ));
    }

    #[test]
    fn p_wave_zero_density_gives_zero_width() {
        assert_eq!(gamma_p_wave(&input(0.4, 0.0, 6.0, 1)).unwrap(), 0.0);
    }

    #[test]
    fn p_wave_cubic_is_satisfied_by_the_exact_resonance() {
        use crate::exact::find_resonance;
        use crate::potentials::{well_barrier, WellBarrierParams};

        let pot = well_barrier(WellBarrierParams {
            v0: 0.3,
            delta: 5.0,
            r0: 6.0,
            lambda: 0.7,
        })
        .unwrap();
        let res = find_resonance(&pot, 1, Complex64::new(0.57, -0.05), 1e-13).unwrap();
        let energy = res.energy.energy();
        let p = res.wavefunction.eval(6.0).norm_sqr();
        let x = res.energy.wavenumber().im; // negative on the outgoing branch

        let [c2, c1, c0] = p_wave_cubic(energy, p, 6.0);
        let residual = ((x + c2) * x + c1) * x + c0;
        assert!(
            residual.abs() < 1e-8,
            "cubic residual {residual:e} at x = Im k = {x}"
        );

        // and the real-quantity route reproduces the exact width
        let g = gamma_p_wave(&input(energy, p, 6.0, 1)).unwrap();
        let rel = (g - res.energy.gamma()).abs() / res.energy.gamma();
        assert!(rel < 1e-9, "gamma_p_wave off by {rel:e}");
    }

    #[test]
    fn general_matches_s_wave_closed_form() {
        for &energy in &[0.01, 0.1, 0.437, 1.5] {
            for &p in &[0.0, 0.05, 0.3, 0.8, 1.2] {
                for &r0 in &[2.0, 6.0, 10.0] {
                    let closed = gamma_s_wave(&input(energy, p, r0, 0)).unwrap();
                    let fixed = gamma_general(&input(energy, p, r0, 0)).unwrap();
                    assert!(
                        (closed - fixed).abs() <= 1e-10 * closed.max(1.0),
                        "E={energy} p={p}: {closed} vs {fixed}"
                    );
                }
            }
        }
    }

    #[test]
    fn general_matches_p_wave_cubic_route() {
        for &energy in &[0.01, 0.1, 0.437, 1.5] {
            for &p in &[0.0, 0.05, 0.3, 0.8] {
                for &r0 in &[2.0, 6.0, 10.0] {
                    let cubic = gamma_p_wave(&input(energy, p, r0, 1)).unwrap();
                    let fixed = gamma_general(&input(energy, p, r0, 1)).unwrap();
                    assert!(
                        (cubic - fixed).abs() <= 1e-10 * cubic.max(1.0),
                        "E={energy} p={p} r0={r0}: {cubic} vs {fixed}"
                    );
                }
            }
        }
    }

    #[test]
    fn zero_density_is_a_fixed_point_for_any_l() {
        for l in [0, 1, 2, 5] {
            assert_eq!(gamma_general(&input(0.25, 0.0, 6.0, l)).unwrap(), 0.0);
        }
    }

    #[test]
    fn width_is_monotone_in_boundary_density() {
        let mut prev0 = -1.0;
        let mut prev1 = -1.0;
        for i in 0..40 {
            let p = i as f64 * 0.03;
            let g0 = gamma_s_wave(&input(0.3, p, 6.0, 0)).unwrap();
            let g1 = gamma_p_wave(&input(0.3, p.max(1e-12), 6.0, 1)).unwrap();
            assert!(g0 > prev0);
            assert!(g1 > prev1, "p-wave width not monotone at p = {p}");
            prev0 = g0;
            prev1 = g1;
        }
    }

    proptest::proptest! {
        #[test]
        fn width_nonnegative_and_zero_iff_no_density(
            energy in 1e-3f64..2.0,
            p in 0.0f64..1.2,
            r0 in 2.0f64..10.0,
            l in 0u32..3,
        ) {
            let g = gamma_general(&input(energy, p, r0, l)).unwrap();
            proptest::prop_assert!(g >= 0.0);
            proptest::prop_assert_eq!(g == 0.0, p == 0.0);
        }
    }
}
