//! Exact Siegert eigenproblem for piecewise-constant potentials.
//!
//! Inside the support the regular solution is propagated through each
//! constant segment in closed form (trigonometric solutions for s-waves,
//! Riccati-Bessel pairs for p-waves); outside, the state must be a purely
//! outgoing wave `C e^{ikr} v_l(k, r)`. Complex eigenvalues are roots of the
//! logarithmic-derivative mismatch at the support radius, found by a damped
//! complex secant iteration. This module is the oracle the variational
//! pipeline is validated against.

use num_complex::Complex64;
use thiserror::Error;

use crate::bessel::{
    outgoing_vl, outgoing_vl_deriv, riccati_c1, riccati_c1_deriv, riccati_s1, riccati_s1_deriv,
};
use crate::potentials::PotentialSpec;
use crate::quadrature::{adaptive_simpson, GaussLegendre};

#[derive(Debug, Error)]
pub enum ExactError {
    #[error("angular momentum l = {l} not supported by the exact solver (closed forms exist for l = 0, 1)")]
    UnsupportedL { l: u32 },
    #[error("energy must be nonzero")]
    ZeroEnergy,
    #[error("interior solution vanishes at the matching radius (E = {e})")]
    InteriorNode { e: Complex64 },
    #[error("outgoing factor v_l(k, r0) vanishes at E = {e}")]
    ExteriorPole { e: Complex64 },
    #[error("root search did not converge within {iterations} iterations; last E = {last}, |f| = {residual:e}")]
    NoConvergence {
        iterations: usize,
        last: Complex64,
        residual: f64,
    },
    #[error("converged state at E = {energy} is not a resonance (gamma = {gamma:e} <= 0); it is bound or virtual-like")]
    NotAResonance { energy: Complex64, gamma: f64 },
    #[error("radius r = {r} below the support radius r0 = {r0}")]
    BelowSupport { r: f64, r0: f64 },
    #[error("wavefunction node at r = {r}")]
    PoleAtRadius { r: f64 },
    #[error("expansion flow reverses (rdot <= 0) at r = {r}")]
    FlowReversal { r: f64 },
}

/// Complex Siegert eigenvalue `E = energy - i*gamma/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEnergy(pub Complex64);

impl ComplexEnergy {
    /// Real part: the resonance position (Hartree).
    pub fn energy(&self) -> f64 {
        self.0.re
    }

    /// Inverse lifetime `gamma = -2 Im E`; positive for resonances.
    pub fn gamma(&self) -> f64 {
        -2.0 * self.0.im
    }

    /// `k = sqrt(2E)` on the principal branch (`Re k >= 0`); resonances then
    /// have `Im k < 0`, bound states sit on the positive imaginary axis.
    pub fn wavenumber(&self) -> Complex64 {
        (2.0 * self.0).sqrt()
    }
}

/// Rough classification of a converged Siegert root, decided by the
/// wavenumber `k = sqrt(2E)` the root was actually built with.
///
/// The branch cut of the principal square root runs along negative real
/// energies: approaching it from `Im E = 0^-` lands on the second sheet
/// (`Im k < 0`, exponentially growing exterior), so real-negative roots can
/// be genuine bound states or their virtual mirror images depending on the
/// side of the cut the iteration converged to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiegertClass {
    /// `gamma > 0` with an outgoing oscillatory exterior.
    Resonance,
    /// `k` on the positive imaginary axis: decaying exterior.
    Bound,
    /// `k` on the negative imaginary axis: growing exterior (virtual-like;
    /// the pole lives on the unphysical sheet).
    Virtual,
    /// Anything else the root finder may land on.
    Other,
}

const GAMMA_CLASSIFICATION_FLOOR: f64 = 1e-12;

fn classify(e: Complex64) -> SiegertClass {
    let gamma = -2.0 * e.im;
    let k = (2.0 * e).sqrt();
    if gamma > GAMMA_CLASSIFICATION_FLOOR && k.re > k.im.abs() {
        SiegertClass::Resonance
    } else if k.im > k.re.abs() {
        SiegertClass::Bound
    } else if k.im < -k.re.abs() {
        SiegertClass::Virtual
    } else {
        SiegertClass::Other
    }
}

/// Values of two fundamental solutions (and radial derivatives) of the
/// constant-potential radial equation on one segment, plus their Wronskian
/// `u1 u2' - u2 u1'`.
struct BasisValues {
    u1: Complex64,
    du1: Complex64,
    u2: Complex64,
    du2: Complex64,
}

impl BasisValues {
    fn wronskian(&self) -> Complex64 {
        self.u1 * self.du2 - self.u2 * self.du1
    }
}

/// Fundamental pair of one segment.
///
/// The pair is referenced at the segment start so that nothing in a transfer
/// step ever grows beyond `e^{|Im q| * width}`: evaluating origin-referenced
/// solutions deep inside a classically forbidden region and solving for
/// coefficients there cancels `e^{|Im q| r}`-sized terms and poisons narrow
/// resonances with rounding noise.
///
/// * `l = 0`: `sin(q (r - ra))/q` and `cos(q (r - ra))` for every segment
///   (the first has `ra = 0`, which keeps the regular solution in slot one).
/// * `l = 1`, oscillatory or near the origin: the Riccati-Bessel pair
///   `S(qr)/q^2`, `q C(qr)`; even in `q`, so the square-root branch never
///   matters.
/// * `l = 1` with `|Im q| * ra` large: the exponential pair
///   `e^{+-i q (r - ra)} (1 +- i/(q r))`, whose phases are unity at the
///   segment start.
enum SegmentBasis {
    SWave {
        q2: Complex64,
        r_start: f64,
    },
    PWaveRegular {
        q2: Complex64,
    },
    PWaveExponential {
        q: Complex64,
        r_start: f64,
    },
}

impl SegmentBasis {
    fn new(l: u32, q2: Complex64, r_start: f64) -> Self {
        match l {
            0 => SegmentBasis::SWave { q2, r_start },
            1 => {
                let q = q2.sqrt();
                if q.im.abs() * r_start > 1.0 {
                    SegmentBasis::PWaveExponential { q, r_start }
                } else {
                    SegmentBasis::PWaveRegular { q2 }
                }
            }
            _ => unreachable!("callers gate on l <= 1"),
        }
    }

    fn eval(&self, r: f64) -> BasisValues {
        match *self {
            SegmentBasis::SWave { q2, r_start } => {
                let d = r - r_start;
                let z2 = q2 * (d * d);
                if z2.norm() < 1e-4 {
                    // sin(qd)/q = d (1 - z^2/6 + z^4/120); cos shares the series
                    let u1 = d * (1.0 - z2 / 6.0 + z2 * z2 / 120.0);
                    let du1 = 1.0 - z2 / 2.0 + z2 * z2 / 24.0;
                    BasisValues {
                        u1,
                        du1,
                        u2: du1,
                        du2: -q2 * u1,
                    }
                } else {
                    let q = q2.sqrt();
                    let z = q * d;
                    let u1 = z.sin() / q;
                    let u2 = z.cos();
                    BasisValues {
                        u1,
                        du1: u2,
                        u2,
                        du2: -q2 * u1,
                    }
                }
            }
            SegmentBasis::PWaveRegular { q2 } => {
                let z2 = q2 * (r * r);
                if z2.norm() < 1e-4 {
                    // S(z)/q^2 and q C(z) expanded in powers of q^2
                    let r2 = r * r;
                    let u1 = r2 / 3.0 * (1.0 - z2 / 10.0 + z2 * z2 / 280.0);
                    let du1 = 2.0 * r / 3.0 * (1.0 - z2 / 5.0 + 3.0 * z2 * z2 / 280.0);
                    let u2 = 1.0 / r + q2 * r / 2.0 - q2 * q2 * r * r2 / 8.0;
                    let du2 = -1.0 / r2 + q2 / 2.0 - 3.0 * q2 * q2 * r2 / 8.0;
                    BasisValues { u1, du1, u2, du2 }
                } else {
                    let q = q2.sqrt();
                    let z = q * r;
                    BasisValues {
                        u1: riccati_s1(z) / q2,
                        du1: riccati_s1_deriv(z) / q,
                        u2: q * riccati_c1(z),
                        du2: q2 * riccati_c1_deriv(z),
                    }
                }
            }
            SegmentBasis::PWaveExponential { q, r_start } => {
                let i = Complex64::i();
                let phase = (i * q * (r - r_start)).exp();
                let w = i / (q * r);
                let dw = -i / (q * r * r);
                let plus = 1.0 + w;
                let minus = 1.0 - w;
                BasisValues {
                    u1: phase * plus,
                    du1: phase * (i * q * plus + dw),
                    u2: minus / phase,
                    du2: (-i * q * minus - dw) / phase,
                }
            }
        }
    }
}

fn check_l(l: u32) -> Result<(), ExactError> {
    if l > 1 {
        Err(ExactError::UnsupportedL { l })
    } else {
        Ok(())
    }
}

/// Interior `(u, u')` at the support radius, up to normalization, obtained by
/// propagating the regular solution across all segments. The pair is rescaled
/// after every segment, which is the logarithmic-derivative transfer in
/// homogeneous form: barrier regions cannot overflow it.
fn interior_state_at_support(
    potential: &PotentialSpec,
    l: u32,
    e: Complex64,
) -> (Complex64, Complex64) {
    let segments = potential.segments();
    let first = SegmentBasis::new(l, 2.0 * (e - segments[0].value), 0.0);
    let v = first.eval(segments[0].r_end);
    let mut u = v.u1;
    let mut du = v.du1;
    let mut scale = u.norm().max(du.norm());
    u /= scale;
    du /= scale;

    for s in 1..segments.len() {
        let start = segments[s - 1].r_end;
        let basis = SegmentBasis::new(l, 2.0 * (e - segments[s].value), start);
        let va = basis.eval(start);
        let wr = va.wronskian();
        let a = (u * va.du2 - du * va.u2) / wr;
        let b = (du * va.u1 - u * va.du1) / wr;
        let vb = basis.eval(segments[s].r_end);
        u = a * vb.u1 + b * vb.u2;
        du = a * vb.du1 + b * vb.du2;
        scale = u.norm().max(du.norm());
        u /= scale;
        du /= scale;
    }
    (u, du)
}

/// Mismatch between the interior logarithmic derivative of the regular
/// solution at `r0` and the outgoing-wave logarithmic derivative
/// `ik + v_l'(k, r0)/v_l(k, r0)`. Zero exactly at Siegert eigenvalues.
pub fn matching_function(
    potential: &PotentialSpec,
    l: u32,
    e: Complex64,
) -> Result<Complex64, ExactError> {
    check_l(l)?;
    if e == Complex64::new(0.0, 0.0) {
        return Err(ExactError::ZeroEnergy);
    }
    let r0 = potential.support_radius();
    let (u, du) = interior_state_at_support(potential, l, e);
    if u.norm() == 0.0 {
        return Err(ExactError::InteriorNode { e });
    }
    let k = (2.0 * e).sqrt();
    let v = outgoing_vl(l, k, r0);
    if v.norm() < 1e-280 {
        return Err(ExactError::ExteriorPole { e });
    }
    let exterior = Complex64::i() * k + outgoing_vl_deriv(l, k, r0) / v;
    Ok(du / u - exterior)
}

/// Piecewise closed-form Siegert eigenfunction, normalized to unit
/// probability on `[0, r0]`.
#[derive(Debug, Clone)]
pub struct ExactWavefunction {
    potential: PotentialSpec,
    l: u32,
    energy: ComplexEnergy,
    /// Coefficients `(A, B)` of `A u1 + B u2` per interior segment.
    coeffs: Vec<(Complex64, Complex64)>,
    /// `u(r) = ext_coeff * e^{ikr} v_l(k, r)` for `r >= r0`.
    ext_coeff: Complex64,
    k: Complex64,
}

impl ExactWavefunction {
    fn assemble(potential: &PotentialSpec, l: u32, e: Complex64) -> Result<Self, ExactError> {
        check_l(l)?;
        let segments = potential.segments();
        let r0 = potential.support_radius();
        let mut coeffs: Vec<(Complex64, Complex64)> =
            vec![(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))];

        let mut u;
        let mut du;
        {
            let first = SegmentBasis::new(l, 2.0 * (e - segments[0].value), 0.0);
            let v = first.eval(segments[0].r_end);
            u = v.u1;
            du = v.du1;
        }
        for s in 1..segments.len() {
            let start = segments[s - 1].r_end;
            let basis = SegmentBasis::new(l, 2.0 * (e - segments[s].value), start);
            let va = basis.eval(start);
            let wr = va.wronskian();
            let a = (u * va.du2 - du * va.u2) / wr;
            let b = (du * va.u1 - u * va.du1) / wr;
            coeffs.push((a, b));
            let vb = basis.eval(segments[s].r_end);
            u = a * vb.u1 + b * vb.u2;
            du = a * vb.du1 + b * vb.du2;
        }

        let k = (2.0 * e).sqrt();
        let v0 = outgoing_vl(l, k, r0);
        if v0.norm() < 1e-280 {
            return Err(ExactError::ExteriorPole { e });
        }
        let ext_coeff = u / ((Complex64::i() * k * r0).exp() * v0);

        let mut wf = Self {
            potential: potential.clone(),
            l,
            energy: ComplexEnergy(e),
            coeffs,
            ext_coeff,
            k,
        };
        // unit interior norm, 64-point Gauss-Legendre per segment
        let rule = GaussLegendre::new(64);
        let mut norm2 = 0.0;
        let mut start = 0.0;
        for seg in segments {
            norm2 += rule.integrate(start, seg.r_end, |r| wf.eval(r).norm_sqr());
            start = seg.r_end;
        }
        let inv = 1.0 / norm2.sqrt();
        for c in &mut wf.coeffs {
            c.0 *= inv;
            c.1 *= inv;
        }
        wf.ext_coeff *= inv;
        Ok(wf)
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn energy(&self) -> ComplexEnergy {
        self.energy
    }

    pub fn support_radius(&self) -> f64 {
        self.potential.support_radius()
    }

    /// `u(r)`.
    pub fn eval(&self, r: f64) -> Complex64 {
        self.eval_with_deriv(r).0
    }

    /// `(u(r), du/dr)`.
    pub fn eval_with_deriv(&self, r: f64) -> (Complex64, Complex64) {
        let segments = self.potential.segments();
        for (idx, seg) in segments.iter().enumerate() {
            if r < seg.r_end {
                return self.eval_in_segment(idx, r);
            }
        }
        let k = self.k;
        let phase = (Complex64::i() * k * r).exp();
        let v = outgoing_vl(self.l, k, r);
        let dv = outgoing_vl_deriv(self.l, k, r);
        let u = self.ext_coeff * phase * v;
        let du = self.ext_coeff * phase * (Complex64::i() * k * v + dv);
        (u, du)
    }

    /// Closed form of one interior segment, also valid at its breakpoints;
    /// used by the continuity checks.
    fn eval_in_segment(&self, idx: usize, r: f64) -> (Complex64, Complex64) {
        let segments = self.potential.segments();
        let r_start = if idx == 0 { 0.0 } else { segments[idx - 1].r_end };
        let basis = SegmentBasis::new(self.l, 2.0 * (self.energy.0 - segments[idx].value), r_start);
        let v = basis.eval(r);
        let (a, b) = self.coeffs[idx];
        let mut u = a * v.u1;
        let mut du = a * v.du1;
        // the p-wave irregular solution is infinite at r = 0; its
        // coefficient is exactly zero in the first segment
        if b != Complex64::new(0.0, 0.0) {
            u += b * v.u2;
            du += b * v.du2;
        }
        (u, du)
    }

    /// Worst relative mismatch of `(u, u')` across all interior breakpoints
    /// and the support radius.
    pub fn continuity_defect(&self) -> f64 {
        let segments = self.potential.segments();
        let mut worst = 0.0f64;
        for idx in 0..segments.len() {
            let r = segments[idx].r_end;
            let (ul, dul) = self.eval_in_segment(idx, r);
            let (ur, dur) = if idx + 1 < segments.len() {
                self.eval_in_segment(idx + 1, r)
            } else {
                self.eval_with_deriv(r)
            };
            worst = worst.max((ul - ur).norm() / ul.norm().max(ur.norm()));
            worst = worst.max((dul - dur).norm() / dul.norm().max(dur.norm()));
        }
        worst
    }

    /// Probability inside radius `R` by adaptive quadrature of the
    /// closed-form density (1 on `[0, r0]` by normalization, up to quadrature
    /// error).
    pub fn probability_within(&self, big_r: f64) -> f64 {
        let mut total = 0.0;
        let mut start = 0.0;
        for seg in self.potential.segments() {
            let end = seg.r_end.min(big_r);
            if end <= start {
                break;
            }
            let mut f = |r: f64| self.eval(r).norm_sqr();
            total += adaptive_simpson(&mut f, start, end, 1e-12);
            start = end;
        }
        if big_r > start {
            let mut f = |r: f64| self.eval(r).norm_sqr();
            total += adaptive_simpson(&mut f, start, big_r, 1e-12);
        }
        total
    }
}

/// A converged Siegert state of any class.
#[derive(Debug, Clone)]
pub struct SiegertState {
    pub energy: ComplexEnergy,
    pub wavefunction: ExactWavefunction,
    /// `|matching_function|` at the converged eigenvalue.
    pub residual: f64,
    pub class: SiegertClass,
}

/// A converged resonance: a [`SiegertState`] with `gamma > 0`.
#[derive(Debug, Clone)]
pub struct ExactResonance {
    pub energy: ComplexEnergy,
    pub wavefunction: ExactWavefunction,
    pub residual: f64,
}

impl ExactResonance {
    pub fn gamma(&self) -> f64 {
        self.energy.gamma()
    }
}

/// Finds a Siegert eigenvalue near `guess` by a damped complex secant
/// iteration on [`matching_function`], and assembles the eigenfunction.
pub fn find_siegert_state(
    potential: &PotentialSpec,
    l: u32,
    guess: Complex64,
    tol: f64,
) -> Result<SiegertState, ExactError> {
    check_l(l)?;
    assert!(tol > 0.0, "tolerance must be positive");
    let f = |e: Complex64| matching_function(potential, l, e);

    let scale = guess.norm().max(1e-3);
    let mut e0 = guess;
    let mut e1 = guess * (1.0 + 1e-4) - Complex64::i() * (1e-4 * scale);
    let mut f0 = eval_with_nudge(&f, &mut e0)?;
    let mut f1 = eval_with_nudge(&f, &mut e1)?;

    const MAX_ITER: usize = 200;
    for _ in 0..MAX_ITER {
        if f1.norm() < tol {
            // The log-derivative ratio has pole-zero pairs where the interior
            // solution nearly vanishes at r0; secant iterates can converge to
            // the rounding noise of that cancellation. Genuine eigenstates
            // keep u(r0) well away from zero relative to u'(r0).
            let (u, du) = interior_state_at_support(potential, l, e1);
            if u.norm() < 1e-6 * u.norm().max(du.norm()) {
                return Err(ExactError::InteriorNode { e: e1 });
            }
            let class = classify(e1);
            let wavefunction = ExactWavefunction::assemble(potential, l, e1)?;
            return Ok(SiegertState {
                energy: ComplexEnergy(e1),
                wavefunction,
                residual: f1.norm(),
                class,
            });
        }
        let denom = f1 - f0;
        if denom.norm() == 0.0 {
            break;
        }
        let mut step = -f1 * (e1 - e0) / denom;
        let max_step = 0.25 * (e1.norm() + 0.01);
        if step.norm() > max_step {
            step *= max_step / step.norm();
        }
        let mut e2 = e1 + step;
        let f2 = eval_with_nudge(&f, &mut e2)?;
        e0 = e1;
        f0 = f1;
        e1 = e2;
        f1 = f2;
    }
    Err(ExactError::NoConvergence {
        iterations: MAX_ITER,
        last: e1,
        residual: f1.norm(),
    })
}

/// Retry once with a tiny perturbation if the matching function hits a
/// removable breakdown (interior node) at the requested energy.
fn eval_with_nudge(
    f: &impl Fn(Complex64) -> Result<Complex64, ExactError>,
    e: &mut Complex64,
) -> Result<Complex64, ExactError> {
    match f(*e) {
        Ok(v) => Ok(v),
        Err(ExactError::InteriorNode { .. }) | Err(ExactError::ZeroEnergy) => {
            *e += Complex64::new(1e-9, -1e-9) * e.norm().max(1e-6);
            f(*e)
        }
        Err(err) => Err(err),
    }
}

/// Like [`find_siegert_state`] but insists the converged root is a
/// resonance (`gamma > 0`); bound or virtual-like roots are an error.
pub fn find_resonance(
    potential: &PotentialSpec,
    l: u32,
    guess: Complex64,
    tol: f64,
) -> Result<ExactResonance, ExactError> {
    let state = find_siegert_state(potential, l, guess, tol)?;
    if state.class != SiegertClass::Resonance {
        return Err(ExactError::NotAResonance {
            energy: state.energy.0,
            gamma: state.energy.gamma(),
        });
    }
    Ok(ExactResonance {
        energy: state.energy,
        wavefunction: state.wavefunction,
        residual: state.residual,
    })
}

/// Width from the probability flux through radius `R >= r0`:
/// `Im(u*(R) u'(R)) / integral of |u|^2 over [0, R]`.
///
/// For an exact Siegert state this is independent of `R` and equals
/// `-2 Im E`.
pub fn gamma_from_flux(wf: &ExactWavefunction, big_r: f64) -> Result<f64, ExactError> {
    let r0 = wf.support_radius();
    if big_r < r0 {
        return Err(ExactError::BelowSupport { r: big_r, r0 });
    }
    let (u, du) = wf.eval_with_deriv(big_r);
    let flux = (u.conj() * du).im;
    Ok(flux / wf.probability_within(big_r))
}

/// Expansion velocity of the constant-probability sphere:
/// `rdot(R) = Im(u'(R)/u(R))`.
pub fn rdot(wf: &ExactWavefunction, big_r: f64) -> Result<f64, ExactError> {
    let r0 = wf.support_radius();
    if big_r < r0 {
        return Err(ExactError::BelowSupport { r: big_r, r0 });
    }
    let (u, du) = wf.eval_with_deriv(big_r);
    if u.norm() < 1e-280 {
        return Err(ExactError::PoleAtRadius { r: big_r });
    }
    Ok((du / u).im)
}

/// Time for the constant-probability sphere to expand from `r_start` to
/// `r_end`: the integral of `1/rdot`.
pub fn time_of_radius(
    wf: &ExactWavefunction,
    r_start: f64,
    r_end: f64,
) -> Result<f64, ExactError> {
    let r0 = wf.support_radius();
    if r_start < r0 || r_end < r_start {
        return Err(ExactError::BelowSupport {
            r: r_start.min(r_end),
            r0,
        });
    }
    if r_end == r_start {
        return Ok(0.0);
    }
    // positivity scan before committing to the quadrature
    const SCAN: usize = 256;
    for i in 0..=SCAN {
        let r = r_start + (r_end - r_start) * i as f64 / SCAN as f64;
        if rdot(wf, r)? <= 0.0 {
            return Err(ExactError::FlowReversal { r });
        }
    }
    let bad = std::cell::Cell::new(None);
    let mut f = |r: f64| {
        let v = rdot(wf, r).unwrap_or(-1.0);
        if v <= 0.0 {
            bad.set(Some(r));
            return 0.0;
        }
        1.0 / v
    };
    let t = adaptive_simpson(&mut f, r_start, r_end, 1e-12);
    if let Some(r) = bad.get() {
        return Err(ExactError::FlowReversal { r });
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{well_barrier, WellBarrierParams};

    fn l0_params(lambda: f64) -> WellBarrierParams {
        WellBarrierParams {
            v0: 0.15,
            delta: 5.0,
            r0: 6.0,
            lambda,
        }
    }

    fn l1_params(lambda: f64) -> WellBarrierParams {
        WellBarrierParams {
            v0: 0.3,
            delta: 5.0,
            r0: 6.0,
            lambda,
        }
    }

    /// Textbook s-wave bound state of the pure well (lambda = 0):
    /// bisection on q cot(q Delta) + kappa over E in (-V0, 0).
    fn bound_state_oracle(v0: f64, delta: f64) -> f64 {
        let g = |e: f64| {
            let q = (2.0 * (e + v0)).sqrt();
            let kappa = (-2.0 * e).sqrt();
            q * (q * delta).cos() / (q * delta).sin() + kappa
        };
        let mut lo = -v0 + 1e-9;
        let mut hi = -1e-12;
        assert!(g(lo) > 0.0 && g(hi) < 0.0, "bracket must straddle the root");
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Scans real energies below the barrier top for a converging resonance.
    fn scan_for_resonance(
        potential: &PotentialSpec,
        l: u32,
        lambda: f64,
    ) -> ExactResonance {
        let mut best: Option<ExactResonance> = None;
        let mut e = 0.01;
        while e < lambda {
            let guess = Complex64::new(e, -0.005);
            if let Ok(res) = find_resonance(potential, l, guess, 1e-12) {
                if res.energy.energy() > 0.0 && res.energy.energy() < lambda {
                    let replace = match &best {
                        Some(b) => res.energy.energy() < b.energy.energy(),
                        None => true,
                    };
                    if replace {
                        best = Some(res);
                    }
                }
            }
            e += 0.01;
        }
        best.expect("a resonance should exist below the barrier top")
    }

    #[test]
    fn matching_vanishes_at_square_well_bound_state() {
        let pot = well_barrier(l0_params(0.0)).unwrap();
        let eb = bound_state_oracle(0.15, 5.0);
        let f = matching_function(&pot, 0, Complex64::new(eb, 0.0)).unwrap();
        assert!(
            f.norm() < 1e-12,
            "matching at textbook bound state E = {eb}: |f| = {:e}",
            f.norm()
        );
    }

    #[test]
    fn matching_large_away_from_eigenvalues() {
        let pot = well_barrier(l0_params(0.4)).unwrap();
        let f = matching_function(&pot, 0, Complex64::new(10.0, 0.0)).unwrap();
        assert!(f.norm() > 1e-3, "|f(10)| = {:e}", f.norm());
        // regression pin, first verified run
        assert!(
            (f.norm() - 4.554112143656434).abs() < 1e-10,
            "|f(10)| drifted: {:.17e}",
            f.norm()
        );
    }

    #[test]
    fn unsupported_l_rejected() {
        let pot = well_barrier(l0_params(0.4)).unwrap();
        assert!(matches!(
            matching_function(&pot, 2, Complex64::new(0.1, 0.0)),
            Err(ExactError::UnsupportedL { l: 2 })
        ));
    }

    #[test]
    fn resonance_found_and_self_consistent_l0() {
        let pot = well_barrier(l0_params(0.5)).unwrap();
        let res = scan_for_resonance(&pot, 0, 0.5);
        assert!(res.residual < 1e-10);
        assert!(res.gamma() > 0.0);
        // the converged energy satisfies the matching equation
        let f = matching_function(&pot, 0, res.energy.0).unwrap();
        assert!(f.norm() < 1e-10);
        // continuity of the assembled wavefunction
        assert!(res.wavefunction.continuity_defect() < 1e-10);
        // interior normalization
        let p = res.wavefunction.probability_within(6.0);
        assert!((p - 1.0).abs() < 1e-9, "interior norm {p}");
        // regression pin, first verified run
        let e = res.energy.0;
        assert!(
            (e.re - 3.94679926224101640e-1).abs() < 1e-11
                && (e.im + 5.90421833427311193e-2).abs() < 1e-11,
            "resonance drifted: ({:.17e}, {:.17e})",
            e.re,
            e.im
        );
    }

    #[test]
    fn gamma_decreases_with_barrier_height() {
        let lambdas = [0.45, 0.55, 0.65, 0.75, 0.85];
        let mut gammas = Vec::new();
        let mut guess = None;
        for &lambda in &lambdas {
            let pot = well_barrier(l0_params(lambda)).unwrap();
            let res = match guess {
                None => scan_for_resonance(&pot, 0, lambda),
                Some(g) => find_resonance(&pot, 0, g, 1e-12).unwrap(),
            };
            guess = Some(res.energy.0);
            gammas.push(res.gamma());
        }
        for w in gammas.windows(2) {
            assert!(
                w[1] < w[0],
                "gamma must decrease with barrier height: {gammas:?}"
            );
        }
    }

    #[test]
    fn bound_state_guess_is_classified_not_resonance() {
        let pot = well_barrier(l0_params(0.0)).unwrap();
        let eb = bound_state_oracle(0.15, 5.0);
        let err = find_resonance(&pot, 0, Complex64::new(eb, 0.0), 1e-12).unwrap_err();
        assert!(matches!(err, ExactError::NotAResonance { .. }), "{err}");
        // but the state itself converges fine and is classified bound
        let state = find_siegert_state(&pot, 0, Complex64::new(eb, 0.0), 1e-12).unwrap();
        assert_eq!(state.class, SiegertClass::Bound);
        assert!((state.energy.0.re - eb).abs() < 1e-10);
    }

    #[test]
    fn flux_equals_gamma_and_is_radius_independent() {
        let pot = well_barrier(l0_params(0.5)).unwrap();
        let res = scan_for_resonance(&pot, 0, 0.5);
        let gamma = res.gamma();
        for factor in [1.0, 1.5, 2.0] {
            let g = gamma_from_flux(&res.wavefunction, 6.0 * factor).unwrap();
            assert!(
                ((g - gamma) / gamma).abs() < 1e-8,
                "flux at R = {} r0: {g} vs {gamma}",
                factor
            );
        }
        assert!(matches!(
            gamma_from_flux(&res.wavefunction, 5.9),
            Err(ExactError::BelowSupport { .. })
        ));
    }

    #[test]
    fn bound_state_has_zero_flux_and_zero_rdot() {
        let pot = well_barrier(l0_params(0.0)).unwrap();
        let eb = bound_state_oracle(0.15, 5.0);
        let state = find_siegert_state(&pot, 0, Complex64::new(eb, 0.0), 1e-13).unwrap();
        let g = gamma_from_flux(&state.wavefunction, 6.0).unwrap();
        assert!(g.abs() < 1e-12, "bound-state flux {g:e}");
        let v = rdot(&state.wavefunction, 7.0).unwrap();
        assert!(v.abs() < 1e-12, "bound-state rdot {v:e}");
    }

    #[test]
    fn rdot_is_re_k_for_s_waves() {
        let pot = well_barrier(l0_params(0.5)).unwrap();
        let res = scan_for_resonance(&pot, 0, 0.5);
        let re_k = res.energy.wavenumber().re;
        for big_r in [6.0, 7.3, 11.0] {
            let v = rdot(&res.wavefunction, big_r).unwrap();
            assert!((v - re_k).abs() < 1e-12 * re_k);
        }
    }

    #[test]
    fn time_of_radius_s_wave_closed_form() {
        let pot = well_barrier(l0_params(0.5)).unwrap();
        let res = scan_for_resonance(&pot, 0, 0.5);
        let re_k = res.energy.wavenumber().re;
        let t = time_of_radius(&res.wavefunction, 6.0, 9.0).unwrap();
        assert!((t - 3.0 / re_k).abs() < 1e-10 * (3.0 / re_k));
        assert_eq!(time_of_radius(&res.wavefunction, 6.0, 6.0).unwrap(), 0.0);
    }

    #[test]
    fn particle_number_is_conserved_along_the_flow() {
        let pot = well_barrier(l0_params(0.5)).unwrap();
        let res = scan_for_resonance(&pot, 0, 0.5);
        let gamma = res.gamma();
        for big_r in [7.0, 9.0, 12.0] {
            let t = time_of_radius(&res.wavefunction, 6.0, big_r).unwrap();
            let n = (-gamma * t).exp() * res.wavefunction.probability_within(big_r);
            assert!(
                (n - 1.0).abs() < 1e-6,
                "N(R = {big_r}) = {n}, t = {t}, gamma = {gamma}"
            );
        }
    }

    #[test]
    fn re_k_satisfies_the_energy_relation() {
        let pot = well_barrier(l0_params(0.5)).unwrap();
        let res = scan_for_resonance(&pot, 0, 0.5);
        let k = res.energy.wavenumber();
        let e = res.energy.energy();
        let gamma = res.gamma();
        let expect = ((e * e + 0.25 * gamma * gamma).sqrt() + e).sqrt();
        assert!((k.re - expect).abs() < 1e-12);
    }

    #[test]
    fn p_wave_resonance_and_rdot_cross_check() {
        let pot = well_barrier(l1_params(0.7)).unwrap();
        let res = scan_for_resonance(&pot, 1, 0.7);
        assert!(res.residual < 1e-10);
        assert!(res.gamma() > 0.0);
        assert!(res.wavefunction.continuity_defect() < 1e-10);

        // rdot at r0 against the hand-written v_1 = 1 + i/(k r0) formula
        let k = res.energy.wavenumber();
        let r0 = 6.0;
        let v1 = Complex64::new(1.0, 0.0) + Complex64::i() / (k * r0);
        let dv1 = -Complex64::i() / (k * r0 * r0);
        let expect = k.re + (dv1 / v1).im;
        let got = rdot(&res.wavefunction, r0).unwrap();
        assert!((got - expect).abs() < 1e-12 * expect.abs().max(1.0));

        // flux identity holds for p-waves too
        let gamma = res.gamma();
        for big_r in [6.0, 9.0, 12.0] {
            let g = gamma_from_flux(&res.wavefunction, big_r).unwrap();
            assert!(((g - gamma) / gamma).abs() < 1e-8);
        }
    }

    #[test]
    fn p_wave_time_matches_refined_midpoint_oracle() {
        let pot = well_barrier(l1_params(0.7)).unwrap();
        let res = scan_for_resonance(&pot, 1, 0.7);
        let (a, b) = (6.0, 12.0);
        let t = time_of_radius(&res.wavefunction, a, b).unwrap();

        // Richardson-refined midpoint rule as an independent oracle
        let midpoint = |n: usize| -> f64 {
            let h = (b - a) / n as f64;
            (0..n)
                .map(|i| {
                    let r = a + (i as f64 + 0.5) * h;
                    h / rdot(&res.wavefunction, r).unwrap()
                })
                .sum()
        };
        let m1 = midpoint(4096);
        let m2 = midpoint(8192);
        let oracle = (4.0 * m2 - m1) / 3.0;
        assert!(
            ((t - oracle) / oracle).abs() < 1e-8,
            "t = {t} vs oracle {oracle}"
        );
    }

    #[test]
    fn flow_reversal_detected_for_inward_segments() {
        let pot = well_barrier(l0_params(0.5)).unwrap();
        let res = scan_for_resonance(&pot, 0, 0.5);
        assert!(matches!(
            time_of_radius(&res.wavefunction, 9.0, 6.0),
            Err(ExactError::BelowSupport { .. })
        ));
    }
}
