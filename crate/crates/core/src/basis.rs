//! Orthonormal Laguerre basis and the matrix elements of the Hamiltonian.
//!
//! The basis functions are
//! `Phi_i(r) = sqrt(beta) * (beta r) * e^{-beta r/2} * L_i^{(2)}(beta r) / sqrt((i+1)(i+2))`
//! for `i = 1..=N`. They vanish at the origin, are orthonormal under plain
//! `dr` integration on `[0, inf)`, and give finite centrifugal matrix
//! elements; this is the unique reading consistent with the reduced radial
//! problem.
//!
//! For the well+barrier potential the Hamiltonian splits affinely:
//! `H(lambda) = H0 + lambda W` with `H0 = T_l - V0 I(Delta)` and
//! `W = I(r0) - I(Delta)`, where `I(R)` is the truncated overlap matrix.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::laguerre::scaled_laguerre_all;
use crate::linalg::{affine_combination, Matrix};
use crate::potentials::WellBarrierTemplate;
use crate::quadrature::{GaussLaguerre, GaussLegendre};

#[derive(Debug, Error)]
pub enum BasisError {
    #[error("basis size must be at least 1, got {n}")]
    EmptyBasis { n: usize },
    #[error("inverse length scale beta must be positive and finite, got {beta}")]
    BadBeta { beta: f64 },
    #[error("basis index {i} outside 1..={n}")]
    IndexOutOfRange { i: usize, n: usize },
    #[error("radius must be nonnegative, got {r}")]
    NegativeRadius { r: f64 },
    #[error("truncation radius must be positive, got {r}")]
    BadTruncationRadius { r: f64 },
    #[error("potential template invalid: need 0 < delta < r0 and v0 >= 0, got v0 = {v0}, delta = {delta}, r0 = {r0}")]
    BadTemplate { v0: f64, delta: f64, r0: f64 },
}

/// The truncated Laguerre basis `{Phi_i}` for `i = 1..=n`.
///
/// `l` records the angular momentum the matrix elements are built for; the
/// basis functions themselves do not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaguerreBasis {
    n: usize,
    beta: f64,
    l: u32,
}

impl LaguerreBasis {
    pub fn new(n: usize, beta: f64, l: u32) -> Result<Self, BasisError> {
        if n == 0 {
            return Err(BasisError::EmptyBasis { n });
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(BasisError::BadBeta { beta });
        }
        Ok(Self { n, beta, l })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub(crate) fn norm(i: usize) -> f64 {
        1.0 / (((i + 1) * (i + 2)) as f64).sqrt()
    }

    /// `Phi_i(r)` for a basis label `i` in `1..=n`.
    pub fn eval(&self, i: usize, r: f64) -> Result<f64, BasisError> {
        if i == 0 || i > self.n {
            return Err(BasisError::IndexOutOfRange { i, n: self.n });
        }
        if r < 0.0 {
            return Err(BasisError::NegativeRadius { r });
        }
        let mut buf = vec![0.0; i + 1];
        let x = self.beta * r;
        scaled_laguerre_all(2.0, x, &mut buf);
        Ok(self.beta.sqrt() * x * buf[i] * Self::norm(i))
    }

    /// Fills `out[i-1] = Phi_i(r)` for all labels at once.
    pub fn eval_all(&self, r: f64, out: &mut [f64]) {
        assert_eq!(out.len(), self.n);
        let x = self.beta * r;
        let mut buf = vec![0.0; self.n + 1];
        scaled_laguerre_all(2.0, x, &mut buf);
        let sb = self.beta.sqrt();
        for i in 1..=self.n {
            out[i - 1] = sb * x * buf[i] * Self::norm(i);
        }
    }
}

/// Matrix of overlaps truncated at radius `R`:
/// entry `(i-1, j-1)` holds the integral of `Phi_i Phi_j` over `[0, R]`.
#[derive(Debug, Clone)]
pub struct TruncatedOverlaps {
    radius: f64,
    matrix: Matrix,
}

impl TruncatedOverlaps {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Quadratic form `a^T I(R) a` for a coefficient vector in storage order.
    pub fn quadratic_form(&self, a: &[f64]) -> f64 {
        let n = self.matrix.nrows();
        assert_eq!(a.len(), n);
        let mut total = 0.0;
        for i in 0..n {
            let row = self.matrix.row(i);
            let mut s = 0.0;
            for j in 0..n {
                s += row[j] * a[j];
            }
            total += a[i] * s;
        }
        total
    }
}

/// `I_{ij}(R)` by panel Gauss-Legendre: panels of width at most 1 with 32
/// nodes each, which resolves the fastest basis oscillations to machine
/// accuracy for every `N` used here.
pub fn truncated_overlaps(basis: &LaguerreBasis, r: f64) -> Result<TruncatedOverlaps, BasisError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(BasisError::BadTruncationRadius { r });
    }
    let n = basis.size();
    let rule = GaussLegendre::new(32);
    let n_panels = (r.ceil() as usize).max(1);
    let width = r / n_panels as f64;

    let mut matrix = Matrix::zeros(n, n);
    let mut phi = vec![0.0; n];
    for p in 0..n_panels {
        let a = p as f64 * width;
        for (x, w) in rule.mapped(a, a + width) {
            basis.eval_all(x, &mut phi);
            for i in 0..n {
                let wi = w * phi[i];
                let row = matrix.row_mut(i);
                for (j, &pj) in phi.iter().enumerate().skip(i) {
                    row[j] += wi * pj;
                }
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            matrix[(j, i)] = matrix[(i, j)];
        }
    }
    Ok(TruncatedOverlaps { radius: r, matrix })
}

/// Kinetic plus centrifugal matrix
/// `T_{ij} = (1/2) <Phi_i'|Phi_j'> + l(l+1)/2 <Phi_i|Phi_j / r^2>`,
/// assembled with a Gauss-Laguerre rule of `n + 8` nodes; the integrands are
/// `e^{-x}` times polynomials of degree at most `2n + 2`, so the quadrature
/// is exact up to rounding.
pub fn kinetic_centrifugal_matrix(basis: &LaguerreBasis, l: u32) -> Matrix {
    let n = basis.size();
    let beta = basis.beta();
    let rule = GaussLaguerre::new(n + 8);
    let centrifugal = (l * (l + 1)) as f64 / 2.0;

    let mut matrix = Matrix::zeros(n, n);
    let mut s2 = vec![0.0; n + 1];
    let mut s3 = vec![0.0; n.max(1)];
    let mut dg = vec![0.0; n]; // g_i'(x) at the node, storage index i-1
    for (&x, &w) in rule.nodes().iter().zip(rule.scaled_weights()) {
        scaled_laguerre_all(2.0, x, &mut s2);
        scaled_laguerre_all(3.0, x, &mut s3);
        for i in 1..=n {
            dg[i - 1] = (1.0 - 0.5 * x) * s2[i] - x * s3[i - 1];
        }
        for i in 1..=n {
            let row = matrix.row_mut(i - 1);
            let di = dg[i - 1];
            let si = s2[i];
            for j in i..=n {
                // g_i g_j / x^2 = s2_i s2_j: the x^2 factors cancel
                row[j - 1] += w * (0.5 * di * dg[j - 1] + centrifugal * si * s2[j]);
            }
        }
    }
    let b2 = beta * beta;
    for i in 1..=n {
        for j in i..=n {
            let v = matrix[(i - 1, j - 1)] * b2 * LaguerreBasis::norm(i) * LaguerreBasis::norm(j);
            matrix[(i - 1, j - 1)] = v;
            matrix[(j - 1, i - 1)] = v;
        }
    }
    matrix
}

/// Affine factorization `H(lambda) = H0 + lambda W` of the well+barrier
/// Hamiltonian in the truncated basis, together with the overlap matrices
/// the boundary-density extraction needs.
#[derive(Debug, Clone)]
pub struct HamiltonianFactors {
    h0: Matrix,
    w: Matrix,
    overlap_delta: TruncatedOverlaps,
    overlap_r0: TruncatedOverlaps,
    basis: LaguerreBasis,
    template: WellBarrierTemplate,
    l: u32,
}

impl HamiltonianFactors {
    pub fn h0(&self) -> &Matrix {
        &self.h0
    }

    pub fn w(&self) -> &Matrix {
        &self.w
    }

    pub fn overlap_delta(&self) -> &TruncatedOverlaps {
        &self.overlap_delta
    }

    pub fn overlap_r0(&self) -> &TruncatedOverlaps {
        &self.overlap_r0
    }

    pub fn basis(&self) -> &LaguerreBasis {
        &self.basis
    }

    pub fn template(&self) -> WellBarrierTemplate {
        self.template
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    /// Dense `H(lambda) = H0 + lambda W`.
    pub fn hamiltonian(&self, lambda: f64) -> Matrix {
        affine_combination(&self.h0, &self.w, lambda)
    }
}

/// Builds `H0 = T_l - V0 I(Delta)` and `W = I(r0) - I(Delta)` for a
/// well+barrier template with the barrier height left free.
pub fn assemble_factors(
    basis: &LaguerreBasis,
    template: WellBarrierTemplate,
    l: u32,
) -> Result<HamiltonianFactors, BasisError> {
    if !(template.delta > 0.0 && template.r0 > template.delta && template.v0 >= 0.0) {
        return Err(BasisError::BadTemplate {
            v0: template.v0,
            delta: template.delta,
            r0: template.r0,
        });
    }
    let kinetic = kinetic_centrifugal_matrix(basis, l);
    let overlap_delta = truncated_overlaps(basis, template.delta)?;
    let overlap_r0 = truncated_overlaps(basis, template.r0)?;
    let h0 = affine_combination(&kinetic, overlap_delta.matrix(), -template.v0);
    let w = affine_combination(overlap_r0.matrix(), overlap_delta.matrix(), -1.0);
    Ok(HamiltonianFactors {
        h0,
        w,
        overlap_delta,
        overlap_r0,
        basis: *basis,
        template,
        l,
    })
}
