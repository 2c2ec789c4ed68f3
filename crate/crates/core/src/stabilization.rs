//! Barrier-height sweep of the variational eigenproblem and
//! double-orthogonality localization of resonances.
//!
//! Because the basis is independent of the sweep parameter, wavefunction
//! overlaps reduce to coefficient-vector dot products: the DO function is
//! `D_n(lambda) = <a_n(lambda_L), a_n(lambda)>^2 + <a_n(lambda_R), a_n(lambda)>^2`.
//! A resonance crossing the `n`-th eigenvalue curve shows up as a deep
//! interior minimum of `D_n`; the minimum is refined by alternating
//! parabolic-vertex and bisection steps, each refinement triggering a fresh
//! eigensolve.

use rayon::prelude::*;
use thiserror::Error;

use crate::basis::HamiltonianFactors;
use crate::linalg::{self, Matrix};

#[derive(Debug, Error)]
pub enum StabilizationError {
    #[error(transparent)]
    Eigen(#[from] linalg::EigenError),
    #[error("lambda grid must be nonempty and strictly increasing")]
    BadGrid,
    #[error("eigenvector band must satisfy 1 <= band_max <= {n}, got {band_max}")]
    BadBand { band_max: usize, n: usize },
    #[error("window [{left}, {right}] invalid for a grid of {len} points")]
    BadWindow {
        left: usize,
        right: usize,
        len: usize,
    },
    #[error("window holds {points} grid points; at least 3 are needed")]
    WindowTooNarrow { points: usize },
    #[error("eigenvalue index n = {n} outside the stored band 1..={band_max}")]
    IndexOutsideBand { n: usize, band_max: usize },
}

/// Eigenvalues and a band of eigenvectors of `H(lambda)` across a
/// lambda grid. Eigenvectors are kept for `n = 1..=band_max` only; the
/// DO analysis never needs more, and dropping the rest keeps large sweeps in
/// memory.
#[derive(Debug, Clone)]
pub struct VariationalSpectrum {
    lambda_grid: Vec<f64>,
    eigenvalues: Vec<Vec<f64>>,
    band_vectors: Vec<Matrix>,
    band_max: usize,
    factors: HamiltonianFactors,
}

/// Full decomposition of a dense symmetric matrix: eigenvalues ascending,
/// eigenvector `n` (0-based) in row `n` of the returned matrix.
pub fn eigensolve_symmetric(matrix: &Matrix) -> Result<(Vec<f64>, Matrix), StabilizationError> {
    let eig = linalg::eigh(matrix)?;
    Ok((eig.values, eig.vectors))
}

/// Independent eigensolves of `H(lambda)` over the grid, in parallel, with
/// deterministic ordering.
pub fn sweep(
    factors: HamiltonianFactors,
    lambda_grid: &[f64],
    band_max: usize,
) -> Result<VariationalSpectrum, StabilizationError> {
    if lambda_grid.is_empty() || lambda_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(StabilizationError::BadGrid);
    }
    let n = factors.basis().size();
    if band_max == 0 || band_max > n {
        return Err(StabilizationError::BadBand { band_max, n });
    }

    let results: Result<Vec<(Vec<f64>, Matrix)>, StabilizationError> = lambda_grid
        .par_iter()
        .map(|&lambda| {
            let h = factors.hamiltonian(lambda);
            let (values, vectors) = eigensolve_symmetric(&h)?;
            let mut band = Matrix::zeros(band_max, n);
            for row in 0..band_max {
                band.row_mut(row).copy_from_slice(vectors.row(row));
            }
            Ok((values, band))
        })
        .collect();
    let results = results?;

    let (eigenvalues, band_vectors) = results.into_iter().unzip();
    Ok(VariationalSpectrum {
        lambda_grid: lambda_grid.to_vec(),
        eigenvalues,
        band_vectors,
        band_max,
        factors,
    })
}

impl VariationalSpectrum {
    pub fn lambda_grid(&self) -> &[f64] {
        &self.lambda_grid
    }

    /// All eigenvalues (ascending) at grid point `idx`.
    pub fn eigenvalues_at(&self, idx: usize) -> &[f64] {
        &self.eigenvalues[idx]
    }

    /// Eigenvector for the 1-based eigenvalue label `n` at grid point `idx`.
    pub fn eigenvector_at(&self, idx: usize, n: usize) -> Result<&[f64], StabilizationError> {
        if n == 0 || n > self.band_max {
            return Err(StabilizationError::IndexOutsideBand {
                n,
                band_max: self.band_max,
            });
        }
        Ok(self.band_vectors[idx].row(n - 1))
    }

    pub fn band_max(&self) -> usize {
        self.band_max
    }

    pub fn basis_size(&self) -> usize {
        self.factors.basis().size()
    }

    pub fn factors(&self) -> &HamiltonianFactors {
        &self.factors
    }

    #[cfg(test)]
    fn band_vectors_mut(&mut self) -> &mut [Matrix] {
        &mut self.band_vectors
    }
}

/// Window of grid indices `[left, right]` over which a DO curve is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DoWindow {
    pub left: usize,
    pub right: usize,
}

/// A refined interior minimum of a DO curve.
#[derive(Debug, Clone)]
pub struct DoMinimum {
    pub lambda: f64,
    pub value: f64,
    /// `E_n` at the refined lambda.
    pub energy: f64,
    /// Eigenvector at the refined lambda.
    pub vector: Vec<f64>,
}

/// Double-orthogonality function of one eigenvalue label over a window,
/// sampled on the grid, with refined minima.
#[derive(Debug, Clone)]
pub struct DoCurve {
    pub n: usize,
    pub window: DoWindow,
    /// Grid lambdas of the window.
    pub lambdas: Vec<f64>,
    /// `D_n` at the window's grid points.
    pub values: Vec<f64>,
    /// Interior minima, refined; not threshold-filtered.
    pub minima: Vec<DoMinimum>,
}

/// Squared-overlap sum against the window-endpoint eigenvectors. Inner
/// products of unit vectors are clipped to `[-1, 1]`, which pins the
/// mathematical bounds `0 <= D <= 2` against rounding spill.
fn do_value(a_left: &[f64], a_right: &[f64], a: &[f64]) -> f64 {
    let mut dl = 0.0;
    let mut dr = 0.0;
    for k in 0..a.len() {
        dl += a_left[k] * a[k];
        dr += a_right[k] * a[k];
    }
    dl = dl.clamp(-1.0, 1.0);
    dr = dr.clamp(-1.0, 1.0);
    dl * dl + dr * dr
}

/// Builds `D_n` over the window and refines every interior grid minimum by
/// parabolic interpolation with bisection fallback, stopping once the
/// bracket is below `1e-4` of the window width.
pub fn do_curve(
    spectrum: &VariationalSpectrum,
    n: usize,
    window: DoWindow,
) -> Result<DoCurve, StabilizationError> {
    let len = spectrum.lambda_grid.len();
    if window.left >= window.right || window.right >= len {
        return Err(StabilizationError::BadWindow {
            left: window.left,
            right: window.right,
            len,
        });
    }
    let points = window.right - window.left + 1;
    if points < 3 {
        return Err(StabilizationError::WindowTooNarrow { points });
    }
    let a_left = spectrum.eigenvector_at(window.left, n)?;
    let a_right = spectrum.eigenvector_at(window.right, n)?;

    let lambdas: Vec<f64> = spectrum.lambda_grid[window.left..=window.right].to_vec();
    let values: Vec<f64> = (window.left..=window.right)
        .map(|idx| {
            do_value(
                a_left,
                a_right,
                spectrum.eigenvector_at(idx, n).expect("n checked"),
            )
        })
        .collect();

    // fresh eigensolve at an off-grid lambda
    let evaluate = |lambda: f64| -> Result<(f64, f64, Vec<f64>), StabilizationError> {
        let h = spectrum.factors.hamiltonian(lambda);
        let (vals, vecs) = eigensolve_symmetric(&h)?;
        let vec = vecs.row(n - 1).to_vec();
        Ok((do_value(a_left, a_right, &vec), vals[n - 1], vec))
    };

    let width = lambdas[points - 1] - lambdas[0];
    let tol = 1e-4 * width;
    let mut minima: Vec<DoMinimum> = Vec::new();
    for i in 1..points - 1 {
        let is_min = values[i] <= values[i - 1]
            && values[i] <= values[i + 1]
            && (values[i] < values[i - 1] || values[i] < values[i + 1]);
        if !is_min {
            continue;
        }

        let (mut la, mut va) = (lambdas[i - 1], values[i - 1]);
        let (mut lb, mut vb) = (lambdas[i], values[i]);
        let (mut lc, mut vc) = (lambdas[i + 1], values[i + 1]);
        let mut best = DoMinimum {
            lambda: lb,
            value: vb,
            energy: spectrum.eigenvalues[window.left + i][n - 1],
            vector: spectrum.eigenvector_at(window.left + i, n)?.to_vec(),
        };

        let mut iterations = 0;
        while lc - la > tol && iterations < 40 {
            iterations += 1;
            let sep = 0.05 * (lc - la);
            let vertex = parabola_vertex(la, va, lb, vb, lc, vc);
            let candidate = match vertex {
                Some(v) if v > la + sep && v < lc - sep && (v - lb).abs() > 1e-3 * (lc - la) => v,
                // bisect the larger flank when the fit degenerates
                _ => {
                    if lb - la > lc - lb {
                        0.5 * (la + lb)
                    } else {
                        0.5 * (lb + lc)
                    }
                }
            };
            let (dv, energy, vector) = evaluate(candidate)?;
            if dv < best.value {
                best = DoMinimum {
                    lambda: candidate,
                    value: dv,
                    energy,
                    vector,
                };
            }
            if candidate < lb {
                if dv < vb {
                    (lc, vc) = (lb, vb);
                    (lb, vb) = (candidate, dv);
                } else {
                    (la, va) = (candidate, dv);
                }
            } else if dv < vb {
                (la, va) = (lb, vb);
                (lb, vb) = (candidate, dv);
            } else {
                (lc, vc) = (candidate, dv);
            }
        }
        minima.push(best);
    }

    // plateaus can spawn duplicate refinements; keep the deeper one
    minima.sort_by(|a, b| a.lambda.partial_cmp(&b.lambda).unwrap());
    minima.dedup_by(|b, a| {
        if (b.lambda - a.lambda).abs() < 2.0 * tol {
            if b.value < a.value {
                std::mem::swap(a, b);
            }
            true
        } else {
            false
        }
    });

    Ok(DoCurve {
        n,
        window,
        lambdas,
        values,
        minima,
    })
}

fn parabola_vertex(xa: f64, ya: f64, xb: f64, yb: f64, xc: f64, yc: f64) -> Option<f64> {
    let d1 = (xb - xa) * (yb - yc);
    let d2 = (xb - xc) * (yb - ya);
    let denom = 2.0 * (d1 - d2);
    if denom.abs() < 1e-300 {
        return None;
    }
    let num = (xb - xa) * d1 - (xb - xc) * d2;
    let v = xb - num / denom;
    v.is_finite().then_some(v)
}

/// A localized resonance candidate: the DO minimum plus everything the width
/// extraction needs.
#[derive(Debug, Clone)]
pub struct ResonanceEstimate {
    /// 1-based eigenvalue label the minimum belongs to.
    pub n0: usize,
    pub lambda_star: f64,
    /// Depth of the DO minimum.
    pub do_value: f64,
    /// Resonance energy `E_n(lambda_star)` (Hartree).
    pub energy: f64,
    /// `|u(r0)|^2` of the unit-interior-norm variational state (1/Bohr).
    pub boundary_density: f64,
    /// Filled in by the width extraction.
    pub gamma: Option<f64>,
    pub basis_size: usize,
    /// Eigenvector at the refined minimum, in storage order.
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct LocalizeOptions {
    /// DO minima above this depth are not considered resonances.
    pub threshold: f64,
}

impl Default for LocalizeOptions {
    fn default() -> Self {
        Self { threshold: 0.5 }
    }
}

/// Boundary probability density `psi(r0)^2 / (a^T I(r0) a)` of an
/// eigenvector in storage order.
pub fn boundary_density(factors: &HamiltonianFactors, a: &[f64]) -> f64 {
    let basis = factors.basis();
    let r0 = factors.template().r0;
    let mut phi = vec![0.0; basis.size()];
    basis.eval_all(r0, &mut phi);
    let psi: f64 = phi.iter().zip(a).map(|(p, c)| p * c).sum();
    let denom = factors.overlap_r0().quadratic_form(a);
    psi * psi / denom
}

/// All DO minima of eigenvalue label `n` below the threshold, deepest first.
/// An empty vector means no resonance in the window; that is a result, not
/// an error.
pub fn localize(
    spectrum: &VariationalSpectrum,
    n: usize,
    window: DoWindow,
    opts: LocalizeOptions,
) -> Result<Vec<ResonanceEstimate>, StabilizationError> {
    let curve = do_curve(spectrum, n, window)?;
    let mut estimates: Vec<ResonanceEstimate> = curve
        .minima
        .into_iter()
        .filter(|m| m.value < opts.threshold)
        .map(|m| ResonanceEstimate {
            n0: n,
            lambda_star: m.lambda,
            do_value: m.value,
            energy: m.energy,
            boundary_density: boundary_density(&spectrum.factors, &m.vector),
            gamma: None,
            basis_size: spectrum.basis_size(),
            coefficients: m.vector,
        })
        .collect();
    estimates.sort_by(|a, b| a.do_value.partial_cmp(&b.do_value).unwrap());
    Ok(estimates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{assemble_factors, LaguerreBasis};
    use crate::potentials::WellBarrierTemplate;

    fn grid(min: f64, max: f64, points: usize) -> Vec<f64> {
        (0..points)
            .map(|i| min + (max - min) * i as f64 / (points - 1) as f64)
            .collect()
    }

    fn paper_factors(n: usize, l: u32) -> HamiltonianFactors {
        let basis = LaguerreBasis::new(n, 1.0, l).unwrap();
        let template = WellBarrierTemplate {
            v0: 0.15,
            delta: 5.0,
            r0: 6.0,
        };
        assemble_factors(&basis, template, l).unwrap()
    }

    #[test]
    fn eigensolve_trivial_matrices() {
        let (vals, _) = eigensolve_symmetric(&Matrix::identity(4)).unwrap();
        assert!(vals.iter().all(|v| (v - 1.0).abs() < 1e-14));

        let mut swap = Matrix::zeros(2, 2);
        swap[(0, 1)] = 1.0;
        swap[(1, 0)] = 1.0;
        let (vals, _) = eigensolve_symmetric(&swap).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn single_point_sweep() {
        let factors = paper_factors(20, 0);
        let spectrum = sweep(factors, &[0.4], 5).unwrap();
        assert_eq!(spectrum.lambda_grid(), &[0.4]);
        assert_eq!(spectrum.eigenvalues_at(0).len(), 20);
        assert_eq!(spectrum.eigenvector_at(0, 5).unwrap().len(), 20);
        assert!(spectrum.eigenvector_at(0, 6).is_err());
    }

    #[test]
    fn eigenvalues_monotone_in_lambda() {
        let factors = paper_factors(30, 0);
        let spectrum = sweep(factors, &grid(0.0, 1.0, 11), 10).unwrap();
        for n in 0..30 {
            for i in 1..11 {
                assert!(
                    spectrum.eigenvalues_at(i)[n] >= spectrum.eigenvalues_at(i - 1)[n] - 1e-12,
                    "eigenvalue {n} decreased between grid points {} and {i}",
                    i - 1
                );
            }
        }
    }

    #[test]
    fn rejects_bad_grids_and_bands() {
        let factors = paper_factors(10, 0);
        assert!(matches!(
            sweep(factors.clone(), &[], 3),
            Err(StabilizationError::BadGrid)
        ));
        assert!(matches!(
            sweep(factors.clone(), &[0.2, 0.2], 3),
            Err(StabilizationError::BadGrid)
        ));
        assert!(matches!(
            sweep(factors.clone(), &[0.1, 0.2], 0),
            Err(StabilizationError::BadBand { .. })
        ));
        assert!(matches!(
            sweep(factors, &[0.1, 0.2], 11),
            Err(StabilizationError::BadBand { .. })
        ));
    }

    #[test]
    fn do_bounds_and_endpoint_values() {
        let factors = paper_factors(40, 0);
        let spectrum = sweep(factors, &grid(0.0, 1.0, 41), 15).unwrap();
        let window = DoWindow { left: 0, right: 40 };
        for n in 2..=15 {
            let curve = do_curve(&spectrum, n, window).unwrap();
            for &v in &curve.values {
                assert!((0.0..=2.0).contains(&v), "D out of bounds: {v}");
            }
            assert!(curve.values[0] >= 1.0);
            assert!(curve.values[curve.values.len() - 1] >= 1.0);
        }
    }

    #[test]
    fn window_too_narrow_rejected() {
        let factors = paper_factors(10, 0);
        let spectrum = sweep(factors, &grid(0.0, 1.0, 5), 5).unwrap();
        assert!(matches!(
            do_curve(&spectrum, 2, DoWindow { left: 1, right: 2 }),
            Err(StabilizationError::WindowTooNarrow { .. })
        ));
        assert!(matches!(
            do_curve(&spectrum, 2, DoWindow { left: 3, right: 3 }),
            Err(StabilizationError::BadWindow { .. })
        ));
    }

    #[test]
    fn degenerate_coupling_gives_flat_curves_and_no_resonance() {
        // with W = 0 every grid point sees the same Hamiltonian, the
        // eigenvectors never rotate, and D is exactly 2
        let factors = paper_factors(10, 0);
        let mut spectrum = sweep(factors, &grid(0.0, 1.0, 9), 5).unwrap();
        let frozen = {
            let h = paper_factors(10, 0).hamiltonian(0.37);
            let (_, vecs) = eigensolve_symmetric(&h).unwrap();
            vecs
        };
        for band in spectrum.band_vectors_mut() {
            for row in 0..5 {
                band.row_mut(row).copy_from_slice(frozen.row(row));
            }
        }
        let window = DoWindow { left: 0, right: 8 };
        for n in 1..=5 {
            let curve = do_curve(&spectrum, n, window).unwrap();
            for &v in &curve.values {
                assert_eq!(v, 2.0);
            }
            assert!(curve.minima.is_empty());
        }
    }

    #[test]
    fn localization_invariant_under_eigenvector_sign_flip() {
        let factors = paper_factors(30, 0);
        let g = grid(0.0, 1.0, 21);
        let mut spectrum = sweep(factors, &g, 8).unwrap();
        let window = DoWindow { left: 0, right: 20 };
        let before = do_curve(&spectrum, 4, window).unwrap().values;
        for m in spectrum.band_vectors_mut() {
            for v in m.row_mut(3) {
                *v = -*v;
            }
        }
        let after = do_curve(&spectrum, 4, window).unwrap().values;
        assert_eq!(before, after);
    }

    #[test]
    fn localizes_the_s_wave_resonance_near_the_exact_energy() {
        use crate::exact::find_resonance;
        use crate::potentials::well_barrier;
        use num_complex::Complex64;

        let factors = paper_factors(100, 0);
        let template = factors.template();
        let spectrum = sweep(factors, &grid(0.05, 1.0, 96), 30).unwrap();
        let window = DoWindow { left: 0, right: 95 };

        let mut checked = 0;
        for n in 2..=30 {
            for est in localize(&spectrum, n, window, LocalizeOptions::default()).unwrap() {
                if est.energy <= 0.0 || est.energy >= est.lambda_star {
                    continue;
                }
                let pot = well_barrier(template.with_lambda(est.lambda_star)).unwrap();
                let guess = Complex64::new(est.energy, -0.02);
                let exact = find_resonance(&pot, 0, guess, 1e-12).unwrap();
                let diff = (est.energy - exact.energy.energy()).abs();
                assert!(
                    diff < 2e-3,
                    "n = {n}: variational {} vs exact {} (diff {diff:e})",
                    est.energy,
                    exact.energy.energy()
                );
                assert!(est.boundary_density > 0.0);
                checked += 1;
            }
        }
        assert!(
            checked >= 5,
            "expected several localized resonances, got {checked}"
        );
    }
}
