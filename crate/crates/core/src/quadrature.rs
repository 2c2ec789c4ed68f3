//! Quadrature rules used across the crate.
//!
//! Gauss-Legendre for finite panels, a scaled Gauss-Laguerre rule for the
//! semi-infinite basis-set integrals, and adaptive Simpson as the independent
//! cross-check oracle and for smooth one-off integrals.

use crate::laguerre::scaled_laguerre_all;
use crate::linalg::tridiagonal_eigenvalues;

/// Gauss-Legendre rule on the reference interval `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            // Tricomi-style initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_deriv(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, p_deriv) = legendre_with_deriv(n, x);
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * p_deriv * p_deriv);
        }
        // exact +/- symmetry
        for i in 0..n / 2 {
            let s = 0.5 * (nodes[i] - nodes[n - 1 - i]);
            nodes[i] = s;
            nodes[n - 1 - i] = -s;
            let w = 0.5 * (weights[i] + weights[n - 1 - i]);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        nodes.reverse();
        weights.reverse();
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Integrates over `[a, b]` split into equal panels of width at most
    /// `max_width`.
    pub fn integrate_panels(
        &self,
        a: f64,
        b: f64,
        max_width: f64,
        mut f: impl FnMut(f64) -> f64,
    ) -> f64 {
        assert!(b >= a && max_width > 0.0);
        let n_panels = (((b - a) / max_width).ceil() as usize).max(1);
        let width = (b - a) / n_panels as f64;
        let mut total = 0.0;
        for p in 0..n_panels {
            let pa = a + p as f64 * width;
            total += self.integrate(pa, pa + width, &mut f);
        }
        total
    }
}

fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = p_next;
    }
    let d = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, d)
}

/// Gauss-Laguerre rule (weight `e^{-x}` on `[0, inf)`) stored with
/// *scaled* weights `w_i e^{x_i}`, so that
/// `integral of f ~= sum_i scaled_w_i * f(x_i)`
/// for integrands `f` that already contain their `e^{-x}` decay.
///
/// Nodes come from the Golub-Welsch Jacobi matrix and are polished by Newton
/// iterations on the scaled polynomial; the scaled weights use the classical
/// `w_i = x_i / [(n+1)^2 L_{n+1}(x_i)^2]` identity evaluated entirely with
/// exponentially scaled values, which keeps every quantity inside f64 range
/// even for rules with hundreds of nodes.
#[derive(Debug, Clone)]
pub struct GaussLaguerre {
    nodes: Vec<f64>,
    scaled_weights: Vec<f64>,
}

impl GaussLaguerre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        // Jacobi matrix for alpha = 0: diag 2k+1, offdiag k.
        let diag: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + 1.0).collect();
        let off: Vec<f64> = (1..n).map(|k| k as f64).collect();
        let mut nodes = tridiagonal_eigenvalues(&diag, &off).expect("Jacobi matrix eigenvalues");

        let mut s = vec![0.0; n + 2];
        for x in nodes.iter_mut() {
            // Newton on L_n using x L_n' = n (L_n - L_{n-1}); the e^{-x/2}
            // scaling cancels in the ratio.
            for _ in 0..40 {
                scaled_laguerre_all(0.0, *x, &mut s);
                let deriv = n as f64 * (s[n] - s[n - 1]) / *x;
                let dx = s[n] / deriv;
                *x -= dx;
                if dx.abs() < 1e-15 * x.abs().max(1.0) {
                    break;
                }
            }
        }
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let norm = ((n + 1) as f64) * ((n + 1) as f64);
        let scaled_weights = nodes
            .iter()
            .map(|&x| {
                scaled_laguerre_all(0.0, x, &mut s);
                x / (norm * s[n + 1] * s[n + 1])
            })
            .collect();
        Self {
            nodes,
            scaled_weights,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights including the `e^{x_i}` factor.
    pub fn scaled_weights(&self) -> &[f64] {
        &self.scaled_weights
    }

    /// `integral of f over [0, inf)` for integrands carrying their own
    /// exponential decay (for example products of scaled basis functions).
    pub fn integrate_scaled(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.scaled_weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Adaptive Simpson quadrature with Richardson correction.
///
/// `tol` is an absolute tolerance on the result; recursion stops at depth 50
/// regardless, which bounds work on pathological integrands.
pub fn adaptive_simpson(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}
