//! Riccati-Bessel functions of complex argument and the polynomial factor of
//! the outgoing wave.
//!
//! For the p-wave interior solutions we need the regular and irregular
//! Riccati-Bessel pair `S(z) = z j_1(z)` and `C(z) = -z y_1(z)`; the closed
//! forms cancel catastrophically near the origin, so small arguments switch
//! to power series.

use num_complex::Complex64;

const SERIES_RADIUS_SQ: f64 = 0.25; // |z| < 0.5

/// `S(z) = z j_1(z) = sin z / z - cos z`; regular at the origin.
pub fn riccati_s1(z: Complex64) -> Complex64 {
    if z.norm_sqr() < SERIES_RADIUS_SQ {
        // sum over k of (-1)^k z^{2k+2} / [(2k)!! (2k+3)!!]
        let z2 = z * z;
        let mut term = z2 / 3.0;
        let mut sum = term;
        for k in 0..12u32 {
            let den = (2 * (k + 1)) as f64 * (2 * k + 5) as f64;
            term *= -z2 / den;
            sum += term;
            if term.norm_sqr() < 1e-64 * sum.norm_sqr() {
                break;
            }
        }
        sum
    } else {
        z.sin() / z - z.cos()
    }
}

/// `dS/dz = cos z / z - sin z / z^2 + sin z`.
pub fn riccati_s1_deriv(z: Complex64) -> Complex64 {
    if z.norm_sqr() < SERIES_RADIUS_SQ {
        let z2 = z * z;
        let mut base = z / 3.0; // a_k z^{2k+1}
        let mut sum = 2.0 * base;
        for k in 0..12u32 {
            let den = (2 * (k + 1)) as f64 * (2 * k + 5) as f64;
            base *= -z2 / den;
            let term = (2 * k + 4) as f64 * base;
            sum += term;
            if term.norm_sqr() < 1e-64 * sum.norm_sqr() {
                break;
            }
        }
        sum
    } else {
        z.cos() / z - z.sin() / (z * z) + z.sin()
    }
}

/// `C(z) = -z y_1(z) = cos z / z + sin z`; irregular at the origin.
pub fn riccati_c1(z: Complex64) -> Complex64 {
    z.cos() / z + z.sin()
}

/// `dC/dz = -sin z / z - cos z / z^2 + cos z`.
pub fn riccati_c1_deriv(z: Complex64) -> Complex64 {
    -z.sin() / z - z.cos() / (z * z) + z.cos()
}

/// Polynomial factor `v_l(k, r)` of the outgoing solution
/// `u(r) = C e^{ikr} v_l(k, r)` outside the potential's support:
/// the sum over `j = 0..=l` of `(-1)^j (l+j)!/(j!(l-j)!) (2ikr)^{-j}`.
pub fn outgoing_vl(l: u32, k: Complex64, r: f64) -> Complex64 {
    let w = (Complex64::new(0.0, 2.0) * k * r).inv();
    let mut coeff = 1.0;
    let mut wpow = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(1.0, 0.0);
    for j in 0..l {
        let jf = j as f64;
        let lf = l as f64;
        coeff *= (lf + jf + 1.0) * (lf - jf) / (jf + 1.0);
        wpow *= -w;
        sum += coeff * wpow;
    }
    sum
}

/// Radial derivative of [`outgoing_vl`] at fixed `k`.
pub fn outgoing_vl_deriv(l: u32, k: Complex64, r: f64) -> Complex64 {
    let w = (Complex64::new(0.0, 2.0) * k * r).inv();
    let mut coeff = 1.0;
    let mut wpow = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..l {
        let jf = j as f64;
        let lf = l as f64;
        coeff *= (lf + jf + 1.0) * (lf - jf) / (jf + 1.0);
        wpow *= -w;
        sum += (jf + 1.0) * coeff * wpow;
    }
    -sum / r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn series_matches_direct_across_threshold() {
        for &z in &[
            c(0.49, 0.0),
            c(0.51, 0.0),
            c(0.3, -0.35),
            c(0.36, 0.36),
            c(0.0, 0.49),
        ] {
            let z_big = z * 1.04; // just outside the series radius for some
            for zz in [z, z_big] {
                let direct_s = zz.sin() / zz - zz.cos();
                let direct_ds = zz.cos() / zz - zz.sin() / (zz * zz) + zz.sin();
                assert!((riccati_s1(zz) - direct_s).norm() < 1e-14 * direct_s.norm().max(1e-3));
                assert!(
                    (riccati_s1_deriv(zz) - direct_ds).norm() < 1e-14 * direct_ds.norm().max(1e-3)
                );
            }
        }
    }

    #[test]
    fn small_argument_leading_order() {
        let z = c(1e-4, 0.0);
        let s = riccati_s1(z);
        // next series term is z^4/30, i.e. ~ 3e-10 relative here
        assert!((s - z * z / 3.0).norm() < 1e-9 * s.norm());
    }

    #[test]
    fn wronskian_is_minus_one() {
        for &z in &[c(0.2, 0.1), c(1.5, -0.7), c(3.0, 0.0), c(0.05, -0.02)] {
            let w = riccati_s1(z) * riccati_c1_deriv(z) - riccati_c1(z) * riccati_s1_deriv(z);
            assert!((w + 1.0).norm() < 1e-12, "W({z}) = {w}");
        }
    }

    #[test]
    fn vl_low_orders() {
        let k = c(0.8, -0.05);
        let r = 6.0;
        assert_eq!(outgoing_vl(0, k, r), c(1.0, 0.0));
        assert_eq!(outgoing_vl_deriv(0, k, r), c(0.0, 0.0));

        let v1 = outgoing_vl(1, k, r);
        let expect = 1.0 + Complex64::i() / (k * r);
        assert!((v1 - expect).norm() < 1e-15);

        let dv1 = outgoing_vl_deriv(1, k, r);
        let expect = -Complex64::i() / (k * r * r);
        assert!((dv1 - expect).norm() < 1e-15);
    }

    #[test]
    fn vl_derivative_consistent_with_finite_difference() {
        let k = c(0.6, -0.2);
        let r = 4.0;
        let h = 1e-6;
        for l in [1u32, 2, 3] {
            let fd = (outgoing_vl(l, k, r + h) - outgoing_vl(l, k, r - h)) / (2.0 * h);
            let an = outgoing_vl_deriv(l, k, r);
            assert!((fd - an).norm() < 1e-8 * an.norm().max(1e-8), "l = {l}");
        }
    }
}
