//! Exponentially scaled generalized Laguerre polynomials.
//!
//! All basis-set machinery works with `s_k(x) = e^{-x/2} L_k^{(alpha)}(x)`
//! rather than the bare polynomials: the products that appear in matrix
//! elements then carry the full `e^{-x}` weight and stay inside f64 range at
//! every Gauss-Laguerre node. The recurrence itself is carried in
//! mantissa/exponent form because `e^{-x/2}` underflows for `x > ~1416`
//! while `s_k(x)` at the same `x` is of order one once `k` approaches the
//! oscillatory regime `4k ~ x`.

/// `v * 2^shift` with intermediate scaling so deeply negative shifts
/// underflow gracefully to zero instead of producing `0 * inf`.
fn ldexp2(v: f64, shift: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    if (-1000.0..=1000.0).contains(&shift) {
        return v * 2f64.powi(shift as i32);
    }
    let half = (shift / 2.0).trunc();
    let rest = shift - half;
    (v * 2f64.powi(half as i32)) * 2f64.powi(rest as i32)
}

/// Fills `out[k] = e^{-x/2} L_k^{(alpha)}(x)` for `k = 0..out.len()-1`.
///
/// Values whose true magnitude is below the f64 subnormal range come out as
/// exact zeros; their contribution to any weighted integral is negligible.
pub fn scaled_laguerre_all(alpha: f64, x: f64, out: &mut [f64]) {
    let nmax = match out.len() {
        0 => return,
        n => n - 1,
    };
    // s_0 = e^{-x/2} = m0 * 2^shift with m0 in [1, 2)
    let e0 = -0.5 * x / std::f64::consts::LN_2;
    let mut shift = e0.floor();
    let m0 = 2f64.powf(e0 - shift);

    let mut prev = m0;
    out[0] = ldexp2(prev, shift);
    if nmax == 0 {
        return;
    }
    let mut curr = (1.0 + alpha - x) * m0;
    out[1] = ldexp2(curr, shift);

    const RESCALE: f64 = 512.0;
    let big = 2f64.powi(RESCALE as i32);
    let inv_big = 2f64.powi(-(RESCALE as i32));

    for k in 1..nmax {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * curr - (kf + alpha) * prev) / (kf + 1.0);
        prev = curr;
        curr = next;
        if curr.abs().max(prev.abs()) > big {
            curr *= inv_big;
            prev *= inv_big;
            shift += RESCALE;
        }
        out[k + 1] = ldexp2(curr, shift);
    }
}

/// Single scaled value `e^{-x/2} L_n^{(alpha)}(x)`.
pub fn scaled_laguerre(alpha: f64, n: usize, x: f64) -> f64 {
    let mut buf = vec![0.0; n + 1];
    scaled_laguerre_all(alpha, x, &mut buf);
    buf[n]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_scaled(alpha: f64, n: usize, x: f64) -> f64 {
        // direct recurrence on the bare polynomial; valid for small n, x
        let mut prev = 1.0;
        if n == 0 {
            return prev * (-0.5 * x).exp();
        }
        let mut curr = 1.0 + alpha - x;
        for k in 1..n {
            let kf = k as f64;
            let next = ((2.0 * kf + 1.0 + alpha - x) * curr - (kf + alpha) * prev) / (kf + 1.0);
            prev = curr;
            curr = next;
        }
        curr * (-0.5 * x).exp()
    }

    #[test]
    fn matches_naive_evaluation_in_safe_range() {
        let mut buf = vec![0.0; 13];
        for &alpha in &[0.0, 2.0, 3.0] {
            for &x in &[0.0, 0.3, 1.7, 8.0, 25.0] {
                scaled_laguerre_all(alpha, x, &mut buf);
                for n in 0..=12 {
                    let expect = naive_scaled(alpha, n, x);
                    assert!(
                        (buf[n] - expect).abs() <= 1e-12 * expect.abs().max(1.0),
                        "alpha={alpha} n={n} x={x}: {} vs {expect}",
                        buf[n]
                    );
                }
            }
        }
    }

    #[test]
    fn low_order_closed_forms() {
        // L_1^{(2)}(x) = 3 - x
        let x = 1.25;
        let s = scaled_laguerre(2.0, 1, x);
        assert!((s - (3.0 - x) * (-0.5 * x).exp()).abs() < 1e-15);
        // L_2^{(0)}(x) = (x^2 - 4x + 2)/2
        let s = scaled_laguerre(0.0, 2, x);
        let expect = 0.5 * (x * x - 4.0 * x + 2.0) * (-0.5 * x).exp();
        assert!((s - expect).abs() < 1e-15);
    }

    #[test]
    fn survives_deep_exponential_regime() {
        // e^{-x/2} underflows here, but the high-order scaled values are O(1).
        let x = 2000.0;
        let mut buf = vec![0.0; 521];
        scaled_laguerre_all(0.0, x, &mut buf);
        assert!(buf.iter().all(|v| v.is_finite()));
        assert_eq!(buf[0], 0.0, "deep tail must underflow to zero");
        let max = buf.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(max > 1e-6, "oscillatory-regime values must be reachable, max = {max:e}");
    }
}
