//! Riccati–Bessel functions for asymptotic matching.
//!
//! ĵ_l(x) = x j_l(x) ~ sin(x − lπ/2), n̂_l(x) = −x y_l(x) ~ cos(x − lπ/2),
//! and the modified pair î_l(x) = x i_l(x) (growing), k̂_l(x) with
//! k̂_0 = e^{−x} (decaying). ĵ, n̂ and î satisfy f_l' = f_{l−1} − (l/x) f_l;
//! k̂ satisfies k̂_l' = −k̂_{l−1} − (l/x) k̂_l.

/// ĵ_l, ĵ_l', n̂_l, n̂_l' for l = 0..=l_max at x > 0.
#[derive(Clone, Debug)]
pub struct RiccatiTable {
    pub j: Vec<f64>,
    pub jp: Vec<f64>,
    pub n: Vec<f64>,
    pub np: Vec<f64>,
}

pub fn riccati_bessel(l_max: usize, x: f64) -> RiccatiTable {
    assert!(x > 0.0, "Riccati-Bessel argument must be positive");
    let (s, c) = x.sin_cos();
    let mut n = vec![0.0; l_max + 1];
    n[0] = c;
    if l_max >= 1 {
        n[1] = c / x + s;
    }
    for l in 1..l_max {
        n[l + 1] = (2 * l + 1) as f64 / x * n[l] - n[l - 1];
    }

    let mut j = vec![0.0; l_max + 1];
    if x > l_max as f64 {
        j[0] = s;
        if l_max >= 1 {
            j[1] = s / x - c;
        }
        for l in 1..l_max {
            j[l + 1] = (2 * l + 1) as f64 / x * j[l] - j[l - 1];
        }
    } else {
        // Miller's downward recurrence, normalized by the Wronskian
        // ĵ_l n̂_{l−1} − ĵ_{l−1} n̂_l = −1.
        let start = l_max + 20 + x.ceil() as usize + (l_max as f64).sqrt() as usize * 4;
        let mut f_next = 0.0;
        let mut f = 1e-300;
        let mut vals = vec![0.0; l_max + 1];
        for l in (1..=start).rev() {
            let f_prev = (2 * l + 1) as f64 / x * f - f_next;
            f_next = f;
            f = f_prev;
            // f now holds the value at order l − 1
            if l - 1 <= l_max {
                vals[l - 1] = f;
                if l <= l_max {
                    vals[l] = f_next;
                }
            }
            if f.abs() > 1e250 {
                f *= 1e-250;
                f_next *= 1e-250;
                for v in vals.iter_mut() {
                    *v *= 1e-250;
                }
            }
        }
        // x ≤ l_max here, so l_max ≥ 1
        let scale = -1.0 / (vals[1] * n[0] - vals[0] * n[1]);
        for l in 0..=l_max {
            j[l] = vals[l] * scale;
        }
    }

    let mut jp = vec![0.0; l_max + 1];
    let mut np = vec![0.0; l_max + 1];
    jp[0] = c;
    np[0] = -s;
    for l in 1..=l_max {
        jp[l] = j[l - 1] - l as f64 / x * j[l];
        np[l] = n[l - 1] - l as f64 / x * n[l];
    }
    RiccatiTable { j, jp, n, np }
}

/// Log-derivative k̂_l'(x)/k̂_l(x) of the decaying modified function.
pub fn decaying_log_derivative(l: usize, x: f64) -> f64 {
    // Scaled values e^{x} k̂_l: 1, 1 + 1/x, ... by upward recurrence (stable).
    let mut km1 = 1.0;
    if l == 0 {
        return -1.0;
    }
    let mut k = 1.0 + 1.0 / x;
    for m in 1..l {
        let next = km1 + (2 * m + 1) as f64 / x * k;
        km1 = k;
        k = next;
        if k.abs() > 1e250 {
            k *= 1e-250;
            km1 *= 1e-250;
        }
    }
    // k̂_l' = −k̂_{l−1} − (l/x) k̂_l
    -km1 / k - l as f64 / x
}

/// Log-derivative î_l'(x)/î_l(x) of the growing modified function.
pub fn growing_log_derivative(l: usize, x: f64) -> f64 {
    if l == 0 {
        // î_0 = sinh x
        return 1.0 / x.tanh();
    }
    // ρ_m = î_m / î_{m−1} from the continued fraction
    // ρ_m = 1 / ((2m+1)/x + ρ_{m+1}), run downward from far above l.
    let top = l + 40 + (2.0 * x).ceil() as usize;
    let mut rho = 0.0;
    for m in (l..=top).rev() {
        rho = 1.0 / ((2 * m + 1) as f64 / x + rho);
    }
    // î_l' = î_{l−1} − (l/x) î_l
    1.0 / rho - l as f64 / x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_orders_closed_form() {
        for x in [0.3, 1.0, 4.5, 17.0] {
            let t = riccati_bessel(3, x);
            let (s, c) = f64::sin_cos(x);
            assert!((t.j[0] - s).abs() < 1e-13);
            assert!((t.j[1] - (s / x - c)).abs() < 1e-13);
            let j2 = (3.0 / (x * x) - 1.0) * s - 3.0 * c / x;
            assert!((t.j[2] - j2).abs() < 1e-12 * j2.abs().max(1.0), "x={x}");
            assert!((t.n[0] - c).abs() < 1e-15);
            assert!((t.np[0] + s).abs() < 1e-15);
        }
    }

    #[test]
    fn wronskian_holds_for_all_orders() {
        for x in [0.05, 0.5, 3.0, 12.0, 60.0] {
            let t = riccati_bessel(30, x);
            for l in 0..=30 {
                // ĵ n̂' − ĵ' n̂ = −1
                let w = t.j[l] * t.np[l] - t.jp[l] * t.n[l];
                let scale = (t.j[l] * t.np[l]).abs().max(1.0);
                assert!((w + 1.0).abs() < 1e-10 * scale, "x={x} l={l} w={w}");
            }
        }
    }

    #[test]
    fn small_argument_behaviour() {
        // ĵ_l(x) ≈ x^{l+1}/(2l+1)!!
        let x = 1e-3;
        let t = riccati_bessel(4, x);
        let dfact = [1.0, 3.0, 15.0, 105.0, 945.0];
        for l in 0..=4 {
            let want = x.powi(l as i32 + 1) / dfact[l];
            assert!((t.j[l] / want - 1.0).abs() < 1e-5, "l={l}");
        }
    }

    #[test]
    fn modified_log_derivatives() {
        for x in [0.1, 1.0, 7.0, 300.0] {
            assert!((decaying_log_derivative(0, x) + 1.0).abs() < 1e-15);
            let want = -(1.0 + 1.0 / x + 1.0 / (x * x)) / (1.0 + 1.0 / x);
            assert!((decaying_log_derivative(1, x) - want).abs() < 1e-13);
        }
        // î_1 ≈ x²/3 + x⁴/30 for small x
        let x = 1e-2f64;
        let want = (2.0 * x / 3.0 + 4.0 * x.powi(3) / 30.0) / (x * x / 3.0 + x.powi(4) / 30.0);
        assert!((growing_log_derivative(1, x) / want - 1.0).abs() < 1e-8);
        for x in [1.0f64, 7.0, 300.0] {
            // î_1 = cosh x − sinh x / x, ratio written with t = tanh x
            let t = x.tanh();
            let want = (t - 1.0 / x + t / (x * x)) / (1.0 - t / x);
            assert!((growing_log_derivative(1, x) - want).abs() < 1e-12, "x={x}");
        }
        // large x: both log-derivatives approach ±1
        assert!((growing_log_derivative(5, 2000.0) - 1.0).abs() < 2e-3);
        assert!((decaying_log_derivative(5, 2000.0) + 1.0).abs() < 2e-3);
    }
}
