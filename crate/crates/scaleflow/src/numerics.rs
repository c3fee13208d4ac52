//! Small numerical kernels shared across modules: composite quadrature on
//! uniform grids, finite-difference stencils for s-derivatives, adaptive
//! Simpson for one-off integrals, and the exponential phi-functions used by
//! the stiff integrator.

use num_complex::Complex64;

/// Composite quadrature weights for a uniform grid with `len` samples and
/// spacing `h`.  Uses Simpson's rule when the interval count is even and
/// Simpson + 3/8 on the last three intervals otherwise.  `len >= 2`.
pub fn quadrature_weights(len: usize, h: f64) -> Vec<f64> {
    assert!(len >= 2, "quadrature needs at least two samples");
    let mut w = vec![0.0; len];
    let intervals = len - 1;
    if intervals == 1 {
        // trapezoid
        w[0] = 0.5 * h;
        w[1] = 0.5 * h;
        return w;
    }
    let simpson_intervals = if intervals % 2 == 0 {
        intervals
    } else {
        intervals - 3
    };
    // plain composite Simpson over [0, simpson_intervals]
    if simpson_intervals > 0 {
        w[0] += h / 3.0;
        w[simpson_intervals] += h / 3.0;
        for i in 1..simpson_intervals {
            w[i] += if i % 2 == 1 {
                4.0 * h / 3.0
            } else {
                2.0 * h / 3.0
            };
        }
    }
    if intervals % 2 != 0 {
        // 3/8 rule on the trailing three intervals
        let base = simpson_intervals;
        if base == 0 {
            // exactly 3 intervals in total
            w[0] += 3.0 * h / 8.0;
        } else {
            w[base] += 3.0 * h / 8.0;
        }
        w[base + 1] += 9.0 * h / 8.0;
        w[base + 2] += 9.0 * h / 8.0;
        w[base + 3] += 3.0 * h / 8.0;
    }
    w
}

/// Integrate samples of a scalar function on a uniform grid with spacing `h`.
pub fn integrate_samples(values: &[f64], h: f64) -> f64 {
    let w = quadrature_weights(values.len(), h);
    values.iter().zip(&w).map(|(v, wi)| v * wi).sum()
}

/// Stencil describing the derivative at one grid index as a linear
/// combination of neighboring samples: `deriv[i] = sum coef * f[i + off] / h`.
pub fn derivative_stencil(i: usize, len: usize) -> Vec<(isize, f64)> {
    assert!(len >= 5, "order-4 differencing needs at least five samples");
    if i >= 2 && i + 2 < len {
        // centered, order 4
        vec![
            (-2, 1.0 / 12.0),
            (-1, -8.0 / 12.0),
            (1, 8.0 / 12.0),
            (2, -1.0 / 12.0),
        ]
    } else if i == 0 {
        // one-sided, order 2
        vec![(0, -1.5), (1, 2.0), (2, -0.5)]
    } else if i == 1 {
        // centered, order 2
        vec![(-1, -0.5), (1, 0.5)]
    } else if i + 2 == len {
        vec![(-1, -0.5), (1, 0.5)]
    } else {
        // i == len - 1, one-sided, order 2
        vec![(0, 1.5), (-1, -2.0), (-2, 0.5)]
    }
}

/// Differentiate scalar samples on a uniform grid (order 4 in the interior,
/// order 2 near the ends).
pub fn differentiate_samples(values: &[f64], h: f64) -> Vec<f64> {
    (0..values.len())
        .map(|i| {
            derivative_stencil(i, values.len())
                .into_iter()
                .map(|(off, c)| c * values[(i as isize + off) as usize])
                .sum::<f64>()
                / h
        })
        .collect()
}

/// Adaptive Simpson integration of a smooth scalar function.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, m: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
    }
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let left = simpson(f, a, 0.5 * (a + m), m);
        let right = simpson(f, m, 0.5 * (m + b), b);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, m, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, right, 0.5 * tol, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    recurse(f, a, b, simpson(f, a, m, b), tol, 48)
}

/// phi_k(z) = sum_{m>=0} z^m / (m+k)!  — the entire functions behind
/// exponential time differencing.  Exact formulas above |z| = 0.5, Taylor
/// series below (the exact formulas lose digits to cancellation near 0).
pub fn phi(k: u32, z: Complex64) -> Complex64 {
    if z.norm() >= 0.5 {
        let ez = z.exp();
        match k {
            0 => ez,
            1 => (ez - 1.0) / z,
            2 => (ez - 1.0 - z) / (z * z),
            3 => (ez - 1.0 - z - 0.5 * z * z) / (z * z * z),
            _ => unreachable!("phi only needed up to k = 3"),
        }
    } else {
        let mut factorial = 1.0f64;
        for m in 1..=k as u64 {
            factorial *= m as f64;
        }
        let mut term = Complex64::new(1.0 / factorial, 0.0);
        let mut sum = term;
        let mut m = 0u64;
        while term.norm() > 1e-20 && m < 40 {
            m += 1;
            term = term * z / (m + k as u64) as f64;
            sum += term;
        }
        sum
    }
}

/// Least-squares slope of log|y| against log|x| — the observed order of a
/// convergence study.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quadrature_exact_on_cubics() {
        // Simpson and 3/8 are exact for cubic integrands.
        for len in [5usize, 6, 9, 16] {
            let h = 2.0 / (len - 1) as f64;
            let values: Vec<f64> = (0..len)
                .map(|i| {
                    let s = -1.0 + i as f64 * h;
                    3.0 * s * s * s - s * s + 2.0
                })
                .collect();
            // integral of -s^2 + 2 over [-1,1] = -2/3 + 4
            assert_relative_eq!(
                integrate_samples(&values, h),
                10.0 / 3.0,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn differencing_order_four_interior() {
        let len = 101;
        let h = 1.0 / (len - 1) as f64;
        let values: Vec<f64> = (0..len).map(|i| (3.0 * i as f64 * h).sin()).collect();
        let d = differentiate_samples(&values, h);
        // truncation error ~ h^4/30 * |f^(5)| = 1e-8/30 * 243 ~ 8e-8
        for i in 10..len - 10 {
            let s = i as f64 * h;
            assert_relative_eq!(d[i], 3.0 * (3.0 * s).cos(), epsilon = 5e-7);
        }
    }

    #[test]
    fn phi_matches_series_and_formula_across_switch() {
        for k in 0..4 {
            for r in [0.4999, 0.5001, 2.0] {
                let z = Complex64::new(r * 0.6, r * 0.8);
                let exact = phi(k, z * 1.0);
                // reference via high-order series regardless of branch
                let mut factorial = 1.0f64;
                for m in 1..=k as u64 {
                    factorial *= m as f64;
                }
                let mut term = Complex64::new(1.0 / factorial, 0.0);
                let mut sum = term;
                for m in 1..60u64 {
                    term = term * z / (m + k as u64) as f64;
                    sum += term;
                }
                assert!((exact - sum).norm() < 1e-13 * sum.norm().max(1.0));
            }
        }
    }

    #[test]
    fn adaptive_simpson_gaussianish() {
        let v = adaptive_simpson(&|x: f64| (-x * x).exp(), -8.0, 8.0, 1e-12);
        assert_relative_eq!(v, std::f64::consts::PI.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn slope_recovers_power() {
        let pts: Vec<(f64, f64)> = (1..6)
            .map(|i| {
                let x = 2f64.powi(-i);
                (x, 3.0 * x.powi(4))
            })
            .collect();
        assert_relative_eq!(log_log_slope(&pts), 4.0, epsilon = 1e-10);
    }
}
