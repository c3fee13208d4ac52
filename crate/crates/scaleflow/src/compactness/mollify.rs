//! Bump, cutoff, and discrete mollification in the flow parameter s.
//!
//! The bump is the normalized rho(sigma) = C exp(-1/(1 - sigma^2)) on
//! (-1,1); the cutoff beta for a window pair T' < T equals one on [-T', T'],
//! vanishes outside [-(T-eps), T-eps] with eps = (T-T')/2, and interpolates
//! by the smooth step built from the bump's primitive.  Both enter the
//! bootstrap estimates only through || ds beta ||_2 and || ds beta ||_inf,
//! cached here by quadrature.
//!
//! Mollification convolves the beta-cut family with rho_delta(s) =
//! rho(s/delta)/delta over the sample grid.  The integrand vanishes to all
//! orders at the window ends, so uniform weights are superalgebraically
//! accurate.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::loops::FourierPath;
use crate::numerics::adaptive_simpson;

/// 1 / integral of exp(-1/(1-sigma^2)).
fn bump_normalizer() -> f64 {
    static CELL: OnceLock<f64> = OnceLock::new();
    *CELL.get_or_init(|| {
        let raw = adaptive_simpson(
            &|s: f64| {
                if s.abs() < 1.0 {
                    (-1.0 / (1.0 - s * s)).exp()
                } else {
                    0.0
                }
            },
            -1.0,
            1.0,
            1e-13,
        );
        1.0 / raw
    })
}

/// The normalized bump rho: support [-1, 1], unit integral.
pub fn bump(sigma: f64) -> f64 {
    if sigma.abs() >= 1.0 {
        0.0
    } else {
        bump_normalizer() * (-1.0 / (1.0 - sigma * sigma)).exp()
    }
}

/// Primitive step(u) = int_{-1}^u rho, rising smoothly from 0 to 1.
fn smooth_step(u: f64) -> f64 {
    if u <= -1.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        adaptive_simpson(&bump, -1.0, u, 1e-12)
    }
}

/// Cutoff pair (beta, window data) with cached derivative norms.
#[derive(Debug, Clone)]
pub struct MollifierSpec {
    t_prime: f64,
    t_half: f64,
    /// Half the margin: beta dies at T - eps.
    eps: f64,
    /// || ds beta ||_{L^2}, by quadrature.
    pub beta_deriv_l2: f64,
    /// || ds beta ||_{L^inf}.
    pub beta_deriv_sup: f64,
}

impl MollifierSpec {
    /// Build the cutoff for 0 < T' < T.
    pub fn cutoff(t_prime: f64, t_half: f64) -> Result<Self> {
        if !(0.0 < t_prime && t_prime < t_half) {
            return Err(Error::precondition(format!(
                "cutoff needs 0 < T' < T, got T' = {t_prime}, T = {t_half}"
            )));
        }
        let eps = 0.5 * (t_half - t_prime);
        // || ds beta ||_2^2 = (4/eps) int rho^2 after the affine substitution
        let rho_sq = adaptive_simpson(&|s: f64| bump(s) * bump(s), -1.0, 1.0, 1e-13);
        let beta_deriv_l2 = (4.0 / eps * rho_sq).sqrt();
        let beta_deriv_sup = 2.0 / eps * bump(0.0);
        Ok(MollifierSpec {
            t_prime,
            t_half,
            eps,
            beta_deriv_l2,
            beta_deriv_sup,
        })
    }

    pub fn t_prime(&self) -> f64 {
        self.t_prime
    }

    pub fn t_half(&self) -> f64 {
        self.t_half
    }

    pub fn margin(&self) -> f64 {
        self.eps
    }

    /// beta(s): one on [-T', T'], zero beyond T - eps.
    pub fn beta(&self, s: f64) -> f64 {
        let a = s.abs();
        if a <= self.t_prime {
            1.0
        } else if a >= self.t_half - self.eps {
            0.0
        } else {
            smooth_step(1.0 - 2.0 * (a - self.t_prime) / self.eps)
        }
    }

    /// ds beta(s), in closed form from the bump.
    pub fn beta_deriv(&self, s: f64) -> f64 {
        let a = s.abs();
        if a <= self.t_prime || a >= self.t_half - self.eps {
            0.0
        } else {
            -s.signum() * (2.0 / self.eps) * bump(1.0 - 2.0 * (a - self.t_prime) / self.eps)
        }
    }
}

/// rho_delta * (beta u) on the uniform grid of u, by windowed quadrature.
/// Preconditions: delta < (T - T')/2, and at least 8 samples per delta.
pub fn mollify(
    states: &[FourierPath],
    t_half: f64,
    delta: f64,
    spec: &MollifierSpec,
) -> Result<Vec<FourierPath>> {
    if states.len() < 2 {
        return Err(Error::precondition("mollify needs a sampled family"));
    }
    if !(delta > 0.0 && delta < spec.margin()) {
        return Err(Error::precondition(format!(
            "mollifier width {delta} must lie below the cutoff margin {}",
            spec.margin()
        )));
    }
    let ds = 2.0 * t_half / (states.len() - 1) as f64;
    if ds > delta / 8.0 {
        return Err(Error::precondition(format!(
            "under-resolved mollifier: grid step {ds:.3e} exceeds delta/8 = {:.3e}",
            delta / 8.0
        )));
    }
    let window = (delta / ds).ceil() as isize;
    let len = states.len() as isize;
    // offset weights of the discrete mollifier, normalized to exact unit
    // mass so constants are reproduced exactly and the discrete Young
    // inequality holds verbatim
    let mut offsets: Vec<f64> = (-window..=window)
        .map(|k| bump(k as f64 * ds / delta))
        .collect();
    let mass: f64 = offsets.iter().sum();
    for w in &mut offsets {
        *w /= mass;
    }
    let mut out = Vec::with_capacity(states.len());
    for i in 0..len {
        let mut terms: Vec<(f64, &FourierPath)> = Vec::new();
        for j in (i - window).max(0)..=(i + window).min(len - 1) {
            let sigma = -t_half + j as f64 * ds;
            let weight = offsets[(j - i + window) as usize] * spec.beta(sigma);
            if weight != 0.0 {
                terms.push((weight, &states[j as usize]));
            }
        }
        if terms.is_empty() {
            out.push(FourierPath::zero(
                states[0].dim(),
                states[0].boundary(),
                states[0].order(),
            ));
        } else {
            out.push(FourierPath::lincomb(&terms)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loops::Boundary;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    #[test]
    fn bump_examples() {
        assert_eq!(bump(1.0), 0.0);
        assert_eq!(bump(-1.2), 0.0);
        // unit integral by quadrature
        let total = adaptive_simpson(&bump, -1.0, 1.0, 1e-12);
        assert_relative_eq!(total, 1.0, epsilon = 1e-10);
        // peak value C e^{-1}
        assert_relative_eq!(
            bump(0.0),
            bump_normalizer() * (-1.0f64).exp(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn cutoff_plateau_and_support() {
        let spec = MollifierSpec::cutoff(0.5, 1.0).unwrap();
        assert_eq!(spec.beta(0.3), 1.0);
        assert_eq!(spec.beta(-0.5), 1.0);
        assert_eq!(spec.beta(0.76), 0.0);
        assert_eq!(spec.beta(0.9), 0.0);
        let mid = spec.beta(0.625);
        assert!(mid > 0.0 && mid < 1.0);
        // 0 <= beta <= 1 and derivative bounded by the cached sup
        for k in 0..200 {
            let s = -1.0 + k as f64 / 100.0;
            let b = spec.beta(s);
            assert!((0.0..=1.0).contains(&b));
            assert!(spec.beta_deriv(s).abs() <= spec.beta_deriv_sup * (1.0 + 1e-12));
        }
        // beta_deriv matches a finite difference of beta
        let fd = (spec.beta(0.6 + 1e-6) - spec.beta(0.6 - 1e-6)) / 2e-6;
        assert_relative_eq!(spec.beta_deriv(0.6), fd, epsilon = 1e-6);
        assert!(matches!(
            MollifierSpec::cutoff(1.0, 1.0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn beta_deriv_l2_matches_direct_quadrature() {
        let spec = MollifierSpec::cutoff(0.4, 1.0).unwrap();
        let direct = adaptive_simpson(
            &|s: f64| spec.beta_deriv(s) * spec.beta_deriv(s),
            -1.0,
            1.0,
            1e-12,
        )
        .sqrt();
        assert_relative_eq!(spec.beta_deriv_l2, direct, epsilon = 1e-8);
    }

    fn constant_family(value: f64, samples: usize) -> Vec<FourierPath> {
        (0..samples)
            .map(|_| {
                FourierPath::single_mode(1, Boundary::Periodic, 0, 0, &[Complex64::new(value, 0.0)])
                    .unwrap()
            })
            .collect()
    }

    #[test]
    fn mollify_constant_on_plateau() {
        let t = 1.0;
        let tp = 0.5;
        let spec = MollifierSpec::cutoff(tp, t).unwrap();
        let samples = 8193;
        let delta = spec.margin() / 80.0;
        let family = constant_family(2.0, samples);
        let out = mollify(&family, t, delta, &spec).unwrap();
        let ds = 2.0 * t / (samples - 1) as f64;
        for (i, p) in out.iter().enumerate() {
            let s: f64 = -t + i as f64 * ds;
            if s.abs() <= tp {
                assert!(
                    (p.mode(0)[0].re - 2.0).abs() <= 1e-8,
                    "s = {s}: {}",
                    p.mode(0)[0].re
                );
            }
            if s.abs() >= t - spec.margin() + delta {
                assert_eq!(p.mode(0)[0].re, 0.0);
            }
        }
    }

    #[test]
    fn mollify_linear_and_quadratic_moments() {
        let t = 1.0;
        let tp = 0.5;
        let spec = MollifierSpec::cutoff(tp, t).unwrap();
        let samples = 4097;
        let ds = 2.0 * t / (samples - 1) as f64;
        let delta: f64 = 0.02;
        let mk = |f: &dyn Fn(f64) -> f64| -> Vec<FourierPath> {
            (0..samples)
                .map(|i| {
                    let s = -t + i as f64 * ds;
                    FourierPath::single_mode(
                        1,
                        Boundary::Periodic,
                        0,
                        0,
                        &[Complex64::new(f(s), 0.0)],
                    )
                    .unwrap()
                })
                .collect()
        };
        // odd moment vanishes: linear data reproduced on the inner plateau
        let lin = mollify(&mk(&|s| s), t, delta, &spec).unwrap();
        // quadratic data gains the even-moment correction m2 delta^2
        let quad = mollify(&mk(&|s| s * s), t, delta, &spec).unwrap();
        let m2 = adaptive_simpson(&|u: f64| u * u * bump(u), -1.0, 1.0, 1e-12);
        for i in 0..samples {
            let s = -t + i as f64 * ds;
            if s.abs() <= tp - delta {
                assert!((lin[i].mode(0)[0].re - s).abs() <= 1e-9);
                let expected = s * s + m2 * delta * delta;
                assert!((quad[i].mode(0)[0].re - expected).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn mollify_young_inequality() {
        // || rho_delta * (beta u) ||_{L^2} <= || u ||_{L^2}
        let t = 1.0;
        let spec = MollifierSpec::cutoff(0.5, t).unwrap();
        let samples = 2049;
        let ds = 2.0 * t / (samples - 1) as f64;
        let family: Vec<FourierPath> = (0..samples)
            .map(|i| {
                let s: f64 = -t + i as f64 * ds;
                FourierPath::single_mode(
                    1,
                    Boundary::Periodic,
                    0,
                    0,
                    &[Complex64::new((7.0 * s).sin() + 0.3, 0.0)],
                )
                .unwrap()
            })
            .collect();
        let out = mollify(&family, t, 0.02, &spec).unwrap();
        let l2 = |f: &[FourierPath]| -> f64 {
            let w = crate::numerics::quadrature_weights(f.len(), ds);
            f.iter()
                .zip(&w)
                .map(|(p, wi)| p.sobolev_norm(0).powi(2) * wi)
                .sum::<f64>()
                .sqrt()
        };
        assert!(l2(&out) <= l2(&family) * (1.0 + 1e-10));
    }

    #[test]
    fn mollify_commutes_with_derivative() {
        // ds (rho * u) = rho * ds u on the inner plateau, up to quadrature
        let t = 1.0;
        let spec = MollifierSpec::cutoff(0.5, t).unwrap();
        let samples = 2049;
        let ds = 2.0 * t / (samples - 1) as f64;
        let f = |s: f64| (3.0 * s).cos();
        let df = |s: f64| -3.0 * (3.0 * s).sin();
        let mk = |g: &dyn Fn(f64) -> f64| -> Vec<FourierPath> {
            (0..samples)
                .map(|i| {
                    let s = -t + i as f64 * ds;
                    FourierPath::single_mode(
                        1,
                        Boundary::Periodic,
                        0,
                        0,
                        &[Complex64::new(g(s), 0.0)],
                    )
                    .unwrap()
                })
                .collect()
        };
        let delta = 0.02;
        let smooth = mollify(&mk(&f), t, delta, &spec).unwrap();
        let smooth_d = mollify(&mk(&df), t, delta, &spec).unwrap();
        // centered difference of the mollified family
        for i in (1..samples - 1).step_by(97) {
            let s = -t + i as f64 * ds;
            if s.abs() <= 0.4 {
                let fd = (smooth[i + 1].mode(0)[0].re - smooth[i - 1].mode(0)[0].re) / (2.0 * ds);
                assert!((fd - smooth_d[i].mode(0)[0].re).abs() <= 1e-5, "at s = {s}");
            }
        }
    }

    #[test]
    fn mollify_preconditions() {
        let t = 1.0;
        let spec = MollifierSpec::cutoff(0.5, t).unwrap();
        let family = constant_family(1.0, 33);
        // delta too large
        assert!(matches!(
            mollify(&family, t, 0.3, &spec),
            Err(Error::Precondition(_))
        ));
        // too few samples per delta
        assert!(matches!(
            mollify(&family, t, 0.1, &spec),
            Err(Error::Precondition(_))
        ));
    }
}
