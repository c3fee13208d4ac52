//! Quantitative tail decay: the computable side of the compact embedding.
//!
//! For a family bounded by c in every W^{k,p}(I_T, H_{l-k}), 0 <= k <= l,
//! the projection tails obey, uniformly over the family and over s,
//!
//! ```text
//! || (id - pi_N) ds^j w(s) ||_{H_{l-1-j}}
//!     <= eps(N) = 2c max{ f(N+1)^{-(p-1)/(2p)},  f(N+1)^{-1/2} T^{-1/p} } ,
//! ```
//!
//! and eps(N) -> 0 because f is unbounded.  The threshold re-runs the
//! embedding's contradiction argument quantitatively: a tail of size eps at
//! some s persists at size eps/2 on an s-interval of measure
//! min{(eps/2c)^q, T} (Hoelder, 1/p + 1/q = 1), where it costs at least
//! sqrt(f(N+1)) eps/2 in the next level up — which the family bound caps.
//!
//! [`tail_verify`] measures the left side on a sampled family over a ladder
//! of cuts and checks it against eps(N), together with the monotone decay
//! of the threshold itself.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::Trajectory;
use crate::numerics::{derivative_stencil, quadrature_weights};
use crate::scale::{ScaleVector, WeightFn};

/// eps(N): the uniform tail bound for a family bounded by c.
pub fn tail_threshold(c: f64, t_half: f64, p: f64, weight: &WeightFn, n_cut: u64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::precondition("the tail threshold needs p > 1"));
    }
    if !(c >= 0.0 && t_half > 0.0) {
        return Err(Error::precondition(
            "the tail threshold needs c >= 0 and T > 0",
        ));
    }
    let f_next = weight.eval(n_cut + 1);
    let a = f_next.powf(-(p - 1.0) / (2.0 * p));
    let b = f_next.powf(-0.5) * t_half.powf(-1.0 / p);
    Ok(2.0 * c * a.max(b))
}

/// A curve of scale vectors on the uniform grid over [-T, T] — the shape
/// shared by trajectories (under the block bijection) and synthetic
/// coefficient families.
#[derive(Debug, Clone)]
pub struct ScaleCurve {
    pub t_half: f64,
    pub states: Vec<ScaleVector>,
}

/// On-disk fixture: a family of scale curves, as produced and consumed by
/// the harness (`{"t_half": .., "members": [[vector, ...], ...]}`).
#[derive(serde::Serialize, serde::Deserialize)]
pub struct ScaleCurveFixture {
    pub t_half: f64,
    pub members: Vec<Vec<ScaleVector>>,
}

impl ScaleCurveFixture {
    pub fn into_family(self) -> Result<Vec<ScaleCurve>> {
        self.members
            .into_iter()
            .map(|states| ScaleCurve::new(self.t_half, states))
            .collect()
    }
}

impl ScaleCurve {
    pub fn new(t_half: f64, states: Vec<ScaleVector>) -> Result<Self> {
        if !(t_half > 0.0) || states.len() < 5 {
            return Err(Error::validation(
                "scale curve needs T > 0 and at least 5 samples",
            ));
        }
        Ok(ScaleCurve { t_half, states })
    }

    pub fn from_trajectory(w: &Trajectory) -> Result<Self> {
        ScaleCurve::new(
            w.t_half(),
            w.states().iter().map(|x| x.to_scale_vector()).collect(),
        )
    }

    pub fn ds(&self) -> f64 {
        2.0 * self.t_half / (self.states.len() - 1) as f64
    }

    /// s-derivative by the shared stencils.
    pub fn derivative(&self) -> Result<ScaleCurve> {
        let h = self.ds();
        let states = (0..self.states.len())
            .map(|i| {
                let stencil = derivative_stencil(i, self.states.len());
                let mut acc = ScaleVector::zero(self.states[0].weight().clone());
                for (off, coef) in stencil {
                    acc = ScaleVector::lincomb(
                        1.0,
                        &acc,
                        coef / h,
                        &self.states[(i as isize + off) as usize],
                    )?;
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()?;
        ScaleCurve::new(self.t_half, states)
    }

    /// || . ||_{W^{k,p}(I_T, H_level)} of this curve (k = 0 here; derivative
    /// curves supply higher k).
    pub fn lp_norm(&self, p: f64, level: i32) -> f64 {
        let weights = quadrature_weights(self.states.len(), self.ds());
        self.states
            .iter()
            .zip(&weights)
            .map(|(x, wt)| x.level_norm(level).powf(p) * wt)
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

/// Measured family bound max_{k <= l} || w ||_{W^{k,p}(I_T, H_{l-k})}.
pub fn family_bound(family: &[ScaleCurve], p: f64, ell: usize) -> Result<f64> {
    let mut c: f64 = 0.0;
    for member in family {
        let mut curves = vec![member.clone()];
        for _ in 0..ell {
            curves.push(curves.last().unwrap().derivative()?);
        }
        for k in 0..=ell {
            // W^{k,p} norm: sum of derivative L^p norms up to order k
            let mut acc = 0.0;
            for (j, curve) in curves.iter().take(k + 1).enumerate() {
                let _ = j;
                acc += curve.lp_norm(p, (ell - k) as i32).powf(p);
            }
            c = c.max(acc.powf(1.0 / p));
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Serialize)]
pub struct TailRung {
    pub n_cut: u64,
    pub epsilon: f64,
    pub measured_sup: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailReport {
    /// The family bound feeding the threshold.
    pub bound_c: f64,
    pub p: f64,
    pub ell: usize,
    pub rungs: Vec<TailRung>,
    /// eps monotone non-increasing along the ladder.
    pub threshold_monotone: bool,
    /// eps strictly smaller at the last rung than the first.
    pub threshold_decays: bool,
    pub pass: bool,
}

/// Verify the uniform tail bound over a ladder of cuts.  The bound constant
/// is measured from the family unless an override is supplied.
pub fn tail_verify(
    family: &[ScaleCurve],
    p: f64,
    ell: usize,
    ladder: &[u64],
    c_override: Option<f64>,
) -> Result<TailReport> {
    if family.is_empty() {
        return Err(Error::precondition(
            "tail verification needs a nonempty family",
        ));
    }
    if ladder.windows(2).any(|w| w[1] <= w[0]) || ladder.is_empty() {
        return Err(Error::precondition(
            "the cut ladder must be strictly increasing",
        ));
    }
    if ell < 1 {
        return Err(Error::precondition("tail verification needs l >= 1"));
    }
    let weight = family[0].states[0].weight().clone();
    let t_half = family[0].t_half;
    let c = match c_override {
        Some(c) => c,
        None => family_bound(family, p, ell)?,
    };

    // derivative curves up to order l-1 per member
    let mut all_curves: Vec<Vec<ScaleCurve>> = Vec::new();
    for member in family {
        let mut curves = vec![member.clone()];
        for _ in 0..ell - 1 {
            curves.push(curves.last().unwrap().derivative()?);
        }
        all_curves.push(curves);
    }

    let mut rungs = Vec::new();
    for &n_cut in ladder {
        let epsilon = tail_threshold(c, t_half, p, &weight, n_cut)?;
        let mut measured: f64 = 0.0;
        for curves in &all_curves {
            for (j, curve) in curves.iter().enumerate() {
                let level = (ell - 1 - j) as i32;
                for state in &curve.states {
                    measured = measured.max(state.tail_norm(n_cut, level));
                }
            }
        }
        rungs.push(TailRung {
            n_cut,
            epsilon,
            measured_sup: measured,
            pass: measured <= epsilon,
        });
    }
    let threshold_monotone = rungs
        .windows(2)
        .all(|r| r[1].epsilon <= r[0].epsilon * (1.0 + 1e-12));
    let threshold_decays = rungs.len() < 2 || rungs.last().unwrap().epsilon < rungs[0].epsilon;
    let pass = rungs.iter().all(|r| r.pass) && threshold_monotone && threshold_decays;
    Ok(TailReport {
        bound_c: c,
        p,
        ell,
        rungs,
        threshold_monotone,
        threshold_decays,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn threshold_p2_form() {
        // p = 2: eps(N) = 2c max{f(N+1)^{-1/4}, f(N+1)^{-1/2} T^{-1/2}}
        let w = WeightFn::power(1.0).unwrap();
        let c = 3.0;
        let t = 0.1;
        let eps = tail_threshold(c, t, 2.0, &w, 8).unwrap();
        let f9 = 9.0f64;
        let expect = 2.0 * c * (f9.powf(-0.25)).max(f9.powf(-0.5) * t.powf(-0.5));
        assert_relative_eq!(eps, expect, epsilon = 1e-14);
        assert!(matches!(
            tail_threshold(c, t, 1.0, &w, 8),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn threshold_decays_by_half_over_ladder() {
        // f(nu) = nu, T = 0.1: the measure branch dominates and
        // eps(64)/eps(8) = sqrt(9/65) < 1/2
        let w = WeightFn::power(1.0).unwrap();
        let eps8 = tail_threshold(1.0, 0.1, 2.0, &w, 8).unwrap();
        let eps64 = tail_threshold(1.0, 0.1, 2.0, &w, 64).unwrap();
        assert!(eps64 < 0.5 * eps8, "eps64 = {eps64}, eps8 = {eps8}");
    }

    fn synthetic_decay_family(weight: &WeightFn, members: usize) -> Vec<ScaleCurve> {
        // x_nu(s) proportional to f(nu)^{-1} with a smooth s-profile
        let samples = 129;
        let t_half = 0.5;
        (0..members)
            .map(|m| {
                let states = (0..samples)
                    .map(|i| {
                        let s = -t_half + i as f64 * 2.0 * t_half / (samples - 1) as f64;
                        let profile = 1.0 + 0.3 * (s * (1.0 + m as f64 / 4.0)).sin();
                        let pairs: Vec<(u64, f64)> = (1..=96u64)
                            .map(|nu| (nu, profile / weight.eval(nu)))
                            .collect();
                        ScaleVector::new(weight.clone(), pairs).unwrap()
                    })
                    .collect();
                ScaleCurve::new(t_half, states).unwrap()
            })
            .collect()
    }

    #[test]
    fn tail_verify_synthetic_decay() {
        let weight = WeightFn::power(1.0).unwrap();
        let family = synthetic_decay_family(&weight, 4);
        let report = tail_verify(&family, 2.0, 2, &[8, 16, 32, 64], None).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.threshold_monotone);
        // direct-summation oracle at one cut: sup_s || (id - pi_16) w ||_{H1}
        let n_cut = 16u64;
        let direct: f64 = family
            .iter()
            .flat_map(|c| c.states.iter())
            .map(|x| {
                (17..=96u64)
                    .map(|nu| weight.eval(nu) * (x.coeff(nu)).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        let rung = report.rungs.iter().find(|r| r.n_cut == n_cut).unwrap();
        assert_relative_eq!(rung.measured_sup, direct, max_relative = 1e-12);
        assert!(direct <= rung.epsilon);
    }

    #[test]
    fn tail_verify_band_limited_family_is_exact_zero() {
        // all content below every cut: tails vanish identically
        let weight = WeightFn::power(1.0).unwrap();
        let samples = 65;
        let states: Vec<ScaleVector> = (0..samples)
            .map(|i| {
                let s = -1.0 + i as f64 / 32.0;
                ScaleVector::new(weight.clone(), [(3u64, s.cos())]).unwrap()
            })
            .collect();
        let family = vec![ScaleCurve::new(1.0, states).unwrap()];
        let report = tail_verify(&family, 2.0, 2, &[8, 16], None).unwrap();
        for rung in &report.rungs {
            assert_eq!(rung.measured_sup, 0.0);
        }
        assert!(report.pass);
    }

    #[test]
    fn ladder_must_increase() {
        let weight = WeightFn::power(1.0).unwrap();
        let family = synthetic_decay_family(&weight, 1);
        assert!(tail_verify(&family, 2.0, 2, &[16, 8], None).is_err());
    }
}
