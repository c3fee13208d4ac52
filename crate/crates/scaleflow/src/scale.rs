//! Weighted-l2 scale spaces.
//!
//! A monotone increasing unbounded weight f : {1,2,...} -> (0,inf) defines
//! the Hilbert scale H_k = l2_{f^k}, k in Z, all sharing the standard basis.
//! A vector is stored once, in canonical l2 coordinates, and every level
//! norm is a reweighting:
//!
//! ```text
//! ||x||_k^2 = sum_nu f(nu)^k x_nu^2
//! ```
//!
//! The fundamental operator F_zeta x = { zeta(nu) sqrt(f(nu)) x_nu } is an
//! isometry H_{k+1} -> H_k for every k and is the Hessian of the quadratic
//! action A(x) = 1/2 sum zeta(nu) sqrt(f(nu)) x_nu^2.  Finite-rank
//! orthogonal projections pi_N and the induced tail norms carry the
//! quantitative compactness mechanism: on the range of (id - pi_N),
//!
//! ```text
//! ||x||_{k-1} <= f(N+1)^{-1/2} ||x||_k ,
//! ```
//!
//! exactly, because f is monotone.
//!
//! Vectors have finite support, so all level norms exist; infinite sums
//! only ever enter through truncation choices made by callers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// mode bijection used by the Floer weights
// ---------------------------------------------------------------------------

/// Two-sided Fourier mode of rank r >= 1 in the ordering 0, -1, +1, -2, +2, ...
///
/// Ranks order the modes by the magnitude of the Floer multiplier
/// (|2 pi j + 1/2| respectively |pi j + 1/2|), which makes the induced
/// weight monotone while reproducing the multiplier exactly, sign included.
pub fn mode_of_rank(rank: u64) -> i64 {
    debug_assert!(rank >= 1);
    if rank == 1 {
        0
    } else if rank % 2 == 0 {
        -((rank / 2) as i64)
    } else {
        ((rank - 1) / 2) as i64
    }
}

/// Inverse of [`mode_of_rank`].
pub fn rank_of_mode(j: i64) -> u64 {
    if j == 0 {
        1
    } else if j < 0 {
        2 * j.unsigned_abs()
    } else {
        2 * j as u64 + 1
    }
}

/// Fourier mode owning scale index `nu` when each mode carries a block of
/// `2n` real coordinates.
pub fn mode_of_index(nu: u64, n: usize) -> i64 {
    debug_assert!(nu >= 1 && n >= 1);
    mode_of_rank((nu - 1) / (2 * n as u64) + 1)
}

/// Multiplier of the periodic fundamental operator on mode j.
pub fn periodic_multiplier(j: i64) -> f64 {
    2.0 * std::f64::consts::PI * j as f64 + 0.5
}

/// Multiplier of the boundary-path fundamental operator on mode j.
pub fn lagrangian_multiplier(j: i64) -> f64 {
    std::f64::consts::PI * j as f64 + 0.5
}

// ---------------------------------------------------------------------------
// weight functions and sign maps
// ---------------------------------------------------------------------------

/// Monotone increasing unbounded weight nu -> f(nu) > 0.
///
/// Closed-form kinds are unbounded by construction.  `Tabulated` weights
/// must declare a growth rate which the table realizes end to end; past the
/// table the weight is extended linearly at that rate, so quantitative
/// tail thresholds stay computable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightFn {
    Power { exponent: f64 },
    FloerPeriodic { n: usize },
    FloerLagrangian { n: usize },
    Tabulated { values: Vec<f64>, growth_rate: f64 },
}

impl WeightFn {
    pub fn power(exponent: f64) -> Result<Self> {
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(Error::config(format!(
                "power weight needs a positive finite exponent, got {exponent}"
            )));
        }
        Ok(WeightFn::Power { exponent })
    }

    pub fn floer_periodic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("floer weight needs n >= 1"));
        }
        Ok(WeightFn::FloerPeriodic { n })
    }

    pub fn floer_lagrangian(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("floer weight needs n >= 1"));
        }
        Ok(WeightFn::FloerLagrangian { n })
    }

    /// A tabulated weight with its unboundedness witness: the declared
    /// per-step growth rate.  Construction rejects tables that are not
    /// positive, not monotone, or that fail to realize the declared rate
    /// (`last >= first + rate * (len - 1)`).
    pub fn tabulated(values: Vec<f64>, growth_rate: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::config("tabulated weight needs at least one value"));
        }
        if !(growth_rate.is_finite() && growth_rate > 0.0) {
            return Err(Error::config(
                "tabulated weight needs a positive growth rate",
            ));
        }
        for w in values.windows(2) {
            if w[1] < w[0] {
                return Err(Error::config(
                    "tabulated weight must be monotone increasing",
                ));
            }
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::config(
                "tabulated weight values must be positive and finite",
            ));
        }
        let first = values[0];
        let last = *values.last().unwrap();
        if last < first + growth_rate * (values.len() as f64 - 1.0) {
            return Err(Error::config(
                "tabulated weight does not realize its declared growth rate; \
                 unboundedness witness rejected",
            ));
        }
        Ok(WeightFn::Tabulated {
            values,
            growth_rate,
        })
    }

    /// Evaluate f(nu), nu >= 1.
    pub fn eval(&self, nu: u64) -> f64 {
        debug_assert!(nu >= 1, "scale indices start at 1");
        match self {
            WeightFn::Power { exponent } => (nu as f64).powf(*exponent),
            WeightFn::FloerPeriodic { n } => {
                let m = periodic_multiplier(mode_of_index(nu, *n));
                m * m
            }
            WeightFn::FloerLagrangian { n } => {
                let m = lagrangian_multiplier(mode_of_index(nu, *n));
                m * m
            }
            WeightFn::Tabulated {
                values,
                growth_rate,
            } => {
                let len = values.len() as u64;
                if nu <= len {
                    values[(nu - 1) as usize]
                } else {
                    values[values.len() - 1] + growth_rate * (nu - len) as f64
                }
            }
        }
    }
}

/// A map zeta : {1,2,...} -> {+1, -1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignMap {
    Plus,
    Minus,
    FloerPeriodic { n: usize },
    FloerLagrangian { n: usize },
    Tabulated { signs: Vec<i8>, default_sign: i8 },
}

impl SignMap {
    pub fn tabulated(signs: Vec<i8>, default_sign: i8) -> Result<Self> {
        if signs
            .iter()
            .chain([&default_sign])
            .any(|s| *s != 1 && *s != -1)
        {
            return Err(Error::config("sign map values must be +1 or -1"));
        }
        Ok(SignMap::Tabulated {
            signs,
            default_sign,
        })
    }

    pub fn eval(&self, nu: u64) -> f64 {
        debug_assert!(nu >= 1);
        match self {
            SignMap::Plus => 1.0,
            SignMap::Minus => -1.0,
            SignMap::FloerPeriodic { n } => periodic_multiplier(mode_of_index(nu, *n)).signum(),
            SignMap::FloerLagrangian { n } => lagrangian_multiplier(mode_of_index(nu, *n)).signum(),
            SignMap::Tabulated {
                signs,
                default_sign,
            } => {
                let len = signs.len() as u64;
                if nu <= len {
                    signs[(nu - 1) as usize] as f64
                } else {
                    *default_sign as f64
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// scale vectors
// ---------------------------------------------------------------------------

/// A finitely supported real sequence in canonical l2 coordinates together
/// with the weight defining its scale of norms.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleVector {
    weight: WeightFn,
    coeffs: BTreeMap<u64, f64>,
}

impl ScaleVector {
    pub fn zero(weight: WeightFn) -> Self {
        ScaleVector {
            weight,
            coeffs: BTreeMap::new(),
        }
    }

    /// Build from (index, value) pairs.  Indices start at 1; duplicate
    /// indices and non-finite values are rejected; exact zeros are pruned.
    pub fn new(weight: WeightFn, pairs: impl IntoIterator<Item = (u64, f64)>) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (nu, v) in pairs {
            if nu == 0 {
                return Err(Error::validation("scale indices start at 1"));
            }
            if !v.is_finite() {
                return Err(Error::validation(format!(
                    "non-finite coefficient at index {nu}"
                )));
            }
            if v == 0.0 {
                continue;
            }
            if coeffs.insert(nu, v).is_some() {
                return Err(Error::validation(format!("duplicate index {nu}")));
            }
        }
        Ok(ScaleVector { weight, coeffs })
    }

    /// The basis vector e_nu.
    pub fn basis(weight: WeightFn, nu: u64) -> Self {
        ScaleVector::new(weight, [(nu, 1.0)]).expect("basis index >= 1")
    }

    pub fn weight(&self) -> &WeightFn {
        &self.weight
    }

    pub fn coeff(&self, nu: u64) -> f64 {
        self.coeffs.get(&nu).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.coeffs.iter().map(|(nu, v)| (*nu, *v))
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn support_max(&self) -> Option<u64> {
        self.coeffs.keys().next_back().copied()
    }

    fn check_same_weight(&self, other: &Self) -> Result<()> {
        if self.weight != other.weight {
            return Err(Error::config(
                "scale vectors carry different weight functions",
            ));
        }
        Ok(())
    }

    /// ||x||_k = sqrt( sum f(nu)^k x_nu^2 ).  Zero iff x = 0.
    pub fn level_norm(&self, k: i32) -> f64 {
        self.coeffs
            .iter()
            .map(|(nu, v)| self.weight.eval(*nu).powi(k) * v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// <x,y>_k = sum f(nu)^k x_nu y_nu.  Errors when the weights differ.
    pub fn level_inner(&self, other: &Self, k: i32) -> Result<f64> {
        self.check_same_weight(other)?;
        Ok(self
            .coeffs
            .iter()
            .filter_map(|(nu, v)| {
                other
                    .coeffs
                    .get(nu)
                    .map(|w| self.weight.eval(*nu).powi(k) * v * w)
            })
            .sum())
    }

    /// (F x)_nu = zeta(nu) sqrt(f(nu)) x_nu; drops every level norm by one:
    /// ||F x||_k = ||x||_{k+1}.
    pub fn fundamental_apply(&self, zeta: &SignMap) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(nu, v)| (*nu, zeta.eval(*nu) * self.weight.eval(*nu).sqrt() * v))
            .collect();
        ScaleVector {
            weight: self.weight.clone(),
            coeffs,
        }
    }

    /// Coefficient-wise inverse of the fundamental operator,
    /// x_nu = y_nu / (zeta(nu) sqrt(f(nu))).  Total since f > 0.
    pub fn fundamental_invert(&self, zeta: &SignMap) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(nu, v)| (*nu, v / (zeta.eval(*nu) * self.weight.eval(*nu).sqrt())))
            .collect();
        ScaleVector {
            weight: self.weight.clone(),
            coeffs,
        }
    }

    /// A(x) = 1/2 sum zeta(nu) sqrt(f(nu)) x_nu^2.  Its Hessian with respect
    /// to the level-0 inner product is the fundamental operator.
    pub fn quadratic_action(&self, zeta: &SignMap) -> f64 {
        0.5 * self
            .coeffs
            .iter()
            .map(|(nu, v)| zeta.eval(*nu) * self.weight.eval(*nu).sqrt() * v * v)
            .sum::<f64>()
    }

    /// Orthogonal projection pi_N: zero every coefficient with nu > N.
    pub fn project(&self, n_cut: u64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(nu, _)| **nu <= n_cut)
            .map(|(nu, v)| (*nu, *v))
            .collect();
        ScaleVector {
            weight: self.weight.clone(),
            coeffs,
        }
    }

    /// ||(id - pi_N) x||_k.
    pub fn tail_norm(&self, n_cut: u64, k: i32) -> f64 {
        self.coeffs
            .iter()
            .filter(|(nu, _)| **nu > n_cut)
            .map(|(nu, v)| self.weight.eval(*nu).powi(k) * v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// a*x + b*y over a shared weight.
    pub fn lincomb(a: f64, x: &Self, b: f64, y: &Self) -> Result<Self> {
        x.check_same_weight(y)?;
        let mut coeffs = BTreeMap::new();
        for (nu, v) in &x.coeffs {
            coeffs.insert(*nu, a * v);
        }
        for (nu, v) in &y.coeffs {
            *coeffs.entry(*nu).or_insert(0.0) += b * v;
        }
        coeffs.retain(|_, v| *v != 0.0);
        Ok(ScaleVector {
            weight: x.weight.clone(),
            coeffs,
        })
    }
}

// JSON shape: {"weight": <descriptor>, "coeffs": [[nu, value], ...]} with
// ascending nu (BTreeMap order).
#[derive(Serialize, Deserialize)]
struct ScaleVectorRepr {
    weight: WeightFn,
    coeffs: Vec<(u64, f64)>,
}

impl Serialize for ScaleVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ScaleVectorRepr {
            weight: self.weight.clone(),
            coeffs: self.iter().collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ScaleVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = ScaleVectorRepr::deserialize(d)?;
        ScaleVector::new(repr.weight, repr.coeffs).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn weight_nu() -> WeightFn {
        WeightFn::power(1.0).unwrap()
    }

    #[test]
    fn level_norm_examples() {
        let w = weight_nu();
        let e1 = ScaleVector::basis(w.clone(), 1);
        assert_relative_eq!(e1.level_norm(3), 1.0);
        let e4 = ScaleVector::basis(w.clone(), 4);
        assert_relative_eq!(e4.level_norm(1), 2.0);
        let zero = ScaleVector::zero(w);
        assert_eq!(zero.level_norm(-2), 0.0);
    }

    #[test]
    fn level_inner_examples() {
        let w = weight_nu();
        let e2 = ScaleVector::basis(w.clone(), 2);
        let e3 = ScaleVector::basis(w.clone(), 3);
        assert_eq!(e2.level_inner(&e3, 1).unwrap(), 0.0);
        assert_relative_eq!(e2.level_inner(&e2, 2).unwrap(), 4.0);
        // k = 0 is the plain l2 product
        let x = ScaleVector::new(w.clone(), [(1, 1.0), (2, 1.0)]).unwrap();
        let y = ScaleVector::new(w, [(1, 1.0), (2, -1.0)]).unwrap();
        assert_eq!(x.level_inner(&y, 0).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_weights_rejected() {
        let x = ScaleVector::basis(weight_nu(), 1);
        let y = ScaleVector::basis(WeightFn::power(2.0).unwrap(), 1);
        assert!(matches!(x.level_inner(&y, 0), Err(Error::Config(_))));
    }

    #[test]
    fn fundamental_examples() {
        let w = weight_nu();
        let e4 = ScaleVector::basis(w.clone(), 4);
        let f_e4 = e4.fundamental_apply(&SignMap::Plus);
        assert_relative_eq!(f_e4.coeff(4), 2.0);
        // sign flip at unit weight
        let e1 = ScaleVector::basis(w.clone(), 1);
        let zeta = SignMap::tabulated(vec![-1], 1).unwrap();
        assert_relative_eq!(e1.fundamental_apply(&zeta).coeff(1), -1.0);
        // isometry one level down
        let e9 = ScaleVector::basis(w, 9);
        assert_relative_eq!(e9.fundamental_apply(&SignMap::Plus).level_norm(0), 3.0);
        assert_relative_eq!(e9.level_norm(1), 3.0);
    }

    #[test]
    fn fundamental_invert_examples() {
        let w = weight_nu();
        let y = ScaleVector::new(w.clone(), [(4, 2.0)]).unwrap();
        assert_relative_eq!(y.fundamental_invert(&SignMap::Plus).coeff(4), 1.0);
        assert_eq!(
            ScaleVector::zero(w.clone())
                .fundamental_invert(&SignMap::Plus)
                .support_len(),
            0
        );

        // roundtrip on a random 32-support vector
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let pairs: Vec<(u64, f64)> = (1..=32u64)
            .map(|nu| (nu * 3, rng.gen_range(-1.0..1.0)))
            .collect();
        let x = ScaleVector::new(w, pairs).unwrap();
        let zeta = SignMap::FloerPeriodic { n: 1 };
        let back = x.fundamental_apply(&zeta).fundamental_invert(&zeta);
        let diff = ScaleVector::lincomb(1.0, &back, -1.0, &x).unwrap();
        assert!(diff.level_norm(0) <= 1e-14 * x.level_norm(0));
    }

    #[test]
    fn quadratic_action_examples() {
        let e1 = ScaleVector::basis(weight_nu(), 1);
        assert_relative_eq!(e1.quadratic_action(&SignMap::Plus), 0.5);
        assert_eq!(
            ScaleVector::zero(weight_nu()).quadratic_action(&SignMap::Plus),
            0.0
        );
        let w2 = WeightFn::power(2.0).unwrap();
        let e2 = ScaleVector::basis(w2, 2);
        assert_relative_eq!(e2.quadratic_action(&SignMap::Minus), -1.0);
    }

    #[test]
    fn project_and_tail_examples() {
        let w = weight_nu();
        let e3 = ScaleVector::basis(w.clone(), 3);
        assert_eq!(e3.project(5), e3);
        assert_eq!(e3.tail_norm(5, 1), 0.0);
        assert_relative_eq!(e3.tail_norm(2, 1), 3f64.sqrt());

        // Pythagoras at every level
        let x = ScaleVector::new(w, [(1, 1.0), (2, -2.0), (7, 0.25)]).unwrap();
        for k in -2..=2 {
            let total = x.level_norm(k).powi(2);
            let head = x.project(3).level_norm(k).powi(2);
            let tail = x.tail_norm(3, k).powi(2);
            assert_relative_eq!(total, head + tail, max_relative = 1e-14);
        }
    }

    #[test]
    fn tail_inequality_bruteforce_support_5_to_8() {
        let w = WeightFn::power(2.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let pairs: Vec<(u64, f64)> = (5..=8).map(|nu| (nu, rng.gen_range(-2.0..2.0))).collect();
            let x = ScaleVector::new(w.clone(), pairs).unwrap();
            let lhs = x.tail_norm(4, 0);
            let rhs = w.eval(5).powf(-0.5) * x.tail_norm(4, 1);
            assert!(lhs <= rhs + 1e-14 * rhs.abs());
        }
    }

    #[test]
    fn tabulated_weight_witness() {
        assert!(WeightFn::tabulated(vec![1.0, 2.0, 3.0], 1.0).is_ok());
        // table flat: fails to realize the declared rate
        assert!(WeightFn::tabulated(vec![1.0, 1.0, 1.0], 0.5).is_err());
        // non-monotone
        assert!(WeightFn::tabulated(vec![1.0, 0.5], 0.1).is_err());
        // extension beyond the table grows at the declared rate
        let w = WeightFn::tabulated(vec![1.0, 2.0], 1.0).unwrap();
        assert_relative_eq!(w.eval(5), 2.0 + 3.0);
    }

    #[test]
    fn floer_weight_reproduces_multiplier_and_is_monotone() {
        for n in [1usize, 2] {
            let w = WeightFn::floer_periodic(n).unwrap();
            let zeta = SignMap::FloerPeriodic { n };
            let mut prev = 0.0;
            for nu in 1..=64u64 {
                let j = mode_of_index(nu, n);
                let m = periodic_multiplier(j);
                assert_relative_eq!(zeta.eval(nu) * w.eval(nu).sqrt(), m, max_relative = 1e-15);
                assert!(w.eval(nu) >= prev);
                prev = w.eval(nu);
            }
        }
    }

    #[test]
    fn serialization_roundtrip_ascending() {
        let x = ScaleVector::new(weight_nu(), [(4, 0.5), (1, -1.0), (9, 2.0)]).unwrap();
        let json = serde_json::to_string(&x).unwrap();
        assert!(json.find("[1,").unwrap() < json.find("[4,").unwrap());
        let back: ScaleVector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, x);
    }

    proptest! {
        #[test]
        fn prop_fundamental_isometry(seed in 0u64..500) {
            let w = weight_nu();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let pairs: Vec<(u64, f64)> = (0..40)
                .map(|_| (rng.gen_range(1..=256u64), rng.gen_range(-1.0..1.0)))
                .collect();
            let mut seen = std::collections::BTreeSet::new();
            let pairs: Vec<_> = pairs.into_iter().filter(|(nu, _)| seen.insert(*nu)).collect();
            let x = ScaleVector::new(w, pairs).unwrap();
            let zeta = SignMap::FloerPeriodic { n: 1 };
            let fx = x.fundamental_apply(&zeta);
            for k in -2..=2 {
                let a = fx.level_norm(k);
                let b = x.level_norm(k + 1);
                prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
            }
        }

        #[test]
        fn prop_duality_cauchy_schwarz(seed in 0u64..200) {
            let w = WeightFn::power(1.5).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                let pairs: Vec<(u64, f64)> = (1..=24u64)
                    .map(|i| (i * rng.gen_range(1..6u64), rng.gen_range(-1.0..1.0)))
                    .collect();
                let mut seen = std::collections::BTreeSet::new();
                let pairs: Vec<_> = pairs.into_iter().filter(|(nu, _)| seen.insert(*nu)).collect();
                ScaleVector::new(w.clone(), pairs).unwrap()
            };
            let x = mk(&mut rng);
            let y = mk(&mut rng);
            let ip = x.level_inner(&y, 0).unwrap().abs();
            for k in -2..=2i32 {
                prop_assert!(ip <= x.level_norm(k) * y.level_norm(-k) * (1.0 + 1e-12) + 1e-300);
            }
        }

        #[test]
        fn prop_tail_monotonicity_exact(seed in 0u64..200, ncut in 0u64..64) {
            let w = weight_nu();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x51);
            let pairs: Vec<(u64, f64)> = (1..=64u64).map(|nu| (nu, rng.gen_range(-1.0..1.0))).collect();
            let x = ScaleVector::new(w.clone(), pairs).unwrap();
            for k in -1..=2i32 {
                let lhs = x.tail_norm(ncut, k - 1);
                let rhs = w.eval(ncut + 1).powf(-0.5) * x.tail_norm(ncut, k);
                prop_assert!(lhs <= rhs * (1.0 + 1e-14) + 1e-300);
            }
        }

        #[test]
        fn prop_hessian_identity(seed in 0u64..100) {
            // central second difference of the quadratic action equals <F h, h>_0
            let w = weight_nu();
            let zeta = SignMap::FloerPeriodic { n: 1 };
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x99);
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                let pairs: Vec<(u64, f64)> = (1..=16u64).map(|nu| (nu, rng.gen_range(-1.0..1.0))).collect();
                ScaleVector::new(w.clone(), pairs).unwrap()
            };
            let x = mk(&mut rng);
            let h = mk(&mut rng);
            let eps = 1e-3;
            let plus = ScaleVector::lincomb(1.0, &x, eps, &h).unwrap().quadratic_action(&zeta);
            let minus = ScaleVector::lincomb(1.0, &x, -eps, &h).unwrap().quadratic_action(&zeta);
            let mid = x.quadratic_action(&zeta);
            let second = (plus - 2.0 * mid + minus) / (eps * eps);
            let exact = h.fundamental_apply(&zeta).level_inner(&h, 0).unwrap();
            prop_assert!((second - exact).abs() <= 1e-8 * exact.abs().max(1.0));
        }

        #[test]
        fn prop_project_idempotent_nonincreasing(seed in 0u64..100, ncut in 1u64..40) {
            let w = weight_nu();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x7e);
            let pairs: Vec<(u64, f64)> = (1..=48u64).map(|nu| (nu, rng.gen_range(-1.0..1.0))).collect();
            let x = ScaleVector::new(w, pairs).unwrap();
            let p = x.project(ncut);
            prop_assert_eq!(p.project(ncut), p.clone());
            for k in -2..=2i32 {
                prop_assert!(p.level_norm(k) <= x.level_norm(k) * (1.0 + 1e-15));
            }
        }
    }
}
