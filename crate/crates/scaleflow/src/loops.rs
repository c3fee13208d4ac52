//! Fourier loops and boundary paths in C^n.
//!
//! Two families of basis functions are supported:
//!
//! * periodic loops  x(t) = sum_{|j|<=N} e^{2 pi j t i} x_j,  t in S^1,
//!   x_j in C^n;
//! * boundary paths  x(t) = sum_{|j|<=N} e^{pi j t i} x_j,  t in [0,1],
//!   x_j in R^n, whose endpoints (and alternate derivatives) sit on the
//!   real subspace.
//!
//! Sobolev levels use the diagonal weights (2 pi j + 1/2)^{2k} respectively
//! (pi j + 1/2)^{2k}, so the operator `-i d/dt + 1/2` is an isometry one
//! level down for both families.  Under the block bijection of
//! [`crate::scale`] these norms agree exactly with the abstract level
//! norms, with the floer weight and sign map reproducing the multiplier
//! sign included.
//!
//! Pointwise nonlinearities are evaluated by oversampled collocation:
//! synthesize on a uniform grid, apply the map per sample, analyze back.
//! The oversampling rule for nonlinear work is M = 4(2N+1); plain
//! transforms only need M >= 2N+1, where they invert exactly.
//!
//! Boundary paths are identified with reflection-symmetric loops on the
//! doubled circle: the coefficients are untouched, reality of the
//! coefficients *is* the symmetry gamma(2-t) = conj(gamma(t)).

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scale::{
    lagrangian_multiplier, periodic_multiplier, rank_of_mode, ScaleVector, SignMap, WeightFn,
};

/// Absolute size below which imaginary dust on boundary-path coefficients
/// is silently zeroed; anything larger is a validation error.
pub const LAGRANGIAN_IMAG_TOL: f64 = 1e-14;

/// Oversampling rule for nonlinear pointwise evaluation at truncation N.
pub fn oversampled_len(order: usize) -> usize {
    4 * (2 * order + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Lagrangian,
}

impl Boundary {
    /// Multiplier of the fundamental operator on mode j.
    pub fn multiplier(self, j: i64) -> f64 {
        match self {
            Boundary::Periodic => periodic_multiplier(j),
            Boundary::Lagrangian => lagrangian_multiplier(j),
        }
    }

    /// Multiplier of the spectral time derivative on mode j (without the i).
    pub fn deriv_rate(self, j: i64) -> f64 {
        match self {
            Boundary::Periodic => 2.0 * std::f64::consts::PI * j as f64,
            Boundary::Lagrangian => std::f64::consts::PI * j as f64,
        }
    }
}

/// A truncated Fourier series with C^n coefficients on modes -N..=N.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierPath {
    n: usize,
    boundary: Boundary,
    order: usize,
    /// Mode j, component c at index (j + N) * n + c.
    coeffs: Vec<Complex64>,
}

impl FourierPath {
    pub fn zero(n: usize, boundary: Boundary, order: usize) -> Self {
        FourierPath {
            n,
            boundary,
            order,
            coeffs: vec![Complex64::ZERO; (2 * order + 1) * n],
        }
    }

    /// Build from a full coefficient block (mode-major, component-minor).
    pub fn new(n: usize, boundary: Boundary, order: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("path dimension n must be >= 1"));
        }
        if coeffs.len() != (2 * order + 1) * n {
            return Err(Error::validation(format!(
                "coefficient block has length {}, expected {}",
                coeffs.len(),
                (2 * order + 1) * n
            )));
        }
        if coeffs
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::validation("non-finite coefficient"));
        }
        let mut path = FourierPath {
            n,
            boundary,
            order,
            coeffs,
        };
        if boundary == Boundary::Lagrangian {
            path.enforce_real_coeffs()?;
        }
        Ok(path)
    }

    fn enforce_real_coeffs(&mut self) -> Result<()> {
        for z in &mut self.coeffs {
            if z.im.abs() > LAGRANGIAN_IMAG_TOL {
                return Err(Error::validation(format!(
                    "boundary-path coefficient has imaginary part {:.3e} above {:.0e}",
                    z.im, LAGRANGIAN_IMAG_TOL
                )));
            }
            z.im = 0.0;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    fn block(&self, j: i64) -> usize {
        debug_assert!(j.unsigned_abs() as usize <= self.order);
        ((j + self.order as i64) as usize) * self.n
    }

    pub fn mode(&self, j: i64) -> &[Complex64] {
        let b = self.block(j);
        &self.coeffs[b..b + self.n]
    }

    pub fn set_mode(&mut self, j: i64, value: &[Complex64]) {
        assert_eq!(value.len(), self.n);
        let b = self.block(j);
        self.coeffs[b..b + self.n].copy_from_slice(value);
    }

    /// Single-mode path with the given coefficient vector.
    pub fn single_mode(
        n: usize,
        boundary: Boundary,
        order: usize,
        j: i64,
        value: &[Complex64],
    ) -> Result<Self> {
        if j.unsigned_abs() as usize > order {
            return Err(Error::precondition("mode outside truncation"));
        }
        let mut p = FourierPath::zero(n, boundary, order);
        p.set_mode(j, value);
        if boundary == Boundary::Lagrangian {
            p.enforce_real_coeffs()?;
        }
        Ok(p)
    }

    /// Apply a complex multiplier per mode.
    pub fn map_modes(&self, f: impl Fn(i64) -> Complex64) -> Self {
        let mut out = self.clone();
        for j in -(self.order as i64)..=(self.order as i64) {
            let m = f(j);
            let b = out.block(j);
            for c in 0..self.n {
                out.coeffs[b + c] *= m;
            }
        }
        out
    }

    /// Weighted Sobolev norm at level k.
    pub fn sobolev_norm(&self, k: i32) -> f64 {
        let mut acc = 0.0;
        for j in -(self.order as i64)..=(self.order as i64) {
            let m = self.boundary.multiplier(j);
            let w = (m * m).powi(k);
            acc += w * self.mode(j).iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        acc.sqrt()
    }

    /// Real inner product at level k (the real part of the Hermitian one).
    pub fn sobolev_inner(&self, other: &Self, k: i32) -> Result<f64> {
        self.check_compatible(other)?;
        let mut acc = 0.0;
        for j in -(self.order as i64)..=(self.order as i64) {
            let m = self.boundary.multiplier(j);
            let w = (m * m).powi(k);
            acc += w * self
                .mode(j)
                .iter()
                .zip(other.mode(j))
                .map(|(a, b)| (a * b.conj()).re)
                .sum::<f64>();
        }
        Ok(acc)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.boundary != other.boundary || self.order != other.order {
            return Err(Error::precondition(
                "paths differ in dimension, boundary type, or truncation",
            ));
        }
        Ok(())
    }

    /// The fundamental operator `-i d/dt + 1/2`: diagonal with multiplier
    /// (2 pi j + 1/2) resp. (pi j + 1/2); an isometry one Sobolev level down.
    pub fn floer_fundamental(&self) -> Self {
        self.map_modes(|j| Complex64::new(self.boundary.multiplier(j), 0.0))
    }

    /// Coefficient-wise inverse of the fundamental operator.
    pub fn floer_fundamental_inv(&self) -> Self {
        self.map_modes(|j| Complex64::new(1.0 / self.boundary.multiplier(j), 0.0))
    }

    /// Spectral time derivative (exact on the truncated space).  Loops only:
    /// the derivative of a boundary path leaves the real-coefficient class.
    pub fn time_derivative(&self) -> Result<Self> {
        if self.boundary != Boundary::Periodic {
            return Err(Error::unsupported(
                "spectral d/dt as a path is only defined for periodic loops",
            ));
        }
        Ok(self.map_modes(|j| Complex64::new(0.0, self.boundary.deriv_rate(j))))
    }

    /// Rotate the loop parameter: x(t) -> x(t - tau).  Every Sobolev norm is
    /// invariant.  Boundary paths are rejected (the shift needs the circle).
    pub fn time_shift(&self, tau: f64) -> Result<Self> {
        if self.boundary != Boundary::Periodic {
            return Err(Error::unsupported("time shift needs a periodic loop"));
        }
        Ok(self.map_modes(|j| {
            Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * j as f64 * tau)
        }))
    }

    /// Re-truncate to a (possibly different) order, zero-padding or
    /// discarding outer modes.
    pub fn with_order(&self, order: usize) -> Self {
        let mut out = FourierPath::zero(self.n, self.boundary, order);
        let keep = self.order.min(order) as i64;
        for j in -keep..=keep {
            out.set_mode(j, self.mode(j));
        }
        out
    }

    /// Zero every mode of scale rank > `rank` (the finite-rank projection of
    /// the abstract scale under the block bijection).
    pub fn project_rank(&self, rank: u64) -> Self {
        let mut out = self.clone();
        for j in -(self.order as i64)..=(self.order as i64) {
            if rank_of_mode(j) > rank {
                let b = out.block(j);
                for c in 0..self.n {
                    out.coeffs[b + c] = Complex64::ZERO;
                }
            }
        }
        out
    }

    /// Level-k norm of the rank tail (id - pi_rank).
    pub fn tail_norm_rank(&self, rank: u64, k: i32) -> f64 {
        let mut acc = 0.0;
        for j in -(self.order as i64)..=(self.order as i64) {
            if rank_of_mode(j) > rank {
                let m = self.boundary.multiplier(j);
                acc += (m * m).powi(k) * self.mode(j).iter().map(|z| z.norm_sqr()).sum::<f64>();
            }
        }
        acc.sqrt()
    }

    /// Linear combination of same-shape paths.
    pub fn lincomb(terms: &[(f64, &FourierPath)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::precondition("empty lincomb"))?;
        let mut out = FourierPath::zero(first.n, first.boundary, first.order);
        for (a, p) in terms {
            first.check_compatible(p)?;
            for (o, z) in out.coeffs.iter_mut().zip(&p.coeffs) {
                *o += *a * z;
            }
        }
        Ok(out)
    }

    /// Canonical l2 coordinates under the block bijection; the weight is the
    /// matching floer weight, so level norms agree with Sobolev norms.
    pub fn to_scale_vector(&self) -> ScaleVector {
        let weight = match self.boundary {
            Boundary::Periodic => WeightFn::FloerPeriodic { n: self.n },
            Boundary::Lagrangian => WeightFn::FloerLagrangian { n: self.n },
        };
        let block = 2 * self.n as u64;
        let mut pairs = Vec::with_capacity(self.coeffs.len() * 2);
        for j in -(self.order as i64)..=(self.order as i64) {
            let base = (rank_of_mode(j) - 1) * block;
            for (c, z) in self.mode(j).iter().enumerate() {
                pairs.push((base + 2 * c as u64 + 1, z.re));
                pairs.push((base + 2 * c as u64 + 2, z.im));
            }
        }
        ScaleVector::new(weight, pairs).expect("finite coefficients")
    }

    /// The matching sign map for the fundamental operator.
    pub fn sign_map(&self) -> SignMap {
        match self.boundary {
            Boundary::Periodic => SignMap::FloerPeriodic { n: self.n },
            Boundary::Lagrangian => SignMap::FloerLagrangian { n: self.n },
        }
    }

    /// Uniform samples of the path.  Needs M >= 2N+1 so the transform pair
    /// inverts exactly; errors otherwise.
    pub fn synthesize(&self, samples: usize) -> Result<CollocationGrid> {
        if samples < 2 * self.order + 1 {
            return Err(Error::precondition(format!(
                "undersampled grid: {} samples for truncation {}",
                samples, self.order
            )));
        }
        let m = samples;
        let n = self.n;
        let mut out = vec![Complex64::ZERO; m * n];
        // phase table: e^{2 pi i k / M}, k = 0..M-1
        let table: Vec<Complex64> = (0..m)
            .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / m as f64))
            .collect();
        for j in -(self.order as i64)..=(self.order as i64) {
            let coeff = self.mode(j);
            for s in 0..m {
                let k = (j.rem_euclid(m as i64) as usize * s) % m;
                let phase = table[k];
                for c in 0..n {
                    out[s * n + c] += coeff[c] * phase;
                }
            }
        }
        Ok(CollocationGrid {
            n,
            boundary: self.boundary,
            samples: out,
        })
    }
}

/// Uniform collocation samples of a path: t_m = m/M on the circle, or the
/// corresponding points of the doubled circle (t_m = 2m/M) for boundary
/// paths, where all pointwise work happens on the reflected loop.
#[derive(Debug, Clone)]
pub struct CollocationGrid {
    n: usize,
    boundary: Boundary,
    samples: Vec<Complex64>,
}

impl CollocationGrid {
    pub fn from_samples(n: usize, boundary: Boundary, samples: Vec<Complex64>) -> Result<Self> {
        if n == 0 || samples.len() % n != 0 || samples.is_empty() {
            return Err(Error::validation(
                "sample block must be a nonempty multiple of n",
            ));
        }
        Ok(CollocationGrid {
            n,
            boundary,
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn sample(&self, m: usize) -> &[Complex64] {
        &self.samples[m * self.n..(m + 1) * self.n]
    }

    pub fn sample_mut(&mut self, m: usize) -> &mut [Complex64] {
        &mut self.samples[m * self.n..(m + 1) * self.n]
    }

    /// Curve parameter of sample m (period 1 for loops, 2 for the doubled
    /// circle of a boundary path).
    pub fn param(&self, m: usize) -> f64 {
        let period = match self.boundary {
            Boundary::Periodic => 1.0,
            Boundary::Lagrangian => 2.0,
        };
        period * m as f64 / self.len() as f64
    }

    /// Mean of |g(t)|^2 over the grid; equals the level-0 norm squared for
    /// band-limited data (Parseval).
    pub fn mean_square(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.len() as f64
    }

    /// Trigonometric coefficients truncated at `order`.  Exactly inverts
    /// [`FourierPath::synthesize`] when the grid resolves the truncation;
    /// higher modes of non-band-limited grids alias into the result.
    pub fn analyze(&self, order: usize) -> Result<FourierPath> {
        let m = self.len();
        if m < 2 * order + 1 {
            return Err(Error::precondition(format!(
                "undersampled grid: {m} samples for truncation {order}"
            )));
        }
        let n = self.n;
        let mut coeffs = vec![Complex64::ZERO; (2 * order + 1) * n];
        let table: Vec<Complex64> = (0..m)
            .map(|k| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * k as f64 / m as f64))
            .collect();
        for j in -(order as i64)..=(order as i64) {
            let b = ((j + order as i64) as usize) * n;
            for s in 0..m {
                let k = (j.rem_euclid(m as i64) as usize * s) % m;
                let phase = table[k];
                for c in 0..n {
                    coeffs[b + c] += self.samples[s * n + c] * phase;
                }
            }
        }
        let scale = 1.0 / m as f64;
        for z in &mut coeffs {
            *z *= scale;
        }
        if self.boundary == Boundary::Lagrangian {
            // collocation dust on the reflected loop
            for z in &mut coeffs {
                if z.im.abs() <= LAGRANGIAN_IMAG_TOL {
                    z.im = 0.0;
                }
            }
        }
        FourierPath::new(n, self.boundary, order, coeffs)
    }
}

/// Fourier coefficients of the pointwise (complex, componentwise) product,
/// via oversampled collocation truncated to the combined order.  A scalar
/// (n = 1) factor broadcasts over the components of the other.
pub fn pointwise_product(x: &FourierPath, y: &FourierPath) -> Result<FourierPath> {
    if x.boundary != y.boundary {
        return Err(Error::precondition(
            "pointwise product needs a common boundary type",
        ));
    }
    if !(x.n == y.n || x.n == 1 || y.n == 1) {
        return Err(Error::precondition(
            "pointwise product needs equal dimensions or a scalar factor",
        ));
    }
    let order = x.order + y.order;
    let m = oversampled_len(order);
    let gx = x.synthesize(m)?;
    let gy = y.synthesize(m)?;
    let n = x.n.max(y.n);
    let mut samples = vec![Complex64::ZERO; m * n];
    for s in 0..m {
        let a = gx.sample(s);
        let b = gy.sample(s);
        for c in 0..n {
            let av = if x.n == 1 { a[0] } else { a[c] };
            let bv = if y.n == 1 { b[0] } else { b[c] };
            samples[s * n + c] = av * bv;
        }
    }
    CollocationGrid::from_samples(n, x.boundary, samples)?.analyze(order)
}

/// One endpoint-condition measurement of [`check_lagrangian_bc`].
#[derive(Debug, Clone, Serialize)]
pub struct BcEntry {
    pub derivative_order: usize,
    /// Endpoint t = 0 or t = 1.
    pub endpoint: f64,
    /// Euclidean distance to R^n (even order) or iR^n (odd order).
    pub distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BcReport {
    pub entries: Vec<BcEntry>,
    pub max_distance: f64,
    pub pass: bool,
}

/// Evaluate d^l/dt^l x at both endpoints for 0 <= l <= k-1 and measure the
/// distance to R^n (l even) or iR^n (l odd).
///
/// Boundary paths satisfy the conditions by construction (their stored
/// coefficients are real); the check also accepts a loop-typed candidate,
/// whose coefficients are read in the boundary-path basis — that is how a
/// sequence violating the conditions can be presented at all.
pub fn check_lagrangian_bc(x: &FourierPath, k: usize, tol: f64) -> Result<BcReport> {
    let mut entries = Vec::new();
    for ell in 0..k {
        for (endpoint, signfn) in [(0.0, false), (1.0, true)] {
            // d^l x(t) = sum (i pi j)^l e^{i pi j t} x_j; e^{i pi j} = (-1)^j
            let mut value = vec![Complex64::ZERO; x.n];
            for j in -(x.order as i64)..=(x.order as i64) {
                let rate = Complex64::new(0.0, std::f64::consts::PI * j as f64).powu(ell as u32);
                let boundary_phase = if signfn && j.rem_euclid(2) == 1 {
                    -1.0
                } else {
                    1.0
                };
                for (c, z) in x.mode(j).iter().enumerate() {
                    value[c] += rate * boundary_phase * z;
                }
            }
            let distance = if ell % 2 == 0 {
                value.iter().map(|z| z.im * z.im).sum::<f64>().sqrt()
            } else {
                value.iter().map(|z| z.re * z.re).sum::<f64>().sqrt()
            };
            entries.push(BcEntry {
                derivative_order: ell,
                endpoint,
                distance,
            });
        }
    }
    let max_distance = entries.iter().map(|e| e.distance).fold(0.0, f64::max);
    Ok(BcReport {
        entries,
        max_distance,
        pass: max_distance <= tol,
    })
}

/// Double a boundary path to the reflection-symmetric loop on the circle of
/// length two.  In coefficients this is the identity: the real coefficients
/// are exactly the symmetry gamma(2-t) = conj(gamma(t)).  The returned loop
/// is parameterized by u = t/2.
pub fn reflect_to_loop(x: &FourierPath) -> Result<FourierPath> {
    if x.boundary != Boundary::Lagrangian {
        return Err(Error::precondition("reflection doubles a boundary path"));
    }
    FourierPath::new(x.n, Boundary::Periodic, x.order, x.coeffs.clone())
}

/// Invert [`reflect_to_loop`]: check the loop's reflection symmetry (its
/// L^2 defect is 2 ||Im coeffs||) and restrict to the boundary path.
pub fn restrict_to_path(gamma: &FourierPath, tol: f64) -> Result<FourierPath> {
    if gamma.boundary != Boundary::Periodic {
        return Err(Error::precondition("restriction starts from a loop"));
    }
    let defect = 2.0 * gamma.coeffs.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
    if defect > tol {
        return Err(Error::validation(format!(
            "loop violates the reflection symmetry: L2 defect {defect:.3e} > {tol:.1e}"
        )));
    }
    let coeffs = gamma
        .coeffs
        .iter()
        .map(|z| Complex64::new(z.re, 0.0))
        .collect();
    FourierPath::new(gamma.n, Boundary::Lagrangian, gamma.order, coeffs)
}

/// Seeded random path with rank-power coefficient decay, used by the
/// randomized suites and the scenario family generators.
pub fn random_path(
    rng: &mut impl Rng,
    n: usize,
    boundary: Boundary,
    order: usize,
    amplitude: f64,
    decay: f64,
) -> FourierPath {
    let mut p = FourierPath::zero(n, boundary, order);
    for j in -(order as i64)..=(order as i64) {
        let scale = amplitude * (rank_of_mode(j) as f64).powf(-decay);
        let mut value = vec![Complex64::ZERO; n];
        for v in value.iter_mut() {
            let re = rng.gen_range(-1.0..1.0) * scale;
            let im = if boundary == Boundary::Periodic {
                rng.gen_range(-1.0..1.0) * scale
            } else {
                0.0
            };
            *v = Complex64::new(re, im);
        }
        p.set_mode(j, &value);
    }
    p
}

/// Seeded random path with exponential coefficient decay
/// amplitude * exp(-rate * (rank - 1)) — analytic-class data for spectral
/// accuracy tests, where truncation tails must sit near roundoff.
pub fn random_path_exp(
    rng: &mut impl Rng,
    n: usize,
    boundary: Boundary,
    order: usize,
    amplitude: f64,
    rate: f64,
) -> FourierPath {
    let mut p = FourierPath::zero(n, boundary, order);
    for j in -(order as i64)..=(order as i64) {
        let scale = amplitude * (-rate * (rank_of_mode(j) as f64 - 1.0)).exp();
        let mut value = vec![Complex64::ZERO; n];
        for v in value.iter_mut() {
            let re = rng.gen_range(-1.0..1.0) * scale;
            let im = if boundary == Boundary::Periodic {
                rng.gen_range(-1.0..1.0) * scale
            } else {
                0.0
            };
            *v = Complex64::new(re, im);
        }
        p.set_mode(j, &value);
    }
    p
}

// JSON shape: {"n":…, "boundary":…, "N":…, "coeffs": [[j, [re,im]×n], …]}.
#[derive(Serialize, Deserialize)]
struct FourierPathRepr {
    n: usize,
    boundary: Boundary,
    #[serde(rename = "N")]
    order: usize,
    coeffs: Vec<(i64, Vec<[f64; 2]>)>,
}

impl Serialize for FourierPath {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let coeffs = (-(self.order as i64)..=(self.order as i64))
            .map(|j| (j, self.mode(j).iter().map(|z| [z.re, z.im]).collect()))
            .collect();
        FourierPathRepr {
            n: self.n,
            boundary: self.boundary,
            order: self.order,
            coeffs,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FourierPath {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = FourierPathRepr::deserialize(d)?;
        let mut p = FourierPath::zero(repr.n, repr.boundary, repr.order);
        for (j, comps) in repr.coeffs {
            if j.unsigned_abs() as usize > repr.order || comps.len() != repr.n {
                return Err(serde::de::Error::custom("malformed coefficient entry"));
            }
            let value: Vec<Complex64> = comps
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect();
            p.set_mode(j, &value);
        }
        FourierPath::new(repr.n, repr.boundary, repr.order, p.coeffs)
            .map_err(serde::de::Error::custom)
    }
}
