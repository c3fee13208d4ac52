//! Unregularized vector fields of Floer and delay type.
//!
//! The fields act on periodic loops x : S^1 -> C^n as
//!
//! ```text
//! V(x)(t) = -J(x(t)) dx/dt(t) - X_t(x(t))                      (local)
//! V(x)(t) = -i dx/dt(t) - sum_j X^j_t(x(t - tau_j))            (delay)
//! ```
//!
//! with differential
//!
//! ```text
//! DV(x)(xh) = -DJ(x)(xh, dx/dt) - J(x) dxh/dt - DX_t(x)(xh) ,
//! ```
//!
//! the delay variant shifting both the base point and the direction.
//! The time derivative is always spectral; pointwise data is evaluated by
//! oversampled collocation.
//!
//! Conjugating DV by a frame intertwining i with J and subtracting the
//! fundamental operator leaves the remainder P(x), a bounded operator at
//! level zero.  [`conjugated_remainder`] evaluates it along two
//! independent routes: the explicit pointwise formula, and the literal
//! composition Phi DV Phi^{-1} - F.  Their agreement under grid
//! refinement is one of the toolkit's primary self-checks.
//!
//! Growth conditions: a field is anchored to the linear field gamma*p by
//! the bounds || dX_t/dt (p) || <= c, || X_t(p) - gamma p || <= c,
//! || DX_t(p) || <= c; [`check_growth_condition`] measures the three
//! suprema on a box.  For fields satisfying them the uniform constant of
//! the strengthened axioms has the closed form
//! [`c1_prime_closed_form`] = max{1, 2c, c + 2|gamma|} / min{1, |gamma|}.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::frames::{
    apply_real_matrix, frame_apply, frame_inverse_apply, i_matrix, operator_norm, real_dot,
    FrameGenerator,
};
use crate::loops::{oversampled_len, Boundary, CollocationGrid, FourierPath};

// ---------------------------------------------------------------------------
// almost complex structures
// ---------------------------------------------------------------------------

/// Pointwise almost complex structure J(p) with directional derivative.
/// Evaluators are pure; J(p)^2 = -id and omega_0-compatibility are checked
/// where frames are built from J.
pub trait AlmostComplex: Send + Sync {
    fn dim(&self) -> usize;
    fn j(&self, p: &[Complex64]) -> DMatrix<f64>;
    fn dj(&self, p: &[Complex64], h: &[Complex64]) -> DMatrix<f64>;
    fn is_identity(&self) -> bool {
        false
    }
}

/// The constant structure J = i.
#[derive(Debug, Clone)]
pub struct ConstantI {
    pub n: usize,
}

impl AlmostComplex for ConstantI {
    fn dim(&self) -> usize {
        self.n
    }
    fn j(&self, _p: &[Complex64]) -> DMatrix<f64> {
        i_matrix(self.n)
    }
    fn dj(&self, _p: &[Complex64], _h: &[Complex64]) -> DMatrix<f64> {
        DMatrix::zeros(2 * self.n, 2 * self.n)
    }
    fn is_identity(&self) -> bool {
        true
    }
}

/// J = S i S^{-1} for a fixed symplectic S (compatible since S preserves
/// the symplectic form).
#[derive(Debug, Clone)]
pub struct ConjugatedConstant {
    n: usize,
    mat: DMatrix<f64>,
}

impl ConjugatedConstant {
    pub fn new(s: DMatrix<f64>) -> Result<Self> {
        let n2 = s.nrows();
        if n2 % 2 != 0 || s.ncols() != n2 {
            return Err(Error::validation(
                "conjugating matrix must be square of even size",
            ));
        }
        let n = n2 / 2;
        let inv = s
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::singular("conjugating matrix is not invertible"))?;
        let mat = &s * i_matrix(n) * inv;
        Ok(ConjugatedConstant { n, mat })
    }
}

impl AlmostComplex for ConjugatedConstant {
    fn dim(&self) -> usize {
        self.n
    }
    fn j(&self, _p: &[Complex64]) -> DMatrix<f64> {
        self.mat.clone()
    }
    fn dj(&self, _p: &[Complex64], _h: &[Complex64]) -> DMatrix<f64> {
        DMatrix::zeros(2 * self.n, 2 * self.n)
    }
}

/// Nonconstant compatible structure on the first complex coordinate:
/// J(p) = S(p) i S(p)^{-1} with the symplectic shear S(p) = [[1, a(p)], [0, 1]],
/// a(p) = alpha exp(-|p|^2).  Closed forms:
/// J = [[a, -(1+a^2)], [1, -a]] and dJ/da = [[1, -2a], [0, -1]] on the block.
#[derive(Debug, Clone)]
pub struct ShearBump {
    pub n: usize,
    pub alpha: f64,
}

impl ShearBump {
    fn a(&self, p: &[Complex64]) -> f64 {
        self.alpha * (-real_dot(p, p)).exp()
    }

    fn da(&self, p: &[Complex64], h: &[Complex64]) -> f64 {
        -2.0 * self.a(p) * real_dot(p, h)
    }
}

impl AlmostComplex for ShearBump {
    fn dim(&self) -> usize {
        self.n
    }
    fn j(&self, p: &[Complex64]) -> DMatrix<f64> {
        let a = self.a(p);
        let mut m = i_matrix(self.n);
        m[(0, 0)] = a;
        m[(0, 1)] = -(1.0 + a * a);
        m[(1, 0)] = 1.0;
        m[(1, 1)] = -a;
        m
    }
    fn dj(&self, p: &[Complex64], h: &[Complex64]) -> DMatrix<f64> {
        let a = self.a(p);
        let da = self.da(p, h);
        let mut m = DMatrix::zeros(2 * self.n, 2 * self.n);
        m[(0, 0)] = da;
        m[(0, 1)] = -2.0 * a * da;
        m[(1, 1)] = -da;
        m
    }
}

// ---------------------------------------------------------------------------
// Hamiltonians and pointwise fields
// ---------------------------------------------------------------------------

/// Declared growth data anchoring a field to gamma * p.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Growth {
    pub gamma: f64,
    pub c: f64,
}

/// Smooth time-periodic Hamiltonian with gradient, Hessian and mixed
/// derivative evaluators (gradients with respect to the standard metric).
pub trait Hamiltonian: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, t: f64, p: &[Complex64]) -> f64;
    fn grad(&self, t: f64, p: &[Complex64]) -> Vec<Complex64>;
    fn hess(&self, t: f64, p: &[Complex64]) -> DMatrix<f64>;
    fn dt_grad(&self, t: f64, p: &[Complex64]) -> Vec<Complex64>;
    fn growth(&self) -> Growth;
}

/// Compactly supported smooth bump placed on the quadratic background.
#[derive(Debug, Clone, Serialize)]
pub struct Bump {
    pub amplitude: f64,
    pub center: Vec<[f64; 2]>,
    pub radius: f64,
    pub time_modulated: bool,
}

impl Bump {
    fn center_c(&self) -> Vec<Complex64> {
        self.center
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect()
    }

    /// phi(u) = exp(-1/(1-u)) on u < 1, zero beyond; phi' = -phi/(1-u)^2,
    /// phi'' = phi [ (1-u)^-4 - 2 (1-u)^-3 ].
    fn profile(&self, u: f64) -> (f64, f64, f64) {
        if u >= 1.0 - 1e-12 {
            return (0.0, 0.0, 0.0);
        }
        let g = 1.0 / (1.0 - u);
        let phi = (-g).exp();
        let d1 = -phi * g * g;
        let d2 = phi * (g * g * g * g - 2.0 * g * g * g);
        (phi, d1, d2)
    }

    fn tau(&self, t: f64) -> (f64, f64) {
        if self.time_modulated {
            let w = 2.0 * std::f64::consts::PI;
            (1.0 + 0.5 * (w * t).sin(), 0.5 * w * (w * t).cos())
        } else {
            (1.0, 0.0)
        }
    }

    fn value(&self, t: f64, p: &[Complex64]) -> f64 {
        let q: Vec<Complex64> = p.iter().zip(self.center_c()).map(|(a, b)| a - b).collect();
        let u = real_dot(&q, &q) / (self.radius * self.radius);
        self.amplitude * self.tau(t).0 * self.profile(u).0
    }

    fn grad(&self, t: f64, p: &[Complex64]) -> Vec<Complex64> {
        let q: Vec<Complex64> = p.iter().zip(self.center_c()).map(|(a, b)| a - b).collect();
        let r2 = self.radius * self.radius;
        let u = real_dot(&q, &q) / r2;
        let (_, d1, _) = self.profile(u);
        let scale = self.amplitude * self.tau(t).0 * d1 * 2.0 / r2;
        q.into_iter().map(|z| scale * z).collect()
    }

    fn hess(&self, t: f64, p: &[Complex64]) -> DMatrix<f64> {
        let n = p.len();
        let q: Vec<Complex64> = p.iter().zip(self.center_c()).map(|(a, b)| a - b).collect();
        let r2 = self.radius * self.radius;
        let u = real_dot(&q, &q) / r2;
        let (_, d1, d2) = self.profile(u);
        let amp = self.amplitude * self.tau(t).0;
        // real coordinates of q
        let mut qr = Vec::with_capacity(2 * n);
        for z in &q {
            qr.push(z.re);
            qr.push(z.im);
        }
        let mut h = DMatrix::zeros(2 * n, 2 * n);
        for r in 0..2 * n {
            for c in 0..2 * n {
                let mut v = amp * d2 * (4.0 / (r2 * r2)) * qr[r] * qr[c];
                if r == c {
                    v += amp * d1 * 2.0 / r2;
                }
                h[(r, c)] = v;
            }
        }
        h
    }

    fn dt_grad(&self, t: f64, p: &[Complex64]) -> Vec<Complex64> {
        let q: Vec<Complex64> = p.iter().zip(self.center_c()).map(|(a, b)| a - b).collect();
        let r2 = self.radius * self.radius;
        let u = real_dot(&q, &q) / r2;
        let (_, d1, _) = self.profile(u);
        let scale = self.amplitude * self.tau(t).1 * d1 * 2.0 / r2;
        q.into_iter().map(|z| scale * z).collect()
    }
}

/// H_t(p) = (gamma/2)|p|^2 + sum of compactly supported bumps.  Satisfies
/// the growth condition with c = |gamma| plus the bump contributions.
#[derive(Debug, Clone)]
pub struct QuadraticHamiltonian {
    pub n: usize,
    pub gamma: f64,
    pub bumps: Vec<Bump>,
    pub declared_c: f64,
}

impl QuadraticHamiltonian {
    pub fn plain(n: usize, gamma: f64) -> Self {
        QuadraticHamiltonian {
            n,
            gamma,
            bumps: Vec::new(),
            declared_c: gamma.abs(),
        }
    }
}

impl Hamiltonian for QuadraticHamiltonian {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, t: f64, p: &[Complex64]) -> f64 {
        0.5 * self.gamma * real_dot(p, p) + self.bumps.iter().map(|b| b.value(t, p)).sum::<f64>()
    }
    fn grad(&self, t: f64, p: &[Complex64]) -> Vec<Complex64> {
        let mut g: Vec<Complex64> = p.iter().map(|z| self.gamma * z).collect();
        for b in &self.bumps {
            for (gi, bi) in g.iter_mut().zip(b.grad(t, p)) {
                *gi += bi;
            }
        }
        g
    }
    fn hess(&self, t: f64, p: &[Complex64]) -> DMatrix<f64> {
        let mut h = DMatrix::identity(2 * self.n, 2 * self.n) * self.gamma;
        for b in &self.bumps {
            h += b.hess(t, p);
        }
        h
    }
    fn dt_grad(&self, t: f64, p: &[Complex64]) -> Vec<Complex64> {
        let mut g = vec![Complex64::ZERO; self.n];
        for b in &self.bumps {
            for (gi, bi) in g.iter_mut().zip(b.dt_grad(t, p)) {
                *gi += bi;
            }
        }
        g
    }
    fn growth(&self) -> Growth {
        Growth {
            gamma: self.gamma,
            c: self.declared_c,
        }
    }
}

/// H = scale * |p|^4 — quartic growth, the negative control for the growth
/// condition (its Hessian is unbounded).
#[derive(Debug, Clone)]
pub struct QuarticHamiltonian {
    pub n: usize,
    pub scale: f64,
    pub declared: Growth,
}

impl Hamiltonian for QuarticHamiltonian {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, _t: f64, p: &[Complex64]) -> f64 {
        let u = real_dot(p, p);
        self.scale * u * u
    }
    fn grad(&self, _t: f64, p: &[Complex64]) -> Vec<Complex64> {
        let u = real_dot(p, p);
        p.iter().map(|z| 4.0 * self.scale * u * z).collect()
    }
    fn hess(&self, _t: f64, p: &[Complex64]) -> DMatrix<f64> {
        let n = p.len();
        let u = real_dot(p, p);
        let mut pr = Vec::with_capacity(2 * n);
        for z in p {
            pr.push(z.re);
            pr.push(z.im);
        }
        let mut h = DMatrix::identity(2 * n, 2 * n) * (4.0 * self.scale * u);
        for r in 0..2 * n {
            for c in 0..2 * n {
                h[(r, c)] += 8.0 * self.scale * pr[r] * pr[c];
            }
        }
        h
    }
    fn dt_grad(&self, _t: f64, p: &[Complex64]) -> Vec<Complex64> {
        vec![Complex64::ZERO; p.len()]
    }
    fn growth(&self) -> Growth {
        self.declared
    }
}

/// Pointwise vector field X_t(p) with derivative data.
pub trait PointField: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64, p: &[Complex64]) -> Vec<Complex64>;
    /// DX_t(p)(h).
    fn diff(&self, t: f64, p: &[Complex64], h: &[Complex64]) -> Vec<Complex64>;
    /// d/dt X_t(p).
    fn dt(&self, t: f64, p: &[Complex64]) -> Vec<Complex64>;
    fn growth(&self) -> Growth;
}

/// The gradient of a Hamiltonian as a pointwise field.
#[derive(Clone)]
pub struct GradField(pub Arc<dyn Hamiltonian>);

impl PointField for GradField {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn eval(&self, t: f64, p: &[Complex64]) -> Vec<Complex64> {
        self.0.grad(t, p)
    }
    fn diff(&self, t: f64, p: &[Complex64], h: &[Complex64]) -> Vec<Complex64> {
        apply_real_matrix(&self.0.hess(t, p), h)
    }
    fn dt(&self, t: f64, p: &[Complex64]) -> Vec<Complex64> {
        self.0.dt_grad(t, p)
    }
    fn growth(&self) -> Growth {
        self.0.growth()
    }
}

/// X(p) = gamma p.
#[derive(Debug, Clone)]
pub struct LinearField {
    pub n: usize,
    pub gamma: f64,
}

impl PointField for LinearField {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, _t: f64, p: &[Complex64]) -> Vec<Complex64> {
        p.iter().map(|z| self.gamma * z).collect()
    }
    fn diff(&self, _t: f64, _p: &[Complex64], h: &[Complex64]) -> Vec<Complex64> {
        h.iter().map(|z| self.gamma * z).collect()
    }
    fn dt(&self, _t: f64, p: &[Complex64]) -> Vec<Complex64> {
        vec![Complex64::ZERO; p.len()]
    }
    fn growth(&self) -> Growth {
        Growth {
            gamma: self.gamma,
            c: self.gamma.abs(),
        }
    }
}

// ---------------------------------------------------------------------------
// field specifications
// ---------------------------------------------------------------------------

/// One delayed term X^j_t(x(t - tau_j)).
#[derive(Clone)]
pub struct DelayTerm {
    pub tau: f64,
    pub field: Arc<dyn PointField>,
}

/// An unregularized vector field specification.
#[derive(Clone)]
pub enum FieldSpec {
    /// V(x) = -J(x) dx/dt - grad H_t(x).
    Floer {
        j: Arc<dyn AlmostComplex>,
        ham: Arc<dyn Hamiltonian>,
    },
    /// V(x) = -J(x) dx/dt - X_t(x).
    GeneralX {
        j: Arc<dyn AlmostComplex>,
        x: Arc<dyn PointField>,
    },
    /// V(x) = -i dx/dt - sum_j X^j_t(x(t - tau_j)); trivial frame.
    Delay { terms: Vec<DelayTerm> },
}

impl FieldSpec {
    pub fn floer(j: Arc<dyn AlmostComplex>, ham: Arc<dyn Hamiltonian>) -> Result<Self> {
        if j.dim() != ham.dim() {
            return Err(Error::config("J and H dimensions differ"));
        }
        Ok(FieldSpec::Floer { j, ham })
    }

    pub fn general(j: Arc<dyn AlmostComplex>, x: Arc<dyn PointField>) -> Result<Self> {
        if j.dim() != x.dim() {
            return Err(Error::config("J and X dimensions differ"));
        }
        Ok(FieldSpec::GeneralX { j, x })
    }

    pub fn delay(terms: Vec<DelayTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::config("delay field needs at least one term"));
        }
        let n = terms[0].field.dim();
        let mut prev = -1.0;
        for term in &terms {
            if term.field.dim() != n {
                return Err(Error::config("delay terms have mixed dimensions"));
            }
            if !(term.tau >= 0.0 && term.tau < 1.0) {
                return Err(Error::config("delay times must satisfy 0 <= tau < 1"));
            }
            if term.tau <= prev {
                return Err(Error::config("delay times must be strictly increasing"));
            }
            prev = term.tau;
        }
        Ok(FieldSpec::Delay { terms })
    }

    pub fn dim(&self) -> usize {
        match self {
            FieldSpec::Floer { ham, .. } => ham.dim(),
            FieldSpec::GeneralX { x, .. } => x.dim(),
            FieldSpec::Delay { terms } => terms[0].field.dim(),
        }
    }

    /// Elementary means the trivial frame works: J = i (delay fields always).
    pub fn is_elementary(&self) -> bool {
        match self {
            FieldSpec::Floer { j, .. } | FieldSpec::GeneralX { j, .. } => j.is_identity(),
            FieldSpec::Delay { .. } => true,
        }
    }

    /// The pointwise fields with their delays (tau = 0 for local fields).
    pub fn terms(&self) -> Vec<(f64, Arc<dyn PointField>)> {
        match self {
            FieldSpec::Floer { ham, .. } => vec![(0.0, Arc::new(GradField(ham.clone())) as _)],
            FieldSpec::GeneralX { x, .. } => vec![(0.0, x.clone())],
            FieldSpec::Delay { terms } => terms.iter().map(|t| (t.tau, t.field.clone())).collect(),
        }
    }

    fn j(&self) -> Arc<dyn AlmostComplex> {
        match self {
            FieldSpec::Floer { j, .. } | FieldSpec::GeneralX { j, .. } => j.clone(),
            FieldSpec::Delay { terms } => Arc::new(ConstantI {
                n: terms[0].field.dim(),
            }),
        }
    }

    /// Total linear rate: the diagonal part of the field on mode j is
    /// deriv_rate(j) - sum_k gamma_k e^{-2 pi i j tau_k}.
    pub fn linear_multiplier(&self, j: i64) -> Complex64 {
        let rate = Boundary::Periodic.deriv_rate(j);
        let mut m = Complex64::new(rate, 0.0);
        for (tau, field) in self.terms() {
            m -= field.growth().gamma
                * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * j as f64 * tau);
        }
        m
    }
}

fn require_loop(x: &FourierPath, what: &str) -> Result<()> {
    if x.boundary() != Boundary::Periodic {
        return Err(Error::unsupported(format!(
            "{what} acts on periodic loops; boundary paths enter via reflection"
        )));
    }
    Ok(())
}

/// V(x), truncated to the order of x.
pub fn vf_eval(spec: &FieldSpec, x: &FourierPath) -> Result<FourierPath> {
    require_loop(x, "vector field evaluation")?;
    if x.dim() != spec.dim() {
        return Err(Error::precondition("field and path dimensions differ"));
    }
    let order = x.order();
    let m = oversampled_len(order);
    let n = x.dim();
    let dx = x.time_derivative()?;
    let j = spec.j();

    // -J(x) dx/dt: exact spectrally when J = i, collocation otherwise
    let mut result = if j.is_identity() {
        dx.map_modes(|_| Complex64::new(0.0, -1.0))
    } else {
        let gx = x.synthesize(m)?;
        let gdx = dx.synthesize(m)?;
        let mut samples = vec![Complex64::ZERO; m * n];
        for s in 0..m {
            let out = apply_real_matrix(&j.j(gx.sample(s)), gdx.sample(s));
            for c in 0..n {
                samples[s * n + c] = -out[c];
            }
        }
        CollocationGrid::from_samples(n, Boundary::Periodic, samples)?.analyze(order)?
    };

    // -sum X^k_t(x(t - tau_k))
    for (tau, field) in spec.terms() {
        let shifted = if tau == 0.0 {
            x.clone()
        } else {
            x.time_shift(tau)?
        };
        let g = shifted.synthesize(m)?;
        let mut samples = vec![Complex64::ZERO; m * n];
        for s in 0..m {
            let t = g.param(s);
            let val = field.eval(t, g.sample(s));
            for c in 0..n {
                samples[s * n + c] = -val[c];
            }
        }
        let term = CollocationGrid::from_samples(n, Boundary::Periodic, samples)?.analyze(order)?;
        result = FourierPath::lincomb(&[(1.0, &result), (1.0, &term)])?;
    }
    Ok(result)
}

/// DV(x)(xh), truncated to the order of x.
pub fn vf_diff(spec: &FieldSpec, x: &FourierPath, xh: &FourierPath) -> Result<FourierPath> {
    require_loop(x, "vector field differential")?;
    require_loop(xh, "vector field differential")?;
    if x.dim() != spec.dim() || xh.dim() != spec.dim() {
        return Err(Error::precondition("field and path dimensions differ"));
    }
    let order = x.order().max(xh.order());
    let m = oversampled_len(order);
    let n = x.dim();
    let x = x.with_order(order);
    let xh = xh.with_order(order);
    let dx = x.time_derivative()?;
    let dxh = xh.time_derivative()?;
    let j = spec.j();

    // -J(x) dxh/dt - DJ(x)(xh, dx/dt)
    let mut result = if j.is_identity() {
        dxh.map_modes(|_| Complex64::new(0.0, -1.0))
    } else {
        let gx = x.synthesize(m)?;
        let gdx = dx.synthesize(m)?;
        let gxh = xh.synthesize(m)?;
        let gdxh = dxh.synthesize(m)?;
        let mut samples = vec![Complex64::ZERO; m * n];
        for s in 0..m {
            let p = gx.sample(s);
            let a = apply_real_matrix(&j.j(p), gdxh.sample(s));
            let b = apply_real_matrix(&j.dj(p, gxh.sample(s)), gdx.sample(s));
            for c in 0..n {
                samples[s * n + c] = -a[c] - b[c];
            }
        }
        CollocationGrid::from_samples(n, Boundary::Periodic, samples)?.analyze(order)?
    };

    // -sum DX^k_t(x(t - tau_k))(xh(t - tau_k))
    for (tau, field) in spec.terms() {
        let (xs, xhs) = if tau == 0.0 {
            (x.clone(), xh.clone())
        } else {
            (x.time_shift(tau)?, xh.time_shift(tau)?)
        };
        let g = xs.synthesize(m)?;
        let gh = xhs.synthesize(m)?;
        let mut samples = vec![Complex64::ZERO; m * n];
        for s in 0..m {
            let t = g.param(s);
            let val = field.diff(t, g.sample(s), gh.sample(s));
            for c in 0..n {
                samples[s * n + c] = -val[c];
            }
        }
        let term = CollocationGrid::from_samples(n, Boundary::Periodic, samples)?.analyze(order)?;
        result = FourierPath::lincomb(&[(1.0, &result), (1.0, &term)])?;
    }
    Ok(result)
}

/// Which of the two evaluation routes of the conjugated remainder to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemainderRoute {
    /// The explicit pointwise formula.
    Explicit,
    /// Phi(x) DV(x) Phi(x)^{-1} xh - F xh, composed literally.
    Conjugation,
}

/// P(x) xh, the frame-conjugated differential minus the fundamental
/// operator.  The explicit route evaluates
///
/// ```text
/// - Psi(x) DJ(x)(Psi(x)^{-1} xh, dx/dt)
/// + i DPsi(x)(dx/dt, Psi(x)^{-1} xh)
/// - 1/2 xh
/// - Psi(x) DX_t(x) Psi(x)^{-1} xh
/// ```
///
/// per collocation point (trivial-frame fields drop the Psi conjugation and
/// the DPsi term; delay fields shift base point and direction).
pub fn conjugated_remainder(
    spec: &FieldSpec,
    psi: &dyn FrameGenerator,
    x: &FourierPath,
    xh: &FourierPath,
    route: RemainderRoute,
) -> Result<FourierPath> {
    require_loop(x, "conjugated remainder")?;
    require_loop(xh, "conjugated remainder")?;
    match route {
        RemainderRoute::Conjugation => {
            let u = frame_inverse_apply(psi, x, xh)?;
            let dv = vf_diff(spec, x, &u)?;
            let conj = frame_apply(psi, x, &dv)?;
            FourierPath::lincomb(&[
                (1.0, &conj),
                (-1.0, &xh.with_order(conj.order()).floer_fundamental()),
            ])
        }
        RemainderRoute::Explicit => {
            if matches!(spec, FieldSpec::Delay { .. }) && !psi.is_identity() {
                return Err(Error::unsupported(
                    "delay fields are elementary; use the trivial frame",
                ));
            }
            let order = x.order().max(xh.order());
            let m = oversampled_len(order);
            let n = x.dim();
            let x_o = x.with_order(order);
            let xh_o = xh.with_order(order);
            let dx = x_o.time_derivative()?;
            let j = spec.j();

            let gx = x_o.synthesize(m)?;
            let gdx = dx.synthesize(m)?;
            let gxh = xh_o.synthesize(m)?;
            let imat = i_matrix(n);

            // local terms (all but the delayed field term)
            let mut samples = vec![Complex64::ZERO; m * n];
            for s in 0..m {
                let p = gx.sample(s);
                let xh_s = gxh.sample(s);
                let dx_s = gdx.sample(s);
                let (psi_m, psi_inv_m) = if psi.is_identity() {
                    (None, None)
                } else {
                    (Some(psi.psi(p)?), Some(psi.psi_inv(p)?))
                };
                let u = match &psi_inv_m {
                    Some(inv) => apply_real_matrix(inv, xh_s),
                    None => xh_s.to_vec(),
                };
                let mut acc = vec![Complex64::ZERO; n];
                // - Psi DJ(x)(u, dx)
                let dj_u = apply_real_matrix(&j.dj(p, &u), dx_s);
                let t1 = match &psi_m {
                    Some(mat) => apply_real_matrix(mat, &dj_u),
                    None => dj_u,
                };
                // + i DPsi(x)(dx, u)
                let t2 = match &psi_m {
                    Some(_) => {
                        let dpsi_u = apply_real_matrix(&psi.d_psi(p, dx_s)?, &u);
                        apply_real_matrix(&imat, &dpsi_u)
                    }
                    None => vec![Complex64::ZERO; n],
                };
                for c in 0..n {
                    acc[c] = -t1[c] + t2[c] - 0.5 * xh_s[c];
                }
                samples[s * n..(s + 1) * n].copy_from_slice(&acc);
            }
            let mut result =
                CollocationGrid::from_samples(n, Boundary::Periodic, samples)?.analyze(order)?;

            // - Psi DX^k_t(x(t-tau)) Psi^{-1} xh (t-tau)
            for (tau, field) in spec.terms() {
                let (xs, xhs) = if tau == 0.0 {
                    (x_o.clone(), xh_o.clone())
                } else {
                    (x_o.time_shift(tau)?, xh_o.time_shift(tau)?)
                };
                let g = xs.synthesize(m)?;
                let gh = xhs.synthesize(m)?;
                let g_here = x_o.synthesize(m)?;
                let mut samples = vec![Complex64::ZERO; m * n];
                for s in 0..m {
                    let t = g.param(s);
                    let u = if psi.is_identity() {
                        gh.sample(s).to_vec()
                    } else {
                        apply_real_matrix(&psi.psi_inv(g.sample(s))?, gh.sample(s))
                    };
                    let dx_u = field.diff(t, g.sample(s), &u);
                    let out = if psi.is_identity() {
                        dx_u
                    } else {
                        apply_real_matrix(&psi.psi(g_here.sample(s))?, &dx_u)
                    };
                    for c in 0..n {
                        samples[s * n + c] = -out[c];
                    }
                }
                let term = CollocationGrid::from_samples(n, Boundary::Periodic, samples)?
                    .analyze(order)?;
                result = FourierPath::lincomb(&[(1.0, &result), (1.0, &term)])?;
            }
            Ok(result)
        }
    }
}

// ---------------------------------------------------------------------------
// growth conditions
// ---------------------------------------------------------------------------

/// Maxima of one constituent field's three growth quantities over the box.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthTerm {
    pub gamma: f64,
    pub max_time_derivative: f64,
    pub max_anchor_deviation: f64,
    pub max_differential_norm: f64,
}

impl GrowthTerm {
    pub fn measured_c(&self) -> f64 {
        self.max_time_derivative
            .max(self.max_anchor_deviation)
            .max(self.max_differential_norm)
    }
}

/// Report of [`check_growth_condition`]: per-term maxima, the combined
/// anchor rate and constant (sums over delayed terms are valid because the
/// time shift is a norm isometry), and the verdict against the declared c.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub terms: Vec<GrowthTerm>,
    pub gamma: f64,
    pub measured_c: f64,
    pub declared_c: f64,
    pub pass: bool,
}

/// Sample the three growth quantities of every constituent field on the box
/// [-radius, radius]^{2n} x S^1 and compare against the declared constant.
pub fn check_growth_condition(
    spec: &FieldSpec,
    radius: f64,
    samples: usize,
    seed: u64,
) -> GrowthReport {
    let n = spec.dim();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::new();
    let mut declared_c = 0.0;
    for (_, field) in spec.terms() {
        let growth = field.growth();
        declared_c += growth.c;
        let mut term = GrowthTerm {
            gamma: growth.gamma,
            max_time_derivative: 0.0,
            max_anchor_deviation: 0.0,
            max_differential_norm: 0.0,
        };
        for k in 0..samples {
            let t = k as f64 / samples as f64;
            let p: Vec<Complex64> = (0..n)
                .map(|_| {
                    Complex64::new(
                        rng.gen_range(-radius..radius),
                        rng.gen_range(-radius..radius),
                    )
                })
                .collect();
            let dt = field.dt(t, &p);
            term.max_time_derivative = term
                .max_time_derivative
                .max(dt.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
            let dev: f64 = field
                .eval(t, &p)
                .iter()
                .zip(&p)
                .map(|(x, pp)| (x - growth.gamma * pp).norm_sqr())
                .sum::<f64>()
                .sqrt();
            term.max_anchor_deviation = term.max_anchor_deviation.max(dev);
            // assemble DX as a matrix from basis directions
            let mut mat = DMatrix::zeros(2 * n, 2 * n);
            for col in 0..2 * n {
                let mut h = vec![Complex64::ZERO; n];
                if col % 2 == 0 {
                    h[col / 2].re = 1.0;
                } else {
                    h[col / 2].im = 1.0;
                }
                let out = field.diff(t, &p, &h);
                for row in 0..2 * n {
                    mat[(row, col)] = if row % 2 == 0 {
                        out[row / 2].re
                    } else {
                        out[row / 2].im
                    };
                }
            }
            term.max_differential_norm = term.max_differential_norm.max(operator_norm(&mat));
        }
        terms.push(term);
    }
    let gamma = terms.iter().map(|t| t.gamma).sum();
    let measured_c = terms.iter().map(|t| t.measured_c()).sum();
    GrowthReport {
        terms,
        gamma,
        measured_c,
        declared_c,
        pass: measured_c <= declared_c + 1e-12,
    }
}

/// The uniform constant max{1, 2c, c + 2|gamma|} / min{1, |gamma|} of the
/// strengthened axioms for fields anchored to gamma p with constant c.
pub fn c1_prime_closed_form(gamma: f64, c: f64) -> f64 {
    1f64.max(2.0 * c).max(c + 2.0 * gamma.abs()) / 1f64.min(gamma.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{ScalarRotationFrame, TrivialFrame};
    use crate::loops::{random_path, random_path_exp};
    use crate::numerics::log_log_slope;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn unit(n: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::ZERO; n];
        v[0] = Complex64::new(1.0, 0.0);
        v
    }

    fn linear_floer(n: usize, gamma: f64) -> FieldSpec {
        FieldSpec::floer(
            Arc::new(ConstantI { n }),
            Arc::new(QuadraticHamiltonian::plain(n, gamma)),
        )
        .unwrap()
    }

    #[test]
    fn vf_eval_single_mode_multiplier() {
        // V(e^{2 pi t i} v) = (2 pi - gamma) e^{2 pi t i} v, zero at gamma = 2 pi
        for gamma in [1.0, 2.0 * PI] {
            let spec = linear_floer(1, gamma);
            let x = FourierPath::single_mode(1, Boundary::Periodic, 3, 1, &unit(1)).unwrap();
            let v = vf_eval(&spec, &x).unwrap();
            assert_relative_eq!(v.mode(1)[0].re, 2.0 * PI - gamma, epsilon = 1e-12);
            for j in [-3i64, -2, -1, 0, 2, 3] {
                assert!(v.mode(j)[0].norm() < 1e-12);
            }
        }
    }

    #[test]
    fn vf_eval_constant_critical_point() {
        // constant loop at a critical point of H: V = 0 (gradient vanishes)
        let spec = linear_floer(2, 1.5);
        let x = FourierPath::zero(2, Boundary::Periodic, 4);
        assert!(vf_eval(&spec, &x).unwrap().sobolev_norm(0) < 1e-14);
    }

    #[test]
    fn vf_eval_delay_multiplier() {
        // X(p) = gamma p with delay tau on a single mode j:
        // multiplier 2 pi j - gamma e^{-2 pi i j tau}
        let gamma = 0.7;
        let tau = 0.3;
        let spec = FieldSpec::delay(vec![DelayTerm {
            tau,
            field: Arc::new(LinearField { n: 1, gamma }),
        }])
        .unwrap();
        for j in [-2i64, 0, 1, 2] {
            let x = FourierPath::single_mode(1, Boundary::Periodic, 3, j, &unit(1)).unwrap();
            let v = vf_eval(&spec, &x).unwrap();
            let expected = Complex64::new(2.0 * PI * j as f64, 0.0)
                - gamma * Complex64::from_polar(1.0, -2.0 * PI * j as f64 * tau);
            assert!((v.mode(j)[0] - expected).norm() < 1e-12);
            assert!((spec.linear_multiplier(j) - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn vf_eval_delay_zero_tau_matches_general() {
        let gamma = 1.2;
        let delay = FieldSpec::delay(vec![DelayTerm {
            tau: 0.0,
            field: Arc::new(LinearField { n: 1, gamma }),
        }])
        .unwrap();
        let general = FieldSpec::general(
            Arc::new(ConstantI { n: 1 }),
            Arc::new(LinearField { n: 1, gamma }),
        )
        .unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let x = random_path(&mut rng, 1, Boundary::Periodic, 5, 1.0, 0.5);
        let a = vf_eval(&delay, &x).unwrap();
        let b = vf_eval(&general, &x).unwrap();
        let err = FourierPath::lincomb(&[(1.0, &a), (-1.0, &b)])
            .unwrap()
            .sobolev_norm(0);
        assert!(err <= 1e-12);
    }

    #[test]
    fn vf_diff_linear_field_is_field_translate() {
        // linear field: DV(x) xh = -i dxh/dt - gamma xh independent of x
        let spec = linear_floer(1, 0.9);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let x = random_path(&mut rng, 1, Boundary::Periodic, 4, 1.0, 0.5);
        let xh = random_path(&mut rng, 1, Boundary::Periodic, 4, 1.0, 0.5);
        let dv = vf_diff(&spec, &x, &xh).unwrap();
        let expected = xh.map_modes(|j| Complex64::new(2.0 * PI * j as f64 - 0.9, 0.0));
        let err = FourierPath::lincomb(&[(1.0, &dv), (-1.0, &expected)])
            .unwrap()
            .sobolev_norm(0);
        assert!(err <= 1e-11, "dv mismatch {err}");
    }

    #[test]
    fn vf_diff_finite_difference_order() {
        // nonlinear field via a bump: || V(x+eps xh) - V(x) - eps DV(x) xh || = O(eps^2)
        let ham = QuadraticHamiltonian {
            n: 1,
            gamma: 1.0,
            bumps: vec![Bump {
                amplitude: 0.5,
                center: vec![[0.2, -0.1]],
                radius: 2.0,
                time_modulated: true,
            }],
            declared_c: 10.0,
        };
        let spec = FieldSpec::floer(Arc::new(ConstantI { n: 1 }), Arc::new(ham)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let x = random_path(&mut rng, 1, Boundary::Periodic, 6, 0.4, 1.0);
        let xh = random_path(&mut rng, 1, Boundary::Periodic, 6, 1.0, 1.0);
        let vx = vf_eval(&spec, &x).unwrap();
        let dv = vf_diff(&spec, &x, &xh).unwrap();
        let mut points = Vec::new();
        for eps in [1e-2, 1e-3, 1e-4, 1e-5] {
            let xp = FourierPath::lincomb(&[(1.0, &x), (eps, &xh)]).unwrap();
            let vp = vf_eval(&spec, &xp).unwrap();
            let defect = FourierPath::lincomb(&[(1.0, &vp), (-1.0, &vx), (-eps, &dv)])
                .unwrap()
                .sobolev_norm(0);
            points.push((eps, defect));
        }
        let slope = log_log_slope(&points);
        assert!(slope >= 1.9, "observed order {slope}; points {points:?}");
    }

    #[test]
    fn dj_term_isolated_by_constant_paths() {
        // constant x and xh kill both time-derivative terms; with a
        // nonconstant J only -DX survives, matching the pointwise formula
        let gamma = 0.9;
        let spec = FieldSpec::general(
            Arc::new(ShearBump { n: 1, alpha: 0.5 }),
            Arc::new(LinearField { n: 1, gamma }),
        )
        .unwrap();
        let x = FourierPath::single_mode(1, Boundary::Periodic, 3, 0, &[Complex64::new(0.4, -0.2)])
            .unwrap();
        let xh =
            FourierPath::single_mode(1, Boundary::Periodic, 3, 0, &[Complex64::new(-1.0, 0.7)])
                .unwrap();
        let dv = vf_diff(&spec, &x, &xh).unwrap();
        let expected = FourierPath::lincomb(&[(-gamma, &xh)]).unwrap();
        let gap = FourierPath::lincomb(&[(1.0, &dv), (-1.0, &expected)])
            .unwrap()
            .sobolev_norm(0);
        assert!(gap <= 1e-12, "DJ isolation gap {gap}");
    }

    #[test]
    fn elementary_remainder_closed_form() {
        // P(x) xh = -(1/2 + gamma) xh for the linear field
        let gamma = 1.3;
        let spec = linear_floer(1, gamma);
        let frame = TrivialFrame { n: 1 };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let x = random_path(&mut rng, 1, Boundary::Periodic, 4, 1.0, 0.5);
        let xh = random_path(&mut rng, 1, Boundary::Periodic, 4, 1.0, 0.5);
        for route in [RemainderRoute::Explicit, RemainderRoute::Conjugation] {
            let p = conjugated_remainder(&spec, &frame, &x, &xh, route).unwrap();
            let expected = FourierPath::lincomb(&[(-(0.5 + gamma), &xh)]).unwrap();
            let err = FourierPath::lincomb(&[(1.0, &p), (-1.0, &expected)])
                .unwrap()
                .sobolev_norm(0);
            assert!(err <= 1e-11, "{route:?} deviates by {err}");
        }
    }

    #[test]
    fn remainder_zero_direction() {
        let spec = linear_floer(1, 1.0);
        let frame = TrivialFrame { n: 1 };
        let x = FourierPath::zero(1, Boundary::Periodic, 3);
        let z = FourierPath::zero(1, Boundary::Periodic, 3);
        let p = conjugated_remainder(&spec, &frame, &x, &z, RemainderRoute::Explicit).unwrap();
        assert_eq!(p.sobolev_norm(0), 0.0);
    }

    #[test]
    fn trivial_frame_conjugation_route_is_dv_minus_fundamental() {
        let ham = QuadraticHamiltonian {
            n: 1,
            gamma: 1.0,
            bumps: vec![Bump {
                amplitude: 0.3,
                center: vec![[0.0, 0.0]],
                radius: 1.5,
                time_modulated: false,
            }],
            declared_c: 10.0,
        };
        let spec = FieldSpec::floer(Arc::new(ConstantI { n: 1 }), Arc::new(ham)).unwrap();
        let frame = TrivialFrame { n: 1 };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let x = random_path(&mut rng, 1, Boundary::Periodic, 5, 0.5, 1.0);
        let xh = random_path(&mut rng, 1, Boundary::Periodic, 5, 1.0, 1.0);
        let route_b =
            conjugated_remainder(&spec, &frame, &x, &xh, RemainderRoute::Conjugation).unwrap();
        let direct = FourierPath::lincomb(&[
            (1.0, &vf_diff(&spec, &x, &xh).unwrap()),
            (-1.0, &xh.floer_fundamental()),
        ])
        .unwrap();
        let err = FourierPath::lincomb(&[(1.0, &route_b), (-1.0, &direct)])
            .unwrap()
            .sobolev_norm(0);
        assert!(err <= 1e-12);
    }

    #[test]
    fn remainder_routes_agree_with_rotation_frame() {
        let ham = QuadraticHamiltonian::plain(1, 1.0);
        let spec = FieldSpec::floer(Arc::new(ConstantI { n: 1 }), Arc::new(ham)).unwrap();
        let frame = ScalarRotationFrame {
            n: 1,
            strength: 1.0,
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let x = random_path_exp(&mut rng, 1, Boundary::Periodic, 16, 0.5, 1.0);
        let xh = random_path_exp(&mut rng, 1, Boundary::Periodic, 16, 1.0, 1.0);
        let a = conjugated_remainder(&spec, &frame, &x, &xh, RemainderRoute::Explicit).unwrap();
        let b = conjugated_remainder(&spec, &frame, &x, &xh, RemainderRoute::Conjugation).unwrap();
        let gap = FourierPath::lincomb(&[(1.0, &a), (-1.0, &b)])
            .unwrap()
            .sobolev_norm(0);
        assert!(gap <= 1e-9, "route gap {gap}");
    }

    #[test]
    fn growth_condition_examples() {
        // pure quadratic: maxima {0, 0, |gamma|}
        let spec = linear_floer(1, -1.7);
        let report = check_growth_condition(&spec, 3.0, 200, 11);
        assert!(report.terms[0].max_time_derivative < 1e-14);
        assert!(report.terms[0].max_anchor_deviation < 1e-12);
        assert_relative_eq!(report.terms[0].max_differential_norm, 1.7, epsilon = 1e-10);
        assert!(report.pass);

        // bump perturbation stays within declared budget
        let ham = QuadraticHamiltonian {
            n: 1,
            gamma: 1.0,
            bumps: vec![Bump {
                amplitude: 0.1,
                center: vec![[0.0, 0.0]],
                radius: 1.0,
                time_modulated: true,
            }],
            declared_c: 4.0,
        };
        let spec = FieldSpec::floer(Arc::new(ConstantI { n: 1 }), Arc::new(ham)).unwrap();
        assert!(check_growth_condition(&spec, 3.0, 200, 12).pass);

        // quartic: Hessian unbounded, fails on a large box
        let quartic = QuarticHamiltonian {
            n: 1,
            scale: 1.0,
            declared: Growth { gamma: 1.0, c: 5.0 },
        };
        let spec = FieldSpec::floer(Arc::new(ConstantI { n: 1 }), Arc::new(quartic)).unwrap();
        assert!(!check_growth_condition(&spec, 4.0, 200, 13).pass);
    }

    #[test]
    fn c1_prime_values() {
        // measured constant c = |gamma| = 1 for the pure linear field
        assert_relative_eq!(c1_prime_closed_form(1.0, 1.0), 3.0);
        assert_relative_eq!(c1_prime_closed_form(1.0, 0.0), 2.0);
        assert_relative_eq!(c1_prime_closed_form(0.5, 0.5), 3.0);
    }

    #[test]
    fn delay_validation() {
        let f: Arc<dyn PointField> = Arc::new(LinearField { n: 1, gamma: 1.0 });
        assert!(FieldSpec::delay(vec![]).is_err());
        assert!(FieldSpec::delay(vec![DelayTerm {
            tau: 1.0,
            field: f.clone()
        }])
        .is_err());
        assert!(FieldSpec::delay(vec![
            DelayTerm {
                tau: 0.5,
                field: f.clone()
            },
            DelayTerm {
                tau: 0.2,
                field: f.clone()
            },
        ])
        .is_err());
        assert!(FieldSpec::delay(vec![
            DelayTerm {
                tau: 0.0,
                field: f.clone()
            },
            DelayTerm { tau: 0.5, field: f },
        ])
        .is_ok());
    }

    #[test]
    fn lagrangian_paths_rejected() {
        let spec = linear_floer(1, 1.0);
        let lag = FourierPath::zero(1, Boundary::Lagrangian, 3);
        assert!(matches!(vf_eval(&spec, &lag), Err(Error::Unsupported(_))));
    }
}
