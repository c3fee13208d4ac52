//! Moving frames from pointwise matrix fields.
//!
//! A frame generator is a smooth map Psi : R^{2n} -> GL(R^{2n}) together
//! with its first two derivatives.  It induces the moving frame
//!
//! ```text
//! (Phi(x) v)(t) = Psi(x(t)) v(t)
//! ```
//!
//! on loops, evaluated here by oversampled collocation.  The defining
//! property tying a frame to an almost complex structure J is the
//! intertwining relation i Psi(p) = Psi(p) J(p); [`build_frame_from_j`]
//! produces such a Psi for any compatible J via the symmetric-positive
//! square root of -J(p) i (then J = B i B^{-1} with B = (-Ji)^{1/2}, and
//! Psi = B^{-1}).
//!
//! Points of R^{2n} are identified with C^n; matrices act on interleaved
//! real coordinates (re z_1, im z_1, ..., re z_n, im z_n).

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::AlmostComplex;
use crate::loops::{oversampled_len, Boundary, CollocationGrid, FourierPath};

// ---------------------------------------------------------------------------
// R^{2n} <-> C^n plumbing
// ---------------------------------------------------------------------------

/// The matrix of multiplication by i on interleaved real coordinates.
pub fn i_matrix(n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for c in 0..n {
        m[(2 * c, 2 * c + 1)] = -1.0;
        m[(2 * c + 1, 2 * c)] = 1.0;
    }
    m
}

/// Apply a real 2n x 2n matrix to a C^n vector.
pub fn apply_real_matrix(m: &DMatrix<f64>, v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    debug_assert_eq!(m.nrows(), 2 * n);
    let mut out = vec![Complex64::ZERO; n];
    for r in 0..2 * n {
        let mut acc = 0.0;
        for c in 0..n {
            acc += m[(r, 2 * c)] * v[c].re + m[(r, 2 * c + 1)] * v[c].im;
        }
        if r % 2 == 0 {
            out[r / 2].re = acc;
        } else {
            out[r / 2].im = acc;
        }
    }
    out
}

/// Real pairing <p, h> on R^{2n} = C^n.
pub fn real_dot(p: &[Complex64], h: &[Complex64]) -> f64 {
    p.iter()
        .zip(h)
        .map(|(a, b)| a.re * b.re + a.im * b.im)
        .sum()
}

/// Spectral operator norm (largest singular value).
pub fn operator_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().singular_values().max()
}

// ---------------------------------------------------------------------------
// frame generators
// ---------------------------------------------------------------------------

/// Pointwise data (Psi, DPsi, D^2Psi, Psi^{-1}) of a moving frame.
///
/// Evaluators must be pure and re-entrant; everything downstream
/// parallelizes over samples on that contract.
pub trait FrameGenerator: Send + Sync {
    /// Complex dimension n.
    fn dim(&self) -> usize;

    fn psi(&self, p: &[Complex64]) -> Result<DMatrix<f64>>;

    fn psi_inv(&self, p: &[Complex64]) -> Result<DMatrix<f64>>;

    /// Directional derivative DPsi(p)(h) as a matrix.
    fn d_psi(&self, p: &[Complex64], h: &[Complex64]) -> Result<DMatrix<f64>>;

    /// Second derivative D^2Psi(p)(h, h2) as a matrix.
    fn d2_psi(&self, p: &[Complex64], h: &[Complex64], h2: &[Complex64]) -> Result<DMatrix<f64>>;

    /// Whether Psi is identically the identity (enables exact paths).
    fn is_identity(&self) -> bool {
        false
    }
}

/// Psi = id, DPsi = 0.
#[derive(Debug, Clone)]
pub struct TrivialFrame {
    pub n: usize,
}

impl FrameGenerator for TrivialFrame {
    fn dim(&self) -> usize {
        self.n
    }
    fn psi(&self, _p: &[Complex64]) -> Result<DMatrix<f64>> {
        Ok(DMatrix::identity(2 * self.n, 2 * self.n))
    }
    fn psi_inv(&self, _p: &[Complex64]) -> Result<DMatrix<f64>> {
        Ok(DMatrix::identity(2 * self.n, 2 * self.n))
    }
    fn d_psi(&self, _p: &[Complex64], _h: &[Complex64]) -> Result<DMatrix<f64>> {
        Ok(DMatrix::zeros(2 * self.n, 2 * self.n))
    }
    fn d2_psi(
        &self,
        _p: &[Complex64],
        _h: &[Complex64],
        _h2: &[Complex64],
    ) -> Result<DMatrix<f64>> {
        Ok(DMatrix::zeros(2 * self.n, 2 * self.n))
    }
    fn is_identity(&self) -> bool {
        true
    }
}

/// Scalar rotation frame Psi(p) = e^{i theta(p)} with
/// theta(p) = strength * atan(|p|^2).  Intertwines J = i with itself; a
/// genuinely nonconstant frame with closed-form derivatives.
#[derive(Debug, Clone)]
pub struct ScalarRotationFrame {
    pub n: usize,
    pub strength: f64,
}

impl ScalarRotationFrame {
    fn theta(&self, p: &[Complex64]) -> f64 {
        self.strength * real_dot(p, p).atan()
    }

    fn d_theta(&self, p: &[Complex64], h: &[Complex64]) -> f64 {
        let u = real_dot(p, p);
        self.strength * 2.0 * real_dot(p, h) / (1.0 + u * u)
    }

    fn d2_theta(&self, p: &[Complex64], h: &[Complex64], h2: &[Complex64]) -> f64 {
        let u = real_dot(p, p);
        let denom = 1.0 + u * u;
        self.strength
            * (2.0 * real_dot(h, h2) / denom
                - 8.0 * u * real_dot(p, h) * real_dot(p, h2) / (denom * denom))
    }

    /// Block rotation by angle a, optionally pre-multiplied by i.
    fn rotation(&self, a: f64, extra_quarter_turns: u32) -> DMatrix<f64> {
        let angle = a + extra_quarter_turns as f64 * std::f64::consts::FRAC_PI_2;
        let (s, c) = angle.sin_cos();
        let mut m = DMatrix::zeros(2 * self.n, 2 * self.n);
        for k in 0..self.n {
            m[(2 * k, 2 * k)] = c;
            m[(2 * k, 2 * k + 1)] = -s;
            m[(2 * k + 1, 2 * k)] = s;
            m[(2 * k + 1, 2 * k + 1)] = c;
        }
        m
    }
}

impl FrameGenerator for ScalarRotationFrame {
    fn dim(&self) -> usize {
        self.n
    }
    fn psi(&self, p: &[Complex64]) -> Result<DMatrix<f64>> {
        Ok(self.rotation(self.theta(p), 0))
    }
    fn psi_inv(&self, p: &[Complex64]) -> Result<DMatrix<f64>> {
        Ok(self.rotation(-self.theta(p), 0))
    }
    fn d_psi(&self, p: &[Complex64], h: &[Complex64]) -> Result<DMatrix<f64>> {
        // d/dtheta e^{i theta} = i e^{i theta}
        Ok(self.rotation(self.theta(p), 1) * self.d_theta(p, h))
    }
    fn d2_psi(&self, p: &[Complex64], h: &[Complex64], h2: &[Complex64]) -> Result<DMatrix<f64>> {
        let theta = self.theta(p);
        let first = self.rotation(theta, 1) * self.d2_theta(p, h, h2);
        let second = self.rotation(theta, 2) * (self.d_theta(p, h) * self.d_theta(p, h2));
        Ok(first + second)
    }
}

/// A constant invertible matrix as a frame (e.g. S^{-1} for J = S i S^{-1}).
#[derive(Debug, Clone)]
pub struct ConstantFrame {
    n: usize,
    mat: DMatrix<f64>,
    inv: DMatrix<f64>,
}

impl ConstantFrame {
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        let n2 = mat.nrows();
        if n2 % 2 != 0 || mat.ncols() != n2 {
            return Err(Error::validation(
                "frame matrix must be square of even size",
            ));
        }
        let inv = mat
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::singular("constant frame matrix is not invertible"))?;
        Ok(ConstantFrame {
            n: n2 / 2,
            mat,
            inv,
        })
    }
}

impl FrameGenerator for ConstantFrame {
    fn dim(&self) -> usize {
        self.n
    }
    fn psi(&self, _p: &[Complex64]) -> Result<DMatrix<f64>> {
        Ok(self.mat.clone())
    }
    fn psi_inv(&self, _p: &[Complex64]) -> Result<DMatrix<f64>> {
        Ok(self.inv.clone())
    }
    fn d_psi(&self, _p: &[Complex64], _h: &[Complex64]) -> Result<DMatrix<f64>> {
        Ok(DMatrix::zeros(2 * self.n, 2 * self.n))
    }
    fn d2_psi(
        &self,
        _p: &[Complex64],
        _h: &[Complex64],
        _h2: &[Complex64],
    ) -> Result<DMatrix<f64>> {
        Ok(DMatrix::zeros(2 * self.n, 2 * self.n))
    }
}

/// Frame derived from a compatible almost complex structure via the
/// square-root construction, with finite-difference derivatives.
pub struct JDerivedFrame {
    j: Arc<dyn AlmostComplex>,
    fd_step: f64,
}

/// Symmetric-positive square root; errors when the matrix is not
/// (numerically) symmetric positive definite.
fn spd_sqrt(a: &DMatrix<f64>, context: &str) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let sym_defect = (a - a.transpose()).norm();
    if sym_defect > 1e-9 * a.norm().max(1.0) {
        return Err(Error::validation(format!(
            "{context}: -J i is not symmetric (defect {sym_defect:.2e}); J is not compatible"
        )));
    }
    let sym = 0.5 * (a + a.transpose());
    let eig = sym.symmetric_eigen();
    if eig.eigenvalues.iter().any(|l| *l <= 1e-12) {
        return Err(Error::validation(format!(
            "{context}: -J i is not positive definite; J is not compatible"
        )));
    }
    let mut root = DMatrix::zeros(a.nrows(), a.ncols());
    let mut inv_root = DMatrix::zeros(a.nrows(), a.ncols());
    for (k, l) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        root += v * v.transpose() * l.sqrt();
        inv_root += v * v.transpose() / l.sqrt();
    }
    Ok((root, inv_root))
}

impl JDerivedFrame {
    /// Step used for the nested central differences of DPsi and D^2Psi.
    pub const FD_STEP: f64 = 1e-5;

    pub fn new(j: Arc<dyn AlmostComplex>) -> Result<Self> {
        let frame = JDerivedFrame {
            j,
            fd_step: Self::FD_STEP,
        };
        frame.validate_at_samples()?;
        Ok(frame)
    }

    fn validate_at_samples(&self) -> Result<()> {
        let n = self.j.dim();
        let imat = i_matrix(n);
        // deterministic probe set: the origin plus axis points at a few radii
        let mut probes: Vec<Vec<Complex64>> = vec![vec![Complex64::ZERO; n]];
        for c in 0..n {
            for r in [0.5, 1.0, 2.0] {
                for dir in [Complex64::new(r, 0.0), Complex64::new(0.0, r)] {
                    let mut p = vec![Complex64::ZERO; n];
                    p[c] = dir;
                    probes.push(p);
                }
            }
        }
        for p in &probes {
            let j = self.j.j(p);
            let sq_defect = (&j * &j + DMatrix::<f64>::identity(2 * n, 2 * n)).norm();
            if sq_defect > 1e-12 * (1.0 + j.norm_squared()) {
                return Err(Error::validation(format!(
                    "J(p)^2 + id has residual {sq_defect:.2e}; not an almost complex structure"
                )));
            }
            let psi = self.psi(p)?;
            let defect = (&imat * &psi - &psi * &j).norm();
            if defect > 1e-10 {
                return Err(Error::validation(format!(
                    "derived frame violates i Psi = Psi J (residual {defect:.2e})"
                )));
            }
        }
        Ok(())
    }

    fn psi_pair(&self, p: &[Complex64]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let a = -self.j.j(p) * i_matrix(self.j.dim());
        // Psi = B^{-1}, Psi^{-1} = B with B = (-Ji)^{1/2}
        let (root, inv_root) = spd_sqrt(&a, "square-root frame")?;
        Ok((inv_root, root))
    }
}

impl FrameGenerator for JDerivedFrame {
    fn dim(&self) -> usize {
        self.j.dim()
    }
    fn psi(&self, p: &[Complex64]) -> Result<DMatrix<f64>> {
        Ok(self.psi_pair(p)?.0)
    }
    fn psi_inv(&self, p: &[Complex64]) -> Result<DMatrix<f64>> {
        Ok(self.psi_pair(p)?.1)
    }
    fn d_psi(&self, p: &[Complex64], h: &[Complex64]) -> Result<DMatrix<f64>> {
        let d = self.fd_step;
        let shift = |sign: f64| -> Vec<Complex64> {
            p.iter().zip(h).map(|(a, b)| a + sign * d * b).collect()
        };
        Ok((self.psi(&shift(1.0))? - self.psi(&shift(-1.0))?) / (2.0 * d))
    }
    fn d2_psi(&self, p: &[Complex64], h: &[Complex64], h2: &[Complex64]) -> Result<DMatrix<f64>> {
        let d = self.fd_step;
        let shift = |sign: f64| -> Vec<Complex64> {
            p.iter().zip(h2).map(|(a, b)| a + sign * d * b).collect()
        };
        Ok((self.d_psi(&shift(1.0), h)? - self.d_psi(&shift(-1.0), h)?) / (2.0 * d))
    }
}

/// Build a frame generator from a compatible almost complex structure.
pub fn build_frame_from_j(j: Arc<dyn AlmostComplex>) -> Result<JDerivedFrame> {
    JDerivedFrame::new(j)
}

// ---------------------------------------------------------------------------
// collocation application of frames
// ---------------------------------------------------------------------------

fn check_loop_inputs(psi: &dyn FrameGenerator, x: &FourierPath, v: &FourierPath) -> Result<usize> {
    if x.boundary() != Boundary::Periodic || v.boundary() != Boundary::Periodic {
        return Err(Error::unsupported(
            "frames act on periodic loops; boundary paths enter via reflection",
        ));
    }
    if x.dim() != psi.dim() || v.dim() != psi.dim() {
        return Err(Error::precondition("frame and path dimensions differ"));
    }
    Ok(x.order().max(v.order()))
}

fn sampled_matrix_apply(
    x: &FourierPath,
    v: &FourierPath,
    order: usize,
    matrix_at: impl Fn(usize, &[Complex64]) -> Result<DMatrix<f64>>,
) -> Result<FourierPath> {
    let m = oversampled_len(order);
    let gx = x.with_order(order).synthesize(m)?;
    let gv = v.with_order(order).synthesize(m)?;
    let n = x.dim();
    let mut samples = vec![Complex64::ZERO; m * n];
    for s in 0..m {
        let mat = matrix_at(s, gx.sample(s))?;
        if mat.iter().any(|e| !e.is_finite()) {
            return Err(Error::singular(format!(
                "frame matrix not finite at collocation point {s}"
            )));
        }
        let out = apply_real_matrix(&mat, gv.sample(s));
        samples[s * n..(s + 1) * n].copy_from_slice(&out);
    }
    CollocationGrid::from_samples(n, Boundary::Periodic, samples)?.analyze(order)
}

/// Coefficients of t -> Psi(x(t)) v(t).
pub fn frame_apply(
    psi: &dyn FrameGenerator,
    x: &FourierPath,
    v: &FourierPath,
) -> Result<FourierPath> {
    if psi.is_identity() {
        check_loop_inputs(psi, x, v)?;
        return Ok(v.clone());
    }
    let order = check_loop_inputs(psi, x, v)?;
    sampled_matrix_apply(x, v, order, |_, p| psi.psi(p))
}

/// Coefficients of t -> Psi(x(t))^{-1} v(t).
pub fn frame_inverse_apply(
    psi: &dyn FrameGenerator,
    x: &FourierPath,
    v: &FourierPath,
) -> Result<FourierPath> {
    if psi.is_identity() {
        check_loop_inputs(psi, x, v)?;
        return Ok(v.clone());
    }
    let order = check_loop_inputs(psi, x, v)?;
    sampled_matrix_apply(x, v, order, |_, p| psi.psi_inv(p))
}

/// Coefficients of t -> DPsi(x(t))(h(t)) v(t), the frame differential
/// DPhi(x)(h, v).
pub fn frame_differential(
    psi: &dyn FrameGenerator,
    x: &FourierPath,
    h: &FourierPath,
    v: &FourierPath,
) -> Result<FourierPath> {
    let order = check_loop_inputs(psi, x, v)?.max(h.order());
    if h.boundary() != Boundary::Periodic || h.dim() != psi.dim() {
        return Err(Error::precondition(
            "direction must be a loop of the frame dimension",
        ));
    }
    let m = oversampled_len(order);
    let gh = h.with_order(order).synthesize(m)?;
    sampled_matrix_apply(x, v, order, |s, p| psi.d_psi(p, gh.sample(s)))
}
