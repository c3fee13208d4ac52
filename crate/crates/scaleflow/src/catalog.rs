//! Named catalog of fields, almost complex structures, and frames.
//!
//! Configuration files describe models by catalog id plus parameters; the
//! catalog maps those descriptors to the concrete evaluators.  Users extend
//! the catalog in code by registering new builders under fresh ids.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fields::{
    AlmostComplex, Bump, ConjugatedConstant, ConstantI, DelayTerm, FieldSpec, Growth, LinearField,
    QuadraticHamiltonian, QuarticHamiltonian, ShearBump,
};
use crate::frames::{
    build_frame_from_j, ConstantFrame, FrameGenerator, ScalarRotationFrame, TrivialFrame,
};

/// A raw `kind + params` table from a configuration file.
#[derive(Debug, Clone, Deserialize)]
pub struct Descriptor {
    pub kind: String,
    #[serde(flatten)]
    pub params: toml::Table,
}

impl Descriptor {
    pub fn bare(kind: &str) -> Self {
        Descriptor {
            kind: kind.into(),
            params: toml::Table::new(),
        }
    }

    fn parse<T: serde::de::DeserializeOwned>(&self) -> Result<T> {
        toml::Value::Table(self.params.clone())
            .try_into()
            .map_err(|e| Error::config(format!("bad parameters for `{}`: {e}", self.kind)))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::Map::new();
        v.insert("kind".into(), serde_json::Value::String(self.kind.clone()));
        if let Ok(serde_json::Value::Object(obj)) = serde_json::to_value(&self.params) {
            for (k, val) in obj {
                v.insert(k, val);
            }
        }
        serde_json::Value::Object(v)
    }
}

/// Full model description: dimension, field, ambient J, and frame.
#[derive(Debug, Clone, Deserialize)]
pub struct ModelConfig {
    #[serde(default = "default_dim")]
    pub n: usize,
    pub field: Descriptor,
    #[serde(default = "default_j")]
    pub j: Descriptor,
    #[serde(default = "default_frame")]
    pub frame: Descriptor,
}

fn default_dim() -> usize {
    1
}
fn default_j() -> Descriptor {
    Descriptor::bare("constant-i")
}
fn default_frame() -> Descriptor {
    Descriptor::bare("trivial")
}

impl ModelConfig {
    pub fn elementary(n: usize, field: Descriptor) -> Self {
        ModelConfig {
            n,
            field,
            j: default_j(),
            frame: default_frame(),
        }
    }
}

// parameter structs -------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
struct QuadraticParams {
    gamma: f64,
    #[serde(default)]
    bumps: Vec<BumpParams>,
    /// Declared growth constant; defaults to |gamma| plus the bump budgets.
    #[serde(default)]
    declared_c: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
struct BumpParams {
    amplitude: f64,
    radius: f64,
    #[serde(default)]
    center: Vec<[f64; 2]>,
    #[serde(default)]
    time_modulated: bool,
}

impl BumpParams {
    fn build(&self, n: usize) -> Result<Bump> {
        let mut center = self.center.clone();
        if center.is_empty() {
            center = vec![[0.0, 0.0]; n];
        }
        if center.len() != n {
            return Err(Error::config("bump center dimension mismatch"));
        }
        if !(self.radius > 0.0) {
            return Err(Error::config("bump radius must be positive"));
        }
        Ok(Bump {
            amplitude: self.amplitude,
            center,
            radius: self.radius,
            time_modulated: self.time_modulated,
        })
    }

    /// Conservative budget for the three growth quantities of the bump.
    fn growth_budget(&self) -> f64 {
        // profile derivative peaks are O(1); the gradient carries 2/r, the
        // Hessian 4/r^2 + 2/r, the time derivative a factor pi
        let r = self.radius;
        let shape = (2.0 / r).max(4.0 / (r * r) + 2.0 / r).max(1.0);
        self.amplitude.abs() * shape * (1.0 + std::f64::consts::PI)
    }
}

#[derive(Debug, Clone, Deserialize)]
struct QuarticParams {
    scale: f64,
    gamma: f64,
    declared_c: f64,
}

#[derive(Debug, Clone, Deserialize)]
struct DelayLinearParams {
    terms: Vec<DelayLinearTerm>,
}

#[derive(Debug, Clone, Deserialize)]
struct DelayLinearTerm {
    tau: f64,
    gamma: f64,
}

#[derive(Debug, Clone, Deserialize)]
struct ShearBumpParams {
    alpha: f64,
}

#[derive(Debug, Clone, Deserialize)]
struct ConjugatedShearParams {
    shear: f64,
}

#[derive(Debug, Clone, Deserialize)]
struct RotationParams {
    #[serde(default = "default_strength")]
    strength: f64,
}

fn default_strength() -> f64 {
    1.0
}

// catalog -----------------------------------------------------------------

type JBuilder = fn(&Descriptor, usize) -> Result<Arc<dyn AlmostComplex>>;
type FieldBuilder = fn(&Descriptor, usize, &Arc<dyn AlmostComplex>) -> Result<FieldSpec>;
type FrameBuilder =
    fn(&Descriptor, usize, &Arc<dyn AlmostComplex>) -> Result<Arc<dyn FrameGenerator>>;

/// Registry of builders, keyed by catalog id.
pub struct Catalog {
    fields: BTreeMap<String, FieldBuilder>,
    js: BTreeMap<String, JBuilder>,
    frames: BTreeMap<String, FrameBuilder>,
}

impl Default for Catalog {
    fn default() -> Self {
        Catalog::builtin()
    }
}

impl Catalog {
    /// The built-in entries: quadratic Hamiltonians with optional bump
    /// perturbations, the quartic negative control, linear delay lists,
    /// the shear-bump and conjugated-shear structures, the scalar rotation
    /// frame, constant frames, and the square-root frame from J.
    pub fn builtin() -> Self {
        let mut cat = Catalog {
            fields: BTreeMap::new(),
            js: BTreeMap::new(),
            frames: BTreeMap::new(),
        };
        cat.register_field("quadratic", build_quadratic);
        cat.register_field("quartic", build_quartic);
        cat.register_field("delay-linear", build_delay_linear);
        cat.register_field("general-linear", build_general_linear);
        cat.register_j("constant-i", build_constant_i);
        cat.register_j("shear-bump", build_shear_bump);
        cat.register_j("conjugated-shear", build_conjugated_shear);
        cat.register_frame("trivial", build_trivial_frame);
        cat.register_frame("scalar-rotation", build_rotation_frame);
        cat.register_frame("inverse-shear", build_inverse_shear_frame);
        cat.register_frame("from-j", build_from_j_frame);
        cat
    }

    pub fn register_field(&mut self, id: &str, builder: FieldBuilder) {
        self.fields.insert(id.into(), builder);
    }

    pub fn register_j(&mut self, id: &str, builder: JBuilder) {
        self.js.insert(id.into(), builder);
    }

    pub fn register_frame(&mut self, id: &str, builder: FrameBuilder) {
        self.frames.insert(id.into(), builder);
    }

    pub fn field_ids(&self) -> impl Iterator<Item = &str> {
        self.fields.keys().map(|s| s.as_str())
    }

    pub fn build_j(&self, model: &ModelConfig) -> Result<Arc<dyn AlmostComplex>> {
        let builder = self
            .js
            .get(&model.j.kind)
            .ok_or_else(|| Error::config(format!("unknown J catalog id `{}`", model.j.kind)))?;
        builder(&model.j, model.n)
    }

    pub fn build_field(&self, model: &ModelConfig) -> Result<FieldSpec> {
        let j = self.build_j(model)?;
        let builder = self.fields.get(&model.field.kind).ok_or_else(|| {
            Error::config(format!("unknown field catalog id `{}`", model.field.kind))
        })?;
        builder(&model.field, model.n, &j)
    }

    pub fn build_frame(&self, model: &ModelConfig) -> Result<Arc<dyn FrameGenerator>> {
        let j = self.build_j(model)?;
        let builder = self.frames.get(&model.frame.kind).ok_or_else(|| {
            Error::config(format!("unknown frame catalog id `{}`", model.frame.kind))
        })?;
        builder(&model.frame, model.n, &j)
    }
}

fn build_quadratic(d: &Descriptor, n: usize, j: &Arc<dyn AlmostComplex>) -> Result<FieldSpec> {
    let p: QuadraticParams = d.parse()?;
    let bumps: Vec<Bump> = p.bumps.iter().map(|b| b.build(n)).collect::<Result<_>>()?;
    let declared_c = p
        .declared_c
        .unwrap_or_else(|| p.gamma.abs() + p.bumps.iter().map(|b| b.growth_budget()).sum::<f64>());
    let ham = QuadraticHamiltonian {
        n,
        gamma: p.gamma,
        bumps,
        declared_c,
    };
    FieldSpec::floer(j.clone(), Arc::new(ham))
}

fn build_quartic(d: &Descriptor, n: usize, j: &Arc<dyn AlmostComplex>) -> Result<FieldSpec> {
    let p: QuarticParams = d.parse()?;
    let ham = QuarticHamiltonian {
        n,
        scale: p.scale,
        declared: Growth {
            gamma: p.gamma,
            c: p.declared_c,
        },
    };
    FieldSpec::floer(j.clone(), Arc::new(ham))
}

fn build_delay_linear(d: &Descriptor, n: usize, _j: &Arc<dyn AlmostComplex>) -> Result<FieldSpec> {
    let p: DelayLinearParams = d.parse()?;
    let terms = p
        .terms
        .iter()
        .map(|t| DelayTerm {
            tau: t.tau,
            field: Arc::new(LinearField { n, gamma: t.gamma }) as _,
        })
        .collect();
    FieldSpec::delay(terms)
}

fn build_general_linear(d: &Descriptor, n: usize, j: &Arc<dyn AlmostComplex>) -> Result<FieldSpec> {
    #[derive(Deserialize)]
    struct P {
        gamma: f64,
    }
    let p: P = d.parse()?;
    FieldSpec::general(j.clone(), Arc::new(LinearField { n, gamma: p.gamma }))
}

fn build_constant_i(_d: &Descriptor, n: usize) -> Result<Arc<dyn AlmostComplex>> {
    Ok(Arc::new(ConstantI { n }))
}

fn build_shear_bump(d: &Descriptor, n: usize) -> Result<Arc<dyn AlmostComplex>> {
    let p: ShearBumpParams = d.parse()?;
    Ok(Arc::new(ShearBump { n, alpha: p.alpha }))
}

fn build_conjugated_shear(d: &Descriptor, n: usize) -> Result<Arc<dyn AlmostComplex>> {
    let p: ConjugatedShearParams = d.parse()?;
    let mut s = nalgebra::DMatrix::identity(2 * n, 2 * n);
    s[(0, 1)] = p.shear;
    Ok(Arc::new(ConjugatedConstant::new(s)?))
}

fn build_trivial_frame(
    _d: &Descriptor,
    n: usize,
    _j: &Arc<dyn AlmostComplex>,
) -> Result<Arc<dyn FrameGenerator>> {
    Ok(Arc::new(TrivialFrame { n }))
}

fn build_rotation_frame(
    d: &Descriptor,
    n: usize,
    _j: &Arc<dyn AlmostComplex>,
) -> Result<Arc<dyn FrameGenerator>> {
    let p: RotationParams = d.parse()?;
    Ok(Arc::new(ScalarRotationFrame {
        n,
        strength: p.strength,
    }))
}

fn build_inverse_shear_frame(
    d: &Descriptor,
    n: usize,
    _j: &Arc<dyn AlmostComplex>,
) -> Result<Arc<dyn FrameGenerator>> {
    let p: ConjugatedShearParams = d.parse()?;
    let mut s = nalgebra::DMatrix::identity(2 * n, 2 * n);
    s[(0, 1)] = p.shear;
    let inv = s
        .try_inverse()
        .ok_or_else(|| Error::singular("shear not invertible"))?;
    Ok(Arc::new(ConstantFrame::new(inv)?))
}

fn build_from_j_frame(
    _d: &Descriptor,
    _n: usize,
    j: &Arc<dyn AlmostComplex>,
) -> Result<Arc<dyn FrameGenerator>> {
    Ok(Arc::new(build_frame_from_j(j.clone())?))
}
