//! Configuration-driven experiment scenarios.
//!
//! A scenario file (TOML) names a model from the catalog, a discretization,
//! an integrator, a family generator, and a list of checks with
//! tolerances.  Running a scenario produces a JSON report, a CSV summary,
//! and SVG plots; the run passes when every requested check passes.
//!
//! Reports are deterministic for a fixed (config, seed): random draws are
//! seeded per member, parallel maps preserve order, and wall-clock data
//! lives in a separate `meta` field that comparisons exclude.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::catalog::{Catalog, ModelConfig};
use crate::error::{Error, Result};
use crate::fields::FieldSpec;
use crate::flow::{integrate, FlowConfig, Integrator, Trajectory};
use crate::frames::FrameGenerator;
use crate::loops::{random_path, random_path_exp, Boundary, FourierPath};

pub mod checks;

#[derive(Debug, Clone, Deserialize)]
pub struct Scenario {
    #[serde(default = "default_schema")]
    pub schema: String,
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    /// What the scenario exercises, in content terms (shown by `describe`).
    #[serde(default)]
    pub topics: Vec<String>,
    #[serde(default = "default_budget")]
    pub runtime_budget_secs: u64,
    pub model: ModelConfig,
    pub discretization: Discretization,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub family: FamilyConfig,
    pub checks: Vec<CheckConfig>,
}

fn default_schema() -> String {
    "scaleflow-report/1".into()
}
fn default_budget() -> u64 {
    300
}

#[derive(Debug, Clone, Deserialize)]
pub struct Discretization {
    /// Fourier truncation N.
    pub order: usize,
    pub s_samples: usize,
    pub t_half: f64,
    #[serde(default)]
    pub t_prime_ladder: Vec<f64>,
}

impl Discretization {
    fn validate(&self) -> Result<()> {
        if self.s_samples < 5 || !(self.t_half > 0.0) {
            return Err(Error::config(
                "discretization needs s_samples >= 5 and T > 0",
            ));
        }
        if self.t_prime_ladder.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("the T' ladder must be strictly increasing"));
        }
        if self
            .t_prime_ladder
            .iter()
            .any(|t| !(*t > 0.0 && *t < self.t_half))
        {
            return Err(Error::config("every T' must satisfy 0 < T' < T"));
        }
        Ok(())
    }

    fn t_prime_top(&self) -> f64 {
        self.t_prime_ladder
            .last()
            .copied()
            .unwrap_or(self.t_half * 0.5)
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct IntegratorConfig {
    #[serde(default = "default_integrator_kind")]
    pub kind: String,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_ceiling")]
    pub ceiling: f64,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
}

fn default_integrator_kind() -> String {
    "etd-rk4".into()
}
fn default_step() -> f64 {
    2f64.powi(-8)
}
fn default_ceiling() -> f64 {
    1e6
}
fn default_rtol() -> f64 {
    1e-10
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            kind: default_integrator_kind(),
            step: default_step(),
            ceiling: default_ceiling(),
            rtol: default_rtol(),
        }
    }
}

impl IntegratorConfig {
    pub fn to_flow_config(&self) -> Result<FlowConfig> {
        let integrator = match self.kind.as_str() {
            "etd-rk4" => Integrator::EtdRk4,
            "adaptive-rk" => Integrator::AdaptiveRk {
                rtol: self.rtol,
                atol: self.rtol * 1e-3,
            },
            other => return Err(Error::config(format!("unknown integrator `{other}`"))),
        };
        Ok(FlowConfig {
            integrator,
            step: self.step,
            ceiling: self.ceiling,
            fold_linear_part: false,
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct FamilyConfig {
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    /// Exponential coefficient decay rate of the initial data.
    #[serde(default = "default_decay")]
    pub decay: f64,
    /// Relative spread of member amplitudes.
    #[serde(default = "default_spread")]
    pub spread: f64,
}

fn default_count() -> usize {
    8
}
fn default_amplitude() -> f64 {
    0.2
}
fn default_decay() -> f64 {
    1.5
}
fn default_spread() -> f64 {
    0.5
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig {
            count: default_count(),
            amplitude: default_amplitude(),
            decay: default_decay(),
            spread: default_spread(),
        }
    }
}

/// `kind` plus free-form parameters, parsed by the matching runner.
#[derive(Debug, Clone, Deserialize)]
pub struct CheckConfig {
    pub kind: String,
    #[serde(flatten)]
    pub params: toml::Table,
}

impl CheckConfig {
    pub(crate) fn parse<T: serde::de::DeserializeOwned>(&self) -> Result<T> {
        toml::Value::Table(self.params.clone())
            .try_into()
            .map_err(|e| Error::config(format!("bad `{}` check parameters: {e}", self.kind)))
    }
}

// ---------------------------------------------------------------------------
// outcomes and reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub quantity: String,
    pub measured: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    pub pass: bool,
}

impl SummaryRow {
    pub fn bounded(quantity: &str, measured: f64, bound: f64) -> Self {
        SummaryRow {
            quantity: quantity.into(),
            measured,
            bound: Some(bound),
            pass: measured <= bound,
        }
    }

    pub fn at_least(quantity: &str, measured: f64, floor: f64) -> Self {
        SummaryRow {
            quantity: quantity.into(),
            measured,
            bound: Some(floor),
            pass: measured >= floor,
        }
    }

    pub fn flag(quantity: &str, ok: bool) -> Self {
        SummaryRow {
            quantity: quantity.into(),
            measured: if ok { 1.0 } else { 0.0 },
            bound: None,
            pass: ok,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub kind: String,
    pub pass: bool,
    pub rows: Vec<SummaryRow>,
    pub detail: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub plots: Vec<(String, String)>,
}

impl CheckOutcome {
    fn from_rows(kind: &str, rows: Vec<SummaryRow>, detail: serde_json::Value) -> Self {
        let pass = rows.iter().all(|r| r.pass);
        CheckOutcome {
            kind: kind.into(),
            pass,
            rows,
            detail,
            error: None,
            plots: Vec::new(),
        }
    }

    fn failed(kind: &str, err: &Error) -> Self {
        CheckOutcome {
            kind: kind.into(),
            pass: false,
            rows: Vec::new(),
            detail: serde_json::Value::Null,
            error: Some(err.to_string()),
            plots: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub schema: String,
    pub name: String,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<CheckOutcome>,
    /// Non-deterministic run data; excluded from reproducibility diffs.
    pub meta: MetaInfo,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct MetaInfo {
    /// Seconds since the Unix epoch when the run started.
    pub started_unix: f64,
    pub duration_secs: f64,
    pub jobs: usize,
}

// ---------------------------------------------------------------------------
// execution context
// ---------------------------------------------------------------------------

/// Resolved scenario: catalog lookups done, integrator built.
pub struct Context {
    pub scenario: Scenario,
    pub spec: FieldSpec,
    pub frame: Arc<dyn FrameGenerator>,
    pub flow: FlowConfig,
    /// Sobolev offset of the abstract scale for this model.
    pub offset: i32,
}

impl Context {
    pub fn resolve(scenario: Scenario, catalog: &Catalog) -> Result<Self> {
        scenario.discretization.validate()?;
        let spec = catalog.build_field(&scenario.model)?;
        let frame = catalog.build_frame(&scenario.model)?;
        let flow = scenario.integrator.to_flow_config()?;
        let offset = if frame.is_identity() { 0 } else { 1 };
        Ok(Context {
            scenario,
            spec,
            frame,
            flow,
            offset,
        })
    }

    pub fn member_seed(&self, member: usize, stream: u64) -> u64 {
        self.scenario
            .seed
            .wrapping_mul(0x9e3779b97f4a7c15)
            .wrapping_add(member as u64)
            .rotate_left(17)
            ^ stream
    }

    pub fn draw_initial(&self, member: usize, stream: u64) -> FourierPath {
        let fam = &self.scenario.family;
        let mut rng = ChaCha8Rng::seed_from_u64(self.member_seed(member, stream));
        use rand::Rng;
        let scale = 1.0 + fam.spread * rng.gen_range(-0.5..0.5);
        let p = random_path_exp(
            &mut rng,
            self.scenario.model.n,
            Boundary::Periodic,
            self.scenario.discretization.order,
            fam.amplitude * scale,
            fam.decay,
        );
        p
    }

    pub fn draw_rough(
        &self,
        member: usize,
        stream: u64,
        amplitude: f64,
        decay: f64,
    ) -> FourierPath {
        let mut rng = ChaCha8Rng::seed_from_u64(self.member_seed(member, stream));
        random_path(
            &mut rng,
            self.scenario.model.n,
            Boundary::Periodic,
            self.scenario.discretization.order,
            amplitude,
            decay,
        )
    }

    pub fn integrate_member(&self, x0: &FourierPath, samples: usize) -> Result<Trajectory> {
        integrate(
            &self.spec,
            x0,
            self.scenario.discretization.t_half,
            samples,
            &self.flow,
        )
    }

    /// Integrate the configured family (order-preserving parallel map).
    pub fn family(&self, samples: usize) -> Result<Vec<Trajectory>> {
        (0..self.scenario.family.count)
            .into_par_iter()
            .map(|m| self.integrate_member(&self.draw_initial(m, 0xfa01), samples))
            .collect()
    }
}

/// Run all checks of a resolved scenario.
pub fn run_scenario(ctx: &Context) -> ScenarioReport {
    let start = std::time::Instant::now();
    let mut outcomes = Vec::new();
    for check in &ctx.scenario.checks {
        let outcome = match checks::run_check(ctx, check) {
            Ok(outcome) => outcome,
            Err(err) => CheckOutcome::failed(&check.kind, &err),
        };
        outcomes.push(outcome);
    }
    let pass = outcomes.iter().all(|o| o.pass);
    ScenarioReport {
        schema: ctx.scenario.schema.clone(),
        name: ctx.scenario.name.clone(),
        seed: ctx.scenario.seed,
        pass,
        checks: outcomes,
        meta: MetaInfo {
            started_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs_f64())
                .unwrap_or(0.0)
                - start.elapsed().as_secs_f64(),
            duration_secs: start.elapsed().as_secs_f64(),
            jobs: rayon::current_num_threads(),
        },
    }
}

/// Parse a scenario from TOML source.
pub fn parse_scenario(source: &str) -> Result<Scenario> {
    Ok(toml::from_str(source)?)
}

// ---------------------------------------------------------------------------
// artifact emission
// ---------------------------------------------------------------------------

/// Serialize the report with the meta field zeroed — the byte-stable form
/// used for reproducibility comparisons.
pub fn report_json_stable(report: &ScenarioReport) -> Result<String> {
    let mut clone = report.clone();
    clone.meta = MetaInfo::default();
    Ok(serde_json::to_string_pretty(&clone)?)
}

pub fn report_csv(report: &ScenarioReport) -> String {
    let mut out = String::from("scenario,check,quantity,measured,bound,pass\n");
    for check in &report.checks {
        for row in &check.rows {
            out.push_str(&format!(
                "{},{},{},{:.17e},{},{}\n",
                report.name,
                check.kind,
                row.quantity,
                row.measured,
                row.bound.map_or(String::new(), |b| format!("{b:.17e}")),
                row.pass
            ));
        }
    }
    out
}

/// Write report.json, summary.csv, and one SVG per generated plot.
pub fn write_artifacts(report: &ScenarioReport, dir: &std::path::Path) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let json = serde_json::to_string_pretty(report)?;
    std::fs::write(dir.join("report.json"), json)?;
    written.push("report.json".into());
    std::fs::write(dir.join("summary.csv"), report_csv(report))?;
    written.push("summary.csv".into());
    for check in &report.checks {
        for (stem, svg) in &check.plots {
            let file = format!("{stem}.svg");
            std::fs::write(dir.join(&file), svg)?;
            written.push(file);
        }
    }
    Ok(written)
}
