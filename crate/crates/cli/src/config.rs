//! Scenario configuration: a TOML file selecting a model, a sampling
//! budget, tolerances, and a list of checks with expected verdicts.
//! Unknown keys are rejected so typos fail loudly instead of being
//! silently ignored.

use anyhow::{bail, Context, Result};
use foliage_core::graph::GraphModel;
use foliage_core::metric::{Axis, Domain, MetricField};
use foliage_core::model::{FoliationModel, IntMat2, SuspensionModel};
use foliage_core::report::{Tolerance, Verdict};
use nalgebra::DMatrix;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    #[serde(default, rename = "checks")]
    pub checks: Vec<CheckRequest>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Torus bundle over the circle twisted by an integer matrix.
    Suspension,
    /// Metric product of a leaf factor and a transverse factor.
    Product,
    /// Warped plane whose transverse coefficient varies along leaves;
    /// the standard negative control.
    Warped,
    /// Pair space of the suspension: graph of its leaf equivalence.
    SuspensionGraph,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Integer monodromy matrix, rows first; suspension kinds only.
    pub matrix: Option<[[i64; 2]; 2]>,
    /// Fiber form scale; suspension kinds only (default 1).
    pub eta: Option<f64>,
    /// Diagonal of the leaf-factor metric; product kind only.
    pub leaf_metric: Option<Vec<f64>>,
    /// Diagonal of the transverse-factor metric; product kind only.
    pub transverse_metric: Option<Vec<f64>>,
    /// Periods of the transverse axes when they are circles; product kind
    /// only. Absent axes are unbounded lines.
    pub transverse_periods: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub seed: u64,
    pub count: usize,
    /// Geodesic parameter horizon for transport checks.
    pub s_max: f64,
    /// Fixed integrator step.
    pub step: f64,
    /// Horizon for the completeness probe.
    pub horizon: f64,
    /// Number of leafwise geodesics for the totally-geodesic probe.
    pub geodesics: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            seed: 42,
            count: 64,
            s_max: 2.0,
            step: 1e-3,
            horizon: 20.0,
            geodesics: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    pub pass: f64,
    pub fail: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        let t = Tolerance::default();
        ToleranceConfig { pass: t.pass, fail: t.fail }
    }
}

impl ToleranceConfig {
    pub fn as_tolerance(&self) -> Tolerance {
        Tolerance { pass: self.pass, fail: self.fail }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckRequest {
    pub name: String,
    #[serde(default)]
    pub expect: Expect,
}

/// Verdict a check is expected to produce; a run succeeds only when every
/// check matches its expectation, so known-bad models are first-class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expect {
    #[default]
    Pass,
    Fail,
    Degenerate,
}

impl Expect {
    pub fn matches(&self, verdict: Verdict) -> bool {
        matches!(
            (self, verdict),
            (Expect::Pass, Verdict::Pass)
                | (Expect::Fail, Verdict::Fail)
                | (Expect::Degenerate, Verdict::Degenerate)
        )
    }

    pub fn label(&self) -> &'static str {
        match self {
            Expect::Pass => "pass",
            Expect::Fail => "fail",
            Expect::Degenerate => "degenerate",
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<ScenarioConfig> {
        let cfg: ScenarioConfig =
            toml::from_str(text).context("could not parse the scenario configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let m = &self.model;
        match m.kind {
            ModelKind::Suspension | ModelKind::SuspensionGraph => {
                if m.matrix.is_none() {
                    bail!("a suspension model needs a `matrix`");
                }
                if m.leaf_metric.is_some()
                    || m.transverse_metric.is_some()
                    || m.transverse_periods.is_some()
                {
                    bail!("factor-metric fields apply only to `kind = \"product\"`");
                }
            }
            ModelKind::Product => {
                if m.leaf_metric.is_none() || m.transverse_metric.is_none() {
                    bail!("a product model needs `leaf_metric` and `transverse_metric`");
                }
                if m.matrix.is_some() || m.eta.is_some() {
                    bail!("`matrix` and `eta` apply only to suspension kinds");
                }
            }
            ModelKind::Warped => {
                if m.matrix.is_some()
                    || m.eta.is_some()
                    || m.leaf_metric.is_some()
                    || m.transverse_metric.is_some()
                    || m.transverse_periods.is_some()
                {
                    bail!("the warped model takes no parameters");
                }
            }
        }
        if self.tolerances.pass > self.tolerances.fail {
            bail!("the pass tolerance must not exceed the fail tolerance");
        }
        for c in &self.checks {
            crate::catalog::parse_check(&c.name)?;
        }
        Ok(())
    }

    pub fn build_model(&self) -> Result<RunnerModel> {
        let m = &self.model;
        match m.kind {
            ModelKind::Suspension => {
                let s = build_suspension(m)?;
                Ok(RunnerModel::Suspension(s))
            }
            ModelKind::SuspensionGraph => {
                let s = build_suspension(m)?;
                let g = GraphModel::build(s.as_model())
                    .context("the pair-space construction was refused")?;
                Ok(RunnerModel::Graph(g))
            }
            ModelKind::Product => {
                let leaf_diag = m.leaf_metric.clone().unwrap();
                let trans_diag = m.transverse_metric.clone().unwrap();
                if leaf_diag.is_empty() || trans_diag.is_empty() {
                    bail!("factor metrics need at least one diagonal entry");
                }
                let periods = m.transverse_periods.clone().unwrap_or_default();
                if periods.len() > trans_diag.len() {
                    bail!("more transverse periods than transverse axes");
                }
                let leaf = diag_metric(&leaf_diag, &[]);
                let trans = diag_metric(&trans_diag, &periods);
                let model = FoliationModel::product("configured-product", &leaf, &trans)?;
                Ok(RunnerModel::Plain(model))
            }
            ModelKind::Warped => Ok(RunnerModel::Plain(FoliationModel::warped_counterexample())),
        }
    }
}

fn build_suspension(m: &ModelConfig) -> Result<SuspensionModel> {
    let [[a, b], [c, d]] = m.matrix.unwrap();
    let eta = m.eta.unwrap_or(1.0);
    SuspensionModel::new(IntMat2::new(a, b, c, d), eta)
        .context("the monodromy matrix was rejected")
}

fn diag_metric(diag: &[f64], periods: &[f64]) -> MetricField {
    let axes = (0..diag.len())
        .map(|i| match periods.get(i) {
            Some(&p) => Axis::Periodic { period: p },
            None => Axis::Line { sample_lo: -1.0, sample_hi: 1.0 },
        })
        .collect();
    let entries = diag.to_vec();
    MetricField::new(Domain::new(axes), move |_| {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&entries))
    })
}

/// A configured model ready to run checks against. Suspensions keep their
/// typed form so integer-exact probes (deck relations) stay available.
pub enum RunnerModel {
    Suspension(SuspensionModel),
    Plain(FoliationModel),
    Graph(GraphModel),
}

impl RunnerModel {
    /// The chart-based model every pointwise check runs on.
    pub fn as_plain(&self) -> &FoliationModel {
        match self {
            RunnerModel::Suspension(s) => s.as_model(),
            RunnerModel::Plain(m) => m,
            RunnerModel::Graph(g) => g.as_model(),
        }
    }

    pub fn as_suspension(&self) -> Option<&SuspensionModel> {
        match self {
            RunnerModel::Suspension(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_graph(&self) -> Option<&GraphModel> {
        match self {
            RunnerModel::Graph(g) => Some(g),
            _ => None,
        }
    }
}
