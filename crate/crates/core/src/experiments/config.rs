use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::efficient::EfficientConfig;
use crate::error::{Error, Result};
use crate::graph::PerturbationKind;
use crate::solver::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    FilterOrder,
    PerturbationType,
    BaselineCompare,
    Efficiency,
    JointK,
    ArForecast,
}

impl ExperimentId {
    fn allowed(self) -> &'static [Method] {
        use Method::*;
        match self {
            Self::FilterOrder
            | Self::PerturbationType
            | Self::BaselineCompare
            | Self::Efficiency => &[Fi, Rfi, RfiL1, RfiSt, RfiStSample, EffRfi],
            Self::JointK => &[Fi, Rfi, RfiJ],
            Self::ArForecast => &[Rfi, ArRfi, Ls, LsGf, CopyPrevDay, LsEval],
        }
    }
}

/// Estimation methods. The serialized names are the labels written to CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    /// Closed-form coefficient fit on the observed operator.
    #[serde(rename = "FI")]
    Fi,
    /// Alternating robust identification. In forecasting: the AR(1) variant.
    #[serde(rename = "RFI")]
    Rfi,
    /// Plain weighted ℓ1 (weights frozen at one).
    #[serde(rename = "RFI-l1")]
    RfiL1,
    /// Stationarity penalties built from the true covariances.
    #[serde(rename = "RFI-st")]
    RfiSt,
    /// Stationarity penalties built from sample covariances.
    #[serde(rename = "RFI-st-sample")]
    RfiStSample,
    /// Joint identification of all filters.
    #[serde(rename = "RFI-J")]
    RfiJ,
    /// Gradient / coordinate-descent solver.
    #[serde(rename = "Eff-RFI")]
    EffRfi,
    /// AR(K) robust identification.
    #[serde(rename = "AR-RFI")]
    ArRfi,
    /// Unconstrained least-squares AR(1).
    #[serde(rename = "LS")]
    Ls,
    /// AR(1) with a polynomial filter of the observed operator.
    #[serde(rename = "LS-GF")]
    LsGf,
    #[serde(rename = "Copy-Prev-Day")]
    CopyPrevDay,
    /// Least squares fitted on the evaluation window itself.
    #[serde(rename = "LS-Eval")]
    LsEval,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Self::Fi => "FI",
            Self::Rfi => "RFI",
            Self::RfiL1 => "RFI-l1",
            Self::RfiSt => "RFI-st",
            Self::RfiStSample => "RFI-st-sample",
            Self::RfiJ => "RFI-J",
            Self::EffRfi => "Eff-RFI",
            Self::ArRfi => "AR-RFI",
            Self::Ls => "LS",
            Self::LsGf => "LS-GF",
            Self::CopyPrevDay => "Copy-Prev-Day",
            Self::LsEval => "LS-Eval",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        ALL_METHODS
            .iter()
            .copied()
            .find(|m| m.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown method id `{s}`")))
    }
}

const ALL_METHODS: [Method; 12] = [
    Method::Fi,
    Method::Rfi,
    Method::RfiL1,
    Method::RfiSt,
    Method::RfiStSample,
    Method::RfiJ,
    Method::EffRfi,
    Method::ArRfi,
    Method::Ls,
    Method::LsGf,
    Method::CopyPrevDay,
    Method::LsEval,
];

/// The quantity varied along the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    FilterOrder,
    Ratio,
    Nodes,
    Signals,
    NoisePower,
    Filters,
    ArOrder,
    Horizon,
    Tts,
}

impl SweepVariable {
    fn integral(self) -> bool {
        matches!(
            self,
            Self::FilterOrder
                | Self::Nodes
                | Self::Signals
                | Self::Filters
                | Self::ArOrder
                | Self::Horizon
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphModel {
    ErdosRenyi,
    SmallWorld,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphParams {
    pub model: GraphModel,
    pub n: usize,
    /// Link probability (Erdős–Rényi).
    pub p: f64,
    /// Ring neighbours per node (small world, even).
    pub neighbors: usize,
    /// Rewiring probability (small world).
    pub rewire: f64,
    pub symmetric: bool,
}

impl Default for GraphParams {
    fn default() -> Self {
        Self {
            model: GraphModel::ErdosRenyi,
            n: 20,
            p: 0.2,
            neighbors: 4,
            rewire: 0.1,
            symmetric: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationParams {
    /// One entry runs a single perturbation; several label methods as `RFI/<kind>`.
    pub kinds: Vec<PerturbationKind>,
    pub ratio: f64,
    pub weight_sigma: f64,
}

impl Default for PerturbationParams {
    fn default() -> Self {
        Self {
            kinds: vec![PerturbationKind::CreateDestroy],
            ratio: 0.1,
            weight_sigma: 0.0,
        }
    }
}

/// How the true filter is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FilterModel {
    /// `H = Σ h_r S^r` with i.i.d. standard normal `h_r`.
    #[default]
    Polynomial,
    /// `H = (I − A)⁻¹` with `A = S / (2‖S‖₂)`.
    Sem,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalParams {
    /// Signals per filter.
    pub m: usize,
    pub eta: f64,
    pub filter_order: usize,
    pub filter_model: FilterModel,
    /// Filters sharing the graph (joint experiments).
    pub filters: usize,
}

impl Default for SignalParams {
    fn default() -> Self {
        Self {
            m: 50,
            eta: 0.05,
            filter_order: 4,
            filter_model: FilterModel::Polynomial,
            filters: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArParams {
    /// Memory of the `AR-RFI` fit.
    pub order: usize,
    /// Memory of the generating process.
    pub true_order: usize,
    pub length: usize,
    pub burn_in: usize,
    /// Spectral radius of the generating process's companion matrix.
    pub stability: f64,
    pub innovation_std: f64,
    pub tts: f64,
    pub horizon: usize,
    /// Polynomial order of the `LS-GF` baseline.
    pub lsgf_order: usize,
}

impl Default for ArParams {
    fn default() -> Self {
        Self {
            order: 3,
            true_order: 3,
            length: 200,
            burn_in: 100,
            stability: 0.95,
            innovation_std: 1.0,
            tts: 0.5,
            horizon: 1,
            lsgf_order: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EfficientParams {
    pub tau1: usize,
    pub tau2: usize,
}

impl Default for EfficientParams {
    fn default() -> Self {
        let d = EfficientConfig::default();
        Self {
            tau1: d.tau1,
            tau2: d.tau2,
        }
    }
}

/// Stationarity weights of RFI-st-sample. Sample covariances commute with S only up
/// to estimation error of order 1/√M, so they get much smaller weights than the
/// solver's exact-covariance ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleStationaryParams {
    pub rho_x: f64,
    pub rho_y: f64,
}

impl Default for SampleStationaryParams {
    fn default() -> Self {
        Self {
            rho_x: 1e-4,
            rho_y: 1e-2,
        }
    }
}

/// One experiment: a grid sweep over seeded realizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: ExperimentId,
    pub methods: Vec<Method>,
    pub sweep: Sweep,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    /// Realizations used with `--fast`.
    #[serde(default = "default_fast_realizations")]
    pub fast_realizations: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub graph: GraphParams,
    #[serde(default)]
    pub perturbation: PerturbationParams,
    #[serde(default)]
    pub signals: SignalParams,
    #[serde(default)]
    pub ar: ArParams,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub efficient: EfficientParams,
    #[serde(default)]
    pub stationary_sample: SampleStationaryParams,
    /// Output directory; relative paths resolve against the working directory.
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_realizations() -> usize {
    64
}

fn default_fast_realizations() -> usize {
    32
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let c: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 || self.fast_realizations == 0 {
            return Err(Error::Config("realizations must be >= 1".into()));
        }
        if self.sweep.values.is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods requested".into()));
        }
        let allowed = self.id.allowed();
        if let Some(m) = self.methods.iter().find(|m| !allowed.contains(m)) {
            return Err(Error::Config(format!(
                "method {} is not available in {:?}",
                m.label(),
                self.id
            )));
        }
        for &v in &self.sweep.values {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!(
                    "grid value {v} must be finite and >= 0"
                )));
            }
            if self.sweep.variable.integral() && (v.fract() != 0.0 || v < 1.0) {
                return Err(Error::Config(format!(
                    "grid value {v} must be a positive integer for {:?}",
                    self.sweep.variable
                )));
            }
        }
        if self.perturbation.kinds.is_empty() {
            return Err(Error::Config("perturbation.kinds is empty".into()));
        }
        if !(0.0..1.0).contains(&self.ar.tts) || self.ar.tts == 0.0 {
            return Err(Error::Config(format!(
                "ar.tts {} must lie in (0, 1)",
                self.ar.tts
            )));
        }
        let st = &self.stationary_sample;
        if !(st.rho_x >= 0.0 && st.rho_x.is_finite() && st.rho_y >= 0.0 && st.rho_y.is_finite()) {
            return Err(Error::Config(
                "stationary_sample weights must be finite and >= 0".into(),
            ));
        }
        self.solver.validate()?;
        Ok(())
    }

    /// Realization count honouring `--fast`.
    pub fn realization_count(&self, fast: bool) -> usize {
        if fast {
            self.fast_realizations.min(self.realizations)
        } else {
            self.realizations
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
id = "filter_order"
methods = ["FI", "RFI"]
[sweep]
variable = "filter_order"
values = [2, 3]
"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(c.realizations, 64);
        assert_eq!(c.realization_count(true), 32);
        assert_eq!(c.graph.n, 20);
        assert_eq!(c.methods, vec![Method::Fi, Method::Rfi]);
        let again = ExperimentConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn bad_configs_are_rejected() {
        let unknown = MINIMAL.replace("\"RFI\"", "\"RFX\"");
        assert!(matches!(
            ExperimentConfig::from_toml_str(&unknown),
            Err(Error::Config(_))
        ));
        let wrong_exp = MINIMAL.replace("\"RFI\"", "\"LS\"");
        assert!(ExperimentConfig::from_toml_str(&wrong_exp).is_err());
        let empty = MINIMAL.replace("[2, 3]", "[]");
        assert!(ExperimentConfig::from_toml_str(&empty).is_err());
        let frac = MINIMAL.replace("[2, 3]", "[2.5]");
        assert!(ExperimentConfig::from_toml_str(&frac).is_err());
        let zero = format!("realizations = 0\n{MINIMAL}");
        assert!(ExperimentConfig::from_toml_str(&zero).is_err());
    }

    #[test]
    fn method_labels_round_trip() {
        for m in ALL_METHODS {
            assert_eq!(Method::parse(m.label()).unwrap(), m);
        }
    }
}
