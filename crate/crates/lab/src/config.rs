//! Experiment configuration, read from TOML.
//!
//! ```toml
//! seed = 7
//!
//! [[experiment]]
//! kind = "ode-sweep"
//! name = "ss"
//! system = "SS2nd"
//! p = 2.0
//! q = 2.0
//! c = 1.0
//! n = 3
//! eps = [1e-2, 1e-3, 1e-4, 3e-4]
//! t_max = 1e12
//! threshold = 1e60
//! tolerance = 0.15
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use blowup_core::comparison_ode::{Form, SystemId};
use blowup_core::critical_curves::{CurveId, SystemKind, SystemSpec};
use blowup_core::metric::{MetricKind, MetricProfile};
use blowup_core::wave_sim::Shape;

use crate::error::{io_err, LabError, LabResult};

fn default_seed() -> u64 {
    20240917
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Output directory; the CLI `--out` flag overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Seed for sampled inputs (Kato instances).
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, rename = "experiment")]
    pub experiments: Vec<Experiment>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            out: None,
            seed: default_seed(),
            experiments: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    CurvesScan(CurvesScan),
    EigenVerify(EigenVerify),
    Lemma22Verify(Lemma22Verify),
    OdeSweep(OdeSweep),
    PdeSweep(PdeSweep),
    KatoGrid(KatoGrid),
    ValidateMetric(ValidateMetric),
}

impl Experiment {
    pub fn name(&self) -> &str {
        match self {
            Experiment::CurvesScan(e) => &e.name,
            Experiment::EigenVerify(e) => &e.name,
            Experiment::Lemma22Verify(e) => &e.name,
            Experiment::OdeSweep(e) => &e.name,
            Experiment::PdeSweep(e) => &e.name,
            Experiment::KatoGrid(e) => &e.name,
            Experiment::ValidateMetric(e) => &e.name,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::CurvesScan(_) => "curves-scan",
            Experiment::EigenVerify(_) => "eigen-verify",
            Experiment::Lemma22Verify(_) => "lemma22-verify",
            Experiment::OdeSweep(_) => "ode-sweep",
            Experiment::PdeSweep(_) => "pde-sweep",
            Experiment::KatoGrid(_) => "kato-grid",
            Experiment::ValidateMetric(_) => "validate-metric",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    /// `flat`, `long_range` or `tabulated`.
    pub profile: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// CSV with header `r,k` for `tabulated`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default = "default_delta0")]
    pub delta0: f64,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
}

fn default_delta0() -> f64 {
    0.5
}

fn default_r_max() -> f64 {
    1e4
}

impl MetricConfig {
    pub fn flat(delta0: f64) -> Self {
        Self {
            profile: "flat".into(),
            delta: None,
            rho: None,
            path: None,
            delta0,
            r_max: default_r_max(),
        }
    }

    pub fn long_range(delta: f64, rho: f64, delta0: f64) -> Self {
        Self {
            profile: "long_range".into(),
            delta: Some(delta),
            rho: Some(rho),
            path: None,
            delta0,
            r_max: default_r_max(),
        }
    }

    /// Builds the profile; `key` locates this table in error messages.
    pub fn build(&self, key: &str) -> LabResult<MetricProfile> {
        let need = |v: Option<f64>, field: &str| {
            v.ok_or_else(|| {
                LabError::config(
                    format!("{key}.{field}"),
                    format!("required for profile `{}`", self.profile),
                )
            })
        };
        let bad = |e: blowup_core::Error| LabError::config(key, e.to_string());
        match self.profile.as_str() {
            "flat" => {
                MetricProfile::new(MetricKind::Flat, self.delta0, 1.0, self.r_max).map_err(bad)
            }
            "long_range" => {
                let (delta, rho) = (need(self.delta, "delta")?, need(self.rho, "rho")?);
                MetricProfile::long_range(delta, rho, self.delta0, self.r_max).map_err(bad)
            }
            "tabulated" => {
                let path = self.path.as_ref().ok_or_else(|| {
                    LabError::config(format!("{key}.path"), "required for profile `tabulated`")
                })?;
                if !path.is_file() {
                    return Err(LabError::config(
                        format!("{key}.path"),
                        format!("{} does not exist", path.display()),
                    ));
                }
                MetricProfile::from_csv(path, self.delta0, self.rho.unwrap_or(1.0)).map_err(bad)
            }
            other => Err(LabError::config(
                format!("{key}.profile"),
                format!("unknown profile `{other}` (flat, long_range, tabulated)"),
            )),
        }
    }
}

/// Hand-computed value of a curve at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpot {
    pub curve: CurveId,
    pub p: f64,
    pub q: f64,
    pub n: usize,
    pub expected: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootCheck {
    pub curve: CurveId,
    pub n: usize,
    pub expected: f64,
    pub tol: f64,
}

/// A value that must appear in the region table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpot {
    pub kind: SystemKind,
    pub p: f64,
    pub q: f64,
    pub expected: f64,
    pub tol: f64,
}

/// Recursion against closed form over a grid of exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterationCheck {
    pub ps: Vec<f64>,
    pub qs: Vec<f64>,
    pub ns: Vec<usize>,
    pub j_max: usize,
    pub eps: f64,
    pub tol: f64,
    /// Also check the hand-unrolled exponent sequences.
    #[serde(default)]
    pub hand_unrolled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesCheck {
    pub p: f64,
    pub q: f64,
    pub weight: f64,
    pub m_const: f64,
    pub expected: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvesScan {
    pub name: String,
    pub n: usize,
    pub c: f64,
    pub p_range: [f64; 2],
    pub q_range: [f64; 2],
    pub count: usize,
    #[serde(default)]
    pub region_spots: Vec<RegionSpot>,
    #[serde(default)]
    pub spots: Vec<CurveSpot>,
    #[serde(default)]
    pub roots: Vec<RootCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<IterationCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<SeriesCheck>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenOracle {
    /// No closed form; only the two-sided bound is checked.
    None,
    /// Flat `n = 3`: `sinh(λr)/(λr)`.
    Sinh,
    /// Flat `n = 2`: `I_0(λr)`.
    BesselI0,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenVerify {
    pub name: String,
    pub metric: MetricConfig,
    pub ns: Vec<usize>,
    pub lambdas: Vec<f64>,
    /// The grid covers `[0, r_scale/λ]`.
    pub r_scale: f64,
    pub cells: usize,
    pub oracle: EigenOracle,
    /// Relative tolerance against the oracle.
    #[serde(default = "default_eig_tol")]
    pub tol: f64,
}

fn default_eig_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lemma22Verify {
    pub name: String,
    pub metric: MetricConfig,
    pub n: usize,
    pub c: f64,
    pub ps: Vec<f64>,
    pub lambda: f64,
    pub r1: f64,
    /// Log-spaced sample times on `[t_min, t_max]`.
    pub t_min: f64,
    pub t_max: f64,
    pub t_count: usize,
    /// Output spacing of the eigenfunction grid.
    pub h: f64,
    /// When set, `|slope - (n-1-(n-1)p/2)|` of the first integral must not exceed it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeSweep {
    pub name: String,
    pub system: SystemId,
    pub p: f64,
    pub q: f64,
    pub c: f64,
    pub n: usize,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub form: Form,
    #[serde(default = "yes")]
    pub seed_forcing: bool,
    pub eps: Vec<f64>,
    pub t_max: f64,
    pub threshold: f64,
    /// Relative tolerance on the fitted slope.
    pub tolerance: f64,
    #[serde(default = "default_decades")]
    pub min_decades: f64,
}

fn yes() -> bool {
    true
}

fn default_decades() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityCheck {
    pub eps: f64,
    pub h: f64,
    pub t_max: f64,
    pub tol: f64,
}

/// Reference problems run alongside a PDE sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeVerify {
    pub manufactured_hs: Vec<f64>,
    pub order_range: [f64; 2],
    pub dalembert_hs: Vec<f64>,
    pub dalembert_t: f64,
    /// Lower bound on the observed d'Alembert order.
    pub dalembert_min_order: f64,
    pub identity: IdentityCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeSweep {
    pub name: String,
    pub system: SystemKind,
    pub p: f64,
    pub q: f64,
    pub c: f64,
    pub n: usize,
    pub metric: MetricConfig,
    pub shape: Shape,
    pub support_radius: f64,
    pub eps: Vec<f64>,
    pub h: f64,
    /// Second resolution for the refinement check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine_h: Option<f64>,
    pub t_max: f64,
    #[serde(default = "default_pde_threshold")]
    pub threshold: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_snapshots")]
    pub snapshots: usize,
    #[serde(default = "default_support_tol")]
    pub support_tol: f64,
    /// Relative tolerance on the fitted slope.
    pub tolerance: f64,
    /// Largest relative change of the slope under refinement.
    #[serde(default = "default_refine_tol")]
    pub refine_tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<PdeVerify>,
}

fn default_pde_threshold() -> f64 {
    blowup_core::wave_sim::DEFAULT_PDE_THRESHOLD
}

fn default_cfl() -> f64 {
    blowup_core::wave_sim::DEFAULT_CFL
}

fn default_snapshots() -> usize {
    20
}

fn default_support_tol() -> f64 {
    1e-2
}

fn default_refine_tol() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgreementScan {
    pub ps: Vec<f64>,
    pub qs: Vec<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KatoGrid {
    pub name: String,
    pub count: usize,
    pub min_margin: f64,
    pub t_max: f64,
    pub threshold: f64,
    /// Overrides the top-level seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Check `(3,3,2,2,2) -> true` and `(6,6,3,3,1) -> false`.
    #[serde(default)]
    pub hand_checks: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agreement: Option<AgreementScan>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateMetric {
    pub name: String,
    pub metric: MetricConfig,
    pub r_end: f64,
    pub cells: usize,
    pub tol: f64,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> LabResult<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks that go beyond the schema: names, ranges, file references.
    pub fn validate(&self) -> LabResult<()> {
        let mut seen = std::collections::BTreeSet::new();
        for (i, e) in self.experiments.iter().enumerate() {
            let key = format!("experiment[{i}]");
            let name = e.name();
            if name.is_empty()
                || !name
                    .chars()
                    .all(|ch| ch.is_ascii_alphanumeric() || ch == '-' || ch == '_')
            {
                return Err(LabError::config(
                    format!("{key}.name"),
                    "names must be non-empty and use only [A-Za-z0-9_-]",
                ));
            }
            if !seen.insert(name.to_string()) {
                return Err(LabError::config(
                    format!("{key}.name"),
                    format!("duplicate experiment name `{name}`"),
                ));
            }
            validate_experiment(e, &key)?;
        }
        Ok(())
    }
}

fn positive(v: f64, key: &str) -> LabResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(LabError::config(
            key,
            format!("{v} must be positive and finite"),
        ))
    }
}

fn nonempty<T>(v: &[T], key: &str) -> LabResult<()> {
    if v.is_empty() {
        Err(LabError::config(key, "must not be empty"))
    } else {
        Ok(())
    }
}

fn spec(kind: SystemKind, p: f64, q: f64, c: f64, n: usize, key: &str) -> LabResult<SystemSpec> {
    SystemSpec::new(kind, p, q, c, n).map_err(|e| LabError::config(key, e.to_string()))
}

fn validate_experiment(e: &Experiment, key: &str) -> LabResult<()> {
    match e {
        Experiment::CurvesScan(x) => {
            spec(SystemKind::SS, x.p_range[0], x.q_range[0], x.c, x.n, key)?;
            if !(x.p_range[0] <= x.p_range[1] && x.q_range[0] <= x.q_range[1]) {
                return Err(LabError::config(
                    format!("{key}.p_range"),
                    "ranges must be [lo, hi]",
                ));
            }
            if x.count == 0 {
                return Err(LabError::config(
                    format!("{key}.count"),
                    "must be at least 1",
                ));
            }
            if let Some(it) = &x.iterations {
                nonempty(&it.ps, &format!("{key}.iterations.ps"))?;
                nonempty(&it.qs, &format!("{key}.iterations.qs"))?;
                nonempty(&it.ns, &format!("{key}.iterations.ns"))?;
                positive(it.eps, &format!("{key}.iterations.eps"))?;
            }
        }
        Experiment::EigenVerify(x) => {
            x.metric.build(&format!("{key}.metric"))?;
            nonempty(&x.ns, &format!("{key}.ns"))?;
            nonempty(&x.lambdas, &format!("{key}.lambdas"))?;
            for l in &x.lambdas {
                positive(*l, &format!("{key}.lambdas"))?;
            }
            positive(x.r_scale, &format!("{key}.r_scale"))?;
            let need_n = match x.oracle {
                EigenOracle::None => None,
                EigenOracle::Sinh => Some(3),
                EigenOracle::BesselI0 => Some(2),
            };
            if let Some(n) = need_n {
                if x.metric.profile != "flat" || x.ns.iter().any(|m| *m != n) {
                    return Err(LabError::config(
                        format!("{key}.oracle"),
                        format!("this oracle needs the flat profile and n = {n}"),
                    ));
                }
            }
        }
        Experiment::Lemma22Verify(x) => {
            x.metric.build(&format!("{key}.metric"))?;
            nonempty(&x.ps, &format!("{key}.ps"))?;
            for p in &x.ps {
                spec(SystemKind::SS, *p, *p, x.c, x.n, key)?;
            }
            positive(x.lambda, &format!("{key}.lambda"))?;
            positive(x.t_min, &format!("{key}.t_min"))?;
            if !(x.t_max > x.t_min) || x.t_count < 2 {
                return Err(LabError::config(
                    format!("{key}.t_max"),
                    "need t_max > t_min and t_count >= 2",
                ));
            }
        }
        Experiment::OdeSweep(x) => {
            spec(system_kind(x.system), x.p, x.q, x.c, x.n, key)?;
            if x.eps.len() < 4 {
                return Err(LabError::config(
                    format!("{key}.eps"),
                    "need at least four values",
                ));
            }
            for v in &x.eps {
                positive(*v, &format!("{key}.eps"))?;
            }
            positive(x.t_max, &format!("{key}.t_max"))?;
            positive(x.threshold, &format!("{key}.threshold"))?;
        }
        Experiment::PdeSweep(x) => {
            spec(x.system, x.p, x.q, x.c, x.n, key)?;
            x.metric.build(&format!("{key}.metric"))?;
            if x.eps.len() < 2 {
                return Err(LabError::config(
                    format!("{key}.eps"),
                    "need at least two values",
                ));
            }
            positive(x.h, &format!("{key}.h"))?;
            positive(x.t_max, &format!("{key}.t_max"))?;
            positive(x.support_radius, &format!("{key}.support_radius"))?;
            if let Some(h) = x.refine_h {
                positive(h, &format!("{key}.refine_h"))?;
            }
        }
        Experiment::KatoGrid(x) => {
            if x.count == 0 {
                return Err(LabError::config(
                    format!("{key}.count"),
                    "must be at least 1",
                ));
            }
            positive(x.t_max, &format!("{key}.t_max"))?;
            positive(x.threshold, &format!("{key}.threshold"))?;
        }
        Experiment::ValidateMetric(x) => {
            x.metric.build(&format!("{key}.metric"))?;
            positive(x.r_end, &format!("{key}.r_end"))?;
            if x.cells == 0 {
                return Err(LabError::config(
                    format!("{key}.cells"),
                    "must be at least 1",
                ));
            }
        }
    }
    Ok(())
}

pub(crate) fn system_kind(id: SystemId) -> SystemKind {
    match id {
        SystemId::SS2nd => SystemKind::SS,
        SystemId::GG1st | SystemId::GGMulti => SystemKind::GG,
        SystemId::SG | SystemId::SGMulti => SystemKind::SG,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_valid() {
        let cfg = ExperimentConfig::from_toml("").unwrap();
        assert!(cfg.experiments.is_empty());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = ExperimentConfig::from_toml("seeed = 3").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("seeed"), "{err}");
    }

    #[test]
    fn missing_metric_field_points_at_key() {
        let text = r#"
[[experiment]]
kind = "validate-metric"
name = "m"
r_end = 10.0
cells = 10
tol = 1.0
metric = { profile = "long_range", delta = 0.1 }
"#;
        let err = ExperimentConfig::from_toml(text).unwrap_err();
        assert!(
            err.to_string().contains("experiment[0].metric.rho"),
            "{err}"
        );
    }

    #[test]
    fn duplicate_names_rejected() {
        let text = r#"
[[experiment]]
kind = "kato-grid"
name = "k"
count = 1
min_margin = 1.0
t_max = 10.0
threshold = 1e10

[[experiment]]
kind = "kato-grid"
name = "k"
count = 1
min_margin = 1.0
t_max = 10.0
threshold = 1e10
"#;
        let err = ExperimentConfig::from_toml(text).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn missing_tabulated_file_rejected() {
        let m = MetricConfig {
            profile: "tabulated".into(),
            path: Some("/nonexistent/k.csv".into()),
            ..MetricConfig::flat(0.5)
        };
        assert!(matches!(m.build("metric"), Err(LabError::Config { .. })));
    }

    #[test]
    fn roundtrip_through_toml() {
        for name in crate::presets::names() {
            let cfg = crate::presets::preset(name).unwrap();
            let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
            assert_eq!(back, cfg, "{name}");
        }
    }
}
