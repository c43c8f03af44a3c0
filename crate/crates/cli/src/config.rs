//! Experiment configuration (TOML).

use std::path::PathBuf;

use aaklab::catalog::{AnalyticFunctionSpec, FunctionKind, DEFAULT_MARGIN};
use aaklab::cut::CutOptions;
use aaklab::diagnostics::{BoundTolerances, GridSpec};
use aaklab::hankel::SectionPolicy;
use aaklab::num::C64;
use aaklab::rational::SchemeKind;
use serde::{Deserialize, Serialize};

#[derive(Debug)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

fn bad(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { path: path.to_string(), message: message.into() }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FunctionConfig {
    pub kind: String,
    #[serde(default)]
    pub branch_points: Vec<[f64; 2]>,
    #[serde(default)]
    pub polar_points: Vec<[f64; 2]>,
    #[serde(default)]
    pub parameters: Vec<[f64; 2]>,
    #[serde(default)]
    pub leading: Option<[f64; 2]>,
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_margin() -> f64 {
    DEFAULT_MARGIN
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n_min: usize,
    pub n_max: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SectionConfig {
    pub min_size: usize,
    pub per_degree: usize,
    pub defect_ratio: f64,
    pub max_raises: usize,
    pub window_factor: usize,
}

impl Default for SectionConfig {
    fn default() -> Self {
        let p = SectionPolicy::default();
        SectionConfig {
            min_size: p.min_size,
            per_degree: p.per_degree,
            defect_ratio: p.defect_ratio,
            max_raises: p.max_raises,
            window_factor: p.window_factor,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Samples on the unit circle for error traces (power of two).
    pub error_grid: usize,
    pub spacing: f64,
    pub jitter: f64,
    pub margin: f64,
    pub max_radius: f64,
    pub mask_budget: f64,
    /// Degree of the capacity map; defaults to `n_max`.
    pub capmap_n: Option<usize>,
    /// Cells per arc of the equilibrium reference measure.
    pub reference_cells: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        let g = GridSpec::default();
        GridConfig {
            error_grid: 1024,
            spacing: g.spacing,
            jitter: g.jitter,
            margin: g.margin,
            max_radius: g.max_radius,
            mask_budget: g.mask_budget,
            capmap_n: None,
            reference_cells: 2048,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub walsh: f64,
    pub optimal: f64,
    pub circularity: f64,
    pub kolmogorov: f64,
    pub median_dev: f64,
    pub p90_dev: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let b = BoundTolerances::default();
        Tolerances { walsh: b.walsh, optimal: b.optimal, circularity: 1.05, kolmogorov: 0.15, median_dev: 0.05, p90_dev: 0.15 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CutConfig {
    pub margin: f64,
    pub nodes_per_arc: usize,
    pub search_nodes: usize,
}

impl Default for CutConfig {
    fn default() -> Self {
        let o = CutOptions::default();
        CutConfig { margin: o.margin, nodes_per_arc: o.nodes_per_arc, search_nodes: o.search_nodes }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RetentionConfig {
    /// Region centres; defaults to the polar points of the function.
    pub centers: Vec<[f64; 2]>,
    pub radius: f64,
}

impl Default for RetentionConfig {
    fn default() -> Self {
        RetentionConfig { centers: Vec::new(), radius: 0.05 }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F64,
    Mp,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub function: FunctionConfig,
    /// `aak`, `interpolation:<balayage|uniform|pade>`, `retention`.
    pub generators: Vec<String>,
    pub sweep: SweepConfig,
    #[serde(default)]
    pub section: SectionConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub cut: CutConfig,
    #[serde(default)]
    pub retention: RetentionConfig,
    #[serde(default = "default_precision")]
    pub precision: Precision,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default = "default_true")]
    pub cache: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_precision() -> Precision {
    Precision::Mp
}

fn default_output() -> PathBuf {
    PathBuf::from("aaklab-out")
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    Aak,
    Interpolation(SchemeKind),
    Retention,
}

impl Generator {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s.trim() {
            "aak" => Ok(Generator::Aak),
            "retention" => Ok(Generator::Retention),
            other => match other.strip_prefix("interpolation:") {
                Some(k) => SchemeKind::parse(k).map(Generator::Interpolation).map_err(|e| e.to_string()),
                None => Err(format!("unknown generator `{other}`")),
            },
        }
    }

    pub fn label(&self) -> String {
        match self {
            Generator::Aak => "aak".into(),
            Generator::Retention => "retention".into(),
            Generator::Interpolation(k) => format!("interpolation_{}", k.name()),
        }
    }
}

fn complex(v: &[[f64; 2]]) -> Vec<C64> {
    v.iter().map(|p| C64::new(p[0], p[1])).collect()
}

/// A validated configuration with the derived core objects.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub spec: AnalyticFunctionSpec,
    pub generators: Vec<Generator>,
}

impl Experiment {
    pub fn ns(&self) -> Vec<usize> {
        (self.config.sweep.n_min..=self.config.sweep.n_max).collect()
    }

    pub fn policy(&self) -> SectionPolicy {
        let s = &self.config.section;
        SectionPolicy {
            min_size: s.min_size,
            per_degree: s.per_degree,
            defect_ratio: s.defect_ratio,
            max_raises: s.max_raises,
            window_factor: s.window_factor,
        }
    }

    pub fn grid_spec(&self) -> GridSpec {
        let g = &self.config.grid;
        GridSpec {
            spacing: g.spacing,
            jitter: g.jitter,
            margin: g.margin,
            max_radius: g.max_radius,
            mask_budget: g.mask_budget,
            seed: self.config.seed,
        }
    }

    pub fn cut_options(&self) -> CutOptions {
        let c = &self.config.cut;
        CutOptions { margin: c.margin, nodes_per_arc: c.nodes_per_arc, search_nodes: c.search_nodes, ..CutOptions::default() }
    }

    pub fn bound_tolerances(&self) -> BoundTolerances {
        BoundTolerances { walsh: self.config.tolerances.walsh, optimal: self.config.tolerances.optimal }
    }

    pub fn retention_centers(&self) -> Vec<C64> {
        if self.config.retention.centers.is_empty() {
            self.spec.polar_points.clone()
        } else {
            complex(&self.config.retention.centers)
        }
    }

    pub fn capmap_n(&self) -> usize {
        self.config.grid.capmap_n.unwrap_or(self.config.sweep.n_max)
    }

    /// Functions with a finite polar singular set (no branch points).
    pub fn polar_class(&self) -> bool {
        matches!(self.spec.kind, FunctionKind::RationalPoleSum | FunctionKind::EssentialExp)
    }
}

pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
    toml::from_str(text).map_err(|e| {
        let message = e.message().to_string();
        let path = e.span().map(|s| format!("byte {}", s.start)).unwrap_or_default();
        bad(&path, message)
    })
}

pub fn validate(config: ExperimentConfig) -> Result<Experiment, ConfigError> {
    let f = &config.function;
    let kind: FunctionKind = f.kind.parse().map_err(|e: aaklab::LabError| bad("function.kind", e.to_string()))?;
    let leading = match f.leading {
        Some(l) => C64::new(l[0], l[1]),
        None => match kind {
            FunctionKind::RationalPoleSum | FunctionKind::EssentialExp => complex(&f.parameters).iter().sum(),
            FunctionKind::CustomCoeffStream => complex(&f.parameters).first().copied().unwrap_or_default(),
            _ => C64::new(1.0, 0.0),
        },
    };
    let spec = AnalyticFunctionSpec::new(kind, complex(&f.branch_points), complex(&f.polar_points), complex(&f.parameters), leading, f.margin)
        .map_err(|e| bad("function", e.to_string()))?;
    if config.sweep.n_min > config.sweep.n_max {
        return Err(bad("sweep", format!("empty n range {}..={}", config.sweep.n_min, config.sweep.n_max)));
    }
    if config.sweep.n_min == 0 {
        return Err(bad("sweep.n_min", "degrees start at 1"));
    }
    if config.generators.is_empty() {
        return Err(bad("generators", "no generators"));
    }
    let mut generators = Vec::new();
    for (i, g) in config.generators.iter().enumerate() {
        let gen = Generator::parse(g).map_err(|e| bad(&format!("generators[{i}]"), e))?;
        if generators.contains(&gen) {
            return Err(bad(&format!("generators[{i}]"), format!("duplicate generator `{g}`")));
        }
        generators.push(gen);
    }
    let t = &config.tolerances;
    for (name, v) in [
        ("walsh", t.walsh),
        ("optimal", t.optimal),
        ("circularity", t.circularity),
        ("kolmogorov", t.kolmogorov),
        ("median_dev", t.median_dev),
        ("p90_dev", t.p90_dev),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(bad(&format!("tolerances.{name}"), format!("must be positive, got {v}")));
        }
    }
    let s = &config.section;
    if s.min_size == 0 || s.per_degree == 0 || s.window_factor < 2 || !(s.defect_ratio > 0.0) {
        return Err(bad("section", "sizes must be positive, window_factor >= 2, defect_ratio > 0"));
    }
    let g = &config.grid;
    if g.error_grid < 64 || !g.error_grid.is_power_of_two() {
        return Err(bad("grid.error_grid", "must be a power of two >= 64"));
    }
    if g.reference_cells == 0 {
        return Err(bad("grid.reference_cells", "must be positive"));
    }
    let exp = Experiment { config: config.clone(), spec, generators };
    exp.grid_spec().validate().map_err(|e| bad("grid", e.to_string()))?;
    if !(config.cut.margin > 0.0 && config.cut.margin < 0.5) || config.cut.nodes_per_arc < 8 || config.cut.search_nodes < 8 {
        return Err(bad("cut", "margin in (0, 0.5), at least 8 nodes per arc"));
    }
    if exp.generators.contains(&Generator::Retention) {
        if !exp.polar_class() {
            return Err(bad("generators", format!("retention needs a function with polar singularities, not {}", kind)));
        }
        if !(config.retention.radius > 0.0 && config.retention.radius < 0.5) {
            return Err(bad("retention.radius", "must lie in (0, 0.5)"));
        }
    }
    if let Some(n) = g.capmap_n {
        if !(config.sweep.n_min..=config.sweep.n_max).contains(&n) {
            return Err(bad("grid.capmap_n", "must lie in the sweep range"));
        }
    }
    if kind == FunctionKind::CustomCoeffStream && exp.generators.iter().any(|g| !matches!(g, Generator::Aak)) {
        return Err(bad("generators", "coefficient streams support only aak"));
    }
    Ok(exp)
}

pub fn load(text: &str) -> Result<Experiment, ConfigError> {
    validate(parse(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const SAMPLE: &str = r#"
generators = ["aak", "interpolation:balayage"]
seed = 3

[function]
kind = "two_branch_sqrt"
branch_points = [[0.6, 0.0], [-0.6, 0.0]]

[sweep]
n_min = 1
n_max = 12
"#;

    #[test]
    fn sample_parses_with_defaults() {
        let e = load(SAMPLE).unwrap();
        assert_eq!(e.generators, vec![Generator::Aak, Generator::Interpolation(SchemeKind::BalayageQuantiles)]);
        assert_eq!(e.ns().len(), 12);
        assert_eq!(e.config.precision, Precision::Mp);
        assert_eq!(e.capmap_n(), 12);
        assert_eq!(e.grid_spec().seed, 3);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = SAMPLE.replace("seed = 3", "sede = 3");
        assert!(parse(&text).unwrap_err().message.contains("sede"));
        let text = SAMPLE.replace("n_max = 12", "n_max = 12\nn_step = 2");
        assert!(parse(&text).is_err());
    }

    #[test]
    fn semantic_errors_name_their_path() {
        let empty = SAMPLE.replace("n_min = 1", "n_min = 20");
        assert_eq!(load(&empty).unwrap_err().path, "sweep");
        let gen = SAMPLE.replace("\"aak\",", "\"aak\", \"retention\",");
        assert_eq!(load(&gen).unwrap_err().path, "generators");
        let tol = format!("{SAMPLE}\n[tolerances]\noptimal = -1.0\n");
        assert_eq!(load(&tol).unwrap_err().path, "tolerances.optimal");
        let bad_gen = SAMPLE.replace("interpolation:balayage", "interpolation:leja");
        assert_eq!(load(&bad_gen).unwrap_err().path, "generators[1]");
        let kind = SAMPLE.replace("two_branch_sqrt", "three_branch_sqrt");
        assert_eq!(load(&kind).unwrap_err().path, "function.kind");
    }

    #[test]
    fn retention_accepts_polar_functions() {
        let text = r#"
generators = ["aak", "retention"]
[function]
kind = "essential_exp"
polar_points = [[0.3, 0.0]]
parameters = [[1.0, 0.0]]
[sweep]
n_min = 5
n_max = 10
"#;
        let e = load(text).unwrap();
        assert!(e.polar_class());
        assert_eq!(e.retention_centers(), vec![C64::new(0.3, 0.0)]);
    }
}
