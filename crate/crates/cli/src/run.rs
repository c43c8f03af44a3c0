//! Stage orchestration: cut, per-n sweeps, rates, diagnostics, summary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use aaklab::approximant::{error_on_circle, ErrorTrace, MeromorphicApproximant};
use aaklab::catalog::FunctionKind;
use aaklab::cut::{geodesic_cut, tripod_cut, CutSolution};
use aaklab::diagnostics::{
    bound_checks, capacity_map, capacity_map_table, diagnostics_schema, diagnostics_table,
    equilibrium_reference, periodic_rate, symmetry_order, weak_star_distance, DiagnosticsRow, RateSeries,
};
use aaklab::doc::KvDoc;
use aaklab::hankel::{aak_from_system, prepare_aak, AakSetup};
use aaklab::num::{lower, Real, C64};
use aaklab::potential::DiscreteMeasure;
use aaklab::rational::{balayage_scheme, balayage_scheme_of, interpolate, retain_singular_part, InterpolationScheme, Region, SchemeKind};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::{cache_key, write_atomic, Cache, Lookup};
use crate::config::{Experiment, Generator};

const STAGE_VERSION: u32 = 1;

#[derive(Debug)]
pub enum RunError {
    Stage { stage: String, path: String, message: String },
    Io(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Stage { stage, path, message } => write!(f, "stage {stage} ({path}): {message}"),
            RunError::Io(m) => write!(f, "io: {m}"),
        }
    }
}

fn stage_err(stage: impl Into<String>, path: impl Into<String>, e: impl ToString) -> RunError {
    RunError::Stage { stage: stage.into(), path: path.into(), message: e.to_string() }
}

fn io_err(e: std::io::Error) -> RunError {
    RunError::Io(e.to_string())
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PoleRow {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
    pub residue_re: f64,
    pub residue_im: f64,
}

/// Result of one generator at one degree.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct NRecord {
    pub generator: String,
    pub n: usize,
    /// `s_n` for AAK, the sup error on the circle otherwise.
    pub value: f64,
    pub error_sup: f64,
    pub error_inf: f64,
    pub trusted: bool,
    pub poles: Vec<PoleRow>,
    pub spurious: usize,
    /// Retention only: every kept pole lies in the region.
    pub in_region: Option<bool>,
    pub warnings: Vec<String>,
}

impl NRecord {
    fn counting_measure(&self) -> Option<DiscreteMeasure> {
        let points = self.poles.iter().map(|p| C64::new(p.re, p.im)).collect();
        let weights = self.poles.iter().map(|p| p.multiplicity as f64 / self.n as f64).collect();
        DiscreteMeasure::new(points, weights).ok()
    }

    fn pole_table(&self) -> String {
        let mut s = String::from("re,im,multiplicity,residue_re,residue_im\n");
        for p in &self.poles {
            let _ = writeln!(s, "{:.17e},{:.17e},{},{:.17e},{:.17e}", p.re, p.im, p.multiplicity, p.residue_re, p.residue_im);
        }
        s
    }
}

fn record<R: Real>(gen: &Generator, n: usize, m: &MeromorphicApproximant<R>, trace: &ErrorTrace, value: f64, trusted: bool) -> NRecord {
    let poles = m
        .poles
        .iter()
        .map(|p| {
            let z = lower(&p.location);
            let r = p.principal.first().map(lower).unwrap_or_default();
            PoleRow { re: z.re, im: z.im, multiplicity: p.multiplicity, residue_re: r.re, residue_im: r.im }
        })
        .collect();
    NRecord {
        generator: gen.label(),
        n,
        value,
        error_sup: trace.sup,
        error_inf: trace.inf,
        trusted,
        poles,
        spurious: m.spurious.len(),
        in_region: None,
        warnings: m.warnings.clone(),
    }
}

#[derive(Serialize)]
struct SweepInput<'a> {
    stage: &'a str,
    version: u32,
    function: &'a crate::config::FunctionConfig,
    precision: crate::config::Precision,
    n: usize,
    error_grid: usize,
    section: Option<(&'a crate::config::SectionConfig, usize)>,
    cut: Option<&'a crate::config::CutConfig>,
    retention: Option<&'a crate::config::RetentionConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CapmapSummary {
    pub generator: String,
    pub n: usize,
    pub points: usize,
    pub median_dev: f64,
    pub p90_dev: f64,
    pub masked_fraction: f64,
    pub cover_bound: f64,
    pub exact_recovery: bool,
    pub capacity: f64,
    pub table: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorSummary {
    pub generator: String,
    pub degrees: Vec<usize>,
    pub fitted_limit: Option<f64>,
    pub fit_residual: Option<f64>,
    pub window: Option<(usize, usize)>,
    pub trend_to_zero: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub config_key: String,
    pub function: String,
    pub status: String,
    pub failed_stage: Option<String>,
    pub capacity: Option<f64>,
    pub walsh_bound: Option<f64>,
    pub optimal_rate: Option<f64>,
    pub generators: Vec<GeneratorSummary>,
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failed: usize,
}

pub struct Runner<'a> {
    pub exp: &'a Experiment,
    pub out: PathBuf,
    pub cache: Cache,
    pool: rayon::ThreadPool,
}

fn log(line: &str) {
    eprintln!("{line}");
}

impl<'a> Runner<'a> {
    pub fn new(exp: &'a Experiment, out: PathBuf, cache_on: bool, jobs: usize) -> Result<Self, RunError> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().map_err(|e| RunError::Io(e.to_string()))?;
        let cache = Cache::new(out.join(".cache"), cache_on);
        Ok(Runner { exp, out, cache, pool })
    }

    fn write(&self, rel: impl AsRef<Path>, text: &str) -> Result<(), RunError> {
        write_atomic(&self.out.join(rel), text.as_bytes()).map_err(io_err)
    }

    pub fn config_key(&self) -> String {
        cache_key(&self.exp.config)
    }

    /// Extremal cut for branched functions; `None` for polar ones.
    pub fn cut(&self) -> Result<Option<CutSolution>, RunError> {
        let spec = &self.exp.spec;
        let b = &spec.branch_points;
        let opts = self.exp.cut_options();
        #[derive(Serialize)]
        struct CutInput<'a> {
            stage: &'a str,
            version: u32,
            function: &'a crate::config::FunctionConfig,
            cut: &'a crate::config::CutConfig,
        }
        let input = CutInput { stage: "cut", version: STAGE_VERSION, function: &self.exp.config.function, cut: &self.exp.config.cut };
        let solve = || -> aaklab::Result<Option<CutSolution>> {
            match spec.kind {
                FunctionKind::TwoBranchSqrt => geodesic_cut(b[0], b[1], &opts).map(Some),
                FunctionKind::ThreeBranchCuberoot => tripod_cut(b[0], b[1], b[2], &opts).map(Some),
                _ => Ok(None),
            }
        };
        if spec.kind.order() == 1 {
            return Ok(None);
        }
        let cached = match self.cache.get::<_, String>("cut", &input) {
            Lookup::Hit(text) => match KvDoc::parse(&text).and_then(|d| CutSolution::from_doc(&d)) {
                Ok(sol) => {
                    log("cache hit: cut");
                    Some(sol)
                }
                Err(e) => {
                    log(&format!("cache entry unreadable: cut ({e}); recomputing"));
                    None
                }
            },
            Lookup::Collision => {
                log("cache collision: cut; recomputing");
                None
            }
            Lookup::Miss => None,
        };
        let sol = match cached {
            Some(sol) => sol,
            None => {
                log("computing: cut");
                let sol = self.pool.install(solve).map_err(|e| stage_err("cut", "function.branch_points", e))?.expect("branched");
                self.cache.put("cut", &input, &sol.to_doc().render()).map_err(io_err)?;
                sol
            }
        };
        self.write("cut.txt", &sol.to_doc().render())?;
        Ok(Some(sol))
    }

    fn sweep_input(&self, gen: &Generator, n: usize) -> SweepInput<'_> {
        let c = &self.exp.config;
        let needs_setup = matches!(gen, Generator::Aak | Generator::Retention);
        SweepInput {
            stage: match gen {
                Generator::Aak => "aak",
                Generator::Retention => "retention",
                Generator::Interpolation(SchemeKind::BalayageQuantiles) => "interpolation_balayage",
                Generator::Interpolation(SchemeKind::Uniform) => "interpolation_uniform",
                Generator::Interpolation(SchemeKind::AllAtInfinity) => "interpolation_pade",
            },
            version: STAGE_VERSION,
            function: &c.function,
            precision: c.precision,
            n,
            error_grid: c.grid.error_grid,
            section: needs_setup.then_some((&c.section, c.sweep.n_max)),
            cut: matches!(gen, Generator::Interpolation(SchemeKind::BalayageQuantiles)).then_some(&c.cut),
            retention: matches!(gen, Generator::Retention).then_some(&c.retention),
        }
    }

    fn scheme(&self, kind: SchemeKind, n: usize, cut: Option<&CutSolution>) -> InterpolationScheme {
        match kind {
            SchemeKind::Uniform => InterpolationScheme::uniform(n),
            SchemeKind::AllAtInfinity => InterpolationScheme::pade(n),
            SchemeKind::BalayageQuantiles => match cut {
                Some(c) => balayage_scheme(c, n),
                None => {
                    let pts = &self.exp.spec.polar_points;
                    let w = vec![1.0 / pts.len() as f64; pts.len()];
                    let mu = DiscreteMeasure::new(pts.clone(), w).unwrap_or_else(|_| DiscreteMeasure::dirac(C64::new(0.0, 0.0)));
                    balayage_scheme_of(&mu, n)
                }
            },
        }
    }

    fn compute_n<R: Real>(&self, gen: &Generator, n: usize, setup: Option<&AakSetup<R>>, cut: Option<&CutSolution>) -> aaklab::Result<NRecord> {
        let spec = &self.exp.spec;
        let grid = self.exp.config.grid.error_grid;
        match gen {
            Generator::Aak => {
                let s = setup.expect("prepared");
                let (m, trace) = aak_from_system(spec, &s.window, &s.section, &s.system, n, grid)?;
                Ok(record(gen, n, &m, &trace, s.system.values[n].to_f64(), s.system.trusted(n)))
            }
            Generator::Retention => {
                let s = setup.expect("prepared");
                let (m, _) = aak_from_system(spec, &s.window, &s.section, &s.system, n, grid)?;
                let mut region = Region::around(&self.exp.retention_centers(), self.exp.config.retention.radius)?;
                let kept = retain_singular_part(&m, &mut region)?;
                let trace = error_on_circle(spec, &kept, grid)?;
                let mut r = record(gen, n, &kept, &trace, trace.sup, trace.sup > 0.0);
                r.in_region = Some(kept.pole_locations().iter().all(|p| region.contains(*p) == Some(true)));
                Ok(r)
            }
            Generator::Interpolation(kind) => {
                let m = interpolate::<R>(spec, &self.scheme(*kind, n, cut))?;
                let trace = error_on_circle(spec, &m, grid)?;
                Ok(record(gen, n, &m, &trace, trace.sup, trace.sup > 0.0))
            }
        }
    }

    /// Records for every degree of the sweep, cached and written per degree.
    pub fn sweep<R: Real>(&self, gi: usize, cut: Option<&CutSolution>) -> Result<Vec<NRecord>, RunError> {
        let gen = &self.exp.generators[gi];
        let label = gen.label();
        let path = format!("generators[{gi}]");
        let ns = self.exp.ns();
        let mut have: Vec<Option<NRecord>> = Vec::with_capacity(ns.len());
        for &n in &ns {
            match self.cache.get::<_, NRecord>("sweep", &self.sweep_input(gen, n)) {
                Lookup::Hit(r) => {
                    log(&format!("cache hit: {label} n={n}"));
                    have.push(Some(r));
                }
                Lookup::Collision => {
                    log(&format!("cache collision: {label} n={n}; recomputing"));
                    have.push(None);
                }
                Lookup::Miss => have.push(None),
            }
        }
        let missing: Vec<usize> = ns.iter().zip(&have).filter(|(_, h)| h.is_none()).map(|(n, _)| *n).collect();
        let mut results: Vec<(usize, Result<NRecord, RunError>)> = Vec::new();
        if !missing.is_empty() {
            let setup = if matches!(gen, Generator::Aak | Generator::Retention) {
                log(&format!("computing: {label} singular system (n_max={})", self.exp.config.sweep.n_max));
                let s = self
                    .pool
                    .install(|| prepare_aak::<R>(&self.exp.spec, self.exp.config.sweep.n_max, &self.exp.policy()))
                    .map_err(|e| stage_err(format!("{label} prepare"), "section", e))?;
                for w in &s.warnings {
                    log(&format!("warning: {label}: {w}"));
                }
                Some(s)
            } else {
                None
            };
            results = self.pool.install(|| {
                missing
                    .par_iter()
                    .map(|&n| {
                        let r = self
                            .compute_n::<R>(gen, n, setup.as_ref(), cut)
                            .map_err(|e| stage_err(format!("{label} n={n}"), path.clone(), e))
                            .and_then(|rec| {
                                self.write(format!("poles/{label}/n{n:03}.csv"), &rec.pole_table())?;
                                self.cache.put("sweep", &self.sweep_input(gen, n), &rec).map_err(io_err)?;
                                log(&format!("computed: {label} n={n} value={:.6e}", rec.value));
                                Ok(rec)
                            });
                        (n, r)
                    })
                    .collect()
            });
        }
        let mut by_n: std::collections::BTreeMap<usize, Result<NRecord, RunError>> = results.into_iter().collect();
        let mut out = Vec::with_capacity(ns.len());
        let mut progress = String::from("n,status\n");
        let mut failure = None;
        for (n, h) in ns.iter().zip(have) {
            let r = match h {
                Some(r) => {
                    self.write(format!("poles/{label}/n{n:03}.csv"), &r.pole_table())?;
                    Ok(r)
                }
                None => by_n.remove(n).expect("computed"),
            };
            match r {
                Ok(rec) if failure.is_none() => {
                    let _ = writeln!(progress, "{n},complete");
                    out.push(rec);
                }
                Ok(_) => {
                    let _ = writeln!(progress, "{n},computed_after_failure");
                }
                Err(e) => {
                    let _ = writeln!(progress, "{n},failed");
                    if failure.is_none() {
                        failure = Some(e);
                    }
                }
            }
        }
        self.write(format!("poles/{label}/progress.csv"), &progress)?;
        match failure {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }

    pub fn capmap<R: Real>(&self, cut: &CutSolution) -> Result<Option<CapmapSummary>, RunError> {
        let Some(gi) = self.exp.generators.iter().position(|g| !matches!(g, Generator::Retention)) else {
            return Ok(None);
        };
        let gen = &self.exp.generators[gi];
        let n = self.exp.capmap_n();
        let label = gen.label();
        #[derive(Serialize)]
        struct CapInput<'a> {
            sweep: SweepInput<'a>,
            grid: &'a crate::config::GridConfig,
            seed: u64,
            cut: &'a crate::config::CutConfig,
        }
        let input = CapInput { sweep: self.sweep_input(gen, n), grid: &self.exp.config.grid, seed: self.exp.config.seed, cut: &self.exp.config.cut };
        let summary = match self.cache.get::<_, CapmapSummary>("capmap", &input) {
            Lookup::Hit(s) => {
                log(&format!("cache hit: capmap {label} n={n}"));
                s
            }
            _ => {
                log(&format!("computing: capmap {label} n={n}"));
                let stage = format!("capmap {label} n={n}");
                let s = self.pool.install(|| -> aaklab::Result<CapmapSummary> {
                    let spec = &self.exp.spec;
                    let m: MeromorphicApproximant<R> = match gen {
                        Generator::Aak => {
                            let s = prepare_aak::<R>(spec, n, &self.exp.policy())?;
                            aak_from_system(spec, &s.window, &s.section, &s.system, n, self.exp.config.grid.error_grid)?.0
                        }
                        Generator::Interpolation(kind) => interpolate::<R>(spec, &self.scheme(*kind, n, Some(cut)))?,
                        Generator::Retention => unreachable!(),
                    };
                    let map = capacity_map(spec, &m, n, cut, &self.exp.grid_spec())?;
                    Ok(CapmapSummary {
                        generator: label.clone(),
                        n,
                        points: map.points.len(),
                        median_dev: map.median_dev,
                        p90_dev: map.p90_dev,
                        masked_fraction: map.masked_fraction,
                        cover_bound: map.cover_bound,
                        exact_recovery: map.exact_recovery,
                        capacity: map.capacity,
                        table: capacity_map_table(&map),
                    })
                });
                let s = s.map_err(|e| stage_err(stage, "grid", e))?;
                self.cache.put("capmap", &input, &s).map_err(io_err)?;
                s
            }
        };
        self.write(format!("capmap_{label}_n{n:03}.csv"), &summary.table)?;
        Ok(Some(summary))
    }

    pub fn fit(&self, recs: &[NRecord]) -> Option<RateSeries> {
        let pts: Vec<(usize, f64)> = recs.iter().filter(|r| r.trusted).map(|r| (r.n, r.value)).collect();
        let spec = &self.exp.spec;
        let singular: Vec<C64> = spec.branch_points.iter().chain(&spec.polar_points).copied().collect();
        periodic_rate(&pts, symmetry_order(&singular, 1e-6), 0.0).ok()
    }

    pub fn write_rates(&self, all: &[Vec<NRecord>]) -> Result<Vec<Option<RateSeries>>, RunError> {
        let mut s = String::from("generator,n,value,log_value,nth_root,error_sup,trusted\n");
        let mut plot = String::from("x,y,series\n");
        let mut fits = Vec::new();
        for recs in all {
            for r in recs {
                let _ = writeln!(
                    s,
                    "{},{},{:.17e},{:.17e},{:.17e},{:.17e},{}",
                    r.generator,
                    r.n,
                    r.value,
                    r.value.ln(),
                    r.value.powf(1.0 / r.n as f64),
                    r.error_sup,
                    r.trusted
                );
                let _ = writeln!(plot, "{},{:.17e},{}", r.n, r.value.powf(1.0 / r.n as f64), r.generator);
            }
            fits.push(self.fit(recs));
        }
        self.write("rates.csv", &s)?;
        self.write(
            "rates.schema.csv",
            "column,type,description\ngenerator,text,approximant family\nn,integer,degree\nvalue,real,s_n for aak or sup error on the circle\nlog_value,real,natural log of value\nnth_root,real,value^(1/n)\nerror_sup,real,sup of |f - M_n| on the error grid\ntrusted,bool,value above the noise floor\n",
        )?;
        self.write("plot_rates.csv", &plot)?;
        Ok(fits)
    }

    /// Everything: cut, sweeps, rates, diagnostics, capacity map, summary.
    pub fn run<R: Real>(&self) -> Result<Summary, RunError> {
        let mut summary = Summary {
            config_key: self.config_key(),
            function: self.exp.spec.kind.name().to_string(),
            status: "complete".into(),
            failed_stage: None,
            capacity: None,
            walsh_bound: None,
            optimal_rate: None,
            generators: Vec::new(),
            checks: Vec::new(),
            passed: 0,
            failed: 0,
        };
        let result = self.run_into::<R>(&mut summary);
        if let Err(e) = &result {
            summary.status = "failed".into();
            summary.failed_stage = Some(e.to_string());
        }
        summary.passed = summary.checks.iter().filter(|c| c.pass).count();
        summary.failed = summary.checks.len() - summary.passed;
        self.write_summary(&summary)?;
        result.map(|_| summary)
    }

    fn write_summary(&self, summary: &Summary) -> Result<(), RunError> {
        let json = serde_json::to_string_pretty(summary).expect("json") + "\n";
        self.write("summary.json", &json)?;
        let mut s = String::from("check,pass,detail\n");
        for c in &summary.checks {
            let _ = writeln!(s, "{},{},\"{}\"", c.name, c.pass, c.detail.replace('"', "'"));
        }
        self.write("checks.csv", &s)
    }

    fn run_into<R: Real>(&self, summary: &mut Summary) -> Result<(), RunError> {
        let tol = &self.exp.config.tolerances;
        let cut = self.cut()?;
        if let Some(c) = &cut {
            let cap = c.capacity();
            summary.capacity = Some(cap);
            summary.walsh_bound = Some((-1.0 / cap).exp());
            summary.optimal_rate = Some((-2.0 / cap).exp());
        }
        let mut all = Vec::new();
        for gi in 0..self.exp.generators.len() {
            match self.sweep::<R>(gi, cut.as_ref()) {
                Ok(recs) => all.push(recs),
                Err(e) => {
                    self.write_rates(&all)?;
                    return Err(e);
                }
            }
        }
        let fits = self.write_rates(&all)?;
        let reference = cut.as_ref().map(|c| equilibrium_reference(c, self.exp.config.grid.reference_cells));
        let capmap = match &cut {
            Some(c) => self.capmap::<R>(c)?,
            None => None,
        };
        let mut schema_written = false;
        for ((gen, recs), fit) in self.exp.generators.iter().zip(&all).zip(&fits) {
            let label = gen.label();
            summary.generators.push(GeneratorSummary {
                generator: label.clone(),
                degrees: recs.iter().map(|r| r.n).collect(),
                fitted_limit: fit.as_ref().map(|f| f.limit),
                fit_residual: fit.as_ref().map(|f| f.residual),
                window: fit.as_ref().map(|f| f.window),
                trend_to_zero: fit.as_ref().map(|f| f.trend_to_zero),
            });
            let mut rows = Vec::new();
            let mut last_k = None;
            for r in recs {
                let mut row = DiagnosticsRow { n: r.n, value: Some(r.value), fitted_limit: fit.as_ref().map(|f| f.limit), ..Default::default() };
                if let (Some(c), Some(refm), Some(emp)) = (&cut, &reference, r.counting_measure()) {
                    if !matches!(gen, Generator::Retention) && !emp.is_empty() {
                        let d = self.pool.install(|| weak_star_distance(&emp, refm, c));
                        row.kolmogorov = Some(d.kolmogorov);
                        row.potential_sup = Some(d.potential_sup);
                        last_k = Some((r.n, d.kolmogorov));
                    }
                }
                if let Some(cm) = &capmap {
                    if cm.generator == label && cm.n == r.n {
                        row.median_dev = Some(cm.median_dev);
                        row.p90_dev = Some(cm.p90_dev);
                        row.masked_fraction = Some(cm.masked_fraction);
                    }
                }
                rows.push(row);
            }
            self.write(format!("diagnostics/{label}.csv"), &diagnostics_table(&rows))?;
            if !schema_written {
                self.write("diagnostics/schema.csv", &diagnostics_schema())?;
                schema_written = true;
            }
            self.checks_for(gen, recs, fit.as_ref(), cut.as_ref(), last_k, summary);
        }
        if let (Some(cm), Some(c)) = (&capmap, &cut) {
            let level = 1.0 / c.capacity();
            summary.checks.push(Check {
                name: format!("capmap_{}", cm.generator),
                pass: cm.exact_recovery || (cm.median_dev <= tol.median_dev * level && cm.p90_dev <= tol.p90_dev * level),
                detail: format!(
                    "n={} points={} median={:.4e} p90={:.4e} masked={:.3} bounds {:.4e}/{:.4e}",
                    cm.n,
                    cm.points,
                    cm.median_dev,
                    cm.p90_dev,
                    cm.masked_fraction,
                    tol.median_dev * level,
                    tol.p90_dev * level
                ),
            });
        }
        Ok(())
    }

    fn checks_for(
        &self,
        gen: &Generator,
        recs: &[NRecord],
        fit: Option<&RateSeries>,
        cut: Option<&CutSolution>,
        last_k: Option<(usize, f64)>,
        summary: &mut Summary,
    ) {
        let tol = &self.exp.config.tolerances;
        let label = gen.label();
        let mut push = |name: String, pass: bool, detail: String| summary.checks.push(Check { name, pass, detail });
        if matches!(gen, Generator::Aak) {
            let worst = recs.iter().filter(|r| r.trusted).map(|r| r.error_sup / r.error_inf).fold(1.0, f64::max);
            push(format!("circularity_{label}"), worst <= tol.circularity, format!("worst sup/inf {worst:.6}"));
        }
        if let Some(r) = recs.iter().find(|r| r.in_region == Some(false)) {
            push(format!("region_{label}"), false, format!("n={} keeps a pole outside the region", r.n));
        } else if matches!(gen, Generator::Retention) {
            push(format!("region_{label}"), true, "all retained poles inside the region".into());
        }
        match (fit, cut) {
            (Some(f), Some(c)) => {
                let b = bound_checks(f, c.capacity(), &self.exp.bound_tolerances());
                push(format!("walsh_{label}"), b.walsh_pass, format!("limit {:.6e} bound {:.6e}", b.limit, b.walsh_bound));
                if matches!(gen, Generator::Aak | Generator::Interpolation(SchemeKind::BalayageQuantiles)) {
                    push(
                        format!("optimal_rate_{label}"),
                        b.optimal_pass,
                        format!("limit {:.6e} vs {:.6e}, deviation {:.3e}", b.limit, b.optimal_rate, b.optimal_deviation),
                    );
                }
                if let Some((n, k)) = last_k {
                    push(format!("kolmogorov_{label}"), k <= tol.kolmogorov, format!("n={n} distance {k:.4e}"));
                }
            }
            (Some(f), None) if self.exp.polar_class() && matches!(gen, Generator::Aak) => {
                let roots: Vec<f64> = recs.iter().filter(|r| r.trusted).map(|r| r.value.powf(1.0 / r.n as f64)).collect();
                let decreasing = roots.windows(2).all(|w| w[1] < w[0]);
                push(
                    format!("superexponential_{label}"),
                    decreasing,
                    format!("n-th roots decreasing: {decreasing}, fitted limit {:.4e}, accelerating: {}", f.limit, f.trend_to_zero),
                );
            }
            (None, _) => push(format!("fit_{label}"), false, "fewer than 5 trusted degrees in the window".into()),
            _ => {}
        }
    }
}
