//! Rational approximants by linearized multipoint interpolation on the
//! circle, Padé approximants at infinity, and singular-part retention for
//! functions with isolated singularities.

use std::f64::consts::PI;

use crate::approximant::{ApproximantForm, MeromorphicApproximant, Pole, Provenance};
use crate::catalog::{fourier_coefficients, AnalyticFunctionSpec};
use crate::cut::CutSolution;
use crate::error::{LabError, Result};
use crate::num::linalg::null_vector;
use crate::num::{cx, lower, poly, Real, C, C64};
use crate::potential::{equilibrium, Arc, ArcChain, CapacityResult, DiscreteMeasure};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeKind {
    BalayageQuantiles,
    Uniform,
    /// Classical Padé: every condition at infinity.
    AllAtInfinity,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::BalayageQuantiles => "balayage",
            SchemeKind::Uniform => "uniform",
            SchemeKind::AllAtInfinity => "pade",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "balayage" => Ok(SchemeKind::BalayageQuantiles),
            "uniform" => Ok(SchemeKind::Uniform),
            "pade" => Ok(SchemeKind::AllAtInfinity),
            other => Err(LabError::Parse(format!("unknown scheme `{other}`"))),
        }
    }
}

/// `2n + 1` interpolation angles on the circle (empty for Padé at infinity).
#[derive(Clone, Debug, PartialEq)]
pub struct InterpolationScheme {
    pub kind: SchemeKind,
    pub degree: usize,
    pub angles: Vec<f64>,
}

impl InterpolationScheme {
    pub fn uniform(n: usize) -> Self {
        let m = 2 * n + 1;
        InterpolationScheme { kind: SchemeKind::Uniform, degree: n, angles: (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect() }
    }

    pub fn pade(n: usize) -> Self {
        InterpolationScheme { kind: SchemeKind::AllAtInfinity, degree: n, angles: Vec::new() }
    }

    pub fn nodes(&self) -> Vec<C64> {
        self.angles.iter().map(|t| C64::from_polar(1.0, *t)).collect()
    }
}

/// Density of the balayage of `mu` onto the circle, w.r.t. `dθ`.
pub fn balayage_density(mu: &DiscreteMeasure, theta: f64) -> f64 {
    let e = C64::from_polar(1.0, theta);
    mu.points
        .iter()
        .zip(&mu.weights)
        .map(|(z, w)| w * (1.0 - z.norm_sqr()) / (e - z).norm_sqr())
        .sum::<f64>()
        / (2.0 * PI)
}

/// Balayage mass of the arc `[theta0, theta0 + s]`, `s ∈ [0, 2π]`.
pub fn balayage_mass(mu: &DiscreteMeasure, theta0: f64, s: f64) -> f64 {
    // t + 2 atan(r sin t / (1 - r cos t)) is a continuous primitive of the
    // Poisson kernel for r < 1
    let prim = |z: &C64, t: f64| {
        let d = t - z.arg();
        let r = z.norm();
        d + 2.0 * (r * d.sin()).atan2(1.0 - r * d.cos())
    };
    mu.points
        .iter()
        .zip(&mu.weights)
        .map(|(z, w)| w * (prim(z, theta0 + s) - prim(z, theta0)))
        .sum::<f64>()
        / (2.0 * PI)
}

fn density_maximizer(mu: &DiscreteMeasure) -> f64 {
    let g = 4096;
    let vals: Vec<f64> = (0..g).map(|k| balayage_density(mu, 2.0 * PI * k as f64 / g as f64)).collect();
    let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let k = vals.iter().position(|v| *v >= top * (1.0 - 1e-12)).unwrap_or(0);
    let h = 2.0 * PI / g as f64;
    let (mut a, mut b) = ((k as f64 - 1.0) * h, (k as f64 + 1.0) * h);
    let gr = 0.618_033_988_749_894_9;
    let f = |t: f64| -balayage_density(mu, t);
    for _ in 0..100 {
        let x1 = b - gr * (b - a);
        let x2 = a + gr * (b - a);
        if f(x1) < f(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    let t = 0.5 * (a + b);
    // an exact tie at a grid point (symmetric densities) keeps the grid angle
    if (balayage_density(mu, k as f64 * h) - balayage_density(mu, t)).abs() <= 1e-13 * top {
        k as f64 * h
    } else {
        t.rem_euclid(2.0 * PI)
    }
}

/// Angles splitting the balayage of `mu` into `2n + 1` equal masses,
/// starting at a maximizer of its density.
pub fn balayage_scheme_of(mu: &DiscreteMeasure, n: usize) -> InterpolationScheme {
    let mu = mu.normalized();
    let start = density_maximizer(&mu);
    let m = 2 * n + 1;
    let mut angles = vec![start];
    for j in 1..m {
        let target = j as f64 / m as f64;
        let (mut lo, mut hi) = (0.0, 2.0 * PI);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if balayage_mass(&mu, start, mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        angles.push((start + 0.5 * (lo + hi)).rem_euclid(2.0 * PI));
    }
    InterpolationScheme { kind: SchemeKind::BalayageQuantiles, degree: n, angles }
}

/// Quantile nodes of the balayage of the cut's equilibrium measure.
pub fn balayage_scheme(cut: &CutSolution, n: usize) -> InterpolationScheme {
    balayage_scheme_of(&cut.capacity.measure, n)
}

fn finish<R: Real>(p: Vec<C<R>>, q: Vec<C<R>>, n: usize, mut warnings: Vec<String>) -> MeromorphicApproximant<R> {
    let qmax = q.iter().map(cx::abs).fold(R::zero(), |a, b| a.max_of(b));
    let tol = R::from_f64(1e3) * &R::epsilon() * &qmax;
    let mut top = q.len() - 1;
    while top > 0 && cx::abs(&q[top]) <= tol {
        top -= 1;
    }
    let lead = q[top].clone();
    let q: Vec<C<R>> = q[..=top].iter().map(|c| c.clone() / lead.clone()).collect();
    let p: Vec<C<R>> = p.iter().map(|c| c.clone() / lead.clone()).collect();
    let found = poly::roots(&q);
    if !found.converged {
        warnings.push("denominator roots did not fully converge".into());
    }
    let dq = poly::derivative(&q);
    let mut poles = Vec::new();
    let mut spurious = Vec::new();
    for z in found.roots {
        if cx::abs(&z) < R::one() {
            let r = poly::horner(&p, &z) / poly::horner(&dq, &z);
            poles.push(Pole::simple(z, r));
        } else {
            spurious.push(lower(&z));
        }
    }
    MeromorphicApproximant {
        provenance: Provenance::Interpolation,
        degree_budget: n,
        poles,
        form: ApproximantForm::Rational { num: p, den: q },
        circular: None,
        spurious,
        warnings,
    }
}

/// Null vector of a homogeneous system after scaling columns to unit size.
fn scaled_null<R: Real>(mut a: Vec<C<R>>, rows: usize, cols: usize) -> Result<(Vec<C<R>>, usize)> {
    let mut scale = vec![R::one(); cols];
    for (k, s) in scale.iter_mut().enumerate() {
        let mx = (0..rows).map(|j| cx::abs(&a[j * cols + k])).fold(R::zero(), |x, y| x.max_of(y));
        if !mx.is_zero() {
            *s = mx;
        }
    }
    for j in 0..rows {
        for k in 0..cols {
            a[j * cols + k] = cx::scale(&a[j * cols + k], &(R::one() / &scale[k]));
        }
    }
    let (x, rank) = null_vector(a, rows, cols)?;
    Ok((x.into_iter().zip(&scale).map(|(v, s)| cx::scale(&v, &(R::one() / s))).collect(), rank))
}

/// Type `(n, n)` rational function `p/q` with `f q - p` vanishing at the
/// scheme's nodes (or to order `2n + 1` at infinity for Padé).
pub fn interpolate<R: Real>(spec: &AnalyticFunctionSpec, scheme: &InterpolationScheme) -> Result<MeromorphicApproximant<R>> {
    let n = scheme.degree;
    if scheme.kind == SchemeKind::AllAtInfinity {
        return pade_at_infinity(spec, n);
    }
    if scheme.angles.len() != 2 * n + 1 {
        return Err(LabError::InvalidArgument(format!("{} nodes for degree {n}", scheme.angles.len())));
    }
    let nodes: Vec<C<R>> = scheme.angles.iter().map(|t| cx::cis(&R::from_f64(*t))).collect();
    let fv: Vec<C<R>> = crate::par::map(&nodes, |z| spec.eval_exterior(z));
    let rows = nodes.len();
    let mut warnings = Vec::new();
    let mut k = n;
    loop {
        let cols = 2 * k + 2;
        let mut a = Vec::with_capacity(rows * cols);
        for (z, f) in nodes.iter().zip(&fv) {
            let mut pw = Vec::with_capacity(k + 1);
            let mut t = cx::one::<R>();
            for _ in 0..=k {
                pw.push(t.clone());
                t = t * z;
            }
            a.extend(pw.iter().map(|w| -w.clone()));
            a.extend(pw.iter().map(|w| w.clone() * f));
        }
        let (x, rank) = scaled_null(a, rows, cols)?;
        if rank + 1 < cols && k > 0 {
            warnings.push(format!("degenerate interpolation at type ({k},{k}), rank {rank}; reducing the type"));
            k -= 1;
            continue;
        }
        let p = x[..=k].to_vec();
        let q = x[k + 1..].to_vec();
        return Ok(finish(p, q, n, warnings));
    }
}

/// Classical Padé approximant at infinity.
pub fn pade_at_infinity<R: Real>(spec: &AnalyticFunctionSpec, n: usize) -> Result<MeromorphicApproximant<R>> {
    let w = fourier_coefficients::<R>(spec, 2 * n + 2, None)?;
    let c = |k: usize| if k == 0 { w.constant.clone() } else { w.coeff(k) };
    let mut warnings = Vec::new();
    let mut k = n;
    loop {
        let q = if k == 0 {
            vec![cx::one::<R>()]
        } else {
            let cols = k + 1;
            let mut a = Vec::with_capacity(k * cols);
            for i in 1..=k {
                for j in 0..=k {
                    a.push(c(i + j));
                }
            }
            let (x, rank) = scaled_null(a, k, cols)?;
            if rank + 1 < cols {
                warnings.push(format!("degenerate Padé table at type ({k},{k}); reducing the type"));
                k -= 1;
                continue;
            }
            x
        };
        let p: Vec<C<R>> = (0..=k)
            .map(|i| (i..=k).fold(cx::zero::<R>(), |s, j| s + q[j].clone() * c(j - i)))
            .collect();
        return Ok(finish(p, q, n, warnings));
    }
}

/// Superlevel set `{G_B > t}` of the Green equilibrium potential of a union
/// of small disks `B`.
#[derive(Clone, Debug)]
pub struct Region {
    pub centers: Vec<C64>,
    pub radius: f64,
    pub equilibrium: CapacityResult,
    /// Selected level; fixed once chosen.
    pub level: Option<f64>,
}

impl Region {
    pub fn around(centers: &[C64], radius: f64) -> Result<Self> {
        let arcs = centers.iter().map(|c| Arc::Circle { center: *c, radius }).collect();
        let chain = ArcChain::new(arcs, 0.0)?;
        for (i, a) in centers.iter().enumerate() {
            if centers[..i].iter().any(|b| (a - b).norm() <= 2.0 * radius) {
                return Err(LabError::DegenerateChain("retention disks overlap".into()));
            }
        }
        Ok(Region { centers: centers.to_vec(), radius, equilibrium: equilibrium(&chain, 64)?, level: None })
    }

    pub fn capacity(&self) -> f64 {
        self.equilibrium.capacity
    }

    /// `G_B(z)`; equal to `1 / cap` on `B`.
    pub fn green(&self, z: C64) -> f64 {
        if self.centers.iter().any(|c| (z - c).norm() <= self.radius) {
            return self.equilibrium.level;
        }
        self.equilibrium.potential(z)
    }

    pub fn contains(&self, z: C64) -> Option<bool> {
        self.level.map(|t| self.green(z) > t)
    }

    /// Pick the level among 17 in `[0.2, 0.6] / cap` that stays farthest
    /// from the poles of `m` (distance estimated by `|G - t| / |∇G|`).
    pub fn select_level<R: Real>(&mut self, m: &MeromorphicApproximant<R>) -> Result<f64> {
        if let Some(t) = self.level {
            return Ok(t);
        }
        let inv = self.equilibrium.level;
        let poles = m.pole_locations();
        let info: Vec<(f64, f64)> = crate::par::map(&poles, |p| {
            let g = self.green(*p);
            let inside = self.centers.iter().any(|c| (p - c).norm() <= self.radius);
            let grad = if inside { 0.0 } else { self.equilibrium.gradient(*p, 1e-6).norm() };
            (g, grad)
        });
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in 0..17 {
            let t = inv * (0.2 + 0.4 * i as f64 / 16.0);
            let score = info
                .iter()
                .map(|(g, d)| if *d > 0.0 { (g - t).abs() / d } else { f64::INFINITY })
                .fold(f64::INFINITY, f64::min);
            if score > best.0 {
                best = (score, t);
            }
        }
        if best.0 < 1e-6 {
            return Err(LabError::LevelSelection(format!("every level passes within {:e} of a pole", best.0)));
        }
        self.level = Some(best.1);
        Ok(best.1)
    }
}

/// Principal parts of `m` at its poles inside the region.
pub fn retain_singular_part<R: Real>(m: &MeromorphicApproximant<R>, region: &mut Region) -> Result<MeromorphicApproximant<R>> {
    let t = region.select_level(m)?;
    let poles: Vec<Pole<R>> = m.poles.iter().filter(|p| region.green(lower(&p.location)) > t).cloned().collect();
    Ok(MeromorphicApproximant {
        provenance: Provenance::Retention,
        degree_budget: m.degree_budget,
        poles,
        form: ApproximantForm::PoleSum { tail: Vec::new() },
        circular: None,
        spurious: Vec::new(),
        warnings: m.warnings.clone(),
    })
}
