//! Test functions analytic outside the unit disk, their evaluation on and
//! inside the circle, and extraction of their Fourier data.

use std::fmt;
use std::str::FromStr;

use crate::doc::{fmt_complex, parse_complex, KvDoc};
use crate::error::{LabError, Result};
use crate::num::fft::{unit_roots, Plan};
use crate::num::{cx, lift, lower, Real, C, C64};
use crate::potential::ArcChain;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FunctionKind {
    /// `Σ r_j / (z - p_j)`.
    RationalPoleSum,
    /// `c ((z - a)(z - b))^{-1/2}`.
    TwoBranchSqrt,
    /// `c ((z - a)(z - b)(z - d))^{-1/3}`.
    ThreeBranchCuberoot,
    /// `Σ (exp(λ_j / (z - a_j)) - 1)`.
    EssentialExp,
    /// `Σ_k c_{-k} z^{-k}` from an explicit coefficient list.
    CustomCoeffStream,
}

impl FunctionKind {
    pub fn name(self) -> &'static str {
        match self {
            FunctionKind::RationalPoleSum => "rational_pole_sum",
            FunctionKind::TwoBranchSqrt => "two_branch_sqrt",
            FunctionKind::ThreeBranchCuberoot => "three_branch_cuberoot",
            FunctionKind::EssentialExp => "essential_exp",
            FunctionKind::CustomCoeffStream => "custom_coeff_stream",
        }
    }

    /// Order of the branch points, or 1 for single-valued kinds.
    pub fn order(self) -> usize {
        match self {
            FunctionKind::TwoBranchSqrt => 2,
            FunctionKind::ThreeBranchCuberoot => 3,
            _ => 1,
        }
    }
}

impl fmt::Display for FunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FunctionKind {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "rational_pole_sum" => FunctionKind::RationalPoleSum,
            "two_branch_sqrt" => FunctionKind::TwoBranchSqrt,
            "three_branch_cuberoot" => FunctionKind::ThreeBranchCuberoot,
            "essential_exp" => FunctionKind::EssentialExp,
            "custom_coeff_stream" => FunctionKind::CustomCoeffStream,
            other => return Err(LabError::InvalidSpec(format!("unknown kind `{other}`"))),
        })
    }
}

/// Declarative description of a test function.
///
/// `parameters` holds residues (pole sums), exponent scales (essential) or
/// the coefficients `c_{-1}, c_{-2}, ...` (custom). `leading` is the `c` in
/// `f(z) ~ c / z`; it scales the branched kinds and is checked against the
/// parameters for the others.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticFunctionSpec {
    pub kind: FunctionKind,
    pub branch_points: Vec<C64>,
    pub polar_points: Vec<C64>,
    pub parameters: Vec<C64>,
    pub leading: C64,
    pub margin: f64,
}

pub const DEFAULT_MARGIN: f64 = 0.05;

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

impl AnalyticFunctionSpec {
    pub fn pole_sum(poles: Vec<C64>, residues: Vec<C64>) -> Result<Self> {
        let leading = residues.iter().sum();
        Self::new(FunctionKind::RationalPoleSum, vec![], poles, residues, leading, DEFAULT_MARGIN)
    }

    pub fn sqrt_pair(a: C64, b: C64) -> Result<Self> {
        Self::new(FunctionKind::TwoBranchSqrt, vec![a, b], vec![], vec![], one(), DEFAULT_MARGIN)
    }

    pub fn cuberoot_triple(a: C64, b: C64, d: C64) -> Result<Self> {
        Self::new(FunctionKind::ThreeBranchCuberoot, vec![a, b, d], vec![], vec![], one(), DEFAULT_MARGIN)
    }

    pub fn essential_exp(points: Vec<C64>, scales: Vec<C64>) -> Result<Self> {
        let leading = scales.iter().sum();
        Self::new(FunctionKind::EssentialExp, vec![], points, scales, leading, DEFAULT_MARGIN)
    }

    pub fn custom(coeffs: Vec<C64>) -> Result<Self> {
        let leading = coeffs.first().copied().unwrap_or_default();
        Self::new(FunctionKind::CustomCoeffStream, vec![], vec![], coeffs, leading, DEFAULT_MARGIN)
    }

    pub fn new(
        kind: FunctionKind,
        branch_points: Vec<C64>,
        polar_points: Vec<C64>,
        parameters: Vec<C64>,
        leading: C64,
        margin: f64,
    ) -> Result<Self> {
        let s = AnalyticFunctionSpec { kind, branch_points, polar_points, parameters, leading, margin };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::InvalidSpec(m));
        if !(self.margin > 0.0 && self.margin < 1.0) {
            return bad(format!("margin {} outside (0, 1)", self.margin));
        }
        for p in self.branch_points.iter().chain(&self.polar_points) {
            if !(p.norm() < 1.0 - self.margin) {
                return bad(format!("singular point {p} not inside |z| < {}", 1.0 - self.margin));
            }
        }
        let nb = self.branch_points.len();
        let np = self.polar_points.len();
        match self.kind {
            FunctionKind::TwoBranchSqrt | FunctionKind::ThreeBranchCuberoot => {
                let want = self.kind.order();
                if nb != want || np != 0 {
                    return bad(format!("{} needs exactly {want} branch points", self.kind));
                }
                for i in 0..nb {
                    for j in i + 1..nb {
                        if (self.branch_points[i] - self.branch_points[j]).norm() < 1e-12 {
                            return bad("coincident branch points".into());
                        }
                    }
                }
                if self.leading.norm() == 0.0 {
                    return bad("leading coefficient is zero".into());
                }
            }
            FunctionKind::RationalPoleSum | FunctionKind::EssentialExp => {
                if nb != 0 || np == 0 || self.parameters.len() != np {
                    return bad(format!("{} needs polar points with one parameter each", self.kind));
                }
                let sum: C64 = self.parameters.iter().sum();
                if (sum - self.leading).norm() > 1e-9 * (1.0 + sum.norm()) {
                    return bad(format!("leading coefficient {} differs from parameter sum {}", self.leading, sum));
                }
            }
            FunctionKind::CustomCoeffStream => {
                if nb != 0 || np != 0 || self.parameters.is_empty() {
                    return bad("custom_coeff_stream takes only coefficients".into());
                }
                if (self.parameters[0] - self.leading).norm() > 1e-9 * (1.0 + self.leading.norm()) {
                    return bad("leading coefficient differs from the first coefficient".into());
                }
            }
        }
        Ok(())
    }

    /// All declared singular points.
    pub fn singular_points(&self) -> Vec<C64> {
        self.branch_points.iter().chain(&self.polar_points).copied().collect()
    }

    /// Largest singular modulus (root-test estimate for custom streams).
    pub fn singular_radius(&self) -> f64 {
        if self.kind == FunctionKind::CustomCoeffStream {
            let n = self.parameters.len();
            let lo = n / 2;
            return self.parameters[lo..]
                .iter()
                .enumerate()
                .map(|(i, c)| c.norm().powf(1.0 / (lo + i + 1) as f64))
                .fold(0.0, f64::max)
                .min(0.95);
        }
        self.singular_points().iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    pub fn has_real_coefficients(&self) -> bool {
        let closed = |v: &[C64]| v.iter().all(|p| p.im == 0.0 || v.iter().any(|q| *q == p.conj() && q != p));
        match self.kind {
            FunctionKind::CustomCoeffStream => self.parameters.iter().all(|c| c.im == 0.0),
            _ => {
                self.leading.im == 0.0
                    && self.parameters.iter().all(|c| c.im == 0.0)
                    && closed(&self.branch_points)
                    && closed(&self.polar_points)
            }
        }
    }

    /// Evaluation on `|z| > singular radius` by the exterior formula.
    pub fn eval_exterior<R: Real>(&self, z: &C<R>) -> C<R> {
        match self.kind {
            FunctionKind::RationalPoleSum => {
                let mut s = cx::zero::<R>();
                for (p, r) in self.polar_points.iter().zip(&self.parameters) {
                    s = s + lift::<R>(*r) / (z.clone() - lift::<R>(*p));
                }
                s
            }
            FunctionKind::EssentialExp => {
                let mut s = cx::zero::<R>();
                for (p, l) in self.polar_points.iter().zip(&self.parameters) {
                    let w = lift::<R>(*l) / (z.clone() - lift::<R>(*p));
                    s = s + cx::exp(&w) - cx::one::<R>();
                }
                s
            }
            FunctionKind::CustomCoeffStream => {
                let w = cx::inv(z);
                let mut acc = cx::zero::<R>();
                for c in self.parameters.iter().rev() {
                    acc = (acc + lift::<R>(*c)) * &w;
                }
                acc
            }
            FunctionKind::TwoBranchSqrt | FunctionKind::ThreeBranchCuberoot => {
                let m = self.kind.order();
                let w = cx::inv(z);
                let mut prod = cx::one::<R>();
                for a in &self.branch_points {
                    prod = prod * (cx::one::<R>() - lift::<R>(*a) * &w);
                }
                lift::<R>(self.leading) * w / cx::principal_root(&prod, m)
            }
        }
    }

    /// Value at `|z| >= 1`.
    pub fn evaluate(&self, z: C64) -> Result<C64> {
        self.evaluate_in::<f64>(&C::new(z.re, z.im))
    }

    pub fn evaluate_in<R: Real>(&self, z: &C<R>) -> Result<C<R>> {
        if cx::abs(z).to_f64() < 1.0 - 1e-12 {
            return Err(LabError::Domain(format!("|z| = {} < 1; use the continuation evaluator", cx::abs(z).to_f64())));
        }
        Ok(self.eval_exterior(z))
    }

    /// `c^m / Π (z - a_j)`, whose `m`-th roots are the branches.
    fn branch_power<R: Real>(&self, z: &C<R>) -> C<R> {
        let m = self.kind.order();
        let mut den = cx::one::<R>();
        for a in &self.branch_points {
            den = den * (z.clone() - lift::<R>(*a));
        }
        cx::powu(&lift::<R>(self.leading), m as u64) / den
    }

    /// Value of the continuation into the disk minus `cut`. Branched kinds
    /// need a cut; the branch is tracked from the unit circle along a path
    /// that avoids it.
    pub fn evaluate_continuation(&self, z: C64, cut: Option<&ArcChain>, tol: f64) -> Result<C64> {
        self.continuation_in::<f64>(&C::new(z.re, z.im), cut, tol)
    }

    pub fn continuation_in<R: Real>(&self, z: &C<R>, cut: Option<&ArcChain>, tol: f64) -> Result<C<R>> {
        let z64 = lower(z);
        if let Some(c) = cut {
            let d = c.distance(z64);
            if d < tol {
                return Err(LabError::CutCollision(format!("{z64} is {d:e} from the cut"), d));
            }
        }
        for p in self.singular_points() {
            if (p - z64).norm() < tol.max(1e-14) {
                return Err(LabError::Domain(format!("{z64} is a singular point")));
            }
        }
        if z64.norm() >= 1.0 || self.kind.order() == 1 {
            if self.kind == FunctionKind::CustomCoeffStream && z64.norm() <= self.singular_radius() {
                return Err(LabError::Domain("custom streams have no continuation inside their radius".into()));
            }
            return Ok(self.eval_exterior(z));
        }
        let cut = cut.ok_or_else(|| LabError::InvalidArgument(format!("{} needs a cut", self.kind)))?;
        let tracked = self.track(z64, cut)?;
        let m = self.kind.order();
        let roots = cx::roots_of(&self.branch_power(z), m);
        let mut best = 0;
        for (i, r) in roots.iter().enumerate() {
            if (lower(r) - tracked).norm() < (lower(&roots[best]) - tracked).norm() {
                best = i;
            }
        }
        Ok(roots[best].clone())
    }

    fn track(&self, z: C64, cut: &ArcChain) -> Result<C64> {
        let path = self.escape_path(z, cut)?;
        let m = self.kind.order();
        // walk backwards: from the circle to z
        let mut value = self.eval_exterior::<f64>(path.last().unwrap());
        for leg in path.windows(2).rev() {
            let (to, from) = (leg[0], leg[1]);
            let mut s = 0.0;
            let len = (to - from).norm();
            while s < len {
                let here = from + (to - from) * (s / len);
                let dist = self
                    .branch_points
                    .iter()
                    .map(|a| (a - here).norm())
                    .fold(f64::INFINITY, f64::min);
                let mut h = (0.1 * dist).min(0.02).min(len - s).max(1e-12);
                loop {
                    let next = from + (to - from) * ((s + h) / len);
                    let roots = cx::roots_of(&self.branch_power(&next), m);
                    let mut ds: Vec<(f64, C64)> = roots.iter().map(|r| ((r - value).norm(), *r)).collect();
                    ds.sort_by(|a, b| a.0.total_cmp(&b.0));
                    if m == 1 || ds[0].0 < 0.25 * ds[1].0 || h < 1e-10 {
                        value = ds[0].1;
                        s += h;
                        break;
                    }
                    h *= 0.5;
                }
            }
        }
        Ok(value)
    }

    /// Polyline from `z` to the unit circle not meeting the cut.
    fn escape_path(&self, z: C64, cut: &ArcChain) -> Result<Vec<C64>> {
        let exit = |p: C64, u: C64| -> C64 {
            // p + s u with |p + s u| = 1
            let b = (p * u.conj()).re;
            let c = p.norm_sqr() - 1.0;
            let s = -b + (b * b - c).max(0.0).sqrt();
            p + u * s
        };
        let base = if z.norm() > 1e-12 { z.arg() } else { 0.0 };
        let dirs: Vec<C64> = (0..64)
            .map(|k| {
                let j = (k + 1) / 2;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                C64::from_polar(1.0, base + sign * j as f64 * std::f64::consts::PI / 32.0)
            })
            .collect();
        let clear = |p: C64, q: C64| !cut.crosses(p, q, 256);
        for u in &dirs {
            let e = exit(z, *u);
            if clear(z, e) {
                return Ok(vec![z, e]);
            }
        }
        for ring in [0.5, 0.25, 0.75, 0.9] {
            for u in &dirs {
                let w = z + u * ring * (1.0 - z.norm());
                if w.norm() >= 1.0 || !clear(z, w) {
                    continue;
                }
                for v in &dirs {
                    let e = exit(w, *v);
                    if clear(w, e) {
                        return Ok(vec![z, w, e]);
                    }
                }
            }
        }
        Err(LabError::CutCollision(format!("no escape path from {z}"), cut.distance(z)))
    }

    pub fn to_doc(&self) -> KvDoc {
        let mut d = KvDoc::new();
        d.push("kind", self.kind.name());
        d.push_complexes("branch_points", &self.branch_points);
        d.push_complexes("polar_points", &self.polar_points);
        d.push_complexes("parameters", &self.parameters);
        d.push("normalization", format!("leading:{}", fmt_complex(self.leading)));
        d.push_f64("margin", self.margin);
        d
    }

    pub fn from_doc(d: &KvDoc) -> Result<Self> {
        let kind: FunctionKind = d.require("kind")?.parse()?;
        let opt_list = |k: &str| if d.get(k).is_some() { d.get_complexes(k) } else { Ok(Vec::new()) };
        let branch_points = opt_list("branch_points")?;
        let polar_points = opt_list("polar_points")?;
        let parameters = opt_list("parameters")?;
        let leading = match d.get("normalization") {
            Some(v) => {
                let rest = v
                    .strip_prefix("leading:")
                    .ok_or_else(|| LabError::Parse(format!("unknown normalization `{v}`")))?;
                parse_complex(rest)?
            }
            None => match kind {
                FunctionKind::RationalPoleSum | FunctionKind::EssentialExp => parameters.iter().sum(),
                FunctionKind::CustomCoeffStream => parameters.first().copied().unwrap_or_default(),
                _ => one(),
            },
        };
        let margin = if d.get("margin").is_some() { d.get_f64("margin")? } else { DEFAULT_MARGIN };
        Self::new(kind, branch_points, polar_points, parameters, leading, margin)
    }
}

/// Negative-index Fourier coefficients of `f` on the unit circle.
#[derive(Clone, Debug)]
pub struct FourierWindow<R: Real> {
    /// `c_{-1}, ..., c_{-K}`.
    pub coefficients: Vec<C<R>>,
    /// `c_0 = f(∞)`.
    pub constant: C<R>,
    pub extraction_radius: f64,
    /// Bound on `Σ_{k > K} |c_{-k}|`.
    pub tail_bound: f64,
    /// `|c_{-k}| <= envelope_m * envelope_r^k`.
    pub envelope_m: f64,
    pub envelope_r: f64,
    /// Trapezoid node count used.
    pub nodes: usize,
}

impl<R: Real> FourierWindow<R> {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// `c_{-k}` for `k >= 1`, zero beyond the window.
    pub fn coeff(&self, k: usize) -> C<R> {
        if k >= 1 && k <= self.coefficients.len() {
            self.coefficients[k - 1].clone()
        } else {
            cx::zero()
        }
    }

    /// Envelope bound on `Σ_{k >= from} |c_{-k}|`.
    pub fn envelope_tail(&self, from: usize) -> f64 {
        self.envelope_m * self.envelope_r.powi(from as i32) / (1.0 - self.envelope_r)
    }

    pub fn to_f64(&self) -> FourierWindow<f64> {
        FourierWindow {
            coefficients: self.coefficients.iter().map(|c| { let z = lower(c); C::new(z.re, z.im) }).collect(),
            constant: { let z = lower(&self.constant); C::new(z.re, z.im) },
            extraction_radius: self.extraction_radius,
            tail_bound: self.tail_bound,
            envelope_m: self.envelope_m,
            envelope_r: self.envelope_r,
            nodes: self.nodes,
        }
    }
}

fn max_on_circle(spec: &AnalyticFunctionSpec, r: f64) -> f64 {
    let n = 512;
    (0..n)
        .map(|j| spec.eval_exterior::<f64>(&C64::from_polar(r, 2.0 * std::f64::consts::PI * j as f64 / n as f64)).norm())
        .fold(0.0, f64::max)
        * 1.05
}

fn relative_tol<R: Real>() -> f64 {
    R::epsilon().to_f64().max(1e-150)
}

fn trapezoid<R: Real>(spec: &AnalyticFunctionSpec, k: usize, rho: f64, g: usize) -> (Vec<C<R>>, C<R>) {
    let roots = unit_roots::<R>(g);
    let rr = R::from_f64(rho);
    let mut samples: Vec<C<R>> = crate::par::map(&roots, |w| spec.eval_exterior(&cx::scale(w, &rr)));
    Plan::<R>::new(g).inverse(&mut samples);
    let gr = R::from_usize(g);
    let constant = cx::scale(&samples[0], &(R::one() / &gr));
    let mut coeffs = Vec::with_capacity(k);
    let mut pw = R::one() / &gr;
    for s in samples.iter().skip(1).take(k) {
        pw *= rr.clone();
        coeffs.push(cx::scale(s, &pw));
    }
    (coeffs, constant)
}

fn node_count(env_r: f64, rho: f64, k: usize, eps: f64) -> Result<usize> {
    let q = env_r / rho;
    let mut g = (2 * k).max(64).next_power_of_two();
    while {
        let a = q.powi(g as i32);
        a / (1.0 - a) >= eps
    } {
        g *= 2;
        if g > 1 << 16 {
            return Err(LabError::NonConvergence(q.powi(1 << 16)));
        }
    }
    Ok(g)
}

/// Coefficients `c_{-1..-K}` by the trapezoid rule on `|z| = radius`
/// (default halfway between the singular radius and 1), cross-checked on a
/// second circle.
pub fn fourier_coefficients<R: Real>(spec: &AnalyticFunctionSpec, k: usize, radius: Option<f64>) -> Result<FourierWindow<R>> {
    if k == 0 {
        return Err(LabError::InvalidArgument("need at least one coefficient".into()));
    }
    if spec.kind == FunctionKind::CustomCoeffStream {
        let mut coefficients: Vec<C<R>> = spec.parameters.iter().take(k).map(|c| lift::<R>(*c)).collect();
        coefficients.resize(k, cx::zero());
        let r = spec.singular_radius().max(1e-3);
        let m = spec.parameters.iter().enumerate().map(|(i, c)| c.norm() / r.powi(i as i32 + 1)).fold(0.0, f64::max);
        let tail: f64 = spec.parameters.iter().skip(k).map(|c| c.norm()).sum();
        return Ok(FourierWindow {
            coefficients,
            constant: cx::zero(),
            extraction_radius: 1.0,
            tail_bound: tail,
            envelope_m: m,
            envelope_r: r,
            nodes: 0,
        });
    }
    let rs = spec.singular_radius();
    let rho = radius.unwrap_or(0.5 * (1.0 + rs));
    if !(rho > rs + 1e-3 && rho <= 1.0) {
        return Err(LabError::Domain(format!("radius {rho} not in ({rs}, 1]")));
    }
    let env_r = 0.5 * (rs + rho);
    let env_m = max_on_circle(spec, env_r);
    let eps = relative_tol::<R>();
    let g = node_count(env_r, rho, k, eps)?;
    let (mut coefficients, mut constant) = trapezoid::<R>(spec, k, rho, g);
    if spec.has_real_coefficients() {
        for c in coefficients.iter_mut() {
            c.im = R::zero();
        }
        constant.im = R::zero();
    }
    let tail_bound = env_m * env_r.powi(k as i32 + 1) / (1.0 - env_r);

    if rho < 1.0 {
        let rho2 = 0.5 * (rho + 1.0);
        let g2 = node_count(env_r, rho2, k, eps)?;
        let (check, _) = trapezoid::<R>(spec, k, rho2, g2);
        let m1 = max_on_circle(spec, rho);
        let m2 = max_on_circle(spec, rho2);
        let mut worst: f64 = 0.0;
        for (i, (a, b)) in coefficients.iter().zip(&check).enumerate() {
            let kk = (i + 1) as i32;
            let d = lower(&(a.clone() - b.clone())).norm();
            let tol = 10.0 * tail_bound
                + 10.0 * env_m * env_r.powi(kk) * eps
                + 64.0 * eps * (m1 * rho.powi(kk) + m2 * rho2.powi(kk));
            if d > tol {
                worst = worst.max(d);
            }
        }
        if worst > 0.0 {
            return Err(LabError::NonConvergence(worst));
        }
    }
    Ok(FourierWindow {
        coefficients,
        constant,
        extraction_radius: rho,
        tail_bound,
        envelope_m: env_m,
        envelope_r: env_r,
        nodes: g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Mp;
    use crate::potential::Arc;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn exterior_values() {
        let f = AnalyticFunctionSpec::pole_sum(vec![r(0.0)], vec![r(1.0)]).unwrap();
        assert_eq!(f.evaluate(r(2.0)).unwrap(), r(0.5));
        assert!(f.evaluate(r(0.5)).is_err());
        let s = AnalyticFunctionSpec::sqrt_pair(r(0.5), r(-0.5)).unwrap();
        let big = r(1e6);
        assert!((s.evaluate(big).unwrap() * big - 1.0).norm() < 1e-12);
        let e = AnalyticFunctionSpec::essential_exp(vec![r(0.3)], vec![r(1.0)]).unwrap();
        // Σ 1/(k! 0.7^k), k >= 1
        let mut series = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term /= k as f64 * 0.7;
            series += term;
        }
        assert!((e.evaluate(r(1.0)).unwrap().re - series).abs() < 1e-14);
        assert!((series - 3.172733883598096).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(AnalyticFunctionSpec::sqrt_pair(r(0.5), r(0.5)).is_err());
        assert!(AnalyticFunctionSpec::sqrt_pair(r(0.97), r(0.0)).is_err());
        assert!(AnalyticFunctionSpec::new(FunctionKind::EssentialExp, vec![r(0.1)], vec![], vec![], r(1.0), 0.05).is_err());
        assert!(AnalyticFunctionSpec::new(FunctionKind::RationalPoleSum, vec![], vec![r(0.1)], vec![r(1.0)], r(2.0), 0.05).is_err());
    }

    #[test]
    fn continuation_values() {
        let f = AnalyticFunctionSpec::pole_sum(vec![r(0.4)], vec![r(1.0)]).unwrap();
        assert!((f.evaluate_continuation(r(0.0), None, 1e-9).unwrap() + 2.5).norm() < 1e-15);
        let e = AnalyticFunctionSpec::essential_exp(vec![r(0.3)], vec![r(1.0)]).unwrap();
        let v = e.evaluate_continuation(r(0.9), None, 1e-9).unwrap();
        assert!((v.re - ((1.0f64 / 0.6).exp() - 1.0)).abs() < 1e-13);

        let s = AnalyticFunctionSpec::sqrt_pair(r(0.5), r(-0.5)).unwrap();
        let cut = ArcChain::single(Arc::Segment { a: r(-0.5), b: r(0.5) }, 0.05).unwrap();
        let z = C64::new(0.0, 0.5);
        let v = s.evaluate_continuation(z, Some(&cut), 1e-6).unwrap();
        // continuous from the circle along the imaginary axis: -i / sqrt(0.5)
        assert!((v - C64::new(0.0, -(2f64).sqrt())).norm() < 1e-12, "{v}");
        let below = s.evaluate_continuation(z.conj(), Some(&cut), 1e-6).unwrap();
        assert!((below - v.conj()).norm() < 1e-12);
        assert!(matches!(s.evaluate_continuation(r(0.1), Some(&cut), 1e-6), Err(LabError::CutCollision(..))));
        // the branch on either side of the cut differs by a sign
        let up = s.evaluate_continuation(C64::new(0.1, 1e-3), Some(&cut), 1e-6).unwrap();
        let dn = s.evaluate_continuation(C64::new(0.1, -1e-3), Some(&cut), 1e-6).unwrap();
        assert!((up + dn).norm() < 1e-2 * up.norm());
        // limit from inside matches the circle values
        let t = C64::from_polar(1.0, 2.0);
        let inside = s.evaluate_continuation(t * 0.999_999_999, Some(&cut), 1e-6).unwrap();
        assert!((inside - s.evaluate(t).unwrap()).norm() < 1e-8);
    }

    #[test]
    fn geometric_coefficients() {
        let f = AnalyticFunctionSpec::pole_sum(vec![r(0.4)], vec![r(1.0)]).unwrap();
        let w = fourier_coefficients::<f64>(&f, 40, None).unwrap();
        for k in 1..=40 {
            assert!((w.coeff(k) - r(0.4f64.powi(k as i32 - 1))).norm() < 1e-15);
        }
        let z = AnalyticFunctionSpec::pole_sum(vec![r(0.0)], vec![r(1.0)]).unwrap();
        let w = fourier_coefficients::<f64>(&z, 8, None).unwrap();
        assert!((w.coeff(1) - r(1.0)).norm() < 1e-15);
        assert!((2..=8).all(|k| w.coeff(k).norm() < 1e-15));
    }

    #[test]
    fn sqrt_series_coefficients() {
        let s = AnalyticFunctionSpec::sqrt_pair(r(0.5), r(-0.5)).unwrap();
        let w = fourier_coefficients::<Mp>(&s, 60, None).unwrap();
        // (1 - w^2/4)^{-1/2} = Σ binom(2j, j) (w/4)^{2j} / ... with x = w^2/4: Σ binom(2j,j) (x/4)^j
        let mut binom = 1.0f64;
        for j in 0..30 {
            if j > 0 {
                binom = binom * (2 * j) as f64 * (2 * j - 1) as f64 / (j * j) as f64;
            }
            let exact = binom / 16f64.powi(j as i32);
            let got = lower(&w.coeff(2 * j + 1));
            assert!((got.re - exact).abs() <= 1e-15 * exact, "{j}");
            assert!(lower(&w.coeff(2 * j + 2)).norm() < 1e-100);
        }
        assert!((lower(&w.coeff(3)).re - 0.125).abs() < 1e-30);
    }

    #[test]
    fn doc_round_trip() {
        let s = AnalyticFunctionSpec::cuberoot_triple(r(0.3), C64::new(-0.2, 0.4), C64::new(0.0, -0.5)).unwrap();
        let back = AnalyticFunctionSpec::from_doc(&KvDoc::parse(&s.to_doc().render()).unwrap()).unwrap();
        assert_eq!(back, s);
    }
}
