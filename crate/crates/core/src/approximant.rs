//! Meromorphic approximants in the disk and their errors on the circle.

use std::fmt;

use crate::catalog::AnalyticFunctionSpec;
use crate::doc::{fmt_complex, fmt_f64, parse_complex, parse_f64, KvDoc};
use crate::error::{LabError, Result};
use crate::num::fft::{unit_roots, Plan};
use crate::num::{cx, ln_to_f64, lower, poly, Real, C, C64};
use crate::par;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    Aak,
    NehariModified,
    Interpolation,
    Retention,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::Aak => "aak",
            Provenance::NehariModified => "nehari_modified",
            Provenance::Interpolation => "interpolation",
            Provenance::Retention => "retention",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "aak" => Provenance::Aak,
            "nehari_modified" => Provenance::NehariModified,
            "interpolation" => Provenance::Interpolation,
            "retention" => Provenance::Retention,
            o => return Err(LabError::Parse(format!("unknown provenance `{o}`"))),
        })
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A pole in the disk with its principal part
/// `Σ_l principal[l] / (z - location)^{l+1}`.
#[derive(Clone, Debug)]
pub struct Pole<R: Real> {
    pub location: C<R>,
    pub multiplicity: usize,
    pub principal: Vec<C<R>>,
}

impl<R: Real> Pole<R> {
    pub fn simple(location: C<R>, residue: C<R>) -> Self {
        Pole { location, multiplicity: 1, principal: vec![residue] }
    }

    pub fn eval(&self, z: &C<R>) -> C<R> {
        let w = cx::inv(&(z.clone() - self.location.clone()));
        let mut acc = cx::zero::<R>();
        for c in self.principal.iter().rev() {
            acc = (acc + c.clone()) * &w;
        }
        acc
    }

    /// Coefficient of `z^{-k}` (`k >= 1`) in the expansion at infinity.
    pub fn laurent_coeffs(&self, upto: usize) -> Vec<C<R>> {
        // (z - p)^{-(l+1)} = Σ_{k > l} binom(k-1, l) p^{k-l-1} z^{-k}
        let mut out = vec![cx::zero::<R>(); upto];
        let p = &self.location;
        for (l, c) in self.principal.iter().enumerate() {
            let mut pw = cx::one::<R>();
            let mut binom = R::one();
            for k in (l + 1)..=upto {
                if k > l + 1 {
                    // binom(k-1, l) from binom(k-2, l)
                    binom = binom * &R::from_usize(k - 1) / &R::from_usize(k - 1 - l);
                    pw = pw * p;
                }
                out[k - 1] = out[k - 1].clone() + c.clone() * &pw * C::new(binom.clone(), R::zero());
            }
        }
        out
    }
}

/// Error `B(z) / v(z)` with `B = Σ_m numer[m] z^{-m-1}`, `v = Σ_k den[k] z^k`.
#[derive(Clone, Debug)]
pub struct CircularError<R: Real> {
    pub numer: Vec<C<R>>,
    pub den: Vec<C<R>>,
}

impl<R: Real> CircularError<R> {
    pub fn eval(&self, z: &C<R>) -> C<R> {
        let w = cx::inv(z);
        let mut b = cx::zero::<R>();
        for c in self.numer.iter().rev() {
            b = (b + c.clone()) * &w;
        }
        b / poly::horner(&self.den, z)
    }
}

#[derive(Clone, Debug)]
pub enum ApproximantForm<R: Real> {
    /// `num / den` (coefficients, constant first).
    Rational { num: Vec<C<R>>, den: Vec<C<R>> },
    /// Principal parts plus a Taylor tail `Σ tail[j] z^j`.
    PoleSum { tail: Vec<C<R>> },
    /// Known only through its error on and near the circle.
    BoundaryOnly,
}

/// Meromorphic function in the disk with a bounded number of poles.
#[derive(Clone, Debug)]
pub struct MeromorphicApproximant<R: Real> {
    pub provenance: Provenance,
    pub degree_budget: usize,
    pub poles: Vec<Pole<R>>,
    pub form: ApproximantForm<R>,
    pub circular: Option<CircularError<R>>,
    /// Poles of the rational form outside the disk.
    pub spurious: Vec<C64>,
    pub warnings: Vec<String>,
}

impl<R: Real> MeromorphicApproximant<R> {
    pub fn zero(provenance: Provenance) -> Self {
        MeromorphicApproximant {
            provenance,
            degree_budget: 0,
            poles: Vec::new(),
            form: ApproximantForm::PoleSum { tail: Vec::new() },
            circular: None,
            spurious: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn pole_count(&self) -> usize {
        self.poles.iter().map(|p| p.multiplicity).sum()
    }

    pub fn pole_locations(&self) -> Vec<C64> {
        self.poles.iter().map(|p| lower(&p.location)).collect()
    }

    /// Value of the approximant where the form allows it.
    pub fn eval(&self, z: &C<R>) -> Result<C<R>> {
        match &self.form {
            ApproximantForm::Rational { num, den } => Ok(poly::horner(num, z) / poly::horner(den, z)),
            ApproximantForm::PoleSum { tail } => {
                let mut s = poly::horner(tail, z);
                for p in &self.poles {
                    s = s + p.eval(z);
                }
                Ok(s)
            }
            ApproximantForm::BoundaryOnly => Err(LabError::Domain("approximant is known only on the circle".into())),
        }
    }

    /// Error `f - M` at a point of modulus at least 1.
    pub fn error_at(&self, spec: &AnalyticFunctionSpec, z: &C<R>) -> Result<C<R>> {
        if let Some(c) = &self.circular {
            return Ok(c.eval(z));
        }
        Ok(spec.evaluate_in(z)? - self.eval(z)?)
    }

    /// Negative-index coefficients `c_{-1..-K}` of the principal parts.
    pub fn principal_laurent(&self, upto: usize) -> Vec<C<R>> {
        let mut out = vec![cx::zero::<R>(); upto];
        for p in &self.poles {
            for (o, c) in out.iter_mut().zip(p.laurent_coeffs(upto)) {
                *o = o.clone() + c;
            }
        }
        out
    }

    pub fn to_doc(&self, trace: Option<&ErrorTrace>) -> KvDoc {
        let mut d = KvDoc::new();
        d.push("kind", "approximant");
        d.push("provenance", self.provenance.name());
        d.push("degree_budget", self.degree_budget.to_string());
        d.push(
            "poles",
            self.poles
                .iter()
                .map(|p| format!("{},{}", fmt_complex(lower(&p.location)), p.multiplicity))
                .collect::<Vec<_>>()
                .join(";"),
        );
        d.push(
            "residues",
            self.poles
                .iter()
                .map(|p| p.principal.iter().map(|c| fmt_complex(lower(c))).collect::<Vec<_>>().join(" "))
                .collect::<Vec<_>>()
                .join(";"),
        );
        d.push_complexes("spurious", &self.spurious);
        if let Some(t) = trace {
            d.push("error_grid", t.grid.to_string());
            d.push_f64("error_sup", t.sup);
            d.push_f64("error_inf", t.inf);
            d.push_f64("error_log_sup", t.log_sup);
            d.push_f64("error_refinement_change", t.refinement_change);
        }
        d
    }
}

/// Poles and residues read back from an approximant document.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproximantRecord {
    pub provenance: Provenance,
    pub degree_budget: usize,
    pub poles: Vec<(C64, usize)>,
    pub residues: Vec<Vec<C64>>,
    pub spurious: Vec<C64>,
    pub error_sup: Option<f64>,
}

impl ApproximantRecord {
    pub fn from_doc(d: &KvDoc) -> Result<Self> {
        let provenance = Provenance::parse(d.require("provenance")?)?;
        let degree_budget = d.get_usize("degree_budget")?;
        let mut poles = Vec::new();
        let pv = d.require("poles")?.trim();
        if !pv.is_empty() {
            for item in pv.split(';') {
                let parts: Vec<&str> = item.split(',').collect();
                if parts.len() != 3 {
                    return Err(LabError::Parse(format!("bad pole `{item}`")));
                }
                let z = C64::new(parse_f64(parts[0])?, parse_f64(parts[1])?);
                let m = parts[2].trim().parse().map_err(|_| LabError::Parse(format!("bad multiplicity `{item}`")))?;
                poles.push((z, m));
            }
        }
        let mut residues = Vec::new();
        let rv = d.require("residues")?.trim();
        if !rv.is_empty() {
            for item in rv.split(';') {
                residues.push(item.split_whitespace().map(parse_complex).collect::<Result<Vec<_>>>()?);
            }
        }
        let spurious = d.get_complexes("spurious")?;
        let error_sup = d.get("error_sup").map(parse_f64).transpose()?;
        Ok(ApproximantRecord { provenance, degree_budget, poles, residues, spurious, error_sup })
    }
}

/// `|f - M|` sampled at `grid` uniform angles, with a grid-doubling check.
#[derive(Clone, Debug)]
pub struct ErrorTrace {
    pub grid: usize,
    pub samples: Vec<f64>,
    pub sup: f64,
    pub inf: f64,
    /// `ln sup`, accurate even below the double range.
    pub log_sup: f64,
    /// Relative change of the sup when the grid is doubled.
    pub refinement_change: f64,
}

impl ErrorTrace {
    pub fn circularity(&self) -> f64 {
        self.sup / self.inf
    }

    pub fn certified(&self) -> bool {
        self.refinement_change < 1e-3
    }
}

fn fold<R: Real>(coeffs: &[C<R>], g: usize, shift: usize) -> Vec<C<R>> {
    let mut out = vec![cx::zero::<R>(); g];
    for (k, c) in coeffs.iter().enumerate() {
        let i = (k + shift) % g;
        out[i] = out[i].clone() + c.clone();
    }
    out
}

/// `Σ c_k ω^{jk}` at all `g`-th roots of unity.
fn poly_on_circle<R: Real>(plan: &Plan<R>, coeffs: &[C<R>]) -> Vec<C<R>> {
    let mut x = fold(coeffs, plan.len(), 0);
    plan.inverse(&mut x);
    x
}

/// Error samples `f - M` at the `g`-th roots of unity.
pub fn error_samples<R: Real>(spec: &AnalyticFunctionSpec, m: &MeromorphicApproximant<R>, g: usize) -> Result<Vec<C<R>>> {
    let plan = Plan::<R>::new(g);
    if let Some(c) = &m.circular {
        let mut b = fold(&c.numer, g, 1);
        plan.forward(&mut b);
        let v = poly_on_circle(&plan, &c.den);
        return Ok(b.into_iter().zip(v).map(|(x, y)| x / y).collect());
    }
    let roots = unit_roots::<R>(g);
    let fv: Vec<C<R>> = par::map(&roots, |z| spec.eval_exterior(z));
    let mv: Vec<C<R>> = match &m.form {
        ApproximantForm::Rational { num, den } => {
            let p = poly_on_circle(&plan, num);
            let q = poly_on_circle(&plan, den);
            p.into_iter().zip(q).map(|(a, b)| a / b).collect()
        }
        ApproximantForm::PoleSum { tail } => {
            let t = poly_on_circle(&plan, tail);
            let pp: Vec<C<R>> = par::map(&roots, |z| m.poles.iter().fold(cx::zero::<R>(), |s, p| s + p.eval(z)));
            t.into_iter().zip(pp).map(|(a, b)| a + b).collect()
        }
        ApproximantForm::BoundaryOnly => {
            return Err(LabError::Domain("boundary-only approximant without an error representation".into()))
        }
    };
    Ok(fv.into_iter().zip(mv).map(|(a, b)| a - b).collect())
}

/// Sup/inf of the error on the circle at `grid` points, checked against `2 grid`.
pub fn error_on_circle<R: Real>(spec: &AnalyticFunctionSpec, m: &MeromorphicApproximant<R>, grid: usize) -> Result<ErrorTrace> {
    if grid < 64 || !grid.is_power_of_two() {
        return Err(LabError::InvalidArgument(format!("grid {grid} must be a power of two >= 64")));
    }
    let coarse = error_samples(spec, m, grid)?;
    let fine = error_samples(spec, m, 2 * grid)?;
    let mags = |v: &[C<R>]| -> (Vec<f64>, R, R) {
        let mut hi = R::zero();
        let mut lo: Option<R> = None;
        let mut out = Vec::with_capacity(v.len());
        for z in v {
            let a = cx::abs(z);
            out.push(a.to_f64());
            if a > hi {
                hi = a.clone();
            }
            lo = Some(match lo {
                Some(l) if l < a => l,
                _ => a,
            });
        }
        (out, hi, lo.unwrap_or_else(R::zero))
    };
    let (samples, sup_c, inf_c) = mags(&coarse);
    let (_, sup_f, inf_f) = mags(&fine);
    let change = ((sup_f.clone() - sup_c.clone()) / sup_f.clone()).abs().to_f64();
    let sup = sup_c.max_of(sup_f);
    let inf = inf_c.min_of(inf_f);
    Ok(ErrorTrace {
        grid,
        samples,
        sup: sup.to_f64(),
        inf: inf.to_f64(),
        log_sup: ln_to_f64(&sup),
        refinement_change: if change.is_finite() { change } else { 0.0 },
    })
}

pub fn fmt_trace(t: &ErrorTrace) -> String {
    format!("sup={} inf={} grid={}", fmt_f64(t.sup), fmt_f64(t.inf), t.grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Mp;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn exact_and_zero_approximants() {
        let f = AnalyticFunctionSpec::pole_sum(vec![r(0.4)], vec![r(1.0)]).unwrap();
        let mut m = MeromorphicApproximant::<f64>::zero(Provenance::Retention);
        let t = error_on_circle(&f, &m, 256).unwrap();
        assert!((t.sup - 1.0 / 0.6).abs() < 1e-14);
        m.poles.push(Pole::simple(r(0.4), r(1.0)));
        m.degree_budget = 1;
        let t = error_on_circle(&f, &m, 256).unwrap();
        assert!(t.samples.iter().all(|s| *s <= 1e-14));
    }

    #[test]
    fn laurent_of_double_pole() {
        let p = Pole::<Mp> {
            location: C::new(Mp::from_f64(0.3), Mp::from_f64(0.0)),
            multiplicity: 2,
            principal: vec![cx::zero(), cx::one()],
        };
        // (z - a)^{-2} = Σ (k-1) a^{k-2} z^{-k}
        let c = p.laurent_coeffs(6);
        for (i, ck) in c.iter().enumerate() {
            let k = i + 1;
            let want = if k < 2 { 0.0 } else { (k - 1) as f64 * 0.3f64.powi(k as i32 - 2) };
            assert!((lower(ck).re - want).abs() < 1e-15, "{k}");
        }
    }

    #[test]
    fn doc_round_trip() {
        let mut m = MeromorphicApproximant::<f64>::zero(Provenance::Interpolation);
        m.poles.push(Pole::simple(C64::new(0.1, -0.2), C64::new(3.0, 0.5)));
        m.degree_budget = 3;
        m.spurious.push(r(1.5));
        let rec = ApproximantRecord::from_doc(&KvDoc::parse(&m.to_doc(None).render()).unwrap()).unwrap();
        assert_eq!(rec.poles, vec![(C64::new(0.1, -0.2), 1)]);
        assert_eq!(rec.residues, vec![vec![C64::new(3.0, 0.5)]]);
        assert_eq!(rec.spurious, vec![r(1.5)]);
        assert_eq!(rec.degree_budget, 3);
    }
}
