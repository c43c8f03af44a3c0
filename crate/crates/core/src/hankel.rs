//! Hankel sections, their singular systems, AAK approximants and the Nehari
//! modification.

use crate::approximant::{error_on_circle, ApproximantForm, CircularError, ErrorTrace, MeromorphicApproximant, Pole, Provenance};
use crate::catalog::{fourier_coefficients, AnalyticFunctionSpec, FourierWindow};
use crate::error::{LabError, Result};
use crate::num::linalg::{null_vector, HermitianEigen};
use crate::num::{cx, lower, poly, Real, C};

/// Leading `N x N` block of the Hankel matrix `(c_{-(j+k+1)})`.
#[derive(Clone, Debug)]
pub struct HankelSection<R: Real> {
    pub size: usize,
    /// `c_{-1}, ..., c_{-(2N-1)}`.
    pub coeffs: Vec<C<R>>,
    /// Operator-norm bound on the part of the full operator outside the block.
    pub truncation_defect: f64,
    pub real: bool,
}

impl<R: Real> HankelSection<R> {
    pub fn entry(&self, j: usize, k: usize) -> C<R> {
        self.coeffs[j + k].clone()
    }

    /// Row-major dense copy.
    pub fn dense(&self) -> Vec<C<R>> {
        let n = self.size;
        let mut out = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                out.push(self.entry(j, k));
            }
        }
        out
    }

    pub fn apply(&self, v: &[C<R>]) -> Vec<C<R>> {
        let n = self.size;
        (0..n)
            .map(|j| {
                let mut acc = cx::zero::<R>();
                for (k, a) in v.iter().enumerate().take(n) {
                    acc = acc + self.coeffs[j + k].clone() * a;
                }
                acc
            })
            .collect()
    }
}

/// Section of size `n` from an explicit coefficient list `c_{-1..-K}` whose
/// omitted tail has absolute sum at most `tail`.
pub fn section_from_coeffs<R: Real>(coeffs: &[C<R>], tail: f64, n: usize) -> Result<HankelSection<R>> {
    let k = coeffs.len();
    if n == 0 || 2 * n > k {
        return Err(LabError::InsufficientWindow(n, 2 * n, k));
    }
    let rest: f64 = coeffs[n..].iter().map(|c| lower(c).norm()).sum();
    let real = coeffs.iter().all(|c| c.im.is_zero());
    Ok(HankelSection { size: n, coeffs: coeffs[..2 * n - 1].to_vec(), truncation_defect: 2.0 * (rest + tail), real })
}

/// Hankel section of size `n`; needs `n <= K/2`.
pub fn build_section<R: Real>(window: &FourierWindow<R>, n: usize) -> Result<HankelSection<R>> {
    section_from_coeffs(&window.coefficients, window.tail_bound, n)
}

enum Decomp<R: Real> {
    Real(HermitianEigen<R>),
    Complex(HermitianEigen<C<R>>),
}

/// Singular values (descending) with vectors available on demand.
pub struct SingularSystem<R: Real> {
    pub values: Vec<R>,
    pub noise_floor: R,
    order: Vec<usize>,
    decomp: Decomp<R>,
    size: usize,
}

/// `s_n`, the Schmidt vector `v_n` (coefficients of a polynomial in `z`) and
/// `w_n = H v_n / s_n`.
#[derive(Clone, Debug)]
pub struct SingularTriple<R: Real> {
    pub index: usize,
    pub value: R,
    pub vector: Vec<C<R>>,
    pub covector: Vec<C<R>>,
    pub trusted: bool,
}

pub fn singular_system<R: Real>(section: &HankelSection<R>) -> Result<SingularSystem<R>> {
    let n = section.size;
    let (decomp, pairs): (Decomp<R>, Vec<(R, usize)>) = if section.real {
        let a: Vec<R> = section.dense().into_iter().map(|z| z.re).collect();
        let eig = HermitianEigen::new(a, n)?;
        let pairs = eig.values().iter().enumerate().map(|(i, v)| (v.abs(), i)).collect();
        (Decomp::Real(eig), pairs)
    } else {
        let m = 2 * n;
        let mut a = vec![cx::zero::<R>(); m * m];
        for j in 0..n {
            for k in 0..n {
                let h = section.entry(j, k);
                a[j * m + n + k] = h.clone();
                a[(n + k) * m + j] = h.conj();
            }
        }
        let eig = HermitianEigen::new(a, m)?;
        let vals = eig.values();
        let pairs = (n..m).rev().map(|i| (vals[i].clone().max_of(R::zero()), i)).collect();
        (Decomp::Complex(eig), pairs)
    };
    let mut pairs = pairs;
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let values: Vec<R> = pairs.iter().map(|p| p.0.clone()).collect();
    let order = pairs.iter().map(|p| p.1).collect();
    let s0 = values.first().cloned().unwrap_or_else(R::zero);
    let noise_floor = R::from_f64(1e3) * &R::epsilon() * &s0;
    Ok(SingularSystem { values, noise_floor, order, decomp, size: n })
}

impl<R: Real> SingularSystem<R> {
    pub fn trusted(&self, n: usize) -> bool {
        n < self.values.len() && self.values[n] > self.noise_floor
    }

    /// Number of leading trusted values.
    pub fn trusted_count(&self) -> usize {
        (0..self.values.len()).take_while(|&n| self.trusted(n)).count()
    }

    pub fn triple(&self, section: &HankelSection<R>, n: usize) -> SingularTriple<R> {
        let idx = self.order[n];
        let value = self.values[n].clone();
        let vector: Vec<C<R>> = match &self.decomp {
            Decomp::Real(eig) => {
                let x = eig.vector(idx, &[]);
                if eig.values()[idx].is_negative() {
                    x.into_iter().map(|t| C::new(R::zero(), t)).collect()
                } else {
                    x.into_iter().map(|t| C::new(t, R::zero())).collect()
                }
            }
            Decomp::Complex(eig) => {
                let x = eig.vector(idx, &[]);
                let mut v: Vec<C<R>> = x[self.size..].to_vec();
                crate::num::linalg::normalize(&mut v);
                v
            }
        };
        let hv = section.apply(&vector);
        let covector = if value.is_zero() {
            vec![cx::zero(); hv.len()]
        } else {
            let inv = R::one() / &value;
            hv.iter().map(|z| cx::scale(z, &inv)).collect()
        };
        SingularTriple { index: n, value, vector, covector, trusted: self.trusted(n) }
    }
}

/// Triples `0..=upto`, untrusted ones flagged.
pub fn singular_triples<R: Real>(section: &HankelSection<R>, upto: usize) -> Result<Vec<SingularTriple<R>>> {
    if upto >= section.size {
        return Err(LabError::InvalidArgument(format!("index {upto} outside a section of size {}", section.size)));
    }
    let sys = singular_system(section)?;
    Ok((0..=upto).map(|n| sys.triple(section, n)).collect())
}

/// Section size policy for AAK runs.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionPolicy {
    pub min_size: usize,
    pub per_degree: usize,
    pub defect_ratio: f64,
    pub max_raises: usize,
    /// Window length as a multiple of the section size.
    pub window_factor: usize,
}

impl Default for SectionPolicy {
    fn default() -> Self {
        SectionPolicy { min_size: 64, per_degree: 4, defect_ratio: 1e-3, max_raises: 4, window_factor: 4 }
    }
}

/// Window, section and singular system sized for degrees up to `n_max`.
pub struct AakSetup<R: Real> {
    pub window: FourierWindow<R>,
    pub section: HankelSection<R>,
    pub system: SingularSystem<R>,
    pub warnings: Vec<String>,
}

fn log_estimate<R: Real>(values: &[R], defect: f64, n: usize) -> f64 {
    // extrapolate the last clean values when s_n itself sits under the defect
    let logs: Vec<(usize, f64)> = values
        .iter()
        .enumerate()
        .map(|(i, v)| (i, crate::num::ln_to_f64(v)))
        .filter(|(_, l)| l.is_finite() && *l > (100.0 * defect).ln())
        .collect();
    let direct = values.get(n).map(crate::num::ln_to_f64).unwrap_or(f64::NEG_INFINITY);
    if logs.len() < 5 || logs.last().map(|l| l.0 >= n).unwrap_or(false) {
        return direct;
    }
    let tail = &logs[logs.len() - 5..];
    let mx = tail.iter().map(|p| p.0 as f64).sum::<f64>() / 5.0;
    let my = tail.iter().map(|p| p.1).sum::<f64>() / 5.0;
    let sxy: f64 = tail.iter().map(|p| (p.0 as f64 - mx) * (p.1 - my)).sum();
    let sxx: f64 = tail.iter().map(|p| (p.0 as f64 - mx).powi(2)).sum();
    let slope = (sxy / sxx).min(0.0);
    (my + slope * (n as f64 - mx)).min(direct)
}

pub fn prepare_aak<R: Real>(spec: &AnalyticFunctionSpec, n_max: usize, policy: &SectionPolicy) -> Result<AakSetup<R>> {
    let mut size = (policy.per_degree * n_max).max(policy.min_size).max(n_max + 2);
    let mut warnings = Vec::new();
    let mut raises = 0;
    loop {
        let window = fourier_coefficients::<R>(spec, policy.window_factor * size, None)?;
        let section = build_section(&window, size)?;
        let system = singular_system(&section)?;
        let defect = section.truncation_defect;
        let target = log_estimate(&system.values, defect, n_max) + policy.defect_ratio.ln();
        if defect == 0.0 || defect.ln() < target || !system.trusted(n_max) || raises >= policy.max_raises {
            if defect > 0.0 && defect.ln() >= target && system.trusted(n_max) {
                warnings.push(format!("section {size}: truncation defect {defect:e} above target"));
            }
            return Ok(AakSetup { window, section, system, warnings });
        }
        // predict from the coefficient decay how far to go
        let c = &window.coefficients;
        let mut next = size + size / 2;
        let rate = {
            let a = lower(&c[size]).norm().ln();
            let b = lower(&c[2 * size - 1]).norm().ln();
            ((b - a) / (size as f64 - 1.0)).min(-1e-3)
        };
        if rate.is_finite() {
            let need = size as f64 + (target - defect.ln()) / rate + 8.0;
            if need.is_finite() && need > size as f64 {
                next = next.min(need.ceil() as usize).max(size + 8);
            }
        }
        size = next;
        raises += 1;
    }
}

fn ascending_by_modulus<R: Real>(v: &mut [C<R>]) {
    v.sort_by(|a, b| cx::abs(a).partial_cmp(&cx::abs(b)).unwrap_or(std::cmp::Ordering::Equal));
}

/// Poles from the zeros of `v` with the root-tolerance annulus rule.
fn select_poles<R: Real>(v: &[C<R>], want: usize, warnings: &mut Vec<String>) -> Result<Vec<C<R>>> {
    let found = poly::roots_within(v, 1.05);
    if !found.converged {
        warnings.push("root polishing did not fully converge".into());
    }
    let tol = 1e-8;
    let mut inside: Vec<C<R>> = found.roots.iter().filter(|z| cx::abs(*z).to_f64() < 1.0 - tol).cloned().collect();
    let mut annulus: Vec<C<R>> = found.roots.iter().filter(|z| cx::abs(*z).to_f64() < 1.0 + tol).cloned().collect();
    if inside.len() == want {
        return Ok(inside);
    }
    if inside.len() > want || annulus.len() < want {
        return Err(LabError::PoleCountMismatch { expected: want, found: inside.len(), annulus: annulus.len() });
    }
    warnings.push(format!("{} zeros strictly inside, kept the {want} smallest", inside.len()));
    ascending_by_modulus(&mut annulus);
    annulus.truncate(want);
    inside.clear();
    Ok(annulus)
}

/// `P_+(f v)` and the coefficients of `P_-(f v) = Σ b_m z^{-m-1}`.
fn split_product<R: Real>(window: &FourierWindow<R>, v: &[C<R>]) -> (Vec<C<R>>, Vec<C<R>>) {
    let n = v.len();
    let k = window.len();
    let mut p = Vec::with_capacity(n);
    for j in 0..n {
        let mut acc = window.constant.clone() * &v[j];
        for (i, a) in v.iter().enumerate().skip(j + 1) {
            acc = acc + window.coeff(i - j) * a;
        }
        p.push(acc);
    }
    let mlen = k.saturating_sub(n) + 1;
    let b = crate::par::map_range(mlen, |m| {
        let mut acc = cx::zero::<R>();
        for (i, a) in v.iter().enumerate() {
            let idx = m + i + 1;
            if idx > k {
                break;
            }
            acc = acc + window.coefficients[idx - 1].clone() * a;
        }
        acc
    });
    (p, b)
}

fn residues<R: Real>(num: &[C<R>], den: &[C<R>], poles: Vec<C<R>>) -> Vec<Pole<R>> {
    let dd = poly::derivative(den);
    poles
        .into_iter()
        .map(|p| {
            let r = poly::horner(num, &p) / poly::horner(&dd, &p);
            Pole::simple(p, r)
        })
        .collect()
}

/// AAK approximant of degree `n` from a prepared singular system.
pub fn aak_from_system<R: Real>(
    spec: &AnalyticFunctionSpec,
    window: &FourierWindow<R>,
    section: &HankelSection<R>,
    system: &SingularSystem<R>,
    n: usize,
    grid: usize,
) -> Result<(MeromorphicApproximant<R>, ErrorTrace)> {
    if n >= section.size {
        return Err(LabError::InsufficientWindow(section.size, 2 * (n + 1), window.len()));
    }
    let mut warnings = Vec::new();
    let mut idx = n;
    if n > 0 {
        let gap = system.values[n - 1].clone() - system.values[n].clone();
        if gap < R::from_f64(1e-12) * &system.values[n - 1] && system.trusted(n - 1) {
            idx = n - 1;
            warnings.push(format!("s_{} and s_{n} cluster; reporting index {idx}", n - 1));
        }
    }
    let rank = system.trusted_count();
    if idx > rank && !system.trusted(idx) {
        warnings.push(format!("numerical rank {rank} below {idx}; degree capped at the rank"));
        idx = rank;
    }
    let v: Vec<C<R>> = if system.trusted(idx) || idx == 0 {
        system.triple(section, idx).vector
    } else {
        // numerically finite rank: minimal kernel polynomial of degree idx
        warnings.push(format!("s_{idx} below the noise floor; using the minimal kernel polynomial"));
        let rows = section.size;
        let cols = idx + 1;
        let mut a = Vec::with_capacity(rows * cols);
        for j in 0..rows {
            for k in 0..cols {
                a.push(section.entry(j, k));
            }
        }
        let (q, _) = null_vector(a, rows, cols)?;
        let mut q = q;
        q.resize(section.size, cx::zero());
        q
    };
    let poles = select_poles(&v, idx, &mut warnings)?;
    let (p, b) = split_product(window, &v);
    let poles = residues(&p, &v, poles);
    let m = MeromorphicApproximant {
        provenance: Provenance::Aak,
        degree_budget: n,
        poles,
        form: ApproximantForm::Rational { num: p, den: v.clone() },
        circular: Some(CircularError { numer: b, den: v }),
        spurious: Vec::new(),
        warnings,
    };
    let trace = error_on_circle(spec, &m, grid)?;
    Ok((m, trace))
}

/// AAK approximant of degree `n` with section size `big_n`.
pub fn aak_approximant<R: Real>(
    spec: &AnalyticFunctionSpec,
    window: &FourierWindow<R>,
    n: usize,
    big_n: usize,
    grid: usize,
) -> Result<(MeromorphicApproximant<R>, ErrorTrace)> {
    let section = build_section(window, big_n)?;
    let system = singular_system(&section)?;
    aak_from_system(spec, window, &section, &system, n, grid)
}

/// Replace the error of `m` by its Nehari-optimal circular correction.
/// Poles and principal parts are kept; the result is known on the circle.
pub fn nehari_modify<R: Real>(
    spec: &AnalyticFunctionSpec,
    window: &FourierWindow<R>,
    m: &MeromorphicApproximant<R>,
    big_n: usize,
    grid: usize,
) -> Result<(MeromorphicApproximant<R>, ErrorTrace)> {
    let k = window.len();
    let pl = m.principal_laurent(k);
    let coeffs: Vec<C<R>> = (1..=k).map(|i| window.coeff(i) - pl[i - 1].clone()).collect();
    let mut tail = window.tail_bound;
    for p in &m.poles {
        let r = cx::abs(&p.location).to_f64();
        let mag: f64 = p.principal.iter().map(|c| lower(c).norm()).sum();
        tail += mag * r.powi(k as i32) / (1.0 - r).max(1e-300) * (k as f64).powi(p.principal.len() as i32 - 1);
    }
    let section = section_from_coeffs(&coeffs, tail, big_n)?;
    let system = singular_system(&section)?;
    let mut out = m.clone();
    out.provenance = Provenance::NehariModified;
    out.form = ApproximantForm::BoundaryOnly;
    if !system.trusted(0) {
        out.warnings.push("error is at the noise floor; Nehari correction skipped".into());
        let numer = vec![cx::zero::<R>()];
        out.circular = Some(CircularError { numer, den: vec![cx::one()] });
        let trace = error_on_circle(spec, &out, grid)?;
        return Ok((out, trace));
    }
    let v0 = system.triple(&section, 0).vector;
    let ewin = FourierWindow {
        coefficients: coeffs,
        constant: cx::zero(),
        extraction_radius: window.extraction_radius,
        tail_bound: tail,
        envelope_m: window.envelope_m,
        envelope_r: window.envelope_r,
        nodes: window.nodes,
    };
    let (_, b) = split_product(&ewin, &v0);
    out.circular = Some(CircularError { numer: b, den: v0 });
    let trace = error_on_circle(spec, &out, grid)?;
    Ok((out, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{Mp, C64};

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn rank_one_section() {
        let f = AnalyticFunctionSpec::pole_sum(vec![r(0.4)], vec![r(1.0)]).unwrap();
        let w = fourier_coefficients::<f64>(&f, 64, None).unwrap();
        let s = build_section(&w, 3).unwrap();
        let want = [[1.0, 0.4, 0.16], [0.4, 0.16, 0.064], [0.16, 0.064, 0.0256]];
        for (j, row) in want.iter().enumerate() {
            for (k, w) in row.iter().enumerate() {
                assert!((s.entry(j, k) - r(*w)).norm() < 1e-15);
            }
        }
        assert!(build_section(&w, 40).is_err());
        let t = singular_triples(&build_section(&w, 20).unwrap(), 2).unwrap();
        assert!((t[0].value - (1.0 - 0.4f64.powi(40)) / 0.84).abs() < 1e-14);
        assert!(t[1].value < 1e-14 && !t[1].trusted);
    }

    #[test]
    fn sqrt_pair_section() {
        let f = AnalyticFunctionSpec::sqrt_pair(r(0.5), r(-0.5)).unwrap();
        let w = fourier_coefficients::<Mp>(&f, 64, None).unwrap();
        let s = build_section(&w, 2).unwrap();
        let d: Vec<C64> = s.dense().iter().map(lower).collect();
        assert!((d[0] - r(1.0)).norm() < 1e-30 && d[1].norm() < 1e-30 && d[2].norm() < 1e-30);
        assert!((d[3] - r(0.125)).norm() < 1e-30);
    }

    #[test]
    fn aak_recovers_single_pole() {
        let f = AnalyticFunctionSpec::pole_sum(vec![r(0.4)], vec![r(1.0)]).unwrap();
        let w = fourier_coefficients::<f64>(&f, 128, None).unwrap();
        let (m, t) = aak_approximant(&f, &w, 1, 32, 256).unwrap();
        assert_eq!(m.pole_count(), 1);
        assert!((m.pole_locations()[0] - r(0.4)).norm() < 1e-10);
        assert!(t.sup < 1e-12);
        let (m0, t0) = aak_approximant(&f, &w, 0, 32, 256).unwrap();
        assert_eq!(m0.pole_count(), 0);
        assert!((t0.sup - (1.0 - 0.4f64.powi(64)) / 0.84).abs() < 1e-12);
    }

    #[test]
    fn degree_beyond_rank_returns_the_function() {
        let f = AnalyticFunctionSpec::pole_sum(vec![r(0.4), C64::new(-0.3, 0.2)], vec![r(1.0), r(0.5)]).unwrap();
        let w = fourier_coefficients::<f64>(&f, 128, None).unwrap();
        let (m, t) = aak_approximant(&f, &w, 4, 32, 256).unwrap();
        assert_eq!(m.pole_count(), 2);
        assert_eq!(m.degree_budget, 4);
        assert!(t.sup < 1e-10, "{}", t.sup);
        assert!(m.warnings.iter().any(|w| w.contains("rank 2")));
    }

    #[test]
    fn aak_error_is_circular_and_poles_real() {
        let f = AnalyticFunctionSpec::sqrt_pair(r(0.5), r(-0.5)).unwrap();
        let setup = prepare_aak::<Mp>(&f, 10, &SectionPolicy::default()).unwrap();
        for n in [5usize, 10] {
            let (m, t) = aak_from_system(&f, &setup.window, &setup.section, &setup.system, n, 512).unwrap();
            assert_eq!(m.pole_count(), n);
            assert!(m.pole_locations().iter().all(|p| p.im.abs() < 1e-3 && p.re.abs() <= 0.5 + 1e-9));
            assert!(t.circularity() <= 1.05, "{}", t.circularity());
            let s = setup.system.values[n].to_f64();
            assert!((t.sup - s).abs() / s < 1e-6);
        }
    }

    #[test]
    fn nehari_on_zero_gives_first_singular_value() {
        let f = AnalyticFunctionSpec::pole_sum(vec![r(0.4)], vec![r(1.0)]).unwrap();
        let w = fourier_coefficients::<f64>(&f, 128, None).unwrap();
        let zero = MeromorphicApproximant::<f64>::zero(Provenance::Interpolation);
        let (m, t) = nehari_modify(&f, &w, &zero, 32, 256).unwrap();
        assert_eq!(m.pole_count(), 0);
        assert!((t.sup - 1.0 / 0.84).abs() < 1e-12);
        assert!(t.circularity() < 1.0 + 1e-10);
    }
}
