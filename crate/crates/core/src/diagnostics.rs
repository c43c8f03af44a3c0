//! Limit objects of approximant families: counting measures, weak* distances,
//! capacity-convergence maps, n-th root rates and bound checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::approximant::MeromorphicApproximant;
use crate::catalog::AnalyticFunctionSpec;
use crate::cut::CutSolution;
use crate::error::{LabError, Result};
use crate::num::{cx, lift, Real, C64};
use crate::par;
use crate::potential::measure::{green_potential, DiscreteMeasure};
use crate::potential::ArcChain;

/// Normalized counting measure of the poles, `Σ mult/n · δ_p`.
pub fn counting_measure<R: Real>(m: &MeromorphicApproximant<R>, n: usize) -> Result<DiscreteMeasure> {
    if n == 0 {
        return Err(LabError::InvalidArgument("counting measure needs n >= 1".into()));
    }
    let points = m.pole_locations();
    let weights = m.poles.iter().map(|p| p.multiplicity as f64 / n as f64).collect();
    DiscreteMeasure::new(points, weights)
}

/// Fine discretization of the cut's equilibrium measure.
pub fn equilibrium_reference(cut: &CutSolution, per_arc: usize) -> DiscreteMeasure {
    cut.capacity.fine_measure(per_arc)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeakStarDistance {
    pub kolmogorov: f64,
    pub potential_sup: f64,
    /// Empirical points farther than `far` from the cut (still projected).
    pub far_points: usize,
    pub control_points: usize,
    pub warnings: Vec<String>,
}

/// Arc index and parameter of the nearest cut point, and the distance.
fn project(chain: &ArcChain, z: C64) -> (usize, f64, f64) {
    let mut best = (0, 0.0, f64::INFINITY);
    for (i, a) in chain.arcs.iter().enumerate() {
        let (t, d) = a.closest(z);
        if d < best.2 {
            best = (i, t, d);
        }
    }
    best
}

fn arc_kolmogorov(mut marks: Vec<(f64, f64)>, scale: f64) -> f64 {
    marks.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut run = 0.0;
    let mut sup: f64 = 0.0;
    let mut i = 0;
    while i < marks.len() {
        let t = marks[i].0;
        while i < marks.len() && marks[i].0 - t <= 1e-12 * scale {
            run += marks[i].1;
            i += 1;
        }
        sup = sup.max(run.abs());
    }
    sup
}

/// Control points for potential comparisons: a lattice in `|z| <= 0.98`
/// at distance at least `margin` from the cut.
pub fn control_grid(chain: &ArcChain, step: f64, margin: f64) -> Vec<C64> {
    let k = (0.98 / step).floor() as i64;
    let mut out = Vec::new();
    for i in -k..=k {
        for j in -k..=k {
            let z = C64::new(i as f64 * step, j as f64 * step);
            if z.norm() <= 0.98 && chain.distance(z) >= margin {
                out.push(z);
            }
        }
    }
    out
}

/// Kolmogorov distance along the cut (per arc, points projected to the
/// nearest cut point) and the sup of the Green potential difference on a
/// control grid at distance `>= 0.1` from the cut.
pub fn weak_star_distance(emp: &DiscreteMeasure, reference: &DiscreteMeasure, cut: &CutSolution) -> WeakStarDistance {
    let far = 0.1;
    let chain = &cut.chain;
    let arcs = chain.arcs.len();
    let mut marks: Vec<Vec<(f64, f64)>> = vec![Vec::new(); arcs];
    let mut far_points = 0;
    for (p, w) in emp.points.iter().zip(&emp.weights) {
        let (i, t, d) = project(chain, *p);
        if d > far {
            far_points += 1;
        }
        marks[i].push((t, *w));
    }
    let projected = par::map(&reference.points, |p| project(chain, *p));
    for ((i, t, _), w) in projected.into_iter().zip(&reference.weights) {
        marks[i].push((t, -w));
    }
    let kolmogorov = marks
        .into_iter()
        .zip(&chain.arcs)
        .map(|(m, a)| {
            let (lo, hi) = a.domain();
            arc_kolmogorov(m, (hi - lo).abs().max(1.0))
        })
        .fold(0.0, f64::max);
    let grid = control_grid(chain, 0.05, far);
    let usable: Vec<C64> = grid.into_iter().filter(|z| emp.points.iter().all(|p| (p - z).norm() > 1e-9)).collect();
    let diffs = par::map(&usable, |z| (green_potential(emp, *z) - green_potential(reference, *z)).abs());
    let potential_sup = diffs.iter().cloned().fold(0.0, f64::max);
    let mut warnings = Vec::new();
    if far_points > 0 {
        warnings.push(format!("{far_points} empirical points farther than {far} from the cut"));
    }
    WeakStarDistance { kolmogorov, potential_sup, far_points, control_points: usable.len(), warnings }
}

/// Sampling lattice for [`capacity_map`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub spacing: f64,
    /// Jitter as a fraction of the spacing, per coordinate.
    pub jitter: f64,
    pub margin: f64,
    pub max_radius: f64,
    pub mask_budget: f64,
    pub seed: u64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { spacing: 0.03, jitter: 0.25, margin: 0.1, max_radius: 0.98, mask_budget: 0.05, seed: 7 }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.spacing > 0.0
            && (0.0..0.5).contains(&self.jitter)
            && self.margin > 0.0
            && self.max_radius > 0.0
            && self.max_radius < 1.0
            && (0.0..1.0).contains(&self.mask_budget);
        if ok {
            Ok(())
        } else {
            Err(LabError::InvalidArgument(format!("bad grid spec {self:?}")))
        }
    }

    /// Jittered lattice points in `|z| <= max_radius`, `dist(z, cut) >= margin`.
    pub fn points(&self, chain: &ArcChain) -> Vec<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let k = (self.max_radius / self.spacing).ceil() as i64;
        let mut out = Vec::new();
        for i in -k..=k {
            for j in -k..=k {
                let dx = rng.gen_range(-self.jitter..=self.jitter);
                let dy = rng.gen_range(-self.jitter..=self.jitter);
                let z = C64::new((i as f64 + dx) * self.spacing, (j as f64 + dy) * self.spacing);
                if z.norm() <= self.max_radius && chain.distance(z) >= self.margin {
                    out.push(z);
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct CapacityMap {
    pub n: usize,
    pub capacity: f64,
    pub points: Vec<C64>,
    /// `(1/2n) log|f - M_n|`; `-inf` where the error vanishes to working precision.
    pub observed: Vec<f64>,
    /// `g(μ, D; z) - 1/cap`.
    pub predicted: Vec<f64>,
    pub deviation: Vec<f64>,
    pub masked: Vec<bool>,
    pub median_dev: f64,
    pub p90_dev: f64,
    pub masked_fraction: f64,
    /// `Σ 1/log(1/ρ)` over disks covering the masked points.
    pub cover_bound: f64,
    pub exact_recovery: bool,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Groups of masked points within `1.5 * spacing` of each other, each
/// covered by one disk.
fn cover_bound(points: &[C64], spacing: f64) -> f64 {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in 0..i {
            if (points[i] - points[j]).norm() <= 1.5 * spacing {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<C64>> = Default::default();
    for (i, p) in points.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(*p);
    }
    groups
        .values()
        .map(|g| {
            let c = g.iter().sum::<C64>() / g.len() as f64;
            let rho = g.iter().map(|p| (p - c).norm()).fold(0.0, f64::max) + spacing;
            if rho >= 1.0 {
                f64::INFINITY
            } else {
                1.0 / (1.0 / rho).ln()
            }
        })
        .sum()
}

/// Observed against predicted n-th root error field on a jittered grid.
pub fn capacity_map<R: Real>(
    spec: &AnalyticFunctionSpec,
    m: &MeromorphicApproximant<R>,
    n: usize,
    cut: &CutSolution,
    grid: &GridSpec,
) -> Result<CapacityMap> {
    grid.validate()?;
    if n == 0 {
        return Err(LabError::InvalidArgument("capacity map needs n >= 1".into()));
    }
    let points = grid.points(&cut.chain);
    let tol = 0.5 * grid.margin;
    let errs: Vec<Result<(f64, f64)>> = par::map(&points, |z| {
        let zr = lift::<R>(*z);
        let f = spec.continuation_in(&zr, Some(&cut.chain), tol)?;
        let e = f.clone() - m.eval(&zr)?;
        let scale = cx::abs(&f).to_f64().max(1.0);
        let ae = cx::abs(&e);
        let ln = if ae.is_zero() { f64::NEG_INFINITY } else { ae.ln().to_f64() };
        Ok((ln, (R::epsilon().to_f64() * 64.0 * scale).ln()))
    });
    let level = 1.0 / cut.capacity.capacity;
    let mut observed = Vec::with_capacity(points.len());
    let mut exact = true;
    for r in errs {
        let (ln, floor) = r?;
        if ln > floor {
            exact = false;
            observed.push(ln / (2.0 * n as f64));
        } else {
            observed.push(f64::NEG_INFINITY);
        }
    }
    let predicted: Vec<f64> = par::map(&points, |z| cut.capacity.potential(*z) - level);
    let capacity = cut.capacity.capacity;
    if exact {
        let k = points.len();
        return Ok(CapacityMap {
            n,
            capacity,
            points,
            observed,
            predicted,
            deviation: vec![0.0; k],
            masked: vec![false; k],
            median_dev: 0.0,
            p90_dev: 0.0,
            masked_fraction: 0.0,
            cover_bound: 0.0,
            exact_recovery: true,
        });
    }
    let deviation: Vec<f64> = observed
        .iter()
        .zip(&predicted)
        .map(|(o, p)| if o.is_finite() { (o - p).abs() } else { f64::INFINITY })
        .collect();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| deviation[b].total_cmp(&deviation[a]));
    let budget = (grid.mask_budget * points.len() as f64).floor() as usize;
    let mut masked = vec![false; points.len()];
    for &i in order.iter().take(budget) {
        masked[i] = true;
    }
    let mut kept: Vec<f64> = deviation.iter().zip(&masked).filter(|(_, m)| !**m).map(|(d, _)| *d).collect();
    kept.sort_by(|a, b| a.total_cmp(b));
    let masked_pts: Vec<C64> = points.iter().zip(&masked).filter(|(_, m)| **m).map(|(p, _)| *p).collect();
    let masked_fraction = if points.is_empty() { 0.0 } else { masked_pts.len() as f64 / points.len() as f64 };
    Ok(CapacityMap {
        n,
        capacity,
        median_dev: quantile(&kept, 0.5),
        p90_dev: quantile(&kept, 0.9),
        masked_fraction,
        cover_bound: cover_bound(&masked_pts, grid.spacing),
        points,
        observed,
        predicted,
        deviation,
        masked,
        exact_recovery: false,
    })
}

/// Least-squares fit of `log v_n` against `n` over a trailing window.
#[derive(Clone, Debug, PartialEq)]
pub struct RateSeries {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    pub window: (usize, usize),
    pub slope: f64,
    pub intercept: f64,
    /// `exp(slope)`.
    pub limit: f64,
    /// RMS of the log residuals.
    pub residual: f64,
    /// Decay accelerates across the window (superexponential, e.g. essential singularities).
    pub trend_to_zero: bool,
}

impl RateSeries {
    /// `v_n^{1/n}` for each point.
    pub fn nth_roots(&self) -> Vec<f64> {
        self.indices.iter().zip(&self.values).map(|(n, v)| f64::powf(*v, 1.0 / *n as f64)).collect()
    }

    /// Fitted value `exp(intercept + slope n)`.
    pub fn predict(&self, n: usize) -> f64 {
        (self.intercept + self.slope * n as f64).exp()
    }
}

fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    (slope, intercept, (rss / k).sqrt())
}

/// Fit `log v_n = α + β n` over `window` (default `[max(5, n_max/2), n_max]`
/// over the trusted points). Values at or below `noise_floor` are untrusted.
pub fn rate_extrapolate(series: &[(usize, f64)], window: Option<(usize, usize)>, noise_floor: f64) -> Result<RateSeries> {
    let trusted: Vec<(usize, f64)> = series.iter().cloned().filter(|(_, v)| v.is_finite() && *v > noise_floor && *v > 0.0).collect();
    let first_bad = series.iter().find(|(_, v)| !(v.is_finite() && *v > noise_floor && *v > 0.0)).map(|p| p.0);
    let n_max = trusted.iter().map(|p| p.0).max().unwrap_or(0);
    let (lo, hi) = window.unwrap_or(((n_max / 2).max(5), n_max));
    let pts: Vec<(usize, f64)> = trusted.into_iter().filter(|(n, _)| (lo..=hi).contains(n)).collect();
    if pts.len() < 5 {
        return Err(LabError::NoiseFloor(first_bad.unwrap_or(hi)));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0 as f64).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept, residual) = line_fit(&xs, &ys);
    let trend_to_zero = if pts.len() >= 8 {
        let h = pts.len() / 2;
        let (s1, _, _) = line_fit(&xs[..h], &ys[..h]);
        let (s2, _, _) = line_fit(&xs[h..], &ys[h..]);
        s2 < s1 - 0.05 * s1.abs()
    } else {
        false
    };
    Ok(RateSeries {
        indices: pts.iter().map(|p| p.0).collect(),
        values: pts.iter().map(|p| p.1).collect(),
        window: (lo, hi),
        slope,
        intercept,
        limit: slope.exp(),
        residual,
        trend_to_zero,
    })
}

/// Largest `p <= 6` such that rotation by `2π/p` about the origin permutes `points`.
pub fn symmetry_order(points: &[C64], tol: f64) -> usize {
    if points.iter().all(|z| z.norm() <= tol) {
        return 1;
    }
    (2..=6)
        .rev()
        .find(|&p| {
            let w = C64::from_polar(1.0, std::f64::consts::TAU / p as f64);
            points.iter().all(|z| points.iter().any(|y| (z * w - y).norm() <= tol))
        })
        .unwrap_or(1)
}

/// Rate fit on the residue class of the last trusted degree modulo `period`.
/// Sequences of `p`-fold symmetric functions move in steps of `p`.
pub fn periodic_rate(series: &[(usize, f64)], period: usize, noise_floor: f64) -> Result<RateSeries> {
    if period <= 1 {
        return rate_extrapolate(series, None, noise_floor);
    }
    let ok = |v: f64| v.is_finite() && v > noise_floor && v > 0.0;
    let n_max = series.iter().filter(|p| ok(p.1)).map(|p| p.0).max().unwrap_or(0);
    let class: Vec<(usize, f64)> = series.iter().cloned().filter(|(n, v)| ok(*v) && n % period == n_max % period).collect();
    let lo = (n_max / 2).max(5).min(n_max.saturating_sub(4 * period));
    rate_extrapolate(&class, Some((lo, n_max)), noise_floor)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundTolerances {
    /// Absolute slack on the Walsh bound.
    pub walsh: f64,
    /// Relative tolerance of the optimal-rate check.
    pub optimal: f64,
}

impl Default for BoundTolerances {
    fn default() -> Self {
        BoundTolerances { walsh: 1e-3, optimal: 0.03 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub capacity: f64,
    pub limit: f64,
    /// `exp(-1/cap)`.
    pub walsh_bound: f64,
    /// `exp(-2/cap)`.
    pub optimal_rate: f64,
    /// `walsh_bound + tol - limit`; negative on failure.
    pub walsh_margin: f64,
    pub walsh_pass: bool,
    /// `|limit / optimal_rate - 1|`.
    pub optimal_deviation: f64,
    pub optimal_pass: bool,
}

impl BoundReport {
    pub fn summary(&self) -> String {
        let verdict = |b: bool| if b { "PASS" } else { "FAIL" };
        format!(
            "walsh {} (limit {:.6e} vs {:.6e}, margin {:.3e}); optimal {} (rate {:.6e}, deviation {:.3e})",
            verdict(self.walsh_pass),
            self.limit,
            self.walsh_bound,
            self.walsh_margin,
            verdict(self.optimal_pass),
            self.optimal_rate,
            self.optimal_deviation
        )
    }
}

pub fn bound_checks(series: &RateSeries, capacity: f64, tol: &BoundTolerances) -> BoundReport {
    let walsh_bound = (-1.0 / capacity).exp();
    let optimal_rate = (-2.0 / capacity).exp();
    let walsh_margin = walsh_bound + tol.walsh - series.limit;
    let optimal_deviation = (series.limit / optimal_rate - 1.0).abs();
    BoundReport {
        capacity,
        limit: series.limit,
        walsh_bound,
        optimal_rate,
        walsh_margin,
        walsh_pass: walsh_margin >= 0.0,
        optimal_deviation,
        optimal_pass: optimal_deviation <= tol.optimal,
    }
}

pub fn bound_checks_for(series: &RateSeries, cut: &CutSolution, tol: &BoundTolerances) -> BoundReport {
    bound_checks(series, cut.capacity.capacity, tol)
}

pub const TABLE_COLUMNS: [&str; 9] =
    ["n", "value", "log_value", "fitted_limit", "kolmogorov", "potential_sup", "median_dev", "p90_dev", "masked_fraction"];

/// One row of the per-n diagnostics table; absent fields print empty.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagnosticsRow {
    pub n: usize,
    pub value: Option<f64>,
    pub fitted_limit: Option<f64>,
    pub kolmogorov: Option<f64>,
    pub potential_sup: Option<f64>,
    pub median_dev: Option<f64>,
    pub p90_dev: Option<f64>,
    pub masked_fraction: Option<f64>,
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.17e}")).unwrap_or_default()
}

impl DiagnosticsRow {
    pub fn csv(&self) -> String {
        let log = self.value.map(f64::ln);
        [
            self.n.to_string(),
            cell(self.value),
            cell(log),
            cell(self.fitted_limit),
            cell(self.kolmogorov),
            cell(self.potential_sup),
            cell(self.median_dev),
            cell(self.p90_dev),
            cell(self.masked_fraction),
        ]
        .join(",")
    }
}

pub fn diagnostics_table(rows: &[DiagnosticsRow]) -> String {
    let mut s = TABLE_COLUMNS.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv());
        s.push('\n');
    }
    s
}

/// Sidecar schema for [`diagnostics_table`].
pub fn diagnostics_schema() -> String {
    let desc = [
        ("n", "integer", "approximation degree"),
        ("value", "real", "s_n or sup-norm error on the circle"),
        ("log_value", "real", "natural log of value"),
        ("fitted_limit", "real", "extrapolated n-th root limit of the series"),
        ("kolmogorov", "real", "Kolmogorov distance of the pole counting measure to the equilibrium measure"),
        ("potential_sup", "real", "sup of the Green potential difference on the control grid"),
        ("median_dev", "real", "median deviation of the capacity map"),
        ("p90_dev", "real", "90th percentile deviation of the capacity map"),
        ("masked_fraction", "real", "fraction of grid points masked"),
    ];
    let mut s = String::from("column,type,description\n");
    for (c, t, d) in desc {
        s.push_str(&format!("{c},{t},{d}\n"));
    }
    s
}

/// `x,y,observed,predicted,deviation,masked` rows.
pub fn capacity_map_table(map: &CapacityMap) -> String {
    let mut s = String::from("x,y,observed,predicted,deviation,masked\n");
    for i in 0..map.points.len() {
        let z = map.points[i];
        s.push_str(&format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}\n",
            z.re, z.im, map.observed[i], map.predicted[i], map.deviation[i], map.masked[i] as u8
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approximant::{Pole, Provenance};
    use crate::cut::{geodesic_cut, CutOptions};

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn counting_measure_weights() {
        let mut m = MeromorphicApproximant::<f64>::zero(Provenance::Aak);
        m.poles = vec![Pole::simple(r(0.2), r(1.0))];
        let mu = counting_measure(&m, 1).unwrap();
        assert_eq!(mu.points, vec![r(0.2)]);
        assert_eq!(mu.total_mass, 1.0);
        m.poles = vec![Pole { location: r(0.3), multiplicity: 2, principal: vec![r(0.0), r(1.0)] }];
        let mu = counting_measure(&m, 4).unwrap();
        assert_eq!(mu.weights, vec![0.5]);
        assert!(counting_measure(&m, 0).is_err());
    }

    #[test]
    fn weak_star_identity_and_endpoint_mass() {
        let cut = geodesic_cut(r(-0.5), r(0.5), &CutOptions::default()).unwrap();
        let reference = equilibrium_reference(&cut, 512);
        let same = weak_star_distance(&reference, &reference, &cut);
        assert_eq!((same.kolmogorov, same.potential_sup), (0.0, 0.0));
        let end = weak_star_distance(&DiscreteMeasure::dirac(r(0.5)), &reference, &cut);
        assert!(end.kolmogorov >= 0.5 - 1e-3, "{}", end.kolmogorov);
        let off = weak_star_distance(&DiscreteMeasure::dirac(C64::new(0.0, 0.5)), &reference, &cut);
        assert_eq!(off.far_points, 1);
        assert!(!off.warnings.is_empty());
    }

    #[test]
    fn predicted_field_vanishes_at_the_circle() {
        let cut = geodesic_cut(r(-0.5), r(0.5), &CutOptions::default()).unwrap();
        let f = AnalyticFunctionSpec::pole_sum(vec![r(0.4)], vec![r(1.0)]).unwrap();
        let mut m = MeromorphicApproximant::<f64>::zero(Provenance::Aak);
        m.poles = vec![Pole::simple(r(0.4), r(1.0))];
        let map = capacity_map(&f, &m, 1, &cut, &GridSpec::default()).unwrap();
        assert!(map.exact_recovery);
        assert!(map.observed.iter().all(|o| *o == f64::NEG_INFINITY));
        let level = 1.0 / cut.capacity.capacity;
        for (z, p) in map.points.iter().zip(&map.predicted) {
            assert!(*p <= 1e-9);
            if z.norm() > 0.97 {
                assert!((p + level).abs() < 0.05 * level);
            }
        }
        assert!(map.points.len() > 2000);
    }

    #[test]
    fn capacity_map_masks_budget() {
        let cut = geodesic_cut(r(-0.5), r(0.5), &CutOptions::default()).unwrap();
        let f = AnalyticFunctionSpec::sqrt_pair(r(0.5), r(-0.5)).unwrap();
        let m = MeromorphicApproximant::<f64>::zero(Provenance::Aak);
        let grid = GridSpec { spacing: 0.1, ..GridSpec::default() };
        let map = capacity_map(&f, &m, 1, &cut, &grid).unwrap();
        assert!(!map.exact_recovery);
        assert!(map.masked_fraction <= 0.05);
        let worst_kept = map.deviation.iter().zip(&map.masked).filter(|(_, m)| !**m).map(|(d, _)| *d).fold(0.0, f64::max);
        let best_masked = map.deviation.iter().zip(&map.masked).filter(|(_, m)| **m).map(|(d, _)| *d).fold(f64::INFINITY, f64::min);
        assert!(worst_kept <= best_masked);
        assert!(map.median_dev <= map.p90_dev);
        assert!(map.cover_bound > 0.0);
    }

    #[test]
    fn grid_is_seeded() {
        let cut = geodesic_cut(r(-0.5), r(0.5), &CutOptions::default()).unwrap();
        let g = GridSpec::default();
        assert_eq!(g.points(&cut.chain), g.points(&cut.chain));
        let h = GridSpec { seed: 8, ..g.clone() };
        assert_ne!(g.points(&cut.chain), h.points(&cut.chain));
        assert!(GridSpec { jitter: 0.7, ..g }.validate().is_err());
    }

    #[test]
    fn rates_of_synthetic_series() {
        let exact: Vec<(usize, f64)> = (1..=40).map(|n| (n, 0.25f64.powi(n as i32))).collect();
        let s = rate_extrapolate(&exact, None, 0.0).unwrap();
        assert!((s.limit - 0.25).abs() < 1e-12);
        assert!(s.residual < 1e-10);
        assert_eq!(s.window, (20, 40));
        assert!(!s.trend_to_zero);
        let bent: Vec<(usize, f64)> = (1..=40).map(|n| (n, 3.0 * 0.25f64.powi(n as i32) * (n as f64).sqrt())).collect();
        let s = rate_extrapolate(&bent, Some((20, 40)), 0.0).unwrap();
        assert!((s.limit - 0.2543106233900678).abs() < 1e-12);
        assert!((s.limit / 0.25 - 1.0).abs() < 0.02);
        let rank_one = vec![(0, 1.0), (1, 1e-300), (2, 1e-300)];
        assert_eq!(rate_extrapolate(&rank_one, None, 1e-200), Err(LabError::NoiseFloor(1)));
        let fast: Vec<(usize, f64)> = (5..=30).map(|n| (n, (-(n as f64) * (n as f64).ln()).exp())).collect();
        assert!(rate_extrapolate(&fast, Some((5, 30)), 0.0).unwrap().trend_to_zero);
    }

    #[test]
    fn staircase_rates() {
        let w = C64::from_polar(0.5, std::f64::consts::TAU / 3.0);
        assert_eq!(symmetry_order(&[C64::new(0.5, 0.0), w, w * w / 0.5], 1e-12), 3);
        assert_eq!(symmetry_order(&[C64::new(0.6, 0.0), C64::new(-0.6, 0.0)], 1e-12), 2);
        assert_eq!(symmetry_order(&[C64::new(0.6, 0.0), C64::new(-0.5, 0.0)], 1e-12), 1);
        assert_eq!(symmetry_order(&[C64::new(0.0, 0.0)], 1e-12), 1);
        // two near-equal values then a drop of rate^3
        let steps: Vec<(usize, f64)> = (1..=30).map(|n| (n, 0.1f64.powi(3 * (n as i32 / 3)) * [1.0, 0.9, 0.8][n % 3])).collect();
        let plain = rate_extrapolate(&steps, None, 0.0).unwrap();
        let p = periodic_rate(&steps, 3, 0.0).unwrap();
        assert!((p.limit - 0.1).abs() < 1e-12, "{}", p.limit);
        assert!(p.indices.iter().all(|n| n % 3 == 0));
        assert!((plain.limit - 0.1).abs() > 1e-3);
        assert_eq!(periodic_rate(&steps, 1, 0.0).unwrap(), plain);
    }

    #[test]
    fn walsh_and_optimal_bounds() {
        let cap = 0.8;
        let optimal: Vec<(usize, f64)> = (1..=30).map(|n| (n, (-2.0 * n as f64 / cap).exp())).collect();
        let s = rate_extrapolate(&optimal, None, 0.0).unwrap();
        let rep = bound_checks(&s, cap, &BoundTolerances::default());
        assert!(rep.walsh_pass && rep.optimal_pass);
        assert!(rep.optimal_deviation < 1e-12);
        let slow: Vec<(usize, f64)> = (1..=30).map(|n| (n, (-0.5 * n as f64 / cap).exp())).collect();
        let s = rate_extrapolate(&slow, None, 0.0).unwrap();
        let rep = bound_checks(&s, cap, &BoundTolerances::default());
        assert!(!rep.walsh_pass && !rep.optimal_pass);
        assert!(rep.summary().contains("walsh FAIL"));
    }

    #[test]
    fn table_layout() {
        let row = DiagnosticsRow { n: 3, value: Some(1.0), ..Default::default() };
        let t = diagnostics_table(&[row]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], TABLE_COLUMNS.join(","));
        assert_eq!(lines[1].split(',').count(), 9);
        assert!(lines[1].starts_with("3,1.00000000000000000e0,0.00000000000000000e0,"));
        assert_eq!(diagnostics_schema().lines().count(), 10);
    }
}
