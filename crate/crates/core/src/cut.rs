//! Minimal-capacity cuts: hyperbolic geodesics for two branch points and a
//! junction search over geodesic tripods for three.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;

use crate::doc::{fmt_complex, parse_complex, KvDoc};
use crate::error::{LabError, Result};
use crate::num::C64;
use crate::potential::{capacity_only, equilibrium, symmetrizing_map, Arc, ArcChain, CapacityResult, Mobius};

#[derive(Clone, Debug, PartialEq)]
pub struct CutOptions {
    /// Nyström nodes per arc for the reported equilibrium problem.
    pub nodes_per_arc: usize,
    /// Nodes per arc inside the junction search.
    pub search_nodes: usize,
    pub margin: f64,
    /// Junction step of the compass certificate.
    pub compass_step: f64,
    /// Bowing offset as a fraction of the chord.
    pub bow_fraction: f64,
    /// Capacity tolerance of the junction search.
    pub tolerance: f64,
    pub max_iters: u64,
}

impl Default for CutOptions {
    fn default() -> Self {
        CutOptions {
            nodes_per_arc: 48,
            search_nodes: 24,
            margin: 0.01,
            compass_step: 1e-3,
            bow_fraction: 0.02,
            tolerance: 1e-6,
            max_iters: 400,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CutFamily {
    /// `m^{-1}([-r, r])` with `m(a) = -r`, `m(b) = r`.
    Geodesic { map: Mobius, radius: f64 },
    Tripod { junction: C64 },
    /// Three nearly collinear points; two geodesic arcs through `middle`.
    TwoArc { middle: C64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    /// Smallest capacity increase over the tested perturbations.
    pub perturbation_margin: f64,
    pub symmetry_residual: f64,
    pub perturbations: Vec<(String, f64)>,
}

#[derive(Clone, Debug)]
pub struct CutSolution {
    pub chain: ArcChain,
    pub capacity: CapacityResult,
    pub family: CutFamily,
    pub certificate: Certificate,
    pub nodes_per_arc: usize,
    pub warnings: Vec<String>,
}

fn check_points(points: &[C64], margin: f64) -> Result<()> {
    for (i, p) in points.iter().enumerate() {
        if !(p.norm() < 1.0 - margin) {
            return Err(LabError::Domain(format!("{p} (needs |z| < {})", 1.0 - margin)));
        }
        if points[..i].iter().any(|q| (p - q).norm() < 1e-12) {
            return Err(LabError::Coincident);
        }
    }
    Ok(())
}

/// The geodesic arc of `a, b` as the image of a symmetric segment.
pub fn geodesic_chain(a: C64, b: C64, margin: f64) -> Result<(ArcChain, Mobius, f64)> {
    check_points(&[a, b], margin)?;
    let (m, r) = symmetrizing_map(a, b);
    let arc = Arc::Mapped { base: Box::new(Arc::Segment { a: C64::new(-r, 0.0), b: C64::new(r, 0.0) }), map: m.inverse() };
    Ok((ArcChain::single(arc, margin)?, m, r))
}

fn bowed(arc: &Arc, offset: f64) -> Arc {
    let (a, b) = (arc.start(), arc.end());
    let mid = arc.point(0.0);
    let t = arc.deriv(0.0);
    let n = C64::new(0.0, 1.0) * t / t.norm();
    Arc::Circular { a, mid: mid + n * (offset * (b - a).norm()), b }
}

fn bowing_checks(chain: &ArcChain, cap: f64, opts: &CutOptions) -> Vec<(String, f64)> {
    let mut out = Vec::new();
    for i in 0..chain.arcs.len() {
        for sign in [1.0, -1.0] {
            let mut arcs = chain.arcs.clone();
            arcs[i] = bowed(&chain.arcs[i], sign * opts.bow_fraction);
            let label = format!("bow arc {i} {}", if sign > 0.0 { "left" } else { "right" });
            let delta = ArcChain::new(arcs, chain.margin)
                .and_then(|c| capacity_only(&c, opts.nodes_per_arc))
                .map(|(c, _)| c - cap)
                .unwrap_or(f64::INFINITY);
            out.push((label, delta));
        }
    }
    out
}

fn certify(chain: &ArcChain, capacity: CapacityResult, family: CutFamily, mut perturbations: Vec<(String, f64)>, opts: &CutOptions, warnings: Vec<String>) -> CutSolution {
    perturbations.extend(bowing_checks(chain, capacity.capacity, opts));
    let margin = perturbations.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let mut sol = CutSolution {
        chain: chain.clone(),
        capacity,
        family,
        certificate: Certificate { perturbation_margin: margin, symmetry_residual: 0.0, perturbations },
        nodes_per_arc: opts.nodes_per_arc,
        warnings,
    };
    sol.certificate.symmetry_residual = s_property_residual(&sol);
    sol
}

/// Geodesic cut joining `a` and `b`.
pub fn geodesic_cut(a: C64, b: C64, opts: &CutOptions) -> Result<CutSolution> {
    let (chain, map, radius) = geodesic_chain(a, b, opts.margin)?;
    let capacity = equilibrium(&chain, opts.nodes_per_arc)?;
    Ok(certify(&chain, capacity, CutFamily::Geodesic { map, radius }, Vec::new(), opts, Vec::new()))
}

fn tripod_chain(v: C64, pts: &[C64; 3], margin: f64) -> Result<ArcChain> {
    let arcs = pts.iter().map(|p| Arc::Geodesic { a: v, b: *p }).collect();
    ArcChain::new(arcs, margin)
}

struct JunctionCost<'a> {
    pts: &'a [C64; 3],
    opts: &'a CutOptions,
}

impl CostFunction for JunctionCost<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        let v = C64::new(p[0], p[1]);
        let bad = 1e6 * (1.0 + v.norm());
        if !(v.norm() < 1.0 - self.opts.margin) || self.pts.iter().any(|q| (v - q).norm() < 1e-6) {
            return Ok(bad);
        }
        Ok(tripod_chain(v, self.pts, self.opts.margin)
            .and_then(|c| capacity_only(&c, self.opts.search_nodes))
            .map(|c| c.0)
            .unwrap_or(bad))
    }
}

fn search(pts: &[C64; 3], start: C64, size: f64, opts: &CutOptions) -> Result<(C64, f64)> {
    let simplex = vec![
        vec![start.re, start.im],
        vec![start.re + size, start.im],
        vec![start.re, start.im + size],
    ];
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(opts.tolerance * 1e-6)
        .map_err(|e| LabError::Optimizer(e.to_string()))?;
    let res = Executor::new(JunctionCost { pts, opts }, solver)
        .configure(|s| s.max_iters(opts.max_iters))
        .run()
        .map_err(|e| LabError::Optimizer(e.to_string()))?;
    let st = res.state();
    let p = st.get_best_param().ok_or_else(|| LabError::Optimizer("no iterate".into()))?;
    Ok((C64::new(p[0], p[1]), st.get_best_cost()))
}

/// If one of the points lies on the geodesic through the other two, its
/// index.
fn middle_point(pts: &[C64; 3]) -> Option<usize> {
    (0..3).find(|&k| {
        let (a, b) = (pts[(k + 1) % 3], pts[(k + 2) % 3]);
        let (m, r) = symmetrizing_map(a, b);
        let w = m.apply(pts[k]);
        w.im.abs() < 1e-9 && w.re.abs() < r
    })
}

/// Minimal-capacity geodesic tripod joining `a, b, c`.
pub fn tripod_cut(a: C64, b: C64, c: C64, opts: &CutOptions) -> Result<CutSolution> {
    let pts = [a, b, c];
    check_points(&pts, opts.margin)?;
    if let Some(k) = middle_point(&pts) {
        let (p, q, mid) = (pts[(k + 1) % 3], pts[(k + 2) % 3], pts[k]);
        let chain = ArcChain::new(vec![Arc::Geodesic { a: p, b: mid }, Arc::Geodesic { a: mid, b: q }], opts.margin)?;
        let capacity = equilibrium(&chain, opts.nodes_per_arc)?;
        let warnings = vec![format!("collinear configuration; two-arc chain through {mid}")];
        return Ok(certify(&chain, capacity, CutFamily::TwoArc { middle: mid }, Vec::new(), opts, warnings));
    }
    let centroid = (a + b + c) / 3.0;
    let scale = (a - b).norm().min((b - c).norm()).min((c - a).norm());
    let (mut v, mut best) = search(&pts, centroid, 0.2 * scale, opts)?;
    for _ in 0..3 {
        let (v2, c2) = search(&pts, v, 0.01 * scale, opts)?;
        let moved = (v2 - v).norm();
        if c2 <= best {
            v = v2;
            best = c2;
        }
        if moved < 1e-7 {
            break;
        }
    }
    let mut warnings = Vec::new();
    if pts.iter().any(|p| (v - p).norm() < 1e-4 * scale) {
        warnings.push("junction converged onto a branch point".into());
    }
    let chain = tripod_chain(v, &pts, opts.margin)?;
    let capacity = equilibrium(&chain, opts.nodes_per_arc)?;
    let cap = capacity_only(&chain, opts.nodes_per_arc)?.0;
    let compass: Vec<(String, f64)> = crate::par::map_range(8, |k| {
        let dv = C64::from_polar(opts.compass_step, std::f64::consts::FRAC_PI_4 * k as f64);
        let delta = tripod_chain(v + dv, &pts, opts.margin)
            .and_then(|ch| capacity_only(&ch, opts.nodes_per_arc))
            .map(|(c2, _)| c2 - cap)
            .unwrap_or(f64::INFINITY);
        (format!("compass {k}"), delta)
    });
    Ok(certify(&chain, capacity, CutFamily::Tripod { junction: v }, compass, opts, warnings))
}

/// Largest relative mismatch of the two one-sided normal derivatives of the
/// equilibrium potential over interior samples of every arc.
pub fn s_property_residual(sol: &CutSolution) -> f64 {
    symmetry_residual(&sol.capacity)
}

/// Largest relative mismatch of the two one-sided normal derivatives of the
/// equilibrium potential at interior sample points of each arc.
pub fn symmetry_residual(res: &CapacityResult) -> f64 {
    let samples: Vec<(usize, f64)> = (0..res.arcs.len())
        .flat_map(|i| (0..17).map(move |k| (i, -0.8 + 0.1 * k as f64)))
        .collect();
    let devs = crate::par::map(&samples, |&(i, t)| {
        let arc = &res.arcs[i].arc;
        let (theta, tt) = if arc.is_closed() {
            let th = std::f64::consts::PI * (t + 1.0);
            (th, th)
        } else {
            (t.acos(), t)
        };
        let z = arc.point(tt);
        let d = arc.deriv(tt);
        let n = C64::new(0.0, 1.0) * d / d.norm();
        let h = 1e-3 * arc.length();
        let u0 = res.potential_on_arc(i, theta);
        let side = |s: f64| {
            let u1 = res.potential(z + n * (s * h));
            let u2 = res.potential(z + n * (2.0 * s * h));
            (4.0 * u1 - u2 - 3.0 * u0) / (2.0 * h)
        };
        let (dp, dm) = (side(1.0), side(-1.0));
        (dp - dm).abs() / dp.abs().max(dm.abs())
    });
    devs.into_iter().fold(0.0, f64::max)
}

/// Chains joining `a` and `b` other than the geodesic: bowed circular arcs
/// and polyline detours.
pub fn competitors(a: C64, b: C64, margin: f64) -> Result<Vec<(String, ArcChain)>> {
    let (geo, _, _) = geodesic_chain(a, b, margin)?;
    let g = &geo.arcs[0];
    let mid = g.point(0.0);
    let t = g.deriv(0.0);
    let n = C64::new(0.0, 1.0) * t / t.norm();
    let chord = (b - a).norm();
    let mut out = Vec::new();
    for f in [0.1, -0.1, 0.25, -0.25] {
        out.push((format!("bowed {f}"), ArcChain::single(bowed(g, f), margin)?));
    }
    let knee = mid + n * (0.15 * chord);
    out.push((
        "detour".to_string(),
        ArcChain::new(vec![Arc::Segment { a, b: knee }, Arc::Segment { a: knee, b }], margin)?,
    ));
    Ok(out)
}

impl CutSolution {
    pub fn capacity(&self) -> f64 {
        self.capacity.capacity
    }

    pub fn to_doc(&self) -> KvDoc {
        let mut d = KvDoc::new();
        d.push("kind", "cut");
        for (k, v) in self.chain.to_doc().entries() {
            if k != "kind" {
                d.push(k, v.clone());
            }
        }
        d.push_f64("capacity", self.capacity.capacity);
        d.push_f64("capacity_error", self.capacity.error_estimate);
        d.push_f64("residual_max", self.capacity.residual_max);
        d.push("nodes_per_arc", self.nodes_per_arc.to_string());
        match &self.family {
            CutFamily::Geodesic { map, radius } => {
                d.push("family", "geodesic");
                d.push_complexes("map", &[map.a, map.b, map.c, map.d]);
                d.push_f64("radius", *radius);
            }
            CutFamily::Tripod { junction } => {
                d.push("family", "tripod");
                d.push("junction", fmt_complex(*junction));
            }
            CutFamily::TwoArc { middle } => {
                d.push("family", "two-arc");
                d.push("junction", fmt_complex(*middle));
            }
        }
        d.push_f64("perturbation_margin", self.certificate.perturbation_margin);
        d.push_f64("symmetry_residual", self.certificate.symmetry_residual);
        for (name, delta) in &self.certificate.perturbations {
            d.push(&format!("perturbation.{}", name.replace(' ', "_")), crate::doc::fmt_f64(*delta));
        }
        for (i, w) in self.warnings.iter().enumerate() {
            d.push(&format!("warning.{i}"), w.clone());
        }
        d
    }

    /// Rebuild from a document; the equilibrium problem is re-solved.
    pub fn from_doc(d: &KvDoc) -> Result<Self> {
        let chain = ArcChain::from_doc(d)?;
        let nodes = d.get_usize("nodes_per_arc")?;
        let family = match d.require("family")? {
            "geodesic" => {
                let m = d.get_complexes("map")?;
                if m.len() != 4 {
                    return Err(LabError::Parse("map needs 4 coefficients".into()));
                }
                CutFamily::Geodesic { map: Mobius { a: m[0], b: m[1], c: m[2], d: m[3] }, radius: d.get_f64("radius")? }
            }
            "tripod" => CutFamily::Tripod { junction: parse_complex(d.require("junction")?)? },
            "two-arc" => CutFamily::TwoArc { middle: parse_complex(d.require("junction")?)? },
            other => return Err(LabError::Parse(format!("unknown cut family `{other}`"))),
        };
        let perturbations = d
            .entries()
            .iter()
            .filter_map(|(k, v)| k.strip_prefix("perturbation.").map(|n| (n.replace('_', " "), v)))
            .map(|(n, v)| crate::doc::parse_f64(v).map(|x| (n, x)))
            .collect::<Result<Vec<_>>>()?;
        let warnings = d.entries().iter().filter(|(k, _)| k.starts_with("warning.")).map(|(_, v)| v.clone()).collect();
        Ok(CutSolution {
            capacity: equilibrium(&chain, nodes)?,
            chain,
            family,
            certificate: Certificate {
                perturbation_margin: d.get_f64("perturbation_margin")?,
                symmetry_residual: d.get_f64("symmetry_residual")?,
                perturbations,
            },
            nodes_per_arc: nodes,
            warnings,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn symmetric_segment_is_its_own_geodesic() {
        let s = geodesic_cut(c(-0.5, 0.0), c(0.5, 0.0), &CutOptions::default()).unwrap();
        assert!((s.capacity() - 0.725544161609597).abs() < 1e-9);
        for p in s.chain.arcs[0].polyline(16) {
            assert!(p.im.abs() < 1e-14);
        }
        assert!(s.certificate.symmetry_residual < 0.02, "{}", s.certificate.symmetry_residual);
        assert!(s.certificate.perturbation_margin > 0.0);
    }

    #[test]
    fn transported_pair() {
        let s = geodesic_cut(c(0.0, 0.0), c(0.5, 0.0), &CutOptions::default()).unwrap();
        let CutFamily::Geodesic { map, radius } = &s.family else { panic!() };
        assert!((radius - 0.2679491924311227).abs() < 1e-12);
        let (ma, mb) = (map.apply(c(0.0, 0.0)), map.apply(c(0.5, 0.0)));
        assert!((ma + mb).norm() < 1e-12 && ma.im.abs() < 1e-12);
        assert!((s.capacity() - 0.497646288072918).abs() < 1e-8, "{}", s.capacity());
    }

    #[test]
    fn bowed_arc_fails_symmetry() {
        let opts = CutOptions::default();
        let chain = ArcChain::single(Arc::Circular { a: c(-0.5, 0.0), mid: c(0.0, 0.2), b: c(0.5, 0.0) }, 0.01).unwrap();
        let capacity = equilibrium(&chain, 48).unwrap();
        let sol = certify(&chain, capacity, CutFamily::TwoArc { middle: c(0.0, 0.2) }, Vec::new(), &opts, Vec::new());
        assert!(sol.certificate.symmetry_residual > 0.1, "{}", sol.certificate.symmetry_residual);
    }

    #[test]
    fn equilateral_tripod() {
        let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let s = tripod_cut(c(0.5, 0.0), w * 0.5, w * w * 0.5, &CutOptions::default()).unwrap();
        let CutFamily::Tripod { junction } = s.family else { panic!() };
        assert!(junction.norm() < 1e-6, "{junction}");
        assert_eq!(s.chain.junctions.len(), 1);
        assert!(s.certificate.perturbations.iter().filter(|p| p.0.starts_with("compass")).all(|p| p.1 >= 0.0));
        assert!(s.certificate.symmetry_residual < 0.05, "{}", s.certificate.symmetry_residual);
        let mut s = s;
        s.warnings = vec!["one".into(), "two".into()];
        let back = CutSolution::from_doc(&KvDoc::parse(&s.to_doc().render()).unwrap()).unwrap();
        assert_eq!(back.chain, s.chain);
        assert_eq!(back.warnings, s.warnings);
        assert_eq!(back.certificate.perturbations.len(), s.certificate.perturbations.len());
        assert!((back.capacity() - s.capacity()).abs() < 1e-12);
    }

    #[test]
    fn collinear_tripod_reduces_to_geodesic() {
        let opts = CutOptions::default();
        let (a, b) = (c(-0.1, 0.3), c(0.4, -0.2));
        let g = geodesic_cut(a, b, &opts).unwrap();
        let on = g.chain.arcs[0].point(0.3);
        let t = tripod_cut(a, b, on, &opts).unwrap();
        assert!(matches!(t.family, CutFamily::TwoArc { .. }));
        assert!(!t.warnings.is_empty());
        assert!((t.capacity() - g.capacity()).abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_points() {
        let o = CutOptions::default();
        assert!(matches!(geodesic_cut(c(0.1, 0.0), c(0.1, 0.0), &o), Err(LabError::Coincident)));
        assert!(geodesic_cut(c(0.1, 0.0), c(0.995, 0.0), &o).is_err());
    }
}
