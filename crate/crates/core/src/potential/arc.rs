//! Analytic arcs in the disk and chains of them.

use crate::doc::{fmt_complex_list, parse_complex_list, KvDoc};
use crate::error::{LabError, Result};
use crate::num::quad::gauss_legendre;
use crate::num::C64;

use super::mobius::Mobius;

/// One analytic arc. Open arcs are parametrized by `t ∈ [-1, 1]`
/// (`t = -1` at the start point); closed curves by an angle in `[0, 2π)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Arc {
    Segment { a: C64, b: C64 },
    /// Circular arc from `a` to `b` through `mid` (a segment if collinear).
    Circular { a: C64, mid: C64, b: C64 },
    /// Hyperbolic geodesic of the disk from `a` to `b`.
    Geodesic { a: C64, b: C64 },
    Circle { center: C64, radius: f64 },
    /// Image of another arc under a Möbius map.
    Mapped { base: Box<Arc>, map: Mobius },
}

fn circle_through(a: C64, m: C64, b: C64) -> Option<(C64, f64, f64, f64)> {
    let d = 2.0 * (a.re * (m.im - b.im) + m.re * (b.im - a.im) + b.re * (a.im - m.im));
    let scale = (a - b).norm().max((a - m).norm()).max(1e-300);
    if d.abs() < 1e-12 * scale * scale {
        return None;
    }
    let a2 = a.norm_sqr();
    let m2 = m.norm_sqr();
    let b2 = b.norm_sqr();
    let ux = (a2 * (m.im - b.im) + m2 * (b.im - a.im) + b2 * (a.im - m.im)) / d;
    let uy = (a2 * (b.re - m.re) + m2 * (a.re - b.re) + b2 * (m.re - a.re)) / d;
    let c = C64::new(ux, uy);
    let r = (a - c).norm();
    let ta = (a - c).arg();
    let tm = (m - c).arg();
    let tb = (b - c).arg();
    let tau = 2.0 * std::f64::consts::PI;
    let ccw = |x: f64| x.rem_euclid(tau);
    // sweep from a to b passing through m
    let sweep_ccw = ccw(tb - ta);
    let mid_ccw = ccw(tm - ta);
    let sweep = if mid_ccw < sweep_ccw { sweep_ccw } else { sweep_ccw - tau };
    Some((c, r, ta, sweep))
}

impl Arc {
    pub fn is_closed(&self) -> bool {
        match self {
            Arc::Circle { .. } => true,
            Arc::Mapped { base, .. } => base.is_closed(),
            _ => false,
        }
    }

    /// Point at parameter `t` (`t ∈ [-1, 1]` open, angle for closed).
    pub fn point(&self, t: f64) -> C64 {
        match self {
            Arc::Segment { a, b } => a + (b - a) * (0.5 * (t + 1.0)),
            Arc::Circular { a, mid, b } => match circle_through(*a, *mid, *b) {
                Some((c, r, ta, sweep)) => c + C64::from_polar(r, ta + 0.5 * (t + 1.0) * sweep),
                None => a + (b - a) * (0.5 * (t + 1.0)),
            },
            Arc::Geodesic { a, b } => {
                let phi = Mobius::disk_automorphism(0.0, *a);
                let bp = phi.apply(*b);
                phi.inverse().apply(bp * (0.5 * (t + 1.0)))
            }
            Arc::Circle { center, radius } => center + C64::from_polar(*radius, t),
            Arc::Mapped { base, map } => map.apply(base.point(t)),
        }
    }

    /// Derivative of [`Arc::point`] with respect to the parameter.
    pub fn deriv(&self, t: f64) -> C64 {
        match self {
            Arc::Segment { a, b } => (b - a) * 0.5,
            Arc::Circular { a, mid, b } => match circle_through(*a, *mid, *b) {
                Some((_, r, ta, sweep)) => {
                    C64::new(0.0, 1.0) * C64::from_polar(r, ta + 0.5 * (t + 1.0) * sweep) * (0.5 * sweep)
                }
                None => (b - a) * 0.5,
            },
            Arc::Geodesic { a, b } => {
                let phi = Mobius::disk_automorphism(0.0, *a);
                let bp = phi.apply(*b);
                phi.inverse().derivative(bp * (0.5 * (t + 1.0))) * bp * 0.5
            }
            Arc::Circle { radius, .. } => C64::new(0.0, 1.0) * C64::from_polar(*radius, t),
            Arc::Mapped { base, map } => map.derivative(base.point(t)) * base.deriv(t),
        }
    }

    /// Parameter interval.
    pub fn domain(&self) -> (f64, f64) {
        if self.is_closed() {
            (0.0, 2.0 * std::f64::consts::PI)
        } else {
            (-1.0, 1.0)
        }
    }

    pub fn start(&self) -> C64 {
        self.point(self.domain().0)
    }

    pub fn end(&self) -> C64 {
        self.point(self.domain().1)
    }

    pub fn length(&self) -> f64 {
        let (x, w) = gauss_legendre(32);
        let (lo, hi) = self.domain();
        let panels = 8;
        let h = (hi - lo) / panels as f64;
        let mut s = 0.0;
        for p in 0..panels {
            let a = lo + p as f64 * h;
            for (xi, wi) in x.iter().zip(&w) {
                s += wi * 0.5 * h * self.deriv(a + 0.5 * h * (xi + 1.0)).norm();
            }
        }
        s
    }

    /// `count + 1` points (open) or `count` points (closed) along the arc.
    pub fn polyline(&self, count: usize) -> Vec<C64> {
        let (lo, hi) = self.domain();
        if self.is_closed() {
            (0..count).map(|k| self.point(lo + (hi - lo) * k as f64 / count as f64)).collect()
        } else {
            (0..=count).map(|k| self.point(lo + (hi - lo) * k as f64 / count as f64)).collect()
        }
    }

    pub fn mapped(&self, m: &Mobius) -> Arc {
        Arc::Mapped { base: Box::new(self.clone()), map: *m }
    }

    /// Closest parameter to `z` and the distance.
    pub fn closest(&self, z: C64) -> (f64, f64) {
        let n = 256;
        let (lo, hi) = self.domain();
        let step = (hi - lo) / n as f64;
        let mut best = (lo, f64::INFINITY);
        let upto = if self.is_closed() { n } else { n + 1 };
        for k in 0..upto {
            let t = lo + step * k as f64;
            let d = (self.point(t) - z).norm();
            if d < best.1 {
                best = (t, d);
            }
        }
        // golden-section refinement around the coarse minimizer
        let (mut a, mut b) = (best.0 - step, best.0 + step);
        if !self.is_closed() {
            a = a.max(lo);
            b = b.min(hi);
        }
        let g = 0.618_033_988_749_894_9;
        let f = |t: f64| (self.point(t) - z).norm();
        let mut x1 = b - g * (b - a);
        let mut x2 = a + g * (b - a);
        let mut f1 = f(x1);
        let mut f2 = f(x2);
        for _ in 0..80 {
            if f1 < f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = f(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = f(x2);
            }
        }
        let t = 0.5 * (a + b);
        let d = f(t);
        if d < best.1 {
            (t, d)
        } else {
            best
        }
    }
}

impl Arc {
    /// One-line text form, e.g. `geodesic:0.1,0;0.5,0.2`.
    pub fn to_text(&self) -> String {
        match self {
            Arc::Segment { a, b } => format!("segment:{}", fmt_complex_list(&[*a, *b])),
            Arc::Circular { a, mid, b } => format!("circular:{}", fmt_complex_list(&[*a, *mid, *b])),
            Arc::Geodesic { a, b } => format!("geodesic:{}", fmt_complex_list(&[*a, *b])),
            Arc::Circle { center, radius } => {
                format!("circle:{}", fmt_complex_list(&[*center, C64::new(*radius, 0.0)]))
            }
            Arc::Mapped { base, map } => {
                format!("mapped:{}|{}", fmt_complex_list(&[map.a, map.b, map.c, map.d]), base.to_text())
            }
        }
    }

    pub fn from_text(s: &str) -> Result<Arc> {
        let (kind, rest) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| LabError::Parse(format!("`{s}` is not an arc")))?;
        let want = |n: usize, zs: &[C64]| {
            if zs.len() == n {
                Ok(())
            } else {
                Err(LabError::Parse(format!("{kind} arc needs {n} points")))
            }
        };
        if kind == "mapped" {
            let (m, base) = rest.split_once('|').ok_or_else(|| LabError::Parse("mapped arc without base".into()))?;
            let zs = parse_complex_list(m)?;
            want(4, &zs)?;
            let map = Mobius { a: zs[0], b: zs[1], c: zs[2], d: zs[3] };
            return Ok(Arc::Mapped { base: Box::new(Arc::from_text(base)?), map });
        }
        let zs = parse_complex_list(rest)?;
        match kind {
            "segment" => want(2, &zs).map(|_| Arc::Segment { a: zs[0], b: zs[1] }),
            "circular" => want(3, &zs).map(|_| Arc::Circular { a: zs[0], mid: zs[1], b: zs[2] }),
            "geodesic" => want(2, &zs).map(|_| Arc::Geodesic { a: zs[0], b: zs[1] }),
            "circle" => want(2, &zs).map(|_| Arc::Circle { center: zs[0], radius: zs[1].re }),
            _ => Err(LabError::Parse(format!("unknown arc kind `{kind}`"))),
        }
    }
}

/// A system of arcs meeting only at declared junctions.
#[derive(Clone, Debug, PartialEq)]
pub struct ArcChain {
    pub arcs: Vec<Arc>,
    pub junctions: Vec<C64>,
    pub margin: f64,
}

/// Quadrature nodes on one arc: cosine-graded for open arcs, uniform for
/// closed ones.
#[derive(Clone, Debug)]
pub struct ArcNodes {
    pub params: Vec<f64>,
    pub angles: Vec<f64>,
    pub points: Vec<C64>,
    pub derivs: Vec<C64>,
    /// Quadrature weight per node in the angle variable.
    pub weight: f64,
    pub closed: bool,
}

impl ArcNodes {
    pub fn new(arc: &Arc, m: usize) -> Self {
        let pi = std::f64::consts::PI;
        let closed = arc.is_closed();
        let angles: Vec<f64> = if closed {
            (0..m).map(|j| 2.0 * pi * j as f64 / m as f64).collect()
        } else {
            (0..m).map(|j| (j as f64 + 0.5) * pi / m as f64).collect()
        };
        let params: Vec<f64> = if closed { angles.clone() } else { angles.iter().map(|t| t.cos()).collect() };
        let points = params.iter().map(|&t| arc.point(t)).collect();
        let derivs = params.iter().map(|&t| arc.deriv(t)).collect();
        let weight = if closed { 2.0 * pi / m as f64 } else { pi / m as f64 };
        ArcNodes { params, angles, points, derivs, weight, closed }
    }
}

impl ArcChain {
    /// Build a chain; shared endpoints become junctions.
    pub fn new(arcs: Vec<Arc>, margin: f64) -> Result<Self> {
        if arcs.is_empty() {
            return Err(LabError::DegenerateChain("no arcs".into()));
        }
        let mut total = 0.0;
        for arc in &arcs {
            let len = arc.length();
            if !(len > 1e-8) {
                return Err(LabError::DegenerateChain(format!("arc of length {len:e}")));
            }
            total += len;
            for p in arc.polyline(64) {
                if p.norm() > 1.0 - margin + 1e-12 {
                    return Err(LabError::DegenerateChain(format!("point {p} outside |z| <= 1 - {margin}")));
                }
            }
        }
        if !(total > 0.0) {
            return Err(LabError::DegenerateChain("zero length".into()));
        }
        let mut junctions: Vec<C64> = Vec::new();
        let ends: Vec<(usize, C64)> = arcs
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_closed())
            .flat_map(|(i, a)| [(i, a.start()), (i, a.end())])
            .collect();
        for (x, &(i, p)) in ends.iter().enumerate() {
            for &(j, q) in &ends[x + 1..] {
                if i != j && (p - q).norm() < 1e-9 && !junctions.iter().any(|v| (v - p).norm() < 1e-9) {
                    junctions.push(p);
                }
            }
        }
        Ok(ArcChain { arcs, junctions, margin })
    }

    pub fn to_doc(&self) -> KvDoc {
        let mut d = KvDoc::new();
        d.push("kind", "chain");
        d.push("margin", crate::doc::fmt_f64(self.margin));
        d.push("arcs", self.arcs.len().to_string());
        for (i, a) in self.arcs.iter().enumerate() {
            d.push(&format!("arc.{i}"), a.to_text());
        }
        d.push_complexes("junctions", &self.junctions);
        d
    }

    pub fn from_doc(d: &KvDoc) -> Result<Self> {
        let n = d.get_usize("arcs")?;
        let arcs = (0..n).map(|i| Arc::from_text(d.require(&format!("arc.{i}"))?)).collect::<Result<Vec<_>>>()?;
        Self::new(arcs, d.get_f64("margin")?)
    }

    /// Single-arc chain.
    pub fn single(arc: Arc, margin: f64) -> Result<Self> {
        Self::new(vec![arc], margin)
    }

    pub fn mapped(&self, m: &Mobius) -> Result<Self> {
        Self::new(self.arcs.iter().map(|a| a.mapped(m)).collect(), self.margin)
    }

    pub fn length(&self) -> f64 {
        self.arcs.iter().map(|a| a.length()).sum()
    }

    /// Distance from `z` to the chain.
    pub fn distance(&self, z: C64) -> f64 {
        self.arcs.iter().map(|a| a.closest(z).1).fold(f64::INFINITY, f64::min)
    }

    /// Dense polyline samples of every arc.
    pub fn samples(&self, per_arc: usize) -> Vec<Vec<C64>> {
        self.arcs.iter().map(|a| a.polyline(per_arc)).collect()
    }

    /// Whether the segment `p -> q` meets the chain (polyline test).
    pub fn crosses(&self, p: C64, q: C64, per_arc: usize) -> bool {
        for poly in self.samples(per_arc) {
            for w in poly.windows(2) {
                if segments_intersect(p, q, w[0], w[1]) {
                    return true;
                }
            }
        }
        false
    }

    /// Endpoints of open arcs that are not junctions.
    pub fn free_endpoints(&self) -> Vec<C64> {
        let mut out = Vec::new();
        for a in self.arcs.iter().filter(|a| !a.is_closed()) {
            for p in [a.start(), a.end()] {
                if !self.junctions.iter().any(|j| (j - p).norm() < 1e-9) {
                    out.push(p);
                }
            }
        }
        out
    }
}

fn orient(a: C64, b: C64, c: C64) -> f64 {
    (b - a).re * (c - a).im - (b - a).im * (c - a).re
}

/// Proper or touching intersection of closed segments.
pub fn segments_intersect(p1: C64, p2: C64, q1: C64, q2: C64) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: C64, b: C64, c: C64| {
        c.re >= a.re.min(b.re) && c.re <= a.re.max(b.re) && c.im >= a.im.min(b.im) && c.im <= a.im.max(b.im)
    };
    (d1 == 0.0 && on(q1, q2, p1))
        || (d2 == 0.0 && on(q1, q2, p2))
        || (d3 == 0.0 && on(p1, p2, q1))
        || (d4 == 0.0 && on(p1, p2, q2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parametrizations_are_consistent() {
        let arcs = [
            Arc::Segment { a: C64::new(-0.5, 0.0), b: C64::new(0.5, 0.0) },
            Arc::Circular { a: C64::new(-0.5, 0.0), mid: C64::new(0.0, 0.2), b: C64::new(0.5, 0.0) },
            Arc::Geodesic { a: C64::new(0.1, 0.3), b: C64::new(-0.4, -0.2) },
            Arc::Circle { center: C64::new(0.3, 0.0), radius: 0.05 },
        ];
        for arc in &arcs {
            let h = 1e-6;
            for &t in &[-0.7, 0.0, 0.4] {
                let fd = (arc.point(t + h) - arc.point(t - h)) / (2.0 * h);
                assert!((fd - arc.deriv(t)).norm() < 1e-7, "{arc:?}");
            }
        }
        assert!((arcs[1].point(0.0) - C64::new(0.0, 0.2)).norm() < 1e-12);
        assert!((arcs[2].start() - C64::new(0.1, 0.3)).norm() < 1e-12);
        assert!((arcs[2].end() - C64::new(-0.4, -0.2)).norm() < 1e-12);
        assert!((arcs[0].length() - 1.0).abs() < 1e-14);
        assert!((arcs[3].length() - 0.1 * std::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn chain_junctions_and_distance() {
        let v = C64::new(0.0, 0.0);
        let arms: Vec<Arc> = (0..3)
            .map(|k| Arc::Geodesic { a: v, b: C64::from_polar(0.5, 2.0 * std::f64::consts::PI * k as f64 / 3.0) })
            .collect();
        let chain = ArcChain::new(arms, 0.05).unwrap();
        assert_eq!(chain.junctions.len(), 1);
        assert_eq!(chain.free_endpoints().len(), 3);
        assert!((chain.distance(C64::new(0.25, 0.1)) - 0.1).abs() < 1e-9);
        assert!(chain.crosses(C64::new(0.25, -0.1), C64::new(0.25, 0.1), 64));
        assert!(ArcChain::single(Arc::Segment { a: C64::new(0.1, 0.0), b: C64::new(0.1, 1e-10) }, 0.05).is_err());
        assert!(ArcChain::single(Arc::Segment { a: C64::new(0.1, 0.0), b: C64::new(0.99, 0.0) }, 0.05).is_err());
    }
}
