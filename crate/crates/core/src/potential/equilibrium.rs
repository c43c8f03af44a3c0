//! Nyström solver for the Green equilibrium measure of an arc chain.

use nalgebra::{DMatrix, DVector};

use crate::error::{LabError, Result};
use crate::num::quad::adaptive;
use crate::num::C64;
use crate::par;

use super::arc::{Arc, ArcChain, ArcNodes};
use super::measure::{green, DiscreteMeasure};

const PI: f64 = std::f64::consts::PI;

/// Equilibrium density on one arc, in the node angle variable.
///
/// Open arcs use `t = cos θ`, `θ ∈ [0, π]` (`θ = 0` is the end point);
/// closed arcs use the curve angle directly.
#[derive(Clone, Debug)]
pub struct ArcDensity {
    pub arc: Arc,
    pub nodes: ArcNodes,
    /// Density values at the nodes.
    pub phi: Vec<f64>,
    cos_c: Vec<f64>,
    sin_c: Vec<f64>,
    spacing: f64,
}

impl ArcDensity {
    fn new(arc: Arc, nodes: ArcNodes, phi: Vec<f64>) -> Self {
        let m = phi.len();
        let (cos_c, sin_c) = if nodes.closed {
            let half = m / 2;
            let mut a = vec![0.0; half + 1];
            let mut b = vec![0.0; half + 1];
            for k in 0..=half {
                for (p, t) in phi.iter().zip(&nodes.angles) {
                    a[k] += p * (k as f64 * t).cos();
                    b[k] += p * (k as f64 * t).sin();
                }
                a[k] *= nodes.weight;
                b[k] *= nodes.weight;
            }
            (a, b)
        } else {
            let mut a = vec![0.0; m];
            for (k, ak) in a.iter_mut().enumerate() {
                *ak = nodes.weight * phi.iter().zip(&nodes.angles).map(|(p, t)| p * (k as f64 * t).cos()).sum::<f64>();
            }
            (a, Vec::new())
        };
        let pts = &nodes.points;
        let mut spacing: f64 = 0.0;
        for w in pts.windows(2) {
            spacing = spacing.max((w[1] - w[0]).norm());
        }
        if nodes.closed && pts.len() > 1 {
            spacing = spacing.max((pts[0] - pts[pts.len() - 1]).norm());
        }
        ArcDensity { arc, nodes, phi, cos_c, sin_c, spacing }
    }

    pub fn closed(&self) -> bool {
        self.nodes.closed
    }

    /// Angle interval of the density variable.
    pub fn span(&self) -> f64 {
        if self.closed() {
            2.0 * PI
        } else {
            PI
        }
    }

    /// Curve point at density angle `theta`.
    pub fn point(&self, theta: f64) -> C64 {
        if self.closed() {
            self.arc.point(theta)
        } else {
            self.arc.point(theta.cos())
        }
    }

    pub fn density(&self, theta: f64) -> f64 {
        if self.closed() {
            let h = self.cos_c.len() - 1;
            let mut s = self.cos_c[0];
            for k in 1..h {
                let kt = k as f64 * theta;
                s += 2.0 * (self.cos_c[k] * kt.cos() + self.sin_c[k] * kt.sin());
            }
            s += self.cos_c[h] * (h as f64 * theta).cos();
            s / (2.0 * PI)
        } else {
            let mut s = self.cos_c[0];
            for (k, a) in self.cos_c.iter().enumerate().skip(1) {
                s += 2.0 * a * (k as f64 * theta).cos();
            }
            s / PI
        }
    }

    /// Mass of the angle interval `[0, theta]`.
    pub fn cdf(&self, theta: f64) -> f64 {
        if self.closed() {
            let h = self.cos_c.len() - 1;
            let mut s = self.cos_c[0] * theta;
            for k in 1..h {
                let kf = k as f64;
                let kt = kf * theta;
                s += 2.0 * (self.cos_c[k] * kt.sin() - self.sin_c[k] * (kt.cos() - 1.0)) / kf;
            }
            s += self.cos_c[h] * (h as f64 * theta).sin() / h as f64;
            s / (2.0 * PI)
        } else {
            let mut s = self.cos_c[0] * theta;
            for (k, a) in self.cos_c.iter().enumerate().skip(1) {
                s += 2.0 * a * (k as f64 * theta).sin() / k as f64;
            }
            s / PI
        }
    }

    pub fn mass(&self) -> f64 {
        self.cos_c[0]
    }

    /// Green potential of this arc's part of the measure at `z`.
    pub fn potential(&self, z: C64) -> f64 {
        let near = self.nodes.points.iter().map(|p| (p - z).norm()).fold(f64::INFINITY, f64::min);
        if near > 6.0 * self.spacing {
            self.nodes.weight * self.nodes.points.iter().zip(&self.phi).map(|(p, f)| f * green(z, *p)).sum::<f64>()
        } else {
            let f = |t: f64| {
                let g = green(z, self.point(t));
                if g.is_finite() {
                    g * self.density(t)
                } else {
                    0.0
                }
            };
            adaptive(&f, 0.0, self.span(), 1e-13)
        }
    }

    /// Potential of this arc's own measure at its point of angle `theta`,
    /// by product integration of the logarithmic part.
    fn self_potential(&self, theta: f64) -> f64 {
        let m = self.phi.len();
        let zs = self.point(theta);
        let mut s = 0.0;
        if self.closed() {
            let half = m / 2;
            for (j, (&tj, f)) in self.nodes.angles.iter().zip(&self.phi).enumerate() {
                let d = theta - tj;
                let mut ser = 0.0;
                for k in 1..=half {
                    let c = if k == half { 0.5 } else { 1.0 };
                    ser += c * (k as f64 * d).cos() / k as f64;
                }
                let chord = 2.0 * (0.5 * d).sin().abs();
                let r = if chord < 1e-13 {
                    self.arc.deriv(tj).norm()
                } else {
                    (zs - self.nodes.points[j]).norm() / chord
                };
                let smooth = (C64::new(1.0, 0.0) - zs * self.nodes.points[j].conj()).norm().ln() - r.ln();
                s += f * (ser + smooth);
            }
        } else {
            let ts = theta.cos();
            for (j, (&tj, f)) in self.nodes.angles.iter().zip(&self.phi).enumerate() {
                let mut ser = 2f64.ln();
                for k in 1..m {
                    let kf = k as f64;
                    ser += 2.0 / kf * (kf * theta).cos() * (kf * tj).cos();
                }
                let pj = self.nodes.params[j];
                let r = if (ts - pj).abs() < 1e-13 {
                    self.arc.deriv(pj).norm()
                } else {
                    (zs - self.nodes.points[j]).norm() / (ts - pj).abs()
                };
                let smooth = (C64::new(1.0, 0.0) - zs * self.nodes.points[j].conj()).norm().ln() - r.ln();
                s += f * (ser + smooth);
            }
        }
        s * self.nodes.weight
    }
}

/// Green capacity and equilibrium measure of an arc chain.
#[derive(Clone, Debug)]
pub struct CapacityResult {
    /// Richardson-extrapolated capacity.
    pub capacity: f64,
    pub error_estimate: f64,
    /// `1 / capacity`.
    pub level: f64,
    /// Node masses of the finer solve.
    pub measure: DiscreteMeasure,
    pub residual_max: f64,
    pub residual_rms: f64,
    pub arcs: Vec<ArcDensity>,
    pub chain: ArcChain,
    /// Level of the finer discrete solve, against which residuals are measured.
    pub discrete_level: f64,
}

struct Solve {
    level: f64,
    arcs: Vec<ArcDensity>,
}

fn assemble_and_solve(chain: &ArcChain, m: usize) -> Result<Solve> {
    let m = if chain.arcs.iter().any(|a| a.is_closed()) { m + (m & 1) } else { m };
    let nodes: Vec<ArcNodes> = chain.arcs.iter().map(|a| ArcNodes::new(a, m)).collect();
    let offsets: Vec<usize> = (0..nodes.len()).map(|i| i * m).collect();
    let n = m * nodes.len();
    let rows: Vec<Vec<f64>> = par::map_range(n, |row| {
        let ia = row / m;
        let k = row % m;
        let na = &nodes[ia];
        let zk = na.points[k];
        let mut out = vec![0.0; n + 1];
        for (jb, nb) in nodes.iter().enumerate() {
            let base = offsets[jb];
            if jb != ia {
                for j in 0..m {
                    out[base + j] = nb.weight * green(zk, nb.points[j]);
                }
                continue;
            }
            for j in 0..m {
                let smooth = (C64::new(1.0, 0.0) - zk * na.points[j].conj()).norm().ln();
                let v = if na.closed {
                    let d = na.angles[k] - na.angles[j];
                    let half = m / 2;
                    let mut ser = 0.0;
                    for q in 1..=half {
                        let c = if q == half { 0.5 } else { 1.0 };
                        ser += c * (q as f64 * d).cos() / q as f64;
                    }
                    let r = if j == k {
                        na.derivs[k].norm()
                    } else {
                        (zk - na.points[j]).norm() / (2.0 * (0.5 * d).sin().abs())
                    };
                    ser - r.ln() + smooth
                } else {
                    let mut ser = 2f64.ln();
                    for q in 1..m {
                        let qf = q as f64;
                        ser += 2.0 / qf * (qf * na.angles[k]).cos() * (qf * na.angles[j]).cos();
                    }
                    let r = if j == k {
                        na.derivs[k].norm()
                    } else {
                        (zk - na.points[j]).norm() / (na.params[k] - na.params[j]).abs()
                    };
                    ser - r.ln() + smooth
                };
                out[base + j] = na.weight * v;
            }
        }
        out[n] = -1.0;
        out
    });
    let mut a = DMatrix::<f64>::zeros(n + 1, n + 1);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            a[(i, j)] = *v;
        }
    }
    for (ib, nb) in nodes.iter().enumerate() {
        for j in 0..m {
            a[(n, offsets[ib] + j)] = nb.weight;
        }
    }
    let mut b = DVector::<f64>::zeros(n + 1);
    b[n] = 1.0;
    let x = a
        .lu()
        .solve(&b)
        .ok_or(LabError::Linalg(crate::num::linalg::LinalgError::Singular))?;
    if !x.iter().all(|v| v.is_finite()) {
        return Err(LabError::Linalg(crate::num::linalg::LinalgError::Singular));
    }
    let level = x[n];
    let mut phi: Vec<f64> = x.iter().take(n).cloned().collect();
    let mut clamped = false;
    for (ib, nb) in nodes.iter().enumerate() {
        for j in 0..m {
            let w = nb.weight * phi[offsets[ib] + j];
            if w < -1e-10 {
                return Err(LabError::NegativeWeight(w));
            }
            if w < 0.0 {
                phi[offsets[ib] + j] = 0.0;
                clamped = true;
            }
        }
    }
    if clamped {
        let mass: f64 = nodes
            .iter()
            .enumerate()
            .map(|(ib, nb)| nb.weight * phi[offsets[ib]..offsets[ib] + m].iter().sum::<f64>())
            .sum();
        phi.iter_mut().for_each(|p| *p /= mass);
    }
    if !(level > 0.0) {
        return Err(LabError::DegenerateChain(format!("non-positive potential level {level:e}")));
    }
    let arcs = chain
        .arcs
        .iter()
        .zip(nodes)
        .enumerate()
        .map(|(ib, (arc, nb))| ArcDensity::new(arc.clone(), nb, phi[offsets[ib]..offsets[ib] + m].to_vec()))
        .collect();
    Ok(Solve { level, arcs })
}

/// Capacity from solves at `m` and `2m` nodes per arc, without verification.
pub fn capacity_only(chain: &ArcChain, nodes_per_arc: usize) -> Result<(f64, f64)> {
    let coarse = assemble_and_solve(chain, nodes_per_arc)?;
    let fine = assemble_and_solve(chain, 2 * nodes_per_arc)?;
    let (c1, c2) = (1.0 / coarse.level, 1.0 / fine.level);
    Ok((c2 + (c2 - c1) / 15.0, (c2 - c1).abs()))
}

/// Equilibrium measure, capacity with error estimate, and residual on a
/// verification grid three times finer than the solve.
pub fn equilibrium(chain: &ArcChain, nodes_per_arc: usize) -> Result<CapacityResult> {
    if nodes_per_arc < 4 {
        return Err(LabError::InvalidArgument("need at least 4 nodes per arc".into()));
    }
    let coarse = assemble_and_solve(chain, nodes_per_arc)?;
    let fine = assemble_and_solve(chain, 2 * nodes_per_arc)?;
    let (c1, c2) = (1.0 / coarse.level, 1.0 / fine.level);
    let capacity = c2 + (c2 - c1) / 15.0;
    let error_estimate = (c2 - c1).abs();
    let mut res = CapacityResult {
        capacity,
        error_estimate,
        level: 1.0 / capacity,
        measure: DiscreteMeasure::dirac(C64::new(0.0, 0.0)),
        residual_max: 0.0,
        residual_rms: 0.0,
        arcs: fine.arcs,
        chain: chain.clone(),
        discrete_level: fine.level,
    };
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    for a in &res.arcs {
        for (p, f) in a.nodes.points.iter().zip(&a.phi) {
            pts.push(*p);
            wts.push(a.nodes.weight * f);
        }
    }
    let total: f64 = wts.iter().sum();
    let wts: Vec<f64> = wts.iter().map(|w| w / total).collect();
    res.measure = DiscreteMeasure::new(pts, wts)?;
    let verify: Vec<(usize, f64)> = res
        .arcs
        .iter()
        .enumerate()
        .flat_map(|(i, a)| {
            let v = 3 * a.phi.len();
            let span = a.span();
            (0..v).map(move |j| (i, span * (j as f64 + 0.5) / v as f64))
        })
        .collect();
    let devs = par::map(&verify, |&(i, t)| (res.potential_on_arc(i, t) - res.discrete_level).abs());
    res.residual_max = devs.iter().cloned().fold(0.0, f64::max);
    res.residual_rms = (devs.iter().map(|d| d * d).sum::<f64>() / devs.len() as f64).sqrt();
    Ok(res)
}

impl CapacityResult {
    /// Green potential of the equilibrium measure at `z`.
    pub fn potential(&self, z: C64) -> f64 {
        self.arcs.iter().map(|a| a.potential(z)).sum()
    }

    /// Potential at the point of arc `i` with density angle `theta`.
    pub fn potential_on_arc(&self, i: usize, theta: f64) -> f64 {
        let z = self.arcs[i].point(theta);
        let mut s = self.arcs[i].self_potential(theta);
        for (j, a) in self.arcs.iter().enumerate() {
            if j != i {
                s += a.potential(z);
            }
        }
        s
    }

    /// Central-difference gradient `(∂x, ∂y)` of the potential.
    pub fn gradient(&self, z: C64, h: f64) -> C64 {
        let dx = (self.potential(z + C64::new(h, 0.0)) - self.potential(z - C64::new(h, 0.0))) / (2.0 * h);
        let dy = (self.potential(z + C64::new(0.0, h)) - self.potential(z - C64::new(0.0, h))) / (2.0 * h);
        C64::new(dx, dy)
    }

    /// Fine discretization with `per_arc` cells per arc; masses are exact
    /// cell integrals of the density.
    pub fn fine_measure(&self, per_arc: usize) -> DiscreteMeasure {
        let mut pts = Vec::with_capacity(per_arc * self.arcs.len());
        let mut wts = Vec::with_capacity(per_arc * self.arcs.len());
        for a in &self.arcs {
            let span = a.span();
            let mut prev = 0.0;
            for j in 0..per_arc {
                let hi = span * (j + 1) as f64 / per_arc as f64;
                let c = a.cdf(hi);
                pts.push(a.point(span * (j as f64 + 0.5) / per_arc as f64));
                wts.push((c - prev).max(0.0));
                prev = c;
            }
        }
        let total: f64 = wts.iter().sum();
        let wts: Vec<f64> = wts.iter().map(|w| w / total).collect();
        let total_mass = wts.iter().sum();
        DiscreteMeasure { points: pts, weights: wts, total_mass }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::mobius::Mobius;

    fn seg(r: f64) -> ArcChain {
        ArcChain::single(Arc::Segment { a: C64::new(-r, 0.0), b: C64::new(r, 0.0) }, 0.01).unwrap()
    }

    #[test]
    fn circle_capacity_and_uniform_density() {
        let c = ArcChain::single(Arc::Circle { center: C64::new(0.0, 0.0), radius: 0.5 }, 0.01).unwrap();
        let res = equilibrium(&c, 32).unwrap();
        assert!((res.capacity - 1.0 / 2f64.ln()).abs() < 1e-10);
        let u = 1.0 / res.measure.len() as f64;
        assert!(res.measure.weights.iter().all(|w| (w - u).abs() < 1e-12));
        assert!(res.residual_max < 1e-10);
    }

    #[test]
    fn segment_capacity_converges() {
        let res = equilibrium(&seg(0.5), 48).unwrap();
        // elliptic-modulus value of cap([-1/2, 1/2])
        assert!((res.capacity - 0.725544161609597).abs() < 1e-9, "{}", res.capacity);
        assert!(res.residual_max < 1e-6);
        assert!(res.potential(C64::new(0.9, 0.0)) < res.level);
        assert!((res.arcs[0].mass() - 1.0).abs() < 1e-12);
        assert!((res.arcs[0].cdf(PI) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mobius_image_keeps_capacity() {
        let c = seg(0.4);
        let m = Mobius::disk_automorphism(0.3, C64::new(0.2, -0.1));
        let a = equilibrium(&c, 32).unwrap();
        let b = equilibrium(&c.mapped(&m).unwrap(), 32).unwrap();
        assert!((a.capacity - b.capacity).abs() < 1e-8);
        let z = C64::new(0.1, 0.5);
        assert!((a.potential(z) - b.potential(m.apply(z))).abs() < 1e-8);
    }

    #[test]
    fn nested_segments_are_monotone() {
        let a = capacity_only(&seg(0.3), 32).unwrap().0;
        let b = capacity_only(&seg(0.5), 32).unwrap().0;
        assert!(a < b);
    }

    #[test]
    fn tripod_solves_with_positive_weights() {
        let v = C64::new(0.0, 0.0);
        let arms: Vec<Arc> = (0..3).map(|k| Arc::Segment { a: v, b: C64::from_polar(0.5, 2.0 * PI * k as f64 / 3.0) }).collect();
        let chain = ArcChain::new(arms, 0.05).unwrap();
        let res = equilibrium(&chain, 32).unwrap();
        assert!(res.error_estimate < 1e-3, "{}", res.error_estimate);
        assert!(res.residual_max < 1e-2, "{}", res.residual_max);
        assert!((res.capacity - 0.86660003202).abs() < 1e-4, "{}", res.capacity);
    }
}
