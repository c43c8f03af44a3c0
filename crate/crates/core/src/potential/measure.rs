//! Discrete measures, Green and logarithmic potentials, balayage onto the circle.

use crate::doc::KvDoc;
use crate::error::{LabError, Result};
use crate::num::C64;

/// Finitely supported positive measure in the closed disk.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    pub points: Vec<C64>,
    pub weights: Vec<f64>,
    pub total_mass: f64,
}

impl DiscreteMeasure {
    pub fn new(points: Vec<C64>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(LabError::InvalidArgument("points and weights differ in length".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(LabError::NegativeWeight(*w));
        }
        if let Some(p) = points.iter().find(|p| !(p.norm() <= 1.0 + 1e-12)) {
            return Err(LabError::Domain(format!("support point {p} outside the closed disk")));
        }
        let total_mass = weights.iter().sum();
        Ok(DiscreteMeasure { points, weights, total_mass })
    }

    pub fn dirac(z: C64) -> Self {
        DiscreteMeasure { points: vec![z], weights: vec![1.0], total_mass: 1.0 }
    }

    /// `n` equal masses on the circle `|w - center| = radius`.
    pub fn uniform_circle(center: C64, radius: f64, n: usize) -> Self {
        let points = (0..n)
            .map(|k| center + C64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
            .collect();
        let weights = vec![1.0 / n as f64; n];
        let total_mass = weights.iter().sum();
        DiscreteMeasure { points, weights, total_mass }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Rescale to total mass one.
    pub fn normalized(&self) -> Self {
        let s = self.total_mass;
        let weights: Vec<f64> = self.weights.iter().map(|w| w / s).collect();
        let total_mass = weights.iter().sum();
        DiscreteMeasure { points: self.points.clone(), weights, total_mass }
    }

    pub fn to_doc(&self) -> KvDoc {
        let mut d = KvDoc::new();
        d.push("kind", "measure");
        d.push_complexes("points", &self.points);
        d.push_reals("weights", &self.weights);
        d
    }

    pub fn from_doc(d: &KvDoc) -> Result<Self> {
        Self::new(d.get_complexes("points")?, d.get_reals("weights")?)
    }
}

/// Green function of the unit disk, `log|1 - z conj(w)| - log|z - w|`.
pub fn green_function(z: C64, w: C64) -> Result<f64> {
    if z.norm() >= 1.0 || w.norm() >= 1.0 {
        return Err(LabError::Domain("green function needs points in the open disk".into()));
    }
    if z == w {
        return Err(LabError::Coincident);
    }
    Ok(green(z, w))
}

/// Unchecked Green function; `+inf` at `z = w`, 0 when either point is on the circle.
#[inline]
pub fn green(z: C64, w: C64) -> f64 {
    let d = (z - w).norm();
    if d == 0.0 {
        return f64::INFINITY;
    }
    let q = (C64::new(1.0, 0.0) - z * w.conj()).norm();
    (q / d).ln()
}

/// `∫ g(z, w) dmu(w)`, `+inf` on the support.
pub fn green_potential(mu: &DiscreteMeasure, z: C64) -> f64 {
    mu.points.iter().zip(&mu.weights).map(|(p, w)| if *w == 0.0 { 0.0 } else { w * green(z, *p) }).sum()
}

/// `∫ log 1/|z - t| dmu(t)`.
pub fn log_potential(mu: &DiscreteMeasure, z: C64) -> f64 {
    mu.points
        .iter()
        .zip(&mu.weights)
        .map(|(p, w)| if *w == 0.0 { 0.0 } else { -w * (z - p).norm().ln() })
        .sum()
}

/// Poisson kernel `(1 - |z|^2) / |e^{it} - z|^2` (density against `dt / 2π`).
pub fn poisson(z: C64, t: f64) -> f64 {
    (1.0 - z.norm_sqr()) / (C64::from_polar(1.0, t) - z).norm_sqr()
}

/// Grid size that resolves the Poisson kernels of `mu` to roughly `1e-17`.
pub fn balayage_grid_size(mu: &DiscreteMeasure) -> usize {
    let rmax = mu.points.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let mut g = 256usize;
    while g < 1 << 16 && rmax.powi(g as i32) > 1e-17 {
        g *= 2;
    }
    g
}

/// Balayage of `mu` onto the unit circle as masses at `e^{2πik/G}`.
pub fn balayage_to_circle(mu: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    balayage_to_circle_on(mu, balayage_grid_size(mu))
}

pub fn balayage_to_circle_on(mu: &DiscreteMeasure, grid: usize) -> Result<DiscreteMeasure> {
    if let Some(p) = mu.points.iter().find(|p| p.norm() >= 1.0) {
        return Err(LabError::Domain(format!("support point {p} not inside the disk")));
    }
    let tau = 2.0 * std::f64::consts::PI;
    let angles: Vec<f64> = (0..grid).map(|k| tau * k as f64 / grid as f64).collect();
    let mut weights = vec![0.0; grid];
    let mut row = vec![0.0; grid];
    for (p, w) in mu.points.iter().zip(&mu.weights) {
        if *w == 0.0 {
            continue;
        }
        let mut s = 0.0;
        for (r, t) in row.iter_mut().zip(&angles) {
            *r = poisson(*p, *t);
            s += *r;
        }
        for (acc, r) in weights.iter_mut().zip(&row) {
            *acc += w * r / s;
        }
    }
    let points = angles.iter().map(|t| C64::from_polar(1.0, *t)).collect();
    let total: f64 = weights.iter().sum();
    let fix = mu.total_mass / total;
    let weights: Vec<f64> = weights.iter().map(|w| w * fix).collect();
    let total_mass = weights.iter().sum();
    Ok(DiscreteMeasure { points, weights, total_mass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn green_values() {
        let z = C64::new(0.0, 0.0);
        assert!((green_function(z, C64::new(0.5, 0.0)).unwrap() - 2f64.ln()).abs() < 1e-15);
        let a = C64::new(0.3, 0.0);
        let b = C64::new(0.0, 0.6);
        assert!((green(a, b) - green(b, a)).abs() < 1e-15);
        assert_eq!(green_function(a, a), Err(LabError::Coincident));
        for k in 0..360 {
            let p = C64::from_polar(0.999, k as f64 * std::f64::consts::PI / 180.0);
            assert!(green(p, C64::new(0.5, 0.0)) < 0.01);
        }
    }

    #[test]
    fn potentials() {
        let d0 = DiscreteMeasure::dirac(C64::new(0.0, 0.0));
        assert!((green_potential(&d0, C64::new(0.5, 0.0)) - 2f64.ln()).abs() < 1e-15);
        assert!((log_potential(&d0, C64::new(2.0, 0.0)) + 2f64.ln()).abs() < 1e-15);
        let ring = DiscreteMeasure::uniform_circle(C64::new(0.0, 0.0), 0.5, 256);
        assert!((green_potential(&ring, C64::new(0.0, 0.0)) - 2f64.ln()).abs() < 1e-13);
        let t = DiscreteMeasure::uniform_circle(C64::new(0.0, 0.0), 1.0, 256);
        assert!(log_potential(&t, C64::new(0.0, 0.0)).abs() < 1e-14);
        assert!((log_potential(&t, C64::new(2.0, 0.0)) + 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn balayage_of_center_is_uniform() {
        let b = balayage_to_circle(&DiscreteMeasure::dirac(C64::new(0.0, 0.0))).unwrap();
        let u = 1.0 / b.len() as f64;
        assert!(b.weights.iter().all(|w| (w - u).abs() < 1e-16));
        assert!((b.total_mass - 1.0).abs() < 1e-14);
    }

    #[test]
    fn balayage_identity() {
        let mu = DiscreteMeasure::new(
            vec![C64::new(0.2, 0.1), C64::new(-0.5, 0.3), C64::new(0.0, -0.7)],
            vec![0.2, 0.5, 0.3],
        )
        .unwrap();
        let bal = balayage_to_circle(&mu).unwrap();
        assert!((bal.total_mass - mu.total_mass).abs() < 1e-14);
        for k in 0..20 {
            let z = C64::from_polar(0.9 * ((k as f64 * 0.37).sin().abs()), k as f64 * 1.3);
            let lhs = log_potential(&mu, z) - log_potential(&bal, z);
            assert!((lhs - green_potential(&mu, z)).abs() < 1e-8, "{z}");
        }
    }
}
