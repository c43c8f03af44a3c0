//! Greedy (Leja) Fekete polynomials of point clouds and their lemniscates.

use crate::error::{LabError, Result};
use crate::num::C64;

/// Monic polynomial with roots picked from a point cloud.
#[derive(Clone, Debug, PartialEq)]
pub struct FeketePolynomial {
    pub roots: Vec<C64>,
    /// Coefficients, constant term first, leading 1 last.
    pub coeffs: Vec<C64>,
}

impl FeketePolynomial {
    pub fn degree(&self) -> usize {
        self.roots.len()
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.roots.iter().fold(C64::new(1.0, 0.0), |acc, r| acc * (z - r))
    }

    /// Membership in `{ |p(z)| < eta^k }`.
    pub fn lemniscate_contains(&self, z: C64, eta: f64) -> bool {
        let k = self.degree() as i32;
        let lhs: f64 = self.roots.iter().map(|r| (z - r).norm().ln()).sum();
        lhs < k as f64 * eta.ln()
    }
}

/// Leja sequence: start at the point of largest modulus, then repeatedly add
/// the point maximizing the product of distances to the chosen ones.
pub fn fekete_points(cloud: &[C64], k: usize) -> Result<FeketePolynomial> {
    if k == 0 || k > cloud.len() {
        return Err(LabError::InvalidArgument(format!("cannot pick {k} points from {}", cloud.len())));
    }
    let mut first = 0;
    for (i, z) in cloud.iter().enumerate() {
        if z.norm() > cloud[first].norm() {
            first = i;
        }
    }
    let mut chosen = vec![first];
    let mut logprod: Vec<f64> = cloud.iter().map(|z| (z - cloud[first]).norm().ln()).collect();
    while chosen.len() < k {
        let mut best = None;
        for (i, v) in logprod.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            if best.is_none_or(|b: usize| *v > logprod[b]) {
                best = Some(i);
            }
        }
        let b = best.expect("cloud has unchosen points");
        chosen.push(b);
        for (i, z) in cloud.iter().enumerate() {
            logprod[i] += (z - cloud[b]).norm().ln();
        }
    }
    let roots: Vec<C64> = chosen.iter().map(|&i| cloud[i]).collect();
    let mut coeffs = vec![C64::new(1.0, 0.0)];
    for r in &roots {
        let mut next = vec![C64::new(0.0, 0.0); coeffs.len() + 1];
        for (j, c) in coeffs.iter().enumerate() {
            next[j + 1] += c;
            next[j] -= c * r;
        }
        coeffs = next;
    }
    Ok(FeketePolynomial { roots, coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_clouds() {
        let p = fekete_points(&[C64::new(0.3, 0.0)], 1).unwrap();
        assert_eq!(p.coeffs, vec![C64::new(-0.3, 0.0), C64::new(1.0, 0.0)]);
        let p = fekete_points(&[C64::new(0.3, 0.0), C64::new(-0.3, 0.0)], 2).unwrap();
        assert!((p.coeffs[0] - C64::new(-0.09, 0.0)).norm() < 1e-16);
        assert!(p.coeffs[1].norm() < 1e-16);
        assert!(fekete_points(&[C64::new(0.3, 0.0)], 2).is_err());
    }

    #[test]
    fn tiny_circle_cover() {
        let c = C64::new(0.3, 0.0);
        let cloud: Vec<C64> = (0..50).map(|j| c + C64::from_polar(1e-3, j as f64 * 0.125_663_706_143_591_7)).collect();
        let p = fekete_points(&cloud, 5).unwrap();
        assert!(p.roots.iter().all(|r| (r - c).norm() < 2e-3));
        assert!(cloud.iter().all(|z| p.lemniscate_contains(*z, 0.1)));
    }
}
