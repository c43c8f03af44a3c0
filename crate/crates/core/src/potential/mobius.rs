//! Möbius transformations, mostly automorphisms of the unit disk.

use crate::num::C64;

/// `z -> (a z + b) / (c z + d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mobius {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Mobius {
    pub fn identity() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Mobius { a: one, b: zero, c: zero, d: one }
    }

    /// `z -> e^{i angle} (z - center) / (1 - conj(center) z)`.
    pub fn disk_automorphism(angle: f64, center: C64) -> Self {
        let rot = C64::from_polar(1.0, angle);
        Mobius { a: rot, b: -rot * center, c: -center.conj(), d: C64::new(1.0, 0.0) }
    }

    pub fn apply(&self, z: C64) -> C64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    pub fn derivative(&self, z: C64) -> C64 {
        let den = self.c * z + self.d;
        (self.a * self.d - self.b * self.c) / (den * den)
    }

    pub fn inverse(&self) -> Self {
        Mobius { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Mobius) -> Self {
        Mobius {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    /// Maps the unit circle onto itself and 0 into the disk.
    pub fn is_disk_automorphism(&self, tol: f64) -> bool {
        let inside = self.apply(C64::new(0.0, 0.0)).norm() < 1.0;
        inside
            && (0..8).all(|k| {
                let z = C64::from_polar(1.0, k as f64 * std::f64::consts::FRAC_PI_4 + 0.1);
                (self.apply(z).norm() - 1.0).abs() < tol
            })
    }
}

/// Pseudo-hyperbolic distance `|a - b| / |1 - conj(a) b|`.
pub fn pseudo_hyperbolic(a: C64, b: C64) -> f64 {
    (a - b).norm() / (C64::new(1.0, 0.0) - a.conj() * b).norm()
}

/// Radius `r` of the symmetric pair `{-r, r}` at pseudo-hyperbolic distance
/// `delta`, i.e. the root of `2r / (1 + r^2) = delta` in `[0, 1)`.
pub fn symmetric_radius(delta: f64) -> f64 {
    if delta <= 0.0 {
        return 0.0;
    }
    delta / (1.0 + (1.0 - delta * delta).sqrt())
}

/// Disk automorphism `m` with `m(a) = -r`, `m(b) = r`, together with `r`.
pub fn symmetrizing_map(a: C64, b: C64) -> (Mobius, f64) {
    let phi = Mobius::disk_automorphism(0.0, a);
    let bp = phi.apply(b);
    let rot = Mobius::disk_automorphism(-bp.arg(), C64::new(0.0, 0.0));
    let delta = bp.norm();
    let r = symmetric_radius(delta);
    // chi(w) = (w - r) / (1 - r w) sends 0 -> -r and delta -> r
    let chi = Mobius::disk_automorphism(0.0, C64::new(r, 0.0));
    (chi.compose(&rot).compose(&phi), r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetrizes_pairs() {
        let (m, r) = symmetrizing_map(C64::new(0.0, 0.0), C64::new(0.5, 0.0));
        assert!((r - (1.0 - 0.75f64.sqrt()) / 0.5).abs() < 1e-15);
        assert!((m.apply(C64::new(0.0, 0.0)) + C64::new(r, 0.0)).norm() < 1e-12);
        assert!((m.apply(C64::new(0.5, 0.0)) - C64::new(r, 0.0)).norm() < 1e-12);
        assert!(m.is_disk_automorphism(1e-12));
        let a = C64::new(0.1, -0.4);
        let b = C64::new(-0.3, 0.2);
        let (m2, r2) = symmetrizing_map(a, b);
        assert!((m2.apply(a) + C64::new(r2, 0.0)).norm() < 1e-12);
        assert!((m2.apply(b) - C64::new(r2, 0.0)).norm() < 1e-12);
        let inv = m2.inverse();
        assert!((inv.apply(m2.apply(a)) - a).norm() < 1e-14);
    }

    #[test]
    fn pseudo_distance_is_invariant() {
        let m = Mobius::disk_automorphism(0.7, C64::new(0.3, 0.4));
        let a = C64::new(-0.2, 0.1);
        let b = C64::new(0.5, -0.5);
        assert!((pseudo_hyperbolic(a, b) - pseudo_hyperbolic(m.apply(a), m.apply(b))).abs() < 1e-14);
        let d = 0.6;
        let r = symmetric_radius(d);
        assert!((2.0 * r / (1.0 + r * r) - d).abs() < 1e-15);
    }
}
