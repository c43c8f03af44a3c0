//! Elementary complex functions over a generic [`Real`].

use super::{Real, C};

pub fn zero<R: Real>() -> C<R> {
    C::new(R::zero(), R::zero())
}

pub fn one<R: Real>() -> C<R> {
    C::new(R::one(), R::zero())
}

pub fn real<R: Real>(x: R) -> C<R> {
    C::new(x, R::zero())
}

pub fn abs<R: Real>(z: &C<R>) -> R {
    z.re.hypot(&z.im)
}

pub fn arg<R: Real>(z: &C<R>) -> R {
    z.im.atan2(&z.re)
}

pub fn scale<R: Real>(z: &C<R>, s: &R) -> C<R> {
    C::new(z.re.clone() * s, z.im.clone() * s)
}

pub fn inv<R: Real>(z: &C<R>) -> C<R> {
    let d = z.norm_sqr();
    C::new(z.re.clone() / &d, -(z.im.clone() / &d))
}

/// `e^{i t}`.
pub fn cis<R: Real>(t: &R) -> C<R> {
    C::new(t.cos(), t.sin())
}

/// Principal square root, branch cut along the negative real axis.
pub fn sqrt<R: Real>(z: &C<R>) -> C<R> {
    if z.re.is_zero() && z.im.is_zero() {
        return zero();
    }
    let r = abs(z);
    let two = R::from_f64(2.0);
    let t = ((r + z.re.abs()) / &two).sqrt();
    if !z.re.is_negative() {
        let im = z.im.clone() / &(t.clone() * &two);
        C::new(t, im)
    } else {
        let re = z.im.abs() / &(t.clone() * &two);
        let im = if z.im.is_negative() { -t } else { t };
        C::new(re, im)
    }
}

pub fn exp<R: Real>(z: &C<R>) -> C<R> {
    let m = z.re.exp();
    C::new(m.clone() * &z.im.cos(), m * &z.im.sin())
}

/// Principal logarithm.
pub fn ln<R: Real>(z: &C<R>) -> C<R> {
    C::new(abs(z).ln(), arg(z))
}

/// Principal power `z^p` for real `p`.
pub fn powf<R: Real>(z: &C<R>, p: &R) -> C<R> {
    if z.re.is_zero() && z.im.is_zero() {
        return zero();
    }
    let l = ln(z);
    exp(&scale(&l, p))
}

/// Principal `m`-th root by Newton's method from a double precision guess.
pub fn principal_root<R: Real>(z: &C<R>, m: usize) -> C<R> {
    if m == 1 || (z.re.is_zero() && z.im.is_zero()) {
        return z.clone();
    }
    if m == 2 {
        return sqrt(z);
    }
    let zf = super::lower(z);
    if !(zf.norm() > 1e-280 && zf.norm() < 1e280) || R::epsilon().to_f64() >= f64::EPSILON {
        return powf(z, &(R::one() / &R::from_usize(m)));
    }
    let mut w: C<R> = super::lift(zf.powf(1.0 / m as f64));
    let mf = R::from_usize(m);
    let m1 = R::from_usize(m - 1);
    let tol = R::epsilon().to_f64() * 16.0;
    for _ in 0..12 {
        let wm1 = powu(&w, (m - 1) as u64);
        let next = scale(&(scale(&w, &m1) + z.clone() / wm1), &(R::one() / &mf));
        let change = super::lower(&(next.clone() - w.clone())).norm() / super::lower(&next).norm();
        w = next;
        if change <= tol {
            break;
        }
    }
    w
}

/// The `m` complex `m`-th roots of `z`, starting from the principal one.
pub fn roots_of<R: Real>(z: &C<R>, m: usize) -> Vec<C<R>> {
    let base = principal_root(z, m);
    let step = R::from_f64(2.0) * &R::pi() / &R::from_usize(m);
    (0..m)
        .map(|k| base.clone() * cis(&(step.clone() * &R::from_usize(k))))
        .collect()
}

pub fn dist<R: Real>(a: &C<R>, b: &C<R>) -> R {
    abs(&(a.clone() - b.clone()))
}

pub fn is_finite<R: Real>(z: &C<R>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

pub fn unit<R: Real>() -> C<R> {
    C::new(R::zero(), R::one())
}

/// `x^k` for integer `k >= 0`.
pub fn powu<R: Real>(z: &C<R>, k: u64) -> C<R> {
    let mut acc = one::<R>();
    let mut base = z.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * &base;
        }
        e >>= 1;
        if e > 0 {
            base = base.clone() * &base;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{Mp, C64};

    #[test]
    fn sqrt_matches_std_principal_branch() {
        for &(re, im) in &[(1.0, 2.0), (-3.0, 0.5), (-3.0, -0.5), (-4.0, 0.0), (0.0, -2.0), (2.0, 0.0)] {
            let z = C64::new(re, im);
            let a = sqrt(&z);
            let b = z.sqrt();
            assert!((a - b).norm() < 1e-14, "{z}");
            let zm = C::new(Mp::from_f64(re), Mp::from_f64(im));
            let m = sqrt(&zm);
            assert!((m.re.to_f64() - b.re).abs() < 1e-14);
            assert!((m.im.to_f64() - b.im).abs() < 1e-14);
        }
    }

    #[test]
    fn exp_ln_inverse() {
        let z = C64::new(-0.7, 2.3);
        let w = exp(&ln(&z));
        assert!((w - z).norm() < 1e-14);
        let r = roots_of(&z, 3);
        for x in r {
            assert!((x * x * x - z).norm() < 1e-13);
        }
        assert!((powu(&z, 5) - z.powu(5)).norm() < 1e-12);
    }

    #[test]
    fn newton_root_is_principal_and_exact() {
        let z = C::new(Mp::from_f64(-0.7), Mp::from_f64(2.3));
        for m in [3usize, 4, 7] {
            let w = principal_root(&z, m);
            let p = powf(&z, &(Mp::from_f64(1.0) / &Mp::from_usize(m)));
            assert!(abs(&(w.clone() - p)) < Mp::from_f64(1e-150));
            assert!(abs(&(powu(&w, m as u64) - z.clone())) < Mp::from_f64(1e-150));
        }
    }
}
