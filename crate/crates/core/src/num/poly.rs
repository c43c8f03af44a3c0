//! Dense polynomials with complex coefficients (ascending order) and a
//! root finder: companion-matrix eigenvalues in double precision polished
//! by Aberth–Ehrlich iteration in the working precision.

use nalgebra::DMatrix;
use num_traits::Zero;

use super::{cx, lift, lower, Real, C, C64};

/// Evaluate `sum c_k z^k`.
pub fn horner<R: Real>(c: &[C<R>], z: &C<R>) -> C<R> {
    let mut acc = cx::zero::<R>();
    for a in c.iter().rev() {
        acc = acc * z + a;
    }
    acc
}

/// Value and first derivative.
pub fn horner_d<R: Real>(c: &[C<R>], z: &C<R>) -> (C<R>, C<R>) {
    let mut p = cx::zero::<R>();
    let mut d = cx::zero::<R>();
    for a in c.iter().rev() {
        d = d * z + &p;
        p = p * z + a;
    }
    (p, d)
}

/// Coefficients of the derivative.
pub fn derivative<R: Real>(c: &[C<R>]) -> Vec<C<R>> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, a)| cx::scale(a, &R::from_usize(k)))
        .collect()
}

/// Product of two polynomials.
pub fn mul<R: Real>(a: &[C<R>], b: &[C<R>]) -> Vec<C<R>> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![cx::zero::<R>(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].clone() + x.clone() * y;
        }
    }
    out
}

/// Monic polynomial with the given roots.
pub fn from_roots<R: Real>(roots: &[C<R>]) -> Vec<C<R>> {
    let mut p = vec![cx::one::<R>()];
    for r in roots {
        p = mul(&p, &[-r.clone(), cx::one::<R>()]);
    }
    p
}

/// Outcome of a root computation.
#[derive(Clone, Debug)]
pub struct Roots<R: Real> {
    pub roots: Vec<C<R>>,
    /// Every root met the backward-error stopping test.
    pub converged: bool,
    pub iterations: usize,
}

/// Eigenvalues of the companion matrix of `c` (double precision).
pub fn companion_eigenvalues(c: &[C64]) -> Option<Vec<C64>> {
    let d = c.len().checked_sub(1)?;
    if d == 0 {
        return Some(Vec::new());
    }
    let lead = c[d];
    if lead == C64::new(0.0, 0.0) {
        return None;
    }
    let mut m = DMatrix::<C64>::zeros(d, d);
    for i in 1..d {
        m[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..d {
        m[(i, d - 1)] = -c[i] / lead;
    }
    if m.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return None;
    }
    let schur = nalgebra::linalg::Schur::try_new(m, 1e-15, 30 * d + 100)?;
    let ev = schur.eigenvalues()?;
    let v: Vec<C64> = ev.iter().cloned().collect();
    if v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Some(v)
    } else {
        None
    }
}

/// Initial approximations on circles whose radii come from the upper convex
/// hull of `(k, log|c_k|)`.
pub fn newton_polygon_guesses(c: &[C64]) -> Vec<C64> {
    let d = c.len() - 1;
    let pts: Vec<(usize, f64)> = c
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm() > 0.0)
        .map(|(k, a)| (k, a.norm().ln()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.0 as f64 - a.0 as f64) * (p.1 - a.1) - (b.1 - a.1) * (p.0 as f64 - a.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut out = Vec::with_capacity(d);
    let mut offset = 0.0;
    for w in hull.windows(2) {
        let (k0, l0) = w[0];
        let (k1, l1) = w[1];
        let cnt = k1 - k0;
        let r = ((l0 - l1) / cnt as f64).exp();
        for j in 0..cnt {
            let t = 2.0 * std::f64::consts::PI * j as f64 / cnt as f64 + offset + 0.4;
            out.push(C64::from_polar(r, t));
        }
        offset += 1.1;
    }
    out
}

/// `p(z)/p'(z)` and a backward-error test, evaluated stably for large `|z|`
/// through the reversed polynomial. `absc` holds `|c_k|`.
fn newton_step<R: Real>(c: &[C<R>], absc: &[R], z: &C<R>) -> (C<R>, bool) {
    let d = c.len() - 1;
    let eps = R::epsilon() * &R::from_f64(16.0);
    let modz = cx::abs(z);
    if modz <= R::one() {
        let (p, dp) = horner_d(c, z);
        let mut scale = R::zero();
        for a in absc.iter().rev() {
            scale = scale * &modz + a;
        }
        let small = cx::abs(&p) <= eps * &scale * &R::from_usize(d + 1);
        if cx::abs(&dp).is_zero() {
            return (cx::zero(), small);
        }
        (p / dp, small)
    } else {
        let w = cx::inv(z);
        let rev: Vec<C<R>> = c.iter().rev().cloned().collect();
        let (q, dq) = horner_d(&rev, &w);
        let mut scale = R::zero();
        let modw = R::one() / &modz;
        for a in absc {
            scale = scale * &modw + a;
        }
        let small = cx::abs(&q) <= eps * &scale * &R::from_usize(d + 1);
        if cx::abs(&q).is_zero() {
            return (cx::zero(), true);
        }
        // p/p' = z / (d - w q'/q)
        let denom = cx::real::<R>(R::from_usize(d)) - w * dq / q;
        if cx::abs(&denom).is_zero() {
            return (cx::zero(), small);
        }
        (z.clone() / denom, small)
    }
}

/// All roots of `sum c_k z^k` (trailing zero coefficients are trimmed).
pub fn roots<R: Real>(c: &[C<R>]) -> Roots<R> {
    aberth(c)
}

/// Roots in `|z| < radius`. Iterates outside the disk are carried in double
/// precision only; those inside get their Newton ratio in `R`.
pub fn roots_within<R: Real>(c: &[C<R>], radius: f64) -> Roots<R> {
    let big = c.iter().map(cx::abs).fold(R::zero(), |a, b| a.max_of(b));
    let floor = R::epsilon() * &R::from_f64(16.0) * &big;
    let mut hi = c.len();
    while hi > 0 && cx::abs(&c[hi - 1]) <= floor {
        hi -= 1;
    }
    let c = &c[..hi];
    if c.len() <= 1 {
        return Roots { roots: Vec::new(), converged: true, iterations: 0 };
    }
    let mut lo = 0;
    while c[lo].is_zero() {
        lo += 1;
    }
    let c = &c[lo..];
    let d = c.len() - 1;
    let mut out: Vec<C<R>> = vec![cx::zero::<R>(); lo];
    if d == 0 {
        return Roots { roots: out, converged: true, iterations: 0 };
    }
    let c64: Vec<C64> = c.iter().map(lower).collect();
    let absc: Vec<R> = c.iter().map(cx::abs).collect();
    let abs64: Vec<f64> = c64.iter().map(|z| z.norm()).collect();
    let mut z = newton_polygon_guesses(&c64);
    for i in 0..d {
        for j in 0..i {
            if z[i] == z[j] {
                let bump = C64::new(1e-7, 1e-7) * (1.0 + z[i].norm());
                z[i] += bump;
            }
        }
    }
    let mut hp: Vec<Option<C<R>>> = vec![None; d];
    let mut done = vec![false; d];
    let target = zeros_inside(c, radius);
    let mut iterations = 0;
    for _ in 0..4 {
        iterations += hybrid_sweeps(c, &absc, &c64, &abs64, &mut z, &mut hp, &mut done, radius);
        let inner: Vec<usize> = (0..d).filter(|&i| z[i].norm() < radius).collect();
        let missing = match target {
            Some(w) if w > inner.len() => w - inner.len(),
            _ => break,
        };
        let (centre, spread) = if inner.is_empty() {
            (C64::new(0.0, 0.0), 0.5 * radius)
        } else {
            let g = inner.iter().map(|&i| z[i]).sum::<C64>() / inner.len() as f64;
            let r = inner.iter().map(|&i| (z[i] - g).norm()).fold(0.0, f64::max);
            (g, r.max(1e-3))
        };
        let mut outer: Vec<usize> = (0..d).filter(|&i| z[i].norm() >= radius).collect();
        outer.sort_by(|&a, &b| z[a].norm().total_cmp(&z[b].norm()));
        for (j, &i) in outer.iter().take(missing).enumerate() {
            let w = centre + C64::from_polar(0.5 * spread, 2.4 * j as f64 + 0.3);
            z[i] = if w.norm() < radius { w } else { w * (0.5 * radius / w.norm()) };
            hp[i] = None;
            done[i] = false;
        }
    }
    let mut converged = true;
    for i in 0..d {
        if z[i].norm() < radius {
            converged &= done[i] && hp[i].is_some();
            out.push(hp[i].take().unwrap_or_else(|| lift(z[i])));
        }
    }
    Roots { roots: out, converged, iterations }
}

/// Hybrid Aberth sweeps: iterates inside `radius` are updated in working
/// precision, the others in f64. Returns the number of sweeps.
#[allow(clippy::too_many_arguments)]
fn hybrid_sweeps<R: Real>(
    c: &[C<R>],
    absc: &[R],
    c64: &[C64],
    abs64: &[f64],
    z: &mut [C64],
    hp: &mut [Option<C<R>>],
    done: &mut [bool],
    radius: f64,
) -> usize {
    let d = z.len();
    let tiny = R::epsilon() * &R::from_f64(4.0);
    let max_iter = 80 + 4 * (R::epsilon().to_f64().log2().abs() as usize / 53);
    let mut iterations = 0;
    for _ in 0..max_iter {
        iterations += 1;
        let mut all = true;
        for i in 0..d {
            let inside = z[i].norm() < radius;
            if done[i] && (!inside || hp[i].is_some()) {
                continue;
            }
            let mut s: C64 = (0..d).filter(|&j| j != i && (z[i] - z[j]).norm() > 1e-280).map(|j| (z[i] - z[j]).inv()).sum();
            if !(s.re.is_finite() && s.im.is_finite()) {
                s = C64::new(0.0, 0.0);
            }
            if inside {
                let zi = hp[i].take().unwrap_or_else(|| lift(z[i]));
                let (ratio, small) = newton_step(c, absc, &zi);
                if small {
                    done[i] = true;
                    hp[i] = Some(zi);
                    continue;
                }
                all = false;
                let denom = cx::one::<R>() - ratio.clone() * lift::<R>(s);
                let corr = if cx::abs(&denom).is_zero() { ratio } else { ratio / denom };
                done[i] = cx::abs(&corr) <= tiny.clone() * &cx::abs(&zi);
                let next = zi - corr;
                z[i] = lower(&next);
                hp[i] = Some(next);
            } else {
                hp[i] = None;
                let (ratio, small) = newton_step(c64, abs64, &z[i]);
                if small || !(ratio.re.is_finite() && ratio.im.is_finite()) {
                    done[i] = true;
                    continue;
                }
                all = false;
                let denom = C64::new(1.0, 0.0) - ratio * s;
                let corr = if denom.norm() == 0.0 { ratio } else { ratio / denom };
                done[i] = corr.norm() <= 1e-12 * z[i].norm();
                z[i] -= corr;
            }
        }
        if all {
            break;
        }
    }
    iterations
}

/// Number of zeros in `|z| < radius` by the argument principle, or `None`
/// when the boundary passes too close to a zero.
pub fn zeros_inside<R: Real>(c: &[C<R>], radius: f64) -> Option<usize> {
    if c.len() <= 1 {
        return Some(0);
    }
    let rr = R::from_f64(radius);
    let mut scaled = Vec::with_capacity(c.len());
    let mut pw = R::one();
    for a in c {
        scaled.push(a.clone() * &pw);
        pw = pw * &rr;
    }
    let mut m = (8 * c.len()).next_power_of_two().max(256);
    while m <= 1 << 16 {
        let mut buf = vec![cx::zero::<R>(); m];
        for (k, a) in scaled.iter().enumerate() {
            buf[k % m] = buf[k % m].clone() + a;
        }
        super::fft::Plan::<R>::new(m).inverse(&mut buf);
        if buf.iter().any(|v| cx::abs(v).is_zero()) {
            return None;
        }
        let mut total = 0.0;
        let mut smooth = true;
        for j in 0..m {
            let q = lower(&(buf[(j + 1) % m].clone() / &buf[j]));
            let step = q.arg();
            if step.abs() > 1.0 {
                smooth = false;
                break;
            }
            total += step;
        }
        if smooth {
            let w = (total / (2.0 * std::f64::consts::PI)).round();
            return if w >= 0.0 { Some(w as usize) } else { None };
        }
        m *= 2;
    }
    None
}

fn aberth<R: Real>(c: &[C<R>]) -> Roots<R> {
    let mut hi = c.len();
    while hi > 0 && c[hi - 1].is_zero() {
        hi -= 1;
    }
    let c = &c[..hi];
    if c.len() <= 1 {
        return Roots { roots: Vec::new(), converged: true, iterations: 0 };
    }
    let mut lo = 0;
    while c[lo].is_zero() {
        lo += 1;
    }
    let zeros_at_origin = lo;
    let c = &c[lo..];
    let d = c.len() - 1;
    let mut out: Vec<C<R>> = vec![cx::zero::<R>(); zeros_at_origin];
    if d == 0 {
        return Roots { roots: out, converged: true, iterations: 0 };
    }

    let c64: Vec<C64> = c.iter().map(lower).collect();
    let absc: Vec<R> = c.iter().map(cx::abs).collect();
    let usable = c64.iter().all(|z| z.re.is_finite() && z.im.is_finite()) && c64[d].norm() > 0.0;
    let guesses = if usable {
        companion_eigenvalues(&c64).unwrap_or_else(|| newton_polygon_guesses(&c64))
    } else {
        newton_polygon_guesses(&c64)
    };
    let mut z: Vec<C<R>> = guesses.into_iter().map(lift).collect();
    // separate exactly coincident starting values
    for i in 0..d {
        for j in 0..i {
            if z[i] == z[j] {
                let bump = R::from_f64(1e-7) * &(R::one() + cx::abs(&z[i]));
                z[i] = z[i].clone() + C::new(bump.clone(), bump);
            }
        }
    }
    let mut done = vec![false; d];
    let max_iter = 60 + 4 * (R::epsilon().to_f64().log2().abs() as usize / 53);
    let mut iterations = 0;
    let tiny = R::epsilon() * &R::from_f64(4.0);
    for _ in 0..max_iter {
        iterations += 1;
        let mut all = true;
        for i in 0..d {
            if done[i] {
                continue;
            }
            let (ratio, small) = newton_step(c, &absc, &z[i]);
            if small {
                done[i] = true;
                continue;
            }
            all = false;
            let mut s = cx::zero::<R>();
            for j in 0..d {
                if j != i {
                    let diff = z[i].clone() - z[j].clone();
                    if !diff.is_zero() {
                        s = s + cx::inv(&diff);
                    }
                }
            }
            let denom = cx::one::<R>() - ratio.clone() * s;
            let corr = if cx::abs(&denom).is_zero() { ratio } else { ratio / denom };
            if cx::abs(&corr) <= tiny.clone() * &cx::abs(&z[i]) {
                done[i] = true;
            }
            z[i] = z[i].clone() - corr;
        }
        if all {
            break;
        }
    }
    let converged = done.iter().all(|&b| b);
    out.extend(z);
    Roots { roots: out, converged, iterations }
}

/// Multiply the coefficient vector by a scalar.
pub fn scale_all<R: Real>(c: &[C<R>], s: &C<R>) -> Vec<C<R>> {
    c.iter().map(|a| a.clone() * s).collect()
}

/// Synthetic division by `(z - r)`; returns the quotient.
pub fn deflate<R: Real>(c: &[C<R>], r: &C<R>) -> Vec<C<R>> {
    let d = c.len() - 1;
    let mut q = vec![cx::zero::<R>(); d];
    let mut acc = cx::zero::<R>();
    for k in (1..=d).rev() {
        acc = acc * r + &c[k];
        q[k - 1] = acc.clone();
    }
    q
}

/// Evaluate `sum c_k z^k` at many points.
pub fn eval_many<R: Real>(c: &[C<R>], zs: &[C<R>]) -> Vec<C<R>> {
    zs.iter().map(|z| horner(c, z)).collect()
}

/// True when all coefficients have zero imaginary part.
pub fn is_real<R: Real>(c: &[C<R>]) -> bool {
    c.iter().all(|a| a.im.is_zero())
}

pub fn one_poly<R: Real>() -> Vec<C<R>> {
    vec![C::new(R::one(), R::zero())]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Mp;

    #[test]
    fn recovers_prescribed_roots() {
        let rs = [C64::new(0.3, 0.0), C64::new(-0.5, 0.2), C64::new(-0.5, -0.2), C64::new(2.0, 1.0), C64::new(0.0, -0.9)];
        let p = from_roots(&rs);
        let found = roots(&p);
        assert!(found.converged);
        for r in rs {
            let best = found.roots.iter().map(|z| (z - r).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-12, "{r}: {best}");
        }
    }

    #[test]
    fn extended_polish_reaches_full_precision() {
        let rs: Vec<C<Mp>> = (0..12)
            .map(|k| C::new(Mp::from_f64(0.9 * (k as f64 * 0.5).cos()), Mp::from_f64(0.9 * (k as f64 * 0.5).sin())))
            .collect();
        let p = from_roots(&rs);
        let found = roots(&p);
        assert!(found.converged);
        for r in &rs {
            let best = found
                .roots
                .iter()
                .map(|z| cx::dist(z, r))
                .fold(Mp::from_f64(1.0), |a, b| a.min_of(b));
            assert!(best < Mp::from_f64(1e-120), "{:?}", best);
        }
    }

    #[test]
    fn origin_and_degenerate_cases() {
        let p = vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-0.09, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let r = roots(&p);
        assert_eq!(r.roots.len(), 4);
        assert_eq!(r.roots.iter().filter(|z| z.norm() == 0.0).count(), 2);
        assert!(roots(&[C64::new(3.0, 0.0)]).roots.is_empty());
    }

    #[test]
    fn horner_derivative() {
        let p = vec![C64::new(1.0, 0.0), C64::new(-2.0, 1.0), C64::new(0.5, 0.0)];
        let z = C64::new(0.3, -0.4);
        let (v, d) = horner_d(&p, &z);
        assert!((v - (p[0] + p[1] * z + p[2] * z * z)).norm() < 1e-15);
        assert!((d - (p[1] + 2.0 * p[2] * z)).norm() < 1e-15);
        assert!((horner(&derivative(&p), &z) - d).norm() < 1e-15);
        let q = deflate(&from_roots(&[C64::new(0.2, 0.0), C64::new(-1.0, 0.0)]), &C64::new(0.2, 0.0));
        assert!((q[0] - C64::new(1.0, 0.0)).norm() < 1e-15 && (q[1] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hybrid_finds_inner_cluster() {
        let mut rs: Vec<C<Mp>> = (0..6).map(|k| lift(C64::new(0.3, 0.0) + C64::from_polar(0.02, 1.1 * k as f64))).collect();
        rs.extend((0..120).map(|k| lift(C64::from_polar(2.2, 0.0523 * k as f64 + 0.01))));
        let p = from_roots(&rs);
        assert_eq!(zeros_inside(&p, 1.05), Some(6));
        assert_eq!(zeros_inside(&p, 3.0), Some(126));
        let found = roots_within(&p, 1.05);
        assert_eq!(found.roots.len(), 6);
        for r in &rs[..6] {
            let best = found.roots.iter().map(|z| cx::abs(&(z.clone() - r)).to_f64()).fold(f64::MAX, f64::min);
            assert!(best < 1e-40, "{best}");
        }
    }

}
