//! Dense linear algebra over real or complex working-precision scalars:
//! Hermitian eigenproblems (Householder reduction, implicit QL, inverse
//! iteration) and pivoted elimination.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{Num, Zero};

use super::{cx, Real, C};
use crate::par;

/// Field element: a [`Real`] or a complex number over one.
pub trait Scalar:
    Clone
    + Debug
    + Send
    + Sync
    + 'static
    + Num
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
{
    type Re: Real;
    fn conj(&self) -> Self;
    fn re(&self) -> Self::Re;
    fn abs2(&self) -> Self::Re;
    fn modulus(&self) -> Self::Re;
    fn from_re(r: Self::Re) -> Self;
    fn scale(&self, r: &Self::Re) -> Self;
    fn to_c(&self) -> C<Self::Re>;
}

impl<R: Real> Scalar for R {
    type Re = R;
    fn conj(&self) -> Self {
        self.clone()
    }
    fn re(&self) -> Self {
        self.clone()
    }
    fn abs2(&self) -> Self {
        self.clone() * self
    }
    fn modulus(&self) -> Self {
        Real::abs(self)
    }
    fn from_re(r: Self) -> Self {
        r
    }
    fn scale(&self, r: &Self) -> Self {
        self.clone() * r
    }
    fn to_c(&self) -> C<Self> {
        C::new(self.clone(), R::zero())
    }
}

impl<R: Real> Scalar for C<R> {
    type Re = R;
    fn conj(&self) -> Self {
        C::conj(self)
    }
    fn re(&self) -> R {
        self.re.clone()
    }
    fn abs2(&self) -> R {
        self.norm_sqr()
    }
    fn modulus(&self) -> R {
        cx::abs(self)
    }
    fn from_re(r: R) -> Self {
        C::new(r, R::zero())
    }
    fn scale(&self, r: &R) -> Self {
        cx::scale(self, r)
    }
    fn to_c(&self) -> C<R> {
        self.clone()
    }
}

/// Numerical failure inside a dense kernel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinalgError {
    NoConvergence,
    Singular,
    Shape,
}

impl std::fmt::Display for LinalgError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LinalgError::NoConvergence => write!(f, "QL iteration did not converge"),
            LinalgError::Singular => write!(f, "matrix is numerically singular"),
            LinalgError::Shape => write!(f, "inconsistent matrix dimensions"),
        }
    }
}

impl std::error::Error for LinalgError {}

struct Reflector<S: Scalar> {
    offset: usize,
    v: Vec<S>,
    tau: S::Re,
}

/// Spectral decomposition of a Hermitian matrix. Eigenvalues are computed
/// eagerly; eigenvectors on demand.
pub struct HermitianEigen<S: Scalar> {
    n: usize,
    diag: Vec<S::Re>,
    sub: Vec<S::Re>,
    phases: Vec<S>,
    reflectors: Vec<Reflector<S>>,
    values: Vec<S::Re>,
    norm: S::Re,
}

impl<S: Scalar> HermitianEigen<S> {
    /// `a` is row-major `n x n`; only Hermitian input is meaningful.
    pub fn new(mut a: Vec<S>, n: usize) -> Result<Self, LinalgError> {
        if a.len() != n * n {
            return Err(LinalgError::Shape);
        }
        let mut norm = S::Re::zero();
        for x in &a {
            norm = norm.max_of(x.modulus());
        }
        norm = norm * &S::Re::from_usize(n.max(1));
        let mut reflectors = Vec::new();
        let mut offdiag: Vec<S> = Vec::with_capacity(n.saturating_sub(1));
        for k in 0..n.saturating_sub(1) {
            let m = n - k - 1;
            let x: Vec<S> = (0..m).map(|i| a[(k + 1 + i) * n + k].clone()).collect();
            let mut alpha2 = S::Re::zero();
            for xi in &x {
                alpha2 += xi.abs2();
            }
            if alpha2.is_zero() {
                offdiag.push(S::zero());
                continue;
            }
            let alpha = alpha2.sqrt();
            let ax0 = x[0].modulus();
            let phase = if ax0.is_zero() {
                S::one()
            } else {
                x[0].clone() / &S::from_re(ax0.clone())
            };
            let mut v = x;
            v[0] = v[0].clone() + phase.scale(&alpha);
            let vnorm2 = S::Re::from_f64(2.0) * &alpha * &(alpha.clone() + &ax0);
            let tau = S::Re::from_f64(2.0) / &vnorm2;
            // p = tau * B v, B = trailing block
            let p: Vec<S> = par::map_range(m, |i| {
                let row = (k + 1 + i) * n + k + 1;
                let mut acc = S::zero();
                for j in 0..m {
                    acc = acc + a[row + j].clone() * &v[j];
                }
                acc.scale(&tau)
            });
            let mut vhp = S::zero();
            for j in 0..m {
                vhp = vhp + v[j].conj() * &p[j];
            }
            let kk = vhp.scale(&(tau.clone() / &S::Re::from_f64(2.0)));
            let w: Vec<S> = (0..m).map(|j| p[j].clone() - kk.clone() * &v[j]).collect();
            let vc: Vec<S> = v.iter().map(|t| t.conj()).collect();
            let wc: Vec<S> = w.iter().map(|t| t.conj()).collect();
            let start = (k + 1) * n;
            par::rows_mut(&mut a[start..], n, |i, row| {
                if i >= m {
                    return;
                }
                for j in 0..m {
                    let upd = v[i].clone() * &wc[j] + w[i].clone() * &vc[j];
                    row[k + 1 + j] = row[k + 1 + j].clone() - upd;
                }
            });
            offdiag.push(-(phase.scale(&alpha)));
            reflectors.push(Reflector { offset: k + 1, v, tau });
        }
        let diag: Vec<S::Re> = (0..n).map(|i| a[i * n + i].re()).collect();
        let mut sub = Vec::with_capacity(n.saturating_sub(1));
        let mut phases = Vec::with_capacity(n);
        if n > 0 {
            phases.push(S::one());
        }
        for k in 0..n.saturating_sub(1) {
            let e = &offdiag[k];
            let m = e.modulus();
            let ph = if m.is_zero() {
                S::one()
            } else {
                e.clone() / &S::from_re(m.clone())
            };
            let next = phases[k].clone() * &ph;
            phases.push(next);
            sub.push(m);
        }
        let values = tridiagonal_eigenvalues(&diag, &sub)?;
        Ok(HermitianEigen { n, diag, sub, phases, reflectors, values, norm })
    }

    /// Eigenvalues in ascending order.
    pub fn values(&self) -> &[S::Re] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Unit eigenvector for `values()[idx]`, orthogonalized against `against`.
    pub fn vector(&self, idx: usize, against: &[Vec<S>]) -> Vec<S> {
        let n = self.n;
        let lambda = self.values[idx].clone();
        let y = inverse_iteration(&self.diag, &self.sub, &lambda, &self.norm, idx);
        let mut x: Vec<S> = y.iter().zip(&self.phases).map(|(t, p)| p.scale(t)).collect();
        for r in self.reflectors.iter().rev() {
            let mut dot = S::zero();
            for (j, vj) in r.v.iter().enumerate() {
                dot = dot + vj.conj() * &x[r.offset + j];
            }
            let f = dot.scale(&r.tau);
            for (j, vj) in r.v.iter().enumerate() {
                x[r.offset + j] = x[r.offset + j].clone() - vj.clone() * &f;
            }
        }
        for q in against {
            let mut dot = S::zero();
            for j in 0..n {
                dot = dot + q[j].conj() * &x[j];
            }
            for j in 0..n {
                x[j] = x[j].clone() - q[j].clone() * &dot;
            }
        }
        normalize(&mut x);
        x
    }
}

/// Scale to unit 2-norm, making the largest-modulus entry real positive.
pub fn normalize<S: Scalar>(x: &mut [S]) {
    let mut nrm = S::Re::zero();
    let mut big = 0;
    let mut bigv = S::Re::zero();
    for (i, t) in x.iter().enumerate() {
        let a = t.abs2();
        if a > bigv {
            bigv = a.clone();
            big = i;
        }
        nrm += a;
    }
    if nrm.is_zero() {
        return;
    }
    let nrm = nrm.sqrt();
    let ph = x[big].clone() / &S::from_re(x[big].modulus());
    let f = ph.conj() / &S::from_re(nrm);
    for t in x.iter_mut() {
        *t = t.clone() * &f;
    }
}

/// Eigenvalues (ascending) of the symmetric tridiagonal matrix with the
/// given diagonal and sub-diagonal, by implicit QL with Wilkinson shifts.
pub fn tridiagonal_eigenvalues<R: Real>(diag: &[R], sub: &[R]) -> Result<Vec<R>, LinalgError> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e: Vec<R> = sub.to_vec();
    e.push(R::zero());
    let eps = R::epsilon();
    let two = R::from_f64(2.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps.clone() * &dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 200 {
                return Err(LinalgError::NoConvergence);
            }
            let mut g = (d[l + 1].clone() - &d[l]) / &(two.clone() * &e[l]);
            let mut r = g.hypot(&R::one());
            let sgn = if g.is_negative() { -r.clone() } else { r.clone() };
            g = d[m].clone() - &d[l] + e[l].clone() / &(g + sgn);
            let mut s = R::one();
            let mut c = R::one();
            let mut p = R::zero();
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s.clone() * &e[i];
                let b = c.clone() * &e[i];
                r = f.hypot(&g);
                e[i + 1] = r.clone();
                if r.is_zero() {
                    d[i + 1] = d[i + 1].clone() - &p;
                    e[m] = R::zero();
                    underflow = true;
                    break;
                }
                s = f / &r;
                c = g.clone() / &r;
                g = d[i + 1].clone() - &p;
                r = (d[i].clone() - &g) * &s + two.clone() * &c * &b;
                p = s.clone() * &r;
                d[i + 1] = g.clone() + &p;
                g = c.clone() * &r - b;
            }
            if underflow {
                continue;
            }
            d[l] = d[l].clone() - &p;
            e[l] = g;
            e[m] = R::zero();
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(d)
}

/// Eigenvector of a symmetric tridiagonal matrix for an accurate eigenvalue.
fn inverse_iteration<R: Real>(diag: &[R], sub: &[R], lambda: &R, norm: &R, seed: usize) -> Vec<R> {
    let n = diag.len();
    if n == 1 {
        return vec![R::one()];
    }
    let tiny = R::epsilon() * norm;
    let tiny = if tiny.is_zero() { R::epsilon() } else { tiny };
    // factor T - lambda I with partial pivoting
    let mut dd: Vec<R> = diag.iter().map(|x| x.clone() - lambda).collect();
    let mut dl: Vec<R> = sub.to_vec();
    let mut du: Vec<R> = sub.to_vec();
    let mut du2: Vec<R> = vec![R::zero(); n.saturating_sub(2)];
    let mut swapped = vec![false; n.saturating_sub(1)];
    for i in 0..n - 1 {
        if dd[i].abs() >= dl[i].abs() {
            if dd[i].is_zero() {
                dd[i] = tiny.clone();
            }
            let fact = dl[i].clone() / &dd[i];
            dl[i] = fact.clone();
            dd[i + 1] = dd[i + 1].clone() - fact * &du[i];
        } else {
            let fact = dd[i].clone() / &dl[i];
            dd[i] = dl[i].clone();
            dl[i] = fact.clone();
            let temp = du[i].clone();
            du[i] = dd[i + 1].clone();
            dd[i + 1] = temp - fact.clone() * &dd[i + 1];
            if i + 2 < n {
                du2[i] = du[i + 1].clone();
                du[i + 1] = -(fact * &du[i + 1]);
            }
            swapped[i] = true;
        }
    }
    if dd[n - 1].is_zero() {
        dd[n - 1] = tiny.clone();
    }
    for x in dd.iter_mut() {
        if x.abs() < tiny {
            *x = if x.is_negative() { -tiny.clone() } else { tiny.clone() };
        }
    }
    let solve = |b: &mut Vec<R>| {
        for i in 0..n - 1 {
            if !swapped[i] {
                b[i + 1] = b[i + 1].clone() - dl[i].clone() * &b[i];
            } else {
                let temp = b[i].clone();
                b[i] = b[i + 1].clone();
                b[i + 1] = temp - dl[i].clone() * &b[i];
            }
        }
        b[n - 1] = b[n - 1].clone() / &dd[n - 1];
        b[n - 2] = (b[n - 2].clone() - du[n - 2].clone() * &b[n - 1]) / &dd[n - 2];
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i].clone() - du[i].clone() * &b[i + 1] - du2[i].clone() * &b[i + 2]) / &dd[i];
        }
    };
    let mut b: Vec<R> = (0..n)
        .map(|i| R::from_f64(1.0 + 0.5 * ((i * 7 + seed * 13) as f64 * 0.618).sin()))
        .collect();
    for _ in 0..3 {
        solve(&mut b);
        let mut s = R::zero();
        for x in &b {
            s += x.sqr();
        }
        let s = s.sqrt();
        if s.is_zero() || !s.is_finite() {
            break;
        }
        for x in b.iter_mut() {
            *x = x.clone() / &s;
        }
    }
    b
}

/// Solve `A x = b` (row-major `n x n`) by partial-pivoting elimination.
pub fn solve<S: Scalar>(mut a: Vec<S>, mut b: Vec<S>, n: usize) -> Result<Vec<S>, LinalgError> {
    if a.len() != n * n || b.len() != n {
        return Err(LinalgError::Shape);
    }
    for k in 0..n {
        let mut piv = k;
        let mut best = a[k * n + k].modulus();
        for i in k + 1..n {
            let v = a[i * n + k].modulus();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best.is_zero() {
            return Err(LinalgError::Singular);
        }
        if piv != k {
            for j in 0..n {
                a.swap(k * n + j, piv * n + j);
            }
            b.swap(k, piv);
        }
        let pivot = a[k * n + k].clone();
        for i in k + 1..n {
            let f = a[i * n + k].clone() / &pivot;
            if f.is_zero() {
                continue;
            }
            for j in k..n {
                a[i * n + j] = a[i * n + j].clone() - f.clone() * &a[k * n + j];
            }
            b[i] = b[i].clone() - f * &b[k];
        }
    }
    let mut x = vec![S::zero(); n];
    for i in (0..n).rev() {
        let mut acc = b[i].clone();
        for j in i + 1..n {
            acc = acc - a[i * n + j].clone() * &x[j];
        }
        x[i] = acc / &a[i * n + i];
    }
    Ok(x)
}

/// A null vector of the `rows x cols` matrix (`rows < cols` typical),
/// computed by complete-pivoting elimination. Returns the vector and the
/// numerical rank found.
pub fn null_vector<S: Scalar>(mut a: Vec<S>, rows: usize, cols: usize) -> Result<(Vec<S>, usize), LinalgError> {
    if a.len() != rows * cols || cols == 0 {
        return Err(LinalgError::Shape);
    }
    let mut scale = S::Re::zero();
    for x in &a {
        scale = scale.max_of(x.modulus());
    }
    let tol = S::Re::epsilon() * &scale * &S::Re::from_usize(rows.max(cols) * 8);
    let mut colperm: Vec<usize> = (0..cols).collect();
    let mut rank = 0;
    for k in 0..rows.min(cols) {
        let mut bi = k;
        let mut bj = k;
        let mut best = S::Re::zero();
        for i in k..rows {
            for j in k..cols {
                let v = a[i * cols + j].modulus();
                if v > best {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        }
        if best <= tol {
            break;
        }
        if bi != k {
            for j in 0..cols {
                a.swap(k * cols + j, bi * cols + j);
            }
        }
        if bj != k {
            for i in 0..rows {
                a.swap(i * cols + k, i * cols + bj);
            }
            colperm.swap(k, bj);
        }
        let pivot = a[k * cols + k].clone();
        for i in k + 1..rows {
            let f = a[i * cols + k].clone() / &pivot;
            if f.is_zero() {
                continue;
            }
            for j in k..cols {
                a[i * cols + j] = a[i * cols + j].clone() - f.clone() * &a[k * cols + j];
            }
        }
        rank += 1;
    }
    // free variable: first non-pivot column set to one; a full-rank system
    // drops its smallest pivot
    let full = rank;
    let rank = rank.min(cols - 1);
    let mut y = vec![S::zero(); cols];
    y[rank] = S::one();
    for i in (0..rank).rev() {
        let mut acc = S::zero();
        for j in i + 1..cols {
            acc = acc + a[i * cols + j].clone() * &y[j];
        }
        y[i] = -(acc / &a[i * cols + i]);
    }
    let mut x = vec![S::zero(); cols];
    for (k, &c) in colperm.iter().enumerate() {
        x[c] = y[k].clone();
    }
    Ok((x, full))
}

/// Row-major matrix-vector product.
pub fn matvec<S: Scalar>(a: &[S], x: &[S], rows: usize, cols: usize) -> Vec<S> {
    (0..rows)
        .map(|i| {
            let mut acc = S::zero();
            for j in 0..cols {
                acc = acc + a[i * cols + j].clone() * &x[j];
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::C64;

    fn herm(n: usize) -> Vec<C64> {
        let mut a = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = if i == j {
                    C64::new((i as f64).cos() * 2.0, 0.0)
                } else {
                    C64::new(((i * 3 + j) as f64).sin(), ((i + 2 * j) as f64).cos() * 0.5)
                };
                a[i * n + j] = v;
                a[j * n + i] = v.conj();
            }
        }
        a
    }

    #[test]
    fn hermitian_eigenpairs_satisfy_definition() {
        let n = 9;
        let a = herm(n);
        let eig = HermitianEigen::new(a.clone(), n).unwrap();
        let vals = eig.values().to_vec();
        for w in vals.windows(2) {
            assert!(w[0] <= w[1]);
        }
        let mut prev: Vec<Vec<C64>> = Vec::new();
        for (idx, lam) in vals.iter().enumerate() {
            let v = eig.vector(idx, &[]);
            let av = matvec(&a, &v, n, n);
            let res: f64 = av.iter().zip(&v).map(|(x, y)| (x - y * lam).norm()).fold(0.0, f64::max);
            assert!(res < 1e-12, "residual {res}");
            for q in &prev {
                let d: C64 = q.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                assert!(d.norm() < 1e-10);
            }
            prev.push(v);
        }
        let tr: f64 = (0..n).map(|i| a[i * n + i].re).sum();
        let s: f64 = vals.iter().sum();
        assert!((tr - s).abs() < 1e-12);
    }

    #[test]
    fn real_symmetric_path() {
        let n = 6;
        let mut a = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = 1.0 / (i + j + 1) as f64;
            }
        }
        let eig = HermitianEigen::new(a.clone(), n).unwrap();
        let top = eig.vector(n - 1, &[]);
        let av = matvec(&a, &top, n, n);
        let lam = eig.values()[n - 1];
        assert!((lam - 1.618_899_858_924_339).abs() < 1e-12);
        for (x, y) in av.iter().zip(&top) {
            assert!((x - lam * y).abs() < 1e-13);
        }
    }

    #[test]
    fn elimination_kernels() {
        let a = vec![2.0, 1.0, 1.0, 3.0];
        let x = solve(a, vec![3.0, 5.0], 2).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
        let m = vec![1.0, 2.0, 3.0, 2.0, 4.0, 7.0];
        let (v, rank) = null_vector(m.clone(), 2, 3).unwrap();
        assert_eq!(rank, 2);
        let r = matvec(&m, &v, 2, 3);
        assert!(r.iter().all(|t| t.abs() < 1e-14));
        assert!(v.iter().any(|t| t.abs() > 0.1));
    }
}
