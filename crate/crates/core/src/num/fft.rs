//! Radix-2 FFT over a generic [`Real`].

use super::{cx, Real, C};

/// Twiddle factors `exp(-2 pi i k / n)`, `k < n/2`.
pub struct Plan<R: Real> {
    n: usize,
    twiddles: Vec<C<R>>,
}

impl<R: Real> Plan<R> {
    /// `n` must be a power of two.
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two(), "fft length must be a power of two");
        let twiddles = unit_roots::<R>(n).into_iter().take(n / 2).map(|w| w.conj()).collect();
        Plan { n, twiddles }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place forward transform `X_k = sum_j x_j e^{-2 pi i jk/n}`.
    pub fn forward(&self, a: &mut [C<R>]) {
        self.run(a, false);
    }

    /// In-place unnormalized inverse transform `x_j = sum_k X_k e^{+2 pi i jk/n}`.
    pub fn inverse(&self, a: &mut [C<R>]) {
        self.run(a, true);
    }

    fn run(&self, a: &mut [C<R>], inverse: bool) {
        let n = self.n;
        assert_eq!(a.len(), n);
        if n <= 1 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                a.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..len / 2 {
                    let w = &self.twiddles[k * stride];
                    let w = if inverse { w.conj() } else { w.clone() };
                    let u = a[start + k].clone();
                    let v = a[start + k + len / 2].clone() * w;
                    a[start + k] = u.clone() + v.clone();
                    a[start + k + len / 2] = u - v;
                }
            }
            len <<= 1;
        }
    }
}

/// Unit roots `exp(2 pi i j / n)` for `j < n`.
pub fn unit_roots<R: Real>(n: usize) -> Vec<C<R>> {
    if n == 0 {
        return Vec::new();
    }
    let step = R::from_f64(2.0) * &R::pi() / &R::from_usize(n);
    let b = ((n as f64).sqrt().ceil() as usize).max(1);
    let lo: Vec<C<R>> = (0..b).map(|j| cx::cis(&(step.clone() * &R::from_usize(j)))).collect();
    let hi: Vec<C<R>> = (0..n.div_ceil(b)).map(|j| cx::cis(&(step.clone() * &R::from_usize(j * b)))).collect();
    (0..n).map(|j| hi[j / b].clone() * lo[j % b].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{Mp, C64};

    fn naive(x: &[C64]) -> Vec<C64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, v)| v * C64::from_polar(1.0, -2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_direct_dft() {
        for &n in &[1usize, 2, 4, 8, 32] {
            let x: Vec<C64> = (0..n).map(|j| C64::new((j as f64 * 0.7).sin(), (j as f64).cos())).collect();
            let mut y = x.clone();
            Plan::<f64>::new(n).forward(&mut y);
            let z = naive(&x);
            for (a, b) in y.iter().zip(&z) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn tabulated_roots_are_accurate() {
        let n = 1000;
        let w = unit_roots::<Mp>(n);
        for j in [0usize, 1, 333, 999] {
            let t = Mp::from_f64(2.0) * &Mp::pi() * &Mp::from_usize(j) / &Mp::from_usize(n);
            let d = cx::abs(&(w[j].clone() - cx::cis(&t)));
            assert!(d < Mp::from_f64(1e-150));
        }
    }

    #[test]
    fn extended_inverse_round_trip() {
        let n = 16;
        let x: Vec<C<Mp>> = (0..n)
            .map(|j| C::new(Mp::from_f64(j as f64), Mp::from_f64(1.0 / (j as f64 + 1.0))))
            .collect();
        let plan = Plan::<Mp>::new(n);
        let mut y = x.clone();
        plan.forward(&mut y);
        plan.inverse(&mut y);
        let nn = Mp::from_usize(n);
        for (a, b) in y.iter().zip(&x) {
            let d = cx::abs(&(C::new(a.re.clone() / &nn, a.im.clone() / &nn) - b.clone()));
            assert!(d < Mp::from_f64(1e-140));
        }
    }
}
