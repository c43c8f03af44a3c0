#![allow(dead_code)]

use aaklab::num::C64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        let (x, y) = ((a + b) / 2.0, (a * b).sqrt());
        a = x;
        b = y;
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
    }
    a
}

/// Green capacity of `[-r, r]` in the unit disk from the modulus of the
/// annulus it bounds with the circle.
pub fn segment_capacity(r: f64) -> f64 {
    let k = r * r;
    let kp = (1.0 - k * k).sqrt();
    let modulus = std::f64::consts::PI / 4.0 * agm(1.0, kp) / agm(1.0, k);
    1.0 / modulus
}
