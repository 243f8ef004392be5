//! Separation-of-variables series for a penetrable disk with constant contrast.

use std::f64::consts::PI;

use invisiscat::specfun::{bessel_j, bessel_j_prime, hankel1, hankel1_prime, Order};
use num_complex::Complex64 as C;

/// Outgoing coefficient of angular mode `m` for a disk of radius `a` and
/// contrast `v0` under a unit plane wave.
pub fn coefficient(m: i32, k: f64, a: f64, v0: f64) -> C {
    let k1 = k * (1.0 + v0).sqrt();
    let o = Order::Integer(m.unsigned_abs());
    let (j, jp) = (bessel_j(o, k * a), bessel_j_prime(o, k * a));
    let (j1, j1p) = (bessel_j(o, k1 * a), bessel_j_prime(o, k1 * a));
    let (h, hp) = (hankel1(o, k * a).unwrap(), hankel1_prime(o, k * a).unwrap());
    // the (-1)^m of negative orders cancels between numerator and denominator
    let num = C::new(k * jp * j1 - k1 * j * j1p, 0.0);
    let den = h * (k1 * j1p) - hp * (k * j1);
    C::new(0.0, 1.0).powi(m) * num / den
}

/// Far field at angle `phi` for incidence at angle `theta`.
pub fn far_field(k: f64, a: f64, v0: f64, theta: f64, phi: f64) -> C {
    let modes = (k * a * (1.0 + v0).sqrt()).ceil() as i32 + 30;
    let pref = (2.0 / (PI * k)).sqrt() * C::from_polar(1.0, -PI / 4.0);
    let s: C = (-modes..=modes)
        .map(|m| coefficient(m, k, a, v0) * C::new(0.0, -1.0).powi(m) * C::from_polar(1.0, m as f64 * (phi - theta)))
        .sum();
    pref * s
}

/// Scattered field at radius `r > a`.
pub fn scattered(k: f64, a: f64, v0: f64, theta: f64, r: f64, phi: f64) -> C {
    let modes = (k * a * (1.0 + v0).sqrt()).ceil() as i32 + 30;
    (-modes..=modes)
        .map(|m| {
            let hm = hankel1(Order::Integer(m.unsigned_abs()), k * r).unwrap() * if m < 0 && m % 2 != 0 { -1.0 } else { 1.0 };
            coefficient(m, k, a, v0) * hm * C::from_polar(1.0, m as f64 * (phi - theta))
        })
        .sum()
}
