//! Forward-mode differentiation carrying value, gradient and the diagonal of the
//! Hessian. Enough to evaluate exact Laplacians of manufactured fields.

use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use crate::point::Point;

type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: C,
    pub d: [C; 3],
    /// Pure second derivatives `∂²/∂x_i²`.
    pub dd: [C; 3],
}

impl Jet {
    pub fn constant(c: impl Into<C>) -> Jet {
        Jet { v: c.into(), d: [ZERO; 3], dd: [ZERO; 3] }
    }

    /// Coordinate functions `x_1, x_2, x_3` seeded at `x`.
    pub fn variables(x: &Point) -> [Jet; 3] {
        let mut out = [Jet::constant(0.0); 3];
        for (i, j) in out.iter_mut().enumerate() {
            j.v = C::new(x[i], 0.0);
            j.d[i] = C::new(1.0, 0.0);
        }
        out
    }

    /// Applies a scalar function given its value and first two derivatives at `self.v`.
    fn chain(self, f0: C, f1: C, f2: C) -> Jet {
        let mut out = Jet::constant(f0);
        for i in 0..3 {
            out.d[i] = f1 * self.d[i];
            out.dd[i] = f2 * self.d[i] * self.d[i] + f1 * self.dd[i];
        }
        out
    }

    pub fn exp(self) -> Jet {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn sin(self) -> Jet {
        let (s, c) = (self.v.sin(), self.v.cos());
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Jet {
        let (s, c) = (self.v.sin(), self.v.cos());
        self.chain(c, -s, -c)
    }

    pub fn sqrt(self) -> Jet {
        let r = self.v.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * self.v))
    }

    pub fn powi(self, k: i32) -> Jet {
        match k {
            0 => Jet::constant(1.0),
            1 => self,
            _ => {
                let kf = k as f64;
                let p2 = self.v.powi(k - 2);
                let p1 = p2 * self.v;
                self.chain(p1 * self.v, p1 * kf, p2 * (kf * (kf - 1.0)))
            }
        }
    }

    pub fn powf(self, a: f64) -> Jet {
        let p = self.v.powf(a);
        self.chain(p, p * a / self.v, p * (a * (a - 1.0)) / (self.v * self.v))
    }

    pub fn recip(self) -> Jet {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    pub fn laplacian(&self, n: usize) -> C {
        self.dd[..n].iter().sum()
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut out = self;
        out.v += o.v;
        for i in 0..3 {
            out.d[i] += o.d[i];
            out.dd[i] += o.dd[i];
        }
        out
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self * -1.0
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut out = Jet::constant(self.v * o.v);
        for i in 0..3 {
            out.d[i] = self.d[i] * o.v + self.v * o.d[i];
            out.dd[i] = self.dd[i] * o.v + 2.0 * self.d[i] * o.d[i] + self.v * o.dd[i];
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

macro_rules! scalar_ops {
    ($t:ty) => {
        impl Mul<$t> for Jet {
            type Output = Jet;
            fn mul(self, s: $t) -> Jet {
                let s: C = s.into();
                Jet { v: self.v * s, d: self.d.map(|x| x * s), dd: self.dd.map(|x| x * s) }
            }
        }
        impl Mul<Jet> for $t {
            type Output = Jet;
            fn mul(self, j: Jet) -> Jet {
                j * self
            }
        }
        impl Add<$t> for Jet {
            type Output = Jet;
            fn add(self, s: $t) -> Jet {
                let s: C = s.into();
                Jet { v: self.v + s, ..self }
            }
        }
        impl Add<Jet> for $t {
            type Output = Jet;
            fn add(self, j: Jet) -> Jet {
                j + self
            }
        }
        impl Sub<$t> for Jet {
            type Output = Jet;
            fn sub(self, s: $t) -> Jet {
                let s: C = s.into();
                Jet { v: self.v - s, ..self }
            }
        }
        impl Sub<Jet> for $t {
            type Output = Jet;
            fn sub(self, j: Jet) -> Jet {
                -j + self
            }
        }
        impl Div<$t> for Jet {
            type Output = Jet;
            fn div(self, s: $t) -> Jet {
                let s: C = s.into();
                self * (1.0 / s)
            }
        }
    };
}

scalar_ops!(f64);
scalar_ops!(C);

pub type JetFn = Arc<dyn Fn(&[Jet; 3]) -> Jet + Send + Sync>;

/// A closed-form field whose derivatives are exact.
#[derive(Clone)]
pub struct Manufactured {
    pub dim: usize,
    f: JetFn,
}

impl std::fmt::Debug for Manufactured {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Manufactured(dim={})", self.dim)
    }
}

impl Manufactured {
    pub fn new(dim: usize, f: impl Fn(&[Jet; 3]) -> Jet + Send + Sync + 'static) -> Manufactured {
        Manufactured { dim, f: Arc::new(f) }
    }

    pub fn zero(dim: usize) -> Manufactured {
        Manufactured::new(dim, |_| Jet::constant(0.0))
    }

    /// `exp(ρ·x)`
    pub fn exponential(dim: usize, rho: [C; 3]) -> Manufactured {
        Manufactured::new(dim, move |x| {
            let mut s = Jet::constant(0.0);
            for i in 0..3 {
                s = s + x[i] * rho[i];
            }
            s.exp()
        })
    }

    pub fn jet(&self, x: &Point) -> Jet {
        (self.f)(&Jet::variables(x))
    }

    pub fn value(&self, x: &Point) -> C {
        self.jet(x).v
    }

    pub fn gradient(&self, x: &Point) -> [C; 3] {
        self.jet(x).d
    }

    pub fn laplacian(&self, x: &Point) -> C {
        self.jet(x).laplacian(self.dim)
    }

    /// `(Δ + k²) w` at `x`.
    pub fn helmholtz(&self, x: &Point, k: f64) -> C {
        let j = self.jet(x);
        j.laplacian(self.dim) + j.v * (k * k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_laplacian(f: impl Fn(&Point) -> C, x: &Point, n: usize) -> C {
        let h = 1e-4;
        let mut s = ZERO;
        for i in 0..n {
            let mut p = *x;
            let mut m = *x;
            p[i] += h;
            m[i] -= h;
            s += (f(&p) - 2.0 * f(x) + f(&m)) / (h * h);
        }
        s
    }

    #[test]
    fn laplacian_matches_finite_differences() {
        let w = Manufactured::new(3, |x| {
            let [a, b, c] = *x;
            (a * b).sin() * (c * 0.5).exp() + (a * a + b * 3.0).powi(3) / (c + 4.0) + (b * b + 1.0).sqrt()
        });
        let x = [0.3, -0.7, 0.4];
        let exact = w.laplacian(&x);
        let approx = fd_laplacian(|p| w.value(p), &x, 3);
        assert!((exact - approx).norm() < 1e-5 * (1.0 + exact.norm()), "{exact} vs {approx}");
    }

    #[test]
    fn harmonic_exponential() {
        let rho = [C::new(0.0, 2.0), C::new(-2.0, 0.0), ZERO];
        let u0 = Manufactured::exponential(2, rho);
        let x = [0.4, 0.9, 0.0];
        assert!(u0.laplacian(&x).norm() < 1e-12);
        let g = u0.gradient(&x);
        assert!((g[1] - rho[1] * u0.value(&x)).norm() < 1e-14);
    }
}
