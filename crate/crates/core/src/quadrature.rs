//! Brute-force reference integration.
//!
//! Multidimensional integrals are computed as nested one-dimensional
//! adaptive Gauss–Kronrod (7/15) integrals over a parameterisation of the
//! region. All nesting levels draw from one evaluation budget. Square-root
//! edge behaviour of paraboloid cross sections is removed by the
//! substitution `x_n = s^2`.

use std::cell::Cell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::point::Point;

pub const DEFAULT_BUDGET: usize = 10_000_000;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    (x.iter().map(|t| c + h * t).collect(), w.iter().map(|v| v * h).collect())
}

struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    abs_value: f64,
}

/// Shared work counter for nested adaptive integration.
pub struct Budget {
    used: Cell<usize>,
    limit: usize,
}

impl Budget {
    pub fn new(limit: usize) -> Budget {
        Budget { used: Cell::new(0), limit }
    }

    pub fn used(&self) -> usize {
        self.used.get()
    }

    fn charge(&self, evals: usize, error_estimate: f64) -> Result<()> {
        let used = self.used.get() + evals;
        self.used.set(used);
        if used > self.limit {
            return Err(Error::BudgetExceeded { budget: self.limit, error_estimate });
        }
        Ok(())
    }
}

fn kronrod_segment(f: &mut dyn FnMut(f64) -> Result<Complex64>, a: f64, b: f64) -> Result<Segment> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut fv = [Complex64::new(0.0, 0.0); 15];
    for (i, x) in XGK.iter().enumerate() {
        if i == 7 {
            fv[7] = f(c)?;
        } else {
            fv[i] = f(c - h * x)?;
            fv[14 - i] = f(c + h * x)?;
        }
    }
    let mut kron = fv[7] * WGK[7];
    let mut gauss = fv[7] * WG[3];
    let mut abs_k = fv[7].norm() * WGK[7];
    for i in 0..7 {
        let pair = fv[i] + fv[14 - i];
        kron += pair * WGK[i];
        abs_k += (fv[i].norm() + fv[14 - i].norm()) * WGK[i];
        if i % 2 == 1 {
            gauss += pair * WG[i / 2];
        }
    }
    let mean = kron * 0.5;
    let mut asc = (fv[7] - mean).norm() * WGK[7];
    for i in 0..7 {
        asc += ((fv[i] - mean).norm() + (fv[14 - i] - mean).norm()) * WGK[i];
    }
    let h_abs = h.abs();
    let value = kron * h;
    let abs_value = abs_k * h_abs;
    let asc = asc * h_abs;
    let mut error = ((kron - gauss) * h).norm();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    if abs_value > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs_value);
    }
    Ok(Segment { a, b, value, error, abs_value })
}

/// Globally adaptive 1D integration on `[a, b]` with relative tolerance `tol`.
///
/// The absolute floor is tied to `∫|f|` so integrals that cancel to zero still terminate.
pub fn adaptive_1d(
    f: &mut dyn FnMut(f64) -> Result<Complex64>,
    a: f64,
    b: f64,
    tol: f64,
    budget: &Budget,
) -> Result<Complex64> {
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let initial = 2;
    let mut segs = Vec::with_capacity(64);
    for i in 0..initial {
        let lo = a + (b - a) * i as f64 / initial as f64;
        let hi = a + (b - a) * (i + 1) as f64 / initial as f64;
        segs.push(kronrod_segment(f, lo, hi)?);
        budget.charge(15, f64::INFINITY)?;
    }
    loop {
        let total: Complex64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.error).sum();
        let abs_total: f64 = segs.iter().map(|s| s.abs_value).sum();
        if err <= (tol * total.norm()).max(100.0 * f64::EPSILON * abs_total) {
            break;
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("nonempty");
        let s = segs.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if (s.b - s.a).abs() < 1e-13 * (s.a.abs() + s.b.abs()).max(1e-300) {
            // Unresolvable at this width; keep it and stop refining.
            segs.push(Segment { error: 0.0, ..s });
            continue;
        }
        let left = kronrod_segment(f, s.a, mid)?;
        let right = kronrod_segment(f, mid, s.b)?;
        budget.charge(30, err)?;
        segs.push(left);
        segs.push(right);
    }
    // fixed summation order keeps results reproducible
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    Ok(segs.iter().map(|s| s.value).sum())
}

/// One-dimensional convenience wrapper with its own budget.
pub fn integrate_1d(f: impl Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Result<Complex64> {
    let budget = Budget::new(DEFAULT_BUDGET);
    adaptive_1d(&mut |t| Ok(f(t)), a, b, tol, &budget)
}

/// Upper end of a paraboloid region in the normal direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Top {
    At(f64),
    /// Unbounded; the integrand must decay at least like `exp(-decay_rate * x_n)`.
    Unbounded { decay_rate: f64 },
}

pub type GraphFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum RegionKind {
    Ball { center: Point, radius: f64 },
    Box { lo: Point, hi: Point },
    /// `{ K|x'|^2 < x_n < top, x_n > floor }`
    ParaboloidCap { curvature: f64, floor: f64, top: Top },
    /// `{ K_-|x'|^2 < x_n < h } \ { K_+|x'|^2 < x_n < h }`
    AnnularParaboloid { k_minus: f64, k_plus: f64, height: f64 },
    /// `{ |x'| < b, omega(x') < x_n < h }`
    GraphCap { omega: GraphFn, radius: f64, height: f64 },
}

#[derive(Clone)]
pub struct Region {
    pub dim: usize,
    pub kind: RegionKind,
}

impl Region {
    pub fn new(dim: usize, kind: RegionKind) -> Result<Region> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::Domain(format!("dimension {dim} unsupported")));
        }
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain(format!("{what} must be positive, got {v}")))
            }
        };
        match &kind {
            RegionKind::Ball { radius, .. } => positive(*radius, "radius")?,
            RegionKind::Box { lo, hi } => {
                for i in 0..dim {
                    positive(hi[i] - lo[i], "box side")?;
                }
            }
            RegionKind::ParaboloidCap { curvature, floor, top } => {
                positive(*curvature, "curvature")?;
                if *floor < 0.0 {
                    return Err(Error::Domain("floor must be nonnegative".into()));
                }
                match top {
                    Top::At(t) => positive(*t - *floor, "cap height")?,
                    Top::Unbounded { decay_rate } => positive(*decay_rate, "decay rate")?,
                }
            }
            RegionKind::AnnularParaboloid { k_minus, k_plus, height } => {
                positive(*k_minus, "K_-")?;
                positive(*height, "height")?;
                if k_plus < k_minus {
                    return Err(Error::Domain("K_- must not exceed K_+".into()));
                }
            }
            RegionKind::GraphCap { radius, height, .. } => {
                positive(*radius, "radius")?;
                positive(*height, "height")?;
            }
        }
        Ok(Region { dim, kind })
    }

    pub fn ball(dim: usize, center: Point, radius: f64) -> Result<Region> {
        Region::new(dim, RegionKind::Ball { center, radius })
    }

    pub fn boxed(dim: usize, lo: Point, hi: Point) -> Result<Region> {
        Region::new(dim, RegionKind::Box { lo, hi })
    }

    pub fn paraboloid_cap(dim: usize, curvature: f64, floor: f64, top: Top) -> Result<Region> {
        Region::new(dim, RegionKind::ParaboloidCap { curvature, floor, top })
    }

    pub fn annular_paraboloid(dim: usize, k_minus: f64, k_plus: f64, height: f64) -> Result<Region> {
        Region::new(dim, RegionKind::AnnularParaboloid { k_minus, k_plus, height })
    }

    pub fn graph_cap(dim: usize, omega: GraphFn, radius: f64, height: f64) -> Result<Region> {
        Region::new(dim, RegionKind::GraphCap { omega, radius, height })
    }
}

type Integrand<'a> = &'a (dyn Fn(&Point) -> Complex64 + Sync);

/// Integrates `f` over `region` to relative tolerance `tol` with the default budget.
pub fn integrate(f: Integrand<'_>, region: &Region, tol: f64) -> Result<Complex64> {
    integrate_with_budget(f, region, tol, DEFAULT_BUDGET)
}

pub fn integrate_with_budget(f: Integrand<'_>, region: &Region, tol: f64, limit: usize) -> Result<Complex64> {
    let budget = Budget::new(limit);
    let n = region.dim;
    match &region.kind {
        RegionKind::Ball { center, radius } => ball(f, n, center, *radius, tol, &budget),
        RegionKind::Box { lo, hi } => boxed(f, n, lo, hi, tol, &budget),
        RegionKind::ParaboloidCap { curvature, floor, top } => match top {
            Top::At(t) => paraboloid_slab(f, n, *curvature, *floor, *t, tol, &budget),
            Top::Unbounded { decay_rate } => {
                let mut sum = Complex64::new(0.0, 0.0);
                let panel = 4.0 / decay_rate;
                let mut lo = *floor;
                let mut quiet = 0;
                for i in 0..2000 {
                    // the first panel also covers the region where an oscillating
                    // integrand has not yet started to decay
                    let hi = if i == 0 { lo + panel + 0.25 / curvature } else { lo + panel };
                    let part = paraboloid_slab(f, n, *curvature, lo, hi, tol, &budget)?;
                    sum += part;
                    lo = hi;
                    if part.norm() <= 1e-3 * tol * sum.norm() {
                        quiet += 1;
                        if quiet >= 2 {
                            return Ok(sum);
                        }
                    } else {
                        quiet = 0;
                    }
                }
                Err(Error::QuadratureFailure("unbounded region did not decay".into()))
            }
        },
        RegionKind::AnnularParaboloid { k_minus, k_plus, height } => {
            annular(f, n, *k_minus, *k_plus, *height, tol, &budget)
        }
        RegionKind::GraphCap { omega, radius, height } => graph_cap(f, n, omega, *radius, *height, tol, &budget),
    }
}

fn ball(f: Integrand<'_>, n: usize, c: &Point, r: f64, tol: f64, budget: &Budget) -> Result<Complex64> {
    if n == 2 {
        adaptive_1d(
            &mut |rho| {
                adaptive_1d(
                    &mut |th| Ok(f(&[c[0] + rho * th.cos(), c[1] + rho * th.sin(), 0.0]) * rho),
                    0.0,
                    2.0 * PI,
                    tol,
                    budget,
                )
            },
            0.0,
            r,
            tol,
            budget,
        )
    } else {
        adaptive_1d(
            &mut |rho| {
                adaptive_1d(
                    &mut |u| {
                        let s = (1.0 - u * u).max(0.0).sqrt();
                        adaptive_1d(
                            &mut |ph| {
                                Ok(f(&[c[0] + rho * s * ph.cos(), c[1] + rho * s * ph.sin(), c[2] + rho * u])
                                    * (rho * rho))
                            },
                            0.0,
                            2.0 * PI,
                            tol,
                            budget,
                        )
                    },
                    -1.0,
                    1.0,
                    tol,
                    budget,
                )
            },
            0.0,
            r,
            tol,
            budget,
        )
    }
}

fn boxed(f: Integrand<'_>, n: usize, lo: &Point, hi: &Point, tol: f64, budget: &Budget) -> Result<Complex64> {
    if n == 2 {
        adaptive_1d(
            &mut |y| adaptive_1d(&mut |x| Ok(f(&[x, y, 0.0])), lo[0], hi[0], tol, budget),
            lo[1],
            hi[1],
            tol,
            budget,
        )
    } else {
        adaptive_1d(
            &mut |z| {
                adaptive_1d(
                    &mut |y| adaptive_1d(&mut |x| Ok(f(&[x, y, z])), lo[0], hi[0], tol, budget),
                    lo[1],
                    hi[1],
                    tol,
                    budget,
                )
            },
            lo[2],
            hi[2],
            tol,
            budget,
        )
    }
}

/// Integral over the tangential ball `|x'| < a` (n = 2: interval) at height `xn`.
fn tangential_disc(
    f: Integrand<'_>,
    n: usize,
    a_in: f64,
    a_out: f64,
    xn: f64,
    tol: f64,
    budget: &Budget,
) -> Result<Complex64> {
    if n == 2 {
        let right = adaptive_1d(&mut |x| Ok(f(&[x, xn, 0.0])), a_in, a_out, tol, budget)?;
        let left = adaptive_1d(&mut |x| Ok(f(&[x, xn, 0.0])), -a_out, -a_in, tol, budget)?;
        Ok(left + right)
    } else {
        adaptive_1d(
            &mut |rho| {
                adaptive_1d(
                    &mut |th| Ok(f(&[rho * th.cos(), rho * th.sin(), xn]) * rho),
                    0.0,
                    2.0 * PI,
                    tol,
                    budget,
                )
            },
            a_in,
            a_out,
            tol,
            budget,
        )
    }
}

fn paraboloid_slab(
    f: Integrand<'_>,
    n: usize,
    k: f64,
    lo: f64,
    hi: f64,
    tol: f64,
    budget: &Budget,
) -> Result<Complex64> {
    adaptive_1d(
        &mut |s| {
            let xn = s * s;
            let a = s / k.sqrt();
            Ok(tangential_disc(f, n, 0.0, a, xn, tol, budget)? * (2.0 * s))
        },
        lo.sqrt(),
        hi.sqrt(),
        tol,
        budget,
    )
}

fn annular(f: Integrand<'_>, n: usize, km: f64, kp: f64, h: f64, tol: f64, budget: &Budget) -> Result<Complex64> {
    if km == kp {
        return Ok(Complex64::new(0.0, 0.0));
    }
    adaptive_1d(
        &mut |s| {
            let xn = s * s;
            Ok(tangential_disc(f, n, s / kp.sqrt(), s / km.sqrt(), xn, tol, budget)? * (2.0 * s))
        },
        0.0,
        h.sqrt(),
        tol,
        budget,
    )
}

fn graph_cap(
    f: Integrand<'_>,
    n: usize,
    omega: &GraphFn,
    b: f64,
    h: f64,
    tol: f64,
    budget: &Budget,
) -> Result<Complex64> {
    let column = |xp: [f64; 2], budget: &Budget| -> Result<Complex64> {
        let xs = &xp[..n - 1];
        let w = omega(xs);
        if w >= h {
            return Ok(Complex64::new(0.0, 0.0));
        }
        adaptive_1d(
            &mut |xn| {
                let mut p = [0.0; 3];
                p[..n - 1].copy_from_slice(xs);
                p[n - 1] = xn;
                Ok(f(&p))
            },
            w,
            h,
            tol,
            budget,
        )
    };
    if n == 2 {
        adaptive_1d(&mut |x| column([x, 0.0], budget), -b, b, tol, budget)
    } else {
        adaptive_1d(
            &mut |rho| {
                adaptive_1d(
                    &mut |th| Ok(column([rho * th.cos(), rho * th.sin()], budget)? * rho),
                    0.0,
                    2.0 * PI,
                    tol,
                    budget,
                )
            },
            0.0,
            b,
            tol,
            budget,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one(_: &Point) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn kronrod_tables_are_consistent() {
        let sum_k: f64 = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        let sum_g: f64 = 2.0 * WG[..3].iter().sum::<f64>() + WG[3];
        assert!((sum_k - 2.0).abs() < 1e-15);
        assert!((sum_g - 2.0).abs() < 1e-15);
        // K15 is exact through degree 22, G7 through degree 13
        for deg in (0..=22).step_by(2) {
            let exact = 2.0 / (deg as f64 + 1.0);
            let k: f64 = 2.0 * (0..7).map(|i| WGK[i] * XGK[i].powi(deg)).sum::<f64>()
                + if deg == 0 { WGK[7] } else { 0.0 };
            assert!((k - exact).abs() < 1e-14, "degree {deg}");
            if deg <= 13 {
                let g: f64 = 2.0 * (0..3).map(|i| WG[i] * XGK[2 * i + 1].powi(deg)).sum::<f64>()
                    + if deg == 0 { WG[3] } else { 0.0 };
                assert!((g - exact).abs() < 1e-14, "gauss degree {deg}");
            }
        }
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in [1, 2, 5, 16, 40] {
            let (x, w) = gauss_legendre(n);
            for deg in 0..2 * n {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn disc_area() {
        let r = Region::ball(2, [0.0; 3], 1.0).unwrap();
        let v = integrate(&one, &r, 1e-10).unwrap();
        assert!((v.re - PI).abs() < 1e-10 * PI);
    }

    #[test]
    fn ball_volume_3d() {
        let r = Region::ball(3, [0.3, -0.2, 1.0], 2.0).unwrap();
        let v = integrate(&one, &r, 1e-10).unwrap();
        let exact = 4.0 / 3.0 * PI * 8.0;
        assert!((v.re - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn annular_paraboloid_area() {
        let r = Region::annular_paraboloid(2, 1.0, 2.0, 1.0).unwrap();
        let v = integrate(&one, &r, 1e-11).unwrap();
        let exact = 4.0 / 3.0 * (1.0 - 1.0 / 2f64.sqrt());
        assert!((v.re - exact).abs() < 1e-10);
    }

    #[test]
    fn unbounded_paraboloid_cgo_integral() {
        // e^{ρ·x} with ρ = i e_1 - e_2
        let f = |x: &Point| Complex64::new(-x[1], x[0]).exp();
        let r = Region::paraboloid_cap(2, 1.0, 0.0, Top::Unbounded { decay_rate: 1.0 }).unwrap();
        let v = integrate(&f, &r, 1e-10).unwrap();
        let exact = PI.sqrt() * (-0.25f64).exp();
        assert!((v - exact).norm() < 1e-9 * exact, "{v} vs {exact}");
    }

    #[test]
    fn box_and_graph_cap_volumes() {
        let b = Region::boxed(3, [0.0, 0.0, 0.0], [1.0, 2.0, 3.0]).unwrap();
        let v = integrate(&|x: &Point| Complex64::new(x[0] * x[1] * x[2], 0.0), &b, 1e-12).unwrap();
        assert!((v.re - 0.5 * 2.0 * 4.5).abs() < 1e-11);
        // graph cap of a paraboloid equals the truncated paraboloid
        let k = 3.0;
        let h = 0.5;
        let omega: GraphFn = Arc::new(move |xp: &[f64]| k * xp.iter().map(|v| v * v).sum::<f64>());
        for n in [2, 3] {
            let g = Region::graph_cap(n, omega.clone(), 1.0, h).unwrap();
            let p = Region::paraboloid_cap(n, k, 0.0, Top::At(h)).unwrap();
            let a = integrate(&one, &g, 1e-10).unwrap();
            let c = integrate(&one, &p, 1e-10).unwrap();
            assert!((a - c).norm() < 1e-8 * c.norm(), "n={n}: {a} vs {c}");
        }
    }

    #[test]
    fn budget_is_enforced() {
        let f = |x: &Point| Complex64::new((1e4 * x[0]).sin().abs().sqrt(), 0.0);
        let r = Region::boxed(2, [0.0; 3], [1.0, 1.0, 0.0]).unwrap();
        let e = integrate_with_budget(&f, &r, 1e-14, 5_000).unwrap_err();
        assert!(matches!(e, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn region_validation() {
        assert!(Region::ball(2, [0.0; 3], -1.0).is_err());
        assert!(Region::annular_paraboloid(2, 2.0, 1.0, 1.0).is_err());
        assert!(Region::ball(4, [0.0; 3], 1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn linearity(a in -2.0f64..2.0, b in -2.0f64..2.0, c in 0.1f64..3.0) {
            let tol = 1e-10;
            let r = Region::ball(2, [0.1, 0.2, 0.0], 0.7).unwrap();
            let f = |x: &Point| Complex64::new(0.0, c * x[0]).exp();
            let g = |x: &Point| Complex64::new(x[1] * x[1], x[0]);
            let comb = |x: &Point| f(x) * a + g(x) * b;
            let lhs = integrate(&comb, &r, tol).unwrap();
            let rhs = integrate(&f, &r, tol).unwrap() * a + integrate(&g, &r, tol).unwrap() * b;
            prop_assert!((lhs - rhs).norm() <= 3.0 * tol * (1.0 + lhs.norm()));
        }

        #[test]
        fn region_additivity(tau in 0.5f64..10.0, k in 0.5f64..10.0, h in 0.05f64..2.0) {
            let tol = 1e-10;
            let f = move |x: &Point| Complex64::new(-tau * x[1], tau * x[0]).exp();
            let decay = Top::Unbounded { decay_rate: tau };
            let whole = integrate(&f, &Region::paraboloid_cap(2, k, 0.0, decay).unwrap(), tol).unwrap();
            let near = integrate(&f, &Region::paraboloid_cap(2, k, 0.0, Top::At(h)).unwrap(), tol).unwrap();
            let far = integrate(&f, &Region::paraboloid_cap(2, k, h, decay).unwrap(), tol).unwrap();
            let scale: f64 = 1.0 + whole.norm();
            prop_assert!((whole - near - far).norm() <= 3.0 * tol * scale);
        }
    }
}
