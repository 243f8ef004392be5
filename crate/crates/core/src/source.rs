//! Source scattering: outgoing fields `(Δ + k²)⁻¹ f`, far-field patterns and
//! radiationless balls.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Domain, VolumeRule};
use crate::grid::{Grid, SampledFunction};
use crate::holder::{boundary_sup, holder_norm};
use crate::point::{self, Point};
use crate::quadrature::{adaptive_1d, Budget, DEFAULT_BUDGET};
use crate::specfun::{bessel_j_zero, hankel1, Order};

type C = Complex64;

pub type ScalarFn = Arc<dyn Fn(&Point) -> C + Send + Sync>;

/// Outgoing fundamental solution of `Δ + k²` at distance `r > 0`.
pub fn green(k: f64, n: usize, r: f64) -> Result<C> {
    if n == 3 {
        return Ok(-C::new(0.0, k * r).exp() / (4.0 * PI * r));
    }
    let nu = Order::green_kernel(n);
    let pre = (k / (2.0 * PI)).powf((n as f64 - 2.0) / 2.0) * r.powf((2.0 - n as f64) / 2.0);
    Ok(C::new(0.0, -0.25) * pre * hankel1(nu, k * r)?)
}

/// Far-field normalisation `(-i/√(8πk)) (k/2π)^{(n-2)/2} e^{-(n-1)πi/4}` for
/// `u^s ≈ e^{ik|x|} |x|^{-(n-1)/2} u_∞`.
pub fn far_field_constant(k: f64, n: usize) -> C {
    let nf = n as f64;
    C::new(0.0, -1.0) / (8.0 * PI * k).sqrt() * (k / (2.0 * PI)).powf((nf - 2.0) / 2.0) * C::from_polar(1.0, -(nf - 1.0) * PI / 4.0)
}

/// Unit directions on the sphere with angles and quadrature weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Directions {
    pub dim: usize,
    pub points: Vec<Point>,
    /// `[φ]` in the plane, `[θ, φ]` (polar, azimuth) in space.
    pub angles: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl Directions {
    /// Uniform angular grid with about `count` directions (at least 8).
    pub fn uniform(dim: usize, count: usize) -> Result<Directions> {
        if count < 8 {
            return Err(Error::Domain(format!("need at least 8 directions, got {count}")));
        }
        let mut d = Directions { dim, points: vec![], angles: vec![], weights: vec![] };
        if dim == 2 {
            for j in 0..count {
                let t = 2.0 * PI * j as f64 / count as f64;
                d.points.push([t.cos(), t.sin(), 0.0]);
                d.angles.push(vec![t]);
                d.weights.push(2.0 * PI / count as f64);
            }
        } else {
            let nt = ((count as f64 / 2.0).sqrt().round() as usize).max(2);
            let np = 2 * nt;
            for i in 0..nt {
                let th = PI * (i as f64 + 0.5) / nt as f64;
                for j in 0..np {
                    let ph = 2.0 * PI * j as f64 / np as f64;
                    d.points.push([th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]);
                    d.angles.push(vec![th, ph]);
                    d.weights.push(th.sin() * (PI / nt as f64) * (2.0 * PI / np as f64));
                }
            }
        }
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Samples of a far-field pattern.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FarField {
    pub k: f64,
    pub directions: Directions,
    pub values: Vec<C>,
}

impl FarField {
    pub fn zero(k: f64, directions: Directions) -> FarField {
        let values = vec![C::new(0.0, 0.0); directions.len()];
        FarField { k, directions, values }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().zip(&self.directions.weights).map(|(v, w)| v.norm_sqr() * w).sum::<f64>().sqrt()
    }

    /// `sup |self - other| / sup |other|`
    pub fn relative_error(&self, other: &FarField) -> f64 {
        let diff = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        diff / other.sup_norm()
    }

    /// RFC 4180 CSV with angle columns followed by `re`, `im`.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if self.directions.dim == 2 {
            w.write_record(["angle", "re", "im"])?;
        } else {
            w.write_record(["theta", "phi", "re", "im"])?;
        }
        for (a, v) in self.directions.angles.iter().zip(&self.values) {
            let mut row: Vec<String> = a.iter().map(|x| format!("{x:.17e}")).collect();
            row.push(format!("{:.17e}", v.re));
            row.push(format!("{:.17e}", v.im));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `C_{n,k} ∫ e^{-ik x̂·y} g(y) dy` for a density given at rule nodes (weights folded in).
pub fn far_field_of_density(nodes: &[Point], weighted: &[C], k: f64, dirs: Directions) -> FarField {
    let c = far_field_constant(k, dirs.dim);
    let values = dirs
        .points
        .par_iter()
        .map(|d| {
            let s: C = nodes.iter().zip(weighted).map(|(y, g)| g * C::from_polar(1.0, -k * point::dot(d, y))).sum();
            c * s
        })
        .collect();
    FarField { k, directions: dirs, values }
}

/// Intensity `φ` of a source `χ_Ω φ`.
#[derive(Clone)]
pub enum Intensity {
    Function(ScalarFn),
    Sampled(SampledFunction),
}

impl std::fmt::Debug for Intensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Intensity::Function(_) => write!(f, "Intensity::Function"),
            Intensity::Sampled(s) => write!(f, "Intensity::Sampled({:?})", s.grid()),
        }
    }
}

impl Intensity {
    pub fn function(f: impl Fn(&Point) -> C + Send + Sync + 'static) -> Intensity {
        Intensity::Function(Arc::new(f))
    }

    pub fn constant(c: f64) -> Intensity {
        Intensity::function(move |_| C::new(c, 0.0))
    }

    pub fn eval(&self, x: &Point) -> C {
        match self {
            Intensity::Function(f) => f(x),
            Intensity::Sampled(s) => s.interpolate(x),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SourceScene {
    pub domain: Domain,
    pub phi: Intensity,
    pub k: f64,
}

impl SourceScene {
    pub fn new(domain: Domain, phi: Intensity, k: f64) -> Result<SourceScene> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Domain(format!("wavenumber must be positive, got {k}")));
        }
        Ok(SourceScene { domain, phi, k })
    }

    pub fn dim(&self) -> usize {
        self.domain.dim
    }

    /// Volume rule resolving the oscillation `e^{ik x̂·y}` over the domain.
    pub fn rule(&self) -> VolumeRule {
        let order = 24 + (self.k * self.domain.diameter()).ceil() as usize;
        self.domain.volume_rule(order.min(160))
    }

    /// `∫_Ω |φ|`
    pub fn mass(&self) -> f64 {
        let rule = self.rule();
        rule.nodes.iter().zip(&rule.weights).map(|(p, w)| self.phi.eval(p).norm() * w).sum()
    }

    /// Intensity sampled on a grid covering the domain, masked to its interior.
    pub fn sampled(&self, alpha: f64, spacing: f64) -> Result<SampledFunction> {
        if let Intensity::Sampled(s) = &self.phi {
            let mut s = s.clone();
            s.alpha = alpha;
            return Ok(s);
        }
        let (lo, hi) = self.domain.bounding_box();
        let grid = Grid::covering(self.dim(), &lo, &hi, &[0.0; 3], spacing, 3)?;
        let d = &self.domain;
        SampledFunction::sample(grid, |p| self.phi.eval(p), |p| d.contains(p), alpha)
    }
}

/// Far-field pattern of `χ_Ω φ` on `n_dirs` uniform directions.
pub fn far_field(scene: &SourceScene, n_dirs: usize) -> Result<FarField> {
    let dirs = Directions::uniform(scene.dim(), n_dirs)?;
    let rule = scene.rule();
    let weighted: Vec<C> = rule.nodes.par_iter().zip(rule.weights.par_iter()).map(|(p, w)| scene.phi.eval(p) * *w).collect();
    Ok(far_field_of_density(&rule.nodes, &weighted, scene.k, dirs))
}

const FIELD_TOL: f64 = 1e-10;

/// Outgoing field `u = G * (χ_Ω φ)` at the given points.
///
/// Points within half a diameter of the domain are integrated in polar
/// coordinates centred at the point, with ray/domain intersections exact or
/// bisected, so the kernel singularity and the jump of `χ_Ω` are resolved.
pub fn solve_field(scene: &SourceScene, points: &[Point]) -> Result<Vec<C>> {
    let rule = scene.rule();
    let (lo, hi) = scene.domain.bounding_box();
    let diam = scene.domain.diameter();
    let dim = scene.dim();
    let weighted: Vec<C> = rule.nodes.iter().zip(&rule.weights).map(|(p, w)| scene.phi.eval(p) * *w).collect();
    points
        .par_iter()
        .map(|x| {
            let gap = (0..dim).map(|i| (lo[i] - x[i]).max(x[i] - hi[i]).max(0.0)).fold(0.0f64, |a, b| a.hypot(b));
            if gap > 0.5 * diam {
                rule.nodes.iter().zip(&weighted).map(|(y, g)| Ok(green(scene.k, dim, point::dist(x, y))? * g)).sum()
            } else {
                polar_field(scene, x, gap + diam * 1.01 + (0..dim).map(|i| hi[i] - lo[i]).sum::<f64>())
            }
        })
        .collect()
}

fn polar_field(scene: &SourceScene, x: &Point, t_max: f64) -> Result<C> {
    let budget = Budget::new(DEFAULT_BUDGET);
    let k = scene.k;
    let dim = scene.dim();
    let along = |d: &Point, budget: &Budget| -> Result<C> {
        let mut s = C::new(0.0, 0.0);
        for (a, b) in scene.domain.ray_intervals(x, d, t_max) {
            s += adaptive_1d(
                &mut |r| {
                    let p = point::axpy(x, r, d);
                    Ok(green(k, dim, r)? * scene.phi.eval(&p) * r.powi(dim as i32 - 1))
                },
                a,
                b,
                FIELD_TOL,
                budget,
            )?;
        }
        Ok(s)
    };
    if dim == 2 {
        adaptive_1d(&mut |t| along(&[t.cos(), t.sin(), 0.0], &budget), 0.0, 2.0 * PI, FIELD_TOL, &budget)
    } else {
        adaptive_1d(
            &mut |u| {
                let s = (1.0 - u * u).max(0.0).sqrt();
                adaptive_1d(&mut |ph| along(&[s * ph.cos(), s * ph.sin(), u], &budget), 0.0, 2.0 * PI, 1e-8, &budget)
            },
            -1.0,
            1.0,
            1e-8,
            &budget,
        )
    }
}

/// Radius `j_{n/2, m} / k` of the `m`-th radiationless ball.
pub fn radiationless_radius(k: f64, n: usize, branch: usize) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("wavenumber must be positive, got {k}")));
    }
    let nu = Order::from_f64(n as f64 / 2.0)?;
    Ok(bessel_j_zero(nu, branch)? / k)
}

/// `(sup_{∂Ω} |φ| / ‖φ‖_{C^α}) / diam(Ω)^α`
pub fn visibility_ratio(scene: &SourceScene, alpha: f64) -> Result<f64> {
    let diam = scene.domain.diameter();
    let f = scene.sampled(alpha, diam / 100.0)?;
    let norm = holder_norm(&f, alpha);
    if norm == 0.0 {
        return Ok(0.0);
    }
    Ok(boundary_sup(&f, &scene.domain) / norm / diam.powf(alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::bessel_j;

    fn disk_scene(r: f64, k: f64, phi: Intensity) -> SourceScene {
        SourceScene::new(Domain::ball(2, [0.0; 3], r).unwrap(), phi, k).unwrap()
    }

    #[test]
    fn kernel_closed_forms() {
        let (k, r) = (1.7, 0.9);
        let g2 = green(k, 2, r).unwrap();
        let h0 = hankel1(Order::Integer(0), k * r).unwrap();
        assert!((g2 - C::new(0.0, -0.25) * h0).norm() < 1e-15);
        let g3 = green(k, 3, r).unwrap();
        // general formula with the half-order Hankel function
        let nu = Order::green_kernel(3);
        let general = C::new(0.0, -0.25) * (k / (2.0 * PI)).sqrt() / r.sqrt() * hankel1(nu, k * r).unwrap();
        assert!((g3 - general).norm() < 1e-14);
    }

    #[test]
    fn kernel_solves_helmholtz_away_from_origin() {
        let k = 2.0;
        for n in [2usize, 3] {
            let r: f64 = 0.8;
            let h = 1e-3;
            let g = |s: f64| green(k, n, s).unwrap();
            let lap = (g(r + h) - g(r) * 2.0 + g(r - h)) / (h * h) + (g(r + h) - g(r - h)) / (2.0 * h) * ((n as f64 - 1.0) / r);
            assert!((lap + g(r) * (k * k)).norm() < 1e-5);
        }
    }

    #[test]
    fn far_field_of_zero_and_ball() {
        let zero = far_field(&disk_scene(1.0, 1.0, Intensity::constant(0.0)), 16).unwrap();
        assert_eq!(zero.sup_norm(), 0.0);
        for n in [2usize, 3] {
            let (r0, k) = (0.7, 2.3);
            let scene = SourceScene::new(Domain::ball(n, [0.0; 3], r0).unwrap(), Intensity::constant(1.0), k).unwrap();
            let ff = far_field(&scene, 64).unwrap();
            // ∫_B e^{-ikx̂·y} dy = (2π r0/k)^{n/2} J_{n/2}(k r0)
            let nu = Order::from_f64(n as f64 / 2.0).unwrap();
            let exact = far_field_constant(k, n) * (2.0 * PI * r0 / k).powf(n as f64 / 2.0) * bessel_j(nu, k * r0);
            for v in &ff.values {
                assert!((v - exact).norm() < 1e-12 * exact.norm(), "{v} vs {exact}");
            }
        }
    }

    #[test]
    fn far_field_translation_and_linearity() {
        let k = 1.5;
        let a = [0.3, -0.2, 0.0];
        let phi = Intensity::function(|p| C::new(1.0 + p[0], p[1] * p[1]));
        let base = SourceScene::new(Domain::ball(2, [0.0; 3], 0.8).unwrap(), phi.clone(), k).unwrap();
        let shifted_phi = Intensity::function(move |p| C::new(1.0 + p[0] - a[0], (p[1] - a[1]).powi(2)));
        let shifted = SourceScene::new(Domain::ball(2, a, 0.8).unwrap(), shifted_phi, k).unwrap();
        let f0 = far_field(&base, 32).unwrap();
        let f1 = far_field(&shifted, 32).unwrap();
        for ((d, v0), v1) in f0.directions.points.iter().zip(&f0.values).zip(&f1.values) {
            let phase = C::from_polar(1.0, -k * point::dot(d, &a));
            assert!((v0 * phase - v1).norm() < 1e-12);
        }
        let double = SourceScene::new(base.domain.clone(), Intensity::function(|p| C::new(2.0 + 2.0 * p[0], 2.0 * p[1] * p[1])), k).unwrap();
        let f2 = far_field(&double, 32).unwrap();
        assert!(f2.values.iter().zip(&f0.values).all(|(a, b)| (a - b * 2.0).norm() < 1e-13));
    }

    #[test]
    fn radiationless_radii() {
        let r = radiationless_radius(1.0, 2, 1).unwrap();
        assert!((r - 3.831_705_970_207_512).abs() < 1e-10);
        assert!((radiationless_radius(2.0, 2, 1).unwrap() - r / 2.0).abs() < 1e-14);
        let at = |rad: f64| far_field(&disk_scene(rad, 1.0, Intensity::constant(1.0)), 32).unwrap().sup_norm();
        assert!(at(r) < 1e-6 * at(r / 2.0));
        assert!(at(r / 2.0) > 1e-3);
    }

    #[test]
    fn point_like_source_matches_kernel() {
        let (k, eps) = (1.0, 0.05);
        let scene = disk_scene(eps, k, Intensity::constant(1.0));
        let x = [3.0, 1.0, 0.0];
        let u = solve_field(&scene, &[x]).unwrap()[0];
        let expect = green(k, 2, point::norm(&x)).unwrap() * (PI * eps * eps);
        assert!((u - expect).norm() < 0.01 * expect.norm());
        let zero = solve_field(&disk_scene(1.0, k, Intensity::constant(0.0)), &[[0.1, 0.2, 0.0], [5.0, 0.0, 0.0]]).unwrap();
        assert!(zero.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn field_satisfies_helmholtz_inside() {
        let k = 1.0;
        let scene = disk_scene(1.0, k, Intensity::function(|p| C::new(1.0 + p[0], 0.5 * p[1])));
        let residual = |h: f64| {
            let centers = [[0.1, 0.2, 0.0], [-0.3, 0.1, 0.0], [0.2, -0.4, 0.0]];
            let mut pts = vec![];
            for c in &centers {
                pts.push(*c);
                for (dx, dy) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
                    pts.push([c[0] + dx, c[1] + dy, 0.0]);
                }
            }
            let u = solve_field(&scene, &pts).unwrap();
            centers
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let s = &u[5 * i..5 * i + 5];
                    let lap = (s[1] + s[2] + s[3] + s[4] - s[0] * 4.0) / (h * h);
                    (lap + s[0] * (k * k) - scene.phi.eval(c)).norm()
                })
                .fold(0.0, f64::max)
        };
        let (r1, r2) = (residual(0.1), residual(0.05));
        assert!(r1 < 1e-2 && r2 < r1 / 3.0, "{r1} {r2}");
    }

    #[test]
    fn field_far_away_matches_far_field() {
        let k = 1.0;
        let scene = disk_scene(0.3, k, Intensity::function(|p| C::new(1.0 + p[0], 0.0)));
        let ff = far_field(&scene, 8).unwrap();
        let r = 50.0 * 2.0 * PI / k;
        let pts: Vec<Point> = ff.directions.points.iter().map(|d| point::scale(d, r)).collect();
        let u = solve_field(&scene, &pts).unwrap();
        for (v, f) in u.iter().zip(&ff.values) {
            let approx = v * r.sqrt() * C::from_polar(1.0, -k * r);
            assert!((approx - f).norm() < 0.02 * f.norm());
        }
    }

    #[test]
    fn radiationless_ball_is_invisible_outside() {
        let k = 1.0;
        let r0 = radiationless_radius(k, 2, 1).unwrap();
        let scene = disk_scene(r0, k, Intensity::constant(1.0));
        assert!(far_field(&scene, 32).unwrap().sup_norm() < 1e-8);
        let mass = PI * r0 * r0;
        let u = solve_field(&scene, &[[r0 + 0.5, 0.0, 0.0], [0.0, 2.0 * r0, 0.0], [10.0, 10.0, 0.0]]).unwrap();
        assert!(u.iter().all(|v| v.norm() < 1e-5 * mass), "{u:?}");
    }

    #[test]
    fn visibility_examples() {
        let alpha = 0.5;
        let c = visibility_ratio(&disk_scene(0.5, 1.0, Intensity::constant(2.0)), alpha).unwrap();
        assert!((c - 1.0).abs() < 1e-12);
        let v = visibility_ratio(&disk_scene(1.0, 1.0, Intensity::function(|p| C::new(1.0 - point::norm(p).powi(2), 0.0))), alpha).unwrap();
        assert!(v < 1e-6);
    }

    #[test]
    fn csv_and_json_output() {
        let ff = far_field(&disk_scene(0.5, 1.0, Intensity::constant(1.0)), 8).unwrap();
        let mut buf = vec![];
        ff.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("angle,re,im\n"));
        assert_eq!(text.lines().count(), 9);
        let json: serde_json::Value = serde_json::from_str(&ff.to_json().unwrap()).unwrap();
        assert_eq!(json["values"].as_array().unwrap().len(), 8);
    }
}
