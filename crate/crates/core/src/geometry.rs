//! Domains, quadrature rules on them, boundary meshes and high-curvature caps.

use std::collections::VecDeque;
use std::f64::consts::{E, PI};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::point::{self, Point};
use crate::quadrature::{gauss_legendre_on, GraphFn};
use crate::specfun::bisect;

type C = Complex64;

/// Third-order perturbation `Σ_{|β|=3} c_β x'^β` of a paraboloid.
///
/// Coefficients are ordered `[x³]` for n = 2 and `[x³, x²y, xy², y³]` for n = 3.
#[derive(Debug, Clone, PartialEq)]
pub struct Cubic {
    pub coeffs: Vec<f64>,
}

impl Cubic {
    pub fn zero(n: usize) -> Cubic {
        Cubic { coeffs: vec![0.0; if n == 2 { 1 } else { 4 }] }
    }

    fn check(&self, n: usize) -> Result<()> {
        let want = if n == 2 { 1 } else { 4 };
        if self.coeffs.len() != want {
            return Err(Error::Domain(format!(
                "cubic perturbation in dimension {n} needs {want} coefficients, got {}",
                self.coeffs.len()
            )));
        }
        Ok(())
    }

    /// Exponents `(a, b)` of `x^a y^b` matching `coeffs`.
    fn exponents(&self) -> Vec<(i32, i32)> {
        if self.coeffs.len() == 1 {
            vec![(3, 0)]
        } else {
            vec![(3, 0), (2, 1), (1, 2), (0, 3)]
        }
    }

    pub fn eval(&self, xp: &[f64]) -> f64 {
        let x = xp[0];
        let y = xp.get(1).copied().unwrap_or(0.0);
        self.exponents()
            .iter()
            .zip(&self.coeffs)
            .map(|((a, b), c)| c * x.powi(*a) * y.powi(*b))
            .sum()
    }

    /// Largest third derivative `max_{|α|=3} sup |∂^α P|`, which for a cubic
    /// monomial sum is `max |c_α| α!`.
    pub fn third_derivative_bound(&self) -> f64 {
        let fact = |k: i32| (1..=k).product::<i32>() as f64;
        self.exponents()
            .iter()
            .zip(&self.coeffs)
            .map(|((a, b), c)| c.abs() * fact(*a) * fact(*b))
            .fold(0.0, f64::max)
    }
}

/// `c_n = sup_{|x'|=1} Σ_{|β|=3} x'^β / β!`, by a parameter scan with golden-section refinement.
pub fn compute_cn(n: usize) -> f64 {
    let fact = |k: i32| (1..=k).product::<i32>() as f64;
    if n == 2 {
        return [1.0f64, -1.0].iter().map(|t| t.powi(3) / 6.0).fold(f64::MIN, f64::max);
    }
    let g = |th: f64| {
        let (x, y) = (th.cos(), th.sin());
        [(3, 0), (2, 1), (1, 2), (0, 3)]
            .iter()
            .map(|&(a, b)| x.powi(a) * y.powi(b) / (fact(a) * fact(b)))
            .sum::<f64>()
    };
    let m = 4096;
    let step = 2.0 * PI / m as f64;
    let best = (0..m).map(|i| i as f64 * step).max_by(|a, b| g(*a).total_cmp(&g(*b))).unwrap();
    let (mut lo, mut hi) = (best - step, best + step);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if g(a) < g(b) {
            lo = a;
        } else {
            hi = b;
        }
    }
    g(0.5 * (lo + hi))
}

/// Local boundary graph near an admissible high-curvature point at the origin,
/// with the domain lying above the graph.
#[derive(Clone)]
pub struct CurvatureCap {
    pub n: usize,
    pub k: f64,
    pub l: f64,
    pub m: f64,
    pub delta: f64,
    /// Lateral radius `√M / K`.
    pub b: f64,
    /// Height `1 / K`.
    pub h: f64,
    pub k_minus: f64,
    pub k_plus: f64,
    /// `max_{|α|=3} sup |∂^α ω|`
    pub third_derivative: f64,
    pub cubic: Option<Cubic>,
    omega: GraphFn,
}

impl std::fmt::Debug for CurvatureCap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CurvatureCap")
            .field("n", &self.n)
            .field("k", &self.k)
            .field("k_minus", &self.k_minus)
            .field("k_plus", &self.k_plus)
            .field("b", &self.b)
            .field("h", &self.h)
            .field("cubic", &self.cubic)
            .finish()
    }
}

impl CurvatureCap {
    /// Builds `ω(x') = K|x'|² + cubic(x')` with pinching constants from Taylor's theorem.
    pub fn new(n: usize, k: f64, cubic: Cubic, l: f64, m: f64, delta: f64) -> Result<CurvatureCap> {
        if !(n == 2 || n == 3) {
            return Err(Error::Domain(format!("dimension {n} unsupported")));
        }
        cubic.check(n)?;
        if !(k >= E) {
            return Err(Error::Domain(format!("curvature K = {k} is below e")));
        }
        if !(l > 0.0 && delta > 0.0 && m >= 1.0) {
            return Err(Error::Domain("need L > 0, delta > 0 and M >= 1".into()));
        }
        let cn = compute_cn(n);
        let f = cubic.third_derivative_bound();
        let limit = ((m - 1.0) * k * k / (cn * m.powf(1.5))).min(l * k.powf(2.0 - delta) / (2.0 * cn * m.sqrt()));
        if f > limit {
            return Err(Error::InadmissiblePerturbation(format!(
                "third-derivative bound {f} exceeds {limit} at K = {k}"
            )));
        }
        let b = m.sqrt() / k;
        let spread = cn * f * b;
        let poly = cubic.clone();
        let omega: GraphFn = Arc::new(move |xp: &[f64]| k * xp.iter().map(|v| v * v).sum::<f64>() + poly.eval(xp));
        let cap = CurvatureCap {
            n,
            k,
            l,
            m,
            delta,
            b,
            h: 1.0 / k,
            k_minus: k - spread,
            k_plus: k + spread,
            third_derivative: f,
            cubic: Some(cubic),
            omega,
        };
        cap.validate()?;
        Ok(cap)
    }

    /// A cap with an arbitrary graph and caller-supplied pinching constants; no checks.
    pub fn custom(n: usize, k: f64, k_minus: f64, k_plus: f64, l: f64, m: f64, delta: f64, omega: GraphFn) -> CurvatureCap {
        CurvatureCap {
            n,
            k,
            l,
            m,
            delta,
            b: m.sqrt() / k,
            h: 1.0 / k,
            k_minus,
            k_plus,
            third_derivative: f64::NAN,
            cubic: None,
            omega,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InadmissiblePerturbation(msg));
        let (k, m) = (self.k, self.m);
        for kk in [self.k_minus, self.k_plus] {
            if !(kk / k >= 1.0 / m - 1e-15 && kk / k <= m + 1e-15) {
                return bad(format!("K± / K = {} outside [1/M, M]", kk / k));
            }
        }
        if self.k_plus - self.k_minus > self.l * k.powf(1.0 - self.delta) * (1.0 + 1e-12) {
            return bad("K+ - K- exceeds L K^(1-delta)".into());
        }
        if self.h > self.k_minus * self.b * self.b * (1.0 + 1e-12) {
            return bad("h exceeds K- b^2".into());
        }
        if !self.slice_is_star_shaped() {
            return bad("top slice of the cap is not star-shaped".into());
        }
        Ok(())
    }

    pub fn omega(&self, xp: &[f64]) -> f64 {
        (self.omega)(xp)
    }

    pub fn omega_fn(&self) -> GraphFn {
        self.omega.clone()
    }

    /// Gradient of the graph by central differences.
    pub fn omega_gradient(&self, xp: &[f64]) -> [f64; 2] {
        let eps = 1e-6 * (1.0 + xp.iter().map(|v| v.abs()).fold(0.0, f64::max));
        let mut g = [0.0; 2];
        for i in 0..self.n - 1 {
            let mut a = [xp[0], xp.get(1).copied().unwrap_or(0.0)];
            let mut b = a;
            a[i] += eps;
            b[i] -= eps;
            g[i] = (self.omega(&a[..self.n - 1]) - self.omega(&b[..self.n - 1])) / (2.0 * eps);
        }
        g
    }

    /// Tangential unit directions used to parameterise `x'` (one per sample).
    fn directions(&self, samples: usize) -> Vec<[f64; 2]> {
        if self.n == 2 {
            vec![[1.0, 0.0], [-1.0, 0.0]]
        } else {
            (0..samples)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / samples as f64;
                    [t.cos(), t.sin()]
                })
                .collect()
        }
    }

    /// Open question item: the top slice `{ω < h}` is nonempty and star-shaped about 0.
    pub fn slice_is_star_shaped(&self) -> bool {
        if self.omega(&[0.0, 0.0][..self.n - 1]) >= self.h {
            return false;
        }
        for d in self.directions(64) {
            let mut left = false;
            for i in 1..=400 {
                let r = self.b * i as f64 / 400.0;
                let inside = self.omega(&[r * d[0], r * d[1]][..self.n - 1]) < self.h;
                if !inside {
                    left = true;
                } else if left {
                    return false;
                }
            }
        }
        true
    }

    pub fn in_cap(&self, x: &Point) -> bool {
        let xp = &x[..self.n - 1];
        let r = point::tangential_norm(x, self.n);
        r < self.b && x[self.n - 1] < self.h && self.omega(xp) < x[self.n - 1]
    }

    /// Geometry-exact rule on `Ω_{b,h} = {|x'| < b, ω(x') < x_n < h}`.
    pub fn region_rule(&self, order: usize) -> VolumeRule {
        let h = self.h;
        graph_region_rule(self.n, &self.omega, &|_| h, self.b, order)
    }

    /// Rule on the flat top slice `{x_n = h, ω(x') < h}` (surface measure).
    pub fn top_slice_rule(&self, order: usize) -> Vec<(Point, f64)> {
        let h = self.h;
        let top = |_: &[f64]| h;
        let mut out = vec![];
        for (d, w_dir, r_star) in ray_extents(self.n, &self.omega, &top, self.b, order) {
            let (rs, ws) = gauss_legendre_on(order, 0.0, r_star);
            for (r, w) in rs.iter().zip(&ws) {
                let mut p = [0.0; 3];
                p[0] = r * d[0];
                if self.n == 3 {
                    p[1] = r * d[1];
                }
                p[self.n - 1] = h;
                let jac = if self.n == 3 { *r } else { 1.0 };
                out.push((p, w * w_dir * jac));
            }
        }
        out
    }
}

/// Directions in x' with their angular weights and the extent `r*` along each
/// ray where `ω < top` first fails.
fn ray_extents(
    n: usize,
    omega: &GraphFn,
    top: &dyn Fn(&[f64]) -> f64,
    r_max: f64,
    order: usize,
) -> Vec<([f64; 2], f64, f64)> {
    let dirs: Vec<([f64; 2], f64)> = if n == 2 {
        vec![([1.0, 0.0], 1.0), ([-1.0, 0.0], 1.0)]
    } else {
        let m = 4 * order;
        (0..m)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / m as f64;
                ([t.cos(), t.sin()], 2.0 * PI / m as f64)
            })
            .collect()
    };
    dirs.into_iter()
        .map(|(d, w)| {
            let g = |r: f64| {
                let xp = [r * d[0], r * d[1]];
                top(&xp[..n - 1]) - omega(&xp[..n - 1])
            };
            let r_star = if g(r_max) > 0.0 { r_max } else { bisect(g, 0.0, r_max) };
            (d, w, r_star)
        })
        .collect()
}

/// Rule on `{|x'| < r*(θ), ω(x') < x_n < top(x')}`.
fn graph_region_rule(
    n: usize,
    omega: &GraphFn,
    top: &dyn Fn(&[f64]) -> f64,
    r_max: f64,
    order: usize,
) -> VolumeRule {
    let mut rule = VolumeRule::empty(n);
    for (d, w_dir, r_star) in ray_extents(n, omega, top, r_max, order) {
        let (rs, ws) = gauss_legendre_on(order, 0.0, r_star);
        for (r, wr) in rs.iter().zip(&ws) {
            let xp = [r * d[0], r * d[1]];
            let lo = omega(&xp[..n - 1]);
            let hi = top(&xp[..n - 1]);
            if hi <= lo {
                continue;
            }
            let (zs, wz) = gauss_legendre_on(order, lo, hi);
            let jac = if n == 3 { *r } else { 1.0 };
            for (z, w) in zs.iter().zip(&wz) {
                let mut p = [0.0; 3];
                p[0] = xp[0];
                if n == 3 {
                    p[1] = xp[1];
                }
                p[n - 1] = *z;
                rule.nodes.push(p);
                rule.weights.push(w * wr * w_dir * jac);
            }
        }
    }
    rule
}

/// Report of the paraboloid nesting check `P₊ ⊆ Ω_{b,h} ⊆ P₋`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestingReport {
    pub samples: usize,
    pub violations: usize,
    /// Samples where the three sets disagree at all (zero for a pure paraboloid).
    pub disagreements: usize,
}

pub fn nesting_check(cap: &CurvatureCap) -> NestingReport {
    let n = cap.n;
    let per_axis = if n == 2 { 100 } else { 22 };
    let mut report = NestingReport { samples: 0, violations: 0, disagreements: 0 };
    let coord = |i: usize, lo: f64, hi: f64| lo + (hi - lo) * (i as f64 + 0.5) / per_axis as f64;
    let zs = if n == 3 { per_axis } else { 1 };
    for i in 0..per_axis {
        for j in 0..per_axis {
            for l in 0..zs {
                let xp = if n == 2 {
                    vec![coord(i, -cap.b, cap.b)]
                } else {
                    vec![coord(i, -cap.b, cap.b), coord(j, -cap.b, cap.b)]
                };
                let xn = if n == 2 { coord(j, 0.0, cap.h) } else { coord(l, 0.0, cap.h) };
                let r2: f64 = xp.iter().map(|v| v * v).sum();
                if r2.sqrt() >= cap.b {
                    continue;
                }
                report.samples += 1;
                let plus = cap.k_plus * r2 < xn;
                let minus = cap.k_minus * r2 < xn;
                let omega = cap.omega(&xp) < xn;
                if (plus && !omega) || (omega && !minus) {
                    report.violations += 1;
                }
                if plus != omega || omega != minus {
                    report.disagreements += 1;
                }
            }
        }
    }
    report
}

/// Quadrature nodes and weights for a volume integral.
#[derive(Debug, Clone, Default)]
pub struct VolumeRule {
    pub dim: usize,
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
}

impl VolumeRule {
    pub fn empty(dim: usize) -> VolumeRule {
        VolumeRule { dim, nodes: vec![], weights: vec![] }
    }

    pub fn integrate(&self, f: impl Fn(&Point) -> C) -> C {
        self.nodes.iter().zip(&self.weights).map(|(p, w)| f(p) * *w).sum()
    }

    pub fn volume(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn extend(&mut self, other: VolumeRule) {
        self.nodes.extend(other.nodes);
        self.weights.extend(other.weights);
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Boundary sample with outward normal and surface weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub point: Point,
    pub normal: Point,
    pub weight: f64,
}

/// Paraboloid-capped body: a ball centred above an admissible cap whose apex is
/// the origin, joined by the horn `{|x'| < R, ω(x') < x_n < c_n}`.
#[derive(Debug, Clone)]
pub struct CappedBall {
    pub center_height: f64,
    pub radius: f64,
    pub cap: CurvatureCap,
}

impl CappedBall {
    pub fn new(cap: CurvatureCap, center_height: f64, radius: f64) -> Result<CappedBall> {
        if center_height - radius < cap.h {
            return Err(Error::Domain("bulk ball must clear the cap height 1/K".into()));
        }
        let shape = CappedBall { center_height, radius, cap };
        // the horn must close up inside the cylinder |x'| < R
        for (_, _, r) in shape.horn_extents(16) {
            if r >= radius * (1.0 - 1e-9) {
                return Err(Error::Domain("cap graph does not reach the bulk inside |x'| < R".into()));
            }
        }
        Ok(shape)
    }

    fn center(&self) -> Point {
        let mut c = [0.0; 3];
        c[self.cap.n - 1] = self.center_height;
        c
    }

    fn in_ball(&self, x: &Point) -> bool {
        point::dist(x, &self.center()) < self.radius
    }

    fn in_horn(&self, x: &Point) -> bool {
        let n = self.cap.n;
        point::tangential_norm(x, n) < self.radius && x[n - 1] < self.center_height && self.cap.omega(&x[..n - 1]) < x[n - 1]
    }

    fn ball_bottom(&self, xp: &[f64]) -> f64 {
        let r2: f64 = xp.iter().map(|v| v * v).sum();
        self.center_height - (self.radius * self.radius - r2).max(0.0).sqrt()
    }

    fn horn_extents(&self, order: usize) -> Vec<([f64; 2], f64, f64)> {
        let me = self.clone();
        ray_extents(self.cap.n, &self.cap.omega, &move |xp| me.ball_bottom(xp), self.radius, order)
    }

    /// Radius of the horn at the bulk's equator height (its widest point).
    fn horn_top_radius(&self) -> f64 {
        let n = self.cap.n;
        let c = self.center_height;
        let mut best: f64 = 0.0;
        for (d, _, _) in ray_extents(n, &self.cap.omega, &|_| c, self.radius, 8) {
            let g = |r: f64| {
                let xp = [r * d[0], r * d[1]];
                c - self.cap.omega(&xp[..n - 1])
            };
            let r = if g(self.radius) > 0.0 { self.radius } else { bisect(g, 0.0, self.radius) };
            best = best.max(r);
        }
        best
    }
}

/// Convex polygon (counter-clockwise vertices) thickened by `radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundedPolygon {
    pub vertices: Vec<[f64; 2]>,
    pub radius: f64,
}

impl RoundedPolygon {
    fn core_distance(&self, x: &Point) -> f64 {
        let v = &self.vertices;
        let m = v.len();
        let mut inside = true;
        let mut best = f64::INFINITY;
        for i in 0..m {
            let a = v[i];
            let b = v[(i + 1) % m];
            let e = [b[0] - a[0], b[1] - a[1]];
            let w = [x[0] - a[0], x[1] - a[1]];
            if e[0] * w[1] - e[1] * w[0] < 0.0 {
                inside = false;
            }
            let t = ((w[0] * e[0] + w[1] * e[1]) / (e[0] * e[0] + e[1] * e[1])).clamp(0.0, 1.0);
            let d = ((w[0] - t * e[0]).powi(2) + (w[1] - t * e[1]).powi(2)).sqrt();
            best = best.min(d);
        }
        if inside {
            0.0
        } else {
            best
        }
    }

    fn centroid(&self) -> Point {
        let m = self.vertices.len() as f64;
        let sx: f64 = self.vertices.iter().map(|v| v[0]).sum();
        let sy: f64 = self.vertices.iter().map(|v| v[1]).sum();
        [sx / m, sy / m, 0.0]
    }
}

#[derive(Debug, Clone)]
pub enum Shape {
    Ball { center: Point, radius: f64 },
    Box { lo: Point, hi: Point },
    /// Ball with a concentric spherical cavity.
    Annulus { center: Point, inner: f64, outer: f64 },
    /// Planar star-shaped region `r < a_0 + Σ (a_j cos jθ + b_j sin jθ)` about `center`.
    StarPolar { center: Point, cos: Vec<f64>, sin: Vec<f64> },
    RoundedPolygon(RoundedPolygon),
    CappedBall(CappedBall),
}

impl Shape {
    pub fn contains(&self, x: &Point) -> bool {
        match self {
            Shape::Ball { center, radius } => point::dist(x, center) < *radius,
            Shape::Box { lo, hi } => (0..3).all(|i| lo[i] == hi[i] || (x[i] > lo[i] && x[i] < hi[i])),
            Shape::Annulus { center, inner, outer } => {
                let r = point::dist(x, center);
                r > *inner && r < *outer
            }
            Shape::StarPolar { center, .. } => {
                let d = point::sub(x, center);
                let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
                r < self.star_radius(d[1].atan2(d[0]))
            }
            Shape::RoundedPolygon(p) => p.core_distance(x) < p.radius,
            Shape::CappedBall(c) => c.in_ball(x) || c.in_horn(x),
        }
    }

    fn star_radius(&self, theta: f64) -> f64 {
        match self {
            Shape::StarPolar { cos, sin, .. } => {
                let mut r = cos.first().copied().unwrap_or(0.0);
                for (j, a) in cos.iter().enumerate().skip(1) {
                    r += a * (j as f64 * theta).cos();
                }
                for (j, b) in sin.iter().enumerate().skip(1) {
                    r += b * (j as f64 * theta).sin();
                }
                r
            }
            _ => unreachable!("star radius of a non-star shape"),
        }
    }

    fn star_radius_derivative(&self, theta: f64) -> f64 {
        match self {
            Shape::StarPolar { cos, sin, .. } => {
                let mut r = 0.0;
                for (j, a) in cos.iter().enumerate().skip(1) {
                    r -= a * j as f64 * (j as f64 * theta).sin();
                }
                for (j, b) in sin.iter().enumerate().skip(1) {
                    r += b * j as f64 * (j as f64 * theta).cos();
                }
                r
            }
            _ => unreachable!("star radius of a non-star shape"),
        }
    }

    pub fn bounding_box(&self, dim: usize) -> (Point, Point) {
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        match self {
            Shape::Ball { center, radius } | Shape::Annulus { center, outer: radius, .. } => {
                for i in 0..dim {
                    lo[i] = center[i] - radius;
                    hi[i] = center[i] + radius;
                }
            }
            Shape::Box { lo: a, hi: b } => {
                lo = *a;
                hi = *b;
            }
            Shape::StarPolar { center, cos, sin } => {
                let rmax = cos.iter().chain(sin.iter()).map(|v| v.abs()).sum::<f64>();
                for i in 0..2 {
                    lo[i] = center[i] - rmax;
                    hi[i] = center[i] + rmax;
                }
            }
            Shape::RoundedPolygon(p) => {
                lo = [f64::INFINITY, f64::INFINITY, 0.0];
                hi = [f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0];
                for v in &p.vertices {
                    for i in 0..2 {
                        lo[i] = lo[i].min(v[i] - p.radius);
                        hi[i] = hi[i].max(v[i] + p.radius);
                    }
                }
            }
            Shape::CappedBall(c) => {
                for i in 0..dim - 1 {
                    lo[i] = -c.radius;
                    hi[i] = c.radius;
                }
                lo[dim - 1] = 0.0;
                hi[dim - 1] = c.center_height + c.radius;
            }
        }
        (lo, hi)
    }

    /// Conservative test for "within distance `d` of the boundary".
    pub fn near_boundary(&self, x: &Point, d: f64, dim: usize) -> bool {
        match self {
            Shape::Ball { center, radius } => (point::dist(x, center) - radius).abs() < d,
            Shape::Annulus { center, inner, outer } => {
                let r = point::dist(x, center);
                (r - inner).abs() < d || (r - outer).abs() < d
            }
            Shape::Box { lo, hi } => {
                let inside_grown = (0..dim).all(|i| x[i] > lo[i] - d && x[i] < hi[i] + d);
                let inside_shrunk = (0..dim).all(|i| x[i] > lo[i] + d && x[i] < hi[i] - d);
                inside_grown && !inside_shrunk
            }
            Shape::StarPolar { center, .. } => {
                let dd = point::sub(x, center);
                let r = (dd[0] * dd[0] + dd[1] * dd[1]).sqrt();
                let rb = self.star_radius(dd[1].atan2(dd[0]));
                // radial distance overestimates the true distance by at most the slope factor
                let slope = (0..64)
                    .map(|i| {
                        let t = 2.0 * PI * i as f64 / 64.0;
                        (self.star_radius_derivative(t) / self.star_radius(t)).abs()
                    })
                    .fold(0.0, f64::max);
                (r - rb).abs() < d * (1.0 + slope) * 1.5
            }
            Shape::RoundedPolygon(p) => (p.core_distance(x) - p.radius).abs() < d,
            Shape::CappedBall(c) => {
                let n = dim;
                let ball = (point::dist(x, &c.center()) - c.radius).abs() < d;
                let rt = c.horn_top_radius();
                let horn = point::tangential_norm(x, n) < rt + d && x[n - 1] > -d && x[n - 1] < c.center_height + d;
                ball || horn
            }
        }
    }

    /// Geometry-exact volume rule; `order` Gauss points per radial segment.
    pub fn volume_rule(&self, dim: usize, order: usize) -> VolumeRule {
        match self {
            Shape::Ball { center, radius } => ball_rule(dim, center, 0.0, *radius, order),
            Shape::Annulus { center, inner, outer } => ball_rule(dim, center, *inner, *outer, order),
            Shape::Box { lo, hi } => {
                let mut rule = VolumeRule::empty(dim);
                let axes: Vec<(Vec<f64>, Vec<f64>)> = (0..dim).map(|i| gauss_legendre_on(order, lo[i], hi[i])).collect();
                let zlen = if dim == 3 { order } else { 1 };
                for a in 0..order {
                    for b in 0..order {
                        for c in 0..zlen {
                            let mut p = [axes[0].0[a], axes[1].0[b], 0.0];
                            let mut w = axes[0].1[a] * axes[1].1[b];
                            if dim == 3 {
                                p[2] = axes[2].0[c];
                                w *= axes[2].1[c];
                            }
                            rule.nodes.push(p);
                            rule.weights.push(w);
                        }
                    }
                }
                rule
            }
            Shape::StarPolar { center, .. } => {
                let mut rule = VolumeRule::empty(2);
                let m = 4 * order;
                for i in 0..m {
                    let t = 2.0 * PI * i as f64 / m as f64;
                    let rb = self.star_radius(t);
                    let (rs, ws) = gauss_legendre_on(order, 0.0, rb);
                    for (r, w) in rs.iter().zip(&ws) {
                        rule.nodes.push([center[0] + r * t.cos(), center[1] + r * t.sin(), 0.0]);
                        rule.weights.push(w * r * 2.0 * PI / m as f64);
                    }
                }
                rule
            }
            Shape::RoundedPolygon(p) => {
                // star-shaped about the centroid; radial extent by bisection, panels in angle
                let c = p.centroid();
                let mut rule = VolumeRule::empty(2);
                let panels = 4 * order;
                let reach = 4.0 * p.vertices.iter().map(|v| ((v[0] - c[0]).powi(2) + (v[1] - c[1]).powi(2)).sqrt()).fold(0.0, f64::max) + 4.0 * p.radius;
                for k in 0..panels {
                    let (ts, wt) = gauss_legendre_on(8, 2.0 * PI * k as f64 / panels as f64, 2.0 * PI * (k + 1) as f64 / panels as f64);
                    for (t, w_t) in ts.iter().zip(&wt) {
                        let d = [t.cos(), t.sin(), 0.0];
                        let rb = bisect(|r| if p.core_distance(&point::axpy(&c, r, &d)) < p.radius { 1.0 } else { -1.0 }, 0.0, reach);
                        let (rs, ws) = gauss_legendre_on(order, 0.0, rb);
                        for (r, w) in rs.iter().zip(&ws) {
                            rule.nodes.push(point::axpy(&c, *r, &d));
                            rule.weights.push(w * r * w_t);
                        }
                    }
                }
                rule
            }
            Shape::CappedBall(cb) => {
                let mut rule = ball_rule(dim, &cb.center(), 0.0, cb.radius, order);
                let me = cb.clone();
                rule.extend(graph_region_rule(dim, &cb.cap.omega, &move |xp| me.ball_bottom(xp), cb.radius, order));
                rule
            }
        }
    }

    /// Boundary samples with outward normals and surface weights.
    pub fn boundary_mesh(&self, dim: usize, samples: usize) -> Vec<BoundaryPoint> {
        match self {
            Shape::Ball { center, radius } => sphere_mesh(dim, center, *radius, samples, 1.0),
            Shape::Annulus { center, inner, outer } => {
                let mut m = sphere_mesh(dim, center, *outer, samples, 1.0);
                m.extend(sphere_mesh(dim, center, *inner, samples, -1.0));
                m
            }
            Shape::Box { lo, hi } => box_mesh(dim, lo, hi, samples),
            Shape::StarPolar { center, .. } => (0..samples)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / samples as f64;
                    let r = self.star_radius(t);
                    let dr = self.star_radius_derivative(t);
                    let (s, c) = t.sin_cos();
                    let tangent = [dr * c - r * s, dr * s + r * c, 0.0];
                    let speed = point::norm(&tangent);
                    BoundaryPoint {
                        point: [center[0] + r * c, center[1] + r * s, 0.0],
                        normal: [tangent[1] / speed, -tangent[0] / speed, 0.0],
                        weight: speed * 2.0 * PI / samples as f64,
                    }
                })
                .collect(),
            Shape::RoundedPolygon(p) => rounded_polygon_mesh(p, samples),
            Shape::CappedBall(cb) => capped_mesh(cb, dim, samples),
        }
    }

    /// Intervals of `t >= 0` with `x + t d` inside the shape, up to `t_max`.
    pub fn ray_intervals(&self, x: &Point, d: &Point, t_max: f64, dim: usize) -> Vec<(f64, f64)> {
        match self {
            Shape::Ball { center, radius } => sphere_chord(x, d, center, *radius, t_max).into_iter().collect(),
            Shape::Annulus { center, inner, outer } => {
                let Some((a, b)) = sphere_chord(x, d, center, *outer, t_max) else {
                    return vec![];
                };
                match sphere_chord(x, d, center, *inner, t_max) {
                    None => vec![(a, b)],
                    Some((c, e)) => [(a, c), (e, b)].into_iter().filter(|(s, t)| t > s).collect(),
                }
            }
            Shape::Box { lo, hi } => {
                let (mut a, mut b) = (0.0f64, t_max);
                for i in 0..dim {
                    if d[i].abs() < 1e-300 {
                        if x[i] <= lo[i] || x[i] >= hi[i] {
                            return vec![];
                        }
                    } else {
                        let t1 = (lo[i] - x[i]) / d[i];
                        let t2 = (hi[i] - x[i]) / d[i];
                        a = a.max(t1.min(t2));
                        b = b.min(t1.max(t2));
                    }
                }
                if b > a {
                    vec![(a, b)]
                } else {
                    vec![]
                }
            }
            _ => {
                let step = self.feature_size(dim) / 8.0;
                march_intervals(&|p| self.contains(p), x, d, t_max, step)
            }
        }
    }

    /// A length below which the shape has no unresolved features.
    pub fn feature_size(&self, dim: usize) -> f64 {
        match self {
            Shape::Ball { radius, .. } => *radius,
            Shape::Annulus { inner, outer, .. } => inner.min(outer - inner),
            Shape::Box { lo, hi } => (0..dim).map(|i| hi[i] - lo[i]).fold(f64::INFINITY, f64::min),
            Shape::StarPolar { cos, .. } => cos[0] / 4.0,
            Shape::RoundedPolygon(p) => p.radius,
            Shape::CappedBall(c) => c.horn_top_radius().min(c.cap.h) / 2.0,
        }
    }
}

fn sphere_chord(x: &Point, d: &Point, c: &Point, r: f64, t_max: f64) -> Option<(f64, f64)> {
    let w = point::sub(x, c);
    let b = point::dot(&w, d);
    let cc = point::dot(&w, &w) - r * r;
    let disc = b * b - cc;
    if disc <= 0.0 {
        return None;
    }
    let s = disc.sqrt();
    let t0 = (-b - s).max(0.0);
    let t1 = (-b + s).min(t_max);
    if t1 > t0 {
        Some((t0, t1))
    } else {
        None
    }
}

fn march_intervals(inside: &dyn Fn(&Point) -> bool, x: &Point, d: &Point, t_max: f64, step: f64) -> Vec<(f64, f64)> {
    let mut out = vec![];
    let mut t = 0.0;
    let mut state = inside(x);
    let mut start = if state { Some(0.0) } else { None };
    while t < t_max {
        let t_next = (t + step).min(t_max);
        let s_next = inside(&point::axpy(x, t_next, d));
        if s_next != state {
            let edge = bisect(
                |s| if inside(&point::axpy(x, s, d)) == state { 1.0 } else { -1.0 },
                t,
                t_next,
            );
            if state {
                out.push((start.take().unwrap(), edge));
            } else {
                start = Some(edge);
            }
            state = s_next;
        }
        t = t_next;
    }
    if let Some(s) = start {
        out.push((s, t_max));
    }
    out
}

fn ball_rule(dim: usize, c: &Point, r_in: f64, r_out: f64, order: usize) -> VolumeRule {
    let mut rule = VolumeRule::empty(dim);
    let (rs, wr) = gauss_legendre_on(order, r_in, r_out);
    if dim == 2 {
        let m = 4 * order;
        for i in 0..m {
            let t = 2.0 * PI * i as f64 / m as f64;
            for (r, w) in rs.iter().zip(&wr) {
                rule.nodes.push([c[0] + r * t.cos(), c[1] + r * t.sin(), 0.0]);
                rule.weights.push(w * r * 2.0 * PI / m as f64);
            }
        }
    } else {
        let (us, wu) = gauss_legendre_on(2 * order, -1.0, 1.0);
        let m = 4 * order;
        for (u, w_u) in us.iter().zip(&wu) {
            let s = (1.0 - u * u).sqrt();
            for i in 0..m {
                let ph = 2.0 * PI * i as f64 / m as f64;
                for (r, w) in rs.iter().zip(&wr) {
                    rule.nodes.push([c[0] + r * s * ph.cos(), c[1] + r * s * ph.sin(), c[2] + r * u]);
                    rule.weights.push(w * r * r * w_u * 2.0 * PI / m as f64);
                }
            }
        }
    }
    rule
}

fn sphere_mesh(dim: usize, c: &Point, r: f64, samples: usize, orientation: f64) -> Vec<BoundaryPoint> {
    if dim == 2 {
        return (0..samples)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / samples as f64;
                let nrm = [t.cos(), t.sin(), 0.0];
                BoundaryPoint {
                    point: point::axpy(c, r, &nrm),
                    normal: point::scale(&nrm, orientation),
                    weight: 2.0 * PI * r / samples as f64,
                }
            })
            .collect();
    }
    let nu = ((samples as f64 / 2.0).sqrt().round() as usize).max(2);
    let nphi = 2 * nu;
    let (us, wu) = gauss_legendre_on(nu, -1.0, 1.0);
    let mut out = Vec::with_capacity(nu * nphi);
    for (u, w) in us.iter().zip(&wu) {
        let s = (1.0 - u * u).sqrt();
        for j in 0..nphi {
            let ph = 2.0 * PI * j as f64 / nphi as f64;
            let nrm = [s * ph.cos(), s * ph.sin(), *u];
            out.push(BoundaryPoint {
                point: point::axpy(c, r, &nrm),
                normal: point::scale(&nrm, orientation),
                weight: r * r * w * 2.0 * PI / nphi as f64,
            });
        }
    }
    out
}

fn box_mesh(dim: usize, lo: &Point, hi: &Point, samples: usize) -> Vec<BoundaryPoint> {
    let mut out = vec![];
    let per_face = if dim == 2 { (samples / 4).max(2) } else { ((samples as f64 / 6.0).sqrt() as usize).max(2) };
    for axis in 0..dim {
        for (side, sign) in [(lo[axis], -1.0), (hi[axis], 1.0)] {
            let others: Vec<usize> = (0..dim).filter(|&i| i != axis).collect();
            let rules: Vec<(Vec<f64>, Vec<f64>)> = others.iter().map(|&i| gauss_legendre_on(per_face, lo[i], hi[i])).collect();
            let count = if dim == 3 { per_face } else { 1 };
            for a in 0..per_face {
                for b in 0..count {
                    let mut p = [0.0; 3];
                    p[axis] = side;
                    p[others[0]] = rules[0].0[a];
                    let mut w = rules[0].1[a];
                    if dim == 3 {
                        p[others[1]] = rules[1].0[b];
                        w *= rules[1].1[b];
                    }
                    out.push(BoundaryPoint { point: p, normal: point::scale(&point::unit(axis), sign), weight: w });
                }
            }
        }
    }
    out
}

fn rounded_polygon_mesh(p: &RoundedPolygon, samples: usize) -> Vec<BoundaryPoint> {
    let v = &p.vertices;
    let m = v.len();
    let mut perimeter = 2.0 * PI * p.radius;
    for i in 0..m {
        let a = v[i];
        let b = v[(i + 1) % m];
        perimeter += ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    }
    let ds = perimeter / samples as f64;
    let mut out = vec![];
    for i in 0..m {
        let a = v[i];
        let b = v[(i + 1) % m];
        let c = v[(i + 2) % m];
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let nrm = [(b[1] - a[1]) / len, -(b[0] - a[0]) / len, 0.0];
        let k = (len / ds).ceil().max(1.0) as usize;
        for j in 0..k {
            let t = (j as f64 + 0.5) / k as f64;
            out.push(BoundaryPoint {
                point: [a[0] + t * (b[0] - a[0]) + p.radius * nrm[0], a[1] + t * (b[1] - a[1]) + p.radius * nrm[1], 0.0],
                normal: nrm,
                weight: len / k as f64,
            });
        }
        // arc around vertex b between the normals of edges ab and bc
        let len2 = ((c[0] - b[0]).powi(2) + (c[1] - b[1]).powi(2)).sqrt();
        let nrm2 = [(c[1] - b[1]) / len2, -(c[0] - b[0]) / len2];
        let t0 = nrm[1].atan2(nrm[0]);
        let mut t1 = nrm2[1].atan2(nrm2[0]);
        while t1 < t0 {
            t1 += 2.0 * PI;
        }
        let arc = (t1 - t0) * p.radius;
        let k = (arc / ds).ceil().max(1.0) as usize;
        for j in 0..k {
            let t = t0 + (t1 - t0) * (j as f64 + 0.5) / k as f64;
            let n = [t.cos(), t.sin(), 0.0];
            out.push(BoundaryPoint {
                point: [b[0] + p.radius * n[0], b[1] + p.radius * n[1], 0.0],
                normal: n,
                weight: arc / k as f64,
            });
        }
    }
    out
}

fn capped_mesh(cb: &CappedBall, dim: usize, samples: usize) -> Vec<BoundaryPoint> {
    let mut out: Vec<BoundaryPoint> = sphere_mesh(dim, &cb.center(), cb.radius, samples, 1.0)
        .into_iter()
        .filter(|b| !cb.in_horn(&b.point))
        .collect();
    // graph part below the bulk
    let order = if dim == 2 { samples / 4 } else { ((samples as f64).sqrt() / 2.0) as usize }.max(4);
    for (d, w_dir, r_star) in cb.horn_extents(order) {
        let (rs, ws) = gauss_legendre_on(order, 0.0, r_star);
        for (r, w) in rs.iter().zip(&ws) {
            let xp = [r * d[0], r * d[1]];
            let g = cb.cap.omega_gradient(&xp[..dim - 1]);
            let mut p = [0.0; 3];
            let mut nrm = [0.0; 3];
            for i in 0..dim - 1 {
                p[i] = xp[i];
                nrm[i] = g[i];
            }
            p[dim - 1] = cb.cap.omega(&xp[..dim - 1]);
            nrm[dim - 1] = -1.0;
            let len = point::norm(&nrm);
            let jac = if dim == 3 { *r } else { 1.0 };
            out.push(BoundaryPoint { point: p, normal: point::scale(&nrm, 1.0 / len), weight: w * w_dir * jac * len });
        }
    }
    out
}

/// Union of pairwise disjoint shapes.
#[derive(Debug, Clone)]
pub struct Domain {
    pub dim: usize,
    pub components: Vec<Shape>,
    pub well_separated: bool,
}

impl Domain {
    pub fn new(dim: usize, components: Vec<Shape>) -> Result<Domain> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::Domain(format!("dimension {dim} unsupported")));
        }
        for s in &components {
            let planar = matches!(s, Shape::StarPolar { .. } | Shape::RoundedPolygon(_));
            if planar && dim != 2 {
                return Err(Error::Domain("polar and polygon shapes are planar".into()));
            }
            if let Shape::CappedBall(c) = s {
                if c.cap.n != dim {
                    return Err(Error::Domain("cap dimension mismatch".into()));
                }
            }
        }
        Ok(Domain { dim, components, well_separated: false })
    }

    pub fn ball(dim: usize, center: Point, radius: f64) -> Result<Domain> {
        if !(radius > 0.0) {
            return Err(Error::Domain(format!("radius must be positive, got {radius}")));
        }
        Domain::new(dim, vec![Shape::Ball { center, radius }])
    }

    /// Marks the components as well separated after checking the gap exceeds `gap`.
    pub fn with_separation(mut self, gap: f64) -> Result<Domain> {
        let meshes: Vec<Vec<BoundaryPoint>> = self.components.iter().map(|s| s.boundary_mesh(self.dim, 256)).collect();
        for i in 0..meshes.len() {
            for j in i + 1..meshes.len() {
                let d = meshes[i]
                    .iter()
                    .flat_map(|a| meshes[j].iter().map(move |b| point::dist(&a.point, &b.point)))
                    .fold(f64::INFINITY, f64::min);
                if d <= gap {
                    return Err(Error::Domain(format!("components {i} and {j} are only {d} apart")));
                }
            }
        }
        self.well_separated = true;
        Ok(self)
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.components.iter().any(|s| s.contains(x))
    }

    pub fn near_boundary(&self, x: &Point, d: f64) -> bool {
        self.components.iter().any(|s| s.near_boundary(x, d, self.dim))
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for s in &self.components {
            let (a, b) = s.bounding_box(self.dim);
            for i in 0..3 {
                lo[i] = lo[i].min(a[i]);
                hi[i] = hi[i].max(b[i]);
            }
        }
        for i in self.dim..3 {
            lo[i] = 0.0;
            hi[i] = 0.0;
        }
        (lo, hi)
    }

    pub fn volume_rule(&self, order: usize) -> VolumeRule {
        let mut rule = VolumeRule::empty(self.dim);
        for s in &self.components {
            rule.extend(s.volume_rule(self.dim, order));
        }
        rule
    }

    pub fn boundary_mesh(&self, samples: usize) -> Vec<BoundaryPoint> {
        self.components.iter().flat_map(|s| s.boundary_mesh(self.dim, samples)).collect()
    }

    /// Default mesh density: 2^10 samples in the plane, 2^14 in space.
    pub fn default_boundary_mesh(&self) -> Vec<BoundaryPoint> {
        self.boundary_mesh(if self.dim == 2 { 1 << 10 } else { 1 << 14 })
    }

    pub fn diameter(&self) -> f64 {
        if let [Shape::Ball { radius, .. }] = self.components.as_slice() {
            return 2.0 * radius;
        }
        let mesh = self.boundary_mesh(if self.dim == 2 { 512 } else { 1024 });
        let stride = (mesh.len() / 2000).max(1);
        let pts: Vec<Point> = mesh.iter().step_by(stride).map(|b| b.point).collect();
        let mut best: f64 = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                best = best.max(point::dist(&pts[i], &pts[j]));
            }
        }
        best
    }

    pub fn ray_intervals(&self, x: &Point, d: &Point, t_max: f64) -> Vec<(f64, f64)> {
        let mut all: Vec<(f64, f64)> = self.components.iter().flat_map(|s| s.ray_intervals(x, d, t_max, self.dim)).collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = vec![];
        for (a, b) in all {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        merged
    }

    pub fn feature_size(&self) -> f64 {
        self.components.iter().map(|s| s.feature_size(self.dim)).fold(f64::INFINITY, f64::min)
    }
}

/// Whether the complement cell next to `p` is reachable from outside the
/// bounding box by a face-adjacent path of complement cells.
pub fn connected_to_infinity(p: &Point, domain: &Domain, resolution: f64) -> Result<bool> {
    if !(resolution > 0.0) {
        return Err(Error::Domain("grid resolution must be positive".into()));
    }
    let dim = domain.dim;
    let (lo, hi) = domain.bounding_box();
    let grid = crate::grid::Grid::covering(dim, &lo, &hi, &[0.5 * resolution; 3], resolution, 2)?;
    let outside: Vec<bool> = grid.points().map(|x| !domain.contains(&x)).collect();
    let mut reached = vec![false; grid.len()];
    let mut queue = VecDeque::new();
    reached[0] = true;
    queue.push_back(0usize);
    while let Some(idx) = queue.pop_front() {
        let m = grid.multi_index(idx);
        for axis in 0..dim {
            for delta in [-1, 1] {
                if let Some(nb) = grid.neighbor(m, axis, delta) {
                    let j = grid.index(nb);
                    if outside[j] && !reached[j] {
                        reached[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
    }
    let radius = 1.5 * resolution;
    let mut any_complement = false;
    for (idx, x) in grid.points().enumerate() {
        if point::dist(&x, p) <= radius && outside[idx] {
            any_complement = true;
            if reached[idx] {
                return Ok(true);
            }
        }
    }
    if !any_complement {
        return Err(Error::ResolutionTooCoarse(format!(
            "no complement cell within {radius} of the query point"
        )));
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cn_values() {
        assert!((compute_cn(2) - 1.0 / 6.0).abs() < 1e-15);
        // closed form (x + y)^3 / 3! maximised at x = y = 1/√2
        assert!((compute_cn(3) - 2f64.powf(1.5) / 6.0).abs() < 1e-12);
    }

    #[test]
    fn cn_symmetric_under_permutation() {
        // swapping x and y maps the monomial sum to itself, so the scan over a
        // reflected parameterisation yields the same supremum
        let fact = |k: i32| (1..=k).product::<i32>() as f64;
        let g = |x: f64, y: f64| {
            [(3, 0), (2, 1), (1, 2), (0, 3)].iter().map(|&(a, b)| x.powi(a) * y.powi(b) / (fact(a) * fact(b))).sum::<f64>()
        };
        let m = 20000;
        let s1 = (0..m).map(|i| 2.0 * PI * i as f64 / m as f64).map(|t| g(t.cos(), t.sin())).fold(f64::MIN, f64::max);
        let s2 = (0..m).map(|i| 2.0 * PI * i as f64 / m as f64).map(|t| g(t.sin(), t.cos())).fold(f64::MIN, f64::max);
        assert!((s1 - s2).abs() < 1e-12);
        assert!((s1 - compute_cn(3)).abs() < 1e-6);
    }

    #[test]
    fn pure_paraboloid_cap() {
        let cap = CurvatureCap::new(2, 10.0, Cubic::zero(2), 1.0, 2.0, 0.5).unwrap();
        assert_eq!(cap.k_minus, 10.0);
        assert_eq!(cap.k_plus, 10.0);
        assert!((cap.omega(&[0.2]) - 0.4).abs() < 1e-15);
        assert_eq!(cap.b, 2f64.sqrt() / 10.0);
        assert_eq!(cap.h, 0.1);
    }

    #[test]
    fn perturbed_cap_constants() {
        let cap = CurvatureCap::new(2, 10.0, Cubic { coeffs: vec![0.1] }, 1.0, 2.0, 0.5).unwrap();
        let spread = compute_cn(2) * 0.6 * 2f64.sqrt() / 10.0;
        assert!((cap.third_derivative - 0.6).abs() < 1e-15);
        assert!((cap.k_minus - (10.0 - spread)).abs() < 1e-14);
        assert!((cap.k_plus - (10.0 + spread)).abs() < 1e-14);
        // pinching holds on samples
        for i in 1..1000 {
            let x = -cap.b + 2.0 * cap.b * i as f64 / 1000.0;
            let w = cap.omega(&[x]);
            assert!(cap.k_minus * x * x <= w + 1e-15 && w <= cap.k_plus * x * x + 1e-15);
        }
    }

    #[test]
    fn inadmissible_perturbation() {
        let e = CurvatureCap::new(2, E, Cubic { coeffs: vec![100.0] }, 1.0, 2.0, 0.5).unwrap_err();
        assert!(matches!(e, Error::InadmissiblePerturbation(_)));
        assert!(matches!(CurvatureCap::new(2, 2.0, Cubic::zero(2), 1.0, 2.0, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn nesting_reports() {
        let pure = CurvatureCap::new(2, 5.0, Cubic::zero(2), 1.0, 2.0, 0.5).unwrap();
        let r = nesting_check(&pure);
        assert_eq!(r.violations, 0);
        assert_eq!(r.disagreements, 0);
        let cap = CurvatureCap::new(3, 10.0, Cubic { coeffs: vec![0.2, -0.1, 0.3, 0.05] }, 1.0, 2.0, 0.5).unwrap();
        let r = nesting_check(&cap);
        assert_eq!(r.violations, 0);
        assert!(r.samples > 5000);
        let omega: GraphFn = Arc::new(|xp: &[f64]| 5.0 * xp[0] * xp[0] * (1.0 - 0.9 * (40.0 * xp[0]).cos().abs()));
        let bad = CurvatureCap::custom(2, 5.0, 5.0, 5.0, 1.0, 2.0, 0.5, omega);
        assert!(nesting_check(&bad).violations > 0);
    }

    #[test]
    fn volume_rules_are_exact_on_simple_shapes() {
        let d = Domain::ball(2, [0.2, -0.1, 0.0], 1.3).unwrap();
        assert!((d.volume_rule(16).volume() - PI * 1.69).abs() < 1e-12);
        let d = Domain::ball(3, [0.0; 3], 2.0).unwrap();
        assert!((d.volume_rule(12).volume() - 4.0 / 3.0 * PI * 8.0).abs() < 1e-10);
        let ann = Domain::new(2, vec![Shape::Annulus { center: [0.0; 3], inner: 0.5, outer: 1.0 }]).unwrap();
        assert!((ann.volume_rule(12).volume() - PI * 0.75).abs() < 1e-12);
        let star = Domain::new(2, vec![Shape::StarPolar { center: [0.0; 3], cos: vec![1.0, 0.0, 0.2], sin: vec![0.0, 0.0, 0.0, 0.1] }]).unwrap();
        // area = π a0² + (π/2) Σ (a_j² + b_j²)
        let area = PI + 0.5 * PI * (0.04 + 0.01);
        assert!((star.volume_rule(24).volume() - area).abs() < 1e-12);
    }

    #[test]
    fn cap_region_rule_matches_paraboloid_volume() {
        let cap = CurvatureCap::new(2, 10.0, Cubic::zero(2), 1.0, 2.0, 0.5).unwrap();
        // ∫_{-a}^{a} (h - K x²) dx with a = √(h/K)
        let a = (cap.h / cap.k).sqrt();
        let exact = 4.0 / 3.0 * cap.h * a;
        assert!((cap.region_rule(20).volume() - exact).abs() < 1e-14);
        let top: f64 = cap.top_slice_rule(20).iter().map(|(_, w)| w).sum();
        assert!((top - 2.0 * a).abs() < 1e-14);
    }

    #[test]
    fn capped_ball_volume_and_membership() {
        let cap = CurvatureCap::new(2, 10.0, Cubic::zero(2), 1.0, 2.0, 0.5).unwrap();
        let cb = CappedBall::new(cap, 1.5, 1.0).unwrap();
        let shape = Shape::CappedBall(cb);
        let rule = shape.volume_rule(2, 40);
        // crude cell count as an independent volume estimate
        let h = 2e-3;
        let mut count = 0usize;
        for i in 0..1000 {
            for j in 0..1250 {
                let p = [-1.0 + (i as f64 + 0.5) * h, (j as f64 + 0.5) * h * 2.0, 0.0];
                if shape.contains(&p) {
                    count += 1;
                }
            }
        }
        let cells = count as f64 * h * 2.0 * h;
        assert!((rule.volume() - cells).abs() < 5e-3, "{} vs {}", rule.volume(), cells);
        assert!(shape.contains(&[0.0, 0.05, 0.0]));
        assert!(!shape.contains(&[0.0, -0.01, 0.0]));
        assert!(!shape.contains(&[0.3, 0.2, 0.0]));
    }

    #[test]
    fn boundary_meshes_integrate_surface_measure() {
        let b = Domain::ball(3, [0.0; 3], 1.0).unwrap();
        let s: f64 = b.boundary_mesh(2000).iter().map(|p| p.weight).sum();
        assert!((s - 4.0 * PI).abs() < 1e-10);
        let bx = Domain::new(2, vec![Shape::Box { lo: [0.0; 3], hi: [1.0, 2.0, 0.0] }]).unwrap();
        let s: f64 = bx.boundary_mesh(64).iter().map(|p| p.weight).sum();
        assert!((s - 6.0).abs() < 1e-12);
        let poly = Domain::new(2, vec![Shape::RoundedPolygon(RoundedPolygon { vertices: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], radius: 0.1 })]).unwrap();
        let s: f64 = poly.boundary_mesh(400).iter().map(|p| p.weight).sum();
        assert!((s - (2.0 + 2f64.sqrt() + 0.2 * PI)).abs() < 1e-10);
    }

    #[test]
    fn ray_intervals_through_annulus() {
        let d = Domain::new(2, vec![Shape::Annulus { center: [0.0; 3], inner: 0.5, outer: 1.0 }]).unwrap();
        let iv = d.ray_intervals(&[-2.0, 0.0, 0.0], &[1.0, 0.0, 0.0], 10.0);
        assert_eq!(iv.len(), 2);
        assert!((iv[0].0 - 1.0).abs() < 1e-12 && (iv[0].1 - 1.5).abs() < 1e-12);
        let star = Domain::new(2, vec![Shape::StarPolar { center: [0.0; 3], cos: vec![1.0], sin: vec![] }]).unwrap();
        let iv = star.ray_intervals(&[0.0; 3], &[0.0, 1.0, 0.0], 5.0);
        assert_eq!(iv.len(), 1);
        assert!((iv[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn connectivity() {
        let ball = Domain::ball(2, [0.0; 3], 1.0).unwrap();
        assert!(connected_to_infinity(&[1.0, 0.0, 0.0], &ball, 0.05).unwrap());
        let ann = Domain::new(2, vec![Shape::Annulus { center: [0.0; 3], inner: 0.5, outer: 1.0 }]).unwrap();
        assert!(!connected_to_infinity(&[0.5, 0.0, 0.0], &ann, 0.05).unwrap());
        assert!(connected_to_infinity(&[1.0, 0.0, 0.0], &ann, 0.05).unwrap());
        let cap = CurvatureCap::new(2, 10.0, Cubic::zero(2), 1.0, 2.0, 0.5).unwrap();
        let capped = Domain::new(2, vec![Shape::CappedBall(CappedBall::new(cap, 1.5, 1.0).unwrap())]).unwrap();
        assert!(connected_to_infinity(&[0.0; 3], &capped, 0.01).unwrap());
        let deep = [0.0, 0.0, 0.0];
        let big = Domain::ball(2, [0.0; 3], 5.0).unwrap();
        assert!(matches!(connected_to_infinity(&deep, &big, 0.1), Err(Error::ResolutionTooCoarse(_))));
    }
}
