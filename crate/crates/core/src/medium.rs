//! Medium scattering through the Lippmann–Schwinger equation
//! `u + k² G(V u) = u^i` discretised on a regular grid.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::grid::Grid;
use crate::point::{self, Point};
use crate::quadrature::gauss_legendre_on;
use crate::source::{far_field_constant, green, Directions, FarField, Intensity};
use crate::specfun::{hankel1, Order};

type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);

#[derive(Debug, Clone)]
pub enum IncidentField {
    PlaneWave { direction: Point },
    /// `∫ e^{ik x·d} g(d) ds(d)` with `g` sampled on uniform directions.
    Herglotz { directions: Directions, density: Vec<C> },
    /// Harmonic exponential `e^{ρ·x}`.
    Cgo { rho: [C; 3] },
}

impl IncidentField {
    pub fn plane_wave(direction: Point) -> Result<IncidentField> {
        let r = point::norm(&direction);
        if !(r > 0.0) {
            return Err(Error::Domain("plane-wave direction must be nonzero".into()));
        }
        Ok(IncidentField::PlaneWave { direction: point::scale(&direction, 1.0 / r) })
    }

    /// Herglotz wave with density `g(d)` on `count` uniform directions.
    pub fn herglotz(dim: usize, count: usize, g: impl Fn(&Point) -> C) -> Result<IncidentField> {
        let directions = Directions::uniform(dim, count)?;
        let density = directions.points.iter().map(g).collect();
        Ok(IncidentField::Herglotz { directions, density })
    }

    pub fn eval(&self, x: &Point, k: f64) -> C {
        match self {
            IncidentField::PlaneWave { direction } => C::from_polar(1.0, k * point::dot(direction, x)),
            IncidentField::Herglotz { directions, density } => directions
                .points
                .iter()
                .zip(density)
                .zip(&directions.weights)
                .map(|((d, g), w)| g * C::from_polar(*w, k * point::dot(d, x)))
                .sum(),
            IncidentField::Cgo { rho } => (0..3).map(|i| rho[i] * x[i]).sum::<C>().exp(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MediumScene {
    pub domain: Domain,
    /// Contrast `φ`; the medium is `V = χ_Ω φ`.
    pub contrast: Intensity,
    pub k: f64,
    pub incident: IncidentField,
}

impl MediumScene {
    pub fn new(domain: Domain, contrast: Intensity, k: f64, incident: IncidentField) -> Result<MediumScene> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Domain(format!("wavenumber must be positive, got {k}")));
        }
        let scene = MediumScene { domain, contrast, k, incident };
        let rule = scene.domain.volume_rule(16);
        if let Some(p) = rule.nodes.iter().find(|p| scene.contrast.eval(p).im < -1e-12) {
            return Err(Error::Domain(format!("contrast has negative imaginary part at {p:?}")));
        }
        Ok(scene)
    }

    pub fn dim(&self) -> usize {
        self.domain.dim
    }

    /// Sup of `|V|` sampled on a volume rule.
    pub fn contrast_sup(&self) -> f64 {
        let rule = self.domain.volume_rule(24);
        rule.nodes.iter().map(|p| self.contrast.eval(p).norm()).fold(0.0, f64::max)
    }

    /// Centre and radius of a ball containing the domain.
    pub fn enclosing_ball(&self) -> (Point, f64) {
        let (lo, hi) = self.domain.bounding_box();
        let c = point::scale(&point::add(&lo, &hi), 0.5);
        (c, 0.5 * point::dist(&lo, &hi))
    }
}

/// Integral of the kernel over a grid cell offset by `d` cells from the target.
fn cell_weight(k: f64, dim: usize, h: f64, d: [i64; 3]) -> C {
    let linf = d.iter().map(|v| v.abs()).max().unwrap();
    if linf == 0 {
        return self_cell(k, dim, h);
    }
    if linf <= 3 {
        let q = if linf == 1 { 24 } else { 12 };
        let axes: Vec<(Vec<f64>, Vec<f64>)> = (0..dim).map(|i| gauss_legendre_on(q, (d[i] as f64 - 0.5) * h, (d[i] as f64 + 0.5) * h)).collect();
        let mut s = ZERO;
        let zq = if dim == 3 { q } else { 1 };
        for a in 0..q {
            for b in 0..q {
                for c in 0..zq {
                    let mut y = [axes[0].0[a], axes[1].0[b], 0.0];
                    let mut w = axes[0].1[a] * axes[1].1[b];
                    if dim == 3 {
                        y[2] = axes[2].0[c];
                        w *= axes[2].1[c];
                    }
                    s += green(k, dim, point::norm(&y)).expect("positive distance") * w;
                }
            }
        }
        return s;
    }
    let r = h * ((d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) as f64).sqrt();
    // midpoint rule with the Laplacian correction ΔG = -k² G
    green(k, dim, r).expect("positive distance") * (h.powi(dim as i32) * (1.0 - k * k * h * h * dim as f64 / 24.0))
}

/// `∫` of the kernel over the cell containing the singularity, in polar
/// coordinates with the radial part in closed form.
fn self_cell(k: f64, dim: usize, h: f64) -> C {
    let half = 0.5 * h;
    if dim == 2 {
        let radial = |rho: f64| {
            let h1 = hankel1(Order::Integer(1), k * rho).expect("positive argument");
            C::new(0.0, -0.25) * (h1 * (rho / k) + C::new(0.0, 2.0 / (PI * k * k)))
        };
        let (ts, ws) = gauss_legendre_on(32, 0.0, PI / 4.0);
        8.0 * ts.iter().zip(&ws).map(|(t, w)| radial(half / t.cos()) * *w).sum::<C>()
    } else {
        let i = C::new(0.0, 1.0);
        let radial = |rho: f64| -((i * k * rho).exp() * (rho / (i * k) + 1.0 / (k * k)) - 1.0 / (k * k)) / (4.0 * PI);
        let (ss, ws) = gauss_legendre_on(24, -half, half);
        let mut s = ZERO;
        for (a, wa) in ss.iter().zip(&ws) {
            for (b, wb) in ss.iter().zip(&ws) {
                let r = (half * half + a * a + b * b).sqrt();
                s += radial(r) * (half / (r * r * r) * wa * wb);
            }
        }
        s * 6.0
    }
}

/// Multi-dimensional FFT over a padded box, axis by axis.
struct FftBox {
    dim: usize,
    shape: [usize; 3],
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl FftBox {
    fn new(dim: usize, shape: [usize; 3]) -> FftBox {
        let mut planner = FftPlanner::new();
        let forward = (0..dim).map(|i| planner.plan_fft_forward(shape[i])).collect();
        let inverse = (0..dim).map(|i| planner.plan_fft_inverse(shape[i])).collect();
        FftBox { dim, shape, forward, inverse }
    }

    fn len(&self) -> usize {
        self.shape.iter().product()
    }

    fn transform(&self, buf: &mut [C], inverse: bool) {
        let plans = if inverse { &self.inverse } else { &self.forward };
        let [n0, n1, n2] = self.shape;
        for axis in 0..self.dim {
            let len = self.shape[axis];
            let plan = &plans[axis];
            if axis == 0 {
                buf.par_chunks_mut(n0 * 64.min(n1 * n2)).for_each(|c| plan.process(c));
                continue;
            }
            let lines = buf.len() / len;
            // gather lines along `axis` into contiguous storage
            let idx = |line: usize, j: usize| -> usize {
                if axis == 1 {
                    let (i0, i2) = (line % n0, line / n0);
                    (i2 * n1 + j) * n0 + i0
                } else {
                    let (i0, i1) = (line % n0, line / n0);
                    (j * n1 + i1) * n0 + i0
                }
            };
            let mut tmp = vec![ZERO; buf.len()];
            tmp.par_chunks_mut(len).enumerate().for_each(|(line, out)| {
                for (j, v) in out.iter_mut().enumerate() {
                    *v = buf[idx(line, j)];
                }
            });
            tmp.par_chunks_mut(len * 64.min(lines)).for_each(|c| plan.process(c));
            for line in 0..lines {
                for j in 0..len {
                    buf[idx(line, j)] = tmp[line * len + j];
                }
            }
        }
    }
}

/// Discrete volume potential `(G g)_i = Σ_j W(i - j) g_j` on a grid, by FFT.
pub struct GridPotential {
    grid: Grid,
    fft: FftBox,
    kernel_hat: Vec<C>,
}

impl GridPotential {
    pub fn new(grid: &Grid, k: f64) -> GridPotential {
        let dim = grid.dim;
        let mut pshape = [1; 3];
        for i in 0..dim {
            pshape[i] = 2 * grid.shape[i];
        }
        let fft = FftBox::new(dim, pshape);
        // weights on the nonnegative octant, mirrored by symmetry
        let n = grid.shape;
        let oct: Vec<C> = (0..n[0] * n[1] * n[2])
            .into_par_iter()
            .map(|idx| {
                let d = [(idx % n[0]) as i64, ((idx / n[0]) % n[1]) as i64, (idx / (n[0] * n[1])) as i64];
                cell_weight(k, dim, grid.spacing, d)
            })
            .collect();
        let mut kernel = vec![ZERO; fft.len()];
        for (p, slot) in kernel.iter_mut().enumerate() {
            let m = [p % pshape[0], (p / pshape[0]) % pshape[1], p / (pshape[0] * pshape[1])];
            let mut d = [0usize; 3];
            let mut valid = true;
            for i in 0..3 {
                if m[i] < n[i] {
                    d[i] = m[i];
                } else if m[i] > pshape[i] - n[i] {
                    d[i] = pshape[i] - m[i];
                } else {
                    valid = false;
                }
            }
            if valid {
                *slot = oct[(d[2] * n[1] + d[1]) * n[0] + d[0]];
            }
        }
        fft.transform(&mut kernel, false);
        GridPotential { grid: grid.clone(), fft, kernel_hat: kernel }
    }

    pub fn apply(&self, g: &[C]) -> Vec<C> {
        self.apply_with(g, false)
    }

    /// Adjoint `(G^H g)_i = Σ_j conj(W(j - i)) g_j`.
    pub fn apply_adjoint(&self, g: &[C]) -> Vec<C> {
        self.apply_with(g, true)
    }

    fn apply_with(&self, g: &[C], adjoint: bool) -> Vec<C> {
        let p = self.fft.shape;
        let mut buf = vec![ZERO; self.fft.len()];
        for (i, v) in g.iter().enumerate() {
            let m = self.grid.multi_index(i);
            buf[(m[2] * p[1] + m[1]) * p[0] + m[0]] = *v;
        }
        self.fft.transform(&mut buf, false);
        // W is even in the offset, so the adjoint only conjugates it
        buf.par_iter_mut().zip(self.kernel_hat.par_iter()).for_each(|(b, kh)| {
            let kk = if adjoint { self.conj_hat(kh) } else { *kh };
            *b *= kk;
        });
        self.fft.transform(&mut buf, true);
        let scale = 1.0 / self.fft.len() as f64;
        (0..g.len())
            .map(|i| {
                let m = self.grid.multi_index(i);
                buf[(m[2] * p[1] + m[1]) * p[0] + m[0]] * scale
            })
            .collect()
    }

    /// The transform of the conjugated kernel; for an even kernel it is the
    /// conjugate of the transform.
    fn conj_hat(&self, kh: &C) -> C {
        kh.conj()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    /// Neumann iteration, falling back to GMRES when it does not contract.
    Auto,
    Neumann,
    Gmres,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub spacing: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub method: Method,
    /// Sub-samples per axis for boundary cell fractions.
    pub supersample: usize,
}

impl SolveOptions {
    /// Spacing resolving both the domain and the interior wavelength.
    pub fn for_scene(scene: &MediumScene) -> SolveOptions {
        let diam = scene.domain.diameter();
        let k_in = scene.k * (1.0 + scene.contrast_sup()).sqrt();
        let spacing = (diam / 64.0).min(2.0 * PI / (k_in * 24.0));
        SolveOptions { spacing, tol: 1e-10, max_iter: 2000, method: Method::Auto, supersample: if scene.dim() == 2 { 32 } else { 8 } }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationLog {
    pub method: Method,
    pub fell_back: bool,
    /// Relative residuals `‖u + k²G(Vu) - u^i‖ / ‖u^i‖` per iteration.
    pub residuals: Vec<f64>,
    /// Ratios of successive Neumann update norms.
    pub ratios: Vec<f64>,
}

impl IterationLog {
    /// Largest update ratio after the first few iterations (transient excluded).
    pub fn observed_ratio(&self) -> f64 {
        self.ratios.iter().skip(2).copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct LsSolution {
    pub grid: Grid,
    pub total: Vec<C>,
    pub incident: Vec<C>,
    /// `V` per cell, weighted by the covered cell fraction.
    pub contrast: Vec<C>,
    pub log: IterationLog,
}

impl LsSolution {
    pub fn scattered(&self) -> Vec<C> {
        self.total.iter().zip(&self.incident).map(|(u, i)| u - i).collect()
    }
}

fn norm2(v: &[C]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn dotc(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Grid covering the domain with cell fractions.
pub fn discretize(scene: &MediumScene, spacing: f64, supersample: usize) -> Result<(Grid, Vec<C>)> {
    let (lo, hi) = scene.domain.bounding_box();
    let grid = Grid::covering(scene.dim(), &lo, &hi, &[0.0; 3], spacing, 1)?;
    let d = &scene.domain;
    let frac = grid.cell_fractions(&|p| d.contains(p), &|p, r| d.near_boundary(p, r), supersample);
    let v = frac
        .par_iter()
        .enumerate()
        .map(|(i, f)| if *f > 0.0 { scene.contrast.eval(&grid.point(i)) * *f } else { ZERO })
        .collect();
    Ok((grid, v))
}

/// Solves `u + k² G(V u) = u^i` on the grid.
pub fn solve_ls(scene: &MediumScene, opts: &SolveOptions) -> Result<LsSolution> {
    let (grid, v) = discretize(scene, opts.spacing, opts.supersample)?;
    let k = scene.k;
    let incident: Vec<C> = (0..grid.len()).into_par_iter().map(|i| scene.incident.eval(&grid.point(i), k)).collect();
    let pot = GridPotential::new(&grid, k);
    let k2 = k * k;
    let apply = |u: &[C]| -> Vec<C> {
        let vu: Vec<C> = u.iter().zip(&v).map(|(a, b)| a * b).collect();
        let g = pot.apply(&vu);
        u.iter().zip(&g).map(|(a, b)| a + b * k2).collect()
    };
    let b_norm = norm2(&incident).max(f64::MIN_POSITIVE);
    let mut log = IterationLog { method: opts.method, fell_back: false, residuals: vec![], ratios: vec![] };

    let mut u = incident.clone();
    let neumann_ok = if opts.method == Method::Gmres {
        false
    } else {
        let mut prev_step = f64::INFINITY;
        let mut done = false;
        let mut slow = 0;
        for _ in 0..opts.max_iter {
            let au = apply(&u);
            let res: Vec<C> = au.iter().zip(&incident).map(|(a, b)| a - b).collect();
            let r = norm2(&res) / b_norm;
            log.residuals.push(r);
            if r <= opts.tol {
                done = true;
                break;
            }
            // u ← u^i - k² G(V u) = u - (A u - u^i)
            let step = norm2(&res);
            if prev_step.is_finite() {
                let ratio = step / prev_step;
                log.ratios.push(ratio);
                if ratio > 0.98 {
                    slow += 1;
                } else {
                    slow = 0;
                }
                if slow >= 3 || !r.is_finite() || r > 1e6 {
                    break;
                }
            }
            prev_step = step;
            u.iter_mut().zip(&res).for_each(|(a, b)| *a -= b);
        }
        done
    };
    if !neumann_ok {
        if opts.method == Method::Neumann {
            return Err(Error::NotContractive { iterations: log.residuals.len(), residual: log.residuals.last().copied().unwrap_or(f64::NAN) });
        }
        log.fell_back = opts.method == Method::Auto;
        let start = if log.residuals.last().is_some_and(|r| r.is_finite() && *r < 1.0) { u } else { incident.clone() };
        let (x, converged) = gmres(&apply, &incident, start, opts.tol, 80, opts.max_iter, &mut log.residuals);
        if !converged {
            return Err(Error::NotContractive { iterations: log.residuals.len(), residual: log.residuals.last().copied().unwrap_or(f64::NAN) });
        }
        u = x;
    }
    Ok(LsSolution { grid, total: u, incident, contrast: v, log })
}

/// Restarted GMRES with modified Gram–Schmidt; appends relative residuals to `history`.
fn gmres(apply: &dyn Fn(&[C]) -> Vec<C>, b: &[C], mut x: Vec<C>, tol: f64, restart: usize, max_iter: usize, history: &mut Vec<f64>) -> (Vec<C>, bool) {
    let b_norm = norm2(b).max(f64::MIN_POSITIVE);
    let mut iters = 0;
    while iters < max_iter {
        let ax = apply(&x);
        let r: Vec<C> = b.iter().zip(&ax).map(|(a, c)| a - c).collect();
        let beta = norm2(&r);
        history.push(beta / b_norm);
        if beta / b_norm <= tol {
            return (x, true);
        }
        let mut basis: Vec<Vec<C>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut hess: Vec<Vec<C>> = vec![];
        let mut cs: Vec<C> = vec![];
        let mut sn: Vec<C> = vec![];
        let mut g = vec![C::new(beta, 0.0)];
        for j in 0..restart {
            iters += 1;
            let mut w = apply(&basis[j]);
            let mut col = vec![ZERO; j + 2];
            for (i, q) in basis.iter().enumerate() {
                let hij = dotc(q, &w);
                col[i] = hij;
                w.iter_mut().zip(q).for_each(|(a, b)| *a -= hij * b);
            }
            let wn = norm2(&w);
            col[j + 1] = C::new(wn, 0.0);
            for i in 0..j {
                let t = cs[i].conj() * col[i] + sn[i].conj() * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let denom = (col[j].norm_sqr() + col[j + 1].norm_sqr()).sqrt();
            let (c, s) = if denom == 0.0 { (C::new(1.0, 0.0), ZERO) } else { (col[j] / denom, col[j + 1] / denom) };
            col[j] = C::new(denom, 0.0);
            col[j + 1] = ZERO;
            g.push(-s * g[j]);
            g[j] = c.conj() * g[j];
            cs.push(c);
            sn.push(s);
            hess.push(col);
            let rel = g[j + 1].norm() / b_norm;
            history.push(rel);
            if wn > 0.0 {
                basis.push(w.iter().map(|v| v / wn).collect());
            }
            if rel <= tol * 0.5 || wn == 0.0 || iters >= max_iter {
                break;
            }
        }
        // back substitution on the triangular system
        let m = hess.len();
        let mut y = vec![ZERO; m];
        for i in (0..m).rev() {
            let mut s = g[i];
            for (jj, yj) in y.iter().enumerate().skip(i + 1) {
                s -= hess[jj][i] * yj;
            }
            y[i] = s / hess[i][i];
        }
        for (q, yi) in basis.iter().zip(&y) {
            x.iter_mut().zip(q).for_each(|(a, b)| *a += yi * b);
        }
    }
    let ax = apply(&x);
    let r: Vec<C> = b.iter().zip(&ax).map(|(a, c)| a - c).collect();
    let rel = norm2(&r) / b_norm;
    history.push(rel);
    (x, rel <= tol)
}

/// Power-iteration estimate of `‖G‖` on `L²(B(0, R))`, a lower bound for the norm.
pub fn estimate_c0(k: f64, radius: f64, n: usize, n_probe: usize) -> Result<f64> {
    estimate_c0_with_spacing(k, radius, n, n_probe, radius / if n == 2 { 48.0 } else { 16.0 })
}

pub fn estimate_c0_with_spacing(k: f64, radius: f64, n: usize, n_probe: usize, spacing: f64) -> Result<f64> {
    if n_probe < 10 {
        return Err(Error::Domain(format!("need at least 10 probes, got {n_probe}")));
    }
    if !(k > 0.0 && radius > 0.0) {
        return Err(Error::Domain("wavenumber and radius must be positive".into()));
    }
    let lo = [-radius; 3];
    let hi = [radius; 3];
    let grid = Grid::covering(n, &lo, &hi, &[0.0; 3], spacing, 0)?;
    let mask: Vec<bool> = grid.points().map(|p| point::norm(&p) < radius).collect();
    let pot = GridPotential::new(&grid, k);
    let restrict = |v: &mut Vec<C>| v.iter_mut().zip(&mask).for_each(|(a, m)| if !m { *a = ZERO });
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0);
    let mut x: Vec<C> = (0..grid.len()).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    restrict(&mut x);
    let mut est: f64 = 0.0;
    for _ in 0..n_probe {
        let xn = norm2(&x);
        x.iter_mut().for_each(|v| *v /= xn);
        let mut y = pot.apply(&x);
        restrict(&mut y);
        est = est.max(norm2(&y));
        let mut z = pot.apply_adjoint(&y);
        restrict(&mut z);
        x = z;
    }
    Ok(est)
}

/// Young-inequality bound `∫_{|z| < 2R} |G(z)| dz` for the operator norm on `L²(B_R)`.
pub fn c0_upper_bound(k: f64, radius: f64, n: usize) -> Result<f64> {
    let meas = crate::specfun::sphere_measure(n as u32 - 1);
    let v = crate::quadrature::integrate_1d(
        |r| C::new(green(k, n, r).map(|g| g.norm()).unwrap_or(0.0) * r.powi(n as i32 - 1), 0.0),
        0.0,
        2.0 * radius,
        1e-8,
    )?;
    Ok(meas * v.re)
}

/// `k² C₀ ‖V‖_∞` for the scene, with `C₀` estimated on its enclosing ball.
pub fn contraction_factor(scene: &MediumScene) -> Result<f64> {
    let (_, r) = scene.enclosing_ball();
    Ok(scene.k * scene.k * estimate_c0(scene.k, r, scene.dim(), 30)? * scene.contrast_sup())
}

/// Far field `-k² C_{n,k} ∫ e^{-ik x̂·y} V u dy` of the scattered wave.
///
/// Each cell integrates the exponential exactly with `V u` frozen at the node.
pub fn scattered_far_field(scene: &MediumScene, sol: &LsSolution, n_dirs: usize) -> Result<FarField> {
    let dim = scene.dim();
    let dirs = Directions::uniform(dim, n_dirs)?;
    let k = scene.k;
    let h = sol.grid.spacing;
    let c = far_field_constant(k, dim) * (-k * k) * h.powi(dim as i32);
    let active: Vec<(Point, C)> = (0..sol.grid.len())
        .filter(|&i| sol.contrast[i] != ZERO)
        .map(|i| (sol.grid.point(i), sol.contrast[i] * sol.total[i]))
        .collect();
    let sinc = |t: f64| if t.abs() < 1e-8 { 1.0 - t * t / 6.0 } else { t.sin() / t };
    let values = dirs
        .points
        .par_iter()
        .map(|d| {
            let cell: f64 = (0..dim).map(|i| sinc(0.5 * k * d[i] * h)).product();
            let s: C = active.iter().map(|(y, g)| g * C::from_polar(1.0, -k * point::dot(d, y))).sum();
            c * s * cell
        })
        .collect();
    Ok(FarField { k, directions: dirs, values })
}

/// `sup_{∂Ω} |φ u^i| / diam(Ω)^α`
pub fn scatter_visibility_ratio(scene: &MediumScene, alpha: f64) -> f64 {
    let diam = scene.domain.diameter();
    let sup = scene
        .domain
        .default_boundary_mesh()
        .iter()
        .map(|b| (scene.contrast.eval(&b.point) * scene.incident.eval(&b.point, scene.k)).norm())
        .fold(0.0, f64::max);
    sup / diam.powf(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::bessel_j;

    fn disk(r: f64, v: f64, k: f64) -> MediumScene {
        MediumScene::new(Domain::ball(2, [0.0; 3], r).unwrap(), Intensity::constant(v), k, IncidentField::plane_wave([1.0, 0.0, 0.0]).unwrap()).unwrap()
    }

    #[test]
    fn herglotz_constant_density_is_bessel() {
        let inc = IncidentField::herglotz(2, 64, |_| C::new(1.0 / (2.0 * PI), 0.0)).unwrap();
        for x in [[0.3, 0.1, 0.0], [1.5, -2.0, 0.0]] {
            let v = inc.eval(&x, 2.0);
            assert!((v - bessel_j(Order::Integer(0), 2.0 * point::norm(&x))).norm() < 1e-13);
        }
        let pw = IncidentField::plane_wave([0.0, 2.0, 0.0]).unwrap();
        assert!((pw.eval(&[0.4, 0.7, 0.0], 1.0).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn self_cell_matches_direct_quadrature() {
        // polar oracle about the centre, radial integrals by adaptive quadrature
        let (k, h) = (1.3, 0.1);
        for dim in [2usize, 3] {
            let w = self_cell(k, dim, h);
            let o = if dim == 2 {
                let f = |t: f64| {
                    let rho = 0.5 * h / t.cos();
                    crate::quadrature::integrate_1d(|r| green(k, 2, r).unwrap() * r, 0.0, rho, 1e-13).unwrap()
                };
                crate::quadrature::integrate_1d(f, 0.0, PI / 4.0, 1e-12).unwrap() * 8.0
            } else {
                let region = crate::quadrature::Region::boxed(3, [-0.5 * h; 3], [0.5 * h; 3]).unwrap();
                // the 1/r singularity is integrable; regularise by subtracting the static part
                let smooth = crate::quadrature::integrate(&|y: &Point| {
                    let r = point::norm(y);
                    -(C::new(0.0, k * r).exp() - 1.0) / (4.0 * PI * r)
                }, &region, 1e-12).unwrap();
                // static part ∫_cube -1/(4π r) = -(h²/4π) × 3 × ∫ over one face pyramid
                let (ss, ws) = gauss_legendre_on(40, -0.5 * h, 0.5 * h);
                let mut st = 0.0;
                for (a, wa) in ss.iter().zip(&ws) {
                    for (b, wb) in ss.iter().zip(&ws) {
                        let r2 = 0.25 * h * h + a * a + b * b;
                        st += 0.5 * r2 * (0.5 * h) / r2.powf(1.5) * wa * wb;
                    }
                }
                smooth - C::new(6.0 * st / (4.0 * PI), 0.0)
            };
            assert!((w - o).norm() < 1e-9 * o.norm(), "{dim}: {w} vs {o}");
        }
    }

    #[test]
    fn potential_matches_direct_sum() {
        let g = Grid::new(2, [0.0; 3], 0.1, [9, 7, 1]).unwrap();
        let k = 0.8;
        let pot = GridPotential::new(&g, k);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<C> = (0..g.len()).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let y = pot.apply(&x);
        let ya = pot.apply_adjoint(&x);
        for i in [0, 17, 40, 62] {
            let mi = g.multi_index(i);
            let mut direct = ZERO;
            let mut adj = ZERO;
            for j in 0..g.len() {
                let mj = g.multi_index(j);
                let d = [mi[0] as i64 - mj[0] as i64, mi[1] as i64 - mj[1] as i64, 0];
                let w = cell_weight(k, 2, 0.1, d);
                direct += w * x[j];
                adj += w.conj() * x[j];
            }
            assert!((y[i] - direct).norm() < 1e-12, "{i}");
            assert!((ya[i] - adj).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_contrast_returns_incident() {
        let scene = disk(1.0, 0.0, 0.5);
        let opts = SolveOptions { spacing: 0.1, ..SolveOptions::for_scene(&scene) };
        let sol = solve_ls(&scene, &opts).unwrap();
        assert_eq!(sol.log.residuals.len(), 1);
        assert!(sol.scattered().iter().all(|v| v.norm() == 0.0));
        assert_eq!(scattered_far_field(&scene, &sol, 16).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn small_contrast_contracts() {
        let scene = disk(1.0, 0.1, 0.5);
        let opts = SolveOptions { spacing: 1.0 / 32.0, ..SolveOptions::for_scene(&scene) };
        let sol = solve_ls(&scene, &opts).unwrap();
        assert!(!sol.log.fell_back);
        let q = contraction_factor(&scene).unwrap();
        assert!(q <= 0.5, "{q}");
        assert!(sol.log.observed_ratio() <= q * 1.1, "{} vs {q}", sol.log.observed_ratio());
        let inside: Vec<usize> = (0..sol.grid.len()).filter(|&i| point::norm(&sol.grid.point(i)) < 1.0).collect();
        let nu: f64 = inside.iter().map(|&i| sol.total[i].norm_sqr()).sum::<f64>().sqrt();
        let ni: f64 = inside.iter().map(|&i| sol.incident[i].norm_sqr()).sum::<f64>().sqrt();
        assert!(nu <= 2.0 * ni);
    }

    #[test]
    fn born_approximation_is_first_order() {
        let k = 0.5;
        for v in [0.05, 0.1] {
            let scene = disk(1.0, v, k);
            let opts = SolveOptions { spacing: 1.0 / 24.0, ..SolveOptions::for_scene(&scene) };
            let sol = solve_ls(&scene, &opts).unwrap();
            let born = LsSolution { total: sol.incident.clone(), ..sol.clone() };
            let a = scattered_far_field(&scene, &sol, 16).unwrap();
            let b = scattered_far_field(&scene, &born, 16).unwrap();
            let q = contraction_factor(&scene).unwrap();
            assert!(a.relative_error(&b) <= 2.0 * q, "{} {q}", a.relative_error(&b));
        }
    }

    #[test]
    fn plane_wave_reciprocity() {
        let k = 0.7;
        let dom = Domain::ball(2, [0.0; 3], 0.8).unwrap();
        let theta = [0.6f64.cos(), 0.6f64.sin(), 0.0];
        let xhat = [2.0f64.cos(), 2.0f64.sin(), 0.0];
        let solve = |inc: Point, out: Point| {
            let scene = MediumScene::new(dom.clone(), Intensity::constant(0.3), k, IncidentField::plane_wave(inc).unwrap()).unwrap();
            let opts = SolveOptions { spacing: 1.0 / 40.0, ..SolveOptions::for_scene(&scene) };
            let sol = solve_ls(&scene, &opts).unwrap();
            let h = sol.grid.spacing;
            let s: C = (0..sol.grid.len()).map(|i| sol.contrast[i] * sol.total[i] * C::from_polar(1.0, -k * point::dot(&out, &sol.grid.point(i)))).sum();
            s * h * h
        };
        let a = solve(theta, xhat);
        let b = solve(point::scale(&xhat, -1.0), point::scale(&theta, -1.0));
        assert!((a - b).norm() < 1e-6 * a.norm(), "{a} {b}");
    }

    #[test]
    fn strong_contrast_falls_back_to_gmres() {
        let scene = disk(1.0, 8.0, 2.0);
        let opts = SolveOptions { spacing: 1.0 / 24.0, ..SolveOptions::for_scene(&scene) };
        let sol = solve_ls(&scene, &opts).unwrap();
        assert!(sol.log.fell_back);
        assert!(*sol.log.residuals.last().unwrap() <= 1e-10);
        let only_neumann = SolveOptions { method: Method::Neumann, max_iter: 200, ..opts };
        assert!(matches!(solve_ls(&scene, &only_neumann), Err(Error::NotContractive { .. })));
    }

    #[test]
    fn c0_estimates() {
        let k = 0.5;
        let a = estimate_c0_with_spacing(k, 1.0, 2, 30, 1.0 / 24.0).unwrap();
        let b = estimate_c0_with_spacing(k, 1.0, 2, 30, 1.0 / 48.0).unwrap();
        assert!((a - b).abs() < 0.1 * b, "{a} {b}");
        let small = estimate_c0(k, 0.5, 2, 30).unwrap();
        assert!(small < b);
        assert!(b <= c0_upper_bound(k, 1.0, 2).unwrap());
        let c3 = estimate_c0(k, 1.0, 3, 20).unwrap();
        assert!(c3 > 0.0 && c3 <= c0_upper_bound(k, 1.0, 3).unwrap());
    }

    #[test]
    fn visibility_ratio_of_constant_disk() {
        let scene = disk(0.5, 2.0, 1.0);
        assert!((scatter_visibility_ratio(&scene, 0.5) - 2.0).abs() < 1e-12);
        let vanishing = MediumScene::new(Domain::ball(2, [0.0; 3], 1.0).unwrap(), Intensity::function(|p| C::new(1.0 - point::norm(p).powi(2), 0.0)), 1.0, IncidentField::plane_wave([1.0, 0.0, 0.0]).unwrap()).unwrap();
        assert!(scatter_visibility_ratio(&vanishing, 0.5) < 1e-12);
    }
}
