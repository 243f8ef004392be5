//! Integrals of harmonic exponentials `exp(ρ·x)` over paraboloid regions, the
//! bounds built from them, and the local curvature estimate.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::CurvatureCap;
use crate::grid::SampledFunction;
use crate::holder::pde_residual;
use crate::jet::Jet;
use crate::point::{Point, ORIGIN};
use crate::quadrature::{integrate, GraphFn, Region, Top};
use crate::specfun::{gamma_fn, lower_incomplete_gamma, sphere_measure};

type C = Complex64;

/// Complex frequency `ρ` with `ρ·ρ = 0` (bilinear) and decaying last component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgoVector {
    pub n: usize,
    pub rho: [C; 3],
    pub tau: f64,
}

impl CgoVector {
    /// `ρ = iτ e₁ - τ e_n`
    pub fn canonical(n: usize, tau: f64) -> Result<CgoVector> {
        if !(tau > 0.0) {
            return Err(Error::Domain(format!("tau must be positive, got {tau}")));
        }
        let mut rho = [C::new(0.0, 0.0); 3];
        rho[0] = C::new(0.0, tau);
        rho[n - 1] = C::new(-tau, 0.0);
        CgoVector::new(n, rho)
    }

    /// Arbitrary `ρ`; `tau` is recorded as `-Re ρ_n`.
    pub fn new(n: usize, rho: [C; 3]) -> Result<CgoVector> {
        if !(n == 2 || n == 3) {
            return Err(Error::Domain(format!("dimension {n} unsupported")));
        }
        let dot: C = rho[..n].iter().map(|r| r * r).sum();
        let scale: f64 = rho[..n].iter().map(|r| r.norm_sqr()).sum();
        if dot.norm() > 1e-12 * scale.max(1.0) {
            return Err(Error::Domain(format!("rho·rho = {dot} is not zero")));
        }
        Ok(CgoVector { n, rho, tau: -rho[n - 1].re })
    }

    pub fn rho_n(&self) -> C {
        self.rho[self.n - 1]
    }

    pub fn eval(&self, x: &Point) -> C {
        let s: C = (0..self.n).map(|i| self.rho[i] * x[i]).sum();
        s.exp()
    }
}

/// `∫_ℝ exp(A t² + B t) dt = √(-π/A) exp(-B²/4A)` for `Re A < 0`.
pub fn complex_gaussian(a: C, b: C) -> Result<C> {
    if !(a.re < 0.0) {
        return Err(Error::Domain(format!("Gaussian integral diverges for Re A = {}", a.re)));
    }
    Ok((-PI / a).sqrt() * (-b * b / (4.0 * a)).exp())
}

/// `∫_{x_n > K|x'|²} exp(ρ·x) dx` in closed form.
pub fn cgo_over_parabola(rho: &CgoVector, k: f64, n: usize) -> Result<C> {
    let rn = rho.rho[n - 1];
    if !(rn.re < 0.0) {
        return Err(Error::Domain(format!("integral diverges for Re rho_n = {}", rn.re)));
    }
    if !(k > 0.0) {
        return Err(Error::Domain(format!("curvature must be positive, got {k}")));
    }
    let mut v = -1.0 / rn;
    for r in &rho.rho[..n - 1] {
        v *= complex_gaussian(rn * k, *r)?;
    }
    Ok(v)
}

/// Constant in the tail bound: `max(1, 2^{(n+1)/2-2}) max(Γ((n+1)/2), 1) σ(S^{n-2}) / (n-1)`.
pub fn tail_constant(n: usize) -> f64 {
    let m = (n as f64 + 1.0) / 2.0;
    let g = gamma_fn(m).expect("positive argument");
    1f64.max(2f64.powf(m - 2.0)) * g.max(1.0) * sphere_measure(n as u32 - 2) / (n as f64 - 1.0)
}

/// Upper bound for `∫_{x_n > max(h, K|x'|²)} exp(-τ x_n) dx`.
pub fn cgo_tail_bound(tau: f64, k: f64, h: f64, n: usize) -> f64 {
    let m = (n as f64 - 1.0) / 2.0;
    tail_constant(n) * (1.0 + (tau * h).powf(m)) / (tau.powf(m + 1.0) * k.powf(m)) * (-tau * h).exp()
}

/// Exact `∫_{K₋|x'|² < x_n < h} \ {K₊|x'|² < x_n < h} exp(-τ x_n) dx`.
pub fn cgo_sliced(tau: f64, k_minus: f64, k_plus: f64, h: f64, n: usize) -> Result<f64> {
    if !(k_minus > 0.0 && k_minus <= k_plus && tau > 0.0 && h > 0.0) {
        return Err(Error::Domain("need 0 < K- <= K+ and tau, h > 0".into()));
    }
    let m = (n as f64 - 1.0) / 2.0;
    let spread = k_minus.powf(-m) - k_plus.powf(-m);
    Ok(sphere_measure(n as u32 - 2) / (n as f64 - 1.0) * spread * tau.powf(-(m + 1.0)) * lower_incomplete_gamma(tau * h, m + 1.0)?)
}

/// Upper bound for `∫_{K|x'|² < x_n < h} exp(-τ x_n) |x|^s dx`.
pub fn cgo_weighted_cap_bound(_tau: f64, k: f64, h: f64, s: f64, n: usize) -> f64 {
    let c = sphere_measure(n as u32 - 2) / (1.0 + s / 2.0);
    c * (h + 1.0 / k).powf(s / 2.0) * h.powf((n as f64 + s + 1.0) / 2.0) * k.powf(-(n as f64 - 1.0) / 2.0)
}

/// Left side and the four terms of the local identity at the cap apex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitTerms {
    /// `φ(0) ∫_{x_n > K|x'|²} exp(ρ·x)`
    pub lhs: C,
    /// Paraboloid above the cap height.
    pub i1: C,
    /// Paraboloid below the cap height minus the true cap.
    pub i2: C,
    /// Oscillation of the source over the cap.
    pub i3: C,
    /// Flux through the flat top of the cap.
    pub i4: C,
    pub phi_at_apex: C,
}

impl SplitTerms {
    pub fn residual(&self) -> C {
        self.lhs - (self.phi_at_apex * (self.i1 + self.i2) + self.i3 + self.i4)
    }
}

/// Evaluates the split of `φ(0) ∫ exp(ρ·x)` for sampled `w` and `φ = (Δ + k²) w`
/// on the cap region, with `w` vanishing to second order on the graph.
///
/// Volume terms use a geometry-exact rule on interpolated samples; the flux term
/// uses a one-sided second-order difference, so the residual is `O(spacing²)`.
pub fn identity_split_terms(
    w: &SampledFunction,
    phi: &SampledFunction,
    cap: &CurvatureCap,
    rho: &CgoVector,
    k: f64,
    pde_tol: f64,
) -> Result<SplitTerms> {
    let n = cap.n;
    let scale = phi.field.max_abs().max(1.0);
    let res = pde_residual(w, phi, k);
    if res > pde_tol * scale {
        return Err(Error::PrecondViolated(format!("PDE residual {res:.3e} exceeds {:.3e}", pde_tol * scale)));
    }
    let order = if n == 2 { 40 } else { 24 };
    let phi0 = phi.interpolate(&ORIGIN);
    let w0 = w.interpolate(&ORIGIN);
    let full = cgo_over_parabola(rho, cap.k, n)?;

    let kk = cap.k;
    let paraboloid: GraphFn = Arc::new(move |xp: &[f64]| kk * xp.iter().map(|v| v * v).sum::<f64>());
    let lower = CurvatureCap::custom(n, kk, kk, kk, cap.l, cap.m, cap.delta, paraboloid).region_rule(order);
    let below: C = lower.integrate(|x| rho.eval(x));
    let i1 = integrate(&|x: &Point| rho.eval(x), &Region::paraboloid_cap(n, cap.k, cap.h, Top::Unbounded { decay_rate: rho.tau })?, 1e-12)?;

    let rule = cap.region_rule(order);
    let (cap_integral, oscillation) = rule
        .nodes
        .par_iter()
        .zip(rule.weights.par_iter())
        .map(|(x, wt)| {
            let e = rho.eval(x) * *wt;
            (e, e * (phi.interpolate(x) - phi0 - (w.interpolate(x) - w0) * (k * k)))
        })
        .reduce(|| (C::new(0.0, 0.0), C::new(0.0, 0.0)), |a, b| (a.0 + b.0, a.1 + b.1));

    let mut up = [0.0; 3];
    up[n - 1] = 1.0;
    let rn = rho.rho_n();
    let i4: C = cap
        .top_slice_rule(order)
        .iter()
        .map(|(x, wt)| rho.eval(x) * (w.field.normal_derivative(x, &up) - w.interpolate(x) * rn) * *wt)
        .sum();
    Ok(SplitTerms {
        lhs: phi0 * full,
        i1,
        i2: below - cap_integral,
        i3: -oscillation,
        i4,
        phi_at_apex: phi0,
    })
}

/// The cap graph `K|x'|² + cubic(x')` evaluated on jets, for building manufactured fields.
pub fn graph_jet(cap: &CurvatureCap, x: &[Jet; 3]) -> Result<Jet> {
    let cubic = cap.cubic.as_ref().ok_or_else(|| Error::Domain("cap has no polynomial graph".into()))?;
    let n = cap.n;
    let mut s = Jet::constant(0.0);
    for xi in &x[..n - 1] {
        s = s + (*xi * *xi) * cap.k;
    }
    let exps: &[(i32, i32)] = if n == 2 { &[(3, 0)] } else { &[(3, 0), (2, 1), (1, 2), (0, 3)] };
    for (&(a, b), c) in exps.iter().zip(&cubic.coeffs) {
        let mut t = x[0].powi(a);
        if b > 0 {
            t = t * x[1].powi(b);
        }
        s = s + t * *c;
    }
    Ok(s)
}

/// Norms entering the curvature estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateNorms {
    pub phi_c_alpha: f64,
    pub w_c1beta: f64,
}

impl Default for EstimateNorms {
    fn default() -> Self {
        EstimateNorms { phi_c_alpha: 1.0, w_c1beta: 1.0 }
    }
}

/// Four-term upper bound of the curvature estimate at `τ = 4K γ ln K`,
/// `γ = min(α, δ)/2`, `β = 1 - min(α, δ)`, scaled by `max(1, norms)`.
pub fn curvature_estimate_rhs(k: f64, alpha: f64, delta: f64, n: usize, norms: EstimateNorms) -> Result<f64> {
    if !(k >= std::f64::consts::E) {
        return Err(Error::Domain(format!("K = {k} is below e")));
    }
    if !(alpha > 0.0 && alpha < 1.0 && delta > 0.0) {
        return Err(Error::Domain("need 0 < alpha < 1 and delta > 0".into()));
    }
    let nf = n as f64;
    let m = alpha.min(delta);
    let gamma = m / 2.0;
    let beta = 1.0 - m;
    let l = k.ln();
    let terms = [
        l.powf((nf - 1.0) / 2.0) * k.powf(-3.0 * gamma),
        k.powf(gamma - delta),
        l.powf(1.5) * k.powf(1.0 - nf / 2.0 - alpha + gamma),
        l.powf((nf + 3.0) / 2.0) * k.powf(1.0 - beta - 3.0 * gamma),
    ];
    let scale = 1f64.max(norms.phi_c_alpha).max(norms.w_c1beta);
    Ok(scale * terms.iter().sum::<f64>())
}

/// `(ln K)^{(n+3)/2} K^{-min(α,δ)/2}`
pub fn curvature_envelope(k: f64, alpha: f64, delta: f64, n: usize) -> f64 {
    k.ln().powf((n as f64 + 3.0) / 2.0) * k.powf(-alpha.min(delta) / 2.0)
}

/// Each of the four terms is bounded by the envelope, so four copies dominate the sum.
pub const ENVELOPE_CONSTANT: f64 = 4.0;
