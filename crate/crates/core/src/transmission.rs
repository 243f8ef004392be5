//! Interior transmission eigenvalues of a ball with constant contrast.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cgo::{curvature_estimate_rhs, EstimateNorms};
use crate::error::{Error, Result};
use crate::geometry::CurvatureCap;
use crate::grid::{Grid, SampledFunction};
use crate::holder::holder_norm;
use crate::point::{self, ORIGIN};
use crate::specfun::{bessel_j, bessel_j_prime, bisect, spherical_j, spherical_j_prime, Order};

/// Scan intervals per unit of `k_max`.
pub const SCAN_STEPS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialITP {
    pub radius: f64,
    pub v0: f64,
    pub n: usize,
    pub mode: u32,
}

impl RadialITP {
    pub fn new(radius: f64, v0: f64, n: usize, mode: u32) -> Result<RadialITP> {
        if !(radius > 0.0) {
            return Err(Error::Domain(format!("radius must be positive, got {radius}")));
        }
        if !(1.0 + v0 > 0.0) || v0 == 0.0 || !v0.is_finite() {
            return Err(Error::Domain(format!("contrast must satisfy 1 + v0 > 0 and v0 != 0, got {v0}")));
        }
        if !(n == 2 || n == 3) {
            return Err(Error::Domain(format!("dimension {n} unsupported")));
        }
        Ok(RadialITP { radius, v0, n, mode })
    }

    pub fn with_mode(self, mode: u32) -> RadialITP {
        RadialITP { mode, ..self }
    }

    /// Interior wavenumber factor `√(1 + v0)`.
    pub fn index(&self) -> f64 {
        (1.0 + self.v0).sqrt()
    }

    fn profile(&self, x: f64) -> f64 {
        match self.n {
            2 => bessel_j(Order::Integer(self.mode), x),
            _ => spherical_j(self.mode, x),
        }
    }

    fn profile_prime(&self, x: f64) -> f64 {
        match self.n {
            2 => bessel_j_prime(Order::Integer(self.mode), x),
            _ => spherical_j_prime(self.mode, x),
        }
    }
}

/// Wronskian-type determinant whose zeros are the transmission eigenvalues of one mode.
pub fn itp_determinant(itp: &RadialITP, k: f64) -> f64 {
    let r = itp.radius;
    let k1 = k * itp.index();
    itp.profile(k * r) * k1 * itp.profile_prime(k1 * r) - k * itp.profile_prime(k * r) * itp.profile(k1 * r)
}

/// Radial profiles `w(r) = Z_m(k₁R) Z_m(kr)` and `u(r) = Z_m(kR) Z_m(k₁r)`,
/// scaled by `scale`; they share Cauchy data at `r = R` when `k` is an eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenPair {
    pub k: f64,
    pub mode: u32,
    /// 1-based index among the roots of this mode.
    pub index: usize,
    pub itp: RadialITP,
    pub scale: f64,
}

impl EigenPair {
    pub fn new(itp: RadialITP, k: f64, index: usize) -> EigenPair {
        let r = itp.radius;
        let k1 = k * itp.index();
        let a = itp.profile(k1 * r).abs().max(itp.profile(k * r).abs());
        EigenPair { k, mode: itp.mode, index, itp, scale: if a > 0.0 { 1.0 / a } else { 1.0 } }
    }

    fn k1(&self) -> f64 {
        self.k * self.itp.index()
    }

    pub fn w(&self, r: f64) -> f64 {
        self.scale * self.itp.profile(self.k1() * self.itp.radius) * self.itp.profile(self.k * r)
    }

    pub fn u(&self, r: f64) -> f64 {
        self.scale * self.itp.profile(self.k * self.itp.radius) * self.itp.profile(self.k1() * r)
    }

    pub fn w_prime(&self, r: f64) -> f64 {
        self.scale * self.itp.profile(self.k1() * self.itp.radius) * self.k * self.itp.profile_prime(self.k * r)
    }

    pub fn u_prime(&self, r: f64) -> f64 {
        self.scale * self.itp.profile(self.k * self.itp.radius) * self.k1() * self.itp.profile_prime(self.k1() * r)
    }

    /// `|u(R) - w(R)| + |u'(R) - w'(R)|`
    pub fn boundary_mismatch(&self) -> f64 {
        let r = self.itp.radius;
        (self.u(r) - self.w(r)).abs() + (self.u_prime(r) - self.w_prime(r)).abs()
    }

    /// Angular factor of the full eigenfunction: `cos(mφ)` in the plane,
    /// the Legendre polynomial `P_m(cos θ)` in space.
    pub fn angular(&self, x: &[f64; 3]) -> f64 {
        let r = point::norm(x);
        if self.itp.n == 2 {
            (self.mode as f64 * x[1].atan2(x[0])).cos()
        } else {
            let c = if r > 0.0 { x[2] / r } else { 1.0 };
            legendre(self.mode, c)
        }
    }

    /// The interior field `u(|x|) · angular(x)`.
    pub fn u_field(&self, x: &[f64; 3]) -> f64 {
        self.u(point::norm(x)) * self.angular(x)
    }

    /// The free field `w(|x|) · angular(x)`.
    pub fn w_field(&self, x: &[f64; 3]) -> f64 {
        self.w(point::norm(x)) * self.angular(x)
    }

    /// Largest residual of both radial ODEs by five-point differences on `samples`
    /// nodes in `[R/8, R]`, relative to `k₁² · max|profile|`.
    pub fn ode_residual(&self, samples: usize) -> f64 {
        let n = self.itp.n as f64;
        let m = self.mode as f64;
        let r_max = self.itp.radius;
        let h = 1e-3 / self.k1();
        let ang = m * (m + n - 2.0);
        let residual = |f: &dyn Fn(f64) -> f64, kk: f64| -> f64 {
            let mut worst: f64 = 0.0;
            let mut size: f64 = 0.0;
            for i in 0..samples {
                let r = r_max * (0.125 + 0.875 * i as f64 / (samples - 1).max(1) as f64);
                let v = [f(r - 2.0 * h), f(r - h), f(r), f(r + h), f(r + 2.0 * h)];
                let d1 = (v[0] - 8.0 * v[1] + 8.0 * v[3] - v[4]) / (12.0 * h);
                let d2 = (-v[0] + 16.0 * v[1] - 30.0 * v[2] + 16.0 * v[3] - v[4]) / (12.0 * h * h);
                worst = worst.max((d2 + (n - 1.0) / r * d1 + (kk * kk - ang / (r * r)) * v[2]).abs());
                size = size.max(v[2].abs());
            }
            worst / (self.k1().powi(2) * size.max(f64::MIN_POSITIVE))
        };
        residual(&|r| self.w(r), self.k).max(residual(&|r| self.u(r), self.k1()))
    }

    /// The eigenfunction `u` sampled on the ball with the given spacing.
    pub fn sampled_u(&self, spacing: f64, alpha: f64) -> Result<SampledFunction> {
        let r = self.itp.radius;
        let grid = Grid::covering(self.itp.n, &[-r; 3], &[r; 3], &[0.0; 3], spacing, 0)?;
        SampledFunction::sample(grid, |x| Complex64::new(self.u_field(x), 0.0), |x| point::norm(x) <= r, alpha)
    }
}

fn legendre(l: u32, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if l == 0 {
        return 1.0;
    }
    for j in 1..l {
        let j = j as f64;
        let p2 = ((2.0 * j + 1.0) * x * p1 - j * p0) / (j + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// All determinant roots in `(0, k_max]` for each mode, with the scan refined `refine` times.
pub fn find_eigenvalues_refined(itp: &RadialITP, k_max: f64, modes: &[u32], refine: usize) -> Result<Vec<EigenPair>> {
    if !(k_max > 0.0) {
        return Err(Error::Domain(format!("k_max must be positive, got {k_max}")));
    }
    let steps = SCAN_STEPS * refine.max(1);
    let dk = k_max / steps as f64;
    let per_mode: Vec<Vec<EigenPair>> = modes
        .par_iter()
        .map(|&m| {
            let itp = itp.with_mode(m);
            let det = |k: f64| itp_determinant(&itp, k);
            let mut roots = vec![];
            let mut prev = det(dk);
            for i in 2..=steps {
                let k = i as f64 * dk;
                let cur = det(k);
                if prev == 0.0 || prev.signum() != cur.signum() {
                    let root = if prev == 0.0 { k - dk } else { bisect(det, k - dk, k) };
                    roots.push(EigenPair::new(itp, root, roots.len() + 1));
                }
                prev = cur;
            }
            roots
        })
        .collect();
    let all: Vec<EigenPair> = per_mode.into_iter().flatten().collect();
    if all.is_empty() {
        return Err(Error::NoneFound { k_max });
    }
    Ok(all)
}

/// Determinant roots below `k_max` with the default scan step `k_max / 2048`.
pub fn find_eigenvalues(itp: &RadialITP, k_max: f64, modes: &[u32]) -> Result<Vec<EigenPair>> {
    find_eigenvalues_refined(itp, k_max, modes, 1)
}

/// `sup_{∂Ω}|u| / (2R)^α` for `u` normalised in the discrete `C^α` norm; with a
/// constant contrast the factor `‖V‖_{C^α} / inf|V|` is one.
pub fn boundary_vanishing_ratio(pair: &EigenPair, alpha: f64) -> Result<f64> {
    let r = pair.itp.radius;
    let spacing = r / if pair.itp.n == 2 { 32.0 } else { 12.0 };
    let u = pair.sampled_u(spacing, alpha)?;
    let norm = holder_norm(&u, alpha);
    if norm == 0.0 {
        return Err(Error::PrecondViolated("eigenfunction vanishes on the grid".into()));
    }
    // the angular factors peak at 1 on the sphere
    Ok(pair.u(r).abs() / norm / (2.0 * r).powf(alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VanishingProbe {
    /// `|u(p)|` after normalising `‖u‖_{C^α} = 1`.
    pub apex_value: f64,
    /// Curvature bound scaled by `‖V‖_{C^α} / |V(p)|`; infinite when `V(p) = 0`.
    pub envelope: f64,
}

/// Apex value of a normalised eigenfunction against the curvature bound at the cap apex.
pub fn curvature_vanishing_probe(cap: &CurvatureCap, contrast: &SampledFunction, u: &SampledFunction, alpha: f64) -> Result<VanishingProbe> {
    let u_norm = holder_norm(u, alpha);
    if u_norm == 0.0 {
        return Err(Error::PrecondViolated("eigenfunction is identically zero".into()));
    }
    let v_norm = holder_norm(contrast, alpha);
    let v_apex = contrast.interpolate(&ORIGIN).norm();
    let rhs = curvature_estimate_rhs(cap.k, alpha, cap.delta, cap.n, EstimateNorms::default())?;
    let envelope = if v_apex > 0.0 { rhs * v_norm / v_apex } else { f64::INFINITY };
    Ok(VanishingProbe { apex_value: u.interpolate(&ORIGIN).norm() / u_norm, envelope })
}

/// Eigenvalue table with columns `mode, index, k_eig, u_at_R, mismatch`.
pub fn write_table(pairs: &[EigenPair], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["mode", "index", "k_eig", "u_at_R", "mismatch"])?;
    for p in pairs {
        w.write_record([
            p.mode.to_string(),
            p.index.to_string(),
            format!("{:.15e}", p.k),
            format!("{:.15e}", p.u(p.itp.radius)),
            format!("{:.3e}", p.boundary_mismatch()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn index4() -> RadialITP {
        RadialITP::new(1.0, 15.0, 2, 0).unwrap()
    }

    #[test]
    fn invariants_rejected() {
        assert!(RadialITP::new(1.0, 0.0, 2, 0).is_err());
        assert!(RadialITP::new(1.0, -1.0, 2, 0).is_err());
        assert!(RadialITP::new(0.0, 1.0, 2, 0).is_err());
        assert!(matches!(find_eigenvalues(&index4(), 0.1, &[0]), Err(Error::NoneFound { .. })));
    }

    #[test]
    fn first_root_index_four() {
        let pairs = find_eigenvalues(&index4(), 5.0, &[0]).unwrap();
        let k = pairs[0].k;
        // the determinant at the root is at roundoff level
        assert!(itp_determinant(&index4(), k).abs() < 1e-9);
        assert!((k - 0.993_997_561_885_687_8).abs() < 1e-9, "{k:.15}");
        let fine = find_eigenvalues_refined(&index4(), 5.0, &[0], 4).unwrap();
        assert!((fine[0].k - k).abs() < 1e-8);
        let half = find_eigenvalues(&RadialITP { radius: 0.5, ..index4() }, 10.0, &[0]).unwrap();
        assert!((half[0].k - 2.0 * k).abs() < 1e-9);
    }

    #[test]
    fn eigenpairs_satisfy_odes_and_match() {
        for itp in [index4(), RadialITP::new(1.0, 3.0, 3, 0).unwrap()] {
            for p in find_eigenvalues(&itp, 6.0, &[0, 1, 2]).unwrap() {
                assert!(p.ode_residual(40) < 1e-8, "{p:?} {}", p.ode_residual(40));
                assert!(p.boundary_mismatch() < 1e-6);
            }
        }
    }

    #[test]
    fn ratio_is_normalisation_invariant() {
        let p = find_eigenvalues(&index4(), 5.0, &[0]).unwrap()[0];
        let doubled = EigenPair { scale: 2.0 * p.scale, ..p };
        let a = boundary_vanishing_ratio(&p, 0.5).unwrap();
        assert!((a - boundary_vanishing_ratio(&doubled, 0.5).unwrap()).abs() < 1e-12 * a);
        assert!(a > 0.0);
    }

    #[test]
    fn csv_table() {
        let pairs = find_eigenvalues(&index4(), 3.0, &[0, 1]).unwrap();
        let mut buf = vec![];
        write_table(&pairs, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("mode,index,k_eig,u_at_R,mismatch\n"));
        assert_eq!(s.lines().count(), pairs.len() + 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn roots_scale_inversely_with_radius(r in 0.3f64..3.0, v0 in 0.5f64..20.0, m in 0u32..3) {
            let unit = RadialITP::new(1.0, v0, 2, m).unwrap();
            let base = find_eigenvalues(&unit, 6.0, &[m]);
            prop_assume!(base.is_ok());
            let k = base.unwrap()[0].k;
            let scaled = find_eigenvalues(&RadialITP { radius: r, ..unit }, 6.0 / r, &[m]).unwrap();
            prop_assert!((scaled[0].k - k / r).abs() < 1e-9 * (k / r));
        }
    }
}
