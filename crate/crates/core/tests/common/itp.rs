use std::f64::consts::PI;

use invisiscat::geometry::Domain;
use invisiscat::medium::{scattered_far_field, solve_ls, IncidentField, MediumScene, SolveOptions};
use invisiscat::quadrature::integrate_1d;
use invisiscat::source::Intensity;
use invisiscat::transmission::EigenPair;
use num_complex::Complex64 as C;

/// `‖u^s_∞‖_{L²(S)} / ‖w‖_{L²(Ω)}` for the radial free field `w` of `pair` sent in at wavenumber `k`.
pub fn scattered_ratio(pair: &EigenPair, k: f64, spacing: f64) -> f64 {
    // J_0(k|x|) is the Herglotz wave of the constant density 1/(2π)
    let amp = pair.w(0.0);
    let inc = IncidentField::herglotz(2, 64, |_| C::new(amp / (2.0 * PI), 0.0)).unwrap();
    let scene = MediumScene::new(Domain::ball(2, [0.0; 3], pair.itp.radius).unwrap(), Intensity::constant(pair.itp.v0), k, inc).unwrap();
    let opts = SolveOptions { spacing, ..SolveOptions::for_scene(&scene) };
    let sol = solve_ls(&scene, &opts).unwrap();
    let ff = scattered_far_field(&scene, &sol, 64).unwrap();
    let r = pair.itp.radius;
    let w2 = integrate_1d(|s| C::new(2.0 * PI * s * pair.w(s).powi(2), 0.0), 0.0, r, 1e-12).unwrap().re;
    ff.l2_norm() / w2.sqrt()
}
