mod common;

use common::itp::scattered_ratio;
use invisiscat::transmission::{find_eigenvalues, RadialITP};

#[test]
fn eigen_incident_wave_does_not_scatter() {
    let itp = RadialITP::new(1.0, 15.0, 2, 0).unwrap();
    let pair = find_eigenvalues(&itp, 5.0, &[0]).unwrap()[0];
    let at_eig = scattered_ratio(&pair, pair.k, 1.0 / 128.0);
    assert!(at_eig < 1e-3, "{at_eig}");
    let detuned = scattered_ratio(&pair, 1.05 * pair.k, 1.0 / 128.0);
    assert!(detuned > 100.0 * at_eig, "{detuned}");
}
