use num_complex::Complex64;
use qdamp::dynamics::{fit_envelope, ho_selective_time_constant, selective_point, MeasurementCoupling};
use qdamp::estimates::{kappa_from_itano, tau_min, wkb_spacing};
use qdamp::models::{characteristic_length, default_basis, si, BouncerParams, Model, OscillatorParams, UnitSystem};
use qdamp::numerics::airy_zeros;
use qdamp::states::two_state;

#[test]
fn oscillator_selective_envelope_matches_time_constant() {
    let model = Model::Oscillator(OscillatorParams::natural(1.0).unwrap());
    let basis = default_basis(&model, 4).unwrap();
    let kappa = 0.02;
    let coupling = MeasurementCoupling::new(kappa, UnitSystem::Natural).unwrap();
    for (n, e) in [(2usize, 3.0f64), (2, 2.2), (1, 0.4)] {
        let c = two_state(&basis, n, n + 1, Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)).unwrap();
        let tau_e = ho_selective_time_constant(n, e, 1.0, 1.0, kappa).unwrap();
        let samples = 4000;
        let span = 3.0 * tau_e;
        let times: Vec<f64> = (0..samples).map(|i| span * i as f64 / (samples - 1) as f64).collect();
        // The numerator ⟨ψ|Q|ψ⟩ carries the e^{−t/τ_[E]} envelope; diagonal Q vanishes.
        let numer: Vec<f64> = times
            .iter()
            .map(|&t| {
                let (q, norm) = selective_point(&c, &basis, &coupling, e, t).unwrap();
                q * norm
            })
            .collect();
        let fit = fit_envelope(&times, &numer, 0.0).unwrap();
        assert!((fit.rate * tau_e - 1.0).abs() < 0.02, "n = {n}, E = {e}: {} vs {}", fit.rate, 1.0 / tau_e);
    }
}

#[test]
fn wkb_spacing_within_a_percent_from_n20() {
    let p = BouncerParams::default();
    let z = airy_zeros(80).unwrap();
    for n in 20..=80 {
        let exact = (z.as_slice()[n - 1] - z.as_slice()[n - 2]) * p.mass * p.gravity * characteristic_length(&p);
        let w = wkb_spacing(&p, n).unwrap();
        assert!(((w - exact) / exact).abs() < 0.01, "n = {n}");
    }
}

#[test]
fn tau_min_against_exact_band_edges() {
    let p = BouncerParams::default();
    let z0 = characteristic_length(&p);
    let kappa = 1e-2;
    let z = airy_zeros(23).unwrap();
    let band = (z.as_slice()[22] - z.as_slice()[16]) * p.mass * p.gravity * z0;
    let exact = 2.0 / (kappa * band * band);
    let est = tau_min(20, 3, kappa, p.mass, z0, p.hbar).unwrap();
    assert!((est / exact - 1.0).abs() < 0.02, "{est} vs {exact}");
}

#[test]
fn cesium_gravitational_length() {
    let p = BouncerParams::si(si::CESIUM_MASS, si::GRAVITY).unwrap();
    let z0 = characteristic_length(&p);
    assert!((z0 / 0.23e-6 - 1.0).abs() < 0.05, "z0 = {z0}");
}

#[test]
fn itano_calibration_order_of_magnitude() {
    let k = kappa_from_itano(12.272, 2.125e-25, 1e2).unwrap().kappa();
    assert!((k / 1e53 - 1.0).abs() < 0.10, "kappa = {k:e}");
}
