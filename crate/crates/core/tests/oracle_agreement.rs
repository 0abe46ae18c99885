use num_complex::Complex64;
use qdamp::dynamics::{
    average_position_nonselective, average_position_selective, evolve_nonselective, MeasurementCoupling,
};
use qdamp::models::{bouncer_basis, default_basis, BouncerParams, EnergyBasis, Model, SpatialGrid, UnitSystem};
use qdamp::oracle::{
    fd_eigensolve, integrate_master_ode, integrate_selective_pde, GridWavefunction, SelectivePropagator,
};
use qdamp::states::{density_from_pure, two_state, StateCoefficients};

fn fig1_basis(n_max: usize) -> EnergyBasis {
    let p = BouncerParams::default();
    bouncer_basis(&p, n_max, &SpatialGrid::bouncer_default(&p, n_max).unwrap()).unwrap()
}

fn fig1_state(b: &EnergyBasis) -> StateCoefficients {
    two_state(b, 1, 2, Complex64::new(0.5, 0.0), Complex64::new(3f64.sqrt() / 2.0, 0.0)).unwrap()
}

fn coupling(k: f64) -> MeasurementCoupling {
    MeasurementCoupling::new(k, UnitSystem::Natural).unwrap()
}

#[test]
fn fd_position_matrix_matches_quadrature() {
    let b = fig1_basis(10);
    let fd = fd_eigensolve(b.model(), b.grid(), 10).unwrap();
    let q_fd = fd.position_matrix();
    let q = b.position_matrix();
    // The two gauges differ by a sign per level; read it off the grid overlap.
    let sign: Vec<f64> = fd
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let o: f64 = s.iter().zip(b.eigenfunction(i + 1).unwrap()).map(|(a, b)| a * b).sum();
            o.signum()
        })
        .collect();
    for i in 0..10 {
        for j in 0..10 {
            let rel = (sign[i] * sign[j] * q_fd[(i, j)] - q[(i, j)]).abs() / q[(i, j)].abs();
            assert!(rel < 2e-3, "Q[{i}][{j}]: {} vs {}", q_fd[(i, j)], q[(i, j)]);
        }
    }
}

#[test]
fn fd_eigenvectors_match_airy_eigenfunctions() {
    let b = fig1_basis(6);
    let fd = fd_eigensolve(b.model(), b.grid(), 6).unwrap();
    for (i, s) in fd.states.iter().enumerate() {
        let phi = b.eigenfunction(i + 1).unwrap();
        let overlap: f64 = s.iter().zip(phi).map(|(a, b)| a * b).sum::<f64>() * b.grid().spacing();
        assert!((overlap.abs() - 1.0).abs() < 1e-4, "level {}: overlap {overlap}", i + 1);
    }
}

#[test]
fn rk4_matches_closed_form_and_is_fourth_order() {
    let b = fig1_basis(2);
    let s = fig1_state(&b);
    let rho0 = density_from_pure(&s);
    let k = coupling(1e-2);
    let t = 20.0;
    let exact = evolve_nonselective(&rho0, &b, &k, t).unwrap();
    let err = |dt: f64| {
        let r = integrate_master_ode(rho0.matrix(), b.energies(), 1.0, 1e-2, dt, t).unwrap();
        (r - exact.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    };
    let coarse = err(0.01);
    let fine = err(0.005);
    assert!(coarse < 1e-8, "max entry error {coarse}");
    let order = (coarse / fine).log2();
    assert!((order - 4.0).abs() < 0.3, "observed order {order}");
}

#[test]
fn rk4_unitary_keeps_moduli() {
    let b = fig1_basis(4);
    let s = two_state(&b, 2, 4, Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)).unwrap();
    let rho0 = density_from_pure(&s);
    let spread = b.energies()[3] - b.energies()[0];
    let r = integrate_master_ode(rho0.matrix(), b.energies(), 1.0, 0.0, 0.01 / spread, 30.0).unwrap();
    for (a, c) in r.iter().zip(rho0.matrix().iter()) {
        assert!((a.norm() - c.norm()).abs() < 1e-10);
    }
}

#[test]
fn rk4_through_nonselective_average() {
    // The oracle density matrix, contracted with Q, reproduces the closed-form average.
    let b = fig1_basis(3);
    let s = fig1_state(&b);
    let rho0 = density_from_pure(&s);
    let k = coupling(0.1);
    let r = integrate_master_ode(rho0.matrix(), b.energies(), 1.0, 0.1, 0.005, 12.0).unwrap();
    let q = b.position_matrix();
    let mut avg = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            avg += (r[(i, j)] * q[(j, i)]).re;
        }
    }
    let closed = average_position_nonselective(&rho0, &b, &k, 12.0).unwrap();
    assert!((avg - closed).abs() < 1e-9);
}

fn grid_state(b: &EnergyBasis, s: &StateCoefficients) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); b.grid().len()];
    for (i, a) in s.amplitudes().iter().enumerate() {
        for (o, p) in out.iter_mut().zip(b.eigenfunction(i + b.first_level()).unwrap()) {
            *o += a * p;
        }
    }
    out
}

#[test]
fn crank_nicolson_selective_matches_spectral() {
    let b = fig1_basis(2);
    let s = fig1_state(&b);
    let e1 = b.energy(1).unwrap();
    let kappa = 0.1;
    let period = 2.0 * std::f64::consts::PI / (b.energy(2).unwrap() - e1);
    let samples = 24;
    let interval = 2.0 * period / samples as f64;
    let dt = interval / (interval / 2.5e-3).ceil();
    let prop = SelectivePropagator::new(b.model(), b.grid(), kappa, e1, dt).unwrap();
    let mut psi = GridWavefunction {
        values: grid_state(&b, &s),
        time: 0.0,
    };
    let mut worst = 0.0f64;
    for k in 1..=samples {
        prop.advance(&mut psi, interval).unwrap();
        let t = k as f64 * interval;
        let grid_q = psi.mean_position(b.grid());
        let spectral = average_position_selective(&s, &b, &coupling(kappa), e1, t).unwrap();
        worst = worst.max(((grid_q - spectral) / spectral).abs());
    }
    assert!(worst < 1e-3, "worst relative deviation {worst}");
}

#[test]
fn crank_nicolson_resonant_eigenstate_is_stationary() {
    let b = fig1_basis(3);
    let s = two_state(&b, 2, 1, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)).unwrap();
    let e2 = b.energy(2).unwrap();
    let psi0 = grid_state(&b, &s);
    let prop = SelectivePropagator::new(b.model(), b.grid(), 0.1, e2, 2e-3).unwrap();
    let mut psi = GridWavefunction {
        values: psi0.clone(),
        time: 0.0,
    };
    prop.advance(&mut psi, 10.0).unwrap();
    let dev = psi
        .values
        .iter()
        .zip(&psi0)
        .map(|(a, b)| (a.norm_sqr() - b.norm_sqr()).abs())
        .fold(0.0, f64::max);
    assert!(dev < 1e-4, "density deviation {dev}");
}

#[test]
fn crank_nicolson_oscillator_unitary_norm() {
    let model = Model::Oscillator(qdamp::models::OscillatorParams::natural(1.0).unwrap());
    let b = default_basis(&model, 3).unwrap();
    let s = two_state(&b, 0, 1, Complex64::new(0.8, 0.0), Complex64::new(0.6, 0.0)).unwrap();
    let psi0 = grid_state(&b, &s);
    let n0 = GridWavefunction { values: psi0.clone(), time: 0.0 }.norm_sqr(b.grid());
    let psi = integrate_selective_pde(&psi0, &model, 0.0, 0.0, b.grid(), 0.01, 20.0 * std::f64::consts::PI).unwrap();
    assert!((psi.norm_sqr(b.grid()) / n0 - 1.0).abs() < 1e-6);
}
