//! Independent cross-checks of the closed-form evolution.
//!
//! Nothing here calls into [`crate::dynamics`] or [`crate::states`]: the
//! finite-difference eigensolver, the Runge–Kutta integrator and the
//! Crank–Nicolson integrator only use model parameters and the kernels in
//! [`crate::numerics`]. Inputs and outputs are plain matrices and vectors.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::models::Model;
pub use crate::models::SpatialGrid;
use crate::numerics::{tridiag_eigensolve, ComplexTridiagonal};

/// Smallest grid accepted by [`fd_eigensolve`].
pub const MIN_FD_POINTS: usize = 2048;

/// Second-order finite-difference Hamiltonian on the interior points of
/// `grid` (Dirichlet at both ends): `(diag, offdiag)`.
pub fn fd_hamiltonian(model: &Model, grid: &SpatialGrid) -> (Vec<f64>, Vec<f64>) {
    let h = grid.spacing();
    let kinetic = model.hbar() * model.hbar() / (2.0 * model.mass() * h * h);
    let interior = grid.len() - 2;
    let diag = (1..=interior)
        .map(|i| 2.0 * kinetic + model.potential(grid.coordinate(i)))
        .collect();
    (diag, vec![-kinetic; interior - 1])
}

/// Lowest finite-difference eigenpairs.
#[derive(Debug, Clone)]
pub struct FdSpectrum {
    pub energies: Vec<f64>,
    /// Eigenfunctions on every grid point (zero at both ends), normalized so
    /// that Σ ψ² Δz = 1, first significant value positive.
    pub states: Vec<Vec<f64>>,
    pub grid: SpatialGrid,
}

impl FdSpectrum {
    /// Σ z ψ_i ψ_j Δz.
    pub fn position_matrix(&self) -> DMatrix<f64> {
        let dz = self.grid.spacing();
        let z = self.grid.coordinates();
        let k = self.states.len();
        DMatrix::from_fn(k, k, |i, j| {
            self.states[i]
                .iter()
                .zip(&self.states[j])
                .zip(&z)
                .map(|((a, b), z)| a * b * z)
                .sum::<f64>()
                * dz
        })
    }
}

/// The `n_max` lowest eigenpairs of the finite-difference Hamiltonian.
pub fn fd_eigensolve(model: &Model, grid: &SpatialGrid, n_max: usize) -> Result<FdSpectrum> {
    if grid.len() < MIN_FD_POINTS {
        return Err(invalid(format!(
            "finite-difference oracle needs at least {MIN_FD_POINTS} points, got {}",
            grid.len()
        )));
    }
    if let Model::Bouncer(_) = model {
        if grid.start() != 0.0 {
            return Err(invalid("bouncer grid must start at the floor z = 0"));
        }
    }
    let (diag, off) = fd_hamiltonian(model, grid);
    let eig = tridiag_eigensolve(&diag, &off, n_max)?;
    let scale = 1.0 / grid.spacing().sqrt();
    let states = eig
        .vectors
        .into_iter()
        .map(|v| {
            let mut full = Vec::with_capacity(grid.len());
            full.push(0.0);
            full.extend(v.iter().map(|x| x * scale));
            full.push(0.0);
            full
        })
        .collect();
    Ok(FdSpectrum {
        energies: eig.values,
        states,
        grid: *grid,
    })
}

/// Fourth-order Runge–Kutta integration of
/// dρ_nm/dt = [−i(E_n − E_m)/ħ − (κ/2)(E_n − E_m)²] ρ_nm
/// from 0 to `duration`, with steps no longer than `dt`.
///
/// `dt` must not exceed 0.01 · min(ħ/(E_max − E_min), 2/(κ (E_max − E_min)²)).
pub fn integrate_master_ode(
    rho0: &DMatrix<Complex64>,
    energies: &[f64],
    hbar: f64,
    kappa: f64,
    dt: f64,
    duration: f64,
) -> Result<DMatrix<Complex64>> {
    let n = energies.len();
    if rho0.nrows() != n || rho0.ncols() != n {
        return Err(invalid("density matrix and energy list sizes differ"));
    }
    if !(dt > 0.0) || !(duration >= 0.0) {
        return Err(invalid("need dt > 0 and duration >= 0"));
    }
    let (lo, hi) = energies
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &e| (a.min(e), b.max(e)));
    let spread = hi - lo;
    if spread > 0.0 {
        let mut bound = hbar / spread;
        if kappa > 0.0 {
            bound = bound.min(2.0 / (kappa * spread * spread));
        }
        let bound = 0.01 * bound;
        if dt > bound {
            return Err(Error::StepTooLarge { dt, bound });
        }
    }
    let rate = DMatrix::from_fn(n, n, |i, j| {
        let d = energies[i] - energies[j];
        Complex64::new(-0.5 * kappa * d * d, -d / hbar)
    });
    let deriv = |r: &DMatrix<Complex64>| r.component_mul(&rate);

    let steps = (duration / dt).ceil() as usize;
    let mut rho = rho0.clone();
    if steps == 0 {
        return Ok(rho);
    }
    let h = duration / steps as f64;
    for _ in 0..steps {
        let k1 = deriv(&rho);
        let k2 = deriv(&(&rho + &k1 * Complex64::from(0.5 * h)));
        let k3 = deriv(&(&rho + &k2 * Complex64::from(0.5 * h)));
        let k4 = deriv(&(&rho + &k3 * Complex64::from(h)));
        rho += (k1 + k2 * Complex64::from(2.0) + k3 * Complex64::from(2.0) + k4) * Complex64::from(h / 6.0);
    }
    Ok(rho)
}

/// Wavefunction on every point of a grid, endpoints pinned to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction {
    pub values: Vec<Complex64>,
    pub time: f64,
}

impl GridWavefunction {
    /// Σ|ψ|² Δz.
    pub fn norm_sqr(&self, grid: &SpatialGrid) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.spacing()
    }

    /// Σ z|ψ|² / Σ|ψ|².
    pub fn mean_position(&self, grid: &SpatialGrid) -> f64 {
        let (num, den) = self
            .values
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(n, d), (i, v)| {
                let w = v.norm_sqr();
                (n + w * grid.coordinate(i), d + w)
            });
        num / den
    }
}

/// Crank–Nicolson integrator for iħ∂ψ/∂t = Hψ − iħκ(H − E)²ψ on a grid.
///
/// One step is a Strang splitting: a half step of the Hermitian part, a full
/// step of the dissipative part, another Hermitian half step. Both parts use
/// Crank–Nicolson. The dissipative operator is never formed: its implicit
/// side I + a A², with A = H − E and a = κ dt/2, factors as
/// a (A − iβ)(A + iβ), β = a^(−1/2), so each step needs two tridiagonal
/// multiplications by A and two complex tridiagonal solves.
pub struct SelectivePropagator {
    grid: SpatialGrid,
    dt: f64,
    h_diag: Vec<f64>,
    off: f64,
    /// dt / (4ħ): the Crank–Nicolson weight of a half step.
    tau: f64,
    unitary: ComplexTridiagonal,
    energy: f64,
    dissipative: Option<(ComplexTridiagonal, ComplexTridiagonal, f64)>,
}

impl SelectivePropagator {
    /// Requires dt ≤ 0.01 / (κ (V_max − E)²) when κ > 0, V_max being the
    /// largest potential value on the grid interior.
    pub fn new(model: &Model, grid: &SpatialGrid, kappa: f64, energy: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !(kappa >= 0.0) || !energy.is_finite() {
            return Err(invalid("need dt > 0, kappa >= 0 and a finite registered energy"));
        }
        if grid.len() < 5 {
            return Err(invalid("grid too small for the propagator"));
        }
        let (h_diag, h_off) = fd_hamiltonian(model, grid);
        let off = h_off[0];
        let interior = h_diag.len();

        if kappa > 0.0 {
            let v_max = (1..=interior)
                .map(|i| model.potential(grid.coordinate(i)))
                .fold(f64::NEG_INFINITY, f64::max);
            let bound = 0.01 / (kappa * (v_max - energy).powi(2));
            if dt > bound {
                return Err(Error::StepTooLarge { dt, bound });
            }
        }

        let tau = 0.25 * dt / model.hbar();
        let sub = vec![Complex64::new(0.0, tau * off); interior - 1];
        let diag: Vec<Complex64> = h_diag.iter().map(|&d| Complex64::new(1.0, tau * d)).collect();
        let unitary = ComplexTridiagonal::factor(&sub, &diag, &sub)?;

        let dissipative = if kappa > 0.0 {
            let a = 0.5 * kappa * dt;
            let beta = 1.0 / a.sqrt();
            let sub = vec![Complex64::new(off, 0.0); interior - 1];
            let minus: Vec<Complex64> = h_diag.iter().map(|&d| Complex64::new(d - energy, -beta)).collect();
            let plus: Vec<Complex64> = h_diag.iter().map(|&d| Complex64::new(d - energy, beta)).collect();
            Some((
                ComplexTridiagonal::factor(&sub, &minus, &sub)?,
                ComplexTridiagonal::factor(&sub, &plus, &sub)?,
                a,
            ))
        } else {
            None
        };

        Ok(SelectivePropagator {
            grid: *grid,
            dt,
            h_diag,
            off,
            tau,
            unitary,
            energy,
            dissipative,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// y = (H − shift) x on the interior.
    fn apply(&self, shift: f64, x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut y = x[i] * (self.h_diag[i] - shift);
                if i > 0 {
                    y += x[i - 1] * self.off;
                }
                if i + 1 < n {
                    y += x[i + 1] * self.off;
                }
                y
            })
            .collect()
    }

    fn half_step(&self, psi: &mut [Complex64]) {
        let hpsi = self.apply(0.0, psi);
        for (p, hp) in psi.iter_mut().zip(hpsi) {
            *p -= Complex64::new(0.0, self.tau) * hp;
        }
        self.unitary.solve_in_place(psi);
    }

    fn dissipative_step(&self, psi: &mut [Complex64]) {
        let Some((minus, plus, a)) = self.dissipative.as_ref() else {
            return;
        };
        let ap = self.apply(self.energy, psi);
        let aap = self.apply(self.energy, &ap);
        for (p, q) in psi.iter_mut().zip(aap) {
            *p = (*p - q * *a) / *a;
        }
        minus.solve_in_place(psi);
        plus.solve_in_place(psi);
    }

    /// Advance the interior values by one step.
    fn step(&self, psi: &mut [Complex64]) {
        self.half_step(psi);
        self.dissipative_step(psi);
        self.half_step(psi);
    }

    /// Advance `psi` by `duration` in steps no longer than `dt`, failing if
    /// the norm ever grows by more than 1e-6 (relative) over one step.
    pub fn advance(&self, psi: &mut GridWavefunction, duration: f64) -> Result<()> {
        if psi.values.len() != self.grid.len() {
            return Err(invalid("wavefunction does not match the propagator grid"));
        }
        if !(duration >= 0.0) {
            return Err(invalid("duration must be non-negative"));
        }
        let steps = (duration / self.dt).ceil() as usize;
        if steps == 0 {
            return Ok(());
        }
        if ((duration / steps as f64) - self.dt).abs() > 1e-12 * self.dt {
            // Uneven final length: rebuild with the shortened step.
            return Err(invalid(format!(
                "duration {duration} is not a multiple of dt {}",
                self.dt
            )));
        }
        let last = self.grid.len() - 1;
        psi.values[0] = Complex64::new(0.0, 0.0);
        psi.values[last] = Complex64::new(0.0, 0.0);
        let mut norm = psi.norm_sqr(&self.grid);
        for _ in 0..steps {
            self.step(&mut psi.values[1..last]);
            psi.time += self.dt;
            let next = psi.norm_sqr(&self.grid);
            if next > norm * (1.0 + 1e-6) {
                return Err(Error::NormGrowth {
                    growth: next / norm - 1.0,
                    t: psi.time,
                });
            }
            norm = next;
        }
        Ok(())
    }
}

/// Integrate the selective equation from `psi0` (samples on every grid
/// point; the ends are forced to zero) for `duration`, with the largest
/// step ≤ `dt` that divides `duration` evenly.
pub fn integrate_selective_pde(
    psi0: &[Complex64],
    model: &Model,
    kappa: f64,
    energy: f64,
    grid: &SpatialGrid,
    dt: f64,
    duration: f64,
) -> Result<GridWavefunction> {
    if !(dt > 0.0) || !(duration >= 0.0) {
        return Err(invalid("need dt > 0 and duration >= 0"));
    }
    let mut psi = GridWavefunction {
        values: psi0.to_vec(),
        time: 0.0,
    };
    let steps = (duration / dt).ceil() as usize;
    if steps == 0 {
        return Ok(psi);
    }
    let prop = SelectivePropagator::new(model, grid, kappa, energy, duration / steps as f64)?;
    prop.advance(&mut psi, duration)?;
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{BouncerParams, OscillatorParams};
    use crate::numerics::airy_zeros;

    #[test]
    fn fd_bouncer_levels() {
        let model = Model::Bouncer(BouncerParams::default());
        let grid = SpatialGrid::new(0.0, 25.0, 4096).unwrap();
        let fd = fd_eigensolve(&model, &grid, 10).unwrap();
        let z = airy_zeros(10).unwrap();
        for (e, lam) in fd.energies.iter().zip(z.as_slice()) {
            assert!((e / (0.5 * lam) - 1.0).abs() < 1e-3);
        }
        for s in &fd.states {
            let norm: f64 = s.iter().map(|v| v * v).sum::<f64>() * grid.spacing();
            assert!((norm - 1.0).abs() < 1e-10);
            assert!(s[1] > 0.0);
        }
    }

    #[test]
    fn fd_oscillator_levels() {
        let model = Model::Oscillator(OscillatorParams::natural(1.0).unwrap());
        let grid = SpatialGrid::new(-12.0, 12.0, 4096).unwrap();
        let fd = fd_eigensolve(&model, &grid, 8).unwrap();
        for (n, e) in fd.energies.iter().enumerate() {
            assert!((e / (n as f64 + 0.5) - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn fd_rejects_coarse_grid() {
        let model = Model::Bouncer(BouncerParams::default());
        let grid = SpatialGrid::new(0.0, 25.0, 1000).unwrap();
        assert!(fd_eigensolve(&model, &grid, 3).is_err());
    }

    #[test]
    fn rk4_step_bound_and_accuracy() {
        let e = [0.0, 1.0];
        let rho0 = DMatrix::from_row_slice(2, 2, &[
            Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0),
            Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0),
        ]);
        assert!(matches!(
            integrate_master_ode(&rho0, &e, 1.0, 0.0, 0.02, 1.0),
            Err(Error::StepTooLarge { .. })
        ));
        let r = integrate_master_ode(&rho0, &e, 1.0, 0.3, 0.001, 5.0).unwrap();
        let exact = Complex64::from_polar(0.5 * (-0.15 * 5.0f64).exp(), 5.0);
        assert!((r[(0, 1)] - exact).norm() < 1e-12);
        assert_eq!(r[(0, 0)], Complex64::new(0.5, 0.0));
    }

    #[test]
    fn unitary_propagation_keeps_norm() {
        let model = Model::Oscillator(OscillatorParams::natural(1.0).unwrap());
        let grid = SpatialGrid::new(-10.0, 10.0, 801).unwrap();
        let psi0: Vec<Complex64> = grid
            .coordinates()
            .iter()
            .map(|&x| Complex64::new((-(x - 1.0) * (x - 1.0) / 2.0).exp(), 0.0))
            .collect();
        let start = GridWavefunction { values: psi0.clone(), time: 0.0 }.norm_sqr(&grid);
        let out = integrate_selective_pde(&psi0, &model, 0.0, 0.0, &grid, 0.01, 20.0 * std::f64::consts::PI).unwrap();
        assert!((out.norm_sqr(&grid) / start - 1.0).abs() < 1e-6);
        // Coherent state: ⟨x⟩ = cos t, back to 1 after ten periods.
        assert!((out.mean_position(&grid) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn dissipative_step_bound() {
        let model = Model::Bouncer(BouncerParams::default());
        let grid = SpatialGrid::new(0.0, 15.0, 1501).unwrap();
        assert!(matches!(
            SelectivePropagator::new(&model, &grid, 0.1, 1.0, 0.1),
            Err(Error::StepTooLarge { .. })
        ));
    }
}
