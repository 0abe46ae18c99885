//! Initial states: two-level superpositions and Gaussian packets projected
//! onto an [`EnergyBasis`], and the density matrices built from them.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::models::{default_basis, EnergyBasis, Model};
use crate::numerics::PanelRule;

/// Projections below this captured norm are rejected outright.
pub const MIN_CAPTURED_NORM: f64 = 0.999;

/// Captured norm targeted by automatic truncation.
pub const TARGET_CAPTURED_NORM: f64 = 1.0 - 1e-6;

/// Largest basis automatic truncation will try.
pub const MAX_AUTO_LEVELS: usize = 200;

/// Amplitudes c_n over the dense basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateCoefficients {
    amplitudes: Vec<Complex64>,
    captured_norm: f64,
}

impl StateCoefficients {
    /// Wrap raw amplitudes; the captured norm is Σ|c_n|².
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(invalid("state needs at least one amplitude"));
        }
        if amplitudes.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(invalid("state amplitudes must be finite"));
        }
        let captured_norm = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if !(captured_norm > 0.0) || captured_norm > 1.0 + 1e-9 {
            return Err(invalid(format!(
                "captured norm must lie in (0, 1], got {captured_norm}"
            )));
        }
        Ok(StateCoefficients {
            amplitudes,
            captured_norm,
        })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Σ|c_n|² over the kept levels.
    pub fn captured_norm(&self) -> f64 {
        self.captured_norm
    }

    /// |c_n|² for each dense index.
    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Keep the first `count` amplitudes.
    pub fn truncated(&self, count: usize) -> Result<StateCoefficients> {
        if count == 0 || count > self.len() {
            return Err(invalid(format!(
                "cannot truncate {} amplitudes to {count}",
                self.len()
            )));
        }
        StateCoefficients::new(self.amplitudes[..count].to_vec())
    }
}

/// Superposition c1|n1⟩ + c2|n2⟩ of two levels of `basis`, by quantum number.
pub fn two_state(
    basis: &EnergyBasis,
    n1: usize,
    n2: usize,
    c1: Complex64,
    c2: Complex64,
) -> Result<StateCoefficients> {
    if n1 == n2 {
        return Err(invalid(format!("two_state needs distinct levels, got {n1} twice")));
    }
    let norm = c1.norm_sqr() + c2.norm_sqr();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(invalid(format!(
            "|c1|² + |c2|² must be 1 within 1e-12, got {norm}"
        )));
    }
    let (i1, i2) = (basis.index_of(n1)?, basis.index_of(n2)?);
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.len()];
    amplitudes[i1] = c1;
    amplitudes[i2] = c2;
    StateCoefficients::new(amplitudes)
}

/// Gaussian packet with position-density standard deviation `sigma` centred
/// at `h`, at rest.
///
/// For the bouncer the packet is made odd about the floor,
/// ψ0(z) ∝ G(z − h) − G(z + h), so that ψ0(0) = 0 and the state lies in the
/// span of the Airy eigenfunctions. For h ≥ 3σ the image term is below
/// e^{-9/2} ≈ 1e-2 of the peak at the floor and negligible inside the bulk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket {
    pub center: f64,
    pub sigma: f64,
}

impl GaussianPacket {
    pub fn new(center: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() || !center.is_finite() {
            return Err(invalid(format!(
                "Gaussian needs finite centre and positive width, got h = {center}, sigma = {sigma}"
            )));
        }
        Ok(GaussianPacket { center, sigma })
    }

    fn bare(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.sigma;
        (-0.25 * u * u).exp()
    }

    /// Unnormalized ψ0(z) for `model`.
    pub fn amplitude(&self, model: &Model, z: f64) -> f64 {
        match model {
            Model::Oscillator(_) => self.bare(z),
            Model::Bouncer(_) => {
                if z <= 0.0 {
                    0.0
                } else {
                    let u = (z + self.center) / self.sigma;
                    self.bare(z) - (-0.25 * u * u).exp()
                }
            }
        }
    }

    /// Integration range carrying all but ~e^{-72} of the density.
    fn support(&self, model: &Model) -> (f64, f64) {
        let lo = self.center - 12.0 * self.sigma;
        let hi = self.center + 12.0 * self.sigma;
        match model {
            Model::Bouncer(_) => (lo.max(0.0), hi),
            Model::Oscillator(_) => (lo, hi),
        }
    }
}

/// c_n = ⟨φ_n|ψ⟩ for a real wavefunction `psi` supported on `[a, b]`,
/// normalized there first. Fails if the captured norm is below 0.999.
pub fn project_function<F>(basis: &EnergyBasis, psi: F, a: f64, b: f64) -> Result<StateCoefficients>
where
    F: Fn(f64) -> f64 + Sync,
{
    if !(a < b) {
        return Err(invalid(format!("projection range must satisfy a < b, got [{a}, {b}]")));
    }
    let model = basis.model();
    // Local wavenumber of the highest level bounds the oscillation rate.
    let e_max = basis.energies()[basis.len() - 1];
    let k_max = (2.0 * model.mass() * e_max).sqrt() / model.hbar();
    let panels = ((2.0 * (b - a) * k_max).ceil() as usize).max(256);
    let rule = PanelRule::new(a, b, panels)?;
    let nodes = rule.nodes();
    let psi_vals: Vec<f64> = nodes.iter().map(|&z| psi(z)).collect();
    let norm = rule.integrate_product(None, &psi_vals, &psi_vals).value;
    if !(norm > 0.0) {
        return Err(invalid("wavefunction has zero norm on the projection range"));
    }
    let scale = 1.0 / norm.sqrt();

    let amplitudes: Vec<Complex64> = (0..basis.len())
        .into_par_iter()
        .map(|i| {
            let n = basis.level_of(i);
            let phi: Vec<f64> = nodes
                .iter()
                .map(|&z| basis.eval_eigenfunction(n, z).unwrap_or(0.0))
                .collect();
            Complex64::new(scale * rule.integrate_product(None, &phi, &psi_vals).value, 0.0)
        })
        .collect();

    let coeffs = StateCoefficients::new(amplitudes)?;
    if coeffs.captured_norm() < MIN_CAPTURED_NORM {
        return Err(Error::Truncation {
            captured: coeffs.captured_norm(),
            required: MIN_CAPTURED_NORM,
            n_max: basis.last_level(),
        });
    }
    Ok(coeffs)
}

/// Project a Gaussian packet onto `basis`.
pub fn project_gaussian(basis: &EnergyBasis, p: &GaussianPacket) -> Result<StateCoefficients> {
    let model = *basis.model();
    if let Model::Bouncer(_) = model {
        if !(p.center > 0.0) {
            return Err(invalid(format!("Gaussian centre must be above the floor, got {}", p.center)));
        }
    }
    let grid = basis.grid();
    if p.center < grid.start() || p.center > grid.end() {
        return Err(invalid(format!(
            "Gaussian centre {} lies outside the grid [{}, {}]",
            p.center,
            grid.start(),
            grid.end()
        )));
    }
    let (a, b) = p.support(&model);
    project_function(basis, |z| p.amplitude(&model, z), a, b)
}

/// Build the smallest default basis whose projection of `p` captures at
/// least 1 − 1e-6, trying up to [`MAX_AUTO_LEVELS`] levels.
pub fn project_gaussian_auto(model: &Model, p: &GaussianPacket) -> Result<(EnergyBasis, StateCoefficients)> {
    let mut last = None;
    for cap in [20, 40, 80, 160, MAX_AUTO_LEVELS] {
        let basis = default_basis(model, cap)?;
        let coeffs = match project_gaussian(&basis, p) {
            Ok(c) => c,
            Err(Error::Truncation { .. }) => continue,
            Err(e) => return Err(e),
        };
        if coeffs.captured_norm() >= TARGET_CAPTURED_NORM {
            let pops = coeffs.populations();
            let mut acc = 0.0;
            let mut keep = pops.len();
            for (i, w) in pops.iter().enumerate() {
                acc += w;
                if acc >= TARGET_CAPTURED_NORM {
                    keep = i + 1;
                    break;
                }
            }
            return Ok((basis.truncated(keep)?, coeffs.truncated(keep)?));
        }
        last = Some((basis, coeffs));
    }
    match last {
        Some((basis, coeffs)) => Ok((basis, coeffs)),
        None => Err(Error::Truncation {
            captured: 0.0,
            required: MIN_CAPTURED_NORM,
            n_max: MAX_AUTO_LEVELS,
        }),
    }
}

/// Σ c_n φ_n sampled on the basis grid (real part; the projections of real
/// wavefunctions are real).
pub fn reconstruct_on_grid(basis: &EnergyBasis, c: &StateCoefficients) -> Result<Vec<Complex64>> {
    if c.len() != basis.len() {
        return Err(invalid(format!(
            "state has {} amplitudes but basis has {} levels",
            c.len(),
            basis.len()
        )));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); basis.grid().len()];
    for (i, amp) in c.amplitudes().iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let phi = basis.eigenfunction(basis.level_of(i))?;
        for (o, &p) in out.iter_mut().zip(phi) {
            *o += amp * p;
        }
    }
    Ok(out)
}

/// Density matrix ρ_nm in the energy basis at time `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrixInBasis {
    rho: DMatrix<Complex64>,
    time: f64,
}

impl DensityMatrixInBasis {
    /// Check Hermiticity to 1e-12 and non-negativity of the diagonal.
    pub fn new(rho: DMatrix<Complex64>, time: f64) -> Result<Self> {
        if !rho.is_square() || rho.nrows() == 0 {
            return Err(invalid("density matrix must be square and non-empty"));
        }
        let n = rho.nrows();
        for i in 0..n {
            for j in i..n {
                if (rho[(i, j)] - rho[(j, i)].conj()).norm() > 1e-12 {
                    return Err(invalid(format!("density matrix is not Hermitian at ({i}, {j})")));
                }
            }
            if rho[(i, i)].re < -1e-12 {
                return Err(invalid(format!("negative population at {i}")));
            }
        }
        Ok(DensityMatrixInBasis { rho, time })
    }

    pub(crate) fn from_parts(rho: DMatrix<Complex64>, time: f64) -> Self {
        DensityMatrixInBasis { rho, time }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn len(&self) -> usize {
        self.rho.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn trace(&self) -> f64 {
        (0..self.len()).map(|i| self.rho[(i, i)].re).sum()
    }

    /// Largest |ρ_nm − ρ_mn*|.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.rho[(i, j)] - self.rho[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = SymmetricEigen::new(self.rho.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        v.sort_by(|a, b| a.total_cmp(b));
        v
    }
}

/// ρ_nm = c_n c_m*.
pub fn density_from_pure(c: &StateCoefficients) -> DensityMatrixInBasis {
    let a = c.amplitudes();
    let rho = DMatrix::from_fn(a.len(), a.len(), |i, j| a[i] * a[j].conj());
    DensityMatrixInBasis { rho, time: 0.0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{bouncer_basis, BouncerParams, SpatialGrid};

    fn bouncer(n_max: usize) -> EnergyBasis {
        let p = BouncerParams::default();
        bouncer_basis(&p, n_max, &SpatialGrid::bouncer_default(&p, n_max).unwrap()).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn fig1_state_and_density() {
        let b = bouncer(4);
        let s = two_state(&b, 1, 2, c(0.5), c(3f64.sqrt() / 2.0)).unwrap();
        assert_eq!(s.len(), 4);
        assert!((s.captured_norm() - 1.0).abs() < 1e-15);
        let rho = density_from_pure(&s);
        let m = rho.matrix();
        assert!((m[(0, 0)].re - 0.25).abs() < 1e-15);
        assert!((m[(1, 1)].re - 0.75).abs() < 1e-15);
        assert!((m[(0, 1)].norm() - 3f64.sqrt() / 4.0).abs() < 1e-15);
        assert!((rho.trace() - s.captured_norm()).abs() < 1e-15);
        assert_eq!(m[(2, 2)], c(0.0));
    }

    #[test]
    fn two_state_rejects_bad_input() {
        let b = bouncer(3);
        assert!(two_state(&b, 1, 1, c(1.0), c(0.0)).is_err());
        assert!(two_state(&b, 1, 2, c(1.0), c(0.1)).is_err());
        assert!(two_state(&b, 0, 2, c(1.0), c(0.0)).is_err());
        assert!(two_state(&b, 1, 4, c(1.0), c(0.0)).is_err());
    }

    #[test]
    fn pure_density_is_rank_one() {
        let b = bouncer(5);
        let s = two_state(&b, 2, 5, Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)).unwrap();
        let ev = density_from_pure(&s).eigenvalues();
        assert!((ev[4] - 1.0).abs() < 1e-12);
        assert!(ev[3].abs() <= 1e-8);
    }

    #[test]
    fn eigenfunction_projects_to_unit_vector() {
        let b = bouncer(8);
        let z_end = b.grid().end();
        let s = project_function(&b, |z| b.eval_eigenfunction(4, z).unwrap(), 0.0, z_end).unwrap();
        for (i, a) in s.amplitudes().iter().enumerate() {
            let expect = if b.level_of(i) == 4 { 1.0 } else { 0.0 };
            assert!((a.re - expect).abs() < 1e-8, "c_{} = {a}", b.level_of(i));
        }
    }

    #[test]
    fn antisymmetrized_packet_vanishes_at_floor() {
        let p = GaussianPacket::new(2.0, 1.0).unwrap();
        let m = Model::Bouncer(BouncerParams::default());
        assert_eq!(p.amplitude(&m, 0.0), 0.0);
        assert!(p.amplitude(&m, 1e-9).abs() < 1e-8);
        assert!(GaussianPacket::new(1.0, 0.0).is_err());
    }

    #[test]
    fn undersized_basis_reports_truncation() {
        let b = bouncer(3);
        let p = GaussianPacket::new(10.0, 1.0).unwrap();
        assert!(matches!(project_gaussian(&b, &p), Err(Error::Truncation { .. })));
    }
}
