//! Evolution under continuous energy measurement, in closed form per
//! energy-basis element.
//!
//! Nonselective: ρ_nm(t) = exp{−i(E_n−E_m)t/ħ − (κ/2)(E_n−E_m)² t} ρ_nm(0).
//! Selective, for a registered result E:
//! c_n(t) = c_n(0) exp{−iE_n t/ħ − κ(E_n−E)² t}, with decaying norm.
//!
//! Time series are obtained by sampling these formulas, never by stepping.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::models::{EnergyBasis, Model, UnitSystem};
use crate::states::{DensityMatrixInBasis, StateCoefficients};

/// Selective averages are refused once ‖ψ‖² drops below this.
pub const NORM_FLOOR: f64 = 1e-300;

/// Measurement strength κ_E in energy⁻²·time⁻¹.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementCoupling {
    kappa: f64,
    units: UnitSystem,
}

impl MeasurementCoupling {
    pub fn new(kappa: f64, units: UnitSystem) -> Result<Self> {
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(invalid(format!("kappa_E must be finite and non-negative, got {kappa}")));
        }
        Ok(MeasurementCoupling { kappa, units })
    }

    pub fn unmeasured(units: UnitSystem) -> Self {
        MeasurementCoupling { kappa: 0.0, units }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn units(&self) -> UnitSystem {
        self.units
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid(format!("time must be finite and non-negative, got {t}")));
    }
    Ok(())
}

fn check_size(basis: &EnergyBasis, n: usize) -> Result<()> {
    if n != basis.len() {
        return Err(invalid(format!(
            "state has {n} levels but basis has {}",
            basis.len()
        )));
    }
    Ok(())
}

/// exp{−iΔt/ħ − (κ/2)Δ² t} for Δ = E_n − E_m.
fn coherence_factor(delta: f64, hbar: f64, kappa: f64, t: f64) -> Complex64 {
    let decay = (-0.5 * kappa * delta * delta * t).exp();
    Complex64::from_polar(decay, -delta * t / hbar)
}

/// ρ(t) from ρ(0) after elapsed time `t`; the diagonal is left untouched.
pub fn evolve_nonselective(
    rho0: &DensityMatrixInBasis,
    basis: &EnergyBasis,
    coupling: &MeasurementCoupling,
    t: f64,
) -> Result<DensityMatrixInBasis> {
    check_time(t)?;
    check_size(basis, rho0.len())?;
    let e = basis.energies();
    let hbar = basis.hbar();
    let r0 = rho0.matrix();
    let rho = DMatrix::from_fn(r0.nrows(), r0.ncols(), |i, j| {
        if i == j {
            r0[(i, i)]
        } else {
            r0[(i, j)] * coherence_factor(e[i] - e[j], hbar, coupling.kappa, t)
        }
    });
    Ok(DensityMatrixInBasis::from_parts(rho, rho0.time() + t))
}

/// ⟨Q(t)⟩ = Σ_nm ρ_nm(t) Q_mn.
pub fn average_position_nonselective(
    rho0: &DensityMatrixInBasis,
    basis: &EnergyBasis,
    coupling: &MeasurementCoupling,
    t: f64,
) -> Result<f64> {
    check_time(t)?;
    check_size(basis, rho0.len())?;
    Ok(nonselective_position_unchecked(rho0, basis, coupling.kappa, t))
}

fn nonselective_position_unchecked(
    rho0: &DensityMatrixInBasis,
    basis: &EnergyBasis,
    kappa: f64,
    t: f64,
) -> f64 {
    let e = basis.energies();
    let q = basis.position_matrix();
    let r = rho0.matrix();
    let hbar = basis.hbar();
    let n = r.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        acc += r[(i, i)].re * q[(i, i)];
        for j in (i + 1)..n {
            let rij = r[(i, j)];
            if rij == Complex64::new(0.0, 0.0) || q[(j, i)] == 0.0 {
                continue;
            }
            // ρ_ij Q_ji + ρ_ji Q_ij = 2 Re(ρ_ij) Q_ij for Hermitian ρ, real symmetric Q.
            acc += 2.0 * (rij * coherence_factor(e[i] - e[j], hbar, kappa, t)).re * q[(j, i)];
        }
    }
    acc
}

/// ⟨Q⟩ at each of `times`, evaluated in parallel.
pub fn position_series_nonselective(
    rho0: &DensityMatrixInBasis,
    basis: &EnergyBasis,
    coupling: &MeasurementCoupling,
    times: &[f64],
) -> Result<Vec<f64>> {
    check_size(basis, rho0.len())?;
    for &t in times {
        check_time(t)?;
    }
    Ok(times
        .par_iter()
        .map(|&t| nonselective_position_unchecked(rho0, basis, coupling.kappa, t))
        .collect())
}

/// Decay constant of a coherence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayTime {
    Finite(f64),
    /// Populations, or any element when κ_E = 0, never decay.
    Infinite,
}

impl DecayTime {
    pub fn finite(self) -> Option<f64> {
        match self {
            DecayTime::Finite(t) => Some(t),
            DecayTime::Infinite => None,
        }
    }
}

/// τ_nm = 2 / (κ_E (E_n − E_m)²) for quantum numbers `n`, `m`.
pub fn decoherence_time(
    basis: &EnergyBasis,
    n: usize,
    m: usize,
    coupling: &MeasurementCoupling,
) -> Result<DecayTime> {
    let delta = basis.energy(n)? - basis.energy(m)?;
    if n == m || coupling.kappa == 0.0 || delta == 0.0 {
        return Ok(DecayTime::Infinite);
    }
    Ok(DecayTime::Finite(2.0 / (coupling.kappa * delta * delta)))
}

/// Σ_n ρ_nn Q_nn, the value ⟨Q⟩ settles to once coherences have decayed.
pub fn asymptotic_position(rho0: &DensityMatrixInBasis, basis: &EnergyBasis) -> Result<f64> {
    check_size(basis, rho0.len())?;
    let q = basis.position_matrix();
    let r = rho0.matrix();
    Ok((0..r.nrows()).map(|i| r[(i, i)].re * q[(i, i)]).sum())
}

/// Selective state: unnormalized amplitudes, the registered energy and time.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedWavefunction {
    amplitudes: Vec<Complex64>,
    energy: f64,
    time: f64,
}

impl RestrictedWavefunction {
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Registered measurement result E.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// ‖ψ‖² = Σ|c_n(t)|².
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// c_n(0) exp{−iE_n t/ħ − κ(E_n − E)² t}.
fn selective_amplitude(c0: Complex64, en: f64, e: f64, hbar: f64, kappa: f64, t: f64) -> Complex64 {
    let d = en - e;
    c0 * Complex64::from_polar((-kappa * d * d * t).exp(), -en * t / hbar)
}

/// Restricted wavefunction after time `t` given registered energy `e`.
pub fn evolve_selective(
    c0: &StateCoefficients,
    basis: &EnergyBasis,
    coupling: &MeasurementCoupling,
    e: f64,
    t: f64,
) -> Result<RestrictedWavefunction> {
    check_time(t)?;
    check_size(basis, c0.len())?;
    if !e.is_finite() {
        return Err(invalid(format!("registered energy must be finite, got {e}")));
    }
    let hbar = basis.hbar();
    let amplitudes = c0
        .amplitudes()
        .iter()
        .zip(basis.energies())
        .map(|(&c, &en)| selective_amplitude(c, en, e, hbar, coupling.kappa, t))
        .collect();
    Ok(RestrictedWavefunction {
        amplitudes,
        energy: e,
        time: t,
    })
}

/// ⟨ψ|Q|ψ⟩ / ⟨ψ|ψ⟩ for the restricted wavefunction at time `t`.
pub fn average_position_selective(
    c0: &StateCoefficients,
    basis: &EnergyBasis,
    coupling: &MeasurementCoupling,
    e: f64,
    t: f64,
) -> Result<f64> {
    selective_point(c0, basis, coupling, e, t).map(|(q, _)| q)
}

/// `(⟨Q⟩_[E], ‖ψ‖²)` at time `t`.
pub fn selective_point(
    c0: &StateCoefficients,
    basis: &EnergyBasis,
    coupling: &MeasurementCoupling,
    e: f64,
    t: f64,
) -> Result<(f64, f64)> {
    let psi = evolve_selective(c0, basis, coupling, e, t)?;
    let norm = psi.norm_sqr();
    if !(norm >= NORM_FLOOR) {
        return Err(Error::NormUnderflow { norm, t });
    }
    let a = psi.amplitudes();
    let q = basis.position_matrix();
    let mut acc = 0.0;
    for i in 0..a.len() {
        if a[i].norm_sqr() == 0.0 {
            continue;
        }
        acc += a[i].norm_sqr() * q[(i, i)];
        for j in (i + 1)..a.len() {
            acc += 2.0 * (a[i].conj() * a[j]).re * q[(i, j)];
        }
    }
    Ok((acc / norm, norm))
}

/// `(⟨Q⟩_[E], ‖ψ‖²)` at each of `times`, evaluated in parallel.
pub fn position_series_selective(
    c0: &StateCoefficients,
    basis: &EnergyBasis,
    coupling: &MeasurementCoupling,
    e: f64,
    times: &[f64],
) -> Result<Vec<(f64, f64)>> {
    times
        .par_iter()
        .map(|&t| selective_point(c0, basis, coupling, e, t))
        .collect()
}

/// Oscillator selective decay constant of the (n, n+1) coherence,
/// τ_[E](n) = (τ/4) [(n + 1/2 − E/ħω)² + n + 1 − E/ħω]⁻¹, τ = 2/(κ ħ² ω²).
pub fn ho_selective_time_constant(n: usize, e: f64, omega: f64, hbar: f64, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) || !(omega > 0.0) || !(hbar > 0.0) {
        return Err(invalid("kappa, omega and hbar must be positive"));
    }
    let x = n as f64 + 0.5 - e / (hbar * omega);
    let bracket = x * x + n as f64 + 1.0 - e / (hbar * omega);
    if !(bracket > 0.0) {
        return Err(invalid(format!("selective time-constant bracket is {bracket}, not positive")));
    }
    let tau = 2.0 / (kappa * hbar * hbar * omega * omega);
    Ok(0.25 * tau / bracket)
}

/// Closed form of ⟨Q(t)⟩_[E] for an oscillator state on levels n and n+1:
///
/// 2 Q_{n,n+1} |c_n||c_{n+1}| e^{−t/τ_[E](n)} cos(ωt − θ) / ‖ψ(t)‖²,
///
/// θ = arg c_{n+1} − arg c_n. With κ = 0 the exponential is dropped.
pub fn ho_two_state_selective(
    model: &Model,
    n: usize,
    c_n: Complex64,
    c_n1: Complex64,
    coupling: &MeasurementCoupling,
    e: f64,
    t: f64,
) -> Result<f64> {
    let p = match model {
        Model::Oscillator(p) => p,
        Model::Bouncer(_) => return Err(invalid("closed form applies to the oscillator only")),
    };
    check_time(t)?;
    let hw = p.hbar * p.omega;
    let kappa = coupling.kappa;
    let d0 = (n as f64 + 0.5) * hw - e;
    let d1 = d0 + hw;
    let norm = c_n.norm_sqr() * (-2.0 * kappa * d0 * d0 * t).exp()
        + c_n1.norm_sqr() * (-2.0 * kappa * d1 * d1 * t).exp();
    if !(norm >= NORM_FLOOR) {
        return Err(Error::NormUnderflow { norm, t });
    }
    let damping = if kappa > 0.0 {
        (-t / ho_selective_time_constant(n, e, p.omega, p.hbar, kappa)?).exp()
    } else {
        1.0
    };
    let theta = c_n1.arg() - c_n.arg();
    let q = (p.hbar / (2.0 * p.mass * p.omega)).sqrt() * ((n + 1) as f64).sqrt();
    Ok(2.0 * q * c_n.norm() * c_n1.norm() * damping * (p.omega * t - theta).cos() / norm)
}

/// Regime label for a ⟨Q(t)⟩ series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// At least two interior local maxima.
    Underdamped,
    /// At most one.
    Overdamped,
}

/// Number of strict interior local maxima of a sampled series.
pub fn interior_maxima(values: &[f64]) -> usize {
    values
        .windows(3)
        .filter(|w| w[1] > w[0] && w[1] >= w[2])
        .count()
}

/// Classify a series sampled over [0, 5 τ_12]: two or more interior maxima
/// is underdamped, otherwise overdamped.
pub fn classify_regime(values: &[f64]) -> Regime {
    if interior_maxima(values) >= 2 {
        Regime::Underdamped
    } else {
        Regime::Overdamped
    }
}

/// Least-squares exponential envelope of an oscillation about `baseline`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeFit {
    /// Decay rate γ in A e^{−γ t}.
    pub rate: f64,
    pub amplitude: f64,
    /// Number of extrema used.
    pub points: usize,
}

/// Fit |q(t) − baseline| ≈ A e^{−γt} through the local maxima of the
/// deviation, each refined by a parabola through its neighbours.
pub fn fit_envelope(times: &[f64], values: &[f64], baseline: f64) -> Result<EnvelopeFit> {
    if times.len() != values.len() || times.len() < 5 {
        return Err(invalid("envelope fit needs matching series of at least 5 samples"));
    }
    let dev: Vec<f64> = values.iter().map(|v| (v - baseline).abs()).collect();
    let mut pts = Vec::new();
    for i in 1..dev.len() - 1 {
        if dev[i] > dev[i - 1] && dev[i] >= dev[i + 1] {
            let (y0, y1, y2) = (dev[i - 1], dev[i], dev[i + 1]);
            let h = times[i + 1] - times[i];
            let curv = y0 - 2.0 * y1 + y2;
            let (shift, peak) = if curv < 0.0 {
                let s = 0.5 * (y0 - y2) / curv;
                (s, y1 - 0.25 * (y0 - y2) * s)
            } else {
                (0.0, y1)
            };
            if peak > 0.0 {
                pts.push((times[i] + shift * h, peak.ln()));
            }
        }
    }
    if pts.len() < 2 {
        return Err(Error::NoConvergence {
            what: "envelope fit (too few extrema)".into(),
            iterations: pts.len(),
            residual: f64::NAN,
        });
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    let slope = sxy / sxx;
    Ok(EnvelopeFit {
        rate: -slope,
        amplitude: (my - slope * mt).exp(),
        points: pts.len(),
    })
}
