//! Closed-form estimates for the bouncer and for a dropped atomic cloud:
//! WKB level spacing, the fastest damping time of a band of levels, the
//! Wigner-function energy spread of a Gaussian cloud and its decay constant,
//! the fluorescence intensity law, and κ_E calibration.
//!
//! The cloud formulas are meant for SI inputs.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::dynamics::MeasurementCoupling;
use crate::error::{invalid, Result};
use crate::models::{characteristic_length, BouncerParams, UnitSystem};
use crate::numerics::airy_zeros;

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(invalid(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

/// WKB spacing E_n − E_{n−1} = πħ √(g / (2 z_n)), z_n = z0 λ_n.
pub fn wkb_spacing(p: &BouncerParams, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(invalid(format!("WKB spacing needs n >= 2, got {n}")));
    }
    let z_n = characteristic_length(p) * airy_zeros(n)?.as_slice()[n - 1];
    Ok(PI * p.hbar * (p.gravity / (2.0 * z_n)).sqrt())
}

/// WKB estimate λ_n ≈ (3π(n − 1/4)/2)^(2/3).
pub fn wkb_airy_zero(n: usize) -> f64 {
    (1.5 * PI * (n as f64 - 0.25)).powf(2.0 / 3.0)
}

/// Shortest decoherence time within the band n̄ ± Δn̄, from WKB energies:
///
/// τ_min = (2/3π)^(4/3) · 8 m² z0⁴ / (κ ħ⁴) · [(n̄+Δn̄−1/4)^(2/3) − (n̄−Δn̄−1/4)^(2/3)]⁻².
pub fn tau_min(n_bar: usize, delta_n: usize, kappa: f64, mass: f64, z0: f64, hbar: f64) -> Result<f64> {
    if delta_n == 0 || delta_n >= n_bar {
        return Err(invalid(format!(
            "band needs 1 <= delta_n < n_bar, got n_bar = {n_bar}, delta_n = {delta_n}"
        )));
    }
    positive("kappa", kappa)?;
    positive("mass", mass)?;
    positive("z0", z0)?;
    positive("hbar", hbar)?;
    let hi = (n_bar as f64 + delta_n as f64 - 0.25).powf(2.0 / 3.0);
    let lo = (n_bar as f64 - delta_n as f64 - 0.25).powf(2.0 / 3.0);
    let pre = (2.0 / (3.0 * PI)).powf(4.0 / 3.0) * 8.0 * mass * mass * z0.powi(4) / (kappa * hbar.powi(4));
    Ok(pre / (hi - lo).powi(2))
}

/// Gaussian phase-space cloud: centre height z_E, spreads z_i and p_zi,
/// N = z_i p_zi / ħ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPhaseSpace {
    pub center: f64,
    pub position_spread: f64,
    pub momentum_spread: f64,
    pub uncertainty: f64,
}

impl GaussianPhaseSpace {
    pub fn new(center: f64, position_spread: f64, uncertainty: f64, hbar: f64) -> Result<Self> {
        positive("z_i", position_spread)?;
        positive("hbar", hbar)?;
        check_uncertainty(uncertainty)?;
        Ok(GaussianPhaseSpace {
            center,
            position_spread,
            momentum_spread: uncertainty * hbar / position_spread,
            uncertainty,
        })
    }
}

fn check_uncertainty(n: f64) -> Result<()> {
    if !(n >= 0.5) || !n.is_finite() {
        return Err(invalid(format!("uncertainty product N must be >= 1/2, got {n}")));
    }
    Ok(())
}

/// ΔE = m g z0 [2 N⁴ (z0/z_i)⁴ + (z_i/z0)²]^(1/2).
pub fn energy_spread(mass: f64, gravity: f64, z0: f64, z_i: f64, n: f64) -> Result<f64> {
    positive("mass", mass)?;
    positive("gravity", gravity)?;
    positive("z0", z0)?;
    positive("z_i", z_i)?;
    check_uncertainty(n)?;
    let r = z0 / z_i;
    Ok(mass * gravity * z0 * (2.0 * n.powi(4) * r.powi(4) + r.powi(-2)).sqrt())
}

/// τ = 2 / (κ ΔE²) for the cloud's energy spread.
pub fn quantum_decay_constant(kappa: f64, mass: f64, gravity: f64, z0: f64, z_i: f64, n: f64) -> Result<f64> {
    positive("kappa", kappa)?;
    let de = energy_spread(mass, gravity, z0, z_i, n)?;
    Ok(2.0 / (kappa * de * de))
}

/// Width z_i = 2^(1/3) N^(2/3) z0 minimizing the energy spread.
pub fn optimal_width(z0: f64, n: f64) -> Result<f64> {
    positive("z0", z0)?;
    check_uncertainty(n)?;
    Ok(2f64.cbrt() * n.powf(2.0 / 3.0) * z0)
}

/// Largest decay constant over z_i, reached at [`optimal_width`]:
/// τ_max = (2^(4/3)/3) κ⁻¹ m⁻² g⁻² z0⁻² N^(−4/3).
pub fn tau_max(kappa: f64, mass: f64, gravity: f64, z0: f64, n: f64) -> Result<f64> {
    positive("kappa", kappa)?;
    positive("mass", mass)?;
    positive("gravity", gravity)?;
    positive("z0", z0)?;
    check_uncertainty(n)?;
    Ok(2f64.powf(4.0 / 3.0) / 3.0 / (kappa * (mass * gravity * z0).powi(2) * n.powf(4.0 / 3.0)))
}

/// Inputs of the intensity law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityParams {
    pub initial: f64,
    pub radiative_lifetime: f64,
    /// Vibrational quantum ħω.
    pub quantum: f64,
}

impl IntensityParams {
    pub fn new(initial: f64, radiative_lifetime: f64, quantum: f64) -> Result<Self> {
        positive("I0", initial)?;
        positive("tau_rad", radiative_lifetime)?;
        positive("hbar omega", quantum)?;
        Ok(IntensityParams {
            initial,
            radiative_lifetime,
            quantum,
        })
    }
}

/// I(t) = I0 exp{−exp[κ (ħω)² t] t / τ_rad}.
///
/// Taken verbatim: for κ > 0 this decays faster than the unmeasured
/// exponential, although the effect it is meant to describe is an
/// inhibition of the decay. Returns 0 once the inner exponent passes 700.
pub fn intensity(t: f64, p: &IntensityParams, coupling: &MeasurementCoupling) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid(format!("time must be finite and non-negative, got {t}")));
    }
    let inner = coupling.kappa() * p.quantum * p.quantum * t;
    if inner > 700.0 {
        return Ok(0.0);
    }
    Ok(p.initial * (-inner.exp() * t / p.radiative_lifetime).exp())
}

/// κ_E = multiplier · 4 ω_R / ΔE², with κ_crit = 4 ω_R.
pub fn kappa_from_itano(omega_r: f64, level_gap: f64, multiplier: f64) -> Result<MeasurementCoupling> {
    positive("omega_R", omega_r)?;
    positive("level gap", level_gap)?;
    positive("multiplier", multiplier)?;
    MeasurementCoupling::new(multiplier * 4.0 * omega_r / (level_gap * level_gap), UnitSystem::Si)
}

/// Log-spaced values from `lo` to `hi`, both included.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    positive("lo", lo)?;
    if !(hi > lo) || count < 2 {
        return Err(invalid("log_space needs 0 < lo < hi and at least two points"));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..count)
        .map(|i| {
            if i == 0 {
                lo
            } else if i + 1 == count {
                hi
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect())
}

/// One τ(z_i) curve per N on the common abscissa `ratios` = z_i / z0.
pub fn decay_curves(
    kappa: f64,
    mass: f64,
    gravity: f64,
    z0: f64,
    uncertainties: &[f64],
    ratios: &[f64],
) -> Result<Vec<Vec<f64>>> {
    uncertainties
        .par_iter()
        .map(|&n| {
            ratios
                .iter()
                .map(|&r| quantum_decay_constant(kappa, mass, gravity, z0, r * z0, n))
                .collect()
        })
        .collect()
}
