//! Truncated energy eigenbases for the harmonic oscillator and the
//! gravitational bouncer (a particle above a reflecting floor in a uniform
//! field).
//!
//! A basis carries the energies, the eigenfunctions sampled on a uniform
//! [`SpatialGrid`], and the position matrix Q_nm = ⟨n|z|m⟩. Quantum numbers
//! follow physics conventions: n = 0, 1, … for the oscillator and n = 1, 2, …
//! for the bouncer. Internally levels are stored densely from the first one.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::numerics::{airy_ai, airy_zeros, PanelRule};

/// SI constants used by the SI unit mode.
pub mod si {
    /// Reduced Planck constant, J·s.
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Gravitational acceleration used throughout, m/s².
    pub const GRAVITY: f64 = 9.81;
    /// Mass of a ¹³³Cs atom, kg.
    pub const CESIUM_MASS: f64 = 132.905_451_961 * 1.660_539_066_60e-27;
}

/// Gravity in natural units that makes z0 = 1 when ħ = m = 1.
pub const NATURAL_GRAVITY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnitSystem {
    /// ħ = m = 1; lengths, energies and times are pure numbers.
    Natural,
    Si,
}

impl UnitSystem {
    pub fn as_str(self) -> &'static str {
        match self {
            UnitSystem::Natural => "natural",
            UnitSystem::Si => "SI",
        }
    }
}

fn check_natural(units: UnitSystem, mass: f64, hbar: f64) -> Result<()> {
    if units == UnitSystem::Natural && (mass != 1.0 || hbar != 1.0) {
        return Err(invalid(format!(
            "natural units fix m = hbar = 1 (got m = {mass}, hbar = {hbar})"
        )));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(invalid(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

/// Mass, gravity and ħ of the bouncer, V(z) = m g z above a hard floor at z = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BouncerParams {
    pub mass: f64,
    pub gravity: f64,
    pub hbar: f64,
    pub units: UnitSystem,
}

impl BouncerParams {
    pub fn new(mass: f64, gravity: f64, hbar: f64, units: UnitSystem) -> Result<Self> {
        check_positive("mass", mass)?;
        check_positive("gravity", gravity)?;
        check_positive("hbar", hbar)?;
        check_natural(units, mass, hbar)?;
        Ok(BouncerParams {
            mass,
            gravity,
            hbar,
            units,
        })
    }

    /// ħ = m = 1 with the given g.
    pub fn natural(gravity: f64) -> Result<Self> {
        Self::new(1.0, gravity, 1.0, UnitSystem::Natural)
    }

    /// SI values with ħ from [`si::HBAR`].
    pub fn si(mass: f64, gravity: f64) -> Result<Self> {
        Self::new(mass, gravity, si::HBAR, UnitSystem::Si)
    }
}

impl Default for BouncerParams {
    /// Natural units with g = 1/2, so that z0 = 1 and E_n = λ_n / 2.
    fn default() -> Self {
        BouncerParams {
            mass: 1.0,
            gravity: NATURAL_GRAVITY,
            hbar: 1.0,
            units: UnitSystem::Natural,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    pub mass: f64,
    pub omega: f64,
    pub hbar: f64,
    pub units: UnitSystem,
}

impl OscillatorParams {
    pub fn new(mass: f64, omega: f64, hbar: f64, units: UnitSystem) -> Result<Self> {
        check_positive("mass", mass)?;
        check_positive("omega", omega)?;
        check_positive("hbar", hbar)?;
        check_natural(units, mass, hbar)?;
        Ok(OscillatorParams {
            mass,
            omega,
            hbar,
            units,
        })
    }

    pub fn natural(omega: f64) -> Result<Self> {
        Self::new(1.0, omega, 1.0, UnitSystem::Natural)
    }

    /// Oscillator length √(ħ/(mω)).
    pub fn length(&self) -> f64 {
        (self.hbar / (self.mass * self.omega)).sqrt()
    }
}

/// One of the two model systems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Oscillator(OscillatorParams),
    Bouncer(BouncerParams),
}

impl Model {
    pub fn mass(&self) -> f64 {
        match self {
            Model::Oscillator(p) => p.mass,
            Model::Bouncer(p) => p.mass,
        }
    }

    pub fn hbar(&self) -> f64 {
        match self {
            Model::Oscillator(p) => p.hbar,
            Model::Bouncer(p) => p.hbar,
        }
    }

    pub fn units(&self) -> UnitSystem {
        match self {
            Model::Oscillator(p) => p.units,
            Model::Bouncer(p) => p.units,
        }
    }

    /// Potential energy at `z`; infinite below the bouncer floor.
    pub fn potential(&self, z: f64) -> f64 {
        match self {
            Model::Oscillator(p) => 0.5 * p.mass * p.omega * p.omega * z * z,
            Model::Bouncer(p) => {
                if z > 0.0 {
                    p.mass * p.gravity * z
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Quantum number of the lowest level: 0 for the oscillator, 1 for the bouncer.
    pub fn first_level(&self) -> usize {
        match self {
            Model::Oscillator(_) => 0,
            Model::Bouncer(_) => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Model::Oscillator(_) => "oscillator",
            Model::Bouncer(_) => "bouncer",
        }
    }
}

/// Uniform grid of `points` samples on `[start, end]`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    start: f64,
    end: f64,
    points: usize,
}

/// Default sample count for bases and the finite-difference oracle.
pub const DEFAULT_GRID_POINTS: usize = 4096;

impl SpatialGrid {
    pub fn new(start: f64, end: f64, points: usize) -> Result<Self> {
        if !(start < end) || !start.is_finite() || !end.is_finite() {
            return Err(invalid(format!("grid needs finite start < end, got [{start}, {end}]")));
        }
        if points < 3 {
            return Err(invalid(format!("grid needs at least 3 points, got {points}")));
        }
        Ok(SpatialGrid { start, end, points })
    }

    /// Default bouncer grid: [0, z0 (λ_{n_max} + 10)] with 4096 points.
    pub fn bouncer_default(p: &BouncerParams, n_max: usize) -> Result<Self> {
        let zeros = airy_zeros(n_max)?;
        let lam = zeros.as_slice()[n_max - 1];
        Self::new(0.0, characteristic_length(p) * (lam + 10.0), DEFAULT_GRID_POINTS)
    }

    /// Default oscillator grid: ±ℓ(√(2 n_max + 1) + 8) with 4096 points.
    pub fn oscillator_default(p: &OscillatorParams, n_max: usize) -> Result<Self> {
        let half = p.length() * ((2.0 * n_max as f64 + 1.0).sqrt() + 8.0);
        Self::new(-half, half, DEFAULT_GRID_POINTS)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.end - self.start) / (self.points - 1) as f64
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.end
        } else {
            self.start + i as f64 * self.spacing()
        }
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.coordinate(i)).collect()
    }
}

/// Bouncer length z0 = (ħ² / (2 m² g))^(1/3).
pub fn characteristic_length(p: &BouncerParams) -> f64 {
    (p.hbar * p.hbar / (2.0 * p.mass * p.mass * p.gravity)).cbrt()
}

/// Energies, sampled eigenfunctions and position matrix of a truncated basis.
#[derive(Debug, Clone)]
pub struct EnergyBasis {
    model: Model,
    energies: Vec<f64>,
    grid: SpatialGrid,
    samples: Vec<Vec<f64>>,
    position: DMatrix<f64>,
    bouncer: Option<BouncerData>,
}

#[derive(Debug, Clone)]
struct BouncerData {
    z0: f64,
    zeros: Vec<f64>,
    norms: Vec<f64>,
}

impl EnergyBasis {
    pub fn model(&self) -> &Model {
        &self.model
    }

    /// Number of levels kept.
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn first_level(&self) -> usize {
        self.model.first_level()
    }

    /// Highest quantum number kept.
    pub fn last_level(&self) -> usize {
        self.first_level() + self.len() - 1
    }

    /// Dense index of quantum number `n`.
    pub fn index_of(&self, n: usize) -> Result<usize> {
        if n < self.first_level() || n > self.last_level() {
            return Err(invalid(format!(
                "level {n} outside basis range {}..={}",
                self.first_level(),
                self.last_level()
            )));
        }
        Ok(n - self.first_level())
    }

    /// Quantum number of dense index `i`.
    pub fn level_of(&self, i: usize) -> usize {
        i + self.first_level()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy(&self, n: usize) -> Result<f64> {
        Ok(self.energies[self.index_of(n)?])
    }

    pub fn hbar(&self) -> f64 {
        self.model.hbar()
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    /// Samples φ_n(q_i) on [`Self::grid`].
    pub fn eigenfunction(&self, n: usize) -> Result<&[f64]> {
        Ok(&self.samples[self.index_of(n)?])
    }

    /// φ_n(z) evaluated from the closed form rather than the grid.
    pub fn eval_eigenfunction(&self, n: usize, z: f64) -> Result<f64> {
        let i = self.index_of(n)?;
        Ok(match (&self.model, &self.bouncer) {
            (Model::Bouncer(_), Some(b)) => {
                if z <= 0.0 {
                    0.0
                } else {
                    b.norms[i] * airy_ai(z / b.z0 - b.zeros[i])
                }
            }
            (Model::Oscillator(p), _) => hermite_functions(n, z / p.length(), p.length())[n],
            _ => unreachable!("bouncer basis always carries its Airy data"),
        })
    }

    /// Q_nm over dense indices.
    pub fn position_matrix(&self) -> &DMatrix<f64> {
        &self.position
    }

    /// Q_nm for quantum numbers `n`, `m`.
    pub fn position_element(&self, n: usize, m: usize) -> Result<f64> {
        Ok(self.position[(self.index_of(n)?, self.index_of(m)?)])
    }

    /// z0 for the bouncer, `None` for the oscillator.
    pub fn z0(&self) -> Option<f64> {
        self.bouncer.as_ref().map(|b| b.z0)
    }

    /// λ_n for the bouncer.
    pub fn airy_zero(&self, n: usize) -> Result<f64> {
        let i = self.index_of(n)?;
        let b = self.bouncer.as_ref().ok_or(Error::NotBouncer("airy_zero"))?;
        Ok(b.zeros[i])
    }

    /// Normalization constant C_n of φ_n(z) = C_n Ai(z/z0 − λ_n).
    pub fn normalization(&self, n: usize) -> Result<f64> {
        let i = self.index_of(n)?;
        let b = self.bouncer.as_ref().ok_or(Error::NotBouncer("normalization"))?;
        Ok(b.norms[i])
    }

    /// Keep only the lowest `count` levels.
    pub fn truncated(&self, count: usize) -> Result<EnergyBasis> {
        if count == 0 || count > self.len() {
            return Err(invalid(format!(
                "cannot truncate a {}-level basis to {count} levels",
                self.len()
            )));
        }
        Ok(EnergyBasis {
            model: self.model,
            energies: self.energies[..count].to_vec(),
            grid: self.grid,
            samples: self.samples[..count].to_vec(),
            position: self.position.view((0, 0), (count, count)).into_owned(),
            bouncer: self.bouncer.as_ref().map(|b| BouncerData {
                z0: b.z0,
                zeros: b.zeros[..count].to_vec(),
                norms: b.norms[..count].to_vec(),
            }),
        })
    }
}

/// Classical turning point z_n = z0 λ_n of bouncer level `n`.
pub fn turning_point(basis: &EnergyBasis, n: usize) -> Result<f64> {
    let z0 = basis.z0().ok_or(Error::NotBouncer("turning_point"))?;
    Ok(z0 * basis.airy_zero(n)?)
}

/// Absolute tolerance, in units of z0, for bouncer matrix-element quadrature.
const ELEMENT_TOLERANCE: f64 = 1e-9;

/// Bouncer basis for levels n = 1..=n_max.
///
/// E_n = ħ² λ_n / (2 m z0²) and φ_n(z) = C_n Ai(z/z0 − λ_n), with C_n fixed by
/// quadrature of the unit L² norm over the grid domain. The grid must start
/// at the floor and reach z0 (λ_{n_max} + 8) so the evanescent tail is inside.
pub fn bouncer_basis(p: &BouncerParams, n_max: usize, grid: &SpatialGrid) -> Result<EnergyBasis> {
    let zeros = airy_zeros(n_max)?;
    let zeros = zeros.as_slice().to_vec();
    let z0 = characteristic_length(p);
    if grid.start() != 0.0 {
        return Err(invalid(format!(
            "bouncer grid must start at the floor z = 0, got {}",
            grid.start()
        )));
    }
    let required = z0 * (zeros[n_max - 1] + 8.0);
    if grid.end() < required {
        return Err(Error::GridTooShort {
            required,
            actual: grid.end(),
        });
    }

    // Dimensionless domain s = z/z0. The fastest oscillation has local
    // wavenumber √λ_max near the floor; keep half a radian per panel.
    let s_end = grid.end() / z0;
    let k_max = zeros[n_max - 1].sqrt();
    let panels = ((2.0 * s_end * k_max).ceil() as usize).max(64);
    let rule = PanelRule::new(0.0, s_end, panels)?;
    let nodes = rule.nodes();

    let raw: Vec<Vec<f64>> = zeros
        .par_iter()
        .map(|&lam| nodes.iter().map(|&s| airy_ai(s - lam)).collect())
        .collect();

    let mut norms = Vec::with_capacity(n_max);
    for (i, a) in raw.iter().enumerate() {
        let r = rule.integrate_product(None, a, a);
        if r.error > 1e-12 * r.value {
            return Err(Error::MatrixElement {
                n: i + 1,
                m: i + 1,
                error: r.error,
            });
        }
        // ∫ φ² dz = C² z0 ∫ Ai² ds
        norms.push(1.0 / (z0 * r.value).sqrt());
    }

    let weight: Vec<f64> = nodes.to_vec();
    let mut position = DMatrix::<f64>::zeros(n_max, n_max);
    let rows: Vec<Vec<(f64, f64)>> = (0..n_max)
        .into_par_iter()
        .map(|i| {
            (i..n_max)
                .map(|j| {
                    let r = rule.integrate_product(Some(&weight), &raw[i], &raw[j]);
                    // ⟨i|z|j⟩ = C_i C_j z0² ∫ s Ai Ai ds
                    let scale = norms[i] * norms[j] * z0 * z0;
                    (r.value * scale, r.error * scale)
                })
                .collect()
        })
        .collect();
    for (i, row) in rows.iter().enumerate() {
        for (offset, &(q, err)) in row.iter().enumerate() {
            let j = i + offset;
            if err > ELEMENT_TOLERANCE * z0 {
                return Err(Error::MatrixElement {
                    n: i + 1,
                    m: j + 1,
                    error: err,
                });
            }
            position[(i, j)] = q;
            position[(j, i)] = q;
        }
    }

    let coords = grid.coordinates();
    let samples: Vec<Vec<f64>> = zeros
        .par_iter()
        .zip(norms.par_iter())
        .map(|(&lam, &c)| {
            coords
                .iter()
                .map(|&z| if z <= 0.0 { 0.0 } else { c * airy_ai(z / z0 - lam) })
                .collect()
        })
        .collect();

    let e_unit = p.hbar * p.hbar / (2.0 * p.mass * z0 * z0);
    let energies = zeros.iter().map(|lam| e_unit * lam).collect();

    Ok(EnergyBasis {
        model: Model::Bouncer(*p),
        energies,
        grid: *grid,
        samples,
        position,
        bouncer: Some(BouncerData { z0, zeros, norms }),
    })
}

/// Normalized Hermite functions ψ_0..ψ_n at ξ = x/ℓ, in units of ℓ^(-1/2),
/// by the stable three-term recurrence.
fn hermite_functions(n: usize, xi: f64, length: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let psi0 = PI.powf(-0.25) * (-0.5 * xi * xi).exp() / length.sqrt();
    out.push(psi0);
    if n >= 1 {
        out.push(2f64.sqrt() * xi * psi0);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * xi * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

/// Oscillator basis for levels n = 0..=n_max with E_n = (n + 1/2) ħω and the
/// analytic position matrix ⟨n|Q|n±1⟩ = √(ħ/2mω) √(max(n, m)).
pub fn ho_basis(p: &OscillatorParams, n_max: usize, grid: &SpatialGrid) -> Result<EnergyBasis> {
    let count = n_max + 1;
    let energies: Vec<f64> = (0..count)
        .map(|n| (n as f64 + 0.5) * p.hbar * p.omega)
        .collect();
    let length = p.length();
    let mut samples = vec![Vec::with_capacity(grid.len()); count];
    for z in grid.coordinates() {
        for (row, v) in samples.iter_mut().zip(hermite_functions(n_max, z / length, length)) {
            row.push(v);
        }
    }
    let scale = (p.hbar / (2.0 * p.mass * p.omega)).sqrt();
    let mut position = DMatrix::<f64>::zeros(count, count);
    for n in 0..n_max {
        let q = scale * ((n + 1) as f64).sqrt();
        position[(n, n + 1)] = q;
        position[(n + 1, n)] = q;
    }
    Ok(EnergyBasis {
        model: Model::Oscillator(*p),
        energies,
        grid: *grid,
        samples,
        position,
        bouncer: None,
    })
}

/// Build the basis for `model` on its default grid.
pub fn default_basis(model: &Model, n_max: usize) -> Result<EnergyBasis> {
    match model {
        Model::Bouncer(p) => bouncer_basis(p, n_max, &SpatialGrid::bouncer_default(p, n_max)?),
        Model::Oscillator(p) => ho_basis(p, n_max, &SpatialGrid::oscillator_default(p, n_max)?),
    }
}
