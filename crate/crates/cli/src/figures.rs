//! Figures 1–4 as tables.

use qdamp::estimates::{decay_curves, log_space, quantum_decay_constant};
use qdamp::numerics::golden_section_minimize;

use crate::config::{sha256_hex, RunConfig, StateConfig};
use crate::error::CliError;
use crate::output::{Table, VERSION};
use crate::run::{base_meta, evolve, prepare, simulate, time_axis};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fig1Variant {
    /// Unmeasured.
    A,
    /// κ = 1e-2.
    B,
    /// κ = 1e-1.
    C,
}

impl Fig1Variant {
    pub fn kappa(self) -> f64 {
        match self {
            Fig1Variant::A => 0.0,
            Fig1Variant::B => 1e-2,
            Fig1Variant::C => 1e-1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Fig1Variant::A => "fig1a",
            Fig1Variant::B => "fig1b",
            Fig1Variant::C => "fig1c",
        }
    }
}

/// The run config equivalent to a Fig. 1 variant: the defaults plus κ.
pub fn fig1_config(v: Fig1Variant) -> RunConfig {
    RunConfig {
        kappa: Some(v.kappa()),
        ..Default::default()
    }
}

/// Natural-unit bouncer, (1/2, √3/2) on levels 1 and 2. Variant a adds the
/// constant columns q11 and q22 that bound the oscillation.
pub fn fig1(v: Fig1Variant, nmax: Option<usize>) -> Result<Table, CliError> {
    let r = fig1_config(v).resolve(nmax)?;
    let (mut t, p) = simulate(&r, false)?;
    if v == Fig1Variant::A {
        let rows = t.rows();
        let q11 = p.basis.position_element(1, 1)?;
        let q22 = p.basis.position_element(2, 2)?;
        t.column("q11", vec![q11; rows]).column("q22", vec![q22; rows]);
    }
    t.meta("figure", v.name());
    Ok(t)
}

pub const GAUSSIAN_CENTER: f64 = 10.0;
pub const GAUSSIAN_KAPPA: f64 = 1e-2;

pub fn gaussian_config(sigma: f64) -> RunConfig {
    RunConfig {
        kappa: Some(GAUSSIAN_KAPPA),
        state: StateConfig {
            kind: Some("gaussian".into()),
            h: Some(GAUSSIAN_CENTER),
            sigma: Some(sigma),
            ..Default::default()
        },
        ..Default::default()
    }
}

/// Gaussian drop at h = 10: `t, q_unmeasured, q_measured` on a shared axis,
/// plus the `n, energy, population` table.
pub fn gaussian_figure(name: &str, sigma: f64, nmax: Option<usize>) -> Result<(Table, Table), CliError> {
    let r = gaussian_config(sigma).resolve(nmax)?;
    let p = prepare(&r)?;
    let times = time_axis(&r, &p)?;
    let free = evolve(&p, &r.model, 0.0, None, &times)?;
    let measured = evolve(&p, &r.model, r.kappa, None, &times)?;

    let mut t = Table::new();
    base_meta(&mut t, &r, &p);
    t.meta("selective", "false").meta("samples", times.len()).meta("figure", name);
    t.column("t", times).column("q_unmeasured", free.q).column("q_measured", measured.q);

    let mut c = Table::new();
    base_meta(&mut c, &r, &p);
    c.meta("figure", format!("{name}_coefficients"));
    let levels = (0..p.basis.len()).map(|i| p.basis.level_of(i) as f64).collect();
    c.column("n", levels)
        .column("energy", p.basis.energies().to_vec())
        .column("population", p.coeffs.populations());
    Ok((t, c))
}

pub fn fig2(nmax: Option<usize>) -> Result<(Table, Table), CliError> {
    gaussian_figure("fig2", 1.0, nmax)
}

pub fn fig3(nmax: Option<usize>) -> Result<(Table, Table), CliError> {
    gaussian_figure("fig3", 3.0, nmax)
}

pub mod fig4_params {
    pub const KAPPA: f64 = 1e53;
    pub const MASS: f64 = 2e-25;
    pub const GRAVITY: f64 = 9.81;
    pub const Z0: f64 = 0.23e-6;
    pub const UNCERTAINTIES: [f64; 4] = [0.5, 20.0, 2e3, 2e5];
    pub const RATIO_MIN: f64 = 0.1;
    pub const RATIO_MAX: f64 = 1e4;
    pub const POINTS: usize = 601;
    /// Reference point marked on the figure: (z_i/z0, τ in s).
    pub const REFERENCE: (f64, f64) = (1e3, 8e-2);
}

/// Column name for the curve of uncertainty product `n`.
pub fn fig4_column(n: f64) -> String {
    format!("tau_N{n:e}")
}

/// τ(z_i/z0) for each N, plus each curve's maximum refined off the grid.
pub fn fig4() -> Result<Table, CliError> {
    use fig4_params::*;
    let ratios = log_space(RATIO_MIN, RATIO_MAX, POINTS)?;
    let curves = decay_curves(KAPPA, MASS, GRAVITY, Z0, &UNCERTAINTIES, &ratios)?;

    let canonical = format!(
        "fig4 kappa={KAPPA:e} mass={MASS:e} g={GRAVITY:e} z0={Z0:e} N={UNCERTAINTIES:?} ratios={RATIO_MIN:e}..{RATIO_MAX:e}x{POINTS}"
    );
    let mut t = Table::new();
    t.meta("units", "SI")
        .meta("g", format!("{GRAVITY:e}"))
        .meta("kappa_e", format!("{KAPPA:e}"))
        .meta("n_max", "n/a")
        .meta("captured_norm", "n/a")
        .meta("version", VERSION)
        .meta("config_hash", sha256_hex(&canonical))
        .meta("mass", format!("{MASS:e}"))
        .meta("z0", format!("{Z0:e}"))
        .meta("figure", "fig4")
        .meta("reference_z_ratio", format!("{:e}", REFERENCE.0))
        .meta("reference_tau", format!("{:e}", REFERENCE.1));
    for (n, curve) in UNCERTAINTIES.iter().zip(&curves) {
        let (ratio, tau) = refine_maximum(*n, &ratios, curve)?;
        t.meta(&format!("max_z_ratio_N{n:e}"), format!("{ratio:e}"))
            .meta(&format!("max_tau_N{n:e}"), format!("{tau:e}"));
    }
    t.column("z_ratio", ratios);
    for (n, curve) in UNCERTAINTIES.iter().zip(curves) {
        t.column(&fig4_column(*n), curve);
    }
    Ok(t)
}

/// Golden-section search in ln(z_i/z0) around the largest grid value.
fn refine_maximum(n: f64, ratios: &[f64], curve: &[f64]) -> Result<(f64, f64), CliError> {
    use fig4_params::*;
    let k = curve
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let lo = ratios[k.saturating_sub(1)].ln();
    let hi = ratios[(k + 1).min(ratios.len() - 1)].ln();
    let tau = |u: f64| quantum_decay_constant(KAPPA, MASS, GRAVITY, Z0, u.exp() * Z0, n);
    tau(lo)?;
    let (u, _) = golden_section_minimize(|u| -tau(u).unwrap_or(f64::NEG_INFINITY), lo, hi, 1e-12);
    Ok((u.exp(), tau(u)?))
}
