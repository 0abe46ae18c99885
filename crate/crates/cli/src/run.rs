//! The evolution pipeline shared by `run` and the figure commands.

use std::f64::consts::PI;

use qdamp::dynamics::{position_series_nonselective, position_series_selective, MeasurementCoupling};
use qdamp::models::{default_basis, EnergyBasis, Model};
use qdamp::oracle::{integrate_master_ode, GridWavefunction, SelectivePropagator};
use qdamp::states::{
    density_from_pure, project_gaussian, project_gaussian_auto, reconstruct_on_grid, two_state, GaussianPacket,
    StateCoefficients,
};
use qdamp::Error;

use crate::config::{EnergyChoice, Resolved, StateSpec};
use crate::error::CliError;
use crate::output::{Table, VERSION};

/// Populations above this count as "relevant" when choosing the time axis.
pub const RELEVANT_POPULATION: f64 = 0.01;
/// Samples per period of the fastest relevant pair.
pub const SAMPLES_PER_PERIOD: f64 = 20.0;
pub const MIN_SAMPLES: usize = 201;
pub const MAX_SAMPLES: usize = 2_000_001;

/// Basis and initial amplitudes for a resolved config.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub basis: EnergyBasis,
    pub coeffs: StateCoefficients,
}

pub fn prepare(r: &Resolved) -> Result<Prepared, CliError> {
    match r.state {
        StateSpec::TwoState { n1, n2, c1, c2 } => {
            let n_max = r.nmax.unwrap_or(n1.max(n2));
            let basis = default_basis(&r.model, n_max)?;
            let coeffs = two_state(&basis, n1, n2, c1, c2)?;
            Ok(Prepared { basis, coeffs })
        }
        StateSpec::Gaussian { h, sigma } => {
            let packet = GaussianPacket::new(h, sigma)?;
            match r.nmax {
                Some(n) => {
                    let basis = default_basis(&r.model, n)?;
                    let coeffs = project_gaussian(&basis, &packet)?;
                    Ok(Prepared { basis, coeffs })
                }
                None => {
                    let (basis, coeffs) = project_gaussian_auto(&r.model, &packet)?;
                    Ok(Prepared { basis, coeffs })
                }
            }
        }
    }
}

/// Registered energy of a selective run.
pub fn registered_energy(r: &Resolved, basis: &EnergyBasis) -> Result<Option<f64>, CliError> {
    Ok(match r.selective {
        None => None,
        Some(EnergyChoice::Value(e)) => Some(e),
        Some(EnergyChoice::Level(n)) => Some(
            basis
                .energy(n)
                .map_err(|_| CliError::Config(format!("selective.level: level {n} is outside the basis")))?,
        ),
    })
}

/// Smallest and largest gaps among the relevant levels.
fn relevant_gaps(p: &Prepared) -> (f64, f64) {
    let pops = p.coeffs.populations();
    let mut idx: Vec<usize> = (0..pops.len()).filter(|&i| pops[i] > RELEVANT_POPULATION).collect();
    if idx.len() < 2 {
        let mut order: Vec<usize> = (0..pops.len()).collect();
        order.sort_by(|&a, &b| pops[b].total_cmp(&pops[a]).then(a.cmp(&b)));
        idx = order[..2].to_vec();
        idx.sort_unstable();
    }
    let e = p.basis.energies();
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for (k, &i) in idx.iter().enumerate() {
        for &j in &idx[k + 1..] {
            let d = (e[i] - e[j]).abs();
            lo = lo.min(d);
            hi = hi.max(d);
        }
    }
    (lo, hi)
}

/// Sample times. Without `time.end` the span is 5 τ of the slowest relevant
/// pair (or ten of its periods when κ = 0); without `time.samples` the
/// fastest relevant pair gets 20 samples per period, at least 201 in total.
pub fn time_axis(r: &Resolved, p: &Prepared) -> Result<Vec<f64>, CliError> {
    let hbar = p.basis.hbar();
    let (slow, fast) = relevant_gaps(p);
    let span = match r.t_end {
        Some(end) => end - r.t_start,
        None if r.kappa > 0.0 => 5.0 * 2.0 / (r.kappa * slow * slow),
        None => 10.0 * 2.0 * PI * hbar / slow,
    };
    let samples = match r.samples {
        Some(n) => n,
        None => {
            let per = 2.0 * PI * hbar / fast;
            let n = (span / per * SAMPLES_PER_PERIOD).ceil() + 1.0;
            if !(n <= MAX_SAMPLES as f64) {
                return Err(CliError::Config(format!(
                    "time: default axis needs {n:e} samples; set time.end or time.samples"
                )));
            }
            (n as usize).max(MIN_SAMPLES)
        }
    };
    let end = r.t_start + span;
    Ok((0..samples)
        .map(|i| {
            if i + 1 == samples {
                end
            } else {
                r.t_start + span * i as f64 / (samples - 1) as f64
            }
        })
        .collect())
}

/// ⟨Q⟩ series, plus the restricted-wavefunction norm for selective runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub q: Vec<f64>,
    pub norm: Option<Vec<f64>>,
}

pub fn evolve(p: &Prepared, model: &Model, kappa: f64, energy: Option<f64>, times: &[f64]) -> Result<Evolution, CliError> {
    let coupling = MeasurementCoupling::new(kappa, model.units())?;
    match energy {
        None => {
            let rho = density_from_pure(&p.coeffs);
            let q = position_series_nonselective(&rho, &p.basis, &coupling, times)?;
            Ok(Evolution { q, norm: None })
        }
        Some(e) => {
            let pts = position_series_selective(&p.coeffs, &p.basis, &coupling, e, times)?;
            let (q, norm) = pts.into_iter().unzip();
            Ok(Evolution { q, norm: Some(norm) })
        }
    }
}

/// The metadata every output carries, in a fixed order.
pub fn base_meta(t: &mut Table, r: &Resolved, p: &Prepared) {
    t.meta("units", r.model.units().as_str());
    match r.model {
        Model::Bouncer(b) => t.meta("g", format!("{:e}", b.gravity)),
        Model::Oscillator(_) => t.meta("g", "n/a"),
    };
    t.meta("kappa_e", format!("{:e}", r.kappa))
        .meta("n_max", p.basis.last_level())
        .meta("captured_norm", format!("{:e}", p.coeffs.captured_norm()))
        .meta("version", VERSION)
        .meta("config_hash", r.hash())
        .meta("model", r.model.name())
        .meta("mass", format!("{:e}", r.model.mass()))
        .meta("hbar", format!("{:e}", r.model.hbar()));
    if let Model::Oscillator(o) = r.model {
        t.meta("omega", format!("{:e}", o.omega));
    }
    match r.state {
        StateSpec::TwoState { n1, n2, c1, c2 } => {
            t.meta("state", "two_state")
                .meta("n1", n1)
                .meta("n2", n2)
                .meta("c1", format!("{:e}{:+e}i", c1.re, c1.im))
                .meta("c2", format!("{:e}{:+e}i", c2.re, c2.im));
        }
        StateSpec::Gaussian { h, sigma } => {
            t.meta("state", "gaussian")
                .meta("h", format!("{h:e}"))
                .meta("sigma", format!("{sigma:e}"));
        }
    }
}

/// Evolve a resolved config into a table (`t, q_avg` or `t, q_avg, norm`),
/// optionally cross-checked against the grid/ODE oracle.
pub fn simulate(r: &Resolved, oracle: bool) -> Result<(Table, Prepared), CliError> {
    let p = prepare(r)?;
    let times = time_axis(r, &p)?;
    let energy = registered_energy(r, &p.basis)?;
    let ev = evolve(&p, &r.model, r.kappa, energy, &times)?;

    let mut t = Table::new();
    base_meta(&mut t, r, &p);
    match energy {
        Some(e) => t.meta("selective", "true").meta("selective_energy", format!("{e:e}")),
        None => t.meta("selective", "false"),
    };
    t.meta("samples", times.len());
    if oracle {
        let (name, dev) = match energy {
            None => ("rk4", oracle_nonselective(&p, r.kappa, &times, &ev.q)?),
            Some(e) => ("crank_nicolson", oracle_selective(&p, &r.model, r.kappa, e, &times, &ev.q)?),
        };
        t.meta("oracle", name).meta("oracle_max_rel_deviation", format!("{dev:e}"));
    }
    t.column("t", times).column("q_avg", ev.q);
    if let Some(n) = ev.norm {
        t.column("norm", n);
    }
    Ok((t, p))
}

fn max_rel_deviation(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let worst = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if scale > 0.0 {
        worst / scale
    } else {
        worst
    }
}

/// RK4 on the master equation from sample to sample.
fn oracle_nonselective(p: &Prepared, kappa: f64, times: &[f64], q: &[f64]) -> Result<f64, CliError> {
    let e = p.basis.energies();
    let hbar = p.basis.hbar();
    let (lo, hi) = e.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let spread = hi - lo;
    let mut bound = hbar / spread;
    if kappa > 0.0 {
        bound = bound.min(2.0 / (kappa * spread * spread));
    }
    let dt_max = 0.005 * bound;
    let qm = p.basis.position_matrix();
    let mut rho = density_from_pure(&p.coeffs).matrix().clone();
    let mut prev = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let d = t - prev;
        if d > 0.0 {
            let steps = (d / dt_max).ceil();
            rho = integrate_master_ode(&rho, e, hbar, kappa, d / steps, d)?;
        }
        prev = t;
        let n = rho.nrows();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (rho[(i, j)] * qm[(j, i)]).re;
            }
        }
        out.push(acc);
    }
    Ok(max_rel_deviation(&out, q))
}

/// Propagator whose step divides `duration`, no longer than `target`,
/// shortened further if the propagator's stability bound requires it.
fn propagator_for(
    model: &Model,
    p: &Prepared,
    kappa: f64,
    energy: f64,
    duration: f64,
    mut target: f64,
) -> Result<SelectivePropagator, CliError> {
    for _ in 0..4 {
        let dt = duration / (duration / target).ceil();
        match SelectivePropagator::new(model, p.basis.grid(), kappa, energy, dt) {
            Err(Error::StepTooLarge { bound, .. }) => target = 0.9 * bound,
            other => return Ok(other?),
        }
    }
    Err(CliError::Numerical(Error::InvalidInput("could not choose an oracle time step".into())))
}

/// Crank–Nicolson on the basis grid from sample to sample.
fn oracle_selective(
    p: &Prepared,
    model: &Model,
    kappa: f64,
    energy: f64,
    times: &[f64],
    q: &[f64],
) -> Result<f64, CliError> {
    let (_, fast) = relevant_gaps(p);
    let target = 2.0 * PI * p.basis.hbar() / fast / 4000.0;
    let mut psi = GridWavefunction {
        values: reconstruct_on_grid(&p.basis, &p.coeffs)?,
        time: 0.0,
    };
    let grid = p.basis.grid();
    let mut cached: Option<(f64, SelectivePropagator)> = None;
    let mut prev = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let d = t - prev;
        if d > 0.0 {
            let reuse = matches!(&cached, Some((len, _)) if ((len - d) / d).abs() < 1e-12);
            if !reuse {
                cached = Some((d, propagator_for(model, p, kappa, energy, d, target)?));
            }
            let (_, prop) = cached.as_ref().expect("propagator cached");
            let steps = (d / prop.dt()).round();
            prop.advance(&mut psi, steps * prop.dt())?;
        }
        prev = t;
        out.push(psi.mean_position(grid));
    }
    Ok(max_rel_deviation(&out, q))
}

