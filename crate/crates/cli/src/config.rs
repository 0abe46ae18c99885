//! Run configuration: a TOML file whose keys may be written dotted
//! (`model.g = 0.5`) or as tables. Missing keys take the defaults below.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qdamp::models::{si, BouncerParams, Model, OscillatorParams, UnitSystem, NATURAL_GRAVITY};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// "natural" (ħ = m = 1) or "SI".
    pub units: Option<String>,
    pub kappa: Option<f64>,
    pub nmax: Option<usize>,
    pub output: Option<String>,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub state: StateConfig,
    #[serde(default)]
    pub selective: SelectiveConfig,
    #[serde(default)]
    pub time: TimeConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// "bouncer" or "oscillator".
    pub kind: Option<String>,
    pub mass: Option<f64>,
    pub g: Option<f64>,
    pub hbar: Option<f64>,
    pub omega: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    /// "two_state" or "gaussian".
    pub kind: Option<String>,
    pub n1: Option<usize>,
    pub n2: Option<usize>,
    /// `[re, im]`.
    pub c1: Option<[f64; 2]>,
    pub c2: Option<[f64; 2]>,
    pub h: Option<f64>,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectiveConfig {
    pub enabled: Option<bool>,
    /// Registered energy; alternatively `level` selects E = E_level.
    pub energy: Option<f64>,
    pub level: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub start: Option<f64>,
    pub end: Option<f64>,
    pub samples: Option<usize>,
}

/// Initial state after validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateSpec {
    TwoState {
        n1: usize,
        n2: usize,
        c1: Complex64,
        c2: Complex64,
    },
    Gaussian {
        h: f64,
        sigma: f64,
    },
}

/// Registered energy for a selective run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyChoice {
    Value(f64),
    Level(usize),
}

/// Validated configuration with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub model: Model,
    pub state: StateSpec,
    pub kappa: f64,
    pub selective: Option<EnergyChoice>,
    pub t_start: f64,
    pub t_end: Option<f64>,
    pub samples: Option<usize>,
    pub nmax: Option<usize>,
    pub output: Option<String>,
    /// Canonical TOML of the filled-in config, the input of [`Resolved::hash`].
    pub canonical: String,
}

impl Resolved {
    /// SHA-256 of the canonical config text, hex encoded.
    pub fn hash(&self) -> String {
        sha256_hex(&self.canonical)
    }
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn bad(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

fn positive(field: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(bad(field, format!("must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Validate and fill defaults. `nmax_override` replaces `nmax`.
    pub fn resolve(&self, nmax_override: Option<usize>) -> Result<Resolved, CliError> {
        let units = match self.units.as_deref().unwrap_or("natural") {
            "natural" => UnitSystem::Natural,
            "SI" | "si" => UnitSystem::Si,
            other => return Err(bad("units", format!("expected \"natural\" or \"SI\", got {other:?}"))),
        };
        let (def_mass, def_hbar, def_g) = match units {
            UnitSystem::Natural => (1.0, 1.0, NATURAL_GRAVITY),
            UnitSystem::Si => (si::CESIUM_MASS, si::HBAR, si::GRAVITY),
        };
        let m = &self.model;
        let mass = positive("model.mass", m.mass.unwrap_or(def_mass))?;
        let hbar = positive("model.hbar", m.hbar.unwrap_or(def_hbar))?;
        let kind = m.kind.clone().unwrap_or_else(|| "bouncer".into());
        let model = match kind.as_str() {
            "bouncer" => {
                if m.omega.is_some() {
                    return Err(bad("model.omega", "only applies to the oscillator"));
                }
                let g = positive("model.g", m.g.unwrap_or(def_g))?;
                Model::Bouncer(BouncerParams::new(mass, g, hbar, units).map_err(|e| bad("model", e))?)
            }
            "oscillator" => {
                if m.g.is_some() {
                    return Err(bad("model.g", "only applies to the bouncer"));
                }
                let omega = positive("model.omega", m.omega.unwrap_or(1.0))?;
                Model::Oscillator(OscillatorParams::new(mass, omega, hbar, units).map_err(|e| bad("model", e))?)
            }
            other => return Err(bad("model.kind", format!("expected bouncer or oscillator, got {other:?}"))),
        };
        let first = model.first_level();

        let s = &self.state;
        let state_kind = s.kind.clone().unwrap_or_else(|| "two_state".into());
        let state = match state_kind.as_str() {
            "two_state" => {
                if s.h.is_some() || s.sigma.is_some() {
                    return Err(bad("state", "h and sigma only apply to gaussian states"));
                }
                let c = |v: Option<[f64; 2]>, d: f64| v.map(|a| Complex64::new(a[0], a[1])).unwrap_or(Complex64::new(d, 0.0));
                let n1 = s.n1.unwrap_or(first);
                let n2 = s.n2.unwrap_or(first + 1);
                if n1 < first || n2 < first {
                    return Err(bad("state.n1/n2", format!("levels start at {first} for this model")));
                }
                if n1 == n2 {
                    return Err(bad("state.n2", "must differ from state.n1"));
                }
                let c1 = c(s.c1, 0.5);
                let c2 = c(s.c2, 3f64.sqrt() / 2.0);
                let norm = c1.norm_sqr() + c2.norm_sqr();
                if (norm - 1.0).abs() > 1e-12 {
                    return Err(bad("state.c1/c2", format!("|c1|² + |c2|² must be 1, got {norm}")));
                }
                StateSpec::TwoState { n1, n2, c1, c2 }
            }
            "gaussian" => {
                if s.n1.is_some() || s.n2.is_some() || s.c1.is_some() || s.c2.is_some() {
                    return Err(bad("state", "n1, n2, c1, c2 only apply to two_state"));
                }
                let h = s.h.ok_or_else(|| bad("state.h", "required for gaussian states"))?;
                let sigma = positive("state.sigma", s.sigma.unwrap_or(1.0))?;
                if matches!(model, Model::Bouncer(_)) && !(h > 0.0) {
                    return Err(bad("state.h", "must be above the floor"));
                }
                StateSpec::Gaussian { h, sigma }
            }
            other => return Err(bad("state.kind", format!("expected two_state or gaussian, got {other:?}"))),
        };

        let kappa = self.kappa.unwrap_or(0.0);
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(bad("kappa", format!("must be finite and non-negative, got {kappa}")));
        }

        let sel = &self.selective;
        let selective = if sel.enabled.unwrap_or(false) {
            Some(match (sel.energy, sel.level) {
                (Some(_), Some(_)) => return Err(bad("selective", "give energy or level, not both")),
                (Some(e), None) if e.is_finite() => EnergyChoice::Value(e),
                (Some(e), None) => return Err(bad("selective.energy", format!("must be finite, got {e}"))),
                (None, Some(n)) if n >= first => EnergyChoice::Level(n),
                (None, Some(n)) => return Err(bad("selective.level", format!("levels start at {first}, got {n}"))),
                (None, None) => EnergyChoice::Level(first),
            })
        } else {
            if sel.energy.is_some() || sel.level.is_some() {
                return Err(bad("selective", "energy/level given but selective.enabled is not true"));
            }
            None
        };

        let t = &self.time;
        let t_start = t.start.unwrap_or(0.0);
        if !(t_start >= 0.0) || !t_start.is_finite() {
            return Err(bad("time.start", format!("must be finite and non-negative, got {t_start}")));
        }
        if let Some(end) = t.end {
            if !(end > t_start) || !end.is_finite() {
                return Err(bad("time.end", format!("must exceed time.start, got {end}")));
            }
        }
        if let Some(n) = t.samples {
            if n < 2 {
                return Err(bad("time.samples", "need at least 2 samples"));
            }
        }
        let nmax = nmax_override.or(self.nmax);
        if let Some(n) = nmax {
            if n < first + 1 {
                return Err(bad("nmax", format!("must be at least {}", first + 1)));
            }
            if let StateSpec::TwoState { n1, n2, .. } = state {
                if n1.max(n2) > n {
                    return Err(bad("nmax", format!("must be at least {} to hold the state", n1.max(n2))));
                }
            }
        }

        let canonical = canonical_text(&model, &state, kappa, selective, t_start, t.end, t.samples, nmax);
        Ok(Resolved {
            model,
            state,
            kappa,
            selective,
            t_start,
            t_end: t.end,
            samples: t.samples,
            nmax,
            output: self.output.clone(),
            canonical,
        })
    }
}

/// Canonical TOML for hashing: every effective value written explicitly;
/// the output path is excluded so relocating a run does not change its hash.
#[allow(clippy::too_many_arguments)]
fn canonical_text(
    model: &Model,
    state: &StateSpec,
    kappa: f64,
    selective: Option<EnergyChoice>,
    t_start: f64,
    t_end: Option<f64>,
    samples: Option<usize>,
    nmax: Option<usize>,
) -> String {
    let mut cfg = RunConfig {
        units: Some(model.units().as_str().into()),
        kappa: Some(kappa),
        nmax,
        output: None,
        ..Default::default()
    };
    cfg.model = match model {
        Model::Bouncer(p) => ModelConfig {
            kind: Some("bouncer".into()),
            mass: Some(p.mass),
            g: Some(p.gravity),
            hbar: Some(p.hbar),
            omega: None,
        },
        Model::Oscillator(p) => ModelConfig {
            kind: Some("oscillator".into()),
            mass: Some(p.mass),
            g: None,
            hbar: Some(p.hbar),
            omega: Some(p.omega),
        },
    };
    cfg.state = match *state {
        StateSpec::TwoState { n1, n2, c1, c2 } => StateConfig {
            kind: Some("two_state".into()),
            n1: Some(n1),
            n2: Some(n2),
            c1: Some([c1.re, c1.im]),
            c2: Some([c2.re, c2.im]),
            ..Default::default()
        },
        StateSpec::Gaussian { h, sigma } => StateConfig {
            kind: Some("gaussian".into()),
            h: Some(h),
            sigma: Some(sigma),
            ..Default::default()
        },
    };
    cfg.selective = match selective {
        None => SelectiveConfig {
            enabled: Some(false),
            ..Default::default()
        },
        Some(EnergyChoice::Value(e)) => SelectiveConfig {
            enabled: Some(true),
            energy: Some(e),
            level: None,
        },
        Some(EnergyChoice::Level(n)) => SelectiveConfig {
            enabled: Some(true),
            energy: None,
            level: Some(n),
        },
    };
    cfg.time = TimeConfig {
        start: Some(t_start),
        end: t_end,
        samples,
    };
    toml::to_string(&cfg).expect("config serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_fig1_bouncer() {
        let r = RunConfig::default().resolve(None).unwrap();
        assert!(matches!(r.model, Model::Bouncer(p) if p.gravity == 0.5 && p.mass == 1.0));
        assert!(matches!(r.state, StateSpec::TwoState { n1: 1, n2: 2, .. }));
        assert_eq!(r.kappa, 0.0);
        assert!(r.selective.is_none());
    }

    #[test]
    fn dotted_and_table_keys_agree() {
        let dotted = RunConfig::from_toml("kappa = 0.01\nmodel.g = 0.5\nstate.n1 = 1\nstate.n2 = 3\n").unwrap();
        let table = RunConfig::from_toml("kappa = 0.01\n[model]\ng = 0.5\n[state]\nn1 = 1\nn2 = 3\n").unwrap();
        assert_eq!(dotted, table);
        assert_eq!(dotted.resolve(None).unwrap().hash(), table.resolve(None).unwrap().hash());
    }

    #[test]
    fn hash_ignores_spelled_out_defaults_but_not_values() {
        let a = RunConfig::from_toml("kappa = 0.01").unwrap().resolve(None).unwrap();
        let b = RunConfig::from_toml("kappa = 0.01\nmodel.kind = \"bouncer\"\nmodel.g = 0.5").unwrap().resolve(None).unwrap();
        let c = RunConfig::from_toml("kappa = 0.02").unwrap().resolve(None).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn errors_name_the_field() {
        let cases = [
            ("model.g = -1.0", "model.g"),
            ("model.kind = \"rotor\"", "model.kind"),
            ("state.c1 = [1.0, 0.0]", "state.c1/c2"),
            ("kappa = -0.1", "kappa"),
            ("selective.level = 2", "selective"),
            ("time.end = -3.0", "time.end"),
            ("state.kind = \"gaussian\"", "state.h"),
            ("nmax = 1", "nmax"),
        ];
        for (text, field) in cases {
            let err = RunConfig::from_toml(text).unwrap().resolve(None).unwrap_err();
            assert!(err.to_string().contains(field), "{text}: {err}");
        }
        assert!(RunConfig::from_toml("colour = 3").is_err());
    }
}
