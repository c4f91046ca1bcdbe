use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::analysis::{Bound, DEFAULT_N0_DBM, DEFAULT_P_TX_DBM};
use crate::channel::{LosModel, PathLossParams, Preset};
use crate::error::{Error, Result};
use crate::units::{db_to_linear, dbm_to_mw};

pub const DEFAULT_DENSITIES: [f64; 9] = [1.0, 2.0, 3.0, 6.0, 10.0, 20.0, 30.0, 60.0, 100.0];
pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 1;

/// Names accepted by `SweepConfig::preset`.
pub const SWEEP_PRESETS: [&str; 6] = ["fig3", "fig4", "fig5", "fig6", "fig7", "fig8"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundSelection {
    Lower,
    Upper,
    Both,
}

impl BoundSelection {
    pub fn includes(self, bound: Bound) -> bool {
        matches!(
            (self, bound),
            (Self::Both, _) | (Self::Lower, Bound::Lower) | (Self::Upper, Bound::Upper)
        )
    }

    pub fn bounds(self) -> Vec<Bound> {
        [Bound::Lower, Bound::Upper]
            .into_iter()
            .filter(|&b| self.includes(b))
            .collect()
    }
}

impl FromStr for BoundSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lower" => Ok(Self::Lower),
            "upper" => Ok(Self::Upper),
            "both" => Ok(Self::Both),
            _ => Err(Error::Config(format!(
                "unknown bound {s:?} (expected lower, upper or both)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engines {
    Analytical,
    #[serde(alias = "monte-carlo")]
    Montecarlo,
    Both,
}

impl Engines {
    pub fn analytical(self) -> bool {
        matches!(self, Self::Analytical | Self::Both)
    }

    pub fn montecarlo(self) -> bool {
        matches!(self, Self::Montecarlo | Self::Both)
    }
}

impl FromStr for Engines {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytical" => Ok(Self::Analytical),
            "montecarlo" | "monte-carlo" => Ok(Self::Montecarlo),
            "both" => Ok(Self::Both),
            _ => Err(Error::Config(format!(
                "unknown engines {s:?} (expected analytical, montecarlo or both)"
            ))),
        }
    }
}

/// One propagation environment of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Environment {
    pub preset: Preset,
    pub params: PathLossParams,
    pub los_model: LosModel,
}

impl From<Preset> for Environment {
    fn from(preset: Preset) -> Self {
        Self {
            preset,
            params: preset.params(),
            los_model: preset.los_model(),
        }
    }
}

impl Environment {
    pub fn name(&self) -> &'static str {
        self.preset.name()
    }
}

/// A fully resolved sweep. Thresholds and powers are linear.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub models: Vec<Environment>,
    pub heights: Vec<f64>,
    pub densities: Vec<f64>,
    pub gamma_db: f64,
    pub gamma: f64,
    pub bound: BoundSelection,
    pub engines: Engines,
    /// Also fill the ASE columns.
    pub ase: bool,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub trials: u64,
    /// mW.
    pub p_tx: f64,
    /// mW.
    pub n0: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            models: Preset::ALL.into_iter().map(Environment::from).collect(),
            heights: vec![0.05],
            densities: DEFAULT_DENSITIES.to_vec(),
            gamma_db: 0.0,
            gamma: 1.0,
            bound: BoundSelection::Lower,
            engines: Engines::Analytical,
            ase: false,
            output: None,
            seed: DEFAULT_SEED,
            trials: DEFAULT_TRIALS,
            p_tx: dbm_to_mw(DEFAULT_P_TX_DBM),
            n0: dbm_to_mw(DEFAULT_N0_DBM),
        }
    }
}

impl SweepConfig {
    /// One of [`SWEEP_PRESETS`].
    pub fn preset(name: &str) -> Result<Self> {
        let all: Vec<Environment> = Preset::ALL.into_iter().map(Environment::from).collect();
        let base = Self::default();
        let cfg = match name {
            "fig3" => Self { models: all, ..base },
            "fig4" => Self {
                models: all,
                heights: vec![0.1],
                ..base
            },
            "fig5" => Self {
                models: all,
                ase: true,
                ..base
            },
            "fig6" => Self {
                models: all,
                heights: vec![0.1],
                ase: true,
                ..base
            },
            "fig7" => Self {
                models: all,
                bound: BoundSelection::Upper,
                ..base
            },
            "fig8" => Self {
                models: vec![Preset::HighAltitude.into()],
                bound: BoundSelection::Both,
                ase: true,
                ..base
            },
            _ => {
                return Err(Error::Config(format!(
                    "unknown preset {name:?} (expected one of {})",
                    SWEEP_PRESETS.join(", ")
                )))
            }
        };
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        raw.resolve()
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.models.is_empty() {
            return bad("model list is empty".into());
        }
        if self.heights.is_empty() {
            return bad("height list is empty".into());
        }
        if self.densities.is_empty() {
            return bad("density list is empty".into());
        }
        for &h in &self.heights {
            if !(h > 0.0) || !h.is_finite() {
                return bad(format!("heights must be > 0, got {h}"));
            }
        }
        for &l in &self.densities {
            if !(l > 0.0) || !l.is_finite() {
                return bad(format!("densities must be > 0, got {l}"));
            }
        }
        if !self.gamma_db.is_finite() {
            return bad(format!("gamma_db must be finite, got {}", self.gamma_db));
        }
        if self.engines.montecarlo() && self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if !(self.p_tx > 0.0) || !self.p_tx.is_finite() {
            return bad(format!("transmit power must be > 0 mW, got {}", self.p_tx));
        }
        if !(self.n0 >= 0.0) || !self.n0.is_finite() {
            return bad(format!("noise power must be >= 0 mW, got {}", self.n0));
        }
        for env in &self.models {
            env.params
                .validate()
                .map_err(|e| Error::Config(format!("{}: {e}", env.name())))?;
            env.los_model
                .validate()
                .map_err(|e| Error::Config(format!("{}: {e}", env.name())))?;
        }
        Ok(())
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    preset: Option<String>,
    models: Option<Vec<String>>,
    heights_km: Option<Vec<f64>>,
    densities: Option<Vec<f64>>,
    gamma_db: Option<f64>,
    bound: Option<BoundSelection>,
    engines: Option<Engines>,
    ase: Option<bool>,
    output: Option<PathBuf>,
    seed: Option<u64>,
    trials: Option<u64>,
    radio: Option<RawRadio>,
    #[serde(default)]
    environment: BTreeMap<String, RawEnvironment>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRadio {
    p_dbm: Option<f64>,
    n0_dbm: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnvironment {
    a_los: Option<f64>,
    a_nlos: Option<f64>,
    alpha_los: Option<f64>,
    alpha_nlos: Option<f64>,
    b: Option<f64>,
    c: Option<f64>,
}

impl RawConfig {
    fn resolve(self) -> Result<SweepConfig> {
        let mut cfg = match &self.preset {
            Some(name) => SweepConfig::preset(name)?,
            None => SweepConfig::default(),
        };
        if let Some(models) = self.models {
            cfg.models = models
                .iter()
                .map(|m| {
                    m.parse::<Preset>()
                        .map(Environment::from)
                        .map_err(|e| Error::Config(e.to_string()))
                })
                .collect::<Result<_>>()?;
        }
        if let Some(v) = self.heights_km {
            cfg.heights = v;
        }
        if let Some(v) = self.densities {
            cfg.densities = v;
        }
        if let Some(v) = self.gamma_db {
            cfg.gamma_db = v;
        }
        cfg.gamma = db_to_linear(cfg.gamma_db);
        if let Some(v) = self.bound {
            cfg.bound = v;
        }
        if let Some(v) = self.engines {
            cfg.engines = v;
        }
        if let Some(v) = self.ase {
            cfg.ase = v;
        }
        if self.output.is_some() {
            cfg.output = self.output;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(radio) = self.radio {
            if let Some(p) = radio.p_dbm {
                cfg.p_tx = dbm_to_mw(p);
            }
            if let Some(n) = radio.n0_dbm {
                cfg.n0 = dbm_to_mw(n);
            }
        }
        for (name, o) in self.environment {
            let preset: Preset = name.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
            let targets: Vec<&mut Environment> = cfg.models.iter_mut().filter(|e| e.preset == preset).collect();
            if targets.is_empty() {
                return Err(Error::Config(format!(
                    "environment override for {name:?}, which is not swept"
                )));
            }
            for env in targets {
                let p = &mut env.params;
                p.a_los = o.a_los.unwrap_or(p.a_los);
                p.a_nlos = o.a_nlos.unwrap_or(p.a_nlos);
                p.alpha_los = o.alpha_los.unwrap_or(p.alpha_los);
                p.alpha_nlos = o.alpha_nlos.unwrap_or(p.alpha_nlos);
                match (&mut env.los_model, o.b, o.c) {
                    (LosModel::HighAltitude { b, c }, ob, oc) => {
                        *b = ob.unwrap_or(*b);
                        *c = oc.unwrap_or(*c);
                    }
                    (_, None, None) => {}
                    _ => {
                        return Err(Error::Config(format!(
                            "{name}: b and c only apply to the high-altitude model"
                        )))
                    }
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
