//! Air-to-ground channel primitives: LoS/NLoS power-law path loss and the
//! distance-dependent LoS probability of the three environment models.
//!
//! Distances are 3D and in km. Path-loss constants are base-10 exponents:
//! `ζ(r) = 10^(−a)·r^(−α)`, i.e. `PL(dB) = 10·a + 10·α·log10(r)`.

use std::f64::consts::{LN_10, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Relative slack below which `r < h` is treated as `r = h` in the
/// elevation-angle model.
pub const ELEVATION_CLAMP_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkState {
    Los,
    Nlos,
}

impl fmt::Display for LinkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinkState::Los => "LoS",
            LinkState::Nlos => "NLoS",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathLossParams {
    pub a_los: f64,
    pub a_nlos: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
}

impl PathLossParams {
    pub fn new(a_los: f64, a_nlos: f64, alpha_los: f64, alpha_nlos: f64) -> Result<Self> {
        let p = Self {
            a_los,
            a_nlos,
            alpha_los,
            alpha_nlos,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks finiteness and positivity of the exponents.
    ///
    /// `alpha_nlos ≥ alpha_los` and `a_nlos ≥ a_los` are accepted with
    /// equality so that the degenerate "LoS ≡ NLoS" parameter set stays
    /// usable.
    pub fn validate(&self) -> Result<()> {
        let all = [self.a_los, self.a_nlos, self.alpha_los, self.alpha_nlos];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(invalid(format!("path-loss constants must be finite: {self:?}")));
        }
        if !(self.alpha_los > 0.0) {
            return Err(invalid(format!("alpha_los must be > 0, got {}", self.alpha_los)));
        }
        if self.alpha_nlos < self.alpha_los {
            return Err(invalid(format!(
                "alpha_nlos ({}) must not be below alpha_los ({})",
                self.alpha_nlos, self.alpha_los
            )));
        }
        if self.a_nlos < self.a_los {
            return Err(invalid(format!(
                "a_nlos ({}) must not be below a_los ({})",
                self.a_nlos, self.a_los
            )));
        }
        Ok(())
    }

    /// Linear gain `ζ(r)` without argument checks.
    #[inline]
    pub fn gain(&self, r: f64, state: LinkState) -> f64 {
        self.gain_ln(r.ln(), state)
    }

    /// Linear gain from `ln r`, for callers that reuse the logarithm.
    #[inline]
    pub fn gain_ln(&self, ln_r: f64, state: LinkState) -> f64 {
        let (a, alpha) = self.constants(state);
        (-a * LN_10 - alpha * ln_r).exp()
    }

    fn constants(&self, state: LinkState) -> (f64, f64) {
        match state {
            LinkState::Los => (self.a_los, self.alpha_los),
            LinkState::Nlos => (self.a_nlos, self.alpha_nlos),
        }
    }

    /// `r₁` with `ζ^NL(r₁) = ζ^L(r)`, no argument checks.
    #[inline]
    pub fn nlos_equivalent(&self, r: f64) -> f64 {
        10f64.powf((self.a_los - self.a_nlos) / self.alpha_nlos) * r.powf(self.alpha_los / self.alpha_nlos)
    }

    /// `r₂` with `ζ^L(r₂) = ζ^NL(r)`, no argument checks.
    #[inline]
    pub fn los_equivalent(&self, r: f64) -> f64 {
        10f64.powf((self.a_nlos - self.a_los) / self.alpha_los) * r.powf(self.alpha_nlos / self.alpha_los)
    }
}

/// LoS probability law of an environment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LosModel {
    /// Sigmoid in the elevation angle (degrees) with slope `b` and offset `c`.
    HighAltitude { b: f64, c: f64 },
    /// Macrocell-to-UE law.
    LowAltitude,
    /// Picocell-to-UE law.
    UltraLowAltitude,
    /// Distance-independent probability; mostly useful for degenerate checks.
    Constant { p: f64 },
}

const LOW_SATURATION_KM: f64 = 0.018;
const LOW_DECAY_KM: f64 = 0.063;
const ULTRA_NLOS_KM: f64 = 0.156;
const ULTRA_DECAY_KM: f64 = 0.03;

impl LosModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LosModel::HighAltitude { b, c } => {
                if !(b > 0.0 && b.is_finite() && c > 0.0 && c.is_finite()) {
                    return Err(invalid(format!("high-altitude b and c must be > 0, got b={b}, c={c}")));
                }
            }
            LosModel::Constant { p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(invalid(format!("constant LoS probability must lie in [0, 1], got {p}")));
                }
            }
            LosModel::LowAltitude | LosModel::UltraLowAltitude => {}
        }
        Ok(())
    }

    /// `Pr^L(r)` for a UAV at height `h`, no argument checks. For the
    /// elevation model `h/r` is clamped to 1.
    #[inline]
    pub fn probability(&self, r: f64, h: f64) -> f64 {
        match *self {
            LosModel::HighAltitude { b, c } => {
                let theta = (h / r).min(1.0).asin() * (180.0 / PI);
                1.0 / (1.0 + c * (-b * (theta - c)).exp())
            }
            LosModel::LowAltitude => {
                let e = (-r / LOW_DECAY_KM).exp();
                (LOW_SATURATION_KM / r).min(1.0) * (1.0 - e) + e
            }
            LosModel::UltraLowAltitude => {
                0.5 - (5.0 * (-ULTRA_NLOS_KM / r).exp()).min(0.5) + (5.0 * (-r / ULTRA_DECAY_KM).exp()).min(0.5)
            }
            LosModel::Constant { p } => p,
        }
    }

    /// Distances (km) where `Pr^L` has a kink; integrals are split there.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            LosModel::LowAltitude => vec![LOW_SATURATION_KM],
            LosModel::UltraLowAltitude => {
                let mut v = vec![ULTRA_NLOS_KM / LN_10, ULTRA_DECAY_KM * LN_10];
                v.sort_by(f64::total_cmp);
                v
            }
            LosModel::HighAltitude { .. } | LosModel::Constant { .. } => Vec::new(),
        }
    }

    pub fn depends_on_height(&self) -> bool {
        matches!(self, LosModel::HighAltitude { .. })
    }
}

/// `ζ(r)` for one link state.
pub fn path_loss(params: &PathLossParams, r: f64, state: LinkState) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(invalid(format!("distance must be > 0, got {r}")));
    }
    Ok(params.gain(r, state))
}

/// `Pr^L(r)` for UAVs at height `h`.
pub fn los_probability(model: &LosModel, r: f64, h: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(invalid(format!("distance must be > 0, got {r}")));
    }
    if model.depends_on_height() {
        if !(h > 0.0) || !h.is_finite() {
            return Err(invalid(format!("height must be > 0, got {h}")));
        }
        if r < h && (h - r) > ELEVATION_CLAMP_TOL * h {
            return Err(invalid(format!("3D distance {r} km is below the UAV height {h} km")));
        }
    }
    Ok(model.probability(r, h))
}

/// `r₁`: NLoS distance giving the same path loss as a LoS link at `r`.
pub fn equivalent_distance_nlos(params: &PathLossParams, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(invalid(format!("distance must be > 0, got {r}")));
    }
    Ok(params.nlos_equivalent(r))
}

/// `r₂`: LoS distance giving the same path loss as an NLoS link at `r`.
pub fn equivalent_distance_los(params: &PathLossParams, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(invalid(format!("distance must be > 0, got {r}")));
    }
    Ok(params.los_equivalent(r))
}

/// Named environment presets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    HighAltitude,
    LowAltitude,
    UltraLowAltitude,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::HighAltitude, Preset::LowAltitude, Preset::UltraLowAltitude];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::HighAltitude => "high-altitude",
            Preset::LowAltitude => "low-altitude",
            Preset::UltraLowAltitude => "ultra-low-altitude",
        }
    }

    pub fn params(&self) -> PathLossParams {
        match self {
            // Macrocell constants for the low-altitude case; the other two share the pico set.
            Preset::LowAltitude => PathLossParams {
                a_los: 10.34,
                a_nlos: 13.11,
                alpha_los: 2.42,
                alpha_nlos: 4.28,
            },
            Preset::HighAltitude | Preset::UltraLowAltitude => PathLossParams {
                a_los: 10.38,
                a_nlos: 14.54,
                alpha_los: 2.09,
                alpha_nlos: 3.75,
            },
        }
    }

    pub fn los_model(&self) -> LosModel {
        match self {
            Preset::HighAltitude => LosModel::HighAltitude { b: 0.136, c: 11.95 },
            Preset::LowAltitude => LosModel::LowAltitude,
            Preset::UltraLowAltitude => LosModel::UltraLowAltitude,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "high-altitude" | "high" => Ok(Preset::HighAltitude),
            "low-altitude" | "low" => Ok(Preset::LowAltitude),
            "ultra-low-altitude" | "ultra-low" | "ultra" => Ok(Preset::UltraLowAltitude),
            other => Err(invalid(format!(
                "unknown model '{other}' (expected high-altitude, low-altitude or ultra-low-altitude)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HIGH: Preset = Preset::HighAltitude;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn path_loss_reference_values() {
        let p = HIGH.params();
        assert!(rel(path_loss(&p, 1.0, LinkState::Los).unwrap(), 10f64.powf(-10.38)) < 1e-13);
        // 10^(-10.38) * 0.1^(-2.09) = 10^(-8.29)
        let v = path_loss(&p, 0.1, LinkState::Los).unwrap();
        assert!(rel(v, 5.128_613_839_913_637e-9) < 1e-12, "{v:e}");
    }

    #[test]
    fn degenerate_params_give_identical_states() {
        let p = PathLossParams::new(12.0, 12.0, 3.0, 3.0).unwrap();
        let los = path_loss(&p, 0.5, LinkState::Los).unwrap();
        let nlos = path_loss(&p, 0.5, LinkState::Nlos).unwrap();
        assert_eq!(los, nlos);
        assert!(rel(equivalent_distance_nlos(&p, 0.3).unwrap(), 0.3) < 1e-14);
        assert!(rel(equivalent_distance_los(&p, 0.3).unwrap(), 0.3) < 1e-14);
    }

    #[test]
    fn path_loss_rejects_non_positive_distance() {
        let p = HIGH.params();
        assert!(path_loss(&p, 0.0, LinkState::Los).is_err());
        assert!(path_loss(&p, -1.0, LinkState::Nlos).is_err());
        assert!(equivalent_distance_los(&p, 0.0).is_err());
        assert!(equivalent_distance_nlos(&p, f64::NAN).is_err());
    }

    #[test]
    fn params_invariants() {
        assert!(PathLossParams::new(10.0, 14.0, 3.0, 2.0).is_err());
        assert!(PathLossParams::new(14.0, 10.0, 2.0, 3.0).is_err());
        assert!(PathLossParams::new(10.0, 14.0, 0.0, 3.0).is_err());
        for preset in Preset::ALL {
            preset.params().validate().unwrap();
            preset.los_model().validate().unwrap();
        }
    }

    #[test]
    fn high_altitude_overhead() {
        // 1/(1 + 11.95·exp(−0.136·(90 − 11.95)))
        let v = los_probability(&HIGH.los_model(), 0.05, 0.05).unwrap();
        assert!((v - 0.999_706_713_922_249_9).abs() < 1e-13, "{v}");
    }

    #[test]
    fn high_altitude_clamp_and_rejection() {
        let m = HIGH.los_model();
        let h = 0.05;
        let r = h * (1.0 - 1e-14);
        assert_eq!(los_probability(&m, r, h).unwrap(), los_probability(&m, h, h).unwrap());
        assert!(los_probability(&m, 0.04, h).is_err());
        // the 3GPP laws ignore h
        assert!(los_probability(&LosModel::LowAltitude, 0.01, h).is_ok());
    }

    #[test]
    fn low_altitude_saturates_near_the_bs() {
        assert_eq!(los_probability(&LosModel::LowAltitude, 0.010, 0.05).unwrap(), 1.0);
        assert_eq!(los_probability(&LosModel::LowAltitude, 0.018, 0.05).unwrap(), 1.0);
    }

    #[test]
    fn ultra_low_altitude_limits() {
        let m = LosModel::UltraLowAltitude;
        assert!((m.probability(1e-6, 0.05) - 1.0).abs() < 1e-12);
        assert!(m.probability(10.0, 0.05) < 1e-12);
        assert!(m.probability(1e4, 0.05) < 1e-12);
    }

    #[test]
    fn ultra_breakpoints_are_the_min_switches() {
        let bp = LosModel::UltraLowAltitude.breakpoints();
        assert!((5.0 * (-0.156 / bp[0]).exp() - 0.5).abs() < 1e-12);
        assert!((5.0 * (-bp[1] / 0.03).exp() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn equivalent_distance_examples() {
        let p = HIGH.params();
        let r1 = equivalent_distance_nlos(&p, 0.1).unwrap();
        assert!((r1 - 0.021_544_346_900_318_864).abs() < 1e-12, "{r1}");
        let back = path_loss(&p, r1, LinkState::Nlos).unwrap();
        assert!(rel(back, path_loss(&p, 0.1, LinkState::Los).unwrap()) < 1e-12);
        assert!(rel(equivalent_distance_los(&p, r1).unwrap(), 0.1) < 1e-12);
        // 10^(4.16/2.09)
        let r2 = equivalent_distance_los(&p, 1.0).unwrap();
        assert!(rel(r2, 97.820_667_503_154_4) < 1e-12, "{r2}");
        assert!(
            rel(
                path_loss(&p, r2, LinkState::Los).unwrap(),
                path_loss(&p, 1.0, LinkState::Nlos).unwrap()
            ) < 1e-12
        );
    }

    #[test]
    fn preset_names_round_trip() {
        for preset in Preset::ALL {
            assert_eq!(preset.name().parse::<Preset>().unwrap(), preset);
        }
        assert_eq!("low".parse::<Preset>().unwrap(), Preset::LowAltitude);
        assert_eq!("ultra".parse::<Preset>().unwrap(), Preset::UltraLowAltitude);
        assert!("medium".parse::<Preset>().is_err());
    }
}
