//! Monte Carlo simulation of the UAV network seen from a typical user at the
//! origin.
//!
//! UAVs are drawn in a disc of radius `R` around the user by radial arrival
//! sampling: `π·λ·ρ_k²` are the partial sums of unit exponentials, so the
//! points come out sorted by distance and a larger disc only appends points.
//! Interference from beyond the disc is either replaced by its mean
//! ([`FarField::MeanField`]) or dropped ([`FarField::Truncate`]).
//!
//! Each trial uses its own ChaCha stream `(seed, trial)`, so estimates do not
//! depend on the number of worker threads.

use std::f64::consts::{LN_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::NetworkConfig;
use crate::channel::LinkState;
use crate::error::{invalid, Result};
use crate::quadrature::{integrate_piecewise, QuadratureSpec, Tail};

const MIN_DISC_RADIUS: f64 = 3.0;
const DISC_RADIUS_SCALE: f64 = 10.0;
const Z95: f64 = 1.96;

/// `max(3 km, 10/√λ km)`.
pub fn default_disc_radius(lambda: f64) -> f64 {
    MIN_DISC_RADIUS.max(DISC_RADIUS_SCALE / lambda.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimMode {
    /// UAVs stay at their Poisson positions; the user picks the strongest.
    Hovering,
    /// An extra UAV hovers right above the user and serves it; every
    /// Poisson UAV interferes.
    Teleport,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FarField {
    /// Add the mean interference from outside the disc.
    #[default]
    MeanField,
    /// Ignore everything outside the disc.
    Truncate,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimSpec {
    pub trials: u64,
    /// km.
    pub disc_radius: f64,
    pub seed: u64,
    pub mode: SimMode,
    pub far_field: FarField,
}

impl SimSpec {
    /// Default disc radius for density `lambda` and mean-field far field.
    pub fn new(lambda: f64, trials: u64, seed: u64, mode: SimMode) -> Self {
        Self {
            trials,
            disc_radius: default_disc_radius(lambda),
            seed,
            mode,
            far_field: FarField::default(),
        }
    }

    pub fn with_disc_radius(mut self, radius: f64) -> Self {
        self.disc_radius = radius;
        self
    }

    pub fn with_far_field(mut self, far_field: FarField) -> Self {
        self.far_field = far_field;
        self
    }

    pub fn with_mode(mut self, mode: SimMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials must be >= 1"));
        }
        if !(self.disc_radius > 0.0) || !self.disc_radius.is_finite() {
            return Err(invalid(format!("disc radius must be > 0, got {}", self.disc_radius)));
        }
        Ok(())
    }
}

/// One UAV as seen from the user.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Uav {
    /// Planar position relative to the user, km.
    pub xy: (f64, f64),
    pub state: LinkState,
    /// Rayleigh power gain, mean one.
    pub fading: f64,
}

/// One simulated drop.
#[derive(Clone, Debug, PartialEq)]
pub struct Realization {
    /// In teleport mode the overhead UAV is first, at `(0, 0)`.
    pub uav_xy: Vec<(f64, f64)>,
    pub los_flags: Vec<LinkState>,
    pub fading: Vec<f64>,
    /// `None` when there is no UAV to associate with.
    pub serving_index: Option<usize>,
    /// Linear SINR, zero without a server.
    pub sinr: f64,
    /// Mean interference added for UAVs outside the disc, mW.
    pub far_interference: f64,
}

impl Realization {
    pub fn len(&self) -> usize {
        self.uav_xy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.uav_xy.is_empty()
    }
}

/// Association and SINR for an explicit set of UAVs (strongest mean
/// received power, ties to the nearer UAV, then to the lower index).
/// Returns `(None, 0.0)` for an empty set.
pub fn evaluate(cfg: &NetworkConfig, uavs: &[Uav]) -> Result<(Option<usize>, f64)> {
    cfg.validate()?;
    let mut best: Option<(usize, f64, f64)> = None;
    let mut total = 0.0;
    for (i, u) in uavs.iter().enumerate() {
        if !(u.fading >= 0.0) || !u.fading.is_finite() {
            return Err(invalid(format!("fading gain must be >= 0, got {}", u.fading)));
        }
        let rho2 = u.xy.0 * u.xy.0 + u.xy.1 * u.xy.1;
        let r = (rho2 + cfg.h * cfg.h).sqrt();
        let g = cfg.params.gain(r, u.state);
        total += u.fading * g;
        let better = match best {
            None => true,
            Some((_, bg, br)) => g > bg || (g == bg && r < br),
        };
        if better {
            best = Some((i, g, r));
        }
    }
    let Some((idx, g, _)) = best else {
        return Ok((None, 0.0));
    };
    let signal = uavs[idx].fading * g;
    let sinr = signal / (cfg.n0 / cfg.p_tx + (total - signal).max(0.0));
    Ok((Some(idx), sinr))
}

/// Per-trial SINR for both modes, drawn from the same Poisson field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialSinr {
    pub hovering: f64,
    pub teleport: f64,
}

impl TrialSinr {
    pub fn get(&self, mode: SimMode) -> f64 {
        match mode {
            SimMode::Hovering => self.hovering,
            SimMode::Teleport => self.teleport,
        }
    }
}

/// Empirical coverage with its 95% normal-approximation halfwidth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub halfwidth: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AseEstimate {
    /// Rate formula applied to the empirical coverage curve, integrated by
    /// trapezoids on a log-γ grid.
    pub grid: f64,
    /// `λ·mean(log2(1+SINR)·1{SINR > γ0})`.
    pub direct: f64,
    /// 95% halfwidth of `direct`.
    pub halfwidth: f64,
}

#[derive(Clone, Debug)]
pub struct Simulator {
    cfg: NetworkConfig,
    spec: SimSpec,
    far: f64,
}

impl Simulator {
    pub fn new(cfg: NetworkConfig, spec: SimSpec) -> Result<Self> {
        cfg.validate()?;
        spec.validate()?;
        let far = match spec.far_field {
            FarField::Truncate => 0.0,
            FarField::MeanField => mean_far_interference(&cfg, spec.disc_radius)?,
        };
        Ok(Self { cfg, spec, far })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.cfg
    }

    pub fn spec(&self) -> &SimSpec {
        &self.spec
    }

    /// Interference added for the region outside the disc, per unit
    /// transmit power (a path gain).
    pub fn far_interference(&self) -> f64 {
        self.far
    }

    fn rng(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.spec.seed);
        rng.set_stream(trial);
        rng
    }

    /// Draws trial `trial`: the overhead UAV first, then every Poisson point
    /// in order of distance as `(ρ², bearing, state, fading)`.
    fn walk<F>(&self, trial: u64, mut visit: F) -> (LinkState, f64)
    where
        F: FnMut(f64, f64, LinkState, f64),
    {
        let h = self.cfg.h;
        let h2 = h * h;
        let model = self.cfg.los_model;
        let mut rng = self.rng(trial);

        let u0: f64 = rng.random();
        let overhead_state = if u0 < model.probability(h, h) {
            LinkState::Los
        } else {
            LinkState::Nlos
        };
        let overhead_fading: f64 = Exp1.sample(&mut rng);

        let rho2_max = self.spec.disc_radius * self.spec.disc_radius;
        let area_per_unit = 1.0 / (PI * self.cfg.lambda);
        let mut cum = 0.0;
        loop {
            let e: f64 = Exp1.sample(&mut rng);
            cum += e;
            let rho2 = cum * area_per_unit;
            if rho2 > rho2_max {
                break;
            }
            let bearing: f64 = rng.random();
            let u: f64 = rng.random();
            let fading: f64 = Exp1.sample(&mut rng);
            let r = (rho2 + h2).sqrt();
            let state = if u < model.probability(r, h) {
                LinkState::Los
            } else {
                LinkState::Nlos
            };
            visit(rho2, bearing, state, fading);
        }
        (overhead_state, overhead_fading)
    }

    /// SINR of trial `trial` under both modes.
    pub fn trial(&self, trial: u64) -> TrialSinr {
        let h2 = self.cfg.h * self.cfg.h;
        let params = self.cfg.params;
        let mut total = 0.0;
        let mut best_gain = f64::NEG_INFINITY;
        let mut best_rx = 0.0;
        let mut any = false;
        let (s0, f0) = self.walk(trial, |rho2, _, state, fading| {
            let g = params.gain_ln(0.5 * (rho2 + h2).ln(), state);
            let rx = fading * g;
            total += rx;
            // Points arrive by increasing distance, so a strict comparison
            // keeps the nearer one on ties.
            if g > best_gain {
                best_gain = g;
                best_rx = rx;
            }
            any = true;
        });
        let noise = self.cfg.n0 / self.cfg.p_tx;
        let hovering = if any {
            best_rx / (noise + (total - best_rx).max(0.0) + self.far)
        } else {
            0.0
        };
        let teleport = f0 * params.gain(self.cfg.h, s0) / (noise + total + self.far);
        TrialSinr { hovering, teleport }
    }

    /// Full record of trial `trial` in the configured mode. Its SINR equals
    /// `self.trial(trial).get(mode)`.
    pub fn realization(&self, trial: u64) -> Realization {
        let mut xy = Vec::new();
        let mut flags = Vec::new();
        let mut fading = Vec::new();
        let (s0, f0) = self.walk(trial, |rho2, bearing, state, f| {
            let rho = rho2.sqrt();
            let (sin, cos) = (2.0 * PI * bearing).sin_cos();
            xy.push((rho * cos, rho * sin));
            flags.push(state);
            fading.push(f);
        });
        let sinr = self.trial(trial).get(self.spec.mode);
        let serving_index = match self.spec.mode {
            SimMode::Teleport => {
                xy.insert(0, (0.0, 0.0));
                flags.insert(0, s0);
                fading.insert(0, f0);
                Some(0)
            }
            SimMode::Hovering => {
                let h2 = self.cfg.h * self.cfg.h;
                let mut best: Option<(usize, f64)> = None;
                for (i, (&(x, y), &s)) in xy.iter().zip(&flags).enumerate() {
                    let g = self.cfg.params.gain_ln(0.5 * (x * x + y * y + h2).ln(), s);
                    if best.map_or(true, |(_, bg)| g > bg) {
                        best = Some((i, g));
                    }
                }
                best.map(|(i, _)| i)
            }
        };
        Realization {
            uav_xy: xy,
            los_flags: flags,
            fading,
            serving_index,
            sinr,
            far_interference: self.far * self.cfg.p_tx,
        }
    }

    /// SINR of every trial, in trial order.
    pub fn run(&self) -> Vec<TrialSinr> {
        (0..self.spec.trials).into_par_iter().map(|t| self.trial(t)).collect()
    }
}

/// `2πλ·∫_{√(R²+h²)}^∞ [Pr^L·ζ^L + (1−Pr^L)·ζ^NL](u)·u du`, per unit transmit
/// power.
fn mean_far_interference(cfg: &NetworkConfig, radius: f64) -> Result<f64> {
    let h = cfg.h;
    let start = (radius * radius + h * h).sqrt();
    let model = cfg.los_model;
    let params = cfg.params;
    let mut pts = vec![start];
    pts.extend(model.breakpoints().into_iter().filter(|&b| b > start));
    let quad = QuadratureSpec::new(1e-9, 0.0, 2000)?;
    let v = integrate_piecewise(
        |u| {
            let p = model.probability(u, h);
            (p * params.gain(u, LinkState::Los) + (1.0 - p) * params.gain(u, LinkState::Nlos)) * u
        },
        &pts,
        Some(Tail::Logarithmic),
        &quad,
    )?;
    Ok(2.0 * PI * cfg.lambda * v.value)
}

/// Fraction of `sinr` above `gamma` with its 95% halfwidth.
pub fn coverage_of(sinr: impl ExactSizeIterator<Item = f64>, gamma: f64) -> Estimate {
    let n = sinr.len();
    let hits = sinr.filter(|&s| s > gamma).count();
    proportion(hits, n)
}

fn proportion(hits: usize, n: usize) -> Estimate {
    if n == 0 {
        return Estimate {
            value: 0.0,
            halfwidth: 0.0,
        };
    }
    let p = hits as f64 / n as f64;
    Estimate {
        value: p,
        halfwidth: Z95 * (p * (1.0 - p) / n as f64).sqrt(),
    }
}

/// Both ASE estimators from a set of SINR samples.
pub fn ase_of(sinr: &[f64], lambda: f64, gamma0: f64) -> AseEstimate {
    let n = sinr.len();
    if n == 0 {
        return AseEstimate {
            grid: 0.0,
            direct: 0.0,
            halfwidth: 0.0,
        };
    }
    let rates: Vec<f64> = sinr
        .iter()
        .map(|&s| if s > gamma0 { (1.0 + s).log2() } else { 0.0 })
        .collect();
    let mean = rates.iter().sum::<f64>() / n as f64;
    let var = rates.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n.max(2) - 1) as f64;

    let mut sorted: Vec<f64> = sinr.iter().copied().filter(|&s| s > gamma0).collect();
    sorted.sort_by(f64::total_cmp);
    let p0 = sorted.len() as f64 / n as f64;
    let top = sorted.last().copied().unwrap_or(gamma0);
    let mut tail = 0.0;
    if top > gamma0 {
        // Trapezoids in t = ln γ with 200 nodes per decade.
        let (t0, t1) = (gamma0.ln(), top.ln());
        let steps = (((t1 - t0) / std::f64::consts::LN_10) * 200.0).ceil().max(1.0) as usize;
        let dt = (t1 - t0) / steps as f64;
        let integrand = |t: f64| {
            let g = t.exp();
            let above = sorted.len() - sorted.partition_point(|&s| s <= g);
            (above as f64 / n as f64) * g / (1.0 + g)
        };
        let mut prev = integrand(t0);
        for k in 1..=steps {
            let cur = integrand(t0 + k as f64 * dt);
            tail += 0.5 * (prev + cur) * dt;
            prev = cur;
        }
    }
    AseEstimate {
        grid: lambda / LN_2 * tail + lambda * (1.0 + gamma0).log2() * p0,
        direct: lambda * mean,
        halfwidth: lambda * Z95 * (var / n as f64).sqrt(),
    }
}

/// One trial's realization; `trial` selects the random substream.
pub fn sample_realization(cfg: &NetworkConfig, spec: &SimSpec, trial: u64) -> Result<Realization> {
    Ok(Simulator::new(*cfg, *spec)?.realization(trial))
}

/// Empirical coverage at linear threshold `gamma` in `spec.mode`.
pub fn estimate_coverage(cfg: &NetworkConfig, spec: &SimSpec, gamma: f64) -> Result<Estimate> {
    if gamma.is_nan() {
        return Err(invalid("SINR threshold is NaN"));
    }
    let sim = Simulator::new(*cfg, *spec)?;
    let samples = sim.run();
    Ok(coverage_of(samples.iter().map(|s| s.get(spec.mode)), gamma))
}

/// Empirical ASE at linear threshold `gamma0` in `spec.mode`.
pub fn estimate_ase(cfg: &NetworkConfig, spec: &SimSpec, gamma0: f64) -> Result<AseEstimate> {
    if !(gamma0 > 0.0) || !gamma0.is_finite() {
        return Err(invalid(format!("SINR threshold must be > 0 and finite, got {gamma0}")));
    }
    let sim = Simulator::new(*cfg, *spec)?;
    let sinr: Vec<f64> = sim.run().iter().map(|s| s.get(spec.mode)).collect();
    Ok(ase_of(&sinr, cfg.lambda, gamma0))
}
