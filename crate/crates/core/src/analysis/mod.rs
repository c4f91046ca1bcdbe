//! Analytical coverage and area spectral efficiency.
//!
//! UAVs form a planar Poisson field of density `λ` at height `h`; the typical
//! user at the origin associates with the strongest mean received power. Each
//! link is independently LoS with probability `Pr^L(r)`, so the LoS and NLoS
//! UAVs are two independent thinned fields, and the serving distance density
//! splits into `f^L` (strongest link is LoS at `r`: no LoS UAV closer than
//! `r`, no NLoS UAV closer than `r₁(r)`) and its NLoS mirror `f^NL`.
//! Conditioned on the serving link, interference comes from the remaining
//! points beyond those exclusion radii, and Rayleigh fading turns the coverage
//! probability into a noise factor times the interference Laplace transform.
//!
//! All evaluation goes through [`CoverageModel`], which memoizes the cumulative
//! exclusion masses for its `(model, h)` and is immutable afterwards, so it can
//! be shared across threads.

mod exclusion;

use std::cell::RefCell;
use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::channel::{LinkState, LosModel, PathLossParams, Preset, ELEVATION_CLAMP_TOL};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate_piecewise, QuadratureSpec, Tail};
use crate::units::dbm_to_mw;

pub use exclusion::ExclusionTable;

pub const DEFAULT_P_TX_DBM: f64 = 24.0;
pub const DEFAULT_N0_DBM: f64 = -95.0;

/// Serving densities below this are dropped without evaluating the
/// conditional coverage (which is at most 1).
const NEGLIGIBLE_DENSITY: f64 = 1e-18;

/// Network parameters. Powers are linear milliwatts, distances km,
/// density UAVs per km².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub lambda: f64,
    pub h: f64,
    pub p_tx: f64,
    pub n0: f64,
    pub params: PathLossParams,
    pub los_model: LosModel,
}

impl NetworkConfig {
    pub fn new(lambda: f64, h: f64, p_tx: f64, n0: f64, params: PathLossParams, los_model: LosModel) -> Result<Self> {
        let cfg = Self {
            lambda,
            h,
            p_tx,
            n0,
            params,
            los_model,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Preset environment with the default 24 dBm transmit power and
    /// −95 dBm noise.
    pub fn preset(preset: Preset, lambda: f64, h: f64) -> Result<Self> {
        Self::new(
            lambda,
            h,
            dbm_to_mw(DEFAULT_P_TX_DBM),
            dbm_to_mw(DEFAULT_N0_DBM),
            preset.params(),
            preset.los_model(),
        )
    }

    pub fn with_density(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(invalid(format!("density must be > 0, got {}", self.lambda)));
        }
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(invalid(format!("height must be > 0, got {}", self.h)));
        }
        if !(self.p_tx > 0.0) || !self.p_tx.is_finite() {
            return Err(invalid(format!("transmit power must be > 0, got {}", self.p_tx)));
        }
        if !(self.n0 >= 0.0) || self.n0.is_nan() {
            return Err(invalid(format!("noise power must be >= 0, got {}", self.n0)));
        }
        self.params.validate()?;
        self.los_model.validate()
    }
}

/// Which coverage bound: hovering UAVs (lower) or teleporting UAVs (upper).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Lower,
    Upper,
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Bound::Lower => "lower",
            Bound::Upper => "upper",
        })
    }
}

/// How the LoS and NLoS overhead terms of the teleport bound are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum UpperBoundForm {
    /// Weighted by `Pr^L(h)` and `1 − Pr^L(h)`.
    #[default]
    Weighted,
    /// Plain sum of the two conditional terms; can exceed one.
    Unweighted,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoverageResult {
    pub value: f64,
    /// LoS-served contribution.
    pub t_los: f64,
    /// NLoS-served contribution.
    pub t_nlos: f64,
    pub quad_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AseResult {
    /// bps/Hz/km².
    pub value: f64,
    pub quad_error: f64,
}

#[derive(Clone, Debug)]
pub struct CoverageModel {
    cfg: NetworkConfig,
    table: Arc<ExclusionTable>,
    quad: QuadratureSpec,
}

impl CoverageModel {
    pub fn new(cfg: NetworkConfig) -> Result<Self> {
        Self::with_quadrature(cfg, QuadratureSpec::default())
    }

    pub fn with_quadrature(cfg: NetworkConfig, quad: QuadratureSpec) -> Result<Self> {
        cfg.validate()?;
        quad.validate()?;
        let table = Arc::new(ExclusionTable::new(cfg.los_model, cfg.h));
        Ok(Self { cfg, table, quad })
    }

    /// Reuses a table built for the same `(los_model, h)`, e.g. across a
    /// density sweep.
    pub fn with_table(cfg: NetworkConfig, table: Arc<ExclusionTable>, quad: QuadratureSpec) -> Result<Self> {
        cfg.validate()?;
        quad.validate()?;
        if table.height() != cfg.h || *table.model() != cfg.los_model {
            return Err(invalid("exclusion table was built for a different height or LoS model"));
        }
        Ok(Self { cfg, table, quad })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.cfg
    }

    pub fn table(&self) -> &Arc<ExclusionTable> {
        &self.table
    }

    pub fn quadrature(&self) -> &QuadratureSpec {
        &self.quad
    }

    fn two_pi_lambda(&self) -> f64 {
        2.0 * PI * self.cfg.lambda
    }

    fn los_prob(&self, r: f64) -> f64 {
        self.cfg.los_model.probability(r, self.cfg.h)
    }

    fn check_distance(&self, r: f64) -> Result<f64> {
        let h = self.cfg.h;
        if !r.is_finite() || r < h * (1.0 - ELEVATION_CLAMP_TOL) {
            return Err(invalid(format!(
                "serving distance {r} km is below the UAV height {h} km"
            )));
        }
        Ok(r.max(h))
    }

    /// `f^L(r)`: density of the serving UAV being LoS at 3D distance `r`.
    pub fn serving_distance_pdf_los(&self, r: f64) -> Result<f64> {
        let r = self.check_distance(r)?;
        self.pdf_los(r)
    }

    /// `f^NL(r)`: density of the serving UAV being NLoS at 3D distance `r`.
    pub fn serving_distance_pdf_nlos(&self, r: f64) -> Result<f64> {
        let r = self.check_distance(r)?;
        self.pdf_nlos(r)
    }

    pub fn serving_distance_pdf(&self, r: f64, state: LinkState) -> Result<f64> {
        match state {
            LinkState::Los => self.serving_distance_pdf_los(r),
            LinkState::Nlos => self.serving_distance_pdf_nlos(r),
        }
    }

    fn pdf_los(&self, r: f64) -> Result<f64> {
        let p = self.los_prob(r);
        if p == 0.0 {
            return Ok(0.0);
        }
        let r1 = self.cfg.params.nlos_equivalent(r);
        let (los_r, _) = self.table.masses(r)?;
        let (_, nlos_r1) = self.table.masses(r1)?;
        let tpl = self.two_pi_lambda();
        Ok((-tpl * (nlos_r1 + los_r)).exp() * p * tpl * r)
    }

    fn pdf_nlos(&self, r: f64) -> Result<f64> {
        let q = 1.0 - self.los_prob(r);
        if q == 0.0 {
            return Ok(0.0);
        }
        let r2 = self.cfg.params.los_equivalent(r);
        let (los_r2, _) = self.table.masses(r2)?;
        let (_, nlos_r) = self.table.masses(r)?;
        let tpl = self.two_pi_lambda();
        Ok((-tpl * (los_r2 + nlos_r)).exp() * q * tpl * r)
    }

    /// Interferer exclusion radii `(d_L, d_NL)` for a user served at `r`.
    fn exclusion_radii(&self, r: f64, state: LinkState) -> (f64, f64) {
        let h = self.cfg.h;
        match state {
            LinkState::Los => (r, self.cfg.params.nlos_equivalent(r).max(h)),
            LinkState::Nlos => (self.cfg.params.los_equivalent(r).max(h), r),
        }
    }

    /// `E[exp(−s·I)]` with `s` expressed per unit gain (`σ = s·P`), for
    /// interferers restricted to LoS beyond `d_los` and NLoS beyond `d_nlos`.
    /// Returns the value and its propagated quadrature error.
    fn laplace_scaled(&self, sigma: f64, d_los: f64, d_nlos: f64, quad: &QuadratureSpec) -> Result<(f64, f64)> {
        let (exponent, error) = self.laplace_exponent(sigma, d_los, d_nlos, quad)?;
        let value = (-exponent).exp();
        Ok((value, value * error))
    }

    /// `−ln E[exp(−σ·I/P)]` and its quadrature error.
    fn laplace_exponent(&self, sigma: f64, d_los: f64, d_nlos: f64, quad: &QuadratureSpec) -> Result<(f64, f64)> {
        if sigma == 0.0 {
            return Ok((0.0, 0.0));
        }
        let h = self.cfg.h;
        let model = self.cfg.los_model;
        let params = self.cfg.params;
        let bps = model.breakpoints();
        let points_from = |d: f64| {
            let mut pts = vec![d];
            pts.extend(bps.iter().copied().filter(|&b| b > d));
            pts
        };
        let los = integrate_piecewise(
            |u| {
                let x = sigma * params.gain(u, LinkState::Los);
                model.probability(u, h) * (x / (1.0 + x)) * u
            },
            &points_from(d_los),
            Some(Tail::Logarithmic),
            quad,
        )?;
        let nlos = integrate_piecewise(
            |u| {
                let x = sigma * params.gain(u, LinkState::Nlos);
                (1.0 - model.probability(u, h)) * (x / (1.0 + x)) * u
            },
            &points_from(d_nlos),
            Some(Tail::Logarithmic),
            quad,
        )?;
        let tpl = self.two_pi_lambda();
        Ok((tpl * (los.value + nlos.value), tpl * (los.error + nlos.error)))
    }

    /// Laplace transform of the aggregate interference at `s` (per mW) for a
    /// user served over `state` at 3D distance `serving_r`.
    pub fn laplace_interference(&self, s: f64, serving_r: f64, state: LinkState) -> Result<f64> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(invalid(format!("Laplace argument must be >= 0, got {s}")));
        }
        let r = self.check_distance(serving_r)?;
        let (d_los, d_nlos) = self.exclusion_radii(r, state);
        Ok(self.laplace_scaled(s * self.cfg.p_tx, d_los, d_nlos, &self.quad)?.0)
    }

    /// Natural log of [`laplace_interference`](Self::laplace_interference).
    /// Stays finite where the transform itself underflows to zero.
    pub fn log_laplace_interference(&self, s: f64, serving_r: f64, state: LinkState) -> Result<f64> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(invalid(format!("Laplace argument must be >= 0, got {s}")));
        }
        let r = self.check_distance(serving_r)?;
        let (d_los, d_nlos) = self.exclusion_radii(r, state);
        Ok(-self.laplace_exponent(s * self.cfg.p_tx, d_los, d_nlos, &self.quad)?.0)
    }

    /// Coverage probability conditioned on being served over `state` at `r`.
    pub fn conditional_coverage(&self, r: f64, state: LinkState, gamma: f64) -> Result<f64> {
        check_threshold(gamma)?;
        let r = self.check_distance(r)?;
        let (d_los, d_nlos) = self.exclusion_radii(r, state);
        Ok(self.conditional(r, state, gamma, d_los, d_nlos, &self.quad)?.0)
    }

    fn conditional(
        &self,
        r: f64,
        state: LinkState,
        gamma: f64,
        d_los: f64,
        d_nlos: f64,
        quad: &QuadratureSpec,
    ) -> Result<(f64, f64)> {
        let gain = self.cfg.params.gain(r, state);
        let noise = (-gamma * self.cfg.n0 / (self.cfg.p_tx * gain)).exp();
        if noise == 0.0 {
            return Ok((0.0, 0.0));
        }
        let (lap, err) = self.laplace_scaled(gamma / gain, d_los, d_nlos, quad)?;
        Ok((noise * lap, noise * err))
    }

    /// Outer integration points for the serving-distance integrals: `h`, the
    /// kinks of `Pr^L`, the distances where `r₁(r)` or `r₂(r)` crosses `h`
    /// or a kink, and a bulk cutoff after which a logarithmic tail takes over.
    fn outer_points(&self) -> Vec<f64> {
        let h = self.cfg.h;
        let params = &self.cfg.params;
        let bps = self.cfg.los_model.breakpoints();
        let mut pts = vec![h, h + 4.0 / self.cfg.lambda.sqrt()];
        pts.push(params.los_equivalent(h));
        for &b in &bps {
            pts.push(b);
            pts.push(params.los_equivalent(b));
            pts.push(params.nlos_equivalent(b));
        }
        pts.retain(|&x| x >= h && x.is_finite());
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// `∫_h^∞ g(r) dr` over the serving distance, where `g` may fail.
    fn serving_integral<G>(&self, g: G, quad: &QuadratureSpec) -> Result<(f64, f64)>
    where
        G: Fn(f64) -> Result<f64>,
    {
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let res = integrate_piecewise(
            |r| {
                if failure.borrow().is_some() {
                    return 0.0;
                }
                match g(r) {
                    Ok(v) => v,
                    Err(e) => {
                        *failure.borrow_mut() = Some(e);
                        0.0
                    }
                }
            },
            &self.outer_points(),
            Some(Tail::Logarithmic),
            quad,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let res = res?;
        Ok((res.value, res.error))
    }

    /// `∫_h^∞ f^state(r) dr`: probability of being served over `state`.
    pub fn serving_probability(&self, state: LinkState) -> Result<f64> {
        let quad = self.quad.tightened(100.0);
        let (v, _) = match state {
            LinkState::Los => self.serving_integral(|r| self.pdf_los(r), &quad)?,
            LinkState::Nlos => self.serving_integral(|r| self.pdf_nlos(r), &quad)?,
        };
        Ok(v)
    }

    /// `∫_h^∞ (f^L + f^NL) dr`, which should be one.
    pub fn normalization(&self) -> Result<f64> {
        Ok(self.serving_probability(LinkState::Los)? + self.serving_probability(LinkState::Nlos)?)
    }

    /// Coverage of hovering UAVs at linear threshold `gamma`.
    pub fn coverage_lower(&self, gamma: f64) -> Result<CoverageResult> {
        check_threshold(gamma)?;
        let outer = self.quad;
        let inner = self.quad.tightened(10.0);
        let term = |state: LinkState| {
            self.serving_integral(
                |r| {
                    let f = match state {
                        LinkState::Los => self.pdf_los(r)?,
                        LinkState::Nlos => self.pdf_nlos(r)?,
                    };
                    if f < NEGLIGIBLE_DENSITY {
                        return Ok(0.0);
                    }
                    let (d_los, d_nlos) = self.exclusion_radii(r, state);
                    Ok(f * self.conditional(r, state, gamma, d_los, d_nlos, &inner)?.0)
                },
                &outer,
            )
        };
        let (t_los, e_los) = term(LinkState::Los)?;
        let (t_nlos, e_nlos) = term(LinkState::Nlos)?;
        Ok(CoverageResult {
            value: (t_los + t_nlos).clamp(0.0, 1.0),
            t_los,
            t_nlos,
            quad_error: e_los + e_nlos,
        })
    }

    /// Coverage of teleporting UAVs: the serving UAV sits overhead at
    /// distance `h`, every Poisson point interferes from `[h, ∞)`.
    pub fn coverage_upper(&self, gamma: f64) -> Result<CoverageResult> {
        self.coverage_upper_with(gamma, UpperBoundForm::Weighted)
    }

    pub fn coverage_upper_with(&self, gamma: f64, form: UpperBoundForm) -> Result<CoverageResult> {
        check_threshold(gamma)?;
        let h = self.cfg.h;
        let (c_los, e_los) = self.conditional(h, LinkState::Los, gamma, h, h, &self.quad)?;
        let (c_nlos, e_nlos) = self.conditional(h, LinkState::Nlos, gamma, h, h, &self.quad)?;
        let (w_los, w_nlos) = match form {
            UpperBoundForm::Weighted => {
                let p = self.los_prob(h);
                (p, 1.0 - p)
            }
            UpperBoundForm::Unweighted => (1.0, 1.0),
        };
        let t_los = w_los * c_los;
        let t_nlos = w_nlos * c_nlos;
        let value = match form {
            UpperBoundForm::Weighted => (t_los + t_nlos).clamp(0.0, 1.0),
            UpperBoundForm::Unweighted => t_los + t_nlos,
        };
        Ok(CoverageResult {
            value,
            t_los,
            t_nlos,
            quad_error: w_los * e_los + w_nlos * e_nlos,
        })
    }

    pub fn coverage(&self, gamma: f64, bound: Bound) -> Result<CoverageResult> {
        match bound {
            Bound::Lower => self.coverage_lower(gamma),
            Bound::Upper => self.coverage_upper(gamma),
        }
    }

    /// Area spectral efficiency with minimum working threshold `gamma0`
    /// (linear):
    /// `(λ/ln 2)·∫_{γ0}^∞ p(γ)/(1+γ) dγ + λ·log2(1+γ0)·p(γ0)`.
    pub fn ase(&self, gamma0: f64, bound: Bound) -> Result<AseResult> {
        check_threshold(gamma0)?;
        let inner = Self {
            quad: self.quad.tightened(10.0),
            ..self.clone()
        };
        let lambda = self.cfg.lambda;
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let tail = integrate_piecewise(
            |g| {
                if failure.borrow().is_some() {
                    return 0.0;
                }
                match inner.coverage(g, bound) {
                    Ok(c) => c.value / (1.0 + g),
                    Err(e) => {
                        *failure.borrow_mut() = Some(e);
                        0.0
                    }
                }
            },
            &[gamma0],
            Some(Tail::Logarithmic),
            &self.quad,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let tail = tail?;
        let at_threshold = inner.coverage(gamma0, bound)?;
        let rate0 = (1.0 + gamma0).log2();
        Ok(AseResult {
            value: lambda / LN_2 * tail.value + lambda * rate0 * at_threshold.value,
            quad_error: lambda / LN_2 * tail.error + lambda * rate0 * at_threshold.quad_error,
        })
    }
}

fn check_threshold(gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(invalid(format!("SINR threshold must be > 0 and finite, got {gamma}")));
    }
    Ok(())
}

pub fn serving_distance_pdf_los(cfg: &NetworkConfig, r: f64) -> Result<f64> {
    CoverageModel::new(*cfg)?.serving_distance_pdf_los(r)
}

pub fn serving_distance_pdf_nlos(cfg: &NetworkConfig, r: f64) -> Result<f64> {
    CoverageModel::new(*cfg)?.serving_distance_pdf_nlos(r)
}

pub fn laplace_interference(cfg: &NetworkConfig, s: f64, serving_r: f64, state: LinkState) -> Result<f64> {
    CoverageModel::new(*cfg)?.laplace_interference(s, serving_r, state)
}

pub fn conditional_coverage(cfg: &NetworkConfig, r: f64, state: LinkState, gamma: f64) -> Result<f64> {
    CoverageModel::new(*cfg)?.conditional_coverage(r, state, gamma)
}

pub fn coverage_lower(cfg: &NetworkConfig, gamma: f64) -> Result<CoverageResult> {
    CoverageModel::new(*cfg)?.coverage_lower(gamma)
}

pub fn coverage_upper(cfg: &NetworkConfig, gamma: f64) -> Result<CoverageResult> {
    CoverageModel::new(*cfg)?.coverage_upper(gamma)
}

pub fn ase(cfg: &NetworkConfig, gamma0: f64, bound: Bound) -> Result<AseResult> {
    CoverageModel::new(*cfg)?.ase(gamma0, bound)
}
