//! Cumulative LoS/NLoS point masses `∫_h^x Pr(u)·u du`.
//!
//! These do not depend on the density, so one table serves a whole density
//! sweep; multiply by `2πλ` to get the expected number of UAVs of each kind
//! within 3D distance `x`.

use crate::channel::LosModel;
use crate::error::Result;
use crate::quadrature::{integrate_piecewise, kronrod_nodes, QuadratureSpec};

const KNOTS_PER_DECADE: f64 = 24.0;
const MIN_OFFSET: f64 = 1e-8;
const MAX_OFFSET: f64 = 1e5;

#[derive(Clone, Debug)]
pub struct ExclusionTable {
    model: LosModel,
    h: f64,
    knots: Vec<f64>,
    los: Vec<f64>,
    nlos: Vec<f64>,
}

impl ExclusionTable {
    pub fn new(model: LosModel, h: f64) -> Self {
        // Knots at h·(1+δ) with δ log-spaced: dense where the elevation law has
        // its square-root behavior, plus every kink of the LoS law.
        let decades = (MAX_OFFSET / MIN_OFFSET).log10();
        let n = (decades * KNOTS_PER_DECADE).ceil() as usize;
        let mut knots = Vec::with_capacity(n + 4);
        knots.push(h);
        for i in 0..=n {
            let delta = MIN_OFFSET * 10f64.powf(i as f64 / KNOTS_PER_DECADE);
            knots.push(h * (1.0 + delta));
        }
        let last = *knots.last().unwrap();
        knots.extend(model.breakpoints().into_iter().filter(|&b| b > h && b < last));
        knots.sort_by(f64::total_cmp);
        knots.dedup();

        let mut los = Vec::with_capacity(knots.len());
        let mut nlos = Vec::with_capacity(knots.len());
        let (mut acc_l, mut acc_n) = (0.0, 0.0);
        los.push(0.0);
        nlos.push(0.0);
        for w in knots.windows(2) {
            let (l, nl) = panel(&model, h, w[0], w[1]);
            acc_l += l;
            acc_n += nl;
            los.push(acc_l);
            nlos.push(acc_n);
        }
        Self {
            model,
            h,
            knots,
            los,
            nlos,
        }
    }

    pub fn height(&self) -> f64 {
        self.h
    }

    pub fn model(&self) -> &LosModel {
        &self.model
    }

    /// `(∫_h^x Pr^L(u)·u du, ∫_h^x (1−Pr^L(u))·u du)`; zero for `x ≤ h`.
    pub fn masses(&self, x: f64) -> Result<(f64, f64)> {
        if !(x > self.h) {
            return Ok((0.0, 0.0));
        }
        if x == f64::INFINITY {
            return Ok((f64::INFINITY, f64::INFINITY));
        }
        let last = *self.knots.last().unwrap();
        if x >= last {
            let n = self.knots.len() - 1;
            if x == last {
                return Ok((self.los[n], self.nlos[n]));
            }
            // Far beyond every kink; only reached when the result is already
            // vanishingly small after exponentiation.
            let spec = QuadratureSpec::new(1e-10, 0.0, 200)?;
            let model = self.model;
            let h = self.h;
            let l = integrate_piecewise(|u| model.probability(u, h) * u, &[last, x], None, &spec)?;
            let nl = integrate_piecewise(|u| (1.0 - model.probability(u, h)) * u, &[last, x], None, &spec)?;
            return Ok((self.los[n] + l.value, self.nlos[n] + nl.value));
        }
        let k = self.knots.partition_point(|&kn| kn <= x) - 1;
        let (l, nl) = panel(&self.model, self.h, self.knots[k], x);
        Ok((self.los[k] + l, self.nlos[k] + nl))
    }
}

fn panel(model: &LosModel, h: f64, a: f64, b: f64) -> (f64, f64) {
    let mut l = 0.0;
    let mut nl = 0.0;
    for (u, w) in kronrod_nodes(a, b) {
        let p = model.probability(u, h);
        l += w * p * u;
        nl += w * (1.0 - p) * u;
    }
    (l, nl)
}
