use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::analysis::{Bound, CoverageModel, ExclusionTable, NetworkConfig};
use crate::error::{invalid, Result};
use crate::montecarlo::{coverage_of, Estimate, SimMode, SimSpec, Simulator};
use crate::quadrature::QuadratureSpec;

use super::config::{Environment, SweepConfig};

/// Allowed gap between the analytical and simulated coverage, on top of the
/// simulation's confidence halfwidth.
pub const ORACLE_TOLERANCE: f64 = 0.01;

/// One `(model, h, λ)` cell. Cells that were not requested, or failed, are
/// `None`; failures are described in `diagnostics`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub model: String,
    pub h_km: f64,
    pub lambda_per_km2: f64,
    pub gamma_db: f64,
    pub coverage_lower: Option<f64>,
    pub coverage_upper: Option<f64>,
    pub ase_lower: Option<f64>,
    pub ase_upper: Option<f64>,
    pub mc_coverage: Option<f64>,
    pub mc_halfwidth: Option<f64>,
    pub diagnostics: Vec<String>,
}

impl SweepRow {
    pub fn coverage(&self, bound: Bound) -> Option<f64> {
        match bound {
            Bound::Lower => self.coverage_lower,
            Bound::Upper => self.coverage_upper,
        }
    }

    pub fn ase(&self, bound: Bound) -> Option<f64> {
        match bound {
            Bound::Lower => self.ase_lower,
            Bound::Upper => self.ase_upper,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Coverage,
    Ase,
}

struct Cell<'a> {
    env: &'a Environment,
    h: f64,
    lambda: f64,
}

fn cells(config: &SweepConfig) -> Vec<Cell<'_>> {
    let mut out = Vec::new();
    for env in &config.models {
        for &h in &config.heights {
            for &lambda in &config.densities {
                out.push(Cell { env, h, lambda });
            }
        }
    }
    out
}

fn network(config: &SweepConfig, cell: &Cell<'_>) -> NetworkConfig {
    NetworkConfig {
        lambda: cell.lambda,
        h: cell.h,
        p_tx: config.p_tx,
        n0: config.n0,
        params: cell.env.params,
        los_model: cell.env.los_model,
    }
}

/// Exclusion tables shared by all densities of one `(model, h)`.
fn tables(config: &SweepConfig) -> HashMap<(usize, usize), Arc<ExclusionTable>> {
    let keys: Vec<(usize, usize)> = (0..config.models.len())
        .flat_map(|m| (0..config.heights.len()).map(move |h| (m, h)))
        .collect();
    keys.into_par_iter()
        .map(|(m, h)| {
            let t = ExclusionTable::new(config.models[m].los_model, config.heights[h]);
            ((m, h), Arc::new(t))
        })
        .collect()
}

fn table_for(
    config: &SweepConfig,
    tables: &HashMap<(usize, usize), Arc<ExclusionTable>>,
    cell: &Cell<'_>,
) -> Arc<ExclusionTable> {
    let m = config.models.iter().position(|e| std::ptr::eq(e, cell.env)).unwrap();
    let h = config.heights.iter().position(|&x| x == cell.h).unwrap();
    tables[&(m, h)].clone()
}

/// Evaluates every requested cell, in config order (models, then heights,
/// then densities).
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let tables = if config.engines.analytical() {
        tables(config)
    } else {
        HashMap::new()
    };
    let rows = cells(config)
        .par_iter()
        .map(|cell| {
            let mut row = SweepRow {
                model: cell.env.name().to_string(),
                h_km: cell.h,
                lambda_per_km2: cell.lambda,
                gamma_db: config.gamma_db,
                coverage_lower: None,
                coverage_upper: None,
                ase_lower: None,
                ase_upper: None,
                mc_coverage: None,
                mc_halfwidth: None,
                diagnostics: Vec::new(),
            };
            let net = network(config, cell);
            if config.engines.analytical() {
                analytical_cells(config, &net, table_for(config, &tables, cell), &mut row);
            }
            if config.engines.montecarlo() {
                let mode = if config.bound.includes(Bound::Lower) {
                    SimMode::Hovering
                } else {
                    SimMode::Teleport
                };
                let spec = SimSpec::new(cell.lambda, config.trials, config.seed, mode);
                match Simulator::new(net, spec) {
                    Ok(sim) => {
                        let samples = sim.run();
                        let est = coverage_of(samples.iter().map(|s| s.get(mode)), config.gamma);
                        row.mc_coverage = Some(est.value);
                        row.mc_halfwidth = Some(est.halfwidth);
                    }
                    Err(e) => row.diagnostics.push(format!("montecarlo: {e}")),
                }
            }
            row
        })
        .collect();
    Ok(rows)
}

fn analytical_cells(config: &SweepConfig, net: &NetworkConfig, table: Arc<ExclusionTable>, row: &mut SweepRow) {
    let model = match CoverageModel::with_table(*net, table, QuadratureSpec::default()) {
        Ok(m) => m,
        Err(e) => {
            row.diagnostics.push(format!("analysis: {e}"));
            return;
        }
    };
    for bound in config.bound.bounds() {
        match model.coverage(config.gamma, bound) {
            Ok(c) => match bound {
                Bound::Lower => row.coverage_lower = Some(c.value),
                Bound::Upper => row.coverage_upper = Some(c.value),
            },
            Err(e) => row.diagnostics.push(format!("coverage {bound}: {e}")),
        }
        if config.ase {
            match model.ase(config.gamma, bound) {
                Ok(a) => match bound {
                    Bound::Lower => row.ase_lower = Some(a.value),
                    Bound::Upper => row.ase_upper = Some(a.value),
                },
                Err(e) => row.diagnostics.push(format!("ase {bound}: {e}")),
            }
        }
    }
}

/// Grid point with the largest `metric` under `bound`; ties go to the
/// smaller density. All rows must share model, height and threshold.
pub fn find_optimal_density(rows: &[SweepRow], metric: Metric, bound: Bound) -> Result<(f64, f64)> {
    let first = rows.first().ok_or_else(|| invalid("no rows to search"))?;
    let mut best: Option<(f64, f64)> = None;
    for row in rows {
        if row.model != first.model || row.h_km != first.h_km || row.gamma_db != first.gamma_db {
            return Err(invalid("rows mix models, heights or thresholds"));
        }
        let value = match metric {
            Metric::Coverage => row.coverage(bound),
            Metric::Ase => row.ase(bound),
        }
        .ok_or_else(|| invalid(format!("row at λ={} has no {metric:?} value", row.lambda_per_km2)))?;
        best = match best {
            Some((l, v)) if v > value || (v == value && l <= row.lambda_per_km2) => Some((l, v)),
            _ => Some((row.lambda_per_km2, value)),
        };
    }
    Ok(best.unwrap())
}

/// Analytical bound against simulation for one cell.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationCell {
    pub model: String,
    pub h_km: f64,
    pub lambda_per_km2: f64,
    pub bound: Bound,
    pub analytical: Option<f64>,
    pub montecarlo: Estimate,
    pub error: Option<String>,
}

impl ValidationCell {
    pub fn difference(&self) -> Option<f64> {
        self.analytical.map(|a| (a - self.montecarlo.value).abs())
    }

    /// Within [`ORACLE_TOLERANCE`] plus the simulation halfwidth.
    pub fn passes(&self) -> bool {
        self.difference()
            .is_some_and(|d| d <= ORACLE_TOLERANCE + self.montecarlo.halfwidth)
    }
}

/// Compares both engines on every cell and requested bound. Hovering and
/// teleport simulations share one set of draws per cell.
pub fn validate_engines(config: &SweepConfig) -> Result<Vec<ValidationCell>> {
    config.validate()?;
    let tables = tables(config);
    let per_cell: Vec<Vec<ValidationCell>> = cells(config)
        .par_iter()
        .map(|cell| {
            let net = network(config, cell);
            let sim = Simulator::new(
                net,
                SimSpec::new(cell.lambda, config.trials, config.seed, SimMode::Hovering),
            );
            let model = CoverageModel::with_table(net, table_for(config, &tables, cell), QuadratureSpec::default());
            let samples = sim.as_ref().map(|s| s.run());
            config
                .bound
                .bounds()
                .into_iter()
                .map(|bound| {
                    let mode = match bound {
                        Bound::Lower => SimMode::Hovering,
                        Bound::Upper => SimMode::Teleport,
                    };
                    let mut error = None;
                    let montecarlo = match &samples {
                        Ok(s) => coverage_of(s.iter().map(|t| t.get(mode)), config.gamma),
                        Err(e) => {
                            error = Some(format!("montecarlo: {e}"));
                            Estimate {
                                value: f64::NAN,
                                halfwidth: f64::NAN,
                            }
                        }
                    };
                    let analytical = match model.as_ref().map(|m| m.coverage(config.gamma, bound)) {
                        Ok(Ok(c)) => Some(c.value),
                        Ok(Err(e)) => {
                            error.get_or_insert(format!("analysis: {e}"));
                            None
                        }
                        Err(e) => {
                            error.get_or_insert(format!("analysis: {e}"));
                            None
                        }
                    };
                    ValidationCell {
                        model: cell.env.name().to_string(),
                        h_km: cell.h,
                        lambda_per_km2: cell.lambda,
                        bound,
                        analytical,
                        montecarlo,
                        error,
                    }
                })
                .collect()
        })
        .collect();
    Ok(per_cell.into_iter().flatten().collect())
}
