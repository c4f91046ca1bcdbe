//! Adaptive Gauss–Kronrod quadrature on finite and semi-infinite intervals.
//!
//! Every integral in the analytical engine goes through [`integrate_piecewise`]:
//! the caller lists the points where the integrand has a kink, picks how the
//! unbounded tail (if any) is mapped onto `[0, 1)`, and all pieces share one
//! global error budget. Panels are refined by bisecting whichever one
//! currently carries the largest error estimate.

use thiserror::Error;

/// Tolerances and subdivision budget for one adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Self, QuadratureError> {
        let spec = Self {
            rel_tol,
            abs_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), QuadratureError> {
        if !(self.rel_tol > 0.0) || !self.rel_tol.is_finite() {
            return Err(QuadratureError::InvalidSpec(format!(
                "rel_tol must be > 0, got {}",
                self.rel_tol
            )));
        }
        if !(self.abs_tol >= 0.0) || !self.abs_tol.is_finite() {
            return Err(QuadratureError::InvalidSpec(format!(
                "abs_tol must be >= 0, got {}",
                self.abs_tol
            )));
        }
        if self.max_subdivisions < 1 {
            return Err(QuadratureError::InvalidSpec("max_subdivisions must be >= 1".into()));
        }
        Ok(())
    }

    /// Same budget with both tolerances divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            rel_tol: self.rel_tol / factor,
            abs_tol: self.abs_tol / factor,
            max_subdivisions: self.max_subdivisions,
        }
    }
}

/// A converged integral together with its estimated absolute error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum QuadratureError {
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
    #[error("invalid integration interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("integrand is not finite at x = {at}")]
    NonFinite { at: f64 },
    #[error("no convergence after {subdivisions} subdivisions (best estimate {value:e} ± {error:e})")]
    NotConverged {
        value: f64,
        error: f64,
        subdivisions: usize,
    },
}

impl QuadratureError {
    /// Best available estimate when the failure was a budget overrun.
    pub fn best_estimate(&self) -> Option<Integral> {
        match *self {
            QuadratureError::NotConverged { value, error, .. } => Some(Integral { value, error }),
            _ => None,
        }
    }
}

/// How the unbounded piece `[lo, ∞)` is folded onto `t ∈ [0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tail {
    /// `u = lo + scale·t/(1−t)`; suited to integrands decaying on a length scale `scale`.
    Linear { scale: f64 },
    /// `u = lo·exp(t/(1−t))`; suited to algebraic tails like `u^(−1−ε)`. Requires `lo > 0`.
    Logarithmic,
}

// Gauss–Kronrod 21-point nodes/weights (QUADPACK qk21); the odd-indexed nodes
// are the 10-point Gauss–Legendre rule.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_287_359_270,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

struct Panel {
    segment: usize,
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    splittable: bool,
}

/// One fixed 21-point Kronrod panel on `[a, b]`; returns (value, error estimate).
fn kronrod21<F: FnMut(f64) -> Result<f64, QuadratureError>>(
    f: &mut F,
    a: f64,
    b: f64,
) -> Result<(f64, f64), QuadratureError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    let fc = f(center)?;
    let mut resk = WGK[10] * fc;
    let mut resg = 0.0;
    let mut resabs = resk.abs();
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Ok((value, err))
}

/// Single 21-point Kronrod panel, no adaptivity. Exact for polynomials of
/// degree ≤ 31; meant for short smooth segments.
pub fn kronrod_panel<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = WGK[10] * f(center);
    for j in 0..10 {
        let dx = half * XGK[j];
        sum += WGK[j] * (f(center - dx) + f(center + dx));
    }
    sum * half
}

/// Nodes and weights of the 21-point Kronrod rule mapped onto `[a, b]`.
pub fn kronrod_nodes(a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (0..21).map(move |i| {
        if i == 20 {
            (center, WGK[10] * half)
        } else {
            let j = i / 2;
            let dx = half * XGK[j];
            let x = if i % 2 == 0 { center - dx } else { center + dx };
            (x, WGK[j] * half)
        }
    })
}

/// `∫_lo^hi f(x) dx`.
pub fn integrate_finite<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
) -> Result<Integral, QuadratureError> {
    integrate_piecewise(f, &[lo, hi], None, spec)
}

/// `∫_lo^∞ f(x) dx` through `x = lo + t/(1−t)`.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    spec: &QuadratureSpec,
) -> Result<Integral, QuadratureError> {
    integrate_piecewise(f, &[lo], Some(Tail::Linear { scale: 1.0 }), spec)
}

/// Adaptive integration over consecutive pieces.
///
/// `points` must be non-decreasing. Without a tail the domain is
/// `[points[0], points[last]]`; with one it continues from `points[last]`
/// to infinity. Interior points are where the integrand is allowed to kink.
pub fn integrate_piecewise<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    tail: Option<Tail>,
    spec: &QuadratureSpec,
) -> Result<Integral, QuadratureError> {
    spec.validate()?;
    if points.is_empty() || (tail.is_none() && points.len() < 2) {
        return Err(QuadratureError::InvalidInterval {
            lo: points.first().copied().unwrap_or(f64::NAN),
            hi: f64::NAN,
        });
    }
    for w in points.windows(2) {
        if !(w[0] <= w[1]) || !w[0].is_finite() || !w[1].is_finite() {
            return Err(QuadratureError::InvalidInterval { lo: w[0], hi: w[1] });
        }
    }
    let last = *points.last().unwrap();
    if !last.is_finite() {
        return Err(QuadratureError::InvalidInterval {
            lo: last,
            hi: f64::INFINITY,
        });
    }
    match tail {
        Some(Tail::Logarithmic) if !(last > 0.0) => {
            return Err(QuadratureError::InvalidInterval {
                lo: last,
                hi: f64::INFINITY,
            });
        }
        Some(Tail::Linear { scale }) if !(scale > 0.0) || !scale.is_finite() => {
            return Err(QuadratureError::InvalidSpec(format!(
                "tail scale must be > 0, got {scale}"
            )));
        }
        _ => {}
    }

    let finite_pieces = points.len() - 1;
    let tail_segment = finite_pieces;

    // Integrand in each segment's local coordinate.
    let eval = |segment: usize, x: f64| -> Result<f64, QuadratureError> {
        let (u, jac) = if segment < tail_segment {
            (x, 1.0)
        } else {
            let s = x / (1.0 - x);
            let djac = 1.0 / ((1.0 - x) * (1.0 - x));
            match tail {
                Some(Tail::Linear { scale }) => (last + scale * s, scale * djac),
                Some(Tail::Logarithmic) => {
                    let u = last * s.exp();
                    (u, u * djac)
                }
                None => unreachable!(),
            }
        };
        if !u.is_finite() || !jac.is_finite() {
            return Ok(0.0);
        }
        let y = f(u);
        if !y.is_finite() {
            return Err(QuadratureError::NonFinite { at: u });
        }
        Ok(y * jac)
    };

    let mut panels: Vec<Panel> = Vec::new();
    for (i, w) in points.windows(2).enumerate() {
        if w[1] > w[0] {
            let (value, error) = kronrod21(&mut |x| eval(i, x), w[0], w[1])?;
            panels.push(Panel {
                segment: i,
                a: w[0],
                b: w[1],
                value,
                error,
                splittable: true,
            });
        }
    }
    if tail.is_some() {
        let (value, error) = kronrod21(&mut |x| eval(tail_segment, x), 0.0, 1.0)?;
        panels.push(Panel {
            segment: tail_segment,
            a: 0.0,
            b: 1.0,
            value,
            error,
            splittable: true,
        });
    }
    if panels.is_empty() {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }

    let mut subdivisions = panels.len();
    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        if error <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            return Ok(Integral { value: total, error });
        }
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.splittable)
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .map(|(i, _)| i);
        let Some(worst) = worst else {
            return Err(QuadratureError::NotConverged {
                value: total,
                error,
                subdivisions,
            });
        };
        if subdivisions >= spec.max_subdivisions {
            return Err(QuadratureError::NotConverged {
                value: total,
                error,
                subdivisions,
            });
        }
        let Panel { segment, a, b, .. } = panels.swap_remove(worst);
        let mid = 0.5 * (a + b);
        if !(mid > a && mid < b) || (b - a) <= 64.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE) {
            // Too narrow to bisect; keep it as is.
            let (value, error) = kronrod21(&mut |x| eval(segment, x), a, b)?;
            panels.push(Panel {
                segment,
                a,
                b,
                value,
                error,
                splittable: false,
            });
            continue;
        }
        for (lo, hi) in [(a, mid), (mid, b)] {
            let (value, error) = kronrod21(&mut |x| eval(segment, x), lo, hi)?;
            panels.push(Panel {
                segment,
                a: lo,
                b: hi,
                value,
                error,
                splittable: true,
            });
        }
        subdivisions += 1;
    }
}
