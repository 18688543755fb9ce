//! Time series of the correlation measures, sudden-death detection, the
//! entanglement sudden-death onset, decay-rate sweeps and long-time limits.
//!
//! All times here are the dimensionless `Ωt`; physical time is `Ωt / Ω`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{try_map_indexed, Execution};
use crate::measures::{bell_diagonal_correlations, concurrence_xstate, discord_numeric};
use crate::model::{
    asymptotic_magnitude_sq, correlation_vector, decoherence_factor, decoherence_factor_unchecked,
    two_atom_state_for_factor, CorrelationVector, Family, PhysicalParams, WernerSpec,
};

/// Default discord threshold for reporting discord "death".
pub const DEFAULT_DISCORD_THRESHOLD: f64 = 1e-3;
/// Step of the sign-change scan in [`esd_onset`], in `Ωt`.
pub const ONSET_SCAN_STEP: f64 = 1e-3;
/// Bisection tolerance on boundary times, in `Ωt`.
pub const BOUNDARY_TOL: f64 = 1e-10;

/// Uniform grid `Ωt_k = t_max k / steps`, `k = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    pub t_max: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, steps: usize) -> Result<Self> {
        if steps < 1 {
            return Err(Error::InvalidParameter(
                "time grid needs at least 2 points".into(),
            ));
        }
        if !(t_max >= 0.0) || !t_max.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "t_max must be finite and >= 0, got {t_max}"
            )));
        }
        Ok(Self { t_max, steps })
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn at(&self, k: usize) -> f64 {
        self.t_max * k as f64 / self.steps as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.at(k)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscordMode {
    #[default]
    ClosedForm,
    Numeric,
    /// Closed form in the rows, numeric minimizer as a cross-check.
    Both,
}

impl std::str::FromStr for DiscordMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed-form" => Ok(Self::ClosedForm),
            "numeric" => Ok(Self::Numeric),
            "both" => Ok(Self::Both),
            other => Err(Error::InvalidParameter(format!(
                "unknown discord mode {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeSeriesRow {
    pub omega_t: f64,
    pub f_sq: f64,
    pub discord: f64,
    pub classical_corr: f64,
    pub mutual_info: f64,
    pub concurrence: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SeriesOptions {
    pub discord_mode: DiscordMode,
    pub execution: Execution,
}

#[derive(Debug, Clone)]
pub struct TimeSeries {
    pub spec: WernerSpec,
    pub params: PhysicalParams,
    pub rows: Vec<TimeSeriesRow>,
    /// Largest |closed form − numeric| discord gap, in [`DiscordMode::Both`].
    pub numeric_gap: Option<f64>,
}

/// Correlation triple of the model state for a given `|f|²`.
pub fn model_correlations(spec: &WernerSpec, f_sq: f64) -> CorrelationVector {
    let p = spec.p();
    let x = p * f_sq;
    match spec.family() {
        Family::Phi => CorrelationVector {
            d1: x,
            d2: x,
            d3: -p,
        },
        Family::Psi => CorrelationVector {
            d1: x,
            d2: -x,
            d3: p,
        },
    }
}

/// Closed-form discord of the model state at `Ωt`.
pub fn model_discord(spec: &WernerSpec, params: &PhysicalParams, omega_t: f64) -> Result<f64> {
    let f_sq = decoherence_factor(params, omega_t / params.omega_eff())?.norm_sqr();
    let (_, _, d) = bell_diagonal_correlations(&model_correlations(spec, f_sq))?;
    Ok(d)
}

fn evaluate_row(
    spec: &WernerSpec,
    params: &PhysicalParams,
    omega_t: f64,
    mode: DiscordMode,
) -> Result<(TimeSeriesRow, Option<f64>)> {
    let f = decoherence_factor(params, omega_t / params.omega_eff())?;
    let rho = two_atom_state_for_factor(spec, f);
    let concurrence = concurrence_xstate(&rho)?;
    let (mutual_info, classical_corr, discord) =
        bell_diagonal_correlations(&correlation_vector(&rho)?)?;
    let mut row = TimeSeriesRow {
        omega_t,
        f_sq: f.norm_sqr(),
        discord,
        classical_corr,
        mutual_info,
        concurrence,
    };
    let gap = match mode {
        DiscordMode::ClosedForm => None,
        DiscordMode::Numeric => {
            let report = discord_numeric(&rho)?;
            row.mutual_info = report.mutual_info;
            row.classical_corr = report.classical_corr;
            row.discord = report.discord;
            None
        }
        DiscordMode::Both => Some((discord_numeric(&rho)?.discord - discord).abs()),
    };
    Ok((row, gap))
}

pub fn time_series(
    spec: &WernerSpec,
    params: &PhysicalParams,
    grid: &TimeGrid,
    opts: &SeriesOptions,
) -> Result<TimeSeries> {
    let evaluated = try_map_indexed(opts.execution, grid.len(), |k| {
        evaluate_row(spec, params, grid.at(k), opts.discord_mode)
    })?;
    let numeric_gap = (opts.discord_mode == DiscordMode::Both)
        .then(|| evaluated.iter().filter_map(|(_, g)| *g).fold(0.0, f64::max));
    let rows = evaluated.into_iter().map(|(r, _)| r).collect();
    Ok(TimeSeries {
        spec: *spec,
        params: *params,
        rows,
        numeric_gap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Concurrence,
    Discord,
}

/// A maximal interval where a quantity sits below its threshold (or at
/// exactly zero for concurrence with threshold 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeathEvent {
    pub quantity: Quantity,
    pub t_start: f64,
    /// `None` when the interval is still open at the end of the series.
    pub t_end: Option<f64>,
    pub threshold: f64,
}

/// Signed distance to the threshold, negative (or zero, for the exact-zero
/// concurrence case) inside a death interval.
fn crossing_fn(
    spec: &WernerSpec,
    params: &PhysicalParams,
    quantity: Quantity,
    threshold: f64,
) -> impl Fn(f64) -> f64 {
    let spec = *spec;
    let params = *params;
    move |omega_t: f64| {
        let f_sq = decoherence_factor_unchecked(&params, omega_t / params.omega_eff()).norm_sqr();
        match quantity {
            Quantity::Concurrence => spec.p() * f_sq - (1.0 - spec.p()) / 2.0 - threshold,
            Quantity::Discord => {
                let d = model_correlations(&spec, f_sq);
                bell_diagonal_correlations(&d)
                    .map(|(_, _, x)| x)
                    .unwrap_or(f64::NAN)
                    - threshold
            }
        }
    }
}

/// Bisection for a sign change of `h` on `[lo, hi]` where `inside(h(lo))`
/// differs from `inside(h(hi))`.
fn bisect(
    h: &impl Fn(f64) -> f64,
    inside: &impl Fn(f64) -> bool,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> f64 {
    let lo_inside = inside(h(lo));
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if inside(h(mid)) == lo_inside {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Maximal intervals where `quantity` is below `threshold`, found by a scan
/// of the series grid and refined by bisection on the analytic expressions.
///
/// Discord needs `threshold > 0` (it never vanishes exactly in this model);
/// concurrence accepts `threshold = 0`, meaning exact zeros.
pub fn detect_death_intervals(
    series: &TimeSeries,
    quantity: Quantity,
    threshold: f64,
) -> Result<Vec<DeathEvent>> {
    match quantity {
        Quantity::Discord if !(threshold > 0.0) => {
            return Err(Error::InvalidParameter(
                "discord threshold must be > 0".into(),
            ));
        }
        Quantity::Concurrence if !(threshold >= 0.0) => {
            return Err(Error::InvalidParameter(
                "concurrence threshold must be >= 0".into(),
            ));
        }
        _ => {}
    }
    let h = crossing_fn(&series.spec, &series.params, quantity, threshold);
    let exact_zero = threshold == 0.0;
    let inside = move |v: f64| if exact_zero { v <= 0.0 } else { v < 0.0 };

    let times: Vec<f64> = series.rows.iter().map(|r| r.omega_t).collect();
    let mut events = Vec::new();
    let mut open: Option<f64> = None;
    for (k, &t) in times.iter().enumerate() {
        let below = inside(h(t));
        match (open, below) {
            (None, true) => {
                let start = if k == 0 {
                    t
                } else {
                    bisect(&h, &inside, times[k - 1], t, BOUNDARY_TOL)
                };
                open = Some(start);
            }
            (Some(start), false) => {
                let end = bisect(&h, &inside, times[k - 1], t, BOUNDARY_TOL);
                events.push(DeathEvent {
                    quantity,
                    t_start: start,
                    t_end: Some(end),
                    threshold,
                });
                open = None;
            }
            _ => {}
        }
    }
    if let Some(start) = open {
        events.push(DeathEvent {
            quantity,
            t_start: start,
            t_end: None,
            threshold,
        });
    }
    Ok(events)
}

/// First `Ωt > 0` where `p|f|² = (1 − p)/2`, i.e. where concurrence first
/// reaches zero. `None` if no crossing occurs before the long-time regime.
pub fn esd_onset(p: f64, params: &PhysicalParams) -> Result<Option<f64>> {
    if !(p > 1.0 / 3.0 && p <= 1.0) {
        return Err(Error::NeverEntangled { p });
    }
    let spec = WernerSpec::new(p, Family::Phi)?;
    let h = crossing_fn(&spec, params, Quantity::Concurrence, 0.0);
    let inside = |v: f64| v <= 0.0;

    let gamma = params.gamma_over_omega();
    // |f|² is π-periodic without loss; with loss, scan until e^{-2γt} is
    // negligible (capped for very weak damping).
    let horizon = if gamma == 0.0 {
        PI + ONSET_SCAN_STEP
    } else {
        (30.0 / gamma).clamp(PI + ONSET_SCAN_STEP, 2e4)
    };
    let steps = (horizon / ONSET_SCAN_STEP).ceil() as u64;
    let mut prev = 0.0;
    for k in 1..=steps {
        let t = k as f64 * ONSET_SCAN_STEP;
        if inside(h(t)) {
            return Ok(Some(bisect(&h, &inside, prev, t, BOUNDARY_TOL)));
        }
        prev = t;
    }
    Ok(None)
}

/// Closed-form discord over a `γ/Ω × Ωt` grid (one row per decay rate).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepMatrix {
    pub gammas: Vec<f64>,
    pub omega_t: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

pub fn sweep_gamma(
    spec: &WernerSpec,
    alpha: Complex64,
    gammas: &[f64],
    grid: &TimeGrid,
    execution: Execution,
) -> Result<SweepMatrix> {
    if gammas.is_empty() {
        return Err(Error::InvalidParameter("decay-rate grid is empty".into()));
    }
    let params: Vec<PhysicalParams> = gammas
        .iter()
        .map(|&g| PhysicalParams::scaled(g, alpha))
        .collect::<Result<_>>()?;
    let times = grid.points();
    let values = try_map_indexed(execution, gammas.len(), |i| {
        times
            .iter()
            .map(|&t| model_discord(spec, &params[i], t))
            .collect::<Result<Vec<f64>>>()
    })?;
    Ok(SweepMatrix {
        gammas: gammas.to_vec(),
        omega_t: times,
        values,
    })
}

/// `n` log-spaced values in `[lo, hi]`.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LongTimeLimits {
    pub f_sq_inf: f64,
    pub discord: f64,
    pub concurrence: f64,
}

/// Discord and concurrence in the `t → ∞` limit (needs `γ > 0`).
pub fn long_time_limits(spec: &WernerSpec, params: &PhysicalParams) -> Result<LongTimeLimits> {
    let f_sq_inf = asymptotic_magnitude_sq(params)?;
    let (_, _, discord) = bell_diagonal_correlations(&model_correlations(spec, f_sq_inf))?;
    let concurrence = (spec.p() * f_sq_inf - (1.0 - spec.p()) / 2.0).max(0.0);
    Ok(LongTimeLimits {
        f_sq_inf,
        discord,
        concurrence,
    })
}
