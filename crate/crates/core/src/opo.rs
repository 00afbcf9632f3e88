//! Below-threshold optical parametric oscillator (squeezed-light source).
//!
//! Forward model for the squeezed and antisqueezed quadrature variances of a
//! singly-resonant degenerate OPO observed through a total efficiency ηγ,
//!
//! ```text
//! V(s,as) = 1 ± ηγ · 4√x / ((1 ∓ √x)² + 4K²),   x = P_pump / P_threshold,  K = 2πf / κ
//! κ = (T + L) c / (n l)
//! ```
//!
//! plus a deterministic least-squares fitter that recovers the pump ratio,
//! the intracavity loss and one efficiency per measurement group from
//! squeezing/antisqueezing levels quoted in dB.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::constants::SPEED_OF_LIGHT;
use crate::error::{invalid, require_finite, Error, Result};
use crate::quadrature::check_efficiency;
use crate::simplex::{self, SimplexOptions};

/// Squeezer cavity geometry, the part of [`OpoParams`] held fixed during fits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityGeometry {
    /// Output coupler power transmission `T`.
    pub output_coupler: f64,
    /// Refractive index of the nonlinear crystal.
    pub refractive_index: f64,
    /// Optical round-trip length in metres.
    pub round_trip_length: f64,
}

impl CavityGeometry {
    pub fn validate(&self) -> Result<()> {
        let t = require_finite("output_coupler", self.output_coupler)?;
        if t <= 0.0 || t > 1.0 {
            return Err(invalid(
                "output_coupler",
                format!("must lie in (0, 1], got {t}"),
            ));
        }
        let n = require_finite("refractive_index", self.refractive_index)?;
        if n < 1.0 {
            return Err(invalid(
                "refractive_index",
                format!("must be >= 1, got {n}"),
            ));
        }
        let l = require_finite("round_trip_length", self.round_trip_length)?;
        if l <= 0.0 {
            return Err(invalid(
                "round_trip_length",
                format!("must be > 0, got {l}"),
            ));
        }
        Ok(())
    }
}

/// Full parameter set of the squeezed-light source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpoParams {
    pub cavity: CavityGeometry,
    /// Intracavity round-trip loss `L`.
    pub intracavity_loss: f64,
    /// Pump power over threshold power, in `[0, 1)`.
    pub pump_ratio: f64,
    /// Combined detection and escape efficiency ηγ.
    pub eta_total: f64,
}

impl OpoParams {
    pub fn validate(&self) -> Result<()> {
        self.cavity.validate()?;
        let l = require_finite("intracavity_loss", self.intracavity_loss)?;
        if !(0.0..1.0).contains(&l) {
            return Err(invalid(
                "intracavity_loss",
                format!("must lie in [0, 1), got {l}"),
            ));
        }
        if self.cavity.output_coupler + l >= 1.0 {
            return Err(invalid(
                "intracavity_loss",
                format!(
                    "output coupling plus intracavity loss must be < 1, got {}",
                    self.cavity.output_coupler + l
                ),
            ));
        }
        let x = require_finite("pump_ratio", self.pump_ratio)?;
        if x < 0.0 {
            return Err(invalid("pump_ratio", format!("must be >= 0, got {x}")));
        }
        if x >= 1.0 {
            return Err(Error::AboveThreshold(x));
        }
        check_efficiency("eta_total", self.eta_total)?;
        Ok(())
    }

    /// Escape efficiency `T / (T + L)` of the squeezer cavity.
    pub fn escape_efficiency(&self) -> f64 {
        self.cavity.output_coupler / (self.cavity.output_coupler + self.intracavity_loss)
    }
}

/// Field decay rate `κ = (T + L)c / (n l)` in s⁻¹.
pub fn cavity_decay_rate(p: &OpoParams) -> Result<f64> {
    p.validate()?;
    Ok(decay_rate_unchecked(&p.cavity, p.intracavity_loss))
}

fn decay_rate_unchecked(cavity: &CavityGeometry, intracavity_loss: f64) -> f64 {
    (cavity.output_coupler + intracavity_loss) * SPEED_OF_LIGHT
        / (cavity.refractive_index * cavity.round_trip_length)
}

/// Sideband frequency normalized to the cavity decay rate, `K = 2πf/κ`.
pub fn sideband_ratio(frequency: f64, p: &OpoParams) -> Result<f64> {
    let f = require_finite("frequency", frequency)?;
    if f < 0.0 {
        return Err(invalid("frequency", format!("must be >= 0, got {f}")));
    }
    Ok(2.0 * PI * f / cavity_decay_rate(p)?)
}

/// Squeezed and antisqueezed variances at one sideband frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureVariances {
    pub squeezed: f64,
    pub antisqueezed: f64,
}

impl QuadratureVariances {
    /// Squeezing as a positive dB figure below vacuum.
    pub fn squeezing_db(&self) -> f64 {
        -10.0 * self.squeezed.log10()
    }

    pub fn antisqueezing_db(&self) -> f64 {
        10.0 * self.antisqueezed.log10()
    }
}

/// Squeezed/antisqueezed quadrature variances at `frequency` (Hz).
pub fn opo_variances(frequency: f64, p: &OpoParams) -> Result<QuadratureVariances> {
    let k = sideband_ratio(frequency, p)?;
    Ok(variances_unchecked(k, p.pump_ratio, p.eta_total))
}

fn variances_unchecked(k: f64, pump_ratio: f64, eta: f64) -> QuadratureVariances {
    let s = pump_ratio.sqrt();
    let k2 = 4.0 * k * k;
    let gain = 4.0 * s;
    QuadratureVariances {
        squeezed: 1.0 - eta * gain / ((1.0 + s).powi(2) + k2),
        antisqueezed: 1.0 + eta * gain / ((1.0 - s).powi(2) + k2),
    }
}

/// One measured squeezing spectrum point.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezingObservation {
    /// Sideband frequency in Hz.
    pub frequency: f64,
    /// Squeezing below vacuum, positive dB.
    pub squeeze_db: f64,
    /// Antisqueezing above vacuum, positive dB, when it was measured.
    pub antisqueeze_db: Option<f64>,
    /// Observations sharing a group share one fitted efficiency.
    pub group: Option<String>,
}

impl SqueezingObservation {
    pub fn new(frequency: f64, squeeze_db: f64, antisqueeze_db: Option<f64>) -> Self {
        Self {
            frequency,
            squeeze_db,
            antisqueeze_db,
            group: None,
        }
    }

    pub fn in_group(mut self, group: impl Into<String>) -> Self {
        self.group = Some(group.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        let f = require_finite("frequency", self.frequency)?;
        if f <= 0.0 {
            return Err(invalid("frequency", format!("must be > 0, got {f}")));
        }
        let s = require_finite("squeeze_db", self.squeeze_db)?;
        if s < 0.0 {
            return Err(invalid("squeeze_db", format!("must be >= 0, got {s}")));
        }
        if let Some(a) = self.antisqueeze_db {
            let a = require_finite("antisqueeze_db", a)?;
            if a < 0.0 {
                return Err(invalid("antisqueeze_db", format!("must be >= 0, got {a}")));
            }
        }
        Ok(())
    }

    fn equations(&self) -> usize {
        1 + usize::from(self.antisqueeze_db.is_some())
    }

    fn group_name(&self) -> &str {
        self.group.as_deref().unwrap_or(DEFAULT_GROUP)
    }
}

pub const DEFAULT_GROUP: &str = "default";

/// Noiseless synthetic observations of `p` at the given frequencies.
pub fn generate_observations(
    p: &OpoParams,
    frequencies: &[f64],
) -> Result<Vec<SqueezingObservation>> {
    frequencies
        .iter()
        .map(|&f| {
            let v = opo_variances(f, p)?;
            Ok(SqueezingObservation::new(
                f,
                v.squeezing_db(),
                Some(v.antisqueezing_db()),
            ))
        })
        .collect()
}

/// Search box and solver settings for [`fit_opo_params_with`].
#[derive(Debug, Clone)]
pub struct FitOptions {
    pub pump_ratio_range: (f64, f64),
    pub loss_range: (f64, f64),
    pub eta_range: (f64, f64),
    pub pump_ratio_steps: usize,
    pub loss_steps: usize,
    pub eta_steps: usize,
    pub simplex: SimplexOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            pump_ratio_range: (0.0, 0.95),
            loss_range: (0.0, 0.02),
            eta_range: (0.5, 1.0),
            pump_ratio_steps: 20,
            loss_steps: 11,
            eta_steps: 11,
            simplex: SimplexOptions {
                initial_step: 0.05,
                max_evaluations: 50_000,
                f_tolerance: 1e-26,
                x_tolerance: 1e-13,
                restarts: 6,
            },
        }
    }
}

// Hard limits for the local refinement; wider than the coarse grid.
const PUMP_LIMIT: (f64, f64) = (0.0, 0.999);
const ETA_LIMIT: (f64, f64) = (1e-3, 1.0);
const BOUNDARY_PENALTY: f64 = 1e3;

/// Result of an OPO parameter fit.
#[derive(Debug, Clone, PartialEq)]
pub struct OpoFit {
    pub pump_ratio: f64,
    pub intracavity_loss: f64,
    /// Fitted ηγ per measurement group, in order of first appearance.
    pub efficiencies: Vec<(String, f64)>,
    /// Sum of squared dB residuals at the optimum.
    pub residual: f64,
    pub rms_residual_db: f64,
    pub equations: usize,
    pub unknowns: usize,
    /// Ratio of extreme singular values of the scaled residual Jacobian.
    pub condition_number: f64,
    /// False when the data cannot pin every parameter (too few equations or a
    /// numerically flat direction in the residual).
    pub identifiable: bool,
    pub evaluations: usize,
}

impl OpoFit {
    pub fn efficiency(&self, group: &str) -> Option<f64> {
        self.efficiencies
            .iter()
            .find(|(g, _)| g == group)
            .map(|&(_, e)| e)
    }

    /// Parameters for one group, suitable for [`opo_variances`].
    pub fn params_for(&self, cavity: CavityGeometry, group: &str) -> Option<OpoParams> {
        Some(OpoParams {
            cavity,
            intracavity_loss: self.intracavity_loss,
            pump_ratio: self.pump_ratio,
            eta_total: self.efficiency(group)?,
        })
    }
}

/// Fits pump ratio, intracavity loss and per-group efficiency with default options.
pub fn fit_opo_params(
    observations: &[SqueezingObservation],
    cavity: &CavityGeometry,
) -> Result<OpoFit> {
    fit_opo_params_with(observations, cavity, &FitOptions::default())
}

struct Problem<'a> {
    obs: &'a [SqueezingObservation],
    group_of: Vec<usize>,
    groups: Vec<String>,
    cavity: CavityGeometry,
}

impl Problem<'_> {
    /// Squared residuals contributed by the observations of one group.
    fn group_cost(&self, group: usize, pump: f64, loss: f64, eta: f64) -> f64 {
        let kappa = decay_rate_unchecked(&self.cavity, loss);
        self.obs
            .iter()
            .zip(&self.group_of)
            .filter(|(_, &g)| g == group)
            .map(|(o, _)| obs_cost(o, kappa, pump, eta))
            .sum()
    }

    fn residuals(&self, pump: f64, loss: f64, etas: &[f64]) -> Vec<f64> {
        let kappa = decay_rate_unchecked(&self.cavity, loss);
        let mut out = Vec::new();
        for (o, &g) in self.obs.iter().zip(&self.group_of) {
            let v = variances_unchecked(2.0 * PI * o.frequency / kappa, pump, etas[g]);
            out.push(db_or_inf(v.squeezed, -1.0) - o.squeeze_db);
            if let Some(a) = o.antisqueeze_db {
                out.push(db_or_inf(v.antisqueezed, 1.0) - a);
            }
        }
        out
    }
}

fn db_or_inf(v: f64, sign: f64) -> f64 {
    if v > 0.0 {
        sign * 10.0 * v.log10()
    } else {
        f64::INFINITY
    }
}

fn obs_cost(o: &SqueezingObservation, kappa: f64, pump: f64, eta: f64) -> f64 {
    let v = variances_unchecked(2.0 * PI * o.frequency / kappa, pump, eta);
    let mut c = (db_or_inf(v.squeezed, -1.0) - o.squeeze_db).powi(2);
    if let Some(a) = o.antisqueeze_db {
        c += (db_or_inf(v.antisqueezed, 1.0) - a).powi(2);
    }
    c
}

fn linspace((lo, hi): (f64, f64), steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![lo];
    }
    (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect()
}

/// Fits the source model to measured squeezing levels.
///
/// Coarse grid over (pump ratio, loss) with the best grid efficiency chosen
/// independently per group, then simplex refinement of all parameters in
/// coordinates scaled by the grid ranges. Ties on the grid go to the first
/// index visited.
pub fn fit_opo_params_with(
    observations: &[SqueezingObservation],
    cavity: &CavityGeometry,
    opts: &FitOptions,
) -> Result<OpoFit> {
    cavity.validate()?;
    for o in observations {
        o.validate()?;
    }
    if observations.len() < 2 {
        return Err(Error::NonIdentifiable(format!(
            "need at least 2 observations, got {}",
            observations.len()
        )));
    }
    let equations: usize = observations
        .iter()
        .map(SqueezingObservation::equations)
        .sum();
    if equations < 3 {
        return Err(Error::NonIdentifiable(format!(
            "{equations} equations cannot determine pump ratio, loss and efficiency"
        )));
    }
    if observations
        .iter()
        .all(|o| o.squeeze_db == 0.0 && o.antisqueeze_db.unwrap_or(0.0) == 0.0)
    {
        return Err(Error::NonIdentifiable(
            "all observations are at the vacuum level".into(),
        ));
    }

    let mut groups: Vec<String> = Vec::new();
    let group_of = observations
        .iter()
        .map(|o| {
            let name = o.group_name();
            match groups.iter().position(|g| g == name) {
                Some(i) => i,
                None => {
                    groups.push(name.to_owned());
                    groups.len() - 1
                }
            }
        })
        .collect();
    let problem = Problem {
        obs: observations,
        group_of,
        groups,
        cavity: *cavity,
    };
    let n_groups = problem.groups.len();
    let unknowns = 2 + n_groups;
    let loss_limit = (0.0, (1.0 - cavity.output_coupler).min(0.5) - 1e-9);

    // Coarse grid.
    let pumps = linspace(opts.pump_ratio_range, opts.pump_ratio_steps);
    let losses = linspace(opts.loss_range, opts.loss_steps);
    let etas = linspace(opts.eta_range, opts.eta_steps);
    let mut best_cost = f64::INFINITY;
    let mut best_point = vec![pumps[0], losses[0]];
    best_point.extend(std::iter::repeat_n(etas[0], n_groups));
    for &pump in &pumps {
        for &loss in &losses {
            if cavity.output_coupler + loss >= 1.0 {
                continue;
            }
            let mut total = 0.0;
            let mut chosen = Vec::with_capacity(n_groups);
            for g in 0..n_groups {
                let (mut gbest, mut gcost) = (etas[0], f64::INFINITY);
                for &eta in &etas {
                    let c = problem.group_cost(g, pump, loss, eta);
                    if c < gcost {
                        gcost = c;
                        gbest = eta;
                    }
                }
                total += gcost;
                chosen.push(gbest);
            }
            if total < best_cost {
                best_cost = total;
                best_point = [pump, loss].into_iter().chain(chosen).collect();
            }
        }
    }

    // Refinement in scaled coordinates.
    let scales: Vec<f64> = [
        opts.pump_ratio_range.1 - opts.pump_ratio_range.0,
        opts.loss_range.1 - opts.loss_range.0,
    ]
    .into_iter()
    .chain(std::iter::repeat_n(
        opts.eta_range.1 - opts.eta_range.0,
        n_groups,
    ))
    .map(|s| if s > 0.0 { s } else { 1.0 })
    .collect();
    let limits: Vec<(f64, f64)> = [PUMP_LIMIT, loss_limit]
        .into_iter()
        .chain(std::iter::repeat_n(ETA_LIMIT, n_groups))
        .collect();
    let to_params = |u: &[f64]| -> (Vec<f64>, f64) {
        let mut penalty = 0.0;
        let p = u
            .iter()
            .zip(&scales)
            .zip(&limits)
            .map(|((&ui, &s), &(lo, hi))| {
                let raw = ui * s;
                let clamped = raw.clamp(lo, hi);
                penalty += ((raw - clamped) / s).powi(2);
                clamped
            })
            .collect();
        (p, penalty)
    };
    let objective = |u: &[f64]| -> f64 {
        let (p, penalty) = to_params(u);
        let cost: f64 = problem
            .residuals(p[0], p[1], &p[2..])
            .iter()
            .map(|r| r * r)
            .sum();
        cost + BOUNDARY_PENALTY * penalty
    };
    let start: Vec<f64> = best_point.iter().zip(&scales).map(|(p, s)| p / s).collect();
    let refined = simplex::minimize(objective, &start, &opts.simplex);
    let (params, _) = to_params(&refined.x);
    let residuals = problem.residuals(params[0], params[1], &params[2..]);
    let residual: f64 = residuals.iter().map(|r| r * r).sum();

    let condition_number = jacobian_condition(&problem, &params, &scales);
    let identifiable = equations >= unknowns && condition_number < 1e8;

    Ok(OpoFit {
        pump_ratio: params[0],
        intracavity_loss: params[1],
        efficiencies: problem
            .groups
            .iter()
            .cloned()
            .zip(params[2..].iter().copied())
            .collect(),
        residual,
        rms_residual_db: (residual / equations as f64).sqrt(),
        equations,
        unknowns,
        condition_number,
        identifiable,
        evaluations: refined.evaluations + pumps.len() * losses.len() * etas.len() * n_groups,
    })
}

/// Condition number of the residual Jacobian in scaled coordinates, by
/// central differences. Infinite when the system has fewer rows than columns.
fn jacobian_condition(problem: &Problem<'_>, params: &[f64], scales: &[f64]) -> f64 {
    let m = problem.residuals(params[0], params[1], &params[2..]).len();
    let n = params.len();
    if m < n {
        return f64::INFINITY;
    }
    let mut jac = DMatrix::<f64>::zeros(m, n);
    for j in 0..n {
        let h = 1e-6 * scales[j];
        let mut up = params.to_vec();
        let mut down = params.to_vec();
        up[j] += h;
        down[j] -= h;
        let ru = problem.residuals(up[0], up[1], &up[2..]);
        let rd = problem.residuals(down[0], down[1], &down[2..]);
        for i in 0..m {
            jac[(i, j)] = (ru[i] - rd[i]) / (2.0 * h) * scales[j];
        }
    }
    let sv = jac.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}
