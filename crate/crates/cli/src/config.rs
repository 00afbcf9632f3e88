//! Run configuration: strict JSON schema and its validation into model types.
//!
//! Angles are given in degrees in the file and converted to radians here.
//! Unknown keys anywhere in the document are rejected.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use qnoise::ifo::{IfoParams, InjectionParams, LinewidthConvention, Topology};
use qnoise::opo::{CavityGeometry, OpoParams, SqueezingObservation};
use qnoise::quadrature::{EfficiencyChain, FrequencyGrid, LossElement};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Squeezed/antisqueezed spectrum of the squeezed-light source
    OpoCurve,
    /// Fit source parameters to measured squeezing levels
    OpoFit,
    /// Interferometer quantum-noise spectrum with SQL reference
    IfoSpectrum,
    /// Quantum-noise spectra for several homodyne angles
    AngleSweep,
    /// Compose a list of optical losses
    LossBudget,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::OpoCurve => "opo-curve",
            Mode::OpoFit => "opo-fit",
            Mode::IfoSpectrum => "ifo-spectrum",
            Mode::AngleSweep => "angle-sweep",
            Mode::LossBudget => "loss-budget",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub mode: Option<Mode>,
    pub output: Option<PathBuf>,
    pub grid: Option<RawGrid>,
    pub opo: Option<RawOpo>,
    pub ifo: Option<RawIfo>,
    pub injection: Option<RawInjection>,
    pub observations: Option<Vec<RawObservation>>,
    pub losses: Option<Vec<RawLoss>>,
    pub sweep: Option<RawSweep>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGrid {
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOpo {
    pub output_coupler: f64,
    pub refractive_index: f64,
    pub round_trip_length_m: f64,
    pub intracavity_loss: Option<f64>,
    pub pump_ratio: Option<f64>,
    pub eta_total: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RawTopology {
    Sagnac,
    Michelson,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RawLinewidth {
    Fwhm,
    HalfWidth,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawIfo {
    pub topology: RawTopology,
    pub mass_kg: f64,
    pub arm_length_m: f64,
    pub circ_power_w: f64,
    pub linewidth_hz: f64,
    pub linewidth_convention: Option<RawLinewidth>,
    pub wavelength_m: f64,
    pub kappa_calibration: Option<f64>,
    pub kappa_dc_override: Option<f64>,
    /// Sets the DC coupling to tan(angle), the value cancelled by that readout angle.
    pub kappa_dc_from_angle_deg: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RawAngle {
    Degrees(f64),
    Named(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawInjection {
    pub squeeze_db: f64,
    pub squeeze_angle_deg: Option<f64>,
    pub readout_angle_deg: RawAngle,
    pub eta_pre: Option<f64>,
    pub eta_post: Option<f64>,
    pub injection_losses: Option<Vec<RawLoss>>,
    pub detection_losses: Option<Vec<RawLoss>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawObservation {
    pub frequency_hz: f64,
    pub squeeze_db: f64,
    pub antisqueeze_db: Option<f64>,
    pub group: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawLoss {
    pub name: String,
    pub loss: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    pub angles_deg: Vec<f64>,
}

/// Injection and readout settings with the loss chains they were built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Injection {
    pub params: InjectionParams,
    pub injection_chain: EfficiencyChain,
    pub detection_chain: EfficiencyChain,
}

/// What a run does, with every input validated.
#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    OpoCurve {
        opo: OpoParams,
        grid: FrequencyGrid,
    },
    OpoFit {
        cavity: CavityGeometry,
        observations: Vec<SqueezingObservation>,
        grid: FrequencyGrid,
    },
    IfoSpectrum {
        ifo: IfoParams,
        injection: Injection,
        grid: FrequencyGrid,
    },
    AngleSweep {
        ifo: IfoParams,
        injection: Injection,
        grid: FrequencyGrid,
        angles: Vec<f64>,
    },
    LossBudget {
        chain: EfficiencyChain,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub output: PathBuf,
    pub job: Job,
}

/// Curves drawn for a fit when the config has no grid.
const DEFAULT_FIT_GRID: (f64, f64, usize) = (1e6, 1e9, 301);

/// Reads and validates a config file. `mode` comes from the command line
/// and must agree with the file's `mode` key when both are present.
pub fn load_config(path: &Path, mode: Option<Mode>) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::ConfigIo {
        path: path.to_owned(),
        source,
    })?;
    let raw: RawConfig = serde_json::from_str(&text).map_err(|source| CliError::ConfigParse {
        path: path.to_owned(),
        source,
    })?;
    let default_output = PathBuf::from(path.file_stem().unwrap_or_default());
    resolve(raw, mode, default_output)
}

pub fn resolve(
    raw: RawConfig,
    mode: Option<Mode>,
    default_output: PathBuf,
) -> Result<RunConfig, CliError> {
    let mode = match (mode, raw.mode) {
        (Some(cli), Some(file)) if cli != file => {
            return Err(CliError::Usage(format!(
                "command-line mode `{cli}` does not match config mode `{file}`"
            )))
        }
        (Some(m), _) | (None, Some(m)) => m,
        (None, None) => {
            return Err(CliError::Usage(
                "no mode given on the command line or in the config".into(),
            ))
        }
    };
    let output = raw.output.clone().unwrap_or(default_output);

    let job = match mode {
        Mode::OpoCurve => {
            let opo = require(raw.opo.as_ref(), "opo", mode)?;
            Job::OpoCurve {
                opo: opo_params(opo)?,
                grid: grid(require(raw.grid.as_ref(), "grid", mode)?)?,
            }
        }
        Mode::OpoFit => {
            let opo = require(raw.opo.as_ref(), "opo", mode)?;
            let cavity = cavity(opo);
            cavity.validate()?;
            let observations = require(raw.observations.as_ref(), "observations", mode)?
                .iter()
                .map(|o| SqueezingObservation {
                    frequency: o.frequency_hz,
                    squeeze_db: o.squeeze_db,
                    antisqueeze_db: o.antisqueeze_db,
                    group: o.group.clone(),
                })
                .collect::<Vec<_>>();
            for o in &observations {
                o.validate()?;
            }
            let grid = match &raw.grid {
                Some(g) => grid(g)?,
                None => {
                    let (lo, hi, n) = DEFAULT_FIT_GRID;
                    FrequencyGrid::log(lo, hi, n)?
                }
            };
            Job::OpoFit {
                cavity,
                observations,
                grid,
            }
        }
        Mode::IfoSpectrum => {
            let ifo = ifo_params(require(raw.ifo.as_ref(), "ifo", mode)?)?;
            Job::IfoSpectrum {
                injection: injection(require(raw.injection.as_ref(), "injection", mode)?, &ifo)?,
                grid: grid(require(raw.grid.as_ref(), "grid", mode)?)?,
                ifo,
            }
        }
        Mode::AngleSweep => {
            let sweep = require(raw.sweep.as_ref(), "sweep", mode)?;
            if sweep.angles_deg.is_empty() {
                return Err(CliError::Schema(
                    "`sweep.angles_deg` must list at least one angle".into(),
                ));
            }
            let angles = sweep
                .angles_deg
                .iter()
                .map(|a| finite_angle("sweep.angles_deg", *a))
                .collect::<Result<_, _>>()?;
            let ifo = ifo_params(require(raw.ifo.as_ref(), "ifo", mode)?)?;
            Job::AngleSweep {
                injection: injection(require(raw.injection.as_ref(), "injection", mode)?, &ifo)?,
                grid: grid(require(raw.grid.as_ref(), "grid", mode)?)?,
                ifo,
                angles,
            }
        }
        Mode::LossBudget => Job::LossBudget {
            chain: chain(require(raw.losses.as_ref(), "losses", mode)?)?,
        },
    };
    Ok(RunConfig { mode, output, job })
}

fn require<'a, T>(block: Option<&'a T>, name: &str, mode: Mode) -> Result<&'a T, CliError> {
    block.ok_or_else(|| CliError::Schema(format!("mode `{mode}` requires the `{name}` block")))
}

fn finite_angle(key: &str, deg: f64) -> Result<f64, CliError> {
    if deg.is_finite() {
        Ok(deg.to_radians())
    } else {
        Err(CliError::Schema(format!(
            "`{key}` must be a finite number of degrees"
        )))
    }
}

fn grid(g: &RawGrid) -> Result<FrequencyGrid, CliError> {
    Ok(FrequencyGrid::log(g.f_min_hz, g.f_max_hz, g.points)?)
}

fn cavity(o: &RawOpo) -> CavityGeometry {
    CavityGeometry {
        output_coupler: o.output_coupler,
        refractive_index: o.refractive_index,
        round_trip_length: o.round_trip_length_m,
    }
}

fn opo_params(o: &RawOpo) -> Result<OpoParams, CliError> {
    let field = |v: Option<f64>, key: &str| {
        v.ok_or_else(|| CliError::Schema(format!("mode `opo-curve` requires `opo.{key}`")))
    };
    let p = OpoParams {
        cavity: cavity(o),
        intracavity_loss: field(o.intracavity_loss, "intracavity_loss")?,
        pump_ratio: field(o.pump_ratio, "pump_ratio")?,
        eta_total: field(o.eta_total, "eta_total")?,
    };
    p.validate()?;
    Ok(p)
}

fn ifo_params(i: &RawIfo) -> Result<IfoParams, CliError> {
    let topology = match i.topology {
        RawTopology::Sagnac => Topology::Sagnac,
        RawTopology::Michelson => Topology::Michelson,
    };
    let kappa_dc_override =
        match (i.kappa_dc_override, i.kappa_dc_from_angle_deg) {
            (Some(_), Some(_)) => return Err(CliError::Schema(
                "`ifo.kappa_dc_override` and `ifo.kappa_dc_from_angle_deg` are mutually exclusive"
                    .into(),
            )),
            (Some(k), None) => Some(k),
            (None, Some(deg)) => Some(finite_angle("ifo.kappa_dc_from_angle_deg", deg)?.tan()),
            (None, None) => None,
        };
    let p = IfoParams {
        topology,
        mass: i.mass_kg,
        arm_length: i.arm_length_m,
        circ_power: i.circ_power_w,
        linewidth: i.linewidth_hz,
        linewidth_convention: match i.linewidth_convention {
            None | Some(RawLinewidth::Fwhm) => LinewidthConvention::Fwhm,
            Some(RawLinewidth::HalfWidth) => LinewidthConvention::HalfWidth,
        },
        wavelength: i.wavelength_m,
        kappa_calibration: i.kappa_calibration.unwrap_or(match topology {
            Topology::Sagnac => 2.0,
            Topology::Michelson => 1.0,
        }),
        kappa_dc_override,
    };
    p.validate()?;
    Ok(p)
}

fn chain(losses: &[RawLoss]) -> Result<EfficiencyChain, CliError> {
    Ok(EfficiencyChain::new(
        losses
            .iter()
            .map(|l| LossElement::new(l.name.clone(), l.loss))
            .collect::<Result<_, _>>()?,
    ))
}

fn efficiency(
    direct: Option<f64>,
    losses: Option<&Vec<RawLoss>>,
    what: &str,
) -> Result<(f64, EfficiencyChain), CliError> {
    match (direct, losses) {
        (Some(_), Some(_)) => Err(CliError::Schema(format!(
            "`injection.eta_{what}` and `injection.{}_losses` are mutually exclusive",
            if what == "pre" {
                "injection"
            } else {
                "detection"
            }
        ))),
        (Some(eta), None) => Ok((eta, EfficiencyChain::default())),
        (None, Some(list)) => {
            let c = chain(list)?;
            Ok((c.efficiency(), c))
        }
        (None, None) => Ok((1.0, EfficiencyChain::default())),
    }
}

/// Readout angle marker resolved to `arctan 𝒦(0)` of the configured interferometer.
pub const OPTIMAL_ANGLE: &str = "optimal";

fn injection(i: &RawInjection, ifo: &IfoParams) -> Result<Injection, CliError> {
    let (eta_pre, injection_chain) = efficiency(i.eta_pre, i.injection_losses.as_ref(), "pre")?;
    let (eta_post, detection_chain) = efficiency(i.eta_post, i.detection_losses.as_ref(), "post")?;
    let readout_angle = match &i.readout_angle_deg {
        RawAngle::Degrees(d) => finite_angle("injection.readout_angle_deg", *d)?,
        RawAngle::Named(s) if s == OPTIMAL_ANGLE => qnoise::ifo::optimal_readout_angle(ifo)?,
        RawAngle::Named(s) => {
            return Err(CliError::Schema(format!(
                "`injection.readout_angle_deg` must be a number or \"{OPTIMAL_ANGLE}\", got \"{s}\""
            )))
        }
    };
    let params = InjectionParams {
        squeeze_db: i.squeeze_db,
        squeeze_angle: finite_angle(
            "injection.squeeze_angle_deg",
            i.squeeze_angle_deg.unwrap_or(90.0),
        )?,
        eta_pre,
        eta_post,
        readout_angle,
    };
    params.validate()?;
    if params.readout_angle.cos().abs() < 1e-12 {
        return Err(qnoise::Error::ZeroSignalTransfer.into());
    }
    Ok(Injection {
        params,
        injection_chain,
        detection_chain,
    })
}
