//! Quantum noise of Sagnac (speed-meter) and Michelson (position-meter)
//! interferometers with arm cavities, in the two-photon formalism.
//!
//! The interferometer maps input quadratures `(a1, a2)` to output quadratures
//! `b1 = a1`, `b2 = a2 − 𝒦(Ω)·a1 + signal`. A balanced homodyne detector reads
//! `b2·cos φ + b1·sin φ`, so the amplitude-quadrature (back-action) term
//! vanishes whenever `tan φ = 𝒦(Ω)`. For the Sagnac 𝒦 is flat below the arm
//! half-bandwidth, so a single fixed angle cancels back-action across the
//! whole band. For the Michelson 𝒦 diverges as Ω⁻², which no fixed angle can
//! follow.
//!
//! Strain noise is expressed relative to the free-mass standard quantum limit
//! `h_SQL² = 8ħ / (m Ω² L²)`:
//!
//! ```text
//! S_h = h_SQL² · [η_post·vᵀ V_in v + (1 − η_post)] / (2𝒦 cos²φ · η_post)
//! v   = (sin φ − 𝒦 cos φ, cos φ)
//! ```

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::constants::{HBAR, SPEED_OF_LIGHT};
use crate::error::{invalid, require_finite, Error, Result};
use crate::quadrature::{
    apply_loss, check_efficiency, squeeze_parameter_from_db, squeezed_covariance,
    CovarianceMatrix2, FrequencyGrid,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Sagnac,
    Michelson,
}

/// How the quoted arm-cavity linewidth maps to the half-bandwidth γ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinewidthConvention {
    /// Linewidth is the full width at half maximum: γ = π·linewidth.
    #[default]
    Fwhm,
    /// Linewidth is the half width: γ = 2π·linewidth.
    HalfWidth,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IfoParams {
    pub topology: Topology,
    /// Test-mass mass in kg.
    pub mass: f64,
    /// Arm length in m.
    pub arm_length: f64,
    /// Power circulating in each arm cavity, W.
    pub circ_power: f64,
    /// Arm cavity linewidth in Hz, interpreted per `linewidth_convention`.
    pub linewidth: f64,
    pub linewidth_convention: LinewidthConvention,
    /// Carrier wavelength in m.
    pub wavelength: f64,
    /// Dimensionless factor on the coupling normalization.
    pub kappa_calibration: f64,
    /// Pins 𝒦(Ω→0) directly (Sagnac only).
    pub kappa_dc_override: Option<f64>,
}

impl IfoParams {
    /// 10 km Sagnac with 40 kg mirrors, 80 Hz arm linewidth and 10 kW per arm,
    /// with 𝒦(0) pinned to tan(13.7°).
    pub fn paper_sagnac() -> Self {
        Self {
            topology: Topology::Sagnac,
            mass: 40.0,
            arm_length: 10e3,
            circ_power: 10e3,
            linewidth: 80.0,
            linewidth_convention: LinewidthConvention::Fwhm,
            wavelength: 1064e-9,
            kappa_calibration: 2.0,
            kappa_dc_override: Some(13.7f64.to_radians().tan()),
        }
    }

    /// Same mirrors, arms and power as [`Self::paper_sagnac`] in a Michelson.
    pub fn paper_michelson() -> Self {
        Self {
            topology: Topology::Michelson,
            kappa_calibration: 1.0,
            kappa_dc_override: None,
            ..Self::paper_sagnac()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mass", self.mass),
            ("arm_length", self.arm_length),
            ("circ_power", self.circ_power),
            ("linewidth", self.linewidth),
            ("wavelength", self.wavelength),
            ("kappa_calibration", self.kappa_calibration),
        ] {
            let v = require_finite(name, v)?;
            if v <= 0.0 {
                return Err(invalid(name, format!("must be > 0, got {v}")));
            }
        }
        if let Some(k) = self.kappa_dc_override {
            if self.topology == Topology::Michelson {
                return Err(invalid(
                    "kappa_dc_override",
                    "only defined for the Sagnac topology (Michelson coupling diverges at DC)",
                ));
            }
            let k = require_finite("kappa_dc_override", k)?;
            if k <= 0.0 {
                return Err(invalid(
                    "kappa_dc_override",
                    format!("must be > 0, got {k}"),
                ));
            }
        }
        Ok(())
    }

    /// Arm half-bandwidth γ in rad/s.
    pub fn half_bandwidth(&self) -> f64 {
        match self.linewidth_convention {
            LinewidthConvention::Fwhm => PI * self.linewidth,
            LinewidthConvention::HalfWidth => 2.0 * PI * self.linewidth,
        }
    }

    pub fn carrier_angular_frequency(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.wavelength
    }
}

/// Squeezed-light injection and homodyne readout settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InjectionParams {
    /// Squeezing of the pure state leaving the source, dB ≥ 0.
    pub squeeze_db: f64,
    /// Angle of the squeezed axis from the amplitude quadrature, rad.
    pub squeeze_angle: f64,
    /// Efficiency from the source to the interferometer dark port.
    pub eta_pre: f64,
    /// Efficiency from the interferometer to the photocurrent.
    pub eta_post: f64,
    /// Homodyne angle from the signal quadrature, rad.
    pub readout_angle: f64,
}

impl InjectionParams {
    /// Unsqueezed vacuum entering the dark port, lossless readout.
    pub fn vacuum(readout_angle: f64) -> Self {
        Self {
            squeeze_db: 0.0,
            squeeze_angle: PHASE_QUADRATURE,
            eta_pre: 1.0,
            eta_post: 1.0,
            readout_angle,
        }
    }

    pub fn validate(&self) -> Result<()> {
        squeeze_parameter_from_db(self.squeeze_db)?;
        require_finite("squeeze_angle", self.squeeze_angle)?;
        require_finite("readout_angle", self.readout_angle)?;
        check_efficiency("eta_pre", self.eta_pre)?;
        check_efficiency("eta_post", self.eta_post)?;
        Ok(())
    }

    /// Covariance of the state arriving at the interferometer dark port.
    pub fn input_covariance(&self) -> Result<CovarianceMatrix2> {
        let r = squeeze_parameter_from_db(self.squeeze_db)?;
        apply_loss(&squeezed_covariance(r, self.squeeze_angle)?, self.eta_pre)
    }
}

/// Squeeze angle that puts the squeezed axis on the phase quadrature `a2`.
pub const PHASE_QUADRATURE: f64 = PI / 2.0;

/// Amplitude spectral densities on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpectrum {
    pub grid: FrequencyGrid,
    /// Displacement noise, m/√Hz.
    pub sqrt_sx: Vec<f64>,
    /// Strain noise, 1/√Hz.
    pub sqrt_sh: Vec<f64>,
    /// Standard quantum limit in strain, 1/√Hz.
    pub sqrt_s_sql: Vec<f64>,
}

impl NoiseSpectrum {
    pub fn frequencies(&self) -> &[f64] {
        self.grid.frequencies()
    }

    /// `10·log10(S_h / S_SQL)` per grid point.
    pub fn ratio_to_sql_db(&self) -> Vec<f64> {
        self.sqrt_sh
            .iter()
            .zip(&self.sqrt_s_sql)
            .map(|(h, q)| 20.0 * (h / q).log10())
            .collect()
    }
}

/// Optical intensity parameter `J = calibration · 4ω₀P/(m c L)`, s⁻³.
///
/// This is the calibrated value from the physical parameters; it ignores
/// `kappa_dc_override`.
pub fn normalized_intensity(p: &IfoParams) -> Result<f64> {
    p.validate()?;
    Ok(raw_intensity(p))
}

fn raw_intensity(p: &IfoParams) -> f64 {
    p.kappa_calibration * 4.0 * p.carrier_angular_frequency() * p.circ_power
        / (p.mass * SPEED_OF_LIGHT * p.arm_length)
}

/// J after applying a DC override of 𝒦, if any.
fn effective_intensity(p: &IfoParams) -> f64 {
    match (p.topology, p.kappa_dc_override) {
        (Topology::Sagnac, Some(k0)) => k0 * p.half_bandwidth().powi(3) / 4.0,
        _ => raw_intensity(p),
    }
}

fn coupling_unchecked(omega: f64, p: &IfoParams) -> f64 {
    let g = p.half_bandwidth();
    let j = effective_intensity(p);
    let w2 = omega * omega;
    match p.topology {
        Topology::Sagnac => 4.0 * j * g / (g * g + w2).powi(2),
        Topology::Michelson => 2.0 * j * g / (w2 * (g * g + w2)),
    }
}

/// Radiation-pressure coupling constant 𝒦(Ω).
pub fn coupling_constant(omega: f64, p: &IfoParams) -> Result<f64> {
    p.validate()?;
    let omega = require_finite("omega", omega)?;
    if omega < 0.0 {
        return Err(invalid("omega", format!("must be >= 0, got {omega}")));
    }
    if omega == 0.0 && p.topology == Topology::Michelson {
        return Err(invalid(
            "omega",
            "Michelson coupling diverges at zero frequency",
        ));
    }
    Ok(coupling_unchecked(omega, p))
}

fn h_sql_unchecked(omega: f64, p: &IfoParams) -> f64 {
    (8.0 * HBAR / (p.mass * omega * omega * p.arm_length * p.arm_length)).sqrt()
}

/// Free-mass standard quantum limit in strain, 1/√Hz.
pub fn h_sql(omega: f64, p: &IfoParams) -> Result<f64> {
    p.validate()?;
    let omega = require_finite("omega", omega)?;
    if omega <= 0.0 {
        return Err(invalid("omega", format!("must be > 0, got {omega}")));
    }
    Ok(h_sql_unchecked(omega, p))
}

/// Weights `(c1, c2)` of the input amplitude and phase quadratures in the
/// homodyne photocurrent at readout angle `phi`.
pub fn noise_vector(phi: f64, coupling: f64) -> (f64, f64) {
    let (s, c) = phi.sin_cos();
    (s - coupling * c, c)
}

struct Evaluator {
    params: IfoParams,
    v_in: CovarianceMatrix2,
    phi: f64,
    cos_phi: f64,
    eta_post: f64,
}

impl Evaluator {
    fn new(p: &IfoParams, inj: &InjectionParams) -> Result<Self> {
        p.validate()?;
        inj.validate()?;
        let cos_phi = inj.readout_angle.cos();
        if cos_phi.abs() < 1e-12 {
            return Err(Error::ZeroSignalTransfer);
        }
        Ok(Self {
            params: *p,
            v_in: inj.input_covariance()?,
            phi: inj.readout_angle,
            cos_phi,
            eta_post: inj.eta_post,
        })
    }

    /// Returns `(S_h, h_SQL²)` at angular frequency `omega`.
    fn strain_psd(&self, omega: f64) -> (f64, f64) {
        let k = coupling_unchecked(omega, &self.params);
        let (c1, c2) = noise_vector(self.phi, k);
        let noise = self.v_in.quadratic_form(c1, c2);
        let detected = self.eta_post * noise + (1.0 - self.eta_post);
        let sql2 = h_sql_unchecked(omega, &self.params).powi(2);
        let transfer = 2.0 * k * self.cos_phi * self.cos_phi * self.eta_post;
        (sql2 * detected / transfer, sql2)
    }
}

/// Strain noise power spectral density `S_h` (1/Hz) at `frequency` (Hz).
pub fn strain_psd(frequency: f64, p: &IfoParams, inj: &InjectionParams) -> Result<f64> {
    let f = require_finite("frequency", frequency)?;
    if f <= 0.0 {
        return Err(invalid("frequency", format!("must be > 0, got {f}")));
    }
    Ok(Evaluator::new(p, inj)?.strain_psd(2.0 * PI * f).0)
}

/// Total quantum noise on every grid frequency.
pub fn quantum_noise_spectrum(
    p: &IfoParams,
    inj: &InjectionParams,
    grid: &FrequencyGrid,
) -> Result<NoiseSpectrum> {
    let eval = Evaluator::new(p, inj)?;
    let points: Vec<(f64, f64)> = grid
        .frequencies()
        .par_iter()
        .map(|&f| eval.strain_psd(2.0 * PI * f))
        .collect();
    let sqrt_sh: Vec<f64> = points.iter().map(|(sh, _)| sh.sqrt()).collect();
    let sqrt_sx = sqrt_sh.iter().map(|h| h * p.arm_length).collect();
    let sqrt_s_sql = points.iter().map(|(_, q)| q.sqrt()).collect();
    Ok(NoiseSpectrum {
        grid: grid.clone(),
        sqrt_sx,
        sqrt_sh,
        sqrt_s_sql,
    })
}

/// Homodyne angle `arctan 𝒦(0)` that cancels back-action below the arm
/// bandwidth. Only the Sagnac has a finite DC coupling.
pub fn optimal_readout_angle(p: &IfoParams) -> Result<f64> {
    p.validate()?;
    match p.topology {
        Topology::Sagnac => Ok(coupling_unchecked(0.0, p).atan()),
        Topology::Michelson => Err(Error::Unsupported(
            "Michelson coupling diverges at low frequency; no fixed readout angle cancels \
             back-action (frequency-dependent readout needs filter cavities)"
                .into(),
        )),
    }
}

/// Maximal runs of grid points where the noise is below the SQL, as
/// `(first, last)` frequency pairs.
pub fn sql_beating_band(spectrum: &NoiseSpectrum) -> Vec<(f64, f64)> {
    let f = spectrum.frequencies();
    let mut bands = Vec::new();
    let mut start: Option<usize> = None;
    for (i, (h, q)) in spectrum
        .sqrt_sh
        .iter()
        .zip(&spectrum.sqrt_s_sql)
        .enumerate()
    {
        match (h < q, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                bands.push((f[s], f[i - 1]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        bands.push((f[s], f[f.len() - 1]));
    }
    bands
}

/// One spectrum per homodyne angle; `inj.readout_angle` is replaced by each entry.
pub fn angle_sweep(
    p: &IfoParams,
    inj: &InjectionParams,
    grid: &FrequencyGrid,
    angles: &[f64],
) -> Result<Vec<NoiseSpectrum>> {
    angles
        .par_iter()
        .map(|&phi| {
            let inj = InjectionParams {
                readout_angle: phi,
                ..*inj
            };
            quantum_noise_spectrum(p, &inj, grid)
        })
        .collect()
}
