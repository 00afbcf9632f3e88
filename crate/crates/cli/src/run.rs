//! Executes a validated [`RunConfig`] and writes its CSV and SVG outputs.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use qnoise::ifo::{angle_sweep, quantum_noise_spectrum, NoiseSpectrum};
use qnoise::opo::{fit_opo_params, opo_variances, OpoFit};
use qnoise::quadrature::{variance_to_db, EfficiencyChain};

use crate::config::{Job, RunConfig};
use crate::error::CliError;
use crate::plot::{Plot, Scale, Series, Style};
use crate::table::{Cell, Table};

pub const SPECTRUM_COLUMNS: [&str; 5] = [
    "frequency_hz",
    "sqrt_Sx_m_per_rtHz",
    "sqrt_Sh_per_rtHz",
    "sqrt_Ssql_per_rtHz",
    "ratio_to_sql_db",
];
pub const SWEEP_COLUMNS: [&str; 6] = [
    "readout_angle_deg",
    "frequency_hz",
    "sqrt_Sx_m_per_rtHz",
    "sqrt_Sh_per_rtHz",
    "sqrt_Ssql_per_rtHz",
    "ratio_to_sql_db",
];
pub const OPO_COLUMNS: [&str; 3] = ["frequency_hz", "squeezed_db", "antisqueezed_db"];
pub const FIT_COLUMNS: [&str; 2] = ["quantity", "value"];
pub const LOSS_COLUMNS: [&str; 4] = ["element", "loss", "efficiency", "cumulative_efficiency"];

const SQL_COLOR: &str = "#555555";

/// In-memory products of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub csv: String,
    pub svg: String,
}

/// Computes the CSV table and plot for a config without touching the disk.
pub fn render(config: &RunConfig) -> Result<Artifacts, CliError> {
    let (table, plot) = match &config.job {
        Job::OpoCurve { opo, grid } => {
            let mut t = Table::new(&OPO_COLUMNS);
            let (mut sq, mut anti) = (Vec::new(), Vec::new());
            for &f in grid.frequencies() {
                let v = opo_variances(f, opo)?;
                let (s, a) = (variance_to_db(v.squeezed)?, variance_to_db(v.antisqueezed)?);
                t.push(vec![f.into(), s.into(), a.into()]);
                sq.push((f, s));
                anti.push((f, a));
            }
            let plot = Plot {
                title: "Squeezed-light source spectrum".into(),
                x_label: "Frequency [Hz]".into(),
                y_label: "Noise relative to vacuum [dB]".into(),
                x_scale: Scale::Log,
                y_scale: Scale::Linear,
                series: vec![
                    Series::line("squeezed", sq),
                    Series::line("antisqueezed", anti),
                ],
            };
            (t, plot)
        }
        Job::OpoFit {
            cavity,
            observations,
            grid,
        } => {
            let fit = fit_opo_params(observations, cavity)?;
            let mut series = Vec::new();
            for (group, _) in &fit.efficiencies {
                let p = fit.params_for(*cavity, group).expect("group from fit");
                let (mut sq, mut anti) = (Vec::new(), Vec::new());
                for &f in grid.frequencies() {
                    let v = opo_variances(f, &p)?;
                    sq.push((f, variance_to_db(v.squeezed)?));
                    anti.push((f, variance_to_db(v.antisqueezed)?));
                }
                series.push(Series::line(format!("{group} squeezed"), sq));
                series.push(Series::line(format!("{group} antisqueezed"), anti));
            }
            let measured: Vec<(f64, f64)> = observations
                .iter()
                .flat_map(|o| {
                    std::iter::once((o.frequency, -o.squeeze_db))
                        .chain(o.antisqueeze_db.map(|a| (o.frequency, a)))
                })
                .collect();
            series.push(
                Series::line("measured", measured)
                    .with_style(Style::Markers)
                    .with_color("#000000"),
            );
            let plot = Plot {
                title: "Squeezed-light source fit".into(),
                x_label: "Frequency [Hz]".into(),
                y_label: "Noise relative to vacuum [dB]".into(),
                x_scale: Scale::Log,
                y_scale: Scale::Linear,
                series,
            };
            (fit_table(&fit), plot)
        }
        Job::IfoSpectrum {
            ifo,
            injection,
            grid,
        } => {
            let s = quantum_noise_spectrum(ifo, &injection.params, grid)?;
            let mut t = Table::new(&SPECTRUM_COLUMNS);
            push_spectrum(&mut t, None, &s);
            let plot = strain_plot(
                "Quantum noise",
                vec![Series::line("quantum noise", pairs(&s, &s.sqrt_sh))],
                &s,
            );
            (t, plot)
        }
        Job::AngleSweep {
            ifo,
            injection,
            grid,
            angles,
        } => {
            let spectra = angle_sweep(ifo, &injection.params, grid, angles)?;
            let mut t = Table::new(&SWEEP_COLUMNS);
            let mut series = Vec::new();
            for (phi, s) in angles.iter().zip(&spectra) {
                push_spectrum(&mut t, Some(phi.to_degrees()), s);
                series.push(Series::line(
                    format!("phi = {:.2} deg", phi.to_degrees()),
                    pairs(s, &s.sqrt_sh),
                ));
            }
            let plot = strain_plot("Quantum noise versus readout angle", series, &spectra[0]);
            (t, plot)
        }
        Job::LossBudget { chain } => loss_budget(chain),
    };
    Ok(Artifacts {
        csv: table.to_csv(),
        svg: plot.to_svg(),
    })
}

fn pairs(s: &NoiseSpectrum, values: &[f64]) -> Vec<(f64, f64)> {
    s.frequencies()
        .iter()
        .copied()
        .zip(values.iter().copied())
        .collect()
}

fn push_spectrum(t: &mut Table, angle_deg: Option<f64>, s: &NoiseSpectrum) {
    let ratio = s.ratio_to_sql_db();
    for (i, r) in ratio.into_iter().enumerate() {
        let mut row: Vec<Cell> = angle_deg.map(Cell::from).into_iter().collect();
        row.extend([
            s.frequencies()[i].into(),
            s.sqrt_sx[i].into(),
            s.sqrt_sh[i].into(),
            s.sqrt_s_sql[i].into(),
            r.into(),
        ]);
        t.push(row);
    }
}

fn strain_plot(title: &str, mut series: Vec<Series>, reference: &NoiseSpectrum) -> Plot {
    series.push(
        Series::line("SQL", pairs(reference, &reference.sqrt_s_sql))
            .with_style(Style::Dashed)
            .with_color(SQL_COLOR),
    );
    Plot {
        title: title.into(),
        x_label: "Frequency [Hz]".into(),
        y_label: "Strain noise [1/sqrt(Hz)]".into(),
        x_scale: Scale::Log,
        y_scale: Scale::Log,
        series,
    }
}

fn fit_table(fit: &OpoFit) -> Table {
    let mut t = Table::new(&FIT_COLUMNS);
    t.push(vec!["pump_ratio".into(), fit.pump_ratio.into()]);
    t.push(vec!["intracavity_loss".into(), fit.intracavity_loss.into()]);
    for (group, eta) in &fit.efficiencies {
        t.push(vec![format!("eta_total[{group}]").into(), (*eta).into()]);
    }
    t.push(vec!["residual_db2".into(), fit.residual.into()]);
    t.push(vec!["rms_residual_db".into(), fit.rms_residual_db.into()]);
    t.push(vec!["equations".into(), (fit.equations as f64).into()]);
    t.push(vec!["unknowns".into(), (fit.unknowns as f64).into()]);
    t.push(vec!["condition_number".into(), fit.condition_number.into()]);
    t.push(vec![
        "identifiable".into(),
        (if fit.identifiable { 1.0 } else { 0.0 }).into(),
    ]);
    t
}

fn loss_budget(chain: &EfficiencyChain) -> (Table, Plot) {
    let mut t = Table::new(&LOSS_COLUMNS);
    let mut cumulative = 1.0;
    let mut points = vec![(0.0, 1.0)];
    for (i, e) in chain.elements().iter().enumerate() {
        cumulative *= e.efficiency();
        t.push(vec![
            e.name().into(),
            e.loss().into(),
            e.efficiency().into(),
            cumulative.into(),
        ]);
        points.push(((i + 1) as f64, cumulative));
    }
    let total = chain.efficiency();
    t.push(vec![
        "total".into(),
        (1.0 - total).into(),
        total.into(),
        total.into(),
    ]);
    let sum = chain.linear_loss_sum();
    t.push(vec![
        "linear_sum".into(),
        sum.into(),
        (1.0 - sum).into(),
        (1.0 - sum).into(),
    ]);
    let plot = Plot {
        title: "Cumulative efficiency".into(),
        x_label: "Elements traversed".into(),
        y_label: "Efficiency".into(),
        x_scale: Scale::Linear,
        y_scale: Scale::Linear,
        series: vec![
            Series::line("cumulative efficiency", points.clone()),
            Series::line("elements", points).with_style(Style::Markers),
        ],
    };
    (t, plot)
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let err = |source| CliError::Output {
        path: path.to_owned(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(bytes).map_err(err)?;
    tmp.as_file().sync_all().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Runs the job and writes `<prefix>.csv`, plus `<prefix>.svg` when `svg` is set.
/// Returns the paths written.
pub fn run(config: &RunConfig, svg: bool) -> Result<Vec<PathBuf>, CliError> {
    let out = render(config)?;
    let csv_path = with_extension(&config.output, "csv");
    write_atomic(&csv_path, out.csv.as_bytes())?;
    let mut written = vec![csv_path];
    if svg {
        let svg_path = with_extension(&config.output, "svg");
        write_atomic(&svg_path, out.svg.as_bytes())?;
        written.push(svg_path);
    }
    Ok(written)
}
