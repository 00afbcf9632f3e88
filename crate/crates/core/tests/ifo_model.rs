use std::f64::consts::PI;

use qnoise::ifo::{
    angle_sweep, coupling_constant, h_sql, noise_vector, optimal_readout_angle,
    quantum_noise_spectrum, sql_beating_band, strain_psd, IfoParams, InjectionParams,
    PHASE_QUADRATURE,
};
use qnoise::quadrature::FrequencyGrid;

fn fig4_injection(p: &IfoParams) -> InjectionParams {
    InjectionParams {
        squeeze_db: 12.4,
        squeeze_angle: PHASE_QUADRATURE,
        eta_pre: 0.97 * 0.99 * 0.98,
        eta_post: 0.98 * 0.99,
        readout_angle: optimal_readout_angle(p).unwrap(),
    }
}

/// Vacuum-input strain PSD straight from the readout algebra:
/// S_h = h_SQL² [(tan φ − 𝒦)² + 1] / (2𝒦).
fn vacuum_closed_form(omega: f64, p: &IfoParams, phi: f64) -> f64 {
    let k = coupling_constant(omega, p).unwrap();
    h_sql(omega, p).unwrap().powi(2) * ((phi.tan() - k).powi(2) + 1.0) / (2.0 * k)
}

#[test]
fn vacuum_spectrum_matches_closed_form() {
    let p = IfoParams::paper_sagnac();
    let grid = FrequencyGrid::log(0.1, 1e4, 500).unwrap();
    for phi_deg in [0.0f64, 5.0, 13.7, 40.0] {
        let phi = phi_deg.to_radians();
        let s = quantum_noise_spectrum(&p, &InjectionParams::vacuum(phi), &grid).unwrap();
        for (f, h) in grid.frequencies().iter().zip(&s.sqrt_sh) {
            let want = vacuum_closed_form(2.0 * PI * f, &p, phi);
            assert!((h * h / want - 1.0).abs() < 1e-10, "phi {phi_deg} f {f}");
        }
    }
}

#[test]
fn displacement_is_strain_times_arm_length() {
    let p = IfoParams::paper_sagnac();
    let grid = FrequencyGrid::log(1.0, 1e3, 301).unwrap();
    let s = quantum_noise_spectrum(&p, &fig4_injection(&p), &grid).unwrap();
    for (x, h) in s.sqrt_sx.iter().zip(&s.sqrt_sh) {
        assert_eq!(*x, h * p.arm_length);
    }
}

#[test]
fn parallel_evaluation_is_bit_identical_to_sequential() {
    let p = IfoParams::paper_sagnac();
    let inj = fig4_injection(&p);
    let grid = FrequencyGrid::log(1.0, 1e3, 1000).unwrap();
    let s = quantum_noise_spectrum(&p, &inj, &grid).unwrap();
    for (f, h) in grid.frequencies().iter().zip(&s.sqrt_sh) {
        assert_eq!(strain_psd(*f, &p, &inj).unwrap().sqrt(), *h);
    }
}

#[test]
fn back_action_cancelled_at_optimal_angle() {
    let p = IfoParams::paper_sagnac();
    let omega = p.half_bandwidth() / 100.0;
    let k = coupling_constant(omega, &p).unwrap();
    let (c1_opt, _) = noise_vector(optimal_readout_angle(&p).unwrap(), k);
    let (c1_zero, _) = noise_vector(0.0, k);
    assert!(c1_opt.abs() < 1e-3 * c1_zero.abs());
}

#[test]
fn squeezing_gain_is_flat_deep_inside_the_arm_bandwidth() {
    // With lossless injection the gain is e^(−2r) up to residual back-action,
    // which stays below 1% for Ω ≤ γ/10 at 12.4 dB.
    let p = IfoParams::paper_sagnac();
    let phi = optimal_readout_angle(&p).unwrap();
    let sq = InjectionParams {
        squeeze_db: 12.4,
        squeeze_angle: PHASE_QUADRATURE,
        eta_pre: 1.0,
        eta_post: 1.0,
        readout_angle: phi,
    };
    let vac = InjectionParams::vacuum(phi);
    let target = 10f64.powf(-1.24);
    let g = p.half_bandwidth();
    for i in 1..=100 {
        let f = g / 10.0 * i as f64 / 100.0 / (2.0 * PI);
        let ratio = strain_psd(f, &p, &sq).unwrap() / strain_psd(f, &p, &vac).unwrap();
        assert!((ratio / target - 1.0).abs() < 0.01, "f {f}: {ratio}");
    }
}

#[test]
fn high_frequency_floor_is_unchanged() {
    let p = IfoParams::paper_sagnac();
    let phi = optimal_readout_angle(&p).unwrap();
    // Identity with the in-interferometer antisqueezing of 12.1 dB.
    let anti = 10f64.powf(1.21);
    let floor = phi.sin().powi(2) * anti + phi.cos().powi(2) / anti;
    assert!((floor - 1.0).abs() < 0.05, "{floor}");

    let sq = fig4_injection(&p);
    let vac = InjectionParams {
        squeeze_db: 0.0,
        ..sq
    };
    let f = 100.0 * p.half_bandwidth() / (2.0 * PI);
    let ratio = strain_psd(f, &p, &sq).unwrap() / strain_psd(f, &p, &vac).unwrap();
    assert!((ratio - 1.0).abs() < 0.05, "{ratio}");
}

#[test]
fn michelson_antisqueezing_raises_back_action() {
    let m = IfoParams::paper_michelson();
    let sq = InjectionParams {
        readout_angle: 0.0,
        ..fig4_injection(&IfoParams::paper_sagnac())
    };
    let vac = InjectionParams {
        squeeze_db: 0.0,
        ..sq
    };
    let f = m.half_bandwidth() / 10.0 / (2.0 * PI);
    assert!(strain_psd(f, &m, &sq).unwrap() > strain_psd(f, &m, &vac).unwrap());
}

#[test]
fn sagnac_squeezing_never_hurts_inside_the_arm_linewidth() {
    let p = IfoParams::paper_sagnac();
    let sq = fig4_injection(&p);
    let vac = InjectionParams {
        squeeze_db: 0.0,
        ..sq
    };
    let grid = FrequencyGrid::log(0.1, p.linewidth, 200).unwrap();
    for &f in grid.frequencies() {
        assert!(strain_psd(f, &p, &sq).unwrap() <= strain_psd(f, &p, &vac).unwrap());
    }
}

#[test]
fn low_frequency_slope_follows_signal_transfer() {
    let p = IfoParams::paper_sagnac();
    let inj = fig4_injection(&p);
    let (f1, f2) = (0.01, 0.1);
    let a1 = strain_psd(f1, &p, &inj).unwrap().sqrt();
    let a2 = strain_psd(f2, &p, &inj).unwrap().sqrt();
    let slope = (a2 / a1).log10() / (f2 / f1).log10();
    assert!((slope + 1.0).abs() < 1e-3, "{slope}");
}

#[test]
fn vacuum_never_beats_sql() {
    let p = IfoParams::paper_sagnac();
    let grid = FrequencyGrid::log(0.1, 1e4, 400).unwrap();
    let phi = optimal_readout_angle(&p).unwrap();
    let vac = InjectionParams {
        squeeze_db: 0.0,
        ..fig4_injection(&p)
    };
    let s = quantum_noise_spectrum(&p, &vac, &grid).unwrap();
    let bound = 1.0 / (2.0 * coupling_constant(0.0, &p).unwrap());
    assert!((bound - 2.05).abs() < 0.01);
    for r in s.ratio_to_sql_db() {
        assert!(10f64.powf(r / 10.0) >= bound * (1.0 - 1e-12));
    }
    assert!(sql_beating_band(&s).is_empty());
    // Lossless vacuum too.
    let s = quantum_noise_spectrum(&p, &InjectionParams::vacuum(phi), &grid).unwrap();
    assert!(sql_beating_band(&s).is_empty());
}

#[test]
fn squeezing_beats_sql_around_ten_hertz() {
    let p = IfoParams::paper_sagnac();
    let grid = FrequencyGrid::log(1.0, 1e3, 301).unwrap();
    let s = quantum_noise_spectrum(&p, &fig4_injection(&p), &grid).unwrap();
    let bands = sql_beating_band(&s);
    assert_eq!(bands.len(), 1, "{bands:?}");
    assert!(bands[0].0 <= 10.0 && bands[0].1 >= 10.0);
}

#[test]
fn fig4_floor_at_ten_hertz() {
    let p = IfoParams::paper_sagnac();
    let h = strain_psd(10.0, &p, &fig4_injection(&p)).unwrap().sqrt();
    assert!((h / 4.4e-24 - 1.0).abs() < 0.02, "{h}");
}

#[test]
fn sweep_matches_single_spectrum() {
    let p = IfoParams::paper_sagnac();
    let inj = fig4_injection(&p);
    let grid = FrequencyGrid::log(1.0, 1e3, 50).unwrap();
    let single = quantum_noise_spectrum(&p, &inj, &grid).unwrap();
    let sweep = angle_sweep(&p, &inj, &grid, &[inj.readout_angle]).unwrap();
    assert_eq!(sweep, vec![single]);
}

#[test]
fn smaller_angle_trades_low_for_high_frequency_sensitivity() {
    // Tilting the homodyne toward the signal quadrature follows the smaller
    // coupling above the linewidth at the cost of residual back-action below.
    let p = IfoParams::paper_sagnac();
    let inj = fig4_injection(&p);
    let grid = FrequencyGrid::log(1.0, 1e4, 200).unwrap();
    let angles = [13.7f64.to_radians(), 8f64.to_radians(), 20f64.to_radians()];
    let s = angle_sweep(&p, &inj, &grid, &angles).unwrap();
    let (nominal, lower, higher) = (&s[0], &s[1], &s[2]);
    let first = 0;
    let last = grid.len() - 1;
    assert!(lower.sqrt_sh[first] > nominal.sqrt_sh[first]);
    assert!(lower.sqrt_sh[last] < nominal.sqrt_sh[last]);
    // A larger angle over-compensates everywhere.
    assert!(higher.sqrt_sh[first] > nominal.sqrt_sh[first]);
    assert!(higher.sqrt_sh[last] > nominal.sqrt_sh[last]);
}
