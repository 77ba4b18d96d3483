use std::ffi::{c_char, CString};
use std::ptr;

use omc_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let n = unsafe { omc_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf.iter().take(n.min(255)).map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn unit_cell_round_trip() {
    let mut cell = ptr::null_mut();
    let status = unsafe { omc_unit_cell_new(300e-9, 0.65, 0.45, 0.6, 0.17, 64, &mut cell) };
    assert_eq!(status, OmcStatus::Ok);
    let mut fill = 0.0;
    assert_eq!(unsafe { omc_unit_cell_fill_fraction(cell, &mut fill) }, OmcStatus::Ok);
    assert!(fill > 0.3 && fill < 1.0);
    unsafe { omc_unit_cell_free(cell) };
}

#[test]
fn invalid_input_sets_message() {
    omc_clear_error();
    let mut cell = ptr::null_mut();
    let status = unsafe { omc_unit_cell_new(300e-9, 0.65, 0.45, 0.6, 0.17, 4, &mut cell) };
    assert_eq!(status, OmcStatus::InvalidInput);
    assert!(cell.is_null());
    assert!(last_error().contains("resolution"));
}

#[test]
fn null_pointers_are_rejected() {
    assert_eq!(unsafe { omc_unit_cell_fill_fraction(ptr::null(), ptr::null_mut()) }, OmcStatus::NullPointer);
    assert!(last_error().contains("cell"));
    unsafe { omc_unit_cell_free(ptr::null_mut()) };
    unsafe { omc_bands_free(ptr::null_mut()) };
}

#[test]
fn truncated_error_buffer_reports_full_length() {
    let mut cell = ptr::null_mut();
    unsafe { omc_unit_cell_new(300e-9, 0.65, 0.45, 0.6, 0.17, 4, &mut cell) };
    let mut buf = [0 as c_char; 8];
    let n = unsafe { omc_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 8);
    assert_eq!(buf[7], 0);
}

#[test]
fn te_bands_have_a_gap() {
    let mut cell = ptr::null_mut();
    unsafe { omc_unit_cell_new(300e-9, 0.65, 0.45, 0.6, 0.17, 64, &mut cell) };
    let mut bands = ptr::null_mut();
    let status = unsafe { omc_bands_compute(cell, OmcPolarization::Te, 3.48, 300.0 / 870.0, 6, 4, 4, &mut bands) };
    assert_eq!(status, OmcStatus::Ok);
    let (mut nk, mut nb) = (0, 0);
    unsafe { omc_bands_shape(bands, &mut nk, &mut nb) };
    assert_eq!((nk, nb), (13, 6));
    let mut freqs = vec![0.0; nk * nb];
    assert_eq!(unsafe { omc_bands_frequencies(bands, freqs.as_mut_ptr(), 3) }, OmcStatus::InvalidInput);
    assert_eq!(unsafe { omc_bands_frequencies(bands, freqs.as_mut_ptr(), freqs.len()) }, OmcStatus::Ok);
    assert!(freqs[0].abs() < 1e-6);
    let mut gap = OmcGap {
        lower_band: 0,
        lower_edge: 0.0,
        upper_edge: 0.0,
        gap_to_midgap: 0.0,
        lower_edge_physical: 0.0,
        upper_edge_physical: 0.0,
    };
    assert_eq!(unsafe { omc_bands_widest_gap(bands, &mut gap) }, OmcStatus::Ok);
    assert!(gap.gap_to_midgap > 0.05 && gap.upper_edge > gap.lower_edge);
    unsafe {
        omc_bands_free(bands);
        omc_unit_cell_free(cell);
    }
}

#[test]
fn scatter_peak_is_beta_squared() {
    let mut s = OmcScattering {
        t_elastic_re: 0.0,
        t_elastic_im: 0.0,
        t_raman_re: 0.0,
        t_raman_im: 0.0,
        p_success: 0.0,
        p_elastic: 0.0,
        p_loss: 0.0,
    };
    let g3 = (1.0 - 0.9) / 0.9;
    assert_eq!(unsafe { omc_scatter(0.0, 0.5, 0.5, g3, &mut s) }, OmcStatus::Ok);
    assert!((s.p_success - 0.81).abs() < 1e-12);
    assert!((s.p_success + s.p_elastic + s.p_loss - 1.0).abs() < 1e-12);
    assert_eq!(unsafe { omc_scatter(0.0, 0.0, 0.0, 0.0, &mut s) }, OmcStatus::InvalidInput);
}

#[test]
fn effective_rates_and_wavepacket() {
    let rates = OmcRates {
        g12: 1.0,
        g13: 1.0,
        g23: 1.0,
        kappa_eo: 20.0,
        kappa_em: 20.0,
        kappa_io: 0.1,
        kappa_im: 0.1,
        gamma3: 0.05,
        gamma2: 0.01,
    };
    let mut er = OmcEffectiveRates { gamma12: 0.0, gamma13: 0.0, gamma23: 0.0, beta_cav: 0.0, c_opt: 0.0, c_mech: 0.0 };
    assert_eq!(unsafe { omc_effective_rates(&rates, &mut er) }, OmcStatus::Ok);
    assert!((er.gamma13 - 0.1).abs() < 1e-15 && (er.beta_cav - 0.8).abs() < 1e-12);
    let mut p = 0.0;
    assert_eq!(unsafe { omc_wavepacket_success(OmcShape::Gaussian, 0.0, 1e-7, 0.5, 0.5, 0.0, &mut p) }, OmcStatus::Ok);
    assert!((p - 1.0).abs() < 1e-6);
    assert_eq!(unsafe { omc_wavepacket_success(OmcShape::Lorentzian, 0.0, -1.0, 0.5, 0.5, 0.0, &mut p) }, OmcStatus::InvalidInput);
}

#[test]
fn run_cascade_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let config = r#"{"cascade": {"g12_GHz": 1, "g13_GHz": 1, "g23_GHz": 1, "kappa_eo_GHz": 100, "kappa_em_GHz": 100,
        "kappa_io_GHz": 1, "kappa_im_GHz": 1, "gamma3_GHz": 0, "gamma2_GHz": 0.001, "n_samples": 11}}"#;
    let (cmd, cfg, path) = (
        CString::new("cascade").unwrap(),
        CString::new(config).unwrap(),
        CString::new(out.to_str().unwrap()).unwrap(),
    );
    let status = unsafe { omc_run(cmd.as_ptr(), cfg.as_ptr(), path.as_ptr(), OmcDomain::Photonic) };
    assert_eq!(status, OmcStatus::Ok, "{}", last_error());
    for f in ["regime.json", "success_curve.csv", "beta_family.csv", "success_curve.svg", "config.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let bad = CString::new("bandz").unwrap();
    let status = unsafe { omc_run(bad.as_ptr(), cfg.as_ptr(), path.as_ptr(), OmcDomain::Photonic) };
    assert_eq!(status, OmcStatus::Config);
    let missing = CString::new("{}").unwrap();
    let status = unsafe { omc_run(cmd.as_ptr(), missing.as_ptr(), path.as_ptr(), OmcDomain::Photonic) };
    assert_eq!(status, OmcStatus::Config);
}
