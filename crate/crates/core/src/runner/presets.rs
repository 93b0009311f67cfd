//! Named sweeps reproducing the standard figure set.

use crate::error::{Error, Result};
use crate::schemes::{ImpairmentParams, Scheme};

use super::config::{Analysis, Source, SystemConfig};

pub const PRESETS: [&str; 15] = [
    "outage-pmux-ideal",
    "outage-pmux-chi",
    "outage-pdiv-ideal",
    "outage-pdiv-xi",
    "outage-spmux-ideal",
    "outage-spmux-xi",
    "outage-compare",
    "outage-sumrate-vs-snr",
    "outage-sumrate-vs-xi",
    "ergodic-pmux-chi",
    "ergodic-pdiv-xi",
    "ergodic-schemes-xi",
    "ergodic-schemes-chi",
    "ergodic-all-ma",
    "ergodic-sdma-csi",
];

fn chis(v: &[f64], xi: f64) -> Vec<ImpairmentParams> {
    v.iter()
        .map(|&c| ImpairmentParams::new(c, xi, 0.0))
        .collect()
}

fn xis(chi: f64, v: &[f64]) -> Vec<ImpairmentParams> {
    v.iter()
        .map(|&x| ImpairmentParams::new(chi, x, 0.0))
        .collect()
}

/// One-line description for `list-presets`.
pub fn describe(name: &str) -> Option<&'static str> {
    Some(match name {
        "outage-pmux-ideal" => "PMUX outage vs SNR, chi = 0, rates {0.5; 0.1, 0.5, 1.2}",
        "outage-pmux-chi" => "PMUX outage vs SNR for chi in {0, 0.001, 0.01, 0.1}",
        "outage-pdiv-ideal" => "PDIV outage vs SNR, chi = 0, xi = 0",
        "outage-pdiv-xi" => "PDIV outage vs SNR, chi = 0.001, xi in {0, 0.01, 0.05}",
        "outage-spmux-ideal" => "SPMUX outage vs SNR, chi = 0, xi = 0",
        "outage-spmux-xi" => "SPMUX outage vs SNR, chi = 0.001, xi in {0, 0.01, 0.05}",
        "outage-compare" => "PMUX/PDIV/SPMUX outage, chi = 0.001, xi in {0, 0.05}, simulation only",
        "outage-sumrate-vs-snr" => {
            "outage sum-rate of every scheme vs SNR, chi = 0.001, xi in {0, 0.1}"
        }
        "outage-sumrate-vs-xi" => "outage sum-rate of every scheme at 24 dB vs xi in [0, 0.5]",
        "ergodic-pmux-chi" => "PMUX ergodic rates vs SNR, chi in {0, 0.001, 0.01}",
        "ergodic-pdiv-xi" => "PDIV ergodic rates vs SNR, chi = 0, xi in {0, 0.01, 0.05}",
        "ergodic-schemes-xi" => "RSMA schemes' ergodic sum-rate, chi = 0.001, xi in {0, 0.01, 0.1}",
        "ergodic-schemes-chi" => {
            "RSMA schemes' ergodic sum-rate, xi = 0.01, chi in {0.001, 0.01, 0.1}"
        }
        "ergodic-all-ma" => "ergodic sum-rate of every scheme, chi = 0.001, xi in {0, 0.1}",
        "ergodic-sdma-csi" => "RSMA vs SDMA ergodic sum-rate with and without CSI error",
        _ => return None,
    })
}

/// The resolved config of a preset, before overrides.
pub fn preset_config(name: &str) -> Result<SystemConfig> {
    let mut c = SystemConfig::default();
    let rsma = vec![Scheme::Pmux, Scheme::Pdiv, Scheme::Spmux];
    match name {
        "outage-pmux-ideal" => {
            c.rate_private = vec![0.1, 0.5, 1.2];
        }
        "outage-pmux-chi" => {
            c.impairments = chis(&[0.0, 0.001, 0.01, 0.1], 0.0);
        }
        "outage-pdiv-ideal" => {
            c.schemes = vec![Scheme::Pdiv];
        }
        "outage-pdiv-xi" => {
            c.schemes = vec![Scheme::Pdiv];
            c.impairments = xis(0.001, &[0.0, 0.01, 0.05]);
        }
        "outage-spmux-ideal" => {
            c.schemes = vec![Scheme::Spmux];
        }
        "outage-spmux-xi" => {
            c.schemes = vec![Scheme::Spmux];
            c.impairments = xis(0.001, &[0.0, 0.01, 0.05]);
        }
        "outage-compare" => {
            c.schemes = rsma;
            c.impairments = xis(0.001, &[0.0, 0.05]);
            c.sources = vec![Source::Mc];
        }
        "outage-sumrate-vs-snr" => {
            c.schemes = Scheme::ALL.to_vec();
            c.impairments = xis(0.001, &[0.0, 0.1]);
        }
        "outage-sumrate-vs-xi" => {
            c.schemes = Scheme::ALL.to_vec();
            c.snr_db = vec![24.0];
            let grid: Vec<f64> = (0..=10).map(|k| 0.05 * k as f64).collect();
            c.impairments = xis(0.001, &grid);
        }
        "ergodic-pmux-chi" => {
            c.analyses = vec![Analysis::Ergodic];
            c.impairments = chis(&[0.0, 0.001, 0.01], 0.0);
        }
        "ergodic-pdiv-xi" => {
            c.analyses = vec![Analysis::Ergodic];
            c.schemes = vec![Scheme::Pdiv];
            c.impairments = xis(0.0, &[0.0, 0.01, 0.05]);
        }
        "ergodic-schemes-xi" => {
            c.analyses = vec![Analysis::Ergodic];
            c.schemes = vec![Scheme::Pmux, Scheme::Pdiv, Scheme::Spmux, Scheme::SpRsma];
            c.impairments = xis(0.001, &[0.0, 0.01, 0.1]);
        }
        "ergodic-schemes-chi" => {
            c.analyses = vec![Analysis::Ergodic];
            c.schemes = vec![Scheme::Pmux, Scheme::Pdiv, Scheme::Spmux, Scheme::SpRsma];
            c.impairments = chis(&[0.001, 0.01, 0.1], 0.01);
        }
        "ergodic-all-ma" => {
            c.analyses = vec![Analysis::Ergodic];
            c.schemes = Scheme::ALL.to_vec();
            c.impairments = xis(0.001, &[0.0, 0.1]);
        }
        "ergodic-sdma-csi" => {
            c.analyses = vec![Analysis::Ergodic];
            c.schemes = vec![
                Scheme::Pmux,
                Scheme::Pdiv,
                Scheme::Spmux,
                Scheme::SpSdma,
                Scheme::DpSdmaDiv,
                Scheme::DpSdmaMux,
            ];
            c.impairments = vec![
                ImpairmentParams::new(0.001, 0.0, 0.0),
                ImpairmentParams::new(0.001, 0.01, 0.3),
            ];
        }
        _ => {
            return Err(Error::Unknown {
                kind: "preset",
                name: name.to_string(),
            })
        }
    }
    Ok(c)
}
