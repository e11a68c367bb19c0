//! Sample autocorrelation of a residual against the white-noise band.

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct WhitenessReport {
    /// Normalized autocorrelation at lags `0..=max_lag`.
    pub acf: Vec<f64>,
    /// Half-width `1.96 / sqrt(L)` of the band.
    pub band: f64,
    /// Share of lags `1..=max_lag` inside the band.
    pub fraction_in_band: f64,
    /// The input has zero variance; `acf` is all zeros.
    pub degenerate: bool,
}

pub fn whiteness(x: &[f64], max_lag: usize) -> CliResult<WhitenessReport> {
    let len = x.len();
    if len == 0 {
        return Err(CliError::Validation("empty residual".into()));
    }
    if max_lag == 0 || max_lag >= len {
        return Err(CliError::Validation(format!("max lag must lie in 1..{len}, got {max_lag}")));
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(CliError::Validation(format!("non-finite residual value at index {i}")));
    }
    let band = 1.96 / (len as f64).sqrt();
    let mean = x.iter().sum::<f64>() / len as f64;
    let centered: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let energy: f64 = centered.iter().map(|v| v * v).sum();
    if energy == 0.0 {
        return Ok(WhitenessReport {
            acf: vec![0.0; max_lag + 1],
            band,
            fraction_in_band: 0.0,
            degenerate: true,
        });
    }
    let acf: Vec<f64> = (0..=max_lag)
        .map(|k| centered[..len - k].iter().zip(&centered[k..]).map(|(a, b)| a * b).sum::<f64>() / energy)
        .collect();
    let inside = acf[1..].iter().filter(|r| r.abs() <= band).count();
    Ok(WhitenessReport {
        fraction_in_band: inside as f64 / max_lag as f64,
        acf,
        band,
        degenerate: false,
    })
}
