//! Discrete Fourier machinery with centered frequency indexing.
//!
//! Spectra of length `L` are indexed `xi = -L/2 .. L/2 - 1` (for odd `L`,
//! `-(L-1)/2 .. (L-1)/2`). The forward transform carries no prefactor and the
//! inverse carries `1/L`.

mod nufft;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{MmdError, Result};

pub use nufft::{nufft_type1, NufftPlan, MAX_KERNEL_WIDTH};

type PlanKey = (usize, bool);

fn plan_cache() -> &'static Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Shared FFT plan of the given size and direction.
pub(crate) fn fft_plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = plan_cache().lock().unwrap_or_else(|e| e.into_inner());
    cache
        .entry((len, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(len)
            } else {
                planner.plan_fft_forward(len)
            }
        })
        .clone()
}

/// In-place unnormalized FFT (`e^{-2 pi i k l / L}` forward).
pub(crate) fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    if buf.len() > 1 {
        fft_plan(buf.len(), inverse).process(buf);
    }
}

/// Lowest centered frequency for a spectrum of `len` entries.
#[inline]
pub fn lowest_frequency(len: usize) -> i64 {
    -((len / 2) as i64)
}

/// A spectrum indexed by centered integer frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumL {
    coeffs: Vec<Complex64>,
}

impl SpectrumL {
    /// Wraps coefficients already in centered order.
    pub fn from_centered(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    /// Builds from FFT order (index `xi mod L`).
    pub fn from_natural(natural: &[Complex64]) -> Self {
        let len = natural.len();
        let lo = lowest_frequency(len);
        let coeffs = (0..len as i64)
            .map(|i| natural[(i + lo).rem_euclid(len as i64) as usize])
            .collect();
        Self { coeffs }
    }

    /// Coefficients in FFT order (index `xi mod L`).
    pub fn to_natural(&self) -> Vec<Complex64> {
        let len = self.coeffs.len();
        let lo = lowest_frequency(len);
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[(i as i64 + lo).rem_euclid(len as i64) as usize] = *c;
        }
        out
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn lowest(&self) -> i64 {
        lowest_frequency(self.coeffs.len())
    }

    pub fn frequencies(&self) -> impl Iterator<Item = i64> {
        let lo = self.lowest();
        (0..self.coeffs.len() as i64).map(move |i| i + lo)
    }

    /// Coefficient at frequency `xi`, zero outside the stored range.
    pub fn get(&self, xi: i64) -> Complex64 {
        let idx = xi - self.lowest();
        if idx < 0 || idx as usize >= self.coeffs.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[idx as usize]
        }
    }

    pub fn set(&mut self, xi: i64, value: Complex64) {
        let idx = xi - self.lowest();
        if idx >= 0 && (idx as usize) < self.coeffs.len() {
            self.coeffs[idx as usize] = value;
        }
    }
}

/// Forward DFT `X(xi) = sum_l x_l e^{-2 pi i xi l / L}`.
pub fn dft(x: &[Complex64]) -> SpectrumL {
    let mut buf = x.to_vec();
    fft_in_place(&mut buf, false);
    SpectrumL::from_natural(&buf)
}

/// [`dft`] of a real sequence.
pub fn dft_real(x: &[f64]) -> SpectrumL {
    let buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    dft(&buf)
}

/// Inverse DFT with the `1/L` prefactor.
pub fn idft(spectrum: &SpectrumL) -> Vec<Complex64> {
    let mut buf = spectrum.to_natural();
    fft_in_place(&mut buf, true);
    let scale = 1.0 / buf.len().max(1) as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

fn check_divisible(len: usize, factor: usize) -> Result<usize> {
    if factor == 0 || len % factor != 0 {
        return Err(MmdError::NotDivisible { factor, len });
    }
    Ok(len / factor)
}

/// Downsampling `y[n] = x[n N]`.
pub fn downsample<T: Copy>(x: &[T], factor: usize) -> Result<Vec<T>> {
    let out = check_divisible(x.len(), factor)?;
    Ok((0..out).map(|n| x[n * factor]).collect())
}

/// Aliasing `y[n] = sum_{j < N} x[n + j L / N]`.
pub fn alias<T>(x: &[T], factor: usize) -> Result<Vec<T>>
where
    T: Copy + std::ops::Add<Output = T>,
{
    let out = check_divisible(x.len(), factor)?;
    Ok((0..out)
        .map(|n| {
            (1..factor).fold(x[n], |acc, j| acc + x[n + j * out])
        })
        .collect())
}

/// Aliasing expressed on centered frequencies: every `xi` is folded onto the
/// representative of `xi mod L/N` in the centered output range.
pub fn alias_spectrum(spectrum: &SpectrumL, factor: usize) -> Result<SpectrumL> {
    let natural = spectrum.to_natural();
    Ok(SpectrumL::from_natural(&alias(&natural, factor)?))
}

/// The scaling operator `T_N`: `out(xi) = g(N xi)` on the centered range of
/// length `L/N`. With `zero_mean` the `xi = 0` entry is forced to zero.
pub fn scale_subsample_t(g: &SpectrumL, factor: usize, zero_mean: bool) -> Result<SpectrumL> {
    let out_len = check_divisible(g.len(), factor)?;
    let lo = lowest_frequency(out_len);
    let coeffs = (0..out_len as i64)
        .map(|i| {
            let xi = i + lo;
            if zero_mean && xi == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                g.get(xi * factor as i64)
            }
        })
        .collect();
    Ok(SpectrumL::from_centered(coeffs))
}
