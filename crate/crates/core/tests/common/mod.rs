//! Reference implementations used only by tests. Everything here is the
//! slow, obvious formula.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

/// Centered frequencies `-L/2 .. L/2-1` (odd: `-(L-1)/2 ..`).
pub fn centered(len: usize) -> impl Iterator<Item = i64> {
    let lo = -((len / 2) as i64);
    (0..len as i64).map(move |i| i + lo)
}

/// `X(xi) = sum_l x_l e^{-2 pi i xi l / L}` by direct summation.
pub fn direct_dft(x: &[Complex64]) -> Vec<Complex64> {
    let len = x.len();
    centered(len)
        .map(|xi| {
            x.iter()
                .enumerate()
                .map(|(l, v)| {
                    // reduce the exponent first to keep the phase exact
                    let m = (xi * l as i64).rem_euclid(len as i64) as f64;
                    v * Complex64::from_polar(1.0, -2.0 * PI * m / len as f64)
                })
                .sum()
        })
        .collect()
}

/// `sum_l c_l e^{-2 pi i xi u_l}` for centered `xi`, by direct summation.
pub fn direct_nufft(points: &[f64], values: &[Complex64], out_len: usize) -> Vec<Complex64> {
    centered(out_len)
        .map(|xi| {
            points
                .iter()
                .zip(values)
                .map(|(u, c)| c * Complex64::from_polar(1.0, -2.0 * PI * (xi as f64 * u).fract()))
                .sum()
        })
        .collect()
}

pub fn naive_downsample<T: Copy>(x: &[T], n: usize) -> Vec<T> {
    x.iter().step_by(n).copied().collect()
}

pub fn naive_alias(x: &[Complex64], n: usize) -> Vec<Complex64> {
    let out = x.len() / n;
    let mut y = vec![Complex64::new(0.0, 0.0); out];
    for (i, v) in x.iter().enumerate() {
        y[i % out] += v;
    }
    y
}

/// Mean of `y` over `x in [k/bins, (k+1)/bins)`, scanning every sample per bin.
pub fn naive_bin_means(x: &[f64], y: &[f64], bins: usize) -> Vec<Option<f64>> {
    (0..bins)
        .map(|k| {
            let lo = k as f64 / bins as f64;
            let hi = (k + 1) as f64 / bins as f64;
            let hits: Vec<f64> = x
                .iter()
                .zip(y)
                .filter(|(xv, _)| **xv >= lo && **xv < hi)
                .map(|(_, yv)| *yv)
                .collect();
            if hits.is_empty() {
                None
            } else {
                Some(hits.iter().sum::<f64>() / hits.len() as f64)
            }
        })
        .collect()
}

pub fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

pub fn rel_l2_c(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Evenly spaced periodic sawtooth-like profile with a sharp drop at `peak`.
pub fn skewed_profile(x: f64, peak: f64) -> f64 {
    let x = x.rem_euclid(1.0);
    if x < peak {
        x / peak
    } else {
        (1.0 - x) / (1.0 - peak)
    }
}
