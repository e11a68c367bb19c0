//! Partition-based regression on folded phases, and joint-occupancy
//! diagnostics for a family of phases.
//!
//! This is the bin-average estimator that DSA is equivalent to on uniformly
//! covered grids. It is kept independent of the spectral code so it can serve
//! as a cross-check.

use std::f64::consts::PI;

use crate::dsa::fold_phase;
use crate::error::{MmdError, Result};
use crate::model::{Parity, PhaseTrack, UniformSignal};
use crate::par;

const SHARD: usize = 1 << 15;

/// Responses paired with abscissae folded into `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldedSamples {
    x: Vec<f64>,
    y: Vec<f64>,
    bins: usize,
}

impl FoldedSamples {
    /// Folds raw abscissae; `bins` is `1/h`.
    pub fn new(raw_x: &[f64], y: Vec<f64>, bins: usize) -> Result<Self> {
        if raw_x.len() != y.len() {
            return Err(MmdError::LengthMismatch {
                expected: raw_x.len(),
                actual: y.len(),
            });
        }
        if bins < 2 {
            return Err(MmdError::InvalidParameter(format!("need at least 2 bins, got {bins}")));
        }
        Ok(Self {
            x: raw_x.iter().map(|&v| fold_phase(v)).collect(),
            y,
            bins,
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn step(&self) -> f64 {
        1.0 / self.bins as f64
    }
}

/// `(mod(phase_l, 1), responses_l)` with `bins` partitions of `[0, 1)`.
pub fn fold(phase: &PhaseTrack, responses: &[f64], bins: usize) -> Result<FoldedSamples> {
    FoldedSamples::new(phase.values(), responses.to_vec(), bins)
}

#[inline]
fn bin_of(x: f64, bins: usize) -> usize {
    ((x * bins as f64) as usize).min(bins - 1)
}

/// Piecewise-constant estimate on `bins` equal cells.
#[derive(Debug, Clone, PartialEq)]
pub struct BinEstimate {
    /// Bin means; empty bins hold interpolated values.
    pub values: Vec<f64>,
    pub occupied: Vec<bool>,
    pub counts: Vec<u64>,
}

impl BinEstimate {
    /// Values with their mean removed.
    pub fn centered(&self) -> Vec<f64> {
        let mean = self.values.iter().sum::<f64>() / self.values.len() as f64;
        self.values.iter().map(|v| v - mean).collect()
    }
}

/// Mean response per bin `[k h, (k+1) h)`.
///
/// Empty bins are filled by linear interpolation between the nearest
/// occupied bins on either side, wrapping around the period.
pub fn partition_regress(samples: &FoldedSamples) -> Result<BinEstimate> {
    let bins = samples.bins;
    let shards = par::fold_ranges(samples.x.len(), SHARD, |a, b| {
        let mut sums = vec![0.0; bins];
        let mut counts = vec![0u64; bins];
        for (x, y) in samples.x[a..b].iter().zip(&samples.y[a..b]) {
            let k = bin_of(*x, bins);
            sums[k] += y;
            counts[k] += 1;
        }
        (sums, counts)
    });
    let mut sums = vec![0.0; bins];
    let mut counts = vec![0u64; bins];
    for (s, c) in shards {
        for k in 0..bins {
            sums[k] += s[k];
            counts[k] += c[k];
        }
    }
    let occupied: Vec<bool> = counts.iter().map(|&c| c > 0).collect();
    let filled: Vec<usize> = (0..bins).filter(|&k| occupied[k]).collect();
    if filled.is_empty() {
        return Err(MmdError::AllBinsEmpty);
    }
    let mut values: Vec<f64> = (0..bins)
        .map(|k| if occupied[k] { sums[k] / counts[k] as f64 } else { 0.0 })
        .collect();
    for (i, &lo) in filled.iter().enumerate() {
        let hi = filled[(i + 1) % filled.len()];
        let gap = (hi + bins - lo) % bins;
        let gap = if gap == 0 { bins } else { gap };
        let (vl, vh) = (values[lo], values[hi]);
        for step in 1..gap {
            let w = step as f64 / gap as f64;
            values[(lo + step) % bins] = (1.0 - w) * vl + w * vh;
        }
    }
    Ok(BinEstimate {
        values,
        occupied,
        counts,
    })
}

/// Regression estimate of `a_n s_n` for one scale index and parity.
///
/// Folds `mod(N phi(t_l), 1)` against the responses
/// `2^{|sgn n|} trig(2 pi n phi(t_l)) f(t_l)`, where `phi = p / N_phase`.
pub fn rdbr_extract(
    signal: &UniformSignal,
    phase: &PhaseTrack,
    fundamental: f64,
    n: i64,
    parity: Parity,
    bins: usize,
) -> Result<BinEstimate> {
    if signal.len() != phase.len() {
        return Err(MmdError::LengthMismatch {
            expected: phase.len(),
            actual: signal.len(),
        });
    }
    if !(fundamental.is_finite() && fundamental > 0.0) {
        return Err(MmdError::InvalidFundamental(fundamental));
    }
    let weight = if n == 0 { 1.0 } else { 2.0 };
    let to_phi = 1.0 / phase.fundamental();
    let freq = 2.0 * PI * n as f64;
    let mut x = Vec::with_capacity(phase.len());
    let mut y = Vec::with_capacity(phase.len());
    for (&p, &f) in phase.values().iter().zip(signal.samples()) {
        let phi = p * to_phi;
        x.push(fundamental * phi);
        let trig = match (n, parity) {
            (0, Parity::Cos) => 1.0,
            (0, Parity::Sin) => 0.0,
            _ => parity.modulate(freq * phi),
        };
        y.push(weight * trig * f);
    }
    partition_regress(&FoldedSamples::new(&x, y, bins)?)
}

/// Default partition count when the oracle stands in for DSA: `L / N_eff`.
pub fn equivalent_bins(len: usize, effective_fundamental: u64) -> usize {
    ((len as f64 / effective_fundamental as f64).round() as usize).max(2)
}

/// Joint-occupancy statistics of a phase family on `bins` partitions.
#[derive(Debug, Clone, PartialEq)]
pub struct WellDiffReport {
    /// `min D^{ij}(m, n)` over ordered pairs `i != j`.
    pub gamma: u64,
    /// `max beta_{ij}`.
    pub beta: f64,
    /// `beta_{ij}` for every ordered pair.
    pub pair_beta: Vec<((usize, usize), f64)>,
    /// `D^i(m)`, one row per phase.
    pub single_counts: Vec<Vec<u64>>,
    /// `D^{ij}(m, n)` row-major in `m`, one entry per ordered pair.
    pub pair_counts: Vec<((usize, usize), Vec<u64>)>,
    /// `beta (2 M0 + 1)(K - 1)`.
    pub contraction: f64,
    pub bins: usize,
}

impl WellDiffReport {
    pub fn is_degenerate(&self) -> bool {
        self.gamma == 0
    }
}

/// Counts points per bin and per joint bin pair and derives `gamma`, `beta`
/// and the contraction factor for band `m0`.
pub fn well_diff_report(phases: &[PhaseTrack], bins: usize, m0: usize) -> Result<WellDiffReport> {
    if phases.len() < 2 {
        return Err(MmdError::TooFewComponents {
            min: 2,
            actual: phases.len(),
        });
    }
    if bins < 2 {
        return Err(MmdError::InvalidParameter(format!("need at least 2 bins, got {bins}")));
    }
    let len = phases[0].len();
    if let Some(p) = phases.iter().find(|p| p.len() != len) {
        return Err(MmdError::LengthMismatch {
            expected: len,
            actual: p.len(),
        });
    }
    let labels: Vec<Vec<usize>> = phases
        .iter()
        .map(|p| p.values().iter().map(|&v| bin_of(fold_phase(v), bins)).collect())
        .collect();
    let single_counts: Vec<Vec<u64>> = labels
        .iter()
        .map(|lab| {
            let mut c = vec![0u64; bins];
            lab.iter().for_each(|&m| c[m] += 1);
            c
        })
        .collect();
    let k = phases.len();
    let mut pair_counts = Vec::with_capacity(k * (k - 1));
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let mut c = vec![0u64; bins * bins];
            for (&m, &n) in labels[i].iter().zip(&labels[j]) {
                c[m * bins + n] += 1;
            }
            pair_counts.push(((i, j), c));
        }
    }
    let gamma = pair_counts
        .iter()
        .flat_map(|(_, c)| c.iter().copied())
        .min()
        .unwrap_or(0);
    let pair_beta: Vec<((usize, usize), f64)> = pair_counts
        .iter()
        .map(|&((i, j), ref c)| {
            let total: f64 = (0..bins)
                .filter(|&m| single_counts[i][m] > 0)
                .map(|m| {
                    let row: f64 = c[m * bins..(m + 1) * bins]
                        .iter()
                        .map(|&d| (d as f64 - gamma as f64).powi(2))
                        .sum();
                    row / single_counts[i][m] as f64
                })
                .sum();
            ((i, j), total.sqrt())
        })
        .collect();
    let beta = pair_beta.iter().map(|(_, b)| *b).fold(0.0, f64::max);
    Ok(WellDiffReport {
        gamma,
        beta,
        pair_beta,
        single_counts,
        pair_counts,
        contraction: beta * (2 * m0 + 1) as f64 * (k - 1) as f64,
        bins,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_examples() {
        let s = FoldedSamples::new(&[0.2, 1.2, 2.2], vec![0.0; 3], 4).unwrap();
        assert!(s.x().iter().all(|x| (x - 0.2).abs() < 1e-12));
        let s = FoldedSamples::new(&[1.0, 2.0, 3.0], vec![0.0; 3], 4).unwrap();
        assert!(s.x().iter().all(|&x| x == 0.0));
        let s = FoldedSamples::new(&[-0.25], vec![0.0], 4).unwrap();
        assert_eq!(s.x()[0], 0.75);
        assert!(FoldedSamples::new(&[0.0], vec![], 4).is_err());
        assert!(FoldedSamples::new(&[0.0], vec![0.0], 1).is_err());
    }

    #[test]
    fn constant_and_line() {
        let x: Vec<f64> = (0..4000).map(|i| i as f64 / 4000.0).collect();
        let est = partition_regress(&FoldedSamples::new(&x, vec![3.0; 4000], 8).unwrap()).unwrap();
        assert!(est.values.iter().all(|&v| v == 3.0));
        let est = partition_regress(&FoldedSamples::new(&x, x.clone(), 4).unwrap()).unwrap();
        for (k, v) in est.values.iter().enumerate() {
            let centre = (k as f64 + 0.5) / 4.0;
            assert!((v - centre).abs() < 1e-3, "{k}: {v}");
        }
    }

    #[test]
    fn empty_bins_are_filled_periodically() {
        // samples only in bins 0 and 2 of 4
        let samples = FoldedSamples::new(&[0.1, 0.6], vec![1.0, 3.0], 4).unwrap();
        let est = partition_regress(&samples).unwrap();
        assert_eq!(est.occupied, vec![true, false, true, false]);
        assert_eq!(est.values, vec![1.0, 2.0, 3.0, 2.0]);
        let single = FoldedSamples::new(&[0.3], vec![5.0], 4).unwrap();
        assert_eq!(partition_regress(&single).unwrap().values, vec![5.0; 4]);
        let none = FoldedSamples::new(&[], vec![], 4).unwrap();
        assert!(matches!(partition_regress(&none), Err(MmdError::AllBinsEmpty)));
    }

    #[test]
    fn zero_signal_gives_zero_bins() {
        let phase = PhaseTrack::from_fn(1024, 16.0, |t| t).unwrap();
        let f = UniformSignal::zeros(1024).unwrap();
        let est = rdbr_extract(&f, &phase, 16.0, 1, Parity::Cos, 64).unwrap();
        assert!(est.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn uniform_joint_occupancy() {
        let bins = 8;
        // p1 cycles through the bins once per `bins` samples, p2 once per
        // `bins^2`, so every joint cell receives the same count
        let len = 3 * bins * bins;
        let p1 = PhaseTrack::from_fn(len, (3 * bins) as f64, |t| t).unwrap();
        let p2 = PhaseTrack::from_fn(len, 3.0, |t| t).unwrap();
        let r = well_diff_report(&[p1.clone(), p2], bins, 0).unwrap();
        assert_eq!(r.gamma, 3);
        assert_eq!(r.beta, 0.0);
        assert_eq!(r.contraction, 0.0);

        let same = well_diff_report(&[p1.clone(), p1.clone()], bins, 0).unwrap();
        assert!(same.is_degenerate());
        assert!(well_diff_report(&[p1], bins, 0).is_err());
    }
}
