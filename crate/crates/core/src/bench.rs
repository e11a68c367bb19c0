//! Wall-clock comparison of DSA against the regression oracle.

use std::time::Instant;

use crate::dsa::{effective_fundamental, extract_single, DsaRequest, DEFAULT_NUFFT_TOLERANCE};
use crate::error::{MmdError, Result};
use crate::model::Parity;
use crate::oracle::{equivalent_bins, rdbr_extract};
use crate::siggen::gen_ex2_default;

/// Median wall time in seconds of `reps` calls.
pub fn median_time<T>(reps: usize, mut f: impl FnMut() -> T) -> f64 {
    let mut times: Vec<f64> = (0..reps.max(1))
        .map(|_| {
            let start = Instant::now();
            std::hint::black_box(f());
            start.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(f64::total_cmp);
    let n = times.len();
    if n % 2 == 1 {
        times[n / 2]
    } else {
        0.5 * (times[n / 2 - 1] + times[n / 2])
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(MmdError::LengthMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 2 || x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(MmdError::InvalidParameter("slope needs two or more positive points".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(MmdError::InvalidParameter("all x values coincide".into()));
    }
    Ok(sxy / sxx)
}

/// Runs `f` on a one-thread pool so timings are comparable across machines.
pub fn single_threaded<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        match rayon::ThreadPoolBuilder::new().num_threads(1).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        f()
    }
}

/// Timings of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchCell {
    pub len: usize,
    pub fundamental: f64,
    pub dsa_seconds: f64,
    pub oracle_seconds: f64,
}

impl BenchCell {
    pub fn speedup(&self) -> f64 {
        self.oracle_seconds / self.dsa_seconds
    }
}

/// Timing matrix, rows by fundamental and columns by length.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchMatrix {
    pub lengths: Vec<usize>,
    pub fundamentals: Vec<f64>,
    pub cells: Vec<BenchCell>,
}

impl BenchMatrix {
    pub fn cell(&self, row: usize, col: usize) -> &BenchCell {
        &self.cells[row * self.lengths.len() + col]
    }

    /// Slope of DSA time against `L` along one row.
    pub fn dsa_slope(&self, row: usize) -> Result<f64> {
        let x: Vec<f64> = self.lengths.iter().map(|&l| l as f64).collect();
        let y: Vec<f64> = (0..self.lengths.len()).map(|c| self.cell(row, c).dsa_seconds).collect();
        log_log_slope(&x, &y)
    }
}

/// Times one cosine extraction at `n = 1` by DSA and by the oracle on the
/// first component of the two-component test mixture.
pub fn time_cell(len: usize, fundamental: f64, shape_len: usize, reps: usize) -> Result<BenchCell> {
    let mix = gen_ex2_default(fundamental, len)?;
    let signal = &mix.components[0];
    let phase = &mix.phases[0];
    let bins = equivalent_bins(len, effective_fundamental(phase)?);
    let req = DsaRequest {
        signal,
        phase,
        fundamental,
        shape_len,
        scale_set: vec![1],
        nufft_tolerance: DEFAULT_NUFFT_TOLERANCE,
    };
    extract_single(&req, 1, Parity::Cos)?;
    rdbr_extract(signal, phase, fundamental, 1, Parity::Cos, bins)?;
    let dsa_seconds = median_time(reps, || extract_single(&req, 1, Parity::Cos));
    let oracle_seconds = median_time(reps, || rdbr_extract(signal, phase, fundamental, 1, Parity::Cos, bins));
    Ok(BenchCell {
        len,
        fundamental,
        dsa_seconds,
        oracle_seconds,
    })
}

/// Times every `(N, L)` cell on a single thread.
pub fn bench_grid(lengths: &[usize], fundamentals: &[f64], shape_len: usize, reps: usize) -> Result<BenchMatrix> {
    if lengths.is_empty() || fundamentals.is_empty() {
        return Err(MmdError::EmptyInput);
    }
    let cells = single_threaded(|| {
        let mut cells = Vec::with_capacity(lengths.len() * fundamentals.len());
        for &n in fundamentals {
            for &l in lengths {
                cells.push(time_cell(l, n, shape_len, reps)?);
            }
        }
        Ok::<_, MmdError>(cells)
    })?;
    Ok(BenchMatrix {
        lengths: lengths.to_vec(),
        fundamentals: fundamentals.to_vec(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.5)).collect();
        assert!((log_log_slope(&x, &y).unwrap() - 1.5).abs() < 1e-12);
        assert!(log_log_slope(&[1.0], &[1.0]).is_err());
        assert!(log_log_slope(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn median_is_robust() {
        let mut calls = 0;
        let t = median_time(5, || calls += 1);
        assert_eq!(calls, 5);
        assert!(t >= 0.0);
    }

    #[test]
    fn one_cell_grid() {
        let m = bench_grid(&[1 << 10], &[50.0], 64, 1).unwrap();
        assert_eq!(m.cells.len(), 1);
        assert!(m.cell(0, 0).dsa_seconds > 0.0);
        assert!(single_threaded(crate::par::current_threads) == 1);
    }
}
