//! Type-1 nonuniform FFT by Gaussian kernel gridding.
//!
//! Computes `F(xi) = sum_l c_l e^{-2 pi i xi u_l}` for centered `xi` and
//! points `u_l` in `[0, 1)`. Each value is spread onto a grid oversampled by
//! two with a truncated Gaussian, the grid is transformed with an FFT, and the
//! result is divided by the Gaussian's Fourier transform. The kernel
//! half-width `w` bounds the error by roughly `exp(-2.09 w)`.

use std::f64::consts::PI;
use std::ops::{AddAssign, Mul};

use num_complex::Complex64;

use super::{fft_in_place, lowest_frequency, SpectrumL};
use crate::error::{MmdError, Result};
use crate::par;

const OVERSAMPLING: f64 = 2.0;
/// Largest accepted kernel half-width (grid points per side).
pub const MAX_KERNEL_WIDTH: usize = 24;
const MIN_GRID_MODES: usize = 16;
/// Points per partial grid when spreading.
const SPREAD_RANGE: usize = 1 << 15;

/// Precomputed spreading data for a fixed point set and output length.
#[derive(Debug, Clone)]
pub struct NufftPlan {
    points: Vec<f64>,
    tolerance: f64,
    kernel_width: usize,
    out_len: usize,
    modes: usize,
    grid_len: usize,
    tau: f64,
    /// Left grid index of each point.
    anchor: Vec<u32>,
    /// Kernel weight at the leftmost stencil offset.
    start: Vec<f64>,
    /// Ratio between consecutive stencil weights before the fixed factor.
    ratio: Vec<f64>,
    /// `exp(-(l h)^2 / 4 tau)` for stencil offsets `l = 1-w ..= w`.
    offset_factor: Vec<f64>,
}

/// Half-width needed for a relative accuracy `tolerance`.
fn required_width(tolerance: f64) -> usize {
    let rate = PI * (OVERSAMPLING - 1.0) / (OVERSAMPLING - 0.5);
    ((1.0 / tolerance).ln() / rate).ceil() as usize + 1
}

impl NufftPlan {
    /// Plans a transform of `out_len` frequencies with the kernel width
    /// derived from `tolerance`.
    pub fn new(points: Vec<f64>, out_len: usize, tolerance: f64) -> Result<Self> {
        Self::build(points, out_len, tolerance, None)
    }

    /// Plans with a fixed kernel half-width; rejects widths too narrow for
    /// `tolerance`.
    pub fn with_kernel_width(points: Vec<f64>, out_len: usize, tolerance: f64, kernel_width: usize) -> Result<Self> {
        Self::build(points, out_len, tolerance, Some(kernel_width))
    }

    fn build(points: Vec<f64>, out_len: usize, tolerance: f64, width: Option<usize>) -> Result<Self> {
        if !(1e-14..=1e-4).contains(&tolerance) {
            return Err(MmdError::Tolerance {
                tolerance,
                reason: "must lie in [1e-14, 1e-4]".into(),
            });
        }
        if out_len == 0 {
            return Err(MmdError::InvalidParameter("out_len must be positive".into()));
        }
        if let Some(i) = points.iter().position(|u| !(0.0..1.0).contains(u)) {
            return Err(MmdError::InvalidParameter(format!(
                "point {i} = {} outside [0, 1)",
                points[i]
            )));
        }
        let needed = required_width(tolerance);
        let kernel_width = match width {
            Some(w) if w < needed => {
                return Err(MmdError::Tolerance {
                    tolerance,
                    reason: format!("kernel half-width {w} < required {needed}"),
                })
            }
            Some(w) => w,
            None => needed,
        };
        if kernel_width > MAX_KERNEL_WIDTH {
            return Err(MmdError::Tolerance {
                tolerance,
                reason: format!("kernel half-width {kernel_width} exceeds {MAX_KERNEL_WIDTH}"),
            });
        }

        let modes = out_len.max(MIN_GRID_MODES).next_multiple_of(2);
        let grid_len = (OVERSAMPLING as usize) * modes;
        let h = 2.0 * PI / grid_len as f64;
        let tau = PI * kernel_width as f64
            / ((modes * modes) as f64 * OVERSAMPLING * (OVERSAMPLING - 0.5));
        let w = kernel_width as i64;

        let offset_factor = (1 - w..=w)
            .map(|l| {
                let d = l as f64 * h;
                (-d * d / (4.0 * tau)).exp()
            })
            .collect();

        let mut anchor = Vec::with_capacity(points.len());
        let mut start = Vec::with_capacity(points.len());
        let mut ratio = Vec::with_capacity(points.len());
        for &u in &points {
            let x = 2.0 * PI * u;
            let m0 = ((x / h).floor() as usize).min(grid_len - 1);
            let xi = x - m0 as f64 * h;
            // weight(l) = exp(-(xi - l h)^2 / 4 tau) = start * ratio^(l - 1 + w) * offset(l)
            anchor.push(m0 as u32);
            start.push((-(xi * xi) / (4.0 * tau) - (w - 1) as f64 * xi * h / (2.0 * tau)).exp());
            ratio.push((xi * h / (2.0 * tau)).exp());
        }

        Ok(Self {
            points,
            tolerance,
            kernel_width,
            out_len,
            modes,
            grid_len,
            tau,
            anchor,
            start,
            ratio,
            offset_factor,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn kernel_width(&self) -> usize {
        self.kernel_width
    }

    pub fn oversampling(&self) -> f64 {
        OVERSAMPLING
    }

    pub fn out_len(&self) -> usize {
        self.out_len
    }

    fn spread<T>(&self, values: &[T]) -> Vec<T>
    where
        T: Copy + Default + AddAssign + Mul<f64, Output = T> + Send + Sync,
    {
        let grid_len = self.grid_len;
        let w = self.kernel_width;
        let stencil = 2 * w;
        let partials = par::fold_ranges(values.len(), SPREAD_RANGE, |a, b| {
            let mut grid = vec![T::default(); grid_len];
            for j in a..b {
                let m0 = self.anchor[j] as usize;
                let r = self.ratio[j];
                let mut k = values[j] * self.start[j];
                let first = m0 + grid_len - (w - 1);
                if m0 + 1 >= w && m0 + w < grid_len {
                    let cells = &mut grid[m0 + 1 - w..m0 + 1 + w];
                    for (cell, f) in cells.iter_mut().zip(&self.offset_factor) {
                        *cell += k * *f;
                        k = k * r;
                    }
                } else {
                    for (i, f) in self.offset_factor.iter().enumerate().take(stencil) {
                        grid[(first + i) % grid_len] += k * *f;
                        k = k * r;
                    }
                }
            }
            grid
        });
        let mut iter = partials.into_iter();
        let mut grid = iter.next().unwrap_or_else(|| vec![T::default(); grid_len]);
        for part in iter {
            for (g, p) in grid.iter_mut().zip(part) {
                *g += p;
            }
        }
        grid
    }

    fn finish(&self, grid: Vec<Complex64>, out_len: usize) -> Result<SpectrumL> {
        if out_len > self.out_len {
            return Err(MmdError::InvalidParameter(format!(
                "out_len {out_len} exceeds planned {}",
                self.out_len
            )));
        }
        let mut grid = grid;
        fft_in_place(&mut grid, false);
        let lo = lowest_frequency(out_len);
        let scale = (PI / self.tau).sqrt() / self.grid_len as f64;
        let coeffs = (0..out_len as i64)
            .map(|i| {
                let k = i + lo;
                let idx = k.rem_euclid(self.grid_len as i64) as usize;
                grid[idx] * (scale * ((k * k) as f64 * self.tau).exp())
            })
            .collect();
        debug_assert!(out_len <= self.modes);
        Ok(SpectrumL::from_centered(coeffs))
    }

    /// Transforms complex values.
    pub fn execute(&self, values: &[Complex64], out_len: usize) -> Result<SpectrumL> {
        self.check_values(values.len())?;
        let grid = self.spread(values);
        self.finish(grid, out_len)
    }

    /// Transforms real values; the grid stays real until the FFT.
    pub fn execute_real(&self, values: &[f64], out_len: usize) -> Result<SpectrumL> {
        self.check_values(values.len())?;
        let grid = self.spread(values);
        self.finish(grid.into_iter().map(|v| Complex64::new(v, 0.0)).collect(), out_len)
    }

    fn check_values(&self, len: usize) -> Result<()> {
        if len != self.points.len() {
            return Err(MmdError::LengthMismatch {
                expected: self.points.len(),
                actual: len,
            });
        }
        Ok(())
    }
}

/// `sum_l values[l] e^{-2 pi i xi u_l}` for the centered range of `out_len`.
pub fn nufft_type1(plan: &NufftPlan, values: &[Complex64], out_len: usize) -> Result<SpectrumL> {
    plan.execute(values, out_len)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(points: &[f64], values: &[Complex64], out_len: usize) -> Vec<Complex64> {
        let lo = lowest_frequency(out_len);
        (0..out_len as i64)
            .map(|i| {
                let xi = (i + lo) as f64;
                points
                    .iter()
                    .zip(values)
                    .map(|(u, c)| c * Complex64::from_polar(1.0, -2.0 * PI * xi * u))
                    .sum()
            })
            .collect()
    }

    fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    #[test]
    fn single_point_at_origin() {
        let plan = NufftPlan::new(vec![0.0], 32, 1e-10).unwrap();
        let out = plan.execute(&[Complex64::new(1.0, 0.0)], 32).unwrap();
        for c in out.coeffs() {
            assert!((c - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn uniform_points_match_dft() {
        let len = 64;
        let points: Vec<f64> = (0..len).map(|l| l as f64 / len as f64).collect();
        let values: Vec<Complex64> = (0..len)
            .map(|l| Complex64::new((l as f64).sin(), (0.3 * l as f64).cos()))
            .collect();
        let plan = NufftPlan::new(points, len, 1e-11).unwrap();
        let out = plan.execute(&values, len).unwrap();
        let reference = super::super::dft(&values);
        assert!(rel_err(out.coeffs(), reference.coeffs()) < 1e-11);
    }

    #[test]
    fn wrapped_stencils_near_the_boundary() {
        let points = vec![0.0, 1e-9, 0.999_999, 0.5, 0.01, 0.99];
        let values: Vec<Complex64> = (0..6).map(|i| Complex64::new(1.0 + i as f64, -(i as f64))).collect();
        for out_len in [1, 2, 5, 64, 200] {
            let plan = NufftPlan::new(points.clone(), out_len, 1e-12).unwrap();
            let out = plan.execute(&values, out_len).unwrap();
            assert!(rel_err(out.coeffs(), &direct(&points, &values, out_len)) < 1e-12);
        }
    }

    #[test]
    fn tolerance_sweep() {
        let n = 500;
        let points: Vec<f64> = (0..n).map(|i| (i as f64 * 0.618_033_988_7) % 1.0).collect();
        let values: Vec<Complex64> = (0..n).map(|i| Complex64::new((i as f64 * 0.1).cos(), 0.0)).collect();
        let reference = direct(&points, &values, 128);
        for tol in [1e-4, 1e-6, 1e-9, 1e-12, 1e-13] {
            let plan = NufftPlan::new(points.clone(), 128, tol).unwrap();
            let err = rel_err(plan.execute(&values, 128).unwrap().coeffs(), &reference);
            assert!(err <= tol, "tol {tol:e}: err {err:e}");
        }
    }

    #[test]
    fn real_path_matches_complex_path() {
        let points: Vec<f64> = (0..300).map(|i| (i as f64 * 0.377) % 1.0).collect();
        let values: Vec<f64> = (0..300).map(|i| (i as f64).sin()).collect();
        let plan = NufftPlan::new(points, 50, 1e-9).unwrap();
        let complex: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let a = plan.execute_real(&values, 50).unwrap();
        let b = plan.execute(&complex, 50).unwrap();
        assert!(rel_err(a.coeffs(), b.coeffs()) < 1e-14);
    }

    #[test]
    fn rejects_bad_plans() {
        assert!(matches!(NufftPlan::new(vec![0.5], 8, 1e-3), Err(MmdError::Tolerance { .. })));
        assert!(matches!(NufftPlan::new(vec![0.5], 8, 1e-15), Err(MmdError::Tolerance { .. })));
        assert!(NufftPlan::new(vec![1.0], 8, 1e-9).is_err());
        assert!(NufftPlan::new(vec![-0.1], 8, 1e-9).is_err());
        assert!(matches!(
            NufftPlan::with_kernel_width(vec![0.5], 8, 1e-9, 3),
            Err(MmdError::Tolerance { .. })
        ));
        let plan = NufftPlan::new(vec![0.5], 8, 1e-9).unwrap();
        assert!(plan.execute(&[Complex64::new(1.0, 0.0); 2], 8).is_err());
        assert!(plan.execute(&[Complex64::new(1.0, 0.0)], 16).is_err());
    }
}
