//! Signals, phases, shape functions and multiresolution expansions.
//!
//! A multiresolution intrinsic mode function (MIMF) is
//!
//! ```text
//! f(t) = sum_n a_n cos(2 pi n phi(t)) s_cn(2 pi N phi(t))
//!      + sum_n b_n sin(2 pi n phi(t)) s_sn(2 pi N phi(t))
//! ```
//!
//! where every shape `s` is 2pi-periodic, zero-mean and unit-norm in
//! `L2([0, 2pi])`. Shapes are stored as tables on `L_s` uniform points of one
//! period and evaluated with periodic linear interpolation.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{MmdError, Result};
use crate::par;

/// Minimum number of samples accepted for a signal.
pub const MIN_SIGNAL_LEN: usize = 16;

/// Relative amplitude floor below which an extracted coefficient is zero.
pub const AMPLITUDE_FLOOR: f64 = 1e-8;

/// Root-mean-square norm `(1/sqrt(L)) ||x||_2`, independent of grid size.
pub fn rms_norm(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

/// Discrete `L2([0, 2pi])` norm of a shape table, `sqrt(2pi/L_s) ||s||_2`.
pub fn shape_norm(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    (2.0 * PI / values.len() as f64).sqrt() * values.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(MmdError::NonFinite { index }),
        None => Ok(()),
    }
}

/// Real samples on the uniform grid `t_l = l / L` of `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformSignal {
    samples: Vec<f64>,
}

impl UniformSignal {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.len() < MIN_SIGNAL_LEN {
            return Err(MmdError::SignalTooShort {
                len: samples.len(),
                min: MIN_SIGNAL_LEN,
            });
        }
        check_finite(&samples)?;
        Ok(Self { samples })
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(vec![0.0; len])
    }

    /// Samples `g(t_l)` of a function on the grid.
    pub fn from_fn(len: usize, g: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid(len).map(g).collect())
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn norm(&self) -> f64 {
        rms_norm(&self.samples)
    }
}

/// The sampling grid `t_l = l / L`.
pub fn grid(len: usize) -> impl Iterator<Item = f64> {
    (0..len).map(move |l| l as f64 / len as f64)
}

/// Samples of an instantaneous phase `p(t) = N phi(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTrack {
    values: Vec<f64>,
    fundamental: f64,
}

impl PhaseTrack {
    /// Validates monotonicity, finiteness and the two-cycle minimum.
    pub fn new(values: Vec<f64>, fundamental: f64) -> Result<Self> {
        if values.len() < 2 {
            return Err(MmdError::SignalTooShort {
                len: values.len(),
                min: 2,
            });
        }
        if !(fundamental.is_finite() && fundamental > 0.0) {
            return Err(MmdError::InvalidFundamental(fundamental));
        }
        check_finite(&values)?;
        if let Some(i) = values.windows(2).position(|w| w[1] <= w[0]) {
            return Err(MmdError::PhaseNotIncreasing { index: i + 1 });
        }
        let cycles = values[values.len() - 1] - values[0];
        if cycles < 2.0 {
            return Err(MmdError::PhaseTooFewCycles { cycles });
        }
        Ok(Self {
            values,
            fundamental,
        })
    }

    /// Phase `N phi(t)` sampled on the uniform grid.
    pub fn from_fn(len: usize, fundamental: f64, phi: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid(len).map(|t| fundamental * phi(t)).collect(), fundamental)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn fundamental(&self) -> f64 {
        self.fundamental
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same samples under a different nominal fundamental.
    pub fn with_fundamental(&self, fundamental: f64) -> Result<Self> {
        Self::new(self.values.clone(), fundamental)
    }

    /// Phase advance over `[0, 1)`: the sampled span plus one extrapolated step.
    pub fn total_cycles(&self) -> f64 {
        let n = self.values.len();
        let last_step = self.values[n - 1] - self.values[n - 2];
        self.values[n - 1] + last_step - self.values[0]
    }

    /// Affinely maps the phase into `[0, 1)` so the record spans one period.
    pub fn normalized_coordinates(&self) -> Vec<f64> {
        let p0 = self.values[0];
        let span = self.total_cycles();
        self.values.iter().map(|p| (p - p0) / span).collect()
    }

    /// Checks `1/M <= |phi'| <= M` with `phi' = p' / N` from finite differences.
    pub fn check_slope_bound(&self, bound: f64) -> Result<()> {
        if !(bound >= 1.0) {
            return Err(MmdError::InvalidParameter(format!(
                "slope bound M must be >= 1, got {bound}"
            )));
        }
        let scale = self.values.len() as f64 / self.fundamental;
        for (i, w) in self.values.windows(2).enumerate() {
            let slope = (w[1] - w[0]) * scale;
            if slope < 1.0 / bound || slope > bound {
                return Err(MmdError::InvalidParameter(format!(
                    "phi' = {slope:.4} at sample {i} outside [1/{bound}, {bound}]"
                )));
            }
        }
        Ok(())
    }
}

/// A 2pi-periodic shape function sampled at `2 pi k / L_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeTable {
    values: Vec<f64>,
    normalized: bool,
}

impl ShapeTable {
    /// Builds a zero-mean table (the mean is removed).
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(MmdError::EmptyInput);
        }
        check_finite(&values)?;
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        values.iter_mut().for_each(|v| *v -= mean);
        Ok(Self {
            values,
            normalized: false,
        })
    }

    /// Zero-mean table rescaled to unit discrete `L2([0, 2pi])` norm.
    pub fn normalized(values: Vec<f64>) -> Result<Self> {
        let table = Self::new(values)?;
        let norm = table.norm();
        if norm == 0.0 {
            return Err(MmdError::DegenerateShape("constant shape".into()));
        }
        Ok(Self {
            values: table.values.iter().map(|v| v / norm).collect(),
            normalized: true,
        })
    }

    /// Samples `g(2 pi k / L_s)` of a periodic function, normalized.
    pub fn from_fn(len: usize, g: impl Fn(f64) -> f64) -> Result<Self> {
        Self::normalized((0..len).map(|k| g(2.0 * PI * k as f64 / len as f64)).collect())
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![0.0; len],
            normalized: false,
        }
    }

    pub(crate) fn from_raw_parts(values: Vec<f64>, normalized: bool) -> Self {
        Self { values, normalized }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    pub fn norm(&self) -> f64 {
        shape_norm(&self.values)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Evaluates `s(2 pi x)` for a phase `x` in cycles, by periodic linear
    /// interpolation.
    pub fn eval_cycles(&self, x: f64) -> f64 {
        let (i0, i1, w) = interp_weights(x, self.values.len());
        self.values[i0] * (1.0 - w) + self.values[i1] * w
    }

    /// Evaluates `s(theta)`.
    pub fn eval(&self, theta: f64) -> f64 {
        self.eval_cycles(theta / (2.0 * PI))
    }

    /// Re-checks the mean-zero and (when flagged) unit-norm invariants.
    pub fn check_invariants(&self) -> Result<()> {
        let max = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let sum = self.values.iter().sum::<f64>();
        if sum.abs() / self.values.len() as f64 > 1e-10 * max.max(f64::MIN_POSITIVE) {
            return Err(MmdError::DegenerateShape(format!("mean {sum:e} is not zero")));
        }
        if self.normalized && (self.norm() - 1.0).abs() > 1e-10 {
            return Err(MmdError::DegenerateShape(format!(
                "norm {} is not one",
                self.norm()
            )));
        }
        Ok(())
    }

    pub fn spectrum(&self) -> ShapeSpectrum {
        ShapeSpectrum::from_table(self)
    }
}

/// Index pair and weight for periodic linear interpolation on `len` points.
#[inline]
pub(crate) fn interp_weights(x: f64, len: usize) -> (usize, usize, f64) {
    let pos = x.rem_euclid(1.0) * len as f64;
    let mut i0 = pos.floor() as usize;
    let mut w = pos - i0 as f64;
    if i0 >= len {
        i0 = len - 1;
        w = 1.0;
    }
    let i1 = if i0 + 1 == len { 0 } else { i0 + 1 };
    (i0, i1, w)
}

/// Fourier coefficients of a shape, `s(theta) = sum_k c_k e^{i k theta}`,
/// indexed `k = -L_s/2 .. L_s/2 - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSpectrum {
    coeffs: Vec<Complex64>,
}

impl ShapeSpectrum {
    pub fn from_table(table: &ShapeTable) -> Self {
        let ls = table.len();
        let input: Vec<Complex64> = table.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let spec = crate::spectral::dft(&input);
        Self {
            coeffs: spec.coeffs().iter().map(|c| c / ls as f64).collect(),
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn lowest_index(&self) -> i64 {
        -((self.coeffs.len() / 2) as i64)
    }

    pub fn get(&self, k: i64) -> Complex64 {
        let idx = k - self.lowest_index();
        if idx < 0 || idx as usize >= self.coeffs.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[idx as usize]
        }
    }

    /// `sum_k |c_k|`, the Wiener-algebra bound that must not exceed `M`.
    pub fn absolute_sum(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    /// gcd of `|k|` over harmonics whose magnitude exceeds `threshold`.
    pub fn support_gcd(&self, threshold: f64) -> u64 {
        let lo = self.lowest_index();
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > threshold)
            .map(|(i, _)| (i as i64 + lo).unsigned_abs())
            .filter(|&k| k != 0)
            .fold(0, gcd)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Which modulation a scale term carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Cos,
    Sin,
}

impl Parity {
    #[inline]
    pub fn modulate(self, angle: f64) -> f64 {
        match self {
            Parity::Cos => angle.cos(),
            Parity::Sin => angle.sin(),
        }
    }
}

/// Coefficients and shapes attached to one scale index `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleTerm {
    pub n: i64,
    pub a: f64,
    pub cos_shape: ShapeTable,
    pub b: f64,
    pub sin_shape: ShapeTable,
}

impl ScaleTerm {
    pub fn zero(n: i64, ls: usize) -> Self {
        Self {
            n,
            a: 0.0,
            cos_shape: ShapeTable::zeros(ls),
            b: 0.0,
            sin_shape: ShapeTable::zeros(ls),
        }
    }

    pub fn coefficient(&self, parity: Parity) -> f64 {
        match parity {
            Parity::Cos => self.a,
            Parity::Sin => self.b,
        }
    }

    pub fn shape(&self, parity: Parity) -> &ShapeTable {
        match parity {
            Parity::Cos => &self.cos_shape,
            Parity::Sin => &self.sin_shape,
        }
    }

    /// The product `a_n s_cn` (or `b_n s_sn`) as a table.
    pub fn product(&self, parity: Parity) -> Vec<f64> {
        let c = self.coefficient(parity);
        self.shape(parity).values().iter().map(|v| c * v).collect()
    }
}

/// Multiresolution expansion of one component over a set of scale indices.
#[derive(Debug, Clone, PartialEq)]
pub struct MimfExpansion {
    /// Nominal fundamental `N`; modulations use `phi = p / N`.
    pub fundamental: f64,
    /// Terms sorted by ascending scale index, one per index.
    pub terms: Vec<ScaleTerm>,
}

impl MimfExpansion {
    pub fn new(fundamental: f64, mut terms: Vec<ScaleTerm>) -> Result<Self> {
        if !(fundamental.is_finite() && fundamental > 0.0) {
            return Err(MmdError::InvalidFundamental(fundamental));
        }
        terms.sort_by_key(|t| t.n);
        if terms.windows(2).any(|w| w[0].n == w[1].n) {
            return Err(MmdError::InvalidParameter("duplicate scale index".into()));
        }
        for t in &terms {
            if !(t.a >= 0.0 && t.b >= 0.0) {
                return Err(MmdError::InvalidParameter(format!(
                    "negative coefficient at scale {}",
                    t.n
                )));
            }
            if t.cos_shape.len() != t.sin_shape.len() {
                return Err(MmdError::LengthMismatch {
                    expected: t.cos_shape.len(),
                    actual: t.sin_shape.len(),
                });
            }
        }
        Ok(Self { fundamental, terms })
    }

    pub fn empty(fundamental: f64) -> Self {
        Self {
            fundamental,
            terms: Vec::new(),
        }
    }

    pub fn scale_indices(&self) -> Vec<i64> {
        self.terms.iter().map(|t| t.n).collect()
    }

    pub fn term(&self, n: i64) -> Option<&ScaleTerm> {
        self.terms.iter().find(|t| t.n == n)
    }

    pub fn max_band(&self) -> Option<usize> {
        self.terms.iter().map(|t| t.n.unsigned_abs() as usize).max()
    }

    /// Terms with `|n| <= band`.
    pub fn restrict(&self, band: usize) -> Self {
        Self {
            fundamental: self.fundamental,
            terms: self
                .terms
                .iter()
                .filter(|t| t.n.unsigned_abs() as usize <= band)
                .cloned()
                .collect(),
        }
    }

    /// Union of two expansions with disjoint index sets.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::new(self.fundamental, terms)
    }
}

/// Why a recursive decomposition stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ToleranceMet,
    Stagnated,
    MaxIterations,
}

/// Relative residual history of an outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrace {
    /// `||r^(j)|| / ||f||` for `j = 0, 1, ...`; entry 0 is the input itself.
    pub relative_residuals: Vec<f64>,
    pub stop_reason: StopReason,
}

impl ConvergenceTrace {
    pub fn iterations(&self) -> usize {
        self.relative_residuals.len().saturating_sub(1)
    }

    pub fn final_relative_residual(&self) -> f64 {
        *self.relative_residuals.last().unwrap_or(&0.0)
    }

    pub fn eta(&self) -> Result<Vec<f64>> {
        crate::rdsa::convergence_eta(self)
    }
}

/// Output of a multi-component decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    /// One expansion per component, in input order.
    pub expansions: Vec<MimfExpansion>,
    /// Reconstructed components `f_k^est`, in input order.
    pub components: Vec<UniformSignal>,
    /// `f - sum_k f_k^est`.
    pub residual: UniformSignal,
    pub trace: ConvergenceTrace,
}

impl DecompositionResult {
    pub fn relative_residual(&self, input: &UniformSignal) -> f64 {
        let c = input.norm();
        if c == 0.0 {
            0.0
        } else {
            self.residual.norm() / c
        }
    }
}

/// One modulated shape term ready for synthesis.
pub(crate) struct SynthTerm<'a> {
    pub n: i64,
    pub parity: Parity,
    pub coefficient: f64,
    pub table: &'a [f64],
}

/// Evaluates `sum coefficient * trig(2 pi n p / N) * table(p)` on the phase
/// samples.
pub(crate) fn synthesize_terms(terms: &[SynthTerm<'_>], phase: &[f64], fundamental: f64) -> Vec<f64> {
    let mut out = vec![0.0; phase.len()];
    let active: Vec<&SynthTerm<'_>> = terms
        .iter()
        .filter(|t| t.coefficient != 0.0 && !(t.parity == Parity::Sin && t.n == 0))
        .collect();
    if active.is_empty() {
        return out;
    }
    let ls = active[0].table.len();
    par::for_each_chunk_mut(&mut out, |offset, chunk| {
        for (i, slot) in chunk.iter_mut().enumerate() {
            let p = phase[offset + i];
            let (i0, i1, w) = interp_weights(p, ls);
            let base = 2.0 * PI * p / fundamental;
            let mut acc = 0.0;
            for t in &active {
                let s = t.table[i0] * (1.0 - w) + t.table[i1] * w;
                acc += t.coefficient * t.parity.modulate(base * t.n as f64) * s;
            }
            *slot = acc;
        }
    });
    out
}

fn expansion_terms(expansion: &MimfExpansion) -> Vec<SynthTerm<'_>> {
    let mut out = Vec::with_capacity(2 * expansion.terms.len());
    for t in &expansion.terms {
        out.push(SynthTerm {
            n: t.n,
            parity: Parity::Cos,
            coefficient: t.a,
            table: t.cos_shape.values(),
        });
        out.push(SynthTerm {
            n: t.n,
            parity: Parity::Sin,
            coefficient: t.b,
            table: t.sin_shape.values(),
        });
    }
    out
}

/// Evaluates an MIMF expansion on the sampling grid of `phase`.
pub fn synthesize_mimf(expansion: &MimfExpansion, phase: &PhaseTrack, len: usize) -> Result<UniformSignal> {
    if phase.len() != len {
        return Err(MmdError::LengthMismatch {
            expected: len,
            actual: phase.len(),
        });
    }
    check_finite(phase.values())?;
    let terms = expansion_terms(expansion);
    UniformSignal::new(synthesize_terms(&terms, phase.values(), expansion.fundamental))
}

/// The banded approximation `M_band`: synthesis restricted to `|n| <= band`.
pub fn banded_approximation(expansion: &MimfExpansion, phase: &PhaseTrack, band: usize) -> Result<UniformSignal> {
    let max = expansion.max_band().unwrap_or(0);
    if band > max {
        return Err(MmdError::BandExceedsStored { band, max });
    }
    synthesize_mimf(&expansion.restrict(band), phase, phase.len())
}

/// Pointwise `f - approx`.
pub fn residual_operator(f: &UniformSignal, approx: &UniformSignal) -> Result<UniformSignal> {
    if f.len() != approx.len() {
        return Err(MmdError::LengthMismatch {
            expected: f.len(),
            actual: approx.len(),
        });
    }
    UniformSignal::new(
        f.samples()
            .iter()
            .zip(approx.samples())
            .map(|(a, b)| a - b)
            .collect(),
    )
}

/// Splits a raw shape into its discrete `L2` norm and a unit shape.
///
/// Returns `(0, zeros)` when the norm does not exceed `floor`.
pub fn normalize_shape_with_floor(raw: &ShapeTable, floor: f64) -> (f64, ShapeTable) {
    let (c, values) = normalize_values(raw.values(), floor);
    match values {
        Some(v) => (c, ShapeTable::from_raw_parts(v, true)),
        None => (0.0, ShapeTable::zeros(raw.len())),
    }
}

/// [`normalize_shape_with_floor`] with an exact-zero floor.
pub fn normalize_shape(raw: &ShapeTable) -> (f64, ShapeTable) {
    normalize_shape_with_floor(raw, 0.0)
}

pub(crate) fn normalize_values(raw: &[f64], floor: f64) -> (f64, Option<Vec<f64>>) {
    let c = shape_norm(raw);
    if !(c > floor) || !c.is_finite() {
        return (0.0, None);
    }
    (c, Some(raw.iter().map(|v| v / c).collect()))
}
