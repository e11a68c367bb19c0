//! Diffeomorphism-based spectral analysis of a single MIMF.
//!
//! For a scale index `n` the signal is modulated by `cos(2 pi n phi)` (or the
//! sine), and the Fourier coefficients of the warped product are read off at
//! the multiples `N_eff k` of the fundamental. Evaluating the transform at
//! `N_eff k` on warped coordinates is the same as a length-`L_s` type-1 NUFFT
//! on the folded phases `p(t_l) mod 1`, which is what is computed here. After
//! dropping the mean bin and scaling by `2^{|sgn n|} / L`, an inverse DFT
//! gives the product `a_n s_cn` on `L_s` points of one period.
//!
//! When both `n` and `-n` are requested together the two indices share one
//! modulation (`cos(-x) = cos(x)`, `sin(-x) = -sin(x)`), so each receives half
//! of the estimate and their partial sums add up to the full term.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{MmdError, Result};
use crate::model::{
    normalize_values, rms_norm, synthesize_terms, Parity, PhaseTrack, ScaleTerm, ShapeTable, SynthTerm,
    UniformSignal, AMPLITUDE_FLOOR,
};
use crate::par;
use crate::spectral::{fft_in_place, NufftPlan};

/// Default accuracy of the inner NUFFT.
pub const DEFAULT_NUFFT_TOLERANCE: f64 = 1e-9;

/// Nearest integer to the phase advance over `[0, 1)`.
pub fn effective_fundamental(phase: &PhaseTrack) -> Result<u64> {
    let n = phase.total_cycles().round();
    if !(n >= 2.0) {
        return Err(MmdError::InvalidFundamental(n));
    }
    Ok(n as u64)
}

/// Folded phase `p mod 1`, kept inside `[0, 1)`.
#[inline]
pub(crate) fn fold_phase(p: f64) -> f64 {
    let v = p.rem_euclid(1.0);
    if v >= 1.0 {
        0.0
    } else {
        v
    }
}

/// Inputs of one DSA pass.
#[derive(Debug, Clone)]
pub struct DsaRequest<'a> {
    pub signal: &'a UniformSignal,
    pub phase: &'a PhaseTrack,
    /// `N` in `phi = p / N`.
    pub fundamental: f64,
    /// Shape bandwidth `L_s` (even).
    pub shape_len: usize,
    pub scale_set: Vec<i64>,
    pub nufft_tolerance: f64,
}

/// Coefficients, unit shapes and partial sums from one DSA pass.
#[derive(Debug, Clone, PartialEq)]
pub struct DsaOutput {
    /// One term per requested index, ascending.
    pub terms: Vec<ScaleTerm>,
    pub f_c: Vec<f64>,
    pub f_s: Vec<f64>,
}

impl DsaOutput {
    pub fn term(&self, n: i64) -> Option<&ScaleTerm> {
        self.terms.iter().find(|t| t.n == n)
    }
}

/// Phase-dependent state shared by every extraction against one phase.
#[derive(Debug, Clone)]
pub struct DsaContext {
    plan: NufftPlan,
    phase: Vec<f64>,
    fundamental: f64,
    effective: u64,
    shape_len: usize,
}

impl DsaContext {
    pub fn new(phase: &PhaseTrack, fundamental: f64, shape_len: usize, nufft_tolerance: f64) -> Result<Self> {
        if !(fundamental.is_finite() && fundamental > 0.0) {
            return Err(MmdError::InvalidFundamental(fundamental));
        }
        if shape_len < 2 || shape_len % 2 != 0 {
            return Err(MmdError::InvalidParameter(format!(
                "shape bandwidth L_s must be even and >= 2, got {shape_len}"
            )));
        }
        let effective = effective_fundamental(phase)?;
        let points = phase.values().iter().map(|&p| fold_phase(p)).collect();
        let plan = NufftPlan::new(points, shape_len, nufft_tolerance)?;
        Ok(Self {
            plan,
            phase: phase.values().to_vec(),
            fundamental,
            effective,
            shape_len,
        })
    }

    pub fn from_request(req: &DsaRequest<'_>) -> Result<Self> {
        Self::new(req.phase, req.fundamental, req.shape_len, req.nufft_tolerance)
    }

    pub fn effective_fundamental(&self) -> u64 {
        self.effective
    }

    pub fn fundamental(&self) -> f64 {
        self.fundamental
    }

    pub fn shape_len(&self) -> usize {
        self.shape_len
    }

    pub fn len(&self) -> usize {
        self.phase.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phase.is_empty()
    }

    pub fn check_scale(&self, n: i64) -> Result<()> {
        let limit = self.effective as f64 / 2.0;
        if (n.unsigned_abs() as f64) >= limit {
            return Err(MmdError::Bandwidth { n, limit });
        }
        Ok(())
    }

    fn check_signal(&self, signal: &[f64]) -> Result<()> {
        if signal.len() != self.phase.len() {
            return Err(MmdError::LengthMismatch {
                expected: self.phase.len(),
                actual: signal.len(),
            });
        }
        Ok(())
    }

    /// Unnormalized product `weight * F^{-1}(T_N F(trig * f))` on `L_s` points.
    pub(crate) fn raw_product(&self, signal: &[f64], n: i64, parity: Parity, weight: f64) -> Result<Vec<f64>> {
        let ls = self.shape_len;
        if parity == Parity::Sin && n == 0 {
            return Ok(vec![0.0; ls]);
        }
        let modulated: Vec<f64> = if n == 0 {
            signal.to_vec()
        } else {
            let freq = 2.0 * PI * n as f64 / self.fundamental;
            signal
                .iter()
                .zip(&self.phase)
                .map(|(f, p)| parity.modulate(freq * p) * f)
                .collect()
        };
        let spectrum = self.plan.execute_real(&modulated, ls)?;
        let scale = weight / signal.len() as f64;
        let mut natural = spectrum.to_natural();
        natural[0] = Complex64::new(0.0, 0.0);
        natural.iter_mut().for_each(|c| *c *= scale);
        // shape(theta_j) = sum_k X(k) e^{i k theta_j}
        fft_in_place(&mut natural, true);
        Ok(natural.iter().map(|c| c.re).collect())
    }

    /// Extracts `(coefficient, unit shape)` for one index and parity with the
    /// single-index weight `2^{|sgn n|}`.
    pub fn extract_single(&self, signal: &[f64], n: i64, parity: Parity) -> Result<(f64, ShapeTable)> {
        self.check_signal(signal)?;
        self.check_scale(n)?;
        let weight = if n == 0 { 1.0 } else { 2.0 };
        let raw = self.raw_product(signal, n, parity, weight)?;
        Ok(self.normalize(&raw, rms_norm(signal)))
    }

    fn normalize(&self, raw: &[f64], signal_norm: f64) -> (f64, ShapeTable) {
        match normalize_values(raw, AMPLITUDE_FLOOR * signal_norm) {
            (c, Some(unit)) => (c, ShapeTable::from_raw_parts(unit, true)),
            _ => (0.0, ShapeTable::zeros(self.shape_len)),
        }
    }

    /// One DSA pass over `scale_set`.
    pub fn run(&self, signal: &[f64], scale_set: &[i64]) -> Result<DsaOutput> {
        self.check_signal(signal)?;
        let mut set = scale_set.to_vec();
        set.sort_unstable();
        set.dedup();
        for &n in &set {
            self.check_scale(n)?;
        }
        let tasks: Vec<(i64, Parity)> = set
            .iter()
            .flat_map(|&n| [(n, Parity::Cos), (n, Parity::Sin)])
            .collect();
        let norm = rms_norm(signal);
        let extracted = par::map(&tasks, |&(n, parity)| {
            let paired = n != 0 && set.binary_search(&-n).is_ok();
            let weight = match (n, paired) {
                (0, _) => 1.0,
                (_, true) => 1.0,
                (_, false) => 2.0,
            };
            self.raw_product(signal, n, parity, weight)
                .map(|raw| self.normalize(&raw, norm))
        });
        let mut extracted = extracted.into_iter().collect::<Result<Vec<_>>>()?.into_iter();

        let mut terms = Vec::with_capacity(set.len());
        for &n in &set {
            let (a, cos_shape) = extracted.next().expect("cos task");
            let (b, sin_shape) = extracted.next().expect("sin task");
            terms.push(ScaleTerm {
                n,
                a,
                cos_shape,
                b,
                sin_shape,
            });
        }

        let cos_terms: Vec<SynthTerm<'_>> = terms
            .iter()
            .map(|t| SynthTerm {
                n: t.n,
                parity: Parity::Cos,
                coefficient: t.a,
                table: t.cos_shape.values(),
            })
            .collect();
        let sin_terms: Vec<SynthTerm<'_>> = terms
            .iter()
            .map(|t| SynthTerm {
                n: t.n,
                parity: Parity::Sin,
                coefficient: t.b,
                table: t.sin_shape.values(),
            })
            .collect();
        let f_c = synthesize_terms(&cos_terms, &self.phase, self.fundamental);
        let f_s = synthesize_terms(&sin_terms, &self.phase, self.fundamental);
        Ok(DsaOutput { terms, f_c, f_s })
    }
}

/// Extracts one coefficient and unit shape (`2^{|sgn n|}` weighting).
pub fn extract_single(req: &DsaRequest<'_>, n: i64, parity: Parity) -> Result<(f64, ShapeTable)> {
    DsaContext::from_request(req)?.extract_single(req.signal.samples(), n, parity)
}

/// One full DSA pass: every index and parity, plus the partial sums.
pub fn run_dsa(req: &DsaRequest<'_>) -> Result<DsaOutput> {
    DsaContext::from_request(req)?.run(req.signal.samples(), &req.scale_set)
}
