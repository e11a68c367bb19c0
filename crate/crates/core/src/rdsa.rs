//! Recursive residual correction around DSA for superpositions of MIMFs.
//!
//! [`rdsa1`] sweeps the components once per outer iteration, each time
//! running DSA for the whole scale set on the running residual. [`rdsa2`]
//! wraps `rdsa1` in a loop over blocks of scale indices so that low scales are
//! cleared from the residual before higher ones are estimated.
//!
//! Raw shape tables (coefficient times unit shape) are accumulated across
//! iterations and normalized once at the end.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dsa::{DsaContext, DEFAULT_NUFFT_TOLERANCE};
use crate::error::{MmdError, Result};
use crate::model::{
    normalize_values, rms_norm, ConvergenceTrace, DecompositionResult, MimfExpansion, PhaseTrack, ScaleTerm,
    ShapeTable, StopReason, UniformSignal,
};

/// Iteration budgets, bands and thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdsaConfig {
    /// Iteration cap of [`rdsa1`].
    pub j1: usize,
    /// Outer iteration cap of [`rdsa2`].
    pub j2: usize,
    pub m0: usize,
    /// Upper ring bound; `None` selects the full band `-M0..=M0`.
    pub m1: Option<usize>,
    /// Block size of [`rdsa2`].
    pub block: usize,
    /// Tolerance and stagnation margin of [`rdsa1`].
    pub epsilon: f64,
    /// Outer tolerance of [`rdsa2`].
    pub epsilon1: f64,
    /// Tolerance handed to the inner [`rdsa1`] calls of [`rdsa2`].
    pub epsilon2: f64,
    /// Shape bandwidth `L_s`.
    pub shape_len: usize,
    pub nufft_tolerance: f64,
}

impl Default for RdsaConfig {
    fn default() -> Self {
        Self {
            j1: 10,
            j2: 200,
            m0: 0,
            m1: None,
            block: 1,
            epsilon: 1e-6,
            epsilon1: 1e-6,
            epsilon2: 1e-6,
            shape_len: 2000,
            nufft_tolerance: DEFAULT_NUFFT_TOLERANCE,
        }
    }
}

impl RdsaConfig {
    /// Sets `epsilon`, `epsilon1` and `epsilon2` together.
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self.epsilon1 = epsilon;
        self.epsilon2 = epsilon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.j1 == 0 || self.j2 == 0 {
            return Err(MmdError::InvalidParameter("J1 and J2 must be at least 1".into()));
        }
        if self.block == 0 {
            return Err(MmdError::InvalidParameter("block size must be at least 1".into()));
        }
        for (name, v) in [
            ("epsilon", self.epsilon),
            ("epsilon1", self.epsilon1),
            ("epsilon2", self.epsilon2),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(MmdError::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        self.band()?;
        Ok(())
    }

    pub fn band(&self) -> Result<Band> {
        match self.m1 {
            None => Ok(Band::Full { m0: self.m0 }),
            Some(m1) => Band::ring(self.m0, m1),
        }
    }
}

/// A scale-index set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    /// `{-m0, ..., m0}`.
    Full { m0: usize },
    /// `{-m1+1, ..., -m0} ∪ {m0, ..., m1-1}`.
    Ring { m0: usize, m1: usize },
}

impl Band {
    pub fn ring(m0: usize, m1: usize) -> Result<Self> {
        if m1 <= m0 {
            return Err(MmdError::InvalidBand(format!("ring needs M1 > M0, got M0={m0}, M1={m1}")));
        }
        Ok(Band::Ring { m0, m1 })
    }

    /// Sorted, duplicate-free indices.
    pub fn scale_set(&self) -> Vec<i64> {
        let mut set: Vec<i64> = match *self {
            Band::Full { m0 } => (-(m0 as i64)..=m0 as i64).collect(),
            Band::Ring { m0, m1 } => {
                let (m0, m1) = (m0 as i64, m1 as i64);
                (-m1 + 1..=-m0).chain(m0..m1).collect()
            }
        };
        set.sort_unstable();
        set.dedup();
        set
    }
}

/// Snapshot handed to an observer after every outer iteration.
#[derive(Debug)]
pub struct IterationState<'a> {
    pub iteration: usize,
    pub relative_residual: f64,
    /// Running residual `r^(j)`.
    pub residual: &'a [f64],
    /// Running estimates `f_k^est`, in processing (ascending `N_eff`) order.
    pub estimates: &'a [Vec<f64>],
}

/// Per-component accumulators, in processing order.
struct Accumulator {
    cos: BTreeMap<i64, Vec<f64>>,
    sin: BTreeMap<i64, Vec<f64>>,
    estimate: Vec<f64>,
}

impl Accumulator {
    fn new(len: usize) -> Self {
        Self {
            cos: BTreeMap::new(),
            sin: BTreeMap::new(),
            estimate: vec![0.0; len],
        }
    }
}

fn add_scaled(acc: &mut BTreeMap<i64, Vec<f64>>, n: i64, coefficient: f64, unit: &ShapeTable) {
    let slot = acc.entry(n).or_insert_with(|| vec![0.0; unit.len()]);
    for (s, u) in slot.iter_mut().zip(unit.values()) {
        *s += coefficient * u;
    }
}

/// Validated inputs with components ordered by ascending `N_eff`.
struct Prepared {
    contexts: Vec<DsaContext>,
    /// `order[i]` is the input index of the `i`-th processed component.
    order: Vec<usize>,
}

fn prepare(f: &UniformSignal, phases: &[PhaseTrack], cfg: &RdsaConfig, max_scale: usize) -> Result<Prepared> {
    cfg.validate()?;
    if phases.is_empty() {
        return Err(MmdError::TooFewComponents { min: 1, actual: 0 });
    }
    let mut contexts = Vec::with_capacity(phases.len());
    for phase in phases {
        if phase.len() != f.len() {
            return Err(MmdError::LengthMismatch {
                expected: f.len(),
                actual: phase.len(),
            });
        }
        let ctx = DsaContext::new(phase, phase.fundamental(), cfg.shape_len, cfg.nufft_tolerance)?;
        ctx.check_scale(max_scale as i64)?;
        contexts.push(ctx);
    }
    let mut order: Vec<usize> = (0..phases.len()).collect();
    // stable: ties keep input order
    order.sort_by_key(|&i| contexts[i].effective_fundamental());
    let mut slots: Vec<Option<DsaContext>> = contexts.into_iter().map(Some).collect();
    let contexts = order.iter().map(|&i| slots[i].take().expect("unique index")).collect();
    Ok(Prepared { contexts, order })
}

/// The `rdsa1` loop on a running residual, accumulating into `acc`.
#[allow(clippy::too_many_arguments)]
fn rdsa1_core(
    residual: &mut [f64],
    contexts: &[DsaContext],
    acc: &mut [Accumulator],
    set: &[i64],
    epsilon: f64,
    max_iter: usize,
    mut observer: Option<&mut dyn FnMut(&IterationState<'_>)>,
) -> Result<ConvergenceTrace> {
    let c = rms_norm(residual);
    if c == 0.0 {
        return Ok(ConvergenceTrace {
            relative_residuals: vec![0.0],
            stop_reason: StopReason::ToleranceMet,
        });
    }
    let mut rel = vec![1.0];
    let mut e = 1.0;
    let mut stop = StopReason::MaxIterations;
    for j in 1..=max_iter {
        for (ctx, a) in contexts.iter().zip(acc.iter_mut()) {
            let out = ctx.run(residual, set)?;
            for t in &out.terms {
                add_scaled(&mut a.cos, t.n, t.a, &t.cos_shape);
                add_scaled(&mut a.sin, t.n, t.b, &t.sin_shape);
            }
            for (((r, est), fc), fs) in residual
                .iter_mut()
                .zip(a.estimate.iter_mut())
                .zip(&out.f_c)
                .zip(&out.f_s)
            {
                *est += fc + fs;
                *r = *r - fc - fs;
            }
        }
        let ratio = rms_norm(residual) / c;
        rel.push(ratio);
        if let Some(obs) = observer.as_mut() {
            notify(obs, j, ratio, residual, acc);
        }
        if ratio <= epsilon {
            stop = StopReason::ToleranceMet;
            break;
        }
        if ratio >= e - epsilon {
            stop = StopReason::Stagnated;
            break;
        }
        e = ratio;
    }
    Ok(ConvergenceTrace {
        relative_residuals: rel,
        stop_reason: stop,
    })
}

fn notify(
    observer: &mut dyn FnMut(&IterationState<'_>),
    iteration: usize,
    relative_residual: f64,
    residual: &[f64],
    acc: &[Accumulator],
) {
    let estimates: Vec<Vec<f64>> = acc.iter().map(|a| a.estimate.clone()).collect();
    observer(&IterationState {
        iteration,
        relative_residual,
        residual,
        estimates: &estimates,
    });
}

fn finish(
    f: &UniformSignal,
    prepared: &Prepared,
    acc: Vec<Accumulator>,
    set: &[i64],
    shape_len: usize,
    trace: ConvergenceTrace,
) -> Result<DecompositionResult> {
    let k = prepared.order.len();
    let mut expansions: Vec<Option<MimfExpansion>> = vec![None; k];
    let mut components: Vec<Option<Vec<f64>>> = vec![None; k];
    for ((a, ctx), &input_idx) in acc.into_iter().zip(&prepared.contexts).zip(&prepared.order) {
        let mut terms = Vec::with_capacity(set.len());
        for &n in set {
            let mut term = ScaleTerm::zero(n, shape_len);
            if let Some(raw) = a.cos.get(&n) {
                if let (c, Some(unit)) = normalize_values(raw, 0.0) {
                    term.a = c;
                    term.cos_shape = ShapeTable::from_raw_parts(unit, true);
                }
            }
            if let Some(raw) = a.sin.get(&n) {
                if let (c, Some(unit)) = normalize_values(raw, 0.0) {
                    term.b = c;
                    term.sin_shape = ShapeTable::from_raw_parts(unit, true);
                }
            }
            terms.push(term);
        }
        expansions[input_idx] = Some(MimfExpansion::new(ctx.fundamental(), terms)?);
        components[input_idx] = Some(a.estimate);
    }
    let components: Vec<Vec<f64>> = components.into_iter().map(|c| c.expect("filled")).collect();
    let mut residual = f.samples().to_vec();
    for comp in &components {
        for (r, v) in residual.iter_mut().zip(comp) {
            *r -= v;
        }
    }
    Ok(DecompositionResult {
        expansions: expansions.into_iter().map(|e| e.expect("filled")).collect(),
        components: components
            .into_iter()
            .map(UniformSignal::new)
            .collect::<Result<Vec<_>>>()?,
        residual: UniformSignal::new(residual)?,
        trace,
    })
}

fn max_abs(set: &[i64]) -> usize {
    set.iter().map(|n| n.unsigned_abs() as usize).max().unwrap_or(0)
}

/// First recursive scheme over the band selected by `cfg.m0` / `cfg.m1`.
pub fn rdsa1(f: &UniformSignal, phases: &[PhaseTrack], cfg: &RdsaConfig) -> Result<DecompositionResult> {
    rdsa1_observed(f, phases, cfg, &mut |_| {})
}

/// [`rdsa1`] with an explicit band.
pub fn rdsa1_band(f: &UniformSignal, phases: &[PhaseTrack], cfg: &RdsaConfig, band: Band) -> Result<DecompositionResult> {
    rdsa1_impl(f, phases, cfg, band, &mut |_| {})
}

/// [`rdsa1`] reporting every outer iteration to `observer`.
pub fn rdsa1_observed(
    f: &UniformSignal,
    phases: &[PhaseTrack],
    cfg: &RdsaConfig,
    observer: &mut dyn FnMut(&IterationState<'_>),
) -> Result<DecompositionResult> {
    let band = cfg.band()?;
    rdsa1_impl(f, phases, cfg, band, observer)
}

fn rdsa1_impl(
    f: &UniformSignal,
    phases: &[PhaseTrack],
    cfg: &RdsaConfig,
    band: Band,
    observer: &mut dyn FnMut(&IterationState<'_>),
) -> Result<DecompositionResult> {
    let set = band.scale_set();
    let prepared = prepare(f, phases, cfg, max_abs(&set))?;
    let mut acc: Vec<Accumulator> = prepared.contexts.iter().map(|_| Accumulator::new(f.len())).collect();
    let mut residual = f.samples().to_vec();
    let trace = rdsa1_core(
        &mut residual,
        &prepared.contexts,
        &mut acc,
        &set,
        cfg.epsilon,
        cfg.j1,
        Some(observer),
    )?;
    finish(f, &prepared, acc, &set, cfg.shape_len, trace)
}

/// Second recursive scheme: blocks of `cfg.block` scale indices up to
/// `cfg.m0`, each handled by an inner `rdsa1` run.
pub fn rdsa2(f: &UniformSignal, phases: &[PhaseTrack], cfg: &RdsaConfig) -> Result<DecompositionResult> {
    rdsa2_observed(f, phases, cfg, &mut |_| {})
}

/// Ring bands `(m, min(m + b, M0 + 1))` for `m = 0, b, 2b, ...`; the last
/// block is truncated when `b` does not divide `M0 + 1`.
pub fn blocks(m0: usize, block: usize) -> Vec<Band> {
    (0..=m0)
        .step_by(block.max(1))
        .map(|m| Band::Ring {
            m0: m,
            m1: (m + block).min(m0 + 1),
        })
        .collect()
}

/// [`rdsa2`] reporting every outer iteration to `observer`.
pub fn rdsa2_observed(
    f: &UniformSignal,
    phases: &[PhaseTrack],
    cfg: &RdsaConfig,
    observer: &mut dyn FnMut(&IterationState<'_>),
) -> Result<DecompositionResult> {
    let full = Band::Full { m0: cfg.m0 }.scale_set();
    let prepared = prepare(f, phases, cfg, cfg.m0)?;
    let mut acc: Vec<Accumulator> = prepared.contexts.iter().map(|_| Accumulator::new(f.len())).collect();
    let mut residual = f.samples().to_vec();
    let block_sets: Vec<Vec<i64>> = blocks(cfg.m0, cfg.block).iter().map(Band::scale_set).collect();

    let c = rms_norm(&residual);
    let mut trace = ConvergenceTrace {
        relative_residuals: vec![if c == 0.0 { 0.0 } else { 1.0 }],
        stop_reason: StopReason::ToleranceMet,
    };
    if c > 0.0 {
        let mut e = 1.0;
        trace.stop_reason = StopReason::MaxIterations;
        for j in 1..=cfg.j2 {
            for set in &block_sets {
                rdsa1_core(&mut residual, &prepared.contexts, &mut acc, set, cfg.epsilon2, cfg.j1, None)?;
            }
            let ratio = rms_norm(&residual) / c;
            trace.relative_residuals.push(ratio);
            notify(observer, j, ratio, &residual, &acc);
            if ratio <= cfg.epsilon1 {
                trace.stop_reason = StopReason::ToleranceMet;
                break;
            }
            if ratio >= e - cfg.epsilon1 {
                trace.stop_reason = StopReason::Stagnated;
                break;
            }
            e = ratio;
        }
    }
    finish(f, &prepared, acc, &full, cfg.shape_len, trace)
}

/// `eta_j = mu_j - mu_{j+1}` with `mu_j = log|eps^(j-1) - eps^(j)|`.
///
/// The `mu` sequence is cut at the first difference `<= 1e-15`.
pub fn convergence_eta(trace: &ConvergenceTrace) -> Result<Vec<f64>> {
    let r = &trace.relative_residuals;
    if r.len() < 3 {
        return Err(MmdError::TraceTooShort { len: r.len(), min: 3 });
    }
    let mu: Vec<f64> = r
        .windows(2)
        .map(|w| (w[0] - w[1]).abs())
        .take_while(|d| *d > 1e-15)
        .map(f64::ln)
        .collect();
    Ok(mu.windows(2).map(|w| w[0] - w[1]).collect())
}

/// `mu_j` values backing [`convergence_eta`].
pub fn convergence_mu(trace: &ConvergenceTrace) -> Vec<f64> {
    trace
        .relative_residuals
        .windows(2)
        .map(|w| (w[0] - w[1]).abs())
        .take_while(|d| *d > 1e-15)
        .map(f64::ln)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::siggen::{gen_ex2_default, Shape};

    #[test]
    fn band_sets() {
        assert_eq!(Band::Full { m0: 0 }.scale_set(), vec![0]);
        assert_eq!(Band::Full { m0: 2 }.scale_set(), vec![-2, -1, 0, 1, 2]);
        assert_eq!(Band::ring(0, 2).unwrap().scale_set(), vec![-1, 0, 1]);
        assert_eq!(Band::ring(2, 4).unwrap().scale_set(), vec![-3, -2, 2, 3]);
        assert!(Band::ring(3, 3).is_err());
        assert_eq!(blocks(4, 2), vec![Band::Ring { m0: 0, m1: 2 }, Band::Ring { m0: 2, m1: 4 }, Band::Ring { m0: 4, m1: 5 }]);
        assert_eq!(blocks(1, 2), vec![Band::Ring { m0: 0, m1: 2 }]);
    }

    #[test]
    fn eta_examples() {
        let t = ConvergenceTrace {
            relative_residuals: vec![1.0, 0.5, 0.25, 0.125],
            stop_reason: StopReason::MaxIterations,
        };
        let eta = convergence_eta(&t).unwrap();
        assert_eq!(eta.len(), 2);
        assert!(eta.iter().all(|e| (e - 2f64.ln()).abs() < 1e-12));
        let flat = ConvergenceTrace {
            relative_residuals: vec![0.5; 4],
            stop_reason: StopReason::Stagnated,
        };
        assert!(convergence_eta(&flat).unwrap().is_empty());
        let short = ConvergenceTrace {
            relative_residuals: vec![1.0, 0.5],
            stop_reason: StopReason::ToleranceMet,
        };
        assert!(matches!(convergence_eta(&short), Err(MmdError::TraceTooShort { .. })));
    }

    #[test]
    fn zero_input_stops_at_once() {
        let phase = PhaseTrack::from_fn(1024, 16.0, |t| t).unwrap();
        let f = UniformSignal::zeros(1024).unwrap();
        let cfg = RdsaConfig {
            shape_len: 64,
            ..RdsaConfig::default()
        };
        for r in [rdsa1(&f, &[phase.clone()], &cfg).unwrap(), rdsa2(&f, &[phase.clone()], &cfg).unwrap()] {
            assert_eq!(r.trace.stop_reason, StopReason::ToleranceMet);
            assert_eq!(r.trace.relative_residuals, vec![0.0]);
            assert!(r.components[0].samples().iter().all(|v| *v == 0.0));
            assert!(r.expansions[0].terms.iter().all(|t| t.a == 0.0 && t.b == 0.0));
        }
    }

    #[test]
    fn single_component_converges() {
        let len = 1 << 16;
        let shape = Shape::new(&crate::siggen::saw_spike_a()).unwrap();
        let phase = PhaseTrack::from_fn(len, 100.0, |t| t + 0.006 * (2.0 * std::f64::consts::PI * t).sin()).unwrap();
        let f = UniformSignal::new(phase.values().iter().map(|&p| shape.eval_cycles(p)).collect()).unwrap();
        let cfg = RdsaConfig {
            j1: 5,
            shape_len: 512,
            ..RdsaConfig::default()
        };
        let r = rdsa1(&f, &[phase], &cfg).unwrap();
        assert!(r.trace.final_relative_residual() <= 1e-2, "{:?}", r.trace);
        assert!(r.trace.iterations() <= 5);
    }

    #[test]
    fn invalid_inputs() {
        let phase = PhaseTrack::from_fn(1024, 16.0, |t| t).unwrap();
        let f = UniformSignal::zeros(1024).unwrap();
        let cfg = RdsaConfig {
            shape_len: 64,
            ..RdsaConfig::default()
        };
        assert!(rdsa1(&f, &[], &cfg).is_err());
        let short = UniformSignal::zeros(512).unwrap();
        assert!(matches!(rdsa1(&short, &[phase.clone()], &cfg), Err(MmdError::LengthMismatch { .. })));
        let bad = RdsaConfig { j1: 0, ..cfg.clone() };
        assert!(rdsa1(&f, &[phase.clone()], &bad).is_err());
        let wide = RdsaConfig { m0: 8, ..cfg.clone() };
        assert!(matches!(rdsa1(&f, &[phase.clone()], &wide), Err(MmdError::Bandwidth { .. })));
        let ring = RdsaConfig { m0: 2, m1: Some(2), ..cfg };
        assert!(matches!(rdsa1(&f, &[phase], &ring), Err(MmdError::InvalidBand(_))));
    }

    #[test]
    fn block_collapse_is_bit_identical() {
        let m = gen_ex2_default(40.0, 1 << 12).unwrap();
        let cfg = RdsaConfig {
            j1: 3,
            j2: 1,
            m0: 1,
            block: 2,
            shape_len: 64,
            ..RdsaConfig::default()
        };
        let a = rdsa1(&m.signal, &m.phases, &cfg).unwrap();
        let b = rdsa2(&m.signal, &m.phases, &cfg).unwrap();
        assert_eq!(a.expansions, b.expansions);
        assert_eq!(a.components, b.components);
        assert_eq!(a.residual, b.residual);
    }
}
