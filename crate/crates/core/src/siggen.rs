//! Synthetic test signals: shape libraries, two-component mixtures with
//! known phases and ground truth, and seeded noise.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{MmdError, Result};
use crate::model::{grid, Parity, PhaseTrack, ShapeTable, UniformSignal};

/// Resolution used to fix the mean and norm of analytic shapes.
const REFERENCE_LEN: usize = 1 << 16;

/// One Gaussian lobe on the circle; positions and widths in cycles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lobe {
    pub center: f64,
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeKind {
    /// Periodic linear interpolation through `(x, value)` knots, `x` in `[0, 1)`.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
    /// Sum of wrapped Gaussian lobes.
    EcgLike { lobes: Vec<Lobe> },
    /// `sum_k cos[k] cos(2 pi (k+1) x) + sin[k] sin(2 pi (k+1) x)`.
    Harmonic {
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    /// Harmonic shape with seeded coefficients decaying like `k^-decay`.
    Random { harmonics: usize, decay: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    #[serde(flatten)]
    pub kind: ShapeKind,
    #[serde(default)]
    pub seed: u64,
}

impl ShapeSpec {
    pub fn new(kind: ShapeKind) -> Self {
        Self { kind, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// An analytic periodic function `x -> g(x)` in cycles.
#[derive(Debug, Clone, PartialEq)]
enum Profile {
    Knots(Vec<(f64, f64)>),
    Lobes(Vec<Lobe>),
    Fourier { cos: Vec<f64>, sin: Vec<f64> },
}

impl Profile {
    fn from_spec(spec: &ShapeSpec) -> Result<Self> {
        match &spec.kind {
            ShapeKind::PiecewiseLinear { knots } => {
                if knots.len() < 2 {
                    return Err(MmdError::DegenerateShape("need at least two knots".into()));
                }
                let mut k = knots.clone();
                if k.iter().any(|(x, v)| !(x.is_finite() && v.is_finite() && (0.0..1.0).contains(x))) {
                    return Err(MmdError::DegenerateShape("knots must be finite with x in [0, 1)".into()));
                }
                k.sort_by(|a, b| a.0.total_cmp(&b.0));
                if k.windows(2).any(|w| w[0].0 == w[1].0) {
                    return Err(MmdError::DegenerateShape("duplicate knot position".into()));
                }
                Ok(Profile::Knots(k))
            }
            ShapeKind::EcgLike { lobes } => {
                if lobes.is_empty() || lobes.iter().any(|l| !(l.width > 0.0 && l.width.is_finite())) {
                    return Err(MmdError::DegenerateShape("lobes need positive widths".into()));
                }
                Ok(Profile::Lobes(lobes.clone()))
            }
            ShapeKind::Harmonic { cos, sin } => Ok(Profile::Fourier {
                cos: cos.clone(),
                sin: sin.clone(),
            }),
            ShapeKind::Random { harmonics, decay } => {
                if *harmonics == 0 {
                    return Err(MmdError::DegenerateShape("random shape needs harmonics".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                let u = Uniform::new(-1.0, 1.0).expect("valid range");
                let mut cos = Vec::with_capacity(*harmonics);
                let mut sin = Vec::with_capacity(*harmonics);
                for k in 1..=*harmonics {
                    let s = (k as f64).powf(-decay);
                    cos.push(s * u.sample(&mut rng));
                    sin.push(s * u.sample(&mut rng));
                }
                // a nonzero fundamental keeps gcd(s) = 1
                cos[0] = 1.0;
                Ok(Profile::Fourier { cos, sin })
            }
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let x = x.rem_euclid(1.0);
        match self {
            Profile::Knots(k) => {
                let i = k.partition_point(|(kx, _)| *kx <= x);
                let (x0, v0, x1, v1) = if i == 0 {
                    let (lx, lv) = k[k.len() - 1];
                    (lx - 1.0, lv, k[0].0, k[0].1)
                } else if i == k.len() {
                    let (lx, lv) = k[k.len() - 1];
                    (lx, lv, k[0].0 + 1.0, k[0].1)
                } else {
                    (k[i - 1].0, k[i - 1].1, k[i].0, k[i].1)
                };
                v0 + (v1 - v0) * (x - x0) / (x1 - x0)
            }
            Profile::Lobes(lobes) => lobes
                .iter()
                .map(|l| {
                    let d = (x - l.center + 0.5).rem_euclid(1.0) - 0.5;
                    l.height * (-0.5 * (d / l.width).powi(2)).exp()
                })
                .sum(),
            Profile::Fourier { cos, sin } => {
                let c: f64 = cos
                    .iter()
                    .enumerate()
                    .map(|(k, a)| a * (2.0 * PI * (k + 1) as f64 * x).cos())
                    .sum();
                let s: f64 = sin
                    .iter()
                    .enumerate()
                    .map(|(k, b)| b * (2.0 * PI * (k + 1) as f64 * x).sin())
                    .sum();
                c + s
            }
        }
    }
}

/// A zero-mean, unit-norm shape that can be evaluated anywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct Shape {
    profile: Profile,
    mean: f64,
    scale: f64,
}

impl Shape {
    pub fn new(spec: &ShapeSpec) -> Result<Self> {
        let profile = Profile::from_spec(spec)?;
        let samples: Vec<f64> = grid(REFERENCE_LEN).map(|x| profile.eval(x)).collect();
        let mean = samples.iter().sum::<f64>() / REFERENCE_LEN as f64;
        let norm = crate::model::shape_norm(&samples.iter().map(|v| v - mean).collect::<Vec<_>>());
        if !(norm > 1e-12 * samples.iter().fold(1.0f64, |m, v| m.max(v.abs()))) {
            return Err(MmdError::DegenerateShape("constant shape".into()));
        }
        Ok(Self {
            profile,
            mean,
            scale: 1.0 / norm,
        })
    }

    /// `s(2 pi x)` for `x` in cycles.
    pub fn eval_cycles(&self, x: f64) -> f64 {
        (self.profile.eval(x) - self.mean) * self.scale
    }

    /// Exact table on `len` points, re-normalized on that grid.
    pub fn table(&self, len: usize) -> Result<ShapeTable> {
        ShapeTable::normalized(grid(len).map(|x| self.eval_cycles(x)).collect())
    }
}

/// Table of the shape described by `spec`, zero mean and unit norm on
/// `shape_len` points. Shapes whose harmonic support has a gcd other than one
/// are rejected.
pub fn gen_shape(spec: &ShapeSpec, shape_len: usize) -> Result<ShapeTable> {
    let table = Shape::new(spec)?.table(shape_len)?;
    let gcd = table.spectrum().support_gcd(1e-10);
    if gcd > 1 {
        return Err(MmdError::DegenerateShape(format!("harmonic support has gcd {gcd}")));
    }
    Ok(table)
}

/// First fixed piecewise-linear shape of the two-component mixture.
pub fn saw_spike_a() -> ShapeSpec {
    ShapeSpec::new(ShapeKind::PiecewiseLinear {
        knots: vec![(0.0, 0.0), (0.12, 0.15), (0.3, 1.0), (0.38, -0.7), (0.55, 0.05), (0.8, -0.25)],
    })
}

/// Second fixed piecewise-linear shape of the two-component mixture.
pub fn saw_spike_b() -> ShapeSpec {
    ShapeSpec::new(ShapeKind::PiecewiseLinear {
        knots: vec![(0.0, 0.3), (0.2, -0.5), (0.28, 0.9), (0.45, 0.0), (0.7, -0.4), (0.88, 0.2)],
    })
}

/// Q, R and S lobes of a heartbeat-like shape.
pub fn ecg_like(r_height: f64, s_depth: f64, qrs_width: f64) -> ShapeSpec {
    ShapeSpec::new(ShapeKind::EcgLike {
        lobes: vec![
            Lobe {
                center: 0.44,
                width: qrs_width,
                height: -0.15,
            },
            Lobe {
                center: 0.5,
                width: qrs_width * 0.8,
                height: r_height,
            },
            Lobe {
                center: 0.56,
                width: qrs_width,
                height: -s_depth,
            },
            Lobe {
                center: 0.8,
                width: 0.05,
                height: 0.2,
            },
        ],
    })
}

/// A mixture with its components and their phases.
#[derive(Debug, Clone)]
pub struct Mixture {
    pub signal: UniformSignal,
    pub phases: Vec<PhaseTrack>,
    pub components: Vec<UniformSignal>,
    pub truth: Vec<GroundTruth>,
}

/// Known expansion of one component: `alpha(phi) s(2 pi N phi)` with
/// `alpha = 1 + c cos(2 pi phi) + d sin(2 pi phi)`.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub shape: Shape,
    pub fundamental: f64,
    pub alpha_cos: f64,
    pub alpha_sin: f64,
}

impl GroundTruth {
    /// True product `a_n s_n` for the given parity when both `n` and `-n` are
    /// estimated (the `|n| = 1` terms are split evenly between `n` and `-n`).
    pub fn product(&self, n: i64, parity: Parity, shape_len: usize) -> Result<Vec<f64>> {
        let weight = match (n, parity) {
            (0, Parity::Cos) => 1.0,
            (0, Parity::Sin) => 0.0,
            (1 | -1, Parity::Cos) => 0.5 * self.alpha_cos,
            (1 | -1, Parity::Sin) => 0.5 * self.alpha_sin * n as f64,
            _ => 0.0,
        };
        let table = self.shape.table(shape_len)?;
        Ok(table.values().iter().map(|v| weight * v).collect())
    }
}

/// Sums `alpha(phi) s(p)` over the given components.
pub fn build_mixture(len: usize, parts: Vec<(GroundTruth, PhaseTrack)>) -> Result<Mixture> {
    let mut components = Vec::with_capacity(parts.len());
    let mut total = vec![0.0; len];
    let mut phases = Vec::with_capacity(parts.len());
    let mut truth = Vec::with_capacity(parts.len());
    for (gt, phase) in parts {
        if phase.len() != len {
            return Err(MmdError::LengthMismatch {
                expected: len,
                actual: phase.len(),
            });
        }
        let values: Vec<f64> = phase
            .values()
            .iter()
            .map(|&p| {
                let phi = p / gt.fundamental;
                let arg = 2.0 * PI * phi;
                let alpha = 1.0 + gt.alpha_cos * arg.cos() + gt.alpha_sin * arg.sin();
                alpha * gt.shape.eval_cycles(p)
            })
            .collect();
        total.iter_mut().zip(&values).for_each(|(t, v)| *t += v);
        components.push(UniformSignal::new(values)?);
        phases.push(phase);
        truth.push(gt);
    }
    Ok(Mixture {
        signal: UniformSignal::new(total)?,
        phases,
        components,
        truth,
    })
}

/// `s1(2 pi N (t + 0.006 sin 2 pi t)) + s2(2 pi N (t + 0.006 cos 2 pi t))`.
pub fn gen_ex2(fundamental: f64, len: usize, s1: &ShapeSpec, s2: &ShapeSpec) -> Result<Mixture> {
    if !(fundamental >= 2.0) {
        return Err(MmdError::InvalidFundamental(fundamental));
    }
    let p1 = PhaseTrack::from_fn(len, fundamental, |t| t + 0.006 * (2.0 * PI * t).sin())?;
    let p2 = PhaseTrack::from_fn(len, fundamental, |t| t + 0.006 * (2.0 * PI * t).cos())?;
    let gt = |spec: &ShapeSpec| -> Result<GroundTruth> {
        Ok(GroundTruth {
            shape: Shape::new(spec)?,
            fundamental,
            alpha_cos: 0.0,
            alpha_sin: 0.0,
        })
    };
    build_mixture(len, vec![(gt(s1)?, p1), (gt(s2)?, p2)])
}

/// [`gen_ex2`] with the two fixed piecewise-linear shapes.
pub fn gen_ex2_default(fundamental: f64, len: usize) -> Result<Mixture> {
    gen_ex2(fundamental, len, &saw_spike_a(), &saw_spike_b())
}

/// Two amplitude-modulated heartbeat-like components at fundamentals 150 and
/// 220.
pub fn gen_ex3(len: usize) -> Result<Mixture> {
    if len < 1 << 14 {
        return Err(MmdError::SignalTooShort { len, min: 1 << 14 });
    }
    let p1 = PhaseTrack::from_fn(len, 150.0, |t| t + 0.006 * (2.0 * PI * t).sin())?;
    let p2 = PhaseTrack::from_fn(len, 220.0, |t| t + 0.006 * (2.0 * PI * t).cos())?;
    let g1 = GroundTruth {
        shape: Shape::new(&ecg_like(1.0, 0.3, 0.03))?,
        fundamental: 150.0,
        alpha_cos: 0.2,
        alpha_sin: 0.1,
    };
    let g2 = GroundTruth {
        shape: Shape::new(&ecg_like(0.8, 0.45, 0.04))?,
        fundamental: 220.0,
        alpha_cos: 0.1,
        alpha_sin: 0.2,
    };
    build_mixture(len, vec![(g1, p1), (g2, p2)])
}

/// Adds `N(0, sigma^2)` noise from a seeded ChaCha stream.
pub fn add_noise(f: &UniformSignal, sigma: f64, seed: u64) -> Result<UniformSignal> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(MmdError::InvalidParameter(format!("sigma must be >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(f.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("sigma checked");
    UniformSignal::new(f.samples().iter().map(|v| v + normal.sample(&mut rng)).collect())
}
