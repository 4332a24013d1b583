//! Benchmark Markov chains with known stationary and transition densities,
//! and seeded simulators for them.
//!
//! Random numbers come from ChaCha8 seeded with the 64-bit run seed, and
//! Gaussian innovations from `rand_distr::StandardNormal`, so a given
//! `(spec, n, seed)` yields the same trajectory on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::basis::Interval;
use crate::specfun::{bessel_i_scaled, ln_gamma};
use crate::{Error, Result};

/// Burn-in used for chains whose stationary law cannot be sampled exactly.
pub const ARCH_BURN_IN: usize = 500;

/// Identifiers of the built-in configurations, in table order.
pub const PRESET_IDS: [&str; 6] = ["ar1", "ar2", "sqrtcir", "cir3", "cir4", "arch"];

#[derive(Clone, Debug, PartialEq)]
pub enum ChainKind {
    /// `X_{n+1} = a X_n + b + eps`, `eps ~ N(0, sigma2)`.
    Ar { a: f64, b: f64, sigma2: f64 },
    /// Euclidean norm of `delta` independent AR(1) components
    /// `xi_{n+1} = a xi_n + beta eps` (a discretized radial Ornstein-Uhlenbeck).
    SqrtCir { a: f64, beta: f64, delta: u32 },
    /// Square of the `SqrtCir` chain.
    Cir { a: f64, beta: f64, delta: u32 },
    /// `X_{n+1} = sin(X_n) + (cos(X_n) + 3) eps`, `eps ~ N(0, 1)`.
    Arch,
}

/// A chain together with the square it is estimated on.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainSpec {
    pub id: String,
    pub kind: ChainKind,
    pub domain: Interval,
    pub burn_in: usize,
}

impl ChainSpec {
    pub fn new(id: impl Into<String>, kind: ChainKind, domain: Interval, burn_in: usize) -> Result<Self> {
        let spec = Self {
            id: id.into(),
            kind,
            domain,
            burn_in,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// One of the six reference configurations: `ar1`, `ar2`, `sqrtcir`,
    /// `cir3`, `cir4`, `arch`.
    pub fn preset(id: &str) -> Result<Self> {
        let iv = |lo, hi| Interval::new(lo, hi).expect("preset domains are valid");
        let (kind, domain, burn_in) = match id {
            "ar1" => (
                ChainKind::Ar {
                    a: 2.0 / 3.0,
                    b: 0.0,
                    sigma2: 5.0 / 9.0,
                },
                iv(-2.0, 2.0),
                0,
            ),
            "ar2" => (
                ChainKind::Ar {
                    a: 0.5,
                    b: 3.0,
                    sigma2: 1.0,
                },
                iv(4.0, 8.0),
                0,
            ),
            "sqrtcir" => (
                ChainKind::SqrtCir {
                    a: 0.5,
                    beta: 3.0,
                    delta: 3,
                },
                iv(2.0, 10.0),
                0,
            ),
            "cir3" => (
                ChainKind::Cir {
                    a: 0.75,
                    beta: (7.0f64 / 48.0).sqrt(),
                    delta: 4,
                },
                iv(0.1, 3.0),
                0,
            ),
            "cir4" => (
                ChainKind::Cir {
                    a: 1.0 / 3.0,
                    beta: 0.75,
                    delta: 2,
                },
                iv(0.0, 2.0),
                0,
            ),
            "arch" => (ChainKind::Arch, iv(-5.0, 5.0), ARCH_BURN_IN),
            other => {
                return Err(Error::Config(format!(
                    "unknown chain '{other}' (expected one of {})",
                    PRESET_IDS.join("|")
                )))
            }
        };
        Self::new(id, kind, domain, burn_in)
    }

    pub fn presets() -> Vec<Self> {
        PRESET_IDS
            .iter()
            .map(|id| Self::preset(id).expect("presets are valid"))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            ChainKind::Ar { a, b, sigma2 } => {
                if !(a.abs() < 1.0) || !b.is_finite() || !(sigma2 > 0.0) || !sigma2.is_finite() {
                    return Err(Error::Config(format!(
                        "AR chain '{}' needs |a| < 1 and sigma2 > 0 (a={a}, b={b}, sigma2={sigma2})",
                        self.id
                    )));
                }
            }
            ChainKind::SqrtCir { a, beta, delta } | ChainKind::Cir { a, beta, delta } => {
                if !(a > 0.0 && a < 1.0) || !(beta > 0.0) || !beta.is_finite() || delta < 1 {
                    return Err(Error::Config(format!(
                        "CIR-type chain '{}' needs 0 < a < 1, beta > 0, delta >= 1 (a={a}, beta={beta}, delta={delta})",
                        self.id
                    )));
                }
            }
            ChainKind::Arch => {}
        }
        Ok(())
    }

    /// Variance `rho^2 = beta^2 / (1 - a^2)` of one stationary OU component.
    fn component_variance(a: f64, beta: f64) -> f64 {
        beta * beta / (1.0 - a * a)
    }

    /// Stationary density `f(x)`; an error for chains without a closed form.
    pub fn stationary_density(&self, x: f64) -> Result<f64> {
        match self.kind {
            ChainKind::Ar { a, b, sigma2 } => {
                let mean = b / (1.0 - a);
                let var = sigma2 / (1.0 - a * a);
                Ok(gaussian_pdf((x - mean) / var.sqrt()) / var.sqrt())
            }
            ChainKind::SqrtCir { a, beta, delta } => {
                if x <= 0.0 {
                    return Ok(0.0);
                }
                let rho2 = Self::component_variance(a, beta);
                let d = f64::from(delta);
                let log_c = -((0.5 * d - 1.0) * std::f64::consts::LN_2
                    + ln_gamma(0.5 * d)?
                    + 0.5 * d * rho2.ln());
                Ok((log_c - x * x / (2.0 * rho2) + (d - 1.0) * x.ln()).exp())
            }
            ChainKind::Cir { a, beta, delta } => {
                if x <= 0.0 {
                    return Ok(0.0);
                }
                let rate = 1.0 / (2.0 * Self::component_variance(a, beta));
                let shape = 0.5 * f64::from(delta);
                Ok((shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - ln_gamma(shape)?).exp())
            }
            ChainKind::Arch => Err(Error::Unsupported(format!(
                "chain '{}' has no closed-form stationary density",
                self.id
            ))),
        }
    }

    pub fn has_stationary_density(&self) -> bool {
        !matches!(self.kind, ChainKind::Arch)
    }

    /// Transition density `pi(x, y)`; zero wherever the kernel vanishes
    /// (including `x <= 0` for the CIR-type chains).
    pub fn transition_density(&self, x: f64, y: f64) -> f64 {
        match self.kind {
            ChainKind::Ar { a, b, sigma2 } => {
                let sd = sigma2.sqrt();
                gaussian_pdf((y - a * x - b) / sd) / sd
            }
            ChainKind::SqrtCir { a, beta, delta } => {
                if x <= 0.0 || y <= 0.0 {
                    return 0.0;
                }
                let b2 = beta * beta;
                let z = a * x * y / b2;
                let nu = 0.5 * f64::from(delta) - 1.0;
                // exp(-(y^2 + a^2 x^2) / 2b^2) I(z) = exp(-(y - a x)^2 / 2b^2) e^{-z} I(z)
                let log_rest = -(y - a * x).powi(2) / (2.0 * b2)
                    + (a * x / b2).ln()
                    + 0.5 * f64::from(delta) * (y / (a * x)).ln();
                scaled_bessel(nu, z) * log_rest.exp()
            }
            ChainKind::Cir { a, beta, delta } => {
                if x <= 0.0 || y <= 0.0 {
                    return 0.0;
                }
                let b2 = beta * beta;
                let z = a * (x * y).sqrt() / b2;
                let nu = 0.5 * f64::from(delta) - 1.0;
                // exp(-(y + a^2 x) / 2b^2) I(z) = exp(-(sqrt y - a sqrt x)^2 / 2b^2) e^{-z} I(z)
                let log_rest = -(y.sqrt() - a * x.sqrt()).powi(2) / (2.0 * b2)
                    - (2.0 * b2).ln()
                    + (0.25 * f64::from(delta) - 0.5) * (y / (a * a * x)).ln();
                scaled_bessel(nu, z) * log_rest.exp()
            }
            ChainKind::Arch => {
                let scale = x.cos() + 3.0;
                gaussian_pdf((y - x.sin()) / scale) / scale
            }
        }
    }
}

fn scaled_bessel(nu: f64, z: f64) -> f64 {
    // nu >= -1/2 for delta >= 1; I_{-1/2}(z) = sqrt(2 / pi z) cosh z
    if nu < 0.0 {
        let s = (2.0 / (std::f64::consts::PI * z)).sqrt();
        return s * 0.5 * (1.0 + (-2.0 * z).exp());
    }
    bessel_i_scaled(nu, z).expect("order and argument are non-negative")
}

fn gaussian_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// A simulated trajectory with its provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainSample {
    values: Vec<f64>,
    spec: ChainSpec,
    seed: u64,
}

impl ChainSample {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// One-column CSV: header `x`, then one value per line with 17
    /// significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(24 * (self.values.len() + 1));
        out.push_str("x\n");
        for v in &self.values {
            out.push_str(&format!("{v:.16e}\n"));
        }
        out
    }
}

/// Simulates `n` observations of `spec`.
///
/// Chains with a sampleable stationary law start from it and take `n - 1`
/// transition steps; `burn_in` extra steps (500 for ARCH, which starts at 0)
/// are generated first and discarded.
pub fn simulate(spec: &ChainSpec, n: usize, seed: u64) -> Result<ChainSample> {
    spec.validate()?;
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "a trajectory needs at least 2 points, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = n + spec.burn_in;
    let mut path = Vec::with_capacity(total);
    let mut normal = move || -> f64 { StandardNormal.sample(&mut rng) };

    match spec.kind {
        ChainKind::Ar { a, b, sigma2 } => {
            let sd = sigma2.sqrt();
            let mut x = b / (1.0 - a) + (sigma2 / (1.0 - a * a)).sqrt() * normal();
            path.push(x);
            while path.len() < total {
                x = a * x + b + sd * normal();
                path.push(x);
            }
        }
        ChainKind::SqrtCir { a, beta, delta } | ChainKind::Cir { a, beta, delta } => {
            let squared = matches!(spec.kind, ChainKind::Cir { .. });
            let rho = ChainSpec::component_variance(a, beta).sqrt();
            let mut xi: Vec<f64> = (0..delta).map(|_| rho * normal()).collect();
            let observe = |xi: &[f64]| {
                let r2: f64 = xi.iter().map(|v| v * v).sum();
                if squared {
                    r2
                } else {
                    r2.sqrt()
                }
            };
            path.push(observe(&xi));
            while path.len() < total {
                for c in xi.iter_mut() {
                    *c = a * *c + beta * normal();
                }
                path.push(observe(&xi));
            }
        }
        ChainKind::Arch => {
            let mut x = 0.0;
            path.push(x);
            while path.len() < total {
                x = x.sin() + (x.cos() + 3.0) * normal();
                path.push(x);
            }
        }
    }
    let values = path.split_off(spec.burn_in);
    Ok(ChainSample {
        values,
        spec: spec.clone(),
        seed,
    })
}
