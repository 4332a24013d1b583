//! Orthonormal basis families on an interval and the nested model
//! collections built from them.
//!
//! Every family is defined on `[0, 1]` and carried to an estimation interval
//! `[c, d]` by the affine map `x -> (x - c) / (d - c)`, with the usual
//! `(d - c)^{-1/2}` factor so orthonormality survives the change of variable.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Largest piecewise-polynomial degree accepted.
pub const MAX_POLY_DEGREE: u32 = 10;

/// A closed interval `[lo, hi]` with `lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Config(format!(
                "interval endpoints must be finite with lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn unit() -> Self {
        Self { lo: 0.0, hi: 1.0 }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// Position of `x` in `[0, 1)`, or `None` outside the interval. The right
    /// endpoint is folded into the last cell of every dyadic partition.
    fn unit_coord(&self, x: f64) -> Option<f64> {
        if !self.contains(x) {
            return None;
        }
        let u = (x - self.lo) / self.width();
        Some(if u >= 1.0 { ONE_MINUS_ULP } else { u })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

const ONE_MINUS_ULP: f64 = 1.0 - f64::EPSILON / 2.0;

/// The basis families the estimators can project on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisFamily {
    /// Regular dyadic histograms, `D = 2^m`.
    Histogram,
    /// `{1, sqrt2 sin(2 pi j x), sqrt2 cos(2 pi j x)}`, odd dimensions only.
    Trigonometric,
    /// Polynomials of degree `<= degree` on each cell of a dyadic partition,
    /// `D = (degree + 1) 2^level`, realized with normalized Legendre polynomials.
    PiecewisePolynomial { degree: u32 },
    /// Haar wavelets: father function plus mother wavelets up to level `m - 1`.
    Haar,
}

impl BasisFamily {
    /// The constant `r0` of the sup-norm/L2-norm connection
    /// `||t||_inf <= r0 sqrt(D) ||t||` on every model of the family.
    pub fn r0(&self) -> f64 {
        match self {
            BasisFamily::Histogram => 1.0,
            BasisFamily::Trigonometric => std::f64::consts::SQRT_2,
            BasisFamily::PiecewisePolynomial { degree } => f64::from(degree + 1).sqrt(),
            // max(|father|_inf, |mother|_inf) / min(K, |Lambda(-1)|) = 1 / 1
            BasisFamily::Haar => 1.0,
        }
    }

    /// Short identifier used in CSV files and on the command line.
    pub fn id(&self) -> String {
        match self {
            BasisFamily::Histogram => "hist".into(),
            BasisFamily::Trigonometric => "trig".into(),
            BasisFamily::PiecewisePolynomial { degree } => format!("pp{degree}"),
            BasisFamily::Haar => "haar".into(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            BasisFamily::PiecewisePolynomial { degree } if *degree > MAX_POLY_DEGREE => {
                Err(Error::Config(format!(
                    "piecewise polynomial degree {degree} exceeds the supported maximum {MAX_POLY_DEGREE}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Dimension of the model with the given index, or `None` when the index is
    /// not admissible for the family.
    ///
    /// Histogram/Haar: `2^index`. Trigonometric: the index is the dimension and
    /// must be odd. Piecewise polynomials of degree `r >= 1`: index 0 is the
    /// constant model, index `k >= 1` is dyadic level `k - 1`.
    pub fn dimension(&self, index: u32) -> Option<usize> {
        match self {
            BasisFamily::Histogram | BasisFamily::Haar => 1usize.checked_shl(index),
            BasisFamily::Trigonometric => (index % 2 == 1).then_some(index as usize),
            BasisFamily::PiecewisePolynomial { .. } => {
                let (level, degree) = self.poly_layout(index);
                1usize
                    .checked_shl(level)
                    .and_then(|cells| cells.checked_mul(degree as usize + 1))
            }
        }
    }

    /// `(level, degree)` of a piecewise-polynomial model index.
    fn poly_layout(&self, index: u32) -> (u32, u32) {
        match self {
            BasisFamily::PiecewisePolynomial { degree: 0 } => (index, 0),
            BasisFamily::PiecewisePolynomial { degree } => {
                if index == 0 {
                    (0, 0)
                } else {
                    (index - 1, *degree)
                }
            }
            _ => (0, 0),
        }
    }

    fn first_index(&self) -> u32 {
        match self {
            BasisFamily::Trigonometric => 1,
            _ => 0,
        }
    }

    fn next_index(&self, index: u32) -> u32 {
        match self {
            BasisFamily::Trigonometric => index + 2,
            _ => index + 1,
        }
    }
}

impl fmt::Display for BasisFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for BasisFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let family = match lower.as_str() {
            "hist" | "histogram" | "h" => BasisFamily::Histogram,
            "trig" | "trigonometric" | "t" => BasisFamily::Trigonometric,
            "haar" => BasisFamily::Haar,
            other => match other.strip_prefix("pp") {
                Some(deg) => BasisFamily::PiecewisePolynomial {
                    degree: deg.parse().map_err(|_| {
                        Error::Config(format!("bad piecewise polynomial degree in '{s}'"))
                    })?,
                },
                None => return Err(Error::Config(format!("unknown basis family '{s}'"))),
            },
        };
        family.validate()?;
        Ok(family)
    }
}

/// One projection space: a family, a model index, its dimension and the
/// interval it lives on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelSpec {
    family: BasisFamily,
    index: u32,
    dim: usize,
    domain: Interval,
}

impl ModelSpec {
    pub fn new(family: BasisFamily, index: u32, domain: Interval) -> Result<Self> {
        family.validate()?;
        let dim = family.dimension(index).ok_or_else(|| {
            Error::Config(format!("index {index} is not a valid {family} model"))
        })?;
        Ok(Self {
            family,
            index,
            dim,
            domain,
        })
    }

    /// The model of `family` with exactly `dim` basis functions, if there is one.
    pub fn with_dimension(family: BasisFamily, dim: usize, domain: Interval) -> Result<Self> {
        let mut index = family.first_index();
        while let Some(d) = family.dimension(index) {
            if d == dim {
                return Self::new(family, index, domain);
            }
            if d > dim {
                break;
            }
            index = family.next_index(index);
        }
        Err(Error::Config(format!("{family} has no model of dimension {dim}")))
    }

    pub fn family(&self) -> BasisFamily {
        self.family
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    /// `phi_lambda(x)` on the model's interval; zero outside it.
    pub fn eval(&self, lambda: usize, x: f64) -> Result<f64> {
        if lambda >= self.dim {
            return Err(Error::IndexOutOfRange {
                index: lambda,
                dim: self.dim,
            });
        }
        let Some(u) = self.domain.unit_coord(x) else {
            return Ok(0.0);
        };
        let scale = self.domain.width().sqrt().recip();
        Ok(scale * self.eval_unit(lambda, u))
    }

    /// Writes all `D` basis values at `x` into `out` (zeros outside the domain).
    pub fn eval_all(&self, x: f64, out: &mut [f64]) {
        assert_eq!(out.len(), self.dim, "output buffer must hold D values");
        out.fill(0.0);
        let Some(u) = self.domain.unit_coord(x) else {
            return;
        };
        let scale = self.domain.width().sqrt().recip();
        match self.family {
            BasisFamily::Histogram => {
                let cell = ((u * self.dim as f64) as usize).min(self.dim - 1);
                out[cell] = scale * (self.dim as f64).sqrt();
            }
            BasisFamily::Trigonometric => {
                out[0] = scale;
                let (s1, c1) = (2.0 * std::f64::consts::PI * u).sin_cos();
                let (mut s, mut c) = (s1, c1);
                let amp = scale * std::f64::consts::SQRT_2;
                let mut j = 1;
                while 2 * j < self.dim {
                    out[2 * j - 1] = amp * s;
                    out[2 * j] = amp * c;
                    // angle addition: (j+1) from j and 1
                    let next_s = s * c1 + c * s1;
                    let next_c = c * c1 - s * s1;
                    s = next_s;
                    c = next_c;
                    j += 1;
                }
            }
            BasisFamily::Haar => {
                out[0] = scale;
                for (lambda, slot) in out.iter_mut().enumerate().skip(1) {
                    *slot = scale * haar_unit(lambda, u);
                }
            }
            BasisFamily::PiecewisePolynomial { .. } => {
                let (level, degree) = self.family.poly_layout(self.index);
                let cells = 1usize << level;
                let pos = u * cells as f64;
                let cell = (pos as usize).min(cells - 1);
                let t = 2.0 * (pos - cell as f64) - 1.0;
                let base = cell * (degree as usize + 1);
                let amp = scale * (cells as f64).sqrt();
                legendre_normalized(t, &mut out[base..base + degree as usize + 1]);
                for v in &mut out[base..base + degree as usize + 1] {
                    *v *= amp;
                }
            }
        }
    }

    fn eval_unit(&self, lambda: usize, u: f64) -> f64 {
        match self.family {
            BasisFamily::Histogram => {
                let cell = ((u * self.dim as f64) as usize).min(self.dim - 1);
                if cell == lambda {
                    (self.dim as f64).sqrt()
                } else {
                    0.0
                }
            }
            BasisFamily::Trigonometric => {
                if lambda == 0 {
                    return 1.0;
                }
                let j = lambda.div_ceil(2) as f64;
                let arg = 2.0 * std::f64::consts::PI * j * u;
                let v = if lambda % 2 == 1 { arg.sin() } else { arg.cos() };
                std::f64::consts::SQRT_2 * v
            }
            BasisFamily::Haar => {
                if lambda == 0 {
                    1.0
                } else {
                    haar_unit(lambda, u)
                }
            }
            BasisFamily::PiecewisePolynomial { .. } => {
                let (level, degree) = self.family.poly_layout(self.index);
                let per_cell = degree as usize + 1;
                let cells = 1usize << level;
                let pos = u * cells as f64;
                let cell = (pos as usize).min(cells - 1);
                if lambda / per_cell != cell {
                    return 0.0;
                }
                let t = 2.0 * (pos - cell as f64) - 1.0;
                let mut vals = [0.0; MAX_POLY_DEGREE as usize + 1];
                legendre_normalized(t, &mut vals[..per_cell]);
                (cells as f64).sqrt() * vals[lambda % per_cell]
            }
        }
    }

    /// Empirical value of `D^{-1/2} sup_{t in S_m} ||t||_inf / ||t||`.
    ///
    /// For an orthonormal basis the supremum over `t` at a fixed point `x` is
    /// reached by `t = sum_l phi_l(x) phi_l` and equals `sqrt(sum_l phi_l(x)^2)`,
    /// so the outer maximization only runs over `probes` points of the domain
    /// (an equispaced midpoint grid, which hits every dyadic cell once
    /// `probes >= D`).
    pub fn linf_l2_ratio(&self, probes: usize) -> f64 {
        let probes = probes.max(self.dim);
        let mut buf = vec![0.0; self.dim];
        let mut best: f64 = 0.0;
        for x in crate::quad::midpoint_nodes(self.domain, probes) {
            self.eval_all(x, &mut buf);
            let sq: f64 = buf.iter().map(|v| v * v).sum();
            best = best.max(sq);
        }
        // the sup norm is measured against the L2 norm on [c, d]
        (best * self.domain.width() / self.dim as f64).sqrt()
    }
}

/// Haar wavelet number `lambda >= 1` on the unit interval:
/// `2^{j/2} psi(2^j u - k)` with `lambda = 2^j + k`.
fn haar_unit(lambda: usize, u: f64) -> f64 {
    let j = lambda.ilog2();
    let k = lambda - (1usize << j);
    let scale = (1u64 << j) as f64;
    let t = scale * u - k as f64;
    let amp = scale.sqrt();
    if (0.0..0.5).contains(&t) {
        amp
    } else if (0.5..1.0).contains(&t) {
        -amp
    } else {
        0.0
    }
}

/// `sqrt(2p + 1) P_p(t)` for `p = 0..out.len()`, orthonormal on `[-1, 1]`
/// against `dt / 2`.
fn legendre_normalized(t: f64, out: &mut [f64]) {
    let mut p_prev = 1.0;
    let mut p = t;
    for (deg, slot) in out.iter_mut().enumerate() {
        let value = match deg {
            0 => 1.0,
            1 => t,
            _ => {
                let k = (deg - 1) as f64;
                let next = ((2.0 * k + 1.0) * t * p - k * p_prev) / (k + 1.0);
                p_prev = p;
                p = next;
                next
            }
        };
        *slot = (2.0 * deg as f64 + 1.0).sqrt() * value;
    }
}

/// How the model dimension is capped by the sample size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CapRule {
    /// `D <= sqrt(n)`, for one-dimensional estimation.
    OneD,
    /// `D^2 <= sqrt(n)`, for tensor models on the square.
    TwoD,
}

impl CapRule {
    pub fn admits(&self, dim: usize, n: usize) -> bool {
        let d = dim as u128;
        let n = n as u128;
        match self {
            CapRule::OneD => d * d <= n,
            CapRule::TwoD => d * d * d * d <= n,
        }
    }
}

/// The nested family of models a selection runs over, ordered by dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelCollection {
    family: BasisFamily,
    cap_rule: CapRule,
    models: Vec<ModelSpec>,
}

impl ModelCollection {
    pub fn family(&self) -> BasisFamily {
        self.family
    }

    pub fn cap_rule(&self) -> CapRule {
        self.cap_rule
    }

    pub fn models(&self) -> &[ModelSpec] {
        &self.models
    }

    pub fn dims(&self) -> Vec<usize> {
        self.models.iter().map(ModelSpec::dim).collect()
    }

    pub fn largest(&self) -> &ModelSpec {
        self.models.last().expect("collections are never empty")
    }

    /// Keeps only the first `count` models (smallest dimensions).
    pub fn truncated(mut self, count: usize) -> Self {
        self.models.truncate(count.max(1));
        self
    }
}

/// All models of `family` on `domain` whose dimension passes `cap_rule` for a
/// sample of size `n`, by increasing dimension. The constant model is always
/// included.
pub fn make_collection(
    family: BasisFamily,
    n: usize,
    cap_rule: CapRule,
    domain: Interval,
) -> Result<ModelCollection> {
    family.validate()?;
    if n < 4 {
        return Err(Error::Config(format!(
            "model collections need a sample size of at least 4, got {n}"
        )));
    }
    let mut models = Vec::new();
    let mut index = family.first_index();
    while let Some(dim) = family.dimension(index) {
        if !cap_rule.admits(dim, n) {
            break;
        }
        models.push(ModelSpec::new(family, index, domain)?);
        index = family.next_index(index);
    }
    Ok(ModelCollection {
        family,
        cap_rule,
        models,
    })
}
