//! Projection estimators, penalized contrast model selection and the
//! truncated quotient estimator of the transition density.
//!
//! On a model with orthonormal basis `(phi_l)`, the empirical contrast
//! `gamma_n(t) = (1/n) sum_i [ ||t||^2 - 2 t(X_i) ]` is minimized by the
//! empirical coefficient expansion, and its minimum is `-sum_l beta_l^2`.
//! Selection picks the model minimizing that minimum plus `K D / n`
//! (`K D^2 / n` on the square).

use std::fmt::Write as _;

use crate::basis::{make_collection, BasisFamily, CapRule, Interval, ModelCollection, ModelSpec};
use crate::{Error, Result};

/// Default exponent of the truncation level `a_n = n^exponent`.
pub const DEFAULT_TRUNCATION_EXPONENT: f64 = 0.1;

/// Penalty constants for the one- and two-dimensional selections.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PenaltyConfig {
    pub k_1d: f64,
    pub k_2d: f64,
}

impl PenaltyConfig {
    pub fn new(k_1d: f64, k_2d: f64) -> Result<Self> {
        let cfg = Self { k_1d, k_2d };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k_1d > 0.0 && self.k_1d.is_finite() && self.k_2d > 0.0 && self.k_2d.is_finite()) {
            return Err(Error::Config(format!(
                "penalty constants must be positive, got K1={} K2={}",
                self.k_1d, self.k_2d
            )));
        }
        Ok(())
    }

    pub fn pen_1d(&self, dim: usize, n: usize) -> f64 {
        self.k_1d * dim as f64 / n as f64
    }

    pub fn pen_2d(&self, dim: usize, n: usize) -> f64 {
        self.k_2d * (dim * dim) as f64 / n as f64
    }
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            k_1d: 5.0,
            k_2d: 0.02,
        }
    }
}

/// `f_hat = sum_l beta_l phi_l` on one model.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityEstimate1D {
    model: ModelSpec,
    coefficients: Vec<f64>,
}

impl DensityEstimate1D {
    pub fn new(model: ModelSpec, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != model.dim() {
            return Err(Error::InvalidInput(format!(
                "expected {} coefficients, got {}",
                model.dim(),
                coefficients.len()
            )));
        }
        Ok(Self { model, coefficients })
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    /// `gamma_n(f_hat) = -sum_l beta_l^2`.
    pub fn contrast(&self) -> f64 {
        contrast_1d(self)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut buf = vec![0.0; self.dim()];
        self.eval_with(x, &mut buf)
    }

    fn eval_with(&self, x: f64, buf: &mut [f64]) -> f64 {
        self.model.eval_all(x, buf);
        dot(buf, &self.coefficients)
    }

    /// Values at every point of `xs`.
    pub fn eval_many(&self, xs: &[f64]) -> Vec<f64> {
        let mut buf = vec![0.0; self.dim()];
        xs.iter().map(|&x| self.eval_with(x, &mut buf)).collect()
    }

    /// CSV: `family,D,c,d` header, one metadata row, one coefficient per line.
    pub fn to_csv(&self) -> String {
        estimate_csv(&self.model, &self.coefficients)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let (model, coefficients) = parse_estimate_csv(text, 1)?;
        Self::new(model, coefficients)
    }
}

/// `g_hat(x, y) = sum_{l,m} a_{l m} phi_l(x) phi_m(y)` on a tensor model.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityEstimate2D {
    model: ModelSpec,
    /// Row-major `D x D`, row index for the `x` (current state) argument.
    coefficients: Vec<f64>,
}

impl DensityEstimate2D {
    pub fn new(model: ModelSpec, coefficients: Vec<f64>) -> Result<Self> {
        let d = model.dim();
        if coefficients.len() != d * d {
            return Err(Error::InvalidInput(format!(
                "expected {} coefficients, got {}",
                d * d,
                coefficients.len()
            )));
        }
        Ok(Self { model, coefficients })
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Coefficient `a_{l m}`.
    pub fn coefficient(&self, l: usize, m: usize) -> f64 {
        self.coefficients[l * self.dim() + m]
    }

    pub fn contrast(&self) -> f64 {
        contrast_2d(self)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let d = self.dim();
        let mut px = vec![0.0; d];
        let mut py = vec![0.0; d];
        self.model.eval_all(x, &mut px);
        self.model.eval_all(y, &mut py);
        self.bilinear(&px, &py)
    }

    fn bilinear(&self, px: &[f64], py: &[f64]) -> f64 {
        let d = self.dim();
        let mut s = 0.0;
        for (l, &vx) in px.iter().enumerate() {
            if vx != 0.0 {
                s += vx * dot(&self.coefficients[l * d..(l + 1) * d], py);
            }
        }
        s
    }

    /// Values on the grid `xs x ys`, row-major with `x` as the row.
    pub fn eval_grid(&self, xs: &[f64], ys: &[f64]) -> Vec<f64> {
        let bx = basis_matrix(&self.model, xs);
        let by = basis_matrix(&self.model, ys);
        let d = self.dim();
        let mut out = Vec::with_capacity(xs.len() * ys.len());
        for i in 0..xs.len() {
            let px = &bx[i * d..(i + 1) * d];
            for j in 0..ys.len() {
                out.push(self.bilinear(px, &by[j * d..(j + 1) * d]));
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        estimate_csv(&self.model, &self.coefficients)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let (model, coefficients) = parse_estimate_csv(text, 2)?;
        Self::new(model, coefficients)
    }
}

/// Quotient estimator `g~ / f~`, set to zero wherever `|g~| > a_n |f~|`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionEstimate {
    f_tilde: DensityEstimate1D,
    g_tilde: DensityEstimate2D,
    a_n: f64,
}

impl TransitionEstimate {
    pub fn f_tilde(&self) -> &DensityEstimate1D {
        &self.f_tilde
    }

    pub fn g_tilde(&self) -> &DensityEstimate2D {
        &self.g_tilde
    }

    pub fn truncation_level(&self) -> f64 {
        self.a_n
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.apply_rule(self.f_tilde.eval(x), self.g_tilde.eval(x, y))
    }

    fn apply_rule(&self, fx: f64, gxy: f64) -> f64 {
        if gxy.abs() <= self.a_n * fx.abs() && fx != 0.0 {
            gxy / fx
        } else {
            0.0
        }
    }

    /// Values on the grid `xs x ys`, row-major with `x` as the row.
    pub fn eval_grid(&self, xs: &[f64], ys: &[f64]) -> Vec<f64> {
        let fx = self.f_tilde.eval_many(xs);
        let mut g = self.g_tilde.eval_grid(xs, ys);
        for (i, row) in g.chunks_mut(ys.len()).enumerate() {
            for v in row {
                *v = self.apply_rule(fx[i], *v);
            }
        }
        g
    }
}

/// Builds `pi~` from independently selected `f~` and `g~` with the default
/// truncation `a_n = n^{1/10}`.
pub fn quotient_transition(
    f_tilde: DensityEstimate1D,
    g_tilde: DensityEstimate2D,
    n: usize,
) -> Result<TransitionEstimate> {
    quotient_transition_with_exponent(f_tilde, g_tilde, n, DEFAULT_TRUNCATION_EXPONENT)
}

pub fn quotient_transition_with_exponent(
    f_tilde: DensityEstimate1D,
    g_tilde: DensityEstimate2D,
    n: usize,
    exponent: f64,
) -> Result<TransitionEstimate> {
    if f_tilde.model.domain() != g_tilde.model.domain() {
        return Err(Error::InvalidInput(format!(
            "f~ lives on {} but g~ on {}",
            f_tilde.model.domain(),
            g_tilde.model.domain()
        )));
    }
    if !(exponent > 0.0) || n == 0 {
        return Err(Error::Config(format!(
            "truncation needs n >= 1 and a positive exponent, got n={n}, exponent={exponent}"
        )));
    }
    Ok(TransitionEstimate {
        f_tilde,
        g_tilde,
        a_n: (n as f64).powf(exponent),
    })
}

/// The outcome of a penalized selection.
#[derive(Clone, Debug, PartialEq)]
pub struct Selection<E> {
    pub estimate: E,
    /// Penalized criterion of the selected model.
    pub criterion: f64,
    /// `(D_m, contrast + penalty)` for every model, in collection order.
    pub criteria: Vec<(usize, f64)>,
}

/// `beta_l = (1/n) sum_i phi_l(X_i)`; points outside the domain add zero but
/// still count in `n`.
pub fn estimate_coefficients_1d(sample: &[f64], model: &ModelSpec) -> Result<DensityEstimate1D> {
    if sample.is_empty() {
        return Err(Error::InvalidInput("empty sample".into()));
    }
    let d = model.dim();
    let mut buf = vec![0.0; d];
    let mut acc = vec![0.0; d];
    for &x in sample {
        model.eval_all(x, &mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b;
        }
    }
    let n = sample.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    DensityEstimate1D::new(*model, acc)
}

/// `-sum_l beta_l^2`.
pub fn contrast_1d(est: &DensityEstimate1D) -> f64 {
    -est.coefficients.iter().map(|b| b * b).sum::<f64>()
}

/// Minimizes `gamma_n(f_hat_m) + K D_m / n` over the collection. Ties go to
/// the smaller model.
pub fn select_model_1d(
    sample: &[f64],
    collection: &ModelCollection,
    pen: &PenaltyConfig,
) -> Result<Selection<DensityEstimate1D>> {
    let n = sample.len();
    let candidates = collection
        .models()
        .iter()
        .map(|m| {
            let est = estimate_coefficients_1d(sample, m)?;
            let crit = est.contrast() + pen.pen_1d(m.dim(), n);
            Ok((est, crit))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(pick(candidates, |e| e.dim()))
}

/// `a_{l m} = (1/(n-1)) sum_{i<n} phi_l(X_i) phi_m(X_{i+1})`.
pub fn estimate_coefficients_2d(sample: &[f64], model: &ModelSpec) -> Result<DensityEstimate2D> {
    if sample.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "joint density estimation needs at least 2 points, got {}",
            sample.len()
        )));
    }
    let d = model.dim();
    let rows = basis_matrix(model, sample);
    let mut acc = vec![0.0; d * d];
    for pair in rows.chunks(d).collect::<Vec<_>>().windows(2) {
        let (cur, next) = (pair[0], pair[1]);
        for (l, &vl) in cur.iter().enumerate() {
            if vl == 0.0 {
                continue;
            }
            for (slot, &vm) in acc[l * d..(l + 1) * d].iter_mut().zip(next) {
                *slot += vl * vm;
            }
        }
    }
    let pairs = (sample.len() - 1) as f64;
    acc.iter_mut().for_each(|a| *a /= pairs);
    DensityEstimate2D::new(*model, acc)
}

/// `-sum_{l,m} a_{l m}^2`.
pub fn contrast_2d(est: &DensityEstimate2D) -> f64 {
    -est.coefficients.iter().map(|a| a * a).sum::<f64>()
}

/// Minimizes `gamma_n^(2)(g_hat_m) + K2 D_m^2 / n`. Ties go to the smaller model.
pub fn select_model_2d(
    sample: &[f64],
    collection: &ModelCollection,
    pen: &PenaltyConfig,
) -> Result<Selection<DensityEstimate2D>> {
    let n = sample.len();
    let candidates = collection
        .models()
        .iter()
        .map(|m| {
            let est = estimate_coefficients_2d(sample, m)?;
            let crit = est.contrast() + pen.pen_2d(m.dim(), n);
            Ok((est, crit))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(pick(candidates, |e| e.dim()))
}

fn pick<E>(candidates: Vec<(E, f64)>, dim: impl Fn(&E) -> usize) -> Selection<E> {
    let criteria: Vec<(usize, f64)> = candidates.iter().map(|(e, c)| (dim(e), *c)).collect();
    let mut best: Option<(E, f64)> = None;
    for (est, crit) in candidates {
        let better = match &best {
            None => true,
            Some((b, bc)) => crit < *bc || (crit == *bc && dim(&est) < dim(b)),
        };
        if better {
            best = Some((est, crit));
        }
    }
    let (estimate, criterion) = best.expect("collections are never empty");
    Selection {
        estimate,
        criterion,
        criteria,
    }
}

/// The full three-step procedure on one trajectory: select `f~` on the
/// one-dimensional collection, select `g~` on the tensor collection, then
/// form the truncated quotient.
#[derive(Clone, Debug)]
pub struct TransitionFit {
    pub f: Selection<DensityEstimate1D>,
    pub g: Selection<DensityEstimate2D>,
    pub pi: TransitionEstimate,
}

pub fn fit_transition(
    sample: &[f64],
    family: BasisFamily,
    domain: Interval,
    pen: &PenaltyConfig,
    truncation_exponent: f64,
) -> Result<TransitionFit> {
    let n = sample.len();
    let one_d = make_collection(family, n, CapRule::OneD, domain)?;
    let two_d = make_collection(family, n, CapRule::TwoD, domain)?;
    let f = select_model_1d(sample, &one_d, pen)?;
    let g = select_model_2d(sample, &two_d, pen)?;
    let pi = quotient_transition_with_exponent(
        f.estimate.clone(),
        g.estimate.clone(),
        n,
        truncation_exponent,
    )?;
    Ok(TransitionFit { f, g, pi })
}

/// Basis values at each point, row-major `points x D`.
pub(crate) fn basis_matrix(model: &ModelSpec, points: &[f64]) -> Vec<f64> {
    let d = model.dim();
    let mut out = vec![0.0; points.len() * d];
    for (row, &x) in out.chunks_mut(d).zip(points) {
        model.eval_all(x, row);
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn estimate_csv(model: &ModelSpec, coefficients: &[f64]) -> String {
    let dom = model.domain();
    let mut out = String::from("family,D,c,d\n");
    let _ = writeln!(
        out,
        "{},{},{:.16e},{:.16e}",
        model.family().id(),
        model.dim(),
        dom.lo(),
        dom.hi()
    );
    for c in coefficients {
        let _ = writeln!(out, "{c:.16e}");
    }
    out
}

fn parse_estimate_csv(text: &str, arity: u32) -> Result<(ModelSpec, Vec<f64>)> {
    let perr = |line: usize, message: String| Error::Parse {
        location: format!("estimate line {line}"),
        message,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == "family,D,c,d" => {}
        _ => return Err(perr(1, "expected header 'family,D,c,d'".into())),
    }
    let (ln, meta) = lines
        .next()
        .ok_or_else(|| perr(2, "missing model row".into()))?;
    let fields: Vec<&str> = meta.split(',').map(str::trim).collect();
    if fields.len() != 4 {
        return Err(perr(ln + 1, format!("expected 4 fields, got {}", fields.len())));
    }
    let family: BasisFamily = fields[0].parse()?;
    let dim: usize = fields[1]
        .parse()
        .map_err(|_| perr(ln + 1, format!("bad dimension '{}'", fields[1])))?;
    let num = |s: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| perr(ln + 1, format!("bad number '{s}'")))
    };
    let domain = Interval::new(num(fields[2])?, num(fields[3])?)?;
    let model = ModelSpec::with_dimension(family, dim, domain)?;
    let coefficients = lines
        .map(|(i, l)| {
            l.trim()
                .parse::<f64>()
                .map_err(|_| perr(i + 1, format!("bad coefficient '{l}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    let expected = dim.pow(arity);
    if coefficients.len() != expected {
        return Err(perr(
            0,
            format!("expected {expected} coefficients, found {}", coefficients.len()),
        ));
    }
    Ok((model, coefficients))
}
