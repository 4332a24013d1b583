//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the estimator's coefficient or contrast shortcuts;
//! inner products come from quadrature and minima from direct search.

#![allow(dead_code)]

use markov_density::basis::{BasisFamily, Interval, ModelCollection, ModelSpec};
use markov_density::quad::gauss_legendre;

pub fn all_families() -> Vec<BasisFamily> {
    let mut v = vec![
        BasisFamily::Histogram,
        BasisFamily::Trigonometric,
        BasisFamily::Haar,
    ];
    v.extend((0..=3).map(|degree| BasisFamily::PiecewisePolynomial { degree }));
    v
}

/// Composite Gauss-Legendre nodes and weights over `domain`; the panel edges
/// are dyadic when `panels` is a power of two.
pub fn gl_rule(domain: Interval, panels: usize, points: usize) -> (Vec<f64>, Vec<f64>) {
    let (t, w) = gauss_legendre(points);
    let h = domain.width() / panels as f64;
    let mut xs = Vec::with_capacity(panels * points);
    let mut ws = Vec::with_capacity(panels * points);
    for p in 0..panels {
        let mid = domain.lo() + (p as f64 + 0.5) * h;
        for (ti, wi) in t.iter().zip(&w) {
            xs.push(mid + 0.5 * h * ti);
            ws.push(0.5 * h * wi);
        }
    }
    (xs, ws)
}

pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels: usize) -> f64 {
    let (xs, ws) = gl_rule(Interval::new(lo, hi).unwrap(), panels, 8);
    xs.iter().zip(&ws).map(|(x, w)| w * f(*x)).sum()
}

/// Basis values at `points`, row-major `points x D`.
pub fn basis_values(model: &ModelSpec, points: &[f64]) -> Vec<f64> {
    let d = model.dim();
    let mut out = vec![0.0; points.len() * d];
    for (row, &x) in out.chunks_mut(d).zip(points) {
        model.eval_all(x, row);
    }
    out
}

/// `<phi_l, phi_m>` for all pairs by Gauss-Legendre quadrature.
pub fn gram_gauss(model: &ModelSpec) -> Vec<f64> {
    let (xs, ws) = gl_rule(model.domain(), 512, 8);
    let d = model.dim();
    let vals = basis_values(model, &xs);
    let mut g = vec![0.0; d * d];
    for (row, w) in vals.chunks(d).zip(&ws) {
        for l in 0..d {
            if row[l] == 0.0 {
                continue;
            }
            for m in 0..d {
                g[l * d + m] += w * row[l] * row[m];
            }
        }
    }
    g
}

/// Value of the empirical contrast `||t||^2 - (2/n) sum t(X_i)` at the
/// coefficient vector `c`, with `||t||^2 = c' G c`.
pub fn contrast_at(gram: &[f64], sums: &[f64], n: usize, c: &[f64]) -> f64 {
    let d = c.len();
    let mut quad = 0.0;
    for l in 0..d {
        for m in 0..d {
            quad += c[l] * gram[l * d + m] * c[m];
        }
    }
    let lin: f64 = c.iter().zip(sums).map(|(a, b)| a * b).sum();
    quad - 2.0 * lin / n as f64
}

/// Minimum of the empirical contrast over the span of `model`, by a
/// shrinking grid search around the current best point. The contrast is a
/// convex quadratic, so the search converges to the global minimum.
pub fn brute_force_min_contrast(sample: &[f64], model: &ModelSpec) -> f64 {
    let d = model.dim();
    let gram = gram_gauss(model);
    let mut sums = vec![0.0; d];
    let mut buf = vec![0.0; d];
    for &x in sample {
        model.eval_all(x, &mut buf);
        for (s, v) in sums.iter_mut().zip(&buf) {
            *s += v;
        }
    }
    let n = sample.len();
    let mut center = vec![0.0; d];
    let mut best = contrast_at(&gram, &sums, n, &center);
    let scale = sums.iter().fold(0.0f64, |m, s| m.max(s.abs())) / n as f64;
    let mut step = 2.0 * scale + 1.0;
    let offsets = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let cells = offsets.len().pow(d as u32);
    let mut trial = vec![0.0; d];
    while step > 1e-14 {
        let mut improved = false;
        let mut best_point = center.clone();
        for code in 0..cells {
            let mut rest = code;
            for (k, slot) in trial.iter_mut().enumerate() {
                *slot = center[k] + step * offsets[rest % offsets.len()];
                rest /= offsets.len();
            }
            let v = contrast_at(&gram, &sums, n, &trial);
            if v < best {
                best = v;
                best_point.copy_from_slice(&trial);
                improved = true;
            }
        }
        if improved {
            center = best_point;
        } else {
            step *= 0.5;
        }
    }
    best
}

/// Dimension chosen by minimizing `min_{t in S_m} contrast + K D_m / n` with
/// every minimum found by [`brute_force_min_contrast`]; ties go to the
/// smaller dimension.
pub fn brute_force_select(sample: &[f64], collection: &ModelCollection, k: f64) -> (usize, Vec<f64>) {
    let n = sample.len() as f64;
    let mut crits = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    for model in collection.models() {
        let crit = brute_force_min_contrast(sample, model) + k * model.dim() as f64 / n;
        crits.push(crit);
        if best.is_none_or(|(_, b)| crit < b) {
            best = Some((model.dim(), crit));
        }
    }
    (best.unwrap().0, crits)
}

/// Standard normal CDF by quadrature of the density.
pub fn normal_cdf(x: f64) -> f64 {
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if x >= 0.0 {
        0.5 + integrate(pdf, 0.0, x.max(1e-300), 16)
    } else {
        0.5 - integrate(pdf, x, 0.0, 16)
    }
}

/// Gamma at positive multiples of one half, from the factorial and
/// double-factorial closed forms.
pub fn gamma_half_integer(z: f64) -> f64 {
    let twice = (2.0 * z).round() as u64;
    assert!(twice >= 1 && (2.0 * z - twice as f64).abs() < 1e-12);
    if twice % 2 == 0 {
        (1..twice / 2).map(|k| k as f64).product()
    } else {
        // Gamma(k + 1/2) = sqrt(pi) (2k - 1)!! / 2^k
        let k = (twice - 1) / 2;
        let mut v = std::f64::consts::PI.sqrt();
        for j in 1..=k {
            v *= (2 * j - 1) as f64 / 2.0;
        }
        v
    }
}

/// `I_nu(x)` summed term by term from the defining power series.
pub fn bessel_series_oracle(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let q = 0.25 * x * x;
    let mut term = (0.5 * x).powf(nu) / gamma_half_integer(nu + 1.0);
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + nu));
        sum += term;
        if term < 1e-17 * sum && k > q.sqrt() {
            break;
        }
    }
    sum
}

/// `ln Gamma(x)` from the Stirling series, shifted up by the recurrence
/// until the argument is at least 15.
pub fn ln_gamma_stirling_oracle(x: f64) -> f64 {
    let mut shift = 0.0;
    let mut z = x;
    while z < 15.0 {
        shift += z.ln();
        z += 1.0;
    }
    let z2 = z * z;
    let series = 1.0 / (12.0 * z) - 1.0 / (360.0 * z * z2) + 1.0 / (1260.0 * z * z2 * z2)
        - 1.0 / (1680.0 * z * z2 * z2 * z2)
        + 1.0 / (1188.0 * z * z2 * z2 * z2 * z2);
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln() + series - shift
}
