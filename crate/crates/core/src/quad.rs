//! Quadrature helpers: composite midpoint (the integrator behind every MISE
//! figure) and composite Gauss-Legendre (used where exactness on piecewise
//! polynomials matters).

use crate::basis::Interval;

/// Midpoints of `n` equal cells covering `domain`.
pub fn midpoint_nodes(domain: Interval, n: usize) -> Vec<f64> {
    let h = domain.width() / n as f64;
    (0..n).map(|i| domain.lo() + (i as f64 + 0.5) * h).collect()
}

/// Composite midpoint rule for `f` over `domain` with `n` cells.
pub fn midpoint<F: Fn(f64) -> f64>(f: F, domain: Interval, n: usize) -> f64 {
    let h = domain.width() / n as f64;
    let sum: f64 = midpoint_nodes(domain, n).into_iter().map(f).sum();
    sum * h
}

/// Composite midpoint rule over the square `domain x domain`, `n` cells per axis.
pub fn midpoint_2d<F: Fn(f64, f64) -> f64>(f: F, domain: Interval, n: usize) -> f64 {
    let h = domain.width() / n as f64;
    let nodes = midpoint_nodes(domain, n);
    let mut sum = 0.0;
    for &x in &nodes {
        for &y in &nodes {
            sum += f(x, y);
        }
    }
    sum * h * h
}

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre(points: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(points >= 1, "need at least one node");
    let mut nodes = vec![0.0; points];
    let mut weights = vec![0.0; points];
    let n = points as f64;
    for i in 0..points.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(points, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(points, z);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[points - 1 - i] = z;
        weights[i] = w;
        weights[points - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    (p1, n * (z * p1 - p0) / (z * z - 1.0))
}

/// Composite Gauss-Legendre rule: `panels` equal panels, `points` nodes each.
pub fn gauss_legendre_composite<F: Fn(f64) -> f64>(
    f: F,
    domain: Interval,
    panels: usize,
    points: usize,
) -> f64 {
    let (nodes, weights) = gauss_legendre(points);
    let h = domain.width() / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = domain.lo() + (p as f64 + 0.5) * h;
        let mut s = 0.0;
        for (t, w) in nodes.iter().zip(&weights) {
            s += w * f(mid + 0.5 * h * t);
        }
        total += 0.5 * h * s;
    }
    total
}
