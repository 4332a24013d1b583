mod common;

use markov_density::basis::Interval;
use markov_density::chains::{simulate, ChainKind, ChainSpec, ARCH_BURN_IN, PRESET_IDS};
use markov_density::Error;

use common::{integrate, normal_cdf};

/// `int pi(x, y) dy`; the CIR-type kernels are integrated in `s = sqrt(y)`
/// to tame the behaviour at the origin.
fn kernel_mass(spec: &ChainSpec, x: f64) -> f64 {
    match spec.kind {
        ChainKind::Ar { a, b, sigma2 } => {
            let m = a * x + b;
            let w = 15.0 * sigma2.sqrt();
            integrate(|y| spec.transition_density(x, y), m - w, m + w, 400)
        }
        ChainKind::SqrtCir { .. } => integrate(|y| spec.transition_density(x, y), 0.0, 80.0, 2000),
        ChainKind::Cir { .. } => integrate(
            |s| 2.0 * s * spec.transition_density(x, s * s),
            0.0,
            12.0,
            2000,
        ),
        ChainKind::Arch => {
            let w = 15.0 * (x.cos() + 3.0);
            integrate(|y| spec.transition_density(x, y), x.sin() - w, x.sin() + w, 800)
        }
    }
}

fn representative_points(spec: &ChainSpec) -> Vec<f64> {
    let d = spec.domain;
    (0..5)
        .map(|i| d.lo() + d.width() * (0.1 + 0.2 * i as f64))
        .collect()
}

#[test]
fn kernels_integrate_to_one() {
    for spec in ChainSpec::presets() {
        for x in representative_points(&spec) {
            let mass = kernel_mass(&spec, x);
            assert!((mass - 1.0).abs() < 1e-5, "{} x={x}: mass {mass}", spec.id);
        }
    }
}

#[test]
fn cir3_kernel_mass_on_bounded_range() {
    let spec = ChainSpec::preset("cir3").unwrap();
    let mass = integrate(|s| 2.0 * s * spec.transition_density(1.0, s * s), 0.0, 40f64.sqrt(), 2000);
    assert!((mass - 1.0).abs() < 1e-5, "{mass}");
}

#[test]
fn stationary_density_is_a_fixed_point_of_the_kernel() {
    for spec in ChainSpec::presets().into_iter().filter(ChainSpec::has_stationary_density) {
        let f = |x: f64| spec.stationary_density(x).unwrap();
        for y in representative_points(&spec) {
            let pushed = match spec.kind {
                ChainKind::Ar { a, b, sigma2 } => {
                    let mean = b / (1.0 - a);
                    let w = 15.0 * (sigma2 / (1.0 - a * a)).sqrt();
                    integrate(|x| f(x) * spec.transition_density(x, y), mean - w, mean + w, 800)
                }
                ChainKind::SqrtCir { .. } => {
                    integrate(|x| f(x) * spec.transition_density(x, y), 0.0, 80.0, 2000)
                }
                _ => integrate(
                    |s| 2.0 * s * f(s * s) * spec.transition_density(s * s, y),
                    0.0,
                    12.0,
                    2000,
                ),
            };
            let target = f(y);
            assert!((pushed - target).abs() < 1e-4, "{} y={y}: {pushed} vs {target}", spec.id);
        }
    }
}

#[test]
fn stationary_densities_integrate_to_one() {
    let sq = ChainSpec::new(
        "sq",
        ChainKind::SqrtCir {
            a: 0.5,
            beta: 3.0,
            delta: 3,
        },
        Interval::new(2.0, 10.0).unwrap(),
        0,
    )
    .unwrap();
    let mass = integrate(|x| sq.stationary_density(x).unwrap(), 0.0, 100.0, 2000);
    assert!((mass - 1.0).abs() < 1e-6, "{mass}");
    for spec in ChainSpec::presets().into_iter().filter(ChainSpec::has_stationary_density) {
        let mass = match spec.kind {
            ChainKind::Ar { .. } => integrate(|x| spec.stationary_density(x).unwrap(), -40.0, 40.0, 2000),
            ChainKind::SqrtCir { .. } => integrate(|x| spec.stationary_density(x).unwrap(), 0.0, 100.0, 2000),
            _ => integrate(|s| 2.0 * s * spec.stationary_density(s * s).unwrap(), 0.0, 12.0, 2000),
        };
        assert!((mass - 1.0).abs() < 1e-6, "{}: {mass}", spec.id);
    }
}

/// The CIR kernel is the image of the radial kernel under `y -> y^2`.
#[test]
fn cir_kernel_is_the_squared_radial_kernel() {
    for (a, beta, delta) in [(0.75, (7.0f64 / 48.0).sqrt(), 4), (1.0 / 3.0, 0.75, 2), (0.5, 1.2, 3)] {
        let dom = Interval::unit();
        let cir = ChainSpec::new("c", ChainKind::Cir { a, beta, delta }, dom, 0).unwrap();
        let rad = ChainSpec::new("r", ChainKind::SqrtCir { a, beta, delta }, dom, 0).unwrap();
        for x in [0.05, 0.4, 1.0, 2.5] {
            for y in [0.01, 0.3, 1.0, 2.0, 4.0] {
                let direct = cir.transition_density(x, y);
                let mapped = rad.transition_density(x.sqrt(), y.sqrt()) / (2.0 * y.sqrt());
                assert!(
                    (direct - mapped).abs() <= 1e-12 * mapped.abs().max(1e-300),
                    "x={x} y={y}: {direct} vs {mapped}"
                );
            }
            let fx = cir.stationary_density(x).unwrap();
            let gx = rad.stationary_density(x.sqrt()).unwrap() / (2.0 * x.sqrt());
            assert!((fx - gx).abs() < 1e-12 * gx);
        }
    }
}

#[test]
fn closed_form_examples() {
    let ar2 = ChainSpec::preset("ar2").unwrap();
    let mode = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    assert!((ar2.transition_density(4.0, 5.0) - mode).abs() < 1e-15);
    let arch = ChainSpec::preset("arch").unwrap();
    for y in [-3.0f64, 0.0, 1.5, 7.0] {
        let want = (-(y / 4.0) * (y / 4.0) / 2.0).exp() * mode / 4.0;
        assert!((arch.transition_density(0.0, y) - want).abs() < 1e-15);
    }
    assert!(matches!(arch.stationary_density(1.0), Err(Error::Unsupported(_))));
    let ar1 = ChainSpec::preset("ar1").unwrap();
    assert!((ar1.stationary_density(0.0).unwrap() - 0.39894228040143267).abs() < 1e-15);
    let sq = ChainSpec::preset("sqrtcir").unwrap();
    assert_eq!(sq.stationary_density(-1.0).unwrap(), 0.0);
    assert_eq!(sq.transition_density(-1.0, 2.0), 0.0);
    assert_eq!(ChainSpec::preset("cir3").unwrap().transition_density(0.0, 1.0), 0.0);
}

#[test]
fn ar1_sample_follows_the_standard_normal_law() {
    let spec = ChainSpec::preset("ar1").unwrap();
    let sample = simulate(&spec, 100_000, 2024).unwrap();
    let mut xs = sample.values().to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut ks: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = normal_cdf(x);
        ks = ks.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    assert!(ks < 0.01, "KS distance {ks}");
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    assert!(mean.abs() < 0.03 && (var - 1.0).abs() < 0.03, "mean {mean}, var {var}");
}

#[test]
fn white_noise_chain_is_uncorrelated() {
    let spec = ChainSpec::new(
        "iid",
        ChainKind::Ar {
            a: 0.0,
            b: 0.0,
            sigma2: 1.0,
        },
        Interval::new(-3.0, 3.0).unwrap(),
        0,
    )
    .unwrap();
    let xs = simulate(&spec, 100_000, 5).unwrap().into_values();
    let n = xs.len() as f64;
    let lag1 = xs.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / (n - 1.0);
    let var = xs.iter().map(|x| x * x).sum::<f64>() / n;
    assert!(lag1.abs() < 0.015, "lag-1 product mean {lag1}");
    assert!((var - 1.0).abs() < 0.02);
}

#[test]
fn cir3_long_run_mean() {
    let spec = ChainSpec::preset("cir3").unwrap();
    let xs = simulate(&spec, 200_000, 9).unwrap().into_values();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    assert!((mean - 4.0 / 3.0).abs() < 0.02, "mean {mean}");
    assert!(xs.iter().all(|&x| x > 0.0));
}

#[test]
fn simulation_is_deterministic_and_sized() {
    for id in PRESET_IDS {
        let spec = ChainSpec::preset(id).unwrap();
        let a = simulate(&spec, 300, 17).unwrap();
        let b = simulate(&spec, 300, 17).unwrap();
        let c = simulate(&spec, 300, 18).unwrap();
        assert_eq!(a.len(), 300);
        assert_eq!(a, b);
        assert_ne!(a.values(), c.values());
        assert_eq!(a.seed(), 17);
        assert!(a.values().iter().all(|v| v.is_finite()));
    }
    let arch = ChainSpec::preset("arch").unwrap();
    assert_eq!(arch.burn_in, ARCH_BURN_IN);
    assert_eq!(simulate(&arch, 100, 0).unwrap().len(), 100);
    assert!(simulate(&arch, 1, 0).is_err());
}

#[test]
fn arch_burn_in_is_discarded() {
    let arch = ChainSpec::preset("arch").unwrap();
    let mut no_burn = arch.clone();
    no_burn.burn_in = 0;
    let kept = simulate(&arch, 50, 3).unwrap();
    let full = simulate(&no_burn, 550, 3).unwrap();
    assert_eq!(kept.values(), &full.values()[500..]);
    assert_eq!(full.values()[0], 0.0);
}

#[test]
fn sample_csv_has_header_and_round_trips() {
    let spec = ChainSpec::preset("ar2").unwrap();
    let sample = simulate(&spec, 20, 1).unwrap();
    let csv = sample.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x"));
    let back: Vec<f64> = lines.map(|l| l.parse().unwrap()).collect();
    assert_eq!(back, sample.values());
}
