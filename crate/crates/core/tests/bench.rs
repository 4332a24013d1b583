use markov_density::basis::{BasisFamily, Interval, ModelSpec};
use markov_density::bench::{
    log_log_slope, mise_1d, mise_2d, rate_experiment, run_bench, run_bench_with, BenchConfig,
    RateTarget, Reference, BENCH_CSV_HEADER,
};
use markov_density::chains::ChainSpec;
use markov_density::estimator::{DensityEstimate1D, PenaltyConfig};

fn small_config(replications: usize) -> BenchConfig {
    BenchConfig {
        sizes: vec![100, 1000],
        replications,
        ..BenchConfig::default()
    }
}

#[test]
fn mise_of_constant_offsets_is_exact() {
    let dom = Interval::new(-2.0, 3.0).unwrap();
    let v = mise_1d(|x: f64| x.sin() + 0.25, |x: f64| x.sin(), dom, 16).unwrap();
    assert!((v - 0.0625 * 5.0).abs() < 1e-14);
    let v2 = mise_2d(|x: f64, y: f64| x * y - 0.5, |x: f64, y: f64| x * y, dom, 16).unwrap();
    assert!((v2 - 0.25 * 25.0).abs() < 1e-12);
    let g = |x: f64| (-x * x).exp();
    assert_eq!(mise_1d(g, g, dom, 64).unwrap(), 0.0);
    assert!(mise_1d(g, g, dom, 15).is_err());
    assert!(mise_2d(|_, _| 0.0, |_, _| 0.0, dom, 8).is_err());
}

/// Gaussian against a histogram estimate: successive grid doublings shrink
/// the quadrature change by about four.
#[test]
fn midpoint_error_decays_quadratically() {
    let dom = Interval::new(-2.0, 2.0).unwrap();
    let model = ModelSpec::with_dimension(BasisFamily::Histogram, 8, dom).unwrap();
    let coeffs = vec![0.05, 0.15, 0.3, 0.45, 0.45, 0.3, 0.15, 0.05];
    let est = DensityEstimate1D::new(model, coeffs).unwrap();
    let truth = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let m = |grid| mise_1d(|x| est.eval(x), truth, dom, grid).unwrap();
    let diffs: Vec<f64> = [64, 128, 256].iter().map(|&g| (m(g) - m(2 * g)).abs()).collect();
    for w in diffs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio} from {diffs:?}");
    }
    let est2 = |x: f64, y: f64| est.eval(x) * est.eval(y);
    let truth2 = |x: f64, y: f64| truth(x) * truth(y);
    let m2 = |grid| mise_2d(est2, truth2, dom, grid).unwrap();
    let d2: Vec<f64> = [32, 64, 128].iter().map(|&g| (m2(g) - m2(2 * g)).abs()).collect();
    let ratio = d2[0] / d2[1];
    assert!((3.5..4.5).contains(&ratio), "2-D ratio {ratio}");
}

#[test]
fn estimate_reference_gives_zero_rows() {
    let cfg = BenchConfig {
        sizes: vec![60, 200],
        replications: 1,
        ..BenchConfig::default()
    };
    let res = run_bench_with(&cfg, Reference::Estimate).unwrap();
    assert_eq!(res.rows.len(), 6 * 2 * 2);
    for row in &res.rows {
        assert_eq!(row.mise_pi, 0.0);
        assert_eq!(row.se_pi, 0.0);
        if row.chain == "arch" {
            assert_eq!(row.mise_f, None);
        } else {
            assert_eq!(row.mise_f, Some(0.0));
        }
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let cfg = small_config(6);
    let runs: Vec<_> = [1, 2, 5]
        .iter()
        .map(|&threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_bench(&cfg).unwrap())
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
    assert_eq!(runs[0].to_csv(), runs[2].to_csv());
    assert_eq!(run_bench(&cfg).unwrap(), runs[0]);
}

#[test]
fn doubling_the_quadrature_grid_changes_mise_by_under_two_percent() {
    let coarse = small_config(10);
    let fine = BenchConfig {
        grid_1d: 2 * coarse.grid_1d,
        grid_2d: 2 * coarse.grid_2d,
        ..coarse.clone()
    };
    let a = run_bench(&coarse).unwrap();
    let b = run_bench(&fine).unwrap();
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        let rel = |x: f64, y: f64| (x - y).abs() / y;
        assert!(rel(ra.mise_pi, rb.mise_pi) < 0.02, "{} {} {}: pi {} vs {}", ra.chain, ra.basis, ra.n, ra.mise_pi, rb.mise_pi);
        if let (Some(x), Some(y)) = (ra.mise_f, rb.mise_f) {
            assert!(rel(x, y) < 0.02, "{} {} {}: f {x} vs {y}", ra.chain, ra.basis, ra.n);
        }
    }
}

#[test]
fn csv_layout() {
    let res = run_bench(&BenchConfig {
        sizes: vec![50],
        replications: 2,
        ..BenchConfig::default()
    })
    .unwrap();
    let csv = res.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(BENCH_CSV_HEADER));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 12);
    for (fields, row) in rows.iter().zip(&res.rows) {
        assert_eq!(fields.len(), 8);
        assert_eq!(fields[3], "2");
        if fields[0] == "arch" {
            assert_eq!((fields[4], fields[5]), ("", ""));
        } else {
            assert_eq!(fields[4].parse::<f64>().unwrap(), row.mise_f.unwrap());
        }
        assert_eq!(fields[6].parse::<f64>().unwrap(), row.mise_pi);
        assert!(row.mise_pi >= 0.0);
    }
}

#[test]
fn config_validation() {
    let ok = BenchConfig::default();
    assert!(ok.validate().is_ok());
    assert!(BenchConfig { replications: 0, ..ok.clone() }.validate().is_err());
    assert!(BenchConfig { grid_1d: 15, ..ok.clone() }.validate().is_err());
    assert!(BenchConfig { grid_2d: 8, ..ok.clone() }.validate().is_err());
    assert!(BenchConfig { sizes: vec![], ..ok.clone() }.validate().is_err());
    assert!(run_bench(&BenchConfig { replications: 0, ..ok }).is_err());
}

#[test]
fn slope_of_exact_power_laws() {
    let sizes = [100, 300, 1000, 3000, 10_000];
    for (c, p) in [(3.0, -1.0), (0.7, -0.5), (12.0, -2.0 / 3.0)] {
        let values: Vec<f64> = sizes.iter().map(|&n| c * (n as f64).powf(p)).collect();
        let s = log_log_slope(&sizes, &values).unwrap();
        assert!((s - p).abs() < 1e-12, "{s} vs {p}");
    }
    assert!(log_log_slope(&[100, 200, 300], &[1.0, 0.5, 0.3]).is_err());
    assert!(log_log_slope(&[100, 200, 300, 500], &[1.0, 0.5, 0.3, 0.2]).is_err());
    assert!(log_log_slope(&[100, 300, 1000, 3000], &[1.0, 0.0, 0.3, 0.2]).is_err());
}

#[test]
fn transition_rate_is_slower_than_stationary_rate() {
    let chain = ChainSpec::preset("ar1").unwrap();
    let sizes = [100, 300, 1000, 3000];
    let pen = PenaltyConfig::default();
    let f = rate_experiment(&chain, BasisFamily::Histogram, &sizes, 30, &pen, RateTarget::Stationary).unwrap();
    let pi = rate_experiment(&chain, BasisFamily::Histogram, &sizes, 30, &pen, RateTarget::Transition).unwrap();
    assert!(f.slope < 0.0 && pi.slope < 0.0);
    assert!(pi.slope > f.slope, "pi slope {} vs f slope {}", pi.slope, f.slope);
    assert_eq!(f.means.len(), 4);
    assert!(f.to_csv().starts_with("n,mise,se\n"));
}

#[test]
fn rate_needs_a_closed_form_density() {
    let arch = ChainSpec::preset("arch").unwrap();
    let sizes = [100, 300, 1000, 3000];
    let pen = PenaltyConfig::default();
    assert!(rate_experiment(&arch, BasisFamily::Trigonometric, &sizes, 2, &pen, RateTarget::Stationary).is_err());
    assert!(rate_experiment(&arch, BasisFamily::Trigonometric, &sizes, 2, &pen, RateTarget::Transition).is_ok());
}
