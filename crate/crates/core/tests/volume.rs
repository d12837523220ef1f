use std::f64::consts::PI;

use nalgebra::DMatrix;
use proptest::prelude::*;
use statrs::function::gamma::gamma;

use starlab::bodies::*;
use starlab::centroid::*;
use starlab::densities::Density;
use starlab::numerics::rng::RngStream;
use starlab::numerics::sampling::{dot, gaussian_vec};
use starlab::numerics::{sphere_quadrature, SphereMode};
use starlab::volume::*;
use starlab::Error;

fn stream(i: u64) -> RngStream {
    RngStream::new(2024, i)
}

fn grid(n: usize, res: usize) -> starlab::numerics::SphereGrid {
    sphere_quadrature(n, res, SphereMode::Deterministic, None).unwrap()
}

/// `|B_p^n| = (2 Gamma(1 + 1/p))^n / Gamma(1 + n/p)`.
fn lp_ball_volume(n: usize, p: f64) -> f64 {
    (2.0 * gamma(1.0 + 1.0 / p)).powi(n as i32) / gamma(1.0 + n as f64 / p)
}

fn random_matrix(n: usize, big_n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = stream(seed).block_rng(0);
    let v = gaussian_vec(&mut rng, n * big_n);
    DMatrix::from_column_slice(n, big_n, &v)
}

fn columns(x: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..x.ncols()).map(|j| x.column(j).iter().copied().collect()).collect()
}

fn random_empirical(n: usize, big_n: usize, p: f64, seed: u64) -> EmpiricalDualCentroid {
    let mut rng = stream(seed).block_rng(0);
    let x = BlockSampleMatrix::sample(&Density::ball(n, 1.0), &vec![1; big_n], &mut rng).unwrap();
    empirical_dual_centroid(x, vec![SupportBody::unit_segment(); big_n], p).unwrap()
}

#[test]
fn radial_examples() {
    let disc = BallBody::centered(2, 1.0).unwrap();
    let e = volume_radial(&disc, &grid(2, 64)).unwrap();
    assert!((e.value - PI).abs() < 1e-10);
    assert_eq!(e.stderr, 0.0);

    let ball = BallBody::centered(3, 2.0).unwrap();
    let e = volume_radial(&ball, &grid(3, 64)).unwrap();
    assert!((e.value / (32.0 * PI / 3.0) - 1.0).abs() < 1e-3);

    // radius 3 pi / 4 comes from the centroid oracle
    let z1 = ExactDualCentroid::new(Density::ball(2, 1.0), &SupportBody::unit_segment(), 1.0).unwrap();
    let e = volume_radial(&z1, &grid(2, 64)).unwrap();
    let r = 3.0 * PI / 4.0;
    assert!((e.value / (PI * r * r) - 1.0).abs() < 1e-3);
}

#[test]
fn radial_quadrature_error_and_monte_carlo_grids() {
    let shifted = BallBody::new(vec![0.4, 0.1], 1.0).unwrap();
    let exact = PI;
    let e = volume_radial_at(&shifted, 128, None).unwrap();
    assert!((e.value - exact).abs() <= e.quad_error.max(1e-12));
    assert!(e.ci95.0 <= e.value && e.value <= e.ci95.1);

    let g = sphere_quadrature(4, 20_000, SphereMode::MonteCarlo, Some(&stream(3))).unwrap();
    let e = volume_radial(&BallBody::centered(4, 1.0).unwrap(), &g).unwrap();
    // constant radial function: no spread
    assert!((e.value - PI * PI / 2.0).abs() < 1e-9);
    let e = volume_radial(&shifted_4d(), &g).unwrap();
    assert!(e.stderr > 0.0);
    assert!((e.value - PI * PI / 2.0).abs() < 4.0 * e.stderr);
}

fn shifted_4d() -> BallBody {
    BallBody::new(vec![0.3, 0.0, 0.2, 0.0], 1.0).unwrap()
}

#[test]
fn infinite_nodes_are_dropped_or_rejected() {
    let g = grid(2, 400);
    let first = g.nodes[0].clone();
    let one_spike = FnBody::new(2, move |u: &[f64]| {
        if (u[0] - first[0]).abs() < 1e-12 && (u[1] - first[1]).abs() < 1e-12 {
            f64::INFINITY
        } else {
            1.0
        }
    });
    let e = volume_radial(&one_spike, &g).unwrap();
    assert_eq!(e.dropped, 1);
    assert!((e.value - PI).abs() < 1e-12);

    let half = FnBody::new(2, |u: &[f64]| if u[0] > 0.0 { f64::INFINITY } else { 1.0 });
    match volume_radial(&half, &g) {
        Err(Error::Unbounded { infinite, total }) => {
            assert_eq!(total, 400);
            assert_eq!(infinite, 200);
        }
        other => panic!("expected Unbounded, got {other:?}"),
    }
    let nan = FnBody::new(2, |_: &[f64]| f64::NAN);
    assert!(volume_radial(&nan, &g).is_err());
    let wrong_dim = BallBody::centered(3, 1.0).unwrap();
    assert!(volume_radial(&wrong_dim, &g).is_err());
}

#[test]
fn gaussian_examples() {
    // the raw estimator has finite variance only for 2s < n
    for &(n, r, s) in &[(2, 2.0, 0.7), (3, 0.5, 1.2), (2, 1.3, 0.9)] {
        let ball = BallBody::centered(n, r).unwrap();
        let e = volume_gaussian(&ball, s, 4096, &stream(5), GaussianMode::Conditional).unwrap();
        assert!((e.value / f64::powf(r, s) - 1.0).abs() < 1e-12);
        let raw = volume_gaussian(&ball, s, 200_000, &stream(6), GaussianMode::Raw).unwrap();
        assert!((raw.value - f64::powf(r, s)).abs() < 4.0 * raw.stderr, "{raw:?}");
    }
    let disc = BallBody::centered(2, 1.0).unwrap();
    let e = volume_gaussian(&disc, 1.9, 200_000, &stream(7), GaussianMode::Conditional).unwrap();
    assert!((e.value - 1.0).abs() <= 4.0 * e.stderr + 1e-12);
    let shifted = BallBody::new(vec![0.3, 0.4], 1.0).unwrap();
    let oracle = volume_radial(&FnBody::new(2, |u: &[f64]| shifted.radial(u).powf(0.95)), &grid(2, 4096))
        .unwrap()
        .value
        / PI;
    let e = volume_gaussian(&shifted, 1.9, 200_000, &stream(7), GaussianMode::Conditional).unwrap();
    assert!((e.value - oracle).abs() < 4.0 * e.stderr, "{e:?} vs {oracle}");

    for s in [0.0, 2.0, -1.0, f64::NAN] {
        assert!(volume_gaussian(&disc, s, 100, &stream(7), GaussianMode::Raw).is_err());
    }
}

#[test]
fn gaussian_volume_extrapolates_to_the_volume() {
    let ball = BallBody::centered(3, 1.5).unwrap();
    let e = gaussian_volume(&ball, 1000, &stream(8)).unwrap();
    assert!((e.value / (4.0 * PI / 3.0 * 1.5f64.powi(3)) - 1.0).abs() < 1e-5);

    let shifted = BallBody::new(vec![0.5, 0.2], 1.0).unwrap();
    let e = gaussian_volume(&shifted, 100_000, &stream(9)).unwrap();
    assert!((e.value - PI).abs() < 4.0 * e.stderr, "{e:?}");
    assert!(e.stderr < 0.01);
}

#[test]
fn exponential_examples() {
    let disc = BallBody::centered(2, 1.0).unwrap();
    let e = volume_exponential(&disc, 2.0, &grid(2, 64)).unwrap();
    assert!((e.value - PI).abs() < 1e-10);

    let cross = PolarBody(SupportBody::cube(2, 1.0).unwrap());
    let e = volume_exponential(&cross, 1.0, &grid(2, 4096)).unwrap();
    assert!((e.value - 2.0).abs() < 1e-5);
    let d = volume_exponential_direct(&cross, 1.0, 200_000, &stream(10)).unwrap();
    assert!((d.value - 2.0).abs() < 4.0 * d.stderr, "{d:?}");

    let d = volume_exponential_direct(&disc, 2.0, 100_000, &stream(11)).unwrap();
    assert!((d.value - PI).abs() < 4.0 * d.stderr, "{d:?}");

    assert!(volume_exponential(&disc, 0.0, &grid(2, 64)).is_err());
    assert!(volume_exponential(&disc, -1.0, &grid(2, 64)).is_err());
    assert!(volume_exponential_direct(&disc, 0.0, 100, &stream(1)).is_err());
}

#[test]
fn exponential_modes_agree_on_random_bodies() {
    for seed in 0..4u64 {
        let n = 2 + (seed % 2) as usize;
        let body = random_empirical(n, 6, 0.5, 40 + seed);
        let polar = volume_exponential(&body, 1.0, &grid(n, 128)).unwrap();
        let direct = volume_exponential_direct(&body, 1.0, 50_000, &stream(50 + seed)).unwrap();
        assert!(
            (polar.value - direct.value).abs() < 4.0 * direct.stderr + 1e-3 * polar.value,
            "{polar:?} {direct:?}"
        );
    }
}

#[test]
fn determinant_examples() {
    let id = DMatrix::<f64>::identity(2, 2);
    let e = polar_volume_determinant(&id, &[1.0, 1.0]).unwrap();
    assert!((e.value - PI).abs() < 1e-12);

    let x = random_matrix(3, 5, 1);
    let w = [0.3, 1.2, 2.0, 0.7, 1.1];
    let base = polar_volume_determinant(&x, &w).unwrap().value;
    let lam = 3.7;
    let wl: Vec<f64> = w.iter().map(|v| v * lam).collect();
    let scaled = polar_volume_determinant(&x, &wl).unwrap().value;
    assert!((scaled / base - lam.powf(-1.5)).abs() < 1e-12);

    let mut sing = DMatrix::<f64>::zeros(3, 4);
    sing[(0, 0)] = 1.0;
    sing[(1, 1)] = 1.0;
    sing[(0, 2)] = 2.0;
    match polar_volume_determinant(&sing, &[1.0; 4]) {
        Err(Error::Singular { rank, expected }) => {
            assert_eq!((rank, expected), (2, 3));
            assert!(Error::Singular { rank, expected }.to_string().contains("rank 2"));
        }
        other => panic!("expected Singular, got {other:?}"),
    }
    let short = random_matrix(3, 2, 2);
    assert!(matches!(
        polar_volume_determinant(&short, &[1.0, 1.0]),
        Err(Error::Singular { rank: 2, expected: 3 })
    ));
    assert!(polar_volume_determinant(&x, &[1.0; 3]).is_err());
    assert!(polar_volume_determinant(&x, &[1.0, -1.0, 1.0, 1.0, 1.0]).is_err());
}

#[test]
fn determinant_matches_radial_quadrature() {
    for seed in 0..20u64 {
        let n = 2 + (seed % 2) as usize;
        let big_n = n + (seed as usize % (7 - n));
        let x = random_matrix(n, big_n, 100 + seed);
        let w: Vec<f64> = (0..big_n).map(|i| 0.5 + ((seed + i as u64) % 3) as f64).collect();
        let det = polar_volume_determinant(&x, &w).unwrap().value;
        let cols = columns(&x);
        let ww = w.clone();
        let polar = FnBody::new(n, move |u: &[f64]| {
            let h2: f64 = cols.iter().zip(&ww).map(|(c, wi)| wi * dot(c, u).powi(2)).sum();
            1.0 / h2.sqrt()
        });
        let quad = volume_radial(&polar, &grid(n, 512)).unwrap().value;
        assert!((quad / det - 1.0).abs() < 1e-3, "seed {seed}: {quad} vs {det}");
    }
}

fn nt_cfg(p: f64, budget: usize, inner: InnerVolume, seed: u64) -> MixtureConfig {
    MixtureConfig::new(p, budget, inner, stream(seed)).unwrap()
}

#[test]
fn nt_reproduces_l1_balls() {
    for (n, exact) in [(2usize, 2.0), (3, 4.0 / 3.0)] {
        let id = DMatrix::<f64>::identity(n, n);
        let e = nt_mixture_volume(&id, &nt_cfg(1.0, 100_000, InnerVolume::Determinant, 20)).unwrap();
        assert!((e.value / exact - 1.0).abs() < 0.02, "{e:?}");
    }
}

#[test]
fn nt_reproduces_lp_ball_closed_forms() {
    for n in [2usize, 3] {
        for p in [0.5, 1.0, 1.5] {
            let id = DMatrix::<f64>::identity(n, n);
            let e = nt_mixture_volume(&id, &nt_cfg(p, 20_000, InnerVolume::Determinant, 21)).unwrap();
            let exact = lp_ball_volume(n, p);
            assert!((e.value / exact - 1.0).abs() < 0.02, "n={n} p={p}: {} vs {exact}", e.value);
        }
    }
}

#[test]
fn nt_matches_section_quadrature() {
    for seed in 0..3u64 {
        let x = random_matrix(2, 3, 200 + seed);
        let cols = columns(&x);
        let section = FnBody::new(2, move |u: &[f64]| {
            1.0 / cols.iter().map(|c| dot(c, u).abs()).sum::<f64>()
        });
        let oracle = volume_radial(&section, &grid(2, 4096)).unwrap().value;
        let e = nt_mixture_volume(&x, &nt_cfg(1.0, 100_000, InnerVolume::Determinant, 30 + seed)).unwrap();
        assert!((e.value / oracle - 1.0).abs() < 0.02, "{} vs {oracle}", e.value);
        let q = nt_mixture_volume(
            &x,
            &nt_cfg(1.0, 2_000, InnerVolume::SphereQuadrature { resolution: 512 }, 30 + seed),
        )
        .unwrap();
        let d = nt_mixture_volume(&x, &nt_cfg(1.0, 2_000, InnerVolume::Determinant, 30 + seed)).unwrap();
        assert!((q.value / d.value - 1.0).abs() < 1e-4);
    }
}

#[test]
fn nt_approaches_determinant_as_p_tends_to_two() {
    let x = random_matrix(2, 4, 300);
    let det_value = polar_volume_determinant(&x, &[1.0; 4]).unwrap().value;
    let gap = |p: f64| {
        let e = nt_mixture_volume(&x, &nt_cfg(p, 20_000, InnerVolume::Determinant, 31)).unwrap();
        (e.value / det_value - 1.0).abs()
    };
    let (g1, g2, g3) = (gap(1.0), gap(1.7), gap(1.98));
    assert!(g3 < g2 && g2 < g1, "{g1} {g2} {g3}");
    assert!(g3 < 0.01);
}

#[test]
fn nt_generalized_matches_radial_quadrature() {
    // segments: the determinant and quadrature inner volumes agree
    let body = random_empirical(2, 4, 0.5, 400);
    let radial = volume_radial(&body, &grid(2, 2048)).unwrap().value;
    let e = nt_generalized_volume(
        body.matrix(),
        body.bodies(),
        &nt_cfg(0.5, 40_000, InnerVolume::Determinant, 32),
    )
    .unwrap();
    assert!((e.value - radial).abs() < 4.0 * e.stderr + 0.01 * radial, "{e:?} {radial}");

    // higher-dimensional bodies
    let mut rng = stream(401).block_rng(0);
    let x = BlockSampleMatrix::sample(&Density::cube(2, 1.0), &[3, 3, 3], &mut rng).unwrap();
    let bodies = vec![SupportBody::ball(3, 1.0).unwrap(); 3];
    let body = empirical_dual_centroid(x, bodies, 0.75).unwrap();
    let radial = volume_radial(&body, &grid(2, 2048)).unwrap().value;
    let e = nt_generalized_volume(
        body.matrix(),
        body.bodies(),
        &nt_cfg(0.75, 5_000, InnerVolume::SphereQuadrature { resolution: 256 }, 33),
    )
    .unwrap();
    assert!((e.value - radial).abs() < 4.0 * e.stderr + 0.01 * radial, "{e:?} {radial}");
    assert!(nt_generalized_volume(
        body.matrix(),
        body.bodies(),
        &nt_cfg(0.75, 5_000, InnerVolume::Determinant, 33)
    )
    .is_err());
}

#[test]
fn mixture_config_validation() {
    let s = stream(0);
    assert!(MixtureConfig::new(0.0, 1000, InnerVolume::Determinant, s).is_err());
    assert!(MixtureConfig::new(2.0, 1000, InnerVolume::Determinant, s).is_err());
    assert!(MixtureConfig::new(1.0, 999, InnerVolume::Determinant, s).is_err());
    assert!(MixtureConfig::new(1.0, 1000, InnerVolume::SphereQuadrature { resolution: 4 }, s).is_err());
    let flat = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
    let cfg = nt_cfg(1.0, 1000, InnerVolume::Determinant, 0);
    assert!(matches!(
        nt_mixture_volume(&flat, &cfg),
        Err(Error::Singular { rank: 1, expected: 2 })
    ));
}

fn scaled_identity_block(r: f64) -> BlockSampleMatrix {
    BlockSampleMatrix::from_columns(vec![2], &[vec![1.0 / r, 0.0], vec![0.0, 1.0 / r]]).unwrap()
}

#[test]
fn gaussian_measure_examples() {
    let ball = vec![SupportBody::ball(2, 1.0).unwrap()];
    for r in [0.5, 1.0, 2.0] {
        // polar of the image is the disc of radius r
        let x = scaled_identity_block(r);
        let e = gaussian_measure_polar(&x, &ball, &[1.0], 100_000, &stream(60)).unwrap();
        let exact = 1.0 - (-r * r / 2.0).exp();
        assert!((e.value - exact).abs() < 4.0 * e.stderr, "{e:?} vs {exact}");
    }
    let x = scaled_identity_block(1.0);
    let tiny = gaussian_measure_polar(&x, &ball, &[1e-6], 10_000, &stream(61)).unwrap();
    assert!(tiny.value > 0.999);
    assert!(gaussian_measure_polar(&x, &ball, &[0.0], 100, &stream(61)).is_err());
    assert!(gaussian_measure_polar(&x, &ball, &[1.0, 1.0], 100, &stream(61)).is_err());
}

#[test]
fn composition_helpers() {
    assert_eq!(compositions(2, 2), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
    assert_eq!(compositions(3, 3).len(), 10);
    assert_eq!(compositions(4, 2).len(), 5);
    assert_eq!(multinomial(&[1, 1]), 2.0);
    assert_eq!(multinomial(&[2, 1, 1]), 12.0);
    assert_eq!(multinomial(&[0, 3]), 1.0);
}

fn random_blocks(n: usize, widths: &[usize], seed: u64) -> BlockSampleMatrix {
    let mut rng = stream(seed).block_rng(0);
    BlockSampleMatrix::sample(&Density::cube(n, 1.0), widths, &mut rng).unwrap()
}

fn ind_cfg(case: IndicatorCase, seed: u64) -> IndicatorConfig {
    IndicatorConfig {
        case,
        samples: 100_000,
        stream: stream(seed),
    }
}

#[test]
fn indicator_geometric_cases() {
    let u = [0.6, -0.8];
    // N = 1 is the one-dimensional layer cake
    let x = random_blocks(2, &[1], 70);
    let seg = vec![SupportBody::unit_segment()];
    let r = indicator_rep_check(&x, &seg, &u, &ind_cfg(IndicatorCase::Geometric { s: 1.0 }, 71)).unwrap();
    let h = dot(x.column(0), &u).abs();
    assert!((r.direct - 1.0 / h).abs() < 1e-12);
    assert!(r.passed, "{r:?}");

    let x = random_blocks(2, &[1, 1], 72);
    let segs = vec![SupportBody::unit_segment(); 2];
    let r = indicator_rep_check(&x, &segs, &u, &ind_cfg(IndicatorCase::Geometric { s: 1.5 }, 73)).unwrap();
    let h1 = dot(x.column(0), &u).abs();
    let h2 = dot(x.column(1), &u).abs();
    assert!((r.direct - (h1 * h2).powf(-0.75)).abs() < 1e-12);
    assert!(r.passed, "{r:?}");

    let x = random_blocks(2, &[3, 3], 74);
    let balls = vec![SupportBody::ball(3, 1.0).unwrap(); 2];
    let r = indicator_rep_check(&x, &balls, &u, &ind_cfg(IndicatorCase::Geometric { s: 1.9 }, 75)).unwrap();
    assert!(r.passed, "{r:?}");
}

#[test]
fn indicator_multinomial_cases() {
    let u = [0.28, 0.96];
    let x = random_blocks(2, &[3, 3], 80);
    let balls = vec![SupportBody::ball(3, 1.0).unwrap(); 2];
    for (p, k) in [(-0.5, 1), (-0.5, 2), (-0.5, 3), (-1.0, 1)] {
        let r = indicator_rep_check(&x, &balls, &u, &ind_cfg(IndicatorCase::Multinomial { p, k }, 81)).unwrap();
        assert_eq!(r.terms, k + 1);
        let mut h = [0.0; 2];
        x.block_supports(&balls, &u, &mut h);
        let direct = ((h[0].powf(p) + h[1].powf(p)) / 2.0).powf(-(k as f64) / p * (-p));
        assert!((r.direct / direct - 1.0).abs() < 1e-12);
        assert!(r.passed, "p={p} k={k}: {r:?}");
    }
}

#[test]
fn indicator_errors() {
    let u = [1.0, 0.0];
    let x = random_blocks(2, &[1, 1], 90);
    let segs = vec![SupportBody::unit_segment(); 2];
    let cfg = |case| ind_cfg(case, 91);
    assert!(indicator_rep_check(&x, &segs, &[0.0, 0.0], &cfg(IndicatorCase::Geometric { s: 1.0 })).is_err());
    assert!(indicator_rep_check(&x, &segs, &u, &cfg(IndicatorCase::Geometric { s: 0.0 })).is_err());
    assert!(indicator_rep_check(&x, &segs, &u, &cfg(IndicatorCase::Multinomial { p: 0.5, k: 1 })).is_err());
    assert!(indicator_rep_check(&x, &segs, &u, &cfg(IndicatorCase::Multinomial { p: -1.5, k: 1 })).is_err());
    assert!(indicator_rep_check(&x, &segs, &u, &cfg(IndicatorCase::Multinomial { p: -0.5, k: 0 })).is_err());
    assert!(indicator_rep_check(&x, &segs[..1], &u, &cfg(IndicatorCase::Geometric { s: 1.0 })).is_err());
    let mut small = cfg(IndicatorCase::Geometric { s: 1.0 });
    small.samples = 200;
    let r = indicator_rep_check(&x, &segs, &u, &small).unwrap();
    assert!(r.inconclusive || r.passed);
}

#[test]
fn registry_lookup() {
    let reg = EstimatorRegistry::default();
    assert_eq!(reg.names(), vec!["radial", "gaussian", "exponential", "exponential-direct"]);
    assert!(matches!(reg.get("simplex"), Err(Error::InvalidParameter { .. })));
    let plan = VolumePlan {
        samples: 20_000,
        ..VolumePlan::default()
    };
    let disc = BallBody::centered(2, 1.0).unwrap();
    for name in reg.names() {
        let e = reg.estimate(name, &disc, &plan).unwrap();
        assert!((e.value - PI).abs() < 4.0 * e.total_error() + 1e-9, "{name}: {e:?}");
    }
}

#[test]
fn estimate_rows() {
    let e = Estimate::new(2.5, 0.1, 0.0, 1000, "gaussian").with_seed(RngStream::new(7, 1));
    assert!(e.ci95.0 < 2.5 && e.ci95.1 > 2.5);
    assert_eq!(Estimate::CSV_HEADER.split(',').count(), e.csv_row(None).split(',').count());
    assert!(e.csv_row(None).starts_with("gaussian,2.5"));
    assert!(e.csv_row(Some(0.25)).ends_with(",7,0.250"));
    let d = Estimate::deterministic(1.0, 0.0, 10, "radial");
    assert_eq!(d.stderr, 0.0);
    assert_eq!(d.ci95, (1.0, 1.0));
    let small = Estimate::new(0.01, 1.0, 0.0, 10, "x");
    assert!(small.ci95.0 >= 0.0 && small.ci95.0 <= small.value);
    assert!(e.agrees_with(&Estimate::new(2.8, 0.1, 0.0, 10, "y"), 4.0));
    assert!(!e.agrees_with(&Estimate::new(3.2, 0.1, 0.0, 10, "y"), 4.0));
}

#[test]
fn concordance_on_random_bodies() {
    let reg = EstimatorRegistry::default();
    for seed in 0..6u64 {
        let n = 2 + (seed % 2) as usize;
        let body = random_empirical(n, 5, 1.0, 500 + seed);
        let plan = VolumePlan {
            resolution: 192,
            samples: 40_000,
            exponent: 2.0,
            stream: stream(600 + seed),
        };
        let r = reg.estimate("radial", &body, &plan).unwrap();
        let g = reg.estimate("gaussian", &body, &plan).unwrap();
        let d = reg.estimate("exponential-direct", &body, &plan).unwrap();
        assert!(r.agrees_with(&g, 4.0), "{r:?} {g:?}");
        assert!(r.agrees_with(&d, 4.0), "{r:?} {d:?}");
        assert!(g.agrees_with(&d, 4.0), "{g:?} {d:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gaussian_measure_monotone_in_scales(
        seed in 0u64..1000,
        t1 in 0.2f64..3.0,
        t2 in 0.2f64..3.0,
        bump in 1.01f64..2.0,
        which in 0usize..2,
    ) {
        let x = random_blocks(2, &[3, 1], seed);
        let bodies = vec![SupportBody::ball(3, 1.0).unwrap(), SupportBody::unit_segment()];
        let t = [t1, t2];
        let mut t_big = t;
        t_big[which] *= bump;
        let s = stream(seed);
        let a = gaussian_measure_polar(&x, &bodies, &t, 2000, &s).unwrap();
        let b = gaussian_measure_polar(&x, &bodies, &t_big, 2000, &s).unwrap();
        prop_assert!(b.value <= a.value);
        // a larger body (ball ⊇ segment) gives a smaller polar
        let fat = vec![SupportBody::ball(3, 1.0).unwrap(), SupportBody::ball(1, 1.5).unwrap()];
        let c = gaussian_measure_polar(&x, &fat, &t, 2000, &s).unwrap();
        prop_assert!(c.value <= a.value);
    }

    #[test]
    fn determinant_agrees_with_quadrature(seed in 0u64..500, extra in 0usize..4) {
        let n = 2 + (seed % 2) as usize;
        let x = random_matrix(n, n + extra, seed);
        let w: Vec<f64> = (0..n + extra).map(|i| ((seed + 3 * i as u64) % 7 + 1) as f64 * 0.25).collect();
        // very elongated ellipsoids need finer grids than a test can afford
        let sv = x.clone().svd(false, false).singular_values;
        prop_assume!(sv.max() / sv.min() < 30.0);
        let det = polar_volume_determinant(&x, &w).unwrap().value;
        let cols = columns(&x);
        let ww = w.clone();
        let polar = FnBody::new(n, move |u: &[f64]| {
            1.0 / cols.iter().zip(&ww).map(|(c, wi)| wi * dot(c, u).powi(2)).sum::<f64>().sqrt()
        });
        let res = if n == 2 { 4096 } else { 512 };
        let quad = volume_radial(&polar, &grid(n, res)).unwrap().value;
        prop_assert!((quad / det - 1.0).abs() < 1e-3, "{} vs {}", quad, det);
    }
}
