//! Cross-checks against implementations that share no code with the crate.

mod common;

use logigrow_core::model::{logistic_rhs, logistic_solution, offset_rhs, offset_solution};
use logigrow_core::solver::{rk4_integrate, DEFAULT_STEP};
use logigrow_core::stats::{chi_square_sf, f_sf, keenan_test};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor};

#[test]
fn chi_square_matches_statrs() {
    for df in [1usize, 2, 3, 5, 10, 30, 100] {
        let dist = ChiSquared::new(df as f64).unwrap();
        for k in 0..200 {
            let x = k as f64 * 0.25 * (1.0 + df as f64 / 10.0);
            let (ours, theirs) = (chi_square_sf(x, df), dist.sf(x));
            assert!(
                (ours - theirs).abs() < 1e-9,
                "df={df} x={x}: {ours} vs {theirs}"
            );
        }
    }
}

#[test]
fn f_matches_statrs() {
    for (d1, d2) in [
        (1usize, 5usize),
        (1, 100),
        (1, 385),
        (3, 7),
        (10, 20),
        (2, 2),
    ] {
        let dist = FisherSnedecor::new(d1 as f64, d2 as f64).unwrap();
        for k in 1..200 {
            let x = k as f64 * 0.05;
            let (ours, theirs) = (f_sf(x, d1, d2), dist.sf(x));
            assert!(
                (ours - theirs).abs() < 1e-9,
                "({d1},{d2}) x={x}: {ours} vs {theirs}"
            );
        }
    }
}

/// `2·P(T > √x)` for `T ~ t(ν)`, by Simpson quadrature of the density on
/// `[0, √x]`.
fn t_two_sided_tail(x: f64, nu: f64) -> f64 {
    let ln_c = statrs::function::gamma::ln_gamma((nu + 1.0) / 2.0)
        - statrs::function::gamma::ln_gamma(nu / 2.0)
        - 0.5 * (nu * std::f64::consts::PI).ln();
    let density = |t: f64| (ln_c - (nu + 1.0) / 2.0 * (1.0 + t * t / nu).ln()).exp();
    let upper = x.sqrt();
    let n = 20_000;
    let h = upper / n as f64;
    let mut acc = density(0.0) + density(upper);
    for i in 1..n {
        acc += density(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    1.0 - 2.0 * acc * h / 3.0
}

#[test]
fn f_with_one_numerator_df_is_squared_t() {
    for nu in [3usize, 10, 50, 385] {
        for x in [0.1, 0.5, 1.0, 2.0, 3.936, 6.0, 10.0] {
            let ours = f_sf(x, 1, nu);
            let quad = t_two_sided_tail(x, nu as f64);
            assert!((ours - quad).abs() < 1e-9, "ν={nu} x={x}: {ours} vs {quad}");
        }
    }
}

// Values from an independent numpy/scipy implementation of the same
// three-regression procedure.
#[test]
fn keenan_matches_reference_implementation() {
    let mut spikes = vec![0.0; 395];
    spikes[100] = 3.0;
    spikes[103] = 2.0;
    let r = keenan_test(&spikes, 4).unwrap();
    assert!(
        (r.statistic - 52.98248027755466).abs() < 1e-8 * 52.98,
        "{r:?}"
    );
    assert!((r.p_value - 1.907889022915222e-12).abs() < 1e-15);

    spikes[103] = 0.0;
    spikes[215] = 2.0;
    spikes[100] = 0.0;
    spikes[55] = 3.0;
    let r = keenan_test(&spikes, 4).unwrap();
    assert!((r.statistic - 0.0015596022034059973).abs() < 1e-10, "{r:?}");
    assert!((r.p_value - 0.9685187619465879).abs() < 1e-9);

    let mut x = vec![0.3];
    for _ in 0..79 {
        let last = *x.last().unwrap();
        x.push(3.7 * last * (1.0 - last));
    }
    let r = keenan_test(&x, 2).unwrap();
    assert!(
        (r.statistic - 127780.65485823914).abs() < 1e-6 * 127780.0,
        "{r:?}"
    );
    assert_eq!(r.df2, 74);

    let y: Vec<f64> = (0..60)
        .map(|i| ((i * 37) % 17) as f64 + 0.01 * (i * i) as f64)
        .collect();
    let r = keenan_test(&y, 3).unwrap();
    assert!(
        (r.statistic - 0.00011700316595898496).abs() < 1e-10,
        "{r:?}"
    );
    assert!((r.p_value - 0.9914110037958005).abs() < 1e-9);
}

#[test]
fn closed_forms_match_rk4() {
    let mut rng = ChaCha8Rng::seed_from_u64(400);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let o = common::random_offset(&mut rng);
        let p = o.shifted();
        let plain =
            rk4_integrate(|y| logistic_rhs(y, &p), p.initial, 0.0, 400.0, DEFAULT_STEP).unwrap();
        let shifted =
            rk4_integrate(|y| offset_rhs(y, &o), o.initial, 0.0, 400.0, DEFAULT_STEP).unwrap();
        for (traj, exact) in [
            (
                &plain,
                &(|t| logistic_solution(t, &p)) as &dyn Fn(f64) -> f64,
            ),
            (&shifted, &|t| offset_solution(t, &o)),
        ] {
            for (t, v) in traj.t_grid.iter().zip(&traj.values) {
                let e = exact(*t);
                worst = worst.max((v - e).abs() / e.abs());
            }
        }
    }
    assert!(worst < 1e-6, "max relative error {worst:e}");
}

#[test]
fn analytic_jacobian_matches_finite_differences() {
    for seed in 0..3 {
        let e = common::jacobian_error(seed);
        assert!(e < 1e-5, "seed {seed}: {e:e}");
    }
}
