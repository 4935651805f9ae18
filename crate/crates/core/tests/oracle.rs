use gse_tail::distributions::{sample_gse, GseDistribution, RootConvention};
use gse_tail::generators::GeneratorFamily;
use gse_tail::oracle::{empirical_tail_moments, simulate_tail_moments, tail_moments_of, TailEvent, MIN_SAMPLES};
use gse_tail::skewing::{SkewKind, SkewingFunction};
use gse_tail::Error;
use nalgebra::DMatrix;

fn bivariate_normal(rho: f64) -> GseDistribution {
    GseDistribution::elliptical(
        vec![0.0, 0.0],
        DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]),
        GeneratorFamily::Normal,
        RootConvention::Symmetric,
    )
    .unwrap()
}

#[test]
fn independent_quadrant() {
    let o = simulate_tail_moments(&bivariate_normal(0.0), 1_000_000, 3, &TailEvent::Data(vec![0.0, 0.0])).unwrap();
    assert!((o.tail_prob_hat - 0.25).abs() < 4.0 * o.se_tail_prob, "{o:?}");
    let m = (2.0 / std::f64::consts::PI).sqrt();
    for i in 0..2 {
        assert!((o.mtce_hat[i] - m).abs() < 4.0 * o.se_mtce[i]);
        assert!((o.mtcov_hat[i][i] - (1.0 - m * m)).abs() < 4.0 * o.se_mtcov[i][i]);
    }
    assert!(o.mtcov_hat[0][1].abs() < 4.0 * o.se_mtcov[0][1]);
}

#[test]
fn vacuous_event_gives_the_sample_covariance() {
    let o = simulate_tail_moments(&bivariate_normal(0.6), 400_000, 9, &TailEvent::Data(vec![f64::NEG_INFINITY; 2]))
        .unwrap();
    assert_eq!(o.kept_count, o.sample_count);
    assert_eq!(o.tail_prob_hat, 1.0);
    assert!((o.mtcov_hat[0][1] - 0.6).abs() < 0.01);
    assert!((o.mtcov_hat[1][1] - 1.0).abs() < 0.01);
}

#[test]
fn streaming_matches_the_sample_matrix() {
    let d = GseDistribution::new(
        vec![1.0, 2.0],
        DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]),
        GeneratorFamily::Logistic,
        SkewingFunction::new(SkewKind::LogisticCdf, vec![1.0, 1.0]),
        RootConvention::Cholesky,
    )
    .unwrap();
    let var = vec![1.5, 2.2];
    let a = simulate_tail_moments(&d, 100_000, 4, &TailEvent::Data(var.clone())).unwrap();
    let b = empirical_tail_moments(&sample_gse(&d, 100_000, 4), &var).unwrap();
    assert_eq!(a.kept_count, b.kept_count);
    for i in 0..2 {
        assert!((a.mtce_hat[i] - b.mtce_hat[i]).abs() < 1e-12);
        for j in 0..2 {
            assert!((a.mtcov_hat[i][j] - b.mtcov_hat[i][j]).abs() < 1e-12);
        }
    }
    let again = simulate_tail_moments(&d, 100_000, 4, &TailEvent::Data(var.clone())).unwrap();
    assert_eq!(a, again);
}

#[test]
fn standardized_event_filters_on_z() {
    let d = bivariate_normal(0.5);
    let s = sample_gse(&d, 50_000, 2);
    let o = tail_moments_of(&s, &TailEvent::Standardized(vec![0.0, 0.0]), Some(&d)).unwrap();
    let kept = s.iter_rows().filter(|y| d.standardize(y).unwrap().iter().all(|z| *z > 0.0)).count();
    assert_eq!(o.kept_count, kept);
    assert!(tail_moments_of(&s, &TailEvent::Standardized(vec![0.0, 0.0]), None).is_err());
}

#[test]
fn too_few_samples_or_tail_rows() {
    let d = bivariate_normal(0.0);
    let e = simulate_tail_moments(&d, MIN_SAMPLES - 1, 1, &TailEvent::Data(vec![0.0, 0.0])).unwrap_err();
    assert!(matches!(e, Error::Domain(_)));
    let e = simulate_tail_moments(&d, 20_000, 1, &TailEvent::Data(vec![3.0, 3.0])).unwrap_err();
    assert!(matches!(e, Error::InsufficientTailMass { .. }), "{e}");
    assert!(simulate_tail_moments(&d, 20_000, 1, &TailEvent::Data(vec![0.0])).is_err());
}
