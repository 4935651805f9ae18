use std::f64::consts::PI;

use gse_tail::distributions::{GseDistribution, RootConvention};
use gse_tail::generators::GeneratorFamily;
use gse_tail::risk_measures::{
    mtce, mtcorr, mtcov, mtcov_elliptical, mtcov_generic, resolve_lambda, tv, Measure, RiskReport, TailRequest,
};
use gse_tail::skewing::{SkewKind, SkewingFunction};
use gse_tail::tail_engine::{IntegrationConfig, Method};
use gse_tail::Error;
use nalgebra::DMatrix;

const TABLE1: [[f64; 3]; 3] = [[0.2908, -0.0146, 0.5751], [-0.0146, 0.0400, -0.0875], [0.5751, -0.0875, 1.2243]];

fn sigma3() -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 3, &[1.33, -0.067, 2.63, -0.067, 0.25, -0.50, 2.63, -0.50, 5.76])
}

fn scenario(family: GeneratorFamily) -> GseDistribution {
    GseDistribution::elliptical(vec![1.3, 0.8, 3.2], sigma3(), family, RootConvention::Cholesky).unwrap()
}

fn values(m: &[Vec<gse_tail::Estimate>]) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.iter().map(|e| e.value).collect()).collect()
}

fn q3() -> TailRequest {
    TailRequest::quantiles(vec![0.8, 0.9, 0.95])
}

#[test]
fn trivariate_normal_tail_covariance() {
    let c = values(&mtcov(&scenario(GeneratorFamily::Normal), &q3()).unwrap());
    for i in 0..3 {
        for j in 0..3 {
            assert!((c[i][j] - TABLE1[i][j]).abs() < 2e-4, "({i},{j}): {}", c[i][j]);
        }
    }
}

#[test]
fn lambda_uses_the_root() {
    let lam = resolve_lambda(&scenario(GeneratorFamily::Normal), &q3()).unwrap();
    for (a, b) in lam.lambda.iter().zip([0.8416, 1.3887, 28.2878]) {
        assert!((a - b).abs() < 1e-4, "{:?}", lam.lambda);
    }
}

#[test]
fn var_thresholds_match_quantiles() {
    let d = scenario(GeneratorFamily::Logistic);
    let lam = resolve_lambda(&d, &q3()).unwrap();
    let a = values(&mtcov(&d, &q3()).unwrap());
    let b = values(&mtcov(&d, &TailRequest::var(lam.var.clone())).unwrap());
    for (ra, rb) in a.iter().zip(&b) {
        for (x, y) in ra.iter().zip(rb) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}

#[test]
fn univariate_normal_tail_variance() {
    let d = GseDistribution::elliptical(vec![0.0], DMatrix::identity(1, 1), GeneratorFamily::Normal, RootConvention::Symmetric)
        .unwrap();
    let t = tv(&d, 0.5, &IntegrationConfig::default()).unwrap();
    assert!((t.value - (1.0 - 2.0 / PI)).abs() < 1e-9, "{t:?}");
    let c = mtcov(&d, &TailRequest::quantiles(vec![0.5])).unwrap();
    assert!((c[0][0].value - t.value).abs() < 1e-10);
}

#[test]
fn tail_mean_of_a_normal_margin() {
    // E[X | X > z_q] = φ(z_q)/(1−q) for a standard normal.
    let d = GseDistribution::elliptical(vec![0.0], DMatrix::identity(1, 1), GeneratorFamily::Normal, RootConvention::Symmetric)
        .unwrap();
    let m = mtce(&d, &TailRequest::quantiles(vec![0.9])).unwrap();
    let z = 1.2815515655446004f64;
    let exact = (-0.5 * z * z).exp() / (2.0 * PI).sqrt() / 0.1;
    assert!((m[0].value - exact).abs() < 1e-8, "{} vs {exact}", m[0].value);
}

#[test]
fn vacuous_event_gives_the_covariance() {
    let gamma = vec![1.0, -0.5];
    let s = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
    let d = GseDistribution::new(
        vec![0.0, 0.0],
        s,
        GeneratorFamily::Normal,
        SkewingFunction::new(SkewKind::NormalCdf, gamma.clone()),
        RootConvention::Symmetric,
    )
    .unwrap();
    let c = values(&mtcov(&d, &TailRequest::vacuous(2)).unwrap());
    let norm = (1.0 + gamma.iter().map(|g| g * g).sum::<f64>()).sqrt();
    let delta = nalgebra::DVector::from_iterator(2, gamma.iter().map(|g| g / norm));
    let omega = DMatrix::identity(2, 2) - &delta * delta.transpose() * (2.0 / PI);
    let r = d.root();
    let exact = r * omega * r.transpose();
    for i in 0..2 {
        for j in 0..2 {
            assert!((c[i][j] - exact[(i, j)]).abs() < 1e-6, "({i},{j}) {} vs {}", c[i][j], exact[(i, j)]);
        }
    }
}

#[test]
fn generic_and_elliptical_paths_agree() {
    let d = scenario(GeneratorFamily::Laplace);
    let req = TailRequest::quantiles(vec![0.6, 0.7, 0.5]);
    let a = mtcov_generic(&d, &req).unwrap();
    let b = mtcov_elliptical(&d, &req).unwrap();
    for (ra, rb) in a.iter().zip(&b) {
        for (x, y) in ra.iter().zip(rb) {
            assert!((x.value - y.value).abs() <= x.error + y.error + 1e-9, "{x:?} vs {y:?}");
        }
    }
}

#[test]
fn qmc_agrees_with_quadrature() {
    let d = GseDistribution::new(
        vec![0.0, 1.0, -1.0],
        DMatrix::from_row_slice(3, 3, &[1.0, 0.3, 0.1, 0.3, 1.5, 0.2, 0.1, 0.2, 0.8]),
        GeneratorFamily::Normal,
        SkewingFunction::new(SkewKind::NormalCdf, vec![0.8, -0.4, 0.3]),
        RootConvention::Symmetric,
    )
    .unwrap();
    let req = TailRequest::quantiles(vec![0.3, 0.4, 0.2]);
    let a = values(&mtcov(&d, &req).unwrap());
    let cfg = IntegrationConfig { method: Method::Qmc, ..IntegrationConfig::default() };
    let b = values(&mtcov(&d, &req.clone().with_integration(cfg)).unwrap());
    for (ra, rb) in a.iter().zip(&b) {
        for (x, y) in ra.iter().zip(rb) {
            assert!((x - y).abs() < 2e-3, "{x} vs {y}");
        }
    }
}

#[test]
fn student_t_moment_conditions() {
    let req = q3();
    for m in [4.0, 3.0] {
        let d = scenario(GeneratorFamily::student_t(m).unwrap());
        assert!(matches!(mtcov(&d, &req), Err(Error::Parameter(_))), "m={m}");
        assert!(mtce(&d, &req).is_ok(), "m={m}");
    }
    let d = scenario(GeneratorFamily::student_t(2.0).unwrap());
    assert!(matches!(mtce(&d, &req), Err(Error::Parameter(_))));
    assert!(matches!(RiskReport::compute(&d, &req, Measure::All), Err(Error::Parameter(_))));
}

#[test]
fn tail_correlation() {
    let c = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 1.0]);
    let r = mtcorr(&c).unwrap();
    assert_eq!(r[(0, 0)], 1.0);
    assert!((r[(0, 1)] - 0.5).abs() < 1e-15);
    let singular = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
    assert!(matches!(mtcorr(&singular), Err(Error::Domain(_))));
}

#[test]
fn request_validation() {
    let d = scenario(GeneratorFamily::Normal);
    assert!(matches!(mtcov(&d, &TailRequest::quantiles(vec![0.5, 0.5])), Err(Error::Dimension { .. })));
    assert!(mtcov(&d, &TailRequest::quantiles(vec![0.5, 1.0, 0.5])).is_err());
    assert!(matches!(mtcov(&d, &TailRequest::quantiles(vec![0.0, 0.5, 0.5])), Err(Error::Domain(_))));
    assert!(matches!(RiskReport::compute(&d, &q3(), Measure::Tv), Err(Error::Domain(_))));
}

#[test]
fn report_round_trips_through_json() {
    let d = scenario(GeneratorFamily::Normal);
    let r = RiskReport::compute(&d, &q3(), Measure::All).unwrap();
    assert_eq!(RiskReport::from_json(&r.to_json()).unwrap(), r);
    let v = RiskReport::compute(&d, &TailRequest::vacuous(3), Measure::Mtce).unwrap();
    assert!(v.lambda.iter().all(|l| *l == f64::NEG_INFINITY));
    assert_eq!(RiskReport::from_json(&v.to_json()).unwrap(), v);
}
