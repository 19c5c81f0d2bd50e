use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use crate::error::{Error, Result};

/// Clamp applied to the response before the logit transform.
pub const LOGIT_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ResponseTransform {
    Identity,
    /// `ln(y / (1 - y))` with `y` clamped to `[eps, 1 - eps]`.
    Logit,
}

impl ResponseTransform {
    pub fn name(self) -> &'static str {
        match self {
            ResponseTransform::Identity => "raw",
            ResponseTransform::Logit => "logit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_value: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionResult {
    pub coefficients: Vec<Coefficient>,
    pub r_squared: f64,
    /// NaN when undefined (constant response or intercept-only model).
    pub f_statistic: f64,
    pub f_p_value: f64,
    pub df_model: usize,
    pub df_resid: usize,
    pub residuals: Vec<f64>,
    /// The transformed response had zero total variation.
    pub constant_response: bool,
    /// Responses clamped before the logit transform.
    pub clamped: usize,
}

/// Prepend an intercept column to row-major predictors.
pub fn with_intercept(rows: &[Vec<f64>], names: &[&str]) -> (Vec<Vec<f64>>, Vec<String>) {
    let design = rows
        .iter()
        .map(|r| std::iter::once(1.0).chain(r.iter().copied()).collect())
        .collect();
    let labels = std::iter::once("Intercept".to_string())
        .chain(names.iter().map(|s| s.to_string()))
        .collect();
    (design, labels)
}

/// Classical least squares by Householder QR.
///
/// `design` is row-major with the intercept column included; the R-squared
/// and F statistic assume that intercept is present.
pub fn ols_regress(
    response: &[f64],
    design: &[Vec<f64>],
    labels: &[String],
    transform: ResponseTransform,
) -> Result<RegressionResult> {
    let m = response.len();
    if design.len() != m {
        return Err(Error::Dimension(format!("{m} responses, {} design rows", design.len())));
    }
    let k = labels.len();
    if let Some(r) = design.iter().position(|row| row.len() != k) {
        return Err(Error::Dimension(format!(
            "design row {} has {} entries, expected {k}",
            r + 1,
            design[r].len()
        )));
    }
    if m <= k {
        return Err(Error::invalid(format!("need more observations ({m}) than columns ({k})")));
    }
    if response.iter().chain(design.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(Error::invalid("regression inputs must be finite"));
    }

    let mut clamped = 0;
    let y: Vec<f64> = match transform {
        ResponseTransform::Identity => response.to_vec(),
        ResponseTransform::Logit => response
            .iter()
            .map(|&v| {
                let c = v.clamp(LOGIT_EPSILON, 1.0 - LOGIT_EPSILON);
                if c != v {
                    clamped += 1;
                }
                (c / (1.0 - c)).ln()
            })
            .collect(),
    };
    if clamped > 0 {
        log::warn!("{clamped} responses outside ({LOGIT_EPSILON}, {}) clamped before logit", 1.0 - LOGIT_EPSILON);
    }

    let x = DMatrix::from_fn(m, k, |r, c| design[r][c]);
    let yv = DVector::from_column_slice(&y);
    let qr = x.clone().qr();
    let r_mat = qr.r();
    let scale = (0..k).map(|i| r_mat[(i, i)].abs()).fold(0.0_f64, f64::max);
    let collinear: Vec<String> = (0..k)
        .filter(|&i| r_mat[(i, i)].abs() <= 1e-10 * scale.max(f64::MIN_POSITIVE))
        .map(|i| labels[i].clone())
        .collect();
    if !collinear.is_empty() {
        return Err(Error::RankDeficient { columns: collinear });
    }
    let qty = qr.q().transpose() * &yv;
    let beta = r_mat
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::RankDeficient { columns: labels.to_vec() })?;
    let r_inv = r_mat
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| Error::RankDeficient { columns: labels.to_vec() })?;
    let xtx_inv = &r_inv * r_inv.transpose();

    let fitted = &x * &beta;
    let residuals: Vec<f64> = yv.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let mean = y.iter().sum::<f64>() / m as f64;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let df_resid = m - k;
    let df_model = k - 1;
    let sigma2 = rss / df_resid as f64;

    let constant_response = tss == 0.0;
    let r_squared = if constant_response {
        0.0
    } else {
        (1.0 - rss / tss).clamp(0.0, 1.0)
    };
    let (f_statistic, f_p_value) = if constant_response || df_model == 0 {
        (f64::NAN, f64::NAN)
    } else {
        let f = ((tss - rss) / df_model as f64) / sigma2;
        let p = FisherSnedecor::new(df_model as f64, df_resid as f64)
            .map(|d| if f.is_finite() { d.sf(f) } else { 0.0 })
            .unwrap_or(f64::NAN);
        (f, p)
    };

    let t_dist = StudentsT::new(0.0, 1.0, df_resid as f64).ok();
    let coefficients = (0..k)
        .map(|i| {
            let se = (sigma2 * xtx_inv[(i, i)]).sqrt();
            let t = if se > 0.0 { beta[i] / se } else { f64::NAN };
            let p = match (&t_dist, t.is_finite()) {
                (Some(d), true) => 2.0 * d.sf(t.abs()),
                _ => f64::NAN,
            };
            Coefficient {
                name: labels[i].clone(),
                estimate: beta[i],
                std_error: se,
                t_value: t,
                p_value: p,
            }
        })
        .collect();

    Ok(RegressionResult {
        coefficients,
        r_squared,
        f_statistic,
        f_p_value,
        df_model,
        df_resid,
        residuals,
        constant_response,
        clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn simple(xs: &[f64]) -> (Vec<Vec<f64>>, Vec<String>) {
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        with_intercept(&rows, &["x"])
    }

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let (d, l) = simple(&xs);
        let r = ols_regress(&y, &d, &l, ResponseTransform::Identity).unwrap();
        assert_relative_eq!(r.coefficients[0].estimate, 1.0, epsilon = 1e-12);
        assert_relative_eq!(r.coefficients[1].estimate, 2.0, epsilon = 1e-12);
        assert_relative_eq!(r.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_response_flags() {
        let (d, l) = simple(&[0.0, 1.0, 2.0, 5.0]);
        let r = ols_regress(&[3.0; 4], &d, &l, ResponseTransform::Identity).unwrap();
        assert_eq!(r.r_squared, 0.0);
        assert!(r.f_statistic.is_nan());
        assert!(r.constant_response);
    }

    #[test]
    fn rank_deficiency_names_column() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let (d, l) = with_intercept(&rows, &["a", "b"]);
        let y: Vec<f64> = (0..6).map(|i| (i * i) as f64).collect();
        match ols_regress(&y, &d, &l, ResponseTransform::Identity) {
            Err(Error::RankDeficient { columns }) => assert_eq!(columns, vec!["b".to_string()]),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn logit_clamps_and_counts() {
        let (d, l) = simple(&[0.0, 1.0, 2.0, 3.0]);
        let r = ols_regress(&[0.1, 0.4, 1.0, 0.0], &d, &l, ResponseTransform::Logit).unwrap();
        assert_eq!(r.clamped, 2);
        assert!(r.coefficients.iter().all(|c| c.estimate.is_finite()));
    }

    #[test]
    fn too_few_rows() {
        let (d, l) = simple(&[0.0, 1.0]);
        assert!(ols_regress(&[1.0, 2.0], &d, &l, ResponseTransform::Identity).is_err());
    }

    #[test]
    fn t_and_p_values_consistent() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let y = [0.3, 1.1, 2.4, 2.9, 4.2, 4.8, 6.3];
        let (d, l) = simple(&xs);
        let r = ols_regress(&y, &d, &l, ResponseTransform::Identity).unwrap();
        for c in &r.coefficients {
            assert_relative_eq!(c.t_value, c.estimate / c.std_error, epsilon = 1e-12);
            assert!((0.0..=1.0).contains(&c.p_value));
        }
        // single regressor: F = t^2
        assert_relative_eq!(r.f_statistic, r.coefficients[1].t_value.powi(2), max_relative = 1e-10);
        assert_relative_eq!(r.f_p_value, r.coefficients[1].p_value, max_relative = 1e-8);
    }
}
