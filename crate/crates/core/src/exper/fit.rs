//! Weighted least-squares fit of `f(L) = c + A·e^{−λL}`.
//!
//! For fixed λ the model is linear in (c, A), so the search is over λ only:
//! a log-spaced grid of 64 rates on `[1/max_depth, 4]`, then golden-section
//! refinement around the best grid point.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Result};

pub const FIT_FORM: &str = "c + A*exp(-lambda*L)";
const GRID_POINTS: usize = 64;
const LAMBDA_MAX: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Converged,
    /// Best rate sits on the edge of the search interval.
    RateAtBound,
    /// Data are constant; rate is undefined.
    Degenerate,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub offset_c: f64,
    pub amplitude_a: f64,
    pub rate_lambda: Option<f64>,
    /// Unweighted √(mean squared residual).
    pub residual_rms: f64,
    pub offset_std_err: f64,
    pub status: FitStatus,
}

impl FitResult {
    pub fn predict(&self, depth: f64) -> f64 {
        match self.rate_lambda {
            Some(l) => self.offset_c + self.amplitude_a * (-l * depth).exp(),
            None => self.offset_c,
        }
    }
}

struct Problem<'a> {
    x: &'a [f64],
    y: &'a [f64],
    w: Vec<f64>,
}

impl Problem<'_> {
    /// Best (c, A) at fixed λ and the weighted residual sum of squares.
    fn solve(&self, lambda: f64) -> (f64, f64, f64) {
        let (mut s0, mut s1, mut s2, mut t0, mut t1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for ((&x, &y), &w) in self.x.iter().zip(self.y).zip(&self.w) {
            let e = (-lambda * x).exp();
            s0 += w;
            s1 += w * e;
            s2 += w * e * e;
            t0 += w * y;
            t1 += w * e * y;
        }
        let det = s0 * s2 - s1 * s1;
        let (c, a) = if det.abs() <= 1e-14 * s0 * s2 {
            (t0 / s0, 0.0)
        } else {
            ((s2 * t0 - s1 * t1) / det, (s0 * t1 - s1 * t0) / det)
        };
        let ssr = self
            .x
            .iter()
            .zip(self.y)
            .zip(&self.w)
            .map(|((&x, &y), &w)| {
                let r = y - c - a * (-lambda * x).exp();
                w * r * r
            })
            .sum();
        (c, a, ssr)
    }
}

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo <= 1e-15 * hi {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

/// Fit `c + A·e^{−λL}` to `means` at `depths`, weighting by `1/std_err²`
/// when standard errors are given. Standard errors are floored at a tenth of
/// their median, so cells with (near-)identical realizations do not pin the
/// curve; if none is positive the fit is unweighted.
pub fn fit_exponential(depths: &[f64], means: &[f64], std_errs: Option<&[f64]>) -> Result<FitResult> {
    let n = depths.len();
    if means.len() != n || std_errs.is_some_and(|s| s.len() != n) {
        return Err(arg_err!("depths, means and std errors differ in length"));
    }
    let mut distinct = depths.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 4 {
        return Err(arg_err!("need at least 4 distinct depths, got {}", distinct.len()));
    }
    if depths.iter().chain(means).any(|v| !v.is_finite()) {
        return Err(arg_err!("non-finite depth or mean"));
    }
    let w = match std_errs {
        Some(se) => {
            let mut positive: Vec<f64> = se.iter().copied().filter(|&s| s > 0.0 && s.is_finite()).collect();
            positive.sort_by(f64::total_cmp);
            let floor = positive.get(positive.len() / 2).map_or(f64::INFINITY, |m| 0.1 * m);
            if floor.is_finite() {
                se.iter().map(|&s| s.max(floor).powi(-2)).collect()
            } else {
                vec![1.0; n]
            }
        }
        None => vec![1.0; n],
    };
    let prob = Problem { x: depths, y: means, w };

    let (lo, hi) = means.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| (lo.min(y), hi.max(y)));
    if hi - lo <= 1e-14 * lo.abs().max(hi.abs()).max(1e-300) {
        let (c, _, _) = prob.solve(0.0);
        return Ok(FitResult {
            offset_c: c,
            amplitude_a: 0.0,
            rate_lambda: None,
            residual_rms: rms(means.iter().map(|y| y - c)),
            offset_std_err: 0.0,
            status: FitStatus::Degenerate,
        });
    }

    let max_depth = distinct[distinct.len() - 1].max(1.0);
    let lmin = (1.0 / max_depth).min(LAMBDA_MAX);
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|k| lmin * (LAMBDA_MAX / lmin).powf(k as f64 / (GRID_POINTS - 1) as f64))
        .collect();
    let best = (0..GRID_POINTS)
        .map(|k| (k, prob.solve(grid[k]).2))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let lambda = golden_section(
        |l| prob.solve(l).2,
        grid[best.saturating_sub(1)],
        grid[(best + 1).min(GRID_POINTS - 1)],
    );
    let (c, a, ssr) = prob.solve(lambda);
    if ![c, a, ssr, lambda].iter().all(|v| v.is_finite()) {
        return Ok(FitResult {
            offset_c: f64::NAN,
            amplitude_a: f64::NAN,
            rate_lambda: None,
            residual_rms: f64::NAN,
            offset_std_err: f64::NAN,
            status: FitStatus::Failed,
        });
    }
    let at_bound = (lambda - grid[0]).abs() <= 1e-9 * grid[0] || (lambda - LAMBDA_MAX).abs() <= 1e-9 * LAMBDA_MAX;

    // Gauss–Newton covariance, scaled by the reduced χ² when dof allow
    let mut jtj = Matrix3::zeros();
    for ((&x, _), &w) in depths.iter().zip(means).zip(&prob.w) {
        let e = (-lambda * x).exp();
        let j = Vector3::new(1.0, e, -a * x * e);
        jtj += j * j.transpose() * w;
    }
    let scale = if n > 3 { ssr / (n - 3) as f64 } else { 1.0 };
    let offset_std_err = jtj
        .try_inverse()
        .map(|cov| (cov[(0, 0)] * scale).max(0.0).sqrt())
        .unwrap_or(f64::NAN);

    Ok(FitResult {
        offset_c: c,
        amplitude_a: a,
        rate_lambda: Some(lambda),
        residual_rms: rms(depths.iter().zip(means).map(|(&x, &y)| y - c - a * (-lambda * x).exp())),
        offset_std_err,
        status: if at_bound { FitStatus::RateAtBound } else { FitStatus::Converged },
    })
}

fn rms(residuals: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut k) = (0.0, 0usize);
    for r in residuals {
        s += r * r;
        k += 1;
    }
    (s / k.max(1) as f64).sqrt()
}

/// Ordinary least-squares line `y = intercept + slope·x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(arg_err!("line fit needs two equal-length series of at least 2 points"));
    }
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(arg_err!("line fit needs at least two distinct x values"));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LineFit { slope, intercept: my - slope * mx, r_squared })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    fn depths() -> Vec<f64> {
        (1..=100).map(f64::from).collect()
    }

    #[test]
    fn recovers_noiseless_parameters() {
        let x = depths();
        let y: Vec<f64> = x.iter().map(|l| 0.1 + 0.5 * (-0.05 * l).exp()).collect();
        let f = fit_exponential(&x, &y, None).unwrap();
        assert_eq!(f.status, FitStatus::Converged);
        assert!((f.offset_c - 0.1).abs() < 1e-6);
        assert!((f.amplitude_a - 0.5).abs() < 1e-6);
        assert!((f.rate_lambda.unwrap() - 0.05).abs() < 1e-6);
        assert!(f.residual_rms < 1e-9);
        assert!((f.predict(1000.0) - 0.1).abs() < 1e-6);
    }

    #[test]
    fn constant_data_is_degenerate() {
        let x = depths();
        let f = fit_exponential(&x, &vec![0.3; x.len()], Some(&vec![0.01; x.len()])).unwrap();
        assert_eq!(f.status, FitStatus::Degenerate);
        assert!((f.offset_c - 0.3).abs() < 1e-12);
        assert!(f.amplitude_a.abs() < 1e-12);
        assert_eq!(f.rate_lambda, None);
    }

    #[test]
    fn input_errors() {
        assert!(fit_exponential(&[1.0, 2.0, 3.0], &[1.0, 0.5, 0.2], None).is_err());
        assert!(fit_exponential(&[1.0, 1.0, 2.0, 2.0, 3.0], &[1.0; 5], None).is_err());
        assert!(fit_exponential(&[1.0, 2.0, 3.0, 4.0], &[1.0; 3], None).is_err());
    }

    #[test]
    fn zero_std_errs_are_floored() {
        let x = depths();
        let y: Vec<f64> = x.iter().map(|l| 0.2 + 0.3 * (-0.1 * l).exp()).collect();
        let mut se = vec![0.01; x.len()];
        se[0] = 0.0;
        let f = fit_exponential(&x, &y, Some(&se)).unwrap();
        assert!((f.offset_c - 0.2).abs() < 1e-6);
        let f = fit_exponential(&x, &y, Some(&vec![0.0; x.len()])).unwrap();
        assert!((f.offset_c - 0.2).abs() < 1e-6);
    }

    #[test]
    fn offset_error_is_calibrated() {
        let x = depths();
        let noise = Normal::new(0.0, 0.005).unwrap();
        let mut covered = 0;
        for trial in 0..100u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1000 + trial);
            let y: Vec<f64> = x.iter().map(|l| 0.1 + 0.5 * (-0.05 * l).exp() + noise.sample(&mut rng)).collect();
            let f = fit_exponential(&x, &y, Some(&vec![0.005; x.len()])).unwrap();
            if (f.offset_c - 0.1).abs() <= 3.0 * f.offset_std_err {
                covered += 1;
            }
        }
        assert!(covered >= 95, "{covered}/100");
    }

    #[test]
    fn line_fit() {
        let l = fit_line(&[0.0, 1.0, 2.0], &[1.0, 0.5, 0.0]).unwrap();
        assert!((l.slope + 0.5).abs() < 1e-15 && (l.intercept - 1.0).abs() < 1e-15);
        assert!((l.r_squared - 1.0).abs() < 1e-15);
        assert!(fit_line(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }
}
