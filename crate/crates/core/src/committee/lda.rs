//! Gaussian linear discriminant: project onto w = Sigma^{-1} (mu_+ - mu_-)
//! with the pooled within-class covariance, and threshold between the
//! projected class means with the log-prior correction. On balanced classes
//! the threshold is exactly the midpoint of the projected means. The pooled
//! covariance is ridge-regularized so degenerate spreads stay invertible.

use super::{check_both_classes, FeatureVector, Sample};
use crate::Result;

const RIDGE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct LdaModel {
    w: [f64; 2],
    threshold: f64,
}

fn class_mean(samples: &[Sample], y: i8) -> [f64; 2] {
    let pts: Vec<&Sample> = samples.iter().filter(|s| s.y == y).collect();
    let n = pts.len() as f64;
    [
        pts.iter().map(|s| s.f.f1).sum::<f64>() / n,
        pts.iter().map(|s| s.f.f2).sum::<f64>() / n,
    ]
}

impl LdaModel {
    pub fn fit(samples: &[Sample]) -> Result<LdaModel> {
        check_both_classes(samples)?;
        let n_plus = samples.iter().filter(|s| s.y > 0).count();
        let n_minus = samples.len() - n_plus;
        let mu_p = class_mean(samples, 1);
        let mu_m = class_mean(samples, -1);
        // Pooled within-class covariance plus ridge.
        let mut s = [[RIDGE, 0.0], [0.0, RIDGE]];
        for sample in samples {
            let mu = if sample.y > 0 { mu_p } else { mu_m };
            let d = [sample.f.f1 - mu[0], sample.f.f2 - mu[1]];
            for (i, di) in d.iter().enumerate() {
                for (j, dj) in d.iter().enumerate() {
                    s[i][j] += di * dj;
                }
            }
        }
        let dof = (samples.len().saturating_sub(2)).max(1) as f64;
        for row in &mut s {
            for v in row {
                *v /= dof;
            }
        }
        let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
        let inv = [
            [s[1][1] / det, -s[0][1] / det],
            [-s[1][0] / det, s[0][0] / det],
        ];
        let diff = [mu_p[0] - mu_m[0], mu_p[1] - mu_m[1]];
        let w = [
            inv[0][0] * diff[0] + inv[0][1] * diff[1],
            inv[1][0] * diff[0] + inv[1][1] * diff[1],
        ];
        let midpoint = 0.5 * (w[0] * (mu_p[0] + mu_m[0]) + w[1] * (mu_p[1] + mu_m[1]));
        let prior = (n_plus as f64 / n_minus as f64).ln();
        Ok(LdaModel { w, threshold: midpoint - prior })
    }

    pub fn project(&self, f: &FeatureVector) -> f64 {
        self.w[0] * f.f1 + self.w[1] * f.f2
    }

    /// Side of the threshold; a projection exactly on it maps to +1.
    pub fn predict(&self, f: &FeatureVector) -> i8 {
        if self.project(f) >= self.threshold {
            1
        } else {
            -1
        }
    }

    pub fn direction(&self) -> [f64; 2] {
        self.w
    }
}
