//! The four query-by-committee members, implemented from scratch on the 2-D
//! features (cos x, sin x): a soft-margin SVC with RBF kernel, 3-nearest
//! neighbors, Fisher linear discriminant analysis, and a CART decision tree
//! of depth 7.
//!
//! All members are deterministic: identical training data produce identical
//! predictions. Ties anywhere resolve to +1.

mod knn;
mod lda;
mod svc;
mod tree;

pub use knn::KnnModel;
pub use lda::LdaModel;
pub use svc::{dual_objective, fit_svc_rbf, SvcModel};
pub use tree::TreeModel;

use crate::datasets::LabeledPoint;
use crate::{Error, Result};

/// A point on the unit circle: (cos x, sin x).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureVector {
    pub f1: f64,
    pub f2: f64,
}

impl FeatureVector {
    pub fn from_angle(x: f64) -> FeatureVector {
        FeatureVector { f1: x.cos(), f2: x.sin() }
    }

    pub fn dist_sq(&self, other: &FeatureVector) -> f64 {
        let (dx, dy) = (self.f1 - other.f1, self.f2 - other.f2);
        dx * dx + dy * dy
    }
}

/// A labeled feature vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub f: FeatureVector,
    pub y: i8,
}

pub(crate) fn to_samples(data: &[LabeledPoint]) -> Vec<Sample> {
    data.iter()
        .map(|p| Sample { f: FeatureVector::from_angle(p.x), y: p.y })
        .collect()
}

pub(crate) fn check_both_classes(samples: &[Sample]) -> Result<()> {
    if samples.iter().any(|s| s.y > 0) && samples.iter().any(|s| s.y < 0) {
        Ok(())
    } else {
        Err(Error::SingleClass)
    }
}

/// One fitted committee member.
#[derive(Clone, Debug)]
pub enum TrainedMember {
    SvcRbf(SvcModel),
    Knn3(KnnModel),
    Lda(LdaModel),
    Tree7(TreeModel),
}

impl TrainedMember {
    pub fn predict(&self, f: &FeatureVector) -> i8 {
        match self {
            TrainedMember::SvcRbf(m) => m.predict(f),
            TrainedMember::Knn3(m) => m.predict(f),
            TrainedMember::Lda(m) => m.predict(f),
            TrainedMember::Tree7(m) => m.predict(f),
        }
    }
}

/// The four-member committee, fitted on the current labeled set.
#[derive(Clone, Debug)]
pub struct Committee {
    pub members: Vec<TrainedMember>,
}

impl Committee {
    /// Fits all members. Requires both classes and at least two items.
    pub fn fit(data: &[LabeledPoint]) -> Result<Committee> {
        let samples = to_samples(data);
        if samples.len() < 2 {
            return Err(Error::TooFewItems { need: 2, got: samples.len() });
        }
        check_both_classes(&samples)?;
        let gamma = scale_gamma(&samples);
        Ok(Committee {
            members: vec![
                TrainedMember::SvcRbf(fit_svc_rbf(&samples, 1.0, gamma)?),
                TrainedMember::Knn3(KnnModel::fit(&samples, 3)),
                TrainedMember::Lda(LdaModel::fit(&samples)?),
                TrainedMember::Tree7(TreeModel::fit(&samples, 7)),
            ],
        })
    }

    /// Hard votes of all members at a data angle.
    pub fn votes(&self, x: f64) -> Vec<i8> {
        let f = FeatureVector::from_angle(x);
        self.members.iter().map(|m| m.predict(&f)).collect()
    }
}

/// Scale-type RBF bandwidth: 1 / (2 var), with the variance pooled over both
/// feature coordinates.
pub fn scale_gamma(samples: &[Sample]) -> f64 {
    let n = (2 * samples.len()) as f64;
    let mean = samples.iter().map(|s| s.f.f1 + s.f.f2).sum::<f64>() / n;
    let var = samples
        .iter()
        .map(|s| (s.f.f1 - mean).powi(2) + (s.f.f2 - mean).powi(2))
        .sum::<f64>()
        / n;
    if var > 0.0 {
        1.0 / (2.0 * var)
    } else {
        1.0
    }
}
