//! k-nearest-neighbor voting with the Euclidean metric. Stores the training
//! set; no fitting beyond that. Distance ties resolve toward the smaller
//! training index, vote ties toward +1.

use super::{FeatureVector, Sample};

#[derive(Clone, Debug)]
pub struct KnnModel {
    train: Vec<Sample>,
    k: usize,
}

impl KnnModel {
    pub fn fit(samples: &[Sample], k: usize) -> KnnModel {
        assert!(k >= 1, "k must be positive");
        KnnModel { train: samples.to_vec(), k }
    }

    /// Indices of the k nearest training points (all of them when the
    /// training set is smaller than k).
    pub(crate) fn neighbors(&self, f: &FeatureVector) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.train.len()).collect();
        order.sort_by(|&a, &b| {
            self.train[a]
                .f
                .dist_sq(f)
                .total_cmp(&self.train[b].f.dist_sq(f))
                .then(a.cmp(&b))
        });
        order.truncate(self.k.min(self.train.len()));
        order
    }

    pub fn predict(&self, f: &FeatureVector) -> i8 {
        let mut vote = 0i32;
        for idx in self.neighbors(f) {
            vote += self.train[idx].y as i32;
        }
        if vote >= 0 {
            1
        } else {
            -1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::committee::to_samples;
    use crate::datasets::LabeledPoint;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn samples_of(xs: &[(f64, i8)]) -> Vec<Sample> {
        to_samples(&xs.iter().map(|&(x, y)| LabeledPoint { x, y }).collect::<Vec<_>>())
    }

    #[test]
    fn triplicated_training_point_wins() {
        let samples = samples_of(&[(0.8, -1), (0.8, -1), (0.8, -1), (2.0, 1)]);
        let model = KnnModel::fit(&samples, 3);
        assert_eq!(model.predict(&FeatureVector::from_angle(0.8)), -1);
    }

    #[test]
    fn majority_of_three() {
        let samples = samples_of(&[(0.5, 1), (0.6, 1), (0.7, -1), (3.0, -1)]);
        let model = KnnModel::fit(&samples, 3);
        // Nearest three to 0.55 vote (+1, +1, -1).
        assert_eq!(model.predict(&FeatureVector::from_angle(0.55)), 1);
    }

    #[test]
    fn fewer_points_than_k_vote_among_all() {
        let samples = samples_of(&[(0.5, -1), (0.9, -1)]);
        let model = KnnModel::fit(&samples, 3);
        assert_eq!(model.predict(&FeatureVector::from_angle(0.7)), -1);
    }

    #[test]
    fn distance_ties_prefer_smaller_index() {
        // Two training points equidistant from the query; k = 1.
        let samples = samples_of(&[(1.0, 1), (2.0, -1)]);
        let model = KnnModel::fit(&samples, 1);
        assert_eq!(model.predict(&FeatureVector::from_angle(1.5)), 1);
    }

    #[test]
    fn matches_exhaustive_neighbor_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        for _ in 0..100 {
            let n = rng.random_range(1..25);
            let pts: Vec<(f64, i8)> = (0..n)
                .map(|_| (rng.random_range(0.0..PI), if rng.random_bool(0.5) { 1 } else { -1 }))
                .collect();
            let samples = samples_of(&pts);
            let model = KnnModel::fit(&samples, 3);
            for _ in 0..20 {
                let q = FeatureVector::from_angle(rng.random_range(0.0..PI));
                // Exhaustive oracle: stable sort over (distance, index).
                let mut pairs: Vec<(f64, usize)> = samples
                    .iter()
                    .enumerate()
                    .map(|(i, s)| (s.f.dist_sq(&q), i))
                    .collect();
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let expect: Vec<usize> = pairs.iter().take(3.min(n)).map(|p| p.1).collect();
                assert_eq!(model.neighbors(&q), expect);
                let vote: i32 = expect.iter().map(|&i| samples[i].y as i32).sum();
                let want = if vote >= 0 { 1 } else { -1 };
                assert_eq!(model.predict(&q), want);
            }
        }
    }
}
