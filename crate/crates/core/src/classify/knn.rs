use ndarray::{Array2, ArrayView1, ArrayView2};

use super::sq_dist;
use crate::data::Label;

/// Lazy k-nearest-neighbour classifier over Euclidean distance.
#[derive(Debug, Clone)]
pub struct KnnModel {
    x: Array2<f64>,
    y: Vec<Label>,
    k: usize,
}

impl KnnModel {
    pub(crate) fn fit(x: ArrayView2<f64>, y: &[Label], k: usize) -> Self {
        KnnModel {
            x: x.to_owned(),
            y: y.to_vec(),
            k,
        }
    }

    pub fn training_table(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    /// Indices of the `k` nearest training rows; distance ties go to the
    /// lower index.
    pub fn neighbours(&self, q: ArrayView1<f64>) -> Vec<usize> {
        let mut d: Vec<(f64, usize)> = self
            .x
            .rows()
            .into_iter()
            .enumerate()
            .map(|(i, r)| (sq_dist(r, q), i))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < d.len() {
            d.select_nth_unstable_by(self.k - 1, cmp);
            d.truncate(self.k);
        }
        d.sort_by(cmp);
        d.into_iter().map(|(_, i)| i).collect()
    }

    /// Fraction of the k nearest neighbours labelled case.
    pub fn score(&self, q: ArrayView1<f64>) -> f64 {
        let nb = self.neighbours(q);
        nb.iter().filter(|&&i| self.y[i].is_case()).count() as f64 / nb.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{fit, ClassifierSpec, Family, TrainedClassifier};
    use ndarray::array;

    fn spec(k: usize) -> ClassifierSpec {
        ClassifierSpec {
            knn_k: k,
            ..ClassifierSpec::new(Family::Knn)
        }
    }

    #[test]
    fn stores_training_table() {
        let x = array![[0.1, 2.0], [3.0, -1.0], [0.5, 0.5]];
        let y = [Label::Case, Label::Control, Label::Case];
        match fit(&spec(3), x.view(), &y).unwrap() {
            TrainedClassifier::Knn(m) => assert_eq!(m.training_table(), &x),
            _ => unreachable!(),
        }
    }

    #[test]
    fn self_neighbour_scores_one() {
        let x = array![[0.0, 0.0], [5.0, 5.0]];
        let y = [Label::Control, Label::Case];
        let m = fit(&spec(1), x.view(), &y).unwrap();
        assert_eq!(m.predict_score(array![5.0, 5.0].view()).unwrap(), 1.0);
    }

    #[test]
    fn three_neighbour_vote() {
        let x = array![[0.0, 0.0], [0.0, 1.0], [5.0, 5.0]];
        let y = [Label::Control, Label::Control, Label::Case];
        let m = fit(&spec(3), x.view(), &y).unwrap();
        let q = array![0.0, 0.5];
        assert_eq!(m.predict_label(q.view()).unwrap(), Label::Control);
        assert!((m.predict_score(q.view()).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn distance_ties_prefer_lower_index() {
        let x = array![[1.0], [-1.0], [3.0]];
        let y = [Label::Case, Label::Control, Label::Control];
        let m = KnnModel::fit(x.view(), &y, 1);
        assert_eq!(m.neighbours(array![0.0].view()), vec![0]);
        let y = [Label::Control, Label::Case, Label::Control];
        let m = KnnModel::fit(x.view(), &y, 1);
        assert_eq!(m.score(array![0.0].view()), 0.0);
    }
}
