//! Exhaustive hyperparameter search with k-fold cross-validation.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{train, ForestError, HyperParams, Metrics};
use crate::dataset::Table;

/// Cartesian grid; cells enumerate `n_trees` outermost, then `max_depth`,
/// then `min_samples_leaf`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub n_trees: Vec<usize>,
    pub max_depth: Vec<usize>,
    pub min_samples_leaf: Vec<usize>,
    pub m_try: usize,
    pub bootstrap: bool,
}

impl Default for Grid {
    fn default() -> Self {
        let d = HyperParams::default();
        Grid {
            n_trees: alloc::vec![50, 100, 200],
            max_depth: alloc::vec![8, 12, 16],
            min_samples_leaf: alloc::vec![1, 2, 5],
            m_try: d.m_try,
            bootstrap: d.bootstrap,
        }
    }
}

impl Grid {
    pub fn cells(&self) -> Vec<HyperParams> {
        let mut out = Vec::new();
        for &n_trees in &self.n_trees {
            for &max_depth in &self.max_depth {
                for &min_samples_leaf in &self.min_samples_leaf {
                    out.push(HyperParams {
                        n_trees,
                        max_depth,
                        min_samples_leaf,
                        m_try: self.m_try,
                        bootstrap: self.bootstrap,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub params: HyperParams,
    pub fold_mse: Vec<f64>,
    pub mean_mse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    pub best_index: usize,
    pub best: HyperParams,
    pub cells: Vec<GridCell>,
}

/// Fold number of every row: rows are shuffled with `seed` and dealt
/// round-robin into `k` folds.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Result<Vec<usize>, ForestError> {
    if k < 2 || k > n {
        return Err(ForestError::Folds { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = alloc::vec![0; n];
    for (pos, &row) in order.iter().enumerate() {
        fold[row] = pos % k;
    }
    Ok(fold)
}

/// Validation MSE of `params` on each fold of `assignment`.
pub fn cross_validate(
    data: &Table,
    params: &HyperParams,
    assignment: &[usize],
    k: usize,
    seed: u64,
) -> Result<Vec<f64>, ForestError> {
    (0..k)
        .map(|f| {
            let (train_rows, val_rows): (Vec<usize>, Vec<usize>) = (0..data.len()).partition(|&i| assignment[i] != f);
            let model = train(&data.subset(&train_rows), params, seed)?;
            let val = data.subset(&val_rows);
            let y_hat = model.predict_table(&val)?;
            Ok(Metrics::from_predictions(val.targets(), &y_hat)?.mse)
        })
        .collect()
}

/// Evaluates every cell with the same fold partition and training seed and
/// returns the lowest mean MSE; ties keep the earlier cell.
pub fn grid_search(
    data: &Table,
    cells: &[HyperParams],
    k_folds: usize,
    seed: u64,
) -> Result<GridSearchResult, ForestError> {
    if cells.is_empty() {
        return Err(ForestError::EmptyGrid);
    }
    let assignment = fold_assignment(data.len(), k_folds, seed)?;
    let mut out: Vec<GridCell> = Vec::with_capacity(cells.len());
    let mut best_index = 0;
    for (i, params) in cells.iter().enumerate() {
        let fold_mse = cross_validate(data, params, &assignment, k_folds, seed)?;
        let mean_mse = fold_mse.iter().sum::<f64>() / k_folds as f64;
        if mean_mse < out.get(best_index).map_or(f64::INFINITY, |c| c.mean_mse) {
            best_index = i;
        }
        out.push(GridCell { params: *params, fold_mse, mean_mse });
    }
    Ok(GridSearchResult { best_index, best: out[best_index].params, cells: out })
}
