//! Multi-threaded training. Each tree (and each grid cell) is seeded
//! independently, so results are identical to the sequential core.

use rayon::prelude::*;
use vrcomfort_core::dataset::{standardize, Table};
use vrcomfort_core::forest::{
    cross_validate, default_feature_names, fit_forest_tree, fold_assignment, ForestError, ForestModel, GridCell,
    GridSearchResult, HyperParams,
};

/// Same model as `forest::train`, with trees fitted in parallel.
pub fn train_parallel(data: &Table, hp: &HyperParams, seed: u64) -> Result<ForestModel, ForestError> {
    hp.validate(data.n_features())?;
    let (standardized, scaler) = standardize(data)?;
    let trees = (0..hp.n_trees)
        .into_par_iter()
        .map(|i| fit_forest_tree(&standardized, hp, seed, i))
        .collect::<Result<Vec<_>, _>>()?;
    ForestModel::from_parts(trees, scaler, *hp, seed, default_feature_names(data.n_features()))
}

/// Same result as `forest::grid_search`, with cells evaluated in parallel.
pub fn grid_search_parallel(
    data: &Table,
    cells: &[HyperParams],
    k_folds: usize,
    seed: u64,
) -> Result<GridSearchResult, ForestError> {
    if cells.is_empty() {
        return Err(ForestError::EmptyGrid);
    }
    let assignment = fold_assignment(data.len(), k_folds, seed)?;
    let scored = cells
        .par_iter()
        .map(|params| {
            let fold_mse = cross_validate(data, params, &assignment, k_folds, seed)?;
            let mean_mse = fold_mse.iter().sum::<f64>() / k_folds as f64;
            Ok(GridCell { params: *params, fold_mse, mean_mse })
        })
        .collect::<Result<Vec<_>, ForestError>>()?;
    let mut best_index = 0;
    for (i, c) in scored.iter().enumerate() {
        if c.mean_mse < scored[best_index].mean_mse {
            best_index = i;
        }
    }
    Ok(GridSearchResult { best_index, best: scored[best_index].params, cells: scored })
}
