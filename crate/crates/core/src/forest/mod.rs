//! Random-forest regression: bagged CART trees averaged at prediction time.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{DatasetError, Scaler, Table};
use crate::kinematics::{FEATURE_NAMES, N_FEATURES};

mod grid;
mod metrics;
mod tree;

pub use grid::{cross_validate, fold_assignment, grid_search, Grid, GridCell, GridSearchResult};
pub use metrics::{evaluate, Metrics};
pub use tree::{fit_tree, Node, Tree, TIE_EPS};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ForestError {
    #[error("training data is empty")]
    EmptyData,
    #[error("expected {expected} features, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("invalid hyperparameters: {0}")]
    HyperParams(&'static str),
    #[error("malformed tree: {0}")]
    MalformedTree(&'static str),
    #[error("inconsistent model: {0}")]
    Model(&'static str),
    #[error("{k} folds requested for {n} rows")]
    Folds { k: usize, n: usize },
    #[error("empty hyperparameter grid")]
    EmptyGrid,
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HyperParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Features tried per split.
    pub m_try: usize,
    pub bootstrap: bool,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams { n_trees: 100, max_depth: 12, min_samples_leaf: 2, m_try: N_FEATURES / 3, bootstrap: true }
    }
}

impl HyperParams {
    pub fn validate(&self, n_features: usize) -> Result<(), ForestError> {
        if self.n_trees == 0 {
            return Err(ForestError::HyperParams("n_trees must be positive"));
        }
        if self.max_depth == 0 {
            return Err(ForestError::HyperParams("max_depth must be positive"));
        }
        if self.min_samples_leaf == 0 {
            return Err(ForestError::HyperParams("min_samples_leaf must be positive"));
        }
        if self.m_try == 0 || self.m_try > n_features {
            return Err(ForestError::HyperParams("m_try must be in 1..=n_features"));
        }
        Ok(())
    }
}

/// Trained ensemble plus everything needed to score raw feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    trees: Vec<Tree>,
    n_features: usize,
    scaler: Scaler,
    hyperparams: HyperParams,
    seed: u64,
    feature_names: Vec<String>,
}

/// Default feature names for an `n`-column table: the kinematic set when
/// `n` matches it, `f0..` otherwise.
pub fn default_feature_names(n: usize) -> Vec<String> {
    if n == N_FEATURES {
        FEATURE_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        (0..n).map(|i| alloc::format!("f{i}")).collect()
    }
}

impl ForestModel {
    /// Assembles a model from parts, checking their consistency.
    pub fn from_parts(
        trees: Vec<Tree>,
        scaler: Scaler,
        hyperparams: HyperParams,
        seed: u64,
        feature_names: Vec<String>,
    ) -> Result<Self, ForestError> {
        let n_features = scaler.n_features();
        if trees.is_empty() {
            return Err(ForestError::Model("no trees"));
        }
        if trees.len() != hyperparams.n_trees {
            return Err(ForestError::Model("tree count differs from n_trees"));
        }
        if feature_names.len() != n_features || scaler.std.len() != n_features || scaler.degenerate.len() != n_features
        {
            return Err(ForestError::Model("feature count mismatch"));
        }
        if trees.iter().any(|t| t.max_feature().is_some_and(|f| f >= n_features)) {
            return Err(ForestError::Model("tree references unknown feature"));
        }
        Ok(ForestModel { trees, n_features, scaler, hyperparams, seed, feature_names })
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn scaler(&self) -> &Scaler {
        &self.scaler
    }

    pub fn hyperparams(&self) -> &HyperParams {
        &self.hyperparams
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Mean tree output for a raw (unscaled) feature vector.
    pub fn predict(&self, features: &[f64]) -> Result<f64, ForestError> {
        if features.len() != self.n_features {
            return Err(ForestError::Arity { expected: self.n_features, got: features.len() });
        }
        let sum: f64 = self.trees.iter().map(|t| t.predict_with(|f| self.scaler.apply_one(f, features[f]))).sum();
        Ok(sum / self.trees.len() as f64)
    }

    pub fn predict_table(&self, table: &Table) -> Result<Vec<f64>, ForestError> {
        table.rows().map(|r| self.predict(r)).collect()
    }
}

/// Random stream for tree `index`: one ChaCha stream per tree under `seed`.
pub fn tree_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Fits tree `index` of a forest. Trees are independent given `(seed, index)`,
/// so callers may build them in any order or in parallel.
pub fn fit_forest_tree(data: &Table, hp: &HyperParams, seed: u64, index: usize) -> Result<Tree, ForestError> {
    if data.is_empty() {
        return Err(ForestError::EmptyData);
    }
    let mut rng = tree_rng(seed, index);
    let n = data.len();
    let rows: Vec<usize> =
        if hp.bootstrap { (0..n).map(|_| rng.random_range(0..n)).collect() } else { (0..n).collect() };
    fit_tree(data, &rows, hp, &mut rng)
}

/// Fits a forest on already-standardized `data`; `scaler` is stored for
/// inference on raw features.
pub fn fit_forest(data: &Table, hp: &HyperParams, seed: u64, scaler: Scaler) -> Result<ForestModel, ForestError> {
    hp.validate(data.n_features())?;
    let trees = (0..hp.n_trees).map(|i| fit_forest_tree(data, hp, seed, i)).collect::<Result<Vec<_>, _>>()?;
    let names = default_feature_names(data.n_features());
    ForestModel::from_parts(trees, scaler, *hp, seed, names)
}

/// Standardizes raw `data`, then fits a forest carrying the fitted scaler.
pub fn train(data: &Table, hp: &HyperParams, seed: u64) -> Result<ForestModel, ForestError> {
    let (standardized, scaler) = crate::dataset::standardize(data)?;
    fit_forest(&standardized, hp, seed, scaler)
}
