use super::{ForestError, ForestModel};
use crate::dataset::Table;

/// Regression metrics. `r2` is `None` when the targets have zero variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub n: usize,
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
    pub r2: Option<f64>,
}

impl Metrics {
    pub fn from_predictions(y: &[f64], y_hat: &[f64]) -> Result<Self, ForestError> {
        if y.is_empty() {
            return Err(ForestError::EmptyData);
        }
        if y.len() != y_hat.len() {
            return Err(ForestError::Arity { expected: y.len(), got: y_hat.len() });
        }
        let n = y.len() as f64;
        let (mut ss_res, mut abs) = (0.0, 0.0);
        for (a, b) in y.iter().zip(y_hat) {
            let e = a - b;
            ss_res += e * e;
            abs += e.abs();
        }
        let mean = y.iter().sum::<f64>() / n;
        let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
        let mse = ss_res / n;
        Ok(Metrics {
            n: y.len(),
            mse,
            rmse: libm::sqrt(mse),
            mae: abs / n,
            r2: (ss_tot > 0.0).then(|| 1.0 - ss_res / ss_tot),
        })
    }
}

/// Scores `model` on a raw (unscaled) test table.
pub fn evaluate(model: &ForestModel, test: &Table) -> Result<Metrics, ForestError> {
    if test.is_empty() {
        return Err(ForestError::EmptyData);
    }
    let y_hat = model.predict_table(test)?;
    Metrics::from_predictions(test.targets(), &y_hat)
}
