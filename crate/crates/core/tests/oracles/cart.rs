//! Exhaustive-split regression tree oracle and hand-rolled cross-validation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vrcomfort_core::dataset::Table;
use vrcomfort_core::forest::{
    fit_tree, fold_assignment, grid_search, train, HyperParams, Metrics, Node, Tree, TIE_EPS,
};

#[derive(Debug, PartialEq)]
enum Oracle {
    Leaf(f64),
    Split(usize, f64, Box<Oracle>, Box<Oracle>),
}

fn mean(y: &[f64]) -> f64 {
    y.iter().sum::<f64>() / y.len() as f64
}

fn sse(y: &[f64]) -> f64 {
    let m = mean(y);
    y.iter().map(|v| (v - m) * (v - m)).sum()
}

/// Tries every feature and every midpoint, scoring children directly.
fn brute(x: &[Vec<f64>], y: &[f64], depth: usize, hp: &HyperParams) -> Oracle {
    let n = y.len();
    let leaf = Oracle::Leaf(mean(y));
    if depth >= hp.max_depth || n < 2 * hp.min_samples_leaf || y.iter().all(|&v| v == y[0]) {
        return leaf;
    }
    let d = x[0].len();
    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..d {
        let mut vals: Vec<f64> = x.iter().map(|r| r[f]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let thr = w[0] + (w[1] - w[0]) / 2.0;
            let (l, r): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| x[i][f] <= thr);
            if l.len() < hp.min_samples_leaf || r.len() < hp.min_samples_leaf {
                continue;
            }
            let yl: Vec<f64> = l.iter().map(|&i| y[i]).collect();
            let yr: Vec<f64> = r.iter().map(|&i| y[i]).collect();
            let score = sse(&yl) + sse(&yr);
            if best.is_none_or(|(b, _, _)| score < b - TIE_EPS * (1.0 + b.abs())) {
                best = Some((score, f, thr));
            }
        }
    }
    let Some((_, f, thr)) = best else { return leaf };
    let (l, r): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| x[i][f] <= thr);
    let pick = |ix: &[usize]| -> (Vec<Vec<f64>>, Vec<f64>) {
        (ix.iter().map(|&i| x[i].clone()).collect(), ix.iter().map(|&i| y[i]).collect())
    };
    let (xl, yl) = pick(&l);
    let (xr, yr) = pick(&r);
    Oracle::Split(f, thr, Box::new(brute(&xl, &yl, depth + 1, hp)), Box::new(brute(&xr, &yr, depth + 1, hp)))
}

fn nested(tree: &Tree, i: usize) -> Oracle {
    match tree.nodes()[i] {
        Node::Leaf { value } => Oracle::Leaf(value),
        Node::Split { feature, threshold, left, right } => {
            Oracle::Split(feature, threshold, Box::new(nested(tree, left)), Box::new(nested(tree, right)))
        }
    }
}

fn check(x: &[Vec<f64>], y: &[f64], hp: &HyperParams) {
    let d = x[0].len();
    let rows: Vec<&[f64]> = x.iter().map(|r| r.as_slice()).collect();
    let table = Table::from_rows(d, &rows, y).unwrap();
    let idx: Vec<usize> = (0..y.len()).collect();
    let tree = fit_tree(&table, &idx, hp, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert_eq!(nested(&tree, 0), brute(x, y, 0, hp), "x={x:?} y={y:?} hp={hp:?}");
    // pre-order arena: left child directly follows its parent
    for (i, n) in tree.nodes().iter().enumerate() {
        if let Node::Split { left, .. } = n {
            assert_eq!(*left, i + 1);
        }
    }
}

fn hyper_grid(d: usize) -> Vec<HyperParams> {
    let mut out = Vec::new();
    for max_depth in [1, 2, 8] {
        for min_samples_leaf in [1, 2, 3] {
            out.push(HyperParams { n_trees: 1, max_depth, min_samples_leaf, m_try: d, bootstrap: false });
        }
    }
    out
}

/// Every sequence of length `n` over `alphabet`.
fn sequences(alphabet: &[f64], n: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|s| {
                alphabet.iter().map(move |&a| {
                    let mut t = s.clone();
                    t.push(a);
                    t
                })
            })
            .collect();
    }
    out
}

const XS: [f64; 3] = [0.0, 1.0, 2.5];
const YS: [f64; 3] = [0.0, 1.0, 4.0];

pub fn exhaustive_one_feature_up_to_five_points() {
    let grid = hyper_grid(1);
    for n in 1..=5 {
        for xs in sequences(&XS, n) {
            let x: Vec<Vec<f64>> = xs.iter().map(|&v| vec![v]).collect();
            for y in sequences(&YS, n) {
                for hp in &grid {
                    check(&x, &y, hp);
                }
            }
        }
    }
}

pub fn exhaustive_two_features_up_to_three_points() {
    let grid = hyper_grid(2);
    for n in 1..=3 {
        let cells = sequences(&XS, 2 * n);
        for flat in cells {
            let x: Vec<Vec<f64>> = flat.chunks(2).map(|c| c.to_vec()).collect();
            for y in sequences(&YS, n) {
                for hp in &grid {
                    check(&x, &y, hp);
                }
            }
        }
    }
}

pub fn exhaustive_binary_targets_up_to_eight_points() {
    let grid = [
        HyperParams { n_trees: 1, max_depth: 8, min_samples_leaf: 1, m_try: 1, bootstrap: false },
        HyperParams { n_trees: 1, max_depth: 2, min_samples_leaf: 2, m_try: 1, bootstrap: false },
    ];
    for n in 6..=8 {
        // three-level inputs up to seven points, two-level at eight
        let alphabet: &[f64] = if n < 8 { &XS } else { &[0.0, 1.0] };
        for xs in sequences(alphabet, n) {
            let x: Vec<Vec<f64>> = xs.iter().map(|&v| vec![v]).collect();
            for y in sequences(&[0.0, 1.0], n) {
                for hp in &grid {
                    check(&x, &y, hp);
                }
            }
        }
    }
}

pub fn random_small_datasets_up_to_eight_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for n in 4..=8 {
        for d in 1..=2 {
            let grid = hyper_grid(d);
            for _ in 0..3000 {
                let x: Vec<Vec<f64>> =
                    (0..n).map(|_| (0..d).map(|_| rng.random_range(0..4) as f64 * 0.5).collect()).collect();
                let y: Vec<f64> = (0..n).map(|_| rng.random_range(0..5) as f64).collect();
                check(&x, &y, &grid[rng.random_range(0..grid.len())]);
            }
        }
    }
}

pub fn grid_search_matches_manual_cross_validation() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rows: Vec<[f64; 3]> = (0..60)
        .map(|_| [rng.random_range(0.0..4.0), rng.random_range(0.0..1.0), rng.random_range(-1.0..1.0)])
        .collect();
    let y: Vec<f64> = rows.iter().map(|r| 10.0 * r[0] + 3.0 * r[1] * r[1] + r[2] * 0.1).collect();
    let data = Table::from_rows(3, &rows, &y).unwrap();
    let cells = [
        HyperParams { n_trees: 5, max_depth: 2, min_samples_leaf: 3, m_try: 2, bootstrap: true },
        HyperParams { n_trees: 7, max_depth: 6, min_samples_leaf: 1, m_try: 3, bootstrap: true },
    ];
    let (k, seed) = (4, 77);
    let result = grid_search(&data, &cells, k, seed).unwrap();

    let folds = fold_assignment(data.len(), k, seed).unwrap();
    let mut manual = Vec::new();
    for hp in &cells {
        let mut fold_mse = Vec::new();
        for f in 0..k {
            let tr: Vec<usize> = (0..data.len()).filter(|&i| folds[i] != f).collect();
            let va: Vec<usize> = (0..data.len()).filter(|&i| folds[i] == f).collect();
            let model = train(&data.subset(&tr), hp, seed).unwrap();
            let val = data.subset(&va);
            let pred = model.predict_table(&val).unwrap();
            fold_mse.push(Metrics::from_predictions(val.targets(), &pred).unwrap().mse);
        }
        manual.push(fold_mse);
    }
    for (cell, want) in result.cells.iter().zip(&manual) {
        assert_eq!(&cell.fold_mse, want);
        assert_eq!(cell.mean_mse, want.iter().sum::<f64>() / k as f64);
    }
    let manual_best = if manual[1].iter().sum::<f64>() < manual[0].iter().sum::<f64>() { 1 } else { 0 };
    assert_eq!(result.best_index, manual_best);
    assert_eq!(result.best, cells[manual_best]);
}

/// Every enumerated and random dataset against the brute-force oracle.
pub fn enumerated_suite() {
    exhaustive_one_feature_up_to_five_points();
    exhaustive_two_features_up_to_three_points();
    exhaustive_binary_targets_up_to_eight_points();
    random_small_datasets_up_to_eight_points();
}
