//! `.cfmodel`: a versioned, self-describing text format for forest models.
//!
//! ```text
//! cfmodel 1.0
//! feature_set_version 1
//! seed 42
//! n_trees 2
//! max_depth 12
//! min_samples_leaf 2
//! m_try 6
//! bootstrap true
//! n_features 18
//! feature 0 lin_vel_mean 0.31 0.12 false
//! ...
//! tree 0 (S 3 0.25 (L 1.5) (L 2.0))
//! tree 1 (L 7.0)
//! end
//! ```
//!
//! Each `feature` line is `index name mean std degenerate` (the stored
//! scaler). Trees are nested pre-order nodes: `(L value)` or
//! `(S feature threshold left right)`, where rows with
//! `x[feature] <= threshold` go left. Floats are written in shortest
//! round-trip form, so save→load→save is byte-identical. A reader accepts
//! any minor version of its major version.

use std::fmt::Write as _;
use std::path::Path;

use vrcomfort_core::dataset::Scaler;
use vrcomfort_core::forest::{ForestError, ForestModel, HyperParams, Node, Tree};
use vrcomfort_core::kinematics::FEATURE_SET_VERSION;

use crate::error::{read_to_string, write_file, Error, Result};

pub const MAGIC: &str = "cfmodel";
pub const FORMAT_MAJOR: u32 = 1;
pub const FORMAT_MINOR: u32 = 0;
pub const EXTENSION: &str = "cfmodel";
const MAX_NESTING: usize = 1024;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelFileError {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unsupported model format version {found} (this build reads {FORMAT_MAJOR}.x)")]
    Version { found: String },
    #[error("cannot write model: {0}")]
    Unwritable(String),
    #[error("inconsistent model: {0}")]
    Invalid(#[from] ForestError),
}

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn write_node(out: &mut String, nodes: &[Node], i: usize) {
    match nodes[i] {
        Node::Leaf { value } => {
            let _ = write!(out, "(L {})", fmt_f64(value));
        }
        Node::Split { feature, threshold, left, right } => {
            let _ = write!(out, "(S {feature} {} ", fmt_f64(threshold));
            write_node(out, nodes, left);
            out.push(' ');
            write_node(out, nodes, right);
            out.push(')');
        }
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty() && !name.chars().any(|c| c.is_whitespace() || c == '(' || c == ')')
}

pub fn to_text(model: &ForestModel) -> Result<String, ModelFileError> {
    let hp = model.hyperparams();
    let scaler = model.scaler();
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {FORMAT_MAJOR}.{FORMAT_MINOR}");
    let _ = writeln!(out, "feature_set_version {FEATURE_SET_VERSION}");
    let _ = writeln!(out, "seed {}", model.seed());
    let _ = writeln!(out, "n_trees {}", hp.n_trees);
    let _ = writeln!(out, "max_depth {}", hp.max_depth);
    let _ = writeln!(out, "min_samples_leaf {}", hp.min_samples_leaf);
    let _ = writeln!(out, "m_try {}", hp.m_try);
    let _ = writeln!(out, "bootstrap {}", hp.bootstrap);
    let _ = writeln!(out, "n_features {}", model.n_features());
    for (f, name) in model.feature_names().iter().enumerate() {
        if !valid_name(name) {
            return Err(ModelFileError::Unwritable(format!("feature name `{name}`")));
        }
        let _ = writeln!(
            out,
            "feature {f} {name} {} {} {}",
            fmt_f64(scaler.mean[f]),
            fmt_f64(scaler.std[f]),
            scaler.degenerate[f]
        );
    }
    for (i, tree) in model.trees().iter().enumerate() {
        let _ = write!(out, "tree {i} ");
        write_node(&mut out, tree.nodes(), 0);
        out.push('\n');
    }
    out.push_str("end\n");
    Ok(out)
}

struct Lexer<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn err<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, ModelFileError> {
        Err(ModelFileError::Parse { offset, message: message.into() })
    }

    /// Next token and its byte offset; parentheses are single tokens.
    fn next(&mut self) -> Result<(usize, &'a str), ModelFileError> {
        let bytes = self.text.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        if start >= bytes.len() {
            return self.err(start, "unexpected end of file");
        }
        if matches!(bytes[start], b'(' | b')') {
            self.pos += 1;
        } else {
            while self.pos < bytes.len()
                && !bytes[self.pos].is_ascii_whitespace()
                && !matches!(bytes[self.pos], b'(' | b')')
            {
                self.pos += 1;
            }
        }
        Ok((start, &self.text[start..self.pos]))
    }

    fn expect(&mut self, word: &str) -> Result<usize, ModelFileError> {
        let (at, tok) = self.next()?;
        if tok != word {
            return self.err(at, format!("expected `{word}`, found `{tok}`"));
        }
        Ok(at)
    }

    fn parse<T: std::str::FromStr>(&mut self, what: &str) -> Result<(usize, T), ModelFileError> {
        let (at, tok) = self.next()?;
        match tok.parse() {
            Ok(v) => Ok((at, v)),
            Err(_) => self.err(at, format!("expected {what}, found `{tok}`")),
        }
    }

    fn float(&mut self, what: &str) -> Result<f64, ModelFileError> {
        let (at, v): (usize, f64) = self.parse(what)?;
        if !v.is_finite() {
            return self.err(at, format!("{what} must be finite"));
        }
        Ok(v)
    }

    fn keyed<T: std::str::FromStr>(&mut self, key: &str) -> Result<(usize, T), ModelFileError> {
        self.expect(key)?;
        self.parse(key)
    }

    fn node(&mut self, nodes: &mut Vec<Node>, depth: usize) -> Result<usize, ModelFileError> {
        let open = self.expect("(")?;
        if depth > MAX_NESTING {
            return self.err(open, "tree nested too deeply");
        }
        let id = nodes.len();
        let (at, kind) = self.next()?;
        match kind {
            "L" => {
                let value = self.float("leaf value")?;
                nodes.push(Node::Leaf { value });
            }
            "S" => {
                let (_, feature): (usize, usize) = self.parse("feature index")?;
                let threshold = self.float("threshold")?;
                nodes.push(Node::Leaf { value: 0.0 });
                let left = self.node(nodes, depth + 1)?;
                let right = self.node(nodes, depth + 1)?;
                nodes[id] = Node::Split { feature, threshold, left, right };
            }
            other => return self.err(at, format!("expected node kind `L` or `S`, found `{other}`")),
        }
        self.expect(")")?;
        Ok(id)
    }
}

pub fn from_text(text: &str) -> Result<ForestModel, ModelFileError> {
    let mut lx = Lexer { text, pos: 0 };
    lx.expect(MAGIC)?;
    let (at, version) = lx.next()?;
    let major = version.split_once('.').and_then(|(m, n)| {
        n.parse::<u32>().ok()?;
        m.parse::<u32>().ok()
    });
    match major {
        Some(FORMAT_MAJOR) => {}
        Some(_) => return Err(ModelFileError::Version { found: version.to_string() }),
        None => return lx.err(at, format!("malformed version `{version}`")),
    }
    let (at, fsv): (usize, u32) = lx.keyed("feature_set_version")?;
    if fsv != FEATURE_SET_VERSION {
        return lx.err(at, format!("feature set version {fsv}, this build computes {FEATURE_SET_VERSION}"));
    }
    let (_, seed): (usize, u64) = lx.keyed("seed")?;
    let (_, n_trees) = lx.keyed("n_trees")?;
    let (_, max_depth) = lx.keyed("max_depth")?;
    let (_, min_samples_leaf) = lx.keyed("min_samples_leaf")?;
    let (_, m_try) = lx.keyed("m_try")?;
    let (_, bootstrap) = lx.keyed("bootstrap")?;
    let hp = HyperParams { n_trees, max_depth, min_samples_leaf, m_try, bootstrap };
    let (at, n_features): (usize, usize) = lx.keyed("n_features")?;
    if n_features == 0 {
        return lx.err(at, "n_features must be positive");
    }
    hp.validate(n_features).or_else(|e| lx.err(at, e.to_string()))?;

    let mut names = Vec::with_capacity(n_features);
    let mut scaler = Scaler::identity(n_features);
    for f in 0..n_features {
        lx.expect("feature")?;
        let (at, idx): (usize, usize) = lx.parse("feature index")?;
        if idx != f {
            return lx.err(at, format!("expected feature {f}, found {idx}"));
        }
        let (_, name) = lx.next()?;
        names.push(name.to_string());
        scaler.mean[f] = lx.float("scaler mean")?;
        let (at, std) = (lx.pos, lx.float("scaler std")?);
        let (_, degenerate): (usize, bool) = lx.parse("degenerate flag")?;
        if !degenerate && std <= 0.0 {
            return lx.err(at, "scaler std must be positive");
        }
        scaler.std[f] = std;
        scaler.degenerate[f] = degenerate;
    }

    let mut trees = Vec::with_capacity(n_trees);
    for i in 0..n_trees {
        lx.expect("tree")?;
        let (at, idx): (usize, usize) = lx.parse("tree index")?;
        if idx != i {
            return lx.err(at, format!("expected tree {i}, found {idx}"));
        }
        let start = lx.pos;
        let mut nodes = Vec::new();
        lx.node(&mut nodes, 0)?;
        if let Some(bad) = nodes.iter().find_map(|n| match n {
            Node::Split { feature, .. } if *feature >= n_features => Some(*feature),
            _ => None,
        }) {
            return lx.err(start, format!("tree {i} uses feature {bad} of {n_features}"));
        }
        trees.push(Tree::from_nodes(nodes).or_else(|e| lx.err(start, e.to_string()))?);
    }
    lx.expect("end")?;
    if !text[lx.pos..].trim().is_empty() {
        let trailing = lx.pos + (text[lx.pos..].len() - text[lx.pos..].trim_start().len());
        return lx.err(trailing, "trailing content after `end`");
    }
    Ok(ForestModel::from_parts(trees, scaler, hp, seed, names)?)
}

pub fn save_model(path: &Path, model: &ForestModel) -> Result<()> {
    let text = to_text(model).map_err(|source| Error::Model { path: path.to_path_buf(), source })?;
    write_file(path, text.as_bytes())
}

pub fn load_model(path: &Path) -> Result<ForestModel> {
    let text = read_to_string(path)?;
    from_text(&text).map_err(|source| Error::Model { path: path.to_path_buf(), source })
}
