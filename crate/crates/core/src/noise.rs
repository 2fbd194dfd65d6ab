//! Label noise channels.
//!
//! A channel is described by a [`NoiseModel`]; it can be sampled (flip the
//! label of each example independently) or applied exactly to a
//! [`FiniteDistribution`] by pushing each label conditional through the
//! transition matrix.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView2};

use crate::data::FiniteDistribution;
use crate::error::{Error, Result};
use crate::math::PROB_SUM_TOL;
use crate::rng::Rng;

/// Row-stochastic `k x k` matrix: entry `(i, j)` is the probability that a
/// true label `i` is observed as `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseMatrix {
    p: Array2<f64>,
}

impl NoiseMatrix {
    pub fn new(p: Array2<f64>) -> Result<Self> {
        if p.nrows() != p.ncols() {
            return Err(Error::DimensionMismatch {
                what: "noise matrix rows vs columns",
                expected: p.nrows(),
                actual: p.ncols(),
            });
        }
        if p.nrows() < 2 {
            return Err(Error::InvalidInput(format!(
                "noise matrix needs at least 2 classes, got {}",
                p.nrows()
            )));
        }
        for (i, row) in p.rows().into_iter().enumerate() {
            if row.iter().any(|&x| !x.is_finite() || !(0.0..=1.0 + PROB_SUM_TOL).contains(&x)) {
                return Err(Error::InvalidInput(format!(
                    "noise matrix row {i} has entries outside [0, 1]"
                )));
            }
            let s: f64 = row.sum();
            if (s - 1.0).abs() > PROB_SUM_TOL {
                return Err(Error::InvalidInput(format!(
                    "noise matrix row {i} sums to {s}, expected 1"
                )));
            }
        }
        Ok(Self { p })
    }

    pub fn k(&self) -> usize {
        self.p.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.p[[i, j]]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.p.row(i).to_vec()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.p
    }

    /// True when every diagonal entry strictly exceeds all off-diagonal
    /// entries of its row (the correct label stays the most likely one).
    pub fn diagonal_dominant(&self) -> bool {
        let k = self.k();
        (0..k).all(|i| (0..k).all(|j| i == j || self.p[[i, i]] > self.p[[i, j]]))
    }

    /// Writes the matrix as a line with `k` followed by `k` rows of `k`
    /// space-separated values at 17 significant digits, so reading the file
    /// back restores every entry exactly.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{}", self.k())?;
        for row in self.p.rows() {
            let line: Vec<String> = row.iter().map(|&x| format!("{x:.16e}")).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        let mut lines = reader.lines();
        let first = match lines.next() {
            Some(line) => line?,
            None => return Err(Error::parse(path, 1, "empty file, expected class count")),
        };
        let k: usize = first
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, 1, format!("expected class count, got '{}'", first.trim())))?;
        if k < 2 {
            return Err(Error::parse(path, 1, format!("class count must be at least 2, got {k}")));
        }
        let mut p = Array2::zeros((k, k));
        for i in 0..k {
            let line_no = i + 2;
            let line = match lines.next() {
                Some(line) => line?,
                None => return Err(Error::parse(path, line_no, format!("expected {k} rows, file ends after {i}"))),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != k {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("expected {k} entries, got {}", fields.len()),
                ));
            }
            let mut sum = 0.0;
            for (j, field) in fields.iter().enumerate() {
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::parse(path, line_no, format!("not a number: '{field}'")))?;
                if !v.is_finite() || !(0.0..=1.0 + PROB_SUM_TOL).contains(&v) {
                    return Err(Error::parse(path, line_no, format!("entry {v} outside [0, 1]")));
                }
                p[[i, j]] = v;
                sum += v;
            }
            if (sum - 1.0).abs() > PROB_SUM_TOL {
                return Err(Error::parse(path, line_no, format!("row sums to {sum}, expected 1")));
            }
        }
        NoiseMatrix::new(p)
    }
}

/// The supported noise channels.
#[derive(Debug, Clone)]
pub enum NoiseModel {
    /// Every label flips with probability `eta`, uniformly to the other
    /// classes.
    Symmetric { eta: f64 },
    /// Class `i` flips with probability `eta_per_class[i]`, uniformly to
    /// the other classes.
    SimpleClassConditional { eta_per_class: Vec<f64> },
    /// Arbitrary row-stochastic transition matrix.
    ClassConditional { matrix: NoiseMatrix },
    /// Feature-dependent symmetric flips: at point `x` the flip rate is
    /// `cap * sigmoid(a * x[0] + b)`, clipped to `[0, cap]`.
    SimpleNonUniform { cap: f64, a: f64, b: f64 },
}

impl NoiseModel {
    pub fn validate(&self, k: usize) -> Result<()> {
        if k < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 classes, got {k}")));
        }
        let limit = (k as f64 - 1.0) / k as f64;
        match self {
            NoiseModel::Symmetric { eta } => {
                if !eta.is_finite() || !(0.0..1.0).contains(eta) {
                    return Err(Error::Domain(format!("symmetric rate {eta} outside [0, 1)")));
                }
            }
            NoiseModel::SimpleClassConditional { eta_per_class } => {
                if eta_per_class.len() != k {
                    return Err(Error::DimensionMismatch {
                        what: "per-class rates vs classes",
                        expected: k,
                        actual: eta_per_class.len(),
                    });
                }
                for (i, &e) in eta_per_class.iter().enumerate() {
                    if !e.is_finite() || !(0.0..1.0).contains(&e) {
                        return Err(Error::Domain(format!("rate {e} for class {i} outside [0, 1)")));
                    }
                }
            }
            NoiseModel::ClassConditional { matrix } => {
                if matrix.k() != k {
                    return Err(Error::DimensionMismatch {
                        what: "noise matrix classes",
                        expected: k,
                        actual: matrix.k(),
                    });
                }
            }
            NoiseModel::SimpleNonUniform { cap, a, b } => {
                if !cap.is_finite() || !(0.0..limit).contains(cap) {
                    return Err(Error::Domain(format!(
                        "rate cap {cap} outside [0, (k-1)/k = {limit})"
                    )));
                }
                if !a.is_finite() || !b.is_finite() {
                    return Err(Error::Domain("non-finite rate parameters".into()));
                }
            }
        }
        Ok(())
    }

    /// Flip rate at a feature point for the feature-dependent channel.
    pub fn rate_at(&self, x: &[f64]) -> Option<f64> {
        match self {
            NoiseModel::SimpleNonUniform { cap, a, b } => {
                let t = a * x.first().copied().unwrap_or(0.0) + b;
                let s = 1.0 / (1.0 + (-t).exp());
                Some((cap * s).clamp(0.0, *cap))
            }
            _ => None,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            NoiseModel::Symmetric { .. } => "symmetric",
            NoiseModel::SimpleClassConditional { .. } => "simple-class-conditional",
            NoiseModel::ClassConditional { .. } => "class-conditional",
            NoiseModel::SimpleNonUniform { .. } => "simple-non-uniform",
        }
    }
}

impl std::fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NoiseModel::Symmetric { eta } => write!(f, "symmetric(eta={eta})"),
            NoiseModel::SimpleClassConditional { eta_per_class } => {
                let rates: Vec<String> = eta_per_class.iter().map(|e| e.to_string()).collect();
                write!(f, "simple-class-conditional(eta=[{}])", rates.join(","))
            }
            NoiseModel::ClassConditional { matrix } => {
                write!(f, "class-conditional(k={})", matrix.k())
            }
            NoiseModel::SimpleNonUniform { cap, a, b } => {
                write!(f, "simple-non-uniform(cap={cap},a={a},b={b})")
            }
        }
    }
}

fn symmetric_row(k: usize, eta: f64, true_label: usize) -> Vec<f64> {
    let off = eta / (k as f64 - 1.0);
    (0..k)
        .map(|j| if j == true_label { 1.0 - eta } else { off })
        .collect()
}

/// Transition matrix of a class-dependent channel. The feature-dependent
/// channel has no single matrix, so it is rejected.
pub fn transition_matrix(model: &NoiseModel, k: usize) -> Result<NoiseMatrix> {
    model.validate(k)?;
    match model {
        NoiseModel::Symmetric { eta } => {
            let mut p = Array2::zeros((k, k));
            for i in 0..k {
                let row = symmetric_row(k, *eta, i);
                for j in 0..k {
                    p[[i, j]] = row[j];
                }
            }
            NoiseMatrix::new(p)
        }
        NoiseModel::SimpleClassConditional { eta_per_class } => {
            let mut p = Array2::zeros((k, k));
            for i in 0..k {
                let row = symmetric_row(k, eta_per_class[i], i);
                for j in 0..k {
                    p[[i, j]] = row[j];
                }
            }
            NoiseMatrix::new(p)
        }
        NoiseModel::ClassConditional { matrix } => Ok(matrix.clone()),
        NoiseModel::SimpleNonUniform { .. } => Err(Error::UnsupportedNoise {
            op: "transition_matrix",
            model: model.name().into(),
        }),
    }
}

/// Independently resamples each label through the channel. Returns a new
/// vector; the input is never modified. `features` is consulted only by the
/// feature-dependent channel and must then have one row per label.
pub fn corrupt_labels(
    labels: &[usize],
    model: &NoiseModel,
    features: ArrayView2<'_, f64>,
    classes: usize,
    rng: &mut Rng,
) -> Result<Vec<usize>> {
    model.validate(classes)?;
    if let Some(&bad) = labels.iter().find(|&&y| y >= classes) {
        return Err(Error::InvalidLabel { label: bad, classes });
    }
    match model {
        NoiseModel::SimpleNonUniform { .. } => {
            if features.nrows() != labels.len() {
                return Err(Error::DimensionMismatch {
                    what: "feature rows vs labels",
                    expected: labels.len(),
                    actual: features.nrows(),
                });
            }
            let mut out = Vec::with_capacity(labels.len());
            for (i, &y) in labels.iter().enumerate() {
                let x: Vec<f64> = features.row(i).to_vec();
                let eta = model.rate_at(&x).expect("feature-dependent channel has a rate");
                let row = symmetric_row(classes, eta, y);
                out.push(rng.categorical(&row));
            }
            Ok(out)
        }
        _ => {
            let t = transition_matrix(model, classes)?;
            Ok(labels.iter().map(|&y| rng.categorical(&t.row(y))).collect())
        }
    }
}

/// Random diagonally dominant row-stochastic matrix. Each row draws a total
/// flip rate uniformly from `[0, row_noise_max]` and splits it across the
/// off-diagonal entries by a uniform simplex point, redrawing the split
/// until the diagonal strictly dominates the row. Requires
/// `row_noise_max < (k-1)/k`, which makes an acceptable split reachable.
pub fn random_diag_dominant(k: usize, row_noise_max: f64, rng: &mut Rng) -> NoiseMatrix {
    assert!(k >= 2, "need at least 2 classes");
    let limit = (k as f64 - 1.0) / k as f64;
    assert!(
        (0.0..limit).contains(&row_noise_max),
        "row_noise_max {row_noise_max} outside [0, (k-1)/k = {limit})"
    );
    let mut p = Array2::zeros((k, k));
    for i in 0..k {
        let eta = rng.uniform_in(0.0, row_noise_max);
        loop {
            let split = rng.simplex(k - 1);
            let diag = 1.0 - eta;
            if split.iter().all(|&s| s * eta < diag) {
                let mut off = split.iter().map(|&s| s * eta);
                for j in 0..k {
                    p[[i, j]] = if j == i { diag } else { off.next().unwrap() };
                }
                break;
            }
        }
    }
    NoiseMatrix::new(p).expect("constructed rows are stochastic")
}

/// Pushes the label conditionals of `dist` through the channel:
/// `p(observed = j | x) = sum_i p(y = i | x) * p(observed = j | y = i, x)`.
/// Support and mass are unchanged.
pub fn corrupt_distribution(dist: &FiniteDistribution, model: &NoiseModel) -> Result<FiniteDistribution> {
    let k = dist.classes();
    model.validate(k)?;
    let cond = dist.conditionals();
    let mut out = Array2::zeros((dist.n_points(), k));
    match model {
        NoiseModel::SimpleNonUniform { .. } => {
            for m in 0..dist.n_points() {
                let x: Vec<f64> = dist.point(m).to_vec();
                let eta = model.rate_at(&x).expect("feature-dependent channel has a rate");
                for i in 0..k {
                    let row = symmetric_row(k, eta, i);
                    for j in 0..k {
                        out[[m, j]] += cond[[m, i]] * row[j];
                    }
                }
            }
        }
        _ => {
            let t = transition_matrix(model, k)?;
            for m in 0..dist.n_points() {
                for i in 0..k {
                    for j in 0..k {
                        out[[m, j]] += cond[[m, i]] * t.entry(i, j);
                    }
                }
            }
        }
    }
    dist.with_conditionals(out)
}
