//! Datasets and distributions: labeled samples, finite distributions with
//! exactly computable expectations, synthetic Gaussian blobs, and CSV I/O.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::math::PROB_SUM_TOL;
use crate::rng::Rng;

/// Feature matrix plus integer labels in `[0, classes)`.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    features: Array2<f64>,
    labels: Vec<usize>,
    classes: usize,
}

impl LabeledDataset {
    pub fn new(features: Array2<f64>, labels: Vec<usize>, classes: usize) -> Result<Self> {
        if classes < 2 {
            return Err(Error::InvalidInput(format!(
                "dataset needs at least 2 classes, got {classes}"
            )));
        }
        if features.nrows() != labels.len() {
            return Err(Error::DimensionMismatch {
                what: "dataset rows vs labels",
                expected: features.nrows(),
                actual: labels.len(),
            });
        }
        if features.nrows() == 0 {
            return Err(Error::InvalidInput("dataset is empty".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= classes) {
            return Err(Error::InvalidLabel { label: bad, classes });
        }
        if features.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite feature value".into()));
        }
        Ok(Self { features, labels, classes })
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn point(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// Same features, different labels. Lengths must match.
    pub fn with_labels(&self, labels: Vec<usize>) -> Result<Self> {
        Self::new(self.features.clone(), labels, self.classes)
    }

    /// Rows at `idx`, in order, as a (features, labels) batch.
    pub fn gather(&self, idx: &[usize]) -> (Array2<f64>, Vec<usize>) {
        let mut x = Array2::zeros((idx.len(), self.dim()));
        let mut y = Vec::with_capacity(idx.len());
        for (row, &i) in idx.iter().enumerate() {
            x.row_mut(row).assign(&self.features.row(i));
            y.push(self.labels[i]);
        }
        (x, y)
    }
}

/// A distribution with finite support: `mass[m]` on feature point
/// `support[m]`, and the label conditional `conditionals[m][j] = p(y = j | x_m)`.
/// Every expectation over it is a finite sum, so risks are exact up to
/// float rounding rather than Monte Carlo error.
#[derive(Debug, Clone)]
pub struct FiniteDistribution {
    support: Array2<f64>,
    mass: Array1<f64>,
    conditionals: Array2<f64>,
}

impl FiniteDistribution {
    pub fn new(support: Array2<f64>, mass: Array1<f64>, conditionals: Array2<f64>) -> Result<Self> {
        let m = support.nrows();
        if m == 0 {
            return Err(Error::InvalidInput("empty support".into()));
        }
        if mass.len() != m {
            return Err(Error::DimensionMismatch {
                what: "mass entries vs support points",
                expected: m,
                actual: mass.len(),
            });
        }
        if conditionals.nrows() != m {
            return Err(Error::DimensionMismatch {
                what: "conditional rows vs support points",
                expected: m,
                actual: conditionals.nrows(),
            });
        }
        if conditionals.ncols() < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 classes, got {}",
                conditionals.ncols()
            )));
        }
        if support.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite support point".into()));
        }
        if mass.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return Err(Error::InvalidInput("mass entries must be nonnegative".into()));
        }
        let total: f64 = mass.sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidInput(format!(
                "mass sums to {total}, expected 1"
            )));
        }
        for (i, row) in conditionals.rows().into_iter().enumerate() {
            if row.iter().any(|&p| !p.is_finite() || !(0.0..=1.0 + PROB_SUM_TOL).contains(&p)) {
                return Err(Error::InvalidInput(format!(
                    "conditional row {i} has entries outside [0, 1]"
                )));
            }
            let s: f64 = row.sum();
            if (s - 1.0).abs() > PROB_SUM_TOL {
                return Err(Error::InvalidInput(format!(
                    "conditional row {i} sums to {s}, expected 1"
                )));
            }
        }
        Ok(Self { support, mass, conditionals })
    }

    pub fn n_points(&self) -> usize {
        self.support.nrows()
    }

    pub fn dim(&self) -> usize {
        self.support.ncols()
    }

    pub fn classes(&self) -> usize {
        self.conditionals.ncols()
    }

    pub fn support(&self) -> &Array2<f64> {
        &self.support
    }

    pub fn point(&self, m: usize) -> ArrayView1<'_, f64> {
        self.support.row(m)
    }

    pub fn mass(&self) -> &Array1<f64> {
        &self.mass
    }

    pub fn conditionals(&self) -> &Array2<f64> {
        &self.conditionals
    }

    /// Same support and mass with replaced label conditionals.
    pub fn with_conditionals(&self, conditionals: Array2<f64>) -> Result<Self> {
        Self::new(self.support.clone(), self.mass.clone(), conditionals)
    }
}

/// The empirical distribution of a dataset: mass 1/N on every sample
/// (duplicates stay distinct) with one-hot label conditionals.
pub fn to_finite(ds: &LabeledDataset) -> FiniteDistribution {
    let n = ds.n();
    let mass = Array1::from_elem(n, 1.0 / n as f64);
    let mut cond = Array2::zeros((n, ds.classes()));
    for (i, &y) in ds.labels().iter().enumerate() {
        cond[[i, y]] = 1.0;
    }
    FiniteDistribution::new(ds.features().clone(), mass, cond)
        .expect("empirical distribution is valid by construction")
}

// ====================== synthetic blob generation ======================

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlobKind {
    /// Isotropic Gaussian clusters with randomly placed means; classes may
    /// overlap, so the best achievable risk is generally nonzero.
    Blobs,
    /// Means spaced at least `6 * spread + separation` apart, so the
    /// 3-sigma balls of the clusters are pairwise disjoint and a
    /// nearest-mean classifier separates the training data.
    SeparatedBlobs,
}

impl std::str::FromStr for BlobKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "blobs" => Ok(BlobKind::Blobs),
            "separated-blobs" => Ok(BlobKind::SeparatedBlobs),
            other => Err(Error::InvalidInput(format!("unknown blob kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for BlobKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BlobKind::Blobs => "blobs",
            BlobKind::SeparatedBlobs => "separated-blobs",
        })
    }
}

/// Parameters of a synthetic blob dataset. The class means are a function
/// of `seed` alone, so repeated draws with fresh generators sample the same
/// underlying distribution.
#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub kind: BlobKind,
    pub classes: usize,
    pub dim: usize,
    pub n_per_class: usize,
    pub spread: f64,
    pub separation: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.classes < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 classes, got {}",
                self.classes
            )));
        }
        if self.dim == 0 {
            return Err(Error::InvalidInput("need at least 1 feature dimension".into()));
        }
        if self.n_per_class == 0 {
            return Err(Error::InvalidInput("need at least 1 sample per class".into()));
        }
        if !(self.spread.is_finite() && self.spread > 0.0) {
            return Err(Error::InvalidInput(format!("spread must be positive, got {}", self.spread)));
        }
        if !(self.separation.is_finite() && self.separation >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "separation must be nonnegative, got {}",
                self.separation
            )));
        }
        Ok(())
    }
}

/// Class means determined by `spec.seed`.
///
/// Separated blobs sit on a line along the first axis with gap
/// `6 * spread + separation` between neighbours; plain blobs draw every
/// mean coordinate from `N(0, separation^2)`.
pub fn class_means(spec: &SyntheticSpec) -> Array2<f64> {
    let mut means = Array2::zeros((spec.classes, spec.dim));
    match spec.kind {
        BlobKind::SeparatedBlobs => {
            let gap = 6.0 * spec.spread + spec.separation;
            for c in 0..spec.classes {
                means[[c, 0]] = gap * c as f64;
            }
        }
        BlobKind::Blobs => {
            let mut rng = Rng::new(spec.seed);
            for c in 0..spec.classes {
                for d in 0..spec.dim {
                    means[[c, d]] = spec.separation * rng.normal();
                }
            }
        }
    }
    means
}

/// Draws `counts[c]` points for class `c` around its mean with isotropic
/// noise of scale `spread`, in class order. For separated blobs the result
/// is checked to be nearest-mean separable; pick `separation` comfortably
/// above zero so the check cannot trip.
fn gen_blobs_with_counts(spec: &SyntheticSpec, counts: &[usize], rng: &mut Rng) -> LabeledDataset {
    spec.validate().expect("invalid synthetic spec");
    assert_eq!(counts.len(), spec.classes);
    let means = class_means(spec);
    let total: usize = counts.iter().sum();
    let mut x = Array2::zeros((total, spec.dim));
    let mut y = Vec::with_capacity(total);
    let mut row = 0;
    for (c, &n_c) in counts.iter().enumerate() {
        for _ in 0..n_c {
            for d in 0..spec.dim {
                x[[row, d]] = means[[c, d]] + spec.spread * rng.normal();
            }
            y.push(c);
            row += 1;
        }
    }
    let ds = LabeledDataset::new(x, y, spec.classes).expect("generated dataset is valid");
    if spec.kind == BlobKind::SeparatedBlobs {
        for i in 0..ds.n() {
            let nearest = nearest_mean_label(&means, ds.point(i));
            assert_eq!(
                nearest,
                ds.labels()[i],
                "separated blobs are not nearest-mean separable; increase separation"
            );
        }
    }
    ds
}

/// `spec.n_per_class` samples per class.
pub fn gen_blobs(spec: &SyntheticSpec, rng: &mut Rng) -> LabeledDataset {
    let counts = vec![spec.n_per_class; spec.classes];
    gen_blobs_with_counts(spec, &counts, rng)
}

/// Exactly `total` samples, split across classes as evenly as possible
/// (earlier classes get the remainder).
pub fn gen_blobs_sized(spec: &SyntheticSpec, total: usize, rng: &mut Rng) -> LabeledDataset {
    assert!(total >= spec.classes, "need at least one sample per class");
    let base = total / spec.classes;
    let extra = total % spec.classes;
    let counts: Vec<usize> = (0..spec.classes)
        .map(|c| base + usize::from(c < extra))
        .collect();
    gen_blobs_with_counts(spec, &counts, rng)
}

pub fn nearest_mean_label(means: &Array2<f64>, x: ArrayView1<'_, f64>) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, mean) in means.rows().into_iter().enumerate() {
        let d: f64 = mean
            .iter()
            .zip(x.iter())
            .map(|(m, v)| (m - v) * (m - v))
            .sum();
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

// ============================== CSV I/O ================================
//
// Format: a header row `f0,f1,...,label`, then one row per sample with the
// features printed at 17 significant digits (so reading them back restores
// the exact f64) and the label as a plain integer in the last column.

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn save_csv(ds: &LabeledDataset, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let header: Vec<String> = (0..ds.dim())
        .map(|d| format!("f{d}"))
        .chain(std::iter::once("label".to_string()))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for i in 0..ds.n() {
        let mut fields: Vec<String> = ds.point(i).iter().map(|&v| fmt_f64(v)).collect();
        fields.push(ds.labels()[i].to_string());
        writeln!(w, "{}", fields.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Loads a dataset, inferring the class count as `max label + 1` (at least 2).
pub fn load_csv(path: &Path) -> Result<LabeledDataset> {
    load_csv_impl(path, None)
}

/// Loads a dataset and rejects any label `>= classes`, naming the line.
pub fn load_csv_expecting(path: &Path, classes: usize) -> Result<LabeledDataset> {
    load_csv_impl(path, Some(classes))
}

fn load_csv_impl(path: &Path, expected_classes: Option<usize>) -> Result<LabeledDataset> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();

    let header = match lines.next() {
        Some(line) => line?,
        None => return Err(Error::parse(path, 1, "no header row")),
    };
    let columns: Vec<&str> = header.trim_end_matches('\r').split(',').collect();
    if columns.len() < 2 {
        return Err(Error::parse(path, 1, "header needs at least one feature column and 'label'"));
    }
    if *columns.last().unwrap() != "label" {
        return Err(Error::parse(
            path,
            1,
            format!("last header column must be 'label', got '{}'", columns.last().unwrap()),
        ));
    }
    let dim = columns.len() - 1;

    let mut rows: Vec<f64> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 1 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected {} fields, got {}", dim + 1, fields.len()),
            ));
        }
        for field in &fields[..dim] {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::parse(path, line_no, format!("not a number: '{field}'"))
            })?;
            if !v.is_finite() {
                return Err(Error::parse(path, line_no, format!("non-finite feature: '{field}'")));
            }
            rows.push(v);
        }
        let label_field = fields[dim].trim();
        let y: usize = label_field.parse().map_err(|_| {
            Error::parse(
                path,
                line_no,
                format!("label must be a nonnegative integer, got '{label_field}'"),
            )
        })?;
        if let Some(classes) = expected_classes {
            if y >= classes {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("label {y} out of range for {classes} classes"),
                ));
            }
        }
        labels.push(y);
    }
    if labels.is_empty() {
        return Err(Error::parse(path, 2, "no data rows"));
    }
    let classes = expected_classes.unwrap_or_else(|| (labels.iter().copied().max().unwrap() + 1).max(2));
    let n = labels.len();
    let features = Array2::from_shape_vec((n, dim), rows)
        .expect("row-major feature buffer matches dimensions");
    LabeledDataset::new(features, labels, classes)
}
