//! CSV ingestion and seeded synthetic data.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

/// Samples as rows, with optional integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    pub features: DenseMatrix,
    pub labels: Option<Vec<usize>>,
}

impl DataMatrix {
    pub fn new(features: DenseMatrix, labels: Option<Vec<usize>>) -> Result<Self> {
        if features.nrows() == 0 || features.ncols() == 0 {
            return Err(Error::contract(
                "data matrix must have at least one row and column",
            ));
        }
        if !features.iter().all(|x| x.is_finite()) {
            return Err(Error::contract("data matrix has non-finite features"));
        }
        if let Some(l) = &labels {
            if l.len() != features.nrows() {
                return Err(Error::LengthMismatch {
                    left: l.len(),
                    right: features.nrows(),
                });
            }
        }
        Ok(Self { features, labels })
    }

    pub fn rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn cols(&self) -> usize {
        self.features.ncols()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CsvOptions {
    /// Skip the first line.
    pub has_header: bool,
    /// Treat the trailing column as integer labels.
    pub labels_last: bool,
}

fn format_error(path: &Path, line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::InputFormat {
        path: path.to_path_buf(),
        line,
        column,
        message: message.into(),
    }
}

/// Reads a comma-separated numeric table, one sample per line.
pub fn load_csv_matrix(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<DataMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(opts.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut width: Option<usize> = None;
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            format_error(path, line, 0, e.to_string())
        })?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(rows + 1);
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(format_error(
                    path,
                    line,
                    record.len().min(w) + 1,
                    format!("expected {w} fields, found {}", record.len()),
                ));
            }
            _ => {}
        }
        let n_features = if opts.labels_last {
            if record.len() < 2 {
                return Err(format_error(
                    path,
                    line,
                    1,
                    "need at least one feature plus a label",
                ));
            }
            record.len() - 1
        } else {
            record.len()
        };
        for (col, field) in record.iter().enumerate().take(n_features) {
            let x: f64 = field.parse().map_err(|_| {
                format_error(path, line, col + 1, format!("not a number: {field:?}"))
            })?;
            if !x.is_finite() {
                return Err(format_error(path, line, col + 1, "non-finite value"));
            }
            values.push(x);
        }
        if opts.labels_last {
            let field = &record[n_features];
            let label: usize = field.parse().map_err(|_| {
                format_error(
                    path,
                    line,
                    n_features + 1,
                    format!("not a label: {field:?}"),
                )
            })?;
            labels.push(label);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(format_error(path, 1, 1, "no data rows"));
    }
    let cols = values.len() / rows;
    let features = DenseMatrix::from_row_slice(rows, cols, &values);
    DataMatrix::new(features, opts.labels_last.then_some(labels))
}

/// Writes features (and trailing labels) with 17 significant digits so reloading is exact.
pub fn write_csv_matrix(path: impl AsRef<Path>, data: &DataMatrix) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    for i in 0..data.rows() {
        let mut fields: Vec<String> = (0..data.cols())
            .map(|j| format!("{:.16e}", data.features[(i, j)]))
            .collect();
        if let Some(l) = &data.labels {
            fields.push(l[i].to_string());
        }
        writeln!(out, "{}", fields.join(",")).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Isotropic Gaussian clusters with balanced, contiguous labels.
pub fn gen_blobs(n: usize, c: usize, dim: usize, spread: f64, seed: u64) -> Result<DataMatrix> {
    if c < 2 || n < c {
        return Err(Error::contract(format!(
            "need n >= c >= 2, got n = {n}, c = {c}"
        )));
    }
    if dim == 0 {
        return Err(Error::contract("dim must be at least 1"));
    }
    if !(spread > 0.0 && spread.is_finite()) {
        return Err(Error::contract("spread must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers = blob_centers(c, dim, spread, &mut rng);

    let base = n / c;
    let extra = n % c;
    let mut labels = Vec::with_capacity(n);
    for j in 0..c {
        let size = base + usize::from(j < extra);
        labels.extend(std::iter::repeat_n(j, size));
    }
    let mut features = DenseMatrix::zeros(n, dim);
    for (i, &label) in labels.iter().enumerate() {
        for d in 0..dim {
            let z: f64 = rng.sample(StandardNormal);
            features[(i, d)] = centers[label][d] + spread * z;
        }
    }
    DataMatrix::new(features, Some(labels))
}

fn blob_centers(c: usize, dim: usize, spread: f64, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let min_sep = 6.0 * spread;
    let half_width = 6.0 * spread * c as f64;
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(c);
    let mut attempts = 0;
    while centers.len() < c && attempts < 10_000 {
        attempts += 1;
        let cand: Vec<f64> = (0..dim)
            .map(|_| rng.random_range(-half_width..half_width))
            .collect();
        let far_enough = centers.iter().all(|other| {
            let d2: f64 = other
                .iter()
                .zip(&cand)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            d2.sqrt() >= min_sep
        });
        if far_enough {
            centers.push(cand);
        }
    }
    if centers.len() < c {
        // Lattice along the first axis always satisfies the separation.
        centers = (0..c)
            .map(|j| {
                let mut p = vec![0.0; dim];
                p[0] = 2.0 * min_sep * j as f64;
                p
            })
            .collect();
    }
    centers
}

/// Parameters of a random weighted graph; see [`gen_random_graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomGraphSpec {
    pub n: usize,
    pub seed: u64,
}

/// `S = (A + Aᵀ) / 2` with i.i.d. uniform [0, 1) off-diagonal `A` and zero diagonal.
pub fn gen_random_graph(spec: &RandomGraphSpec) -> Result<DenseMatrix> {
    if spec.n < 3 {
        return Err(Error::contract(format!(
            "random graphs need n >= 3, got {}",
            spec.n
        )));
    }
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                a[(i, j)] = rng.random::<f64>();
            }
        }
    }
    Ok((&a + a.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn parses_plain_matrix() {
        let f = write_tmp("1,2\n3,4\n5,6\n");
        let d = load_csv_matrix(f.path(), &CsvOptions::default()).unwrap();
        assert_eq!((d.rows(), d.cols()), (3, 2));
        assert_eq!(d.features[(2, 1)], 6.0);
        assert!(d.labels.is_none());
    }

    #[test]
    fn parses_trailing_labels() {
        let f = write_tmp("1,2,0\n3,4,0\n5,6,1\n");
        let opts = CsvOptions {
            labels_last: true,
            ..Default::default()
        };
        let d = load_csv_matrix(f.path(), &opts).unwrap();
        assert_eq!((d.rows(), d.cols()), (3, 2));
        assert_eq!(d.labels, Some(vec![0, 0, 1]));
    }

    #[test]
    fn skips_header() {
        let f = write_tmp("x,y\n1,2\n");
        let opts = CsvOptions {
            has_header: true,
            ..Default::default()
        };
        let d = load_csv_matrix(f.path(), &opts).unwrap();
        assert_eq!(d.rows(), 1);
    }

    #[test]
    fn ragged_rows_name_the_line() {
        let f = write_tmp("1,2\n3\n5,6\n");
        match load_csv_matrix(f.path(), &CsvOptions::default()) {
            Err(Error::InputFormat { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_numeric_cell_names_location() {
        let f = write_tmp("1,2\n3,abc\n");
        match load_csv_matrix(f.path(), &CsvOptions::default()) {
            Err(Error::InputFormat { line, column, .. }) => assert_eq!((line, column), (2, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        let r = load_csv_matrix("/definitely/not/here.csv", &CsvOptions::default());
        assert!(matches!(r, Err(Error::Io { .. })));
    }

    #[test]
    fn blobs_tight_pairs() {
        let d = gen_blobs(4, 2, 1, 0.01, 7).unwrap();
        assert_eq!(d.labels, Some(vec![0, 0, 1, 1]));
        let x = |i: usize| d.features[(i, 0)];
        assert!((x(0) - x(1)).abs() < (x(0) - x(2)).abs());
        assert!((x(2) - x(3)).abs() < (x(1) - x(3)).abs());
    }

    #[test]
    fn blobs_are_deterministic_and_balanced() {
        let a = gen_blobs(200, 5, 3, 0.5, 42).unwrap();
        let b = gen_blobs(200, 5, 3, 0.5, 42).unwrap();
        assert_eq!(a, b);
        let labels = a.labels.unwrap();
        for j in 0..5 {
            assert_eq!(labels.iter().filter(|&&l| l == j).count(), 40);
        }
        let uneven = gen_blobs(7, 3, 2, 1.0, 1).unwrap().labels.unwrap();
        let sizes: Vec<usize> = (0..3)
            .map(|j| uneven.iter().filter(|&&l| l == j).count())
            .collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn blobs_reject_bad_sizes() {
        assert!(gen_blobs(1, 2, 1, 1.0, 0).is_err());
        assert!(gen_blobs(4, 1, 1, 1.0, 0).is_err());
        assert!(gen_blobs(4, 2, 0, 1.0, 0).is_err());
        assert!(gen_blobs(4, 2, 1, 0.0, 0).is_err());
    }

    #[test]
    fn random_graph_shape_and_determinism() {
        let spec = RandomGraphSpec { n: 3, seed: 9 };
        let s = gen_random_graph(&spec).unwrap();
        assert_eq!(s.shape(), (3, 3));
        for i in 0..3 {
            assert_eq!(s[(i, i)], 0.0);
            for j in 0..3 {
                assert_eq!(s[(i, j)], s[(j, i)]);
            }
        }
        assert_eq!(s, gen_random_graph(&spec).unwrap());
        assert!(gen_random_graph(&RandomGraphSpec { n: 2, seed: 0 }).is_err());
    }

    #[test]
    fn random_graph_entries_in_unit_interval() {
        for seed in 0..1000 {
            let s = gen_random_graph(&RandomGraphSpec { n: 4, seed }).unwrap();
            assert!(s.iter().all(|&x| (0.0..1.0).contains(&x)));
        }
    }
}
