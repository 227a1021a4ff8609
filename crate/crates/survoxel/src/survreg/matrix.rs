//! Rectangular feature matrix with named, uniquely-ordered columns.

use std::collections::HashSet;

use super::RegressionError;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    names: Vec<String>,
    rows: usize,
    data: Vec<f64>, // row-major
}

impl FeatureMatrix {
    pub fn new(
        names: Vec<String>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self, RegressionError> {
        let cols = names.len();
        let mut seen = HashSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(RegressionError::DuplicateColumn(n.clone()));
            }
        }
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in &rows {
            if r.len() != cols {
                return Err(RegressionError::RaggedRow {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            names,
            rows: rows.len(),
            data,
        })
    }

    pub fn from_flat(
        names: Vec<String>,
        rows: usize,
        data: Vec<f64>,
    ) -> Result<Self, RegressionError> {
        if data.len() != rows * names.len() {
            return Err(RegressionError::RaggedRow {
                expected: rows * names.len(),
                got: data.len(),
            });
        }
        let mut seen = HashSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(RegressionError::DuplicateColumn(n.clone()));
            }
        }
        Ok(Self { names, rows, data })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.names.len()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols() + col]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let c = self.cols();
        &self.data[r * c..(r + 1) * c]
    }

    pub fn column(&self, c: usize) -> impl Iterator<Item = f64> + '_ {
        let cols = self.cols();
        self.data.iter().skip(c).step_by(cols).copied()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// New matrix holding the named columns (in the requested order).
    pub fn select(&self, names: &[String]) -> Result<FeatureMatrix, RegressionError> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.column_index(n)
                    .ok_or_else(|| RegressionError::MissingColumn(n.clone()))
            })
            .collect::<Result<_, _>>()?;
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for r in 0..self.rows {
            let row = self.row(r);
            data.extend(idx.iter().map(|&i| row[i]));
        }
        FeatureMatrix::from_flat(names.to_vec(), self.rows, data)
    }

    /// Appends the columns of `other` (same row count) on the right.
    pub fn hstack(&self, other: &FeatureMatrix) -> Result<FeatureMatrix, RegressionError> {
        if self.rows != other.rows {
            return Err(RegressionError::LengthMismatch(self.rows, other.rows));
        }
        let mut names = self.names.clone();
        names.extend(other.names.iter().cloned());
        let mut data = Vec::with_capacity((self.cols() + other.cols()) * self.rows);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        FeatureMatrix::from_flat(names, self.rows, data)
    }
}
