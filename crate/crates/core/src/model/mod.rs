//! Alphabets, exact distortion matrices and symmetric source-distortion pairs.
//!
//! A [`SymmetricPair`] is the object everything else in the crate is built
//! on. It bundles a square distortion matrix with exact rational entries and
//! certifies four properties:
//!
//! * every row is a permutation of every other row, and likewise for columns;
//! * the source is uniform (implicit, nothing is stored);
//! * no column is identically zero, so the per-letter variance `σ²` is positive;
//! * every row contains a zero, so a zero-distortion reconstruction exists.
//!
//! All distortions are held as exact rationals together with a common
//! denominator `Q`, so that `Q·d(x, y)` is an integer. The exact dynamic
//! programs in [`crate::exactdist`] run on that integer grid.

mod pairfile;
mod tilt;

pub use pairfile::{parse_pair_json, read_pair_file, PairFile, PairFileError};
pub use tilt::{
    tilted_channel, tilted_letter, tilted_mean, tilted_source, TiltedChannel, TiltedLetter,
    TiltedSourceDistribution, LAMBDA_CAP,
};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::numeric::rational_to_f64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("distortion matrix is empty")]
    Empty,
    #[error("row {row} has {len} entries, expected {expected}")]
    Ragged {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("distortion matrix is {rows}x{cols}, expected square")]
    NonSquare { rows: usize, cols: usize },
    #[error("negative distortion at ({x}, {y})")]
    NegativeEntry { x: usize, y: usize },
    #[error("common denominator of the distortion entries exceeds 64 bits")]
    DenominatorTooLarge,
    #[error("column {0} is identically zero")]
    ZeroColumn(usize),
    #[error("{axis} {index} is not a permutation of {axis} 0")]
    NotPermutationSymmetric { axis: &'static str, index: usize },
    #[error("row {0} has no zero-distortion entry")]
    NoZeroInRow(usize),
    #[error("source has length {source_len}, reconstruction has length {reconstruction_len}")]
    LengthMismatch {
        source_len: usize,
        reconstruction_len: usize,
    },
    #[error("empty block")]
    EmptyBlock,
    #[error("symbol {symbol} at position {position} is outside an alphabet of size {size}")]
    SymbolOutOfRange {
        position: usize,
        symbol: usize,
        size: usize,
    },
}

/// A finite distortion matrix with exact, non-negative rational entries.
///
/// Rows index source symbols, columns index reconstruction symbols. The
/// matrix need not be square; the symmetric validator checks that.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistortionMatrix {
    entries: Vec<Vec<BigRational>>,
    scale: u64,
    scaled: Vec<Vec<u64>>,
    d_max: BigRational,
}

impl DistortionMatrix {
    pub fn new(rows: Vec<Vec<BigRational>>) -> Result<Self, ModelError> {
        let cols = rows.first().map(Vec::len).ok_or(ModelError::Empty)?;
        if cols == 0 {
            return Err(ModelError::Empty);
        }
        let mut denom = BigInt::one();
        for (x, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(ModelError::Ragged {
                    row: x,
                    len: row.len(),
                    expected: cols,
                });
            }
            for (y, v) in row.iter().enumerate() {
                if v.is_negative() {
                    return Err(ModelError::NegativeEntry { x, y });
                }
                denom = denom.lcm(v.denom());
            }
        }
        let scale = denom.to_u64().ok_or(ModelError::DenominatorTooLarge)?;
        let q = BigRational::from_integer(denom);
        let scaled = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| {
                        (v * &q)
                            .to_integer()
                            .to_u64()
                            .ok_or(ModelError::DenominatorTooLarge)
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let d_max = rows.iter().flatten().max().cloned().expect("non-empty");
        Ok(Self {
            entries: rows,
            scale,
            scaled,
            d_max,
        })
    }

    /// Builds a matrix from integer distortions (common denominator 1).
    pub fn from_integers<R: AsRef<[u64]>>(rows: &[R]) -> Result<Self, ModelError> {
        Self::new(
            rows.iter()
                .map(|r| {
                    r.as_ref()
                        .iter()
                        .map(|&v| BigRational::from_integer(v.into()))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.entries[0].len()
    }

    pub fn entry(&self, x: usize, y: usize) -> &BigRational {
        &self.entries[x][y]
    }

    pub fn entries(&self) -> &[Vec<BigRational>] {
        &self.entries
    }

    /// The common denominator `Q`.
    pub fn scale(&self) -> u64 {
        self.scale
    }

    /// `Q·d(x, y)` as an integer.
    pub fn scaled(&self, x: usize, y: usize) -> u64 {
        self.scaled[x][y]
    }

    pub fn scaled_row(&self, x: usize) -> &[u64] {
        &self.scaled[x]
    }

    pub fn scaled_column(&self, y: usize) -> Vec<u64> {
        self.scaled.iter().map(|row| row[y]).collect()
    }

    /// Largest entry. Every distortion lies in `[0, d_max]`.
    pub fn d_max(&self) -> &BigRational {
        &self.d_max
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.entries
            .iter()
            .map(|row| row.iter().map(rational_to_f64).collect())
            .collect()
    }
}

/// A validated symmetric source-distortion pair with uniform source.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricPair {
    name: Option<String>,
    matrix: DistortionMatrix,
    d_star: BigRational,
    sigma2: BigRational,
    /// Row 0 as floats; the same multiset as every other row and column.
    letter: Vec<f64>,
    fingerprint: [u8; 32],
}

/// Validates a raw rational matrix as a symmetric pair.
pub fn validate_pair(rows: Vec<Vec<BigRational>>) -> Result<SymmetricPair, ModelError> {
    SymmetricPair::new(DistortionMatrix::new(rows)?)
}

fn sorted(mut v: Vec<u64>) -> Vec<u64> {
    v.sort_unstable();
    v
}

impl SymmetricPair {
    pub fn new(matrix: DistortionMatrix) -> Result<Self, ModelError> {
        let k = matrix.rows();
        if matrix.cols() != k {
            return Err(ModelError::NonSquare {
                rows: k,
                cols: matrix.cols(),
            });
        }
        for y in 0..k {
            if matrix.scaled_column(y).iter().all(|&v| v == 0) {
                return Err(ModelError::ZeroColumn(y));
            }
        }
        let row0 = sorted(matrix.scaled_row(0).to_vec());
        for x in 1..k {
            if sorted(matrix.scaled_row(x).to_vec()) != row0 {
                return Err(ModelError::NotPermutationSymmetric {
                    axis: "row",
                    index: x,
                });
            }
        }
        let col0 = sorted(matrix.scaled_column(0));
        for y in 1..k {
            if sorted(matrix.scaled_column(y)) != col0 {
                return Err(ModelError::NotPermutationSymmetric {
                    axis: "column",
                    index: y,
                });
            }
        }
        for x in 0..k {
            if !matrix.scaled_row(x).contains(&0) {
                return Err(ModelError::NoZeroInRow(x));
            }
        }

        // Moments of one column under the uniform source, exactly.
        let q = BigInt::from(matrix.scale());
        let kk = BigInt::from(k);
        let sum: BigInt = col0.iter().map(|&v| BigInt::from(v)).sum();
        let sum_sq: BigInt = col0
            .iter()
            .map(|&v| BigInt::from(v) * BigInt::from(v))
            .sum();
        let d_star = BigRational::new(sum.clone(), &kk * &q);
        let sigma2 = BigRational::new(&kk * sum_sq - &sum * &sum, &kk * &kk * &q * &q);
        debug_assert!(sigma2 > BigRational::zero());

        let letter = matrix.entries()[0].iter().map(rational_to_f64).collect();
        let fingerprint = fingerprint(&matrix);
        Ok(Self {
            name: None,
            matrix,
            d_star,
            sigma2,
            letter,
            fingerprint,
        })
    }

    /// Validates a matrix of integer distortions.
    pub fn from_integers<R: AsRef<[u64]>>(rows: &[R]) -> Result<Self, ModelError> {
        Self::new(DistortionMatrix::from_integers(rows)?)
    }

    /// Hamming distortion on an alphabet of `k ≥ 2` symbols.
    pub fn hamming(k: usize) -> Self {
        assert!(k >= 2, "Hamming pair needs at least two symbols");
        let rows: Vec<Vec<u64>> = (0..k)
            .map(|x| (0..k).map(|y| u64::from(x != y)).collect())
            .collect();
        Self::from_integers(&rows)
            .expect("Hamming is symmetric")
            .with_name(format!("hamming-{k}"))
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// `|X| = |Y|`.
    pub fn size(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &DistortionMatrix {
        &self.matrix
    }

    pub fn scale(&self) -> u64 {
        self.matrix.scale()
    }

    /// Cutoff distortion `D* = E[d(X, y)]`, the same for every `y`.
    pub fn d_star(&self) -> &BigRational {
        &self.d_star
    }

    /// `σ² = Var[d(X, y)]` under the uniform source.
    pub fn sigma2(&self) -> &BigRational {
        &self.sigma2
    }

    pub fn d_max(&self) -> &BigRational {
        self.matrix.d_max()
    }

    pub fn d_star_f64(&self) -> f64 {
        rational_to_f64(&self.d_star)
    }

    pub fn sigma2_f64(&self) -> f64 {
        rational_to_f64(&self.sigma2)
    }

    pub fn d_max_f64(&self) -> f64 {
        rational_to_f64(self.d_max())
    }

    /// The per-letter distortion values of one row. Under a uniform
    /// reconstruction symbol these are equally likely, for every source letter.
    pub fn letter_values(&self) -> &[f64] {
        &self.letter
    }

    /// Sorted `Q·d` values of one row.
    pub fn scaled_letter(&self) -> Vec<u64> {
        sorted(self.matrix.scaled_row(0).to_vec())
    }

    /// SHA-256 over a canonical rendering of the scaled matrix.
    pub fn fingerprint(&self) -> [u8; 32] {
        self.fingerprint
    }
}

fn fingerprint(matrix: &DistortionMatrix) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update((matrix.rows() as u64).to_le_bytes());
    h.update(matrix.scale().to_le_bytes());
    for x in 0..matrix.rows() {
        for &v in matrix.scaled_row(x) {
            h.update(v.to_le_bytes());
        }
    }
    h.finalize().into()
}

fn check_block(x: &[usize], y: &[usize], size: usize) -> Result<(), ModelError> {
    if x.len() != y.len() {
        return Err(ModelError::LengthMismatch {
            source_len: x.len(),
            reconstruction_len: y.len(),
        });
    }
    if x.is_empty() {
        return Err(ModelError::EmptyBlock);
    }
    for (position, &symbol) in x.iter().chain(y.iter()).enumerate() {
        if symbol >= size {
            return Err(ModelError::SymbolOutOfRange {
                position: position % x.len(),
                symbol,
                size,
            });
        }
    }
    Ok(())
}

/// `Σ Q·d(x_i, y_i)`, the integer block distortion on the grid.
pub fn block_distortion_scaled(
    source: &[usize],
    reconstruction: &[usize],
    pair: &SymmetricPair,
) -> Result<u64, ModelError> {
    check_block(source, reconstruction, pair.size())?;
    let m = pair.matrix();
    Ok(source
        .iter()
        .zip(reconstruction)
        .map(|(&x, &y)| m.scaled(x, y))
        .sum())
}

/// Average distortion `(1/n) Σ d(x_i, y_i)`, exactly.
pub fn block_distortion(
    source: &[usize],
    reconstruction: &[usize],
    pair: &SymmetricPair,
) -> Result<BigRational, ModelError> {
    let total = block_distortion_scaled(source, reconstruction, pair)?;
    let denom = BigUint::from(pair.scale()) * BigUint::from(source.len());
    Ok(BigRational::new(BigInt::from(total), BigInt::from(denom)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn binary_hamming_moments() {
        let pair = SymmetricPair::hamming(2);
        assert_eq!(pair.sigma2(), &r(1, 4));
        assert_eq!(pair.d_star(), &r(1, 2));
        assert_eq!(pair.d_max(), &r(1, 1));
        assert_eq!(pair.scale(), 1);
    }

    #[test]
    fn ternary_hamming_cutoff() {
        let pair = SymmetricPair::hamming(3);
        assert_eq!(pair.d_star(), &r(2, 3));
        assert_eq!(pair.sigma2(), &r(2, 9));
    }

    #[test]
    fn zero_column_rejected() {
        let err = SymmetricPair::from_integers(&[[0u64, 1], [0, 1]]).unwrap_err();
        assert_eq!(err, ModelError::ZeroColumn(0));
    }

    #[test]
    fn non_square_rejected() {
        let err = SymmetricPair::from_integers(&[vec![0u64, 1, 1], vec![1, 0, 1]]).unwrap_err();
        assert_eq!(err, ModelError::NonSquare { rows: 2, cols: 3 });
    }

    #[test]
    fn asymmetric_rows_rejected() {
        let rows = vec![vec![r(0, 1), r(1, 1)], vec![r(1, 1), r(1, 1_000_000_000)]];
        let err = validate_pair(rows).unwrap_err();
        assert_eq!(
            err,
            ModelError::NotPermutationSymmetric {
                axis: "row",
                index: 1
            }
        );
    }

    #[test]
    fn asymmetric_columns_rejected() {
        // Rows are permutations of each other but the columns are not.
        let err = SymmetricPair::from_integers(&[[0u64, 1, 2], [0, 2, 1], [1, 0, 2]]).unwrap_err();
        assert_eq!(
            err,
            ModelError::NotPermutationSymmetric {
                axis: "column",
                index: 1
            }
        );
    }

    #[test]
    fn row_without_zero_rejected() {
        let err = SymmetricPair::from_integers(&[[1u64, 2], [2, 1]]).unwrap_err();
        assert_eq!(err, ModelError::NoZeroInRow(0));
    }

    #[test]
    fn negative_entry_rejected() {
        let err =
            validate_pair(vec![vec![r(0, 1), r(-1, 2)], vec![r(-1, 2), r(0, 1)]]).unwrap_err();
        assert_eq!(err, ModelError::NegativeEntry { x: 0, y: 1 });
    }

    #[test]
    fn rational_entries_share_a_grid() {
        let pair = validate_pair(vec![
            vec![r(0, 1), r(1, 2), r(1, 3)],
            vec![r(1, 3), r(0, 1), r(1, 2)],
            vec![r(1, 2), r(1, 3), r(0, 1)],
        ])
        .unwrap();
        assert_eq!(pair.scale(), 6);
        assert_eq!(pair.scaled_letter(), vec![0, 2, 3]);
        assert_eq!(pair.d_star(), &r(5, 18));
    }

    #[test]
    fn block_distortion_examples() {
        let bin = SymmetricPair::hamming(2);
        assert_eq!(
            block_distortion(&[0, 1, 1, 0], &[0, 1, 1, 0], &bin).unwrap(),
            r(0, 1)
        );
        assert_eq!(
            block_distortion(&[0, 1, 1, 0], &[0, 0, 1, 0], &bin).unwrap(),
            r(1, 4)
        );
        let ter = SymmetricPair::hamming(3);
        assert_eq!(
            block_distortion(&[0, 1, 2], &[0, 2, 1], &ter).unwrap(),
            r(2, 3)
        );
    }

    #[test]
    fn block_distortion_errors() {
        let bin = SymmetricPair::hamming(2);
        assert!(matches!(
            block_distortion(&[0, 1], &[0], &bin),
            Err(ModelError::LengthMismatch { .. })
        ));
        assert!(matches!(
            block_distortion(&[0, 2], &[0, 1], &bin),
            Err(ModelError::SymbolOutOfRange {
                position: 1,
                symbol: 2,
                size: 2
            })
        ));
    }

    #[test]
    fn fingerprint_tracks_content() {
        assert_eq!(
            SymmetricPair::hamming(2).fingerprint(),
            SymmetricPair::hamming(2).fingerprint()
        );
        assert_ne!(
            SymmetricPair::hamming(2).fingerprint(),
            SymmetricPair::hamming(3).fingerprint()
        );
    }
}
