//! The JSON pair-definition file.
//!
//! ```json
//! {
//!   "name": "binary-hamming",
//!   "alphabet": ["0", "1"],
//!   "distortion": [["0", "1"], ["1", "0"]]
//! }
//! ```
//!
//! `alphabet` is either a list of symbol labels or just the alphabet size.
//! Distortion entries are integers or strings `"p"` / `"p/q"`; floats are
//! rejected so that no value ever passes through binary floating point.

use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ModelError, SymmetricPair};

#[derive(Debug, Error)]
pub enum PairFileError {
    #[error("reading pair file: {0}")]
    Io(#[from] std::io::Error),
    #[error("pair file is not valid JSON for the pair schema: {0}")]
    Json(#[from] serde_json::Error),
    #[error("entry ({x}, {y}) = {text:?} is not an integer or \"p/q\" rational")]
    BadEntry { x: usize, y: usize, text: String },
    #[error("alphabet has {alphabet} symbols but the matrix has {rows} rows")]
    AlphabetMismatch { alphabet: usize, rows: usize },
    #[error(transparent)]
    Invalid(#[from] ModelError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Alphabet {
    Size(usize),
    Labels(Vec<String>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Integer(i64),
    Text(String),
}

/// Raw, unvalidated contents of a pair file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub alphabet: Alphabet,
    pub distortion: Vec<Vec<Entry>>,
}

impl PairFile {
    /// Symbol labels; defaults to `0..k` when only a size was given.
    pub fn labels(&self) -> Vec<String> {
        match &self.alphabet {
            Alphabet::Size(k) => (0..*k).map(|i| i.to_string()).collect(),
            Alphabet::Labels(l) => l.clone(),
        }
    }

    pub fn rational_rows(&self) -> Result<Vec<Vec<BigRational>>, PairFileError> {
        self.distortion
            .iter()
            .enumerate()
            .map(|(x, row)| {
                row.iter()
                    .enumerate()
                    .map(|(y, e)| match e {
                        Entry::Integer(v) => Ok(BigRational::from_integer(BigInt::from(*v))),
                        Entry::Text(t) => {
                            BigRational::from_str(t.trim()).map_err(|_| PairFileError::BadEntry {
                                x,
                                y,
                                text: t.clone(),
                            })
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub fn into_pair(self) -> Result<SymmetricPair, PairFileError> {
        let k = self.labels().len();
        if k != self.distortion.len() {
            return Err(PairFileError::AlphabetMismatch {
                alphabet: k,
                rows: self.distortion.len(),
            });
        }
        let pair = super::validate_pair(self.rational_rows()?)?;
        Ok(match self.name {
            Some(name) => pair.with_name(name),
            None => pair,
        })
    }
}

pub fn parse_pair_json(text: &str) -> Result<(PairFile, SymmetricPair), PairFileError> {
    let file: PairFile = serde_json::from_str(text)?;
    let pair = file.clone().into_pair()?;
    Ok((file, pair))
}

pub fn read_pair_file(path: impl AsRef<Path>) -> Result<(PairFile, SymmetricPair), PairFileError> {
    parse_pair_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_mixed_entries() {
        let (file, pair) = parse_pair_json(
            r#"{"name":"tri","alphabet":3,"distortion":[[0,"1/2","1/2"],["1/2",0,"1/2"],["1/2","1/2","0"]]}"#,
        )
        .unwrap();
        assert_eq!(file.labels(), vec!["0", "1", "2"]);
        assert_eq!(pair.scale(), 2);
        assert_eq!(pair.name(), Some("tri"));
    }

    #[test]
    fn rejects_float_entries() {
        let err = parse_pair_json(r#"{"alphabet":2,"distortion":[[0,0.5],[0.5,0]]}"#).unwrap_err();
        assert!(matches!(err, PairFileError::Json(_)));
        let err =
            parse_pair_json(r#"{"alphabet":2,"distortion":[[0,"0.5"],["0.5",0]]}"#).unwrap_err();
        assert!(matches!(err, PairFileError::BadEntry { x: 0, y: 1, .. }));
    }

    #[test]
    fn rejects_alphabet_mismatch() {
        let err = parse_pair_json(r#"{"alphabet":["a","b","c"],"distortion":[[0,1],[1,0]]}"#)
            .unwrap_err();
        assert!(matches!(
            err,
            PairFileError::AlphabetMismatch {
                alphabet: 3,
                rows: 2
            }
        ));
    }

    #[test]
    fn surfaces_validation_errors() {
        let err = parse_pair_json(r#"{"alphabet":2,"distortion":[[0,1],[0,1]]}"#).unwrap_err();
        assert!(matches!(
            err,
            PairFileError::Invalid(ModelError::ZeroColumn(0))
        ));
    }
}
