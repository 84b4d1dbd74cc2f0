use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Per-instance latent vectors grouped by category, uniform dimensionality.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentEmbeddingSet {
    dim: usize,
    by_category: BTreeMap<String, Vec<Vec<f64>>>,
}

impl LatentEmbeddingSet {
    pub fn new(by_category: BTreeMap<String, Vec<Vec<f64>>>) -> Result<Self> {
        let mut dim = None;
        for (category, vectors) in &by_category {
            if vectors.is_empty() {
                return Err(Error::EmptyInput {
                    what: format!("no embeddings for category '{category}'"),
                });
            }
            for v in vectors {
                match dim {
                    None => dim = Some(v.len()),
                    Some(d) if d != v.len() => {
                        return Err(Error::DimensionMismatch {
                            detail: format!(
                                "embedding of dimension {} in '{category}' (expected {d})",
                                v.len()
                            ),
                        })
                    }
                    _ => {}
                }
            }
        }
        let dim = dim.ok_or(Error::EmptyInput { what: "no embeddings at all".into() })?;
        if dim == 0 {
            return Err(Error::EmptyInput { what: "zero-dimensional embeddings".into() });
        }
        Ok(LatentEmbeddingSet { dim, by_category })
    }

    /// CSV rows: category,v0,...,v(n−1).
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut by_category: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let category = fields
                .next()
                .filter(|c| !c.is_empty())
                .ok_or(Error::CsvParse { line: idx + 1, message: "missing category".into() })?;
            let vector: Vec<f64> = fields
                .map(|f| {
                    f.trim().parse::<f64>().map_err(|_| Error::CsvParse {
                        line: idx + 1,
                        message: format!("invalid number '{f}'"),
                    })
                })
                .collect::<Result<_>>()?;
            if vector.is_empty() {
                return Err(Error::CsvParse { line: idx + 1, message: "no vector values".into() });
            }
            by_category.entry(category.to_string()).or_default().push(vector);
        }
        Self::new(by_category)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn categories(&self) -> impl Iterator<Item = &str> {
        self.by_category.keys().map(String::as_str)
    }

    pub fn vectors(&self, category: &str) -> Option<&[Vec<f64>]> {
        self.by_category.get(category).map(Vec::as_slice)
    }
}

/// Component-wise mean of a category's latent embeddings.
pub fn mean_embedding(set: &LatentEmbeddingSet, category: &str) -> Result<Vec<f64>> {
    let vectors = set
        .vectors(category)
        .ok_or_else(|| Error::UnknownCategory { name: category.to_string() })?;
    let mut mean = vec![0.0; set.dim()];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    let n = vectors.len() as f64;
    for m in &mut mean {
        *m /= n;
    }
    Ok(mean)
}
