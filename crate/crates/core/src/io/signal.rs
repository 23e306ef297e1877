use ndarray::Array2;

use crate::error::{Error, Result};

/// `M` samples (rows) of `N` node signals (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct SignalMatrix {
    values: Array2<f64>,
    node_names: Option<Vec<String>>,
}

impl SignalMatrix {
    pub fn new(values: Array2<f64>, node_names: Option<Vec<String>>) -> Result<Self> {
        if let Some(((row, col), _)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { row, col });
        }
        if let Some(names) = &node_names {
            if names.len() != values.ncols() {
                return Err(Error::DimensionMismatch {
                    expected: values.ncols(),
                    found: names.len(),
                });
            }
        }
        Ok(Self { values, node_names })
    }

    /// Sample count `M`.
    pub fn m(&self) -> usize {
        self.values.nrows()
    }

    /// Node count `N`.
    pub fn n(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn node_names(&self) -> Option<&[String]> {
        self.node_names.as_deref()
    }

    /// Column labels, falling back to `node_{k}`.
    pub fn names_or_default(&self) -> Vec<String> {
        match &self.node_names {
            Some(names) => names.clone(),
            None => super::default_node_names(self.n()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn validates_values_and_names() {
        assert!(SignalMatrix::new(array![[1.0, f64::NAN]], None).is_err());
        assert!(SignalMatrix::new(array![[1.0, 2.0]], Some(vec!["a".into()])).is_err());
        let s = SignalMatrix::new(array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]], None).unwrap();
        assert_eq!((s.m(), s.n()), (3, 2));
        assert_eq!(s.names_or_default(), vec!["node_0", "node_1"]);
    }
}
