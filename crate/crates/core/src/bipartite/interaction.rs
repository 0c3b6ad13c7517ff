use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Interaction diagonal in a product basis: level `h_αβ` on `|α⟩|β⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableInteraction {
    dim_o: usize,
    dim_a: usize,
    levels: Vec<f64>,
}

impl SeparableInteraction {
    /// `levels` is row-major: `levels[α * dim_a + β] = h_αβ`.
    pub fn new(dim_o: usize, dim_a: usize, levels: Vec<f64>) -> Result<Self> {
        if dim_o == 0 || dim_a == 0 {
            return Err(Error::Dimension("interaction factors must be non-empty".into()));
        }
        if levels.len() != dim_o * dim_a {
            return Err(Error::Dimension(format!(
                "{} levels for a {dim_o}x{dim_a} interaction",
                levels.len()
            )));
        }
        if levels.iter().any(|h| !h.is_finite()) {
            return Err(Error::Parameter("interaction levels must be finite".into()));
        }
        Ok(Self {
            dim_o,
            dim_a,
            levels,
        })
    }

    pub fn from_fn(dim_o: usize, dim_a: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let levels = (0..dim_o)
            .flat_map(|a| (0..dim_a).map(move |b| (a, b)))
            .map(|(a, b)| f(a, b))
            .collect();
        Self::new(dim_o, dim_a, levels)
    }

    /// `h_αβ = x_α g_β`.
    pub fn product(object: &[f64], apparatus: &[f64]) -> Result<Self> {
        Self::from_fn(object.len(), apparatus.len(), |a, b| object[a] * apparatus[b])
    }

    pub fn dim_o(&self) -> usize {
        self.dim_o
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn level(&self, alpha: usize, beta: usize) -> f64 {
        self.levels[alpha * self.dim_a + beta]
    }

    pub fn row(&self, alpha: usize) -> &[f64] {
        &self.levels[alpha * self.dim_a..(alpha + 1) * self.dim_a]
    }

    /// All levels in `(α, β)` row-major order.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_form_layout() {
        let h = SeparableInteraction::product(&[0.5, -0.5], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(h.level(1, 2), -1.5);
        assert_eq!(h.row(0), &[0.5, 1.0, 1.5]);
    }

    #[test]
    fn rejects_wrong_length() {
        assert!(SeparableInteraction::new(2, 2, vec![0.0; 3]).is_err());
    }
}
