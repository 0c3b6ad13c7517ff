use crate::error::{Error, Result};
use crate::C64;
use serde::{Deserialize, Serialize};

const NORM_TOL: f64 = 1e-10;
const UNIFORM_TOL: f64 = 1e-9;

/// A wavefunction sampled on a uniform grid, normalised so that
/// `Σ_i |ψ_i|² = 1` (the grid spacing is folded into the amplitudes).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridWavepacket {
    points: Vec<f64>,
    amplitudes: Vec<C64>,
    sigma: f64,
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn uniform_grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

impl GridWavepacket {
    pub fn new(points: Vec<f64>, amplitudes: Vec<C64>, sigma: f64) -> Result<Self> {
        if points.is_empty() || points.len() != amplitudes.len() {
            return Err(Error::Dimension(format!(
                "{} grid points for {} amplitudes",
                points.len(),
                amplitudes.len()
            )));
        }
        if points.iter().any(|x| !x.is_finite()) || amplitudes.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::Parameter("grid and amplitudes must be finite".into()));
        }
        if points.len() > 1 {
            let h = points[1] - points[0];
            let scale = points.iter().fold(h.abs(), |m, x| m.max(x.abs()));
            let uniform = h > 0.0
                && points
                    .windows(2)
                    .all(|w| ((w[1] - w[0]) - h).abs() <= UNIFORM_TOL * scale);
            if !uniform {
                return Err(Error::Parameter("grid must be increasing and uniform".into()));
            }
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Normalization(format!("wavepacket has discrete norm² {norm}")));
        }
        Ok(Self {
            points,
            amplitudes,
            sigma,
        })
    }

    /// Gaussian with probability-density spread `sigma`, centred at
    /// `center` and carrying mean wavenumber `momentum`.
    pub fn gaussian(n: usize, lo: f64, hi: f64, center: f64, sigma: f64, momentum: f64) -> Result<Self> {
        if n == 0 || !(sigma > 0.0) || !(hi > lo) {
            return Err(Error::Parameter("need points, a positive spread and lo < hi".into()));
        }
        let points = uniform_grid(n, lo, hi);
        let raw: Vec<C64> = points
            .iter()
            .map(|&x| C64::from_polar((-(x - center).powi(2) / (4.0 * sigma * sigma)).exp(), momentum * x))
            .collect();
        let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::Parameter("packet lies entirely outside the grid".into()));
        }
        Self::new(points, raw.into_iter().map(|a| a / norm).collect(), sigma)
    }

    /// A single sharp value.
    pub fn point(value: f64) -> Result<Self> {
        Self::new(vec![value], vec![C64::new(1.0, 0.0)], 0.0)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Grid spacing; zero for a single point.
    pub fn spacing(&self) -> f64 {
        if self.points.len() < 2 {
            0.0
        } else {
            (self.points[self.points.len() - 1] - self.points[0]) / (self.points.len() - 1) as f64
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn mean(&self) -> f64 {
        self.points.iter().zip(&self.amplitudes).map(|(x, a)| x * a.norm_sqr()).sum()
    }

    pub fn std(&self) -> f64 {
        let m = self.mean();
        let var: f64 = self
            .points
            .iter()
            .zip(&self.amplitudes)
            .map(|(x, a)| (x - m).powi(2) * a.norm_sqr())
            .sum();
        var.max(0.0).sqrt()
    }

    /// Index of the grid point closest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let mut best = 0;
        for (i, p) in self.points.iter().enumerate() {
            if (p - x).abs() < (self.points[best] - x).abs() {
                best = i;
            }
        }
        best
    }

    /// Largest probability on the two outermost points, a proxy for mass
    /// lost past the grid edges.
    pub fn edge_probability(&self) -> f64 {
        let p = self.probabilities();
        p[0].max(p[p.len() - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_moments() {
        let g = GridWavepacket::gaussian(512, -20.0, 20.0, 1.5, 1.2, 0.7).unwrap();
        assert!((g.mean() - 1.5).abs() < 1e-10);
        assert!((g.std() - 1.2).abs() < 1e-10);
        assert!(g.edge_probability() < 1e-20);
    }

    #[test]
    fn rejects_non_uniform_grid() {
        let a = vec![C64::new(0.5f64.sqrt(), 0.0); 2];
        assert!(GridWavepacket::new(vec![0.0, 1.0], a.clone(), 1.0).is_ok());
        let b = vec![C64::new(3f64.sqrt().recip(), 0.0); 3];
        assert!(GridWavepacket::new(vec![0.0, 1.0, 3.0], b, 1.0).is_err());
        assert!(GridWavepacket::new(vec![0.0, 1.0], vec![C64::new(1.0, 0.0); 2], 1.0).is_err());
    }

    #[test]
    fn nearest_point() {
        let g = GridWavepacket::gaussian(5, -2.0, 2.0, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(g.nearest(0.9), 3);
        assert_eq!(g.nearest(-7.0), 0);
    }
}
