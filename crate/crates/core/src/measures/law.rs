use super::{DiscreteMeasure, GaussianParams, GridDensity};
use crate::error::{LabError, Result};

/// Any of the supported representations of a probability measure on R^d.
#[derive(Debug, Clone, PartialEq)]
pub enum Law {
    Gaussian(GaussianParams),
    Grid(GridDensity),
    Discrete(DiscreteMeasure),
    /// Product of one-dimensional laws, one per coordinate.
    Product(Vec<Law>),
}

impl Law {
    pub fn product(factors: Vec<Law>) -> Result<Self> {
        if factors.is_empty() {
            return Err(LabError::InvalidMeasure("empty product".into()));
        }
        if let Some(f) = factors
            .iter()
            .find(|f| f.dim() != 1 || matches!(f, Law::Product(_)))
        {
            return Err(LabError::InvalidMeasure(format!(
                "product factor of dimension {}",
                f.dim()
            )));
        }
        Ok(Law::Product(factors))
    }

    pub fn dim(&self) -> usize {
        match self {
            Law::Gaussian(g) => g.dim(),
            Law::Grid(g) => g.dim(),
            Law::Discrete(m) => m.dim(),
            Law::Product(fs) => fs.len(),
        }
    }

    pub fn barycenter(&self) -> Vec<f64> {
        match self {
            Law::Gaussian(g) => g.mean().iter().cloned().collect(),
            Law::Grid(g) => g.barycenter(),
            Law::Discrete(m) => m.barycenter(),
            Law::Product(fs) => fs.iter().map(|f| f.barycenter()[0]).collect(),
        }
    }

    pub fn second_moment(&self) -> f64 {
        match self {
            Law::Gaussian(g) => g.second_moment(),
            Law::Grid(g) => g.second_moment(),
            Law::Discrete(m) => m.second_moment(),
            Law::Product(fs) => fs.iter().map(|f| f.second_moment()).sum(),
        }
    }

    pub fn is_centered(&self, tol: f64) -> bool {
        super::density::norm(&self.barycenter()) <= tol
    }

    pub fn is_grid_based(&self) -> bool {
        match self {
            Law::Grid(_) => true,
            Law::Product(fs) => fs.iter().any(|f| f.is_grid_based()),
            _ => false,
        }
    }
}

impl From<GaussianParams> for Law {
    fn from(g: GaussianParams) -> Self {
        Law::Gaussian(g)
    }
}

impl From<GridDensity> for Law {
    fn from(g: GridDensity) -> Self {
        Law::Grid(g)
    }
}

impl From<DiscreteMeasure> for Law {
    fn from(m: DiscreteMeasure) -> Self {
        Law::Discrete(m)
    }
}
