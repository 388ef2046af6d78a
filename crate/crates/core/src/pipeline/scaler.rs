use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-feature MinMax scaling to [0, 1], fitted on training rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    /// Clamp transformed values into [0, 1].
    pub clamp: bool,
}

impl MinMaxScaler {
    pub fn fit(xs: &[Vec<f64>]) -> Result<Self> {
        let first = xs.first().ok_or_else(|| Error::Size("cannot fit a scaler on no rows".into()))?;
        let mut min = first.clone();
        let mut max = first.clone();
        for x in xs {
            if x.len() != min.len() {
                return Err(Error::Dimension("ragged feature rows".into()));
            }
            for j in 0..x.len() {
                min[j] = min[j].min(x[j]);
                max[j] = max[j].max(x[j]);
            }
        }
        if let Some(j) = (0..min.len()).find(|&j| max[j] <= min[j]) {
            return Err(Error::Degenerate(format!("feature {j} is constant in the training rows")));
        }
        Ok(Self { min, max, clamp: true })
    }

    pub fn transform_row(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.min.len() {
            return Err(Error::Dimension(format!("expected {} features, got {}", self.min.len(), x.len())));
        }
        Ok(x.iter()
            .enumerate()
            .map(|(j, &v)| {
                let s = (v - self.min[j]) / (self.max[j] - self.min[j]);
                if self.clamp {
                    s.clamp(0.0, 1.0)
                } else {
                    s
                }
            })
            .collect())
    }

    pub fn transform(&self, xs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        xs.iter().map(|x| self.transform_row(x)).collect()
    }
}
