use crate::error::{DpcError, Result};
use crate::geometry::{Neighbor, PointId, PointSet};

/// Dependent point and dependent distance of every point. `lambda[i]` is
/// `None` (with `delta[i] == inf`) for noise points and the top point.
#[derive(Debug, Clone, PartialEq)]
pub struct DependentAssignment {
    pub lambda: Vec<Option<PointId>>,
    pub delta: Vec<f64>,
}

impl DependentAssignment {
    pub fn unassigned(n: usize) -> Self {
        DependentAssignment {
            lambda: vec![None; n],
            delta: vec![f64::INFINITY; n],
        }
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    #[inline]
    pub fn set(&mut self, id: PointId, nb: Neighbor) {
        self.lambda[id] = Some(nb.id);
        self.delta[id] = nb.dist();
    }

    pub(crate) fn from_neighbors(found: Vec<Option<Neighbor>>) -> Self {
        let (lambda, delta) = found
            .into_iter()
            .map(|nb| match nb {
                Some(nb) => (Some(nb.id), nb.dist()),
                None => (None, f64::INFINITY),
            })
            .unzip();
        DependentAssignment { lambda, delta }
    }
}

pub(crate) fn check_densities(points: &PointSet, rho: &[f64]) -> Result<()> {
    if rho.len() != points.len() {
        return Err(DpcError::InvalidParams(format!(
            "{} densities for {} points",
            rho.len(),
            points.len()
        )));
    }
    if rho.iter().any(|r| r.is_nan()) {
        return Err(DpcError::InvalidParams("density is NaN".into()));
    }
    Ok(())
}
