//! Seeded synthetic point sets: uniform noise, and clustered sets built from
//! reflected random walks with equal (`simden`) or varying (`varden`) step
//! lengths.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DpcError, Result};
use crate::geometry::PointSet;

pub const DEFAULT_CLUSTERS: usize = 10;
pub const DEFAULT_EXTENT: f64 = 1e5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenKind {
    Uniform,
    Simden,
    Varden,
}

impl GenKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GenKind::Uniform => "uniform",
            GenKind::Simden => "simden",
            GenKind::Varden => "varden",
        }
    }
}

impl fmt::Display for GenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GenKind {
    type Err = DpcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(GenKind::Uniform),
            "simden" => Ok(GenKind::Simden),
            "varden" => Ok(GenKind::Varden),
            other => Err(DpcError::InvalidParams(format!(
                "unknown dataset kind `{other}` (expected uniform, simden or varden)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub kind: GenKind,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub clusters: usize,
    /// Side length of the domain `[0, extent]^d`.
    pub extent: f64,
}

impl GenSpec {
    pub fn new(kind: GenKind, n: usize, d: usize, seed: u64) -> Self {
        GenSpec {
            kind,
            n,
            d,
            seed,
            clusters: DEFAULT_CLUSTERS,
            extent: DEFAULT_EXTENT,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(DpcError::InvalidParams("n must be at least 1".into()));
        }
        if self.d == 0 {
            return Err(DpcError::InvalidParams("d must be at least 1".into()));
        }
        if self.clusters == 0 {
            return Err(DpcError::InvalidParams("clusters must be at least 1".into()));
        }
        if !(self.extent.is_finite() && self.extent > 0.0) {
            return Err(DpcError::InvalidParams("extent must be finite and > 0".into()));
        }
        Ok(())
    }

    /// Step length of the walk for `cluster`. Varden steps are stratified
    /// log-uniform draws from `[extent/3000, extent/30]`, so that the
    /// densest and sparsest clusters are far apart.
    fn step_length(&self, cluster: usize, rng: &mut ChaCha8Rng) -> f64 {
        match self.kind {
            GenKind::Uniform => 0.0,
            GenKind::Simden => self.extent / (100.0 * (self.d as f64).sqrt()),
            GenKind::Varden => {
                let (lo, hi) = ((self.extent / 3000.0).ln(), (self.extent / 30.0).ln());
                let width = (hi - lo) / self.clusters as f64;
                let u: f64 = rng.random();
                (lo + width * (cluster as f64 + u)).exp()
            }
        }
    }
}

/// Points of `spec`; identical for a given seed on any number of workers.
pub fn generate(spec: &GenSpec) -> Result<PointSet> {
    generate_labeled(spec).map(|(ps, _)| ps)
}

/// As [`generate`], also returning the generating cluster of each point
/// (always 0 for uniform data).
pub fn generate_labeled(spec: &GenSpec) -> Result<(PointSet, Vec<usize>)> {
    spec.validate()?;
    let d = spec.d;
    if spec.kind == GenKind::Uniform {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let coords = (0..spec.n * d).map(|_| rng.random_range(0.0..=spec.extent)).collect();
        return Ok((PointSet::new(coords, d)?, vec![0; spec.n]));
    }

    let k = spec.clusters;
    let walks: Vec<Vec<f64>> = (0..k)
        .into_par_iter()
        .map(|c| {
            let size = spec.n / k + usize::from(c < spec.n % k);
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(c as u64 + 1);
            let step = spec.step_length(c, &mut rng);
            random_walk(&mut rng, size, d, step, spec.extent)
        })
        .collect();
    let mut labels = Vec::with_capacity(spec.n);
    let mut coords = Vec::with_capacity(spec.n * d);
    for (c, w) in walks.into_iter().enumerate() {
        labels.extend(std::iter::repeat_n(c, w.len() / d));
        coords.extend(w);
    }
    Ok((PointSet::new(coords, d)?, labels))
}

fn random_walk(rng: &mut ChaCha8Rng, len: usize, d: usize, step: f64, extent: f64) -> Vec<f64> {
    let mut pos: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..=extent)).collect();
    let mut out = Vec::with_capacity(len * d);
    let mut dir = vec![0.0; d];
    for _ in 0..len {
        out.extend_from_slice(&pos);
        let norm = loop {
            for v in dir.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                break norm;
            }
        };
        for (p, v) in pos.iter_mut().zip(&dir) {
            *p = reflect(*p + step * v / norm, extent);
        }
    }
    out
}

/// Folds `x` back into `[0, extent]` by mirroring at the walls.
fn reflect(x: f64, extent: f64) -> f64 {
    let y = x.rem_euclid(2.0 * extent);
    if y > extent {
        2.0 * extent - y
    } else {
        y
    }
}
