//! Scaling experiments over dataset size, worker count and density radius.

use std::hash::{Hash, Hasher};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::datagen::{generate, GenKind, GenSpec};
use crate::error::{DpcError, Result};
use crate::geometry::{DpcParams, PointSet};
use crate::pipeline::{run_dpc_timed, with_threads, DpcResult, StepTimes, Strategy};

/// One timed run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub step_times: StepTimes,
    pub n: usize,
    pub d: usize,
    pub d_cut: f64,
    pub rho_min: f64,
    pub delta_min: f64,
    pub algo: Strategy,
    pub threads: usize,
    pub clusters: usize,
    pub noise: usize,
}

impl RunReport {
    pub fn new(result: &DpcResult, points: &PointSet, times: StepTimes, threads: usize) -> Self {
        RunReport {
            step_times: StepTimes {
                build: round_ms(times.build),
                density: round_ms(times.density),
                dependent: round_ms(times.dependent),
                linkage: round_ms(times.linkage),
            },
            n: points.len(),
            d: points.dim(),
            d_cut: result.params.d_cut,
            rho_min: result.params.rho_min,
            delta_min: result.params.delta_min,
            algo: result.strategy,
            threads,
            clusters: result.num_clusters(),
            noise: result.num_noise(),
        }
    }

    pub const CSV_HEADER: &'static str =
        "algo,n,d,threads,d_cut,rho_min,delta_min,build,density,dependent,linkage,total,clusters,noise";

    pub fn csv_row(&self) -> String {
        let t = &self.step_times;
        format!(
            "{},{},{},{},{},{},{},{:.3},{:.3},{:.3},{:.3},{:.3},{},{}",
            self.algo,
            self.n,
            self.d,
            self.threads,
            self.d_cut,
            self.rho_min,
            self.delta_min,
            t.build,
            t.density,
            t.dependent,
            t.linkage,
            t.total(),
            self.clusters,
            self.noise
        )
    }
}

/// Seconds rounded to whole milliseconds.
pub fn round_ms(secs: f64) -> f64 {
    (secs * 1000.0).round() / 1000.0
}

/// Resolves a worker count, `0` meaning one per available core.
pub fn effective_threads(threads: usize) -> usize {
    if threads == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        threads
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sweep {
    Size,
    Threads,
    Dcut,
}

impl std::str::FromStr for Sweep {
    type Err = DpcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "size" => Ok(Sweep::Size),
            "threads" => Ok(Sweep::Threads),
            "dcut" => Ok(Sweep::Dcut),
            other => Err(DpcError::InvalidParams(format!(
                "unknown sweep `{other}` (expected size, threads or dcut)"
            ))),
        }
    }
}

/// What to run. Sizes are used by the size sweep; the other sweeps use the
/// first size only.
#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub sweep: Sweep,
    pub kind: GenKind,
    pub d: usize,
    pub seed: u64,
    pub algos: Vec<Strategy>,
    pub sizes: Vec<usize>,
    pub threads: Vec<usize>,
    pub d_cuts: Vec<f64>,
    pub params: DpcParams,
}

impl BenchSpec {
    pub const DEFAULT_SIZES: [usize; 4] = [1_000, 10_000, 100_000, 1_000_000];

    /// Defaults: simden-style radius (one walk step), no noise cutoff and
    /// centers separated by a tenth of the domain.
    pub fn new(sweep: Sweep, kind: GenKind, d: usize) -> Self {
        let extent = crate::datagen::DEFAULT_EXTENT;
        BenchSpec {
            sweep,
            kind,
            d,
            seed: 1,
            algos: vec![Strategy::Priority],
            sizes: Self::DEFAULT_SIZES.to_vec(),
            threads: doubling_threads(effective_threads(0)),
            d_cuts: Vec::new(),
            params: DpcParams {
                d_cut: extent / (100.0 * (d as f64).sqrt()),
                rho_min: 0.0,
                delta_min: extent / 10.0,
            },
        }
    }
}

/// `1, 2, 4, ...` up to and including `max`.
pub fn doubling_threads(max: usize) -> Vec<usize> {
    let mut out = vec![];
    let mut t = 1;
    while t < max {
        out.push(t);
        t *= 2;
    }
    out.push(max.max(1));
    out
}

/// A report plus a digest of the labels it produced, so that rows of one
/// sweep can be checked for identical clusterings.
#[derive(Debug, Clone)]
pub struct BenchRecord {
    pub report: RunReport,
    pub labels_digest: u64,
}

pub fn labels_digest(labels: &[i64]) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    labels.hash(&mut h);
    h.finish()
}

/// Runs the sweep, calling `on_row` after every run.
pub fn bench_sweep(spec: &BenchSpec, mut on_row: impl FnMut(&BenchRecord)) -> Result<Vec<BenchRecord>> {
    if spec.algos.is_empty() {
        return Err(DpcError::InvalidParams("no algorithms to run".into()));
    }
    let base_n = *spec
        .sizes
        .first()
        .ok_or_else(|| DpcError::InvalidParams("no sizes given".into()))?;
    let gen = |n: usize| generate(&GenSpec::new(spec.kind, n, spec.d, spec.seed));
    let default_threads = effective_threads(0);
    let mut out = Vec::new();
    let mut record = |points: &PointSet, params: &DpcParams, algo: Strategy, threads: usize| -> Result<()> {
        let (result, times) = with_threads(threads, || run_dpc_timed(points, params, algo))??;
        let rec = BenchRecord {
            report: RunReport::new(&result, points, times, threads),
            labels_digest: labels_digest(&result.labels),
        };
        on_row(&rec);
        out.push(rec);
        Ok(())
    };
    match spec.sweep {
        Sweep::Size => {
            for &n in &spec.sizes {
                let points = gen(n)?;
                for &algo in &spec.algos {
                    record(&points, &spec.params, algo, default_threads)?;
                }
            }
        }
        Sweep::Threads => {
            let points = gen(base_n)?;
            for &algo in &spec.algos {
                for &t in &spec.threads {
                    record(&points, &spec.params, algo, effective_threads(t))?;
                }
            }
        }
        Sweep::Dcut => {
            if spec.d_cuts.is_empty() {
                return Err(DpcError::InvalidParams("dcut sweep needs at least one d_cut".into()));
            }
            let points = gen(base_n)?;
            for &algo in &spec.algos {
                for &d_cut in &spec.d_cuts {
                    let params = DpcParams::new(d_cut, spec.params.rho_min, spec.params.delta_min)?;
                    record(&points, &params, algo, default_threads)?;
                }
            }
        }
    }
    Ok(out)
}

pub fn write_reports_csv<W: Write>(w: &mut W, reports: &[RunReport]) -> std::io::Result<()> {
    writeln!(w, "{}", RunReport::CSV_HEADER)?;
    for r in reports {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}
