//! Multi-threaded placement scoring.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use rayon::ThreadPool;
use risvec_core::placement::{Evaluator, Metric, Objective};
use risvec_core::scenario::Placement;

use crate::error::{Error, Result};

/// Builds a pool with `threads` workers (0 picks the rayon default).
pub fn thread_pool(threads: usize) -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))
}

/// [`Objective`] that spreads work over a thread pool.
///
/// Per-instance values are gathered first and summed in instance order, so
/// every score is bitwise identical to [`Evaluator::evaluate`] whatever the
/// number of threads.
pub struct ParallelObjective<'e, 'a> {
    evaluator: &'e Evaluator<'a>,
    metric: Metric,
    pool: &'e ThreadPool,
}

impl<'e, 'a> ParallelObjective<'e, 'a> {
    /// Scores `metric` on `pool`.
    pub fn new(evaluator: &'e Evaluator<'a>, metric: Metric, pool: &'e ThreadPool) -> Self {
        Self { evaluator, metric, pool }
    }

    fn serial(&self, placement: &Placement) -> risvec_core::error::Result<f64> {
        self.evaluator.evaluate(placement, self.metric)
    }
}

impl Objective for ParallelObjective<'_, '_> {
    fn evaluate(&self, placement: &Placement) -> risvec_core::error::Result<f64> {
        let n = self.evaluator.instances().len();
        let values = self.pool.install(|| {
            (0..n)
                .into_par_iter()
                .map(|i| self.evaluator.instance_value(i, placement, self.metric))
                .collect::<risvec_core::error::Result<Vec<f64>>>()
        })?;
        let mut total = 0.0;
        for v in values {
            total += v;
        }
        Ok(total / n as f64)
    }

    fn evaluate_batch(&self, placements: &[Placement]) -> risvec_core::error::Result<Vec<f64>> {
        self.pool.install(|| placements.par_iter().map(|p| self.serial(p)).collect())
    }
}

/// Memoises another objective by exact placement. Scores are deterministic,
/// so cached and fresh values are bitwise equal; only the work is saved.
pub struct CachedObjective<O> {
    inner: O,
    cache: Mutex<HashMap<(u64, u64), f64>>,
}

impl<O: Objective> CachedObjective<O> {
    /// Wraps `inner` with an empty cache.
    pub fn new(inner: O) -> Self {
        Self { inner, cache: Mutex::new(HashMap::new()) }
    }

    fn key(p: &Placement) -> (u64, u64) {
        (p.altitude.to_bits(), p.tilt.to_bits())
    }

    fn lookup(&self, p: &Placement) -> Option<f64> {
        self.cache.lock().expect("cache lock").get(&Self::key(p)).copied()
    }
}

impl<O: Objective> Objective for CachedObjective<O> {
    fn evaluate(&self, placement: &Placement) -> risvec_core::error::Result<f64> {
        if let Some(v) = self.lookup(placement) {
            return Ok(v);
        }
        let v = self.inner.evaluate(placement)?;
        self.cache.lock().expect("cache lock").insert(Self::key(placement), v);
        Ok(v)
    }

    fn evaluate_batch(&self, placements: &[Placement]) -> risvec_core::error::Result<Vec<f64>> {
        let mut out: Vec<Option<f64>> = placements.iter().map(|p| self.lookup(p)).collect();
        let missing: Vec<Placement> = placements.iter().zip(&out).filter(|(_, v)| v.is_none()).map(|(p, _)| *p).collect();
        if !missing.is_empty() {
            let fresh = self.inner.evaluate_batch(&missing)?;
            let mut cache = self.cache.lock().expect("cache lock");
            let mut it = missing.iter().zip(fresh);
            for slot in out.iter_mut().filter(|v| v.is_none()) {
                let (p, v) = it.next().expect("one fresh score per miss");
                cache.insert(Self::key(p), v);
                *slot = Some(v);
            }
        }
        Ok(out.into_iter().map(|v| v.expect("filled")).collect())
    }
}
