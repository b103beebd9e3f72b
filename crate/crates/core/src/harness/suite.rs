use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harness::aggregate::{aggregate_traces, AggregateResult};
use crate::harness::config::ExperimentConfig;
use crate::harness::run::{run_single_with, with_seed, RegretTrace, RunDiagnostics, RunOptions};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SuiteOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub jobs: Option<usize>,
    pub run: RunOptions,
}

/// Aggregates plus the raw traces and diagnostics, ordered by policy then seed.
#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub name: String,
    pub aggregate: AggregateResult,
    pub traces: Vec<RegretTrace>,
    pub diagnostics: Vec<RunDiagnostics>,
}

impl SuiteReport {
    pub fn traces_of<'a>(&'a self, policy: &'a str) -> impl Iterator<Item = &'a RegretTrace> + 'a {
        self.traces.iter().filter(move |t| t.policy == policy)
    }

    pub fn diagnostics_of<'a>(&'a self, policy: &'a str) -> impl Iterator<Item = &'a RunDiagnostics> + 'a {
        self.traces.iter().zip(&self.diagnostics).filter(move |(t, _)| t.policy == policy).map(|(_, d)| d)
    }
}

pub fn run_suite(config: &ExperimentConfig) -> Result<AggregateResult> {
    Ok(run_suite_with(config, SuiteOptions::default())?.aggregate)
}

/// Run every policy on seeds `seed..seed + repetitions` in parallel and aggregate.
pub fn run_suite_with(config: &ExperimentConfig, options: SuiteOptions) -> Result<SuiteReport> {
    config.validate()?;
    if config.repetitions < 2 {
        return Err(Error::Config("a suite needs at least 2 repetitions".into()));
    }
    let tasks: Vec<_> = config
        .policies
        .iter()
        .flat_map(|p| (0..config.repetitions as u64).map(move |r| (p, config.seed + r)))
        .collect();
    let work = || -> Vec<Result<_>> {
        tasks
            .par_iter()
            .map(|&(policy, seed)| {
                run_single_with(config, policy, seed, options.run)
                    .map(|out| (out.trace, out.diagnostics))
                    .map_err(|e| with_seed(seed, e))
            })
            .collect()
    };
    let results = match options.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot build worker pool: {e}")))?
            .install(work),
        None => work(),
    };
    let mut traces = Vec::with_capacity(results.len());
    let mut diagnostics = Vec::with_capacity(results.len());
    for r in results {
        let (t, d) = r?;
        traces.push(t);
        diagnostics.push(d);
    }
    let curves = config
        .policies
        .iter()
        .map(|p| {
            let own: Vec<RegretTrace> = traces.iter().filter(|t| t.policy == p.id()).cloned().collect();
            aggregate_traces(&own)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport { name: config.name.clone(), aggregate: AggregateResult { curves }, traces, diagnostics })
}
