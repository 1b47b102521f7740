//! Ordering, analysis, simulated factorization: the whole path from a
//! matrix to a [`FactorResult`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mapping::{ComputationMap, MapKind};
use crate::matrix::{permute_symmetric, Permutation, SparseSymMatrix};
use crate::ordering::Ordering;
use crate::runtime::{simulate, RunConfig, RunStats, TraceEvent};
use crate::solve::FactorResult;
use crate::symbolic::{etree, fill_stats, postorder_tree, symbolic_factorize, FillStats, SymbolicFactor, MAX_SUPERNODE_WIDTH};
use crate::taskgraph::{build_task_graph, comm_bounds, CommBound, TaskGraph};

/// A matrix permuted into postordered fill-reducing order and analyzed.
#[derive(Debug, Clone)]
pub struct Analysis {
    /// Ordering composed with the elimination-tree postorder, new→old.
    pub perm: Permutation,
    /// `P A Pᵀ`.
    pub permuted: SparseSymMatrix,
    pub sf: SymbolicFactor,
}

impl Analysis {
    pub fn graph(&self, map: MapKind, procs: usize) -> TaskGraph {
        build_task_graph(&self.sf, &ComputationMap::new(map, procs))
    }

    pub fn comm_bounds(&self, map: MapKind, procs: usize) -> Vec<CommBound> {
        comm_bounds(&self.sf, &ComputationMap::new(map, procs))
    }

    pub fn report(&self, procs: usize) -> AnalysisReport {
        let fill = fill_stats(&self.sf);
        let maps = MapKind::ALL
            .iter()
            .map(|&kind| {
                let b = self.comm_bounds(kind, procs);
                MapBounds {
                    map: kind.to_string(),
                    factor_dests: b.iter().map(|x| x.factor_dests).sum(),
                    aggregate_dests: b.iter().map(|x| x.aggregate_dests).sum(),
                    max_factor_dests: b.iter().map(|x| x.factor_dests).max().unwrap_or(0),
                    max_aggregate_dests: b.iter().map(|x| x.aggregate_dests).max().unwrap_or(0),
                }
            })
            .collect();
        AnalysisReport {
            n: self.sf.n(),
            nnz_a: self.sf.nnz_a,
            nnz_l: fill.nnz_l,
            fill: fill.fill,
            flops: fill.flops,
            supernodes: self.sf.num_snodes(),
            width_histogram: self.sf.width_histogram(),
            procs,
            comm_bounds: maps,
        }
    }

    pub fn fill(&self) -> FillStats {
        fill_stats(&self.sf)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MapBounds {
    pub map: String,
    /// Sums over supernodes.
    pub factor_dests: usize,
    pub aggregate_dests: usize,
    pub max_factor_dests: usize,
    pub max_aggregate_dests: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub n: usize,
    pub nnz_a: usize,
    pub nnz_l: usize,
    pub fill: usize,
    pub flops: u64,
    pub supernodes: usize,
    /// `(width upper bound, count)` in powers of two.
    pub width_histogram: Vec<(usize, usize)>,
    pub procs: usize,
    pub comm_bounds: Vec<MapBounds>,
}

pub fn analyze(a: &SparseSymMatrix, ordering: &Ordering, max_sn_width: usize) -> Result<Analysis> {
    let p0 = ordering.compute(a)?;
    let a1 = permute_symmetric(a, &p0)?;
    let post = postorder_tree(&etree(&a1));
    let perm = p0.then(&post)?;
    let permuted = permute_symmetric(a, &perm)?;
    let sf = symbolic_factorize(&permuted, max_sn_width);
    Ok(Analysis { perm, permuted, sf })
}

#[derive(Debug, Clone)]
pub struct FactorOptions {
    pub ordering: Ordering,
    pub max_sn_width: usize,
    pub run: RunConfig,
}

impl Default for FactorOptions {
    fn default() -> Self {
        Self { ordering: Ordering::default(), max_sn_width: MAX_SUPERNODE_WIDTH, run: RunConfig::default() }
    }
}

impl FactorOptions {
    pub fn with_run(run: RunConfig) -> Self {
        Self { run, ..Self::default() }
    }
}

#[derive(Debug, Clone)]
pub struct Factorization {
    pub factor: FactorResult,
    pub stats: RunStats,
    pub trace: Vec<TraceEvent>,
}

/// Runs a prepared analysis through the simulated runtime.
pub fn factorize_analyzed(an: &Analysis, run: &RunConfig) -> Result<Factorization> {
    let graph = an.graph(run.map, run.procs);
    let out = simulate(&graph, Some((&an.permuted, &an.sf)), run)?;
    if let Some(cycle) = out.stats.deadlock {
        return Err(Error::Deadlock { cycle });
    }
    let panels = out.panels.expect("numeric run returns panels");
    Ok(Factorization {
        factor: FactorResult { sf: an.sf.clone(), panels, perm: an.perm.clone() },
        stats: out.stats,
        trace: out.trace,
    })
}

pub fn factorize(a: &SparseSymMatrix, opts: &FactorOptions) -> Result<Factorization> {
    let an = analyze(a, &opts.ordering, opts.max_sn_width)?;
    factorize_analyzed(&an, &opts.run)
}
