//! Runtime scaling of the full pipeline on edge subsamples.
//!
//! Edges are put in one seeded random order; the subsample for fraction `f`
//! is the first `round(f * |E|)` edges of that order with only the nodes they
//! touch, so smaller subsamples are nested in larger ones.

use std::io::Write;
use std::time::Instant;

use edgeattr_core::graph::AttributedMultigraph;
use edgeattr_core::pipeline::{run, PipelineConfig};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::synth::{generate, SynthConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    pub edges: usize,
    pub seconds: f64,
}

/// Edge indices of the first `k` edges of the seeded order.
pub fn subsample(graph: &AttributedMultigraph, k: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..graph.edge_count()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order.truncate(k);
    order
}

/// Times `run` on each subsample. Fractions must be ascending in (0, 1].
pub fn scaling_benchmark(
    graph: &AttributedMultigraph,
    fractions: &[f64],
    config: &PipelineConfig,
    seed: u64,
    mut progress: impl FnMut(&Timing),
) -> Result<Vec<Timing>> {
    if fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) || fractions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Usage("fractions must be ascending in (0, 1]".into()));
    }
    let order = subsample(graph, graph.edge_count(), seed);
    let mut out = Vec::with_capacity(fractions.len());
    for &f in fractions {
        let k = (f * graph.edge_count() as f64).round() as usize;
        let sub = graph.edge_subgraph(&order[..k]);
        let start = Instant::now();
        let result = run(&sub, config)?;
        let seconds = start.elapsed().as_secs_f64();
        drop(result);
        let t = Timing { edges: k, seconds };
        progress(&t);
        out.push(t);
    }
    Ok(out)
}

/// Default synthetic population (same archetype shares) grown until it has
/// at least `edges` edges, then cut to exactly the first `edges` in
/// generation order.
pub fn synthetic_graph(edges: usize, seed: u64) -> Result<AttributedMultigraph> {
    let mut config = SynthConfig { seed, ..SynthConfig::default() };
    loop {
        let graph = generate(&config)?.graph;
        if graph.edge_count() >= edges {
            let keep: Vec<usize> = (0..edges).collect();
            return Ok(graph.edge_subgraph(&keep));
        }
        let per_user = graph.edge_count().max(1) as f64 / config.n_users as f64;
        let wanted = (edges as f64 / per_user * 1.05).ceil() as usize;
        config.n_users = wanted.max(config.n_users + 1);
    }
}

/// Least-squares slope of log(seconds) against log(edges).
///
/// Returns `None` with fewer than two usable points (positive edges and time).
pub fn loglog_slope(timings: &[Timing]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = timings
        .iter()
        .filter(|t| t.edges > 0 && t.seconds > 0.0)
        .map(|t| ((t.edges as f64).ln(), t.seconds.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Writes `edges,seconds` rows.
pub fn write_timings<W: Write>(timings: &[Timing], mut writer: W) -> std::io::Result<()> {
    writeln!(writer, "edges,seconds")?;
    for t in timings {
        writeln!(writer, "{},{:.6}", t.edges, t.seconds)?;
    }
    Ok(())
}
