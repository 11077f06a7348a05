//! Betweenness centrality on the unweighted co-authorship graph, the
//! core/periphery split, and top-fraction subnetworks.
//!
//! Values are normalized by `(n-1)(n-2)/2` over the whole graph, so they are
//! comparable across components. Per-source accumulations run in parallel
//! over fixed chunks and are reduced in chunk order, which keeps results
//! bit-identical for any thread count.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::corpus::Gender;
use crate::error::{Error, Result};
use crate::graph::CollabGraph;
use crate::indicators::AuthorIndicators;
use crate::table::{MetricTable, Value};

pub const DEFAULT_CORE_FRACTION: f64 = 0.05;
pub const DEFAULT_TOP_FRACTION: f64 = 0.001;
/// Graphs with more nodes than this use the sampled estimator by default.
pub const DEFAULT_EXACT_THRESHOLD: usize = 10_000;

const SOURCE_CHUNK: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum Method {
    Exact,
    Sampled { k: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityResult {
    pub author_ids: Vec<String>,
    pub values: Vec<f64>,
    pub method: Method,
}

impl CentralityResult {
    pub fn get(&self, author_id: &str) -> Option<f64> {
        self.author_ids.iter().position(|a| a == author_id).map(|i| self.values[i])
    }
}

/// Compressed adjacency.
struct Csr {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Csr {
    fn new(graph: &CollabGraph) -> Self {
        let adj = graph.adjacency();
        let mut offsets = Vec::with_capacity(adj.len() + 1);
        offsets.push(0);
        let mut targets = Vec::with_capacity(2 * graph.edges.len());
        for list in &adj {
            targets.extend_from_slice(list);
            offsets.push(targets.len());
        }
        Self { offsets, targets }
    }

    fn neighbours(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }
}

struct Workspace {
    sigma: Vec<f64>,
    dist: Vec<i64>,
    delta: Vec<f64>,
    order: Vec<usize>,
    queue: VecDeque<usize>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self { sigma: vec![0.0; n], dist: vec![-1; n], delta: vec![0.0; n], order: Vec::with_capacity(n), queue: VecDeque::new() }
    }

    /// Add the dependencies of source `s` to `acc`.
    fn accumulate(&mut self, csr: &Csr, s: usize, acc: &mut [f64]) {
        self.sigma.iter_mut().for_each(|x| *x = 0.0);
        self.dist.iter_mut().for_each(|x| *x = -1);
        self.delta.iter_mut().for_each(|x| *x = 0.0);
        self.order.clear();

        self.sigma[s] = 1.0;
        self.dist[s] = 0;
        self.queue.push_back(s);
        while let Some(v) = self.queue.pop_front() {
            self.order.push(v);
            for &w in csr.neighbours(v) {
                if self.dist[w] < 0 {
                    self.dist[w] = self.dist[v] + 1;
                    self.queue.push_back(w);
                }
                if self.dist[w] == self.dist[v] + 1 {
                    self.sigma[w] += self.sigma[v];
                }
            }
        }
        for &w in self.order.iter().rev() {
            for &v in csr.neighbours(w) {
                if self.dist[v] == self.dist[w] - 1 {
                    self.delta[v] += self.sigma[v] / self.sigma[w] * (1.0 + self.delta[w]);
                }
            }
            if w != s {
                acc[w] += self.delta[w];
            }
        }
    }
}

/// Sum of per-source dependencies over `sources`, deterministic in order.
fn brandes(graph: &CollabGraph, sources: &[usize]) -> Vec<f64> {
    let n = graph.node_count();
    let csr = Csr::new(graph);
    let partials: Vec<Vec<f64>> = sources
        .par_chunks(SOURCE_CHUNK)
        .map(|chunk| {
            let mut ws = Workspace::new(n);
            let mut acc = vec![0.0; n];
            for &s in chunk {
                ws.accumulate(&csr, s, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; n];
    for p in partials {
        for (t, x) in total.iter_mut().zip(p) {
            *t += x;
        }
    }
    total
}

fn finish(graph: &CollabGraph, raw: Vec<f64>, scale: f64, method: Method) -> CentralityResult {
    let n = graph.node_count();
    let values = if n < 3 {
        vec![0.0; n]
    } else {
        // Every unordered pair is counted from both endpoints.
        let denom = ((n - 1) * (n - 2)) as f64;
        raw.into_iter().map(|x| (x * scale / denom).clamp(0.0, 1.0)).collect()
    };
    CentralityResult { author_ids: graph.nodes.iter().map(|v| v.author_id.clone()).collect(), values, method }
}

pub fn betweenness_exact(graph: &CollabGraph) -> CentralityResult {
    let sources: Vec<usize> = (0..graph.node_count()).collect();
    let raw = brandes(graph, &sources);
    finish(graph, raw, 1.0, Method::Exact)
}

/// Brandes accumulation over `k` uniformly sampled sources, scaled by `n/k`.
/// With `k = n` the result equals [`betweenness_exact`] bit for bit.
pub fn betweenness_sampled(graph: &CollabGraph, k: usize, seed: u64) -> Result<CentralityResult> {
    let n = graph.node_count();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("sample size {k} outside 1..={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sources = rand::seq::index::sample(&mut rng, n, k).into_vec();
    sources.sort_unstable();
    let raw = brandes(graph, &sources);
    Ok(finish(graph, raw, n as f64 / k as f64, Method::Sampled { k, seed }))
}

/// Exact below `threshold` nodes, sampled with `k` sources above it.
pub fn betweenness(graph: &CollabGraph, threshold: usize, k: usize, seed: u64) -> Result<CentralityResult> {
    if graph.node_count() <= threshold {
        Ok(betweenness_exact(graph))
    } else {
        betweenness_sampled(graph, k.min(graph.node_count()), seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorePartition {
    pub core: Vec<String>,
    pub periphery: Vec<String>,
    pub fraction: f64,
}

impl CorePartition {
    pub fn is_core(&self, author_id: &str) -> bool {
        self.core.binary_search_by(|a| a.as_str().cmp(author_id)).is_ok()
    }
}

/// Node indices ranked by descending value, ascending id on ties.
fn ranking(result: &CentralityResult) -> Vec<usize> {
    let mut order: Vec<usize> = (0..result.values.len()).collect();
    order.sort_by(|&a, &b| {
        result.values[b]
            .total_cmp(&result.values[a])
            .then_with(|| result.author_ids[a].cmp(&result.author_ids[b]))
    });
    order
}

fn top_count(n: usize, fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!("fraction {fraction} outside (0, 1]")));
    }
    Ok(((fraction * n as f64 - 1e-9).ceil().max(0.0) as usize).min(n))
}

/// Top `ceil(fraction * n)` nodes by value form the core. Both lists are
/// sorted by id.
pub fn core_periphery(result: &CentralityResult, fraction: f64) -> Result<CorePartition> {
    let order = ranking(result);
    let size = top_count(order.len(), fraction)?;
    let mut core: Vec<String> = order[..size].iter().map(|&i| result.author_ids[i].clone()).collect();
    let mut periphery: Vec<String> = order[size..].iter().map(|&i| result.author_ids[i].clone()).collect();
    core.sort();
    periphery.sort();
    Ok(CorePartition { core, periphery, fraction })
}

/// `author_id, bc, role`, in node order.
pub fn centrality_table(result: &CentralityResult, partition: &CorePartition) -> MetricTable {
    let mut table = MetricTable::new(["author_id", "bc", "role"]);
    for (id, &bc) in result.author_ids.iter().zip(&result.values) {
        let role = if partition.is_core(id) { "core" } else { "periphery" };
        table.push(vec![id.as_str().into(), bc.into(), role.into()]);
    }
    table
}

pub fn write_centrality_csv(path: &Path, result: &CentralityResult, partition: &CorePartition) -> Result<()> {
    centrality_table(result, partition).write_csv(path)
}

/// Mean and two-sided 95% t interval. Interval is `None` below two values.
pub fn mean_ci95(values: &[f64]) -> Option<(f64, Option<(f64, f64)>)> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return Some((mean, None));
    }
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64).ok()?.inverse_cdf(0.975);
    let half = t * (var / n as f64).sqrt();
    Some((mean, Some((mean - half, mean + half))))
}

#[derive(Debug, Clone)]
pub struct Subnetwork {
    pub graph: CollabGraph,
    /// `gender, metric, n, mean, ci_low, ci_high`.
    pub summary: MetricTable,
}

/// Subgraph induced by the top-fraction nodes with per-gender summaries of
/// degree (inside the subgraph), publication count, h-index and i10-index.
pub fn top_subnetwork(
    graph: &CollabGraph,
    result: &CentralityResult,
    fraction: f64,
    indicators: &[AuthorIndicators],
) -> Result<Subnetwork> {
    let order = ranking(result);
    let size = top_count(order.len(), fraction)?;
    let keep: Vec<usize> = order[..size]
        .iter()
        .map(|&i| graph.index_of(&result.author_ids[i]).ok_or_else(|| Error::UnknownDocument(result.author_ids[i].clone())))
        .collect::<Result<_>>()?;
    let sub = graph.induced(&keep);
    let degrees = sub.degrees();
    let by_id: HashMap<&str, &AuthorIndicators> = indicators.iter().map(|a| (a.author_id.as_str(), a)).collect();

    let mut series: BTreeMap<(Gender, &str), Vec<f64>> = BTreeMap::new();
    for (node, &deg) in sub.nodes.iter().zip(&degrees) {
        series.entry((node.gender, "degree")).or_default().push(deg as f64);
        if let Some(ind) = by_id.get(node.author_id.as_str()) {
            series.entry((node.gender, "pub_count")).or_default().push(ind.pub_count as f64);
            series.entry((node.gender, "h_index")).or_default().push(ind.h_index as f64);
            series.entry((node.gender, "i10_index")).or_default().push(ind.i10_index as f64);
        }
    }
    let mut summary = MetricTable::new(["gender", "metric", "n", "mean", "ci_low", "ci_high"]);
    for gender in [Gender::F, Gender::M] {
        for metric in ["degree", "pub_count", "h_index", "i10_index"] {
            let values = series.get(&(gender, metric)).map_or(&[][..], Vec::as_slice);
            let (mean, ci) = match mean_ci95(values) {
                Some((m, ci)) => (Value::Real(m), ci),
                None => (Value::Missing, None),
            };
            let (lo, hi) = ci.map_or((Value::Missing, Value::Missing), |(l, h)| (l.into(), h.into()));
            summary.push(vec![gender.as_str().into(), metric.into(), values.len().into(), mean, lo, hi]);
        }
    }
    Ok(Subnetwork { graph: sub, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Node;
    use proptest::prelude::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> CollabGraph {
        let nodes = (0..n)
            .map(|i| Node { author_id: format!("v{i:02}"), gender: if i % 2 == 0 { Gender::F } else { Gender::M } })
            .collect();
        let edges: Vec<(String, String, u32)> = edges.iter().map(|&(a, b)| (format!("v{a:02}"), format!("v{b:02}"), 1)).collect();
        CollabGraph::from_parts(nodes, &edges).unwrap()
    }

    /// Enumerate every shortest path explicitly.
    fn brute_force(g: &CollabGraph) -> Vec<f64> {
        let n = g.node_count();
        let adj = g.adjacency();
        let mut bc = vec![0.0; n];
        fn paths(adj: &[Vec<usize>], path: &mut Vec<usize>, t: usize, max: usize, out: &mut Vec<Vec<usize>>) {
            let v = *path.last().unwrap();
            if v == t {
                out.push(path.clone());
                return;
            }
            if path.len() > max {
                return;
            }
            for &w in &adj[v] {
                if !path.contains(&w) {
                    path.push(w);
                    paths(adj, path, t, max, out);
                    path.pop();
                }
            }
        }
        for s in 0..n {
            for t in s + 1..n {
                let mut all = Vec::new();
                paths(&adj, &mut vec![s], t, n, &mut all);
                let Some(shortest) = all.iter().map(Vec::len).min() else { continue };
                let geodesics: Vec<&Vec<usize>> = all.iter().filter(|p| p.len() == shortest).collect();
                for p in &geodesics {
                    for &v in &p[1..p.len() - 1] {
                        bc[v] += 1.0 / geodesics.len() as f64;
                    }
                }
            }
        }
        if n >= 3 {
            let pairs = ((n - 1) * (n - 2)) as f64 / 2.0;
            bc.iter_mut().for_each(|x| *x /= pairs);
        }
        bc
    }

    #[test]
    fn path_star_cycle() {
        let path = betweenness_exact(&graph(3, &[(0, 1), (1, 2)]));
        assert_eq!(path.values, [0.0, 1.0, 0.0]);
        let star = betweenness_exact(&graph(4, &[(0, 1), (0, 2), (0, 3)]));
        assert_eq!(star.values, [1.0, 0.0, 0.0, 0.0]);
        let cycle = betweenness_exact(&graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]));
        for v in cycle.values {
            assert!((v - 1.0 / 6.0).abs() < 1e-12);
        }
        assert_eq!(betweenness_exact(&graph(2, &[(0, 1)])).values, [0.0, 0.0]);
        assert!(betweenness_exact(&graph(0, &[])).values.is_empty());
    }

    #[test]
    fn sampled_full_equals_exact() {
        let g = graph(9, &[(0, 1), (1, 2), (2, 3), (3, 0), (3, 4), (4, 5), (5, 6), (6, 4), (7, 8)]);
        let exact = betweenness_exact(&g);
        let full = betweenness_sampled(&g, 9, 42).unwrap();
        assert_eq!(exact.values, full.values);
        let a = betweenness_sampled(&g, 4, 7).unwrap();
        let b = betweenness_sampled(&g, 4, 7).unwrap();
        assert_eq!(a, b);
        assert!(betweenness_sampled(&g, 10, 0).is_err());
        assert!(betweenness_sampled(&g, 0, 0).is_err());
    }

    #[test]
    fn sampled_is_close_on_average_on_a_cycle() {
        let g = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        let mut mean = [0.0; 5];
        for seed in 0..500 {
            let r = betweenness_sampled(&g, 2, seed).unwrap();
            for (m, v) in mean.iter_mut().zip(r.values) {
                *m += v / 500.0;
            }
        }
        for m in mean {
            assert!((m - 1.0 / 6.0).abs() / (1.0 / 6.0) < 0.05);
        }
    }

    #[test]
    fn core_rules() {
        let ids: Vec<String> = (0..100).map(|i| format!("a{i:03}")).collect();
        let flat = CentralityResult { author_ids: ids.clone(), values: vec![0.5; 100], method: Method::Exact };
        let p = core_periphery(&flat, 0.05).unwrap();
        assert_eq!(p.core, ids[..5]);
        assert_eq!(p.periphery.len(), 95);

        let r = CentralityResult { author_ids: (0..114).map(|i| format!("a{i:03}")).collect(), values: vec![0.1; 114], method: Method::Exact };
        assert_eq!(core_periphery(&r, 0.001).unwrap().core.len(), 1);
        assert!(core_periphery(&flat, 0.0).is_err());

        let ranked = CentralityResult { author_ids: vec!["b".into(), "a".into(), "c".into()], values: vec![0.9, 0.1, 0.9], method: Method::Exact };
        assert_eq!(core_periphery(&ranked, 0.5).unwrap().core, ["b", "c"]);
    }

    #[test]
    fn subnetwork() {
        let g = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        let r = betweenness_exact(&g);
        let whole = top_subnetwork(&g, &r, 1.0, &[]).unwrap();
        assert_eq!(whole.graph, g);
        // Top 3 are v01, v02, v03: a path of two edges.
        let top = top_subnetwork(&g, &r, 0.6, &[]).unwrap();
        assert_eq!(top.graph.edge_count(), 2);
        let deg = top.summary.numbers("mean").unwrap();
        // F: v02 (degree 2); M: v01, v03 (degree 1 each).
        assert_eq!(deg[0], Some(2.0));
        assert_eq!(deg[4], Some(1.0));

        let disjoint = graph(4, &[(0, 1), (2, 3)]);
        let r = CentralityResult { author_ids: disjoint.nodes.iter().map(|n| n.author_id.clone()).collect(), values: vec![1.0, 0.0, 1.0, 0.0], method: Method::Exact };
        let sub = top_subnetwork(&disjoint, &r, 0.5, &[]).unwrap();
        assert_eq!(sub.graph.node_count(), 2);
        assert!(sub.graph.edges.is_empty());
    }

    #[test]
    fn confidence_interval() {
        let (m, ci) = mean_ci95(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m, 2.0);
        let (lo, hi) = ci.unwrap();
        // t_{0.975, 2} = 4.302653, s/sqrt(n) = 1/sqrt(3)
        assert!((hi - 2.0 - 4.302652729749464 / 3f64.sqrt()).abs() < 1e-9);
        assert!((2.0 - lo - (hi - 2.0)).abs() < 1e-12);
        assert_eq!(mean_ci95(&[5.0]), Some((5.0, None)));
        assert_eq!(mean_ci95(&[]), None);
    }

    fn arb_graph() -> impl Strategy<Value = CollabGraph> {
        (1usize..=8).prop_flat_map(|n| {
            prop::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
                let mut edges = Vec::new();
                let mut k = 0;
                for a in 0..n {
                    for b in a + 1..n {
                        if bits[k] {
                            edges.push((a, b));
                        }
                        k += 1;
                    }
                }
                graph(n, &edges)
            })
        })
    }

    proptest! {
        #[test]
        fn exact_matches_path_enumeration(g in arb_graph()) {
            let fast = betweenness_exact(&g);
            let slow = brute_force(&g);
            for (a, b) in fast.values.iter().zip(&slow) {
                prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}");
                prop_assert!((0.0..=1.0).contains(a));
            }
            let p = core_periphery(&fast, 0.3).unwrap();
            let min_core = p.core.iter().map(|id| fast.get(id).unwrap()).fold(f64::INFINITY, f64::min);
            let max_per = p.periphery.iter().map(|id| fast.get(id).unwrap()).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(min_core >= max_per);
            prop_assert_eq!(p.core.len() + p.periphery.len(), g.node_count());
        }
    }
}
