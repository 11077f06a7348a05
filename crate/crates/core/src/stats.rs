//! Two-sample tests and group summaries.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};
use crate::table::{MetricTable, Value};

/// Above this many arrangements, exact Mann-Whitney falls back to the normal
/// approximation.
pub const EXACT_MWU_MAX_N: usize = 20;
pub const DEFAULT_PERMUTATIONS: usize = 10_000;
const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    #[default]
    TwoSided,
    /// The first sample tends to be larger.
    Greater,
    /// The first sample tends to be smaller.
    Less,
}

impl Alternative {
    pub fn as_str(self) -> &'static str {
        match self {
            Alternative::TwoSided => "two_sided",
            Alternative::Greater => "greater",
            Alternative::Less => "less",
        }
    }
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Alternative {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "two_sided" | "two-sided" => Ok(Alternative::TwoSided),
            "greater" => Ok(Alternative::Greater),
            "less" => Ok(Alternative::Less),
            other => Err(format!("unknown alternative {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub test: String,
    pub groups: [String; 2],
    pub statistic: f64,
    pub p: f64,
    pub alternative: Alternative,
    pub n_a: usize,
    pub n_b: usize,
}

impl TestResult {
    pub fn with_groups(mut self, a: &str, b: &str) -> Self {
        self.groups = [a.to_string(), b.to_string()];
        self
    }
}

fn result(test: &str, statistic: f64, p: f64, alternative: Alternative, n_a: usize, n_b: usize) -> TestResult {
    TestResult {
        test: test.to_string(),
        groups: ["a".into(), "b".into()],
        statistic,
        p: p.clamp(0.0, 1.0),
        alternative,
        n_a,
        n_b,
    }
}

fn combine(p_greater: f64, p_less: f64, alternative: Alternative) -> f64 {
    match alternative {
        Alternative::Greater => p_greater,
        Alternative::Less => p_less,
        Alternative::TwoSided => (2.0 * p_greater.min(p_less)).min(1.0),
    }
}

/// Midranks (1-based) of `values`, plus the tie groups' sizes.
pub fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}

/// `U_a`: the number of (a, b) pairs with `a > b`, ties counting one half.
pub fn u_statistic(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, _) = midranks(&pooled);
    let n = a.len() as f64;
    ranks[..a.len()].iter().sum::<f64>() - n * (n + 1.0) / 2.0
}

/// Number of arrangements giving each value of `U` for sizes `n` and `m`
/// without ties. Index `u` holds the count for `U = u`.
pub fn u_distribution(n: usize, m: usize) -> Vec<f64> {
    // counts[j][u] for the current number of a-items i and j b-items.
    let max = n * m;
    let mut prev: Vec<Vec<f64>> = (0..=m).map(|_| {
        let mut v = vec![0.0; max + 1];
        v[0] = 1.0;
        v
    }).collect();
    for i in 1..=n {
        let mut cur: Vec<Vec<f64>> = vec![vec![0.0; max + 1]; m + 1];
        cur[0][0] = 1.0;
        for j in 1..=m {
            for u in 0..=i * j {
                // Largest item is from a (beats all j b-items) or from b.
                let from_a = if u >= j { prev[j][u - j] } else { 0.0 };
                cur[j][u] = from_a + cur[j - 1][u];
            }
        }
        prev = cur;
    }
    prev.swap_remove(m)
}

/// Mann-Whitney U test on `U_a`. Exact when `n + m <= 20` and there are no
/// ties; otherwise normal approximation with tie and continuity correction.
pub fn mann_whitney_u(a: &[f64], b: &[f64], alternative: Alternative) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample("mann_whitney_u"));
    }
    let (n, m) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let nf = n as f64;
    let u = ranks[..n].iter().sum::<f64>() - nf * (nf + 1.0) / 2.0;

    if n + m <= EXACT_MWU_MAX_N && ties.is_empty() {
        let dist = u_distribution(n, m);
        let total: f64 = dist.iter().sum();
        let k = u.round() as usize;
        let p_less = dist[..=k].iter().sum::<f64>() / total;
        let p_greater = dist[k..].iter().sum::<f64>() / total;
        return Ok(result("mann_whitney_u", u, combine(p_greater, p_less, alternative), alternative, n, m));
    }

    let (mf, big_n) = (m as f64, (n + m) as f64);
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (big_n * (big_n - 1.0));
    let sigma = (nf * mf / 12.0 * ((big_n + 1.0) - tie_term)).max(0.0).sqrt();
    let mu = nf * mf / 2.0;
    if sigma == 0.0 {
        return Ok(result("mann_whitney_u", u, 1.0, alternative, n, m));
    }
    let normal = Normal::standard();
    let p_greater = normal.sf((u - mu - 0.5) / sigma);
    let p_less = normal.cdf((u - mu + 0.5) / sigma);
    Ok(result("mann_whitney_u", u, combine(p_greater, p_less, alternative), alternative, n, m))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PermutationStatistic {
    #[default]
    MedianDiff,
    MeanDiff,
}

impl FromStr for PermutationStatistic {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "median_diff" => Ok(PermutationStatistic::MedianDiff),
            "mean_diff" => Ok(PermutationStatistic::MeanDiff),
            other => Err(format!("unknown permutation statistic {other:?}")),
        }
    }
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Median with the midpoint rule for even lengths.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[h] } else { (v[h - 1] + v[h]) / 2.0 })
}

fn statistic(kind: PermutationStatistic, a: &[f64], b: &[f64]) -> f64 {
    let f = match kind {
        PermutationStatistic::MedianDiff => median,
        PermutationStatistic::MeanDiff => mean,
    };
    f(a).unwrap_or(0.0) - f(b).unwrap_or(0.0)
}

fn at_least_as_extreme(t: f64, observed: f64, alternative: Alternative) -> bool {
    match alternative {
        Alternative::TwoSided => t.abs() >= observed.abs() - EPS,
        Alternative::Greater => t >= observed - EPS,
        Alternative::Less => t <= observed + EPS,
    }
}

/// Calls `f` with every `k`-subset of `0..n`, in lexicographic order.
fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else { return };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Two-sample permutation test on the difference `stat(a) - stat(b)`.
///
/// All `C(n+m, n)` splits are enumerated when there are at most `rounds` of
/// them, giving an exact p. Otherwise `rounds` random relabelings are drawn,
/// each from its own counter-based RNG stream, and
/// `p = (1 + extreme) / (rounds + 1)`.
pub fn permutation_test(
    a: &[f64],
    b: &[f64],
    kind: PermutationStatistic,
    rounds: usize,
    alternative: Alternative,
    seed: u64,
) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample("permutation_test"));
    }
    if rounds == 0 {
        return Err(Error::InvalidParameter("permutation rounds must be at least 1".into()));
    }
    let (n, m) = (a.len(), b.len());
    let observed = statistic(kind, a, b);
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let name = match kind {
        PermutationStatistic::MedianDiff => "permutation_median_diff",
        PermutationStatistic::MeanDiff => "permutation_mean_diff",
    };

    let arrangements = crate::nullmodel::binomial((n + m) as u64, n as u64);
    if arrangements as u128 <= rounds as u128 {
        let (mut extreme, mut total) = (0u64, 0u64);
        let mut in_a = vec![false; n + m];
        let (mut xa, mut xb) = (Vec::with_capacity(n), Vec::with_capacity(m));
        for_each_combination(n + m, n, |combo| {
            in_a.iter_mut().for_each(|x| *x = false);
            combo.iter().for_each(|&i| in_a[i] = true);
            xa.clear();
            xb.clear();
            for (i, &x) in pooled.iter().enumerate() {
                if in_a[i] { xa.push(x) } else { xb.push(x) }
            }
            total += 1;
            if at_least_as_extreme(statistic(kind, &xa, &xb), observed, alternative) {
                extreme += 1;
            }
        });
        return Ok(result(name, observed, extreme as f64 / total as f64, alternative, n, m));
    }

    let extreme: u64 = (0..rounds as u64)
        .into_par_iter()
        .map(|round| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(round);
            let mut shuffled = pooled.clone();
            shuffled.shuffle(&mut rng);
            let t = statistic(kind, &shuffled[..n], &shuffled[n..]);
            at_least_as_extreme(t, observed, alternative) as u64
        })
        .sum();
    Ok(result(name, observed, (1 + extreme) as f64 / (rounds + 1) as f64, alternative, n, m))
}

fn sample_variance(values: &[f64]) -> f64 {
    let mu = mean(values).unwrap_or(0.0);
    values.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (values.len() - 1) as f64
}

/// Welch's unequal-variance t-test with Welch-Satterthwaite degrees of
/// freedom.
pub fn t_test_welch(a: &[f64], b: &[f64], alternative: Alternative) -> Result<TestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidParameter("Welch t-test needs at least two values per sample".into()));
    }
    let (n, m) = (a.len(), b.len());
    let diff = mean(a).unwrap() - mean(b).unwrap();
    let (va, vb) = (sample_variance(a) / n as f64, sample_variance(b) / m as f64);
    let se = (va + vb).sqrt();
    if se == 0.0 {
        let (t, p) = if diff == 0.0 {
            (0.0, 1.0)
        } else {
            let p_greater = if diff > 0.0 { 0.0 } else { 1.0 };
            (diff.signum() * f64::INFINITY, combine(p_greater, 1.0 - p_greater, alternative))
        };
        return Ok(result("welch_t", t, p, alternative, n, m));
    }
    let t = diff / se;
    let df = (va + vb).powi(2) / (va * va / (n - 1) as f64 + vb * vb / (m - 1) as f64);
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let p = combine(dist.sf(t), dist.cdf(t), alternative);
    Ok(result("welch_t", t, p, alternative, n, m))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    /// Sample standard deviation; `None` below two values.
    pub sd: Option<f64>,
}

pub fn summarize(values: &[f64]) -> Summary {
    Summary {
        n: values.len(),
        mean: mean(values),
        median: median(values),
        sd: (values.len() >= 2).then(|| sample_variance(values).sqrt()),
    }
}

/// `group, n, mean, median, sd`, one row per group.
pub fn group_summary(groups: &BTreeMap<String, Vec<f64>>) -> MetricTable {
    let mut t = MetricTable::new(["group", "n", "mean", "median", "sd"]);
    for (g, values) in groups {
        let s = summarize(values);
        t.push(vec![g.as_str().into(), s.n.into(), s.mean.into(), s.median.into(), s.sd.into()]);
    }
    t
}

/// Density histogram: `bin_low, bin_high, count, density` over `bins` equal
/// bins spanning `[lo, hi]`. Values outside the range are dropped.
pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> MetricTable {
    let mut counts = vec![0usize; bins];
    let width = (hi - lo) / bins as f64;
    let mut kept = 0;
    for &x in values {
        if x.is_finite() && x >= lo && x <= hi && width > 0.0 {
            let i = (((x - lo) / width) as usize).min(bins - 1);
            counts[i] += 1;
            kept += 1;
        }
    }
    let mut t = MetricTable::new(["bin_low", "bin_high", "count", "density"]);
    for (i, &c) in counts.iter().enumerate() {
        let density = if kept > 0 { Value::Real(c as f64 / (kept as f64 * width)) } else { Value::Missing };
        t.push(vec![(lo + i as f64 * width).into(), (lo + (i + 1) as f64 * width).into(), c.into(), density]);
    }
    t
}
