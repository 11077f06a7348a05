//! Randomized-team null model.
//!
//! For each real team size a Cochran sample of synthetic teams is drawn
//! without replacement from the profiled author pool. The mean and
//! population standard deviation of their entropy and mean cosine give the
//! reference against which real teams are z-scored.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::corpus::Gender;
use crate::diversity::{team_diversity_indexed, DisciplineCount, TeamDiversity};
use crate::error::{Error, Result};
use crate::graph::{GenderClass, TeamRecord};
use crate::profiles::{profile_index, AuthorProfile};
use crate::table::{MetricTable, Value};

/// Standard deviations below this are treated as zero.
pub const SIGMA_EPS: f64 = 1e-12;
const MAX_REJECTIONS: usize = 10_000;

/// Cochran's sample size with finite-population correction, `p = 0.5`.
pub fn cochran_sample_size(population: u64, confidence: f64, margin: f64) -> Result<u64> {
    if population == 0 {
        return Err(Error::InvalidParameter("population must be at least 1".into()));
    }
    if !(margin > 0.0 && margin < 1.0) || !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidParameter(format!("confidence {confidence} / margin {margin} outside (0, 1)")));
    }
    let z = Normal::standard().inverse_cdf(0.5 + confidence / 2.0);
    let pq = 0.25;
    let n = population as f64;
    let size = n * z * z * pq / (margin * margin * (n - 1.0) + z * z * pq);
    Ok((size.ceil() as u64).clamp(1, population))
}

/// `C(n, k)`, saturating at `u64::MAX`.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Which authors a synthetic team is drawn from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Every profiled author, regardless of the real team's composition.
    #[default]
    WholePool,
    /// Female-only teams from F authors, male-only from M authors, mixed
    /// teams from the whole pool conditioned on containing both.
    Stratified,
}

fn draw(pool_size: usize, size: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut team = rand::seq::index::sample(rng, pool_size, size).into_vec();
    team.sort_unstable();
    team
}

/// `count` synthetic teams of `size` distinct authors from `pool`, as sorted
/// pool indices.
pub fn randomize_indices(pool_size: usize, size: usize, count: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if size > pool_size {
        return Err(Error::InvalidParameter(format!("team size {size} exceeds author pool of {pool_size}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| draw(pool_size, size, &mut rng)).collect())
}

/// Synthetic teams with pub ids `null-{size}-{i}`.
pub fn randomize_teams(pool: &[AuthorProfile], size: usize, count: usize, seed: u64) -> Result<Vec<TeamRecord>> {
    let teams = randomize_indices(pool.len(), size, count, seed)?;
    Ok(teams
        .into_iter()
        .enumerate()
        .filter_map(|(i, idx)| {
            let members: Vec<&AuthorProfile> = idx.iter().map(|&j| &pool[j]).collect();
            TeamRecord::from_profiles(format!("null-{size}-{i}"), 0, &members, size)
        })
        .collect())
}

fn mixed_teams(pool: &[AuthorProfile], size: usize, count: usize, seed: u64) -> Result<Vec<TeamRecord>> {
    let has_f = pool.iter().any(|p| p.gender == Gender::F);
    let has_m = pool.iter().any(|p| p.gender == Gender::M);
    if size < 2 || !has_f || !has_m {
        return Err(Error::InvalidParameter(format!("cannot draw mixed teams of size {size} from this pool")));
    }
    if size > pool.len() {
        return Err(Error::InvalidParameter(format!("team size {size} exceeds author pool of {}", pool.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut attempts = 0;
        loop {
            let idx = draw(pool.len(), size, &mut rng);
            let members: Vec<&AuthorProfile> = idx.iter().map(|&j| &pool[j]).collect();
            let team = TeamRecord::from_profiles(format!("null-{size}-{i}"), 0, &members, size).expect("F/M pool");
            if team.gender_class == GenderClass::Mixed {
                out.push(team);
                break;
            }
            attempts += 1;
            if attempts >= MAX_REJECTIONS {
                return Err(Error::InvalidParameter(format!("mixed teams of size {size} are too rare to sample")));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeMoments {
    pub count: usize,
    pub mu_h: Option<f64>,
    pub sigma_h: Option<f64>,
    pub mu_s: Option<f64>,
    pub sigma_s: Option<f64>,
}

/// Mean and population standard deviation of the defined values.
pub fn mean_and_sd(values: impl IntoIterator<Item = f64>) -> Option<(f64, f64)> {
    let values: Vec<f64> = values.into_iter().collect();
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let all_equal = values.iter().all(|&x| x == values[0]);
    Some((mean, if all_equal { 0.0 } else { var.sqrt() }))
}

impl SizeMoments {
    pub fn from_scores(scores: &[TeamDiversity]) -> Self {
        let h = mean_and_sd(scores.iter().filter_map(|s| s.entropy));
        let s = mean_and_sd(scores.iter().filter_map(|s| s.cosine));
        Self {
            count: scores.len(),
            mu_h: h.map(|m| m.0),
            sigma_h: h.map(|m| m.1),
            mu_s: s.map(|m| m.0),
            sigma_s: s.map(|m| m.1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullConfig {
    pub confidence: f64,
    pub margin: f64,
    pub seed: u64,
    pub sampling: Sampling,
    pub disciplines: DisciplineCount,
}

impl NullConfig {
    pub fn new(seed: u64, disciplines: DisciplineCount) -> Self {
        Self { confidence: 0.95, margin: 0.01, seed, sampling: Sampling::WholePool, disciplines }
    }
}

/// Moments keyed by stratum (`None` for whole-pool sampling) and team size.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NullMoments {
    pub entries: BTreeMap<(Option<GenderClass>, usize), SizeMoments>,
}

impl NullMoments {
    pub fn get(&self, stratum: Option<GenderClass>, size: usize) -> Option<&SizeMoments> {
        self.entries.get(&(stratum, size))
    }

    pub fn table(&self) -> MetricTable {
        let mut t = MetricTable::new(["stratum", "size", "samples", "mu_H", "sigma_H", "mu_S", "sigma_S"]);
        for ((stratum, size), m) in &self.entries {
            t.push(vec![
                stratum.map_or("all", GenderClass::as_str).into(),
                (*size).into(),
                m.count.into(),
                m.mu_h.into(),
                m.sigma_h.into(),
                m.mu_s.into(),
                m.sigma_s.into(),
            ]);
        }
        t
    }
}

fn stratum_seed(seed: u64, stratum: Option<GenderClass>, size: usize) -> u64 {
    let tag = match stratum {
        None => 0,
        Some(GenderClass::FemaleOnly) => 1,
        Some(GenderClass::MaleOnly) => 2,
        Some(GenderClass::Mixed) => 3,
    };
    seed ^ size as u64 ^ (tag << 48)
}

/// Synthetic teams for one stratum and size, with Cochran's sample size
/// taken over the `C(pool, size)` possible teams.
pub fn synthetic_teams(
    profiles: &[AuthorProfile],
    stratum: Option<GenderClass>,
    size: usize,
    config: &NullConfig,
) -> Result<Vec<TeamRecord>> {
    let seed = stratum_seed(config.seed, stratum, size);
    let sub_pool = |g: Gender| -> Vec<AuthorProfile> { profiles.iter().filter(|p| p.gender == g).cloned().collect() };
    let count_for = |pool: usize| cochran_sample_size(binomial(pool as u64, size as u64).max(1), config.confidence, config.margin);
    match stratum {
        None => randomize_teams(profiles, size, count_for(profiles.len())? as usize, seed),
        Some(GenderClass::FemaleOnly) => {
            let pool = sub_pool(Gender::F);
            randomize_teams(&pool, size, count_for(pool.len())? as usize, seed)
        }
        Some(GenderClass::MaleOnly) => {
            let pool = sub_pool(Gender::M);
            randomize_teams(&pool, size, count_for(pool.len())? as usize, seed)
        }
        Some(GenderClass::Mixed) => mixed_teams(profiles, size, count_for(profiles.len())? as usize, seed),
    }
}

/// Moments of a synthetic team list.
pub fn null_moments_of(teams: &[TeamRecord], profiles: &[AuthorProfile], disciplines: DisciplineCount) -> Result<SizeMoments> {
    let index = profile_index(profiles);
    let scores = teams
        .par_iter()
        .map(|t| team_diversity_indexed(t, &index, disciplines))
        .collect::<Result<Vec<_>>>()?;
    Ok(SizeMoments::from_scores(&scores))
}

/// Moments for every size (and stratum, when stratified) among `real`.
/// Teams with fewer than two profiled members have no defined metrics and
/// are skipped.
pub fn null_moments(real: &[TeamRecord], profiles: &[AuthorProfile], config: &NullConfig) -> Result<NullMoments> {
    let keys: BTreeSet<(Option<GenderClass>, usize)> = real
        .iter()
        .filter(|t| t.members.len() >= 2)
        .map(|t| (stratum_of(t, config.sampling), t.total_size))
        .collect();
    let entries = keys
        .into_par_iter()
        .map(|(stratum, size)| {
            let teams = synthetic_teams(profiles, stratum, size, config)?;
            let m = null_moments_of(&teams, profiles, config.disciplines)?;
            Ok(((stratum, size), m))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(NullMoments { entries })
}

fn stratum_of(team: &TeamRecord, sampling: Sampling) -> Option<GenderClass> {
    match sampling {
        Sampling::WholePool => None,
        Sampling::Stratified => Some(team.gender_class),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZScoreRecord {
    pub pub_id: String,
    pub gender_class: GenderClass,
    pub z_h: Option<f64>,
    pub z_s: Option<f64>,
}

fn z(value: Option<f64>, mu: Option<f64>, sigma: Option<f64>) -> Option<f64> {
    let (x, mu, sigma) = (value?, mu?, sigma?);
    (sigma > SIGMA_EPS).then(|| (x - mu) / sigma)
}

/// z-scores of real teams against their size's moments. `scores[i]` are the
/// diversity values of `teams[i]`.
pub fn z_scores(teams: &[TeamRecord], scores: &[TeamDiversity], moments: &NullMoments, sampling: Sampling) -> Result<Vec<ZScoreRecord>> {
    if teams.len() != scores.len() {
        return Err(Error::LengthMismatch(teams.len(), scores.len()));
    }
    teams
        .iter()
        .zip(scores)
        .map(|(t, s)| {
            let (z_h, z_s) = if s.entropy.is_none() && s.cosine.is_none() {
                (None, None)
            } else {
                let m = moments
                    .get(stratum_of(t, sampling), t.total_size)
                    .ok_or(Error::MissingTeamSize(t.total_size))?;
                (z(s.entropy, m.mu_h, m.sigma_h), z(s.cosine, m.mu_s, m.sigma_s))
            };
            Ok(ZScoreRecord { pub_id: t.pub_id.clone(), gender_class: t.gender_class, z_h, z_s })
        })
        .collect()
}

/// `pub_id, gender_class, z_H, z_S`.
pub fn z_table(records: &[ZScoreRecord]) -> MetricTable {
    let mut t = MetricTable::new(["pub_id", "gender_class", "z_H", "z_S"]);
    for r in records {
        t.push(vec![r.pub_id.as_str().into(), r.gender_class.as_str().into(), Value::opt(r.z_h), Value::opt(r.z_s)]);
    }
    t
}

pub fn write_z_csv(path: &Path, records: &[ZScoreRecord]) -> Result<()> {
    z_table(records).write_csv(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool(disciplines: &[usize], k: usize) -> Vec<AuthorProfile> {
        disciplines
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let mut v = vec![0.0; k];
                v[d] = 1.0;
                let g = if i % 2 == 0 { Gender::F } else { Gender::M };
                AuthorProfile::from_vector(format!("a{i:03}"), g, v, vec![], 0.05)
            })
            .collect()
    }

    #[test]
    fn cochran_examples() {
        assert_eq!(cochran_sample_size(10_000, 0.95, 0.01).unwrap(), 4900);
        assert_eq!(cochran_sample_size(1, 0.95, 0.01).unwrap(), 1);
        for n in [1, 2, 10, 1000, 1_000_000, u64::MAX] {
            assert!(cochran_sample_size(n, 0.95, 0.5).unwrap() <= 4);
        }
        assert!(cochran_sample_size(0, 0.95, 0.01).is_err());
        assert!(cochran_sample_size(10, 0.95, 0.0).is_err());
        // Large populations approach z^2 / (4 e^2) = 9604.
        assert_eq!(cochran_sample_size(u64::MAX, 0.95, 0.01).unwrap(), 9604);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(100_000, 6), u64::MAX);
        assert_eq!(binomial(52, 5), 2_598_960);
    }

    #[test]
    fn randomization_contract() {
        let p = pool(&[0, 1, 2], 3);
        for t in randomize_teams(&p, 3, 5, 1).unwrap() {
            assert_eq!(t.members, ["a000", "a001", "a002"]);
        }
        assert!(randomize_teams(&p, 4, 1, 1).is_err());
        assert_eq!(randomize_indices(3, 2, 50, 9).unwrap(), randomize_indices(3, 2, 50, 9).unwrap());

        let mut freq: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for t in randomize_indices(3, 2, 10_000, 4).unwrap() {
            *freq.entry(t).or_default() += 1;
        }
        assert_eq!(freq.len(), 3);
        for c in freq.values() {
            assert!((*c as f64 / 10_000.0 - 1.0 / 3.0).abs() < 0.02);
        }
    }

    #[test]
    fn moments_edge_cases() {
        let p = pool(&[0, 1], 2);
        let teams = randomize_teams(&p, 2, 20, 3).unwrap();
        let m = null_moments_of(&teams, &p, DisciplineCount::Global(2)).unwrap();
        assert_eq!((m.mu_h, m.sigma_h, m.mu_s, m.sigma_s), (Some(1.0), Some(0.0), Some(0.0), Some(0.0)));
        let one = null_moments_of(&teams[..1], &p, DisciplineCount::Global(2)).unwrap();
        assert_eq!(one.sigma_h, Some(0.0));
        assert_eq!(one.count, 1);
    }

    #[test]
    fn moments_match_enumeration_of_pairs() {
        // Four authors with disciplines A, A, B, C; all six pairs enumerated.
        let p = pool(&[0, 0, 1, 2], 4);
        let mut hs = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                hs.push(if p[i].primary_discipline == p[j].primary_discipline { 0.0 } else { 1.0 });
            }
        }
        let (mu, _) = mean_and_sd(hs).unwrap();
        assert!((mu - 5.0 / 6.0).abs() < 1e-12);
        let teams = randomize_teams(&p, 2, 20_000, 11).unwrap();
        let m = null_moments_of(&teams, &p, DisciplineCount::Global(4)).unwrap();
        assert!((m.mu_h.unwrap() - mu).abs() < 0.01);
    }

    #[test]
    fn z_definition() {
        let mut moments = NullMoments::default();
        moments.entries.insert((None, 3), SizeMoments { count: 10, mu_h: Some(0.5), sigma_h: Some(0.1), mu_s: Some(0.4), sigma_s: Some(0.0) });
        let p = pool(&[0, 1, 2], 3);
        let refs: Vec<&AuthorProfile> = p.iter().collect();
        let team = TeamRecord::from_profiles("x".into(), 2010, &refs, 3).unwrap();
        let scores = [TeamDiversity { entropy: Some(0.7), cosine: Some(0.4) }];
        let z = z_scores(std::slice::from_ref(&team), &scores, &moments, Sampling::WholePool).unwrap();
        assert!((z[0].z_h.unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(z[0].z_s, None);
        let at_mean = [TeamDiversity { entropy: Some(0.5), cosine: None }];
        assert_eq!(z_scores(std::slice::from_ref(&team), &at_mean, &moments, Sampling::WholePool).unwrap()[0].z_h, Some(0.0));

        let mut wide = team.clone();
        wide.total_size = 7;
        assert!(matches!(z_scores(&[wide], &scores, &moments, Sampling::WholePool), Err(Error::MissingTeamSize(7))));
    }

    #[test]
    fn full_null_is_deterministic_and_stratifies() {
        let p = pool(&(0..40).map(|i| i % 4).collect::<Vec<_>>(), 4);
        let refs: Vec<&AuthorProfile> = p.iter().take(3).collect();
        let real = vec![
            TeamRecord::from_profiles("r1".into(), 2010, &refs, 3).unwrap(),
            TeamRecord::from_profiles("r2".into(), 2010, &[&p[0], &p[2]], 2).unwrap(),
        ];
        let mut config = NullConfig::new(5, DisciplineCount::Global(4));
        let a = null_moments(&real, &p, &config).unwrap();
        assert_eq!(a, null_moments(&real, &p, &config).unwrap());
        assert_eq!(a.entries.len(), 2);
        assert_eq!(a.get(None, 2).unwrap().count, cochran_sample_size(binomial(40, 2), 0.95, 0.01).unwrap() as usize);

        config.sampling = Sampling::Stratified;
        let s = null_moments(&real, &p, &config).unwrap();
        assert!(s.get(Some(GenderClass::Mixed), 3).is_some());
        assert!(s.get(Some(GenderClass::FemaleOnly), 2).is_some());
        let f_only = synthetic_teams(&p, Some(GenderClass::FemaleOnly), 2, &config).unwrap();
        assert!(f_only.iter().all(|t| t.gender_class == GenderClass::FemaleOnly));
        let mixed = synthetic_teams(&p, Some(GenderClass::Mixed), 3, &config).unwrap();
        assert!(mixed.iter().all(|t| t.gender_class == GenderClass::Mixed));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn teams_have_distinct_members(pool_size in 1usize..30, frac in 0.0f64..1.0, seed in any::<u64>()) {
                let size = ((pool_size as f64 * frac) as usize).max(1);
                for t in randomize_indices(pool_size, size, 20, seed).unwrap() {
                    prop_assert_eq!(t.len(), size);
                    prop_assert!(t.windows(2).all(|w| w[0] < w[1]));
                    prop_assert!(t.iter().all(|&i| i < pool_size));
                }
            }

            #[test]
            fn moments_ignore_team_order(seed in any::<u64>()) {
                let p = pool(&[0, 1, 2, 3, 0, 1, 2, 0], 4);
                let mut teams = randomize_teams(&p, 3, 30, seed).unwrap();
                let a = null_moments_of(&teams, &p, DisciplineCount::Global(4)).unwrap();
                teams.reverse();
                let b = null_moments_of(&teams, &p, DisciplineCount::Global(4)).unwrap();
                prop_assert!((a.mu_h.unwrap() - b.mu_h.unwrap()).abs() < 1e-12);
                prop_assert!((a.sigma_s.unwrap() - b.sigma_s.unwrap()).abs() < 1e-12);
            }
        }
    }
}
