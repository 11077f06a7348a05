//! Co-authorship graph and publication teams.
//!
//! The author-publication incidence is projected onto authors: every pair of
//! F/M co-authors on a publication gets an edge, and repeated collaboration
//! increments the edge weight. U authors never become nodes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Gender, PublicationRecord};
use crate::error::{Error, Result};
use crate::profiles::{profile_index, AuthorProfile};
use crate::table::MetricTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeType {
    FF,
    FM,
    MM,
}

impl EdgeType {
    pub const ALL: [EdgeType; 3] = [EdgeType::FF, EdgeType::FM, EdgeType::MM];

    /// `None` if either endpoint is U.
    pub fn of(a: Gender, b: Gender) -> Option<Self> {
        match (a, b) {
            (Gender::F, Gender::F) => Some(EdgeType::FF),
            (Gender::M, Gender::M) => Some(EdgeType::MM),
            (Gender::F, Gender::M) | (Gender::M, Gender::F) => Some(EdgeType::FM),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeType::FF => "FF",
            EdgeType::FM => "FM",
            EdgeType::MM => "MM",
        }
    }
}

impl fmt::Display for EdgeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EdgeType {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "FF" => Ok(EdgeType::FF),
            "FM" | "MF" => Ok(EdgeType::FM),
            "MM" => Ok(EdgeType::MM),
            other => Err(format!("unknown edge type {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub author_id: String,
    pub gender: Gender,
}

/// Undirected edge between node indices `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: u32,
    pub edge_type: EdgeType,
}

/// Nodes are sorted by author id; edges by `(a, b)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CollabGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

impl CollabGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn index_of(&self, author_id: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.author_id.as_str().cmp(author_id)).ok()
    }

    /// Sorted neighbour lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
        adj.iter_mut().for_each(|l| l.sort_unstable());
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for e in &self.edges {
            deg[e.a] += 1;
            deg[e.b] += 1;
        }
        deg
    }

    pub fn edge_type_counts(&self) -> BTreeMap<EdgeType, usize> {
        let mut counts = BTreeMap::new();
        for e in &self.edges {
            *counts.entry(e.edge_type).or_default() += 1;
        }
        counts
    }

    /// Subgraph induced by `keep` (node indices into `self`).
    pub fn induced(&self, keep: &[usize]) -> CollabGraph {
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_by(|&x, &y| self.nodes[x].author_id.cmp(&self.nodes[y].author_id));
        kept.dedup();
        let remap: HashMap<usize, usize> = kept.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let nodes = kept.iter().map(|&i| self.nodes[i].clone()).collect();
        let mut edges: Vec<Edge> = self
            .edges
            .iter()
            .filter_map(|e| {
                let (a, b) = (*remap.get(&e.a)?, *remap.get(&e.b)?);
                Some(Edge { a: a.min(b), b: a.max(b), ..*e })
            })
            .collect();
        edges.sort_by_key(|e| (e.a, e.b));
        CollabGraph { nodes, edges }
    }

    /// Build from explicit node and edge lists (ids, not indices).
    pub fn from_parts(nodes: Vec<Node>, edges: &[(String, String, u32)]) -> Result<Self> {
        let mut nodes = nodes;
        nodes.sort_by(|x, y| x.author_id.cmp(&y.author_id));
        nodes.dedup_by(|x, y| x.author_id == y.author_id);
        let mut graph = CollabGraph { nodes, edges: Vec::new() };
        let mut acc: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        for (src, dst, w) in edges {
            let a = graph.index_of(src).ok_or_else(|| Error::InvalidParameter(format!("edge endpoint {src} is not a node")))?;
            let b = graph.index_of(dst).ok_or_else(|| Error::InvalidParameter(format!("edge endpoint {dst} is not a node")))?;
            if a == b {
                return Err(Error::InvalidParameter(format!("self-loop on {src}")));
            }
            *acc.entry((a.min(b), a.max(b))).or_default() += w;
        }
        graph.edges = acc
            .into_iter()
            .map(|((a, b), weight)| {
                let edge_type = EdgeType::of(graph.nodes[a].gender, graph.nodes[b].gender)
                    .ok_or_else(|| Error::InvalidParameter("edge touches a U node".into()))?;
                Ok(Edge { a, b, weight, edge_type })
            })
            .collect::<Result<_>>()?;
        Ok(graph)
    }

    /// Node CSV `author_id,gender` and edge CSV `src,dst,weight,type`.
    pub fn write_csv(&self, nodes_path: &Path, edges_path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(nodes_path)?;
        w.write_record(["author_id", "gender"])?;
        for n in &self.nodes {
            w.write_record([n.author_id.as_str(), n.gender.as_str()])?;
        }
        w.flush().map_err(|e| Error::io(nodes_path, e))?;

        let mut w = csv::Writer::from_path(edges_path)?;
        w.write_record(["src", "dst", "weight", "type"])?;
        for e in &self.edges {
            w.write_record([
                self.nodes[e.a].author_id.as_str(),
                self.nodes[e.b].author_id.as_str(),
                &e.weight.to_string(),
                e.edge_type.as_str(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(edges_path, e))
    }

    pub fn read_csv(nodes_path: &Path, edges_path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct EdgeRow {
            src: String,
            dst: String,
            weight: u32,
        }
        let mut nodes = Vec::new();
        for row in csv::Reader::from_path(nodes_path)?.deserialize() {
            let node: Node = row?;
            nodes.push(node);
        }
        let mut edges = Vec::new();
        for row in csv::Reader::from_path(edges_path)?.deserialize() {
            let e: EdgeRow = row?;
            edges.push((e.src, e.dst, e.weight));
        }
        Self::from_parts(nodes, &edges)
    }
}

/// Clique-expand every publication over its F/M authors.
pub fn project(records: &[PublicationRecord]) -> CollabGraph {
    let mut genders: BTreeMap<&str, Gender> = BTreeMap::new();
    for a in records.iter().flat_map(|r| r.known_authors()) {
        genders.entry(a.author_id.as_str()).or_insert(a.gender);
    }
    let nodes: Vec<Node> = genders
        .iter()
        .map(|(id, g)| Node { author_id: id.to_string(), gender: *g })
        .collect();
    let index: HashMap<&str, usize> = genders.keys().enumerate().map(|(i, id)| (*id, i)).collect();

    let mut weights: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    for r in records {
        let members: BTreeSet<usize> = r.known_authors().map(|a| index[a.author_id.as_str()]).collect();
        let members: Vec<usize> = members.into_iter().collect();
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                *weights.entry((a, b)).or_default() += 1;
            }
        }
    }
    let edges = weights
        .into_iter()
        .map(|((a, b), weight)| Edge {
            a,
            b,
            weight,
            edge_type: EdgeType::of(nodes[a].gender, nodes[b].gender).expect("U authors are never nodes"),
        })
        .collect();
    CollabGraph { nodes, edges }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenderClass {
    FemaleOnly,
    MaleOnly,
    Mixed,
}

impl GenderClass {
    pub const ALL: [GenderClass; 3] = [GenderClass::FemaleOnly, GenderClass::MaleOnly, GenderClass::Mixed];

    /// `None` when no F/M gender is present.
    pub fn of<I: IntoIterator<Item = Gender>>(genders: I) -> Option<Self> {
        let (mut f, mut m) = (false, false);
        for g in genders {
            match g {
                Gender::F => f = true,
                Gender::M => m = true,
                Gender::U => {}
            }
        }
        match (f, m) {
            (true, true) => Some(GenderClass::Mixed),
            (true, false) => Some(GenderClass::FemaleOnly),
            (false, true) => Some(GenderClass::MaleOnly),
            (false, false) => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GenderClass::FemaleOnly => "female_only",
            GenderClass::MaleOnly => "male_only",
            GenderClass::Mixed => "mixed",
        }
    }
}

impl fmt::Display for GenderClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GenderClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        GenderClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown gender class {s:?}"))
    }
}

/// Which authors count towards a team's size `|p|`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TeamSizeRule {
    /// Every listed author, U included.
    #[default]
    AllListed,
    /// Only F/M authors.
    KnownOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamRecord {
    pub pub_id: String,
    pub year: i32,
    /// Profiled F/M members, sorted.
    pub members: Vec<String>,
    pub total_size: usize,
    pub gender_class: GenderClass,
    /// Primary discipline → fraction of members.
    pub discipline_fractions: BTreeMap<usize, f64>,
}

impl TeamRecord {
    pub fn from_profiles(pub_id: String, year: i32, members: &[&AuthorProfile], total_size: usize) -> Option<Self> {
        let gender_class = GenderClass::of(members.iter().map(|p| p.gender))?;
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for p in members {
            *counts.entry(p.primary_discipline).or_default() += 1;
        }
        let m = members.len() as f64;
        let mut ids: Vec<String> = members.iter().map(|p| p.author_id.clone()).collect();
        ids.sort();
        Some(TeamRecord {
            pub_id,
            year,
            members: ids,
            total_size,
            gender_class,
            discipline_fractions: counts.into_iter().map(|(d, c)| (d, c as f64 / m)).collect(),
        })
    }
}

/// One team per publication. Members are the profiled F/M authors; a
/// publication with none of them is skipped with a warning.
pub fn extract_teams(records: &[PublicationRecord], profiles: &[AuthorProfile], rule: TeamSizeRule) -> Vec<TeamRecord> {
    let index = profile_index(profiles);
    let mut teams = Vec::with_capacity(records.len());
    for r in records {
        let mut seen = BTreeSet::new();
        let members: Vec<&AuthorProfile> = r
            .known_authors()
            .filter(|a| seen.insert(a.author_id.as_str()))
            .filter_map(|a| index.get(a.author_id.as_str()).copied())
            .collect();
        let total_size = match rule {
            TeamSizeRule::AllListed => r.authors.len(),
            TeamSizeRule::KnownOnly => r.known_authors().count(),
        };
        match TeamRecord::from_profiles(r.pub_id.clone(), r.year, &members, total_size) {
            Some(team) => teams.push(team),
            None => log::warn!("publication {} has no profiled F/M author; team skipped", r.pub_id),
        }
    }
    teams
}

/// `pub_id, size, gender_class, members` (members `;`-joined).
pub fn write_teams_csv(path: &Path, teams: &[TeamRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["pub_id", "size", "gender_class", "members"])?;
    for t in teams {
        w.write_record([
            t.pub_id.as_str(),
            &t.total_size.to_string(),
            t.gender_class.as_str(),
            &t.members.join(";"),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Per year and gender: mean distinct F/M co-authors per paper (per author,
/// then averaged over authors) and mean team size of papers featuring that
/// gender. Years without papers produce no rows.
pub fn degree_stats(records: &[PublicationRecord]) -> MetricTable {
    // (year, gender) -> author -> (distinct co-authors, papers)
    let mut per_author: BTreeMap<(i32, Gender), BTreeMap<&str, (BTreeSet<&str>, usize)>> = BTreeMap::new();
    let mut team_sizes: BTreeMap<(i32, Gender), (usize, usize)> = BTreeMap::new();
    for r in records {
        let known: BTreeMap<&str, Gender> = r.known_authors().map(|a| (a.author_id.as_str(), a.gender)).collect();
        for (&id, &g) in &known {
            let entry = per_author.entry((r.year, g)).or_default().entry(id).or_default();
            entry.0.extend(known.keys().filter(|&&other| other != id));
            entry.1 += 1;
        }
        for g in known.values().copied().collect::<BTreeSet<_>>() {
            let e = team_sizes.entry((r.year, g)).or_default();
            e.0 += r.authors.len();
            e.1 += 1;
        }
    }
    let mut table = MetricTable::new(["year", "gender", "authors", "papers", "avg_distinct_coauthors_per_paper", "avg_team_size"]);
    for ((year, gender), authors) in &per_author {
        let n = authors.len() as f64;
        let avg = authors.values().map(|(co, papers)| co.len() as f64 / *papers as f64).sum::<f64>() / n;
        let (size_sum, papers) = team_sizes[&(*year, *gender)];
        table.push(vec![
            (*year).into(),
            gender.as_str().into(),
            authors.len().into(),
            papers.into(),
            avg.into(),
            (size_sum as f64 / papers as f64).into(),
        ]);
    }
    table
}

/// Per year: count and percentage of co-author pairs by type, one pair per
/// publication.
pub fn collaboration_type_shares(records: &[PublicationRecord]) -> MetricTable {
    let mut counts: BTreeMap<i32, BTreeMap<EdgeType, usize>> = BTreeMap::new();
    for r in records {
        let known: BTreeMap<&str, Gender> = r.known_authors().map(|a| (a.author_id.as_str(), a.gender)).collect();
        let genders: Vec<Gender> = known.values().copied().collect();
        let year = counts.entry(r.year).or_default();
        for (i, &a) in genders.iter().enumerate() {
            for &b in &genders[i + 1..] {
                *year.entry(EdgeType::of(a, b).expect("known genders")).or_default() += 1;
            }
        }
    }
    let mut table = MetricTable::new(["year", "type", "pairs", "share_pct"]);
    for (year, by_type) in counts {
        let total: usize = by_type.values().sum();
        if total == 0 {
            continue;
        }
        for t in EdgeType::ALL {
            let c = by_type.get(&t).copied().unwrap_or(0);
            table.push(vec![year.into(), t.as_str().into(), c.into(), (100.0 * c as f64 / total as f64).into()]);
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::AuthorRef;
    use crate::table::Value;

    pub(crate) fn rec(id: &str, year: i32, authors: &[(&str, Gender)]) -> PublicationRecord {
        PublicationRecord {
            pub_id: id.into(),
            title: "t".into(),
            abstract_text: "a".into(),
            year,
            citation_count: 0,
            authors: authors
                .iter()
                .map(|(a, g)| AuthorRef { author_id: a.to_string(), full_name: a.to_string(), gender: *g })
                .collect(),
        }
    }

    fn profile(id: &str, g: Gender, primary: usize) -> AuthorProfile {
        let mut v = vec![0.0; 4];
        v[primary] = 1.0;
        AuthorProfile::from_vector(id.into(), g, v, vec![], 0.05)
    }

    use Gender::{F, M, U};

    #[test]
    fn clique_expansion() {
        let g = project(&[rec("p", 2010, &[("a", F), ("b", M), ("c", M)])]);
        let edges: Vec<_> = g
            .edges
            .iter()
            .map(|e| (g.nodes[e.a].author_id.as_str(), g.nodes[e.b].author_id.as_str(), e.edge_type, e.weight))
            .collect();
        assert_eq!(edges, [("a", "b", EdgeType::FM, 1), ("a", "c", EdgeType::FM, 1), ("b", "c", EdgeType::MM, 1)]);
    }

    #[test]
    fn weights_accumulate_and_u_is_ignored() {
        let g = project(&[
            rec("p1", 2010, &[("a", F), ("b", M)]),
            rec("p2", 2011, &[("b", M), ("a", F), ("u", U)]),
            rec("p3", 2011, &[("solo", M)]),
        ]);
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.edges[0].weight, 2);
        assert!(g.index_of("u").is_none());
        assert_eq!(g.degrees()[g.index_of("solo").unwrap()], 0);
    }

    #[test]
    fn csv_roundtrip_and_induced() {
        let g = project(&[rec("p1", 2010, &[("a", F), ("b", M), ("c", F)]), rec("p2", 2010, &[("a", F), ("b", M)])]);
        let dir = tempfile::tempdir().unwrap();
        let (np, ep) = (dir.path().join("n.csv"), dir.path().join("e.csv"));
        g.write_csv(&np, &ep).unwrap();
        assert_eq!(CollabGraph::read_csv(&np, &ep).unwrap(), g);

        let sub = g.induced(&[2, 0]);
        assert_eq!(sub.nodes.iter().map(|n| n.author_id.as_str()).collect::<Vec<_>>(), ["a", "c"]);
        assert_eq!(sub.edges, [Edge { a: 0, b: 1, weight: 1, edge_type: EdgeType::FF }]);
        assert!(g.induced(&[]).nodes.is_empty());
    }

    #[test]
    fn team_classes_and_fractions() {
        let profiles = vec![profile("a", F, 0), profile("b", F, 0), profile("c", M, 1), profile("d", M, 2)];
        let records = [
            rec("ff", 2010, &[("a", F), ("b", F)]),
            rec("fmm", 2010, &[("a", F), ("c", M), ("d", M), ("u", U)]),
            rec("none", 2010, &[("zz", M)]),
        ];
        let teams = extract_teams(&records, &profiles, TeamSizeRule::AllListed);
        assert_eq!(teams.len(), 2);
        assert_eq!(teams[0].gender_class, GenderClass::FemaleOnly);
        assert_eq!(teams[1].gender_class, GenderClass::Mixed);
        assert_eq!(teams[1].total_size, 4);
        assert_eq!(teams[1].members, ["a", "c", "d"]);
        let known = extract_teams(&records, &profiles, TeamSizeRule::KnownOnly);
        assert_eq!(known[1].total_size, 3);

        let quad = [profile("a", F, 0), profile("b", F, 0), profile("c", M, 1), profile("d", M, 2)];
        let refs: Vec<&AuthorProfile> = quad.iter().collect();
        let t = TeamRecord::from_profiles("x".into(), 2010, &refs, 4).unwrap();
        assert_eq!(t.discipline_fractions, BTreeMap::from([(0, 0.5), (1, 0.25), (2, 0.25)]));
    }

    #[test]
    fn degree_stats_examples() {
        let t = degree_stats(&[rec("p", 2010, &[("a", F), ("b", M)])]);
        assert_eq!(t.len(), 2);
        for row in &t.rows {
            assert_eq!(row[4], Value::Real(1.0));
            assert_eq!(row[5], Value::Real(2.0));
        }
        let t = degree_stats(&[rec("p1", 2010, &[("a", F), ("b", F)]), rec("p2", 2010, &[("a", F), ("c", F)])]);
        // a: 2 distinct / 2 papers = 1; b, c: 1 / 1
        assert_eq!(t.rows[0][4], Value::Real(1.0));
        assert!(degree_stats(&[]).is_empty());
    }

    #[test]
    fn collaboration_shares() {
        let t = collaboration_type_shares(&[rec("p", 2010, &[("a", F), ("b", M), ("c", M)])]);
        let shares: Vec<f64> = t.numbers("share_pct").unwrap().into_iter().flatten().collect();
        assert!((shares[0] - 0.0).abs() < 1e-12);
        assert!((shares[1] - 200.0 / 3.0).abs() < 1e-9);
        assert!((shares[2] - 100.0 / 3.0).abs() < 1e-9);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_records() -> impl Strategy<Value = Vec<PublicationRecord>> {
            prop::collection::vec(prop::collection::btree_set(0usize..8, 1..5), 0..12).prop_map(|pubs| {
                pubs.into_iter()
                    .enumerate()
                    .map(|(i, members)| {
                        let authors: Vec<(String, Gender)> = members
                            .into_iter()
                            .map(|m| (format!("n{m}"), [F, M, U][m % 3]))
                            .collect();
                        let refs: Vec<(&str, Gender)> = authors.iter().map(|(a, g)| (a.as_str(), *g)).collect();
                        rec(&format!("p{i}"), 2010, &refs)
                    })
                    .collect()
            })
        }

        proptest! {
            #[test]
            fn weights_match_brute_force(records in arb_records()) {
                let g = project(&records);
                let mut total = 0;
                for e in &g.edges {
                    prop_assert!(e.a < e.b && e.weight >= 1);
                    let (x, y) = (&g.nodes[e.a], &g.nodes[e.b]);
                    prop_assert_eq!(Some(e.edge_type), EdgeType::of(x.gender, y.gender));
                    let joint = records.iter().filter(|r| {
                        r.authors.iter().any(|a| a.author_id == x.author_id)
                            && r.authors.iter().any(|a| a.author_id == y.author_id)
                    }).count();
                    prop_assert_eq!(e.weight as usize, joint);
                    total += 1;
                }
                prop_assert_eq!(g.edge_type_counts().values().sum::<usize>(), total);
            }
        }
    }
}
