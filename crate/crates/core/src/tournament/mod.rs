//! Finite digraphs and tournaments on `[n] = {1, ..., n}`.
//!
//! A [`Digraph`] is an antisymmetric relation without loops; a
//! [`Tournament`] additionally orients every pair of distinct vertices.
//! Vertices are 1-based throughout the public API. Internally the relation
//! is a dense bit matrix, which keeps the 2059-vertex universal prefix small.

mod universal;

use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::rng;

pub use universal::{universal_prefix, MAX_EXTENSION_BASE, MAX_UNIVERSAL_SIZE};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TournamentError {
    #[error("vertex count must be at least 1")]
    NoVertices,
    #[error("edge ({0},{1}) references a vertex outside 1..={2}")]
    VertexOutOfRange(usize, usize, usize),
    #[error("edge ({0},{1}) listed more than once")]
    DuplicateEdge(usize, usize),
    #[error("self loop at vertex {0}")]
    SelfLoop(usize),
    #[error("both ({0},{1}) and ({1},{0}) present")]
    BothDirections(usize, usize),
    #[error("pair {{{0},{1}}} is not oriented")]
    MissingEdge(usize, usize),
    #[error("not a permutation of 1..={0}")]
    NotAPermutation(usize),
    #[error("subset must be nonempty")]
    EmptySubset,
    #[error("subset contains vertex {0} outside 1..={1} or repeats it")]
    BadSubset(usize, usize),
    #[error("construction too large: {0}")]
    TooLarge(String),
    #[error("unknown preset {0:?} (known: cycle3, rps5)")]
    UnknownPreset(String),
    #[error("malformed tournament JSON: {0}")]
    Json(String),
}

/// Dense antisymmetric relation shared by [`Digraph`] and [`Tournament`].
#[derive(Clone, PartialEq, Eq, Hash)]
struct Relation {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl Relation {
    fn empty(n: usize) -> Self {
        let words = n.div_ceil(64);
        Relation { n, words, bits: vec![0; n * words] }
    }

    /// 0-based query.
    #[inline]
    fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
    }

    fn from_pairs(n: usize, edges: &[(usize, usize)]) -> Result<Self, TournamentError> {
        if n == 0 {
            return Err(TournamentError::NoVertices);
        }
        let mut rel = Relation::empty(n);
        for &(i, j) in edges {
            if i == 0 || j == 0 || i > n || j > n {
                return Err(TournamentError::VertexOutOfRange(i, j, n));
            }
            if i == j {
                return Err(TournamentError::SelfLoop(i));
            }
            if rel.get(i - 1, j - 1) {
                return Err(TournamentError::DuplicateEdge(i, j));
            }
            if rel.get(j - 1, i - 1) {
                return Err(TournamentError::BothDirections(j, i));
            }
            rel.set(i - 1, j - 1);
        }
        Ok(rel)
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if self.get(i, j) {
                    out.push((i + 1, j + 1));
                }
            }
        }
        out
    }

    fn first_unoriented(&self) -> Option<(usize, usize)> {
        for i in 0..self.n {
            for j in i + 1..self.n {
                if !self.get(i, j) && !self.get(j, i) {
                    return Some((i + 1, j + 1));
                }
            }
        }
        None
    }

    fn out_degree(&self, i: usize) -> usize {
        self.bits[i * self.words..(i + 1) * self.words].iter().map(|w| w.count_ones() as usize).sum()
    }

    fn edge_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// Antisymmetric, loop-free relation on `[n]`; pairs may be unoriented.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Digraph(Relation);

/// Digraph in which every pair of distinct vertices is oriented exactly once.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Tournament(Relation);

impl Digraph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, TournamentError> {
        Relation::from_pairs(n, edges).map(Digraph)
    }

    /// Builds the digraph with `i -> j` whenever `beats(i, j)` (1-based).
    pub fn from_fn(n: usize, mut beats: impl FnMut(usize, usize) -> bool) -> Self {
        let mut rel = Relation::empty(n);
        for i in 1..=n {
            for j in 1..=n {
                if i != j && beats(i, j) {
                    assert!(!rel.get(j - 1, i - 1), "relation is not antisymmetric at ({i},{j})");
                    rel.set(i - 1, j - 1);
                }
            }
        }
        Digraph(rel)
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.0.get(i - 1, j - 1)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.0.edges()
    }

    pub fn edge_count(&self) -> usize {
        self.0.edge_count()
    }

    /// Pairs `{i, j}` (with `i < j`) that carry no edge.
    pub fn unoriented_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 1..=self.n() {
            for j in i + 1..=self.n() {
                if !self.has_edge(i, j) && !self.has_edge(j, i) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn is_tournament(&self) -> bool {
        self.0.first_unoriented().is_none()
    }

    pub fn into_tournament(self) -> Result<Tournament, TournamentError> {
        match self.0.first_unoriented() {
            Some((i, j)) => Err(TournamentError::MissingEdge(i, j)),
            None => Ok(Tournament(self.0)),
        }
    }

    pub fn to_file(&self) -> TournamentFile {
        TournamentFile { n: self.n(), edges: self.edges(), partial: Some(true) }
    }
}

impl Tournament {
    /// Validates `edges` as a tournament on `[n]`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, TournamentError> {
        Digraph::from_edges(n, edges)?.into_tournament()
    }

    /// Tournament with `i -> j` exactly when `i < j` and `beats(i, j)`, or
    /// `i > j` and `!beats(j, i)`.
    pub fn from_upper(n: usize, mut beats: impl FnMut(usize, usize) -> bool) -> Self {
        let mut rel = Relation::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                if beats(i + 1, j + 1) {
                    rel.set(i, j);
                } else {
                    rel.set(j, i);
                }
            }
        }
        Tournament(rel)
    }

    /// The only tournament on one vertex.
    pub fn trivial() -> Self {
        Tournament(Relation::empty(1))
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    /// `true` when `i -> j`.
    pub fn beats(&self, i: usize, j: usize) -> bool {
        i != j && self.0.get(i - 1, j - 1)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.0.edges()
    }

    pub fn edge_count(&self) -> usize {
        self.0.edge_count()
    }

    /// Output set `R(i)`.
    pub fn out_set(&self, i: usize) -> Vec<usize> {
        (1..=self.n()).filter(|&j| self.beats(i, j)).collect()
    }

    /// Input set `R^{-1}(i)`.
    pub fn in_set(&self, i: usize) -> Vec<usize> {
        (1..=self.n()).filter(|&j| self.beats(j, i)).collect()
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.0.out_degree(i - 1)
    }

    pub fn as_digraph(&self) -> Digraph {
        Digraph(self.0.clone())
    }

    pub fn reverse(&self) -> Tournament {
        let n = self.n();
        let mut rel = Relation::empty(n);
        for i in 0..n {
            for j in 0..n {
                if self.0.get(i, j) {
                    rel.set(j, i);
                }
            }
        }
        Tournament(rel)
    }

    /// Relabels vertex `i` as `perm[i - 1]`, so `(i, j)` becomes
    /// `(perm[i-1], perm[j-1])`.
    pub fn permute(&self, perm: &[usize]) -> Result<Tournament, TournamentError> {
        let n = self.n();
        let mut seen = vec![false; n];
        if perm.len() != n {
            return Err(TournamentError::NotAPermutation(n));
        }
        for &p in perm {
            if p == 0 || p > n || seen[p - 1] {
                return Err(TournamentError::NotAPermutation(n));
            }
            seen[p - 1] = true;
        }
        let mut rel = Relation::empty(n);
        for i in 0..n {
            for j in 0..n {
                if self.0.get(i, j) {
                    rel.set(perm[i] - 1, perm[j] - 1);
                }
            }
        }
        Ok(Tournament(rel))
    }

    /// Restriction to `subset`, relabelled order-preservingly to `1..=|subset|`.
    pub fn restrict(&self, subset: &[usize]) -> Result<Tournament, TournamentError> {
        if subset.is_empty() {
            return Err(TournamentError::EmptySubset);
        }
        let verts = sorted_subset(subset, self.n())?;
        let m = verts.len();
        let mut rel = Relation::empty(m);
        for (a, &i) in verts.iter().enumerate() {
            for (b, &j) in verts.iter().enumerate() {
                if self.0.get(i - 1, j - 1) {
                    rel.set(a, b);
                }
            }
        }
        Ok(Tournament(rel))
    }

    /// Restriction to the prefix `1..=m`.
    pub fn restrict_prefix(&self, m: usize) -> Result<Tournament, TournamentError> {
        let subset: Vec<usize> = (1..=m).collect();
        self.restrict(&subset)
    }

    /// Adds a vertex `v_J` for every `J ⊆ [n]` that beats exactly `J`.
    ///
    /// `v_J` gets label `n + 1 + key(J)` where `key(J) = Σ_{i∈J} 2^(n-i)`,
    /// i.e. the value of the membership bit string `b_1 b_2 … b_n` read with
    /// vertex 1 as the most significant bit. Among the new vertices the
    /// higher label wins, which orients `v_J -> v_K` exactly when the bit
    /// string of `J` is lexicographically greater than that of `K`. Any
    /// other orientation of the new vertices would serve equally well; this
    /// one is fixed so outputs are reproducible.
    pub fn simple_extend(&self) -> Result<Tournament, TournamentError> {
        universal::simple_extend(self)
    }

    /// Checks that every `J ⊆ S0` is chosen by some vertex outside `S0`.
    ///
    /// On success the returned witnesses are indexed by subset mask, bit
    /// `k` of the mask standing for `s0[k]`.
    pub fn check_simple_extension_property(&self, s0: &[usize]) -> Result<Option<Vec<usize>>, TournamentError> {
        universal::check_simple_extension_property(self, s0)
    }

    pub fn to_file(&self) -> TournamentFile {
        TournamentFile { n: self.n(), edges: self.edges(), partial: None }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("tournament serializes")
    }

    pub fn from_json(json: &str) -> Result<Self, TournamentError> {
        match read_relation_json(json)? {
            RelationFile::Tournament(t) => Ok(t),
            RelationFile::Digraph(d) => d.into_tournament(),
        }
    }
}

fn sorted_subset(subset: &[usize], n: usize) -> Result<Vec<usize>, TournamentError> {
    let mut verts = subset.to_vec();
    verts.sort_unstable();
    for w in verts.windows(2) {
        if w[0] == w[1] {
            return Err(TournamentError::BadSubset(w[0], n));
        }
    }
    if let Some(&v) = verts.iter().find(|&&v| v == 0 || v > n) {
        return Err(TournamentError::BadSubset(v, n));
    }
    Ok(verts)
}

impl fmt::Debug for Tournament {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tournament(n={}, edges={:?})", self.n(), self.edges())
    }
}

impl fmt::Debug for Digraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digraph(n={}, edges={:?})", self.n(), self.edges())
    }
}

impl PartialEq<Tournament> for Digraph {
    fn eq(&self, other: &Tournament) -> bool {
        self.0 == other.0
    }
}

impl PartialEq<Digraph> for Tournament {
    fn eq(&self, other: &Digraph) -> bool {
        self.0 == other.0
    }
}

/// On-disk form: `{"n": 3, "edges": [[1,2],[2,3],[3,1]]}`, with
/// `"partial": true` marking a digraph that need not be complete.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TournamentFile {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partial: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RelationFile {
    Tournament(Tournament),
    Digraph(Digraph),
}

pub fn read_relation_json(json: &str) -> Result<RelationFile, TournamentError> {
    let file: TournamentFile = serde_json::from_str(json).map_err(|e| TournamentError::Json(e.to_string()))?;
    let digraph = Digraph::from_edges(file.n, &file.edges)?;
    if file.partial == Some(true) {
        Ok(RelationFile::Digraph(digraph))
    } else {
        digraph.into_tournament().map(RelationFile::Tournament)
    }
}

/// Named tournaments: `cycle3` (1→2→3→1) and `rps5`, the regular tournament
/// on five vertices labelled to match the A..E partition example.
pub fn preset(name: &str) -> Result<Tournament, TournamentError> {
    match name {
        "cycle3" => Tournament::from_edges(3, &[(1, 2), (2, 3), (3, 1)]),
        "rps5" => {
            Tournament::from_edges(5, &[(1, 3), (1, 5), (2, 1), (2, 4), (3, 2), (3, 4), (4, 1), (4, 5), (5, 2), (5, 3)])
        }
        other => Err(TournamentError::UnknownPreset(other.to_string())),
    }
}

pub const PRESETS: &[&str] = &["cycle3", "rps5"];

/// Orients each pair `i < j` with one fair bit, pairs taken in
/// lexicographic order.
pub fn random(n: usize, seed: u64) -> Tournament {
    assert!(n >= 1, "random tournament needs at least one vertex");
    let mut rng = rng::seeded(seed);
    Tournament::from_upper(n, |_, _| rng::fair_bit(&mut rng))
}

/// Number of labelled tournaments on `[n]`, `2^(n(n-1)/2)`.
pub fn count(n: usize) -> BigUint {
    BigUint::from(1u8) << (n * n.saturating_sub(1) / 2)
}

/// All `2^(n(n-1)/2)` labelled tournaments on `[n]`, in mask order.
pub fn enumerate(n: usize) -> impl Iterator<Item = Tournament> {
    let pairs = n * n.saturating_sub(1) / 2;
    assert!(pairs < 32, "enumeration is limited to n <= 8");
    (0u64..1 << pairs).map(move |mask| {
        let mut bit = 0;
        Tournament::from_upper(n, |_, _| {
            let b = mask >> bit & 1 == 1;
            bit += 1;
            b
        })
    })
}
