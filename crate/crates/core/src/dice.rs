//! Integer dice: exact beat probabilities, quantization of distribution
//! functions, properness and block extension.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::homeo::{self, DistributionFunction, HomeoError, QuadratureConfig};
use crate::rational::Rational;
use crate::synth::{self, SynthError, DEFAULT_EPS};
use crate::tournament::{Digraph, Tournament};

/// Largest quantization size tried by default.
pub const DEFAULT_MAX_N: usize = 4096;
/// First quantization size of the escalation schedule.
pub const FIRST_N: usize = 16;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiceError {
    #[error("a die needs at least one face")]
    NoFaces,
    #[error("face values must be at least 1")]
    ZeroFace,
    #[error("dice have different numbers of sides ({0} and {1})")]
    SideMismatch(usize, usize),
    #[error("a set needs at least one die")]
    EmptySet,
    #[error("quantization needs an even number of sides, got {0}")]
    OddN(usize),
    #[error("quantization needs at least 4 sides, got {0}")]
    TooFewSides(usize),
    #[error("could not repair the mean of die {die} at N = {n}")]
    RepairFailure { die: usize, n: usize },
    #[error("face sum {got} differs from the required {want}")]
    WrongSum { got: u64, want: u64 },
    #[error("die is not proper")]
    NotProper,
    #[error("extension needs 0 <= S < N, got S = {s} for N = {n}")]
    BadS { s: usize, n: usize },
    #[error("extension needs at least one block")]
    NoBlocks,
    #[error("dice synthesis failed: {0}")]
    SynthesisFailure(String),
    #[error("cannot reach {target} sides: {reason}")]
    TargetUnreachable { target: usize, reason: String },
    #[error("invalid dice file: {0}")]
    Json(String),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Homeo(#[from] HomeoError),
}

/// A die as a sorted multiset of positive face values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Die {
    faces: Vec<u32>,
}

impl Die {
    pub fn new(mut faces: Vec<u32>) -> Result<Self, DiceError> {
        if faces.is_empty() {
            return Err(DiceError::NoFaces);
        }
        if faces.contains(&0) {
            return Err(DiceError::ZeroFace);
        }
        faces.sort_unstable();
        Ok(Die { faces })
    }

    /// The die with faces `1, …, k`.
    pub fn standard(k: usize) -> Self {
        assert!(k >= 1);
        Die { faces: (1..=k as u32).collect() }
    }

    pub fn faces(&self) -> &[u32] {
        &self.faces
    }

    pub fn sides(&self) -> usize {
        self.faces.len()
    }

    pub fn sum(&self) -> u64 {
        self.faces.iter().map(|&f| u64::from(f)).sum()
    }

    /// Every face at most `K` and face sum `K(K+1)/2`.
    pub fn is_proper(&self) -> bool {
        let k = self.sides() as u64;
        self.faces.last().is_some_and(|&m| u64::from(m) <= k) && self.sum() == k * (k + 1) / 2
    }
}

/// Outcome counts of rolling `d1` against `d2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BeatCount {
    pub wins: u64,
    pub ties: u64,
    pub losses: u64,
    /// `P(d1 > d2) = wins / (K1·K2)`.
    pub p: Rational,
}

/// Exact counts by a sorted merge.
pub fn beat_prob(d1: &Die, d2: &Die) -> BeatCount {
    let (a, b) = (&d1.faces, &d2.faces);
    let (mut wins, mut ties) = (0u64, 0u64);
    let (mut below, mut upto) = (0usize, 0usize);
    for &x in a {
        while below < b.len() && b[below] < x {
            below += 1;
        }
        upto = upto.max(below);
        while upto < b.len() && b[upto] == x {
            upto += 1;
        }
        wins += below as u64;
        ties += (upto - below) as u64;
    }
    let total = (a.len() * b.len()) as u64;
    BeatCount { wins, ties, losses: total - wins - ties, p: Rational::new(wins, total) }
}

/// `n` dice with a common number of sides.
#[derive(Debug, Clone, PartialEq)]
pub struct DiceSet {
    dice: Vec<Die>,
    provenance: Option<Provenance>,
}

impl DiceSet {
    pub fn new(dice: Vec<Die>) -> Result<Self, DiceError> {
        let first = dice.first().ok_or(DiceError::EmptySet)?.sides();
        if let Some(d) = dice.iter().find(|d| d.sides() != first) {
            return Err(DiceError::SideMismatch(first, d.sides()));
        }
        Ok(DiceSet { dice, provenance: None })
    }

    pub fn dice(&self) -> &[Die] {
        &self.dice
    }

    pub fn len(&self) -> usize {
        self.dice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dice.is_empty()
    }

    pub fn sides(&self) -> usize {
        self.dice[0].sides()
    }

    pub fn is_proper(&self) -> bool {
        self.dice.iter().all(Die::is_proper)
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn to_file(&self) -> DiceFile {
        DiceFile { sides: self.sides(), dice: self.dice.iter().map(|d| d.faces.clone()).collect() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("dice serialize")
    }

    pub fn from_file(file: DiceFile) -> Result<Self, DiceError> {
        let set = DiceSet::new(file.dice.into_iter().map(Die::new).collect::<Result<_, _>>()?)?;
        if set.sides() != file.sides {
            return Err(DiceError::Json(format!("declared {} sides but dice have {}", file.sides, set.sides())));
        }
        Ok(set)
    }

    pub fn from_json(json: &str) -> Result<Self, DiceError> {
        let file: DiceFile = serde_json::from_str(json).map_err(|e| DiceError::Json(e.to_string()))?;
        Self::from_file(file)
    }
}

/// On-disk dice format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiceFile {
    pub sides: usize,
    pub dice: Vec<Vec<u32>>,
}

/// `i → j` exactly when `P(D_i > D_j) > ½`.
pub fn tournament_of(ds: &DiceSet) -> Digraph {
    let half = Rational::half();
    Digraph::from_fn(ds.len(), |i, j| beat_prob(&ds.dice[i - 1], &ds.dice[j - 1]).p > half)
}

/// One unordered pair `i < j`, seen from die `i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairReport {
    pub i: usize,
    pub j: usize,
    pub wins: u64,
    pub ties: u64,
    pub losses: u64,
    pub p: Rational,
    /// `P(D_i > D_j) − ½`; the sign is the induced orientation.
    pub margin: Rational,
    /// Whether `i → j` in the reference tournament.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<bool>,
    pub unoriented: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub n: usize,
    pub sides: usize,
    pub proper: Vec<bool>,
    pub pairs: Vec<PairReport>,
    /// Induced edges `(i, j)`.
    pub edges: Vec<(usize, usize)>,
    pub unoriented: Vec<(usize, usize)>,
    /// Smallest over all pairs of `max(P(D_i > D_j), P(D_j > D_i)) − ½`;
    /// zero or negative exactly when some pair is unoriented.
    pub min_margin: Option<Rational>,
    /// Present when a reference tournament was given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matches: Option<bool>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub mismatches: Vec<(usize, usize)>,
}

/// Exact pairwise report, optionally against a reference tournament.
pub fn inspect(ds: &DiceSet, reference: Option<&Tournament>) -> VerifyReport {
    let n = ds.len();
    let half = Rational::half();
    let mut pairs = Vec::new();
    let mut edges = Vec::new();
    let mut unoriented = Vec::new();
    let mut mismatches = Vec::new();
    let mut min_margin: Option<Rational> = None;
    let size_ok = reference.is_none_or(|r| r.n() == n);
    for i in 1..=n {
        for j in i + 1..=n {
            let c = beat_prob(&ds.dice[i - 1], &ds.dice[j - 1]);
            let margin = &c.p - &half;
            let back = Rational::new(c.losses as i64, (c.wins + c.ties + c.losses) as i64) - &half;
            let forward = margin.is_positive();
            let tied = !forward && !back.is_positive();
            if tied {
                unoriented.push((i, j));
            } else if forward {
                edges.push((i, j));
            } else {
                edges.push((j, i));
            }
            let expected = reference.filter(|_| size_ok).map(|r| r.beats(i, j));
            if let Some(e) = expected {
                if tied || forward != e {
                    mismatches.push((i, j));
                }
            }
            let strongest = if margin > back { margin.clone() } else { back };
            if min_margin.as_ref().is_none_or(|m| &strongest < m) {
                min_margin = Some(strongest);
            }
            pairs.push(PairReport {
                i,
                j,
                wins: c.wins,
                ties: c.ties,
                losses: c.losses,
                p: c.p,
                margin,
                expected,
                unoriented: tied,
            });
        }
    }
    edges.sort_unstable();
    VerifyReport {
        n,
        sides: ds.sides(),
        proper: ds.dice.iter().map(Die::is_proper).collect(),
        pairs,
        edges,
        unoriented,
        min_margin,
        matches: reference.map(|_| size_ok && mismatches.is_empty()),
        mismatches,
    }
}

pub fn verify(ds: &DiceSet, r: &Tournament) -> VerifyReport {
    inspect(ds, Some(r))
}

/// Heap entry: larger `key` first, then smaller boundary index.
#[derive(PartialEq)]
struct Candidate {
    key: f64,
    k: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.total_cmp(&other.key).then_with(|| other.k.cmp(&self.k))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `N`-sided dice whose face `k + 1` has probability close to the mass `F`
/// puts on `[k/N, (k+1)/N]`.
///
/// The cumulative counts `N·F((k+1)/N)` are rounded, which keeps every
/// partial sum within ½ of its target. The mean is then made exactly
/// `Σ k·c_k = N²/2` by moving single faces across one bin boundary at a
/// time, always at the boundary whose cumulative count is furthest from its
/// target in the needed direction.
pub fn quantize(fs: &[DistributionFunction], n: usize) -> Result<Vec<Die>, DiceError> {
    if n % 2 == 1 {
        return Err(DiceError::OddN(n));
    }
    if n < 4 {
        return Err(DiceError::TooFewSides(n));
    }
    fs.iter().enumerate().map(|(idx, f)| quantize_one(f, n, idx + 1)).collect()
}

fn quantize_one(f: &DistributionFunction, n: usize, die: usize) -> Result<Die, DiceError> {
    let nf = n as f64;
    // targets[k] = N·F((k+1)/N) for the boundaries k = 0..N−2
    let mut targets = Vec::with_capacity(n - 1);
    for k in 0..n - 1 {
        targets.push(nf * f.eval((k + 1) as f64 / nf)?);
    }
    let mut cum: Vec<i64> = targets.iter().map(|t| t.round() as i64).collect();
    cum.push(n as i64);
    for k in 1..n {
        // F is increasing, but guard against rounding at equal targets.
        cum[k] = cum[k].max(cum[k - 1]).min(n as i64);
    }
    let count = |cum: &[i64], k: usize| cum[k] - if k == 0 { 0 } else { cum[k - 1] };

    // Σ k·c_k = (N−1)N − Σ_{k<N−1} C_k
    let nn = n as i64;
    let mut excess = (nn - 1) * nn - cum[..n - 1].iter().sum::<i64>() - nn * nn / 2;
    let raise = excess > 0;
    let key = |cum: &[i64], k: usize| {
        if raise {
            targets[k] - cum[k] as f64
        } else {
            cum[k] as f64 - targets[k]
        }
    };
    // Raising C_k moves a face down from bin k+1; lowering it moves one up from bin k.
    let eligible = |cum: &[i64], k: usize| if raise { count(cum, k + 1) > 0 } else { count(cum, k) > 0 };
    let mut heap: BinaryHeap<Candidate> =
        (0..n - 1).filter(|&k| eligible(&cum, k)).map(|k| Candidate { key: key(&cum, k), k }).collect();
    while excess != 0 {
        let Some(Candidate { key: stale, k }) = heap.pop() else {
            return Err(DiceError::RepairFailure { die, n });
        };
        if !eligible(&cum, k) {
            continue;
        }
        // Entries are re-pushed whenever their key changes, so a mismatch is stale.
        if key(&cum, k) != stale {
            continue;
        }
        if raise {
            cum[k] += 1;
            excess -= 1;
            // Bin k gained a face, so boundary k−1 may move it down again.
            if k > 0 && count(&cum, k) == 1 {
                heap.push(Candidate { key: key(&cum, k - 1), k: k - 1 });
            }
        } else {
            cum[k] -= 1;
            excess += 1;
            if k + 1 < n - 1 && count(&cum, k + 1) == 1 {
                heap.push(Candidate { key: key(&cum, k + 1), k: k + 1 });
            }
        }
        heap.push(Candidate { key: key(&cum, k), k });
    }

    let mut faces = Vec::with_capacity(n);
    for k in 0..n {
        let c = count(&cum, k);
        if c < 0 {
            return Err(DiceError::RepairFailure { die, n });
        }
        faces.extend(std::iter::repeat_n(k as u32 + 1, c as usize));
    }
    let d = Die { faces };
    let want = (n * (n + 2) / 2) as u64;
    if d.sides() != n || d.sum() != want {
        return Err(DiceError::RepairFailure { die, n });
    }
    Ok(d)
}

/// Appends the face `(N+2)/2` to a quantized `N`-sided die, giving a
/// proper `(N+1)`-sided die. No face equals `N+1`, so the result is proper
/// without using every value.
pub fn make_proper(d: &Die) -> Result<Die, DiceError> {
    let n = d.sides();
    if n % 2 == 1 {
        return Err(DiceError::OddN(n));
    }
    let want = (n * (n + 2) / 2) as u64;
    if d.sum() != want || d.faces.last().is_some_and(|&m| m as usize > n) {
        return Err(DiceError::WrongSum { got: d.sum(), want });
    }
    let mut faces = d.faces.clone();
    faces.push((n as u32 + 2) / 2);
    faces.sort_unstable();
    Ok(Die { faces })
}

/// `M` shifted copies of a proper `N`-sided die, block `q` offset by
/// `(q−1)N`, plus single faces `MN+1, …, MN+S`.
pub fn extend(d: &Die, m: usize, s: usize) -> Result<Die, DiceError> {
    if !d.is_proper() {
        return Err(DiceError::NotProper);
    }
    let n = d.sides();
    if m == 0 {
        return Err(DiceError::NoBlocks);
    }
    if s >= n {
        return Err(DiceError::BadS { s, n });
    }
    let total = m * n + s;
    if total > u32::MAX as usize {
        return Err(DiceError::TargetUnreachable { target: total, reason: "face values exceed 32 bits".into() });
    }
    let mut faces = Vec::with_capacity(total);
    for q in 0..m {
        let shift = (q * n) as u32;
        faces.extend(d.faces.iter().map(|&f| f + shift));
    }
    faces.extend((m * n + 1..=total).map(|v| v as u32));
    Ok(Die { faces })
}

/// `extend(d, 2, 0)`.
pub fn double(d: &Die) -> Result<Die, DiceError> {
    extend(d, 2, 0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiceOptions {
    /// Number of sides wanted for the final dice.
    pub target_sides: Option<usize>,
    /// Recorded in the provenance. The pipeline itself draws no random numbers.
    pub seed: u64,
    pub eps: f64,
    pub max_n: usize,
    pub quad: QuadratureConfig,
}

impl Default for DiceOptions {
    fn default() -> Self {
        DiceOptions {
            target_sides: None,
            seed: 0,
            eps: DEFAULT_EPS,
            max_n: DEFAULT_MAX_N,
            quad: QuadratureConfig::from_env(),
        }
    }
}

/// Result of one quantization size in the escalation schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EscalationStep {
    pub n: usize,
    pub quantized_ok: bool,
    pub proper_ok: bool,
}

/// How a synthesized set was obtained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub eps: f64,
    pub achieved_eps: f64,
    pub z_values: Vec<f64>,
    pub delta_schedule: Vec<(usize, f64)>,
    pub margin_floor: f64,
    /// Continuous margins `Q(f_j, f_i)/4` for `i < j`, seen from `i`.
    pub continuous_margins: Vec<(usize, usize, f64)>,
    pub escalation: Vec<EscalationStep>,
    /// Accepted quantization size; the proper dice have one more side.
    pub quantized_sides: usize,
    /// Smallest exact `|p − ½|` of the proper dice before extension.
    pub proper_margin: Rational,
    /// `(M, S)` when the dice were extended to a requested size.
    pub extension: Option<(usize, usize)>,
}

/// Proper dice realizing `r`: continuous synthesis, then quantization at
/// `N = 16, 32, …` until both the quantized and the proper dice verify
/// exactly, then an optional extension to `target_sides`.
pub fn synthesize_dice(r: &Tournament, opts: &DiceOptions) -> Result<DiceSet, DiceError> {
    let res = synth::synthesize(r, opts.eps, &opts.quad)?;
    let cdfs: Vec<_> = res.tuple.iter().map(homeo::to_unit_interval).collect();
    let n = r.n();
    let mut continuous_margins = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            continuous_margins.push((i, j, res.margins[i - 1][j - 1] / 4.0));
        }
    }

    let mut escalation = Vec::new();
    let mut size = FIRST_N;
    let proper = loop {
        if size > opts.max_n {
            return Err(DiceError::SynthesisFailure(format!(
                "no quantization up to N = {} reproduces the tournament",
                opts.max_n
            )));
        }
        let quantized = DiceSet::new(quantize(&cdfs, size)?)?;
        let quantized_ok = verify(&quantized, r).matches == Some(true);
        let mut proper_ok = false;
        let mut proper = None;
        if quantized_ok {
            let set = DiceSet::new(quantized.dice.iter().map(make_proper).collect::<Result<_, _>>()?)?;
            proper_ok = verify(&set, r).matches == Some(true);
            proper = proper_ok.then_some(set);
        }
        debug!("N = {size}: quantized {quantized_ok}, proper {proper_ok}");
        escalation.push(EscalationStep { n: size, quantized_ok, proper_ok });
        if let Some(set) = proper {
            break set;
        }
        size *= 2;
    };
    let report = verify(&proper, r);
    let proper_margin = report.min_margin.clone().unwrap_or_else(Rational::half);
    info!("tournament realized by {}-sided dice (exact margin {proper_margin})", proper.sides());

    let mut extension = None;
    let mut out = proper;
    if let Some(target) = opts.target_sides {
        let k = out.sides();
        let (m, s) = (target / k, target % k);
        if m == 0 {
            return Err(DiceError::TargetUnreachable {
                target,
                reason: format!("fewer sides than the {k} the construction needs"),
            });
        }
        // Each extended pair keeps its winner when 2·M·K·ε > 1.
        let test = Rational::from_integer(2 * m as i64 * k as i64) * &proper_margin;
        if n > 1 && test <= Rational::one() {
            return Err(DiceError::TargetUnreachable {
                target,
                reason: format!("2·M·K·ε = {test} is not above 1 for M = {m}, K = {k}"),
            });
        }
        if m > 1 || s > 0 {
            let dice = out.dice.iter().map(|d| extend(d, m, s)).collect::<Result<_, _>>()?;
            out = DiceSet::new(dice)?;
            if verify(&out, r).matches != Some(true) || !out.is_proper() {
                return Err(DiceError::SynthesisFailure(format!("extension to {target} sides failed to verify")));
            }
        }
        extension = Some((m, s));
    }
    out.provenance = Some(Provenance {
        seed: opts.seed,
        eps: opts.eps,
        achieved_eps: res.achieved_eps,
        z_values: res.z_values,
        delta_schedule: res.delta_schedule,
        margin_floor: res.margin_floor,
        continuous_margins,
        escalation,
        quantized_sides: size,
        proper_margin,
        extension,
    });
    Ok(out)
}

#[cfg(test)]
mod tests;
