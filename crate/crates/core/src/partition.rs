//! Partition tournaments.
//!
//! A regular `n`-partition of `[nN]` splits the integers `1..=nN` into `n`
//! blocks of `N` elements. Block `A_i` beats `A_j` when more than half of the
//! `N²` pairs `(a, b) ∈ A_i × A_j` have `a > b`. Repeating every label `n`
//! times turns the blocks into `n` dice with `nN` faces each.
//!
//! There are `(nN)! / (N!)ⁿ` regular `n`-partitions of `[nN]`.
//!
//! [`sample_partition`] realizes a tournament by drawing `N` samples from
//! each of `n` continuous distributions whose beat relation is the
//! tournament, ranking all `nN` values and letting block `i` hold the ranks
//! of the samples from distribution `i`. Every candidate is checked exactly,
//! so a returned scheme is correct regardless of how likely success was.

use std::fmt;

use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dice::{DiceError, DiceSet, Die};
use crate::homeo::{beat_prob_continuous, HomeoError, MonotoneMap, QuadratureConfig};
use crate::homeo::{DistributionFunction, QuantileTable};
use crate::rational::Rational;
use crate::rng;
use crate::tournament::{Digraph, Tournament};

pub const DEFAULT_MAX_ATTEMPTS: usize = 50;

/// Grid cells of the tabulated quantile used for sampling.
pub const QUANTILE_CELLS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PartitionError {
    #[error("a partition needs at least one block")]
    NoBlocks,
    #[error("block {block} has {got} elements, expected {want}")]
    IrregularBlock { block: usize, got: usize, want: usize },
    #[error("blocks do not partition 1..={0}")]
    NotAPartition(usize),
    #[error("block size must be positive")]
    ZeroBlockSize,
    #[error("{n} blocks of size {block_size} exceed the supported range")]
    TooLarge { n: usize, block_size: usize },
    #[error("{cdfs} distributions given for a tournament on {n} vertices")]
    SizeMismatch { n: usize, cdfs: usize },
    #[error("no sampled partition realized the tournament in {attempts} attempts")]
    MaxAttemptsExceeded { attempts: usize },
    #[error("invalid partition file: {0}")]
    Json(String),
    #[error(transparent)]
    Homeo(#[from] HomeoError),
}

#[derive(Clone, PartialEq, Eq)]
pub struct PartitionScheme {
    block_size: usize,
    blocks: Vec<Vec<u32>>,
}

impl PartitionScheme {
    /// Validates and sorts the blocks.
    pub fn new(mut blocks: Vec<Vec<u32>>) -> Result<Self, PartitionError> {
        let n = blocks.len();
        if n == 0 {
            return Err(PartitionError::NoBlocks);
        }
        let size = blocks[0].len();
        if size == 0 {
            return Err(PartitionError::ZeroBlockSize);
        }
        let total = n.checked_mul(size).filter(|&t| t <= u32::MAX as usize);
        let total = total.ok_or(PartitionError::TooLarge { n, block_size: size })?;
        let mut seen = vec![false; total];
        for (b, block) in blocks.iter_mut().enumerate() {
            if block.len() != size {
                return Err(PartitionError::IrregularBlock { block: b + 1, got: block.len(), want: size });
            }
            block.sort_unstable();
            for &x in block.iter() {
                let slot = (x as usize).checked_sub(1).filter(|&s| s < total);
                match slot {
                    Some(s) if !seen[s] => seen[s] = true,
                    _ => return Err(PartitionError::NotAPartition(total)),
                }
            }
        }
        Ok(PartitionScheme { block_size: size, blocks })
    }

    /// Number of blocks `n`.
    pub fn n(&self) -> usize {
        self.blocks.len()
    }

    /// Block size `N`.
    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn blocks(&self) -> &[Vec<u32>] {
        &self.blocks
    }

    pub fn block_sums(&self) -> Vec<u64> {
        self.blocks.iter().map(|b| b.iter().map(|&x| x as u64).sum()).collect()
    }

    /// Every block sums to `N(Nn+1)/2`, the mean share.
    pub fn is_proper(&self) -> bool {
        let (n, size) = (self.n() as u64, self.block_size as u64);
        self.block_sums().iter().all(|&s| 2 * s == size * (size * n + 1))
    }

    /// `|{(a, b) ∈ A_i × A_j : a > b}|` for 1-based `i`, `j`.
    pub fn pair_count(&self, i: usize, j: usize) -> u64 {
        count_greater(&self.blocks[i - 1], &self.blocks[j - 1])
    }

    /// `pair_count(i, j) / N²`.
    pub fn beat_prob(&self, i: usize, j: usize) -> Rational {
        let size = self.block_size as i64;
        Rational::new(self.pair_count(i, j) as i64, size * size)
    }

    pub fn to_file(&self) -> PartitionFile {
        PartitionFile { n: self.n(), block_size: self.block_size, blocks: self.blocks.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("partition serializes")
    }

    pub fn from_file(file: PartitionFile) -> Result<Self, PartitionError> {
        if file.n != file.blocks.len() {
            return Err(PartitionError::Json(format!("n = {} but {} blocks", file.n, file.blocks.len())));
        }
        let scheme = PartitionScheme::new(file.blocks)?;
        if scheme.block_size != file.block_size {
            return Err(PartitionError::Json(format!(
                "N = {} but blocks have {} elements",
                file.block_size, scheme.block_size
            )));
        }
        Ok(scheme)
    }

    pub fn from_json(json: &str) -> Result<Self, PartitionError> {
        let file: PartitionFile = serde_json::from_str(json).map_err(|e| PartitionError::Json(e.to_string()))?;
        Self::from_file(file)
    }
}

impl fmt::Debug for PartitionScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PartitionScheme(n={}, N={})", self.n(), self.block_size)
    }
}

/// On-disk form: `{"n": 5, "N": 6, "blocks": [[1,6,10,22,24,30], …]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionFile {
    pub n: usize,
    #[serde(rename = "N")]
    pub block_size: usize,
    pub blocks: Vec<Vec<u32>>,
}

/// Pairs `(x, y) ∈ a × b` with `x > y`, for sorted slices.
fn count_greater<T: PartialOrd>(a: &[T], b: &[T]) -> u64 {
    let mut below = 0usize;
    let mut total = 0u64;
    for x in a {
        while below < b.len() && b[below] < *x {
            below += 1;
        }
        total += below as u64;
    }
    total
}

/// Edge `(i, j)` iff `pair_count(i, j) > N²/2`. For odd `N` no count can
/// equal `N²/2`, so the result is a tournament.
pub fn digraph_of(a: &PartitionScheme) -> Digraph {
    let sq = (a.block_size as u128).pow(2);
    Digraph::from_fn(a.n(), |i, j| 2 * a.pair_count(i, j) as u128 > sq)
}

/// Five blocks of six whose relation is the regular tournament on five
/// vertices, every winning pair at exactly 19/36.
pub fn saccamano() -> PartitionScheme {
    PartitionScheme::new(vec![
        vec![1, 6, 10, 22, 24, 30],
        vec![7, 12, 13, 15, 19, 27],
        vec![3, 4, 17, 18, 23, 28],
        vec![2, 9, 11, 16, 26, 29],
        vec![5, 8, 14, 20, 21, 25],
    ])
    .expect("valid partition")
}

/// Block size above which sampling succeeds with positive probability.
///
/// For an edge `(i, j)` with `P(X_i > X_j) = ½ + ε_ij`, the fraction of the
/// `N²` sample pairs won by `i` has mean `½ + ε_ij` and variance at most
/// `1/(2N)`, so Chebyshev bounds the chance that this pair flips by
/// `1/(2Nε²)`. A union bound over the `n(n−1)/2` pairs stays below one once
/// `N > n²/(4ε²)`.
///
/// Returns `⌊n²/(4ε²)⌋ + 1`, computed exactly from the shortest decimal form
/// of `eps`.
pub fn min_n_bound(n: usize, eps: f64) -> u64 {
    assert!(eps > 0.0 && eps.is_finite(), "eps must be positive");
    let e = Rational::from_f64_decimal(eps).expect("finite eps");
    let n = Rational::from_integer(n as i64);
    let bound = &n * &n / (Rational::from_integer(4) * &e * &e);
    let floor: u64 = bound.floor().try_into().expect("bound fits in u64");
    floor + 1
}

/// `min over edges (i, j) of P(X_i > X_j) − ½` for the variables of `maps`.
pub fn continuous_margin(r: &Tournament, maps: &[MonotoneMap], cfg: &QuadratureConfig) -> Result<f64, PartitionError> {
    if maps.len() != r.n() {
        return Err(PartitionError::SizeMismatch { n: r.n(), cdfs: maps.len() });
    }
    let mut best = f64::INFINITY;
    for (i, j) in r.edges() {
        best = best.min(beat_prob_continuous(&maps[i - 1], &maps[j - 1], cfg)? - 0.5);
    }
    Ok(best)
}

/// Each block label repeated `n` times, one die per block.
pub fn to_dice(a: &PartitionScheme) -> Result<DiceSet, DiceError> {
    let n = a.n();
    let dice = a
        .blocks
        .iter()
        .map(|b| Die::new(b.iter().flat_map(|&x| std::iter::repeat_n(x, n)).collect()))
        .collect::<Result<Vec<_>, _>>()?;
    DiceSet::new(dice)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutcome {
    pub scheme: PartitionScheme,
    /// 1-based index of the accepted attempt.
    pub attempts: usize,
    /// Attempts discarded because two samples from different blocks coincided.
    pub collisions: usize,
}

/// Draws partitions until one realizes `r` exactly.
///
/// Attempt `k` uses the sub-stream `derive_seed(seed, k)`, so the result
/// depends only on the inputs. An attempt in which two blocks share a
/// sampled value is discarded rather than broken arbitrarily.
pub fn sample_partition(
    r: &Tournament,
    cdfs: &[DistributionFunction],
    block_size: usize,
    seed: u64,
    max_attempts: usize,
) -> Result<SampleOutcome, PartitionError> {
    let n = r.n();
    if cdfs.len() != n {
        return Err(PartitionError::SizeMismatch { n, cdfs: cdfs.len() });
    }
    if block_size == 0 {
        return Err(PartitionError::ZeroBlockSize);
    }
    if n.checked_mul(block_size).is_none_or(|t| t > u32::MAX as usize) {
        return Err(PartitionError::TooLarge { n, block_size });
    }
    let tables = cdfs.iter().map(|f| QuantileTable::new(f, QUANTILE_CELLS)).collect::<Result<Vec<_>, _>>()?;
    let mut samples: Vec<Vec<f64>> = vec![Vec::with_capacity(block_size + 1); n];
    let mut collisions = 0;
    for attempt in 0..max_attempts {
        let mut g = rng::seeded(rng::derive_seed(seed, attempt as u64));
        for (buf, table) in samples.iter_mut().zip(&tables) {
            sorted_sample(table, block_size, &mut g, buf);
        }
        match rank_blocks(&samples) {
            None => {
                collisions += 1;
                log::debug!("attempt {}: sample collision", attempt + 1);
            }
            Some(blocks) => {
                let scheme = PartitionScheme { block_size, blocks };
                if digraph_of(&scheme) == *r {
                    return Ok(SampleOutcome { scheme, attempts: attempt + 1, collisions });
                }
                log::debug!("attempt {}: wrong relation", attempt + 1);
            }
        }
    }
    Err(PartitionError::MaxAttemptsExceeded { attempts: max_attempts })
}

/// `size` draws from the tabulated quantile, in increasing order.
///
/// Partial sums `S_k` of `size + 1` standard exponentials give the uniform
/// order statistics `S_k / S_{size+1}`, and the quantile is increasing, so
/// no sort is needed.
fn sorted_sample(table: &QuantileTable, size: usize, g: &mut rng::Rng, out: &mut Vec<f64>) {
    out.clear();
    let mut sum = 0.0;
    for _ in 0..size {
        let e: f64 = Exp1.sample(g);
        sum += e;
        out.push(sum);
    }
    let e: f64 = Exp1.sample(g);
    let total = sum + e;
    for v in out.iter_mut() {
        *v = table.eval(*v / total);
    }
}

/// Ranks of every sample within the union, grouped by block, or `None` when
/// two blocks share a value. Ties inside one block are harmless and get
/// consecutive ranks.
fn rank_blocks(samples: &[Vec<f64>]) -> Option<Vec<Vec<u32>>> {
    let n = samples.len();
    let mut heads = vec![0usize; n];
    let mut blocks: Vec<Vec<u32>> = samples.iter().map(|s| Vec::with_capacity(s.len())).collect();
    let total: usize = samples.iter().map(Vec::len).sum();
    let mut last: Option<(f64, usize)> = None;
    for rank in 1..=total as u32 {
        // A linear scan over the heads; n is small for any tournament that
        // sampling can realize in practice.
        let mut pick = usize::MAX;
        let mut best = f64::INFINITY;
        for (b, s) in samples.iter().enumerate() {
            if let Some(&v) = s.get(heads[b]) {
                if pick == usize::MAX || v < best {
                    pick = b;
                    best = v;
                }
            }
        }
        if let Some((v, b)) = last {
            if v == best && b != pick {
                return None;
            }
        }
        last = Some((best, pick));
        heads[pick] += 1;
        blocks[pick].push(rank);
    }
    Some(blocks)
}
