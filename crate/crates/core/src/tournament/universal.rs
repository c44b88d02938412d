//! Simple extensions and finite prefixes of the universal tournament.

use super::{sorted_subset, Relation, Tournament, TournamentError};

/// Largest base tournament `simple_extend` accepts.
pub const MAX_EXTENSION_BASE: usize = 16;

/// Largest vertex count `universal_prefix` will build.
pub const MAX_UNIVERSAL_SIZE: usize = 1 << 20;

pub(super) fn simple_extend(t: &Tournament) -> Result<Tournament, TournamentError> {
    let n = t.n();
    if n > MAX_EXTENSION_BASE {
        return Err(TournamentError::TooLarge(format!(
            "simple extension of {n} vertices (limit {MAX_EXTENSION_BASE})"
        )));
    }
    let total = n + (1usize << n);
    let mut rel = Relation::empty(total);
    for i in 0..n {
        for j in 0..n {
            if t.0.get(i, j) {
                rel.set(i, j);
            }
        }
    }
    for key in 0..1usize << n {
        let v = n + key;
        for j in 0..n {
            // Vertex j+1 sits at bit n-1-j of the key.
            if key >> (n - 1 - j) & 1 == 1 {
                rel.set(v, j);
            } else {
                rel.set(j, v);
            }
        }
        for lower in 0..key {
            rel.set(v, n + lower);
        }
    }
    Ok(Tournament(rel))
}

pub(super) fn check_simple_extension_property(
    t: &Tournament,
    s0: &[usize],
) -> Result<Option<Vec<usize>>, TournamentError> {
    if s0.len() > MAX_EXTENSION_BASE {
        return Err(TournamentError::TooLarge(format!(
            "simple extension audit over {} vertices (limit {MAX_EXTENSION_BASE})",
            s0.len()
        )));
    }
    sorted_subset(s0, t.n())?;
    let k = s0.len();
    let mut witness: Vec<Option<usize>> = vec![None; 1 << k];
    let mut missing = 1usize << k;
    for v in 1..=t.n() {
        if s0.contains(&v) {
            continue;
        }
        let mask = s0.iter().enumerate().filter(|&(_, &j)| t.beats(v, j)).fold(0usize, |m, (b, _)| m | 1 << b);
        if witness[mask].is_none() {
            witness[mask] = Some(v);
            missing -= 1;
            if missing == 0 {
                break;
            }
        }
    }
    Ok(witness.into_iter().collect())
}

/// Sizes `s_0 = n0`, `s_{m+1} = s_m + 2^{s_m}` for `k` steps; fails when a
/// step would exceed the guards.
fn prefix_sizes(n0: usize, k: usize) -> Result<Vec<usize>, TournamentError> {
    let mut sizes = vec![n0];
    for _ in 0..k {
        let s = *sizes.last().unwrap();
        if s > MAX_EXTENSION_BASE {
            return Err(TournamentError::TooLarge(format!(
                "extending {s} vertices would produce {s} + 2^{s} vertices"
            )));
        }
        let next = s + (1usize << s);
        if next > MAX_UNIVERSAL_SIZE {
            return Err(TournamentError::TooLarge(format!("prefix of {next} vertices exceeds {MAX_UNIVERSAL_SIZE}")));
        }
        sizes.push(next);
    }
    Ok(sizes)
}

/// `k`-fold simple extension of `t0`; each step adds a chooser for every
/// subset of the previous vertex set.
pub fn universal_prefix(t0: &Tournament, k: usize) -> Result<Tournament, TournamentError> {
    prefix_sizes(t0.n(), k)?;
    let mut t = t0.clone();
    for _ in 0..k {
        t = t.simple_extend()?;
    }
    Ok(t)
}
