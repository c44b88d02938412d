//! Realizing a tournament by increasing homeomorphisms.
//!
//! Orthogonal even polynomials `p_i` give odd maps `g_i = ∫_0^t (1 + p_i)`
//! that pair to zero with each other. Vertex `m` is then moved off `g_m`
//! along the direction `η = Σ_{m→j} p_j − Σ_{j→m} p_j`, which to first
//! order changes `∫ g_j(f_m⁻¹)` by `±z∫p_j²` with the sign of the edge. The
//! earlier vertices are rebuilt recursively, under a shrinking distance
//! budget until the strict inequalities survive.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;
use std::sync::Arc;

use log::debug;

use crate::homeo::{self, HomeoError, MonotoneMap, Perturbation, QuadratureConfig};
pub use crate::poly::legendre;
use crate::poly::{LegendreSeries, Polynomial};
use crate::rational::Rational;
use crate::tournament::Tournament;

/// Default distance budget `ε` for [`synthesize`].
pub const DEFAULT_EPS: f64 = 0.05;
/// Longest halving sequence `ε, ε/2, ε/4, …` tried for the earlier vertices.
pub const MAX_DELTA_RETRIES: usize = 20;
/// Length of the geometric `z` grid searched by [`choose_z`].
pub const MAX_Z_HALVINGS: usize = 40;
/// Gap kept between certified derivative bounds and the limits `1/3`, `3`.
const DERIV_SLACK: f64 = 1e-3;
/// Fraction of the distance budget a single perturbation may use.
const EPS_USE: f64 = 0.98;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("special sequence property violated: {0}")]
    PropertyViolation(String),
    #[error("no admissible z for vertex {vertex} (grid started at {z0:.3e})")]
    NoValidZ { vertex: usize, z0: f64 },
    #[error("synthesis failed: {0}")]
    SynthesisFailure(String),
    #[error("distance budget must be positive and finite, got {0}")]
    InvalidEps(f64),
    #[error(transparent)]
    Homeo(#[from] HomeoError),
}

/// `p_1, …, p_n` with `p_i = C_i(ℓ_{4i} − ℓ_{4i−2})`.
#[derive(Debug, Clone)]
pub struct SpecialSequence {
    entries: Vec<(Polynomial, Rational)>,
}

impl SpecialSequence {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `p_i`, 1-based.
    pub fn p(&self, i: usize) -> &Polynomial {
        &self.entries[i - 1].0
    }

    /// `C_i`, 1-based.
    pub fn c(&self, i: usize) -> &Rational {
        &self.entries[i - 1].1
    }

    /// `∫ p_i²`, exactly.
    pub fn norm_sq(&self, i: usize) -> Rational {
        self.p(i).inner_product(self.p(i))
    }
}

pub fn special_sequence(n: usize) -> Result<SpecialSequence, SynthError> {
    if n == 0 {
        return Err(SynthError::PropertyViolation("empty sequence requested".into()));
    }
    let table = crate::poly::legendre_table(4 * n);
    let c = Rational::new(1, 4);
    let entries: Vec<_> = (1..=n).map(|i| ((&table[4 * i] - &table[4 * i - 2]).scale(&c), c.clone())).collect();
    let s = SpecialSequence { entries };
    verify_sequence(&s)?;
    Ok(s)
}

fn verify_sequence(s: &SpecialSequence) -> Result<(), SynthError> {
    let one = Rational::one();
    let violation = |msg: String| Err(SynthError::PropertyViolation(msg));
    for i in 1..=s.len() {
        let p = s.p(i);
        if !p.is_even() {
            return violation(format!("p_{i} is not even"));
        }
        if !p.eval(&one).is_zero() || !p.eval(&-one.clone()).is_zero() {
            return violation(format!("p_{i} does not vanish at ±1"));
        }
        if !p.integral().is_zero() {
            return violation(format!("p_{i} is not orthogonal to 1"));
        }
        for j in 1..i {
            if !p.inner_product(s.p(j)).is_zero() {
                return violation(format!("p_{i} and p_{j} are not orthogonal"));
            }
        }
        let bound = sup_norm_bound(&p.to_series());
        if bound > 0.5 {
            return violation(format!("sup norm bound {bound} of p_{i} exceeds 1/2"));
        }
    }
    Ok(())
}

/// Upper bound on `sup |p|`: the maximum over a uniform grid plus
/// `sup|p'|·h/2`, refining the grid until the padding is small.
fn sup_norm_bound(p: &LegendreSeries) -> f64 {
    let lip = p.sup_bound(1);
    let mut points = 2001;
    loop {
        let h = 2.0 / (points - 1) as f64;
        let max = (0..points).map(|k| p.eval(-1.0 + h * k as f64).abs()).fold(0.0, f64::max);
        let pad = lip * h / 2.0;
        if pad < 1e-3 || points > 1 << 22 {
            return max + pad;
        }
        points = 2 * (points - 1) + 1;
    }
}

/// The maps `g_i(t) = ∫_0^t (1 + p_i)`.
#[derive(Debug, Clone)]
pub struct AssociatedMaps {
    polys: Vec<Polynomial>,
    maps: Vec<MonotoneMap>,
}

impl AssociatedMaps {
    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    /// `g_i` as an exact polynomial, 1-based.
    pub fn poly(&self, i: usize) -> &Polynomial {
        &self.polys[i - 1]
    }

    /// `g_i` as a map, 1-based.
    pub fn map(&self, i: usize) -> &MonotoneMap {
        &self.maps[i - 1]
    }

    pub fn maps(&self) -> &[MonotoneMap] {
        &self.maps
    }
}

pub fn associated_maps(s: &SpecialSequence) -> Result<AssociatedMaps, SynthError> {
    let one = Polynomial::constant(Rational::one());
    let mut polys = Vec::with_capacity(s.len());
    let mut maps = Vec::with_capacity(s.len());
    for i in 1..=s.len() {
        let g = (&one + s.p(i)).antiderivative();
        if !g.is_odd() {
            return Err(SynthError::PropertyViolation(format!("g_{i} is not odd")));
        }
        maps.push(
            MonotoneMap::polynomial(g.clone())
                .map_err(|e| SynthError::PropertyViolation(format!("g_{i} is not a homeomorphism: {e}")))?,
        );
        polys.push(g);
    }
    Ok(AssociatedMaps { polys, maps })
}

/// `η` for a vertex together with the family `z ↦ g_m⁻¹ + zξ`.
#[derive(Clone)]
pub struct EtaXi {
    pub eta: Polynomial,
    pub family: Arc<Perturbation>,
}

impl EtaXi {
    /// `ξ(t) = η(g_m⁻¹(t)) · (g_m⁻¹)'(t)`.
    pub fn xi(&self, t: f64) -> Result<f64, SynthError> {
        Ok(self.family.xi(t)?)
    }
}

/// Direction for vertex `m` of `r`, using only edges to vertices `j < m`.
pub fn eta_xi(r: &Tournament, m: usize, s: &SpecialSequence, g: &AssociatedMaps) -> Result<EtaXi, SynthError> {
    assert!(m >= 1 && m <= r.n() && m <= s.len() && m <= g.len());
    let mut eta = Polynomial::zero();
    for j in 1..m {
        eta = if r.beats(m, j) { &eta + s.p(j) } else { &eta - s.p(j) };
    }
    let family = Perturbation::new(g.poly(m), &eta)?;
    Ok(EtaXi { eta, family })
}

/// Outcome of the `z` search for one vertex.
#[derive(Debug, Clone)]
pub struct ZChoice {
    pub z: f64,
    /// `f_m`, stored as the inverse of `g_m⁻¹ + zξ`.
    pub map: MonotoneMap,
    /// `Q(g_j, f_m)` for `j < m`.
    pub margins: Vec<f64>,
    /// Required `|Q(g_j, f_m)|`, namely `θz`.
    pub required: f64,
    /// Certified `sup |f_m − g_m|` bound.
    pub distance: f64,
}

/// Picks the largest `z` on the grid `z₀·2^{-k}` whose map keeps every sign
/// condition against `g_1, …, g_{m−1}` with margin `θz`,
/// `θ = ½·min_{j<m} ∫p_j²`. `z₀` is the largest value whose certified
/// derivative bounds lie in `(1/3, 3)` and whose distance to `g_m` stays
/// below `eps`.
pub fn choose_z(
    r: &Tournament,
    m: usize,
    s: &SpecialSequence,
    g: &AssociatedMaps,
    eps: f64,
    cfg: &QuadratureConfig,
) -> Result<ZChoice, SynthError> {
    if m == 1 {
        return Ok(ZChoice { z: 0.0, map: g.map(1).clone(), margins: Vec::new(), required: 0.0, distance: 0.0 });
    }
    let ex = eta_xi(r, m, s, g)?;
    let fam = &ex.family;
    let z_deriv = fam.max_z_within(1.0 / 3.0 + DERIV_SLACK, 3.0 - DERIV_SLACK);
    let budget = EPS_USE * eps;
    let z0 = if fam.distance_bound(z_deriv) < budget {
        z_deriv
    } else {
        let (mut lo, mut hi) = (0.0, z_deriv);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if fam.distance_bound(mid) < budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let theta = (1..m).map(|j| s.norm_sq(j).to_f64()).fold(f64::INFINITY, f64::min) / 2.0;
    debug!("vertex {m}: derivative cap {z_deriv:.4e}, start {z0:.4e}, slope {theta:.4e}");

    let mut z = z0;
    for _ in 0..MAX_Z_HALVINGS {
        if z <= 0.0 {
            break;
        }
        let h = MonotoneMap::perturbed(fam, z)?;
        let f = h.inverse();
        let mut margins = Vec::with_capacity(m - 1);
        for j in 1..m {
            margins.push(homeo::q(g.map(j), &f, cfg)?);
        }
        let required = theta * z;
        let ok = (1..m).all(|j| signed(r, m, j, margins[j - 1]) >= required);
        if ok {
            return Ok(ZChoice { z, map: f, margins, required, distance: fam.distance_bound(z) });
        }
        z /= 2.0;
    }
    Err(SynthError::NoValidZ { vertex: m, z0 })
}

/// `v` if `m → j`, `−v` otherwise.
fn signed(r: &Tournament, m: usize, j: usize, v: f64) -> f64 {
    if r.beats(m, j) {
        v
    } else {
        -v
    }
}

/// Per-vertex record of a synthesis run.
#[derive(Debug, Clone)]
pub struct LevelRecord {
    pub vertex: usize,
    /// Distance budget `f_m` was built under.
    pub eps: f64,
    pub z: f64,
    /// Budget finally used for `f_1, …, f_{m−1}`; `None` for vertex 1.
    pub delta: Option<f64>,
    /// Position of `delta` in the halving sequence `eps, eps/2, …` (1-based).
    pub delta_attempts: usize,
    /// Smallest `|Q(f_j, f_m)|`, `j < m`, after the earlier vertices were rebuilt.
    pub margin: f64,
    /// Margin required at this level.
    pub floor: f64,
}

#[derive(Debug, Clone)]
pub struct SynthResult {
    pub tuple: Vec<MonotoneMap>,
    /// Largest `|f_i − g_i|` over a 2001-point grid.
    pub achieved_eps: f64,
    /// The beat matrix of the tuple: entry `(i, j)` is `Q(f_j, f_i)`.
    pub margins: Vec<Vec<f64>>,
    pub z_values: Vec<f64>,
    /// `(vertex, budget)` pairs, in the order the recursion settled them.
    pub delta_schedule: Vec<(usize, f64)>,
    pub levels: Vec<LevelRecord>,
    /// Every off-diagonal `|margins[i][j]|` is at least this.
    pub margin_floor: f64,
}

struct Context<'a> {
    r: &'a Tournament,
    s: SpecialSequence,
    g: AssociatedMaps,
    cfg: &'a QuadratureConfig,
    eps: f64,
    /// Finished prefixes keyed by `(m, j)`, where the budget is `eps·2^{-j}`.
    memo: RefCell<HashMap<(usize, i32), PrefixResult>>,
}

type PrefixResult = Result<Rc<Prefix>, SynthError>;

/// `f_1, …, f_m` for one prefix, with its records.
struct Prefix {
    fs: Vec<MonotoneMap>,
    levels: Vec<LevelRecord>,
    /// Smallest signed margin `|Q(f_j, f_i)|` over all pairs in the prefix.
    min_margin: f64,
}

/// Builds `f_1, …, f_n ∈ G₀` with `‖f_i − g_i‖ < eps`, `1/3 < f_i' < 3`
/// and `Q(f_j, f_i) > 0` exactly when `i → j` in `r`.
pub fn synthesize(r: &Tournament, eps: f64, cfg: &QuadratureConfig) -> Result<SynthResult, SynthError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(SynthError::InvalidEps(eps));
    }
    let n = r.n();
    let s = special_sequence(n)?;
    let g = associated_maps(&s)?;
    let ctx = Context { r, s, g, cfg, eps, memo: RefCell::new(HashMap::new()) };
    let prefix = build(&ctx, n, 0)?;
    let tuple = prefix.fs.clone();
    let levels = prefix.levels.clone();

    let margins = homeo::beat_matrix(&tuple, cfg)?;
    let margin_floor = levels.iter().filter(|l| l.vertex > 1).map(|l| l.floor).fold(f64::INFINITY, f64::min);
    for i in 1..=n {
        for j in 1..=n {
            if i == j {
                continue;
            }
            let v = margins[i - 1][j - 1];
            let want = r.beats(i, j);
            if (v > 0.0) != want || v.abs() < margin_floor {
                return Err(SynthError::SynthesisFailure(format!(
                    "final check: Q(f_{j}, f_{i}) = {v:.6e}, expected {} with magnitude at least {margin_floor:.3e}",
                    if want { "positive" } else { "negative" }
                )));
            }
        }
    }

    let mut achieved_eps: f64 = 0.0;
    for (i, f) in tuple.iter().enumerate() {
        for k in 0..2001 {
            let t = -1.0 + k as f64 / 1000.0;
            achieved_eps = achieved_eps.max((f.eval(t)? - ctx.g.map(i + 1).eval(t)?).abs());
        }
    }
    if achieved_eps >= eps {
        return Err(SynthError::SynthesisFailure(format!("distance {achieved_eps:.4e} is not below the budget {eps}")));
    }

    let z_values = levels.iter().map(|l| l.z).collect();
    let delta_schedule = levels.iter().rev().map(|l| (l.vertex, l.eps)).collect();
    Ok(SynthResult {
        tuple,
        achieved_eps,
        margins,
        z_values,
        delta_schedule,
        levels,
        margin_floor: if margin_floor.is_finite() { margin_floor } else { 0.0 },
    })
}

/// Budgets `δ = eps_m·2^{-k}` compared for the earlier vertices; the one
/// giving the largest verified minimum margin wins. Beyond these, halving
/// continues only until the first budget that verifies.
const DELTA_CANDIDATES: usize = 3;

/// The prefix `[m]` under budget `eps·2^{-j}`.
fn build(ctx: &Context, m: usize, j: i32) -> Result<Rc<Prefix>, SynthError> {
    if let Some(done) = ctx.memo.borrow().get(&(m, j)) {
        return done.clone();
    }
    let out = build_uncached(ctx, m, j).map(Rc::new);
    ctx.memo.borrow_mut().insert((m, j), out.clone());
    out
}

fn build_uncached(ctx: &Context, m: usize, j: i32) -> Result<Prefix, SynthError> {
    let eps = ctx.eps / 2f64.powi(j);
    let choice = choose_z(ctx.r, m, &ctx.s, &ctx.g, eps, ctx.cfg)?;
    if m == 1 {
        let level =
            LevelRecord { vertex: 1, eps, z: 0.0, delta: None, delta_attempts: 0, margin: f64::INFINITY, floor: 0.0 };
        return Ok(Prefix { fs: vec![choice.map], levels: vec![level], min_margin: f64::INFINITY });
    }
    let floor = choice.required / 2.0;
    let mut best: Option<(f64, Rc<Prefix>, f64, usize)> = None;
    let mut worst = (0usize, f64::NAN);
    for attempt in 1..=MAX_DELTA_RETRIES {
        if best.is_some() && attempt > DELTA_CANDIDATES {
            break;
        }
        let k = j + attempt as i32 - 1;
        let delta = ctx.eps / 2f64.powi(k);
        let inner = match build(ctx, m - 1, k) {
            Ok(p) => p,
            Err(e @ SynthError::Homeo(_)) => return Err(e),
            Err(e) => {
                debug!("vertex {m}: budget {delta:.3e} failed below ({e})");
                continue;
            }
        };
        let mut margin = f64::INFINITY;
        worst = (0, f64::INFINITY);
        for i in 1..m {
            let v = signed(ctx.r, m, i, homeo::q(&inner.fs[i - 1], &choice.map, ctx.cfg)?);
            if v < worst.1 {
                worst = (i, v);
            }
            margin = margin.min(v);
        }
        if margin < floor {
            continue;
        }
        let overall = margin.min(inner.min_margin);
        if best.as_ref().is_none_or(|b| overall > b.0) {
            best = Some((overall, inner, margin, attempt));
        }
    }
    let Some((overall, inner, margin, attempt)) = best else {
        return Err(SynthError::SynthesisFailure(format!(
            "vertex {m}: after {MAX_DELTA_RETRIES} budget halvings the pair with vertex {} has signed margin {:.4e} (needed {floor:.4e})",
            worst.0, worst.1
        )));
    };
    let delta = ctx.eps / 2f64.powi(j + attempt as i32 - 1);
    debug!("vertex {m}: z = {:.4e}, budget {delta:.3e} for earlier vertices, margin {margin:.4e}", choice.z);
    let mut fs = inner.fs.clone();
    fs.push(choice.map);
    let mut levels = inner.levels.clone();
    levels.push(LevelRecord {
        vertex: m,
        eps,
        z: choice.z,
        delta: Some(delta),
        delta_attempts: attempt,
        margin,
        floor,
    });
    Ok(Prefix { fs, levels, min_margin: overall })
}

#[cfg(test)]
mod tests;
