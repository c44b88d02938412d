use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use super::bounds::{self, Interval, CELLS};
use super::HomeoError;
use crate::poly::{LegendreSeries, Polynomial};
use crate::rational::Rational;

/// Residual accepted by [`MonotoneMap::invert`].
pub const INVERT_TOL: f64 = 1e-12;
/// Iteration cap for the safeguarded Newton solver.
pub const INVERT_MAX_ITER: usize = 200;

/// An element of the group of increasing self-homeomorphisms of `[-1, 1]`,
/// held as an immutable expression tree. Cloning is cheap and clones share
/// structure, so maps can be passed freely between threads.
#[derive(Clone)]
pub struct MonotoneMap(Arc<Node>);

struct Node {
    body: Body,
    deriv: Interval,
}

enum Body {
    Identity,
    Polynomial { exact: Polynomial, series: LegendreSeries },
    Inverse(MonotoneMap),
    Affine { x: f64, f: MonotoneMap, g: MonotoneMap },
    Perturbed { base: Arc<Perturbation>, z: f64 },
    Odot(MonotoneMap, MonotoneMap),
    Star(MonotoneMap),
}

impl MonotoneMap {
    pub fn identity() -> Self {
        Self::node(Body::Identity, Interval::new(1.0, 1.0))
    }

    fn node(body: Body, deriv: Interval) -> Self {
        MonotoneMap(Arc::new(Node { body, deriv }))
    }

    /// A polynomial map; endpoints must be fixed exactly and the certified
    /// derivative lower bound must be positive.
    pub fn polynomial(p: Polynomial) -> Result<Self, HomeoError> {
        check_endpoints(&p)?;
        let d = bounds::range(&p.derivative().to_series());
        if d.lo <= 0.0 {
            return Err(HomeoError::InvalidMap(format!("polynomial derivative bound {:.3e} is not positive", d.lo)));
        }
        let series = p.to_series();
        Ok(Self::node(Body::Polynomial { exact: p, series }, d))
    }

    /// `f⁻¹`. Inverting an inverse node unwraps it.
    pub fn inverse(&self) -> Self {
        match &self.0.body {
            Body::Identity => self.clone(),
            Body::Inverse(f) => f.clone(),
            _ => {
                let d = self.0.deriv;
                Self::node(Body::Inverse(self.clone()), Interval::new(1.0 / d.hi, 1.0 / d.lo))
            }
        }
    }

    /// `x·f + (1−x)·g` for `x ∈ [0, 1]`.
    pub fn affine(x: f64, f: &MonotoneMap, g: &MonotoneMap) -> Result<Self, HomeoError> {
        if !(0.0..=1.0).contains(&x) {
            return Err(HomeoError::InvalidMap(format!("affine weight {x} outside [0, 1]")));
        }
        let (a, b) = (f.0.deriv, g.0.deriv);
        let d = a.scale(x) + b.scale(1.0 - x);
        Ok(Self::node(Body::Affine { x, f: f.clone(), g: g.clone() }, d))
    }

    /// The map `g⁻¹ + z·ξ` of a perturbation family.
    pub fn perturbed(base: &Arc<Perturbation>, z: f64) -> Result<Self, HomeoError> {
        let d = base.deriv_bounds(z);
        if d.lo <= 0.0 {
            return Err(HomeoError::InvalidMap(format!(
                "perturbation z = {z} loses monotonicity (derivative bound {:.3e})",
                d.lo
            )));
        }
        Ok(Self::node(Body::Perturbed { base: base.clone(), z }, d))
    }

    /// `f*(t) = −f(−t)`. An involution: starring a star node unwraps it.
    pub fn star(&self) -> Self {
        match &self.0.body {
            Body::Identity => self.clone(),
            Body::Star(f) => f.clone(),
            _ => Self::node(Body::Star(self.clone()), self.0.deriv),
        }
    }

    /// `f1 ⊙ f2`: a half-scale copy of `f1` on `[-1, 0]` followed by one of
    /// `f2` on `[0, 1]`.
    pub fn odot(f1: &MonotoneMap, f2: &MonotoneMap) -> Self {
        if f1.is_identity() && f2.is_identity() {
            return f1.clone();
        }
        let d = f1.0.deriv.hull(f2.0.deriv);
        Self::node(Body::Odot(f1.clone(), f2.clone()), d)
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.0.body, Body::Identity)
    }

    /// Certified `(lo, hi)` bounds on `f'` over `[-1, 1]`.
    pub fn deriv_bounds(&self) -> (f64, f64) {
        (self.0.deriv.lo, self.0.deriv.hi)
    }

    pub fn eval(&self, t: f64) -> Result<f64, HomeoError> {
        check_domain(t)?;
        Ok(self.eval_d(t)?.0.clamp(-1.0, 1.0))
    }

    /// `f'(t)`.
    pub fn derivative(&self, t: f64) -> Result<f64, HomeoError> {
        check_domain(t)?;
        Ok(self.eval_d(t)?.1)
    }

    /// `f⁻¹(y)` with `|f(x) − y| ≤ 1e-12`.
    pub fn invert(&self, y: f64) -> Result<f64, HomeoError> {
        check_domain(y)?;
        Ok(self.invert_d(y)?.0.clamp(-1.0, 1.0))
    }

    /// Value and derivative at `t`. Arguments passed to children are clamped
    /// into the domain so that rounding cannot push them out.
    pub(crate) fn eval_d(&self, t: f64) -> Result<(f64, f64), HomeoError> {
        let t = t.clamp(-1.0, 1.0);
        match &self.0.body {
            Body::Identity => Ok((t, 1.0)),
            Body::Polynomial { series, .. } => {
                let (v, d, _) = series.eval_with_derivs(t);
                Ok((v, d))
            }
            Body::Inverse(f) => {
                let (x, d) = f.invert_d(t)?;
                Ok((x, 1.0 / d))
            }
            Body::Affine { x, f, g } => {
                let (fv, fd) = f.eval_d(t)?;
                let (gv, gd) = g.eval_d(t)?;
                Ok((x * fv + (1.0 - x) * gv, x * fd + (1.0 - x) * gd))
            }
            Body::Perturbed { base, z } => base.eval_d(t, *z),
            Body::Odot(f1, f2) => {
                if t <= 0.0 {
                    let (v, d) = f1.eval_d(2.0 * t + 1.0)?;
                    Ok(((v - 1.0) / 2.0, d))
                } else {
                    let (v, d) = f2.eval_d(2.0 * t - 1.0)?;
                    Ok(((v + 1.0) / 2.0, d))
                }
            }
            Body::Star(f) => {
                let (v, d) = f.eval_d(-t)?;
                Ok((-v, d))
            }
        }
    }

    /// `x = f⁻¹(y)` together with `f'(x)`.
    pub(crate) fn invert_d(&self, y: f64) -> Result<(f64, f64), HomeoError> {
        let y = y.clamp(-1.0, 1.0);
        match &self.0.body {
            Body::Identity => Ok((y, 1.0)),
            Body::Inverse(f) => {
                let (v, d) = f.eval_d(y)?;
                Ok((v, 1.0 / d))
            }
            Body::Star(f) => {
                let (x, d) = f.invert_d(-y)?;
                Ok((-x, d))
            }
            Body::Odot(f1, f2) => {
                if y <= 0.0 {
                    let (x, d) = f1.invert_d(2.0 * y + 1.0)?;
                    Ok(((x - 1.0) / 2.0, d))
                } else {
                    let (x, d) = f2.invert_d(2.0 * y - 1.0)?;
                    Ok(((x + 1.0) / 2.0, d))
                }
            }
            _ => solve(y, y, |x| self.eval_d(x)),
        }
    }

    /// Points where the map may fail to be smooth.
    pub fn kinks(&self) -> Result<Vec<f64>, HomeoError> {
        let mut out = match &self.0.body {
            Body::Identity | Body::Polynomial { .. } | Body::Perturbed { .. } => Vec::new(),
            Body::Inverse(f) => f.kinks()?.into_iter().map(|k| f.eval(k)).collect::<Result<_, _>>()?,
            Body::Affine { f, g, .. } => {
                let mut v = f.kinks()?;
                v.extend(g.kinks()?);
                v
            }
            Body::Odot(f1, f2) => {
                let mut v = vec![0.0];
                v.extend(f1.kinks()?.into_iter().map(|k| (k - 1.0) / 2.0));
                v.extend(f2.kinks()?.into_iter().map(|k| (k + 1.0) / 2.0));
                v
            }
            Body::Star(f) => f.kinks()?.into_iter().map(|k| -k).collect(),
        };
        out.retain(|k| k.abs() < 1.0);
        out.sort_by(f64::total_cmp);
        out.dedup();
        Ok(out)
    }

    /// Node-tagged JSON rendering of the tree, for debugging only.
    pub fn to_json(&self) -> Value {
        let (lo, hi) = self.deriv_bounds();
        let mut v = match &self.0.body {
            Body::Identity => json!({ "node": "identity" }),
            Body::Polynomial { exact, .. } => json!({
                "node": "polynomial",
                "coeffs": exact.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            }),
            Body::Inverse(f) => json!({ "node": "inverse", "of": f.to_json() }),
            Body::Affine { x, f, g } => json!({
                "node": "affine",
                "x": format!("{x:.16e}"),
                "f": f.to_json(),
                "g": g.to_json(),
            }),
            Body::Perturbed { base, z } => json!({
                "node": "perturbed",
                "g": base.g.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "eta": base.eta.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "z": format!("{z:.16e}"),
            }),
            Body::Odot(f1, f2) => json!({ "node": "odot", "left": f1.to_json(), "right": f2.to_json() }),
            Body::Star(f) => json!({ "node": "star", "of": f.to_json() }),
        };
        v["deriv_lo"] = json!(format!("{lo:.16e}"));
        v["deriv_hi"] = json!(format!("{hi:.16e}"));
        v
    }
}

impl fmt::Debug for MonotoneMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

fn check_domain(t: f64) -> Result<(), HomeoError> {
    if (-1.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(HomeoError::OutOfDomain(t))
    }
}

fn check_endpoints(p: &Polynomial) -> Result<(), HomeoError> {
    let one = Rational::one();
    if p.eval(&one) != one || p.eval(&-one.clone()) != -one {
        return Err(HomeoError::InvalidMap("polynomial does not fix ±1".into()));
    }
    Ok(())
}

/// Solves `f(x) = y` on `[-1, 1]` for increasing `f`, given value and
/// derivative. Newton steps from `guess`, falling back to bisection of the
/// current bracket whenever a step leaves it.
pub(crate) fn solve<F>(y: f64, guess: f64, mut f: F) -> Result<(f64, f64), HomeoError>
where
    F: FnMut(f64) -> Result<(f64, f64), HomeoError>,
{
    if y <= -1.0 || y >= 1.0 {
        let x = y.clamp(-1.0, 1.0);
        return Ok((x, f(x)?.1));
    }
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    let mut x = guess.clamp(-1.0, 1.0);
    let mut best = (f64::INFINITY, x, 1.0);
    for _ in 0..INVERT_MAX_ITER {
        let (fx, dx) = f(x)?;
        let r = fx - y;
        if r.abs() < best.0 {
            best = (r.abs(), x, dx);
        }
        if r == 0.0 {
            return Ok((x, dx));
        }
        if r < 0.0 {
            lo = lo.max(x);
        } else {
            hi = hi.min(x);
        }
        let newton = x - r / dx;
        if r.abs() <= 1e-14 {
            // One free Newton correction; its residual is far below the tolerance.
            let x = if newton > lo && newton < hi { newton } else { x };
            return Ok((x, dx));
        }
        if hi - lo <= f64::EPSILON {
            break;
        }
        x = if dx > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    if best.0 <= INVERT_TOL {
        Ok((best.1, best.2))
    } else {
        Err(HomeoError::ToleranceNotReached { y, residual: best.0 })
    }
}

/// The family `z ↦ g⁻¹ + z·ξ` with `ξ(t) = η(s)/g'(s)`, `s = g⁻¹(t)`, for a
/// polynomial `g ∈ G` and a polynomial `η` vanishing at `±1`.
///
/// Holds cell enclosures of `1/g'`, of the `z`-slope
/// `κ = (η'g' − ηg'')/g'³` of the derivative, and of `η/g'`, so that
/// derivative and distance bounds for any `z` cost one pass over the cells.
pub struct Perturbation {
    g: Polynomial,
    eta: Polynomial,
    g_series: LegendreSeries,
    eta_series: LegendreSeries,
    cells: Vec<CellBounds>,
}

#[derive(Debug, Clone, Copy)]
struct CellBounds {
    dg: Interval,
    inv_dg: Interval,
    kappa: Interval,
    shift: Interval,
}

impl Perturbation {
    pub fn new(g: &Polynomial, eta: &Polynomial) -> Result<Arc<Self>, HomeoError> {
        check_endpoints(g)?;
        let one = Rational::one();
        if !eta.eval(&one).is_zero() || !eta.eval(&-one).is_zero() {
            return Err(HomeoError::InvalidMap("perturbation direction must vanish at ±1".into()));
        }
        let dg_series = g.derivative().to_series();
        let eta_series = eta.to_series();
        let dg_cells = bounds::value_and_slope(&dg_series);
        let eta_cells = bounds::value_and_slope(&eta_series);
        let mut cells = Vec::with_capacity(CELLS);
        for ((dg, ddg), (e, de)) in dg_cells.into_iter().zip(eta_cells) {
            if dg.lo <= 0.0 {
                return Err(HomeoError::InvalidMap("base map derivative not bounded away from 0".into()));
            }
            let inv = dg.recip_pos();
            let inv3 = inv * inv * inv;
            let kappa = (de * dg - e * ddg) * inv3;
            cells.push(CellBounds { dg, inv_dg: inv, kappa, shift: e * inv });
        }
        Ok(Arc::new(Perturbation { g: g.clone(), eta: eta.clone(), g_series: g.to_series(), eta_series, cells }))
    }

    pub fn g(&self) -> &Polynomial {
        &self.g
    }

    pub fn eta(&self) -> &Polynomial {
        &self.eta
    }

    /// Certified bounds on `(g⁻¹ + zξ)'`.
    pub fn deriv_bounds(&self, z: f64) -> Interval {
        self.cells.iter().map(|c| c.inv_dg + c.kappa.scale(z)).reduce(Interval::hull).expect("cells")
    }

    /// Largest `z ≥ 0` for which the certified derivative bounds of
    /// `g⁻¹ + zξ` stay within `[lo, hi]`; requires `1/g'` to do so already.
    pub fn max_z_within(&self, lo: f64, hi: f64) -> f64 {
        let mut z = f64::INFINITY;
        for c in &self.cells {
            if c.kappa.lo < 0.0 {
                z = z.min((c.inv_dg.lo - lo) / -c.kappa.lo);
            }
            if c.kappa.hi > 0.0 {
                z = z.min((hi - c.inv_dg.hi) / c.kappa.hi);
            }
        }
        z.max(0.0)
    }

    /// Upper bound on `sup |f − g|` where `f⁻¹ = g⁻¹ + zξ`. With
    /// `t = g(s)`, the difference at `f⁻¹(t)` is `g(s) − g(s + z·η(s)/g'(s))`,
    /// bounded cellwise by the shift times the largest `g'` within reach.
    pub fn distance_bound(&self, z: f64) -> f64 {
        let width = 2.0 / CELLS as f64;
        let n = self.cells.len();
        let mut worst: f64 = 0.0;
        for (k, c) in self.cells.iter().enumerate() {
            let reach = z.abs() * c.shift.abs_max();
            let span = (reach / width).ceil() as usize + 1;
            let (a, b) = (k.saturating_sub(span), (k + span).min(n - 1));
            let slope = self.cells[a..=b].iter().map(|c| c.dg.hi).fold(0.0, f64::max);
            worst = worst.max(reach * slope);
        }
        worst
    }

    /// `ξ(t) = η(s)/g'(s)` with `s = g⁻¹(t)`.
    pub fn xi(&self, t: f64) -> Result<f64, HomeoError> {
        check_domain(t)?;
        Ok(self.eval_d(t, 1.0)?.0 - self.eval_d(t, 0.0)?.0)
    }

    fn eval_d(&self, t: f64, z: f64) -> Result<(f64, f64), HomeoError> {
        let (s, _) = solve(t, t, |x| {
            let (v, d, _) = self.g_series.eval_with_derivs(x);
            Ok((v, d))
        })?;
        let (_, dg, ddg) = self.g_series.eval_with_derivs(s);
        if z == 0.0 {
            return Ok((s, 1.0 / dg));
        }
        let (e, de, _) = self.eta_series.eval_with_derivs(s);
        let value = s + z * e / dg;
        let slope = 1.0 / dg + z * (de * dg - e * ddg) / (dg * dg * dg);
        Ok((value, slope))
    }
}

/// `fᵉ = ½(f − f*)`; evaluable but not itself a homeomorphism.
#[derive(Clone, Debug)]
pub struct EvenPart(MonotoneMap);

impl EvenPart {
    pub fn eval(&self, t: f64) -> Result<f64, HomeoError> {
        check_domain(t)?;
        Ok(0.5 * (self.0.eval(t)? + self.0.eval(-t)?))
    }
}

pub fn star(f: &MonotoneMap) -> MonotoneMap {
    f.star()
}

pub fn even_part(f: &MonotoneMap) -> EvenPart {
    EvenPart(f.clone())
}

pub fn odot(f1: &MonotoneMap, f2: &MonotoneMap) -> MonotoneMap {
    MonotoneMap::odot(f1, f2)
}
