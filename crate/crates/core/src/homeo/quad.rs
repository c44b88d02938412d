//! Adaptive Simpson quadrature with explicit breakpoints.

use super::HomeoError;

pub const QUAD_TOL_ENV: &str = "DICESMITH_QUAD_TOL";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Absolute error target for a whole integral.
    pub abs_tol: f64,
    /// Maximum bisection depth below the initial panels.
    pub max_depth: u32,
    /// Half-width of the band around zero that [`classify`](super::classify)
    /// reports as `Zero`.
    pub zero_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { abs_tol: 1e-10, max_depth: 40, zero_tol: 1e-8 }
    }
}

impl QuadratureConfig {
    pub fn with_tol(abs_tol: f64) -> Self {
        assert!(abs_tol > 0.0, "quadrature tolerance must be positive");
        QuadratureConfig { abs_tol, ..Self::default() }
    }

    /// Default configuration, with `abs_tol` taken from `DICESMITH_QUAD_TOL`
    /// when that variable holds a positive number.
    pub fn from_env() -> Self {
        match std::env::var(QUAD_TOL_ENV).ok().and_then(|v| v.trim().parse::<f64>().ok()) {
            Some(tol) if tol > 0.0 && tol.is_finite() => Self::with_tol(tol),
            _ => Self::default(),
        }
    }
}

/// Panels each breakpoint-free segment starts with, so that moderately
/// oscillating polynomial integrands are resolved before error estimates
/// are trusted.
const INITIAL_PANELS: usize = 16;

/// `∫_a^b f`, splitting at every breakpoint strictly inside `(a, b)`.
///
/// Panels are visited left to right and summed in that order, so the result
/// is bit-identical between runs.
pub fn integrate<F>(mut f: F, a: f64, b: f64, breakpoints: &[f64], cfg: &QuadratureConfig) -> Result<f64, HomeoError>
where
    F: FnMut(f64) -> Result<f64, HomeoError>,
{
    assert!(a < b);
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);

    let width = b - a;
    let mut total = 0.0;
    for seg in edges.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        let h = (hi - lo) / INITIAL_PANELS as f64;
        let tol = cfg.abs_tol * h / width;
        let mut x0 = lo;
        let mut f0 = f(x0)?;
        for p in 0..INITIAL_PANELS {
            let x1 = if p + 1 == INITIAL_PANELS { hi } else { lo + h * (p + 1) as f64 };
            let xm = 0.5 * (x0 + x1);
            let fm = f(xm)?;
            let f1 = f(x1)?;
            let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
            total += simpson(&mut f, x0, x1, f0, fm, f1, whole, tol, 0, cfg)?;
            x0 = x1;
            f0 = f1;
        }
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn simpson<F>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    cfg: &QuadratureConfig,
) -> Result<f64, HomeoError>
where
    F: FnMut(f64) -> Result<f64, HomeoError>,
{
    let m = 0.5 * (a + b);
    let flm = f(0.5 * (a + m))?;
    let frm = f(0.5 * (m + b))?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // Below ~1e-17 per panel the estimate is rounding noise.
    if delta.abs() <= 15.0 * tol.max(1e-17) {
        return Ok(left + right + delta / 15.0);
    }
    if depth >= cfg.max_depth {
        return Err(HomeoError::QuadratureFailure { a, b, error_estimate: delta.abs() / 15.0 });
    }
    let l = simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth + 1, cfg)?;
    let r = simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth + 1, cfg)?;
    Ok(l + r)
}
