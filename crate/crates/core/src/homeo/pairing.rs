use super::quad::{integrate, QuadratureConfig};
use super::{HomeoError, MonotoneMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
    /// `|∫| ≤ zero_tol`; no sign can be certified.
    Zero,
}

/// `∫_{-1}^{1} f`.
pub fn integral(f: &MonotoneMap, cfg: &QuadratureConfig) -> Result<f64, HomeoError> {
    let kinks = f.kinks()?;
    integrate(|t| Ok(f.eval_d(t)?.0), -1.0, 1.0, &kinks, cfg)
}

pub fn classify(f: &MonotoneMap, cfg: &QuadratureConfig) -> Result<Sign, HomeoError> {
    Ok(sign_of(integral(f, cfg)?, cfg.zero_tol))
}

pub fn sign_of(v: f64, zero_tol: f64) -> Sign {
    if v.abs() <= zero_tol {
        Sign::Zero
    } else if v > 0.0 {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// `Q(f, g) = ∫ f(g⁻¹(t)) dt`, the integral of `f ∘ g⁻¹`.
pub fn q(f: &MonotoneMap, g: &MonotoneMap, cfg: &QuadratureConfig) -> Result<f64, HomeoError> {
    let mut cuts = Vec::new();
    for k in g.kinks()?.into_iter().chain(f.kinks()?) {
        cuts.push(g.eval(k)?);
    }
    integrate(|t| f.eval_d(g.invert_d(t)?.0).map(|(v, _)| v), -1.0, 1.0, &cuts, cfg)
}

/// `M[i][j] = Q(f_j, f_i)`, antisymmetrized as `(M − Mᵀ)/2`. A positive
/// entry means vertex `i` beats vertex `j`.
pub fn beat_matrix(fs: &[MonotoneMap], cfg: &QuadratureConfig) -> Result<Vec<Vec<f64>>, HomeoError> {
    let n = fs.len();
    let mut raw = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                raw[i][j] = q(&fs[j], &fs[i], cfg)?;
            }
        }
    }
    Ok((0..n).map(|i| (0..n).map(|j| 0.5 * (raw[i][j] - raw[j][i])).collect()).collect())
}

/// `P(X_i > X_j) = ½ + Q(f_j, f_i)/4` for independent variables with the
/// distribution functions of `f_i` and `f_j`.
pub fn beat_prob_continuous(fi: &MonotoneMap, fj: &MonotoneMap, cfg: &QuadratureConfig) -> Result<f64, HomeoError> {
    Ok(0.5 + q(fj, fi, cfg)? / 4.0)
}

/// Distribution function `F(x) = (f(2x − 1) + 1)/2` on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct DistributionFunction(MonotoneMap);

impl DistributionFunction {
    pub fn map(&self) -> &MonotoneMap {
        &self.0
    }

    pub fn eval(&self, x: f64) -> Result<f64, HomeoError> {
        if !(0.0..=1.0).contains(&x) {
            return Err(HomeoError::OutOfDomain(x));
        }
        Ok(((self.0.eval_d(2.0 * x - 1.0)?.0 + 1.0) / 2.0).clamp(0.0, 1.0))
    }

    /// `F⁻¹(u)`.
    pub fn quantile(&self, u: f64) -> Result<f64, HomeoError> {
        if !(0.0..=1.0).contains(&u) {
            return Err(HomeoError::OutOfDomain(u));
        }
        Ok(((self.0.invert_d(2.0 * u - 1.0)?.0 + 1.0) / 2.0).clamp(0.0, 1.0))
    }
}

/// Cubic Hermite interpolant of a quantile function `F⁻¹` on a uniform grid
/// of `[0, 1]`, for bulk sampling.
///
/// Nodes carry one-sided slopes so that kinks of the underlying map at grid
/// nodes are reproduced. For the maps built here the slopes stay within
/// `[1/3, 3]`, and 4096 cells give an interpolation error near `1e-11`.
#[derive(Debug, Clone)]
pub struct QuantileTable {
    values: Vec<f64>,
    /// Slope at each node seen from the cell to its left.
    left: Vec<f64>,
    /// Slope at each node seen from the cell to its right.
    right: Vec<f64>,
}

impl QuantileTable {
    pub fn new(cdf: &DistributionFunction, cells: usize) -> Result<Self, HomeoError> {
        assert!(cells > 0);
        let nudge = 1e-9 / cells as f64;
        let slope = |u: f64| -> Result<f64, HomeoError> { Ok(1.0 / cdf.0.invert_d(2.0 * u.clamp(0.0, 1.0) - 1.0)?.1) };
        let mut values = Vec::with_capacity(cells + 1);
        let mut left = Vec::with_capacity(cells + 1);
        let mut right = Vec::with_capacity(cells + 1);
        for k in 0..=cells {
            let u = k as f64 / cells as f64;
            values.push(cdf.quantile(u)?);
            left.push(slope(u - nudge)?);
            right.push(slope(u + nudge)?);
        }
        Ok(QuantileTable { values, left, right })
    }

    pub fn cells(&self) -> usize {
        self.values.len() - 1
    }

    /// Interpolated `F⁻¹(u)` for `u ∈ [0, 1]`.
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        let n = self.cells();
        let s = u.clamp(0.0, 1.0) * n as f64;
        let k = (s as usize).min(n - 1);
        let t = s - k as f64;
        let h = 1.0 / n as f64;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.right[k] * h, self.left[k + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1
    }
}

pub fn to_unit_interval(f: &MonotoneMap) -> DistributionFunction {
    DistributionFunction(f.clone())
}

/// A draw from `F` given a uniform draw `u`.
pub fn inverse_cdf_sample(cdf: &DistributionFunction, u: f64) -> Result<f64, HomeoError> {
    cdf.quantile(u)
}
