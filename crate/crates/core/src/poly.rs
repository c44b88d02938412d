//! Polynomials with exact rational coefficients, and their stable
//! floating-point evaluation through the Legendre basis.
//!
//! Exact identities (orthogonality, boundary values, oddness) are checked on
//! [`Polynomial`]. Numerical work uses [`LegendreSeries`]: the same
//! polynomial re-expanded in Legendre polynomials, whose coefficients stay
//! O(1) so evaluation does not suffer the cancellation the monomial form
//! shows at degree 20 and beyond.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rational::Rational;

/// Polynomial in `t` with coefficients `coeffs[k]` of `t^k`, trailing zeros
/// trimmed.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Polynomial {
    coeffs: Vec<BigRational>,
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Polynomial {
    fn trimmed(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::trimmed(vec![c.inner().clone()])
    }

    /// The identity polynomial `t`.
    pub fn t() -> Self {
        Self::trimmed(vec![BigRational::zero(), BigRational::one()])
    }

    pub fn from_coeffs(coeffs: impl IntoIterator<Item = Rational>) -> Self {
        Self::trimmed(coeffs.into_iter().map(|c| c.inner().clone()).collect())
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().map(Rational::from_inner).unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> Vec<Rational> {
        self.coeffs.iter().cloned().map(Rational::from_inner).collect()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::trimmed(self.coeffs.iter().map(|a| a * c.inner()).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::trimmed(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, a)| a * BigRational::from_integer(BigInt::from(k)))
                .collect(),
        )
    }

    /// Antiderivative vanishing at 0.
    pub fn antiderivative(&self) -> Self {
        let mut out = vec![BigRational::zero()];
        out.extend(self.coeffs.iter().enumerate().map(|(k, a)| a / BigRational::from_integer(BigInt::from(k + 1))));
        Self::trimmed(out)
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        let t = t.inner();
        let mut acc = BigRational::zero();
        for a in self.coeffs.iter().rev() {
            acc = acc * t + a;
        }
        Rational::from_inner(acc)
    }

    /// Exact `∫_{-1}^{1} p(t) dt`.
    pub fn integral(&self) -> Rational {
        let mut acc = BigRational::zero();
        for (k, a) in self.coeffs.iter().enumerate().step_by(2) {
            acc += a * ratio(2, k as i64 + 1);
        }
        Rational::from_inner(acc)
    }

    /// Exact `∫_{-1}^{1} p(t) q(t) dt`.
    pub fn inner_product(&self, other: &Polynomial) -> Rational {
        (self * other).integral()
    }

    pub fn is_even(&self) -> bool {
        self.coeffs.iter().skip(1).step_by(2).all(|c| c.is_zero())
    }

    pub fn is_odd(&self) -> bool {
        self.coeffs.iter().step_by(2).all(|c| c.is_zero())
    }

    /// Coefficients `c_k` with `p = Σ c_k ℓ_k`, computed exactly by
    /// projection: `c_k = (2k+1)/2 ∫ p ℓ_k`.
    pub fn legendre_coeffs(&self) -> Vec<Rational> {
        let basis = legendre_table(self.degree());
        basis
            .iter()
            .enumerate()
            .map(|(k, lk)| {
                let scale = Rational::new(2 * k as i64 + 1, 2);
                &self.inner_product(lk) * &scale
            })
            .collect()
    }

    pub fn to_series(&self) -> LegendreSeries {
        if self.is_zero() {
            return LegendreSeries::new(vec![0.0]);
        }
        LegendreSeries::new(self.legendre_coeffs().iter().map(Rational::to_f64).collect())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{a}")?,
                1 => write!(f, "({a})t")?,
                _ => write!(f, "({a})t^{k}")?,
            }
        }
        Ok(())
    }
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &'a Polynomial) -> Polynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let zero = BigRational::zero();
        Polynomial::trimmed(
            (0..len).map(|k| self.coeffs.get(k).unwrap_or(&zero) + rhs.coeffs.get(k).unwrap_or(&zero)).collect(),
        )
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &'a Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial { coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &'a Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::trimmed(out)
    }
}

/// Legendre polynomial `ℓ_n` by Bonnet's recurrence
/// `(m+1) ℓ_{m+1} = (2m+1) t ℓ_m − m ℓ_{m−1}`.
pub fn legendre(n: usize) -> Polynomial {
    legendre_table(n).pop().expect("table is nonempty")
}

/// `ℓ_0, …, ℓ_n`.
pub fn legendre_table(n: usize) -> Vec<Polynomial> {
    let mut table = vec![Polynomial::constant(Rational::one())];
    if n >= 1 {
        table.push(Polynomial::t());
    }
    let t = Polynomial::t();
    for m in 1..n {
        let a = (&t * &table[m]).scale(&Rational::new(2 * m as i64 + 1, m as i64 + 1));
        let b = table[m - 1].scale(&Rational::new(m as i64, m as i64 + 1));
        table.push(&a - &b);
    }
    table
}

/// Floating-point polynomial `Σ c_k ℓ_k(t)` on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LegendreSeries {
    c: Vec<f64>,
}

impl LegendreSeries {
    pub fn new(c: Vec<f64>) -> Self {
        assert!(!c.is_empty());
        LegendreSeries { c }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_with_derivs(t).0
    }

    /// Value, first and second derivative, via the forward recurrences
    /// `ℓ'_{k+1} = ℓ'_{k-1} + (2k+1) ℓ_k` and
    /// `ℓ''_{k+1} = ℓ''_{k-1} + (2k+1) ℓ'_k`.
    pub fn eval_with_derivs(&self, t: f64) -> (f64, f64, f64) {
        let c = &self.c;
        let (mut v, mut dv, mut sv) = (c[0], 0.0, 0.0);
        if c.len() == 1 {
            return (v, dv, sv);
        }
        v += c[1] * t;
        dv += c[1];
        // (ℓ, ℓ', ℓ'') at degrees k-1 and k
        let mut prev = (1.0, 0.0, 0.0);
        let mut cur = (t, 1.0, 0.0);
        for k in 1..c.len() - 1 {
            let kf = k as f64;
            let w = 2.0 * kf + 1.0;
            let next = ((w * t * cur.0 - kf * prev.0) / (kf + 1.0), prev.1 + w * cur.0, prev.2 + w * cur.1);
            v += c[k + 1] * next.0;
            dv += c[k + 1] * next.1;
            sv += c[k + 1] * next.2;
            prev = cur;
            cur = next;
        }
        (v, dv, sv)
    }

    /// Upper bound on `sup_{[-1,1]} |p^{(order)}|` for `order <= 3`, from
    /// `|ℓ_k| <= 1`, `|ℓ'_k| <= k(k+1)/2` and the analogous bounds
    /// `ℓ^{(r)}_k(1) = (k+r)! / (2^r r! (k-r)!)` for higher derivatives.
    pub fn sup_bound(&self, order: u32) -> f64 {
        self.c.iter().enumerate().map(|(k, ck)| ck.abs() * legendre_deriv_at_one(k, order)).sum()
    }
}

/// `ℓ_k^{(r)}(1)`, which is also `sup_{[-1,1]} |ℓ_k^{(r)}|`.
fn legendre_deriv_at_one(k: usize, r: u32) -> f64 {
    let r = r as usize;
    if r > k {
        return 0.0;
    }
    let mut v = 1.0;
    for i in 0..r {
        // (k+r)!/(k-r)! = Π_{i<r} (k-i)(k+1+i)
        v *= ((k - i) * (k + 1 + i)) as f64;
    }
    for i in 1..=r {
        v /= (2 * i) as f64;
    }
    v
}

/// Sum of absolute coefficients; bounds `|p|` on `[-1, 1]`.
pub fn abs_coeff_sum(p: &Polynomial) -> f64 {
    p.coeffs.iter().map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY)).sum()
}
