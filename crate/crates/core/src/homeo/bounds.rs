//! Enclosures of polynomial-derived quantities over `[-1, 1]`.
//!
//! The interval is cut into `CELLS` equal cells. On a cell with midpoint `m`
//! and half-width `r`, a polynomial `P` is enclosed by the second-order
//! Taylor bound `P(m) ± (|P'(m)| r + sup|P''| r² / 2)`, where the global
//! `sup|P''|` comes from the Legendre coefficients. Quantities built from
//! several polynomials are then enclosed with interval arithmetic.

use std::ops::{Add, Mul, Sub};

use crate::poly::LegendreSeries;

pub(crate) const CELLS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn around(mid: f64, rad: f64) -> Self {
        Interval::new(mid - rad, mid + rad)
    }

    pub fn scale(self, k: f64) -> Interval {
        if k >= 0.0 {
            Interval::new(self.lo * k, self.hi * k)
        } else {
            Interval::new(self.hi * k, self.lo * k)
        }
    }

    /// Reciprocal of an interval that lies strictly above zero.
    pub fn recip_pos(self) -> Interval {
        assert!(self.lo > 0.0, "reciprocal of interval touching zero");
        Interval::new(1.0 / self.hi, 1.0 / self.lo)
    }

    pub fn abs_max(self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn hull(self, o: Interval) -> Interval {
        Interval::new(self.lo.min(o.lo), self.hi.max(o.hi))
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval::new(self.lo + o.lo, self.hi + o.hi)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval::new(self.lo - o.hi, self.hi - o.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        Interval::new(
            c.iter().copied().fold(f64::INFINITY, f64::min),
            c.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    }
}

/// Midpoints and the common half-width of the enclosure cells.
pub(crate) fn cells() -> impl Iterator<Item = (f64, f64)> {
    let r = 1.0 / CELLS as f64;
    (0..CELLS).map(move |k| (-1.0 + (2 * k + 1) as f64 * r, r))
}

/// Per-cell enclosures of a series `P` and of its derivative `P'`.
pub(crate) fn value_and_slope(p: &LegendreSeries) -> Vec<(Interval, Interval)> {
    let s2 = p.sup_bound(2);
    let s3 = p.sup_bound(3);
    cells()
        .map(|(m, r)| {
            let (v, d1, d2) = p.eval_with_derivs(m);
            let val = Interval::around(v, d1.abs() * r + 0.5 * s2 * r * r);
            // P'(m + h) = P'(m) + P''(m) h + O(sup|P'''| h²/2).
            let der = Interval::around(d1, d2.abs() * r + 0.5 * s3 * r * r);
            (val, der)
        })
        .collect()
}

/// Certified bounds `(lo, hi)` for `P` over `[-1, 1]`.
pub(crate) fn range(p: &LegendreSeries) -> Interval {
    value_and_slope(p).into_iter().map(|(v, _)| v).reduce(Interval::hull).expect("at least one cell")
}
