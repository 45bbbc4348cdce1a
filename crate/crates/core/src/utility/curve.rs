//! Scalar utility curves x ↦ u(x) and their generalized inverses.

use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};

/// A point of the extended real line ℝ̄.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtendedReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    /// `Finite(x)` for finite `x`, otherwise the matching infinity.
    pub fn from_f64(x: f64) -> Self {
        if x == f64::INFINITY {
            ExtendedReal::PosInf
        } else if x == f64::NEG_INFINITY {
            ExtendedReal::NegInf
        } else {
            ExtendedReal::Finite(x)
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedReal::NegInf => f64::NEG_INFINITY,
            ExtendedReal::Finite(x) => x,
            ExtendedReal::PosInf => f64::INFINITY,
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::NegInf => write!(f, "-inf"),
            ExtendedReal::Finite(x) => write!(f, "{x}"),
            ExtendedReal::PosInf => write!(f, "+inf"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(x) => s.serialize_f64(*x),
            ExtendedReal::NegInf => s.serialize_str("-inf"),
            ExtendedReal::PosInf => s.serialize_str("+inf"),
        }
    }
}

/// Piecewise-linear curve through `knots` with linear extrapolation.
///
/// Abscissae are nondecreasing. A repeated abscissa encodes a jump: the
/// first knot carries the left limit and the second the value, so the
/// curve is right-continuous. Regular utilities have no repeats.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnotTable {
    knots: Vec<(f64, f64)>,
    left_slope: f64,
    right_slope: f64,
}

impl KnotTable {
    pub fn new(knots: Vec<(f64, f64)>, left_slope: f64, right_slope: f64) -> Result<Self, String> {
        if knots.is_empty() {
            return Err("knot table is empty".into());
        }
        if knots.iter().any(|(x, y)| !x.is_finite() || !y.is_finite())
            || !left_slope.is_finite()
            || !right_slope.is_finite()
        {
            return Err("knot table contains non-finite numbers".into());
        }
        for w in knots.windows(2) {
            if w[1].0 < w[0].0 {
                return Err(format!("knot abscissae decrease at x = {}", w[1].0));
            }
        }
        for w in knots.windows(3) {
            if w[0].0 == w[2].0 {
                return Err(format!("more than two knots at x = {}", w[0].0));
            }
        }
        Ok(KnotTable { knots, left_slope, right_slope })
    }

    /// The identity x ↦ x as a one-knot table.
    pub fn identity() -> Self {
        KnotTable { knots: vec![(0.0, 0.0)], left_slope: 1.0, right_slope: 1.0 }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn left_slope(&self) -> f64 {
        self.left_slope
    }

    pub fn right_slope(&self) -> f64 {
        self.right_slope
    }

    pub fn has_jumps(&self) -> bool {
        self.knots.windows(2).any(|w| w[0].0 == w[1].0)
    }

    /// (location, size) of every jump, ascending.
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        self.knots.windows(2).filter(|w| w[0].0 == w[1].0).map(|w| (w[0].0, w[1].1 - w[0].1)).collect()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let first = self.knots[0];
        let last = self.knots[self.knots.len() - 1];
        if x < first.0 {
            return first.1 + self.left_slope * (x - first.0);
        }
        if x >= last.0 {
            return last.1 + self.right_slope * (x - last.0);
        }
        // Last knot with abscissa ≤ x; its successor lies strictly right of x.
        let i = self.knots.partition_point(|k| k.0 <= x) - 1;
        let (x0, y0) = self.knots[i];
        let (x1, y1) = self.knots[i + 1];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// inf{y : u(y) > v} for a nondecreasing table with positive slopes.
    fn inverse(&self, v: f64) -> f64 {
        let first = self.knots[0];
        let last = self.knots[self.knots.len() - 1];
        if v < first.1 {
            return first.0 + (v - first.1) / self.left_slope;
        }
        let j = self.knots.partition_point(|k| k.1 <= v);
        if j == self.knots.len() {
            return last.0 + (v - last.1) / self.right_slope;
        }
        let (x0, y0) = self.knots[j - 1];
        let (x1, y1) = self.knots[j];
        if x0 == x1 {
            return x1;
        }
        x0 + (v - y0) * (x1 - x0) / (y1 - y0)
    }
}

/// One outcome's utility curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Curve {
    /// u(x) = x.
    Linear,
    /// u(x) = (1 − e^{−γx}) / γ, γ ≠ 0.
    Exponential {
        gamma: f64,
    },
    /// u(x) = sign(x)·|x|^p, p > 0.
    PowerOdd {
        p: f64,
    },
    Table(KnotTable),
    /// Convex combination Σ wᵢ uᵢ; arises from projection.
    Mixture {
        components: Vec<(f64, Curve)>,
    },
}

/// Bracket expansion limit for numeric inversion.
const MAX_BRACKET_DOUBLINGS: usize = 1100;

impl Curve {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Curve::Linear => x,
            Curve::Exponential { gamma } => -(-gamma * x).exp_m1() / gamma,
            Curve::PowerOdd { p } => x.signum() * x.abs().powf(*p),
            Curve::Table(t) => t.eval(x),
            Curve::Mixture { components } => components.iter().map(|(w, c)| w * c.eval(x)).sum(),
        }
    }

    /// Open image interval (u(−∞), u(+∞)).
    pub fn image(&self) -> (ExtendedReal, ExtendedReal) {
        use ExtendedReal::*;
        match self {
            Curve::Linear | Curve::PowerOdd { .. } | Curve::Table(_) => (NegInf, PosInf),
            Curve::Exponential { gamma } => {
                if *gamma > 0.0 {
                    (NegInf, Finite(1.0 / gamma))
                } else {
                    (Finite(1.0 / gamma), PosInf)
                }
            }
            Curve::Mixture { components } => {
                let mut lo = 0.0;
                let mut hi = 0.0;
                for (w, c) in components {
                    let (l, h) = c.image();
                    lo += w * l.to_f64();
                    hi += w * h.to_f64();
                }
                (ExtendedReal::from_f64(lo), ExtendedReal::from_f64(hi))
            }
        }
    }

    /// Φ(v) = inf{y ∈ ℝ : u(y) > v}, in its three-case form: +∞ above the
    /// image, −∞ below it, the unique preimage inside it.
    pub fn inverse(&self, v: f64) -> ExtendedReal {
        let (lo, hi) = self.image();
        if ExtendedReal::Finite(v) >= hi {
            return ExtendedReal::PosInf;
        }
        if ExtendedReal::Finite(v) <= lo {
            return ExtendedReal::NegInf;
        }
        let y = match self {
            Curve::Linear => v,
            Curve::Exponential { gamma } => -(-gamma * v).ln_1p() / gamma,
            Curve::PowerOdd { p } => v.signum() * v.abs().powf(1.0 / p),
            Curve::Table(t) => t.inverse(v),
            Curve::Mixture { .. } => return self.inverse_by_bisection(v),
        };
        ExtendedReal::Finite(y)
    }

    /// Generalized inverse by bracketing and bisection; valid for any
    /// nondecreasing curve. Runs until the bracket stops shrinking.
    pub fn inverse_by_bisection(&self, v: f64) -> ExtendedReal {
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        let mut n = 0;
        while self.eval(hi) <= v {
            hi *= 2.0;
            n += 1;
            if n > MAX_BRACKET_DOUBLINGS || !hi.is_finite() {
                return ExtendedReal::PosInf;
            }
        }
        n = 0;
        while self.eval(lo) > v {
            lo *= 2.0;
            n += 1;
            if n > MAX_BRACKET_DOUBLINGS || !lo.is_finite() {
                return ExtendedReal::NegInf;
            }
        }
        // Invariant: u(lo) ≤ v < u(hi).
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid) > v {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        ExtendedReal::Finite(hi)
    }

    /// Checks u(0) = 0, continuity and strict monotonicity. On failure
    /// returns the offending coordinate and a reason.
    pub fn check_regular(&self) -> Result<(), (f64, String)> {
        match self {
            Curve::Linear => Ok(()),
            Curve::Exponential { gamma } => {
                if gamma.is_finite() && *gamma != 0.0 {
                    Ok(())
                } else {
                    Err((0.0, format!("exponential parameter gamma = {gamma} must be finite and nonzero")))
                }
            }
            Curve::PowerOdd { p } => {
                if p.is_finite() && *p > 0.0 {
                    Ok(())
                } else {
                    Err((0.0, format!("power parameter p = {p} must be positive")))
                }
            }
            Curve::Table(t) => {
                if t.left_slope <= 0.0 {
                    return Err((t.knots[0].0, "left extrapolation slope is not positive".into()));
                }
                if t.right_slope <= 0.0 {
                    let x = t.knots[t.knots.len() - 1].0;
                    return Err((x, "right extrapolation slope is not positive".into()));
                }
                for w in t.knots.windows(2) {
                    if w[0].0 == w[1].0 {
                        return Err((w[1].0, "jump discontinuity".into()));
                    }
                    if w[1].1 <= w[0].1 {
                        return Err((w[1].0, "knot values are not strictly increasing".into()));
                    }
                }
                let at_zero = t.eval(0.0);
                if at_zero.abs() > ZERO_TOLERANCE {
                    return Err((0.0, format!("u(0) = {at_zero}, expected 0")));
                }
                Ok(())
            }
            Curve::Mixture { components } => {
                if components.is_empty() {
                    return Err((0.0, "empty mixture".into()));
                }
                for (w, c) in components {
                    if !(w.is_finite() && *w > 0.0) {
                        return Err((0.0, format!("mixture weight {w} is not positive")));
                    }
                    c.check_regular()?;
                }
                Ok(())
            }
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, Curve::Linear)
    }

    fn as_regular_table(&self) -> Option<KnotTable> {
        match self {
            Curve::Linear => Some(KnotTable::identity()),
            Curve::Table(t) if !t.has_jumps() => Some(t.clone()),
            _ => None,
        }
    }

    /// Σ wᵢ uᵢ, kept in the simplest closed form available: a single curve
    /// when all members coincide, an exact knot table when all members are
    /// piecewise linear, a [`Curve::Mixture`] otherwise.
    pub fn average(components: &[(f64, &Curve)]) -> Curve {
        let members: Vec<(f64, &Curve)> = components.iter().copied().filter(|(w, _)| *w > 0.0).collect();
        let Some(&(_, first)) = members.first() else {
            return Curve::Linear;
        };
        if members.iter().all(|(_, c)| *c == first) {
            return first.clone();
        }
        let total: f64 = members.iter().map(|(w, _)| w).sum();
        let tables: Option<Vec<(f64, KnotTable)>> =
            members.iter().map(|(w, c)| c.as_regular_table().map(|t| (w / total, t))).collect();
        if let Some(tables) = tables {
            let mut xs: Vec<f64> = tables.iter().flat_map(|(_, t)| t.knots.iter().map(|k| k.0)).collect();
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            let knots = xs.into_iter().map(|x| (x, tables.iter().map(|(w, t)| w * t.eval(x)).sum())).collect();
            let left = tables.iter().map(|(w, t)| w * t.left_slope).sum();
            let right = tables.iter().map(|(w, t)| w * t.right_slope).sum();
            return Curve::Table(KnotTable { knots, left_slope: left, right_slope: right });
        }
        Curve::Mixture { components: members.into_iter().map(|(w, c)| (w / total, c.clone())).collect() }
    }
}

/// |u(0)| allowed for knot tables, whose value at 0 may be interpolated.
pub const ZERO_TOLERANCE: f64 = 1e-14;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn closed_form_inverses() {
        assert_eq!(Curve::PowerOdd { p: 3.0 }.inverse(8.0), ExtendedReal::Finite(2.0));
        assert_eq!(Curve::Exponential { gamma: 1.0 }.inverse(2.0), ExtendedReal::PosInf);
        assert_eq!(Curve::Exponential { gamma: 1.0 }.inverse(1.0), ExtendedReal::PosInf);
        assert_eq!(Curve::Exponential { gamma: -1.0 }.inverse(-1.5), ExtendedReal::NegInf);
        let y = Curve::Exponential { gamma: 1.0 }.inverse(0.25).finite().unwrap();
        assert!((y - (4.0f64 / 3.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn images() {
        use ExtendedReal::*;
        assert_eq!(Curve::Linear.image(), (NegInf, PosInf));
        assert_eq!(Curve::Exponential { gamma: 2.0 }.image(), (NegInf, Finite(0.5)));
        assert_eq!(Curve::PowerOdd { p: 3.0 }.image(), (NegInf, PosInf));
        let m = Curve::Mixture {
            components: vec![(0.5, Curve::Exponential { gamma: 1.0 }), (0.5, Curve::Exponential { gamma: 2.0 })],
        };
        assert_eq!(m.image(), (NegInf, Finite(0.75)));
    }

    #[test]
    fn table_eval_and_inverse() {
        let t = KnotTable::new(vec![(-1.0, -2.0), (0.0, 0.0), (2.0, 1.0)], 0.5, 3.0).unwrap();
        let c = Curve::Table(t);
        assert_eq!(c.eval(-3.0), -3.0);
        assert_eq!(c.eval(1.0), 0.5);
        assert_eq!(c.eval(3.0), 4.0);
        for x in [-5.0, -1.0, -0.3, 0.0, 0.7, 2.0, 4.5] {
            let y = c.inverse(c.eval(x)).finite().unwrap();
            assert!((y - x).abs() < 1e-14, "{x} -> {y}");
        }
    }

    #[test]
    fn table_with_jump_is_right_continuous() {
        // u(x) = x + 1_{x ≥ 0}
        let t = KnotTable::new(vec![(0.0, 0.0), (0.0, 1.0)], 1.0, 1.0).unwrap();
        assert_eq!(t.eval(0.0), 1.0);
        assert_eq!(t.eval(-0.5), -0.5);
        assert_eq!(t.jumps(), vec![(0.0, 1.0)]);
        // values inside the gap map to the jump location
        assert_eq!(Curve::Table(t.clone()).inverse(0.5), ExtendedReal::Finite(0.0));
        assert!(Curve::Table(t).check_regular().is_err());
    }

    #[test]
    fn regularity_checks() {
        let not_normalized = KnotTable::new(vec![(0.0, 0.1), (1.0, 1.0)], 1.0, 1.0).unwrap();
        assert!(Curve::Table(not_normalized).check_regular().is_err());
        let flat = KnotTable::new(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 1.0)], 1.0, 1.0).unwrap();
        let err = Curve::Table(flat).check_regular().unwrap_err();
        assert_eq!(err.0, 2.0);
        assert!(Curve::Exponential { gamma: 0.0 }.check_regular().is_err());
        assert!(Curve::PowerOdd { p: -1.0 }.check_regular().is_err());
        assert!(KnotTable::new(vec![(1.0, 0.0), (0.0, 0.0)], 1.0, 1.0).is_err());
    }

    #[test]
    fn averaging_tables_is_exact() {
        let a = Curve::Table(KnotTable::new(vec![(-1.0, -1.0), (0.0, 0.0), (1.0, 2.0)], 1.0, 2.0).unwrap());
        let b = Curve::Table(KnotTable::new(vec![(0.0, 0.0), (0.5, 0.1)], 3.0, 1.0).unwrap());
        let avg = Curve::average(&[(0.25, &a), (0.75, &b)]);
        assert!(matches!(avg, Curve::Table(_)));
        for i in -40..=40 {
            let x = i as f64 * 0.1;
            let direct = 0.25 * a.eval(x) + 0.75 * b.eval(x);
            assert!((avg.eval(x) - direct).abs() < 1e-14);
        }
        let lin = Curve::average(&[(0.5, &Curve::Linear), (0.5, &Curve::Linear)]);
        assert_eq!(lin, Curve::Linear);
    }

    proptest! {
        #[test]
        fn bisection_matches_closed_form(g in 0.2f64..3.0, y in -4.0f64..4.0) {
            let c = Curve::Exponential { gamma: g };
            let v = c.eval(y);
            let closed = c.inverse(v).finite().unwrap();
            let bis = c.inverse_by_bisection(v).finite().unwrap();
            prop_assert!((closed - y).abs() < 1e-10);
            prop_assert!((bis - y).abs() < 1e-10);
        }

        #[test]
        fn inverse_is_nondecreasing(a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let c = Curve::Mixture { components: vec![
                (0.3, Curve::Exponential { gamma: 1.5 }),
                (0.7, Curve::PowerOdd { p: 3.0 }),
            ]};
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(c.inverse(lo) <= c.inverse(hi));
        }
    }
}
