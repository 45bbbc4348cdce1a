//! Black-box preference functionals T: acts → ℝ, where T(f) ≥ T(g) iff
//! f ⪰ g, plus the concrete functionals used by the audits.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measure::{same_space, Act, FiniteSpace};
use crate::utility::{AdditiveRepresentation, Curve, StateUtility};

pub trait PreferenceFunctional: Send + Sync {
    fn space(&self) -> &Arc<FiniteSpace>;

    /// T on raw outcome values; `values.len()` equals the space size.
    fn evaluate_values(&self, values: &[f64]) -> f64;

    /// Declared additivity: T(f 1_{A∪B}) = T(f 1_A) + T(f 1_B) for disjoint
    /// A, B. Callers spot-check the claim before relying on it.
    fn is_additive(&self) -> bool {
        false
    }

    fn name(&self) -> String;

    fn evaluate(&self, f: &Act) -> Result<f64> {
        same_space(self.space(), f.space())?;
        Ok(self.evaluate_values(f.values()))
    }
}

impl fmt::Debug for dyn PreferenceFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PreferenceFunctional({})", self.name())
    }
}

impl PreferenceFunctional for AdditiveRepresentation {
    fn space(&self) -> &Arc<FiniteSpace> {
        AdditiveRepresentation::space(self)
    }

    fn evaluate_values(&self, values: &[f64]) -> f64 {
        self.evaluate_unchecked(values)
    }

    fn is_additive(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        "expected-utility".into()
    }
}

/// Spot-checks T(f 1_{{i,j}}) = T(f 1_{i}) + T(f 1_{j}) on pairs of
/// outcomes for the supplied probe values.
pub fn spot_check_additivity(t: &dyn PreferenceFunctional, probes: &[f64]) -> bool {
    let n = t.space().len();
    let mut buf = vec![0.0; n];
    let mut at = |assign: &[(usize, f64)]| {
        buf.iter_mut().for_each(|v| *v = 0.0);
        for &(i, v) in assign {
            buf[i] = v;
        }
        t.evaluate_values(&buf)
    };
    let zero = at(&[]);
    if zero.abs() > 1e-12 {
        return false;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            for &a in probes {
                for &b in probes {
                    let joint = at(&[(i, a), (j, b)]);
                    let split = at(&[(i, a)]) + at(&[(j, b)]);
                    if (joint - split).abs() > 1e-12 * (1.0 + joint.abs()) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Choquet integral of u(f) with respect to the distorted probability
/// ν(A) = P(A)^exponent. The exponent 1 with linear u is the expectation.
#[derive(Debug, Clone)]
pub struct Choquet {
    space: Arc<FiniteSpace>,
    exponent: f64,
    utility: Option<StateUtility>,
}

impl Choquet {
    pub fn new(space: &Arc<FiniteSpace>, exponent: f64) -> Result<Self> {
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(Error::PreconditionFailed(format!("capacity exponent {exponent} must be positive")));
        }
        Ok(Choquet { space: space.clone(), exponent, utility: None })
    }

    /// Rank-dependent utility: the Choquet integral of ω ↦ u(ω, f(ω)).
    pub fn with_utility(mut self, utility: StateUtility) -> Result<Self> {
        same_space(&self.space, utility.space())?;
        self.utility = Some(utility);
        Ok(self)
    }

    pub fn capacity(&self, mass: f64) -> f64 {
        mass.clamp(0.0, 1.0).powf(self.exponent)
    }
}

impl PreferenceFunctional for Choquet {
    fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    fn evaluate_values(&self, values: &[f64]) -> f64 {
        let vals: Vec<f64> = match &self.utility {
            Some(u) => values.iter().enumerate().map(|(i, &v)| u.eval(i, v)).collect(),
            None => values.to_vec(),
        };
        let mut order: Vec<usize> = (0..vals.len()).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
        // Σ x_(i) [ν(upper set from i) − ν(upper set from i+1)], ascending order.
        let mut upper: f64 = 1.0;
        let mut total = 0.0;
        let mut cap_upper = self.capacity(upper);
        for &i in &order {
            let next_upper = upper - self.space.weight(i);
            let cap_next = self.capacity(next_upper);
            total += vals[i] * (cap_upper - cap_next);
            upper = next_upper;
            cap_upper = cap_next;
        }
        total
    }

    fn name(&self) -> String {
        match self.utility {
            Some(_) => format!("rank-dependent(exponent={})", self.exponent),
            None => format!("choquet(exponent={})", self.exponent),
        }
    }
}

/// E[f] − λ Var[f].
#[derive(Debug, Clone)]
pub struct MeanVariance {
    space: Arc<FiniteSpace>,
    lambda: f64,
}

impl MeanVariance {
    pub fn new(space: &Arc<FiniteSpace>, lambda: f64) -> Self {
        MeanVariance { space: space.clone(), lambda }
    }
}

impl PreferenceFunctional for MeanVariance {
    fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    fn evaluate_values(&self, values: &[f64]) -> f64 {
        let w = self.space.weights();
        let mean: f64 = w.iter().zip(values).map(|(p, x)| p * x).sum();
        let var: f64 = w.iter().zip(values).map(|(p, x)| p * (x - mean).powi(2)).sum();
        mean - self.lambda * var
    }

    fn name(&self) -> String {
        format!("mean-variance(lambda={})", self.lambda)
    }
}

/// max_ω f(ω).
#[derive(Debug, Clone)]
pub struct MaxCoordinate {
    space: Arc<FiniteSpace>,
}

impl MaxCoordinate {
    pub fn new(space: &Arc<FiniteSpace>) -> Self {
        MaxCoordinate { space: space.clone() }
    }
}

impl PreferenceFunctional for MaxCoordinate {
    fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    fn evaluate_values(&self, values: &[f64]) -> f64 {
        values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn name(&self) -> String {
        "max-coordinate".into()
    }
}

/// Lower weighted median: the smallest value x with P(f ≤ x) ≥ ½.
#[derive(Debug, Clone)]
pub struct Median {
    space: Arc<FiniteSpace>,
}

impl Median {
    pub fn new(space: &Arc<FiniteSpace>) -> Self {
        Median { space: space.clone() }
    }
}

impl PreferenceFunctional for Median {
    fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    fn evaluate_values(&self, values: &[f64]) -> f64 {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let mut mass = 0.0;
        for &i in &order {
            mass += self.space.weight(i);
            if mass >= 0.5 - 1e-15 {
                return values[i];
            }
        }
        values[order[order.len() - 1]]
    }

    fn name(&self) -> String {
        "median".into()
    }
}

/// φ(T(f)) for a strictly increasing scalar map φ given as a curve;
/// represents the same preference as T.
#[derive(Debug)]
pub struct Transformed<T> {
    inner: T,
    outer: Curve,
}

impl<T: PreferenceFunctional> Transformed<T> {
    pub fn new(inner: T, outer: Curve) -> Self {
        Transformed { inner, outer }
    }
}

impl<T: PreferenceFunctional> PreferenceFunctional for Transformed<T> {
    fn space(&self) -> &Arc<FiniteSpace> {
        self.inner.space()
    }

    fn evaluate_values(&self, values: &[f64]) -> f64 {
        self.outer.eval(self.inner.evaluate_values(values))
    }

    fn name(&self) -> String {
        format!("transformed({})", self.inner.name())
    }
}

/// A functional tabulated on grid-valued acts and extended to all acts by
/// multilinear interpolation (linear extrapolation beyond the grid ends).
///
/// Table entries are indexed lexicographically with outcome 0 as the most
/// significant digit.
#[derive(Debug, Clone)]
pub struct GridTable {
    space: Arc<FiniteSpace>,
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl GridTable {
    pub fn new(space: &Arc<FiniteSpace>, grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::PreconditionFailed("grid must be strictly increasing with ≥ 2 points".into()));
        }
        let expected = grid
            .len()
            .checked_pow(space.len() as u32)
            .ok_or_else(|| Error::PreconditionFailed("grid table too large".into()))?;
        if values.len() != expected {
            return Err(Error::PreconditionFailed(format!(
                "grid table needs {expected} entries, got {}",
                values.len()
            )));
        }
        Ok(GridTable { space: space.clone(), grid, values })
    }

    /// Tabulates `t` on every grid-valued act.
    pub fn tabulate(t: &dyn PreferenceFunctional, grid: Vec<f64>) -> Result<Self> {
        let n = t.space().len();
        let m = grid.len();
        let total = m.pow(n as u32);
        let values = (0..total)
            .map(|code| {
                let act = decode_lex(code, n, &grid);
                t.evaluate_values(&act)
            })
            .collect();
        GridTable::new(t.space(), grid, values)
    }
}

/// Grid act with lexicographic index `code` (outcome 0 most significant).
pub fn decode_lex(code: usize, n: usize, grid: &[f64]) -> Vec<f64> {
    let m = grid.len();
    let mut out = vec![0.0; n];
    let mut c = code;
    for i in (0..n).rev() {
        out[i] = grid[c % m];
        c /= m;
    }
    out
}

impl PreferenceFunctional for GridTable {
    fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    fn evaluate_values(&self, values: &[f64]) -> f64 {
        let n = values.len();
        let m = self.grid.len();
        let cells: Vec<(usize, f64)> = values
            .iter()
            .map(|&x| {
                let j = self.grid.partition_point(|&g| g <= x).saturating_sub(1).min(m - 2);
                let t = (x - self.grid[j]) / (self.grid[j + 1] - self.grid[j]);
                (j, t)
            })
            .collect();
        let mut total = 0.0;
        for corner in 0..(1usize << n) {
            let mut weight = 1.0;
            let mut code = 0;
            for (i, &(j, t)) in cells.iter().enumerate() {
                let up = corner >> i & 1 == 1;
                weight *= if up { t } else { 1.0 - t };
                code = code * m + j + usize::from(up);
            }
            if weight != 0.0 {
                total += weight * self.values[code];
            }
        }
        total
    }

    fn name(&self) -> String {
        "grid-table".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::utility::StateUtility;

    #[test]
    fn choquet_with_unit_exponent_is_expectation() {
        let s = FiniteSpace::with_weights(vec![0.2, 0.3, 0.5]).unwrap();
        let c = Choquet::new(&s, 1.0).unwrap();
        let v = [1.0, -2.0, 4.0];
        let e = 0.2 * 1.0 + 0.3 * -2.0 + 0.5 * 4.0;
        assert!((c.evaluate_values(&v) - e).abs() < 1e-15);
    }

    #[test]
    fn choquet_by_hand() {
        // uniform 3 points, ν = P²; f = (0, 1, 2):
        // 0·(1 − 4/9) + 1·(4/9 − 1/9) + 2·(1/9) = 5/9
        let s = FiniteSpace::uniform(3);
        let c = Choquet::new(&s, 2.0).unwrap();
        assert!((c.evaluate_values(&[0.0, 1.0, 2.0]) - 5.0 / 9.0).abs() < 1e-15);
        assert!((c.evaluate_values(&[2.0, 2.0, 2.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn additivity_spot_check() {
        let s = FiniteSpace::uniform(3);
        let eu = AdditiveRepresentation::new(StateUtility::state_independent(&s, Curve::Exponential { gamma: 1.0 }));
        assert!(spot_check_additivity(&eu, &[-1.0, 0.0, 1.0]));
        assert!(!spot_check_additivity(&Choquet::new(&s, 2.0).unwrap(), &[-1.0, 0.0, 1.0]));
    }

    #[test]
    fn grid_table_reproduces_linear_functional() {
        let s = FiniteSpace::with_weights(vec![0.25, 0.75]).unwrap();
        let eu = AdditiveRepresentation::new(StateUtility::linear(&s));
        let table = GridTable::tabulate(&eu, vec![-1.0, 0.0, 1.0]).unwrap();
        for v in [[0.3, -0.7], [2.5, -3.0], [1.0, 1.0]] {
            let want = 0.25 * v[0] + 0.75 * v[1];
            assert!((table.evaluate_values(&v) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn median_and_max() {
        let s = FiniteSpace::uniform(3);
        assert_eq!(Median::new(&s).evaluate_values(&[5.0, -1.0, 2.0]), 2.0);
        assert_eq!(MaxCoordinate::new(&s).evaluate_values(&[5.0, -1.0, 2.0]), 5.0);
        let mv = MeanVariance::new(&FiniteSpace::uniform(2), 1.0);
        assert!((mv.evaluate_values(&[5.0, 0.0]) - (2.5 - 6.25)).abs() < 1e-15);
    }
}
