//! From an additive set functional V_A(f) back to a regular utility:
//! extraction of u(ω, q) on dyadic grids, the grid sets A^Q and B^Q,
//! the upper version u⁺, jump detection and the continuity repair
//! û(ω, x) = u(ω, x) 1_A(ω) + x 1_{Ω∖A}(ω).

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{Act, EventSet, FiniteSpace};
use crate::utility::{validate_regular, AdditiveRepresentation, Curve, ExtendedReal, KnotTable, StateUtility};

pub const MAX_LEVEL: u32 = 20;
pub const DEFAULT_BOUND: f64 = 8.0;
/// Multiplier on the local slope estimate in the grid right-continuity check.
pub const ALLOWANCE_FACTOR: f64 = 2.0;

/// Declared properties of a set functional.
///
/// * `c1`: A ↦ V_A(f) is a signed measure, V_A(0) = 0, A ↦ V_A(1_Ω) is a probability;
/// * `c2`: V_A(f) = V_Ω(f 1_A);
/// * `c3`: strict monotonicity;
/// * `c4`: pointwise continuity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OracleProperties {
    pub c1: bool,
    pub c2: bool,
    pub c3: bool,
    pub c4: bool,
}

impl OracleProperties {
    pub const ALL: OracleProperties = OracleProperties { c1: true, c2: true, c3: true, c4: true };
}

pub trait SetFunctionalOracle: Send + Sync {
    fn space(&self) -> &Arc<FiniteSpace>;
    /// V_A(f).
    fn value(&self, a: &EventSet, f: &Act) -> f64;
    fn properties(&self) -> OracleProperties;
}

/// V_A(f) = Σ_{ω∈A} p(ω) u(ω, f(ω)) / c with c = Σ p(ω) u(ω, 1), the
/// normalisation that makes A ↦ V_A(1_Ω) a probability.
#[derive(Debug, Clone)]
pub struct RepresentationOracle {
    rep: AdditiveRepresentation,
    scale: f64,
    properties: OracleProperties,
}

impl RepresentationOracle {
    pub fn new(rep: AdditiveRepresentation) -> Result<Self> {
        let ones = Act::constant(rep.space(), 1.0);
        let scale = rep.evaluate(&ones)?;
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::PreconditionFailed(format!("V(1) = {scale} cannot be normalised to a probability")));
        }
        Ok(RepresentationOracle { rep, scale, properties: OracleProperties::ALL })
    }

    /// Overrides the declared properties, e.g. to test flag handling.
    pub fn with_properties(mut self, properties: OracleProperties) -> Self {
        self.properties = properties;
        self
    }
}

impl SetFunctionalOracle for RepresentationOracle {
    fn space(&self) -> &Arc<FiniteSpace> {
        self.rep.space()
    }

    fn value(&self, a: &EventSet, f: &Act) -> f64 {
        self.rep.value_on(a, f).expect("oracle acts live on the oracle space") / self.scale
    }

    fn properties(&self) -> OracleProperties {
        self.properties
    }
}

/// V_A(f) = E[f 1_A].
#[derive(Debug, Clone)]
pub struct ExpectationOracle {
    space: Arc<FiniteSpace>,
}

impl ExpectationOracle {
    pub fn new(space: &Arc<FiniteSpace>) -> Self {
        ExpectationOracle { space: space.clone() }
    }
}

impl SetFunctionalOracle for ExpectationOracle {
    fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    fn value(&self, a: &EventSet, f: &Act) -> f64 {
        a.members().map(|i| self.space.weight(i) * f.value(i)).sum()
    }

    fn properties(&self) -> OracleProperties {
        OracleProperties::ALL
    }
}

/// Points k / 2^level in [−bound, bound].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DyadicGrid {
    level: u32,
    bound: f64,
}

impl DyadicGrid {
    pub fn new(level: u32, bound: f64) -> Result<Self> {
        if !(1..=MAX_LEVEL).contains(&level) {
            return Err(Error::InvalidGrid(format!("dyadic level {level} outside 1..={MAX_LEVEL}")));
        }
        if !(bound.is_finite() && bound > 0.0) {
            return Err(Error::InvalidGrid(format!("bound {bound} must be positive")));
        }
        Ok(DyadicGrid { level, bound })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn step(&self) -> f64 {
        0.5f64.powi(self.level as i32)
    }

    fn scale(&self) -> f64 {
        2f64.powi(self.level as i32)
    }

    fn k_min(&self) -> i64 {
        (-self.bound * self.scale()).ceil() as i64
    }

    fn k_max(&self) -> i64 {
        (self.bound * self.scale()).floor() as i64
    }

    pub fn len(&self) -> usize {
        (self.k_max() - self.k_min() + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, j: usize) -> f64 {
        (self.k_min() + j as i64) as f64 / self.scale()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.point(j)).collect()
    }

    /// Index of the smallest grid point ≥ x; `None` beyond the last point.
    fn ceiling_index(&self, x: f64) -> Option<usize> {
        let k = (x * self.scale()).ceil() as i64;
        let j = k.max(self.k_min()) - self.k_min();
        (k <= self.k_max()).then_some(j as usize)
    }
}

/// u(ω, q) sampled on a dyadic grid together with the probability it was
/// extracted against and Θ, the outcomes passing the grid A^Q and B^Q checks.
#[derive(Debug, Clone, Serialize)]
pub struct DyadicGridUtility {
    #[serde(skip)]
    space: Arc<FiniteSpace>,
    grid: DyadicGrid,
    values: Vec<Vec<f64>>,
    theta: Vec<bool>,
}

impl DyadicGridUtility {
    /// `values[ω][j]` is u(ω, grid.point(j)).
    pub fn new(space: &Arc<FiniteSpace>, grid: DyadicGrid, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != space.len() || values.iter().any(|row| row.len() != grid.len()) {
            return Err(Error::InvalidGrid("value rows do not match the space and grid".into()));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("grid values must be finite".into()));
        }
        let mut g = DyadicGridUtility { space: space.clone(), grid, values, theta: Vec::new() };
        let report = validate_aq_bq(&g);
        g.theta = report.outcomes.iter().map(|o| o.a_q && o.b_q).collect();
        Ok(g)
    }

    /// Samples a state utility on the grid.
    pub fn sample(u: &StateUtility, grid: DyadicGrid) -> Result<Self> {
        let pts = grid.points();
        let values = (0..u.space().len()).map(|i| pts.iter().map(|&q| u.eval(i, q)).collect()).collect();
        DyadicGridUtility::new(u.space(), grid, values)
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn grid(&self) -> DyadicGrid {
        self.grid
    }

    pub fn values(&self, outcome: usize) -> &[f64] {
        &self.values[outcome]
    }

    pub fn theta(&self) -> &[bool] {
        &self.theta
    }

    /// Θ as an event.
    pub fn theta_event(&self) -> EventSet {
        let idx: Vec<usize> = (0..self.theta.len()).filter(|&i| self.theta[i]).collect();
        EventSet::from_indices(&self.space, &idx).expect("indices in range")
    }

    /// Knot tables through the grid values on Θ (extrapolated with the end
    /// slopes), identity off Θ.
    pub fn to_state_utility(&self) -> Result<StateUtility> {
        let pts = self.grid.points();
        let curves = (0..self.space.len())
            .map(|i| {
                if !self.theta[i] {
                    return Ok(Curve::Linear);
                }
                let row = &self.values[i];
                let h = self.grid.step();
                let n = row.len();
                let (ls, rs) = if n >= 2 { ((row[1] - row[0]) / h, (row[n - 1] - row[n - 2]) / h) } else { (1.0, 1.0) };
                let knots = pts.iter().copied().zip(row.iter().copied()).collect();
                KnotTable::new(knots, ls, rs).map(Curve::Table).map_err(Error::InvalidGrid)
            })
            .collect::<Result<Vec<_>>>()?;
        StateUtility::new(&self.space, curves)
    }
}

fn require(flag: bool, name: &'static str) -> Result<()> {
    if flag {
        Ok(())
    } else {
        Err(Error::PropertyFlagMissing(name))
    }
}

/// u(ω, q) = V_{{ω}}(q 1_Ω) / P({ω}) with P({ω}) = V_{{ω}}(1_Ω); rows of
/// null outcomes are 0. The returned grid utility lives on the space
/// carrying the extracted probability.
pub fn extract_utility(v: &dyn SetFunctionalOracle, grid: DyadicGrid) -> Result<DyadicGridUtility> {
    let props = v.properties();
    require(props.c1, "C1")?;
    require(props.c2, "C2")?;
    let base = v.space();
    let n = base.len();
    let singletons: Vec<EventSet> = (0..n).map(|i| EventSet::from_indices(base, &[i]).expect("in range")).collect();
    let ones = Act::constant(base, 1.0);
    let weights: Vec<f64> = singletons.iter().map(|s| v.value(s, &ones)).collect();
    let space = FiniteSpace::new(base.labels().to_vec(), weights)?;
    let pts = grid.points();
    let values = (0..n)
        .map(|i| {
            let p = space.weight(i);
            pts.iter()
                .map(|&q| if p > 0.0 { v.value(&singletons[i], &Act::constant(base, q)) / p } else { 0.0 })
                .collect()
        })
        .collect();
    DyadicGridUtility::new(&space, grid, values)
}

/// max |V_A(q) − Σ_{ω∈A} P(ω) u(ω, q)| over events A and grid points q;
/// all events up to 12 outcomes, singletons and Ω beyond.
pub fn integral_defect(v: &dyn SetFunctionalOracle, g: &DyadicGridUtility) -> f64 {
    let base = v.space();
    let n = base.len();
    let events: Vec<EventSet> = if n <= 12 {
        (1u64..(1u64 << n)).map(|m| EventSet::from_mask(base, m)).collect()
    } else {
        let mut e: Vec<EventSet> = (0..n).map(|i| EventSet::from_indices(base, &[i]).expect("in range")).collect();
        e.push(EventSet::full(base));
        e
    };
    let mut worst = 0.0f64;
    for (j, q) in g.grid.points().into_iter().enumerate() {
        let act = Act::constant(base, q);
        for a in &events {
            let lhs = v.value(a, &act);
            let rhs: f64 = a.members().map(|i| g.space.weight(i) * g.values[i][j]).sum();
            worst = worst.max((lhs - rhs).abs());
        }
    }
    worst
}

#[derive(Debug, Clone, Serialize)]
pub struct OutcomeRegularity {
    pub outcome: String,
    pub weight: f64,
    /// Strictly increasing across consecutive grid points.
    pub a_q: bool,
    /// No upward gap beyond the local continuity allowance.
    pub b_q: bool,
    /// First offending grid point, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<f64>,
    /// Largest allowance used on this row.
    pub max_allowance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    pub allowance_factor: f64,
    pub outcomes: Vec<OutcomeRegularity>,
    /// Total probability of outcomes failing A^Q.
    pub a_q_failing_weight: f64,
    /// Total probability of outcomes failing B^Q.
    pub b_q_failing_weight: f64,
}

/// Allowance for the increment ending at grid index j + 1: the factor
/// times the larger neighbouring increment (a local slope estimate times
/// the step).
fn allowance(row: &[f64], j: usize) -> f64 {
    let left = if j > 0 { row[j] - row[j - 1] } else { 0.0 };
    let right = if j + 2 < row.len() { row[j + 2] - row[j + 1] } else { 0.0 };
    ALLOWANCE_FACTOR * left.max(right).max(0.0)
}

/// Grid A^Q: strict increase; grid B^Q: every increment within the local
/// allowance, i.e. u(ω, q) = min over q̃ > q on the grid up to the modulus.
pub fn validate_aq_bq(g: &DyadicGridUtility) -> RegularityReport {
    let pts = g.grid.points();
    let outcomes: Vec<OutcomeRegularity> = (0..g.space.len())
        .map(|i| {
            let row = &g.values[i];
            let mut a_q = true;
            let mut b_q = true;
            let mut first_failure = None;
            let mut max_allowance = 0.0f64;
            for j in 0..row.len().saturating_sub(1) {
                let inc = row[j + 1] - row[j];
                let allow = allowance(row, j);
                max_allowance = max_allowance.max(allow);
                let flat = inc <= 0.0;
                let gap = inc > allow && row.len() > 2;
                if flat && a_q {
                    a_q = false;
                    first_failure.get_or_insert(pts[j + 1]);
                }
                if gap && b_q {
                    b_q = false;
                    first_failure.get_or_insert(pts[j + 1]);
                }
            }
            OutcomeRegularity {
                outcome: g.space.label(i).to_string(),
                weight: g.space.weight(i),
                a_q,
                b_q,
                first_failure,
                max_allowance,
            }
        })
        .collect();
    let a_q_failing_weight = outcomes.iter().filter(|o| !o.a_q).map(|o| o.weight).sum();
    let b_q_failing_weight = outcomes.iter().filter(|o| !o.b_q).map(|o| o.weight).sum();
    RegularityReport { allowance_factor: ALLOWANCE_FACTOR, outcomes, a_q_failing_weight, b_q_failing_weight }
}

/// u⁺(ω, x) = inf over grid points q ≥ x of u(ω, q) on Θ, and x off Θ.
pub fn build_u_plus(g: &DyadicGridUtility, outcome: usize, x: f64) -> Result<f64> {
    let m = g.grid.bound;
    if !(x.is_finite() && (-m..=m).contains(&x)) {
        return Err(Error::OutOfGridRange { x, bound: m });
    }
    if !g.theta[outcome] {
        return Ok(x);
    }
    let j = g.grid.ceiling_index(x).ok_or(Error::OutOfGridRange { x, bound: m })?;
    Ok(g.values[outcome][j])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jump {
    pub location: f64,
    pub size: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutcomeJumps {
    pub outcome: String,
    pub weight: f64,
    pub jumps: Vec<Jump>,
    /// Smallest jump location, +∞ without jumps.
    pub tau: ExtendedReal,
}

#[derive(Debug, Clone, Serialize)]
pub struct JumpReport {
    pub epsilon: f64,
    pub bound: f64,
    /// "table" when jumps are exact knot gaps, "grid" for sampled rows.
    pub source: &'static str,
    pub outcomes: Vec<OutcomeJumps>,
}

impl JumpReport {
    pub fn has_jumps(&self) -> bool {
        self.outcomes.iter().any(|o| !o.jumps.is_empty())
    }
}

pub enum JumpSource<'a> {
    Utility(&'a StateUtility),
    Grid(&'a DyadicGridUtility),
}

/// Jumps of a curve as (location, size), merged across mixture components.
fn curve_jumps(c: &Curve) -> Vec<(f64, f64)> {
    match c {
        Curve::Table(t) => t.jumps(),
        Curve::Mixture { components } => {
            let mut all: Vec<(f64, f64)> =
                components.iter().flat_map(|(w, c)| curve_jumps(c).into_iter().map(move |(x, s)| (x, w * s))).collect();
            all.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut merged: Vec<(f64, f64)> = Vec::new();
            for (x, s) in all {
                match merged.last_mut() {
                    Some(last) if last.0 == x => last.1 += s,
                    _ => merged.push((x, s)),
                }
            }
            merged
        }
        _ => Vec::new(),
    }
}

/// Scans [−bound, bound] for jumps larger than ε. Knot tables give the
/// exact jumps; grid rows flag increments exceeding ε plus the local
/// allowance and report the excess, located at the right grid point.
pub fn detect_jumps(source: JumpSource<'_>, epsilon: f64, bound: f64) -> Result<JumpReport> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::PreconditionFailed(format!("epsilon {epsilon} must be positive")));
    }
    if !(bound.is_finite() && bound > 0.0) {
        return Err(Error::PreconditionFailed(format!("bound {bound} must be positive")));
    }
    let (space, rows, kind): (Arc<FiniteSpace>, Vec<Vec<Jump>>, &'static str) = match source {
        JumpSource::Utility(u) => {
            let rows = u
                .curves()
                .iter()
                .map(|c| {
                    curve_jumps(c)
                        .into_iter()
                        .filter(|&(x, s)| s > epsilon && x.abs() <= bound)
                        .map(|(location, size)| Jump { location, size })
                        .collect()
                })
                .collect();
            (u.space().clone(), rows, "table")
        }
        JumpSource::Grid(g) => {
            let pts = g.grid.points();
            let rows = g
                .values
                .iter()
                .map(|row| {
                    (0..row.len().saturating_sub(1))
                        .filter(|&j| pts[j + 1].abs() <= bound)
                        .filter_map(|j| {
                            let excess = row[j + 1] - row[j] - allowance(row, j);
                            (excess > epsilon).then(|| Jump { location: pts[j + 1], size: excess })
                        })
                        .collect()
                })
                .collect();
            (g.space.clone(), rows, "grid")
        }
    };
    let outcomes = rows
        .into_iter()
        .enumerate()
        .map(|(i, jumps)| {
            let tau = jumps.first().map_or(ExtendedReal::PosInf, |j: &Jump| ExtendedReal::Finite(j.location));
            OutcomeJumps { outcome: space.label(i).to_string(), weight: space.weight(i), jumps, tau }
        })
        .collect();
    Ok(JumpReport { epsilon, bound, source: kind, outcomes })
}

/// Replaces the curves of jumpy null outcomes by the identity; a jump on
/// a positive-weight outcome is a `ContinuityViolation`. The result must
/// pass `validate_regular`.
pub fn repair_continuous(u: &StateUtility, report: &JumpReport) -> Result<StateUtility> {
    if report.outcomes.len() != u.space().len() {
        return Err(Error::SpaceMismatch);
    }
    let mut out = u.clone();
    for (i, o) in report.outcomes.iter().enumerate() {
        let Some(first) = o.jumps.first() else { continue };
        let weight = u.space().weight(i);
        if weight > 0.0 {
            return Err(Error::ContinuityViolation {
                outcome: u.space().label(i).to_string(),
                weight,
                location: first.location,
            });
        }
        out = out.with_curve(i, Curve::Linear);
    }
    validate_regular(&out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(knots: &[(f64, f64)]) -> Curve {
        Curve::Table(KnotTable::new(knots.to_vec(), 1.0, 1.0).unwrap())
    }

    fn step_at_zero(size: f64) -> Curve {
        table(&[(-1.0, -1.0 - size), (0.0, -size), (0.0, 0.0), (1.0, 1.0)])
    }

    #[test]
    fn grid_points() {
        let g = DyadicGrid::new(2, 1.0).unwrap();
        assert_eq!(g.points(), vec![-1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(DyadicGrid::new(0, 1.0).is_err());
        assert!(DyadicGrid::new(21, 1.0).is_err());
    }

    #[test]
    fn linear_extraction() {
        let space = FiniteSpace::with_weights(vec![0.25, 0.75]).unwrap();
        let oracle = ExpectationOracle::new(&space);
        let g = extract_utility(&oracle, DyadicGrid::new(3, 2.0).unwrap()).unwrap();
        for i in 0..2 {
            for (q, v) in g.grid().points().iter().zip(g.values(i)) {
                assert!((q - v).abs() < 1e-15);
            }
        }
        assert!(integral_defect(&oracle, &g) < 1e-12);
        let r = validate_aq_bq(&g);
        assert_eq!((r.a_q_failing_weight, r.b_q_failing_weight), (0.0, 0.0));
    }

    #[test]
    fn null_outcome_row_is_zero() {
        let space = FiniteSpace::with_weights(vec![1.0, 0.0]).unwrap();
        let g = extract_utility(&ExpectationOracle::new(&space), DyadicGrid::new(2, 1.0).unwrap()).unwrap();
        assert!(g.values(1).iter().all(|&v| v == 0.0));
        assert_eq!(g.theta(), &[true, false]);
    }

    #[test]
    fn round_trip_from_representation() {
        let space = FiniteSpace::with_weights(vec![0.2, 0.3, 0.5]).unwrap();
        let tab = table(&[(-2.0, -5.0), (-0.5, -0.7), (0.0, 0.0), (1.0, 1.0), (3.0, 2.0)]);
        let u = StateUtility::new(&space, vec![tab, Curve::Linear, Curve::PowerOdd { p: 3.0 }]).unwrap();
        let oracle = RepresentationOracle::new(AdditiveRepresentation::new(u.clone())).unwrap();
        let grid = DyadicGrid::new(4, 4.0).unwrap();
        let g = extract_utility(&oracle, grid).unwrap();
        for i in 0..3 {
            for (q, v) in grid.points().iter().zip(g.values(i)) {
                assert!((u.eval(i, *q) - v).abs() <= 1e-12 * (1.0 + v.abs()));
            }
            assert!((g.space().weight(i) - space.weight(i)).abs() < 1e-15);
        }
        assert!(integral_defect(&oracle, &g) < 1e-10);
    }

    #[test]
    fn missing_flags_are_reported() {
        let space = FiniteSpace::uniform(2);
        let oracle = RepresentationOracle::new(AdditiveRepresentation::new(StateUtility::linear(&space)))
            .unwrap()
            .with_properties(OracleProperties { c2: false, ..OracleProperties::ALL });
        let err = extract_utility(&oracle, DyadicGrid::new(2, 1.0).unwrap()).unwrap_err();
        assert_eq!(err, Error::PropertyFlagMissing("C2"));
    }

    #[test]
    fn u_plus_ceiling() {
        let space = FiniteSpace::uniform(1);
        let g = DyadicGridUtility::sample(&StateUtility::linear(&space), DyadicGrid::new(2, 1.0).unwrap()).unwrap();
        assert_eq!(build_u_plus(&g, 0, 0.3).unwrap(), 0.5);
        assert_eq!(build_u_plus(&g, 0, 0.25).unwrap(), 0.25);
        assert_eq!(build_u_plus(&g, 0, -1.0).unwrap(), -1.0);
        assert!(matches!(build_u_plus(&g, 0, 1.5), Err(Error::OutOfGridRange { .. })));
    }

    #[test]
    fn flat_segment_fails_a_q() {
        let space = FiniteSpace::uniform(2);
        let flat = table(&[(-1.0, -1.0), (0.0, 0.0), (0.5, 0.0), (1.0, 0.5)]);
        let u = StateUtility::new(&space, vec![Curve::Linear, flat]).unwrap();
        let g = DyadicGridUtility::sample(&u, DyadicGrid::new(3, 1.0).unwrap()).unwrap();
        let r = validate_aq_bq(&g);
        assert_eq!(r.a_q_failing_weight, 0.5);
        assert_eq!(g.theta(), &[true, false]);
    }

    #[test]
    fn null_jump_has_zero_failing_weight() {
        let space = FiniteSpace::with_weights(vec![1.0, 0.0]).unwrap();
        let u = StateUtility::new(&space, vec![Curve::Linear, step_at_zero(1.0)]).unwrap();
        let g = DyadicGridUtility::sample(&u, DyadicGrid::new(3, 1.0).unwrap()).unwrap();
        let r = validate_aq_bq(&g);
        assert!(!r.outcomes[1].b_q);
        assert_eq!(r.b_q_failing_weight, 0.0);
    }

    #[test]
    fn table_jumps_and_thresholds() {
        let space = FiniteSpace::uniform(2);
        let u = StateUtility::new(&space, vec![step_at_zero(1.0), step_at_zero(0.3)]).unwrap();
        let r = detect_jumps(JumpSource::Utility(&u), 0.5, 8.0).unwrap();
        assert_eq!(r.outcomes[0].jumps, vec![Jump { location: 0.0, size: 1.0 }]);
        assert_eq!(r.outcomes[0].tau, ExtendedReal::Finite(0.0));
        assert!(r.outcomes[1].jumps.is_empty());
        assert_eq!(r.outcomes[1].tau, ExtendedReal::PosInf);
        let smooth = StateUtility::state_independent(&space, Curve::Exponential { gamma: 1.0 });
        let r = detect_jumps(JumpSource::Utility(&smooth), 0.01, 8.0).unwrap();
        assert!(r.outcomes.iter().all(|o| o.tau == ExtendedReal::PosInf));
    }

    #[test]
    fn grid_jumps_are_lower_bounds() {
        let space = FiniteSpace::uniform(2);
        let u = StateUtility::new(&space, vec![step_at_zero(1.0), Curve::PowerOdd { p: 3.0 }]).unwrap();
        let g = DyadicGridUtility::sample(&u, DyadicGrid::new(4, 2.0).unwrap()).unwrap();
        let r = detect_jumps(JumpSource::Grid(&g), 0.5, 2.0).unwrap();
        let j = r.outcomes[0].jumps[0];
        assert_eq!(j.location, 0.0);
        assert!(j.size <= 1.0 && j.size > 0.8);
        assert!(r.outcomes[1].jumps.is_empty());
    }

    #[test]
    fn repair_null_jump_preserves_t() {
        let space = FiniteSpace::with_weights(vec![1.0, 0.0]).unwrap();
        let u = StateUtility::new(&space, vec![Curve::Exponential { gamma: 1.0 }, step_at_zero(1.0)]).unwrap();
        let r = detect_jumps(JumpSource::Utility(&u), 0.5, 8.0).unwrap();
        let fixed = repair_continuous(&u, &r).unwrap();
        let f = Act::new(&space, vec![0.7, -0.3]).unwrap();
        let t = AdditiveRepresentation::new(u).evaluate(&f).unwrap();
        let t_hat = AdditiveRepresentation::new(fixed.clone()).evaluate(&f).unwrap();
        assert!((t - t_hat).abs() <= 1e-12);
        let again = repair_continuous(&fixed, &detect_jumps(JumpSource::Utility(&fixed), 0.5, 8.0).unwrap()).unwrap();
        assert_eq!(again, fixed);
    }

    #[test]
    fn repair_positive_jump_is_violation() {
        let space = FiniteSpace::uniform(2);
        let u = StateUtility::new(&space, vec![Curve::Linear, step_at_zero(1.0)]).unwrap();
        let r = detect_jumps(JumpSource::Utility(&u), 0.5, 8.0).unwrap();
        match repair_continuous(&u, &r) {
            Err(Error::ContinuityViolation { outcome, location, .. }) => {
                assert_eq!(outcome, "w2");
                assert_eq!(location, 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn repair_without_jumps_is_identity() {
        let space = FiniteSpace::uniform(2);
        let u = StateUtility::state_independent(&space, Curve::PowerOdd { p: 3.0 });
        let r = detect_jumps(JumpSource::Utility(&u), 0.5, 8.0).unwrap();
        assert_eq!(repair_continuous(&u, &r).unwrap(), u);
    }

    #[test]
    fn grid_pipeline_to_regular_utility() {
        let space = FiniteSpace::with_weights(vec![0.5, 0.5, 0.0]).unwrap();
        let u = StateUtility::new(&space, vec![Curve::Linear, Curve::PowerOdd { p: 3.0 }, step_at_zero(1.0)]).unwrap();
        let oracle = RepresentationOracle::new(AdditiveRepresentation::new(u)).unwrap();
        let g = extract_utility(&oracle, DyadicGrid::new(3, 2.0).unwrap()).unwrap();
        let su = g.to_state_utility().unwrap();
        validate_regular(&su).unwrap();
        assert_eq!(su.curve(2), &Curve::Linear);
    }
}
