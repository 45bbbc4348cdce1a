//! Families of nonlinear conditional expectations {E_G} generated by a
//! pair (u, P):
//!
//! ```text
//! E_G(X) = u_G⁻¹(E[u(X) | G]),    E_0(X) = u_0⁻¹(E[u(X)]),
//! ```
//!
//! with u_0(x) = Σ p(ω) u(ω, x). The checks here audit locality, time
//! consistency E_0(E_G(X)) = E_0(X), and the conditions on E_0 (strict
//! dichotomic monotonicity and pointwise continuity) at finite scale.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audit::{AuditEntry, AuditReport, Evidence, Status};
use crate::chisini::{chisini_mean, RESIDUAL_TOLERANCE};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::functional::decode_lex;
use crate::measure::{conditional_expectation, is_null_event, Act, EventSet, FiniteSpace, PartitionAlgebra};
use crate::utility::{project_utility, validate_regular, AdditiveRepresentation, Curve, ExtendedReal};

/// Number of terms in the continuity sequences X + 2⁻ⁿ·P.
pub const CONTINUITY_TERMS: usize = 64;
/// The last continuity defect must fall below this.
pub const CONTINUITY_FINAL_DEFECT: f64 = 1e-6;
/// Margin below which a "strict" improvement counts as a violation.
pub const MONOTONICITY_MARGIN: f64 = 1e-9;

/// An unconditional certainty equivalent E_0.
pub trait InitialExpectation: Send + Sync {
    fn space(&self) -> &Arc<FiniteSpace>;
    fn e0(&self, x: &Act) -> Result<f64>;
    fn name(&self) -> String;
}

/// A full family G ↦ E_G.
pub trait ConditionalFamily: InitialExpectation {
    fn conditional(&self, x: &Act, g_alg: &PartitionAlgebra) -> Result<Act>;
}

#[derive(Debug, Clone)]
pub struct ExpectationFamily {
    rep: AdditiveRepresentation,
    u0: Curve,
}

impl ExpectationFamily {
    /// The family generated by a regular utility.
    pub fn new(rep: AdditiveRepresentation) -> Result<Self> {
        validate_regular(rep.utility())?;
        Ok(ExpectationFamily::unchecked(rep))
    }

    /// Skips the regularity check so irregular utilities can be audited.
    /// Conditioning still requires regularity; E_0 uses the generalized
    /// inverse of u_0.
    pub fn unchecked(rep: AdditiveRepresentation) -> Self {
        let trivial = PartitionAlgebra::trivial(rep.space());
        let u0 = project_utility(&rep, &trivial).expect("same space").atom_curves()[0].clone();
        ExpectationFamily { rep, u0 }
    }

    pub fn representation(&self) -> &AdditiveRepresentation {
        &self.rep
    }

    /// u_0(x) = Σ p(ω) u(ω, x).
    pub fn initial_utility(&self) -> &Curve {
        &self.u0
    }

    pub fn evaluate_eg(&self, x: &Act, g_alg: &PartitionAlgebra) -> Result<Act> {
        Ok(chisini_mean(&self.rep, x, g_alg)?.act)
    }
}

impl InitialExpectation for ExpectationFamily {
    fn space(&self) -> &Arc<FiniteSpace> {
        self.rep.space()
    }

    fn e0(&self, x: &Act) -> Result<f64> {
        let t = self.rep.evaluate(x)?;
        match self.u0.inverse(t) {
            ExtendedReal::Finite(y) => Ok(y),
            other => Err(Error::NonFiniteSolution { outcome: 0, value: other.to_f64() }),
        }
    }

    fn name(&self) -> String {
        "expectation-family".into()
    }
}

impl ConditionalFamily for ExpectationFamily {
    fn conditional(&self, x: &Act, g_alg: &PartitionAlgebra) -> Result<Act> {
        self.evaluate_eg(x, g_alg)
    }
}

/// A deliberately inconsistent family: linear conditional expectation
/// for E_G, but the nonlinear certainty equivalent for E_0.
#[derive(Debug, Clone)]
pub struct LinearConditioning {
    inner: ExpectationFamily,
}

impl LinearConditioning {
    pub fn new(rep: AdditiveRepresentation) -> Result<Self> {
        Ok(LinearConditioning { inner: ExpectationFamily::new(rep)? })
    }
}

impl InitialExpectation for LinearConditioning {
    fn space(&self) -> &Arc<FiniteSpace> {
        self.inner.space()
    }

    fn e0(&self, x: &Act) -> Result<f64> {
        self.inner.e0(x)
    }

    fn name(&self) -> String {
        "linear-conditioning".into()
    }
}

impl ConditionalFamily for LinearConditioning {
    fn conditional(&self, x: &Act, g_alg: &PartitionAlgebra) -> Result<Act> {
        conditional_expectation(x, g_alg)
    }
}

/// E_0 given directly by a preference functional evaluator, e.g. a median.
pub struct FunctionalExpectation<T> {
    inner: T,
}

impl<T> FunctionalExpectation<T> {
    pub fn new(inner: T) -> Self {
        FunctionalExpectation { inner }
    }
}

impl<T: crate::functional::PreferenceFunctional> InitialExpectation for FunctionalExpectation<T> {
    fn space(&self) -> &Arc<FiniteSpace> {
        self.inner.space()
    }

    fn e0(&self, x: &Act) -> Result<f64> {
        self.inner.evaluate(x)
    }

    fn name(&self) -> String {
        self.inner.name()
    }
}

pub fn evaluate_eg(fam: &ExpectationFamily, x: &Act, g_alg: &PartitionAlgebra) -> Result<Act> {
    fam.evaluate_eg(x, g_alg)
}

/// E_G(X 1_A) = E_G(X) 1_A up to null events, within 1e-9.
pub fn check_locality(fam: &dyn ConditionalFamily, x: &Act, g_alg: &PartitionAlgebra, a: &EventSet) -> Result<bool> {
    if !g_alg.contains_event(a) {
        return Err(Error::EventNotInAlgebra);
    }
    let lhs = fam.conditional(&x.masked(a)?, g_alg)?;
    let rhs = fam.conditional(x, g_alg)?.masked(a)?;
    Ok(lhs.max_diff_non_null(&rhs) <= RESIDUAL_TOLERANCE)
}

/// |E_0(E_G(X)) − E_0(X)|.
pub fn check_tower(fam: &dyn ConditionalFamily, x: &Act, g_alg: &PartitionAlgebra) -> Result<f64> {
    let inner = fam.conditional(x, g_alg)?;
    Ok((fam.e0(&inner)? - fam.e0(x)?).abs())
}

/// Tower defects along a chain listed from finest to coarsest.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ChainDefects {
    /// For each link (fine, coarse): max |E_coarse(E_fine(X)) − E_coarse(X)| on non-null outcomes.
    pub links: Vec<f64>,
    /// |E_0(X) − E_0(X)| per chain element, i.e. check_tower for each algebra.
    pub per_algebra: Vec<f64>,
    /// |E_0(E_last(… E_first(X))) − E_0(X)|.
    pub overall: f64,
}

pub fn check_tower_chain(fam: &dyn ConditionalFamily, x: &Act, chain: &[PartitionAlgebra]) -> Result<ChainDefects> {
    for w in chain.windows(2) {
        if !w[1].is_coarser_than(&w[0]) {
            return Err(Error::PreconditionFailed(format!("{} is not coarser than {}", w[1], w[0])));
        }
    }
    let mut links = Vec::new();
    for w in chain.windows(2) {
        let nested = fam.conditional(&fam.conditional(x, &w[0])?, &w[1])?;
        let direct = fam.conditional(x, &w[1])?;
        links.push(nested.max_diff_non_null(&direct));
    }
    let per_algebra = chain.iter().map(|g| check_tower(fam, x, g)).collect::<Result<Vec<_>>>()?;
    let mut cur = x.clone();
    for g in chain {
        cur = fam.conditional(&cur, g)?;
    }
    let overall = (fam.e0(&cur)? - fam.e0(x)?).abs();
    Ok(ChainDefects { links, per_algebra, overall })
}

/// E_G(Y) = Y for G-measurable Y, up to null events within 1e-10.
pub fn check_fixpoint_on_measurable(fam: &dyn ConditionalFamily, y: &Act, g_alg: &PartitionAlgebra) -> Result<bool> {
    g_alg.check_measurable(y)?;
    Ok(fam.conditional(y, g_alg)?.max_diff_non_null(y) <= 1e-10)
}

/// Finite-scale audit of the conditions on E_0:
///
/// * strict dichotomic monotonicity
///   x < y ⇒ E_0(x 1_A + Z 1_{A^c}) < E_0(y 1_A + Z 1_{A^c}) over all
///   positive-probability events A, grid pairs and backgrounds Z;
/// * pointwise continuity along X + 2⁻ⁿ P, n = 1..64, for perturbations
///   P ∈ {+1, −1, random signs}: the defect must trend to zero and end
///   below 1e-6.
///
/// Backgrounds and base acts are enumerated when there are at most
/// `trials` grid acts, otherwise `trials` of them are drawn with a fixed
/// seed.
pub fn audit_assumption_e0(fam: &dyn InitialExpectation, grid: &[f64], trials: usize) -> Result<AuditReport> {
    audit_assumption_e0_with(fam, grid, trials, Execution::default())
}

pub fn audit_assumption_e0_with(
    fam: &dyn InitialExpectation,
    grid: &[f64],
    trials: usize,
    exec: Execution,
) -> Result<AuditReport> {
    if grid.is_empty() {
        return Err(Error::PreconditionFailed("grid is empty".into()));
    }
    let space = fam.space().clone();
    let n = space.len();
    if n > 20 {
        return Err(Error::ComplexityCapExceeded { what: "outcomes", actual: n, cap: 20 });
    }
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let acts = sample_grid_acts(&space, &grid, trials.max(1), &mut rng);

    // strict dichotomic monotonicity
    let events: Vec<EventSet> =
        (1u64..(1u64 << n)).map(|m| EventSet::from_mask(&space, m)).filter(|a| !is_null_event(a)).collect();
    let pairs: Vec<(f64, f64)> =
        grid.iter().enumerate().flat_map(|(i, &x)| grid[i + 1..].iter().map(move |&y| (x, y))).collect();
    let n_acts = acts.len();
    let jobs: Vec<(usize, usize, usize)> = (0..events.len())
        .flat_map(|e| (0..pairs.len()).flat_map(move |p| (0..n_acts).map(move |z| (e, p, z))))
        .collect();
    let outcomes = exec.map_slice(&jobs, |&(e, p, z)| -> Result<Option<Evidence>> {
        let a = &events[e];
        let (x, y) = pairs[p];
        let bg = &acts[z];
        let lo = bg.map(|i, v| if a.contains(i) { x } else { v });
        let hi = bg.map(|i, v| if a.contains(i) { y } else { v });
        let (vl, vh) = (fam.e0(&lo)?, fam.e0(&hi)?);
        Ok((vh - vl <= MONOTONICITY_MARGIN).then(|| Evidence::StrictMonotonicity {
            event: a.clone(),
            lower: x,
            upper: y,
            background: bg.masked(&a.complement()).expect("same space"),
            value_lower: vl,
            value_upper: vh,
        }))
    });
    let mut mono_witness = None;
    for o in outcomes {
        if let Some(w) = o? {
            mono_witness = Some(w);
            break;
        }
    }

    // pointwise continuity
    let mut perturbations = vec![Act::constant(&space, 1.0), Act::constant(&space, -1.0)];
    let signs: Vec<f64> = (0..n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
    perturbations.push(Act::new(&space, signs)?);
    let cont_jobs: Vec<(usize, usize)> =
        (0..acts.len()).flat_map(|a| (0..perturbations.len()).map(move |p| (a, p))).collect();
    let cont = exec.map_slice(&cont_jobs, |&(ai, pi)| -> Result<Option<Evidence>> {
        let x = &acts[ai];
        let pert = &perturbations[pi];
        let base = fam.e0(x)?;
        let defects = (1..=CONTINUITY_TERMS)
            .map(|k| {
                let eps = 0.5f64.powi(k as i32);
                let xn = x.map(|i, v| v + eps * pert.value(i));
                Ok((fam.e0(&xn)? - base).abs())
            })
            .collect::<Result<Vec<f64>>>()?;
        let final_defect = defects[defects.len() - 1];
        let tail_monotone = defects[CONTINUITY_TERMS / 2..].windows(2).all(|w| w[1] <= w[0] + 1e-12);
        let ok = final_defect < CONTINUITY_FINAL_DEFECT && tail_monotone;
        Ok((!ok).then(|| Evidence::Continuity { act: x.clone(), perturbation: pert.clone(), final_defect, defects }))
    });
    let mut cont_witness = None;
    for o in cont {
        if let Some(w) = o? {
            cont_witness = Some(w);
            break;
        }
    }

    Ok(AuditReport::new(
        fam.name(),
        vec![
            AuditEntry {
                property: "e0_strict_dichotomic_monotonicity".into(),
                status: Status::from_bool(mono_witness.is_none()),
                checked: jobs.len(),
                witness: mono_witness,
            },
            AuditEntry {
                property: "e0_pointwise_continuity".into(),
                status: Status::from_bool(cont_witness.is_none()),
                checked: cont_jobs.len(),
                witness: cont_witness,
            },
        ],
    ))
}

fn sample_grid_acts(space: &Arc<FiniteSpace>, grid: &[f64], trials: usize, rng: &mut ChaCha8Rng) -> Vec<Act> {
    let n = space.len();
    let rows: Vec<Vec<f64>> = match grid.len().checked_pow(n as u32) {
        Some(total) if total <= trials => (0..total).map(|c| decode_lex(c, n, grid)).collect(),
        _ => (0..trials).map(|_| (0..n).map(|_| grid[rng.gen_range(0..grid.len())]).collect()).collect(),
    };
    rows.into_iter().map(|v| Act::from_raw(space, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::Median;
    use crate::utility::{KnotTable, StateUtility};

    fn family(curve: Curve, weights: Vec<f64>) -> ExpectationFamily {
        let space = FiniteSpace::with_weights(weights).unwrap();
        ExpectationFamily::new(AdditiveRepresentation::new(StateUtility::state_independent(&space, curve))).unwrap()
    }

    #[test]
    fn exponential_trivial_is_log_four_thirds() {
        let fam = family(Curve::Exponential { gamma: 1.0 }, vec![0.5, 0.5]);
        let x = Act::new(fam.space(), vec![0.0, 2f64.ln()]).unwrap();
        let eg = fam.evaluate_eg(&x, &PartitionAlgebra::trivial(fam.space())).unwrap();
        for v in eg.values() {
            assert!((v - (4.0f64 / 3.0).ln()).abs() < 1e-12);
        }
        assert!((fam.e0(&x).unwrap() - (4.0f64 / 3.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn linear_family_is_conditional_expectation() {
        let fam = family(Curve::Linear, vec![0.2, 0.3, 0.5]);
        let g = PartitionAlgebra::new(fam.space(), vec![vec![0, 1], vec![2]]).unwrap();
        let x = Act::new(fam.space(), vec![1.0, -2.0, 4.0]).unwrap();
        let eg = fam.evaluate_eg(&x, &g).unwrap();
        assert!(eg.max_diff_non_null(&conditional_expectation(&x, &g).unwrap()) < 1e-12);
        assert!(check_tower(&fam, &x, &g).unwrap() < 1e-12);
    }

    #[test]
    fn locality_and_fixpoint() {
        let fam = family(Curve::PowerOdd { p: 3.0 }, vec![0.25, 0.25, 0.5]);
        let space = fam.space().clone();
        let g = PartitionAlgebra::new(&space, vec![vec![0, 1], vec![2]]).unwrap();
        let x = Act::new(&space, vec![0.3, -1.2, 2.0]).unwrap();
        assert!(check_locality(&fam, &x, &g, &EventSet::full(&space)).unwrap());
        assert!(check_locality(&fam, &x, &g, &EventSet::empty(&space)).unwrap());
        assert!(check_locality(&fam, &x, &g, &EventSet::from_indices(&space, &[2]).unwrap()).unwrap());
        let bad = EventSet::from_indices(&space, &[0]).unwrap();
        assert_eq!(check_locality(&fam, &x, &g, &bad), Err(Error::EventNotInAlgebra));
        let y = g.act_from_atom_values(&[1.5, -0.5]);
        assert!(check_fixpoint_on_measurable(&fam, &y, &g).unwrap());
        assert!(check_fixpoint_on_measurable(&fam, &Act::constant(&space, 0.7), &g).unwrap());
        assert!(matches!(check_fixpoint_on_measurable(&fam, &x, &g), Err(Error::NotMeasurable { .. })));
    }

    #[test]
    fn corrupted_family_breaks_tower() {
        let space = FiniteSpace::uniform(2);
        let rep = AdditiveRepresentation::new(StateUtility::state_independent(&space, Curve::PowerOdd { p: 3.0 }));
        let fam = LinearConditioning::new(rep).unwrap();
        let x = Act::new(&space, vec![0.0, 1.0]).unwrap();
        let d = check_tower(&fam, &x, &PartitionAlgebra::trivial(&space)).unwrap();
        assert!((d - (0.5f64.cbrt() - 0.5)).abs() < 1e-12);
        assert!(d > 0.01);
    }

    #[test]
    fn chain_defects_vanish_and_non_nested_is_rejected() {
        let fam = family(Curve::Exponential { gamma: 2.0 }, vec![0.1, 0.2, 0.3, 0.4]);
        let space = fam.space().clone();
        let fine = PartitionAlgebra::finest(&space);
        let mid = PartitionAlgebra::new(&space, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let coarse = PartitionAlgebra::trivial(&space);
        let x = Act::new(&space, vec![1.0, -0.5, 0.25, 2.0]).unwrap();
        let d = check_tower_chain(&fam, &x, &[fine, mid.clone(), coarse.clone()]).unwrap();
        assert!(d.overall < 1e-12 && d.links.iter().all(|&l| l < 1e-12));
        let other = PartitionAlgebra::new(&space, vec![vec![0, 2], vec![1, 3]]).unwrap();
        assert!(check_tower_chain(&fam, &x, &[mid, other]).is_err());
    }

    #[test]
    fn cash_additivity_separates_linear_from_state_dependent_exponential() {
        let space = FiniteSpace::uniform(2);
        let g = PartitionAlgebra::trivial(&space);
        let x = Act::new(&space, vec![0.0, 1.0]).unwrap();
        let defect = |u: StateUtility| {
            let fam = ExpectationFamily::new(AdditiveRepresentation::new(u)).unwrap();
            let shifted = fam.evaluate_eg(&x.shifted(1.0), &g).unwrap();
            shifted.max_diff_non_null(&fam.evaluate_eg(&x, &g).unwrap().shifted(1.0))
        };
        assert!(defect(StateUtility::linear(&space)) < 1e-10);
        // the state-independent entropic mean is translation invariant
        assert!(defect(StateUtility::state_independent(&space, Curve::Exponential { gamma: 1.0 })) < 1e-10);
        let mixed =
            StateUtility::new(&space, vec![Curve::Exponential { gamma: 1.0 }, Curve::Exponential { gamma: 2.0 }])
                .unwrap();
        assert!(defect(mixed) > 1e-3);
    }

    #[test]
    fn regular_family_passes_e0_audit() {
        let fam = family(Curve::Exponential { gamma: 1.0 }, vec![0.2, 0.3, 0.5]);
        let r = audit_assumption_e0(&fam, &[-1.0, 0.0, 1.0], 64).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn median_has_flat_region() {
        let space = FiniteSpace::uniform(3);
        let e0 = FunctionalExpectation::new(Median::new(&space));
        let r = audit_assumption_e0(&e0, &[-1.0, 0.0, 1.0], 64).unwrap();
        let entry = r.entry("e0_strict_dichotomic_monotonicity").unwrap();
        assert_eq!(entry.status, Status::Fail);
        match entry.witness.as_ref().unwrap() {
            Evidence::StrictMonotonicity { value_lower, value_upper, .. } => assert_eq!(value_lower, value_upper),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn jump_utility_fails_continuity() {
        let space = FiniteSpace::uniform(2);
        let jump = KnotTable::new(vec![(-1.0, -2.0), (0.0, -1.0), (0.0, 0.0), (1.0, 1.0)], 1.0, 1.0).unwrap();
        let u = StateUtility::new(&space, vec![Curve::Linear, Curve::Table(jump)]).unwrap();
        let fam = ExpectationFamily::unchecked(AdditiveRepresentation::new(u));
        let x = Act::new(&space, vec![1.0, 0.0]).unwrap();
        let xn = Act::new(&space, vec![1.0 - 1e-9, -1e-9]).unwrap();
        assert!(((fam.e0(&xn).unwrap() - fam.e0(&x).unwrap()).abs() - 0.5).abs() < 1e-6);
        let r = audit_assumption_e0(&fam, &[-1.0, 0.0, 1.0], 64).unwrap();
        assert_eq!(r.entry("e0_pointwise_continuity").unwrap().status, Status::Fail);
    }
}
