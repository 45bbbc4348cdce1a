//! Conditional Chisini means m(f | G): G-measurable acts g with
//! T(f 1_A) = T(g 1_A) for every A ∈ G.
//!
//! For an additive functional the solution is u_G⁻¹(E[u(f) | G]) atom by
//! atom. [`solve_by_bisection`] reaches the same acts through a scalar
//! root search on each atom and serves as the independent cross-check.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::functional::{spot_check_additivity, PreferenceFunctional};
use crate::measure::{conditional_expectation, same_space, Act, EventSet, PartitionAlgebra};
use crate::utility::{project_utility, validate_regular, AdditiveRepresentation, ExtendedReal};

/// Base residual tolerance; effective tolerance is this times (1 + ‖f‖∞).
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

/// Up to this many atoms every union of atoms is enumerated.
pub const MAX_ENUMERATED_ATOMS: usize = 20;

pub fn residual_tolerance(f: &Act) -> f64 {
    RESIDUAL_TOLERANCE * (1.0 + f.sup_norm())
}

#[derive(Debug, Clone, Serialize)]
pub struct EventResidual {
    /// Bit k set iff atom k belongs to the event.
    pub atoms: u64,
    pub event: EventSet,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChisiniSolution {
    pub act: Act,
    /// h = E[u(f) | G].
    pub conditional_utility: Act,
    #[serde(skip)]
    pub g_alg: PartitionAlgebra,
    pub residuals: Vec<EventResidual>,
    /// False when the partition has too many atoms and only atoms were checked.
    pub exhaustive: bool,
    pub tolerance: f64,
}

impl ChisiniSolution {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    pub fn passes(&self) -> bool {
        self.max_residual() <= self.tolerance
    }

    /// One value per atom.
    pub fn atom_values(&self) -> Vec<f64> {
        self.g_alg.atoms().iter().map(|a| self.act.value(a[0])).collect()
    }
}

pub fn chisini_mean(rep: &AdditiveRepresentation, f: &Act, g_alg: &PartitionAlgebra) -> Result<ChisiniSolution> {
    chisini_mean_with(rep, f, g_alg, Execution::default())
}

pub fn chisini_mean_with(
    rep: &AdditiveRepresentation,
    f: &Act,
    g_alg: &PartitionAlgebra,
    exec: Execution,
) -> Result<ChisiniSolution> {
    same_space(rep.space(), f.space())?;
    same_space(rep.space(), g_alg.space())?;
    validate_regular(rep.utility())?;
    let u_f = rep.utility().apply(f)?;
    let h = conditional_expectation(&u_f, g_alg)?;
    let pu = project_utility(rep, g_alg)?;
    let per_atom = g_alg
        .atoms()
        .iter()
        .enumerate()
        .map(|(k, atom)| {
            if g_alg.atom_probability(k) == 0.0 {
                return Ok(0.0);
            }
            let w = atom[0];
            match pu.curve_at(w).inverse(h.value(w)) {
                ExtendedReal::Finite(y) => Ok(y),
                other => Err(Error::NonFiniteSolution { outcome: w, value: other.to_f64() }),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let act = g_alg.act_from_atom_values(&per_atom);
    let (residuals, exhaustive) = residual_table(rep, f, &act, g_alg, exec);
    Ok(ChisiniSolution {
        act,
        conditional_utility: h,
        g_alg: g_alg.clone(),
        residuals,
        exhaustive,
        tolerance: residual_tolerance(f),
    })
}

fn residual_table(
    t: &dyn PreferenceFunctional,
    f: &Act,
    g: &Act,
    g_alg: &PartitionAlgebra,
    exec: Execution,
) -> (Vec<EventResidual>, bool) {
    let k = g_alg.num_atoms();
    let residual = |mask: u64| {
        let event = g_alg.union_of_atoms(mask);
        let lhs = t.evaluate_values(f.masked(&event).expect("same space").values());
        let rhs = t.evaluate_values(g.masked(&event).expect("same space").values());
        EventResidual { atoms: mask, event, residual: (lhs - rhs).abs() }
    };
    if k <= MAX_ENUMERATED_ATOMS {
        (exec.map_range(1usize << k, |m| residual(m as u64)), true)
    } else {
        (exec.map_range(k, |a| residual(1u64 << a)), false)
    }
}

/// Independent solver: on each positive-probability atom A, bisects
/// c ↦ V_A(c 1_A) against V_A(f) over [−‖f‖∞ − 1, ‖f‖∞ + 1]. On null
/// atoms it returns the unweighted average of f, a different version than
/// [`chisini_mean`]'s 0.
pub fn solve_by_bisection(rep: &AdditiveRepresentation, f: &Act, g_alg: &PartitionAlgebra) -> Result<Act> {
    same_space(rep.space(), f.space())?;
    same_space(rep.space(), g_alg.space())?;
    let space = rep.space();
    let bound = f.sup_norm() + 1.0;
    let per_atom = g_alg
        .atoms()
        .iter()
        .enumerate()
        .map(|(k, atom)| {
            if g_alg.atom_probability(k) == 0.0 {
                return Ok(atom.iter().map(|&i| f.value(i)).sum::<f64>() / atom.len() as f64);
            }
            let side = |c: f64| -> f64 { atom.iter().map(|&i| space.weight(i) * rep.utility().eval(i, c)).sum() };
            let target: f64 = atom.iter().map(|&i| space.weight(i) * rep.utility().eval(i, f.value(i))).sum();
            bisect_increasing(side, target, -bound, bound)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(g_alg.act_from_atom_values(&per_atom))
}

/// Bisection for a nondecreasing `phi` with phi(lo) ≤ target ≤ phi(hi);
/// runs to floating-point resolution.
pub fn bisect_increasing(phi: impl Fn(f64) -> f64, target: f64, lo: f64, hi: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    if !(phi(a) <= target && target <= phi(b)) {
        return Err(Error::BisectionBracketFailure { target, lo, hi });
    }
    loop {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if phi(mid) < target {
            a = mid;
        } else {
            b = mid;
        }
    }
    // Pick the endpoint closer in value.
    Ok(if (phi(a) - target).abs() < (phi(b) - target).abs() { a } else { b })
}

#[derive(Debug, Clone, Serialize)]
pub struct Conditionability {
    pub pass: bool,
    pub worst_residual: f64,
    pub events_checked: usize,
    /// Atoms alone were checked, justified by verified additivity.
    pub atoms_only: bool,
}

/// Checks T(f 1_A) = T(g 1_A) for A ∈ G. Declared-additive functionals
/// (after a spot check) are verified on atoms only; anything else on all
/// 2^k unions of atoms.
pub fn verify_conditionable(
    t: &dyn PreferenceFunctional,
    f: &Act,
    g: &Act,
    g_alg: &PartitionAlgebra,
    tol: f64,
) -> Result<Conditionability> {
    same_space(t.space(), f.space())?;
    same_space(t.space(), g.space())?;
    g_alg.check_measurable(g)?;
    let atoms_only = t.is_additive() && spot_check_additivity(t, &[-1.0, 0.0, 1.0]);
    let k = g_alg.num_atoms();
    let masks: Vec<u64> = if atoms_only {
        (0..k).map(|a| 1u64 << a).collect()
    } else {
        if k > MAX_ENUMERATED_ATOMS {
            return Err(Error::ComplexityCapExceeded { what: "atoms", actual: k, cap: MAX_ENUMERATED_ATOMS });
        }
        (0..(1u64 << k)).collect()
    };
    let residuals = Execution::default().map_slice(&masks, |&m| {
        let event = g_alg.union_of_atoms(m);
        let lhs = t.evaluate_values(f.masked(&event).expect("same space").values());
        let rhs = t.evaluate_values(g.masked(&event).expect("same space").values());
        (lhs - rhs).abs()
    });
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    Ok(Conditionability { pass: worst <= tol, worst_residual: worst, events_checked: masks.len(), atoms_only })
}

/// max |m(f 1_A | G) − m(f | G) 1_A| over positive-weight outcomes.
pub fn taking_out_defect(rep: &AdditiveRepresentation, f: &Act, a: &EventSet, g_alg: &PartitionAlgebra) -> Result<f64> {
    if !g_alg.contains_event(a) {
        return Err(Error::EventNotInAlgebra);
    }
    let masked = chisini_mean(rep, &f.masked(a)?, g_alg)?.act;
    let outer = chisini_mean(rep, f, g_alg)?.act.masked(a)?;
    Ok(masked.max_diff_non_null(&outer))
}

/// m(f 1_A | G) = m(f | G) 1_A up to null events, within 1e-9.
pub fn taking_out(rep: &AdditiveRepresentation, f: &Act, a: &EventSet, g_alg: &PartitionAlgebra) -> Result<bool> {
    Ok(taking_out_defect(rep, f, a, g_alg)? <= RESIDUAL_TOLERANCE)
}

/// Both candidates must solve the Chisini system; then they must agree on
/// every outcome of positive weight.
pub fn uniqueness_check(
    rep: &AdditiveRepresentation,
    f: &Act,
    g_alg: &PartitionAlgebra,
    g1: &Act,
    g2: &Act,
) -> Result<bool> {
    let tol = residual_tolerance(f);
    for (name, g) in [("first", g1), ("second", g2)] {
        let check = verify_conditionable(rep, f, g, g_alg, tol)?;
        if !check.pass {
            return Err(Error::PreconditionFailed(format!(
                "{name} candidate is not a conditional Chisini mean (residual {:.3e})",
                check.worst_residual
            )));
        }
    }
    Ok(g1.max_diff_non_null(g2) <= tol)
}
