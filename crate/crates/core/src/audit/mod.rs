//! Black-box audits of preference functionals on grid-valued acts:
//! strict monotonicity, the sure-thing principle by exhaustive search,
//! conditionability on σ(A) = {∅, A, A^c, Ω}, and a harness checking that
//! the last two verdicts agree.

mod report;
mod zoo;

use std::sync::Arc;

pub use report::*;
pub use zoo::{functional_zoo, ZooEntry};

use serde::Serialize;

use crate::chisini::bisect_increasing;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::functional::{decode_lex, PreferenceFunctional};
use crate::measure::{is_null_event, Act, EventSet, FiniteSpace};

/// Environment variable overriding the outcome cap.
pub const CAP_ENV: &str = "CHISINI_CAP";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Caps {
    pub max_outcomes: usize,
    pub max_grid: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { max_outcomes: 6, max_grid: 5 }
    }
}

impl Caps {
    /// Applies `CHISINI_CAP` to the outcome cap when it parses as an integer.
    pub fn with_env_override(mut self) -> Self {
        if let Some(n) = std::env::var(CAP_ENV).ok().and_then(|s| s.trim().parse().ok()) {
            self.max_outcomes = n;
        }
        self
    }
}

#[derive(Debug, Clone)]
pub struct AuditConfig {
    pub grid: Vec<f64>,
    /// A strict comparison counts only when it clears this margin.
    pub margin: f64,
    /// Residual tolerance for conditionability equations.
    pub tol: f64,
    pub caps: Caps,
    pub execution: Execution,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            grid: vec![-1.0, 0.0, 1.0],
            margin: 1e-9,
            tol: 1e-9,
            caps: Caps::default(),
            execution: Execution::default(),
        }
    }
}

impl AuditConfig {
    pub fn with_grid(mut self, grid: Vec<f64>) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    fn sorted_grid(&self) -> Result<Vec<f64>> {
        let mut g = self.grid.clone();
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("grid values must be finite".into()));
        }
        g.sort_by(f64::total_cmp);
        g.dedup();
        if g.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        Ok(g)
    }

    fn check_caps(&self, n: usize, grid: &[f64]) -> Result<()> {
        if n > self.caps.max_outcomes {
            return Err(Error::ComplexityCapExceeded { what: "outcomes", actual: n, cap: self.caps.max_outcomes });
        }
        if grid.len() > self.caps.max_grid {
            return Err(Error::ComplexityCapExceeded {
                what: "grid values",
                actual: grid.len(),
                cap: self.caps.max_grid,
            });
        }
        // masks are u64 and act codes usize
        if n >= 63 {
            return Err(Error::ComplexityCapExceeded { what: "outcomes", actual: n, cap: 62 });
        }
        Ok(())
    }
}

/// T precomputed on every grid act, indexed by lexicographic code.
struct ActTable {
    n: usize,
    grid: Vec<f64>,
    /// m^(n-1-i): weight of outcome i's digit in a code.
    place: Vec<usize>,
    values: Vec<f64>,
}

impl ActTable {
    fn build(t: &dyn PreferenceFunctional, grid: &[f64], exec: Execution) -> Self {
        let n = t.space().len();
        let m = grid.len();
        let total = m.pow(n as u32);
        let place = (0..n).map(|i| m.pow((n - 1 - i) as u32)).collect();
        let values = exec.map_range(total, |c| t.evaluate_values(&decode_lex(c, n, grid)));
        ActTable { n, grid: grid.to_vec(), place, values }
    }

    /// Codes of all assignments supported on the outcomes in `mask`
    /// (digit 0 elsewhere), in increasing order.
    fn codes_on(&self, mask: u64) -> Vec<usize> {
        let outs: Vec<usize> = (0..self.n).filter(|&i| mask >> i & 1 == 1).collect();
        let m = self.grid.len();
        let count = m.pow(outs.len() as u32);
        let mut codes: Vec<usize> = (0..count)
            .map(|mut c| {
                let mut code = 0;
                for &i in outs.iter().rev() {
                    code += (c % m) * self.place[i];
                    c /= m;
                }
                code
            })
            .collect();
        codes.sort_unstable();
        codes
    }

    /// Grid values of `code` on `mask`, 0 elsewhere.
    fn restricted(&self, space: &Arc<FiniteSpace>, code: usize, mask: u64) -> Act {
        let vals = decode_lex(code, self.n, &self.grid);
        Act::from_raw(space, (0..self.n).map(|i| if mask >> i & 1 == 1 { vals[i] } else { 0.0 }).collect())
    }
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Strict monotonicity: for every non-null A, grid pair y < x and grid act
/// f, T(x 1_A + f 1_{A^c}) > T(y 1_A + f 1_{A^c}) by more than the margin.
pub fn check_sm(t: &dyn PreferenceFunctional, cfg: &AuditConfig) -> Result<AuditReport> {
    let grid = cfg.sorted_grid()?;
    let space = t.space().clone();
    let n = space.len();
    cfg.check_caps(n, &grid)?;
    let table = ActTable::build(t, &grid, cfg.execution);
    let full = full_mask(n);
    let events: Vec<u64> = (1..=full).filter(|&m| !is_null_event(&EventSet::from_mask(&space, m))).collect();
    let m = grid.len();
    let checked = events.iter().map(|&a| table.codes_on(full & !a).len() * m * (m - 1) / 2).sum();
    let found = cfg.execution.min_by_key_range(
        events.len(),
        |e| {
            let a = events[e];
            let outs: Vec<usize> = (0..n).filter(|&i| a >> i & 1 == 1).collect();
            let constant_on_a = |k: usize| outs.iter().map(|&i| k * table.place[i]).sum::<usize>();
            for h in table.codes_on(full & !a) {
                for lo in 0..m {
                    for hi in lo + 1..m {
                        let vl = table.values[h + constant_on_a(lo)];
                        let vh = table.values[h + constant_on_a(hi)];
                        if vh - vl <= cfg.margin {
                            return Some((a, h, lo, hi, vl, vh));
                        }
                    }
                }
            }
            None
        },
        |w| (w.0, w.1, w.2, w.3),
    );
    let witness = found.map(|(a, h, lo, hi, vl, vh)| Evidence::StrictMonotonicity {
        event: EventSet::from_mask(&space, a),
        lower: grid[lo],
        upper: grid[hi],
        background: table.restricted(&space, h, full & !a),
        value_lower: vl,
        value_upper: vh,
    });
    Ok(AuditReport::new(
        t.name(),
        vec![AuditEntry {
            property: "strict_monotonicity".into(),
            status: Status::from_bool(witness.is_none()),
            checked,
            witness,
        }],
    ))
}

/// Weak preference T(f,h) ≥ T(g,h) tolerates this much round-off, so the
/// exact indifferences produced by certainty equivalents are not lost.
pub const INDIFFERENCE_SLACK: f64 = 1e-12;

/// Acts supported on `mask`: every grid assignment (lexicographic order),
/// then the constant c 1_mask with T(c 1_mask) = T(v 1_mask) for each
/// non-constant grid assignment v (bisection on [−‖v‖∞ − 1, ‖v‖∞ + 1]).
fn search_acts(t: &dyn PreferenceFunctional, table: &ActTable, mask: u64) -> Vec<Vec<f64>> {
    let n = table.n;
    let restrict = |code: usize| -> Vec<f64> {
        let vals = decode_lex(code, n, &table.grid);
        (0..n).map(|i| if mask >> i & 1 == 1 { vals[i] } else { 0.0 }).collect()
    };
    let grid_acts: Vec<Vec<f64>> = table.codes_on(mask).into_iter().map(restrict).collect();
    let mut out = grid_acts.clone();
    let outs: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
    for v in &grid_acts {
        if outs.iter().all(|&i| v[i] == v[outs[0]]) {
            continue;
        }
        let bound = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) + 1.0;
        let constant = |c: f64| -> Vec<f64> { (0..n).map(|i| if mask >> i & 1 == 1 { c } else { 0.0 }).collect() };
        let target = t.evaluate_values(v);
        if let Ok(c) = bisect_increasing(|c| t.evaluate_values(&constant(c)), target, -bound, bound) {
            let act = constant(c);
            if !out.contains(&act) {
                out.push(act);
            }
        }
    }
    out
}

/// Exhaustive sure-thing search. For every event A with A, A^c nonempty,
/// f, g range over the acts on A and h, h̃ over the acts on A^c built by
/// `search_acts`: the grid-valued assignments plus the certainty-equivalent
/// constants of those assignments. A witness has T(f,h) ≥ T(g,h) (up to
/// [`INDIFFERENCE_SLACK`]) and T(f,h̃) < T(g,h̃) − margin. The reported
/// witness is the lexicographic minimum of (A, f, g, h, h̃) in enumeration
/// order.
pub fn check_st(t: &dyn PreferenceFunctional, cfg: &AuditConfig) -> Result<AuditReport> {
    let grid = cfg.sorted_grid()?;
    let space = t.space().clone();
    let n = space.len();
    cfg.check_caps(n, &grid)?;
    let table =
        ActTable { n, place: (0..n).map(|i| grid.len().pow((n - 1 - i) as u32)).collect(), grid, values: Vec::new() };
    let full = full_mask(n);
    let events: Vec<u64> = (1..full).collect();
    let per_event = cfg.execution.map_slice(&events, |&a| {
        let inside = search_acts(t, &table, a);
        let outside = search_acts(t, &table, full & !a);
        let values: Vec<f64> = inside
            .iter()
            .flat_map(|f| outside.iter().map(move |h| (f, h)))
            .map(|(f, h)| {
                let joint: Vec<f64> = f.iter().zip(h).map(|(x, y)| x + y).collect();
                t.evaluate_values(&joint)
            })
            .collect();
        (inside, outside, values)
    });
    let jobs: Vec<(usize, usize)> =
        (0..events.len()).flat_map(|e| (0..per_event[e].0.len()).map(move |fi| (e, fi))).collect();
    let checked = per_event.iter().map(|(i, o, _)| i.len() * i.len() * o.len()).sum();
    let found = cfg.execution.min_by_key_range(
        jobs.len(),
        |j| {
            let (e, f) = jobs[j];
            let (inside, outside, v) = &per_event[e];
            let k = outside.len();
            let d = |g: usize, h: usize| v[f * k + h] - v[g * k + h];
            for g in 0..inside.len() {
                if g == f {
                    continue;
                }
                let h = (0..k).find(|&h| d(g, h) >= -INDIFFERENCE_SLACK);
                let ht = (0..k).find(|&h| d(g, h) < -cfg.margin);
                if let (Some(h), Some(ht)) = (h, ht) {
                    return Some((e, f, g, h, ht));
                }
            }
            None
        },
        |w| *w,
    );
    let witness = found.map(|(e, f, g, h, ht)| {
        let (inside, outside, v) = &per_event[e];
        let k = outside.len();
        let act = |x: &Vec<f64>| Act::from_raw(&space, x.clone());
        Evidence::SureThing(Witness {
            event: EventSet::from_mask(&space, events[e]),
            f: act(&inside[f]),
            g: act(&inside[g]),
            h: act(&outside[h]),
            h_tilde: act(&outside[ht]),
            values: [v[f * k + h], v[g * k + h], v[f * k + ht], v[g * k + ht]],
        })
    });
    Ok(AuditReport::new(
        t.name(),
        vec![AuditEntry {
            property: "sure_thing".into(),
            status: Status::from_bool(witness.is_none()),
            checked,
            witness,
        }],
    ))
}

/// Re-evaluates a sure-thing witness from scratch.
pub fn revalidate_witness(t: &dyn PreferenceFunctional, w: &Witness, margin: f64) -> Result<bool> {
    let not_a = w.event.complement();
    let eval = |x: &Act, y: &Act| -> Result<f64> {
        let pasted = crate::measure::paste(&x.masked(&w.event)?, &y.masked(&not_a)?, &w.event)?;
        t.evaluate(&pasted)
    };
    let fh = eval(&w.f, &w.h)?;
    let gh = eval(&w.g, &w.h)?;
    let fht = eval(&w.f, &w.h_tilde)?;
    let ght = eval(&w.g, &w.h_tilde)?;
    Ok(fh - gh >= -INDIFFERENCE_SLACK && fht - ght < -margin)
}

/// Conditionability on σ(A): for every grid act f, bisection finds x, y
/// with T(f 1_A) = T(x 1_A) and T(f 1_{A^c}) = T(y 1_{A^c}); then
/// g = x 1_A + y 1_{A^c} must satisfy T(f 1_B) = T(g 1_B) for B ∈ {∅, A, A^c, Ω}.
/// Null A (or null A^c) passes trivially.
pub fn check_conditionable_on_event(
    t: &dyn PreferenceFunctional,
    a: &EventSet,
    cfg: &AuditConfig,
) -> Result<AuditReport> {
    let grid = cfg.sorted_grid()?;
    let space = t.space().clone();
    let n = space.len();
    cfg.check_caps(n, &grid)?;
    crate::measure::same_space(&space, a.space())?;
    let property = format!("conditionable_on[{a}]");
    let not_a = a.complement();
    if is_null_event(a) || is_null_event(&not_a) {
        return Ok(AuditReport::new(
            t.name(),
            vec![AuditEntry { property, status: Status::Pass, checked: 0, witness: None }],
        ));
    }
    let total = grid.len().pow(n as u32);
    let results = cfg.execution.map_range(total, |code| -> Result<Option<Evidence>> {
        let f = Act::from_raw(&space, decode_lex(code, n, &grid));
        let bound = f.sup_norm() + 1.0;
        let on = |e: &EventSet, c: f64| -> f64 {
            let vals: Vec<f64> = (0..n).map(|i| if e.contains(i) { c } else { 0.0 }).collect();
            t.evaluate_values(&vals)
        };
        let fa = f.masked(a)?;
        let fc = f.masked(&not_a)?;
        let t_fa = t.evaluate(&fa)?;
        let t_fc = t.evaluate(&fc)?;
        let x = bisect_increasing(|c| on(a, c), t_fa, -bound, bound)?;
        let y = bisect_increasing(|c| on(&not_a, c), t_fc, -bound, bound)?;
        let g = f.map(|i, _| if a.contains(i) { x } else { y });
        let residuals = [
            // the ∅ equation, T(0) = T(0)
            0.0,
            (t_fa - on(a, x)).abs(),
            (t_fc - on(&not_a, y)).abs(),
            (t.evaluate(&f)? - t.evaluate(&g)?).abs(),
        ];
        let tol = cfg.tol * (1.0 + f.sup_norm());
        Ok(residuals.iter().any(|&r| r > tol).then(|| Evidence::Conditionability {
            event: a.clone(),
            act: f.clone(),
            candidate: g,
            residuals,
        }))
    });
    let mut witness = None;
    for r in results {
        if let Some(w) = r? {
            witness = Some(w);
            break;
        }
    }
    Ok(AuditReport::new(
        t.name(),
        vec![AuditEntry { property, status: Status::from_bool(witness.is_none()), checked: total, witness }],
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct HarnessReport {
    pub subject: String,
    pub strict_monotonicity: Status,
    pub sure_thing: Status,
    pub conditionable: Status,
    /// Sure-thing and conditionability verdicts coincide.
    pub agree: bool,
    /// Every emitted sure-thing witness re-evaluates as a genuine violation.
    pub witnesses_valid: bool,
    pub entries: Vec<AuditEntry>,
}

impl HarnessReport {
    pub fn passed(&self) -> bool {
        self.agree && self.witnesses_valid
    }
}

/// Runs strict monotonicity, the sure-thing search and conditionability on
/// every σ(A), and compares the verdicts.
pub fn equivalence_harness(t: &dyn PreferenceFunctional, cfg: &AuditConfig) -> Result<HarnessReport> {
    let space = t.space().clone();
    let n = space.len();
    let sm = check_sm(t, cfg)?;
    let st = check_st(t, cfg)?;
    let mut entries = sm.entries.clone();
    entries.extend(st.entries.iter().cloned());
    let mut conditionable = true;
    // A and A^c give the same σ(A); audit each pair once.
    for mask in 1..full_mask(n) {
        if mask & 1 == 0 {
            continue;
        }
        let rep = check_conditionable_on_event(t, &EventSet::from_mask(&space, mask), cfg)?;
        conditionable &= rep.passed();
        entries.extend(rep.entries);
    }
    let sure_thing = Status::from_bool(st.passed());
    let witnesses_valid = match st.first_witness() {
        Some(Evidence::SureThing(w)) => revalidate_witness(t, w, cfg.margin)?,
        _ => true,
    };
    let conditionable = Status::from_bool(conditionable);
    let entries = AuditReport::new(t.name(), entries).entries;
    Ok(HarnessReport {
        subject: t.name(),
        strict_monotonicity: Status::from_bool(sm.passed()),
        sure_thing,
        conditionable,
        agree: sure_thing == conditionable,
        witnesses_valid,
        entries,
    })
}


#[cfg(test)]
mod zoo_tests {
    use super::*;

    #[test]
    fn zoo_verdicts_agree_and_match_expectations() {
        let space = FiniteSpace::uniform(3);
        let cfg = AuditConfig::default().with_grid(vec![0.0, 1.0, 2.0]);
        let zoo = functional_zoo(&space).unwrap();
        assert_eq!(zoo.len(), 20);
        for z in zoo {
            let h = equivalence_harness(z.functional.as_ref(), &cfg).unwrap();
            assert!(h.passed(), "{}: {:?}/{:?}", z.label, h.sure_thing, h.conditionable);
            assert_eq!(h.strict_monotonicity, Status::Pass, "{}", z.label);
            assert_eq!(h.sure_thing.is_pass(), z.expect_sure_thing, "{}", z.label);
        }
    }
}
