//! Finite probability spaces, partition σ-algebras, acts and linear
//! conditional expectation.
//!
//! Everything here is immutable after construction. Outcomes are addressed
//! by index; labels only matter at the I/O boundary.

use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a probability vector.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

/// A finite outcome set with a probability vector. Zero weights are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpace {
    labels: Vec<String>,
    weights: Vec<f64>,
}

impl FiniteSpace {
    /// Validates the weights (non-negative, summing to one within
    /// [`WEIGHT_TOLERANCE`]) and renormalizes them.
    pub fn new<S: Into<String>>(labels: Vec<S>, weights: Vec<f64>) -> Result<Arc<Self>> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidSpace("no outcomes".into()));
        }
        if labels.len() != weights.len() {
            return Err(Error::InvalidSpace(format!("{} labels but {} weights", labels.len(), weights.len())));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::InvalidSpace(format!("duplicate outcome `{l}`")));
            }
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidSpace(format!("weight {w} is not in [0, 1]")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::InvalidSpace(format!("weights sum to {total}, not 1")));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Arc::new(FiniteSpace { labels, weights }))
    }

    /// `n` outcomes `w1..wn` with equal weight.
    pub fn uniform(n: usize) -> Arc<Self> {
        let labels = (1..=n).map(|i| format!("w{i}")).collect();
        let weights = vec![1.0 / n as f64; n];
        Arc::new(FiniteSpace { labels, weights })
    }

    /// Labels `w1..wn` with the given weights.
    pub fn with_weights(weights: Vec<f64>) -> Result<Arc<Self>> {
        let labels = (1..=weights.len()).map(|i| format!("w{i}")).collect();
        FiniteSpace::new::<String>(labels, weights)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// P(A).
    pub fn probability(&self, event: &EventSet) -> f64 {
        event.members().map(|i| self.weights[i]).sum()
    }

    /// E[f].
    pub fn expectation(&self, f: &Act) -> f64 {
        self.weights.iter().zip(&f.values).map(|(p, x)| p * x).sum()
    }
}

pub(crate) fn same_space(a: &Arc<FiniteSpace>, b: &Arc<FiniteSpace>) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(Error::SpaceMismatch)
    }
}

/// A subset of outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSet {
    space: Arc<FiniteSpace>,
    mask: Vec<bool>,
}

impl EventSet {
    pub fn from_indices(space: &Arc<FiniteSpace>, indices: &[usize]) -> Result<Self> {
        let mut mask = vec![false; space.len()];
        for &i in indices {
            if i >= space.len() {
                return Err(Error::InvalidAct(format!("outcome index {i} out of range")));
            }
            mask[i] = true;
        }
        Ok(EventSet { space: space.clone(), mask })
    }

    pub fn from_labels<S: AsRef<str>>(space: &Arc<FiniteSpace>, labels: &[S]) -> Result<Self> {
        let indices = labels
            .iter()
            .map(|l| {
                space.index_of(l.as_ref()).ok_or_else(|| Error::InvalidAct(format!("unknown outcome `{}`", l.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        EventSet::from_indices(space, &indices)
    }

    /// Bit `i` of `mask` selects outcome `i`.
    pub fn from_mask(space: &Arc<FiniteSpace>, mask: u64) -> Self {
        let mask = (0..space.len()).map(|i| mask >> i & 1 == 1).collect();
        EventSet { space: space.clone(), mask }
    }

    pub fn empty(space: &Arc<FiniteSpace>) -> Self {
        EventSet { space: space.clone(), mask: vec![false; space.len()] }
    }

    pub fn full(space: &Arc<FiniteSpace>) -> Self {
        EventSet { space: space.clone(), mask: vec![true; space.len()] }
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn contains(&self, i: usize) -> bool {
        self.mask[i]
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i)
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }

    pub fn complement(&self) -> Self {
        EventSet { space: self.space.clone(), mask: self.mask.iter().map(|m| !m).collect() }
    }

    pub fn union(&self, other: &EventSet) -> Result<Self> {
        same_space(&self.space, &other.space)?;
        let mask = self.mask.iter().zip(&other.mask).map(|(a, b)| *a || *b).collect();
        Ok(EventSet { space: self.space.clone(), mask })
    }

    /// The act 1_A.
    pub fn indicator(&self) -> Act {
        Act { space: self.space.clone(), values: self.mask.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect() }
    }
}

impl Serialize for EventSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.members().map(|i| self.space.label(i)))
    }
}

impl fmt::Display for EventSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<&str> = self.members().map(|i| self.space.label(i)).collect();
        write!(f, "{{{}}}", labels.join(","))
    }
}

/// P(A) = 0. Under a strictly monotone, pointwise continuous functional
/// built from the space this is exactly preference-nullity.
pub fn is_null_event(a: &EventSet) -> bool {
    a.members().all(|i| a.space.weight(i) == 0.0)
}

/// A bounded random variable: one finite value per outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Act {
    space: Arc<FiniteSpace>,
    values: Vec<f64>,
}

impl Act {
    pub fn new(space: &Arc<FiniteSpace>, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::InvalidAct(format!("{} values for {} outcomes", values.len(), space.len())));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidAct(format!("non-finite value {v}")));
        }
        Ok(Act { space: space.clone(), values })
    }

    pub fn constant(space: &Arc<FiniteSpace>, c: f64) -> Self {
        Act { space: space.clone(), values: vec![c; space.len()] }
    }

    pub fn zero(space: &Arc<FiniteSpace>) -> Self {
        Act::constant(space, 0.0)
    }

    // Internal constructor for values already known to match the space.
    pub(crate) fn from_raw(space: &Arc<FiniteSpace>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), space.len());
        Act { space: space.clone(), values }
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// ‖f‖∞.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(usize, f64) -> f64) -> Act {
        Act { space: self.space.clone(), values: self.values.iter().enumerate().map(|(i, &v)| f(i, v)).collect() }
    }

    /// f · 1_A.
    pub fn masked(&self, a: &EventSet) -> Result<Act> {
        same_space(&self.space, &a.space)?;
        Ok(self.map(|i, v| if a.contains(i) { v } else { 0.0 }))
    }

    pub fn shifted(&self, c: f64) -> Act {
        self.map(|_, v| v + c)
    }

    /// Pointwise `self ≤ other`.
    pub fn le(&self, other: &Act) -> bool {
        self.values.iter().zip(&other.values).all(|(a, b)| a <= b)
    }

    /// Largest absolute difference over outcomes with positive weight.
    pub fn max_diff_non_null(&self, other: &Act) -> f64 {
        (0..self.values.len())
            .filter(|&i| self.space.weight(i) > 0.0)
            .map(|i| (self.values[i] - other.values[i]).abs())
            .fold(0.0, f64::max)
    }
}

impl Serialize for Act {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.values.iter())
    }
}

/// f 1_A + g 1_{A^c}.
pub fn paste(f: &Act, g: &Act, a: &EventSet) -> Result<Act> {
    same_space(&f.space, &g.space)?;
    same_space(&f.space, &a.space)?;
    Ok(f.map(|i, v| if a.contains(i) { v } else { g.values[i] }))
}

/// A sub-σ-algebra generated by a partition of the outcomes.
///
/// Atoms are stored canonically: each atom sorted, atoms ordered by their
/// smallest member.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionAlgebra {
    space: Arc<FiniteSpace>,
    atoms: Vec<Vec<usize>>,
    atom_of: Vec<usize>,
}

impl PartitionAlgebra {
    pub fn new(space: &Arc<FiniteSpace>, atoms: Vec<Vec<usize>>) -> Result<Self> {
        let n = space.len();
        let mut atom_of = vec![usize::MAX; n];
        let mut atoms: Vec<Vec<usize>> = atoms
            .into_iter()
            .map(|mut a| {
                a.sort_unstable();
                a
            })
            .collect();
        atoms.sort_by_key(|a| a.first().copied());
        for (k, atom) in atoms.iter().enumerate() {
            if atom.is_empty() {
                return Err(Error::InvalidPartition("empty atom".into()));
            }
            for &i in atom {
                if i >= n {
                    return Err(Error::InvalidPartition(format!("outcome index {i} out of range")));
                }
                if atom_of[i] != usize::MAX {
                    return Err(Error::InvalidPartition(format!("outcome `{}` appears in two atoms", space.label(i))));
                }
                atom_of[i] = k;
            }
        }
        if let Some(i) = atom_of.iter().position(|&k| k == usize::MAX) {
            return Err(Error::InvalidPartition(format!("outcome `{}` is not covered", space.label(i))));
        }
        Ok(PartitionAlgebra { space: space.clone(), atoms, atom_of })
    }

    pub fn from_labels<S: AsRef<str>>(space: &Arc<FiniteSpace>, atoms: &[Vec<S>]) -> Result<Self> {
        let atoms = atoms
            .iter()
            .map(|a| {
                a.iter()
                    .map(|l| {
                        space
                            .index_of(l.as_ref())
                            .ok_or_else(|| Error::InvalidPartition(format!("unknown outcome `{}`", l.as_ref())))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        PartitionAlgebra::new(space, atoms)
    }

    /// {∅, Ω}.
    pub fn trivial(space: &Arc<FiniteSpace>) -> Self {
        PartitionAlgebra::new(space, vec![(0..space.len()).collect()]).expect("valid")
    }

    /// The power set.
    pub fn finest(space: &Arc<FiniteSpace>) -> Self {
        PartitionAlgebra::new(space, (0..space.len()).map(|i| vec![i]).collect()).expect("valid")
    }

    /// Atoms labelled by `assignment[i]`; equal labels share an atom.
    pub fn from_assignment(space: &Arc<FiniteSpace>, assignment: &[usize]) -> Result<Self> {
        if assignment.len() != space.len() {
            return Err(Error::InvalidPartition("assignment length mismatch".into()));
        }
        let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
        for (i, &g) in assignment.iter().enumerate() {
            match groups.iter_mut().find(|(k, _)| *k == g) {
                Some((_, v)) => v.push(i),
                None => groups.push((g, vec![i])),
            }
        }
        PartitionAlgebra::new(space, groups.into_iter().map(|(_, v)| v).collect())
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn atoms(&self) -> &[Vec<usize>] {
        &self.atoms
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn atom_of(&self, outcome: usize) -> usize {
        self.atom_of[outcome]
    }

    pub fn atom_probability(&self, k: usize) -> f64 {
        self.atoms[k].iter().map(|&i| self.space.weight(i)).sum()
    }

    pub fn atom_event(&self, k: usize) -> EventSet {
        EventSet::from_indices(&self.space, &self.atoms[k]).expect("valid atom")
    }

    /// The union of the atoms selected by the bits of `mask`.
    pub fn union_of_atoms(&self, mask: u64) -> EventSet {
        let mut bits = vec![false; self.space.len()];
        for (k, atom) in self.atoms.iter().enumerate() {
            if mask >> k & 1 == 1 {
                for &i in atom {
                    bits[i] = true;
                }
            }
        }
        EventSet { space: self.space.clone(), mask: bits }
    }

    /// Whether `a` is a union of atoms, i.e. belongs to the algebra.
    pub fn contains_event(&self, a: &EventSet) -> bool {
        (Arc::ptr_eq(&self.space, &a.space) || *self.space == *a.space)
            && self.atoms.iter().all(|atom| {
                let inside = a.contains(atom[0]);
                atom.iter().all(|&i| a.contains(i) == inside)
            })
    }

    /// Whether `f` is constant on every atom. Returns the first offending atom.
    pub fn check_measurable(&self, f: &Act) -> Result<()> {
        same_space(&self.space, &f.space)?;
        for (k, atom) in self.atoms.iter().enumerate() {
            let v = f.values[atom[0]];
            if atom.iter().any(|&i| f.values[i] != v) {
                return Err(Error::NotMeasurable { atom: k });
            }
        }
        Ok(())
    }

    pub fn is_measurable(&self, f: &Act) -> bool {
        self.check_measurable(f).is_ok()
    }

    /// True if every atom of `self` is a union of atoms of `finer`,
    /// i.e. `self ⊆ finer` as σ-algebras.
    pub fn is_coarser_than(&self, finer: &PartitionAlgebra) -> bool {
        (Arc::ptr_eq(&self.space, &finer.space) || *self.space == *finer.space)
            && finer.atoms.iter().all(|atom| atom.iter().all(|&i| self.atom_of[i] == self.atom_of[atom[0]]))
    }

    /// Builds an act from one value per atom.
    pub fn act_from_atom_values(&self, per_atom: &[f64]) -> Act {
        Act::from_raw(&self.space, self.atom_of.iter().map(|&k| per_atom[k]).collect())
    }
}

impl fmt::Display for PartitionAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .atoms
            .iter()
            .map(|a| {
                let l: Vec<&str> = a.iter().map(|&i| self.space.label(i)).collect();
                format!("{{{}}}", l.join(","))
            })
            .collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// E[f | G]. On zero-probability atoms the value is 0 (one admissible
/// version among many).
pub fn conditional_expectation(f: &Act, g_alg: &PartitionAlgebra) -> Result<Act> {
    same_space(&f.space, &g_alg.space)?;
    let per_atom: Vec<f64> = g_alg
        .atoms
        .iter()
        .map(|atom| {
            let mass: f64 = atom.iter().map(|&i| f.space.weight(i)).sum();
            if mass > 0.0 {
                atom.iter().map(|&i| f.space.weight(i) * f.values[i]).sum::<f64>() / mass
            } else {
                0.0
            }
        })
        .collect();
    Ok(g_alg.act_from_atom_values(&per_atom))
}

/// The coarsest common refinement G1 ∨ G2: atoms are the nonempty
/// intersections of atoms of both.
pub fn refine(g1: &PartitionAlgebra, g2: &PartitionAlgebra) -> Result<PartitionAlgebra> {
    same_space(&g1.space, &g2.space)?;
    let assignment: Vec<usize> = (0..g1.space.len()).map(|i| g1.atom_of[i] * g2.atoms.len() + g2.atom_of[i]).collect();
    PartitionAlgebra::from_assignment(&g1.space, &assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uniform4() -> Arc<FiniteSpace> {
        FiniteSpace::uniform(4)
    }

    #[test]
    fn weights_are_validated() {
        assert!(FiniteSpace::with_weights(vec![0.5, 0.6]).is_err());
        assert!(FiniteSpace::with_weights(vec![1.5, -0.5]).is_err());
        assert!(FiniteSpace::new(vec!["a", "a"], vec![0.5, 0.5]).is_err());
        let s = FiniteSpace::with_weights(vec![0.5, 0.5 + 5e-13]).unwrap();
        assert!((s.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(FiniteSpace::with_weights(vec![1.0, 0.0]).is_ok());
    }

    #[test]
    fn conditional_expectation_examples() {
        let s = uniform4();
        let f = Act::new(&s, vec![1.0, 3.0, 2.0, 6.0]).unwrap();
        let g = PartitionAlgebra::new(&s, vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert_eq!(conditional_expectation(&f, &g).unwrap().values(), &[2.0, 2.0, 4.0, 4.0]);
        assert_eq!(conditional_expectation(&f, &PartitionAlgebra::finest(&s)).unwrap(), f);
        assert_eq!(
            conditional_expectation(&f, &PartitionAlgebra::trivial(&s)).unwrap().values(),
            &[3.0, 3.0, 3.0, 3.0]
        );
    }

    #[test]
    fn conditional_expectation_on_null_atom_is_zero() {
        let s = FiniteSpace::with_weights(vec![0.5, 0.5, 0.0]).unwrap();
        let f = Act::new(&s, vec![1.0, 2.0, 7.0]).unwrap();
        let g = PartitionAlgebra::finest(&s);
        assert_eq!(conditional_expectation(&f, &g).unwrap().values(), &[1.0, 2.0, 0.0]);
    }

    #[test]
    fn space_mismatch_is_reported() {
        let f = Act::constant(&FiniteSpace::uniform(2), 1.0);
        let g = PartitionAlgebra::trivial(&FiniteSpace::uniform(3));
        assert_eq!(conditional_expectation(&f, &g), Err(Error::SpaceMismatch));
    }

    #[test]
    fn null_events() {
        let s = FiniteSpace::with_weights(vec![1.0, 0.0]).unwrap();
        assert!(is_null_event(&EventSet::from_indices(&s, &[1]).unwrap()));
        assert!(is_null_event(&EventSet::empty(&s)));
        let s = FiniteSpace::uniform(2);
        assert!(!is_null_event(&EventSet::from_indices(&s, &[0]).unwrap()));
    }

    #[test]
    fn refine_examples() {
        let s = uniform4();
        let g1 = PartitionAlgebra::new(&s, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let g2 = PartitionAlgebra::new(&s, vec![vec![0, 2], vec![1, 3]]).unwrap();
        assert_eq!(refine(&g1, &g2).unwrap(), PartitionAlgebra::finest(&s));
        assert_eq!(refine(&g1, &PartitionAlgebra::trivial(&s)).unwrap(), g1);
        assert_eq!(refine(&g1, &g1).unwrap(), g1);
    }

    #[test]
    fn paste_examples() {
        let s = FiniteSpace::uniform(2);
        let f = Act::constant(&s, 1.0);
        let g = Act::constant(&s, 9.0);
        let a = EventSet::from_indices(&s, &[0]).unwrap();
        assert_eq!(paste(&f, &g, &a).unwrap().values(), &[1.0, 9.0]);
        assert_eq!(paste(&f, &g, &EventSet::full(&s)).unwrap(), f);
        assert_eq!(paste(&f, &g, &EventSet::empty(&s)).unwrap(), g);
    }

    #[test]
    fn partition_validation() {
        let s = uniform4();
        assert!(PartitionAlgebra::new(&s, vec![vec![0, 1], vec![1, 2, 3]]).is_err());
        assert!(PartitionAlgebra::new(&s, vec![vec![0, 1], vec![2]]).is_err());
        assert!(PartitionAlgebra::new(&s, vec![vec![0, 1, 2, 3], vec![]]).is_err());
        let g = PartitionAlgebra::new(&s, vec![vec![3, 2], vec![1, 0]]).unwrap();
        assert_eq!(g.atoms(), &[vec![0, 1], vec![2, 3]]);
    }

    fn arb_case() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<usize>, Vec<usize>)> {
        (2usize..8).prop_flat_map(|n| {
            (
                prop::collection::vec(0.0f64..1.0, n),
                prop::collection::vec(-10.0f64..10.0, n),
                prop::collection::vec(0usize..4, n),
                prop::collection::vec(0usize..2, n),
            )
        })
    }

    fn space_from(raw: &[f64]) -> Arc<FiniteSpace> {
        let total: f64 = raw.iter().sum::<f64>() + 1e-3;
        let w: Vec<f64> = raw.iter().map(|x| (x + 1e-3 / raw.len() as f64) / total).collect();
        FiniteSpace::with_weights(w).unwrap()
    }

    proptest! {
        #[test]
        fn tower_and_projection((raw, vals, fine_ids, coarse_ids) in arb_case()) {
            let s = space_from(&raw);
            let f = Act::new(&s, vals).unwrap();
            let g_other = PartitionAlgebra::from_assignment(&s, &coarse_ids).unwrap();
            let g_fine0 = PartitionAlgebra::from_assignment(&s, &fine_ids).unwrap();
            // Make the fine algebra genuinely finer than the coarse one.
            let fine = refine(&g_fine0, &g_other).unwrap();
            prop_assert!(g_other.is_coarser_than(&fine));
            let inner = conditional_expectation(&f, &fine).unwrap();
            let lhs = conditional_expectation(&inner, &g_other).unwrap();
            let rhs = conditional_expectation(&f, &g_other).unwrap();
            prop_assert!(lhs.max_diff_non_null(&rhs) < 1e-10);
            let twice = conditional_expectation(&rhs, &g_other).unwrap();
            prop_assert!(twice.max_diff_non_null(&rhs) < 1e-12);
            prop_assert!(g_other.is_measurable(&rhs));
            for mask in 0..(1u64 << g_other.num_atoms()) {
                let a = g_other.union_of_atoms(mask);
                let lhs = s.expectation(&rhs.masked(&a).unwrap());
                let rhs2 = s.expectation(&f.masked(&a).unwrap());
                prop_assert!((lhs - rhs2).abs() < 1e-12 * (1.0 + f.sup_norm()));
            }
        }

        #[test]
        fn paste_self_and_null_unions(vals in prop::collection::vec(-5.0f64..5.0, 4), m1 in 0u64..16, m2 in 0u64..16) {
            let s = FiniteSpace::with_weights(vec![0.5, 0.0, 0.5, 0.0]).unwrap();
            let f = Act::new(&s, vals).unwrap();
            let a = EventSet::from_mask(&s, m1);
            prop_assert_eq!(paste(&f, &f, &a).unwrap(), f.clone());
            let b = EventSet::from_mask(&s, m2);
            if is_null_event(&a) && is_null_event(&b) {
                prop_assert!(is_null_event(&a.union(&b).unwrap()));
            }
        }
    }
}
