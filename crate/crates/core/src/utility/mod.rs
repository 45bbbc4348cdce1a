//! State-dependent utilities, the representing functional
//! T(f) = Σ p(ω) u(ω, f(ω)), projected utilities u_G and their
//! generalized inverses Φ_G.

mod curve;

use std::sync::Arc;

use serde::Serialize;

pub use curve::{Curve, ExtendedReal, KnotTable, ZERO_TOLERANCE};

use crate::error::{Error, Result};
use crate::measure::{same_space, Act, EventSet, FiniteSpace, PartitionAlgebra};

/// One curve per outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct StateUtility {
    space: Arc<FiniteSpace>,
    curves: Vec<Curve>,
}

impl StateUtility {
    pub fn new(space: &Arc<FiniteSpace>, curves: Vec<Curve>) -> Result<Self> {
        if curves.len() != space.len() {
            return Err(Error::InvalidAct(format!("{} curves for {} outcomes", curves.len(), space.len())));
        }
        Ok(StateUtility { space: space.clone(), curves })
    }

    /// The same curve for every outcome.
    pub fn state_independent(space: &Arc<FiniteSpace>, curve: Curve) -> Self {
        StateUtility { space: space.clone(), curves: vec![curve; space.len()] }
    }

    pub fn linear(space: &Arc<FiniteSpace>) -> Self {
        StateUtility::state_independent(space, Curve::Linear)
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn curves(&self) -> &[Curve] {
        &self.curves
    }

    pub fn curve(&self, outcome: usize) -> &Curve {
        &self.curves[outcome]
    }

    /// u(ω, x).
    pub fn eval(&self, outcome: usize, x: f64) -> f64 {
        self.curves[outcome].eval(x)
    }

    /// ω ↦ u(ω, f(ω)).
    pub fn apply(&self, f: &Act) -> Result<Act> {
        same_space(&self.space, f.space())?;
        Ok(f.map(|i, v| self.curves[i].eval(v)))
    }

    pub fn with_curve(&self, outcome: usize, curve: Curve) -> Self {
        let mut next = self.clone();
        next.curves[outcome] = curve;
        next
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub outcomes_checked: usize,
    pub parametric: usize,
    pub tables: usize,
}

/// Checks F-regularity: every u(ω, ·) is continuous, strictly increasing
/// and vanishes at 0. The first violation is returned as an error.
pub fn validate_regular(u: &StateUtility) -> Result<ValidationReport> {
    let mut report = ValidationReport { outcomes_checked: 0, parametric: 0, tables: 0 };
    for (i, c) in u.curves.iter().enumerate() {
        c.check_regular().map_err(|(coordinate, reason)| Error::RegularityViolation {
            outcome: u.space.label(i).to_string(),
            coordinate,
            reason,
        })?;
        report.outcomes_checked += 1;
        match c {
            Curve::Table(_) => report.tables += 1,
            _ => report.parametric += 1,
        }
    }
    Ok(report)
}

/// The additive functional V_A(f) = Σ_{ω∈A} p(ω) u(ω, f(ω)).
#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveRepresentation {
    utility: StateUtility,
}

impl AdditiveRepresentation {
    pub fn new(utility: StateUtility) -> Self {
        AdditiveRepresentation { utility }
    }

    pub fn utility(&self) -> &StateUtility {
        &self.utility
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.utility.space
    }

    /// V_A(f).
    pub fn value_on(&self, a: &EventSet, f: &Act) -> Result<f64> {
        same_space(self.space(), a.space())?;
        same_space(self.space(), f.space())?;
        Ok(a.members().map(|i| self.utility.space.weight(i) * self.utility.eval(i, f.value(i))).sum())
    }

    /// T(f) = V_Ω(f).
    pub fn evaluate(&self, f: &Act) -> Result<f64> {
        same_space(self.space(), f.space())?;
        Ok(self.evaluate_unchecked(f.values()))
    }

    pub(crate) fn evaluate_unchecked(&self, values: &[f64]) -> f64 {
        let w = self.utility.space.weights();
        values.iter().enumerate().map(|(i, &v)| w[i] * self.utility.eval(i, v)).sum()
    }
}

/// T(f) = Σ p(ω) u(ω, f(ω)).
pub fn evaluate_t(rep: &AdditiveRepresentation, f: &Act) -> Result<f64> {
    rep.evaluate(f)
}

/// The G-projection u_G(ω, x) = E[u(·, x) | G](ω): one averaged curve per
/// atom. Zero-probability atoms carry the identity curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedUtility {
    g_alg: PartitionAlgebra,
    atom_curves: Vec<Curve>,
}

impl ProjectedUtility {
    pub fn partition(&self) -> &PartitionAlgebra {
        &self.g_alg
    }

    pub fn atom_curves(&self) -> &[Curve] {
        &self.atom_curves
    }

    pub fn curve_at(&self, outcome: usize) -> &Curve {
        &self.atom_curves[self.g_alg.atom_of(outcome)]
    }

    /// u_G(ω, x).
    pub fn eval(&self, outcome: usize, x: f64) -> f64 {
        self.curve_at(outcome).eval(x)
    }

    /// The projection as a G-regular state utility on the same space.
    pub fn as_state_utility(&self) -> StateUtility {
        let space = self.g_alg.space();
        let curves = (0..space.len()).map(|i| self.curve_at(i).clone()).collect();
        StateUtility { space: space.clone(), curves }
    }
}

pub fn project_utility(rep: &AdditiveRepresentation, g_alg: &PartitionAlgebra) -> Result<ProjectedUtility> {
    same_space(rep.space(), g_alg.space())?;
    let space = rep.space();
    let atom_curves = g_alg
        .atoms()
        .iter()
        .map(|atom| {
            let members: Vec<(f64, &Curve)> = atom.iter().map(|&i| (space.weight(i), rep.utility.curve(i))).collect();
            Curve::average(&members)
        })
        .collect();
    Ok(ProjectedUtility { g_alg: g_alg.clone(), atom_curves })
}

/// Φ_G(ω, x) = inf{y : u_G(ω, y) > x}.
pub fn generalized_inverse(pu: &ProjectedUtility, outcome: usize, x: f64) -> ExtendedReal {
    pu.curve_at(outcome).inverse(x)
}

/// (u_G(ω, −∞), u_G(ω, +∞)).
pub fn image_interval(pu: &ProjectedUtility, outcome: usize) -> (ExtendedReal, ExtendedReal) {
    pu.curve_at(outcome).image()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::EventSet;
    use proptest::prelude::*;

    fn table(knots: &[(f64, f64)]) -> Curve {
        Curve::Table(KnotTable::new(knots.to_vec(), 1.0, 1.0).unwrap())
    }

    #[test]
    fn validate_examples() {
        let s = FiniteSpace::uniform(2);
        assert!(validate_regular(&StateUtility::linear(&s)).is_ok());
        let bad = StateUtility::new(&s, vec![Curve::Linear, table(&[(0.0, 0.1), (1.0, 1.0)])]).unwrap();
        match validate_regular(&bad) {
            Err(Error::RegularityViolation { outcome, .. }) => assert_eq!(outcome, "w2"),
            other => panic!("{other:?}"),
        }
        let flat = StateUtility::new(&s, vec![table(&[(0.0, 0.0), (1.0, 1.0), (2.0, 1.0)]), Curve::Linear]).unwrap();
        assert!(matches!(
            validate_regular(&flat),
            Err(Error::RegularityViolation { coordinate, .. }) if coordinate == 2.0
        ));
    }

    #[test]
    fn evaluate_examples() {
        let s = FiniteSpace::uniform(2);
        let rep = AdditiveRepresentation::new(StateUtility::linear(&s));
        let f = Act::new(&s, vec![1.0, 3.0]).unwrap();
        assert_eq!(evaluate_t(&rep, &f).unwrap(), 2.0);
        let exp = AdditiveRepresentation::new(StateUtility::state_independent(&s, Curve::Exponential { gamma: 1.0 }));
        assert_eq!(evaluate_t(&exp, &Act::zero(&s)).unwrap(), 0.0);
        let f = Act::new(&s, vec![0.0, 2f64.ln()]).unwrap();
        // ½·0 + ½·(1 − ½), summed by hand
        let by_hand = 0.5 * (1.0 - (-0.0f64).exp()) + 0.5 * (1.0 - (-(2f64.ln())).exp());
        assert!((evaluate_t(&exp, &f).unwrap() - 0.25).abs() < 1e-15);
        assert!((by_hand - 0.25).abs() < 1e-15);
    }

    #[test]
    fn projection_examples() {
        let s = FiniteSpace::uniform(2);
        let g = PartitionAlgebra::trivial(&s);
        let si = AdditiveRepresentation::new(StateUtility::state_independent(&s, Curve::PowerOdd { p: 3.0 }));
        assert_eq!(project_utility(&si, &g).unwrap().atom_curves(), &[Curve::PowerOdd { p: 3.0 }]);

        let slopes = StateUtility::new(&s, vec![Curve::Linear, table(&[(0.0, 0.0), (1.0, 3.0)])]).unwrap();
        let slopes = slopes.with_curve(1, Curve::Table(KnotTable::new(vec![(0.0, 0.0)], 3.0, 3.0).unwrap()));
        let pu = project_utility(&AdditiveRepresentation::new(slopes), &g).unwrap();
        for x in [-2.0, -0.5, 0.0, 1.0, 4.0] {
            assert!((pu.eval(0, x) - 2.0 * x).abs() < 1e-15);
        }

        let mixed = StateUtility::new(&s, vec![Curve::Exponential { gamma: 1.0 }, Curve::PowerOdd { p: 3.0 }]).unwrap();
        let rep = AdditiveRepresentation::new(mixed.clone());
        let fine = project_utility(&rep, &PartitionAlgebra::finest(&s)).unwrap();
        assert_eq!(fine.as_state_utility(), mixed);
    }

    #[test]
    fn null_atoms_get_identity() {
        let s = FiniteSpace::with_weights(vec![1.0, 0.0]).unwrap();
        let u = StateUtility::state_independent(&s, Curve::PowerOdd { p: 3.0 });
        let pu = project_utility(&AdditiveRepresentation::new(u), &PartitionAlgebra::finest(&s)).unwrap();
        assert_eq!(pu.atom_curves()[1], Curve::Linear);
    }

    #[test]
    fn inverse_examples() {
        let s = FiniteSpace::uniform(3);
        let g = PartitionAlgebra::trivial(&s);
        let cube = project_utility(
            &AdditiveRepresentation::new(StateUtility::state_independent(&s, Curve::PowerOdd { p: 3.0 })),
            &g,
        )
        .unwrap();
        assert_eq!(generalized_inverse(&cube, 0, 8.0), ExtendedReal::Finite(2.0));
        let exp = project_utility(
            &AdditiveRepresentation::new(StateUtility::state_independent(&s, Curve::Exponential { gamma: 1.0 })),
            &g,
        )
        .unwrap();
        assert_eq!(generalized_inverse(&exp, 1, 2.0), ExtendedReal::PosInf);
        let y = generalized_inverse(&exp, 2, exp.eval(2, 1.7)).finite().unwrap();
        assert!((y - 1.7).abs() < 1e-12);
        assert_eq!(image_interval(&cube, 0), (ExtendedReal::NegInf, ExtendedReal::PosInf));
    }

    #[test]
    fn additivity_is_exact() {
        let s = FiniteSpace::with_weights(vec![0.2, 0.3, 0.5]).unwrap();
        let u =
            StateUtility::new(&s, vec![Curve::Linear, Curve::Exponential { gamma: 0.7 }, Curve::PowerOdd { p: 2.0 }])
                .unwrap();
        let rep = AdditiveRepresentation::new(u);
        let f = Act::new(&s, vec![1.5, -0.4, 2.0]).unwrap();
        let a = EventSet::from_indices(&s, &[0]).unwrap();
        let b = EventSet::from_indices(&s, &[2]).unwrap();
        let both = a.union(&b).unwrap();
        let sum = rep.value_on(&a, &f).unwrap() + rep.value_on(&b, &f).unwrap();
        assert_eq!(rep.value_on(&both, &f).unwrap(), sum);
        assert_eq!(rep.value_on(&both, &f).unwrap(), rep.evaluate(&f.masked(&both).unwrap()).unwrap());
    }

    fn arb_curve() -> impl Strategy<Value = Curve> {
        prop_oneof![
            Just(Curve::Linear),
            (0.3f64..2.5).prop_map(|g| Curve::Exponential { gamma: g }),
            (-2.5f64..-0.3).prop_map(|g| Curve::Exponential { gamma: g }),
            (0.3f64..4.0).prop_map(|p| Curve::PowerOdd { p }),
            (0.2f64..3.0, 0.2f64..3.0)
                .prop_map(|(a, b)| Curve::Table(KnotTable::new(vec![(-1.0, -a), (0.0, 0.0), (1.0, b)], a, b).unwrap())),
        ]
    }

    proptest! {
        #[test]
        fn monotone_and_continuous_functional(
            curves in prop::collection::vec(arb_curve(), 3),
            f in prop::collection::vec(-2.0f64..2.0, 3),
            bump in 0.01f64..1.0,
            k in 0usize..3,
        ) {
            let s = FiniteSpace::with_weights(vec![0.25, 0.25, 0.5]).unwrap();
            let rep = AdditiveRepresentation::new(StateUtility::new(&s, curves).unwrap());
            let f = Act::new(&s, f).unwrap();
            let mut up = f.values().to_vec();
            up[k] += bump;
            let g = Act::new(&s, up).unwrap();
            prop_assert!(rep.evaluate(&f).unwrap() < rep.evaluate(&g).unwrap());
            // f + h/n → f: the defect shrinks to zero
            let mut last = f64::INFINITY;
            for n in [1.0, 10.0, 100.0, 1e4, 1e8] {
                let fn_ = f.shifted(bump / n);
                let d = (rep.evaluate(&fn_).unwrap() - rep.evaluate(&f).unwrap()).abs();
                prop_assert!(d <= last + 1e-15);
                last = d;
            }
            prop_assert!(last < 1e-6);
        }

        #[test]
        fn projected_round_trip(
            curves in prop::collection::vec(arb_curve(), 4),
            y in -3.0f64..3.0,
            split in 0usize..3,
        ) {
            let s = FiniteSpace::with_weights(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
            let rep = AdditiveRepresentation::new(StateUtility::new(&s, curves).unwrap());
            let g = match split {
                0 => PartitionAlgebra::trivial(&s),
                1 => PartitionAlgebra::new(&s, vec![vec![0, 1], vec![2, 3]]).unwrap(),
                _ => PartitionAlgebra::new(&s, vec![vec![0, 3], vec![1], vec![2]]).unwrap(),
            };
            let pu = project_utility(&rep, &g).unwrap();
            for w in 0..4 {
                prop_assert!(pu.curve_at(w).check_regular().is_ok());
                let x = pu.eval(w, y);
                let back = generalized_inverse(&pu, w, x).finite().unwrap();
                prop_assert!((back - y).abs() < 1e-10, "{} vs {}", back, y);
                // u_G(·, y) is the conditional expectation of u(·, y)
                let atom = g.atom_of(w);
                let direct: f64 = g.atoms()[atom].iter().map(|&i| s.weight(i) * rep.utility().eval(i, y)).sum::<f64>()
                    / g.atom_probability(atom);
                prop_assert!((x - direct).abs() < 1e-12 * (1.0 + direct.abs()));
            }
        }
    }
}
