use std::sync::Arc;

use crate::error::Result;
use crate::functional::{Choquet, PreferenceFunctional, Transformed};
use crate::measure::FiniteSpace;
use crate::utility::{AdditiveRepresentation, Curve, KnotTable, StateUtility};

pub struct ZooEntry {
    pub label: String,
    /// Whether the functional is known to satisfy the sure-thing principle.
    pub expect_sure_thing: bool,
    pub functional: Box<dyn PreferenceFunctional>,
}

/// Twenty strictly monotone continuous functionals on `space`: expected
/// utilities and increasing transforms of them (sure-thing holds), and
/// Choquet / rank-dependent functionals with ν = P^α (sure-thing fails
/// unless α = 1).
pub fn functional_zoo(space: &Arc<FiniteSpace>) -> Result<Vec<ZooEntry>> {
    let eu = |c: Curve| AdditiveRepresentation::new(StateUtility::state_independent(space, c));
    let table = KnotTable::new(vec![(-2.0, -3.0), (0.0, 0.0), (1.0, 0.5), (3.0, 4.0)], 1.5, 1.75)
        .map_err(crate::error::Error::InvalidGrid)?;
    let state_dependent = {
        let cycle = [Curve::Linear, Curve::Exponential { gamma: 1.0 }, Curve::PowerOdd { p: 3.0 }];
        StateUtility::new(space, (0..space.len()).map(|i| cycle[i % 3].clone()).collect())?
    };
    let mut zoo: Vec<ZooEntry> = Vec::new();
    let mut push = |label: &str, expect: bool, f: Box<dyn PreferenceFunctional>| {
        zoo.push(ZooEntry { label: label.into(), expect_sure_thing: expect, functional: f });
    };
    push("eu-linear", true, Box::new(eu(Curve::Linear)));
    for g in [0.5, 1.0, 2.0] {
        push(&format!("eu-exponential-{g}"), true, Box::new(eu(Curve::Exponential { gamma: g })));
    }
    push("eu-power-3", true, Box::new(eu(Curve::PowerOdd { p: 3.0 })));
    push("eu-power-0.5", true, Box::new(eu(Curve::PowerOdd { p: 0.5 })));
    push("eu-table", true, Box::new(eu(Curve::Table(table.clone()))));
    push("eu-state-dependent", true, Box::new(AdditiveRepresentation::new(state_dependent.clone())));
    push(
        "transformed-linear-by-exponential",
        true,
        Box::new(Transformed::new(eu(Curve::Linear), Curve::Exponential { gamma: 1.0 })),
    );
    push(
        "transformed-power-by-power",
        true,
        Box::new(Transformed::new(eu(Curve::PowerOdd { p: 3.0 }), Curve::PowerOdd { p: 3.0 })),
    );
    push(
        "transformed-state-dependent-by-table",
        true,
        Box::new(Transformed::new(AdditiveRepresentation::new(state_dependent), Curve::Table(table))),
    );
    push("choquet-1", true, Box::new(Choquet::new(space, 1.0)?));
    push(
        "rank-dependent-1-exponential",
        true,
        Box::new(
            Choquet::new(space, 1.0)?
                .with_utility(StateUtility::state_independent(space, Curve::Exponential { gamma: 1.0 }))?,
        ),
    );
    for a in [0.5, 0.8, 1.5, 2.0, 3.0] {
        push(&format!("choquet-{a}"), false, Box::new(Choquet::new(space, a)?));
    }
    push(
        "rank-dependent-2-exponential",
        false,
        Box::new(
            Choquet::new(space, 2.0)?
                .with_utility(StateUtility::state_independent(space, Curve::Exponential { gamma: 1.0 }))?,
        ),
    );
    push(
        "rank-dependent-0.5-power",
        false,
        Box::new(
            Choquet::new(space, 0.5)?
                .with_utility(StateUtility::state_independent(space, Curve::PowerOdd { p: 3.0 }))?,
        ),
    );
    Ok(zoo)
}
