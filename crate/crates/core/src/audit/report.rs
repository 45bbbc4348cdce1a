use serde::{Deserialize, Serialize};

use crate::measure::{Act, EventSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Status::Pass
    }
}

/// T(f 1_A + h 1_{A^c}) ≥ T(g 1_A + h 1_{A^c}) while
/// T(f 1_A + h̃ 1_{A^c}) < T(g 1_A + h̃ 1_{A^c}).
///
/// `f`, `g` vanish off `event`; `h`, `h_tilde` vanish on it.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub event: EventSet,
    pub f: Act,
    pub g: Act,
    pub h: Act,
    pub h_tilde: Act,
    /// [T(f,h), T(g,h), T(f,h̃), T(g,h̃)].
    pub values: [f64; 4],
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    SureThing(Witness),
    /// Raising x to y on `event` over `background` failed to improve strictly.
    StrictMonotonicity {
        event: EventSet,
        lower: f64,
        upper: f64,
        background: Act,
        value_lower: f64,
        value_upper: f64,
    },
    /// No σ(A)-measurable act matches `act` on all of {∅, A, A^c, Ω}.
    Conditionability {
        event: EventSet,
        act: Act,
        candidate: Act,
        /// Residuals on ∅, A, A^c, Ω.
        residuals: [f64; 4],
    },
    /// Defects |E_0(X + εₙ P) − E_0(X)| that fail to vanish.
    Continuity {
        act: Act,
        perturbation: Act,
        final_defect: f64,
        defects: Vec<f64>,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditEntry {
    pub property: String,
    pub status: Status,
    /// Number of elementary comparisons made.
    pub checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Evidence>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub subject: String,
    pub entries: Vec<AuditEntry>,
}

impl AuditReport {
    pub fn new(subject: impl Into<String>, mut entries: Vec<AuditEntry>) -> Self {
        entries.sort_by(|a, b| a.property.cmp(&b.property));
        AuditReport { subject: subject.into(), entries }
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.status.is_pass())
    }

    pub fn entry(&self, property: &str) -> Option<&AuditEntry> {
        self.entries.iter().find(|e| e.property == property)
    }

    pub fn first_witness(&self) -> Option<&Evidence> {
        self.entries.iter().find_map(|e| e.witness.as_ref())
    }
}
