use std::collections::{HashMap, VecDeque};

use super::{ConstraintError, LinearConstraint};
use crate::lindblad::LindbladModel;
use crate::pauli::PauliString;

/// Output of [`auto_generate`].
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationReport {
    /// Every non-identity string seen, in discovery order.
    pub strings: Vec<PauliString>,
    /// Emitted constraints, in generation order.
    pub constraints: Vec<LinearConstraint>,
    /// The string whose adjoint image produced each constraint.
    pub sources: Vec<PauliString>,
    /// True iff the work queue drained before the budget ran out.
    pub cycle_closed: bool,
    index: HashMap<PauliString, usize>,
}

impl GenerationReport {
    pub fn contains(&self, s: &PauliString) -> bool {
        s.is_identity() || self.index.contains_key(s)
    }

    pub fn position(&self, s: &PauliString) -> Option<usize> {
        self.index.get(s).copied()
    }
}

/// Breadth-first harvest of `⟨L†(P)⟩ = 0` constraints starting from `seeds`.
///
/// Each popped string contributes the constraint built from its adjoint
/// image; strings appearing there for the first time are queued in
/// canonical order. Generation stops after `budget` constraints or once no
/// new strings remain.
pub fn auto_generate(
    model: &LindbladModel,
    seeds: &[PauliString],
    budget: usize,
) -> Result<GenerationReport, ConstraintError> {
    let mut initial: Vec<PauliString> = seeds.iter().filter(|s| !s.is_identity()).cloned().collect();
    if initial.is_empty() {
        return Err(ConstraintError::EmptySeeds);
    }
    initial.sort();
    initial.dedup();

    let mut strings = Vec::new();
    let mut index = HashMap::new();
    let mut queue = VecDeque::new();
    for s in initial {
        if s.num_sites() != model.num_sites() {
            return Err(crate::pauli::PauliError::SiteMismatch(model.num_sites(), s.num_sites()).into());
        }
        index.insert(s.clone(), strings.len());
        strings.push(s.clone());
        queue.push_back(s);
    }

    let mut constraints = Vec::new();
    let mut sources = Vec::new();
    while constraints.len() < budget {
        let Some(p) = queue.pop_front() else { break };
        let image = model.adjoint_apply_string(&p)?;
        if image.is_empty() {
            continue;
        }
        let mut fresh: Vec<&PauliString> = image
            .iter()
            .map(|(s, _)| s)
            .filter(|s| !s.is_identity() && !index.contains_key(*s))
            .collect();
        fresh.sort();
        for s in fresh {
            index.insert(s.clone(), strings.len());
            strings.push(s.clone());
            queue.push_back(s.clone());
        }
        constraints.push(LinearConstraint::new(image));
        sources.push(p);
    }

    Ok(GenerationReport {
        strings,
        constraints,
        sources,
        cycle_closed: queue.is_empty(),
        index,
    })
}
