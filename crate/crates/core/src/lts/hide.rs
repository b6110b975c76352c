use std::collections::BTreeSet;

use super::{EventId, Label, Lts, LtsError, Transition};
use crate::event::Event;

/// Relabels every transition on an event in `hidden` to `Tau` and removes
/// those events from the alphabet. States are unchanged.
pub fn hide(lts: &Lts, hidden: &BTreeSet<Event>) -> Result<Lts, LtsError> {
    if let Some(e) = hidden.iter().find(|e| lts.event_id(e).is_none()) {
        return Err(LtsError::NotInAlphabet(e.clone()));
    }
    let mut alphabet = Vec::with_capacity(lts.alphabet().len() - hidden.len());
    let remap: Vec<Option<EventId>> = lts
        .alphabet()
        .iter()
        .map(|e| {
            if hidden.contains(e) {
                None
            } else {
                alphabet.push(e.clone());
                Some(EventId(alphabet.len() as u32 - 1))
            }
        })
        .collect();
    let edges = lts
        .states()
        .map(|s| {
            lts.transitions(s)
                .iter()
                .map(|t| Transition {
                    label: match t.label {
                        Label::Event(e) => remap[e.0 as usize].map_or(Label::Tau, Label::Event),
                        other => other,
                    },
                    target: t.target,
                })
                .collect()
        })
        .collect();
    let names = lts.states().map(|s| lts.state_name(s).to_string()).collect();
    Ok(Lts::from_parts(alphabet, lts.initial(), edges, names))
}
