use std::collections::BTreeSet;

use super::LtsError;
use crate::event::Event;
use crate::syntax::ResolvedSpec;
use crate::value::Value;

/// Every instantiation of every declared channel over its parameter domains.
pub fn enumerate_alphabet(spec: &ResolvedSpec) -> Result<BTreeSet<Event>, LtsError> {
    let mut out = BTreeSet::new();
    for (i, decl) in spec.spec().channels.iter().enumerate() {
        let domains = spec.domains(i);
        if let Some(param) = domains.iter().position(Vec::is_empty) {
            return Err(LtsError::EmptyDomain {
                channel: decl.name.to_string(),
                param,
            });
        }
        let mut tuples: Vec<Vec<Value>> = vec![Vec::new()];
        for domain in domains {
            tuples = tuples
                .into_iter()
                .flat_map(|prefix| {
                    domain.iter().map(move |v| {
                        let mut t = prefix.clone();
                        t.push(v.clone());
                        t
                    })
                })
                .collect();
        }
        out.extend(
            tuples
                .into_iter()
                .map(|values| Event::new(decl.name.clone(), values)),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_spec, validate_spec};

    fn alphabet(src: &str) -> Result<BTreeSet<Event>, LtsError> {
        enumerate_alphabet(&validate_spec(parse_spec(src).unwrap()).unwrap())
    }

    #[test]
    fn waypoint_channel() {
        let a = alphabet("channel move : {0..4}").unwrap();
        let texts: Vec<String> = a.iter().map(ToString::to_string).collect();
        assert_eq!(texts, ["move.0", "move.1", "move.2", "move.3", "move.4"]);
    }

    #[test]
    fn nullary_channel() {
        assert_eq!(
            alphabet("channel mission_start").unwrap(),
            BTreeSet::from([Event::bare("mission_start")])
        );
    }

    #[test]
    fn product_of_domains() {
        let a = alphabet("datatype C = R | G\nchannel c : {1..3}.C").unwrap();
        assert_eq!(a.len(), 6);
        assert!(a.contains(&"c.2.G".parse().unwrap()));
    }

    #[test]
    fn empty_domain() {
        let err = alphabet("channel c : {}").unwrap_err();
        assert!(matches!(err, LtsError::EmptyDomain { param: 0, .. }));
    }
}
