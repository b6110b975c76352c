//! Line-per-event trace files.

use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;

use cspmon_core::Observed;

use crate::mapping::Mapping;

/// Streams the events of a trace file. Blank lines and lines starting with
/// `#` are skipped; every other line goes through [`Mapping::map_event`].
pub fn read_trace<'m>(
    path: &Path,
    mapping: &'m Mapping,
) -> io::Result<impl Iterator<Item = io::Result<Observed>> + 'm> {
    let reader = BufReader::new(File::open(path)?);
    Ok(events(reader, mapping))
}

pub fn events<'m, R: BufRead + 'm>(
    reader: R,
    mapping: &'m Mapping,
) -> impl Iterator<Item = io::Result<Observed>> + 'm {
    reader.lines().filter_map(move |line| match line {
        Err(e) => Some(Err(e)),
        Ok(line) => {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                None
            } else {
                Some(Ok(mapping.map_event(t)))
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str) -> Vec<Observed> {
        events(text.as_bytes(), &Mapping::default())
            .collect::<io::Result<_>>()
            .unwrap()
    }

    #[test]
    fn passing_prefix() {
        let t = read("mission_start\ninspect.2\nradiation_level.Green\nmove.2\n");
        assert_eq!(t.len(), 4);
        assert_eq!(t[3], Observed::Event("move.2".parse().unwrap()));
    }

    #[test]
    fn empty() {
        assert!(read("").is_empty());
    }

    #[test]
    fn comments_and_blanks_skipped() {
        let t = read("# header\nmission_start\n\n  # indented\n/odom\n");
        assert_eq!(
            t,
            [
                Observed::Event("mission_start".parse().unwrap()),
                Observed::Unmapped("/odom".into())
            ]
        );
    }
}
