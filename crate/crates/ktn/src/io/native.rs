//! The native line-oriented network format.
//!
//! `#` starts a comment; state lines are `M <id> <V> [<k>]`, edge lines
//! `E <id1> <id2> <V> [<k>]`, whitespace-delimited, ids positive integers. Arbitrary
//! distinct ids are accepted and remapped (in sorted order) to 1..n; energies are
//! written back with 17 significant digits so a round-trip reproduces every value
//! bit-exactly.

use super::IoError;
use crate::network::{EdgeRecord, NetworkData, StateId, StateRecord};
use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

/// A parsed native file: structurally validated data plus the original ids
/// (`original_ids[new index] = id as written in the file`).
#[derive(Clone, Debug)]
pub struct NativeNetwork {
    pub data: NetworkData,
    pub original_ids: Vec<u64>,
}

impl NativeNetwork {
    pub fn id_map_is_identity(&self) -> bool {
        self.original_ids
            .iter()
            .enumerate()
            .all(|(i, &id)| id == i as u64 + 1)
    }
}

pub fn read_native(path: &Path) -> Result<NativeNetwork, IoError> {
    read_native_from(BufReader::new(std::fs::File::open(path)?))
}

pub fn read_native_from(reader: impl BufRead) -> Result<NativeNetwork, IoError> {
    let parse_err = |line: usize, message: String| IoError::Parse { line, message };
    let mut minima: Vec<(u64, f64, f64, usize)> = Vec::new();
    let mut edges: Vec<(u64, u64, f64, f64, usize)> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        match fields[0] {
            "M" => {
                if fields.len() < 3 || fields.len() > 4 {
                    return Err(parse_err(
                        line_no,
                        "state line needs `M <id> <V> [<k>]`".into(),
                    ));
                }
                let id: u64 = fields[1]
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("bad state id `{}`", fields[1])))?;
                if id == 0 {
                    return Err(parse_err(line_no, "state ids must be positive".into()));
                }
                let v: f64 = fields[2]
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("bad potential `{}`", fields[2])))?;
                let k: f64 = match fields.get(3) {
                    Some(f) => f
                        .parse()
                        .map_err(|_| parse_err(line_no, format!("bad prefactor `{f}`")))?,
                    None => 1.0,
                };
                minima.push((id, v, k, line_no));
            }
            "E" => {
                if fields.len() < 4 || fields.len() > 5 {
                    return Err(parse_err(
                        line_no,
                        "edge line needs `E <id1> <id2> <V> [<k>]`".into(),
                    ));
                }
                let a: u64 = fields[1]
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("bad state id `{}`", fields[1])))?;
                let b: u64 = fields[2]
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("bad state id `{}`", fields[2])))?;
                let v: f64 = fields[3].parse().map_err(|_| {
                    parse_err(line_no, format!("bad saddle potential `{}`", fields[3]))
                })?;
                let k: f64 = match fields.get(4) {
                    Some(f) => f
                        .parse()
                        .map_err(|_| parse_err(line_no, format!("bad prefactor `{f}`")))?,
                    None => 1.0,
                };
                edges.push((a, b, v, k, line_no));
            }
            other => {
                return Err(parse_err(line_no, format!("unknown record type `{other}`")));
            }
        }
    }

    let mut original_ids: Vec<u64> = minima.iter().map(|&(id, ..)| id).collect();
    original_ids.sort_unstable();
    let mut id_to_new: HashMap<u64, StateId> = HashMap::with_capacity(original_ids.len());
    for (new_idx, &id) in original_ids.iter().enumerate() {
        if id_to_new.insert(id, StateId::from_index(new_idx)).is_some() {
            let line = minima
                .iter()
                .find(|&&(x, ..)| x == id)
                .map(|&(.., l)| l)
                .unwrap_or(0);
            return Err(IoError::Parse {
                line,
                message: format!("duplicate state id {id}"),
            });
        }
    }

    let states = minima
        .iter()
        .map(|&(id, v, k, _)| StateRecord {
            id: id_to_new[&id],
            potential: v,
            prefactor: k,
        })
        .collect();
    let mut edge_records = Vec::with_capacity(edges.len());
    for (a, b, v, k, line_no) in edges {
        let map = |id: u64| {
            id_to_new.get(&id).copied().ok_or_else(|| IoError::Parse {
                line: line_no,
                message: format!("unknown state id {id}"),
            })
        };
        let (na, nb) = (map(a)?, map(b)?);
        let (na, nb) = if na <= nb { (na, nb) } else { (nb, na) };
        edge_records.push(EdgeRecord {
            a: na,
            b: nb,
            saddle: v,
            prefactor: k,
        });
    }

    let data = NetworkData::new(states, edge_records)?;
    Ok(NativeNetwork { data, original_ids })
}

pub fn write_native(data: &NetworkData, path: &Path) -> Result<(), IoError> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_native_to(data, &mut file)?;
    Ok(())
}

pub fn write_native_to(data: &NetworkData, w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "# {} states, {} edges", data.n(), data.m())?;
    for s in data.states() {
        if s.prefactor == 1.0 {
            writeln!(w, "M {} {:.16e}", s.id, s.potential)?;
        } else {
            writeln!(w, "M {} {:.16e} {:.16e}", s.id, s.potential, s.prefactor)?;
        }
    }
    for e in data.edges() {
        if e.prefactor == 1.0 {
            writeln!(w, "E {} {} {:.16e}", e.a, e.b, e.saddle)?;
        } else {
            writeln!(
                w,
                "E {} {} {:.16e} {:.16e}",
                e.a, e.b, e.saddle, e.prefactor
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(text: &str) -> Result<NativeNetwork, IoError> {
        read_native_from(Cursor::new(text))
    }

    #[test]
    fn single_state_file() {
        let net = parse("# tiny\nM 1 0.5\n").unwrap();
        assert_eq!(net.data.n(), 1);
        assert_eq!(net.data.m(), 0);
    }

    #[test]
    fn chain_round_trip_is_bit_exact() {
        let text = "M 1 0.0\nM 2 1.0\nM 3 2.0\nE 1 2 3.0\nE 2 3 4.5\n";
        let first = parse(text).unwrap();
        let mut buf = Vec::new();
        write_native_to(&first.data, &mut buf).unwrap();
        let second = read_native_from(Cursor::new(&buf)).unwrap();
        assert_eq!(first.data.n(), second.data.n());
        for (a, b) in first.data.states().iter().zip(second.data.states()) {
            assert_eq!(a.potential.to_bits(), b.potential.to_bits());
            assert_eq!(a.prefactor.to_bits(), b.prefactor.to_bits());
        }
        for (a, b) in first.data.edges().iter().zip(second.data.edges()) {
            assert_eq!(a.saddle.to_bits(), b.saddle.to_bits());
        }
    }

    #[test]
    fn unknown_state_id_cites_line() {
        let err = parse("M 1 0.0\nM 2 1.0\nM 3 2.0\nE 1 2 3.0\nE 2 99 4.5\n").unwrap_err();
        match err {
            IoError::Parse { line, message } => {
                assert_eq!(line, 5);
                assert!(message.contains("unknown state id 99"), "{message}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn garbage_line_cites_line() {
        let err = parse("M 1 0.0\nwat 2\n").unwrap_err();
        assert!(matches!(err, IoError::Parse { line: 2, .. }));
    }

    #[test]
    fn non_contiguous_ids_are_remapped() {
        let net = parse("M 10 0.0\nM 7 1.0\nE 7 10 2.0\n").unwrap();
        assert_eq!(net.original_ids, vec![7, 10]);
        assert!(!net.id_map_is_identity());
        // state 1 is old id 7 (V = 1.0)
        assert_eq!(net.data.potential(StateId(1)), 1.0);
        assert_eq!(net.data.m(), 1);
    }
}
