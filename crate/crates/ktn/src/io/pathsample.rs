//! Adapter for PATHSAMPLE-style `min.data` / `ts.data` pairs: one minimum per line in
//! the first file, one transition state per line in the second, with 1-based field
//! indices configurable because on-disk layouts vary across dataset vintages.
//!
//! Minima line numbers define the state ids, so malformed minima lines are always hard
//! errors; tolerant mode applies to transition-state lines only.

use super::IoError;
use crate::network::{EdgeRecord, NetworkData, StateId, StateRecord};
use std::collections::HashMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

/// 1-based field positions.
#[derive(Clone, Copy, Debug)]
pub struct ColumnMap {
    pub min_energy: usize,
    pub ts_energy: usize,
    pub ts_min1: usize,
    pub ts_min2: usize,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            min_energy: 1,
            ts_energy: 1,
            ts_min1: 4,
            ts_min2: 5,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct PathsampleOptions {
    pub columns: ColumnMap,
    /// Skip (and count) bad transition-state lines instead of failing, including
    /// entries whose saddle does not lie above both endpoint minima.
    pub tolerant: bool,
    /// Keep the unused trailing fields of each line as raw annotation strings.
    pub keep_annotations: bool,
}

#[derive(Clone, Debug, Default)]
pub struct PathsampleStats {
    pub minima_read: usize,
    pub ts_read: usize,
    pub self_loops_dropped: usize,
    pub duplicates_collapsed: usize,
    pub lines_skipped: usize,
    pub saddle_violations_dropped: usize,
    pub min_annotations: Option<Vec<String>>,
    pub ts_annotations: Option<Vec<String>>,
}

pub fn read_pathsample(
    min_path: &Path,
    ts_path: &Path,
    options: &PathsampleOptions,
) -> Result<(NetworkData, PathsampleStats), IoError> {
    read_pathsample_from(
        BufReader::new(std::fs::File::open(min_path)?),
        BufReader::new(std::fs::File::open(ts_path)?),
        options,
    )
}

pub fn read_pathsample_from(
    min_reader: impl BufRead,
    ts_reader: impl BufRead,
    options: &PathsampleOptions,
) -> Result<(NetworkData, PathsampleStats), IoError> {
    let cols = options.columns;
    let mut stats = PathsampleStats {
        min_annotations: options.keep_annotations.then(Vec::new),
        ts_annotations: options.keep_annotations.then(Vec::new),
        ..Default::default()
    };

    let mut states = Vec::new();
    for (idx, line) in min_reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let energy = field_f64(&fields, cols.min_energy, idx + 1, "minimum energy")?;
        let id = states.len() as u32 + 1;
        states.push(StateRecord::new(id, energy));
        if let Some(ann) = &mut stats.min_annotations {
            ann.push(annotation(&fields, &[cols.min_energy]));
        }
    }
    stats.minima_read = states.len();
    let n = states.len();

    // (a, b) -> (lowest saddle, annotation index)
    let mut best: HashMap<(u32, u32), f64> = HashMap::new();
    for (idx, line) in ts_reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parsed = (|| -> Result<(f64, usize, usize), IoError> {
            let energy = field_f64(&fields, cols.ts_energy, line_no, "saddle energy")?;
            let m1 = field_usize(&fields, cols.ts_min1, line_no, "first endpoint")?;
            let m2 = field_usize(&fields, cols.ts_min2, line_no, "second endpoint")?;
            if m1 == 0 || m1 > n || m2 == 0 || m2 > n {
                return Err(IoError::Parse {
                    line: line_no,
                    message: format!("endpoint out of range ({m1}, {m2}) for {n} minima"),
                });
            }
            Ok((energy, m1, m2))
        })();
        let (energy, m1, m2) = match parsed {
            Ok(t) => t,
            Err(e) => {
                if options.tolerant {
                    stats.lines_skipped += 1;
                    continue;
                }
                return Err(e);
            }
        };
        stats.ts_read += 1;
        if m1 == m2 {
            stats.self_loops_dropped += 1;
            continue;
        }
        if options.tolerant {
            let (va, vb) = (states[m1 - 1].potential, states[m2 - 1].potential);
            if !(energy > va && energy > vb) {
                stats.saddle_violations_dropped += 1;
                continue;
            }
        }
        let key = (m1.min(m2) as u32, m1.max(m2) as u32);
        match best.entry(key) {
            std::collections::hash_map::Entry::Occupied(mut e) => {
                stats.duplicates_collapsed += 1;
                if energy < *e.get() {
                    e.insert(energy);
                }
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(energy);
            }
        }
        if let Some(ann) = &mut stats.ts_annotations {
            ann.push(annotation(
                &fields,
                &[cols.ts_energy, cols.ts_min1, cols.ts_min2],
            ));
        }
    }

    let mut keys: Vec<(u32, u32)> = best.keys().copied().collect();
    keys.sort_unstable();
    let edges = keys
        .into_iter()
        .map(|(a, b)| EdgeRecord {
            a: StateId(a),
            b: StateId(b),
            saddle: best[&(a, b)],
            prefactor: 1.0,
        })
        .collect();
    let data = NetworkData::new(states, edges)?;
    Ok((data, stats))
}

fn field_f64(fields: &[&str], col: usize, line: usize, what: &str) -> Result<f64, IoError> {
    fields
        .get(col - 1)
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| IoError::Parse {
            line,
            message: format!("missing or bad {what} in field {col}"),
        })
}

fn field_usize(fields: &[&str], col: usize, line: usize, what: &str) -> Result<usize, IoError> {
    fields
        .get(col - 1)
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| IoError::Parse {
            line,
            message: format!("missing or bad {what} in field {col}"),
        })
}

fn annotation(fields: &[&str], used: &[usize]) -> String {
    fields
        .iter()
        .enumerate()
        .filter(|(i, _)| !used.contains(&(i + 1)))
        .map(|(_, f)| *f)
        .collect::<Vec<_>>()
        .join(" ")
}
