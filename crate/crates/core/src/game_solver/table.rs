//! Strategy table files.
//!
//! A table is a single JSON document:
//!
//! ```text
//! { "format": "uwjam-strategy-table", "version": 1,
//!   "config": {...}, "origin": {...} | null,
//!   "state_count": N, "checksum": "<sha256 of the states array>",
//!   "states": [{"b_t", "b_j", "strat_t", "strat_j", "value", "horizon_values"}, ...] }
//! ```
//!
//! States are ordered by `b_t` then `b_j`; `strat_t[i]` is the probability of
//! sending `K + i` packets and `strat_j[i]` of jamming `i` slots. Floats are
//! written in shortest round-trip form, so loading reproduces every bit.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{action_sets, GameConfig, GameState, MixedStrategy, StateEntry, StrategyTable, TableOrigin};
use crate::error::{Error, Result, TableError};

pub const FORMAT: &str = "uwjam-strategy-table";
pub const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateRecord {
    b_t: u32,
    b_j: u32,
    strat_t: Vec<f64>,
    strat_j: Vec<f64>,
    value: f64,
    horizon_values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    format: String,
    version: u32,
    config: GameConfig,
    origin: Option<TableOrigin>,
    state_count: usize,
    checksum: String,
    states: Vec<StateRecord>,
}

fn checksum(states: &[StateRecord]) -> Result<String> {
    let bytes = serde_json::to_vec(states).map_err(|e| Error::Internal(e.to_string()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Serialises a table to its file representation.
pub fn table_to_json(table: &StrategyTable) -> Result<Vec<u8>> {
    let states: Vec<StateRecord> = table
        .entries()
        .iter()
        .map(|e| StateRecord {
            b_t: e.state.b_t,
            b_j: e.state.b_j,
            strat_t: e.strategy_t.probs.clone(),
            strat_j: e.strategy_j.probs.clone(),
            value: e.value_t,
            horizon_values: e.horizon_values.clone(),
        })
        .collect();
    let doc = Document {
        format: FORMAT.into(),
        version: VERSION,
        config: *table.config(),
        origin: table.origin().cloned(),
        state_count: states.len(),
        checksum: checksum(&states)?,
        states,
    };
    let mut out = serde_json::to_vec(&doc).map_err(|e| Error::Internal(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

pub fn export_table(table: &StrategyTable, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, table_to_json(table)?)?;
    Ok(())
}

pub fn load_table(path: impl AsRef<Path>) -> Result<StrategyTable> {
    table_from_json(&std::fs::read(path)?)
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::Table(TableError::Malformed(msg.into()))
}

pub fn table_from_json(bytes: &[u8]) -> Result<StrategyTable> {
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Err(TableError::Empty.into());
    }
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| match e.classify() {
        serde_json::error::Category::Eof => TableError::Truncated(e.to_string()),
        _ => TableError::Malformed(e.to_string()),
    })?;
    match value.get("format").and_then(|f| f.as_str()) {
        Some(FORMAT) => {}
        other => return Err(malformed(format!("not a strategy table (format {other:?})"))),
    }
    let version = value.get("version").and_then(|v| v.as_u64()).ok_or_else(|| malformed("missing version"))?;
    if version != VERSION as u64 {
        return Err(TableError::Version { found: version.min(u32::MAX as u64) as u32, expected: VERSION }.into());
    }
    let doc: Document = serde_json::from_value(value).map_err(|e| malformed(e.to_string()))?;

    let computed = checksum(&doc.states)?;
    if computed != doc.checksum {
        return Err(TableError::Checksum { stored: doc.checksum, computed }.into());
    }
    let config = doc.config;
    config.validate().map_err(|e| malformed(format!("embedded config: {e}")))?;
    if doc.state_count != doc.states.len() || doc.states.len() != config.state_count() {
        return Err(malformed(format!(
            "state count {} / {} records, configuration implies {}",
            doc.state_count,
            doc.states.len(),
            config.state_count()
        )));
    }
    let levels = config.effective_horizon() as usize;
    let mut entries = Vec::with_capacity(doc.states.len());
    for r in doc.states {
        let state = GameState::new(r.b_t, r.b_j);
        let (ts, js) = action_sets(state, config.k_info).map_err(|e| malformed(e.to_string()))?;
        let where_ = || format!("state ({}, {})", r.b_t, r.b_j);
        if r.strat_t.len() != ts.len() || r.strat_j.len() != js.len() {
            return Err(malformed(format!("{}: strategy length does not match action sets", where_())));
        }
        if r.horizon_values.len() != levels || r.horizon_values.last() != Some(&r.value) {
            return Err(malformed(format!("{}: inconsistent horizon values", where_())));
        }
        let strategy_t = MixedStrategy::new(ts, r.strat_t).map_err(|e| malformed(format!("{}: {e}", where_())))?;
        let strategy_j = MixedStrategy::new(js, r.strat_j).map_err(|e| malformed(format!("{}: {e}", where_())))?;
        entries.push(StateEntry { state, strategy_t, strategy_j, value_t: r.value, horizon_values: r.horizon_values });
    }
    StrategyTable::from_parts(config, doc.origin, entries).map_err(|e| malformed(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::super::{solve_full_game, Horizon, JammerKind};
    use super::*;
    use crate::channel_model::PerMode;

    fn table() -> StrategyTable {
        let c = GameConfig {
            k_info: 2,
            b_t0: 12,
            b_j0: 9,
            alpha: 0.4,
            horizon: Horizon::Finite(4),
            discount: 1.0,
            p_clear: 0.013,
            p_blocked: 0.71,
            jammer: JammerKind::Equilibrium,
        };
        solve_full_game(&c).unwrap().with_origin(TableOrigin { distance_m: 60.0, per_mode: PerMode::Uncoded })
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let t = table();
        let back = table_from_json(&table_to_json(&t).unwrap()).unwrap();
        assert_eq!(back, t);
        for (a, b) in t.entries().iter().zip(back.entries()) {
            for (x, y) in a.strategy_t.probs.iter().zip(&b.strategy_t.probs) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
            for (x, y) in a.horizon_values.iter().zip(&b.horizon_values) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.json");
        let t = table();
        export_table(&t, &path).unwrap();
        assert_eq!(load_table(&path).unwrap(), t);
    }

    #[test]
    fn empty_and_truncated() {
        assert!(matches!(table_from_json(b""), Err(Error::Table(TableError::Empty))));
        assert!(matches!(table_from_json(b"  \n"), Err(Error::Table(TableError::Empty))));
        let bytes = table_to_json(&table()).unwrap();
        let cut = &bytes[..bytes.len() / 2];
        assert!(matches!(table_from_json(cut), Err(Error::Table(TableError::Truncated(_)))));
    }

    #[test]
    fn version_mismatch() {
        let text = String::from_utf8(table_to_json(&table()).unwrap()).unwrap();
        let bumped = text.replacen("\"version\":1", "\"version\":7", 1);
        let err = table_from_json(bumped.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Table(TableError::Version { found: 7, expected: 1 })), "{err}");
    }

    #[test]
    fn tampered_value_fails_checksum() {
        let text = String::from_utf8(table_to_json(&table()).unwrap()).unwrap();
        let at = text.find("\"value\":").unwrap() + "\"value\":".len();
        let mut bytes = text.into_bytes();
        // Flip the sign of the first stored value.
        if bytes[at] == b'-' {
            bytes.remove(at);
        } else {
            bytes.insert(at, b'-');
        }
        assert!(matches!(table_from_json(&bytes), Err(Error::Table(TableError::Checksum { .. }))));
    }

    #[test]
    fn wrong_format_tag() {
        assert!(matches!(table_from_json(b"{\"format\":\"csv\"}"), Err(Error::Table(TableError::Malformed(_)))));
        assert!(matches!(table_from_json(b"[1,2]"), Err(Error::Table(TableError::Malformed(_)))));
    }

    #[test]
    fn export_is_byte_stable() {
        assert_eq!(table_to_json(&table()).unwrap(), table_to_json(&table()).unwrap());
    }
}
