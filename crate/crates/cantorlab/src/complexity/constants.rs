use std::collections::BTreeMap;
use std::path::Path;

use super::{Bound, ComplexityError, ReferenceMachine, UniversalMachine, BLOCK_ENCODER_INDEX};
use crate::arith::BitString;

const BUNDLED: &str = include_str!("../../data/machine-constants.txt");

/// Measured constants of a bundled machine.
///
/// `c_U` bounds `ka_t − k_t` and also the extra cost of reaching the block
/// encoder through the `1^e 0` coding, whichever is larger.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineConstants {
    pub machine: String,
    pub c_u: u64,
    pub ka_k_gap: i64,
    pub block_encoder_overhead: u64,
    pub measured_t: u64,
    pub measured_len: usize,
}

impl MachineConstants {
    /// Constants recorded for the reference machine.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled constants file is well formed")
    }

    pub fn load(path: &Path) -> Result<Self, ComplexityError> {
        let text = std::fs::read_to_string(path).map_err(|e| ComplexityError::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ComplexityError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        if lines.next() != Some("machine-constants v1") {
            return Err(ComplexityError::Parse("expected header 'machine-constants v1'".into()));
        }
        let mut kv = BTreeMap::new();
        for line in lines {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ComplexityError::Parse(format!("expected key=value, got {line:?}")))?;
            if kv.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(ComplexityError::Parse(format!("duplicate key {k:?}")));
            }
        }
        fn get<T: std::str::FromStr>(kv: &BTreeMap<String, String>, key: &str) -> Result<T, ComplexityError> {
            kv.get(key)
                .ok_or_else(|| ComplexityError::Parse(format!("missing key {key}")))?
                .parse()
                .map_err(|_| ComplexityError::Parse(format!("bad value for {key}")))
        }
        Ok(MachineConstants {
            machine: get(&kv, "machine")?,
            c_u: get(&kv, "c_U")?,
            ka_k_gap: get(&kv, "ka_k_gap")?,
            block_encoder_overhead: get(&kv, "block_encoder_overhead")?,
            measured_t: get(&kv, "measured_t")?,
            measured_len: get(&kv, "measured_len")?,
        })
    }

    pub fn to_text(&self) -> String {
        format!(
            "machine-constants v1\nmachine={}\nc_U={}\nka_k_gap={}\nblock_encoder_overhead={}\nmeasured_t={}\nmeasured_len={}\n",
            self.machine, self.c_u, self.ka_k_gap, self.block_encoder_overhead, self.measured_t, self.measured_len
        )
    }
}

/// Measures the reference machine's constants at stage `t` over all strings
/// of length `≤ max_len`.
pub fn measure_constants(t: u64, max_len: usize) -> MachineConstants {
    let m = ReferenceMachine;
    let mut gap = i64::MIN;
    for s in BitString::all_up_to(max_len) {
        if let (Bound::Finite(k), Bound::Finite(ka)) = (m.k_t(&s, t), m.ka_t(&s, t)) {
            gap = gap.max(ka as i64 - k as i64);
        }
    }
    let overhead = BLOCK_ENCODER_INDEX + 1;
    MachineConstants {
        machine: m.name().to_string(),
        c_u: gap.max(0).max(overhead as i64) as u64,
        ka_k_gap: gap,
        block_encoder_overhead: overhead,
        measured_t: t,
        measured_len: max_len,
    }
}
