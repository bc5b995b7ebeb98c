use std::fmt;
use std::str::FromStr;

use super::ConstructionError;
use crate::arith::BitString;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstructKind {
    Atoms4,
    Gamma,
    XiIoc,
    XiDim,
    Lambda,
}

impl ConstructKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConstructKind::Atoms4 => "atoms4",
            ConstructKind::Gamma => "gamma",
            ConstructKind::XiIoc => "xi-ioc",
            ConstructKind::XiDim => "xi-dim",
            ConstructKind::Lambda => "lambda",
        }
    }
}

impl FromStr for ConstructKind {
    type Err = ConstructionError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "atoms4" => ConstructKind::Atoms4,
            "gamma" => ConstructKind::Gamma,
            "xi-ioc" => ConstructKind::XiIoc,
            "xi-dim" => ConstructKind::XiDim,
            "lambda" => ConstructKind::Lambda,
            _ => return Err(ConstructionError::Parse(format!("unknown construction kind {s:?}"))),
        })
    }
}

impl fmt::Display for ConstructKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `construct v1 kind=<k> depth=<D> pcf=<schedule> seed=<bits> [index=<i>]`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructConfig {
    pub kind: ConstructKind,
    pub depth: usize,
    pub pcf: String,
    pub seed: BitString,
    /// Index of the single function used by the encoders and the decoder.
    pub index: u64,
}

impl ConstructConfig {
    pub fn parse(text: &str) -> Result<Self, ConstructionError> {
        let err = |m: String| ConstructionError::Parse(m);
        let mut words = text.split_whitespace();
        if words.next() != Some("construct") || words.next() != Some("v1") {
            return Err(err("config must start with \"construct v1\"".into()));
        }
        let (mut kind, mut depth, mut pcf, mut seed, mut index) = (None, None, None, None, 1);
        for w in words {
            let (k, v) = w.split_once('=').ok_or_else(|| err(format!("expected key=value, got {w:?}")))?;
            match k {
                "kind" => kind = Some(v.parse()?),
                "depth" => depth = Some(v.parse().map_err(|_| err(format!("bad depth {v:?}")))?),
                "pcf" => pcf = Some(v.to_string()),
                "seed" => seed = Some(v.parse().map_err(|_| err(format!("bad seed {v:?}")))?),
                "index" => index = v.parse().map_err(|_| err(format!("bad index {v:?}")))?,
                _ => return Err(err(format!("unknown key {k:?}"))),
            }
        }
        Ok(ConstructConfig {
            kind: kind.ok_or_else(|| err("missing kind".into()))?,
            depth: depth.ok_or_else(|| err("missing depth".into()))?,
            pcf: pcf.ok_or_else(|| err("missing pcf".into()))?,
            seed: seed.unwrap_or_default(),
            index,
        })
    }

    pub fn to_text(&self) -> String {
        let seed = if self.seed.is_empty() { String::new() } else { format!(" seed={}", self.seed) };
        format!(
            "construct v1 kind={} depth={} pcf={}{seed} index={}",
            self.kind, self.depth, self.pcf, self.index
        )
    }
}
