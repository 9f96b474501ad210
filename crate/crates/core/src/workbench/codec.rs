//! Canonical JSON form of a condition.
//!
//! ```text
//! {"width":T,"node":NODE}
//! NODE = {"atomic":I}
//!      | {"amalgam":{"zeta_star":Z,"tau_star":TERM,"heart":[I…],"parts":[{"node":NODE,"v":[I…]}…]}}
//! ```
//!
//! Index lists must be strictly increasing. Only the construction tuple is
//! stored; decoding rebuilds and revalidates every derived field.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::condition::{Condition, Part, Shape, Width};
use crate::error::{Error, Result};
use crate::index::{GenIndex, IndexSet};
use crate::term::BoolTerm;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireCondition {
    width: usize,
    node: WireNode,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum WireNode {
    Atomic(u32),
    Amalgam(WireAmalgam),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireAmalgam {
    zeta_star: usize,
    tau_star: BoolTerm,
    heart: Vec<u32>,
    parts: Vec<WirePart>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WirePart {
    node: WireNode,
    v: Vec<u32>,
}

fn to_wire(p: &Condition) -> WireNode {
    match p.shape() {
        Shape::Atomic(i) => WireNode::Atomic(i.0),
        Shape::Amalgam(a) => WireNode::Amalgam(WireAmalgam {
            zeta_star: a.zeta_star(),
            tau_star: a.tau_star().clone(),
            heart: a.heart().iter().map(|i| i.0).collect(),
            parts: a
                .parts()
                .iter()
                .map(|part| WirePart {
                    node: to_wire(&part.child),
                    v: part.v.iter().map(|i| i.0).collect(),
                })
                .collect(),
        }),
    }
}

/// Compact JSON followed by a newline.
pub fn encode(p: &Condition) -> String {
    let wire = WireCondition {
        width: p.width().get(),
        node: to_wire(p),
    };
    let mut s = serde_json::to_string(&wire).expect("wire form always serializes");
    s.push('\n');
    s
}

fn sorted(list: Vec<u32>, what: &str) -> Result<IndexSet> {
    IndexSet::from_sorted(list.into_iter().map(GenIndex).collect())
        .map_err(|_| Error::Format(format!("{what} is not strictly increasing")))
}

fn from_wire(width: Width, node: WireNode) -> Result<Condition> {
    match node {
        WireNode::Atomic(i) => Ok(Condition::atomic(width, GenIndex(i))),
        WireNode::Amalgam(a) => {
            let heart = sorted(a.heart, "heart")?;
            let parts = a
                .parts
                .into_iter()
                .map(|p| Ok(Part::new(from_wire(width, p.node)?, sorted(p.v, "v")?)))
                .collect::<Result<Vec<_>>>()?;
            Condition::amalgamate(a.zeta_star, a.tau_star, heart, parts)
        }
    }
}

pub fn decode(text: &str) -> Result<Condition> {
    let wire: WireCondition =
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let width = Width::new(wire.width).map_err(|e| Error::Format(e.to_string()))?;
    from_wire(width, wire.node)
}

/// First 16 hex digits of the SHA-256 of the canonical encoding.
pub fn condition_id(p: &Condition) -> String {
    let digest = Sha256::digest(encode(p).as_bytes());
    hex::encode(digest)[..16].to_string()
}
