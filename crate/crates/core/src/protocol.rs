//! Model catalog, protocol messages and the line-oriented event log encoding.
//!
//! Every message exchanged between NFs, leaf NWDAFs and the root (or a
//! baseline NWDAF) is one [`Message`] variant. The simulator appends each
//! delivered message to the event log as a single pipe-separated line:
//!
//! ```text
//! time|src|dst|kind|type_id|event_id|size_bytes
//! ```
//!
//! Absent fields are written as `-`. For `MXFER` lines the `event_id`
//! column carries the model version as `v<N>` when the version is non-zero.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::DecodeError;

/// Default model size used throughout the evaluation scenarios (15 MB).
pub const DEFAULT_MODEL_SIZE_BYTES: u64 = 15_000_000;

/// Identifier of an analytics/model type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModelTypeId(pub u32);

impl fmt::Display for ModelTypeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type EventId = u64;
pub type NfId = u32;
pub type LeafId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub type_id: ModelTypeId,
    pub size_bytes: u64,
    pub version: u32,
}

impl ModelDescriptor {
    pub fn new(type_id: ModelTypeId, size_bytes: u64) -> Self {
        assert!(size_bytes > 0, "model size must be positive");
        Self {
            type_id,
            size_bytes,
            version: 0,
        }
    }
}

/// Service method under which a model is held in a leaf store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    Subscribed,
    Requested,
}

/// Addressable simulation endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeId {
    Nf(NfId),
    Leaf(LeafId),
    Root,
    /// A stand-alone NWDAF of the CONV/MULTI baselines.
    Nwdaf(u32),
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::Nf(i) => write!(f, "NF{i}"),
            NodeId::Leaf(i) => write!(f, "LEAF{i}"),
            NodeId::Root => f.write_str("ROOT"),
            NodeId::Nwdaf(i) => write!(f, "NWDAF{i}"),
        }
    }
}

impl FromStr for NodeId {
    type Err = DecodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DecodeError::Field {
            field: "node",
            value: s.to_string(),
        };
        if s == "ROOT" {
            return Ok(NodeId::Root);
        }
        let (prefix, digits) = s
            .find(|c: char| c.is_ascii_digit())
            .map(|i| s.split_at(i))
            .ok_or_else(bad)?;
        let n: u32 = digits.parse().map_err(|_| bad())?;
        match prefix {
            "NF" => Ok(NodeId::Nf(n)),
            "LEAF" => Ok(NodeId::Leaf(n)),
            "NWDAF" => Ok(NodeId::Nwdaf(n)),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Message {
    AnalyticsRequest {
        event_id: EventId,
        nf_id: NfId,
        type_id: ModelTypeId,
    },
    AnalyticsResponse {
        event_id: EventId,
        nf_id: NfId,
        type_id: ModelTypeId,
    },
    AnalyticsSubscribe {
        event_id: EventId,
        nf_id: NfId,
        type_id: ModelTypeId,
    },
    AnalyticsUnsubscribe {
        nf_id: NfId,
        type_id: ModelTypeId,
    },
    ModelRequest {
        leaf_id: LeafId,
        type_id: ModelTypeId,
    },
    ModelSubscribe {
        leaf_id: LeafId,
        type_id: ModelTypeId,
    },
    ModelUnsubscribe {
        leaf_id: LeafId,
        type_id: ModelTypeId,
    },
    ModelTransfer {
        descriptor: ModelDescriptor,
    },
}

impl Message {
    pub fn type_id(&self) -> ModelTypeId {
        match *self {
            Message::AnalyticsRequest { type_id, .. }
            | Message::AnalyticsResponse { type_id, .. }
            | Message::AnalyticsSubscribe { type_id, .. }
            | Message::AnalyticsUnsubscribe { type_id, .. }
            | Message::ModelRequest { type_id, .. }
            | Message::ModelSubscribe { type_id, .. }
            | Message::ModelUnsubscribe { type_id, .. } => type_id,
            Message::ModelTransfer { descriptor } => descriptor.type_id,
        }
    }

    /// Short tag written in the `kind` column of the event log.
    pub fn kind(&self) -> &'static str {
        match self {
            Message::AnalyticsRequest { .. } => "AREQ",
            Message::AnalyticsResponse { .. } => "ARSP",
            Message::AnalyticsSubscribe { .. } => "ASUB",
            Message::AnalyticsUnsubscribe { .. } => "AUNSUB",
            Message::ModelRequest { .. } => "MREQ",
            Message::ModelSubscribe { .. } => "MSUB",
            Message::ModelUnsubscribe { .. } => "MUNSUB",
            Message::ModelTransfer { .. } => "MXFER",
        }
    }

    pub fn event_id(&self) -> Option<EventId> {
        match *self {
            Message::AnalyticsRequest { event_id, .. }
            | Message::AnalyticsResponse { event_id, .. }
            | Message::AnalyticsSubscribe { event_id, .. } => Some(event_id),
            _ => None,
        }
    }

    /// Bytes carried on the wire. Control messages are modelled as empty.
    pub fn size_bytes(&self) -> u64 {
        match self {
            Message::ModelTransfer { descriptor } => descriptor.size_bytes,
            _ => 0,
        }
    }
}

/// Issues dense model type ids and remembers their descriptors.
#[derive(Debug, Clone, Default)]
pub struct ModelCatalog {
    next_id: u32,
    registry: BTreeMap<ModelTypeId, ModelDescriptor>,
}

impl ModelCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a fresh model type of the given size.
    ///
    /// Panics if `size_bytes` is zero.
    pub fn new_type(&mut self, size_bytes: u64) -> ModelTypeId {
        assert!(size_bytes > 0, "model size must be positive");
        let id = ModelTypeId(self.next_id);
        self.next_id += 1;
        self.registry.insert(id, ModelDescriptor::new(id, size_bytes));
        id
    }

    pub fn get(&self, id: ModelTypeId) -> Option<&ModelDescriptor> {
        self.registry.get(&id)
    }

    pub fn len(&self) -> usize {
        self.registry.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registry.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ModelTypeId> + '_ {
        self.registry.keys().copied()
    }

    pub fn descriptors(&self) -> impl Iterator<Item = &ModelDescriptor> {
        self.registry.values()
    }
}

/// One decoded log line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRecord {
    pub time: f64,
    pub src: NodeId,
    pub dst: NodeId,
    pub msg: Message,
}

pub fn encode_message(msg: &Message, time: f64, src: NodeId, dst: NodeId) -> String {
    let event = match msg {
        Message::ModelTransfer { descriptor } if descriptor.version > 0 => {
            format!("v{}", descriptor.version)
        }
        _ => msg
            .event_id()
            .map_or_else(|| "-".to_string(), |e| e.to_string()),
    };
    let size = match msg {
        Message::ModelTransfer { descriptor } => descriptor.size_bytes.to_string(),
        _ => "-".to_string(),
    };
    format!(
        "{time:.6}|{src}|{dst}|{}|{}|{event}|{size}",
        msg.kind(),
        msg.type_id()
    )
}

pub fn decode_message(line: &str) -> Result<LogRecord, DecodeError> {
    let fields: Vec<&str> = line.trim_end_matches(['\n', '\r']).split('|').collect();
    if fields.len() != 7 {
        return Err(DecodeError::FieldCount(fields.len()));
    }
    let field_err = |field: &'static str, value: &str| DecodeError::Field {
        field,
        value: value.to_string(),
    };

    let time: f64 = fields[0].parse().map_err(|_| field_err("time", fields[0]))?;
    if !time.is_finite() {
        return Err(field_err("time", fields[0]));
    }
    let src: NodeId = fields[1].parse().map_err(|_| field_err("src", fields[1]))?;
    let dst: NodeId = fields[2].parse().map_err(|_| field_err("dst", fields[2]))?;
    let kind = fields[3];
    let type_id = ModelTypeId(
        fields[4]
            .parse()
            .map_err(|_| field_err("type_id", fields[4]))?,
    );
    let event_id = || -> Result<EventId, DecodeError> {
        fields[5]
            .parse()
            .map_err(|_| field_err("event_id", fields[5]))
    };
    let expect_dash = |idx: usize, name: &'static str| -> Result<(), DecodeError> {
        if fields[idx] == "-" {
            Ok(())
        } else {
            Err(field_err(name, fields[idx]))
        }
    };
    let nf_of = |node: NodeId, name: &'static str, raw: &str| match node {
        NodeId::Nf(n) => Ok(n),
        _ => Err(field_err(name, raw)),
    };
    let leaf_of = |node: NodeId| match node {
        NodeId::Leaf(n) => Ok(n),
        _ => Err(field_err("src", fields[1])),
    };

    let msg = match kind {
        "AREQ" | "ASUB" => {
            expect_dash(6, "size_bytes")?;
            let nf_id = nf_of(src, "src", fields[1])?;
            let event_id = event_id()?;
            if kind == "AREQ" {
                Message::AnalyticsRequest {
                    event_id,
                    nf_id,
                    type_id,
                }
            } else {
                Message::AnalyticsSubscribe {
                    event_id,
                    nf_id,
                    type_id,
                }
            }
        }
        "ARSP" => {
            expect_dash(6, "size_bytes")?;
            Message::AnalyticsResponse {
                event_id: event_id()?,
                nf_id: nf_of(dst, "dst", fields[2])?,
                type_id,
            }
        }
        "AUNSUB" => {
            expect_dash(5, "event_id")?;
            expect_dash(6, "size_bytes")?;
            Message::AnalyticsUnsubscribe {
                nf_id: nf_of(src, "src", fields[1])?,
                type_id,
            }
        }
        "MREQ" | "MSUB" | "MUNSUB" => {
            expect_dash(5, "event_id")?;
            expect_dash(6, "size_bytes")?;
            let leaf_id = leaf_of(src)?;
            match kind {
                "MREQ" => Message::ModelRequest { leaf_id, type_id },
                "MSUB" => Message::ModelSubscribe { leaf_id, type_id },
                _ => Message::ModelUnsubscribe { leaf_id, type_id },
            }
        }
        "MXFER" => {
            let version = match fields[5] {
                "-" => 0,
                v => v
                    .strip_prefix('v')
                    .and_then(|n| n.parse().ok())
                    .filter(|n: &u32| *n > 0)
                    .ok_or_else(|| field_err("event_id", v))?,
            };
            let size_bytes: u64 = fields[6]
                .parse()
                .ok()
                .filter(|s| *s > 0)
                .ok_or_else(|| field_err("size_bytes", fields[6]))?;
            Message::ModelTransfer {
                descriptor: ModelDescriptor {
                    type_id,
                    size_bytes,
                    version,
                },
            }
        }
        other => return Err(field_err("kind", other)),
    };

    Ok(LogRecord {
        time,
        src,
        dst,
        msg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_issues_dense_ids() {
        let mut cat = ModelCatalog::new();
        assert_eq!(cat.new_type(DEFAULT_MODEL_SIZE_BYTES), ModelTypeId(0));
        cat.new_type(DEFAULT_MODEL_SIZE_BYTES);
        cat.new_type(DEFAULT_MODEL_SIZE_BYTES);
        assert_eq!(cat.new_type(DEFAULT_MODEL_SIZE_BYTES), ModelTypeId(3));
        let ids: Vec<u32> = cat.ids().map(|i| i.0).collect();
        assert_eq!(ids, vec![0, 1, 2, 3]);
    }

    #[test]
    #[should_panic(expected = "model size must be positive")]
    fn catalog_rejects_zero_size() {
        ModelCatalog::new().new_type(0);
    }

    #[test]
    fn encodes_request_line() {
        let msg = Message::AnalyticsRequest {
            event_id: 7,
            nf_id: 2,
            type_id: ModelTypeId(1),
        };
        let line = encode_message(&msg, 10.0, NodeId::Nf(2), NodeId::Leaf(2));
        assert_eq!(line, "10.000000|NF2|LEAF2|AREQ|1|7|-");
        let rec = decode_message(&line).unwrap();
        assert_eq!(rec.msg, msg);
        assert_eq!(rec.time, 10.0);
    }

    #[test]
    fn encodes_transfer_line() {
        let msg = Message::ModelTransfer {
            descriptor: ModelDescriptor::new(ModelTypeId(1), 15_000_000),
        };
        let line = encode_message(&msg, 11.21, NodeId::Root, NodeId::Leaf(2));
        assert_eq!(line, "11.210000|ROOT|LEAF2|MXFER|1|-|15000000");
        let rec = decode_message(&line).unwrap();
        assert_eq!(rec.msg, msg);
        assert_eq!((rec.src, rec.dst), (NodeId::Root, NodeId::Leaf(2)));
    }

    #[test]
    fn transfer_version_survives_round_trip() {
        let mut d = ModelDescriptor::new(ModelTypeId(4), 10);
        d.version = 3;
        let msg = Message::ModelTransfer { descriptor: d };
        let line = encode_message(&msg, 1.0, NodeId::Root, NodeId::Leaf(0));
        assert_eq!(line, "1.000000|ROOT|LEAF0|MXFER|4|v3|10");
        assert_eq!(decode_message(&line).unwrap().msg, msg);
    }

    #[test]
    fn decode_names_offending_field() {
        let cases = [
            ("x|NF2|LEAF2|AREQ|1|7|-", "time"),
            ("1.0|NX2|LEAF2|AREQ|1|7|-", "src"),
            ("1.0|NF2|LEAF2|AREQ|one|7|-", "type_id"),
            ("1.0|NF2|LEAF2|AREQ|1|seven|-", "event_id"),
            ("1.0|NF2|LEAF2|NOPE|1|7|-", "kind"),
            ("1.0|ROOT|LEAF2|MXFER|1|-|0", "size_bytes"),
            ("1.0|LEAF2|ROOT|MREQ|1|5|-", "event_id"),
        ];
        for (line, field) in cases {
            match decode_message(line) {
                Err(DecodeError::Field { field: f, .. }) => assert_eq!(f, field, "{line}"),
                other => panic!("{line}: unexpected {other:?}"),
            }
        }
        assert!(matches!(
            decode_message("1.0|NF2|LEAF2"),
            Err(DecodeError::FieldCount(3))
        ));
    }

    #[test]
    fn node_ids_parse() {
        for node in [
            NodeId::Nf(0),
            NodeId::Leaf(12),
            NodeId::Root,
            NodeId::Nwdaf(2),
        ] {
            assert_eq!(node.to_string().parse::<NodeId>().unwrap(), node);
        }
        assert!("LEAF".parse::<NodeId>().is_err());
        assert!("ROOT1".parse::<NodeId>().is_err());
    }
}
