use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rbcast::{DeliveryPlan, MessageId, MessageSet, MessageValue, NodeId, Round};
use crate::Polytope;

use super::ExecutionConfig;

/// First line of a trace file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub config: ExecutionConfig,
    pub t_end: Round,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceEvent {
    RbSend {
        sender: NodeId,
        round: Round,
        id: MessageId,
        value: MessageValue,
        plan: DeliveryPlan,
    },
    RbRefused {
        sender: NodeId,
        round: Round,
        reason: String,
    },
    SvReturn {
        node: NodeId,
        messages: Vec<MessageId>,
    },
    Delivery {
        receiver: NodeId,
        sender: NodeId,
        round: Round,
        id: MessageId,
    },
    Suppression {
        receiver: NodeId,
        sender: NodeId,
        round: Round,
        id: MessageId,
    },
    Verify {
        node: NodeId,
        sender: NodeId,
        round: Round,
        ok: bool,
    },
    Add {
        node: NodeId,
        sender: NodeId,
        round: Round,
    },
    RcFreeze {
        node: NodeId,
        round: Round,
        set: MessageSet,
    },
    HCompute {
        node: NodeId,
        round: Round,
        h: Polytope,
    },
    RoundAdvance {
        node: NodeId,
        round: Round,
    },
    Decide {
        node: NodeId,
        t_end: Round,
        h: Polytope,
    },
    Drop {
        node: NodeId,
        sender: NodeId,
        round: Round,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: u64,
    pub event: TraceEvent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionTrace {
    pub header: TraceHeader,
    pub records: Vec<TraceRecord>,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace is empty")]
    Empty,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: step {step} does not increase")]
    StepOrder { line: usize, step: u64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ExecutionTrace {
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        serde_json::to_writer(&mut w, &self.header)?;
        w.write_all(b"\n")?;
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self, TraceError> {
        let mut lines = r.lines().enumerate().filter(|(_, l)| match l {
            Ok(s) => !s.trim().is_empty(),
            Err(_) => true,
        });
        let (_, first) = lines.next().ok_or(TraceError::Empty)?;
        let header: TraceHeader = serde_json::from_str(&first?).map_err(|e| TraceError::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        let mut records = Vec::new();
        let mut last: Option<u64> = None;
        for (i, line) in lines {
            let rec: TraceRecord = serde_json::from_str(&line?).map_err(|e| TraceError::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            if last.is_some_and(|s| rec.step <= s) {
                return Err(TraceError::StepOrder {
                    line: i + 1,
                    step: rec.step,
                });
            }
            last = Some(rec.step);
            records.push(rec);
        }
        Ok(Self { header, records })
    }

    pub fn from_jsonl(s: &str) -> Result<Self, TraceError> {
        Self::read_jsonl(s.as_bytes())
    }

    pub fn events(&self) -> impl Iterator<Item = &TraceEvent> {
        self.records.iter().map(|r| &r.event)
    }
}
