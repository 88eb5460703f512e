//! Streaming ingest for six-channel gape frames.
//!
//! Clients connect over TCP and send newline-delimited frames
//! (`<timestamp_ms>,<v1>,...,<v6>`). Each channel feeds its own tumbling
//! window buffer; every full window is classified with the offline detector
//! and verdict transitions become [`AlertRecord`]s.

mod alert;
mod buffer;
mod replay;
mod server;

pub use alert::{
    alerts_from_verdicts, offline_alerts, AlertKind, AlertRecord, AlertSink, AlertTracker,
    FanoutSink, JsonlSink, MemorySink,
};
pub use buffer::ChannelBuffer;
pub use replay::{replay, Pace};
pub use server::{Server, ServerConfig, ServerHandle, ServerStats};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: String,
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Detector(#[from] gapewatch_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, IngestError>;
