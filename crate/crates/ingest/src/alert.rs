use std::io::Write;
use std::sync::{Arc, Mutex};

use gapewatch_core::detector::{detect_events, DetectorConfig, WindowVerdict};
use gapewatch_core::signal::{extract_channel, ChannelId, GapPolicy, GapeRecord};
use serde::{Deserialize, Serialize};

use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlertKind {
    SpawningStarted,
    SpawningEnded,
}

/// One line of the alert stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlertRecord {
    pub channel_id: ChannelId,
    pub kind: AlertKind,
    pub window_start_ms: i64,
    pub window_end_ms: i64,
    pub band_power: f64,
}

impl AlertRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("alert records always serialize")
    }
}

/// Turns a per-channel verdict stream into started/ended transitions.
#[derive(Debug, Clone, Default)]
pub struct AlertTracker {
    spawning: bool,
}

impl AlertTracker {
    pub fn observe(&mut self, channel: ChannelId, v: &WindowVerdict) -> Option<AlertRecord> {
        if v.is_spawning == self.spawning {
            return None;
        }
        self.spawning = v.is_spawning;
        Some(AlertRecord {
            channel_id: channel,
            kind: if v.is_spawning {
                AlertKind::SpawningStarted
            } else {
                AlertKind::SpawningEnded
            },
            window_start_ms: v.start_time_ms,
            window_end_ms: v.end_time_ms,
            band_power: v.band_power,
        })
    }

    pub fn is_spawning(&self) -> bool {
        self.spawning
    }
}

pub fn alerts_from_verdicts(channel: ChannelId, verdicts: &[WindowVerdict]) -> Vec<AlertRecord> {
    let mut tracker = AlertTracker::default();
    verdicts
        .iter()
        .filter_map(|v| tracker.observe(channel, v))
        .collect()
}

/// The alerts the server would emit for `records`, computed offline:
/// every channel present is extracted, detected and converted, in channel
/// order.
pub fn offline_alerts(
    records: &[GapeRecord],
    sample_rate_hz: f64,
    config: &DetectorConfig,
) -> Result<Vec<AlertRecord>> {
    let mut out = Vec::new();
    for channel in ChannelId::all() {
        if !records.iter().any(|r| r.channel(channel).is_some()) {
            continue;
        }
        let series = extract_channel(records, channel, sample_rate_hz, GapPolicy::Concatenate)?;
        let det = detect_events(&series, config)?;
        out.extend(alerts_from_verdicts(channel, &det.verdicts));
    }
    Ok(out)
}

pub trait AlertSink: Send + Sync {
    fn emit(&self, alert: &AlertRecord);
}

/// Collects alerts in memory, in emission order.
#[derive(Debug, Default)]
pub struct MemorySink {
    alerts: Mutex<Vec<AlertRecord>>,
}

impl MemorySink {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn alerts(&self) -> Vec<AlertRecord> {
        self.alerts.lock().unwrap().clone()
    }
}

impl AlertSink for MemorySink {
    fn emit(&self, alert: &AlertRecord) {
        self.alerts.lock().unwrap().push(alert.clone());
    }
}

/// Appends one JSON object per line and flushes after each.
pub struct JsonlSink<W: Write + Send> {
    writer: Mutex<W>,
}

impl<W: Write + Send> JsonlSink<W> {
    pub fn new(writer: W) -> Self {
        JsonlSink {
            writer: Mutex::new(writer),
        }
    }

    pub fn into_inner(self) -> W {
        self.writer.into_inner().unwrap()
    }
}

impl<W: Write + Send> AlertSink for JsonlSink<W> {
    fn emit(&self, alert: &AlertRecord) {
        let mut w = self.writer.lock().unwrap();
        if let Err(e) = writeln!(w, "{}", alert.to_json_line()).and_then(|_| w.flush()) {
            log::error!("failed to write alert: {e}");
        }
    }
}

#[derive(Default)]
pub struct FanoutSink {
    sinks: Vec<Arc<dyn AlertSink>>,
}

impl FanoutSink {
    pub fn new(sinks: Vec<Arc<dyn AlertSink>>) -> Self {
        FanoutSink { sinks }
    }
}

impl AlertSink for FanoutSink {
    fn emit(&self, alert: &AlertRecord) {
        for s in &self.sinks {
            s.emit(alert);
        }
    }
}
