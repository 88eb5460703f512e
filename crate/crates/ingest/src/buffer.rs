use gapewatch_core::detector::{WindowClassifier, WindowSpan, WindowVerdict};
use gapewatch_core::signal::{sample_time_ms, ChannelId};

/// Tumbling window buffer for one channel.
///
/// Sample timestamps are implied from the first accepted reading and the
/// nominal rate, exactly as the offline path does after splicing gaps, so
/// windows and verdicts line up with offline detection on the same data.
#[derive(Debug, Clone)]
pub struct ChannelBuffer {
    channel: ChannelId,
    values: Vec<f64>,
    capacity: usize,
    origin_ms: Option<i64>,
    accepted: u64,
    windows: usize,
    last_verdict: Option<WindowVerdict>,
}

impl ChannelBuffer {
    pub fn new(channel: ChannelId, window_samples: usize) -> Self {
        ChannelBuffer {
            channel,
            values: Vec::with_capacity(window_samples),
            capacity: window_samples,
            origin_ms: None,
            accepted: 0,
            windows: 0,
            last_verdict: None,
        }
    }

    pub fn channel(&self) -> ChannelId {
        self.channel
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Values waiting for the current window to fill.
    pub fn fill(&self) -> usize {
        self.values.len()
    }

    pub fn accepted(&self) -> u64 {
        self.accepted
    }

    pub fn last_verdict(&self) -> Option<&WindowVerdict> {
        self.last_verdict.as_ref()
    }

    /// Adds one reading; returns a verdict when it completes a window.
    pub fn push(
        &mut self,
        timestamp_ms: i64,
        value: f64,
        classifier: &WindowClassifier,
    ) -> gapewatch_core::Result<Option<WindowVerdict>> {
        let origin = *self.origin_ms.get_or_insert(timestamp_ms);
        self.values.push(value);
        self.accepted += 1;
        if self.values.len() < self.capacity {
            return Ok(None);
        }
        let fs = classifier.sample_rate_hz();
        let first = self.accepted - self.capacity as u64;
        let span = WindowSpan {
            index: self.windows,
            start_sample: first as usize,
            len: self.capacity,
            padded: false,
            start_time_ms: sample_time_ms(origin, fs, first),
            end_time_ms: sample_time_ms(origin, fs, self.accepted),
        };
        let verdict = classifier.classify(&self.values, &span);
        self.values.clear();
        self.windows += 1;
        let verdict = verdict?;
        self.last_verdict = Some(verdict);
        Ok(Some(verdict))
    }
}
