use std::io::{BufRead, BufReader};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};

use gapewatch_core::codec::FrameMessage;
use gapewatch_core::detector::{DetectorConfig, WindowClassifier};
use gapewatch_core::signal::{ChannelId, CHANNELS, DEFAULT_SAMPLE_RATE_HZ};
use serde::Serialize;

use crate::alert::{AlertSink, AlertTracker};
use crate::buffer::ChannelBuffer;
use crate::{IngestError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ServerConfig {
    pub detector: DetectorConfig,
    pub sample_rate_hz: f64,
    /// Stop accepting after this many connections and return once they close.
    pub max_connections: Option<usize>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            detector: DetectorConfig::default(),
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            max_connections: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ServerStats {
    pub connections: u64,
    pub frames: u64,
    pub malformed: u64,
    /// Well-formed frames with no channel present.
    pub empty_frames: u64,
    pub windows: u64,
    pub alerts: u64,
}

#[derive(Default)]
struct Counters {
    connections: AtomicU64,
    frames: AtomicU64,
    malformed: AtomicU64,
    empty_frames: AtomicU64,
    windows: AtomicU64,
    alerts: AtomicU64,
}

impl Counters {
    fn snapshot(&self) -> ServerStats {
        ServerStats {
            connections: self.connections.load(Ordering::SeqCst),
            frames: self.frames.load(Ordering::SeqCst),
            malformed: self.malformed.load(Ordering::SeqCst),
            empty_frames: self.empty_frames.load(Ordering::SeqCst),
            windows: self.windows.load(Ordering::SeqCst),
            alerts: self.alerts.load(Ordering::SeqCst),
        }
    }
}

struct ChannelState {
    buffer: ChannelBuffer,
    tracker: AlertTracker,
}

struct Shared {
    classifier: WindowClassifier,
    // keyed by channel, not connection: state survives reconnects
    channels: Vec<Mutex<ChannelState>>,
    counters: Counters,
    shutdown: AtomicBool,
}

/// A bound, not yet running, ingest server.
pub struct Server {
    listener: TcpListener,
    config: ServerConfig,
    shared: Arc<Shared>,
}

impl Server {
    pub fn bind<A: ToSocketAddrs + std::fmt::Display>(
        addr: A,
        config: ServerConfig,
    ) -> Result<Self> {
        if config
            .detector
            .hop_samples
            .is_some_and(|h| h != config.detector.window_samples)
        {
            return Err(IngestError::Config(
                "the live server only supports tumbling windows (no hop)".into(),
            ));
        }
        let classifier = WindowClassifier::new(config.detector.clone(), config.sample_rate_hz)?;
        let listener = TcpListener::bind(&addr).map_err(|source| IngestError::Bind {
            addr: addr.to_string(),
            source,
        })?;
        let channels = ChannelId::all()
            .map(|c| {
                Mutex::new(ChannelState {
                    buffer: ChannelBuffer::new(c, config.detector.window_samples),
                    tracker: AlertTracker::default(),
                })
            })
            .collect();
        Ok(Server {
            listener,
            config,
            shared: Arc::new(Shared {
                classifier,
                channels,
                counters: Counters::default(),
                shutdown: AtomicBool::new(false),
            }),
        })
    }

    pub fn local_addr(&self) -> Result<SocketAddr> {
        Ok(self.listener.local_addr()?)
    }

    /// Serves until `max_connections` have come and gone, or forever.
    pub fn run(self, sink: Arc<dyn AlertSink>) -> Result<ServerStats> {
        let mut workers: Vec<JoinHandle<()>> = Vec::new();
        let mut accepted = 0usize;
        for conn in self.listener.incoming() {
            if self.shared.shutdown.load(Ordering::SeqCst) {
                break;
            }
            let stream = match conn {
                Ok(s) => s,
                Err(e) => {
                    log::warn!("accept failed: {e}");
                    continue;
                }
            };
            accepted += 1;
            self.shared
                .counters
                .connections
                .fetch_add(1, Ordering::SeqCst);
            let shared = Arc::clone(&self.shared);
            let sink = Arc::clone(&sink);
            workers.push(thread::spawn(move || {
                handle_connection(stream, &shared, sink.as_ref())
            }));
            workers.retain(|w| !w.is_finished());
            if self.config.max_connections.is_some_and(|m| accepted >= m) {
                break;
            }
        }
        for w in workers {
            let _ = w.join();
        }
        Ok(self.shared.counters.snapshot())
    }

    /// Runs on a background thread.
    pub fn spawn(self, sink: Arc<dyn AlertSink>) -> Result<ServerHandle> {
        let addr = self.local_addr()?;
        let shared = Arc::clone(&self.shared);
        let thread = thread::spawn(move || self.run(sink));
        Ok(ServerHandle {
            addr,
            shared,
            thread,
        })
    }
}

pub struct ServerHandle {
    addr: SocketAddr,
    shared: Arc<Shared>,
    thread: JoinHandle<Result<ServerStats>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn stats(&self) -> ServerStats {
        self.shared.counters.snapshot()
    }

    /// Stops accepting, waits for open connections to finish, returns totals.
    pub fn shutdown(self) -> Result<ServerStats> {
        self.shared.shutdown.store(true, Ordering::SeqCst);
        // wake the blocking accept
        let _ = TcpStream::connect(self.addr);
        self.join()
    }

    /// Waits for the server to stop on its own (see `max_connections`).
    pub fn join(self) -> Result<ServerStats> {
        self.thread
            .join()
            .map_err(|_| IngestError::Config("server thread panicked".into()))?
    }
}

fn handle_connection(stream: TcpStream, shared: &Shared, sink: &dyn AlertSink) {
    let peer = stream
        .peer_addr()
        .map_or_else(|_| "unknown".to_string(), |a| a.to_string());
    log::debug!("connection from {peer}");
    let mut reader = BufReader::new(stream);
    let mut buf = Vec::new();
    loop {
        buf.clear();
        match reader.read_until(b'\n', &mut buf) {
            Ok(0) => break,
            Ok(_) => {}
            Err(e) => {
                log::warn!("connection {peer}: {e}");
                break;
            }
        }
        if buf.last() == Some(&b'\n') {
            buf.pop();
        }
        let frame = std::str::from_utf8(&buf)
            .ok()
            .and_then(|line| FrameMessage::parse(line).ok());
        match frame {
            Some(f) => ingest_frame(&f, shared, sink),
            None => {
                shared.counters.malformed.fetch_add(1, Ordering::Relaxed);
            }
        }
    }
    log::debug!("connection from {peer} closed");
}

fn ingest_frame(frame: &FrameMessage, shared: &Shared, sink: &dyn AlertSink) {
    shared.counters.frames.fetch_add(1, Ordering::Relaxed);
    if frame.present_count() == 0 {
        shared.counters.empty_frames.fetch_add(1, Ordering::Relaxed);
        return;
    }
    for slot in 0..CHANNELS {
        let Some(value) = frame.channels[slot] else {
            continue;
        };
        let mut state = shared.channels[slot].lock().unwrap();
        let state = &mut *state;
        match state
            .buffer
            .push(frame.timestamp_ms, value, &shared.classifier)
        {
            Ok(Some(verdict)) => {
                shared.counters.windows.fetch_add(1, Ordering::Relaxed);
                let channel = state.buffer.channel();
                // emitted under the channel lock: per-channel order is total
                if let Some(alert) = state.tracker.observe(channel, &verdict) {
                    shared.counters.alerts.fetch_add(1, Ordering::Relaxed);
                    sink.emit(&alert);
                }
            }
            Ok(None) => {}
            Err(e) => log::error!("channel {}: {e}", slot + 1),
        }
    }
}
