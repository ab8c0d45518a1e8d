//! Paced TCP frame server.

use std::io::Write;
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use rand::Rng;
use taxel_core::{seed, GestureClass, GestureRecording, Section, SensorLayout, TAXEL_COUNT};
use taxel_sensorsim::{Style, Synthesizer};

use crate::error::{Result, StreamError};
use crate::protocol::split_frame;

/// Readings for one frame, all sections.
pub type Readings = Vec<u16>;

#[derive(Clone)]
pub enum FrameSource {
    /// A fixed frame sequence sent once (or looped) per connection.
    Replay(Arc<Vec<Readings>>),
    /// Endless random gestures separated by idle gaps.
    Synth { synth: Arc<Synthesizer>, seed: u64, idle_gap_s: f64 },
}

fn idle(n: usize) -> impl Iterator<Item = Readings> {
    std::iter::repeat_n(vec![0u16; TAXEL_COUNT], n)
}

impl FrameSource {
    /// Concatenates recordings with `idle_gap_s` of zero frames before each
    /// one and after the last; `rate_hz` is the recordings' frame rate.
    pub fn replay(recordings: &[GestureRecording], idle_gap_s: f64, rate_hz: f64) -> Result<Self> {
        if !(idle_gap_s >= 0.0 && rate_hz > 0.0) {
            return Err(StreamError::Config("idle gap must be non-negative and rate positive".into()));
        }
        let gap = (idle_gap_s * rate_hz).ceil() as usize;
        let mut frames = Vec::new();
        for rec in recordings {
            frames.extend(idle(gap));
            frames.extend(rec.frames().iter().map(|f| f.readings().to_vec()));
        }
        frames.extend(idle(gap));
        Ok(FrameSource::Replay(Arc::new(frames)))
    }

    fn frames(&self, connection: u64, repeat: bool) -> Box<dyn Iterator<Item = Readings> + Send> {
        match self {
            FrameSource::Replay(frames) => {
                let frames = Arc::clone(frames);
                let passes = if repeat { usize::MAX } else { 1 };
                Box::new((0..passes).flat_map(move |_| {
                    let frames = Arc::clone(&frames);
                    (0..frames.len()).map(move |i| frames[i].clone())
                }))
            }
            FrameSource::Synth { synth, seed, idle_gap_s } => {
                let synth = Arc::clone(synth);
                let base = seed::derive(*seed, &[connection]);
                let gap = (idle_gap_s * synth.config().sample_rate_hz).ceil() as usize;
                Box::new((0u64..).flat_map(move |i| {
                    let s = seed::derive(base, &[i]);
                    let mut rng = seed::rng(s);
                    let class = GestureClass::ALL[rng.random_range(0..GestureClass::COUNT)];
                    let section = if rng.random_bool(0.5) { Section::Upper } else { Section::Lower };
                    let frames: Vec<Readings> = match synth.gesture(class, section, Style::NEUTRAL, "live", i as u32, s) {
                        Ok((rec, _)) => rec.frames().iter().map(|f| f.readings().to_vec()).collect(),
                        Err(e) => {
                            log::error!("synthesis failed: {e}");
                            Vec::new()
                        }
                    };
                    idle(gap).chain(frames)
                }))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServeOptions {
    pub rate_hz: f64,
    /// Restart a replay when it ends instead of closing the connection.
    pub repeat: bool,
    /// Stop accepting after this many connections (all are served to completion).
    pub max_connections: Option<usize>,
}

impl Default for ServeOptions {
    fn default() -> Self {
        Self { rate_hz: 50.0, repeat: false, max_connections: None }
    }
}

pub struct Server {
    listener: TcpListener,
    layout: SensorLayout,
    stop: Arc<AtomicBool>,
}

impl Server {
    pub fn bind<A: ToSocketAddrs + std::fmt::Display>(addr: A, layout: SensorLayout) -> Result<Self> {
        let listener = TcpListener::bind(&addr).map_err(|source| StreamError::Bind { addr: addr.to_string(), source })?;
        Ok(Self { listener, layout, stop: Arc::new(AtomicBool::new(false)) })
    }

    pub fn local_addr(&self) -> Result<SocketAddr> {
        Ok(self.listener.local_addr()?)
    }

    /// Setting the flag makes `run` return and connections close.
    pub fn stop_handle(&self) -> Arc<AtomicBool> {
        Arc::clone(&self.stop)
    }

    /// Accepts clients until stopped, one sender thread per connection.
    /// Returns the number of connections served.
    pub fn run(self, source: FrameSource, options: &ServeOptions) -> Result<usize> {
        if !(options.rate_hz > 0.0 && options.rate_hz.is_finite()) {
            return Err(StreamError::Config(format!("rate must be positive, got {}", options.rate_hz)));
        }
        self.listener.set_nonblocking(true)?;
        let served = Arc::new(AtomicUsize::new(0));
        let mut workers = Vec::new();
        let mut accepted = 0usize;
        while !self.stop.load(Ordering::Relaxed) && options.max_connections.is_none_or(|m| accepted < m) {
            match self.listener.accept() {
                Ok((stream, peer)) => {
                    log::info!("client {peer} connected");
                    let frames = source.frames(accepted as u64, options.repeat);
                    let (layout, stop, served, rate) =
                        (self.layout.clone(), Arc::clone(&self.stop), Arc::clone(&served), options.rate_hz);
                    accepted += 1;
                    workers.push(thread::spawn(move || {
                        match send_paced(stream, frames, &layout, rate, &stop) {
                            Ok(n) => log::info!("client {peer}: sent {n} frames"),
                            Err(e) => log::info!("client {peer}: {e}"),
                        }
                        served.fetch_add(1, Ordering::Relaxed);
                    }));
                }
                Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => thread::sleep(Duration::from_millis(5)),
                Err(e) => return Err(e.into()),
            }
        }
        for w in workers {
            let _ = w.join();
        }
        Ok(served.load(Ordering::Relaxed))
    }
}

/// Writes frame `k` at `start + k / rate`, so timing errors never accumulate.
fn send_paced(
    mut stream: TcpStream,
    frames: Box<dyn Iterator<Item = Readings> + Send>,
    layout: &SensorLayout,
    rate_hz: f64,
    stop: &AtomicBool,
) -> Result<usize> {
    stream.set_nonblocking(false)?;
    stream.set_nodelay(true)?;
    let start = Instant::now();
    let mut buf = Vec::new();
    let mut sent = 0;
    for (k, readings) in frames.enumerate() {
        if stop.load(Ordering::Relaxed) {
            break;
        }
        let due = start + Duration::from_secs_f64(k as f64 / rate_hz);
        let now = Instant::now();
        if due > now {
            thread::sleep(due - now);
        }
        let frame = taxel_core::TaxelFrame::new(k as f64 / rate_hz, readings)?;
        let ts = (k as f64 * 1e6 / rate_hz).round() as u64;
        buf.clear();
        for msg in split_frame(&frame, layout, ts) {
            msg.encode_into(&mut buf);
        }
        stream.write_all(&buf)?;
        sent += 1;
    }
    stream.flush()?;
    Ok(sent)
}
