//! `TXL1` frame messages: a 16-byte header followed by little-endian u16
//! readings for one skin section.

use std::collections::BTreeMap;

use taxel_core::{Section, SensorLayout, TaxelFrame, ADC_MAX, TAXEL_COUNT};

use crate::error::{Result, StreamError};

pub const MAGIC: [u8; 4] = *b"TXL1";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameMessage {
    pub section_id: u8,
    pub rows: u8,
    pub cols: u8,
    pub timestamp_us: u64,
    pub readings: Vec<u16>,
}

impl FrameMessage {
    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + 2 * self.readings.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.rows as usize * self.cols as usize;
        if self.readings.len() != n {
            return Err(StreamError::Protocol(format!(
                "{}x{} section carries {} readings",
                self.rows,
                self.cols,
                self.readings.len()
            )));
        }
        if let Some(r) = self.readings.iter().find(|&&r| r > ADC_MAX) {
            return Err(StreamError::Protocol(format!("reading {r} exceeds {ADC_MAX}")));
        }
        Ok(())
    }

    pub fn encode_into(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&[VERSION, self.section_id, self.rows, self.cols]);
        out.extend_from_slice(&self.timestamp_us.to_le_bytes());
        for r in &self.readings {
            out.extend_from_slice(&r.to_le_bytes());
        }
    }
}

pub fn encode_frame(msg: &FrameMessage) -> Result<Vec<u8>> {
    msg.validate()?;
    let mut out = Vec::with_capacity(msg.encoded_len());
    msg.encode_into(&mut out);
    Ok(out)
}

/// Parses the header at the start of `bytes`, returning the full message length.
fn parse_header(bytes: &[u8]) -> Result<usize> {
    if bytes.len() < HEADER_LEN {
        return Err(StreamError::Framing { needed: HEADER_LEN, available: bytes.len() });
    }
    if bytes[..4] != MAGIC {
        return Err(StreamError::Protocol(format!("bad magic {:02x?}", &bytes[..4])));
    }
    if bytes[4] != VERSION {
        return Err(StreamError::Protocol(format!("unsupported version {}", bytes[4])));
    }
    Ok(HEADER_LEN + 2 * bytes[6] as usize * bytes[7] as usize)
}

fn parse_body(bytes: &[u8]) -> Result<FrameMessage> {
    let mut ts = [0u8; 8];
    ts.copy_from_slice(&bytes[8..16]);
    let readings = bytes[HEADER_LEN..].chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]])).collect();
    let msg = FrameMessage {
        section_id: bytes[5],
        rows: bytes[6],
        cols: bytes[7],
        timestamp_us: u64::from_le_bytes(ts),
        readings,
    };
    msg.validate()?;
    Ok(msg)
}

/// Decodes exactly one message occupying all of `bytes`.
pub fn decode_frame(bytes: &[u8]) -> Result<FrameMessage> {
    let len = parse_header(bytes)?;
    if bytes.len() < len {
        return Err(StreamError::Framing { needed: len, available: bytes.len() });
    }
    if bytes.len() > len {
        return Err(StreamError::Protocol(format!("{} trailing bytes after message", bytes.len() - len)));
    }
    parse_body(bytes)
}

/// Incremental decoder over a byte stream. After a protocol error it skips
/// ahead to the next occurrence of the magic.
#[derive(Debug, Default)]
pub struct FrameDecoder {
    buf: Vec<u8>,
    skipped: usize,
}

impl FrameDecoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    /// Bytes discarded while resynchronizing.
    pub fn skipped(&self) -> usize {
        self.skipped
    }

    pub fn buffered(&self) -> usize {
        self.buf.len()
    }

    fn discard(&mut self, n: usize) {
        self.buf.drain(..n);
        self.skipped += n;
    }

    /// Drops the leading byte and everything up to the next possible magic.
    fn resync(&mut self) {
        let cut = (1..self.buf.len())
            .find(|&i| {
                let tail = &self.buf[i..];
                let n = tail.len().min(4);
                tail[..n] == MAGIC[..n]
            })
            .unwrap_or(self.buf.len());
        self.discard(cut);
    }

    /// Next complete message, an error for skipped garbage, or `None` when
    /// more bytes are needed.
    pub fn next_message(&mut self) -> Option<Result<FrameMessage>> {
        let head = self.buf.len().min(4);
        if self.buf[..head] != MAGIC[..head] {
            self.resync();
            return Some(Err(StreamError::Protocol("bad magic, resynchronizing".into())));
        }
        if self.buf.len() < HEADER_LEN {
            return None;
        }
        let len = match parse_header(&self.buf) {
            Ok(len) => len,
            Err(e) => {
                self.resync();
                return Some(Err(e));
            }
        };
        if self.buf.len() < len {
            return None;
        }
        let parsed = parse_body(&self.buf[..len]);
        match parsed {
            Ok(_) => {
                self.buf.drain(..len);
            }
            Err(_) => self.resync(),
        }
        Some(parsed)
    }

    /// Reports an incomplete trailing message once the stream has ended.
    pub fn finish(&self) -> Result<()> {
        if self.buf.is_empty() {
            return Ok(());
        }
        let needed = parse_header(&self.buf).unwrap_or(HEADER_LEN);
        Err(StreamError::Framing { needed, available: self.buf.len() })
    }
}

pub fn timestamp_us(seconds: f64) -> u64 {
    (seconds * 1e6).round().max(0.0) as u64
}

/// One message per section of the layout.
pub fn split_frame(frame: &TaxelFrame, layout: &SensorLayout, timestamp_us: u64) -> Vec<FrameMessage> {
    layout
        .sections()
        .iter()
        .map(|g| {
            let range = layout.range(g.section).expect("section in layout");
            FrameMessage {
                section_id: g.section.id(),
                rows: g.rows as u8,
                cols: g.cols as u8,
                timestamp_us,
                readings: frame.readings()[range].to_vec(),
            }
        })
        .collect()
}

/// Joins per-section messages sharing a timestamp into full frames.
#[derive(Debug)]
pub struct FrameAssembler {
    layout: SensorLayout,
    pending: BTreeMap<u64, Vec<Option<Vec<u16>>>>,
    incomplete: usize,
}

impl FrameAssembler {
    pub fn new(layout: SensorLayout) -> Self {
        Self { layout, pending: BTreeMap::new(), incomplete: 0 }
    }

    /// Frames abandoned because a later timestamp completed first.
    pub fn incomplete(&self) -> usize {
        self.incomplete
    }

    pub fn reset(&mut self) {
        self.incomplete += self.pending.len();
        self.pending.clear();
    }

    pub fn push(&mut self, msg: FrameMessage) -> Result<Option<TaxelFrame>> {
        let section = Section::from_id(msg.section_id)
            .filter(|&s| self.layout.contains(s))
            .ok_or_else(|| StreamError::Protocol(format!("unknown section id {}", msg.section_id)))?;
        let grid = self.layout.grid(section).expect("checked above");
        if (grid.rows, grid.cols) != (msg.rows as usize, msg.cols as usize) {
            return Err(StreamError::Protocol(format!(
                "{section} section is {}x{}, message says {}x{}",
                grid.rows, grid.cols, msg.rows, msg.cols
            )));
        }
        let n_sections = self.layout.sections().len();
        let slot = self.layout.sections().iter().position(|g| g.section == section).expect("present");
        let parts = self.pending.entry(msg.timestamp_us).or_insert_with(|| vec![None; n_sections]);
        parts[slot] = Some(msg.readings);
        if parts.iter().any(Option::is_none) {
            return Ok(None);
        }
        let parts = self.pending.remove(&msg.timestamp_us).expect("present");
        let stale: Vec<u64> = self.pending.range(..msg.timestamp_us).map(|(&k, _)| k).collect();
        for k in stale {
            self.pending.remove(&k);
            self.incomplete += 1;
        }
        let mut readings = Vec::with_capacity(TAXEL_COUNT);
        for p in parts {
            readings.extend(p.expect("complete"));
        }
        Ok(Some(TaxelFrame::new(msg.timestamp_us as f64 / 1e6, readings)?))
    }
}
