//! Trajectory cache: binary `TRVK1` files with a JSON-lines mirror.
//!
//! Binary layout, all little-endian: magic `TRVK1`, `u32` version, `u64`
//! record count, then per record a `u32` payload length followed by the
//! payload:
//!
//! ```text
//! u32 dim | f64[dim] entry | f64[dim] exit | f64 flight
//! u32 n | u32[n] pattern
//! u32 e | e × (f64 time | f64[dim] point | u32 multiplicity | i8 sign)
//! u8 dimension_cap_exceeded
//! u32 s | s × (f64 time | f64[dim] state)
//! ```

use std::io::{self, BufRead, Read, Write};

use thiserror::Error;

use crate::omega::Pattern;

use super::trajectory::{BoundaryEvent, TrajectoryRecord};

pub const MAGIC: &[u8; 5] = b"TRVK1";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a trajectory cache (bad magic)")]
    BadMagic,
    #[error("unsupported cache version {0}")]
    Version(u32),
    #[error("corrupt record {index}: {reason}")]
    Corrupt { index: u64, reason: String },
    #[error("json line {line}: {reason}")]
    Json { line: usize, reason: String },
}

struct Enc(Vec<u8>);

impl Enc {
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64s(&mut self, v: &[f64]) {
        v.iter().for_each(|x| self.f64(*x));
    }
}

struct Dec<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Dec<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| "payload truncated".to_string())?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8, String> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, String> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn count(&mut self, unit: usize) -> Result<usize, String> {
        let n = self.u32()? as usize;
        if n.saturating_mul(unit) > self.buf.len() - self.pos {
            return Err(format!("count {n} exceeds payload"));
        }
        Ok(n)
    }
    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, String> {
        (0..n).map(|_| self.f64()).collect()
    }
}

fn encode(r: &TrajectoryRecord) -> Vec<u8> {
    let dim = r.entry.len();
    let mut e = Enc(Vec::new());
    e.u32(dim as u32);
    e.f64s(&r.entry);
    e.f64s(&r.exit);
    e.f64(r.flight_time);
    e.u32(r.pattern.len() as u32);
    r.pattern.entries().iter().for_each(|&j| e.u32(j));
    e.u32(r.events.len() as u32);
    for ev in &r.events {
        e.f64(ev.time);
        e.f64s(&ev.point);
        e.u32(ev.multiplicity);
        e.0.push(ev.sign as u8);
    }
    e.0.push(r.dimension_cap_exceeded as u8);
    e.u32(r.samples.len() as u32);
    for (t, s) in &r.samples {
        e.f64(*t);
        e.f64s(s);
    }
    e.0
}

fn decode(buf: &[u8]) -> Result<TrajectoryRecord, String> {
    let mut d = Dec { buf, pos: 0 };
    let dim = d.count(16)?;
    let entry = d.f64s(dim)?;
    let exit = d.f64s(dim)?;
    let flight_time = d.f64()?;
    let n = d.count(4)?;
    let entries = (0..n).map(|_| d.u32()).collect::<Result<Vec<_>, _>>()?;
    let pattern = Pattern::new(entries).map_err(|e| e.to_string())?;
    let ne = d.count(8 * (dim + 1) + 5)?;
    let mut events = Vec::with_capacity(ne);
    for _ in 0..ne {
        events.push(BoundaryEvent {
            time: d.f64()?,
            point: d.f64s(dim)?,
            multiplicity: d.u32()?,
            sign: d.u8()? as i8,
        });
    }
    let cap = match d.u8()? {
        0 => false,
        1 => true,
        b => return Err(format!("bad flag byte {b}")),
    };
    let ns = d.count(8 * (dim + 1))?;
    let mut samples = Vec::with_capacity(ns);
    for _ in 0..ns {
        samples.push((d.f64()?, d.f64s(dim)?));
    }
    if d.pos != buf.len() {
        return Err("trailing bytes in record".into());
    }
    if events.iter().map(|e| e.multiplicity).collect::<Vec<_>>() != pattern.entries() {
        return Err("events disagree with pattern".into());
    }
    Ok(TrajectoryRecord {
        entry,
        exit,
        flight_time,
        norm: pattern.norm(),
        reduced_norm: pattern.reduced_norm(),
        pattern,
        events,
        samples,
        dimension_cap_exceeded: cap,
    })
}

pub fn write_cache(mut w: impl Write, records: &[TrajectoryRecord]) -> Result<(), CacheError> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(records.len() as u64).to_le_bytes())?;
    for r in records {
        let payload = encode(r);
        w.write_all(&(payload.len() as u32).to_le_bytes())?;
        w.write_all(&payload)?;
    }
    Ok(())
}

pub fn read_cache(mut r: impl Read) -> Result<Vec<TrajectoryRecord>, CacheError> {
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic).map_err(|_| CacheError::BadMagic)?;
    if &magic != MAGIC {
        return Err(CacheError::BadMagic);
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != VERSION {
        return Err(CacheError::Version(version));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let count = u64::from_le_bytes(b8);
    let mut out = Vec::new();
    for index in 0..count {
        let corrupt = |reason: String| CacheError::Corrupt { index, reason };
        r.read_exact(&mut b4)
            .map_err(|_| corrupt("missing record header".into()))?;
        let len = u32::from_le_bytes(b4) as usize;
        let mut payload = Vec::new();
        (&mut r)
            .take(len as u64)
            .read_to_end(&mut payload)?;
        if payload.len() != len {
            return Err(corrupt("record truncated".into()));
        }
        out.push(decode(&payload).map_err(corrupt)?);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(CacheError::Corrupt {
            index: count,
            reason: "data after last record".into(),
        });
    }
    Ok(out)
}

pub fn write_jsonl(mut w: impl Write, records: &[TrajectoryRecord]) -> Result<(), CacheError> {
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| CacheError::Json {
            line: 0,
            reason: e.to_string(),
        })?;
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_jsonl(r: impl BufRead) -> Result<Vec<TrajectoryRecord>, CacheError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| CacheError::Json {
            line: i + 1,
            reason: e.to_string(),
        })?);
    }
    Ok(out)
}
