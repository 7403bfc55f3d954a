//! Record file formats.
//!
//! LEVT binary layout, all integers and floats little-endian:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "LEVT"
//! 4       4     format version (u32) = 1
//! 8       8     sample rate, Hz (f64)
//! 16      8     sample count N (u64)
//! 24      4     label length L in bytes (u32)
//! 28      L     label, UTF-8
//! 28+L    8N    samples (f64)
//! ```
//!
//! A file may hold several such records back to back; quadrature records
//! are stored as two channels labelled `<axis>/X` and `<axis>/Y`.
//! CSV output uses the shortest decimal that round-trips each `f64`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::series::{QuadratureSeries, TimeSeries};

pub const LEVT_MAGIC: &[u8; 4] = b"LEVT";
pub const LEVT_VERSION: u32 = 1;

/// One channel of a LEVT file.
#[derive(Debug, Clone, PartialEq)]
pub struct LevtChannel {
    pub sample_rate: f64,
    pub label: String,
    pub samples: Vec<f64>,
}

pub fn encode_levt_channel(out: &mut Vec<u8>, sample_rate: f64, label: &str, samples: &[f64]) {
    out.extend_from_slice(LEVT_MAGIC);
    out.extend_from_slice(&LEVT_VERSION.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(samples.len() as u64).to_le_bytes());
    out.extend_from_slice(&(label.len() as u32).to_le_bytes());
    out.extend_from_slice(label.as_bytes());
    out.reserve(samples.len() * 8);
    for s in samples {
        out.extend_from_slice(&s.to_le_bytes());
    }
}

pub fn encode_levt(ts: &TimeSeries) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + ts.axis.len() + 8 * ts.len());
    encode_levt_channel(&mut out, ts.sample_rate, &ts.axis, &ts.values);
    out
}

pub fn encode_levt_quadrature(q: &QuadratureSeries) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + 16 * q.len());
    encode_levt_channel(&mut out, q.sample_rate, &format!("{}/X", q.axis), &q.x);
    encode_levt_channel(&mut out, q.sample_rate, &format!("{}/Y", q.axis), &q.y);
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Format {
                offset: self.pos as u64,
                reason: format!(
                    "unexpected end of data reading {what} ({n} bytes needed, {} left)",
                    self.buf.len() - self.pos
                ),
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

/// Decodes every channel in a LEVT buffer.
pub fn decode_levt(buf: &[u8]) -> Result<Vec<LevtChannel>> {
    let mut cur = Cursor { buf, pos: 0 };
    let mut channels = Vec::new();
    while cur.pos < buf.len() {
        let start = cur.pos;
        let magic = cur.take(4, "magic")?;
        if magic != LEVT_MAGIC {
            return Err(Error::Format {
                offset: start as u64,
                reason: format!("bad magic {magic:02x?}, expected \"LEVT\""),
            });
        }
        let version_at = cur.pos;
        let version = cur.u32("version")?;
        if version != LEVT_VERSION {
            return Err(Error::Format {
                offset: version_at as u64,
                reason: format!("unsupported format version {version}"),
            });
        }
        let rate_at = cur.pos;
        let sample_rate = cur.f64("sample rate")?;
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::Format {
                offset: rate_at as u64,
                reason: format!("invalid sample rate {sample_rate}"),
            });
        }
        let count = cur.u64("sample count")?;
        let label_len = cur.u32("label length")? as usize;
        let label_at = cur.pos;
        let label = std::str::from_utf8(cur.take(label_len, "label")?)
            .map_err(|e| Error::Format {
                offset: label_at as u64,
                reason: format!("label is not UTF-8: {e}"),
            })?
            .to_string();
        let n = usize::try_from(count).map_err(|_| Error::Format {
            offset: (label_at - 12) as u64,
            reason: "sample count too large".into(),
        })?;
        let bytes = n.checked_mul(8).ok_or_else(|| Error::Format {
            offset: (label_at - 12) as u64,
            reason: "sample count too large".into(),
        })?;
        let raw = cur.take(bytes, "samples")?;
        let samples = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        channels.push(LevtChannel {
            sample_rate,
            label,
            samples,
        });
    }
    if channels.is_empty() {
        return Err(Error::Format {
            offset: 0,
            reason: "empty file".into(),
        });
    }
    Ok(channels)
}

pub fn write_levt(path: &Path, ts: &TimeSeries) -> Result<()> {
    fs::write(path, encode_levt(ts))?;
    Ok(())
}

pub fn write_levt_quadrature(path: &Path, q: &QuadratureSeries) -> Result<()> {
    fs::write(path, encode_levt_quadrature(q))?;
    Ok(())
}

/// Contents of a LEVT file: a displacement record or a quadrature pair.
#[derive(Debug, Clone, PartialEq)]
pub enum LevtRecord {
    Displacement(TimeSeries),
    Quadrature(QuadratureSeries),
}

/// Reads a LEVT file. `f_lo` is attached to quadrature records, whose
/// container does not store the reference frequency.
pub fn read_levt(path: &Path, f_lo: f64) -> Result<LevtRecord> {
    let buf = fs::read(path)?;
    let mut channels = decode_levt(&buf)?;
    match channels.len() {
        1 => {
            let c = channels.pop().unwrap();
            let ts = TimeSeries::new(c.sample_rate, 0.0, c.samples, c.label).map_err(|e| Error::Format {
                offset: 0,
                reason: e.to_string(),
            })?;
            Ok(LevtRecord::Displacement(ts))
        }
        2 => {
            let y = channels.pop().unwrap();
            let x = channels.pop().unwrap();
            let axis = x.label.strip_suffix("/X").ok_or_else(|| Error::Format {
                offset: 0,
                reason: format!("first channel label `{}` is not `<axis>/X`", x.label),
            })?;
            if y.label != format!("{axis}/Y") || y.sample_rate != x.sample_rate {
                return Err(Error::Format {
                    offset: 0,
                    reason: "second channel does not match the first as a Y quadrature".into(),
                });
            }
            let q = QuadratureSeries::new(x.sample_rate, 0.0, x.samples, y.samples, f_lo, axis).map_err(|e| Error::Format {
                offset: 0,
                reason: e.to_string(),
            })?;
            Ok(LevtRecord::Quadrature(q))
        }
        n => Err(Error::Format {
            offset: 0,
            reason: format!("expected 1 or 2 channels, found {n}"),
        }),
    }
}

pub fn write_timeseries_csv(path: &Path, ts: &TimeSeries) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "t,value")?;
    for (i, v) in ts.values.iter().enumerate() {
        writeln!(w, "{},{}", ts.time(i), v)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_quadrature_csv(path: &Path, q: &QuadratureSeries) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "t,X,Y,R,R2")?;
    for (i, (x, y)) in q.x.iter().zip(&q.y).enumerate() {
        let r2 = x * x + y * y;
        writeln!(w, "{},{},{},{},{}", q.time(i), x, y, r2.sqrt(), r2)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `t,value` CSV; the sample rate is inferred from the first two
/// time stamps.
pub fn read_timeseries_csv(path: &Path, axis: &str) -> Result<TimeSeries> {
    let text = fs::read_to_string(path)?;
    let mut t = Vec::new();
    let mut v = Vec::new();
    let mut offset = 0u64;
    for (lineno, line) in text.lines().enumerate() {
        let here = offset;
        offset += line.len() as u64 + 1;
        if lineno == 0 || line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',');
        let parse = |s: Option<&str>| -> Result<f64> {
            s.and_then(|s| s.trim().parse().ok()).ok_or_else(|| Error::Format {
                offset: here,
                reason: format!("line {}: expected `t,value`", lineno + 1),
            })
        };
        t.push(parse(parts.next())?);
        v.push(parse(parts.next())?);
    }
    if t.len() < 2 {
        return Err(Error::Format {
            offset: 0,
            reason: "need at least two samples".into(),
        });
    }
    let rate = 1.0 / (t[1] - t[0]);
    TimeSeries::new(rate, t[0], v, axis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn levt_round_trip_is_bit_exact(
            rate in 1e-3f64..1e6,
            label in "[a-z/]{0,12}",
            samples in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 0..200),
        ) {
            let mut buf = Vec::new();
            encode_levt_channel(&mut buf, rate, &label, &samples);
            let ch = decode_levt(&buf).unwrap();
            prop_assert_eq!(ch.len(), 1);
            prop_assert_eq!(ch[0].sample_rate.to_bits(), rate.to_bits());
            prop_assert_eq!(&ch[0].label, &label);
            let bits: Vec<u64> = ch[0].samples.iter().map(|v| v.to_bits()).collect();
            let want: Vec<u64> = samples.iter().map(|v| v.to_bits()).collect();
            prop_assert_eq!(bits, want);
        }
    }

    #[test]
    fn header_layout() {
        let ts = TimeSeries::new(500.0, 0.0, vec![1.5, -2.0], "x").unwrap();
        let b = encode_levt(&ts);
        assert_eq!(&b[0..4], b"LEVT");
        assert_eq!(u32::from_le_bytes(b[4..8].try_into().unwrap()), 1);
        assert_eq!(f64::from_le_bytes(b[8..16].try_into().unwrap()), 500.0);
        assert_eq!(u64::from_le_bytes(b[16..24].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(b[24..28].try_into().unwrap()), 1);
        assert_eq!(b[28], b'x');
        assert_eq!(f64::from_le_bytes(b[29..37].try_into().unwrap()), 1.5);
        assert_eq!(b.len(), 29 + 16);
    }

    #[test]
    fn corrupt_magic_reports_offset() {
        let ts = TimeSeries::new(500.0, 0.0, vec![1.0], "x").unwrap();
        let mut b = encode_levt(&ts);
        let good_len = b.len();
        b.extend(encode_levt(&ts));
        b[good_len + 1] = b'X';
        match decode_levt(&b) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, good_len as u64),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_samples() {
        let ts = TimeSeries::new(500.0, 0.0, vec![1.0, 2.0], "x").unwrap();
        let b = encode_levt(&ts);
        let err = decode_levt(&b[..b.len() - 3]).unwrap_err();
        assert!(matches!(err, Error::Format { offset: 29, .. }), "{err}");
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        let vals = vec![1.0e-9, -3.25e-10, 0.1 + 0.2, f64::MIN_POSITIVE];
        let ts = TimeSeries::new(4.0, 0.0, vals.clone(), "x").unwrap();
        write_timeseries_csv(&p, &ts).unwrap();
        let back = read_timeseries_csv(&p, "x").unwrap();
        assert_eq!(back.values, vals);
        assert_eq!(back.sample_rate, 4.0);
    }

    #[test]
    fn quadrature_container_has_two_channels() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("q.levt");
        let q = QuadratureSeries::new(10.0, 0.0, vec![1.0, 2.0], vec![3.0, 4.0], 327.0, "x").unwrap();
        write_levt_quadrature(&p, &q).unwrap();
        match read_levt(&p, 327.0).unwrap() {
            LevtRecord::Quadrature(back) => {
                assert_eq!(back.x, q.x);
                assert_eq!(back.y, q.y);
                assert_eq!(back.axis, "x");
            }
            other => panic!("{other:?}"),
        }
    }
}
