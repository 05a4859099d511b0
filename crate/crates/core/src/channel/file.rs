//! Channel file layout (all integers and floats little-endian):
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 8    | magic `MUMIMOCH`                        |
//! | 8      | 4    | format version (u32, currently 1)       |
//! | 12     | 4    | K, user count (u32)                     |
//! | 16     | 4    | N_r (u32)                               |
//! | 20     | 4    | N_t (u32)                               |
//! | 24     | 8    | seed (u64)                              |
//! | 32     | 4    | model tag length L (u32)                |
//! | 36     | L    | model tag, UTF-8                        |
//! | 36+L   | ...  | K·N_r·N_t (re, im) f64 pairs            |
//!
//! Matrices are row-major, users in order. Trailing bytes are rejected.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use super::model::ChannelRealization;
use crate::error::{Error, Result};
use crate::numkernel::ComplexMatrix;

pub const MAGIC: &[u8; 8] = b"MUMIMOCH";
pub const VERSION: u32 = 1;

pub fn encode(ch: &ChannelRealization) -> Vec<u8> {
    let tag = ch.model_tag.as_bytes();
    let payload = ch.num_users() * ch.n_r() * ch.n_t() * 16;
    let mut out = Vec::with_capacity(36 + tag.len() + payload);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for v in [ch.num_users(), ch.n_r(), ch.n_t()] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    out.extend_from_slice(&ch.seed.to_le_bytes());
    out.extend_from_slice(&(tag.len() as u32).to_le_bytes());
    out.extend_from_slice(tag);
    for h in ch.users() {
        for z in h.as_slice() {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Parse {
                offset: self.pos as u64,
                message: format!(
                    "truncated {what}: need {n} bytes, {} remain",
                    self.bytes.len() - self.pos
                ),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
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

pub fn decode(bytes: &[u8]) -> Result<ChannelRealization> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8, "magic")? != MAGIC {
        return Err(Error::Parse {
            offset: 0,
            message: "bad magic bytes".into(),
        });
    }
    let version_at = r.pos;
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::Parse {
            offset: version_at as u64,
            message: format!("unsupported version {version}"),
        });
    }
    let k = r.u32("user count")? as usize;
    let n_r = r.u32("N_r")? as usize;
    let n_t = r.u32("N_t")? as usize;
    if k == 0 || n_r == 0 || n_t == 0 {
        return Err(Error::Schema(format!(
            "dimensions must be positive, got K={k} N_r={n_r} N_t={n_t}"
        )));
    }
    let seed = r.u64("seed")?;
    let tag_len = r.u32("tag length")? as usize;
    let tag_at = r.pos;
    let tag = std::str::from_utf8(r.take(tag_len, "model tag")?)
        .map_err(|e| Error::Parse {
            offset: (tag_at + e.valid_up_to()) as u64,
            message: "model tag is not UTF-8".into(),
        })?
        .to_owned();

    let mut users = Vec::with_capacity(k);
    for _ in 0..k {
        let mut data = Vec::with_capacity(n_r * n_t);
        for _ in 0..n_r * n_t {
            let at = r.pos;
            let re = r.f64("matrix entry")?;
            let im = r.f64("matrix entry")?;
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::Parse {
                    offset: at as u64,
                    message: "non-finite matrix entry".into(),
                });
            }
            data.push(Complex64::new(re, im));
        }
        users.push(ComplexMatrix::new(n_r, n_t, data)?);
    }
    if r.pos != bytes.len() {
        return Err(Error::Parse {
            offset: r.pos as u64,
            message: format!("{} trailing bytes", bytes.len() - r.pos),
        });
    }
    ChannelRealization::new(users, seed, tag)
}

pub fn save(ch: &ChannelRealization, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode(ch))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<ChannelRealization> {
    decode(&fs::read(path)?)
}
