//! Flat binary tensor container.
//!
//! Layout: the 5-byte magic `FSAC1`, then for each tensor until end of file:
//! name length (`u32` LE), UTF-8 name, rank (`u32` LE), one `u32` LE per
//! dimension, and the row-major `f64` LE payload.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::network::NetworkParams;
use crate::Scalar;

pub const MAGIC: &[u8; 5] = b"FSAC1";

#[derive(Debug, Clone, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl NamedTensor {
    pub fn new(name: impl Into<String>, shape: Vec<usize>, data: Vec<f64>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        Self {
            name: name.into(),
            shape,
            data,
        }
    }

    pub fn scalar(name: impl Into<String>, value: f64) -> Self {
        Self::new(name, vec![], vec![value])
    }
}

pub fn encode(tensors: &[NamedTensor]) -> Vec<u8> {
    let mut out = Vec::with_capacity(
        MAGIC.len() + tensors.iter().map(|t| 8 + t.name.len() + 4 * t.shape.len() + 8 * t.data.len()).sum::<usize>(),
    );
    out.extend_from_slice(MAGIC);
    for t in tensors {
        out.extend_from_slice(&(t.name.len() as u32).to_le_bytes());
        out.extend_from_slice(t.name.as_bytes());
        out.extend_from_slice(&(t.shape.len() as u32).to_le_bytes());
        for &d in &t.shape {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &v in &t.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Checkpoint(format!("truncated while reading {what} at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Vec<NamedTensor>> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::NotACheckpoint);
    }
    let mut cur = Cursor {
        bytes,
        pos: MAGIC.len(),
    };
    let mut out = Vec::new();
    while cur.pos < bytes.len() {
        let name_len = cur.u32("name length")? as usize;
        let name = std::str::from_utf8(cur.take(name_len, "name")?)
            .map_err(|e| Error::Checkpoint(format!("tensor name is not UTF-8: {e}")))?
            .to_owned();
        let rank = cur.u32("rank")? as usize;
        let shape = (0..rank)
            .map(|_| cur.u32("dimension").map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        let count: usize = shape.iter().product();
        let payload = cur.take(
            count
                .checked_mul(8)
                .ok_or_else(|| Error::Checkpoint(format!("tensor {name} too large")))?,
            "payload",
        )?;
        let data = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        out.push(NamedTensor { name, shape, data });
    }
    Ok(out)
}

pub fn save(path: impl AsRef<Path>, tensors: &[NamedTensor]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode(tensors))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<Vec<NamedTensor>> {
    decode(&fs::read(path)?)
}

/// Every tensor of `net` (running statistics included), names prefixed.
pub fn network_tensors<T: Scalar>(prefix: &str, net: &NetworkParams<T>) -> Vec<NamedTensor> {
    net.tensors()
        .into_iter()
        .map(|t| NamedTensor {
            name: format!("{prefix}.{}", t.name),
            shape: t.shape,
            data: t.data.iter().map(|v| v.as_f64()).collect(),
        })
        .collect()
}

/// Overwrites `net` from the tensors named `<prefix>.*`. Any missing tensor or
/// shape difference is reported in one schema error listing expected and found
/// shapes.
pub fn load_network<T: Scalar>(
    prefix: &str,
    net: &mut NetworkParams<T>,
    tensors: &BTreeMap<String, NamedTensor>,
) -> Result<()> {
    let mut problems = Vec::new();
    for t in net.tensors() {
        let name = format!("{prefix}.{}", t.name);
        match tensors.get(&name) {
            None => problems.push(format!("  {name}: expected {:?}, found <missing>", t.shape)),
            Some(found) if found.shape != t.shape => {
                problems.push(format!("  {name}: expected {:?}, found {:?}", t.shape, found.shape))
            }
            Some(_) => {}
        }
    }
    if !problems.is_empty() {
        return Err(Error::Schema(problems.join("\n")));
    }
    for t in net.tensors_mut() {
        let src = &tensors[&format!("{prefix}.{}", t.name)];
        for (d, &s) in t.data.iter_mut().zip(&src.data) {
            *d = T::lit(s);
        }
    }
    Ok(())
}

pub fn by_name(tensors: Vec<NamedTensor>) -> BTreeMap<String, NamedTensor> {
    tensors.into_iter().map(|t| (t.name.clone(), t)).collect()
}
