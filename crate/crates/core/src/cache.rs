//! Content-addressed on-disk cache and the compact binary serialization of
//! coset tables and finite groups.
//!
//! Entry format: magic "FPGC", one version byte, the full canonical key
//! (length-prefixed) and the payload. The key is stored verbatim and
//! verified on read, so hash collisions can never alias entries. Writers
//! take a per-entry lock file and publish by atomic rename; readers need no
//! locks. Eviction happens only through `gc`.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::fpgroups::{CosetTable, FiniteGroup};

pub const MAGIC: &[u8; 4] = b"FPGC";
pub const VERSION: u8 = 1;

/// 128-bit FNV-1a, as two 64-bit lanes over the bytes and the reversed
/// bytes. Collisions are harmless (keys are verified), this only spreads
/// file names.
fn content_hash(key: &[u8]) -> String {
    fn fnv(bytes: impl Iterator<Item = u8>) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x1000_0000_01b3);
        }
        h
    }
    let a = fnv(key.iter().copied());
    let b = fnv(key.iter().rev().copied());
    format!("{a:016x}{b:016x}")
}

pub struct Cache {
    dir: PathBuf,
    pub hits: std::cell::Cell<u64>,
    pub misses: std::cell::Cell<u64>,
}

impl Cache {
    pub fn open(dir: &Path) -> Result<Cache> {
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::invalid(format!("cannot create cache dir: {e}")))?;
        Ok(Cache {
            dir: dir.to_path_buf(),
            hits: std::cell::Cell::new(0),
            misses: std::cell::Cell::new(0),
        })
    }

    fn path_for(&self, key: &[u8]) -> PathBuf {
        self.dir.join(format!("{}.fpgc", content_hash(key)))
    }

    pub fn get(&self, key: &[u8]) -> Option<Vec<u8>> {
        let path = self.path_for(key);
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(_) => {
                self.misses.set(self.misses.get() + 1);
                return None;
            }
        };
        let payload = decode_entry(&bytes, key);
        match payload {
            Some(p) => {
                self.hits.set(self.hits.get() + 1);
                Some(p)
            }
            None => {
                self.misses.set(self.misses.get() + 1);
                None
            }
        }
    }

    pub fn put(&self, key: &[u8], payload: &[u8]) -> Result<()> {
        let path = self.path_for(key);
        let lock = path.with_extension("lock");
        // single writer per entry: losing the race just skips the write,
        // the winner's bytes are identical by determinism
        let lock_file = std::fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&lock);
        let Ok(mut lf) = lock_file else {
            return Ok(());
        };
        let _ = lf.write_all(b"lock");
        let tmp = path.with_extension("tmp");
        let mut bytes = Vec::with_capacity(9 + key.len() + payload.len());
        bytes.extend_from_slice(MAGIC);
        bytes.push(VERSION);
        bytes.extend_from_slice(&(key.len() as u32).to_le_bytes());
        bytes.extend_from_slice(key);
        bytes.extend_from_slice(payload);
        let res = std::fs::write(&tmp, &bytes)
            .and_then(|_| std::fs::rename(&tmp, &path));
        let _ = std::fs::remove_file(&lock);
        res.map_err(|e| Error::invalid(format!("cache write failed: {e}")))
    }

    /// Remove every entry; returns the number of files deleted.
    pub fn gc(&self) -> Result<usize> {
        let mut n = 0;
        let rd = std::fs::read_dir(&self.dir)
            .map_err(|e| Error::invalid(format!("cannot read cache dir: {e}")))?;
        for entry in rd.flatten() {
            let p = entry.path();
            if p.extension().is_some_and(|e| e == "fpgc" || e == "lock" || e == "tmp") {
                if std::fs::remove_file(&p).is_ok() {
                    n += 1;
                }
            }
        }
        Ok(n)
    }
}

fn decode_entry(bytes: &[u8], key: &[u8]) -> Option<Vec<u8>> {
    if bytes.len() < 9 || &bytes[..4] != MAGIC || bytes[4] != VERSION {
        return None;
    }
    let klen = u32::from_le_bytes(bytes[5..9].try_into().ok()?) as usize;
    if bytes.len() < 9 + klen || &bytes[9..9 + klen] != key {
        return None;
    }
    Some(bytes[9 + klen..].to_vec())
}

fn push_u32s(out: &mut Vec<u8>, vals: impl Iterator<Item = u32>) {
    for v in vals {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn read_u32(bytes: &[u8], pos: &mut usize) -> Option<u32> {
    let v = u32::from_le_bytes(bytes.get(*pos..*pos + 4)?.try_into().ok()?);
    *pos += 4;
    Some(v)
}

fn read_u64(bytes: &[u8], pos: &mut usize) -> Option<u64> {
    let v = u64::from_le_bytes(bytes.get(*pos..*pos + 8)?.try_into().ok()?);
    *pos += 8;
    Some(v)
}

/// Coset table payload: index, column count, then the table row-major as
/// little-endian u32.
pub fn encode_coset_table(t: &CosetTable) -> Vec<u8> {
    let ngens = t.presentation().ngens();
    let mut out = Vec::new();
    out.push(1u8); // kind: coset table
    out.extend_from_slice(&(t.index() as u32).to_le_bytes());
    out.extend_from_slice(&(ngens as u32).to_le_bytes());
    for c in 0..t.index() as u32 {
        for g in 0..ngens {
            out.extend_from_slice(&t.act(c, (g + 1) as i32).to_le_bytes());
            out.extend_from_slice(&t.act(c, -((g + 1) as i32)).to_le_bytes());
        }
    }
    out
}

pub fn decode_coset_table(
    pres: &crate::fpgroups::Presentation,
    bytes: &[u8],
) -> Result<CosetTable> {
    let mut pos = 0usize;
    let bad = || Error::invalid("corrupt coset table payload");
    if bytes.first() != Some(&1u8) {
        return Err(bad());
    }
    pos += 1;
    let index = read_u32(bytes, &mut pos).ok_or_else(bad)? as usize;
    let ngens = read_u32(bytes, &mut pos).ok_or_else(bad)? as usize;
    if ngens != pres.ngens() {
        return Err(bad());
    }
    let mut rows = Vec::with_capacity(index);
    for _ in 0..index {
        let mut row = Vec::with_capacity(2 * ngens.max(1));
        for _ in 0..2 * ngens {
            row.push(read_u32(bytes, &mut pos).ok_or_else(bad)?);
        }
        if ngens == 0 {
            row = vec![0, 0];
        }
        rows.push(row);
    }
    CosetTable::from_action(pres, vec![], rows)
}

/// Finite group payload: either an abelian tuple group (orders) or a full
/// multiplication table, plus the distinguished generators.
pub fn encode_finite_group(g: &FiniteGroup) -> Option<Vec<u8>> {
    let mut out = Vec::new();
    if let Some(orders) = g.abelian_orders() {
        out.push(2u8); // kind: abelian tuples
        out.extend_from_slice(&(orders.len() as u32).to_le_bytes());
        for &d in orders {
            out.extend_from_slice(&d.to_le_bytes());
        }
    } else if g.order() <= 2048 {
        out.push(3u8); // kind: multiplication table
        out.extend_from_slice(&(g.order() as u32).to_le_bytes());
        push_u32s(
            &mut out,
            (0..g.order()).flat_map(|x| (0..g.order()).map(move |y| (x, y)))
                .map(|(x, y)| g.mul(x, y) as u32),
        );
    } else {
        return None; // structured large groups are cheaper to rebuild
    }
    out.extend_from_slice(&(g.generators().len() as u32).to_le_bytes());
    for &img in g.generators() {
        out.extend_from_slice(&img.to_le_bytes());
    }
    Some(out)
}

pub fn decode_finite_group(bytes: &[u8]) -> Result<FiniteGroup> {
    let bad = || Error::invalid("corrupt finite group payload");
    let mut pos = 0usize;
    let kind = *bytes.first().ok_or_else(bad)?;
    pos += 1;
    match kind {
        2 => {
            let k = read_u32(bytes, &mut pos).ok_or_else(bad)? as usize;
            let mut orders = Vec::with_capacity(k);
            for _ in 0..k {
                orders.push(read_u64(bytes, &mut pos).ok_or_else(bad)?);
            }
            let g = if orders.is_empty() {
                FiniteGroup::trivial()
            } else {
                FiniteGroup::abelian(&orders)
            };
            let ngens = read_u32(bytes, &mut pos).ok_or_else(bad)? as usize;
            let mut gens = Vec::with_capacity(ngens);
            for _ in 0..ngens {
                gens.push(read_u64(bytes, &mut pos).ok_or_else(bad)?);
            }
            Ok(g.with_generators(gens))
        }
        3 => {
            let order = read_u32(bytes, &mut pos).ok_or_else(bad)? as usize;
            let mut mul = Vec::with_capacity(order * order);
            for _ in 0..order * order {
                mul.push(read_u32(bytes, &mut pos).ok_or_else(bad)?);
            }
            let ngens = read_u32(bytes, &mut pos).ok_or_else(bad)? as usize;
            let mut gens = Vec::with_capacity(ngens);
            for _ in 0..ngens {
                gens.push(read_u64(bytes, &mut pos).ok_or_else(bad)?);
            }
            FiniteGroup::from_table(mul, gens)
        }
        _ => Err(bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpgroups::{todd_coxeter, Presentation};

    #[test]
    fn cache_round_trip_and_gc() {
        let dir = std::env::temp_dir().join(format!("curvecoh-cache-test-{}", std::process::id()));
        let cache = Cache::open(&dir).unwrap();
        cache.put(b"key-one", b"payload").unwrap();
        assert_eq!(cache.get(b"key-one").as_deref(), Some(&b"payload"[..]));
        assert_eq!(cache.get(b"key-two"), None);
        assert_eq!(cache.hits.get(), 1);
        assert_eq!(cache.misses.get(), 1);
        let removed = cache.gc().unwrap();
        assert_eq!(removed, 1);
        assert_eq!(cache.get(b"key-one"), None);
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn coset_table_binary_round_trip() {
        let p = Presentation::new(
            vec!["a".into(), "b".into()],
            vec![crate::fpgroups::commutator(&[1], &[2])],
        )
        .unwrap();
        let t = todd_coxeter(&p, &[vec![1, 1], vec![2, 2]], 1000).unwrap();
        let bytes = encode_coset_table(&t);
        let back = decode_coset_table(&p, &bytes).unwrap();
        assert_eq!(back.index(), t.index());
        for c in 0..t.index() as u32 {
            for l in [1i32, -1, 2, -2] {
                assert_eq!(back.act(c, l), t.act(c, l));
            }
        }
    }

    #[test]
    fn finite_group_binary_round_trip() {
        let g = FiniteGroup::abelian(&[4, 2]).with_generators(vec![1, 4]);
        let bytes = encode_finite_group(&g).unwrap();
        let back = decode_finite_group(&bytes).unwrap();
        assert_eq!(back.order(), 8);
        assert_eq!(back.generators(), g.generators());
        let s3 = FiniteGroup::from_perms(3, &[vec![1, 0, 2], vec![0, 2, 1]], 100).unwrap();
        let bytes = encode_finite_group(&s3).unwrap();
        let back = decode_finite_group(&bytes).unwrap();
        assert_eq!(back.order(), 6);
        for x in 0..6 {
            for y in 0..6 {
                assert_eq!(back.mul(x, y), s3.mul(x, y));
            }
        }
    }
}
