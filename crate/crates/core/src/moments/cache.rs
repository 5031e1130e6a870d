//! On-disk moment cache: one plain-text file per domain digest.
//!
//! ```text
//! bergman-moments 1
//! digest <hex>
//! precision <digits>
//! degree <N>
//! checksum <sha256 of the rows>
//! j k re im
//! ...
//! ```
//! Rows hold the upper triangle as shortest round-trip decimal strings.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::MomentError;
use crate::linalg::{self, CMatrix};
use crate::mp::{to_decimal, Complex, Precision};

const FORMAT: &str = "bergman-moments 1";

#[derive(Clone, Debug)]
pub struct MomentCache {
    dir: PathBuf,
}

fn corrupt(msg: impl Into<String>) -> MomentError {
    MomentError::CacheCorrupt(msg.into())
}

impl MomentCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        MomentCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, digest: &str) -> PathBuf {
        self.dir.join(format!("{digest}.moments"))
    }

    /// Leading `(n+1)`-block of the cached matrix if one of degree `>= n`
    /// exists.
    pub fn load(&self, digest: &str, prec: Precision, n: usize) -> Result<Option<CMatrix>, MomentError> {
        let path = self.path(digest);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let (stored_degree, m) = parse(&text, digest, prec)?;
        if stored_degree < n {
            return Ok(None);
        }
        Ok(Some(m[..=n].iter().map(|r| r[..=n].to_vec()).collect()))
    }

    /// Write (atomically replacing) the cache file, unless a file of at least
    /// this degree is already present.
    pub fn store(&self, digest: &str, prec: Precision, m: &CMatrix) -> Result<(), MomentError> {
        let n = m.len() - 1;
        if let Ok(Some(_)) = self.load(digest, prec, n) {
            return Ok(());
        }
        fs::create_dir_all(&self.dir)?;
        let text = render(digest, prec, m);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(text.as_bytes())?;
        tmp.flush()?;
        tmp.persist(self.path(digest)).map_err(|e| MomentError::Io(e.error))?;
        Ok(())
    }

    /// Remove every cache file; returns how many were deleted.
    pub fn purge(&self) -> Result<usize, MomentError> {
        let mut removed = 0;
        let entries = match fs::read_dir(&self.dir) {
            Ok(e) => e,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(0),
            Err(e) => return Err(e.into()),
        };
        for entry in entries {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "moments") {
                fs::remove_file(&path)?;
                removed += 1;
            }
        }
        Ok(removed)
    }
}

fn rows(m: &CMatrix) -> String {
    let mut s = String::new();
    for (j, row) in m.iter().enumerate() {
        for (k, z) in row.iter().enumerate().skip(j) {
            s.push_str(&format!("{j} {k} {} {}\n", to_decimal(&z.re), to_decimal(&z.im)));
        }
    }
    s
}

fn render(digest: &str, prec: Precision, m: &CMatrix) -> String {
    let body = rows(m);
    let sum = hex::encode(Sha256::digest(body.as_bytes()));
    format!(
        "{FORMAT}\ndigest {digest}\nprecision {}\ndegree {}\nchecksum {sum}\n{body}",
        prec.decimal_digits(),
        m.len() - 1
    )
}

fn parse(text: &str, digest: &str, prec: Precision) -> Result<(usize, CMatrix), MomentError> {
    let mut lines = text.lines();
    let mut header = |key: &str| -> Result<String, MomentError> {
        let line = lines.next().ok_or_else(|| corrupt("truncated header"))?;
        if key.is_empty() {
            return Ok(line.to_string());
        }
        line.strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .map(str::to_string)
            .ok_or_else(|| corrupt(format!("expected `{key}` line, found {line:?}")))
    };
    if header("")? != FORMAT {
        return Err(corrupt("unknown format version"));
    }
    if header("digest")? != digest {
        return Err(corrupt("digest mismatch"));
    }
    let p: u32 = header("precision")?.parse().map_err(|_| corrupt("bad precision"))?;
    if p != prec.decimal_digits() {
        return Err(corrupt("precision mismatch"));
    }
    let n: usize = header("degree")?.parse().map_err(|_| corrupt("bad degree"))?;
    let checksum = header("checksum")?;
    let body: String = text.lines().skip(5).flat_map(|l| [l, "\n"]).collect();
    if hex::encode(Sha256::digest(body.as_bytes())) != checksum {
        return Err(corrupt("checksum mismatch"));
    }
    let mut m = linalg::zeros(n + 1, n + 1, prec);
    let mut seen = 0usize;
    for (lineno, line) in body.lines().enumerate() {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(corrupt(format!("row {}: expected 4 fields", lineno + 1)));
        }
        let j: usize = f[0].parse().map_err(|_| corrupt("bad row index"))?;
        let k: usize = f[1].parse().map_err(|_| corrupt("bad row index"))?;
        if j > k || k > n {
            return Err(corrupt(format!("row index ({j}, {k}) out of range")));
        }
        let z: Complex = prec.parse_complex(f[2], f[3]).map_err(|e| corrupt(e.to_string()))?;
        m[k][j] = z.conj();
        m[j][k] = z;
        seen += 1;
    }
    if seen != (n + 1) * (n + 2) / 2 {
        return Err(corrupt("missing rows"));
    }
    Ok((n, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::catalog;
    use crate::moments::{domain_digest, gram_matrix};

    #[test]
    fn round_trip_is_bit_exact_and_reused() {
        let dir = tempfile::tempdir().unwrap();
        let cache = MomentCache::new(dir.path());
        let p = Precision::digits(40);
        let spec = catalog("l-shape", &[], p).unwrap();
        let first = gram_matrix(&spec, 6, Some(&cache)).unwrap();
        assert_eq!(first.recomputed, 49);
        let second = gram_matrix(&spec, 6, Some(&cache)).unwrap();
        assert_eq!(second.recomputed, 0);
        assert_eq!(first.entries, second.entries);
        let smaller = gram_matrix(&spec, 3, Some(&cache)).unwrap();
        assert_eq!(smaller.recomputed, 0);
        assert_eq!(smaller.entries[3][2], first.entries[3][2]);
        assert_eq!(cache.purge().unwrap(), 1);
        assert_eq!(gram_matrix(&spec, 3, Some(&cache)).unwrap().recomputed, 16);
    }

    #[test]
    fn corruption_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let cache = MomentCache::new(dir.path());
        let p = Precision::digits(30);
        let spec = catalog("square", &[1.0], p).unwrap();
        gram_matrix(&spec, 3, Some(&cache)).unwrap();
        let digest = domain_digest(&spec);
        let path = dir.path().join(format!("{digest}.moments"));
        let text = fs::read_to_string(&path).unwrap();
        let tampered = text.replacen("0 0 1", "0 0 2", 1);
        assert_ne!(text, tampered);
        fs::write(&path, tampered).unwrap();
        assert!(matches!(cache.load(&digest, p, 3), Err(MomentError::CacheCorrupt(_))));
        // a different precision is a different digest, not a corrupt file
        let other = catalog("square", &[1.0], Precision::digits(31)).unwrap();
        assert_ne!(domain_digest(&other), digest);
    }
}
