//! Versioned binary cache (`.ncm`) for the two corpus models.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic            8 bytes  "NCMCACHE"
//! format_version   u32
//! source_digest    32 bytes SHA-256 of the corpus inputs
//! payload_len      u64
//! payload_digest   32 bytes SHA-256 of the payload
//! payload          english section, then chinese section
//! ```
//!
//! Each section is a `u64` byte length followed by its body. The english
//! body is an entry count then `(u32 key_len, key, u64 female, u64 male)`
//! per entry in key order. The chinese body is the smoothing alpha as
//! `f64` bits, an entry count, then `(u32 codepoint, u64 female, u64 male)`.

use std::fs;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{self, ChineseCharModel, CorpusError, EnglishNameModel, GenderCounts};

pub const CACHE_MAGIC: [u8; 8] = *b"NCMCACHE";
pub const FORMAT_VERSION: u32 = 1;

const HEADER_LEN: usize = 8 + 4 + 32 + 8 + 32;

pub type SourceDigest = [u8; 32];

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache I/O on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("not a model cache (bad magic bytes)")]
    BadMagic,
    #[error("cache format version {found} is not supported (expected {supported})")]
    VersionMismatch { found: u32, supported: u32 },
    #[error("cache file is truncated")]
    Truncated,
    #[error("cache payload digest mismatch (file is corrupted)")]
    DigestMismatch,
    #[error("malformed cache payload: {0}")]
    Corrupt(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelCache {
    pub format_version: u32,
    pub english: EnglishNameModel,
    pub chinese: ChineseCharModel,
    pub source_digest: SourceDigest,
}

impl ModelCache {
    pub fn new(english: EnglishNameModel, chinese: ChineseCharModel, source_digest: SourceDigest) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            english,
            chinese,
            source_digest,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut english = Vec::new();
        put_u64(&mut english, self.english.distinct_names() as u64);
        for (key, counts) in self.english.entries() {
            put_u32(&mut english, key.len() as u32);
            english.extend_from_slice(key.as_bytes());
            put_counts(&mut english, counts);
        }

        let mut chinese = Vec::new();
        put_u64(&mut chinese, self.chinese.smoothing_alpha().to_bits());
        put_u64(&mut chinese, self.chinese.vocabulary_size() as u64);
        for (ch, counts) in self.chinese.entries() {
            put_u32(&mut chinese, ch as u32);
            put_counts(&mut chinese, counts);
        }

        let mut payload = Vec::with_capacity(english.len() + chinese.len() + 16);
        for section in [&english, &chinese] {
            put_u64(&mut payload, section.len() as u64);
            payload.extend_from_slice(section);
        }

        let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
        out.extend_from_slice(&CACHE_MAGIC);
        put_u32(&mut out, self.format_version);
        out.extend_from_slice(&self.source_digest);
        put_u64(&mut out, payload.len() as u64);
        out.extend_from_slice(&Sha256::digest(&payload));
        out.extend_from_slice(&payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CacheError> {
        if bytes.len() < CACHE_MAGIC.len() {
            return Err(if CACHE_MAGIC.starts_with(bytes) {
                CacheError::Truncated
            } else {
                CacheError::BadMagic
            });
        }
        if bytes[..8] != CACHE_MAGIC {
            return Err(CacheError::BadMagic);
        }
        let mut header = Reader::new(&bytes[8..]);
        let version = header.u32().map_err(|_| CacheError::Truncated)?;
        if version != FORMAT_VERSION {
            return Err(CacheError::VersionMismatch {
                found: version,
                supported: FORMAT_VERSION,
            });
        }
        let source_digest: SourceDigest = header.array().map_err(|_| CacheError::Truncated)?;
        let payload_len = header.u64().map_err(|_| CacheError::Truncated)?;
        let payload_digest: [u8; 32] = header.array().map_err(|_| CacheError::Truncated)?;
        let payload = header.rest();
        if (payload.len() as u64) < payload_len {
            return Err(CacheError::Truncated);
        }
        if payload.len() as u64 > payload_len {
            return Err(CacheError::Corrupt("trailing bytes after payload".into()));
        }
        if Sha256::digest(payload).as_slice() != payload_digest {
            return Err(CacheError::DigestMismatch);
        }

        let mut r = Reader::new(payload);
        let english = decode_english(r.section()?)?;
        let chinese = decode_chinese(r.section()?)?;
        if !r.rest().is_empty() {
            return Err(CacheError::Corrupt("unexpected data after sections".into()));
        }
        Ok(Self {
            format_version: version,
            english,
            chinese,
            source_digest,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), CacheError> {
        let io_err = |source| CacheError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut file = fs::File::create(path).map_err(io_err)?;
        file.write_all(&self.to_bytes()).map_err(io_err)?;
        file.sync_all().map_err(io_err)
    }

    pub fn load(path: &Path) -> Result<Self, CacheError> {
        let bytes = fs::read(path).map_err(|source| CacheError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }
}

pub fn save_cache(cache: &ModelCache, path: &Path) -> Result<(), CacheError> {
    cache.save(path)
}

pub fn load_cache(path: &Path) -> Result<ModelCache, CacheError> {
    ModelCache::load(path)
}

/// SHA-256 over the yearly files (in name order) and the character table.
///
/// Each file contributes its name, its length and its bytes, so renaming
/// or moving rows between files changes the digest.
pub fn source_digest(english_dir: &Path, chinese_csv: &Path) -> Result<SourceDigest, CorpusError> {
    let mut hasher = Sha256::new();
    let mut feed = |label: &str, path: &Path| -> Result<(), CorpusError> {
        let bytes = fs::read(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        hasher.update((label.len() as u64).to_le_bytes());
        hasher.update(label.as_bytes());
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
        Ok(())
    };
    for path in corpus::year_files(english_dir)? {
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
        feed(&format!("english/{name}"), &path)?;
    }
    feed("chinese", chinese_csv)?;
    Ok(hasher.finalize().into())
}

fn put_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_counts(buf: &mut Vec<u8>, counts: GenderCounts) {
    put_u64(buf, counts.female);
    put_u64(buf, counts.male);
}

struct Reader<'a> {
    buf: &'a [u8],
}

struct Short;

impl From<Short> for CacheError {
    fn from(_: Short) -> Self {
        CacheError::Corrupt("section ends early".into())
    }
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], Short> {
        if self.buf.len() < n {
            return Err(Short);
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], Short> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<u32, Short> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64, Short> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn counts(&mut self) -> Result<GenderCounts, Short> {
        Ok(GenderCounts::new(self.u64()?, self.u64()?))
    }

    fn section(&mut self) -> Result<&'a [u8], CacheError> {
        let len = self.u64()?;
        let len = usize::try_from(len).map_err(|_| CacheError::Corrupt("section too large".into()))?;
        Ok(self.take(len)?)
    }

    fn rest(&mut self) -> &'a [u8] {
        std::mem::take(&mut self.buf)
    }
}

fn decode_english(body: &[u8]) -> Result<EnglishNameModel, CacheError> {
    let mut r = Reader::new(body);
    let n = r.u64()?;
    let mut rows = Vec::new();
    let mut prev: Option<&str> = None;
    for _ in 0..n {
        let len = r.u32()? as usize;
        let key = std::str::from_utf8(r.take(len)?)
            .map_err(|_| CacheError::Corrupt("name key is not UTF-8".into()))?;
        let counts = r.counts()?;
        if prev.is_some_and(|p| p >= key) {
            return Err(CacheError::Corrupt("name keys out of order".into()));
        }
        if counts.total() == 0 {
            return Err(CacheError::Corrupt(format!("name {key:?} has zero counts")));
        }
        prev = Some(key);
        rows.push((key, counts));
    }
    if !r.rest().is_empty() {
        return Err(CacheError::Corrupt("english section has trailing bytes".into()));
    }
    let model = EnglishNameModel::from_counts(rows);
    if model.distinct_names() as u64 != n {
        return Err(CacheError::Corrupt("name keys are not normalized".into()));
    }
    Ok(model)
}

fn decode_chinese(body: &[u8]) -> Result<ChineseCharModel, CacheError> {
    let mut r = Reader::new(body);
    let alpha = f64::from_bits(r.u64()?);
    let n = r.u64()?;
    let mut rows = Vec::new();
    let mut prev: Option<char> = None;
    for _ in 0..n {
        let cp = r.u32()?;
        let ch = char::from_u32(cp)
            .filter(|&c| crate::script::is_han(c))
            .ok_or_else(|| CacheError::Corrupt(format!("U+{cp:04X} is not a Han character")))?;
        if prev.is_some_and(|p| p >= ch) {
            return Err(CacheError::Corrupt("characters out of order".into()));
        }
        prev = Some(ch);
        rows.push((ch, r.counts()?));
    }
    if !r.rest().is_empty() {
        return Err(CacheError::Corrupt("chinese section has trailing bytes".into()));
    }
    ChineseCharModel::from_counts(rows)
        .with_alpha(alpha)
        .map_err(|e| CacheError::Corrupt(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_row_cache() -> ModelCache {
        let english = EnglishNameModel::from_counts([
            ("hua", GenderCounts::new(80, 20)),
            ("jordan", GenderCounts::new(3, 7)),
        ]);
        let chinese = ChineseCharModel::from_counts([('娟', GenderCounts::new(3, 1)), ('刚', GenderCounts::new(1, 9))]);
        ModelCache::new(english, chinese, [7; 32])
    }

    #[test]
    fn round_trip_two_row_model() {
        let cache = two_row_cache();
        let back = ModelCache::from_bytes(&cache.to_bytes()).unwrap();
        assert_eq!(back, cache);
        assert_eq!(back.chinese.entries().collect::<Vec<_>>(), cache.chinese.entries().collect::<Vec<_>>());
    }

    #[test]
    fn round_trip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ncm");
        let cache = two_row_cache();
        save_cache(&cache, &path).unwrap();
        assert_eq!(load_cache(&path).unwrap(), cache);
        assert!(matches!(load_cache(&dir.path().join("absent.ncm")), Err(CacheError::Io { .. })));
    }

    #[test]
    fn rejects_other_versions() {
        let mut bytes = two_row_cache().to_bytes();
        bytes[8..12].copy_from_slice(&(FORMAT_VERSION + 1).to_le_bytes());
        assert!(matches!(
            ModelCache::from_bytes(&bytes),
            Err(CacheError::VersionMismatch { found, supported }) if found == FORMAT_VERSION + 1 && supported == FORMAT_VERSION
        ));
    }

    #[test]
    fn distinct_error_classes() {
        let bytes = two_row_cache().to_bytes();

        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(matches!(ModelCache::from_bytes(&bad_magic), Err(CacheError::BadMagic)));
        assert!(matches!(ModelCache::from_bytes(b"PK\x03\x04"), Err(CacheError::BadMagic)));

        for cut in [3, 10, HEADER_LEN - 1, bytes.len() - 1] {
            assert!(matches!(ModelCache::from_bytes(&bytes[..cut]), Err(CacheError::Truncated)), "cut {cut}");
        }

        let mut flipped = bytes.clone();
        let last = flipped.len() - 1;
        flipped[last] ^= 0x01;
        assert!(matches!(ModelCache::from_bytes(&flipped), Err(CacheError::DigestMismatch)));

        let mut trailing = bytes.clone();
        trailing.push(0);
        assert!(matches!(ModelCache::from_bytes(&trailing), Err(CacheError::Corrupt(_))));
    }

    #[test]
    fn source_digest_is_stable_and_sensitive() {
        let dir = tempfile::tempdir().unwrap();
        let en = dir.path().join("en");
        fs::create_dir(&en).unwrap();
        fs::write(en.join("yob2000.txt"), "Mary,F,10\n").unwrap();
        let zh = dir.path().join("zh.csv");
        fs::write(&zh, "char,female,male\n娟,3,1\n").unwrap();

        let first = source_digest(&en, &zh).unwrap();
        assert_eq!(first, source_digest(&en, &zh).unwrap());

        fs::write(en.join("yob2001.txt"), "Mary,F,1\n").unwrap();
        let second = source_digest(&en, &zh).unwrap();
        assert_ne!(first, second);

        fs::write(&zh, "char,female,male\n娟,3,2\n").unwrap();
        assert_ne!(second, source_digest(&en, &zh).unwrap());
    }

    fn han() -> impl Strategy<Value = char> {
        (0x4E00u32..=0x9FFF).prop_map(|c| char::from_u32(c).unwrap())
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(
            names in proptest::collection::btree_map("[a-zé]{1,10}", (0u64..1000, 1u64..1000), 0..40),
            chars in proptest::collection::btree_map(han(), (0u64..1_000_000, 0u64..1_000_000), 0..40),
            alpha in 0.01f64..10.0,
            digest in any::<[u8; 32]>(),
        ) {
            let english = EnglishNameModel::from_counts(
                names.iter().map(|(k, &(f, m))| (k.as_str(), GenderCounts::new(f, m))));
            let chinese = ChineseCharModel::from_counts(
                chars.iter().map(|(&c, &(f, m))| (c, GenderCounts::new(f, m)))).with_alpha(alpha).unwrap();
            let cache = ModelCache::new(english, chinese, digest);
            let bytes = cache.to_bytes();
            let back = ModelCache::from_bytes(&bytes).unwrap();
            prop_assert_eq!(&back, &cache);
            prop_assert_eq!(back.to_bytes(), bytes);
        }
    }
}
