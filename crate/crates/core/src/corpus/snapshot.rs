//! Corpus snapshot container.
//!
//! All integers are little-endian `u32`; strings are a `u32` byte length
//! followed by UTF-8 bytes.
//!
//! ```text
//! header     magic "SSCORPUS" (8 bytes), format version, document count
//! documents  per document: repo, path, language, line count
//! lines      every line of every document, in document order
//! postings   trigram count, then per trigram (ascending):
//!            3 key bytes, id count, ids (ascending)
//! ```
//!
//! Writing is deterministic, so the same corpus always produces the same
//! bytes.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use thiserror::Error;

use super::trigram::TrigramIndex;
use super::{Corpus, Document};

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"SSCORPUS";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot i/o: {0}")]
    Io(#[from] io::Error),
    #[error("not a corpus snapshot (bad magic)")]
    BadMagic,
    #[error("unsupported snapshot version {0} (expected {SNAPSHOT_VERSION})")]
    Version(u32),
    #[error("corrupt snapshot: {0}")]
    Corrupt(&'static str),
}

struct Writer<W> {
    inner: W,
}

impl<W: Write> Writer<W> {
    fn u32(&mut self, v: usize) -> io::Result<()> {
        let v = u32::try_from(v).map_err(|_| io::Error::other("value exceeds u32"))?;
        self.inner.write_all(&v.to_le_bytes())
    }

    fn str(&mut self, s: &str) -> io::Result<()> {
        self.u32(s.len())?;
        self.inner.write_all(s.as_bytes())
    }
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn u32(&mut self) -> Result<u32, SnapshotError> {
        let mut buf = [0; 4];
        self.inner.read_exact(&mut buf)?;
        Ok(u32::from_le_bytes(buf))
    }

    fn bytes(&mut self, len: usize) -> Result<Vec<u8>, SnapshotError> {
        let mut buf = Vec::new();
        (&mut self.inner).take(len as u64).read_to_end(&mut buf)?;
        if buf.len() != len {
            return Err(SnapshotError::Corrupt("truncated"));
        }
        Ok(buf)
    }

    fn str(&mut self) -> Result<String, SnapshotError> {
        let len = self.u32()? as usize;
        String::from_utf8(self.bytes(len)?).map_err(|_| SnapshotError::Corrupt("invalid utf-8"))
    }
}

impl Corpus {
    pub fn write_snapshot<W: Write>(&self, out: W) -> Result<(), SnapshotError> {
        let mut w = Writer {
            inner: io::BufWriter::new(out),
        };
        w.inner.write_all(SNAPSHOT_MAGIC)?;
        w.u32(SNAPSHOT_VERSION as usize)?;
        w.u32(self.documents.len())?;
        for doc in &self.documents {
            w.str(&doc.repo)?;
            w.str(&doc.path)?;
            w.str(&doc.language)?;
            w.u32(doc.lines.len())?;
        }
        for doc in &self.documents {
            for line in &doc.lines {
                w.str(line)?;
            }
        }
        let entries = self.trigrams.sorted_entries();
        w.u32(entries.len())?;
        for (key, ids) in entries {
            w.inner.write_all(key)?;
            w.u32(ids.len())?;
            for &id in ids {
                w.u32(id as usize)?;
            }
        }
        w.inner.flush()?;
        Ok(())
    }

    pub fn read_snapshot<R: Read>(input: R) -> Result<Corpus, SnapshotError> {
        let mut r = Reader {
            inner: io::BufReader::new(input),
        };
        if r.bytes(8).map_err(|_| SnapshotError::BadMagic)? != SNAPSHOT_MAGIC {
            return Err(SnapshotError::BadMagic);
        }
        let version = r.u32()?;
        if version != SNAPSHOT_VERSION {
            return Err(SnapshotError::Version(version));
        }
        let count = r.u32()? as usize;
        let mut table = Vec::with_capacity(count.min(1 << 20));
        for _ in 0..count {
            let repo = r.str()?;
            let path = r.str()?;
            let language = r.str()?;
            let lines = r.u32()? as usize;
            table.push((repo, path, language, lines));
        }
        let mut documents = Vec::with_capacity(table.len());
        for (repo, path, language, line_count) in table {
            let lines = (0..line_count)
                .map(|_| r.str())
                .collect::<Result<Vec<_>, _>>()?;
            documents.push(Document {
                repo,
                path,
                language,
                lines,
            });
        }
        let trigram_count = r.u32()? as usize;
        let mut postings = HashMap::with_capacity(trigram_count.min(1 << 24));
        for _ in 0..trigram_count {
            let key = r.bytes(3)?;
            let n = r.u32()? as usize;
            let ids = (0..n).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
            if ids.iter().any(|&id| id as usize >= documents.len()) {
                return Err(SnapshotError::Corrupt("posting refers to unknown document"));
            }
            postings.insert([key[0], key[1], key[2]], ids);
        }
        let mut trailing = [0u8; 1];
        if r.inner.read(&mut trailing)? != 0 {
            return Err(SnapshotError::Corrupt("trailing bytes"));
        }
        Ok(Corpus {
            documents,
            trigrams: TrigramIndex::from_postings(postings),
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), SnapshotError> {
        self.write_snapshot(fs::File::create(path)?)
    }

    pub fn load(path: &Path) -> Result<Corpus, SnapshotError> {
        Corpus::read_snapshot(fs::File::open(path)?)
    }
}
