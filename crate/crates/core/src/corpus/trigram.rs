use std::collections::HashMap;

use super::{DocId, Document};

pub type Trigram = [u8; 3];

/// Posting lists from 3-byte substrings of line text to sorted document ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrigramIndex {
    postings: HashMap<Trigram, Vec<DocId>>,
}

impl TrigramIndex {
    pub fn build(documents: &[Document]) -> Self {
        let mut postings: HashMap<Trigram, Vec<DocId>> = HashMap::new();
        for (id, doc) in documents.iter().enumerate() {
            let id = id as DocId;
            for line in &doc.lines {
                for w in line.as_bytes().windows(3) {
                    let list = postings.entry([w[0], w[1], w[2]]).or_default();
                    if list.last() != Some(&id) {
                        list.push(id);
                    }
                }
            }
        }
        Self { postings }
    }

    pub(crate) fn from_postings(postings: HashMap<Trigram, Vec<DocId>>) -> Self {
        Self { postings }
    }

    pub fn postings(&self, trigram: &Trigram) -> &[DocId] {
        self.postings.get(trigram).map_or(&[], Vec::as_slice)
    }

    /// Entries sorted by trigram.
    pub fn sorted_entries(&self) -> Vec<(&Trigram, &Vec<DocId>)> {
        let mut entries: Vec<_> = self.postings.iter().collect();
        entries.sort_unstable_by_key(|(k, _)| **k);
        entries
    }

    pub fn len(&self) -> usize {
        self.postings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.postings.is_empty()
    }

    /// Documents that contain every trigram of `literal`; `None` when the
    /// literal is too short to constrain anything.
    pub fn containing(&self, literal: &str) -> Option<Vec<DocId>> {
        let bytes = literal.as_bytes();
        if bytes.len() < 3 {
            return None;
        }
        let mut lists: Vec<&[DocId]> = bytes
            .windows(3)
            .map(|w| self.postings(&[w[0], w[1], w[2]]))
            .collect();
        lists.sort_unstable_by_key(|l| l.len());
        let mut acc = lists[0].to_vec();
        for list in &lists[1..] {
            if acc.is_empty() {
                break;
            }
            acc = intersect(&acc, list);
        }
        Some(acc)
    }
}

pub(crate) fn intersect(a: &[DocId], b: &[DocId]) -> Vec<DocId> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

pub(crate) fn union(a: &[DocId], b: &[DocId]) -> Vec<DocId> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len() + b.len());
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i] <= b[j]);
        if take_a {
            if j < b.len() && a[i] == b[j] {
                j += 1;
            }
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out
}
