//! Lazy enumeration of alternative queries.
//!
//! Rules that do not apply to the original query are pruned up front. The
//! remaining rules are tried as singletons in priority order, then as pairs,
//! triples and so on; within a composition rules are applied from most to
//! least specific and every step must satisfy its precondition on the
//! intermediate query. Results that repeat the original or an earlier
//! candidate are skipped without using up the bound.

use crate::query::{print, Query};
use crate::rules::{RuleId, RuleSet, StandardRules};

/// Candidate bound used when none is configured.
pub const DEFAULT_MAX_CANDIDATES: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateQuery {
    pub query: Query,
    /// Rules in the order they were applied (priority order).
    pub applied_rules: Vec<RuleId>,
    /// 1-based position in the generated sequence.
    pub rank: usize,
    pub rendered: String,
}

/// Iterator over candidates; see the module docs for the order.
pub struct Generator<'r, R: RuleSet = StandardRules> {
    rules: &'r R,
    original: Query,
    pruned: Vec<RuleId>,
    max: usize,
    /// Size of the compositions currently being enumerated.
    size: usize,
    /// Indices into `pruned` of the next composition to try.
    next_combo: Option<Vec<usize>>,
    yielded: Vec<Query>,
}

pub fn generate(original: &Query, max_candidates: usize) -> Generator<'static> {
    Generator::new(&StandardRules, original, max_candidates)
}

impl<'r, R: RuleSet> Generator<'r, R> {
    pub fn new(rules: &'r R, original: &Query, max_candidates: usize) -> Self {
        let pruned: Vec<RuleId> = RuleId::ALL
            .into_iter()
            .filter(|&id| rules.applicable(id, original))
            .collect();
        let next_combo = (!pruned.is_empty()).then(|| vec![0]);
        Self {
            rules,
            original: original.clone(),
            pruned,
            max: max_candidates,
            size: 1,
            next_combo,
            yielded: Vec::new(),
        }
    }

    /// Rules that survived pruning, in priority order.
    pub fn applicable_rules(&self) -> &[RuleId] {
        &self.pruned
    }

    fn advance(&mut self) {
        let Some(combo) = self.next_combo.as_mut() else {
            return;
        };
        let n = self.pruned.len();
        let k = combo.len();
        // Next k-combination in lexicographic order.
        let mut i = k;
        while i > 0 {
            i -= 1;
            if combo[i] < n - k + i {
                combo[i] += 1;
                for j in i + 1..k {
                    combo[j] = combo[j - 1] + 1;
                }
                return;
            }
        }
        self.size += 1;
        self.next_combo = (self.size <= n).then(|| (0..self.size).collect());
    }

    fn attempt(&self, combo: &[usize]) -> Option<(Query, Vec<RuleId>)> {
        let mut query = self.original.clone();
        let mut applied = Vec::with_capacity(combo.len());
        for &i in combo {
            let id = self.pruned[i];
            if !self.rules.applicable(id, &query) {
                return None;
            }
            query = self.rules.apply(id, &query).ok()?;
            applied.push(id);
        }
        Some((query, applied))
    }
}

impl<R: RuleSet> Iterator for Generator<'_, R> {
    type Item = CandidateQuery;

    fn next(&mut self) -> Option<CandidateQuery> {
        if self.yielded.len() >= self.max {
            return None;
        }
        loop {
            let combo = self.next_combo.clone()?;
            self.advance();
            let Some((query, applied_rules)) = self.attempt(&combo) else {
                continue;
            };
            if query == self.original || self.yielded.contains(&query) {
                continue;
            }
            self.yielded.push(query.clone());
            return Some(CandidateQuery {
                rendered: print(&query),
                query,
                applied_rules,
                rank: self.yielded.len(),
            });
        }
    }
}
