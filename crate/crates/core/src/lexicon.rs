//! Electronic dictionary: exact, prefix and edit-distance lookup.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::normalize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gloss {
    pub lang: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub headword: String,
    pub glosses: Vec<Gloss>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos: Option<String>,
    #[serde(default)]
    pub freq: u64,
    #[serde(default)]
    pub source: String,
}

impl LexiconEntry {
    pub fn new(headword: impl Into<String>, lang: &str, gloss: &str) -> Self {
        LexiconEntry {
            headword: headword.into(),
            glosses: vec![Gloss {
                lang: lang.to_string(),
                text: gloss.to_string(),
            }],
            pos: None,
            freq: 0,
            source: String::new(),
        }
    }

    pub fn with_freq(mut self, freq: u64) -> Self {
        self.freq = freq;
        self
    }

    /// First gloss in `lang`, if any.
    pub fn gloss(&self, lang: &str) -> Option<&str> {
        self.glosses
            .iter()
            .find(|g| g.lang == lang)
            .map(|g| g.text.as_str())
    }
}

/// A match from [`Lexicon::lookup_approx`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LookupHit {
    pub entry: LexiconEntry,
    pub dist: usize,
}

/// Immutable dictionary. Entries are kept sorted by headword, which doubles
/// as the prefix index: all headwords sharing a prefix form one contiguous run.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
    chars: Vec<Vec<char>>,
    total_freq: u64,
}

impl Lexicon {
    /// Builds a lexicon, merging entries that share a headword (glosses
    /// concatenated in input order, frequencies summed).
    pub fn from_entries(entries: impl IntoIterator<Item = LexiconEntry>) -> Result<Self> {
        let mut merged: BTreeMap<String, LexiconEntry> = BTreeMap::new();
        for mut entry in entries {
            entry.headword = normalize(entry.headword.trim());
            if entry.headword.is_empty() {
                return Err(Error::InvalidInput("empty headword".into()));
            }
            if entry.glosses.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "headword {:?} has no glosses",
                    entry.headword
                )));
            }
            match merged.get_mut(&entry.headword) {
                Some(existing) => {
                    existing.glosses.extend(entry.glosses);
                    existing.freq += entry.freq;
                    if existing.pos.is_none() {
                        existing.pos = entry.pos;
                    }
                }
                None => {
                    merged.insert(entry.headword.clone(), entry);
                }
            }
        }
        let entries: Vec<LexiconEntry> = merged.into_values().collect();
        let chars = entries
            .iter()
            .map(|e| e.headword.chars().collect())
            .collect();
        let total_freq = entries.iter().map(|e| e.freq).sum();
        Ok(Lexicon {
            entries,
            chars,
            total_freq,
        })
    }

    pub fn parse_jsonl(content: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, line) in content.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let line_no = idx + 1;
            let entry: LexiconEntry =
                serde_json::from_str(line).map_err(|e| Error::parse(line_no, e.to_string()))?;
            if entry.headword.trim().is_empty() {
                return Err(Error::parse(line_no, "empty headword"));
            }
            if entry.glosses.is_empty() {
                return Err(Error::parse(line_no, "entry has no glosses"));
            }
            entries.push(entry);
        }
        Self::from_entries(entries)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_jsonl(&content)
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in headword order.
    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn total_freq(&self) -> u64 {
        self.total_freq
    }

    /// Exact lookup; `headword` must already be NFC.
    pub fn get(&self, headword: &str) -> Option<&LexiconEntry> {
        self.entries
            .binary_search_by(|e| e.headword.as_str().cmp(headword))
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn contains(&self, headword: &str) -> bool {
        self.get(headword).is_some()
    }

    /// Headwords within `max_dist` edits of `query`, ordered by distance,
    /// then frequency (descending), then headword.
    pub fn lookup_approx(&self, query: &str, max_dist: usize, k: usize) -> Vec<LookupHit> {
        let query: Vec<char> = normalize(query).chars().collect();
        let mut hits: Vec<(usize, usize)> = self
            .chars
            .iter()
            .enumerate()
            .filter_map(|(i, hw)| levenshtein_within(&query, hw, max_dist).map(|d| (i, d)))
            .collect();
        hits.sort_by(|&(ia, da), &(ib, db)| {
            da.cmp(&db).then_with(|| self.by_freq_then_headword(ia, ib))
        });
        hits.into_iter()
            .take(k)
            .map(|(i, dist)| LookupHit {
                entry: self.entries[i].clone(),
                dist,
            })
            .collect()
    }

    /// Entries whose headword starts with `prefix`, most frequent first.
    /// An empty prefix ranks the whole lexicon.
    pub fn complete_prefix(&self, prefix: &str, k: usize) -> Vec<LexiconEntry> {
        let prefix = normalize(prefix);
        let start = self
            .entries
            .partition_point(|e| e.headword.as_str() < prefix.as_str());
        let mut matches: Vec<usize> = (start..self.entries.len())
            .take_while(|&i| self.entries[i].headword.starts_with(prefix.as_str()))
            .collect();
        matches.sort_by(|&a, &b| self.by_freq_then_headword(a, b));
        matches
            .into_iter()
            .take(k)
            .map(|i| self.entries[i].clone())
            .collect()
    }

    fn by_freq_then_headword(&self, a: usize, b: usize) -> Ordering {
        let (ea, eb) = (&self.entries[a], &self.entries[b]);
        eb.freq
            .cmp(&ea.freq)
            .then_with(|| ea.headword.cmp(&eb.headword))
    }
}

/// Unit-cost edit distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b)
}

pub fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Edit distance if it is at most `max`, computed over a diagonal band of
/// width `2 * max + 1` with early exit once every cell in a row exceeds `max`.
pub fn levenshtein_within(a: &[char], b: &[char], max: usize) -> Option<usize> {
    if a.len().abs_diff(b.len()) > max {
        return None;
    }
    let inf = max + 1;
    let n = b.len();
    let mut prev: Vec<usize> = (0..=n).map(|j| j.min(inf)).collect();
    let mut cur = vec![inf; n + 1];
    for (i, ca) in a.iter().enumerate() {
        let row = i + 1;
        let lo = row.saturating_sub(max);
        let hi = (row + max).min(n);
        cur.iter_mut().for_each(|c| *c = inf);
        if lo == 0 {
            cur[0] = row.min(inf);
        }
        let mut row_min = cur[0];
        for j in lo.max(1)..=hi {
            let sub = prev[j - 1] + usize::from(*ca != b[j - 1]);
            let v = sub.min(prev[j] + 1).min(cur[j - 1] + 1).min(inf);
            cur[j] = v;
            row_min = row_min.min(v);
        }
        if row_min > max {
            return None;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    (prev[n] <= max).then_some(prev[n])
}
