//! A simplified method history tracer over the first-parent commit chain.
//!
//! Identity between adjacent commits is (file path, method name, parameter
//! count). When a file disappears, git rename detection supplies the other
//! path and the method is accepted there only if its text is similar enough.
//! Renames and moves that leave the method text untouched are not revisions.

use std::cell::RefCell;
use std::collections::HashMap;
use std::path::Path;
use std::rc::Rc;

use git2::{Delta, DiffFindOptions, Oid, Repository, Tree};
use similar::{ChangeTag, TextDiff};

use super::bugfix::BugKeywords;
use super::levenshtein::{levenshtein, similarity};
use super::{HistoryError, MethodHistory, Revision};
use crate::extractor::{locate_methods, MethodRecord, MethodSite};

#[derive(Debug, Clone)]
pub struct TraceOptions {
    /// Commit to follow the method forward to (deletions after the snapshot
    /// end the observation). `None` observes up to the snapshot only.
    pub until: Option<String>,
    /// Minimum `1 - normalized edit distance` to accept a match across a file rename.
    pub rename_similarity: f64,
    pub keywords: BugKeywords,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { until: None, rename_similarity: 0.6, keywords: BugKeywords::default() }
    }
}

struct ChainCommit {
    oid: Oid,
    time: i64,
    is_bugfix: bool,
}

/// Added and deleted lines between two texts, zero context.
pub fn line_changes(before: &str, after: &str) -> (u64, u64) {
    let diff = TextDiff::from_lines(before, after);
    let (mut added, mut deleted) = (0, 0);
    for change in diff.iter_all_changes() {
        match change.tag() {
            ChangeTag::Insert => added += 1,
            ChangeTag::Delete => deleted += 1,
            ChangeTag::Equal => {}
        }
    }
    (added, deleted)
}

/// (old path, new path)
type RenamePairs = Vec<(String, String)>;

#[derive(Clone)]
struct Located {
    path: String,
    site: MethodSite,
}

pub struct Tracer {
    repo: Repository,
    /// Oldest first.
    chain: Vec<ChainCommit>,
    snapshot: usize,
    options: TraceOptions,
    parsed: RefCell<HashMap<Oid, Rc<Vec<MethodSite>>>>,
    renames: RefCell<HashMap<(usize, usize), Rc<RenamePairs>>>,
}

impl Tracer {
    pub fn open(repo_path: &Path, snapshot: &str, options: TraceOptions) -> Result<Self, HistoryError> {
        let repo = Repository::open(repo_path)?;
        let resolve = |spec: &str| -> Result<Oid, HistoryError> {
            let obj = repo.revparse_single(spec).map_err(|_| HistoryError::UnknownRevision(spec.to_string()))?;
            Ok(obj.peel_to_commit().map_err(|_| HistoryError::UnknownRevision(spec.to_string()))?.id())
        };
        let snapshot_oid = resolve(snapshot)?;
        let head_oid = match &options.until {
            Some(until) => resolve(until)?,
            None => snapshot_oid,
        };

        let mut chain = Vec::new();
        {
        let mut commit = repo.find_commit(head_oid)?;
        loop {
            let message = commit.message().unwrap_or_default().to_string();
            chain.push(ChainCommit {
                oid: commit.id(),
                time: commit.time().seconds(),
                is_bugfix: options.keywords.matches(&message),
            });
            if commit.parent_count() == 0 {
                break;
            }
            commit = commit.parent(0)?;
        }
        }
        chain.reverse();
        let snapshot = chain
            .iter()
            .position(|c| c.oid == snapshot_oid)
            .ok_or_else(|| HistoryError::SnapshotNotOnChain(snapshot.to_string()))?;
        Ok(Tracer {
            repo,
            chain,
            snapshot,
            options,
            parsed: RefCell::default(),
            renames: RefCell::default(),
        })
    }

    pub fn snapshot_id(&self) -> String {
        self.chain[self.snapshot].oid.to_string()
    }

    fn tree(&self, idx: usize) -> Result<Tree<'_>, HistoryError> {
        Ok(self.repo.find_commit(self.chain[idx].oid)?.tree()?)
    }

    fn blob_at(&self, idx: usize, path: &str) -> Result<Option<Oid>, HistoryError> {
        match self.tree(idx)?.get_path(Path::new(path)) {
            Ok(entry) => Ok(Some(entry.id())),
            Err(e) if e.code() == git2::ErrorCode::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    fn methods_in(&self, blob: Oid) -> Result<Rc<Vec<MethodSite>>, HistoryError> {
        if let Some(hit) = self.parsed.borrow().get(&blob) {
            return Ok(Rc::clone(hit));
        }
        let blob_obj = self.repo.find_blob(blob)?;
        let text = String::from_utf8_lossy(blob_obj.content());
        let sites = Rc::new(locate_methods(&text));
        self.parsed.borrow_mut().insert(blob, Rc::clone(&sites));
        Ok(sites)
    }

    /// (old path, new path) pairs git reports as renamed between `older` and `newer`.
    fn renames_between(&self, older: usize, newer: usize) -> Result<Rc<RenamePairs>, HistoryError> {
        if let Some(hit) = self.renames.borrow().get(&(older, newer)) {
            return Ok(Rc::clone(hit));
        }
        let (old_tree, new_tree) = (self.tree(older)?, self.tree(newer)?);
        let mut diff = self.repo.diff_tree_to_tree(Some(&old_tree), Some(&new_tree), None)?;
        let mut find = DiffFindOptions::new();
        find.renames(true);
        diff.find_similar(Some(&mut find))?;
        let pairs: RenamePairs = diff
            .deltas()
            .filter(|d| d.status() == Delta::Renamed)
            .filter_map(|d| {
                let old = d.old_file().path()?.to_str()?.to_string();
                let new = d.new_file().path()?.to_str()?.to_string();
                Some((old, new))
            })
            .collect();
        let pairs = Rc::new(pairs);
        self.renames.borrow_mut().insert((older, newer), Rc::clone(&pairs));
        Ok(pairs)
    }

    /// Finds the counterpart of `current` in the file at `path` of commit `idx`.
    fn find_match(&self, idx: usize, path: &str, current: &MethodSite, across_rename: bool) -> Result<Option<MethodSite>, HistoryError> {
        let Some(blob) = self.blob_at(idx, path)? else { return Ok(None) };
        let sites = self.methods_in(blob)?;
        let mut candidates: Vec<&MethodSite> = sites
            .iter()
            .filter(|s| s.name == current.name && s.signature.arity() == current.signature.arity())
            .collect();
        if candidates.is_empty() {
            return Ok(None);
        }
        if !across_rename && candidates.iter().any(|s| s.signature == current.signature) {
            candidates.retain(|s| s.signature == current.signature);
        }
        let scored = candidates.into_iter().map(|s| (similarity(&s.body_text, &current.body_text), s));
        // highest similarity; ties go to the earliest declaration
        let best = scored.fold(None::<(f64, &MethodSite)>, |best, (score, site)| match best {
            Some((b, _)) if b >= score => best,
            _ => Some((score, site)),
        });
        Ok(match best {
            Some((score, site)) if !across_rename || score >= self.options.rename_similarity => Some(site.clone()),
            _ => None,
        })
    }

    /// Where `at` lives in the neighbouring commit `other`; `Err(true)` when a
    /// rename was detected but not bridged.
    fn step(&self, at: &Located, from: usize, other: usize) -> Result<Result<Located, bool>, HistoryError> {
        let here = self.blob_at(from, &at.path)?;
        let there = self.blob_at(other, &at.path)?;
        if there.is_some() && there == here {
            return Ok(Ok(at.clone()));
        }
        if there.is_some() {
            return Ok(match self.find_match(other, &at.path, &at.site, false)? {
                Some(site) => Ok(Located { path: at.path.clone(), site }),
                None => Err(false),
            });
        }
        let (older, newer) = if other < from { (other, from) } else { (from, other) };
        let renames = self.renames_between(older, newer)?;
        let counterpart = renames.iter().find_map(|(old, new)| {
            if other < from && *new == at.path {
                Some(old.clone())
            } else if other > from && *old == at.path {
                Some(new.clone())
            } else {
                None
            }
        });
        let Some(path) = counterpart else { return Ok(Err(false)) };
        Ok(match self.find_match(other, &path, &at.site, true)? {
            Some(site) => Ok(Located { path, site }),
            None => Err(true),
        })
    }

    fn revision(&self, idx: usize, before: &str, after: &str) -> Revision {
        let (lines_added, lines_deleted) = line_changes(before, after);
        let commit = &self.chain[idx];
        Revision {
            commit_id: commit.oid.to_string(),
            timestamp: commit.time,
            lines_added,
            lines_deleted,
            diff_size: lines_added + lines_deleted,
            edit_distance: levenshtein(before, after),
            is_bugfix: commit.is_bugfix,
            body_after: Some(after.to_string()),
        }
    }

    pub fn trace(&self, record: &MethodRecord) -> Result<MethodHistory, HistoryError> {
        let start = Located {
            path: record.file_path.clone(),
            site: MethodSite {
                name: record.name.clone(),
                signature: record.signature.clone(),
                body_text: record.body_text.clone(),
                start_line: record.start_line,
            },
        };
        let mut truncated = false;

        // backward to birth
        let mut backward = Vec::new();
        let mut current = start.clone();
        let mut idx = self.snapshot;
        while idx > 0 {
            match self.step(&current, idx, idx - 1)? {
                Ok(previous) => {
                    if previous.site.body_text != current.site.body_text {
                        backward.push(self.revision(idx, &previous.site.body_text, &current.site.body_text));
                    }
                    current = previous;
                    idx -= 1;
                }
                Err(unbridged) => {
                    truncated |= unbridged;
                    break;
                }
            }
        }
        let birth = idx;
        let birth_body = current.site.body_text;
        backward.reverse();

        // forward until deletion or the end of the chain
        let mut revisions = backward;
        let mut current = start;
        let mut idx = self.snapshot;
        let mut end = self.chain.len() - 1;
        while idx + 1 < self.chain.len() {
            match self.step(&current, idx, idx + 1)? {
                Ok(next) => {
                    if next.site.body_text != current.site.body_text {
                        revisions.push(self.revision(idx + 1, &current.site.body_text, &next.site.body_text));
                    }
                    current = next;
                    idx += 1;
                }
                Err(unbridged) => {
                    truncated |= unbridged;
                    end = idx + 1;
                    break;
                }
            }
        }

        Ok(MethodHistory {
            method_id: record.method_id.clone(),
            birth_commit: self.chain[birth].oid.to_string(),
            birth_timestamp: self.chain[birth].time,
            end_of_observation: self.chain[end].time,
            revisions,
            truncated,
            birth_body: Some(birth_body),
        })
    }
}

/// One-shot convenience over [`Tracer`].
pub fn trace_method_history(
    repo_path: &Path,
    snapshot: &str,
    record: &MethodRecord,
    options: &TraceOptions,
) -> Result<MethodHistory, HistoryError> {
    Tracer::open(repo_path, snapshot, options.clone())?.trace(record)
}
