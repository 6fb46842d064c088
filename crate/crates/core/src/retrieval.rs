//! Exhaustive Euclidean ranking, one event at a time.
//!
//! Every query of an event is compared against that event's database
//! only. Ties in distance are broken by video id so the order, and hence
//! AP, never depends on input order or thread count.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::index::{with_workers, BoaStore};
use crate::ingest::{DatasetManifest, EventSpec};
use crate::kernel::{squared_l2, BoaVector};

#[derive(Debug, Clone, PartialEq)]
pub struct RankedEntry {
    pub video_id: String,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub query_id: String,
    pub entries: Vec<RankedEntry>,
}

impl RankedList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.video_id.as_str())
    }
}

fn by_distance_then_id(a: &RankedEntry, b: &RankedEntry) -> Ordering {
    a.distance
        .total_cmp(&b.distance)
        .then_with(|| a.video_id.cmp(&b.video_id))
}

/// Orders every candidate by L2 distance to the query.
pub fn rank<S: AsRef<str>>(
    query_id: &str,
    query: &BoaVector,
    candidates: &[(S, BoaVector)],
) -> Result<RankedList> {
    let mut entries = Vec::with_capacity(candidates.len());
    for (id, v) in candidates {
        let id = id.as_ref();
        if v.provenance() != query.provenance() {
            return Err(Error::invalid(format!(
                "candidate `{id}` has provenance {}, query `{query_id}` has {}",
                v.provenance(),
                query.provenance()
            )));
        }
        if v.dim() != query.dim() {
            return Err(Error::invalid(format!(
                "candidate `{id}` has dim {}, query `{query_id}` has {}",
                v.dim(),
                query.dim()
            )));
        }
        entries.push(RankedEntry {
            video_id: id.to_owned(),
            distance: squared_l2(query.values(), v.values()).sqrt(),
        });
    }
    entries.sort_by(by_distance_then_id);
    Ok(RankedList {
        query_id: query_id.to_owned(),
        entries,
    })
}

fn lookup(store: &BoaStore, event: &EventSpec, id: &str) -> Result<BoaVector> {
    store.get(id).map_err(|_| {
        Error::NotFound(format!(
            "video `{id}` of event `{}` is not in the store",
            event.event_id
        ))
    })
}

/// One ranked list per query, each over exactly the event's database.
pub fn query_event(event: &EventSpec, store: &BoaStore) -> Result<Vec<RankedList>> {
    let candidates = event
        .database
        .iter()
        .map(|(id, _)| Ok((id.as_str(), lookup(store, event, id)?)))
        .collect::<Result<Vec<_>>>()?;
    let queries = event
        .queries
        .iter()
        .map(|q| Ok((q.as_str(), lookup(store, event, q)?)))
        .collect::<Result<Vec<_>>>()?;
    // indexed parallel collect keeps query order
    queries
        .par_iter()
        .map(|(qid, q)| rank(qid, q, &candidates))
        .collect()
}

/// Runs every event of the manifest on `workers` threads (0 = automatic).
/// Output is in manifest order regardless of `workers`.
pub fn query_manifest(
    manifest: &DatasetManifest,
    store: &BoaStore,
    workers: usize,
) -> Result<Vec<RankedList>> {
    let per_event: Vec<Result<Vec<RankedList>>> = with_workers(workers, || {
        manifest
            .events
            .par_iter()
            .map(|e| query_event(e, store))
            .collect()
    })?;
    let mut out = Vec::new();
    for lists in per_event {
        out.extend(lists?);
    }
    Ok(out)
}

/// `query_id<TAB>rank<TAB>video_id<TAB>distance`, ranks from 1, distance to
/// 17 significant digits.
pub fn format_ranked_lists(lists: &[RankedList]) -> String {
    let mut out = String::new();
    for list in lists {
        for (i, e) in list.entries.iter().enumerate() {
            writeln!(out, "{}\t{}\t{}\t{:.16e}", list.query_id, i + 1, e.video_id, e.distance).unwrap();
        }
    }
    out
}

pub fn parse_ranked_lists(text: &str, source: &str) -> Result<Vec<RankedList>> {
    let mut lists: Vec<RankedList> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let at = || format!("line {}", n + 1);
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::format(source, at(), format!("expected 4 tab-separated fields, got {}", fields.len())));
        }
        let rank: usize = fields[1]
            .parse()
            .map_err(|_| Error::format(source, at(), format!("bad rank `{}`", fields[1])))?;
        let distance: f64 = fields[3]
            .parse()
            .ok()
            .filter(|d: &f64| d.is_finite() && *d >= 0.0)
            .ok_or_else(|| Error::format(source, at(), format!("bad distance `{}`", fields[3])))?;
        let continues = lists.last().is_some_and(|l| l.query_id == fields[0]);
        if !continues {
            if lists.iter().any(|l| l.query_id == fields[0]) {
                return Err(Error::format(source, at(), format!("query `{}` appears in two blocks", fields[0])));
            }
            lists.push(RankedList {
                query_id: fields[0].to_owned(),
                entries: Vec::new(),
            });
        }
        let list = lists.last_mut().unwrap();
        if rank != list.entries.len() + 1 {
            return Err(Error::format(
                source,
                at(),
                format!("rank {rank} out of sequence for query `{}`", list.query_id),
            ));
        }
        list.entries.push(RankedEntry {
            video_id: fields[2].to_owned(),
            distance,
        });
    }
    Ok(lists)
}

pub fn write_ranked_lists(lists: &[RankedList], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_ranked_lists(lists)).map_err(|e| Error::io(path, e))
}

pub fn read_ranked_lists(path: impl AsRef<Path>) -> Result<Vec<RankedList>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ranked_lists(&text, &path.display().to_string())
}
