use std::collections::{BTreeMap, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::ingest::{DatasetManifest, EventSpec};
use crate::retrieval::RankedList;

/// Non-interpolated average precision.
///
/// `relevant` is the number of positives in the whole database, so
/// positives missing from `flags` count as retrieved at infinite rank.
pub fn average_precision(flags: &[bool], relevant: usize) -> Result<f64> {
    if relevant == 0 {
        return Err(Error::invalid("average precision needs at least one relevant item"));
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (k, _) in flags.iter().enumerate().filter(|(_, &f)| f) {
        hits += 1;
        sum += hits as f64 / (k + 1) as f64;
    }
    if hits > relevant {
        return Err(Error::invalid(format!(
            "{hits} relevant flags in the ranking but only {relevant} relevant items"
        )));
    }
    Ok(sum / relevant as f64)
}

pub fn mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("mean of an empty set"));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Unweighted mean of per-event mAPs.
pub fn avg_map(event_maps: &[f64]) -> Result<f64> {
    mean(event_maps)
}

/// Positive database videos per event.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelevanceJudgments {
    positives: BTreeMap<String, HashSet<String>>,
}

impl RelevanceJudgments {
    pub fn from_manifest(manifest: &DatasetManifest) -> Self {
        RelevanceJudgments {
            positives: manifest
                .events
                .iter()
                .map(|e| (e.event_id.clone(), e.positives().map(str::to_owned).collect()))
                .collect(),
        }
    }

    pub fn positives(&self, event_id: &str) -> Option<&HashSet<String>> {
        self.positives.get(event_id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryAp {
    pub query_id: String,
    pub ap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventResult {
    pub event_id: String,
    /// Fraction in [0, 1].
    pub map: f64,
    pub queries: Vec<QueryAp>,
}

/// Mean AP over the event's queries.
pub fn map_per_event(
    event: &EventSpec,
    lists: &[RankedList],
    judgments: &RelevanceJudgments,
) -> Result<EventResult> {
    let positives = judgments.positives(&event.event_id).ok_or_else(|| {
        Error::invalid(format!("no relevance judgments for event `{}`", event.event_id))
    })?;
    let by_query: HashMap<&str, &RankedList> =
        lists.iter().map(|l| (l.query_id.as_str(), l)).collect();
    let mut queries = Vec::with_capacity(event.queries.len());
    for q in &event.queries {
        let list = by_query.get(q.as_str()).ok_or_else(|| {
            Error::invalid(format!("no ranked list for query `{q}` of event `{}`", event.event_id))
        })?;
        let flags: Vec<bool> = list.ids().map(|id| positives.contains(id)).collect();
        queries.push(QueryAp {
            query_id: q.clone(),
            ap: average_precision(&flags, positives.len())?,
        });
    }
    let aps: Vec<f64> = queries.iter().map(|q| q.ap).collect();
    Ok(EventResult {
        event_id: event.event_id.clone(),
        map: mean(&aps)?,
        queries,
    })
}

/// Per-event and overall figures for one method.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub events: Vec<EventResult>,
    /// Fraction in [0, 1], unrounded.
    pub avg_map: f64,
}

impl EvalReport {
    pub fn event_maps(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.map).collect()
    }
}

/// Scores every event of the manifest, in manifest order.
pub fn evaluate(manifest: &DatasetManifest, lists: &[RankedList]) -> Result<EvalReport> {
    let judgments = RelevanceJudgments::from_manifest(manifest);
    let events = manifest
        .events
        .iter()
        .map(|e| map_per_event(e, lists, &judgments))
        .collect::<Result<Vec<_>>>()?;
    let maps: Vec<f64> = events.iter().map(|e| e.map).collect();
    Ok(EvalReport {
        avg_map: avg_map(&maps)?,
        events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retrieval::RankedEntry;

    #[test]
    fn ap_examples() {
        let ap = average_precision(&[true, false, true], 2).unwrap();
        assert!((ap - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
        assert_eq!(average_precision(&[true, true, false], 2).unwrap(), 1.0);
        assert!((average_precision(&[false, false, true], 1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ap_counts_unretrieved_positives() {
        assert_eq!(average_precision(&[true], 2).unwrap(), 0.5);
        assert_eq!(average_precision(&[false, false], 3).unwrap(), 0.0);
    }

    #[test]
    fn ap_errors() {
        assert!(average_precision(&[true], 0).is_err());
        assert!(average_precision(&[true, true], 1).is_err());
    }

    fn list(q: &str, ids: &[&str]) -> RankedList {
        RankedList {
            query_id: q.into(),
            entries: ids
                .iter()
                .enumerate()
                .map(|(i, id)| RankedEntry {
                    video_id: (*id).into(),
                    distance: i as f64,
                })
                .collect(),
        }
    }

    #[test]
    fn perfect_single_query() {
        let m = DatasetManifest::parse("event e\nquery q\ndb+ a\ndb- b\n").unwrap();
        let report = evaluate(&m, &[list("q", &["a", "b"])]).unwrap();
        assert_eq!(report.events[0].map, 1.0);
        assert_eq!(report.avg_map, 1.0);
    }

    #[test]
    fn map_is_unweighted() {
        let m = DatasetManifest::parse(
            "event e1\nquery q1\nquery q2\ndb+ a\ndb- b\nevent e2\nquery q3\ndb+ c\ndb- d\n",
        )
        .unwrap();
        let lists = [
            list("q1", &["a", "b"]),
            list("q2", &["b", "a"]),
            list("q3", &["d", "c"]),
        ];
        let report = evaluate(&m, &lists).unwrap();
        assert_eq!(report.events[0].map, 0.75);
        assert_eq!(report.events[1].map, 0.5);
        assert_eq!(report.avg_map, 0.625);
    }

    #[test]
    fn missing_list_is_error() {
        let m = DatasetManifest::parse("event e\nquery q\nquery r\ndb+ a\n").unwrap();
        assert!(evaluate(&m, &[list("q", &["a"])]).is_err());
    }
}
