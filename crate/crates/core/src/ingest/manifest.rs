//! Event dataset manifests.
//!
//! Line-oriented UTF-8. Blank lines and `#` comments are ignored.
//!
//! ```text
//! # optional attribute dimensionality
//! dim 1000
//! event 1
//! query q001
//! db+ v017
//! db- v342
//! ```
//!
//! `query`, `db+` and `db-` lines attach to the most recent `event` line.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relevance {
    Positive,
    Negative,
}

/// Per-event sizes: queries, positive and negative database videos.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EventCounts {
    pub queries: usize,
    pub positives: usize,
    pub negatives: usize,
}

impl EventCounts {
    pub const fn new(queries: usize, positives: usize, negatives: usize) -> Self {
        EventCounts {
            queries,
            positives,
            negatives,
        }
    }

    pub fn database(&self) -> usize {
        self.positives + self.negatives
    }

    pub fn videos(&self) -> usize {
        self.queries + self.database()
    }
}

impl std::ops::Add for EventCounts {
    type Output = EventCounts;

    fn add(self, rhs: EventCounts) -> EventCounts {
        EventCounts::new(
            self.queries + rhs.queries,
            self.positives + rhs.positives,
            self.negatives + rhs.negatives,
        )
    }
}

/// Per-event (Q, Db+, Db-) of the 13 EVVE events, in event-id order.
pub const EVVE_EVENT_COUNTS: [EventCounts; 13] = [
    EventCounts::new(13, 27, 122),
    EventCounts::new(32, 64, 143),
    EventCounts::new(9, 19, 60),
    EventCounts::new(36, 72, 27),
    EventCounts::new(87, 174, 227),
    EventCounts::new(44, 88, 100),
    EventCounts::new(4, 10, 100),
    EventCounts::new(51, 104, 67),
    EventCounts::new(14, 29, 56),
    EventCounts::new(19, 39, 135),
    EventCounts::new(215, 431, 67),
    EventCounts::new(73, 148, 9),
    EventCounts::new(23, 47, 10),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventSpec {
    pub event_id: String,
    pub queries: Vec<String>,
    pub database: Vec<(String, Relevance)>,
}

impl EventSpec {
    pub fn new(event_id: impl Into<String>) -> Self {
        EventSpec {
            event_id: event_id.into(),
            queries: Vec::new(),
            database: Vec::new(),
        }
    }

    pub fn positives(&self) -> impl Iterator<Item = &str> {
        self.database
            .iter()
            .filter(|(_, r)| *r == Relevance::Positive)
            .map(|(id, _)| id.as_str())
    }

    pub fn counts(&self) -> EventCounts {
        let positives = self.positives().count();
        EventCounts::new(self.queries.len(), positives, self.database.len() - positives)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |message: String| Error::Validation {
            event: self.event_id.clone(),
            message,
        };
        if self.queries.is_empty() {
            return Err(fail("event has no queries".into()));
        }
        if self.database.is_empty() {
            return Err(fail("event has no database videos".into()));
        }
        let mut queries = HashSet::with_capacity(self.queries.len());
        for q in &self.queries {
            if !queries.insert(q.as_str()) {
                return Err(fail(format!("duplicate query video `{q}`")));
            }
        }
        let mut db = HashSet::with_capacity(self.database.len());
        for (id, _) in &self.database {
            if queries.contains(id.as_str()) {
                return Err(fail(format!("video `{id}` is both a query and a database video")));
            }
            if !db.insert(id.as_str()) {
                return Err(fail(format!("duplicate database video `{id}`")));
            }
        }
        if self.positives().next().is_none() {
            return Err(fail("event has no positive database videos".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DatasetManifest {
    pub dim: Option<usize>,
    pub events: Vec<EventSpec>,
}

impl DatasetManifest {
    pub fn validate(&self) -> Result<()> {
        if let Some(0) = self.dim {
            return Err(Error::invalid("manifest dim must be >= 1"));
        }
        let mut ids = HashSet::with_capacity(self.events.len());
        for event in &self.events {
            if !ids.insert(event.event_id.as_str()) {
                return Err(Error::Validation {
                    event: event.event_id.clone(),
                    message: "duplicate event id".into(),
                });
            }
            event.validate()?;
        }
        Ok(())
    }

    pub fn event(&self, event_id: &str) -> Option<&EventSpec> {
        self.events.iter().find(|e| e.event_id == event_id)
    }

    /// Every distinct video id (queries and database), sorted.
    pub fn video_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self
            .events
            .iter()
            .flat_map(|e| {
                e.queries
                    .iter()
                    .map(String::as_str)
                    .chain(e.database.iter().map(|(id, _)| id.as_str()))
            })
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn count_report(&self) -> CountReport {
        CountReport {
            rows: self
                .events
                .iter()
                .map(|e| (e.event_id.clone(), e.counts()))
                .collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut manifest = DatasetManifest::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |message: String| Error::ManifestSyntax {
                line: n + 1,
                message,
            };
            let mut parts = line.split_whitespace();
            let directive = parts.next().unwrap();
            let arg = parts
                .next()
                .ok_or_else(|| syntax(format!("`{directive}` needs an argument")))?;
            if let Some(extra) = parts.next() {
                return Err(syntax(format!("unexpected token `{extra}`")));
            }
            match directive {
                "dim" => {
                    if manifest.dim.is_some() {
                        return Err(syntax("`dim` given twice".into()));
                    }
                    let dim = arg
                        .parse::<usize>()
                        .ok()
                        .filter(|&d| d > 0)
                        .ok_or_else(|| syntax(format!("invalid dim `{arg}`")))?;
                    manifest.dim = Some(dim);
                }
                "event" => manifest.events.push(EventSpec::new(arg)),
                "query" | "db+" | "db-" => {
                    let event = manifest
                        .events
                        .last_mut()
                        .ok_or_else(|| syntax(format!("`{directive}` before any `event` line")))?;
                    match directive {
                        "query" => event.queries.push(arg.to_owned()),
                        "db+" => event.database.push((arg.to_owned(), Relevance::Positive)),
                        _ => event.database.push((arg.to_owned(), Relevance::Negative)),
                    }
                }
                other => return Err(syntax(format!("unknown directive `{other}`"))),
            }
        }
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        if let Some(dim) = self.dim {
            writeln!(out, "dim {dim}").unwrap();
        }
        for event in &self.events {
            writeln!(out, "event {}", event.event_id).unwrap();
            for q in &event.queries {
                writeln!(out, "query {q}").unwrap();
            }
            for (id, rel) in &event.database {
                let tag = match rel {
                    Relevance::Positive => "db+",
                    Relevance::Negative => "db-",
                };
                writeln!(out, "{tag} {id}").unwrap();
            }
        }
        out
    }
}

pub fn parse_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    DatasetManifest::parse(&text)
}

/// Per-event (Q, Db+, Db-) table with an `All` total row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountReport {
    pub rows: Vec<(String, EventCounts)>,
}

impl CountReport {
    pub fn total(&self) -> EventCounts {
        self.rows
            .iter()
            .fold(EventCounts::default(), |acc, (_, c)| acc + *c)
    }
}

impl fmt::Display for CountReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "event\tQ\tDb+\tDb-")?;
        for (id, c) in &self.rows {
            writeln!(f, "{id}\t{}\t{}\t{}", c.queries, c.positives, c.negatives)?;
        }
        let t = self.total();
        writeln!(f, "All\t{}\t{}\t{}", t.queries, t.positives, t.negatives)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "\
# two events
dim 4
event e1
query a
db+ b
db- c   # trailing comment
event e2
query d
db+ e
db+ f
";

    #[test]
    fn parses_and_counts() {
        let m = DatasetManifest::parse(SMALL).unwrap();
        assert_eq!(m.dim, Some(4));
        assert_eq!(m.events.len(), 2);
        let report = m.count_report();
        assert_eq!(report.rows[0].1, EventCounts::new(1, 1, 1));
        assert_eq!(report.rows[1].1, EventCounts::new(1, 2, 0));
        assert_eq!(report.total(), EventCounts::new(2, 3, 1));
        assert_eq!(m.video_ids(), vec!["a", "b", "c", "d", "e", "f"]);
        assert_eq!(DatasetManifest::parse(&m.to_text()).unwrap(), m);
    }

    fn validation_event(text: &str) -> String {
        match DatasetManifest::parse(text) {
            Err(Error::Validation { event, .. }) => event,
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn query_database_overlap() {
        assert_eq!(validation_event("event x\nquery a\ndb+ b\ndb- a\n"), "x");
    }

    #[test]
    fn other_validation_failures() {
        assert_eq!(validation_event("event x\nquery a\ndb- b\n"), "x");
        assert_eq!(validation_event("event x\ndb+ b\n"), "x");
        assert_eq!(validation_event("event x\nquery a\n"), "x");
        assert_eq!(validation_event("event x\nquery a\nquery a\ndb+ b\n"), "x");
        assert_eq!(validation_event("event x\nquery a\ndb+ b\ndb- b\n"), "x");
        assert_eq!(
            validation_event("event x\nquery a\ndb+ b\nevent x\nquery c\ndb+ d\n"),
            "x"
        );
    }

    #[test]
    fn syntax_errors_name_line() {
        for (text, line) in [
            ("query a\n", 1),
            ("event e\nquery a\ndb* b\n", 3),
            ("event e\n\nquery\n", 3),
            ("dim 0\n", 1),
            ("event e extra\n", 1),
        ] {
            match DatasetManifest::parse(text) {
                Err(Error::ManifestSyntax { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn evve_totals() {
        let total = EVVE_EVENT_COUNTS
            .iter()
            .fold(EventCounts::default(), |a, c| a + *c);
        assert_eq!(total, EventCounts::new(620, 1252, 1123));
        assert_eq!(total.videos(), 2995);
    }
}
