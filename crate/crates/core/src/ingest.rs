//! Session log parsing (CSV and JSONL) and corpus encoding.

use std::io::{BufRead, BufReader, Read};

use chrono::{DateTime, FixedOffset};
use serde::Deserialize;

use crate::corpus::{ActionAlphabet, EncodedCorpus, Sequence};
use crate::error::{Error, Result};

/// One raw log row. `line` is the 1-based line it came from and doubles
/// as the file-order tiebreak when timestamps collide.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawEvent {
    pub session_id: String,
    pub timestamp: String,
    pub action: String,
    pub line: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogFormat {
    Csv,
    Jsonl,
}

impl std::str::FromStr for LogFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(LogFormat::Csv),
            "jsonl" => Ok(LogFormat::Jsonl),
            other => Err(Error::InvalidArgument(format!(
                "unknown log format {other:?}, expected csv|jsonl"
            ))),
        }
    }
}

/// What to do with actions outside the alphabet during encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownHandling {
    #[default]
    Strict,
    Drop,
}

impl std::str::FromStr for UnknownHandling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(UnknownHandling::Strict),
            "drop" => Ok(UnknownHandling::Drop),
            other => Err(Error::InvalidArgument(format!(
                "unknown action handling {other:?}, expected strict|drop"
            ))),
        }
    }
}

const CSV_HEADER: &str = "session_id,timestamp,action";

fn parse_timestamp(raw: &str, line: usize) -> Result<DateTime<FixedOffset>> {
    DateTime::parse_from_rfc3339(raw).map_err(|e| Error::Format {
        line,
        message: format!("unparseable timestamp {raw:?}: {e}"),
    })
}

fn validate_event(event: RawEvent) -> Result<RawEvent> {
    if event.session_id.is_empty() {
        return Err(Error::Format {
            line: event.line,
            message: "empty session_id".into(),
        });
    }
    if event.action.is_empty() {
        return Err(Error::Format {
            line: event.line,
            message: "empty action".into(),
        });
    }
    parse_timestamp(&event.timestamp, event.line)?;
    Ok(event)
}

/// Parse a log stream into events in file order. Empty input yields an
/// empty list, not an error.
pub fn parse(input: impl Read, format: LogFormat) -> Result<Vec<RawEvent>> {
    let reader = BufReader::new(input);
    match format {
        LogFormat::Csv => parse_csv(reader),
        LogFormat::Jsonl => parse_jsonl(reader),
    }
}

fn parse_csv(reader: impl BufRead) -> Result<Vec<RawEvent>> {
    let mut events = Vec::new();
    let mut saw_header = false;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let text = line?;
        if text.trim().is_empty() {
            continue;
        }
        if !saw_header {
            if text.trim() != CSV_HEADER {
                return Err(Error::Format {
                    line: line_no,
                    message: format!("expected header {CSV_HEADER:?}, found {text:?}"),
                });
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = text.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Format {
                line: line_no,
                message: format!("expected 3 comma-separated fields, found {}", fields.len()),
            });
        }
        events.push(validate_event(RawEvent {
            session_id: fields[0].trim().to_string(),
            timestamp: fields[1].trim().to_string(),
            action: fields[2].trim().to_string(),
            line: line_no,
        })?);
    }
    Ok(events)
}

#[derive(Deserialize)]
struct JsonlRow {
    session_id: String,
    timestamp: String,
    action: String,
}

fn parse_jsonl(reader: impl BufRead) -> Result<Vec<RawEvent>> {
    let mut events = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let text = line?;
        if text.trim().is_empty() {
            continue;
        }
        let row: JsonlRow = serde_json::from_str(&text).map_err(|e| Error::Format {
            line: line_no,
            message: format!("invalid JSONL record: {e}"),
        })?;
        events.push(validate_event(RawEvent {
            session_id: row.session_id,
            timestamp: row.timestamp,
            action: row.action,
            line: line_no,
        })?);
    }
    Ok(events)
}

/// Alphabet from the distinct action names in first-appearance order.
pub fn build_alphabet(events: &[RawEvent]) -> Result<ActionAlphabet> {
    if events.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot build an alphabet from zero events".into(),
        ));
    }
    let mut symbols: Vec<String> = Vec::new();
    for event in events {
        if !symbols.iter().any(|s| *s == event.action) {
            symbols.push(event.action.clone());
        }
    }
    ActionAlphabet::new(symbols)
}

/// Group events by session, sort within session by timestamp with file
/// order as tiebreak, and encode against the alphabet. Sessions appear
/// in order of first appearance. A session left empty by `drop` handling
/// is omitted with a warning on stderr.
pub fn encode(
    events: &[RawEvent],
    alphabet: &ActionAlphabet,
    unknown: UnknownHandling,
) -> Result<EncodedCorpus> {
    let mut session_order: Vec<&str> = Vec::new();
    let mut grouped: std::collections::HashMap<&str, Vec<&RawEvent>> =
        std::collections::HashMap::new();
    for event in events {
        let bucket = grouped.entry(&event.session_id).or_default();
        if bucket.is_empty() {
            session_order.push(&event.session_id);
        }
        bucket.push(event);
    }

    let mut sequences = Vec::with_capacity(session_order.len());
    for session in session_order {
        let mut session_events = grouped.remove(session).expect("grouped above");
        let mut keys = Vec::with_capacity(session_events.len());
        for e in &session_events {
            keys.push(parse_timestamp(&e.timestamp, e.line)?);
        }
        let mut order: Vec<usize> = (0..session_events.len()).collect();
        order.sort_by_key(|&i| (keys[i], session_events[i].line));
        session_events = order.iter().map(|&i| session_events[i]).collect();

        let mut observations = Vec::with_capacity(session_events.len());
        for event in session_events {
            match alphabet.index_of(&event.action) {
                Some(k) => observations.push(k),
                None => match unknown {
                    UnknownHandling::Strict => {
                        return Err(Error::Encoding(format!(
                            "unknown action {:?} at line {} (session {:?})",
                            event.action, event.line, event.session_id
                        )));
                    }
                    UnknownHandling::Drop => {}
                },
            }
        }
        if observations.is_empty() {
            eprintln!("warning: session {session:?} has no events left after dropping unknown actions; omitted");
            continue;
        }
        sequences.push(Sequence::new(session, observations)?);
    }

    EncodedCorpus::new(alphabet.clone(), sequences)
}
