//! Reader for the XES subset used by common benchmark logs.
//!
//! Recognized elements are `log`, `trace` and `event` plus the attribute
//! elements `string`, `date`, `int`, `float`, `boolean` and `id`. Keys are
//! mapped as follows: `concept:name` becomes the activity of an event or the
//! case id of a trace, `time:timestamp` becomes `timestamp`, and
//! `org:resource` becomes `resource`. Other keys are kept verbatim.
//! Extensions, globals and classifiers are skipped.

use quick_xml::events::{BytesStart, Event as XmlEvent};
use quick_xml::Reader;
use thiserror::Error;

use super::timestamp::parse_iso8601;
use crate::log::{AttributeValue, Event, EventLog, ACTIVITY, RESOURCE, TIMESTAMP};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum XesError {
    #[error("malformed XML at line {line}, column {column}: {message}")]
    Xml {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: expected a <log> root element, found <{found}>")]
    NotXes {
        line: usize,
        column: usize,
        found: String,
    },
    #[error("line {line}, column {column}: attribute `{key}` has invalid {kind} value `{value}`")]
    InvalidValue {
        line: usize,
        column: usize,
        key: String,
        kind: String,
        value: String,
    },
    #[error("trace {trace} (case `{case_id}`), event {event}: missing timestamp")]
    MissingTimestamp {
        trace: usize,
        event: usize,
        case_id: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scope {
    Log,
    Trace,
    Event,
    Skipped,
}

#[derive(Default)]
struct PendingEvent {
    id: Option<String>,
    activity: Option<String>,
    timestamp: Option<i64>,
    extra: Vec<(String, AttributeValue)>,
}

#[derive(Default)]
struct PendingTrace {
    case_id: Option<String>,
    events: Vec<PendingEvent>,
}

fn line_col(input: &[u8], pos: usize) -> (usize, usize) {
    let upto = &input[..pos.min(input.len())];
    let line = upto.iter().filter(|&&b| b == b'\n').count() + 1;
    let line_start = upto.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
    let column = String::from_utf8_lossy(&upto[line_start..]).chars().count() + 1;
    (line, column)
}

struct Parser<'a> {
    input: &'a [u8],
    reader: Reader<&'a [u8]>,
    scopes: Vec<Scope>,
    trace: Option<PendingTrace>,
    event: Option<PendingEvent>,
    trace_index: usize,
    events: Vec<Event>,
    warned: bool,
}

impl<'a> Parser<'a> {
    fn position(&self) -> (usize, usize) {
        line_col(self.input, self.reader.buffer_position() as usize)
    }

    fn xml_error(&self, message: impl ToString) -> XesError {
        let (line, column) = line_col(self.input, self.reader.error_position() as usize);
        XesError::Xml {
            line,
            column,
            message: message.to_string(),
        }
    }

    fn run(mut self) -> Result<EventLog, XesError> {
        loop {
            let ev = self.reader.read_event().map_err(|e| self.xml_error(e))?;
            match ev {
                XmlEvent::Start(start) => {
                    let scope = self.open(&start)?;
                    self.scopes.push(scope);
                }
                XmlEvent::Empty(start) => {
                    let scope = self.open(&start)?;
                    self.close(scope)?;
                }
                XmlEvent::End(_) => {
                    let scope = self
                        .scopes
                        .pop()
                        .ok_or_else(|| self.xml_error("unbalanced closing tag"))?;
                    self.close(scope)?;
                }
                XmlEvent::Eof => break,
                _ => {}
            }
        }
        if !self.scopes.is_empty() {
            return Err(self.xml_error("unexpected end of input"));
        }
        Ok(EventLog::from_events(self.events))
    }

    fn open(&mut self, start: &BytesStart<'_>) -> Result<Scope, XesError> {
        let name = String::from_utf8_lossy(start.local_name().as_ref()).into_owned();
        let parent = self.scopes.last().copied();
        let scope = match (parent, name.as_str()) {
            (None, "log") => Scope::Log,
            (None, _) => {
                let (line, column) = self.position();
                return Err(XesError::NotXes {
                    line,
                    column,
                    found: name,
                });
            }
            (Some(Scope::Log), "trace") => {
                self.trace_index += 1;
                self.trace = Some(PendingTrace::default());
                Scope::Trace
            }
            (Some(Scope::Trace), "event") => {
                self.event = Some(PendingEvent::default());
                Scope::Event
            }
            (Some(Scope::Trace | Scope::Event), kind)
                if matches!(kind, "string" | "date" | "int" | "float" | "boolean" | "id") =>
            {
                self.attribute(parent.expect("matched"), kind, start)?;
                Scope::Skipped
            }
            (Some(Scope::Log), "extension" | "global" | "classifier") => {
                if !self.warned {
                    log::warn!("XES extensions, globals and classifiers are ignored");
                    self.warned = true;
                }
                Scope::Skipped
            }
            _ => Scope::Skipped,
        };
        Ok(scope)
    }

    fn attribute(
        &mut self,
        owner: Scope,
        kind: &str,
        start: &BytesStart<'_>,
    ) -> Result<(), XesError> {
        let mut key = None;
        let mut value = None;
        for attr in start.attributes() {
            let attr = attr.map_err(|e| self.xml_error(e))?;
            let text = attr
                .unescape_value()
                .map_err(|e| self.xml_error(e))?
                .into_owned();
            match attr.key.as_ref() {
                b"key" => key = Some(text),
                b"value" => value = Some(text),
                _ => {}
            }
        }
        let (Some(key), Some(raw)) = (key, value) else {
            return Ok(());
        };
        let invalid = |this: &Self| {
            let (line, column) = this.position();
            XesError::InvalidValue {
                line,
                column,
                key: key.clone(),
                kind: kind.to_string(),
                value: raw.clone(),
            }
        };

        if owner == Scope::Trace {
            if key == "concept:name" {
                if let Some(t) = self.trace.as_mut() {
                    t.case_id = Some(raw.clone());
                }
            }
            return Ok(());
        }

        let Some(event) = self.event.as_mut() else {
            return Ok(());
        };
        match key.as_str() {
            "concept:name" => event.activity = Some(raw),
            "identity:id" => event.id = Some(raw),
            "time:timestamp" | TIMESTAMP => {
                let ts = parse_iso8601(&raw).map_err(|_| invalid(self))?;
                if let Some(ev) = self.event.as_mut() {
                    ev.timestamp = Some(ts);
                }
            }
            _ => {
                let value = match kind {
                    "date" => parse_iso8601(&raw).map(AttributeValue::Timestamp).ok(),
                    "int" => raw.trim().parse().map(AttributeValue::Integer).ok(),
                    "float" => raw.trim().parse().map(AttributeValue::Real).ok(),
                    "boolean" => match raw.trim() {
                        "true" | "false" => Some(AttributeValue::Text(raw.trim().to_string())),
                        _ => None,
                    },
                    _ => Some(AttributeValue::Text(raw.clone())),
                };
                let Some(value) = value else {
                    return Err(invalid(self));
                };
                let name = if key == "org:resource" {
                    RESOURCE.to_string()
                } else {
                    key.clone()
                };
                if let Some(ev) = self.event.as_mut() {
                    ev.extra.push((name, value));
                }
            }
        }
        Ok(())
    }

    fn close(&mut self, scope: Scope) -> Result<(), XesError> {
        match scope {
            Scope::Event => {
                if let (Some(ev), Some(trace)) = (self.event.take(), self.trace.as_mut()) {
                    trace.events.push(ev);
                }
            }
            Scope::Trace => {
                if let Some(trace) = self.trace.take() {
                    self.finish_trace(trace)?;
                }
            }
            Scope::Log | Scope::Skipped => {}
        }
        Ok(())
    }

    fn finish_trace(&mut self, trace: PendingTrace) -> Result<(), XesError> {
        let trace_no = self.trace_index;
        let case_id = trace.case_id.unwrap_or_else(|| format!("trace-{trace_no}"));
        for (k, pending) in trace.events.into_iter().enumerate() {
            let Some(ts) = pending.timestamp else {
                return Err(XesError::MissingTimestamp {
                    trace: trace_no,
                    event: k + 1,
                    case_id,
                });
            };
            let id = pending
                .id
                .unwrap_or_else(|| format!("{trace_no}:{}", k + 1));
            let mut event = Event::new(id, case_id.as_str(), pending.activity.as_deref(), ts)
                .expect("timestamps are validated non-negative");
            for (name, value) in pending.extra {
                if name == ACTIVITY {
                    continue;
                }
                event
                    .set_attribute(name, value)
                    .expect("non-timestamp attribute");
            }
            self.events.push(event);
        }
        Ok(())
    }
}

/// Parses an XES document. Events are ordered by timestamp within each trace.
pub fn parse_xes(input: &[u8]) -> Result<EventLog, XesError> {
    let mut reader = Reader::from_reader(input);
    reader.config_mut().trim_text(true);
    Parser {
        input,
        reader,
        scopes: Vec::new(),
        trace: None,
        event: None,
        trace_index: 0,
        events: Vec::new(),
        warned: false,
    }
    .run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::log::{AttributeValue as V, COST};

    const FIXTURE: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<log xes.version="1.0">
  <extension name="Concept" prefix="concept" uri="http://www.xes-standard.org/concept.xesext"/>
  <global scope="event"><string key="concept:name" value="__INVALID__"/></global>
  <classifier name="Activity" keys="concept:name"/>
  <string key="concept:name" value="fixture"/>
  <trace>
    <string key="concept:name" value="case-1"/>
    <event>
      <string key="concept:name" value="register"/>
      <string key="org:resource" value="alice"/>
      <date key="time:timestamp" value="2020-01-01T10:00:00.000+01:00"/>
      <float key="cost" value="12.5"/>
    </event>
    <event>
      <string key="concept:name" value="check"/>
      <string key="org:resource" value="bob"/>
      <date key="time:timestamp" value="2020-01-01T09:30:00Z"/>
      <int key="priority" value="3"/>
      <boolean key="urgent" value="true"/>
    </event>
    <event>
      <string key="concept:name" value="decide"/>
      <date key="time:timestamp" value="2020-01-02T00:00:00Z"/>
      <list key="items"><string key="x" value="y"/></list>
    </event>
  </trace>
  <trace>
    <string key="concept:name" value="case-2"/>
    <event>
      <string key="concept:name" value="register"/>
      <string key="org:resource" value="carol"/>
      <date key="time:timestamp" value="2020-01-03T00:00:00Z"/>
    </event>
    <event>
      <id key="identity:id" value="custom-id"/>
      <date key="time:timestamp" value="2020-01-03T01:00:00Z"/>
    </event>
  </trace>
</log>"#;

    #[test]
    fn fixture_fields() {
        let log = parse_xes(FIXTURE.as_bytes()).unwrap();
        assert_eq!(log.case_count(), 2);
        assert_eq!(log.event_count(), 5);

        let c1 = log.case("case-1").unwrap();
        assert_eq!(c1.trace(), ["register", "check", "decide"]);
        let e = &c1.events()[0];
        assert_eq!(e.attribute(RESOURCE), &V::from("alice"));
        assert_eq!(e.attribute(COST), &V::Real(12.5));
        assert_eq!(e.timestamp(), 1_577_869_200_000);
        assert_eq!(e.event_id(), "1:1");
        let e = &c1.events()[1];
        assert_eq!(e.attribute(RESOURCE), &V::from("bob"));
        assert_eq!(e.attribute("priority"), &V::Integer(3));
        assert_eq!(e.attribute("urgent"), &V::from("true"));
        assert_eq!(e.attribute("org:resource"), &V::Absent);
        assert_eq!(c1.events()[2].attribute(RESOURCE), &V::Absent);
        assert_eq!(c1.events()[2].attribute("items"), &V::Absent);

        let c2 = log.case("case-2").unwrap();
        assert_eq!(c2.events()[0].attribute(RESOURCE), &V::from("carol"));
        assert_eq!(c2.events()[1].activity(), None);
        assert_eq!(c2.events()[1].event_id(), "custom-id");
    }

    #[test]
    fn empty_log() {
        let log = parse_xes(b"<log xes.version=\"1.0\"></log>").unwrap();
        assert_eq!(log.case_count(), 0);
        let log = parse_xes(b"<log/>").unwrap();
        assert!(log.is_empty());
    }

    #[test]
    fn missing_timestamp_names_trace() {
        let doc = r#"<log>
<trace><string key="concept:name" value="ok"/><event><date key="time:timestamp" value="2020-01-01"/></event></trace>
<trace><string key="concept:name" value="bad"/><event><string key="concept:name" value="a"/></event></trace>
</log>"#;
        let err = parse_xes(doc.as_bytes()).unwrap_err();
        assert_eq!(
            err,
            XesError::MissingTimestamp {
                trace: 2,
                event: 1,
                case_id: "bad".into()
            }
        );
    }

    #[test]
    fn malformed_xml_reports_position() {
        let doc = "<log>\n  <trace>\n    <event></trace>\n</log>";
        match parse_xes(doc.as_bytes()).unwrap_err() {
            XesError::Xml { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_root() {
        assert!(matches!(
            parse_xes(b"<html></html>").unwrap_err(),
            XesError::NotXes { .. }
        ));
    }

    #[test]
    fn bad_typed_value() {
        let doc = r#"<log><trace><event><date key="time:timestamp" value="2020-01-01"/><int key="n" value="x"/></event></trace></log>"#;
        assert!(matches!(
            parse_xes(doc.as_bytes()).unwrap_err(),
            XesError::InvalidValue { .. }
        ));
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            parse_xes(FIXTURE.as_bytes()).unwrap(),
            parse_xes(FIXTURE.as_bytes()).unwrap()
        );
    }
}
