//! The standardized route representation and its strict wire grammar.
//!
//! A route on the wire is exactly one JSON object, surrounded only by
//! whitespace:
//!
//! ```text
//! {"legs":[{"mode":"subway","line":"G","from":"A","to":"D"}, ...]}
//! ```
//!
//! `mode` is one of `subway`, `train`, `bus`, `walk`, `bike` (`train` is
//! canonicalized to `subway`); `line` is required for subway/bus legs and
//! omitted or null otherwise. Anything else — surrounding prose, a non-object
//! payload, an unknown mode term, a missing field, an empty name — is a
//! [`FormatViolation`]. Violations are data, not errors: they are one of the
//! quantities the evaluation engine measures.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::network::normalize_name;

/// The exact output grammar, suitable for embedding in a prompt.
pub const ROUTE_GRAMMAR: &str =
    r#"{"legs":[{"mode":"<subway|train|bus|walk|bike>","line":"<label, required for subway/bus>","from":"<station name>","to":"<station name>"}, ...]}"#;

/// Accepted transportation service terms, as they may appear in `mode`.
pub const ACCEPTED_MODE_TERMS: [&str; 5] = ["subway", "train", "bus", "walk", "bike"];

/// Canonical leg mode. `train` on the wire maps to `Subway`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LegMode {
    Subway,
    Bus,
    Walk,
    Bike,
}

impl LegMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            LegMode::Subway => "subway",
            LegMode::Bus => "bus",
            LegMode::Walk => "walk",
            LegMode::Bike => "bike",
        }
    }

    /// True for modes that ride a named line.
    pub fn requires_line(&self) -> bool {
        matches!(self, LegMode::Subway | LegMode::Bus)
    }

    fn from_term(term: &str) -> Option<Self> {
        match term.trim().to_lowercase().as_str() {
            "subway" | "train" => Some(LegMode::Subway),
            "bus" => Some(LegMode::Bus),
            "walk" => Some(LegMode::Walk),
            "bike" => Some(LegMode::Bike),
            _ => None,
        }
    }
}

impl fmt::Display for LegMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One step of a route.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leg {
    pub mode: LegMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<String>,
    pub from: String,
    pub to: String,
}

impl Leg {
    pub fn ride(mode: LegMode, line: impl Into<String>, from: impl Into<String>, to: impl Into<String>) -> Self {
        Self {
            mode,
            line: Some(line.into()),
            from: from.into(),
            to: to.into(),
        }
    }

    pub fn walk(from: impl Into<String>, to: impl Into<String>) -> Self {
        Self {
            mode: LegMode::Walk,
            line: None,
            from: from.into(),
            to: to.into(),
        }
    }

    pub fn bike(from: impl Into<String>, to: impl Into<String>) -> Self {
        Self {
            mode: LegMode::Bike,
            line: None,
            from: from.into(),
            to: to.into(),
        }
    }
}

/// An ordered list of legs; possibly empty. Chaining between legs is
/// validated separately, not enforced at parse time.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub legs: Vec<Leg>,
}

impl Route {
    pub fn new(legs: Vec<Leg>) -> Self {
        Self { legs }
    }

    pub fn empty() -> Self {
        Self { legs: Vec::new() }
    }
}

/// Why a summary text failed to be a route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationReason {
    /// Non-whitespace text outside the single JSON object.
    ExtraProse,
    /// No JSON object at all, or a payload of the wrong shape.
    NotAnObject,
    /// A `mode` value outside the accepted term list.
    BadModeTerm,
    /// A required key is absent (including `line` on subway/bus legs).
    MissingField,
    /// A station name that is empty after trimming.
    EmptyName,
}

impl fmt::Display for ViolationReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationReason::ExtraProse => "extra prose around the route object",
            ViolationReason::NotAnObject => "not a route object",
            ViolationReason::BadModeTerm => "unaccepted transportation term",
            ViolationReason::MissingField => "missing required field",
            ViolationReason::EmptyName => "empty station name",
        };
        f.write_str(s)
    }
}

/// A classified format violation with an excerpt of the offending text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormatViolation {
    pub reason: ViolationReason,
    pub offending_text: String,
}

impl FormatViolation {
    fn new(reason: ViolationReason, offending: &str) -> Self {
        Self {
            reason,
            offending_text: excerpt(offending),
        }
    }
}

/// Total outcome of parsing a summary text: every input maps to exactly one
/// of these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ParseOutcome {
    Route(Route),
    Violation(FormatViolation),
}

impl ParseOutcome {
    pub fn route(&self) -> Option<&Route> {
        match self {
            ParseOutcome::Route(r) => Some(r),
            ParseOutcome::Violation(_) => None,
        }
    }

    pub fn is_violation(&self) -> bool {
        matches!(self, ParseOutcome::Violation(_))
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("route invariant violated: {0}")]
pub struct InvariantViolation(pub String);

fn excerpt(text: &str) -> String {
    const MAX: usize = 80;
    let t = text.trim();
    if t.chars().count() <= MAX {
        t.to_string()
    } else {
        let cut: String = t.chars().take(MAX).collect();
        format!("{cut}…")
    }
}

/// Parse a summary text into a route, or classify why it is not one.
/// Never fails: the result is always a `Route` or a `FormatViolation`.
pub fn parse_route(text: &str) -> ParseOutcome {
    let trimmed = text.trim();
    let value: Value = match serde_json::from_str(trimmed) {
        Ok(v) => v,
        Err(_) => {
            // Not a single clean JSON value. Look for an object embedded in
            // prose to tell ExtraProse apart from NotAnObject.
            return match find_embedded_object(trimmed) {
                Some((before, after)) => {
                    let offending = if !before.trim().is_empty() { before } else { after };
                    ParseOutcome::Violation(FormatViolation::new(
                        ViolationReason::ExtraProse,
                        offending,
                    ))
                }
                None => ParseOutcome::Violation(FormatViolation::new(
                    ViolationReason::NotAnObject,
                    trimmed,
                )),
            };
        }
    };
    let Value::Object(map) = value else {
        return ParseOutcome::Violation(FormatViolation::new(ViolationReason::NotAnObject, trimmed));
    };
    if let Some(unknown) = map.keys().find(|k| k.as_str() != "legs") {
        return ParseOutcome::Violation(FormatViolation::new(ViolationReason::NotAnObject, unknown));
    }
    let Some(legs_value) = map.get("legs") else {
        return ParseOutcome::Violation(FormatViolation::new(
            ViolationReason::MissingField,
            "legs",
        ));
    };
    let Value::Array(raw_legs) = legs_value else {
        return ParseOutcome::Violation(FormatViolation::new(
            ViolationReason::NotAnObject,
            &legs_value.to_string(),
        ));
    };

    let mut legs = Vec::with_capacity(raw_legs.len());
    for raw in raw_legs {
        match parse_leg(raw) {
            Ok(leg) => legs.push(leg),
            Err(v) => return ParseOutcome::Violation(v),
        }
    }
    ParseOutcome::Route(Route::new(legs))
}

fn parse_leg(raw: &Value) -> Result<Leg, FormatViolation> {
    let Value::Object(leg) = raw else {
        return Err(FormatViolation::new(
            ViolationReason::NotAnObject,
            &raw.to_string(),
        ));
    };
    const LEG_KEYS: [&str; 4] = ["mode", "line", "from", "to"];
    if let Some(unknown) = leg.keys().find(|k| !LEG_KEYS.contains(&k.as_str())) {
        return Err(FormatViolation::new(ViolationReason::NotAnObject, unknown));
    }

    let mode_value = leg
        .get("mode")
        .ok_or_else(|| FormatViolation::new(ViolationReason::MissingField, "mode"))?;
    let mode = match mode_value {
        Value::String(s) => LegMode::from_term(s)
            .ok_or_else(|| FormatViolation::new(ViolationReason::BadModeTerm, s))?,
        other => {
            return Err(FormatViolation::new(
                ViolationReason::BadModeTerm,
                &other.to_string(),
            ))
        }
    };

    let line = match leg.get("line") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(other) => {
            return Err(FormatViolation::new(
                ViolationReason::NotAnObject,
                &other.to_string(),
            ))
        }
    };
    if mode.requires_line() && line.is_none() {
        return Err(FormatViolation::new(ViolationReason::MissingField, "line"));
    }

    let name = |key: &str| -> Result<String, FormatViolation> {
        match leg.get(key) {
            Some(Value::String(s)) => {
                if s.trim().is_empty() {
                    Err(FormatViolation::new(ViolationReason::EmptyName, key))
                } else {
                    Ok(s.clone())
                }
            }
            Some(other) => Err(FormatViolation::new(
                ViolationReason::NotAnObject,
                &other.to_string(),
            )),
            None => Err(FormatViolation::new(ViolationReason::MissingField, key)),
        }
    };

    Ok(Leg {
        mode,
        line,
        from: name("from")?,
        to: name("to")?,
    })
}

/// Scan for a JSON object embedded in prose. Returns the text before and
/// after the first parseable object, if any.
fn find_embedded_object(text: &str) -> Option<(&str, &str)> {
    for (idx, ch) in text.char_indices() {
        if ch != '{' {
            continue;
        }
        let tail = &text[idx..];
        let mut stream = serde_json::Deserializer::from_str(tail).into_iter::<Value>();
        if let Some(Ok(Value::Object(_))) = stream.next() {
            let end = idx + stream.byte_offset();
            return Some((&text[..idx], &text[end..]));
        }
    }
    None
}

/// Canonical single-line serialization: fixed key order (`mode`, `line`,
/// `from`, `to`), `line` omitted when absent, no superfluous whitespace.
/// `parse_route` on the output reproduces the route exactly.
pub fn serialize_route(route: &Route) -> Result<String, InvariantViolation> {
    for (i, leg) in route.legs.iter().enumerate() {
        if leg.mode.requires_line() && leg.line.is_none() {
            return Err(InvariantViolation(format!(
                "leg {i} ({}) has no line label",
                leg.mode
            )));
        }
        if leg.from.trim().is_empty() || leg.to.trim().is_empty() {
            return Err(InvariantViolation(format!("leg {i} has an empty endpoint")));
        }
    }
    Ok(serde_json::to_string(route).expect("route serialization cannot fail"))
}

/// Indexes of consecutive leg pairs that do not chain (`to` of one leg differs
/// from `from` of the next after name normalization). Empty means the route
/// chains end to end.
pub fn validate_chaining(route: &Route) -> Vec<(usize, usize)> {
    route
        .legs
        .windows(2)
        .enumerate()
        .filter(|(_, pair)| normalize_name(&pair[0].to) != normalize_name(&pair[1].from))
        .map(|(i, _)| (i, i + 1))
        .collect()
}
