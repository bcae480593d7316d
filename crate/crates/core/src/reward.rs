//! Step and rollout rewards.
//!
//! [`regret_reward`] standardizes a cumulative-regret vector into a
//! per-action reward. The rest of the module scores tagged reasoning
//! traces: `answer + alpha_f * format + alpha_t * tool`.
//!
//! # Tag grammar
//!
//! Four literal, case-sensitive ASCII tags without attributes:
//! `<think>`, `<tool>`, `<output>`, `<answer>`, each closed by the matching
//! `</...>`. Segments may not nest or interleave. Text between segments is
//! ignored. A well-formatted trace is
//!
//! ```text
//! (think (tool output)?)+ answer
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::Action;

#[derive(Debug, Error, PartialEq)]
pub enum RewardError {
    #[error("regret vector is empty")]
    EmptyVector,
    #[error("malformed tags at byte {offset}: {reason}")]
    MalformedTags { offset: usize, reason: String },
    #[error("execution log has {got} entries for {expected} tool calls")]
    LogLengthMismatch { expected: usize, got: usize },
    #[error("reward weights must be nonnegative and finite")]
    InvalidWeight,
}

/// `(r - mean(r)) / std(r)` with the population standard deviation. A
/// constant vector maps to zeros.
pub fn regret_reward(regrets: &[f64]) -> Result<Vec<f64>, RewardError> {
    if regrets.is_empty() {
        return Err(RewardError::EmptyVector);
    }
    if regrets.iter().all(|&r| r == regrets[0]) {
        return Ok(vec![0.0; regrets.len()]);
    }
    let n = regrets.len() as f64;
    let mean = regrets.iter().sum::<f64>() / n;
    let var = regrets.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if std == 0.0 || !std.is_finite() {
        return Ok(vec![0.0; regrets.len()]);
    }
    Ok(regrets.iter().map(|r| (r - mean) / std).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Think,
    Tool,
    Output,
    Answer,
}

impl Tag {
    pub const ALL: [Tag; 4] = [Tag::Think, Tag::Tool, Tag::Output, Tag::Answer];

    pub fn name(self) -> &'static str {
        match self {
            Tag::Think => "think",
            Tag::Tool => "tool",
            Tag::Output => "output",
            Tag::Answer => "answer",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub tag: Tag,
    pub text: String,
}

impl Segment {
    pub fn new(tag: Tag, text: impl Into<String>) -> Self {
        Self { tag, text: text.into() }
    }
}

/// Segments of a tagged trace in document order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Trace {
    segments: Vec<Segment>,
}

impl Trace {
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn tags(&self) -> Vec<Tag> {
        self.segments.iter().map(|s| s.tag).collect()
    }

    pub fn tool_calls(&self) -> usize {
        self.segments.iter().filter(|s| s.tag == Tag::Tool).count()
    }

    /// Text of the first answer segment.
    pub fn answer(&self) -> Option<&str> {
        self.segments
            .iter()
            .find(|s| s.tag == Tag::Answer)
            .map(|s| s.text.as_str())
    }
}

fn open_tag_at(text: &str) -> Option<Tag> {
    Tag::ALL.into_iter().find(|t| {
        text.strip_prefix('<')
            .and_then(|r| r.strip_prefix(t.name()))
            .is_some_and(|r| r.starts_with('>'))
    })
}

fn close_tag_at(text: &str) -> Option<Tag> {
    Tag::ALL.into_iter().find(|t| {
        text.strip_prefix("</")
            .and_then(|r| r.strip_prefix(t.name()))
            .is_some_and(|r| r.starts_with('>'))
    })
}

pub fn parse_trace(text: &str) -> Result<Trace, RewardError> {
    let malformed = |offset, reason: &str| RewardError::MalformedTags {
        offset,
        reason: reason.to_string(),
    };
    let mut segments = Vec::new();
    let mut pos = 0;
    while let Some(rel) = text[pos..].find('<') {
        let at = pos + rel;
        let rest = &text[at..];
        if let Some(tag) = open_tag_at(rest) {
            let body_start = at + tag.name().len() + 2;
            let close = format!("</{}>", tag.name());
            let body_len = text[body_start..]
                .find(&close)
                .ok_or_else(|| malformed(at, &format!("unclosed <{tag}>")))?;
            let body = &text[body_start..body_start + body_len];
            if let Some(inner) = body.find('<').and_then(|i| {
                let r = &body[i..];
                (open_tag_at(r).is_some() || close_tag_at(r).is_some()).then_some(i)
            }) {
                return Err(malformed(body_start + inner, &format!("tag inside <{tag}>")));
            }
            segments.push(Segment::new(tag, body));
            pos = body_start + body_len + close.len();
        } else if let Some(tag) = close_tag_at(rest) {
            return Err(malformed(at, &format!("stray </{tag}>")));
        } else {
            pos = at + 1;
        }
    }
    Ok(Trace { segments })
}

/// Render segments as a trace, one segment per line.
pub fn render_trace(segments: &[Segment]) -> String {
    segments
        .iter()
        .map(|s| format!("<{0}>{1}</{0}>", s.tag, s.text))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn format_reward(trace: &Trace) -> u8 {
    #[derive(PartialEq)]
    enum S {
        Start,
        Thought,
        Called,
        Observed,
        Answered,
    }
    let mut s = S::Start;
    for tag in trace.tags() {
        s = match (s, tag) {
            (S::Start | S::Thought | S::Observed, Tag::Think) => S::Thought,
            (S::Thought, Tag::Tool) => S::Called,
            (S::Called, Tag::Output) => S::Observed,
            (S::Thought | S::Observed, Tag::Answer) => S::Answered,
            _ => return 0,
        };
    }
    u8::from(s == S::Answered)
}

/// Fraction of tool calls that succeeded; 1 when there were none.
pub fn tool_reward(trace: &Trace, execution_log: &[bool]) -> Result<f64, RewardError> {
    let calls = trace.tool_calls();
    if execution_log.len() != calls {
        return Err(RewardError::LogLengthMismatch {
            expected: calls,
            got: execution_log.len(),
        });
    }
    if calls == 0 {
        return Ok(1.0);
    }
    Ok(execution_log.iter().filter(|&&ok| ok).count() as f64 / calls as f64)
}

/// +1 when the trimmed, case-folded text is the action's name.
pub fn answer_reward(predicted: &str, solver_action: Action) -> i8 {
    if predicted.trim().to_lowercase() == solver_action.name() {
        1
    } else {
        -1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardWeights {
    pub alpha_f: f64,
    pub alpha_t: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            alpha_f: 0.1,
            alpha_t: 0.1,
        }
    }
}

impl RewardWeights {
    pub fn new(alpha_f: f64, alpha_t: f64) -> Result<Self, RewardError> {
        let ok = |a: f64| a.is_finite() && a >= 0.0;
        if !ok(alpha_f) || !ok(alpha_t) {
            return Err(RewardError::InvalidWeight);
        }
        Ok(Self { alpha_f, alpha_t })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub answer: i8,
    pub format: u8,
    pub tool: f64,
    pub alpha_f: f64,
    pub alpha_t: f64,
    pub total: f64,
}

impl RewardBreakdown {
    pub fn combine(answer: i8, format: u8, tool: f64, w: RewardWeights) -> Self {
        Self {
            answer,
            format,
            tool,
            alpha_f: w.alpha_f,
            alpha_t: w.alpha_t,
            total: answer as f64 + w.alpha_f * format as f64 + w.alpha_t * tool,
        }
    }
}

/// A missing answer segment scores -1.
pub fn composite_reward(
    trace: &Trace,
    execution_log: &[bool],
    solver_action: Action,
    weights: RewardWeights,
) -> Result<RewardBreakdown, RewardError> {
    RewardWeights::new(weights.alpha_f, weights.alpha_t)?;
    let tool = tool_reward(trace, execution_log)?;
    let answer = trace.answer().map_or(-1, |a| answer_reward(a, solver_action));
    Ok(RewardBreakdown::combine(answer, format_reward(trace), tool, weights))
}

/// Score raw text. Malformed traces score `(-1, 0, 0)`; with a log of the
/// wrong length the error still propagates.
pub fn score_text(
    text: &str,
    execution_log: &[bool],
    solver_action: Action,
    weights: RewardWeights,
) -> Result<RewardBreakdown, RewardError> {
    match parse_trace(text) {
        Ok(trace) => composite_reward(&trace, execution_log, solver_action, weights),
        Err(RewardError::MalformedTags { .. }) => {
            RewardWeights::new(weights.alpha_f, weights.alpha_t)?;
            Ok(RewardBreakdown::combine(-1, 0, 0.0, weights))
        }
        Err(e) => Err(e),
    }
}
