//! Screenplay parsing and layout.
//!
//! Raw model output follows a simple contract: blocks separated by blank
//! lines, `NAME: (parenthetical) text` for dialog, `[...]` for anything that
//! is not spoken. [`parse_script`] inverts that contract and also reads back
//! the centered layout produced by [`format_script`].

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{Script, ScriptLine};

/// Width of the dialog column.
pub const DIALOG_MEASURE: usize = 40;
/// Wrap width for directions.
pub const DIRECTION_MEASURE: usize = 60;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParsedScript {
    pub lines: Vec<ScriptLine>,
    pub warnings: Vec<String>,
}

/// Title-cases a speaker name for storage: "ED DELANEY" becomes "Ed Delaney".
pub fn normalize_speaker(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for (i, word) in name.split_whitespace().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let mut upper_next = true;
        for c in word.chars() {
            if upper_next {
                out.extend(c.to_uppercase());
            } else {
                out.extend(c.to_lowercase());
            }
            upper_next = matches!(c, '-' | '\'' | '(');
        }
    }
    out
}

fn is_name_char(c: char) -> bool {
    c.is_alphabetic() || matches!(c, ' ' | '.' | '\'' | '-' | '&')
}

fn is_speaker_name(head: &str) -> bool {
    let head = head.trim();
    let Some(first) = head.chars().next() else { return false };
    first.is_alphabetic()
        && head.chars().count() <= 40
        && head.split_whitespace().count() <= 6
        && head.chars().all(is_name_char)
}

fn has_no_lowercase(s: &str) -> bool {
    s.chars().any(char::is_alphabetic) && !s.chars().any(char::is_lowercase)
}

fn is_scene_heading_start(line: &str) -> bool {
    let upper = line.trim_start();
    ["INT.", "EXT.", "INT/EXT", "I/E"].iter().any(|p| upper.starts_with(p))
}

/// Strips markdown bold around a leading speaker label.
fn unbold(line: &str) -> String {
    if line.starts_with("**") {
        line.replacen("**", "", 2)
    } else {
        line.to_string()
    }
}

/// Splits `NAME: body` when the head looks like a speaker.
fn split_speaker(line: &str) -> Option<(&str, &str)> {
    let (head, body) = line.split_once(':')?;
    if is_speaker_name(head) {
        Some((head.trim(), body.trim()))
    } else {
        None
    }
}

/// Pulls a leading "(...)" off a dialog body.
fn split_parenthetical(body: &str) -> (Option<String>, String) {
    let body = body.trim();
    if !body.starts_with('(') {
        return (None, body.to_string());
    }
    let mut depth = 0usize;
    for (i, c) in body.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    let inner = body[1..i].trim();
                    let rest = body[i + 1..].trim();
                    if inner.is_empty() {
                        return (None, rest.to_string());
                    }
                    return (Some(inner.to_string()), rest.to_string());
                }
            }
            _ => {}
        }
    }
    (None, body.to_string())
}

fn collapse(parts: &[&str]) -> String {
    let mut out = String::new();
    for part in parts {
        for word in part.split_whitespace() {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(word);
        }
    }
    out
}

fn bracketed(text: &str) -> Option<&str> {
    text.strip_prefix('[').and_then(|t| t.strip_suffix(']'))
}

fn push_dialog(out: &mut Vec<ScriptLine>, speaker: &str, body: &str) {
    let (parenthetical, text) = split_parenthetical(body);
    let parenthetical = parenthetical.map(|p| collapse(&[&p]));
    out.push(ScriptLine::Dialog { speaker: normalize_speaker(speaker), parenthetical, text: collapse(&[&text]) });
}

fn parse_block(lines: &[String], out: &mut ParsedScript) {
    let refs: Vec<&str> = lines.iter().map(|l| l.trim()).collect();
    let joined = collapse(&refs);
    if let Some(inner) = bracketed(&joined) {
        out.lines.push(ScriptLine::Direction { text: inner.trim().to_string() });
        return;
    }
    let first = refs[0];
    if is_scene_heading_start(first) && !first.contains(':') {
        out.lines.push(ScriptLine::SceneHeading { text: collapse(&[first]) });
        if refs.len() > 1 {
            parse_block(&lines[1..], out);
        }
        return;
    }
    if split_speaker(first).is_some() {
        // One or more `NAME: body` entries, continuation lines folded in.
        let mut current: Option<(String, String)> = None;
        for line in &refs {
            if let Some(inner) = bracketed(line) {
                if let Some((speaker, body)) = current.take() {
                    push_dialog(&mut out.lines, &speaker, &body);
                }
                out.lines.push(ScriptLine::Direction { text: inner.trim().to_string() });
            } else if let Some((speaker, body)) = split_speaker(line) {
                if let Some((s, b)) = current.take() {
                    push_dialog(&mut out.lines, &s, &b);
                }
                current = Some((speaker.to_string(), body.to_string()));
            } else if let Some((_, body)) = current.as_mut() {
                if !body.is_empty() {
                    body.push(' ');
                }
                body.push_str(line);
            } else {
                out.warnings.push(format!("unrecognized text kept as direction: {line}"));
                out.lines.push(ScriptLine::Direction { text: line.to_string() });
            }
        }
        if let Some((speaker, body)) = current {
            push_dialog(&mut out.lines, &speaker, &body);
        }
        return;
    }
    if refs.len() > 1 && is_speaker_name(first) && has_no_lowercase(first) {
        // Centered layout: name, optional parenthetical lines, text lines.
        let mut rest = &refs[1..];
        let mut parenthetical = None;
        if rest[0].starts_with('(') {
            if let Some(end) = rest.iter().position(|l| l.ends_with(')')) {
                let joined = collapse(&rest[..=end]);
                let inner = joined[1..joined.len() - 1].trim().to_string();
                if !inner.is_empty() {
                    parenthetical = Some(inner);
                }
                rest = &rest[end + 1..];
            }
        }
        out.lines.push(ScriptLine::Dialog { speaker: normalize_speaker(first), parenthetical, text: collapse(rest) });
        return;
    }
    if refs.len() == 1 && has_no_lowercase(first) && !first.contains(':') {
        out.lines.push(ScriptLine::SceneHeading { text: collapse(&[first]) });
        return;
    }
    out.warnings.push(format!("unrecognized block kept as direction: {joined}"));
    out.lines.push(ScriptLine::Direction { text: joined });
}

/// Parses raw model output (or [`format_script`] output) into script lines.
///
/// Fails when no dialog line is found.
pub fn parse_script(raw: &str) -> Result<ParsedScript> {
    let mut out = ParsedScript::default();
    let mut block: Vec<String> = Vec::new();
    for line in raw.lines() {
        if line.trim().is_empty() {
            if !block.is_empty() {
                parse_block(&block, &mut out);
                block.clear();
            }
        } else {
            block.push(unbold(line.trim_end()));
        }
    }
    if !block.is_empty() {
        parse_block(&block, &mut out);
    }
    if !out.lines.iter().any(ScriptLine::is_dialog) {
        return Err(Error::ParseFailure("no dialog lines found in script".into()));
    }
    Ok(out)
}

/// Greedy word wrap. Words longer than `width` sit on their own line.
pub fn wrap(text: &str, width: usize) -> Vec<String> {
    let mut lines = Vec::new();
    let mut current = String::new();
    let mut current_width = 0;
    for word in text.split_whitespace() {
        let w = word.chars().count();
        if current_width > 0 && current_width + 1 + w > width {
            lines.push(core::mem::take(&mut current));
            current_width = 0;
        }
        if current_width > 0 {
            current.push(' ');
            current_width += 1;
        }
        current.push_str(word);
        current_width += w;
    }
    if !current.is_empty() {
        lines.push(current);
    }
    lines
}

fn center(text: &str, width: usize) -> String {
    let w = text.chars().count();
    let pad = width.saturating_sub(w) / 2;
    let mut out = String::with_capacity(pad + text.len());
    out.extend(core::iter::repeat_n(' ', pad));
    out.push_str(text);
    out
}

/// Plain-text screenplay: headings flush-left in capitals, speaker names and
/// dialog centered in a 40-column measure, a blank line after every block.
pub fn format_script(script: &Script) -> String {
    format_lines(&script.lines)
}

pub fn format_lines(lines: &[ScriptLine]) -> String {
    let mut out = String::new();
    for line in lines {
        match line {
            ScriptLine::SceneHeading { text } => {
                out.push_str(&collapse(&[text]).to_uppercase());
                out.push('\n');
            }
            ScriptLine::Dialog { speaker, parenthetical, text } => {
                out.push_str(&center(&speaker.to_uppercase(), DIALOG_MEASURE));
                out.push('\n');
                if let Some(p) = parenthetical {
                    for l in wrap(&format!("({p})"), DIALOG_MEASURE) {
                        out.push_str(&center(&l, DIALOG_MEASURE));
                        out.push('\n');
                    }
                }
                for l in wrap(text, DIALOG_MEASURE) {
                    out.push_str(&center(&l, DIALOG_MEASURE));
                    out.push('\n');
                }
            }
            ScriptLine::Direction { text } => {
                for l in wrap(&format!("[{text}]"), DIRECTION_MEASURE) {
                    out.push_str(&l);
                    out.push('\n');
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Lines written back in the raw reply contract (`NAME: (p) text`, `[...]`).
pub fn to_raw(lines: &[ScriptLine]) -> String {
    let blocks: Vec<String> = lines
        .iter()
        .map(|line| match line {
            ScriptLine::Dialog { speaker, parenthetical: Some(p), text } if text.is_empty() => {
                format!("{}: ({p})", speaker.to_uppercase())
            }
            ScriptLine::Dialog { speaker, parenthetical: Some(p), text } => {
                format!("{}: ({p}) {text}", speaker.to_uppercase())
            }
            ScriptLine::Dialog { speaker, parenthetical: None, text } => format!("{}: {text}", speaker.to_uppercase()),
            ScriptLine::Direction { text } => format!("[{text}]"),
            ScriptLine::SceneHeading { text } => text.to_uppercase(),
        })
        .collect();
    blocks.join("\n\n")
}
