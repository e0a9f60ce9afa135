//! Parsers for free-text provider replies.
//!
//! Every item returned is a slice of the reply (trimmed), so parsing never
//! invents text.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Character, Framing, Stakeholder};
use crate::names;

/// Strips a list enumerator ("1.", "1)", "-", "•", "*") from the start of
/// a line.
fn strip_enumerator(line: &str) -> Option<&str> {
    let line = line.trim_start();
    let digits = line.chars().take_while(char::is_ascii_digit).count();
    if digits > 0 {
        let rest = &line[digits..];
        let after = rest.strip_prefix('.').or_else(|| rest.strip_prefix(')'))?;
        if after.is_empty() || after.starts_with(char::is_whitespace) {
            return Some(after.trim());
        }
        return None;
    }
    for bullet in ['-', '*'] {
        if let Some(after) = line.strip_prefix(bullet) {
            return after.starts_with(char::is_whitespace).then(|| after.trim());
        }
    }
    line.strip_prefix('•').map(str::trim)
}

fn is_numbered(line: &str) -> bool {
    let line = line.trim_start();
    line.starts_with(|c: char| c.is_ascii_digit()) && strip_enumerator(line).is_some()
}

/// Items of a numbered or bulleted list, in order. Lines without an
/// enumerator are ignored; empty items are dropped.
pub fn parse_numbered_list(raw: &str) -> Result<Vec<String>> {
    let items: Vec<String> =
        raw.lines().filter_map(strip_enumerator).filter(|item| !item.is_empty()).map(ToString::to_string).collect();
    if items.is_empty() {
        Err(Error::ParseFailure("no list items found".into()))
    } else {
        Ok(items)
    }
}

fn trim_markup(s: &str) -> &str {
    s.trim().trim_matches('*').trim()
}

/// Splits a "name, separator, activity" item, trying an em dash, then a
/// spaced hyphen, then ":". With no separator the item becomes the name.
pub fn parse_stakeholder(item: &str) -> (Stakeholder, Option<String>) {
    for sep in ["—", " - ", ":"] {
        if let Some((name, activity)) = item.split_once(sep) {
            let name = trim_markup(name);
            if !name.is_empty() {
                return (Stakeholder { name: name.to_string(), activity: activity.trim().to_string() }, None);
            }
        }
    }
    let name = trim_markup(item).to_string();
    let warning = format!("stakeholder `{name}` has no activity separator");
    (Stakeholder { name, activity: String::new() }, Some(warning))
}

pub fn parse_stakeholders(raw: &str) -> Result<(Vec<Stakeholder>, Vec<String>)> {
    let mut warnings = Vec::new();
    let mut out = Vec::new();
    for item in parse_numbered_list(raw)? {
        let (s, w) = parse_stakeholder(&item);
        warnings.extend(w);
        if !s.name.is_empty() {
            out.push(s);
        }
    }
    if out.is_empty() {
        return Err(Error::ParseFailure("no stakeholder names found".into()));
    }
    Ok((out, warnings))
}

/// A single-value reply, optionally prefixed with `label:`. Surrounding
/// quotes and one trailing period are removed.
pub fn parse_labeled_value(raw: &str, label: &str) -> Result<String> {
    let mut text = raw.trim();
    let lowered = text.to_ascii_lowercase();
    let prefix = format!("{}:", label.to_ascii_lowercase());
    if let Some(pos) = lowered.find(&prefix) {
        if lowered[..pos].trim().is_empty() || lowered[..pos].trim_matches('*').trim().is_empty() {
            text = text[pos + prefix.len()..].trim();
        }
    }
    let text = text.lines().next().unwrap_or("").trim().trim_matches('*').trim();
    let text = text.trim_matches('"').trim();
    let text = text.strip_suffix('.').unwrap_or(text).trim();
    if text.is_empty() {
        Err(Error::ParseFailure(format!("empty {label} reply")))
    } else {
        Ok(text.to_string())
    }
}

/// Free text reply, trimmed. Fails only when blank.
pub fn parse_text(raw: &str) -> Result<String> {
    let text = raw.trim();
    if text.is_empty() {
        Err(Error::ParseFailure("empty reply".into()))
    } else {
        Ok(text.to_string())
    }
}

fn split_top_level_and(text: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b' ' if depth == 0 && text[i..].starts_with(" and ") => {
                parts.push(&text[start..i]);
                i += 5;
                start = i;
                continue;
            }
            _ => {}
        }
        i += 1;
    }
    parts.push(&text[start..]);
    parts
}

/// The two principal characters from a premise characters reply.
///
/// Accepts a numbered list, a `;`-separated pair, or "A and B". More than
/// two names keeps the first two with a warning; fewer is a parse failure.
pub fn parse_premise_characters(raw: &str, framing: Framing) -> Result<(Vec<Character>, Vec<String>)> {
    let mut warnings = Vec::new();
    let names: Vec<&str> = match parse_numbered_list(raw) {
        Ok(_) => raw.lines().filter_map(strip_enumerator).filter(|s| !s.is_empty()).collect(),
        Err(_) => {
            let mut body = raw.trim();
            if let Some(pos) = body.to_ascii_lowercase().find("characters:") {
                body = body[pos + "characters:".len()..].trim();
            }
            let body = body.lines().next().unwrap_or("");
            if body.contains(';') {
                body.split(';').collect()
            } else {
                split_top_level_and(body)
            }
        }
    };
    let mut names: Vec<&str> = names
        .into_iter()
        .map(|n| {
            let n = trim_markup(n);
            n.strip_suffix('.').unwrap_or(n).trim()
        })
        .filter(|n| !n.is_empty())
        .collect();
    if names.len() < 2 {
        return Err(Error::ParseFailure("expected two characters".into()));
    }
    if names.len() > 2 {
        warnings.push(format!("{} characters named; keeping the first two", names.len()));
        names.truncate(2);
    }
    let characters = match framing {
        Framing::ExpositoryDialog => {
            let newcomer_first =
                names[0].to_lowercase().contains("newcomer") && !names[1].to_lowercase().contains("newcomer");
            let (expert, newcomer) = if newcomer_first { (names[1], names[0]) } else { (names[0], names[1]) };
            alloc::vec![Character::new(expert, Framing::EXPERT), Character::new(newcomer, Framing::NAIVE_NEWCOMER),]
        }
        _ => names.iter().map(|n| Character::new(*n, Framing::DOMINANT_STAKEHOLDER)).collect(),
    };
    Ok((characters, warnings))
}

/// Three analogy candidates. Extra items are dropped with a warning.
pub fn parse_analogies(raw: &str) -> Result<(Vec<String>, Vec<String>)> {
    let mut items = parse_numbered_list(raw)?;
    let mut warnings = Vec::new();
    if items.len() < 3 {
        return Err(Error::ParseFailure(format!("expected three analogies, found {}", items.len())));
    }
    if items.len() > 3 {
        warnings.push(format!("{} analogies returned; keeping the first three", items.len()));
        items.truncate(3);
    }
    let items = items
        .into_iter()
        .map(|i| {
            let i = trim_markup(&i).to_string();
            match i.split_once(':') {
                // "Analogy 1: ..." style labels
                Some((head, rest)) if head.split_whitespace().count() <= 3 && !rest.trim().is_empty() => {
                    rest.trim().to_string()
                }
                _ => i,
            }
        })
        .collect();
    Ok((items, warnings))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotPhrases {
    pub expression: String,
    pub gesture: String,
    pub action: String,
}

fn clean_phrase(s: &str) -> &str {
    let s = s.trim().trim_matches('*').trim();
    let s = s.trim_start_matches(['-', '•']).trim();
    let s = s.strip_prefix("and ").unwrap_or(s);
    s.trim_end_matches([',', ';', '.']).trim()
}

/// Expression, gesture and action from a shot reply, either labeled
/// ("Expression: ...") or as three comma-separated phrases.
pub fn parse_shot(raw: &str) -> Result<ShotPhrases> {
    let lowered = raw.to_ascii_lowercase();
    let labels = ["expression:", "gesture:", "action:"];
    let positions: Vec<Option<usize>> = labels.iter().map(|l| lowered.find(l)).collect();
    if positions.iter().all(Option::is_some) {
        let starts: Vec<usize> = positions.iter().map(|p| p.unwrap_or(0)).collect();
        let value = |k: usize| {
            let from = starts[k] + labels[k].len();
            let to = starts.iter().copied().filter(|&s| s > starts[k]).min().unwrap_or(raw.len());
            clean_phrase(&raw[from..to])
        };
        let (e, g, a) = (value(0), value(1), value(2));
        if !e.is_empty() && !g.is_empty() && !a.is_empty() {
            return Ok(ShotPhrases { expression: e.to_string(), gesture: g.to_string(), action: a.to_string() });
        }
    }
    let phrases: Vec<&str> = raw
        .lines()
        .map(|l| strip_enumerator(l).unwrap_or(l))
        .flat_map(|l| l.split([',', ';']))
        .map(clean_phrase)
        .filter(|p| !p.is_empty())
        .collect();
    if let [e, g, a] = phrases.as_slice() {
        return Ok(ShotPhrases { expression: e.to_string(), gesture: g.to_string(), action: a.to_string() });
    }
    Err(Error::ParseFailure("expected one phrase each for expression, gesture, and action".into()))
}

/// Top-level entries of a reply that may nest bullets under numbered items.
/// Nested bullets are folded into their parent, comma separated.
pub fn parse_grouped_list(raw: &str) -> Vec<String> {
    let has_numbers = raw.lines().any(is_numbered);
    let mut groups: Vec<String> = Vec::new();
    for line in raw.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let top = if has_numbers { is_numbered(line) } else { strip_enumerator(line).is_some() };
        let content = strip_enumerator(line).unwrap_or(line.trim());
        if top || groups.is_empty() {
            groups.push(content.to_string());
        } else if let Some(last) = groups.last_mut() {
            if last.ends_with(':') {
                last.push(' ');
            } else {
                last.push_str(", ");
            }
            last.push_str(content);
        }
    }
    groups.retain(|g| !g.trim().is_empty());
    groups
}

/// Splits "Head: rest" or "Head - rest" when the head is short enough to
/// be a name.
pub fn split_head(entry: &str) -> Option<(&str, &str)> {
    for sep in [":", " — ", " - "] {
        if let Some((head, rest)) = entry.split_once(sep) {
            let head = trim_markup(head);
            if !head.is_empty() && head.split_whitespace().count() <= 12 && !rest.trim().is_empty() {
                return Some((head, rest.trim()));
            }
        }
    }
    None
}

/// Assigns per-character entries to `characters` by name, falling back to
/// order for entries whose head names nobody.
pub fn assign_entries(entries: &[String], characters: &[Vec<String>]) -> Vec<Option<String>> {
    let mut out: Vec<Option<String>> = alloc::vec![None; characters.len()];
    let mut unassigned: Vec<String> = Vec::new();
    for entry in entries {
        match split_head(entry) {
            Some((head, rest)) => match names::best_match(head, characters) {
                Some(i) if out[i].is_none() => out[i] = Some(rest.to_string()),
                _ => unassigned.push(rest.to_string()),
            },
            None => unassigned.push(entry.trim().to_string()),
        }
    }
    let mut spare = unassigned.into_iter();
    for slot in out.iter_mut().filter(|s| s.is_none()) {
        *slot = spare.next();
    }
    out
}

/// Props from "a, b, c, and d" (or "a; b").
pub fn split_props(text: &str) -> Vec<String> {
    text.split([',', ';'])
        .map(|p| {
            let p = p.trim();
            let p = p.strip_prefix("and ").unwrap_or(p);
            p.trim_end_matches('.').trim().to_string()
        })
        .filter(|p| !p.is_empty())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescribedCharacter {
    /// Name as written in the reply, when it differs from the premise name.
    pub alias: Option<String>,
    pub description: String,
}

fn split_is_a(entry: &str) -> Option<(&str, &str)> {
    let lowered = entry.to_ascii_lowercase();
    for marker in [" is a ", " is an ", " is the "] {
        if let Some(pos) = lowered.find(marker) {
            return Some((&entry[..pos], &entry[pos + 4..]));
        }
    }
    split_head(entry)
}

/// Maps each premise character to a single-person description.
///
/// Entries look like "[character] is a [man/woman/person] who wears
/// [item]". The head is matched to a premise character by name; unmatched
/// entries fill the remaining characters in order.
pub fn parse_character_descriptions(raw: &str, characters: &[Character]) -> Result<Vec<DescribedCharacter>> {
    let entries = parse_grouped_list(raw);
    let ignore = [Framing::EXPERT, Framing::NAIVE_NEWCOMER];
    let variants: Vec<Vec<String>> = characters.iter().map(|c| names::name_variants(&c.name, &ignore)).collect();
    let mut out: Vec<Option<DescribedCharacter>> = alloc::vec![None; characters.len()];
    let mut spare = Vec::new();
    for entry in &entries {
        let Some((head, description)) = split_is_a(entry) else {
            continue;
        };
        let head = trim_markup(head).trim_matches('"');
        let description = description.trim().trim_end_matches('.').trim();
        if description.is_empty() {
            continue;
        }
        let alias = (names::name_key(head)
            != names::name_key(&characters.first().map(|c| c.name.clone()).unwrap_or_default()))
        .then(|| head.to_string());
        match names::best_match(head, &variants) {
            Some(i) if out[i].is_none() => {
                let alias = (names::name_key(head) != names::name_key(&characters[i].name)).then(|| head.to_string());
                out[i] = Some(DescribedCharacter { alias, description: description.to_string() });
            }
            _ => spare.push(DescribedCharacter { alias, description: description.to_string() }),
        }
    }
    let mut spare = spare.into_iter();
    for (i, slot) in out.iter_mut().enumerate() {
        if slot.is_none() {
            *slot = spare.next().map(|mut d| {
                if d.alias.as_deref().map(names::name_key) == Some(names::name_key(&characters[i].name)) {
                    d.alias = None;
                }
                d
            });
        }
    }
    out.into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::ParseFailure("could not find a description for every character".into()))
}
