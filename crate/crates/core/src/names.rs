//! Loose matching of character names across premise, board and script.
//!
//! Premise characters are often groups ("Consumers (like Ed Delaney)") while
//! scripts name individuals ("Ed Delaney") or singular forms ("Credit
//! Union"). Matching works on normalized word keys.

use alloc::string::String;
use alloc::vec::Vec;

const LEAD_INS: [&str; 6] = ["like ", "particularly ", "such as ", "e.g. ", "including ", "especially "];

fn singular(word: &str) -> &str {
    if word.len() > 3 && word.ends_with('s') && !word.ends_with("ss") {
        &word[..word.len() - 1]
    } else {
        word
    }
}

/// Lowercased, punctuation-free, singularized words.
pub fn name_key(name: &str) -> String {
    let lowered = name.to_lowercase();
    let words: Vec<&str> =
        lowered.split(|c: char| !c.is_alphanumeric() && c != '\'').filter(|w| !w.is_empty()).map(singular).collect();
    words.join(" ")
}

fn split_parenthetical(name: &str) -> (String, Vec<String>) {
    let mut outer = String::new();
    let mut inner = Vec::new();
    let mut current = String::new();
    let mut depth = 0usize;
    for c in name.chars() {
        match c {
            '(' => {
                if depth > 0 {
                    current.push(c);
                }
                depth += 1;
            }
            ')' if depth > 0 => {
                depth -= 1;
                if depth == 0 {
                    inner.push(core::mem::take(&mut current));
                } else {
                    current.push(c);
                }
            }
            _ if depth > 0 => current.push(c),
            _ => outer.push(c),
        }
    }
    (outer, inner)
}

/// Keys a name can be referred to by: the whole name, the name without its
/// parenthetical, and each person or group named inside the parenthetical.
pub fn name_variants(name: &str, ignore: &[&str]) -> Vec<String> {
    let mut out = Vec::new();
    let mut push = |key: String| {
        if !key.is_empty() && !out.contains(&key) {
            out.push(key);
        }
    };
    push(name_key(name));
    let (outer, inner) = split_parenthetical(name);
    push(name_key(&outer));
    for part in inner.iter().flat_map(|p| p.split(',')) {
        let mut part = part.trim();
        let lowered = part.to_lowercase();
        for lead in LEAD_INS {
            if lowered.starts_with(lead) {
                part = &part[lead.len()..];
                break;
            }
        }
        let key = name_key(part);
        if ignore.iter().any(|i| name_key(i) == key) {
            continue;
        }
        push(key);
    }
    out
}

fn contains_words(haystack: &str, needle: &str) -> bool {
    let h: Vec<&str> = haystack.split(' ').collect();
    let n: Vec<&str> = needle.split(' ').collect();
    !n.is_empty() && n.len() <= h.len() && h.windows(n.len()).any(|w| w == n.as_slice())
}

/// How strongly `name` refers to something known by `variants`:
/// 2 for an exact key, 1 for a contiguous word run inside a key, 0 otherwise.
pub fn match_strength(name: &str, variants: &[String]) -> u8 {
    let key = name_key(name);
    if key.is_empty() {
        return 0;
    }
    if variants.contains(&key) {
        2
    } else if variants.iter().any(|v| contains_words(v, &key) || contains_words(&key, v)) {
        1
    } else {
        0
    }
}

/// Index of the single best candidate for `name`, or `None` when nothing
/// matches or the best match is ambiguous.
pub fn best_match(name: &str, candidates: &[Vec<String>]) -> Option<usize> {
    let strengths: Vec<u8> = candidates.iter().map(|v| match_strength(name, v)).collect();
    let best = *strengths.iter().max()?;
    if best == 0 {
        return None;
    }
    let mut hits = strengths.iter().enumerate().filter(|(_, s)| **s == best);
    let (index, _) = hits.next()?;
    if hits.next().is_some() {
        None
    } else {
        Some(index)
    }
}
