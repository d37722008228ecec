//! Extraction and fact-checking of free-form coloring critiques.
//!
//! Pattern set (applied per sentence, case-insensitive):
//!
//! 1. `vertices A and B` / `nodes A and B` / `vertices A, B`
//! 2. `vertex A [(X)|is X] and [vertex] B [(Y)|is Y]`
//! 3. `edge [between] A and B`, `edge (A, B)`, `edge A-B`, bare `(A, B)`
//!
//! After a pair, the first color word following `colored`, `color` or
//! `both` (skipping filler words) is taken as the shared claimed color.
//! Sentences with conflict language but no pair yield an `Other` claim.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{Coloring, ColoringInstance};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClaimKind {
    EdgeConflict { u: usize, v: usize },
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CritiqueClaim {
    pub kind: ClaimKind,
    /// Colors the critique attributes to `u` and `v`, lowercased.
    pub claimed_colors: Option<(String, String)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HallucinationClass {
    Vertex,
    Edge,
    Both,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Num(usize),
    Punct(char),
}

fn tokenize(sentence: &str) -> Vec<Tok> {
    let mut out = Vec::new();
    let mut chars = sentence.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c.is_ascii_digit() {
            let mut n = 0usize;
            while let Some(d) = chars.peek().and_then(|c| c.to_digit(10)) {
                n = n.saturating_mul(10).saturating_add(d as usize);
                chars.next();
            }
            out.push(Tok::Num(n));
        } else if c.is_alphabetic() {
            let mut w = String::new();
            while let Some(&c) = chars.peek() {
                if !c.is_alphanumeric() {
                    break;
                }
                w.extend(c.to_lowercase());
                chars.next();
            }
            out.push(Tok::Word(w));
        } else {
            out.push(Tok::Punct(c));
            chars.next();
        }
    }
    out
}

const FILLER: &[&str] = &[
    "are", "is", "were", "was", "both", "colored", "coloured", "color", "colour", "with", "the", "a", "same", "have",
    "has", "share", "sharing", "assigned", "given", "as", "been", "in",
];

const NOT_COLORS: &[&str] = &[
    "and", "but", "despite", "which", "that", "so", "because", "they", "this", "it", "connected", "adjacent", "not",
    "vertex", "vertices", "node", "nodes", "edge", "endpoints", "ends", "an", "by", "to", "of", "even", "though", "although", "while",
];

fn is_word(t: Option<&Tok>, words: &[&str]) -> bool {
    matches!(t, Some(Tok::Word(w)) if words.contains(&w.as_str()))
}

fn num(t: Option<&Tok>) -> Option<usize> {
    match t {
        Some(Tok::Num(n)) => Some(*n),
        _ => None,
    }
}

fn color_token(t: &Tok) -> Option<String> {
    match t {
        Tok::Word(w) if !FILLER.contains(&w.as_str()) && !NOT_COLORS.contains(&w.as_str()) => Some(w.clone()),
        Tok::Num(n) => Some(n.to_string()),
        _ => None,
    }
}

/// `(X)` or `is X` directly at `i`; returns the color and the index after it.
fn attached_color(toks: &[Tok], i: usize) -> Option<(String, usize)> {
    if toks.get(i) == Some(&Tok::Punct('(')) && toks.get(i + 2) == Some(&Tok::Punct(')')) {
        return color_token(&toks[i + 1]).map(|c| (c, i + 3));
    }
    if is_word(toks.get(i), &["is", "was"]) {
        let mut j = i + 1;
        if is_word(toks.get(j), &["colored", "coloured"]) {
            j += 1;
        }
        if let Some(c) = toks.get(j).and_then(color_token) {
            return Some((c, j + 1));
        }
    }
    None
}

struct PairMatch {
    start: usize,
    u: usize,
    v: usize,
    colors: Option<(String, String)>,
    end: usize,
}

fn match_pair(toks: &[Tok], i: usize) -> Option<PairMatch> {
    let t = |k: usize| toks.get(k);
    // vertices A and B / vertices A, B
    if is_word(t(i), &["vertices", "nodes"]) {
        let u = num(t(i + 1))?;
        if is_word(t(i + 2), &["and"]) || t(i + 2) == Some(&Tok::Punct(',')) || t(i + 2) == Some(&Tok::Punct('&')) {
            let v = num(t(i + 3))?;
            return Some(PairMatch { start: i, u, v, colors: None, end: i + 4 });
        }
        return None;
    }
    // vertex A [(X)] and [vertex] B [(Y)]
    if is_word(t(i), &["vertex", "node"]) {
        let u = num(t(i + 1))?;
        let mut j = i + 2;
        let cu = attached_color(toks, j).map(|(c, next)| {
            j = next;
            c
        });
        if !is_word(t(j), &["and"]) {
            return None;
        }
        j += 1;
        if is_word(t(j), &["vertex", "node"]) {
            j += 1;
        }
        let v = num(t(j))?;
        j += 1;
        let cv = attached_color(toks, j).map(|(c, next)| {
            j = next;
            c
        });
        let colors = match (cu, cv) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => None,
        };
        return Some(PairMatch { start: i, u, v, colors, end: j });
    }
    // edge [between] A and B / edge (A, B) / edge A-B
    if is_word(t(i), &["edge"]) {
        let mut j = i + 1;
        if is_word(t(j), &["between", "from"]) {
            j += 1;
        }
        if let Some(m) = paren_pair(toks, j) {
            return Some(m);
        }
        let u = num(t(j))?;
        if is_word(t(j + 1), &["and", "to"]) || t(j + 1) == Some(&Tok::Punct('-')) || t(j + 1) == Some(&Tok::Punct(',')) {
            let v = num(t(j + 2))?;
            return Some(PairMatch { start: i, u, v, colors: None, end: j + 3 });
        }
        return None;
    }
    paren_pair(toks, i)
}

fn paren_pair(toks: &[Tok], i: usize) -> Option<PairMatch> {
    if toks.get(i) != Some(&Tok::Punct('(')) {
        return None;
    }
    let u = num(toks.get(i + 1))?;
    if !matches!(toks.get(i + 2), Some(Tok::Punct(',' | '-'))) {
        return None;
    }
    let v = num(toks.get(i + 3))?;
    if toks.get(i + 4) != Some(&Tok::Punct(')')) {
        return None;
    }
    Some(PairMatch { start: i, u, v, colors: None, end: i + 5 })
}

fn shared_color(toks: &[Tok]) -> Option<String> {
    let triggers = ["colored", "coloured", "color", "colour", "both"];
    for (pos, _) in toks.iter().enumerate().filter(|(_, t)| is_word(Some(t), &triggers)) {
        let next = toks[pos + 1..].iter().find(|t| !is_word(Some(t), FILLER));
        if let Some(c) = next.and_then(color_token) {
            return Some(c);
        }
    }
    None
}

const CONFLICT_WORDS: &[&str] = &["conflict", "conflicts", "violates", "violation", "violated", "invalid", "same"];

/// Claims in textual order.
pub fn parse_llm_critique(text: &str) -> Vec<CritiqueClaim> {
    let mut claims = Vec::new();
    for sentence in text.split(['.', '!', '?', '\n', ';']) {
        let toks = tokenize(sentence);
        let mut pairs: Vec<PairMatch> = Vec::new();
        let mut i = 0;
        while i < toks.len() {
            if let Some(mut m) = match_pair(&toks, i) {
                m.start = i;
                i = m.end;
                pairs.push(m);
            } else {
                i += 1;
            }
        }
        if pairs.is_empty() {
            if toks.iter().any(|t| is_word(Some(t), CONFLICT_WORDS)) && !is_word(toks.first(), &["no"]) {
                claims.push(CritiqueClaim {
                    kind: ClaimKind::Other,
                    claimed_colors: None,
                });
            }
            continue;
        }
        for k in 0..pairs.len() {
            let stop = pairs.get(k + 1).map_or(toks.len(), |p| p.start);
            let m = &pairs[k];
            let colors = m.colors.clone().or_else(|| {
                let span = &toks[m.end.min(stop)..stop];
                shared_color(span).map(|c| (c.clone(), c))
            });
            claims.push(CritiqueClaim {
                kind: ClaimKind::EdgeConflict { u: m.u, v: m.v },
                claimed_colors: colors,
            });
        }
    }
    claims
}

/// Classify one claim against the real graph and the real coloring.
///
/// A conflict claim asserts an edge and equal colors. Naming a pair that is
/// not an edge is an edge hallucination. Misstating a color, or (when no
/// colors are named) calling two differently colored vertices a conflict,
/// is a vertex hallucination.
pub fn classify_claim(instance: &ColoringInstance, candidate: &Coloring, claim: &CritiqueClaim) -> HallucinationClass {
    let ClaimKind::EdgeConflict { u, v } = claim.kind else {
        return HallucinationClass::None;
    };
    let edge = !instance.graph.has_edge(u, v);
    let actual = (candidate.color(u), candidate.color(v));
    let vertex = match (&claim.claimed_colors, actual) {
        (Some((cu, cv)), (Some(au), Some(av))) => cu != au || cv != av,
        (Some(_), _) => true,
        (None, (Some(au), Some(av))) => au != av,
        (None, _) => true,
    };
    match (vertex, edge) {
        (true, true) => HallucinationClass::Both,
        (false, true) => HallucinationClass::Edge,
        (true, false) => HallucinationClass::Vertex,
        (false, false) => HallucinationClass::None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CritiqueClassification {
    pub per_claim: Vec<HallucinationClass>,
    pub label: HallucinationClass,
    /// The critique rejected the coloring but no checkable claim was found.
    pub parse_failure: bool,
}

/// Per-claim classes plus one instance label: `Both` if any claim is `Both`
/// or if edge and vertex hallucinations both occur, otherwise `Edge` or
/// `Vertex` if present, otherwise `None`.
pub fn classify_critique(
    instance: &ColoringInstance,
    candidate: &Coloring,
    claims: &[CritiqueClaim],
    rejected: bool,
) -> CritiqueClassification {
    let per_claim: Vec<HallucinationClass> = claims.iter().map(|c| classify_claim(instance, candidate, c)).collect();
    let has = |c| per_claim.contains(&c);
    let label = if has(HallucinationClass::Both) || (has(HallucinationClass::Edge) && has(HallucinationClass::Vertex)) {
        HallucinationClass::Both
    } else if has(HallucinationClass::Edge) {
        HallucinationClass::Edge
    } else if has(HallucinationClass::Vertex) {
        HallucinationClass::Vertex
    } else {
        HallucinationClass::None
    };
    let checkable = claims.iter().any(|c| matches!(c.kind, ClaimKind::EdgeConflict { .. }));
    CritiqueClassification {
        per_claim,
        label,
        parse_failure: rejected && !checkable,
    }
}

#[cfg(test)]
mod tests {
    use super::super::Graph;
    use super::*;
    use alloc::vec;

    fn pair(u: usize, v: usize, c: Option<(&str, &str)>) -> CritiqueClaim {
        CritiqueClaim {
            kind: ClaimKind::EdgeConflict { u, v },
            claimed_colors: c.map(|(a, b)| (a.into(), b.into())),
        }
    }

    #[test]
    fn extracts_report_style_claim() {
        assert_eq!(
            parse_llm_critique("Vertices 1 and 3 are both colored red"),
            vec![pair(1, 3, Some(("red", "red")))]
        );
        assert!(parse_llm_critique("This coloring is correct.").is_empty());
    }

    #[test]
    fn multiple_claims_in_order() {
        let text = "Vertex 0 (red) and vertex 2 (blue) conflict. Also the edge (4, 5) has both endpoints colored green; edge between 6 and 7.";
        let claims = parse_llm_critique(text);
        assert_eq!(
            claims,
            vec![pair(0, 2, Some(("red", "blue"))), pair(4, 5, Some(("green", "green"))), pair(6, 7, None)]
        );
    }

    #[test]
    fn other_claims() {
        let claims = parse_llm_critique("There is a conflict somewhere in the coloring.");
        assert_eq!(claims, vec![CritiqueClaim { kind: ClaimKind::Other, claimed_colors: None }]);
    }

    #[test]
    fn classification_rules() {
        // Path 0-1-2 plus edge 0-3, colored 0:red 1:blue 2:red 3:red.
        let inst = ColoringInstance::new(Graph::from_edges(4, [(0, 1), (1, 2), (0, 3)]).unwrap());
        let c = Coloring {
            assignment: [(0, "red"), (1, "blue"), (2, "red"), (3, "red")]
                .into_iter()
                .map(|(v, c)| (v, c.to_string()))
                .collect(),
        };
        // (0,2) is not an edge but both are red.
        assert_eq!(classify_claim(&inst, &c, &pair(0, 2, Some(("red", "red")))), HallucinationClass::Edge);
        // (0,1) is an edge but colors are misstated.
        assert_eq!(classify_claim(&inst, &c, &pair(0, 1, Some(("red", "red")))), HallucinationClass::Vertex);
        // (0,3) really is violated.
        assert_eq!(classify_claim(&inst, &c, &pair(0, 3, Some(("red", "red")))), HallucinationClass::None);
        // Non-edge with wrong colors.
        assert_eq!(classify_claim(&inst, &c, &pair(1, 3, Some(("green", "green")))), HallucinationClass::Both);

        let mixed = classify_critique(&inst, &c, &[pair(0, 2, None), pair(0, 1, None)], true);
        assert_eq!(mixed.per_claim, vec![HallucinationClass::Edge, HallucinationClass::Vertex]);
        assert_eq!(mixed.label, HallucinationClass::Both);
        let empty = classify_critique(&inst, &c, &[], true);
        assert_eq!(empty.label, HallucinationClass::None);
        assert!(empty.parse_failure);
    }
}
