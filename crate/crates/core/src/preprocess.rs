//! Token streams for both sides of a pair: AMR linearization, removal of
//! rarely aligned tokens, stemming, and projection of links back to the
//! original positions.

use std::collections::BTreeSet;

use crate::alignment::AlignmentSet;
use crate::error::{Error, Result};
use crate::penman::{AmrGraph, ElementKind, ElementRef, NodeKind};

pub const DEFAULT_STEM_LEN: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Amr,
    English,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Concept,
    Role,
    Word,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub kind: TokenKind,
    /// Position in the unfiltered stream: linearization order for AMR,
    /// sentence position for English.
    pub origin: usize,
    pub element: Option<ElementRef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenStream {
    pub side: Side,
    pub tokens: Vec<Token>,
}

impl TokenStream {
    pub fn english<S: AsRef<str>>(words: &[S]) -> TokenStream {
        TokenStream {
            side: Side::English,
            tokens: words
                .iter()
                .enumerate()
                .map(|(i, w)| Token {
                    surface: w.as_ref().to_string(),
                    kind: TokenKind::Word,
                    origin: i,
                    element: None,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn surfaces(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.surface.as_str()).collect()
    }

    /// Surfaces joined by single spaces.
    pub fn text(&self) -> String {
        self.surfaces().join(" ")
    }

    pub fn provenance(&self) -> ProvenanceMap {
        ProvenanceMap(self.tokens.iter().map(|t| t.origin).collect())
    }
}

/// Maps each index of a filtered stream to its original position.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProvenanceMap(pub Vec<usize>);

impl ProvenanceMap {
    pub fn identity(len: usize) -> Self {
        ProvenanceMap((0..len).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, index: usize) -> Result<usize> {
        self.0.get(index).copied().ok_or(Error::OutOfDomain {
            index,
            len: self.0.len(),
        })
    }

    /// Inverse lookup: filtered index of an original position.
    pub fn position_of(&self, origin: usize) -> Option<usize> {
        self.0.iter().position(|&o| o == origin)
    }
}

/// Depth-first linearization over edges in textual order. A reentrant edge
/// emits its role and then the bare variable name, without descending.
pub fn linearize(graph: &AmrGraph) -> TokenStream {
    let children = graph.children();
    let mut tokens = Vec::with_capacity(graph.nodes.len() + graph.edges.len());
    let push = |surface: &str, kind: TokenKind, element: ElementRef, tokens: &mut Vec<Token>| {
        tokens.push(Token {
            surface: surface.to_string(),
            kind,
            origin: tokens.len(),
            element: Some(element),
        })
    };
    // Explicit stack of (node, next child slot); graphs can be deep.
    let mut stack = vec![(graph.root, 0usize)];
    push(
        graph.nodes[graph.root].label(),
        TokenKind::Concept,
        ElementRef::Concept(graph.root),
        &mut tokens,
    );
    while let Some((node, slot)) = stack.pop() {
        let Some(&ei) = children[node].get(slot) else {
            continue;
        };
        stack.push((node, slot + 1));
        let edge = &graph.edges[ei];
        push(
            &edge.role,
            TokenKind::Role,
            ElementRef::Role(ei),
            &mut tokens,
        );
        if edge.reentrant {
            let name = graph.variable_name(edge.child).unwrap_or_default();
            push(
                name,
                TokenKind::Concept,
                ElementRef::Mention(ei),
                &mut tokens,
            );
        } else {
            push(
                graph.nodes[edge.child].label(),
                TokenKind::Concept,
                ElementRef::Concept(edge.child),
                &mut tokens,
            );
            if matches!(graph.nodes[edge.child], NodeKind::Variable { .. }) {
                stack.push((edge.child, 0));
            }
        }
    }
    TokenStream {
        side: Side::Amr,
        tokens,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterConfig {
    /// Lowercased English stop words.
    pub english_stopwords: BTreeSet<String>,
    /// Lowercased role labels, with the leading colon.
    pub amr_roles: BTreeSet<String>,
    /// Concept patterns; `*` matches any run of characters.
    pub amr_concepts: Vec<String>,
    pub strip_quotes: bool,
    pub strip_sense: bool,
    pub lowercase_roles: bool,
}

const DEFAULT_FILTER: &str = include_str!("../config/filter.txt");

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig::parse(DEFAULT_FILTER).expect("shipped filter config is valid")
    }
}

impl FilterConfig {
    /// Filters nothing.
    pub fn empty() -> Self {
        FilterConfig {
            english_stopwords: BTreeSet::new(),
            amr_roles: BTreeSet::new(),
            amr_concepts: Vec::new(),
            strip_quotes: false,
            strip_sense: false,
            lowercase_roles: false,
        }
    }

    /// Reads the sectioned plain-text format of `config/filter.txt`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = FilterConfig::empty();
        let mut section = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line == "#" || line.starts_with("# ") {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') && line.len() > 2 {
                let name = &line[1..line.len() - 1];
                match name {
                    "english-stopwords" | "amr-roles" | "amr-concepts" | "flags" => {
                        section = Some(name.to_string())
                    }
                    _ => {
                        return Err(Error::Config(format!(
                            "line {}: unknown section [{name}]",
                            i + 1
                        )))
                    }
                }
                continue;
            }
            match section.as_deref() {
                Some("english-stopwords") => {
                    cfg.english_stopwords.insert(line.to_lowercase());
                }
                Some("amr-roles") => {
                    cfg.amr_roles.insert(normalize_role(line));
                }
                Some("amr-concepts") => cfg.amr_concepts.push(line.to_lowercase()),
                Some("flags") => match line {
                    "strip-quotes" => cfg.strip_quotes = true,
                    "strip-sense" => cfg.strip_sense = true,
                    "lowercase-roles" => cfg.lowercase_roles = true,
                    _ => {
                        return Err(Error::Config(format!(
                            "line {}: unknown flag '{line}'",
                            i + 1
                        )))
                    }
                },
                _ => {
                    return Err(Error::Config(format!(
                        "line {}: entry outside of a section",
                        i + 1
                    )))
                }
            }
        }
        Ok(cfg)
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        self.english_stopwords.contains(&word.to_lowercase())
    }

    pub fn removes_role(&self, role: &str) -> bool {
        self.amr_roles.contains(&normalize_role(role))
    }

    pub fn removes_concept(&self, concept: &str) -> bool {
        let c = concept.to_lowercase();
        self.amr_concepts.iter().any(|p| glob_match(p, &c))
    }

    /// Surface of a concept after quote and sense stripping.
    pub fn concept_surface(&self, surface: &str) -> String {
        let mut s = surface;
        if self.strip_quotes {
            s = s.trim_matches('"');
        }
        let mut s = s.to_string();
        if self.strip_sense {
            while let Some(stripped) = strip_sense_tag(&s) {
                s = stripped;
            }
        }
        s
    }

    /// The surviving form of a token, or `None` if the token is removed.
    pub fn apply(&self, token: &Token) -> Option<String> {
        match token.kind {
            TokenKind::Word => (!self.is_stopword(&token.surface)).then(|| token.surface.clone()),
            TokenKind::Role => (!self.removes_role(&token.surface)).then(|| {
                if self.lowercase_roles {
                    token.surface.to_lowercase()
                } else {
                    token.surface.clone()
                }
            }),
            TokenKind::Concept => {
                let s = self.concept_surface(&token.surface);
                (!self.removes_concept(&s)).then_some(s)
            }
        }
    }
}

pub(crate) fn normalize_role(role: &str) -> String {
    let r = role.to_lowercase();
    if r.starts_with(':') {
        r
    } else {
        format!(":{r}")
    }
}

/// `go-01` -> `go`. Only a trailing hyphen plus two digits after a non-empty stem.
fn strip_sense_tag(s: &str) -> Option<String> {
    let b = s.as_bytes();
    let n = b.len();
    (n > 3 && b[n - 3] == b'-' && b[n - 2].is_ascii_digit() && b[n - 1].is_ascii_digit())
        .then(|| s[..n - 3].to_string())
}

fn glob_match(pattern: &str, text: &str) -> bool {
    let parts: Vec<&str> = pattern.split('*').collect();
    if parts.len() == 1 {
        return pattern == text;
    }
    let (first, last) = (parts[0], parts[parts.len() - 1]);
    if !text.starts_with(first) || text.len() < first.len() + last.len() || !text.ends_with(last) {
        return false;
    }
    let mut rest = &text[first.len()..text.len() - last.len()];
    for mid in &parts[1..parts.len() - 1] {
        match rest.find(mid) {
            Some(at) => rest = &rest[at + mid.len()..],
            None => return false,
        }
    }
    true
}

/// Removes rarely aligned tokens. Survivors keep their original position;
/// AMR roles may be lowercased and concepts may lose quotes and sense tags,
/// as the config asks.
pub fn filter_tokens(
    stream: &TokenStream,
    cfg: &FilterConfig,
) -> Result<(TokenStream, ProvenanceMap)> {
    let tokens: Vec<Token> = stream
        .tokens
        .iter()
        .filter_map(|t| {
            cfg.apply(t).map(|surface| Token {
                surface,
                ..t.clone()
            })
        })
        .collect();
    if tokens.is_empty() {
        return Err(Error::FullyFiltered);
    }
    let out = TokenStream {
        side: stream.side,
        tokens,
    };
    let map = out.provenance();
    Ok((out, map))
}

/// Lowercase and keep the first `stem_len` characters.
pub fn stem(token: &str, stem_len: usize) -> String {
    token.to_lowercase().chars().take(stem_len).collect()
}

/// Lowercases every token and truncates words and concepts to `stem_len`
/// characters. Roles keep their full label.
pub fn normalize(stream: &TokenStream, stem_len: usize) -> Result<TokenStream> {
    if stem_len == 0 {
        return Err(Error::InvalidArgument(
            "stem length must be at least 1".into(),
        ));
    }
    Ok(TokenStream {
        side: stream.side,
        tokens: stream
            .tokens
            .iter()
            .map(|t| Token {
                surface: match t.kind {
                    TokenKind::Role => t.surface.to_lowercase(),
                    TokenKind::Concept | TokenKind::Word => stem(&t.surface, stem_len),
                },
                ..t.clone()
            })
            .collect(),
    })
}

/// Rewrites links between filtered indices into links between original
/// positions.
pub fn project_back(
    links: &AlignmentSet,
    amr_map: &ProvenanceMap,
    en_map: &ProvenanceMap,
) -> Result<AlignmentSet> {
    links
        .iter()
        .map(|(i, j, ty)| Ok((amr_map.get(i)?, en_map.get(j)?, ty)))
        .collect()
}

impl From<ElementKind> for crate::alignment::LinkType {
    fn from(k: ElementKind) -> Self {
        match k {
            ElementKind::Concept => crate::alignment::LinkType::Concept,
            ElementKind::Role => crate::alignment::LinkType::Role,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::LinkType;
    use crate::penman::parse_penman;

    #[test]
    fn linearize_minimal() {
        let g = parse_penman("(g / go-01)").unwrap();
        assert_eq!(linearize(&g).text(), "go-01");
    }

    #[test]
    fn linearize_reentrancy() {
        let g = parse_penman("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-01 :ARG0 b))").unwrap();
        let s = linearize(&g);
        assert_eq!(s.text(), "want-01 :ARG0 boy :ARG1 go-01 :ARG0 b");
        assert_eq!(s.tokens[6].element, Some(ElementRef::Mention(2)));
        let roles = s
            .tokens
            .iter()
            .filter(|t| t.kind == TokenKind::Role)
            .count();
        assert_eq!(roles, g.edges.len());
    }

    #[test]
    fn empty_config_is_identity() {
        let g = parse_penman(r#"(p / possible-01 :ARG1 (n / name :op1 "Gas"))"#).unwrap();
        let s = linearize(&g);
        let (f, map) = filter_tokens(&s, &FilterConfig::empty()).unwrap();
        assert_eq!(f, s);
        assert_eq!(map, ProvenanceMap::identity(s.len()));
        let en = TokenStream::english(&["The", "gas"]);
        let (f, map) = filter_tokens(&en, &FilterConfig::empty()).unwrap();
        assert_eq!(f, en);
        assert_eq!(map, ProvenanceMap::identity(2));
    }

    #[test]
    fn filter_strips_quotes_and_senses() {
        let g =
            parse_penman(r#"(p / price-01 :ARG1 (n / name :op1 "Gas") :mod (x / xyz-quantity))"#)
                .unwrap();
        let (f, _) = filter_tokens(&linearize(&g), &FilterConfig::default()).unwrap();
        assert_eq!(f.text(), "price name Gas :mod");
    }

    #[test]
    fn fully_filtered() {
        let en = TokenStream::english(&["the", "a"]);
        assert!(matches!(
            filter_tokens(&en, &FilterConfig::default()),
            Err(Error::FullyFiltered)
        ));
    }

    #[test]
    fn normalize_stems() {
        let en = TokenStream::english(&["Gallon", "go", "$"]);
        assert_eq!(normalize(&en, 4).unwrap().text(), "gall go $");
        assert!(normalize(&en, 0).is_err());
        let g = parse_penman("(t / thing :ARG2-of (p / price-01))").unwrap();
        assert_eq!(
            normalize(&linearize(&g), 4).unwrap().text(),
            "thin :arg2-of pric"
        );
    }

    #[test]
    fn project_back_through_maps() {
        let links: AlignmentSet = [(5, 2, LinkType::Concept)].into_iter().collect();
        let amr = ProvenanceMap(vec![0, 1, 2, 3, 4, 9]);
        let en = ProvenanceMap(vec![0, 1, 3]);
        let out = project_back(&links, &amr, &en).unwrap();
        assert_eq!(
            out.iter().collect::<Vec<_>>(),
            vec![(9, 3, LinkType::Concept)]
        );
        let id = ProvenanceMap::identity(10);
        assert_eq!(project_back(&links, &id, &id).unwrap(), links);
        assert!(project_back(&AlignmentSet::new(), &amr, &en)
            .unwrap()
            .is_empty());
        let bad: AlignmentSet = [(6, 0, LinkType::Concept)].into_iter().collect();
        assert!(matches!(
            project_back(&bad, &amr, &en),
            Err(Error::OutOfDomain { index: 6, .. })
        ));
    }

    #[test]
    fn glob_patterns() {
        assert!(glob_match("*-quantity", "volume-quantity"));
        assert!(!glob_match("*-quantity", "quantity"));
        assert!(glob_match("amr-unknown", "amr-unknown"));
        assert!(glob_match("a*b*c", "axxbyyc"));
        assert!(!glob_match("a*b*c", "acb"));
    }

    #[test]
    fn config_sections() {
        let cfg = FilterConfig::parse(
            "[english-stopwords]\nThe\n[amr-roles]\nARG0\n[flags]\nstrip-sense\n",
        )
        .unwrap();
        assert!(cfg.is_stopword("the"));
        assert!(cfg.removes_role(":arg0"));
        assert!(cfg.strip_sense && !cfg.strip_quotes);
        assert!(FilterConfig::parse("orphan\n").is_err());
        assert!(FilterConfig::parse("[bogus]\n").is_err());
        assert!(FilterConfig::parse("[flags]\nstrip-everything\n").is_err());
    }
}
