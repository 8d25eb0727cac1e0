//! Reading and writing AMR graphs in PENMAN notation.
//!
//! Besides the graph itself the reader keeps `# ::key value` metadata and the
//! inline `~e.N` (or `~e.N,M`) gold-alignment annotations that follow a
//! concept, constant, role or variable mention.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Position, Result};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Variable {
        name: String,
        concept: String,
    },
    /// Numbers, quoted strings and bare symbols such as `-`. Quoted surfaces
    /// keep their quotes.
    Constant {
        surface: String,
    },
}

impl NodeKind {
    /// The concept label, or the constant surface.
    pub fn label(&self) -> &str {
        match self {
            NodeKind::Variable { concept, .. } => concept,
            NodeKind::Constant { surface } => surface,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub parent: NodeId,
    pub role: String,
    pub child: NodeId,
    /// The child was written as a bare variable mention rather than defined here.
    pub reentrant: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementKind {
    Concept,
    Role,
}

/// A graph element that can carry an alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementRef {
    Concept(NodeId),
    Role(usize),
    /// Bare variable mention at the end of a reentrant edge (edge index).
    Mention(usize),
}

impl ElementRef {
    pub fn kind(self) -> ElementKind {
        match self {
            ElementRef::Role(_) => ElementKind::Role,
            ElementRef::Concept(_) | ElementRef::Mention(_) => ElementKind::Concept,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Metadata {
    pub entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn id(&self) -> Option<&str> {
        self.get("id")
    }

    /// Whitespace-split `::tok` line.
    pub fn tokens(&self) -> Option<Vec<String>> {
        self.get("tok")
            .map(|t| t.split_whitespace().map(str::to_string).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmrGraph {
    pub root: NodeId,
    pub nodes: Vec<NodeKind>,
    /// Role edges in the textual order of the source.
    pub edges: Vec<Edge>,
    /// Gold links `(element, english token index)` in textual order.
    pub gold_links: Vec<(ElementRef, usize)>,
    pub metadata: Metadata,
}

impl AmrGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Outgoing edge indices per node, each list in textual order.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for (i, e) in self.edges.iter().enumerate() {
            out[e.parent].push(i);
        }
        out
    }

    pub fn variable_name(&self, node: NodeId) -> Option<&str> {
        match &self.nodes[node] {
            NodeKind::Variable { name, .. } => Some(name),
            NodeKind::Constant { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Base of the English indices written after `~e.`.
    pub index_base: usize,
}

pub fn parse_penman(text: &str) -> Result<AmrGraph> {
    parse_penman_with(text, &ParseOptions::default())
}

pub fn parse_penman_with(text: &str, opts: &ParseOptions) -> Result<AmrGraph> {
    parse_block(text, opts, 0)
}

/// Reads every block of an AMR file. Blocks are separated by blank lines.
pub fn read_amr_file(text: &str, opts: &ParseOptions) -> Result<Vec<AmrGraph>> {
    let mut graphs = Vec::new();
    let mut block = String::new();
    let mut block_start = 0;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            if has_graph(&block) {
                graphs.push(parse_block(&block, opts, block_start)?);
            }
            block.clear();
            continue;
        }
        if block.is_empty() {
            block_start = lineno;
        }
        block.push_str(line);
        block.push('\n');
    }
    if has_graph(&block) {
        graphs.push(parse_block(&block, opts, block_start)?);
    }
    Ok(graphs)
}

fn has_graph(block: &str) -> bool {
    block
        .lines()
        .any(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

fn parse_block(text: &str, opts: &ParseOptions, line_offset: usize) -> Result<AmrGraph> {
    let mut metadata = Metadata::default();
    for line in text.lines() {
        let t = line.trim_start();
        if let Some(rest) = t.strip_prefix('#') {
            parse_metadata_line(rest, &mut metadata);
        }
    }
    let mut lexer = Lexer::new(text, line_offset);
    let raw = RawParser {
        lexer: &mut lexer,
        opts,
    }
    .parse()?;
    build_graph(raw, metadata)
}

fn parse_metadata_line(rest: &str, meta: &mut Metadata) {
    for chunk in rest.split(" ::").flat_map(|c| c.split("::")) {
        let chunk = chunk.trim();
        if chunk.is_empty() {
            continue;
        }
        if !rest.contains("::") {
            return;
        }
        let (key, value) = match chunk.split_once(char::is_whitespace) {
            Some((k, v)) => (k, v.trim()),
            None => (chunk, ""),
        };
        meta.entries.push((key.to_string(), value.to_string()));
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Slash,
    Role(String, Vec<usize>),
    Atom(String, bool, Vec<usize>),
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
    opts_base: usize,
    // Only whitespace seen so far on the current line; '#' then starts a comment.
    line_blank: bool,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str, line_offset: usize) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: line_offset + 1,
            column: 1,
            opts_base: 0,
            line_blank: true,
        }
    }

    fn pos(&self) -> Position {
        Position {
            line: self.line,
            column: self.column,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
            self.line_blank = true;
        } else {
            self.column += 1;
            if !c.is_whitespace() {
                self.line_blank = false;
            }
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' && self.line_blank {
                while let Some(&c) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn next(&mut self) -> Result<Option<(Tok, Position)>> {
        self.lex()
    }

    fn lex(&mut self) -> Result<Option<(Tok, Position)>> {
        self.skip_trivia();
        let pos = self.pos();
        let c = match self.chars.peek() {
            Some(&c) => c,
            None => return Ok(None),
        };
        let tok = match c {
            '(' => {
                self.bump();
                Tok::LParen
            }
            ')' => {
                self.bump();
                Tok::RParen
            }
            '/' => {
                self.bump();
                Tok::Slash
            }
            '"' => {
                let mut s = String::from('"');
                self.bump();
                loop {
                    match self.bump() {
                        None => {
                            return Err(Error::Penman {
                                pos,
                                msg: "unterminated string".into(),
                            })
                        }
                        Some('\\') => {
                            s.push('\\');
                            if let Some(e) = self.bump() {
                                s.push(e);
                            }
                        }
                        Some('"') => {
                            s.push('"');
                            break;
                        }
                        Some(ch) => s.push(ch),
                    }
                }
                let align = self.alignment()?;
                Tok::Atom(s, true, align)
            }
            _ => {
                let mut s = String::new();
                while let Some(&ch) = self.chars.peek() {
                    if ch.is_whitespace() || ch == '(' || ch == ')' || ch == '~' || ch == '"' {
                        break;
                    }
                    s.push(ch);
                    self.bump();
                }
                if s == "/" {
                    Tok::Slash
                } else {
                    let align = self.alignment()?;
                    if s.is_empty() {
                        return Err(Error::Penman {
                            pos,
                            msg: "alignment marker without a preceding element".into(),
                        });
                    }
                    if let Some(role) = s.strip_prefix(':') {
                        if role.is_empty() {
                            return Err(Error::Penman {
                                pos,
                                msg: "empty role label".into(),
                            });
                        }
                        Tok::Role(s, align)
                    } else {
                        Tok::Atom(s, false, align)
                    }
                }
            }
        };
        Ok(Some((tok, pos)))
    }

    /// Parses an optional `~e.N[,M...]` suffix.
    fn alignment(&mut self) -> Result<Vec<usize>> {
        if self.chars.peek() != Some(&'~') {
            return Ok(Vec::new());
        }
        let pos = self.pos();
        self.bump();
        let mut s = String::new();
        while let Some(&ch) = self.chars.peek() {
            if ch.is_whitespace() || ch == '(' || ch == ')' {
                break;
            }
            s.push(ch);
            self.bump();
        }
        let body = s.strip_prefix("e.").ok_or_else(|| Error::Penman {
            pos,
            msg: format!("malformed alignment marker '~{s}'"),
        })?;
        body.split(',')
            .map(|n| {
                let n: usize = n.parse().map_err(|_| Error::Penman {
                    pos,
                    msg: format!("non-numeric alignment index '{n}'"),
                })?;
                n.checked_sub(self.opts_base).ok_or_else(|| Error::Penman {
                    pos,
                    msg: format!("alignment index {n} below index base {}", self.opts_base),
                })
            })
            .collect()
    }
}

struct RawNode {
    var: String,
    var_pos: Position,
    concept: String,
    concept_align: Vec<usize>,
    edges: Vec<RawEdge>,
    id: NodeId,
}

struct RawEdge {
    role: String,
    role_align: Vec<usize>,
    target: RawTarget,
}

enum RawTarget {
    Node(RawNode),
    Atom {
        text: String,
        quoted: bool,
        align: Vec<usize>,
        id: Option<NodeId>,
    },
}

struct RawParser<'l, 'a> {
    lexer: &'l mut Lexer<'a>,
    opts: &'l ParseOptions,
}

impl RawParser<'_, '_> {
    fn parse(mut self) -> Result<RawNode> {
        self.lexer.opts_base = self.opts.index_base;
        let root = match self.lexer.next()? {
            Some((Tok::LParen, _)) => self.node()?,
            Some((_, pos)) => {
                return Err(Error::Penman {
                    pos,
                    msg: "expected '(' at start of graph".into(),
                })
            }
            None => {
                return Err(Error::Penman {
                    pos: self.lexer.pos(),
                    msg: "empty graph".into(),
                })
            }
        };
        if let Some((_, pos)) = self.lexer.next()? {
            return Err(Error::Penman {
                pos,
                msg: "unexpected input after the root node closes".into(),
            });
        }
        Ok(root)
    }

    // Called after the opening parenthesis.
    fn node(&mut self) -> Result<RawNode> {
        let (var, var_pos) = match self.lexer.next()? {
            Some((Tok::Atom(v, false, a), pos)) if a.is_empty() => (v, pos),
            Some((_, pos)) => {
                return Err(Error::Penman {
                    pos,
                    msg: "expected a variable name".into(),
                })
            }
            None => return Err(self.eof()),
        };
        match self.lexer.next()? {
            Some((Tok::Slash, _)) => {}
            Some((_, pos)) => {
                return Err(Error::Penman {
                    pos,
                    msg: "expected '/' after variable".into(),
                })
            }
            None => return Err(self.eof()),
        }
        let (concept, concept_align) = match self.lexer.next()? {
            Some((Tok::Atom(c, _, a), _)) => (c, a),
            Some((_, pos)) => {
                return Err(Error::Penman {
                    pos,
                    msg: "expected a concept".into(),
                })
            }
            None => return Err(self.eof()),
        };
        let mut edges = Vec::new();
        loop {
            match self.lexer.next()? {
                Some((Tok::RParen, _)) => break,
                Some((Tok::Role(role, role_align), _)) => {
                    let target = match self.lexer.next()? {
                        Some((Tok::LParen, _)) => RawTarget::Node(self.node()?),
                        Some((Tok::Atom(text, quoted, align), _)) => RawTarget::Atom {
                            text,
                            quoted,
                            align,
                            id: None,
                        },
                        Some((_, pos)) => {
                            return Err(Error::Penman {
                                pos,
                                msg: format!("missing target for role {role}"),
                            })
                        }
                        None => return Err(self.eof()),
                    };
                    edges.push(RawEdge {
                        role,
                        role_align,
                        target,
                    });
                }
                Some((_, pos)) => {
                    return Err(Error::Penman {
                        pos,
                        msg: "expected a role or ')'".into(),
                    })
                }
                None => return Err(self.eof()),
            }
        }
        Ok(RawNode {
            var,
            var_pos,
            concept,
            concept_align,
            edges,
            id: 0,
        })
    }

    fn eof(&self) -> Error {
        Error::Penman {
            pos: self.lexer.pos(),
            msg: "unexpected end of input, unbalanced parentheses".into(),
        }
    }
}

fn collect_vars(node: &RawNode, seen: &mut HashMap<String, Position>) -> Result<()> {
    if let Some(first) = seen.insert(node.var.clone(), node.var_pos) {
        return Err(Error::Penman {
            pos: node.var_pos,
            msg: format!("variable '{}' already defined at {first}", node.var),
        });
    }
    for e in &node.edges {
        if let RawTarget::Node(child) = &e.target {
            collect_vars(child, seen)?;
        }
    }
    Ok(())
}

fn assign_ids(
    node: &mut RawNode,
    vars: &HashSet<String>,
    nodes: &mut Vec<NodeKind>,
    var_ids: &mut HashMap<String, NodeId>,
) {
    node.id = nodes.len();
    nodes.push(NodeKind::Variable {
        name: node.var.clone(),
        concept: node.concept.clone(),
    });
    var_ids.insert(node.var.clone(), node.id);
    for e in &mut node.edges {
        match &mut e.target {
            RawTarget::Node(child) => assign_ids(child, vars, nodes, var_ids),
            RawTarget::Atom {
                text, quoted, id, ..
            } => {
                if *quoted || !vars.contains(text.as_str()) {
                    *id = Some(nodes.len());
                    nodes.push(NodeKind::Constant {
                        surface: text.clone(),
                    });
                }
            }
        }
    }
}

fn collect_edges(
    node: &RawNode,
    var_ids: &HashMap<String, NodeId>,
    edges: &mut Vec<Edge>,
    gold: &mut Vec<(ElementRef, usize)>,
) {
    gold.extend(
        node.concept_align
            .iter()
            .map(|&i| (ElementRef::Concept(node.id), i)),
    );
    for e in &node.edges {
        let edge_index = edges.len();
        gold.extend(
            e.role_align
                .iter()
                .map(|&i| (ElementRef::Role(edge_index), i)),
        );
        match &e.target {
            RawTarget::Node(child) => {
                edges.push(Edge {
                    parent: node.id,
                    role: e.role.clone(),
                    child: child.id,
                    reentrant: false,
                });
                collect_edges(child, var_ids, edges, gold);
            }
            RawTarget::Atom {
                text, align, id, ..
            } => {
                let (child, reentrant, element) = match id {
                    Some(cid) => (*cid, false, ElementRef::Concept(*cid)),
                    None => (
                        var_ids[text.as_str()],
                        true,
                        ElementRef::Mention(edge_index),
                    ),
                };
                edges.push(Edge {
                    parent: node.id,
                    role: e.role.clone(),
                    child,
                    reentrant,
                });
                gold.extend(align.iter().map(|&i| (element, i)));
            }
        }
    }
}

fn build_graph(mut raw: RawNode, metadata: Metadata) -> Result<AmrGraph> {
    let mut seen = HashMap::new();
    collect_vars(&raw, &mut seen)?;
    let vars: HashSet<String> = seen.into_keys().collect();
    let mut nodes = Vec::new();
    let mut var_ids = HashMap::new();
    assign_ids(&mut raw, &vars, &mut nodes, &mut var_ids);
    let mut edges = Vec::new();
    let mut gold_links = Vec::new();
    collect_edges(&raw, &var_ids, &mut edges, &mut gold_links);
    Ok(AmrGraph {
        root: raw.id,
        nodes,
        edges,
        gold_links,
        metadata,
    })
}

/// Writes the graph back as an indented PENMAN block, preceded by its
/// metadata lines. Gold links are written with the given index base.
pub fn serialize_penman(graph: &AmrGraph) -> String {
    serialize_penman_with(graph, &ParseOptions::default())
}

pub fn serialize_penman_with(graph: &AmrGraph, opts: &ParseOptions) -> String {
    let mut aligns: HashMap<ElementRef, Vec<usize>> = HashMap::new();
    for &(el, i) in &graph.gold_links {
        aligns.entry(el).or_default().push(i + opts.index_base);
    }
    let mut out = String::new();
    for (k, v) in &graph.metadata.entries {
        if v.is_empty() {
            let _ = writeln!(out, "# ::{k}");
        } else {
            let _ = writeln!(out, "# ::{k} {v}");
        }
    }
    let children = graph.children();
    write_node(graph, &children, &aligns, graph.root, 1, &mut out);
    out
}

fn write_align(aligns: &HashMap<ElementRef, Vec<usize>>, el: ElementRef, out: &mut String) {
    if let Some(idx) = aligns.get(&el) {
        let list: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
        let _ = write!(out, "~e.{}", list.join(","));
    }
}

fn write_node(
    graph: &AmrGraph,
    children: &[Vec<usize>],
    aligns: &HashMap<ElementRef, Vec<usize>>,
    node: NodeId,
    depth: usize,
    out: &mut String,
) {
    let NodeKind::Variable { name, concept } = &graph.nodes[node] else {
        unreachable!("constants are written inline");
    };
    let _ = write!(out, "({name} / {concept}");
    write_align(aligns, ElementRef::Concept(node), out);
    for &ei in &children[node] {
        let e = &graph.edges[ei];
        out.push('\n');
        out.push_str(&"   ".repeat(depth));
        out.push_str(&e.role);
        write_align(aligns, ElementRef::Role(ei), out);
        out.push(' ');
        if e.reentrant {
            out.push_str(graph.variable_name(e.child).unwrap_or_default());
            write_align(aligns, ElementRef::Mention(ei), out);
        } else {
            match &graph.nodes[e.child] {
                NodeKind::Constant { surface } => {
                    out.push_str(surface);
                    write_align(aligns, ElementRef::Concept(e.child), out);
                }
                NodeKind::Variable { .. } => {
                    write_node(graph, children, aligns, e.child, depth + 1, out)
                }
            }
        }
    }
    out.push(')');
}
