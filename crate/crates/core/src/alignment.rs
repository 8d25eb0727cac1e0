//! Alignment link sets and the Pharaoh `i-j` text format.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinkType {
    Concept,
    Role,
    Word,
}

impl LinkType {
    fn code(self) -> char {
        match self {
            LinkType::Concept => 'C',
            LinkType::Role => 'R',
            LinkType::Word => 'W',
        }
    }

    fn from_code(c: &str) -> Option<LinkType> {
        match c {
            "C" => Some(LinkType::Concept),
            "R" => Some(LinkType::Role),
            "W" => Some(LinkType::Word),
            _ => None,
        }
    }
}

/// A set of `(source, target)` links, each typed by its AMR endpoint.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct AlignmentSet {
    links: BTreeMap<(usize, usize), LinkType>,
}

impl AlignmentSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false if the pair was already present (its type is kept).
    pub fn insert(&mut self, src: usize, tgt: usize, ty: LinkType) -> bool {
        match self.links.entry((src, tgt)) {
            std::collections::btree_map::Entry::Occupied(_) => false,
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(ty);
                true
            }
        }
    }

    pub fn remove(&mut self, src: usize, tgt: usize) -> Option<LinkType> {
        self.links.remove(&(src, tgt))
    }

    pub fn contains(&self, src: usize, tgt: usize) -> bool {
        self.links.contains_key(&(src, tgt))
    }

    pub fn link_type(&self, src: usize, tgt: usize) -> Option<LinkType> {
        self.links.get(&(src, tgt)).copied()
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// Links in `(source, target)` order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, LinkType)> + '_ {
        self.links.iter().map(|(&(s, t), &ty)| (s, t, ty))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.links.keys().copied()
    }

    pub fn transpose(&self) -> AlignmentSet {
        self.iter().map(|(s, t, ty)| (t, s, ty)).collect()
    }

    pub fn of_type(&self, ty: LinkType) -> AlignmentSet {
        self.iter().filter(|l| l.2 == ty).collect()
    }

    pub fn retype(&self, f: impl Fn(usize, usize) -> LinkType) -> AlignmentSet {
        self.iter().map(|(s, t, _)| (s, t, f(s, t))).collect()
    }

    /// Number of shared `(source, target)` pairs.
    pub fn intersection_count(&self, other: &AlignmentSet) -> usize {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.pairs().filter(|&(s, t)| large.contains(s, t)).count()
    }

    /// Checks every link against a `src_len` x `tgt_len` matrix.
    pub fn check_bounds(&self, src_len: usize, tgt_len: usize) -> Result<()> {
        match self.pairs().find(|&(s, t)| s >= src_len || t >= tgt_len) {
            Some((src, tgt)) => Err(Error::Dimension {
                src,
                tgt,
                src_len,
                tgt_len,
            }),
            None => Ok(()),
        }
    }

    /// Pharaoh line: `i-j` pairs, or `i-j:T` with a type code when `typed`.
    pub fn to_pharaoh(&self, typed: bool) -> String {
        let mut out = String::new();
        for (i, (s, t, ty)) in self.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{s}-{t}");
            if typed {
                let _ = write!(out, ":{}", ty.code());
            }
        }
        out
    }

    /// Parses one Pharaoh line. Untyped links get [`LinkType::Word`].
    pub fn from_pharaoh(line: &str, lineno: usize) -> Result<AlignmentSet> {
        let mut set = AlignmentSet::new();
        for item in line.split_whitespace() {
            let err = |msg: String| Error::Pharaoh { line: lineno, msg };
            let (pair, ty) = match item.split_once(':') {
                Some((p, code)) => (
                    p,
                    LinkType::from_code(code)
                        .ok_or_else(|| err(format!("unknown link type '{code}'")))?,
                ),
                None => (item, LinkType::Word),
            };
            let (s, t) = pair
                .split_once('-')
                .ok_or_else(|| err(format!("expected i-j, found '{item}'")))?;
            let s = s
                .parse()
                .map_err(|_| err(format!("bad index in '{item}'")))?;
            let t = t
                .parse()
                .map_err(|_| err(format!("bad index in '{item}'")))?;
            if !set.insert(s, t, ty) {
                return Err(err(format!("duplicate link {s}-{t}")));
            }
        }
        Ok(set)
    }
}

impl FromIterator<(usize, usize, LinkType)> for AlignmentSet {
    fn from_iter<I: IntoIterator<Item = (usize, usize, LinkType)>>(iter: I) -> Self {
        let mut set = AlignmentSet::new();
        for (s, t, ty) in iter {
            set.insert(s, t, ty);
        }
        set
    }
}

/// One alignment per line; blank lines are empty alignments.
pub fn read_pharaoh(text: &str) -> Result<Vec<AlignmentSet>> {
    text.lines()
        .enumerate()
        .map(|(i, l)| AlignmentSet::from_pharaoh(l, i + 1))
        .collect()
}

pub fn write_pharaoh(sets: &[AlignmentSet], typed: bool) -> String {
    let mut out = String::new();
    for s in sets {
        out.push_str(&s.to_pharaoh(typed));
        out.push('\n');
    }
    out
}
