//! Combining two directional alignments of the same sentence pair.

use std::str::FromStr;

use crate::alignment::AlignmentSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineMode {
    Intersection,
    Union,
    Gdfa,
}

impl FromStr for CombineMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intersection" => Ok(CombineMode::Intersection),
            "union" => Ok(CombineMode::Union),
            "gdfa" | "grow-diag-final-and" => Ok(CombineMode::Gdfa),
            _ => Err(Error::InvalidArgument(format!(
                "unknown symmetrization mode '{s}'"
            ))),
        }
    }
}

const NEIGHBORS: [(isize, isize); 8] = [
    (-1, 0),
    (0, -1),
    (1, 0),
    (0, 1),
    (-1, -1),
    (-1, 1),
    (1, -1),
    (1, 1),
];

/// Set intersection or union. Link types come from `a` where both have the
/// link.
pub fn combine(
    a: &AlignmentSet,
    b: &AlignmentSet,
    mode: CombineMode,
    src_len: usize,
    tgt_len: usize,
) -> Result<AlignmentSet> {
    a.check_bounds(src_len, tgt_len)?;
    b.check_bounds(src_len, tgt_len)?;
    match mode {
        CombineMode::Intersection => Ok(a.iter().filter(|&(s, t, _)| b.contains(s, t)).collect()),
        CombineMode::Union => Ok(a.iter().chain(b.iter()).collect()),
        CombineMode::Gdfa => grow_diag_final_and(a, b, src_len, tgt_len),
    }
}

struct Grid {
    tgt_len: usize,
    cells: Vec<bool>,
    src_cover: Vec<usize>,
    tgt_cover: Vec<usize>,
}

impl Grid {
    fn new(src_len: usize, tgt_len: usize) -> Self {
        Grid {
            tgt_len,
            cells: vec![false; src_len * tgt_len],
            src_cover: vec![0; src_len],
            tgt_cover: vec![0; tgt_len],
        }
    }

    fn get(&self, s: usize, t: usize) -> bool {
        self.cells[s * self.tgt_len + t]
    }

    fn add(&mut self, s: usize, t: usize) {
        let cell = &mut self.cells[s * self.tgt_len + t];
        if !*cell {
            *cell = true;
            self.src_cover[s] += 1;
            self.tgt_cover[t] += 1;
        }
    }
}

/// Grow-diag-final-and. Both inputs must already be in `(source, target)`
/// orientation. Scans are row-major over the source index and see points
/// added earlier in the same scan.
pub fn grow_diag_final_and(
    a_st: &AlignmentSet,
    a_ts: &AlignmentSet,
    src_len: usize,
    tgt_len: usize,
) -> Result<AlignmentSet> {
    a_st.check_bounds(src_len, tgt_len)?;
    a_ts.check_bounds(src_len, tgt_len)?;
    let in_union = |s: usize, t: usize| a_st.contains(s, t) || a_ts.contains(s, t);

    let mut grid = Grid::new(src_len, tgt_len);
    for (s, t) in a_st.pairs().filter(|&(s, t)| a_ts.contains(s, t)) {
        grid.add(s, t);
    }

    loop {
        let mut added = false;
        for s in 0..src_len {
            for t in 0..tgt_len {
                if !grid.get(s, t) {
                    continue;
                }
                for (ds, dt) in NEIGHBORS {
                    let (Some(ns), Some(nt)) = (s.checked_add_signed(ds), t.checked_add_signed(dt))
                    else {
                        continue;
                    };
                    if ns >= src_len || nt >= tgt_len {
                        continue;
                    }
                    if (grid.src_cover[ns] == 0 || grid.tgt_cover[nt] == 0) && in_union(ns, nt) {
                        if !grid.get(ns, nt) {
                            added = true;
                        }
                        grid.add(ns, nt);
                    }
                }
            }
        }
        if !added {
            break;
        }
    }

    for dir in [a_st, a_ts] {
        for s in 0..src_len {
            for t in 0..tgt_len {
                if grid.src_cover[s] == 0 && grid.tgt_cover[t] == 0 && dir.contains(s, t) {
                    grid.add(s, t);
                }
            }
        }
    }

    let mut out = AlignmentSet::new();
    for s in 0..src_len {
        for t in 0..tgt_len {
            if grid.get(s, t) {
                let ty = a_st
                    .link_type(s, t)
                    .or_else(|| a_ts.link_type(s, t))
                    .expect("link from union");
                out.insert(s, t, ty);
            }
        }
    }
    Ok(out)
}
