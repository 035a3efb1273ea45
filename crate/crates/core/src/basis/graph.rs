//! Canonical pair-multigraphs: one graph per basis function Ψ^I.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};

pub const MAX_VERTICES: usize = 10;
pub const MAX_PARAMS: usize = 4;

/// Multiplicity of each weight parameter on one edge.
pub type Weight = [u8; MAX_PARAMS];

/// The weight "once the first parameter".
pub const UNIT: Weight = [1, 0, 0, 0];

/// Display names of the weight parameters.
pub const PARAM_NAMES: [&str; MAX_PARAMS] = ["λ", "λ′", "λ″", "λ‴"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    /// Smaller endpoint, 0-based.
    pub i: u8,
    /// Larger endpoint, 0-based.
    pub j: u8,
    pub w: Weight,
}

/// A basis element Ψ^I (or Ψ̂^I when `marked`). Always canonical: no
/// isolated vertices, no loops, parallel edges merged, and the labeling is
/// the minimal one over all vertex permutations.
///
/// The derived order sorts by vertex count first, then by canonical encoding.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairGraph {
    n: u8,
    edges: Vec<Edge>,
    marked: bool,
}

type CanonKey = (u8, Vec<Edge>);

fn memo() -> &'static Mutex<HashMap<CanonKey, Vec<Edge>>> {
    static M: OnceLock<Mutex<HashMap<CanonKey, Vec<Edge>>>> = OnceLock::new();
    M.get_or_init(|| Mutex::new(HashMap::new()))
}

fn add_weight(a: &mut Weight, b: &Weight) {
    for (x, y) in a.iter_mut().zip(b.iter()) {
        *x += *y;
    }
}

impl PairGraph {
    /// Ψ^∅, the constant function one.
    pub fn empty(marked: bool) -> Self {
        PairGraph { n: 0, edges: Vec::new(), marked }
    }

    /// Canonical graph from arbitrary (0-based) edges: loops are deleted,
    /// parallel edges merged and isolated vertices dropped.
    pub fn from_edges(edges: &[(usize, usize, Weight)], marked: bool) -> Result<Self> {
        let mut merged: Vec<Edge> = Vec::new();
        for &(a, b, w) in edges {
            if a == b || w.iter().all(|&x| x == 0) {
                continue;
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if j >= 255 {
                return Err(Error::TooManyVertices(j + 1));
            }
            match merged.iter_mut().find(|e| e.i as usize == i && e.j as usize == j) {
                Some(e) => add_weight(&mut e.w, &w),
                None => merged.push(Edge { i: i as u8, j: j as u8, w }),
            }
        }
        // Compact the labels of the vertices that remain.
        let mut used: Vec<u8> = merged.iter().flat_map(|e| [e.i, e.j]).collect();
        used.sort_unstable();
        used.dedup();
        if used.len() > MAX_VERTICES {
            return Err(Error::TooManyVertices(used.len()));
        }
        let relabel = |v: u8| used.binary_search(&v).unwrap() as u8;
        let compact: Vec<Edge> = merged
            .iter()
            .map(|e| Edge { i: relabel(e.i), j: relabel(e.j), w: e.w })
            .collect();
        let n = used.len() as u8;
        Ok(PairGraph { n, edges: canonical_edges(n, compact), marked })
    }

    /// Unit-weight edges given 1-based, as in "12,34".
    pub fn from_pairs(pairs: &[(usize, usize)], marked: bool) -> Result<Self> {
        let e: Vec<_> = pairs
            .iter()
            .map(|&(a, b)| {
                if a == 0 || b == 0 {
                    Err(Error::InvalidVertices(a, b))
                } else {
                    Ok((a - 1, b - 1, UNIT))
                }
            })
            .collect::<Result<_>>()?;
        Self::from_edges(&e, marked)
    }

    /// `k` disjoint unit edges, Ψ^{12,34,…}.
    pub fn disjoint_edges(k: usize, marked: bool) -> Result<Self> {
        let pairs: Vec<_> = (0..k).map(|i| (2 * i + 1, 2 * i + 2)).collect();
        Self::from_pairs(&pairs, marked)
    }

    pub fn vertex_count(&self) -> usize {
        self.n as usize
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_marked(&self) -> bool {
        self.marked
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Total weight per parameter.
    pub fn total_weight(&self) -> Weight {
        let mut w = [0; MAX_PARAMS];
        for e in &self.edges {
            add_weight(&mut w, &e.w);
        }
        w
    }

    /// Number of parallel unit edges when all weight sits on the first
    /// parameter (the multi-edge count of the usual notation).
    pub fn edge_multiplicity(&self) -> usize {
        self.edges.iter().map(|e| e.w.iter().map(|&x| x as usize).sum::<usize>()).sum()
    }

    /// Identifies 1-based vertices `k` and `l` (resampling map θ_{k,l}).
    pub fn merge(&self, k: usize, l: usize) -> Result<Self> {
        let n = self.n as usize;
        if k == l || k == 0 || l == 0 || k > n || l > n {
            return Err(Error::InvalidVertices(k, l));
        }
        Ok(self.merge0(k - 1, l - 1))
    }

    pub(crate) fn merge0(&self, k: usize, l: usize) -> Self {
        let map = |v: u8| if v as usize == l { k } else { v as usize };
        let e: Vec<_> = self.edges.iter().map(|e| (map(e.i), map(e.j), e.w)).collect();
        Self::from_edges(&e, self.marked).expect("merging never adds vertices")
    }

    /// Disjoint union (product of the two test functions).
    pub fn multiply_disjoint(&self, other: &Self) -> Result<Self> {
        if self.marked != other.marked {
            return Err(Error::Incompatible("marked and unmarked factors".into()));
        }
        let total = self.n as usize + other.n as usize;
        if total > MAX_VERTICES {
            return Err(Error::TooManyVertices(total));
        }
        let off = self.n as usize;
        let mut e: Vec<_> = self.edges.iter().map(|e| (e.i as usize, e.j as usize, e.w)).collect();
        e.extend(other.edges.iter().map(|e| (e.i as usize + off, e.j as usize + off, e.w)));
        Self::from_edges(&e, self.marked)
    }

    /// Same graph with the marked flag replaced.
    pub fn with_marked(&self, marked: bool) -> Self {
        PairGraph { marked, ..self.clone() }
    }

    /// Parses the text encoding: `"∅"`, `"12,34"`, `"12,12"`, `"12(2λ)"`,
    /// `"12(λ+λ′),23(λ′)"`; a leading `^` marks the graph. Vertices are
    /// single characters `1`–`9` and `A` for ten.
    pub fn parse(src: &str) -> Result<Self> {
        let s = src.trim();
        let (marked, body) = match s.strip_prefix('^') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let body = body.trim();
        if body.is_empty() || body == "∅" {
            return Ok(Self::empty(marked));
        }
        let mut edges = Vec::new();
        for item in split_top(body) {
            let chars: Vec<char> = item.chars().collect();
            if chars.len() < 2 {
                return Err(Error::Parse(format!("bad pair {item:?}")));
            }
            let a = vertex_index(chars[0])?;
            let b = vertex_index(chars[1])?;
            let rest: String = chars[2..].iter().collect();
            let w = if rest.is_empty() {
                UNIT
            } else {
                let inner = rest
                    .strip_prefix('(')
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| Error::Parse(format!("bad weight {rest:?}")))?;
                parse_weight(inner)?
            };
            edges.push((a, b, w));
        }
        Self::from_edges(&edges, marked)
    }
}

fn split_top(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

fn vertex_index(c: char) -> Result<usize> {
    match c {
        '1'..='9' => Ok(c as usize - '1' as usize),
        'A' | '0' => Ok(9),
        _ => Err(Error::Parse(format!("bad vertex {c:?}"))),
    }
}

fn vertex_char(v: u8) -> char {
    if v < 9 {
        (b'1' + v) as char
    } else {
        'A'
    }
}

fn parse_weight(s: &str) -> Result<Weight> {
    let mut w = [0u8; MAX_PARAMS];
    for term in s.split('+') {
        let term = term.trim();
        let digits: String = term.chars().take_while(|c| c.is_ascii_digit()).collect();
        let name = &term[digits.len()..];
        let k: u8 = if digits.is_empty() {
            1
        } else {
            digits.parse().map_err(|_| Error::Parse(format!("bad weight {s:?}")))?
        };
        let name = name.trim_start_matches('*');
        let idx = match name {
            "λ" | "l" => 0,
            "λ′" | "λ'" | "l'" => 1,
            "λ″" | "λ''" | "l''" => 2,
            "λ‴" | "λ'''" | "l'''" => 3,
            _ => return Err(Error::Parse(format!("unknown weight symbol {name:?}"))),
        };
        w[idx] += k;
    }
    Ok(w)
}

/// Text form of a weight, e.g. `2λ` or `λ+λ′`.
pub fn weight_string(w: &Weight) -> String {
    let mut parts = Vec::new();
    for (p, &k) in w.iter().enumerate() {
        match k {
            0 => {}
            1 => parts.push(PARAM_NAMES[p].to_string()),
            _ => parts.push(format!("{k}{}", PARAM_NAMES[p])),
        }
    }
    parts.join("+")
}

impl fmt::Display for PairGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.marked {
            f.write_str("^")?;
        }
        if self.edges.is_empty() {
            return f.write_str("∅");
        }
        let parts: Vec<String> = self
            .edges
            .iter()
            .map(|e| {
                let mut s = format!("{}{}", vertex_char(e.i), vertex_char(e.j));
                if e.w != UNIT {
                    s.push_str(&format!("({})", weight_string(&e.w)));
                }
                s
            })
            .collect();
        f.write_str(&parts.join(","))
    }
}

/// Minimal sorted edge list over all permutations of `n` vertices.
fn canonical_edges(n: u8, edges: Vec<Edge>) -> Vec<Edge> {
    let key = (n, {
        let mut e = edges.clone();
        e.sort_unstable();
        e
    });
    if let Some(hit) = memo().lock().unwrap().get(&key) {
        return hit.clone();
    }
    let best = exhaustive_minimum(n as usize, &key.1);
    memo().lock().unwrap().insert(key, best.clone());
    best
}

fn exhaustive_minimum(n: usize, edges: &[Edge]) -> Vec<Edge> {
    let mut perm: Vec<u8> = (0..n as u8).collect();
    let relabel = |p: &[u8]| {
        let mut e: Vec<Edge> = edges
            .iter()
            .map(|e| {
                let (a, b) = (p[e.i as usize], p[e.j as usize]);
                Edge { i: a.min(b), j: a.max(b), w: e.w }
            })
            .collect();
        e.sort_unstable();
        e
    };
    let mut best = relabel(&perm);
    // Heap's algorithm, iterative.
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let cand = relabel(&perm);
            if cand < best {
                best = cand;
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> PairGraph {
        PairGraph::parse(s).unwrap()
    }

    #[test]
    fn relabels_to_first_vertices() {
        assert_eq!(g("23"), g("12"));
        assert_eq!(g("23").to_string(), "12");
    }

    #[test]
    fn perfect_matchings_agree() {
        assert_eq!(g("12,34"), g("13,24"));
        assert_eq!(g("14,23"), g("12,34"));
    }

    #[test]
    fn parallel_edges_differ_from_paths() {
        assert_ne!(g("12,23"), g("12,12"));
        assert_eq!(g("12,12"), g("12(2λ)"));
        assert_eq!(g("12,12").to_string(), "12(2λ)");
    }

    #[test]
    fn merge_examples() {
        assert_eq!(g("12").merge(1, 2).unwrap(), PairGraph::empty(false));
        // The path 12,23 is stored with its centre first: "12,13".
        let path = g("12,23");
        assert_eq!(path.to_string(), "12,13");
        assert_eq!(path.merge(2, 3).unwrap(), g("12,12"));
        assert_eq!(path.merge(1, 2).unwrap(), g("12"));
        let pairs = g("12,34");
        assert_eq!(pairs.merge(2, 3).unwrap(), path);
        assert!(g("12").merge(1, 1).is_err());
        assert!(g("12").merge(1, 3).is_err());
    }

    #[test]
    fn multiply_examples() {
        let e = PairGraph::empty(false);
        assert_eq!(g("12").multiply_disjoint(&e).unwrap(), g("12"));
        assert_eq!(g("12").multiply_disjoint(&g("12")).unwrap(), g("12,34"));
        assert_eq!(g("12").multiply_disjoint(&g("12,34")).unwrap(), g("12,34,56"));
        let big = PairGraph::disjoint_edges(5, false).unwrap();
        assert!(matches!(big.multiply_disjoint(&g("12")), Err(Error::TooManyVertices(12))));
    }

    #[test]
    fn display_roundtrip() {
        for s in ["∅", "12", "12(2λ)", "12,23,34", "^12,34", "12(λ+λ′),23(λ′)"] {
            let p = g(s);
            assert_eq!(PairGraph::parse(&p.to_string()).unwrap(), p, "{s}");
        }
    }
}
