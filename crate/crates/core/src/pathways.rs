//! Walks on the transition graph and their grouping into pathway classes.
//!
//! A non-Hermitian (`NH`) class forgets the order in which transitions
//! happen; a Hermitian (`H`) class additionally cancels every `i → j` against
//! a `j → i` (backtracking).

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::system::{Transition, TransitionGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "H")]
    H,
    #[serde(rename = "NH")]
    NH,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::H => "H",
            Mode::NH => "NH",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "H" => Ok(Mode::H),
            "NH" => Ok(Mode::NH),
            other => Err(crate::Error::Parse(format!("unknown encoding mode `{other}`"))),
        }
    }
}

/// A walk `a → l₁ → … → b`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pathway {
    pub states: Vec<usize>,
}

impl Pathway {
    pub fn new(states: Vec<usize>) -> Self {
        assert!(!states.is_empty(), "a pathway visits at least one state");
        Self { states }
    }

    pub fn order(&self) -> usize {
        self.states.len() - 1
    }

    pub fn start(&self) -> usize {
        self.states[0]
    }

    pub fn end(&self) -> usize {
        *self.states.last().expect("nonempty")
    }

    pub fn transitions(&self) -> impl Iterator<Item = Transition> + '_ {
        self.states.windows(2).map(|w| Transition::new(w[0], w[1]))
    }

    /// Whether every step is an edge of `graph`.
    pub fn is_walk_on(&self, graph: &TransitionGraph) -> bool {
        self.transitions().all(|t| graph.contains(t.from, t.to))
    }

    pub fn nh_key(&self) -> ClassKey {
        let mut counts: BTreeMap<(usize, usize), i64> = BTreeMap::new();
        for t in self.transitions() {
            *counts.entry((t.from, t.to)).or_default() += 1;
        }
        ClassKey { start: self.start(), end: self.end(), edges: counts.into_iter().map(|((f, t), c)| (f, t, c)).collect() }
    }

    pub fn key(&self, mode: Mode) -> ClassKey {
        match mode {
            Mode::NH => self.nh_key(),
            Mode::H => self.nh_key().to_hermitian(),
        }
    }

    /// Arrow notation using the given state labels, e.g. `10→00→10→11`.
    pub fn display(&self, labels: &[String]) -> String {
        self.states.iter().map(|&s| labels[s].as_str()).collect::<Vec<_>>().join("→")
    }
}

/// Canonical class identifier: endpoints plus a sorted list of directed
/// transition counts. For `H` keys every count is a net count and only the
/// direction with a positive net survives.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClassKey {
    pub start: usize,
    pub end: usize,
    pub edges: Vec<(usize, usize, i64)>,
}

impl ClassKey {
    /// Cancels matched `i → j` / `j → i` pairs.
    pub fn to_hermitian(&self) -> ClassKey {
        let mut net: BTreeMap<(usize, usize), i64> = BTreeMap::new();
        for &(from, to, count) in &self.edges {
            let (pair, sign) = if from < to { ((from, to), 1) } else { ((to, from), -1) };
            *net.entry(pair).or_default() += sign * count;
        }
        let mut edges: Vec<(usize, usize, i64)> = net
            .into_iter()
            .filter(|&(_, c)| c != 0)
            .map(|((i, j), c)| if c > 0 { (i, j, c) } else { (j, i, -c) })
            .collect();
        edges.sort_unstable();
        ClassKey { start: self.start, end: self.end, edges }
    }

    /// Total transition count. For `H` keys this is the shortest member order.
    pub fn order(&self) -> i64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    /// Signed count of the undirected edge `{i, j}` taken as `i → j`.
    pub fn net_count(&self, from: usize, to: usize) -> i64 {
        self.edges
            .iter()
            .map(|&(f, t, c)| if (f, t) == (from, to) { c } else if (f, t) == (to, from) { -c } else { 0 })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathwayClass {
    pub mode: Mode,
    pub key: ClassKey,
    /// Shortest member, ties broken by the lexicographically largest walk.
    pub representative: Pathway,
    /// Members seen by the enumeration that produced this class.
    pub members: usize,
    /// Pathway frequency, set once an encoding scheme is known.
    pub frequency: Option<i64>,
}

impl PathwayClass {
    pub fn order(&self) -> usize {
        self.representative.order()
    }

    pub fn is_singleton(&self) -> bool {
        self.members == 1
    }

    /// `[10→00→10→11]^NH`.
    pub fn display(&self, labels: &[String]) -> String {
        format!("[{}]^{}", self.representative.display(labels), self.mode)
    }
}

/// All walks from `a` to `b` of length at most `n_max`, shortest first and
/// lexicographic within an order.
pub fn enumerate_pathways(graph: &TransitionGraph, a: usize, b: usize, n_max: usize) -> Vec<Pathway> {
    let dim = graph.dim();
    if a >= dim || b >= dim {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut frontier: Vec<Vec<usize>> = vec![vec![a]];
    for order in 0..=n_max {
        out.extend(frontier.iter().filter(|w| *w.last().expect("nonempty") == b).cloned().map(Pathway::new));
        if order == n_max {
            break;
        }
        // Depth-first extension in neighbour order keeps the frontier sorted.
        frontier = frontier
            .iter()
            .flat_map(|w| {
                let last = *w.last().expect("nonempty");
                graph.neighbors(last).iter().map(move |&next| {
                    let mut ext = w.clone();
                    ext.push(next);
                    ext
                })
            })
            .collect();
    }
    out
}

/// Groups pathways by their canonical key, in order of first appearance.
pub fn classify(pathways: &[Pathway], mode: Mode) -> Vec<PathwayClass> {
    let mut index: BTreeMap<ClassKey, usize> = BTreeMap::new();
    let mut classes: Vec<PathwayClass> = Vec::new();
    for p in pathways {
        let key = p.key(mode);
        match index.get(&key) {
            Some(&i) => {
                let class = &mut classes[i];
                class.members += 1;
                let rep = &class.representative;
                if p.order() < rep.order() || (p.order() == rep.order() && p.states > rep.states) {
                    class.representative = p.clone();
                }
            }
            None => {
                index.insert(key.clone(), classes.len());
                classes.push(PathwayClass { mode, key, representative: p.clone(), members: 1, frequency: None });
            }
        }
    }
    classes
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels4() -> Vec<String> {
        ["00", "01", "10", "11"].iter().map(|s| s.to_string()).collect()
    }

    fn flip_graph() -> TransitionGraph {
        let pairs = [(0, 1), (0, 2), (1, 3), (2, 3)];
        TransitionGraph::new(4, pairs.iter().flat_map(|&(i, j)| [Transition::new(i, j), Transition::new(j, i)]))
    }

    fn path(states: &[usize]) -> Pathway {
        Pathway::new(states.to_vec())
    }

    #[test]
    fn five_walks_from_10_to_11() {
        let walks = enumerate_pathways(&flip_graph(), 2, 3, 3);
        let shown: Vec<String> = walks.iter().map(|p| p.display(&labels4())).collect();
        assert_eq!(
            shown,
            ["10→11", "10→00→01→11", "10→00→10→11", "10→11→01→11", "10→11→10→11"]
        );
    }

    #[test]
    fn zero_order_is_only_the_empty_pathway() {
        let walks = enumerate_pathways(&flip_graph(), 1, 1, 0);
        assert_eq!(walks, vec![path(&[1])]);
        assert!(enumerate_pathways(&flip_graph(), 1, 2, 0).is_empty());
    }

    #[test]
    fn x_gate_transfer_has_odd_orders() {
        let g = TransitionGraph::new(2, [Transition::new(0, 1), Transition::new(1, 0)]);
        let orders: Vec<usize> = enumerate_pathways(&g, 0, 1, 4).iter().map(Pathway::order).collect();
        assert_eq!(orders, vec![1, 3]);
    }

    #[test]
    fn time_sequencing_is_erased_in_nh_classes() {
        let members = [path(&[0, 1, 0, 2, 0]), path(&[0, 2, 0, 1, 0])];
        let classes = classify(&members, Mode::NH);
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].members, 2);
        assert_eq!(classes[0].display(&labels4()), "[00→10→00→01→00]^NH");
    }

    #[test]
    fn backtracking_is_erased_in_h_classes() {
        let classes = classify(&[path(&[0, 2]), path(&[0, 1, 0, 2])], Mode::H);
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].display(&labels4()), "[00→10]^H");
        assert_eq!(classes[0].key.edges, vec![(0, 2, 1)]);
    }

    #[test]
    fn direct_route_without_revisits_is_a_singleton() {
        let classes = classify(&[path(&[0, 1, 3])], Mode::NH);
        assert_eq!(classes.len(), 1);
        assert!(classes[0].is_singleton());
    }

    #[test]
    fn walk_counts_on_the_four_cycle() {
        let g = flip_graph();
        for n in 0..=8 {
            let total: usize = (0..4)
                .map(|b| enumerate_pathways(&g, 0, b, n).iter().filter(|p| p.order() == n).count())
                .sum();
            assert_eq!(total, 1 << n);
        }
    }

    #[test]
    fn hermitian_key_orientation() {
        let key = path(&[1, 0, 1, 0]).nh_key().to_hermitian();
        assert_eq!(key.edges, vec![(1, 0, 1)]);
        assert_eq!(key.net_count(0, 1), -1);
        assert_eq!(key.order(), 1);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("nh".parse::<Mode>().unwrap(), Mode::NH);
        assert_eq!("H".parse::<Mode>().unwrap(), Mode::H);
        assert!("x".parse::<Mode>().is_err());
    }
}
