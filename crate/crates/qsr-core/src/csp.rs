//! Qualitative constraint networks and algebraic closure (path consistency).
//!
//! A network holds named nodes and relation-set constraints on unordered node
//! pairs; reading a pair in the opposite order yields the converse set, and
//! absent pairs default to the universal relation without being materialized.
//! Closure refines `C_ij ← C_ij ∩ (C_ik ∘ C_kj)` to fixpoint against a
//! composition table. The solver reports "consistent-so-far", never
//! "consistent": no completeness claim is made for these calculi.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::compose::CompositionTable;
use crate::error::{QsrError, Result};
use crate::opra::Granularity;
use crate::relations::{parse_relation, universe_size, BaseRelation, CalculusId, RelationSet};

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintNetwork {
    calculus: CalculusId,
    m: Granularity,
    nodes: Vec<String>,
    /// keyed by node indices `(i, j)` with `i < j`
    constraints: BTreeMap<(usize, usize), RelationSet>,
}

fn valid_node_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl ConstraintNetwork {
    pub fn new(calculus: CalculusId, m: Granularity) -> ConstraintNetwork {
        ConstraintNetwork {
            calculus,
            m,
            nodes: Vec::new(),
            constraints: BTreeMap::new(),
        }
    }

    pub fn calculus(&self) -> CalculusId {
        self.calculus
    }

    pub fn granularity(&self) -> Granularity {
        self.m
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn add_node(&mut self, name: &str) -> Result<usize> {
        if !valid_node_name(name) {
            return Err(QsrError::invalid(format!(
                "invalid node name `{name}` (ASCII identifiers only)"
            )));
        }
        if self.nodes.iter().any(|n| n == name) {
            return Err(QsrError::invalid(format!("duplicate node `{name}`")));
        }
        self.nodes.push(name.to_string());
        Ok(self.nodes.len() - 1)
    }

    pub fn node_index(&self, name: &str) -> Result<usize> {
        self.nodes
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| QsrError::invalid(format!("unknown node `{name}`")))
    }

    /// Sets the constraint between two nodes; the set is stored once under
    /// the smaller index, converted by converse when given the other way.
    pub fn set_constraint(&mut self, a: &str, b: &str, set: RelationSet) -> Result<()> {
        if set.calculus() != self.calculus || set.granularity() != self.m {
            return Err(QsrError::Mismatch(format!(
                "constraint set does not match network calculus {} m={}",
                self.calculus, self.m
            )));
        }
        let ia = self.node_index(a)?;
        let ib = self.node_index(b)?;
        if ia == ib {
            return Err(QsrError::invalid(format!(
                "constraint endpoints must differ, got `{a}` twice"
            )));
        }
        if ia < ib {
            self.constraints.insert((ia, ib), set);
        } else {
            self.constraints.insert((ib, ia), set.converse());
        }
        Ok(())
    }

    /// Constraint from node `i` to node `j`; unconstrained pairs read as the
    /// universal relation.
    pub fn constraint(&self, i: usize, j: usize) -> RelationSet {
        let key = (i.min(j), i.max(j));
        match self.constraints.get(&key) {
            Some(set) if i < j => set.clone(),
            Some(set) => set.converse(),
            None => RelationSet::universal(self.calculus, self.m),
        }
    }

    /// Materialized constraints as stored, keyed by `(i, j)` with `i < j`.
    pub fn stored_constraints(&self) -> impl Iterator<Item = (&(usize, usize), &RelationSet)> {
        self.constraints.iter()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosureStatus {
    /// Algebraic closure found no empty constraint. Not a consistency proof.
    ConsistentSoFar,
    Inconsistent,
}

/// One refinement step: the constraint on `(a, b)` shrank from `before` to
/// `after` members using the path through `via`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refinement {
    pub a: usize,
    pub b: usize,
    pub via: usize,
    pub before: usize,
    pub after: usize,
}

#[derive(Clone, Debug)]
pub struct ClosureResult {
    pub network: ConstraintNetwork,
    pub status: ClosureStatus,
    pub trace: Vec<Refinement>,
}

fn word_count(n: usize) -> usize {
    (n + 63) / 64
}

struct BitMatrix {
    words: usize,
    /// pair (i, j), i < j → bitset over the relation universe
    cells: BTreeMap<(usize, usize), Vec<u64>>,
    conv_idx: Vec<u32>,
    universal: Vec<u64>,
}

impl BitMatrix {
    fn popcount(bits: &[u64]) -> usize {
        bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn converse_bits(&self, bits: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; self.words];
        for (w, word) in bits.iter().enumerate() {
            let mut word = *word;
            while word != 0 {
                let b = word.trailing_zeros() as usize;
                let t = self.conv_idx[w * 64 + b] as usize;
                out[t / 64] |= 1u64 << (t % 64);
                word &= word - 1;
            }
        }
        out
    }

    fn get(&self, i: usize, j: usize) -> Vec<u64> {
        let key = (i.min(j), i.max(j));
        let stored = self.cells.get(&key).unwrap_or(&self.universal);
        if i < j {
            stored.clone()
        } else {
            self.converse_bits(stored)
        }
    }

    /// Intersects the directed constraint (i → j) with `bits`; returns the
    /// (before, after) sizes when it shrank.
    fn refine(&mut self, i: usize, j: usize, bits: &[u64]) -> Option<(usize, usize)> {
        let key = (i.min(j), i.max(j));
        let stored_bits = if i < j {
            bits.to_vec()
        } else {
            self.converse_bits(bits)
        };
        let cell = self
            .cells
            .entry(key)
            .or_insert_with(|| self.universal.clone());
        let before = Self::popcount(cell);
        let mut changed = false;
        for (w, b) in cell.iter_mut().zip(&stored_bits) {
            let new = *w & b;
            if new != *w {
                changed = true;
            }
            *w = new;
        }
        if changed {
            Some((before, Self::popcount(cell)))
        } else {
            None
        }
    }
}

/// Queue-based path consistency with a deterministic lexicographic worklist.
pub fn algebraic_closure(
    net: &ConstraintNetwork,
    table: &CompositionTable,
) -> Result<ClosureResult> {
    if table.calculus() != net.calculus || table.granularity() != net.m {
        return Err(QsrError::Mismatch(format!(
            "table ({} m={}) does not match network ({} m={})",
            table.calculus(),
            table.granularity(),
            net.calculus,
            net.m
        )));
    }
    let nn = net.nodes.len();
    let n = universe_size(net.calculus, net.m);
    let words = word_count(n);
    let mut universal = vec![0u64; words];
    for t in 0..n {
        universal[t / 64] |= 1u64 << (t % 64);
    }
    let conv_idx: Vec<u32> = table
        .relations()
        .iter()
        .map(|r| r.converse().index() as u32)
        .collect();
    let mut mat = BitMatrix {
        words,
        cells: BTreeMap::new(),
        conv_idx,
        universal,
    };
    for (&(i, j), set) in net.stored_constraints() {
        let mut bits = vec![0u64; words];
        for r in set.iter() {
            let t = r.index();
            bits[t / 64] |= 1u64 << (t % 64);
        }
        mat.cells.insert((i, j), bits);
    }

    let compose = |mat: &BitMatrix, i: usize, k: usize, j: usize| -> Vec<u64> {
        let left = mat.get(i, k);
        let right = mat.get(k, j);
        let mut out = vec![0u64; words];
        for (wl, word_l) in left.iter().enumerate() {
            let mut word_l = *word_l;
            while word_l != 0 {
                let r = wl * 64 + word_l.trailing_zeros() as usize;
                word_l &= word_l - 1;
                for (wr, word_r) in right.iter().enumerate() {
                    let mut word_r = *word_r;
                    while word_r != 0 {
                        let s = wr * 64 + word_r.trailing_zeros() as usize;
                        word_r &= word_r - 1;
                        for t in table.entry_indices(r, s) {
                            out[*t as usize / 64] |= 1u64 << (*t % 64);
                        }
                    }
                }
            }
        }
        out
    };

    let mut trace = Vec::new();
    let mut status = ClosureStatus::ConsistentSoFar;
    let mut work: BTreeSet<(usize, usize)> = (0..nn)
        .flat_map(|i| ((i + 1)..nn).map(move |j| (i, j)))
        .collect();

    'outer: while let Some(&(i, j)) = work.iter().next() {
        work.remove(&(i, j));
        for k in 0..nn {
            if k == i || k == j {
                continue;
            }
            // C_ik ∩= C_ij ∘ C_jk
            let through = compose(&mat, i, j, k);
            if let Some((before, after)) = mat.refine(i, k, &through) {
                trace.push(Refinement {
                    a: i,
                    b: k,
                    via: j,
                    before,
                    after,
                });
                if after == 0 {
                    status = ClosureStatus::Inconsistent;
                    break 'outer;
                }
                work.insert((i.min(k), i.max(k)));
            }
            // C_kj ∩= C_ki ∘ C_ij
            let through = compose(&mat, k, i, j);
            if let Some((before, after)) = mat.refine(k, j, &through) {
                trace.push(Refinement {
                    a: k,
                    b: j,
                    via: i,
                    before,
                    after,
                });
                if after == 0 {
                    status = ClosureStatus::Inconsistent;
                    break 'outer;
                }
                work.insert((k.min(j), k.max(j)));
            }
        }
    }

    let mut refined = ConstraintNetwork::new(net.calculus, net.m);
    refined.nodes = net.nodes.clone();
    let relations = table.relations();
    for (&(i, j), bits) in &mat.cells {
        let mut set = RelationSet::empty(net.calculus, net.m);
        for (w, word) in bits.iter().enumerate() {
            let mut word = *word;
            while word != 0 {
                let t = w * 64 + word.trailing_zeros() as usize;
                word &= word - 1;
                set.insert(relations[t])?;
            }
        }
        refined.constraints.insert((i, j), set);
    }
    Ok(ClosureResult {
        network: refined,
        status,
        trace,
    })
}

/// Atomic-network check: every specified constraint must be a singleton;
/// consistent-so-far iff closure leaves them all intact. A necessary, not
/// sufficient, condition for global consistency.
pub fn scenario_check(net: &ConstraintNetwork, table: &CompositionTable) -> Result<ClosureStatus> {
    for (&(i, j), set) in net.stored_constraints() {
        if set.len() != 1 {
            return Err(QsrError::invalid(format!(
                "scenario constraint between `{}` and `{}` is not a singleton ({} members)",
                net.nodes[i],
                net.nodes[j],
                set.len()
            )));
        }
    }
    let result = algebraic_closure(net, table)?;
    if result.status == ClosureStatus::Inconsistent {
        return Ok(ClosureStatus::Inconsistent);
    }
    for (&(i, j), set) in net.stored_constraints() {
        if &result.network.constraint(i, j) != set {
            return Ok(ClosureStatus::Inconsistent);
        }
    }
    Ok(ClosureStatus::ConsistentSoFar)
}

/// Parses the line-oriented network format. `;` starts a comment.
pub fn parse_network(text: &str) -> Result<ConstraintNetwork> {
    let mut net: Option<ConstraintNetwork> = None;
    let mut saw_magic = false;
    let mut saw_end = false;
    for (ln0, raw) in text.lines().enumerate() {
        let ln = ln0 + 1;
        let line = match raw.find(';') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if saw_end {
            return Err(QsrError::parse(ln, 1, "content after `#end`"));
        }
        if !saw_magic {
            if line != "#qsr-net v1" {
                return Err(QsrError::parse(ln, 1, "missing `#qsr-net v1` header"));
            }
            saw_magic = true;
            continue;
        }
        let mut toks = line.split_whitespace();
        let keyword = toks.next().unwrap();
        match keyword {
            "calculus" => {
                if net.is_some() {
                    return Err(QsrError::parse(ln, 1, "duplicate `calculus` line"));
                }
                let calc = toks
                    .next()
                    .ok_or_else(|| QsrError::parse(ln, 9, "missing calculus id"))?;
                let mtok = toks
                    .next()
                    .ok_or_else(|| QsrError::parse(ln, 9, "missing granularity"))?;
                let calculus = CalculusId::from_str(calc)
                    .map_err(|e| QsrError::parse(ln, 10, e.to_string()))?;
                let m = mtok
                    .parse::<u32>()
                    .ok()
                    .and_then(|v| Granularity::new(v).ok())
                    .ok_or_else(|| {
                        QsrError::parse(ln, 10, format!("invalid granularity `{mtok}`"))
                    })?;
                net = Some(ConstraintNetwork::new(calculus, m));
            }
            "node" => {
                let net = net
                    .as_mut()
                    .ok_or_else(|| QsrError::parse(ln, 1, "`node` before `calculus`"))?;
                let name = toks
                    .next()
                    .ok_or_else(|| QsrError::parse(ln, 5, "missing node name"))?;
                if toks.next().is_some() {
                    return Err(QsrError::parse(ln, 1, "trailing tokens after node name"));
                }
                net.add_node(name)
                    .map_err(|e| QsrError::parse(ln, 6, e.to_string()))?;
            }
            "constraint" => {
                let netref = net
                    .as_mut()
                    .ok_or_else(|| QsrError::parse(ln, 1, "`constraint` before `calculus`"))?;
                let a = toks
                    .next()
                    .ok_or_else(|| QsrError::parse(ln, 11, "missing first node"))?;
                let b = toks
                    .next()
                    .ok_or_else(|| QsrError::parse(ln, 11, "missing second node"))?;
                let open = toks
                    .next()
                    .ok_or_else(|| QsrError::parse(ln, 11, "missing `{`"))?;
                if open != "{" {
                    return Err(QsrError::parse(ln, 1, "expected `{` after node pair"));
                }
                let mut members: Vec<BaseRelation> = Vec::new();
                let mut closed = false;
                for tok in toks {
                    if tok == "}" {
                        closed = true;
                        continue;
                    }
                    if closed {
                        return Err(QsrError::parse(ln, 1, "tokens after `}`"));
                    }
                    let r = parse_relation(netref.calculus(), tok)
                        .map_err(|e| QsrError::parse(ln, 1, e.to_string()))?;
                    if r.granularity() != netref.granularity() {
                        return Err(QsrError::parse(
                            ln,
                            1,
                            format!("relation `{tok}` has the wrong granularity"),
                        ));
                    }
                    members.push(r);
                }
                if !closed {
                    return Err(QsrError::parse(ln, 1, "missing closing `}`"));
                }
                let set =
                    RelationSet::from_members(netref.calculus(), netref.granularity(), members)
                        .map_err(|e| QsrError::parse(ln, 1, e.to_string()))?;
                netref
                    .set_constraint(a, b, set)
                    .map_err(|e| QsrError::parse(ln, 12, e.to_string()))?;
            }
            "#end" => {
                saw_end = true;
            }
            other => {
                return Err(QsrError::parse(ln, 1, format!("unknown keyword `{other}`")));
            }
        }
    }
    if !saw_magic {
        return Err(QsrError::parse(1, 1, "missing `#qsr-net v1` header"));
    }
    if !saw_end {
        return Err(QsrError::parse(text.lines().count(), 1, "missing `#end`"));
    }
    net.ok_or_else(|| QsrError::parse(1, 1, "missing `calculus` line"))
}

/// Canonical serialization: header, nodes in declaration order, constraints
/// sorted by node-index pair with members in canonical order.
pub fn serialize_network(net: &ConstraintNetwork) -> String {
    let mut out = String::new();
    out.push_str("#qsr-net v1\n");
    let _ = writeln!(out, "calculus {} {}", net.calculus(), net.granularity());
    for node in net.nodes() {
        let _ = writeln!(out, "node {node}");
    }
    for (&(i, j), set) in net.stored_constraints() {
        let _ = writeln!(
            out,
            "constraint {} {} {{ {} }}",
            net.nodes()[i],
            net.nodes()[j],
            set.to_text()
        );
    }
    out.push_str("#end\n");
    out
}
