//! Nesting and denesting of einsum nodes, and contraction paths.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{list_symbols, DenestObstacle, RewriteError};
use crate::expr::{Einsum, Expr};
use crate::symbol::{FormatString, FreshSymbols, IndexString, IndexSymbol};

use super::rename::rename_unchecked;

fn nested_at(outer: &Einsum, slot: usize) -> Result<&Einsum, RewriteError> {
    match outer.args.get(slot) {
        None => Err(RewriteError::SlotOutOfRange {
            slot,
            arity: outer.arity(),
        }),
        Some(Expr::Einsum(inner)) => Ok(inner),
        Some(_) => Err(RewriteError::NotNested { slot }),
    }
}

/// Replaces operand `slot` of `outer` by the operands of `inner`, in place.
fn splice(
    outer: &Einsum,
    slot: usize,
    inner_inputs: Vec<IndexString>,
    inner_args: Vec<Expr>,
) -> Einsum {
    let mut inputs = outer.format.inputs.clone();
    let mut args = outer.args.clone();
    inputs.splice(slot..=slot, inner_inputs);
    args.splice(slot..=slot, inner_args);
    Einsum::new(FormatString::new(inputs, outer.format.output.clone()), args)
}

/// Flattens the nested node in operand 0. See [`restricted_denest_at`].
pub fn restricted_denest(outer: &Einsum) -> Result<Einsum, RewriteError> {
    restricted_denest_at(outer, 0)
}

/// Flattens the nested node in operand `slot` when its output string equals
/// the outer string for that slot and the two nodes share no other symbols.
/// The inner operands take the place of the nested one.
pub fn restricted_denest_at(outer: &Einsum, slot: usize) -> Result<Einsum, RewriteError> {
    let inner = nested_at(outer, slot)?;
    let iu = &outer.format.inputs[slot];
    if inner.format.output != *iu {
        return Err(RewriteError::PreconditionViolated(
            DenestObstacle::StringMismatch,
        ));
    }
    let allowed = iu.sigma();
    let outer_symbols = outer.symbols();
    if let Some(s) = inner
        .symbols()
        .into_iter()
        .find(|s| outer_symbols.contains(s) && !allowed.contains(s))
    {
        return Err(RewriteError::PreconditionViolated(
            DenestObstacle::SymbolCollision(s),
        ));
    }
    Ok(splice(
        outer,
        slot,
        inner.format.inputs.clone(),
        inner.args.clone(),
    ))
}

/// Groups operands `group` (0-based) into an inner node with output `iu`.
/// The inner node takes the position of the first grouped operand.
pub fn restricted_nest(
    flat: &Einsum,
    group: &[usize],
    iu: &IndexString,
) -> Result<Einsum, RewriteError> {
    let n = flat.arity();
    let grouped: BTreeSet<usize> = group.iter().copied().collect();
    if grouped.is_empty() {
        return Err(RewriteError::MalformedGroup("the group is empty".into()));
    }
    if grouped.len() != group.len() {
        return Err(RewriteError::MalformedGroup(
            "an operand is listed twice".into(),
        ));
    }
    if let Some(&k) = grouped.iter().find(|&&k| k >= n) {
        return Err(RewriteError::SlotOutOfRange { slot: k, arity: n });
    }
    let inside: BTreeSet<IndexSymbol> = grouped
        .iter()
        .flat_map(|&k| flat.format.inputs[k].iter().copied())
        .collect();
    let mut outside: BTreeSet<IndexSymbol> = flat.format.output.sigma();
    for (k, s) in flat.format.inputs.iter().enumerate() {
        if !grouped.contains(&k) {
            outside.extend(s.iter().copied());
        }
    }
    let stray: Vec<IndexSymbol> = iu
        .sigma()
        .into_iter()
        .filter(|s| !inside.contains(s))
        .collect();
    if !stray.is_empty() {
        return Err(RewriteError::MalformedGroup(format!(
            "symbols {} of the intermediate output are not used by the grouped operands",
            list_symbols(&stray)
        )));
    }
    let allowed = iu.sigma();
    let missing: Vec<IndexSymbol> = inside
        .intersection(&outside)
        .filter(|s| !allowed.contains(s))
        .copied()
        .collect();
    if !missing.is_empty() {
        return Err(RewriteError::InvalidGrouping {
            missing: list_symbols(&missing),
        });
    }

    let first = *grouped.iter().next().expect("non-empty");
    let inner = Einsum::new(
        FormatString::new(
            grouped
                .iter()
                .map(|&k| flat.format.inputs[k].clone())
                .collect(),
            iu.clone(),
        ),
        grouped.iter().map(|&k| flat.args[k].clone()).collect(),
    );
    let mut inputs = Vec::new();
    let mut args = Vec::new();
    for k in 0..n {
        if k == first {
            inputs.push(iu.clone());
            args.push(Expr::Einsum(inner.clone()));
        } else if !grouped.contains(&k) {
            inputs.push(flat.format.inputs[k].clone());
            args.push(flat.args[k].clone());
        }
    }
    Ok(Einsum::new(
        FormatString::new(inputs, flat.format.output.clone()),
        args,
    ))
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

/// A vertex of an [`IndexSymbolGraph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Vertex {
    /// Position `i` of the inner output string.
    U(usize),
    /// Position `i` of the outer slot string.
    V(usize),
    /// The unlabeled hub joining `U(i)` and `V(i)`.
    X(usize),
}

/// The graph whose connected components are the symbol classes that must be
/// merged when a nested node is flattened.
///
/// For inner output `a_1…a_d` and outer slot string `b_1…b_d`: `U(i)–U(j)`
/// when `a_i = a_j`, `V(i)–V(j)` when `b_i = b_j`, and `U(i)–X(i)–V(i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSymbolGraph {
    inner: IndexString,
    outer: IndexString,
}

impl IndexSymbolGraph {
    pub fn new(inner: IndexString, outer: IndexString) -> Result<Self, RewriteError> {
        if inner.len() != outer.len() {
            return Err(RewriteError::LengthMismatch {
                inner: inner.len(),
                outer: outer.len(),
            });
        }
        Ok(IndexSymbolGraph { inner, outer })
    }

    /// Number of positions `d`; the graph has `3d` vertices.
    pub fn width(&self) -> usize {
        self.inner.len()
    }

    pub fn vertices(&self) -> Vec<Vertex> {
        let d = self.width();
        (0..d)
            .map(Vertex::U)
            .chain((0..d).map(Vertex::V))
            .chain((0..d).map(Vertex::X))
            .collect()
    }

    pub fn label(&self, v: Vertex) -> Option<IndexSymbol> {
        match v {
            Vertex::U(i) => Some(self.inner.symbols()[i]),
            Vertex::V(i) => Some(self.outer.symbols()[i]),
            Vertex::X(_) => None,
        }
    }

    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let d = self.width();
        let a = self.inner.symbols();
        let b = self.outer.symbols();
        let mut edges = Vec::new();
        for i in 0..d {
            for j in i + 1..d {
                if a[i] == a[j] {
                    edges.push((Vertex::U(i), Vertex::U(j)));
                }
                if b[i] == b[j] {
                    edges.push((Vertex::V(i), Vertex::V(j)));
                }
            }
            edges.push((Vertex::U(i), Vertex::X(i)));
            edges.push((Vertex::V(i), Vertex::X(i)));
        }
        edges
    }

    fn index(&self, v: Vertex) -> usize {
        let d = self.width();
        match v {
            Vertex::U(i) => i,
            Vertex::V(i) => d + i,
            Vertex::X(i) => 2 * d + i,
        }
    }

    /// Connected components, each sorted, ordered by their smallest `X` vertex.
    pub fn components(&self) -> Vec<Vec<Vertex>> {
        let vertices = self.vertices();
        let mut uf = UnionFind::new(vertices.len());
        for (p, q) in self.edges() {
            uf.union(self.index(p), self.index(q));
        }
        let mut groups: BTreeMap<usize, Vec<Vertex>> = BTreeMap::new();
        for v in vertices {
            let root = uf.find(self.index(v));
            groups.entry(root).or_default().push(v);
        }
        let mut comps: Vec<Vec<Vertex>> = groups.into_values().collect();
        for c in &mut comps {
            c.sort();
        }
        comps.sort_by_key(|c| {
            c.iter().find_map(|v| match v {
                Vertex::X(i) => Some(*i),
                _ => None,
            })
        });
        comps
    }

    /// The labels in each component, in component order.
    pub fn symbol_components(&self) -> Vec<BTreeSet<IndexSymbol>> {
        self.components()
            .iter()
            .map(|c| c.iter().filter_map(|&v| self.label(v)).collect())
            .collect()
    }
}

/// A renaming `ν` of index symbols; symbols outside its domain are fixed.
/// Built by [`derive_symbol_map`], which never sends two components to the
/// same symbol.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolMap(pub BTreeMap<IndexSymbol, IndexSymbol>);

impl SymbolMap {
    pub fn apply(&self, s: IndexSymbol) -> IndexSymbol {
        self.0.get(&s).copied().unwrap_or(s)
    }

    /// `ν*`: pointwise on a string.
    pub fn apply_string(&self, index: &IndexString) -> IndexString {
        index.map(|s| self.apply(s))
    }
}

/// One fresh symbol per component; every label maps to its component's symbol.
pub fn derive_symbol_map(graph: &IndexSymbolGraph, fresh: &mut FreshSymbols) -> SymbolMap {
    let mut map = BTreeMap::new();
    for labels in graph.symbol_components() {
        if labels.is_empty() {
            continue;
        }
        let target = fresh.next_symbol();
        for s in labels {
            map.insert(s, target);
        }
    }
    SymbolMap(map)
}

/// Renames inner symbols that also occur in `outer` to fresh tags.
fn separate(outer: &Einsum, inner: &Einsum, fresh: &mut FreshSymbols) -> Einsum {
    let outer_symbols = outer.symbols();
    let map: BTreeMap<_, _> = inner
        .symbols()
        .into_iter()
        .filter(|s| outer_symbols.contains(s))
        .map(|s| (s, fresh.next_symbol()))
        .collect();
    rename_unchecked(inner, &map)
}

/// The index symbol graph of the nested node in operand `slot`, after
/// renaming it apart from the outer node.
pub fn build_index_symbol_graph(
    outer: &Einsum,
    slot: usize,
) -> Result<IndexSymbolGraph, RewriteError> {
    let inner = nested_at(outer, slot)?;
    let shared: Vec<IndexSymbol> = inner
        .symbols()
        .intersection(&outer.symbols())
        .copied()
        .collect();
    if !shared.is_empty() {
        return Err(RewriteError::SharedSymbols(list_symbols(&shared)));
    }
    IndexSymbolGraph::new(
        inner.format.output.clone(),
        outer.format.inputs[slot].clone(),
    )
}

/// Flattens the nested node in operand 0. See [`general_denest_at`].
pub fn general_denest(outer: &Einsum) -> Result<Einsum, RewriteError> {
    general_denest_at(outer, 0)
}

/// Flattens the nested node in operand `slot` without any precondition on
/// its strings. Symbols tied together by the index symbol graph are merged
/// into one fresh symbol; the inner operands replace the nested one in place.
pub fn general_denest_at(outer: &Einsum, slot: usize) -> Result<Einsum, RewriteError> {
    let inner = nested_at(outer, slot)?;
    let mut fresh = FreshSymbols::avoiding(outer.symbols().iter());
    fresh.reserve(inner.symbols().iter());
    let inner = separate(outer, inner, &mut fresh);
    let graph = IndexSymbolGraph::new(
        inner.format.output.clone(),
        outer.format.inputs[slot].clone(),
    )?;
    let nu = derive_symbol_map(&graph, &mut fresh);

    let inner_inputs = inner
        .format
        .inputs
        .iter()
        .map(|s| nu.apply_string(s))
        .collect();
    let mut result = splice(outer, slot, inner_inputs, inner.args);
    for s in result.format.inputs.iter_mut().take(slot) {
        *s = nu.apply_string(s);
    }
    let skip = slot + inner.format.inputs.len();
    for s in result.format.inputs.iter_mut().skip(skip) {
        *s = nu.apply_string(s);
    }
    result.format.output = nu.apply_string(&result.format.output);
    Ok(result)
}

/// Flattens every einsum-in-einsum nesting, innermost first. Aggregates
/// are left in place.
pub fn denest_fully(expr: &Expr) -> Expr {
    match expr {
        Expr::Einsum(node) => {
            let args: Vec<Expr> = node.args.iter().map(denest_fully).collect();
            let mut node = Einsum::new(node.format.clone(), args);
            while let Some(slot) = node.args.iter().position(|a| matches!(a, Expr::Einsum(_))) {
                node = general_denest_at(&node, slot).expect("operand is a nested einsum");
            }
            Expr::Einsum(node)
        }
        Expr::Aggregate(terms) => Expr::Aggregate(terms.iter().map(denest_fully).collect()),
        leaf => leaf.clone(),
    }
}

/// An order of pairwise contractions: each step names two live operand
/// positions (0-based). The intermediate takes the lower position and the
/// higher one is removed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractionPath(pub Vec<(usize, usize)>);

impl ContractionPath {
    /// Every contraction path over `n` operands.
    pub fn all(n: usize) -> Vec<ContractionPath> {
        if n <= 1 {
            return vec![ContractionPath(Vec::new())];
        }
        let mut out = Vec::new();
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    for rest in ContractionPath::all(n - 1) {
                        let mut steps = vec![(p, q)];
                        steps.extend(rest.0);
                        out.push(ContractionPath(steps));
                    }
                }
            }
        }
        out
    }
}

/// Parses `[(2,3),(1,2)]` with 1-based positions.
impl FromStr for ContractionPath {
    type Err = RewriteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |m: &str| RewriteError::MalformedPath(m.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let body = compact
            .strip_prefix('[')
            .and_then(|b| b.strip_suffix(']'))
            .ok_or_else(|| bad("expected `[(p,q),...]`"))?;
        let mut steps = Vec::new();
        let mut rest = body;
        while !rest.is_empty() {
            let open = rest.strip_prefix('(').ok_or_else(|| bad("expected `(`"))?;
            let close = open.find(')').ok_or_else(|| bad("missing `)`"))?;
            let (p, q) = open[..close]
                .split_once(',')
                .ok_or_else(|| bad("a step needs two positions"))?;
            let pos = |t: &str| -> Result<usize, RewriteError> {
                match t.parse::<usize>() {
                    Ok(k) if k >= 1 => Ok(k - 1),
                    _ => Err(bad(&format!("`{t}` is not a 1-based position"))),
                }
            };
            steps.push((pos(p)?, pos(q)?));
            rest = &open[close + 1..];
            rest = rest.strip_prefix(',').unwrap_or(rest);
        }
        Ok(ContractionPath(steps))
    }
}

impl fmt::Display for ContractionPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, (p, q)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "({},{})", p + 1, q + 1)?;
        }
        f.write_str("]")
    }
}

/// Decomposes a flat node into a tree of binary nodes. Intermediate outputs
/// are the sorted symbols still needed by the final output or by operands not
/// yet contracted; the last step keeps the original output string.
pub fn apply_contraction_path(flat: &Einsum, path: &ContractionPath) -> Result<Expr, RewriteError> {
    let n = flat.arity();
    if path.0.len() + 1 != n.max(1) {
        return Err(RewriteError::MalformedPath(format!(
            "{n} operands need {} steps, found {}",
            n.saturating_sub(1),
            path.0.len()
        )));
    }
    let mut live: Vec<(IndexString, Expr)> = flat
        .format
        .inputs
        .iter()
        .cloned()
        .zip(flat.args.iter().cloned())
        .collect();
    if n == 1 {
        return Ok(Expr::Einsum(flat.clone()));
    }
    for (step, &(p, q)) in path.0.iter().enumerate() {
        if p == q || p >= live.len() || q >= live.len() {
            return Err(RewriteError::MalformedPath(format!(
                "step {} ({},{}) does not name two of the {} live operands",
                step + 1,
                p + 1,
                q + 1,
                live.len()
            )));
        }
        let (lo, hi) = (p.min(q), p.max(q));
        let output = if live.len() == 2 {
            flat.format.output.clone()
        } else {
            let mut needed = flat.format.output.sigma();
            for (k, (s, _)) in live.iter().enumerate() {
                if k != lo && k != hi {
                    needed.extend(s.iter().copied());
                }
            }
            let pair = live[p]
                .0
                .sigma()
                .union(&live[q].0.sigma())
                .copied()
                .collect::<BTreeSet<_>>();
            pair.intersection(&needed).copied().collect()
        };
        let node = Einsum::new(
            FormatString::new(vec![live[p].0.clone(), live[q].0.clone()], output.clone()),
            vec![live[p].1.clone(), live[q].1.clone()],
        );
        live.remove(hi);
        live[lo] = (output, Expr::Einsum(node));
    }
    Ok(live.pop().expect("one operand remains").1)
}
