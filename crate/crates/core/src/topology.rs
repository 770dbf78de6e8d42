//! Cylinder sets and the clopen calculus of the shift space.
//!
//! Basic open sets come in two kinds: `D(β,B)` collects the points extending
//! the path `β` into the set `B` (plus the finite points `(β, A)` with `A` a
//! minimal infinite emitter inside `B`), and `D(β,B),F` additionally forbids
//! finitely many next edges. The boolean algebra these sets generate is
//! represented exactly by [`Clopen`]: finitely many atom points plus tail
//! patches, kept in a canonical pairwise disjoint form, so set equality is
//! structural equality.
//!
//! Internally a clopen set is a finite trie over edge paths. Each node holds
//! the atoms stopping there and an ultimately periodic set of continuation
//! edges whose whole subtree is included; explicit children refine single
//! continuation edges. Canonicalization merges a child that has become a
//! complete cylinder back into its parent's tail set, which makes the
//! representation unique.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::setcalc::{Cardinality, UpSet};
use crate::ultragraph::{EdgeId, GSet, GraphError, Ultragraph};
use crate::ultrapath::{PathError, Point, PointLen, Ultrapath};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("points are equal; nothing to separate")]
    PointsEqual,
    #[error("restricted cylinders need a base in the finite part of the space")]
    BaseNotFinitePoint,
    #[error("forbidden edge {0} does not leave the base set")]
    ForbiddenEdgeOutside(EdgeId),
    #[error("tail edge set is not contained in the edges leaving the base")]
    TailOutsideRange,
    #[error("{0}")]
    Graph(#[from] GraphError),
    #[error("{0}")]
    Path(#[from] PathError),
    #[error("{0}")]
    Set(#[from] crate::setcalc::SetError),
}

/// A basis element of the topology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cylinder {
    /// `D(β,B)`: everything extending `β` into `B`. Zero-length bases are
    /// allowed and denote the set of points whose source lies in `B`.
    Full { base: Ultrapath },
    /// `D(β,B),F`: the base point itself plus extensions avoiding `F`.
    Restricted {
        base: Ultrapath,
        excluded: Vec<EdgeId>,
    },
}

impl Cylinder {
    pub fn full(base: Ultrapath) -> Self {
        Cylinder::Full { base }
    }

    /// Checks that the base is a point of the space and that every excluded
    /// edge leaves the base set.
    pub fn restricted(
        g: &Ultragraph,
        base: Ultrapath,
        excluded: Vec<EdgeId>,
    ) -> Result<Self, TopologyError> {
        if Point::finite(g, base.clone()).is_err() {
            return Err(TopologyError::BaseNotFinitePoint);
        }
        let eps = g.epsilon(base.terminal().set())?;
        let mut excluded = excluded;
        excluded.sort();
        excluded.dedup();
        for &e in &excluded {
            if !eps.contains(e.0) {
                return Err(TopologyError::ForbiddenEdgeOutside(e));
            }
        }
        Ok(Cylinder::Restricted { base, excluded })
    }

    pub fn base(&self) -> &Ultrapath {
        match self {
            Cylinder::Full { base } => base,
            Cylinder::Restricted { base, .. } => base,
        }
    }

    /// Compactness is a theorem for presentations whose ranges decompose
    /// into minimal emitters and single vertices; the flag reports whether
    /// that applies. It is not computed from the set itself.
    pub fn flagged_compact(&self, g: &Ultragraph) -> bool {
        g.rfum_check().is_pass()
    }

    /// Expands the cylinder into the canonical clopen form.
    pub fn to_clopen(&self, g: &Ultragraph) -> Result<Clopen, TopologyError> {
        match self {
            Cylinder::Full { base } => {
                let b = base.terminal().set();
                let atoms = g
                    .minimal_infinite_emitters(Some(b))?
                    .into_iter()
                    .map(|a| (base.edges().to_vec(), a))
                    .collect();
                let tail = Tail {
                    path: base.edges().to_vec(),
                    edges: g.epsilon(b)?,
                };
                Clopen::assemble(g, atoms, vec![tail])
            }
            Cylinder::Restricted { base, excluded } => {
                let b = base.terminal().set();
                let mut eps = g.epsilon(b)?;
                for e in excluded {
                    eps = eps.difference(&UpSet::singleton(eps.universe(), e.0))?;
                }
                let atom = (base.edges().to_vec(), base.terminal().clone());
                let tail = Tail {
                    path: base.edges().to_vec(),
                    edges: eps,
                };
                Clopen::assemble(g, vec![atom], vec![tail])
            }
        }
    }
}

impl fmt::Display for Cylinder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cylinder::Full { base } => write!(f, "full({base})"),
            Cylinder::Restricted { base, excluded } => {
                write!(f, "restricted({base};{{")?;
                for (i, e) in excluded.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, "}})")
            }
        }
    }
}

/// A tail patch: all points extending `path` whose next edge lies in
/// `edges`. Finite points of length `|path| + 1` with a matching last edge
/// are included.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tail {
    pub path: Vec<EdgeId>,
    pub edges: UpSet,
}

impl fmt::Display for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tail ")?;
        for (i, e) in self.path.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ":[{}]", self.edges)
    }
}

/// Canonical disjoint normal form for the algebra generated by cylinders:
/// finitely many atom points plus tail patches hanging off a prefix tree.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Clopen {
    atoms: Vec<(Vec<EdgeId>, GSet)>,
    tails: Vec<Tail>,
}

impl Clopen {
    pub fn empty() -> Self {
        Clopen::default()
    }

    /// Atom points `(β, A)` of the set, sorted.
    pub fn atom_points(&self, g: &Ultragraph) -> Vec<Ultrapath> {
        self.atoms
            .iter()
            .map(|(path, a)| {
                Ultrapath::new(g, path.clone(), a.clone()).expect("atoms are valid points")
            })
            .collect()
    }

    /// Raw atom data: path plus terminal.
    pub fn atoms(&self) -> &[(Vec<EdgeId>, GSet)] {
        &self.atoms
    }

    pub fn tails(&self) -> &[Tail] {
        &self.tails
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.tails.is_empty()
    }

    /// Builds the canonical form from arbitrary patches. Tails must satisfy
    /// `edges ⊆ ε(r(path))`; atoms must be points of the space.
    pub fn from_patches(
        g: &Ultragraph,
        atoms: Vec<Ultrapath>,
        tails: Vec<Tail>,
    ) -> Result<Self, TopologyError> {
        for a in &atoms {
            if Point::finite(g, a.clone()).is_err() {
                return Err(TopologyError::BaseNotFinitePoint);
            }
        }
        for t in &tails {
            let allowed = match t.path.last() {
                Some(&e) => g.epsilon(g.range(e)?)?,
                None => g.all_edges(),
            };
            if !t.edges.is_subset(&allowed)? {
                return Err(TopologyError::TailOutsideRange);
            }
            crate::ultrapath::validate_edge_path(g, &t.path)?;
        }
        Clopen::assemble(
            g,
            atoms
                .into_iter()
                .map(|a| (a.edges().to_vec(), a.terminal().clone()))
                .collect(),
            tails,
        )
    }

    fn assemble(
        g: &Ultragraph,
        atoms: Vec<(Vec<EdgeId>, GSet)>,
        tails: Vec<Tail>,
    ) -> Result<Self, TopologyError> {
        let mut acc = Node::default();
        for (path, a) in atoms {
            let mut t = Node::default();
            t.place_atom(&path, a);
            acc = Node::union(g, &acc, &t)?;
        }
        for tail in tails {
            if tail.edges.is_empty() {
                continue;
            }
            let mut t = Node::default();
            t.place_tail(&tail.path, tail.edges);
            acc = Node::union(g, &acc, &t)?;
        }
        acc.canonicalize(g)?;
        Ok(acc.flatten())
    }

    fn to_trie(&self, g: &Ultragraph) -> Result<Node, TopologyError> {
        let mut acc = Node::default();
        for (path, a) in &self.atoms {
            let mut t = Node::default();
            t.place_atom(path, a.clone());
            acc = Node::union(g, &acc, &t)?;
        }
        for tail in &self.tails {
            let mut t = Node::default();
            t.place_tail(&tail.path, tail.edges.clone());
            acc = Node::union(g, &acc, &t)?;
        }
        Ok(acc)
    }

    pub fn union(&self, g: &Ultragraph, other: &Clopen) -> Result<Clopen, TopologyError> {
        let mut n = Node::union(g, &self.to_trie(g)?, &other.to_trie(g)?)?;
        n.canonicalize(g)?;
        Ok(n.flatten())
    }

    pub fn intersect(&self, g: &Ultragraph, other: &Clopen) -> Result<Clopen, TopologyError> {
        let mut n = Node::intersect(g, &self.to_trie(g)?, &other.to_trie(g)?)?;
        n.canonicalize(g)?;
        Ok(n.flatten())
    }

    pub fn difference(&self, g: &Ultragraph, other: &Clopen) -> Result<Clopen, TopologyError> {
        let mut n = Node::difference(g, &self.to_trie(g)?, &other.to_trie(g)?)?;
        n.canonicalize(g)?;
        Ok(n.flatten())
    }

    pub fn is_subset(&self, g: &Ultragraph, other: &Clopen) -> Result<bool, TopologyError> {
        Ok(self.difference(g, other)?.is_empty())
    }

    pub fn is_disjoint(&self, g: &Ultragraph, other: &Clopen) -> Result<bool, TopologyError> {
        Ok(self.intersect(g, other)?.is_empty())
    }

    /// Decides membership of a point by walking the prefix tree.
    pub fn member(&self, g: &Ultragraph, x: &Point) -> Result<bool, TopologyError> {
        Ok(self.to_trie(g)?.member(x, 0))
    }
}

impl fmt::Display for Clopen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "{{}}");
        }
        write!(f, "{{")?;
        let mut first = true;
        for (path, a) in &self.atoms {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "atom ")?;
            for (i, e) in path.iter().enumerate() {
                if i > 0 {
                    write!(f, ".")?;
                }
                write!(f, "{e}")?;
            }
            write!(f, ":[{a}];")?;
            first = false;
        }
        for t in &self.tails {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{t};")?;
            first = false;
        }
        write!(f, "}}")
    }
}

/// Trie node at some path `π`: atoms of length `|π|`, the tail edge set of
/// fully included continuations, and refined children for single edges.
/// Children keys never occur in the tail set.
#[derive(Debug, Clone, Default)]
struct Node {
    atoms: Vec<GSet>,
    tail: Option<UpSet>,
    children: BTreeMap<EdgeId, Node>,
}

impl Node {
    fn tail_contains(&self, e: EdgeId) -> bool {
        self.tail.as_ref().map_or(false, |t| t.contains(e.0))
    }

    fn is_void(&self) -> bool {
        self.atoms.is_empty()
            && self.tail.as_ref().map_or(true, |t| t.is_empty())
            && self.children.is_empty()
    }

    fn place_atom(&mut self, path: &[EdgeId], a: GSet) {
        match path.first() {
            None => {
                if !self.atoms.contains(&a) {
                    self.atoms.push(a);
                    self.atoms.sort();
                }
            }
            Some(&e) => self.children.entry(e).or_default().place_atom(&path[1..], a),
        }
    }

    fn place_tail(&mut self, path: &[EdgeId], edges: UpSet) {
        match path.first() {
            None => {
                self.tail = Some(match self.tail.take() {
                    None => edges,
                    Some(t) => t.union(&edges).expect("same edge universe"),
                });
            }
            Some(&e) => self
                .children
                .entry(e)
                .or_default()
                .place_tail(&path[1..], edges),
        }
    }

    /// The full cylinder hanging under edge `e`: all minimal emitters in
    /// `r(e)` as atoms plus every continuation edge.
    fn full_under(g: &Ultragraph, e: EdgeId) -> Result<Node, TopologyError> {
        let r = g.range(e)?.clone();
        Ok(Node {
            atoms: g.minimal_infinite_emitters(Some(&r))?,
            tail: Some(g.epsilon(&r)?),
            children: BTreeMap::new(),
        })
    }

    fn union(g: &Ultragraph, a: &Node, b: &Node) -> Result<Node, TopologyError> {
        let mut atoms = a.atoms.clone();
        for x in &b.atoms {
            if !atoms.contains(x) {
                atoms.push(x.clone());
            }
        }
        atoms.sort();
        let tail = match (&a.tail, &b.tail) {
            (None, t) | (t, None) => t.clone(),
            (Some(x), Some(y)) => Some(x.union(y)?),
        };
        let mut out = Node {
            atoms,
            tail,
            children: BTreeMap::new(),
        };
        let keys: Vec<EdgeId> = a.children.keys().chain(b.children.keys()).copied().collect();
        for e in keys {
            if out.children.contains_key(&e) || out.tail_contains(e) {
                continue;
            }
            let child = match (a.children.get(&e), b.children.get(&e)) {
                (Some(x), Some(y)) => Node::union(g, x, y)?,
                (Some(x), None) => x.clone(),
                (None, Some(y)) => y.clone(),
                (None, None) => unreachable!(),
            };
            out.children.insert(e, child);
        }
        Ok(out)
    }

    fn intersect(g: &Ultragraph, a: &Node, b: &Node) -> Result<Node, TopologyError> {
        let atoms: Vec<GSet> = a
            .atoms
            .iter()
            .filter(|x| b.atoms.contains(x))
            .cloned()
            .collect();
        let tail = match (&a.tail, &b.tail) {
            (Some(x), Some(y)) => Some(x.intersect(y)?),
            _ => None,
        };
        let mut out = Node {
            atoms,
            tail,
            children: BTreeMap::new(),
        };
        for (&e, x) in &a.children {
            let child = if let Some(y) = b.children.get(&e) {
                Node::intersect(g, x, y)?
            } else if b.tail_contains(e) {
                x.clone()
            } else {
                continue;
            };
            out.children.insert(e, child);
        }
        for (&e, y) in &b.children {
            if a.children.contains_key(&e) {
                continue;
            }
            if a.tail_contains(e) {
                out.children.insert(e, y.clone());
            }
        }
        Ok(out)
    }

    fn difference(g: &Ultragraph, a: &Node, b: &Node) -> Result<Node, TopologyError> {
        let atoms: Vec<GSet> = a
            .atoms
            .iter()
            .filter(|x| !b.atoms.contains(x))
            .cloned()
            .collect();
        let mut tail = a.tail.clone();
        if let Some(t) = tail.as_mut() {
            if let Some(bt) = &b.tail {
                *t = t.difference(bt)?;
            }
            for &e in b.children.keys() {
                *t = t.difference(&UpSet::singleton(t.universe(), e.0))?;
            }
        }
        let mut out = Node {
            atoms,
            tail,
            children: BTreeMap::new(),
        };
        for (&e, x) in &a.children {
            if b.tail_contains(e) {
                continue;
            }
            let child = if let Some(y) = b.children.get(&e) {
                Node::difference(g, x, y)?
            } else {
                x.clone()
            };
            out.children.insert(e, child);
        }
        // Parts of a's tail refined away by b's children.
        for (&e, y) in &b.children {
            if a.tail_contains(e) {
                let full = Node::full_under(g, e)?;
                out.children.insert(e, Node::difference(g, &full, y)?);
            }
        }
        Ok(out)
    }

    /// Bottom-up cleanup: drop empty children, absorb children that equal
    /// their whole cylinder into the tail set. The root is never absorbed.
    fn canonicalize(&mut self, g: &Ultragraph) -> Result<(), TopologyError> {
        let keys: Vec<EdgeId> = self.children.keys().copied().collect();
        for e in keys {
            let mut child = self.children.remove(&e).unwrap();
            child.canonicalize(g)?;
            if child.is_void() {
                continue;
            }
            if child.children.is_empty() && child.is_full_cylinder(g, e)? {
                let uni = g.edge_universe();
                let single = UpSet::singleton(uni, e.0);
                self.tail = Some(match self.tail.take() {
                    None => single,
                    Some(t) => t.union(&single)?,
                });
            } else {
                self.children.insert(e, child);
            }
        }
        if let Some(t) = &self.tail {
            if t.is_empty() {
                self.tail = None;
            }
        }
        Ok(())
    }

    /// Whether this (child-free) node equals the complete cylinder under
    /// edge `e`.
    fn is_full_cylinder(&self, g: &Ultragraph, e: EdgeId) -> Result<bool, TopologyError> {
        let r = g.range(e)?.clone();
        let all_atoms = g.minimal_infinite_emitters(Some(&r))?;
        if self.atoms != all_atoms {
            return Ok(false);
        }
        let eps = g.epsilon(&r)?;
        Ok(self.tail.as_ref() == Some(&eps))
    }

    fn flatten(&self) -> Clopen {
        let mut out = Clopen::empty();
        let mut path = Vec::new();
        self.flatten_into(&mut path, &mut out);
        out.atoms.sort();
        out.tails.sort();
        out
    }

    fn flatten_into(&self, path: &mut Vec<EdgeId>, out: &mut Clopen) {
        for a in &self.atoms {
            out.atoms.push((path.clone(), a.clone()));
        }
        if let Some(t) = &self.tail {
            if !t.is_empty() {
                out.tails.push(Tail {
                    path: path.clone(),
                    edges: t.clone(),
                });
            }
        }
        for (&e, c) in &self.children {
            path.push(e);
            c.flatten_into(path, out);
            path.pop();
        }
    }

    /// Membership walk; `depth` edges of `x` already consumed.
    fn member(&self, x: &Point, depth: usize) -> bool {
        match x.edge_at(depth + 1) {
            None => {
                // Finite point ending exactly here.
                x.terminal().map_or(false, |t| self.atoms.contains(t))
            }
            Some(e) => {
                if self.tail_contains(e) {
                    return true;
                }
                match self.children.get(&e) {
                    Some(c) => c.member(x, depth + 1),
                    None => false,
                }
            }
        }
    }
}

/// Separating basis neighborhoods around two distinct points.
///
/// The construction follows the case split on where the points first differ:
/// diverging coordinates give two full cylinders; an infinite point passing
/// through a finite point's base gets the base restricted by the witnessing
/// next edge; equal bases with overlapping terminals are restricted by the
/// finitely many edges leaving the overlap.
pub fn separate(
    g: &Ultragraph,
    x: &Point,
    y: &Point,
) -> Result<(Cylinder, Cylinder), TopologyError> {
    if x == y {
        return Err(TopologyError::PointsEqual);
    }
    match (x, y) {
        (Point::Infinite { .. }, Point::Infinite { .. }) => {
            let bound = compare_bound(x, y);
            let n = (1..=bound)
                .find(|&i| x.edge_at(i) != y.edge_at(i))
                .expect("distinct infinite points differ within the bound");
            Ok((prefix_cylinder(g, x, n)?, prefix_cylinder(g, y, n)?))
        }
        (Point::Infinite { .. }, Point::Finite(q)) => {
            let (cx, cy) = separate_infinite_finite(g, x, q)?;
            Ok((cx, cy))
        }
        (Point::Finite(p), Point::Infinite { .. }) => {
            let (cy, cx) = separate_infinite_finite(g, y, p)?;
            Ok((cx, cy))
        }
        (Point::Finite(p), Point::Finite(q)) => separate_finite_finite(g, p, q),
    }
}

fn compare_bound(x: &Point, y: &Point) -> usize {
    let part = |p: &Point| -> (usize, usize) {
        match p {
            Point::Infinite { prefix, cycle } => (prefix.len(), cycle.len()),
            Point::Finite(u) => (u.len(), 1),
        }
    };
    let (px, cx) = part(x);
    let (py, cy) = part(y);
    px.max(py) + (cx * cy) + 1
}

fn prefix_cylinder(g: &Ultragraph, x: &Point, n: usize) -> Result<Cylinder, TopologyError> {
    let edges = x.edge_prefix(n);
    Ok(Cylinder::full(Ultrapath::from_edges(g, edges)?))
}

fn separate_infinite_finite(
    g: &Ultragraph,
    x: &Point,
    y: &Ultrapath,
) -> Result<(Cylinder, Cylinder), TopologyError> {
    let k = y.len();
    if !x.starts_with(y.edges()) {
        let n = (1..=k)
            .find(|&i| x.edge_at(i) != y.edges().get(i - 1).copied())
            .expect("some coordinate differs");
        let cy = Cylinder::full(Ultrapath::from_edges(g, y.edges()[..n].to_vec())?);
        return Ok((prefix_cylinder(g, x, n)?, cy));
    }
    // The base is an initial segment of x; split on the next edge of x.
    let e = x.edge_at(k + 1).expect("infinite point continues");
    let cx = prefix_cylinder(g, x, k + 1)?;
    let b = y.terminal().set();
    let excluded = if b.contains(g.source(e)?.0) {
        vec![e]
    } else {
        Vec::new()
    };
    let cy = Cylinder::restricted(g, y.clone(), excluded)?;
    Ok((cx, cy))
}

fn separate_finite_finite(
    g: &Ultragraph,
    p: &Ultrapath,
    q: &Ultrapath,
) -> Result<(Cylinder, Cylinder), TopologyError> {
    if p.edges() == q.edges() {
        let a = p.terminal().set();
        let b = q.terminal().set();
        let meet = a.intersect(b)?;
        if meet.is_empty() {
            return Ok((Cylinder::full(p.clone()), Cylinder::full(q.clone())));
        }
        // The overlap of two distinct minimal emitters emits only finitely
        // many edges; forbidding those separates the cylinders.
        let eps = g.epsilon(&meet)?;
        let shared: Vec<EdgeId> = match eps.cardinality() {
            Cardinality::Finite(_) => eps.iter().map(EdgeId).collect(),
            Cardinality::Infinite => unreachable!("overlap of distinct minimal emitters is finite"),
        };
        return Ok((
            Cylinder::restricted(g, p.clone(), shared.clone())?,
            Cylinder::restricted(g, q.clone(), shared)?,
        ));
    }
    let k = p.len().min(q.len());
    if let Some(n) = (1..=k).find(|&i| p.edges()[i - 1] != q.edges()[i - 1]) {
        return Ok((
            Cylinder::full(Ultrapath::from_edges(g, p.edges()[..n].to_vec())?),
            Cylinder::full(Ultrapath::from_edges(g, q.edges()[..n].to_vec())?),
        ));
    }
    // One base is a proper initial segment of the other.
    let (short, long, swapped) = if p.len() < q.len() {
        (p, q, false)
    } else {
        (q, p, true)
    };
    let e = long.edges()[short.len()];
    let c_long = Cylinder::full(Ultrapath::from_edges(
        g,
        long.edges()[..short.len() + 1].to_vec(),
    )?);
    let excluded = if short.terminal().set().contains(g.source(e)?.0) {
        vec![e]
    } else {
        Vec::new()
    };
    let c_short = Cylinder::restricted(g, short.clone(), excluded)?;
    Ok(if swapped {
        (c_long, c_short)
    } else {
        (c_short, c_long)
    })
}

/// How a sequence of points is supplied to the convergence checker.
pub enum SeqSpec<'a> {
    List(&'a [Point]),
    Rule(&'a dyn Fn(u64) -> Point),
}

impl SeqSpec<'_> {
    fn at(&self, n: u64) -> Point {
        match self {
            SeqSpec::List(v) => v[(n - 1) as usize].clone(),
            SeqSpec::Rule(f) => f(n),
        }
    }

    fn is_rule(&self) -> bool {
        matches!(self, SeqSpec::Rule(_))
    }
}

/// A single convergence criterion probe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Probe {
    /// Agreement on the first `M` coordinates (infinite limits).
    PrefixAgreement(u64),
    /// Base agreement and escape through the emitter edges (finite limits).
    BaseAgreement,
    /// Next edge eventually avoids this finite forbidden set.
    ForbiddenSet(Vec<EdgeId>),
}

impl fmt::Display for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Probe::PrefixAgreement(m) => write!(f, "prefix M={m}"),
            Probe::BaseAgreement => write!(f, "base agreement"),
            Probe::ForbiddenSet(es) => {
                write!(f, "forbidden F={{")?;
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct CertEntry {
    pub probe: Probe,
    /// Smallest bound past which the probe condition held up to the horizon.
    pub n0: u64,
}

#[derive(Debug, Clone)]
pub enum ConvergenceOutcome {
    Certified {
        entries: Vec<CertEntry>,
    },
    Refuted {
        probe: Probe,
        /// Sample of violating sequence indices.
        violations: Vec<u64>,
    },
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub outcome: ConvergenceOutcome,
    pub horizon: u64,
    /// Rule-based sequences are only certified up to the horizon.
    pub rule_based: bool,
}

impl ConvergenceReport {
    pub fn converged(&self) -> bool {
        matches!(self.outcome, ConvergenceOutcome::Certified { .. })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConvergeOpts {
    /// Prefix lengths probed for infinite limits.
    pub max_prefix_probe: u64,
    /// Number of forbidden-set probes for finite limits.
    pub max_forbidden_probe: u64,
}

impl Default for ConvergeOpts {
    fn default() -> Self {
        ConvergeOpts {
            max_prefix_probe: 16,
            max_forbidden_probe: 8,
        }
    }
}

/// Checks the sequence against the convergence criterion for its limit
/// candidate up to `horizon`, probing finitely many instances of the
/// quantifiers. A probe that still fails at the horizon refutes; otherwise
/// the report certifies each probe with the bound found.
pub fn converges(
    g: &Ultragraph,
    seq: SeqSpec<'_>,
    x: &Point,
    horizon: u64,
    opts: ConvergeOpts,
) -> Result<ConvergenceReport, TopologyError> {
    let horizon = match &seq {
        SeqSpec::List(v) => horizon.min(v.len() as u64),
        SeqSpec::Rule(_) => horizon,
    };
    let probes: Vec<Probe> = match x.len() {
        PointLen::Infinite => (1..=opts.max_prefix_probe)
            .map(Probe::PrefixAgreement)
            .collect(),
        PointLen::Finite(_) => {
            let a = x.terminal().expect("finite points carry a terminal").set();
            let eps = g.epsilon(a)?;
            let mut probes = vec![Probe::BaseAgreement];
            let firsts: Vec<EdgeId> = eps
                .iter()
                .take(opts.max_forbidden_probe as usize)
                .map(EdgeId)
                .collect();
            for j in 1..=firsts.len() {
                probes.push(Probe::ForbiddenSet(firsts[..j].to_vec()));
            }
            probes
        }
    };

    let holds = |probe: &Probe, n: u64| -> bool {
        let xn = seq.at(n);
        match probe {
            Probe::PrefixAgreement(m) => {
                let m = *m as usize;
                point_len_at_least(&xn, m) && xn.edge_prefix(m) == x.edge_prefix(m)
            }
            Probe::BaseAgreement => {
                if &xn == x {
                    return true;
                }
                let k = match x.len() {
                    PointLen::Finite(k) => k,
                    PointLen::Infinite => unreachable!(),
                };
                let a = x.terminal().unwrap().set();
                point_len_at_least(&xn, k + 1)
                    && xn.edge_prefix(k) == x.edge_prefix(k)
                    && xn
                        .edge_at(k + 1)
                        .map_or(false, |e| g.source(e).map_or(false, |v| a.contains(v.0)))
            }
            Probe::ForbiddenSet(fs) => {
                if &xn == x {
                    return true;
                }
                let k = match x.len() {
                    PointLen::Finite(k) => k,
                    PointLen::Infinite => unreachable!(),
                };
                xn.edge_at(k + 1).map_or(false, |e| !fs.contains(&e))
            }
        }
    };

    let mut entries = Vec::new();
    for probe in probes {
        let violations: Vec<u64> = (1..=horizon).filter(|&n| !holds(&probe, n)).collect();
        match violations.last() {
            Some(&last) if last == horizon => {
                return Ok(ConvergenceReport {
                    outcome: ConvergenceOutcome::Refuted {
                        probe,
                        violations: violations.into_iter().take(10).collect(),
                    },
                    horizon,
                    rule_based: seq.is_rule(),
                });
            }
            Some(&last) => entries.push(CertEntry { probe, n0: last }),
            None => entries.push(CertEntry { probe, n0: 0 }),
        }
    }
    Ok(ConvergenceReport {
        outcome: ConvergenceOutcome::Certified { entries },
        horizon,
        rule_based: seq.is_rule(),
    })
}

fn point_len_at_least(p: &Point, n: usize) -> bool {
    match p.len() {
        PointLen::Infinite => true,
        PointLen::Finite(k) => k >= n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::setcalc::{UpSet, Universe};

    fn cofin3() -> UpSet {
        UpSet::from_index(Universe::Infinite, 3)
    }

    fn e(n: u64) -> EdgeId {
        EdgeId(n)
    }

    fn full_e1(g: &Ultragraph) -> Cylinder {
        Cylinder::full(Ultrapath::from_edges(g, vec![e(1)]).unwrap())
    }

    #[test]
    fn full_cylinder_over_its_whole_range_merges_up() {
        // D(e1, r(e1)) is the complete subtree under e1, so the canonical
        // form is a single root tail through e1. The atom (e1, cofin3) and
        // all continuations are inside it.
        let g = presets::example1();
        let c = full_e1(&g).to_clopen(&g).unwrap();
        assert!(c.atoms().is_empty());
        assert_eq!(c.tails().len(), 1);
        assert!(c.tails()[0].path.is_empty());
        assert_eq!(c.tails()[0].edges, UpSet::singleton(Universe::Infinite, 1));
        let atom = Point::finite(
            &g,
            Ultrapath::new(&g, vec![e(1)], g.gset(&cofin3())).unwrap(),
        )
        .unwrap();
        assert!(c.member(&g, &atom).unwrap());
    }

    #[test]
    fn full_cylinder_over_a_proper_subset_keeps_atom_and_tail() {
        // D(e1, odds) with odds a proper subset of r(e1): the expansion is
        // the atom (e1, odds) plus the tail of continuations into odds.
        let g = presets::matrix_b();
        let odds = UpSet::arithmetic(Universe::Infinite, 1, &[true, false]);
        let c = Cylinder::full(Ultrapath::new(&g, vec![e(1)], g.gset(&odds)).unwrap())
            .to_clopen(&g)
            .unwrap();
        assert_eq!(c.atoms().len(), 1);
        assert_eq!(c.atoms()[0].0, vec![e(1)]);
        assert_eq!(c.atoms()[0].1.set(), &odds);
        assert_eq!(c.tails().len(), 1);
        assert_eq!(c.tails()[0].path, vec![e(1)]);
        assert_eq!(c.tails()[0].edges, g.epsilon(&odds).unwrap());
    }

    #[test]
    fn zero_length_restricted_with_empty_forbidden() {
        let g = presets::example1();
        let base = Ultrapath::zero_length(g.gset(&cofin3())).unwrap();
        let c = Cylinder::restricted(&g, base, vec![])
            .unwrap()
            .to_clopen(&g)
            .unwrap();
        assert_eq!(c.atoms().len(), 1);
        assert!(c.atoms()[0].0.is_empty());
        assert_eq!(c.tails().len(), 1);
        assert!(c.tails()[0].path.is_empty());
        assert_eq!(c.tails()[0].edges, g.epsilon(&cofin3()).unwrap());
    }

    #[test]
    fn finite_graph_cylinder_has_no_atoms() {
        let g = presets::two_vertex();
        let c = Cylinder::full(Ultrapath::from_edges(&g, vec![e(1)]).unwrap())
            .to_clopen(&g)
            .unwrap();
        assert!(c.atoms().is_empty());
        assert_eq!(c.tails().len(), 1);
    }

    #[test]
    fn membership_examples() {
        let g = presets::example1();
        let c = full_e1(&g).to_clopen(&g).unwrap();
        let atom = Point::finite(
            &g,
            Ultrapath::new(&g, vec![e(1)], g.gset(&cofin3())).unwrap(),
        )
        .unwrap();
        assert!(c.member(&g, &atom).unwrap());
        let inf = Point::infinite(&g, vec![e(1)], vec![e(3)]).unwrap();
        assert!(c.member(&g, &inf).unwrap());
        let other = Point::infinite(&g, vec![], vec![e(2)]).unwrap();
        assert!(!c.member(&g, &other).unwrap());
    }

    #[test]
    fn intersection_of_full_cylinders_matches_terminal_meet() {
        let g = presets::matrix_b();
        // D(e1, odds) ∩ D(e1, all) = D(e1, odds).
        let odds = UpSet::arithmetic(Universe::Infinite, 1, &[true, false]);
        let c1 = Cylinder::full(Ultrapath::new(&g, vec![e(1)], g.gset(&odds)).unwrap())
            .to_clopen(&g)
            .unwrap();
        let c2 = full_e1(&g).to_clopen(&g).unwrap();
        let both = c1.intersect(&g, &c2).unwrap();
        assert_eq!(both, c1);
    }

    #[test]
    fn disjoint_first_edges_intersect_empty() {
        let g = presets::example1();
        let c1 = full_e1(&g).to_clopen(&g).unwrap();
        let c2 = Cylinder::full(Ultrapath::from_edges(&g, vec![e(2)]).unwrap())
            .to_clopen(&g)
            .unwrap();
        assert!(c1.intersect(&g, &c2).unwrap().is_empty());
    }

    #[test]
    fn restricted_equals_full_minus_forbidden_cylinders() {
        // D(β,B),F = D(β,B) ∖ ⋃_{λ∈F} D(βλ, r(λ)) as clopen sets.
        let g = presets::example1();
        let base = Ultrapath::new(&g, vec![e(1)], g.gset(&cofin3())).unwrap();
        let forbidden = vec![e(3), e(5)];
        let lhs = Cylinder::restricted(&g, base.clone(), forbidden.clone())
            .unwrap()
            .to_clopen(&g)
            .unwrap();
        let mut rhs = Cylinder::full(base).to_clopen(&g).unwrap();
        for f in forbidden {
            let d = Cylinder::full(Ultrapath::from_edges(&g, vec![e(1), f]).unwrap())
                .to_clopen(&g)
                .unwrap();
            rhs = rhs.difference(&g, &d).unwrap();
        }
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn union_merges_complete_subtrees_back() {
        // Splitting a continuation off a cylinder and unioning it back must
        // restore the original canonical form.
        let g = presets::example1();
        let c = full_e1(&g).to_clopen(&g).unwrap();
        let deep = Cylinder::full(Ultrapath::from_edges(&g, vec![e(1), e(3)]).unwrap())
            .to_clopen(&g)
            .unwrap();
        let rest = c.difference(&g, &deep).unwrap();
        let back = rest.union(&g, &deep).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn double_conversion_is_stable() {
        let g = presets::matrix_b();
        let c = Cylinder::full(Ultrapath::from_edges(&g, vec![e(2)]).unwrap())
            .to_clopen(&g)
            .unwrap();
        let again = Clopen::from_patches(&g, c.atom_points(&g), c.tails().to_vec()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn patches_stay_pairwise_disjoint() {
        let g = presets::example1();
        let c = full_e1(&g).to_clopen(&g).unwrap();
        let d = Cylinder::full(Ultrapath::from_edges(&g, vec![e(2)]).unwrap())
            .to_clopen(&g)
            .unwrap();
        let u = c.union(&g, &d).unwrap();
        for t1 in u.tails() {
            for t2 in u.tails() {
                if t1 == t2 {
                    continue;
                }
                if t2.path.len() > t1.path.len() && t2.path[..t1.path.len()] == t1.path[..] {
                    let next = t2.path[t1.path.len()];
                    assert!(!t1.edges.contains(next.0));
                }
            }
        }
    }

    #[test]
    fn separate_first_edge_difference() {
        let g = presets::matrix_a();
        let x = Point::infinite(&g, vec![], vec![e(2)]).unwrap();
        let y = Point::infinite(&g, vec![], vec![e(3)]).unwrap();
        let (cx, cy) = separate(&g, &x, &y).unwrap();
        assert_eq!(
            cx,
            Cylinder::full(Ultrapath::from_edges(&g, vec![e(2)]).unwrap())
        );
        assert_eq!(
            cy,
            Cylinder::full(Ultrapath::from_edges(&g, vec![e(3)]).unwrap())
        );
    }

    #[test]
    fn separate_infinite_from_its_base_point() {
        let g = presets::example1();
        let x = Point::infinite(&g, vec![e(1)], vec![e(3)]).unwrap();
        let base = Ultrapath::new(&g, vec![e(1)], g.gset(&cofin3())).unwrap();
        let y = Point::finite(&g, base.clone()).unwrap();
        let (cx, cy) = separate(&g, &x, &y).unwrap();
        assert_eq!(
            cx,
            Cylinder::full(Ultrapath::from_edges(&g, vec![e(1), e(3)]).unwrap())
        );
        assert_eq!(cy, Cylinder::restricted(&g, base, vec![e(3)]).unwrap());
        // Verify disjointness and membership.
        let a = cx.to_clopen(&g).unwrap();
        let b = cy.to_clopen(&g).unwrap();
        assert!(a.member(&g, &x).unwrap());
        assert!(b.member(&g, &y).unwrap());
        assert!(a.is_disjoint(&g, &b).unwrap());
    }

    #[test]
    fn separate_same_base_disjoint_terminals() {
        let g = presets::matrix_b();
        let odds = UpSet::arithmetic(Universe::Infinite, 1, &[true, false]);
        let evens = UpSet::arithmetic(Universe::Infinite, 2, &[true, false]);
        let x = Point::finite(&g, Ultrapath::new(&g, vec![e(1)], g.gset(&odds)).unwrap()).unwrap();
        let y = Point::finite(&g, Ultrapath::new(&g, vec![e(1)], g.gset(&evens)).unwrap()).unwrap();
        let (cx, cy) = separate(&g, &x, &y).unwrap();
        assert!(matches!(cx, Cylinder::Full { .. }));
        assert!(matches!(cy, Cylinder::Full { .. }));
        let a = cx.to_clopen(&g).unwrap();
        let b = cy.to_clopen(&g).unwrap();
        assert!(a.member(&g, &x).unwrap());
        assert!(b.member(&g, &y).unwrap());
        assert!(a.is_disjoint(&g, &b).unwrap());
    }

    #[test]
    fn separate_equal_points_is_an_error() {
        let g = presets::matrix_a();
        let x = Point::infinite(&g, vec![], vec![e(2)]).unwrap();
        assert!(matches!(
            separate(&g, &x, &x.clone()),
            Err(TopologyError::PointsEqual)
        ));
    }

    #[test]
    fn clopen_ops_agree_with_pointwise_membership() {
        let g = presets::example1();
        let c1 = full_e1(&g).to_clopen(&g).unwrap();
        let base = Ultrapath::new(&g, vec![e(1)], g.gset(&cofin3())).unwrap();
        let c2 = Cylinder::restricted(&g, base, vec![e(4)])
            .unwrap()
            .to_clopen(&g)
            .unwrap();
        let union = c1.union(&g, &c2).unwrap();
        let meet = c1.intersect(&g, &c2).unwrap();
        let diff = c1.difference(&g, &c2).unwrap();
        let mut points: Vec<Point> = Vec::new();
        points.push(
            Point::finite(&g, Ultrapath::new(&g, vec![e(1)], g.gset(&cofin3())).unwrap()).unwrap(),
        );
        points
            .push(Point::finite(&g, Ultrapath::zero_length(g.gset(&cofin3())).unwrap()).unwrap());
        for a in [3u64, 4, 5] {
            points.push(Point::infinite(&g, vec![e(1)], vec![e(a)]).unwrap());
            points.push(Point::infinite(&g, vec![], vec![e(a)]).unwrap());
        }
        for p in &points {
            let m1 = c1.member(&g, p).unwrap();
            let m2 = c2.member(&g, p).unwrap();
            assert_eq!(union.member(&g, p).unwrap(), m1 || m2, "{p}");
            assert_eq!(meet.member(&g, p).unwrap(), m1 && m2, "{p}");
            assert_eq!(diff.member(&g, p).unwrap(), m1 && !m2, "{p}");
        }
    }

    #[test]
    fn convergence_of_the_density_sequence() {
        // x^n = e1 · (cycle e_{n+2}) converges to (e1, cofin3).
        let g = presets::example1();
        let limit = Point::finite(
            &g,
            Ultrapath::new(&g, vec![e(1)], g.gset(&cofin3())).unwrap(),
        )
        .unwrap();
        let rule = |n: u64| Point::infinite(&g, vec![e(1)], vec![e(n + 2)]).unwrap();
        let report = converges(
            &g,
            SeqSpec::Rule(&rule),
            &limit,
            100,
            ConvergeOpts::default(),
        )
        .unwrap();
        assert!(report.converged(), "{:?}", report.outcome);
    }

    #[test]
    fn constant_sequence_converges() {
        let g = presets::example1();
        let x = Point::infinite(&g, vec![], vec![e(3)]).unwrap();
        let seq = vec![x.clone(); 50];
        let report = converges(&g, SeqSpec::List(&seq), &x, 50, ConvergeOpts::default()).unwrap();
        assert!(report.converged());
    }

    #[test]
    fn stuck_next_edge_is_refuted() {
        // x^n = e1 e3 e3 ... constant; fails the forbidden-set probe {e3}.
        let g = presets::example1();
        let limit = Point::finite(
            &g,
            Ultrapath::new(&g, vec![e(1)], g.gset(&cofin3())).unwrap(),
        )
        .unwrap();
        let rule = |_: u64| Point::infinite(&g, vec![e(1)], vec![e(3)]).unwrap();
        let report = converges(
            &g,
            SeqSpec::Rule(&rule),
            &limit,
            100,
            ConvergeOpts::default(),
        )
        .unwrap();
        match report.outcome {
            ConvergenceOutcome::Refuted { probe, .. } => {
                assert_eq!(probe, Probe::ForbiddenSet(vec![e(3)]));
            }
            other => panic!("expected refutation, got {other:?}"),
        }
    }
}
