//! The shift map, its local homeomorphism windows, conversion of finite
//! ultragraphs to ordinary graphs, and table-based shift-morphism checks.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::setcalc::{Cardinality, UpSet, Universe};
use crate::topology::Cylinder;
use crate::ultragraph::{
    EdgeFamily, EdgeId, GraphError, Ultragraph, UltragraphPresentation, VertexId,
};
use crate::ultrapath::{PathError, Point, PointLen, Ultrapath};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DynamicsError {
    #[error("length-zero points have no shift window")]
    LengthZeroPoint,
    #[error("conversion needs finite vertex and edge sets")]
    NotFinite,
    #[error("table is not closed under the shift: missing image of {0}")]
    TableNotShiftClosed(String),
    #[error("{0}")]
    Graph(#[from] GraphError),
    #[error("{0}")]
    Path(#[from] PathError),
    #[error("{0}")]
    Topology(#[from] crate::topology::TopologyError),
}

/// The shift: drops the first edge. Length-zero points are fixed.
pub fn shift(g: &Ultragraph, x: &Point) -> Result<Point, DynamicsError> {
    match x {
        Point::Infinite { prefix, cycle } => {
            if prefix.is_empty() {
                let mut c = cycle.clone();
                c.rotate_left(1);
                Ok(Point::infinite(g, Vec::new(), c)?)
            } else {
                Ok(Point::infinite(g, prefix[1..].to_vec(), cycle.clone())?)
            }
        }
        Point::Finite(p) => {
            if p.is_empty() {
                Ok(x.clone())
            } else {
                let rest = Ultrapath::new(g, p.edges()[1..].to_vec(), p.terminal().clone())?;
                Ok(Point::finite(g, rest)?)
            }
        }
    }
}

/// A basis neighborhood of `x` containing no length-zero points, on which
/// the shift restricts to a homeomorphism.
pub fn local_window(g: &Ultragraph, x: &Point) -> Result<Cylinder, DynamicsError> {
    match x {
        Point::Infinite { .. } => {
            let first = x.edge_at(1).expect("infinite points have a first edge");
            Ok(Cylinder::full(Ultrapath::from_edges(g, vec![first])?))
        }
        Point::Finite(p) => {
            if p.is_empty() {
                return Err(DynamicsError::LengthZeroPoint);
            }
            Ok(Cylinder::restricted(g, p.clone(), Vec::new())?)
        }
    }
}

/// An ultragraph presentation whose ranges are all singletons.
#[derive(Debug, Clone)]
pub struct GraphPresentation {
    graph: Ultragraph,
}

impl GraphPresentation {
    pub fn graph(&self) -> &Ultragraph {
        &self.graph
    }
}

/// Length-preserving conjugacy from a finite ultragraph onto its graph
/// cover: each edge/exit-vertex pair becomes a graph edge, and a point maps
/// by reading off consecutive pairs.
#[derive(Debug, Clone)]
pub struct GraphConjugacy {
    /// `(e, v) → f` with `s(f) = s(e)`, `r(f) = {v}`.
    forward: BTreeMap<(EdgeId, VertexId), EdgeId>,
    backward: BTreeMap<EdgeId, (EdgeId, VertexId)>,
}

impl GraphConjugacy {
    pub fn legend(&self) -> impl Iterator<Item = (&(EdgeId, VertexId), &EdgeId)> {
        self.forward.iter()
    }

    pub fn preimage_pair(&self, f: EdgeId) -> Option<(EdgeId, VertexId)> {
        self.backward.get(&f).copied()
    }

    fn pair_edge(&self, e: EdgeId, next_source: VertexId) -> Option<EdgeId> {
        self.forward.get(&(e, next_source)).copied()
    }

    /// Image of a point: position `i` maps to the graph edge for
    /// `(x_i, s(x_{i+1}))`. Finite ultragraphs have purely infinite shift
    /// spaces, so only infinite points are mapped.
    pub fn apply(&self, src: &Ultragraph, x: &Point) -> Result<Point, DynamicsError> {
        match x {
            Point::Finite(_) => Err(DynamicsError::NotFinite),
            Point::Infinite { prefix, cycle } => {
                // The pair window slides one edge ahead, so the image keeps
                // the prefix and cycle lengths.
                let k = prefix.len();
                let m = cycle.len();
                let edge = |i: usize| -> EdgeId {
                    if i < k {
                        prefix[i]
                    } else {
                        cycle[(i - k) % m]
                    }
                };
                let mut img_prefix = Vec::with_capacity(k);
                for i in 0..k {
                    let v = src.source(edge(i + 1))?;
                    img_prefix.push(
                        self.pair_edge(edge(i), v)
                            .expect("pairs of a valid path are in the legend"),
                    );
                }
                let mut img_cycle = Vec::with_capacity(m);
                for j in 0..m {
                    let v = src.source(edge(k + (j + 1) % m))?;
                    img_cycle.push(
                        self.pair_edge(edge(k + j), v)
                            .expect("pairs of a valid path are in the legend"),
                    );
                }
                Ok(canonical_infinite(img_prefix, img_cycle))
            }
        }
    }
}

fn canonical_infinite(mut prefix: Vec<EdgeId>, mut cycle: Vec<EdgeId>) -> Point {
    let n = cycle.len();
    for d in 1..=n {
        if n % d == 0 && (0..n).all(|k| cycle[k] == cycle[k % d]) {
            cycle.truncate(d);
            break;
        }
    }
    while let Some(&last) = prefix.last() {
        if last != *cycle.last().unwrap() {
            break;
        }
        prefix.pop();
        cycle.rotate_right(1);
    }
    Point::Infinite { prefix, cycle }
}

/// Converts a finite ultragraph into an ordinary graph together with the
/// conjugacy between their shift spaces.
pub fn to_graph(g: &Ultragraph) -> Result<(GraphPresentation, GraphConjugacy), DynamicsError> {
    let n = match g.vertex_universe() {
        Universe::Finite(n) => n,
        Universe::Infinite => return Err(DynamicsError::NotFinite),
    };
    let edges = g.all_edges();
    let edge_list: Vec<EdgeId> = match edges.cardinality() {
        Cardinality::Finite(_) => edges.iter().map(EdgeId).collect(),
        Cardinality::Infinite => return Err(DynamicsError::NotFinite),
    };

    let mut forward = BTreeMap::new();
    let mut backward = BTreeMap::new();
    let mut families = Vec::new();
    let mut next = 1u64;
    for &e in &edge_list {
        let src = g.source(e)?;
        let range = g.range(e)?.clone();
        for v in range.iter() {
            let f = EdgeId(next);
            next += 1;
            forward.insert((e, VertexId(v)), f);
            backward.insert(f, (e, VertexId(v)));
            families.push(EdgeFamily::Single {
                edge: f,
                source: src,
                range: UpSet::singleton(Universe::Finite(n), v),
            });
        }
    }
    let presentation = UltragraphPresentation {
        vertex_universe: Universe::Finite(n),
        families,
    };
    let graph = Ultragraph::new(presentation)?;
    Ok((
        GraphPresentation { graph },
        GraphConjugacy { forward, backward },
    ))
}

/// Finite partial map between shift spaces, with metadata for the checks it
/// is meant to pass.
#[derive(Debug, Clone)]
pub struct MorphismTable {
    pub entries: Vec<(Point, Point)>,
    pub depth: usize,
    pub length_preserving: bool,
}

/// Per-property outcome of checking a morphism table.
#[derive(Debug, Clone)]
pub struct MorphismReport {
    pub shift_commutes: Vec<String>,
    pub length_violations: Vec<String>,
    pub injectivity_collisions: Vec<String>,
    pub prefix_transport_failures: Vec<String>,
}

impl MorphismReport {
    pub fn passed(&self) -> bool {
        self.shift_commutes.is_empty()
            && self.length_violations.is_empty()
            && self.injectivity_collisions.is_empty()
            && self.prefix_transport_failures.is_empty()
    }
}

impl fmt::Display for MorphismReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let section = |f: &mut fmt::Formatter<'_>, name: &str, items: &[String]| -> fmt::Result {
            if items.is_empty() {
                writeln!(f, "{name}: ok")
            } else {
                writeln!(f, "{name}: {} failure(s)", items.len())?;
                for i in items.iter().take(5) {
                    writeln!(f, "  {i}")?;
                }
                Ok(())
            }
        };
        section(f, "shift commuting", &self.shift_commutes)?;
        section(f, "length preservation", &self.length_violations)?;
        section(f, "injectivity", &self.injectivity_collisions)?;
        section(f, "edge prefix transport", &self.prefix_transport_failures)
    }
}

/// Verifies a morphism table: closure under the shift, shift commuting,
/// length preservation, injectivity, and single-edge prefix transport
/// (`φ(a·x) = b·φ(x)` for some target edge `b` whenever `a·x` is tabled).
pub fn morphism_check(
    src: &Ultragraph,
    dst: &Ultragraph,
    table: &MorphismTable,
) -> Result<MorphismReport, DynamicsError> {
    let lookup = |p: &Point| -> Option<&Point> {
        table.entries.iter().find(|(x, _)| x == p).map(|(_, y)| y)
    };

    for (x, _) in &table.entries {
        let sx = shift(src, x)?;
        if lookup(&sx).is_none() {
            return Err(DynamicsError::TableNotShiftClosed(x.to_string()));
        }
    }

    let mut report = MorphismReport {
        shift_commutes: Vec::new(),
        length_violations: Vec::new(),
        injectivity_collisions: Vec::new(),
        prefix_transport_failures: Vec::new(),
    };

    for (x, y) in &table.entries {
        let sx = shift(src, x)?;
        let sy = shift(dst, y)?;
        let mapped = lookup(&sx).expect("closure checked above");
        if mapped != &sy {
            report
                .shift_commutes
                .push(format!("σφ({x}) = {sy} but φσ({x}) = {mapped}"));
        }
        if table.length_preserving {
            let same = matches!((x.len(), y.len()), (PointLen::Infinite, PointLen::Infinite))
                || matches!((x.len(), y.len()), (PointLen::Finite(a), PointLen::Finite(b)) if a == b);
            if !same {
                report.length_violations.push(format!("|φ({x})| ≠ |{x}|"));
            }
        }
    }

    for (i, (x1, y1)) in table.entries.iter().enumerate() {
        for (x2, y2) in table.entries.iter().skip(i + 1) {
            if x1 != x2 && y1 == y2 {
                report
                    .injectivity_collisions
                    .push(format!("{x1} and {x2} both map to {y1}"));
            }
        }
    }

    for (x, y) in &table.entries {
        for (ax, phi_ax) in &table.entries {
            if !is_edge_extension(src, ax, x)? {
                continue;
            }
            let b = match phi_ax.edge_at(1) {
                Some(b) => b,
                None => {
                    report
                        .prefix_transport_failures
                        .push(format!("φ({ax}) has no leading edge"));
                    continue;
                }
            };
            let prefix = Ultrapath::from_edges(dst, vec![b])?;
            match y.prepend(dst, &prefix) {
                Ok(by) if &by == phi_ax => {}
                Ok(by) => report
                    .prefix_transport_failures
                    .push(format!("φ({ax}) = {phi_ax} but {b}·φ({x}) = {by}")),
                Err(err) => report
                    .prefix_transport_failures
                    .push(format!("{b}·φ({x}) undefined: {err}")),
            }
        }
    }

    Ok(report)
}

/// Whether `ax` is `x` with one extra leading edge.
fn is_edge_extension(g: &Ultragraph, ax: &Point, x: &Point) -> Result<bool, DynamicsError> {
    Ok(match (ax.len(), x.len()) {
        (PointLen::Infinite, PointLen::Infinite) => &shift(g, ax)? == x,
        (PointLen::Finite(a), PointLen::Finite(b)) if a == b + 1 => &shift(g, ax)? == x,
        _ => false,
    })
}
