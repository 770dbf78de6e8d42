//! Ready-made example presentations used across tests, benches and docs.

use crate::setcalc::{UpSet, Universe};
use crate::ultragraph::{EdgeFamily, EdgeId, Ultragraph, UltragraphPresentation, VertexId};

fn odds() -> UpSet {
    UpSet::arithmetic(Universe::Infinite, 1, &[true, false])
}

fn evens() -> UpSet {
    UpSet::arithmetic(Universe::Infinite, 2, &[true, false])
}

/// Infinitely many vertices `v_i`, one edge `e_i` out of each; `e_1` ranges
/// over `{v_3, v_4, ...}`, every other edge over all vertices.
pub fn example1() -> Ultragraph {
    let u = Universe::Infinite;
    let p = UltragraphPresentation {
        vertex_universe: u,
        families: vec![
            EdgeFamily::Single {
                edge: EdgeId(1),
                source: VertexId(1),
                range: UpSet::from_index(u, 3),
            },
            EdgeFamily::Indexed {
                indices: UpSet::from_index(u, 2),
                a: 1,
                b: 0,
                period: 1,
                ranges: vec![UpSet::all(u)],
            },
        ],
    };
    Ultragraph::new(p).expect("example1 is valid")
}

/// Ultragraph of the all-ones infinite 0-1 matrix: `s(e_i) = v_i`,
/// `r(e_i) = G^0`.
pub fn matrix_a() -> Ultragraph {
    let u = Universe::Infinite;
    let p = UltragraphPresentation {
        vertex_universe: u,
        families: vec![EdgeFamily::Indexed {
            indices: UpSet::all(u),
            a: 1,
            b: 0,
            period: 1,
            ranges: vec![UpSet::all(u)],
        }],
    };
    Ultragraph::new(p).expect("matrix A is valid")
}

/// Ultragraph of the matrix with first row all ones and the later rows
/// alternating `1010...` / `0101...`: even-indexed edges range over the odd
/// vertices, odd-indexed edges (from 3 on) over the even vertices.
pub fn matrix_b() -> Ultragraph {
    let u = Universe::Infinite;
    let p = UltragraphPresentation {
        vertex_universe: u,
        families: vec![
            EdgeFamily::Single {
                edge: EdgeId(1),
                source: VertexId(1),
                range: UpSet::all(u),
            },
            EdgeFamily::Indexed {
                indices: UpSet::from_index(u, 2),
                a: 1,
                b: 0,
                period: 2,
                // residue 0 = even indices, residue 1 = odd indices.
                ranges: vec![odds(), evens()],
            },
        ],
    };
    Ultragraph::new(p).expect("matrix B is valid")
}

/// Ultragraph of the matrix with first row all ones and every later row
/// `1010...`: all edges from `e_2` on range over the odd vertices.
pub fn matrix_c() -> Ultragraph {
    let u = Universe::Infinite;
    let p = UltragraphPresentation {
        vertex_universe: u,
        families: vec![
            EdgeFamily::Single {
                edge: EdgeId(1),
                source: VertexId(1),
                range: UpSet::all(u),
            },
            EdgeFamily::Indexed {
                indices: UpSet::from_index(u, 2),
                a: 1,
                b: 0,
                period: 1,
                ranges: vec![odds()],
            },
        ],
    };
    Ultragraph::new(p).expect("matrix C is valid")
}

/// Two vertices with one ultraedge `e_1: v1 → {v1, v2}` and one ordinary
/// edge `e_2: v2 → {v1}`; the smallest genuinely non-graph example.
pub fn two_vertex() -> Ultragraph {
    let u = Universe::Finite(2);
    let p = UltragraphPresentation {
        vertex_universe: u,
        families: vec![
            EdgeFamily::Single {
                edge: EdgeId(1),
                source: VertexId(1),
                range: UpSet::finite(u, &[1, 2]),
            },
            EdgeFamily::Single {
                edge: EdgeId(2),
                source: VertexId(2),
                range: UpSet::finite(u, &[1]),
            },
        ],
    };
    Ultragraph::new(p).expect("two-vertex example is valid")
}
