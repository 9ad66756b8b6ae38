#![allow(dead_code)]

use hbdiff::hbgraph::{HbEdge, HbGraph, VertexId};
use hbdiff::BiasFunction;
use nalgebra::{DMatrix, DVector};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

/// Random connected hb-graph with real multiplicities in `[1, 3]` and weights
/// near 1, so exponential biases keep a usable spectral gap.
pub fn random_graph<R: Rng>(rng: &mut R, max_n: usize) -> HbGraph {
    let n = rng.random_range(2..=max_n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mult = |rng: &mut R| -> f64 {
        if rng.random_bool(0.5) {
            rng.random_range(1..=3) as f64
        } else {
            rng.random_range(1.0..3.0)
        }
    };
    let mut edges = Vec::new();
    let mut covered = 1;
    while covered < n {
        let mut members = vec![(VertexId(order[rng.random_range(0..covered)]), mult(rng))];
        let fresh = rng.random_range(1..=4).min(n - covered);
        for &v in &order[covered..covered + fresh] {
            members.push((VertexId(v), mult(rng)));
        }
        covered += fresh;
        if rng.random_bool(0.3) {
            members.push((VertexId(order[rng.random_range(0..covered)]), mult(rng)));
        }
        edges.push(HbEdge::new(members, rng.random_range(0.8..1.25)).unwrap());
    }
    if edges.is_empty() {
        edges.push(HbEdge::new(vec![(VertexId(0), mult(rng)), (VertexId(1), mult(rng))], 1.0).unwrap());
    }
    for _ in 0..rng.random_range(0..=n / 3) {
        let size = rng.random_range(1..=n.min(5));
        let members: Vec<_> = order
            .choose_multiple(rng, size)
            .map(|&v| (VertexId(v), mult(rng)))
            .collect();
        edges.push(HbEdge::new(members, rng.random_range(0.8..1.25)).unwrap());
    }
    let g = HbGraph::new(n, edges, None).unwrap();
    assert!(g.is_connected());
    g
}

fn apply(g: BiasFunction, x: f64) -> f64 {
    match g {
        BiasFunction::Identity => x,
        BiasFunction::Power(a) => x.powf(a),
        BiasFunction::Exponential(a) => (a * x).exp(),
    }
}

/// Dense `T` straight from the incidence definition, with features `m·w`.
pub fn dense_transition(g: &HbGraph, bv: BiasFunction, be: BiasFunction) -> DMatrix<f64> {
    let (n, p) = (g.n(), g.p());
    let mut to_edge = DMatrix::<f64>::zeros(n, p);
    let mut to_vertex = DMatrix::<f64>::zeros(p, n);
    for (j, e) in g.edges().iter().enumerate() {
        for &(v, m) in e.members() {
            to_edge[(v.0, j)] = apply(bv, m * e.weight());
            to_vertex[(j, v.0)] = apply(be, m * e.weight());
        }
    }
    for i in 0..n {
        let s: f64 = to_edge.row(i).sum();
        to_edge.row_mut(i).scale_mut(1.0 / s);
    }
    for j in 0..p {
        let s: f64 = to_vertex.row(j).sum();
        to_vertex.row_mut(j).scale_mut(1.0 / s);
    }
    to_edge * to_vertex
}

/// Left eigenvector of `t` for eigenvalue 1, normalised to sum 1:
/// solves `(Tᵀ − I)x = 0` with the last equation replaced by `Σx = 1`.
pub fn dense_stationary(t: &DMatrix<f64>) -> Vec<f64> {
    let n = t.nrows();
    let mut a = t.transpose() - DMatrix::<f64>::identity(n, n);
    a.row_mut(n - 1).fill(1.0);
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    a.lu().solve(&b).expect("singular stationary system").iter().copied().collect()
}

/// Pair counts by enumerating every pair: (C, D, T_b, T_o, n0).
pub fn brute_pair_counts(a: &[i64], b: &[i64]) -> (i64, i64, i64, i64, i64) {
    let n = a.len();
    let (mut c, mut d, mut tb, mut to) = (0, 0, 0, 0);
    for i in 0..n {
        for k in i + 1..n {
            let x = (a[i] - a[k]).signum();
            let y = (b[i] - b[k]).signum();
            match (x, y) {
                (0, 0) => tb += 1,
                (0, _) | (_, 0) => to += 1,
                _ if x == y => c += 1,
                _ => d += 1,
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as i64;
    (c, d, tb, to, n0)
}
