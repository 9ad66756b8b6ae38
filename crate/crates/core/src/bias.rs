//! Abstract information functions, bias functions and the biased transition
//! structure built from them.
//!
//! For every incidence `(v_i, e_j)` a vertex-side feature `f_V(v_i, e_j)` and
//! an hb-edge-side feature `f_E(e_j, v_i)` are computed. A bias `g` is applied
//! to each feature on the incidence support only, and each row is normalised
//! by its total (`G_V(v_i)` or `G_E(e_j)`) to give the two half-step
//! transition kernels. Their product is the row-stochastic vertex-to-vertex
//! matrix `T`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hbgraph::{HbGraph, Incidence, VertexId};

/// Monotone transform applied to feature values before normalisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BiasFunction {
    Identity,
    /// `x ↦ x^α`
    Power(f64),
    /// `x ↦ e^{αx}`
    Exponential(f64),
}

impl BiasFunction {
    /// Raw value `g(x)`. Only meaningful for `x > 0`.
    pub fn eval(self, x: f64) -> f64 {
        match self {
            BiasFunction::Identity => x,
            BiasFunction::Power(a) => x.powf(a),
            BiasFunction::Exponential(a) => (a * x).exp(),
        }
    }

    /// `ln g(x)`, used for overflow-safe row evaluation.
    fn log_eval(self, x: f64) -> f64 {
        match self {
            BiasFunction::Identity => x.ln(),
            BiasFunction::Power(a) => a * x.ln(),
            BiasFunction::Exponential(a) => a * x,
        }
    }

    /// Evaluates one normalisation row in place. Exponential rows are shifted
    /// by their largest exponent, which leaves the normalised row unchanged.
    /// Power rows fall back to the same shift when direct evaluation
    /// overflows or underflows.
    fn eval_row(self, values: &mut [f64]) {
        let direct = !matches!(self, BiasFunction::Exponential(_));
        if direct {
            let raw: Vec<f64> = values.iter().map(|&x| self.eval(x)).collect();
            if raw.iter().all(|&y| y.is_finite() && y > 0.0) {
                values.copy_from_slice(&raw);
                return;
            }
        }
        let shift = values
            .iter()
            .map(|&x| self.log_eval(x))
            .fold(f64::NEG_INFINITY, f64::max);
        for x in values.iter_mut() {
            *x = (self.log_eval(*x) - shift).exp();
        }
    }
}

impl fmt::Display for BiasFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BiasFunction::Identity => write!(f, "id"),
            BiasFunction::Power(a) => write!(f, "pow:{a}"),
            BiasFunction::Exponential(a) => write!(f, "exp:{a}"),
        }
    }
}

impl FromStr for BiasFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "id" {
            return Ok(BiasFunction::Identity);
        }
        let bad = || Error::BiasSyntax(s.to_string());
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        let alpha: f64 = arg.trim().parse().map_err(|_| bad())?;
        if !alpha.is_finite() {
            return Err(bad());
        }
        match kind.trim() {
            "pow" => Ok(BiasFunction::Power(alpha)),
            "exp" => Ok(BiasFunction::Exponential(alpha)),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for BiasFunction {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<BiasFunction> for String {
    fn from(b: BiasFunction) -> String {
        b.to_string()
    }
}

/// Feature evaluated on one incidence of the graph.
pub type FeatureFn = Arc<dyn Fn(&HbGraph, &Incidence) -> f64 + Send + Sync>;

/// Vertex-side and hb-edge-side abstract information functions.
#[derive(Clone)]
pub struct FeatureSpec {
    pub vertex: FeatureFn,
    pub hbedge: FeatureFn,
}

impl FeatureSpec {
    pub fn new(vertex: FeatureFn, hbedge: FeatureFn) -> Self {
        FeatureSpec { vertex, hbedge }
    }

    /// `m_j(v_i)·w(e_j)` on both sides.
    pub fn weighted_multiplicity() -> Self {
        let f: FeatureFn = Arc::new(|_, inc| inc.multiplicity * inc.weight);
        FeatureSpec::new(f.clone(), f)
    }

    /// Constant 1 on the support: equiprobable transitions.
    pub fn uniform() -> Self {
        let f: FeatureFn = Arc::new(|_, _| 1.0);
        FeatureSpec::new(f.clone(), f)
    }
}

impl Default for FeatureSpec {
    fn default() -> Self {
        FeatureSpec::weighted_multiplicity()
    }
}

impl fmt::Debug for FeatureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FeatureSpec").finish_non_exhaustive()
    }
}

/// Compressed sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRows {
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseRows {
    fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        offsets.push(0);
        for row in rows {
            for (k, x) in row {
                indices.push(k);
                values.push(x);
            }
            offsets.push(indices.len());
        }
        SparseRows {
            offsets,
            indices,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    /// Column indices (ascending) and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.offsets[r], self.offsets[r + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (idx, val) = self.row(r);
        idx.binary_search(&c).map(|k| val[k]).unwrap_or(0.0)
    }

    pub fn row_sum(&self, r: usize) -> f64 {
        self.row(r).1.iter().sum()
    }

    fn map_rows(&self, mut f: impl FnMut(usize, &mut [f64])) -> SparseRows {
        let mut out = self.clone();
        for r in 0..out.rows() {
            let (a, b) = (out.offsets[r], out.offsets[r + 1]);
            f(r, &mut out.values[a..b]);
        }
        out
    }
}

/// Biased feature matrices, their row totals and the normalised kernels.
#[derive(Debug, Clone)]
pub struct BiasedSystem {
    bias_vertex: BiasFunction,
    bias_hbedge: BiasFunction,
    /// `B_V`, n×p. Exponential rows are stored shifted by their maximum exponent.
    vertex_biased: SparseRows,
    /// `G_V`
    vertex_totals: Vec<f64>,
    /// `B_E`, p×n, same storage convention as `B_V`.
    hbedge_biased: SparseRows,
    /// `G_E`
    hbedge_totals: Vec<f64>,
    /// `G_V⁻¹ B_V`
    vertex_kernel: SparseRows,
    /// `G_E⁻¹ B_E`
    hbedge_kernel: SparseRows,
}

impl BiasedSystem {
    /// Builds the biased system with the weighted-multiplicity features.
    pub fn new(g: &HbGraph, bias_vertex: BiasFunction, bias_hbedge: BiasFunction) -> Result<Self> {
        BiasedSystem::build(g, &FeatureSpec::default(), bias_vertex, bias_hbedge)
    }

    pub fn build(
        g: &HbGraph,
        features: &FeatureSpec,
        bias_vertex: BiasFunction,
        bias_hbedge: BiasFunction,
    ) -> Result<Self> {
        g.ensure_connected()?;
        let n = g.n();
        let p = g.p();

        let mut vertex_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut hbedge_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); p];
        for inc in g.incidence_triples() {
            let fv = (features.vertex)(g, &inc);
            let fe = (features.hbedge)(g, &inc);
            for (side, x) in [("vertex", fv), ("hb-edge", fe)] {
                if !(x.is_finite() && x > 0.0) {
                    return Err(Error::Validation(format!(
                        "{side} feature at ({}, e{}) must be finite and positive on the support, got {x}",
                        inc.vertex, inc.edge
                    )));
                }
            }
            // incidence_triples walks edges in order, so vertex rows come out sorted by edge
            vertex_rows[inc.vertex.0].push((inc.edge, fv));
            hbedge_rows[inc.edge].push((inc.vertex.0, fe));
        }

        let features_v = SparseRows::from_rows(vertex_rows);
        let features_e = SparseRows::from_rows(hbedge_rows);
        let vertex_biased = features_v.map_rows(|_, row| bias_vertex.eval_row(row));
        let hbedge_biased = features_e.map_rows(|_, row| bias_hbedge.eval_row(row));
        let vertex_totals = totals(&vertex_biased, "G_V")?;
        let hbedge_totals = totals(&hbedge_biased, "G_E")?;
        let vertex_kernel = vertex_biased.map_rows(|r, row| normalise(row, vertex_totals[r]));
        let hbedge_kernel = hbedge_biased.map_rows(|r, row| normalise(row, hbedge_totals[r]));

        Ok(BiasedSystem {
            bias_vertex,
            bias_hbedge,
            vertex_biased,
            vertex_totals,
            hbedge_biased,
            hbedge_totals,
            vertex_kernel,
            hbedge_kernel,
        })
    }

    pub fn n(&self) -> usize {
        self.vertex_totals.len()
    }

    pub fn p(&self) -> usize {
        self.hbedge_totals.len()
    }

    pub fn biases(&self) -> (BiasFunction, BiasFunction) {
        (self.bias_vertex, self.bias_hbedge)
    }

    /// `B_V` (n×p).
    pub fn vertex_biased(&self) -> &SparseRows {
        &self.vertex_biased
    }

    /// `B_E` (p×n).
    pub fn hbedge_biased(&self) -> &SparseRows {
        &self.hbedge_biased
    }

    /// Diagonal of `G_V`.
    pub fn vertex_totals(&self) -> &[f64] {
        &self.vertex_totals
    }

    /// Diagonal of `G_E`.
    pub fn hbedge_totals(&self) -> &[f64] {
        &self.hbedge_totals
    }

    /// `G_V⁻¹ B_V`: row `i` is the distribution over hb-edges of vertex `i`.
    pub fn vertex_kernel(&self) -> &SparseRows {
        &self.vertex_kernel
    }

    /// `G_E⁻¹ B_E`: row `j` is the distribution over vertices of hb-edge `j`.
    pub fn hbedge_kernel(&self) -> &SparseRows {
        &self.hbedge_kernel
    }

    /// Biased probability of moving from `v` to hb-edge `j`; 0 off the support.
    pub fn vertex_transition_prob(&self, v: VertexId, j: usize) -> Result<f64> {
        self.check(v.0, j)?;
        Ok(self.vertex_kernel.get(v.0, j))
    }

    /// Biased probability of moving from hb-edge `j` to `v`; 0 off the support.
    pub fn hbedge_transition_prob(&self, j: usize, v: VertexId) -> Result<f64> {
        self.check(v.0, j)?;
        Ok(self.hbedge_kernel.get(j, v.0))
    }

    fn check(&self, i: usize, j: usize) -> Result<()> {
        if i >= self.n() {
            return Err(Error::VertexOutOfRange { index: i, n: self.n() });
        }
        if j >= self.p() {
            return Err(Error::EdgeOutOfRange { index: j, p: self.p() });
        }
        Ok(())
    }

    /// `out = vertex_values · G_V⁻¹B_V`.
    pub fn push_to_hbedges(&self, vertex_values: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (i, &a) in vertex_values.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let (idx, val) = self.vertex_kernel.row(i);
            for (&j, &prob) in idx.iter().zip(val) {
                out[j] += a * prob;
            }
        }
    }

    /// `out = hbedge_values · G_E⁻¹B_E`.
    pub fn push_to_vertices(&self, hbedge_values: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (j, &e) in hbedge_values.iter().enumerate() {
            if e == 0.0 {
                continue;
            }
            let (idx, val) = self.hbedge_kernel.row(j);
            for (&i, &prob) in idx.iter().zip(val) {
                out[i] += e * prob;
            }
        }
    }

    /// `x·T` through the two factors, without materialising `T`.
    pub fn apply_transition(&self, x: &[f64]) -> Vec<f64> {
        let mut mid = vec![0.0; self.p()];
        let mut out = vec![0.0; self.n()];
        self.push_to_hbedges(x, &mut mid);
        self.push_to_vertices(&mid, &mut out);
        out
    }

    /// Sparse `T = G_V⁻¹ B_V G_E⁻¹ B_E`.
    pub fn transition_matrix(&self) -> TransitionMatrix {
        let n = self.n();
        let mut acc = vec![0.0; n];
        let mut seen = vec![false; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let (edges, probs) = self.vertex_kernel.row(i);
            for (&j, &a) in edges.iter().zip(probs) {
                let (verts, back) = self.hbedge_kernel.row(j);
                for (&k, &b) in verts.iter().zip(back) {
                    if !seen[k] {
                        seen[k] = true;
                        touched.push(k);
                    }
                    acc[k] += a * b;
                }
            }
            touched.sort_unstable();
            let row: Vec<(usize, f64)> = touched.iter().map(|&k| (k, acc[k])).collect();
            for &k in &touched {
                acc[k] = 0.0;
                seen[k] = false;
            }
            touched.clear();
            rows.push(row);
        }
        TransitionMatrix {
            rows: SparseRows::from_rows(rows),
        }
    }
}

fn totals(rows: &SparseRows, name: &str) -> Result<Vec<f64>> {
    (0..rows.rows())
        .map(|r| {
            let s = rows.row_sum(r);
            if s.is_finite() && s > 0.0 {
                Ok(s)
            } else {
                Err(Error::Numerical {
                    step: 0,
                    what: format!("{name}({r}) = {s}"),
                })
            }
        })
        .collect()
}

fn normalise(row: &mut [f64], total: f64) {
    for x in row.iter_mut() {
        *x /= total;
    }
}

/// Sparse row-stochastic vertex-to-vertex transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    rows: SparseRows,
}

impl TransitionMatrix {
    pub fn n(&self) -> usize {
        self.rows.rows()
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.rows.get(i, k)
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        self.rows.row(i)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.rows.row_sum(i)).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.rows.get(i, i)).collect()
    }

    pub fn nnz(&self) -> usize {
        self.rows.nnz()
    }

    /// `x·T`.
    pub fn left_multiply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        for (i, &xi) in x.iter().enumerate() {
            let (idx, val) = self.rows.row(i);
            for (&k, &t) in idx.iter().zip(val) {
                out[k] += xi * t;
            }
        }
        out
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut row = vec![0.0; n];
                let (idx, val) = self.rows.row(i);
                for (&k, &t) in idx.iter().zip(val) {
                    row[k] = t;
                }
                row
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hbgraph::HbEdge;

    fn edge(members: &[(usize, f64)], w: f64) -> HbEdge {
        HbEdge::new(members.iter().map(|&(v, m)| (VertexId(v), m)), w).unwrap()
    }

    fn example() -> HbGraph {
        HbGraph::from_edges(vec![
            edge(&[(0, 2.0), (1, 1.0)], 1.0),
            edge(&[(1, 1.0), (2, 1.0)], 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn bias_syntax() {
        assert_eq!("id".parse::<BiasFunction>().unwrap(), BiasFunction::Identity);
        assert_eq!("pow:0.2".parse::<BiasFunction>().unwrap(), BiasFunction::Power(0.2));
        assert_eq!("exp:-2".parse::<BiasFunction>().unwrap(), BiasFunction::Exponential(-2.0));
        for bad in ["", "pow", "pow:", "exp:x", "log:2", "pow:inf", "identity"] {
            assert!(bad.parse::<BiasFunction>().is_err(), "{bad}");
        }
        for b in [BiasFunction::Identity, BiasFunction::Power(2.0), BiasFunction::Exponential(-2.0)] {
            assert_eq!(b.to_string().parse::<BiasFunction>().unwrap(), b);
        }
    }

    #[test]
    fn identity_system_matches_hand_values() {
        let s = BiasedSystem::new(&example(), BiasFunction::Identity, BiasFunction::Identity).unwrap();
        let (idx, val) = s.vertex_biased().row(1);
        assert_eq!(idx, &[0, 1]);
        assert_eq!(val, &[1.0, 1.0]);
        assert_eq!(s.vertex_totals()[1], 2.0);
        assert_eq!(s.hbedge_totals(), &[3.0, 2.0]);
        assert_eq!(s.vertex_transition_prob(VertexId(1), 0).unwrap(), 0.5);
        assert!((s.hbedge_transition_prob(0, VertexId(0)).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.vertex_transition_prob(VertexId(0), 1).unwrap(), 0.0);
        assert_eq!(s.hbedge_transition_prob(1, VertexId(0)).unwrap(), 0.0);
        assert_eq!(s.vertex_transition_prob(VertexId(0), 0).unwrap(), 1.0);
        assert!(s.vertex_transition_prob(VertexId(3), 0).is_err());
        assert!(s.hbedge_transition_prob(2, VertexId(0)).is_err());
    }

    #[test]
    fn exponential_two_edge_vertex() {
        // vertex 0 has features 1 and 2 across e0 and e1
        let g = HbGraph::from_edges(vec![
            edge(&[(0, 1.0), (1, 1.0)], 1.0),
            edge(&[(0, 2.0), (1, 1.0)], 1.0),
        ])
        .unwrap();
        let s = BiasedSystem::new(&g, BiasFunction::Exponential(2.0), BiasFunction::Identity).unwrap();
        let e2 = 2f64.exp();
        let lo = 1.0 / (1.0 + e2 * e2 / e2);
        assert!((s.vertex_transition_prob(VertexId(0), 0).unwrap() - lo).abs() < 1e-15);
        assert!((lo - 0.11920292202211755).abs() < 1e-15);
        assert!((s.vertex_transition_prob(VertexId(0), 1).unwrap() - e2 / (1.0 + e2)).abs() < 1e-15);
    }

    #[test]
    fn symmetric_power_splits_evenly() {
        let g = HbGraph::from_edges(vec![edge(&[(0, 1.0), (1, 1.0)], 1.0)]).unwrap();
        let s = BiasedSystem::new(&g, BiasFunction::Power(0.2), BiasFunction::Power(0.2)).unwrap();
        assert_eq!(s.hbedge_transition_prob(0, VertexId(0)).unwrap(), 0.5);
        assert_eq!(s.hbedge_transition_prob(0, VertexId(1)).unwrap(), 0.5);
    }

    #[test]
    fn transition_matrix_example() {
        let t = BiasedSystem::new(&example(), BiasFunction::Identity, BiasFunction::Identity)
            .unwrap()
            .transition_matrix();
        let expected = [
            [2.0 / 3.0, 1.0 / 3.0, 0.0],
            [1.0 / 3.0, 5.0 / 12.0, 0.25],
            [0.0, 0.5, 0.5],
        ];
        for (i, row) in expected.iter().enumerate() {
            for (k, want) in row.iter().enumerate() {
                assert!((t.get(i, k) - want).abs() < 1e-15, "T[{i}][{k}]");
            }
        }
        let g = HbGraph::from_edges(vec![edge(&[(0, 1.0), (1, 1.0)], 1.0)]).unwrap();
        let t = BiasedSystem::new(&g, BiasFunction::Identity, BiasFunction::Identity)
            .unwrap()
            .transition_matrix();
        assert_eq!(t.to_dense(), vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
    }

    #[test]
    fn exponential_rows_do_not_overflow() {
        let g = HbGraph::from_edges(vec![
            edge(&[(0, 1.0), (1, 1.0)], 500.0),
            edge(&[(0, 1.0), (1, 2.0)], 600.0),
        ])
        .unwrap();
        let s = BiasedSystem::new(&g, BiasFunction::Exponential(2.0), BiasFunction::Exponential(-2.0)).unwrap();
        let t = s.transition_matrix();
        for r in t.row_sums() {
            assert!((r - 1.0).abs() <= 1e-12);
        }
        let p = s.vertex_transition_prob(VertexId(0), 1).unwrap();
        assert_eq!(p, 1.0 / (1.0 + (-200.0f64).exp()));
    }

    #[test]
    fn power_fallback_on_overflow() {
        let g = HbGraph::from_edges(vec![
            edge(&[(0, 1.0), (1, 1.0)], 1e200),
            edge(&[(0, 1.0), (1, 1.0)], 2e200),
        ])
        .unwrap();
        let s = BiasedSystem::new(&g, BiasFunction::Power(2.0), BiasFunction::Identity).unwrap();
        let p = s.vertex_transition_prob(VertexId(0), 0).unwrap();
        assert!((p - 0.2).abs() < 1e-12);
    }

    #[test]
    fn power_zero_is_uniform() {
        let s = BiasedSystem::new(&example(), BiasFunction::Power(0.0), BiasFunction::Power(0.0)).unwrap();
        assert_eq!(s.hbedge_transition_prob(0, VertexId(0)).unwrap(), 0.5);
        assert_eq!(s.vertex_transition_prob(VertexId(1), 1).unwrap(), 0.5);
    }

    #[test]
    fn disconnected_and_bad_features_rejected() {
        let g = HbGraph::new(4, example().edges().to_vec(), None).unwrap();
        assert!(matches!(
            BiasedSystem::new(&g, BiasFunction::Identity, BiasFunction::Identity),
            Err(Error::Disconnected(_))
        ));
        let zero: FeatureFn = Arc::new(|_, _| 0.0);
        let spec = FeatureSpec::new(zero.clone(), zero);
        assert!(matches!(
            BiasedSystem::build(&example(), &spec, BiasFunction::Identity, BiasFunction::Identity),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn factored_and_materialised_agree() {
        let s = BiasedSystem::new(&example(), BiasFunction::Exponential(-2.0), BiasFunction::Power(2.0)).unwrap();
        let t = s.transition_matrix();
        let x = [0.2, 0.5, 0.3];
        let a = s.apply_transition(&x);
        let b = t.left_multiply(&x);
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() <= 1e-12);
        }
    }
}
