//! Bias-suite experiments: run every bias pair on every graph, rank vertices
//! and hb-edges, and aggregate pairwise Kendall tau matrices across graphs.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bias::{BiasFunction, BiasedSystem};
use crate::diffusion::{self, RunOptions, DEFAULT_ITERATIONS, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::generator::{self, GeneratedGraph, GeneratorConfig};
use crate::hbgraph::HbGraph;
use crate::io::{self, InputFormat};
use crate::metrics::{self, CorrelationMatrix, TauVariant};
use crate::ranking::{Ranking, DEFAULT_TIE_EPS};

/// Head size used for the Jaccard comparison against the reference ranking.
pub const JACCARD_HEAD: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasPair {
    pub vertex: BiasFunction,
    pub hbedge: BiasFunction,
}

impl BiasPair {
    pub fn new(vertex: BiasFunction, hbedge: BiasFunction) -> Self {
        BiasPair { vertex, hbedge }
    }
}

/// The fifteen bias pairs of the reference experiment, in order.
pub fn paper15() -> Vec<BiasPair> {
    use BiasFunction::{Exponential as E, Identity as I, Power as P};
    vec![
        BiasPair::new(I, I),
        BiasPair::new(P(2.0), P(2.0)),
        BiasPair::new(P(0.2), P(0.2)),
        BiasPair::new(E(2.0), E(2.0)),
        BiasPair::new(E(-2.0), E(-2.0)),
        BiasPair::new(P(2.0), I),
        BiasPair::new(E(2.0), I),
        BiasPair::new(P(0.2), I),
        BiasPair::new(E(-2.0), I),
        BiasPair::new(I, P(2.0)),
        BiasPair::new(I, E(2.0)),
        BiasPair::new(I, P(0.2)),
        BiasPair::new(I, E(-2.0)),
        BiasPair::new(E(2.0), E(-2.0)),
        BiasPair::new(E(-2.0), E(2.0)),
    ]
}

/// Which vector the rankings are read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ScoreSource {
    /// `α` and the hb-edge record after the configured number of steps.
    #[default]
    Iterate,
    /// Power-iteration stationary distributions.
    Stationary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GraphSource {
    Generated {
        config: GeneratorConfig,
        count: usize,
        base_seed: u64,
    },
    Files {
        paths: Vec<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSuite {
    pub experiments: Vec<BiasPair>,
    pub iterations: usize,
    pub tie_eps: f64,
    pub score_source: ScoreSource,
    pub graphs: GraphSource,
}

impl ExperimentSuite {
    /// The fifteen-experiment suite on `count` generated graphs.
    pub fn paper15(count: usize, base_seed: u64) -> Self {
        ExperimentSuite {
            experiments: paper15(),
            iterations: DEFAULT_ITERATIONS,
            tie_eps: DEFAULT_TIE_EPS,
            score_source: ScoreSource::Iterate,
            graphs: GraphSource::Generated {
                config: GeneratorConfig::default(),
                count,
                base_seed,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiments.is_empty() {
            return Err(Error::InvalidArgument("suite has no experiments".into()));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidArgument("iterations must be at least 1".into()));
        }
        match &self.graphs {
            GraphSource::Generated { count: 0, .. } => {
                Err(Error::InvalidArgument("graph count must be at least 1".into()))
            }
            GraphSource::Files { paths } if paths.is_empty() => {
                Err(Error::InvalidArgument("no input graphs".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Suite file: a list of bias pairs and optionally an iteration count.
#[derive(Debug, Clone, Deserialize)]
pub struct SuiteFile {
    pub experiments: Vec<BiasPair>,
    #[serde(default)]
    pub iterations: Option<usize>,
}

pub fn read_suite_file(path: &Path) -> Result<SuiteFile> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

/// Rankings and diagnostics of one (graph, experiment) cell.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub vertex: Ranking,
    pub hbedge: Ranking,
    pub max_conservation_residual: f64,
    pub max_zero_residual: f64,
    pub last_change: f64,
}

/// One loaded input graph with the seed (or index) that identifies it.
#[derive(Debug, Clone)]
pub struct SuiteGraph {
    pub seed: u64,
    pub graph: HbGraph,
    pub generated: Option<GeneratedGraph>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportMatrices {
    pub strict_vertices: CorrelationMatrix,
    pub large_vertices: CorrelationMatrix,
    pub strict_hbedges: CorrelationMatrix,
    pub large_hbedges: CorrelationMatrix,
}

impl ReportMatrices {
    pub fn get(&self, variant: TauVariant, entity: Entity) -> &CorrelationMatrix {
        match (variant, entity) {
            (TauVariant::Strict, Entity::Vertices) => &self.strict_vertices,
            (TauVariant::Large, Entity::Vertices) => &self.large_vertices,
            (TauVariant::Strict, Entity::HbEdges) => &self.strict_hbedges,
            (TauVariant::Large, Entity::HbEdges) => &self.large_hbedges,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub graphs: usize,
    pub experiments: usize,
    pub iterations: usize,
    pub max_conservation_residual: f64,
    pub max_zero_residual: f64,
    /// Largest L1 change of `α` over the final step, across all cells.
    pub max_last_change: f64,
    pub mean_vertices: f64,
    pub mean_hbedges: f64,
    /// Mean top-10 Jaccard index of every experiment against experiment 1.
    pub jaccard_head_vertices: Vec<f64>,
    pub jaccard_head_hbedges: Vec<f64>,
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub experiments: Vec<BiasPair>,
    pub graph_seeds: Vec<u64>,
    /// `cells[graph][experiment]`
    pub cells: Vec<Vec<CellResult>>,
    pub matrices: ReportMatrices,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entity {
    Vertices,
    HbEdges,
}

impl Entity {
    pub fn name(self) -> &'static str {
        match self {
            Entity::Vertices => "vertices",
            Entity::HbEdges => "hbedges",
        }
    }

    fn short(self) -> &'static str {
        match self {
            Entity::Vertices => "v",
            Entity::HbEdges => "e",
        }
    }
}

pub fn load_graphs(source: &GraphSource) -> Result<Vec<SuiteGraph>> {
    match source {
        GraphSource::Generated {
            config,
            count,
            base_seed,
        } => Ok(generator::batch(config, *count, *base_seed)?
            .into_iter()
            .map(|g| SuiteGraph {
                seed: g.meta.rng_seed,
                graph: g.graph.clone(),
                generated: Some(g),
            })
            .collect()),
        GraphSource::Files { paths } => paths
            .iter()
            .enumerate()
            .map(|(k, p)| {
                Ok(SuiteGraph {
                    seed: k as u64,
                    graph: io::ingest(p, InputFormat::from_path(p))?,
                    generated: None,
                })
            })
            .collect(),
    }
}

/// Vertex and hb-edge scores for one bias pair.
pub fn scores(
    g: &HbGraph,
    pair: BiasPair,
    iterations: usize,
    source: ScoreSource,
) -> Result<(Vec<f64>, Vec<f64>, diffusion::RunOutcome)> {
    let sys = BiasedSystem::new(g, pair.vertex, pair.hbedge)?;
    let out = diffusion::run(
        g,
        &sys,
        &RunOptions {
            iterations,
            convergence_tol: None,
        },
    )?;
    match source {
        ScoreSource::Iterate => Ok((out.state.alpha.clone(), out.state.epsilon.clone(), out)),
        ScoreSource::Stationary => {
            let st = diffusion::stationary_by_power_iteration(&sys, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER)?;
            Ok((st.vertex, st.hbedge, out))
        }
    }
}

fn run_cell(g: &HbGraph, pair: BiasPair, suite: &ExperimentSuite) -> Result<CellResult> {
    let (v, e, out) = scores(g, pair, suite.iterations, suite.score_source)?;
    Ok(CellResult {
        vertex: Ranking::from_scores(&v, suite.tie_eps)?,
        hbedge: Ranking::from_scores(&e, suite.tie_eps)?,
        max_conservation_residual: out.max_conservation_residual,
        max_zero_residual: out.max_zero_residual,
        last_change: out.last_change,
    })
}

pub fn run_suite(suite: &ExperimentSuite) -> Result<ExperimentReport> {
    suite.validate()?;
    let graphs = load_graphs(&suite.graphs)?;
    run_suite_on(suite, &graphs)
}

pub fn run_suite_on(suite: &ExperimentSuite, graphs: &[SuiteGraph]) -> Result<ExperimentReport> {
    suite.validate()?;
    let started = Instant::now();
    let k = suite.experiments.len();

    let flat: Vec<CellResult> = (0..graphs.len() * k)
        .into_par_iter()
        .map(|cell| {
            let (gi, ei) = (cell / k, cell % k);
            run_cell(&graphs[gi].graph, suite.experiments[ei], suite).map_err(|e| Error::Experiment {
                seed: graphs[gi].seed,
                experiment: ei + 1,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let mut cells: Vec<Vec<CellResult>> = Vec::with_capacity(graphs.len());
    let mut it = flat.into_iter();
    for _ in 0..graphs.len() {
        cells.push(it.by_ref().take(k).collect());
    }

    let per_graph: Vec<[CorrelationMatrix; 4]> = cells
        .par_iter()
        .map(|row| {
            let v: Vec<Ranking> = row.iter().map(|c| c.vertex.clone()).collect();
            let e: Vec<Ranking> = row.iter().map(|c| c.hbedge.clone()).collect();
            let (sv, lv) = metrics::correlation_matrices(&v)?;
            let (se, le) = metrics::correlation_matrices(&e)?;
            Ok([sv, lv, se, le])
        })
        .collect::<Result<_>>()?;
    let mean = |slot: usize| -> Result<CorrelationMatrix> {
        let ms: Vec<CorrelationMatrix> = per_graph.iter().map(|m| m[slot].clone()).collect();
        CorrelationMatrix::mean(&ms)
    };
    let matrices = ReportMatrices {
        strict_vertices: mean(0)?,
        large_vertices: mean(1)?,
        strict_hbedges: mean(2)?,
        large_hbedges: mean(3)?,
    };

    let all = cells.iter().flatten();
    let max_conservation_residual = all.clone().map(|c| c.max_conservation_residual).fold(0.0, f64::max);
    let max_zero_residual = all.clone().map(|c| c.max_zero_residual).fold(0.0, f64::max);
    let max_last_change = all.map(|c| c.last_change).fold(0.0, f64::max);
    let jaccard = |entity: Entity| -> Result<Vec<f64>> {
        (0..k)
            .map(|ei| {
                let mut acc = 0.0;
                for row in &cells {
                    let (a, b) = match entity {
                        Entity::Vertices => (&row[0].vertex, &row[ei].vertex),
                        Entity::HbEdges => (&row[0].hbedge, &row[ei].hbedge),
                    };
                    acc += metrics::jaccard_head(a, b, JACCARD_HEAD.min(a.len()))?;
                }
                Ok(acc / cells.len() as f64)
            })
            .collect()
    };
    let diagnostics = Diagnostics {
        graphs: graphs.len(),
        experiments: k,
        iterations: suite.iterations,
        max_conservation_residual,
        max_zero_residual,
        max_last_change,
        mean_vertices: graphs.iter().map(|g| g.graph.n() as f64).sum::<f64>() / graphs.len() as f64,
        mean_hbedges: graphs.iter().map(|g| g.graph.p() as f64).sum::<f64>() / graphs.len() as f64,
        jaccard_head_vertices: jaccard(Entity::Vertices)?,
        jaccard_head_hbedges: jaccard(Entity::HbEdges)?,
        runtime_seconds: started.elapsed().as_secs_f64(),
    };

    Ok(ExperimentReport {
        experiments: suite.experiments.clone(),
        graph_seeds: graphs.iter().map(|g| g.seed).collect(),
        cells,
        matrices,
        diagnostics,
    })
}

/// One row of a paired-ranking table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    /// 1-based position under the first ranking.
    pub position: usize,
    pub entity_id: usize,
    pub score_a: f64,
    pub score_b: f64,
    /// 1-based position of the same entity under the second ranking.
    pub position_b: usize,
}

/// Scores of two experiments side by side, ordered by the first.
pub fn rank_curves(
    g: &HbGraph,
    a: BiasPair,
    b: BiasPair,
    entity: Entity,
    iterations: usize,
    tie_eps: f64,
) -> Result<Vec<CurveRow>> {
    let pick = |pair| -> Result<Vec<f64>> {
        let (v, e, _) = scores(g, pair, iterations, ScoreSource::Iterate)?;
        Ok(match entity {
            Entity::Vertices => v,
            Entity::HbEdges => e,
        })
    };
    let (sa, sb) = (pick(a)?, pick(b)?);
    Ok(curve_rows(
        &Ranking::from_scores(&sa, tie_eps)?,
        &Ranking::from_scores(&sb, tie_eps)?,
    ))
}

fn curve_rows(ra: &Ranking, rb: &Ranking) -> Vec<CurveRow> {
    let mut pos_b = vec![0; rb.len()];
    for (pos, &id) in rb.order().iter().enumerate() {
        pos_b[id] = pos + 1;
    }
    ra.order()
        .iter()
        .enumerate()
        .map(|(pos, &id)| CurveRow {
            position: pos + 1,
            entity_id: id,
            score_a: ra.scores()[id],
            score_b: rb.scores()[id],
            position_b: pos_b[id],
        })
        .collect()
}

pub fn write_curves_csv(rows: &[CurveRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["position", "entity_id", "score_a", "score_b", "position_b"])?;
    for r in rows {
        w.write_record([
            r.position.to_string(),
            r.entity_id.to_string(),
            format!("{:e}", r.score_a),
            format!("{:e}", r.score_b),
            r.position_b.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the run directory: resolved suite, the four matrices (CSV and
/// JSON), every ranking, reference-vs-experiment curves for the first graph,
/// and diagnostics.
pub fn write_report(suite: &ExperimentSuite, report: &ExperimentReport, out: &Path) -> Result<()> {
    fs::create_dir_all(out.join("rankings"))?;
    fs::create_dir_all(out.join("curves"))?;
    io::write_json(suite, &out.join("config.json"))?;

    for variant in [TauVariant::Strict, TauVariant::Large] {
        for entity in [Entity::Vertices, Entity::HbEdges] {
            let m = report.matrices.get(variant, entity);
            let stem = format!("matrix_{}_{}", variant.name(), entity.name());
            m.write_csv(fs::File::create(out.join(format!("{stem}.csv")))?)?;
            io::write_json(&m.rows(), &out.join(format!("{stem}.json")))?;
        }
    }

    for (seed, row) in report.graph_seeds.iter().zip(&report.cells) {
        for (k, cell) in row.iter().enumerate() {
            for (entity, ranking) in [(Entity::Vertices, &cell.vertex), (Entity::HbEdges, &cell.hbedge)] {
                let name = format!("graph{seed}_exp{}_{}.csv", k + 1, entity.short());
                ranking.write_csv(fs::File::create(out.join("rankings").join(name))?)?;
            }
        }
    }

    if let (Some(seed), Some(row)) = (report.graph_seeds.first(), report.cells.first()) {
        for (k, cell) in row.iter().enumerate().skip(1) {
            for (entity, a, b) in [
                (Entity::Vertices, &row[0].vertex, &cell.vertex),
                (Entity::HbEdges, &row[0].hbedge, &cell.hbedge),
            ] {
                let name = format!("graph{seed}_exp1_vs_exp{}_{}.csv", k + 1, entity.short());
                write_curves_csv(&curve_rows(a, b), &out.join("curves").join(name))?;
            }
        }
    }

    io::write_json(&report.diagnostics, &out.join("diagnostics.json"))?;
    Ok(())
}
