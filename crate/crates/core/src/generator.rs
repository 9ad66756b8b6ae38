//! Seeded generator of grouped, connected random hb-graphs.
//!
//! The vertex pool is laid out as `n_groups` disjoint seed pools of
//! `group_seed_size` vertices, then `n_central` central vertices, then the
//! ordinary vertices. Every hb-edge belongs to one group and contains
//! `seeds_per_edge` vertices of that group's seed pool; it contains a central
//! vertex with probability `central_prob`; the rest of its m-cardinality is
//! filled with ordinary vertices. Central vertices are then used to join any
//! remaining components. The emitted graph only keeps pool vertices that
//! occur in some hb-edge, relabelled densely in pool order.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hbgraph::{HbEdge, HbGraph, VertexId};

const REPAIR_ROUNDS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    /// Potential vertices.
    pub n_pool: usize,
    /// Hb-edges per graph.
    pub p: usize,
    /// Upper bound on the m-cardinality of an hb-edge.
    pub max_mcard: f64,
    pub n_groups: usize,
    pub group_seed_size: usize,
    /// Seed-pool vertices required in each hb-edge.
    pub seeds_per_edge: usize,
    pub n_central: usize,
    /// Probability that an hb-edge receives a central vertex at sampling time.
    pub central_prob: f64,
    /// Multiplicities are drawn uniformly in `1..=multiplicity_max`.
    pub multiplicity_max: u32,
    /// Every hb-edge of a group uses the same first `seeds_per_edge` seed
    /// vertices instead of sampling them from the pool.
    pub fixed_seed_pair: bool,
    pub rng_seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_pool: 10_000,
            p: 200,
            max_mcard: 20.0,
            n_groups: 5,
            group_seed_size: 10,
            seeds_per_edge: 2,
            n_central: 20,
            central_prob: 1.0,
            multiplicity_max: 2,
            fixed_seed_pair: false,
            rng_seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn with_seed(&self, rng_seed: u64) -> Self {
        GeneratorConfig {
            rng_seed,
            ..self.clone()
        }
    }

    fn reserved(&self) -> usize {
        self.n_groups * self.group_seed_size + self.n_central
    }

    fn cap(&self) -> usize {
        self.max_mcard.floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidArgument(m));
        if self.p == 0 || self.n_groups == 0 || self.multiplicity_max == 0 {
            return fail("p, n_groups and multiplicity_max must be positive".into());
        }
        if self.seeds_per_edge > self.group_seed_size {
            return fail(format!(
                "seeds_per_edge {} exceeds group_seed_size {}",
                self.seeds_per_edge, self.group_seed_size
            ));
        }
        if self.reserved() > self.n_pool {
            return fail(format!(
                "{} seed and central vertices do not fit in a pool of {}",
                self.reserved(),
                self.n_pool
            ));
        }
        if !(self.max_mcard.is_finite() && self.max_mcard >= (self.seeds_per_edge + 1) as f64) {
            return fail(format!(
                "max_mcard {} must be at least seeds_per_edge + 1",
                self.max_mcard
            ));
        }
        if self.n_pool - self.reserved() < self.cap() {
            return fail("not enough ordinary vertices to fill an hb-edge".into());
        }
        if !(0.0..=1.0).contains(&self.central_prob) {
            return fail(format!("central_prob {} is not a probability", self.central_prob));
        }
        if self.central_prob > 0.0 && self.n_central == 0 {
            return fail("central_prob > 0 requires central vertices".into());
        }
        Ok(())
    }
}

/// A generated graph with its group and central-vertex bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedGraph {
    pub graph: HbGraph,
    pub meta: GenerationMeta,
}

/// Sidecar metadata; vertex ids refer to the emitted (compacted) graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationMeta {
    pub rng_seed: u64,
    /// Seed-pool vertices of every group that occur in the graph.
    pub groups: Vec<Vec<usize>>,
    /// Central vertices that occur in the graph.
    pub central: Vec<usize>,
    /// Group of every hb-edge.
    pub edge_group: Vec<usize>,
    /// Pool index of every vertex.
    pub pool_index: Vec<usize>,
    /// Central vertices added by the connectivity repair.
    pub repairs: usize,
}

struct Draft {
    // pool index -> multiplicity, insertion ordered
    members: Vec<(usize, u32)>,
    group: usize,
}

impl Draft {
    fn mcard(&self) -> u32 {
        self.members.iter().map(|&(_, m)| m).sum()
    }

    fn contains(&self, v: usize) -> bool {
        self.members.iter().any(|&(u, _)| u == v)
    }
}

pub fn generate(cfg: &GeneratorConfig) -> Result<GeneratedGraph> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let central_start = cfg.n_groups * cfg.group_seed_size;
    let ordinary_start = cfg.reserved();
    let cap = cfg.cap() as u32;

    let mut drafts = Vec::with_capacity(cfg.p);
    for _ in 0..cfg.p {
        let group = rng.random_range(0..cfg.n_groups);
        let target = rng.random_range(cfg.seeds_per_edge as u32 + 1..=cap);
        let with_central = cfg.n_central > 0 && rng.random_bool(cfg.central_prob);

        let mut mandatory: Vec<usize> = if cfg.fixed_seed_pair {
            (0..cfg.seeds_per_edge).collect()
        } else {
            index::sample(&mut rng, cfg.group_seed_size, cfg.seeds_per_edge).into_vec()
        };
        for s in mandatory.iter_mut() {
            *s += group * cfg.group_seed_size;
        }
        if with_central {
            mandatory.push(central_start + rng.random_range(0..cfg.n_central));
        }

        let mut draft = Draft {
            members: Vec::with_capacity(cap as usize),
            group,
        };
        let mut used = 0u32;
        for (k, &v) in mandatory.iter().enumerate() {
            // keep one unit for every mandatory member still to come
            let reserve = (mandatory.len() - k - 1) as u32;
            let m = draw_multiplicity(&mut rng, cfg.multiplicity_max, target - used - reserve);
            draft.members.push((v, m));
            used += m;
        }
        while used < target {
            let v = loop {
                let v = rng.random_range(ordinary_start..cfg.n_pool);
                if !draft.contains(v) {
                    break v;
                }
            };
            let m = draw_multiplicity(&mut rng, cfg.multiplicity_max, target - used);
            draft.members.push((v, m));
            used += m;
        }
        drafts.push(draft);
    }

    let repairs = repair_connectivity(cfg, &mut rng, &mut drafts, central_start, cap)?;
    compact(cfg, drafts, central_start, repairs)
}

fn draw_multiplicity(rng: &mut ChaCha8Rng, max: u32, budget: u32) -> u32 {
    rng.random_range(1..=max).min(budget).max(1)
}

fn pool_graph(cfg: &GeneratorConfig, drafts: &[Draft]) -> Result<HbGraph> {
    let edges = drafts
        .iter()
        .map(|d| HbEdge::new(d.members.iter().map(|&(v, m)| (VertexId(v), m as f64)), 1.0))
        .collect::<Result<Vec<_>>>()?;
    HbGraph::new(cfg.n_pool, edges, None)
}

fn repair_connectivity(
    cfg: &GeneratorConfig,
    rng: &mut ChaCha8Rng,
    drafts: &mut [Draft],
    central_start: usize,
    cap: u32,
) -> Result<usize> {
    let mut repairs = 0;
    for _ in 0..REPAIR_ROUNDS {
        let comps = pool_graph(cfg, drafts)?.components();
        if comps.count == 1 {
            return Ok(repairs);
        }
        if cfg.n_central == 0 {
            return Err(Error::Generation(format!(
                "{} components and no central vertices to join them",
                comps.count
            )));
        }
        let mut sizes = vec![0usize; comps.count];
        for &c in &comps.edge {
            sizes[c] += 1;
        }
        // largest component, lowest id on ties
        let principal = (0..comps.count)
            .max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a)))
            .unwrap_or(0);

        let pick_edge = |rng: &mut ChaCha8Rng, drafts: &[Draft], comp: usize| -> Option<usize> {
            let open: Vec<usize> = (0..drafts.len())
                .filter(|&j| comps.edge[j] == comp && drafts[j].mcard() < cap)
                .collect();
            (!open.is_empty()).then(|| open[rng.random_range(0..open.len())])
        };

        for comp in (0..comps.count).filter(|&c| c != principal) {
            let c = central_start + rng.random_range(0..cfg.n_central);
            if comps.vertex[c] != Some(principal) {
                // anchor the central vertex in the principal component first
                let j = pick_edge(rng, drafts, principal).ok_or_else(|| {
                    Error::Generation("principal component has no hb-edge with spare m-cardinality".into())
                })?;
                drafts[j].members.push((c, 1));
                repairs += 1;
            }
            let j = pick_edge(rng, drafts, comp).ok_or_else(|| {
                Error::Generation(format!("component {comp} has no hb-edge with spare m-cardinality"))
            })?;
            if !drafts[j].contains(c) {
                drafts[j].members.push((c, 1));
                repairs += 1;
            }
        }
    }
    if pool_graph(cfg, drafts)?.components().count == 1 {
        Ok(repairs)
    } else {
        Err(Error::Generation(format!(
            "graph still disconnected after {REPAIR_ROUNDS} repair rounds"
        )))
    }
}

fn compact(cfg: &GeneratorConfig, drafts: Vec<Draft>, central_start: usize, repairs: usize) -> Result<GeneratedGraph> {
    let mut present = vec![false; cfg.n_pool];
    for d in &drafts {
        for &(v, _) in &d.members {
            present[v] = true;
        }
    }
    let pool_index: Vec<usize> = (0..cfg.n_pool).filter(|&v| present[v]).collect();
    let mut dense = vec![usize::MAX; cfg.n_pool];
    for (i, &v) in pool_index.iter().enumerate() {
        dense[v] = i;
    }
    let edge_group = drafts.iter().map(|d| d.group).collect();
    let edges = drafts
        .iter()
        .map(|d| HbEdge::new(d.members.iter().map(|&(v, m)| (VertexId(dense[v]), m as f64)), 1.0))
        .collect::<Result<Vec<_>>>()?;
    let labels = pool_index.iter().map(|v| format!("v{v}")).collect();
    let graph = HbGraph::new(pool_index.len(), edges, Some(labels))?;
    if !graph.is_connected() {
        return Err(Error::Generation("generated graph is not connected".into()));
    }

    let groups = (0..cfg.n_groups)
        .map(|g| {
            let lo = g * cfg.group_seed_size;
            (lo..lo + cfg.group_seed_size)
                .filter(|&v| present[v])
                .map(|v| dense[v])
                .collect()
        })
        .collect();
    let central = (central_start..central_start + cfg.n_central)
        .filter(|&v| present[v])
        .map(|v| dense[v])
        .collect();
    Ok(GeneratedGraph {
        graph,
        meta: GenerationMeta {
            rng_seed: cfg.rng_seed,
            groups,
            central,
            edge_group,
            pool_index,
            repairs,
        },
    })
}

/// `count` graphs with seeds `base_seed..base_seed + count`, in seed order.
pub fn batch(cfg: &GeneratorConfig, count: usize, base_seed: u64) -> Result<Vec<GeneratedGraph>> {
    if count == 0 {
        return Err(Error::InvalidArgument("batch size must be at least 1".into()));
    }
    (0..count as u64)
        .into_par_iter()
        .map(|k| generate(&cfg.with_seed(base_seed + k)))
        .collect()
}
