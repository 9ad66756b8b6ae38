//! Rankings with explicit tie groups.

use std::io::Write;

use crate::error::{Error, Result};

/// Relative tolerance below which two scores are considered tied.
pub const DEFAULT_TIE_EPS: f64 = 1e-10;

/// Entities ordered by descending score, partitioned into tie groups.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    order: Vec<usize>,
    scores: Vec<f64>,
    // tie group of each entity, 0 for the top group
    group: Vec<usize>,
    groups: usize,
}

impl Ranking {
    /// Sorts by descending score (ties by ascending entity index) and groups
    /// consecutive entities whose score is within
    /// `tie_eps·max(1, |leader|)` of the first entity of the current group.
    pub fn from_scores(scores: &[f64], tie_eps: f64) -> Result<Self> {
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "score of entity {i} is not finite ({})",
                scores[i]
            )));
        }
        if tie_eps.is_nan() || tie_eps < 0.0 {
            return Err(Error::InvalidArgument(format!("tie tolerance {tie_eps} must be a non-negative number")));
        }
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));

        let mut group = vec![0; scores.len()];
        let mut groups = 0;
        let mut leader = f64::NAN;
        for &id in &order {
            let s = scores[id];
            if groups == 0 || (leader - s).abs() > tie_eps * leader.abs().max(1.0) {
                groups += 1;
                leader = s;
            }
            group[id] = groups - 1;
        }
        Ok(Ranking {
            order,
            scores: scores.to_vec(),
            group,
            groups,
        })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Entity ids, best first.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Score of every entity, indexed by entity id.
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Tie group of `id` (0 is the top group).
    pub fn tie_group(&self, id: usize) -> usize {
        self.group[id]
    }

    pub fn group_count(&self) -> usize {
        self.groups
    }

    /// Members of every tie group, top group first.
    pub fn tie_groups(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.groups];
        for &id in &self.order {
            out[self.group[id]].push(id);
        }
        out
    }

    /// Writes `rank,entity_id,score,tie_group` rows; ranks and groups are 1-based.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["rank", "entity_id", "score", "tie_group"])?;
        for (pos, &id) in self.order.iter().enumerate() {
            w.write_record([
                (pos + 1).to_string(),
                id.to_string(),
                format!("{:e}", self.scores[id]),
                (self.group[id] + 1).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
