//! Rank correlation between rankings: strict and large Kendall tau,
//! head-overlap Jaccard index, and correlation matrices.
//!
//! Ties come from the rankings' tie groups. For every unordered pair of
//! entities the two rankings either order it the same way (concordant), in
//! opposite ways (discordant), both tie it, or exactly one ties it.
//!
//! * strict: `(C − D) / n₀`
//! * large:  `(C + T_both − D − T_one) / n₀`

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranking::Ranking;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct TauPairCounts {
    pub concordant: u64,
    pub discordant: u64,
    pub tied_both: u64,
    pub tied_one: u64,
    pub total_pairs: u64,
}

impl TauPairCounts {
    pub fn tau_strict(&self) -> f64 {
        if self.total_pairs == 0 {
            return 1.0;
        }
        (self.concordant as f64 - self.discordant as f64) / self.total_pairs as f64
    }

    pub fn tau_large(&self) -> f64 {
        if self.total_pairs == 0 {
            return 1.0;
        }
        let plus = (self.concordant + self.tied_both) as f64;
        let minus = (self.discordant + self.tied_one) as f64;
        (plus - minus) / self.total_pairs as f64
    }

    pub fn tau(&self, variant: TauVariant) -> f64 {
        match variant {
            TauVariant::Strict => self.tau_strict(),
            TauVariant::Large => self.tau_large(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TauVariant {
    Strict,
    Large,
}

impl TauVariant {
    pub fn name(self) -> &'static str {
        match self {
            TauVariant::Strict => "strict",
            TauVariant::Large => "large",
        }
    }
}

fn pairs(m: u64) -> u64 {
    m * m.saturating_sub(1) / 2
}

/// Classifies all unordered entity pairs in `O(n log n)`.
pub fn pair_counts(a: &Ranking, b: &Ranking) -> Result<TauPairCounts> {
    if a.len() != b.len() {
        return Err(Error::RankingMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len();
    let ga: Vec<usize> = (0..n).map(|i| a.tie_group(i)).collect();
    let gb: Vec<usize> = (0..n).map(|i| b.tie_group(i)).collect();

    let mut by_pair: Vec<usize> = (0..n).collect();
    by_pair.sort_unstable_by_key(|&i| (ga[i], gb[i]));

    let mut ties_a = 0;
    let mut ties_both = 0;
    let mut run_a = 0u64;
    let mut run_ab = 0u64;
    for (k, &i) in by_pair.iter().enumerate() {
        let same_a = k > 0 && ga[by_pair[k - 1]] == ga[i];
        let same_ab = same_a && gb[by_pair[k - 1]] == gb[i];
        run_a = if same_a { run_a + 1 } else { 1 };
        run_ab = if same_ab { run_ab + 1 } else { 1 };
        // each new member of a run pairs with every earlier member
        ties_a += run_a - 1;
        ties_both += run_ab - 1;
    }
    let mut sizes_b = vec![0u64; b.group_count().max(1)];
    for &g in &gb {
        sizes_b[g] += 1;
    }
    let ties_b: u64 = sizes_b.iter().map(|&s| pairs(s)).sum();

    // strict inversions of gb along the (ga, gb) order are the discordant pairs
    let mut fenwick = Fenwick::new(sizes_b.len());
    let mut discordant = 0u64;
    for (k, &i) in by_pair.iter().enumerate() {
        discordant += k as u64 - fenwick.prefix(gb[i]);
        fenwick.add(gb[i]);
    }

    let total_pairs = pairs(n as u64);
    let tied_one = ties_a + ties_b - 2 * ties_both;
    Ok(TauPairCounts {
        concordant: total_pairs - discordant - ties_both - tied_one,
        discordant,
        tied_both: ties_both,
        tied_one,
        total_pairs,
    })
}

struct Fenwick {
    tree: Vec<u64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick { tree: vec![0; n + 1] }
    }

    fn add(&mut self, i: usize) {
        let mut k = i + 1;
        while k < self.tree.len() {
            self.tree[k] += 1;
            k += k & k.wrapping_neg();
        }
    }

    /// Count of inserted keys `≤ i`.
    fn prefix(&self, i: usize) -> u64 {
        let mut k = i + 1;
        let mut s = 0;
        while k > 0 {
            s += self.tree[k];
            k -= k & k.wrapping_neg();
        }
        s
    }
}

pub fn tau_strict(a: &Ranking, b: &Ranking) -> Result<f64> {
    Ok(pair_counts(a, b)?.tau_strict())
}

pub fn tau_large(a: &Ranking, b: &Ranking) -> Result<f64> {
    Ok(pair_counts(a, b)?.tau_large())
}

/// Jaccard index of the top-`k` sets; a tie group straddling position `k` is
/// included entirely.
pub fn jaccard_head(a: &Ranking, b: &Ranking, k: usize) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::RankingMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if k == 0 || k > a.len() {
        return Err(Error::InvalidArgument(format!(
            "head size {k} must be in 1..={}",
            a.len()
        )));
    }
    let head = |r: &Ranking| {
        let cut = r.tie_group(r.order()[k - 1]);
        let mut set = vec![false; r.len()];
        for (id, flag) in set.iter_mut().enumerate() {
            *flag = r.tie_group(id) <= cut;
        }
        set
    };
    let (ha, hb) = (head(a), head(b));
    let inter = ha.iter().zip(&hb).filter(|(x, y)| **x && **y).count();
    let union = ha.iter().zip(&hb).filter(|(x, y)| **x || **y).count();
    Ok(inter as f64 / union as f64)
}

/// Square symmetric matrix of pairwise correlations, unit diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub size: usize,
    /// Row-major entries.
    pub values: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn identity(size: usize) -> Self {
        let mut values = vec![0.0; size * size];
        for i in 0..size {
            values[i * size + i] = 1.0;
        }
        CorrelationMatrix { size, values }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    fn set_sym(&mut self, i: usize, j: usize, x: f64) {
        self.values[i * self.size + j] = x;
        self.values[j * self.size + i] = x;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.size.max(1)).map(<[f64]>::to_vec).collect()
    }

    /// Entrywise arithmetic mean, accumulated in slice order.
    pub fn mean(matrices: &[CorrelationMatrix]) -> Result<CorrelationMatrix> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::InvalidArgument("no matrices to average".into()))?;
        let mut acc = vec![0.0; first.values.len()];
        for m in matrices {
            if m.size != first.size {
                return Err(Error::InvalidArgument(format!(
                    "cannot average {}×{} with {}×{}",
                    m.size, m.size, first.size, first.size
                )));
            }
            for (a, x) in acc.iter_mut().zip(&m.values) {
                *a += x;
            }
        }
        let k = matrices.len() as f64;
        acc.iter_mut().for_each(|a| *a /= k);
        Ok(CorrelationMatrix {
            size: first.size,
            values: acc,
        })
    }

    /// CSV with a header row and a leading column of 1-based experiment indices.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["experiment".to_string()];
        header.extend((1..=self.size).map(|i| i.to_string()));
        w.write_record(&header)?;
        for i in 0..self.size {
            let mut row = vec![(i + 1).to_string()];
            row.extend((0..self.size).map(|j| format!("{}", self.get(i, j))));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Pairwise tau matrix for one graph. The diagonal is fixed to 1.
pub fn correlation_matrix(rankings: &[Ranking], variant: TauVariant) -> Result<CorrelationMatrix> {
    let k = rankings.len();
    if k == 0 {
        return Err(Error::InvalidArgument("no rankings to correlate".into()));
    }
    let mut m = CorrelationMatrix::identity(k);
    for i in 0..k {
        for j in i + 1..k {
            m.set_sym(i, j, pair_counts(&rankings[i], &rankings[j])?.tau(variant));
        }
    }
    Ok(m)
}

/// Strict and large matrices from one pass over the pairs.
pub fn correlation_matrices(rankings: &[Ranking]) -> Result<(CorrelationMatrix, CorrelationMatrix)> {
    let k = rankings.len();
    if k == 0 {
        return Err(Error::InvalidArgument("no rankings to correlate".into()));
    }
    let mut strict = CorrelationMatrix::identity(k);
    let mut large = CorrelationMatrix::identity(k);
    for i in 0..k {
        for j in i + 1..k {
            let c = pair_counts(&rankings[i], &rankings[j])?;
            strict.set_sym(i, j, c.tau_strict());
            large.set_sym(i, j, c.tau_large());
        }
    }
    Ok((strict, large))
}
