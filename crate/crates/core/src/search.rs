//! Candidate ranking shared by the alignment and regression searches.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::MixtureRatio;

/// Rows kept in a report's score table.
pub const TABLE_ROWS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub index: usize,
    pub score: f64,
}

/// Outcome of scoring a candidate set and averaging the best `top_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub ratio: MixtureRatio,
    /// Score of the best single candidate.
    pub best_score: f64,
    /// Score of the returned (averaged) ratio.
    pub score: f64,
    pub top_k: usize,
    /// Best candidates in ranking order, at most [`TABLE_ROWS`].
    pub table: Vec<ScoredCandidate>,
}

impl SearchOutcome {
    /// Score table as CSV: `rank,index,score,w0,w1,...`.
    pub fn table_csv(&self, candidates: &[MixtureRatio]) -> String {
        let m = candidates.first().map_or(0, |c| c.len());
        let mut out = String::from("rank,index,score");
        for j in 0..m {
            out.push_str(&format!(",w{j}"));
        }
        out.push('\n');
        for (rank, row) in self.table.iter().enumerate() {
            out.push_str(&format!("{},{},{}", rank + 1, row.index, row.score));
            for w in candidates[row.index].as_slice() {
                out.push_str(&format!(",{w}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Scores every candidate in parallel; the result is in candidate order.
pub fn score_all<F>(candidates: &[MixtureRatio], score: F) -> Result<Vec<f64>>
where
    F: Fn(&MixtureRatio) -> Result<f64> + Sync + Send,
{
    candidates.par_iter().with_min_len(64).map(score).collect()
}

/// Sorts ascending by `(score, index)`.
pub fn rank(scores: &[f64]) -> Vec<ScoredCandidate> {
    let mut rows: Vec<ScoredCandidate> = scores
        .iter()
        .enumerate()
        .map(|(index, &score)| ScoredCandidate { index, score })
        .collect();
    rows.sort_by(|a, b| a.score.total_cmp(&b.score).then(a.index.cmp(&b.index)));
    rows
}

/// Componentwise mean of the selected candidates, renormalized onto the simplex.
pub fn average(candidates: &[MixtureRatio], picks: &[ScoredCandidate]) -> Result<MixtureRatio> {
    let m = candidates[picks[0].index].len();
    let mut acc = vec![0.0; m];
    for p in picks {
        for (a, &w) in acc.iter_mut().zip(candidates[p.index].as_slice()) {
            *a += w;
        }
    }
    let k = picks.len() as f64;
    let mean: Vec<f64> = acc.into_iter().map(|a| a / k).collect();
    MixtureRatio::from_internal(&mean)
}

/// Scores, ranks and averages the `top_k` best candidates.
pub fn search<F>(candidates: &[MixtureRatio], top_k: usize, score: F) -> Result<SearchOutcome>
where
    F: Fn(&MixtureRatio) -> Result<f64> + Sync + Send,
{
    if candidates.is_empty() {
        return Err(Error::EmptyVector);
    }
    if top_k == 0 || top_k > candidates.len() {
        return Err(Error::InvalidArgument(format!(
            "top_k must be in [1, {}], got {top_k}",
            candidates.len()
        )));
    }
    let scores = score_all(candidates, &score)?;
    let ranked = rank(&scores);
    let best = ranked[0];
    let ratio = if top_k == 1 {
        candidates[best.index].clone()
    } else {
        average(candidates, &ranked[..top_k])?
    };
    let final_score = if top_k == 1 { best.score } else { score(&ratio)? };
    Ok(SearchOutcome {
        ratio,
        best_score: best.score,
        score: final_score,
        top_k,
        table: ranked.into_iter().take(TABLE_ROWS).collect(),
    })
}
