//! Comparing fusers across a corpus to expose metrics that reward doing
//! nothing.

use super::{evaluate, MetricReport};
use crate::error::{invalid, Result};
use crate::fusion::{fuse_pair, Fuser};
use crate::imaging::{Image, SourcePair};
use crate::par;

#[derive(Clone, Debug)]
pub struct BiasRow {
    pub pair_id: String,
    pub fuser: String,
    pub report: MetricReport,
}

#[derive(Clone, Debug, Default)]
pub struct BiasTable {
    /// One row per `(pair, fuser)`, pair-major, in input order.
    pub rows: Vec<BiasRow>,
}

impl BiasTable {
    fn score(&self, pair_id: &str, fuser: &str, metric: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.pair_id == pair_id && r.fuser == fuser)
            .and_then(|r| r.report.values()[metric])
    }

    fn pair_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !ids.contains(&r.pair_id.as_str()) {
                ids.push(&r.pair_id);
            }
        }
        ids
    }

    fn best_dummy(&self, pair_id: &str, metric: usize) -> Option<f64> {
        ["dummy-a", "dummy-b"]
            .iter()
            .filter_map(|d| self.score(pair_id, d, metric))
            .reduce(f64::max)
    }

    /// Pairs on which a dummy fuser strictly outscores `average` on the
    /// metric at `metric` (an index into [`MetricReport::NAMES`]).
    pub fn dummy_above_average(&self, metric: usize) -> usize {
        self.pair_ids()
            .into_iter()
            .filter(|id| match (self.best_dummy(id, metric), self.score(id, "average", metric)) {
                (Some(d), Some(avg)) => d > avg,
                _ => false,
            })
            .count()
    }

    /// `(pair_id, metric name)` for every case where a dummy strictly
    /// outscores `average`.
    pub fn flags(&self) -> Vec<(String, &'static str)> {
        let mut out = Vec::new();
        for id in self.pair_ids() {
            for (k, name) in MetricReport::NAMES.iter().enumerate() {
                if let (Some(d), Some(avg)) = (self.best_dummy(id, k), self.score(id, "average", k)) {
                    if d > avg {
                        out.push((id.to_string(), *name));
                    }
                }
            }
        }
        out
    }
}

/// A source pair with an identifier and optional reference image.
pub type StudyPair = (String, SourcePair, Option<Image>);

/// Fuses every pair with every fuser and scores the results.
pub fn bias_study(pairs: &[StudyPair], fusers: &[Fuser]) -> Result<BiasTable> {
    if fusers.is_empty() {
        return Err(invalid("bias study needs at least one fuser"));
    }
    let jobs: Vec<(usize, usize)> = (0..pairs.len())
        .flat_map(|p| (0..fusers.len()).map(move |f| (p, f)))
        .collect();
    let rows = par::map_slice(&jobs, |&(p, f)| -> Result<BiasRow> {
        let (id, pair, reference) = &pairs[p];
        let fused = fuse_pair(&fusers[f], pair)?;
        Ok(BiasRow {
            pair_id: id.clone(),
            fuser: fusers[f].name().to_string(),
            report: evaluate(&pair.a, &pair.b, &fused, reference.as_ref())?,
        })
    });
    Ok(BiasTable {
        rows: rows.into_iter().collect::<Result<_>>()?,
    })
}
