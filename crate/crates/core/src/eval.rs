//! Sampling and residual evaluation.
//!
//! A [`ResidualBlock`] is a symbolic list of entries, each a sum of named
//! terms. Evaluation fans out over sample points; the reduction runs in point
//! order so results never depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::EvalError;
use crate::field::ScalarField;
use crate::forms::Chart;

/// How a block is evaluated across sample points.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EvalMode {
    /// Data-parallel over points; sequential when the `parallel` feature is off.
    #[default]
    Parallel,
    Sequential,
}

/// Uniform points in the chart box from a seeded ChaCha stream.
pub fn sample_points(chart: &Chart, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            chart
                .bounds()
                .iter()
                .map(|&(lo, hi)| rng.gen_range(lo..=hi))
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct Entry {
    pub index: Vec<usize>,
    pub terms: Vec<ScalarField>,
}

/// A named residual: every entry should vanish at every point.
#[derive(Clone, Debug)]
pub struct ResidualBlock {
    pub name: String,
    pub term_names: Vec<String>,
    pub entries: Vec<Entry>,
}

/// Maximal absolute values found by [`ResidualBlock::evaluate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub max: f64,
    pub term_max: Vec<f64>,
    pub points: usize,
    pub tuples: usize,
    /// Entry index and point where `max` was attained.
    pub worst: Option<(Vec<usize>, Vec<f64>)>,
}

struct PointResult {
    max: f64,
    worst_entry: Option<usize>,
    term_max: Vec<f64>,
}

impl ResidualBlock {
    pub fn new(name: impl Into<String>, term_names: &[&str]) -> Self {
        ResidualBlock {
            name: name.into(),
            term_names: term_names.iter().map(|s| s.to_string()).collect(),
            entries: Vec::new(),
        }
    }

    /// Adds an entry; `terms` must match `term_names` in length.
    pub fn push(&mut self, index: Vec<usize>, terms: Vec<ScalarField>) {
        assert_eq!(terms.len(), self.term_names.len(), "term count for block {}", self.name);
        self.entries.push(Entry { index, terms });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The summed residual of each entry.
    pub fn totals(&self) -> Vec<ScalarField> {
        self.entries.iter().map(|e| e.terms.iter().sum()).collect()
    }

    /// Signed entry values at one point, in entry order.
    pub fn values_at(&self, point: &[f64]) -> Result<Vec<f64>, EvalError> {
        self.entries
            .iter()
            .map(|e| {
                e.terms
                    .iter()
                    .try_fold(0.0, |acc, t| Ok::<_, EvalError>(acc + t.value(point)?))
            })
            .collect()
    }

    fn eval_point(&self, point: &[f64]) -> Result<PointResult, EvalError> {
        let mut out = PointResult {
            max: 0.0,
            worst_entry: None,
            term_max: vec![0.0; self.term_names.len()],
        };
        for (k, e) in self.entries.iter().enumerate() {
            let mut total = 0.0;
            for (t, f) in e.terms.iter().enumerate() {
                let v = f.value(point)?;
                out.term_max[t] = out.term_max[t].max(v.abs());
                total += v;
            }
            if !total.is_finite() {
                return Err(EvalError::Domain {
                    expr: format!("{}{:?}", self.name, e.index),
                    reason: "non-finite residual".into(),
                });
            }
            if total.abs() > out.max || out.worst_entry.is_none() {
                out.max = out.max.max(total.abs());
                out.worst_entry = Some(k);
            }
        }
        Ok(out)
    }

    pub fn evaluate(&self, points: &[Vec<f64>], mode: EvalMode) -> Result<Evaluation, EvalError> {
        let per_point = map_points(points, mode, |p| self.eval_point(p))?;
        let mut ev = Evaluation {
            max: 0.0,
            term_max: vec![0.0; self.term_names.len()],
            points: points.len(),
            tuples: self.entries.len(),
            worst: None,
        };
        for (p, r) in points.iter().zip(per_point) {
            for (m, t) in ev.term_max.iter_mut().zip(&r.term_max) {
                *m = m.max(*t);
            }
            if let Some(k) = r.worst_entry {
                if ev.worst.is_none() || r.max > ev.max {
                    ev.max = r.max;
                    ev.worst = Some((self.entries[k].index.clone(), p.clone()));
                }
            }
        }
        Ok(ev)
    }
}

/// Applies `f` to every point, in parallel when enabled, preserving order.
pub fn map_points<T, F>(points: &[Vec<f64>], mode: EvalMode, f: F) -> Result<Vec<T>, EvalError>
where
    T: Send,
    F: Fn(&[f64]) -> Result<T, EvalError> + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        EvalMode::Parallel => {
            use rayon::prelude::*;
            points.par_iter().map(|p| f(p)).collect()
        }
        _ => points.iter().map(|p| f(p)).collect(),
    }
}

/// Entrywise `lhs − rhs` of two blocks with matching indices.
pub fn difference_block(name: &str, lhs: &ResidualBlock, rhs: &ResidualBlock) -> ResidualBlock {
    combine_blocks(name, lhs, rhs, -1.0)
}

/// Entrywise `lhs + factor · rhs` of two blocks with matching indices.
pub fn combine_blocks(name: &str, lhs: &ResidualBlock, rhs: &ResidualBlock, factor: f64) -> ResidualBlock {
    assert_eq!(lhs.len(), rhs.len(), "blocks of different shape");
    let mut block = ResidualBlock::new(name, &[lhs.name.as_str(), rhs.name.as_str()]);
    for ((e, l), (f, r)) in lhs.entries.iter().zip(lhs.totals()).zip(rhs.entries.iter().zip(rhs.totals())) {
        assert_eq!(e.index, f.index, "blocks indexed differently");
        block.push(e.index.clone(), vec![l, r.scale(factor)]);
    }
    block
}

/// Maximal absolute value of a single field over the points.
pub fn max_abs(f: &ScalarField, points: &[Vec<f64>]) -> Result<f64, EvalError> {
    points
        .iter()
        .try_fold(0.0f64, |m, p| Ok(m.max(f.value(p)?.abs())))
}
