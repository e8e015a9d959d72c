use std::path::Path;

use super::Scored;
use crate::error::Result;
use crate::graph::{Graph, ObservedLabels};
use crate::tsv;

pub const BUCKETS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bucket {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub hits_at_3: usize,
}

impl Bucket {
    pub fn p_correct(&self) -> Option<f64> {
        (self.n > 0).then(|| self.hits_at_3 as f64 / self.n as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionCurve {
    pub buckets: Vec<Bucket>,
    /// Held-out pairs skipped for having no label-known neighbor.
    pub excluded: usize,
}

impl ResolutionCurve {
    /// `(bucket index, p)` for every non-empty bucket.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.buckets
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.p_correct().map(|p| (i as f64, p)))
            .collect()
    }

    /// Adds the counts of `other`, e.g. the same curve from another fold.
    pub fn merge(&mut self, other: &ResolutionCurve) {
        for (a, b) in self.buckets.iter_mut().zip(&other.buckets) {
            a.n += b.n;
            a.hits_at_3 += b.hits_at_3;
        }
        self.excluded += other.excluded;
    }

    /// Whether the non-empty buckets never decrease.
    pub fn is_monotone(&self) -> bool {
        self.points().windows(2).all(|w| w[1].1 >= w[0].1)
    }

    pub fn spearman(&self) -> f64 {
        let (x, y): (Vec<f64>, Vec<f64>) = self.points().into_iter().unzip();
        spearman(&x, &y)
    }
}

/// Buckets the held-out pairs of `label_type` by the fraction of their
/// label-known neighbors (in `train`) that share the true label, and
/// measures how often the truth made the top three in each decile.
pub fn resolution_curve(graph: &Graph, train: &ObservedLabels, label_type: usize, scored: &[Scored]) -> ResolutionCurve {
    let mut buckets: Vec<Bucket> = (0..BUCKETS)
        .map(|i| Bucket {
            lo: i as f64 / BUCKETS as f64,
            hi: (i + 1) as f64 / BUCKETS as f64,
            n: 0,
            hits_at_3: 0,
        })
        .collect();
    let mut excluded = 0;
    for s in scored.iter().filter(|s| s.label_type == label_type) {
        let mut known = 0usize;
        let mut sharing = 0usize;
        for &v in graph.neighbors(s.node) {
            if let Some(l) = train.get(v as usize, label_type) {
                known += 1;
                if Some(l) == s.label {
                    sharing += 1;
                }
            }
        }
        if known == 0 {
            excluded += 1;
            continue;
        }
        let b = (sharing * BUCKETS / known).min(BUCKETS - 1);
        buckets[b].n += 1;
        if s.hit(3) {
            buckets[b].hits_at_3 += 1;
        }
    }
    ResolutionCurve { buckets, excluded }
}

fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties. NaN when either
/// side is constant or there are fewer than two points.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    if x.len() < 2 {
        return f64::NAN;
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// `bucket_lo<TAB>bucket_hi<TAB>n<TAB>p_correct_at_3`; empty buckets get
/// an empty probability field.
pub fn write_curve(path: &Path, curve: &ResolutionCurve) -> Result<()> {
    tsv::write_file(path, |w| {
        for b in &curve.buckets {
            match b.p_correct() {
                Some(p) => writeln!(w, "{}\t{}\t{}\t{}", b.lo, b.hi, b.n, p)?,
                None => writeln!(w, "{}\t{}\t{}\t", b.lo, b.hi, b.n)?,
            }
        }
        Ok(())
    })
}
