use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Euclidean projection onto the probability simplex.
///
/// Sorts a copy descending and finds the largest prefix whose entries stay
/// positive after subtracting the common threshold
/// `θ = (Σ_{i≤ρ} v_(i) - 1) / ρ`; the result is `max(v - θ, 0)`.
pub fn project_simplex(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::EmptyVector);
    }
    if let Some(x) = v.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidParam(format!("cannot project non-finite entry {x}")));
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &x) in sorted.iter().enumerate() {
        cumsum += x;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        } else {
            break;
        }
    }
    Ok(v.iter().map(|&x| (x - theta).max(0.0)).collect())
}

/// Best projection onto the simplex with at most `k` nonzeros: keep the `k`
/// largest entries (ties favor the smaller index), zero the rest, and
/// project the survivors.
pub fn project_simplex_ksparse(v: &[f64], k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::InvalidParam("sparsity k must be at least 1".into()));
    }
    if v.len() <= k {
        return project_simplex(v);
    }
    let by_rank = |&a: &usize, &b: &usize| v[b].partial_cmp(&v[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b));
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.select_nth_unstable_by(k - 1, by_rank);
    order.truncate(k);
    order.sort_by(by_rank);
    let kept: Vec<f64> = order.iter().map(|&i| v[i]).collect();
    let projected = project_simplex(&kept)?;
    let mut out = vec![0.0; v.len()];
    for (&i, p) in order.iter().zip(projected) {
        out[i] = p;
    }
    Ok(out)
}
