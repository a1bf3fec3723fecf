//! Pairwise similarity and distance measures between topics.

use std::collections::HashSet;
use std::hash::Hash;

use crate::corpus::check_simplex;
use crate::error::{Error, Result};

/// Cosine similarity of two non-negative vectors, in `[0, 1]`.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::invalid_input("cosine of vectors with different lengths"));
    }
    let nu = norm(u);
    let nv = norm(v);
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::invalid_input("cosine similarity of a zero vector is undefined"));
    }
    Ok(cosine_with_norms(u, nu, v, nv))
}

pub(crate) fn norm(u: &[f64]) -> f64 {
    u.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn cosine_with_norms(u: &[f64], nu: f64, v: &[f64], nv: f64) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    (dot / (nu * nv)).clamp(0.0, 1.0)
}

/// Jensen-Shannon distance: the square root of the base-2 JS divergence.
///
/// Lies in `[0, 1]`; 1 for distributions with disjoint supports.
pub fn jensen_shannon_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::invalid_input("JS distance of vectors with different lengths"));
    }
    check_simplex(p).map_err(|m| Error::invalid_input(format!("first distribution: {m}")))?;
    check_simplex(q).map_err(|m| Error::invalid_input(format!("second distribution: {m}")))?;
    Ok(js_distance_unchecked(p, q))
}

pub(crate) fn js_distance_unchecked(p: &[f64], q: &[f64]) -> f64 {
    let mut div = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let m = 0.5 * (a + b);
        if a > 0.0 {
            div += a * (a / m).log2();
        }
        if b > 0.0 {
            div += b * (b / m).log2();
        }
    }
    (0.5 * div).clamp(0.0, 1.0).sqrt()
}

/// Truncated, normalized rank-biased overlap.
///
/// ```text
/// rbo = sum_{d=1..D} p^(d-1) A_d / sum_{d=1..D} p^(d-1),  A_d = |s[..d] ∩ t[..d]| / d
/// ```
///
/// `D` is `depth` capped at the longer list, so identical lists score 1 at
/// any depth.
pub fn rbo<T: Eq + Hash>(s: &[T], t: &[T], p: f64, depth: usize) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid_parameter(format!("RBO persistence {p} outside (0, 1)")));
    }
    if depth == 0 {
        return Err(Error::invalid_parameter("RBO depth must be at least 1"));
    }
    if has_duplicates(s) || has_duplicates(t) {
        return Err(Error::invalid_input("ranked lists must not contain duplicates"));
    }
    Ok(rbo_unchecked(s, t, p, depth))
}

fn has_duplicates<T: Eq + Hash>(list: &[T]) -> bool {
    let set: HashSet<&T> = list.iter().collect();
    set.len() != list.len()
}

pub(crate) fn rbo_unchecked<T: Eq + Hash>(s: &[T], t: &[T], p: f64, depth: usize) -> f64 {
    let depth = depth.min(s.len().max(t.len()));
    if depth == 0 {
        return 1.0;
    }
    let mut seen_s: HashSet<&T> = HashSet::with_capacity(depth);
    let mut seen_t: HashSet<&T> = HashSet::with_capacity(depth);
    let mut overlap = 0usize;
    let mut weight = 1.0;
    let mut num = 0.0;
    let mut den = 0.0;
    for d in 0..depth {
        let x = s.get(d);
        let y = t.get(d);
        match (x, y) {
            (Some(x), Some(y)) if x == y => overlap += 1,
            _ => {
                if let Some(x) = x {
                    overlap += usize::from(seen_t.contains(x));
                }
                if let Some(y) = y {
                    overlap += usize::from(seen_s.contains(y));
                }
            }
        }
        if let Some(x) = x {
            seen_s.insert(x);
        }
        if let Some(y) = y {
            seen_t.insert(y);
        }
        num += weight * overlap as f64 / (d + 1) as f64;
        den += weight;
        weight *= p;
    }
    num / den
}

/// Indices of the `depth` largest entries of `row`, largest first; equal
/// values rank the lower index first.
pub fn ranked_indices(row: &[f64], depth: usize) -> Vec<usize> {
    let cmp = |a: &usize, b: &usize| row[*b].total_cmp(&row[*a]).then(a.cmp(b));
    let mut idx: Vec<usize> = (0..row.len()).collect();
    let depth = depth.min(row.len());
    if depth == 0 {
        return Vec::new();
    }
    if depth < idx.len() {
        idx.select_nth_unstable_by(depth - 1, cmp);
        idx.truncate(depth);
    }
    idx.sort_unstable_by(cmp);
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cosine_examples() {
        let p = [0.2, 0.3, 0.5];
        assert!((cosine_similarity(&p, &p).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let v = cosine_similarity(&[0.5, 0.5], &[1.0, 0.0]).unwrap();
        assert!((v - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!(cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn js_examples() {
        let p = [0.1, 0.6, 0.3];
        assert_eq!(jensen_shannon_distance(&p, &p).unwrap(), 0.0);
        assert_eq!(jensen_shannon_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        // direct evaluation of the divergence formula
        let (a, b) = ([0.5, 0.5], [0.25, 0.75]);
        let m = [0.375, 0.625];
        let kl = |x: &[f64; 2]| -> f64 { (0..2).map(|i| x[i] * (x[i] / m[i]).log2()).sum() };
        let expect = (0.5 * kl(&a) + 0.5 * kl(&b)).sqrt();
        let got = jensen_shannon_distance(&a, &b).unwrap();
        assert!((got - expect).abs() < 1e-15);
        assert!((got - 0.2209).abs() < 1e-4, "{got}");
        assert!(jensen_shannon_distance(&[0.5, 0.6], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn rbo_examples() {
        let s = ['a', 'b', 'c'];
        assert_eq!(rbo(&s, &s, 0.9, 3).unwrap(), 1.0);
        assert_eq!(rbo(&s, &s, 0.5, 50).unwrap(), 1.0);
        assert_eq!(rbo(&s, &['x', 'y', 'z'], 0.9, 3).unwrap(), 0.0);
        let got = rbo(&s, &['a', 'c', 'b'], 0.9, 3).unwrap();
        let expect = (1.0 + 0.45 + 0.81) / (1.0 + 0.9 + 0.81);
        assert!((got - expect).abs() < 1e-15);
        assert!((got - 0.8339).abs() < 1e-4);
    }

    #[test]
    fn rbo_errors() {
        assert!(rbo(&[1, 1], &[1, 2], 0.9, 2).is_err());
        assert!(rbo(&[1], &[1], 1.0, 2).is_err());
        assert!(rbo(&[1], &[1], 0.9, 0).is_err());
    }

    #[test]
    fn ranking_ties_prefer_lower_index() {
        assert_eq!(ranked_indices(&[0.2, 0.4, 0.4, 0.0], 3), vec![1, 2, 0]);
        assert_eq!(ranked_indices(&[0.1, 0.9], 5), vec![1, 0]);
    }

    fn dist(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, n).prop_filter_map("non-zero", |v| {
            let s: f64 = v.iter().sum();
            (s > 0.0).then(|| v.iter().map(|x| x / s).collect())
        })
    }

    proptest! {
        #[test]
        fn symmetry(p in dist(6), q in dist(6)) {
            let a = jensen_shannon_distance(&p, &q).unwrap();
            let b = jensen_shannon_distance(&q, &p).unwrap();
            prop_assert!((a - b).abs() < 1e-15);
            prop_assert!((0.0..=1.0).contains(&a));
            let s = ranked_indices(&p, 4);
            let t = ranked_indices(&q, 4);
            prop_assert!((rbo(&s, &t, 0.9, 4).unwrap() - rbo(&t, &s, 0.9, 4).unwrap()).abs() < 1e-15);
        }

        #[test]
        fn cosine_scale_invariance(p in dist(5), q in dist(5), c in 0.01f64..100.0) {
            let scaled: Vec<f64> = p.iter().map(|x| x * c).collect();
            let a = cosine_similarity(&scaled, &q).unwrap();
            let b = cosine_similarity(&p, &q).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn zero_padding_is_neutral(p in dist(5), q in dist(5), pad in 1usize..6) {
            let mut pp = p.clone();
            let mut qq = q.clone();
            pp.extend(std::iter::repeat_n(0.0, pad));
            qq.extend(std::iter::repeat_n(0.0, pad));
            prop_assert!((cosine_similarity(&pp, &qq).unwrap() - cosine_similarity(&p, &q).unwrap()).abs() < 1e-12);
            prop_assert!((jensen_shannon_distance(&pp, &qq).unwrap() - jensen_shannon_distance(&p, &q).unwrap()).abs() < 1e-12);
        }
    }
}
