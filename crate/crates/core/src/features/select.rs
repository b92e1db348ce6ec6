use std::cmp::Ordering;

use crate::error::{Error, Result};

pub const DEFAULT_PRUNE_CUTOFF: f64 = 0.70;

#[derive(Debug, Clone, PartialEq)]
pub enum PruneEvent {
    /// Zero variance; correlation undefined.
    Constant { column: String },
    Correlated {
        dropped: String,
        kept: String,
        correlation: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PruneOutcome {
    /// Surviving columns in input order, target included.
    pub retained: Vec<String>,
    pub log: Vec<PruneEvent>,
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    sab / (saa * sbb).sqrt()
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|x| *x == v[0])
}

/// Greedy correlation filter. Pairs of feature columns with |Pearson| above
/// `cutoff` are visited from the most to the least correlated (ties by
/// column names); when both are still present, the one less correlated with
/// `target` in absolute value is dropped, the later name on a tie. Constant
/// columns are dropped up front. The target column is never dropped.
pub fn correlation_prune(table: &[(String, Vec<f64>)], target: &str, cutoff: f64) -> Result<PruneOutcome> {
    let y = &table
        .iter()
        .find(|(name, _)| name == target)
        .ok_or_else(|| Error::InvalidConfig(format!("target column `{target}` not in table")))?
        .1;
    if y.is_empty() || is_constant(y) {
        return Err(Error::DegenerateLabels);
    }
    if let Some((name, _)) = table.iter().find(|(_, v)| v.len() != y.len()) {
        return Err(Error::InvalidConfig(format!("column `{name}` has a different length")));
    }

    let mut log = Vec::new();
    let mut alive: Vec<(usize, f64)> = Vec::new();
    for (k, (name, col)) in table.iter().enumerate() {
        if name == target {
            continue;
        }
        if is_constant(col) {
            log.push(PruneEvent::Constant { column: name.clone() });
        } else {
            alive.push((k, pearson(col, y).abs()));
        }
    }

    let mut pairs = Vec::new();
    for (i, &(a, _)) in alive.iter().enumerate() {
        for &(b, _) in &alive[i + 1..] {
            let c = pearson(&table[a].1, &table[b].1);
            if c.abs() > cutoff {
                pairs.push((c, a, b));
            }
        }
    }
    let name = |k: usize| table[k].0.as_str();
    let key = |a: usize, b: usize| if name(a) <= name(b) { (name(a), name(b)) } else { (name(b), name(a)) };
    pairs.sort_by(|x, y| {
        y.0.abs()
            .partial_cmp(&x.0.abs())
            .unwrap_or(Ordering::Equal)
            .then_with(|| key(x.1, x.2).cmp(&key(y.1, y.2)))
    });

    let target_corr: std::collections::HashMap<usize, f64> = alive.iter().copied().collect();
    let mut dropped = vec![false; table.len()];
    for (c, a, b) in pairs {
        if dropped[a] || dropped[b] {
            continue;
        }
        let (ta, tb) = (target_corr[&a], target_corr[&b]);
        let drop_a = match ta.partial_cmp(&tb) {
            Some(Ordering::Less) => true,
            Some(Ordering::Greater) => false,
            _ => name(a) > name(b),
        };
        let (d, k) = if drop_a { (a, b) } else { (b, a) };
        dropped[d] = true;
        log.push(PruneEvent::Correlated {
            dropped: name(d).to_string(),
            kept: name(k).to_string(),
            correlation: c,
        });
    }

    let retained = table
        .iter()
        .enumerate()
        .filter(|(k, (n, _))| n == target || (target_corr.contains_key(k) && !dropped[*k]))
        .map(|(_, (n, _))| n.clone())
        .collect();
    Ok(PruneOutcome { retained, log })
}

/// Area under the ROC curve in the Mann–Whitney form: the probability that a
/// random positive scores above a random negative, ties counting one half.
pub fn univariate_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: scores.len(),
        });
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::DegenerateLabels);
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += avg * idx[i..=j].iter().filter(|&&k| labels[k]).count() as f64;
        i = j + 1;
    }
    let (p, n) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auc_examples() {
        let auc = univariate_auc(&[0.1, 0.4, 0.35, 0.8], &[false, false, true, true]).unwrap();
        assert!((auc - 0.75).abs() < 1e-15);
        assert_eq!(univariate_auc(&[1.0, 2.0, 3.0], &[false, true, true]).unwrap(), 1.0);
        assert_eq!(univariate_auc(&[5.0; 4], &[false, true, false, true]).unwrap(), 0.5);
        assert!(matches!(univariate_auc(&[1.0, 2.0], &[true, true]), Err(Error::DegenerateLabels)));
    }

    fn col(name: &str, v: &[f64]) -> (String, Vec<f64>) {
        (name.to_string(), v.to_vec())
    }

    #[test]
    fn keeps_the_one_closer_to_target() {
        let y = [0.0, 0.0, 1.0, 1.0, 0.0, 1.0];
        let x = [1.0, 2.0, 3.0, 1.5, 0.5, 2.5];
        let table = vec![
            col("target", &y),
            col("Y", &x),
            col("X", &[1.0, 2.0, 3.0, 1.5, 0.5, 2.5]),
            col("flat", &[1.0; 6]),
        ];
        let out = correlation_prune(&table, "target", DEFAULT_PRUNE_CUTOFF).unwrap();
        // X and Y tie on everything; the later name goes
        assert_eq!(out.retained, ["target", "X"]);
        assert_eq!(out.log[0], PruneEvent::Constant { column: "flat".into() });
    }

    #[test]
    fn drops_the_weaker_predictor() {
        let y = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        let noisy: Vec<f64> = x.iter().zip([0.6, -0.6, 0.6, -0.6, 0.6, -0.6, 0.6, -0.6]).map(|(a, b)| a + b).collect();
        assert!(pearson(&x, &noisy) > 0.9);
        assert!(pearson(&x, &y).abs() > pearson(&noisy, &y).abs());
        let table = vec![col("Y", &noisy), col("X", &x), col("target", &y)];
        let out = correlation_prune(&table, "target", DEFAULT_PRUNE_CUTOFF).unwrap();
        assert_eq!(out.retained, ["X", "target"]);
    }

    #[test]
    fn uncorrelated_is_identity() {
        let table = vec![
            col("t", &[0.0, 1.0, 0.0, 1.0]),
            col("a", &[1.0, 0.0, 0.0, 1.0]),
            col("b", &[0.0, 0.0, 1.0, 1.0]),
        ];
        let out = correlation_prune(&table, "t", 0.7).unwrap();
        assert_eq!(out.retained, ["t", "a", "b"]);
        assert!(out.log.is_empty());
    }
}
