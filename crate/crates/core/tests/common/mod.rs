//! Reference computations shared by the integration tests and the acceptance
//! suite. The dense oracles are built from the network's edge lists directly
//! and never go through the sparse supra matrices or the iterative engine;
//! the degree and pruning oracles enumerate pairs by brute force.
#![allow(dead_code)]

use std::collections::BTreeSet;

use multirank::graph::{build_network, LayerSpec, MultilayerNetwork};
use multirank::ingest::{LoanRecord, Month};
use multirank::propagation::Scenario;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random connected two-layer bipartite network with at most `max_nodes`
/// distinct nodes. Common ids `c*`, product ids `p*`, geography ids `g*`.
pub fn random_two_layer(rng: &mut ChaCha8Rng, max_nodes: usize, stickiness: f64) -> MultilayerNetwork {
    loop {
        let n_prod = rng.random_range(1..=4usize);
        let n_geo = rng.random_range(1..=4usize);
        let n_common = rng.random_range(2..=(max_nodes - n_prod - n_geo).max(2));
        let mut prod = LayerSpec::new("product");
        let mut geo = LayerSpec::new("geo");
        for c in 0..n_common {
            let id = format!("c{c}");
            for _ in 0..rng.random_range(1..=2) {
                let p = format!("p{}", rng.random_range(0..n_prod));
                prod.push_edge(&id, &p, if rng.random_bool(0.2) { 2.0 } else { 1.0 });
            }
            for _ in 0..rng.random_range(0..=2) {
                let g = format!("g{}", rng.random_range(0..n_geo));
                geo.push_edge(&id, &g, 1.0);
            }
        }
        let net = build_network(vec![prod, geo], stickiness).unwrap();
        if net.node_count() <= max_nodes && net.largest_component_fraction().unwrap() == 1.0 {
            return net;
        }
    }
}

/// Dense supra adjacency straight from the edge lists.
pub fn dense_adjacency(net: &MultilayerNetwork) -> DMatrix<f64> {
    let n = net.node_count();
    let l = net.layer_count();
    let mut m = DMatrix::zeros(n * l, n * l);
    for (a, layer) in net.layers().iter().enumerate() {
        for e in &layer.edges {
            m[(a * n + e.common, a * n + e.specific)] += e.weight;
            m[(a * n + e.specific, a * n + e.common)] += e.weight;
        }
    }
    for a in 0..l {
        for b in 0..l {
            if a != b {
                for (i, node) in net.nodes().iter().enumerate() {
                    if node.is_common() {
                        m[(a * n + i, b * n + i)] = net.stickiness();
                    }
                }
            }
        }
    }
    m
}

/// Column-normalized, zero columns replaced by the uniform column.
pub fn dense_transition(net: &MultilayerNetwork) -> DMatrix<f64> {
    let mut m = dense_adjacency(net);
    let dim = m.nrows();
    for c in 0..dim {
        let s: f64 = m.column(c).sum();
        if s == 0.0 {
            m.column_mut(c).fill(1.0 / dim as f64);
        } else {
            m.column_mut(c).scale_mut(1.0 / s);
        }
    }
    m
}

pub fn dense_influence(net: &MultilayerNetwork, sources: &[usize], scenario: Scenario) -> DMatrix<f64> {
    let n = net.node_count();
    let l = net.layer_count();
    let mut u = DMatrix::zeros(n * l, n * l);
    for &i in sources {
        for a in 0..l {
            for b in 0..l {
                let on = match scenario {
                    Scenario::Intra => a == b,
                    Scenario::Inter => a != b,
                    Scenario::Combined => true,
                };
                if on {
                    u[(a * n + i, b * n + i)] = 1.0;
                }
            }
        }
    }
    u
}

/// Restart vector from the row sums of `u`.
pub fn dense_restart(u: &DMatrix<f64>) -> DVector<f64> {
    let rows: DVector<f64> = DVector::from_iterator(u.nrows(), u.row_iter().map(|r| r.sum()));
    let total = rows.sum();
    rows / total
}

/// Solves `(I - r T) x = (1 - r) v` by LU.
pub fn dense_linear_solve(t: &DMatrix<f64>, r: f64, v: &DVector<f64>) -> DVector<f64> {
    let dim = t.nrows();
    let a = DMatrix::identity(dim, dim) - t * r;
    a.lu().solve(&(v * (1.0 - r))).expect("singular system")
}

/// `R = r T + (1 - r) û` (non-empty columns of `u` scaled to sum 1),
/// iterated as `x <- (R + I) x / |.|_1` from the uniform vector.
pub fn dense_power_eigen(t: &DMatrix<f64>, u: &DMatrix<f64>, r: f64, steps: usize) -> DVector<f64> {
    let dim = t.nrows();
    let mut uhat = u.clone();
    for c in 0..dim {
        let s = uhat.column(c).sum();
        if s > 0.0 {
            uhat.column_mut(c).scale_mut(1.0 / s);
        }
    }
    let rr = t * r + uhat * (1.0 - r) + DMatrix::identity(dim, dim);
    let mut x = DVector::from_element(dim, 1.0 / dim as f64);
    for _ in 0..steps {
        x = &rr * &x;
        let s = x.sum();
        x /= s;
    }
    x
}

/// Stationary distribution of a column-stochastic matrix: solve
/// `(T - I) x = 0` with one equation replaced by `Σx = 1`.
pub fn dense_stationary(t: &DMatrix<f64>) -> DVector<f64> {
    let dim = t.nrows();
    let mut a = t - DMatrix::identity(dim, dim);
    a.row_mut(dim - 1).fill(1.0);
    let mut b = DVector::zeros(dim);
    b[dim - 1] = 1.0;
    a.lu().solve(&b).expect("singular system")
}

pub fn aggregate(per_state: &[f64], nodes: usize) -> Vec<f64> {
    let mut out = vec![0.0; nodes];
    for (k, v) in per_state.iter().enumerate() {
        out[k % nodes] += v;
    }
    out
}

pub fn linf(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            ranks[idx[k]] = avg;
        }
        i = j + 1;
    }
    ranks
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    pearson(&average_ranks(a), &average_ranks(b))
}

/// Random loan book over `months` months from `start`: `loans` loans spread
/// over roughly `loans / 3` borrowers, 1–2 of 4 products, 3 districts with 2
/// areas each, about a fifth defaulting. Every month in the last two holds
/// at least one loan.
pub fn random_loans(rng: &mut ChaCha8Rng, loans: usize, start: Month, months: i32) -> Vec<LoanRecord> {
    let borrowers = (loans / 3).max(2);
    let mut out = Vec::with_capacity(loans);
    for k in 0..loans {
        let b = rng.random_range(0..borrowers);
        let origination = if k < 2 {
            start + (months - 1 - k as i32)
        } else {
            start + rng.random_range(0..months)
        };
        let mut products = vec![format!("p{}", rng.random_range(0..4))];
        if rng.random_bool(0.3) {
            let p = format!("p{}", rng.random_range(0..4));
            if !products.contains(&p) {
                products.push(p);
            }
        }
        let d = rng.random_range(0..3);
        let a = rng.random_range(0..2);
        let default_month = rng.random_bool(0.2).then(|| origination + rng.random_range(0..30));
        out.push(LoanRecord {
            loan_id: format!("L{k}"),
            borrower_id: format!("B{b}"),
            origination,
            products,
            district: format!("D{d}"),
            area: format!("A{d}{a}"),
            defaulted: default_month.is_some(),
            default_month,
        });
    }
    out
}

/// Counts by direct enumeration of borrower pairs, sharing no code with the
/// library: `[entity][horizon 1y/5y][all/df]`.
pub fn brute_force(records: &[LoanRecord], start: Month, len: i32, tail: i32, focal: &str) -> [u32; 20] {
    let end = start + len;
    let window: Vec<&LoanRecord> = records
        .iter()
        .filter(|r| r.origination >= start && r.origination < end)
        .collect();
    let defaulted = |b: &str| {
        window.iter().any(|r| {
            r.borrower_id == b && r.default_month.is_some_and(|d| d >= start && d < end - tail)
        })
    };
    let mine: Vec<&&LoanRecord> = window.iter().filter(|r| r.borrower_id == focal).collect();
    let others: BTreeSet<&str> = window
        .iter()
        .map(|r| r.borrower_id.as_str())
        .filter(|b| *b != focal)
        .collect();
    let mut out = [0u32; 20];
    for (h, years) in [1, 5].into_iter().enumerate() {
        let from = if end - 12 * years < start { start } else { end - 12 * years };
        for other in &others {
            let (mut p, mut d, mut a) = (false, false, false);
            for r in window.iter().filter(|r| r.borrower_id == *other && r.origination >= from) {
                for m in &mine {
                    p |= r.products.iter().any(|x| m.products.contains(x));
                    d |= r.district == m.district;
                    a |= r.area == m.area;
                }
            }
            let df = defaulted(other);
            for (e, hit) in [p, d, a, p && d, p && a].into_iter().enumerate() {
                if hit {
                    out[e * 4 + h * 2] += 1;
                    if df {
                        out[e * 4 + h * 2 + 1] += 1;
                    }
                }
            }
        }
    }
    out
}

/// Repeatedly removes the weaker column of the most correlated surviving
/// pair until no pair exceeds the cutoff.
pub fn prune_oracle(table: &[(String, Vec<f64>)], target: &str, cutoff: f64) -> Vec<String> {
    let y = &table.iter().find(|c| c.0 == target).unwrap().1;
    let corr = |a: &[f64], b: &[f64]| pearson(a, b);
    let mut alive: Vec<&(String, Vec<f64>)> = table
        .iter()
        .filter(|c| c.0 != target && c.1.iter().any(|v| *v != c.1[0]))
        .collect();
    loop {
        let mut best: Option<(f64, (&str, &str), usize, usize)> = None;
        for i in 0..alive.len() {
            for j in 0..alive.len() {
                if i == j {
                    continue;
                }
                let (a, b) = (alive[i], alive[j]);
                if a.0 > b.0 {
                    continue;
                }
                let c = corr(&a.1, &b.1).abs();
                if c <= cutoff {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bc, names, _, _)) => c > bc || (c == bc && (a.0.as_str(), b.0.as_str()) < names),
                };
                if better {
                    best = Some((c, (a.0.as_str(), b.0.as_str()), i, j));
                }
            }
        }
        let Some((_, _, i, j)) = best else { break };
        let (ti, tj) = (corr(&alive[i].1, y).abs(), corr(&alive[j].1, y).abs());
        // alive[i] has the smaller name, so a tie drops alive[j]
        let drop = if ti < tj { i } else { j };
        alive.remove(drop);
    }
    let keep: BTreeSet<&str> = alive.iter().map(|c| c.0.as_str()).collect();
    table
        .iter()
        .filter(|c| c.0 == target || keep.contains(c.0.as_str()))
        .map(|c| c.0.clone())
        .collect()
}

pub fn structured_table(rng: &mut ChaCha8Rng, rows: usize) -> Vec<(String, Vec<f64>)> {
    let y: Vec<f64> = (0..rows).map(|_| rng.random_bool(0.3) as u8 as f64).collect();
    let mut cols = vec![("target".to_string(), y.clone())];
    // a few latent factors, each observed through several noisy columns
    let mut k = 0;
    for f in 0..rng.random_range(1..4) {
        let signal = rng.random_range(0.0..2.0);
        let latent: Vec<f64> = y.iter().map(|t| t * signal + rng.random_range(-1.0..1.0)).collect();
        for _ in 0..rng.random_range(1..5) {
            let noise = rng.random_range(0.0..1.0);
            let v = latent.iter().map(|l| l + noise * rng.random_range(-1.0..1.0)).collect();
            cols.push((format!("f{f}_{k}"), v));
            k += 1;
        }
    }
    if rng.random_bool(0.3) {
        cols.push(("const".to_string(), vec![1.0; rows]));
    }
    cols
}
