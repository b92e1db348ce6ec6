//! Sparse supra matrices: the (N·L) × (N·L) flattening of the rank-4
//! multilayer adjacency and transition tensors.

use super::network::MultilayerNetwork;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixForm {
    Adjacency,
    Transition,
    Influence,
    General,
}

/// Row-compressed sparse matrix over supra states.
///
/// In transition form, columns that had no outgoing weight are recorded in
/// `dangling` and read as the uniform column `1 / dim` without being stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SupraMatrix {
    nodes: usize,
    layers: usize,
    form: MatrixForm,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    dangling: Vec<usize>,
}

impl SupraMatrix {
    /// Builds a matrix from `(row, col, value)` triplets. Repeated positions
    /// are summed; explicit zeros are dropped.
    pub fn from_triplets(
        nodes: usize,
        layers: usize,
        form: MatrixForm,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Self {
        let dim = nodes * layers;
        let mut t: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        t.sort_by_key(|e| (e.0, e.1));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(t.len());
        let mut vals: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            assert!(r < dim && c < dim, "entry ({r}, {c}) outside {dim}x{dim}");
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                row_ptr[r + 1] += 1;
                cols.push(c);
                vals.push(v);
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        let mut m = SupraMatrix {
            nodes,
            layers,
            form,
            row_ptr,
            cols,
            vals,
            dangling: Vec::new(),
        };
        m.drop_zeros();
        m
    }

    fn drop_zeros(&mut self) {
        if self.vals.iter().all(|&v| v != 0.0) {
            return;
        }
        let dim = self.dim();
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(self.cols.len());
        let mut vals = Vec::with_capacity(self.vals.len());
        for r in 0..dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.vals[k] != 0.0 {
                    cols.push(self.cols[k]);
                    vals.push(self.vals[k]);
                }
            }
            row_ptr[r + 1] = cols.len();
        }
        self.row_ptr = row_ptr;
        self.cols = cols;
        self.vals = vals;
    }

    pub fn dim(&self) -> usize {
        self.nodes * self.layers
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn form(&self) -> MatrixForm {
        self.form
    }

    /// Number of stored entries (dangling columns not included).
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn dangling_columns(&self) -> &[usize] {
        &self.dangling
    }

    /// Value used for every entry of a dangling column.
    pub fn dangling_value(&self) -> f64 {
        1.0 / self.dim() as f64
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    /// Stored entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim()).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        if self.dangling.binary_search(&c).is_ok() {
            return self.dangling_value();
        }
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.dim()];
        for (c, v) in self.cols.iter().zip(&self.vals) {
            sums[*c] += v;
        }
        for &c in &self.dangling {
            sums[c] = self.dim() as f64 * self.dangling_value();
        }
        sums
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let dv = if self.dangling.is_empty() {
            0.0
        } else {
            self.dangling.len() as f64 * self.dangling_value()
        };
        (0..self.dim())
            .map(|r| self.row(r).map(|(_, v)| v).sum::<f64>() + dv)
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.column_sums().iter().sum()
    }

    /// Exact symmetry of stored entries.
    pub fn is_symmetric(&self) -> bool {
        self.dangling.is_empty() && self.entries().all(|(r, c, v)| self.get(c, r) == v)
    }

    /// `y = M x`. Rows are reduced sequentially in column order, so the result
    /// is bitwise reproducible.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        let dim = self.dim();
        assert_eq!(x.len(), dim);
        assert_eq!(y.len(), dim);
        let teleport = if self.dangling.is_empty() {
            0.0
        } else {
            self.dangling.iter().map(|&c| x[c]).sum::<f64>() * self.dangling_value()
        };
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc + teleport;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// Dense row-major copy, dangling columns included. Intended for small
    /// matrices (checks and diagnostics).
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let dim = self.dim();
        let mut d = vec![vec![0.0; dim]; dim];
        for (r, c, v) in self.entries() {
            d[r][c] = v;
        }
        for &c in &self.dangling {
            for row in d.iter_mut() {
                row[c] = self.dangling_value();
            }
        }
        d
    }

    /// Column-normalizes the matrix. Columns with zero sum become dangling and
    /// read as uniform `1 / dim`.
    pub fn column_normalized(&self) -> SupraMatrix {
        let sums = self.column_sums();
        let vals = self
            .cols
            .iter()
            .zip(&self.vals)
            .map(|(&c, &v)| v / sums[c])
            .collect();
        let dangling = sums
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 0.0)
            .map(|(c, _)| c)
            .collect();
        SupraMatrix {
            nodes: self.nodes,
            layers: self.layers,
            form: MatrixForm::Transition,
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            vals,
            dangling,
        }
    }
}

/// Supra adjacency matrix: intra-layer bipartite blocks on the diagonal and
/// `S` on the diagonal entries of common nodes in every off-diagonal block.
pub fn supra_adjacency(net: &MultilayerNetwork) -> SupraMatrix {
    let n = net.node_count();
    let l = net.layer_count();
    let s = net.stickiness();
    let mut triplets = Vec::with_capacity(2 * net.edge_count() + net.common_count() * l * l);
    for (a, layer) in net.layers().iter().enumerate() {
        for e in &layer.edges {
            let i = a * n + e.common;
            let j = a * n + e.specific;
            triplets.push((i, j, e.weight));
            triplets.push((j, i, e.weight));
        }
    }
    if s > 0.0 {
        for a in 0..l {
            for b in 0..l {
                if a != b {
                    for c in 0..net.common_count() {
                        triplets.push((a * n + c, b * n + c, s));
                    }
                }
            }
        }
    }
    SupraMatrix::from_triplets(n, l, MatrixForm::Adjacency, triplets)
}

/// Supra transition matrix: the column-normalized supra adjacency matrix.
pub fn supra_transition(adj: &SupraMatrix) -> SupraMatrix {
    adj.column_normalized()
}
