use std::collections::BTreeSet;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParamId(pub(crate) usize);

/// A trainable row-major matrix (a vector is a single-column matrix).
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
    pub grad: Vec<f64>,
    /// Row-sparse updates (embedding tables).
    sparse: bool,
    touched_rows: BTreeSet<usize>,
    touched: bool,
}

impl Param {
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub(crate) fn mark_row(&mut self, r: usize) {
        self.touched = true;
        if self.sparse {
            self.touched_rows.insert(r);
        }
    }

    pub(crate) fn mark(&mut self) {
        self.touched = true;
    }
}

/// Owns every parameter of a model, addressed by [`ParamId`] or name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamStore {
    params: Vec<Param>,
}

#[derive(Debug, Clone, Copy)]
pub enum Init {
    Zeros,
    /// Uniform on [-limit, limit].
    Uniform(f64),
    /// Glorot/Xavier uniform from the matrix shape.
    Glorot,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(
        &mut self,
        name: &str,
        rows: usize,
        cols: usize,
        sparse: bool,
        init: Init,
        rng: &mut Rng,
    ) -> ParamId {
        assert!(self.id(name).is_none(), "duplicate parameter name {name}");
        let limit = match init {
            Init::Zeros => 0.0,
            Init::Uniform(l) => l,
            Init::Glorot => (6.0 / (rows + cols) as f64).sqrt(),
        };
        let data = (0..rows * cols)
            .map(|_| {
                if limit == 0.0 {
                    0.0
                } else {
                    rng.random_range(-limit..=limit)
                }
            })
            .collect();
        self.params.push(Param {
            name: name.to_string(),
            rows,
            cols,
            data,
            grad: vec![0.0; rows * cols],
            sparse,
            touched_rows: BTreeSet::new(),
            touched: false,
        });
        ParamId(self.params.len() - 1)
    }

    pub fn add_matrix(
        &mut self,
        name: &str,
        rows: usize,
        cols: usize,
        init: Init,
        rng: &mut Rng,
    ) -> ParamId {
        self.push(name, rows, cols, false, init, rng)
    }

    /// An embedding table: one row per item, updated row-sparsely.
    pub fn add_embedding(
        &mut self,
        name: &str,
        rows: usize,
        dim: usize,
        init: Init,
        rng: &mut Rng,
    ) -> ParamId {
        self.push(name, rows, dim, true, init, rng)
    }

    pub fn get(&self, id: ParamId) -> &Param {
        &self.params[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Param {
        &mut self.params[id.0]
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.params.iter().position(|p| p.name == name).map(ParamId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &Param)> {
        self.params.iter().enumerate().map(|(i, p)| (ParamId(i), p))
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn n_values(&self) -> usize {
        self.params.iter().map(|p| p.data.len()).sum()
    }

    /// Replaces a parameter's values, keeping its shape.
    pub fn set_data(&mut self, id: ParamId, data: Vec<f64>) -> Result<()> {
        let p = &mut self.params[id.0];
        if data.len() != p.data.len() {
            return Err(Error::Shape(format!(
                "{}: expected {} values, got {}",
                p.name,
                p.data.len(),
                data.len()
            )));
        }
        p.data = data;
        Ok(())
    }

    pub fn zero_grad(&mut self) {
        for p in &mut self.params {
            if p.touched {
                p.grad.iter_mut().for_each(|g| *g = 0.0);
            }
            p.touched = false;
            p.touched_rows.clear();
        }
    }

    /// One plain SGD step, `p <- p - lr * grad`, followed by zeroing the
    /// gradients. Embedding tables only visit the rows that were looked up.
    pub fn sgd_update(&mut self, lr: f64) {
        for p in &mut self.params {
            if !p.touched {
                continue;
            }
            if p.sparse {
                let cols = p.cols;
                for &r in &p.touched_rows {
                    let range = r * cols..(r + 1) * cols;
                    for (w, g) in p.data[range.clone()].iter_mut().zip(&mut p.grad[range]) {
                        *w -= lr * *g;
                        *g = 0.0;
                    }
                }
                p.touched_rows.clear();
            } else {
                for (w, g) in p.data.iter_mut().zip(&mut p.grad) {
                    *w -= lr * *g;
                    *g = 0.0;
                }
            }
            p.touched = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedTree;

    fn store_with_scalar(value: f64) -> (ParamStore, ParamId) {
        let mut rng = SeedTree::new(0).stream("t");
        let mut store = ParamStore::new();
        let id = store.add_matrix("p", 1, 1, Init::Zeros, &mut rng);
        store.set_data(id, vec![value]).unwrap();
        (store, id)
    }

    #[test]
    fn scalar_step() {
        let (mut store, id) = store_with_scalar(1.0);
        store.get_mut(id).grad[0] = 2.0;
        store.get_mut(id).mark();
        store.sgd_update(0.1);
        assert!((store.get(id).data[0] - 0.8).abs() < 1e-15);
        assert_eq!(store.get(id).grad[0], 0.0);
    }

    #[test]
    fn zero_grad_leaves_params() {
        let (mut store, id) = store_with_scalar(1.5);
        store.get_mut(id).mark();
        store.sgd_update(0.1);
        assert_eq!(store.get(id).data[0], 1.5);
    }

    #[test]
    fn updates_compose() {
        let (mut store, id) = store_with_scalar(1.0);
        for _ in 0..2 {
            store.get_mut(id).grad[0] = 2.0;
            store.get_mut(id).mark();
            store.sgd_update(0.1);
        }
        assert!((store.get(id).data[0] - (1.0 - 2.0 * 0.1 * 2.0)).abs() < 1e-12);
    }

    #[test]
    fn sparse_rows_only() {
        let mut rng = SeedTree::new(0).stream("t");
        let mut store = ParamStore::new();
        let id = store.add_embedding("e", 3, 2, Init::Uniform(0.1), &mut rng);
        let before = store.get(id).data.clone();
        let p = store.get_mut(id);
        p.grad[2] = 1.0;
        p.grad[3] = -1.0;
        p.mark_row(1);
        store.sgd_update(0.5);
        let after = &store.get(id).data;
        assert_eq!(after[0..2], before[0..2]);
        assert!((after[2] - (before[2] - 0.5)).abs() < 1e-15);
        assert!((after[3] - (before[3] + 0.5)).abs() < 1e-15);
        assert!(store.get(id).grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn init_ranges() {
        let mut rng = SeedTree::new(3).stream("t");
        let mut store = ParamStore::new();
        let e = store.add_embedding("e", 50, 8, Init::Uniform(0.1), &mut rng);
        let w = store.add_matrix("w", 10, 30, Init::Glorot, &mut rng);
        let b = store.add_matrix("b", 10, 1, Init::Zeros, &mut rng);
        assert!(store.get(e).data.iter().all(|v| v.abs() <= 0.1));
        let limit = (6.0f64 / 40.0).sqrt();
        assert!(store.get(w).data.iter().all(|v| v.abs() <= limit));
        assert!(store.get(b).data.iter().all(|&v| v == 0.0));
        assert_eq!(store.n_values(), 400 + 300 + 10);
    }
}
