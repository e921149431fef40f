use crate::error::{Error, Result};
use crate::real::Real;

/// Dense row-major tensor of probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    sizes: Vec<usize>,
    data: Vec<T>,
}

impl<T: Real> Tensor<T> {
    pub fn zeros(sizes: &[usize]) -> Self {
        let len = sizes.iter().product();
        Tensor {
            sizes: sizes.to_vec(),
            data: vec![T::zero(); len],
        }
    }

    pub fn from_vec(sizes: &[usize], data: Vec<T>) -> Result<Self> {
        let len: usize = sizes.iter().product();
        if data.len() != len {
            return Err(Error::DimensionMismatch(format!(
                "tensor of shape {:?} needs {} cells, got {}",
                sizes,
                len,
                data.len()
            )));
        }
        Ok(Tensor {
            sizes: sizes.to_vec(),
            data,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn rank(&self) -> usize {
        self.sizes.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// Flat offset of a multi-index.
    pub fn flat(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.sizes.len());
        let mut off = 0;
        for (i, &d) in idx.iter().enumerate() {
            debug_assert!(d < self.sizes[i]);
            off = off * self.sizes[i] + d;
        }
        off
    }

    /// Decomposes a flat offset into `out` (most significant axis first).
    pub fn unflatten(&self, mut flat: usize, out: &mut [usize]) {
        for i in (0..self.sizes.len()).rev() {
            out[i] = flat % self.sizes[i];
            flat /= self.sizes[i];
        }
    }

    pub fn get(&self, idx: &[usize]) -> T {
        self.data[self.flat(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: T) {
        let off = self.flat(idx);
        self.data[off] = v;
    }

    pub fn sum(&self) -> T {
        self.data.iter().copied().fold(T::zero(), |a, b| a + b)
    }

    pub fn scale(&mut self, s: T) {
        for v in &mut self.data {
            *v = *v * s;
        }
    }

    /// Sums out every axis not listed in `keep`; the result's axes follow the
    /// order given in `keep`.
    pub fn marginalize(&self, keep: &[usize]) -> Tensor<T> {
        let out_sizes: Vec<usize> = keep.iter().map(|&a| self.sizes[a]).collect();
        let mut out = Tensor::zeros(&out_sizes);
        // Weight of each input axis in the output offset (0 when summed out).
        let mut weight = vec![0usize; self.sizes.len()];
        {
            let mut w = 1usize;
            for &a in keep.iter().rev() {
                weight[a] = w;
                w *= self.sizes[a];
            }
        }
        let mut idx = vec![0usize; self.sizes.len()];
        for (flat, &v) in self.data.iter().enumerate() {
            let _ = flat;
            let mut off = 0;
            for (a, &d) in idx.iter().enumerate() {
                off += weight[a] * d;
            }
            out.data[off] += v;
            // odometer increment
            for a in (0..idx.len()).rev() {
                idx[a] += 1;
                if idx[a] < self.sizes[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        out
    }
}

/// Iterates every multi-index of `sizes` in row-major order.
pub fn for_each_index(sizes: &[usize], mut f: impl FnMut(&[usize])) {
    if sizes.iter().any(|&s| s == 0) {
        return;
    }
    let mut idx = vec![0usize; sizes.len()];
    loop {
        f(&idx);
        let mut a = sizes.len();
        loop {
            if a == 0 {
                return;
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < sizes[a] {
                break;
            }
            idx[a] = 0;
        }
    }
}
