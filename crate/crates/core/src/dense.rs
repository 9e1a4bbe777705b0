//! Small dense row-major containers for 2-, 3-, and 4-dimensional data.
//!
//! The tensors in this crate are tiny (tens of VUEs, a handful of
//! resource blocks), so a flat `Vec` with stride arithmetic is all we need.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Matrix<T> {
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Self { rows, cols, data: vec![value; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }
}

impl<T> Matrix<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor3<T> {
    dims: [usize; 3],
    data: Vec<T>,
}

impl<T: Clone> Tensor3<T> {
    pub fn filled(d0: usize, d1: usize, d2: usize, value: T) -> Self {
        Self { dims: [d0, d1, d2], data: vec![value; d0 * d1 * d2] }
    }
}

impl<T> Tensor3<T> {
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }
}

impl<T> std::ops::Index<(usize, usize, usize)> for Tensor3<T> {
    type Output = T;
    fn index(&self, (a, b, c): (usize, usize, usize)) -> &T {
        debug_assert!(a < self.dims[0] && b < self.dims[1] && c < self.dims[2]);
        &self.data[(a * self.dims[1] + b) * self.dims[2] + c]
    }
}

impl<T> std::ops::IndexMut<(usize, usize, usize)> for Tensor3<T> {
    fn index_mut(&mut self, (a, b, c): (usize, usize, usize)) -> &mut T {
        debug_assert!(a < self.dims[0] && b < self.dims[1] && c < self.dims[2]);
        &mut self.data[(a * self.dims[1] + b) * self.dims[2] + c]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor4<T> {
    dims: [usize; 4],
    data: Vec<T>,
}

impl<T: Clone> Tensor4<T> {
    pub fn filled(d0: usize, d1: usize, d2: usize, d3: usize, value: T) -> Self {
        Self { dims: [d0, d1, d2, d3], data: vec![value; d0 * d1 * d2 * d3] }
    }
}

impl<T> Tensor4<T> {
    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }
}

impl<T> std::ops::Index<(usize, usize, usize, usize)> for Tensor4<T> {
    type Output = T;
    fn index(&self, (a, b, c, d): (usize, usize, usize, usize)) -> &T {
        debug_assert!(
            a < self.dims[0] && b < self.dims[1] && c < self.dims[2] && d < self.dims[3]
        );
        &self.data[((a * self.dims[1] + b) * self.dims[2] + c) * self.dims[3] + d]
    }
}

impl<T> std::ops::IndexMut<(usize, usize, usize, usize)> for Tensor4<T> {
    fn index_mut(&mut self, (a, b, c, d): (usize, usize, usize, usize)) -> &mut T {
        debug_assert!(
            a < self.dims[0] && b < self.dims[1] && c < self.dims[2] && d < self.dims[3]
        );
        &mut self.data[((a * self.dims[1] + b) * self.dims[2] + c) * self.dims[3] + d]
    }
}
