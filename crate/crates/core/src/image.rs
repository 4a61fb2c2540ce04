use crate::error::{Error, Result};

/// MNIST frame height and width.
pub const MNIST_SIDE: usize = 28;

/// Dense row-major 2-D grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// 8-bit grayscale image.
pub type Image = Grid<u8>;

impl<T: Copy> Grid<T> {
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::InvalidArgument(format!(
                "{rows}x{cols} grid needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn map<U: Copy>(&self, mut f: impl FnMut(T) -> U) -> Grid<U> {
        Grid {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Drops a one-cell border on every side.
    pub fn interior(&self) -> Result<Self> {
        if self.rows < 3 || self.cols < 3 {
            return Err(Error::InvalidArgument(format!(
                "interior needs at least 3x3, got {}x{}",
                self.rows, self.cols
            )));
        }
        let mut data = Vec::with_capacity((self.rows - 2) * (self.cols - 2));
        for r in 1..self.rows - 1 {
            data.extend_from_slice(&self.data[r * self.cols + 1..(r + 1) * self.cols - 1]);
        }
        Ok(Self {
            rows: self.rows - 2,
            cols: self.cols - 2,
            data,
        })
    }
}

impl Image {
    pub fn from_pixels(rows: usize, cols: usize, pixels: Vec<u8>) -> Result<Self> {
        Self::from_vec(rows, cols, pixels)
    }

    pub fn blank(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0)
    }
}
