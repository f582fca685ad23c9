//! Dense row-major 2-D grid, the storage behind rasters, fields and masks.
//!
//! Coordinates follow the raster convention used across the crate:
//! `x` is the column index, `y` is the row index, the origin is the top-left
//! corner and `y` grows downward. `(width, height)` are `(columns, rows)`.

/// Dense row-major grid of `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    /// Creates a grid filled with `fill`.
    ///
    /// # Panics
    /// Panics if `width * height` overflows.
    pub fn filled(width: usize, height: usize, fill: T) -> Self {
        let len = width.checked_mul(height).expect("grid dimensions overflow");
        Grid { width, height, data: vec![fill; len] }
    }

    /// Builds a grid from row-major data.
    ///
    /// # Panics
    /// Panics if `data.len() != width * height`.
    pub fn from_raw(width: usize, height: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), width * height, "row-major data length mismatch");
        Grid { width, height, data }
    }
}

impl<T> Grid<T> {
    /// Number of columns.
    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of rows.
    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Total number of cells.
    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    /// Whether the grid has zero cells.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Whether integer coordinates fall inside the grid.
    #[inline]
    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    /// Value at `(x, y)` (column, row).
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> &T {
        debug_assert!(x < self.width && y < self.height);
        &self.data[y * self.width + x]
    }

    /// Mutable value at `(x, y)`.
    #[inline]
    pub fn get_mut(&mut self, x: usize, y: usize) -> &mut T {
        debug_assert!(x < self.width && y < self.height);
        &mut self.data[y * self.width + x]
    }

    /// Row-major view of the cells.
    #[inline]
    pub fn raw(&self) -> &[T] {
        &self.data
    }

    /// Mutable row-major view of the cells.
    #[inline]
    pub fn raw_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// Iterates `(x, y, &value)` in row-major order.
    pub fn iter_cells(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        self.data
            .iter()
            .enumerate()
            .map(move |(i, v)| (i % self.width, i / self.width, v))
    }
}

impl<T: Copy> Grid<T> {
    /// Value at `(x, y)` if inside the grid, else `fallback`.
    #[inline]
    pub fn get_or(&self, x: i64, y: i64, fallback: T) -> T {
        if self.contains(x, y) {
            self.data[y as usize * self.width + x as usize]
        } else {
            fallback
        }
    }
}
