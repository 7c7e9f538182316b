use std::ops::{Deref, DerefMut};

use crate::scalar::Scalar;

/// Nodal values on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T>(Vec<T>);

impl<T: Scalar> Field<T> {
    pub fn new(values: Vec<T>) -> Self {
        Field(values)
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Field(self.0.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    pub fn shifted(&self, c: T) -> Self {
        self.map(|v| v + c)
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: T, other: &Field<T>) -> Self {
        Field(self.0.iter().zip(&other.0).map(|(&a, &b)| a + s * b).collect())
    }

    pub fn dot(&self, other: &Field<T>) -> T {
        self.0.iter().zip(&other.0).map(|(&a, &b)| a * b).sum()
    }

    pub fn max_abs(&self) -> T {
        self.0.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> T {
        self.0.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max_value(&self) -> T {
        self.0.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// True when all values coincide.
    pub fn is_constant(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }
}

impl<T> Deref for Field<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> DerefMut for Field<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.0
    }
}

impl<T> From<Vec<T>> for Field<T> {
    fn from(v: Vec<T>) -> Self {
        Field(v)
    }
}
