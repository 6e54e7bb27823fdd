//! Dense tensors in row-major order.

use std::fmt;

use crate::error::TensorError;
use crate::semiring::Semiring;

/// Axis lengths of a tensor. The empty shape is a scalar.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Shape(pub Vec<usize>);

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Self, TensorError> {
        if let Some(axis) = dims.iter().position(|&d| d == 0) {
            return Err(TensorError::ZeroLength { axis });
        }
        Ok(Shape(dims))
    }

    pub fn scalar() -> Self {
        Shape(Vec::new())
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    /// Number of entries; 1 for a scalar.
    pub fn volume(&self) -> usize {
        self.0.iter().product()
    }

    /// Row-major strides (last axis fastest).
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.0.len()];
        for k in (0..self.0.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.0[k + 1];
        }
        strides
    }

    /// Iterates all positions in row-major order.
    pub fn positions(&self) -> Positions {
        Positions {
            dims: self.0.clone(),
            next: Some(vec![0; self.0.len()]),
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("()");
        }
        let dims: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        f.write_str(&dims.join("x"))
    }
}

impl From<&[usize]> for Shape {
    fn from(dims: &[usize]) -> Self {
        Shape(dims.to_vec())
    }
}

/// Row-major odometer over the positions of a shape.
pub struct Positions {
    dims: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for Positions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut k = succ.len();
        loop {
            if k == 0 {
                // Wrapped around every axis: iteration is over.
                break;
            }
            k -= 1;
            succ[k] += 1;
            if succ[k] < self.dims[k] {
                self.next = Some(succ);
                break;
            }
            succ[k] = 0;
        }
        Some(current)
    }
}

/// A dense tensor of semiring elements.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    shape: Shape,
    data: Vec<T>,
}

impl<T: Clone> Tensor<T> {
    pub fn new(shape: Shape, data: Vec<T>) -> Result<Self, TensorError> {
        if data.len() != shape.volume() {
            return Err(TensorError::DataLength {
                expected: shape.volume(),
                found: data.len(),
            });
        }
        Ok(Tensor { shape, data })
    }

    pub fn scalar(value: T) -> Self {
        Tensor {
            shape: Shape::scalar(),
            data: vec![value],
        }
    }

    pub fn filled(shape: Shape, value: T) -> Self {
        let data = vec![value; shape.volume()];
        Tensor { shape, data }
    }

    /// Builds a tensor by evaluating `f` at every position, row-major.
    pub fn from_fn(shape: Shape, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let data = shape.positions().map(|p| f(&p)).collect();
        Tensor { shape, data }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.order()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn offset(&self, position: &[usize]) -> Option<usize> {
        if position.len() != self.shape.order() {
            return None;
        }
        let mut offset = 0;
        for (&p, &d) in position.iter().zip(self.shape.dims()) {
            if p >= d {
                return None;
            }
            offset = offset * d + p;
        }
        Some(offset)
    }

    pub fn get(&self, position: &[usize]) -> Option<&T> {
        self.offset(position).map(|o| &self.data[o])
    }

    /// True when every entry equals the first one.
    pub fn is_constant(&self) -> bool
    where
        T: PartialEq,
    {
        self.data.windows(2).all(|w| w[0] == w[1])
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Tensor<U> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(f).collect(),
        }
    }
}

/// The order-`2o` delta tensor over `dims` (`o = dims.len()`): one where the
/// first `o` coordinates equal the last `o`, zero elsewhere.
pub fn materialize_delta<S: Semiring>(sr: &S, dims: &Shape) -> Tensor<S::Elem> {
    let o = dims.order();
    let mut doubled = dims.0.clone();
    doubled.extend_from_slice(&dims.0);
    Tensor::from_fn(Shape(doubled), |p| {
        if p[..o] == p[o..] {
            sr.one()
        } else {
            sr.zero()
        }
    })
}

/// The all-ones tensor of the given shape.
pub fn materialize_ones<S: Semiring>(sr: &S, shape: &Shape) -> Tensor<S::Elem> {
    Tensor::filled(shape.clone(), sr.one())
}

/// Checks two tensors for equal shape and entrywise equality under `sr`.
/// Returns the first differing position, if any.
pub fn first_difference<S: Semiring>(
    sr: &S,
    a: &Tensor<S::Elem>,
    b: &Tensor<S::Elem>,
) -> Option<Vec<usize>> {
    assert_eq!(a.shape(), b.shape(), "compared tensors must share a shape");
    a.shape()
        .positions()
        .zip(a.data().iter().zip(b.data()))
        .find(|(_, (x, y))| !sr.approx_eq(x, y))
        .map(|(p, _)| p)
}

impl<T: fmt::Display> fmt::Display for Tensor<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "shape: {}\nvalues: [", self.shape)?;
        for (k, v) in self.data.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiring::{Arithmetic, MinPlus, Tropical};

    #[test]
    fn positions_are_row_major() {
        let all: Vec<_> = Shape(vec![2, 3]).positions().collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 0]);
        assert_eq!(all[1], vec![0, 1]);
        assert_eq!(all[3], vec![1, 0]);
        assert_eq!(
            Shape::scalar().positions().collect::<Vec<_>>(),
            vec![Vec::<usize>::new()]
        );
    }

    #[test]
    fn strides_match_offsets() {
        let shape = Shape(vec![2, 3, 4]);
        assert_eq!(shape.strides(), vec![12, 4, 1]);
        let t = Tensor::from_fn(shape, |p| p.to_vec());
        assert_eq!(t.get(&[1, 2, 3]), Some(&vec![1, 2, 3]));
        assert_eq!(t.offset(&[1, 0, 0]), Some(12));
        assert_eq!(t.get(&[2, 0, 0]), None);
    }

    #[test]
    fn zero_length_axis_rejected() {
        assert!(Shape::new(vec![2, 0]).is_err());
        assert!(Tensor::new(Shape(vec![2]), vec![1]).is_err());
    }

    #[test]
    fn delta_order_zero_is_one() {
        let d = materialize_delta(&Arithmetic, &Shape::scalar());
        assert_eq!(d, Tensor::scalar(1));
    }

    #[test]
    fn delta_order_two_is_identity() {
        let d = materialize_delta(&Arithmetic, &Shape(vec![2]));
        assert_eq!(d.data(), &[1, 0, 0, 1]);
        assert_eq!(d.shape(), &Shape(vec![2, 2]));
    }

    #[test]
    fn delta_order_four_by_enumeration() {
        let d = materialize_delta(&Arithmetic, &Shape(vec![2, 2]));
        assert_eq!(d.shape(), &Shape(vec![2, 2, 2, 2]));
        let mut ones = 0;
        for p1 in 0..2 {
            for p2 in 0..2 {
                for q1 in 0..2 {
                    for q2 in 0..2 {
                        let expected = i64::from(p1 == q1 && p2 == q2);
                        assert_eq!(d.get(&[p1, p2, q1, q2]), Some(&expected));
                        ones += expected;
                    }
                }
            }
        }
        assert_eq!(ones, 4);
    }

    #[test]
    fn ones_use_semiring_one() {
        assert_eq!(
            materialize_ones(&Arithmetic, &Shape::scalar()),
            Tensor::scalar(1)
        );
        assert_eq!(
            materialize_ones(&Arithmetic, &Shape(vec![3])).data(),
            &[1, 1, 1]
        );
        let t = materialize_ones(&MinPlus, &Shape(vec![2, 2]));
        assert!(t.data().iter().all(|&x| x == Tropical::Finite(0)));
    }
}
