//! Loop oracles and random inputs shared by the integration tests.
//!
//! The oracles work on plain row-major `Vec<i64>` and never touch the
//! evaluator, so agreement with it is independent evidence.

#![allow(dead_code)]

use einsum_core::{Bindings, Expr, Shape, ShapeEnv, Tensor};
use rand::Rng;

pub fn random_ints<R: Rng>(rng: &mut R, dims: &[usize]) -> Tensor<i64> {
    Tensor::from_fn(Shape(dims.to_vec()), |_| rng.gen_range(-9..=9))
}

pub fn bindings(pairs: Vec<(&str, Tensor<i64>)>) -> Bindings<i64> {
    pairs.into_iter().map(|(n, t)| (n.to_string(), t)).collect()
}

pub fn shapes_of<T: Clone>(b: &Bindings<T>) -> ShapeEnv {
    b.iter()
        .map(|(n, t)| (n.clone(), t.shape().clone()))
        .collect()
}

/// `n×m` times `m×p`.
pub fn matmul(a: &[i64], n: usize, m: usize, b: &[i64], p: usize) -> Vec<i64> {
    let mut c = vec![0; n * p];
    for i in 0..n {
        for k in 0..p {
            for j in 0..m {
                c[i * p + k] += a[i * m + j] * b[j * p + k];
            }
        }
    }
    c
}

pub fn matvec(a: &[i64], n: usize, m: usize, v: &[i64]) -> Vec<i64> {
    (0..n)
        .map(|i| (0..m).map(|j| a[i * m + j] * v[j]).sum())
        .collect()
}

pub fn transpose(a: &[i64], n: usize, m: usize) -> Vec<i64> {
    let mut t = vec![0; n * m];
    for i in 0..n {
        for j in 0..m {
            t[j * n + i] = a[i * m + j];
        }
    }
    t
}

pub fn hadamard(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

pub fn inner(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn outer(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

/// Diagonal of a square `n×n` matrix.
pub fn diag(a: &[i64], n: usize) -> Vec<i64> {
    (0..n).map(|i| a[i * n + i]).collect()
}

/// Square matrix with `v` on the diagonal.
pub fn diag_matrix(v: &[i64]) -> Vec<i64> {
    let n = v.len();
    let mut d = vec![0; n * n];
    for i in 0..n {
        d[i * n + i] = v[i];
    }
    d
}

/// Min-plus matrix product with `None` as +∞.
pub fn tropical_matmul(
    a: &[Option<i64>],
    n: usize,
    m: usize,
    b: &[Option<i64>],
    p: usize,
) -> Vec<Option<i64>> {
    let mut c = vec![None; n * p];
    for i in 0..n {
        for k in 0..p {
            for j in 0..m {
                if let (Some(x), Some(y)) = (a[i * m + j], b[j * p + k]) {
                    let s = x + y;
                    c[i * p + k] = Some(c[i * p + k].map_or(s, |cur: i64| cur.min(s)));
                }
            }
        }
    }
    c
}

/// Paths of every einsum node, pre-order.
pub fn einsum_paths(expr: &Expr) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    walk(expr, &mut Vec::new(), &mut |e, p| {
        if matches!(e, Expr::Einsum(_)) {
            out.push(p.to_vec());
        }
    });
    out
}

/// Paths of every node, pre-order.
pub fn all_paths(expr: &Expr) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    walk(expr, &mut Vec::new(), &mut |_, p| out.push(p.to_vec()));
    out
}

fn walk(expr: &Expr, path: &mut Vec<usize>, f: &mut impl FnMut(&Expr, &[usize])) {
    f(expr, path);
    for (k, c) in expr.children().iter().enumerate() {
        path.push(k);
        walk(c, path, f);
        path.pop();
    }
}

/// A name not yet used in `shapes`.
pub fn fresh_name(shapes: &ShapeEnv) -> String {
    (0..)
        .map(|k| format!("X{k}"))
        .find(|n| !shapes.contains_key(n))
        .expect("unbounded")
}
