#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use tucker_als::{DenseTensor, Matrix, Shape};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_tensor(rng: &mut ChaCha8Rng, dims: &[usize]) -> DenseTensor {
    DenseTensor::from_fn(Shape::new(dims.to_vec()).unwrap(), |_| {
        rng.sample(StandardNormal)
    })
}

/// Visit every multi-index in storage order (first index fastest).
pub fn for_each_index(dims: &[usize], mut f: impl FnMut(&[usize])) {
    let mut ix = vec![0; dims.len()];
    let total: usize = dims.iter().product();
    for _ in 0..total {
        f(&ix);
        for (k, d) in dims.iter().enumerate() {
            ix[k] += 1;
            if ix[k] < *d {
                break;
            }
            ix[k] = 0;
        }
    }
}

/// Unfolding straight from the column index formula
/// `j = Σ_{k≠n} i_k·J_k`, `J_k = ∏_{m<k, m≠n} I_m` (0-based).
pub fn naive_matricize(t: &DenseTensor, mode: usize) -> Matrix {
    let dims = t.dims().to_vec();
    let n = mode - 1;
    let cols: usize = dims
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != n)
        .map(|(_, d)| d)
        .product();
    let mut m = Matrix::zeros(dims[n], cols);
    for_each_index(&dims, |ix| {
        let mut j = 0;
        let mut stride = 1;
        for k in 0..dims.len() {
            if k != n {
                j += ix[k] * stride;
                stride *= dims[k];
            }
        }
        m.set(ix[n], j, t.get(ix));
    });
    m
}

/// Mode-n product by the elementwise sum over `i_n`.
pub fn naive_mode_product(t: &DenseTensor, u: &Matrix, mode: usize) -> DenseTensor {
    let n = mode - 1;
    let mut dims = t.dims().to_vec();
    dims[n] = u.rows();
    DenseTensor::from_fn(Shape::new(dims).unwrap(), |ix| {
        let mut src = ix.to_vec();
        (0..t.dims()[n])
            .map(|i| {
                src[n] = i;
                t.get(&src) * u.get(ix[n], i)
            })
            .sum()
    })
}

pub fn naive_matmul(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.cols(), b.rows());
    Matrix::from_fn(a.rows(), b.cols(), |i, j| {
        (0..a.cols()).map(|k| a.get(i, k) * b.get(k, j)).sum()
    })
}

pub fn naive_transpose(a: &Matrix) -> Matrix {
    Matrix::from_fn(a.cols(), a.rows(), |i, j| a.get(j, i))
}

pub fn fro(a: &Matrix) -> f64 {
    a.data().iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn rel_diff(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!((a.rows(), a.cols()), (b.rows(), b.cols()));
    let d: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let n = fro(a).max(fro(b));
    if n == 0.0 {
        d
    } else {
        d / n
    }
}

pub fn tensor_rel_diff(a: &DenseTensor, b: &DenseTensor) -> f64 {
    assert_eq!(a.dims(), b.dims());
    let d: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let n = a.data().iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 {
        d
    } else {
        d / n
    }
}

/// Orthonormal basis by modified Gram-Schmidt (twice), independent of the
/// library's QR.
pub fn gram_schmidt(a: &Matrix) -> Matrix {
    let mut q = a.clone();
    for j in 0..q.cols() {
        for _ in 0..2 {
            for k in 0..j {
                let d: f64 = (0..q.rows()).map(|i| q.get(i, k) * q.get(i, j)).sum();
                for i in 0..q.rows() {
                    let v = q.get(i, j) - d * q.get(i, k);
                    q.set(i, j, v);
                }
            }
        }
        let n: f64 = (0..q.rows())
            .map(|i| q.get(i, j).powi(2))
            .sum::<f64>()
            .sqrt();
        for i in 0..q.rows() {
            let v = q.get(i, j) / n;
            q.set(i, j, v);
        }
    }
    q
}

pub fn random_orthonormal(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    gram_schmidt(&gaussian_matrix(rng, rows, cols))
}

/// `‖(I − P_basis) q‖_F` for orthonormal `basis`: the Frobenius norm of the
/// sines of the principal angles between the spans.
pub fn subspace_sine(basis: &Matrix, q: &Matrix) -> f64 {
    let proj = naive_matmul(basis, &naive_matmul(&naive_transpose(basis), q));
    let diff = Matrix::from_fn(q.rows(), q.cols(), |i, j| q.get(i, j) - proj.get(i, j));
    fro(&diff)
}

/// `U·diag(s)·Vᵀ`.
pub fn with_spectrum(u: &Matrix, s: &[f64], v: &Matrix) -> Matrix {
    let us = Matrix::from_fn(u.rows(), s.len(), |i, j| u.get(i, j) * s[j]);
    naive_matmul(&us, &naive_transpose(v))
}

pub fn matrix_tensor(m: &Matrix) -> DenseTensor {
    DenseTensor::new(
        Shape::new(vec![m.rows(), m.cols()]).unwrap(),
        m.data().to_vec(),
    )
    .unwrap()
}

/// Solve `a·x = b` for square `a` by Gaussian elimination with partial
/// pivoting.
pub fn solve_square(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.rows();
    let mut a = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a.get(i, k).abs().total_cmp(&a.get(j, k).abs()))
            .unwrap();
        for j in 0..n {
            let (u, v) = (a.get(k, j), a.get(p, j));
            a.set(k, j, v);
            a.set(p, j, u);
        }
        for j in 0..x.cols() {
            let (u, v) = (x.get(k, j), x.get(p, j));
            x.set(k, j, v);
            x.set(p, j, u);
        }
        for i in (k + 1)..n {
            let f = a.get(i, k) / a.get(k, k);
            for j in k..n {
                let v = a.get(i, j) - f * a.get(k, j);
                a.set(i, j, v);
            }
            for j in 0..x.cols() {
                let v = x.get(i, j) - f * x.get(k, j);
                x.set(i, j, v);
            }
        }
    }
    for j in 0..x.cols() {
        for i in (0..n).rev() {
            let mut s = x.get(i, j);
            for k in (i + 1)..n {
                s -= a.get(i, k) * x.get(k, j);
            }
            x.set(i, j, s / a.get(i, i));
        }
    }
    x
}

/// `‖U₂ᵀQ (U₁ᵀQ)⁻¹‖_F`: Frobenius norm of the tangents of the principal
/// angles between `span(u1)` and `span(q)`, with `u2` the orthogonal
/// complement of `u1`.
pub fn subspace_tangent(u1: &Matrix, u2: &Matrix, q: &Matrix) -> f64 {
    let c = naive_matmul(&naive_transpose(u1), q);
    let s = naive_matmul(&naive_transpose(u2), q);
    // T = S·C⁻¹  ⇔  Cᵀ·Tᵀ = Sᵀ
    let tt = solve_square(&naive_transpose(&c), &naive_transpose(&s));
    fro(&tt)
}
