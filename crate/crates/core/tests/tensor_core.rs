mod common;

use common::*;
use proptest::prelude::*;
use tucker_als::{relative_error, DenseTensor, Error, Matrix, Shape, Truncation, TuckerTensor};

fn counting_cube() -> DenseTensor {
    // A[i1,i2,i3] = i1 + 2(i2−1) + 4(i3−1), 1-based
    DenseTensor::from_fn(Shape::new(vec![2, 2, 2]).unwrap(), |ix| {
        (1 + ix[0] + 2 * ix[1] + 4 * ix[2]) as f64
    })
}

#[test]
fn matricize_examples() {
    let t = counting_cube();
    let m1 = t.matricize(1).unwrap();
    assert_eq!(
        m1,
        Matrix::from_rows(&[&[1.0, 3.0, 5.0, 7.0], &[2.0, 4.0, 6.0, 8.0]])
    );
    assert_eq!(m1, naive_matricize(&t, 1));
    let m2 = t.matricize(2).unwrap();
    assert_eq!(
        m2,
        Matrix::from_rows(&[&[1.0, 2.0, 5.0, 6.0], &[3.0, 4.0, 7.0, 8.0]])
    );
    assert_eq!(m2, naive_matricize(&t, 2));
    assert_eq!(t.matricize(3).unwrap(), naive_matricize(&t, 3));
    assert!(matches!(
        t.matricize(4),
        Err(Error::InvalidMode { mode: 4, order: 3 })
    ));
    assert!(matches!(t.matricize(0), Err(Error::InvalidMode { .. })));
}

#[test]
fn tensorize_examples() {
    let m = Matrix::from_rows(&[&[1.0, 3.0, 5.0, 7.0], &[2.0, 4.0, 6.0, 8.0]]);
    let t = DenseTensor::tensorize(&m, 1, &Shape::new(vec![2, 2, 2]).unwrap()).unwrap();
    assert_eq!(t.data(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
    let c = DenseTensor::tensorize(
        &Matrix::from_rows(&[&[2.5]]),
        1,
        &Shape::new(vec![1, 1, 1]).unwrap(),
    )
    .unwrap();
    assert_eq!(c.data(), &[2.5]);
    let bad = DenseTensor::tensorize(&m, 2, &Shape::new(vec![2, 2, 2]).unwrap());
    assert!(bad.is_ok(), "2x4 is also the mode-2 shape");
    assert!(matches!(
        DenseTensor::tensorize(&Matrix::zeros(3, 4), 1, &Shape::new(vec![2, 2, 2]).unwrap()),
        Err(Error::DimensionMismatch(_))
    ));
}

#[test]
fn mode_product_examples() {
    let t = counting_cube();
    let ones = Matrix::from_rows(&[&[1.0, 1.0]]);
    let p = t.mode_n_product(&ones, 1).unwrap();
    assert_eq!(p.dims(), &[1, 2, 2]);
    assert_eq!(p.data(), &[3.0, 7.0, 11.0, 15.0]);
    assert_eq!(t.mode_n_product(&Matrix::identity(2), 2).unwrap(), t);
    assert!(matches!(
        t.mode_n_product(&Matrix::zeros(2, 3), 1),
        Err(Error::DimensionMismatch(_))
    ));

    let mut r = rng(1);
    let t = gaussian_tensor(&mut r, &[4, 5, 3]);
    let u = gaussian_matrix(&mut r, 6, 5);
    let fast = t.mode_n_product(&u, 2).unwrap();
    assert!(tensor_rel_diff(&naive_mode_product(&t, &u, 2), &fast) <= 1e-14);
}

#[test]
fn multi_mode_product_examples() {
    let mut r = rng(2);
    let t = gaussian_tensor(&mut r, &[4, 4, 4]);
    let i4 = Matrix::identity(4);
    assert_eq!(
        t.multi_mode_product(&[(&i4, 1), (&i4, 2), (&i4, 3)])
            .unwrap(),
        t
    );
    let a = gaussian_matrix(&mut r, 2, 4);
    let b = gaussian_matrix(&mut r, 2, 4);
    let ab = t
        .mode_n_product(&a, 1)
        .unwrap()
        .mode_n_product(&b, 2)
        .unwrap();
    let ba = t
        .mode_n_product(&b, 2)
        .unwrap()
        .mode_n_product(&a, 1)
        .unwrap();
    assert!(tensor_rel_diff(&ab, &ba) <= 1e-13);
    assert!(matches!(
        t.multi_mode_product(&[(&a, 1), (&b, 1)]),
        Err(Error::InvalidMode { .. })
    ));

    // contracting a Tucker tensor's factors against its reconstruction
    let core = gaussian_tensor(&mut r, &[2, 3, 2]);
    let fs: Vec<Matrix> = [(6, 2), (5, 3), (4, 2)]
        .iter()
        .map(|&(i, k)| random_orthonormal(&mut r, i, k))
        .collect();
    let tk = TuckerTensor::new(core.clone(), fs.clone()).unwrap();
    let full = tk.reconstruct().unwrap();
    let ts: Vec<Matrix> = fs.iter().map(naive_transpose).collect();
    let back = full
        .multi_mode_product(&[(&ts[0], 1), (&ts[1], 2), (&ts[2], 3)])
        .unwrap();
    assert!(tensor_rel_diff(&core, &back) <= 1e-12);
}

#[test]
fn streamed_contraction_examples() {
    let mut r = rng(3);
    let t = gaussian_tensor(&mut r, &[3, 4, 5]);
    for mode in 1..=3 {
        let a = naive_matricize(&t, mode);
        let zeros = Matrix::zeros(a.cols(), 2);
        assert_eq!(
            t.unfold_times(mode, &zeros).unwrap(),
            Matrix::zeros(a.rows(), 2)
        );
        assert!(
            rel_diff(
                &t.unfold_times(mode, &Matrix::identity(a.cols())).unwrap(),
                &a
            ) <= 1e-14
        );
        let m = gaussian_matrix(&mut r, a.cols(), 3);
        assert!(rel_diff(&t.unfold_times(mode, &m).unwrap(), &naive_matmul(&a, &m)) <= 1e-13);

        let zeros = Matrix::zeros(a.rows(), 2);
        assert_eq!(
            t.unfold_t_times(mode, &zeros).unwrap(),
            Matrix::zeros(a.cols(), 2)
        );
        assert!(
            rel_diff(
                &t.unfold_t_times(mode, &Matrix::identity(a.rows())).unwrap(),
                &naive_transpose(&a)
            ) <= 1e-14
        );
        let m = gaussian_matrix(&mut r, a.rows(), 3);
        assert!(
            rel_diff(
                &t.unfold_t_times(mode, &m).unwrap(),
                &naive_matmul(&naive_transpose(&a), &m)
            ) <= 1e-13
        );
    }
    assert!(matches!(
        t.unfold_times(1, &Matrix::zeros(19, 1)),
        Err(Error::DimensionMismatch(_))
    ));
    assert!(matches!(
        t.unfold_t_times(1, &Matrix::zeros(4, 1)),
        Err(Error::DimensionMismatch(_))
    ));
}

#[test]
fn norm_and_error_examples() {
    let ones = DenseTensor::from_fn(Shape::new(vec![2, 2, 2]).unwrap(), |_| 1.0);
    assert_eq!(ones.frobenius_norm(), 8f64.sqrt());
    assert_eq!(
        DenseTensor::zeros(Shape::new(vec![3, 2]).unwrap()).frobenius_norm(),
        0.0
    );
    assert!((counting_cube().frobenius_norm() - 204f64.sqrt()).abs() < 1e-14);

    let a = counting_cube();
    assert_eq!(relative_error(&a, &a).unwrap(), 0.0);
    let mut b = a.clone();
    b.add_scaled(1.0, &a).unwrap();
    assert!((relative_error(&a, &b).unwrap() - 1.0).abs() < 1e-15);

    let shape = Shape::new(vec![3, 2]).unwrap();
    let a = DenseTensor::from_fn(shape.clone(), |ix| if ix == [0, 0] { 3.0 } else { 0.0 });
    let b = DenseTensor::from_fn(shape.clone(), |ix| match ix {
        [0, 0] => 3.0,
        [2, 1] => 1.0,
        _ => 0.0,
    });
    assert!((relative_error(&a, &b).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert!(matches!(
        relative_error(&DenseTensor::zeros(shape.clone()), &b),
        Err(Error::ZeroReference)
    ));
    assert!(matches!(
        relative_error(&a, &counting_cube()),
        Err(Error::DimensionMismatch(_))
    ));
}

#[test]
fn reconstruct_examples() {
    let e1 = Matrix::from_rows(&[&[1.0], &[0.0], &[0.0]]);
    let core = DenseTensor::new(Shape::new(vec![1, 1, 1]).unwrap(), vec![1.0]).unwrap();
    let tk = TuckerTensor::new(core, vec![e1.clone(), e1.clone(), e1]).unwrap();
    let t = tk.reconstruct().unwrap();
    assert_eq!(t.dims(), &[3, 3, 3]);
    assert_eq!(t.get(&[0, 0, 0]), 1.0);
    assert_eq!(t.frobenius_norm(), 1.0);
    assert!(Truncation::new(vec![4, 1, 1])
        .unwrap()
        .validate(t.shape())
        .is_err());
}

fn dims_strategy(max_order: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=4, 1..=max_order)
}

fn tensor_and_mode(max_order: usize) -> impl Strategy<Value = (DenseTensor, usize, u64)> {
    (dims_strategy(max_order), any::<u64>())
        .prop_flat_map(|(dims, seed)| {
            let order = dims.len();
            (Just(dims), 1..=order, Just(seed))
        })
        .prop_map(|(dims, mode, seed)| (gaussian_tensor(&mut rng(seed), &dims), mode, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tensorize_inverts_matricize((t, mode, _) in tensor_and_mode(5)) {
        let m = t.matricize(mode).unwrap();
        prop_assert_eq!(&m, &naive_matricize(&t, mode));
        let back = DenseTensor::tensorize(&m, mode, t.shape()).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn mode_product_unfolds_to_matrix_product((t, mode, seed) in tensor_and_mode(5), rows in 1usize..4) {
        let u = gaussian_matrix(&mut rng(seed ^ 1), rows, t.dims()[mode - 1]);
        let p = t.mode_n_product(&u, mode).unwrap();
        let expect = naive_matmul(&u, &naive_matricize(&t, mode));
        prop_assert!(rel_diff(&p.matricize(mode).unwrap(), &expect) <= 1e-13);
    }

    #[test]
    fn mode_products_commute(dims in prop::collection::vec(1usize..=4, 2..=4), seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = gaussian_tensor(&mut r, &dims);
        let a = gaussian_matrix(&mut r, 2, dims[0]);
        let b = gaussian_matrix(&mut r, 3, dims[dims.len() - 1]);
        let n = dims.len();
        let ab = t.mode_n_product(&a, 1).unwrap().mode_n_product(&b, n).unwrap();
        let ba = t.mode_n_product(&b, n).unwrap().mode_n_product(&a, 1).unwrap();
        prop_assert!(tensor_rel_diff(&ab, &ba) <= 1e-13);
        let multi = t.multi_mode_product(&[(&b, n), (&a, 1)]).unwrap();
        prop_assert!(tensor_rel_diff(&ab, &multi) <= 1e-13);
    }

    #[test]
    fn streamed_contractions_match_oracle((t, mode, seed) in tensor_and_mode(5), k in 1usize..4) {
        let a = naive_matricize(&t, mode);
        let mut r = rng(seed ^ 2);
        let m = gaussian_matrix(&mut r, a.cols(), k);
        prop_assert!(rel_diff(&t.unfold_times(mode, &m).unwrap(), &naive_matmul(&a, &m)) <= 1e-13);
        let m = gaussian_matrix(&mut r, a.rows(), k);
        let expect = naive_matmul(&naive_transpose(&a), &m);
        prop_assert!(rel_diff(&t.unfold_t_times(mode, &m).unwrap(), &expect) <= 1e-13);
        let g = naive_matmul(&a, &naive_transpose(&a));
        prop_assert!(rel_diff(&t.unfold_gram(mode).unwrap(), &g) <= 1e-13);
    }

    #[test]
    fn norm_is_unfolding_invariant((t, mode, _) in tensor_and_mode(5)) {
        let n2 = t.frobenius_norm().powi(2);
        let m2 = fro(&naive_matricize(&t, mode)).powi(2);
        prop_assert!((n2 - m2).abs() <= 1e-12 * n2.max(1e-300));
    }
}

#[test]
fn large_unfoldings_span_several_chunks() {
    // more than one fiber chunk in every mode
    let mut r = rng(4);
    let t = gaussian_tensor(&mut r, &[37, 41, 43]);
    for mode in 1..=3 {
        let a = naive_matricize(&t, mode);
        let m = gaussian_matrix(&mut r, a.cols(), 3);
        assert!(rel_diff(&t.unfold_times(mode, &m).unwrap(), &naive_matmul(&a, &m)) <= 1e-13);
        let m = gaussian_matrix(&mut r, a.rows(), 3);
        let expect = naive_matmul(&naive_transpose(&a), &m);
        assert!(rel_diff(&t.unfold_t_times(mode, &m).unwrap(), &expect) <= 1e-13);
    }
}
