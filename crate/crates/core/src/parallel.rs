//! Deterministic data-parallel helpers.
//!
//! Every parallel reduction in the crate splits its input into fixed-size
//! chunks, computes one partial per chunk, and folds the partials in chunk
//! order. Chunk boundaries never depend on the thread count, so results are
//! bitwise identical whether the pool has one worker or many.

use rayon::prelude::*;

/// Unfolding columns (mode-n fibers) per contraction chunk.
pub const FIBER_CHUNK: usize = 1024;

/// Matrix rows per chunk for tall-skinny products and Gram matrices.
pub const ROW_CHUNK: usize = 4096;

/// Elements per chunk for norm accumulation.
pub const NORM_CHUNK: usize = 1 << 16;

/// Dot product with four fixed accumulator lanes.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `dst += alpha * src`.
#[inline]
pub fn axpy(dst: &mut [f64], alpha: f64, src: &[f64]) {
    debug_assert_eq!(dst.len(), src.len());
    if alpha == 0.0 {
        return;
    }
    for (d, s) in dst.iter_mut().zip(src) {
        *d += alpha * s;
    }
}

/// Sum of squares, chunked and folded in chunk order.
pub fn sum_squares(data: &[f64]) -> f64 {
    let partials: Vec<f64> = data.par_chunks(NORM_CHUNK).map(|c| dot(c, c)).collect();
    partials.iter().sum()
}

/// Fold per-chunk partial buffers produced by `f` in chunk order.
///
/// Chunks are evaluated in parallel a batch at a time to bound memory; the
/// fold itself is strictly sequential, so the batch size never changes the
/// result.
pub fn chunked_reduce<F>(n_chunks: usize, len: usize, f: F) -> Vec<f64>
where
    F: Fn(usize) -> Vec<f64> + Sync,
{
    let mut acc: Option<Vec<f64>> = None;
    let batch = 2 * rayon::current_num_threads().max(1);
    let mut start = 0;
    while start < n_chunks {
        let end = (start + batch).min(n_chunks);
        let partials: Vec<Vec<f64>> = (start..end).into_par_iter().map(&f).collect();
        for p in partials {
            debug_assert_eq!(p.len(), len);
            match acc.as_mut() {
                None => acc = Some(p),
                Some(a) => a.iter_mut().zip(&p).for_each(|(x, y)| *x += y),
            }
        }
        start = end;
    }
    acc.unwrap_or_else(|| vec![0.0; len])
}

/// Run `f` on a dedicated pool with `threads` workers (0 = rayon default).
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("failed to build thread pool");
    pool.install(f)
}
