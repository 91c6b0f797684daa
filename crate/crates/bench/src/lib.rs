//! Synthetic inputs shared by the benchmarks.

use churnlab_core::seed::splitmix64;
use churnlab_core::Matrix;

/// `n × d` features in `[0, 100)` with a label that depends on the first two
/// columns, about 15% positive.
pub fn synthetic(n: usize, d: usize, seed: u64) -> (Matrix, Vec<u8>) {
    let mut state = seed;
    let mut next = move || {
        state = splitmix64(state);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let data: Vec<f64> = (0..n * d).map(|_| 100.0 * next()).collect();
    let y = (0..n)
        .map(|i| {
            let r = &data[i * d..(i + 1) * d];
            let s = r[0] + 0.5 * r.get(1).copied().unwrap_or(0.0) + 30.0 * next();
            u8::from(s > 115.0)
        })
        .collect();
    (Matrix::from_vec(n, d, data).expect("shape"), y)
}
