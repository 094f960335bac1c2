//! Small generated tables for tests and demos.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataio::DataTable;

fn names(prefix: &str, n: usize, offset: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{}", i + offset)).collect()
}

/// Binary labels; feature `copy_index` is the label plus jitter in `[0, 0.1)`
/// and the other features are uniform noise.
pub fn label_copy_table(n_rows: usize, n_features: usize, copy_index: usize, seed: u64) -> DataTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<usize> = (0..n_rows).map(|i| i % 2).collect();
    let rows: Vec<Vec<f64>> = labels
        .iter()
        .map(|&l| {
            (0..n_features)
                .map(|j| {
                    if j == copy_index {
                        l as f64 + rng.gen_range(0.0..0.1)
                    } else {
                        rng.gen()
                    }
                })
                .collect()
        })
        .collect();
    let cols = names("f", n_features, 0);
    let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
    DataTable::from_rows(&cols, &rows, labels, vec!["neg".into(), "pos".into()]).unwrap()
}

/// `n_informative` fair-coin bits `inf0..` whose majority vote is the label,
/// followed by `n_noise` uniform columns `noise0..`. Use an odd number of
/// informative bits so the vote never ties.
pub fn majority_table(n_rows: usize, n_informative: usize, n_noise: usize, seed: u64) -> DataTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n_rows);
    let mut labels = Vec::with_capacity(n_rows);
    for _ in 0..n_rows {
        let bits: Vec<f64> = (0..n_informative).map(|_| f64::from(u8::from(rng.gen_bool(0.5)))).collect();
        let ones = bits.iter().filter(|&&b| b == 1.0).count();
        labels.push(usize::from(2 * ones > n_informative));
        let mut row = bits;
        row.extend((0..n_noise).map(|_| rng.gen::<f64>()));
        rows.push(row);
    }
    let mut cols = names("inf", n_informative, 0);
    cols.extend(names("noise", n_noise, 0));
    let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
    DataTable::from_rows(&cols, &rows, labels, vec!["neg".into(), "pos".into()]).unwrap()
}

/// `k` well separated Gaussian clusters in `n_features` dimensions with
/// `n_per` rows each.
pub fn blobs(n_per: usize, k: usize, n_features: usize, seed: u64) -> DataTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n_per * k);
    let mut labels = Vec::with_capacity(n_per * k);
    for c in 0..k {
        for _ in 0..n_per {
            rows.push(
                (0..n_features)
                    .map(|j| 4.0 * ((c + j) % k) as f64 + normal(&mut rng) * 0.5)
                    .collect(),
            );
            labels.push(c);
        }
    }
    let cols = names("x", n_features, 0);
    let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
    DataTable::from_rows(&cols, &rows, labels, names("class", k, 0)).unwrap()
}

/// Standard normal draw by Box-Muller.
fn normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
