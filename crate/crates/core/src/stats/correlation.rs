//! Pearson, Spearman and Kendall (tau-b) coefficients.

use std::cmp::Ordering;

use crate::error::{Error, Result};

fn check_lengths(nx: usize, ny: usize) -> Result<()> {
    if nx != ny {
        return Err(Error::LengthMismatch(nx, ny));
    }
    if nx < 2 {
        return Err(Error::TooFewSamples(nx));
    }
    Ok(())
}

pub(crate) fn pearson_by<T: Copy>(xs: &[T], ys: &[T], f: impl Fn(T) -> f64) -> Result<f64> {
    check_lengths(xs.len(), ys.len())?;
    let n = xs.len() as f64;
    let mx = xs.iter().map(|&v| f(v)).sum::<f64>() / n;
    let my = ys.iter().map(|&v| f(v)).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = f(x) - mx;
        let dy = f(y) - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantInput);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Sample correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    pearson_by(xs, ys, |v| v)
}

/// 1-based ranks; tied values share the average of their ranks.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_unstable_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

/// Pearson coefficient of the average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_lengths(xs.len(), ys.len())?;
    pearson(&average_ranks(xs), &average_ranks(ys))
}

fn tied_pairs<T: PartialEq>(sorted: &[T]) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Sorts `v` ascending and returns the number of strictly inverted pairs.
fn sort_counting_inversions(v: &mut [f64], scratch: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (left, right) = v.split_at_mut(mid);
        let (sl, sr) = scratch.split_at_mut(mid);
        sort_counting_inversions(left, sl) + sort_counting_inversions(right, sr)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j].total_cmp(&v[i]) == Ordering::Less {
            scratch[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            scratch[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    scratch[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    scratch[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&scratch[..n]);
    swaps
}

/// Kendall's tau-b in `O(n log n)` (Knight's merge-sort algorithm).
pub fn kendall(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_lengths(xs.len(), ys.len())?;
    let n = xs.len() as u64;
    let total = n * (n - 1) / 2;

    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_unstable_by(|&i, &j| xs[i].total_cmp(&xs[j]).then(ys[i].total_cmp(&ys[j])));
    let sorted_x: Vec<f64> = order.iter().map(|&i| xs[i]).collect();
    let sorted_xy: Vec<(f64, f64)> = order.iter().map(|&i| (xs[i], ys[i])).collect();
    let ties_x = tied_pairs(&sorted_x);
    let ties_xy = tied_pairs(&sorted_xy);

    let mut by_y: Vec<f64> = order.iter().map(|&i| ys[i]).collect();
    let mut scratch = vec![0.0; by_y.len()];
    let swaps = sort_counting_inversions(&mut by_y, &mut scratch);
    let ties_y = tied_pairs(&by_y);

    if ties_x == total || ties_y == total {
        return Err(Error::ConstantInput);
    }
    let numer = total as f64 - ties_x as f64 - ties_y as f64 + ties_xy as f64 - 2.0 * swaps as f64;
    let denom = ((total - ties_x) as f64).sqrt() * ((total - ties_y) as f64).sqrt();
    Ok((numer / denom).clamp(-1.0, 1.0))
}
