use rand::Rng;

use super::{over_replicas, RngContract};
use crate::{Error, Result};

/// Largest `n` accepted by the exact enumeration oracles.
pub const EXACT_MAX_N: u64 = 14;

/// `R_n/n` for the infinitely impatient walk on `ℤ` after `n` actual time
/// units, where `R_n` is the time spent on the positive half-axis.
///
/// Each unit extends the visited range by one edge. From the current
/// endpoint of a range with `ℓ` edges, the walk reaches the opposite end
/// first with probability `1/(ℓ + 2)`, so at unit `k` (range `ℓ = k − 1`)
/// the side switches with probability `1/(k+1)`. Runs of units on one side
/// are skipped over: after unit `k` the next switch is later than unit `j`
/// with probability `Π_{i=k+1}^{j} i/(i+1) = (k+1)/(j+1)`.
pub fn inf_imp_occupation(n: u64, replicas: u64, rng: &RngContract) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::param("inf_imp_occupation needs n >= 2"));
    }
    over_replicas(
        replicas,
        Vec::new,
        |out, r| {
            let mut g = rng.stream(r);
            let mut right = g.random::<u64>() >> 63 == 0;
            let mut r_time = u64::from(right);
            let mut k = 1u64;
            while k < n {
                // 1 − u lies in (0, 1]
                let u = 1.0 - g.random::<f64>();
                let j = ((k + 1) as f64 / u).floor();
                let next = if j > n as f64 { n + 1 } else { (j as u64).max(k + 1) };
                if right {
                    r_time += next.min(n + 1) - k - 1;
                }
                if next > n {
                    break;
                }
                right = !right;
                r_time += u64::from(right);
                k = next;
            }
            out.push(r_time as f64 / n as f64);
            Ok(())
        },
        |t, p| t.extend(p),
    )
}

/// Heads fraction of the turning coin: a fair first toss, then at unit
/// `k ≥ 2` the coin is turned over with probability `1/(k+1)`.
pub fn coin_turning(n: u64, replicas: u64, rng: &RngContract) -> Result<Vec<f64>> {
    if n < 1 {
        return Err(Error::param("coin_turning needs n >= 1"));
    }
    over_replicas(
        replicas,
        Vec::new,
        |out, r| {
            let mut g = rng.stream(r);
            let mut heads = g.random::<u64>() >> 63 == 0;
            let mut count = u64::from(heads);
            for k in 2..=n {
                if g.random::<f64>() * ((k + 1) as f64) < 1.0 {
                    heads = !heads;
                }
                count += u64::from(heads);
            }
            out.push(count as f64 / n as f64);
            Ok(())
        },
        |t, p| t.extend(p),
    )
}

/// Exact law of `R_n` from the range chain: the state is the number of
/// right and left extensions so far and which endpoint the walk sits at.
/// The extension side comes from the gambler's-ruin probability of simple
/// random walk on `[l−1, r+1]` started at the current endpoint.
pub fn exact_small_n(n: u64) -> Result<Vec<f64>> {
    if !(1..=EXACT_MAX_N).contains(&n) {
        return Err(Error::param(format!("exact_small_n needs 1 <= n <= {EXACT_MAX_N}, got {n}")));
    }
    let n = n as usize;
    // dist[r][side]: r right units so far, side 1 = at the right end.
    let mut dist = vec![[0.0f64; 2]; n + 1];
    // Unit 1 starts at the origin with an empty range.
    let p_right = gamblers_ruin_up(0, 0, 0);
    dist[1][1] = p_right;
    dist[0][0] = 1.0 - p_right;
    for k in 1..n {
        let mut next = vec![[0.0f64; 2]; n + 1];
        for (r, row) in dist.iter().enumerate() {
            for (side, &p) in row.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                let (right_end, left_end) = (r as i64, -((k - r) as i64));
                let x = if side == 1 { right_end } else { left_end };
                let up = gamblers_ruin_up(x, left_end, right_end);
                next[r + 1][1] += p * up;
                next[r][0] += p * (1.0 - up);
            }
        }
        dist = next;
    }
    Ok(dist.iter().map(|d| d[0] + d[1]).collect())
}

/// `P_x(hit r+1 before l−1)` for simple random walk.
fn gamblers_ruin_up(x: i64, l: i64, r: i64) -> f64 {
    (x - (l - 1)) as f64 / ((r + 1) - (l - 1)) as f64
}

/// Exact law of the heads count of [`coin_turning`].
pub fn exact_coin_turning(n: u64) -> Result<Vec<f64>> {
    if !(1..=EXACT_MAX_N).contains(&n) {
        return Err(Error::param(format!("exact_coin_turning needs 1 <= n <= {EXACT_MAX_N}, got {n}")));
    }
    let n = n as usize;
    // dist[h][face]: h heads so far, face 1 = heads up.
    let mut dist = vec![[0.0f64; 2]; n + 1];
    dist[1][1] = 0.5;
    dist[0][0] = 0.5;
    for k in 2..=n {
        let turn = 1.0 / (k + 1) as f64;
        let mut next = vec![[0.0f64; 2]; n + 1];
        for (h, row) in dist.iter().enumerate() {
            for (face, &p) in row.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                for (new_face, q) in [(face, 1.0 - turn), (1 - face, turn)] {
                    next[h + new_face][new_face] += p * q;
                }
            }
        }
        dist = next;
    }
    Ok(dist.iter().map(|d| d[0] + d[1]).collect())
}

/// `R_n/n` for simple random walk with unit passage times: the fraction
/// of the first `n` steps spent on edges of the positive half-axis.
pub fn srw_occupation(n: u64, replicas: u64, rng: &RngContract) -> Result<Vec<f64>> {
    if n < 1 {
        return Err(Error::param("srw_occupation needs n >= 1"));
    }
    over_replicas(
        replicas,
        Vec::new,
        |out, r| {
            let mut g = rng.stream(r);
            let (mut x, mut pos, mut left) = (0i64, 0u64, 0u64);
            let mut bits = 0u64;
            for i in 0..n {
                if i % 64 == 0 {
                    bits = g.random();
                }
                let y = if bits & 1 == 0 { x + 1 } else { x - 1 };
                bits >>= 1;
                if x.min(y) >= 0 {
                    pos += 1;
                } else {
                    left += 1;
                }
                x = y;
            }
            debug_assert_eq!(pos + left, n);
            out.push(pos as f64 / n as f64);
            Ok(())
        },
        |t, p| t.extend(p),
    )
}

/// Kolmogorov-Smirnov distance between the empirical law of `samples` and
/// Uniform[0, 1].
pub fn ks_uniform(samples: &[f64]) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < xs.len() {
        // Handle ties as one jump of the empirical CDF.
        let mut j = i;
        while j + 1 < xs.len() && xs[j + 1] == xs[i] {
            j += 1;
        }
        let x = xs[i].clamp(0.0, 1.0);
        d = d.max(x - i as f64 / n).max((j + 1) as f64 / n - x);
        i = j + 1;
    }
    d
}
