//! The closed-form stationary distribution against a transition matrix
//! built directly from the backoff rules and solved by Gaussian elimination.

use coexist::markov::BackoffChain;
use coexist::{laa_tau, wifi_stationary, wifi_tau};

/// Window of each stage: doubling up to `m`, then held for `extra` stages.
fn windows(w0: u32, m: u32, extra: u32) -> Vec<usize> {
    (0..=m + extra)
        .map(|i| (w0 as usize) << i.min(m))
        .collect()
}

/// Stationary vector of the chain, indexed as `[stage][counter]`.
fn dtmc_stationary(w0: u32, m: u32, extra: u32, p: f64) -> Vec<Vec<f64>> {
    let ws = windows(w0, m, extra);
    let offsets: Vec<usize> = ws
        .iter()
        .scan(0, |acc, &w| {
            let o = *acc;
            *acc += w;
            Some(o)
        })
        .collect();
    let n: usize = ws.iter().sum();
    let last = ws.len() - 1;

    // q[to][from]
    let mut q = vec![vec![0.0f64; n]; n];
    for (i, &w) in ws.iter().enumerate() {
        for k in 0..w {
            let from = offsets[i] + k;
            if k > 0 {
                q[from - 1][from] += 1.0;
                continue;
            }
            let reset = if i == last { 1.0 } else { 1.0 - p };
            for k2 in 0..ws[0] {
                q[offsets[0] + k2][from] += reset / ws[0] as f64;
            }
            if i < last {
                for k2 in 0..ws[i + 1] {
                    q[offsets[i + 1] + k2][from] += p / ws[i + 1] as f64;
                }
            }
        }
    }

    // (Q - I) pi = 0 with the last equation replaced by sum(pi) = 1.
    let mut a = q;
    for (r, row) in a.iter_mut().enumerate() {
        row[r] -= 1.0;
    }
    let mut b = vec![0.0; n];
    a[n - 1] = vec![1.0; n];
    b[n - 1] = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        let d = a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / d;
            if f != 0.0 {
                let (top, bottom) = a.split_at_mut(r);
                for (x, &y) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                    *x -= f * y;
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    ws.iter()
        .zip(&offsets)
        .map(|(&w, &o)| x[o..o + w].to_vec())
        .collect()
}

fn check(chain: BackoffChain, w0: u32, m: u32, extra: u32, p: f64) {
    let reference = dtmc_stationary(w0, m, extra, p);
    let dist = chain.stationary(p).unwrap();
    assert_eq!(dist.stage_count(), reference.len());
    for (i, stage) in reference.iter().enumerate() {
        assert_eq!(dist.stage(i).len(), stage.len());
        for (k, &v) in stage.iter().enumerate() {
            let got = dist.get(i, k).unwrap();
            assert!(
                (got - v).abs() < 1e-12,
                "w0={w0} m={m} extra={extra} p={p} b[{i}][{k}]: {got} vs {v}"
            );
        }
    }
    let tau_ref: f64 = reference.iter().map(|s| s[0]).sum();
    assert!((chain.tau(p).unwrap() - tau_ref).abs() < 1e-12);
}

#[test]
fn wifi_chain_matches_transition_matrix() {
    for &(w0, m) in &[(2, 0), (4, 1), (8, 2), (4, 3), (16, 1)] {
        for &p in &[0.0, 0.1, 0.33, 0.5, 0.72, 0.95] {
            check(BackoffChain::wifi(w0, m), w0, m, 1, p);
        }
    }
}

#[test]
fn laa_chain_matches_transition_matrix() {
    for &(w0, m, e) in &[(4, 1, 0), (4, 1, 3), (8, 2, 2), (4, 2, 5), (2, 0, 4)] {
        for &p in &[0.05, 0.4, 0.5, 0.8] {
            check(BackoffChain::laa(w0, m, e), w0, m, e, p);
        }
    }
}

#[test]
fn pole_is_smooth() {
    // Central differences across p = 1/2 agree with one-sided differences.
    for &(w0, m) in &[(16, 6), (4, 1), (8, 3)] {
        let f = |p: f64| wifi_tau(w0, m, p).unwrap();
        let h = 1e-5;
        let at = f(0.5);
        let left = (at - f(0.5 - h)) / h;
        let right = (f(0.5 + h) - at) / h;
        assert!((left - right).abs() < 1e-2 * left.abs().max(1e-6), "{left} {right}");
        for &d in &[1e-12, 1e-10, 3e-9, 1e-7] {
            assert!((f(0.5 + d) - at).abs() < 1e-6);
            assert!((f(0.5 - d) - at).abs() < 1e-6);
        }
        let g = |p: f64| laa_tau(w0, m, 3, p).unwrap();
        assert!((g(0.5 + 1e-10) - g(0.5 - 1e-10)).abs() < 1e-8);
    }
}

#[test]
fn stationary_heads_and_window_profile() {
    let d = wifi_stationary(16, 6, 0.3).unwrap();
    for i in 0..d.stage_count() {
        let s = d.stage(i);
        let w = s.len() as f64;
        for (k, &v) in s.iter().enumerate() {
            assert!((v - (w - k as f64) / w * s[0]).abs() < 1e-15);
        }
        if i > 0 {
            assert!((s[0] - 0.3 * d.stage(i - 1)[0]).abs() < 1e-15);
        }
    }
}
