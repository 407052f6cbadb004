//! Isotonic projections for weakly monotone boundary parameters.

/// Least-squares nondecreasing fit of `y` (pool adjacent violators).
pub fn pava(y: &[f64]) -> Vec<f64> {
    // blocks of (mean, weight)
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(y.len());
    for &v in y {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m2, w2) = blocks[blocks.len() - 1];
            let (m1, w1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let w = w1 + w2;
            *blocks.last_mut().expect("two blocks present") = ((m1 * w1 as f64 + m2 * w2 as f64) / w as f64, w);
        }
    }
    let mut out = Vec::with_capacity(y.len());
    for (m, w) in blocks {
        out.extend(std::iter::repeat_n(m, w));
    }
    out
}

/// Projection onto `{t_1 <= ... <= t_k <= t_1 + period}`.
///
/// [`pava`] alone when the fit spans at most one period; otherwise the span
/// constraint is active and its multiplier `nu` is found by bisection: the
/// projection is the isotonic fit of `t` with `t_1 + nu` and `t_k - nu`.
pub fn boundary_project(t: &[f64], period: f64) -> Vec<f64> {
    let k = t.len();
    if k < 2 || is_cyclically_monotone(t, period) {
        return t.to_vec();
    }
    let fit_with = |nu: f64| {
        let mut y = t.to_vec();
        y[0] += nu;
        y[k - 1] -= nu;
        pava(&y)
    };
    let span = |x: &[f64]| x[k - 1] - x[0];
    let fit = fit_with(0.0);
    if span(&fit) <= period {
        return fit;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while span(&fit_with(hi)) > period {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if span(&fit_with(mid)) > period {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut out = fit_with(hi);
    // the span may exceed the period by rounding
    let cap = out[0] + period;
    for v in out.iter_mut() {
        *v = v.min(cap);
    }
    out
}

pub fn is_cyclically_monotone(t: &[f64], period: f64) -> bool {
    t.windows(2).all(|w| w[0] <= w[1]) && t.last().zip(t.first()).is_none_or(|(l, f)| *l <= f + period)
}

/// Projection of `t` onto nondecreasing sequences that equal `t` at the
/// sorted `anchors` and stay within `[t[first], t[first] + period]` across
/// the wraparound. Exact: isotonic regression with bounds is the clipped
/// unbounded fit.
pub fn anchored_project(t: &[f64], anchors: &[usize], period: f64) -> Vec<f64> {
    let k = t.len();
    if anchors.is_empty() {
        return boundary_project(t, period);
    }
    let mut out = t.to_vec();
    let na = anchors.len();
    for a in 0..na {
        let lo_idx = anchors[a];
        let hi_idx = anchors[(a + 1) % na];
        let lo = t[lo_idx];
        let hi = if a + 1 < na { t[hi_idx] } else { t[hi_idx] + period };
        // free indices strictly between the two anchors, cyclically
        let mut idx = Vec::new();
        let mut j = (lo_idx + 1) % k;
        while j != hi_idx {
            idx.push(j);
            j = (j + 1) % k;
        }
        let lifted: Vec<f64> = idx
            .iter()
            .map(|&j| if a + 1 == na && j < lo_idx { t[j] + period } else { t[j] })
            .collect();
        let fit = pava(&lifted);
        for (&j, v) in idx.iter().zip(fit) {
            let v = v.clamp(lo, hi);
            out[j] = if a + 1 == na && j < lo_idx { v - period } else { v };
        }
    }
    out
}
