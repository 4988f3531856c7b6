//! Small derivative-free optimizers: a Nelder-Mead simplex and golden-section
//! line search. Both are deterministic for fixed inputs.

/// Minimize `f` over the bracket `[a, b]` by golden-section search.
/// Returns `(argmin, min)`.
pub fn golden_min<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, iters: usize) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if hi - lo < 1e-14 * (1.0 + lo.abs()) {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let xm = 0.5 * (lo + hi);
    let fm = f(xm);
    let mut best = (xm, fm);
    for (x, v) in [(x1, f1), (x2, f2)] {
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

/// Maximize `f` over `[a, b]`; returns `(argmax, max)`.
pub fn golden_max<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, iters: usize) -> (f64, f64) {
    let (x, v) = golden_min(&|t| -f(t), a, b, iters);
    (x, -v)
}

/// Result of a Nelder-Mead run.
pub struct MinResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

/// Minimize `f` starting from `x0` with per-coordinate initial steps.
///
/// Standard reflect/expand/contract/shrink rules; stops on evaluation budget
/// or when the simplex collapses in both value spread and extent.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    steps: &[f64],
    max_evals: usize,
) -> MinResult {
    assert_eq!(x0.len(), steps.len());
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), v0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += steps[i];
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }

    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let spread = simplex[n].1 - simplex[0].1;
        let extent: f64 = (0..n)
            .map(|i| {
                simplex
                    .iter()
                    .map(|(x, _)| (x[i] - simplex[0].0[i]).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread.abs() < 1e-15 && extent < 1e-12 {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|i| simplex[..n].iter().map(|(x, _)| x[i]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let point = |coef: f64| -> Vec<f64> {
            (0..n)
                .map(|i| centroid[i] + coef * (centroid[i] - worst.0[i]))
                .collect()
        };

        let xr = point(1.0);
        let vr = eval(&xr, &mut evals);
        if vr < simplex[0].1 {
            let xe = point(2.0);
            let ve = eval(&xe, &mut evals);
            simplex[n] = if ve < vr { (xe, ve) } else { (xr, vr) };
        } else if vr < simplex[n - 1].1 {
            simplex[n] = (xr, vr);
        } else {
            let (xc, vc) = if vr < worst.1 {
                let x = point(0.5);
                let v = eval(&x, &mut evals);
                (x, v)
            } else {
                let x = point(-0.5);
                let v = eval(&x, &mut evals);
                (x, v)
            };
            if vc < worst.1.min(vr) {
                simplex[n] = (xc, vc);
            } else {
                // shrink toward the best vertex
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    for (x, b) in entry.0.iter_mut().zip(best.iter()) {
                        *x = b + 0.5 * (*x - b);
                    }
                    entry.1 = eval(&entry.0, &mut evals);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    MinResult {
        x: simplex[0].0.clone(),
        value: simplex[0].1,
        evals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        // comparison-based search resolves a quadratic minimum to ~sqrt(eps)
        let (x, v) = golden_min(&|t: f64| (t - 1.3).powi(2) + 0.5, -10.0, 10.0, 200);
        assert!((x - 1.3).abs() < 1e-6);
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn nelder_mead_minimizes_quadratic_bowl() {
        let res = nelder_mead(
            |x| (x[0] - 2.0).powi(2) + 10.0 * (x[1] + 1.0).powi(2),
            &[0.0, 0.0],
            &[0.5, 0.5],
            2000,
        );
        assert!((res.x[0] - 2.0).abs() < 1e-6);
        assert!((res.x[1] + 1.0).abs() < 1e-6);
    }

    #[test]
    fn nelder_mead_on_rosenbrock() {
        let res = nelder_mead(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &[0.3, 0.3],
            4000,
        );
        assert!(res.value < 1e-8, "value = {}", res.value);
    }
}
