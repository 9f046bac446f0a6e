const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute error `tol`.
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    refine(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Smallest `x ≥ 0` with `g(x) = target` for nondecreasing `g`, `g(0) ≤ target`.
///
/// Returns `None` when no bracket is found below `x_max`.
pub(crate) fn solve_increasing<G: Fn(f64) -> f64>(
    g: G,
    target: f64,
    x_guess: f64,
    x_max: f64,
    tol: f64,
) -> Option<f64> {
    let mut lo = 0.0;
    let mut hi = x_guess.max(f64::MIN_POSITIVE);
    while g(hi) < target {
        lo = hi;
        hi *= 2.0;
        if hi > x_max {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let val = g(mid);
        if (val - target).abs() <= tol && (hi - lo) < 1e-12 * hi.max(1.0) {
            return Some(mid);
        }
        if val < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let x = 0.5 * (lo + hi);
    ((g(x) - target).abs() <= tol).then_some(x)
}
