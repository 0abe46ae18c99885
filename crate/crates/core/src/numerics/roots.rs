//! Bracketed root refinement and golden-section search.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Bisect until the bracket is at most this wide before switching to Newton.
    pub bisect_width: f64,
    /// Accept a point once |f| falls below this.
    pub f_tol: f64,
    pub max_newton: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            bisect_width: 1e-4,
            f_tol: 1e-12,
            max_newton: 60,
        }
    }
}

/// Find a root of `f` inside `[lo, hi]`; `f` returns the value and derivative.
///
/// Bisection narrows the bracket to `bisect_width`, then Newton steps take
/// over. A Newton step that leaves the current bracket is replaced by a
/// bisection step, so the iterate never escapes.
pub fn refine_bracketed_root<F>(f: F, lo: f64, hi: f64, opts: &RootOptions) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let (mut fa, _) = f(a);
    let (fb, _) = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::InvalidInput(format!(
            "no sign change on [{a}, {b}]"
        )));
    }

    while b - a > opts.bisect_width {
        let mid = 0.5 * (a + b);
        let (fm, _) = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }

    let mut x = 0.5 * (a + b);
    let mut last = f64::INFINITY;
    for _ in 0..opts.max_newton {
        let (fx, dfx) = f(x);
        last = fx.abs();
        if last < opts.f_tol {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        let step = fx / dfx;
        let candidate = x - step;
        x = if dfx != 0.0 && candidate > a && candidate < b {
            candidate
        } else {
            0.5 * (a + b)
        };
        if b - a < 4.0 * f64::EPSILON * x.abs().max(1.0) {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence {
        what: "bracketed root refinement".into(),
        iterations: opts.max_newton,
        residual: last,
    })
}

/// Minimize a unimodal `f` on `[a, b]`; returns `(x, f(x))`.
pub fn golden_section_minimize<F>(f: F, a: f64, b: f64, rel_tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..500 {
        if (b - a) <= rel_tol * (c.abs() + d.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = refine_bracketed_root(|x| (x * x - 2.0, 2.0 * x), 0.0, 3.0, &RootOptions::default())
            .unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_unbracketed() {
        assert!(refine_bracketed_root(|x| (x * x + 1.0, 2.0 * x), -1.0, 1.0, &RootOptions::default())
            .is_err());
    }

    #[test]
    fn newton_is_kept_inside_bracket() {
        // Flat derivative near the start would throw plain Newton far away.
        let f = |x: f64| (x.powi(3) - x - 1e-3, 3.0 * x * x - 1.0);
        let r = refine_bracketed_root(f, 0.9, 1.2, &RootOptions::default()).unwrap();
        assert!(r > 0.9 && r < 1.2 && f(r).0.abs() < 1e-12);
    }

    #[test]
    fn golden_section_on_parabola() {
        let (x, fx) = golden_section_minimize(|x| (x - 1.5).powi(2) + 2.0, 0.0, 4.0, 1e-10);
        // f is flat to rounding within ~√ε of the minimum.
        assert!((x - 1.5).abs() < 1e-7);
        assert!((fx - 2.0).abs() < 1e-14);
    }
}
