//! Bracketed scalar minimization combining golden-section and parabolic steps.

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMinimum {
    pub x: f64,
    pub f: f64,
    pub evaluations: usize,
    /// Width of the final bracket.
    pub bracket: f64,
}

/// Minimizes `f` on `[lo, hi]` until the bracket is narrower than `tol`.
pub fn scalar_minimize(mut f: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64, tol: f64) -> Result<ScalarMinimum> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return invalid(format!("invalid bracket [{lo}, {hi}]"));
    }
    if !(tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    let golden = 0.5 * (3.0 - 5f64.sqrt());
    let (mut a, mut b) = (lo, hi);
    let mut evals = 0;
    let mut eval = |x: f64, evals: &mut usize| -> Result<f64> {
        *evals += 1;
        let v = f(x)?;
        if !v.is_finite() {
            return Err(Error::NumericalFailure(format!("objective is {v} at x = {x}")));
        }
        Ok(v)
    };
    let mut x = a + golden * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = eval(x, &mut evals)?;
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (0.0f64, 0.0f64);
    // Nudges of size `t` on both sides of `x` close the bracket below `tol`.
    let abs_floor = 0.25 * tol;
    loop {
        let m = 0.5 * (a + b);
        let t = f64::EPSILON * x.abs() + abs_floor;
        if b - a <= tol {
            break;
        }
        let mut golden_step = true;
        if e.abs() > t {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            } else {
                q = -q;
            }
            let e_prev = e;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < 2.0 * t || b - u < 2.0 * t {
                    d = if x < m { t } else { -t };
                }
                golden_step = false;
            }
        }
        if golden_step {
            e = if x < m { b - x } else { a - x };
            d = golden * e;
        }
        let u = if d.abs() >= t {
            x + d
        } else if d > 0.0 {
            x + t
        } else {
            x - t
        };
        let fu = eval(u, &mut evals)?;
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
        if evals > 10_000 {
            return Err(Error::NumericalFailure("scalar minimization did not converge".into()));
        }
    }
    Ok(ScalarMinimum {
        x,
        f: fx,
        evaluations: evals,
        bracket: b - a,
    })
}
