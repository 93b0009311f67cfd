//! Adaptive quadrature on top of the tanh-sinh rule from the `quadrature` crate.

use crate::error::{Error, Result};

/// Upper bound on the number of subintervals.
const MAX_PIECES: usize = 4000;

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

fn rule<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Piece {
    let out = quadrature::double_exponential::integrate(f, a, b, tol);
    // the rule's estimate cannot drop below rounding of the integral itself
    let err = if out.integral.is_finite() {
        (out.error_estimate - 8.0 * f64::EPSILON * out.integral.abs()).max(0.0)
    } else {
        f64::INFINITY
    };
    Piece {
        a,
        b,
        value: out.integral,
        err,
    }
}

/// `∫_a^b f` to absolute tolerance `tol`. Globally adaptive: the piece with
/// the largest error estimate is halved until the summed estimate meets `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let mut pieces = vec![rule(f, a, b, tol)];
    loop {
        let total: f64 = pieces.iter().map(|p| p.err).sum();
        if total <= tol {
            return Ok(pieces.iter().map(|p| p.value).sum());
        }
        if pieces.len() >= MAX_PIECES {
            return Err(Error::Numerical(format!(
                "quadrature on [{a}, {b}] stuck at error {total:.3e} (target {tol:.3e})"
            )));
        }
        let worst = (0..pieces.len())
            .max_by(|&i, &j| pieces[i].err.total_cmp(&pieces[j].err))
            .unwrap_or(0);
        let p = pieces.swap_remove(worst);
        let m = 0.5 * (p.a + p.b);
        if !(m > p.a && m < p.b) {
            // nothing left to split
            if !p.value.is_finite() {
                return Err(Error::Numerical(format!(
                    "quadrature hit a non-finite value near {}",
                    p.a
                )));
            }
            pieces.push(Piece { err: 0.0, ..p });
            continue;
        }
        let sub = 0.5 * tol;
        pieces.push(rule(f, p.a, m, sub));
        pieces.push(rule(f, m, p.b, sub));
    }
}

/// `∫_a^∞ f` through `z = a + t/(1-t)`.
pub fn integrate_to_inf<F: Fn(f64) -> f64>(f: &F, a: f64, tol: f64) -> Result<f64> {
    let g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let s = 1.0 - t;
        let v = f(a + t / s) / (s * s);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(&g, 0.0, 1.0, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_tail() {
        let v = integrate_to_inf(&|z: f64| (-z).exp(), 0.0, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-11);
    }

    #[test]
    fn slow_decay_with_small_rate() {
        // ∫ e^{-hz}/(1+z)^2 for tiny h is close to 1
        let h = 1e-6;
        let v = integrate_to_inf(
            &|z: f64| (-h * z).exp() / ((1.0 + z) * (1.0 + z)),
            0.0,
            1e-10,
        )
        .unwrap();
        assert!((v - 1.0).abs() < 2e-5);
    }

    #[test]
    fn log_singularity() {
        let v = integrate(&|x: f64| x.ln(), 0.0, 1.0, 1e-12).unwrap();
        assert!((v + 1.0).abs() < 1e-11);
    }
}
