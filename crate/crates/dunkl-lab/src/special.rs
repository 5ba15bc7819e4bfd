//! Scalar special functions backing the one-dimensional Dunkl kernel.
//!
//! Everything here is expressed through the *normalized* Bessel functions
//!
//! ```text
//! jn(beta, u) = Gamma(beta+1) (u/2)^{-beta} J_beta(u)
//! in(beta, u) = Gamma(beta+1) (u/2)^{-beta} I_beta(u)
//! ```
//!
//! which are even entire functions of `u` with value 1 at the origin. Power
//! series are used for small arguments; for large arguments `jn` switches to
//! Hankel's asymptotic expansion, which terminates (and is exact) for
//! half-integer orders and is accurate to ~1e-12 for the moderate orders used
//! here. `in_` keeps the series throughout: its terms are positive, so there
//! is no cancellation, only a size guard against overflow.

/// Threshold between the power series and the Hankel expansion for `jn`.
const JN_SERIES_CUTOFF: f64 = 15.0;

/// Largest argument accepted by `in_` before `I_beta(u)` overflows `f64`.
pub const IN_MAX_ARG: f64 = 700.0;

pub(crate) fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Normalized Bessel function of the first kind, `jn(beta, 0) = 1`.
///
/// Valid for `beta >= -0.5`; accuracy degrades for `beta` above ~6, which is
/// far beyond the multiplicities exercised at desk scale.
pub fn normalized_bessel_j(beta: f64, u: f64) -> f64 {
    let u = u.abs();
    if u <= JN_SERIES_CUTOFF {
        jn_series(beta, u)
    } else {
        jn_hankel(beta, u)
    }
}

/// Normalized modified Bessel function, `in(beta, 0) = 1`.
///
/// Returns `None` for `|u| > IN_MAX_ARG` where the value would overflow.
pub fn normalized_bessel_i(beta: f64, u: f64) -> Option<f64> {
    let u = u.abs();
    if u > IN_MAX_ARG {
        return None;
    }
    let q = 0.25 * u * u;
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..600 {
        let nf = n as f64;
        term *= q / ((nf + 1.0) * (beta + 1.0 + nf));
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    Some(sum)
}

fn jn_series(beta: f64, u: f64) -> f64 {
    let q = -0.25 * u * u;
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..400 {
        let nf = n as f64;
        term *= q / ((nf + 1.0) * (beta + 1.0 + nf));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-30) {
            break;
        }
    }
    sum
}

/// Hankel expansion: `J_beta(u) ~ sqrt(2/(pi u)) (P cos chi - Q sin chi)`
/// with `chi = u - (beta/2 + 1/4) pi`. The `P`, `Q` series terminate for
/// half-integer `beta`; otherwise they are truncated at the smallest term.
fn jn_hankel(beta: f64, u: f64) -> f64 {
    let mu = 4.0 * beta * beta;
    let chi = u - (0.5 * beta + 0.25) * std::f64::consts::PI;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut prev = f64::INFINITY;
    for j in 1..40 {
        let jf = j as f64;
        term *= (mu - (2.0 * jf - 1.0) * (2.0 * jf - 1.0)) / (8.0 * jf * u);
        if term == 0.0 || term.abs() > prev {
            break;
        }
        prev = term.abs();
        // j odd -> contributes to Q, j even -> to P, with alternating signs.
        let sign = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if j % 2 == 1 {
            q += sign * term;
        } else {
            p += sign * term;
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let bess = (2.0 / (std::f64::consts::PI * u)).sqrt() * (p * chi.cos() - q * chi.sin());
    gamma(beta + 1.0) * (0.5 * u).powf(-beta) * bess
}
