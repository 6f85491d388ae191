//! Special functions and the exact comparison probability of two correlated
//! complex Gaussian magnitudes that share a single scalar noise term.
//!
//! For `X = mu_x + q_x n` and `Y = mu_y + q_y n` with one `n ~ CN(0, 1)`,
//! the event `|X|² > |Y|²` is a quadratic inequality in `n`. Completing the
//! square turns it into a disc (or disc complement) event for a shifted
//! noise `Z = n + lambda`, whose squared magnitude is noncentral chi-square
//! with two degrees of freedom, so the probability is a first-order Marcum Q.
//! When `|q_x| = |q_y|` the quadratic term cancels and the event becomes a
//! half-plane for a real Gaussian `V`, which yields an `erf`.
//!
//! `n` has unit *total* variance (each real dimension has variance 1/2), so
//! the disc parameters enter the standard Marcum function scaled by `√2`.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance on `| |q_y|² − |q_x|² |` below which the equal-variance
/// (erf) branch is used.
pub const BRANCH_EPS: f64 = 1e-9;

/// Above this value of `a·b` the modified-Bessel series is replaced by the
/// large-argument integral.
const SERIES_MAX_Z: f64 = 1e4;

/// Beyond this many standard deviations the Marcum Q function is exactly
/// 0 or 1 in double precision.
const TAIL_CUTOFF: f64 = 40.0;

/// The four complex scalars that define `X = mu_x + q_x n` and
/// `Y = mu_y + q_y n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PepParams {
    pub mu_x: Complex64,
    pub q_x: Complex64,
    pub mu_y: Complex64,
    pub q_y: Complex64,
}

impl PepParams {
    pub fn new(mu_x: Complex64, q_x: Complex64, mu_y: Complex64, q_y: Complex64) -> Result<Self> {
        let p = PepParams {
            mu_x,
            q_x,
            mu_y,
            q_y,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.mu_x, self.q_x, self.mu_y, self.q_y]
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite());
        if finite {
            Ok(())
        } else {
            Err(Error::Domain(format!("non-finite PEP parameters {self:?}")))
        }
    }

    /// Parameters of the reversed comparison `Pr(|Y|² > |X|²)`.
    pub fn swapped(&self) -> Self {
        PepParams {
            mu_x: self.mu_y,
            q_x: self.q_y,
            mu_y: self.mu_x,
            q_y: self.q_x,
        }
    }

    /// Multiplies every parameter by `c`.
    pub fn scaled(&self, c: Complex64) -> Self {
        PepParams {
            mu_x: self.mu_x * c,
            q_x: self.q_x * c,
            mu_y: self.mu_y * c,
            q_y: self.q_y * c,
        }
    }
}

/// Which closed form applies to a given pair of noise coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// `|q_y|² > |q_x|²`: the event is `|Z|²` inside a disc, `1 − Q1`.
    MarcumComplement,
    /// `|q_y|² < |q_x|²`: the event is `|Z|²` outside a disc, `Q1`.
    Marcum,
    /// `|q_y|² = |q_x|²` (within [`BRANCH_EPS`]): a half-plane event, `erf`.
    Erf,
}

pub fn branch_select(q_x: Complex64, q_y: Complex64) -> Branch {
    let vx = q_x.norm_sqr();
    let vy = q_y.norm_sqr();
    if (vy - vx).abs() <= BRANCH_EPS * vx.max(vy) {
        Branch::Erf
    } else if vy > vx {
        Branch::MarcumComplement
    } else {
        Branch::Marcum
    }
}

/// Standard error function.
pub fn erf_real(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("erf of non-finite argument {x}")));
    }
    Ok(libm::erf(x))
}

/// First-order Marcum Q function `Q1(a, b)`: the probability that a Rician
/// variable with noncentrality `a` and unit per-dimension variance exceeds `b`.
pub fn marcum_q1(a: f64, b: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || a < 0.0 || b < 0.0 {
        return Err(Error::Domain(format!(
            "Marcum Q requires finite nonnegative arguments, got a={a}, b={b}"
        )));
    }
    Ok(marcum_q1_with_gap(a, b, b - a))
}

/// `Q1(a, b)` with the difference `b − a` supplied by the caller, which may
/// know it without cancellation.
fn marcum_q1_with_gap(a: f64, b: f64, gap: f64) -> f64 {
    if b == 0.0 {
        return 1.0;
    }
    if a == 0.0 {
        return (-0.5 * b * b).exp();
    }
    if gap > TAIL_CUTOFF {
        return 0.0;
    }
    if gap < -TAIL_CUTOFF {
        return 1.0;
    }
    let z = a * b;
    let q = if z <= SERIES_MAX_Z {
        marcum_series(a, b, gap, z)
    } else {
        marcum_large_argument(a, gap)
    };
    q.clamp(0.0, 1.0)
}

/// Neumann-series evaluation:
///
/// `a < b`:  `Q1 = e^{-(b-a)²/2} Σ_{k≥0} (a/b)^k Î_k(ab)`
/// `a ≥ b`:  `Q1 = 1 − e^{-(b-a)²/2} Σ_{k≥1} (b/a)^k Î_k(ab)`
///
/// where `Î_k(z) = e^{-z} I_k(z)`. The Bessel ladder is produced by Miller's
/// backward recurrence normalized with `Î_0 + 2 Σ Î_k = 1`.
fn marcum_series(a: f64, b: f64, gap: f64, z: f64) -> f64 {
    let below = a < b;
    let ratio = if below { a / b } else { b / a };
    let envelope = (-0.5 * gap * gap).exp();

    if z < 1e-10 {
        // Only Î_0 ≈ e^{-z} and Î_1 ≈ e^{-z} z/2 survive.
        let e = (-z).exp();
        return if below {
            envelope * e * (1.0 + ratio * 0.5 * z)
        } else {
            1.0 - envelope * e * ratio * 0.5 * z
        };
    }

    // Î_k(z) ~ exp(-k²/2z) for k ≪ z and falls faster beyond, so at this
    // depth the dropped terms are far below 1e-15 of the sum.
    let top = 32 + (12.0 * z.sqrt()).ceil() as usize;

    let mut upper = 0.0_f64; // I_{k+1}
    let mut current = 1e-280_f64; // I_k
    let mut norm = 0.0_f64;
    // Horner accumulation of Σ_{j≥k} ratio^{j-k} I_j.
    let mut weighted = 0.0_f64;
    let mut weighted_from_one = 0.0_f64;

    for k in (1..=top).rev() {
        norm += 2.0 * current;
        weighted = current + ratio * weighted;
        if k == 1 {
            weighted_from_one = weighted;
        }
        let lower = (2.0 * k as f64 / z) * current + upper;
        upper = current;
        current = lower;
        if current.abs() > 1e250 {
            const SHRINK: f64 = 1e-250;
            current *= SHRINK;
            upper *= SHRINK;
            norm *= SHRINK;
            weighted *= SHRINK;
            weighted_from_one *= SHRINK;
        }
    }
    // `current` is now I_0.
    norm += current;
    weighted = current + ratio * weighted;

    if below {
        envelope * weighted / norm
    } else {
        1.0 - envelope * ratio * weighted_from_one / norm
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], ten points.
const GL_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_3,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

/// Large-argument regime (`ab > 1e4`, `|b − a| ≤ 40`). With `x = a + t` the
/// Rice tail is `∫ (a+t) e^{-t²/2} Î_0(a(a+t)) dt`, where `Î_0` is replaced
/// by its Hankel expansion (every argument here exceeds 1e4, so four
/// correction terms are exact to double precision).
fn marcum_large_argument(a: f64, gap: f64) -> f64 {
    let integrand = |t: f64| {
        let x = a + t;
        if x <= 0.0 {
            return 0.0;
        }
        let z = a * x;
        let r = 1.0 / (8.0 * z);
        let series = 1.0
            + r * (1.0 + r * (4.5 + r * (37.5 + r * 459.375)));
        x * (-0.5 * t * t).exp() * series / (2.0 * std::f64::consts::PI * z).sqrt()
    };
    if gap >= 0.0 {
        integrate_gl(integrand, gap, gap + TAIL_CUTOFF)
    } else {
        1.0 - integrate_gl(integrand, -TAIL_CUTOFF, gap)
    }
}

fn integrate_gl(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let panels = ((hi - lo) / 0.5).ceil().max(1.0) as usize;
    let width = (hi - lo) / panels as f64;
    let half = 0.5 * width;
    (0..panels)
        .map(|p| {
            let mid = lo + (p as f64 + 0.5) * width;
            GL_NODES
                .iter()
                .zip(GL_WEIGHTS.iter())
                .map(|(&x, &w)| w * (f(mid - half * x) + f(mid + half * x)))
                .sum::<f64>()
                * half
        })
        .sum()
}

/// `Pr(|mu_x + q_x n|² > |mu_y + q_y n|²)` for a single shared `n ~ CN(0, 1)`.
///
/// Identical variables (`X ≡ Y`) give 0.5. When the noise cancels entirely
/// (`|q_x| = |q_y|` and `conj(mu_y) q_y = conj(mu_x) q_x`) the comparison
/// is deterministic and the result is 0, 0.5 or 1 by the sign of
/// `|mu_x|² − |mu_y|²`.
pub fn pr_mag_sq_greater(p: &PepParams) -> Result<f64> {
    p.validate()?;
    Ok(pr_with_branch(p, branch_select(p.q_x, p.q_y)))
}

/// Evaluates the closed form of a specific branch, regardless of which one
/// [`branch_select`] would pick. The Marcum branches require `|q_x| ≠ |q_y|`.
pub fn pr_mag_sq_greater_in_branch(p: &PepParams, branch: Branch) -> Result<f64> {
    p.validate()?;
    if branch != Branch::Erf && p.q_x.norm_sqr() == p.q_y.norm_sqr() {
        return Err(Error::Domain(
            "Marcum branch needs |q_x| != |q_y|".to_string(),
        ));
    }
    Ok(pr_with_branch(p, branch))
}

fn pr_with_branch(p: &PepParams, branch: Branch) -> f64 {
    let PepParams {
        mu_x,
        q_x,
        mu_y,
        q_y,
    } = *p;
    match branch {
        Branch::Erf => {
            let c = mu_y.conj() * q_y - mu_x.conj() * q_x;
            let spread = c.norm();
            let delta = mu_x.norm_sqr() - mu_y.norm_sqr();
            if spread == 0.0 {
                return match delta.partial_cmp(&0.0) {
                    Some(std::cmp::Ordering::Greater) => 1.0,
                    Some(std::cmp::Ordering::Less) => 0.0,
                    _ => 0.5,
                };
            }
            0.5 * (1.0 + libm::erf(delta / (2.0 * spread)))
        }
        Branch::MarcumComplement | Branch::Marcum => {
            let d = q_y.norm_sqr() - q_x.norm_sqr();
            let centre = ((mu_y * q_y.conj() - mu_x * q_x.conj()) / d).norm();
            let radius = ((mu_x * q_y - q_x * mu_y) / d).norm();
            let a = SQRT_2 * centre;
            let b = SQRT_2 * radius;
            // b² − a² = 2(|mu_x|² − |mu_y|²)/d, so b − a is available
            // without cancellation.
            let gap = if a + b > 0.0 {
                2.0 * (mu_x.norm_sqr() - mu_y.norm_sqr()) / (d * (a + b))
            } else {
                0.0
            };
            let q = marcum_q1_with_gap(a, b, gap);
            if branch == Branch::MarcumComplement {
                1.0 - q
            } else {
                q
            }
        }
    }
}
