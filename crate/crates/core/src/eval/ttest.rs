//! Cross-validated paired t-test.
//!
//! The p-value comes from the regularized incomplete beta function
//! (continued-fraction evaluation), which equals the two-tailed Student-t
//! tail mass; tests check it against direct numerical integration of the
//! t density.

use serde::{Deserialize, Serialize};

use super::EvalError;

/// Two-tailed paired t-test outcome over per-fold scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t_statistic: f64,
    pub p_value: f64,
    pub dof: usize,
    /// Set when the differences have zero variance but a nonzero mean: the
    /// statistic degenerates to an infinite t with p = 0.
    pub degenerate: bool,
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation, g = 7, 9 coefficients.
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection formula.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Continued-fraction core of the incomplete beta function (modified Lentz).
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function I_x(a, b).
fn incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

/// Two-tailed p-value of a Student-t statistic with `dof` degrees of
/// freedom: `I_{v/(v+t^2)}(v/2, 1/2)`.
pub fn student_t_two_tailed_p(t: f64, dof: usize) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    let v = dof as f64;
    incomplete_beta(v / 2.0, 0.5, v / (v + t * t)).clamp(0.0, 1.0)
}

/// Paired t-test between two equal-length per-fold score lists.
///
/// `t = mean(d) * sqrt(k) / stddev_sample(d)` over the fold-wise differences.
/// Zero variance with zero mean yields `t = 0, p = 1`; zero variance with a
/// nonzero mean yields `p = 0` with the degeneracy flag set.
pub fn paired_ttest(fscores_a: &[f64], fscores_b: &[f64]) -> Result<TTestResult, EvalError> {
    if fscores_a.len() != fscores_b.len() {
        return Err(EvalError::LengthMismatch {
            left: fscores_a.len(),
            right: fscores_b.len(),
        });
    }
    let k = fscores_a.len();
    if k < 2 {
        return Err(EvalError::TooFewFolds(k));
    }
    let diffs: Vec<f64> = fscores_a
        .iter()
        .zip(fscores_b)
        .map(|(a, b)| a - b)
        .collect();
    let mean = diffs.iter().sum::<f64>() / k as f64;
    let sample_var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (k as f64 - 1.0);
    let dof = k - 1;
    if sample_var == 0.0 {
        return Ok(if mean == 0.0 {
            TTestResult {
                t_statistic: 0.0,
                p_value: 1.0,
                dof,
                degenerate: false,
            }
        } else {
            TTestResult {
                t_statistic: if mean > 0.0 {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                },
                p_value: 0.0,
                dof,
                degenerate: true,
            }
        });
    }
    let t = mean * (k as f64).sqrt() / sample_var.sqrt();
    Ok(TTestResult {
        t_statistic: t,
        p_value: student_t_two_tailed_p(t, dof),
        dof,
        degenerate: false,
    })
}
