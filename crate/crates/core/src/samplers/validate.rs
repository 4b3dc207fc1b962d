//! Symbolic check of the step-size, bandwidth and mixture-rate conditions
//! under which the policy converges.
//!
//! Sequences are described by their asymptotic form. With `p = 1` when
//! `eta >= 1/2` and `p = 2 (1 - eta)` otherwise, the ratio
//! `n gamma_n^2 log n / (lambda_n^p b_n^(d p))` must vanish; for power laws
//! this reduces to the sign of a polynomial exponent, with the log exponent
//! breaking ties.

use std::fmt;

const EXP_TOL: f64 = 1e-12;

/// Asymptotic form of a positive sequence indexed by `n >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub enum Decay {
    /// `scale * n^(-exponent) * (log n)^log_power`.
    PowerLaw { scale: f64, exponent: f64, log_power: f64 },
    /// `scale / log n`.
    InverseLog { scale: f64 },
    /// A family the validator cannot reason about.
    Other(String),
}

impl Decay {
    pub fn power(scale: f64, exponent: f64) -> Self {
        Self::PowerLaw { scale, exponent, log_power: 0.0 }
    }

    pub fn constant(value: f64) -> Self {
        Self::power(value, 0.0)
    }

    /// `(n exponent, log exponent)` of the sequence.
    fn exponents(&self) -> Option<(f64, f64)> {
        match *self {
            Self::PowerLaw { exponent, log_power, .. } => Some((-exponent, log_power)),
            Self::InverseLog { .. } => Some((0.0, -1.0)),
            Self::Other(_) => None,
        }
    }

    fn scale(&self) -> Option<f64> {
        match *self {
            Self::PowerLaw { scale, .. } | Self::InverseLog { scale } => Some(scale),
            Self::Other(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleDescriptor {
    pub gamma: Decay,
    pub bandwidth: Decay,
    pub lambda: Decay,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Indeterminate,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub outcome: Outcome,
    pub detail: String,
}

/// Overall result: the first check that does not pass decides.
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Pass,
    Fail(String),
    Indeterminate(String),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Self::Pass)
    }

    pub fn outcome(&self) -> Outcome {
        match self {
            Self::Pass => Outcome::Pass,
            Self::Fail(_) => Outcome::Fail,
            Self::Indeterminate(_) => Outcome::Indeterminate,
        }
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            Self::Pass => None,
            Self::Fail(r) | Self::Indeterminate(r) => Some(r),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Pass => f.write_str("pass"),
            Self::Fail(r) => write!(f, "fail: {r}"),
            Self::Indeterminate(r) => write!(f, "indeterminate: {r}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub verdict: Verdict,
    pub checks: Vec<Check>,
}

fn check(name: &'static str, outcome: Outcome, detail: impl Into<String>) -> Check {
    Check { name, outcome, detail: detail.into() }
}

fn decreasing_to_zero(name: &'static str, seq: &Decay) -> Check {
    match *seq {
        Decay::Other(ref what) => check(name, Outcome::Indeterminate, format!("unsupported family: {what}")),
        _ if !(seq.scale().unwrap() > 0.0) => check(name, Outcome::Fail, "scale must be positive"),
        Decay::InverseLog { .. } => check(name, Outcome::Pass, "1/log n decreases to 0"),
        Decay::PowerLaw { exponent, log_power, .. } => {
            if exponent > EXP_TOL || (exponent.abs() <= EXP_TOL && log_power < 0.0) {
                check(name, Outcome::Pass, "decreases to 0")
            } else {
                check(name, Outcome::Fail, "not decreasing to 0")
            }
        }
    }
}

fn step_size_condition(gamma: &Decay) -> Check {
    const NAME: &str = "step size";
    let Decay::PowerLaw { scale, exponent: a, log_power: k } = *gamma else {
        return match gamma {
            Decay::InverseLog { .. } => check(NAME, Outcome::Fail, "sum of gamma_n^2 diverges for 1/log n"),
            _ => check(NAME, Outcome::Indeterminate, "gamma is not a power law"),
        };
    };
    if a < 0.5 - EXP_TOL || ((a - 0.5).abs() <= EXP_TOL && k >= -0.5) {
        return check(NAME, Outcome::Fail, format!("sum of gamma_n^2 diverges (alpha = {a})"));
    }
    if (a - 0.5).abs() <= EXP_TOL {
        return check(NAME, Outcome::Fail, "alpha = 1/2 is outside (1/2, 1]");
    }
    if a < 1.0 - EXP_TOL {
        return check(NAME, Outcome::Pass, format!("alpha = {a} in (1/2, 1)"));
    }
    if a > 1.0 + EXP_TOL {
        return check(NAME, Outcome::Fail, format!("alpha = {a} > 1: sum of gamma_n converges"));
    }
    if k > 0.0 {
        check(NAME, Outcome::Pass, "alpha = 1 with a growing log factor")
    } else if k < 0.0 {
        check(NAME, Outcome::Fail, "alpha = 1 with a decaying log factor")
    } else if scale > 1.0 {
        check(NAME, Outcome::Pass, format!("alpha = 1 with C = {scale} > 1"))
    } else if scale < 1.0 {
        check(NAME, Outcome::Fail, format!("alpha = 1 with C = {scale} < 1"))
    } else {
        check(
            NAME,
            Outcome::Indeterminate,
            "alpha = 1 with C = 1: the sufficient condition requires C > 1",
        )
    }
}

fn ratio_condition(desc: &ScheduleDescriptor, eta: f64, d: usize) -> Check {
    const NAME: &str = "bandwidth/mixture ratio";
    let (Some((g_n, g_log)), Some((b_n, b_log)), Some((l_n, l_log))) = (
        desc.gamma.exponents(),
        desc.bandwidth.exponents(),
        desc.lambda.exponents(),
    ) else {
        return check(NAME, Outcome::Indeterminate, "unsupported family");
    };
    let p = if eta >= 0.5 { 1.0 } else { 2.0 * (1.0 - eta) };
    let df = d as f64;
    // n gamma^2 log n / (lambda^p b^(d p))
    let e = 1.0 + 2.0 * g_n - p * l_n - df * p * b_n;
    let log_e = 1.0 + 2.0 * g_log - p * l_log - df * p * b_log;
    let detail = format!("p = {p}, n exponent = {e:.6}, log exponent = {log_e:.6}");
    if e < -EXP_TOL || (e.abs() <= EXP_TOL && log_e < 0.0) {
        check(NAME, Outcome::Pass, detail)
    } else {
        check(NAME, Outcome::Fail, format!("ratio does not vanish ({detail})"))
    }
}

/// Checks the convergence conditions for learning rate `eta` in dimension `d`.
pub fn validate_schedule(desc: &ScheduleDescriptor, eta: f64, d: usize) -> ValidationReport {
    let mut checks = vec![
        decreasing_to_zero("gamma decreasing", &desc.gamma),
        decreasing_to_zero("bandwidth decreasing", &desc.bandwidth),
        decreasing_to_zero("lambda decreasing", &desc.lambda),
        step_size_condition(&desc.gamma),
    ];
    if !(eta > 0.0 && eta <= 1.0) || d == 0 {
        checks.push(check("ratio", Outcome::Fail, format!("eta = {eta}, d = {d} out of range")));
    } else {
        checks.push(ratio_condition(desc, eta, d));
    }
    let verdict = checks
        .iter()
        .find(|c| c.outcome != Outcome::Pass)
        .map(|c| {
            let reason = format!("{}: {}", c.name, c.detail);
            match c.outcome {
                Outcome::Fail => Verdict::Fail(reason),
                _ => Verdict::Indeterminate(reason),
            }
        })
        .unwrap_or(Verdict::Pass);
    ValidationReport { verdict, checks }
}
