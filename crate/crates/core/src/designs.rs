//! Frame-potential moments of finite groups and unitary t-group certification.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::cyclo::CycNum;
use crate::haar::{haar_moment, mc_haar_estimates};
use crate::matrep::{FiniteMatrixGroup, GroupError};

/// Default largest `t` scanned by [`max_t`] and [`certify`].
pub const DEFAULT_T_CAP: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DesignError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("moment at t = {t} is not a nonnegative integer: {value}")]
    IntegralityViolation { t: usize, value: String },
    #[error("moment equality holds at t = {t} but fails at a smaller t")]
    MonotonicityViolation { t: usize },
    #[error("t must be at least 1")]
    ZeroT,
}

/// One scanned `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentRow {
    pub t: usize,
    pub moment: String,
    pub haar: String,
    pub equal: bool,
}

/// Monte Carlo cross-check of the Haar moment (floating point fields).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRow {
    pub t: usize,
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
    pub within_4_stderr: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub group: String,
    pub dim: usize,
    pub order: String,
    pub rows: Vec<MomentRow>,
    pub t_cap: usize,
    pub max_t: usize,
    pub integrality_verified: bool,
    pub monotonicity_verified: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub monte_carlo: Vec<McRow>,
}

impl MomentReport {
    /// Exact moment at `t`, if scanned.
    pub fn moment(&self, t: usize) -> Option<BigUint> {
        self.rows
            .iter()
            .find(|r| r.t == t)
            .map(|r| r.moment.parse().expect("decimal moment"))
    }
}

/// Monte Carlo options for [`certify`].
#[derive(Debug, Clone, Copy)]
pub struct McOptions {
    pub samples: u64,
    pub seed: u64,
}

fn to_moment(t: usize, sum: &CycNum, order: usize) -> Result<BigUint, DesignError> {
    let bad = || DesignError::IntegralityViolation {
        t,
        value: sum.to_string(),
    };
    let q = sum.as_rational().map_err(|_| bad())?;
    let q = q / BigRational::from_integer(BigInt::from(order));
    if !q.is_integer() || q.is_negative() {
        return Err(DesignError::IntegralityViolation {
            t,
            value: q.to_string(),
        });
    }
    Ok(q.to_integer().to_biguint().expect("nonnegative"))
}

/// `M_{2t}(G)` for every `t` in `1..=t_max`.
pub fn moments(g: &FiniteMatrixGroup, t_max: usize) -> Result<Vec<BigUint>, DesignError> {
    let order = g.order()?;
    let profile = g.trace_profile()?;
    let n = g.conductor();
    let mut sums = vec![CycNum::zero(n); t_max];
    for class in &profile {
        let x = &class.trace * &class.inverse_trace;
        let weighted = CycNum::from_int(class.count as i64);
        let mut p = weighted;
        for s in sums.iter_mut() {
            p = &p * &x;
            *s += &p;
        }
    }
    sums.iter()
        .enumerate()
        .map(|(i, s)| to_moment(i + 1, s, order))
        .collect()
}

/// `M_{2t}(G) = |G|⁻¹ Σ_g (tr g · tr g⁻¹)^t`, checked to be an integer.
pub fn moment(g: &FiniteMatrixGroup, t: usize) -> Result<BigUint, DesignError> {
    if t == 0 {
        return Err(DesignError::ZeroT);
    }
    Ok(moments(g, t)?.pop().expect("t >= 1"))
}

pub fn is_unitary_t_group(g: &FiniteMatrixGroup, t: usize) -> Result<bool, DesignError> {
    Ok(moment(g, t)? == haar_moment(g.dim(), t))
}

/// Largest `t ≤ t_cap` with `M_{2t}(G) = M_{2t}(U_d)`, with the scan report.
pub fn max_t(g: &FiniteMatrixGroup, t_cap: usize) -> Result<(usize, MomentReport), DesignError> {
    let report = certify(g, t_cap, None)?;
    Ok((report.max_t, report))
}

/// Scans `t = 1..=t_cap`, optionally cross-checking the Haar values by
/// Monte Carlo.
pub fn certify(g: &FiniteMatrixGroup, t_cap: usize, mc: Option<McOptions>) -> Result<MomentReport, DesignError> {
    let d = g.dim();
    let ms = moments(g, t_cap)?;
    let mut rows = Vec::with_capacity(t_cap);
    let mut max = 0;
    let mut failed = false;
    for (i, m) in ms.iter().enumerate() {
        let t = i + 1;
        let h = haar_moment(d, t);
        let equal = *m == h;
        if equal {
            if failed {
                return Err(DesignError::MonotonicityViolation { t });
            }
            max = t;
        } else {
            failed = true;
        }
        rows.push(MomentRow {
            t,
            moment: m.to_string(),
            haar: h.to_string(),
            equal,
        });
    }
    let monte_carlo = match mc {
        Some(opts) if t_cap > 0 => {
            let ts: Vec<usize> = (1..=t_cap).collect();
            mc_haar_estimates(d, &ts, opts.samples, opts.seed)
                .into_iter()
                .zip(&rows)
                .map(|(est, row)| {
                    let exact: f64 = row.haar.parse().expect("decimal");
                    McRow {
                        t: row.t,
                        mean: est.mean,
                        stderr: est.stderr,
                        samples: est.samples,
                        seed: opts.seed,
                        within_4_stderr: (est.mean - exact).abs() <= 4.0 * est.stderr,
                    }
                })
                .collect()
        }
        _ => Vec::new(),
    };
    Ok(MomentReport {
        group: g.name().to_string(),
        dim: d,
        order: g.order()?.to_string(),
        rows,
        t_cap,
        max_t: max,
        integrality_verified: true,
        monotonicity_verified: true,
        monte_carlo,
    })
}

/// Inner products `[Sym²χ, Sym²χ]`, `[Sym²χ, ∧²χ]`, `[∧²χ, ∧²χ]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymAlt {
    pub sym_sym: BigUint,
    pub sym_alt: BigUint,
    pub alt_alt: BigUint,
}

pub fn sym_alt_multiplicities(g: &FiniteMatrixGroup) -> Result<SymAlt, DesignError> {
    let order = g.order()?;
    let n = g.conductor();
    let half = CycNum::from_ratio(1, 2);
    let (mut ss, mut sa, mut aa) = (CycNum::zero(n), CycNum::zero(n), CycNum::zero(n));
    for c in g.square_trace_profile()? {
        let a2 = &c.trace * &c.trace;
        let b2 = &c.inverse_trace * &c.inverse_trace;
        let sym = &(&a2 + &c.square_trace) * &half;
        let alt = &(&a2 - &c.square_trace) * &half;
        let sym_inv = &(&b2 + &c.inverse_square_trace) * &half;
        let alt_inv = &(&b2 - &c.inverse_square_trace) * &half;
        let w = CycNum::from_int(c.count as i64);
        ss += &(&w * &(&sym * &sym_inv));
        sa += &(&w * &(&sym * &alt_inv));
        aa += &(&w * &(&alt * &alt_inv));
    }
    Ok(SymAlt {
        sym_sym: to_moment(2, &ss, order)?,
        sym_alt: to_moment(2, &sa, order)?,
        alt_alt: to_moment(2, &aa, order)?,
    })
}
