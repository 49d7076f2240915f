//! Penalty energy `E = F + K * sum(phi(r_i))` over the constraint residuals,
//! its subgradient, and the multiplier-augmented variant.
//!
//! `F` is the cycle time `C_max - S_min` and `phi(x) = max(0, x)^2 / 2`.
//! Disjunctive residuals are oriented by the current start order: for a pair
//! `(a, b)` the op that starts first (ties to the lower flat index) is taken
//! to precede the other.

use thiserror::Error;

use crate::model::{span, ConstraintSet, Instance, Schedule};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnergyError {
    #[error("penalty factor must be positive, got {0}")]
    NonPositivePenalty(f64),
    #[error("dual step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("expected {expected} multipliers/residuals, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyBreakdown {
    pub objective: f64,
    pub residuals: Vec<f64>,
    pub penalty: f64,
    /// `sum(lambda_i * r_i)`; zero for the plain penalty energy.
    pub multiplier_term: f64,
    pub total: f64,
    pub k: f64,
}

/// Lagrange multipliers, one per constraint, and the dual ascent step.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    multipliers: Vec<f64>,
    step: f64,
}

impl DualState {
    pub fn new(len: usize, step: f64) -> Result<Self, EnergyError> {
        Self::with_multipliers(vec![0.0; len], step)
    }

    pub fn with_multipliers(multipliers: Vec<f64>, step: f64) -> Result<Self, EnergyError> {
        if step.is_nan() || step <= 0.0 {
            return Err(EnergyError::NonPositiveStep(step));
        }
        let multipliers = multipliers.into_iter().map(|l| l.max(0.0)).collect();
        Ok(Self { multipliers, step })
    }

    pub fn multipliers(&self) -> &[f64] {
        &self.multipliers
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn set_step(&mut self, step: f64) -> Result<(), EnergyError> {
        if step.is_nan() || step <= 0.0 {
            return Err(EnergyError::NonPositiveStep(step));
        }
        self.step = step;
        Ok(())
    }

    /// Projected ascent in place: `lambda_i = max(0, lambda_i + step * r_i)`.
    pub fn update(&mut self, residuals: &[f64]) -> Result<(), EnergyError> {
        check_len(self.multipliers.len(), residuals.len())?;
        for (l, r) in self.multipliers.iter_mut().zip(residuals) {
            *l = (*l + self.step * r).max(0.0);
        }
        Ok(())
    }
}

pub fn dual_update(d: &DualState, r: &[f64]) -> Result<DualState, EnergyError> {
    let mut next = d.clone();
    next.update(r)?;
    Ok(next)
}

fn check_len(expected: usize, found: usize) -> Result<(), EnergyError> {
    if expected == found {
        Ok(())
    } else {
        Err(EnergyError::DimensionMismatch { expected, found })
    }
}

fn check_k(k: f64) -> Result<(), EnergyError> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(EnergyError::NonPositivePenalty(k))
    }
}

#[inline]
fn phi(x: f64) -> f64 {
    if x > 0.0 {
        0.5 * x * x
    } else {
        0.0
    }
}

/// Oriented disjunctive pair: `(before, after)`.
#[inline]
pub(crate) fn orient(starts: &[f64], a: usize, b: usize) -> (usize, usize) {
    if starts[a] <= starts[b] {
        (a, b)
    } else {
        (b, a)
    }
}

/// Residual of "`u` finishes before `v` starts": `S_u + p_u - S_v`.
#[inline]
fn precedence_residual(inst: &Instance, starts: &[f64], u: usize, v: usize) -> f64 {
    (starts[u] + inst.duration(u)) - starts[v]
}

/// Visits every constraint as `(index, before, after, residual)`.
#[inline]
fn for_each_constraint(
    inst: &Instance,
    cs: &ConstraintSet,
    starts: &[f64],
    mut f: impl FnMut(usize, usize, usize, f64),
) {
    let gamma = cs.gamma();
    for (i, &(u, v)) in cs.conjunctive().iter().enumerate() {
        f(i, u, v, precedence_residual(inst, starts, u, v));
    }
    for (i, &(a, b)) in cs.disjunctive().iter().enumerate() {
        let (u, v) = orient(starts, a, b);
        f(gamma + i, u, v, precedence_residual(inst, starts, u, v));
    }
}

pub fn residuals(inst: &Instance, cs: &ConstraintSet, s: &Schedule) -> Vec<f64> {
    let mut out = vec![0.0; cs.xi()];
    for_each_constraint(inst, cs, s.starts(), |i, _, _, r| out[i] = r);
    out
}

pub fn energy(inst: &Instance, cs: &ConstraintSet, s: &Schedule, k: f64) -> Result<EnergyBreakdown, EnergyError> {
    check_k(k)?;
    let residuals = residuals(inst, cs, s);
    let penalty = residuals.iter().copied().map(phi).sum::<f64>();
    let objective = objective(inst, s);
    Ok(EnergyBreakdown { objective, penalty, multiplier_term: 0.0, total: objective + k * penalty, k, residuals })
}

pub fn lagrangian_energy(
    inst: &Instance,
    cs: &ConstraintSet,
    s: &Schedule,
    d: &DualState,
    k: f64,
) -> Result<EnergyBreakdown, EnergyError> {
    check_len(cs.xi(), d.multipliers.len())?;
    let mut e = energy(inst, cs, s, k)?;
    e.multiplier_term = e.residuals.iter().zip(&d.multipliers).map(|(r, l)| r * l).sum();
    e.total = e.objective + e.multiplier_term + k * e.penalty;
    Ok(e)
}

fn objective(inst: &Instance, s: &Schedule) -> f64 {
    let (lo, hi) = span(inst, s);
    hi - lo
}

/// Allocation-free scalar energy for the solver's inner loop.
pub(crate) fn total_energy(
    inst: &Instance,
    cs: &ConstraintSet,
    s: &Schedule,
    k: f64,
    multipliers: Option<&[f64]>,
) -> f64 {
    let mut penalty = 0.0;
    let mut linear = 0.0;
    for_each_constraint(inst, cs, s.starts(), |i, _, _, r| {
        penalty += phi(r);
        if let Some(l) = multipliers {
            linear += l[i] * r;
        }
    });
    objective(inst, s) + linear + k * penalty
}

/// Writes the (sub)gradient of the energy into `out`.
///
/// The cycle-time part splits `+1` evenly over ops attaining `C_max` and `-1`
/// evenly over ops attaining `S_min`. Each residual is affine with
/// coefficients `+1` on the preceding op and `-1` on the following one.
pub(crate) fn gradient_into(
    inst: &Instance,
    cs: &ConstraintSet,
    s: &Schedule,
    k: f64,
    multipliers: Option<&[f64]>,
    out: &mut [f64],
) {
    let starts = s.starts();
    out.iter_mut().for_each(|g| *g = 0.0);

    let (lo, hi) = span(inst, s);
    let n_max = (0..starts.len()).filter(|&i| starts[i] + inst.duration(i) == hi).count();
    let n_min = starts.iter().filter(|&&st| st == lo).count();
    let (up, down) = (1.0 / n_max as f64, 1.0 / n_min as f64);
    for (i, g) in out.iter_mut().enumerate() {
        if starts[i] + inst.duration(i) == hi {
            *g += up;
        }
        if starts[i] == lo {
            *g -= down;
        }
    }

    for_each_constraint(inst, cs, starts, |i, u, v, r| {
        let mut w = if r > 0.0 { k * r } else { 0.0 };
        if let Some(l) = multipliers {
            w += l[i];
        }
        if w != 0.0 {
            out[u] += w;
            out[v] -= w;
        }
    });
}

pub fn gradient(inst: &Instance, cs: &ConstraintSet, s: &Schedule, k: f64) -> Result<Vec<f64>, EnergyError> {
    check_k(k)?;
    let mut g = vec![0.0; s.len()];
    gradient_into(inst, cs, s, k, None, &mut g);
    Ok(g)
}

/// Gradient of the multiplier-augmented energy.
pub fn lagrangian_gradient(
    inst: &Instance,
    cs: &ConstraintSet,
    s: &Schedule,
    d: &DualState,
    k: f64,
) -> Result<Vec<f64>, EnergyError> {
    check_k(k)?;
    check_len(cs.xi(), d.multipliers.len())?;
    let mut g = vec![0.0; s.len()];
    gradient_into(inst, cs, s, k, Some(&d.multipliers), &mut g);
    Ok(g)
}
