//! Backtracking gradient descent on configuration space and classification
//! of the critical points it lands on.

use crate::error::{Error, Result};
use crate::fields::{Chirality, Configuration, SpinorField};
use crate::functional::{sw_eval, sw_gradient};
use crate::hodge::coulomb_gauge_fix;
use crate::spectral::{morse_index, reducible_kernel};

const ARMIJO_C1: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowParams {
    /// Initial trial step; it adapts afterwards.
    pub step: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
    /// Coulomb re-gauging period in iterations, 0 to disable.
    pub regauge_every: usize,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams {
            step: 0.01,
            max_iters: 20_000,
            grad_tol: 1e-9,
            regauge_every: 100,
        }
    }
}

impl FlowParams {
    pub fn validate(&self) -> Result<()> {
        if !self.step.is_finite()
            || self.step <= 0.0
            || self.grad_tol.is_nan()
            || self.grad_tol <= 0.0
        {
            return Err(Error::Config(
                "flow step and grad_tol must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowRecord {
    pub iteration: usize,
    pub energy: f64,
    pub grad_norm: f64,
    pub phi_norm: f64,
    /// Step length accepted to reach this record (0 for the start).
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowStatus {
    Converged,
    MaxIters,
    Diverged,
}

impl FlowStatus {
    pub fn name(&self) -> &'static str {
        match self {
            FlowStatus::Converged => "converged",
            FlowStatus::MaxIters => "max_iters",
            FlowStatus::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone)]
pub struct FlowTrace {
    pub records: Vec<FlowRecord>,
    pub terminal: Configuration,
    pub status: FlowStatus,
    /// Iterations after which the configuration was moved to Coulomb gauge.
    pub regauged_at: Vec<usize>,
}

impl FlowTrace {
    pub fn last(&self) -> &FlowRecord {
        self.records.last().expect("trace has the starting record")
    }
}

fn record(
    c: &Configuration,
    iteration: usize,
    step: f64,
) -> (FlowRecord, crate::functional::GradientPair) {
    let g = sw_gradient(c);
    let r = FlowRecord {
        iteration,
        energy: sw_eval(c).total,
        grad_norm: g.norm(),
        phi_norm: c.phi.norm(),
        step,
    };
    (r, g)
}

fn stepped(c: &Configuration, g: &crate::functional::GradientPair, s: f64) -> Configuration {
    let mut out = c.clone();
    out.a.axpy(-s, &g.grad_a).expect("same shape");
    out.phi.axpy(-s, &g.grad_phi).expect("same shape");
    out
}

/// Gradient descent with Armijo backtracking. A step is accepted when it
/// gives sufficient decrease, or, once the energy differences are at the
/// rounding level, when the energy does not rise and the gradient shrinks.
pub fn descend(c0: &Configuration, p: &FlowParams) -> Result<FlowTrace> {
    p.validate()?;
    let mut c = c0.clone();
    let (mut current, mut grad) = record(&c, 0, 0.0);
    let mut records = vec![current];
    let mut regauged_at = Vec::new();
    let mut step = p.step;
    let mut status = FlowStatus::MaxIters;

    for iter in 1..=p.max_iters {
        if current.grad_norm <= p.grad_tol {
            status = FlowStatus::Converged;
            break;
        }
        let g2 = current.grad_norm * current.grad_norm;
        let mut s = step;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial = stepped(&c, &grad, s);
            let e = sw_eval(&trial).total;
            if e.is_finite() {
                let armijo = e <= current.energy - ARMIJO_C1 * s * g2;
                let flat = e <= current.energy && sw_gradient(&trial).norm() < current.grad_norm;
                if armijo || flat {
                    accepted = Some(trial);
                    break;
                }
            }
            s *= BACKTRACK;
        }
        let Some(next) = accepted else {
            status = FlowStatus::Diverged;
            break;
        };
        c = next;
        if p.regauge_every > 0 && iter % p.regauge_every == 0 {
            c = coulomb_gauge_fix(&c)?.0;
            regauged_at.push(iter);
        }
        (current, grad) = record(&c, iter, s);
        records.push(current);
        step = (2.0 * s).min(64.0 * p.step);
    }
    if status == FlowStatus::MaxIters && current.grad_norm <= p.grad_tol {
        status = FlowStatus::Converged;
    }
    Ok(FlowTrace {
        records,
        terminal: c,
        status,
        regauged_at,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalPointClass {
    /// Reducible, index 0, kernel on the Coulomb slice equal to `b₁`.
    ReducibleMorseBott,
    /// Reducible with a negative eigenspace of the given real dimension.
    ReducibleIndexed(usize),
    /// Reducible, index 0, but with harmonic spinors enlarging the kernel.
    ReducibleDegenerate {
        kernel_dim: usize,
    },
    Irreducible,
    NotCritical,
}

impl CriticalPointClass {
    pub fn name(&self) -> &'static str {
        match self {
            CriticalPointClass::ReducibleMorseBott => "reducible_morse_bott",
            CriticalPointClass::ReducibleIndexed(_) => "reducible_indexed",
            CriticalPointClass::ReducibleDegenerate { .. } => "reducible_degenerate",
            CriticalPointClass::Irreducible => "irreducible",
            CriticalPointClass::NotCritical => "not_critical",
        }
    }
}

/// Gradient norm below which a point counts as critical.
pub const CRITICAL_TOL: f64 = 1e-8;
/// Spinor norm below which a critical point is treated as reducible; the
/// spectral analysis is then carried out at `(a, 0)`.
pub const REDUCIBLE_TOL: f64 = 1e-6;

pub fn classify_critical_point(c: &Configuration, tau: Option<f64>) -> Result<CriticalPointClass> {
    if sw_gradient(c).norm() > CRITICAL_TOL {
        return Ok(CriticalPointClass::NotCritical);
    }
    if c.phi.norm() > REDUCIBLE_TOL {
        return Ok(CriticalPointClass::Irreducible);
    }
    let mut reducible = c.clone();
    reducible.phi = SpinorField::zeros(c.lattice(), Chirality::Plus);
    if sw_gradient(&reducible).norm() > CRITICAL_TOL {
        return Ok(CriticalPointClass::NotCritical);
    }
    let index = morse_index(&reducible, tau)?.morse_index;
    if index > 0 {
        return Ok(CriticalPointClass::ReducibleIndexed(index));
    }
    let kernel = reducible_kernel(&reducible, tau)?;
    if kernel.spinor == 0 {
        Ok(CriticalPointClass::ReducibleMorseBott)
    } else {
        Ok(CriticalPointClass::ReducibleDegenerate {
            kernel_dim: kernel.total(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{gauge_apply, BundleData, GaugeTransform, C64};
    use crate::hodge::holonomy_coordinates;
    use crate::lattice::{d_star, Lattice};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lat(n: usize) -> Lattice {
        Lattice::new(n, 1.0).unwrap()
    }

    fn monotone(t: &FlowTrace) -> bool {
        t.records.windows(2).all(|w| w[1].energy <= w[0].energy)
    }

    #[test]
    fn critical_start_converges_immediately() {
        let c = Configuration::reducible_zero(BundleData::trivial(lat(2), 1.0));
        let t = descend(&c, &FlowParams::default()).unwrap();
        assert_eq!(t.status, FlowStatus::Converged);
        assert_eq!(t.records.len(), 1);
    }

    #[test]
    fn positive_kg_collapses_the_spinor() {
        let l = lat(3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..3 {
            let c = Configuration::random(BundleData::trivial(l, 1.0), 0.5, 0.5, &mut rng);
            let t = descend(&c, &FlowParams::default()).unwrap();
            assert_eq!(t.status, FlowStatus::Converged);
            assert!(monotone(&t));
            assert!(t.terminal.phi.norm() <= 1e-6);
            assert!(d_star(&t.terminal.curvature()).unwrap().max_abs() <= 1e-8);
        }
    }

    #[test]
    fn negative_kg_escapes_the_reducible_point() {
        let l = lat(2);
        let mut c = Configuration::reducible_zero(BundleData::trivial(l, -1.0));
        let eps = [C64::new(1e-3, 0.0), C64::new(0.0, 0.0)];
        c.phi = SpinorField::constant(l, Chirality::Plus, eps);
        let t = descend(&c, &FlowParams::default()).unwrap();
        assert!(t.records[1].energy < t.records[0].energy);
        assert!(t.records[0].energy < 0.0);
        assert!(t.terminal.phi.norm() > 0.1);
        // the minimum of ⅛ρ² - ¼ρ sits at ρ = |φ|² = 1
        for r in t.terminal.phi.density() {
            assert!((r - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn regauging_is_recorded_and_keeps_coulomb_gauge() {
        let l = lat(2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = Configuration::random(BundleData::trivial(l, 0.5), 0.5, 0.5, &mut rng);
        let p = FlowParams {
            regauge_every: 7,
            max_iters: 21,
            ..FlowParams::default()
        };
        let t = descend(&c, &p).unwrap();
        assert_eq!(t.regauged_at, vec![7, 14, 21]);
        assert!(d_star(&t.terminal.a).unwrap().max_abs() < 1e-10);
        assert!(monotone(&t));
    }

    #[test]
    fn flow_is_gauge_equivariant() {
        let l = lat(2);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c = Configuration::random(BundleData::trivial(l, 1.0), 0.4, 0.4, &mut rng);
        let g = GaugeTransform::random(l, 1.0, &mut rng);
        let p = FlowParams::default();
        let t1 = descend(&c, &p).unwrap();
        let t2 = descend(&gauge_apply(&g, &c).unwrap(), &p).unwrap();
        assert!((t1.last().energy - t2.last().energy).abs() <= 1e-8);
        assert!((t1.last().phi_norm - t2.last().phi_norm).abs() <= 1e-8);
        let (j1, j2) = (
            holonomy_coordinates(&t1.terminal.a).unwrap(),
            holonomy_coordinates(&t2.terminal.a).unwrap(),
        );
        assert!(j1.distance(&j2) <= 1e-8);
    }

    #[test]
    fn invalid_params_are_rejected() {
        let c = Configuration::reducible_zero(BundleData::trivial(lat(2), 1.0));
        assert!(descend(
            &c,
            &FlowParams {
                step: 0.0,
                ..FlowParams::default()
            }
        )
        .is_err());
    }

    #[test]
    fn classification_examples() {
        let l = lat(2);
        let pos = Configuration::reducible_zero(BundleData::trivial(l, 1.0));
        assert_eq!(
            classify_critical_point(&pos, None).unwrap(),
            CriticalPointClass::ReducibleMorseBott
        );
        let neg = Configuration::reducible_zero(BundleData::trivial(l, -1.0));
        assert_eq!(
            classify_critical_point(&neg, None).unwrap(),
            CriticalPointClass::ReducibleIndexed(4)
        );
        let zero = Configuration::reducible_zero(BundleData::trivial(l, 0.0));
        assert_eq!(
            classify_critical_point(&zero, None).unwrap(),
            CriticalPointClass::ReducibleDegenerate { kernel_dim: 8 }
        );
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let random = Configuration::random(BundleData::trivial(l, 1.0), 0.5, 0.5, &mut rng);
        assert_eq!(
            classify_critical_point(&random, None).unwrap(),
            CriticalPointClass::NotCritical
        );
    }

    #[test]
    fn escaped_minimum_is_irreducible() {
        let l = lat(2);
        let mut c = Configuration::reducible_zero(BundleData::trivial(l, -1.0));
        c.phi = SpinorField::constant(l, Chirality::Plus, [C64::new(0.0, 1.0), C64::new(0.0, 0.0)]);
        assert!(sw_gradient(&c).norm() < 1e-12);
        assert_eq!(
            classify_critical_point(&c, None).unwrap(),
            CriticalPointClass::Irreducible
        );
    }
}
