//! Eigenvalue reports for the reducible Hessian blocks and the Morse index
//! of reducible points.
//!
//! All dimensions are real dimensions: a complex spinor mode counts twice
//! per component. Counting uses a zero threshold `τ`; an eigenvalue lying in
//! the band `τ/2 ≤ |λ| ≤ 2τ` makes the count ambiguous and is refused.

use crate::error::{Error, Result};
use crate::fields::Configuration;
use crate::hessian::{reducible_blocks, HessianOperator, ReducibleBlocks, DENSE_CAP};
use crate::lattice::{hodge_laplacian, Cochain};
use crate::linalg::{self, materialize, symmetric_eigen, LanczosParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    Dense,
    Lanczos,
}

impl Solver {
    pub fn name(&self) -> &'static str {
        match self {
            Solver::Dense => "dense",
            Solver::Lanczos => "lanczos",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    /// Ascending, with multiplicity.
    pub eigenvalues: Vec<f64>,
    pub morse_index: usize,
    pub kernel_dim: usize,
    pub zero_threshold: f64,
    pub solver: Solver,
    pub iterations: usize,
    /// `‖L x - λ x‖` for each reported pair, eigenvectors normalized.
    pub residuals: Vec<f64>,
    /// Real dimension of the space the operator acts on.
    pub dimension: usize,
}

impl SpectralReport {
    fn build(
        eigenvalues: Vec<f64>,
        residuals: Vec<f64>,
        tau: f64,
        solver: Solver,
        iterations: usize,
        dimension: usize,
    ) -> Self {
        let morse_index = eigenvalues.iter().filter(|l| **l < -tau).count();
        let kernel_dim = eigenvalues.iter().filter(|l| l.abs() <= tau).count();
        SpectralReport {
            eigenvalues,
            morse_index,
            kernel_dim,
            zero_threshold: tau,
            solver,
            iterations,
            residuals,
            dimension,
        }
    }

    /// Recount with a different threshold.
    pub fn recount(&self, tau: f64) -> SpectralReport {
        SpectralReport::build(
            self.eigenvalues.clone(),
            self.residuals.clone(),
            tau,
            self.solver,
            self.iterations,
            self.dimension,
        )
    }

    /// Refuse counts when an eigenvalue sits too close to the threshold.
    pub fn check_unambiguous(&self) -> Result<()> {
        let tau = self.zero_threshold;
        for &l in &self.eigenvalues {
            if l.abs() >= 0.5 * tau && l.abs() <= 2.0 * tau {
                return Err(Error::AmbiguousIndex { eigenvalue: l, tau });
            }
        }
        Ok(())
    }

    pub fn lowest(&self) -> Option<f64> {
        self.eigenvalues.first().copied()
    }
}

/// `1e-8 · max(1, scale)`.
pub fn default_tau(scale: f64) -> f64 {
    1e-8 * scale.abs().max(1.0)
}

/// Full spectrum by materializing the operator on basis vectors.
pub fn dense_spectrum<F>(op: F, dim: usize, tau: Option<f64>) -> Result<SpectralReport>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if dim > DENSE_CAP {
        return Err(Error::DimensionCap {
            dim,
            cap: DENSE_CAP,
        });
    }
    let m = materialize(dim, &op);
    let (values, vectors) = symmetric_eigen(m.clone(), 1e-10)?;
    let mv = &m * &vectors;
    let residuals = (0..dim)
        .map(|j| {
            let mut r = 0.0;
            for i in 0..dim {
                let x = mv[(i, j)] - values[j] * vectors[(i, j)];
                r += x * x;
            }
            r.sqrt()
        })
        .collect();
    let scale = values.iter().fold(0.0f64, |acc, l| acc.max(l.abs()));
    let tau = tau.unwrap_or_else(|| default_tau(scale));
    Ok(SpectralReport::build(
        values,
        residuals,
        tau,
        Solver::Dense,
        dim,
        dim,
    ))
}

/// The `k` lowest eigenvalues by restarted Lanczos with locking.
pub fn lanczos_lowest<F>(
    op: F,
    dim: usize,
    k: usize,
    tol: f64,
    tau: Option<f64>,
) -> Result<SpectralReport>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let params = LanczosParams {
        tol,
        ..LanczosParams::default()
    };
    let out = linalg::lanczos_lowest(op, dim, k, params)?;
    let scale = out.values.iter().fold(0.0f64, |acc, l| acc.max(l.abs()));
    let tau = tau.unwrap_or_else(|| default_tau(scale));
    Ok(SpectralReport::build(
        out.values,
        out.residuals,
        tau,
        Solver::Lanczos,
        out.iterations,
        dim,
    ))
}

/// Upper estimate of the spectrum of `L_A`: `16/h² + max|k_g|/4`.
pub fn spinor_block_scale(blocks: &ReducibleBlocks) -> f64 {
    let h = blocks.lattice().spacing();
    16.0 / (h * h) + 0.25 * blocks.kg_max_abs()
}

fn blocks_of(c: &Configuration) -> Result<ReducibleBlocks> {
    reducible_blocks(&HessianOperator::new(c))
}

/// Lowest part of the `L_A` spectrum, extended until it passes `above`.
fn spinor_spectrum_until(blocks: &ReducibleBlocks, above: f64, tau: f64) -> Result<SpectralReport> {
    let dim = blocks.spinor_dim();
    if dim <= DENSE_CAP {
        return dense_spectrum(|x| blocks.spinor_block_real(x), dim, Some(tau));
    }
    let mut k = 16.min(dim);
    loop {
        let report = lanczos_lowest(|x| blocks.spinor_block_real(x), dim, k, 1e-10, Some(tau))?;
        if report.eigenvalues.last().is_some_and(|l| *l > above) || k == dim {
            return Ok(report);
        }
        k = (2 * k).min(dim);
    }
}

fn assert_gauge_block_psd(blocks: &ReducibleBlocks, tau: f64) -> Result<()> {
    let dim = blocks.gauge_dim();
    let lowest = if dim <= DENSE_CAP {
        dense_spectrum(|x| blocks.gauge_block_real(x), dim, Some(tau))?.lowest()
    } else {
        lanczos_lowest(|x| blocks.gauge_block_real(x), dim, 1, 1e-10, Some(tau))?.lowest()
    };
    match lowest {
        Some(l) if l < -tau => Err(Error::BoundViolated {
            eigenvalue: l,
            bound: 0.0,
        }),
        _ => Ok(()),
    }
}

/// Morse index of a reducible point: the real dimension of the negative
/// eigenspace of `L_A`. The returned report covers every eigenvalue up to the
/// first one above `τ`, so the count comes with its gap certificate.
pub fn morse_index(c: &Configuration, tau: Option<f64>) -> Result<SpectralReport> {
    let blocks = blocks_of(c)?;
    let tau = tau.unwrap_or_else(|| default_tau(spinor_block_scale(&blocks)));
    assert_gauge_block_psd(&blocks, tau)?;
    let report = spinor_spectrum_until(&blocks, 2.0 * tau, tau)?;
    report.check_unambiguous()?;
    Ok(report)
}

/// Kernel accounting at a reducible point on the Coulomb slice `d*θ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReducibleKernel {
    /// Kernel of the gauge block on the slice, i.e. harmonic 1-cochains.
    pub gauge: usize,
    /// Kernel of `L_A`, real dimension.
    pub spinor: usize,
}

impl ReducibleKernel {
    pub fn total(&self) -> usize {
        self.gauge + self.spinor
    }
}

/// On `ker d*` the gauge block `2 d*d` agrees with `2 (dd* + d*d)`, whose
/// kernel on all of the 1-cochains is the harmonic space.
pub fn reducible_kernel(c: &Configuration, tau: Option<f64>) -> Result<ReducibleKernel> {
    let blocks = blocks_of(c)?;
    let lat = blocks.lattice();
    let tau = tau.unwrap_or_else(|| default_tau(spinor_block_scale(&blocks)));
    let dim = blocks.gauge_dim();
    let hodge = |x: &[f64]| {
        let v = Cochain::from_values(lat, 1, x.to_vec()).expect("edge-sized vector");
        hodge_laplacian(&v)
            .expect("degree 1")
            .scaled(2.0)
            .into_values()
    };
    let gauge = if dim <= DENSE_CAP {
        dense_spectrum(hodge, dim, Some(tau))?
    } else {
        let mut k = 8;
        loop {
            let r = lanczos_lowest(hodge, dim, k, 1e-10, Some(tau))?;
            if r.eigenvalues.last().is_some_and(|l| *l > 2.0 * tau) {
                break r;
            }
            k *= 2;
        }
    };
    gauge.check_unambiguous()?;
    let spinor = spinor_spectrum_until(&blocks, 2.0 * tau, tau)?;
    spinor.check_unambiguous()?;
    Ok(ReducibleKernel {
        gauge: gauge.kernel_dim,
        spinor: spinor.kernel_dim,
    })
}

/// Certified lower bound `min k_g / 4` for the spectrum of `L_A`, checked
/// against the `probe_count` lowest computed eigenvalues.
pub fn spectrum_bounded_below_check(c: &Configuration, probe_count: usize) -> Result<f64> {
    let blocks = blocks_of(c)?;
    let bound = 0.25 * blocks.kg_min();
    let dim = blocks.spinor_dim();
    let report = if dim <= DENSE_CAP {
        dense_spectrum(|x| blocks.spinor_block_real(x), dim, None)?
    } else {
        lanczos_lowest(
            |x| blocks.spinor_block_real(x),
            dim,
            probe_count.clamp(1, dim),
            1e-10,
            None,
        )?
    };
    for &l in report.eigenvalues.iter().take(probe_count.max(1)) {
        if l < bound - 1e-10 {
            return Err(Error::BoundViolated {
                eigenvalue: l,
                bound,
            });
        }
    }
    Ok(bound)
}
