//! Verification routines shared by the command line and the test suites:
//! finite-difference checks of the gradient and Hessian, and the refinement
//! study of the Weitzenböck identity.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::Result;
use crate::fields::{BundleData, Chirality, Configuration, SpinorField, C64};
use crate::functional::{sw_eval, sw_gradient, weitzenbock_rhs};
use crate::hessian::{HessianOperator, TangentVector};
use crate::lattice::Lattice;

/// Largest relative error between central differences of `sw_eval` and the
/// gradient pairing, over `directions` random directions.
pub fn gradient_fd_check<R: Rng>(
    c: &Configuration,
    step: f64,
    directions: usize,
    rng: &mut R,
) -> f64 {
    let g = sw_gradient(c);
    let mut worst: f64 = 0.0;
    for _ in 0..directions {
        let dir = Configuration::random(c.bundle.clone(), 1.0, 1.0, rng);
        let energy_at = |s: f64| {
            let mut x = c.clone();
            x.a.axpy(s, &dir.a).expect("same shape");
            x.phi.axpy(s, &dir.phi).expect("same shape");
            sw_eval(&x).total
        };
        let fd = (energy_at(step) - energy_at(-step)) / (2.0 * step);
        let exact = g.pair(&dir.a, &dir.phi).expect("same shape");
        worst = worst.max((fd - exact).abs() / exact.abs().max(1e-8));
    }
    worst
}

/// Largest `|⟨s, Ht⟩ - ⟨Hs, t⟩| / (‖s‖ ‖t‖)` over random pairs.
pub fn hessian_symmetry_check<R: Rng>(
    op: &HessianOperator,
    pairs: usize,
    rng: &mut R,
) -> Result<f64> {
    let lat = op.lattice();
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let s = TangentVector::random(lat, 1.0, rng);
        let t = TangentVector::random(lat, 1.0, rng);
        let lhs = s.inner(&op.apply(&t)?)?;
        let rhs = op.apply(&s)?.inner(&t)?;
        worst = worst.max((lhs - rhs).abs() / (s.norm() * t.norm()));
    }
    Ok(worst)
}

/// Relative distance between `H t` and half the central difference of the
/// gradient along `t`.
pub fn hessian_fd_check(c: &Configuration, t: &TangentVector, step: f64) -> Result<f64> {
    let grad_at = |s: f64| -> Result<TangentVector> {
        let mut x = c.clone();
        x.a.axpy(s, &t.theta)?;
        x.phi.axpy(s, &t.v)?;
        let g = sw_gradient(&x);
        TangentVector::new(g.grad_a, g.grad_phi)
    };
    let mut fd = grad_at(step)?;
    fd.axpy(-1.0, &grad_at(-step)?)?;
    let fd = TangentVector::new(fd.theta.scaled(0.25 / step), fd.v.scaled(0.25 / step))?;
    let mut diff = HessianOperator::new(c).apply(t)?;
    diff.axpy(-1.0, &fd)?;
    Ok(diff.norm() / fd.norm().max(1e-300))
}

/// A smooth spinor on the lattice torus, built from the lowest Fourier modes.
pub fn smooth_spinor(l: Lattice) -> SpinorField {
    let k = 2.0 * PI / l.length();
    let mut psi = SpinorField::zeros(l, Chirality::Plus);
    for (s, v) in psi.values_mut().iter_mut().enumerate() {
        let x: Vec<f64> = (0..4)
            .map(|mu| l.coord(s, mu) as f64 * l.spacing())
            .collect();
        let amp = 1.0 + 0.3 * (k * x[0]).sin() * (k * x[2]).cos();
        v[0] = C64::from_polar(amp, 0.4 * (k * x[1]).sin());
        v[1] = C64::new(0.3 * (k * x[3]).cos(), 0.2);
    }
    psi
}

/// Fixed band-limited configuration on a torus of side `length` with `N = n`,
/// trivial bundle and `k_g ≡ 0`. The connection is sampled at edge midpoints.
pub fn smooth_configuration(n: usize, length: f64) -> Result<Configuration> {
    let l = Lattice::new(n, length / n as f64)?;
    let h = l.spacing();
    let k = 2.0 * PI / l.length();
    let mut c = Configuration::reducible_zero(BundleData::trivial(l, 0.0));
    c.phi = smooth_spinor(l);
    for s in 0..l.num_sites() {
        let x: Vec<f64> = (0..4).map(|mu| l.coord(s, mu) as f64 * h).collect();
        for mu in 0..4 {
            let mut y = x.clone();
            y[mu] += 0.5 * h;
            c.a.values_mut()[4 * s + mu] = match mu {
                0 => 0.3 * (k * y[1]).sin() + 0.2 * (k * y[3]).cos(),
                1 => -0.25 * (k * y[0]).cos() * (k * y[2]).sin(),
                2 => 0.2 * (k * y[3]).sin() + 0.1,
                _ => 0.15 * (k * y[0] + k * y[1]).sin(),
            };
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityRow {
    pub n: usize,
    pub h: f64,
    pub energy: f64,
    pub rhs: f64,
    pub defect: f64,
}

/// `|SW - (‖D⁺φ‖² + ‖F⁺ - ισ(φ)‖² - π²α²)|` for the smooth configuration at
/// each lattice size.
pub fn weitzenbock_study(sizes: &[usize], length: f64) -> Result<Vec<IdentityRow>> {
    sizes
        .iter()
        .map(|&n| {
            let c = smooth_configuration(n, length)?;
            let energy = sw_eval(&c).total;
            let rhs = weitzenbock_rhs(&c);
            Ok(IdentityRow {
                n,
                h: c.lattice().spacing(),
                energy,
                rhs,
                defect: (energy - rhs).abs(),
            })
        })
        .collect()
}

/// Successive ratios `defect[i] / defect[i+1]`.
pub fn refinement_ratios(rows: &[IdentityRow]) -> Vec<f64> {
    rows.windows(2).map(|w| w[0].defect / w[1].defect).collect()
}
