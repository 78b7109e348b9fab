//! Hodge decomposition of 1-cochains on the periodic lattice, Coulomb gauge
//! fixing and holonomy coordinates on the torus of flat connections.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fields::{gauge_apply, Configuration, GaugeTransform};
use crate::functional::sw_gradient;
use crate::hessian::DENSE_CAP;
use crate::lattice::{d, d_star, hodge_laplacian, Cochain, Lattice};
use crate::linalg::{conjugate_gradient, materialize, symmetric_eigen};

const CG_TOL: f64 = 1e-13;

/// `a = exact + coexact + harmonic` with `exact = dχ`.
#[derive(Debug, Clone, PartialEq)]
pub struct HodgeSplit {
    pub exact: Cochain,
    pub coexact: Cochain,
    pub harmonic: Cochain,
    /// Zero-mean potential of the exact part.
    pub chi: Cochain,
}

impl HodgeSplit {
    /// Largest pairwise inner product, each normalized by the two norms.
    /// Parts below `1e-10` of the total norm are rounding residue and skipped.
    pub fn orthogonality_defect(&self) -> f64 {
        let parts = [&self.exact, &self.coexact, &self.harmonic];
        let total = parts.iter().map(|p| p.norm_sqr()).sum::<f64>().sqrt();
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..i {
                let (ni, nj) = (parts[i].norm(), parts[j].norm());
                if ni > 1e-10 * total && nj > 1e-10 * total {
                    let denom = ni * nj;
                    worst = worst.max(parts[i].inner(parts[j]).expect("same shape").abs() / denom);
                }
            }
        }
        worst
    }

    pub fn reassemble(&self) -> Cochain {
        self.exact
            .add(&self.coexact)
            .and_then(|s| s.add(&self.harmonic))
            .expect("same shape")
    }
}

/// Solve `d*d χ = f` for zero-mean `χ`. The constant mode of `f`, which is
/// rounding noise for any `f` in the range of `d*`, is dropped first.
fn poisson(lat: Lattice, f: &Cochain) -> Result<Cochain> {
    let mut f = f.clone();
    let f_mean = f.values().iter().sum::<f64>() / lat.num_sites() as f64;
    f.values_mut().iter_mut().for_each(|v| *v -= f_mean);
    let apply = |x: &[f64]| {
        let c = Cochain::from_values(lat, 0, x.to_vec()).expect("site-sized vector");
        d_star(&d(&c).expect("degree 0"))
            .expect("degree 1")
            .into_values()
    };
    let out = conjugate_gradient(apply, f.values(), CG_TOL, 20 * lat.num_sites() + 100)?;
    let mut chi = Cochain::from_values(lat, 0, out.solution)?;
    let mean = chi.values().iter().sum::<f64>() / lat.num_sites() as f64;
    chi.values_mut().iter_mut().for_each(|v| *v -= mean);
    Ok(chi)
}

fn constant_per_direction(lat: Lattice, means: [f64; 4]) -> Cochain {
    let mut c = Cochain::zeros(lat, 1).expect("degree 1");
    for (e, v) in c.values_mut().iter_mut().enumerate() {
        *v = means[e % 4];
    }
    c
}

/// Split `a` into exact, coexact and harmonic parts. On the flat torus the
/// harmonic part is the per-direction mean; the exact part comes from the
/// Poisson problem `d*d χ = d*a`.
pub fn hodge_split(a: &Cochain) -> Result<HodgeSplit> {
    if a.degree() != 1 {
        return Err(Error::Degree("hodge_split expects a 1-cochain".into()));
    }
    let lat = a.lattice();
    let chi = poisson(lat, &d_star(a)?)?;
    let exact = d(&chi)?;
    let harmonic = constant_per_direction(lat, [0, 1, 2, 3].map(|mu| a.direction_mean(mu)));
    let coexact = a.sub(&exact)?.sub(&harmonic)?;
    Ok(HodgeSplit {
        exact,
        coexact,
        harmonic,
        chi,
    })
}

/// Kernel of the 1-cochain Hodge Laplacian, with an orthonormal basis as the
/// columns of the returned matrix.
pub fn harmonic_basis(lat: Lattice) -> Result<(usize, nalgebra::DMatrix<f64>)> {
    let dim = lat.num_edges();
    if dim > DENSE_CAP {
        return Err(Error::DimensionCap {
            dim,
            cap: DENSE_CAP,
        });
    }
    let m = materialize(dim, |x| {
        let c = Cochain::from_values(lat, 1, x.to_vec()).expect("edge-sized vector");
        hodge_laplacian(&c).expect("degree 1").into_values()
    });
    let (values, vectors) = symmetric_eigen(m, 1e-10)?;
    // the smallest nonzero eigenvalue is 4 sin²(π/N)/h², far from zero at desk scale
    let h = lat.spacing();
    let cut = 1e-8 * 16.0 / (h * h);
    let k = values.iter().filter(|l| l.abs() <= cut).count();
    Ok((k, vectors.columns(0, k).into_owned()))
}

/// First Betti number of the lattice torus, computed as a kernel dimension.
pub fn betti_1(lat: Lattice) -> Result<usize> {
    Ok(harmonic_basis(lat)?.0)
}

/// Largest principal angle between the computed harmonic space and the span
/// of the four constant-per-direction cochains.
pub fn harmonic_subspace_angle(lat: Lattice) -> Result<f64> {
    let (k, basis) = harmonic_basis(lat)?;
    if k != 4 {
        return Ok(PI / 2.0);
    }
    // project each constant cochain onto the kernel; sin of the angle is the rejected part
    let mut worst = 0.0f64;
    for mu in 0..4 {
        let mut means = [0.0; 4];
        means[mu] = 1.0;
        let c = constant_per_direction(lat, means);
        let x = nalgebra::DVector::from_column_slice(c.values());
        let x = &x / x.norm();
        let coeff = basis.transpose() * &x;
        let rejected = (&x - &basis * coeff).norm();
        worst = worst.max(rejected.min(1.0).asin());
    }
    Ok(worst)
}

/// Move `c` into Coulomb gauge `d*a = 0` with a small gauge transformation.
pub fn coulomb_gauge_fix(c: &Configuration) -> Result<(Configuration, GaugeTransform)> {
    let lat = c.lattice();
    let chi = poisson(lat, &d_star(&c.a)?.scaled(-1.0))?;
    let g = GaugeTransform::small(chi)?;
    let fixed = gauge_apply(&g, c)?;
    Ok((fixed, g))
}

/// Holonomy coordinates of a connection modulo large gauge transformations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianPoint {
    pub coords: [f64; 4],
}

impl JacobianPoint {
    /// Largest circular distance between coordinates, in `[0, ½]`.
    pub fn distance(&self, other: &JacobianPoint) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| {
                let t = (a - b).rem_euclid(1.0);
                t.min(1.0 - t)
            })
            .fold(0.0, f64::max)
    }
}

/// `mean(a_μ) · N h / 2π mod 1`, with no criticality requirement.
pub fn holonomy_coordinates(a: &Cochain) -> Result<JacobianPoint> {
    if a.degree() != 1 {
        return Err(Error::Degree(
            "holonomy coordinates need a 1-cochain".into(),
        ));
    }
    let l = a.lattice().length();
    let coords = [0, 1, 2, 3].map(|mu| {
        let t = (a.direction_mean(mu) * l / (2.0 * PI)).rem_euclid(1.0);
        if t >= 1.0 {
            0.0
        } else {
            t
        }
    });
    Ok(JacobianPoint { coords })
}

/// Jacobian-torus coordinates of a reducible critical point.
pub fn jacobian_coordinates(c: &Configuration) -> Result<JacobianPoint> {
    let phi = c.phi.norm();
    if phi > 1e-12 {
        return Err(Error::NotReducible(phi));
    }
    let g = sw_gradient(c).norm();
    if g > crate::flow::CRITICAL_TOL {
        return Err(Error::NotCritical(g));
    }
    holonomy_coordinates(&c.a)
}
