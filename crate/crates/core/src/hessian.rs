//! Second variation of the SW energy, applied matrix-free.
//!
//! [`HessianOperator`] is normalized as half the second derivative of
//! [`sw_eval`](crate::functional::sw_eval), so that at a reducible point the
//! spinor block is exactly `L_A = Δ_A + k_g/4` and the quadratic form reads
//! `2‖dθ‖² + ‖∇^A v‖² + ∫ (k_g/4)|v|²`. Its directional derivative
//! counterpart is therefore `½ D(sw_gradient)`.
//!
//! Blocks at a general point `(a, φ)`, with `T_e = U_e φ(x+μ)` and
//! `g = ∇^A φ`:
//!
//! ```text
//! θθ:  2 d*d θ + Φ*Φ θ - h Re⟨g_e, T_e⟩ θ_e
//! θv:  P(v)_e = Re⟨i T_e, (∇^A v)_e⟩ + Re⟨i U_e v(x+μ), g_e⟩
//! vθ:  Q = Pᵀ
//! vv:  Δ_A v + ½ Re⟨φ, v⟩ φ + ¼(|φ|² + k_g) v
//! ```
//!
//! The diagonal `θθ` correction is the lattice remnant of the second
//! derivative of the link variable and vanishes as `h → 0`.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fields::{
    covariant_derivative_with, laplacian_with, random_spinor, scale, spinor_dot, spinor_dot_re,
    Chirality, Configuration, SpinorField, SpinorOneForm, C64,
};
use crate::functional::{nabla_adjoint, phi_adjoint_with, phi_operator_with};
use crate::lattice::{d, d_star, Cochain, Lattice};
use crate::linalg::materialize;

/// Largest real dimension for which dense materialization is allowed.
pub const DENSE_CAP: usize = 4096;

/// A tangent vector `(θ, v)` at a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub theta: Cochain,
    pub v: SpinorField,
}

impl TangentVector {
    pub fn new(theta: Cochain, v: SpinorField) -> Result<Self> {
        if theta.degree() != 1 {
            return Err(Error::Degree("tangent theta must be a 1-cochain".into()));
        }
        if theta.lattice() != v.lattice() {
            return Err(Error::Shape(
                "tangent components on different lattices".into(),
            ));
        }
        if v.chirality() != Chirality::Plus {
            return Err(Error::Chirality(
                "tangent spinor must be a section of S+".into(),
            ));
        }
        Ok(TangentVector { theta, v })
    }

    pub fn zeros(lat: Lattice) -> Self {
        TangentVector {
            theta: Cochain::zeros(lat, 1).expect("degree 1"),
            v: SpinorField::zeros(lat, Chirality::Plus),
        }
    }

    pub fn random<R: Rng>(lat: Lattice, amp: f64, rng: &mut R) -> Self {
        let mut theta = Cochain::zeros(lat, 1).expect("degree 1");
        theta
            .values_mut()
            .iter_mut()
            .for_each(|x| *x = amp * rng.gen_range(-1.0..1.0));
        TangentVector {
            theta,
            v: random_spinor(lat, Chirality::Plus, amp, rng),
        }
    }

    pub fn lattice(&self) -> Lattice {
        self.theta.lattice()
    }

    /// Real dimension of the tangent space: 4 edge values and 4 spinor reals per site.
    pub fn real_dim(lat: Lattice) -> usize {
        8 * lat.num_sites()
    }

    pub fn inner(&self, other: &TangentVector) -> Result<f64> {
        Ok(self.theta.inner(&other.theta)? + self.v.inner(&other.v)?)
    }

    pub fn norm(&self) -> f64 {
        (self.theta.norm_sqr() + self.v.norm_sqr()).sqrt()
    }

    pub fn axpy(&mut self, s: f64, other: &TangentVector) -> Result<()> {
        self.theta.axpy(s, &other.theta)?;
        self.v.axpy(s, &other.v)
    }

    /// Edge values followed by the interleaved spinor reals.
    pub fn to_real(&self) -> Vec<f64> {
        let mut out = self.theta.values().to_vec();
        out.extend(self.v.to_real());
        out
    }

    pub fn from_real(lat: Lattice, x: &[f64]) -> Result<Self> {
        let ne = lat.num_edges();
        if x.len() != Self::real_dim(lat) {
            return Err(Error::Shape(format!(
                "expected {} reals, got {}",
                Self::real_dim(lat),
                x.len()
            )));
        }
        let theta = Cochain::from_values(lat, 1, x[..ne].to_vec())?;
        let v = SpinorField::from_real(lat, Chirality::Plus, &x[ne..])?;
        Ok(TangentVector { theta, v })
    }
}

/// Half the second variation of the SW energy at a fixed base point.
#[derive(Debug, Clone)]
pub struct HessianOperator {
    base: Configuration,
    transports: Vec<C64>,
    nabla_phi: SpinorOneForm,
    density: Vec<f64>,
}

impl HessianOperator {
    pub fn new(base: &Configuration) -> Self {
        let lat = base.lattice();
        let transports = base.transports();
        let nabla_phi = covariant_derivative_with(lat, &transports, base.phi.values());
        let density = base.phi.density();
        HessianOperator {
            base: base.clone(),
            transports,
            nabla_phi,
            density,
        }
    }

    pub fn base(&self) -> &Configuration {
        &self.base
    }

    pub fn lattice(&self) -> Lattice {
        self.base.lattice()
    }

    pub fn real_dim(&self) -> usize {
        TangentVector::real_dim(self.lattice())
    }

    fn check(&self, t: &TangentVector) -> Result<()> {
        if t.lattice() != self.lattice() {
            return Err(Error::Shape(
                "tangent vector and base point on different lattices".into(),
            ));
        }
        Ok(())
    }

    fn gauge_part(&self, theta: &Cochain) -> Cochain {
        d_star(&d(theta).expect("degree 1"))
            .expect("degree 2")
            .scaled(2.0)
    }

    fn theta_theta(&self, theta: &Cochain) -> Cochain {
        let lat = self.lattice();
        let h = lat.spacing();
        let mut out = self.gauge_part(theta);
        let phi_theta = phi_operator_with(&self.base, &self.transports, theta);
        out.axpy(
            1.0,
            &phi_adjoint_with(&self.base, &self.transports, &phi_theta),
        )
        .expect("same shape");
        let phi = self.base.phi.values();
        for (e, o) in out.values_mut().iter_mut().enumerate() {
            let t = scale(self.transports[e], &phi[lat.forward(e / 4, e % 4)]);
            *o -= h * spinor_dot_re(&self.nabla_phi.values()[e], &t) * theta.values()[e];
        }
        out
    }

    /// `P(v)`: the θ-row coupling to the spinor direction.
    pub fn coupling_p(&self, v: &SpinorField) -> Cochain {
        let lat = self.lattice();
        let nabla_v = covariant_derivative_with(lat, &self.transports, v.values());
        let mut out = phi_adjoint_with(&self.base, &self.transports, &nabla_v);
        let i = C64::new(0.0, 1.0);
        for (e, o) in out.values_mut().iter_mut().enumerate() {
            let w = scale(
                i * self.transports[e],
                &v.values()[lat.forward(e / 4, e % 4)],
            );
            *o += spinor_dot(&w, &self.nabla_phi.values()[e]).re;
        }
        out
    }

    /// `Q(θ) = Pᵀ θ`, assembled edge by edge.
    pub fn coupling_q(&self, theta: &Cochain) -> SpinorField {
        let lat = self.lattice();
        let phi_theta = phi_operator_with(&self.base, &self.transports, theta);
        let mut out = nabla_adjoint(&self.base, &self.transports, &phi_theta);
        let minus_i = C64::new(0.0, -1.0);
        let values = out.values_mut();
        for (e, th) in theta.values().iter().enumerate() {
            let y = lat.forward(e / 4, e % 4);
            let w = scale(
                minus_i * self.transports[e].conj() * *th,
                &self.nabla_phi.values()[e],
            );
            values[y][0] += w[0];
            values[y][1] += w[1];
        }
        out
    }

    fn spinor_spinor(&self, v: &SpinorField) -> SpinorField {
        let lat = self.lattice();
        let mut out = laplacian_with(lat, &self.transports, v.values());
        let phi = self.base.phi.values();
        let kg = self.base.bundle.kg().values();
        for (s, o) in out.values_mut().iter_mut().enumerate() {
            let re = 0.5 * spinor_dot_re(&phi[s], &v.values()[s]);
            let w = 0.25 * (self.density[s] + kg[s]);
            for k in 0..2 {
                o[k] += phi[s][k] * re + v.values()[s][k] * w;
            }
        }
        out
    }

    /// The operator applied to a tangent vector.
    pub fn apply(&self, t: &TangentVector) -> Result<TangentVector> {
        self.check(t)?;
        let mut theta = self.theta_theta(&t.theta);
        theta.axpy(1.0, &self.coupling_p(&t.v))?;
        let mut v = self.spinor_spinor(&t.v);
        v.axpy(1.0, &self.coupling_q(&t.theta))?;
        Ok(TangentVector { theta, v })
    }

    pub fn apply_real(&self, x: &[f64]) -> Vec<f64> {
        let t =
            TangentVector::from_real(self.lattice(), x).expect("vector of the operator dimension");
        self.apply(&t).expect("same lattice").to_real()
    }

    /// Dense matrix in the coordinates of [`TangentVector::to_real`].
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let dim = self.real_dim();
        if dim > DENSE_CAP {
            return Err(Error::DimensionCap {
                dim,
                cap: DENSE_CAP,
            });
        }
        Ok(materialize(dim, |x| self.apply_real(x)))
    }
}

pub fn hessian_apply(h: &HessianOperator, t: &TangentVector) -> Result<TangentVector> {
    h.apply(t)
}

/// `⟨t, H t⟩`.
pub fn hessian_quadratic_form(h: &HessianOperator, t: &TangentVector) -> Result<f64> {
    t.inner(&h.apply(t)?)
}

/// The decoupled blocks of the operator at a reducible point.
#[derive(Debug, Clone)]
pub struct ReducibleBlocks {
    op: HessianOperator,
}

/// Blocks `(2 d*d, L_A)` at a base point with `φ = 0`.
pub fn reducible_blocks(h: &HessianOperator) -> Result<ReducibleBlocks> {
    let n = h.base.phi.norm();
    if n > 1e-12 {
        return Err(Error::NotReducible(n));
    }
    Ok(ReducibleBlocks { op: h.clone() })
}

impl ReducibleBlocks {
    pub fn lattice(&self) -> Lattice {
        self.op.lattice()
    }

    pub fn gauge_block(&self, theta: &Cochain) -> Result<Cochain> {
        if theta.degree() != 1 || theta.lattice() != self.lattice() {
            return Err(Error::Shape(
                "expected a 1-cochain on the base lattice".into(),
            ));
        }
        Ok(self.op.gauge_part(theta))
    }

    /// `L_A v = Δ_A v + (k_g/4) v`.
    pub fn spinor_block(&self, v: &SpinorField) -> Result<SpinorField> {
        if v.lattice() != self.lattice() {
            return Err(Error::Shape(
                "spinor and base point on different lattices".into(),
            ));
        }
        Ok(self.op.spinor_spinor(v))
    }

    pub fn gauge_dim(&self) -> usize {
        self.lattice().num_edges()
    }

    pub fn spinor_dim(&self) -> usize {
        4 * self.lattice().num_sites()
    }

    pub fn gauge_block_real(&self, x: &[f64]) -> Vec<f64> {
        let theta = Cochain::from_values(self.lattice(), 1, x.to_vec()).expect("edge-sized vector");
        self.op.gauge_part(&theta).into_values()
    }

    pub fn spinor_block_real(&self, x: &[f64]) -> Vec<f64> {
        let v = SpinorField::from_real(self.lattice(), Chirality::Plus, x)
            .expect("spinor-sized vector");
        self.op.spinor_spinor(&v).to_real()
    }

    pub fn kg_min(&self) -> f64 {
        self.op
            .base
            .bundle
            .kg()
            .values()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn kg_max_abs(&self) -> f64 {
        self.op.base.bundle.kg().max_abs()
    }
}
