//! The SW energy, the monopole map `(F⁺ - σ(φ), D⁺φ)`, the exact gradient and
//! the `Φ` / `Φ*` coupling operators.
//!
//! Normalizations, fixed once and shared by every module:
//! - `|F|²` in the curvature term is the full antisymmetric-tensor norm, so
//!   `¼|F|² = ½⟨F, F⟩` with `⟨·,·⟩` the plaquette (μ<ν) inner product.
//! - The Clifford maps `S⁺ → S⁻` are `γ₀ = I`, `γ_k = iσ_k`.
//! - `ι` sends a traceless hermitian endomorphism `Σ c_k σ_k` to the
//!   self-dual form with `(01, 02, 03)` components `c_k / 2`.
//!
//! With these choices the lattice quantities converge to the continuum
//! identity `SW = ‖D⁺φ‖² + ‖F⁺ - ι σ(φ)‖² - π²α²` at `k_g = 0`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fields::{
    covariant_adjoint_with, covariant_derivative_with, laplacian_with, scale, spinor_dot,
    spinor_norm_sqr, Chirality, Configuration, Spinor, SpinorField, SpinorOneForm, C64,
};
use crate::lattice::{d_star, self_dual, Cochain};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub curvature_term: f64,
    pub dirichlet_term: f64,
    pub quartic_term: f64,
    pub curvature_coupling_term: f64,
    pub topological_term: f64,
    pub total: f64,
}

pub fn sw_eval(c: &Configuration) -> EnergyBreakdown {
    let lat = c.lattice();
    let vol = lat.cell_volume();
    let f = c.curvature();
    let curvature_term = 0.5 * f.norm_sqr();
    let u = c.transports();
    let grad = covariant_derivative_with(lat, &u, c.phi.values());
    let dirichlet_term = grad.norm_sqr();
    let density = c.phi.density();
    let quartic_term = 0.125 * vol * density.iter().map(|r| r * r).sum::<f64>();
    let curvature_coupling_term = 0.25
        * vol
        * density
            .iter()
            .zip(c.bundle.kg().values())
            .map(|(r, k)| k * r)
            .sum::<f64>();
    let topological_term = PI * PI * c.bundle.alpha_squared() as f64;
    EnergyBreakdown {
        curvature_term,
        dirichlet_term,
        quartic_term,
        curvature_coupling_term,
        topological_term,
        total: curvature_term
            + dirichlet_term
            + quartic_term
            + curvature_coupling_term
            + topological_term,
    }
}

/// `σ(φ) = φ φ* - ½|φ|² I` as a row-major 2×2 matrix.
pub fn sigma_form(phi: &Spinor) -> [[C64; 2]; 2] {
    let half = 0.5 * spinor_norm_sqr(phi);
    [
        [phi[0] * phi[0].conj() - half, phi[0] * phi[1].conj()],
        [phi[1] * phi[0].conj(), phi[1] * phi[1].conj() - half],
    ]
}

/// Pauli coefficients `c_k = ½ tr(σ σ_k)` of `σ(φ)`.
pub fn sigma_pauli(phi: &Spinor) -> [f64; 3] {
    let cross = phi[0].conj() * phi[1];
    [
        cross.re,
        cross.im,
        0.5 * (phi[0].norm_sqr() - phi[1].norm_sqr()),
    ]
}

/// `ι(σ(φ))` at one site, in plaquette order (01, 02, 03, 12, 13, 23).
pub fn iota_sigma(phi: &Spinor) -> [f64; 6] {
    let [c1, c2, c3] = sigma_pauli(phi).map(|c| 0.5 * c);
    [c1, c2, c3, c3, -c2, c1]
}

fn gamma_apply(mu: usize, v: &Spinor) -> Spinor {
    let i = C64::new(0.0, 1.0);
    match mu {
        0 => *v,
        1 => [i * v[1], i * v[0]],
        2 => [v[1], -v[0]],
        3 => [i * v[0], -i * v[1]],
        _ => unreachable!("four directions"),
    }
}

/// Naive symmetric-difference Dirac operator `D⁺ = Σ γ_μ ∇^{sym}_μ`.
/// Fermion doublers are present; only smooth fields are meaningful.
pub fn dirac_plus(c: &Configuration, psi: &SpinorField) -> Result<SpinorField> {
    if psi.chirality() != Chirality::Plus {
        return Err(Error::Chirality("D+ acts on sections of S+".into()));
    }
    let lat = psi.lattice();
    if lat != c.lattice() {
        return Err(Error::Shape(
            "spinor and configuration on different lattices".into(),
        ));
    }
    let u = c.transports();
    let half_inv_h = 0.5 / lat.spacing();
    let p = psi.values();
    let mut out = SpinorField::zeros(lat, Chirality::Minus);
    for (s, o) in out.values_mut().iter_mut().enumerate() {
        let mut acc = [C64::new(0.0, 0.0); 2];
        for mu in 0..4 {
            let f = lat.forward(s, mu);
            let b = lat.backward(s, mu);
            let fw = scale(u[4 * s + mu], &p[f]);
            let bw = scale(u[4 * b + mu].conj(), &p[b]);
            let g = gamma_apply(mu, &[fw[0] - bw[0], fw[1] - bw[1]]);
            acc[0] += g[0];
            acc[1] += g[1];
        }
        *o = [acc[0] * half_inv_h, acc[1] * half_inv_h];
    }
    Ok(out)
}

/// `ι(σ(φ))` as a 2-cochain.
pub fn iota_sigma_field(phi: &SpinorField) -> Cochain {
    let mut out = Cochain::zeros(phi.lattice(), 2).expect("degree 2");
    for (chunk, p) in out.values_mut().chunks_exact_mut(6).zip(phi.values()) {
        chunk.copy_from_slice(&iota_sigma(p));
    }
    out
}

/// The monopole map `(F⁺_A - ι σ(φ), D⁺_A φ)`.
pub fn monopole_residual(c: &Configuration) -> (Cochain, SpinorField) {
    let fplus = self_dual(&c.curvature()).expect("curvature is a 2-cochain");
    let curv = fplus.sub(&iota_sigma_field(&c.phi)).expect("same shape");
    let dirac = dirac_plus(c, &c.phi).expect("phi has plus chirality");
    (curv, dirac)
}

/// Squared norm of the monopole map.
pub fn monopole_residual_norm_sqr(c: &Configuration) -> f64 {
    let (f, dphi) = monopole_residual(c);
    f.norm_sqr() + dphi.norm_sqr()
}

/// Right-hand side `‖D⁺φ‖² + ‖F⁺ - ισ(φ)‖² - π²α²` of the Weitzenböck
/// identity; equals `sw_eval` in the continuum limit when `k_g ≡ 0`.
pub fn weitzenbock_rhs(c: &Configuration) -> f64 {
    monopole_residual_norm_sqr(c) - PI * PI * c.bundle.alpha_squared() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientPair {
    pub grad_a: Cochain,
    pub grad_phi: SpinorField,
}

impl GradientPair {
    pub fn norm(&self) -> f64 {
        (self.grad_a.norm_sqr() + self.grad_phi.norm_sqr()).sqrt()
    }

    /// `⟨grad_a, θ⟩ + ⟨grad_phi, v⟩`.
    pub fn pair(&self, theta: &Cochain, v: &SpinorField) -> Result<f64> {
        Ok(self.grad_a.inner(theta)? + self.grad_phi.inner(v)?)
    }
}

/// `(Φ(θ))_e = i θ_e U_e φ(x+μ)`: the derivative of `∇^A φ` along `a → a + θ`,
/// living in the tail fibre of each edge.
pub fn phi_operator(c: &Configuration, theta: &Cochain) -> Result<SpinorOneForm> {
    check_one_form(c, theta)?;
    let u = c.transports();
    Ok(phi_operator_with(c, &u, theta))
}

pub(crate) fn phi_operator_with(c: &Configuration, u: &[C64], theta: &Cochain) -> SpinorOneForm {
    let lat = c.lattice();
    let phi = c.phi.values();
    let mut out = SpinorOneForm::zeros(lat);
    let i = C64::new(0.0, 1.0);
    for (e, o) in out.values_mut().iter_mut().enumerate() {
        let (s, mu) = (e / 4, e % 4);
        *o = scale(i * theta.values()[e] * u[e], &phi[lat.forward(s, mu)]);
    }
    out
}

/// Exact adjoint of [`phi_operator`]: `Φ*(w)_e = Re⟨i U_e φ(x+μ), w_e⟩`.
pub fn phi_adjoint(c: &Configuration, w: &SpinorOneForm) -> Result<Cochain> {
    if w.lattice() != c.lattice() {
        return Err(Error::Shape(
            "spinor 1-form and configuration on different lattices".into(),
        ));
    }
    let u = c.transports();
    Ok(phi_adjoint_with(c, &u, w))
}

pub(crate) fn phi_adjoint_with(c: &Configuration, u: &[C64], w: &SpinorOneForm) -> Cochain {
    let lat = c.lattice();
    let phi = c.phi.values();
    let mut out = Cochain::zeros(lat, 1).expect("degree 1");
    let i = C64::new(0.0, 1.0);
    for (e, o) in out.values_mut().iter_mut().enumerate() {
        let t = scale(i * u[e], &phi[lat.forward(e / 4, e % 4)]);
        *o = spinor_dot(&t, &w.values()[e]).re;
    }
    out
}

fn check_one_form(c: &Configuration, theta: &Cochain) -> Result<()> {
    if theta.degree() != 1 || theta.lattice() != c.lattice() {
        return Err(Error::Shape(
            "expected a 1-cochain on the configuration lattice".into(),
        ));
    }
    Ok(())
}

/// Riesz gradient of [`sw_eval`] under the `h⁴`-weighted real inner products:
/// `grad_a = 2 d*F_A + 2 Φ*(∇^A φ)`, `grad_φ = 2 (Δ_A φ + ¼(|φ|² + k_g) φ)`.
pub fn sw_gradient(c: &Configuration) -> GradientPair {
    let lat = c.lattice();
    let u = c.transports();
    let f = c.curvature();
    let mut grad_a = d_star(&f).expect("degree 2").scaled(2.0);
    let nabla = covariant_derivative_with(lat, &u, c.phi.values());
    let coupling = phi_adjoint_with(c, &u, &nabla);
    grad_a.axpy(2.0, &coupling).expect("same shape");

    let mut grad_phi = laplacian_with(lat, &u, c.phi.values());
    let kg = c.bundle.kg().values();
    for ((g, p), k) in grad_phi.values_mut().iter_mut().zip(c.phi.values()).zip(kg) {
        let w = 0.25 * (spinor_norm_sqr(p) + k);
        *g = [(g[0] + p[0] * w) * 2.0, (g[1] + p[1] * w) * 2.0];
    }
    GradientPair { grad_a, grad_phi }
}

/// `(∇^A)*` applied to a spinor 1-form, exposed for the Hessian blocks.
pub(crate) fn nabla_adjoint(c: &Configuration, u: &[C64], w: &SpinorOneForm) -> SpinorField {
    covariant_adjoint_with(c.lattice(), u, w.values())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{
        covariant_derivative, gauge_apply, random_spinor, BundleData, GaugeTransform,
    };
    use crate::lattice::{d, Lattice};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lat(n: usize, h: f64) -> Lattice {
        Lattice::new(n, h).unwrap()
    }

    fn c64(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn zero_configuration_has_zero_energy() {
        let c = Configuration::reducible_zero(BundleData::trivial(lat(2, 1.0), 3.0));
        assert_eq!(sw_eval(&c).total, 0.0);
        let (f, dphi) = monopole_residual(&c);
        assert_eq!(f.max_abs(), 0.0);
        assert_eq!(dphi.max_abs(), 0.0);
    }

    #[test]
    fn constant_field_energy() {
        let l = lat(2, 1.0);
        let mut c = Configuration::reducible_zero(BundleData::trivial(l, 4.0));
        c.phi = SpinorField::constant(l, Chirality::Plus, [c64(1.0, 0.0), c64(0.0, 0.0)]);
        let e = sw_eval(&c);
        assert_eq!(e.curvature_term, 0.0);
        assert_eq!(e.dirichlet_term, 0.0);
        assert!((e.quartic_term - 2.0).abs() < 1e-15);
        assert!((e.curvature_coupling_term - 16.0).abs() < 1e-15);
        assert!((e.total - 18.0).abs() < 1e-14);
        let parts = e.curvature_term
            + e.dirichlet_term
            + e.quartic_term
            + e.curvature_coupling_term
            + e.topological_term;
        assert!((parts - e.total).abs() <= 1e-12 * e.total);
    }

    #[test]
    fn topological_term_uses_alpha_squared() {
        let l = lat(2, 1.0);
        let b = BundleData::with_constant_kg(l, [2, 0, 0, 0, 0, 2], 0.0).unwrap();
        let e = sw_eval(&Configuration::reducible_zero(b));
        assert!((e.topological_term - PI * PI * 8.0).abs() < 1e-12);
    }

    #[test]
    fn sigma_examples() {
        let s = sigma_form(&[c64(1.0, 0.0), c64(0.0, 0.0)]);
        assert_eq!(
            s,
            [
                [c64(0.5, 0.0), c64(0.0, 0.0)],
                [c64(0.0, 0.0), c64(-0.5, 0.0)]
            ]
        );
        let z = sigma_form(&[c64(0.0, 0.0); 2]);
        assert!(z.iter().flatten().all(|v| v.norm() == 0.0));

        let r = 1.0 / 2f64.sqrt();
        let s = sigma_form(&[c64(r, 0.0), c64(0.0, r)]);
        // φφ† = ½ [[1, -i], [i, 1]]
        assert!((s[0][1] - c64(0.0, -0.5)).norm() < 1e-15);
        assert!((s[1][0] - c64(0.0, 0.5)).norm() < 1e-15);
        assert!(s[0][0].norm() < 1e-15 && s[1][1].norm() < 1e-15);
    }

    #[test]
    fn sigma_is_hermitian_traceless_with_known_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let p = random_spinor(lat(2, 1.0), Chirality::Plus, 1.0, &mut rng).values()[0];
            let s = sigma_form(&p);
            assert!((s[0][1] - s[1][0].conj()).norm() < 1e-15);
            assert!(s[0][0].im.abs() < 1e-15 && s[1][1].im.abs() < 1e-15);
            assert!((s[0][0] + s[1][1]).norm() <= 1e-14);
            // eigenvalues ±sqrt(a² + |b|²) of [[a, b], [b*, -a]]
            let ev = (s[0][0].re.powi(2) + s[0][1].norm_sqr()).sqrt();
            assert!((ev - 0.5 * spinor_norm_sqr(&p)).abs() < 1e-14);
        }
    }

    #[test]
    fn dirac_rejects_minus_chirality() {
        let l = lat(2, 1.0);
        let c = Configuration::reducible_zero(BundleData::trivial(l, 0.0));
        let psi = SpinorField::zeros(l, Chirality::Minus);
        assert!(matches!(dirac_plus(&c, &psi), Err(Error::Chirality(_))));
    }

    #[test]
    fn dirac_constant_and_plane_wave() {
        let l = lat(4, 0.5);
        let c = Configuration::reducible_zero(BundleData::trivial(l, 0.0));
        let constant = SpinorField::constant(l, Chirality::Plus, [c64(1.0, 2.0), c64(-0.5, 0.1)]);
        assert!(dirac_plus(&c, &constant).unwrap().max_abs() < 1e-15);

        let mut psi = SpinorField::zeros(l, Chirality::Plus);
        for (s, v) in psi.values_mut().iter_mut().enumerate() {
            v[0] = C64::from_polar(1.0, 2.0 * PI * l.coord(s, 0) as f64 / 4.0);
        }
        let out = dirac_plus(&c, &psi).unwrap();
        let factor = c64(0.0, (2.0 * PI / 4.0).sin() / 0.5);
        for (o, p) in out.values().iter().zip(psi.values()) {
            assert!((o[0] - factor * p[0]).norm() < 1e-12);
            assert!(o[1].norm() < 1e-12);
        }
    }

    #[test]
    fn dirac_gauge_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let l = lat(3, 0.7);
        let b = BundleData::with_constant_kg(l, [0, 0, 2, 2, 0, 0], 0.0).unwrap();
        let c = Configuration::random(b, 1.0, 1.0, &mut rng);
        let g = GaugeTransform::random(l, 2.0, &mut rng);
        let c2 = gauge_apply(&g, &c).unwrap();
        let lhs = dirac_plus(&c2, &c2.phi).unwrap();
        let rhs = g.act_on_spinor(&dirac_plus(&c, &c.phi).unwrap()).unwrap();
        let mut diff = lhs.clone();
        diff.axpy(-1.0, &rhs).unwrap();
        assert!(diff.norm() <= 1e-12 * rhs.norm());
    }

    #[test]
    fn residual_of_constant_spinor() {
        let l = lat(2, 1.0);
        let mut c = Configuration::reducible_zero(BundleData::trivial(l, 0.0));
        c.phi = SpinorField::constant(l, Chirality::Plus, [c64(1.0, 0.0), c64(0.0, 0.0)]);
        let (f, dphi) = monopole_residual(&c);
        // σ = ½ σ₃, so ι σ has 03 and 12 components ¼ and the rest zero.
        for chunk in f.values().chunks_exact(6) {
            assert_eq!(chunk, &[0.0, 0.0, -0.25, -0.25, 0.0, 0.0]);
        }
        assert!((f.norm_sqr() - 16.0 * 2.0 * 0.0625).abs() < 1e-15);
        assert_eq!(dphi.max_abs(), 0.0);
    }

    #[test]
    fn energy_and_residual_are_gauge_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let l = lat(3, 0.9);
        let b = BundleData::with_constant_kg(l, [2, 0, 0, 0, 0, 0], -0.5).unwrap();
        for _ in 0..20 {
            let c = Configuration::random(b.clone(), 1.0, 1.0, &mut rng);
            let g = GaugeTransform::random(l, 3.0, &mut rng);
            let c2 = gauge_apply(&g, &c).unwrap();
            let (e1, e2) = (sw_eval(&c).total, sw_eval(&c2).total);
            assert!((e1 - e2).abs() <= 1e-12 * e1.abs());
            let (r1, r2) = (
                monopole_residual_norm_sqr(&c),
                monopole_residual_norm_sqr(&c2),
            );
            assert!((r1 - r2).abs() <= 1e-12 * r1);
        }
    }

    #[test]
    fn phi_operator_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let l = lat(2, 1.0);
        let c = Configuration::random(BundleData::trivial(l, 0.0), 0.5, 1.0, &mut rng);
        let zero = Cochain::zeros(l, 1).unwrap();
        assert_eq!(phi_operator(&c, &zero).unwrap().norm(), 0.0);
        let c0 = Configuration::reducible_zero(BundleData::trivial(l, 0.0));
        let theta = Cochain::constant(l, 1, 1.0).unwrap();
        assert_eq!(phi_operator(&c0, &theta).unwrap().norm(), 0.0);

        let mut single = Cochain::zeros(l, 1).unwrap();
        let e = l.edge_index(3, 2);
        single.values_mut()[e] = 1.0;
        let out = phi_operator(&c, &single).unwrap();
        let u = c.transports()[e];
        let head = c.phi.values()[l.forward(3, 2)];
        for (k, v) in out.values().iter().enumerate() {
            if k == e {
                assert!((v[0] - c64(0.0, 1.0) * u * head[0]).norm() < 1e-15);
                assert!((v[1] - c64(0.0, 1.0) * u * head[1]).norm() < 1e-15);
            } else {
                assert_eq!(v[0].norm() + v[1].norm(), 0.0);
            }
        }
    }

    #[test]
    fn phi_adjointness() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let l = lat(3, 0.8);
        let b = BundleData::with_constant_kg(l, [0, 2, 0, 0, 0, 0], 0.0).unwrap();
        let c = Configuration::random(b, 1.0, 1.0, &mut rng);
        for _ in 0..20 {
            let theta = Configuration::random(c.bundle.clone(), 1.0, 0.0, &mut rng).a;
            let psi = random_spinor(l, Chirality::Plus, 1.0, &mut rng);
            let w = covariant_derivative(&c, &psi).unwrap();
            let lhs = phi_operator(&c, &theta).unwrap().inner(&w).unwrap();
            let rhs = theta.inner(&phi_adjoint(&c, &w).unwrap()).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * theta.norm() * w.norm() * c.phi.max_abs());
        }
    }

    #[test]
    fn phi_adjoint_of_parallel_spinor_vanishes() {
        let l = lat(3, 1.0);
        let mut c = Configuration::reducible_zero(BundleData::trivial(l, 0.0));
        c.phi = SpinorField::constant(l, Chirality::Plus, [c64(0.3, -0.2), c64(1.0, 0.5)]);
        let w = covariant_derivative(&c, &c.phi).unwrap();
        assert_eq!(phi_adjoint(&c, &w).unwrap().max_abs(), 0.0);
    }

    /// Smooth spinor with non-uniform modulus on a torus of side `L`.
    #[test]
    fn phi_star_identity_converges_for_real_pairing() {
        // With θ acting by real multiplication, the adjoint of θ ↦ θ φ applied
        // to ∇φ is Re⟨φ(x), (∇φ)_e⟩, which tends to ½ d|φ|².
        let mut errors = Vec::new();
        for n in [8usize, 16, 32] {
            let l = lat(n, 8.0 / n as f64);
            let mut c = Configuration::reducible_zero(BundleData::trivial(l, 0.0));
            c.phi = crate::checks::smooth_spinor(l);
            let w = covariant_derivative(&c, &c.phi).unwrap();
            let mut lhs = Cochain::zeros(l, 1).unwrap();
            for (e, v) in lhs.values_mut().iter_mut().enumerate() {
                *v = spinor_dot(&c.phi.values()[e / 4], &w.values()[e]).re;
            }
            let dens = Cochain::from_values(l, 0, c.phi.density()).unwrap();
            let rhs = d(&dens).unwrap().scaled(0.5);
            errors.push(lhs.sub(&rhs).unwrap().norm() / c.phi.norm_sqr());
        }
        assert!(
            errors[0] / errors[1] >= 1.5 && errors[1] / errors[2] >= 1.5,
            "{errors:?}"
        );
    }

    #[test]
    fn phi_star_of_covariant_derivative_is_the_current() {
        // For the i-valued coupling, Φ*(∇φ)_e = -Im⟨U φ(x+μ), φ(x)⟩ / h exactly.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let l = lat(3, 0.6);
        let c = Configuration::random(BundleData::trivial(l, 0.0), 0.7, 1.0, &mut rng);
        let lhs = phi_adjoint(&c, &covariant_derivative(&c, &c.phi).unwrap()).unwrap();
        let u = c.transports();
        for (e, v) in lhs.values().iter().enumerate() {
            let t = scale(u[e], &c.phi.values()[l.forward(e / 4, e % 4)]);
            let current = -spinor_dot(&t, &c.phi.values()[e / 4]).im / l.spacing();
            assert!((v - current).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_of_constant_field() {
        let l = lat(2, 1.0);
        let mut c = Configuration::reducible_zero(BundleData::trivial(l, 4.0));
        c.phi = SpinorField::constant(l, Chirality::Plus, [c64(1.0, 0.0), c64(0.0, 0.0)]);
        let g = sw_gradient(&c);
        assert_eq!(g.grad_a.max_abs(), 0.0);
        for v in g.grad_phi.values() {
            assert!((v[0] - c64(2.5, 0.0)).norm() < 1e-15 && v[1].norm() == 0.0);
        }
    }

    fn fd_check(c: &Configuration, rng: &mut ChaCha8Rng) -> f64 {
        let g = sw_gradient(c);
        let step = 1e-5;
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let dir = Configuration::random(c.bundle.clone(), 1.0, 1.0, rng);
            let shifted = |s: f64| {
                let mut x = c.clone();
                x.a.axpy(s, &dir.a).unwrap();
                x.phi.axpy(s, &dir.phi).unwrap();
                sw_eval(&x).total
            };
            let fd = (shifted(step) - shifted(-step)) / (2.0 * step);
            let an = g.pair(&dir.a, &dir.phi).unwrap();
            worst = worst.max((fd - an).abs() / an.abs().max(1e-8));
        }
        worst
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in [2usize, 3] {
            let l = lat(n, 1.0);
            let b = BundleData::with_constant_kg(l, [2, 0, 0, 0, 0, 0], -0.7).unwrap();
            let c = Configuration::random(b, 0.5, 0.8, &mut rng);
            let err = fd_check(&c, &mut rng);
            assert!(err <= 1e-6, "N={n}: {err}");
        }
    }

    #[test]
    fn gradient_is_gauge_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let l = lat(3, 1.0);
        let c = Configuration::random(BundleData::trivial(l, 0.5), 0.5, 0.8, &mut rng);
        let g = GaugeTransform::random(l, 2.0, &mut rng);
        let c2 = gauge_apply(&g, &c).unwrap();
        let (g1, g2) = (sw_gradient(&c), sw_gradient(&c2));
        assert!(g1.grad_a.sub(&g2.grad_a).unwrap().norm() <= 1e-12 * g1.norm());
        let mut diff = g.act_on_spinor(&g1.grad_phi).unwrap();
        diff.axpy(-1.0, &g2.grad_phi).unwrap();
        assert!(diff.norm() <= 1e-12 * g1.norm());
    }

    #[test]
    fn reducible_harmonic_points_are_critical() {
        let l = lat(3, 1.0);
        let mut c = Configuration::reducible_zero(BundleData::trivial(l, 1.0));
        for s in 0..l.num_sites() {
            c.a.values_mut()[4 * s + 1] = 0.37;
            c.a.values_mut()[4 * s + 3] = -1.2;
        }
        assert!(sw_gradient(&c).norm() <= 1e-12);
    }
}
