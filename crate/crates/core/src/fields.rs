//! Gauge fields, spinor fields, Spin^c bundle data and the gauge action.
//!
//! Conventions:
//! - `a` is the real coefficient of the spinor connection, `∇^A = d + i a`.
//!   Spinors carry unit charge; the determinant line `L_α` sees twice that,
//!   so its curvature is `F_A = 2 (da + B)` with `B` the constant twist
//!   curvature.
//! - Parallel transport along edge `(x, mu)` is `U = exp(i (h a + θ_twist))`.
//! - A gauge transform `g = exp(i χ)` acts by `a -> a + dχ`, `φ -> e^{-iχ} φ`.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::{d, Cochain, Lattice, PLANES};

pub type C64 = Complex64;
pub type Spinor = [C64; 2];

const ZERO: Spinor = [C64::new(0.0, 0.0), C64::new(0.0, 0.0)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chirality {
    Plus,
    Minus,
}

#[inline]
pub(crate) fn spinor_dot_re(a: &Spinor, b: &Spinor) -> f64 {
    a[0].re * b[0].re + a[0].im * b[0].im + a[1].re * b[1].re + a[1].im * b[1].im
}

/// Hermitian product `<a, b> = conj(a) . b`.
#[inline]
pub(crate) fn spinor_dot(a: &Spinor, b: &Spinor) -> C64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

#[inline]
pub(crate) fn spinor_norm_sqr(a: &Spinor) -> f64 {
    a[0].norm_sqr() + a[1].norm_sqr()
}

#[inline]
pub(crate) fn scale(z: C64, a: &Spinor) -> Spinor {
    [z * a[0], z * a[1]]
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    lattice: Lattice,
    chirality: Chirality,
    values: Vec<Spinor>,
}

impl SpinorField {
    pub fn zeros(lattice: Lattice, chirality: Chirality) -> Self {
        SpinorField {
            lattice,
            chirality,
            values: vec![ZERO; lattice.num_sites()],
        }
    }

    pub fn constant(lattice: Lattice, chirality: Chirality, value: Spinor) -> Self {
        SpinorField {
            lattice,
            chirality,
            values: vec![value; lattice.num_sites()],
        }
    }

    pub fn from_values(
        lattice: Lattice,
        chirality: Chirality,
        values: Vec<Spinor>,
    ) -> Result<Self> {
        if values.len() != lattice.num_sites() {
            return Err(Error::Shape(format!(
                "spinor field on N={} needs {} sites, got {}",
                lattice.n(),
                lattice.num_sites(),
                values.len()
            )));
        }
        if values
            .iter()
            .flatten()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite("spinor field".into()));
        }
        Ok(SpinorField {
            lattice,
            chirality,
            values,
        })
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn chirality(&self) -> Chirality {
        self.chirality
    }

    pub fn values(&self) -> &[Spinor] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Spinor] {
        &mut self.values
    }

    pub(crate) fn check_same(&self, other: &SpinorField) -> Result<()> {
        if self.lattice != other.lattice {
            return Err(Error::Shape(
                "spinor fields live on different lattices".into(),
            ));
        }
        if self.chirality != other.chirality {
            return Err(Error::Chirality(
                "spinor fields of opposite chirality".into(),
            ));
        }
        Ok(())
    }

    /// Real inner product `h^4 Σ Re<ψ, ξ>`.
    pub fn inner(&self, other: &SpinorField) -> Result<f64> {
        self.check_same(other)?;
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| spinor_dot_re(a, b))
            .sum();
        Ok(s * self.lattice.cell_volume())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(spinor_norm_sqr).sum::<f64>() * self.lattice.cell_volume()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .fold(0.0, |m, s| m.max(spinor_norm_sqr(s).sqrt()))
    }

    pub fn axpy(&mut self, s: f64, other: &SpinorField) -> Result<()> {
        self.check_same(other)?;
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            x[0] += y[0] * s;
            x[1] += y[1] * s;
        }
        Ok(())
    }

    pub fn scaled(&self, s: f64) -> SpinorField {
        let mut out = self.clone();
        for v in &mut out.values {
            v[0] *= s;
            v[1] *= s;
        }
        out
    }

    /// Site-major `(re, im)` interleaving per component.
    pub fn to_real(&self) -> Vec<f64> {
        self.values
            .iter()
            .flat_map(|s| [s[0].re, s[0].im, s[1].re, s[1].im])
            .collect()
    }

    pub fn from_real(lattice: Lattice, chirality: Chirality, x: &[f64]) -> Result<Self> {
        if x.len() != 4 * lattice.num_sites() {
            return Err(Error::Shape(format!(
                "real spinor vector needs {} entries, got {}",
                4 * lattice.num_sites(),
                x.len()
            )));
        }
        let values = x
            .chunks_exact(4)
            .map(|c| [C64::new(c[0], c[1]), C64::new(c[2], c[3])])
            .collect();
        SpinorField::from_values(lattice, chirality, values)
    }

    /// Site field `|ψ(x)|^2`.
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(spinor_norm_sqr).collect()
    }
}

/// Spinor-valued 1-cochain, one spinor per directed edge (tail fibre).
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorOneForm {
    lattice: Lattice,
    values: Vec<Spinor>,
}

impl SpinorOneForm {
    pub fn zeros(lattice: Lattice) -> Self {
        SpinorOneForm {
            lattice,
            values: vec![ZERO; lattice.num_edges()],
        }
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn values(&self) -> &[Spinor] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Spinor] {
        &mut self.values
    }

    pub fn inner(&self, other: &SpinorOneForm) -> Result<f64> {
        if self.lattice != other.lattice {
            return Err(Error::Shape(
                "spinor 1-forms live on different lattices".into(),
            ));
        }
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| spinor_dot_re(a, b))
            .sum();
        Ok(s * self.lattice.cell_volume())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(spinor_norm_sqr).sum::<f64>() * self.lattice.cell_volume()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

/// Intersection pairing `α·α` on `T^4` for `α = Σ m_{μν} [dx^μ ∧ dx^ν]`.
pub fn alpha_pairing(flux: &[i64; 6]) -> i64 {
    2 * (flux[0] * flux[5] - flux[1] * flux[4] + flux[2] * flux[3])
}

/// Spin^c data: Chern numbers of the determinant line per coordinate 2-torus
/// and the scalar-curvature potential `k_g`.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleData {
    flux: [i64; 6],
    kg: Cochain,
    alpha_squared: i64,
    twist_phase: Vec<f64>,
}

impl BundleData {
    /// The flux integers are the components of `c_1(L_α)`. On `T^4` the class
    /// must reduce to `w_2 = 0` mod 2, so every integer has to be even.
    pub fn new(flux: [i64; 6], kg: Cochain) -> Result<Self> {
        if kg.degree() != 0 {
            return Err(Error::Bundle("k_g must be a 0-cochain".into()));
        }
        if let Some(m) = flux.iter().find(|m| *m % 2 != 0) {
            return Err(Error::Bundle(format!(
                "flux {m} is odd: c_1(L) must be congruent to w_2(T^4) = 0 mod 2"
            )));
        }
        let lat = kg.lattice();
        let twist_phase = twist_phases(lat, &flux);
        Ok(BundleData {
            alpha_squared: alpha_pairing(&flux),
            flux,
            kg,
            twist_phase,
        })
    }

    pub fn trivial(lattice: Lattice, kg: f64) -> Self {
        BundleData::new([0; 6], Cochain::constant(lattice, 0, kg).expect("degree 0"))
            .expect("zero flux is admissible")
    }

    pub fn with_constant_kg(lattice: Lattice, flux: [i64; 6], kg: f64) -> Result<Self> {
        BundleData::new(flux, Cochain::constant(lattice, 0, kg)?)
    }

    pub fn lattice(&self) -> Lattice {
        self.kg.lattice()
    }

    pub fn flux(&self) -> [i64; 6] {
        self.flux
    }

    pub fn kg(&self) -> &Cochain {
        &self.kg
    }

    pub fn alpha_squared(&self) -> i64 {
        self.alpha_squared
    }

    /// Fixed transport phase per edge encoding the flux.
    pub fn twist_phase(&self) -> &[f64] {
        &self.twist_phase
    }

    /// Constant twist curvature seen by spinors in each plane, `π m / L^2`.
    pub fn twist_curvature(&self) -> [f64; 6] {
        let l = self.lattice().length();
        self.flux.map(|m| std::f64::consts::PI * m as f64 / (l * l))
    }
}

/// 't Hooft twist: in plane `(μ,ν)` with spinor flux `m/2`, edges along `ν`
/// carry `h²B x_μ` and edges along `μ` on the last `x_μ` slice carry
/// `-N h²B x_ν`, so every plaquette holonomy is `h²B` mod 2π.
fn twist_phases(lat: Lattice, flux: &[i64; 6]) -> Vec<f64> {
    let n = lat.n();
    let h2 = lat.spacing() * lat.spacing();
    let l = lat.length();
    let mut out = vec![0.0; lat.num_edges()];
    for (p, &(mu, nu)) in PLANES.iter().enumerate() {
        if flux[p] == 0 {
            continue;
        }
        let b = std::f64::consts::PI * flux[p] as f64 / (l * l);
        for s in 0..lat.num_sites() {
            let xm = lat.coord(s, mu);
            out[lat.edge_index(s, nu)] += h2 * b * xm as f64;
            if xm == n - 1 {
                out[lat.edge_index(s, mu)] -= n as f64 * h2 * b * lat.coord(s, nu) as f64;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub a: Cochain,
    pub phi: SpinorField,
    pub bundle: BundleData,
}

impl Configuration {
    pub fn new(a: Cochain, phi: SpinorField, bundle: BundleData) -> Result<Self> {
        let lat = a.lattice();
        if a.degree() != 1 {
            return Err(Error::Degree("gauge potential must be a 1-cochain".into()));
        }
        if phi.lattice() != lat || bundle.lattice() != lat {
            return Err(Error::Shape(
                "configuration members live on different lattices".into(),
            ));
        }
        if phi.chirality() != Chirality::Plus {
            return Err(Error::Chirality("phi must be a section of S+".into()));
        }
        Ok(Configuration { a, phi, bundle })
    }

    /// `(a = 0, φ = 0)` with the given bundle.
    pub fn reducible_zero(bundle: BundleData) -> Self {
        let lat = bundle.lattice();
        Configuration {
            a: Cochain::zeros(lat, 1).expect("degree 1"),
            phi: SpinorField::zeros(lat, Chirality::Plus),
            bundle,
        }
    }

    /// Uniform random `a ∈ [-amp_a, amp_a]` and spinor components in `[-amp_phi, amp_phi]`.
    pub fn random<R: Rng>(bundle: BundleData, amp_a: f64, amp_phi: f64, rng: &mut R) -> Self {
        let lat = bundle.lattice();
        let mut a = Cochain::zeros(lat, 1).expect("degree 1");
        a.values_mut()
            .iter_mut()
            .for_each(|v| *v = amp_a * rng.gen_range(-1.0..1.0));
        let phi = random_spinor(lat, Chirality::Plus, amp_phi, rng);
        Configuration { a, phi, bundle }
    }

    pub fn lattice(&self) -> Lattice {
        self.a.lattice()
    }

    /// Edge transports `U_e = exp(i (h a_e + θ_e))`.
    pub fn transports(&self) -> Vec<C64> {
        let h = self.lattice().spacing();
        self.a
            .values()
            .iter()
            .zip(self.bundle.twist_phase())
            .map(|(a, t)| C64::from_polar(1.0, h * a + t))
            .collect()
    }

    /// Determinant-line curvature `F_A = 2 (da + B)`.
    pub fn curvature(&self) -> Cochain {
        let mut f = d(&self.a).expect("a is a 1-cochain");
        let b = self.bundle.twist_curvature();
        for chunk in f.values_mut().chunks_exact_mut(6) {
            for (v, bp) in chunk.iter_mut().zip(&b) {
                *v = 2.0 * (*v + bp);
            }
        }
        f
    }
}

pub fn random_spinor<R: Rng>(
    lat: Lattice,
    chirality: Chirality,
    amp: f64,
    rng: &mut R,
) -> SpinorField {
    let mut psi = SpinorField::zeros(lat, chirality);
    for s in psi.values_mut() {
        for z in s.iter_mut() {
            *z = C64::new(
                amp * rng.gen_range(-1.0..1.0),
                amp * rng.gen_range(-1.0..1.0),
            );
        }
    }
    psi
}

/// `g(x) = exp(i (χ(x) + 2π Σ_μ w_μ x_μ / N))`. The winding part is a large
/// gauge transformation: it shifts `a` by the integral harmonic 1-cochain
/// `2π w_μ / (N h)` on direction-μ edges.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeTransform {
    pub chi: Cochain,
    pub winding: [i64; 4],
}

impl GaugeTransform {
    pub fn identity(lat: Lattice) -> Self {
        GaugeTransform {
            chi: Cochain::zeros(lat, 0).expect("degree 0"),
            winding: [0; 4],
        }
    }

    pub fn small(chi: Cochain) -> Result<Self> {
        if chi.degree() != 0 {
            return Err(Error::Degree("gauge phase must be a 0-cochain".into()));
        }
        Ok(GaugeTransform {
            chi,
            winding: [0; 4],
        })
    }

    pub fn winding(lat: Lattice, winding: [i64; 4]) -> Self {
        GaugeTransform {
            chi: Cochain::zeros(lat, 0).expect("degree 0"),
            winding,
        }
    }

    pub fn random<R: Rng>(lat: Lattice, amp: f64, rng: &mut R) -> Self {
        let mut chi = Cochain::zeros(lat, 0).expect("degree 0");
        chi.values_mut()
            .iter_mut()
            .for_each(|v| *v = amp * rng.gen_range(-1.0..1.0));
        GaugeTransform {
            chi,
            winding: [0; 4],
        }
    }

    /// Pointwise product `g1 g2`.
    pub fn compose(&self, other: &GaugeTransform) -> Result<GaugeTransform> {
        let chi = self.chi.add(&other.chi)?;
        let mut winding = self.winding;
        for (w, o) in winding.iter_mut().zip(&other.winding) {
            *w += o;
        }
        Ok(GaugeTransform { chi, winding })
    }

    /// Total phase at a site, including the winding ramp.
    pub fn phase(&self, site: usize) -> f64 {
        let lat = self.chi.lattice();
        let n = lat.n() as f64;
        let ramp: f64 = (0..4)
            .map(|mu| {
                2.0 * std::f64::consts::PI * self.winding[mu] as f64 * lat.coord(site, mu) as f64
                    / n
            })
            .sum();
        self.chi.values()[site] + ramp
    }

    /// The 1-cochain added to `a`: `dχ` plus the harmonic winding shift.
    pub fn connection_shift(&self) -> Cochain {
        let lat = self.chi.lattice();
        let mut shift = d(&self.chi).expect("degree 0");
        let unit = 2.0 * std::f64::consts::PI / lat.length();
        for s in 0..lat.num_sites() {
            for mu in 0..4 {
                shift.values_mut()[4 * s + mu] += unit * self.winding[mu] as f64;
            }
        }
        shift
    }

    /// `ψ -> e^{-iχ} ψ` pointwise.
    pub fn act_on_spinor(&self, psi: &SpinorField) -> Result<SpinorField> {
        if psi.lattice() != self.chi.lattice() {
            return Err(Error::Shape(
                "gauge transform and spinor on different lattices".into(),
            ));
        }
        let mut out = psi.clone();
        for (s, v) in out.values_mut().iter_mut().enumerate() {
            *v = scale(C64::from_polar(1.0, -self.phase(s)), v);
        }
        Ok(out)
    }
}

pub fn gauge_apply(g: &GaugeTransform, c: &Configuration) -> Result<Configuration> {
    if g.chi.lattice() != c.lattice() {
        return Err(Error::Shape(
            "gauge transform and configuration on different lattices".into(),
        ));
    }
    let a = c.a.add(&g.connection_shift())?;
    let phi = g.act_on_spinor(&c.phi)?;
    Ok(Configuration {
        a,
        phi,
        bundle: c.bundle.clone(),
    })
}

fn check_lattice(c: &Configuration, lat: Lattice) -> Result<()> {
    if c.lattice() != lat {
        return Err(Error::Shape(
            "field and configuration on different lattices".into(),
        ));
    }
    Ok(())
}

/// `(∇^A ψ)_e = (U_e ψ(x+μ) - ψ(x)) / h`.
pub fn covariant_derivative(c: &Configuration, psi: &SpinorField) -> Result<SpinorOneForm> {
    let lat = psi.lattice();
    check_lattice(c, lat)?;
    let u = c.transports();
    Ok(covariant_derivative_with(lat, &u, psi.values()))
}

pub(crate) fn covariant_derivative_with(lat: Lattice, u: &[C64], psi: &[Spinor]) -> SpinorOneForm {
    let inv_h = 1.0 / lat.spacing();
    let mut out = SpinorOneForm::zeros(lat);
    for s in 0..lat.num_sites() {
        for mu in 0..4 {
            let e = 4 * s + mu;
            let y = lat.forward(s, mu);
            let t = scale(u[e], &psi[y]);
            out.values[e] = [(t[0] - psi[s][0]) * inv_h, (t[1] - psi[s][1]) * inv_h];
        }
    }
    out
}

/// Exact adjoint of [`covariant_derivative`] under the real inner products.
pub fn covariant_adjoint(c: &Configuration, w: &SpinorOneForm) -> Result<SpinorField> {
    let lat = w.lattice();
    check_lattice(c, lat)?;
    let u = c.transports();
    Ok(covariant_adjoint_with(lat, &u, w.values()))
}

pub(crate) fn covariant_adjoint_with(lat: Lattice, u: &[C64], w: &[Spinor]) -> SpinorField {
    let inv_h = 1.0 / lat.spacing();
    let mut out = SpinorField::zeros(lat, Chirality::Plus);
    for s in 0..lat.num_sites() {
        let mut acc = ZERO;
        for mu in 0..4 {
            let b = lat.backward(s, mu);
            let eb = 4 * b + mu;
            let t = scale(u[eb].conj(), &w[eb]);
            let own = &w[4 * s + mu];
            acc[0] += t[0] - own[0];
            acc[1] += t[1] - own[1];
        }
        out.values[s] = [acc[0] * inv_h, acc[1] * inv_h];
    }
    out
}

/// `Δ_A = (∇^A)* ∇^A`, assembled as the gauge-covariant 9-point stencil.
pub fn laplacian_a(c: &Configuration, psi: &SpinorField) -> Result<SpinorField> {
    let lat = psi.lattice();
    check_lattice(c, lat)?;
    let u = c.transports();
    Ok(laplacian_with(lat, &u, psi.values()))
}

pub(crate) fn laplacian_with(lat: Lattice, u: &[C64], psi: &[Spinor]) -> SpinorField {
    let inv_h2 = 1.0 / (lat.spacing() * lat.spacing());
    let mut out = SpinorField::zeros(lat, Chirality::Plus);
    for s in 0..lat.num_sites() {
        let mut acc = [psi[s][0] * 8.0, psi[s][1] * 8.0];
        for mu in 0..4 {
            let f = lat.forward(s, mu);
            let b = lat.backward(s, mu);
            let uf = u[4 * s + mu];
            let ub = u[4 * b + mu].conj();
            for k in 0..2 {
                acc[k] -= uf * psi[f][k] + ub * psi[b][k];
            }
        }
        out.values[s] = [acc[0] * inv_h2, acc[1] * inv_h2];
    }
    out
}
