//! Periodic 4-torus cell complex and the discrete exterior calculus on it.
//!
//! Cochains store pointwise component values (not integrated values), so the
//! coboundary divides by the spacing `h` and inner products carry the `h^4`
//! volume weight. Cells are enumerated site-major: site `s` owns edges
//! `4s + mu` and plaquettes `6s + p` with `p` indexing [`PLANES`].

use crate::error::{Error, Result};

/// Ordered direction pairs `(mu, nu)`, `mu < nu`, in plaquette enumeration order.
pub const PLANES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Index into [`PLANES`] for the pair `(mu, nu)`, `mu < nu`.
pub fn plane_index(mu: usize, nu: usize) -> usize {
    PLANES
        .iter()
        .position(|&p| p == (mu, nu))
        .expect("plane must satisfy mu < nu < 4")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    n: usize,
    h: f64,
}

impl Lattice {
    pub fn new(n: usize, h: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidLattice(format!("need N >= 2, got {n}")));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidLattice(format!("need h > 0, got {h}")));
        }
        Ok(Lattice { n, h })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Physical side length `N h`.
    pub fn length(&self) -> f64 {
        self.n as f64 * self.h
    }

    pub fn num_sites(&self) -> usize {
        self.n.pow(4)
    }

    pub fn num_edges(&self) -> usize {
        4 * self.num_sites()
    }

    pub fn num_plaquettes(&self) -> usize {
        6 * self.num_sites()
    }

    pub fn volume(&self) -> f64 {
        self.h.powi(4) * self.num_sites() as f64
    }

    /// Volume weight `h^4` of a single cell.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(4)
    }

    fn stride(&self, mu: usize) -> usize {
        self.n.pow(3 - mu as u32)
    }

    /// Lexicographic site index, `x0` slowest.
    pub fn site_index(&self, coords: [usize; 4]) -> usize {
        coords.iter().fold(0, |acc, &c| acc * self.n + (c % self.n))
    }

    pub fn site_coords(&self, site: usize) -> [usize; 4] {
        let mut out = [0; 4];
        let mut rest = site;
        for mu in (0..4).rev() {
            out[mu] = rest % self.n;
            rest /= self.n;
        }
        out
    }

    pub fn coord(&self, site: usize, mu: usize) -> usize {
        (site / self.stride(mu)) % self.n
    }

    /// Neighbour `x + mu_hat` with periodic wrap.
    #[inline]
    pub fn forward(&self, site: usize, mu: usize) -> usize {
        let s = self.stride(mu);
        if (site / s) % self.n == self.n - 1 {
            site + s - self.n * s
        } else {
            site + s
        }
    }

    /// Neighbour `x - mu_hat` with periodic wrap.
    #[inline]
    pub fn backward(&self, site: usize, mu: usize) -> usize {
        let s = self.stride(mu);
        if (site / s).is_multiple_of(self.n) {
            site + self.n * s - s
        } else {
            site - s
        }
    }

    pub fn edge_index(&self, site: usize, mu: usize) -> usize {
        4 * site + mu
    }

    /// `(tail site, direction)` of an edge.
    pub fn edge(&self, e: usize) -> (usize, usize) {
        (e / 4, e % 4)
    }

    pub fn plaquette_index(&self, site: usize, mu: usize, nu: usize) -> usize {
        6 * site + plane_index(mu, nu)
    }

    /// `(corner site, mu, nu)` of a plaquette.
    pub fn plaquette(&self, p: usize) -> (usize, usize, usize) {
        let (mu, nu) = PLANES[p % 6];
        (p / 6, mu, nu)
    }

    fn components(degree: usize) -> usize {
        [1, 4, 6][degree]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cochain {
    lattice: Lattice,
    degree: usize,
    values: Vec<f64>,
}

impl Cochain {
    pub fn zeros(lattice: Lattice, degree: usize) -> Result<Self> {
        if degree > 2 {
            return Err(Error::Degree(format!(
                "cochains of degree {degree} are not supported"
            )));
        }
        let len = Lattice::components(degree) * lattice.num_sites();
        Ok(Cochain {
            lattice,
            degree,
            values: vec![0.0; len],
        })
    }

    pub fn from_values(lattice: Lattice, degree: usize, values: Vec<f64>) -> Result<Self> {
        let mut c = Cochain::zeros(lattice, degree)?;
        if values.len() != c.values.len() {
            return Err(Error::Shape(format!(
                "degree-{degree} cochain on N={} needs {} values, got {}",
                lattice.n(),
                c.values.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("cochain values".into()));
        }
        c.values = values;
        Ok(c)
    }

    pub fn constant(lattice: Lattice, degree: usize, value: f64) -> Result<Self> {
        let mut c = Cochain::zeros(lattice, degree)?;
        c.values.iter_mut().for_each(|v| *v = value);
        Ok(c)
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn check_same(&self, other: &Cochain) -> Result<()> {
        if self.degree != other.degree || self.lattice != other.lattice {
            return Err(Error::Shape(format!(
                "cochain mismatch: degree {} on N={} vs degree {} on N={}",
                self.degree,
                self.lattice.n(),
                other.degree,
                other.lattice.n()
            )));
        }
        Ok(())
    }

    /// `self + s * other`.
    pub fn axpy(&mut self, s: f64, other: &Cochain) -> Result<()> {
        self.check_same(other)?;
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            *x += s * y;
        }
        Ok(())
    }

    pub fn scaled(&self, s: f64) -> Cochain {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn sub(&self, other: &Cochain) -> Result<Cochain> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    pub fn add(&self, other: &Cochain) -> Result<Cochain> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    /// `h^4`-weighted L2 inner product.
    pub fn inner(&self, other: &Cochain) -> Result<f64> {
        self.check_same(other)?;
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum();
        Ok(s * self.lattice.cell_volume())
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.lattice.cell_volume()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Mean value of a 1-cochain over direction-`mu` edges.
    pub fn direction_mean(&self, mu: usize) -> f64 {
        debug_assert_eq!(self.degree, 1);
        let sites = self.lattice.num_sites();
        (0..sites).map(|s| self.values[4 * s + mu]).sum::<f64>() / sites as f64
    }
}

/// Coboundary: forward differences divided by `h`.
pub fn d(c: &Cochain) -> Result<Cochain> {
    let lat = c.lattice;
    let inv_h = 1.0 / lat.h;
    match c.degree {
        0 => {
            let mut out = Cochain::zeros(lat, 1)?;
            for s in 0..lat.num_sites() {
                for mu in 0..4 {
                    out.values[4 * s + mu] = (c.values[lat.forward(s, mu)] - c.values[s]) * inv_h;
                }
            }
            Ok(out)
        }
        1 => {
            let mut out = Cochain::zeros(lat, 2)?;
            let a = &c.values;
            for s in 0..lat.num_sites() {
                for (p, &(mu, nu)) in PLANES.iter().enumerate() {
                    let dmu_anu = a[4 * lat.forward(s, mu) + nu] - a[4 * s + nu];
                    let dnu_amu = a[4 * lat.forward(s, nu) + mu] - a[4 * s + mu];
                    out.values[6 * s + p] = (dmu_anu - dnu_amu) * inv_h;
                }
            }
            Ok(out)
        }
        k => Err(Error::Degree(format!(
            "d is defined on degrees 0 and 1, got {k}"
        ))),
    }
}

/// Codifferential: the exact transpose of [`d`] under the `h^4`-weighted
/// inner product (backward differences).
pub fn d_star(c: &Cochain) -> Result<Cochain> {
    let lat = c.lattice;
    let inv_h = 1.0 / lat.h;
    match c.degree {
        1 => {
            let mut out = Cochain::zeros(lat, 0)?;
            for s in 0..lat.num_sites() {
                let mut acc = 0.0;
                for mu in 0..4 {
                    acc += c.values[4 * lat.backward(s, mu) + mu] - c.values[4 * s + mu];
                }
                out.values[s] = acc * inv_h;
            }
            Ok(out)
        }
        2 => {
            let mut out = Cochain::zeros(lat, 1)?;
            let f = &c.values;
            for s in 0..lat.num_sites() {
                for (p, &(mu, nu)) in PLANES.iter().enumerate() {
                    let v = f[6 * s + p] * inv_h;
                    // transpose of  F += a_nu(x+mu) - a_nu(x) - a_mu(x+nu) + a_mu(x)
                    out.values[4 * lat.forward(s, mu) + nu] += v;
                    out.values[4 * s + nu] -= v;
                    out.values[4 * lat.forward(s, nu) + mu] -= v;
                    out.values[4 * s + mu] += v;
                }
            }
            Ok(out)
        }
        k => Err(Error::Degree(format!(
            "d_star is defined on degrees 1 and 2, got {k}"
        ))),
    }
}

/// Hodge Laplacian `d d* + d* d` on 0- or 1-cochains.
pub fn hodge_laplacian(c: &Cochain) -> Result<Cochain> {
    match c.degree {
        0 => d_star(&d(c)?),
        1 => d(&d_star(c)?)?.add(&d_star(&d(c)?)?),
        k => Err(Error::Degree(format!(
            "Hodge Laplacian implemented for degrees 0 and 1, got {k}"
        ))),
    }
}

/// Pointwise projection onto self-dual 2-forms in the flat orthonormal frame:
/// `F+_{01} = F+_{23} = (F01 + F23)/2`, `F+_{02} = -F+_{13} = (F02 - F13)/2`,
/// `F+_{03} = F+_{12} = (F03 + F12)/2`.
pub fn self_dual(f: &Cochain) -> Result<Cochain> {
    if f.degree != 2 {
        return Err(Error::Degree(format!(
            "self_dual needs a 2-cochain, got degree {}",
            f.degree
        )));
    }
    let mut out = Cochain::zeros(f.lattice, 2)?;
    for (src, dst) in f.values.chunks_exact(6).zip(out.values.chunks_exact_mut(6)) {
        let s01 = 0.5 * (src[0] + src[5]);
        let s02 = 0.5 * (src[1] - src[4]);
        let s03 = 0.5 * (src[2] + src[3]);
        dst.copy_from_slice(&[s01, s02, s03, s03, -s02, s01]);
    }
    Ok(out)
}

/// Pointwise `F01 F23 - F02 F13 + F03 F12` integrated over the torus; the
/// lattice counterpart of `(1/2) \int F ^ F`.
pub fn wedge_pairing(f: &Cochain) -> Result<f64> {
    if f.degree != 2 {
        return Err(Error::Degree("wedge pairing needs a 2-cochain".into()));
    }
    let s: f64 = f
        .values
        .chunks_exact(6)
        .map(|c| c[0] * c[5] - c[1] * c[4] + c[2] * c[3])
        .sum();
    Ok(s * f.lattice.cell_volume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(lat: Lattice, degree: usize, rng: &mut ChaCha8Rng) -> Cochain {
        let mut c = Cochain::zeros(lat, degree).unwrap();
        c.values_mut()
            .iter_mut()
            .for_each(|v| *v = rng.gen_range(-1.0..1.0));
        c
    }

    #[test]
    fn rejects_bad_lattice() {
        assert!(Lattice::new(1, 1.0).is_err());
        assert!(Lattice::new(3, 0.0).is_err());
        assert!(Lattice::new(3, f64::NAN).is_err());
    }

    #[test]
    fn indexing_is_bijective() {
        let lat = Lattice::new(3, 1.0).unwrap();
        for s in 0..lat.num_sites() {
            assert_eq!(lat.site_index(lat.site_coords(s)), s);
            for mu in 0..4 {
                assert_eq!(lat.backward(lat.forward(s, mu), mu), s);
                assert_eq!(lat.coord(s, mu), lat.site_coords(s)[mu]);
                let e = lat.edge_index(s, mu);
                assert_eq!(lat.edge(e), (s, mu));
            }
            for &(mu, nu) in &PLANES {
                assert_eq!(lat.plaquette(lat.plaquette_index(s, mu, nu)), (s, mu, nu));
            }
        }
    }

    #[test]
    fn d_of_constant_vanishes() {
        let lat = Lattice::new(3, 0.7).unwrap();
        let c = Cochain::constant(lat, 0, 2.5).unwrap();
        assert_eq!(d(&c).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn d_of_site_indicator() {
        let lat = Lattice::new(2, 1.0).unwrap();
        let mut chi = Cochain::zeros(lat, 0).unwrap();
        chi.values_mut()[0] = 1.0;
        let dchi = d(&chi).unwrap();
        for mu in 0..4 {
            assert_eq!(dchi.values()[lat.edge_index(0, mu)], -1.0);
            let tail = lat.backward(0, mu);
            assert_eq!(dchi.values()[lat.edge_index(tail, mu)], 1.0);
        }
        // with N=2 the edge entering site 0 along mu is the one leaving x-mu = x+mu
        let nonzero = dchi.values().iter().filter(|v| **v != 0.0).count();
        assert_eq!(nonzero, 8);
    }

    #[test]
    fn d_squared_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let lat = Lattice::new(3, 0.5).unwrap();
        let chi = random(lat, 0, &mut rng);
        let dd = d(&d(&chi).unwrap()).unwrap();
        let scale = chi.norm() / (lat.spacing() * lat.spacing());
        assert!(dd.norm() <= 1e-13 * scale, "{}", dd.norm());
    }

    #[test]
    fn d_star_is_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let lat = Lattice::new(3, 0.8).unwrap();
        for _ in 0..100 {
            for k in 0..2 {
                let c = random(lat, k, &mut rng);
                let e = random(lat, k + 1, &mut rng);
                let lhs = d(&c).unwrap().inner(&e).unwrap();
                let rhs = c.inner(&d_star(&e).unwrap()).unwrap();
                let scale = d(&c).unwrap().norm() * e.norm();
                assert!((lhs - rhs).abs() <= 1e-12 * scale);
            }
        }
        let zero = Cochain::zeros(lat, 2).unwrap();
        assert_eq!(d_star(&zero).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn degree_errors() {
        let lat = Lattice::new(2, 1.0).unwrap();
        assert!(matches!(
            d(&Cochain::zeros(lat, 2).unwrap()),
            Err(Error::Degree(_))
        ));
        assert!(matches!(
            d_star(&Cochain::zeros(lat, 0).unwrap()),
            Err(Error::Degree(_))
        ));
        assert!(matches!(
            self_dual(&Cochain::zeros(lat, 1).unwrap()),
            Err(Error::Degree(_))
        ));
        assert!(Cochain::zeros(lat, 3).is_err());
        let a = Cochain::zeros(lat, 0).unwrap();
        let b = Cochain::zeros(lat, 1).unwrap();
        assert!(matches!(a.inner(&b), Err(Error::Shape(_))));
    }

    #[test]
    fn inner_product_values() {
        let lat = Lattice::new(2, 1.0).unwrap();
        let ones = Cochain::constant(lat, 0, 1.0).unwrap();
        assert_eq!(ones.inner(&ones).unwrap(), 16.0);
        let lat2 = Lattice::new(2, 2.0).unwrap();
        let ones2 = Cochain::constant(lat2, 0, 1.0).unwrap();
        assert_eq!(ones2.inner(&ones2).unwrap(), 256.0);
    }

    #[test]
    fn scalar_laplacian_spectrum_n2() {
        // Dense oracle: materialize d* d on 0-cochains and diagonalize.
        let lat = Lattice::new(2, 1.0).unwrap();
        let n = lat.num_sites();
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = Cochain::zeros(lat, 0).unwrap();
            e.values_mut()[j] = 1.0;
            let col = d_star(&d(&e).unwrap()).unwrap();
            for i in 0..n {
                m[(i, j)] = col.values()[i];
            }
        }
        let mut eig: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // Fourier modes k in {0,1}^4: 4 sin^2(pi k/2) = 4 k; binomial multiplicities.
        let mut expected = Vec::new();
        for (val, mult) in [(0.0, 1), (4.0, 4), (8.0, 6), (12.0, 4), (16.0, 1)] {
            expected.extend(std::iter::repeat_n(val, mult));
        }
        for (a, b) in eig.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn hodge_laplacian_is_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let lat = Lattice::new(3, 1.3).unwrap();
        for _ in 0..50 {
            for k in 0..2 {
                let c = random(lat, k, &mut rng);
                let q = c.inner(&hodge_laplacian(&c).unwrap()).unwrap();
                assert!(q >= -1e-12 * c.norm_sqr());
            }
        }
    }

    #[test]
    fn self_dual_projector() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let lat = Lattice::new(2, 1.0).unwrap();
        let f = random(lat, 2, &mut rng);
        let p = self_dual(&f).unwrap();
        let pp = self_dual(&p).unwrap();
        assert!(pp.sub(&p).unwrap().max_abs() <= 1e-14);
        let rest = f.sub(&p).unwrap();
        assert!(rest.inner(&p).unwrap().abs() <= 1e-12 * f.norm_sqr());
        let split = p.norm_sqr() + rest.norm_sqr();
        assert!((split - f.norm_sqr()).abs() <= 1e-12 * f.norm_sqr());

        let mut single = Cochain::zeros(lat, 2).unwrap();
        single.values_mut()[6 * 5] = 1.0;
        let sp = self_dual(&single).unwrap();
        assert_eq!(&sp.values()[30..36], &[0.5, 0.0, 0.0, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn self_dual_rank() {
        let lat = Lattice::new(2, 1.0).unwrap();
        let n = lat.num_plaquettes();
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = Cochain::zeros(lat, 2).unwrap();
            e.values_mut()[j] = 1.0;
            let col = self_dual(&e).unwrap();
            for i in 0..n {
                m[(i, j)] = col.values()[i];
            }
        }
        assert!((&m - m.transpose()).amax() < 1e-15);
        let rank = SymmetricEigen::new(m)
            .eigenvalues
            .iter()
            .filter(|v| v.abs() > 1e-10)
            .count();
        assert_eq!(rank, 3 * lat.num_sites());
    }
}
