//! Spin bases and the sparse twisted Heisenberg operator on them.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::models::{ModelSpec, TwistVector};
use crate::scalar::{cis, czero, lit, Real};
use crate::statevector::QuantumState;

/// Largest register the oracle will enumerate.
pub const MAX_SITES: usize = 24;

/// A list of computational basis configurations, sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpinBasis {
    n_sites: usize,
    states: Vec<u32>,
    full: bool,
}

impl SpinBasis {
    /// Every configuration of `n_sites` spins.
    pub fn full(n_sites: usize) -> Result<Self> {
        if n_sites > MAX_SITES {
            return Err(Error::TooLarge(n_sites));
        }
        Ok(Self {
            n_sites,
            states: (0..1u32 << n_sites).collect(),
            full: true,
        })
    }

    /// Configurations with total `S_z = 0` (half the spins flipped).
    pub fn sz_zero(n_sites: usize) -> Result<Self> {
        if n_sites > MAX_SITES {
            return Err(Error::TooLarge(n_sites));
        }
        if !n_sites.is_multiple_of(2) {
            return Err(Error::InvalidModel(format!(
                "no S_z = 0 sector for {n_sites} sites"
            )));
        }
        let half = (n_sites / 2) as u32;
        let states = (0..1u32 << n_sites)
            .filter(|s| s.count_ones() == half)
            .collect();
        Ok(Self {
            n_sites,
            states,
            full: false,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }

    pub fn index_of(&self, state: u32) -> Option<usize> {
        if self.full {
            ((state as usize) < self.states.len()).then_some(state as usize)
        } else {
            self.states.binary_search(&state).ok()
        }
    }

    /// Lifts sector coefficients into a full register of `n_sites` qubits.
    pub fn embed<T: Real>(&self, coeffs: &[Complex<T>]) -> Result<QuantumState<T>> {
        if coeffs.len() != self.dim() {
            return Err(Error::WrongLength {
                expected: self.dim(),
                got: coeffs.len(),
            });
        }
        let mut amps = vec![czero(); 1 << self.n_sites];
        for (&s, &c) in self.states.iter().zip(coeffs) {
            amps[s as usize] = c;
        }
        QuantumState::from_amplitudes(self.n_sites, amps)
    }

    /// Projects a full-register state onto this basis (no renormalization).
    pub fn restrict<T: Real>(&self, state: &QuantumState<T>) -> Result<Vec<Complex<T>>> {
        if state.n_qubits() != self.n_sites {
            return Err(Error::DimensionMismatch(state.n_qubits(), self.n_sites));
        }
        let amps = state.amplitudes();
        Ok(self.states.iter().map(|&s| amps[s as usize]).collect())
    }
}

#[derive(Clone, Copy, Debug)]
struct Hop {
    /// Configuration with `site_i` down and `site_j` up.
    from: u32,
    /// Same with both spins exchanged.
    to: u32,
    bond: u32,
}

/// `H(φ)` restricted to a basis; the diagonal and the hopping pattern are
/// twist independent and precomputed.
#[derive(Clone, Debug)]
pub struct SectorHamiltonian<T: Real> {
    basis: Arc<SpinBasis>,
    diag: Vec<T>,
    hops: Vec<Hop>,
    couplings: Vec<T>,
    slots: Vec<Option<u8>>,
    norm_bound: T,
}

impl<T: Real> SectorHamiltonian<T> {
    pub fn new(model: &ModelSpec<T>, basis: Arc<SpinBasis>) -> Result<Self> {
        if basis.n_sites() != model.n_sites() {
            return Err(Error::DimensionMismatch(basis.n_sites(), model.n_sites()));
        }
        let quarter: T = lit(0.25);
        let mut diag = vec![T::zero(); basis.dim()];
        let mut hops = Vec::new();
        for (k, &s) in basis.states().iter().enumerate() {
            for (b, bond) in model.bonds.iter().enumerate() {
                let bi = (s >> bond.site_i) & 1;
                let bj = (s >> bond.site_j) & 1;
                if bi == bj {
                    diag[k] += bond.coupling * quarter;
                } else {
                    diag[k] -= bond.coupling * quarter;
                    if bi == 1 {
                        let flipped = s ^ (1 << bond.site_i) ^ (1 << bond.site_j);
                        let to = basis
                            .index_of(flipped)
                            .expect("spin exchange preserves S_z");
                        hops.push(Hop {
                            from: k as u32,
                            to: to as u32,
                            bond: b as u32,
                        });
                    }
                }
            }
        }
        Ok(Self {
            basis,
            diag,
            hops,
            couplings: model.bonds.iter().map(|b| b.coupling).collect(),
            slots: model.bonds.iter().map(|b| b.twist_slot).collect(),
            norm_bound: model.norm_bound(),
        })
    }

    pub fn basis(&self) -> &Arc<SpinBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn norm_bound(&self) -> T {
        self.norm_bound
    }

    /// Exchange amplitude `(J/2)e^{-iφ}` of every bond at `twists`.
    fn hop_amplitudes(&self, twists: &TwistVector<T>) -> Vec<Complex<T>> {
        let half: T = lit(0.5);
        self.couplings
            .iter()
            .zip(&self.slots)
            .map(|(&j, slot)| {
                let phi = slot.map_or(T::zero(), |s| twists[usize::from(s) - 1]);
                cis(-phi).scale(j * half)
            })
            .collect()
    }

    /// Binds a twist vector, yielding an operator that can be applied.
    pub fn at(&self, twists: &TwistVector<T>) -> BoundHamiltonian<'_, T> {
        BoundHamiltonian {
            ham: self,
            amplitudes: self.hop_amplitudes(twists),
        }
    }
}

/// [`SectorHamiltonian`] evaluated at one twist vector.
pub struct BoundHamiltonian<'a, T: Real> {
    ham: &'a SectorHamiltonian<T>,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> BoundHamiltonian<'_, T> {
    /// `y = H x`.
    pub fn apply(&self, x: &[Complex<T>], y: &mut [Complex<T>]) {
        for ((yk, xk), d) in y.iter_mut().zip(x).zip(&self.ham.diag) {
            *yk = xk.scale(*d);
        }
        for hop in &self.ham.hops {
            let c = self.amplitudes[hop.bond as usize];
            let (f, t) = (hop.from as usize, hop.to as usize);
            y[t] += c * x[f];
            y[f] += c.conj() * x[t];
        }
    }

    pub fn dense(&self) -> DMatrix<Complex<T>> {
        let n = self.ham.dim();
        let mut m = DMatrix::from_element(n, n, czero());
        for (k, &d) in self.ham.diag.iter().enumerate() {
            m[(k, k)] = Complex::new(d, T::zero());
        }
        for hop in &self.ham.hops {
            let c = self.amplitudes[hop.bond as usize];
            let (f, t) = (hop.from as usize, hop.to as usize);
            m[(t, f)] += c;
            m[(f, t)] += c.conj();
        }
        m
    }

    /// `⟨x|H|x⟩` for a normalized `x`.
    pub fn expectation(&self, x: &[Complex<T>]) -> T {
        let mut y = vec![czero(); x.len()];
        self.apply(x, &mut y);
        x.iter()
            .zip(&y)
            .fold(T::zero(), |acc, (a, b)| acc + (a.conj() * b).re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_dimerized_chain, build_tetramerized_lattice, Plaquette};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sector_dimensions() {
        assert_eq!(SpinBasis::sz_zero(16).unwrap().dim(), 12_870);
        assert_eq!(SpinBasis::sz_zero(4).unwrap().dim(), 6);
        assert_eq!(SpinBasis::full(4).unwrap().dim(), 16);
        assert!(SpinBasis::sz_zero(5).is_err());
        assert!(matches!(SpinBasis::full(30), Err(Error::TooLarge(30))));
    }

    #[test]
    fn sparse_operator_matches_bond_terms() {
        let model = build_tetramerized_lattice(2, 4, 1.0, 0.35, Plaquette::type_i()).unwrap();
        let basis = Arc::new(SpinBasis::full(8).unwrap());
        let ham = SectorHamiltonian::new(&model, basis.clone()).unwrap();
        let twists = [0.3, -1.1, 2.0, 0.7];
        let bound = ham.at(&twists);
        let terms = model.terms(&twists);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let mut v: Vec<Complex<f64>> = (0..256)
                .map(|_| Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|z| *z /= n);
            let psi = basis.embed(&v).unwrap();
            let want = psi.expectation(&terms).unwrap();
            assert!((bound.expectation(&v) - want).abs() < 1e-12);
        }
        let d = bound.dense();
        assert!((&d - d.adjoint()).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn embed_and_restrict_round_trip() {
        let basis = SpinBasis::sz_zero(6).unwrap();
        let n = basis.dim() as f64;
        let v = vec![Complex::new(1.0 / n.sqrt(), 0.0); basis.dim()];
        let psi = basis.embed(&v).unwrap();
        let back = basis.restrict(&psi).unwrap();
        assert!(back.iter().zip(&v).all(|(a, b)| (a - b).norm() < 1e-15));
        let model = build_dimerized_chain(6, 1.0, 0.5, 0).unwrap();
        assert!(SectorHamiltonian::new(&model, Arc::new(SpinBasis::sz_zero(4).unwrap())).is_err());
    }
}
