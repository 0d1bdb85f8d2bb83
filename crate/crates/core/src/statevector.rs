//! Dense statevector register.
//!
//! Qubit 0 is the least significant bit of the basis-state integer. Gates are
//! applied in place as exact dense 2×2 or 4×4 unitaries; the norm is never
//! corrected after loading, so drift shows up in tests instead of being hidden.
//!
//! Inside a 4×4 gate acting on qubits `(a, b)` the local basis index is
//! `bit_a + 2·bit_b`.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::scalar::{abs2, cone, czero, lit, to_f64, Real};

pub type Mat2<T> = Matrix2<Complex<T>>;
pub type Mat4<T> = Matrix4<Complex<T>>;

/// Tolerance used for unitarity and hermiticity checks.
pub fn structure_tol<T: Real>() -> T {
    let floor: T = lit(1e-10);
    let scaled = T::eps() * lit(1e3);
    if scaled > floor {
        scaled
    } else {
        floor
    }
}

/// Largest entrywise deviation of `U†U` from the identity.
pub fn unitarity_deviation<T: Real, const N: usize>(m: &nalgebra::SMatrix<Complex<T>, N, N>) -> T {
    let prod = m.adjoint() * m;
    let mut worst = T::zero();
    for r in 0..N {
        for c in 0..N {
            let target = if r == c { cone() } else { czero() };
            let d = abs2(prod[(r, c)] - target).sqrt();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Largest entrywise deviation of `H` from `H†`.
pub fn hermiticity_deviation<T: Real, const N: usize>(
    m: &nalgebra::SMatrix<Complex<T>, N, N>,
) -> T {
    let mut worst = T::zero();
    for r in 0..N {
        for c in 0..N {
            let d = abs2(m[(r, c)] - m[(c, r)].conj()).sqrt();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// A 4×4 unitary bound to an ordered pair of distinct target qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoQubitUnitary<T: Real> {
    matrix: Mat4<T>,
    a: usize,
    b: usize,
}

impl<T: Real> TwoQubitUnitary<T> {
    pub fn new(matrix: Mat4<T>, a: usize, b: usize) -> Result<Self> {
        if a == b {
            return Err(Error::TargetClash(a, b));
        }
        let deviation = unitarity_deviation(&matrix);
        if deviation > structure_tol() {
            return Err(Error::NotUnitary {
                deviation: to_f64(deviation),
            });
        }
        Ok(Self { matrix, a, b })
    }

    /// Skips the unitarity check; callers construct `matrix` as an exact exponential.
    pub(crate) fn from_exact(matrix: Mat4<T>, a: usize, b: usize) -> Self {
        debug_assert!(a != b);
        Self { matrix, a, b }
    }

    pub fn matrix(&self) -> &Mat4<T> {
        &self.matrix
    }

    pub fn targets(&self) -> (usize, usize) {
        (self.a, self.b)
    }
}

/// A Hermitian two-site operator, e.g. one bond of a Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianTerm<T: Real> {
    pub matrix: Mat4<T>,
    pub a: usize,
    pub b: usize,
}

/// Dense complex amplitude vector over `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState<T: Real> {
    n_qubits: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Real> QuantumState<T> {
    /// Computational basis state `|basis_index⟩`.
    pub fn basis(n_qubits: usize, basis_index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if basis_index >= dim {
            return Err(Error::BasisIndexOutOfRange {
                index: basis_index,
                n_qubits,
            });
        }
        let mut amps = vec![czero(); dim];
        amps[basis_index] = cone();
        Ok(Self { n_qubits, amps })
    }

    /// Loads an externally prepared state. The input must be normalized to
    /// within 1e-6 and is renormalized exactly on load.
    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if amplitudes.len() != dim {
            return Err(Error::WrongLength {
                expected: dim,
                got: amplitudes.len(),
            });
        }
        let norm = amplitudes
            .iter()
            .fold(T::zero(), |acc, z| acc + abs2(*z))
            .sqrt();
        if norm == T::zero() {
            return Err(Error::ZeroVector);
        }
        let load_tol: T = lit(1e-6);
        if (norm - T::one()).abs() > load_tol {
            return Err(Error::NotNormalized { norm: to_f64(norm) });
        }
        let inv = T::one() / norm;
        let amps = amplitudes.into_iter().map(|z| z.scale(inv)).collect();
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().fold(T::zero(), |acc, z| acc + abs2(*z))
    }

    /// Appends one qubit in `|0⟩` above the current register (the ancilla slot).
    pub fn with_ancilla(&self) -> Self {
        let mut amps = self.amps.clone();
        amps.resize(self.amps.len() * 2, czero());
        Self {
            n_qubits: self.n_qubits + 1,
            amps,
        }
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            Err(Error::QubitOutOfRange {
                qubit: q,
                n_qubits: self.n_qubits,
            })
        } else {
            Ok(())
        }
    }

    fn check_targets(&self, a: usize, b: usize) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(Error::TargetClash(a, b));
        }
        Ok(())
    }

    pub fn apply_single_qubit(&mut self, u: &Mat2<T>, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let deviation = unitarity_deviation(u);
        if deviation > structure_tol() {
            return Err(Error::NotUnitary {
                deviation: to_f64(deviation),
            });
        }
        let m = [[u[(0, 0)], u[(0, 1)]], [u[(1, 0)], u[(1, 1)]]];
        let mask = 1usize << q;
        for base in 0..self.amps.len() / 2 {
            let i0 = insert_zero_bit(base, q);
            let i1 = i0 | mask;
            let (x0, x1) = (self.amps[i0], self.amps[i1]);
            self.amps[i0] = m[0][0] * x0 + m[0][1] * x1;
            self.amps[i1] = m[1][0] * x0 + m[1][1] * x1;
        }
        Ok(())
    }

    pub fn apply_two_qubit(&mut self, gate: &TwoQubitUnitary<T>) -> Result<()> {
        let (a, b) = gate.targets();
        self.check_targets(a, b)?;
        let m = to_array(gate.matrix());
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (ma, mb) = (1usize << a, 1usize << b);
        for base in 0..self.amps.len() / 4 {
            let i0 = insert_zero_bit(insert_zero_bit(base, lo), hi);
            apply4(&mut self.amps, &m, [i0, i0 | ma, i0 | mb, i0 | ma | mb]);
        }
        Ok(())
    }

    /// Applies `gate` on the subspace where `control` is 1.
    pub fn apply_controlled_two_qubit(
        &mut self,
        gate: &TwoQubitUnitary<T>,
        control: usize,
    ) -> Result<()> {
        let (a, b) = gate.targets();
        self.check_targets(a, b)?;
        self.check_qubit(control)?;
        if control == a || control == b {
            return Err(Error::ControlClash { control });
        }
        let m = to_array(gate.matrix());
        let mut zeros = [a, b, control];
        zeros.sort_unstable();
        let (ma, mb, mc) = (1usize << a, 1usize << b, 1usize << control);
        for base in 0..self.amps.len() / 8 {
            let i0 = insert_zero_bit(
                insert_zero_bit(insert_zero_bit(base, zeros[0]), zeros[1]),
                zeros[2],
            ) | mc;
            apply4(&mut self.amps, &m, [i0, i0 | ma, i0 | mb, i0 | ma | mb]);
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner_product(&self, other: &Self) -> Result<Complex<T>> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch(self.n_qubits, other.n_qubits));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .fold(czero(), |acc, (x, y)| acc + x.conj() * y))
    }

    /// `Σ_k ⟨ψ|H_k|ψ⟩` for Hermitian two-site terms.
    pub fn expectation(&self, terms: &[HermitianTerm<T>]) -> Result<T> {
        let mut total = czero::<T>();
        for term in terms {
            self.check_targets(term.a, term.b)?;
            let deviation = hermiticity_deviation(&term.matrix);
            if deviation > structure_tol() {
                return Err(Error::NotHermitian {
                    deviation: to_f64(deviation),
                });
            }
            let m = to_array(&term.matrix);
            let (lo, hi) = if term.a < term.b {
                (term.a, term.b)
            } else {
                (term.b, term.a)
            };
            let (ma, mb) = (1usize << term.a, 1usize << term.b);
            for base in 0..self.amps.len() / 4 {
                let i0 = insert_zero_bit(insert_zero_bit(base, lo), hi);
                let idx = [i0, i0 | ma, i0 | mb, i0 | ma | mb];
                let x = idx.map(|i| self.amps[i]);
                for r in 0..4 {
                    let mut hx = czero::<T>();
                    for c in 0..4 {
                        hx += m[r][c] * x[c];
                    }
                    total += x[r].conj() * hx;
                }
            }
        }
        Ok(total.re)
    }

    /// Probability of reading qubit `q` as 0 (σ_z = +1).
    pub fn ancilla_plus_probability(&self, q: usize) -> Result<T> {
        self.check_qubit(q)?;
        let mask = 1usize << q;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == 0)
            .fold(T::zero(), |acc, (_, z)| acc + abs2(*z)))
    }

    /// Probability of reading qubit `q` as 1.
    pub fn qubit_probability_one(&self, q: usize) -> Result<T> {
        Ok(self.norm_sqr() - self.ancilla_plus_probability(q)?)
    }

    /// Multiplies every amplitude by `factor`.
    pub fn scale(&mut self, factor: Complex<T>) {
        for z in &mut self.amps {
            *z *= factor;
        }
    }
}

/// Draws `(n_plus, n_minus)` from a binomial with success probability `p`.
pub fn sample_counts(p: f64, shots: u64, seed: u64) -> Result<(u64, u64)> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::InvalidProbability(p));
    }
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Binomial::new(shots, p).map_err(|_| Error::InvalidProbability(p))?;
    let n_plus = dist.sample(&mut rng);
    Ok((n_plus, shots - n_plus))
}

#[inline]
fn insert_zero_bit(x: usize, bit: usize) -> usize {
    let low = x & ((1usize << bit) - 1);
    ((x >> bit) << (bit + 1)) | low
}

#[inline]
fn to_array<T: Real>(m: &Mat4<T>) -> [[Complex<T>; 4]; 4] {
    let mut out = [[czero(); 4]; 4];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = m[(r, c)];
        }
    }
    out
}

#[inline]
fn apply4<T: Real>(amps: &mut [Complex<T>], m: &[[Complex<T>; 4]; 4], idx: [usize; 4]) {
    let x = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
    for r in 0..4 {
        amps[idx[r]] = m[r][0] * x[0] + m[r][1] * x[1] + m[r][2] * x[2] + m[r][3] * x[3];
    }
}

/// Standard gate matrices.
pub mod gates {
    use super::*;
    use crate::scalar::creal;

    pub fn identity2<T: Real>() -> Mat2<T> {
        Mat2::identity()
    }

    pub fn hadamard<T: Real>() -> Mat2<T> {
        let h = creal(T::FRAC_1_SQRT_2());
        Mat2::new(h, h, h, -h)
    }

    pub fn pauli_x<T: Real>() -> Mat2<T> {
        Mat2::new(czero(), cone(), cone(), czero())
    }

    pub fn identity4<T: Real>() -> Mat4<T> {
        Mat4::identity()
    }

    pub fn swap<T: Real>() -> Mat4<T> {
        let mut m = Mat4::zeros();
        m[(0, 0)] = cone();
        m[(1, 2)] = cone();
        m[(2, 1)] = cone();
        m[(3, 3)] = cone();
        m
    }

    /// `e^{iα}·I` on two qubits.
    pub fn global_phase4<T: Real>(alpha: T) -> Mat4<T> {
        Mat4::identity() * crate::scalar::cis(alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::gates::*;
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    type State = QuantumState<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn random_state(n: usize, seed: u64) -> State {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<Complex<f64>> = (0..1 << n)
            .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        State::from_amplitudes(n, v).unwrap()
    }

    #[test]
    fn basis_states() {
        let s = State::basis(1, 0).unwrap();
        assert_eq!(s.amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        let s = State::basis(2, 3).unwrap();
        assert_eq!(s.amplitudes()[3], c(1.0, 0.0));
        let s = State::basis(4, 5).unwrap();
        assert_eq!(s.qubit_probability_one(0).unwrap(), 1.0);
        assert_eq!(s.qubit_probability_one(1).unwrap(), 0.0);
        assert_eq!(s.qubit_probability_one(2).unwrap(), 1.0);
        assert_eq!(s.norm_sqr(), 1.0);
        assert!(matches!(
            State::basis(2, 4),
            Err(Error::BasisIndexOutOfRange { .. })
        ));
    }

    #[test]
    fn loading_amplitudes() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = State::from_amplitudes(1, vec![c(h, 0.0), c(h, 0.0)]).unwrap();
        assert_abs_diff_eq!(plus.norm_sqr(), 1.0, epsilon = 1e-12);
        let singlet =
            State::from_amplitudes(2, vec![c(0.0, 0.0), c(h, 0.0), c(-h, 0.0), c(0.0, 0.0)])
                .unwrap();
        assert_abs_diff_eq!(singlet.norm_sqr(), 1.0, epsilon = 1e-12);

        // within the load tolerance, renormalized exactly
        let s = State::from_amplitudes(1, vec![c(1.0 + 4e-7, 0.0), c(0.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-12);

        assert!(matches!(
            State::from_amplitudes(2, vec![c(1.0, 0.0)]),
            Err(Error::WrongLength { .. })
        ));
        assert_eq!(
            State::from_amplitudes(1, vec![c(0.0, 0.0), c(0.0, 0.0)]),
            Err(Error::ZeroVector)
        );
        assert!(matches!(
            State::from_amplitudes(1, vec![c(2.0, 0.0), c(0.0, 0.0)]),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn single_qubit_gates() {
        let mut s = State::basis(1, 0).unwrap();
        s.apply_single_qubit(&hadamard(), 0).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(s.amplitudes()[0].re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitudes()[1].re, h, epsilon = 1e-15);

        let r = random_state(3, 11);
        let mut s = r.clone();
        s.apply_single_qubit(&identity2(), 1).unwrap();
        assert_eq!(s, r);
        for q in 0..3 {
            s.apply_single_qubit(&hadamard(), q).unwrap();
            s.apply_single_qubit(&hadamard(), q).unwrap();
        }
        for (x, y) in s.amplitudes().iter().zip(r.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }

        assert!(matches!(
            s.apply_single_qubit(&hadamard(), 3),
            Err(Error::QubitOutOfRange { .. })
        ));
        let bad = Mat2::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        assert!(matches!(
            s.apply_single_qubit(&bad, 0),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn two_qubit_gates() {
        // |01⟩ means qubit 0 set: basis index 1
        let mut s = State::basis(2, 1).unwrap();
        s.apply_two_qubit(&TwoQubitUnitary::new(swap(), 0, 1).unwrap())
            .unwrap();
        assert_eq!(s.amplitudes()[2], c(1.0, 0.0));

        assert_eq!(
            TwoQubitUnitary::new(swap::<f64>(), 1, 1),
            Err(Error::TargetClash(1, 1))
        );
        let mut bad = swap::<f64>();
        bad[(0, 0)] = c(2.0, 0.0);
        assert!(matches!(
            TwoQubitUnitary::new(bad, 0, 1),
            Err(Error::NotUnitary { .. })
        ));
        let gate = TwoQubitUnitary::new(swap(), 0, 5).unwrap();
        assert!(matches!(
            s.apply_two_qubit(&gate),
            Err(Error::QubitOutOfRange { .. })
        ));
    }

    #[test]
    fn controlled_gates() {
        let r = random_state(2, 3);
        let mut s = r.with_ancilla();
        let gate = TwoQubitUnitary::new(swap(), 0, 1).unwrap();
        s.apply_controlled_two_qubit(&gate, 2).unwrap();
        assert_eq!(s, r.with_ancilla());

        // control |1⟩ ⊗ |01⟩ -> |1⟩ ⊗ |10⟩
        let mut s = State::basis(3, 0b101).unwrap();
        s.apply_controlled_two_qubit(&gate, 2).unwrap();
        assert_eq!(s.amplitudes()[0b110], c(1.0, 0.0));

        assert_eq!(
            s.apply_controlled_two_qubit(&gate, 1),
            Err(Error::ControlClash { control: 1 })
        );
    }

    #[test]
    fn phase_kickback() {
        for alpha in [
            0.0,
            std::f64::consts::FRAC_PI_3,
            std::f64::consts::FRAC_PI_2,
            std::f64::consts::PI,
        ] {
            let mut s = State::basis(3, 0).unwrap();
            s.apply_single_qubit(&hadamard(), 2).unwrap();
            let gate = TwoQubitUnitary::new(global_phase4(alpha), 0, 1).unwrap();
            s.apply_controlled_two_qubit(&gate, 2).unwrap();
            s.apply_single_qubit(&hadamard(), 2).unwrap();
            let p = s.ancilla_plus_probability(2).unwrap();
            assert_abs_diff_eq!(p, (alpha / 2.0).cos().powi(2), epsilon = 1e-12);
        }
    }

    #[test]
    fn inner_products() {
        let r = random_state(3, 5);
        assert_abs_diff_eq!(r.inner_product(&r).unwrap().re, 1.0, epsilon = 1e-12);
        let zero = State::basis(1, 0).unwrap();
        let one = State::basis(1, 1).unwrap();
        assert_eq!(zero.inner_product(&one).unwrap(), c(0.0, 0.0));
        let mut plus = zero.clone();
        plus.apply_single_qubit(&hadamard(), 0).unwrap();
        assert_abs_diff_eq!(
            plus.inner_product(&zero).unwrap().re,
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-15
        );
        let q = random_state(3, 6);
        let (ab, ba) = (r.inner_product(&q).unwrap(), q.inner_product(&r).unwrap());
        assert!((ab - ba.conj()).norm() < 1e-15);
        assert!(matches!(
            r.inner_product(&zero),
            Err(Error::DimensionMismatch(3, 1))
        ));
    }

    #[test]
    fn ancilla_probabilities() {
        let s = State::basis(2, 0).unwrap();
        assert_eq!(s.ancilla_plus_probability(1).unwrap(), 1.0);
        let mut s = State::basis(2, 0).unwrap();
        s.apply_single_qubit(&hadamard(), 1).unwrap();
        assert_abs_diff_eq!(s.ancilla_plus_probability(1).unwrap(), 0.5, epsilon = 1e-15);
        assert!(s.ancilla_plus_probability(2).is_err());
    }

    #[test]
    fn expectation_rejects_non_hermitian() {
        let s = State::basis(2, 0).unwrap();
        let mut m = Mat4::<f64>::zeros();
        m[(0, 1)] = c(1.0, 0.0);
        let terms = [HermitianTerm {
            matrix: m,
            a: 0,
            b: 1,
        }];
        assert!(matches!(
            s.expectation(&terms),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn sampling() {
        assert_eq!(sample_counts(1.0, 1000, 3).unwrap(), (1000, 0));
        assert_eq!(sample_counts(0.0, 1000, 3).unwrap(), (0, 1000));
        let (plus, minus) = sample_counts(0.5, 100_000, 7).unwrap();
        assert_eq!(plus + minus, 100_000);
        assert!((49_200..=50_800).contains(&plus), "{plus}");
        assert_eq!(
            sample_counts(0.5, 100_000, 7).unwrap(),
            sample_counts(0.5, 100_000, 7).unwrap()
        );
        assert_eq!(
            sample_counts(1.5, 10, 0),
            Err(Error::InvalidProbability(1.5))
        );
        assert_eq!(sample_counts(0.5, 0, 0), Err(Error::ZeroShots));
    }

    #[test]
    fn works_in_single_precision() {
        let mut s = QuantumState::<f32>::basis(3, 0).unwrap();
        for q in 0..3 {
            s.apply_single_qubit(&hadamard(), q).unwrap();
        }
        let gate = TwoQubitUnitary::new(swap::<f32>(), 0, 2).unwrap();
        s.apply_two_qubit(&gate).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-6);
    }
}
