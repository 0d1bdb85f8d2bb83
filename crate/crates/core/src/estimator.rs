//! Hadamard-test readout of the loop phase.
//!
//! The ancilla sees `P(+) = (1 + Re⟨ψ₀|W|ψ₀⟩)/2 = cos²(φ/2)` where `W` is the
//! half-time loop evolution. Shots are drawn from the exact marginal with a
//! seeded binomial.

use num_complex::Complex;

use crate::adiabatic::{evolve_half_time, NoMonitor, StepMonitor, TrotterPlan};
use crate::error::{Error, Result};
use crate::models::{partition, HamiltonianPartition, ModelSpec};
use crate::oracle::{classify_phase, ground_state, Classification};
use crate::scalar::{arg, cabs, to_f64, Real};
use crate::schedule::TwistSchedule;
use crate::statevector::{gates, sample_counts, QuantumState};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;
/// Overlap magnitude below which adiabaticity is suspect.
pub const OVERLAP_WARNING: f64 = 0.9;

/// Phase and interval recovered from ancilla counts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CountEstimate {
    pub p_hat: f64,
    pub phi_hat: f64,
    /// 95% half-width on `phi_hat`.
    pub ci_halfwidth: f64,
    /// True at `p_hat ∈ {0, 1}`, where the interval only extends inwards.
    pub one_sided: bool,
}

/// `p̂ = n₊/n`, `φ̂ = 2·acos(√p̂)`.
///
/// The propagated normal interval is `z/√n` for `0 < p̂ < 1`, since
/// `|dφ/dp|·σ_p = 1/√n` exactly. At the boundary the derivative diverges and
/// the interval comes from the rule-of-three bound on `p` instead.
pub fn phase_from_counts(n_plus: u64, n_minus: u64) -> Result<CountEstimate> {
    let shots = n_plus + n_minus;
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let n = shots as f64;
    let p_hat = n_plus as f64 / n;
    let phi_hat = 2.0 * p_hat.sqrt().clamp(0.0, 1.0).acos();
    let (ci_halfwidth, one_sided) = if n_plus == 0 || n_minus == 0 {
        let edge = (3.0 / n).min(1.0);
        let inner = if n_minus == 0 { 1.0 - edge } else { edge };
        ((2.0 * inner.sqrt().acos() - phi_hat).abs(), true)
    } else {
        (Z95 / n.sqrt(), false)
    };
    Ok(CountEstimate {
        p_hat,
        phi_hat,
        ci_halfwidth,
        one_sided,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BerryEstimate {
    /// Exact ancilla marginal before sampling.
    pub p_exact: f64,
    pub n_plus: u64,
    pub shots: u64,
    pub p_hat: f64,
    /// In `[0, π]`; the Hadamard test cannot see the sign.
    pub phi_hat: f64,
    pub ci_halfwidth: f64,
    pub one_sided: bool,
    pub classification: Classification,
    /// `|⟨ψ₀|W|ψ₀⟩|` when the direct amplitude was also computed.
    pub overlap_magnitude: Option<f64>,
    pub gate_count: usize,
}

impl BerryEstimate {
    /// Samples `shots` outcomes from `p_exact`.
    pub fn from_probability(
        p_exact: f64,
        shots: u64,
        seed: u64,
        gate_count: usize,
    ) -> Result<Self> {
        let p = p_exact.clamp(0.0, 1.0);
        let (n_plus, n_minus) = sample_counts(p, shots, seed)?;
        let c = phase_from_counts(n_plus, n_minus)?;
        Ok(Self {
            p_exact,
            n_plus,
            shots,
            p_hat: c.p_hat,
            phi_hat: c.phi_hat,
            ci_halfwidth: c.ci_halfwidth,
            one_sided: c.one_sided,
            classification: classify_phase(Some(c.phi_hat)),
            overlap_magnitude: None,
            gate_count,
        })
    }

    pub fn with_overlap(mut self, overlap: f64) -> Self {
        if overlap < OVERLAP_WARNING {
            log::warn!(
                "loop overlap |<psi0|W|psi0>| = {overlap:.3} < {OVERLAP_WARNING}; adiabaticity likely violated"
            );
        }
        self.overlap_magnitude = Some(overlap);
        self
    }
}

/// Exact `P(σ_z = +1)` of the Hadamard test around a controlled evolution.
///
/// `controlled` receives the register with the ancilla on top and its index;
/// it must apply `W` conditioned on the ancilla being `|1⟩`.
pub fn hadamard_probability_with<T: Real>(
    ground: &QuantumState<T>,
    controlled: impl FnOnce(QuantumState<T>, usize) -> Result<QuantumState<T>>,
) -> Result<T> {
    let ancilla = ground.n_qubits();
    let h = gates::hadamard::<T>();
    let mut state = ground.with_ancilla();
    state.apply_single_qubit(&h, ancilla)?;
    let mut state = controlled(state, ancilla)?;
    state.apply_single_qubit(&h, ancilla)?;
    state.ancilla_plus_probability(ancilla)
}

/// `⟨ψ₀|W|ψ₀⟩` for an uncontrolled evolution `W`.
pub fn direct_amplitude_with<T: Real>(
    ground: &QuantumState<T>,
    evolve: impl FnOnce(QuantumState<T>) -> Result<QuantumState<T>>,
) -> Result<Complex<T>> {
    let out = evolve(ground.clone())?;
    ground.inner_product(&out)
}

/// Everything needed to run the loop circuit on a prepared ground state.
#[derive(Clone, Debug)]
pub struct LoopCircuit<'a, T: Real> {
    pub ground: QuantumState<T>,
    pub partition: HamiltonianPartition<T>,
    pub schedule: &'a TwistSchedule<T>,
    pub plan: &'a TrotterPlan<T>,
}

impl<'a, T: Real> LoopCircuit<'a, T> {
    /// Prepares the exact ground state of `model` at the loop start.
    pub fn prepare(
        model: &ModelSpec<T>,
        schedule: &'a TwistSchedule<T>,
        plan: &'a TrotterPlan<T>,
    ) -> Result<Self> {
        schedule.validate_for(model)?;
        let slice = ground_state(model, &schedule.twists_at(T::zero()))?;
        Ok(Self {
            ground: slice.ground_state()?,
            partition: partition(model)?,
            schedule,
            plan,
        })
    }

    /// Hadamard-test marginal and applied gate count.
    pub fn probability(&self, monitor: &mut dyn StepMonitor<T>) -> Result<(T, usize)> {
        let mut gates = 0;
        let p = hadamard_probability_with(&self.ground, |s, c| {
            let r = evolve_half_time(
                s,
                &self.partition,
                self.schedule,
                self.plan,
                Some(c),
                monitor,
            )?;
            gates = r.gate_count;
            Ok(r.state)
        })?;
        Ok((p, gates))
    }

    pub fn amplitude(&self, monitor: &mut dyn StepMonitor<T>) -> Result<Complex<T>> {
        direct_amplitude_with(&self.ground, |s| {
            Ok(
                evolve_half_time(s, &self.partition, self.schedule, self.plan, None, monitor)?
                    .state,
            )
        })
    }
}

/// Full Hadamard-test estimate with `shots` samples.
pub fn hadamard_test_estimate<T: Real>(
    model: &ModelSpec<T>,
    schedule: &TwistSchedule<T>,
    plan: &TrotterPlan<T>,
    shots: u64,
    seed: u64,
) -> Result<BerryEstimate> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let circuit = LoopCircuit::prepare(model, schedule, plan)?;
    let (p, gates) = circuit.probability(&mut NoMonitor)?;
    BerryEstimate::from_probability(to_f64(p), shots, seed, gates)
}

/// Noiseless `⟨ψ₀|W|ψ₀⟩` and its argument.
pub fn direct_amplitude_phase<T: Real>(
    model: &ModelSpec<T>,
    schedule: &TwistSchedule<T>,
    plan: &TrotterPlan<T>,
) -> Result<(Complex<T>, T)> {
    let circuit = LoopCircuit::prepare(model, schedule, plan)?;
    let z = circuit.amplitude(&mut NoMonitor)?;
    if cabs(z) < T::from_f64(OVERLAP_WARNING).expect("finite constant") {
        log::warn!(
            "loop overlap |<psi0|W|psi0>| = {:.3}; adiabaticity likely violated",
            to_f64(cabs(z))
        );
    }
    Ok((z, arg(z)))
}
