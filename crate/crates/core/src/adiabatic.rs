//! Second-order Trotter evolution along a twist loop.
//!
//! One step applies the symmetric sequence `H₁ … H_{q−1} H_q H_{q−1} … H₁`:
//! half steps on the outer groups, a full step on the last group, all
//! evaluated at the step midpoint. The sequence is a palindrome, so a
//! backward step is the exact inverse of a forward step at the same time.

use crate::error::{Error, Result};
use crate::models::HamiltonianPartition;
use crate::scalar::{lit, Real};
use crate::schedule::TwistSchedule;
use crate::statevector::{QuantumState, TwoQubitUnitary};

/// Sign of the generator: `Forward` applies `exp(−iHΔt)`, `Backward` `exp(+iHΔt)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeDirection {
    Forward,
    Backward,
}

impl TimeDirection {
    pub fn sign<T: Real>(self) -> T {
        match self {
            TimeDirection::Forward => T::one(),
            TimeDirection::Backward => -T::one(),
        }
    }
}

/// `N` symmetric steps of size `Δt = T/N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrotterPlan<T: Real> {
    steps: usize,
    total_time: T,
}

impl<T: Real> TrotterPlan<T> {
    pub fn new(total_time: T, steps: usize) -> Result<Self> {
        if steps == 0 || !steps.is_multiple_of(2) {
            return Err(Error::InvalidPlan(format!(
                "step count must be even and positive, got {steps}"
            )));
        }
        if total_time <= T::zero() || !total_time.is_finite() {
            return Err(Error::InvalidPlan(format!(
                "total time must be positive, got {total_time}"
            )));
        }
        Ok(Self { steps, total_time })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn total_time(&self) -> T {
        self.total_time
    }

    pub fn dt(&self) -> T {
        self.total_time / lit(self.steps as f64)
    }

    /// Start time of step `j`.
    pub fn t(&self, j: usize) -> T {
        self.dt() * lit(j as f64)
    }
}

/// Hooks around every Trotter step; the oracle uses them for gap guarding
/// and adiabaticity tracking.
pub trait StepMonitor<T: Real> {
    /// Called before step `step` covering `[t0, t1]`. An error aborts the evolution.
    fn before_step(&mut self, _step: usize, _t0: T, _t1: T) -> Result<()> {
        Ok(())
    }

    /// Called after a step; may return an adiabaticity residual for time `t`.
    fn after_step(
        &mut self,
        _step: usize,
        _t: T,
        _state: &QuantumState<T>,
        _controlled: bool,
    ) -> Result<Option<T>> {
        Ok(None)
    }
}

/// A monitor that does nothing.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoMonitor;

impl<T: Real> StepMonitor<T> for NoMonitor {}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionReport<T: Real> {
    pub state: QuantumState<T>,
    /// Per-step `|⟨H(t)⟩ − E₀(t)|`, filled only when the monitor provides it.
    pub residuals: Vec<T>,
    pub gate_count: usize,
    pub layer_count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DepthReport {
    pub two_qubit_gates: usize,
    pub group_layers: usize,
}

struct Tally<T: Real> {
    residuals: Vec<T>,
    gate_count: usize,
    layer_count: usize,
}

impl<T: Real> Default for Tally<T> {
    fn default() -> Self {
        Self {
            residuals: Vec::new(),
            gate_count: 0,
            layer_count: 0,
        }
    }
}

impl<T: Real> Tally<T> {
    fn finish(self, state: QuantumState<T>) -> EvolutionReport<T> {
        EvolutionReport {
            state,
            residuals: self.residuals,
            gate_count: self.gate_count,
            layer_count: self.layer_count,
        }
    }
}

fn group_propagators<T: Real>(
    partition: &HamiltonianPartition<T>,
    twists: &crate::models::TwistVector<T>,
    theta_outer: T,
    theta_last: T,
) -> Vec<Vec<TwoQubitUnitary<T>>> {
    let q = partition.groups.len();
    partition
        .groups
        .iter()
        .enumerate()
        .map(|(g, group)| {
            let theta = if g + 1 == q { theta_last } else { theta_outer };
            group
                .bonds
                .iter()
                .map(|b| b.propagator(twists, theta))
                .collect()
        })
        .collect()
}

fn apply_all<T: Real>(
    state: &mut QuantumState<T>,
    gates: &[TwoQubitUnitary<T>],
    control: Option<usize>,
) -> Result<()> {
    for gate in gates {
        match control {
            Some(c) => state.apply_controlled_two_qubit(gate, c)?,
            None => state.apply_two_qubit(gate)?,
        }
    }
    Ok(())
}

/// One symmetric second-order step from `t` to `t + dt`. Returns the number
/// of two-qubit unitaries applied.
pub fn trotter_step<T: Real>(
    state: &mut QuantumState<T>,
    partition: &HamiltonianPartition<T>,
    schedule: &TwistSchedule<T>,
    t: T,
    dt: T,
    direction: TimeDirection,
    control: Option<usize>,
) -> Result<usize> {
    let q = partition.groups.len();
    if q == 0 {
        return Ok(0);
    }
    let half: T = lit(0.5);
    let twists = schedule.twists_at(t + dt * half);
    let sign: T = direction.sign();
    let gates = group_propagators(partition, &twists, sign * dt * half, sign * dt);
    let mut count = 0;
    for g in gates.iter().take(q - 1) {
        apply_all(state, g, control)?;
        count += g.len();
    }
    apply_all(state, &gates[q - 1], control)?;
    count += gates[q - 1].len();
    for g in gates.iter().take(q - 1).rev() {
        apply_all(state, g, control)?;
        count += g.len();
    }
    Ok(count)
}

#[allow(clippy::too_many_arguments)]
fn run_steps<T: Real>(
    state: &mut QuantumState<T>,
    partition: &HamiltonianPartition<T>,
    schedule: &TwistSchedule<T>,
    plan: &TrotterPlan<T>,
    control: Option<usize>,
    monitor: &mut dyn StepMonitor<T>,
    direction_of: impl Fn(usize) -> TimeDirection,
    report: &mut Tally<T>,
) -> Result<()> {
    let dt = plan.dt();
    let layers_per_step = (2 * partition.groups.len()).saturating_sub(1);
    for j in 0..plan.steps() {
        let (t0, t1) = (plan.t(j), plan.t(j + 1));
        monitor.before_step(j, t0, t1)?;
        report.gate_count +=
            trotter_step(state, partition, schedule, t0, dt, direction_of(j), control)?;
        report.layer_count += layers_per_step;
        if let Some(r) = monitor.after_step(j, t1, state, control.is_some())? {
            report.residuals.push(r);
        }
    }
    Ok(())
}

fn check_inputs<T: Real>(
    state: &QuantumState<T>,
    partition: &HamiltonianPartition<T>,
    schedule: &TwistSchedule<T>,
    plan: &TrotterPlan<T>,
    control: Option<usize>,
) -> Result<()> {
    let scale = T::one() + T::eps() * lit(1e3);
    if (plan.total_time() - schedule.total_time()).abs()
        > schedule.total_time() * (scale - T::one())
    {
        return Err(Error::InvalidPlan(format!(
            "plan time {} differs from schedule time {}",
            plan.total_time(),
            schedule.total_time()
        )));
    }
    let max_site = partition
        .groups
        .iter()
        .flat_map(|g| g.bonds.iter())
        .map(|b| b.site_i.max(b.site_j))
        .max();
    if let Some(m) = max_site {
        if m >= state.n_qubits() {
            return Err(Error::QubitOutOfRange {
                qubit: m,
                n_qubits: state.n_qubits(),
            });
        }
    }
    if let Some(c) = control {
        if max_site.is_some_and(|m| c <= m) {
            return Err(Error::ControlClash { control: c });
        }
    }
    Ok(())
}

/// Half-period protocol: a single monotonic loop with backward generator for
/// steps `j < N/2` and forward generator afterwards. For time-reversal
/// symmetric models the dynamical phase cancels and the instantaneous ground
/// state returns with the factor `e^{iφ_B}`.
pub fn evolve_half_time<T: Real>(
    state: QuantumState<T>,
    partition: &HamiltonianPartition<T>,
    schedule: &TwistSchedule<T>,
    plan: &TrotterPlan<T>,
    control: Option<usize>,
    monitor: &mut dyn StepMonitor<T>,
) -> Result<EvolutionReport<T>> {
    check_inputs(&state, partition, schedule, plan, control)?;
    let mut tally = Tally::default();
    let mut state = state;
    let mid = plan.steps() / 2;
    run_steps(
        &mut state,
        partition,
        schedule,
        plan,
        control,
        monitor,
        |j| {
            if j < mid {
                TimeDirection::Backward
            } else {
                TimeDirection::Forward
            }
        },
        &mut tally,
    )?;
    Ok(tally.finish(state))
}

/// Double-loop protocol: one loop forward in time, then a second traversal of
/// the same loop with the backward generator. Dynamical phases cancel and the
/// geometric phase doubles, so the result is `e^{2iφ_B} ≡ 1` for quantized
/// phases. Useful as a check of the cancellation machinery, not for
/// classification.
pub fn evolve_double_loop<T: Real>(
    state: QuantumState<T>,
    partition: &HamiltonianPartition<T>,
    schedule: &TwistSchedule<T>,
    plan: &TrotterPlan<T>,
    control: Option<usize>,
    monitor: &mut dyn StepMonitor<T>,
) -> Result<EvolutionReport<T>> {
    check_inputs(&state, partition, schedule, plan, control)?;
    let mut tally = Tally::default();
    let mut state = state;
    for direction in [TimeDirection::Forward, TimeDirection::Backward] {
        run_steps(
            &mut state,
            partition,
            schedule,
            plan,
            control,
            monitor,
            |_| direction,
            &mut tally,
        )?;
    }
    Ok(tally.finish(state))
}

/// Exact gate and layer counts of one half-time evolution.
pub fn depth_report<T: Real>(
    plan: &TrotterPlan<T>,
    partition: &HamiltonianPartition<T>,
) -> DepthReport {
    let q = partition.groups.len();
    let per_step: usize = partition
        .groups
        .iter()
        .enumerate()
        .map(|(g, group)| if g + 1 == q { 1 } else { 2 } * group.bonds.len())
        .sum();
    DepthReport {
        two_qubit_gates: plan.steps() * per_step,
        group_layers: plan.steps() * (2 * q).saturating_sub(1),
    }
}
