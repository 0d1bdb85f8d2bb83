//! Exact diagonalization of the twisted Heisenberg Hamiltonian.
//!
//! Everything here works in the total `S_z = 0` sector, where the evolved
//! state lives. Small sectors are diagonalized densely; larger ones use a
//! restarted Lanczos solver, warm-started from the previous path point.

pub mod lanczos;
pub mod sector;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adiabatic::StepMonitor;
use crate::error::{Error, Result};
use crate::models::{build_tetramerized_lattice, ModelSpec, Plaquette, TwistVector};
use crate::scalar::{arg, cabs, czero, lit, to_f64, Real};
use crate::schedule::TwistSchedule;
use crate::statevector::QuantumState;

use lanczos::{dot, lowest_eigenpair, norm, LanczosConfig};
pub use sector::{SectorHamiltonian, SpinBasis};

/// Sectors up to this dimension are diagonalized densely.
pub const DENSE_LIMIT: usize = 256;
/// Gap below which the Berry phase is undefined, in units of `|J1|`.
pub const DEGENERACY_THRESHOLD: f64 = 1e-6;
/// Gap below which an evolution is aborted, in units of `|J1|`.
pub const GUARD_THRESHOLD: f64 = 1e-3;
/// Default number of Wilson-loop points.
pub const DEFAULT_LOOP_POINTS: usize = 64;
const MAX_LOOP_POINTS: usize = 4096;
const LOOP_TOLERANCE: f64 = 1e-3;

/// Wraps an angle into `(−π, π]`.
pub fn wrap_phase<T: Real>(x: T) -> T {
    let two_pi = T::two_pi();
    let w = x - two_pi * ((x + T::pi()) / two_pi).floor();
    if w <= -T::pi() {
        w + two_pi
    } else {
        w
    }
}

/// Quantized Berry phase class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    Trivial,
    Topological,
    Undefined,
}

impl Classification {
    /// Representative phase, `None` when undefined.
    pub fn phase(self) -> Option<f64> {
        match self {
            Classification::Trivial => Some(0.0),
            Classification::Topological => Some(std::f64::consts::PI),
            Classification::Undefined => None,
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Trivial => "trivial",
            Classification::Topological => "topological",
            Classification::Undefined => "undefined",
        })
    }
}

/// Nearest of `{0, π}`: topological when `|φ| > π/2` after wrapping.
pub fn classify_phase<T: Real>(phase: Option<T>) -> Classification {
    match phase {
        Some(p) if p.is_finite() => {
            if wrap_phase(p).abs() > T::frac_pi_2() {
                Classification::Topological
            } else {
                Classification::Trivial
            }
        }
        _ => Classification::Undefined,
    }
}

fn threshold_for<T: Real>(model: &ModelSpec<T>, relative: f64) -> T {
    let scale = if model.j1 == T::zero() {
        T::one()
    } else {
        model.j1.abs()
    };
    scale * lit(relative)
}

/// Lowest levels and ground vector at one twist vector.
#[derive(Clone, Debug)]
pub struct SpectrumSlice<T: Real> {
    pub twists: TwistVector<T>,
    /// Lowest levels, ascending (four from a dense solve, two from Lanczos).
    pub eigenvalues: Vec<T>,
    /// Ground vector in sector coordinates, normalized.
    pub ground: Vec<Complex<T>>,
    pub gap: T,
    /// `‖H v − E₀ v‖`.
    pub residual: T,
    basis: Arc<SpinBasis>,
}

impl<T: Real> SpectrumSlice<T> {
    pub fn energy(&self) -> T {
        self.eigenvalues[0]
    }

    pub fn basis(&self) -> &SpinBasis {
        &self.basis
    }

    /// Ground state on the full register.
    pub fn ground_state(&self) -> Result<QuantumState<T>> {
        self.basis.embed(&self.ground)
    }
}

/// Ground and first excited vectors of the previous solve.
type WarmStart<T> = (Vec<Complex<T>>, Vec<Complex<T>>);

/// Reusable eigensolver for one model; consecutive calls warm-start from
/// the previous solution.
#[derive(Clone, Debug)]
pub struct SpectrumSolver<T: Real> {
    ham: SectorHamiltonian<T>,
    config: LanczosConfig<T>,
    warm: Option<WarmStart<T>>,
    rng: ChaCha8Rng,
}

fn perturbed<T: Real>(rng: &mut ChaCha8Rng, v: &[Complex<T>]) -> Vec<Complex<T>> {
    let eps: T = lit(1e-3);
    v.iter()
        .map(|z| {
            let (re, im): (f64, f64) = (rng.random(), rng.random());
            z + Complex::new(lit::<T>(re - 0.5) * eps, lit::<T>(im - 0.5) * eps)
        })
        .collect()
}

impl<T: Real> SpectrumSolver<T> {
    pub fn new(model: &ModelSpec<T>) -> Result<Self> {
        Self::with_basis(model, Arc::new(SpinBasis::sz_zero(model.n_sites())?))
    }

    pub fn with_basis(model: &ModelSpec<T>, basis: Arc<SpinBasis>) -> Result<Self> {
        let ham = SectorHamiltonian::new(model, basis)?;
        let config = LanczosConfig::for_norm(ham.norm_bound());
        Ok(Self {
            ham,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            warm: None,
        })
    }

    pub fn basis(&self) -> &Arc<SpinBasis> {
        self.ham.basis()
    }

    pub fn hamiltonian(&self) -> &SectorHamiltonian<T> {
        &self.ham
    }

    /// Forgets the warm start.
    pub fn reset(&mut self) {
        self.warm = None;
    }

    pub fn solve(&mut self, twists: &TwistVector<T>) -> Result<SpectrumSlice<T>> {
        let dim = self.ham.dim();
        let prev = self.warm.take();
        let bound = self.ham.at(twists);
        let (eigenvalues, mut ground, excited) = if dim <= DENSE_LIMIT {
            let eig = bound.dense().symmetric_eigen();
            let mut order: Vec<usize> = (0..dim).collect();
            order.sort_by(|&a, &b| {
                eig.eigenvalues[a]
                    .partial_cmp(&eig.eigenvalues[b])
                    .expect("finite eigenvalues")
            });
            let values = order.iter().take(4).map(|&i| eig.eigenvalues[i]).collect();
            let column = |i: usize| {
                eig.eigenvectors
                    .column(i)
                    .iter()
                    .copied()
                    .collect::<Vec<_>>()
            };
            let excited = (dim > 1).then(|| column(order[1]));
            (values, column(order[0]), excited)
        } else {
            let (s0, s1) = match &prev {
                Some((g, e)) => (
                    Some(perturbed(&mut self.rng, g)),
                    Some(perturbed(&mut self.rng, e)),
                ),
                None => (None, None),
            };
            let apply = |x: &[Complex<T>], y: &mut [Complex<T>]| bound.apply(x, y);
            let g = lowest_eigenpair(apply, dim, s0.as_deref(), &[], &self.config)?;
            let e = lowest_eigenpair(apply, dim, s1.as_deref(), &[&g.vector], &self.config)?;
            // inside a near-degenerate pair the deflated solve can land a hair lower
            let (g, e) = if e.value < g.value { (e, g) } else { (g, e) };
            (vec![g.value, e.value], g.vector, Some(e.vector))
        };

        let anchor = match &prev {
            Some((prev, _)) => dot(prev, &ground),
            None => {
                ground.iter().copied().fold(
                    czero(),
                    |best, z| if cabs(z) > cabs(best) { z } else { best },
                )
            }
        };
        if cabs(anchor) > T::zero() {
            let phase = anchor.unscale(cabs(anchor)).conj();
            ground.iter_mut().for_each(|z| *z *= phase);
        }
        let n = norm(&ground);
        ground.iter_mut().for_each(|z| *z = z.unscale(n));

        let mut hv = vec![czero(); dim];
        bound.apply(&ground, &mut hv);
        let e0 = eigenvalues[0];
        let residual = hv
            .iter()
            .zip(&ground)
            .fold(T::zero(), |acc, (h, g)| {
                let r = h - g.scale(e0);
                acc + r.norm_sqr()
            })
            .sqrt();
        let gap = if eigenvalues.len() > 1 {
            eigenvalues[1] - eigenvalues[0]
        } else {
            lit(f64::INFINITY)
        };
        self.warm = excited.map(|e| (ground.clone(), e));
        Ok(SpectrumSlice {
            twists: *twists,
            eigenvalues,
            ground,
            gap,
            residual,
            basis: self.ham.basis().clone(),
        })
    }
}

/// Ground state and gap of `model` at `twists`.
pub fn ground_state<T: Real>(
    model: &ModelSpec<T>,
    twists: &TwistVector<T>,
) -> Result<SpectrumSlice<T>> {
    SpectrumSolver::new(model)?.solve(twists)
}

/// Discrete Berry phase `−arg Π ⟨v_k|v_{k+1}⟩` of a closed chain of states;
/// the last link returns to the first vector.
pub fn wilson_phase<T: Real>(vectors: &[Vec<Complex<T>>]) -> T {
    let mut product = Complex::new(T::one(), T::zero());
    for (k, v) in vectors.iter().enumerate() {
        let next = &vectors[(k + 1) % vectors.len()];
        let link = dot(v, next);
        let m = cabs(link);
        if m > T::zero() {
            product *= link.unscale(m);
        }
    }
    wrap_phase(-arg(product))
}

/// Result of a converged Wilson loop.
#[derive(Clone, Debug, PartialEq)]
pub struct WilsonLoop<T: Real> {
    pub phase: T,
    pub points: usize,
    pub min_gap: T,
    pub converged: bool,
}

/// Instantaneous gaps along a loop with refined local minima.
#[derive(Clone, Debug, PartialEq)]
pub struct GapScan<T: Real> {
    /// `(t, gap)` at the sample points.
    pub samples: Vec<(T, T)>,
    /// `(t, gap)` at refined local minima.
    pub minima: Vec<(T, T)>,
    pub min_gap: T,
    pub t_min: T,
    pub twist_sum_at_min: T,
}

impl<T: Real> GapScan<T> {
    /// Earliest time where the gap drops below `threshold`.
    pub fn first_below(&self, threshold: T) -> Option<(T, T)> {
        self.samples
            .iter()
            .chain(&self.minima)
            .filter(|(_, g)| *g < threshold)
            .copied()
            .fold(None, |acc: Option<(T, T)>, cur| match acc {
                Some(a) if a.0 <= cur.0 => Some(a),
                _ => Some(cur),
            })
    }
}

struct LoopSampler<'a, T: Real> {
    solver: SpectrumSolver<T>,
    schedule: &'a TwistSchedule<T>,
    times: Vec<T>,
    gaps: Vec<T>,
    vectors: Vec<Vec<Complex<T>>>,
}

impl<'a, T: Real> LoopSampler<'a, T> {
    fn new(model: &ModelSpec<T>, schedule: &'a TwistSchedule<T>, k: usize) -> Result<Self> {
        if k < 16 {
            return Err(Error::TooFewPoints(k));
        }
        schedule.validate_for(model)?;
        let mut s = Self {
            solver: SpectrumSolver::new(model)?,
            schedule,
            times: Vec::new(),
            gaps: Vec::new(),
            vectors: Vec::new(),
        };
        let period = schedule.total_time();
        for j in 0..k {
            let t = period * lit(j as f64) / lit(k as f64);
            let slice = s.solver.solve(&schedule.twists_at(t))?;
            s.times.push(t);
            s.gaps.push(slice.gap);
            s.vectors.push(slice.ground);
        }
        Ok(s)
    }

    fn points(&self) -> usize {
        self.times.len()
    }

    /// Doubles the resolution, solving only the new midpoints.
    fn refine(&mut self) -> Result<()> {
        let k = self.points();
        let period = self.schedule.total_time();
        let mut times = Vec::with_capacity(2 * k);
        let mut gaps = Vec::with_capacity(2 * k);
        let mut vectors = Vec::with_capacity(2 * k);
        let old_v = std::mem::take(&mut self.vectors);
        for (j, v) in old_v.into_iter().enumerate() {
            times.push(self.times[j]);
            gaps.push(self.gaps[j]);
            vectors.push(v);
            let t = period * lit((2 * j + 1) as f64) / lit((2 * k) as f64);
            let slice = self.solver.solve(&self.schedule.twists_at(t))?;
            times.push(t);
            gaps.push(slice.gap);
            vectors.push(slice.ground);
        }
        self.times = times;
        self.gaps = gaps;
        self.vectors = vectors;
        Ok(())
    }

    fn check_gaps(&self, threshold: T) -> Result<()> {
        for (j, &g) in self.gaps.iter().enumerate() {
            if g < threshold {
                let t = self.times[j];
                return Err(Error::GapClosed {
                    gap: to_f64(g),
                    threshold: to_f64(threshold),
                    t: to_f64(t),
                    twist_sum: to_f64(self.schedule.twist_sum(t)),
                    reached_t: None,
                });
            }
        }
        Ok(())
    }

    fn min_gap(&self) -> T {
        self.gaps.iter().copied().fold(lit(f64::INFINITY), T::min)
    }

    /// Phase at the current resolution and at half of it.
    fn phases(&self) -> (T, T) {
        let half: Vec<_> = self.vectors.iter().step_by(2).cloned().collect();
        (wilson_phase(&self.vectors), wilson_phase(&half))
    }

    fn wilson(&mut self, threshold: T) -> Result<WilsonLoop<T>> {
        let tol: T = lit(LOOP_TOLERANCE);
        loop {
            self.check_gaps(threshold)?;
            let (fine, coarse) = self.phases();
            let converged = wrap_phase(fine - coarse).abs() < tol;
            if converged || 2 * self.points() > MAX_LOOP_POINTS {
                if !converged {
                    log::warn!(
                        "Wilson loop not converged at {} points (change {:.2e})",
                        self.points(),
                        to_f64(wrap_phase(fine - coarse).abs())
                    );
                }
                return Ok(WilsonLoop {
                    phase: fine,
                    points: self.points(),
                    min_gap: self.min_gap(),
                    converged,
                });
            }
            self.refine()?;
        }
    }

    fn gap_at(&mut self, t: T) -> Result<T> {
        Ok(self.solver.solve(&self.schedule.twists_at(t))?.gap)
    }

    fn scan(&mut self, guard: T) -> Result<GapScan<T>> {
        let k = self.points();
        let period = self.schedule.total_time();
        let dt = period / lit(k as f64);
        let g = self.gaps.clone();
        let sampled_min = self.min_gap();
        let mut candidates: Vec<usize> = (0..k)
            .filter(|&j| {
                let (prev, next) = (g[(j + k - 1) % k], g[(j + 1) % k]);
                let tiny = g[j].abs() * lit(1e-9) + lit(1e-14);
                g[j] + tiny < prev && g[j] <= next + tiny
            })
            .collect();
        candidates.sort_by(|&a, &b| g[a].partial_cmp(&g[b]).expect("finite gaps"));
        candidates.truncate(4);
        candidates.retain(|&j| g[j] <= sampled_min * lit(4.0) + lit(1e-12));

        let mut minima = Vec::new();
        let inv_phi: T = lit((5f64.sqrt() - 1.0) / 2.0);
        let tol = period * lit(1e-9);
        for j in candidates {
            let (mut a, mut b) = (self.times[j] - dt, self.times[j] + dt);
            let mut c = b - (b - a) * inv_phi;
            let mut d = a + (b - a) * inv_phi;
            let mut fc = self.gap_at(c)?;
            let mut fd = self.gap_at(d)?;
            for _ in 0..80 {
                // a smooth minimum well above the guard needs far less precision
                let loose = fc.min(fd) > guard * lit(10.0) && b - a < dt * lit(1e-3);
                if b - a < tol || loose {
                    break;
                }
                if fc < fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - (b - a) * inv_phi;
                    fc = self.gap_at(c)?;
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + (b - a) * inv_phi;
                    fd = self.gap_at(d)?;
                }
            }
            let (t, gap) = if fc < fd { (c, fc) } else { (d, fd) };
            let t = t - period * (t / period).floor();
            minima.push((t, gap.min(g[j])));
        }
        let samples: Vec<(T, T)> = self.times.iter().copied().zip(g.iter().copied()).collect();
        let (t_min, min_gap) = samples.iter().chain(&minima).copied().fold(
            (T::zero(), lit(f64::INFINITY)),
            |acc, cur| if cur.1 < acc.1 { cur } else { acc },
        );
        Ok(GapScan {
            samples,
            minima,
            min_gap,
            t_min,
            twist_sum_at_min: self.schedule.twist_sum(t_min),
        })
    }
}

/// Converged discrete Berry phase along `schedule`, starting from `k` points.
pub fn wilson_loop_phase<T: Real>(
    model: &ModelSpec<T>,
    schedule: &TwistSchedule<T>,
    k: usize,
) -> Result<WilsonLoop<T>> {
    let threshold = threshold_for(model, DEGENERACY_THRESHOLD);
    LoopSampler::new(model, schedule, k)?.wilson(threshold)
}

/// Gap profile along `schedule` with golden-section refinement of its minima.
pub fn gap_scan<T: Real>(
    model: &ModelSpec<T>,
    schedule: &TwistSchedule<T>,
    k: usize,
) -> Result<GapScan<T>> {
    LoopSampler::new(model, schedule, k)?.scan(threshold_for(model, GUARD_THRESHOLD))
}

/// Gap scan and Wilson loop sharing the same eigensolves.
#[derive(Clone, Debug)]
pub struct OracleReport<T: Real> {
    pub gaps: GapScan<T>,
    /// `Err(GapClosed)` when the loop passes through a degeneracy.
    pub wilson: Result<WilsonLoop<T>>,
}

impl<T: Real> OracleReport<T> {
    pub fn phase(&self) -> Option<T> {
        self.wilson.as_ref().ok().map(|w| w.phase)
    }

    pub fn classification(&self) -> Classification {
        classify_phase(self.phase())
    }
}

pub fn oracle_report<T: Real>(
    model: &ModelSpec<T>,
    schedule: &TwistSchedule<T>,
    k: usize,
) -> Result<OracleReport<T>> {
    let mut sampler = LoopSampler::new(model, schedule, k)?;
    let gaps = sampler.scan(threshold_for(model, GUARD_THRESHOLD))?;
    let threshold = threshold_for(model, DEGENERACY_THRESHOLD);
    let wilson = match gaps.first_below(threshold) {
        Some((t, gap)) => Err(Error::GapClosed {
            gap: to_f64(gap),
            threshold: to_f64(threshold),
            t: to_f64(t),
            twist_sum: to_f64(schedule.twist_sum(t)),
            reached_t: None,
        }),
        None => sampler.wilson(threshold),
    };
    match wilson {
        Err(e) if !matches!(e, Error::GapClosed { .. }) => Err(e),
        wilson => Ok(OracleReport { gaps, wilson }),
    }
}

/// The four plaquette levels that couple to the twist: the `S_z = 0`
/// spectrum of a single twisted `2×2` cell without its exact zero-energy
/// doublet. That doublet lives on the four non-Néel configurations, which
/// only connect to the two Néel states, so it stays at zero for every twist.
pub fn plaquette_spectrum<T: Real>(j1: T, twists: &TwistVector<T>) -> Result<Vec<T>> {
    let model = build_tetramerized_lattice(2, 2, j1, T::zero(), Plaquette::type_i())?;
    let ham = SectorHamiltonian::new(&model, Arc::new(SpinBasis::sz_zero(4)?))?;
    let mut levels: Vec<T> = ham
        .at(twists)
        .dense()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    for _ in 0..2 {
        let (k, _) = levels
            .iter()
            .enumerate()
            .fold((0, levels[0].abs()), |acc, (i, v)| {
                if v.abs() < acc.1 {
                    (i, v.abs())
                } else {
                    acc
                }
            });
        levels.remove(k);
    }
    levels.sort_by(|a, b| a.partial_cmp(b).expect("finite levels"));
    Ok(levels)
}

/// Closed-form plaquette levels `(−2J ± 2J√(5 ± 4|cos(Σφ/2)|))/4`, ascending.
pub fn plaquette_levels_closed_form<T: Real>(j1: T, twist_sum: T) -> [T; 4] {
    let c = (twist_sum * lit(0.5)).cos().abs() * lit(4.0);
    let five: T = lit(5.0);
    let (big, small) = ((five + c).sqrt(), (five - c).sqrt());
    let two_j = j1 * lit(2.0);
    let q: T = lit(0.25);
    let mut out = [
        (-two_j - two_j * big) * q,
        (-two_j - two_j * small) * q,
        (-two_j + two_j * small) * q,
        (-two_j + two_j * big) * q,
    ];
    out.sort_by(|a, b| a.partial_cmp(b).expect("finite levels"));
    out
}

/// Aborts an evolution before the step whose interval contains a
/// sub-threshold gap.
#[derive(Clone, Debug)]
pub struct OracleGapMonitor<T: Real> {
    closure: Option<(T, T, T)>,
    threshold: T,
}

impl<T: Real> OracleGapMonitor<T> {
    pub fn new(scan: &GapScan<T>, schedule: &TwistSchedule<T>, threshold: T) -> Self {
        Self {
            closure: scan
                .first_below(threshold)
                .map(|(t, g)| (t, g, schedule.twist_sum(t))),
            threshold,
        }
    }

    /// Guard at the default threshold `1e-3·|J1|`.
    pub fn for_model(model: &ModelSpec<T>, scan: &GapScan<T>, schedule: &TwistSchedule<T>) -> Self {
        Self::new(scan, schedule, threshold_for(model, GUARD_THRESHOLD))
    }

    pub fn threshold(&self) -> T {
        self.threshold
    }
}

impl<T: Real> StepMonitor<T> for OracleGapMonitor<T> {
    fn before_step(&mut self, _step: usize, t0: T, t1: T) -> Result<()> {
        match self.closure {
            Some((t, gap, twist_sum)) if t <= t1 => Err(Error::GapClosed {
                gap: to_f64(gap),
                threshold: to_f64(self.threshold),
                t: to_f64(t),
                twist_sum: to_f64(twist_sum),
                reached_t: Some(to_f64(t0)),
            }),
            _ => Ok(()),
        }
    }
}

/// Tracks `|⟨H(t)⟩ − E₀(t)|` and the ground-state overlap after every
/// uncontrolled step.
#[derive(Clone, Debug)]
pub struct AdiabaticityMonitor<'a, T: Real> {
    solver: SpectrumSolver<T>,
    schedule: &'a TwistSchedule<T>,
    /// `(t, |⟨n(t)|ψ(t)⟩|)` per step.
    pub overlaps: Vec<(T, T)>,
}

impl<'a, T: Real> AdiabaticityMonitor<'a, T> {
    pub fn new(model: &ModelSpec<T>, schedule: &'a TwistSchedule<T>) -> Result<Self> {
        Ok(Self {
            solver: SpectrumSolver::new(model)?,
            schedule,
            overlaps: Vec::new(),
        })
    }

    pub fn min_overlap(&self) -> Option<T> {
        self.overlaps.iter().map(|o| o.1).reduce(T::min)
    }
}

impl<T: Real> StepMonitor<T> for AdiabaticityMonitor<'_, T> {
    fn after_step(
        &mut self,
        _step: usize,
        t: T,
        state: &QuantumState<T>,
        controlled: bool,
    ) -> Result<Option<T>> {
        if controlled {
            return Ok(None);
        }
        let twists = self.schedule.twists_at(t);
        let slice = self.solver.solve(&twists)?;
        let psi = self.solver.basis().restrict(state)?;
        let energy = self.solver.hamiltonian().at(&twists).expectation(&psi);
        self.overlaps.push((t, cabs(dot(&slice.ground, &psi))));
        Ok(Some((energy - slice.energy()).abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_dimerized_chain, Axis, Bond, Geometry, Strength, TwistedElement};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn two_site_singlet() {
        let model = ModelSpec {
            geometry: Geometry::Chain { length: 2 },
            j1: 1.0,
            j2: 0.0,
            bonds: vec![Bond {
                site_i: 0,
                site_j: 1,
                coupling: 1.0,
                twist_slot: Some(1),
                strength: Strength::Strong,
                axis: Axis::Chain,
            }],
            twisted: TwistedElement::ChainBond(0),
        };
        let s = ground_state(&model, &[0.0; 4]).unwrap();
        assert_abs_diff_eq!(s.energy(), -0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(s.gap, 1.0, epsilon = 1e-12);
        let psi = s.ground_state().unwrap();
        assert_abs_diff_eq!(psi.amplitudes()[1].norm_sqr(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn four_site_ring_energy() {
        let model = build_dimerized_chain(4, 1.0, 1.0, 0).unwrap();
        let s = ground_state(&model, &[0.0; 4]).unwrap();
        assert_abs_diff_eq!(s.energy(), -2.0, epsilon = 1e-12);
        let psi = s.ground_state().unwrap();
        assert_abs_diff_eq!(
            psi.expectation(&model.terms(&[0.0; 4])).unwrap(),
            -2.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn classification_rules() {
        assert_eq!(classify_phase(Some(3.05)), Classification::Topological);
        assert_eq!(classify_phase(Some(0.1)), Classification::Trivial);
        assert_eq!(classify_phase(Some(-3.1)), Classification::Topological);
        assert_eq!(classify_phase::<f64>(None), Classification::Undefined);
        assert_eq!(classify_phase(Some(f64::NAN)), Classification::Undefined);
        assert_abs_diff_eq!(wrap_phase(3.0 * PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_phase(-PI), PI, epsilon = 1e-12);
    }

    #[test]
    fn wilson_loop_needs_points() {
        let model = build_dimerized_chain(4, 1.0, 0.5, 0).unwrap();
        let s = TwistSchedule::<f64>::single(20.0).unwrap();
        assert!(matches!(
            wilson_loop_phase(&model, &s, 8),
            Err(Error::TooFewPoints(8))
        ));
    }

    #[test]
    fn chain_wilson_loop_phases() {
        let s = TwistSchedule::<f64>::single(20.0).unwrap();
        let strong = build_dimerized_chain(4, 1.0, 0.5, 0).unwrap();
        let w = wilson_loop_phase(&strong, &s, 64).unwrap();
        assert!((w.phase.abs() - PI).abs() < 1e-6, "{}", w.phase);
        let weak = build_dimerized_chain(4, 1.0, 1.5, 0).unwrap();
        let w = wilson_loop_phase(&weak, &s, 64).unwrap();
        assert!(w.phase.abs() < 1e-6, "{}", w.phase);
    }

    #[test]
    fn uniform_chain_closes_gap() {
        let model = build_dimerized_chain(4, 1.0, 1.0, 0).unwrap();
        let s = TwistSchedule::<f64>::single(20.0).unwrap();
        let scan = gap_scan(&model, &s, 64).unwrap();
        assert!(scan.min_gap < 1e-6, "{}", scan.min_gap);
        assert!(matches!(
            wilson_loop_phase(&model, &s, 64),
            Err(Error::GapClosed { .. })
        ));
    }

    #[test]
    fn plaquette_levels_at_zero_and_pi() {
        let z = plaquette_spectrum(1.0, &[0.0; 4]).unwrap();
        for (a, b) in z.iter().zip([-2.0, -1.0, 0.0, 1.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-9);
        }
        let p = plaquette_spectrum(1.0, &[PI, 0.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(p[0], -(1.0 + 5f64.sqrt()) / 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p[1], p[0], epsilon = 1e-9);
    }

    #[test]
    fn gap_monitor_trips_before_crossing() {
        let model = build_tetramerized_lattice(2, 2, 1.0, 0.0, Plaquette::type_i()).unwrap();
        let s = TwistSchedule::uniform(20.0).unwrap();
        let scan = gap_scan(&model, &s, 64).unwrap();
        assert_abs_diff_eq!(scan.t_min, 2.5, epsilon = 1e-6);
        let mut mon = OracleGapMonitor::for_model(&model, &scan, &s);
        assert!(mon.before_step(0, 0.0, 0.1).is_ok());
        match mon.before_step(24, 2.4, 2.5000001) {
            Err(Error::GapClosed { reached_t, .. }) => assert_eq!(reached_t, Some(2.4)),
            other => panic!("{other:?}"),
        }
    }
}
