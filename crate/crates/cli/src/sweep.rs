//! Sweep points, their evaluation and the CSV layout.

use std::io::Write;
use std::time::Instant;

use berryloop::oracle::{DEFAULT_LOOP_POINTS, GUARD_THRESHOLD};
use berryloop::{
    build_dimerized_chain, build_tetramerized_lattice, classify_phase, gap_scan, oracle_report,
    parse_path, BerryEstimate, Classification, Error, GapScan, LoopCircuit, Model, NoMonitor,
    OracleGapMonitor, Plan, Plaquette, RampProfile, Schedule,
};
use rayon::prelude::*;

use crate::config::{Kind, Mode};

/// Fixed CSV column order.
pub const COLUMNS: [&str; 18] = [
    "kind",
    "L_or_Lx",
    "Ly",
    "J1",
    "J2",
    "T",
    "N",
    "shots",
    "seed",
    "path",
    "p_hat",
    "phi_hat",
    "ci",
    "phi_oracle",
    "classification",
    "min_gap",
    "overlap_magnitude",
    "wall_time_s",
];

/// One parameter point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSpec {
    pub kind: Kind,
    pub size: usize,
    pub ly: usize,
    pub j1: f64,
    pub j2: f64,
    pub total_time: f64,
    pub steps: usize,
    pub shots: u64,
    pub seed: u64,
    pub path: String,
    pub plaquette: Plaquette,
    pub twisted_bond: usize,
    pub profile: RampProfile,
}

impl PointSpec {
    pub fn model(&self) -> berryloop::Result<Model> {
        match self.kind {
            Kind::Chain => build_dimerized_chain(self.size, self.j1, self.j2, self.twisted_bond),
            Kind::Lattice => {
                build_tetramerized_lattice(self.size, self.ly, self.j1, self.j2, self.plaquette)
            }
        }
    }

    pub fn schedule(&self) -> berryloop::Result<Schedule> {
        let driven = parse_path(&self.path)?;
        Schedule::new(driven, self.total_time, self.profile)
    }

    pub fn plan(&self) -> berryloop::Result<Plan> {
        Plan::new(self.total_time, self.steps)
    }

    /// Builds everything once so configuration errors surface before a run.
    pub fn check(&self) -> berryloop::Result<()> {
        let model = self.model()?;
        self.schedule()?.validate_for(&model)?;
        self.plan()?;
        Ok(())
    }

    /// Points sharing this key share one exact-oracle computation.
    fn oracle_key(&self) -> String {
        format!(
            "{:?}|{}|{}|{}|{}|{}|{}|{:?}|{}|{:?}",
            self.kind,
            self.size,
            self.ly,
            self.j1,
            self.j2,
            self.total_time,
            self.path,
            self.plaquette,
            self.twisted_bond,
            self.profile
        )
    }
}

/// Evaluation switches shared by all points of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunSettings {
    pub mode: Mode,
    pub guard: bool,
    pub loop_points: usize,
    pub timing: bool,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            mode: Mode::Both,
            guard: true,
            loop_points: DEFAULT_LOOP_POINTS,
            timing: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub spec: PointSpec,
    pub p_hat: Option<f64>,
    pub phi_hat: Option<f64>,
    pub ci: Option<f64>,
    pub phi_oracle: Option<f64>,
    pub classification: Classification,
    pub min_gap: Option<f64>,
    pub overlap_magnitude: Option<f64>,
    pub wall_time_s: f64,
    /// Why the phase is undefined, if it is.
    pub note: Option<String>,
    pub estimate: Option<BerryEstimate>,
}

impl SweepRow {
    pub fn record(&self) -> Vec<String> {
        let s = &self.spec;
        vec![
            s.kind.to_string(),
            s.size.to_string(),
            match s.kind {
                Kind::Chain => "1".to_string(),
                Kind::Lattice => s.ly.to_string(),
            },
            num(s.j1),
            num(s.j2),
            num(s.total_time),
            s.steps.to_string(),
            s.shots.to_string(),
            s.seed.to_string(),
            s.path.clone(),
            opt(self.p_hat),
            opt(self.phi_hat),
            opt(self.ci),
            opt(self.phi_oracle),
            self.classification.to_string(),
            opt(self.min_gap),
            opt(self.overlap_magnitude),
            format!("{:.3}", self.wall_time_s),
        ]
    }
}

/// Shortest round-trip decimal, switching to exponent form for tiny values.
pub fn num(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-4 {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[derive(Clone, Debug)]
struct OracleOutcome {
    gaps: Option<GapScan<f64>>,
    phase: Option<f64>,
    /// Set when the loop runs through a degeneracy or the oracle failed.
    note: Option<String>,
    seconds: f64,
}

fn guard_threshold(spec: &PointSpec) -> f64 {
    let scale = if spec.j1 == 0.0 { 1.0 } else { spec.j1.abs() };
    GUARD_THRESHOLD * scale
}

fn run_oracle(spec: &PointSpec, settings: &RunSettings) -> berryloop::Result<OracleOutcome> {
    let start = Instant::now();
    let model = spec.model()?;
    let schedule = spec.schedule()?;
    let mut out = OracleOutcome {
        gaps: None,
        phase: None,
        note: None,
        seconds: 0.0,
    };
    if settings.mode.oracle() {
        let report = oracle_report(&model, &schedule, settings.loop_points)?;
        out.phase = report.phase();
        if let Err(e) = &report.wilson {
            out.note = Some(e.to_string());
        }
        out.gaps = Some(report.gaps);
    } else if settings.guard {
        out.gaps = Some(gap_scan(&model, &schedule, settings.loop_points)?);
    }
    if out.note.is_none() {
        if let Some((t, g)) = out
            .gaps
            .as_ref()
            .and_then(|s| s.first_below(guard_threshold(spec)))
        {
            out.note = Some(format!(
                "gap {g:.3e} below {:.0e} at t = {t:.4} (twist sum {:.4}); no Berry phase can be defined",
                guard_threshold(spec),
                schedule.twist_sum(t)
            ));
        }
    }
    out.seconds = start.elapsed().as_secs_f64();
    Ok(out)
}

fn run_point(
    index: usize,
    spec: &PointSpec,
    oracle: &OracleOutcome,
    settings: &RunSettings,
) -> berryloop::Result<SweepRow> {
    let start = Instant::now();
    let min_gap = oracle.gaps.as_ref().map(|g| g.min_gap);
    let degenerate = oracle.note.is_some();
    let mut row = SweepRow {
        spec: spec.clone(),
        p_hat: None,
        phi_hat: None,
        ci: None,
        phi_oracle: oracle.phase,
        classification: if degenerate {
            Classification::Undefined
        } else {
            classify_phase(oracle.phase)
        },
        min_gap,
        overlap_magnitude: None,
        wall_time_s: 0.0,
        note: oracle.note.clone(),
        estimate: None,
    };
    if settings.mode.circuit() && !(degenerate && settings.guard) {
        let model = spec.model()?;
        let schedule = spec.schedule()?;
        let plan = spec.plan()?;
        let circuit = LoopCircuit::prepare(&model, &schedule, &plan)?;
        let guard = match (&oracle.gaps, settings.guard) {
            (Some(scan), true) => Some(OracleGapMonitor::new(
                scan,
                &schedule,
                guard_threshold(spec),
            )),
            _ => None,
        };
        let probability = match guard {
            Some(mut m) => circuit.probability(&mut m),
            None => circuit.probability(&mut NoMonitor),
        };
        match probability {
            Ok((p, gates)) => {
                let seed = spec.seed ^ index as u64;
                let overlap = circuit.amplitude(&mut NoMonitor)?.norm();
                let est = BerryEstimate::from_probability(p, spec.shots, seed, gates)?
                    .with_overlap(overlap);
                row.p_hat = Some(est.p_hat);
                row.phi_hat = Some(est.phi_hat);
                row.ci = Some(est.ci_halfwidth);
                row.overlap_magnitude = Some(overlap);
                if !degenerate {
                    row.classification = est.classification;
                }
                row.estimate = Some(est);
            }
            Err(e @ Error::GapClosed { .. }) => {
                row.classification = Classification::Undefined;
                row.note = Some(e.to_string());
            }
            Err(e) => return Err(e),
        }
    }
    if settings.timing {
        row.wall_time_s = oracle.seconds + start.elapsed().as_secs_f64();
    }
    Ok(row)
}

/// Evaluates every point, sharing oracle runs between points that differ
/// only in `N`, shots or seed. Row order follows `specs`.
pub fn run_sweep(specs: &[PointSpec], settings: &RunSettings) -> berryloop::Result<Vec<SweepRow>> {
    let mut keys: Vec<String> = Vec::new();
    let mut owner: Vec<usize> = Vec::new();
    let mut key_of = Vec::with_capacity(specs.len());
    for (i, s) in specs.iter().enumerate() {
        let k = s.oracle_key();
        let slot = match keys.iter().position(|x| *x == k) {
            Some(p) => p,
            None => {
                keys.push(k);
                owner.push(i);
                keys.len() - 1
            }
        };
        key_of.push(slot);
    }
    let oracles: Vec<OracleOutcome> = owner
        .par_iter()
        .map(|&i| run_oracle(&specs[i], settings))
        .collect::<berryloop::Result<_>>()?;
    specs
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let row = run_point(i, s, &oracles[key_of[i]], settings)?;
            log::info!(
                "{} L={} J2={} N={}: {}",
                s.kind,
                s.size,
                s.j2,
                s.steps,
                row.classification
            );
            Ok(row)
        })
        .collect()
}

/// Writes rows under the standard header plus optional trailing columns.
pub fn write_csv<W: Write>(
    sink: W,
    rows: &[SweepRow],
    extra_header: &[&str],
    extra: impl Fn(&SweepRow) -> Vec<String>,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let header: Vec<&str> = COLUMNS
        .iter()
        .copied()
        .chain(extra_header.iter().copied())
        .collect();
    w.write_record(&header)?;
    for row in rows {
        let mut rec = row.record();
        rec.extend(extra(row));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
