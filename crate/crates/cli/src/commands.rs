//! The five subcommands.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use berryloop::{
    build_tetramerized_lattice, plaquette_levels_closed_form, plaquette_spectrum, Classification,
};

use crate::config::{Config, ConfigError, Kind};
use crate::plot::{phase_ticks, Chart, Series, Style};
use crate::sweep::{num, run_sweep, write_csv, PointSpec, RunSettings, SweepRow};

/// The six driven pairs of Table I with their commuting flag filled in later.
pub const TABLE1_PAIRS: [(u8, u8); 6] = [(1, 2), (1, 4), (2, 3), (3, 4), (2, 4), (1, 3)];

#[derive(Debug)]
pub struct Outputs {
    pub csv: PathBuf,
    pub svg: Option<PathBuf>,
    pub rows: Vec<SweepRow>,
}

pub fn settings(cfg: &Config) -> RunSettings {
    RunSettings {
        mode: cfg.mode,
        guard: cfg.guard,
        loop_points: cfg.loop_points.max(16),
        timing: cfg.timing,
    }
}

fn in_pool<R: Send>(cfg: &Config, f: impl FnOnce() -> R + Send) -> Result<R> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cfg.jobs {
        builder = builder.num_threads(j);
    }
    Ok(builder.build().context("building worker pool")?.install(f))
}

fn base_spec(cfg: &Config, kind: Kind) -> PointSpec {
    PointSpec {
        kind,
        size: cfg.lx,
        ly: cfg.ly,
        j1: cfg.j1,
        j2: 0.0,
        total_time: cfg.total_time,
        steps: 200,
        shots: cfg.shots,
        seed: cfg.seed,
        path: cfg.path.clone().unwrap_or_else(|| match kind {
            Kind::Chain => "+1".into(),
            Kind::Lattice => "+1-2".into(),
        }),
        plaquette: cfg.plaquette,
        twisted_bond: cfg.twisted_bond,
        profile: cfg.profile,
    }
}

fn checked(specs: Vec<PointSpec>) -> Result<Vec<PointSpec>> {
    for s in &specs {
        s.check().map_err(|e| ConfigError::Invalid(e.to_string()))?;
    }
    Ok(specs)
}

pub fn sweep_1d_specs(cfg: &Config) -> Result<Vec<PointSpec>> {
    cfg.validate()?;
    let base = base_spec(cfg, Kind::Chain);
    let lengths = cfg.lengths.clone().unwrap_or_else(|| vec![4, 6, 8]);
    let steps = cfg.steps.clone().unwrap_or_else(|| vec![200]);
    let mut specs = Vec::new();
    for &l in &lengths {
        for &n in &steps {
            for j2 in cfg.j2_grid() {
                specs.push(PointSpec {
                    size: l,
                    ly: 1,
                    steps: n,
                    j2,
                    ..base.clone()
                });
            }
        }
    }
    checked(specs)
}

pub fn sweep_2d_specs(cfg: &Config) -> Result<Vec<PointSpec>> {
    cfg.validate()?;
    let base = base_spec(cfg, Kind::Lattice);
    let steps = cfg.steps.clone().unwrap_or_else(|| vec![100, 200, 300]);
    let mut specs = Vec::new();
    for &n in &steps {
        for j2 in cfg.j2_grid() {
            specs.push(PointSpec {
                steps: n,
                j2,
                ..base.clone()
            });
        }
    }
    checked(specs)
}

/// Table I points: every pair at every `J2`, each flagged with whether the
/// two driven bonds commute.
pub fn table1_specs(cfg: &Config) -> Result<Vec<(PointSpec, bool)>> {
    cfg.validate()?;
    let j2s = cfg.j2.clone().unwrap_or_else(|| vec![0.0, 0.2]);
    if let Some(j2) = j2s.iter().find(|&&j2| j2 >= cfg.j1) {
        bail!(ConfigError::Invalid(format!(
            "table1 needs J1 > J2, got J1 = {} and J2 = {j2}",
            cfg.j1
        )));
    }
    let steps = cfg.steps.clone().unwrap_or_else(|| vec![200]);
    let base = base_spec(cfg, Kind::Lattice);
    let mut out = Vec::new();
    for &j2 in &j2s {
        let model = build_tetramerized_lattice(cfg.lx, cfg.ly, cfg.j1, j2, cfg.plaquette)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        for &n in &steps {
            for (a, b) in TABLE1_PAIRS {
                let spec = PointSpec {
                    j2,
                    steps: n,
                    path: format!("+{a}-{b}"),
                    ..base.clone()
                };
                out.push((spec, !model.slots_share_site(a, b)));
            }
        }
    }
    let specs = checked(out.iter().map(|p| p.0.clone()).collect())?;
    Ok(specs
        .into_iter()
        .zip(out.into_iter().map(|p| p.1))
        .collect())
}

fn write_rows(
    path: &Path,
    rows: &[SweepRow],
    extra_header: &[&str],
    extra: impl Fn(&SweepRow) -> Vec<String>,
) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_csv(std::io::BufWriter::new(file), rows, extra_header, extra)
        .with_context(|| format!("writing {}", path.display()))
}

fn phase_chart(title: &str, rows: &[SweepRow], group: impl Fn(&SweepRow) -> String) -> Chart {
    let mut labels: Vec<String> = Vec::new();
    for r in rows {
        let g = group(r);
        if !labels.contains(&g) {
            labels.push(g);
        }
    }
    let mut series = Vec::new();
    for (c, label) in labels.iter().enumerate() {
        let mine: Vec<&SweepRow> = rows.iter().filter(|r| group(r) == *label).collect();
        let hat: Vec<(f64, f64)> = mine
            .iter()
            .filter_map(|r| r.phi_hat.map(|p| (r.spec.j2 - r.spec.j1, p)))
            .collect();
        if !hat.is_empty() {
            series.push(Series {
                label: format!("{label} circuit"),
                points: hat,
                style: Style::Markers,
                color: c,
            });
        }
    }
    // the oracle does not depend on N, so one curve per distinct model is enough
    let mut oracle_labels: Vec<(String, usize)> = Vec::new();
    for r in rows {
        let key = if r.spec.kind == Kind::Chain {
            format!("L={}", r.spec.size)
        } else {
            format!("{}x{}", r.spec.size, r.spec.ly)
        };
        if !oracle_labels.iter().any(|(k, _)| *k == key) {
            oracle_labels.push((key, oracle_labels.len()));
        }
    }
    for (key, c) in &oracle_labels {
        let mut pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| {
                let k = if r.spec.kind == Kind::Chain {
                    format!("L={}", r.spec.size)
                } else {
                    format!("{}x{}", r.spec.size, r.spec.ly)
                };
                k == *key
            })
            .filter_map(|r| r.phi_oracle.map(|p| (r.spec.j2 - r.spec.j1, p.abs())))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|a, b| a.0 == b.0);
        if !pts.is_empty() {
            series.push(Series {
                label: format!("{key} exact"),
                points: pts,
                style: Style::Dashed,
                color: *c,
            });
        }
    }
    Chart {
        title: title.into(),
        x_label: "J2 − J1".into(),
        y_label: "Berry phase".into(),
        series,
        markers: vec![(0.0, "J1 = J2".into())],
        y_ticks: phase_ticks(),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_svg(cfg: &Config, name: &str, chart: Chart) -> Result<Option<PathBuf>> {
    if !cfg.plot {
        return Ok(None);
    }
    let path = cfg.out.join(name);
    fs::write(&path, chart.to_svg()).with_context(|| format!("writing {}", path.display()))?;
    Ok(Some(path))
}

pub fn cmd_sweep_1d(cfg: &Config) -> Result<Outputs> {
    let specs = sweep_1d_specs(cfg)?;
    ensure_dir(&cfg.out)?;
    let run = settings(cfg);
    let rows = in_pool(cfg, || run_sweep(&specs, &run))??;
    let csv = cfg.out.join("sweep_1d.csv");
    write_rows(&csv, &rows, &[], |_| Vec::new())?;
    let chart = phase_chart(
        "Berry phase on the twisted bond, dimerized chain",
        &rows,
        |r| format!("L={}", r.spec.size),
    );
    let svg = write_svg(cfg, "sweep_1d.svg", chart)?;
    Ok(Outputs { csv, svg, rows })
}

pub fn cmd_sweep_2d(cfg: &Config) -> Result<Outputs> {
    let specs = sweep_2d_specs(cfg)?;
    ensure_dir(&cfg.out)?;
    let run = settings(cfg);
    let rows = in_pool(cfg, || run_sweep(&specs, &run))??;
    let csv = cfg.out.join("sweep_2d.csv");
    write_rows(&csv, &rows, &[], |_| Vec::new())?;
    let chart = phase_chart(
        "Berry phase on a plaquette, tetramerized lattice",
        &rows,
        |r| format!("N={}", r.spec.steps),
    );
    let svg = write_svg(cfg, "sweep_2d.svg", chart)?;
    Ok(Outputs { csv, svg, rows })
}

pub fn cmd_table1(cfg: &Config) -> Result<Outputs> {
    let points = table1_specs(cfg)?;
    ensure_dir(&cfg.out)?;
    let specs: Vec<PointSpec> = points.iter().map(|p| p.0.clone()).collect();
    let run = settings(cfg);
    let rows = in_pool(cfg, || run_sweep(&specs, &run))??;
    let csv = cfg.out.join("table1.csv");
    let commute = |r: &SweepRow| {
        let yes = points.iter().find(|p| p.0 == r.spec).is_some_and(|p| p.1);
        vec![if yes { "yes" } else { "no" }.to_string()]
    };
    write_rows(&csv, &rows, &["commute"], commute)?;
    Ok(Outputs {
        csv,
        svg: None,
        rows,
    })
}

/// One row of the plaquette spectrum scan.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumRow {
    pub twist_sum: f64,
    pub exact: Vec<f64>,
    pub formula: [f64; 4],
    pub ground_degenerate: bool,
}

impl SpectrumRow {
    pub fn max_deviation(&self) -> f64 {
        self.exact
            .iter()
            .zip(&self.formula)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn spectrum_rows(j1: f64, points: usize) -> Result<Vec<SpectrumRow>> {
    (0..points)
        .map(|k| {
            let phi = std::f64::consts::TAU * k as f64 / points as f64;
            let exact = plaquette_spectrum(j1, &[phi, 0.0, 0.0, 0.0])?;
            let threshold =
                berryloop::oracle::DEGENERACY_THRESHOLD * j1.abs().max(f64::MIN_POSITIVE);
            Ok(SpectrumRow {
                twist_sum: phi,
                ground_degenerate: exact.len() > 1 && exact[1] - exact[0] < threshold,
                formula: plaquette_levels_closed_form(j1, phi),
                exact,
            })
        })
        .collect()
}

pub struct SpectrumOutputs {
    pub csv: PathBuf,
    pub svg: Option<PathBuf>,
    pub rows: Vec<SpectrumRow>,
}

pub fn cmd_spectrum(cfg: &Config) -> Result<SpectrumOutputs> {
    cfg.validate()?;
    ensure_dir(&cfg.out)?;
    let rows = spectrum_rows(cfg.j1, cfg.spectrum_points)?;
    let csv = cfg.out.join("spectrum.csv");
    let file = fs::File::create(&csv).with_context(|| format!("creating {}", csv.display()))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    w.write_record([
        "twist_sum",
        "ed_0",
        "ed_1",
        "ed_2",
        "ed_3",
        "formula_0",
        "formula_1",
        "formula_2",
        "formula_3",
        "max_deviation",
        "ground_degenerate",
    ])?;
    for r in &rows {
        let mut rec = vec![num(r.twist_sum)];
        rec.extend((0..4).map(|k| r.exact.get(k).copied().map(num).unwrap_or_default()));
        rec.extend(r.formula.iter().map(|&x| num(x)));
        rec.push(num(r.max_deviation()));
        rec.push(r.ground_degenerate.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;

    let mut series = Vec::new();
    for k in 0..4 {
        series.push(Series {
            label: format!("E{k} formula"),
            points: rows.iter().map(|r| (r.twist_sum, r.formula[k])).collect(),
            style: Style::Line,
            color: k,
        });
        series.push(Series {
            label: format!("E{k} exact"),
            points: rows
                .iter()
                .filter_map(|r| r.exact.get(k).map(|&e| (r.twist_sum, e)))
                .collect(),
            style: Style::Markers,
            color: k,
        });
    }
    let chart = Chart {
        title: "Twisted plaquette levels".into(),
        x_label: "twist sum |φ|".into(),
        y_label: "energy / J1".into(),
        series,
        markers: vec![(std::f64::consts::PI, "degenerate at π".into())],
        y_ticks: Vec::new(),
    };
    let svg = write_svg(cfg, "spectrum.svg", chart)?;
    Ok(SpectrumOutputs { csv, svg, rows })
}

/// Result of the `berry` command; `code` is the process exit status.
#[derive(Debug)]
pub struct BerryOutcome {
    pub row: SweepRow,
    pub code: u8,
}

pub fn berry_spec(cfg: &Config) -> Result<PointSpec> {
    cfg.validate()?;
    let kind = cfg.kind.unwrap_or_default();
    let mut spec = base_spec(cfg, kind);
    if kind == Kind::Chain {
        spec.size = cfg.lengths.as_ref().map_or(4, |l| l[0]);
        spec.ly = 1;
    }
    spec.j2 = cfg.j2.as_ref().map_or(0.5, |j| j[0]);
    spec.steps = cfg.steps.as_ref().map_or(200, |n| n[0]);
    Ok(checked(vec![spec])?.remove(0))
}

pub fn cmd_berry(cfg: &Config, out: &mut impl Write) -> Result<BerryOutcome> {
    let spec = berry_spec(cfg)?;
    let run = settings(cfg);
    let row = in_pool(cfg, || run_sweep(std::slice::from_ref(&spec), &run))??.remove(0);
    let field = |x: Option<f64>| x.map(num).unwrap_or_else(|| "-".into());
    let s = &row.spec;
    writeln!(out, "kind: {}", s.kind)?;
    match s.kind {
        Kind::Chain => writeln!(out, "L: {}", s.size)?,
        Kind::Lattice => writeln!(
            out,
            "lattice: {}x{} plaquette ({}, {})",
            s.size, s.ly, s.plaquette.x, s.plaquette.y
        )?,
    }
    writeln!(
        out,
        "J1: {}\nJ2: {}\nT: {}\nN: {}",
        num(s.j1),
        num(s.j2),
        num(s.total_time),
        s.steps
    )?;
    writeln!(out, "path: {}\nmode: {}", s.path, cfg.mode)?;
    writeln!(out, "shots: {}\nseed: {}", s.shots, s.seed)?;
    writeln!(out, "p_hat: {}", field(row.p_hat))?;
    writeln!(out, "phi_hat: {}", field(row.phi_hat))?;
    writeln!(out, "ci: {}", field(row.ci))?;
    writeln!(out, "phi_oracle: {}", field(row.phi_oracle))?;
    writeln!(out, "min_gap: {}", field(row.min_gap))?;
    writeln!(out, "overlap_magnitude: {}", field(row.overlap_magnitude))?;
    if let Some(e) = &row.estimate {
        writeln!(out, "gate_count: {}", e.gate_count)?;
    }
    let label = match row.classification {
        Classification::Topological => "topological (π)",
        Classification::Trivial => "trivial (0)",
        Classification::Undefined => "undefined",
    };
    writeln!(out, "classification: {label}")?;
    if let Some(note) = &row.note {
        writeln!(out, "reason: {note}")?;
    }
    let code = if row.classification == Classification::Undefined {
        2
    } else {
        0
    };
    Ok(BerryOutcome { row, code })
}
