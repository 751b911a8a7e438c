//! One runner per subcommand. Each fills an `OutputSet` and returns a summary and checks.

use rayon::prelude::*;
use serde_json::{json, Value};
use subradiant::analysis::{
    corner_asymptotics, deformation_sweep, optimize_period, scaling_sweep, state_label, BranchMode,
    DeformationResult, OptimizeOptions, PeriodMode, ScalingOptions, SweepOptions, TrackedBranch,
};
use subradiant::dispersion::{
    dipole_sum, dispersion_at, dispersion_path, find_flat_band_period, light_line_crossings, BlochVector,
    DispersionOptions, FlatBandOptions, PathSample,
};
use subradiant::geometry::{generate_array, PolarizationTag};
use subradiant::hamiltonian::build_hamiltonian;
use subradiant::scattering::{detuning_grid, scattering_spectrum, BeamParams, BesselBeam, IncidentField};
use subradiant::spectrum::{diagonalize, CollectiveState};

use crate::config::{Command, RunConfig};
use crate::output::{num, Check, OutputSet, Table};
use crate::RunError;

pub type Outcome = (Value, Vec<Check>);

fn compute<E: std::fmt::Display>(context: &str) -> impl Fn(E) -> RunError + '_ {
    move |e| RunError::Compute(format!("{context}: {e}"))
}

pub fn dispatch(cfg: &RunConfig, out: &mut OutputSet) -> Result<Outcome, RunError> {
    match cfg.command {
        Command::Spectrum => spectrum(cfg, out),
        Command::Modes => modes(cfg, out),
        Command::Dispersion => dispersion(cfg, out),
        Command::DispersionMap => dispersion_map(cfg, out),
        Command::FlatBand => flat_band(cfg, out),
        Command::Scaling => scaling(cfg, out),
        Command::OptimizePeriod => optimize(cfg, out),
        Command::Scatter => scatter(cfg, out),
        Command::Deform => deform(cfg, out),
        Command::CornerAsymptotics => corner(cfg, out),
    }
}

fn solve_spectrum(cfg: &RunConfig) -> Result<(subradiant::geometry::AtomArray, Vec<CollectiveState>), RunError> {
    let array = generate_array(cfg.descriptor()?, cfg.polarization_tag()?).map_err(compute("geometry"))?;
    let states = diagonalize(&build_hamiltonian(&array)).map_err(compute("diagonalization"))?;
    Ok((array, states))
}

pub const STATES_HEADER: [&str; 13] =
    ["index", "d_omega", "gamma", "irrep", "mx1", "my1", "w1", "mx2", "my2", "w2", "mx3", "my3", "w3"];

fn states_table(states: &[&CollectiveState]) -> Table {
    let mut t = Table::new(&STATES_HEADER);
    for s in states {
        let mut row = vec![s.index.to_string(), num(s.detuning), num(s.decay), s.irrep.to_string()];
        for k in 0..3 {
            match s.dominant_harmonics.get(k) {
                Some(h) => row.extend([h.mx.to_string(), h.my.to_string(), num(h.weight)]),
                None => row.extend([String::new(), String::new(), String::new()]),
            }
        }
        t.row(row);
    }
    t
}

fn sum_rule_check(states: &[CollectiveState]) -> Check {
    let n = states.len() as f64;
    let err = (states.iter().map(|s| s.decay).sum::<f64>() - n).abs() / n;
    Check::new("decay sum equals atom count", err < 1e-8, format!("relative error {err:.3e}"))
}

fn spectrum(cfg: &RunConfig, out: &mut OutputSet) -> Result<Outcome, RunError> {
    let (array, states) = solve_spectrum(cfg)?;
    out.write("states.csv", &states_table(&states.iter().collect::<Vec<_>>()).into_bytes())?;
    if cfg.dump_matrix {
        let mut buf = Vec::new();
        build_hamiltonian(&array).write_csv(&mut buf).map_err(|e| RunError::Io(e.to_string()))?;
        out.write("hamiltonian.csv", &buf)?;
    }
    let first = &states[0];
    let summary = json!({
        "n_tot": states.len(),
        "gamma_min": first.decay,
        "most_subradiant": state_label(first),
    });
    Ok((summary, vec![sum_rule_check(&states)]))
}

fn modes(cfg: &RunConfig, out: &mut OutputSet) -> Result<Outcome, RunError> {
    let (array, states) = solve_spectrum(cfg)?;
    let irrep = cfg.irrep_filter()?;
    let picked: Vec<&CollectiveState> = states
        .iter()
        .filter(|s| irrep.is_none_or(|i| s.irrep == i))
        .filter(|s| cfg.modes.max_decay.is_none_or(|m| s.decay < m))
        .take(cfg.modes.limit)
        .collect();
    out.write("states.csv", &states_table(&picked).into_bytes())?;
    let mut amp = Table::new(&["index", "site", "x", "y", "re", "im", "abs"]);
    for s in &picked {
        for (j, (p, c)) in array.positions().iter().zip(&s.amplitudes).enumerate() {
            amp.row([s.index.to_string(), j.to_string(), num(p[0]), num(p[1]), num(c.re), num(c.im), num(c.norm())]);
        }
    }
    out.write("amplitudes.csv", &amp.into_bytes())?;
    let summary = json!({ "selected": picked.len(), "labels": picked.iter().map(|s| state_label(s)).collect::<Vec<_>>() });
    let check = Check::new("at least one state selected", !picked.is_empty(), format!("{} states", picked.len()));
    Ok((summary, vec![check]))
}

fn dispersion_options(cfg: &RunConfig) -> DispersionOptions {
    DispersionOptions { force_direct: cfg.dispersion.direct, ..DispersionOptions::default() }
}

fn guided_check(max_guided: f64) -> Check {
    Check::new("guided modes are lossless", max_guided < 1e-6, format!("largest guided decay {max_guided:.3e}"))
}

fn dispersion(cfg: &RunConfig, out: &mut OutputSet) -> Result<Outcome, RunError> {
    let pol = cfg.polarization_tag()?;
    let path = cfg.path_points()?;
    let per_segment = cfg.dispersion.samples.div_ceil(path.len() - 1).max(1);
    let samples = dispersion_path(cfg.period, pol, &path, per_segment, &dispersion_options(cfg)).map_err(compute("dispersion"))?;
    let mut t = Table::new(&["s", "kx", "ky", "d_omega", "gamma", "guided"]);
    let mut gaps = 0;
    let mut max_guided: f64 = 0.0;
    for ps in &samples {
        match ps {
            PathSample::Sample { path_coord, sample } => {
                if sample.below_light_line {
                    max_guided = max_guided.max(sample.decay);
                }
                t.row([num(*path_coord), num(sample.k.kx), num(sample.k.ky), num(sample.detuning), num(sample.decay), sample.below_light_line.to_string()]);
            }
            PathSample::Gap { path_coord, k } => {
                gaps += 1;
                t.row([num(*path_coord), num(k.kx), num(k.ky), "NaN".into(), "NaN".into(), String::new()]);
            }
        }
    }
    out.write("dispersion.csv", &t.into_bytes())?;
    let summary = json!({
        "samples": samples.len(),
        "anomaly_gaps": gaps,
        "light_line_crossings": light_line_crossings(&samples),
        "path": path.iter().map(|p| p.label()).collect::<String>(),
    });
    Ok((summary, vec![guided_check(max_guided)]))
}

fn dispersion_map(cfg: &RunConfig, out: &mut OutputSet) -> Result<Outcome, RunError> {
    let pol = cfg.polarization_tag()?;
    let m = cfg.dispersion.grid;
    if m < 2 {
        return Err(RunError::Config { field: "dispersion.grid".into(), message: "needs at least 2 points per axis".into() });
    }
    let edge = std::f64::consts::PI / cfg.period;
    let opts = dispersion_options(cfg);
    let points: Vec<BlochVector> = (0..m)
        .flat_map(|i| (0..m).map(move |j| BlochVector::new(edge * i as f64 / (m - 1) as f64, edge * j as f64 / (m - 1) as f64)))
        .collect();
    let values: Vec<Option<(f64, f64, bool)>> = points
        .par_iter()
        .map(|&k| {
            dipole_sum(k, pol, cfg.period, cfg.period, &opts).ok().map(|sum| {
                let d = dispersion_at(&sum);
                (d.detuning, d.decay, d.below_light_line)
            })
        })
        .collect();
    let mut t = Table::new(&["kx", "ky", "d_omega", "gamma", "guided"]);
    let mut max_guided: f64 = 0.0;
    for (k, v) in points.iter().zip(&values) {
        match v {
            Some((d, g, guided)) => {
                if *guided {
                    max_guided = max_guided.max(*g);
                }
                t.row([num(k.kx), num(k.ky), num(*d), num(*g), guided.to_string()]);
            }
            None => t.row([num(k.kx), num(k.ky), "NaN".into(), "NaN".into(), String::new()]),
        }
    }
    out.write("dispersion_map.csv", &t.into_bytes())?;
    let failed = values.iter().filter(|v| v.is_none()).count();
    Ok((json!({ "points": points.len(), "unresolved": failed }), vec![guided_check(max_guided)]))
}

fn flat_band(cfg: &RunConfig, out: &mut OutputSet) -> Result<Outcome, RunError> {
    let pol = cfg.polarization_tag()?;
    let [lo, hi] = cfg.flat_band.range;
    let flat = FlatBandOptions { scan_step: cfg.flat_band.scan_step, ..FlatBandOptions::default() };
    let opts = dispersion_options(cfg);
    let found = find_flat_band_period(pol, (lo, hi), &flat, &opts).map_err(compute("flat-band search"))?;
    let steps = ((hi - lo) / flat.scan_step).round() as usize;
    let periods: Vec<f64> = (0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps.max(1) as f64).collect();
    let curv: Vec<String> = periods
        .par_iter()
        .map(|&a| subradiant::dispersion::curvature_at_m(a, pol, flat.step, &opts).map(num).unwrap_or_else(|_| "NaN".into()))
        .collect();
    let mut t = Table::new(&["period", "curvature_m"]);
    for (a, c) in periods.iter().zip(curv) {
        t.row([num(*a), c]);
    }
    out.write("curvature.csv", &t.into_bytes())?;
    let expect_found = pol == PolarizationTag::SigmaZ;
    let check = Check::new(
        "inflection present only for out-of-plane dipoles",
        found.is_some() == expect_found,
        format!("{found:?}"),
    );
    Ok((json!({ "flat_band_period": found }), vec![check]))
}

fn branch_table(branches: &[(&str, &TrackedBranch)], parameter: &str) -> Table {
    let mut t = Table::new(&[parameter, "branch", "label", "d_omega", "gamma", "irrep", "overlap"]);
    for (name, b) in branches {
        for (i, (p, s)) in b.parameters.iter().zip(&b.states).enumerate() {
            let ov = if i == 0 { String::new() } else { num(b.overlaps[i - 1]) };
            t.row([num(*p), name.to_string(), state_label(s), num(s.detuning), num(s.decay), s.irrep.to_string(), ov]);
        }
    }
    t
}

fn scaling(cfg: &RunConfig, out: &mut OutputSet) -> Result<Outcome, RunError> {
    let kind = cfg.lattice_kind()?;
    let pol = cfg.polarization_tag()?;
    cfg.branch_selector(cfg.sweep.sizes.first().copied().unwrap_or(8))?;
    let mode = if cfg.period_mode()? {
        PeriodMode::Optimized { range: (cfg.sweep.range[0], cfg.sweep.range[1]) }
    } else {
        PeriodMode::Fixed(cfg.period)
    };
    let branch = cfg.sweep.branch.clone();
    let selector = move |n| crate::config::parse_branch(&branch, n).expect("validated above");
    let opts = ScalingOptions::default();
    let result = scaling_sweep(kind, pol, &cfg.sweep.sizes, mode, selector, &opts).map_err(compute("scaling sweep"))?;
    let mut t = Table::new(&["geometry", "n", "n_tot", "period", "gamma_min", "branch"]);
    for r in &result.rows {
        t.row([r.geometry.short_name().to_string(), r.n.to_string(), r.n_tot.to_string(), num(r.period), num(r.gamma_min), r.branch.clone()]);
    }
    out.write("scaling.csv", &t.into_bytes())?;
    let f = &result.fit;
    let check = Check::new("power law fits within 0.2 decades", f.is_reliable(), format!("residual {:.3} decades", f.residual));
    Ok((json!({ "fit": f, "skipped": result.skipped }), vec![check]))
}

fn optimize(cfg: &RunConfig, out: &mut OutputSet) -> Result<Outcome, RunError> {
    let kind = cfg.lattice_kind()?;
    let pol = cfg.polarization_tag()?;
    let sel = cfg.branch_selector(cfg.n)?;
    let opts = OptimizeOptions { mode: BranchMode::Tracked, threshold: cfg.sweep.threshold, ..OptimizeOptions::default() };
    let range = (cfg.sweep.range[0], cfg.sweep.range[1]);
    let opt = optimize_period(kind, cfg.n, pol, &sel, range, &opts).map_err(compute("period optimization"))?;
    out.write("branch.csv", &branch_table(&[("target", &opt.grid)], "period").into_bytes())?;
    let summary = json!({
        "selector": sel.to_string(),
        "period": opt.period,
        "gamma_min": opt.decay,
        "state": state_label(&opt.state),
        "splits": opt.grid.splits,
    });
    let check = Check::new("optimum lies on the selected branch", sel.matches(&opt.state), state_label(&opt.state));
    Ok((summary, vec![check]))
}

fn scatter(cfg: &RunConfig, out: &mut OutputSet) -> Result<Outcome, RunError> {
    let (array, states) = solve_spectrum(cfg)?;
    let sc = &cfg.scatter;
    let params = BeamParams { na: sc.na, beta: sc.beta, ..BeamParams::new(sc.l, sc.s) };
    let beam = BesselBeam::new(params).map_err(|e| RunError::Config { field: "scatter".into(), message: e.to_string() })?;
    let beam = beam.centered_at(array.centroid());
    let (lo, hi, count) = cfg.detuning_range()?;
    let grid = detuning_grid((lo, hi), count, &states, sc.narrow, 5.0, 41).map_err(compute("detuning grid"))?;
    let spec = scattering_spectrum(&array, &IncidentField::Bessel(beam.clone()), &grid, Some(&states)).map_err(compute("scattering"))?;

    let mut peaks: Vec<_> = (0..spec.modal.len()).map(|n| spec.modal_peak(n)).collect();
    peaks.sort_by(|a, b| b.height.total_cmp(&a.height).then(a.mode.cmp(&b.mode)));
    let top: Vec<_> = peaks.iter().take(sc.top_k).collect();

    let mut header = vec!["d_omega".to_string(), "sigma_total".to_string()];
    header.extend((1..=top.len()).map(|k| format!("sigma_mode_{k}")));
    let mut t = Table::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    for g in 0..spec.detunings.len() {
        let mut row = vec![num(spec.detunings[g]), num(spec.total[g])];
        row.extend(top.iter().map(|p| num(spec.modal[p.mode][g])));
        t.row(row);
    }
    out.write("scattering.csv", &t.into_bytes())?;

    let mut m = Table::new(&["column", "index", "d_omega", "gamma", "irrep", "mx", "my", "peak_center", "peak_height"]);
    for (k, p) in top.iter().enumerate() {
        let (mx, my) = spec.mode_dominant[p.mode].map(|(a, b)| (a.to_string(), b.to_string())).unwrap_or_default();
        m.row([
            format!("sigma_mode_{}", k + 1),
            p.mode.to_string(),
            num(spec.mode_detuning[p.mode]),
            num(spec.mode_decay[p.mode]),
            spec.mode_irrep[p.mode].to_string(),
            mx,
            my,
            num(p.center),
            num(p.height),
        ]);
    }
    out.write("scattering_modes.csv", &m.into_bytes())?;
    out.write_json("beam.json", &json!({
        "beam": beam,
        "total_j": params.total_j(),
        "reference_intensity": IncidentField::Bessel(beam.clone()).reference_intensity(),
        "sigma0": spec.sigma0,
        "normalization": "cross sections divided by the resonant single-atom value 3/(2 pi) at the peak of |E_z|",
    }))?;

    let err = spec.sum_rule_error();
    let mut checks = vec![Check::new("modal cross sections add up to the total", err < 1e-8, format!("relative error {err:.3e}"))];
    let narrow = spec.largest_narrow_peak(sc.narrow);
    if let Some(p) = narrow {
        let off = (p.center - spec.mode_detuning[p.mode]).abs();
        let half = spec.mode_decay[p.mode] / 2.0;
        checks.push(Check::new("narrow peak sits on its eigen-detuning", off <= half, format!("offset {off:.3e}, half width {half:.3e}")));
    }
    let summary = json!({
        "grid_points": spec.detunings.len(),
        "sum_rule_error": err,
        "largest_narrow_peak": narrow.map(|p| json!({
            "index": p.mode,
            "state": state_label(&states[p.mode]),
            "center": p.center,
            "height": p.height,
            "d_omega": spec.mode_detuning[p.mode],
            "gamma": spec.mode_decay[p.mode],
        })),
    });
    Ok((summary, checks))
}

fn deform(cfg: &RunConfig, out: &mut OutputSet) -> Result<Outcome, RunError> {
    let pol = cfg.polarization_tag()?;
    let [lo, hi] = cfg.sweep.ratio_range;
    let opts = SweepOptions { threshold: cfg.sweep.threshold, ..SweepOptions::default() };
    let r = deformation_sweep(cfg.n, cfg.period, (lo, hi), cfg.sweep.samples, pol, &opts).map_err(compute("deformation sweep"))?;
    out.write("deformation.csv", &branch_table(&[("A2", &r.a2), ("B2", &r.b2)], "ratio").into_bytes())?;
    let span = (1.0 - lo).min(hi - 1.0);
    let summary = json!({
        "a2_amplification_1pct": DeformationResult::amplification(&r.a2, 0.01),
        "b2_change_factor": DeformationResult::change_factor(&r.b2, span),
        "span": span,
        "a2_splits": r.a2.splits,
        "b2_splits": r.b2.splits,
    });
    let check = Check::new("both branches tracked without splits", r.a2.is_intact() && r.b2.is_intact(), format!("{} + {} splits", r.a2.splits.len(), r.b2.splits.len()));
    Ok((summary, vec![check]))
}

fn corner(cfg: &RunConfig, out: &mut OutputSet) -> Result<Outcome, RunError> {
    let c = corner_asymptotics(&cfg.sweep.sizes).map_err(compute("corner asymptotics"))?;
    let mut t = Table::new(&["n", "q0", "symmetric", "antisymmetric"]);
    for r in &c.rows {
        t.row([r.n.to_string(), num(r.q0), num(r.symmetric), num(r.antisymmetric)]);
    }
    out.write("corner.csv", &t.into_bytes())?;
    let (s, a) = (c.symmetric_fit.exponent, c.antisymmetric_fit.exponent);
    let checks = vec![
        Check::new("symmetric corner power is 3", (s - 3.0).abs() <= 0.1, format!("{s:.4}")),
        Check::new("antisymmetric corner power is 5", (a - 5.0).abs() <= 0.1, format!("{a:.4}")),
    ];
    Ok((json!({ "symmetric_fit": c.symmetric_fit, "antisymmetric_fit": c.antisymmetric_fit }), checks))
}

