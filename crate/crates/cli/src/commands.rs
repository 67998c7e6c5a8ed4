use serde_json::json;

use qa_entangle::constants::{COUPLING_SPREAD, DELTA_SPREAD};
use qa_entangle::entangle::{enumerate_bipartitions, measure_series, Band, SeriesOptions};
use qa_entangle::io::Table;
use qa_entangle::model::{assemble_hamiltonian, AnnealSchedule, Perturbation, ProbeConfig, ProblemInstance};
use qa_entangle::qts::{fit_peaks, resonances, simulate_population_protocol, simulate_rate_spectrum};
use qa_entangle::spectra::{eigendecompose, scan_vs_h, scan_vs_s};
use qa_entangle::thermal::populations;
use qa_entangle::witness::{
    robustness_monte_carlo, sdp_sweep, sdp_table, summarize_bounds, summary_table, susceptibility_sweep,
    RobustnessOptions, SdpSweepOptions,
};
use qa_entangle::{Error, Result};

use crate::config::{
    parse_grid, parse_partitions, AxisArg, Cli, Command, Common, MeasuresArgs, PopulationsArgs, ProbeArgs, QtsArgs,
    RobustnessArgs, SpectrumArgs, WitnessSdpArgs,
};
use crate::output::{describe, emit, Manifest};

/// Resonances kept inside an automatic probe grid.
const AUTO_GRID_LEVELS: usize = 4;

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Spectrum(a) => spectrum(a),
        Command::Qts(a) => qts(a),
        Command::Populations(a) => populations_cmd(a),
        Command::Measures(a) => measures(a),
        Command::WitnessSdp(a) => witness_sdp(a),
        Command::Robustness(a) => robustness(a),
    }
}

fn load(common: &Common) -> Result<(AnnealSchedule<f64>, ProblemInstance<f64>)> {
    let schedule = common.schedule()?;
    let instance = common.instance()?;
    common.temperature()?;
    Ok((schedule, instance))
}

fn warn(table: &mut Table, warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
        table.meta("warning", w);
    }
}

impl ProbeArgs {
    fn config(&self) -> ProbeConfig<f64> {
        ProbeConfig {
            delta_p: self.delta_p,
            j_p: self.j_p,
            attach_to: self.attach_to,
            linewidth: self.linewidth,
            ..ProbeConfig::default()
        }
    }

    /// Explicit grid, or one spanning the lowest resonances with ten points
    /// per linewidth.
    fn grid(&self, offsets: impl Iterator<Item = (f64, f64)>) -> Result<Vec<f64>> {
        if let Some(text) = &self.eps_grid {
            return parse_grid(text);
        }
        let (lo, hi) = offsets.fold((f64::INFINITY, f64::NEG_INFINITY), |a, b| (a.0.min(b.0), a.1.max(b.1)));
        let (lo, hi) = (lo - 2.0 * self.linewidth, hi + 2.0 * self.linewidth);
        let step = self.linewidth / 10.0;
        let count = ((hi - lo) / step).ceil() as usize + 1;
        Ok((0..count).map(|k| lo + step * k as f64).collect())
    }
}

fn lowest_span(offsets: &[f64]) -> (f64, f64) {
    (offsets[0], offsets[(AUTO_GRID_LEVELS - 1).min(offsets.len() - 1)])
}

fn spectrum(a: &SpectrumArgs) -> Result<()> {
    let (schedule, instance) = load(&a.common)?;
    let mut manifest = Manifest::new("spectrum");
    manifest.inputs(&a.common, &schedule, &instance);
    let (scan, fixed_s) = match a.axis {
        AxisArg::S => {
            let grid = parse_grid(&a.s_grid)?;
            manifest.set("axis", "s").set("s_grid", grid.clone());
            (scan_vs_s(&instance, &schedule, &grid)?, None)
        }
        AxisArg::H => {
            let s = a.s.ok_or_else(|| Error::Validation("--axis h needs --s".into()))?;
            let grid = parse_grid(&a.h_grid)?;
            manifest.set("axis", "h").set("s", s).set("h_grid", grid.clone());
            (scan_vs_h(&instance, &schedule, s, &grid)?, Some(s))
        }
    };
    let mut table = scan.to_table(a.levels);
    describe(&mut table, &schedule, &instance, &a.common);
    if let Some(s) = fixed_s {
        table.meta("s", s);
    }
    let (k, x, g) = scan.min_gap();
    table.meta("min_gap", format!("{g} GHz at {} = {x} (row {k})", scan.axis.name()));

    let mut extra = Vec::new();
    if let Some(path) = &a.qts_out {
        let probe = a.probe.config();
        let points: Vec<(f64, f64, Option<f64>)> = scan
            .grid
            .iter()
            .map(|&x| match fixed_s {
                Some(s) => (x, s, Some(x)),
                None => (x, x, None),
            })
            .collect();
        let res = points
            .iter()
            .map(|&(_, s, h)| resonances(&instance, &schedule, s, h, &probe))
            .collect::<Result<Vec<_>>>()?;
        let eps = a.probe.grid(res.iter().map(|r| lowest_span(&r.offsets)))?;
        let probe = ProbeConfig { eps_p_grid: eps, ..probe };
        let mut map = Table::new([scan.axis.name(), "eps_p_ghz", "gamma_norm"]);
        describe(&mut map, &schedule, &instance, &a.common);
        for &(x, s, h) in &points {
            let rate = simulate_rate_spectrum(&instance, &schedule, s, h, &probe, None)?;
            for (e, g) in rate.eps_p.iter().zip(&rate.gamma_norm) {
                map.push(vec![x, *e, *g]);
            }
        }
        manifest.set("qts_eps_grid", probe.eps_p_grid.clone());
        extra.push((path.clone(), map));
    }
    emit(&a.common, &table, &extra, &manifest)
}

fn qts(a: &QtsArgs) -> Result<()> {
    let (schedule, instance) = load(&a.common)?;
    let t = a.common.temperature()?;
    let probe = a.probe.config();
    let res = resonances(&instance, &schedule, a.s, a.h, &probe)?;
    let eps = a.probe.grid(std::iter::once(lowest_span(&res.offsets)))?;
    let probe = ProbeConfig { eps_p_grid: eps, ..probe };
    let rate = simulate_rate_spectrum(&instance, &schedule, a.s, a.h, &probe, Some(t))?;
    let mut table = rate.to_table();
    describe(&mut table, &schedule, &instance, &a.common);
    table
        .meta("s", a.s)
        .meta("probe", format!("j_p={} delta_p={} linewidth={} attach_to={}", a.probe.j_p, a.probe.delta_p, a.probe.linewidth, a.probe.attach_to))
        .meta("resonances_ghz", join(&rate.offsets))
        .meta("weights", join(&rate.weights));
    if let Some(h) = a.h {
        table.meta("h", h);
    }
    warn(&mut table, &rate.warnings);
    if let Some(count) = a.fit {
        let fit = fit_peaks(&rate, count)?;
        for (k, p) in fit.peaks.iter().enumerate() {
            table.meta(format!("peak_{}", k + 1), format!("{} +- {} GHz, fwhm {}", p.centroid, p.centroid_err, p.width));
        }
        if let Some((g, err)) = fit.gap() {
            table.meta("fitted_gap_ghz", format!("{g} +- {err}"));
        }
        table.meta("unresolved", fit.unresolved);
    }
    let mut manifest = Manifest::new("qts");
    manifest.inputs(&a.common, &schedule, &instance);
    manifest.set("s", a.s).set("h", json!(a.h)).set("eps_grid", probe.eps_p_grid.clone()).set("fit", json!(a.fit));
    emit(&a.common, &table, &[], &manifest)
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn populations_cmd(a: &PopulationsArgs) -> Result<()> {
    let (schedule, instance) = load(&a.common)?;
    let ensemble = a.common.ensemble()?;
    let grid = parse_grid(&a.s_grid)?;
    let probe = a.probe.config();
    let mut table = Table::new(["s", "P1", "P2", "P1_boltzmann", "P2_boltzmann"]);
    describe(&mut table, &schedule, &instance, &a.common);
    let mut warnings = Vec::new();
    for &s in &grid {
        let out = simulate_population_protocol(&instance, &schedule, s, ensemble, &probe, 2)?;
        let p = &out.estimate.p;
        table.push(vec![s, p[0], p[1], out.reference[0], out.reference[1]]);
        for w in out.warnings {
            if !warnings.contains(&w) {
                warnings.push(w);
            }
        }
    }
    warn(&mut table, &warnings);
    let mut manifest = Manifest::new("populations");
    manifest.inputs(&a.common, &schedule, &instance);
    manifest.set("s_grid", grid).set("probe_j_p", a.probe.j_p).set("probe_delta_p", a.probe.delta_p);
    emit(&a.common, &table, &[], &manifest)
}

fn measures(a: &MeasuresArgs) -> Result<()> {
    let (schedule, instance) = load(&a.common)?;
    let ensemble = a.common.ensemble()?;
    let grid = parse_grid(&a.s_grid)?;
    let options = SeriesOptions {
        levels: Some(a.levels),
        samples: a.samples,
        seed: a.seed,
        perturbation: Perturbation::default(),
        negativity: true,
    };
    let series = measure_series(&instance, &schedule, ensemble, &grid, &options)?;
    let w_chi = if a.no_wchi {
        None
    } else {
        Some(susceptibility_sweep(&instance, &schedule, &grid, ensemble, a.chi_step, &None)?.w_chi)
    };

    let mut columns = vec!["s"];
    if series.concurrence.is_some() {
        columns.extend(["C", "C_err"]);
    }
    columns.extend(["N", "N_err"]);
    if series.formation.is_some() {
        columns.push("Ef");
    }
    if w_chi.is_some() {
        columns.extend(["W_chi", "W_chi_err"]);
    }
    let mut table = Table::new(columns);
    describe(&mut table, &schedule, &instance, &a.common);
    table
        .meta("levels", a.levels)
        .meta("samples", a.samples)
        .meta("seed", a.seed)
        .meta("spreads", format!("delta {DELTA_SPREAD}, coupling {COUPLING_SPREAD} (uniform, fractional)"));
    let negativity = series.negativity.as_ref().expect("negativity is always evaluated");
    for (k, &s) in grid.iter().enumerate() {
        let mut row = vec![s];
        if let Some(c) = &series.concurrence {
            row.extend([c[k].value, c[k].err]);
        }
        row.extend([negativity[k].value, negativity[k].err]);
        if let Some(f) = &series.formation {
            row.push(f[k]);
        }
        if let Some(w) = &w_chi {
            row.extend([w[k].value, w[k].err]);
        }
        table.push(row);
    }
    let mut manifest = Manifest::new("measures");
    manifest.inputs(&a.common, &schedule, &instance);
    manifest
        .set("s_grid", grid)
        .set("levels", a.levels)
        .set("samples", a.samples)
        .set("seed", a.seed)
        .set("chi_step", a.chi_step)
        .set("w_chi", !a.no_wchi);
    emit(&a.common, &table, &[], &manifest)
}

fn witness_sdp(a: &WitnessSdpArgs) -> Result<()> {
    let (schedule, instance) = load(&a.common)?;
    let ensemble = a.common.ensemble()?;
    let grid = parse_grid(&a.s_grid)?;
    let partitions = a.partitions.as_deref().map(|p| parse_partitions(p, instance.n())).transpose()?;
    let robustness = (a.samples > 0).then(|| RobustnessOptions {
        samples: a.samples,
        seed: a.seed,
        perturbation: Perturbation::default(),
    });
    let options = SdpSweepOptions { delta: (a.delta_p1, a.delta_p2), ensemble, partitions, robustness };
    let rows = sdp_sweep(&instance, &schedule, &grid, &options)?;
    let mut table = sdp_table(&rows);
    describe(&mut table, &schedule, &instance, &a.common);
    table.meta("delta_p1", a.delta_p1).meta("delta_p2", a.delta_p2).meta("samples", a.samples).meta("seed", a.seed);
    table.meta("partition_id", "bit i set when qubit i is in A");
    let mut extra = Vec::new();
    if let Some(path) = &a.summary {
        let mut summary = summary_table(&summarize_bounds(&rows));
        describe(&mut summary, &schedule, &instance, &a.common);
        extra.push((path.clone(), summary));
    }
    let mut manifest = Manifest::new("witness-sdp");
    manifest.inputs(&a.common, &schedule, &instance);
    manifest
        .set("s_grid", grid)
        .set("partitions", json!(a.partitions))
        .set("delta_p1", a.delta_p1)
        .set("delta_p2", a.delta_p2)
        .set("samples", a.samples)
        .set("seed", a.seed);
    emit(&a.common, &table, &extra, &manifest)
}

fn robustness(a: &RobustnessArgs) -> Result<()> {
    let (schedule, instance) = load(&a.common)?;
    let ensemble = a.common.ensemble()?;
    if !a.spread_scale.is_finite() || a.spread_scale < 0.0 {
        return Err(Error::Validation("--spread-scale must be a non-negative number".into()));
    }
    let v = schedule.at(a.s)?;
    let spectrum = eigendecompose(&assemble_hamiltonian(&instance, &schedule, a.s, None)?)?;
    let pops = populations(&spectrum, ensemble);
    let p1 = Band { value: pops[0], err: a.delta_p1 };
    let p2 = Band { value: pops[1], err: a.delta_p2 };
    let cut = match &a.partitions {
        Some(text) => {
            let cuts = parse_partitions(text, instance.n())?;
            if cuts.len() != 1 {
                return Err(Error::Validation("robustness takes exactly one partition".into()));
            }
            cuts[0]
        }
        None => {
            let options = SdpSweepOptions {
                delta: (a.delta_p1, a.delta_p2),
                ensemble,
                partitions: Some(enumerate_bipartitions(instance.n())?),
                robustness: None,
            };
            let rows = sdp_sweep(&instance, &schedule, &[a.s], &options)?;
            // With no witness on any cut the first one reports the error below.
            rows.iter()
                .filter(|r| r.value.is_finite())
                .max_by(|x, y| x.value.total_cmp(&y.value))
                .unwrap_or(&rows[0])
                .partition
        }
    };
    let options = RobustnessOptions {
        samples: a.samples,
        seed: a.seed,
        perturbation: Perturbation::default().scaled(a.spread_scale),
    };
    let out = robustness_monte_carlo(&instance, &schedule, a.s, &cut, p1, p2, &options)?;

    let mut table = Table::new(["sample", "bound", "certified"]);
    describe(&mut table, &schedule, &instance, &a.common);
    table
        .meta("s", a.s)
        .meta("delta_ghz", v.delta)
        .meta("escale_ghz", v.escale)
        .meta("partition", cut.to_string())
        .meta("partition_id", cut.mask())
        .meta("unperturbed_bound", out.unperturbed)
        .meta("certified_fraction", out.certified_fraction())
        .meta("failures", out.failures.len())
        .meta("spread_scale", a.spread_scale)
        .meta("seed", a.seed);
    for q in [0.0, 0.1587, 0.5, 0.8413, 1.0] {
        if let Some(v) = out.quantile(q) {
            table.meta(format!("bound_q{q}"), v);
        }
    }
    let mut solved = out.bounds.iter();
    let mut failed = out.failures.iter().peekable();
    for k in 0..out.samples {
        if failed.peek().is_some_and(|f| f.0 == k) {
            let (_, msg) = failed.next().expect("peeked");
            eprintln!("warning: sample {k} failed: {msg}");
            table.push(vec![k as f64, f64::NAN, 0.0]);
        } else {
            let b = *solved.next().expect("one bound per solved sample");
            table.push(vec![k as f64, b, if b < 0.0 { 1.0 } else { 0.0 }]);
        }
    }
    let mut manifest = Manifest::new("robustness");
    manifest.inputs(&a.common, &schedule, &instance);
    manifest
        .set("s", a.s)
        .set("partition_id", cut.mask())
        .set("delta_p1", a.delta_p1)
        .set("delta_p2", a.delta_p2)
        .set("samples", a.samples)
        .set("seed", a.seed)
        .set("spread_scale", a.spread_scale);
    emit(&a.common, &table, &[], &manifest)
}
