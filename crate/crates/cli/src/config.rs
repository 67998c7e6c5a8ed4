use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qa_entangle::constants::DEFAULT_TEMPERATURE_MK;
use qa_entangle::entangle::Bipartition;
use qa_entangle::model::{AnnealSchedule, ProblemInstance};
use qa_entangle::thermal::{Ensemble, Temperature};
use qa_entangle::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "qa-entangle", version, about = "Spectra, populations and entanglement witnesses for small annealers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy levels against s, or against a uniform bias at fixed s.
    Spectrum(SpectrumArgs),
    /// Simulated probe tunneling-rate spectrum at one s.
    Qts(QtsArgs),
    /// P1, P2 from the probe protocol next to the Boltzmann values.
    Populations(PopulationsArgs),
    /// Concurrence, negativity and the susceptibility witness along s.
    Measures(MeasuresArgs),
    /// SDP upper bounds of the partial-transpose witness on every cut.
    WitnessSdp(WitnessSdpArgs),
    /// Monte-Carlo certification rate of one cut under calibration errors.
    Robustness(RobustnessArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    S,
    H,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Schedule CSV with header `s,delta_ghz,escale_ghz`; a synthetic
    /// schedule is used when omitted.
    #[arg(long)]
    pub schedule: Option<PathBuf>,
    /// Instance JSON `{ "n": .., "h": [..], "j": [[i, j, v], ..] }`.
    #[arg(long, conflicts_with = "preset")]
    pub instance: Option<PathBuf>,
    /// Named instance (fm2, fm8).
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TEMPERATURE_MK)]
    pub temperature_mk: f64,
    /// Zero-temperature ground state instead of the Boltzmann state.
    #[arg(long)]
    pub ground: bool,
    /// Output file; standard output when omitted. A `<out>.manifest.json`
    /// is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = AxisArg::S)]
    pub axis: AxisArg,
    /// Anneal fraction for `--axis h`.
    #[arg(long)]
    pub s: Option<f64>,
    /// `start:stop:count` or a comma list.
    #[arg(long, default_value = "0.2:0.6:81")]
    pub s_grid: String,
    #[arg(long, default_value = "-0.5:0.5:101", allow_hyphen_values = true)]
    pub h_grid: String,
    /// Levels above the ground state to report.
    #[arg(long)]
    pub levels: Option<usize>,
    /// Also write a probe-rate map over the scan to this file.
    #[arg(long)]
    pub qts_out: Option<PathBuf>,
    #[command(flatten)]
    pub probe: ProbeArgs,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    /// Probe bias grid in GHz. When omitted it spans the lowest four
    /// resonances with ten points per linewidth.
    #[arg(long, allow_hyphen_values = true)]
    pub eps_grid: Option<String>,
    /// Probe coupling, GHz.
    #[arg(long, default_value_t = -1.5, allow_hyphen_values = true)]
    pub j_p: f64,
    /// Probe tunneling amplitude, GHz.
    #[arg(long, default_value_t = 1e-3)]
    pub delta_p: f64,
    /// Resonance full width at half maximum, GHz.
    #[arg(long, default_value_t = 0.4)]
    pub linewidth: f64,
    #[arg(long, default_value_t = 0)]
    pub attach_to: usize,
}

#[derive(Debug, Args)]
pub struct QtsArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub s: f64,
    /// Uniform bias applied to every system qubit.
    #[arg(long, allow_hyphen_values = true)]
    pub h: Option<f64>,
    #[command(flatten)]
    pub probe: ProbeArgs,
    /// Fit this many Gaussians and report the centroids in the metadata.
    #[arg(long)]
    pub fit: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PopulationsArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "0.2:0.6:41")]
    pub s_grid: String,
    #[command(flatten)]
    pub probe: ProbeArgs,
}

#[derive(Debug, Args)]
pub struct MeasuresArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "0.2:0.6:41")]
    pub s_grid: String,
    /// Levels kept in the density matrix.
    #[arg(long, default_value_t = 2)]
    pub levels: usize,
    /// Monte-Carlo samples for the error bands.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Bias step for the susceptibilities, dimensionless.
    #[arg(long, default_value_t = qa_entangle::witness::DEFAULT_CHI_STEP)]
    pub chi_step: f64,
    /// Skip the susceptibility witness.
    #[arg(long)]
    pub no_wchi: bool,
}

#[derive(Debug, Args)]
pub struct WitnessSdpArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "0.26:0.40:15")]
    pub s_grid: String,
    /// Semicolon-separated A-sides, e.g. `0,1,2;0,4`. All cuts when omitted.
    #[arg(long)]
    pub partitions: Option<String>,
    #[arg(long, default_value_t = 0.01)]
    pub delta_p1: f64,
    #[arg(long, default_value_t = 0.01)]
    pub delta_p2: f64,
    /// Perturbed instances per point for the error columns; 0 disables them.
    #[arg(long, default_value_t = 0)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-s median, minimum and maximum over cuts, written to this file.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RobustnessArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 0.32)]
    pub s: f64,
    /// A-side of the cut, e.g. `0,1,2`. The cut with the largest
    /// unperturbed bound when omitted.
    #[arg(long)]
    pub partitions: Option<String>,
    #[arg(long, default_value_t = 0.01)]
    pub delta_p1: f64,
    #[arg(long, default_value_t = 0.01)]
    pub delta_p2: f64,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Multiplies the default calibration spreads.
    #[arg(long, default_value_t = 1.0)]
    pub spread_scale: f64,
}

fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

/// `start:stop:count` (inclusive) or `a,b,c`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(validation("grid is empty"));
    }
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, stop, count] = parts[..] else {
            return Err(validation(format!("grid `{text}` must be start:stop:count")));
        };
        let start: f64 = parse_number(start)?;
        let stop: f64 = parse_number(stop)?;
        let count: usize =
            count.trim().parse().map_err(|_| validation(format!("grid count `{count}` is not an integer")))?;
        if count == 0 {
            return Err(validation("grid count must be at least 1"));
        }
        if count == 1 {
            return Ok(vec![start]);
        }
        let step = (stop - start) / (count - 1) as f64;
        // Snap to 12 decimals so `0.3:0.6:4` yields 0.4 rather than 0.39999999999999997.
        let snap = |v: f64| (v * 1e12).round() / 1e12;
        return Ok((0..count).map(|k| if k + 1 == count { stop } else { snap(start + step * k as f64) }).collect());
    }
    text.split(',').map(parse_number).collect()
}

fn parse_number(text: &str) -> Result<f64> {
    let v: f64 = text.trim().parse().map_err(|_| validation(format!("`{text}` is not a number")))?;
    if !v.is_finite() {
        return Err(validation(format!("`{text}` is not finite")));
    }
    Ok(v)
}

/// `0,1;0,2,4` into cuts of an `n`-qubit system.
pub fn parse_partitions(text: &str, n: usize) -> Result<Vec<Bipartition>> {
    text.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let a = p
                .split(',')
                .map(|q| q.trim().parse::<usize>().map_err(|_| validation(format!("qubit index `{q}` in `{p}`"))))
                .collect::<Result<Vec<_>>>()?;
            Bipartition::new(n, &a)
        })
        .collect::<Result<Vec<_>>>()
        .and_then(|v| if v.is_empty() { Err(validation("partition list is empty")) } else { Ok(v) })
}

impl Common {
    pub fn schedule(&self) -> Result<AnnealSchedule<f64>> {
        match &self.schedule {
            Some(path) => AnnealSchedule::load_path(path),
            None => Ok(AnnealSchedule::synthetic()),
        }
    }

    pub fn instance(&self) -> Result<ProblemInstance<f64>> {
        match (&self.instance, &self.preset) {
            (Some(path), _) => ProblemInstance::from_json(std::fs::File::open(path)?),
            (None, Some(name)) => ProblemInstance::preset(name),
            (None, None) => Err(validation("give an instance with --preset fm2|fm8 or --instance FILE")),
        }
    }

    pub fn temperature(&self) -> Result<Temperature<f64>> {
        Temperature::from_millikelvin(self.temperature_mk)
    }

    pub fn ensemble(&self) -> Result<Ensemble<f64>> {
        let t = self.temperature()?;
        Ok(if self.ground { Ensemble::Ground } else { Ensemble::Thermal(t) })
    }
}
