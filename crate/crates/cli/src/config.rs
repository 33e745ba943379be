//! Command-line schema and run-configuration resolution.
//!
//! Every tunable value may come from a flag, from a `key=value` config file,
//! or from the built-in default, in that order of precedence.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};

use crate::CliError;

#[derive(Parser, Debug, Clone)]
#[command(name = "dymforge", version, about = "Harry Dym hierarchy, HD-KP currents and Central System")]
pub struct Cli {
    /// Truncation order N.
    #[arg(short = 'N', long, global = true)]
    pub order: Option<usize>,
    /// Family size M (number of currents).
    #[arg(short = 'M', long, global = true)]
    pub family: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized spot checks and random initial states.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// `key=value` file with defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Riccati coefficients and the bi-Hamiltonian ladder up to ladder order N.
    Hierarchy,
    /// Currents K^(2)..K^(lmax) in the Faà di Bruno basis.
    Currents {
        #[arg(long)]
        lmax: Option<usize>,
        #[arg(long, value_enum)]
        mode: Option<CurrentMode>,
    },
    /// Central System flows, symbolic or integrated numerically.
    Central {
        /// Flow index j of t_j.
        #[arg(long)]
        flow: Option<usize>,
        /// Integrate numerically instead of printing the symbolic right-hand sides.
        #[arg(long)]
        numeric: bool,
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long, value_enum)]
        init: Option<CentralInit>,
    },
    /// Pseudo-spectral integration of the HD equation with conservation monitors.
    Simulate {
        /// Grid points.
        #[arg(long)]
        n: Option<usize>,
        /// Time step; defaults to the stability rule.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        /// Final time, used when `--steps` is absent.
        #[arg(long)]
        t_end: Option<f64>,
        /// `u0 = 1 + amplitude sin x`.
        #[arg(long)]
        amplitude: Option<f64>,
        /// Number of monitored functionals (u^(1/2), 2k1, 2k3, ...).
        #[arg(long)]
        monitors: Option<usize>,
        #[arg(long)]
        sample_every: Option<usize>,
        /// Evolve u directly or q = u - 1 in the classical normalization.
        #[arg(long, value_enum)]
        form: Option<SimForm>,
    },
    /// Run named identity suites.
    Verify {
        #[arg(long, value_enum)]
        suite: Option<Suite>,
    },
}

macro_rules! value_enum_fromstr {
    ($t:ty) => {
        impl FromStr for $t {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                <$t as ValueEnum>::from_str(s, true)
            }
        }
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let v = self.to_possible_value().expect("no skipped variants");
                f.write_str(v.get_name())
            }
        }
    };
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Latex,
    Csv,
}
value_enum_fromstr!(Format);

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurrentMode {
    /// Generic series with independent coefficients.
    Free,
    /// Riccati solution written through u = k_m1^2.
    Constrained,
    /// k = z.
    Trivial,
}
value_enum_fromstr!(CurrentMode);

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CentralInit {
    /// K^(1) = z, K^(i) = z^i.
    Trivial,
    /// Currents of the Riccati solution at a fixed jet of k_m1.
    Riccati,
    /// Seeded uniform coefficients in [-0.2, 0.2] around the trivial state.
    Random,
}
value_enum_fromstr!(CentralInit);

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimForm {
    U,
    Q,
}
value_enum_fromstr!(SimForm);

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Riccati,
    Lenard,
    Casimir,
    Factorization,
    Currents,
    CentralEquivalence,
    Commutativity,
    Spatialization,
    ConservationNumeric,
    All,
}
value_enum_fromstr!(Suite);

impl Suite {
    pub fn expand(self) -> Vec<Suite> {
        use Suite::*;
        match self {
            All => vec![
                Riccati,
                Lenard,
                Casimir,
                Factorization,
                Currents,
                CentralEquivalence,
                Commutativity,
                Spatialization,
                ConservationNumeric,
            ],
            s => vec![s],
        }
    }
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Resolved,
    pub order: usize,
    pub family: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub seed: u64,
    /// Upper bound on `--order` for `hierarchy`.
    pub cap: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Resolved {
    Hierarchy,
    Currents {
        lmax: usize,
        mode: CurrentMode,
    },
    Central {
        flow: usize,
        numeric: bool,
        duration: f64,
        step: f64,
        init: CentralInit,
    },
    Simulate {
        n: usize,
        dt: Option<f64>,
        steps: Option<usize>,
        t_end: f64,
        amplitude: f64,
        monitors: usize,
        sample_every: Option<usize>,
        form: SimForm,
    },
    Verify {
        suite: Suite,
    },
}

const KEYS: &[&str] = &[
    "order", "family", "format", "out", "seed", "cap", "lmax", "mode", "flow", "numeric",
    "duration", "step", "init", "n", "dt", "steps", "t_end", "amplitude", "monitors",
    "sample_every", "form", "suite",
];

/// Parses a `key=value` file; blank lines and `#` comments are skipped.
pub fn parse_config(src: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (no, line) in src.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", no + 1)))?;
        let k = k.trim().replace('-', "_");
        if !KEYS.contains(&k.as_str()) {
            return Err(CliError::Usage(format!("config line {}: unknown key {k}", no + 1)));
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

struct Layer<'a> {
    file: &'a BTreeMap<String, String>,
}

impl Layer<'_> {
    fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key {key}: {e}"))),
        }
    }

    fn or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: fmt::Display,
    {
        Ok(self.get(flag, key)?.unwrap_or(default))
    }
}

impl RunConfig {
    pub fn resolve(cli: &Cli) -> Result<Self, CliError> {
        let file = match &cli.config {
            Some(p) => parse_config(&read_config(p)?)?,
            None => BTreeMap::new(),
        };
        Self::resolve_with(cli, &file)
    }

    pub fn resolve_with(cli: &Cli, file: &BTreeMap<String, String>) -> Result<Self, CliError> {
        let l = Layer { file };
        let command = match &cli.command {
            Command::Hierarchy => Resolved::Hierarchy,
            Command::Currents { lmax, mode } => Resolved::Currents {
                lmax: l.or(*lmax, "lmax", 4)?,
                mode: l.or(*mode, "mode", CurrentMode::Free)?,
            },
            Command::Central {
                flow,
                numeric,
                duration,
                step,
                init,
            } => Resolved::Central {
                flow: l.or(*flow, "flow", 2)?,
                numeric: *numeric || l.or(None, "numeric", false)?,
                duration: l.or(*duration, "duration", 1.0)?,
                step: l.or(*step, "step", 0.01)?,
                init: l.or(*init, "init", CentralInit::Riccati)?,
            },
            Command::Simulate {
                n,
                dt,
                steps,
                t_end,
                amplitude,
                monitors,
                sample_every,
                form,
            } => Resolved::Simulate {
                n: l.or(*n, "n", 128)?,
                dt: l.get(*dt, "dt")?,
                steps: l.get(*steps, "steps")?,
                t_end: l.or(*t_end, "t_end", 1e-2)?,
                amplitude: l.or(*amplitude, "amplitude", 0.1)?,
                monitors: l.or(*monitors, "monitors", 3)?,
                sample_every: l.get(*sample_every, "sample_every")?,
                form: l.or(*form, "form", SimForm::U)?,
            },
            Command::Verify { suite } => Resolved::Verify {
                suite: l.or(*suite, "suite", Suite::All)?,
            },
        };
        let default_format = match command {
            Resolved::Central { numeric: true, .. } | Resolved::Simulate { .. } => Format::Csv,
            _ => Format::Text,
        };
        let cfg = RunConfig {
            order: l.or(cli.order, "order", 4)?,
            family: l.or(cli.family, "family", 6)?,
            format: l.or(cli.format, "format", default_format)?,
            out: l.get(cli.out.clone(), "out")?,
            seed: l.or(cli.seed, "seed", 0)?,
            cap: l.or(None, "cap", 12)?,
            command,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        use Format::*;
        let bad = |m: String| Err(CliError::Usage(m));
        let allowed: &[Format] = match &self.command {
            Resolved::Hierarchy | Resolved::Currents { .. } => &[Text, Json, Latex],
            Resolved::Central { numeric: false, .. } => &[Text, Json, Latex],
            Resolved::Central { numeric: true, .. } | Resolved::Simulate { .. } => &[Text, Json, Csv],
            Resolved::Verify { .. } => &[Text, Json],
        };
        if !allowed.contains(&self.format) {
            return bad(format!("format {} is not available for this command", self.format));
        }
        match &self.command {
            Resolved::Hierarchy if self.order > self.cap => {
                bad(format!("order {} exceeds the cap {}", self.order, self.cap))
            }
            Resolved::Currents { lmax, .. } if *lmax < 2 => bad("lmax must be at least 2".into()),
            Resolved::Central { flow, .. } if *flow == 0 || *flow >= self.family => bad(format!(
                "flow t_{flow} needs 1 <= j < M = {}",
                self.family
            )),
            Resolved::Central { step, duration, .. } if !(*step > 0.0) || !(*duration >= 0.0) => {
                bad("step must be positive and duration non-negative".into())
            }
            Resolved::Simulate { n, .. } if *n < 8 => bad("n must be at least 8".into()),
            Resolved::Simulate { dt: Some(dt), .. } if !(*dt > 0.0) => bad("dt must be positive".into()),
            Resolved::Simulate { amplitude, .. } if !(amplitude.abs() < 1.0) => {
                bad("amplitude must lie in (-1, 1) to keep u positive".into())
            }
            _ if self.family < 2 => bad("family size must be at least 2".into()),
            _ => Ok(()),
        }
    }
}

fn read_config(p: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(p)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))
}
