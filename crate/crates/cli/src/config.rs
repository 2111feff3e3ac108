//! Experiment configuration: command-line flags layered over an INI file.
//!
//! Precedence is flag, then the `[command]` section of the file, then its
//! top-level keys, then the built-in default.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;
use qmap_cones::cones::{BodySpec, ConeId, Slice};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Largest body dimension the volume estimator accepts.
pub const VOLUME_DIM_CEILING: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Membership,
    Volume,
    Width,
    Duality,
    Radii,
    Tables,
    Tni,
    NoDuality,
    SectionBounds,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Membership => "membership",
            Command::Volume => "volume",
            Command::Width => "width",
            Command::Duality => "duality",
            Command::Radii => "radii",
            Command::Tables => "tables",
            Command::Tni => "tni",
            Command::NoDuality => "no-duality",
            Command::SectionBounds => "section-bounds",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Bases,
    Tp,
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "bases" | "base" => Ok(Suite::Bases),
            "tp" => Ok(Suite::Tp),
            _ => Err(format!("unknown suite '{s}' (expected bases or tp)")),
        }
    }
}

/// Explicit inputs for `section-bounds`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SectionInputs {
    pub vrad: Option<f64>,
    pub r: Option<f64>,
    pub big_r: Option<f64>,
    pub m: Option<usize>,
    pub k: Option<usize>,
    /// A section volume radius to test against the bounds.
    pub check: Option<f64>,
}

/// Everything that determines a report. Output locations are excluded from
/// the cache key.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub n: usize,
    pub cone: ConeId,
    pub slice: Slice,
    pub seed: u64,
    pub chains: usize,
    /// Kept samples per chain and annealing phase.
    pub steps: usize,
    pub dirs: usize,
    pub probes: usize,
    pub pairs: usize,
    pub suite: Suite,
    pub run_missing: bool,
    /// SHA-256 of the membership input file.
    pub input_sha256: Option<String>,
    pub section: SectionInputs,
    #[serde(skip)]
    pub input: Option<PathBuf>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub json: bool,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Flag values as parsed; `None` means "not given".
#[derive(Clone, Debug, Default)]
pub struct Flags {
    pub n: Option<usize>,
    pub cone: Option<String>,
    pub slice: Option<String>,
    pub seed: Option<u64>,
    pub chains: Option<usize>,
    pub steps: Option<usize>,
    pub dirs: Option<usize>,
    pub probes: Option<usize>,
    pub pairs: Option<usize>,
    pub suite: Option<Suite>,
    pub run_missing: bool,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub json: bool,
    pub section: SectionInputs,
}

/// Key/value pairs from the config file that apply to one command.
#[derive(Clone, Debug, Default)]
pub struct FileLayer {
    values: HashMap<String, String>,
}

impl FileLayer {
    pub fn load(path: &Path, command: Command) -> Result<Self, ConfigError> {
        let ini = Ini::load_from_file(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        Ok(Self::from_ini(&ini, command))
    }

    #[cfg(test)]
    pub fn parse(text: &str, command: Command) -> Result<Self, ConfigError> {
        let ini = Ini::load_from_str(text).map_err(|e| ConfigError(format!("config: {e}")))?;
        Ok(Self::from_ini(&ini, command))
    }

    fn from_ini(ini: &Ini, command: Command) -> Self {
        let mut values = HashMap::new();
        let norm = |k: &str| k.trim().to_ascii_lowercase().replace('_', "-");
        for (k, v) in ini.general_section().iter() {
            values.insert(norm(k), v.trim().to_string());
        }
        if let Some(sec) = ini.section(Some(command.name())) {
            for (k, v) in sec.iter() {
                values.insert(norm(k), v.trim().to_string());
            }
        }
        Self { values }
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| ConfigError(format!("config key '{key}' = '{v}': {e}"))),
        }
    }

    fn flag(&self, key: &str) -> Result<bool, ConfigError> {
        match self.values.get(key).map(|v| v.to_ascii_lowercase()) {
            None => Ok(false),
            Some(v) if matches!(v.as_str(), "1" | "true" | "yes" | "on") => Ok(true),
            Some(v) if matches!(v.as_str(), "0" | "false" | "no" | "off") => Ok(false),
            Some(v) => err(format!("config key '{key}' = '{v}' is not a boolean")),
        }
    }
}

fn pick<T: FromStr>(
    flag: Option<T>,
    file: &FileLayer,
    key: &str,
    default: T,
) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    Ok(match flag {
        Some(v) => v,
        None => file.get(key)?.unwrap_or(default),
    })
}

fn parse_cone(s: &str) -> Result<ConeId, ConfigError> {
    s.parse().map_err(|e| ConfigError(format!("{e}")))
}

fn parse_slice(s: &str) -> Result<Slice, ConfigError> {
    s.parse().map_err(|e| ConfigError(format!("{e}")))
}

impl ExperimentConfig {
    pub fn resolve(command: Command, flags: Flags, file: &FileLayer) -> Result<Self, ConfigError> {
        let default_slice = match command {
            Command::Membership => "cone",
            Command::Tni => "tni",
            Command::SectionBounds => "tp",
            _ => "base",
        };
        let default_probes = match command {
            Command::NoDuality => 10_000,
            _ => 1000,
        };
        let cone = parse_cone(&pick(flags.cone, file, "cone", "CP".to_string())?)?;
        let slice = parse_slice(&pick(
            flags.slice,
            file,
            "slice",
            default_slice.to_string(),
        )?)?;
        let input = flags.input.or(file.get("input")?);
        let out = flags.out.or(file.get("out")?);
        let section = SectionInputs {
            vrad: flags.section.vrad.or(file.get("vrad")?),
            r: flags.section.r.or(file.get("r")?),
            big_r: flags.section.big_r.or(file.get("big-r")?),
            m: flags.section.m.or(file.get("m")?),
            k: flags.section.k.or(file.get("k")?),
            check: flags.section.check.or(file.get("check")?),
        };
        let cfg = Self {
            command,
            n: pick(flags.n, file, "n", 2)?,
            cone,
            slice,
            seed: pick(flags.seed, file, "seed", 1)?,
            chains: pick(flags.chains, file, "chains", 8)?,
            steps: pick(flags.steps, file, "steps", 1000)?,
            dirs: pick(flags.dirs, file, "dirs", 10_000)?,
            probes: pick(flags.probes, file, "probes", default_probes)?,
            pairs: pick(flags.pairs, file, "pairs", 100_000)?,
            suite: pick(flags.suite, file, "suite", Suite::Bases)?,
            run_missing: flags.run_missing || file.flag("run-missing")?,
            input_sha256: None,
            section,
            input,
            out,
            json: flags.json || file.flag("json")?,
        };
        cfg.validate()?;
        cfg.with_input_hash()
    }

    fn with_input_hash(mut self) -> Result<Self, ConfigError> {
        if let Some(p) = &self.input {
            let bytes = std::fs::read(p)
                .map_err(|e| ConfigError(format!("cannot read input {}: {e}", p.display())))?;
            self.input_sha256 = Some(hex::encode(Sha256::digest(&bytes)));
        }
        Ok(self)
    }

    pub fn body(&self) -> Result<BodySpec, ConfigError> {
        BodySpec::new(self.cone, self.n, self.slice).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n < 2 {
            return err(format!("--n must be at least 2, got {}", self.n));
        }
        if self.chains < 2 {
            return err("--chains must be at least 2 (the error bar is between chains)");
        }
        if self.steps == 0 || self.dirs == 0 || self.probes == 0 || self.pairs == 0 {
            return err("sample budgets must be positive");
        }
        match self.command {
            Command::Membership => {
                if self.input.is_none() {
                    return err("membership needs --input <choi.json>");
                }
            }
            Command::Volume => {
                if self.slice == Slice::Cone {
                    return err("a cone is unbounded; pick --slice base, tp, tni, sym or sympolar");
                }
                let dim = self.body()?.dimension();
                if dim > VOLUME_DIM_CEILING {
                    return err(format!(
                        "volume of {} refused: dimension {dim} exceeds the desk-scale ceiling of {VOLUME_DIM_CEILING}",
                        self.body()?.label()
                    ));
                }
            }
            Command::Width => {
                if !matches!(self.slice, Slice::Base | Slice::Sym) {
                    return err("width is available for --slice base and sym");
                }
                self.body()?;
            }
            Command::Duality => {
                if self.slice != Slice::Base {
                    return err("duality pairs are drawn from bases; use --slice base");
                }
            }
            Command::Radii => {
                if !matches!(self.slice, Slice::Base | Slice::TP) {
                    return err("radii are checked for --slice base and tp");
                }
                self.body()?;
            }
            Command::Tni => {
                if self.n != 2 {
                    return err(format!(
                        "tni runs at N=2 only (dimensions 16/12/4); N={} exceeds the ceiling",
                        self.n
                    ));
                }
            }
            Command::SectionBounds => {
                let s = &self.section;
                let explicit = [
                    s.vrad.is_some(),
                    s.r.is_some(),
                    s.big_r.is_some(),
                    s.m.is_some(),
                    s.k.is_some(),
                ];
                if explicit.iter().any(|&b| b) && !explicit.iter().all(|&b| b) {
                    return err(
                        "section-bounds needs all of --vrad, --r, --big-r, --m, --k, or none",
                    );
                }
                if !explicit[0] && !(self.cone == ConeId::CP && self.slice == Slice::TP) {
                    return err("without explicit inputs, section-bounds covers the CP trace-preserving section only");
                }
            }
            Command::Tables | Command::NoDuality => {}
        }
        Ok(())
    }

    /// Content address: SHA-256 over the tool version and the canonical JSON.
    pub fn cache_key(&self) -> String {
        let body = serde_json::to_string(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(env!("CARGO_PKG_VERSION").as_bytes());
        h.update([0]);
        h.update(body.as_bytes());
        hex::encode(h.finalize())
    }

    /// A copy for another command sharing body, seed and budgets.
    pub fn derived(&self, command: Command, cone: ConeId, slice: Slice) -> Self {
        Self {
            command,
            cone,
            slice,
            run_missing: false,
            suite: Suite::Bases,
            input: None,
            input_sha256: None,
            section: SectionInputs::default(),
            out: None,
            json: false,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(cmd: Command, flags: Flags, ini: &str) -> Result<ExperimentConfig, ConfigError> {
        ExperimentConfig::resolve(cmd, flags, &FileLayer::parse(ini, cmd).unwrap())
    }

    #[test]
    fn flags_win_over_file_and_sections_over_globals() {
        let ini = "seed = 5\nsteps = 20\n[volume]\nsteps = 30\nchains = 4\n";
        let flags = Flags {
            seed: Some(9),
            ..Flags::default()
        };
        let c = resolve(Command::Volume, flags, ini).unwrap();
        assert_eq!((c.seed, c.steps, c.chains), (9, 30, 4));
        let c = resolve(Command::Duality, Flags::default(), ini).unwrap();
        assert_eq!((c.seed, c.steps, c.chains), (5, 20, 8));
    }

    #[test]
    fn bad_values_are_config_errors() {
        assert!(resolve(Command::Volume, Flags::default(), "n = two\n").is_err());
        assert!(resolve(Command::Volume, Flags::default(), "cone = XY\n").is_err());
        assert!(resolve(Command::Volume, Flags::default(), "json = maybe\n").is_err());
    }

    #[test]
    fn volume_ceiling_cites_dimension() {
        let flags = Flags {
            n: Some(3),
            ..Flags::default()
        };
        let e = resolve(Command::Volume, flags, "").unwrap_err();
        assert!(e.0.contains("dimension 80"), "{e}");
    }

    #[test]
    fn cache_key_ignores_outputs() {
        let a = resolve(Command::Radii, Flags::default(), "").unwrap();
        let mut b = a.clone();
        b.out = Some("elsewhere".into());
        b.json = true;
        assert_eq!(a.cache_key(), b.cache_key());
        b.seed += 1;
        assert_ne!(a.cache_key(), b.cache_key());
    }
}
