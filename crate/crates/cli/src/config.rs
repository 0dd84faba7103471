use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use fsit_core::grounding::{KernelConfig, NoiseConfig};
use fsit_core::model::ReificationMode;
use fsit_core::sit::SitParams;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Full,
    Simplified,
}

impl From<Mode> for ReificationMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Full => ReificationMode::Full,
            Mode::Simplified => ReificationMode::Simplified,
        }
    }
}

/// Options shared by every command. Each can also be set through the
/// environment variable named in its help.
#[derive(Debug, Clone, Args, Serialize)]
pub struct CliConfig {
    /// Fuzziness a in [0, 1] [default: 0.3, or the loaded memory's]
    #[arg(long, global = true, env = "FSIT_FUZZINESS")]
    pub fuzziness: Option<f64>,
    /// Membership threshold th_m in [0, 1]
    #[arg(long, global = true, env = "FSIT_TH_MEMBERSHIP", default_value_t = 0.6)]
    pub th_membership: f64,
    /// Similarity threshold th_s ≥ 0
    #[arg(long, global = true, env = "FSIT_TH_SIMILARITY", default_value_t = 0.5)]
    pub th_similarity: f64,
    /// Role-key reification [default: simplified, or the loaded memory's]
    #[arg(long, global = true, env = "FSIT_MODE", value_enum)]
    pub mode: Option<Mode>,
    /// Memory snapshot to read and update
    #[arg(long, global = true, env = "FSIT_MEMORY")]
    pub memory: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, env = "FSIT_OUT")]
    pub out: Option<PathBuf>,
    /// Seed for noise and synthetic scenes
    #[arg(long, global = true, env = "FSIT_SEED")]
    pub seed: Option<u64>,
    /// Grounding kernel configuration (JSON)
    #[arg(long, global = true, env = "FSIT_KERNEL")]
    pub kernel: Option<PathBuf>,
    /// Sensor noise configuration (JSON)
    #[arg(long, global = true, env = "FSIT_NOISE")]
    pub noise: Option<PathBuf>,
}

impl CliConfig {
    pub fn params(&self, fuzziness: f64) -> Result<SitParams> {
        Ok(SitParams::new(
            fuzziness,
            self.th_membership,
            self.th_similarity,
        )?)
    }

    /// Output directory, created if needed.
    pub fn out_dir(&self, default: &str) -> Result<PathBuf> {
        let dir = self.out.clone().unwrap_or_else(|| PathBuf::from(default));
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(dir)
    }

    pub fn kernel_config(&self) -> Result<Option<KernelConfig>> {
        let Some(path) = &self.kernel else {
            return Ok(None);
        };
        let cfg: KernelConfig = read_json(path)?;
        cfg.validate()
            .with_context(|| format!("in {}", path.display()))?;
        Ok(Some(cfg))
    }

    pub fn noise_config(&self) -> Result<Option<NoiseConfig>> {
        let Some(path) = &self.noise else {
            return Ok(None);
        };
        let cfg: NoiseConfig = read_json(path)?;
        cfg.validate()
            .with_context(|| format!("in {}", path.display()))?;
        Ok(Some(cfg))
    }

    pub fn check(&self) -> Result<()> {
        if let Some(a) = self.fuzziness {
            if !(0.0..=1.0).contains(&a) {
                bail!("--fuzziness must lie in [0, 1], got {a}");
            }
        }
        self.params(self.fuzziness.unwrap_or(0.3))?;
        Ok(())
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    fsit_core::io::from_json(&text).with_context(|| format!("in {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Writes the effective configuration of a run next to its outputs.
pub fn echo<T: Serialize>(dir: &Path, command: &str, config: &CliConfig, extra: &T) -> Result<()> {
    #[derive(Serialize)]
    struct Echo<'a, T> {
        command: &'a str,
        config: &'a CliConfig,
        #[serde(flatten)]
        extra: &'a T,
    }
    write_json(
        &dir.join("config.json"),
        &Echo {
            command,
            config,
            extra,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    #[derive(Parser)]
    struct Wrapper {
        #[command(flatten)]
        config: CliConfig,
    }

    fn parse(args: &[&str]) -> CliConfig {
        Wrapper::try_parse_from(std::iter::once("fsit").chain(args.iter().copied()))
            .unwrap()
            .config
    }

    #[test]
    fn defaults_match_the_loop_constants() {
        let cfg = parse(&[]);
        let params = cfg.params(0.3).unwrap();
        assert_eq!(params, SitParams::default());
        assert!(cfg.mode.is_none());
    }

    #[test]
    fn ranges_are_checked() {
        assert!(parse(&["--fuzziness", "1.2"]).check().is_err());
        assert!(parse(&["--th-membership", "1.2"]).check().is_err());
        assert!(parse(&["--th-similarity=-0.1"]).check().is_err());
        assert!(parse(&["--th-similarity", "1.4", "--mode", "full"])
            .check()
            .is_ok());
    }
}
