// SPDX-License-Identifier: Apache-2.0

//! `key = value` configuration file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    pub library: Option<PathBuf>,
    pub ppa_model: Option<PathBuf>,
    pub fsa_model: Option<PathBuf>,
    /// Command and arguments; the CNF path is appended.
    pub external_solver: Option<Vec<String>>,
    pub budget_secs: Option<f64>,
}

impl Config {
    /// Blank lines and `#` comments are ignored; relative paths resolve
    /// against the file's directory.
    pub fn parse(text: &str, base: &Path) -> Result<Config> {
        let mut c = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("line {}: expected `key = value`", i + 1);
            };
            let (k, v) = (k.trim(), v.trim());
            let path = || base.join(v);
            match k {
                "library" => c.library = Some(path()),
                "ppa_model" => c.ppa_model = Some(path()),
                "fsa_model" => c.fsa_model = Some(path()),
                "external_solver" => c.external_solver = Some(v.split_whitespace().map(String::from).collect()),
                "budget_secs" => {
                    c.budget_secs = Some(v.parse().with_context(|| format!("line {}: bad budget `{v}`", i + 1))?)
                }
                _ => bail!("line {}: unknown key `{k}`", i + 1),
            }
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Config::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_and_comments() {
        let c = Config::parse(
            "# models\nlibrary = lib\nppa_model=m/ppa.txt  # trained\nexternal_solver = kissat -q\nbudget_secs = 12.5\n",
            Path::new("/base"),
        )
        .unwrap();
        assert_eq!(c.library, Some(PathBuf::from("/base/lib")));
        assert_eq!(c.ppa_model, Some(PathBuf::from("/base/m/ppa.txt")));
        assert_eq!(c.external_solver, Some(vec!["kissat".into(), "-q".into()]));
        assert_eq!(c.budget_secs, Some(12.5));
        assert_eq!(c.fsa_model, None);
    }

    #[test]
    fn errors() {
        assert!(Config::parse("library\n", Path::new(".")).is_err());
        assert!(Config::parse("colour = red\n", Path::new(".")).is_err());
        assert!(Config::parse("budget_secs = soon\n", Path::new(".")).is_err());
    }
}
