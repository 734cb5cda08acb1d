//! Flat `key = value` configuration files.
//!
//! Each key names a long flag of the subcommand (`dt-max` or `dt_max`), and
//! the pairs are turned into arguments placed before the ones typed on the
//! command line, so typed flags win.

use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{line}: expected `key = value`")]
    Syntax { path: String, line: usize },
}

/// Parses the file into ordered `(key, value)` pairs. `#` starts a comment.
pub fn parse(text: &str, path: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { path: path.into(), line: k + 1 })?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            return Err(ConfigError::Syntax { path: path.into(), line: k + 1 });
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<Vec<(String, String)>, ConfigError> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: name.clone(), source })?;
    parse(&text, &name)
}

/// The pairs as command-line arguments. `true` turns into a bare flag and
/// `false` into nothing.
pub fn to_args(pairs: &[(String, String)]) -> Vec<String> {
    let mut out = Vec::new();
    for (k, v) in pairs {
        match v.as_str() {
            "true" => out.push(format!("--{k}")),
            "false" => {}
            _ => {
                out.push(format!("--{k}"));
                out.push(v.clone());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_and_comments() {
        let p = parse("# header\nseed = 7\ndt_max=1e-3  # trailing\n\noracle = true\n", "x").unwrap();
        assert_eq!(p, vec![("seed".into(), "7".into()), ("dt-max".into(), "1e-3".into()), ("oracle".into(), "true".into())]);
        assert_eq!(to_args(&p), ["--seed", "7", "--dt-max", "1e-3", "--oracle"]);
        assert!(parse("seed 7", "x").is_err());
    }
}
