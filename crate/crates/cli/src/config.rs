//! `key=value` config files. Each key is a long flag name; values use the
//! same syntax as on the command line. Precedence, highest first:
//! command line, `TMBENCH_*` environment variables, config file, defaults.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

pub const ENV_PREFIX: &str = "TMBENCH_";

/// Environment variable that overrides `key`.
pub fn env_name(key: &str) -> String {
    format!("{ENV_PREFIX}{}", key.replace('-', "_").to_uppercase())
}

pub fn parse(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("config line {}: expected key=value, got {line:?}", n + 1);
        };
        let key = k.trim().trim_start_matches("--");
        if key.is_empty() || key == "config" {
            bail!("config line {}: invalid key {k:?}", n + 1);
        }
        out.push((key.to_owned(), v.trim().to_owned()));
    }
    Ok(out)
}

/// Finds `--config PATH` or `--config=PATH` in raw arguments.
fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    std::env::var_os(env_name("config"))
}

/// Splices config-file settings in front of the user's arguments so that
/// explicit flags still win. Keys whose environment override is set are
/// skipped and left to the environment.
pub fn expand_args(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args[1..]) else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    let mut out = Vec::with_capacity(args.len() + 8);
    out.push(args[0].clone());
    for (key, value) in parse(&text)? {
        if std::env::var_os(env_name(&key)).is_some() {
            continue;
        }
        if value.is_empty() || value == "true" {
            out.push(format!("--{key}").into());
        } else if value == "false" {
            continue;
        } else {
            out.push(format!("--{key}={value}").into());
        }
    }
    out.extend(args.into_iter().skip(1));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_and_comments() {
        let kv = parse("# sweep\nclauses = 1000,2000\n\n--epochs=3\ninject-fault=true\n").unwrap();
        assert_eq!(
            kv,
            vec![
                ("clauses".into(), "1000,2000".into()),
                ("epochs".into(), "3".into()),
                ("inject-fault".into(), "true".into()),
            ]
        );
        assert!(parse("no equals sign").is_err());
        assert!(parse("config=other.conf").is_err());
    }

    #[test]
    fn env_names() {
        assert_eq!(env_name("T"), "TMBENCH_T");
        assert_eq!(env_name("test-dataset"), "TMBENCH_TEST_DATASET");
    }
}
