//! Declarative configuration files.
//!
//! A TOML file mirrors the command-line flags: top-level keys apply to
//! every subcommand that has a flag of that name, and a table named after a
//! subcommand applies to it alone. Keys use the long flag name with either
//! `-` or `_`. Values from the file are placed before the command-line
//! arguments, so flags given on the command line win.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::CommandFactory;

/// Finds `--config <path>` or `--config=<path>` in raw arguments.
pub fn config_path(args: &[String]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

fn flag_value(key: &str, value: &toml::Value) -> Result<Vec<String>> {
    let scalar = |v: &toml::Value| -> Result<String> {
        Ok(match v {
            toml::Value::String(s) => s.clone(),
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => f.to_string(),
            toml::Value::Boolean(b) => b.to_string(),
            other => bail!("config key `{key}`: unsupported value {other}"),
        })
    };
    let flag = format!("--{}", key.replace('_', "-"));
    Ok(match value {
        toml::Value::Boolean(true) => vec![flag],
        toml::Value::Boolean(false) => vec![],
        toml::Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(scalar).collect::<Result<_>>()?;
            vec![flag, parts.join(",")]
        }
        v => vec![flag, scalar(v)?],
    })
}

/// Rewrites `args` so the config file's flags precede the user's flags of
/// the chosen subcommand.
pub fn apply<C: CommandFactory>(args: Vec<String>, path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    let table: toml::Table =
        toml::from_str(&text).with_context(|| format!("parsing config file {}", path.display()))?;

    let command = C::command();
    let subcommands: Vec<String> = command
        .get_subcommands()
        .map(|s| s.get_name().to_string())
        .collect();
    let Some(pos) = args.iter().position(|a| subcommands.contains(a)) else {
        return Ok(args);
    };
    let name = &args[pos];
    let sub = command.find_subcommand(name).expect("listed subcommand");
    let longs: Vec<String> = sub
        .get_arguments()
        .chain(command.get_arguments())
        .filter_map(|a| a.get_long().map(str::to_string))
        .collect();
    let known = |key: &str| longs.iter().any(|l| *l == key.replace('_', "-"));

    let mut injected = Vec::new();
    for (key, value) in &table {
        match value {
            toml::Value::Table(_) if subcommands.contains(&key.replace('_', "-")) => {}
            _ if key == "config" => bail!("config file {}: `config` cannot be nested", path.display()),
            _ if known(key) => injected.extend(flag_value(key, value)?),
            _ if subcommands
                .iter()
                .filter_map(|s| command.find_subcommand(s))
                .any(|s| s.get_arguments().any(|a| a.get_long() == Some(&key.replace('_', "-")))) => {}
            _ => bail!("config file {}: unknown key `{key}`", path.display()),
        }
    }
    if let Some(section) = table.get(name.as_str()).or_else(|| table.get(&name.replace('-', "_"))) {
        let toml::Value::Table(section) = section else {
            bail!("config file {}: `{name}` must be a table", path.display());
        };
        for (key, value) in section {
            if !known(key) {
                bail!("config file {}: `{name}` has no flag `--{}`", path.display(), key.replace('_', "-"));
            }
            injected.extend(flag_value(key, value)?);
        }
    }

    let mut out: Vec<String> = args[..=pos].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}
