//! Flag and config-file handling: flat `key = value` config files, with
//! command-line flags taking precedence.

use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Debug, Clone, Default)]
pub struct Opts {
    map: BTreeMap<String, String>,
}

pub struct Parsed {
    pub command: String,
    pub opts: Opts,
}

impl Opts {
    /// Parse `subcommand --key value --key2 value2 ...`; a `--config FILE`
    /// flag merges the file's entries underneath the explicit flags.
    pub fn parse(args: &[String]) -> Result<Parsed, String> {
        if args.is_empty() {
            return Err("missing subcommand".into());
        }
        let command = args[0].clone();
        if command.starts_with('-') {
            return Err(format!("expected a subcommand, got flag {command}"));
        }
        let mut flags = BTreeMap::new();
        let mut i = 1;
        while i < args.len() {
            let key = args[i]
                .strip_prefix("--")
                .ok_or_else(|| format!("expected --flag, got {}", args[i]))?;
            if key.is_empty() {
                return Err("empty flag name".into());
            }
            let value = if i + 1 < args.len() && !args[i + 1].starts_with("--") {
                i += 1;
                args[i].clone()
            } else {
                "true".to_string()
            };
            flags.insert(key.to_string(), value);
            i += 1;
        }
        let mut map = BTreeMap::new();
        if let Some(path) = flags.get("config") {
            for (k, v) in read_config(path)? {
                map.insert(k, v);
            }
        }
        // flags override the file
        for (k, v) in flags {
            map.insert(k, v);
        }
        Ok(Parsed {
            command,
            opts: Opts { map },
        })
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.map
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.map.get(key).map(|s| s.as_str()).unwrap_or(default)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, String> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| format!("--{key}: bad number {v}")),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, String> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| format!("--{key}: bad integer {v}")),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, String> {
        self.u64_or(key, default as u64).map(|v| v as usize)
    }

    pub fn flag(&self, key: &str) -> bool {
        matches!(self.map.get(key).map(|s| s.as_str()), Some("true") | Some("1"))
    }

    pub fn usize_list_or(&self, key: &str, default: &[usize]) -> Result<Vec<usize>, String> {
        match self.map.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<usize>()
                        .map_err(|_| format!("--{key}: bad list entry {tok}"))
                })
                .collect(),
        }
    }

    /// Output directory: `--out`, then the environment default, then
    /// `./lgle-out`.
    pub fn out_dir(&self) -> PathBuf {
        if let Some(dir) = self.map.get("out") {
            return PathBuf::from(dir);
        }
        if let Ok(dir) = std::env::var("LGLE_OUT_DIR") {
            if !dir.is_empty() {
                return PathBuf::from(dir);
            }
        }
        PathBuf::from("lgle-out")
    }
}

fn read_config(path: &str) -> Result<Vec<(String, String)>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("config {path}: {e}"))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config {path}:{}: expected key = value", lineno + 1))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}
