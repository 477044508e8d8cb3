//! Flag and config-file resolution. Flags win over `key=value` lines from
//! `--config`; every value a command reads is recorded for the output header.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use clap::Args;

pub const DEFAULT_SEED: u64 = 0xC2AD;

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Stability index of the step law, in (1, 2).
    #[arg(long, global = true)]
    pub q: Option<f64>,
    /// Exponent of the target Lp space.
    #[arg(long, global = true)]
    pub p: Option<f64>,
    /// Lattice dimension.
    #[arg(long, global = true)]
    pub d: Option<usize>,
    /// Snowflake or tube exponent.
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Decay exponent of the cube embedding.
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Single size or step count.
    #[arg(long, global = true)]
    pub n: Option<u64>,
    /// Comma-separated sizes; entries may be integers, `2^k` or `2^a..2^b`.
    #[arg(long = "n-list", global = true)]
    pub n_list: Option<String>,
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    #[arg(long = "k-max", global = true)]
    pub k_max: Option<u32>,
    /// Master seed, decimal or 0x-prefixed hex [default: 0xC2AD].
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Walk for drift and beta: simple, stable, canonical8, wreath-stable, zero-section.
    #[arg(long, global = true)]
    pub walk: Option<String>,
    /// Embedding for envelope: identity, snowflake, composite.
    #[arg(long, global = true)]
    pub embedding: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<String>,
    /// csv or json.
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true, env = "WREATHLAB_THREADS")]
    pub threads: Option<usize>,
    /// File of `key=value` lines supplying defaults for the flags above.
    #[arg(long, global = true)]
    pub config: Option<String>,
}

#[derive(Debug)]
pub struct UsageError(pub String);

impl Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

const KEYS: [&str; 15] = [
    "q", "p", "d", "eps", "gamma", "n", "n-list", "trials", "k-max", "seed", "walk", "embedding", "out", "format", "threads",
];

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| UsageError(format!("config line {}: expected key=value", i + 1)))?;
        let k = k.trim().replace('_', "-");
        if !KEYS.contains(&k.as_str()) {
            return Err(UsageError(format!("config line {}: unknown key '{k}'", i + 1)));
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

/// Resolved settings: explicit flags first, then the config file.
pub struct Settings {
    values: BTreeMap<String, String>,
    used: BTreeMap<String, String>,
}

impl Settings {
    pub fn new(flags: &Flags) -> Result<Self, UsageError> {
        let mut values = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read config {path}: {e}")))?;
                parse_config(&text)?
            }
            None => BTreeMap::new(),
        };
        let mut set = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                values.insert(k.to_string(), v);
            }
        };
        set("q", flags.q.map(|v| v.to_string()));
        set("p", flags.p.map(|v| v.to_string()));
        set("d", flags.d.map(|v| v.to_string()));
        set("eps", flags.eps.map(|v| v.to_string()));
        set("gamma", flags.gamma.map(|v| v.to_string()));
        set("n", flags.n.map(|v| v.to_string()));
        set("n-list", flags.n_list.clone());
        set("trials", flags.trials.map(|v| v.to_string()));
        set("k-max", flags.k_max.map(|v| v.to_string()));
        set("seed", flags.seed.clone());
        set("walk", flags.walk.clone());
        set("embedding", flags.embedding.clone());
        set("out", flags.out.clone());
        set("format", flags.format.clone());
        set("threads", flags.threads.map(|v| v.to_string()));
        Ok(Settings {
            values,
            used: BTreeMap::new(),
        })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Value of `key`, or `default`, recorded as a run parameter.
    pub fn get<T>(&mut self, key: &str, default: T) -> Result<T, UsageError>
    where
        T: FromStr + Display,
    {
        let v = match self.raw(key) {
            Some(s) => s.parse().map_err(|_| UsageError(format!("--{key}: cannot parse '{s}'")))?,
            None => default,
        };
        self.used.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    /// Value of `key` if set, recorded only when present.
    pub fn opt<T>(&mut self, key: &str) -> Result<Option<T>, UsageError>
    where
        T: FromStr + Display,
    {
        let Some(s) = self.raw(key) else {
            return Ok(None);
        };
        let v: T = s.parse().map_err(|_| UsageError(format!("--{key}: cannot parse '{s}'")))?;
        self.used.insert(key.to_string(), v.to_string());
        Ok(Some(v))
    }

    pub fn seed(&mut self) -> Result<u64, UsageError> {
        let seed = match self.raw("seed") {
            Some(s) => parse_seed(s)?,
            None => DEFAULT_SEED,
        };
        self.used.insert("seed".into(), seed.to_string());
        Ok(seed)
    }

    pub fn n_list(&mut self, default: &str) -> Result<Vec<u64>, UsageError> {
        let text = self.raw("n-list").unwrap_or(default).to_string();
        let list = parse_n_list(&text)?;
        self.used.insert("n-list".into(), list.iter().map(u64::to_string).collect::<Vec<_>>().join(","));
        Ok(list)
    }

    /// Output settings are not run parameters and stay out of the header.
    pub fn output(&self) -> (Option<String>, String) {
        (self.raw("out").map(String::from), self.raw("format").unwrap_or("csv").to_string())
    }

    pub fn threads(&self) -> Result<Option<usize>, UsageError> {
        self.raw("threads")
            .map(|s| s.parse().map_err(|_| UsageError(format!("--threads: cannot parse '{s}'"))))
            .transpose()
    }

    pub fn used(&self) -> &BTreeMap<String, String> {
        &self.used
    }
}

pub fn parse_seed(s: &str) -> Result<u64, UsageError> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|_| UsageError(format!("--seed: cannot parse '{s}'")))
}

fn parse_size(token: &str) -> Result<u64, UsageError> {
    let bad = || UsageError(format!("--n-list: cannot parse '{token}'"));
    match token.strip_prefix("2^") {
        Some(k) => {
            let k: u32 = k.parse().map_err(|_| bad())?;
            1u64.checked_shl(k).filter(|_| k < 63).ok_or_else(bad)
        }
        None => token.parse().map_err(|_| bad()),
    }
}

/// `"16,64,2^10"` or `"2^8..2^12"` (every power of two in between).
pub fn parse_n_list(text: &str) -> Result<Vec<u64>, UsageError> {
    let mut out = Vec::new();
    for token in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match token.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (parse_size(a)?, parse_size(b)?);
                if !a.is_power_of_two() || !b.is_power_of_two() || a > b {
                    return Err(UsageError(format!("--n-list: '{token}' needs powers of two in increasing order")));
                }
                let mut v = a;
                while v <= b {
                    out.push(v);
                    v *= 2;
                }
            }
            None => out.push(parse_size(token)?),
        }
    }
    if out.is_empty() {
        return Err(UsageError("--n-list is empty".into()));
    }
    if out.windows(2).any(|w| w[0] >= w[1]) {
        return Err(UsageError("--n-list must be strictly increasing".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_lists() {
        assert_eq!(parse_n_list("2^2..2^4").unwrap(), vec![4, 8, 16]);
        assert_eq!(parse_n_list("3, 2^3 ,100").unwrap(), vec![3, 8, 100]);
        assert!(parse_n_list("8,4").is_err());
        assert!(parse_n_list("2^3..2^1").is_err());
        assert!(parse_n_list("x").is_err());
    }

    #[test]
    fn seeds() {
        assert_eq!(parse_seed("0xC2AD").unwrap(), 0xC2AD);
        assert_eq!(parse_seed("17").unwrap(), 17);
        assert!(parse_seed("0xZZ").is_err());
    }

    #[test]
    fn config_lines() {
        let c = parse_config("# comment\nq = 1.5\nk_max=12\n\n").unwrap();
        assert_eq!(c["q"], "1.5");
        assert_eq!(c["k-max"], "12");
        assert!(parse_config("bogus=1").is_err());
        assert!(parse_config("q").is_err());
    }
}
