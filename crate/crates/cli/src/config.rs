//! Run configuration: a `key = value` file overridden by command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use fpspec_core::{Grid, Kernel, Weight};

/// Invalid invocation; reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Keys accepted in a config file (the long flag names).
pub const KEYS: &[&str] = &[
    "beta",
    "dirac-pair",
    "kernel",
    "grid",
    "dt",
    "t-end",
    "scheme",
    "init",
    "observe-every",
    "window",
    "out",
];

/// Parsed `key = value` pairs.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<ConfigFile, UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        ConfigFile::parse(&text)
    }

    pub fn parse(text: &str) -> Result<ConfigFile, UsageError> {
        let mut values = BTreeMap::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| UsageError(format!("config line {}: expected `key = value`", ln + 1)))?;
            let k = k.trim();
            if !KEYS.contains(&k) {
                return Err(UsageError(format!("config line {}: unknown key `{k}`", ln + 1)));
            }
            values.insert(k.to_string(), v.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    /// Flag value if given, else the file's value, parsed.
    pub fn pick<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, UsageError>
    where
        T::Err: fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.values
            .get(key)
            .map(|s| s.parse::<T>().map_err(|e| UsageError(format!("config `{key}`: {e}"))))
            .transpose()
    }
}

/// Which perturbation to use.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    DiracPair { eps: f64, alpha: f64 },
    File(PathBuf),
}

impl KernelSpec {
    pub fn build(&self) -> fpspec_core::Result<Kernel> {
        match self {
            KernelSpec::DiracPair { eps, alpha } => Ok(Kernel::dirac_pair(*eps, *alpha)),
            KernelSpec::File(p) => Kernel::from_file(p),
        }
    }
}

/// `e,a` for a Dirac pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair(pub f64, pub f64);

impl FromStr for Pair {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `a,b`, got `{s}`"))?;
        let p = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number `{t}`"));
        Ok(Pair(p(a)?, p(b)?))
    }
}

/// `lo:hi` (window) or `x_max:n` (grid).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span(pub f64, pub f64);

impl FromStr for Span {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected `a:b`, got `{s}`"))?;
        let p = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number `{t}`"));
        Ok(Span(p(a)?, p(b)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Cn,
    Exact,
}

impl FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "cn" => Ok(Scheme::Cn),
            "exact" => Ok(Scheme::Exact),
            _ => Err(format!("unknown scheme `{s}` (cn or exact)")),
        }
    }
}

/// Fully resolved settings shared by the commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub beta: f64,
    pub kernel: KernelSpec,
    pub x_max: f64,
    pub n: usize,
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    pub init: String,
    pub observe_every: usize,
    pub window: (f64, f64),
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            beta: 1.0,
            kernel: KernelSpec::DiracPair { eps: 2.0, alpha: 2.0 },
            x_max: 25.0,
            n: 1501,
            scheme: Scheme::Cn,
            dt: 1e-3,
            t_end: 10.0,
            init: "phi1".into(),
            observe_every: 10,
            window: (4.0, 8.0),
            out: None,
        }
    }
}

/// Flag values before merging with a config file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub beta: Option<f64>,
    pub dirac_pair: Option<Pair>,
    pub kernel: Option<PathBuf>,
    pub grid: Option<Span>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub scheme: Option<Scheme>,
    pub init: Option<String>,
    pub observe_every: Option<usize>,
    pub window: Option<Span>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Defaults, then the config file, then flags.
    pub fn resolve(file: &ConfigFile, o: Overrides) -> Result<RunConfig, UsageError> {
        let mut c = RunConfig::default();
        if let Some(v) = file.pick("beta", o.beta)? {
            c.beta = v;
        }
        // An explicit flag for either kernel form beats any file setting.
        let flag_kernel = o.dirac_pair.is_some() || o.kernel.is_some();
        let (pair, path) = if flag_kernel {
            (o.dirac_pair, o.kernel)
        } else {
            (file.pick::<Pair>("dirac-pair", None)?, file.pick::<PathBuf>("kernel", None)?)
        };
        match (pair, path) {
            (Some(_), Some(_)) => return Err(UsageError("give either --dirac-pair or --kernel, not both".into())),
            (Some(Pair(eps, alpha)), None) => c.kernel = KernelSpec::DiracPair { eps, alpha },
            (None, Some(p)) => c.kernel = KernelSpec::File(p),
            (None, None) => {}
        }
        if let Some(Span(x, n)) = file.pick("grid", o.grid)? {
            if n.fract() != 0.0 || n < 1.0 {
                return Err(UsageError(format!("grid point count {n} is not a positive integer")));
            }
            c.x_max = x;
            c.n = n as usize;
        }
        if let Some(v) = file.pick("dt", o.dt)? {
            c.dt = v;
        }
        if let Some(v) = file.pick("t-end", o.t_end)? {
            c.t_end = v;
        }
        if let Some(v) = file.pick("scheme", o.scheme)? {
            c.scheme = v;
        }
        if let Some(v) = file.pick("init", o.init)? {
            c.init = v;
        }
        if let Some(v) = file.pick("observe-every", o.observe_every)? {
            c.observe_every = v;
        }
        if let Some(Span(lo, hi)) = file.pick("window", o.window)? {
            c.window = (lo, hi);
        }
        c.out = file.pick("out", o.out)?;
        c.check()?;
        Ok(c)
    }

    fn check(&self) -> Result<(), UsageError> {
        let positive = [("beta", self.beta), ("dt", self.dt), ("grid x_max", self.x_max)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(UsageError(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(UsageError(format!("t-end must be non-negative, got {}", self.t_end)));
        }
        if self.observe_every == 0 {
            return Err(UsageError("observe-every must be at least 1".into()));
        }
        if !(self.window.0 < self.window.1) {
            return Err(UsageError(format!("window {}:{} is empty", self.window.0, self.window.1)));
        }
        if self.scheme == Scheme::Exact {
            let zero = match &self.kernel {
                KernelSpec::DiracPair { eps, .. } => *eps == 0.0,
                KernelSpec::File(_) => false,
            };
            if !zero {
                return Err(UsageError("scheme exact requires a zero kernel (e.g. --dirac-pair 0,1)".into()));
            }
        }
        Ok(())
    }

    pub fn weight(&self) -> fpspec_core::Result<Weight> {
        Weight::new(self.beta)
    }

    pub fn grid(&self) -> fpspec_core::Result<Grid> {
        Grid::symmetric(self.x_max, self.n)
    }
}
