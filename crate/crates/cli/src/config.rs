use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Parser;
use locadapt::bench::{InstanceLaw, LaConfig, StreamSpec, TargetPreset};
use locadapt::domain::LossKind;
use locadapt::format::g17;
use locadapt::net::{Mode, RadiusSchedule, Tau};

use crate::run::core;
use crate::Failure;

/// Keys accepted in a config file, in the order they are echoed.
pub const KEYS: &[&str] = &[
    "mode",
    "depth",
    "horizon",
    "seed",
    "loss",
    "lipschitz",
    "dims",
    "dim",
    "tau",
    "cover-constant",
    "target",
    "stream",
    "noise",
    "baseline",
    "out",
    "jobs",
];

#[derive(Debug, Parser)]
#[command(
    name = "locadapt",
    version,
    about = "Run the locally adaptive online learner on a synthetic stream",
    after_help = "A config file holds `key = value` lines with the flag names as keys; flags win over the file."
)]
pub struct Flags {
    /// lipschitz, dimension or loss
    #[arg(long)]
    mode: Option<String>,
    /// Number of levels D
    #[arg(long)]
    depth: Option<String>,
    #[arg(long)]
    horizon: Option<String>,
    /// One seed, or a comma-separated list run as separate jobs
    #[arg(long)]
    seed: Option<String>,
    /// square or absolute
    #[arg(long)]
    loss: Option<String>,
    /// Per-level constants L_1,...,L_D in lipschitz mode; the global L otherwise
    #[arg(long)]
    lipschitz: Option<String>,
    /// Per-level dimensions d_1,...,d_D (dimension mode)
    #[arg(long)]
    dims: Option<String>,
    /// Ambient dimension of the instances
    #[arg(long)]
    dim: Option<String>,
    /// pow or linear (loss mode)
    #[arg(long)]
    tau: Option<String>,
    /// Level budget constant C (dimension mode)
    #[arg(long = "cover-constant")]
    cover_constant: Option<String>,
    /// mostly-flat, uniformly-rough or constant
    #[arg(long)]
    target: Option<String>,
    /// uniform or manifold:m
    #[arg(long)]
    stream: Option<String>,
    /// Amplitude of uniform label noise
    #[arg(long)]
    noise: Option<String>,
    /// Also run the flat baseline and write the comparison
    #[arg(long)]
    baseline: bool,
    /// Output path prefix
    #[arg(long)]
    out: Option<String>,
    /// Worker threads when several seeds are given
    #[arg(long)]
    jobs: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let opts = [
            ("mode", &self.mode),
            ("depth", &self.depth),
            ("horizon", &self.horizon),
            ("seed", &self.seed),
            ("loss", &self.loss),
            ("lipschitz", &self.lipschitz),
            ("dims", &self.dims),
            ("dim", &self.dim),
            ("tau", &self.tau),
            ("cover-constant", &self.cover_constant),
            ("target", &self.target),
            ("stream", &self.stream),
            ("noise", &self.noise),
            ("out", &self.out),
            ("jobs", &self.jobs),
        ];
        let mut out: Vec<_> = opts
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
            .collect();
        if self.baseline {
            out.push(("baseline", "true".into()));
        }
        out
    }
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub depth: usize,
    pub horizon: usize,
    pub seeds: Vec<u64>,
    pub loss: LossKind,
    /// `L_1..L_D` in Lipschitz mode, the single global `L` otherwise.
    pub lipschitz: Vec<f64>,
    pub dims: Vec<u32>,
    pub dim: usize,
    pub tau: Tau,
    pub cover: Option<f64>,
    pub target: TargetPreset,
    pub stream: InstanceLaw,
    pub noise: f64,
    pub baseline: bool,
    pub out: String,
    pub jobs: usize,
}

impl RunConfig {
    pub fn schedule(&self) -> locadapt::Result<RadiusSchedule> {
        match self.mode {
            Mode::Lipschitz => RadiusSchedule::lipschitz(self.lipschitz.clone(), self.dim as u32),
            Mode::Dimension => RadiusSchedule::dimension(self.lipschitz[0], self.dims.clone()),
            Mode::LocalLoss => {
                RadiusSchedule::local_loss(self.lipschitz[0], self.tau, self.depth, self.dim as u32)
            }
        }
    }

    pub fn la_config(&self) -> locadapt::Result<LaConfig> {
        let mut cfg = LaConfig::new(self.schedule()?, self.loss);
        cfg.cover = self.cover;
        Ok(cfg)
    }

    pub fn stream_spec(&self, seed: u64) -> StreamSpec {
        let mut spec = StreamSpec::new(self.horizon, self.dim, seed);
        spec.law = self.stream;
        spec.noise = self.noise;
        spec.kind = self.loss;
        spec
    }

    /// Slopes of the target preset: the extreme grid values in Lipschitz
    /// mode, `1` and `L` otherwise.
    pub fn target_slopes(&self) -> (f64, f64) {
        match self.mode {
            Mode::Lipschitz => (self.lipschitz[0], *self.lipschitz.last().unwrap()),
            _ => {
                let l = self.lipschitz[0];
                (l.min(1.0), l.max(1.0))
            }
        }
    }

    /// Lipschitz constant handed to the flat baseline.
    pub fn baseline_lipschitz(&self) -> f64 {
        *self.lipschitz.last().unwrap()
    }

    /// The same run restricted to one seed writing under `out`.
    pub fn single(&self, seed: u64, out: String) -> RunConfig {
        RunConfig {
            seeds: vec![seed],
            out,
            jobs: 1,
            ..self.clone()
        }
    }

    /// Output prefix per seed: `out` itself for a single seed, `out.s<seed>`
    /// otherwise.
    pub fn prefixes(&self) -> Vec<(u64, String)> {
        if self.seeds.len() == 1 {
            return vec![(self.seeds[0], self.out.clone())];
        }
        self.seeds
            .iter()
            .map(|s| (*s, format!("{}.s{s}", self.out)))
            .collect()
    }

    /// `key = value` lines that parse back to this config.
    pub fn echo(&self) -> String {
        let join = |v: Vec<String>| v.join(",");
        let mut lines = vec![
            ("mode", self.mode.to_string()),
            ("depth", self.depth.to_string()),
            ("horizon", self.horizon.to_string()),
            ("seed", join(self.seeds.iter().map(|s| s.to_string()).collect())),
            ("loss", self.loss.to_string()),
            ("lipschitz", join(self.lipschitz.iter().map(|v| g17(*v)).collect())),
        ];
        if self.mode == Mode::Dimension {
            lines.push(("dims", join(self.dims.iter().map(|v| v.to_string()).collect())));
        }
        lines.push(("dim", self.dim.to_string()));
        if self.mode == Mode::LocalLoss {
            lines.push(("tau", self.tau.to_string()));
        }
        if let Some(c) = self.cover {
            lines.push(("cover-constant", g17(c)));
        }
        lines.extend([
            ("target", self.target.to_string()),
            ("stream", self.stream.to_string()),
            ("noise", g17(self.noise)),
            ("baseline", self.baseline.to_string()),
            ("out", self.out.clone()),
            ("jobs", self.jobs.to_string()),
        ]);
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Parses flags and the optional config file into a checked run.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, Failure>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let flags = Flags::try_parse_from(args).map_err(Failure::Usage)?;
    let mut values = match &flags.config {
        Some(path) => read_file(path)?,
        None => BTreeMap::new(),
    };
    for (k, v) in flags.pairs() {
        values.insert(k.to_string(), v);
    }
    resolve(&values)
}

/// Reads a flat `key = value` file; blank lines and `#` lines are skipped.
pub fn read_file(path: &Path) -> Result<BTreeMap<String, String>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_kv(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(format!("line {}: unknown key `{k}`", i + 1));
        }
        if out.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(format!("line {}: `{k}` given twice", i + 1));
        }
    }
    Ok(out)
}

fn bad(msg: impl Display) -> Failure {
    Failure::Config(msg.to_string())
}

fn one<T: FromStr>(key: &str, v: &str) -> Result<T, Failure>
where
    T::Err: Display,
{
    v.parse()
        .map_err(|e| bad(format!("{key}: cannot parse `{v}`: {e}")))
}

fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>, Failure>
where
    T::Err: Display,
{
    v.split(',').map(|s| one(key, s.trim())).collect()
}

fn positive(key: &str, v: usize) -> Result<usize, Failure> {
    if v == 0 {
        Err(bad(format!("{key} must be positive")))
    } else {
        Ok(v)
    }
}

pub fn resolve(values: &BTreeMap<String, String>) -> Result<RunConfig, Failure> {
    for k in values.keys() {
        if !KEYS.contains(&k.as_str()) {
            return Err(bad(format!("unknown key `{k}`")));
        }
    }
    let get = |k: &str| values.get(k).map(String::as_str);
    let mode: Mode = get("mode").map_or(Ok(Mode::Lipschitz), |v| one("mode", v))?;
    let grid: Option<Vec<f64>> = get("lipschitz").map(|v| list("lipschitz", v)).transpose()?;
    let dims: Option<Vec<u32>> = get("dims").map(|v| list("dims", v)).transpose()?;
    let depth = match get("depth") {
        Some(v) => positive("depth", one("depth", v)?)?,
        None => match (mode, &grid, &dims) {
            (Mode::Lipschitz, Some(g), _) => g.len(),
            (Mode::Dimension, _, Some(d)) => d.len(),
            _ => 3,
        },
    };
    let only = |key: &str, owner: Mode| {
        if get(key).is_some() && mode != owner {
            Err(bad(format!("`{key}` only applies in {owner} mode")))
        } else {
            Ok(())
        }
    };
    only("dims", Mode::Dimension)?;
    only("cover-constant", Mode::Dimension)?;
    only("tau", Mode::LocalLoss)?;

    let lipschitz = match (mode, grid) {
        (Mode::Lipschitz, None) => (1..=depth).map(|k| 2f64.powi(k as i32)).collect(),
        (Mode::Lipschitz, Some(g)) if g.len() != depth => {
            return Err(bad(format!(
                "lipschitz grid has {} values but depth is {depth}",
                g.len()
            )))
        }
        (_, None) => vec![1.0],
        (Mode::Lipschitz, Some(g)) => g,
        (_, Some(g)) if g.len() != 1 => {
            return Err(bad(format!("{mode} mode takes a single global lipschitz constant")))
        }
        (_, Some(g)) => g,
    };

    let dims = match (mode, dims) {
        (Mode::Dimension, None) => return Err(bad("dimension mode needs --dims")),
        (Mode::Dimension, Some(d)) if d.len() != depth => {
            return Err(bad(format!("dims has {} values but depth is {depth}", d.len())))
        }
        (_, d) => d.unwrap_or_default(),
    };
    let dim = match get("dim") {
        Some(v) => positive("dim", one("dim", v)?)?,
        None => dims.first().map_or(1, |d| *d as usize),
    };
    if let Some(&d1) = dims.first() {
        if d1 as usize != dim {
            return Err(bad(format!("dim {dim} differs from the first entry of dims ({d1})")));
        }
    }

    let loss = match get("loss") {
        Some(v) => one("loss", v)?,
        None if mode == Mode::LocalLoss => LossKind::Absolute,
        None => LossKind::Square,
    };
    let cover = match mode {
        Mode::Dimension => Some(get("cover-constant").map_or(Ok(1.0), |v| one("cover-constant", v))?),
        _ => None,
    };
    let seeds: Vec<u64> = get("seed").map_or(Ok(vec![1]), |v| list("seed", v))?;
    let mut sorted = seeds.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != seeds.len() {
        return Err(bad("seeds must be distinct"));
    }
    let noise: f64 = get("noise").map_or(Ok(0.1), |v| one("noise", v))?;
    if !(noise.is_finite() && noise >= 0.0) {
        return Err(bad("noise must be a nonnegative number"));
    }
    let out = get("out").unwrap_or("run").to_string();
    if out.is_empty() {
        return Err(bad("out must not be empty"));
    }
    let cfg = RunConfig {
        mode,
        depth,
        horizon: positive("horizon", get("horizon").map_or(Ok(1000), |v| one("horizon", v))?)?,
        seeds,
        loss,
        lipschitz,
        dims,
        dim,
        tau: get("tau").map_or(Ok(Tau::Pow), |v| one("tau", v))?,
        cover,
        target: get("target").map_or(Ok(TargetPreset::MostlyFlat), |v| one("target", v))?,
        stream: get("stream").map_or(Ok(InstanceLaw::Uniform), |v| one("stream", v))?,
        noise,
        baseline: get("baseline").map_or(Ok(false), |v| one("baseline", v))?,
        out,
        jobs: positive("jobs", get("jobs").map_or(Ok(1), |v| one("jobs", v))?)?,
    };
    if let InstanceLaw::Manifold { m } = cfg.stream {
        if m == 0 || m >= cfg.dim {
            return Err(bad(format!("manifold dimension {m} must lie in 1..{}", cfg.dim)));
        }
    }
    cfg.la_config().and_then(|c| c.validate()).map_err(core)?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &str) -> Result<RunConfig, Failure> {
        parse_config(std::iter::once("locadapt").chain(args.split_whitespace()))
    }

    #[test]
    fn example_command_parses() {
        let c = parse(
            "--mode lipschitz --depth 3 --lipschitz 1,2,4 --horizon 1000 --seed 7 --loss square --target mostly-flat --out run1",
        )
        .unwrap();
        assert_eq!(c.depth, 3);
        assert_eq!(c.lipschitz, vec![1.0, 2.0, 4.0]);
        assert_eq!(c.seeds, vec![7]);
        assert_eq!(c.out, "run1");
    }

    #[test]
    fn loss_mode_rejects_square_loss() {
        let e = parse("--mode loss --loss square").unwrap_err();
        assert_eq!(e.code(), 2);
    }

    #[test]
    fn grid_length_must_match_depth() {
        let e = parse("--depth 3 --lipschitz 1,2").unwrap_err();
        assert!(e.to_string().contains("depth"), "{e}");
        assert_eq!(e.code(), 2);
    }

    #[test]
    fn defaults_follow_the_mode() {
        let c = parse("--mode loss").unwrap();
        assert_eq!(c.loss, LossKind::Absolute);
        assert_eq!(c.tau, Tau::Pow);
        let c = parse("--mode dimension --dims 2,1").unwrap();
        assert_eq!((c.depth, c.dim, c.cover), (2, 2, Some(1.0)));
        let c = parse("").unwrap();
        assert_eq!(c.lipschitz, vec![2.0, 4.0, 8.0]);
    }

    #[test]
    fn mode_specific_keys_are_rejected_elsewhere() {
        assert!(parse("--tau pow").is_err());
        assert!(parse("--cover-constant 2").is_err());
        assert!(parse("--dims 1").is_err());
        assert!(parse("--mode dimension").is_err());
        assert!(parse("--mode dimension --dims 2,1 --dim 3").is_err());
        assert!(parse("--mode loss --lipschitz 1,2").is_err());
    }

    #[test]
    fn bad_values_are_config_errors() {
        for a in ["--horizon 0", "--noise -1", "--seed 1,1", "--stream manifold:1", "--jobs 0", "--target wavy"] {
            assert_eq!(parse(a).unwrap_err().code(), 2, "{a}");
        }
    }

    #[test]
    fn unknown_flag_is_a_usage_error() {
        assert_eq!(parse("--speed 3").unwrap_err().code(), 2);
    }

    #[test]
    fn file_keys_are_checked() {
        assert!(parse_kv("mode = loss\n# note\n\nhorizon=5").is_ok());
        assert!(parse_kv("speed = 3").unwrap_err().contains("unknown key"));
        assert!(parse_kv("mode = loss\nmode = lipschitz").is_err());
        assert!(parse_kv("mode").is_err());
    }

    #[test]
    fn echo_round_trips() {
        for args in [
            "--mode lipschitz --lipschitz 1,2.5,4 --seed 3,4 --noise 0.25 --baseline",
            "--mode dimension --dims 3,2,1 --cover-constant 0.5 --stream manifold:2 --lipschitz 3",
            "--mode loss --tau linear --depth 4 --target constant --out x/y",
        ] {
            let c = parse(args).unwrap();
            let back = resolve(&parse_kv(&c.echo()).unwrap()).unwrap();
            assert_eq!(back, c, "{args}");
        }
    }

    #[test]
    fn prefixes_split_seeds() {
        let c = parse("--seed 5 --out r").unwrap();
        assert_eq!(c.prefixes(), vec![(5, "r".to_string())]);
        let c = parse("--seed 5,6 --out r").unwrap();
        assert_eq!(c.prefixes(), vec![(5, "r.s5".to_string()), (6, "r.s6".to_string())]);
    }
}
