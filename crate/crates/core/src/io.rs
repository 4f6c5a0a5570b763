//! Configuration files, run manifests and CSV output.
//!
//! Config files are line-oriented `key = value` text with `#` comments.
//! A manifest is a config file that also carries `seeds` and `protocols`
//! and lists the files a sweep produced in comment lines, so feeding it
//! back through `--config` repeats the sweep.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::engine::{median_first_death, RoundMetrics, ScenarioSummary};
use crate::error::{ConfigError, Error};
use crate::model::{make_scenario, ClassProfile, EnergyMode, Protocol, ScenarioConfig};

pub const METRICS_HEADER: &str =
    "round,dead,delivered_normal,delivered_critical,delivered_on_demand,lost,residual_energy_j,ch_count,hotspot_events";

pub const SUMMARY_HEADER: &str = "protocol,seed,first_death_round,delivered,lost,residual_energy_j";

/// Every key accepted in a config file or `--set`, in manifest order.
pub const CONFIG_KEYS: &[&str] = &[
    "preset",
    "seed",
    "protocol",
    "rounds",
    "area_side",
    "node_count",
    "parent_count",
    "first_child_count",
    "e_elec",
    "e_amp",
    "full_power_range",
    "initial_energy",
    "parent_energy",
    "parent_payload",
    "parent_amplitude",
    "parent_range",
    "first_child_energy",
    "first_child_payload",
    "first_child_amplitude",
    "first_child_range",
    "second_child_energy",
    "second_child_payload",
    "second_child_amplitude",
    "second_child_range",
    "ch_enabled",
    "ch_probability",
    "temp_threshold",
    "temp_delta_per_packet",
    "cooling_per_round",
    "hotspot_cooldown",
    "child_cap",
    "p_critical",
    "p_on_demand",
    "mobility_period",
    "hello_bits",
    "seeds",
    "protocols",
];

/// Inclusive seed range, written `N..M` (or a single `N`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedRange {
    pub start: u64,
    pub end: u64,
}

impl SeedRange {
    pub fn single(seed: u64) -> Self {
        Self { start: seed, end: seed }
    }

    pub fn iter(self) -> impl Iterator<Item = u64> {
        self.start..=self.end
    }

    pub fn len(self) -> usize {
        (self.end - self.start) as usize + 1
    }

    pub fn is_empty(self) -> bool {
        false
    }
}

impl std::fmt::Display for SeedRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.start == self.end {
            write!(f, "{}", self.start)
        } else {
            write!(f, "{}..{}", self.start, self.end)
        }
    }
}

impl FromStr for SeedRange {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ConfigError::InvalidValue {
            key: "seeds".into(),
            value: s.into(),
            expected: "N or N..M with N <= M".into(),
        };
        let (a, b) = match s.trim().split_once("..") {
            Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
            None => (s, s),
        };
        let start: u64 = a.trim().parse().map_err(|_| bad())?;
        let end: u64 = b.trim().parse().map_err(|_| bad())?;
        if start > end {
            return Err(bad());
        }
        Ok(Self { start, end })
    }
}

/// Everything needed to repeat a sweep: the resolved scenario plus the
/// seeds and protocols it was run for.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub config: ScenarioConfig,
    pub seeds: SeedRange,
    pub protocols: Vec<Protocol>,
}

impl RunSpec {
    pub fn single(config: ScenarioConfig) -> Self {
        Self {
            seeds: SeedRange::single(config.seed),
            protocols: vec![config.protocol],
            config,
        }
    }

    /// One config per (protocol, seed), protocols outermost.
    pub fn runs(&self) -> Vec<ScenarioConfig> {
        self.protocols
            .iter()
            .flat_map(|&p| {
                self.seeds.iter().map(move |seed| ScenarioConfig {
                    protocol: p,
                    seed,
                    ..self.config.clone()
                })
            })
            .collect()
    }
}

/// Split config text into `(line number, key, value)` triples.
pub fn parse_pairs(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            text: raw.trim().into(),
        })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: raw.trim().into(),
            });
        }
        out.push((i + 1, k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Parse a single `key=value` override as given on the command line.
pub fn parse_override(s: &str) -> Result<(String, String), ConfigError> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() && !v.trim().is_empty() => Ok((k.trim().into(), v.trim().into())),
        _ => Err(ConfigError::Syntax { line: 0, text: s.into() }),
    }
}

fn value<T: FromStr>(key: &str, v: &str, expected: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| ConfigError::InvalidValue {
        key: key.into(),
        value: v.into(),
        expected: expected.into(),
    })
}

fn real(key: &str, v: &str) -> Result<f64, ConfigError> {
    value(key, v, "a number")
}

fn count<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    value(key, v, "a non-negative integer")
}

fn boolean(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(ConfigError::InvalidValue {
            key: key.into(),
            value: v.into(),
            expected: "true or false".into(),
        }),
    }
}

fn class_key<'a>(config: &'a mut ScenarioConfig, key: &str) -> Option<(&'a mut ClassProfile, &'static str)> {
    let (class, field) = key.rsplit_once('_')?;
    let profile = match class {
        "parent" => &mut config.classes.parent,
        "first_child" => &mut config.classes.first_child,
        "second_child" => &mut config.classes.second_child,
        _ => return None,
    };
    let field = match field {
        "energy" => "energy",
        "payload" => "payload",
        "amplitude" => "amplitude",
        "range" => "range",
        _ => return None,
    };
    Some((profile, field))
}

/// Set one scenario knob. `preset`, `seeds` and `protocols` are handled by
/// the callers and rejected here.
pub fn set_key(config: &mut ScenarioConfig, key: &str, v: &str) -> Result<(), ConfigError> {
    match key {
        "seed" => config.seed = count(key, v)?,
        "protocol" => config.protocol = v.parse()?,
        "rounds" => config.rounds = count(key, v)?,
        "area_side" => config.area_side = real(key, v)?,
        "node_count" => config.node_count = count(key, v)?,
        "parent_count" => config.parent_count = count(key, v)?,
        "first_child_count" => config.first_child_count = count(key, v)?,
        "e_elec" => config.radio.e_elec = real(key, v)?,
        "e_amp" => config.radio.e_amp = real(key, v)?,
        "full_power_range" => config.full_power_range = real(key, v)?,
        "initial_energy" => {
            config.energy_mode = if v == "per_class" {
                EnergyMode::PerClass
            } else {
                EnergyMode::Uniform(value(key, v, "a number of joules or per_class")?)
            }
        }
        "ch_enabled" => config.ch_enabled = boolean(key, v)?,
        "ch_probability" => config.ch_probability = real(key, v)?,
        "temp_threshold" => config.temp_threshold = real(key, v)?,
        "temp_delta_per_packet" => config.temp_delta_per_packet = real(key, v)?,
        "cooling_per_round" => config.cooling_per_round = real(key, v)?,
        "hotspot_cooldown" => config.hotspot_cooldown = count(key, v)?,
        "child_cap" => config.child_cap = count(key, v)?,
        "p_critical" => config.p_critical = real(key, v)?,
        "p_on_demand" => config.p_on_demand = real(key, v)?,
        "mobility_period" => config.mobility_period = count(key, v)?,
        "hello_bits" => config.hello_bits = count(key, v)?,
        _ => match class_key(config, key) {
            Some((p, "energy")) => p.initial_energy = real(key, v)?,
            Some((p, "payload")) => p.payload_bits = count(key, v)?,
            Some((p, "amplitude")) => p.mobility_amplitude = real(key, v)?,
            Some((p, _)) => p.normal_range = real(key, v)?,
            None => return Err(ConfigError::UnknownKey { key: key.into() }),
        },
    }
    Ok(())
}

/// All scenario knobs as `(key, value)` in manifest order. Floats use the
/// shortest representation that parses back to the same value.
pub fn config_entries(c: &ScenarioConfig) -> Vec<(&'static str, String)> {
    let energy = match c.energy_mode {
        EnergyMode::Uniform(e) => e.to_string(),
        EnergyMode::PerClass => "per_class".into(),
    };
    let k = &c.classes;
    vec![
        ("preset", c.preset.clone()),
        ("seed", c.seed.to_string()),
        ("protocol", c.protocol.key().into()),
        ("rounds", c.rounds.to_string()),
        ("area_side", c.area_side.to_string()),
        ("node_count", c.node_count.to_string()),
        ("parent_count", c.parent_count.to_string()),
        ("first_child_count", c.first_child_count.to_string()),
        ("e_elec", c.radio.e_elec.to_string()),
        ("e_amp", c.radio.e_amp.to_string()),
        ("full_power_range", c.full_power_range.to_string()),
        ("initial_energy", energy),
        ("parent_energy", k.parent.initial_energy.to_string()),
        ("parent_payload", k.parent.payload_bits.to_string()),
        ("parent_amplitude", k.parent.mobility_amplitude.to_string()),
        ("parent_range", k.parent.normal_range.to_string()),
        ("first_child_energy", k.first_child.initial_energy.to_string()),
        ("first_child_payload", k.first_child.payload_bits.to_string()),
        ("first_child_amplitude", k.first_child.mobility_amplitude.to_string()),
        ("first_child_range", k.first_child.normal_range.to_string()),
        ("second_child_energy", k.second_child.initial_energy.to_string()),
        ("second_child_payload", k.second_child.payload_bits.to_string()),
        ("second_child_amplitude", k.second_child.mobility_amplitude.to_string()),
        ("second_child_range", k.second_child.normal_range.to_string()),
        ("ch_enabled", c.ch_enabled.to_string()),
        ("ch_probability", c.ch_probability.to_string()),
        ("temp_threshold", c.temp_threshold.to_string()),
        ("temp_delta_per_packet", c.temp_delta_per_packet.to_string()),
        ("cooling_per_round", c.cooling_per_round.to_string()),
        ("hotspot_cooldown", c.hotspot_cooldown.to_string()),
        ("child_cap", c.child_cap.to_string()),
        ("p_critical", c.p_critical.to_string()),
        ("p_on_demand", c.p_on_demand.to_string()),
        ("mobility_period", c.mobility_period.to_string()),
        ("hello_bits", c.hello_bits.to_string()),
    ]
}

fn parse_protocols(v: &str) -> Result<Vec<Protocol>, ConfigError> {
    if v.trim() == "all" {
        return Ok(Protocol::ALL.to_vec());
    }
    v.split(',').map(str::parse).collect()
}

/// Where the knobs come from, lowest precedence first: the preset, then
/// the config file, then `key=value` overrides.
#[derive(Debug, Clone, Default)]
pub struct ConfigSources<'a> {
    pub preset: Option<&'a str>,
    pub file: Option<&'a Path>,
    pub overrides: &'a [(String, String)],
}

/// Resolve a [`RunSpec`]. A `preset` key in the file picks the base preset
/// when none is given explicitly; giving two different presets is an error.
pub fn resolve(sources: &ConfigSources<'_>) -> Result<RunSpec, ConfigError> {
    let file_pairs = match sources.file {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            parse_pairs(&text)?
        }
        None => Vec::new(),
    };
    let mut pairs: Vec<(&str, &str)> = file_pairs.iter().map(|(_, k, v)| (k.as_str(), v.as_str())).collect();
    pairs.extend(sources.overrides.iter().map(|(k, v)| (k.as_str(), v.as_str())));

    let mut preset = sources.preset.map(str::to_string);
    for &(k, v) in &pairs {
        if k != "preset" {
            continue;
        }
        match &preset {
            Some(p) if p != v => {
                return Err(ConfigError::InvalidValue {
                    key: "preset".into(),
                    value: v.into(),
                    expected: format!("`{p}` (already selected)"),
                })
            }
            _ => preset = Some(v.into()),
        }
    }
    let mut config = make_scenario(preset.as_deref().unwrap_or("paper-simulation"), 1)?;
    let mut seeds = None;
    let mut protocols = None;
    for (k, v) in pairs {
        match k {
            "preset" => {}
            "seeds" => seeds = Some(v.parse()?),
            "protocols" => protocols = Some(parse_protocols(v)?),
            _ => set_key(&mut config, k, v)?,
        }
    }
    config.validate()?;
    Ok(RunSpec {
        seeds: seeds.unwrap_or(SeedRange::single(config.seed)),
        protocols: protocols.unwrap_or_else(|| vec![config.protocol]),
        config,
    })
}

/// Preset defaults overlaid by the file, then by the overrides.
pub fn parse_config(sources: &ConfigSources<'_>) -> Result<ScenarioConfig, ConfigError> {
    resolve(sources).map(|r| r.config)
}

/// Parse config text on top of `base` without touching the filesystem.
pub fn parse_config_str(base: ScenarioConfig, text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut config = base;
    for (_, k, v) in parse_pairs(text)? {
        match k.as_str() {
            "preset" => config = make_scenario(&v, config.seed)?,
            "seeds" | "protocols" => {}
            _ => set_key(&mut config, &k, &v)?,
        }
    }
    config.validate()?;
    Ok(config)
}

/// Manifest text for `spec`, with `outputs` listed in comments.
pub fn manifest_text(spec: &RunSpec, outputs: &[PathBuf]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# wbasn-sim {} run manifest", env!("CARGO_PKG_VERSION"));
    for (k, v) in config_entries(&spec.config) {
        let _ = writeln!(s, "{k} = {v}");
    }
    let _ = writeln!(s, "seeds = {}", spec.seeds);
    let protocols: Vec<&str> = spec.protocols.iter().map(|p| p.key()).collect();
    let _ = writeln!(s, "protocols = {}", protocols.join(","));
    for out in outputs {
        let _ = writeln!(s, "# output: {}", out.display());
    }
    s
}

pub fn read_manifest(path: &Path) -> Result<RunSpec, ConfigError> {
    resolve(&ConfigSources {
        file: Some(path),
        ..Default::default()
    })
}

/// Write via a sibling temp file and rename, so readers never see a
/// half-written file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), Error> {
    let io_err = |source: io::Error| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let name = path.file_name().ok_or_else(|| io_err(io::ErrorKind::InvalidInput.into()))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, contents).map_err(io_err)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io_err(e)
    })
}

/// One CSV row per round. Counters are cumulative; `ch_count` and
/// `hotspot_events` are per round.
pub fn metrics_csv<'a>(metrics: impl IntoIterator<Item = &'a RoundMetrics>) -> String {
    let mut s = String::from(METRICS_HEADER);
    s.push('\n');
    for m in metrics {
        let c = &m.cumulative;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{:.9},{},{}",
            m.round,
            m.dead_count,
            c.delivered_normal,
            c.delivered_critical,
            c.delivered_on_demand,
            c.lost,
            m.total_residual_energy,
            m.ch_count,
            m.hotspot_events
        );
    }
    s
}

pub fn write_metrics_csv<'a>(metrics: impl IntoIterator<Item = &'a RoundMetrics>, path: &Path) -> Result<(), Error> {
    write_atomic(path, metrics_csv(metrics).as_bytes())
}

fn first_death_cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => x.to_string(),
        _ => "none".into(),
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

/// Per-run rows, then one `median` row per protocol. Runs must be grouped
/// by protocol.
pub fn summary_csv(runs: &[(Protocol, u64, ScenarioSummary)]) -> String {
    let mut s = String::from(SUMMARY_HEADER);
    s.push('\n');
    for (p, seed, sum) in runs {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{:.9}",
            p,
            seed,
            first_death_cell(sum.first_death_round.map(f64::from)),
            sum.totals.delivered(),
            sum.totals.lost,
            sum.final_residual_energy
        );
    }
    let mut protocols: Vec<Protocol> = runs.iter().map(|r| r.0).collect();
    protocols.dedup();
    for p in protocols {
        let group: Vec<ScenarioSummary> = runs.iter().filter(|r| r.0 == p).map(|r| r.2.clone()).collect();
        let _ = writeln!(
            s,
            "{},median,{},{},{},{:.9}",
            p,
            first_death_cell(median_first_death(&group)),
            median(group.iter().map(|g| g.totals.delivered() as f64).collect()),
            median(group.iter().map(|g| g.totals.lost as f64).collect()),
            median(group.iter().map(|g| g.final_residual_energy).collect())
        );
    }
    s
}

pub fn metrics_file_name(protocol: Protocol, seed: u64) -> String {
    format!("{}_seed{}.csv", protocol.key(), seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Counts;

    fn preset() -> ScenarioConfig {
        ScenarioConfig::paper_simulation(1)
    }

    #[test]
    fn empty_text_is_pure_preset() {
        assert_eq!(parse_config_str(preset(), "").unwrap(), preset());
        assert_eq!(parse_config_str(preset(), "# nothing\n\n   \n").unwrap(), preset());
    }

    #[test]
    fn rounds_override_changes_only_rounds() {
        let c = parse_config_str(preset(), "rounds = 100").unwrap();
        assert_eq!(c.rounds, 100);
        assert_eq!(ScenarioConfig { rounds: 5000, ..c }, preset());
    }

    #[test]
    fn out_of_range_names_the_key() {
        let err = parse_config_str(preset(), "ch_probability = 1.5").unwrap_err();
        assert!(matches!(&err, ConfigError::OutOfRange { key, .. } if key == "ch_probability"), "{err}");
        assert!(err.to_string().contains("[0, 1]"));
    }

    #[test]
    fn unknown_key_and_bad_syntax() {
        assert!(matches!(
            parse_config_str(preset(), "colour = red"),
            Err(ConfigError::UnknownKey { key }) if key == "colour"
        ));
        assert!(matches!(
            parse_config_str(preset(), "rounds 100"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_config_str(preset(), "rounds = many"),
            Err(ConfigError::InvalidValue { key, .. }) if key == "rounds"
        ));
    }

    #[test]
    fn trailing_comments_and_class_keys() {
        let c = parse_config_str(preset(), "second_child_range = 2.0  # wider\ninitial_energy = per_class").unwrap();
        assert_eq!(c.classes.second_child.normal_range, 2.0);
        assert_eq!(c.energy_mode, EnergyMode::PerClass);
    }

    #[test]
    fn every_entry_round_trips() {
        let mut c = ScenarioConfig::prototype(7);
        c.radio.e_amp = 1.0 / 3.0 * 1e-10;
        c.p_critical = 0.1 + 0.2;
        let text: String = config_entries(&c).iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        assert_eq!(parse_config_str(preset(), &text).unwrap(), c);
        let keys: Vec<&str> = config_entries(&c).iter().map(|e| e.0).collect();
        assert_eq!(&CONFIG_KEYS[..keys.len()], keys.as_slice());
    }

    #[test]
    fn seed_ranges() {
        assert_eq!("1..10".parse::<SeedRange>().unwrap(), SeedRange { start: 1, end: 10 });
        assert_eq!("3".parse::<SeedRange>().unwrap().len(), 1);
        assert!("5..2".parse::<SeedRange>().is_err());
        assert_eq!(SeedRange { start: 1, end: 10 }.to_string(), "1..10");
    }

    fn metrics(round: u32, residual: f64) -> RoundMetrics {
        RoundMetrics {
            round,
            dead_count: 0,
            this_round: Counts::default(),
            cumulative: Counts::default(),
            total_residual_energy: residual,
            ch_count: 0,
            hotspot_events: 0,
        }
    }

    #[test]
    fn csv_formatting() {
        assert_eq!(metrics_csv(&[]), format!("{METRICS_HEADER}\n"));
        assert_eq!(
            metrics_csv(&[metrics(1, 0.0)]),
            format!("{METRICS_HEADER}\n1,0,0,0,0,0,0.000000000,0,0\n")
        );
        assert!(metrics_csv(&[metrics(1, 2.4e-4)]).ends_with(",0.000240000,0,0\n"));
    }

    #[test]
    fn atomic_write_leaves_no_temp_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        write_metrics_csv(&[metrics(1, 1.0)], &path).unwrap();
        write_metrics_csv(&[metrics(1, 2.0)], &path).unwrap();
        assert!(fs::read_to_string(&path).unwrap().contains("2.000000000"));
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
