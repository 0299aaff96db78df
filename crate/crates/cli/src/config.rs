//! Run configuration: a TOML document with a `[pair]` table.
//!
//! ```toml
//! command = "build-complex"
//! radius = 3
//! max_dim = 2
//!
//! [pair]
//! group = "free"
//! generators = ["x", "y"]
//! peripherals = [["x^2"]]
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use cosetc_core::complex::Caps;
use cosetc_core::oracles::{GroupSpec, Oracle, PairSpec, Part, PeripheralSpec};
use cosetc_core::qilab::check_raag_hypotheses;
use cosetc_core::words::{Alphabet, DefiningGraph, Word};
use toml::{Table, Value};

pub const DEFAULT_RADIUS: usize = 2;
pub const DEFAULT_MAX_DIM: usize = 2;
pub const DEFAULT_SAMPLES: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Command {
    BuildComplex,
    Ktau,
    ConedOff,
    ExtensionGraph,
    Height,
    WidthLowerBound,
    Malnormal,
    Core,
    Packing,
    Fence,
    QiChain,
    Delta,
}

impl Command {
    pub const ALL: [Command; 12] = [
        Command::BuildComplex,
        Command::Ktau,
        Command::ConedOff,
        Command::ExtensionGraph,
        Command::Height,
        Command::WidthLowerBound,
        Command::Malnormal,
        Command::Core,
        Command::Packing,
        Command::Fence,
        Command::QiChain,
        Command::Delta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::BuildComplex => "build-complex",
            Command::Ktau => "ktau",
            Command::ConedOff => "coned-off",
            Command::ExtensionGraph => "extension-graph",
            Command::Height => "height",
            Command::WidthLowerBound => "width-lower-bound",
            Command::Malnormal => "malnormal",
            Command::Core => "core",
            Command::Packing => "packing",
            Command::Fence => "fence",
            Command::QiChain => "qi-chain",
            Command::Delta => "delta",
        }
    }

    /// Produces a graph rather than a report.
    pub fn is_graph(self) -> bool {
        matches!(self, Command::BuildComplex | Command::Ktau | Command::ConedOff | Command::ExtensionGraph)
    }

    pub fn needs_seed(self) -> bool {
        matches!(self, Command::Core | Command::QiChain | Command::Delta)
    }

    /// Needs a connected triangle-free RAAG with no vertex of valence < 2.
    pub fn needs_raag_hypotheses(self) -> bool {
        matches!(self, Command::ExtensionGraph | Command::Core | Command::QiChain)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Json,
    Dot,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Dot => "dot",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "dot" => Ok(Format::Dot),
            _ => Err(format!("unknown format `{s}` (expected json or dot)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupKind {
    Free,
    Raag,
    Lattice,
    Bs,
    Product,
}

impl GroupKind {
    fn name(self) -> &'static str {
        match self {
            GroupKind::Free => "free",
            GroupKind::Raag => "raag",
            GroupKind::Lattice => "lattice",
            GroupKind::Bs => "bs",
            GroupKind::Product => "product",
        }
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            GroupKind::Free | GroupKind::Lattice => &["group", "peripherals", "rank", "generators"],
            GroupKind::Raag => &["group", "peripherals", "generators", "edges"],
            GroupKind::Bs => &["group", "peripherals", "k", "generators"],
            GroupKind::Product => &["group", "peripherals", "left", "right"],
        }
    }
}

impl FromStr for GroupKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [GroupKind::Free, GroupKind::Raag, GroupKind::Lattice, GroupKind::Bs, GroupKind::Product]
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| format!("unknown group `{s}` (expected free, raag, lattice, bs or product)"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartConfig {
    Whole,
    Index(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PeripheralsConfig {
    Keyword(String),
    Words(Vec<Vec<String>>),
    Parts(Vec<[PartConfig; 2]>),
}

/// The `[pair]` table as written.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairConfig {
    pub group: GroupKind,
    pub rank: Option<usize>,
    pub generators: Option<Vec<String>>,
    pub edges: Option<Vec<[String; 2]>>,
    pub k: Option<i64>,
    pub peripherals: PeripheralsConfig,
    pub left: Option<Box<PairConfig>>,
    pub right: Option<Box<PairConfig>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CapsConfig {
    pub max_radius: Option<usize>,
    pub max_dim: Option<usize>,
    pub max_vertices: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub format: Option<Format>,
}

/// A validated run. Unset optional fields fall back to defaults through the
/// accessor methods, and are left out by [`emit`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub command: Command,
    pub pair: PairConfig,
    pub spec: PairSpec,
    pub radius: Option<usize>,
    pub tau: Option<usize>,
    pub max_dim: Option<usize>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub relative_generators: Option<Vec<String>>,
    pub extended: Option<bool>,
    pub caps: CapsConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn radius(&self) -> usize {
        self.radius.unwrap_or(DEFAULT_RADIUS)
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim.unwrap_or(DEFAULT_MAX_DIM)
    }

    pub fn samples(&self) -> usize {
        self.samples.unwrap_or(DEFAULT_SAMPLES)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn extended(&self) -> bool {
        self.extended.unwrap_or(false)
    }

    pub fn format(&self) -> Format {
        self.output.format.unwrap_or_default()
    }

    pub fn caps(&self) -> Caps {
        let d = Caps::default();
        Caps {
            max_radius: self.caps.max_radius.unwrap_or(d.max_radius),
            max_dim: self.caps.max_dim.unwrap_or(d.max_dim),
            max_vertices: self.caps.max_vertices.unwrap_or(d.max_vertices),
        }
    }

    pub fn oracle(&self) -> cosetc_core::Result<Oracle> {
        Ok(Oracle::new(&self.spec)?.with_ball_cap(self.caps().max_vertices.max(cosetc_core::oracles::DEFAULT_BALL_CAP)))
    }

    pub fn relative_words(&self, alphabet: &Alphabet) -> cosetc_core::Result<Vec<Word>> {
        self.relative_generators.iter().flatten().map(|s| alphabet.parse(s)).collect()
    }
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub radius: Option<usize>,
    pub tau: Option<usize>,
    pub max_dim: Option<usize>,
    pub cap_vertices: Option<usize>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

/// Every problem found in a configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("; "))
    }
}

impl std::error::Error for ConfigErrors {}

fn at(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn check_keys(t: &Table, path: &str, allowed: &[&str], errs: &mut Vec<String>) {
    for k in t.keys() {
        if !allowed.contains(&k.as_str()) {
            errs.push(format!("unknown key `{}`", at(path, k)));
        }
    }
}

fn get_usize(t: &Table, path: &str, key: &str, errs: &mut Vec<String>) -> Option<usize> {
    let v = t.get(key)?;
    match v.as_integer() {
        Some(n) if n >= 0 => Some(n as usize),
        _ => {
            errs.push(format!("`{}` must be a nonnegative integer", at(path, key)));
            None
        }
    }
}

fn get_str<'a>(t: &'a Table, path: &str, key: &str, errs: &mut Vec<String>) -> Option<&'a str> {
    let v = t.get(key)?;
    let s = v.as_str();
    if s.is_none() {
        errs.push(format!("`{}` must be a string", at(path, key)));
    }
    s
}

fn get_strings(t: &Table, path: &str, key: &str, errs: &mut Vec<String>) -> Option<Vec<String>> {
    let v = t.get(key)?;
    let out = v.as_array().and_then(|a| a.iter().map(|x| x.as_str().map(String::from)).collect::<Option<Vec<_>>>());
    if out.is_none() {
        errs.push(format!("`{}` must be an array of strings", at(path, key)));
    }
    out
}

fn parse_part(v: &Value) -> Option<PartConfig> {
    match v {
        Value::String(s) if s == "whole" => Some(PartConfig::Whole),
        Value::Integer(n) if *n >= 0 => Some(PartConfig::Index(*n as usize)),
        _ => None,
    }
}

fn parse_peripherals(v: &Value, path: &str, group: GroupKind, errs: &mut Vec<String>) -> Option<PeripheralsConfig> {
    let key = at(path, "peripherals");
    if let Some(s) = v.as_str() {
        if group != GroupKind::Raag {
            errs.push(format!("`{key}`: keywords are only available for raag pairs"));
            return None;
        }
        if s != "maximal-standard-abelians" && s != "stars" {
            errs.push(format!("`{key}`: unknown keyword `{s}` (expected maximal-standard-abelians or stars)"));
            return None;
        }
        return Some(PeripheralsConfig::Keyword(s.into()));
    }
    let Some(items) = v.as_array() else {
        errs.push(format!("`{key}` must be an array or a keyword"));
        return None;
    };
    if items.is_empty() {
        errs.push(format!("`{key}` must list at least one peripheral subgroup"));
        return None;
    }
    if group == GroupKind::Product {
        let mut parts = Vec::new();
        for (i, item) in items.iter().enumerate() {
            match item.as_array().map(|a| a.iter().map(parse_part).collect::<Option<Vec<_>>>()) {
                Some(Some(p)) if p.len() == 2 => parts.push([p[0], p[1]]),
                _ => errs.push(format!("`{key}[{i}]` must be a pair of factor peripheral indices or \"whole\"")),
            }
        }
        return (parts.len() == items.len()).then_some(PeripheralsConfig::Parts(parts));
    }
    let mut words = Vec::new();
    for (i, item) in items.iter().enumerate() {
        match item.as_array().and_then(|a| a.iter().map(|x| x.as_str().map(String::from)).collect::<Option<Vec<_>>>()) {
            Some(ws) if !ws.is_empty() => words.push(ws),
            Some(_) => errs.push(format!("`{key}[{i}]` has no generators, so the subgroup is finite")),
            None => errs.push(format!("`{key}[{i}]` must be an array of words")),
        }
    }
    (words.len() == items.len()).then_some(PeripheralsConfig::Words(words))
}

fn parse_pair(t: &Table, path: &str, errs: &mut Vec<String>) -> Option<PairConfig> {
    let group = match get_str(t, path, "group", errs) {
        Some(s) => match s.parse::<GroupKind>() {
            Ok(g) => Some(g),
            Err(e) => {
                errs.push(format!("`{}`: {e}", at(path, "group")));
                None
            }
        },
        None => {
            if !t.contains_key("group") {
                errs.push(format!("missing `{}`", at(path, "group")));
            }
            None
        }
    };
    let group = group?;
    for k in t.keys() {
        if !group.keys().contains(&k.as_str()) {
            let known = ["rank", "generators", "edges", "k", "left", "right"].contains(&k.as_str());
            if known {
                errs.push(format!("`{}` is not used by {} pairs", at(path, k), group.name()));
            } else {
                errs.push(format!("unknown key `{}`", at(path, k)));
            }
        }
    }
    let rank = get_usize(t, path, "rank", errs);
    let generators = get_strings(t, path, "generators", errs);
    let k = t.get("k").and_then(|v| {
        let k = v.as_integer();
        if k.is_none() {
            errs.push(format!("`{}` must be an integer", at(path, "k")));
        }
        k
    });
    let edges = t.get("edges").and_then(|v| {
        let e = v.as_array().and_then(|a| {
            a.iter()
                .map(|e| match e.as_array().map(|p| p.as_slice()) {
                    Some([Value::String(u), Value::String(v)]) => Some([u.clone(), v.clone()]),
                    _ => None,
                })
                .collect::<Option<Vec<_>>>()
        });
        if e.is_none() {
            errs.push(format!("`{}` must be an array of [vertex, vertex] pairs", at(path, "edges")));
        }
        e
    });
    let sub = |key: &str, errs: &mut Vec<String>| -> Option<Box<PairConfig>> {
        let v = t.get(key)?;
        match v.as_table() {
            Some(st) => parse_pair(st, &at(path, key), errs).map(Box::new),
            None => {
                errs.push(format!("`{}` must be a table", at(path, key)));
                None
            }
        }
    };
    let left = sub("left", errs);
    let right = sub("right", errs);
    let peripherals = match t.get("peripherals") {
        Some(v) => parse_peripherals(v, path, group, errs),
        None => {
            errs.push(format!("missing `{}`", at(path, "peripherals")));
            None
        }
    };
    Some(PairConfig { group, rank, generators, edges, k, peripherals: peripherals?, left, right })
}

fn peripheral_words(alphabet: &Alphabet, words: &[Vec<String>], path: &str, errs: &mut Vec<String>) -> Vec<PeripheralSpec> {
    let mut out = Vec::new();
    for (i, ws) in words.iter().enumerate() {
        let mut parsed = Vec::new();
        for w in ws {
            match alphabet.parse(w) {
                Ok(x) => parsed.push(x),
                Err(e) => errs.push(format!("`{}[{i}]`: {e}", at(path, "peripherals"))),
            }
        }
        out.push(PeripheralSpec::Generators(parsed));
    }
    out
}

fn alphabet_for(pair: &PairConfig, path: &str, default: impl FnOnce(usize) -> Alphabet, errs: &mut Vec<String>) -> Option<(usize, Alphabet)> {
    let rank = match (&pair.generators, pair.rank) {
        (Some(g), Some(r)) if g.len() != r => {
            errs.push(format!("`{}` has {} names but rank is {r}", at(path, "generators"), g.len()));
            return None;
        }
        (Some(g), _) => g.len(),
        (None, Some(r)) => r,
        (None, None) => {
            errs.push(format!("`{}` needs `rank` or `generators`", path));
            return None;
        }
    };
    match &pair.generators {
        Some(names) => match Alphabet::new(names.clone()) {
            Ok(a) => Some((rank, a)),
            Err(e) => {
                errs.push(format!("`{}`: {e}", at(path, "generators")));
                None
            }
        },
        None => Some((rank, default(rank))),
    }
}

/// Translate the written pair into a spec and validate each peripheral on
/// its own, so that every finite peripheral is reported.
fn pair_spec(pair: &PairConfig, path: &str, errs: &mut Vec<String>) -> Option<PairSpec> {
    let before = errs.len();
    let names = pair.generators.clone();
    let words = |errs: &mut Vec<String>, alphabet: &Alphabet| match &pair.peripherals {
        PeripheralsConfig::Words(ws) => Some(peripheral_words(alphabet, ws, path, errs)),
        _ => None,
    };
    let spec = match pair.group {
        GroupKind::Free | GroupKind::Lattice => {
            let (rank, alphabet) = alphabet_for(pair, path, |r| Alphabet::indexed("x", r), errs)?;
            let peripherals = words(errs, &alphabet)?;
            let group = if pair.group == GroupKind::Free { GroupSpec::Free { rank } } else { GroupSpec::Lattice { rank } };
            PairSpec { group, names, peripherals }
        }
        GroupKind::Bs => {
            let Some(k) = pair.k else {
                errs.push(format!("missing `{}`", at(path, "k")));
                return None;
            };
            let alphabet = match &names {
                Some(n) if n.len() != 2 => {
                    errs.push(format!("`{}` must name exactly two generators", at(path, "generators")));
                    return None;
                }
                Some(n) => Alphabet::new(n.clone()).ok()?,
                None => Alphabet::from_strs(&["a", "t"]).expect("valid names"),
            };
            PairSpec { group: GroupSpec::Bs { k }, names, peripherals: words(errs, &alphabet)? }
        }
        GroupKind::Raag => {
            let Some(vnames) = &names else {
                errs.push(format!("`{}` must name the vertices of the defining graph", at(path, "generators")));
                return None;
            };
            let alphabet = match Alphabet::new(vnames.clone()) {
                Ok(a) => a,
                Err(e) => {
                    errs.push(format!("`{}`: {e}", at(path, "generators")));
                    return None;
                }
            };
            let mut edges = Vec::new();
            for [u, v] in pair.edges.iter().flatten() {
                match (alphabet.index_of(u), alphabet.index_of(v)) {
                    (Some(a), Some(b)) => edges.push((a, b)),
                    _ => errs.push(format!("`{}`: unknown vertex in [{u}, {v}]", at(path, "edges"))),
                }
            }
            let graph = match DefiningGraph::new(vnames.len(), &edges) {
                Ok(g) => g,
                Err(e) => {
                    errs.push(format!("`{}`: {e}", at(path, "edges")));
                    return None;
                }
            };
            let peripherals = match &pair.peripherals {
                PeripheralsConfig::Keyword(k) if k == "stars" => vec![PeripheralSpec::Stars],
                PeripheralsConfig::Keyword(_) => {
                    if !graph.is_triangle_free() {
                        errs.push(format!(
                            "`{}`: maximal-standard-abelians needs a triangle-free defining graph",
                            at(path, "peripherals")
                        ));
                        return None;
                    }
                    vec![PeripheralSpec::MaximalStandardAbelians]
                }
                PeripheralsConfig::Words(ws) => peripheral_words(&alphabet, ws, path, errs),
                PeripheralsConfig::Parts(_) => return None,
            };
            PairSpec { group: GroupSpec::Raag { graph }, names, peripherals }
        }
        GroupKind::Product => {
            let (Some(l), Some(r)) = (&pair.left, &pair.right) else {
                errs.push(format!("`{path}`: product pairs need `left` and `right` tables"));
                return None;
            };
            let left = pair_spec(l, &at(path, "left"), errs);
            let right = pair_spec(r, &at(path, "right"), errs);
            let PeripheralsConfig::Parts(parts) = &pair.peripherals else { return None };
            let to_part = |p: PartConfig| match p {
                PartConfig::Whole => Part::Whole,
                PartConfig::Index(i) => Part::Peripheral(i),
            };
            let peripherals = parts.iter().map(|[a, b]| PeripheralSpec::Product(to_part(*a), to_part(*b))).collect();
            PairSpec {
                group: GroupSpec::Product { left: Box::new(left?), right: Box::new(right?) },
                names,
                peripherals,
            }
        }
    };
    if errs.len() > before {
        return None;
    }
    if !matches!(spec.group, GroupSpec::Product { .. }) {
        for (i, p) in spec.peripherals.iter().enumerate() {
            let one = PairSpec { peripherals: vec![p.clone()], ..spec.clone() };
            if let Err(e) = Oracle::new(&one) {
                errs.push(format!("`{}[{i}]`: {}", at(path, "peripherals"), e.to_string().replace("peripheral 0", "peripheral")));
            }
        }
    }
    if errs.len() == before {
        if let Err(e) = Oracle::new(&spec) {
            errs.push(format!("`{path}`: {e}"));
        }
    }
    (errs.len() == before).then_some(spec)
}

const TOP_KEYS: &[&str] = &[
    "command",
    "pair",
    "radius",
    "tau",
    "max_dim",
    "seed",
    "samples",
    "relative_generators",
    "extended",
    "caps",
    "output",
];

/// Parse and validate a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    parse_config_with(text, &Overrides::default())
}

/// Parse a configuration, apply command-line overrides, then validate.
pub fn parse_config_with(text: &str, ov: &Overrides) -> Result<RunConfig, ConfigErrors> {
    let table: Table = toml::from_str(text).map_err(|e| ConfigErrors(vec![format!("syntax: {}", e.message())]))?;
    let mut errs = Vec::new();
    check_keys(&table, "", TOP_KEYS, &mut errs);

    let command = match get_str(&table, "", "command", &mut errs) {
        Some(s) => s.parse::<Command>().map_err(|e| errs.push(e)).ok(),
        None => {
            if !table.contains_key("command") {
                errs.push("missing `command`".into());
            }
            None
        }
    };
    let radius = ov.radius.or(get_usize(&table, "", "radius", &mut errs));
    let tau = ov.tau.or(get_usize(&table, "", "tau", &mut errs));
    let max_dim = ov.max_dim.or(get_usize(&table, "", "max_dim", &mut errs));
    let samples = get_usize(&table, "", "samples", &mut errs);
    let seed = ov.seed.or(get_usize(&table, "", "seed", &mut errs).map(|s| s as u64));
    let relative_generators = get_strings(&table, "", "relative_generators", &mut errs);
    let extended = table.get("extended").and_then(|v| {
        let b = v.as_bool();
        if b.is_none() {
            errs.push("`extended` must be a boolean".into());
        }
        b
    });

    let mut caps = CapsConfig::default();
    if let Some(v) = table.get("caps") {
        match v.as_table() {
            Some(t) => {
                check_keys(t, "caps", &["max_radius", "max_dim", "max_vertices"], &mut errs);
                caps.max_radius = get_usize(t, "caps", "max_radius", &mut errs);
                caps.max_dim = get_usize(t, "caps", "max_dim", &mut errs);
                caps.max_vertices = get_usize(t, "caps", "max_vertices", &mut errs);
            }
            None => errs.push("`caps` must be a table".into()),
        }
    }
    if ov.cap_vertices.is_some() {
        caps.max_vertices = ov.cap_vertices;
    }
    let mut output = OutputConfig::default();
    if let Some(v) = table.get("output") {
        match v.as_table() {
            Some(t) => {
                check_keys(t, "output", &["dir", "format"], &mut errs);
                output.dir = get_str(t, "output", "dir", &mut errs).map(PathBuf::from);
                output.format = get_str(t, "output", "format", &mut errs).and_then(|s| s.parse().map_err(|e| errs.push(e)).ok());
            }
            None => errs.push("`output` must be a table".into()),
        }
    }
    if ov.out.is_some() {
        output.dir = ov.out.clone();
    }
    if ov.format.is_some() {
        output.format = ov.format;
    }

    let pair = match table.get("pair") {
        Some(Value::Table(t)) => parse_pair(t, "pair", &mut errs),
        Some(_) => {
            errs.push("`pair` must be a table".into());
            None
        }
        None => {
            errs.push("missing `[pair]` table".into());
            None
        }
    };
    let spec = pair.as_ref().and_then(|p| pair_spec(p, "pair", &mut errs));

    for (name, value) in [("caps.max_radius", caps.max_radius), ("caps.max_dim", caps.max_dim), ("caps.max_vertices", caps.max_vertices)] {
        if value == Some(0) {
            errs.push(format!("`{name}` must be positive"));
        }
    }
    if samples == Some(0) {
        errs.push("`samples` must be positive".into());
    }
    let defaults = Caps::default();
    let max_radius = caps.max_radius.unwrap_or(defaults.max_radius);
    if radius.unwrap_or(DEFAULT_RADIUS) > max_radius {
        errs.push(format!("radius {} exceeds caps.max_radius = {max_radius}", radius.unwrap_or(DEFAULT_RADIUS)));
    }
    let dim_cap = caps.max_dim.unwrap_or(defaults.max_dim);
    if max_dim.unwrap_or(DEFAULT_MAX_DIM) > dim_cap {
        errs.push(format!("max_dim {} exceeds caps.max_dim = {dim_cap}", max_dim.unwrap_or(DEFAULT_MAX_DIM)));
    }

    if let Some(cmd) = command {
        if cmd.needs_seed() && seed.is_none() {
            errs.push(format!("command `{cmd}` samples and needs a `seed`"));
        }
        if cmd == Command::Ktau && tau.is_none() {
            errs.push("command `ktau` needs `tau`".into());
        }
        if cmd != Command::Ktau && tau.is_some() {
            errs.push(format!("`tau` is only used by `ktau`, not `{cmd}`"));
        }
        if cmd != Command::ConedOff && (relative_generators.is_some() || extended.is_some()) {
            errs.push(format!("`relative_generators` and `extended` are only used by `coned-off`, not `{cmd}`"));
        }
        if !cmd.is_graph() && output.format == Some(Format::Dot) {
            errs.push(format!("command `{cmd}` writes a JSON report; dot output is only for graph commands"));
        }
        if let Some(p) = &pair {
            command_checks(cmd, p.group, spec.as_ref(), relative_generators.as_deref(), &mut errs);
        }
    }

    if !errs.is_empty() {
        return Err(ConfigErrors(errs));
    }
    Ok(RunConfig {
        command: command.expect("checked"),
        pair: pair.expect("checked"),
        spec: spec.expect("checked"),
        radius,
        tau,
        max_dim,
        seed,
        samples,
        relative_generators,
        extended,
        caps,
        output,
    })
}

fn command_checks(cmd: Command, kind: GroupKind, spec: Option<&PairSpec>, relative: Option<&[String]>, errs: &mut Vec<String>) {
    if cmd.needs_raag_hypotheses() {
        match spec.map(|s| &s.group) {
            _ if kind != GroupKind::Raag => errs.push(format!("command `{cmd}` needs a raag pair, got {}", kind.name())),
            Some(GroupSpec::Raag { graph }) => {
                if let Err(e) = check_raag_hypotheses(graph) {
                    let reason = e.to_string();
                    errs.push(format!(
                        "command `{cmd}` needs a connected triangle-free defining graph with every vertex of valence ≥ 2 ({})",
                        reason.trim_start_matches("unsupported by this backend: ")
                    ));
                }
            }
            _ => {}
        }
    }
    if cmd == Command::Ktau && kind != GroupKind::Free {
        errs.push(format!("command `ktau` needs a free pair, got {}", kind.name()));
    }
    if cmd == Command::ConedOff {
        let Some(Ok(oracle)) = spec.map(Oracle::new) else { return };
        let mut words = Vec::new();
        for s in relative.unwrap_or_default() {
            match oracle.alphabet().parse(s) {
                Ok(w) => words.push(w),
                Err(e) => errs.push(format!("`relative_generators`: {e}")),
            }
        }
        if words.len() == relative.map_or(0, |r| r.len()) {
            match oracle.generates_with(&words) {
                Ok(true) => {}
                Ok(false) => errs.push(
                    "`relative_generators` together with the peripherals do not generate the group".into(),
                ),
                Err(e) => errs.push(format!("`relative_generators`: {e}")),
            }
        }
    }
}

fn int(n: usize) -> Value {
    Value::Integer(n as i64)
}

fn strings(v: &[String]) -> Value {
    Value::Array(v.iter().cloned().map(Value::String).collect())
}

fn emit_pair(p: &PairConfig) -> Table {
    let mut t = Table::new();
    t.insert("group".into(), Value::String(p.group.name().into()));
    if let Some(r) = p.rank {
        t.insert("rank".into(), int(r));
    }
    if let Some(g) = &p.generators {
        t.insert("generators".into(), strings(g));
    }
    if let Some(e) = &p.edges {
        t.insert("edges".into(), Value::Array(e.iter().map(|e| strings(e)).collect()));
    }
    if let Some(k) = p.k {
        t.insert("k".into(), Value::Integer(k));
    }
    let perips = match &p.peripherals {
        PeripheralsConfig::Keyword(k) => Value::String(k.clone()),
        PeripheralsConfig::Words(ws) => Value::Array(ws.iter().map(|w| strings(w)).collect()),
        PeripheralsConfig::Parts(ps) => Value::Array(
            ps.iter()
                .map(|pair| {
                    Value::Array(
                        pair.iter()
                            .map(|x| match x {
                                PartConfig::Whole => Value::String("whole".into()),
                                PartConfig::Index(i) => int(*i),
                            })
                            .collect(),
                    )
                })
                .collect(),
        ),
    };
    t.insert("peripherals".into(), perips);
    if let Some(l) = &p.left {
        t.insert("left".into(), Value::Table(emit_pair(l)));
    }
    if let Some(r) = &p.right {
        t.insert("right".into(), Value::Table(emit_pair(r)));
    }
    t
}

/// Normalized TOML for a configuration; [`parse_config`] reads it back to
/// the same value.
pub fn emit(c: &RunConfig) -> String {
    let mut t = Table::new();
    t.insert("command".into(), Value::String(c.command.name().into()));
    for (k, v) in [("radius", c.radius), ("tau", c.tau), ("max_dim", c.max_dim), ("samples", c.samples)] {
        if let Some(v) = v {
            t.insert(k.into(), int(v));
        }
    }
    if let Some(s) = c.seed {
        t.insert("seed".into(), Value::Integer(s as i64));
    }
    if let Some(r) = &c.relative_generators {
        t.insert("relative_generators".into(), strings(r));
    }
    if let Some(e) = c.extended {
        t.insert("extended".into(), Value::Boolean(e));
    }
    let mut caps = Table::new();
    for (k, v) in [("max_radius", c.caps.max_radius), ("max_dim", c.caps.max_dim), ("max_vertices", c.caps.max_vertices)] {
        if let Some(v) = v {
            caps.insert(k.into(), int(v));
        }
    }
    if !caps.is_empty() {
        t.insert("caps".into(), Value::Table(caps));
    }
    let mut out = Table::new();
    if let Some(d) = &c.output.dir {
        out.insert("dir".into(), Value::String(d.to_string_lossy().into_owned()));
    }
    if let Some(f) = c.output.format {
        out.insert("format".into(), Value::String(f.name().into()));
    }
    if !out.is_empty() {
        t.insert("output".into(), Value::Table(out));
    }
    t.insert("pair".into(), Value::Table(emit_pair(&c.pair)));
    toml::to_string(&t).expect("tables serialize")
}
