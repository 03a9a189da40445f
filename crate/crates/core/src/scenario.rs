//! Experiment configuration: geometry, radio and computing constants.
//!
//! A [`Scenario`] is parsed from flat `key = value` text. Every key is
//! optional; missing keys take the reference values returned by
//! [`Scenario::default`]. Unknown keys are rejected so that a typo never
//! silently falls back to a default.
//!
//! Decibel quantities are stored exactly as given and converted on demand
//! with [`dbm_to_watts`] / [`db_to_ratio`].

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Links closer than this are evaluated at this distance.
pub const MIN_LINK_DISTANCE_M: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("invalid `{field}`: {msg}")]
    Validation { field: &'static str, msg: String },
}

impl ScenarioError {
    fn invalid(field: &'static str, msg: impl Into<String>) -> Self {
        ScenarioError::Validation {
            field,
            msg: msg.into(),
        }
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

pub fn db_to_ratio(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn ratio_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Surface operating mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// All-passive surface, phases drawn once at random.
    RisRandom,
    /// All-passive surface with aligned phases.
    RisOptimized,
    /// Hybrid surface, active elements at preset positions.
    HrrisFixed,
    /// Hybrid surface, active elements chosen per realization.
    HrrisDynamic,
}

impl Mode {
    pub const ALL: [Mode; 4] = [
        Mode::RisRandom,
        Mode::RisOptimized,
        Mode::HrrisFixed,
        Mode::HrrisDynamic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::RisRandom => "ris_random",
            Mode::RisOptimized => "ris_optimized",
            Mode::HrrisFixed => "hrris_fixed",
            Mode::HrrisDynamic => "hrris_dynamic",
        }
    }

    pub fn is_hybrid(self) -> bool {
        matches!(self, Mode::HrrisFixed | Mode::HrrisDynamic)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

/// One value per propagation link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerLink<T> {
    pub user_en: T,
    pub user_hrris: T,
    pub user_eve: T,
    pub hrris_en: T,
}

impl<T: Copy> PerLink<T> {
    fn to_array(self) -> [T; 4] {
        [self.user_en, self.user_hrris, self.user_eve, self.hrris_en]
    }

    fn from_array(a: [T; 4]) -> Self {
        PerLink {
            user_en: a[0],
            user_hrris: a[1],
            user_eve: a[2],
            hrris_en: a[3],
        }
    }
}

/// Node coordinates in meters. The edge node sits at the origin and the
/// surface on the x-axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub x_h: f64,
    pub x_u: f64,
    pub y_u: f64,
    pub x_eve: f64,
    pub y_eve: f64,
}

impl Geometry {
    pub fn en(&self) -> (f64, f64) {
        (0.0, 0.0)
    }

    pub fn hrris(&self) -> (f64, f64) {
        (self.x_h, 0.0)
    }

    pub fn user(&self) -> (f64, f64) {
        (self.x_u, self.y_u)
    }

    pub fn eve(&self) -> (f64, f64) {
        (self.x_eve, self.y_eve)
    }

    pub fn distances(&self) -> DistanceSet {
        DistanceSet(PerLink {
            user_en: distance(self.user(), self.en()),
            user_hrris: distance(self.user(), self.hrris()),
            user_eve: distance(self.user(), self.eve()),
            hrris_en: distance(self.hrris(), self.en()),
        })
    }
}

pub fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Euclidean link lengths in meters, unclamped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceSet(pub PerLink<f64>);

impl DistanceSet {
    /// Names of links whose endpoints coincide.
    pub fn degenerate(&self) -> Vec<&'static str> {
        let names = ["user_en", "user_hrris", "user_eve", "hrris_en"];
        names
            .into_iter()
            .zip(self.0.to_array())
            .filter(|(_, d)| *d <= 0.0)
            .map(|(n, _)| n)
            .collect()
    }

    pub fn is_degenerate(&self) -> bool {
        !self.degenerate().is_empty()
    }

    /// Distances as used by the path-loss model.
    pub fn clamped(&self) -> PerLink<f64> {
        PerLink::from_array(self.0.to_array().map(|d| d.max(MIN_LINK_DISTANCE_M)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComputeParams {
    /// Task size `L` in bits.
    pub total_bits: u64,
    /// CPU cycles needed per bit.
    pub cycles_per_bit: u64,
    /// User CPU speed, cycles/s.
    pub local_rate: f64,
    /// Edge server CPU speed, cycles/s.
    pub edge_rate: f64,
}

impl ComputeParams {
    /// Latency when every bit is processed on the user device.
    pub fn local_only_latency(&self) -> f64 {
        self.total_bits as f64 * self.cycles_per_bit as f64 / self.local_rate
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        if self.total_bits == 0 {
            return Err(ScenarioError::invalid("total_bits", "must be positive"));
        }
        if self.cycles_per_bit == 0 {
            return Err(ScenarioError::invalid("cycles_per_bit", "must be positive"));
        }
        positive("local_rate", self.local_rate)?;
        positive("edge_rate", self.edge_rate)?;
        Ok(())
    }
}

impl Default for ComputeParams {
    fn default() -> Self {
        ComputeParams {
            total_bits: 300_000,
            cycles_per_bit: 750,
            local_rate: 5e8,
            edge_rate: 20e9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub m_antennas: usize,
    pub e_antennas: usize,
    pub n_elements: usize,
    pub a_active: usize,
    pub mode: Mode,
    /// Zero-based, ascending. Written one-based in config text.
    pub fixed_active_set: Vec<usize>,
    pub p_total_dbm: f64,
    pub p_active_max_dbm: f64,
    pub noise_power_dbm: f64,
    pub eve_noise_power_dbm: f64,
    pub bandwidth_hz: f64,
    pub csi_error_bound: f64,
    pub geometry: Geometry,
    pub pathloss_ref_db: f64,
    pub pathloss_exponents: PerLink<f64>,
    pub rician_factors: PerLink<f64>,
    pub upa_shape: (usize, usize),
    pub compute: ComputeParams,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            m_antennas: 5,
            e_antennas: 1,
            n_elements: 50,
            a_active: 1,
            mode: Mode::HrrisDynamic,
            fixed_active_set: vec![0],
            p_total_dbm: 30.0,
            p_active_max_dbm: 0.0,
            noise_power_dbm: -80.0,
            eve_noise_power_dbm: -80.0,
            bandwidth_hz: 1e6,
            csi_error_bound: 0.1,
            geometry: Geometry {
                x_h: 50.0,
                x_u: 45.0,
                y_u: 2.0,
                x_eve: 30.0,
                y_eve: 9.0,
            },
            pathloss_ref_db: -30.0,
            pathloss_exponents: PerLink {
                user_en: 3.5,
                user_hrris: 2.2,
                user_eve: 2.8,
                hrris_en: 2.2,
            },
            rician_factors: PerLink {
                user_en: 0.0,
                user_hrris: 1.0,
                user_eve: 0.0,
                hrris_en: 100.0,
            },
            upa_shape: (5, 10),
            compute: ComputeParams::default(),
        }
    }
}

/// Factor pair `(r, c)` with `r * c = n`, `r <= c` and `c - r` minimal.
pub fn squarest_shape(n: usize) -> (usize, usize) {
    if n == 0 {
        return (0, 0);
    }
    let mut r = (n as f64).sqrt() as usize;
    while r > 1 && !n.is_multiple_of(r) {
        r -= 1;
    }
    let r = r.max(1);
    (r, n / r)
}

fn positive(field: &'static str, v: f64) -> Result<(), ScenarioError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ScenarioError::invalid(field, format!("must be finite and > 0, got {v}")))
    }
}

fn finite(field: &'static str, v: f64) -> Result<(), ScenarioError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ScenarioError::invalid(field, format!("must be finite, got {v}")))
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.m_antennas == 0 {
            return Err(ScenarioError::invalid("m_antennas", "must be positive"));
        }
        if self.e_antennas == 0 {
            return Err(ScenarioError::invalid("e_antennas", "must be positive"));
        }
        if self.a_active > self.n_elements {
            return Err(ScenarioError::invalid(
                "a_active",
                format!("{} exceeds n_elements {}", self.a_active, self.n_elements),
            ));
        }
        let set = &self.fixed_active_set;
        if set.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ScenarioError::invalid(
                "fixed_active_set",
                "indices must be strictly increasing",
            ));
        }
        if let Some(&bad) = set.iter().find(|&&i| i >= self.n_elements) {
            return Err(ScenarioError::invalid(
                "fixed_active_set",
                format!("index {} outside 1..={}", bad + 1, self.n_elements),
            ));
        }
        if set.len() > self.a_active
            || (self.mode == Mode::HrrisFixed && set.len() != self.a_active)
        {
            return Err(ScenarioError::invalid(
                "fixed_active_set",
                format!("has {} entries, a_active is {}", set.len(), self.a_active),
            ));
        }
        finite("p_total_dbm", self.p_total_dbm)?;
        finite("p_active_max_dbm", self.p_active_max_dbm)?;
        finite("noise_power_dbm", self.noise_power_dbm)?;
        finite("eve_noise_power_dbm", self.eve_noise_power_dbm)?;
        finite("pathloss_ref_db", self.pathloss_ref_db)?;
        if self.p_active_max_dbm >= self.p_total_dbm {
            return Err(ScenarioError::invalid(
                "p_active_max_dbm",
                "must be below p_total_dbm so the user keeps positive power",
            ));
        }
        positive("bandwidth_hz", self.bandwidth_hz)?;
        if !(self.csi_error_bound.is_finite() && self.csi_error_bound >= 0.0) {
            return Err(ScenarioError::invalid("csi_error_bound", "must be finite and >= 0"));
        }
        let g = &self.geometry;
        for (field, v) in [
            ("x_h_m", g.x_h),
            ("x_u_m", g.x_u),
            ("y_u_m", g.y_u),
            ("x_eve_m", g.x_eve),
            ("y_eve_m", g.y_eve),
        ] {
            finite(field, v)?;
        }
        let degenerate = g.distances().degenerate();
        if let Some(link) = degenerate.first() {
            return Err(ScenarioError::invalid(
                "geometry",
                format!("zero-length link {link}"),
            ));
        }
        for v in self.pathloss_exponents.to_array() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ScenarioError::invalid("pathloss_exponents", "must be finite and >= 0"));
            }
        }
        for v in self.rician_factors.to_array() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ScenarioError::invalid("rician_factors", "must be finite and >= 0"));
            }
        }
        if self.upa_shape.0 * self.upa_shape.1 != self.n_elements {
            return Err(ScenarioError::invalid(
                "upa_shape",
                format!(
                    "{}x{} does not hold {} elements",
                    self.upa_shape.0, self.upa_shape.1, self.n_elements
                ),
            ));
        }
        self.compute.validate()
    }

    /// Copy of this scenario solved in another mode.
    pub fn with_mode(&self, mode: Mode) -> Scenario {
        let mut s = self.clone();
        s.mode = mode;
        if mode == Mode::HrrisFixed && s.fixed_active_set.len() != s.a_active {
            s.fixed_active_set = (0..s.a_active).collect();
        }
        s
    }

    /// Number of elements allowed to amplify in the current mode.
    pub fn active_budget(&self) -> usize {
        if self.mode.is_hybrid() {
            self.a_active
        } else {
            0
        }
    }

    /// Amplifier budget `P_a^max` in watts; zero for passive modes.
    pub fn active_power_max_w(&self) -> f64 {
        if self.active_budget() > 0 {
            dbm_to_watts(self.p_active_max_dbm)
        } else {
            0.0
        }
    }

    /// User transmit power under the equal total-power rule.
    pub fn user_power_w(&self) -> f64 {
        dbm_to_watts(self.p_total_dbm) - self.active_power_max_w()
    }

    pub fn noise_power_w(&self) -> f64 {
        dbm_to_watts(self.noise_power_dbm)
    }

    pub fn eve_noise_power_w(&self) -> f64 {
        dbm_to_watts(self.eve_noise_power_dbm)
    }

    pub fn link_distances(&self) -> DistanceSet {
        self.geometry.distances()
    }

    /// Parse config text on top of [`Scenario::default`] and validate.
    pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        let mut s = Scenario::default();
        let mut saw_upa = false;
        let mut saw_fixed = false;
        let mut saw_n = false;
        let mut saw_a = false;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ScenarioError::Parse {
                line,
                msg: format!("expected `key = value`, got `{content}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let perr = |msg: String| ScenarioError::Parse { line, msg };

            match key {
                "m_antennas" => s.m_antennas = parse_num(key, value).map_err(perr)?,
                "e_antennas" => s.e_antennas = parse_num(key, value).map_err(perr)?,
                "n_elements" => {
                    s.n_elements = parse_num(key, value).map_err(perr)?;
                    saw_n = true;
                }
                "a_active" => {
                    s.a_active = parse_num(key, value).map_err(perr)?;
                    saw_a = true;
                }
                "mode" => s.mode = value.parse().map_err(perr)?,
                "fixed_active_set" => {
                    let one_based: Vec<usize> = parse_list(key, value).map_err(perr)?;
                    if one_based.contains(&0) {
                        return Err(perr("fixed_active_set indices are 1-based".into()));
                    }
                    s.fixed_active_set = one_based.into_iter().map(|i| i - 1).collect();
                    saw_fixed = true;
                }
                "p_total_dbm" => s.p_total_dbm = parse_num(key, value).map_err(perr)?,
                "p_active_max_dbm" => s.p_active_max_dbm = parse_num(key, value).map_err(perr)?,
                "noise_power_dbm" => s.noise_power_dbm = parse_num(key, value).map_err(perr)?,
                "eve_noise_power_dbm" => {
                    s.eve_noise_power_dbm = parse_num(key, value).map_err(perr)?
                }
                "bandwidth_hz" => s.bandwidth_hz = parse_num(key, value).map_err(perr)?,
                "csi_error_bound" => s.csi_error_bound = parse_num(key, value).map_err(perr)?,
                "x_h_m" => s.geometry.x_h = parse_num(key, value).map_err(perr)?,
                "x_u_m" => s.geometry.x_u = parse_num(key, value).map_err(perr)?,
                "y_u_m" => s.geometry.y_u = parse_num(key, value).map_err(perr)?,
                "x_eve_m" => s.geometry.x_eve = parse_num(key, value).map_err(perr)?,
                "y_eve_m" => s.geometry.y_eve = parse_num(key, value).map_err(perr)?,
                "pathloss_ref_db" => s.pathloss_ref_db = parse_num(key, value).map_err(perr)?,
                "pathloss_exponents" => {
                    s.pathloss_exponents = parse_per_link(key, value).map_err(perr)?
                }
                "rician_factors" => s.rician_factors = parse_per_link(key, value).map_err(perr)?,
                "upa_shape" => {
                    let v: Vec<usize> = parse_list(key, value).map_err(perr)?;
                    if v.len() != 2 {
                        return Err(perr("upa_shape takes `rows, cols`".into()));
                    }
                    s.upa_shape = (v[0], v[1]);
                    saw_upa = true;
                }
                "total_bits" => s.compute.total_bits = parse_num(key, value).map_err(perr)?,
                "cycles_per_bit" => s.compute.cycles_per_bit = parse_num(key, value).map_err(perr)?,
                "local_rate" => s.compute.local_rate = parse_num(key, value).map_err(perr)?,
                "edge_rate" => s.compute.edge_rate = parse_num(key, value).map_err(perr)?,
                _ => {
                    return Err(ScenarioError::UnknownKey {
                        line,
                        key: key.to_string(),
                    })
                }
            }
        }

        if saw_n && !saw_upa {
            s.upa_shape = squarest_shape(s.n_elements);
        }
        if (saw_n || saw_a) && !saw_fixed {
            s.fixed_active_set = (0..s.a_active.min(s.n_elements)).collect();
        }
        s.validate()?;
        Ok(s)
    }

    /// Render every field as config text. `Scenario::parse` of the output
    /// reproduces `self` exactly.
    pub fn to_config_string(&self) -> String {
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let g = &self.geometry;
        let fixed = self
            .fixed_active_set
            .iter()
            .map(|i| (i + 1).to_string())
            .collect::<Vec<_>>()
            .join(", ");
        let lines = [
            format!("m_antennas = {}", self.m_antennas),
            format!("e_antennas = {}", self.e_antennas),
            format!("n_elements = {}", self.n_elements),
            format!("a_active = {}", self.a_active),
            format!("mode = {}", self.mode),
            format!("fixed_active_set = {fixed}"),
            format!("p_total_dbm = {}", self.p_total_dbm),
            format!("p_active_max_dbm = {}", self.p_active_max_dbm),
            format!("noise_power_dbm = {}", self.noise_power_dbm),
            format!("eve_noise_power_dbm = {}", self.eve_noise_power_dbm),
            format!("bandwidth_hz = {}", self.bandwidth_hz),
            format!("csi_error_bound = {}", self.csi_error_bound),
            format!("x_h_m = {}", g.x_h),
            format!("x_u_m = {}", g.x_u),
            format!("y_u_m = {}", g.y_u),
            format!("x_eve_m = {}", g.x_eve),
            format!("y_eve_m = {}", g.y_eve),
            format!("pathloss_ref_db = {}", self.pathloss_ref_db),
            format!(
                "pathloss_exponents = {}",
                join(&self.pathloss_exponents.to_array())
            ),
            format!("rician_factors = {}", join(&self.rician_factors.to_array())),
            format!("upa_shape = {}, {}", self.upa_shape.0, self.upa_shape.1),
            format!("total_bits = {}", self.compute.total_bits),
            format!("cycles_per_bit = {}", self.compute.cycles_per_bit),
            format!("local_rate = {}", self.compute.local_rate),
            format!("edge_rate = {}", self.compute.edge_rate),
        ];
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }
}

impl FromStr for Scenario {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::parse(s)
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("`{key}`: cannot parse `{value}`"))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, String> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|item| parse_num(key, item.trim()))
        .collect()
}

fn parse_per_link(key: &str, value: &str) -> Result<PerLink<f64>, String> {
    let v: Vec<f64> = parse_list(key, value)?;
    let arr: [f64; 4] = v
        .try_into()
        .map_err(|_| format!("`{key}` takes four values: user_en, user_hrris, user_eve, hrris_en"))?;
    Ok(PerLink::from_array(arr))
}
