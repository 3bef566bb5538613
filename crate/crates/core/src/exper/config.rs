//! Experiment configuration and the small grammars for θ and depth lists.

use std::f64::consts::{FRAC_PI_4, PI};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ensemble::NormKind;
use crate::error::{Error, Result};
use crate::magic::theta_for_magic;
use crate::NumericPolicy;

/// Depth grid used when none is given.
pub const DEFAULT_DEPTHS: [usize; 10] = [1, 2, 5, 10, 20, 40, 70, 100, 140, 200];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Decay,
    Linear,
    Variance,
    Theory,
    Verify,
}

impl ExperimentKind {
    pub fn tag(self) -> &'static str {
        match self {
            ExperimentKind::Decay => "decay",
            ExperimentKind::Linear => "linear",
            ExperimentKind::Variance => "variance",
            ExperimentKind::Theory => "theory",
            ExperimentKind::Verify => "verify",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "decay" => Ok(Self::Decay),
            "linear" => Ok(Self::Linear),
            "variance" => Ok(Self::Variance),
            "theory" => Ok(Self::Theory),
            "verify" => Ok(Self::Verify),
            other => Err(Error::Config(format!("unknown experiment {other:?}"))),
        }
    }
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n_a: usize,
    pub n_b: usize,
    /// Initial-state angles in radians. Ignored when `magic_targets` is set.
    pub theta_list: Vec<f64>,
    /// Target M_lin values; each is mapped to the smallest θ in [0, π/4]
    /// reaching it for `n_a + n_b` qubits.
    pub magic_targets: Option<Vec<f64>>,
    pub depths: Vec<usize>,
    pub reps: usize,
    pub t: usize,
    pub norm_kind: NormKind,
    pub master_seed: u64,
    pub prob_floor: f64,
    pub out_path: Option<String>,
    /// Use diag(1, e^{iπ/4}) in place of the Clifford phase gate.
    pub literal_paper_s: bool,
    /// Subsystem sizes swept by the variance experiment; empty means `[n_a]`.
    pub na_sweep: Vec<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::defaults_for(ExperimentKind::Decay)
    }
}

impl ExperimentConfig {
    pub fn defaults_for(kind: ExperimentKind) -> Self {
        let base = Self {
            experiment: kind,
            n_a: 2,
            n_b: 4,
            theta_list: vec![0.0, FRAC_PI_4],
            magic_targets: None,
            depths: DEFAULT_DEPTHS.to_vec(),
            reps: 100,
            t: 2,
            norm_kind: NormKind::TraceNormalized,
            master_seed: 0,
            prob_floor: 0.0,
            out_path: None,
            literal_paper_s: false,
            na_sweep: Vec::new(),
        };
        match kind {
            ExperimentKind::Linear => Self {
                n_a: 5,
                magic_targets: Some(vec![0.0, 0.25, 0.5, 0.75]),
                norm_kind: NormKind::HsSquared,
                ..base
            },
            ExperimentKind::Variance => Self {
                theta_list: vec![FRAC_PI_4],
                depths: vec![100],
                reps: 200,
                na_sweep: vec![2, 3, 4],
                ..base
            },
            _ => base,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("bad config file: {e}")))
    }

    pub fn num_qubits(&self) -> usize {
        self.n_a + self.n_b
    }

    /// Subsystem sizes actually run by the variance experiment.
    pub fn variance_sweep(&self) -> Vec<usize> {
        if self.na_sweep.is_empty() {
            vec![self.n_a]
        } else {
            self.na_sweep.clone()
        }
    }

    /// θ values for the run, resolving magic targets if present.
    pub fn thetas(&self) -> Result<Vec<f64>> {
        self.thetas_for(self.num_qubits())
    }

    pub fn thetas_for(&self, n: usize) -> Result<Vec<f64>> {
        match &self.magic_targets {
            Some(targets) => targets
                .iter()
                .map(|&m| theta_for_magic(n, m).map_err(|e| Error::Config(e.to_string())))
                .collect(),
            None => Ok(self.theta_list.clone()),
        }
    }

    /// Reject configurations before any work is done. Size-cap violations
    /// on qubit counts are configuration errors; moment operators beyond the
    /// matrix cap are resource errors.
    pub fn validate(&self, policy: &NumericPolicy) -> Result<()> {
        let cfg = |msg: String| Err(Error::Config(msg));
        if matches!(self.experiment, ExperimentKind::Verify) {
            return Ok(());
        }
        let sizes = match self.experiment {
            ExperimentKind::Variance => self.variance_sweep(),
            _ => vec![self.n_a],
        };
        for &n_a in &sizes {
            if n_a == 0 {
                return cfg("n_a must be at least 1".into());
            }
            let n = n_a + self.n_b;
            if n > policy.max_total_qubits {
                return cfg(format!("n_a + n_b = {n} exceeds the cap of {} qubits", policy.max_total_qubits));
            }
            if self.experiment != ExperimentKind::Theory {
                if n < 2 {
                    return cfg(format!("circuits need at least 2 qubits, got {n}"));
                }
                let bits = n_a * self.t;
                if bits >= 63 || (1usize << bits) > policy.max_moment_dim {
                    return Err(Error::Resource(format!(
                        "moment of order {} on {n_a} qubits exceeds the cap of {} rows",
                        self.t, policy.max_moment_dim
                    )));
                }
            }
        }
        if self.experiment == ExperimentKind::Theory && self.n_b == 0 {
            return cfg("theory needs n_b >= 1".into());
        }
        if self.reps == 0 {
            return cfg("reps must be at least 1".into());
        }
        if self.depths.is_empty() {
            return cfg("depth list is empty".into());
        }
        if self.t == 0 {
            return cfg("t must be at least 1".into());
        }
        if !(self.prob_floor >= 0.0 && self.prob_floor < 1.0) {
            return cfg(format!("prob_floor {} outside [0, 1)", self.prob_floor));
        }
        let thetas = match self.experiment {
            ExperimentKind::Variance => sizes.iter().map(|&a| self.thetas_for(a + self.n_b)).collect::<Result<Vec<_>>>()?.concat(),
            _ => self.thetas()?,
        };
        if thetas.is_empty() {
            return cfg("θ list is empty".into());
        }
        if let Some(bad) = thetas.iter().find(|x| !x.is_finite()) {
            return cfg(format!("θ value {bad} is not finite"));
        }
        Ok(())
    }
}

/// Parse one angle token: a number, or a multiple of `pi` such as `pi/4`,
/// `3pi/8`, `-pi`, `0.5*pi`.
pub fn parse_angle(tok: &str) -> Result<f64> {
    let bad = || Error::Config(format!("cannot parse angle {tok:?}"));
    let s = tok.trim().to_ascii_lowercase();
    if s.is_empty() {
        return Err(bad());
    }
    let Some(pos) = s.find("pi") else {
        return s.parse().map_err(|_| bad());
    };
    let coef = s[..pos].trim_end_matches('*').trim();
    let coef = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    let rest = s[pos + 2..].trim();
    let div = match rest.strip_prefix('/') {
        Some(d) => d.trim().parse::<f64>().map_err(|_| bad())?,
        None if rest.is_empty() => 1.0,
        None => return Err(bad()),
    };
    Ok(coef * PI / div)
}

/// Parsed form of a `--theta` argument.
#[derive(Clone, Debug, PartialEq)]
pub enum ThetaSpec {
    Angles(Vec<f64>),
    Magic(Vec<f64>),
}

/// `0,pi/8,pi/4`, `linspace:0:pi/4:5`, or `magic:0,0.25,0.5`.
pub fn parse_theta_spec(spec: &str) -> Result<ThetaSpec> {
    let spec = spec.trim();
    if let Some(rest) = spec.strip_prefix("magic:") {
        let vals = rest
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad magic target {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        return Ok(ThetaSpec::Magic(vals));
    }
    if let Some(rest) = spec.strip_prefix("linspace:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(Error::Config(format!("linspace needs start:stop:count, got {rest:?}")));
        };
        let (a, b) = (parse_angle(a)?, parse_angle(b)?);
        let n: usize = n.trim().parse().map_err(|_| Error::Config(format!("bad count {n:?}")))?;
        let vals = match n {
            0 => Vec::new(),
            1 => vec![a],
            _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
        };
        return Ok(ThetaSpec::Angles(vals));
    }
    Ok(ThetaSpec::Angles(spec.split(',').map(parse_angle).collect::<Result<Vec<_>>>()?))
}

/// Comma-separated depths and ranges: `1,2,5`, `1..=100`, `0..200:10`.
pub fn parse_depths(spec: &str) -> Result<Vec<usize>> {
    let bad = |s: &str| Error::Config(format!("cannot parse depth item {s:?}"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad(s));
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim) {
        let Some(pos) = item.find("..") else {
            out.push(num(item)?);
            continue;
        };
        let (range, step) = match item.split_once(':') {
            Some((r, s)) => (r, num(s)?),
            None => (item, 1),
        };
        if step == 0 {
            return Err(bad(item));
        }
        let start = num(&range[..pos])?;
        let tail = &range[pos + 2..];
        let end = match tail.strip_prefix('=') {
            Some(e) => num(e)?.checked_add(1).ok_or_else(|| bad(item))?,
            None => num(tail)?,
        };
        out.extend((start..end).step_by(step));
    }
    if out.is_empty() {
        return Err(Error::Config(format!("depth spec {spec:?} is empty")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_8;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("0.3").unwrap(), 0.3);
        assert_eq!(parse_angle("pi/4").unwrap(), FRAC_PI_4);
        assert_eq!(parse_angle("PI").unwrap(), PI);
        assert_eq!(parse_angle("-pi/8").unwrap(), -FRAC_PI_8);
        assert!((parse_angle("3pi/8").unwrap() - 3.0 * FRAC_PI_8).abs() < 1e-15);
        assert!((parse_angle("0.5*pi").unwrap() - 0.5 * PI).abs() < 1e-15);
        for bad in ["", "pie", "pi/x", "x"] {
            assert!(parse_angle(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn theta_specs() {
        assert_eq!(parse_theta_spec("0,pi/4").unwrap(), ThetaSpec::Angles(vec![0.0, FRAC_PI_4]));
        assert_eq!(parse_theta_spec("magic:0,0.5").unwrap(), ThetaSpec::Magic(vec![0.0, 0.5]));
        let ThetaSpec::Angles(v) = parse_theta_spec("linspace:0:pi/4:3").unwrap() else { panic!() };
        assert_eq!(v, vec![0.0, FRAC_PI_8, FRAC_PI_4]);
        assert!(parse_theta_spec("linspace:0:1").is_err());
    }

    #[test]
    fn depth_specs() {
        assert_eq!(parse_depths("1,2,5").unwrap(), vec![1, 2, 5]);
        assert_eq!(parse_depths("1..4").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_depths("1..=4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_depths("0..=20:10, 35").unwrap(), vec![0, 10, 20, 35]);
        assert!(parse_depths("5..2").is_err());
        assert!(parse_depths("1..5:0").is_err());
        assert!(parse_depths("a").is_err());
    }

    #[test]
    fn validation() {
        let p = NumericPolicy::default();
        ExperimentConfig::default().validate(&p).unwrap();
        for kind in [ExperimentKind::Linear, ExperimentKind::Variance, ExperimentKind::Theory] {
            ExperimentConfig::defaults_for(kind).validate(&p).unwrap();
        }
        let big = ExperimentConfig { n_a: 8, n_b: 6, ..Default::default() };
        assert!(matches!(big.validate(&p), Err(Error::Config(_))));
        let deep = ExperimentConfig { n_a: 5, t: 3, ..Default::default() };
        assert!(matches!(deep.validate(&p), Err(Error::Resource(_))));
        let zero = ExperimentConfig { reps: 0, ..Default::default() };
        assert!(matches!(zero.validate(&p), Err(Error::Config(_))));
        let unreachable = ExperimentConfig { magic_targets: Some(vec![0.99]), ..Default::default() };
        assert!(matches!(unreachable.validate(&p), Err(Error::Config(_))));
    }

    #[test]
    fn json_round_trip_and_defaults() {
        let c = ExperimentConfig::defaults_for(ExperimentKind::Linear);
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), c);
        let partial = ExperimentConfig::from_json(r#"{"n_a": 3, "norm_kind": "hs2"}"#).unwrap();
        assert_eq!(partial.n_a, 3);
        assert_eq!(partial.norm_kind, NormKind::HsSquared);
        assert_eq!(partial.depths, DEFAULT_DEPTHS.to_vec());
        let long = ExperimentConfig::from_json(r#"{"norm_kind": "trace_normalized"}"#).unwrap();
        assert_eq!(long.norm_kind, NormKind::TraceNormalized);
        assert!(matches!(ExperimentConfig::from_json(r#"{"bogus": 1}"#), Err(Error::Config(_))));
    }

    #[test]
    fn magic_targets_resolve() {
        let c = ExperimentConfig { magic_targets: Some(vec![0.0, 0.5]), ..Default::default() };
        let th = c.thetas().unwrap();
        assert_eq!(th[0], 0.0);
        assert!((crate::magic::product_phase_magic(6, th[1]) - 0.5).abs() < 1e-12);
    }
}
