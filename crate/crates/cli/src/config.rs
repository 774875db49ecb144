//! Versioned job configuration and small argument parsers.

use std::path::{Path, PathBuf};

use komatsu_spectral::diophantine::{parse_rational, AlphaLinear, Quantifier, ReportOptions};
use komatsu_spectral::harmonic::{GroupId, HalfInt};
use komatsu_spectral::normalform::DEFAULT_CONVERGENT;
use komatsu_spectral::solver::DEFAULT_THRESHOLD;
use komatsu_spectral::weights::WeightSequence;
use komatsu_spectral::{Error, Result};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

pub const CONFIG_SCHEMA: u32 = 1;

/// Where the operator comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorRef {
    Builtin(String),
    File(PathBuf),
}

/// A weight sequence by Gevrey order or custom table file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightRef {
    Gevrey(f64),
    Custom(PathBuf),
}

impl WeightRef {
    pub fn load(&self) -> Result<WeightSequence> {
        match self {
            WeightRef::Gevrey(s) => WeightSequence::gevrey(*s),
            WeightRef::Custom(p) => WeightSequence::custom_from_json(&read(p)?),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Precision {
    /// Convergent index `n` whose `p_n/q_n` stands in for `α` in float work.
    #[serde(default = "default_convergent")]
    pub convergent: usize,
    /// Relative threshold below which a coefficient counts as zero.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

impl Default for Precision {
    fn default() -> Self {
        Self { convergent: DEFAULT_CONVERGENT, threshold: DEFAULT_THRESHOLD }
    }
}

fn default_convergent() -> usize {
    DEFAULT_CONVERGENT
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

fn default_weights() -> Vec<WeightRef> {
    vec![WeightRef::Gevrey(1.0)]
}

fn default_n_grid() -> Vec<f64> {
    vec![0.5, 1.0]
}

fn default_quantifier() -> Quantifier {
    Quantifier::Roumieu
}

/// Everything a batch run depends on; serialized into every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub schema: u32,
    #[serde(default)]
    pub groups: Option<[GroupId; 2]>,
    #[serde(default)]
    pub operator: Option<OperatorRef>,
    #[serde(default = "default_weights")]
    pub weights: Vec<WeightRef>,
    /// Nested shell cutoffs on `⟨ξ⟩+⟨η⟩`, ascending; the last bounds the scan.
    #[serde(default)]
    pub cutoffs: Vec<f64>,
    #[serde(default = "default_n_grid")]
    pub n_grid: Vec<f64>,
    #[serde(default = "default_quantifier")]
    pub quantifier: Quantifier,
    /// Bands of the solver grid on `G₁` and `G₂`.
    #[serde(default)]
    pub bands: Option<[HalfInt; 2]>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub precision: Precision,
    #[serde(default)]
    pub seed: u64,
}

impl Default for JobConfig {
    fn default() -> Self {
        Self {
            schema: CONFIG_SCHEMA,
            groups: None,
            operator: None,
            weights: default_weights(),
            cutoffs: Vec::new(),
            n_grid: default_n_grid(),
            quantifier: default_quantifier(),
            bands: None,
            out: None,
            precision: Precision::default(),
            seed: 0,
        }
    }
}

pub const DEFAULT_CUTOFF: f64 = 2000.0;

impl JobConfig {
    /// Reads a config file; relative paths inside it resolve against its directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut c: Self = serde_json::from_str(&read(path)?)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(OperatorRef::File(p)) = &mut c.operator {
            fix(p);
        }
        for w in &mut c.weights {
            if let WeightRef::Custom(p) = w {
                fix(p);
            }
        }
        if let Some(p) = &mut c.out {
            fix(p);
        }
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.schema != CONFIG_SCHEMA {
            return bad(format!("unsupported config schema {} (expected {CONFIG_SCHEMA})", self.schema));
        }
        if self.weights.is_empty() {
            return bad("at least one weight is required".into());
        }
        for w in &self.weights {
            if let WeightRef::Gevrey(s) = w {
                if !(s.is_finite() && *s >= 1.0) {
                    return bad(format!("Gevrey order must be >= 1, got {s}"));
                }
            }
        }
        if self.cutoffs.iter().any(|c| !(c.is_finite() && *c > 0.0)) || self.cutoffs.windows(2).any(|w| w[1] <= w[0]) {
            return bad(format!("cutoffs must be positive and strictly ascending: {:?}", self.cutoffs));
        }
        if self.n_grid.is_empty() || self.n_grid.iter().any(|n| !(n.is_finite() && *n > 0.0)) {
            return bad(format!("N grid must be non-empty and positive: {:?}", self.n_grid));
        }
        if self.precision.convergent > komatsu_spectral::diophantine::DEFAULT_CAP {
            return bad(format!(
                "convergent {} beyond the precision cap {}",
                self.precision.convergent,
                komatsu_spectral::diophantine::DEFAULT_CAP
            ));
        }
        if !(self.precision.threshold > 0.0 && self.precision.threshold < 1.0) {
            return bad(format!("threshold must lie in (0, 1), got {}", self.precision.threshold));
        }
        if let Some([b1, b2]) = self.bands {
            if b1.twice <= 0 || b2.twice <= 0 {
                return bad("bands must be positive".into());
            }
        }
        Ok(())
    }

    /// Scan cutoffs: the configured list, else `{¼, ½, 1}·2000`.
    pub fn shell_cutoffs(&self) -> Vec<f64> {
        if self.cutoffs.is_empty() {
            vec![DEFAULT_CUTOFF / 4.0, DEFAULT_CUTOFF / 2.0, DEFAULT_CUTOFF]
        } else {
            self.cutoffs.clone()
        }
    }

    pub fn report_options(&self) -> Result<ReportOptions> {
        let c = self.shell_cutoffs();
        Ok(ReportOptions {
            cutoff: *c.last().expect("non-empty"),
            c_cutoffs: c,
            weights: self.weights.iter().map(WeightRef::load).collect::<Result<_>>()?,
            n_grid: self.n_grid.clone(),
            mode: self.quantifier,
            ..ReportOptions::default()
        })
    }
}

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

/// Parses `t1xs3` / `s3xs3` style group pairs.
pub fn parse_groups(s: &str) -> Result<[GroupId; 2]> {
    let one = |g: &str| match g {
        "t1" | "T1" => Ok(GroupId::T1),
        "s3" | "S3" | "su2" | "SU2" => Ok(GroupId::SU2),
        _ => Err(Error::Config(format!("unknown group {g:?} (use t1 or s3)"))),
    };
    let (a, b) = s
        .split_once('x')
        .or_else(|| s.split_once('X'))
        .ok_or_else(|| Error::Config(format!("group pair {s:?} must look like t1xs3")))?;
    Ok([one(a)?, one(b)?])
}

/// Parses a complex number `re + im·i` whose parts are exact `p/q + c·alpha`.
///
/// Terms are joined by `+`/`-`; a term is `[rational][*]["alpha"][*]["i"]`,
/// e.g. `0`, `1/2i`, `alpha*i`, `-3 + 2alpha`, `0.5 - alpha i`.
pub fn parse_complex(s: &str) -> Result<(AlphaLinear, AlphaLinear)> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(Error::Config("empty number".into()));
    }
    let mut terms = Vec::new();
    let mut cur = String::new();
    for (i, ch) in compact.chars().enumerate() {
        if (ch == '+' || ch == '-') && i > 0 && !cur.ends_with(['e', 'E', '/']) {
            terms.push(std::mem::take(&mut cur));
        }
        cur.push(ch);
    }
    terms.push(cur);
    let (mut re, mut im) = (AlphaLinear::zero(), AlphaLinear::zero());
    for t in terms {
        let (sign, body) = match t.strip_prefix('-') {
            Some(b) => (-1, b),
            None => (1, t.strip_prefix('+').unwrap_or(&t)),
        };
        let (body, imag) = match body.strip_suffix('i') {
            Some(b) => (b.trim_end_matches('*'), true),
            None => (body, false),
        };
        let (body, has_alpha) = match body.strip_suffix("alpha") {
            Some(b) => (b.trim_end_matches('*'), true),
            None => (body, false),
        };
        let mut c = if body.is_empty() {
            if !imag && !has_alpha {
                return Err(Error::Config(format!("cannot parse number {s:?}")));
            }
            num_rational::BigRational::one()
        } else {
            parse_rational(body).map_err(|_| Error::Config(format!("cannot parse number {s:?}")))?
        };
        if sign < 0 {
            c = -c;
        }
        let part = if has_alpha {
            AlphaLinear::affine(num_rational::BigRational::zero(), c)
        } else {
            AlphaLinear::rational(c)
        };
        if imag {
            im = im.add(&part);
        } else {
            re = re.add(&part);
        }
    }
    Ok((re, im))
}

/// Parses a real exact number (no `i` allowed).
pub fn parse_real(s: &str) -> Result<AlphaLinear> {
    let (re, im) = parse_complex(s)?;
    if !im.is_zero() {
        return Err(Error::Config(format!("{s:?} must be real")));
    }
    Ok(re)
}
