//! Scenario files: the TOML surface of the verifier.
//!
//! A scenario names a verification pipeline (`kind`), the geometry it
//! runs on, and optional exponent, tracker, and regression settings.
//! All geometric data is exact: coefficients are rational literals like
//! `"2"` or `"-1/3"`, never floats. Exponents are the one analytic
//! input and are either sampled from a seed or given as `[re, im]`
//! pairs.

use std::fmt;

use critchi_core::arrangement::{AffineArrangement, Hyperplane};
use critchi_core::master::Hypersurface;
use critchi_core::poly::MPoly;
use critchi_core::rational::{parse_rat, Rat};
use critchi_core::solve::TrackerConfig;
use critchi_core::Complex64;
use serde::Deserialize;

#[derive(Debug)]
pub enum ScenarioError {
    Toml(toml::de::Error),
    Invalid(String),
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::Toml(e) => write!(f, "scenario does not parse: {e}"),
            ScenarioError::Invalid(msg) => write!(f, "invalid scenario: {msg}"),
        }
    }
}

impl std::error::Error for ScenarioError {}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid(msg.into())
}

/// Raw file contents, straight from serde. Field names here are the
/// stable on-disk format.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    kind: String,
    dimension: Option<usize>,
    #[serde(default, rename = "hypersurface")]
    hypersurfaces: Vec<RawHypersurface>,
    exponents: Option<RawExponents>,
    tracker: Option<TrackerConfig>,
    expected: Option<Expected>,
    max_dimension: Option<usize>,
    max_degree: Option<u32>,
    max_components: Option<usize>,
}

/// One factor of the master function: either a linear form given by
/// `coeffs`/`offset` or a general polynomial given by sparse `terms`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHypersurface {
    coeffs: Option<Vec<String>>,
    offset: Option<String>,
    terms: Option<Vec<RawTerm>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    exponents: Vec<u16>,
    coeff: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExponents {
    seed: Option<u64>,
    values: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub count: Option<i64>,
    pub chi: Option<i64>,
}

/// How the exponent vector is produced for a run.
#[derive(Debug, Clone)]
pub enum ExponentChoice {
    /// Sample generic exponents from the run seed.
    Sampled,
    /// Use these values verbatim.
    Explicit(Vec<Complex64>),
}

/// A validated scenario, ready to run.
#[derive(Debug, Clone)]
pub enum Scenario {
    Arrangement(GeometryScenario),
    Hypersurface(GeometryScenario),
    ChernSweep(SweepScenario),
}

/// Common payload of the two solver-backed kinds.
#[derive(Debug, Clone)]
pub struct GeometryScenario {
    pub dimension: usize,
    /// Present only for the arrangement kind; carries the exact linear
    /// data for the poset computation.
    pub arrangement: Option<AffineArrangement>,
    pub factors: Vec<Hypersurface>,
    pub exponents: ExponentChoice,
    /// Seed named in the file, before any command-line override.
    pub file_seed: Option<u64>,
    pub tracker: TrackerConfig,
    pub expected: Expected,
}

#[derive(Debug, Clone)]
pub struct SweepScenario {
    pub max_dimension: usize,
    pub max_degree: u32,
    pub max_components: usize,
}

impl Scenario {
    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::Arrangement(_) => "arrangement",
            Scenario::Hypersurface(_) => "hypersurface",
            Scenario::ChernSweep(_) => "chern-sweep",
        }
    }
}

/// Parse and validate a scenario file.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let raw: RawScenario = toml::from_str(text).map_err(ScenarioError::Toml)?;
    match raw.kind.as_str() {
        "arrangement" => geometry(raw, true).map(Scenario::Arrangement),
        "hypersurface" => geometry(raw, false).map(Scenario::Hypersurface),
        "chern-sweep" => sweep(raw).map(Scenario::ChernSweep),
        other => Err(invalid(format!(
            "unknown kind {other:?}; expected \"arrangement\", \"hypersurface\", or \"chern-sweep\""
        ))),
    }
}

fn geometry(raw: RawScenario, linear_only: bool) -> Result<GeometryScenario, ScenarioError> {
    for (name, present) in [
        ("max_dimension", raw.max_dimension.is_some()),
        ("max_degree", raw.max_degree.is_some()),
        ("max_components", raw.max_components.is_some()),
    ] {
        if present {
            return Err(invalid(format!(
                "{name} only applies to kind = \"chern-sweep\""
            )));
        }
    }
    let dimension = raw.dimension.ok_or_else(|| invalid("missing dimension"))?;
    if dimension == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    if raw.hypersurfaces.is_empty() {
        return Err(invalid("at least one [[hypersurface]] block is required"));
    }

    let mut factors = Vec::with_capacity(raw.hypersurfaces.len());
    let mut planes = Vec::with_capacity(raw.hypersurfaces.len());
    for (index, h) in raw.hypersurfaces.iter().enumerate() {
        let poly = match parse_factor(index, h, dimension)? {
            ParsedFactor::Linear(plane) => {
                let poly = plane.to_poly();
                planes.push(plane);
                poly
            }
            ParsedFactor::General(poly) => {
                if linear_only {
                    return Err(invalid(format!(
                        "hypersurface {index}: arrangement scenarios take linear \
                         coeffs/offset data; use kind = \"hypersurface\" for general terms"
                    )));
                }
                poly
            }
        };
        factors.push(
            Hypersurface::new(poly).map_err(|e| invalid(format!("hypersurface {index}: {e}")))?,
        );
    }

    let arrangement = if linear_only {
        Some(AffineArrangement::new(dimension, planes).map_err(|e| invalid(e.to_string()))?)
    } else {
        None
    };

    let (exponents, file_seed) = match raw.exponents {
        None => (ExponentChoice::Sampled, None),
        Some(exp) => match (exp.values, exp.seed) {
            (Some(_), Some(_)) => {
                return Err(invalid("[exponents] takes either seed or values, not both"))
            }
            (Some(values), None) => {
                if values.len() != raw.hypersurfaces.len() {
                    return Err(invalid(format!(
                        "{} exponent values for {} hypersurfaces",
                        values.len(),
                        raw.hypersurfaces.len()
                    )));
                }
                let lambdas: Vec<Complex64> = values
                    .iter()
                    .map(|[re, im]| Complex64::new(*re, *im))
                    .collect();
                if lambdas.iter().any(|l| l.norm() == 0.0) {
                    return Err(invalid("exponent values must be nonzero"));
                }
                (ExponentChoice::Explicit(lambdas), None)
            }
            (None, seed) => (ExponentChoice::Sampled, seed),
        },
    };

    Ok(GeometryScenario {
        dimension,
        arrangement,
        factors,
        exponents,
        file_seed,
        tracker: raw.tracker.unwrap_or_default(),
        expected: raw.expected.unwrap_or_default(),
    })
}

fn sweep(raw: RawScenario) -> Result<SweepScenario, ScenarioError> {
    for (name, present) in [
        ("dimension", raw.dimension.is_some()),
        ("hypersurface", !raw.hypersurfaces.is_empty()),
        ("exponents", raw.exponents.is_some()),
        ("tracker", raw.tracker.is_some()),
        ("expected", raw.expected.is_some()),
    ] {
        if present {
            return Err(invalid(format!(
                "{name} does not apply to kind = \"chern-sweep\""
            )));
        }
    }
    let scenario = SweepScenario {
        max_dimension: raw
            .max_dimension
            .ok_or_else(|| invalid("missing max_dimension"))?,
        max_degree: raw.max_degree.ok_or_else(|| invalid("missing max_degree"))?,
        max_components: raw
            .max_components
            .ok_or_else(|| invalid("missing max_components"))?,
    };
    if scenario.max_dimension == 0 || scenario.max_degree == 0 || scenario.max_components == 0 {
        return Err(invalid("sweep bounds must be at least 1"));
    }
    Ok(scenario)
}

enum ParsedFactor {
    Linear(Hyperplane),
    General(MPoly<Rat>),
}

fn parse_factor(
    index: usize,
    raw: &RawHypersurface,
    dimension: usize,
) -> Result<ParsedFactor, ScenarioError> {
    match (&raw.coeffs, &raw.terms) {
        (Some(_), Some(_)) => Err(invalid(format!(
            "hypersurface {index}: give coeffs/offset or terms, not both"
        ))),
        (None, None) => Err(invalid(format!(
            "hypersurface {index}: missing coeffs (linear) or terms (polynomial)"
        ))),
        (Some(coeffs), None) => {
            if coeffs.len() != dimension {
                return Err(invalid(format!(
                    "hypersurface {index}: {} coefficients in dimension {dimension}",
                    coeffs.len()
                )));
            }
            let parsed: Vec<Rat> = coeffs
                .iter()
                .map(|s| parse_coeff(index, s))
                .collect::<Result<_, _>>()?;
            let offset = match &raw.offset {
                Some(s) => parse_coeff(index, s)?,
                None => Rat::from_integer(0.into()),
            };
            let plane = Hyperplane::new(parsed, offset)
                .map_err(|e| invalid(format!("hypersurface {index}: {e}")))?;
            Ok(ParsedFactor::Linear(plane))
        }
        (None, Some(terms)) => {
            if raw.offset.is_some() {
                return Err(invalid(format!(
                    "hypersurface {index}: offset only applies to coeffs form"
                )));
            }
            if terms.is_empty() {
                return Err(invalid(format!("hypersurface {index}: terms is empty")));
            }
            let mut raw_terms = Vec::with_capacity(terms.len());
            for t in terms {
                if t.exponents.len() != dimension {
                    return Err(invalid(format!(
                        "hypersurface {index}: term has {} exponents in dimension {dimension}",
                        t.exponents.len()
                    )));
                }
                raw_terms.push((t.exponents.clone(), parse_coeff(index, &t.coeff)?));
            }
            let poly = MPoly::from_terms(dimension, raw_terms);
            if poly.is_zero() {
                return Err(invalid(format!(
                    "hypersurface {index}: terms cancel to the zero polynomial"
                )));
            }
            Ok(ParsedFactor::General(poly))
        }
    }
}

fn parse_coeff(index: usize, text: &str) -> Result<Rat, ScenarioError> {
    parse_rat(text).map_err(|e| invalid(format!("hypersurface {index}: {e}")))
}
