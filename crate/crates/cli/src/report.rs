//! Report document: everything a run produced, in one structure that
//! serializes to a stable JSON body and renders to a human summary.
//!
//! Determinism contract: identical scenario and seed give a
//! byte-identical JSON document. Nothing time- or host-dependent goes
//! in here, and every tolerance and seed the run used is echoed so a
//! failure can be reproduced from the report alone.

use critchi_core::poly::MPoly;
use critchi_core::rational::Rat;
use critchi_core::solve::TrackerConfig;
use serde::Serialize;
use std::fmt::Write as _;

/// Verbatim echo of the geometry a verify run executed, with the
/// resolved exponents.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioEcho {
    pub kind: String,
    pub dimension: usize,
    pub hypersurfaces: Vec<FactorEcho>,
    /// Exponents actually used, as [re, im] pairs.
    pub exponents: Vec<[f64; 2]>,
    /// "sampled" (from the run seed) or "explicit" (from the file).
    pub exponent_source: String,
    pub expected_count: Option<i64>,
    pub expected_chi: Option<i64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorEcho {
    pub degree: usize,
    /// Sparse terms, exact coefficients as rational literals.
    pub terms: Vec<TermEcho>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TermEcho {
    pub exponents: Vec<u16>,
    pub coeff: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverEcho {
    pub bezout: usize,
    pub paths_tracked: usize,
    pub paths_diverged: usize,
    pub paths_on_divisor: usize,
    pub paths_failed: usize,
    pub endpoints_kept: usize,
    pub certified: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleEcho {
    pub starts: usize,
    pub converged_runs: usize,
    pub divisor_runs: usize,
    pub lost_runs: usize,
    pub count: usize,
    pub matches_homotopy: bool,
}

/// One critical point as reported.
#[derive(Debug, Clone, Serialize)]
pub struct PointRecord {
    pub location: Vec<[f64; 2]>,
    pub residual: f64,
    pub condition: f64,
    pub cluster_size: usize,
    pub refined: bool,
    pub nondegenerate: bool,
    pub local_degree: u32,
    pub morse_index: Option<usize>,
    pub pairing_defect: Option<f64>,
    pub min_abs_eigenvalue: Option<f64>,
}

/// One named identity with its outcome. The verdict is the conjunction
/// of these.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub detail: String,
    pub pass: bool,
}

impl IdentityCheck {
    pub fn new(name: &str, pass: bool, detail: String) -> Self {
        IdentityCheck {
            name: name.to_string(),
            detail,
            pass,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub scenario: ScenarioEcho,
    /// The run seed: exponent sampling and every solver stream derive
    /// from it.
    pub seed: u64,
    pub chi_combinatorial: Option<i64>,
    pub chi_chern: Option<i64>,
    pub bounded_regions: Option<i64>,
    pub critical_count: usize,
    pub degree_sum: i64,
    /// Worst relative defect of the cleared system against the
    /// logarithmic derivative at random off-divisor points.
    pub cleared_identity_defect: f64,
    pub solver: SolverEcho,
    pub oracle: Option<OracleEcho>,
    pub points: Vec<PointRecord>,
    pub identities: Vec<IdentityCheck>,
    pub verdict: String,
    pub tracker: TrackerConfig,
}

/// One degree configuration of the characteristic-class sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub dimension: usize,
    pub degrees: Vec<u32>,
    pub chern_log_top: i64,
    pub euler_complement: i64,
    pub signed_match: bool,
    pub claim_lhs: i64,
    pub claim_rhs: i64,
    pub claim_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub max_dimension: usize,
    pub max_degree: u32,
    pub max_components: usize,
    pub rows_checked: usize,
    pub rows_failed: usize,
    pub rows: Vec<SweepRow>,
    pub identities: Vec<IdentityCheck>,
    pub verdict: String,
}

/// What a run hands back to `main` for printing and the exit code.
#[derive(Debug, Clone)]
pub enum Outcome {
    Verify(Box<VerifyReport>),
    Sweep(SweepReport),
}

impl Outcome {
    pub fn passed(&self) -> bool {
        match self {
            Outcome::Verify(r) => r.verdict == "pass",
            Outcome::Sweep(r) => r.verdict == "pass",
        }
    }

    pub fn render(&self, json: bool) -> String {
        match (self, json) {
            (Outcome::Verify(r), true) => to_json(r),
            (Outcome::Sweep(r), true) => to_json(r),
            (Outcome::Verify(r), false) => r.human(),
            (Outcome::Sweep(r), false) => r.human(),
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut body = serde_json::to_string_pretty(value).expect("report serializes");
    body.push('\n');
    body
}

pub fn verdict_word(pass: bool) -> String {
    if pass { "pass" } else { "fail" }.to_string()
}

/// Compact exact rendering of a polynomial, variables `x0, x1, ...`.
pub fn poly_string(poly: &MPoly<Rat>) -> String {
    let mut out = String::new();
    for (exps, coeff) in poly.terms() {
        let neg = coeff < &Rat::from_integer(0.into());
        let mag = if neg { -coeff.clone() } else { coeff.clone() };
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mono: Vec<String> = exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(v, &e)| {
                if e == 1 {
                    format!("x{v}")
                } else {
                    format!("x{v}^{e}")
                }
            })
            .collect();
        let one = mag == Rat::from_integer(1.into());
        if mono.is_empty() {
            out.push_str(&mag.to_string());
        } else {
            if !one {
                out.push_str(&mag.to_string());
                out.push('*');
            }
            out.push_str(&mono.join("*"));
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn complex_str(pair: [f64; 2]) -> String {
    format!("{:.6}{:+.6}i", pair[0], pair[1])
}

fn location_str(location: &[[f64; 2]]) -> String {
    let coords: Vec<String> = location.iter().map(|&z| complex_str(z)).collect();
    format!("({})", coords.join(", "))
}

fn push_identities(out: &mut String, identities: &[IdentityCheck]) {
    out.push_str("identities:\n");
    let width = identities.iter().map(|i| i.name.len()).max().unwrap_or(0);
    for check in identities {
        let mark = if check.pass { "pass" } else { "FAIL" };
        let _ = writeln!(out, "  {mark}  {:<width$}  {}", check.name, check.detail);
    }
}

impl VerifyReport {
    pub fn human(&self) -> String {
        let mut out = String::new();
        let s = &self.scenario;
        let _ = writeln!(
            out,
            "kind: {}  dimension: {}  hypersurfaces: {}",
            s.kind,
            s.dimension,
            s.hypersurfaces.len()
        );
        for (i, f) in s.hypersurfaces.iter().enumerate() {
            let poly = MPoly::from_terms(
                s.dimension,
                f.terms.iter().map(|t| {
                    let coeff: Rat = t.coeff.parse().expect("echoed coefficient parses");
                    (t.exponents.clone(), coeff)
                }),
            );
            let _ = writeln!(out, "  f{i} = {}  (degree {})", poly_string(&poly), f.degree);
        }
        let _ = writeln!(out, "exponents ({}), seed {}:", s.exponent_source, self.seed);
        for (i, l) in s.exponents.iter().enumerate() {
            let _ = writeln!(out, "  lambda_{i} = {}", complex_str(*l));
        }
        let mut chi_line = String::new();
        if let Some(chi) = self.chi_combinatorial {
            let _ = write!(chi_line, "chi_combinatorial: {chi}  ");
        }
        if let Some(chi) = self.chi_chern {
            let _ = write!(chi_line, "chi_chern: {chi}  ");
        }
        if let Some(b) = self.bounded_regions {
            let _ = write!(chi_line, "bounded_regions: {b}");
        }
        if !chi_line.is_empty() {
            let _ = writeln!(out, "{}", chi_line.trim_end());
        }
        let _ = writeln!(
            out,
            "critical_count: {}  degree_sum: {}  bezout: {}",
            self.critical_count, self.degree_sum, self.solver.bezout
        );
        if let Some(oracle) = &self.oracle {
            let _ = writeln!(
                out,
                "oracle: {} starts, {} converged, {} points",
                oracle.starts, oracle.converged_runs, oracle.count
            );
        }
        out.push_str("points:\n");
        for (i, p) in self.points.iter().enumerate() {
            let shape = if p.nondegenerate {
                "nondegenerate".to_string()
            } else {
                "degenerate".to_string()
            };
            let morse = match p.morse_index {
                Some(index) => format!("  index {index}"),
                None => String::new(),
            };
            let pairing = match p.pairing_defect {
                Some(d) => format!("  pairing {d:.1e}"),
                None => String::new(),
            };
            let _ = writeln!(
                out,
                "  {}  {}  residual {:.1e}  {shape}  degree {}{morse}{pairing}",
                i + 1,
                location_str(&p.location),
                p.residual,
                p.local_degree
            );
        }
        push_identities(&mut out, &self.identities);
        let _ = writeln!(out, "verdict: {}", self.verdict.to_uppercase());
        out
    }
}

impl SweepReport {
    pub fn human(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "characteristic-class sweep: dimension <= {}, degree <= {}, components <= {}",
            self.max_dimension, self.max_degree, self.max_components
        );
        let _ = writeln!(
            out,
            "rows checked: {}  rows failed: {}",
            self.rows_checked, self.rows_failed
        );
        for row in self.rows.iter().filter(|r| !r.signed_match || !r.claim_holds) {
            let _ = writeln!(
                out,
                "  MISMATCH n={} degrees={:?}: chern_log_top {} vs signed chi {}, claim {} vs {}",
                row.dimension,
                row.degrees,
                row.chern_log_top,
                row.euler_complement,
                row.claim_lhs,
                row.claim_rhs
            );
        }
        push_identities(&mut out, &self.identities);
        let _ = writeln!(out, "verdict: {}", self.verdict.to_uppercase());
        out
    }
}
