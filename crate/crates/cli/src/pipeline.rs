//! The verification pipelines behind the CLI.
//!
//! `arrangement` and `hypersurface` runs share one spine: build the
//! master function, clear denominators, track every start-system path,
//! classify endpoints, then test the count and degree-sum identities
//! against an Euler characteristic computed without solving anything.
//! The arrangement kind gets its characteristic from the intersection
//! poset, the hypersurface kind from characteristic classes of the
//! projective closure plus the hyperplane at infinity. `chern-sweep`
//! runs no solver at all: it is exact integer arithmetic over a grid of
//! degree configurations.

use std::fmt;

use critchi_core::chern::{
    chern_log_top, claim_check, euler_complement, ChernError, DivisorConfig,
};
use critchi_core::master::{sample_generic_exponents, MasterError, MasterFunction};
use critchi_core::morse::morse_summary;
use critchi_core::solve::{
    clear_denominators, local_degree, multistart_oracle, same_point_sets, solve_total_degree,
    SolveError, TrackerConfig,
};
use critchi_core::Complex64;

use crate::report::{
    verdict_word, FactorEcho, IdentityCheck, OracleEcho, Outcome, PointRecord, ScenarioEcho,
    SolverEcho, SweepReport, SweepRow, TermEcho, VerifyReport,
};
use crate::scenario::{ExponentChoice, GeometryScenario, Scenario, SweepScenario};

/// Flags that modify a run without living in the scenario file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Replaces the scenario seed when set.
    pub seed_override: Option<u64>,
    /// Also run the multistart oracle and require point-set agreement.
    pub with_oracle: bool,
}

#[derive(Debug)]
pub enum PipelineError {
    /// No flat of the arrangement is a single point, so the critical
    /// set cannot be finite and counting is meaningless.
    NotEssential,
    Master(MasterError),
    Solve(SolveError),
    Chern(ChernError),
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineError::NotEssential => write!(
                f,
                "arrangement is not essential: no intersection is a single point, so \
                 critical points are never isolated; quotient out the common directions first"
            ),
            PipelineError::Master(e) => write!(f, "master function rejected: {e}"),
            PipelineError::Solve(e) => write!(f, "solver failed: {e}"),
            PipelineError::Chern(e) => write!(f, "characteristic-class setup rejected: {e}"),
        }
    }
}

impl std::error::Error for PipelineError {}

/// Run a parsed scenario to a report.
pub fn run_scenario(scenario: &Scenario, opts: &RunOptions) -> Result<Outcome, PipelineError> {
    match scenario {
        Scenario::Arrangement(g) => run_geometry(g, opts).map(|r| Outcome::Verify(Box::new(r))),
        Scenario::Hypersurface(g) => run_geometry(g, opts).map(|r| Outcome::Verify(Box::new(r))),
        Scenario::ChernSweep(s) => Ok(Outcome::Sweep(run_sweep(s))),
    }
}

fn sign_of(n: usize) -> i64 {
    if n % 2 == 0 {
        1
    } else {
        -1
    }
}

fn run_geometry(g: &GeometryScenario, opts: &RunOptions) -> Result<VerifyReport, PipelineError> {
    let n = g.dimension;
    let sign = sign_of(n);

    // Independent Euler characteristic, before any floating point.
    let mut chi_combinatorial = None;
    let mut bounded_regions = None;
    let mut chi_chern = None;
    if let Some(arr) = &g.arrangement {
        let poset = arr.intersection_poset();
        if !poset.is_essential() {
            return Err(PipelineError::NotEssential);
        }
        chi_combinatorial = Some(poset.euler_characteristic_complement());
        bounded_regions = Some(
            arr.bounded_regions()
                .expect("essentiality was checked above"),
        );
    } else {
        // The complement sits in projective space behind the divisor
        // made of the factor closures and the hyperplane at infinity.
        let mut degrees: Vec<u32> = g.factors.iter().map(|f| f.degree() as u32).collect();
        degrees.push(1);
        let cfg = DivisorConfig::new(n, degrees).map_err(PipelineError::Chern)?;
        chi_chern = Some(euler_complement(&cfg));
    }
    let chi = chi_combinatorial.or(chi_chern).expect("one chi per kind");
    let signed_chi = sign * chi;

    // One seed drives exponent sampling and every solver stream.
    let seed = opts.seed_override.or(g.file_seed).unwrap_or(g.tracker.seed);
    let mut cfg = g.tracker.clone();
    cfg.seed = seed;

    let degrees: Vec<usize> = g.factors.iter().map(|f| f.degree()).collect();
    let (lambdas, exponent_source) = match &g.exponents {
        ExponentChoice::Explicit(values) => (values.clone(), "explicit"),
        ExponentChoice::Sampled => (sample_generic_exponents(&degrees, seed), "sampled"),
    };

    let mf = MasterFunction::new(n, g.factors.clone(), lambdas.clone())
        .map_err(PipelineError::Master)?;
    let sys = clear_denominators(&mf);
    let cleared_identity_defect = sys.identity_defect(seed, 20);
    let solve = solve_total_degree(&sys, &cfg).map_err(PipelineError::Solve)?;

    // Local degrees: 1 for nondegenerate points, computed by contour
    // counting for the rest.
    let mut points = solve.points.clone();
    let locations: Vec<Vec<Complex64>> = points.iter().map(|p| p.location.clone()).collect();
    let mut degree_failures: Vec<String> = Vec::new();
    for (i, p) in points.iter_mut().enumerate() {
        if p.nondegenerate {
            p.local_degree = Some(1);
        } else {
            let others: Vec<Vec<Complex64>> = locations
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, l)| l.clone())
                .collect();
            match local_degree(&sys, &p.location, &others, &cfg) {
                Ok(d) => p.local_degree = Some(d),
                Err(e) => degree_failures.push(format!("point {}: {e}", i + 1)),
            }
        }
    }
    let degrees_all_known = points.iter().all(|p| p.local_degree.is_some());
    let degree_sum: i64 = points
        .iter()
        .filter_map(|p| p.local_degree.map(i64::from))
        .sum();

    // Morse data at every nondegenerate point.
    let mut records = Vec::with_capacity(points.len());
    let mut morse_ok = true;
    let mut worst_pairing = 0.0f64;
    let mut morse_failures: Vec<String> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let mut morse_index = None;
        let mut pairing_defect = None;
        let mut min_abs_eigenvalue = None;
        if p.nondegenerate {
            match morse_summary(&mf, &p.location, cfg.pairing_tol) {
                Ok(m) => {
                    if m.index != n || m.pairing_defect > cfg.pairing_tol {
                        morse_ok = false;
                    }
                    worst_pairing = worst_pairing.max(m.pairing_defect);
                    min_abs_eigenvalue = Some(
                        m.eigenvalues
                            .iter()
                            .map(|e| e.abs())
                            .fold(f64::INFINITY, f64::min),
                    );
                    pairing_defect = Some(m.pairing_defect);
                    morse_index = Some(m.index);
                }
                Err(e) => {
                    morse_ok = false;
                    morse_failures.push(format!("point {}: {e}", i + 1));
                }
            }
        }
        records.push(PointRecord {
            location: p.location.iter().map(|z| [z.re, z.im]).collect(),
            residual: p.residual,
            condition: p.condition,
            cluster_size: p.cluster_size,
            refined: p.refined,
            nondegenerate: p.nondegenerate,
            local_degree: p.local_degree.unwrap_or(0),
            morse_index,
            pairing_defect,
            min_abs_eigenvalue,
        });
    }

    // Optional oracle cross-check on the same seed, independent stream.
    let oracle = if opts.with_oracle {
        let mut ocfg = cfg.clone();
        if ocfg.oracle_starts == TrackerConfig::default().oracle_starts {
            // Newton basins thin out fast with dimension; scale the
            // default start count to keep every basin hit.
            ocfg.oracle_starts = 2000 * 10usize.pow(n.min(3) as u32 - 1);
        }
        let orep = multistart_oracle(&mf, &ocfg);
        let matches_homotopy = same_point_sets(&solve.points, &orep.points, cfg.cluster_radius);
        Some(OracleEcho {
            starts: orep.starts,
            converged_runs: orep.converged_runs,
            divisor_runs: orep.divisor_runs,
            lost_runs: orep.lost_runs,
            count: orep.count(),
            matches_homotopy,
        })
    } else {
        None
    };

    let nondegenerate_count = points.iter().filter(|p| p.nondegenerate).count();
    let degenerate_count = points.len() - nondegenerate_count;
    let all_refined = points.iter().all(|p| p.refined);

    let mut identities = Vec::new();
    identities.push(IdentityCheck::new(
        "solver_certified",
        solve.certified && solve.conservation_holds() && all_refined,
        format!(
            "paths {} = kept {} + diverged {} + divisor {} + failed {}; {}",
            solve.paths_tracked,
            solve.endpoints_kept,
            solve.paths_diverged,
            solve.paths_on_divisor,
            solve.paths_failed,
            if all_refined {
                "all points refined"
            } else {
                "unrefined points remain"
            }
        ),
    ));
    identities.push(IdentityCheck::new(
        "cleared_system_identity",
        cleared_identity_defect < 1e-8,
        format!("relative defect {cleared_identity_defect:.2e} at 20 random points, tolerance 1.0e-8"),
    ));
    if chi_combinatorial.is_some() {
        identities.push(IdentityCheck::new(
            "count_equals_signed_chi",
            points.len() as i64 == signed_chi,
            format!("count {} vs (-1)^{n} * chi = {signed_chi}", points.len()),
        ));
    }
    identities.push(IdentityCheck::new(
        "degree_sum_equals_signed_chi",
        degrees_all_known && degree_sum == signed_chi,
        format!("degree sum {degree_sum} vs (-1)^{n} * chi = {signed_chi}"),
    ));
    if degenerate_count > 0 || !degree_failures.is_empty() {
        identities.push(IdentityCheck::new(
            "local_degrees_computed",
            degree_failures.is_empty(),
            if degree_failures.is_empty() {
                format!("degenerate points with a computed local degree: {degenerate_count}")
            } else {
                degree_failures.join("; ")
            },
        ));
    }
    identities.push(IdentityCheck::new(
        "morse_index_equals_dimension",
        morse_ok && morse_failures.is_empty(),
        if morse_failures.is_empty() {
            format!(
                "{nondegenerate_count} nondegenerate points at index {n}, worst pairing defect \
                 {worst_pairing:.1e} (tolerance {:.1e})",
                cfg.pairing_tol
            )
        } else {
            morse_failures.join("; ")
        },
    ));
    if let (Some(b), Some(_)) = (bounded_regions, chi_combinatorial) {
        identities.push(IdentityCheck::new(
            "bounded_regions_match_signed_chi",
            b == signed_chi,
            format!("bounded regions {b} vs (-1)^{n} * chi = {signed_chi}"),
        ));
    }
    if let Some(o) = &oracle {
        identities.push(IdentityCheck::new(
            "oracle_matches_homotopy",
            o.matches_homotopy,
            format!(
                "oracle {} points from {} starts vs homotopy {}, radius {:.1e}",
                o.count,
                o.starts,
                points.len(),
                cfg.cluster_radius
            ),
        ));
    }
    if let Some(want) = g.expected.count {
        identities.push(IdentityCheck::new(
            "expected_count",
            points.len() as i64 == want,
            format!("found {}, expected {want}", points.len()),
        ));
    }
    if let Some(want) = g.expected.chi {
        identities.push(IdentityCheck::new(
            "expected_chi",
            chi == want,
            format!("chi {chi}, expected {want}"),
        ));
    }
    let verdict = verdict_word(identities.iter().all(|c| c.pass));

    let scenario = ScenarioEcho {
        kind: if g.arrangement.is_some() {
            "arrangement".to_string()
        } else {
            "hypersurface".to_string()
        },
        dimension: n,
        hypersurfaces: g
            .factors
            .iter()
            .map(|f| FactorEcho {
                degree: f.degree(),
                terms: f
                    .poly()
                    .terms()
                    .map(|(exps, coeff)| TermEcho {
                        exponents: exps.to_vec(),
                        coeff: coeff.to_string(),
                    })
                    .collect(),
            })
            .collect(),
        exponents: lambdas.iter().map(|l| [l.re, l.im]).collect(),
        exponent_source: exponent_source.to_string(),
        expected_count: g.expected.count,
        expected_chi: g.expected.chi,
    };

    Ok(VerifyReport {
        scenario,
        seed,
        chi_combinatorial,
        chi_chern,
        bounded_regions,
        critical_count: points.len(),
        degree_sum,
        cleared_identity_defect,
        solver: SolverEcho {
            bezout: solve.bezout,
            paths_tracked: solve.paths_tracked,
            paths_diverged: solve.paths_diverged,
            paths_on_divisor: solve.paths_on_divisor,
            paths_failed: solve.paths_failed,
            endpoints_kept: solve.endpoints_kept,
            certified: solve.certified,
        },
        oracle,
        points: records,
        identities,
        verdict,
        tracker: cfg,
    })
}

/// Nondecreasing tuples with `k` entries drawn from `1..=max`. Both
/// sides of every sweep identity are symmetric in the degrees, so one
/// representative per multiset covers all orderings.
fn degree_multisets(k: usize, max: u32) -> Vec<Vec<u32>> {
    fn extend(out: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, k: usize, min: u32, max: u32) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for d in min..=max {
            current.push(d);
            extend(out, current, k, d, max);
            current.pop();
        }
    }
    let mut out = Vec::new();
    extend(&mut out, &mut Vec::with_capacity(k), k, 1, max);
    out
}

pub fn run_sweep(s: &SweepScenario) -> SweepReport {
    let mut rows = Vec::new();
    let mut rows_failed = 0usize;
    for n in 1..=s.max_dimension {
        for k in 1..=s.max_components {
            for degrees in degree_multisets(k, s.max_degree) {
                let cfg =
                    DivisorConfig::new(n, degrees.clone()).expect("positive bounds validated");
                let top = chern_log_top(&cfg);
                let chi = euler_complement(&cfg);
                let signed_match = top == sign_of(n) * chi;
                let claim = claim_check(&cfg);
                if !signed_match || !claim.holds() {
                    rows_failed += 1;
                }
                rows.push(SweepRow {
                    dimension: n,
                    degrees,
                    chern_log_top: top,
                    euler_complement: chi,
                    signed_match,
                    claim_lhs: claim.lhs,
                    claim_rhs: claim.rhs,
                    claim_holds: claim.holds(),
                });
            }
        }
    }
    let chern_ok = rows.iter().all(|r| r.signed_match);
    let claim_ok = rows.iter().all(|r| r.claim_holds);
    let identities = vec![
        IdentityCheck::new(
            "chern_top_equals_signed_chi",
            chern_ok,
            format!(
                "{} configurations, {} mismatches",
                rows.len(),
                rows.iter().filter(|r| !r.signed_match).count()
            ),
        ),
        IdentityCheck::new(
            "divisor_chi_claim",
            claim_ok,
            format!(
                "{} configurations, {} mismatches",
                rows.len(),
                rows.iter().filter(|r| !r.claim_holds).count()
            ),
        ),
    ];
    let verdict = verdict_word(chern_ok && claim_ok);
    SweepReport {
        max_dimension: s.max_dimension,
        max_degree: s.max_degree,
        max_components: s.max_components,
        rows_checked: rows.len(),
        rows_failed,
        rows,
        identities,
        verdict,
    }
}
