//! Report assembly for the subcommands.

use std::path::Path;

use isopair_core::analytic::{characteristic_invariant, intertwining_residual_theta, theta_vj};
use isopair_core::bcl::{build_multipliers, coefficient_routes, wandering_data_of_graded, BCLData};
use isopair_core::bidisc::{slocinski_check, structural_residuals, ESCALATION};
use isopair_core::defect::{five_way_verdict, negativity_check, wold_part_containments, NegativityContext};
use isopair_core::equivalence::{pair_equivalence, Verdict};
use isopair_core::json::matrix_to_json;
use isopair_core::linalg::{kernel_within, op_norm, CVector};
use isopair_core::model::{GradedPair, Which};
use isopair_core::random::{gaussian_matrix, random_bcl, rng_from_seed};
use isopair_core::TolerancePolicy;
use serde::Serialize;
use serde_json::{json, Value};

use crate::spec::{build, read_spec, Built, DEFAULT_DEGREE};
use crate::{CliError, EXIT_INCONSISTENT, EXIT_OK};

/// Everything needed to reproduce a report.
#[derive(Clone, Debug, Serialize)]
pub struct Config {
    pub command: String,
    pub inputs: Vec<String>,
    /// `--degree` if given; otherwise BCL models use `default_degree` and
    /// bidisc models the degree of their generator file.
    pub degree: Option<usize>,
    pub default_degree: usize,
    pub eq_tol: f64,
    pub approx_tol: f64,
    pub seed: u64,
    pub version: String,
}

impl Config {
    pub fn new(command: &str, inputs: Vec<String>, degree: Option<usize>, approx_tol: f64, seed: u64) -> Self {
        Self {
            command: command.into(),
            inputs,
            degree,
            default_degree: DEFAULT_DEGREE,
            eq_tol: TolerancePolicy::default().eq_tol.min(approx_tol),
            approx_tol,
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }

    pub fn tolerance(&self) -> Result<TolerancePolicy, CliError> {
        TolerancePolicy::new(self.eq_tol, self.approx_tol).map_err(CliError::Validation)
    }

    fn series_degree(&self) -> usize {
        self.degree.unwrap_or(DEFAULT_DEGREE)
    }
}

pub struct Outcome {
    pub report: Value,
    pub exit: i32,
}

fn which_label(i: Which) -> &'static str {
    match i {
        Which::First => "1",
        Which::Second => "2",
        Which::Product => "product",
    }
}

/// Records failed checks and skipped sections.
#[derive(Default)]
struct Ledger {
    failures: Vec<String>,
}

impl Ledger {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    /// Consistency failures are recorded; other errors mean the section does
    /// not apply to this input.
    fn section(&mut self, name: &str, result: Result<Value, isopair_core::Error>) -> Value {
        match result {
            Ok(v) => v,
            Err(e) => match CliError::from_core(e) {
                CliError::Consistency(msg) => {
                    self.failures.push(format!("{name}: {msg}"));
                    json!({"failed": msg})
                }
                other => json!({"skipped": other.to_string()}),
            },
        }
    }
}

pub fn validate(path: &Path, config: &Config) -> Outcome {
    let result = config.tolerance().and_then(|tol| {
        let spec = read_spec(path)?;
        let built = build(&spec, config.degree, &tol)?;
        Ok(json!({
            "config": config,
            "valid": true,
            "input": built.summary,
            "model": model_summary(&built.pair),
        }))
    });
    match result {
        Ok(report) => Outcome { report, exit: EXIT_OK },
        Err(e) => Outcome {
            report: json!({"config": config, "valid": false, "error": e.to_string()}),
            exit: e.exit_code(),
        },
    }
}

fn model_summary(pair: &GradedPair) -> Value {
    json!({
        "dim": pair.dim(),
        "interior_dim": pair.interior_indices().len(),
        "unitary_dim": pair.unitary_indices().len(),
        "top_degree": pair.top_degree(),
        "purity": pair.purity(),
    })
}

fn wandering_summary(pair: &GradedPair, tol: &TolerancePolicy) -> Value {
    let interior = pair.interior();
    let t = pair.v1() * pair.v2();
    let slice = |m: &isopair_core::linalg::CMatrix| kernel_within(&m.adjoint(), &interior, tol).dim();
    let finite = |w: Which| pair.finite_wandering(w, tol).is_ok();
    json!({
        "interior_slice_dims": {"w": slice(&t), "w1": slice(pair.v1()), "w2": slice(pair.v2())},
        "finite": {"w": finite(Which::Product), "w1": finite(Which::First), "w2": finite(Which::Second)},
    })
}

fn extraction(built: &Built, tol: &TolerancePolicy, ledger: &mut Ledger) -> Result<Value, isopair_core::Error> {
    let pair = &built.pair;
    if !pair.purity().product.is_pure() {
        return Err(isopair_core::Error::NotPure("V1 V2 is not pure".into()));
    }
    let wd = wandering_data_of_graded(pair, tol)?;
    let extracted = BCLData::new(wd.u.clone(), wd.p(), tol)?;
    let rebuilt = build_multipliers(&extracted).graded(2, tol)?;
    let round_trip = pair_equivalence(pair, &rebuilt, tol)?;
    ledger.check(round_trip.verdict == Verdict::True, "extracted (U, P) does not reproduce the pair");
    let mut out = json!({
        "dims": wd.dims(),
        "U": matrix_to_json(extracted.u()),
        "P": matrix_to_json(extracted.p()),
        "residuals": wd.residuals,
        "round_trip_verdict": round_trip.verdict,
    });
    if let Some(data) = &built.bcl {
        let (_, _, gap) = coefficient_routes(data, tol)?;
        out["coefficient_route_gap"] = json!(gap);
    }
    Ok(out)
}

fn defect(built: &Built, tol: &TolerancePolicy, ledger: &mut Ledger) -> Result<Value, isopair_core::Error> {
    let pair = &built.pair;
    let report = five_way_verdict(pair, tol)?;
    ledger.check(report.consistency, format!("the five defect verdicts disagree: {:?}", report.verdicts));
    ledger.check(
        report.residuals.two_route_gap <= tol.eq_tol,
        format!("direct and geometric defect differ by {:.3e}", report.residuals.two_route_gap),
    );
    ledger.check(
        report.residuals.fringe_identity <= tol.approx_tol,
        format!("fringe identity residual {:.3e}", report.residuals.fringe_identity),
    );
    let negativity = negativity_check(&report, NegativityContext::of_pair(pair, tol), tol);
    ledger.check(negativity.pass, "defect is nonpositive but nonzero");
    let containments = wold_part_containments(pair, tol);
    ledger.check(
        containments.shift_parts_nested && containments.unitary_parts_nested,
        "Wold parts are not nested",
    );
    let mut out = json!({
        "report": report,
        "negativity": negativity,
        "containments": containments,
    });
    if let Some(data) = &built.bcl {
        let comm = op_norm(&(data.u() * data.p() - data.p() * data.u()));
        ledger.check(
            (comm <= tol.approx_tol) == report.verdicts.doubly_commuting,
            format!("UP = PU test ({comm:.3e}) disagrees with the doubly commuting verdict"),
        );
        out["up_commutator"] = json!(comm);
    }
    Ok(out)
}

fn random_interior_vector(pair: &GradedPair, seed: u64) -> CVector {
    let idx = pair.interior_indices();
    let g = gaussian_matrix(idx.len(), 1, &mut rng_from_seed(seed));
    let mut h = CVector::zeros(pair.dim());
    for (k, &i) in idx.iter().enumerate() {
        h[i] = g[(k, 0)];
    }
    h
}

fn analytic(pair: &GradedPair, config: &Config, tol: &TolerancePolicy, ledger: &mut Ledger) -> Value {
    let degree = config.series_degree();
    let mut out = serde_json::Map::new();
    for i in [Which::First, Which::Second] {
        let j = if i == Which::First { Which::Second } else { Which::First };
        let name = format!("Theta_V{}", which_label(j));
        let theta = (|| {
            let series = theta_vj(pair, i, degree, tol)?;
            let h = random_interior_vector(pair, config.seed);
            let residual = intertwining_residual_theta(pair, i, &h, degree, tol)?;
            Ok(json!({"series": series, "intertwining_residual": residual}))
        })();
        let v = ledger.section(&name, theta);
        if let Some(r) = v.get("intertwining_residual").and_then(Value::as_f64) {
            ledger.check(r <= tol.approx_tol, format!("{name} intertwining residual {r:.3e}"));
        }
        out.insert(name, v);

        let name = format!("theta_V{}V{}", which_label(i), which_label(j));
        let inv = characteristic_invariant(pair, i, degree, tol).map(|inv| {
            ledger.check(
                inv.bridge_residual <= tol.eq_tol,
                format!("{name} bridge identity residual {:.3e}", inv.bridge_residual),
            );
            json!(inv)
        });
        let v = ledger.section(&name, inv);
        out.insert(name, v);
    }
    Value::Object(out)
}

fn bidisc(built: &Built, tol: &TolerancePolicy, ledger: &mut Ledger) -> Option<Value> {
    let s = built.bidisc.as_ref()?;
    let (comm, iso) = structural_residuals(&built.pair);
    ledger.check(comm <= tol.eq_tol, format!("V1 V2 - V2 V1 = {comm:.3e}"));
    ledger.check(iso <= tol.approx_tol, format!("isometry defect on interior degrees {iso:.3e}"));
    let homogeneous = s.generators().iter().all(|g| g.is_homogeneous());
    let slocinski = ledger.section("slocinski", slocinski_check(s, &built.pair, tol).map(|v| json!(v)));
    Some(json!({
        "subspace_dim": s.dim(),
        "grade_profile": s.grade_profile(),
        "commutator": comm,
        "isometry_defect": iso,
        "slocinski": slocinski,
        "stabilization": {
            "criterion": "adjoints on interior degrees must match projections onto S_N, S_{N+2}, ... that change by less than approx_tol",
            "applied": !homogeneous,
            "reason": if homogeneous { "homogeneous generators: projections onto S preserve total degree" } else { "inhomogeneous generators" },
            "degree": s.degree(),
            "guard": s.guard(),
            "limit": s.degree() + ESCALATION,
        },
    }))
}

pub fn analyze(path: &Path, config: &Config) -> Result<Outcome, CliError> {
    let tol = config.tolerance()?;
    let spec = read_spec(path)?;
    let built = build(&spec, config.degree, &tol)?;
    let pair = &built.pair;
    let mut ledger = Ledger::default();

    let ex = extraction(&built, &tol, &mut ledger);
    let extraction = ledger.section("extraction", ex);
    let de = defect(&built, &tol, &mut ledger);
    let defect = ledger.section("defect", de);
    let analytic = analytic(pair, config, &tol, &mut ledger);
    let bidisc = bidisc(&built, &tol, &mut ledger);

    let ok = ledger.failures.is_empty();
    let mut report = json!({
        "config": config,
        "input": built.summary,
        "model": model_summary(pair),
        "wandering": wandering_summary(pair, &tol),
        "extraction": extraction,
        "defect": defect,
        "analytic": analytic,
        "consistency": {"ok": ok, "failures": ledger.failures},
    });
    if let Some(b) = bidisc {
        report["bidisc"] = b;
    }
    Ok(Outcome {
        report,
        exit: if ok { EXIT_OK } else { EXIT_INCONSISTENT },
    })
}

pub fn compare(a: &Path, b: &Path, config: &Config) -> Result<Outcome, CliError> {
    let tol = config.tolerance()?;
    let ba = build(&read_spec(a)?, config.degree, &tol)?;
    let bb = build(&read_spec(b)?, config.degree, &tol)?;
    let eq = pair_equivalence(&ba.pair, &bb.pair, &tol).map_err(CliError::from_core)?;
    let primary = &eq.coefficient_route;
    Ok(Outcome {
        report: json!({
            "config": config,
            "inputs": [ba.summary, bb.summary],
            "verdict": eq.verdict,
            "distinguishing_word": primary.distinguishing_word,
            "witness": primary.witness.as_ref().map(matrix_to_json),
            "coefficient_route": eq.coefficient_route,
            "up_route": eq.up_route,
        }),
        exit: EXIT_OK,
    })
}

pub fn construct(dim: usize, rank: Option<usize>, config: &Config) -> Result<Outcome, CliError> {
    if dim == 0 {
        return Err(CliError::Schema("--dim must be at least 1".into()));
    }
    if let Some(r) = rank {
        if r > dim {
            return Err(CliError::Schema(format!("--rank {r} exceeds --dim {dim}")));
        }
    }
    let mut rng = rng_from_seed(config.seed);
    let data = random_bcl(dim, rank, &mut rng);
    let rank = data.p().trace().re.round() as usize;
    Ok(Outcome {
        report: json!({
            "kind": "bcl",
            "U": matrix_to_json(data.u()),
            "P": matrix_to_json(data.p()),
            "meta": {"config": config, "dim": dim, "rank": rank},
        }),
        exit: EXIT_OK,
    })
}
