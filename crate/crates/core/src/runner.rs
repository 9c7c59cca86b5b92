//! The check registry and the suite runner.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::algebroid::AlgebroidClass;
use crate::error::{CheckError, ModelError};
use crate::eval::{difference_block, sample_points, EvalMode, ResidualBlock};
use crate::field::ScalarField;
use crate::forms::VectorField;
use crate::hamiltonian::{self, ConstraintSystem};
use crate::model::Model;
use crate::momentum::{self, GammaSign, MomentumData};
use crate::report::{CheckResult, Report, Status, TermMax, Worst, REPORT_SCHEMA_VERSION};
use crate::sigma2d::Sigma2dData;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Axioms,
    Momentum,
    Mechanics,
    Sigma2d,
    Multisym,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Axioms, Suite::Momentum, Suite::Mechanics, Suite::Sigma2d, Suite::Multisym];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Axioms => "axioms",
            Suite::Momentum => "momentum",
            Suite::Mechanics => "mechanics",
            Suite::Sigma2d => "sigma2d",
            Suite::Multisym => "multisym",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL.into_iter().find(|x| x.as_str() == s).ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

/// A registered check.
#[derive(Debug, Clone, Copy)]
pub struct CheckDef {
    pub name: &'static str,
    pub suite: Suite,
    pub tag: &'static str,
    pub informational: bool,
}

const fn def(name: &'static str, suite: Suite, tag: &'static str, informational: bool) -> CheckDef {
    CheckDef { name, suite, tag, informational }
}

use Suite::*;

pub const REGISTRY: &[CheckDef] = &[
    def("anchor_morphism", Axioms, "anchor is a bracket morphism", false),
    def("jacobi", Axioms, "Jacobi identity", false),
    def("jacobi_anchor", Axioms, "anchored Jacobiator", false),
    def("q_squared", Axioms, "Q^2 = 0", false),
    def("closedness_B", Momentum, "dB = 0", true),
    def("H1", Momentum, "H1", true),
    def("H2", Momentum, "H2", false),
    def("H3", Momentum, "H3", false),
    def("e_nabla_B", Momentum, "E-covariant constancy of B", true),
    def("moment_map_action", Momentum, "moment map: symplectic action", true),
    def("moment_map_hamiltonian", Momentum, "moment map: Hamiltonian vector fields", false),
    def("moment_map_equivariance", Momentum, "moment map: equivariance", false),
    def("first_class_deg1", Mechanics, "first class, momentum degree 1", false),
    def("first_class_deg0", Mechanics, "first class, momentum degree 0", false),
    def("flow_deg2", Mechanics, "flow, degree 2: E-covariant constancy of g", false),
    def("flow_deg1", Mechanics, "flow, degree 1", false),
    def("flow_deg0", Mechanics, "flow, degree 0: potential", false),
    def("tau_prime", Mechanics, "tau' = 0", true),
    def("mech_H1", Mechanics, "H1 after absorption", true),
    def("mech_H2", Mechanics, "H2 after absorption", false),
    def("mech_H3", Mechanics, "H3 after absorption", false),
    def("mech_identity_H2", Mechanics, "degree-1 flow equals H2", false),
    def("mech_identity_H3", Mechanics, "degree-0 first class equals H3", false),
    def("absorption_invariance", Mechanics, "absorbing beta shifts momenta", false),
    def("killing_g", Sigma2d, "rigid: Killing metric", true),
    def("killing_b", Sigma2d, "rigid: L b = d beta", true),
    def("almost_lie_algebroid", Sigma2d, "rigid: anchored almost Lie algebroid", true),
    def("gauged_metric", Sigma2d, "gauged metric condition", false),
    def("gauged_anchor", Sigma2d, "gauged anchor condition", false),
    def("boundary_mu", Sigma2d, "boundary: mu = -eta(rho)", false),
    def("boundary_one_form", Sigma2d, "boundary: one-form condition", false),
    def("boundary_section", Sigma2d, "boundary: section condition", false),
    def("closedness_b", Sigma2d, "db = 0", true),
    def("sigma_H1", Sigma2d, "H1 for B = b + d eta", true),
    def("sigma_H2", Sigma2d, "H2 for mu = -eta(rho)", false),
    def("sigma_H3", Sigma2d, "H3 for mu = -eta(rho)", false),
    def("sigma_identity_H2", Sigma2d, "boundary one-form condition equals H2", false),
    def("sigma_identity_H3", Sigma2d, "boundary section condition equals H3", false),
    def("closedness_h", Multisym, "dh = 0", true),
    def("descent_cyclic", Multisym, "algebraic descent, cyclic", false),
    def("descent_exchange", Multisym, "algebraic descent, exchange", false),
    def("HM2", Multisym, "HM2", false),
    def("HM3_forms", Multisym, "HM3, form degrees 1..n-1", false),
    def("HM3_functions", Multisym, "HM3, form degree 0", false),
    def("HM1", Multisym, "HM1", true),
    def("HM3_rewrite", Multisym, "HM3 at k = n-1 via E-differential", true),
    def("lie_algebra_HM2", Multisym, "flat specialization of HM2", false),
    def("lie_algebra_HM3_forms", Multisym, "flat specialization of HM3, k >= 1", false),
    def("lie_algebra_HM3_functions", Multisym, "flat specialization of HM3, k = 0", false),
    def("lie_algebra_HM1", Multisym, "flat specialization of HM1", false),
    def("lie_algebra_triviality", Multisym, "flat: HM2 implies HM1", false),
    def("n1_H1", Multisym, "n = 1: HM1 equals H1", false),
    def("n1_H2", Multisym, "n = 1: HM2 equals H2", false),
    def("n1_H3", Multisym, "n = 1: HM3 equals H3", false),
];

const H1_LIKE: [&str; 4] = ["H1", "mech_H1", "sigma_H1", "HM1"];

pub fn lookup(name: &str) -> &'static CheckDef {
    REGISTRY.iter().find(|s| s.name == name).unwrap_or_else(|| panic!("unregistered check `{name}`"))
}

#[derive(Debug, Clone)]
#[derive(Default)]
pub struct RunOptions {
    /// Empty selects every suite whose blocks are present.
    pub suites: Vec<Suite>,
    pub seed: Option<u64>,
    pub points: Option<usize>,
    pub tol: Option<f64>,
    pub require_h1: bool,
    pub mode: EvalMode,
}


struct Ctx {
    points: Vec<Vec<f64>>,
    mode: EvalMode,
    tol: f64,
    require_h1: bool,
    results: Vec<CheckResult>,
    verdicts: BTreeMap<String, String>,
    diagnostics: BTreeMap<String, f64>,
}

impl Ctx {
    fn base(&self, name: &str) -> CheckResult {
        let def = lookup(name);
        CheckResult {
            name: name.to_string(),
            tag: def.tag.to_string(),
            suite: def.suite.to_string(),
            status: Status::Skipped,
            informational: def.informational && !(self.require_h1 && H1_LIKE.contains(&name)),
            max_residual: None,
            points: 0,
            tuples: 0,
            terms: Vec::new(),
            worst: None,
            flags: Vec::new(),
            error: None,
        }
    }

    /// Evaluates a block and records it; returns whether it passed.
    fn record(&mut self, name: &str, block: Result<ResidualBlock, CheckError>, flags: &[&str]) -> bool {
        let mut r = self.base(name);
        r.flags = flags.iter().map(|s| s.to_string()).collect();
        let block = match block {
            Ok(b) => b,
            Err(CheckError::NotApplicable(why)) => {
                r.flags.push(why);
                self.results.push(r);
                return false;
            }
            Err(e) => {
                r.status = Status::Error;
                r.error = Some(e.to_string());
                self.results.push(r);
                return false;
            }
        };
        match block.evaluate(&self.points, self.mode) {
            Ok(ev) => {
                r.status = if ev.max <= self.tol { Status::Pass } else { Status::Fail };
                r.max_residual = Some(ev.max);
                r.points = ev.points;
                r.tuples = ev.tuples;
                r.terms = block.term_names.iter().zip(&ev.term_max).map(|(n, &m)| TermMax { name: n.clone(), max: m }).collect();
                r.worst = ev.worst.map(|(index, point)| Worst { index, point });
            }
            Err(e) => {
                r.status = Status::Error;
                r.error = Some(e.to_string());
            }
        }
        let passed = r.passed();
        self.results.push(r);
        passed
    }

    fn skip(&mut self, name: &str, why: &str) {
        let mut r = self.base(name);
        r.flags.push(why.to_string());
        self.results.push(r);
    }

    fn verdict(&mut self, key: &str, value: impl Into<String>) {
        self.verdicts.insert(key.to_string(), value.into());
    }
}

fn missing(suite: Suite, field: &str) -> ModelError {
    ModelError::MissingBlock { suite: suite.to_string(), field: field.to_string() }
}

/// The first model block a suite lacks, if any.
pub fn missing_block(model: &Model, suite: Suite) -> Option<&'static str> {
    match suite {
        Axioms => None,
        Momentum if model.momentum_form().is_none() => Some("presymplectic"),
        Momentum if model.mu.is_none() => Some("mu"),
        Mechanics if model.metric_pair().is_none() => Some("metric"),
        Sigma2d if model.metric_pair().is_none() => Some("metric"),
        Sigma2d if model.b_field.is_none() => Some("b_field"),
        Sigma2d if model.eta_boundary.is_none() => Some("eta_boundary"),
        Multisym if model.multisym.is_none() => Some("multisym"),
        _ => None,
    }
}

pub fn run(model: &Model, opts: &RunOptions) -> Result<Report, ModelError> {
    let suites: Vec<Suite> = if opts.suites.is_empty() {
        Suite::ALL.into_iter().filter(|&s| missing_block(model, s).is_none()).collect()
    } else {
        let mut s = opts.suites.clone();
        s.sort();
        s.dedup();
        if let Some((suite, field)) = s.iter().find_map(|&x| missing_block(model, x).map(|f| (x, f))) {
            return Err(missing(suite, field));
        }
        s
    };
    let seed = opts.seed.unwrap_or(model.settings.seed);
    let npoints = opts.points.unwrap_or(model.settings.points);
    let tol = opts.tol.unwrap_or(model.settings.tol);
    let mut ctx = Ctx {
        points: sample_points(&model.chart, npoints, seed),
        mode: opts.mode,
        tol,
        require_h1: opts.require_h1,
        results: Vec::new(),
        verdicts: BTreeMap::new(),
        diagnostics: BTreeMap::new(),
    };
    for &s in &suites {
        match s {
            Axioms => axioms(model, &mut ctx),
            Momentum => momentum_suite(model, &mut ctx),
            Mechanics => mechanics(model, &mut ctx),
            Sigma2d => sigma2d(model, &mut ctx),
            Multisym => multisym(model, &mut ctx),
        }
    }
    let passed = !ctx.results.iter().any(CheckResult::blocking);
    Ok(Report {
        schema_version: REPORT_SCHEMA_VERSION,
        model: model.name.clone(),
        model_hash: model.hash.clone(),
        seed,
        points: npoints,
        tol,
        suites: suites.iter().map(|s| s.to_string()).collect(),
        verdicts: ctx.verdicts,
        diagnostics: ctx.diagnostics,
        checks: ctx.results,
        passed,
    })
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn axioms(model: &Model, ctx: &mut Ctx) {
    let alg = &model.algebroid;
    let anchor = ctx.record("anchor_morphism", Ok(alg.anchor_morphism_residual()), &[]);
    let (j, jr) = alg.jacobi_residual();
    let jac = ctx.record("jacobi", Ok(j), &[]);
    let jac_r = ctx.record("jacobi_anchor", Ok(jr), &[]);
    let q = ctx.record("q_squared", alg.q_squared_residual(), &[]);
    ctx.verdict("algebroid", AlgebroidClass::from_passes(anchor, jac, jac_r).label());
    ctx.verdict("q_squared_agrees", yes_no(q == (anchor && jac)));
}

const H3_NOTE: &str = "measured as E-d(mu)(a,b) - <gamma(rho(e_a)), e_b>";

fn momentum_suite(model: &Model, ctx: &mut Ctx) {
    let (alg, conn) = (&model.algebroid, &model.connection);
    let b = model.momentum_form().expect("checked");
    let mu = model.mu.as_ref().expect("checked");
    let data = MomentumData { algebroid: alg, connection: conn, b, mu, sign: model.gamma_sign };
    let sign_note = match model.gamma_sign {
        GammaSign::Standard => "gamma = iota_rho B",
        GammaSign::Flipped => "gamma = -iota_rho B",
    };
    ctx.record("closedness_B", Ok(momentum::closedness("closedness_B", b)), &[]);
    let h1 = ctx.record("H1", momentum::check_h1(alg, conn, b, model.gamma_sign), &[sign_note]);
    let h2 = ctx.record("H2", Ok(momentum::check_h2(&data)), &[sign_note]);
    let h3 = ctx.record("H3", Ok(momentum::check_h3(&data)), &[sign_note, H3_NOTE]);
    ctx.record("e_nabla_B", Ok(conn.e_nabla_b_residual(alg, b)), &[]);
    match momentum::momentum_map_check(&data) {
        Ok(mm) => {
            ctx.record("moment_map_action", Ok(mm.symplectic), &[]);
            ctx.record("moment_map_hamiltonian", Ok(mm.hamiltonian), &[]);
            ctx.record("moment_map_equivariance", Ok(mm.equivariance), &[]);
        }
        Err(e) => {
            for n in ["moment_map_action", "moment_map_hamiltonian", "moment_map_equivariance"] {
                ctx.skip(n, &e.to_string());
            }
        }
    }
    ctx.verdict("momentum", momentum::classify(h1, h2, h3).label());
}

/// The mechanics system of a model, with absent blocks set to zero.
pub fn constraint_system(model: &Model) -> ConstraintSystem {
    let (d, r) = (model.dim(), model.rank());
    let (metric, inverse_metric) = model.metric_pair().expect("checked");
    ConstraintSystem {
        algebroid: model.algebroid.clone(),
        connection: model.connection.clone(),
        inverse_metric,
        metric,
        alpha: model.alpha.clone().unwrap_or_else(|| vec![ScalarField::zero(); r]),
        beta: model.beta.clone().unwrap_or_else(|| VectorField::zero(d)),
        potential: model.potential.clone().unwrap_or_else(ScalarField::zero),
        tau: model.tau.clone().unwrap_or_else(|| vec![vec![ScalarField::zero(); r]; r]),
        twist: None,
    }
}

fn mechanics(model: &Model, ctx: &mut Ctx) {
    let sys = constraint_system(model);
    match sys.first_class_residual() {
        Ok(fc) => {
            let a = ctx.record("first_class_deg1", Ok(fc.degree1), &[]);
            let b = ctx.record("first_class_deg0", Ok(fc.degree0), &[]);
            ctx.verdict("constraints_first_class", yes_no(a && b));
        }
        Err(e) => {
            let msg = e.to_string();
            ctx.record("first_class_deg1", Err(CheckError::Invalid(msg.clone())), &[]);
            ctx.record("first_class_deg0", Err(CheckError::Invalid(msg)), &[]);
        }
    }
    match sys.flow_residual() {
        Ok(fl) => {
            ctx.record("flow_deg2", Ok(fl.degree2), &["lowered with g: 2 g S g"]);
            ctx.record("flow_deg1", Ok(fl.degree1), &["lowered with g"]);
            ctx.record("flow_deg0", Ok(fl.degree0), &[]);
        }
        Err(e) => {
            for n in ["flow_deg2", "flow_deg1", "flow_deg0"] {
                ctx.record(n, Err(CheckError::Invalid(e.to_string())), &[]);
            }
        }
    }
    match hamiltonian::absorption_pipeline(&sys) {
        Ok(tb) => {
            let tau_ok = ctx.record("tau_prime", Ok(tb.tau_prime), &[]);
            let h1 = ctx.record("mech_H1", Ok(tb.h1), &[]);
            let h2 = ctx.record("mech_H2", Ok(tb.h2.clone()), &[]);
            let h3 = ctx.record("mech_H3", Ok(tb.h3.clone()), &[H3_NOTE]);
            if tau_ok {
                ctx.record("mech_identity_H2", Ok(difference_block("mech_identity_H2", &tb.dalpha, &tb.h2)), &[]);
                ctx.record("mech_identity_H3", Ok(difference_block("mech_identity_H3", &tb.first_class_deg0, &tb.h3)), &[]);
            } else {
                ctx.skip("mech_identity_H2", "tau' does not vanish; the degree-1 flow residual is reported instead");
                ctx.skip("mech_identity_H3", "tau' does not vanish");
            }
            ctx.verdict("mechanics", hamiltonian::mechanics_verdict(tau_ok, h1, h2, h3).label());
        }
        Err(e) => {
            for n in ["tau_prime", "mech_H1", "mech_H2", "mech_H3", "mech_identity_H2", "mech_identity_H3"] {
                ctx.record(n, Err(CheckError::Invalid(e.to_string())), &[]);
            }
        }
    }
    ctx.record("absorption_invariance", hamiltonian::absorption_invariance(&sys), &[]);

    let mut rank_min = f64::INFINITY;
    let mut cond_max: f64 = 0.0;
    for p in &ctx.points {
        match hamiltonian::diagnostics(&sys, p) {
            Ok((rank, cond)) => {
                rank_min = rank_min.min(rank as f64);
                cond_max = cond_max.max(cond);
            }
            Err(_) => cond_max = f64::INFINITY,
        }
    }
    ctx.diagnostics.insert("mechanics.anchor_rank_min".into(), rank_min);
    ctx.diagnostics.insert("mechanics.metric_condition_max".into(), cond_max);
    ctx.verdict("constraints_irreducible", yes_no(rank_min >= model.rank() as f64));
}

fn sigma2d(model: &Model, ctx: &mut Ctx) {
    let alg = &model.algebroid;
    let eta = model.eta_boundary.clone().expect("checked");
    let (mu, mu_note) = match &model.mu {
        Some(mu) => (mu.clone(), None),
        None => (
            (0..model.rank()).map(|a| -eta.interior(alg.anchor(a)).get(&[])).collect(),
            Some("mu defaulted to -eta(rho)"),
        ),
    };
    let data = Sigma2dData {
        algebroid: alg.clone(),
        connection: model.connection.clone(),
        metric: model.metric_pair().expect("checked").0,
        b: model.b_field.clone().expect("checked"),
        eta,
        mu,
        beta: model.beta_killing.clone(),
    };
    let rigid = data.check_rigid_invariance();
    ctx.record("killing_g", Ok(rigid.killing_g), &[]);
    let beta_note: &[&str] = if rigid.beta_defaulted { &["beta_a defaulted to iota_rho b"] } else { &[] };
    ctx.record("killing_b", Ok(rigid.killing_b), beta_note);
    ctx.record("almost_lie_algebroid", Ok(rigid.almost_lie_algebroid), &[]);
    let gauged = data.check_gauged_conditions();
    let mu_flags: Vec<&str> = mu_note.into_iter().collect();
    ctx.record("gauged_metric", Ok(gauged.metric), &[]);
    ctx.record("gauged_anchor", Ok(gauged.anchor), &[]);
    ctx.record("boundary_mu", Ok(gauged.boundary1), &mu_flags);
    ctx.record("boundary_one_form", Ok(gauged.boundary2), &mu_flags);
    ctx.record("boundary_section", Ok(gauged.boundary3), &mu_flags);
    ctx.record("closedness_b", Ok(momentum::closedness("closedness_b", &data.b)), &[]);
    match data.identification_pipeline() {
        Ok(t) => {
            let h1 = ctx.record("sigma_H1", Ok(t.h1), &[]);
            let h2 = ctx.record("sigma_H2", Ok(t.h2), &[]);
            let h3 = ctx.record("sigma_H3", Ok(t.h3), &[H3_NOTE]);
            ctx.record("sigma_identity_H2", Ok(t.h2_identity), &[]);
            ctx.record("sigma_identity_H3", Ok(t.h3_identity), &["exact up to rho_b applied to the H2 residual"]);
            ctx.verdict("sigma2d", momentum::classify(h1, h2, h3).label());
        }
        Err(e) => {
            for n in ["sigma_H1", "sigma_H2", "sigma_H3", "sigma_identity_H2", "sigma_identity_H3"] {
                ctx.record(n, Err(CheckError::Invalid(e.to_string())), &[]);
            }
        }
    }
}

fn multisym(model: &Model, ctx: &mut Ctx) {
    let ms = model.multisym.as_ref().expect("checked");
    ctx.record("closedness_h", Ok(ms.closedness_h()), &[]);
    let cyc = ctx.record("descent_cyclic", Ok(ms.descent_cyclic()), &["cyclic sum taken without signs"]);
    let exch = ctx.record("descent_exchange", Ok(ms.descent_exchange()), &[]);
    let hm2 = ctx.record("HM2", ms.hm2(), &[]);
    let forms = ctx.record(
        "HM3_forms",
        ms.hm3_forms(),
        &["pairings contract the first bundle slot", "third term: summand independent of i, sign sum collapsed"],
    );
    let funcs = ctx.record("HM3_functions", Ok(ms.hm3_functions()), &["pairings contract the first bundle slot"]);
    let hm1 = ctx.record("HM1", ms.hm1(), &[]);
    ctx.record("HM3_rewrite", ms.hm3_rewrite(), &["agrees with HM3_forms at k = n-1 only when HM2 and the descent hold"]);
    match ms.lie_algebra_agreement() {
        Ok(blocks) => {
            for b in blocks {
                let name = b.name.clone();
                ctx.record(&name, Ok(b), &[]);
            }
            let la = ms.lie_algebra().expect("applicable");
            if la.multimomentum_map_mode {
                ctx.verdict("multimomentum_map_mode", "yes");
            }
            if hm2 {
                let mut block = la.hm1;
                block.name = "lie_algebra_triviality".into();
                ctx.record("lie_algebra_triviality", Ok(block), &["HM2 passes; HM1 must follow"]);
            } else {
                ctx.skip("lie_algebra_triviality", "HM2 fails; the implication is vacuous");
            }
        }
        Err(e) => {
            for n in ["lie_algebra_HM2", "lie_algebra_HM3_forms", "lie_algebra_HM3_functions", "lie_algebra_HM1", "lie_algebra_triviality"] {
                ctx.skip(n, &e.to_string());
            }
        }
    }
    match ms.reduce_n1() {
        Ok(n1) => {
            ctx.record("n1_H1", Ok(n1.h1), &[]);
            ctx.record("n1_H2", Ok(n1.h2), &[]);
            ctx.record("n1_H3", Ok(n1.h3), &["exact up to rho_b applied to the H2 residual"]);
        }
        Err(e) => {
            for n in ["n1_H1", "n1_H2", "n1_H3"] {
                ctx.skip(n, &e.to_string());
            }
        }
    }
    ctx.verdict("multisym", momentum::classify(hm1, hm2, cyc && exch && forms && funcs).label());
}
