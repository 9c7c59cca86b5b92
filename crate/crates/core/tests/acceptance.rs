//! Acceptance criteria, one line each. Tolerances are pinned here.

use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lacheck::algebroid::{Algebroid, AlgebroidClass};
use lacheck::eval::{difference_block, sample_points, EvalMode, ResidualBlock};
use lacheck::examples::{self, EXAMPLES};
use lacheck::expr::parse;
use lacheck::forms::{FormField, VectorField};
use lacheck::hamiltonian::{poisson_bracket, absorption_pipeline, PhasePolynomial};
use lacheck::index::{increasing_tuples, Alternating};
use lacheck::model::Model;
use lacheck::multisym::PrenPlecticData;
use lacheck::report::Status;
use lacheck::runner::{constraint_system, run, RunOptions, REGISTRY};
use lacheck::sigma2d::Sigma2dData;
use lacheck::ScalarField;

const FD_REL_TOL: f64 = 1e-6;
const FORM_TOL: f64 = 1e-10;
const AXIOM_TOL: f64 = 1e-9;
const MOMENTUM_TOL: f64 = 1e-10;
const MECHANICS_TOL: f64 = 1e-9;
const POISSON_TOL: f64 = 1e-9;
const SIGMA_TOL: f64 = 1e-9;
const N1_TOL: f64 = 1e-12;
const LIE_TOL: f64 = 1e-10;

const COORDS: [&str; 4] = ["x", "y", "z", "w"];

fn coords(d: usize) -> Vec<String> {
    COORDS[..d].iter().map(|s| s.to_string()).collect()
}

fn field(src: &str, d: usize) -> ScalarField {
    parse(src, &coords(d)).unwrap().into()
}

fn model(name: &str) -> Model {
    Model::from_json(examples::source(name).unwrap()).unwrap()
}

fn max(block: &ResidualBlock, points: &[Vec<f64>]) -> f64 {
    block.evaluate(points, EvalMode::default()).unwrap().max
}

fn random_expr(rng: &mut ChaCha8Rng, d: usize, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.6) {
            COORDS[rng.gen_range(0..d)].to_string()
        } else {
            format!("({:.3})", rng.gen_range(-2.0..2.0))
        };
    }
    let a = random_expr(rng, d, depth - 1);
    match rng.gen_range(0..8) {
        0 => format!("({a} + {})", random_expr(rng, d, depth - 1)),
        1 => format!("({a} - {})", random_expr(rng, d, depth - 1)),
        2 | 3 => format!("({a} * {})", random_expr(rng, d, depth - 1)),
        4 => format!("sin({a})"),
        5 => format!("cos({a})"),
        6 => format!("exp(0.5 * {a})"),
        _ => format!("sqrt(1 + ({a})^2)"),
    }
}

fn random_poly(rng: &mut ChaCha8Rng, d: usize) -> ScalarField {
    let terms: Vec<String> = (0..rng.gen_range(1..=3))
        .map(|_| {
            let mut s = format!("({})", rng.gen_range(-3..=3));
            for _ in 0..rng.gen_range(0..=3) {
                s.push('*');
                s.push_str(COORDS[rng.gen_range(0..d)]);
            }
            s
        })
        .collect();
    field(&terms.join(" + "), d)
}

fn random_form(rng: &mut ChaCha8Rng, d: usize, k: usize) -> FormField {
    let mut f = FormField::zero(d, k);
    for t in increasing_tuples(d, k) {
        f.set(&t, random_poly(rng, d));
    }
    f
}

fn random_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// `(L_v ω)_I` from the coordinate formula.
fn lie_oracle(w: &FormField, v: &VectorField, p: &[f64]) -> Vec<f64> {
    let (d, k) = (w.dim(), w.degree());
    increasing_tuples(d, k)
        .iter()
        .map(|t| {
            let mut s = 0.0;
            for j in 0..d {
                s += v.comp(j).value(p).unwrap() * w.get(t).partial(j).value(p).unwrap();
                for slot in 0..k {
                    let mut u = t.clone();
                    u[slot] = j;
                    s += w.get(&u).value(p).unwrap() * v.comp(j).partial(t[slot]).value(p).unwrap();
                }
            }
            s
        })
        .collect()
}

struct Line {
    ok: bool,
    detail: String,
}

fn calculus_kernel() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut fd_rel: f64 = 0.0;
    for _ in 0..200 {
        let d = rng.gen_range(1..=4);
        let e = parse(&random_expr(&mut rng, d, 4), &coords(d)).unwrap();
        let p = random_point(&mut rng, d);
        let jet = e.eval_jet(&p).unwrap();
        let mut scale = 1.0 + jet.value().abs();
        for i in 0..d {
            scale = scale.max(1.0 + jet.gradient()[i].abs());
            for j in 0..d {
                scale = scale.max(1.0 + jet.hessian(i, j).abs());
            }
        }
        fd_rel = fd_rel.max(e.fd_cross_check(&p, 1e-4).unwrap() / scale);
    }
    let (mut dd, mut cartan): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let d = rng.gen_range(2..=4);
        let k = rng.gen_range(0..d);
        let w = random_form(&mut rng, d, k);
        let v = VectorField::new((0..d).map(|_| random_poly(&mut rng, d)).collect());
        let p = random_point(&mut rng, d);
        if k + 2 <= d {
            let ddw = w.exterior_derivative().exterior_derivative();
            for t in increasing_tuples(d, k + 2) {
                dd = dd.max(ddw.get(&t).value(&p).unwrap().abs());
            }
        }
        let lie = w.lie_derivative(&v);
        for (t, o) in increasing_tuples(d, k).iter().zip(lie_oracle(&w, &v, &p)) {
            cartan = cartan.max((lie.get(t).value(&p).unwrap() - o).abs());
        }
    }
    Line {
        ok: fd_rel < FD_REL_TOL && dd < FORM_TOL && cartan < FORM_TOL,
        detail: format!("fd rel {fd_rel:.2e} < {FD_REL_TOL:e}; dd {dd:.2e}, cartan {cartan:.2e} < {FORM_TOL:e}"),
    }
}

fn with_structure(alg: &Algebroid, anchor: Vec<VectorField>, c: impl Fn(usize, usize, usize) -> ScalarField) -> Algebroid {
    let r = alg.rank();
    let structure = (0..r)
        .map(|cc| {
            let mut s = Alternating::zero(r, 2);
            for t in increasing_tuples(r, 2) {
                s.set(&t, c(cc, t[0], t[1]));
            }
            s
        })
        .collect();
    Algebroid::new(alg.dim(), anchor, structure).unwrap()
}

fn axiom_equivalence() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut algebroids: Vec<Algebroid> = EXAMPLES.iter().map(|(n, _)| model(n).algebroid).collect();
    for i in 0..20 {
        let base = algebroids[i % 6].clone();
        let (d, r) = (base.dim(), base.rank());
        let perturbed = if i % 2 == 0 {
            // rescaling the frame keeps every axiom
            let l = rng.gen_range(0.5..2.0);
            let anchor = (0..r).map(|a| base.anchor(a).scale_by(&ScalarField::constant(l))).collect();
            with_structure(&base, anchor, |c, a, b| base.structure(c, a, b).scale(l))
        } else {
            let anchor: Vec<VectorField> = (0..r)
                .map(|a| VectorField::new((0..d).map(|j| base.rho(j, a) + random_poly(&mut rng, d).scale(0.1)).collect()))
                .collect();
            let (c0, a0) = (rng.gen_range(0..r), rng.gen_range(0..r));
            let bump = random_poly(&mut rng, d);
            with_structure(&base, anchor, |c, a, b| {
                let s = base.structure(c, a, b);
                if c == c0 && (a == a0 || b == a0) { s + bump.clone() } else { s }
            })
        };
        algebroids.push(perturbed);
    }
    let points = sample_points(&lacheck::forms::Chart::cube(4), 32, 3);
    let mut agree = 0;
    let mut lie = 0;
    for alg in &algebroids {
        let pts: Vec<Vec<f64>> = points.iter().map(|p| p[..alg.dim()].iter().map(|x| 1.0 + 0.4 * x).collect()).collect();
        let anchor = max(&alg.anchor_morphism_residual(), &pts) <= AXIOM_TOL;
        let (j, jr) = alg.jacobi_residual();
        let jac = max(&j, &pts) <= AXIOM_TOL;
        let q = max(&alg.q_squared_residual().unwrap(), &pts) <= AXIOM_TOL;
        if AlgebroidClass::from_passes(anchor, jac, max(&jr, &pts) <= AXIOM_TOL) == AlgebroidClass::LieAlgebroid {
            lie += 1;
        }
        if q == (anchor && jac) {
            agree += 1;
        }
    }
    Line {
        ok: agree == algebroids.len(),
        detail: format!("{agree}/{} verdicts agree at tol {AXIOM_TOL:e} ({lie} Lie algebroids)", algebroids.len()),
    }
}

/// `ρ_a μ_b − ρ_b μ_a − C^c_{ab} μ_c + B(ρ_a, ρ_b)` by central differences.
fn h3_brute_force(m: &Model, points: &[Vec<f64>]) -> f64 {
    let alg = &m.algebroid;
    let b = m.momentum_form().unwrap();
    let mu = m.mu.as_ref().unwrap();
    let (d, r, h) = (m.dim(), m.rank(), 1e-5);
    let deriv = |f: &ScalarField, v: &VectorField, p: &[f64]| -> f64 {
        (0..d)
            .map(|i| {
                let (mut q, mut s) = (p.to_vec(), p.to_vec());
                q[i] += h;
                s[i] -= h;
                v.comp(i).value(p).unwrap() * (f.value(&q).unwrap() - f.value(&s).unwrap()) / (2.0 * h)
            })
            .sum()
    };
    let mut worst: f64 = 0.0;
    for p in points {
        for a in 0..r {
            for bb in 0..r {
                let mut v = deriv(&mu[bb], alg.anchor(a), p) - deriv(&mu[a], alg.anchor(bb), p);
                for c in 0..r {
                    v -= alg.structure(c, a, bb).value(p).unwrap() * mu[c].value(p).unwrap();
                }
                for i in 0..d {
                    for j in 0..d {
                        v += b.get(&[i, j]).value(p).unwrap() * alg.rho(i, a).value(p).unwrap() * alg.rho(j, bb).value(p).unwrap();
                    }
                }
                worst = worst.max(v.abs());
            }
        }
    }
    worst
}

fn momentum_reduction() -> Line {
    let opts = RunOptions { points: Some(100), suites: vec![lacheck::runner::Suite::Momentum], ..RunOptions::default() };
    let rot = run(&model("rotation_momentum_map"), &opts).unwrap();
    let rot_max = ["H1", "H2", "H3"].iter().map(|n| rot.check(n).unwrap().max_residual.unwrap()).fold(0.0, f64::max);
    let tr_model = model("translation_nonequivariant");
    let tr = run(&tr_model, &opts).unwrap();
    let h3 = tr.check("H3").unwrap();
    let points = sample_points(&tr_model.chart, 100, tr.seed);
    let oracle = h3_brute_force(&tr_model, &points);
    let measured = h3.max_residual.unwrap();
    Line {
        ok: rot_max < MOMENTUM_TOL && h3.status == Status::Fail && (measured - oracle).abs() < MOMENTUM_TOL,
        detail: format!(
            "rotation H1-3 max {rot_max:.2e} < {MOMENTUM_TOL:e}; translation H3 {measured:.6} vs oracle {oracle:.6}, gap {:.2e}",
            (measured - oracle).abs()
        ),
    }
}

fn mechanics_equivalence() -> Line {
    let m = model("magnetic_twist_mechanics");
    let points = sample_points(&m.chart, 64, 5);
    let base = constraint_system(&m);
    let mut perturbed = base.clone();
    perturbed.alpha[0] = &perturbed.alpha[0] + field("x*z + 0.3*y^2", 3);
    perturbed.alpha[1] = &perturbed.alpha[1] + field("sin(x)", 3);
    perturbed.potential = &perturbed.potential + field("x*y", 3);
    let (mut gap, mut tau, mut size): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for sys in [&base, &perturbed] {
        let tb = absorption_pipeline(sys).unwrap();
        tau = tau.max(max(&tb.tau_prime, &points));
        gap = gap.max(max(&difference_block("deg1", &tb.dalpha, &tb.h2), &points));
        gap = gap.max(max(&difference_block("deg0", &tb.first_class_deg0, &tb.h3), &points));
        size = size.max(max(&tb.h2, &points)).max(max(&tb.h3, &points));
    }
    Line {
        ok: tau == 0.0 && gap < MECHANICS_TOL && size > 1e-3,
        detail: format!("tau' {tau:.1e}; flow vs H2/H3 gap {gap:.2e} < {MECHANICS_TOL:e} (residuals up to {size:.2})"),
    }
}

fn random_phase(rng: &mut ChaCha8Rng, d: usize) -> PhasePolynomial {
    let mut f = PhasePolynomial::function(d, random_poly(rng, d));
    for i in 0..d {
        f = f + PhasePolynomial::momentum(d, i).mul_fn(&random_poly(rng, d));
        for j in i..d {
            let pij = PhasePolynomial::momentum(d, i).mul(&PhasePolynomial::momentum(d, j)).unwrap();
            f = f + pij.mul_fn(&random_poly(rng, d));
        }
    }
    f
}

fn poisson_algebra() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut anti, mut jac): (f64, f64) = (0.0, 0.0);
    for trial in 0..60 {
        let d = rng.gen_range(2..=3);
        let twist = random_form(&mut rng, d, 1).exterior_derivative();
        let twist = (trial % 2 == 1).then_some(&twist);
        let (f, g, h) = (random_phase(&mut rng, d), random_phase(&mut rng, d), random_phase(&mut rng, d));
        let (x, p) = (random_point(&mut rng, d), random_point(&mut rng, d));
        let fg = poisson_bracket(&f, &g, twist).unwrap();
        let gf = poisson_bracket(&g, &f, twist).unwrap();
        anti = anti.max((fg.value(&x, &p).unwrap() + gf.value(&x, &p).unwrap()).abs());
        let j = poisson_bracket(&f, &poisson_bracket(&g, &h, twist).unwrap(), twist).unwrap()
            + poisson_bracket(&g, &poisson_bracket(&h, &f, twist).unwrap(), twist).unwrap()
            + poisson_bracket(&h, &fg, twist).unwrap();
        jac = jac.max(j.value(&x, &p).unwrap().abs());
    }
    Line {
        ok: anti == 0.0 && jac < POISSON_TOL,
        detail: format!("antisymmetry {anti:e} (exact); Jacobi {jac:.2e} < {POISSON_TOL:e} with and without twist"),
    }
}

fn sigma_equivalence() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut gap, mut cases): (f64, usize) = (0.0, 0);
    for (name, src) in EXAMPLES {
        let m = Model::from_json(src).unwrap();
        let (Some(b), Some(eta), Some((g, _))) = (m.b_field.clone(), m.eta_boundary.clone(), m.metric_pair()) else {
            continue;
        };
        let points = sample_points(&m.chart, 64, 8);
        for trial in 0..4 {
            let eta = if trial == 0 { eta.clone() } else { &eta + &random_form(&mut rng, m.dim(), 1) };
            let b = if trial < 2 { b.clone() } else { &b + &random_form(&mut rng, m.dim(), 2) };
            let data = Sigma2dData {
                algebroid: m.algebroid.clone(),
                connection: m.connection.clone(),
                metric: g.clone(),
                b,
                eta,
                mu: Vec::new(),
                beta: None,
            };
            let t = data.identification_pipeline().unwrap_or_else(|e| panic!("{name}: {e}"));
            gap = gap.max(max(&t.h2_identity, &points)).max(max(&t.h3_identity, &points));
            cases += 1;
        }
    }
    Line {
        ok: cases > 0 && gap < SIGMA_TOL,
        detail: format!("boundary vs H2/H3 gap {gap:.2e} < {SIGMA_TOL:e} over {cases} models"),
    }
}

fn lift(m: &Model) -> PrenPlecticData {
    let b = m.momentum_form().unwrap().clone();
    let mut data = PrenPlecticData::new(m.algebroid.clone(), m.connection.clone(), 1, b);
    for (a, mu) in m.mu.as_ref().unwrap().iter().enumerate() {
        data.eta[0].set(&[], &[a], mu.clone());
    }
    data
}

fn multisym_reduction() -> Line {
    let (mut n1, mut lie): (f64, f64) = (0.0, 0.0);
    for (_, src) in EXAMPLES {
        let m = Model::from_json(src).unwrap();
        let points = sample_points(&m.chart, 64, 9);
        let mut cases = Vec::new();
        if m.mu.is_some() && m.momentum_form().is_some() {
            cases.push(lift(&m));
        }
        if let Some(ms) = &m.multisym {
            cases.push(ms.clone());
        }
        for data in cases {
            if let Ok(r) = data.reduce_n1() {
                n1 = n1.max(max(&r.h1, &points)).max(max(&r.h2, &points)).max(max(&r.h3, &points));
            }
            if let Ok(blocks) = data.lie_algebra_agreement() {
                for b in blocks {
                    lie = lie.max(max(&b, &points));
                }
            }
        }
    }
    let plectic = model("plectic2_flux_model");
    let ms = plectic.multisym.as_ref().unwrap();
    let points = sample_points(&plectic.chart, 64, 10);
    let hm2 = max(&ms.hm2().unwrap(), &points);
    let hm1 = max(&ms.lie_algebra().unwrap().hm1, &points);
    Line {
        ok: n1 < N1_TOL && lie < LIE_TOL && hm2 < 1e-8 && hm1 < 1e-8,
        detail: format!(
            "n = 1 gap {n1:.2e} < {N1_TOL:e}; flat specialization gap {lie:.2e} < {LIE_TOL:e}; plectic2 HM2 {hm2:.1e} -> HM1 {hm1:.1e}"
        ),
    }
}

fn determinism_and_coverage() -> Line {
    let mut identical = true;
    let mut exercised = std::collections::BTreeSet::new();
    for (_, src) in EXAMPLES {
        let m = Model::from_json(src).unwrap();
        let a = run(&m, &RunOptions::default()).unwrap();
        let b = run(&m, &RunOptions { mode: EvalMode::Sequential, ..RunOptions::default() }).unwrap();
        identical &= a.to_json() == b.to_json() && a.to_json() == run(&m, &RunOptions::default()).unwrap().to_json();
        exercised.extend(a.checks.iter().filter(|c| c.status != Status::Skipped).map(|c| c.name.clone()));
    }
    let missing: Vec<_> = REGISTRY.iter().filter(|s| !exercised.contains(s.name)).map(|s| s.name).collect();
    Line {
        ok: identical && missing.is_empty(),
        detail: format!("byte-identical reports: {identical}; unexercised checks: {missing:?}"),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Line); 8] = [
        ("calculus kernel", calculus_kernel),
        ("axiom equivalence", axiom_equivalence),
        ("momentum map reduction", momentum_reduction),
        ("mechanics equivalence", mechanics_equivalence),
        ("Poisson algebra", poisson_algebra),
        ("sigma model equivalence", sigma_equivalence),
        ("multisymplectic reduction", multisym_reduction),
        ("determinism and coverage", determinism_and_coverage),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let line = f();
        let status = if line.ok { "PASS" } else { "FAIL" };
        println!("criterion {} {name}: {status}  {}", i + 1, line.detail);
        failed += usize::from(!line.ok);
    }
    println!("{}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
