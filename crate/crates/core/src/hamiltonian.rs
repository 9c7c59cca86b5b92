//! Constrained Hamiltonian mechanics on `T*M` with momentum-graded
//! polynomials.
//!
//! The bracket follows `{p_i, x^j} = δ_i^j`, so
//! `{F, G} = ∂F/∂p_i ∂G/∂x^i − ∂F/∂x^i ∂G/∂p_i + B_ij ∂F/∂p_i ∂G/∂p_j`.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Neg, Sub};

use crate::algebroid::Algebroid;
use crate::connection::Connection;
use crate::error::{CheckError, EvalError};
use crate::eval::ResidualBlock;
use crate::field::ScalarField;
use crate::forms::{FormField, SymTensor, VectorField};
use crate::index::increasing_tuples;
use crate::momentum::{self, GammaSign, MomentumData};

/// Largest momentum degree of intermediate results.
pub const DEGREE_BOUND: usize = 4;
/// Largest momentum degree accepted from model inputs.
pub const INPUT_DEGREE_BOUND: usize = 2;

/// `Σ c_m(x) p^m` keyed by sorted momentum multi-indices.
#[derive(Clone, Debug)]
pub struct PhasePolynomial {
    dim: usize,
    terms: BTreeMap<Vec<usize>, ScalarField>,
}

impl PhasePolynomial {
    pub fn zero(dim: usize) -> Self {
        PhasePolynomial { dim, terms: BTreeMap::new() }
    }

    pub fn function(dim: usize, f: ScalarField) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(Vec::new(), f);
        p
    }

    /// The momentum `p_i`.
    pub fn momentum(dim: usize, i: usize) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(vec![i], ScalarField::one());
        p
    }

    /// `v^i p_i`.
    pub fn linear(v: &VectorField) -> Self {
        let mut p = Self::zero(v.dim());
        for i in 0..v.dim() {
            p.add_term(vec![i], v.comp(i).clone());
        }
        p
    }

    /// `½ c^{ij} p_i p_j`.
    pub fn quadratic(c: &SymTensor) -> Self {
        let mut p = Self::zero(c.dim());
        for ((i, j), f) in c.iter() {
            let coeff = if i == j { f.scale(0.5) } else { f };
            p.add_term(vec![i, j], coeff);
        }
        p
    }

    fn add_term(&mut self, mono: Vec<usize>, f: ScalarField) {
        if f.is_zero() {
            return;
        }
        let slot = self.terms.entry(mono).or_insert_with(ScalarField::zero);
        *slot = &*slot + f;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn coefficient(&self, mono: &[usize]) -> ScalarField {
        let mut key = mono.to_vec();
        key.sort_unstable();
        self.terms.get(&key).cloned().unwrap_or_else(ScalarField::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &ScalarField)> {
        self.terms.iter()
    }

    /// Rejects polynomials outside the affine-plus-quadratic ansatz.
    pub fn check_input_degree(&self) -> Result<(), CheckError> {
        match self.degree() {
            d if d > INPUT_DEGREE_BOUND => Err(CheckError::DegreeOverflow { degree: d, bound: INPUT_DEGREE_BOUND }),
            _ => Ok(()),
        }
    }

    pub fn mul_fn(&self, f: &ScalarField) -> Self {
        let mut out = Self::zero(self.dim);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * f);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self, CheckError> {
        let deg = self.degree() + other.degree();
        if !self.terms.is_empty() && !other.terms.is_empty() && deg > DEGREE_BOUND {
            return Err(CheckError::DegreeOverflow { degree: deg, bound: DEGREE_BOUND });
        }
        let mut out = Self::zero(self.dim);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut m: Vec<usize> = m1.iter().chain(m2).copied().collect();
                m.sort_unstable();
                out.add_term(m, c1 * c2);
            }
        }
        Ok(out)
    }

    /// Coefficientwise `∂/∂x^i`.
    pub fn partial_x(&self, i: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.partial(i));
        }
        out
    }

    /// `∂/∂p_i`.
    pub fn partial_p(&self, i: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (m, c) in &self.terms {
            let mult = m.iter().filter(|&&k| k == i).count();
            if mult == 0 {
                continue;
            }
            let mut rest = m.clone();
            let pos = rest.iter().position(|&k| k == i).expect("present");
            rest.remove(pos);
            out.add_term(rest, c.scale(mult as f64));
        }
        out
    }

    /// Homogeneous part of degree `k`.
    pub fn homogeneous(&self, k: usize) -> Self {
        PhasePolynomial {
            dim: self.dim,
            terms: self.terms.iter().filter(|(m, _)| m.len() == k).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Substitution `p_i → p_i + a_i(x)`.
    pub fn shift(&self, a: &[ScalarField]) -> Result<Self, CheckError> {
        let mut out = Self::zero(self.dim);
        for (m, c) in &self.terms {
            let mut prod = Self::function(self.dim, c.clone());
            for &i in m {
                let factor = Self::momentum(self.dim, i) + Self::function(self.dim, a[i].clone());
                prod = prod.mul(&factor)?;
            }
            out = out + prod;
        }
        Ok(out)
    }

    pub fn value(&self, x: &[f64], p: &[f64]) -> Result<f64, EvalError> {
        self.terms.iter().try_fold(0.0, |acc, (m, c)| {
            Ok(acc + c.value(x)? * m.iter().map(|&i| p[i]).product::<f64>())
        })
    }
}

impl Add for PhasePolynomial {
    type Output = PhasePolynomial;
    fn add(mut self, rhs: PhasePolynomial) -> PhasePolynomial {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl Neg for PhasePolynomial {
    type Output = PhasePolynomial;
    fn neg(self) -> PhasePolynomial {
        PhasePolynomial {
            dim: self.dim,
            terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect(),
        }
    }
}

impl Sub for PhasePolynomial {
    type Output = PhasePolynomial;
    fn sub(self, rhs: PhasePolynomial) -> PhasePolynomial {
        self + (-rhs)
    }
}

/// Momentum degrees present in `f`.
pub fn grading_report(f: &PhasePolynomial) -> BTreeSet<usize> {
    let mut out: BTreeSet<usize> = f.terms.keys().map(Vec::len).collect();
    if out.is_empty() {
        out.insert(0);
    }
    out
}

/// `{F, G}` with the optional twist `{p_i, p_j} = B_ij`, built as
/// `P(F, G) − P(G, F)` so that antisymmetry holds bit for bit.
pub fn poisson_bracket(f: &PhasePolynomial, g: &PhasePolynomial, twist: Option<&FormField>) -> Result<PhasePolynomial, CheckError> {
    Ok(half_bracket(f, g, twist)? - half_bracket(g, f, twist)?)
}

/// `∂F/∂p_i ∂G/∂x^i + Σ_{i<j} B_ij ∂F/∂p_i ∂G/∂p_j`.
fn half_bracket(f: &PhasePolynomial, g: &PhasePolynomial, twist: Option<&FormField>) -> Result<PhasePolynomial, CheckError> {
    let d = f.dim;
    let mut out = PhasePolynomial::zero(d);
    for i in 0..d {
        out = out + f.partial_p(i).mul(&g.partial_x(i))?;
    }
    if let Some(b) = twist {
        for t in increasing_tuples(d, 2) {
            let bij = b.get(&t);
            if !bij.is_zero() {
                out = out + f.partial_p(t[0]).mul(&g.partial_p(t[1]))?.mul_fn(&bij);
            }
        }
    }
    Ok(out)
}

/// Affine constraints `Φ_a = ρ^i_a p_i + α_a`, Hamiltonian
/// `H = ½ g^{ij} p_i p_j + β^i p_i + V` and multipliers
/// `λ^b_a = g^{ij} Γ^b_{aj} p_i + τ^b_a`.
#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    pub algebroid: Algebroid,
    pub connection: Connection,
    pub inverse_metric: SymTensor,
    pub metric: SymTensor,
    pub alpha: Vec<ScalarField>,
    pub beta: VectorField,
    pub potential: ScalarField,
    /// `tau[a][b] = τ^b_a`.
    pub tau: Vec<Vec<ScalarField>>,
    pub twist: Option<FormField>,
}

/// Residual blocks of the first-class condition by momentum degree.
pub struct FirstClassBlocks {
    pub degree1: ResidualBlock,
    pub degree0: ResidualBlock,
}

/// Residual blocks of the flow condition by momentum degree, with the
/// degree-2 and degree-1 parts lowered by the metric.
pub struct FlowBlocks {
    pub degree2: ResidualBlock,
    pub degree1: ResidualBlock,
    pub degree0: ResidualBlock,
}

/// Output of [`ConstraintSystem::absorb_beta`].
pub struct Absorbed {
    pub system: ConstraintSystem,
    /// `A = g♭β`.
    pub potential_form: Vec<ScalarField>,
}

impl ConstraintSystem {
    pub fn dim(&self) -> usize {
        self.algebroid.dim()
    }

    pub fn rank(&self) -> usize {
        self.algebroid.rank()
    }

    pub fn constraint(&self, a: usize) -> PhasePolynomial {
        PhasePolynomial::linear(self.algebroid.anchor(a)) + PhasePolynomial::function(self.dim(), self.alpha[a].clone())
    }

    pub fn hamiltonian(&self) -> PhasePolynomial {
        PhasePolynomial::quadratic(&self.inverse_metric)
            + PhasePolynomial::linear(&self.beta)
            + PhasePolynomial::function(self.dim(), self.potential.clone())
    }

    /// `λ^b_a`.
    pub fn multiplier(&self, a: usize, b: usize) -> PhasePolynomial {
        let d = self.dim();
        let v = VectorField::new(
            (0..d)
                .map(|i| (0..d).map(|j| self.inverse_metric.get(i, j) * self.connection.get(b, a, j)).sum())
                .collect(),
        );
        PhasePolynomial::linear(&v) + PhasePolynomial::function(d, self.tau[a][b].clone())
    }

    fn twist(&self) -> Option<&FormField> {
        self.twist.as_ref()
    }

    /// `{Φ_a, Φ_b}` and `C^c_{ab} Φ_c` for `a < b`.
    fn first_class_parts(&self, a: usize, b: usize) -> Result<(PhasePolynomial, PhasePolynomial), CheckError> {
        let br = poisson_bracket(&self.constraint(a), &self.constraint(b), self.twist())?;
        let rhs = (0..self.rank()).fold(PhasePolynomial::zero(self.dim()), |acc, c| {
            acc + self.constraint(c).mul_fn(&self.algebroid.structure(c, a, b))
        });
        Ok((br, rhs))
    }

    pub fn first_class_residual(&self) -> Result<FirstClassBlocks, CheckError> {
        let mut degree1 = ResidualBlock::new("first_class_deg1", &["bracket", "structure"]);
        let mut degree0 = ResidualBlock::new("first_class_deg0", &["bracket", "structure"]);
        for t in increasing_tuples(self.rank(), 2) {
            let (br, rhs) = self.first_class_parts(t[0], t[1])?;
            if br.degree() > 1 || rhs.degree() > 1 {
                return Err(CheckError::DegreeOverflow { degree: br.degree().max(rhs.degree()), bound: 1 });
            }
            for k in 0..self.dim() {
                degree1.push(vec![t[0], t[1], k], vec![br.coefficient(&[k]), -rhs.coefficient(&[k])]);
            }
            degree0.push(t.clone(), vec![br.coefficient(&[]), -rhs.coefficient(&[])]);
        }
        Ok(FirstClassBlocks { degree1, degree0 })
    }

    /// `{H, Φ_a}` and `λ^b_a Φ_b`.
    pub fn flow_parts(&self, a: usize) -> Result<(PhasePolynomial, PhasePolynomial), CheckError> {
        let br = poisson_bracket(&self.hamiltonian(), &self.constraint(a), self.twist())?;
        let mut rhs = PhasePolynomial::zero(self.dim());
        for b in 0..self.rank() {
            rhs = rhs + self.multiplier(a, b).mul(&self.constraint(b))?;
        }
        Ok((br, rhs))
    }

    /// The full residual polynomial `{H, Φ_a} − λ^b_a Φ_b`.
    pub fn flow_polynomial(&self, a: usize) -> Result<PhasePolynomial, CheckError> {
        let (br, rhs) = self.flow_parts(a)?;
        Ok(br - rhs)
    }

    pub fn flow_residual(&self) -> Result<FlowBlocks, CheckError> {
        let d = self.dim();
        let g = &self.metric;
        let mut degree2 = ResidualBlock::new("flow_deg2", &["bracket", "multiplier"]);
        let mut degree1 = ResidualBlock::new("flow_deg1", &["bracket", "multiplier"]);
        let mut degree0 = ResidualBlock::new("flow_deg0", &["bracket", "multiplier"]);
        for a in 0..self.rank() {
            let (br, rhs) = self.flow_parts(a)?;
            let parts = [br, -rhs];
            // S^{jk} with Q(p) = S^{jk} p_j p_k, lowered to 2 g S g
            let sym = |p: &PhasePolynomial, j: usize, k: usize| {
                let c = p.coefficient(&[j, k]);
                if j == k {
                    c
                } else {
                    c.scale(0.5)
                }
            };
            for m in 0..d {
                for n in m..d {
                    let terms = parts
                        .iter()
                        .map(|p| {
                            (0..d)
                                .flat_map(|j| (0..d).map(move |k| (j, k)))
                                .map(|(j, k)| g.get(m, j) * sym(p, j, k) * g.get(k, n))
                                .sum::<ScalarField>()
                                .scale(2.0)
                        })
                        .collect();
                    degree2.push(vec![a, m, n], terms);
                }
            }
            for i in 0..d {
                let terms = parts
                    .iter()
                    .map(|p| (0..d).map(|k| g.get(i, k) * p.coefficient(&[k])).sum())
                    .collect();
                degree1.push(vec![a, i], terms);
            }
            degree0.push(vec![a], parts.iter().map(|p| p.coefficient(&[])).collect());
        }
        Ok(FlowBlocks { degree2, degree1, degree0 })
    }

    /// Absorbs `β` into a magnetic twist `B = dA`, `A = g♭β`.
    pub fn absorb_beta(&self) -> Absorbed {
        let d = self.dim();
        let r = self.rank();
        let a_form: Vec<ScalarField> = (0..d)
            .map(|i| (0..d).map(|j| self.metric.get(i, j) * self.beta.comp(j)).sum())
            .collect();
        let da = FormField::one_form(a_form.clone()).exterior_derivative();
        let twist = match &self.twist {
            Some(b) => b + &da,
            None => da,
        };
        let alpha = (0..r)
            .map(|a| {
                let rho_a: ScalarField = (0..d).map(|i| self.algebroid.rho(i, a) * &a_form[i]).sum();
                &self.alpha[a] - rho_a
            })
            .collect();
        let potential = &self.potential - self.metric.pair(&self.beta, &self.beta).scale(0.5);
        let tau = (0..r)
            .map(|a| {
                (0..r)
                    .map(|b| {
                        let shift: ScalarField = (0..d).map(|i| self.connection.get(b, a, i) * self.beta.comp(i)).sum();
                        &self.tau[a][b] - shift
                    })
                    .collect()
            })
            .collect();
        Absorbed {
            system: ConstraintSystem {
                alpha,
                potential,
                tau,
                beta: VectorField::zero(d),
                twist: Some(twist),
                ..self.clone()
            },
            potential_form: a_form,
        }
    }

    /// `τ^b_a` entries.
    pub fn tau_block(&self, name: &str) -> ResidualBlock {
        let mut block = ResidualBlock::new(name, &["value"]);
        for a in 0..self.rank() {
            for b in 0..self.rank() {
                block.push(vec![b, a], vec![self.tau[a][b].clone()]);
            }
        }
        block
    }

    pub fn twist_or_zero(&self) -> FormField {
        self.twist.clone().unwrap_or_else(|| FormField::zero(self.dim(), 2))
    }
}

/// Coefficients of `R(x, p) − R′(x, p + A)`, where `R` and `R′` are the
/// flow residuals before and after [`ConstraintSystem::absorb_beta`].
pub fn absorption_invariance(sys: &ConstraintSystem) -> Result<ResidualBlock, CheckError> {
    let absorbed = sys.absorb_beta();
    let mut block = ResidualBlock::new("absorption_invariance", &["before", "after_shifted"]);
    for a in 0..sys.rank() {
        let before = sys.flow_polynomial(a)?;
        let after = absorbed.system.flow_polynomial(a)?.shift(&absorbed.potential_form)?;
        let monos: BTreeSet<Vec<usize>> = before.terms().chain(after.terms()).map(|(m, _)| m.clone()).collect();
        for m in monos {
            let mut idx = vec![a, m.len()];
            idx.extend(&m);
            block.push(idx, vec![before.coefficient(&m), -after.coefficient(&m)]);
        }
    }
    Ok(block)
}

/// Blocks produced by [`absorption_pipeline`].
pub struct AbsorptionBlocks {
    pub absorbed: Absorbed,
    /// `τ′`; the identities need it to vanish.
    pub tau_prime: ResidualBlock,
    pub h1: ResidualBlock,
    pub h2: ResidualBlock,
    pub h3: ResidualBlock,
    /// Lowered degree-1 flow residual, reported when `τ′ ≠ 0`.
    pub dalpha: ResidualBlock,
    /// Degree-0 first-class residual of the absorbed system.
    pub first_class_deg0: ResidualBlock,
}

/// Absorbs `β` and hands `μ := α′`, `B := dA` to the momentum checks.
pub fn absorption_pipeline(sys: &ConstraintSystem) -> Result<AbsorptionBlocks, CheckError> {
    let absorbed = sys.absorb_beta();
    let s = &absorbed.system;
    let b = s.twist_or_zero();
    let data = MomentumData {
        algebroid: &s.algebroid,
        connection: &s.connection,
        b: &b,
        mu: &s.alpha,
        sign: GammaSign::Standard,
    };
    let mut h1 = momentum::check_h1(&s.algebroid, &s.connection, &b, GammaSign::Standard)?;
    h1.name = "mech_H1".into();
    let mut h2 = momentum::check_h2(&data);
    h2.name = "mech_H2".into();
    let mut h3 = momentum::check_h3(&data);
    h3.name = "mech_H3".into();
    let mut dalpha = s.flow_residual()?.degree1;
    dalpha.name = "dalpha".into();
    let first_class_deg0 = s.first_class_residual()?.degree0;
    Ok(AbsorptionBlocks {
        tau_prime: s.tau_block("tau_prime"),
        absorbed,
        h1,
        h2,
        h3,
        dalpha,
        first_class_deg0,
    })
}

/// Conclusion of the mechanics pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MechanicsVerdict {
    /// `τ′ = 0`; carries the momentum classification of `α′`.
    Momentum(momentum::MomentumClass),
    Generalized,
}

impl MechanicsVerdict {
    pub fn label(self) -> String {
        match self {
            MechanicsVerdict::Momentum(c) => c.label().to_string(),
            MechanicsVerdict::Generalized => "generalized (tau' != 0)".to_string(),
        }
    }
}

pub fn mechanics_verdict(tau_zero: bool, h1: bool, h2: bool, h3: bool) -> MechanicsVerdict {
    if tau_zero {
        MechanicsVerdict::Momentum(momentum::classify(h1, h2, h3))
    } else {
        MechanicsVerdict::Generalized
    }
}

/// Rank of the anchor and condition number of `g` at one point.
pub fn diagnostics(sys: &ConstraintSystem, point: &[f64]) -> Result<(usize, f64), EvalError> {
    let d = sys.dim();
    let r = sys.rank();
    let mut rho = nalgebra::DMatrix::zeros(d, r);
    for a in 0..r {
        for i in 0..d {
            rho[(i, a)] = sys.algebroid.rho(i, a).value(point)?;
        }
    }
    let scale = rho.amax().max(1.0);
    let rank = rho.svd(false, false).rank(1e-10 * scale);
    let mut g = nalgebra::DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            g[(i, j)] = sys.inverse_metric.get(i, j).value(point)?;
        }
    }
    let eig = g.symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), e| (lo.min(e.abs()), hi.max(e.abs())));
    Ok((rank, hi / lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::EvalMode;

    fn f(src: &str) -> ScalarField {
        let c: Vec<String> = ["x", "y"].iter().map(|s| s.to_string()).collect();
        crate::expr::parse(src, &c).unwrap().into()
    }

    fn pts() -> Vec<Vec<f64>> {
        vec![vec![0.3, -0.8], vec![0.9, 0.2], vec![-0.9, 0.7], vec![0.1, 0.05]]
    }

    fn max(b: &ResidualBlock) -> f64 {
        b.evaluate(&pts(), EvalMode::Sequential).unwrap().max
    }

    fn system(anchor: Vec<VectorField>, beta: VectorField, alpha: Vec<ScalarField>) -> ConstraintSystem {
        let r = anchor.len();
        ConstraintSystem {
            algebroid: Algebroid::abelian(2, anchor).unwrap(),
            connection: Connection::zero(r, 2),
            inverse_metric: SymTensor::identity(2),
            metric: SymTensor::identity(2),
            alpha,
            beta,
            potential: ScalarField::zero(),
            tau: vec![vec![ScalarField::zero(); r]; r],
            twist: None,
        }
    }

    #[test]
    fn canonical_pair() {
        let px = PhasePolynomial::momentum(2, 0);
        let x = PhasePolynomial::function(2, ScalarField::coordinate(0));
        let br = poisson_bracket(&px, &x, None).unwrap();
        assert_eq!(br.coefficient(&[]).value(&[0.2, 0.5]).unwrap(), 1.0);
        assert_eq!(br.degree(), 0);
    }

    #[test]
    fn affine_bracket_oracle() {
        let v = VectorField::new(vec![f("-y"), f("x*y")]);
        let w = VectorField::new(vec![f("x^2"), f("sin(x)")]);
        let (a, a2) = (f("x*y"), f("exp(y)"));
        let fpoly = PhasePolynomial::linear(&v) + PhasePolynomial::function(2, a.clone());
        let gpoly = PhasePolynomial::linear(&w) + PhasePolynomial::function(2, a2.clone());
        let br = poisson_bracket(&fpoly, &gpoly, None).unwrap();
        let vw = v.bracket(&w);
        let oracle0 = v.apply(&a2) - w.apply(&a);
        for p in pts() {
            for i in 0..2 {
                let d = br.coefficient(&[i]).value(&p).unwrap() - vw.comp(i).value(&p).unwrap();
                assert!(d.abs() < 1e-13);
            }
            assert!((br.coefficient(&[]).value(&p).unwrap() - oracle0.value(&p).unwrap()).abs() < 1e-13);
        }
        assert!(grading_report(&br).iter().all(|&k| k <= 1));
    }

    #[test]
    fn free_particle_and_rotation_conserved() {
        let sys = system(vec![VectorField::coordinate(2, 0)], VectorField::zero(2), vec![ScalarField::zero()]);
        let fl = sys.flow_residual().unwrap();
        assert!(max(&fl.degree2) + max(&fl.degree1) + max(&fl.degree0) < 1e-14);
        let sys = system(vec![VectorField::new(vec![f("-y"), f("x")])], VectorField::zero(2), vec![ScalarField::zero()]);
        let fl = sys.flow_residual().unwrap();
        assert!(max(&fl.degree2) + max(&fl.degree1) + max(&fl.degree0) < 1e-14);
        assert_eq!(grading_report(&sys.hamiltonian()), BTreeSet::from([2]));
    }

    #[test]
    fn twisted_translations_obstruction() {
        let mut sys = system(
            vec![VectorField::coordinate(2, 0), VectorField::coordinate(2, 1)],
            VectorField::zero(2),
            vec![ScalarField::zero(); 2],
        );
        sys.twist = Some(FormField::basis(2, &[0, 1]));
        let fc = sys.first_class_residual().unwrap();
        assert!((max(&fc.degree0) - 1.0).abs() < 1e-15);
        assert!(max(&fc.degree1) < 1e-15);
    }

    #[test]
    fn absorb_beta_hand_cases() {
        let beta = VectorField::new(vec![f("-y"), f("x")]);
        let sys = system(vec![VectorField::coordinate(2, 0)], beta, vec![ScalarField::zero()]);
        let out = sys.absorb_beta();
        let p = [0.4, -0.3];
        assert_eq!(out.system.twist.as_ref().unwrap().get(&[0, 1]).value(&p).unwrap(), 2.0);
        assert_eq!(out.system.alpha[0].value(&p).unwrap(), p[1]);
        assert!((out.system.potential.value(&p).unwrap() + (p[0] * p[0] + p[1] * p[1]) / 2.0).abs() < 1e-15);
        let unchanged = system(vec![VectorField::coordinate(2, 0)], VectorField::zero(2), vec![f("x")]).absorb_beta();
        assert!(unchanged.system.twist.unwrap().is_structurally_zero());
    }

    #[test]
    fn absorption_is_a_momentum_shift() {
        let beta = VectorField::new(vec![f("-y + x^2"), f("x*y")]);
        let mut sys = system(vec![VectorField::new(vec![f("-y"), f("x")])], beta, vec![f("x*y")]);
        sys.potential = f("x^2");
        sys.connection = Connection::from_fn(1, 2, |_, _, i| f(["y", "x"][i]));
        let before = sys.flow_polynomial(0).unwrap();
        let out = sys.absorb_beta();
        let after = out.system.flow_polynomial(0).unwrap().shift(&out.potential_form).unwrap();
        for x in pts() {
            for mom in [[0.3, 1.2], [-0.7, 0.4]] {
                let d = before.value(&x, &mom).unwrap() - after.value(&x, &mom).unwrap();
                assert!(d.abs() < 1e-12, "{d}");
            }
        }
    }

    #[test]
    fn degree_bound_enforced() {
        let q = PhasePolynomial::quadratic(&SymTensor::identity(2));
        let q4 = q.mul(&q).unwrap();
        assert_eq!(q4.degree(), 4);
        assert!(matches!(q4.mul(&q), Err(CheckError::DegreeOverflow { .. })));
        assert!(q4.check_input_degree().is_err());
        assert!(q.check_input_degree().is_ok());
    }

    #[test]
    fn tau_prime_generalized_verdict() {
        let mut sys = system(vec![VectorField::coordinate(2, 0)], VectorField::zero(2), vec![ScalarField::zero()]);
        sys.tau = vec![vec![ScalarField::one()]];
        let tb = absorption_pipeline(&sys).unwrap();
        assert!((max(&tb.tau_prime) - 1.0).abs() < 1e-15);
        assert_eq!(mechanics_verdict(false, true, true, true), MechanicsVerdict::Generalized);
        assert!(max(&tb.dalpha) > 0.5);
    }
}
