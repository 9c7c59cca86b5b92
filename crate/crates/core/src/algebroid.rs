//! Anchor, bracket, axiom residuals and the Lie algebroid differential.

use crate::error::CheckError;
use crate::eval::ResidualBlock;
use crate::field::ScalarField;
use crate::forms::VectorField;
use crate::index::{increasing_tuples, Alternating};

/// A section `f^a e_a` in the local frame.
#[derive(Clone, Debug)]
pub struct Section(pub Vec<ScalarField>);

impl Section {
    pub fn basis(rank: usize, a: usize) -> Self {
        let mut f = vec![ScalarField::zero(); rank];
        f[a] = ScalarField::one();
        Section(f)
    }

    pub fn comp(&self, a: usize) -> &ScalarField {
        &self.0[a]
    }

    pub fn scale_by(&self, f: &ScalarField) -> Section {
        Section(self.0.iter().map(|c| c * f).collect())
    }
}

/// An E-differential form: antisymmetric components on bundle indices.
#[derive(Clone, Debug)]
pub struct EForm(pub Alternating);

impl EForm {
    pub fn from_fn(rank: usize, degree: usize, f: impl Fn(&[usize]) -> ScalarField) -> Self {
        EForm(Alternating::from_fn(rank, degree, f))
    }

    pub fn degree(&self) -> usize {
        self.0.k()
    }

    pub fn get(&self, idx: &[usize]) -> ScalarField {
        self.0.get(idx)
    }
}

/// Anchor `ρ^i_a` and structure functions `C^c_{ab}` on one chart.
#[derive(Clone, Debug)]
pub struct Algebroid {
    dim: usize,
    anchor: Vec<VectorField>,
    structure: Vec<Alternating>,
}

/// Axiom classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgebroidClass {
    LieAlgebroid,
    AnchoredAlmostLieAlgebroid,
    Neither,
}

impl AlgebroidClass {
    pub fn label(self) -> &'static str {
        match self {
            AlgebroidClass::LieAlgebroid => "Lie algebroid",
            AlgebroidClass::AnchoredAlmostLieAlgebroid => "anchored almost Lie algebroid",
            AlgebroidClass::Neither => "neither",
        }
    }

    /// Verdict from the pass state of the anchor-morphism, full Jacobi and
    /// anchor-contracted Jacobi residuals.
    pub fn from_passes(anchor: bool, sigma: bool, sigma_rho: bool) -> Self {
        match (anchor, sigma, sigma_rho) {
            (true, true, _) => AlgebroidClass::LieAlgebroid,
            (true, false, true) => AlgebroidClass::AnchoredAlmostLieAlgebroid,
            _ => AlgebroidClass::Neither,
        }
    }
}

impl Algebroid {
    /// `anchor[a]` is `ρ(e_a)`; `structure[c]` holds `C^c_{ab}` on `a < b`.
    pub fn new(dim: usize, anchor: Vec<VectorField>, structure: Vec<Alternating>) -> Result<Self, CheckError> {
        let r = anchor.len();
        if r == 0 {
            return Err(CheckError::Invalid("bundle rank must be at least 1".into()));
        }
        if anchor.iter().any(|v| v.dim() != dim) {
            return Err(CheckError::Invalid("anchor component count differs from chart dimension".into()));
        }
        if structure.len() != r || structure.iter().any(|c| c.n() != r || c.k() != 2) {
            return Err(CheckError::Invalid("structure functions must have shape r x (r choose 2)".into()));
        }
        Ok(Algebroid { dim, anchor, structure })
    }

    /// Zero structure functions with the given anchor.
    pub fn abelian(dim: usize, anchor: Vec<VectorField>) -> Result<Self, CheckError> {
        let r = anchor.len();
        Self::new(dim, anchor, vec![Alternating::zero(r, 2); r])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.anchor.len()
    }

    pub fn anchor(&self, a: usize) -> &VectorField {
        &self.anchor[a]
    }

    pub fn rho(&self, i: usize, a: usize) -> &ScalarField {
        self.anchor[a].comp(i)
    }

    pub fn structure(&self, c: usize, a: usize, b: usize) -> ScalarField {
        self.structure[c].get(&[a, b])
    }

    pub fn has_constant_structure(&self) -> bool {
        self.structure
            .iter()
            .all(|c| c.components().iter().all(ScalarField::is_constant))
    }

    /// `ρ(f^a e_a) = f^a ρ_a`.
    pub fn anchor_of(&self, e: &Section) -> VectorField {
        (0..self.rank())
            .map(|a| self.anchor[a].scale_by(e.comp(a)))
            .fold(VectorField::zero(self.dim), |acc, v| acc + v)
    }

    /// Leibniz extension of `[e_a, e_b] = C^c_{ab} e_c`.
    pub fn bracket(&self, e1: &Section, e2: &Section) -> Section {
        let r = self.rank();
        let (v1, v2) = (self.anchor_of(e1), self.anchor_of(e2));
        Section(
            (0..r)
                .map(|c| {
                    let algebraic: ScalarField = (0..r)
                        .flat_map(|a| (0..r).map(move |b| (a, b)))
                        .filter(|(a, b)| a != b)
                        .map(|(a, b)| e1.comp(a) * e2.comp(b) * self.structure(c, a, b))
                        .sum();
                    algebraic + v1.apply(e2.comp(c)) - v2.apply(e1.comp(c))
                })
                .collect(),
        )
    }

    /// `[ρ_a, ρ_b]^i − C^c_{ab} ρ^i_c` on `a < b`.
    pub fn anchor_morphism_residual(&self) -> ResidualBlock {
        let mut block = ResidualBlock::new("anchor_morphism", &["vector_field_bracket", "anchored_bracket"]);
        for t in increasing_tuples(self.rank(), 2) {
            let (a, b) = (t[0], t[1]);
            let lie = self.anchor[a].bracket(&self.anchor[b]);
            for i in 0..self.dim {
                let image: ScalarField = (0..self.rank()).map(|c| self.structure(c, a, b) * self.rho(i, c)).sum();
                block.push(vec![a, b, i], vec![lie.comp(i).clone(), -image]);
            }
        }
        block
    }

    /// `σ^d_{abc} = C^e_{ab} C^d_{ce} + ρ_a^j ∂_j C^d_{bc} + cycl(abc)`.
    pub fn sigma(&self, d: usize, a: usize, b: usize, c: usize) -> (ScalarField, ScalarField) {
        let r = self.rank();
        let mut quadratic = ScalarField::zero();
        let mut derivative = ScalarField::zero();
        for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
            quadratic = quadratic
                + (0..r)
                    .map(|e| self.structure(e, x, y) * self.structure(d, z, e))
                    .sum::<ScalarField>();
            derivative = derivative + self.anchor[x].apply(&self.structure(d, y, z));
        }
        (quadratic, derivative)
    }

    /// Full Jacobi residual `σ` and its anchor contraction `σ^d ρ^i_d`.
    pub fn jacobi_residual(&self) -> (ResidualBlock, ResidualBlock) {
        let r = self.rank();
        let mut full = ResidualBlock::new("jacobi", &["quadratic", "anchor_derivative"]);
        let mut contracted = ResidualBlock::new("jacobi_anchor", &["quadratic", "anchor_derivative"]);
        for t in increasing_tuples(r, 3) {
            let sig: Vec<_> = (0..r).map(|d| self.sigma(d, t[0], t[1], t[2])).collect();
            for (d, (q, dv)) in sig.iter().enumerate() {
                full.push(vec![t[0], t[1], t[2], d], vec![q.clone(), dv.clone()]);
            }
            for i in 0..self.dim {
                let q: ScalarField = sig.iter().enumerate().map(|(d, s)| &s.0 * self.rho(i, d)).sum();
                let dv: ScalarField = sig.iter().enumerate().map(|(d, s)| &s.1 * self.rho(i, d)).sum();
                contracted.push(vec![t[0], t[1], t[2], i], vec![q, dv]);
            }
        }
        (full, contracted)
    }

    /// The Lie algebroid differential on basis sections.
    pub fn e_differential(&self, alpha: &EForm) -> Result<EForm, CheckError> {
        let r = self.rank();
        let m = alpha.degree();
        if m >= r {
            return Err(CheckError::DegreeOverflow { degree: m + 1, bound: r });
        }
        Ok(EForm::from_fn(r, m + 1, |t| {
            let mut acc = ScalarField::zero();
            for i in 0..=m {
                let mut rest = t.to_vec();
                let ai = rest.remove(i);
                let term = self.anchor[ai].apply(&alpha.get(&rest));
                acc = if i % 2 == 0 { acc + term } else { acc - term };
            }
            for i in 0..=m {
                for j in i + 1..=m {
                    let rest: Vec<usize> = t
                        .iter()
                        .enumerate()
                        .filter(|(p, _)| *p != i && *p != j)
                        .map(|(_, &x)| x)
                        .collect();
                    let term: ScalarField = (0..r)
                        .map(|c| {
                            let mut idx = Vec::with_capacity(m);
                            idx.push(c);
                            idx.extend_from_slice(&rest);
                            self.structure(c, t[i], t[j]) * alpha.get(&idx)
                        })
                        .sum();
                    acc = if (i + j) % 2 == 0 { acc + term } else { acc - term };
                }
            }
            acc
        }))
    }

    /// `^E d ∘ ^E d` on the coordinate functions and the basis E-1-forms.
    ///
    /// On `x^i` this reproduces the anchor-morphism residual entry by entry;
    /// on the dual frame it gives `−σ`.
    pub fn q_squared_residual(&self) -> Result<ResidualBlock, CheckError> {
        let r = self.rank();
        let mut block = ResidualBlock::new("q_squared", &["value"]);
        if r < 2 {
            return Ok(block);
        }
        for i in 0..self.dim {
            let f = EForm::from_fn(r, 0, |_| ScalarField::coordinate(i));
            let ddf = self.e_differential(&self.e_differential(&f)?)?;
            for (t, c) in ddf.0.iter() {
                block.push(vec![0, i, t[0], t[1]], vec![c.clone()]);
            }
        }
        if r >= 3 {
            for d in 0..r {
                let dual = EForm::from_fn(r, 1, |t| if t[0] == d { ScalarField::one() } else { ScalarField::zero() });
                let dd = self.e_differential(&self.e_differential(&dual)?)?;
                for (t, c) in dd.0.iter() {
                    block.push(vec![1, d, t[0], t[1], t[2]], vec![c.clone()]);
                }
            }
        }
        Ok(block)
    }
}
