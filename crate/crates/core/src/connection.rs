//! Connection on `E`, its dual on `E*`-valued forms, and the E-connection on
//! tangent tensors.
//!
//! Conventions: `(De)^a_i = ∂_i f^a + Γ^a_{bi} f^b` and
//! `(Dμ)_a = dμ_a − Γ^b_a ∧ μ_b` with `Γ^b_a = Γ^b_{ai} dx^i`, so that
//! `d⟨μ, e⟩ = ⟨Dμ, e⟩ + ⟨μ, De⟩`.

use crate::algebroid::{Algebroid, Section};
use crate::error::CheckError;
use crate::eval::ResidualBlock;
use crate::field::ScalarField;
use crate::forms::{FormField, SymTensor, VectorField};
use crate::index::increasing_tuples;

/// Coefficients `Γ^a_{bi}`.
#[derive(Clone, Debug)]
pub struct Connection {
    rank: usize,
    dim: usize,
    coeffs: Vec<ScalarField>,
}

impl Connection {
    pub fn zero(rank: usize, dim: usize) -> Self {
        Connection {
            rank,
            dim,
            coeffs: vec![ScalarField::zero(); rank * rank * dim],
        }
    }

    pub fn from_fn(rank: usize, dim: usize, f: impl Fn(usize, usize, usize) -> ScalarField) -> Self {
        let mut c = Self::zero(rank, dim);
        for a in 0..rank {
            for b in 0..rank {
                for i in 0..dim {
                    c.set(a, b, i, f(a, b, i));
                }
            }
        }
        c
    }

    fn slot(&self, a: usize, b: usize, i: usize) -> usize {
        (a * self.rank + b) * self.dim + i
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Γ^a_{bi}`.
    pub fn get(&self, a: usize, b: usize, i: usize) -> ScalarField {
        self.coeffs[self.slot(a, b, i)].clone()
    }

    pub fn set(&mut self, a: usize, b: usize, i: usize, f: ScalarField) {
        let k = self.slot(a, b, i);
        self.coeffs[k] = f;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(ScalarField::is_zero)
    }

    /// The matrix-valued 1-form entry `Γ^a_b = Γ^a_{bi} dx^i`.
    pub fn one_form(&self, a: usize, b: usize) -> FormField {
        FormField::one_form((0..self.dim).map(|i| self.get(a, b, i)).collect())
    }

    /// `(De)^a_i`, one 1-form per `a`.
    pub fn covariant_derivative_section(&self, e: &Section) -> Vec<FormField> {
        (0..self.rank)
            .map(|a| {
                FormField::one_form(
                    (0..self.dim)
                        .map(|i| {
                            e.comp(a).partial(i)
                                + (0..self.rank).map(|b| self.get(a, b, i) * e.comp(b)).sum::<ScalarField>()
                        })
                        .collect(),
                )
            })
            .collect()
    }

    /// Exterior covariant derivative on `Ω^k(M, E*)`, split into the `d`
    /// part and the connection part.
    pub fn dual_covariant_parts(&self, mu: &[FormField]) -> Result<Vec<(FormField, FormField)>, CheckError> {
        assert_eq!(mu.len(), self.rank, "one form per bundle index");
        (0..self.rank)
            .map(|a| {
                let d = mu[a].exterior_derivative();
                let mut conn = FormField::zero(self.dim, d.degree());
                for b in 0..self.rank {
                    conn = conn - self.one_form(b, a).wedge(&mu[b])?;
                }
                Ok((d, conn))
            })
            .collect()
    }

    pub fn dual_covariant_derivative(&self, mu: &[FormField]) -> Result<Vec<FormField>, CheckError> {
        Ok(self
            .dual_covariant_parts(mu)?
            .into_iter()
            .map(|(d, c)| d + c)
            .collect())
    }

    /// `F^c_a = dΓ^c_a − Γ^b_a ∧ Γ^c_b`, indexed `[c][a]`.
    pub fn curvature(&self) -> Result<Vec<Vec<FormField>>, CheckError> {
        (0..self.rank)
            .map(|c| {
                (0..self.rank)
                    .map(|a| {
                        let mut f = self.one_form(c, a).exterior_derivative();
                        for b in 0..self.rank {
                            f = f - self.one_form(b, a).wedge(&self.one_form(c, b))?;
                        }
                        Ok(f)
                    })
                    .collect()
            })
            .collect()
    }

    /// `^E∇_e v = L_{ρ(e)} v + ρ(D_v e)`.
    pub fn e_connection_vector(&self, alg: &Algebroid, e: &Section, v: &VectorField) -> VectorField {
        let transport = alg.anchor_of(e).bracket(v);
        let de = self.covariant_derivative_section(e);
        let dve = Section(
            de.iter()
                .map(|w| (0..self.dim).map(|i| v.comp(i) * w.get(&[i])).sum())
                .collect(),
        );
        transport + alg.anchor_of(&dve)
    }

    /// `Γ^b_{ai} ρ^k_b`, the anchor image of the connection.
    fn gamma_rho(&self, alg: &Algebroid, a: usize, i: usize, k: usize) -> ScalarField {
        (0..self.rank).map(|b| self.get(b, a, i) * alg.rho(k, b)).sum()
    }

    /// `(L_{ρ_a} g)_{ij} − Γ^b_{ai} ρ^k_b g_{kj} − Γ^b_{aj} ρ^k_b g_{ki}`,
    /// the components of `^E∇g` on `i <= j`.
    pub fn e_nabla_metric_residual(&self, alg: &Algebroid, g: &SymTensor) -> ResidualBlock {
        let mut block = ResidualBlock::new("e_nabla_metric", &["lie_derivative", "connection_i", "connection_j"]);
        for a in 0..self.rank {
            let lg = g.lie_derivative(alg.anchor(a));
            for ((i, j), c) in lg.iter() {
                let ti: ScalarField = (0..self.dim).map(|k| self.gamma_rho(alg, a, i, k) * g.get(k, j)).sum();
                let tj: ScalarField = (0..self.dim).map(|k| self.gamma_rho(alg, a, j, k) * g.get(k, i)).sum();
                block.push(vec![a, i, j], vec![c, -ti, -tj]);
            }
        }
        block
    }

    /// Components of `^E∇B` on `i < j`, extended to 2-forms by the tensor
    /// Leibniz rule: `(L_{ρ_a} B)_{ij} − Γ^b_{ai} ρ^k_b B_{kj} − Γ^b_{aj} ρ^k_b B_{ik}`.
    pub fn e_nabla_b_residual(&self, alg: &Algebroid, b: &FormField) -> ResidualBlock {
        self.e_nabla_b_with_sign(alg, b, -1.0, "e_nabla_B")
    }

    /// The same components with both connection terms added instead.
    pub fn e_nabla_b_flipped_residual(&self, alg: &Algebroid, b: &FormField) -> ResidualBlock {
        self.e_nabla_b_with_sign(alg, b, 1.0, "e_nabla_B_flipped")
    }

    fn e_nabla_b_with_sign(&self, alg: &Algebroid, b: &FormField, s: f64, name: &str) -> ResidualBlock {
        let mut block = ResidualBlock::new(name, &["lie_derivative", "connection_i", "connection_j"]);
        for a in 0..self.rank {
            let lb = b.lie_derivative(alg.anchor(a));
            for t in increasing_tuples(self.dim, 2) {
                let (i, j) = (t[0], t[1]);
                let ti: ScalarField = (0..self.dim).map(|k| self.gamma_rho(alg, a, i, k) * b.get(&[k, j])).sum();
                let tj: ScalarField = (0..self.dim).map(|k| self.gamma_rho(alg, a, j, k) * b.get(&[i, k])).sum();
                block.push(vec![a, i, j], vec![lb.get(&[i, j]), ti.scale(s), tj.scale(s)]);
            }
        }
        block
    }
}

/// `⟨μ, e⟩` for E*-valued forms.
pub fn pair_forms(mu: &[FormField], e: &Section) -> FormField {
    let mut acc = FormField::zero(mu[0].dim(), mu[0].degree());
    for (a, m) in mu.iter().enumerate() {
        acc = acc + m.mul_fn(e.comp(a));
    }
    acc
}
