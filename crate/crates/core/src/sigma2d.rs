//! Target-space conditions of the two-dimensional gauged sigma model with
//! boundary, and their translation into momentum-section conditions.

use crate::algebroid::Algebroid;
use crate::connection::Connection;
use crate::error::CheckError;
use crate::eval::{combine_blocks, ResidualBlock};
use crate::field::ScalarField;
use crate::forms::{FormField, SymTensor};
use crate::index::increasing_tuples;
use crate::momentum::{self, GammaSign, MomentumData};

/// Metric, closed 2-form `b`, boundary 1-form `η` and boundary section `μ`.
#[derive(Clone, Debug)]
pub struct Sigma2dData {
    pub algebroid: Algebroid,
    pub connection: Connection,
    pub metric: SymTensor,
    pub b: FormField,
    pub eta: FormField,
    pub mu: Vec<ScalarField>,
    /// `β_a` of the rigid condition `L_{ρ_a} b = dβ_a`.
    pub beta: Option<Vec<FormField>>,
}

pub struct RigidBlocks {
    pub killing_g: ResidualBlock,
    pub killing_b: ResidualBlock,
    pub almost_lie_algebroid: ResidualBlock,
    /// Set when `β_a` defaulted to `ι_{ρ_a} b`.
    pub beta_defaulted: bool,
}

pub struct GaugedBlocks {
    pub metric: ResidualBlock,
    pub anchor: ResidualBlock,
    pub boundary1: ResidualBlock,
    pub boundary2: ResidualBlock,
    pub boundary3: ResidualBlock,
}

pub struct IdentificationBlocks {
    /// `μ = −ι_ρη`.
    pub mu: Vec<ScalarField>,
    /// `B = b + dη`.
    pub b: FormField,
    pub boundary1: ResidualBlock,
    pub boundary2: ResidualBlock,
    pub boundary3: ResidualBlock,
    pub h1: ResidualBlock,
    pub h2: ResidualBlock,
    pub h3: ResidualBlock,
    /// Boundary one-form residual plus `(H2)_{a,i}`, identically zero.
    pub h2_identity: ResidualBlock,
    /// Boundary section residual minus `(H3)_{ab} + ρ^i_b (H2)_{a,i}`, identically zero.
    pub h3_identity: ResidualBlock,
}

impl Sigma2dData {
    fn dim(&self) -> usize {
        self.algebroid.dim()
    }

    fn rank(&self) -> usize {
        self.algebroid.rank()
    }

    pub fn check_rigid_invariance(&self) -> RigidBlocks {
        let alg = &self.algebroid;
        let mut killing_g = ResidualBlock::new("killing_g", &["lie_derivative"]);
        let mut killing_b = ResidualBlock::new("killing_b", &["lie_derivative", "d_beta"]);
        let beta_defaulted = self.beta.is_none();
        let beta: Vec<FormField> = match &self.beta {
            Some(b) => b.clone(),
            None => (0..self.rank()).map(|a| self.b.interior(alg.anchor(a))).collect(),
        };
        for a in 0..self.rank() {
            for ((i, j), c) in self.metric.lie_derivative(alg.anchor(a)).iter() {
                killing_g.push(vec![a, i, j], vec![c]);
            }
            let lb = self.b.lie_derivative(alg.anchor(a));
            let db = beta[a].exterior_derivative();
            for t in increasing_tuples(self.dim(), 2) {
                killing_b.push(vec![a, t[0], t[1]], vec![lb.get(&t), -db.get(&t)]);
            }
        }
        let mut almost_lie_algebroid = alg.anchor_morphism_residual();
        almost_lie_algebroid.name = "almost_lie_algebroid".into();
        RigidBlocks { killing_g, killing_b, almost_lie_algebroid, beta_defaulted }
    }

    pub fn check_gauged_conditions(&self) -> GaugedBlocks {
        let mut anchor = self.algebroid.anchor_morphism_residual();
        anchor.name = "gauged_anchor".into();
        GaugedBlocks {
            metric: self.gauged_metric(),
            anchor,
            boundary1: boundary1(&self.algebroid, &self.eta, &self.mu),
            boundary2: boundary2(&self.algebroid, &self.connection, &self.b, &self.eta, &self.mu),
            boundary3: boundary3(&self.algebroid, &self.connection, &self.mu),
        }
    }

    /// `L_{ρ_a} g − Γ^b_a ∨ ι_{ρ_b} g` with `(α ∨ β)_{ij} = α_i β_j + α_j β_i`.
    fn gauged_metric(&self) -> ResidualBlock {
        let (alg, g, r) = (&self.algebroid, &self.metric, self.rank());
        let mut block = ResidualBlock::new("gauged_metric", &["lie_derivative", "symmetric_product"]);
        let flats: Vec<FormField> = (0..r).map(|b| g.flat(alg.anchor(b))).collect();
        for a in 0..r {
            let lg = g.lie_derivative(alg.anchor(a));
            for ((i, j), c) in lg.iter() {
                let vee: ScalarField = (0..r)
                    .map(|b| {
                        self.connection.get(b, a, i) * flats[b].get(&[j]) + self.connection.get(b, a, j) * flats[b].get(&[i])
                    })
                    .sum();
                block.push(vec![a, i, j], vec![c, -vee]);
            }
        }
        block
    }

    pub fn identification_pipeline(&self) -> Result<IdentificationBlocks, CheckError> {
        let alg = &self.algebroid;
        let r = self.rank();
        let mu: Vec<ScalarField> = (0..r).map(|a| -self.eta.interior(alg.anchor(a)).get(&[])).collect();
        let b = &self.b + &self.eta.exterior_derivative();
        let data = MomentumData {
            algebroid: alg,
            connection: &self.connection,
            b: &b,
            mu: &mu,
            sign: GammaSign::Standard,
        };
        let h2 = momentum::check_h2(&data);
        let h3 = momentum::check_h3(&data);
        let h1 = momentum::check_h1(alg, &self.connection, &b, GammaSign::Standard)?;
        let boundary1 = boundary1(alg, &self.eta, &mu);
        let boundary2 = boundary2(alg, &self.connection, &self.b, &self.eta, &mu);
        let boundary3 = boundary3(alg, &self.connection, &mu);

        let h2_identity = combine_blocks("sigma_identity_H2", &boundary2, &h2, 1.0);
        let h3_identity = momentum::h3_identity_block("sigma_identity_H3", alg, &boundary3, &h2, &h3);
        Ok(IdentificationBlocks { mu, b, boundary1, boundary2, boundary3, h1, h2, h3, h2_identity, h3_identity })
    }
}

/// `μ_a + η_i ρ^i_a`.
pub fn boundary1(alg: &Algebroid, eta: &FormField, mu: &[ScalarField]) -> ResidualBlock {
    let mut block = ResidualBlock::new("boundary_mu", &["mu", "eta_rho"]);
    for (a, m) in mu.iter().enumerate() {
        let er: ScalarField = (0..alg.dim()).map(|i| eta.get(&[i]) * alg.rho(i, a)).sum();
        block.push(vec![a], vec![m.clone(), er]);
    }
    block
}

/// `ρ^j_a b_{ji} + ρ^j_a ∂_j η_i + η_j ∂_i ρ^j_a + Γ^b_{ai} μ_b`.
pub fn boundary2(alg: &Algebroid, conn: &Connection, b: &FormField, eta: &FormField, mu: &[ScalarField]) -> ResidualBlock {
    let d = alg.dim();
    let mut block = ResidualBlock::new("boundary_one_form", &["rho_b", "rho_d_eta", "eta_d_rho", "connection"]);
    for a in 0..alg.rank() {
        for i in 0..d {
            let rb: ScalarField = (0..d).map(|j| alg.rho(j, a) * b.get(&[j, i])).sum();
            let rde: ScalarField = (0..d).map(|j| alg.rho(j, a) * eta.get(&[i]).partial(j)).sum();
            let edr: ScalarField = (0..d).map(|j| eta.get(&[j]) * alg.rho(j, a).partial(i)).sum();
            let gm: ScalarField = (0..alg.rank()).map(|c| conn.get(c, a, i) * &mu[c]).sum();
            block.push(vec![a, i], vec![rb, rde, edr, gm]);
        }
    }
    block
}

/// `ρ^i_a ∂_i μ_b − C^c_{ab} μ_c − ρ^i_b Γ^c_{ai} μ_c` on ordered pairs.
pub fn boundary3(alg: &Algebroid, conn: &Connection, mu: &[ScalarField]) -> ResidualBlock {
    let (d, r) = (alg.dim(), alg.rank());
    let mut block = ResidualBlock::new("boundary_section", &["rho_a_mu_b", "structure", "connection"]);
    for a in 0..r {
        for b in 0..r {
            let c_mu: ScalarField = (0..r).map(|c| alg.structure(c, a, b) * &mu[c]).sum();
            let g_mu: ScalarField = (0..r)
                .flat_map(|c| (0..d).map(move |i| (c, i)))
                .map(|(c, i)| alg.rho(i, b) * conn.get(c, a, i) * &mu[c])
                .sum();
            block.push(vec![a, b], vec![alg.anchor(a).apply(&mu[b]), -c_mu, -g_mu]);
        }
    }
    block
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::EvalMode;
    use crate::forms::VectorField;

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

    fn rotation(b: FormField, eta: FormField, mu: ScalarField) -> Sigma2dData {
        Sigma2dData {
            algebroid: Algebroid::abelian(2, vec![VectorField::new(vec![f("-y"), f("x")])]).unwrap(),
            connection: Connection::zero(1, 2),
            metric: SymTensor::identity(2),
            b,
            eta,
            mu: vec![mu],
            beta: None,
        }
    }

    fn half_rotation_eta() -> FormField {
        FormField::one_form(vec![f("-y/2"), f("x/2")])
    }

    #[test]
    fn rigid_rotation_passes() {
        let s = rotation(FormField::basis(2, &[0, 1]), FormField::zero(2, 1), ScalarField::zero());
        let rb = s.check_rigid_invariance();
        assert!(rb.beta_defaulted);
        assert!(max(&rb.killing_g) < 1e-14);
        assert!(max(&rb.killing_b) < 1e-14);
        assert!(max(&rb.almost_lie_algebroid) < 1e-14);
    }

    #[test]
    fn non_killing_metric() {
        let mut s = rotation(FormField::zero(2, 2), FormField::zero(2, 1), ScalarField::zero());
        s.algebroid = Algebroid::abelian(2, vec![VectorField::coordinate(2, 0)]).unwrap();
        s.metric = SymTensor::from_fn(2, |i, j| if i != j { ScalarField::zero() } else if i == 0 { ScalarField::one() } else { f("x^2") });
        let rb = s.check_rigid_invariance();
        for p in pts() {
            let v = rb.killing_g.values_at(&p).unwrap();
            let m = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!((m - 2.0 * p[0].abs()).abs() < 1e-14);
        }
    }

    #[test]
    fn boundary_brute_force() {
        let eta = half_rotation_eta();
        let mu = f("-(x^2 + y^2)/2");
        let s = rotation(FormField::basis(2, &[0, 1]), eta, mu);
        let gb = s.check_gauged_conditions();
        assert!(max(&gb.boundary1) < 1e-15);
        for p in pts() {
            let (x, y) = (p[0], p[1]);
            let rho = [-y, x];
            let deta = [[0.0, 0.5], [-0.5, 0.0]]; // deta[j][i] = ∂_j η_i
            let drho = [[0.0, -1.0], [1.0, 0.0]]; // drho[j][i] = ∂_i ρ^j
            let eta = [-y / 2.0, x / 2.0];
            let bmat = [[0.0, 1.0], [-1.0, 0.0]];
            let v = gb.boundary2.values_at(&p).unwrap();
            for i in 0..2 {
                let oracle: f64 = (0..2)
                    .map(|j| rho[j] * bmat[j][i] + rho[j] * deta[j][i] + eta[j] * drho[j][i])
                    .sum();
                assert!((v[i] - oracle).abs() < 1e-14);
            }
            let v3 = gb.boundary3.values_at(&p).unwrap();
            assert!((v3[0] - (-y * -x + x * -y)).abs() < 1e-14);
        }
    }

    #[test]
    fn flipped_boundary_section() {
        let s = rotation(FormField::zero(2, 2), half_rotation_eta(), f("(x^2 + y^2)/2"));
        let gb = s.check_gauged_conditions();
        for p in pts() {
            let eta_rho = (p[0] * p[0] + p[1] * p[1]) / 2.0;
            assert!((gb.boundary1.values_at(&p).unwrap()[0] - 2.0 * eta_rho).abs() < 1e-14);
        }
    }

    #[test]
    fn identification_rotation_and_translation() {
        let s = rotation(FormField::zero(2, 2), half_rotation_eta(), ScalarField::zero());
        let t = s.identification_pipeline().unwrap();
        assert!(max(&t.h2) < 1e-14 && max(&t.h3) < 1e-14 && max(&t.boundary2) < 1e-14);
        assert!(max(&t.h2_identity) < 1e-14 && max(&t.h3_identity) < 1e-14);

        let mut tr = rotation(FormField::basis(2, &[0, 1]), FormField::zero(2, 1), ScalarField::zero());
        tr.algebroid = Algebroid::abelian(2, vec![VectorField::coordinate(2, 0), VectorField::coordinate(2, 1)]).unwrap();
        tr.connection = Connection::zero(2, 2);
        tr.mu = vec![ScalarField::zero(); 2];
        let t = tr.identification_pipeline().unwrap();
        assert!(max(&t.h2_identity) < 1e-14 && max(&t.h3_identity) < 1e-14);
        // H2 fails, so the boundary residuals carry it
        assert!((max(&t.boundary2) - max(&t.h2)).abs() < 1e-14);
        assert!((max(&t.boundary2) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gauge_shift_keeps_identities() {
        let mut s = rotation(FormField::basis(2, &[0, 1]), half_rotation_eta(), ScalarField::zero());
        s.connection = Connection::from_fn(1, 2, |_, _, i| f(["x*y", "sin(x)"][i]));
        let df = FormField::function(2, f("x^2*y + cos(y)")).exterior_derivative();
        let base = s.identification_pipeline().unwrap();
        s.eta = &s.eta + &df;
        let shifted = s.identification_pipeline().unwrap();
        assert!(max(&shifted.h2_identity) < 1e-12 && max(&shifted.h3_identity) < 1e-12);
        for p in pts() {
            let b0 = base.b.get(&[0, 1]).value(&p).unwrap();
            let b1 = shifted.b.get(&[0, 1]).value(&p).unwrap();
            assert!((b0 - b1).abs() < 1e-13);
        }
    }
}
