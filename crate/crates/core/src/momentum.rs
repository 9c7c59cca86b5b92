//! Momentum sections: `γ` from a pre-symplectic form, conditions H1 to H3,
//! classification, and the momentum-map reduction for action algebroids.
//!
//! Bracket compatibility is measured as `^E dμ(e_a, e_b) − ⟨γ(ρ_a), e_b⟩`.

use crate::algebroid::Algebroid;
use crate::connection::Connection;
use crate::error::CheckError;
use crate::eval::ResidualBlock;
use crate::field::ScalarField;
use crate::forms::FormField;
use crate::index::{increasing_tuples, Alternating};

/// Overall sign convention for `γ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GammaSign {
    /// `γ_{a,i} = −B_{ik} ρ^k_a`, i.e. `γ(·)(e_a) = ι_{ρ_a} B`.
    #[default]
    Standard,
    /// `γ_{a,i} = +B_{ik} ρ^k_a`.
    Flipped,
}

impl GammaSign {
    pub fn factor(self) -> f64 {
        match self {
            GammaSign::Standard => 1.0,
            GammaSign::Flipped => -1.0,
        }
    }
}

/// Pre-symplectic form, candidate section and connection.
#[derive(Clone, Debug)]
pub struct MomentumData<'a> {
    pub algebroid: &'a Algebroid,
    pub connection: &'a Connection,
    pub b: &'a FormField,
    pub mu: &'a [ScalarField],
    pub sign: GammaSign,
}

/// `γ` as one 1-form per bundle index.
pub fn gamma_from_b(alg: &Algebroid, b: &FormField, sign: GammaSign) -> Vec<FormField> {
    (0..alg.rank())
        .map(|a| b.interior(alg.anchor(a)).scale(sign.factor()))
        .collect()
}

/// `dB` on increasing triples.
pub fn closedness(name: &str, w: &FormField) -> ResidualBlock {
    let mut block = ResidualBlock::new(name, &["value"]);
    if w.degree() < w.dim() {
        for (t, c) in w.exterior_derivative().iter() {
            block.push(t, vec![c.clone()]);
        }
    }
    block
}

/// `(Dγ)_a = dγ_a − Γ^b_a ∧ γ_b`.
pub fn check_h1(alg: &Algebroid, conn: &Connection, b: &FormField, sign: GammaSign) -> Result<ResidualBlock, CheckError> {
    let gamma = gamma_from_b(alg, b, sign);
    covariant_block("H1", conn, &gamma)
}

/// Residual block of an exterior covariant derivative of E*-valued forms.
pub(crate) fn covariant_block(name: &str, conn: &Connection, forms: &[FormField]) -> Result<ResidualBlock, CheckError> {
    let mut block = ResidualBlock::new(name, &["exterior_derivative", "connection"]);
    let d = forms.first().map_or(0, FormField::dim);
    if forms.is_empty() || forms[0].degree() >= d {
        return Ok(block);
    }
    for (a, (dg, cg)) in conn.dual_covariant_parts(forms)?.into_iter().enumerate() {
        for (t, c) in dg.iter() {
            let mut idx = vec![a];
            idx.extend(&t);
            block.push(idx, vec![c.clone(), cg.get(&t)]);
        }
    }
    Ok(block)
}

/// `∂_i μ_a − Γ^b_{ai} μ_b − γ_{a,i}`.
pub fn check_h2(data: &MomentumData) -> ResidualBlock {
    let (alg, conn) = (data.algebroid, data.connection);
    let gamma = gamma_from_b(alg, data.b, data.sign);
    let mut block = ResidualBlock::new("H2", &["derivative", "connection", "gamma"]);
    for a in 0..alg.rank() {
        for i in 0..alg.dim() {
            let c: ScalarField = (0..alg.rank()).map(|b| conn.get(b, a, i) * &data.mu[b]).sum();
            block.push(vec![a, i], vec![data.mu[a].partial(i), -c, -gamma[a].get(&[i])]);
        }
    }
    block
}

/// `^E dμ` as an E-2-form.
pub fn e_d_mu(alg: &Algebroid, mu: &[ScalarField]) -> Result<Alternating, CheckError> {
    let form = crate::algebroid::EForm::from_fn(alg.rank(), 1, |t| mu[t[0]].clone());
    Ok(alg.e_differential(&form)?.0)
}

/// `⟨γ(ρ_a), e_b⟩ = γ_{b,i} ρ^i_a`.
pub fn gamma_pairing(alg: &Algebroid, gamma: &[FormField], a: usize, b: usize) -> ScalarField {
    (0..alg.dim()).map(|i| gamma[b].get(&[i]) * alg.rho(i, a)).sum()
}

/// `ρ_a(μ_b) − ρ_b(μ_a) − C^c_{ab} μ_c − ⟨γ(ρ_a), e_b⟩` on `a < b`.
pub fn check_h3(data: &MomentumData) -> ResidualBlock {
    let alg = data.algebroid;
    let gamma = gamma_from_b(alg, data.b, data.sign);
    let mut block = ResidualBlock::new("H3", &["rho_a_mu_b", "rho_b_mu_a", "structure", "gamma_pairing"]);
    for t in increasing_tuples(alg.rank(), 2) {
        let (a, b) = (t[0], t[1]);
        let c: ScalarField = (0..alg.rank()).map(|c| alg.structure(c, a, b) * &data.mu[c]).sum();
        block.push(
            vec![a, b],
            vec![
                alg.anchor(a).apply(&data.mu[b]),
                -alg.anchor(b).apply(&data.mu[a]),
                -c,
                -gamma_pairing(alg, &gamma, a, b),
            ],
        );
    }
    block
}

/// `lhs_{ab} − H3_{ab} − ρ^i_b H2_{a,i}` over ordered pairs, where `lhs`
/// is indexed by ordered pairs and `H3` is extended antisymmetrically.
/// Both blocks must come from the same data.
pub fn h3_identity_block(name: &str, alg: &Algebroid, lhs: &ResidualBlock, h2: &ResidualBlock, h3: &ResidualBlock) -> ResidualBlock {
    let (d, r) = (alg.dim(), alg.rank());
    let h2_totals = h2.totals();
    let h3_totals = h3.totals();
    let pairs = increasing_tuples(r, 2);
    let h3_at = |a: usize, b: usize| -> ScalarField {
        let pos = |p: [usize; 2]| pairs.iter().position(|q| q[..] == p[..]).expect("pair");
        match a.cmp(&b) {
            std::cmp::Ordering::Equal => ScalarField::zero(),
            std::cmp::Ordering::Less => h3_totals[pos([a, b])].clone(),
            std::cmp::Ordering::Greater => -h3_totals[pos([b, a])].clone(),
        }
    };
    let mut block = ResidualBlock::new(name, &[lhs.name.as_str(), "H3", "anchor_H2"]);
    for (e, t) in lhs.entries.iter().zip(lhs.totals()) {
        let (a, b) = (e.index[0], e.index[1]);
        let corr: ScalarField = (0..d).map(|i| alg.rho(i, b) * &h2_totals[a * d + i]).sum();
        block.push(e.index.clone(), vec![t, -h3_at(a, b), -corr]);
    }
    block
}

/// Definitions of weakly Hamiltonian and Hamiltonian, plus the partial cases.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentumClass {
    Hamiltonian,
    WeaklyHamiltonian,
    BracketCompatible,
    MomentumSection,
    None,
}

impl MomentumClass {
    pub fn label(self) -> &'static str {
        match self {
            MomentumClass::Hamiltonian => "Hamiltonian",
            MomentumClass::WeaklyHamiltonian => "weakly Hamiltonian",
            MomentumClass::BracketCompatible => "bracket-compatible D-momentum section",
            MomentumClass::MomentumSection => "D-momentum section",
            MomentumClass::None => "none",
        }
    }
}

pub fn classify(h1: bool, h2: bool, h3: bool) -> MomentumClass {
    match (h1, h2, h3) {
        (true, true, true) => MomentumClass::Hamiltonian,
        (true, true, false) => MomentumClass::WeaklyHamiltonian,
        (false, true, true) => MomentumClass::BracketCompatible,
        (false, true, false) => MomentumClass::MomentumSection,
        _ => MomentumClass::None,
    }
}

/// The three reduced conditions for an action algebroid with `D = d`.
pub struct MomentumMapBlocks {
    /// `L_{ρ_a} B`.
    pub symplectic: ResidualBlock,
    /// `dμ_a − γ_a`.
    pub hamiltonian: ResidualBlock,
    /// `ρ_a(μ_b) − C^c_{ab} μ_c` on all ordered pairs.
    pub equivariance: ResidualBlock,
}

pub fn momentum_map_check(data: &MomentumData) -> Result<MomentumMapBlocks, CheckError> {
    let alg = data.algebroid;
    if !data.connection.is_zero() {
        return Err(CheckError::NotApplicable("momentum-map reduction needs a vanishing connection".into()));
    }
    if !alg.has_constant_structure() {
        return Err(CheckError::NotApplicable("momentum-map reduction needs constant structure functions".into()));
    }
    let mut symplectic = ResidualBlock::new("moment_map_action", &["lie_derivative"]);
    for a in 0..alg.rank() {
        let lb = data.b.lie_derivative(alg.anchor(a));
        for (t, c) in lb.iter() {
            symplectic.push(vec![a, t[0], t[1]], vec![c.clone()]);
        }
    }
    let gamma = gamma_from_b(alg, data.b, data.sign);
    let mut hamiltonian = ResidualBlock::new("moment_map_hamiltonian", &["derivative", "gamma"]);
    for a in 0..alg.rank() {
        for i in 0..alg.dim() {
            hamiltonian.push(vec![a, i], vec![data.mu[a].partial(i), -gamma[a].get(&[i])]);
        }
    }
    let mut equivariance = ResidualBlock::new("moment_map_equivariance", &["rho_a_mu_b", "structure"]);
    for a in 0..alg.rank() {
        for b in 0..alg.rank() {
            let c: ScalarField = (0..alg.rank()).map(|c| alg.structure(c, a, b) * &data.mu[c]).sum();
            equivariance.push(vec![a, b], vec![alg.anchor(a).apply(&data.mu[b]), -c]);
        }
    }
    Ok(MomentumMapBlocks { symplectic, hamiltonian, equivariance })
}
