//! Multimomentum sections on pre-n-plectic manifolds: descent forms
//! `η^(k) ∈ Ω^k(M, ∧^{n−k} E*)` and the conditions HM1 to HM3.
//!
//! Bundle-valued pairings `⟨ξ ∧, η(…)⟩` contract into the first bundle
//! slot of `η`; see [`first_slot`].

use crate::algebroid::Algebroid;
use crate::connection::Connection;
use crate::error::CheckError;
use crate::eval::{difference_block, ResidualBlock};
use crate::field::ScalarField;
use crate::forms::FormField;
use crate::index::{all_tuples, binomial, increasing_tuples, sort_with_sign, tuple_rank};
use crate::momentum::{self, GammaSign, MomentumData};

/// A `k`-form with values in `∧^m E*`, one form per increasing bundle tuple.
#[derive(Clone, Debug)]
pub struct VForm {
    dim: usize,
    rank: usize,
    form_degree: usize,
    bundle_degree: usize,
    comps: Vec<FormField>,
}

impl VForm {
    pub fn zero(dim: usize, rank: usize, form_degree: usize, bundle_degree: usize) -> Self {
        VForm {
            dim,
            rank,
            form_degree,
            bundle_degree,
            comps: vec![FormField::zero(dim, form_degree); binomial(rank, bundle_degree)],
        }
    }

    pub fn form_degree(&self) -> usize {
        self.form_degree
    }

    pub fn bundle_degree(&self) -> usize {
        self.bundle_degree
    }

    /// Sets the component on (`form_idx`, `bundle_idx`), both antisymmetric.
    pub fn set(&mut self, form_idx: &[usize], bundle_idx: &[usize], f: ScalarField) {
        assert_eq!(bundle_idx.len(), self.bundle_degree, "bundle tuple length");
        let (sorted, sign) = sort_with_sign(bundle_idx).expect("repeated bundle index");
        let r = tuple_rank(self.rank, &sorted);
        self.comps[r].set(form_idx, f.scale(sign));
    }

    pub fn get(&self, form_idx: &[usize], bundle_idx: &[usize]) -> ScalarField {
        self.form(bundle_idx).get(form_idx)
    }

    /// The form `η(e_{b_1}, …, e_{b_m})`.
    pub fn form(&self, bundle_idx: &[usize]) -> FormField {
        assert_eq!(bundle_idx.len(), self.bundle_degree, "bundle tuple length");
        match sort_with_sign(bundle_idx) {
            None => FormField::zero(self.dim, self.form_degree),
            Some((sorted, sign)) => self.comps[tuple_rank(self.rank, &sorted)].scale(sign),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        VForm { comps: self.comps.iter().map(|c| c.scale(s)).collect(), ..self.clone() }
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.comps.iter().all(FormField::is_structurally_zero)
    }
}

/// `⟨e^c ⊗ ·, η(rest)⟩`: the bundle index `c` fills the first slot of `η`.
pub fn first_slot(eta: &VForm, c: usize, rest: &[usize]) -> FormField {
    let mut t = Vec::with_capacity(rest.len() + 1);
    t.push(c);
    t.extend_from_slice(rest);
    eta.form(&t)
}

fn d_or_zero(f: &FormField) -> FormField {
    if f.degree() < f.dim() {
        f.exterior_derivative()
    } else {
        FormField::zero(f.dim(), f.degree() + 1)
    }
}

fn wedge_or_zero(a: &FormField, b: &FormField) -> FormField {
    a.wedge(b).unwrap_or_else(|_| FormField::zero(a.dim(), a.degree() + b.degree()))
}

/// `(−1)^i` for the 1-based position `i`.
fn alt(i0: usize) -> f64 {
    if (i0 + 1) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn without(t: &[usize], i: usize) -> Vec<usize> {
    t.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x).collect()
}

fn index(parts: &[&[usize]]) -> Vec<usize> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

/// Closed `(n+1)`-form `h` and descent forms `η^(0) … η^(n)`.
#[derive(Clone, Debug)]
pub struct PrenPlecticData {
    pub algebroid: Algebroid,
    pub connection: Connection,
    pub n: usize,
    pub h: FormField,
    /// `eta[k]` has form degree `k` and bundle degree `n − k`.
    pub eta: Vec<VForm>,
}

pub struct LieAlgebraBlocks {
    pub hm2: ResidualBlock,
    pub hm3_forms: ResidualBlock,
    pub hm3_functions: ResidualBlock,
    pub hm1: ResidualBlock,
    /// `η^(k) = 0` for every `k ≤ n − 2`.
    pub multimomentum_map_mode: bool,
}

pub struct N1Blocks {
    pub h1: ResidualBlock,
    pub h2: ResidualBlock,
    pub h3: ResidualBlock,
}

impl PrenPlecticData {
    /// Zero descent forms of the right shapes.
    pub fn new(algebroid: Algebroid, connection: Connection, n: usize, h: FormField) -> Self {
        let (d, r) = (algebroid.dim(), algebroid.rank());
        let eta = (0..=n).map(|k| VForm::zero(d, r, k, n - k)).collect();
        PrenPlecticData { algebroid, connection, n, h, eta }
    }

    fn dim(&self) -> usize {
        self.algebroid.dim()
    }

    fn rank(&self) -> usize {
        self.algebroid.rank()
    }

    /// `h̃ = h + dη^(n)`.
    pub fn tilde_h(&self) -> FormField {
        &self.h + &d_or_zero(&self.eta[self.n].form(&[]))
    }

    pub fn closedness_h(&self) -> ResidualBlock {
        momentum::closedness("closedness_h", &self.h)
    }

    /// `η^(k−1)(e_k…e_n) − Σ_cycl (−1)^k ι_{ρ(e_k)} η^(k)(e_{k+1}…e_n)`.
    pub fn descent_cyclic(&self) -> ResidualBlock {
        let (d, r, n) = (self.dim(), self.rank(), self.n);
        let mut block = ResidualBlock::new("descent_cyclic", &["lower", "cyclic"]);
        for k in 1..n {
            if k > d {
                break;
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            for e in all_tuples(r, n - k + 1) {
                let lower = self.eta[k - 1].form(&e);
                let mut cyc = FormField::zero(d, k - 1);
                for s in 0..e.len() {
                    let rot: Vec<usize> = e[s..].iter().chain(&e[..s]).copied().collect();
                    cyc = cyc + self.eta[k].form(&rot[1..]).interior(self.algebroid.anchor(rot[0]));
                }
                let cyc = cyc.scale(sign);
                for t in increasing_tuples(d, k - 1) {
                    block.push(index(&[&[k], &e, &t]), vec![lower.get(&t), -cyc.get(&t)]);
                }
            }
        }
        block
    }

    /// `ι_{ρ(e_k)} η^(k)(…, e_{k+m}, …) + ι_{ρ(e_{k+m})} η^(k)(…, e_k, …)`.
    pub fn descent_exchange(&self) -> ResidualBlock {
        let (d, r, n) = (self.dim(), self.rank(), self.n);
        let mut block = ResidualBlock::new("descent_exchange", &["first", "swapped"]);
        for k in 1..n {
            if k > d {
                break;
            }
            for e in all_tuples(r, n - k + 1) {
                let rest = &e[1..];
                let first = self.eta[k].form(rest).interior(self.algebroid.anchor(e[0]));
                for m in 1..=n - k {
                    let mut swapped_args = rest.to_vec();
                    swapped_args[m - 1] = e[0];
                    let swapped = self.eta[k].form(&swapped_args).interior(self.algebroid.anchor(e[m]));
                    for t in increasing_tuples(d, k - 1) {
                        block.push(index(&[&[k, m], &e, &t]), vec![first.get(&t), swapped.get(&t)]);
                    }
                }
            }
        }
        block
    }

    fn anchored_h(&self) -> Vec<FormField> {
        let th = self.tilde_h();
        (0..self.rank()).map(|a| th.interior(self.algebroid.anchor(a))).collect()
    }

    /// `(Dη^(n−1))_a − ι_{ρ_a} h̃`.
    pub fn hm2(&self) -> Result<ResidualBlock, CheckError> {
        let (d, n) = (self.dim(), self.n);
        let mut block = ResidualBlock::new("HM2", &["exterior_derivative", "connection", "anchor_h"]);
        if n > d {
            return Ok(block);
        }
        let forms: Vec<FormField> = (0..self.rank()).map(|a| self.eta[n - 1].form(&[a])).collect();
        let ih = self.anchored_h();
        for (a, (dg, cg)) in self.connection.dual_covariant_parts(&forms)?.into_iter().enumerate() {
            for t in increasing_tuples(d, n) {
                block.push(index(&[&[a], &t]), vec![dg.get(&t), cg.get(&t), -ih[a].get(&t)]);
            }
        }
        Ok(block)
    }

    /// `D ι_ρ h̃`.
    pub fn hm1(&self) -> Result<ResidualBlock, CheckError> {
        momentum::covariant_block("HM1", &self.connection, &self.anchored_h())
    }

    /// The `k = 1 … n−1` differential identities, term by term.
    pub fn hm3_forms(&self) -> Result<ResidualBlock, CheckError> {
        let (d, r, n) = (self.dim(), self.rank(), self.n);
        let alg = &self.algebroid;
        let conn = &self.connection;
        let mut block = ResidualBlock::new(
            "HM3_forms",
            &["lie_derivative", "bracket", "connection_contracted", "connection_wedge", "connection_anchor"],
        );
        for k in 1..n {
            if k > d {
                break;
            }
            let eta = &self.eta[k];
            let m = n - k;
            // Σ_{i=1}^{m} (−1)^i
            let collapsed = if m % 2 == 1 { -1.0 } else { 0.0 };
            for a in 0..r {
                for b in all_tuples(r, m) {
                    let t1 = eta.form(&b).lie_derivative(alg.anchor(a));
                    let mut t2 = FormField::zero(d, k);
                    let mut t4 = FormField::zero(d, k);
                    let mut t5 = FormField::zero(d, k);
                    for i in 0..m {
                        let s = alt(i);
                        let rest = without(&b, i);
                        for c in 0..r {
                            let ec = first_slot(eta, c, &rest);
                            t2 = t2 + ec.mul_fn(&alg.structure(c, a, b[i])).scale(s);
                            let gr: ScalarField = (0..d).map(|j| conn.get(c, a, j) * alg.rho(j, b[i])).sum();
                            t5 = t5 + ec.mul_fn(&gr).scale(s);
                            let inner = ec.interior(alg.anchor(b[i]));
                            t4 = t4 - wedge_or_zero(&conn.one_form(c, a), &inner).scale(s);
                        }
                    }
                    let mut t3 = FormField::zero(d, k);
                    if collapsed != 0.0 {
                        for c in 0..r {
                            let gr: ScalarField = (0..d).map(|j| conn.get(c, b[0], j) * alg.rho(j, a)).sum();
                            t3 = t3 + first_slot(eta, c, &b[1..]).mul_fn(&gr);
                        }
                        t3 = t3.scale(collapsed);
                    }
                    for t in increasing_tuples(d, k) {
                        block.push(
                            index(&[&[k, a], &b, &t]),
                            vec![t1.get(&t), t2.get(&t), t3.get(&t), t4.get(&t), t5.get(&t)],
                        );
                    }
                }
            }
        }
        Ok(block)
    }

    /// The `k = 0` identity on `(e_a; e_{b_1}, …, e_{b_n})`.
    pub fn hm3_functions(&self) -> ResidualBlock {
        let (d, r, n) = (self.dim(), self.rank(), self.n);
        let alg = &self.algebroid;
        let eta = &self.eta[0];
        let mut block = ResidualBlock::new("HM3_functions", &["lie_derivative", "bracket", "connection_anchor"]);
        for a in 0..r {
            for b in all_tuples(r, n) {
                let t1 = alg.anchor(a).apply(&eta.get(&[], &b));
                let mut t2 = ScalarField::zero();
                let mut t5 = ScalarField::zero();
                for i in 0..n {
                    let s = alt(i);
                    let rest = without(&b, i);
                    for c in 0..r {
                        let ec = first_slot(eta, c, &rest).get(&[]);
                        t2 = t2 + (alg.structure(c, a, b[i]) * &ec).scale(s);
                        let gr: ScalarField = (0..d).map(|j| self.connection.get(c, a, j) * alg.rho(j, b[i])).sum();
                        t5 = t5 + (gr * ec).scale(s);
                    }
                }
                block.push(index(&[&[a], &b]), vec![t1, t2, t5]);
            }
        }
        block
    }

    /// `^E dη^(n−1)(e_a, e_b) − Dη^(n−2)(e_a, e_b)` on `a < b`.
    pub fn hm3_rewrite(&self) -> Result<ResidualBlock, CheckError> {
        let (d, r, n) = (self.dim(), self.rank(), self.n);
        let alg = &self.algebroid;
        let mut block = ResidualBlock::new("HM3_rewrite", &["e_differential", "covariant_derivative"]);
        if n < 2 || n - 1 > d {
            return Ok(block);
        }
        let top = &self.eta[n - 1];
        let low = &self.eta[n - 2];
        for p in increasing_tuples(r, 2) {
            let (a, b) = (p[0], p[1]);
            let mut ed = top.form(&[b]).lie_derivative(alg.anchor(a)) - top.form(&[a]).lie_derivative(alg.anchor(b));
            for c in 0..r {
                ed = ed - top.form(&[c]).mul_fn(&alg.structure(c, a, b));
            }
            let mut dl = d_or_zero(&low.form(&[a, b]));
            for c in 0..r {
                dl = dl
                    - wedge_or_zero(&self.connection.one_form(c, a), &low.form(&[c, b]))
                    - wedge_or_zero(&self.connection.one_form(c, b), &low.form(&[a, c]));
            }
            for t in increasing_tuples(d, n - 1) {
                block.push(index(&[&[a, b], &t]), vec![ed.get(&t), -dl.get(&t)]);
            }
        }
        Ok(block)
    }

    /// Flat-connection, constant-structure evaluators written with in-place
    /// bracket substitution.
    pub fn lie_algebra(&self) -> Result<LieAlgebraBlocks, CheckError> {
        if !self.connection.is_zero() {
            return Err(CheckError::NotApplicable("connection is not zero".into()));
        }
        if !self.algebroid.has_constant_structure() {
            return Err(CheckError::NotApplicable("structure functions are not constant".into()));
        }
        let (d, r, n) = (self.dim(), self.rank(), self.n);
        let alg = &self.algebroid;
        let th = self.tilde_h();

        let mut hm2 = ResidualBlock::new("lie_algebra_HM2", &["exterior_derivative", "anchor_h"]);
        if n <= d {
            for a in 0..r {
                let de = d_or_zero(&self.eta[n - 1].form(&[a]));
                let ih = th.interior(alg.anchor(a));
                for t in increasing_tuples(d, n) {
                    hm2.push(index(&[&[a], &t]), vec![de.get(&t), -ih.get(&t)]);
                }
            }
        }

        // η(…, [e_a, e_{b_i}], …) summed over the slot i
        let substituted = |eta: &VForm, a: usize, b: &[usize]| -> FormField {
            let mut acc = FormField::zero(d, eta.form_degree());
            for i in 0..b.len() {
                for c in 0..r {
                    let f = alg.structure(c, a, b[i]);
                    if f.is_zero() {
                        continue;
                    }
                    let mut args = b.to_vec();
                    args[i] = c;
                    acc = acc + eta.form(&args).mul_fn(&f);
                }
            }
            acc
        };

        let mut hm3_forms = ResidualBlock::new("lie_algebra_HM3_forms", &["lie_derivative", "bracket"]);
        for k in 1..n {
            if k > d {
                break;
            }
            for a in 0..r {
                for b in all_tuples(r, n - k) {
                    let lie = self.eta[k].form(&b).lie_derivative(alg.anchor(a));
                    let br = substituted(&self.eta[k], a, &b);
                    for t in increasing_tuples(d, k) {
                        hm3_forms.push(index(&[&[k, a], &b, &t]), vec![lie.get(&t), -br.get(&t)]);
                    }
                }
            }
        }

        let mut hm3_functions = ResidualBlock::new("lie_algebra_HM3_functions", &["lie_derivative", "bracket"]);
        for a in 0..r {
            for b in all_tuples(r, n) {
                let lie = alg.anchor(a).apply(&self.eta[0].get(&[], &b));
                hm3_functions.push(index(&[&[a], &b]), vec![lie, -substituted(&self.eta[0], a, &b).get(&[])]);
            }
        }

        let mut hm1 = ResidualBlock::new("lie_algebra_HM1", &["exterior_derivative"]);
        if n < d {
            for a in 0..r {
                let dih = th.interior(alg.anchor(a)).exterior_derivative();
                for t in increasing_tuples(d, n + 1) {
                    hm1.push(index(&[&[a], &t]), vec![dih.get(&t)]);
                }
            }
        }

        let multimomentum_map_mode = n >= 2 && self.eta[..n - 1].iter().all(VForm::is_structurally_zero);
        Ok(LieAlgebraBlocks { hm2, hm3_forms, hm3_functions, hm1, multimomentum_map_mode })
    }

    /// Differences between the specialized and the general evaluators.
    pub fn lie_algebra_agreement(&self) -> Result<Vec<ResidualBlock>, CheckError> {
        let la = self.lie_algebra()?;
        Ok(vec![
            difference_block("lie_algebra_HM2", &la.hm2, &self.hm2()?),
            difference_block("lie_algebra_HM3_forms", &la.hm3_forms, &self.hm3_forms()?),
            difference_block("lie_algebra_HM3_functions", &la.hm3_functions, &self.hm3_functions()),
            difference_block("lie_algebra_HM1", &la.hm1, &self.hm1()?),
        ])
    }

    /// With `n = 1`: `μ = η^(0)`, `B = h̃`, compared identity by identity.
    pub fn reduce_n1(&self) -> Result<N1Blocks, CheckError> {
        if self.n != 1 {
            return Err(CheckError::NotApplicable(format!("degree n = {} is not 1", self.n)));
        }
        let alg = &self.algebroid;
        let mu: Vec<ScalarField> = (0..self.rank()).map(|a| self.eta[0].get(&[], &[a])).collect();
        let b = self.tilde_h();
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
        Ok(N1Blocks {
            h1: difference_block("n1_H1", &self.hm1()?, &h1),
            h2: difference_block("n1_H2", &self.hm2()?, &h2),
            h3: momentum::h3_identity_block("n1_H3", alg, &self.hm3_functions(), &h2, &h3),
        })
    }
}
