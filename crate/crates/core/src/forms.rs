//! Chart-local exterior calculus on component arrays of scalar fields.
//!
//! Forms are stored on strictly increasing index tuples. The wedge product
//! uses the unit-coefficient shuffle convention, so `dx ∧ dy` has component
//! `(0, 1) = 1` and no factorials appear anywhere.

use std::ops::{Add, Neg, Sub};

use crate::error::CheckError;
use crate::expr::MAX_DIM;
use crate::field::ScalarField;
use crate::index::{increasing_tuples, Alternating};

/// A coordinate chart with a sampling box.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    coords: Vec<String>,
    bounds: Vec<(f64, f64)>,
}

impl Chart {
    pub fn new(coords: Vec<String>, bounds: Vec<(f64, f64)>) -> Result<Self, CheckError> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(CheckError::Invalid(format!(
                "chart dimension must be in 1..={MAX_DIM}, got {}",
                coords.len()
            )));
        }
        if coords.len() != bounds.len() {
            return Err(CheckError::Invalid("one sampling interval per coordinate is required".into()));
        }
        if let Some((lo, hi)) = bounds.iter().find(|(lo, hi)| !(lo < hi) || !lo.is_finite() || !hi.is_finite()) {
            return Err(CheckError::Invalid(format!("degenerate sampling interval [{lo}, {hi}]")));
        }
        Ok(Chart { coords, bounds })
    }

    /// Chart with coordinates `x0, x1, ...` on the box `[-1, 1]^d`.
    pub fn cube(dim: usize) -> Self {
        let coords = (0..dim).map(|i| format!("x{i}")).collect();
        Chart::new(coords, vec![(-1.0, 1.0); dim]).expect("valid cube chart")
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }
}

/// A differential `k`-form on a `dim`-dimensional chart.
#[derive(Clone, Debug)]
pub struct FormField(Alternating);

impl FormField {
    /// Degrees above `dim` give the zero space.
    pub fn zero(dim: usize, degree: usize) -> Self {
        FormField(Alternating::zero(dim, degree))
    }

    pub fn function(dim: usize, f: ScalarField) -> Self {
        let mut w = Self::zero(dim, 0);
        w.set(&[], f);
        w
    }

    pub fn from_fn(dim: usize, degree: usize, f: impl Fn(&[usize]) -> ScalarField) -> Self {
        FormField(Alternating::from_fn(dim, degree, f))
    }

    /// A one-form from its components `w_i`.
    pub fn one_form(comps: Vec<ScalarField>) -> Self {
        let d = comps.len();
        Self::from_fn(d, 1, |t| comps[t[0]].clone())
    }

    /// The basis form `dx^{i1} ∧ ... ∧ dx^{ik}`.
    pub fn basis(dim: usize, idx: &[usize]) -> Self {
        let mut w = Self::zero(dim, idx.len());
        w.set(idx, ScalarField::one());
        w
    }

    pub fn dim(&self) -> usize {
        self.0.n()
    }

    pub fn degree(&self) -> usize {
        self.0.k()
    }

    pub fn get(&self, idx: &[usize]) -> ScalarField {
        self.0.get(idx)
    }

    pub fn set(&mut self, idx: &[usize], f: ScalarField) {
        self.0.set(idx, f)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, &ScalarField)> {
        self.0.iter()
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.0.is_structurally_zero()
    }

    pub fn scale(&self, s: f64) -> Self {
        FormField(self.0.map(|f| f.scale(s)))
    }

    /// Pointwise product with a function.
    pub fn mul_fn(&self, f: &ScalarField) -> Self {
        FormField(self.0.map(|c| c * f))
    }

    pub fn exterior_derivative(&self) -> Self {
        let d = self.dim();
        let k = self.degree();
        assert!(k < d, "exterior derivative of a top-degree form");
        Self::from_fn(d, k + 1, |t| {
            (0..=k)
                .map(|j| {
                    let mut rest = t.to_vec();
                    let i = rest.remove(j);
                    let term = self.get(&rest).partial(i);
                    if j % 2 == 0 {
                        term
                    } else {
                        -term
                    }
                })
                .sum()
        })
    }

    pub fn wedge(&self, other: &FormField) -> Result<Self, CheckError> {
        let d = self.dim();
        assert_eq!(d, other.dim(), "forms on different charts");
        let (k, l) = (self.degree(), other.degree());
        if k + l > d {
            return Err(CheckError::DegreeOverflow { degree: k + l, bound: d });
        }
        Ok(Self::from_fn(d, k + l, |t| {
            // (k, l)-shuffles of the increasing tuple t
            increasing_tuples(k + l, k)
                .into_iter()
                .map(|pos| {
                    let mut left = Vec::with_capacity(k);
                    let mut right = Vec::with_capacity(l);
                    let mut inversions = 0usize;
                    for (p, &ti) in t.iter().enumerate() {
                        if pos.contains(&p) {
                            inversions += right.len();
                            left.push(ti);
                        } else {
                            right.push(ti);
                        }
                    }
                    let term = self.get(&left) * other.get(&right);
                    if inversions % 2 == 0 {
                        term
                    } else {
                        -term
                    }
                })
                .sum()
        }))
    }

    pub fn interior(&self, v: &VectorField) -> Self {
        let d = self.dim();
        let k = self.degree();
        assert!(k >= 1, "interior product of a function");
        Self::from_fn(d, k - 1, |t| {
            (0..d)
                .map(|i| {
                    let mut full = Vec::with_capacity(k);
                    full.push(i);
                    full.extend_from_slice(t);
                    &v.comps[i] * self.get(&full)
                })
                .sum()
        })
    }

    /// Lie derivative through the Cartan formula `ι_v dω + d ι_v ω`.
    pub fn lie_derivative(&self, v: &VectorField) -> Self {
        let k = self.degree();
        let d = self.dim();
        let a = if k < d {
            self.exterior_derivative().interior(v)
        } else {
            Self::zero(d, k)
        };
        if k == 0 {
            return a;
        }
        a + self.interior(v).exterior_derivative()
    }
}

impl Add for FormField {
    type Output = FormField;
    fn add(self, rhs: FormField) -> FormField {
        FormField(self.0.zip_with(&rhs.0, |a, b| a + b))
    }
}

impl Sub for FormField {
    type Output = FormField;
    fn sub(self, rhs: FormField) -> FormField {
        FormField(self.0.zip_with(&rhs.0, |a, b| a - b))
    }
}

impl<'a> Add<&'a FormField> for &'a FormField {
    type Output = FormField;
    fn add(self, rhs: &FormField) -> FormField {
        FormField(self.0.zip_with(&rhs.0, |a, b| a + b))
    }
}

impl<'a> Sub<&'a FormField> for &'a FormField {
    type Output = FormField;
    fn sub(self, rhs: &FormField) -> FormField {
        FormField(self.0.zip_with(&rhs.0, |a, b| a - b))
    }
}

impl Neg for FormField {
    type Output = FormField;
    fn neg(self) -> FormField {
        self.scale(-1.0)
    }
}

/// A vector field `v^i ∂_i`.
#[derive(Clone, Debug)]
pub struct VectorField {
    comps: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(comps: Vec<ScalarField>) -> Self {
        VectorField { comps }
    }

    pub fn zero(dim: usize) -> Self {
        VectorField {
            comps: vec![ScalarField::zero(); dim],
        }
    }

    /// The coordinate vector field `∂_i`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut v = Self::zero(dim);
        v.comps[i] = ScalarField::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn comps(&self) -> &[ScalarField] {
        &self.comps
    }

    pub fn comp(&self, i: usize) -> &ScalarField {
        &self.comps[i]
    }

    /// Directional derivative `v(f) = v^i ∂_i f`.
    pub fn apply(&self, f: &ScalarField) -> ScalarField {
        self.comps
            .iter()
            .enumerate()
            .map(|(i, vi)| vi * f.partial(i))
            .sum()
    }

    /// Lie bracket `[v, w]^i = v(w^i) - w(v^i)`.
    pub fn bracket(&self, w: &VectorField) -> VectorField {
        VectorField::new(
            (0..self.dim())
                .map(|i| self.apply(&w.comps[i]) - w.apply(&self.comps[i]))
                .collect(),
        )
    }

    pub fn scale_by(&self, f: &ScalarField) -> VectorField {
        VectorField::new(self.comps.iter().map(|c| c * f).collect())
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.comps.iter().all(ScalarField::is_zero)
    }
}

impl Add for VectorField {
    type Output = VectorField;
    fn add(self, rhs: VectorField) -> VectorField {
        VectorField::new(self.comps.iter().zip(&rhs.comps).map(|(a, b)| a + b).collect())
    }
}

impl Sub for VectorField {
    type Output = VectorField;
    fn sub(self, rhs: VectorField) -> VectorField {
        VectorField::new(self.comps.iter().zip(&rhs.comps).map(|(a, b)| a - b).collect())
    }
}

/// A symmetric covariant 2-tensor, stored on `i <= j`.
#[derive(Clone, Debug)]
pub struct SymTensor {
    dim: usize,
    comps: Vec<ScalarField>,
}

fn sym_index(dim: usize, i: usize, j: usize) -> usize {
    let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
    lo * dim - lo * (lo + 1) / 2 + hi
}

impl SymTensor {
    pub fn zero(dim: usize) -> Self {
        SymTensor {
            dim,
            comps: vec![ScalarField::zero(); dim * (dim + 1) / 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut g = Self::zero(dim);
        for i in 0..dim {
            g.set(i, i, ScalarField::one());
        }
        g
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> ScalarField) -> Self {
        let mut g = Self::zero(dim);
        for i in 0..dim {
            for j in i..dim {
                g.set(i, j, f(i, j));
            }
        }
        g
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> ScalarField {
        self.comps[sym_index(self.dim, i, j)].clone()
    }

    pub fn set(&mut self, i: usize, j: usize, f: ScalarField) {
        let k = sym_index(self.dim, i, j);
        self.comps[k] = f;
    }

    /// `(i, j)` pairs with `i <= j` and their components.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), ScalarField)> + '_ {
        (0..self.dim).flat_map(move |i| (i..self.dim).map(move |j| ((i, j), self.get(i, j))))
    }

    /// Pointwise inverse as a symmetric tensor of lazily inverted entries.
    pub fn inverse(&self) -> SymTensor {
        let n = self.dim;
        let m = std::sync::Arc::new(
            (0..n * n).map(|k| self.get(k / n, k % n)).collect::<Vec<_>>(),
        );
        SymTensor::from_fn(n, |i, j| ScalarField::inverse_entry(m.clone(), n, i, j))
    }

    /// `g(v, ·)` as a one-form.
    pub fn flat(&self, v: &VectorField) -> FormField {
        FormField::one_form(
            (0..self.dim)
                .map(|i| (0..self.dim).map(|j| self.get(i, j) * v.comp(j)).sum())
                .collect(),
        )
    }

    /// `g(v, w)`.
    pub fn pair(&self, v: &VectorField, w: &VectorField) -> ScalarField {
        (0..self.dim)
            .flat_map(|i| (0..self.dim).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j) * v.comp(i) * w.comp(j))
            .sum()
    }

    /// `(L_v g)_{ij} = v^k ∂_k g_{ij} + ∂_i v^k g_{kj} + ∂_j v^k g_{ik}`.
    pub fn lie_derivative(&self, v: &VectorField) -> SymTensor {
        let d = self.dim;
        SymTensor::from_fn(d, |i, j| {
            let transport = v.apply(&self.get(i, j));
            let stretch: ScalarField = (0..d)
                .map(|k| v.comp(k).partial(i) * self.get(k, j) + v.comp(k).partial(j) * self.get(i, k))
                .sum();
            transport + stretch
        })
    }

    pub fn sub(&self, other: &SymTensor) -> SymTensor {
        SymTensor {
            dim: self.dim,
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a - b).collect(),
        }
    }
}

/// A metric `g_ij`; alias kept for readability at call sites.
pub type MetricField = SymTensor;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn f(src: &str) -> ScalarField {
        let c: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        parse(src, &c).unwrap().into()
    }

    fn val(s: &ScalarField, p: &[f64]) -> f64 {
        s.value(p).unwrap()
    }

    #[test]
    fn d_of_rotation_potential() {
        let a = FormField::one_form(vec![f("-y"), f("x")]);
        let da = a.exterior_derivative();
        assert_eq!(val(&da.get(&[0, 1]), &[0.3, -0.7]), 2.0);
    }

    #[test]
    fn d_of_constant_function() {
        let w = FormField::function(2, ScalarField::constant(4.0));
        assert!(w.exterior_derivative().is_structurally_zero());
    }

    #[test]
    fn wedge_basis_and_hand_case() {
        let dx = FormField::basis(2, &[0]);
        let dy = FormField::basis(2, &[1]);
        assert_eq!(dx.wedge(&dy).unwrap().get(&[0, 1]).as_constant(), Some(1.0));
        let xdx = FormField::one_form(vec![f("x"), f("0")]);
        let ydy = FormField::one_form(vec![f("0"), f("y")]);
        let w = xdx.wedge(&ydy).unwrap();
        assert_eq!(val(&w.get(&[0, 1]), &[2.0, 3.0]), 6.0);
        assert!(matches!(
            w.wedge(&dx),
            Err(CheckError::DegreeOverflow { degree: 3, bound: 2 })
        ));
    }

    #[test]
    fn interior_hand_cases() {
        let v = VectorField::new(vec![f("-y"), f("x")]);
        let b = FormField::basis(2, &[0, 1]);
        let ib = b.interior(&v);
        let p = [0.4, -1.3];
        assert_eq!(val(&ib.get(&[0]), &p), -0.4);
        assert_eq!(val(&ib.get(&[1]), &p), 1.3);
        let dx = FormField::basis(2, &[0]);
        assert_eq!(dx.interior(&VectorField::coordinate(2, 0)).get(&[]).as_constant(), Some(1.0));
        assert!(val(&b.interior(&v).interior(&v).get(&[]), &p).abs() < 1e-15);
    }

    #[test]
    fn lie_derivative_hand_cases() {
        let v = VectorField::new(vec![f("x"), f("0")]);
        let area = FormField::basis(2, &[0, 1]);
        assert_eq!(val(&area.lie_derivative(&v).get(&[0, 1]), &[0.2, 0.9]), 1.0);
        let z = VectorField::zero(2);
        assert!(area.lie_derivative(&z).is_structurally_zero());
    }

    #[test]
    fn lie_derivative_of_metric() {
        let g = SymTensor::identity(2);
        let rot = VectorField::new(vec![f("-y"), f("x")]);
        let lg = g.lie_derivative(&rot);
        let p = [0.7, -0.2];
        for ((i, j), c) in lg.iter() {
            assert_eq!(val(&c, &p), 0.0, "({i},{j})");
        }
        let dil = VectorField::new(vec![f("x"), f("0")]);
        let lg = g.lie_derivative(&dil);
        assert_eq!(val(&lg.get(0, 0), &p), 2.0);
        assert_eq!(val(&lg.get(0, 1), &p), 0.0);
        assert_eq!(val(&lg.get(1, 1), &p), 0.0);
    }

    #[test]
    fn chart_validation() {
        assert!(Chart::new(vec!["x".into()], vec![(1.0, 1.0)]).is_err());
        assert!(Chart::new(vec![], vec![]).is_err());
        assert_eq!(Chart::cube(3).dim(), 3);
    }
}
