//! Pointwise exterior algebra on the six-dimensional phase space `R3 x R3`.
//!
//! Basis covectors are numbered `0..6`: indices `0, 1, 2` are `dx1, dx2, dx3`
//! on the source factor and `3, 4, 5` are `dxbar1, dxbar2, dxbar3` on the
//! target factor. A k-form stores one coefficient per strictly increasing
//! multi-index, in lexicographic order. Multi-indices are handled internally as
//! 6-bit masks, so every sign reduces to counting inversions between masks.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use nalgebra::{Matrix3, Vector3, Vector6};

use crate::error::{Error, Result};

/// Ambient dimension.
pub const DIM: usize = 6;

pub const DX1: usize = 0;
pub const DX2: usize = 1;
pub const DX3: usize = 2;
pub const DXBAR1: usize = 3;
pub const DXBAR2: usize = 4;
pub const DXBAR3: usize = 5;

/// Lexicographic basis tables for every degree.
struct Basis {
    /// `masks[k]` lists the degree-k multi-indices in lexicographic order.
    masks: [Vec<u8>; DIM + 1],
    /// Position of a mask inside `masks[popcount(mask)]`.
    rank: [usize; 1 << DIM],
}

fn basis() -> &'static Basis {
    static BASIS: OnceLock<Basis> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mut masks: [Vec<u8>; DIM + 1] = Default::default();
        for (k, list) in masks.iter_mut().enumerate() {
            let mut current = Vec::with_capacity(k);
            push_combinations(0, k, &mut current, list);
        }
        let mut rank = [0usize; 1 << DIM];
        for list in &masks {
            for (pos, &m) in list.iter().enumerate() {
                rank[m as usize] = pos;
            }
        }
        Basis { masks, rank }
    })
}

fn push_combinations(start: usize, remaining: usize, current: &mut Vec<usize>, out: &mut Vec<u8>) {
    if remaining == 0 {
        out.push(current.iter().fold(0u8, |m, &i| m | (1 << i)));
        return;
    }
    for i in start..=(DIM - remaining) {
        current.push(i);
        push_combinations(i + 1, remaining - 1, current, out);
        current.pop();
    }
}

/// Binomial coefficient `C(6, k)`.
pub fn basis_len(degree: usize) -> usize {
    basis().masks[degree].len()
}

fn indices_of(mask: u8) -> impl Iterator<Item = usize> {
    (0..DIM).filter(move |i| mask & (1 << i) != 0)
}

/// Sign of the permutation that sorts the concatenation of `lhs` then `rhs`.
fn merge_sign(lhs: u8, rhs: u8) -> f64 {
    let inversions: u32 = indices_of(rhs)
        .map(|j| (lhs & !((1u8 << (j + 1)) - 1)).count_ones())
        .sum();
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// An alternating k-covector on `R6` with dense lexicographic coefficients.
#[derive(Clone, PartialEq)]
pub struct AltForm {
    degree: usize,
    coeffs: Vec<f64>,
}

impl AltForm {
    pub fn zero(degree: usize) -> Self {
        assert!(degree <= DIM, "degree {degree} exceeds dimension {DIM}");
        Self {
            degree,
            coeffs: vec![0.0; basis_len(degree)],
        }
    }

    pub fn scalar(value: f64) -> Self {
        Self {
            degree: 0,
            coeffs: vec![value],
        }
    }

    pub fn from_coeffs(degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        if degree > DIM {
            return Err(Error::DegreeOverflow {
                lhs: degree,
                rhs: 0,
            });
        }
        let expected = basis_len(degree);
        if coeffs.len() != expected {
            return Err(Error::CoefficientCount {
                degree,
                expected,
                found: coeffs.len(),
            });
        }
        Ok(Self { degree, coeffs })
    }

    /// `coeff * dx^{i1} ∧ ... ∧ dx^{ik}` for distinct, possibly unsorted, indices.
    /// Repeated indices give the zero form.
    pub fn monomial(indices: &[usize], coeff: f64) -> Self {
        let mut form = Self::zero(indices.len());
        let mut mask = 0u8;
        let mut sign = 1.0;
        for &i in indices {
            assert!(i < DIM, "basis index {i} out of range");
            if mask & (1 << i) != 0 {
                return form;
            }
            sign *= merge_sign(mask, 1 << i);
            mask |= 1 << i;
        }
        form.coeffs[basis().rank[mask as usize]] = sign * coeff;
        form
    }

    /// The covector `sum_i v_i dx^i`.
    pub fn one_form(v: &Vector6<f64>) -> Self {
        Self {
            degree: 1,
            coeffs: v.iter().copied().collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of the basis element with the given sorted indices.
    pub fn coeff(&self, indices: &[usize]) -> f64 {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        if indices.len() != self.degree {
            return 0.0;
        }
        let mask = indices.iter().fold(0u8, |m, &i| m | (1 << i));
        self.coeffs[basis().rank[mask as usize]]
    }

    /// Coefficient of `dx1 ∧ ... ∧ dxbar3` in a 6-form.
    pub fn top_coeff(&self) -> Result<f64> {
        if self.degree != DIM {
            return Err(Error::DegreeMismatch {
                expected: DIM,
                found: self.degree,
            });
        }
        Ok(self.coeffs[0])
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Iterator over `(sorted indices, coefficient)` pairs.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        basis().masks[self.degree]
            .iter()
            .zip(&self.coeffs)
            .map(|(&m, &c)| (indices_of(m).collect(), c))
    }

    pub fn wedge(&self, other: &AltForm) -> Result<AltForm> {
        let degree = self.degree + other.degree;
        if degree > DIM {
            return Err(Error::DegreeOverflow {
                lhs: self.degree,
                rhs: other.degree,
            });
        }
        let b = basis();
        let mut out = AltForm::zero(degree);
        for (&ma, &ca) in b.masks[self.degree].iter().zip(&self.coeffs) {
            if ca == 0.0 {
                continue;
            }
            for (&mb, &cb) in b.masks[other.degree].iter().zip(&other.coeffs) {
                if cb == 0.0 || ma & mb != 0 {
                    continue;
                }
                out.coeffs[b.rank[(ma | mb) as usize]] += merge_sign(ma, mb) * ca * cb;
            }
        }
        Ok(out)
    }

    /// Contraction `ι_v a`, an antiderivation of degree -1.
    pub fn interior(&self, v: &Vector6<f64>) -> Result<AltForm> {
        if self.degree == 0 {
            return Err(Error::ContractionOfScalar);
        }
        let b = basis();
        let mut out = AltForm::zero(self.degree - 1);
        for (&m, &c) in b.masks[self.degree].iter().zip(&self.coeffs) {
            if c == 0.0 {
                continue;
            }
            for (pos, i) in indices_of(m).enumerate() {
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                out.coeffs[b.rank[(m & !(1 << i)) as usize]] += sign * c * v[i];
            }
        }
        Ok(out)
    }

    /// Value of the form on `degree` vectors.
    pub fn evaluate(&self, vectors: &[Vector6<f64>]) -> Result<f64> {
        if vectors.len() != self.degree {
            return Err(Error::DegreeMismatch {
                expected: vectors.len(),
                found: self.degree,
            });
        }
        let k = self.degree;
        let mut total = 0.0;
        for (&m, &c) in basis().masks[k].iter().zip(&self.coeffs) {
            if c == 0.0 {
                continue;
            }
            let rows: Vec<usize> = indices_of(m).collect();
            let mut minor = [[0.0; DIM]; DIM];
            for (r, &i) in rows.iter().enumerate() {
                for (col, v) in vectors.iter().enumerate() {
                    minor[r][col] = v[i];
                }
            }
            total += c * determinant(&mut minor, k);
        }
        Ok(total)
    }
}

impl fmt::Debug for AltForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AltForm<{}>(", self.degree)?;
        let mut first = true;
        for (idx, c) in self.terms() {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let names: Vec<String> = idx
                .iter()
                .map(|&i| {
                    if i < 3 {
                        format!("dx{}", i + 1)
                    } else {
                        format!("dxbar{}", i - 2)
                    }
                })
                .collect();
            write!(f, "{c}*{}", names.join("^"))?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")")
    }
}

/// Determinant of the leading `n x n` block, by partial-pivot elimination.
fn determinant(m: &mut [[f64; DIM]; DIM], n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap_or(col);
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        let (upper, lower) = m.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for row in lower.iter_mut() {
            let factor = row[col] / pivot_row[col];
            for (a, b) in row[col..n].iter_mut().zip(&pivot_row[col..n]) {
                *a -= factor * b;
            }
        }
    }
    det
}

fn assert_same_degree(a: &AltForm, b: &AltForm) {
    assert_eq!(a.degree, b.degree, "adding forms of different degree");
}

impl Add for &AltForm {
    type Output = AltForm;
    fn add(self, rhs: &AltForm) -> AltForm {
        assert_same_degree(self, rhs);
        AltForm {
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &AltForm {
    type Output = AltForm;
    fn sub(self, rhs: &AltForm) -> AltForm {
        assert_same_degree(self, rhs);
        AltForm {
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Add for AltForm {
    type Output = AltForm;
    fn add(self, rhs: AltForm) -> AltForm {
        &self + &rhs
    }
}

impl Sub for AltForm {
    type Output = AltForm;
    fn sub(self, rhs: AltForm) -> AltForm {
        &self - &rhs
    }
}

impl Mul<&AltForm> for f64 {
    type Output = AltForm;
    fn mul(self, rhs: &AltForm) -> AltForm {
        AltForm {
            degree: rhs.degree,
            coeffs: rhs.coeffs.iter().map(|c| self * c).collect(),
        }
    }
}

impl Mul<AltForm> for f64 {
    type Output = AltForm;
    fn mul(self, rhs: AltForm) -> AltForm {
        self * &rhs
    }
}

impl Neg for AltForm {
    type Output = AltForm;
    fn neg(self) -> AltForm {
        -1.0 * &self
    }
}

/// Local data of the graph `x -> (x, T(x))` of a map `T: R3 -> R3`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSection {
    pub map_value: Vector3<f64>,
    pub jacobian: Matrix3<f64>,
}

impl GraphSection {
    pub fn new(map_value: Vector3<f64>, jacobian: Matrix3<f64>) -> Result<Self> {
        if !jacobian.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput(
                "graph section jacobian is not finite".into(),
            ));
        }
        Ok(Self {
            map_value,
            jacobian,
        })
    }

    /// Tangent vectors `(e_i, DT e_i)` of the graph.
    pub fn tangents(&self) -> [Vector6<f64>; 3] {
        std::array::from_fn(|i| {
            let col = self.jacobian.column(i);
            let mut t = Vector6::zeros();
            t[i] = 1.0;
            t[3] = col[0];
            t[4] = col[1];
            t[5] = col[2];
            t
        })
    }
}

/// Coefficient of `dx1 ∧ dx2 ∧ dx3` in the pullback of a 3-form along the graph.
pub fn pullback_by_section(form: &AltForm, section: &GraphSection) -> Result<f64> {
    if form.degree() != 3 {
        return Err(Error::DegreeMismatch {
            expected: 3,
            found: form.degree(),
        });
    }
    form.evaluate(&section.tangents())
}

/// The canonical symplectic form `sum_i dx^i ∧ dxbar^i`.
pub fn canonical_symplectic() -> AltForm {
    (0..3).fold(AltForm::zero(2), |acc, i| {
        acc + AltForm::monomial(&[i, i + 3], 1.0)
    })
}

pub fn unit_vector(i: usize) -> Vector6<f64> {
    let mut v = Vector6::zeros();
    v[i] = 1.0;
    v
}
