//! Free graded-commutative algebras over exact coefficient fields.
//!
//! An [`Algebra`] is a list of generators, each carrying a cohomological
//! degree and an intrinsic parity. Elements are sparse sums of monomials.
//! Generators of odd total parity anticommute and square to zero; every
//! other pair commutes. A monomial is stored as a list of
//! `(generator, exponent)` pairs sorted by generator index, which fixes the
//! order in which odd generators are multiplied and therefore the sign of
//! each stored coefficient.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::coeff::{split_sign, CoefficientField, Coeff, Q};
use crate::error::{structural, Result};

/// Cohomological degree plus intrinsic (fermion) parity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Grade {
    pub degree: i32,
    pub intrinsic: u8,
}

impl Grade {
    pub const ZERO: Grade = Grade { degree: 0, intrinsic: 0 };

    pub fn new(degree: i32, intrinsic: u8) -> Self {
        Grade { degree, intrinsic: intrinsic % 2 }
    }

    pub fn even(degree: i32) -> Self {
        Grade::new(degree, 0)
    }

    /// Total parity, the one the Koszul sign rule sees.
    pub fn parity(self) -> u8 {
        ((self.degree.rem_euclid(2) as u8) + self.intrinsic) % 2
    }

    pub fn is_odd(self) -> bool {
        self.parity() == 1
    }
}

impl Add for Grade {
    type Output = Grade;
    fn add(self, rhs: Grade) -> Grade {
        Grade::new(self.degree + rhs.degree, self.intrinsic + rhs.intrinsic)
    }
}

impl Sub for Grade {
    type Output = Grade;
    fn sub(self, rhs: Grade) -> Grade {
        Grade::new(self.degree - rhs.degree, self.intrinsic + rhs.intrinsic)
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.degree, self.intrinsic)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Generator {
    pub name: String,
    pub grade: Grade,
}

impl Generator {
    pub fn new(name: impl Into<String>, grade: Grade) -> Self {
        Generator { name: name.into(), grade }
    }
}

struct AlgebraInner {
    field: CoefficientField,
    gens: Vec<Generator>,
    parity: Vec<u8>,
    index: HashMap<String, u32>,
    fingerprint: u64,
}

/// A free graded-commutative algebra. Cheap to clone.
#[derive(Clone)]
pub struct Algebra(Arc<AlgebraInner>);

impl Algebra {
    pub fn new(field: CoefficientField, gens: Vec<Generator>) -> Result<Self> {
        let mut index = HashMap::with_capacity(gens.len());
        for (i, g) in gens.iter().enumerate() {
            if g.name == "I" {
                return Err(structural("generator name `I` is reserved for the imaginary unit"));
            }
            if index.insert(g.name.clone(), i as u32).is_some() {
                return Err(structural(format!("duplicate generator name `{}`", g.name)));
            }
        }
        let parity = gens.iter().map(|g| g.grade.parity()).collect();
        let mut h = std::collections::hash_map::DefaultHasher::new();
        field.hash(&mut h);
        gens.hash(&mut h);
        Ok(Algebra(Arc::new(AlgebraInner { field, gens, parity, index, fingerprint: h.finish() })))
    }

    /// The same generators followed by `extra`.
    pub fn extend(&self, extra: Vec<Generator>) -> Result<Self> {
        let mut gens = self.0.gens.clone();
        gens.extend(extra);
        Algebra::new(self.0.field, gens)
    }

    pub fn field(&self) -> CoefficientField {
        self.0.field
    }

    pub fn generators(&self) -> &[Generator] {
        &self.0.gens
    }

    pub fn len(&self) -> usize {
        self.0.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.gens.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<u32> {
        self.0.index.get(name).copied()
    }

    pub fn generator(&self, idx: u32) -> &Generator {
        &self.0.gens[idx as usize]
    }

    pub fn parity_of(&self, idx: u32) -> u8 {
        self.0.parity[idx as usize]
    }

    pub fn same_as(&self, other: &Algebra) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.fingerprint == other.0.fingerprint
                && self.0.field == other.0.field
                && self.0.gens == other.0.gens)
    }

    /// True when `self`'s generators are an initial segment of `other`'s.
    pub fn is_prefix_of(&self, other: &Algebra) -> bool {
        self.len() <= other.len()
            && (self.0.field == other.0.field
                || self.0.field == CoefficientField::Rationals)
            && self.0.gens[..] == other.0.gens[..self.len()]
    }

    pub fn check_same(&self, other: &Algebra) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(structural("operands belong to different algebras"))
        }
    }

    pub fn zero(&self) -> Element {
        Element { alg: self.clone(), terms: Vec::new() }
    }

    pub fn one(&self) -> Element {
        self.constant(Coeff::one())
    }

    pub fn constant(&self, c: Coeff) -> Element {
        if c.is_zero() {
            return self.zero();
        }
        Element { alg: self.clone(), terms: vec![(Monomial::one(), c)] }
    }

    pub fn int(&self, n: i64) -> Element {
        self.constant(Coeff::int(n))
    }

    pub fn rat(&self, n: i64, d: i64) -> Element {
        self.constant(Coeff::rat(n, d))
    }

    pub fn gen(&self, idx: u32) -> Element {
        Element { alg: self.clone(), terms: vec![(Monomial(vec![(idx, 1)]), Coeff::one())] }
    }

    /// Generator by name; panics if the name is unknown (builder use).
    pub fn var(&self, name: &str) -> Element {
        let idx = self.index_of(name).unwrap_or_else(|| panic!("unknown generator `{name}`"));
        self.gen(idx)
    }

    pub fn try_var(&self, name: &str) -> Result<Element> {
        self.index_of(name)
            .map(|i| self.gen(i))
            .ok_or_else(|| structural(format!("unknown generator `{name}`")))
    }

    pub fn term(&self, c: Coeff, mono: Monomial) -> Element {
        if c.is_zero() {
            return self.zero();
        }
        Element { alg: self.clone(), terms: vec![(mono, c)] }
    }

    fn mono_parity(&self, m: &Monomial) -> u8 {
        let mut p = 0u32;
        for &(g, e) in &m.0 {
            p += self.parity_of(g) as u32 * e;
        }
        (p % 2) as u8
    }

    fn mono_degree(&self, m: &Monomial) -> i32 {
        m.0.iter().map(|&(g, e)| self.generator(g).grade.degree * e as i32).sum()
    }

    fn mono_grade(&self, m: &Monomial) -> Grade {
        let mut deg = 0i32;
        let mut intr = 0u32;
        for &(g, e) in &m.0 {
            let gr = self.generator(g).grade;
            deg += gr.degree * e as i32;
            intr += gr.intrinsic as u32 * e;
        }
        Grade::new(deg, (intr % 2) as u8)
    }

    /// Product of two monomials with its Koszul sign, or `None` when an odd
    /// generator would appear twice.
    fn mono_mul(&self, a: &Monomial, b: &Monomial) -> Option<(Monomial, bool)> {
        if a.0.is_empty() {
            return Some((b.clone(), false));
        }
        if b.0.is_empty() {
            return Some((a.clone(), false));
        }
        let mut odd_left_in_a: u32 =
            a.0.iter().filter(|&&(g, _)| self.parity_of(g) == 1).count() as u32;
        let mut out = Vec::with_capacity(a.0.len() + b.0.len());
        let mut neg = false;
        let (mut i, mut j) = (0, 0);
        while i < a.0.len() || j < b.0.len() {
            let take_a = j >= b.0.len() || (i < a.0.len() && a.0[i].0 < b.0[j].0);
            if take_a {
                let (g, e) = a.0[i];
                if self.parity_of(g) == 1 {
                    odd_left_in_a -= 1;
                }
                out.push((g, e));
                i += 1;
            } else if i < a.0.len() && a.0[i].0 == b.0[j].0 {
                let g = a.0[i].0;
                if self.parity_of(g) == 1 {
                    return None;
                }
                out.push((g, a.0[i].1 + b.0[j].1));
                i += 1;
                j += 1;
            } else {
                let (g, e) = b.0[j];
                if self.parity_of(g) == 1 && odd_left_in_a % 2 == 1 {
                    neg = !neg;
                }
                out.push((g, e));
                j += 1;
            }
        }
        Some((Monomial(out), neg))
    }
}

impl fmt::Debug for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.0.gens.iter().map(|g| g.name.as_str()).collect();
        write!(f, "Algebra[{}]({})", self.0.field.name(), names.join(","))
    }
}

/// Sorted `(generator, exponent)` list. Odd generators have exponent 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(pub Vec<(u32, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponent(&self, g: u32) -> u32 {
        self.0.iter().find(|&&(h, _)| h == g).map_or(0, |&(_, e)| e)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }
}

/// A sparse element of a graded-commutative algebra.
#[derive(Clone)]
pub struct Element {
    alg: Algebra,
    terms: Vec<(Monomial, Coeff)>,
}

impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        self.alg.same_as(&other.alg) && self.terms == other.terms
    }
}

impl Eq for Element {}

fn collect_terms(map: HashMap<Monomial, Coeff>) -> Vec<(Monomial, Coeff)> {
    let mut terms: Vec<_> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    terms.sort_by(|a, b| a.0.cmp(&b.0));
    terms
}

fn accumulate(map: &mut HashMap<Monomial, Coeff>, m: Monomial, c: Coeff) {
    use std::collections::hash_map::Entry;
    match map.entry(m) {
        Entry::Occupied(mut o) => {
            let v = o.get_mut();
            *v += &c;
        }
        Entry::Vacant(v) => {
            v.insert(c);
        }
    }
}

impl Element {
    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn terms(&self) -> &[(Monomial, Coeff)] {
        &self.terms
    }

    pub fn from_terms(alg: &Algebra, terms: impl IntoIterator<Item = (Monomial, Coeff)>) -> Self {
        let mut map = HashMap::new();
        for (m, c) in terms {
            accumulate(&mut map, m, c);
        }
        Element { alg: alg.clone(), terms: collect_terms(map) }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant coefficient, if the element is a constant.
    pub fn as_constant(&self) -> Option<Coeff> {
        match self.terms.as_slice() {
            [] => Some(Coeff::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn constant_term(&self) -> Coeff {
        self.terms
            .iter()
            .find(|(m, _)| m.is_one())
            .map_or_else(Coeff::zero, |(_, c)| c.clone())
    }

    pub fn try_add(&self, rhs: &Element) -> Result<Element> {
        self.alg.check_same(&rhs.alg)?;
        Ok(self.add_unchecked(rhs, false))
    }

    fn add_unchecked(&self, rhs: &Element, negate_rhs: bool) -> Element {
        let mut out = Vec::with_capacity(self.terms.len() + rhs.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < rhs.terms.len() {
            if j >= rhs.terms.len()
                || (i < self.terms.len() && self.terms[i].0 < rhs.terms[j].0)
            {
                out.push(self.terms[i].clone());
                i += 1;
            } else if i >= self.terms.len() || rhs.terms[j].0 < self.terms[i].0 {
                let (m, c) = &rhs.terms[j];
                out.push((m.clone(), if negate_rhs { -c } else { c.clone() }));
                j += 1;
            } else {
                let c = if negate_rhs {
                    &self.terms[i].1 - &rhs.terms[j].1
                } else {
                    &self.terms[i].1 + &rhs.terms[j].1
                };
                if !c.is_zero() {
                    out.push((self.terms[i].0.clone(), c));
                }
                i += 1;
                j += 1;
            }
        }
        Element { alg: self.alg.clone(), terms: out }
    }

    pub fn try_mul(&self, rhs: &Element) -> Result<Element> {
        self.alg.check_same(&rhs.alg)?;
        Ok(self.mul_unchecked(rhs))
    }

    fn mul_unchecked(&self, rhs: &Element) -> Element {
        if self.is_zero() || rhs.is_zero() {
            return self.alg.zero();
        }
        let mut map: HashMap<Monomial, Coeff> =
            HashMap::with_capacity(self.terms.len() * rhs.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                if let Some((m, neg)) = self.alg.mono_mul(ma, mb) {
                    let c = ca * cb;
                    accumulate(&mut map, m, if neg { -&c } else { c });
                }
            }
        }
        Element { alg: self.alg.clone(), terms: collect_terms(map) }
    }

    /// `self * (c * mono)`.
    pub fn mul_term(&self, c: &Coeff, mono: &Monomial) -> Element {
        let mut map = HashMap::with_capacity(self.terms.len());
        for (ma, ca) in &self.terms {
            if let Some((m, neg)) = self.alg.mono_mul(ma, mono) {
                let v = ca * c;
                accumulate(&mut map, m, if neg { -&v } else { v });
            }
        }
        Element { alg: self.alg.clone(), terms: collect_terms(map) }
    }

    pub fn scale(&self, c: &Coeff) -> Element {
        if c.is_zero() {
            return self.alg.zero();
        }
        Element {
            alg: self.alg.clone(),
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    pub fn scale_rat(&self, n: i64, d: i64) -> Element {
        self.scale(&Coeff::rat(n, d))
    }

    pub fn pow(&self, k: u32) -> Element {
        let mut acc = self.alg.one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Parity of a homogeneous element; `None` for zero or mixed parity.
    pub fn parity(&self) -> Option<u8> {
        let mut it = self.terms.iter().map(|(m, _)| self.alg.mono_parity(m));
        let first = it.next()?;
        if it.all(|p| p == first) {
            Some(first)
        } else {
            None
        }
    }

    /// Grade of a homogeneous element; `None` for zero or inhomogeneous.
    pub fn grade(&self) -> Option<Grade> {
        let mut it = self.terms.iter().map(|(m, _)| self.alg.mono_grade(m));
        let first = it.next()?;
        if it.all(|g| g == first) {
            Some(first)
        } else {
            None
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.grade().is_some()
    }

    /// Splits into even and odd total-parity components.
    pub fn parity_parts(&self) -> [Element; 2] {
        let mut parts = [Vec::new(), Vec::new()];
        for (m, c) in &self.terms {
            parts[self.alg.mono_parity(m) as usize].push((m.clone(), c.clone()));
        }
        let [e, o] = parts;
        [
            Element { alg: self.alg.clone(), terms: e },
            Element { alg: self.alg.clone(), terms: o },
        ]
    }

    /// Component of cohomological degree `d`.
    pub fn degree_part(&self, d: i32) -> Element {
        self.filter(|m| self.alg.mono_degree(m) == d)
    }

    /// Homogeneous components keyed by grade.
    pub fn homogeneous_components(&self) -> BTreeMap<Grade, Element> {
        let mut out: BTreeMap<Grade, Vec<(Monomial, Coeff)>> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(self.alg.mono_grade(m)).or_default().push((m.clone(), c.clone()));
        }
        out.into_iter()
            .map(|(g, terms)| (g, Element { alg: self.alg.clone(), terms }))
            .collect()
    }

    pub fn filter(&self, keep: impl Fn(&Monomial) -> bool) -> Element {
        Element {
            alg: self.alg.clone(),
            terms: self.terms.iter().filter(|(m, _)| keep(m)).cloned().collect(),
        }
    }

    /// Generators that occur in some monomial.
    pub fn support(&self) -> Vec<u32> {
        let mut s: Vec<u32> =
            self.terms.iter().flat_map(|(m, _)| m.0.iter().map(|&(g, _)| g)).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Graded left partial derivative with respect to generator `g`.
    pub fn left_derivative(&self, g: u32) -> Element {
        let mut map = HashMap::new();
        for (m, c) in &self.terms {
            if let Some((m2, k, neg)) = self.alg.mono_left_derivative(m, g) {
                let v = &Coeff::int(k as i64) * c;
                accumulate(&mut map, m2, if neg { -&v } else { v });
            }
        }
        Element { alg: self.alg.clone(), terms: collect_terms(map) }
    }

    /// Applies the derivation whose value on generator `g` is `image(g)`
    /// (absent means zero): `D(a) = sum_g D(g) * (d/dg)_left a`.
    pub fn derive_by<F>(&self, image: F) -> Element
    where
        F: Fn(u32) -> Option<Element>,
    {
        let mut cache: HashMap<u32, Option<Element>> = HashMap::new();
        let mut map: HashMap<Monomial, Coeff> = HashMap::new();
        for (m, c) in &self.terms {
            for &(g, _) in &m.0 {
                let img = cache.entry(g).or_insert_with(|| image(g).filter(|e| !e.is_zero()));
                let Some(img) = img else { continue };
                let Some((m2, k, neg)) = self.alg.mono_left_derivative(m, g) else { continue };
                let mut factor = &Coeff::int(k as i64) * c;
                if neg {
                    factor = -&factor;
                }
                for (mi, ci) in &img.terms {
                    if let Some((mm, neg2)) = self.alg.mono_mul(mi, &m2) {
                        let v = ci * &factor;
                        accumulate(&mut map, mm, if neg2 { -&v } else { v });
                    }
                }
            }
        }
        Element { alg: self.alg.clone(), terms: collect_terms(map) }
    }

    /// Ring homomorphism sending generator `g` to `image(g)` (absent means
    /// `g` itself). Images must live in `target` and should carry the parity
    /// of the generator they replace.
    pub fn substitute<F>(&self, target: &Algebra, image: F) -> Element
    where
        F: Fn(u32) -> Option<Element>,
    {
        let mut cache: HashMap<u32, Element> = HashMap::new();
        let mut acc = target.zero();
        for (m, c) in &self.terms {
            let mut prod = target.constant(c.clone());
            for &(g, e) in &m.0 {
                let img = cache
                    .entry(g)
                    .or_insert_with(|| {
                        image(g).unwrap_or_else(|| {
                            let name = &self.alg.generator(g).name;
                            target.var(name)
                        })
                    })
                    .clone();
                for _ in 0..e {
                    prod = &prod * &img;
                    if prod.is_zero() {
                        break;
                    }
                }
                if prod.is_zero() {
                    break;
                }
            }
            acc = &acc + &prod;
        }
        acc
    }

    /// Re-expresses `self` in `target`, whose generators extend this algebra's.
    pub fn embed(&self, target: &Algebra) -> Result<Element> {
        if self.alg.same_as(target) {
            return Ok(self.clone());
        }
        if !self.alg.is_prefix_of(target) {
            return Err(structural(format!(
                "cannot embed {:?} into {:?}: not a generator prefix",
                self.alg, target
            )));
        }
        Ok(Element { alg: target.clone(), terms: self.terms.clone() })
    }

    /// Reinterprets an element of a larger algebra in a prefix algebra; fails
    /// if a generator outside the prefix occurs.
    pub fn restrict(&self, target: &Algebra) -> Result<Element> {
        if self.alg.same_as(target) {
            return Ok(self.clone());
        }
        if !target.is_prefix_of(&self.alg) {
            return Err(structural("target is not a generator prefix"));
        }
        let n = target.len() as u32;
        if self.terms.iter().any(|(m, _)| m.0.iter().any(|&(g, _)| g >= n)) {
            return Err(structural("element uses generators outside the target algebra"));
        }
        Ok(Element { alg: target.clone(), terms: self.terms.clone() })
    }

    /// Substitutes exact values for the even generators named in `point`;
    /// every even generator that occurs must be assigned.
    pub fn evaluate_at(&self, point: &BTreeMap<String, Coeff>) -> Result<Element> {
        let mut vals: HashMap<u32, Coeff> = HashMap::new();
        for (name, v) in point {
            let g = self
                .alg
                .index_of(name)
                .ok_or_else(|| structural(format!("unknown generator `{name}`")))?;
            if self.alg.parity_of(g) == 1 {
                return Err(structural(format!("cannot evaluate odd generator `{name}`")));
            }
            vals.insert(g, v.clone());
        }
        let mut map = HashMap::new();
        for (m, c) in &self.terms {
            let mut coef = c.clone();
            let mut rest = Vec::new();
            for &(g, e) in &m.0 {
                if self.alg.parity_of(g) == 1 {
                    rest.push((g, e));
                    continue;
                }
                let v = vals.get(&g).ok_or_else(|| {
                    structural(format!(
                        "point does not assign even generator `{}`",
                        self.alg.generator(g).name
                    ))
                })?;
                for _ in 0..e {
                    coef = &coef * v;
                }
            }
            accumulate(&mut map, Monomial(rest), coef);
        }
        Ok(Element { alg: self.alg.clone(), terms: collect_terms(map) })
    }

    /// Substitutes values for the listed even generators only.
    pub fn partial_evaluate(&self, vals: &HashMap<u32, Coeff>) -> Element {
        let mut map = HashMap::new();
        for (m, c) in &self.terms {
            let mut coef = c.clone();
            let mut rest = Vec::with_capacity(m.0.len());
            for &(g, e) in &m.0 {
                match vals.get(&g) {
                    Some(v) if self.alg.parity_of(g) == 0 => {
                        for _ in 0..e {
                            coef = &coef * v;
                        }
                    }
                    _ => rest.push((g, e)),
                }
            }
            accumulate(&mut map, Monomial(rest), coef);
        }
        Element { alg: self.alg.clone(), terms: collect_terms(map) }
    }

    /// Writes `self = sum_J c_J * m_J` where `m_J` ranges over monomials in
    /// the generators `split` (placed on the right) and `c_J` is free of them.
    pub fn split_right(&self, split: &[u32]) -> BTreeMap<Monomial, Element> {
        let mut out: BTreeMap<Monomial, HashMap<Monomial, Coeff>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (right, left): (Vec<_>, Vec<_>) =
                m.0.iter().partition(|(g, _)| split.binary_search(g).is_ok());
            let right = Monomial(right);
            let left = Monomial(left);
            // m == left * right up to the sign of this reordering
            let (prod, neg) = self.alg.mono_mul(&left, &right).expect("disjoint supports");
            debug_assert_eq!(prod, *m);
            let v = if neg { -c } else { c.clone() };
            accumulate(out.entry(right).or_default(), left, v);
        }
        out.into_iter()
            .map(|(k, v)| (k, Element { alg: self.alg.clone(), terms: collect_terms(v) }))
            .filter(|(_, e)| !e.is_zero())
            .collect()
    }

    /// Canonical textual rendering: terms in stored order, even generators
    /// before odd ones inside each monomial, explicit signs.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let (neg, c) = split_sign(c);
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            if !c.is_one() || m.is_one() {
                factors.push(c.to_string());
            }
            for odd in [0u8, 1] {
                for &(g, e) in &m.0 {
                    if self.alg.parity_of(g) != odd {
                        continue;
                    }
                    let name = &self.alg.generator(g).name;
                    if e == 1 {
                        factors.push(name.clone());
                    } else {
                        factors.push(format!("{name}^{e}"));
                    }
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }

    /// Number of factors of the generators in `set` in each monomial is
    /// summed; returns the terms whose count is exactly `k`.
    pub fn weight_part(&self, set: &[u32], k: u32) -> Element {
        self.filter(|m| {
            m.0.iter().filter(|(g, _)| set.binary_search(g).is_ok()).map(|&(_, e)| e).sum::<u32>()
                == k
        })
    }
}

impl Algebra {
    /// `(d/dg)_left m` as `(monomial, multiplicity, negative)`.
    fn mono_left_derivative(&self, m: &Monomial, g: u32) -> Option<(Monomial, u32, bool)> {
        let pos = m.0.iter().position(|&(h, _)| h == g)?;
        let e = m.0[pos].1;
        let mut rest = m.0.clone();
        let neg = if self.parity_of(g) == 1 {
            let before = m.0[..pos].iter().filter(|&&(h, _)| self.parity_of(h) == 1).count();
            before % 2 == 1
        } else {
            false
        };
        if e == 1 {
            rest.remove(pos);
        } else {
            rest[pos].1 -= 1;
        }
        Some((Monomial(rest), e, neg))
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

// Operator forms panic on mismatched algebras; the `try_*` methods report
// the mismatch instead.
impl Add for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        self.try_add(rhs).expect("add")
    }
}

impl Sub for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        self.alg.check_same(&rhs.alg).expect("sub");
        self.add_unchecked(rhs, true)
    }
}

impl Mul for &Element {
    type Output = Element;
    fn mul(self, rhs: &Element) -> Element {
        self.try_mul(rhs).expect("mul")
    }
}

impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        Element {
            alg: self.alg.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for Element {
            type Output = Element;
            fn $f(self, rhs: Element) -> Element {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&Element> for Element {
            type Output = Element;
            fn $f(self, rhs: &Element) -> Element {
                (&self).$f(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Element {
    type Output = Element;
    fn neg(self) -> Element {
        -&self
    }
}

/// Sum of a sequence of elements of `alg`.
pub fn sum<'a>(alg: &Algebra, items: impl IntoIterator<Item = &'a Element>) -> Element {
    let mut map = HashMap::new();
    for e in items {
        for (m, c) in &e.terms {
            accumulate(&mut map, m.clone(), c.clone());
        }
    }
    Element { alg: alg.clone(), terms: collect_terms(map) }
}

/// Sum of owned elements.
pub fn sum_owned(alg: &Algebra, items: impl IntoIterator<Item = Element>) -> Element {
    let mut map = HashMap::new();
    for e in items {
        for (m, c) in e.terms {
            accumulate(&mut map, m, c);
        }
    }
    Element { alg: alg.clone(), terms: collect_terms(map) }
}

/// `(-1)^(p*q)` as a coefficient sign.
pub fn koszul(p: u8, q: u8) -> i64 {
    if p & q & 1 == 1 {
        -1
    } else {
        1
    }
}

/// Anything that acts on an algebra as a derivation through its values on
/// generators. Lets large jet algebras define derivations lazily.
pub trait DerivationLike: Send + Sync {
    fn algebra(&self) -> &Algebra;
    fn image(&self, g: u32) -> Option<Element>;

    fn apply_to(&self, a: &Element) -> Element {
        a.derive_by(|g| self.image(g))
    }
}

impl DerivationLike for Derivation {
    fn algebra(&self) -> &Algebra {
        &self.alg
    }

    fn image(&self, g: u32) -> Option<Element> {
        self.images.get(&g).cloned()
    }
}

/// A derivation given by its values on generators (absent means zero).
#[derive(Clone, Debug)]
pub struct Derivation {
    alg: Algebra,
    images: BTreeMap<u32, Element>,
}

impl Derivation {
    pub fn zero(alg: &Algebra) -> Self {
        Derivation { alg: alg.clone(), images: BTreeMap::new() }
    }

    pub fn new(alg: &Algebra, images: impl IntoIterator<Item = (u32, Element)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (g, e) in images {
            if g as usize >= alg.len() {
                return Err(structural(format!("generator index {g} out of range")));
            }
            alg.check_same(e.algebra())?;
            if !e.is_zero() {
                map.insert(g, e);
            }
        }
        Ok(Derivation { alg: alg.clone(), images: map })
    }

    /// Builder by generator names.
    pub fn from_names(alg: &Algebra, images: &[(&str, Element)]) -> Result<Self> {
        let mut v = Vec::new();
        for (n, e) in images {
            let g = alg
                .index_of(n)
                .ok_or_else(|| structural(format!("unknown generator `{n}`")))?;
            v.push((g, e.clone()));
        }
        Derivation::new(alg, v)
    }

    /// Partial derivative with respect to generator `g`.
    pub fn partial(alg: &Algebra, g: u32) -> Self {
        Derivation { alg: alg.clone(), images: [(g, alg.one())].into_iter().collect() }
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn image(&self, g: u32) -> Option<&Element> {
        self.images.get(&g)
    }

    pub fn images(&self) -> &BTreeMap<u32, Element> {
        &self.images
    }

    pub fn is_zero(&self) -> bool {
        self.images.is_empty()
    }

    pub fn apply(&self, a: &Element) -> Result<Element> {
        self.alg.check_same(a.algebra())?;
        Ok(a.derive_by(|g| self.images.get(&g).cloned()))
    }

    /// Applies without the algebra check (internal hot paths).
    pub(crate) fn apply_unchecked(&self, a: &Element) -> Element {
        a.derive_by(|g| self.images.get(&g).cloned())
    }

    /// Parity of the derivation, read off from its images; `None` if zero
    /// or inconsistent.
    pub fn parity(&self) -> Option<u8> {
        let mut out = None;
        for (&g, e) in &self.images {
            let p = (e.parity()? + self.alg.parity_of(g)) % 2;
            match out {
                None => out = Some(p),
                Some(q) if q != p => return None,
                _ => {}
            }
        }
        out
    }

    /// Grade shift of the derivation; `None` if zero or inhomogeneous.
    pub fn grade(&self) -> Option<Grade> {
        let mut out = None;
        for (&g, e) in &self.images {
            let gr = e.grade()? - self.alg.generator(g).grade;
            match out {
                None => out = Some(gr),
                Some(h) if h != gr => return None,
                _ => {}
            }
        }
        out
    }

    pub fn scale_by(&self, f: &Element) -> Derivation {
        Derivation {
            alg: self.alg.clone(),
            images: self
                .images
                .iter()
                .map(|(g, e)| (*g, f * e))
                .filter(|(_, e)| !e.is_zero())
                .collect(),
        }
    }

    pub fn add(&self, other: &Derivation) -> Derivation {
        let mut images = self.images.clone();
        for (g, e) in &other.images {
            let v = match images.remove(g) {
                Some(x) => &x + e,
                None => e.clone(),
            };
            if !v.is_zero() {
                images.insert(*g, v);
            }
        }
        Derivation { alg: self.alg.clone(), images }
    }

    pub fn neg(&self) -> Derivation {
        Derivation {
            alg: self.alg.clone(),
            images: self.images.iter().map(|(g, e)| (*g, -e)).collect(),
        }
    }

    /// Graded commutator `[self, other] = self∘other - (-1)^{|self||other|} other∘self`,
    /// with the parities supplied by the caller (zero derivations have none).
    pub fn commutator(&self, other: &Derivation, p: u8, q: u8) -> Derivation {
        let s = koszul(p, q);
        let mut gens: Vec<u32> = self.images.keys().chain(other.images.keys()).copied().collect();
        gens.sort_unstable();
        gens.dedup();
        let mut images = BTreeMap::new();
        for g in gens {
            let a = other.images.get(&g).map(|e| self.apply_unchecked(e));
            let b = self.images.get(&g).map(|e| other.apply_unchecked(e));
            let mut v = a.unwrap_or_else(|| self.alg.zero());
            if let Some(b) = b {
                v = if s == 1 { &v - &b } else { &v + &b };
            }
            if !v.is_zero() {
                images.insert(g, v);
            }
        }
        Derivation { alg: self.alg.clone(), images }
    }

    /// Re-expresses the images in a larger algebra (same generator prefix).
    pub fn embed(&self, target: &Algebra) -> Result<Derivation> {
        let mut images = BTreeMap::new();
        for (g, e) in &self.images {
            images.insert(*g, e.embed(target)?);
        }
        Ok(Derivation { alg: target.clone(), images })
    }

    pub fn render(&self) -> String {
        if self.images.is_empty() {
            return "0".into();
        }
        self.images
            .iter()
            .map(|(g, e)| format!("{} -> {}", self.alg.generator(*g).name, e.render()))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

impl PartialEq for Derivation {
    fn eq(&self, other: &Self) -> bool {
        self.alg.same_as(&other.alg) && self.images == other.images
    }
}

/// Constructs a rational number coefficient element; shorthand for builders.
pub fn q(n: i64, d: i64) -> Coeff {
    Coeff::from(Q::new(n, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alg() -> Algebra {
        Algebra::new(
            CoefficientField::Rationals,
            vec![
                Generator::new("x", Grade::even(0)),
                Generator::new("t1", Grade::even(1)),
                Generator::new("t2", Grade::new(0, 1)),
                Generator::new("y", Grade::even(2)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn odd_generators_anticommute() {
        let a = alg();
        let (t1, t2) = (a.var("t1"), a.var("t2"));
        assert_eq!(&t1 * &t2, -(&t2 * &t1));
        assert!((&t1 * &t1).is_zero());
        assert_eq!((&t1 * &t2).render(), "t1*t2");
        assert_eq!((&t2 * &t1).render(), "-t1*t2");
    }

    #[test]
    fn bilinear_expansion_with_odd_square() {
        let a = alg();
        let (x, t) = (a.var("x"), a.var("t1"));
        let p = &(&x + &t) * &(&x - &t);
        assert_eq!(p, &x * &x);
    }

    #[test]
    fn left_derivative_sign() {
        let a = alg();
        let m = &a.var("t1") * &a.var("t2");
        assert_eq!(m.left_derivative(a.index_of("t2").unwrap()), -a.var("t1"));
        assert_eq!(m.left_derivative(a.index_of("t1").unwrap()), a.var("t2"));
    }

    #[test]
    fn mismatched_algebras_rejected() {
        let a = alg();
        let b = Algebra::new(CoefficientField::Rationals, vec![Generator::new("x", Grade::ZERO)])
            .unwrap();
        assert!(a.var("x").try_mul(&b.var("x")).is_err());
        assert!(a.var("x").try_add(&b.var("x")).is_err());
    }

    #[test]
    fn evaluation_requires_all_even_generators() {
        let a = alg();
        let e = &a.var("x") * &a.var("y");
        let mut pt = BTreeMap::new();
        pt.insert("x".to_string(), Coeff::int(2));
        assert!(e.evaluate_at(&pt).is_err());
        pt.insert("y".to_string(), Coeff::int(3));
        assert_eq!(e.evaluate_at(&pt).unwrap(), a.int(6));
    }

    #[test]
    fn split_right_recovers_element() {
        let a = alg();
        let (x, t1, t2) = (a.var("x"), a.var("t1"), a.var("t2"));
        let e = &(&t1 * &t2) * &x + t2.clone();
        let parts = e.split_right(&[a.index_of("t1").unwrap()]);
        let mut back = a.zero();
        for (m, c) in parts {
            back = &back + &c.mul_term(&Coeff::one(), &m);
        }
        assert_eq!(back, e);
    }
}
