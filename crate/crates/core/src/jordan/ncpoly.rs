//! Polynomials in noncommuting generators `h_1, ..., h_q` with exact rational
//! coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::numeric::scalar::{Field, Rational};
use crate::numeric::Mat;

/// A monomial: generator indices (1-based) read left to right.
///
/// Ordered by length, then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<usize>);

impl Word {
    /// Total weight, with `h_i` of weight `i`.
    pub fn weight(&self) -> usize {
        self.0.iter().sum()
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct NCPolynomial {
    generators: usize,
    terms: BTreeMap<Word, Rational>,
}

impl NCPolynomial {
    pub fn zero(generators: usize) -> Self {
        NCPolynomial { generators, terms: BTreeMap::new() }
    }

    /// The single generator `h_i`.
    pub fn generator(generators: usize, i: usize) -> Self {
        assert!(i >= 1 && i <= generators, "generator index out of range");
        let mut terms = BTreeMap::new();
        terms.insert(Word(vec![i]), Rational::one());
        NCPolynomial { generators, terms }
    }

    pub fn from_terms(generators: usize, terms: impl IntoIterator<Item = (Vec<usize>, Rational)>) -> Self {
        let mut out = Self::zero(generators);
        for (w, c) in terms {
            out.add_term(Word(w), c);
        }
        out
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, word: &[usize]) -> Rational {
        self.terms.get(&Word(word.to_vec())).cloned().unwrap_or_else(Rational::zero)
    }

    fn add_term(&mut self, w: Word, c: Rational) {
        let entry = self.terms.entry(w.clone()).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&w);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.generators = out.generators.max(other.generators);
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Rational) -> Self {
        if s.is_zero() {
            return Self::zero(self.generators);
        }
        NCPolynomial {
            generators: self.generators,
            terms: self.terms.iter().map(|(w, c)| (w.clone(), c * s)).collect(),
        }
    }

    /// Product by word concatenation.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.generators.max(other.generators));
        for (wa, ca) in &self.terms {
            for (wb, cb) in &other.terms {
                let mut w = wa.0.clone();
                w.extend_from_slice(&wb.0);
                out.add_term(Word(w), ca * cb);
            }
        }
        out
    }

    /// The common weight of all terms, if there is one.
    pub fn homogeneous_weight(&self) -> Option<usize> {
        let mut weights = self.terms.keys().map(Word::weight);
        let first = weights.next()?;
        weights.all(|w| w == first).then_some(first)
    }

    /// Substitutes `h_i ↦ mats[i-1]`; all matrices must be `r × r`.
    pub fn evaluate<T: Field>(&self, mats: &[Mat<T>]) -> Mat<T> {
        let r = mats.first().map(|m| m.rows()).unwrap_or(1);
        let mut out = Mat::zeros(r, r);
        for (w, c) in &self.terms {
            let mut prod = Mat::identity(r);
            for &i in &w.0 {
                prod = &prod * &mats[i - 1];
            }
            out = &out + &prod.scale(&T::from_rational(c));
        }
        out
    }

    pub fn to_text(&self) -> String {
        self.render(&TextStyle)
    }

    pub fn to_latex(&self) -> String {
        self.render(&LatexStyle)
    }

    fn render(&self, style: &dyn Style) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        // consecutive terms sharing a coefficient are printed as one group
        let mut groups: Vec<(Rational, Vec<&Word>)> = Vec::new();
        for (w, c) in &self.terms {
            match groups.last_mut() {
                Some((gc, ws)) if gc == c => ws.push(w),
                _ => groups.push((c.clone(), vec![w])),
            }
        }
        let mut out = String::new();
        for (idx, (c, words)) in groups.iter().enumerate() {
            let negative = c.is_negative();
            let mag = c.abs();
            if idx == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(style.sign(negative));
            }
            let body: Vec<String> = words.iter().map(|w| style.word(w)).collect();
            let body = if body.len() > 1 { format!("({})", body.join(style.plus())) } else { body[0].clone() };
            if mag.is_one() {
                out.push_str(&body);
            } else {
                out.push_str(&style.coefficient(&mag));
                out.push_str(&body);
            }
        }
        out
    }
}

trait Style {
    fn sign(&self, negative: bool) -> &'static str;
    fn plus(&self) -> &'static str;
    fn word(&self, w: &Word) -> String;
    fn coefficient(&self, c: &Rational) -> String;
}

fn runs(w: &Word) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for &g in &w.0 {
        match out.last_mut() {
            Some((last, n)) if *last == g => *n += 1,
            _ => out.push((g, 1)),
        }
    }
    out
}

struct TextStyle;

impl Style for TextStyle {
    fn sign(&self, negative: bool) -> &'static str {
        if negative {
            " - "
        } else {
            " + "
        }
    }
    fn plus(&self) -> &'static str {
        " + "
    }
    fn word(&self, w: &Word) -> String {
        if w.0.is_empty() {
            return "1".into();
        }
        runs(w)
            .iter()
            .map(|&(g, n)| if n == 1 { format!("h{g}") } else { format!("h{g}^{n}") })
            .collect::<Vec<_>>()
            .join(" ")
    }
    fn coefficient(&self, c: &Rational) -> String {
        format!("{c} ")
    }
}

struct LatexStyle;

impl Style for LatexStyle {
    fn sign(&self, negative: bool) -> &'static str {
        if negative {
            "-"
        } else {
            "+"
        }
    }
    fn plus(&self) -> &'static str {
        "+"
    }
    fn word(&self, w: &Word) -> String {
        if w.0.is_empty() {
            return "1".into();
        }
        runs(w)
            .iter()
            .map(|&(g, n)| if n == 1 { format!("h_{{{g}}}") } else { format!("h_{{{g}}}^{{{n}}}") })
            .collect()
    }
    fn coefficient(&self, c: &Rational) -> String {
        if c.is_integer() {
            c.to_string()
        } else {
            format!("\\frac{{{}}}{{{}}}", c.numer(), c.denom())
        }
    }
}

impl fmt::Display for NCPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn shortlex_order() {
        let mut words = vec![Word(vec![2, 1]), Word(vec![3]), Word(vec![1, 1, 1]), Word(vec![1, 2])];
        words.sort();
        assert_eq!(words, vec![Word(vec![3]), Word(vec![1, 2]), Word(vec![2, 1]), Word(vec![1, 1, 1])]);
    }

    #[test]
    fn cancellation_removes_terms() {
        let a = NCPolynomial::generator(2, 1);
        let b = a.scale(&q(-1, 1));
        assert!(a.add(&b).is_zero());
    }

    #[test]
    fn multiplication_is_noncommutative() {
        let h1 = NCPolynomial::generator(2, 1);
        let h2 = NCPolynomial::generator(2, 2);
        let ab = h1.mul(&h2);
        let ba = h2.mul(&h1);
        assert_ne!(ab, ba);
        assert_eq!(ab.coefficient(&[1, 2]), q(1, 1));
        assert_eq!(ab.homogeneous_weight(), Some(3));
    }

    #[test]
    fn rendering() {
        let p = NCPolynomial::from_terms(2, vec![(vec![2], q(1, 1)), (vec![1, 1], q(-1, 2))]);
        assert_eq!(p.to_text(), "h2 - 1/2 h1^2");
        assert_eq!(p.to_latex(), "h_{2}-\\frac{1}{2}h_{1}^{2}");
        assert_eq!(NCPolynomial::zero(1).to_text(), "0");
    }

    #[test]
    fn evaluation_respects_order() {
        use crate::numeric::CMatrix;
        use crate::numeric::Cplx;
        let a = CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let b = CMatrix::from_real(2, 2, &[0.0, 0.0, 1.0, 0.0]);
        let p = NCPolynomial::from_terms(2, vec![(vec![1, 2], q(1, 1))]);
        let v = p.evaluate(&[a.clone(), b.clone()]);
        assert_eq!(v, &a * &b);
        assert_eq!(*v.get(0, 0), Cplx::new(1.0, 0.0));
    }
}
