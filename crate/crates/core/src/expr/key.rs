use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::Symbol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TrigKind {
    Sin,
    Cos,
}

/// `sin(freq * x)` or `cos(freq * x)` with `freq > 0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Trig {
    pub kind: TrigKind,
    pub freq: BigRational,
}

/// The coordinate-dependent part of a term: monomial, exponentials and trig factors,
/// each keyed by a zero-based coordinate index.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Basis {
    pub(crate) mono: BTreeMap<usize, u32>,
    pub(crate) exp: BTreeMap<usize, BigRational>,
    pub(crate) trig: BTreeMap<usize, Trig>,
}

impl Basis {
    pub fn one() -> Self {
        Basis::default()
    }

    pub fn coordinate(i: usize) -> Self {
        let mut b = Basis::default();
        b.mono.insert(i, 1);
        b
    }

    pub fn is_one(&self) -> bool {
        self.mono.is_empty() && self.exp.is_empty() && self.trig.is_empty()
    }

    /// Exponential factors only: invertible in the ring.
    pub fn is_unit(&self) -> bool {
        self.mono.is_empty() && self.trig.is_empty()
    }

    pub fn monomial(&self) -> &BTreeMap<usize, u32> {
        &self.mono
    }

    pub fn exponentials(&self) -> &BTreeMap<usize, BigRational> {
        &self.exp
    }

    pub fn trigs(&self) -> &BTreeMap<usize, Trig> {
        &self.trig
    }

    /// The single coordinate `i` if this basis function is exactly `x_i`.
    pub fn as_linear_coordinate(&self) -> Option<usize> {
        if self.exp.is_empty() && self.trig.is_empty() && self.mono.len() == 1 {
            let (&i, &e) = self.mono.iter().next()?;
            if e == 1 {
                return Some(i);
            }
        }
        None
    }

    pub fn coordinates(&self) -> impl Iterator<Item = usize> + '_ {
        self.mono.keys().chain(self.exp.keys()).chain(self.trig.keys()).copied()
    }

    pub(crate) fn inverse_unit(&self) -> Option<Basis> {
        if !self.is_unit() {
            return None;
        }
        let exp = self.exp.iter().map(|(&i, l)| (i, -l.clone())).collect();
        Some(Basis { exp, ..Basis::default() })
    }
}

/// Laurent monomial in parameter symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamMonomial(pub(crate) BTreeMap<Symbol, i32>);

impl ParamMonomial {
    pub fn one() -> Self {
        ParamMonomial::default()
    }

    pub fn symbol(s: Symbol) -> Self {
        let mut m = BTreeMap::new();
        m.insert(s, 1);
        ParamMonomial(m)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponents(&self) -> &BTreeMap<Symbol, i32> {
        &self.0
    }

    pub fn degree_in(&self, s: &Symbol) -> i32 {
        self.0.get(s).copied().unwrap_or(0)
    }

    pub(crate) fn mul(&self, other: &ParamMonomial) -> ParamMonomial {
        let mut out = self.0.clone();
        for (s, &e) in &other.0 {
            let entry = out.entry(s.clone()).or_insert(0);
            *entry += e;
            if *entry == 0 {
                out.remove(s);
            }
        }
        ParamMonomial(out)
    }

    pub(crate) fn inverse(&self) -> ParamMonomial {
        ParamMonomial(self.0.iter().map(|(s, &e)| (s.clone(), -e)).collect())
    }

    pub(crate) fn without(&self, s: &Symbol) -> ParamMonomial {
        let mut out = self.0.clone();
        out.remove(s);
        ParamMonomial(out)
    }
}

/// Canonical term key. Terms are ordered by basis function first so rendering
/// groups them by coordinate dependence.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Key {
    pub basis: Basis,
    pub params: ParamMonomial,
}

impl Key {
    pub fn one() -> Self {
        Key::default()
    }

    pub fn is_unit(&self) -> bool {
        self.basis.is_unit()
    }
}

fn merge_add<K: Ord + Clone, V: Clone>(
    a: &BTreeMap<K, V>,
    b: &BTreeMap<K, V>,
    add: impl Fn(&V, &V) -> V,
    is_zero: impl Fn(&V) -> bool,
) -> BTreeMap<K, V> {
    let mut out = a.clone();
    for (k, v) in b {
        match out.get_mut(k) {
            Some(existing) => {
                let s = add(existing, v);
                if is_zero(&s) {
                    out.remove(k);
                } else {
                    *existing = s;
                }
            }
            None => {
                out.insert(k.clone(), v.clone());
            }
        }
    }
    out
}

/// Normalizes `kind(freq * x)` to a positive frequency.
/// Returns `None` for an identically-zero factor and `Some((sign, None))` for `cos 0 = 1`.
pub(crate) fn normalize_trig(kind: TrigKind, freq: BigRational) -> Option<(i32, Option<Trig>)> {
    if freq.is_zero() {
        return match kind {
            TrigKind::Sin => None,
            TrigKind::Cos => Some((1, None)),
        };
    }
    if freq.is_negative() {
        let sign = if kind == TrigKind::Sin { -1 } else { 1 };
        Some((sign, Some(Trig { kind, freq: -freq })))
    } else {
        Some((1, Some(Trig { kind, freq })))
    }
}

/// Product-to-sum expansion of two trig factors in the same coordinate.
fn trig_product(a: &Trig, b: &Trig) -> Vec<(BigRational, Option<Trig>)> {
    use TrigKind::*;
    let half = BigRational::new(1.into(), 2.into());
    let diff = &a.freq - &b.freq;
    let sum = &a.freq + &b.freq;
    let parts: [(BigRational, TrigKind, BigRational); 2] = match (a.kind, b.kind) {
        (Sin, Sin) => [(half.clone(), Cos, diff), (-half, Cos, sum)],
        (Cos, Cos) => [(half.clone(), Cos, diff), (half, Cos, sum)],
        (Sin, Cos) => [(half.clone(), Sin, sum), (half, Sin, diff)],
        (Cos, Sin) => [(half.clone(), Sin, sum), (-half, Sin, diff)],
    };
    let mut out = Vec::with_capacity(2);
    for (c, kind, freq) in parts {
        if let Some((sign, trig)) = normalize_trig(kind, freq) {
            let c = if sign < 0 { -c } else { c };
            out.push((c, trig));
        }
    }
    out
}

/// Multiplies two keys, returning a linear combination of keys.
pub(crate) fn mul_keys(a: &Key, b: &Key) -> Vec<(BigRational, Key)> {
    let params = a.params.mul(&b.params);
    let mono = merge_add(&a.basis.mono, &b.basis.mono, |x, y| x + y, |v| *v == 0);
    let exp = merge_add(&a.basis.exp, &b.basis.exp, |x, y| x + y, |v| v.is_zero());

    let mut combos: Vec<(BigRational, BTreeMap<usize, Trig>)> =
        vec![(BigRational::one(), BTreeMap::new())];
    let mut coords: Vec<usize> = a.basis.trig.keys().chain(b.basis.trig.keys()).copied().collect();
    coords.sort_unstable();
    coords.dedup();
    for c in coords {
        let options: Vec<(BigRational, Option<Trig>)> = match (a.basis.trig.get(&c), b.basis.trig.get(&c)) {
            (Some(x), Some(y)) => trig_product(x, y),
            (Some(x), None) | (None, Some(x)) => vec![(BigRational::one(), Some(x.clone()))],
            (None, None) => unreachable!(),
        };
        let mut next = Vec::with_capacity(combos.len() * options.len());
        for (coef, map) in &combos {
            for (oc, trig) in &options {
                let mut m = map.clone();
                if let Some(t) = trig {
                    m.insert(c, t.clone());
                }
                next.push((coef * oc, m));
            }
        }
        combos = next;
    }
    combos
        .into_iter()
        .map(|(coef, trig)| {
            (
                coef,
                Key {
                    basis: Basis { mono: mono.clone(), exp: exp.clone(), trig },
                    params: params.clone(),
                },
            )
        })
        .collect()
}
