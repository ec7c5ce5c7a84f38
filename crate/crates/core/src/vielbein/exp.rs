//! Exact `e^{tA}` for rational matrices by Putzer's method.

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::VielbeinError;
use crate::expr::{ExprMatrix, Expression};

type Gauss = Complex<BigRational>;

fn rz() -> BigRational {
    BigRational::zero()
}

/// Coefficients of `det(xI − A)`, lowest degree first (Faddeev-LeVerrier).
pub fn characteristic_polynomial(a: &[Vec<BigRational>]) -> Vec<BigRational> {
    let n = a.len();
    let mut coeffs = vec![rz(); n + 1];
    coeffs[n] = BigRational::one();
    let mut m = vec![vec![rz(); n]; n];
    for k in 1..=n {
        let mut next = rat_mul(a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += &coeffs[n - k + 1];
        }
        m = next;
        let am = rat_mul(a, &m);
        let tr: BigRational = (0..n).map(|i| am[i][i].clone()).fold(rz(), |s, v| s + v);
        coeffs[n - k] = -tr / BigRational::from_integer(BigInt::from(k));
    }
    coeffs
}

fn rat_mul(a: &[Vec<BigRational>], b: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let n = a.len();
    let mut out = vec![vec![rz(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                if !b[k][j].is_zero() {
                    out[i][j] += &a[i][k] * &b[k][j];
                }
            }
        }
    }
    out
}

fn eval_poly(p: &[BigRational], x: &BigRational) -> BigRational {
    p.iter().rev().fold(rz(), |acc, c| acc * x + c)
}

/// Divides by `(x − r)`, assuming `r` is a root.
fn deflate(p: &[BigRational], r: &BigRational) -> Vec<BigRational> {
    let n = p.len() - 1;
    let mut q = vec![rz(); n];
    let mut carry = rz();
    for i in (0..n).rev() {
        carry = &p[i + 1] + &carry * r;
        q[i] = carry.clone();
    }
    q
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = BigInt::one();
    while &d * &d <= n {
        if (&n % &d).is_zero() {
            small.push(d.clone());
            let other = &n / &d;
            if other != d {
                large.push(other);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Rational roots with multiplicity; returns them and the remaining factor.
pub(crate) fn rational_roots(p: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut p = trim(p.to_vec());
    let mut roots = Vec::new();
    while p.len() > 1 && p[0].is_zero() {
        roots.push(rz());
        p.remove(0);
    }
    loop {
        if p.len() <= 1 {
            return (roots, p);
        }
        let lcm = p.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let ints: Vec<BigInt> = p.iter().map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer()).collect();
        let lead = ints.last().expect("nonempty");
        let mut found = None;
        'search: for num in divisors(&ints[0]) {
            for den in divisors(lead) {
                for sign in [1, -1] {
                    let r = BigRational::new(&num * sign, den.clone());
                    if eval_poly(&p, &r).is_zero() {
                        found = Some(r);
                        break 'search;
                    }
                }
            }
        }
        match found {
            Some(r) => {
                p = deflate(&p, &r);
                roots.push(r);
            }
            None => return (roots, p),
        }
    }
}

fn trim(mut p: Vec<BigRational>) -> Vec<BigRational> {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

/// `p(y + a)`.
fn shift(p: &[BigRational], a: &BigRational) -> Vec<BigRational> {
    let mut out = vec![rz(); p.len()];
    for c in p.iter().rev() {
        let mut next = vec![rz(); p.len()];
        for (i, v) in out.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            next[i] += v * a;
            if i + 1 < next.len() {
                next[i + 1] += v;
            }
        }
        next[0] += c;
        out = next;
    }
    trim(out)
}

fn rational_sqrt(v: &BigRational) -> Option<BigRational> {
    if v.is_negative() {
        return None;
    }
    let n = v.numer().sqrt();
    let d = v.denom().sqrt();
    (&n * &n == *v.numer() && &d * &d == *v.denom()).then(|| BigRational::new(n, d))
}

pub(crate) fn render_poly(p: &[BigRational]) -> String {
    let mut parts = Vec::new();
    for (deg, c) in p.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let var = match deg {
            0 => String::new(),
            1 => "x".to_string(),
            _ => format!("x^{deg}"),
        };
        let mag = c.abs();
        let body = if var.is_empty() {
            mag.to_string()
        } else if mag.is_one() {
            var
        } else {
            format!("{mag}*{var}")
        };
        let sign = if c.is_negative() { "-" } else { "+" };
        if parts.is_empty() {
            parts.push(if c.is_negative() { format!("-{body}") } else { body });
        } else {
            parts.push(format!("{sign} {body}"));
        }
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" ")
    }
}

/// Eigenvalues with multiplicity: rational, or `α ± iμ` sharing one real part.
pub fn eigenvalues(a: &[Vec<BigRational>]) -> Result<Vec<Gauss>, VielbeinError> {
    let cp = characteristic_polynomial(a);
    let (roots, rest) = rational_roots(&cp);
    let mut out: Vec<Gauss> = roots.into_iter().map(|r| Complex::new(r, rz())).collect();
    if rest.len() <= 1 {
        return Ok(out);
    }
    let unsupported = || VielbeinError::UnsupportedSpectrum { factor: render_poly(&rest) };
    let d = rest.len() - 1;
    let lead = rest[d].clone();
    let alpha = -&rest[d - 1] / (lead * BigRational::from_integer(BigInt::from(d)));
    let shifted = shift(&rest, &alpha);
    if shifted.iter().enumerate().any(|(i, c)| i % 2 == 1 && !c.is_zero()) {
        return Err(unsupported());
    }
    let even: Vec<BigRational> = shifted.iter().step_by(2).cloned().collect();
    let (uroots, urest) = rational_roots(&even);
    if urest.len() > 1 {
        return Err(unsupported());
    }
    for u in uroots {
        let mu = rational_sqrt(&-u).filter(|m| !m.is_zero()).ok_or_else(unsupported)?;
        out.push(Complex::new(alpha.clone(), mu.clone()));
        out.push(Complex::new(alpha.clone(), -mu));
    }
    Ok(out)
}

/// `e^{ν t}` as a complex expression in coordinate `t`.
fn exp_complex(nu: &Gauss, t: usize) -> (Expression, Expression) {
    let e = Expression::exp(t, nu.re.clone());
    if nu.im.is_zero() {
        return (e, Expression::zero());
    }
    (&e * &Expression::cos(t, nu.im.clone()), &e * &Expression::sin(t, nu.im.clone()))
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, k| a * BigInt::from(k))
}

/// Divided difference of `z ↦ e^{zt}` over a multiset of nodes.
fn divided_difference(nodes: &[Gauss], t: usize) -> (Expression, Expression) {
    let mut distinct: Vec<(Gauss, usize)> = Vec::new();
    for n in nodes {
        match distinct.iter_mut().find(|(v, _)| v == n) {
            Some((_, m)) => *m += 1,
            None => distinct.push((n.clone(), 1)),
        }
    }
    let mut re = Expression::zero();
    let mut im = Expression::zero();
    for (nu, m) in &distinct {
        // Taylor coefficients of Π (ν − ν' + h)^{−m'} up to h^{m−1}.
        let mut g: Vec<Gauss> = vec![Complex::new(BigRational::one(), rz())];
        g.resize(*m, Complex::new(rz(), rz()));
        for (other, mo) in &distinct {
            if other == nu {
                continue;
            }
            let d = nu - other;
            let dinv = Complex::new(BigRational::one(), rz()) / d.clone();
            let mut series = Vec::with_capacity(*m);
            let mut dpow = num_traits::pow(dinv.clone(), *mo);
            for s in 0..*m {
                let c = BigRational::from_integer(binomial(mo + s - 1, s) * if s % 2 == 0 { 1 } else { -1 });
                series.push(dpow.clone() * Complex::new(c, rz()));
                dpow *= dinv.clone();
            }
            let mut next = vec![Complex::new(rz(), rz()); *m];
            for (i, gi) in g.iter().enumerate() {
                for (j, sj) in series.iter().enumerate() {
                    if i + j < *m {
                        next[i + j] = next[i + j].clone() + gi.clone() * sj.clone();
                    }
                }
            }
            g = next;
        }
        let (er, ei) = exp_complex(nu, t);
        for j in 0..*m {
            let gc = &g[m - 1 - j];
            let scale = BigRational::new(BigInt::one(), factorial(j));
            let tj = Expression::coord(t).pow(j as u32);
            let (cr, ci) = (gc.re.clone() * &scale, gc.im.clone() * &scale);
            let base_r = &tj * &er;
            let base_i = &tj * &ei;
            re = re + base_r.scale(&cr) - base_i.scale(&ci);
            im = im + base_r.scale(&ci) + base_i.scale(&cr);
        }
    }
    (re, im)
}

fn is_nilpotent_poly(cp: &[BigRational]) -> bool {
    cp[..cp.len() - 1].iter().all(Zero::is_zero)
}

/// Terminating series `Σ (tA)^k / k!` for a nilpotent expression matrix.
pub fn nilpotent_exponential(a: &ExprMatrix, t: usize) -> Option<ExprMatrix> {
    let n = a.rows();
    let ta = a.scale_expr(&Expression::coord(t));
    let mut out = ExprMatrix::identity(n);
    let mut term = ExprMatrix::identity(n);
    for k in 1..=n {
        term = term.mul(&ta).map(|e| e.scale(&BigRational::new(BigInt::one(), BigInt::from(k))));
        if term.is_zero() {
            return Some(out);
        }
        out = out.add(&term);
    }
    None
}

/// Exact `e^{t A}` with `t` a zero-based coordinate index.
pub fn matrix_exponential(a: &[Vec<BigRational>], t: usize) -> Result<ExprMatrix, VielbeinError> {
    let n = a.len();
    let cp = characteristic_polynomial(a);
    if is_nilpotent_poly(&cp) {
        let m = ExprMatrix::from_rational(a);
        return Ok(nilpotent_exponential(&m, t).expect("nilpotent by Cayley-Hamilton"));
    }
    let mut eig = eigenvalues(a)?;
    eig.sort_by(|x, y| (&x.re, &x.im).cmp(&(&y.re, &y.im)));
    let zero = Complex::new(rz(), rz());
    let mut p_re: Vec<Vec<BigRational>> = identity(n);
    let mut p_im: Vec<Vec<BigRational>> = vec![vec![rz(); n]; n];
    let mut re = ExprMatrix::zeros(n, n);
    let mut im = ExprMatrix::zeros(n, n);
    for k in 0..n {
        let (rr, ri) = divided_difference(&eig[..=k], t);
        for i in 0..n {
            for j in 0..n {
                let (a_re, a_im) = (&p_re[i][j], &p_im[i][j]);
                if a_re.is_zero() && a_im.is_zero() {
                    continue;
                }
                re[(i, j)] = std::mem::take(&mut re[(i, j)]) + rr.scale(a_re) - ri.scale(a_im);
                im[(i, j)] = std::mem::take(&mut im[(i, j)]) + rr.scale(a_im) + ri.scale(a_re);
            }
        }
        if k + 1 < n {
            // P_{k+1} = P_k (A − λ_{k+1} I)
            let lam = &eig[k];
            let mut shifted: Vec<Vec<Gauss>> =
                (0..n).map(|i| (0..n).map(|j| Complex::new(a[i][j].clone(), rz())).collect()).collect();
            for (i, row) in shifted.iter_mut().enumerate() {
                row[i] = row[i].clone() - lam.clone();
            }
            let mut nr = vec![vec![rz(); n]; n];
            let mut ni = vec![vec![rz(); n]; n];
            for i in 0..n {
                for l in 0..n {
                    let pc = Complex::new(p_re[i][l].clone(), p_im[i][l].clone());
                    if pc == zero {
                        continue;
                    }
                    for j in 0..n {
                        if shifted[l][j] == zero {
                            continue;
                        }
                        let v = pc.clone() * shifted[l][j].clone();
                        nr[i][j] += v.re;
                        ni[i][j] += v.im;
                    }
                }
            }
            p_re = nr;
            p_im = ni;
        }
    }
    assert!(im.is_zero(), "imaginary part of a real matrix exponential must vanish");
    Ok(re)
}

fn identity(n: usize) -> Vec<Vec<BigRational>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { rz() }).collect()).collect()
}
