//! Guruswami-Sudan list decoding of GRS codes.
//!
//! Interpolation uses Kötter's iterative algorithm over the multiplicity
//! constraints (Hasse derivatives), and factorization uses Roth-Ruckenstein
//! root finding. Candidates are re-encoded and filtered by distance, so the
//! output is exactly the set of codewords within the radius.

use super::GrsCode;
use crate::gf_core::{hamming_distance, Fe, Field};
use crate::{Error, Result};

/// Largest multiplicity tried before giving up.
const MAX_MULTIPLICITY: usize = 64;

/// Interpolation parameters for a given agreement target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GsParameters {
    /// Multiplicity at each point.
    pub s: usize,
    /// Bound on the (1, d)-weighted degree of the interpolant.
    pub weighted_degree: usize,
    /// Bound on the Y-degree.
    pub list_bound: usize,
}

fn monomials(weighted: usize, d: usize) -> u128 {
    (0..=weighted / d)
        .map(|b| (weighted - d * b + 1) as u128)
        .sum()
}

/// Smallest multiplicity `s` for which an interpolant of weighted degree
/// `t·s - 1` exists, i.e. the monomial count exceeds `N·s(s+1)/2`.
pub fn gs_parameters(big_n: usize, d: usize, agreement: usize) -> Option<GsParameters> {
    if d == 0 || agreement == 0 || agreement * agreement <= d * big_n {
        return None;
    }
    (1..=MAX_MULTIPLICITY).find_map(|s| {
        let weighted = agreement * s - 1;
        let constraints = (big_n * s * (s + 1) / 2) as u128;
        (monomials(weighted, d) > constraints).then_some(GsParameters {
            s,
            weighted_degree: weighted,
            list_bound: weighted / d,
        })
    })
}

/// Binomial coefficients reduced mod p, by Pascal's rule.
struct Binomials {
    rows: Vec<Vec<u32>>,
    p: u32,
}

impl Binomials {
    fn new(p: u32) -> Self {
        Binomials { rows: vec![vec![1]], p }
    }

    fn get(&mut self, a: usize, b: usize) -> u32 {
        if b > a {
            return 0;
        }
        while self.rows.len() <= a {
            let prev = self.rows.last().unwrap();
            let len = prev.len() + 1;
            let mut row = vec![1u32; len];
            for i in 1..len - 1 {
                row[i] = (prev[i - 1] + prev[i]) % self.p;
            }
            self.rows.push(row);
        }
        self.rows[a][b]
    }
}

/// Bivariate polynomial as `coeffs[b][a]` for the monomial `X^a Y^b`.
type BiPoly = Vec<Vec<Fe>>;

/// `c` as an element of the prime subfield.
fn scalar(f: &Field, c: u32) -> Fe {
    // The prime subfield sits at indices 0..p in the canonical encoding.
    c % f.p()
}

fn hasse(f: &Field, bin: &mut Binomials, g: &BiPoly, u: usize, v: usize, apow: &[Fe], ypow: &[Fe]) -> Fe {
    let mut total = 0;
    for (b, row) in g.iter().enumerate().skip(v) {
        if row.len() <= u {
            continue;
        }
        let mut inner = 0;
        for (a, &c) in row.iter().enumerate().skip(u) {
            if c == 0 {
                continue;
            }
            let coef = bin.get(a, u);
            if coef == 0 {
                continue;
            }
            let term = f.mul(c, apow[a - u]);
            inner = f.add(inner, if coef == 1 { term } else { f.mul(scalar(f, coef), term) });
        }
        if inner == 0 {
            continue;
        }
        let coef = bin.get(b, v);
        if coef == 0 {
            continue;
        }
        let term = f.mul(inner, ypow[b - v]);
        total = f.add(total, if coef == 1 { term } else { f.mul(scalar(f, coef), term) });
    }
    total
}

fn powers(f: &Field, x: Fe, count: usize) -> Vec<Fe> {
    let mut out = Vec::with_capacity(count);
    let mut acc = 1;
    for _ in 0..count {
        out.push(acc);
        acc = f.mul(acc, x);
    }
    out
}

fn max_x_degree(g: &BiPoly) -> usize {
    g.iter().map(|r| r.len()).max().unwrap_or(0)
}

/// Kötter interpolation; returns the interpolant of least weighted degree.
fn interpolate(f: &Field, xs: &[Fe], ys: &[Fe], d: usize, params: GsParameters) -> BiPoly {
    let s = params.s;
    let l = params.list_bound;
    let mut bin = Binomials::new(f.p());
    let mut polys: Vec<BiPoly> = (0..=l)
        .map(|j| {
            let mut g = vec![Vec::new(); j + 1];
            g[j] = vec![1];
            g
        })
        .collect();
    let mut wdeg: Vec<usize> = (0..=l).map(|j| j * d).collect();

    for (&alpha, &y) in xs.iter().zip(ys) {
        let ypow = powers(f, y, l + 1);
        for v in 0..s {
            for u in 0..s - v {
                let width = polys.iter().map(max_x_degree).max().unwrap_or(0);
                let apow = powers(f, alpha, width + 1);
                let deltas: Vec<Fe> = polys
                    .iter()
                    .map(|g| hasse(f, &mut bin, g, u, v, &apow, &ypow))
                    .collect();
                let Some(star) = (0..=l)
                    .filter(|&j| deltas[j] != 0)
                    .min_by_key(|&j| (wdeg[j], j))
                else {
                    continue;
                };
                let pivot = polys[star].clone();
                let inv = f.inv(deltas[star]);
                for j in 0..=l {
                    if j == star || deltas[j] == 0 {
                        continue;
                    }
                    let factor = f.mul(deltas[j], inv);
                    let g = &mut polys[j];
                    if g.len() < pivot.len() {
                        g.resize(pivot.len(), Vec::new());
                    }
                    for (b, row) in pivot.iter().enumerate() {
                        if g[b].len() < row.len() {
                            g[b].resize(row.len(), 0);
                        }
                        for (a, &c) in row.iter().enumerate() {
                            if c != 0 {
                                g[b][a] = f.sub(g[b][a], f.mul(factor, c));
                            }
                        }
                    }
                }
                // g* <- (X - alpha) g*
                let neg_alpha = f.neg(alpha);
                let g = &mut polys[star];
                for row in g.iter_mut() {
                    if row.is_empty() {
                        continue;
                    }
                    let mut next = vec![0; row.len() + 1];
                    for (a, &c) in row.iter().enumerate() {
                        next[a + 1] = f.add(next[a + 1], c);
                        next[a] = f.add(next[a], f.mul(neg_alpha, c));
                    }
                    *row = next;
                }
                wdeg[star] += 1;
            }
        }
    }
    let best = (0..=l).min_by_key(|&j| (wdeg[j], j)).unwrap();
    polys.swap_remove(best)
}

fn trim(g: &mut BiPoly) {
    for row in g.iter_mut() {
        while row.last() == Some(&0) {
            row.pop();
        }
    }
    while g.last().is_some_and(|r| r.is_empty()) {
        g.pop();
    }
}

/// Roth-Ruckenstein: all `f` with `deg f ≤ d` and `(Y - f(X)) | Q`.
fn factor_roots(f: &Field, q: BiPoly, d: usize) -> Vec<Vec<Fe>> {
    let mut bin = Binomials::new(f.p());
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(d + 1);
    rr(f, &mut bin, q, d, &mut prefix, &mut out);
    out
}

fn rr(f: &Field, bin: &mut Binomials, mut q: BiPoly, d: usize, prefix: &mut Vec<Fe>, out: &mut Vec<Vec<Fe>>) {
    trim(&mut q);
    if q.is_empty() {
        // Q ≡ 0: every continuation divides; cannot happen for a nonzero interpolant.
        return;
    }
    // Divide out the largest power of X.
    let shift = q
        .iter()
        .filter_map(|row| row.iter().position(|&c| c != 0))
        .min()
        .unwrap_or(0);
    if shift > 0 {
        for row in q.iter_mut() {
            if row.len() >= shift {
                row.drain(..shift);
            }
        }
    }
    let univariate: Vec<Fe> = q.iter().map(|row| row.first().copied().unwrap_or(0)).collect();
    let deg = univariate.iter().rposition(|&c| c != 0).unwrap_or(0);
    if deg == 0 {
        return;
    }
    for beta in 0..f.q() {
        let val = univariate[..=deg]
            .iter()
            .rev()
            .fold(0, |acc, &c| f.add(f.mul(acc, beta), c));
        if val != 0 {
            continue;
        }
        prefix.push(beta);
        if prefix.len() == d + 1 {
            out.push(prefix.clone());
        } else {
            // Q(X, XY + beta)
            let ly = q.len();
            let bpow = powers(f, beta, ly);
            let mut next: BiPoly = vec![Vec::new(); ly];
            for c in 0..ly {
                let mut acc: Vec<Fe> = Vec::new();
                for b in c..ly {
                    let coef = bin.get(b, c);
                    if coef == 0 || q[b].is_empty() {
                        continue;
                    }
                    let scale = f.mul(scalar(f, coef), bpow[b - c]);
                    if scale == 0 {
                        continue;
                    }
                    if acc.len() < q[b].len() {
                        acc.resize(q[b].len(), 0);
                    }
                    for (a, &x) in q[b].iter().enumerate() {
                        acc[a] = f.add(acc[a], f.mul(scale, x));
                    }
                }
                if acc.iter().any(|&x| x != 0) {
                    let mut row = vec![0; c];
                    row.extend(acc);
                    next[c] = row;
                }
            }
            rr(f, bin, next, d, prefix, out);
        }
        prefix.pop();
    }
}

/// Every codeword of `code` within Hamming distance `radius` of `z`, sorted.
///
/// Refuses radii that are not strictly below `N - sqrt(dN)`.
pub fn gs_list_decode(z: &[Fe], code: &GrsCode, radius: usize) -> Result<Vec<Vec<Fe>>> {
    let big_n = code.len();
    if z.len() != big_n {
        return Err(Error::LengthMismatch { expected: big_n, got: z.len() });
    }
    let d = code.k();
    let bound = big_n as f64 - ((d * big_n) as f64).sqrt();
    let agreement = big_n.saturating_sub(radius);
    if radius >= big_n || agreement * agreement <= d * big_n {
        return Err(Error::RadiusRefused { radius, bound });
    }
    let f = code.field();
    let ys: Vec<Fe> = z
        .iter()
        .zip(code.multipliers())
        .map(|(&zi, &vi)| f.div(zi, vi))
        .collect();

    let candidates: Vec<Vec<Fe>> = if d == 0 {
        // Any constant within the radius agrees with z somewhere.
        let mut c: Vec<Vec<Fe>> = ys.iter().map(|&y| vec![y]).collect();
        c.sort_unstable();
        c.dedup();
        c
    } else {
        let params = gs_parameters(big_n, d, agreement)
            .ok_or(Error::RadiusRefused { radius, bound })?;
        let q = interpolate(f, code.points(), &ys, d, params);
        factor_roots(f, q, d)
    };

    let mut out: Vec<Vec<Fe>> = candidates
        .iter()
        .map(|msg| code.encode_unchecked(msg))
        .filter(|c| hamming_distance(c, z, 1) <= radius)
        .collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Exhaustive list decoding over all codewords.
pub fn brute_force_list_decode(z: &[Fe], code: &GrsCode, radius: usize, cap: u64) -> Result<Vec<Vec<Fe>>> {
    if z.len() != code.len() {
        return Err(Error::LengthMismatch { expected: code.len(), got: z.len() });
    }
    let mut out = Vec::new();
    code.for_each_codeword(cap, |c| {
        if hamming_distance(c, z, 1) <= radius {
            out.push(c.to_vec());
        }
    })?;
    out.sort_unstable();
    Ok(out)
}
