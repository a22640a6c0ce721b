//! Arithmetic in GF(p^s) and the Paley graphs built on it.
//!
//! Elements of GF(p^s) are encoded as the integers `0..q`, read as base-`p`
//! digit vectors: digit `i` is the coefficient of `x^i` in the residue
//! modulo the defining polynomial. Multiplication goes through log/antilog
//! tables on a primitive element.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{induced_subgraph, Graph};

/// Largest field order for which tables are built.
pub const MAX_FIELD_ORDER: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree {0} is not supported (1 <= s <= 4)")]
    DegreeTooLarge(u32),
    #[error("field order {0} exceeds the table limit")]
    OrderTooLarge(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("q = {0} is not congruent to 1 (mod 4)")]
    NotOneModFour(u64),
    #[error("field of even order {0} has no quadratic-residue split")]
    EvenOrder(u64),
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Writes `q = p^s` with `p` prime, if possible.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q % d == 0)?;
    let mut rest = q;
    let mut s = 0;
    while rest % p == 0 {
        rest /= p;
        s += 1;
    }
    (rest == 1).then_some((p, s))
}

/// The finite field GF(p^s) with table-driven multiplication.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrimePowerField {
    p: u64,
    s: u32,
    q: u64,
    /// Monic defining polynomial, `s + 1` coefficients, low degree first.
    modulus_poly: Vec<u64>,
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// Polynomial over GF(p) as a low-degree-first coefficient vector.
type Poly = Vec<u64>;

fn poly_trim(mut a: Poly) -> Poly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

/// Remainder of `a` modulo the monic polynomial `m`.
fn poly_rem(a: &[u64], m: &[u64], p: u64) -> Poly {
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        if lead != 0 {
            for (i, &c) in m.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p - lead * c % p) % p;
            }
        }
        r.pop();
    }
    poly_trim(r)
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Poly {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    poly_trim(out)
}

/// Monic polynomials of degree `d` over GF(p), in the order used to pick
/// the canonical modulus: compare `c_0` first, then `c_1`, and so on.
fn monic_polys(p: u64, d: u32) -> impl Iterator<Item = Poly> {
    let count = p.pow(d);
    (0..count).map(move |mut k| {
        let mut coeffs = vec![0; d as usize + 1];
        // c_0 is the most significant digit of k
        for i in (0..d as usize).rev() {
            coeffs[i] = k % p;
            k /= p;
        }
        coeffs[d as usize] = 1;
        coeffs
    })
}

/// Irreducibility over GF(p) by trial division with every monic polynomial
/// of degree at most `deg / 2`.
pub fn is_irreducible(f: &[u64], p: u64) -> bool {
    let deg = f.len() as u32 - 1;
    if deg == 0 {
        return false;
    }
    (1..=deg / 2).all(|d| monic_polys(p, d).all(|g| !poly_rem(f, &g, p).is_empty()))
}

impl PrimePowerField {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn order(&self) -> u64 {
        self.q
    }

    pub fn modulus_poly(&self) -> &[u64] {
        &self.modulus_poly
    }

    fn digits(&self, a: u64) -> Poly {
        let mut out = Vec::with_capacity(self.s as usize);
        let mut a = a;
        for _ in 0..self.s {
            out.push(a % self.p);
            a /= self.p;
        }
        out
    }

    fn encode(&self, digits: &[u64]) -> u64 {
        digits.iter().rev().fold(0, |acc, &d| acc * self.p + d)
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        if self.s == 1 {
            return (a + b) % self.p;
        }
        let (da, db) = (self.digits(a), self.digits(b));
        let sum: Vec<u64> = da.iter().zip(&db).map(|(x, y)| (x + y) % self.p).collect();
        self.encode(&sum)
    }

    pub fn neg(&self, a: u64) -> u64 {
        if self.s == 1 {
            return (self.p - a) % self.p;
        }
        let d: Vec<u64> = self.digits(a).iter().map(|x| (self.p - x) % self.p).collect();
        self.encode(&d)
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if a == 0 || b == 0 {
            return 0;
        }
        let n = self.q - 1;
        let e = (self.log[a as usize] as u64 + self.log[b as usize] as u64) % n;
        self.exp[e as usize] as u64
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: u64) -> Option<u64> {
        if a == 0 {
            return None;
        }
        let n = self.q - 1;
        let e = (n - self.log[a as usize] as u64) % n;
        Some(self.exp[e as usize] as u64)
    }

    /// A primitive element (generator of the multiplicative group).
    pub fn generator(&self) -> u64 {
        self.exp[1 % (self.q as usize - 1)] as u64
    }

    fn mul_slow(&self, a: u64, b: u64) -> u64 {
        let prod = poly_mul(&poly_trim(self.digits(a)), &poly_trim(self.digits(b)), self.p);
        let r = if self.s == 1 {
            prod
        } else {
            poly_rem(&prod, &self.modulus_poly, self.p)
        };
        let mut d = r;
        d.resize(self.s as usize, 0);
        self.encode(&d)
    }
}

/// GF(p^s) with the lexicographically smallest monic irreducible modulus.
pub fn make_field(p: u64, s: u32) -> Result<PrimePowerField, GfError> {
    if !is_prime(p) {
        return Err(GfError::NotPrime(p));
    }
    if s == 0 || s > 4 {
        return Err(GfError::DegreeTooLarge(s));
    }
    let q = p
        .checked_pow(s)
        .filter(|&q| q <= MAX_FIELD_ORDER)
        .ok_or(GfError::OrderTooLarge(p.saturating_pow(s)))?;
    let modulus_poly = if s == 1 {
        vec![0, 1]
    } else {
        monic_polys(p, s)
            .find(|f| is_irreducible(f, p))
            .expect("an irreducible polynomial of every degree exists")
    };
    let mut field = PrimePowerField {
        p,
        s,
        q,
        modulus_poly,
        exp: vec![],
        log: vec![],
    };
    // smallest primitive element by brute-force order computation
    let n = q - 1;
    let mut exp = vec![0u32; n as usize];
    let mut log = vec![0u32; q as usize];
    for g in 1..q {
        let mut x = 1u64;
        let mut ok = true;
        for k in 0..n {
            if k > 0 && x == 1 {
                ok = false;
                break;
            }
            exp[k as usize] = x as u32;
            x = field.mul_slow(x, g);
        }
        if ok && x == 1 {
            break;
        }
        if g == q - 1 {
            unreachable!("multiplicative group of a finite field is cyclic");
        }
    }
    for (k, &e) in exp.iter().enumerate() {
        log[e as usize] = k as u32;
    }
    field.exp = exp;
    field.log = log;
    Ok(field)
}

/// `a^e` by square-and-multiply.
pub fn field_pow(f: &PrimePowerField, a: u64, e: u64) -> u64 {
    let mut base = a;
    let mut e = e;
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = f.mul(acc, base);
        }
        base = f.mul(base, base);
        e >>= 1;
    }
    acc
}

/// Nonzero squares and non-squares of an odd-order field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueClassification {
    pub residues: Vec<u64>,
    pub non_residues: Vec<u64>,
    is_residue: Vec<bool>,
}

impl ResidueClassification {
    pub fn is_residue(&self, a: u64) -> bool {
        self.is_residue[a as usize]
    }
}

/// Splits the nonzero elements by Euler's criterion `a^((q-1)/2) = 1`.
pub fn classify_residues(f: &PrimePowerField) -> Result<ResidueClassification, GfError> {
    let q = f.order();
    if q % 2 == 0 {
        return Err(GfError::EvenOrder(q));
    }
    let half = (q - 1) / 2;
    let mut is_residue = vec![false; q as usize];
    let (mut residues, mut non_residues) = (Vec::new(), Vec::new());
    for a in 1..q {
        if field_pow(f, a, half) == 1 {
            is_residue[a as usize] = true;
            residues.push(a);
        } else {
            non_residues.push(a);
        }
    }
    Ok(ResidueClassification {
        residues,
        non_residues,
        is_residue,
    })
}

/// Field, residue split and graph for one Paley order.
#[derive(Debug, Clone)]
pub struct PaleyData {
    pub field: PrimePowerField,
    pub residues: ResidueClassification,
    pub graph: Graph,
}

pub fn paley_data(q: u64) -> Result<PaleyData, GfError> {
    let (p, s) = prime_power(q).ok_or(GfError::NotPrimePower(q))?;
    if q % 4 != 1 {
        return Err(GfError::NotOneModFour(q));
    }
    let field = make_field(p, s)?;
    let residues = classify_residues(&field)?;
    let n = q as usize;
    let mut graph = Graph::empty(n);
    for i in 0..q {
        for j in i + 1..q {
            if residues.is_residue(field.sub(i, j)) {
                graph.add_edge(i as usize, j as usize);
            }
        }
    }
    Ok(PaleyData {
        field,
        residues,
        graph,
    })
}

/// The Paley graph `P_q`: vertices GF(q), `i ~ j` iff `i - j` is a nonzero square.
pub fn paley_graph(q: u64) -> Result<Graph, GfError> {
    // validate before building anything
    if prime_power(q).is_some() && q % 4 != 1 {
        return Err(GfError::NotOneModFour(q));
    }
    Ok(paley_data(q)?.graph)
}

/// Subgraph induced on the vertices that are neither `anchor` nor adjacent to
/// it, with the map from local indices back to original labels.
pub fn local_graph(g: &Graph, anchor: usize) -> (Graph, Vec<usize>) {
    assert!(anchor < g.order(), "anchor out of range");
    let map: Vec<usize> = (0..g.order())
        .filter(|&v| v != anchor && !g.has_edge(anchor, v))
        .collect();
    let h = induced_subgraph(g, &map).expect("map is sorted and in range");
    (h, map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{check_isomorphism_map, check_strongly_regular, complement, SrgParameters};

    #[test]
    fn make_field_examples() {
        let f = make_field(13, 1).unwrap();
        assert_eq!(f.order(), 13);
        assert_eq!(make_field(4, 1).unwrap_err(), GfError::NotPrime(4));
        assert_eq!(make_field(3, 5).unwrap_err(), GfError::DegreeTooLarge(5));
    }

    /// Independent oracle: first monic cubic over GF(5), scanning `c_0`,
    /// then `c_1`, then `c_2`, that has no root in GF(5).
    #[test]
    fn gf125_modulus_is_lex_smallest_rootless_cubic() {
        let p = 5u64;
        let mut expected = None;
        'outer: for c0 in 0..p {
            for c1 in 0..p {
                for c2 in 0..p {
                    let rootless = (0..p).all(|x| (x * x * x + c2 * x * x + c1 * x + c0) % p != 0);
                    if rootless {
                        expected = Some(vec![c0, c1, c2, 1]);
                        break 'outer;
                    }
                }
            }
        }
        let f = make_field(5, 3).unwrap();
        assert_eq!(Some(f.modulus_poly().to_vec()), expected);
        assert_eq!(f.modulus_poly(), &[1, 0, 1, 1]);
    }

    #[test]
    fn field_axioms_exhaustive_small() {
        for (p, s) in [(3, 2), (5, 2), (5, 3), (13, 1), (3, 3)] {
            let f = make_field(p, s).unwrap();
            let q = f.order();
            assert!(is_irreducible(f.modulus_poly(), p) || s == 1);
            for a in 0..q {
                assert_eq!(f.add(a, 0), a);
                assert_eq!(f.mul(a, 1), a);
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
                for b in 0..q {
                    assert_eq!(f.mul(a, b), f.mul_slow(a, b));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    assert_eq!(f.add(a, b), f.add(b, a));
                }
            }
            // sampled associativity and distributivity
            for k in 0..500u64 {
                let (a, b, c) = (k * 7 % q, k * 31 % q, k * 97 % q);
                assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            }
        }
    }

    #[test]
    fn field_pow_examples() {
        let f13 = make_field(13, 1).unwrap();
        assert_eq!(field_pow(&f13, 2, 6), 12);
        assert_eq!(field_pow(&f13, 7, 0), 1);
        let f5 = make_field(5, 1).unwrap();
        assert_eq!(field_pow(&f5, 0, 3), 0);
    }

    #[test]
    fn residue_examples() {
        let r5 = classify_residues(&make_field(5, 1).unwrap()).unwrap();
        assert_eq!(r5.residues, vec![1, 4]);
        let r13 = classify_residues(&make_field(13, 1).unwrap()).unwrap();
        assert_eq!(r13.residues, vec![1, 3, 4, 9, 10, 12]);
        for (p, s) in [(3, 2), (5, 2), (5, 3), (13, 1), (29, 1)] {
            let f = make_field(p, s).unwrap();
            let r = classify_residues(&f).unwrap();
            let q = f.order();
            assert_eq!(r.residues.len() as u64, (q - 1) / 2);
            assert_eq!(r.non_residues.len() as u64, (q - 1) / 2);
            let squares: std::collections::BTreeSet<u64> =
                (1..q).map(|b| f.mul(b, b)).collect();
            assert_eq!(squares.into_iter().collect::<Vec<_>>(), r.residues);
            for &a in &r.residues {
                for &b in &r.residues {
                    assert!(r.is_residue(f.mul(a, b)));
                }
            }
        }
        let f2 = make_field(2, 2).unwrap();
        assert_eq!(classify_residues(&f2).unwrap_err(), GfError::EvenOrder(4));
    }

    #[test]
    fn paley_examples() {
        let p5 = paley_graph(5).unwrap();
        assert_eq!(p5.edges(), vec![(0, 1), (0, 4), (1, 2), (2, 3), (3, 4)]);
        assert_eq!(
            check_strongly_regular(&paley_graph(9).unwrap()),
            Some(SrgParameters {
                n: 9,
                r: 4,
                a: 1,
                c: 2
            })
        );
        assert_eq!(paley_graph(13).unwrap().edge_count(), 39);
        assert_eq!(paley_graph(7).unwrap_err(), GfError::NotOneModFour(7));
        assert_eq!(paley_graph(6).unwrap_err(), GfError::NotPrimePower(6));
        assert_eq!(paley_graph(21).unwrap_err(), GfError::NotPrimePower(21));
    }

    #[test]
    fn paley_graphs_are_strongly_regular_and_self_complementary() {
        for q in [5u64, 9, 13, 17, 25, 29, 37, 41, 49, 53, 61, 73, 81, 89, 97, 101, 109, 113, 125] {
            let data = paley_data(q).unwrap();
            let g = &data.graph;
            let n = q as usize;
            assert_eq!(
                check_strongly_regular(g),
                Some(SrgParameters {
                    n,
                    r: (n - 1) / 2,
                    a: (n - 5) / 4,
                    c: (n - 1) / 4
                }),
                "q = {q}"
            );
            let beta = data.residues.non_residues[0];
            let map: Vec<usize> = (0..q).map(|i| data.field.mul(beta, i) as usize).collect();
            assert!(check_isomorphism_map(g, &complement(g), &map).unwrap());
        }
    }

    #[test]
    fn local_graph_examples() {
        let p5 = paley_graph(5).unwrap();
        let (l, map) = local_graph(&p5, 0);
        assert_eq!(map, vec![2, 3]);
        assert_eq!(l.edges(), vec![(0, 1)]);

        let data = paley_data(13).unwrap();
        let (l13, map13) = local_graph(&data.graph, 0);
        assert_eq!(l13.order(), 6);
        assert_eq!(
            map13.iter().map(|&v| v as u64).collect::<Vec<_>>(),
            data.residues.non_residues
        );

        let (le, _) = local_graph(&Graph::empty(6), 0);
        assert_eq!(le.order(), 5);
    }

    /// For prime q the local graph is isomorphic to the complement of the
    /// graph induced on the residues, via i -> beta * i.
    #[test]
    fn local_graph_matches_complement_of_residue_graph() {
        for q in [13u64, 17, 29, 41, 61] {
            let data = paley_data(q).unwrap();
            let g = &data.graph;
            let (local, map) = local_graph(g, 0);
            let residues: Vec<usize> = data.residues.residues.iter().map(|&r| r as usize).collect();
            let lq = induced_subgraph(g, &residues).unwrap();
            let lq_bar = complement(&lq);
            let beta = data.residues.non_residues[0];
            // local index a -> original v = map[a] -> beta*v, a residue -> its index in `residues`
            let pi: Vec<usize> = map
                .iter()
                .map(|&v| {
                    let image = data.field.mul(beta, v as u64) as usize;
                    residues.binary_search(&image).unwrap()
                })
                .collect();
            assert!(check_isomorphism_map(&local, &lq_bar, &pi).unwrap(), "q = {q}");
        }
    }
}
