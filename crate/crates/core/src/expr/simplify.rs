//! Collection of like terms into a sum of monomials `c * Π base^k`.
//!
//! Constant factors are distributed over sums, products are flattened and
//! equal bases (compared by their printed form) have their exponents added.
//! Products of two non-constant sums are not expanded. Integer exponents of a
//! single monomial are distributed; fractional ones are kept opaque.

use std::collections::BTreeMap;

use super::Expr;

#[derive(Debug, Clone)]
struct Term {
    coef: f64,
    /// Printed base -> (base, exponent).
    factors: BTreeMap<String, (Expr, f64)>,
}

impl Term {
    fn constant(c: f64) -> Term {
        Term {
            coef: c,
            factors: BTreeMap::new(),
        }
    }

    fn opaque(e: Expr) -> Term {
        let mut factors = BTreeMap::new();
        factors.insert(e.to_string(), (e, 1.0));
        Term { coef: 1.0, factors }
    }

    fn mul(&self, o: &Term) -> Term {
        let mut factors = self.factors.clone();
        for (k, (b, n)) in &o.factors {
            let entry = factors.entry(k.clone()).or_insert_with(|| (b.clone(), 0.0));
            entry.1 += n;
            if entry.1 == 0.0 {
                factors.remove(k);
            }
        }
        Term {
            coef: self.coef * o.coef,
            factors,
        }
    }

    fn key(&self) -> Vec<(String, u64)> {
        self.factors.iter().map(|(k, (_, n))| (k.clone(), n.to_bits())).collect()
    }

    fn build(self) -> Expr {
        let mut parts = vec![Expr::Const(self.coef.abs())];
        for (_, (b, n)) in self.factors {
            parts.push(Expr::pow(b, n));
        }
        let p = Expr::product(parts);
        if self.coef < 0.0 {
            Expr::neg(p)
        } else {
            p
        }
    }
}

fn terms_of(e: &Expr) -> Vec<Term> {
    match e {
        Expr::Const(c) => vec![Term::constant(*c)],
        Expr::Sum(ts) => ts.iter().flat_map(terms_of).collect(),
        Expr::Neg(a) => terms_of(a)
            .into_iter()
            .map(|mut t| {
                t.coef = -t.coef;
                t
            })
            .collect(),
        Expr::Product(fs) => {
            let mut acc = vec![Term::constant(1.0)];
            for f in fs {
                let ts = terms_of(f);
                if ts.len() == 1 {
                    acc = acc.iter().map(|a| a.mul(&ts[0])).collect();
                } else if acc.len() == 1 && acc[0].factors.is_empty() {
                    let c = acc[0].coef;
                    acc = ts
                        .into_iter()
                        .map(|mut t| {
                            t.coef *= c;
                            t
                        })
                        .collect();
                } else {
                    let o = Term::opaque(collect(ts));
                    acc = acc.iter().map(|a| a.mul(&o)).collect();
                }
            }
            acc
        }
        Expr::Pow(base, n) => {
            let tb = terms_of(base);
            if tb.len() == 1 && n.fract() == 0.0 && tb[0].coef != 0.0 {
                let t = &tb[0];
                vec![Term {
                    coef: t.coef.powi(*n as i32),
                    factors: t.factors.iter().map(|(k, (b, m))| (k.clone(), (b.clone(), m * n))).collect(),
                }]
            } else {
                vec![Term::opaque(Expr::pow(collect(tb), *n))]
            }
        }
        Expr::Var(_) => vec![Term::opaque(e.clone())],
        Expr::Sin(a) => vec![Term::opaque(Expr::sin(a.simplify()))],
        Expr::Cos(a) => vec![Term::opaque(Expr::cos(a.simplify()))],
        Expr::Exp(a) => vec![Term::opaque(Expr::exp(a.simplify()))],
        Expr::Log(a) => vec![Term::opaque(Expr::log(a.simplify()))],
    }
}

/// Adds like terms, keeping the order of first appearance.
fn collect(terms: Vec<Term>) -> Expr {
    let mut out: Vec<(Vec<(String, u64)>, Term)> = Vec::new();
    for t in terms {
        let key = t.key();
        match out.iter_mut().find(|(k, _)| *k == key) {
            Some((_, acc)) => acc.coef += t.coef,
            None => out.push((key, t)),
        }
    }
    Expr::sum(out.into_iter().filter(|(_, t)| t.coef != 0.0).map(|(_, t)| t.build()))
}

impl Expr {
    /// Equivalent expression with like terms collected. The result agrees
    /// with `self` wherever `self` evaluates without error.
    pub fn simplify(&self) -> Expr {
        collect(terms_of(self))
    }
}
