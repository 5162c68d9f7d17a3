//! Independent reference computations used by the integration and acceptance tests.
#![allow(dead_code)]

use hnf::scalar::{BaseNumber, SmallDenomScalar};
use hnf::sample::monomials_of_weight;
use hnf::series::GradedSeries;
use num_rational::BigRational;

/// Solve `M x = y` exactly by Gauss–Jordan elimination on the augmented matrix.
pub fn solve(mut m: Vec<Vec<BaseNumber>>, y: Vec<BaseNumber>) -> Option<Vec<BaseNumber>> {
    let n = m.len();
    for (row, v) in m.iter_mut().zip(y) {
        row.push(v);
    }
    let cols = m.first().map_or(0, |r| r.len() - 1);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..n).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].inv()?;
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..n {
            if i != r && !m[i][c].is_zero() {
                let k = m[i][c].clone();
                let pr = m[r].clone();
                for (x, pv) in m[i].iter_mut().zip(pr) {
                    *x = &*x - &(&k * &pv);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    // Inconsistent rows have a zero left part and nonzero right side.
    if m[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let field = m[0][0].field().clone();
    let mut x = vec![BaseNumber::zero(&field); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = m[i][cols].clone();
    }
    Some(x)
}

fn coeff_base(s: &GradedSeries, m: &hnf::series::Monomial) -> BaseNumber {
    s.coeff(m)
        .map(|c| c.as_constant().cloned().expect("constant coefficient"))
        .unwrap_or_else(|| BaseNumber::zero(s.ctx().field()))
}

/// Lie series `Σ (−1)^n ad_g^n(h)/n!` with `ad_g h = {h, g}`.
pub fn lie_transform(h: &GradedSeries, g: &GradedSeries) -> GradedSeries {
    let mut acc = h.clone();
    let mut term = h.clone();
    let mut n = 1i64;
    loop {
        term = term.bracket(g).scale_rational(&BigRational::new((-1).into(), n.into()));
        if term.is_zero() {
            return acc;
        }
        acc = acc.add(&term);
        n += 1;
    }
}

/// Brute-force Birkhoff normal form: per weight, solve the homological
/// equation `{h₀, g} = N_k` as a dense linear system over all non-Moser
/// monomials of that weight, then apply the Lie series.
pub fn bnf_oracle(h: &GradedSeries) -> GradedSeries {
    let ctx = h.ctx().clone();
    let d = ctx.dim();
    let w = h.cutoff();
    let h0 = h.truncate(2, Some(3));
    let mut cur = h.clone();
    for k in 3..=w {
        let basis: Vec<_> = monomials_of_weight(d, k, false)
            .into_iter()
            .filter(|m| !m.is_moser())
            .collect();
        if basis.is_empty() {
            continue;
        }
        let images: Vec<GradedSeries> = basis
            .iter()
            .map(|m| h0.bracket(&GradedSeries::term(&ctx, w, m.clone(), SmallDenomScalar::one(&ctx))))
            .collect();
        let matrix: Vec<Vec<BaseNumber>> = basis
            .iter()
            .map(|row| images.iter().map(|img| coeff_base(img, row)).collect())
            .collect();
        let rhs: Vec<BaseNumber> = basis.iter().map(|m| coeff_base(&cur, m)).collect();
        if rhs.iter().all(BaseNumber::is_zero) {
            continue;
        }
        let x = solve(matrix, rhs).expect("non-resonant homological system");
        let mut g = GradedSeries::zero(&ctx, w);
        for (m, c) in basis.iter().zip(x) {
            g.add_term(m.clone(), SmallDenomScalar::constant(d, c));
        }
        cur = lie_transform(&cur, &g);
    }
    cur.moser_on_tau()
}

/// `σ(β)_k` for real β by recursion over coordinates, one level at a time,
/// visiting every J (both signs) in the ball of radius 2^k. Norms: 0 = ℓ∞, 1 = ℓ¹, 2 = ℓ².
pub fn sigma_oracle(beta: &[f64], k_max: u32, norm: u8) -> Vec<f64> {
    fn walk(beta: &[f64], j: &mut Vec<i64>, r: i64, norm: u8, best: &mut f64) {
        if j.len() == beta.len() {
            let inside = match norm {
                0 => j.iter().all(|x| x.abs() <= r),
                1 => j.iter().map(|x| x.abs()).sum::<i64>() <= r,
                _ => j.iter().map(|x| x * x).sum::<i64>() <= r * r,
            };
            if inside && j.iter().any(|&x| x != 0) {
                let v = beta.iter().zip(j.iter()).fold(0.0, |acc, (b, &x)| acc + b * x as f64).abs();
                *best = best.min(v);
            }
            return;
        }
        for x in (-r..=r).rev() {
            j.push(x);
            walk(beta, j, r, norm, best);
            j.pop();
        }
    }
    (0..=k_max)
        .map(|k| {
            let mut best = f64::INFINITY;
            walk(beta, &mut Vec::new(), 1 << k, norm, &mut best);
            best
        })
        .collect()
}
