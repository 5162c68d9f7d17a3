use crate::scalar::BaseNumber;

/// Exact reduced row echelon form; zero rows are dropped.
pub fn rref(rows: &[Vec<BaseNumber>]) -> Vec<Vec<BaseNumber>> {
    let mut m: Vec<Vec<BaseNumber>> = rows.to_vec();
    let Some(width) = m.first().map(Vec::len) else {
        return m;
    };
    let mut rank = 0;
    for col in 0..width {
        let Some(piv) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = m[rank][col].inv().expect("nonzero pivot");
        m[rank] = m[rank].iter().map(|x| x * &inv).collect();
        for r in 0..m.len() {
            if r == rank || m[r][col].is_zero() {
                continue;
            }
            let k = m[r][col].clone();
            let pivot_row = m[rank].clone();
            for (x, p) in m[r].iter_mut().zip(&pivot_row) {
                *x = &*x - &(&k * p);
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    m.truncate(rank);
    m
}

/// Whether `v` lies in the span of the (row-reduced) `basis`.
pub fn in_span(basis: &[Vec<BaseNumber>], v: &[BaseNumber]) -> bool {
    if v.iter().all(BaseNumber::is_zero) {
        return true;
    }
    let mut rows = basis.to_vec();
    rows.push(v.to_vec());
    rref(&rows).len() == rref(basis).len()
}

/// Inverse of a square matrix, or `None` when singular.
pub(crate) fn invert(m: &[Vec<BaseNumber>]) -> Option<Vec<Vec<BaseNumber>>> {
    let n = m.len();
    let field = m.first()?.first()?.field().clone();
    let aug: Vec<Vec<BaseNumber>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| {
                if i == j {
                    BaseNumber::one(&field)
                } else {
                    BaseNumber::zero(&field)
                }
            }));
            r
        })
        .collect();
    let red = rref(&aug);
    if red.len() < n || (0..n).any(|i| !red[i][i].is_one()) {
        return None;
    }
    Some(red.into_iter().map(|r| r[n..].to_vec()).collect())
}
