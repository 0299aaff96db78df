//! Exact linear algebra over a field and integer lattice reduction.

use num_traits::Num;

/// Reduced row echelon form; returns the pivot columns.
pub fn rref<T: Clone + Num>(rows: &mut Vec<Vec<T>>) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = T::one() / rows[r][c].clone();
        for x in rows[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in 0..ncols {
                    let v = rows[r][j].clone() * f.clone();
                    rows[i][j] = rows[i][j].clone() - v;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

/// Basis of `{x : row·x = 0 for every row}` in dimension `n`.
pub fn nullspace<T: Clone + Num>(rows: &[Vec<T>], n: usize) -> Vec<Vec<T>> {
    let mut m: Vec<Vec<T>> = rows.to_vec();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![T::zero(); n];
            v[f] = T::one();
            for (row, &p) in m.iter().zip(&pivots) {
                v[p] = T::zero() - row[f].clone();
            }
            v
        })
        .collect()
}

/// Basis of the intersection of the row spans of the given generator lists.
pub fn span_intersection<T: Clone + Num>(spans: &[Vec<Vec<T>>], n: usize) -> Vec<Vec<T>> {
    let mut perp = Vec::new();
    for s in spans {
        perp.extend(nullspace(s, n));
    }
    nullspace(&perp, n)
}

/// Coefficients `c` with `Σ cᵢ·genᵢ = target`, if any.
pub fn solve<T: Clone + Num>(gens: &[Vec<T>], target: &[T]) -> Option<Vec<T>> {
    let n = target.len();
    let k = gens.len();
    // Rows are coordinates; columns are generators plus the target.
    let mut m: Vec<Vec<T>> = (0..n)
        .map(|i| {
            let mut row: Vec<T> = gens.iter().map(|g| g[i].clone()).collect();
            row.push(target[i].clone());
            row
        })
        .collect();
    let pivots = rref(&mut m);
    if pivots.contains(&k) {
        return None;
    }
    let mut c = vec![T::zero(); k];
    for (row, &p) in m.iter().zip(&pivots) {
        c[p] = row[k].clone();
    }
    Some(c)
}

fn gcd(a: i64, b: i64) -> i64 {
    num_integer::Integer::gcd(&a, &b)
}

/// Integer row echelon form of a lattice basis (Hermite normal form with
/// positive pivots and reduced entries above pivots). Zero rows are dropped.
pub fn hermite(gens: &[Vec<i64>], n: usize) -> Vec<Vec<i64>> {
    let mut rows: Vec<Vec<i64>> = gens.iter().filter(|g| g.iter().any(|&x| x != 0)).cloned().collect();
    let mut out: Vec<Vec<i64>> = Vec::new();
    for c in 0..n {
        // Euclid on column c among remaining rows.
        loop {
            let nz: Vec<usize> = (0..rows.len()).filter(|&i| rows[i][c] != 0).collect();
            if nz.len() <= 1 {
                break;
            }
            let m = *nz.iter().min_by_key(|&&i| rows[i][c].abs()).unwrap();
            for &i in &nz {
                if i != m {
                    let q = rows[i][c] / rows[m][c];
                    let pm = rows[m].clone();
                    for (x, y) in rows[i].iter_mut().zip(&pm) {
                        *x -= q * y;
                    }
                }
            }
        }
        if let Some(i) = (0..rows.len()).find(|&i| rows[i][c] != 0) {
            let mut r = rows.remove(i);
            if r[c] < 0 {
                r.iter_mut().for_each(|x| *x = -*x);
            }
            out.push(r);
        }
        rows.retain(|r| r.iter().any(|&x| x != 0));
    }
    // Reduce entries above each pivot.
    for i in 0..out.len() {
        let c = out[i].iter().position(|&x| x != 0).unwrap();
        let d = out[i][c];
        for j in 0..i {
            let q = out[j][c].div_euclid(d);
            if q != 0 {
                let pi = out[i].clone();
                for (x, y) in out[j].iter_mut().zip(&pi) {
                    *x -= q * y;
                }
            }
        }
    }
    out
}

/// Canonical representative of `v + L` for `L` given in Hermite form.
pub fn residue(hnf: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    let mut r = v.to_vec();
    for row in hnf {
        let c = row.iter().position(|&x| x != 0).unwrap();
        let q = r[c].div_euclid(row[c]);
        if q != 0 {
            for (x, y) in r.iter_mut().zip(row) {
                *x -= q * y;
            }
        }
    }
    r
}

/// Scale a rational-direction vector to a primitive integer vector.
pub fn primitive(v: &[i64]) -> Vec<i64> {
    let g = v.iter().fold(0, |g, &x| gcd(g, x));
    if g == 0 {
        v.to_vec()
    } else {
        v.iter().map(|&x| x / g).collect()
    }
}
