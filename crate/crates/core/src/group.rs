//! Finite monoids and groups given by Cayley tables, plus a numerical
//! decomposition of the regular representation into irreducibles.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, C64, ONE, ZERO};

/// Multiplication table of a finite monoid with identity at index 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CayleyTable {
    pub labels: Vec<String>,
    pub table: Vec<Vec<usize>>,
}

impl CayleyTable {
    /// Validates shape, range, identity at index 0 and associativity.
    pub fn new(labels: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidTable("empty table".into()));
        }
        if labels.len() != n {
            return Err(Error::InvalidTable(format!(
                "{} labels for {} elements",
                labels.len(),
                n
            )));
        }
        for (a, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidTable(format!("row {a} has length {}", row.len())));
            }
            if let Some(&bad) = row.iter().find(|&&x| x >= n) {
                return Err(Error::InvalidTable(format!("entry {bad} out of range in row {a}")));
            }
        }
        for a in 0..n {
            if table[0][a] != a || table[a][0] != a {
                return Err(Error::InvalidTable(format!(
                    "index 0 is not a two-sided identity (fails at {a})"
                )));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for cc in 0..n {
                    if table[table[a][b]][cc] != table[a][table[b][cc]] {
                        return Err(Error::InvalidTable(format!(
                            "not associative at ({a}, {b}, {cc})"
                        )));
                    }
                }
            }
        }
        Ok(Self { labels, table })
    }

    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self> {
        let labels = (0..table.len()).map(|i| i.to_string()).collect();
        Self::new(labels, table)
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inverse(&self, a: usize) -> Option<usize> {
        (0..self.order()).find(|&b| self.table[a][b] == 0 && self.table[b][a] == 0)
    }

    pub fn is_group(&self) -> bool {
        (0..self.order()).all(|a| self.inverse(a).is_some())
    }

    /// Inverse table; errors if some element has no inverse.
    pub fn inverses(&self) -> Result<Vec<usize>> {
        (0..self.order())
            .map(|a| {
                self.inverse(a).ok_or_else(|| {
                    Error::NotAGroup(format!("element {} has no inverse", self.labels[a]))
                })
            })
            .collect()
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.table[a][b] == self.table[b][a]))
    }

    pub fn trivial() -> Self {
        Self {
            labels: vec!["e".into()],
            table: vec![vec![0]],
        }
    }

    pub fn cyclic(n: usize) -> Self {
        assert!(n >= 1);
        Self {
            labels: (0..n).map(|k| k.to_string()).collect(),
            table: (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect(),
        }
    }

    /// Symmetric group on three letters, elements as permutations in one-line
    /// notation with the identity first.
    pub fn symmetric3() -> Self {
        let perms: [[usize; 3]; 6] = [
            [0, 1, 2],
            [1, 0, 2],
            [0, 2, 1],
            [2, 1, 0],
            [1, 2, 0],
            [2, 0, 1],
        ];
        let index = |p: [usize; 3]| perms.iter().position(|q| *q == p).expect("closed");
        // (a*b)(i) = a(b(i))
        let table = perms
            .iter()
            .map(|a| {
                perms
                    .iter()
                    .map(|b| index([a[b[0]], a[b[1]], a[b[2]]]))
                    .collect()
            })
            .collect();
        let labels = perms
            .iter()
            .map(|p| format!("{}{}{}", p[0], p[1], p[2]))
            .collect();
        Self { labels, table }
    }

    /// Dihedral group of order 8: `r^k s^f` stored as index `k + 4 f`.
    pub fn dihedral4() -> Self {
        let idx = |k: usize, f: usize| k % 4 + 4 * f;
        let mut table = vec![vec![0; 8]; 8];
        for (a, row) in table.iter_mut().enumerate() {
            let (k1, f1) = (a % 4, a / 4);
            for (b, cell) in row.iter_mut().enumerate() {
                let (k2, f2) = (b % 4, b / 4);
                // r^k1 s^f1 r^k2 s^f2 = r^(k1 + (-1)^f1 k2) s^(f1+f2)
                let k = if f1 == 0 { k1 + k2 } else { k1 + 4 - k2 };
                *cell = idx(k, (f1 + f2) % 2);
            }
        }
        let labels = (0..8)
            .map(|a| {
                let (k, f) = (a % 4, a / 4);
                match (k, f) {
                    (0, 0) => "e".to_string(),
                    (_, 0) => format!("r{k}"),
                    (0, _) => "s".to_string(),
                    _ => format!("r{k}s"),
                }
            })
            .collect();
        Self { labels, table }
    }

    /// Looks up a bundled table by short name: `z<n>`, `s3`, `d4`, `trivial`.
    pub fn named(name: &str) -> Result<Self> {
        match name {
            "s3" => Ok(Self::symmetric3()),
            "d4" => Ok(Self::dihedral4()),
            "trivial" => Ok(Self::trivial()),
            _ => name
                .strip_prefix('z')
                .and_then(|n| n.parse::<usize>().ok())
                .filter(|&n| n >= 1)
                .map(Self::cyclic)
                .ok_or_else(|| Error::InvalidInput(format!("unknown group name {name:?}"))),
        }
    }

    /// Left regular representation `L_g δ_k = δ_{gk}`.
    pub fn left_regular(&self, g: usize) -> CMatrix {
        let n = self.order();
        let mut m = CMatrix::zeros(n, n);
        for k in 0..n {
            m[(self.mul(g, k), k)] = ONE;
        }
        m
    }

    /// Right regular representation `R_h δ_k = δ_{k h^{-1}}`; requires a group.
    fn right_regular(&self, h: usize, inv: &[usize]) -> CMatrix {
        let n = self.order();
        let mut m = CMatrix::zeros(n, n);
        for k in 0..n {
            m[(self.mul(k, inv[h]), k)] = ONE;
        }
        m
    }

    /// One representative of every irreducible unitary representation,
    /// as `irreps[r][g]`. Ordered by dimension, trivial representation first.
    pub fn irreducible_representations(&self) -> Result<Vec<Vec<CMatrix>>> {
        let inv = self.inverses()?;
        let n = self.order();
        let left: Vec<CMatrix> = (0..n).map(|g| self.left_regular(g)).collect();
        let right: Vec<CMatrix> = (0..n).map(|h| self.right_regular(h, &inv)).collect();

        'attempt: for seed in 0..16u64 {
            let mut rng = ChaCha20Rng::seed_from_u64(0x1EE7 + seed);
            // Generic Hermitian element of the commutant of the left action.
            let mut coeff = vec![ZERO; n];
            for h in 0..n {
                if inv[h] == h {
                    coeff[h] = c(linalg::random_complex(&mut rng).re, 0.0);
                } else if h < inv[h] {
                    coeff[h] = linalg::random_complex(&mut rng);
                    coeff[inv[h]] = coeff[h].conj();
                }
            }
            let mut herm = CMatrix::zeros(n, n);
            for h in 0..n {
                herm += &right[h] * coeff[h];
            }
            let (vals, vecs) = linalg::sorted_hermitian_eigen(&herm);

            let mut clusters: Vec<Vec<usize>> = Vec::new();
            for k in 0..n {
                match clusters.last_mut() {
                    Some(cl) if (vals[cl[0]] - vals[k]).abs() < 1e-7 => cl.push(k),
                    _ => clusters.push(vec![k]),
                }
            }

            let mut found: Vec<(Vec<C64>, Vec<CMatrix>)> = Vec::new();
            for cl in &clusters {
                let q = CMatrix::from_columns(
                    &cl.iter().map(|&k| vecs.column(k).into_owned()).collect::<Vec<_>>(),
                );
                let images: Vec<CMatrix> = left.iter().map(|l| q.adjoint() * l * &q).collect();
                let chars: Vec<C64> = images.iter().map(|m| m.trace()).collect();
                let norm2: f64 = chars.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
                if (norm2 - 1.0).abs() > 1e-6 {
                    continue 'attempt;
                }
                let seen = found.iter().any(|(ch, _)| {
                    ch.iter().zip(&chars).all(|(a, b)| (a - b).norm() < 1e-6)
                });
                if !seen {
                    found.push((chars, images));
                }
            }
            let total: usize = found.iter().map(|(_, im)| im[0].nrows().pow(2)).sum();
            if total != n {
                continue;
            }
            found.sort_by(|(ca, ia), (cb, ib)| {
                let key = |ch: &Vec<C64>, im: &Vec<CMatrix>| {
                    let trivial = ch.iter().all(|z| (z - ONE).norm() < 1e-9);
                    (im[0].nrows(), !trivial)
                };
                key(ca, ia).cmp(&key(cb, ib)).then_with(|| {
                    for (a, b) in ca.iter().zip(cb) {
                        let ord = b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im));
                        if (a - b).norm() > 1e-9 {
                            return ord;
                        }
                    }
                    std::cmp::Ordering::Equal
                })
            });
            return Ok(found
                .into_iter()
                .map(|(_, mut images)| {
                    for m in images.iter_mut() {
                        clean(m);
                    }
                    images
                })
                .collect());
        }
        Err(Error::InvalidInput(
            "could not decompose the regular representation".into(),
        ))
    }
}

/// Snap entries within 1e-14 of zero.
fn clean(m: &mut CMatrix) {
    for z in m.iter_mut() {
        if z.re.abs() < 1e-14 {
            z.re = 0.0;
        }
        if z.im.abs() < 1e-14 {
            z.im = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_tables_validate() {
        for t in [
            CayleyTable::cyclic(4),
            CayleyTable::symmetric3(),
            CayleyTable::dihedral4(),
            CayleyTable::trivial(),
        ] {
            let v = CayleyTable::new(t.labels.clone(), t.table.clone()).unwrap();
            assert!(v.is_group());
        }
        assert!(!CayleyTable::symmetric3().is_abelian());
        assert!(!CayleyTable::dihedral4().is_abelian());
    }

    #[test]
    fn non_associative_table_rejected() {
        // (1*2)*1 = 1 but 1*(2*1) = 0
        let t = vec![vec![0, 1, 2], vec![1, 1, 0], vec![2, 2, 1]];
        assert!(matches!(
            CayleyTable::from_table(t),
            Err(Error::InvalidTable(_))
        ));
    }

    #[test]
    fn monoid_without_inverses_is_not_group() {
        // {1, 0} under multiplication: identity 1 at index 0, zero at index 1
        let t = CayleyTable::from_table(vec![vec![0, 1], vec![1, 1]]).unwrap();
        assert!(!t.is_group());
        assert!(t.inverses().is_err());
    }

    #[test]
    fn irreps_of_s3_have_dims_1_1_2() {
        let irreps = CayleyTable::symmetric3().irreducible_representations().unwrap();
        let dims: Vec<usize> = irreps.iter().map(|r| r[0].nrows()).collect();
        assert_eq!(dims, vec![1, 1, 2]);
        let t = CayleyTable::symmetric3();
        for rep in &irreps {
            for a in 0..6 {
                for b in 0..6 {
                    let lhs = &rep[t.mul(a, b)];
                    let rhs = &rep[a] * &rep[b];
                    assert!(linalg::max_abs(&(lhs - rhs)) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn irreps_of_z2_are_trivial_then_sign() {
        let irreps = CayleyTable::cyclic(2).irreducible_representations().unwrap();
        assert_eq!(irreps.len(), 2);
        assert!((irreps[0][1][(0, 0)] - ONE).norm() < 1e-14);
        assert!((irreps[1][1][(0, 0)] + ONE).norm() < 1e-14);
    }

    #[test]
    fn d4_has_five_irreps() {
        let irreps = CayleyTable::dihedral4().irreducible_representations().unwrap();
        let dims: Vec<usize> = irreps.iter().map(|r| r[0].nrows()).collect();
        assert_eq!(dims, vec![1, 1, 1, 1, 2]);
    }
}
