//! Systematic (N, M)-MDS storage of a K-file database.
//!
//! Node and file indices are 1-based at this module's API boundary and
//! 0-based everywhere inside it: node `n` is stored at position `n - 1`.
//!
//! Each file is a `(stripes * (N - M)) x M` matrix whose row `j` of stripe
//! `s` is the tuple `(w_1, ..., w_M)` spread across the systematic nodes.
//! Node data is laid out stripe-major, then file-major, then by row, so the
//! entry for `(stripe s, file k, row j)` lives at
//! `s * K * (N - M) + k * (N - M) + j` (all 0-based).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, PrimeField};
use crate::FpMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StorageParams {
    pub q: u32,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub stripes: usize,
}

impl StorageParams {
    /// Validated constructor.
    pub fn new(q: u32, n: usize, m: usize, k: usize, stripes: usize) -> Result<Self> {
        let p = StorageParams { q, n, m, k, stripes };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        PrimeField::new(u64::from(self.q))?;
        if self.m == 0 || self.m >= self.n {
            return Err(Error::InvalidParams(format!(
                "need 1 <= M < N, got N = {}, M = {}",
                self.n, self.m
            )));
        }
        if self.k == 0 {
            return Err(Error::InvalidParams("K must be at least 1".into()));
        }
        if self.stripes == 0 {
            return Err(Error::InvalidParams("stripes must be at least 1".into()));
        }
        Ok(())
    }

    pub fn field(&self) -> PrimeField {
        PrimeField::new(u64::from(self.q)).expect("validated modulus")
    }

    /// N - M: rows per stripe of every file.
    pub fn redundancy(&self) -> usize {
        self.n - self.m
    }

    /// Symbols per file, `stripes * (N - M) * M`.
    pub fn file_len(&self) -> usize {
        self.stripes * self.redundancy() * self.m
    }

    /// Rows of each file matrix.
    pub fn file_rows(&self) -> usize {
        self.stripes * self.redundancy()
    }

    /// Length of one stripe of a node's data, `(N - M) * K`.
    pub fn stripe_len(&self) -> usize {
        self.redundancy() * self.k
    }

    pub fn node_len(&self) -> usize {
        self.stripes * self.stripe_len()
    }

    /// 0-based offset of `(file, row)` within one stripe.
    #[inline]
    pub fn slot(&self, file: usize, row: usize) -> usize {
        file * self.redundancy() + row
    }
}

/// The `M x N` generator `[I_M | P]` of a systematic MDS code.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorMatrix {
    g: FpMatrix,
}

impl GeneratorMatrix {
    /// Wrap a matrix after checking it is `M x N` with an identity prefix.
    /// The MDS property is not checked here; see [`is_mds`].
    pub fn new(g: FpMatrix) -> Result<Self> {
        let m = g.rows();
        if m == 0 || g.cols() <= m {
            return Err(Error::InvalidParams(format!(
                "generator must be M x N with M < N, got {}x{}",
                m,
                g.cols()
            )));
        }
        if g.select_columns(&(0..m).collect::<Vec<_>>()) != FpMatrix::identity(*g.field(), m) {
            return Err(Error::InvalidParams("generator is not systematic".into()));
        }
        let q = g.field().modulus();
        if g.entries().iter().any(|&v| v >= q) {
            return Err(Error::InvalidParams(format!("generator entry not below {q}")));
        }
        Ok(GeneratorMatrix { g })
    }

    pub fn matrix(&self) -> &FpMatrix {
        &self.g
    }

    pub fn field(&self) -> PrimeField {
        *self.g.field()
    }

    pub fn m(&self) -> usize {
        self.g.rows()
    }

    pub fn n(&self) -> usize {
        self.g.cols()
    }

    /// Coefficient of systematic symbol `i` in node `n`'s share (0-based).
    #[inline]
    pub fn coeff(&self, i: usize, n: usize) -> u32 {
        *self.g.get(i, n)
    }

    /// Column `n` (0-based): the linear combination stored at node `n + 1`.
    pub fn column(&self, n: usize) -> Vec<u32> {
        self.g.column(n)
    }

    pub fn is_mds(&self) -> bool {
        is_mds(&self.g)
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        self.g.to_rows()
    }
}

/// Build `[I | P]` with `P` a Cauchy matrix, or the repetition code when M = 1.
pub fn build_generator(params: &StorageParams) -> Result<GeneratorMatrix> {
    params.validate()?;
    let f = params.field();
    let (n, m) = (params.n, params.m);
    if m >= 2 && (params.q as usize) < n {
        return Err(Error::FieldTooSmall { q: params.q, n });
    }
    let mut g = FpMatrix::zeros(f, m, n);
    for i in 0..m {
        g.set(i, i, 1);
    }
    if m == 1 {
        for c in 1..n {
            g.set(0, c, 1);
        }
    } else {
        // x_i = i for rows, y_j = M + j for columns: N distinct points when q >= N.
        for i in 0..m {
            for j in 0..n - m {
                let diff = f.sub(&(i as u32), &((m + j) as u32));
                let entry = f.inv(&diff).ok_or(Error::FieldTooSmall { q: params.q, n })?;
                g.set(i, m + j, entry);
            }
        }
    }
    let g = GeneratorMatrix::new(g)?;
    assert!(g.is_mds(), "Cauchy construction produced a non-MDS code");
    Ok(g)
}

/// `[I | P]` from explicit parity rows: `M` rows of `N - M` symbols each.
///
/// For fields too small for [`build_generator`]. The result is not checked
/// for the MDS property.
pub fn generator_from_parity(params: &StorageParams, parity: &[Vec<u32>]) -> Result<GeneratorMatrix> {
    params.validate()?;
    let (n, m) = (params.n, params.m);
    if parity.len() != m || parity.iter().any(|row| row.len() != n - m) {
        return Err(Error::DimensionMismatch(format!("parity must be {m}x{}", n - m)));
    }
    let f = params.field();
    let mut g = FpMatrix::zeros(f, m, n);
    for (i, row) in parity.iter().enumerate() {
        g.set(i, i, 1);
        for (j, &v) in row.iter().enumerate() {
            g.set(i, m + j, v);
        }
    }
    GeneratorMatrix::new(g)
}

/// Every choice of M columns has rank M.
pub fn is_mds(g: &FpMatrix) -> bool {
    let m = g.rows();
    column_subsets(g.cols(), m).all(|cols| g.select_columns(&cols).rank() == m)
}

/// All size-`k` subsets of `0..n` in lexicographic order.
pub fn column_subsets(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut current: Option<Vec<usize>> = if k <= n { Some((0..k).collect()) } else { None };
    std::iter::from_fn(move || {
        let out = current.clone()?;
        let mut next = out.clone();
        let mut i = k;
        let advanced = loop {
            if i == 0 {
                break false;
            }
            i -= 1;
            if next[i] < n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                break true;
            }
        };
        current = advanced.then_some(next);
        Some(out)
    })
}

/// The K files, each `(stripes * (N - M)) x M`, stored as rows of symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Database {
    pub files: Vec<Vec<Vec<u32>>>,
}

impl Database {
    pub fn zeros(params: &StorageParams) -> Self {
        Database { files: vec![vec![vec![0; params.m]; params.file_rows()]; params.k] }
    }

    pub fn random(params: &StorageParams, rng: &mut impl Rng) -> Self {
        let files = (0..params.k)
            .map(|_| {
                (0..params.file_rows())
                    .map(|_| (0..params.m).map(|_| rng.gen_range(0..params.q)).collect())
                    .collect()
            })
            .collect();
        Database { files }
    }

    /// Files from a flat symbol sequence in file, row, column order.
    pub fn from_symbols(params: &StorageParams, symbols: &[u32]) -> Result<Self> {
        if symbols.len() != params.k * params.file_len() {
            return Err(Error::DimensionMismatch(format!(
                "{} symbols for a database of {}",
                symbols.len(),
                params.k * params.file_len()
            )));
        }
        let files = symbols
            .chunks(params.file_len())
            .map(|file| file.chunks(params.m).map(<[u32]>::to_vec).collect())
            .collect();
        Ok(Database { files })
    }

    pub fn check(&self, params: &StorageParams) -> Result<()> {
        let ok = self.files.len() == params.k
            && self.files.iter().all(|f| {
                f.len() == params.file_rows()
                    && f.iter().all(|row| row.len() == params.m && row.iter().all(|&v| v < params.q))
            });
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "database does not match K = {}, {} rows of {} symbols below {}",
                params.k,
                params.file_rows(),
                params.m,
                params.q
            )))
        }
    }

    /// File `theta` (1-based).
    pub fn file(&self, theta: usize) -> &[Vec<u32>] {
        &self.files[theta - 1]
    }

    pub fn symbols(&self) -> impl Iterator<Item = u32> + '_ {
        self.files.iter().flatten().flatten().copied()
    }
}

/// Coded share `D_n` held by one node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeData {
    /// 1-based.
    pub node_index: usize,
    pub d: Vec<u32>,
}

impl NodeData {
    /// The slice of this share belonging to stripe `s` (0-based).
    pub fn stripe(&self, params: &StorageParams, s: usize) -> &[u32] {
        let len = params.stripe_len();
        &self.d[s * len..(s + 1) * len]
    }
}

/// Encode the database into N node shares.
pub fn encode(params: &StorageParams, db: &Database, g: &GeneratorMatrix) -> Result<Vec<NodeData>> {
    db.check(params)?;
    check_generator(params, g)?;
    let f = params.field();
    let r = params.redundancy();
    Ok((0..params.n)
        .map(|node| {
            let col = g.column(node);
            let mut d = Vec::with_capacity(params.node_len());
            for s in 0..params.stripes {
                for file in &db.files {
                    for row in &file[s * r..(s + 1) * r] {
                        d.push(f.dot(&col, row));
                    }
                }
            }
            NodeData { node_index: node + 1, d }
        })
        .collect())
}

/// Recover the database from exactly M shares with distinct node indices.
pub fn reconstruct(params: &StorageParams, shares: &[NodeData], g: &GeneratorMatrix) -> Result<Database> {
    check_generator(params, g)?;
    let m = params.m;
    let mut nodes: Vec<usize> = shares.iter().map(|s| s.node_index).collect();
    nodes.sort_unstable();
    nodes.dedup();
    if shares.len() != m || nodes.len() != m {
        return Err(Error::BadShareCount { expected: m, got: nodes.len().min(shares.len()) });
    }
    if shares.iter().any(|s| s.node_index == 0 || s.node_index > params.n) {
        return Err(Error::InvalidParams("share node index out of range".into()));
    }
    if shares.iter().any(|s| s.d.len() != params.node_len()) {
        return Err(Error::DimensionMismatch("share length does not match parameters".into()));
    }
    // Share values y_n = sum_i g[i][n] w_i, i.e. y = G_T^T w.
    let cols: Vec<usize> = shares.iter().map(|s| s.node_index - 1).collect();
    let decoder = g.matrix().select_columns(&cols).transpose().inverse()?;
    let r = params.redundancy();
    let mut db = Database::zeros(params);
    let mut y = vec![0u32; m];
    for s in 0..params.stripes {
        for file in 0..params.k {
            for row in 0..r {
                let pos = s * params.stripe_len() + params.slot(file, row);
                for (slot, share) in y.iter_mut().zip(shares) {
                    *slot = share.d[pos];
                }
                db.files[file][s * r + row] = decoder.mul_vec(&y)?;
            }
        }
    }
    Ok(db)
}

pub(crate) fn check_generator(params: &StorageParams, g: &GeneratorMatrix) -> Result<()> {
    if g.m() != params.m || g.n() != params.n || g.field().modulus() != params.q {
        return Err(Error::DimensionMismatch(format!(
            "generator is {}x{} over F_{}, parameters need {}x{} over F_{}",
            g.m(),
            g.n(),
            g.field().modulus(),
            params.m,
            params.n,
            params.q
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(q: u32, n: usize, m: usize, k: usize) -> StorageParams {
        StorageParams::new(q, n, m, k, 1).unwrap()
    }

    /// 2x2 determinant, written out.
    fn det2(a: u32, b: u32, c: u32, d: u32, q: u32) -> u32 {
        (a * d + q * q - b * c) % q
    }

    #[test]
    fn replication_code_for_m1() {
        let g = build_generator(&params(2, 2, 1, 2)).unwrap();
        assert_eq!(g.to_rows(), vec![vec![1, 1]]);
        assert!(g.is_mds());
    }

    #[test]
    fn three_two_code_over_f3() {
        let g = build_generator(&params(3, 3, 2, 1)).unwrap();
        let rows = g.to_rows();
        assert_eq!(&rows[0][..2], &[1, 0]);
        assert_eq!(&rows[1][..2], &[0, 1]);
        let (p1, p2) = (rows[0][2], rows[1][2]);
        assert!(p1 != 0 && p2 != 0);
        // Columns {1,2}, {1,3}, {2,3}.
        assert_ne!(det2(1, 0, 0, 1, 3), 0);
        assert_ne!(det2(1, p1, 0, p2, 3), 0);
        assert_ne!(det2(0, p1, 1, p2, 3), 0);
    }

    #[test]
    fn generator_errors() {
        let bad = StorageParams { q: 2, n: 3, m: 2, k: 1, stripes: 1 };
        assert_eq!(build_generator(&bad), Err(Error::FieldTooSmall { q: 2, n: 3 }));
        let bad = StorageParams { q: 5, n: 3, m: 3, k: 1, stripes: 1 };
        assert!(matches!(build_generator(&bad), Err(Error::InvalidParams(_))));
        let bad = StorageParams { q: 4, n: 3, m: 1, k: 1, stripes: 1 };
        assert_eq!(build_generator(&bad), Err(Error::NotPrime(4)));
    }

    #[test]
    fn explicit_binary_generators() {
        let p = params(2, 3, 2, 2);
        let g = generator_from_parity(&p, &[vec![1], vec![1]]).unwrap();
        assert!(g.is_mds());
        // No binary (4, 2) code is MDS: nodes 2 and 4 hold the same symbols.
        let p = params(2, 4, 2, 2);
        let g = generator_from_parity(&p, &[vec![1, 0], vec![1, 1]]).unwrap();
        assert!(!g.is_mds());
        assert!(generator_from_parity(&p, &[vec![1, 0]]).is_err());
        assert!(generator_from_parity(&p, &[vec![1, 2], vec![1, 1]]).is_err());
    }

    #[test]
    fn is_mds_examples() {
        let f = PrimeField::new(2).unwrap();
        assert!(is_mds(&FpMatrix::from_rows(f, vec![vec![1, 1]]).unwrap()));
        let f3 = PrimeField::new(3).unwrap();
        assert!(is_mds(&FpMatrix::from_rows(f3, vec![vec![1, 0, 1], vec![0, 1, 1]]).unwrap()));
        let zero_col = FpMatrix::from_rows(f3, vec![vec![1, 0, 0, 1], vec![0, 1, 0, 2]]).unwrap();
        assert!(!is_mds(&zero_col));
    }

    #[test]
    fn column_subsets_enumerate_binomials() {
        assert_eq!(column_subsets(4, 2).count(), 6);
        assert_eq!(column_subsets(5, 3).count(), 10);
        assert_eq!(column_subsets(3, 3).collect::<Vec<_>>(), vec![vec![0, 1, 2]]);
        assert_eq!(column_subsets(2, 3).count(), 0);
        assert_eq!(
            column_subsets(3, 2).collect::<Vec<_>>(),
            vec![vec![0, 1], vec![0, 2], vec![1, 2]]
        );
    }

    #[test]
    fn encode_zero_database() {
        let p = params(5, 4, 2, 3);
        let g = build_generator(&p).unwrap();
        let shares = encode(&p, &Database::zeros(&p), &g).unwrap();
        assert_eq!(shares.len(), 4);
        assert!(shares.iter().all(|s| s.d.iter().all(|&v| v == 0)));
    }

    #[test]
    fn encode_single_row() {
        let p = params(3, 3, 2, 1);
        let g = build_generator(&p).unwrap();
        let db = Database { files: vec![vec![vec![1, 2]]] };
        let shares = encode(&p, &db, &g).unwrap();
        let (p1, p2) = (g.coeff(0, 2), g.coeff(1, 2));
        assert_eq!(shares[0].d, vec![1]);
        assert_eq!(shares[1].d, vec![2]);
        assert_eq!(shares[2].d, vec![(p1 + 2 * p2) % 3]);
    }

    #[test]
    fn systematic_nodes_hold_file_columns() {
        let p = StorageParams::new(7, 5, 3, 2, 2).unwrap();
        let g = build_generator(&p).unwrap();
        let db = Database::random(&p, &mut ChaCha8Rng::seed_from_u64(3));
        let shares = encode(&p, &db, &g).unwrap();
        let r = p.redundancy();
        for i in 0..p.m {
            for s in 0..p.stripes {
                for k in 0..p.k {
                    for j in 0..r {
                        assert_eq!(shares[i].stripe(&p, s)[p.slot(k, j)], db.files[k][s * r + j][i]);
                    }
                }
            }
        }
    }

    #[test]
    fn reconstruct_from_systematic_and_parity_nodes() {
        let p = params(3, 3, 2, 2);
        let g = build_generator(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let db = Database::random(&p, &mut rng);
            let shares = encode(&p, &db, &g).unwrap();
            assert_eq!(reconstruct(&p, &shares[1..3], &g).unwrap(), db);
            assert_eq!(reconstruct(&p, &shares[0..2], &g).unwrap(), db);
        }
    }

    #[test]
    fn reconstruct_rejects_wrong_share_counts() {
        let p = params(5, 4, 2, 2);
        let g = build_generator(&p).unwrap();
        let shares = encode(&p, &Database::zeros(&p), &g).unwrap();
        assert_eq!(
            reconstruct(&p, &shares[..1], &g),
            Err(Error::BadShareCount { expected: 2, got: 1 })
        );
        let dup = vec![shares[0].clone(), shares[0].clone()];
        assert_eq!(reconstruct(&p, &dup, &g), Err(Error::BadShareCount { expected: 2, got: 1 }));
    }

    #[test]
    fn database_shape_is_checked() {
        let p = params(5, 4, 2, 2);
        let g = build_generator(&p).unwrap();
        let mut db = Database::zeros(&p);
        db.files[1].pop();
        assert!(matches!(encode(&p, &db, &g), Err(Error::DimensionMismatch(_))));
        let mut db = Database::zeros(&p);
        db.files[0][0][0] = 5;
        assert!(matches!(encode(&p, &db, &g), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn from_symbols_layout() {
        let p = params(5, 3, 1, 2);
        let db = Database::from_symbols(&p, &[1, 2, 3, 4]).unwrap();
        assert_eq!(db.files, vec![vec![vec![1], vec![2]], vec![vec![3], vec![4]]]);
        assert_eq!(db.symbols().collect::<Vec<_>>(), vec![1, 2, 3, 4]);
    }
}
