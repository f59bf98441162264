//! Matrices over cyclotomic fields and finite matrix groups.
//!
//! A [`UMatrix`] keeps every entry over one conductor as a common positive
//! denominator and integer power-basis numerators. That form is canonical
//! after dividing out the content, so it doubles as the exact hash key used
//! during closure.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{BuildHasher, Hash, Hasher};
use std::sync::Arc;

use hashbrown::HashTable;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use rustc_hash::FxBuildHasher;

use crate::cyclo::{field, CycNum, Field};

/// Default enumeration cap for closures.
pub const DEFAULT_CAP: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroupError {
    #[error("closure exceeded the cap of {0} elements")]
    CapExceeded(usize),
    #[error("generator {0} is singular")]
    SingularGenerator(usize),
    #[error("group has not been enumerated")]
    NotEnumerated,
    #[error("matrix dimensions do not agree ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("entry with conductor {entry} does not lie in Q(z{declared})")]
    ConductorMismatch { entry: u32, declared: u32 },
    #[error("expected {expected} entries, found {found}")]
    EntryCount { expected: usize, found: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("exact integer kernel overflowed")]
    Overflow,
}

/// Square matrix over `Q(ζ_n)` stored as `nums / den`.
#[derive(Clone)]
pub struct UMatrix {
    dim: usize,
    field: Arc<Field>,
    den: i64,
    nums: Vec<i64>,
}

impl PartialEq for UMatrix {
    fn eq(&self, other: &UMatrix) -> bool {
        self.dim == other.dim
            && self.field.conductor() == other.field.conductor()
            && self.den == other.den
            && self.nums == other.nums
    }
}

impl Eq for UMatrix {}

impl Hash for UMatrix {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.dim.hash(state);
        self.field.conductor().hash(state);
        self.den.hash(state);
        self.nums.hash(state);
    }
}

fn canonicalize(den: i128, nums: &mut [i128]) -> Result<(i64, Vec<i64>), GroupError> {
    let mut g = den;
    for &x in nums.iter() {
        if g == 1 {
            break;
        }
        if x != 0 {
            g = g.gcd(&x);
        }
    }
    let g = g.abs();
    let den = den / g;
    let den = i64::try_from(den).map_err(|_| GroupError::Overflow)?;
    let out = nums
        .iter()
        .map(|&x| i64::try_from(x / g).map_err(|_| GroupError::Overflow))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((den, out))
}

impl UMatrix {
    /// Builds a matrix from row-major entries, promoting each to `conductor`.
    pub fn from_entries(dim: usize, conductor: u32, entries: &[CycNum]) -> Result<UMatrix, GroupError> {
        if entries.len() != dim * dim {
            return Err(GroupError::EntryCount {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        let f = field(conductor);
        let phi = f.degree();
        let mut promoted = Vec::with_capacity(entries.len());
        for e in entries {
            if conductor % e.conductor() != 0 {
                return Err(GroupError::ConductorMismatch {
                    entry: e.conductor(),
                    declared: conductor,
                });
            }
            promoted.push(e.promote(conductor));
        }
        let den = promoted
            .iter()
            .fold(BigInt::from(1), |acc, e| acc.lcm(&e.denominator()));
        let mut nums = Vec::with_capacity(dim * dim * phi);
        for e in &promoted {
            for c in e.coeffs() {
                let v = (c * BigRational::from_integer(den.clone())).to_integer();
                nums.push(v.to_i128().ok_or(GroupError::Overflow)?);
            }
        }
        let den = den.to_i128().ok_or(GroupError::Overflow)?;
        let (den, nums) = canonicalize(den, &mut nums)?;
        Ok(UMatrix { dim, field: f, den, nums })
    }

    pub fn identity(dim: usize, conductor: u32) -> UMatrix {
        UMatrix::scalar(dim, conductor, 0)
    }

    /// `ζ_n^k · I`.
    pub fn scalar(dim: usize, conductor: u32, k: i64) -> UMatrix {
        let f = field(conductor);
        let phi = f.degree();
        let mut nums = vec![0i64; dim * dim * phi];
        let root = f.power(k).to_vec();
        for i in 0..dim {
            nums[(i * dim + i) * phi..(i * dim + i + 1) * phi].copy_from_slice(&root);
        }
        UMatrix { dim, field: f, den: 1, nums }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn conductor(&self) -> u32 {
        self.field.conductor()
    }

    fn phi(&self) -> usize {
        self.field.degree()
    }

    fn slot(&self, i: usize, j: usize) -> &[i64] {
        let phi = self.phi();
        let o = (i * self.dim + j) * phi;
        &self.nums[o..o + phi]
    }

    pub fn entry(&self, i: usize, j: usize) -> CycNum {
        let den = BigInt::from(self.den);
        let coeffs = self
            .slot(i, j)
            .iter()
            .map(|&c| BigRational::new(c.into(), den.clone()))
            .collect();
        CycNum::from_coeffs(self.conductor(), coeffs)
    }

    /// Row-major entries.
    pub fn entries(&self) -> Vec<CycNum> {
        (0..self.dim)
            .flat_map(|i| (0..self.dim).map(move |j| (i, j)))
            .map(|(i, j)| self.entry(i, j))
            .collect()
    }

    /// Re-expresses the matrix over `Q(ζ_m)`, `m` a multiple of the conductor.
    pub fn promote(&self, m: u32) -> UMatrix {
        if m == self.conductor() {
            return self.clone();
        }
        UMatrix::from_entries(self.dim, m, &self.entries()).expect("promotion keeps denominators")
    }

    pub fn is_identity(&self) -> bool {
        *self == UMatrix::identity(self.dim, self.conductor())
    }

    pub fn is_scalar(&self) -> bool {
        let phi = self.phi();
        let first = self.slot(0, 0);
        (0..self.dim).all(|i| {
            (0..self.dim).all(|j| {
                let s = self.slot(i, j);
                if i == j {
                    s == first
                } else {
                    s.iter().all(|&x| x == 0)
                }
            })
        }) && phi > 0
    }

    pub fn mul(&self, rhs: &UMatrix) -> Result<UMatrix, GroupError> {
        if self.dim != rhs.dim {
            return Err(GroupError::DimensionMismatch(self.dim, rhs.dim));
        }
        if self.conductor() != rhs.conductor() {
            let m = self.conductor().lcm(&rhs.conductor());
            return self.promote(m).mul(&rhs.promote(m));
        }
        let d = self.dim;
        let f = &self.field;
        let phi = f.degree();
        let nonzero = |m: &UMatrix| -> Vec<bool> {
            (0..d * d)
                .map(|k| m.nums[k * phi..(k + 1) * phi].iter().any(|&x| x != 0))
                .collect()
        };
        let (za, zb) = (nonzero(self), nonzero(rhs));
        let mut acc = vec![0i128; 2 * phi - 1];
        let mut out = vec![0i128; d * d * phi];
        for i in 0..d {
            for j in 0..d {
                acc.iter_mut().for_each(|x| *x = 0);
                let mut any = false;
                for k in 0..d {
                    if za[i * d + k] && zb[k * d + j] {
                        f.mul_acc(&mut acc, self.slot(i, k), rhs.slot(k, j));
                        any = true;
                    }
                }
                if any {
                    let o = (i * d + j) * phi;
                    f.reduce_acc(&acc, &mut out[o..o + phi]);
                }
            }
        }
        let den = self.den as i128 * rhs.den as i128;
        let (den, nums) = canonicalize(den, &mut out)?;
        Ok(UMatrix {
            dim: d,
            field: self.field.clone(),
            den,
            nums,
        })
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &UMatrix) -> Result<UMatrix, GroupError> {
        let m = self.conductor().lcm(&rhs.conductor());
        let (a, b) = (self.entries(), rhs.entries());
        let (da, db) = (self.dim, rhs.dim);
        let d = da * db;
        let mut e = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                e.push(&a[(i / db) * da + j / db] * &b[(i % db) * db + j % db]);
            }
        }
        UMatrix::from_entries(d, m, &e)
    }

    pub fn transpose(&self) -> UMatrix {
        let d = self.dim;
        let e = self.entries();
        let t: Vec<_> = (0..d * d).map(|k| e[(k % d) * d + k / d].clone()).collect();
        UMatrix::from_entries(d, self.conductor(), &t).unwrap()
    }

    /// Entrywise complex conjugate of the transpose.
    pub fn adjoint(&self) -> UMatrix {
        let d = self.dim;
        let e = self.entries();
        let t: Vec<_> = (0..d * d).map(|k| e[(k % d) * d + k / d].conj()).collect();
        UMatrix::from_entries(d, self.conductor(), &t).unwrap()
    }

    /// Scales every entry by an exact scalar.
    pub fn scale(&self, s: &CycNum) -> Result<UMatrix, GroupError> {
        let m = self.conductor().lcm(&s.conductor());
        let e: Vec<_> = self.entries().iter().map(|x| x * s).collect();
        UMatrix::from_entries(self.dim, m, &e)
    }

    pub fn trace(&self) -> CycNum {
        (0..self.dim)
            .map(|i| self.entry(i, i))
            .fold(CycNum::zero(self.conductor()), |a, b| a + b)
    }

    pub fn determinant(&self) -> CycNum {
        let (_, det) = gauss_jordan(self.dim, self.entries(), false);
        det
    }

    /// Exact inverse by Gauss-Jordan elimination over the field.
    pub fn inverse(&self) -> Result<UMatrix, GroupError> {
        let (inv, det) = gauss_jordan(self.dim, self.entries(), true);
        if det.is_zero() {
            return Err(GroupError::Singular);
        }
        UMatrix::from_entries(self.dim, self.conductor(), &inv.expect("invertible"))
    }

    pub fn pow(&self, mut e: u64) -> Result<UMatrix, GroupError> {
        let mut base = self.clone();
        let mut acc = UMatrix::identity(self.dim, self.conductor());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Multiplicative order, giving up after `limit` steps.
    pub fn order(&self, limit: u64) -> Result<Option<u64>, GroupError> {
        let mut p = self.clone();
        for k in 1..=limit {
            if p.is_identity() {
                return Ok(Some(k));
            }
            p = p.mul(self)?;
        }
        Ok(None)
    }

    fn to_key(&self) -> Result<Vec<i32>, GroupError> {
        let mut key = Vec::with_capacity(1 + self.nums.len());
        key.push(i32::try_from(self.den).map_err(|_| GroupError::Overflow)?);
        for &x in &self.nums {
            key.push(i32::try_from(x).map_err(|_| GroupError::Overflow)?);
        }
        Ok(key)
    }

    fn from_key(dim: usize, field: &Arc<Field>, key: &[i32]) -> UMatrix {
        UMatrix {
            dim,
            field: field.clone(),
            den: key[0] as i64,
            nums: key[1..].iter().map(|&x| x as i64).collect(),
        }
    }

    /// `tr(self)` and `tr(self²)` in kernel form `(den, numerators)`.
    fn trace_keys(&self) -> Result<(Vec<i64>, Vec<i64>), GroupError> {
        let d = self.dim;
        let phi = self.phi();
        let mut tr = vec![0i128; phi];
        for i in 0..d {
            for (t, &x) in tr.iter_mut().zip(self.slot(i, i)) {
                *t += x as i128;
            }
        }
        let (den, nums) = canonicalize(self.den as i128, &mut tr)?;
        let mut t1 = vec![den];
        t1.extend(nums);

        let mut acc = vec![0i128; 2 * phi - 1];
        for i in 0..d {
            for j in 0..d {
                let (a, b) = (self.slot(i, j), self.slot(j, i));
                if a.iter().any(|&x| x != 0) && b.iter().any(|&x| x != 0) {
                    self.field.mul_acc(&mut acc, a, b);
                }
            }
        }
        let mut sq = vec![0i128; phi];
        self.field.reduce_acc(&acc, &mut sq);
        let (den, nums) = canonicalize(self.den as i128 * self.den as i128, &mut sq)?;
        let mut t2 = vec![den];
        t2.extend(nums);
        Ok((t1, t2))
    }
}

fn trace_key_to_cyc(n: u32, key: &[i64]) -> CycNum {
    let den = BigInt::from(key[0]);
    CycNum::from_coeffs(
        n,
        key[1..]
            .iter()
            .map(|&c| BigRational::new(c.into(), den.clone()))
            .collect(),
    )
}

/// Returns `(inverse if requested and nonsingular, determinant)`.
fn gauss_jordan(d: usize, mut a: Vec<CycNum>, want_inverse: bool) -> (Option<Vec<CycNum>>, CycNum) {
    let n = a[0].conductor();
    let mut inv: Vec<CycNum> = (0..d * d)
        .map(|k| CycNum::from_int((k / d == k % d) as i64).promote(n))
        .collect();
    let mut det = CycNum::from_int(1).promote(n);
    for col in 0..d {
        let Some(piv) = (col..d).find(|&r| !a[r * d + col].is_zero()) else {
            return (None, CycNum::zero(n));
        };
        if piv != col {
            for j in 0..d {
                a.swap(piv * d + j, col * d + j);
                inv.swap(piv * d + j, col * d + j);
            }
            det = -det;
        }
        let p = a[col * d + col].clone();
        det = &det * &p;
        let pinv = p.inv().expect("nonzero pivot");
        for j in 0..d {
            a[col * d + j] = &a[col * d + j] * &pinv;
            if want_inverse {
                inv[col * d + j] = &inv[col * d + j] * &pinv;
            }
        }
        for r in 0..d {
            if r == col || a[r * d + col].is_zero() {
                continue;
            }
            let factor = a[r * d + col].clone();
            for j in 0..d {
                let t = &factor * &a[col * d + j];
                a[r * d + j] = &a[r * d + j] - &t;
                if want_inverse {
                    let t = &factor * &inv[col * d + j];
                    inv[r * d + j] = &inv[r * d + j] - &t;
                }
            }
        }
    }
    (want_inverse.then_some(inv), det)
}

impl fmt::Debug for UMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.entry(i, j).to_string()).collect())
            .collect();
        write!(f, "UMatrix(z{}; {:?})", self.conductor(), rows)
    }
}

/// Flat arena of element keys with an index-only hash table over it.
#[derive(Clone)]
struct ElementStore {
    stride: usize,
    data: Vec<i32>,
    table: HashTable<u32>,
}

impl ElementStore {
    fn new(stride: usize) -> ElementStore {
        ElementStore {
            stride,
            data: Vec::new(),
            table: HashTable::new(),
        }
    }

    fn len(&self) -> usize {
        self.data.len() / self.stride
    }

    fn get(&self, i: u32) -> &[i32] {
        let o = i as usize * self.stride;
        &self.data[o..o + self.stride]
    }

    fn hash(key: &[i32]) -> u64 {
        FxBuildHasher.hash_one(key)
    }

    fn find(&self, key: &[i32]) -> Option<u32> {
        self.table
            .find(Self::hash(key), |&i| self.get(i) == key)
            .copied()
    }

    /// Inserts if absent; returns the index and whether it was new.
    fn insert(&mut self, key: &[i32]) -> (u32, bool) {
        if let Some(i) = self.find(key) {
            return (i, false);
        }
        let idx = self.len() as u32;
        self.data.extend_from_slice(key);
        let ElementStore {
            stride, data, table, ..
        } = self;
        let stride = *stride;
        table.insert_unique(Self::hash(key), idx, |&i| {
            Self::hash(&data[i as usize * stride..(i as usize + 1) * stride])
        });
        (idx, true)
    }
}

/// Enumerated element set with per-element trace data.
#[derive(Clone)]
struct Closure {
    store: ElementStore,
    /// `(parent, generator)` with `element = parent · generator`
    parent: Vec<(u32, u32)>,
    inverse: Vec<u32>,
    trace: Vec<u32>,
    trace_sq: Vec<u32>,
    trace_table: Vec<Vec<i64>>,
    trace_index: HashMap<Vec<i64>, u32>,
    scalars: usize,
}

/// One entry of the aggregated trace profile.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceClass {
    pub trace: CycNum,
    pub inverse_trace: CycNum,
    pub count: u64,
}

/// Trace data of `g`, `g⁻¹`, `g²`, `g⁻²` with multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareTraceClass {
    pub trace: CycNum,
    pub inverse_trace: CycNum,
    pub square_trace: CycNum,
    pub inverse_square_trace: CycNum,
    pub count: u64,
}

/// A finite group given by generating matrices, with an optional closure.
#[derive(Clone)]
pub struct FiniteMatrixGroup {
    name: String,
    dim: usize,
    field: Arc<Field>,
    generators: Vec<UMatrix>,
    generator_inverses: Vec<UMatrix>,
    closure: Option<Closure>,
}

impl fmt::Debug for FiniteMatrixGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteMatrixGroup")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("conductor", &self.conductor())
            .field("generators", &self.generators.len())
            .field("order", &self.closure.as_ref().map(|c| c.store.len()))
            .finish()
    }
}

const CHUNK: usize = 2048;

impl FiniteMatrixGroup {
    /// Validates generators and brings them to a common conductor.
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        conductor: u32,
        generators: Vec<UMatrix>,
    ) -> Result<FiniteMatrixGroup, GroupError> {
        let mut n = conductor;
        for g in &generators {
            if g.dim != dim {
                return Err(GroupError::DimensionMismatch(dim, g.dim));
            }
            n = n.lcm(&g.conductor());
        }
        let generators: Vec<UMatrix> = generators.iter().map(|g| g.promote(n)).collect();
        let generator_inverses = generators
            .iter()
            .enumerate()
            .map(|(i, g)| g.inverse().map_err(|_| GroupError::SingularGenerator(i)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FiniteMatrixGroup {
            name: name.into(),
            dim,
            field: field(n),
            generators,
            generator_inverses,
            closure: None,
        })
    }

    /// Group from generators, enumerated up to `cap` elements.
    pub fn closure(
        name: impl Into<String>,
        dim: usize,
        conductor: u32,
        generators: Vec<UMatrix>,
        cap: usize,
    ) -> Result<FiniteMatrixGroup, GroupError> {
        let mut g = FiniteMatrixGroup::new(name, dim, conductor, generators)?;
        g.enumerate(cap)?;
        Ok(g)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn conductor(&self) -> u32 {
        self.field.conductor()
    }

    pub fn generators(&self) -> &[UMatrix] {
        &self.generators
    }

    pub fn is_enumerated(&self) -> bool {
        self.closure.is_some()
    }

    fn closed(&self) -> Result<&Closure, GroupError> {
        self.closure.as_ref().ok_or(GroupError::NotEnumerated)
    }

    /// Breadth-first closure under right multiplication by the generators.
    pub fn enumerate(&mut self, cap: usize) -> Result<(), GroupError> {
        if self.closure.is_some() {
            return Ok(());
        }
        let stride = 1 + self.dim * self.dim * self.field.degree();
        let mut store = ElementStore::new(stride);
        store.insert(&UMatrix::identity(self.dim, self.conductor()).to_key()?);
        let mut parent = vec![(0u32, u32::MAX)];
        let frontier: Vec<u32> = vec![0];
        let all: Vec<u32> = (0..self.generators.len() as u32).collect();
        self.expand(&mut store, &mut parent, frontier, &all, &all, cap)?;
        let mut closure = Closure {
            store,
            parent,
            inverse: Vec::new(),
            trace: Vec::new(),
            trace_sq: Vec::new(),
            trace_table: Vec::new(),
            trace_index: HashMap::new(),
            scalars: 0,
        };
        self.finish(&mut closure, 0)?;
        self.closure = Some(closure);
        Ok(())
    }

    /// Adds a generator to an enumerated group and extends the closure.
    pub fn extend(&mut self, generator: UMatrix, cap: usize) -> Result<(), GroupError> {
        let generator = generator.promote(self.conductor());
        if generator.dim != self.dim {
            return Err(GroupError::DimensionMismatch(self.dim, generator.dim));
        }
        let inv = generator
            .inverse()
            .map_err(|_| GroupError::SingularGenerator(self.generators.len()))?;
        self.generators.push(generator);
        self.generator_inverses.push(inv);
        let Some(mut closure) = self.closure.take() else {
            return Ok(());
        };
        let old = closure.store.len();
        let new_gen = [self.generators.len() as u32 - 1];
        let all: Vec<u32> = (0..self.generators.len() as u32).collect();
        let frontier: Vec<u32> = (0..old as u32).collect();
        let r = self.expand(
            &mut closure.store,
            &mut closure.parent,
            frontier,
            &new_gen,
            &all,
            cap,
        );
        if let Err(e) = r {
            self.closure = None;
            return Err(e);
        }
        self.finish(&mut closure, old)?;
        self.closure = Some(closure);
        Ok(())
    }

    /// Multiplies the first frontier by `first_gens`, every later one by
    /// `gens`, until nothing new appears.
    fn expand(
        &self,
        store: &mut ElementStore,
        parent: &mut Vec<(u32, u32)>,
        mut frontier: Vec<u32>,
        first_gens: &[u32],
        gens: &[u32],
        cap: usize,
    ) -> Result<(), GroupError> {
        let mut use_gens = first_gens;
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for chunk in frontier.chunks(CHUNK) {
                let store_ref = &*store;
                let products: Vec<Result<Vec<(Vec<i32>, u32, u32)>, GroupError>> = chunk
                    .par_iter()
                    .map(|&e| {
                        let m = UMatrix::from_key(self.dim, &self.field, store_ref.get(e));
                        use_gens
                            .iter()
                            .map(|&s| {
                                let p = m.mul(&self.generators[s as usize])?;
                                Ok((p.to_key()?, e, s))
                            })
                            .collect()
                    })
                    .collect();
                for batch in products {
                    for (key, e, s) in batch? {
                        let (idx, new) = store.insert(&key);
                        if new {
                            parent.push((e, s));
                            next.push(idx);
                            if store.len() > cap {
                                return Err(GroupError::CapExceeded(cap));
                            }
                        }
                    }
                }
            }
            frontier = next;
            use_gens = gens;
        }
        Ok(())
    }

    /// Fills inverse and trace tables for elements `from..`.
    fn finish(&self, c: &mut Closure, from: usize) -> Result<(), GroupError> {
        let total = c.store.len();
        if from == 0 {
            c.inverse = vec![0];
        }
        c.inverse.resize(total, u32::MAX);
        // element = parent · s  ⇒  element⁻¹ = s⁻¹ · parent⁻¹; batch elements
        // whose parents already have inverses
        let mut start = from.max(1);
        while start < total {
            let mut end = start;
            while end < total && (c.parent[end].0 as usize) < start && end - start < CHUNK {
                end += 1;
            }
            let store = &c.store;
            let inverse = &c.inverse;
            let found: Vec<Result<u32, GroupError>> = (start..end)
                .into_par_iter()
                .map(|e| {
                    let (p, s) = c.parent[e];
                    let pinv = UMatrix::from_key(self.dim, &self.field, store.get(inverse[p as usize]));
                    let m = self.generator_inverses[s as usize].mul(&pinv)?;
                    store.find(&m.to_key()?).ok_or(GroupError::Singular)
                })
                .collect();
            for (e, r) in (start..end).zip(found) {
                c.inverse[e] = r?;
            }
            start = end;
        }

        let store = &c.store;
        let keys: Vec<Result<(Vec<i64>, Vec<i64>, bool), GroupError>> = (from..total)
            .into_par_iter()
            .map(|e| {
                let m = UMatrix::from_key(self.dim, &self.field, store.get(e as u32));
                let (t1, t2) = m.trace_keys()?;
                Ok((t1, t2, m.is_scalar()))
            })
            .collect();
        for r in keys {
            let (t1, t2, scalar) = r?;
            let a = intern(&mut c.trace_table, &mut c.trace_index, t1);
            let b = intern(&mut c.trace_table, &mut c.trace_index, t2);
            c.trace.push(a);
            c.trace_sq.push(b);
            c.scalars += scalar as usize;
        }
        Ok(())
    }

    pub fn order(&self) -> Result<usize, GroupError> {
        Ok(self.closed()?.store.len())
    }

    /// `|G ∩ scalars|`.
    pub fn scalar_order(&self) -> Result<usize, GroupError> {
        Ok(self.closed()?.scalars)
    }

    pub fn element(&self, i: usize) -> Result<UMatrix, GroupError> {
        let c = self.closed()?;
        Ok(UMatrix::from_key(self.dim, &self.field, c.store.get(i as u32)))
    }

    pub fn elements(&self) -> Result<impl Iterator<Item = UMatrix> + '_, GroupError> {
        let c = self.closed()?;
        Ok((0..c.store.len()).map(move |i| UMatrix::from_key(self.dim, &self.field, c.store.get(i as u32))))
    }

    pub fn inverse_index(&self, i: usize) -> Result<usize, GroupError> {
        Ok(self.closed()?.inverse[i] as usize)
    }

    /// Index of `m` in the closure, if present.
    pub fn index_of(&self, m: &UMatrix) -> Result<Option<usize>, GroupError> {
        let c = self.closed()?;
        if m.dim != self.dim || self.conductor() % m.conductor() != 0 {
            return Ok(None);
        }
        let key = match m.promote(self.conductor()).to_key() {
            Ok(k) => k,
            Err(_) => return Ok(None),
        };
        Ok(c.store.find(&key).map(|i| i as usize))
    }

    pub fn contains(&self, m: &UMatrix) -> Result<bool, GroupError> {
        Ok(self.index_of(m)?.is_some())
    }

    /// Aggregated `(tr g, tr g⁻¹)` counts, sorted by descending count.
    pub fn trace_profile(&self) -> Result<Vec<TraceClass>, GroupError> {
        let c = self.closed()?;
        let mut counts: HashMap<(u32, u32), u64> = HashMap::new();
        for e in 0..c.store.len() {
            *counts
                .entry((c.trace[e], c.trace[c.inverse[e] as usize]))
                .or_default() += 1;
        }
        let n = self.conductor();
        let mut out: Vec<_> = counts
            .into_iter()
            .map(|((a, b), count)| {
                (
                    (a, b),
                    TraceClass {
                        trace: trace_key_to_cyc(n, &c.trace_table[a as usize]),
                        inverse_trace: trace_key_to_cyc(n, &c.trace_table[b as usize]),
                        count,
                    },
                )
            })
            .collect();
        out.sort_by(|x, y| y.1.count.cmp(&x.1.count).then(x.0.cmp(&y.0)));
        Ok(out.into_iter().map(|(_, t)| t).collect())
    }

    /// Profile including traces of squares, for symmetric/alternating squares.
    pub fn square_trace_profile(&self) -> Result<Vec<SquareTraceClass>, GroupError> {
        let c = self.closed()?;
        let mut counts: HashMap<[u32; 4], u64> = HashMap::new();
        for e in 0..c.store.len() {
            let inv = c.inverse[e] as usize;
            *counts
                .entry([c.trace[e], c.trace[inv], c.trace_sq[e], c.trace_sq[inv]])
                .or_default() += 1;
        }
        let n = self.conductor();
        let cyc = |i: u32| trace_key_to_cyc(n, &c.trace_table[i as usize]);
        let mut out: Vec<_> = counts.into_iter().collect();
        out.sort();
        Ok(out
            .into_iter()
            .map(|(k, count)| SquareTraceClass {
                trace: cyc(k[0]),
                inverse_trace: cyc(k[1]),
                square_trace: cyc(k[2]),
                inverse_square_trace: cyc(k[3]),
                count,
            })
            .collect())
    }

    /// Checks `tr(g⁻¹) = conj(tr g)` for every element.
    pub fn verify_trace_conjugation(&self) -> Result<bool, GroupError> {
        Ok(self
            .trace_profile()?
            .iter()
            .all(|t| t.inverse_trace == t.trace.conj()))
    }

    /// Subgroup generated by `gens`, enumerated.
    pub fn subgroup(&self, name: &str, gens: Vec<UMatrix>, cap: usize) -> Result<FiniteMatrixGroup, GroupError> {
        FiniteMatrixGroup::closure(name, self.dim, self.conductor(), gens, cap)
    }

    /// Commutator subgroup, as the normal closure of the generator commutators.
    pub fn derived_subgroup(&self, cap: usize) -> Result<FiniteMatrixGroup, GroupError> {
        self.closed()?;
        let gens = &self.generators;
        let invs = &self.generator_inverses;
        let mut h = FiniteMatrixGroup::closure(
            format!("[{0},{0}]", self.name),
            self.dim,
            self.conductor(),
            vec![],
            cap,
        )?;
        for i in 0..gens.len() {
            for j in i + 1..gens.len() {
                let c = invs[i].mul(&invs[j])?.mul(&gens[i])?.mul(&gens[j])?;
                if !h.contains(&c)? {
                    h.extend(c, cap)?;
                }
            }
        }
        // conjugate generators of H by generators of G until stable
        let mut checked = 0;
        while checked < h.generators.len() {
            let n = h.generators[checked].clone();
            for s in 0..gens.len() {
                let c = invs[s].mul(&n)?.mul(&gens[s])?;
                if !h.contains(&c)? {
                    h.extend(c, cap)?;
                }
            }
            checked += 1;
        }
        Ok(h)
    }

    /// Last term of the derived series.
    pub fn derived_series_limit(&self, cap: usize) -> Result<FiniteMatrixGroup, GroupError> {
        let mut g = self.clone();
        g.enumerate(cap)?;
        loop {
            let d = g.derived_subgroup(cap)?;
            if d.order()? == g.order()? {
                return Ok(g);
            }
            g = d;
        }
    }

    pub fn is_perfect(&self, cap: usize) -> Result<bool, GroupError> {
        Ok(self.derived_subgroup(cap)?.order()? == self.order()?)
    }

    /// Histogram of element orders.
    pub fn element_order_histogram(&self) -> Result<BTreeMap<u64, u64>, GroupError> {
        let c = self.closed()?;
        let limit = c.store.len() as u64;
        let orders: Vec<Result<u64, GroupError>> = (0..c.store.len())
            .into_par_iter()
            .map(|e| {
                let m = UMatrix::from_key(self.dim, &self.field, c.store.get(e as u32));
                Ok(m.order(limit)?.expect("element order bounded by group order"))
            })
            .collect();
        let mut hist = BTreeMap::new();
        for o in orders {
            *hist.entry(o?).or_default() += 1;
        }
        Ok(hist)
    }

    /// `⟨G, ζ_k·I⟩`, not enumerated.
    pub fn with_scalar(&self, k: u32) -> Result<FiniteMatrixGroup, GroupError> {
        let n = self.conductor().lcm(&k);
        let mut gens: Vec<UMatrix> = self.generators.iter().map(|g| g.promote(n)).collect();
        gens.push(UMatrix::scalar(self.dim, n, (n / k) as i64));
        FiniteMatrixGroup::new(format!("{}*z{}", self.name, k), self.dim, n, gens)
    }

    /// A small generating set chosen greedily from the closure.
    pub fn generating_subset(&self, cap: usize) -> Result<Vec<UMatrix>, GroupError> {
        let c = self.closed()?;
        let total = c.store.len();
        let mut h = FiniteMatrixGroup::closure("gen", self.dim, self.conductor(), vec![], cap)?;
        // walk the elements with a fixed stride coprime to the order
        let stride = (1..)
            .map(|k: usize| (total / 2 + k) % total.max(1))
            .find(|&s| s > 0 && s.gcd(&total) == 1)
            .unwrap_or(1);
        let mut e = 0usize;
        for _ in 0..total {
            if h.order()? == total {
                break;
            }
            e = (e + stride) % total;
            let m = self.element(e)?;
            if !h.contains(&m)? {
                h.extend(m, cap)?;
            }
        }
        Ok(h.generators)
    }
}

fn intern(table: &mut Vec<Vec<i64>>, index: &mut HashMap<Vec<i64>, u32>, key: Vec<i64>) -> u32 {
    if let Some(&i) = index.get(&key) {
        return i;
    }
    let i = table.len() as u32;
    table.push(key.clone());
    index.insert(key, i);
    i
}

/// Free-standing closure constructor.
pub fn closure(generators: Vec<UMatrix>, cap: usize) -> Result<FiniteMatrixGroup, GroupError> {
    let first = generators.first().ok_or(GroupError::EntryCount {
        expected: 1,
        found: 0,
    })?;
    let (dim, n) = (first.dim(), first.conductor());
    FiniteMatrixGroup::closure("G", dim, n, generators, cap)
}
