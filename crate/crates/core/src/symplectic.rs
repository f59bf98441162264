//! Matrix groups over F_p preserving the standard symplectic form: orbits on
//! nonzero vectors, transitivity certificates, the exhaustive search for
//! transitive subgroups of Sp₂(p), and curated witnesses in higher rank.

use std::collections::{BTreeMap, VecDeque};
use std::path::PathBuf;

use hashbrown::HashMap;
use rustc_hash::{FxBuildHasher, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::format::{FormatError, GroupFile};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymplecticError {
    #[error("generator {0} does not preserve the symplectic form")]
    NotSymplectic(usize),
    #[error("unsupported prime {0} (expected one of 3, 5, 7, 11, 13)")]
    UnsupportedPrime(u32),
    #[error("modulus {0} is not a prime")]
    NotPrime(u32),
    #[error("matrices must be 2n x 2n with n >= 1, got {0}")]
    BadDimension(usize),
    #[error("unknown witness {0:?}")]
    UnknownWitness(String),
    #[error("group has more than {0} elements")]
    CapExceeded(usize),
    #[error(transparent)]
    Format(#[from] FormatError),
}

/// Row-major `2n × 2n` matrix over F_p.
pub type FpMatrix = Vec<u32>;

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|k| k * k <= p).all(|k| p % k != 0)
}

fn mat_mul(p: u32, d: usize, a: &[u32], b: &[u32]) -> FpMatrix {
    let mut c = vec![0u32; d * d];
    for i in 0..d {
        for k in 0..d {
            let x = a[i * d + k];
            if x == 0 {
                continue;
            }
            for j in 0..d {
                c[i * d + j] = (c[i * d + j] + x * b[k * d + j]) % p;
            }
        }
    }
    c
}

fn identity(d: usize) -> FpMatrix {
    let mut m = vec![0; d * d];
    for i in 0..d {
        m[i * d + i] = 1;
    }
    m
}

/// Gram matrix `[[0, I], [−I, 0]]`.
pub fn standard_form(p: u32, n: usize) -> FpMatrix {
    let d = 2 * n;
    let mut j = vec![0; d * d];
    for i in 0..n {
        j[i * d + n + i] = 1;
        j[(n + i) * d + i] = p - 1;
    }
    j
}

fn preserves_form(p: u32, n: usize, g: &[u32]) -> bool {
    let d = 2 * n;
    let j = standard_form(p, n);
    let mut gt = vec![0; d * d];
    for i in 0..d {
        for k in 0..d {
            gt[k * d + i] = g[i * d + k];
        }
    }
    mat_mul(p, d, &mat_mul(p, d, &gt, &j), g) == j
}

/// Subgroup of Sp_{2n}(p) given by generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SympGroup {
    p: u32,
    n: usize,
    generators: Vec<FpMatrix>,
}

/// `(p^{2n} − 1)` divides `|H|`, witnessing transitivity through the
/// orbit–stabilizer index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub orbit: u64,
    pub order: u64,
    pub stabilizer: u64,
}

impl SympGroup {
    /// Checks primality, shape and that every generator preserves the form.
    /// Symplectic matrices are automatically invertible.
    pub fn new(p: u32, n: usize, generators: Vec<FpMatrix>) -> Result<SympGroup, SymplecticError> {
        if !is_prime(p) {
            return Err(SymplecticError::NotPrime(p));
        }
        let d = 2 * n;
        if n == 0 {
            return Err(SymplecticError::BadDimension(0));
        }
        for (i, g) in generators.iter().enumerate() {
            if g.len() != d * d {
                return Err(SymplecticError::BadDimension(d));
            }
            if g.iter().any(|&x| x >= p) || !preserves_form(p, n, g) {
                return Err(SymplecticError::NotSymplectic(i));
            }
        }
        Ok(SympGroup { p, n, generators })
    }

    pub fn from_file(f: &GroupFile) -> Result<SympGroup, SymplecticError> {
        let (p, gens) = f.modular_matrices()?;
        if f.dimension % 2 != 0 {
            return Err(SymplecticError::BadDimension(f.dimension));
        }
        SympGroup::new(p, f.dimension / 2, gens)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[FpMatrix] {
        &self.generators
    }

    fn vector_count(&self) -> usize {
        (self.p as usize).pow(2 * self.n as u32)
    }

    fn apply(&self, g: &[u32], v: usize) -> usize {
        let d = 2 * self.n;
        let p = self.p as usize;
        let mut x = vec![0usize; d];
        let mut r = v;
        for c in x.iter_mut() {
            *c = r % p;
            r /= p;
        }
        let mut out = 0;
        for i in (0..d).rev() {
            let s: usize = (0..d).map(|k| g[i * d + k] as usize * x[k]).sum();
            out = out * p + s % p;
        }
        out
    }

    /// Sorted orbit sizes on the `p^{2n} − 1` nonzero vectors.
    pub fn orbits(&self) -> Vec<u64> {
        let total = self.vector_count();
        let mut seen = vec![false; total];
        let mut sizes = Vec::new();
        for start in 1..total {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut queue = vec![start];
            let mut i = 0;
            while i < queue.len() {
                let v = queue[i];
                for g in &self.generators {
                    let w = self.apply(g, v);
                    if !seen[w] {
                        seen[w] = true;
                        queue.push(w);
                    }
                }
                i += 1;
            }
            sizes.push(queue.len() as u64);
        }
        sizes.sort_unstable();
        sizes
    }

    pub fn is_transitive(&self) -> bool {
        self.orbits().len() == 1
    }

    /// Order of the generated group, by closure.
    pub fn order(&self, cap: usize) -> Result<u64, SymplecticError> {
        Ok(self.elements(cap)?.len() as u64)
    }

    /// All elements, identity first.
    pub fn elements(&self, cap: usize) -> Result<Vec<FpMatrix>, SymplecticError> {
        let d = 2 * self.n;
        let id = identity(d);
        let mut seen: FxHashSet<FpMatrix> = FxHashSet::default();
        seen.insert(id.clone());
        let mut out = vec![id];
        let mut i = 0;
        while i < out.len() {
            for g in &self.generators {
                let h = mat_mul(self.p, d, &out[i], g);
                if seen.insert(h.clone()) {
                    if out.len() >= cap {
                        return Err(SymplecticError::CapExceeded(cap));
                    }
                    out.push(h);
                }
            }
            i += 1;
        }
        Ok(out)
    }

    /// Transitivity together with the divisibility `p^{2n} − 1 | |H|`;
    /// `None` if the group is not transitive.
    pub fn transitivity_certificate(&self, cap: usize) -> Result<Option<Certificate>, SymplecticError> {
        if !self.is_transitive() {
            return Ok(None);
        }
        let orbit = self.vector_count() as u64 - 1;
        let order = self.order(cap)?;
        if order % orbit != 0 {
            return Ok(None);
        }
        Ok(Some(Certificate {
            orbit,
            order,
            stabilizer: order / orbit,
        }))
    }
}

/// Invariants identifying a subgroup class.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fingerprint {
    pub order: u64,
    pub center_order: u64,
    pub derived_order: u64,
    pub order_histogram: BTreeMap<u64, u64>,
}

/// One conjugacy class of transitive subgroups of Sp₂(p).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitiveClass {
    pub fingerprint: Fingerprint,
    pub class_size: u64,
    pub generators: Vec<FpMatrix>,
}

pub const SEARCH_PRIMES: [u32; 5] = [3, 5, 7, 11, 13];

/// Elements of a finite matrix group over F_p with their multiplication table.
struct TableGroup {
    p: u32,
    n: usize,
    elems: Vec<FpMatrix>,
    table: Vec<u16>,
    inv: Vec<u16>,
    order: Vec<u64>,
}

/// Largest group handled by the table-based subgroup search.
pub const TABLE_LIMIT: usize = 8192;

impl TableGroup {
    /// `elems` must be closed under multiplication.
    fn new(p: u32, n: usize, mut elems: Vec<FpMatrix>) -> TableGroup {
        let d = 2 * n;
        let id = elems.iter().position(|e| *e == identity(d)).expect("identity");
        elems.swap(0, id);
        let m = elems.len();
        let table: Vec<u16> = {
            use rayon::prelude::*;
            let index: HashMap<&FpMatrix, u16, FxBuildHasher> =
                elems.iter().enumerate().map(|(i, e)| (e, i as u16)).collect();
            (0..m * m)
                .into_par_iter()
                .map(|ij| index[&mat_mul(p, d, &elems[ij / m], &elems[ij % m])])
                .collect()
        };
        let inv = (0..m)
            .map(|i| (0..m).find(|&j| table[i * m + j] == 0).unwrap() as u16)
            .collect();
        let order = (0..m)
            .map(|i| {
                let (mut x, mut k) = (i, 1);
                while x != 0 {
                    x = table[x * m + i] as usize;
                    k += 1;
                }
                k
            })
            .collect();
        TableGroup {
            p,
            n,
            elems,
            table,
            inv,
            order,
        }
    }

    fn len(&self) -> usize {
        self.elems.len()
    }

    fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.len() + b] as usize
    }

    /// Closure of `set ∪ {g}`, where `set` is a subgroup given by its elements.
    fn join(&self, set: &Bits, elems: &[usize], gens: &[usize]) -> (Bits, Vec<usize>) {
        let mut bits = set.clone();
        let mut list = elems.to_vec();
        let mut i = 0;
        // products of every element with the generators until stable
        let all_gens: Vec<usize> = gens.to_vec();
        while i < list.len() {
            let x = list[i];
            for &g in &all_gens {
                let y = self.mul(x, g);
                if !bits.get(y) {
                    bits.set(y);
                    list.push(y);
                }
            }
            i += 1;
        }
        (bits, list)
    }

    fn conjugate(&self, x: usize, set: &[usize]) -> Bits {
        let mut b = Bits::new(self.len());
        let xi = self.inv[x] as usize;
        for &h in set {
            b.set(self.mul(self.mul(xi, h), x));
        }
        b
    }

    fn fingerprint(&self, elems: &[usize]) -> Fingerprint {
        let center = elems
            .iter()
            .filter(|&&z| elems.iter().all(|&h| self.mul(z, h) == self.mul(h, z)))
            .count() as u64;
        let mut comms: Vec<usize> = Vec::new();
        let mut cbits = Bits::new(self.len());
        for &a in elems {
            for &b in elems {
                let c = self.mul(self.mul(self.inv[a] as usize, self.inv[b] as usize), self.mul(a, b));
                if !cbits.get(c) {
                    cbits.set(c);
                    comms.push(c);
                }
            }
        }
        let (_, derived) = self.join(&single(self.len()), &[0], &comms);
        let mut hist = BTreeMap::new();
        for &x in elems {
            *hist.entry(self.order[x]).or_insert(0) += 1;
        }
        Fingerprint {
            order: elems.len() as u64,
            center_order: center,
            derived_order: derived.len() as u64,
            order_histogram: hist,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Bits {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
}

fn single(n: usize) -> Bits {
    let mut b = Bits::new(n);
    b.set(0);
    b
}

#[derive(Clone)]
struct SubgroupRep {
    bits: Bits,
    elems: Vec<usize>,
    gens: Vec<usize>,
    class_size: u64,
}

struct Search<'a> {
    g: &'a TableGroup,
    /// class id of every subgroup seen, keyed by element set
    class_of: HashMap<Bits, usize, FxBuildHasher>,
    reps: Vec<SubgroupRep>,
    queue: VecDeque<usize>,
}

impl Search<'_> {
    fn add(&mut self, bits: Bits, elems: Vec<usize>, gens: Vec<usize>) {
        if self.class_of.contains_key(&bits) {
            return;
        }
        let id = self.reps.len();
        let mut class_size = 0;
        for x in 0..self.g.len() {
            if self.class_of.insert(self.g.conjugate(x, &elems), id).is_none() {
                class_size += 1;
            }
        }
        self.reps.push(SubgroupRep {
            bits,
            elems,
            gens,
            class_size,
        });
        self.queue.push_back(id);
    }
}

/// Transitive subgroups of Sp₂(p) up to conjugacy, sorted by fingerprint.
///
/// Every subgroup is reached from the trivial group by repeatedly adjoining
/// one element; keeping one representative per conjugacy class and
/// adjoining every element to it reaches a conjugate of every subgroup.
pub fn search_transitive_2dim(p: u32) -> Result<Vec<TransitiveClass>, SymplecticError> {
    if !SEARCH_PRIMES.contains(&p) {
        return Err(SymplecticError::UnsupportedPrime(p));
    }
    let mut elems = Vec::new();
    for a in 0..p {
        for b in 0..p {
            for c in 0..p {
                for d in 0..p {
                    if (a * d + p * p - b * c) % p == 1 {
                        elems.push(vec![a, b, c, d]);
                    }
                }
            }
        }
    }
    Ok(transitive_classes(&TableGroup::new(p, 1, elems)))
}

/// Subgroups of `H` transitive on nonzero vectors, up to conjugacy in `H`,
/// by the same exhaustive search as [`search_transitive_2dim`].
pub fn transitive_subgroup_classes(h: &SympGroup) -> Result<Vec<TransitiveClass>, SymplecticError> {
    let elems = h.elements(TABLE_LIMIT)?;
    Ok(transitive_classes(&TableGroup::new(h.p, h.n, elems)))
}

fn transitive_classes(g: &TableGroup) -> Vec<TransitiveClass> {
    let m = g.len();
    let mut search = Search {
        g,
        class_of: HashMap::default(),
        reps: Vec::new(),
        queue: VecDeque::new(),
    };
    search.add(single(m), vec![0], vec![]);
    while let Some(id) = search.queue.pop_front() {
        let rep = search.reps[id].clone();
        let mut tried = Bits::new(m);
        for x in 0..m {
            if rep.bits.get(x) || tried.get(x) {
                continue;
            }
            let mut gens = rep.gens.clone();
            gens.push(x);
            let (bits, elems) = g.join(&rep.bits, &rep.elems, &gens);
            // every element of the coset Hx gives the same join
            for &h in &rep.elems {
                tried.set(g.mul(h, x));
            }
            search.add(bits, elems, gens);
        }
    }
    let d = 2 * g.n;
    let target = (g.p as usize).pow(d as u32) - 1;
    let mut out: Vec<TransitiveClass> = search
        .reps
        .iter()
        .filter(|r| {
            // images of the first basis vector are the first columns
            let cols: FxHashSet<Vec<u32>> = r
                .elems
                .iter()
                .map(|&x| (0..d).map(|i| g.elems[x][i * d]).collect())
                .collect();
            cols.len() == target
        })
        .map(|r| TransitiveClass {
            fingerprint: g.fingerprint(&r.elems),
            class_size: r.class_size,
            generators: r.gens.iter().map(|&x| g.elems[x].clone()).collect(),
        })
        .collect();
    out.sort_by(|a, b| a.fingerprint.cmp(&b.fingerprint));
    out
}

/// Curated witness names.
pub const WITNESSES: [&str; 9] = [
    "sl2_9_in_sp4_3",
    "sl2_8_in_sp6_2",
    "su3_3_in_sp6_2",
    "sl2_13_in_sp6_3",
    "sp4_3_order160",
    "sp4_3_order320",
    "two_s5_in_sp4_3",
    "sl2_9_2_in_sp4_3",
    "sp4_3_order1920",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessCheck {
    pub property: String,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub name: String,
    pub p: u32,
    pub dimension: usize,
    pub orbits: Vec<u64>,
    pub checks: Vec<WitnessCheck>,
}

impl WitnessReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }
}

pub fn witness_path(name: &str) -> PathBuf {
    crate::catalog::data_dir().join("witnesses").join(format!("{name}.json"))
}

/// Loads a curated witness and checks form preservation, group order and
/// transitivity with its certificate. Property failures are reported, not
/// raised.
pub fn verify_witness(name: &str, cap: usize) -> Result<WitnessReport, SymplecticError> {
    if !WITNESSES.contains(&name) {
        return Err(SymplecticError::UnknownWitness(name.to_string()));
    }
    let file = GroupFile::read(&witness_path(name))?;
    let expected_order = file.expected.as_ref().and_then(|e| e.order);
    let (p, gens) = file.modular_matrices()?;
    let n = file.dimension / 2;
    let mut checks = Vec::new();
    let mut check = |property: &str, expected: String, computed: String| {
        checks.push(WitnessCheck {
            property: property.to_string(),
            pass: expected == computed,
            expected,
            computed,
        })
    };
    let form_ok = file.dimension % 2 == 0 && gens.iter().all(|g| g.len() == file.dimension.pow(2) && preserves_form(p, n, g));
    check("preserves symplectic form", "true".into(), form_ok.to_string());
    let mut orbits = Vec::new();
    if form_ok {
        let h = SympGroup::new(p, n, gens)?;
        orbits = h.orbits();
        let order = h.order(cap)?;
        if let Some(o) = expected_order {
            check("order", o.to_string(), order.to_string());
        }
        check("transitive", "true".into(), (orbits.len() == 1).to_string());
        let cert = h.transitivity_certificate(cap)?;
        check(
            "orbit length divides order",
            "true".into(),
            cert.is_some().to_string(),
        );
    }
    Ok(WitnessReport {
        name: name.to_string(),
        p,
        dimension: file.dimension,
        orbits,
        checks,
    })
}
