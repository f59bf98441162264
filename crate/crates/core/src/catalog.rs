//! Named groups: built-in constructions and curated generator data.

use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use num_integer::Integer;

use crate::cyclo::CycNum;
use crate::designs::{moments, DesignError};
use crate::format::{Expected, ExpectedFile, FormatError, GroupFile};
use crate::haar::haar_moment;
use crate::matrep::{FiniteMatrixGroup, GroupError, UMatrix};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error("unknown catalog entry {0:?}")]
    UnknownName(String),
    #[error("curated data for {name} not found at {path}")]
    DataMissing { name: String, path: String },
    #[error("{name} failed verification: {property}")]
    VerificationFailed { name: String, property: String },
    #[error("p^a = {0} exceeds 16")]
    TooLarge(u64),
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Design(#[from] DesignError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    BuiltIn,
    Curated,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::BuiltIn => "built-in",
            Kind::Curated => "curated-data",
        }
    }
}

/// Summary row of the catalog.
#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub kind: Kind,
    pub dim: usize,
    pub description: &'static str,
}

const ENTRIES: &[CatalogEntry] = &[
    CatalogEntry { name: "q8", kind: Kind::BuiltIn, dim: 2, description: "quaternion group {±1, ±iX, ±iZ, ±iXZ}" },
    CatalogEntry { name: "pauli_2_1", kind: Kind::BuiltIn, dim: 2, description: "single-qubit Pauli group with i adjoined, order 16" },
    CatalogEntry { name: "pauli_2_2", kind: Kind::BuiltIn, dim: 4, description: "two-qubit Pauli group with i adjoined, order 64" },
    CatalogEntry { name: "heisenberg_3_1", kind: Kind::BuiltIn, dim: 3, description: "extraspecial 3^(1+2) of exponent 3 (clock and shift)" },
    CatalogEntry { name: "heisenberg_5_1", kind: Kind::BuiltIn, dim: 5, description: "extraspecial 5^(1+2) of exponent 5 (clock and shift)" },
    CatalogEntry { name: "sl2_3_dim2", kind: Kind::BuiltIn, dim: 2, description: "binary tetrahedral group SL2(3)" },
    CatalogEntry { name: "sl2_5_dim2", kind: Kind::BuiltIn, dim: 2, description: "binary icosahedral group SL2(5)" },
    CatalogEntry { name: "clifford_1", kind: Kind::BuiltIn, dim: 2, description: "single-qubit Clifford group, order 192" },
    CatalogEntry { name: "clifford_2", kind: Kind::BuiltIn, dim: 4, description: "two-qubit Clifford group, order 92160" },
    CatalogEntry { name: "qutrit_normalizer", kind: Kind::BuiltIn, dim: 3, description: "normalizer of the qutrit Heisenberg group, 3^(1+2):SL2(3) up to scalars" },
    CatalogEntry { name: "sl3_2_dim3", kind: Kind::Curated, dim: 3, description: "Klein's SL3(2) times scalars" },
    CatalogEntry { name: "valentiner_3a6_dim3", kind: Kind::Curated, dim: 3, description: "Valentiner group 3.A6" },
    CatalogEntry { name: "two_a7_dim4", kind: Kind::Curated, dim: 4, description: "2.A7 in dimension 4" },
    CatalogEntry { name: "sp4_3_dim4", kind: Kind::Curated, dim: 4, description: "Sp4(3), derived subgroup of the reflection group G32" },
    CatalogEntry { name: "g29_dim4", kind: Kind::Curated, dim: 4, description: "complex reflection group G29" },
    CatalogEntry { name: "g32_dim4", kind: Kind::Curated, dim: 4, description: "complex reflection group G32" },
    CatalogEntry { name: "six_a7_dim6", kind: Kind::Curated, dim: 6, description: "6.A7 in dimension 6" },
    CatalogEntry { name: "six_l34_2_dim6", kind: Kind::Curated, dim: 6, description: "6.L3(4).2 in dimension 6" },
    CatalogEntry { name: "four1_l34_dim8", kind: Kind::Curated, dim: 8, description: "4_1.L3(4) in dimension 8" },
    CatalogEntry { name: "two_m12_dim10", kind: Kind::Curated, dim: 10, description: "2.M12 in dimension 10" },
];

pub fn list_catalog() -> &'static [CatalogEntry] {
    ENTRIES
}

pub fn entry(name: &str) -> Result<&'static CatalogEntry, CatalogError> {
    ENTRIES
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| CatalogError::UnknownName(name.to_string()))
}

/// Directory holding curated group files; `UDK_DATA_DIR` overrides it.
pub fn data_dir() -> PathBuf {
    match std::env::var_os("UDK_DATA_DIR") {
        Some(d) => PathBuf::from(d),
        None => Path::new(env!("CARGO_MANIFEST_DIR"))
            .ancestors()
            .nth(2)
            .expect("workspace root")
            .join("data"),
    }
}

fn mat(n: u32, d: usize, e: Vec<CycNum>) -> UMatrix {
    UMatrix::from_entries(d, n, &e).expect("well-formed built-in matrix")
}

fn int(k: i64) -> CycNum {
    CycNum::from_int(k)
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..p).take_while(|k| k * k <= p).all(|k| p % k != 0)
}

/// Kronecker product `I_{d^k} ⊗ m ⊗ I_{d^(a-1-k)}`.
fn on_site(m: &UMatrix, k: usize, a: usize) -> UMatrix {
    let d = m.dim();
    let mut out = UMatrix::identity(d.pow(k as u32), m.conductor());
    out = out.kron(m).expect("kron");
    out.kron(&UMatrix::identity(d.pow((a - 1 - k) as u32), m.conductor()))
        .expect("kron")
}

/// Generators of the extraspecial group of type `+` in dimension `p^a`.
///
/// For odd `p` these are clock and shift on each tensor factor; for `p = 2`
/// the Pauli operators together with `i·I`.
pub fn extraspecial_pauli(p: u32, a: u32) -> Result<FiniteMatrixGroup, CatalogError> {
    if !is_prime(p) {
        return Err(CatalogError::NotPrime(p));
    }
    let size = (p as u64).pow(a);
    if a == 0 || size > 16 {
        return Err(CatalogError::TooLarge(size));
    }
    let q = p as usize;
    let n = if p == 2 { 4 } else { p };
    let mut shift = vec![int(0); q * q];
    let mut clock = vec![int(0); q * q];
    for j in 0..q {
        shift[((j + 1) % q) * q + j] = int(1);
        clock[j * q + j] = CycNum::zeta(p, j as i64);
    }
    let (x, z) = (mat(n, q, shift), mat(n, q, clock));
    let mut gens = Vec::new();
    for k in 0..a as usize {
        gens.push(on_site(&x, k, a as usize));
        gens.push(on_site(&z, k, a as usize));
    }
    if p == 2 {
        gens.push(UMatrix::scalar(size as usize, 4, 1));
    }
    Ok(FiniteMatrixGroup::new(format!("pauli_{p}_{a}"), size as usize, n, gens)?)
}

pub fn q8() -> FiniteMatrixGroup {
    let i = CycNum::zeta(4, 1);
    let ix = mat(4, 2, vec![int(0), i.clone(), i.clone(), int(0)]);
    let iz = mat(4, 2, vec![i.clone(), int(0), int(0), -&i]);
    FiniteMatrixGroup::new("q8", 2, 4, vec![ix, iz]).expect("q8")
}

/// `1/√2 = (ζ₈ + ζ₈⁷)/2`.
fn inv_sqrt2() -> CycNum {
    &(&CycNum::zeta(8, 1) + &CycNum::zeta(8, 7)) * &CycNum::from_ratio(1, 2)
}

/// Clifford group on `a ∈ {1, 2}` qubits: Hadamard and phase on each site,
/// plus controlled-Z for two qubits.
pub fn clifford_group(a: u32) -> Result<FiniteMatrixGroup, CatalogError> {
    let r = inv_sqrt2();
    let h = mat(8, 2, vec![r.clone(), r.clone(), r.clone(), -&r]);
    let s = mat(8, 2, vec![int(1), int(0), int(0), CycNum::zeta(4, 1)]);
    let gens = match a {
        1 => vec![h, s],
        2 => {
            let mut cz = vec![int(0); 16];
            for (k, v) in [1, 1, 1, -1].into_iter().enumerate() {
                cz[k * 4 + k] = int(v);
            }
            vec![
                on_site(&h, 0, 2),
                on_site(&h, 1, 2),
                on_site(&s, 0, 2),
                on_site(&s, 1, 2),
                mat(8, 4, cz),
            ]
        }
        _ => return Err(CatalogError::TooLarge(2u64.pow(a))),
    };
    Ok(FiniteMatrixGroup::new(format!("clifford_{a}"), 1 << a, 8, gens)?)
}

/// Heisenberg group of a qutrit with Fourier and phase gates.
pub fn qutrit_normalizer() -> FiniteMatrixGroup {
    let w = |k: i64| CycNum::zeta(3, k);
    let mut gens = extraspecial_pauli(3, 1).expect("3^(1+2)").generators().to_vec();
    // 1/√-3 with √-3 = 1 + 2ζ₃
    let s = &(&int(1) + &(&int(2) * &w(1))) * &CycNum::from_ratio(-1, 3);
    let fourier: Vec<CycNum> = (0..9).map(|k| &s * &w((k / 3) * (k % 3))).collect();
    gens.push(mat(3, 3, fourier));
    gens.push(mat(3, 3, vec![int(1), int(0), int(0), int(0), int(1), int(0), int(0), int(0), w(1)]));
    FiniteMatrixGroup::new("qutrit_normalizer", 3, 3, gens).expect("qutrit normalizer")
}

/// `SL₂(3)` as `Q₈` extended by an order-3 Clifford element of determinant 1.
pub fn sl2_3_dim2() -> FiniteMatrixGroup {
    let mut gens = q8().generators().to_vec();
    let i = CycNum::zeta(4, 1);
    let half = CycNum::from_ratio(1, 2);
    let e = |re: i64, im: i64| &(&int(re) + &(&int(im) * &i)) * &half;
    gens.push(mat(4, 2, vec![e(-1, 1), e(1, 1), e(-1, 1), e(-1, -1)]));
    FiniteMatrixGroup::new("sl2_3_dim2", 2, 4, gens).expect("sl2(3)")
}

/// Binary icosahedral group with Klein's generators over `Q(ζ₅)`.
pub fn sl2_5_dim2() -> FiniteMatrixGroup {
    let e = |k: i64| CycNum::zeta(5, k);
    let s = mat(5, 2, vec![e(3), int(0), int(0), e(2)]);
    // 1/√5 with √5 = 1 + 2(ζ₅ + ζ₅⁴)
    let sqrt5 = &int(1) + &(&int(2) * &(&e(1) + &e(4)));
    let r = &sqrt5 * &CycNum::from_ratio(1, 5);
    let a = &e(1) - &e(4);
    let b = &e(2) - &e(3);
    let t = mat(5, 2, vec![-&(&r * &a), &r * &b, &r * &b, &r * &a]);
    FiniteMatrixGroup::new("sl2_5_dim2", 2, 5, vec![s, t]).expect("sl2(5)")
}

fn builtin(name: &str) -> Option<FiniteMatrixGroup> {
    let mut g = match name {
        "q8" => q8(),
        "pauli_2_1" => extraspecial_pauli(2, 1).ok()?,
        "pauli_2_2" => extraspecial_pauli(2, 2).ok()?,
        "heisenberg_3_1" => extraspecial_pauli(3, 1).ok()?,
        "heisenberg_5_1" => extraspecial_pauli(5, 1).ok()?,
        "sl2_3_dim2" => sl2_3_dim2(),
        "sl2_5_dim2" => sl2_5_dim2(),
        "clifford_1" => clifford_group(1).ok()?,
        "clifford_2" => clifford_group(2).ok()?,
        "qutrit_normalizer" => qutrit_normalizer(),
        _ => return None,
    };
    g.set_name(name);
    Some(g)
}

fn expect(order: u64, scalar: u64, ms: &[u64], max_t: usize) -> Expected {
    Expected {
        order: Some(order),
        scalar_order: Some(scalar),
        moments: ms.iter().enumerate().map(|(i, m)| (i + 1, m.to_string())).collect(),
        max_t: Some(max_t),
        moments_above: Default::default(),
    }
}

/// Expectations for built-in entries.
fn builtin_expected(name: &str) -> Expected {
    match name {
        "q8" => expect(8, 2, &[1, 4, 16], 1),
        "pauli_2_1" => expect(16, 4, &[1, 4, 16], 1),
        "pauli_2_2" => expect(64, 4, &[1, 16, 256], 1),
        "heisenberg_3_1" => expect(27, 3, &[1, 9, 81], 1),
        "heisenberg_5_1" => expect(125, 5, &[1, 25, 625], 1),
        "sl2_3_dim2" => expect(24, 2, &[1, 2, 6], 2),
        "sl2_5_dim2" => {
            let mut e = expect(120, 2, &[1, 2, 5, 14, 42], 5);
            e.moments_above.insert(6, "132".into());
            e
        }
        "clifford_1" => expect(192, 8, &[1, 2, 5, 15], 3),
        "clifford_2" => {
            let mut e = expect(92160, 8, &[1, 2, 6], 3);
            e.moments_above.insert(4, "24".into());
            e
        }
        "qutrit_normalizer" => {
            let mut e = expect(0, 0, &[1, 2], 2);
            e.order = None;
            e.scalar_order = None;
            e.moments_above.insert(3, "6".into());
            e
        }
        _ => Expected::default(),
    }
}

fn curated_paths(name: &str) -> (PathBuf, PathBuf) {
    let dir = data_dir();
    (
        dir.join(format!("{name}.json")),
        dir.join(format!("{name}.expected.json")),
    )
}

/// Group file for a catalog entry: generated for built-ins, read from the
/// data directory for curated entries.
pub fn group_file(name: &str) -> Result<GroupFile, CatalogError> {
    let e = entry(name)?;
    match e.kind {
        Kind::BuiltIn => {
            let g = builtin(name).expect("listed built-in");
            let mut f = GroupFile::from_group(&g);
            f.expected = Some(builtin_expected(name));
            f.provenance = Some(format!("built-in construction: {}", e.description));
            Ok(f)
        }
        Kind::Curated => {
            let (gens, exp) = curated_paths(name);
            if !gens.exists() {
                return Err(CatalogError::DataMissing {
                    name: name.to_string(),
                    path: gens.display().to_string(),
                });
            }
            let mut f = GroupFile::read(&gens)?;
            if exp.exists() {
                f.expected = Some(ExpectedFile::read(&exp)?.expected);
            }
            Ok(f)
        }
    }
}

/// Unenumerated group for a catalog entry.
pub fn group(name: &str) -> Result<FiniteMatrixGroup, CatalogError> {
    let e = entry(name)?;
    if e.kind == Kind::BuiltIn {
        return Ok(builtin(name).expect("listed built-in"));
    }
    let mut g = group_file(name)?.group()?;
    g.set_name(name);
    Ok(g)
}

/// Writes the canonical group file for `name`.
pub fn emit(name: &str, path: &Path) -> Result<(), CatalogError> {
    Ok(group_file(name)?.write(path)?)
}

/// One verified property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub property: String,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct Verification {
    pub name: String,
    pub checks: Vec<Check>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass)
    }
}

/// Checks an enumerated group against expectations.
pub fn check_expected(g: &FiniteMatrixGroup, exp: &Expected) -> Result<Vec<Check>, CatalogError> {
    let mut checks = Vec::new();
    fn push(checks: &mut Vec<Check>, property: String, expected: String, computed: String) {
        let pass = expected == computed;
        checks.push(Check {
            property,
            expected,
            computed,
            pass,
        });
    }
    if let Some(o) = exp.order {
        push(&mut checks, "order".into(), o.to_string(), g.order()?.to_string());
    }
    if let Some(s) = exp.scalar_order {
        push(&mut checks, "scalar order".into(), s.to_string(), g.scalar_order()?.to_string());
    }
    push(
        &mut checks,
        "tr(g^-1) = conj(tr g)".into(),
        "true".into(),
        g.verify_trace_conjugation()?.to_string(),
    );
    let t_top = exp
        .moments
        .keys()
        .chain(exp.moments_above.keys())
        .copied()
        .chain(exp.max_t.map(|m| m + 1))
        .max()
        .unwrap_or(0);
    let ms = if t_top > 0 { moments(g, t_top)? } else { Vec::new() };
    for (t, m) in &exp.moments {
        push(&mut checks, format!("M{}", 2 * t), m.clone(), ms[t - 1].to_string());
    }
    for (t, m) in &exp.moments_above {
        let bound: BigUint = m.parse().map_err(|_| CatalogError::VerificationFailed {
            name: g.name().to_string(),
            property: format!("unparsable bound {m:?}"),
        })?;
        let ok = ms[t - 1] > bound;
        checks.push(Check {
            property: format!("M{} > {}", 2 * t, m),
            expected: "true".into(),
            computed: format!("{} ({})", ok, ms[t - 1]),
            pass: ok,
        });
    }
    if let Some(mt) = exp.max_t {
        let d = g.dim();
        let computed = ms
            .iter()
            .enumerate()
            .take_while(|(i, m)| **m == haar_moment(d, i + 1))
            .count();
        push(&mut checks, "max_t".into(), mt.to_string(), computed.to_string());
    }
    Ok(checks)
}

/// Loads, enumerates and verifies an entry.
pub fn verify(name: &str, cap: usize) -> Result<(FiniteMatrixGroup, Verification), CatalogError> {
    let f = group_file(name)?;
    let mut g = group(name)?;
    g.enumerate(cap)?;
    let checks = check_expected(&g, &f.expected.unwrap_or_default())?;
    Ok((
        g,
        Verification {
            name: name.to_string(),
            checks,
        },
    ))
}

/// Loads an entry and fails unless every expectation holds.
pub fn load(name: &str, cap: usize) -> Result<FiniteMatrixGroup, CatalogError> {
    let (g, v) = verify(name, cap)?;
    if let Some(c) = v.first_failure() {
        return Err(CatalogError::VerificationFailed {
            name: name.to_string(),
            property: format!("{}: expected {}, computed {}", c.property, c.expected, c.computed),
        });
    }
    Ok(g)
}

/// Smallest prime not dividing `n`.
pub fn coprime_prime(n: usize) -> u32 {
    (2u32..)
        .find(|&p| is_prime(p) && n.gcd(&(p as usize)) == 1)
        .expect("primes are unbounded")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrep::DEFAULT_CAP;

    #[test]
    fn builtins_verify() {
        for e in ENTRIES.iter().filter(|e| e.kind == Kind::BuiltIn && e.name != "clifford_2") {
            let (_, v) = verify(e.name, DEFAULT_CAP).unwrap();
            assert!(v.passed(), "{}: {:?}", e.name, v.first_failure());
        }
    }

    #[test]
    fn extraspecial_limits() {
        assert_eq!(extraspecial_pauli(2, 5).unwrap_err(), CatalogError::TooLarge(32));
        assert_eq!(extraspecial_pauli(4, 1).unwrap_err(), CatalogError::NotPrime(4));
        let mut e = extraspecial_pauli(3, 1).unwrap();
        e.enumerate(1000).unwrap();
        let hist = e.element_order_histogram().unwrap();
        assert_eq!(hist.into_iter().collect::<Vec<_>>(), vec![(1, 1), (3, 26)]);
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(group("nope"), Err(CatalogError::UnknownName(_))));
    }
}
