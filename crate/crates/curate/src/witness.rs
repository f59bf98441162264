//! F_p generator data for transitive subgroups of symplectic groups.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashSet;

use udk_core::symplectic::{FpMatrix, SympGroup};

/// Finite field F_{p^k} by tables; element `a` has base-`p` digits as its
/// polynomial coefficients.
pub struct Gf {
    pub p: u32,
    pub k: u32,
    pub q: usize,
    add: Vec<u16>,
    mul: Vec<u16>,
}

impl Gf {
    /// `modulus` lists the low coefficients of a monic irreducible of degree `k`.
    pub fn new(p: u32, k: u32, modulus: &[u32]) -> Gf {
        let q = p.pow(k) as usize;
        let digits = |a: usize| -> Vec<u32> {
            let mut d = vec![0; k as usize];
            let mut r = a;
            for x in d.iter_mut() {
                *x = (r % p as usize) as u32;
                r /= p as usize;
            }
            d
        };
        let pack = |d: &[u32]| d.iter().rev().fold(0usize, |a, &x| a * p as usize + x as usize);
        let mut add = vec![0u16; q * q];
        let mut mul = vec![0u16; q * q];
        for a in 0..q {
            for b in 0..q {
                let (da, db) = (digits(a), digits(b));
                let s: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[a * q + b] = pack(&s) as u16;
                let mut prod = vec![0u32; 2 * k as usize];
                for i in 0..k as usize {
                    for j in 0..k as usize {
                        prod[i + j] = (prod[i + j] + da[i] * db[j]) % p;
                    }
                }
                for top in (k as usize..2 * k as usize).rev() {
                    let c = prod[top];
                    prod[top] = 0;
                    for (j, &m) in modulus.iter().enumerate() {
                        let idx = top - k as usize + j;
                        prod[idx] = (prod[idx] + (p - 1) * c % p * m) % p;
                    }
                }
                mul[a * q + b] = pack(&prod[..k as usize]) as u16;
            }
        }
        Gf { p, k, q, add, mul }
    }

    pub fn add(&self, a: u16, b: u16) -> u16 {
        self.add[a as usize * self.q + b as usize]
    }
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        self.mul[a as usize * self.q + b as usize]
    }
    pub fn neg(&self, a: u16) -> u16 {
        self.mul(a, self.from_int(-1))
    }
    pub fn sub(&self, a: u16, b: u16) -> u16 {
        self.add(a, self.neg(b))
    }
    pub fn pow(&self, a: u16, e: u64) -> u16 {
        (0..e).fold(1, |x, _| self.mul(x, a))
    }
    pub fn inv(&self, a: u16) -> u16 {
        assert!(a != 0);
        self.pow(a, self.q as u64 - 2)
    }
    pub fn from_int(&self, x: i64) -> u16 {
        x.rem_euclid(self.p as i64) as u16
    }
    pub fn frob(&self, a: u16) -> u16 {
        self.pow(a, self.p as u64)
    }
    pub fn order(&self, a: u16) -> u64 {
        let mut x = a;
        let mut k = 1;
        while x != 1 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }
    /// Coefficients of `a` over the prime field, constant term first.
    pub fn coords(&self, a: u16) -> Vec<u32> {
        let mut r = a as u32;
        (0..self.k)
            .map(|_| {
                let d = r % self.p;
                r /= self.p;
                d
            })
            .collect()
    }
}

/// Row-major square matrix over a [`Gf`].
pub type M = Vec<u16>;

pub fn mmul(f: &Gf, d: usize, a: &[u16], b: &[u16]) -> M {
    let mut c = vec![0u16; d * d];
    for i in 0..d {
        for k in 0..d {
            let x = a[i * d + k];
            if x == 0 {
                continue;
            }
            for j in 0..d {
                c[i * d + j] = f.add(c[i * d + j], f.mul(x, b[k * d + j]));
            }
        }
    }
    c
}

pub fn ident(d: usize) -> M {
    let mut m = vec![0; d * d];
    for i in 0..d {
        m[i * d + i] = 1;
    }
    m
}

/// Reduced row echelon form in place; returns pivot columns.
fn rref(f: &Gf, rows: &mut [Vec<u16>]) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(pr) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = f.inv(rows[r][c]);
        for x in rows[r].iter_mut() {
            *x = f.mul(*x, inv);
        }
        for i in 0..rows.len() {
            if i != r && rows[i][c] != 0 {
                let s = rows[i][c];
                for j in 0..ncols {
                    let v = f.mul(s, rows[r][j]);
                    rows[i][j] = f.sub(rows[i][j], v);
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    pivots
}

/// Basis of the solutions of `rows · x = 0`.
pub fn nullspace(f: &Gf, mut rows: Vec<Vec<u16>>, ncols: usize) -> Vec<Vec<u16>> {
    let pivots = rref(f, &mut rows);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![0u16; ncols];
            v[fc] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(rows[r][fc]);
            }
            v
        })
        .collect()
}

pub fn inverse(f: &Gf, d: usize, a: &[u16]) -> Option<M> {
    let mut rows: Vec<Vec<u16>> = (0..d)
        .map(|i| {
            let mut r = a[i * d..(i + 1) * d].to_vec();
            r.extend((0..d).map(|j| u16::from(i == j)));
            r
        })
        .collect();
    let piv = rref(f, &mut rows);
    if piv.len() < d || piv[d - 1] != d - 1 {
        return None;
    }
    Some(rows.iter().flat_map(|r| r[d..].to_vec()).collect())
}

/// Order of the group generated by `gens`, or `None` above `cap`.
pub fn closure_order(f: &Gf, d: usize, gens: &[M], cap: usize) -> Option<usize> {
    let mut seen: FxHashSet<M> = FxHashSet::default();
    seen.insert(ident(d));
    let mut list = vec![ident(d)];
    let mut i = 0;
    while i < list.len() {
        for g in gens {
            let h = mmul(f, d, &list[i], g);
            if seen.insert(h.clone()) {
                if seen.len() > cap {
                    return None;
                }
                list.push(h);
            }
        }
        i += 1;
    }
    Some(list.len())
}

/// F_q-matrices of size `m` as F_p-matrices of size `m·k`, basis `α^j e_i`
/// ordered by `i` then `j`.
pub fn restrict_scalars(f: &Gf, m: usize, g: &[u16]) -> FpMatrix {
    let k = f.k as usize;
    let d = m * k;
    let alpha = f.p as u16; // the element x
    let mut out = vec![0u32; d * d];
    for i in 0..m {
        for j in 0..k {
            let col = i * k + j;
            let aj = f.pow(alpha, j as u64);
            for r in 0..m {
                let c = f.coords(f.mul(g[r * m + i], aj));
                for (s, &x) in c.iter().enumerate() {
                    out[(r * k + s) * d + col] = x;
                }
            }
        }
    }
    out
}

/// Nondegenerate alternating forms `B` with `gᵀ B g = B`; first one found
/// by trying combinations of a nullspace basis.
pub fn invariant_alternating_form(p: u32, d: usize, gens: &[FpMatrix], seed: u64) -> Option<FpMatrix> {
    let f = Gf::new(p, 1, &[0]);
    // unknowns b_{ij}, i < j
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect();
    let idx = |i: usize, j: usize| pairs.iter().position(|&x| x == (i, j)).unwrap();
    let mut rows = Vec::new();
    for g in gens {
        // (gᵀ B g)_{ab} − B_{ab} = Σ_{i<j} b_ij (g_ia g_jb − g_ja g_ib) − B_ab
        for a in 0..d {
            for b in a + 1..d {
                let mut row = vec![0u16; pairs.len()];
                for (u, &(i, j)) in pairs.iter().enumerate() {
                    let v = (g[i * d + a] * g[j * d + b] + p * p - g[j * d + a] * g[i * d + b]) % p;
                    row[u] = v as u16;
                }
                let ab = idx(a, b);
                row[ab] = f.sub(row[ab], 1);
                rows.push(row);
            }
        }
    }
    let basis = nullspace(&f, rows, pairs.len());
    if basis.is_empty() {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..200 {
        let mut b = vec![0u32; d * d];
        for v in &basis {
            let c = rng.random_range(0..p);
            for (u, &(i, j)) in pairs.iter().enumerate() {
                b[i * d + j] = (b[i * d + j] + c * v[u] as u32) % p;
                b[j * d + i] = (p - b[i * d + j]) % p;
            }
        }
        let bm: M = b.iter().map(|&x| x as u16).collect();
        if inverse(&f, d, &bm).is_some() {
            return Some(b);
        }
    }
    None
}

/// Change of basis `P` with `Pᵀ B P = J`, for a nondegenerate alternating `B`.
pub fn symplectic_basis(p: u32, d: usize, b: &[u32]) -> FpMatrix {
    let n = d / 2;
    let form = |u: &[u32], v: &[u32]| -> u32 {
        let mut s = 0;
        for i in 0..d {
            for j in 0..d {
                s = (s + u[i] * b[i * d + j] % p * v[j]) % p;
            }
        }
        s
    };
    let inv = |a: u32| (1..p).find(|&x| a * x % p == 1).unwrap();
    let mut space: Vec<Vec<u32>> = (0..d).map(|i| (0..d).map(|j| u32::from(i == j)).collect()).collect();
    let (mut es, mut fs) = (Vec::new(), Vec::new());
    while !space.is_empty() {
        let e = space.remove(0);
        if e.iter().all(|&x| x == 0) {
            continue;
        }
        let pos = space.iter().position(|v| form(&e, v) != 0).expect("nondegenerate form");
        let mut fv = space.remove(pos);
        let s = inv(form(&e, &fv));
        fv.iter_mut().for_each(|x| *x = *x * s % p);
        // v ↦ v − B(v, f)·e + B(v, e)·f is orthogonal to e and f
        for v in space.iter_mut() {
            let (vf, ve) = (form(v, &fv), form(v, &e));
            for i in 0..d {
                v[i] = (v[i] + (p - vf) * e[i] % p + ve * fv[i] % p) % p;
            }
        }
        es.push(e);
        fs.push(fv);
    }
    let mut out = vec![0u32; d * d];
    for (c, v) in es.iter().chain(&fs).enumerate() {
        for r in 0..d {
            out[r * d + c] = v[r];
        }
    }
    assert_eq!(es.len(), n);
    out
}

pub fn to_standard(p: u32, d: usize, gens: &[FpMatrix], b: &[u32]) -> Vec<FpMatrix> {
    let f = Gf::new(p, 1, &[0]);
    let pm = symplectic_basis(p, d, b);
    let pw: M = pm.iter().map(|&x| x as u16).collect();
    let pinv = inverse(&f, d, &pw).expect("basis");
    gens.iter()
        .map(|g| {
            let gw: M = g.iter().map(|&x| x as u16).collect();
            mmul(&f, d, &mmul(&f, d, &pinv, &gw), &pw).iter().map(|&x| x as u32).collect()
        })
        .collect()
}

/// Elementary generators of SL₂(q) over `f`.
fn sl2_gens(f: &Gf) -> Vec<M> {
    let mut gens: Vec<M> = (0..f.k).map(|j| vec![1, f.pow(f.p as u16, j as u64), 0, 1]).collect();
    gens.push(vec![1, 0, 1, 1]);
    gens
}

fn finish(p: u32, d: usize, gens: Vec<FpMatrix>) -> SympGroup {
    let b = invariant_alternating_form(p, d, &gens, 1).expect("invariant symplectic form");
    SympGroup::new(p, d / 2, to_standard(p, d, &gens, &b)).expect("symplectic generators")
}

/// SL₂(9) on F₉² = F₃⁴.
pub fn sl2_9() -> SympGroup {
    let f = Gf::new(3, 2, &[1, 0]); // x² + 1
    let gens = sl2_gens(&f).iter().map(|g| restrict_scalars(&f, 2, g)).collect();
    finish(3, 4, gens)
}

/// SL₂(8) on F₈² = F₂⁶.
pub fn sl2_8() -> SympGroup {
    let f = Gf::new(2, 3, &[1, 1, 0]); // x³ + x + 1
    let gens = sl2_gens(&f).iter().map(|g| restrict_scalars(&f, 2, g)).collect();
    finish(2, 6, gens)
}

/// SL₂(13) on the odd part of its Weil representation, built over F₂₇ and
/// descended to F₃.
pub fn sl2_13() -> SympGroup {
    let f = Gf::new(3, 3, &[1, 2, 0]); // x³ + 2x + 1
    let zeta = (2..f.q as u16).find(|&a| f.order(a) == 13).unwrap();
    let psi = |t: i64| f.pow(zeta, t.rem_euclid(13) as u64);
    let d = 6;
    let mut u = vec![0u16; d * d];
    for x in 1..=6 {
        u[(x - 1) * d + x - 1] = psi((x * x) as i64);
    }
    let mut found = None;
    for c in [1i64, -1] {
        let mut w = vec![0u16; d * d];
        for x in 1..=6i64 {
            for z in 1..=6i64 {
                let v = f.sub(psi(2 * x * z), psi(-2 * x * z));
                w[(z - 1) as usize * d + (x - 1) as usize] = f.mul(f.from_int(c), v);
            }
        }
        if closure_order(&f, d, &[u.clone(), w.clone()], 2184) == Some(2184) {
            found = Some(w);
            break;
        }
    }
    let w = found.expect("Weil generators of order 2184");
    let gens = descend(&f, d, &[u, w]);
    finish(3, d, gens)
}

/// Conjugates absolutely irreducible F_q-matrices with Frobenius-stable
/// character into the prime field.
fn descend(f: &Gf, d: usize, gens: &[M]) -> Vec<FpMatrix> {
    let frob = |m: &M| -> M { m.iter().map(|&x| f.frob(x)).collect() };
    // A g = g^σ A for every generator: linear in the entries of A
    let mut rows = Vec::new();
    for g in gens {
        let gs = frob(g);
        for i in 0..d {
            for j in 0..d {
                let mut row = vec![0u16; d * d];
                for k in 0..d {
                    row[i * d + k] = f.add(row[i * d + k], g[k * d + j]);
                    row[k * d + j] = f.sub(row[k * d + j], gs[i * d + k]);
                }
                rows.push(row);
            }
        }
    }
    let sol = nullspace(f, rows, d * d);
    assert_eq!(sol.len(), 1, "module is not Frobenius-stable and absolutely irreducible");
    let mut a = sol[0].clone();
    // scale so that A^{σ²}·A^σ·A = I
    let prod = |a: &M| {
        let a1 = frob(a);
        let a2 = frob(&a1);
        mmul(f, d, &mmul(f, d, &a2, &a1), a)
    };
    let mu = prod(&a)[0];
    let c = (1..f.q as u16)
        .find(|&c| f.mul(f.mul(f.mul(c, f.frob(c)), f.frob(f.frob(c))), mu) == 1)
        .unwrap();
    a.iter_mut().for_each(|x| *x = f.mul(*x, c));
    assert_eq!(prod(&a), ident(d));
    let ainv = inverse(f, d, &a).unwrap();
    let t = |x: &M| mmul(f, d, &ainv, &frob(x));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    loop {
        let x: M = (0..d * d).map(|_| rng.random_range(0..f.q as u16)).collect();
        let tx = t(&x);
        let ttx = t(&tx);
        let pm: M = (0..d * d).map(|i| f.add(f.add(x[i], tx[i]), ttx[i])).collect();
        let Some(pinv) = inverse(f, d, &pm) else { continue };
        return gens
            .iter()
            .map(|g| {
                let h = mmul(f, d, &mmul(f, d, &pinv, g), &pm);
                h.iter()
                    .map(|&e| {
                        assert!((e as u32) < f.p, "descent left the prime field");
                        e as u32
                    })
                    .collect()
            })
            .collect();
    }
}

/// Transvections `x ↦ x + B(x, v)·v` for the standard form, as matrices.
fn transvection(p: u32, n: usize, v: &[u32]) -> FpMatrix {
    let d = 2 * n;
    let j = udk_core::symplectic::standard_form(p, n);
    // B(x, v) = xᵀ J v
    let jv: Vec<u32> = (0..d).map(|i| (0..d).map(|k| j[i * d + k] * v[k]).sum::<u32>() % p).collect();
    let mut m = vec![0u32; d * d];
    for r in 0..d {
        for c in 0..d {
            m[r * d + c] = (u32::from(r == c) + v[r] * jv[c]) % p;
        }
    }
    m
}

fn fp_mul(p: u32, d: usize, a: &[u32], b: &[u32]) -> FpMatrix {
    let f = Gf::new(p, 1, &[0]);
    let a: M = a.iter().map(|&x| x as u16).collect();
    let b: M = b.iter().map(|&x| x as u16).collect();
    mmul(&f, d, &a, &b).iter().map(|&x| x as u32).collect()
}

fn random_element(rng: &mut ChaCha8Rng, p: u32, n: usize, len: usize) -> FpMatrix {
    let d = 2 * n;
    let mut m: FpMatrix = (0..d * d).map(|i| u32::from(i / d == i % d)).collect();
    for _ in 0..len {
        let v: Vec<u32> = (0..d).map(|_| rng.random_range(0..p)).collect();
        m = fp_mul(p, d, &m, &transvection(p, n, &v));
    }
    m
}

/// Two-generated subgroup of Sp_{2n}(p) of the given order, transitive on
/// nonzero vectors, by seeded random search.
pub fn random_transitive(p: u32, n: usize, order: u64, seed: u64) -> SympGroup {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let a = random_element(&mut rng, p, n, 12);
        let b = random_element(&mut rng, p, n, 12);
        let h = SympGroup::new(p, n, vec![a, b]).unwrap();
        if h.order(order as usize + 1).ok() == Some(order) && h.is_transitive() {
            return h;
        }
    }
}

/// SU₃(3) = G₂(2)′ in Sp₆(2).
pub fn su3_3() -> SympGroup {
    random_transitive(2, 3, 6048, 1)
}

/// Transitive subgroups of Sp₄(3) found below seeded random transitive
/// subgroups of orders 1920 and 1440, one per fingerprint.
pub fn sp4_3_transitive() -> Vec<udk_core::symplectic::TransitiveClass> {
    let mut out: Vec<udk_core::symplectic::TransitiveClass> = Vec::new();
    for order in [1920, 1440] {
        let h = random_transitive(3, 2, order, 1);
        for c in udk_core::symplectic::transitive_subgroup_classes(&h).unwrap() {
            if !out.iter().any(|o| o.fingerprint == c.fingerprint) {
                out.push(c);
            }
        }
    }
    out.sort_by(|a, b| a.fingerprint.cmp(&b.fingerprint));
    out
}

fn sp4_3_of_order(order: u64) -> SympGroup {
    static CLASSES: std::sync::OnceLock<Vec<udk_core::symplectic::TransitiveClass>> = std::sync::OnceLock::new();
    let c = CLASSES
        .get_or_init(sp4_3_transitive)
        .iter()
        .find(|c| c.fingerprint.order == order)
        .expect("transitive class of this order");
    SympGroup::new(3, 2, c.generators.clone()).unwrap()
}

pub fn sp4_3_160() -> SympGroup {
    sp4_3_of_order(160)
}
pub fn sp4_3_240() -> SympGroup {
    sp4_3_of_order(240)
}
pub fn sp4_3_320() -> SympGroup {
    sp4_3_of_order(320)
}
pub fn sp4_3_1440() -> SympGroup {
    sp4_3_of_order(1440)
}
pub fn sp4_3_1920() -> SympGroup {
    sp4_3_of_order(1920)
}
