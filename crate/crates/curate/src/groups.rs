use udk_core::cyclo::CycNum;
use udk_core::matrep::{FiniteMatrixGroup, UMatrix};

use crate::util::*;

/// Klein's generators of SL3(2) over Q(ζ₇).
pub fn klein() -> FiniteMatrixGroup {
    let b = |k: i64| z(7, k);
    let s = mat(7, 3, vec![b(4), int(0), int(0), int(0), b(2), int(0), int(0), int(0), b(1)]);
    let t = mat(7, 3, vec![int(0), int(1), int(0), int(0), int(0), int(1), int(1), int(0), int(0)]);
    // √-7 as the quadratic Gauss sum
    let root = [1, 2, 4].iter().map(|&k| b(k)).fold(int(0), |a, x| &a + &x)
        - [3, 5, 6].iter().map(|&k| b(k)).fold(int(0), |a, x| &a + &x);
    let c = &(-&root.inv().unwrap()) * &int(1);
    let d = |k: i64| &c * &(&b(k) - &b(7 - k));
    let r = mat(7, 3, vec![d(1), d(2), d(4), d(2), d(4), d(1), d(4), d(1), d(2)]);
    FiniteMatrixGroup::new("sl3_2_dim3", 3, 7, vec![s, t, r]).unwrap()
}

/// Icosahedral rotation group in SO(3) together with an order-2 monomial
/// element involving cube roots of unity.
pub fn valentiner() -> FiniteMatrixGroup {
    let sqrt5 = &int(1) + &(&int(2) * &(&z(5, 1) + &z(5, 4)));
    let mu1 = &(&int(-1) + &sqrt5) * &q(1, 2);
    let mu2 = &(&int(-1) - &sqrt5) * &q(1, 2);
    let h = q(1, 2);
    let t1 = mat(15, 3, vec![int(0), int(1), int(0), int(0), int(0), int(1), int(1), int(0), int(0)]);
    let t2 = mat(15, 3, vec![int(1), int(0), int(0), int(0), int(-1), int(0), int(0), int(0), int(-1)]);
    let t3 = mat(
        15,
        3,
        [int(-1), mu2.clone(), mu1.clone(), mu2.clone(), mu1.clone(), int(-1), mu1.clone(), int(-1), mu2.clone()]
            .iter()
            .map(|x| x * &h)
            .collect(),
    );
    let w = |k: i64| z(3, k);
    let t4 = mat(15, 3, vec![int(-1), int(0), int(0), int(0), -&w(1), int(0), int(0), int(0), -&w(2)]);
    let t4b = mat(15, 3, vec![int(-1), int(0), int(0), int(0), int(0), -&w(1), int(0), -&w(2), int(0)]);
    let _ = t4;
    FiniteMatrixGroup::new("valentiner_3a6_dim3", 3, 15, vec![t1, t2, t3, t4b]).unwrap()
}

/// Reflection group from a "Cartan matrix": generator `i` maps `e_j` to
/// `e_j − c[i][j]·e_i` in the root basis.
pub fn cartan_group(name: &str, n: u32, cartan: &[Vec<CycNum>]) -> FiniteMatrixGroup {
    let r = cartan.len();
    let gens = (0..r)
        .map(|i| {
            let mut e = vec![int(0); r * r];
            for j in 0..r {
                e[j * r + j] = int(1);
            }
            // column j is the image of e_j
            for j in 0..r {
                let v = &e[i * r + j] - &cartan[i][j];
                e[i * r + j] = v;
            }
            mat(n, r, e)
        })
        .collect();
    FiniteMatrixGroup::new(name, r, n, gens).unwrap()
}

/// Linear diagram of order-3 reflections with `c[i][i+1] = ω`, `c[i+1][i] = −1`.
pub fn linear_order3(name: &str, rank: usize, up: CycNum, down: CycNum) -> FiniteMatrixGroup {
    let w = z(3, 1);
    let mut c = vec![vec![int(0); rank]; rank];
    for i in 0..rank {
        c[i][i] = &int(1) - &w;
        if i + 1 < rank {
            c[i][i + 1] = up.clone();
            c[i + 1][i] = down.clone();
        }
    }
    cartan_group(name, 3, &c)
}

/// Indices of a maximal independent subset of `vectors`.
pub fn independent(vectors: &[Vec<CycNum>]) -> Vec<usize> {
    let mut reduced: Vec<(usize, Vec<CycNum>)> = Vec::new();
    let mut chosen = Vec::new();
    for (k, v) in vectors.iter().enumerate() {
        let mut v = v.clone();
        for (piv, r) in &reduced {
            if v[*piv].is_zero() {
                continue;
            }
            let f = &v[*piv] * &r[*piv].inv().unwrap();
            for i in 0..v.len() {
                let t = &f * &r[i];
                v[i] = &v[i] - &t;
            }
        }
        if let Some(piv) = v.iter().position(|x| !x.is_zero()) {
            reduced.push((piv, v));
            chosen.push(k);
        }
    }
    chosen
}

/// Restriction of each `m` to the column space of `basis` (d×k), assumed invariant.
pub fn restrict(n: u32, ms: &[UMatrix], basis: &[Vec<CycNum>]) -> Vec<UMatrix> {
    let k = basis.len();
    let d = basis[0].len();
    let rows: Vec<Vec<CycNum>> = (0..d).map(|i| basis.iter().map(|b| b[i].clone()).collect()).collect();
    let sel = independent(&rows);
    assert_eq!(sel.len(), k);
    let br: Vec<CycNum> = sel.iter().flat_map(|&i| rows[i].clone()).collect();
    let br_inv = mat(n, k, br).inverse().unwrap();
    ms.iter()
        .map(|m| {
            let e = m.entries();
            // (m·B) restricted to the selected rows
            let mut mb = Vec::with_capacity(k * k);
            for &i in &sel {
                for b in basis {
                    let mut acc = int(0);
                    for j in 0..d {
                        acc += &(&e[i * d + j] * &b[j]);
                    }
                    mb.push(acc);
                }
            }
            br_inv.mul(&mat(n, k, mb)).unwrap()
        })
        .collect()
}

/// 2.A7 as lifts of 3-cycles to the spin group, on a half-spin space.
pub fn two_a7() -> FiniteMatrixGroup {
    let n = 28;
    let i = z(4, 1);
    let px = mat(n, 2, vec![int(0), int(1), int(1), int(0)]);
    let py = mat(n, 2, vec![int(0), -&i, i.clone(), int(0)]);
    let pz = mat(n, 2, vec![int(1), int(0), int(0), int(-1)]);
    let id = UMatrix::identity(2, n);
    let k3 = |a: &UMatrix, b: &UMatrix, c: &UMatrix| a.kron(b).unwrap().kron(c).unwrap();
    let gamma = [
        k3(&px, &id, &id),
        k3(&py, &id, &id),
        k3(&pz, &px, &id),
        k3(&pz, &py, &id),
        k3(&pz, &pz, &px),
        k3(&pz, &pz, &py),
        k3(&pz, &pz, &pz),
    ];
    let add = |a: &UMatrix, b: &UMatrix, s: i64| {
        let e: Vec<CycNum> = a
            .entries()
            .iter()
            .zip(b.entries())
            .map(|(x, y)| x + &(&int(s) * &y))
            .collect();
        mat(n, a.dim(), e)
    };
    let lifts: Vec<UMatrix> = (0..5)
        .map(|a| {
            let u = add(&gamma[a], &gamma[a + 1], -1);
            let v = add(&gamma[a + 1], &gamma[a + 2], -1);
            u.mul(&v).unwrap().scale(&q(1, 2)).unwrap()
        })
        .collect();
    let s = gamma[1..].iter().fold(gamma[0].clone(), |acc, g| add(&acc, g, 1));
    let gauss = [1, 2, 4].iter().map(|&k| z(7, k)).fold(int(0), |a, x| &a + &x)
        - [3, 5, 6].iter().map(|&k| z(7, k)).fold(int(0), |a, x| &a + &x);
    let sqrt7 = -&(&i * &gauss);
    assert_eq!(&sqrt7 * &sqrt7, int(7));
    let p = add(&s, &UMatrix::scalar(8, n, 0).scale(&sqrt7).unwrap(), 1);
    let pe = p.entries();
    let cols: Vec<Vec<CycNum>> = (0..8).map(|j| (0..8).map(|r| pe[r * 8 + j].clone()).collect()).collect();
    let basis: Vec<Vec<CycNum>> = independent(&cols).into_iter().map(|j| cols[j].clone()).collect();
    assert_eq!(basis.len(), 4);
    let gens = restrict(n, &lifts, &basis);
    FiniteMatrixGroup::new("two_a7_dim4", 4, n, gens).unwrap()
}

/// G29 inside the two-qubit Clifford group: the reflections whose images in
/// Sp4(2) ≅ S6 are the transpositions fixing one point.
pub fn g29() -> FiniteMatrixGroup {
    let cap = 1_000_000;
    let mut cliff = udk_core::catalog::clifford_group(2).unwrap();
    cliff.enumerate(cap).unwrap();
    let mut pauli = udk_core::catalog::extraspecial_pauli(2, 2)
        .unwrap()
        .with_scalar(8)
        .unwrap();
    pauli.enumerate(cap).unwrap();
    let two = int(2);
    let refl: Vec<UMatrix> = cliff
        .elements()
        .unwrap()
        .filter(|g| !g.is_identity() && g.trace() == two && g.mul(g).unwrap().is_identity())
        .collect();
    let in_p = |m: &UMatrix| pauli.contains(m).unwrap();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (k, r) in refl.iter().enumerate() {
        match classes.iter_mut().find(|c| in_p(&refl[c[0]].mul(r).unwrap())) {
            Some(c) => c.push(k),
            None => classes.push(vec![k]),
        }
    }
    eprintln!("reflections {} classes {}", refl.len(), classes.len());
    let commute = |a: usize, b: usize| {
        let (r, s) = (&refl[classes[a][0]], &refl[classes[b][0]]);
        in_p(&r.mul(s).unwrap().mul(r).unwrap().mul(s).unwrap())
    };
    let m = classes.len();
    // a point of {1..6}: five pairwise non-commuting transvections
    let mut clique = None;
    'outer: for a in 0..m {
        let nb: Vec<usize> = (a + 1..m).filter(|&b| !commute(a, b)).collect();
        for mask in 0u32..(1 << nb.len()) {
            if mask.count_ones() != 4 {
                continue;
            }
            let pick: Vec<usize> = (0..nb.len()).filter(|i| mask >> i & 1 == 1).map(|i| nb[i]).collect();
            if pick.iter().all(|&x| pick.iter().all(|&y| x == y || !commute(x, y))) {
                let mut c = vec![a];
                c.extend(pick);
                clique = Some(c);
                break 'outer;
            }
        }
    }
    let clique = clique.expect("five pairwise non-commuting classes");
    let gens: Vec<UMatrix> = (0..m)
        .filter(|c| !clique.contains(c))
        .flat_map(|c| classes[c].iter().map(|&k| refl[k].clone()))
        .collect();
    let full = FiniteMatrixGroup::closure("g29", 4, 8, gens, cap).unwrap();
    let gens = full.generating_subset(cap).unwrap();
    FiniteMatrixGroup::new("g29_dim4", 4, 8, gens).unwrap()
}

pub fn g32() -> FiniteMatrixGroup {
    linear_order3("g32_dim4", 4, z(3, 1), int(-1))
}

/// Derived subgroup of G32 with a small generating set.
pub fn sp4_3() -> FiniteMatrixGroup {
    let cap = 1_000_000;
    let mut g = g32();
    g.enumerate(cap).unwrap();
    let d = g.derived_subgroup(cap).unwrap();
    FiniteMatrixGroup::new("sp4_3_dim4", 4, 3, d.generating_subset(cap).unwrap()).unwrap()
}
