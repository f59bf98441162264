//! Builds the curated generator files in `data/`.
//!
//! `udk-curate [DIR]` writes every curated entry it knows how to construct,
//! closes each group and refuses to write one whose order, scalar order or
//! moments disagree with the hard-coded expectations.

mod groups;
mod util;
mod witness;

use std::path::PathBuf;
use std::time::Instant;

use udk_core::catalog::check_expected;
use udk_core::format::{Expected, ExpectedFile, GroupFile};
use udk_core::matrep::FiniteMatrixGroup;
use udk_core::symplectic::SympGroup;

const CAP: usize = 3_000_000;

struct Recipe {
    name: &'static str,
    build: fn() -> FiniteMatrixGroup,
    provenance: &'static str,
    expected: fn() -> Expected,
}

fn expected(order: u64, scalars: u64, moments: &[(usize, &str)], above: &[(usize, &str)], max_t: usize) -> Expected {
    Expected {
        order: Some(order),
        scalar_order: Some(scalars),
        moments: moments.iter().map(|&(t, m)| (t, m.to_string())).collect(),
        max_t: Some(max_t),
        moments_above: above.iter().map(|&(t, m)| (t, m.to_string())).collect(),
    }
}

const RECIPES: &[Recipe] = &[
    Recipe {
        name: "sl3_2_dim3",
        build: groups::klein,
        provenance: "Klein's generators of SL3(2) over Q(zeta7): diagonal diag(z^4, z^2, z), \
                     cyclic shift, and the order-2 matrix with entries (z^a - z^-a)/sqrt(-7), \
                     sqrt(-7) the quadratic Gauss sum",
        expected: || expected(168, 1, &[(1, "1"), (2, "2")], &[(3, "6")], 2),
    },
    Recipe {
        name: "valentiner_3a6_dim3",
        build: groups::valentiner,
        provenance: "Valentiner group: icosahedral rotations (cyclic shift, diag(1,-1,-1), the \
                     golden-ratio matrix) with the monomial element [[-1,0,0],[0,0,-w],[0,-w^2,0]], \
                     w a primitive cube root of unity; conductor 15",
        expected: || expected(1080, 3, &[(2, "2"), (3, "6")], &[(4, "24")], 3),
    },
    Recipe {
        name: "two_a7_dim4",
        build: groups::two_a7,
        provenance: "2.A7 from the spin representation of Cl(7): lifts (g_a - g_b)(g_b - g_c)/2 of the \
                     3-cycles (a a+1 a+2) acting on 8 = 4 + 4, restricted to the column space of \
                     S + sqrt(7) I for the Clifford volume element S",
        expected: || expected(5040, 2, &[(2, "2"), (3, "6"), (4, "38")], &[], 3),
    },
    Recipe {
        name: "sp4_3_dim4",
        build: groups::sp4_3,
        provenance: "derived subgroup of the reflection group G32 (generated by order-3 reflections \
                     with a linear diagram), reduced to a small generating set",
        expected: || expected(51840, 2, &[(2, "2"), (3, "6"), (4, "25")], &[], 3),
    },
    Recipe {
        name: "g29_dim4",
        build: groups::g29,
        provenance: "G29 inside the two-qubit Clifford group: reflections (trace-2 involutions) \
                     outside five mutually non-commuting classes modulo Pauli and scalars, reduced \
                     to a small generating set",
        expected: || expected(7680, 4, &[(2, "2")], &[(3, "6")], 2),
    },
    Recipe {
        name: "g32_dim4",
        build: groups::g32,
        provenance: "complex reflection group G32 from four order-3 reflections in a linear \
                     diagram over Q(w), written in the root basis",
        expected: || expected(155520, 6, &[(2, "2"), (3, "6"), (4, "25")], &[], 3),
    },
];

struct WitnessRecipe {
    name: &'static str,
    build: fn() -> SympGroup,
    order: u64,
    provenance: &'static str,
}

const SP43: &str = "transitive subgroup of Sp4(3) found by the exhaustive subgroup search inside \
                    seeded random transitive subgroups of orders 1920 and 1440";

const WITNESS_RECIPES: &[WitnessRecipe] = &[
    WitnessRecipe {
        name: "sl2_9_in_sp4_3",
        build: witness::sl2_9,
        order: 720,
        provenance: "SL2(9) acting on F9^2 = F3^4 (F9 = F3[x]/(x^2+1)), elementary generators, \
                     written in a basis where its invariant alternating form is standard",
    },
    WitnessRecipe {
        name: "sl2_8_in_sp6_2",
        build: witness::sl2_8,
        order: 504,
        provenance: "SL2(8) acting on F8^2 = F2^6 (F8 = F2[x]/(x^3+x+1)), elementary generators, \
                     written in a basis where its invariant alternating form is standard",
    },
    WitnessRecipe {
        name: "su3_3_in_sp6_2",
        build: witness::su3_3,
        order: 6048,
        provenance: "two-generated subgroup of order 6048 of Sp6(2), transitive on the 63 nonzero \
                     vectors, found by seeded random search over products of transvections",
    },
    WitnessRecipe {
        name: "sl2_13_in_sp6_3",
        build: witness::sl2_13,
        order: 2184,
        provenance: "odd part of the Weil representation of SL2(13) built over F27 and descended \
                     to F3 by Frobenius-twisted conjugation, in a basis with standard form",
    },
    WitnessRecipe {
        name: "sp4_3_order160",
        build: witness::sp4_3_160,
        order: 160,
        provenance: SP43,
    },
    WitnessRecipe {
        name: "sp4_3_order320",
        build: witness::sp4_3_320,
        order: 320,
        provenance: SP43,
    },
    WitnessRecipe {
        name: "two_s5_in_sp4_3",
        build: witness::sp4_3_240,
        order: 240,
        provenance: SP43,
    },
    WitnessRecipe {
        name: "sl2_9_2_in_sp4_3",
        build: witness::sp4_3_1440,
        order: 1440,
        provenance: SP43,
    },
    WitnessRecipe {
        name: "sp4_3_order1920",
        build: witness::sp4_3_1920,
        order: 1920,
        provenance: SP43,
    },
];

fn write_witnesses(dir: &std::path::Path, only: &[String]) -> bool {
    let dir = dir.join("witnesses");
    std::fs::create_dir_all(&dir).expect("witness directory");
    let mut ok = true;
    for r in WITNESS_RECIPES {
        if !only.is_empty() && !only.iter().any(|n| n == r.name) {
            continue;
        }
        let t0 = Instant::now();
        let h = (r.build)();
        let cert = h.transitivity_certificate(1_000_000).expect("closure");
        match cert {
            Some(c) if c.order == r.order => {}
            _ => {
                eprintln!("{}: not transitive of order {} ({cert:?}, orbits {:?})", r.name, r.order, h.orbits());
                ok = false;
                continue;
            }
        }
        let d = 2 * h.n();
        let file = GroupFile {
            name: r.name.to_string(),
            dimension: d,
            conductor: None,
            modulus: Some(h.p()),
            generators: h
                .generators()
                .iter()
                .map(|g| (0..d).map(|i| (0..d).map(|j| g[i * d + j].to_string()).collect()).collect())
                .collect(),
            expected: Some(Expected {
                order: Some(r.order),
                ..Expected::default()
            }),
            provenance: Some(r.provenance.split_whitespace().collect::<Vec<_>>().join(" ")),
        };
        file.write(&dir.join(format!("{}.json", r.name))).expect("write");
        eprintln!("{}: order {} transitive, written ({:?})", r.name, r.order, t0.elapsed());
    }
    ok
}

fn main() {
    let mut args = std::env::args().skip(1);
    let dir = args.next().map(PathBuf::from).unwrap_or_else(udk_core::catalog::data_dir);
    let only: Vec<String> = args.collect();
    std::fs::create_dir_all(&dir).expect("data directory");
    let mut failed = false;
    for r in RECIPES {
        if !only.is_empty() && !only.iter().any(|n| n == r.name) {
            continue;
        }
        let t0 = Instant::now();
        let mut g = (r.build)();
        g.set_name(r.name);
        g.enumerate(CAP).expect("closure within cap");
        let exp = (r.expected)();
        let checks = check_expected(&g, &exp).expect("moments");
        if let Some(c) = checks.iter().find(|c| !c.pass) {
            eprintln!("{}: {} expected {}, computed {}", r.name, c.property, c.expected, c.computed);
            failed = true;
            continue;
        }
        let mut file = GroupFile::from_group(&g);
        file.provenance = Some(r.provenance.split_whitespace().collect::<Vec<_>>().join(" "));
        file.write(&dir.join(format!("{}.json", r.name))).expect("write");
        let exp_file = ExpectedFile {
            name: r.name.to_string(),
            expected: exp,
        };
        std::fs::write(dir.join(format!("{}.expected.json", r.name)), exp_file.to_json()).expect("write");
        eprintln!("{}: order {} written ({:?})", r.name, g.order().unwrap(), t0.elapsed());
    }
    failed |= !write_witnesses(&dir, &only);
    // built-in constructions, emitted for use with the command line tool
    for e in udk_core::catalog::list_catalog() {
        if e.kind == udk_core::catalog::Kind::BuiltIn && (only.is_empty() || only.iter().any(|n| n == e.name)) {
            udk_core::catalog::emit(e.name, &dir.join(format!("{}.json", e.name))).expect("emit");
        }
    }
    if failed {
        std::process::exit(1);
    }
}
