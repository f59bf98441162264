use udk_core::symplectic::{
    search_transitive_2dim, standard_form, transitive_subgroup_classes, verify_witness, SympGroup, SymplecticError,
    WITNESSES,
};

/// Transvection `x ↦ x + B(x, v) v` for the standard form.
fn transvection(p: u32, n: usize, v: &[u32]) -> Vec<u32> {
    let d = 2 * n;
    let j = standard_form(p, n);
    let mut m = vec![0u32; d * d];
    for r in 0..d {
        for c in 0..d {
            // column c is the image of e_c: e_c + B(e_c, v) v
            let b: u32 = (0..d).map(|k| j[c * d + k] * v[k]).sum::<u32>() % p;
            m[r * d + c] = ((r == c) as u32 + b * v[r]) % p;
        }
    }
    m
}

#[test]
fn transvections_are_symplectic_and_generate_a_transitive_group() {
    let (p, n) = (3, 2);
    let gens: Vec<Vec<u32>> = (0..4)
        .map(|i| {
            let mut v = vec![0; 4];
            v[i] = 1;
            transvection(p, n, &v)
        })
        .chain([transvection(p, n, &[1, 1, 0, 0]), transvection(p, n, &[1, 0, 1, 0])])
        .collect();
    let g = SympGroup::new(p, n, gens).unwrap();
    assert_eq!(g.orbits(), vec![80]);
    assert!(g.is_transitive());
    assert_eq!(g.order(100_000).unwrap(), 51840);
    let cert = g.transitivity_certificate(100_000).unwrap().unwrap();
    assert_eq!(cert.orbit * cert.stabilizer, cert.order);
}

#[test]
fn orbit_sizes_partition_the_nonzero_vectors() {
    for p in [3u32, 5] {
        let g = SympGroup::new(p, 2, vec![transvection(p, 2, &[1, 0, 0, 0]), transvection(p, 2, &[0, 0, 1, 1])]).unwrap();
        let orbits = g.orbits();
        assert_eq!(orbits.iter().sum::<u64>(), (p as u64).pow(4) - 1);
        assert!(!g.is_transitive());
        let order = g.order(1_000_000).unwrap();
        assert!(orbits.iter().all(|o| order % o == 0));
        assert!(g.transitivity_certificate(1_000_000).unwrap().is_none());
    }
}

#[test]
fn rejects_non_symplectic_generators() {
    let diag = vec![2, 0, 0, 2];
    assert_eq!(SympGroup::new(5, 1, vec![diag]).unwrap_err(), SymplecticError::NotSymplectic(0));
    assert!(matches!(SympGroup::new(9, 1, vec![]), Err(SymplecticError::NotPrime(9))));
    assert!(matches!(SympGroup::new(3, 1, vec![vec![1, 0, 0]]), Err(SymplecticError::BadDimension(_))));
}

#[test]
fn search_p5_matches_known_classes() {
    let classes = search_transitive_2dim(5).unwrap();
    let orders: Vec<u64> = classes.iter().map(|c| c.fingerprint.order).collect();
    assert_eq!(orders, vec![24, 120]);
    // SL2(3) and SL2(5) both have a center of order 2
    assert!(classes.iter().all(|c| c.fingerprint.center_order == 2));
    for c in &classes {
        let g = SympGroup::new(5, 1, c.generators.clone()).unwrap();
        assert!(g.is_transitive());
        assert_eq!(g.order(10_000).unwrap(), c.fingerprint.order);
    }
}

#[test]
fn search_rejects_unsupported_primes() {
    assert_eq!(search_transitive_2dim(17).unwrap_err(), SymplecticError::UnsupportedPrime(17));
}

#[test]
fn classes_within_a_given_group() {
    // inside SL2(5) the transitive subgroups are SL2(3) and SL2(5) itself
    let full = search_transitive_2dim(5).unwrap().pop().unwrap();
    let g = SympGroup::new(5, 1, full.generators).unwrap();
    let orders: Vec<u64> = transitive_subgroup_classes(&g).unwrap().iter().map(|c| c.fingerprint.order).collect();
    assert_eq!(orders, vec![24, 120]);
}

#[test]
fn curated_witnesses_verify() {
    for name in WITNESSES {
        let r = verify_witness(name, 1_000_000).unwrap();
        assert!(r.passed(), "{name}: {:?}", r.checks);
        assert_eq!(r.orbits.len(), 1);
    }
    assert!(matches!(verify_witness("nope", 10), Err(SymplecticError::UnknownWitness(_))));
}
