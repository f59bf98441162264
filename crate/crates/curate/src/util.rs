use udk_core::cyclo::CycNum;
use udk_core::matrep::UMatrix;

pub fn int(k: i64) -> CycNum {
    CycNum::from_int(k)
}

pub fn z(n: u32, k: i64) -> CycNum {
    CycNum::zeta(n, k)
}

pub fn q(a: i64, b: i64) -> CycNum {
    CycNum::from_ratio(a, b)
}

/// Row-major matrix over `Q(ζ_n)`.
pub fn mat(n: u32, d: usize, e: Vec<CycNum>) -> UMatrix {
    UMatrix::from_entries(d, n, &e).expect("matrix over declared conductor")
}
