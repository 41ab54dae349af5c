//! Benchmark fixtures.

use noncurv_core::algebra::AlgebraElement;
use noncurv_core::certify::random_start;
use noncurv_core::curvature::Deformation;
use noncurv_core::homogeneous::{chain_by_key, Chain, Part};

pub struct Fixture {
    pub chain: Chain,
    pub def: Deformation,
    pub x: AlgebraElement,
    pub y: AlgebraElement,
}

/// A catalog chain with `Ψ = P_m` and a fixed random pair in `p`.
pub fn fixture(key: &str) -> Fixture {
    let chain = chain_by_key(key).expect("catalog key").chain;
    let def = Deformation::proj_m(&chain);
    let dp = chain.part_dim(Part::P);
    let v = random_start(&[dp, dp], 7, 0);
    let (x, y) = (chain.from_p(&v[0]), chain.from_p(&v[1]));
    Fixture { chain, def, x, y }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_vectors_lie_in_p() {
        let f = fixture("su2-so4-g2");
        assert!(f.chain.project(&f.x, Part::H).unwrap().norm() < 1e-12);
        assert!((f.x.norm() - 1.0).abs() < 1e-12);
    }
}
