use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    config, BundleBlock, ComponentSpec, GeometryBlock, NonHolonomicBlock, Order1Block, Scenario,
    StressBlock, Tolerances, VelocityBlock, SCHEMA,
};
use crate::error::Result;
use crate::jetcore::Polynomial;

fn monomials(p: &Polynomial) -> ComponentSpec {
    ComponentSpec::Monomials {
        monomials: p
            .terms()
            .iter()
            .map(|(e, c)| (e.exponents().to_vec(), (c * 1e6).round() / 1e6))
            .collect(),
    }
}

fn block(rng: &mut ChaCha8Rng, n: usize, count: usize, degree: usize) -> Vec<ComponentSpec> {
    (0..count)
        .map(|_| monomials(&Polynomial::random(rng, n, degree)))
        .collect()
}

fn zeros(count: usize) -> Vec<ComponentSpec> {
    vec![ComponentSpec::Number(0.0); count]
}

/// Random polynomial scenario on the unit box. At degree zero the
/// zeroth-order stress parts vanish so that every divergence is zero.
pub fn generate_scenario(seed: u64, n: usize, d: usize, degree: usize) -> Result<String> {
    if !(2..=3).contains(&n) {
        return Err(config("--n", format!("dimension {n} is not in {{2, 3}}")));
    }
    if d == 0 {
        return Err(config("--d", "fiber dimension must be positive"));
    }
    if degree > 4 {
        return Err(config("--degree", format!("degree {degree} exceeds 4")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let low = |rng: &mut ChaCha8Rng, count| {
        if degree == 0 {
            zeros(count)
        } else {
            block(rng, n, count, degree)
        }
    };
    let order1 = Order1Block {
        s0: low(&mut rng, d),
        s1: block(&mut rng, n, d * n, degree),
    };
    let nonholonomic = NonHolonomicBlock {
        x0: low(&mut rng, d),
        x1: low(&mut rng, d * n),
        x2: block(&mut rng, n, d * n, degree),
        x3: block(&mut rng, n, d * n * n, degree),
    };
    let velocity = VelocityBlock {
        u: block(&mut rng, n, d, degree.max(1)),
        a0: None,
        a1: None,
    };
    let scenario = Scenario {
        schema: SCHEMA.to_string(),
        name: format!("random-n{n}-d{d}-deg{degree}-seed{seed}"),
        seed,
        checks: None,
        geometry: GeometryBlock {
            n,
            chart: None,
            body: None,
            patch: None,
            quad_order: degree + 2,
            transversal: None,
        },
        bundle: BundleBlock { d },
        stress: StressBlock {
            order1: Some(order1),
            order2: None,
            nonholonomic: Some(nonholonomic),
        },
        velocity: Some(velocity),
        covariance: None,
        closed_boundary: None,
        tolerances: Tolerances::default(),
    };
    scenario.to_toml()
}
