//! Polynomial growth-bound feasibility for the built-in potentials: search
//! for positive constants `b₁..b₄` witnessing
//!
//! ```text
//! b₁z^{2m} − b₂ ≤ W(z) + (ε/2)z² ≤ b₃z^{2m} + b₄
//! |W'(z)| ≤ b₃|z|^{2m−1} + b₄
//! b₁z^{2m−2} − b₂ ≤ W''(z) ≤ b₃z^{2m−2} + b₄
//! ```
//!
//! on a sampled range. The quartic example is feasible with m = 2; the
//! zero test potential cannot dominate `b₁z⁴ − b₂` from above and is
//! reported with its violation witness.
//!
//! ```bash
//! cargo run --release --example growth_conditions
//! ```

use pfc::diagnostics::{growth_check, GrowthOutcome};
use pfc::physics::PotentialSpec;

fn main() {
    let specs = [
        PotentialSpec::QuarticExample { epsilon: 0.2 },
        PotentialSpec::DerivationForm {
            gamma: 1.0,
            kappa: 1.0,
            epsilon: 0.2,
        },
        PotentialSpec::LinearTest,
    ];
    for spec in specs {
        let report = growth_check(&spec, spec.growth_exponent(), 10.0, 10_001);
        println!(
            "{} (m = {}, {} samples over [-10, 10]):",
            spec.kind_name(),
            report.m,
            report.samples
        );
        match report.outcome {
            GrowthOutcome::Feasible(c) => println!(
                "  feasible: b1 = {:.4e}, b2 = {:.4e}, b3 = {:.4e}, b4 = {:.4e}",
                c.b1, c.b2, c.b3, c.b4
            ),
            GrowthOutcome::Violation(v) => println!(
                "  violation of {} at z = {:.3}: lhs {:.4e} > rhs {:.4e}",
                v.inequality, v.z, v.lhs, v.rhs
            ),
        }
    }
}
