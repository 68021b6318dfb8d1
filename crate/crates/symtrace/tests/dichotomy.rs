//! Desk-scale dichotomy: elliptic and cancelling operators keep bounded
//! trace ratios across codimensions s ∈ {0, 1/4, 1/2}, while elliptic
//! non-cancelling operators blow up along the fundamental-solution family at
//! the same codimensions.

use symtrace::catalog::catalog;
use symtrace::fields::GridBox;
use symtrace::harness::{
    blowup_noncancelling, default_cone_cantor, sweep_sobolev, BlowupConfig, FamilyConfig,
    RatioVerdict,
};
use symtrace::measures::build_cantor_product;
use symtrace::rational::{rat, rat_to_f64};

const S_GRID: [(i64, i64); 3] = [(0, 1), (1, 4), (1, 2)];

#[test]
fn elliptic_cancelling_operators_stay_bounded() {
    let gbox = GridBox::unit(2);
    let family = FamilyConfig { members: 8, ..FamilyConfig::with_seed(31) };
    for name in ["gradient", "sym_gradient"] {
        let a = catalog(name, 2, None).unwrap();
        for (p, q) in S_GRID {
            let s = rat(p, q);
            let dim = 2.0 - rat_to_f64(&s);
            let mu = if p == 0 {
                build_cantor_product(2.0, 2, 6, &[0.3, 0.3], 0.4).unwrap()
            } else {
                default_cone_cantor(2, dim, 7, &[0.5, 0.5], 0.18).unwrap()
            };
            let rep = sweep_sobolev(&a, &s, &mu, &gbox, &[128], &family).unwrap();
            assert_eq!(
                rep.verdict,
                RatioVerdict::Bounded,
                "{name} at s = {p}/{q}: {:?}",
                rep.notes
            );
        }
    }
}

#[test]
fn elliptic_noncancelling_operators_blow_up() {
    let wirtinger = catalog("wirtinger", 2, None).unwrap();
    let laplacian = catalog("laplacian", 2, None).unwrap();
    let w_wirtinger = [1.0, 0.0];
    let w_laplacian = [1.0];
    for (name, op, witness) in [
        ("wirtinger", &wirtinger, &w_wirtinger[..]),
        ("laplacian", &laplacian, &w_laplacian[..]),
    ] {
        for (p, q) in S_GRID {
            let s = rat(p, q);
            let cfg = BlowupConfig {
                resolution: 256,
                box_side: 2.0,
                levels: 5,
                measure_level: 6,
                seed: 19,
            };
            let rep = blowup_noncancelling(op, witness, &s, &cfg).unwrap();
            assert_eq!(
                rep.verdict,
                RatioVerdict::Diverging,
                "{name} at s = {p}/{q}: {:?}",
                rep.growth
            );
        }
    }
}
