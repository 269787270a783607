use std::collections::HashSet;

use proptest::prelude::*;

use otm_core::collinfo::{self, JointDistribution, Variable};
use otm_core::f2codes::{self, BitVector, F2Matrix, LinearCode};
use otm_core::lightcone::{build_partition, certify_independence, reverse_lightcone, shell_accounting, GridSpec};
use otm_core::linalg::Sym2;
use otm_core::povmsearch::{corner_corrected_value, eval_povm_info, Povm, PovmInfo, Quantity};

fn joint(sizes: &[usize], weights: &[f64], names: &[&str]) -> JointDistribution {
    let vars: Vec<Variable> = names.iter().zip(sizes).map(|(n, &s)| Variable::new(*n, s)).collect();
    let size: usize = sizes.iter().product();
    JointDistribution::from_weights(vars, weights[..size].to_vec()).unwrap()
}

prop_compose! {
    fn arb_joint3()(sizes in proptest::collection::vec(2usize..=4, 3), w in proptest::collection::vec(0.0f64..1.0, 64)) -> JointDistribution {
        let mut w = w;
        w[0] += 1e-3;
        joint(&sizes, &w, &["X", "Y", "Z"])
    }
}

prop_compose! {
    fn arb_joint2(a: &'static str, b: &'static str)(sizes in proptest::collection::vec(2usize..=4, 2), w in proptest::collection::vec(0.0f64..1.0, 16)) -> JointDistribution {
        let mut w = w;
        w[0] += 1e-3;
        joint(&sizes, &w, &[a, b])
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn chain_rule_is_exact(d in arb_joint3()) {
        let lhs = collinfo::collision_mi(&d, &["X"], &["Y", "Z"]).unwrap();
        let rhs = collinfo::collision_mi(&d, &["X"], &["Z"]).unwrap() + collinfo::conditional_collision_mi(&d, &["X"], &["Y"], &["Z"]).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn information_is_nonnegative_and_bounded(d in arb_joint3()) {
        let ic = collinfo::collision_mi(&d, &["X"], &["Y"]).unwrap();
        let log_x = (d.size_of("X").unwrap() as f64).log2();
        prop_assert!(ic >= -1e-12);
        prop_assert!(ic <= log_x + 1e-9);
        prop_assert!(collinfo::conditional_collision_entropy(&d, &["X"], &["Y"]).unwrap() <= log_x + 1e-9);
        prop_assert!(collinfo::conditional_collision_mi(&d, &["X"], &["Y"], &["Z"]).unwrap() <= log_x + 1e-9);
        // Min-entropy never exceeds collision entropy.
        prop_assert!(collinfo::min_entropy(&d, &["X"]).unwrap() <= collinfo::collision_entropy(&d, &["X"]).unwrap() + 1e-12);
    }

    #[test]
    fn independent_pairs_add(a in arb_joint2("X", "Z"), b in arb_joint2("Y", "W")) {
        let ab = a.product(&b).unwrap();
        let joint = collinfo::collision_mi(&ab, &["X", "Y"], &["Z", "W"]).unwrap();
        let sum = collinfo::collision_mi(&a, &["X"], &["Z"]).unwrap() + collinfo::collision_mi(&b, &["Y"], &["W"]).unwrap();
        prop_assert!((joint - sum).abs() < 1e-9);
        let h = collinfo::collision_entropy(&ab, &["X", "Y"]).unwrap();
        let hs = collinfo::collision_entropy(&a, &["X"]).unwrap() + collinfo::collision_entropy(&b, &["Y"]).unwrap();
        prop_assert!((h - hs).abs() < 1e-9);
    }

    #[test]
    fn statistical_distance_is_a_metric(p in arb_joint3(), w in proptest::collection::vec(0.0f64..1.0, 64), v in proptest::collection::vec(0.0f64..1.0, 64)) {
        let sizes: Vec<usize> = p.variables().iter().map(|v| v.size).collect();
        let mut w = w; w[0] += 1e-3;
        let mut v = v; v[0] += 1e-3;
        let q = joint(&sizes, &w, &["X", "Y", "Z"]);
        let r = joint(&sizes, &v, &["X", "Y", "Z"]);
        let sd = |a: &JointDistribution, b: &JointDistribution| collinfo::statistical_distance(a, b).unwrap();
        prop_assert!((sd(&p, &q) - sd(&q, &p)).abs() < 1e-15);
        prop_assert!(sd(&p, &r) <= sd(&p, &q) + sd(&q, &r) + 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&sd(&p, &q)));
    }

    #[test]
    fn exponential_information_is_convex_in_the_channel(
        nx in 2usize..=4, ny in 2usize..=4, alpha in 0.0f64..=1.0,
        px in proptest::collection::vec(0.01f64..1.0, 4),
        w1 in proptest::collection::vec(0.0f64..1.0, 16),
        w2 in proptest::collection::vec(0.0f64..1.0, 16),
    ) {
        let rows = |w: &[f64]| -> Vec<Vec<f64>> {
            (0..nx).map(|x| {
                let r: Vec<f64> = (0..ny).map(|y| w[x * 4 + y] + 1e-3).collect();
                let s: f64 = r.iter().sum();
                r.into_iter().map(|v| v / s).collect()
            }).collect()
        };
        let (a, b) = (rows(&w1), rows(&w2));
        let mix: Vec<Vec<f64>> = a.iter().zip(&b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| alpha * x + (1.0 - alpha) * y).collect()).collect();
        let ic = |w: &[Vec<f64>]| {
            let vars = vec![Variable::new("X", nx), Variable::new("Y", ny)];
            let d = JointDistribution::from_weights(vars, (0..nx * ny).map(|i| px[i / ny] * w[i / ny][i % ny]).collect()).unwrap();
            collinfo::collision_mi(&d, &["X"], &["Y"]).unwrap()
        };
        let lhs = ic(&mix).exp2();
        prop_assert!(lhs <= alpha * ic(&a).exp2() + (1.0 - alpha) * ic(&b).exp2() + 1e-9);
    }
}

prop_compose! {
    fn arb_code()(n in 2usize..=10)(k in 1usize..=n, n in Just(n), seed in any::<u64>()) -> LinearCode {
        f2codes::random_code(n, k, seed).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn encoding_is_linear(code in arb_code(), a in any::<u64>(), b in any::<u64>()) {
        let k = code.k();
        let (x, y) = (BitVector::from_index(a % (1 << k), k), BitVector::from_index(b % (1 << k), k));
        let lhs = code.encode(&x.xor(&y)).unwrap();
        prop_assert_eq!(lhs, code.encode(&x).unwrap().xor(&code.encode(&y).unwrap()));
    }

    #[test]
    fn decoding_finds_a_nearest_codeword(code in arb_code(), w in any::<u64>()) {
        let (n, k) = (code.n(), code.k());
        let y = BitVector::from_index(w % (1 << n), n);
        let m = f2codes::ml_decode(&code, &y).unwrap();
        let d = code.encode(&m).unwrap().distance(&y);
        let best = (0..1u64 << k).map(|i| code.encode(&BitVector::from_index(i, k)).unwrap().distance(&y)).min().unwrap();
        prop_assert_eq!(d, best);
        // A received codeword decodes to its own message.
        let c = code.encode(&m).unwrap();
        prop_assert_eq!(f2codes::ml_decode(&code, &c).unwrap(), m);
    }

    #[test]
    fn serializations_round_trip(code in arb_code(), bits in proptest::collection::vec(0u8..=1, 0..40)) {
        prop_assert_eq!(LinearCode::from_json(&code.to_json()).unwrap(), code.clone());
        let g = code.generator();
        prop_assert_eq!(&F2Matrix::from_hex(g.rows(), g.cols(), &g.to_hex()).unwrap(), g);
        let v = BitVector::from_bits(&bits);
        prop_assert_eq!(v.to_string().parse::<BitVector>().unwrap(), v.clone());
        prop_assert_eq!(serde_json::from_str::<BitVector>(&serde_json::to_string(&v).unwrap()).unwrap(), v);
    }

    #[test]
    fn failure_probability_is_monotone_in_crossover(code in arb_code(), p in 0.0f64..0.45) {
        let lo = f2codes::exact_failure_prob(&code, p).unwrap();
        let hi = f2codes::exact_failure_prob(&code, p + 0.05).unwrap();
        prop_assert!((0.0..=1.0).contains(&lo));
        prop_assert!(lo <= hi + 1e-12);
    }
}

/// Random 3-outcome POVM `(A, B, I − A − B)` with PSD `A, B` scaled to fit.
/// A nonpositive `params[9]` merges `B` into the last element.
fn povm_from(params: &[f64]) -> Option<Povm> {
    let psd = |x: &[f64]| Sym2::new(x[0] * x[0] + x[1] * x[1], x[0] * x[2] + x[1] * x[3], x[2] * x[2] + x[3] * x[3]);
    let (a, b) = (psd(&params[0..4]), psd(&params[4..8]));
    let top = (a + b).eigenvalues().1;
    if top <= 1e-9 {
        return None;
    }
    let s = params[8] / top;
    let (a, b) = (a.scale(s), b.scale(s));
    if params.get(9).is_some_and(|&t| t <= 0.0) {
        return Povm::new(vec![a, Sym2::IDENTITY - a]).ok();
    }
    Povm::new(vec![a, b, Sym2::IDENTITY - a - b]).ok()
}

/// `2·log₂((2^{I₀} + 2^{I₁})/2)`: bound on `I₀ + I₁` that survives mixing.
fn total_envelope(i: &PovmInfo) -> f64 {
    2.0 * (0.5 * (i.ic_b0.exp2() + i.ic_b1.exp2())).log2()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn mixing_never_beats_the_components(
        x in proptest::collection::vec(-1.0f64..1.0, 8), y in proptest::collection::vec(-1.0f64..1.0, 8),
        sx in 0.05f64..1.0, sy in 0.05f64..1.0, w in 0.0f64..=1.0, tx in -1.0f64..1.0, ty in -1.0f64..1.0,
    ) {
        let (Some(p), Some(q)) = (povm_from(&[&x[..], &[sx, tx]].concat()), povm_from(&[&y[..], &[sy, ty]].concat())) else { return Ok(()) };
        let (ip, iq) = (eval_povm_info(&p).unwrap(), eval_povm_info(&q).unwrap());
        let mut infos = Vec::new();
        if let Ok(mixed) = p.mix(&q, w) {
            infos.push(eval_povm_info(&mixed).unwrap());
        }
        // Labeled mixtures only fit when both sides have two outcomes.
        if let Ok(labeled) = Povm::new(p.labeled_mixture(&q, w)) {
            infos.push(eval_povm_info(&labeled).unwrap());
        }
        for m in infos {
            for quantity in [Quantity::Greater, Quantity::Conditional] {
                prop_assert!(m.quantity(quantity) <= ip.quantity(quantity).max(iq.quantity(quantity)) + 1e-9);
            }
            prop_assert!(m.total() <= total_envelope(&m) + 1e-12);
            prop_assert!(total_envelope(&m) <= total_envelope(&ip).max(total_envelope(&iq)) + 1e-9);
        }
    }

    #[test]
    fn corner_bounds_shrink_with_the_cell(x in proptest::collection::vec(-1.0f64..1.0, 8), s in 0.05f64..0.8, eps in 0.001f64..0.1) {
        let Some(p) = povm_from(&[&x[..], &[s]].concat()) else { return Ok(()) };
        let raw = eval_povm_info(&p).unwrap();
        let big = corner_corrected_value(&p, eps).unwrap();
        let small = corner_corrected_value(&p, eps / 2.0).unwrap();
        let zero = corner_corrected_value(&p, 0.0).unwrap();
        for q in Quantity::ALL {
            prop_assert!(small.get(q) <= big.get(q) + 1e-12, "{q}");
            prop_assert!(raw.quantity(q) <= small.get(q) + 1e-12, "{q}");
            prop_assert!((zero.get(q) - raw.quantity(q)).abs() < 1e-9, "{q}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_tiles_the_grid(dim in 1u32..=3, r in 1u64..=3, ell in 2u64..=3, depth in 0u32..=1, per_axis in 1u64..=2) {
        let margin = ell.pow(depth);
        let outer = 2 * r + 2 * margin;
        let grid = GridSpec::new(dim, per_axis * outer, ell, depth).unwrap();
        let part = build_partition(&grid, r).unwrap();
        let mut seen = HashSet::new();
        for (j, (inner, shell)) in part.inner_cubes.iter().zip(&part.shells).enumerate() {
            for &qubit in inner.iter().chain(shell) {
                prop_assert!(seen.insert(qubit));
                prop_assert_eq!(part.cube_of(qubit), j as u64);
            }
        }
        prop_assert_eq!(seen.len() as u64, grid.n());
        let counts = shell_accounting(&part);
        prop_assert_eq!(counts.cu + counts.cu_bar, grid.n());
        prop_assert!(certify_independence(&part).pass);
    }

    #[test]
    fn light_cone_is_the_clipped_ball(dim in 1u32..=3, side in 1u64..=9, ell in 2u64..=3, depth in 0u32..=1, pick in any::<u64>()) {
        let grid = GridSpec::new(dim, side, ell, depth).unwrap();
        let qubit = pick % grid.n();
        let cone = reverse_lightcone(&grid, qubit).unwrap();
        let c = grid.coords(qubit);
        let rad = grid.radius();
        let expected: u64 = c.iter().map(|&x| x.min(rad) + (side - 1 - x).min(rad) + 1).product();
        prop_assert_eq!(cone.len() as u64, expected);
        prop_assert!(cone.contains(&qubit));
        prop_assert!(cone.windows(2).all(|w| w[0] < w[1]));
    }
}
