//! Cross-checks against a dense-matrix reference built from matrix
//! elements: `<j|U|i> = G[loc(j), loc(i)]` when `i` and `j` agree off the
//! targets, else 0.

use cdsim::circuit::Circuit;
use cdsim::gc_compile::compile_adaptive;
use cdsim::metrics::{max_abs_diff, total_variation};
use cdsim::random::{random_circuit, random_source_circuit};
use cdsim::rng::seeded;
use cdsim::{BitString, Gate};
use num_complex::Complex64 as C64;
use rand::Rng;

type Dense = Vec<Vec<C64>>;

fn local(index: usize, targets: &[usize]) -> usize {
    targets.iter().fold(0, |acc, &q| (acc << 1) | ((index >> q) & 1))
}

fn embed(g: &Gate, targets: &[usize], width: usize) -> Dense {
    let dim = 1 << width;
    let mask: usize = targets.iter().map(|&q| 1 << q).sum();
    let d = g.dim();
    let m = g.matrix();
    (0..dim)
        .map(|j| {
            (0..dim)
                .map(|i| {
                    if i & !mask == j & !mask {
                        m[local(j, targets) * d + local(i, targets)]
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
                .collect()
        })
        .collect()
}

fn apply(u: &Dense, v: &[C64]) -> Vec<C64> {
    u.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn reference_state(c: &Circuit) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); 1 << c.width()];
    v[0] = C64::new(1.0, 0.0);
    for layer in c.layers() {
        for pg in layer {
            v = apply(&embed(&pg.gate, &pg.targets, c.width()), &v);
        }
    }
    v
}

/// Distribution of the listed qubits, first qubit most significant.
fn reference_distribution(v: &[C64], qubits: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; 1 << qubits.len()];
    for (i, a) in v.iter().enumerate() {
        out[local(i, qubits)] += a.norm_sqr();
    }
    out
}

#[test]
fn statevector_matches_dense_reference() {
    let mut rng = seeded(100);
    for _ in 0..20 {
        let width = rng.gen_range(1..=5);
        let c = random_circuit(width, 3, &mut rng).unwrap();
        let want = reference_state(&c);
        let got = c.run().unwrap();
        let err = want
            .iter()
            .zip(got.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }
}

#[test]
fn flattened_joint_matches_dense_reference() {
    let mut rng = seeded(101);
    for _ in 0..4 {
        let width = rng.gen_range(2..=3);
        let src = random_source_circuit(width, 1, &mut rng).unwrap();
        let gc = compile_adaptive(&src).unwrap();
        assert!(gc.width() <= 7);
        let g = BitString::from_bits((0..gc.guess_len()).map(|_| rng.gen_range(0..2u8)));
        let nc = gc.flatten(&g).unwrap();
        let v = reference_state(nc.circuit());
        let joint = reference_distribution(&v, nc.circuit().measured());
        assert!(max_abs_diff(&joint, &nc.joint_distribution().unwrap()) < 1e-12);

        // post-selection by hand on the reference joint
        let k = g.len();
        let m = nc.outputs().len();
        let block = &joint[g.to_index() << m..(g.to_index() + 1) << m];
        let hit: f64 = block.iter().sum();
        assert!((hit - 2f64.powi(-(k as i32))).abs() < 1e-12);
        let cond: Vec<f64> = block.iter().map(|p| p / hit).collect();
        let source = reference_distribution(&reference_state(&src), src.measured());
        assert!(total_variation(&cond, &source) < 1e-10);
    }
}

#[test]
fn bell_rotation_reports_the_documented_labels() {
    // |Psi+>, |Psi->, |Phi+>, |Phi-> (qubit a first) map to 00, 01, 10, 11
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    let r = |x: f64| C64::new(x, 0.0);
    let states = [
        [z, r(h), r(h), z],
        [z, r(h), r(-h), z],
        [r(h), z, z, r(h)],
        [r(h), z, z, r(-h)],
    ];
    let u = embed(&Gate::bell_rotation(), &[1, 0], 2);
    for (label, s) in states.iter().enumerate() {
        // qubit 1 is the more significant local bit: reorder to little endian
        let v: Vec<C64> = (0..4).map(|i| s[((i & 1) << 1) | (i >> 1)]).collect();
        let out = apply(&u, &v);
        let dist = reference_distribution(&out, &[1, 0]);
        assert!((dist[label] - 1.0).abs() < 1e-12, "{label}: {dist:?}");
    }
}
