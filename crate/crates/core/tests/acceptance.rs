//! Prints one PASS/FAIL line per acceptance criterion. The assertions that
//! gate the build live in the unit and integration tests; this file reports.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use schmidt_core::circuit::lcu_synthesize;
use schmidt_core::generators::{random_matrix, tfim_hamiltonian, DistributionKind, Rng, TfimSpec, Topology};
use schmidt_core::linalg::{norm2_diff, vec, Complex, ComplexMatrix, ComplexVector};
use schmidt_core::report::{
    gram_distributions, iris_report, qft_growth, qft_ratios, rings_contrast, rings_wins, run_recipe,
    spectrum_comparison, spectrum_csv, tfim_report, vqc_depth, Recipe, RecipeOptions, IRIS_REFERENCE_L2,
    TFIM_CUTOFF, TFIM_TARGETS,
};
use schmidt_core::terms::{
    apply, entry, entry_counted, invert_single_term, operator_terms, split_term_into_unitaries, sum_apply, Mat2,
    TensorTermOperator, TensorTermVector, TermSum,
};
use schmidt_core::tree::{approx_error, decompose, reconstruct, DecompositionMode, ThresholdSpec};

struct Line {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn random_vector(dim: usize, kind: DistributionKind, rng: &mut Rng) -> ComplexVector {
    vec(&random_matrix(1, dim, kind, rng).unwrap()).normalized().unwrap()
}

fn complex_normal(rng: &mut Rng) -> Complex {
    Complex::new(rng.normal(), rng.normal())
}

fn random_unitary(rng: &mut Rng) -> Mat2 {
    let (t, a, b, g) = (rng.uniform() * 3.0, rng.normal(), rng.normal(), rng.normal());
    let e = |x: f64| Complex::from_polar(1.0, x);
    Mat2([
        [e(a) * t.cos(), -e(a + b) * t.sin()],
        [e(a + g) * t.sin(), e(a + b + g) * t.cos()],
    ])
}

/// `U₁ · diag(s₁, s₂) · U₂` with singular values in [0.5, 1.5].
fn random_invertible(rng: &mut Rng) -> Mat2 {
    let d = Mat2([
        [Complex::new(0.5 + rng.uniform(), 0.0), Complex::new(0.0, 0.0)],
        [Complex::new(0.0, 0.0), Complex::new(0.5 + rng.uniform(), 0.0)],
    ]);
    random_unitary(rng) * d * random_unitary(rng)
}

fn random_operator_sum(n: usize, r: usize, rng: &mut Rng, factor: fn(&mut Rng) -> Mat2) -> TermSum<TensorTermOperator> {
    let terms = (0..r)
        .map(|_| TensorTermOperator::new(complex_normal(rng), (0..n).map(|_| factor(rng)).collect()).unwrap())
        .collect();
    TermSum::new(terms).unwrap()
}

fn dense_term(t: &TensorTermOperator) -> ComplexMatrix {
    t.factors
        .iter()
        .fold(ComplexMatrix::identity(1), |acc, q| acc.kron(&q.to_matrix()))
        .scale(t.alpha)
}

fn dense_sum(a: &TermSum<TensorTermOperator>) -> ComplexMatrix {
    a.terms().iter().map(dense_term).reduce(|x, y| x.add(&y).unwrap()).unwrap()
}

fn dense_product_state(psi: &TensorTermVector) -> ComplexVector {
    let v = psi.factors.iter().fold(vec![Complex::new(1.0, 0.0)], |acc, f| {
        acc.iter().flat_map(|a| [a * f[0], a * f[1]]).collect()
    });
    ComplexVector::new(v).unwrap().scale(psi.beta)
}

fn max_diff(a: &ComplexVector, b: &ComplexVector) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn criterion_1() -> Line {
    let start = Instant::now();
    let mut rng = Rng::new(101);
    let mut worst_mass = 0.0f64;
    let mut worst_rec = 0.0f64;
    for kind in DistributionKind::ALL {
        for _ in 0..5 {
            let v = random_vector(1 << 10, kind, &mut rng);
            let d = decompose(&v, DecompositionMode::Vector, ThresholdSpec::none()).unwrap();
            let mass: f64 = d.terms().iter().map(|t| t.coefficient * t.coefficient).sum();
            worst_mass = worst_mass.max((mass - 1.0).abs());
            worst_rec = worst_rec.max(norm2_diff(&reconstruct(&d), &v).unwrap());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Line {
        id: 1,
        name: "parseval and round trip",
        pass: worst_mass <= 1e-10 && worst_rec <= 1e-10 && secs <= 5.0,
        detail: format!("20 vectors n=10: max |sum c^2 - 1| {worst_mass:.1e}, max reconstruction error {worst_rec:.1e}, {secs:.2} s"),
    }
}

fn criterion_2() -> Line {
    let mut rng = Rng::new(202);
    let mut worst_identity = 0.0f64;
    let mut worst_dense = 0.0f64;
    let mut cases = 0;
    for kind in DistributionKind::ALL {
        let v = random_vector(1 << 12, kind, &mut rng);
        for cut in [1e-1, 1e-2, 1e-3] {
            for spec in [ThresholdSpec::coefficient(cut).unwrap(), ThresholdSpec::probability(cut).unwrap()] {
                let d = decompose(&v, DecompositionMode::Vector, spec).unwrap();
                let e = approx_error(&d, &v).unwrap();
                let identity = (1.0 - d.kept_mass()).max(0.0).sqrt();
                let dense = norm2_diff(&v, &reconstruct(&d)).unwrap();
                worst_identity = worst_identity.max((e.l2 - identity).abs());
                worst_dense = worst_dense.max((e.l2 - dense).abs());
                cases += 1;
            }
        }
    }
    Line {
        id: 2,
        name: "error identity",
        pass: worst_identity <= 1e-9 && worst_dense <= 1e-9,
        detail: format!(
            "{cases} cases n=12: max |l2 - sqrt(1 - kept)| {worst_identity:.1e}, max |l2 - dense| {worst_dense:.1e}"
        ),
    }
}

fn criterion_3() -> Line {
    let mut rng = Rng::new(303);
    let mut mismatches = 0;
    for i in 0..10 {
        let kind = DistributionKind::ALL[i % 4];
        let v = random_vector(1 << 10, kind, &mut rng);
        let spec = if i % 2 == 0 {
            ThresholdSpec::coefficient(1e-2).unwrap()
        } else {
            ThresholdSpec::probability(1e-4).unwrap()
        };
        let pruned = decompose(&v, DecompositionMode::Vector, spec).unwrap();
        let full = decompose(&v, DecompositionMode::Vector, ThresholdSpec::none()).unwrap();
        let filtered: Vec<_> = full.terms().iter().filter(|t| spec.keeps(t.coefficient)).collect();
        let same = filtered.len() == pruned.terms().len()
            && filtered
                .iter()
                .zip(pruned.terms())
                .all(|(a, b)| a.path == b.path && (a.coefficient - b.coefficient).abs() <= 1e-14);
        mismatches += usize::from(!same);
    }
    Line {
        id: 3,
        name: "pruning exactness",
        pass: mismatches == 0,
        detail: format!("10 instances n=10: {mismatches} mismatching term sets"),
    }
}

fn criterion_4() -> Line {
    let mut rng = Rng::new(404);
    let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
    let mut note = |k: &'static str, e: f64| {
        let w = worst.entry(k).or_insert(0.0);
        *w = w.max(e);
    };
    for trial in 0..12 {
        let n = 1 + trial % 8;
        let r = 1 + (trial * 3) % 8;
        let a = random_operator_sum(n, r, &mut rng, random_invertible);
        let dense = dense_sum(&a);
        let factors: Vec<[Complex; 2]> = (0..n)
            .map(|_| {
                let (x, y) = (complex_normal(&mut rng), complex_normal(&mut rng));
                let norm = (x.norm_sqr() + y.norm_sqr()).sqrt();
                [x / norm, y / norm]
            })
            .collect();
        let psi = TensorTermVector::new(complex_normal(&mut rng), factors).unwrap();
        let psi_dense = dense_product_state(&psi);

        let t0 = &a.terms()[0];
        let applied = dense_product_state(&apply(t0, &psi).unwrap());
        note("apply", max_diff(&applied, &dense_term(t0).matvec(&psi_dense).unwrap()));

        let full = dense.matvec(&psi_dense).unwrap();
        for index in [0, (1 << n) - 1, (trial * 7) % (1 << n)] {
            note("entry", (entry(&a, &psi, index).unwrap() - full.data()[index]).norm());
        }

        let x = vec(&random_matrix(1, 1 << n, DistributionKind::Normal, &mut rng).unwrap());
        note("sum_apply", max_diff(&sum_apply(&a, &x).unwrap(), &dense.matvec(&x).unwrap()));

        let inv = invert_single_term(t0).unwrap();
        let prod = dense_term(t0).matmul(&dense_term(&inv)).unwrap();
        note("invert", prod.max_abs_diff(&ComplexMatrix::identity(1 << n)));

        if n <= 5 {
            for mode in [DecompositionMode::Vector, DecompositionMode::Operator] {
                let d = decompose(&vec(&dense), mode, ThresholdSpec::none()).unwrap();
                let back = dense_sum(&operator_terms(&d).unwrap());
                note("conversion", back.max_abs_diff(&dense));
            }
        }
    }
    // entry cost at fixed r = 3 for n = 1..=12
    let counts: Vec<u64> = (1..=12)
        .map(|n| {
            let a = random_operator_sum(n, 3, &mut rng, random_invertible);
            entry_counted(&a, &TensorTermVector::basis(n, 0), 0).unwrap().1
        })
        .collect();
    let linear = counts.windows(3).all(|w| w[2] + w[0] == 2 * w[1]) && counts[1] > counts[0];
    let all_ok = worst.values().all(|&e| e <= 1e-10);
    let errs: Vec<String> = worst.iter().map(|(k, e)| format!("{k} {e:.1e}")).collect();
    Line {
        id: 4,
        name: "term algebra oracles",
        pass: all_ok && linear,
        detail: format!(
            "max errors [{}]; entry multiplications n=1..12 at r=3: {:?} (linear: {linear})",
            errs.join(", "),
            counts
        ),
    }
}

fn criterion_11() -> Line {
    let mut rng = Rng::new(1111);
    let mut worst = 0.0f64;
    let mut cases = Vec::new();
    for (n, r) in [(1, 1), (1, 2), (2, 3), (3, 4), (2, 4), (3, 2)] {
        let a = random_operator_sum(n, r, &mut rng, random_unitary);
        let lcu = lcu_synthesize(&a).unwrap();
        let psi = vec(&random_matrix(1, 1 << n, DistributionKind::Normal, &mut rng).unwrap());
        worst = worst.max(max_diff(&lcu.apply(&psi).unwrap(), &sum_apply(&a, &psi).unwrap()));
        cases.push(format!("n={n} r={r}"));
    }
    // one term with a non-unitary factor, split before synthesis
    let mut a = random_operator_sum(2, 2, &mut rng, random_unitary).into_terms();
    a[1].factors[0] = random_invertible(&mut rng);
    let original = TermSum::new(a.clone()).unwrap();
    let split: Vec<_> = a.iter().flat_map(|t| split_term_into_unitaries(t, 1e-10).unwrap()).collect();
    let split_count = split.len();
    let lcu = lcu_synthesize(&TermSum::new(split).unwrap()).unwrap();
    let psi = vec(&random_matrix(1, 4, DistributionKind::Normal, &mut rng).unwrap());
    worst = worst.max(max_diff(&lcu.apply(&psi).unwrap(), &sum_apply(&original, &psi).unwrap()));
    cases.push(format!("n=2 r=2 split into {split_count} unitary terms"));
    Line {
        id: 11,
        name: "lcu verification",
        pass: worst <= 1e-8,
        detail: format!("{}: max deviation {worst:.1e}", cases.join(", ")),
    }
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

fn rerun_in_pool(threads: usize, dir: &Path) {
    let opts = RecipeOptions {
        out_dir: Some(dir.to_path_buf()),
        skip_spectrum: true,
        ..RecipeOptions::default()
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        for r in Recipe::ALL {
            run_recipe(r, &opts).unwrap();
        }
    });
}

fn ring_c4_spectrum_csv(threads: usize) -> (String, f64, schmidt_core::report::SpectrumComparison) {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let h = tfim_hamiltonian(&TfimSpec::new(10, 0.1, 0.5, 4)).unwrap();
        let d = decompose(&vec(&h), DecompositionMode::Vector, ThresholdSpec::coefficient(TFIM_CUTOFF).unwrap()).unwrap();
        let start = Instant::now();
        let s = spectrum_comparison(&h, &d).unwrap();
        (spectrum_csv(&s), start.elapsed().as_secs_f64(), s)
    })
}

#[test]
fn acceptance() {
    let mut lines = vec![criterion_1(), criterion_2(), criterion_3(), criterion_4()];

    let run_a = tempfile::tempdir().unwrap();
    let opts = RecipeOptions {
        out_dir: Some(run_a.path().to_path_buf()),
        skip_spectrum: true,
        ..RecipeOptions::default()
    };

    let start = Instant::now();
    let (qft, _) = qft_growth(&opts, &[3, 4, 5, 6]).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let ratios = qft_ratios(&qft);
    let fallback = qft.iter().all(|r| r.cutoff.is_none());
    lines.push(Line {
        id: 5,
        name: "qft linear growth",
        pass: ratios.len() == 3
            && ratios.iter().all(|r| (1.6..=2.4).contains(r))
            && qft.iter().all(|r| r.within_bound())
            && secs <= 60.0,
        detail: format!(
            "kept {:?}, ratios {:?}, max l2 {:.1e}{}, {secs:.2} s",
            qft.iter().map(|r| r.kept).collect::<Vec<_>>(),
            ratios,
            qft.iter().map(|r| r.l2).fold(0.0, f64::max),
            if fallback { ", single coefficient cluster so the gap cutoff keeps every nonzero term" } else { "" }
        ),
    });

    let start = Instant::now();
    let (tfim, _) = tfim_report(&opts).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let runs: Vec<String> = tfim
        .runs
        .iter()
        .map(|r| format!("{} c={} {:?} {:.4}", r.topology, r.c, r.kind, r.l2))
        .collect();
    lines.push(Line {
        id: 6,
        name: "tfim reproduction",
        pass: tfim.reproduced(Topology::default()) && secs <= 120.0,
        detail: format!(
            "targets {:?}; {}; default {} reproduced {}, chain reproduced {}; {secs:.1} s",
            TFIM_TARGETS,
            runs.join(", "),
            Topology::default(),
            tfim.reproduced(Topology::default()),
            tfim.reproduced(Topology::Chain)
        ),
    });

    let (csv_pool8, secs, spectrum) = ring_c4_spectrum_csv(8);
    lines.push(Line {
        id: 7,
        name: "tfim spectrum",
        pass: spectrum.weyl_holds() && spectrum.top_within_bound() && secs <= 600.0,
        detail: format!(
            "c=4: max |l - l~| {:.3e} <= ||H - H~||_F {:.3e} ({}), top-5 |l| within bound ({}), two 1024x1024 eigensolves {secs:.1} s",
            spectrum.max_deviation,
            spectrum.bound,
            spectrum.weyl_holds(),
            spectrum.top_within_bound()
        ),
    });

    let (gram, _) = gram_distributions(&opts, 20, 16).unwrap();
    lines.push(Line {
        id: 8,
        name: "distribution contrast",
        pass: gram.passed(),
        detail: format!("wins against normal over 20 seeds: {:?}", gram.wins),
    });

    let (vqc, _) = vqc_depth(&opts, 4, &[4, 8, 12, 16], 10).unwrap();
    let mut groups = 0;
    for g in 1..10u64 {
        let o = RecipeOptions {
            seed: 10 * g,
            ..RecipeOptions::default()
        };
        groups += usize::from(vqc_depth(&o, 4, &[4, 8, 12, 16], 10).unwrap().0.passed());
    }
    lines.push(Line {
        id: 9,
        name: "vqc depth trend",
        pass: vqc.passed(),
        detail: format!(
            "seeds 0..9 means {:?}; other seed groups 10..99 increasing in {groups}/9",
            vqc.means.iter().map(|m| (m * 1e4).round() / 1e4).collect::<Vec<_>>()
        ),
    });

    let (rings, _) = rings_contrast(&opts, 128, 10).unwrap();
    let wins = rings_wins(&rings);
    lines.push(Line {
        id: 10,
        name: "rings contrast",
        pass: wins >= 8,
        detail: format!("rings gap below uniform-gram gap in {wins}/10 seeds"),
    });

    lines.push(criterion_11());

    let (iris, _) = iris_report(&opts, 128).unwrap();
    lines.push(Line {
        id: 12,
        name: "iris recording",
        pass: iris.l2.is_finite(),
        detail: format!(
            "{} samples, {} terms, kept {} at the gap cutoff, l2 {:.4} (recorded against {IRIS_REFERENCE_L2})",
            iris.samples, iris.terms, iris.kept, iris.l2
        ),
    });

    let run_b = tempfile::tempdir().unwrap();
    let run_c = tempfile::tempdir().unwrap();
    rerun_in_pool(1, run_b.path());
    rerun_in_pool(8, run_c.path());
    let (a, b, c) = (files(run_a.path()), files(run_b.path()), files(run_c.path()));
    let (csv_pool1, _, _) = ring_c4_spectrum_csv(1);
    let differing: Vec<&String> = a.keys().filter(|k| a.get(*k) != b.get(*k) || b.get(*k) != c.get(*k)).collect();
    lines.push(Line {
        id: 13,
        name: "determinism",
        pass: !a.is_empty() && a.len() == b.len() && b.len() == c.len() && differing.is_empty() && csv_pool1 == csv_pool8,
        detail: format!(
            "{} artifact files compared across runs and 1 / 8 threads, {} differ; spectrum csv identical across 1 / 8 threads: {}",
            a.len(),
            differing.len(),
            csv_pool1 == csv_pool8
        ),
    });

    // written to the raw handle so the table shows without --nocapture
    let passed = lines.iter().filter(|l| l.pass).count();
    let mut table = String::from("\n");
    for l in &lines {
        table.push_str(&format!(
            "criterion {:>2} {:<24} {} | {}\n",
            l.id,
            l.name,
            if l.pass { "PASS" } else { "FAIL" },
            l.detail
        ));
    }
    table.push_str(&format!("{passed}/{} criteria pass\n", lines.len()));
    std::io::stdout().write_all(table.as_bytes()).unwrap();
}
