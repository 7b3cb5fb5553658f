//! Acceptance gate: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always show up in `cargo test` output.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::*;
use wabisim::language::{build_functional_table, oracle_equiv, sigma_lwa, sigma_wa};
use wabisim::linalg::congruence_from_partition;
use wabisim::linearpr::{
    check_linear_bisimulation, decide_equiv, default_max_iter, refine_step, run_refinement,
    RefinementOutcome, RefinementState,
};
use wabisim::linsolve::{in_span, verify_combination, SpanAnswer, SpanQuery, SpanSolver};
use wabisim::semiring::{
    axioms_suite, Boolean, Descriptor, Integer, MaxTimes, NonnegRational, Rational, Semiring,
    Tropical,
};
use wabisim::setbisim::{canonical_projection, is_w_homomorphism, largest_weighted_bisimulation};
use wabisim::{Functional, Partition, StateId, Vector, WeightedAutomaton};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ids(v: &[&str]) -> Vec<StateId> {
    v.iter().map(|s| StateId::from(*s)).collect()
}

fn load<K: Semiring>(name: &str) -> WeightedAutomaton<K> {
    WeightedAutomaton::parse(&fixture(name)).expect("fixture parses")
}

fn fig1<K: Semiring>(name: &str, expected_weight: K) -> Result<(), String> {
    let m: WeightedAutomaton<K> = load(name);
    let p = largest_weighted_bisimulation(&m);
    let want = Partition::new(
        m.states(),
        vec![ids(&["x0"]), ids(&["x1", "x2"]), ids(&["x3", "x4", "x5"])],
    )
    .unwrap();
    ensure(p == want, || format!("{name}: partition {p}"))?;
    let q = m.quotient(&p).map_err(|e| e.to_string())?;
    let w = q.weight("x0", "a", "x1");
    ensure(w == expected_weight, || format!("{name}: [x0]-a->[x1] weight {w}"))?;
    let w3 = q.weight("x0", "a", "x3");
    let third = K::parse_weight("1/3").unwrap();
    ensure(w3 == third, || format!("{name}: [x0]-a->[x3] weight {w3}"))
}

fn criterion_1() -> Outcome {
    fig1::<NonnegRational>("fig1_plus.json", NonnegRational::new(2, 3))?;
    fig1::<MaxTimes>("fig1_maxtimes.json", MaxTimes::new(1, 3).unwrap())?;
    Ok("partition {x0},{x1,x2},{x3,x4,x5}; quotient weights 2/3 (plus) and 1/3 (max)".into())
}

fn criterion_2() -> Outcome {
    let m: WeightedAutomaton<NonnegRational> = load("fig2_union.json");
    let half = NonnegRational::new(1, 2);
    let mut checked = 0;
    for w in all_words(m.alphabet(), 4) {
        let expected = match w.to_string().as_str() {
            "ab" | "ac" => half.clone(),
            _ => NonnegRational::zero(),
        };
        for x in ["x0", "y0"] {
            let by_paths = path_weight(&m, x, &w);
            let by_def = sigma_wa(&m, x, &w).map_err(|e| e.to_string())?;
            let by_vec = sigma_lwa(&m, &Vector::unit(x), &w).map_err(|e| e.to_string())?;
            ensure(by_paths == expected && by_def == expected && by_vec == expected, || {
                format!("σ({x})({w}) = {by_def} / {by_vec} / {by_paths}, expected {expected}")
            })?;
            checked += 1;
        }
    }
    let out = run_refinement(&m, default_max_iter(&m)).map_err(|e| e.to_string())?;
    let eq = decide_equiv(&out, &Vector::unit("x0"), &Vector::unit("y0")).map_err(|e| e.to_string())?;
    ensure(eq, || "x0 and y0 not language equivalent".into())?;
    let p = largest_weighted_bisimulation(&m);
    ensure(!p.same_block("x0", "y0"), || format!("x0 ~w y0 in {p}"))?;
    Ok(format!("{checked} σ values exact; x0 ~l y0; x0 ≁w y0"))
}

fn rows_dense<K: Semiring>(m: &WeightedAutomaton<K>, rows: &[Functional<K>]) -> Vec<Vec<K>> {
    rows.iter().map(|f| f.to_dense(m.states())).collect()
}

fn agree_with_oracle<K: SpanSolver>(
    m: &WeightedAutomaton<K>,
    out: &RefinementOutcome<K>,
    pairs: &[(Vector<K>, Vector<K>)],
    bound: usize,
) -> Result<(usize, usize), String> {
    let mut equal = 0;
    for (u, v) in pairs {
        let decided = decide_equiv(out, u, v).map_err(|e| e.to_string())?;
        let oracle = oracle_equiv(m, u, v, bound).map_err(|e| e.to_string())?;
        ensure(decided != oracle.is_distinguished(), || {
            format!("{u} vs {v}: refinement says {decided}, oracle {oracle:?}")
        })?;
        equal += decided as usize;
    }
    Ok((pairs.len(), equal))
}

fn unit_pairs<K: Semiring>(m: &WeightedAutomaton<K>) -> Vec<(Vector<K>, Vector<K>)> {
    let s = m.states();
    (0..s.len())
        .flat_map(|i| (i..s.len()).map(move |j| (Vector::unit(s[i].clone()), Vector::unit(s[j].clone()))))
        .collect()
}

/// Random pairs, half of them built as `u` and `u` plus a multiple of a
/// difference of two states so that equivalent pairs show up.
fn random_pairs<K: Semiring>(
    rng: &mut StdRng,
    m: &WeightedAutomaton<K>,
    count: usize,
    weight: impl Fn(&mut StdRng) -> K,
    shift: impl Fn(&mut StdRng, &Vector<K>, &StateId, &StateId) -> Vector<K>,
) -> Vec<(Vector<K>, Vector<K>)> {
    let s = m.states();
    (0..count)
        .map(|i| {
            let u = random_vector(rng, s, &weight);
            let v = if i % 2 == 0 {
                random_vector(rng, s, &weight)
            } else {
                let (a, b) = (&s[rng.gen_range(0..s.len())], &s[rng.gen_range(0..s.len())]);
                shift(rng, &u, a, b)
            };
            (u, v)
        })
        .collect()
}

fn criterion_3() -> Outcome {
    let m: WeightedAutomaton<Integer> = load("ex43_int.json");
    let int = |v: [i64; 5]| v.map(Integer::from).to_vec();
    let s0 = RefinementState::initial(&m);
    ensure(rows_dense(&m, &s0.rows()) == vec![int([0, 1, 0, 1, 1])], || "F_0 differs".into())?;
    let s1 = refine_step(&s0, &m).map_err(|e| e.to_string())?;
    let added: Vec<Functional<Integer>> = s1.frontier().map(|g| g.row.clone()).collect();
    ensure(rows_dense(&m, &added) == vec![int([1, 2, 1, 1, 2])], || "first added row differs".into())?;
    let table = build_functional_table(&m, 3);
    let trows: Vec<Functional<Integer>> = table.rows().iter().map(|(_, f)| f.clone()).collect();
    ensure(
        rows_dense(&m, &trows) == vec![int([0, 1, 0, 1, 1]), int([1, 2, 1, 1, 2]), int([2, 4, 1, 2, 4])],
        || "V_3 table differs".into(),
    )?;
    let out = run_refinement(&m, default_max_iter(&m)).map_err(|e| e.to_string())?;
    let RefinementOutcome::Stabilized { iterations, .. } = out else {
        return Err("did not stabilize".into());
    };
    let mut rng = StdRng::seed_from_u64(43);
    let mut pairs = unit_pairs(&m);
    ensure(pairs.len() == 15, || format!("{} unit pairs", pairs.len()))?;
    pairs.extend(random_pairs(
        &mut rng,
        &m,
        100,
        |r| Integer::from(r.gen_range(-3..=3)),
        |r, u, a, b| {
            let k = Integer::from(r.gen_range(-2..=2));
            u.add(&Vector::unit(a.clone()).scale(&k))
                .add(&Vector::unit(b.clone()).scale(&Integer::from(-1).times(&k)))
        },
    ));
    let (n, equal) = agree_with_oracle(&m, &out, &pairs, 6)?;
    Ok(format!("stabilized at j={iterations}; {n} pairs agree with oracle at bound 6 ({equal} equivalent)"))
}

fn criterion_4() -> Outcome {
    let m: WeightedAutomaton<MaxTimes> = load("ex45_maxtimes.json");
    let one = MaxTimes::one();
    let s0 = RefinementState::initial(&m);
    ensure(rows_dense(&m, &s0.rows()) == vec![vec![one.clone(), one.clone(), one]], || "F_0 differs".into())?;
    let out = run_refinement(&m, 4).map_err(|e| e.to_string())?;
    let RefinementOutcome::Stabilized { iterations, ref generators, .. } = out else {
        return Err("no stabilization within 4 iterations".into());
    };
    let a_row = &generators[1];
    ensure(
        a_row.word.to_string() == "a"
            && a_row.row.to_dense(m.states())
                == vec![MaxTimes::new(1, 10).unwrap(), MaxTimes::new(1, 2).unwrap(), MaxTimes::zero()],
        || format!("o∘t_a row {}", a_row.row),
    )?;
    let weights = [(0, 1), (1, 10), (1, 2), (1, 1)];
    let pick = |r: &mut StdRng| {
        let (n, d) = weights[r.gen_range(0..weights.len())];
        MaxTimes::new(n, d).unwrap()
    };
    let mut rng = StdRng::seed_from_u64(45);
    let mut pairs = unit_pairs(&m);
    pairs.extend(random_pairs(&mut rng, &m, 100, pick, |r, u, a, _| {
        // Raise one coordinate: often invisible under max.
        let (n, d) = weights[r.gen_range(0..weights.len())];
        u.add(&Vector::unit(a.clone()).scale(&MaxTimes::new(n, d).unwrap()))
    }));
    let (n, equal) = agree_with_oracle(&m, &out, &pairs, 8)?;
    Ok(format!(
        "stabilized at j={iterations} with {} generators; {n} pairs agree with oracle at bound 8 ({equal} equivalent)",
        generators.len()
    ))
}

fn criterion_5() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    let (mut same_block_pairs, mut coherence_checks, mut max_j) = (0usize, 0usize, 0usize);
    for round in 0..200 {
        let m = random_rational_automaton(&mut rng, 5, 2);
        let ctx = |what: &str| format!("automaton #{round} ({what}):\n{}", m.serialize());
        let p = largest_weighted_bisimulation(&m);
        let out = run_refinement(&m, default_max_iter(&m)).map_err(|e| e.to_string())?;
        let RefinementOutcome::Stabilized { iterations, .. } = out else {
            return Err(ctx("5d: no stabilization over a field"));
        };
        // d. field termination
        ensure(iterations <= m.states().len(), || ctx("5d: iterations exceed |X|"))?;
        max_j = max_j.max(iterations);
        // a. ~w ⊆ ~l
        for b in p.blocks() {
            for x in b {
                for y in b {
                    let eq = decide_equiv(&out, &Vector::unit(x.clone()), &Vector::unit(y.clone()))
                        .map_err(|e| e.to_string())?;
                    ensure(eq, || ctx(&format!("5a: {x} ~w {y} but not ~l")))?;
                    same_block_pairs += 1;
                }
            }
        }
        // b. the canonical projection onto the quotient is a homomorphism
        let q = m.quotient(&p).map_err(|e| e.to_string())?;
        let hom = is_w_homomorphism(&m, &q, &canonical_projection(&p)).map_err(|e| e.to_string())?;
        ensure(hom.is_ok(), || ctx("5b: projection is not a homomorphism"))?;
        // e. lifted partition is a linear bisimulation
        let lifted = congruence_from_partition::<Rational>(&p);
        let cert = check_linear_bisimulation(&lifted, &m).map_err(|e| e.to_string())?;
        ensure(cert.is_ok(), || ctx(&format!("5e: {cert}")))?;
        // c. ker(F_n) is agreement on words of length ≤ n
        let mut pairs = unit_pairs(&m);
        pairs.extend(random_pairs(&mut rng, &m, 50, small_rational, |r, u, a, b| {
            let k = small_rational(r);
            u.add(&Vector::unit(a.clone()).scale(&k))
                .add(&Vector::unit(b.clone()).scale(&k.negate().unwrap()))
        }));
        let words = all_words(m.alphabet(), 4);
        let per_state: Vec<Vec<Rational>> = words
            .iter()
            .map(|w| m.states().iter().map(|x| path_weight(&m, x.as_str(), w)).collect())
            .collect();
        let weigh = |v: &Vector<Rational>, wi: usize| {
            m.states()
                .iter()
                .zip(&per_state[wi])
                .fold(Rational::zero(), |acc, (x, k)| acc.plus(&v.get(x.as_str()).times(k)))
        };
        // Length of the shortest word telling each pair apart, if any up to length 4.
        let first_split: Vec<Option<usize>> = pairs
            .iter()
            .map(|(u, v)| {
                (0..words.len())
                    .find(|&wi| weigh(u, wi) != weigh(v, wi))
                    .map(|wi| words[wi].len())
            })
            .collect();
        let mut state = RefinementState::initial(&m);
        for n in 0..=4 {
            let gens = state.presentation(m.states());
            for ((u, v), split) in pairs.iter().zip(&first_split) {
                let kernel = gens.relates(u, v);
                let agree = split.map_or(true, |len| len > n);
                ensure(kernel == agree, || ctx(&format!("5c: n={n}, {u} vs {v}: kernel {kernel}, words {agree}")))?;
                coherence_checks += 1;
            }
            state = refine_step(&state, &m).map_err(|e| e.to_string())?;
        }
    }
    Ok(format!(
        "200 automata; {same_block_pairs} ~w pairs inside ~l; {coherence_checks} kernel/word checks; max j = {max_j}"
    ))
}

struct SolverTally {
    member: usize,
    not_member: usize,
    unsupported: usize,
}

/// Runs 1000 random queries; half the targets are combinations of the basis.
fn solver_queries<K: SpanSolver>(
    seed: u64,
    mut weight: impl FnMut(&mut StdRng) -> K,
    mut confirm_not_member: impl FnMut(&[Functional<K>], &Functional<K>, &[StateId]) -> Result<(), String>,
) -> Result<SolverTally, String> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut tally = SolverTally {
        member: 0,
        not_member: 0,
        unsupported: 0,
    };
    for _ in 0..1000 {
        let n = rng.gen_range(1..=5);
        let states: Vec<StateId> = (0..n).map(|i| StateId::from(format!("s{i}"))).collect();
        let rows = rng.gen_range(0..=4);
        let basis: Vec<Functional<K>> = (0..rows)
            .map(|_| Functional::from_row(random_vector(&mut rng, &states, &mut weight)))
            .collect();
        let target = if rng.gen_bool(0.5) {
            basis.iter().fold(Functional::zero(), |acc, b| acc.add(&b.scale_right(&weight(&mut rng))))
        } else {
            Functional::from_row(random_vector(&mut rng, &states, &mut weight))
        };
        match in_span(&SpanQuery::new(&basis, &target)) {
            SpanAnswer::Member(c) => {
                ensure(verify_combination(&basis, &c, &target), || {
                    format!("{}: member certificate fails substitution", K::DESCRIPTOR)
                })?;
                tally.member += 1;
            }
            SpanAnswer::NotMember => {
                confirm_not_member(&basis, &target, &states)?;
                tally.not_member += 1;
            }
            SpanAnswer::Unsupported(_) => tally.unsupported += 1,
        }
    }
    Ok(tally)
}

fn sparse<K: Semiring>(r: &mut StdRng, k: impl FnOnce(&mut StdRng) -> K) -> K {
    if r.gen_bool(0.4) {
        K::zero()
    } else {
        k(r)
    }
}

/// Only ℤ, ℚ and bool have an independent refutation check.
fn no_check<K>(_: &[Functional<K>], _: &Functional<K>, _: &[StateId]) -> Result<(), String> {
    Ok(())
}

fn criterion_6() -> Outcome {
    let mut report = Vec::new();

    let lift_q = |f: &Functional<Rational>, s: &[StateId]| -> Vec<BigRational> {
        f.to_dense(s).into_iter().map(|k| k.0).collect()
    };
    let t = solver_queries::<Rational>(
        61,
        |r| sparse(r, |r| Rational::new(r.gen_range(-3..=3), r.gen_range(1..=3))),
        |basis, target, s| {
            let b: Vec<_> = basis.iter().map(|f| lift_q(f, s)).collect();
            let mut bt = b.clone();
            bt.push(lift_q(target, s));
            ensure(rank(&bt) > rank(&b), || "ℚ NotMember but rank does not grow".into())
        },
    )?;
    report.push(format!("rational {}/{}/{}", t.member, t.not_member, t.unsupported));

    let lift_z = |f: &Functional<Integer>, s: &[StateId]| -> Vec<BigInt> {
        f.to_dense(s).into_iter().map(|k| k.0).collect()
    };
    let t = solver_queries::<Integer>(
        62,
        |r| sparse(r, |r| Integer::from(r.gen_range(-4..=4))),
        |basis, target, s| {
            let b: Vec<_> = basis.iter().map(|f| lift_z(f, s)).collect();
            ensure(!in_lattice(&b, &lift_z(target, s)), || "ℤ NotMember but target is in the lattice".into())
        },
    )?;
    report.push(format!("int {}/{}/{}", t.member, t.not_member, t.unsupported));

    let t = solver_queries::<NonnegRational>(
        63,
        |r| sparse(r, |r| NonnegRational::new(r.gen_range(1..=3), r.gen_range(1..=2))),
        no_check,
    )?;
    report.push(format!("nonneg_rational {}/{}/{}", t.member, t.not_member, t.unsupported));

    // Over bool every combination uses coefficients in {0,1}: enumerate them all.
    let t = solver_queries::<Boolean>(64, |r| Boolean(r.gen_bool(0.4)), |basis, target, _| {
        let found = (0..1u32 << basis.len()).any(|mask| {
            let c: Vec<Boolean> = (0..basis.len()).map(|i| Boolean(mask >> i & 1 == 1)).collect();
            verify_combination(basis, &c, target)
        });
        ensure(!found, || "bool NotMember but a combination exists".into())
    })?;
    report.push(format!("bool {}/{}/{}", t.member, t.not_member, t.unsupported));

    let t = solver_queries::<Tropical>(
        65,
        |r| if r.gen_bool(0.3) { Tropical::Infinity } else { Tropical::finite(r.gen_range(0..=6)) },
        no_check,
    )?;
    report.push(format!("tropical {}/{}/{}", t.member, t.not_member, t.unsupported));

    let t = solver_queries::<MaxTimes>(
        66,
        |r| sparse(r, |r| MaxTimes::new(r.gen_range(1..=4), 4).unwrap()),
        no_check,
    )?;
    report.push(format!("maxtimes {}/{}/{}", t.member, t.not_member, t.unsupported));
    Ok(format!("member/not/unsupported: {}", report.join(", ")))
}

fn criterion_7() -> Outcome {
    let mut failed = Vec::new();
    for d in Descriptor::ALL {
        let r = axioms_suite(d, 1000, 7);
        if !r.passed() {
            failed.push(format!("{d}: {:?}", r.failures.first()));
        }
    }
    ensure(failed.is_empty(), || failed.join("; "))?;
    Ok(format!("{} semirings × 1000 samples", Descriptor::ALL.len()))
}

fn run_cli(args: &[String]) -> (Vec<u8>, Vec<u8>, Option<i32>) {
    let out = Command::new(env!("CARGO_BIN_EXE_wabisim"))
        .args(args)
        .output()
        .expect("binary runs");
    (out.stdout, out.stderr, out.status.code())
}

fn criterion_8() -> Outcome {
    let dir = std::env::temp_dir().join(format!("wabisim-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut runs = 0;
    for name in FIXTURES {
        let input = fixture_path(name).display().to_string();
        let m = wabisim::AnyAutomaton::parse(&fixture(name)).map_err(|e| e.to_string())?;
        let states: Vec<String> = m.states().iter().map(|s| s.to_string()).collect();
        let (s0, s1) = (states[0].clone(), states[states.len() - 1].clone());
        let qout = dir.join(format!("{name}.quotient.json")).display().to_string();
        let commands: Vec<Vec<String>> = vec![
            vec!["validate".into()],
            vec!["validate".into(), "--canonical".into()],
            vec!["sigma".into(), "--table".into(), "4".into()],
            vec!["sigma".into(), "--state-vec".into(), s0.clone(), "--word".into(), "a".into()],
            vec!["wbisim".into(), "--quotient-out".into(), qout.clone()],
            vec!["quotient".into()],
            vec!["langequiv".into(), "--pair".into(), s0.clone(), s1.clone(), "--oracle-check".into(), "5".into()],
            vec!["oracle".into(), "--pair".into(), s0.clone(), s1.clone()],
            vec!["compare".into()],
        ];
        for cmd in commands {
            for fmt in ["text", "json"] {
                let mut args = cmd.clone();
                args.extend(["--input".into(), input.clone(), "--format".into(), fmt.into()]);
                let first = run_cli(&args);
                let q1 = std::fs::read(&qout).ok();
                let second = run_cli(&args);
                let q2 = std::fs::read(&qout).ok();
                ensure(first == second && q1 == q2, || format!("{name}: `{}` differs between runs", args.join(" ")))?;
                ensure(!matches!(first.2, Some(2) | None), || {
                    format!(
                        "{name}: `{}` failed: {}",
                        args.join(" "),
                        String::from_utf8_lossy(&first.1)
                    )
                })?;
                runs += 1;
            }
        }
        let canonical = run_cli(&["validate".into(), "--canonical".into(), "--input".into(), input.clone()]);
        ensure(canonical.0 == fixture(name).into_bytes(), || format!("{name} is not in canonical form"))?;
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{runs} command/format combinations byte-identical across runs"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 8] = [
        ("Six-state bisimulation quotients", criterion_1, Duration::from_secs(1)),
        ("Language equivalence without bisimilarity", criterion_2, Duration::from_secs(1)),
        ("Integer example refinement", criterion_3, Duration::from_secs(5)),
        ("Max-times example refinement", criterion_4, Duration::from_secs(5)),
        ("Property suites on random automata", criterion_5, Duration::from_secs(60)),
        ("Span solver soundness", criterion_6, Duration::from_secs(30)),
        ("Semiring axioms", criterion_7, Duration::from_secs(5)),
        ("CLI determinism", criterion_8, Duration::from_secs(120)),
    ];
    let mut failures = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = f();
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| {
            if elapsed <= *limit {
                Ok(detail)
            } else {
                Err(format!("{detail}; took {elapsed:.2?}, limit {limit:?}"))
            }
        });
        match result {
            Ok(detail) => println!("PASS criterion {} {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(why) => {
                failures += 1;
                println!("FAIL criterion {} {name}: {why} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
