//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use modelweave::core_model::validate_core;
use modelweave::dsl::{
    parse_aspect, parse_core, parse_requirements, parse_weaving, parse_woven, print_aspect, print_core,
    print_requirements, print_weaving, print_woven,
};
use modelweave::weaver::{apply_plan, footprints_overlap, plan_weave, resolve_conflicts, ConflictCategory, EditOp};
use modelweave::{
    weave, AdviceType, CoreModel, DecompositionGraph, QualifiedName, RequirementKind, WeaveError, WeaveOptions,
    WovenModel,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{fixture, read_fixture, AspectShape};

const BIN: &str = env!("CARGO_BIN_EXE_modelweave");

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            pass,
            detail: detail.into(),
        }
    }
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn modelweave")
}

fn first(failures: &[String]) -> String {
    failures.first().map(|f| format!("; first: {f}")).unwrap_or_default()
}

fn fx(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

fn main() {
    let started = Instant::now();
    let timed = |f: fn() -> Verdict| {
        let t = Instant::now();
        let mut v = f();
        v.detail = format!("{}; {:.2?}", v.detail, t.elapsed());
        v
    };
    let mut verdicts: Vec<(u32, &str, Verdict)> = vec![
        (1, "worked example", worked_example()),
        (2, "conformance preservation", timed(conformance)),
        (3, "identity and determinism", timed(identity_and_determinism)),
        (4, "disjoint commutativity", timed(commutativity)),
        (5, "round trip", timed(round_trip)),
        (6, "conflict semantics", timed(conflict_semantics)),
        (8, "cascade soundness", timed(cascade_soundness)),
    ];
    let mut seven = timed(inference_oracle);
    let total = started.elapsed();
    if total >= Duration::from_secs(60) {
        seven.pass = false;
    }
    seven.detail = format!("{}; whole suite {:.2?} (limit 60s)", seven.detail, total);
    verdicts.push((7, "inference oracle", seven));
    verdicts.sort_by_key(|v| v.0);

    let mut failed = 0;
    for (n, name, v) in &verdicts {
        println!(
            "criterion {n} {name}: {} ({})",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        failed += usize::from(!v.pass);
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}

fn worked_example() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let t = Instant::now();
    let out = run_in(
        dir.path(),
        &[
            "weave",
            &fx("m1.core"),
            "--aspects",
            &fx("m2.aspect"),
            "--with-weaving",
            &fx("m1_m2.weave"),
            "-o",
            "woven.core",
        ],
    );
    let elapsed = t.elapsed();
    if !out.status.success() {
        return Verdict::new(
            false,
            format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)),
        );
    }
    let produced = std::fs::read(dir.path().join("woven.core")).unwrap();
    let golden = std::fs::read(fixture("m1_m2_woven.core")).unwrap();
    let text = String::from_utf8_lossy(&produced);
    let woven = match parse_woven(&text, "woven.core").into_result() {
        Ok(w) => w,
        Err(e) => return Verdict::new(false, format!("output does not parse: {e}")),
    };
    let student = woven.base.class("Student");
    let new_ops = ["VerifySpecialityNbreOfHours", "getSecondSpeciality"];
    let ops_present = student.is_some_and(|s| new_ops.iter().all(|m| s.method(m).is_some()));
    let target = QualifiedName::feature("Student", "NewSubscription");
    let ordered = new_ops.iter().all(|m| {
        woven.ordering_constraints.iter().any(|c| {
            c.advice_method == QualifiedName::feature("Student", m)
                && c.target_method == target
                && c.position == AdviceType::Before
        })
    });
    let bytes_equal = produced == golden;
    let fast = elapsed < Duration::from_secs(1);
    Verdict::new(
        bytes_equal && ops_present && ordered && fast,
        format!("golden bytes equal={bytes_equal}, two ops on Student={ops_present}, before-constraints={ordered}, runtime {elapsed:.2?}"),
    )
}

fn conformance() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut ok, mut conflicted, mut refused, mut attempts) = (0, 0, 0, 0);
    let mut failures = Vec::new();
    while ok < 1000 && attempts < 50_000 {
        attempts += 1;
        let core = common::core_model(&mut rng);
        let aspects = common::aspect_model(&mut rng, &core, AspectShape::default());
        let links = rng.gen_range(1..4);
        let w = common::aspect_weaving(&mut rng, &core, &aspects, links);
        if !plan_weave(&core, &aspects, &w).conflicts.is_empty() {
            conflicted += 1;
            continue;
        }
        match weave(&core, &[], &[(&aspects, &w)], WeaveOptions::default()) {
            Ok(out) => {
                let report = validate_core(&out.woven.base);
                if report.is_empty() {
                    ok += 1;
                } else {
                    failures.push(report.to_string());
                }
            }
            Err(WeaveError::NonConformant(r)) => failures.push(r.to_string()),
            Err(WeaveError::Collision(_)) => refused += 1,
            Err(e) => failures.push(e.to_string()),
        }
    }
    Verdict::new(
        ok >= 1000 && failures.is_empty(),
        format!(
            "{ok} conflict-free weaves conformant, {} non-conformant, {conflicted} skipped for conflicts, {refused} refused for name collisions{}",
            failures.len(),
            first(&failures)
        ),
    )
}

fn identity_and_determinism() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut identity_failures = 0;
    for _ in 0..500 {
        let core = common::core_model(&mut rng);
        let aspects = common::aspect_model(&mut rng, &core, AspectShape::default());
        let w = common::aspect_weaving(&mut rng, &core, &aspects, 0);
        match weave(&core, &[], &[(&aspects, &w)], WeaveOptions::default()) {
            Ok(out) if out.woven == WovenModel::from_core(core.clone()) => {}
            _ => identity_failures += 1,
        }
    }

    let gen = tempfile::tempdir().unwrap();
    let mut commands: Vec<Vec<String>> = [
        vec![
            "validate",
            "m1.core",
            "m2.aspect",
            "m1_m2.weave",
            "university.reqs",
            "redundant.reqs",
        ],
        vec![
            "weave",
            "m1.core",
            "--aspects",
            "m2.aspect",
            "--with-weaving",
            "m1_m2.weave",
            "-o",
            "OUT",
        ],
        vec![
            "weave",
            "m1.core",
            "--aspects",
            "m2.aspect",
            "--with-weaving",
            "m1_m2.weave",
            "--plan",
        ],
        vec![
            "weave",
            "m1.core",
            "--aspects",
            "conflict_update.aspect",
            "--with-weaving",
            "conflict_update.weave",
            "-o",
            "OUT",
        ],
        vec![
            "weave",
            "m1.core",
            "--aspects",
            "conflict_delete.aspect",
            "--with-weaving",
            "conflict_delete.weave",
            "--plan",
        ],
        vec!["export", "m1.core", "--format", "structured", "-o", "OUT"],
        vec!["export", "m1_m2_woven.core", "--format", "diagram", "-o", "OUT"],
        vec!["export", "m2.aspect", "--format", "structured", "-o", "OUT"],
        vec!["reqs", "redundant.reqs", "--check-redundancy"],
        vec!["reqs", "university.reqs", "--eval", "ER1,AR1", "--cr", "CR1"],
    ]
    .iter()
    .map(|c| {
        c.iter()
            .map(|a| if a.contains('.') { fx(a) } else { a.to_string() })
            .collect()
    })
    .collect();
    for i in 0..20 {
        let core = common::core_model(&mut rng);
        let aspects = common::aspect_model(&mut rng, &core, AspectShape::default());
        let w = common::aspect_weaving(&mut rng, &core, &aspects, 3);
        let (c, a, wv) = (format!("g{i}.core"), format!("g{i}.aspect"), format!("g{i}.weave"));
        std::fs::write(gen.path().join(&c), print_core(&core)).unwrap();
        std::fs::write(gen.path().join(&a), print_aspect(&aspects)).unwrap();
        std::fs::write(gen.path().join(&wv), print_weaving(&w)).unwrap();
        let p = |n: &str| gen.path().join(n).to_string_lossy().into_owned();
        commands.push(vec![
            "weave".into(),
            p(&c),
            "--aspects".into(),
            p(&a),
            "--with-weaving".into(),
            p(&wv),
            "--force-first".into(),
            "-o".into(),
            "OUT".into(),
        ]);
        commands.push(vec![
            "export".into(),
            p(&c),
            "--format".into(),
            "diagram".into(),
            "-o".into(),
            "OUT".into(),
        ]);
    }

    let mut mismatches = Vec::new();
    for cmd in &commands {
        let args: Vec<&str> = cmd.iter().map(String::as_str).collect();
        let runs: Vec<(Output, Option<Vec<u8>>)> = (0..2)
            .map(|_| {
                let dir = tempfile::tempdir().unwrap();
                let out = run_in(dir.path(), &args);
                (out, std::fs::read(dir.path().join("OUT")).ok())
            })
            .collect();
        let (a, b) = (&runs[0], &runs[1]);
        if a.0.stdout != b.0.stdout || a.0.stderr != b.0.stderr || a.0.status.code() != b.0.status.code() || a.1 != b.1
        {
            mismatches.push(args[0].to_string());
        }
    }
    Verdict::new(
        identity_failures == 0 && mismatches.is_empty(),
        format!(
            "500 zero-link weaves, {identity_failures} not identical; {} commands run twice, {} differing",
            commands.len(),
            mismatches.len()
        ),
    )
}

fn commutativity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let shape = AspectShape {
        aspects: 1..3,
        wild_classes: false,
        delete_bias: 0.2,
        allow_model_adds: false,
    };
    let (mut pairs, mut attempts, mut overlapping) = (0, 0, 0);
    let mut failures = Vec::new();
    while pairs < 200 && attempts < 100_000 {
        attempts += 1;
        let core = common::core_model(&mut rng);
        if core.classes.len() < 2 {
            continue;
        }
        let mut names: Vec<String> = core.classes.iter().map(|c| c.name.clone()).collect();
        names.shuffle(&mut rng);
        let cut = rng.gen_range(1..names.len());
        let side = |set: &[String]| {
            let keep: BTreeSet<&String> = set.iter().collect();
            let mut sub = core.clone();
            sub.classes.retain(|c| keep.contains(&c.name));
            sub.associations
                .retain(|a| a.ends().iter().all(|e| keep.contains(&e.class_name)));
            sub
        };
        let (left, right) = (side(&names[..cut]), side(&names[cut..]));
        let a = common::aspect_model(&mut rng, &left, shape.clone());
        let b = common::aspect_model(&mut rng, &right, shape.clone());
        let la = rng.gen_range(1..4);
        let wa = common::aspect_weaving(&mut rng, &left, &a, la);
        let lb = rng.gen_range(1..4);
        let wb = common::aspect_weaving(&mut rng, &right, &b, lb);
        let opts = WeaveOptions { force_first: true };
        let (Ok(_), Ok(_)) = (
            weave(&core, &[], &[(&a, &wa)], opts),
            weave(&core, &[], &[(&b, &wb)], opts),
        ) else {
            continue;
        };
        let fa = plan_weave(&core, &a, &wa).plan.footprint(&core);
        let fb = plan_weave(&core, &b, &wb).plan.footprint(&core);
        if fa.is_empty() || fb.is_empty() {
            continue;
        }
        if footprints_overlap(&fa, &fb) {
            overlapping += 1;
            continue;
        }
        pairs += 1;
        let ab = weave(&core, &[], &[(&a, &wa), (&b, &wb)], opts).map(|o| o.woven);
        let ba = weave(&core, &[], &[(&b, &wb), (&a, &wa)], opts).map(|o| o.woven);
        match (ab, ba) {
            (Ok(x), Ok(y)) if x == y => {}
            (x, y) => failures.push(format!("{:?} vs {:?}", x.err(), y.err())),
        }
    }
    Verdict::new(
        pairs >= 200 && failures.is_empty(),
        format!(
            "{pairs} disjoint pairs, {} order-dependent; {overlapping} overlapping pairs skipped",
            failures.len()
        ),
    )
}

fn round_trip() -> Verdict {
    let mut problems = Vec::new();
    let mut check = |what: String, ok: bool| {
        if !ok {
            problems.push(what);
        }
    };
    let core = parse_core(&read_fixture("m1.core"), "m1.core").into_result().unwrap();
    check("m1.core".into(), print_core(&core) == read_fixture("m1.core"));
    for f in [
        "m2.aspect",
        "conflict_add.aspect",
        "conflict_delete.aspect",
        "conflict_update.aspect",
    ] {
        let text = read_fixture(f);
        let m = parse_aspect(&text, f).into_result().unwrap();
        check(
            f.into(),
            print_aspect(&m) == text && parse_aspect(&print_aspect(&m), f).into_result().unwrap() == m,
        );
    }
    for f in [
        "m1_m2.weave",
        "conflict_add.weave",
        "conflict_delete.weave",
        "conflict_update.weave",
    ] {
        let text = read_fixture(f);
        let m = parse_weaving(&text, f).into_result().unwrap();
        check(
            f.into(),
            print_weaving(&m) == text && parse_weaving(&print_weaving(&m), f).into_result().unwrap() == m,
        );
    }
    for f in ["university.reqs", "redundant.reqs"] {
        let text = read_fixture(f);
        let m = parse_requirements(&text, f).into_result().unwrap();
        check(
            f.into(),
            print_requirements(&m) == text
                && parse_requirements(&print_requirements(&m), f).into_result().unwrap() == m,
        );
    }
    let woven_text = read_fixture("m1_m2_woven.core");
    let woven = parse_woven(&woven_text, "w").into_result().unwrap();
    check("m1_m2_woven.core".into(), print_woven(&woven) == woven_text);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut counts = [0usize; 4];
    for _ in 0..1000 {
        let c = common::core_model(&mut rng);
        let t = print_core(&c);
        counts[0] += 1;
        check(
            format!("core {}", c.name),
            parse_core(&t, "g").into_result().ok().as_ref() == Some(&c),
        );
        let a = common::aspect_model(&mut rng, &c, AspectShape::default());
        let t = print_aspect(&a);
        counts[1] += 1;
        check(
            format!("aspect {}", a.name),
            parse_aspect(&t, "g").into_result().ok().as_ref() == Some(&a),
        );
        let w = common::any_weaving(&mut rng);
        let t = print_weaving(&w);
        counts[2] += 1;
        check(
            format!("weaving {}", w.name),
            parse_weaving(&t, "g").into_result().ok().as_ref() == Some(&w),
        );
        let g = common::graph(&mut rng, 12);
        let t = print_requirements(&g);
        counts[3] += 1;
        check(
            format!("requirements {}", g.name),
            parse_requirements(&t, "g").into_result().ok().as_ref() == Some(&g),
        );
    }
    Verdict::new(
        problems.is_empty(),
        format!(
            "14 fixtures, generated core/aspect/weaving/requirements = {}/{}/{}/{}, {} mismatches{}",
            counts[0],
            counts[1],
            counts[2],
            counts[3],
            problems.len(),
            problems.first().map(|p| format!(", first: {p}")).unwrap_or_default()
        ),
    )
}

fn conflict_semantics() -> Verdict {
    let core = parse_core(&read_fixture("m1.core"), "m1.core").into_result().unwrap();
    let mut notes = Vec::new();
    let mut pass = true;
    for (stem, expected) in [
        ("conflict_delete", ConflictCategory::DeleteVsOther),
        ("conflict_update", ConflictCategory::DoubleUpdate),
        ("conflict_add", ConflictCategory::DuplicateAdd),
    ] {
        let a = parse_aspect(&read_fixture(&format!("{stem}.aspect")), "a")
            .into_result()
            .unwrap();
        let w = parse_weaving(&read_fixture(&format!("{stem}.weave")), "w")
            .into_result()
            .unwrap();
        let cats: Vec<ConflictCategory> = plan_weave(&core, &a, &w).conflicts.iter().map(|c| c.category).collect();
        let ok = cats == [expected];
        pass &= ok;
        notes.push(format!("{stem}: {cats:?}"));
    }

    let weave_cli = |stem: &str, extra: &[&str]| {
        let dir = tempfile::tempdir().unwrap();
        let (a, w) = (fx(&format!("{stem}.aspect")), fx(&format!("{stem}.weave")));
        let mut args = vec![
            "weave",
            "m1.core",
            "--aspects",
            &a,
            "--with-weaving",
            &w,
            "-o",
            "out.core",
        ];
        let m1 = fx("m1.core");
        args[1] = &m1;
        args.extend_from_slice(extra);
        let out = run_in(dir.path(), &args);
        let woven = std::fs::read_to_string(dir.path().join("out.core"))
            .ok()
            .and_then(|t| parse_woven(&t, "out").into_result().ok());
        (out.status.code(), woven)
    };

    let (code, woven) = weave_cli("conflict_delete", &[]);
    let ok = code == Some(0)
        && woven.as_ref().is_some_and(|w| {
            w.base
                .class("Student")
                .is_some_and(|s| s.method("LogSubscription").is_some())
        });
    pass &= ok;
    notes.push(format!("delete 0.5 vs add 0.8 keeps the add: {ok}"));

    let (code, woven) = weave_cli("conflict_add", &[]);
    let ok = code == Some(0)
        && woven.as_ref().is_some_and(|w| {
            w.base
                .class("Student")
                .and_then(|s| s.attribute("Age"))
                .is_some_and(|a| a.type_name == "Integer")
        });
    pass &= ok;
    notes.push(format!("add 0.8 vs add 0.5 keeps the 0.8 type: {ok}"));

    let (code, woven) = weave_cli("conflict_update", &[]);
    let ok = code == Some(1) && woven.is_none();
    pass &= ok;
    notes.push(format!("equal priorities exit {code:?}"));

    let (code, woven) = weave_cli("conflict_update", &["--force-first"]);
    let ok = code == Some(0)
        && woven.as_ref().is_some_and(|w| {
            w.base
                .class("Student")
                .is_some_and(|s| s.attribute("FullName").is_some())
        });
    pass &= ok;
    notes.push(format!("--force-first exit {code:?} keeps the first aspect: {ok}"));
    Verdict::new(pass, notes.join("; "))
}

/// Independent evaluator: direct recursive substitution over node ids with
/// leaves read from a bitmask.
fn brute_eval(g: &DecompositionGraph, id: &str, bits: &BTreeMap<&str, usize>, mask: u32) -> bool {
    let node = g.nodes.iter().find(|n| n.id == id).unwrap();
    if node.kind != RequirementKind::Cooperative {
        return mask >> bits[id] & 1 == 1;
    }
    let d = node.decomposition.as_ref().unwrap();
    let mut values = d.children.iter().map(|c| brute_eval(g, c, bits, mask));
    match d.op {
        modelweave::Connective::And => values.all(|v| v),
        modelweave::Connective::Or => values.any(|v| v),
    }
}

fn inference_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut evaluations, mut entailments, mut mismatches) = (0u64, 0u64, Vec::new());
    let graphs = 500;
    for gi in 0..graphs {
        let g = common::graph(&mut rng, 12);
        let leaves: Vec<String> = g.leaves().map(|n| n.id.clone()).collect();
        assert!(leaves.len() <= 12);
        let bits: BTreeMap<&str, usize> = leaves.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let crs: Vec<String> = g.crs().map(|n| n.id.clone()).collect();
        let n = leaves.len();
        let mut table: BTreeMap<&str, Vec<bool>> = BTreeMap::new();
        for mask in 0u32..(1 << n) {
            let satisfied: BTreeSet<String> = leaves
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, l)| l.clone())
                .collect();
            for cr in &crs {
                let expected = brute_eval(&g, cr, &bits, mask);
                let got = g.evaluate(cr, &satisfied).unwrap();
                evaluations += 1;
                if got != expected {
                    mismatches.push(format!("graph {gi} {cr} mask {mask:b}"));
                }
                table.entry(cr.as_str()).or_default().push(expected);
            }
        }
        for target in &crs {
            let others: Vec<&String> = crs.iter().filter(|c| *c != target).collect();
            for _ in 0..4 {
                let k = rng.gen_range(0..=others.len().min(3));
                let given: BTreeSet<String> = others.choose_multiple(&mut rng, k).map(|s| s.to_string()).collect();
                let expected = (0..(1usize << n))
                    .all(|m| !given.iter().all(|c| table[c.as_str()][m]) || table[target.as_str()][m]);
                let got = g.is_inferable(target, &given, 12).unwrap();
                entailments += 1;
                if got != expected {
                    mismatches.push(format!("graph {gi} {target} from {given:?}"));
                }
            }
        }
    }
    Verdict::new(
        mismatches.is_empty(),
        format!(
            "{graphs} graphs, {evaluations} evaluations and {entailments} entailment checks, {} mismatches",
            mismatches.len()
        ),
    )
}

/// Every association end and association-class link must name a live element.
fn dangling(m: &CoreModel) -> Vec<String> {
    let classes: BTreeSet<&str> = m.classes.iter().map(|c| c.name.as_str()).collect();
    let assocs: BTreeSet<&str> = m.associations.iter().map(|a| a.name.as_str()).collect();
    let mut out = Vec::new();
    for a in &m.associations {
        for e in a.ends() {
            if !classes.contains(e.class_name.as_str()) {
                out.push(format!("assoc.{}.{} -> {}", a.name, e.role, e.class_name));
            }
        }
    }
    for c in &m.classes {
        if let Some(a) = &c.association_class_of {
            if !assocs.contains(a.as_str()) {
                out.push(format!("{} of assoc.{a}", c.name));
            }
        }
    }
    out
}

fn cascade_soundness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let shape = AspectShape {
        aspects: 1..4,
        wild_classes: true,
        delete_bias: 0.6,
        allow_model_adds: true,
    };
    let (mut cases, mut attempts, mut collisions, mut class_deletes) = (0, 0, 0, 0);
    let mut failures = Vec::new();
    while cases < 500 && attempts < 100_000 {
        attempts += 1;
        let core = common::core_model(&mut rng);
        let aspects = common::aspect_model(&mut rng, &core, shape.clone());
        let links = rng.gen_range(1..4);
        let w = common::aspect_weaving(&mut rng, &core, &aspects, links);
        let outcome = plan_weave(&core, &aspects, &w);
        let Ok(res) = resolve_conflicts(&outcome.conflicts, &aspects, true) else {
            continue;
        };
        let plan = outcome.plan.without(&res.dropped);
        if !plan.edits.iter().any(|e| matches!(e.op, EditOp::Delete)) {
            continue;
        }
        match apply_plan(&core, &plan) {
            Ok(woven) => {
                cases += 1;
                if plan.edits.iter().any(|e| {
                    matches!(e.op, EditOp::Delete)
                        && core.class(&e.target.segments()[0]).is_some()
                        && e.target.len() == 1
                }) {
                    class_deletes += 1;
                }
                let d = dangling(&woven.base);
                if !d.is_empty() {
                    failures.push(d.join(", "));
                }
            }
            Err(WeaveError::Collision(_)) => collisions += 1,
            Err(e) => {
                cases += 1;
                failures.push(e.to_string());
            }
        }
    }
    Verdict::new(
        cases >= 500 && failures.is_empty(),
        format!(
            "{cases} delete-bearing plans ({class_deletes} deleting classes), {} with dangling ends or errors, {collisions} refused for name collisions{}",
            failures.len(),
            first(&failures)
        ),
    )
}
