//! Acceptance checks, one line per criterion.

mod common;

use std::collections::BTreeSet;
use std::fs;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use common::{
    events, fixtures, lines, loc, mini_corpus, oracle_search, random_corpus, random_query, Counting, Jittery,
};
use smartsearch::generator::{generate, DEFAULT_MAX_CANDIDATES};
use smartsearch::query::{parse, print, Query};
use smartsearch::rules::{applicable, apply, RuleId};
use smartsearch::telemetry::{assign_variant, replay, TelemetryRecord, Variant};
use smartsearch::{Corpus, Document, EvalConfig, EvalMode, Event, Provenance};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let took = start.elapsed();
    if took > limit {
        Err(format!("{what} took {took:?}, limit {limit:?}"))
    } else {
        Ok(())
    }
}

fn rule_fidelity() -> Outcome {
    let start = Instant::now();
    let cases = [
        (RuleId::And, "func parse", "func AND parse"),
        (RuleId::Unquote, "\"v1.3\"", "v1.3"),
        (RuleId::Regex, "func.*parse", "/func.*parse/"),
        (RuleId::Language, "python", "lang:python"),
    ];
    for (rule, input, expected) in cases {
        let q = parse(input).map_err(|e| e.to_string())?;
        ensure!(applicable(rule, &q), "{rule} should apply to {input:?}");
        let got = print(&apply(rule, &q).map_err(|e| e.to_string())?);
        ensure!(got == expected, "{rule} on {input:?}: got {got:?}, want {expected:?}");
    }
    within(start, Duration::from_secs(1), "rule checks")?;
    Ok("4 rewrites exact".into())
}

fn generator_bound_and_order() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(1001);
    let mut checked = 0;
    let mut yielded = 0;
    while checked < 10_000 {
        let text = random_query(&mut rng);
        let Ok(original) = parse(&text) else { continue };
        checked += 1;
        let candidates: Vec<_> = generate(&original, DEFAULT_MAX_CANDIDATES).collect();
        ensure!(candidates.len() <= DEFAULT_MAX_CANDIDATES, "{text:?}: {} candidates", candidates.len());
        yielded += candidates.len();
        let mut seen: Vec<&Query> = vec![&original];
        let mut previous: Option<Vec<usize>> = None;
        for c in &candidates {
            ensure!(!seen.contains(&&c.query), "{text:?}: duplicate candidate {}", c.rendered);
            seen.push(&c.query);
            let key: Vec<usize> = c.applied_rules.iter().map(|r| r.rank()).collect();
            if let Some(prev) = &previous {
                let ordered = prev.len() < key.len() || (prev.len() == key.len() && prev < &key);
                ensure!(ordered, "{text:?}: {prev:?} before {key:?}");
            }
            previous = Some(key);
            let mut q = original.clone();
            for &rule in &c.applied_rules {
                ensure!(applicable(rule, &q), "{text:?}: {rule} not applicable at its step");
                q = apply(rule, &q).map_err(|e| e.to_string())?;
            }
            ensure!(q == c.query, "{text:?}: replaying {:?} gives a different tree", c.applied_rules);
        }
    }
    within(start, Duration::from_secs(30), "generator fuzz")?;
    Ok(format!("{checked} queries, {yielded} candidates, 0 violations"))
}

fn trigger_exactness() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1002);
    let mut runs = 0;
    let mut triggered = 0;
    for _ in 0..20 {
        let corpus = random_corpus(&mut rng, 50, 10);
        for _ in 0..100 {
            let text = random_query(&mut rng);
            let Ok(q) = parse(&text) else { continue };
            let limit = *[1, 3, 10, 40, 500].choose(&mut rng).unwrap();
            let cfg = EvalConfig {
                display_limit: limit,
                ..EvalConfig::default()
            };
            let mut total = 0;
            corpus.search(&q, usize::MAX, &mut |_| total += 1).unwrap();
            let expected = total.min(limit) < limit && generate(&q, cfg.max_candidates).next().is_some();
            let evs = events(&corpus, &text, &cfg);
            let Some(Event::Done { outcome }) = evs.last() else {
                return Err(format!("{text:?}: no done event"));
            };
            ensure!(outcome.triggered == expected, "{text:?} limit {limit}: triggered={}", outcome.triggered);
            runs += 1;
            triggered += usize::from(expected);
        }
    }
    let make = |n: usize| {
        let body: Vec<String> = (0..n).map(|i| format!("func parse {i}")).collect();
        Corpus::from_documents(vec![Document::new("r", "a.go", &body.join("\n"))])
    };
    let cfg = EvalConfig {
        display_limit: 10,
        ..EvalConfig::default()
    };
    for (n, expect) in [(10, false), (9, true)] {
        let evs = events(&make(n), "func parse", &cfg);
        let Some(Event::Done { outcome }) = evs.last() else { unreachable!() };
        ensure!(outcome.triggered == expect, "{n} original matches at limit 10");
    }
    Ok(format!("{runs} fuzzed runs ({triggered} triggered), boundary 10/9 exact"))
}

fn budget_and_ordering() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1003);
    let mut runs = 0;
    let mut cut_short = 0;
    for _ in 0..20 {
        let corpus = random_corpus(&mut rng, 50, 10);
        for _ in 0..100 {
            let text = random_query(&mut rng);
            let Ok(q) = parse(&text) else { continue };
            let cfg = EvalConfig {
                display_limit: *[0, 1, 3, 10, 40, 500].choose(&mut rng).unwrap(),
                max_candidates: rng.gen_range(1..=6),
                ..EvalConfig::default()
            };
            let counting = Counting::new(&corpus);
            let evs = events(&counting, &text, &cfg);
            let Some(Event::Done { outcome }) = evs.last() else { unreachable!() };
            let ranks: Vec<usize> = evs
                .iter()
                .filter_map(|e| match e {
                    Event::Match(m) => Some(match &m.source {
                        Provenance::Original => 0,
                        Provenance::Candidate { rank, .. } => *rank,
                    }),
                    _ => None,
                })
                .collect();
            ensure!(ranks.len() <= cfg.display_limit, "{text:?}: {} > limit", ranks.len());
            ensure!(ranks.windows(2).all(|w| w[0] <= w[1]), "{text:?}: events out of order");
            ensure!(counting.calls() == 1 + outcome.candidates.len(), "{text:?}: unexpected search count");
            let generated = generate(&q, cfg.max_candidates).count();
            if outcome.triggered && outcome.candidates.len() < generated {
                ensure!(
                    outcome.total_streamed == cfg.display_limit,
                    "{text:?}: stopped with budget left"
                );
                cut_short += 1;
            }
            runs += 1;
        }
    }
    let corpus = mini_corpus();
    let counting = Counting::new(&corpus);
    let cfg = EvalConfig {
        display_limit: 1,
        ..EvalConfig::default()
    };
    events(&counting, "jest test typescript", &cfg);
    ensure!(counting.calls() == 2, "budget-exhausting first candidate still allowed {} searches", counting.calls());
    Ok(format!("{runs} runs, {cut_short} short-circuited, 0 violations"))
}

fn alert_fixture() -> Outcome {
    let corpus = mini_corpus();
    for (limit, golden) in [(500, "alert/default.jsonl"), (5, "alert/limit5.jsonl")] {
        let cfg = EvalConfig {
            display_limit: limit,
            ..EvalConfig::default()
        };
        let evs = events(&corpus, "jest test typescript", &cfg);
        let expected = fs::read_to_string(fixtures().join(golden)).map_err(|e| e.to_string())?;
        ensure!(lines(&evs) == expected, "event log differs from {golden}");
        let Some(Event::Alert { proposals, .. }) = evs.iter().find(|e| matches!(e, Event::Alert { .. })) else {
            return Err("no alert".into());
        };
        let Some(Event::Done { outcome }) = evs.last() else { unreachable!() };
        ensure!(outcome.original_count == 0, "original results present");
        ensure!(
            proposals[0].query == "lang:typescript jest test" && proposals[0].count == 1,
            "first proposal {:?}",
            proposals[0]
        );
        if limit == 5 {
            ensure!(proposals[1].limit_hit && proposals[1].count_label() == "4+ results", "second proposal {:?}", proposals[1]);
        }
    }
    Ok("golden event logs match at limits 500 and 5".into())
}

fn search_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(1006);
    let mut queries = 0;
    for files in [1000, 500, 200, 100, 50] {
        let corpus = random_corpus(&mut rng, files, 10);
        let mut done = 0;
        while done < 200 {
            let text = random_query(&mut rng);
            let Ok(q) = parse(&text) else { continue };
            done += 1;
            let mut got = Vec::new();
            corpus.search(&q, usize::MAX, &mut |m| got.push(loc(&m))).map_err(|e| e.to_string())?;
            ensure!(got == oracle_search(&corpus, &q), "{text:?} on {files} files differs from full scan");
            let candidates: BTreeSet<u32> = corpus.prefilter_candidates(&q).into_iter().collect();
            for (repo, path, ..) in &got {
                let id = corpus.documents().iter().position(|d| &d.repo == repo && &d.path == path).unwrap() as u32;
                ensure!(candidates.contains(&id), "{text:?}: prefilter dropped {repo}/{path}");
            }
        }
        queries += done;
    }
    within(start, Duration::from_secs(120), "oracle comparison")?;
    Ok(format!("{queries} queries over 5 corpora, 0 differences"))
}

fn parallel_equivalence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1007);
    let mut compared = 0;
    let mut triggered = 0;
    for round in 0..10 {
        let corpus = random_corpus(&mut rng, 40, 8);
        let jittery = Jittery {
            inner: &corpus,
            seed: round,
        };
        while compared < (round as usize + 1) * 20 {
            let text = random_query(&mut rng);
            let cfg = EvalConfig {
                display_limit: *[1, 5, 20, 500].choose(&mut rng).unwrap(),
                max_candidates: rng.gen_range(1..=6),
                ..EvalConfig::default()
            };
            let seq = events(&corpus, &text, &cfg);
            let par = events(
                &jittery,
                &text,
                &EvalConfig {
                    mode: EvalMode::Parallel,
                    ..cfg
                },
            );
            ensure!(lines(&seq) == lines(&par), "{text:?}: parallel stream differs");
            if let Some(Event::Done { outcome }) = seq.last() {
                triggered += usize::from(outcome.triggered);
            }
            compared += 1;
        }
    }
    Ok(format!("{compared} evaluations ({triggered} triggered), 0 diffs"))
}

fn replay_determinism() -> Outcome {
    let corpus = mini_corpus();
    let read = |p: &str| fs::read_to_string(fixtures().join(p)).map_err(|e| e.to_string());
    let queries = read("replay/queries.jsonl")?;
    let clicks = read("replay/clicks.jsonl")?;
    let run = |cfg: &EvalConfig| replay(&corpus, &queries, cfg, Some(&clicks)).map_err(|e| e.to_string());
    let a = run(&EvalConfig::default())?;
    let b = run(&EvalConfig::default())?;
    ensure!(a.report.to_pretty_json() == b.report.to_pretty_json(), "reports differ between runs");
    ensure!(a.report.to_pretty_json() == read("replay/report.golden.json")?, "report differs from golden");
    let expected: serde_json::Value = serde_json::from_str(&read("replay/replay_expected.json")?).map_err(|e| e.to_string())?;
    let got = serde_json::to_value(&a.report).map_err(|e| e.to_string())?;
    for key in ["trigger_rate_by_search", "category_split", "rule_click_breakdown"] {
        ensure!(got[key] == expected[key], "{key}: {} vs hand-computed {}", got[key], expected[key]);
    }
    for r in &a.records {
        if let TelemetryRecord::Search(s) = r {
            ensure!(s.variant == Variant::Atqe || !s.triggered, "control session {} triggered", s.session_id);
        }
    }
    let off = run(&EvalConfig {
        atqe_enabled: false,
        ..EvalConfig::default()
    })?;
    ensure!(off.report.trigger_rate_by_search == 0.0, "control run trigger rate {}", off.report.trigger_rate_by_search);
    Ok(format!(
        "trigger rate {} reproduced, golden values match, control run 0",
        a.report.trigger_rate_by_search
    ))
}

fn variant_assignment() -> Outcome {
    for line in fs::read_to_string(fixtures().join("variants.golden")).map_err(|e| e.to_string())?.lines() {
        let (id, want) = line.split_once(' ').unwrap();
        let got = if assign_variant(id) == Variant::Atqe { "atqe" } else { "control" };
        ensure!(got == want, "{id}: {got} vs golden {want}");
    }
    let mut rng = StdRng::seed_from_u64(1009);
    let mut atqe = 0;
    for _ in 0..100_000 {
        let id: String = (0..rng.gen_range(6..20))
            .map(|_| rng.sample(rand::distributions::Alphanumeric) as char)
            .collect();
        let v = assign_variant(&id);
        ensure!(v == assign_variant(&id), "{id} not deterministic");
        atqe += usize::from(v == Variant::Atqe);
    }
    let share = atqe as f64 / 100_000.0;
    ensure!((0.49..=0.51).contains(&share), "treatment share {share}");
    Ok(format!("golden ids match, treatment share {share:.4}"))
}

fn performance() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1010);
    let words = ["jest", "test", "typescript", "parse", "error", "func", "return", "value", "python", "main"];
    let docs: Vec<Document> = (0..2000)
        .map(|i| {
            let body: Vec<String> = (0..50)
                .map(|_| {
                    (0..rng.gen_range(2..9))
                        .map(|_| *words.choose(&mut rng).unwrap())
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect();
            let ext = ["ts", "py", "go", "md"][i % 4];
            Document::new(format!("repo{}", i % 20), format!("src/file{i}.{ext}"), &body.join("\n"))
        })
        .collect();
    let corpus = Corpus::from_documents(docs);
    ensure!(corpus.line_count() == 100_000, "corpus has {} lines", corpus.line_count());
    let counting = Counting::new(&corpus);
    let cfg = EvalConfig::default();
    let start = Instant::now();
    let evs = events(&counting, "typescript jest parse error", &cfg);
    let took = start.elapsed();
    let Some(Event::Done { outcome }) = evs.last() else { unreachable!() };
    ensure!(outcome.triggered, "query did not trigger");
    let extra = counting.calls() - 1;
    ensure!(extra <= cfg.max_candidates, "{extra} extra searches");
    ensure!(took < Duration::from_secs(1), "took {took:?}");
    Ok(format!(
        "{took:?} for {} events, {extra} extra searches",
        evs.len()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("rule fidelity", rule_fidelity),
        ("generator bound and order", generator_bound_and_order),
        ("trigger condition", trigger_exactness),
        ("budget and ordering", budget_and_ordering),
        ("smart search fixture", alert_fixture),
        ("search oracle equivalence", search_oracle),
        ("sequential/parallel equivalence", parallel_equivalence),
        ("replay determinism and metrics", replay_determinism),
        ("variant assignment", variant_assignment),
        ("performance", performance),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{ms} ms]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{ms} ms]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
