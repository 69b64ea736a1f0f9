//! Fixture suites that re-run the main properties end to end. Each
//! fixture pushes machine-readable checks; `--samples` overrides its size.

use fairdiv::audits::{is_ef1, is_efficient, is_fpo, is_fulfilling, EfficiencyCriterion};
use fairdiv::cake::{
    cake_bic_audit, expected_share_check, incremental_accommodation, is_proportional,
};
use fairdiv::interim::{
    bic_from_table, characterization_search, check_monotone, CharacterizationConfig,
    CharacterizationOutcome, ReportTable,
};
use fairdiv::mechanisms::{rr_pass, MechanismId, OwnerVectors};
use fairdiv::priors::{bic_audit_mc, neutrality_test, McConfig, PriorSpec};
use fairdiv::random::{any_density, random_density, random_piece, random_profile, unit_rational};
use fairdiv::rational::{int, ratio};
use fairdiv::welfare::WelfareFn;
use fairdiv::{Allocation, Profile, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::{allocation_json, rats, Check, CliError, Options, Report};

/// Fixture ids with a one-line description.
pub const FIXTURES: &[(&str, &str)] = &[
    (
        "appendixC-separations",
        "SD+ without Pareto, SD without SD+: exact verdict triples",
    ),
    (
        "lemma-positional",
        "rr-pass interim allocations depend on rank only and are monotone",
    ),
    (
        "lemma-rr-bic",
        "truthful reporting maximizes expected utility under rr-pass",
    ),
    (
        "lemma-rr-sdplus-ef1",
        "rr-pass outputs are EF1 and SD+ efficient on random instances",
    ),
    (
        "thm-characterization",
        "DSIC and SD+ efficient mechanisms are serial dictatorships",
    ),
    (
        "thm-welfare-bic",
        "welfare maximizers gain from misreporting under a neutral prior",
    ),
    (
        "thm-fpo-fulfilling",
        "two agents, two items: unique fPO and fulfilling allocation",
    ),
    (
        "lemma-ia-proportional",
        "incremental accommodation is proportional",
    ),
    (
        "lemma-expected-share",
        "expected kept share after a uniform crumb pick",
    ),
    (
        "cake-bic",
        "truthful reports are optimal in incremental accommodation",
    ),
    ("neutrality", "chi-squared neutrality of the example priors"),
];

fn profile(rows: &[&[i64]]) -> Profile<Rational> {
    Profile::new(
        rows.iter()
            .map(|r| r.iter().map(|&x| int(x)).collect())
            .collect(),
    )
    .expect("fixture profile")
}

pub fn run(
    id: &str,
    samples: Option<u64>,
    opts: &Options,
    report: &mut Report,
) -> Result<(), CliError> {
    let count = |default: u64| samples.unwrap_or(default);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    match id {
        "list" => {
            for (name, about) in FIXTURES {
                report.push(Check::info(*name, *about));
            }
        }
        "appendixC-separations" => separations(opts, report)?,
        "lemma-positional" => {
            for n in 2..=3 {
                for m in 2..=4 {
                    for agent in 0..n {
                        let table =
                            ReportTable::build(&MechanismId::RrPass, agent, n, m, opts.eval_cap())?;
                        let name = format!("positional n={n} m={m} agent {}", agent + 1);
                        match table.positional() {
                            Ok(qp) => {
                                report.push(
                                    Check::new(name, Some(check_monotone(&qp)))
                                        .value(rats(&qp.q_pos).join(" "))
                                        .data(json!({ "agents": n, "items": m, "agent": agent + 1, "q_pos": rats(&qp.q_pos) })),
                                );
                            }
                            Err(e) => {
                                report.push(Check::new(name, Some(false)).value(e.to_string()))
                            }
                        }
                    }
                }
            }
        }
        "lemma-rr-bic" => {
            let per_size = count(100);
            for (n, m) in [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3)] {
                let tables = (0..n)
                    .map(|a| ReportTable::build(&MechanismId::RrPass, a, n, m, opts.eval_cap()))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut violations = 0u64;
                let mut first = None;
                for _ in 0..per_size {
                    let values: Vec<Rational> = (0..m).map(|_| unit_rational(&mut rng)).collect();
                    for t in &tables {
                        let r = bic_from_table(t, &values);
                        if !r.verdict {
                            violations += 1;
                            first.get_or_insert_with(|| r.to_json());
                        }
                    }
                }
                report.push(
                    Check::new(format!("rr-pass bic n={n} m={m}"), Some(violations == 0))
                        .value(format!("{violations} violations in {} audits", per_size * n as u64))
                        .data(json!({ "agents": n, "items": m, "instances": per_size, "violation": first })),
                );
            }
        }
        "lemma-rr-sdplus-ef1" => {
            let instances = count(10_000);
            let (mut ef1_fail, mut sd_fail) = (0u64, 0u64);
            for _ in 0..instances {
                let n = rng.random_range(1..=4);
                let m = rng.random_range(1..=8);
                let p = random_profile(&mut rng, n, m);
                let x = rr_pass(&p.reports())?;
                ef1_fail += u64::from(!is_ef1(&p, &x)?.verdict);
                sd_fail += u64::from(
                    !is_efficient(&p, &x, EfficiencyCriterion::SdPlus, opts.enum_cap())?.verdict,
                );
            }
            for (name, fails) in [("rr-pass ef1", ef1_fail), ("rr-pass sd-plus", sd_fail)] {
                report.push(
                    Check::new(name, Some(fails == 0))
                        .value(format!("{fails} failures in {instances} instances")),
                );
            }
        }
        "thm-characterization" => characterization(opts, report)?,
        "thm-welfare-bic" => {
            let truth = vec![ratio(3, 5), ratio(2, 5)];
            let dev = vec![ratio(7, 10), ratio(3, 10)];
            let cfg = McConfig {
                agents: 2,
                prior: PriorSpec::Simplex,
                samples: count(1_000_000),
                seed: opts.seed,
            };
            for w in [
                WelfareFn::Nash,
                WelfareFn::Utilitarian,
                WelfareFn::Egalitarian,
                WelfareFn::PMean(ratio(1, 2)),
            ] {
                let id = MechanismId::WelfareMax(w);
                let r = bic_audit_mc(&id, 0, &truth, std::slice::from_ref(&dev), &cfg)?.remove(0);
                let violated = r.estimate > 3.0 * r.std_error;
                let mut data = r.to_json();
                data["claim"] = json!("BIC violated");
                data["predicted_gain"] = json!("1/50");
                report.push(
                    Check::new(format!("{id} BIC violated"), Some(violated))
                        .value(r.estimate.to_string())
                        .std_error(r.std_error)
                        .data(data),
                );
            }
        }
        "thm-fpo-fulfilling" => {
            let per_side = count(100).div_ceil(2);
            for below in [true, false] {
                let (mut done, mut bad) = (0u64, 0u64);
                while done < per_side {
                    let mut draw = || {
                        let q = rng.random_range(3..=40i64);
                        ratio(rng.random_range(1..q), q)
                    };
                    let (b, y) = (draw(), draw());
                    if b == y || (y < b) != below {
                        continue;
                    }
                    let one = int(1);
                    let p =
                        Profile::new(vec![vec![b.clone(), &one - &b], vec![y.clone(), &one - &y]])
                            .expect("two-by-two profile");
                    let mut good = Vec::new();
                    for o in OwnerVectors::new(2, 2) {
                        let x = Allocation::new(o, 2).expect("owner vector");
                        if is_fpo(&p, &x)?.verdict && is_fulfilling(&p, &x)?.verdict {
                            good.push(p.utilities(&x));
                        }
                    }
                    let expect = if below {
                        vec![b.clone(), &one - &y]
                    } else {
                        vec![&one - &b, y.clone()]
                    };
                    bad += u64::from(good != vec![expect]);
                    done += 1;
                }
                let name = if below {
                    "unique fPO+fulfilling, y < b"
                } else {
                    "unique fPO+fulfilling, y > b"
                };
                report.push(
                    Check::new(name, Some(bad == 0))
                        .value(format!("{bad} mismatches in {done} instances")),
                );
            }
        }
        "lemma-ia-proportional" => {
            let runs = count(1000);
            let mut fails = 0u64;
            for i in 0..runs {
                let n = rng.random_range(1..=5);
                let fs: Vec<_> = (0..n)
                    .map(|_| random_density(&mut rng, i % 2 == 1))
                    .collect();
                let out = incremental_accommodation(&fs)?;
                fails += u64::from(!is_proportional(&out.allocation, &fs)?.verdict);
            }
            report.push(
                Check::new("incremental accommodation proportional", Some(fails == 0))
                    .value(format!("{fails} failures in {runs} runs")),
            );
        }
        "lemma-expected-share" => {
            let cakes = count(100);
            let mut fails = 0u64;
            for _ in 0..cakes {
                let x = random_piece(&mut rng);
                let (f, g) = (any_density(&mut rng), any_density(&mut rng));
                let t = rng.random_range(2..=6);
                let (lhs, rhs) = expected_share_check(&x, &f, &g, t)?;
                fails += u64::from(lhs != rhs);
            }
            report.push(
                Check::new("expected share identity", Some(fails == 0))
                    .value(format!("{fails} mismatches in {cakes} cakes")),
            );
        }
        "cake-bic" => {
            let rounds = count(10);
            let (mut fails, mut mismatches) = (0u64, 0u64);
            for _ in 0..rounds {
                for agent in 0..3 {
                    let truth = any_density(&mut rng);
                    let devs: Vec<_> = (0..3).map(|_| any_density(&mut rng)).collect();
                    let earlier: Vec<_> = (0..agent).map(|_| any_density(&mut rng)).collect();
                    let a = cake_bic_audit(agent, &truth, &devs, &earlier, 3)?;
                    fails += u64::from(!a.verdict);
                    mismatches += u64::from(!a.cross_check_ok());
                }
            }
            report.push(
                Check::new("cake bic n=3", Some(fails == 0))
                    .value(format!("{fails} violations in {} audits", rounds * 3)),
            );
            report.push(
                Check::new("closed form matches enumeration", Some(mismatches == 0))
                    .value(format!("{mismatches} mismatches")),
            );
        }
        "neutrality" => {
            let n = count(1_000_000);
            let cases: [(&str, PriorSpec, bool); 3] = [
                ("simplex", PriorSpec::Simplex, true),
                (
                    "per-item:0,1;1/2,3/4",
                    "per-item:0,1;1/2,3/4".parse().expect("fixture prior"),
                    true,
                ),
                (
                    "per-item:0,1;2,3",
                    "per-item:0,1;2,3".parse().expect("fixture prior"),
                    false,
                ),
            ];
            for (name, prior, claimed) in cases {
                let r = neutrality_test(&prior, 2, n, 0.01, opts.seed)?;
                let mut data = r.to_json();
                data["claimed_neutral"] = json!(claimed);
                let label = if claimed { "neutral" } else { "not neutral" };
                report.push(
                    Check::new(format!("{name} {label}"), Some(r.pass == claimed))
                        .value(r.statistic.to_string())
                        .data(data),
                );
            }
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown fixture `{other}` (try `replicate list`)"
            )))
        }
    }
    Ok(())
}

fn triple(p: &Profile<Rational>, x: &Allocation, cap: u64) -> Result<[bool; 3], CliError> {
    let eff = |c| is_efficient(p, x, c, cap).map(|r| r.verdict);
    Ok([
        eff(EfficiencyCriterion::Sd)?,
        eff(EfficiencyCriterion::SdPlus)?,
        eff(EfficiencyCriterion::Pareto)?,
    ])
}

/// Verdicts (SD, SD+, Pareto) for the SD+-but-not-Pareto allocation, its
/// Pareto improvement, and the SD-but-not-SD+ allocation.
fn separations(opts: &Options, report: &mut Report) -> Result<(), CliError> {
    let cap = opts.enum_cap();
    let p = profile(&[&[5, 4, 3, 2], &[6, 1, 2, 3]]);
    let x = Allocation::new(vec![0, 0, 1, 1], 2).expect("fixture allocation");
    let y = Allocation::new(vec![1, 0, 0, 0], 2).expect("fixture allocation");
    let q = profile(&[&[1, 1], &[1, 0]]);
    let z = Allocation::new(vec![0, 1], 2).expect("fixture allocation");
    let cases = [
        ("x", &p, &x, [true, true, false]),
        ("y", &p, &y, [true, true, true]),
        ("x'", &q, &z, [true, false, false]),
    ];
    for (name, prof, alloc, expect) in cases {
        let got = triple(prof, alloc, cap)?;
        let rows: Vec<Vec<String>> = prof.rows().iter().map(|r| rats(r)).collect();
        report.push(
            Check::new(format!("{name} sd/sd-plus/pareto"), Some(got == expect))
                .value(format!("{}/{}/{}", got[0], got[1], got[2]))
                .data(json!({
                    "values": rows,
                    "allocation": allocation_json(alloc, prof.agents()),
                    "utilities": rats(&prof.utilities(alloc)),
                    "verdicts": { "sd": got[0], "sd-plus": got[1], "pareto": got[2] },
                    "expected": { "sd": expect[0], "sd-plus": expect[1], "pareto": expect[2] },
                })),
        );
    }
    let pareto = is_efficient(&p, &x, EfficiencyCriterion::Pareto, cap)?;
    let witness_ok = matches!(&pareto.witness, Some(fairdiv::audits::Witness::Allocation { allocation, .. }) if *allocation == y);
    report.push(
        Check::new("x is Pareto-dominated by y", Some(witness_ok))
            .value(rats(&p.utilities(&y)).join(","))
            .data(pareto.to_json()),
    );
    Ok(())
}

fn characterization(opts: &Options, report: &mut Report) -> Result<(), CliError> {
    let budget = opts.node_budget();
    let one = CharacterizationConfig {
        canonical_zero_items: false,
        node_budget: budget,
        ..CharacterizationConfig::new(1)
    };
    let sd_one = CharacterizationConfig {
        criterion: EfficiencyCriterion::Sd,
        ..one.clone()
    };
    let two = CharacterizationConfig {
        node_budget: budget,
        ..CharacterizationConfig::new(2)
    };
    let cases = [
        ("m=1 sd-plus: only serial dictatorships", one, true),
        ("m=1 sd: a non-dictatorial survivor exists", sd_one, false),
        ("m=2 sd-plus: only serial dictatorships", two, true),
    ];
    for (name, cfg, dictatorial) in cases {
        let r = characterization_search(&cfg)?;
        let verdict = match (&r.outcome, dictatorial) {
            (CharacterizationOutcome::Inconclusive, _) => {
                report.push(
                    Check::new(name, None)
                        .value("inconclusive")
                        .data(r.to_json()),
                );
                return Err(CliError::CapExceeded(format!(
                    "characterization search for {} item(s) used its {} node budget",
                    cfg.items, cfg.node_budget
                )));
            }
            (CharacterizationOutcome::Verified, d) => d,
            (CharacterizationOutcome::Counterexample(_), d) => !d,
        };
        let value = match r.outcome {
            CharacterizationOutcome::Counterexample(_) => "counterexample found".to_string(),
            _ => format!("{} survivors", r.survivors),
        };
        report.push(
            Check::new(name, Some(verdict))
                .value(value)
                .data(r.to_json()),
        );
    }
    Ok(())
}
