//! Subcommand implementations.

use serde_json::Value;

use nsf_core::analysis::{
    blind_seeded_steps, blind_steps, expected_one_step_improvement, falsify_weights, steps, switch_point,
    FalsifyConfig, SearchMode, SeedThreshold,
};
use nsf_core::benchmarks::{
    build_counts_class, build_sat2_analytic, Benchmark, CountsClassSpec, Sat2Spec, SatFlipRule, TABLE5_COUNTS,
    TABLE6_COUNTS,
};
use nsf_core::empirical::{
    census_exhaustive, census_sampled, gen_tsp, nsf_report, CensusReport, NsfReport, Target, TspInstance,
};
use nsf_core::model::{ClassModel, Side};
use nsf_core::rng::derive_seed;
use nsf_core::simulate::{
    aggregate, run_blind, run_descent, run_many, run_seeded, traces_csv, AbstractSpace, AcceptRule, Start,
};
use nsf_core::verify::{fixture_reports, run_property, Property};

use crate::config::parse_list;
use crate::output::{num, opt_num, Table};
use crate::reference::{lookup, Quantity};
use crate::{BenchArgs, BenchCmd, ClassArgs, CliError, Ctx, FalsifyArgs, Sat2Args, SimArgs, SimCmd, TspArgs, TspCmd, VerifyArgs};

fn parse_with<T>(key: &str, text: &str) -> Result<T, CliError>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    text.parse::<T>().map_err(|e| CliError::Config(format!("{key}: {e}")))
}

// ---------------------------------------------------------------- bench

/// Published values compared against computed ones.
#[derive(Default)]
struct Discrepancies(Table);

impl Discrepancies {
    fn new() -> Self {
        Self(Table::new(["table", "quantity", "k", "b", "computed", "published", "rel_diff"]))
    }

    fn check(&mut self, class: &str, q: Quantity, k: Option<usize>, b: Option<usize>, computed: f64) {
        for cell in lookup(class, q, k, b) {
            let rel = (computed - cell.value) / cell.value.abs();
            self.0.push(vec![
                Value::from(cell.table),
                Value::from(format!("{q:?}")),
                k.map_or(Value::Null, Value::from),
                b.map_or(Value::Null, Value::from),
                num(computed),
                num(cell.value),
                num(rel),
            ]);
        }
    }

    fn write(self, ctx: &mut Ctx, stem: &str) -> Result<(), CliError> {
        if self.0.rows.is_empty() {
            return Ok(());
        }
        ctx.out.table(&format!("{stem}-discrepancy"), &self.0)?;
        ctx.show("published values", &self.0.to_csv());
        Ok(())
    }
}

fn bench_class(ctx: &mut Ctx, a: &BenchArgs) -> Result<Benchmark, CliError> {
    let name = ctx.settings.get("class", a.class.clone(), "uniform".to_string())?;
    parse_with("class", &name)
}

fn bench_model(class: Benchmark, b: usize) -> Result<ClassModel, CliError> {
    if b == 0 {
        return Err(CliError::Config("b must be at least 1".into()));
    }
    Ok(class.model(b)?)
}

fn check_levels(ks: &[usize], k_max: usize) -> Result<(), CliError> {
    match ks.iter().find(|&&k| k > k_max) {
        Some(k) => Err(CliError::Config(format!("k = {k} outside 0..={k_max}"))),
        None => Ok(()),
    }
}

pub fn bench(ctx: &mut Ctx, cmd: BenchCmd) -> Result<(), CliError> {
    match cmd {
        BenchCmd::Improve(a) => bench_improve(ctx, &a),
        BenchCmd::Steps(a) => bench_steps(ctx, &a),
        BenchCmd::Seeded(a) => bench_seeded(ctx, &a),
        BenchCmd::Onestep(a) => bench_onestep(ctx, &a),
    }
}

fn bench_improve(ctx: &mut Ctx, a: &BenchArgs) -> Result<(), CliError> {
    let class = bench_class(ctx, a)?;
    let ks: Vec<usize> = ctx.settings.list("k", a.k.clone(), "50")?;
    let bs: Vec<usize> = ctx.settings.list("b", a.b.clone(), "1,5,10,50,200")?;
    let dist = class.distribution();
    check_levels(&ks, dist.k_max())?;
    let stem = format!("bench-improve-{}", class.name());
    let mut cols = vec!["k".to_string(), "p_improve".to_string()];
    cols.extend(bs.iter().map(|b| format!("pn_improve_b{b}")));
    let mut t = Table::new(cols);
    let mut disc = Discrepancies::new();
    let models: Vec<ClassModel> = bs.iter().map(|&b| bench_model(class, b)).collect::<Result<_, _>>()?;
    for &k in &ks {
        let p = dist.blind_improve_prob(k);
        disc.check(class.name(), Quantity::BlindImprove, Some(k), None, p);
        let mut row = vec![Value::from(k), num(p)];
        for (m, &b) in models.iter().zip(&bs) {
            let v = m.kernel.improve_prob(k);
            disc.check(class.name(), Quantity::NbrImprove, Some(k), Some(b), v);
            row.push(num(v));
        }
        t.push(row);
    }
    ctx.out.table(&stem, &t)?;
    ctx.show(&stem, &t.to_csv());
    let n = dist.k_max();
    ctx.out.dat(&format!("{stem}-p"), (0..=n).map(|k| (k as f64, dist.p(k))))?;
    ctx.out.dat(&format!("{stem}-blind"), (0..=n).map(|k| (k as f64, dist.blind_improve_prob(k))))?;
    let k0 = ks[0];
    for (m, &b) in models.iter().zip(&bs) {
        ctx.out.dat(&format!("{stem}-b{b}"), (0..=n).map(|k| (k as f64, m.kernel.improve_prob(k))))?;
        let w = (1..=n).map(|d| (d as f64, m.weights.weight(k0, d).unwrap_or(0.0)));
        ctx.out.dat(&format!("{stem}-weights-k{k0}-b{b}"), w)?;
    }
    disc.write(ctx, &stem)
}

fn bench_onestep(ctx: &mut Ctx, a: &BenchArgs) -> Result<(), CliError> {
    let class = bench_class(ctx, a)?;
    let ks: Vec<usize> = ctx.settings.list("k", a.k.clone(), "50,30,20,10,2")?;
    let bs: Vec<usize> = ctx.settings.list("b", a.b.clone(), "1,5,10,50,200")?;
    let models: Vec<ClassModel> = bs.iter().map(|&b| bench_model(class, b)).collect::<Result<_, _>>()?;
    check_levels(&ks, models[0].k_max())?;
    let stem = format!("bench-onestep-{}", class.name());
    let mut cols = vec!["k".to_string(), "e_imp".to_string()];
    cols.extend(bs.iter().map(|b| format!("en_imp_b{b}")));
    let mut t = Table::new(cols);
    let mut disc = Discrepancies::new();
    for &k in &ks {
        let e = expected_one_step_improvement(&models[0], k, SearchMode::Blind);
        disc.check(class.name(), Quantity::BlindOneStep, Some(k), None, e);
        let mut row = vec![Value::from(k), num(e)];
        for (m, &b) in models.iter().zip(&bs) {
            let v = expected_one_step_improvement(m, k, SearchMode::Neighbourhood);
            disc.check(class.name(), Quantity::NbrOneStep, Some(k), Some(b), v);
            row.push(num(v));
        }
        t.push(row);
    }
    ctx.out.table(&stem, &t)?;
    ctx.show(&stem, &t.to_csv());
    // Smallest k at which blind search gains more in one step than descent.
    let mut cross = Table::new(["b", "first_k_blind_gains_more"]);
    for (m, &b) in models.iter().zip(&bs) {
        let first = (1..=m.k_max()).find(|&k| {
            expected_one_step_improvement(m, k, SearchMode::Blind)
                > expected_one_step_improvement(m, k, SearchMode::Neighbourhood)
        });
        cross.push(vec![Value::from(b), first.map_or(Value::Null, Value::from)]);
    }
    ctx.out.table(&format!("{stem}-crossover"), &cross)?;
    ctx.show("crossover", &cross.to_csv());
    disc.write(ctx, &stem)
}

fn bench_steps(ctx: &mut Ctx, a: &BenchArgs) -> Result<(), CliError> {
    let class = bench_class(ctx, a)?;
    let ks: Vec<usize> = ctx.settings.list("k", a.k.clone(), "50,30,10,2")?;
    let bs: Vec<usize> = ctx.settings.list("b", a.b.clone(), "1,5,10,50,200")?;
    let dist = class.distribution();
    check_levels(&ks, dist.k_max())?;
    let top = *ks.iter().max().expect("non-empty list");
    let blind = blind_steps(&dist)?;
    let stem = format!("bench-steps-{}", class.name());
    let mut cols = vec!["b".to_string(), "blind".to_string()];
    cols.extend(ks.iter().map(|k| format!("steps_k{k}")));
    let mut t = Table::new(cols);
    let mut disc = Discrepancies::new();
    disc.check(class.name(), Quantity::Blind, None, None, blind);
    for &b in &bs {
        let m = bench_model(class, b)?;
        let prof = steps(&m, top)?;
        let mut row = vec![Value::from(b), num(blind)];
        for &k in &ks {
            disc.check(class.name(), Quantity::Steps, Some(k), Some(b), prof.at(k));
            row.push(num(prof.at(k)));
        }
        t.push(row);
        ctx.out.write(&format!("{stem}-b{b}.dat"), &prof.to_dat())?;
    }
    ctx.out.table(&stem, &t)?;
    ctx.show(&stem, &t.to_csv());
    disc.write(ctx, &stem)
}

fn bench_seeded(ctx: &mut Ctx, a: &BenchArgs) -> Result<(), CliError> {
    let class = bench_class(ctx, a)?;
    let ks: Vec<usize> = ctx.settings.list("k", a.k.clone(), "50,30,20,10,5")?;
    let bs: Vec<usize> = ctx.settings.list("b", a.b.clone(), "5")?;
    let rule_name = ctx.settings.get("threshold", a.threshold.clone(), "at-most".to_string())?;
    let rule: SeedThreshold = parse_with("threshold", &rule_name)?;
    let hi = ctx.settings.get("switch-hi", a.switch_hi, 50usize)?;
    let dist = class.distribution();
    check_levels(&ks, dist.k_max())?;
    let blind = blind_steps(&dist)?;
    let stem = format!("bench-seeded-{}", class.name());
    let mut cols = vec!["b".to_string(), "blind".to_string()];
    cols.extend(ks.iter().map(|k| format!("blsteps_k{k}")));
    let mut t = Table::new(cols);
    // `switch_below` is the argmin when the blind phase ends strictly below k.
    let mut sw = Table::new(["b", "argmin", "switch_below", "min_blsteps", "first_k_blind_gains_more"]);
    let mut disc = Discrepancies::new();
    disc.check(class.name(), Quantity::Blind, None, None, blind);
    for &b in &bs {
        let m = bench_model(class, b)?;
        let mut row = vec![Value::from(b), num(blind)];
        for &k in &ks {
            let v = blind_seeded_steps(&m, k, rule)?;
            disc.check(class.name(), Quantity::Seeded, Some(k), Some(b), v);
            row.push(num(v));
        }
        t.push(row);
        let sp = switch_point(&m, hi, rule)?;
        let below = switch_point(&m, hi, SeedThreshold::Below)?;
        sw.push(vec![
            Value::from(b),
            Value::from(sp.argmin),
            Value::from(below.argmin),
            num(sp.min_steps),
            sp.candidate.map_or(Value::Null, Value::from),
        ]);
        ctx.out.dat(&format!("{stem}-b{b}"), sp.profile.iter().map(|&(k, v)| (k as f64, v)))?;
    }
    ctx.out.table(&stem, &t)?;
    ctx.show(&stem, &t.to_csv());
    ctx.out.table(&format!("{stem}-switch"), &sw)?;
    ctx.show("switch point", &sw.to_csv());
    disc.write(ctx, &stem)
}

// ---------------------------------------------------------------- counts classes

struct Preset {
    counts: Vec<u64>,
    total: u64,
    weights: &'static str,
}

fn preset(name: &str) -> Result<Preset, CliError> {
    let p = |counts: &[u64], total, weights| Preset { counts: counts.to_vec(), total, weights };
    Ok(match name {
        "table5" => p(&TABLE5_COUNTS, 500_000, "1,1,1,1;2,1,1,1;4,1,1,1;4,3.5,3,0.5"),
        "table6" => p(&TABLE6_COUNTS, 100, "1,1,1,1;2,1,1,1;3,2,1,0.7;3,2.5,1.5,0.5"),
        "table7a" => p(&[1, 10, 10, 10, 20, 20, 10, 10, 1], 100, "1.1,1,1,0.8"),
        "table7b" => p(&[1, 1, 10, 10, 10, 10, 10, 10, 1], 70, "1.4,1,1,0.5"),
        "table7c" => p(&[1, 10, 10, 10, 1], 35, "1.1,0.8"),
        other => {
            return Err(CliError::Config(format!(
                "unknown preset '{other}' (table5|table6|table7a|table7b|table7c)"
            )))
        }
    })
}

/// The class's counts and total plus one or more weight vectors.
fn counts_specs(
    ctx: &mut Ctx,
    preset_flag: Option<String>,
    counts: Option<String>,
    total: Option<u64>,
    weights: Option<String>,
) -> Result<Vec<CountsClassSpec>, CliError> {
    let counts: Option<Vec<u64>> = ctx.settings.opt_list("counts", counts)?;
    let (counts, total, default_w) = match counts {
        Some(c) => {
            let total = ctx
                .settings
                .opt("total", total)?
                .ok_or_else(|| CliError::Config("--counts needs --total".into()))?;
            (c, total, None)
        }
        None => {
            let name = ctx.settings.get("preset", preset_flag, "table5".to_string())?;
            let p = preset(&name)?;
            (p.counts, p.total, Some(p.weights))
        }
    };
    let text = match (ctx.settings.opt::<String>("weights", weights)?, default_w) {
        (Some(w), _) => w,
        (None, Some(d)) => d.to_string(),
        (None, None) => return Err(CliError::Config("custom counts need --weights".into())),
    };
    text.split(';')
        .map(|w| Ok(CountsClassSpec::new(counts.clone(), total, parse_list::<f64>("weights", w)?)))
        .collect()
}

fn fmt_weights(w: &[f64]) -> String {
    format!("[{}]", w.iter().map(f64::to_string).collect::<Vec<_>>().join(" "))
}

pub fn class_steps(ctx: &mut Ctx, a: ClassArgs) -> Result<(), CliError> {
    let specs = counts_specs(ctx, a.preset, a.counts, a.total, a.weights)?;
    let mut t = Table::new(["weights", "k", "steps", "blind", "rbar", "feasible", "reason"]);
    let mut failures = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        let w = fmt_weights(&spec.weights);
        match build_counts_class(spec) {
            Ok(c) => {
                let k = c.eval_level;
                let prof = steps(&c.model, k)?;
                let rbar = c.model.weights.average(k).ok();
                t.push(vec![
                    Value::from(w),
                    Value::from(k),
                    num(prof.at(k)),
                    num(prof.blind),
                    opt_num(rbar),
                    Value::from(true),
                    Value::from(""),
                ]);
                ctx.out.write(&format!("class-steps-{i}.dat"), &prof.to_dat())?;
            }
            Err(e) => {
                t.push(vec![
                    Value::from(w.clone()),
                    Value::from(spec.eval_level()),
                    Value::Null,
                    Value::Null,
                    Value::Null,
                    Value::from(false),
                    Value::from(e.to_string()),
                ]);
                failures.push(format!("weights {w}: {e}"));
            }
        }
    }
    ctx.out.table("class-steps", &t)?;
    ctx.show("class steps", &t.to_csv());
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Config(failures.join("; ")))
    }
}

// ---------------------------------------------------------------- 2-SAT

pub fn sat2(ctx: &mut Ctx, a: Sat2Args) -> Result<(), CliError> {
    let d = Sat2Spec::default();
    let spec = Sat2Spec {
        n_vars: ctx.settings.get("n-vars", a.n_vars, d.n_vars)?,
        n_clauses: ctx.settings.get("clauses", a.clauses, d.n_clauses)?,
        clause_len: ctx.settings.get("clause-len", a.clause_len, d.clause_len)?,
        occurrences_per_var: ctx.settings.get("occurrences", a.occurrences, d.occurrences_per_var)?,
    };
    let rule = match ctx.settings.get("rule", a.rule, "one-third".to_string())?.as_str() {
        "one-third" => SatFlipRule::OneThird,
        "one-half" => SatFlipRule::OneHalf,
        other => return Err(CliError::Config(format!("unknown rule '{other}' (one-third|one-half)"))),
    };
    let level = ctx.settings.get("k", a.k, 20usize)?;
    let deltas = ctx.settings.get("deltas", a.deltas, 4usize)?;
    let m = build_sat2_analytic(&spec, rule)?;
    let n = m.k_max();
    if level > n || deltas > level {
        return Err(CliError::Config(format!("need deltas ≤ k ≤ {n}")));
    }

    ctx.out.dat("sat2-p", (0..=n).map(|k| (k as f64, m.dist.p(k))))?;

    let mut t1 = Table::new(["delta", "cost", "r", "p", "r_times_p", "pn"]);
    for delta in 1..=deltas {
        let r = m.weights.weight(level, delta);
        let p = m.dist.p(level - delta);
        t1.push(vec![
            Value::from(delta),
            Value::from(level - delta),
            opt_num(r),
            num(p),
            opt_num(r.map(|r| r * p)),
            num(m.kernel.pn(level, (level - delta) as isize)),
        ]);
    }
    ctx.out.table("sat2-table", &t1)?;
    ctx.show(&format!("cost {level}"), &t1.to_csv());

    let mut lv = Table::new(["k", "p", "rbar", "p_improve", "pn_improve", "pbr_improve", "pn_same"]);
    let rbar_gt1 = |k: usize| m.weights.average(k).is_ok_and(|v| v > 1.0);
    let nbr_better = |k: usize| m.kernel.improve_prob(k) > m.dist.blind_improve_prob(k);
    for k in 1..=n {
        lv.push(vec![
            Value::from(k),
            num(m.dist.p(k)),
            opt_num(m.weights.average(k).ok()),
            num(m.dist.blind_improve_prob(k)),
            num(m.kernel.improve_prob(k)),
            num(m.weighted_prob(k, Side::Improving)),
            num(m.kernel.pn(k, k as isize)),
        ]);
    }
    ctx.out.table("sat2-levels", &lv)?;
    ctx.out.dat("sat2-improve-blind", (1..=n).map(|k| (k as f64, m.dist.blind_improve_prob(k))))?;
    ctx.out.dat("sat2-improve-nbr", (1..=n).map(|k| (k as f64, m.kernel.improve_prob(k))))?;
    ctx.out.dat(
        "sat2-rbar",
        (1..=n).filter_map(|k| m.weights.average(k).ok().map(|v| (k as f64, v))),
    )?;

    let peak = m.dist.modal_cost();
    let mut s = Table::new(["quantity", "value"]);
    s.push(vec![Value::from("modal_cost"), Value::from(peak)]);
    s.push(vec![Value::from("p_modal"), num(m.dist.p(peak))]);
    // The first run of levels from k = 1 where the property holds; far
    // above the mode both properties hold again on negligible mass.
    let run_end = |f: &dyn Fn(usize) -> bool| (1..=n).take_while(|&k| f(k)).last();
    let last = |f: &dyn Fn(usize) -> bool| (1..=n).rev().find(|&k| f(k));
    let opt = |v: Option<usize>| v.map_or(Value::Null, Value::from);
    s.push(vec![Value::from("rbar_gt_1_up_to"), opt(run_end(&rbar_gt1))]);
    s.push(vec![Value::from("rbar_gt_1_last"), opt(last(&rbar_gt1))]);
    s.push(vec![Value::from("pn_improve_gt_p_improve_up_to"), opt(run_end(&nbr_better))]);
    s.push(vec![Value::from("pn_improve_gt_p_improve_last"), opt(last(&nbr_better))]);
    ctx.out.table("sat2-summary", &s)?;
    ctx.show("summary", &s.to_csv());
    Ok(())
}

// ---------------------------------------------------------------- TSP

fn tsp_census(ctx: &mut Ctx, a: &TspArgs) -> Result<(Vec<TspInstance>, CensusReport), CliError> {
    let n = ctx.settings.get("n", a.n, 10usize)?;
    let max_edge = ctx.settings.get("max-edge", a.max_edge, 20u32)?;
    let count = ctx.settings.get("instances", a.instances, 20usize)?;
    let samples = ctx.settings.opt("samples", a.samples)?;
    if count == 0 {
        return Err(CliError::Config("instances must be at least 1".into()));
    }
    let insts: Vec<TspInstance> =
        (0..count).map(|i| gen_tsp(n, max_edge, derive_seed(ctx.seed, i as u64))).collect::<Result<_, _>>()?;
    let report = match samples {
        None => census_exhaustive(&insts)?,
        Some(s) => {
            let target = match ctx.settings.get("target", a.target.clone(), "midpoint".to_string())?.as_str() {
                "midpoint" => Target::Midpoint,
                c => Target::Cost(parse_with("target", c)?),
            };
            census_sampled(&insts, s, target, ctx.seed)?
        }
    };
    Ok((insts, report))
}

/// Levels in `(optimum, k_ge]` for an exhaustive census, the target for a sampled one.
fn surveyed_nsf(r: &CensusReport) -> NsfReport {
    match r.target {
        Some(t) => nsf_report(r, t, t),
        None => nsf_report(r, r.raw(r.optimum_level() + 1), r.raw(r.ge_level())),
    }
}

fn tsp_summary(r: &CensusReport, nsf: &NsfReport) -> Table {
    let mut s = Table::new(["quantity", "value"]);
    let mut add = |k: &str, v: Value| s.push(vec![Value::from(k), v]);
    add("mode", Value::from(format!("{:?}", r.mode)));
    add("instances", Value::from(r.instances));
    add("points", Value::from(r.points));
    add("evaluations", Value::from(r.evaluations));
    add("optimum_cost", Value::from(r.raw(r.optimum_level())));
    add("modal_cost", Value::from(r.raw(r.modal_level())));
    add("good_enough_cost", Value::from(r.raw(r.ge_level())));
    let inv: Vec<String> = r.inversions().iter().map(|&k| r.raw(k).to_string()).collect();
    add("inversions", Value::from(inv.join(" ")));
    add("surveyed_levels", Value::from(nsf.rows.len()));
    add("monotone_fraction", num(nsf.monotone_fraction()));
    add("normal_fraction", num(nsf.normal_fraction()));
    add("rbar_gt_1_all", Value::from(nsf.rbar_gt1_all));
    add("lemma4_all", Value::from(nsf.lemma4_all));
    s
}

pub fn tsp(ctx: &mut Ctx, cmd: TspCmd) -> Result<(), CliError> {
    let (pairs, a) = match cmd {
        TspCmd::Census(a) => (false, a),
        TspCmd::Nsf(a) => (true, a),
    };
    let (insts, r) = tsp_census(ctx, &a)?;
    let nsf = surveyed_nsf(&r);
    let stem = if pairs { "tsp-nsf" } else { "tsp-census" };
    let text: String = insts.iter().map(TspInstance::to_text).collect::<Vec<_>>().join("\n");
    ctx.out.write(&format!("{stem}-instances.txt"), &text)?;
    ctx.out.write(&format!("{stem}-levels.csv"), &r.to_csv())?;
    ctx.out.write(&format!("{stem}-p.dat"), &r.p_dat())?;
    ctx.out.write(&format!("{stem}-improve-nbr.dat"), &r.nbr_improve_dat())?;
    ctx.out.dat(
        &format!("{stem}-improve-blind"),
        (0..=r.k_max()).map(|k| (r.raw(k) as f64, (0..k).map(|j| r.p(j)).sum::<f64>())),
    )?;
    ctx.out.write(&format!("{stem}-rows.csv"), &nsf.to_csv())?;
    ctx.out.dat(
        &format!("{stem}-rbar"),
        nsf.rows.iter().filter_map(|row| row.rbar.map(|v| (row.cost as f64, v))),
    )?;
    if pairs {
        ctx.out.write(&format!("{stem}-pairs.csv"), &nsf.pairs_csv())?;
    }
    let s = tsp_summary(&r, &nsf);
    ctx.out.table(&format!("{stem}-summary"), &s)?;
    ctx.show("summary", &s.to_csv());
    Ok(())
}

// ---------------------------------------------------------------- simulation

/// Builds the class model of a simulation and its default start level.
fn sim_model(ctx: &mut Ctx, a: &SimArgs) -> Result<(ClassModel, String, usize), CliError> {
    let class = ctx.settings.get("class", a.class.clone(), "table5".to_string())?;
    if let Ok(bench) = class.parse::<Benchmark>() {
        let b = ctx.settings.get("b", a.b, 5usize)?;
        return Ok((bench_model(bench, b)?, class, 20));
    }
    if class == "sat2" {
        return Ok((build_sat2_analytic(&Sat2Spec::default(), SatFlipRule::default())?, class, 20));
    }
    let (preset_name, counts) = if class == "counts" { (None, a.counts.clone()) } else { (Some(class.clone()), None) };
    // A single weight vector: the preset's last row unless given.
    let weights = match (a.weights.clone(), &preset_name) {
        (Some(w), _) => Some(w),
        (None, Some(p)) => preset(p)?.weights.rsplit(';').next().map(str::to_string),
        (None, None) => None,
    };
    let spec = counts_specs(ctx, preset_name, counts, a.total, weights)?.remove(0);
    let c = build_counts_class(&spec)?;
    Ok((c.model, class, c.eval_level))
}

pub fn simulate(ctx: &mut Ctx, cmd: SimCmd) -> Result<(), CliError> {
    let (mode, a) = match cmd {
        SimCmd::Blind(a) => ("blind", a),
        SimCmd::Descent(a) => ("descent", a),
        SimCmd::Seeded(a) => ("seeded", a),
    };
    let (model, class, default_k) = sim_model(ctx, &a)?;
    let k = ctx.settings.get("k", a.k, default_k)?;
    let target = ctx.settings.get("target", a.target, 0u64)?;
    let runs = ctx.settings.get("runs", a.runs, 1000usize)?;
    let cap = ctx.settings.get("cap", a.cap, 1_000_000_000u64)?;
    let rule: AcceptRule = parse_with("rule", &ctx.settings.get("rule", a.rule.clone(), "strict".to_string())?)?;
    let threshold: SeedThreshold =
        parse_with("threshold", &ctx.settings.get("threshold", a.threshold.clone(), "at-most".to_string())?)?;
    if runs == 0 {
        return Err(CliError::Config("runs must be at least 1".into()));
    }
    if k > model.k_max() || target as usize > model.k_max() {
        return Err(CliError::Config(format!("k and target must lie in 0..={}", model.k_max())));
    }
    let space = AbstractSpace::new(&model)?;
    let seed = ctx.seed;
    let (traces, expected) = match mode {
        "blind" => {
            let mass = model.dist.blind_improve_prob(target as usize + 1);
            let traces = run_many(runs, seed, |s| run_blind(&space, target, s, cap))?;
            (traces, (mass > 0.0).then(|| 1.0 / mass))
        }
        "descent" => {
            let traces = run_many(runs, seed, |s| run_descent(&space, Start::Level(k as u64), rule, target, s, cap))?;
            let exp = (target == 0 && rule == AcceptRule::Strict).then(|| steps(&model, k).map(|p| p.at(k))).transpose();
            (traces, exp.ok().flatten())
        }
        _ => {
            let traces = run_many(runs, seed, |s| run_seeded(&space, k as u64, threshold, rule, target, s, cap))?;
            let exp = (target == 0 && rule == AcceptRule::Strict).then(|| blind_seeded_steps(&model, k, threshold));
            (traces, exp.transpose().ok().flatten())
        }
    };
    let agg = aggregate(&traces)?;
    let stem = format!("simulate-{mode}-{class}");
    ctx.out.write(&format!("{stem}-traces.csv"), &traces_csv(&traces))?;
    let mut t = Table::new([
        "runs", "mean", "std_err", "min", "q25", "median", "q75", "max", "success", "stuck", "expected", "z",
    ]);
    let z = expected.map(|e| if agg.std_err > 0.0 { (agg.mean - e) / agg.std_err } else { 0.0 });
    t.push(vec![
        Value::from(agg.runs),
        num(agg.mean),
        num(agg.std_err),
        Value::from(agg.min),
        Value::from(agg.q25),
        Value::from(agg.median),
        Value::from(agg.q75),
        Value::from(agg.max),
        num(agg.success),
        num(agg.stuck),
        opt_num(expected),
        opt_num(z),
    ]);
    ctx.out.table(&format!("{stem}-summary"), &t)?;
    ctx.show(&stem, &t.to_csv());
    Ok(())
}

// ---------------------------------------------------------------- verification

fn run_falsifier(ctx: &mut Ctx, spec: &CountsClassSpec, cfg: &FalsifyConfig, stem: &str) -> Result<usize, CliError> {
    let rep = falsify_weights(spec, cfg)?;
    let mut t = Table::new(["weights", "steps", "blind"]);
    for v in &rep.violations {
        t.push(vec![Value::from(fmt_weights(&v.weights)), num(v.steps), num(rep.blind)]);
    }
    ctx.out.table(&format!("{stem}-violations"), &t)?;
    let mut s = Table::new(["blind", "evaluated", "feasible", "violations"]);
    s.push(vec![num(rep.blind), Value::from(rep.evaluated), Value::from(rep.feasible), Value::from(rep.violations.len())]);
    ctx.out.table(&format!("{stem}-summary"), &s)?;
    ctx.show("falsifier", &s.to_csv());
    Ok(rep.violations.len())
}

fn falsify_config(ctx: &mut Ctx, resolution: Option<f64>, epsilon: Option<f64>) -> Result<FalsifyConfig, CliError> {
    let d = FalsifyConfig::default();
    Ok(FalsifyConfig {
        resolution: ctx.settings.get("resolution", resolution, d.resolution)?,
        epsilon: ctx.settings.get("epsilon", epsilon, d.epsilon)?,
        ..d
    })
}

pub fn verify(ctx: &mut Ctx, a: VerifyArgs) -> Result<(), CliError> {
    let models = ctx.settings.get("models", a.models, 1000usize)?;
    let only: Option<Vec<String>> = ctx.settings.opt_list("only", a.only)?;
    let props: Vec<Property> = match only {
        Some(names) => names.iter().map(|n| parse_with::<Property>("only", n)).collect::<Result<_, _>>()?,
        None => Property::ALL.to_vec(),
    };
    let with_falsifier = ctx.settings.switch("falsify", a.falsify)?;
    let mut problems = Vec::new();

    let mut t = Table::new(["property", "models", "violations", "skipped", "worst_excess", "first_violation"]);
    for p in props {
        let rep = run_property(p, models, ctx.seed);
        if !rep.passed() {
            problems.push(format!("{}: {} violations in {} models", rep.name, rep.violations, rep.models));
        }
        t.push(vec![
            Value::from(rep.name),
            Value::from(rep.models),
            Value::from(rep.violations),
            Value::from(rep.skipped),
            num(rep.worst_excess),
            Value::from(rep.first_violation.unwrap_or_default()),
        ]);
    }
    ctx.out.table("verify-properties", &t)?;
    ctx.show("properties", &t.to_csv());

    let mut f = Table::new(["fixture", "violates", "failing", "p_improve", "pn_improve", "ok"]);
    for r in fixture_reports() {
        if !r.ok {
            problems.push(format!("fixture {} does not fail exactly {:?}", r.name, r.violates));
        }
        let failing: Vec<String> = r.failing.iter().map(|h| format!("{h:?}")).collect();
        f.push(vec![
            Value::from(r.name),
            Value::from(format!("{:?}", r.violates)),
            Value::from(failing.join(" ")),
            num(r.p_improve),
            num(r.pn_improve),
            Value::from(r.ok),
        ]);
    }
    ctx.out.table("verify-fixtures", &f)?;
    ctx.show("fixtures", &f.to_csv());

    if with_falsifier {
        let cfg = falsify_config(ctx, a.resolution, a.epsilon)?;
        let spec = CountsClassSpec::table5(&[1.0; 4]);
        let n = run_falsifier(ctx, &spec, &cfg, "verify-falsify")?;
        if n > 0 {
            problems.push(format!("falsifier found {n} violating weight vectors"));
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(CliError::Violation(problems.join("; ")))
    }
}

pub fn falsify(ctx: &mut Ctx, a: FalsifyArgs) -> Result<(), CliError> {
    let c = a.class;
    // The search supplies the weights; only the class shape matters.
    let spec = counts_specs(ctx, c.preset, c.counts, c.total, Some(c.weights.unwrap_or_else(|| "1".into())))?.remove(0);
    let mut cfg = falsify_config(ctx, a.resolution, a.epsilon)?;
    cfg.r_max = ctx.settings.get("r-max", a.r_max, cfg.r_max)?;
    cfg.improving_share = ctx.settings.get("share", a.share, cfg.improving_share)?;
    let n = run_falsifier(ctx, &spec, &cfg, "falsify")?;
    if n > 0 {
        Err(CliError::Violation(format!("{n} weight vectors give steps ≥ blind")))
    } else {
        Ok(())
    }
}
