//! Random knowledge bases and rule sets, and a brute-force closure that
//! shares no code with the rule engine.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use moira_core::fusion::{parse_rules, run_rules};
use moira_core::kernel::{
    Claim, Concept, KnowledgeBase, PropertyDef, PropertyId, PropertyRange, Provenance, SynonymTarget, Value,
};

pub const BASE: [&str; 4] = ["c0", "c1", "c2", "c3"];
pub const ROOT: &str = "entity";
pub const DERIVED: &str = "derived";
pub const LITERALS: [&str; 3] = ["a", "b", "c"];

/// Value property names, relation property names (with their style).
pub const VALUE_PROPS: [&str; 2] = ["p0", "p1"];
pub const REL_PROPS: [(&str, bool); 2] = [("r0", false), ("links to", true)];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Val {
    Lit(String),
    Inst(String),
}

#[derive(Debug, Clone)]
pub enum T {
    Var(&'static str),
    Lit(&'static str),
    /// `n_?x`
    Made(&'static str),
}

#[derive(Debug, Clone)]
pub enum P {
    IsA(T, &'static str),
    Has(T, &'static str, T),
}

#[derive(Debug, Clone)]
pub struct GenRule {
    pub name: String,
    pub priority: i32,
    pub conditions: Vec<P>,
    pub productions: Vec<P>,
}

fn term(t: &T) -> String {
    match t {
        T::Var(v) => format!("?{v}"),
        T::Lit(l) => format!("'{l}'"),
        T::Made(v) => format!("n_?{v}"),
    }
}

fn pattern(p: &P) -> String {
    match p {
        P::IsA(s, c) => format!("{} is a {c}", term(s)),
        P::Has(s, prop, o) if *prop == "links to" => format!("{} links to {}", term(s), term(o)),
        P::Has(s, prop, o) => format!("{} has {} as {prop}", term(s), term(o)),
    }
}

pub fn rules_text(rules: &[GenRule]) -> String {
    let mut out = String::new();
    for r in rules {
        out.push_str(&format!("rule {}\npriority {}\nif:\n", r.name, r.priority));
        for c in &r.conditions {
            out.push_str(&format!("  {}\n", pattern(c)));
        }
        out.push_str("then:\n");
        for p in &r.productions {
            out.push_str(&format!("  {}\n", pattern(p)));
        }
    }
    out
}

/// Random parent of each base concept; `ROOT` or an earlier base concept.
pub type Parents = BTreeMap<String, String>;

pub fn gen_parents(rng: &mut ChaCha8Rng) -> Parents {
    let mut parents = Parents::new();
    for (i, c) in BASE.iter().enumerate() {
        let p = if i == 0 || rng.gen_bool(0.5) { ROOT.to_string() } else { BASE[rng.gen_range(0..i)].to_string() };
        parents.insert(c.to_string(), p);
    }
    parents.insert(DERIVED.to_string(), ROOT.to_string());
    parents
}

pub fn ancestors_or_self(parents: &Parents, c: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::from([c.to_string()]);
    let mut cur = c.to_string();
    while let Some(p) = parents.get(&cur) {
        out.insert(p.clone());
        cur = p.clone();
    }
    out.insert(ROOT.to_string());
    out
}

pub fn model_kb(parents: &Parents) -> KnowledgeBase {
    let mut kb = KnowledgeBase::new();
    let mut concepts = vec![Concept::new(ROOT)];
    for (c, p) in parents {
        concepts.push(Concept::new(c).with_parent(p));
    }
    kb.add_concepts(concepts).unwrap();
    for p in VALUE_PROPS {
        kb.add_property(PropertyDef::has(ROOT, p, PropertyRange::Value)).unwrap();
    }
    for (p, verb) in REL_PROPS {
        let def = if verb {
            PropertyDef::verb(ROOT, p, ROOT)
        } else {
            PropertyDef::has(ROOT, p, PropertyRange::Concept(ROOT.into()))
        };
        kb.add_property(def).unwrap();
    }
    kb.add_property(PropertyDef::has(DERIVED, "origin", PropertyRange::Concept(ROOT.into()))).unwrap();
    kb
}

/// The starting facts, as the oracle sees them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct World {
    pub instances: BTreeMap<String, String>,
    pub isa: BTreeSet<(String, String)>,
    pub props: BTreeSet<(String, String, Val)>,
}

pub fn told(rng: &mut ChaCha8Rng) -> Provenance {
    let base = Utc.with_ymd_and_hms(2024, 5, 1, 0, 0, 0).unwrap();
    Provenance::Told {
        source: ["PC Jones", "Ann", "model"].choose(rng).unwrap().to_string(),
        conversation: rng.gen_bool(0.5).then(|| format!("c{}", rng.gen_range(1..9))),
        timestamp: base + Duration::seconds(rng.gen_range(0..86_400)),
    }
}

/// A knowledge base with up to `max_facts` facts over a few instances.
pub fn gen_world(rng: &mut ChaCha8Rng, parents: &Parents, max_facts: usize) -> (KnowledgeBase, World) {
    let mut kb = model_kb(parents);
    let mut world = World::default();
    let n = rng.gen_range(2..=6);
    for i in 0..n {
        let id = format!("i{i}");
        let c = *BASE.choose(rng).unwrap();
        kb.declare_instance(&id, c, told(rng)).unwrap();
        world.instances.insert(id, c.to_string());
    }
    let ids: Vec<String> = world.instances.keys().cloned().collect();
    let facts = rng.gen_range(0..=max_facts);
    for _ in 0..facts {
        let s = ids.choose(rng).unwrap().clone();
        match rng.gen_range(0..3) {
            0 => {
                let c = *BASE.choose(rng).unwrap();
                if kb.assert_fact(&s, Claim::IsA { concept: c.into() }, told(rng)).is_ok() {
                    world.isa.insert((s, c.into()));
                }
            }
            1 => {
                let p = *VALUE_PROPS.choose(rng).unwrap();
                let l = *LITERALS.choose(rng).unwrap();
                let property = PropertyId::new(ROOT, p, PropertyRange::Value);
                kb.assert_fact(&s, Claim::Property { property, value: Value::Literal(l.into()) }, told(rng)).unwrap();
                world.props.insert((s, p.into(), Val::Lit(l.into())));
            }
            _ => {
                let (p, _) = *REL_PROPS.choose(rng).unwrap();
                let o = ids.choose(rng).unwrap().clone();
                let property = PropertyId::new(ROOT, p, PropertyRange::Concept(ROOT.into()));
                kb.assert_fact(&s, Claim::Property { property, value: Value::Instance(o.clone()) }, told(rng)).unwrap();
                world.props.insert((s, p.into(), Val::Inst(o)));
            }
        }
    }
    (kb, world)
}

/// Up to `max_rules` rules whose productions always fit the model and
/// whose derived instances never feed back into any condition.
pub fn gen_rules(rng: &mut ChaCha8Rng, max_rules: usize) -> Vec<GenRule> {
    let n = rng.gen_range(1..=max_rules);
    (0..n)
        .map(|i| {
            let mut inst_vars: Vec<&'static str> = Vec::new();
            let mut lit_vars: Vec<&'static str> = Vec::new();
            let mut conditions = Vec::new();
            let pick_inst = |rng: &mut ChaCha8Rng, inst_vars: &mut Vec<&'static str>| {
                let v = *["x", "y", "z"].choose(rng).unwrap();
                if !inst_vars.contains(&v) {
                    inst_vars.push(v);
                }
                v
            };
            for _ in 0..rng.gen_range(1..=3) {
                let s = pick_inst(rng, &mut inst_vars);
                let cond = match rng.gen_range(0..4) {
                    0 => P::IsA(T::Var(s), BASE.choose(rng).unwrap()),
                    1 => {
                        let p = VALUE_PROPS.choose(rng).unwrap();
                        if rng.gen_bool(0.5) {
                            lit_vars.push("l");
                            P::Has(T::Var(s), p, T::Var("l"))
                        } else {
                            P::Has(T::Var(s), p, T::Lit(LITERALS.choose(rng).unwrap()))
                        }
                    }
                    _ => {
                        let (p, _) = REL_PROPS.choose(rng).unwrap();
                        let o = pick_inst(rng, &mut inst_vars);
                        P::Has(T::Var(s), p, T::Var(o))
                    }
                };
                conditions.push(cond);
            }
            let mut productions = Vec::new();
            for _ in 0..rng.gen_range(1..=2) {
                let s = *inst_vars.choose(rng).unwrap();
                let prod = match rng.gen_range(0..5) {
                    0 => P::IsA(T::Var(s), BASE.choose(rng).unwrap()),
                    1 if !lit_vars.is_empty() => P::Has(T::Var(s), VALUE_PROPS.choose(rng).unwrap(), T::Var("l")),
                    1 | 2 => P::Has(T::Var(s), VALUE_PROPS.choose(rng).unwrap(), T::Lit(LITERALS.choose(rng).unwrap())),
                    3 => {
                        let o = *inst_vars.choose(rng).unwrap();
                        P::Has(T::Var(s), REL_PROPS.choose(rng).unwrap().0, T::Var(o))
                    }
                    _ => {
                        productions.push(P::IsA(T::Made(s), DERIVED));
                        P::Has(T::Made(s), "origin", T::Var(s))
                    }
                };
                productions.push(prod);
            }
            GenRule {
                name: format!("rule {i}"),
                priority: rng.gen_range(0..3),
                conditions,
                productions,
            }
        })
        .collect()
}

fn vars_of(rule: &GenRule) -> (Vec<&'static str>, Vec<&'static str>) {
    let mut inst = Vec::new();
    let mut lit = Vec::new();
    for c in &rule.conditions {
        let (s, o, is_value) = match c {
            P::IsA(s, _) => (s, None, false),
            P::Has(s, p, o) => (s, Some(o), VALUE_PROPS.contains(p)),
        };
        if let T::Var(v) = s {
            if !inst.contains(v) {
                inst.push(*v);
            }
        }
        if let Some(T::Var(v)) = o {
            let list = if is_value { &mut lit } else { &mut inst };
            if !list.contains(v) {
                list.push(*v);
            }
        }
    }
    (inst, lit)
}

fn types(world: &World, parents: &Parents, x: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    if let Some(c) = world.instances.get(x) {
        out.extend(ancestors_or_self(parents, c));
    }
    for (s, c) in &world.isa {
        if s == x {
            out.extend(ancestors_or_self(parents, c));
        }
    }
    out
}

fn value(t: &T, env: &BTreeMap<&str, Val>) -> Val {
    match t {
        T::Var(v) => env[v].clone(),
        T::Lit(l) => Val::Lit(l.to_string()),
        T::Made(v) => match &env[v] {
            Val::Inst(i) => Val::Inst(format!("n_{i}")),
            Val::Lit(l) => Val::Inst(format!("n_{l}")),
        },
    }
}

fn holds(world: &World, parents: &Parents, p: &P, env: &BTreeMap<&str, Val>) -> bool {
    match p {
        P::IsA(s, c) => match value(s, env) {
            Val::Inst(x) => types(world, parents, &x).contains(*c),
            Val::Lit(_) => false,
        },
        P::Has(s, prop, o) => match value(s, env) {
            Val::Inst(x) => world.props.contains(&(x, prop.to_string(), value(o, env))),
            Val::Lit(_) => false,
        },
    }
}

/// Applies rules by trying every assignment of every variable until nothing
/// changes.
pub fn brute_force_closure(start: &World, parents: &Parents, rules: &[GenRule]) -> World {
    let mut world = start.clone();
    loop {
        let before = world.clone();
        for rule in rules {
            let (inst_vars, lit_vars) = vars_of(rule);
            let insts: Vec<String> = world.instances.keys().cloned().collect();
            let mut envs: Vec<BTreeMap<&str, Val>> = vec![BTreeMap::new()];
            for v in &inst_vars {
                envs = envs
                    .into_iter()
                    .flat_map(|e| insts.iter().map(move |i| (e.clone(), i.clone())))
                    .map(|(mut e, i)| {
                        e.insert(*v, Val::Inst(i));
                        e
                    })
                    .collect();
            }
            for v in &lit_vars {
                envs = envs
                    .into_iter()
                    .flat_map(|e| LITERALS.iter().map(move |l| (e.clone(), *l)))
                    .map(|(mut e, l)| {
                        e.insert(*v, Val::Lit(l.to_string()));
                        e
                    })
                    .collect();
            }
            for env in envs {
                if !rule.conditions.iter().all(|c| holds(&world, parents, c, &env)) {
                    continue;
                }
                for p in &rule.productions {
                    match p {
                        P::IsA(s, c) => {
                            let Val::Inst(x) = value(s, &env) else { continue };
                            if !world.instances.contains_key(&x) {
                                world.instances.insert(x, c.to_string());
                            } else if !types(&world, parents, &x).contains(*c) {
                                world.isa.insert((x, c.to_string()));
                            }
                        }
                        P::Has(s, prop, o) => {
                            let Val::Inst(x) = value(s, &env) else { continue };
                            world.props.insert((x, prop.to_string(), value(o, &env)));
                        }
                    }
                }
            }
        }
        if world == before {
            return world;
        }
    }
}

/// What the closure entails: every instance with all of its types, and
/// every property triple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entailed {
    pub types: BTreeMap<String, BTreeSet<String>>,
    pub props: BTreeSet<(String, String, Val)>,
}

pub fn entailed_world(world: &World, parents: &Parents) -> Entailed {
    Entailed {
        types: world.instances.keys().map(|x| (x.clone(), types(world, parents, x))).collect(),
        props: world.props.clone(),
    }
}

pub fn entailed_kb(kb: &KnowledgeBase, parents: &Parents) -> Entailed {
    let all: Vec<String> = std::iter::once(ROOT.to_string()).chain(parents.keys().cloned()).collect();
    let types = kb
        .instances()
        .map(|i| (i.id.clone(), all.iter().filter(|c| kb.is_a(&i.id, c)).cloned().collect()))
        .collect();
    let props = kb
        .facts()
        .iter()
        .filter_map(|f| match &f.claim {
            Claim::Property { property, value } => Some((
                f.subject.clone(),
                property.name.clone(),
                match value {
                    Value::Literal(l) => Val::Lit(l.clone()),
                    Value::Instance(i) => Val::Inst(i.clone()),
                },
            )),
            Claim::IsA { .. } => None,
        })
        .collect();
    Entailed { types, props }
}

/// The same rules in another order, with priorities following the new
/// order so the engine really evaluates them differently.
pub fn permuted(rng: &mut ChaCha8Rng, rules: &[GenRule]) -> Vec<GenRule> {
    let mut out = rules.to_vec();
    out.shuffle(rng);
    let n = out.len() as i32;
    for (i, r) in out.iter_mut().enumerate() {
        r.priority = n - i as i32;
    }
    out
}

/// Labels, descriptions, synonyms and counters on top of a generated KB,
/// for persistence.
pub fn decorate(rng: &mut ChaCha8Rng, kb: &mut KnowledgeBase) {
    let ids: Vec<String> = kb.instances().map(|i| i.id.clone()).collect();
    for id in &ids {
        if rng.gen_bool(0.3) {
            let label = ["John Smith", "it's 'quoted'", "Ünïcode name", "back\\slash"].choose(rng).unwrap();
            kb.set_label(id, label).unwrap();
        }
        if rng.gen_bool(0.2) {
            kb.set_description(id, "seen near the bridge").unwrap();
        }
    }
    if rng.gen_bool(0.5) {
        kb.add_synonym("thingy", SynonymTarget::Concept("c1".into())).unwrap();
    }
    if let Some(id) = ids.first() {
        if rng.gen_bool(0.5) {
            kb.add_synonym("the first one", SynonymTarget::Instance(id.clone())).unwrap();
        }
    }
    if rng.gen_bool(0.5) {
        let p = PropertyId::new(ROOT, "p0", PropertyRange::Value);
        kb.add_synonym("colour code", SynonymTarget::Property(p)).unwrap();
    }
    if rng.gen_bool(0.3) {
        kb.bump_counter("i", rng.gen_range(0..50));
    }
}

/// A generated KB with told and inferred content.
pub fn generated(seed: u64) -> KnowledgeBase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parents = gen_parents(&mut rng);
    let (mut kb, _) = gen_world(&mut rng, &parents, 20);
    let rules = parse_rules(&rules_text(&gen_rules(&mut rng, 5))).unwrap();
    run_rules(&mut kb, &rules).unwrap();
    decorate(&mut rng, &mut kb);
    kb
}
