use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use weil_core::dualpair::{compare_models, verify_invariance_on, DualPairConfig, DualPairCtx};
use weil_core::report::Check;
use weil_core::slstar::{
    isometry_group_order, split_orthogonal_order, verify_presentation as presentation, Census, GroupCtx,
    PresentationConfig,
};
use weil_core::unidecomp::{decompose as run_decompose, DecomposeConfig};
use weil_core::weildata::{classify_quadratic_form, verify_data_conditions, DatumCheckConfig, WeilDatum};
use weil_core::weilrep::{float_mirror, psi_equivalence, verify_representation, RepCheckConfig, WeilRep};
use weil_core::FieldCtx;

use crate::cache::Cache;
use crate::{Backend, RunConfig};

/// A finished command: the canonical JSON value plus optional CSV tables.
pub struct Output {
    pub value: serde_json::Value,
    pub passed: bool,
    pub csv: Option<String>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'static str,
    config: &'a RunConfig,
    passed: bool,
    report: T,
    notes: Vec<String>,
}

fn finish<T: Serialize>(command: &'static str, cfg: &RunConfig, passed: bool, report: T, notes: Vec<String>) -> anyhow::Result<Output> {
    let value = serde_json::to_value(Envelope { command, config: cfg, passed, report, notes })?;
    Ok(Output { value, passed, csv: None })
}

fn presentation_cfg(cfg: &RunConfig) -> PresentationConfig {
    PresentationConfig { exhaustive_limit: cfg.exhaustive_limit, samples: cfg.samples, seed: cfg.seed }
}

fn rep_cfg(cfg: &RunConfig) -> RepCheckConfig {
    RepCheckConfig { census: presentation_cfg(cfg), product_pairs: cfg.pairs, seed: cfg.seed, ..RepCheckConfig::default() }
}

fn exact_only(cfg: &RunConfig, notes: &mut Vec<String>) {
    if cfg.backend == Backend::Float {
        notes.push("this command is exact-only; the float backend is ignored".into());
    }
}

#[derive(Serialize)]
struct GroupOrder {
    /// Closure of the Bruhat generators.
    bruhat_closure: usize,
    /// Closure after adjoining a reflection.
    isometry_group: u128,
    formula: u128,
    passed: bool,
}

#[derive(Serialize)]
struct PresentationOutput {
    presentation: weil_core::slstar::PresentationReport,
    group_order: Option<GroupOrder>,
}

pub fn verify_presentation(cfg: &RunConfig, cache: &Cache) -> anyhow::Result<Output> {
    let mut notes = Vec::new();
    exact_only(cfg, &mut notes);
    let ctx = GroupCtx::orthogonal(FieldCtx::new(cfg.q)?, cfg.n)?;
    let pres = presentation(&ctx, &presentation_cfg(cfg))?;
    let formula = split_orthogonal_order(cfg.q as u64, cfg.n);
    let group_order = if formula / 2 <= cfg.budget as u128 {
        let table = cache.group_table(&ctx, cfg.budget)?;
        let full = isometry_group_order(&table)?;
        Some(GroupOrder { bruhat_closure: table.order(), isometry_group: full, formula, passed: full == formula })
    } else {
        notes.push(format!("group enumeration skipped: |O(2n,2n)| / 2 = {} exceeds the budget", formula / 2));
        None
    };
    let passed = pres.all_passed() && group_order.as_ref().map_or(true, |g| g.passed);
    finish("verify-presentation", cfg, passed, PresentationOutput { presentation: pres, group_order }, notes)
}

#[derive(Serialize)]
struct PsiIndependence {
    lambda: i64,
    other_lambda: i64,
    check: Check,
}

#[derive(Serialize)]
struct BuildRepOutput {
    datum: weil_core::weildata::DatumReport,
    quadratic_forms: Vec<weil_core::weildata::QuadraticFormReport>,
    representation: Option<weil_core::weilrep::RepReport>,
    psi_independence: Option<PsiIndependence>,
    float_mirror: Option<weil_core::weilrep::FloatMirrorReport>,
}

/// Datum conditions with more instances than this are sampled.
const DATUM_EXHAUSTIVE: u64 = 1_000_000_000;

/// Quadratic forms classified when the admissible set is only sampled.
const SAMPLED_FORMS: usize = 4;

pub fn build_rep(cfg: &RunConfig, cache: &Cache) -> anyhow::Result<Output> {
    let mut notes = Vec::new();
    let d = WeilDatum::standard(cfg.q, cfg.n, cfg.lambda)?;
    let dcfg = DatumCheckConfig {
        exhaustive_limit: DATUM_EXHAUSTIVE,
        seed: cfg.seed,
        census: presentation_cfg(cfg),
        ..DatumCheckConfig::default()
    };
    let datum = verify_data_conditions(&d, &dcfg)?;
    let census = Census::build(d.group(), &dcfg.census)?;
    let take = if census.units_exhaustive { census.admissible.len() } else { SAMPLED_FORMS };
    let quadratic_forms = census
        .admissible
        .iter()
        .take(take)
        .map(|u| classify_quadratic_form(&d, u))
        .collect::<weil_core::Result<Vec<_>>>()?;
    let forms_ok = quadratic_forms.iter().all(|f| f.nondegenerate && f.split)
        && quadratic_forms.windows(2).all(|w| w[0].zero_count == w[1].zero_count);

    let (mut representation, mut psi_independence, mut mirror) = (None, None, None);
    if cfg.n == 1 {
        let rep = WeilRep::new(d.clone())?;
        let rcfg = rep_cfg(cfg);
        let order = split_orthogonal_order(cfg.q as u64, cfg.n) / 2;
        let table = if order <= cfg.budget as u128 {
            Some(cache.group_table(d.group(), cfg.budget)?)
        } else {
            notes.push("group too large to enumerate: rho(g)rho(h) = rho(gh) skipped".into());
            None
        };
        representation = Some(verify_representation(&rep, table.as_ref(), &rcfg)?);
        let other = (2 * cfg.lambda).rem_euclid(cfg.q as i64);
        let (_, check) = psi_equivalence(&rep, &rep.with_twist(other)?, &rcfg)?;
        psi_independence = Some(PsiIndependence { lambda: cfg.lambda, other_lambda: other, check });
        if cfg.backend == Backend::Float {
            mirror = Some(float_mirror(&rep, &rcfg)?);
        }
    } else {
        notes.push(format!(
            "operator materialization skipped: dim L^2(M) = {}^{} is beyond desk scale; generator-level checks only",
            cfg.q,
            4 * cfg.n
        ));
        exact_only(cfg, &mut notes);
    }
    let passed = datum.all_passed()
        && forms_ok
        && representation.as_ref().map_or(true, |r| r.all_passed())
        && psi_independence.as_ref().map_or(true, |p| p.check.passed);
    let out = BuildRepOutput { datum, quadratic_forms, representation, psi_independence, float_mirror: mirror };
    finish("build-rep", cfg, passed, out, notes)
}

pub fn decompose(cfg: &RunConfig, _cache: &Cache) -> anyhow::Result<Output> {
    let mut notes = Vec::new();
    exact_only(cfg, &mut notes);
    let rep = WeilRep::new(WeilDatum::standard(cfg.q, cfg.n, cfg.lambda)?)?;
    let dcfg = DecomposeConfig { census: presentation_cfg(cfg), rep: rep_cfg(cfg), seed: cfg.seed, ..DecomposeConfig::default() };
    let d = run_decompose(&rep, &dcfg)?;
    let passed = d.report.all_passed();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["irrep", "dim", "multiplicity", "projector_rank", "hom_dim"])?;
    for c in &d.report.components {
        w.write_record([
            c.index.to_string(),
            c.dim.to_string(),
            c.multiplicity.to_string(),
            c.projector_rank.clone().unwrap_or_default(),
            c.hom_dim.map(|h| h.to_string()).unwrap_or_default(),
        ])?;
    }
    let mut tables = String::from_utf8(w.into_inner()?)?;
    tables.push('\n');
    tables.push_str(&d.table.to_csv());
    let mut out = finish("decompose", cfg, passed, &d.report, notes)?;
    out.csv = Some(tables);
    Ok(out)
}

pub fn dual_pair(cfg: &RunConfig, cache: &Cache) -> anyhow::Result<Output> {
    let mut notes = Vec::new();
    exact_only(cfg, &mut notes);
    let rep = WeilRep::new(WeilDatum::standard(cfg.q, cfg.n, cfg.lambda)?)?;
    let dcfg = DualPairConfig {
        decompose: DecomposeConfig { census: presentation_cfg(cfg), seed: cfg.seed, ..DecomposeConfig::default() },
        seed: cfg.seed,
        ..DualPairConfig::default()
    };
    let mut report = compare_models(&rep, &dcfg)?;
    if cache.enabled() {
        let table = cache.group_table(rep.datum().group(), cfg.budget)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let elements: Vec<_> =
            (0..dcfg.invariance_samples).map(|_| table.matrix(rng.gen_range(0..table.order()))).collect();
        let ctx = DualPairCtx::new(rep.datum().field(), cfg.n)?;
        report.form.push(verify_invariance_on(&ctx, &elements, cfg.seed)?);
    }
    let passed = report.all_passed();
    finish("dual-pair", cfg, passed, report, notes)
}
