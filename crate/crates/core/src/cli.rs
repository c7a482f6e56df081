//! Batch front end: `double-metrics <subcommand> [--input F] [--input2 F] [--out F] ...`.
//!
//! Exit codes: 0 when every checklist item passes, 1 when an invariant
//! fails, 2 for an unknown subcommand, 3 for malformed input.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::{compose, idempotent_defect, sandwich_check, star};
use crate::coarse::{coarse_equivalent, distortion_profile, profile_csv, EquivalenceConfig};
use crate::error::{Error, Result};
use crate::euclid::{chi_euclid, euclid_round_trip, psi_euclid, rotation_fixture, PartialIsometry, PolarGrid, PsiEuclidConfig};
use crate::io::{self, decimal_opt, format_decimal, CrossDoc, FamilyDoc, GridDoc, IsometryDoc, SpaceDoc, SphiDoc, TreeDoc};
use crate::matrix::SquareMatrix;
use crate::metric::{cross_violations, metric_violations, same_space, subset_metric, CrossMetric, FiniteMetricSpace, ScaleFamily, SubsetSpec};
use crate::rays::{strata_csv, RayConfig};
use crate::sphi::{check_inverse_axioms, closure_holds, enumerate_sphi, homomorphism_holds, PartialBijection, PartialBijectionDoc, PbSemigroup, PhiSet};
use crate::tree::{chi_tree, inner_lemma_defects, psi_tree, tree_round_trip, ChiConfig, PrefixMap, PsiConfig, RootedTree};
use crate::{fixtures, random};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_MALFORMED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "double-metrics", version, about = "Compatible metrics on the double of a metric space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct Options {
    /// Primary input file.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Secondary input file.
    #[arg(long, global = true)]
    pub input2: Option<PathBuf>,
    /// Report path; CSV and JSON artifacts are written next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON config with tolerances and thresholds.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for generated fixtures when inputs are omitted.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Tree truncation depth.
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Grid radius.
    #[arg(long, global = true)]
    pub rmax: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check metric and cross-metric invariants.
    Validate,
    /// Min-plus composition of two cross metrics.
    Compose,
    /// Pseudoinverse (transpose).
    Star,
    /// Idempotent defect and the sandwich inequality.
    Idempotent,
    /// Gluing along a subset.
    SubsetMetric,
    /// Distortion profiles between two scale families.
    Profile,
    /// Coarse equivalence verdict between two scale families.
    Equivalence,
    /// Enumerate S_Phi inside PB(X_n).
    SphiEnumerate,
    /// Cross metric of a prefix map on a tree.
    TreeChi,
    /// Recover a boundary map from a cross metric on a tree.
    TreePsi,
    /// Prefix map to cross metric and back.
    TreeRoundtrip,
    /// Cross metric of a partial isometry on a polar grid.
    EuclidChi,
    /// Recover a partial isometry from a cross metric on a grid.
    EuclidPsi,
    /// Partial isometry to cross metric and back.
    EuclidRoundtrip,
    /// Boundary maps realizable on the half-line and the line.
    CorollaryCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Compose => "compose",
            Command::Star => "star",
            Command::Idempotent => "idempotent",
            Command::SubsetMetric => "subset-metric",
            Command::Profile => "profile",
            Command::Equivalence => "equivalence",
            Command::SphiEnumerate => "sphi-enumerate",
            Command::TreeChi => "tree-chi",
            Command::TreePsi => "tree-psi",
            Command::TreeRoundtrip => "tree-roundtrip",
            Command::EuclidChi => "euclid-chi",
            Command::EuclidPsi => "euclid-psi",
            Command::EuclidRoundtrip => "euclid-roundtrip",
            Command::CorollaryCheck => "corollary-check",
        }
    }
}

/// Optional overrides; flags win over the file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    #[serde(default, with = "decimal_opt")]
    pub divergence_bound: Option<f64>,
    pub window: Option<usize>,
    #[serde(default, with = "decimal_opt")]
    pub snap_tol: Option<f64>,
    #[serde(default, with = "decimal_opt")]
    pub angular_tol: Option<f64>,
    #[serde(default, with = "opt_vec")]
    pub thresholds: Option<Vec<f64>>,
    #[serde(default, with = "decimal_opt")]
    pub tail_fraction: Option<f64>,
    #[serde(default, with = "decimal_opt")]
    pub basepoint_gap: Option<f64>,
    pub depth: Option<usize>,
    #[serde(default, with = "decimal_opt")]
    pub rmax: Option<f64>,
    pub seed: Option<u64>,
}

mod opt_vec {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<Vec<f64>>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => crate::io::decimal_vec::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<f64>>, D::Error> {
        #[derive(Deserialize)]
        struct W(#[serde(with = "crate::io::decimal_vec")] Vec<f64>);
        Ok(Option::<W>::deserialize(d)?.map(|w| w.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub subcommand: String,
    pub inputs_digest: String,
    pub results: Value,
    pub checklist: Vec<Check>,
    pub duration_ms: u64,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checklist.iter().all(|c| c.pass)
    }
}

/// A report plus extra files, keyed by the suffix appended to the report stem.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: RunReport,
    pub artifacts: Vec<(String, String)>,
}

struct Ctx {
    opts: Options,
    config: ConfigDoc,
    checks: Vec<Check>,
    artifacts: Vec<(String, String)>,
}

impl Ctx {
    fn check(&mut self, name: &str, pass: bool) {
        self.checks.push(Check {
            name: name.to_string(),
            pass,
        });
    }

    fn seed(&self) -> u64 {
        self.opts.seed.or(self.config.seed).unwrap_or(0)
    }

    fn depth(&self, default: usize) -> usize {
        self.opts.depth.or(self.config.depth).unwrap_or(default)
    }

    fn rmax(&self) -> f64 {
        self.opts.rmax.or(self.config.rmax).unwrap_or(1000.0)
    }

    fn ray_config(&self) -> RayConfig {
        let d = RayConfig::default();
        RayConfig {
            tail_fraction: self.config.tail_fraction.unwrap_or(d.tail_fraction),
            window: self.config.window.unwrap_or(d.window),
            divergence_bound: self.config.divergence_bound,
        }
    }

    fn equivalence_config(&self) -> EquivalenceConfig {
        let d = EquivalenceConfig::default();
        EquivalenceConfig {
            thresholds: self.config.thresholds.clone().unwrap_or(d.thresholds),
            divergence_bound: self.config.divergence_bound.unwrap_or(d.divergence_bound),
            window: self.config.window.unwrap_or(d.window),
        }
    }

    /// Cross metric from `--input` (or `--input2`), else a seeded random one.
    fn cross(&self, second: bool) -> Result<CrossMetric> {
        let path = if second { &self.opts.input2 } else { &self.opts.input };
        match path {
            Some(p) => io::read_cross(p),
            None => {
                let mut rng = random::rng(self.seed());
                let space = Arc::new(random::random_space(&mut rng, 5));
                let mut r = random::random_cross(&mut rng, &space);
                if second {
                    r = random::random_cross(&mut rng, &space);
                }
                Ok(r)
            }
        }
    }

    fn tree(&self) -> Result<RootedTree> {
        match &self.opts.input {
            Some(p) => io::read_json::<TreeDoc>(p)?.to_tree(),
            None => RootedTree::regular(2, self.depth(6)),
        }
    }

    fn prefix_map(&self) -> Result<PrefixMap> {
        match &self.opts.input2 {
            Some(p) => {
                let m: PrefixMap = io::read_json(p)?;
                PrefixMap::new(m.pairs)
            }
            None => Ok(fixtures::binary_swap()),
        }
    }

    fn grid_and_isometry(&self) -> Result<(PolarGrid, PartialIsometry)> {
        let grid = match &self.opts.input {
            Some(p) => Some(PolarGrid::from_doc(&io::read_json::<GridDoc>(p)?)?),
            None => None,
        };
        let pi = match &self.opts.input2 {
            Some(p) => Some(PartialIsometry::from_doc(&io::read_json::<IsometryDoc>(p)?)?),
            None => None,
        };
        let (fg, fp) = rotation_fixture(90.0, PolarGrid::default_radii(self.rmax()))?;
        Ok((grid.unwrap_or(fg), pi.unwrap_or(fp)))
    }

    fn snap_tol(&self) -> f64 {
        self.config.snap_tol.unwrap_or(crate::euclid::SNAP_TOL)
    }

    fn psi_euclid_config(&self) -> PsiEuclidConfig {
        PsiEuclidConfig {
            rays: self.ray_config(),
            angular_tol: self.config.angular_tol.unwrap_or(crate::euclid::ANGULAR_TOL),
        }
    }

    /// Cross metric written as `<stem>.cross.json` referencing `<stem>.space.json`.
    fn emit_cross(&mut self, rho: &CrossMetric) -> Result<Value> {
        let stem = self
            .opts
            .out
            .as_deref()
            .and_then(Path::file_stem)
            .map_or_else(|| "result".to_string(), |s| s.to_string_lossy().into_owned());
        let space_name = format!("{stem}.space.json");
        let doc = CrossDoc::new(space_name, rho);
        self.artifacts
            .push((".space.json".into(), serde_json::to_string_pretty(&SpaceDoc::from(&**rho.space()))?));
        self.artifacts.push((".cross.json".into(), serde_json::to_string_pretty(&doc)?));
        Ok(serde_json::to_value(doc)?)
    }
}

/// Cross metric from `path` re-attached to `space` when the two spaces agree.
fn cross_on(space: &Arc<crate::metric::FiniteMetricSpace>, path: &Path) -> Result<CrossMetric> {
    let rho = io::read_cross(path)?;
    if !same_space(rho.space(), space) {
        return Err(Error::SpaceMismatch);
    }
    crate::metric::validate_cross(space.clone(), rho.cross().clone(), rho.min_gap())
}

fn families(ctx: &Ctx) -> Result<(ScaleFamily, ScaleFamily)> {
    match (&ctx.opts.input, &ctx.opts.input2) {
        (Some(a), Some(b)) => Ok((io::read_json::<FamilyDoc>(a)?.to_family()?, io::read_json::<FamilyDoc>(b)?.to_family()?)),
        (Some(a), None) => {
            let f = io::read_json::<FamilyDoc>(a)?.to_family()?;
            Ok((f.clone(), f))
        }
        _ => {
            let g = fixtures::powers_pair(ctx.depth(9) as u32)?;
            Ok((g.first, g.second))
        }
    }
}

fn pb_doc(p: &PartialBijection) -> PartialBijectionDoc {
    PartialBijectionDoc::from(p)
}

fn sphi_input(ctx: &Ctx) -> Result<(PbSemigroup, PhiSet<PartialBijection>)> {
    match &ctx.opts.input {
        Some(p) => {
            let doc: SphiDoc = io::read_json(p)?;
            let sg = crate::sphi::pb_semigroup(doc.n)?;
            let members = doc.phi.iter().map(PartialBijection::try_from).collect::<Result<Vec<_>>>()?;
            if members.iter().any(|m| m.universe() != doc.n) {
                return Err(Error::Semigroup(format!("Phi members must act on {} points", doc.n)));
            }
            let phi = PhiSet::new(&sg, members)?;
            Ok((sg, phi))
        }
        None => fixtures::two_blocks(),
    }
}

fn dispatch(cmd: Command, ctx: &mut Ctx) -> Result<Value> {
    match cmd {
        Command::Validate => validate(ctx),
        Command::Compose => {
            let rho = ctx.cross(false)?;
            let sigma = match &ctx.opts.input2 {
                Some(p) => cross_on(rho.space(), p)?,
                None => rho.clone(),
            };
            let out = compose(&rho, &sigma)?;
            ctx.check("result is a cross metric", out.revalidate().is_ok());
            Ok(json!({ "cross": ctx.emit_cross(&out)? }))
        }
        Command::Star => {
            let rho = ctx.cross(false)?;
            let out = star(&rho);
            ctx.check("star is an involution", star(&out) == rho);
            ctx.check("result is a cross metric", out.revalidate().is_ok());
            Ok(json!({ "cross": ctx.emit_cross(&out)? }))
        }
        Command::Idempotent => {
            let rho = ctx.cross(false)?;
            let defect = idempotent_defect(&rho);
            ctx.check("sandwich inequality", sandwich_check(&rho));
            Ok(json!({ "idempotent_defect": defect, "exact_idempotent": defect == 0.0 }))
        }
        Command::SubsetMetric => {
            let space = match &ctx.opts.input {
                Some(p) => Arc::new(io::read_json::<SpaceDoc>(p)?.to_space()?),
                None => Arc::new(fixtures::p3()),
            };
            let subset = match &ctx.opts.input2 {
                Some(p) => SubsetSpec::from_labels(&space, &io::read_json::<Vec<String>>(p)?)?,
                None => SubsetSpec::new([space.basepoint()]),
            };
            let rho = subset_metric(&space, &subset)?;
            let defect = idempotent_defect(&rho);
            ctx.check("result is a cross metric", rho.revalidate().is_ok());
            ctx.check("idempotent defect is zero", defect == 0.0);
            ctx.check("sandwich inequality", sandwich_check(&rho));
            Ok(json!({ "cross": ctx.emit_cross(&rho)?, "idempotent_defect": defect }))
        }
        Command::Profile => {
            let (a, b) = families(ctx)?;
            let cfg = ctx.equivalence_config();
            let fwd = distortion_profile(&a, &b, &cfg.thresholds)?;
            let bwd = distortion_profile(&b, &a, &cfg.thresholds)?;
            ctx.check("profiles are monotone", fwd.is_monotone() && bwd.is_monotone());
            ctx.artifacts.push((".profile.csv".into(), profile_csv(&fwd, &bwd)));
            Ok(json!({ "forward": fwd, "backward": bwd }))
        }
        Command::Equivalence => {
            let (a, b) = families(ctx)?;
            let v = coarse_equivalent(&a, &b, &ctx.equivalence_config())?;
            let (fwd, bwd) = (v.forward.as_ref().unwrap(), v.backward.as_ref().unwrap());
            ctx.check("profiles are monotone", fwd.is_monotone() && bwd.is_monotone());
            ctx.artifacts.push((".profile.csv".into(), profile_csv(fwd, bwd)));
            Ok(serde_json::to_value(&v)?)
        }
        Command::SphiEnumerate => {
            let (sg, phi) = sphi_input(ctx)?;
            let en = enumerate_sphi(&sg, &phi);
            ctx.check("inverse semigroup axioms", check_inverse_axioms(&sg).all());
            ctx.check("certificates are unique", en.targets_unique());
            ctx.check("closed under product and star", closure_holds(&sg, &phi, &en));
            ctx.check("alpha is a homomorphism", homomorphism_holds(&sg, &phi, &en));
            let elements: Vec<Value> = en
                .elements
                .iter()
                .map(|e| json!({ "element": pb_doc(&e.element), "alpha": pb_doc(&e.alpha), "certificate": e.certificate }))
                .collect();
            let classes: Vec<Value> = en
                .classes
                .iter()
                .map(|(a, members)| json!({ "alpha": pb_doc(a), "size": members.len() }))
                .collect();
            Ok(json!({
                "element_count": en.element_count(),
                "class_count": en.class_count(),
                "classes": classes,
                "elements": elements,
            }))
        }
        Command::TreeChi => {
            let tree = ctx.tree()?;
            let map = ctx.prefix_map()?;
            let chi = ChiConfig {
                basepoint_gap: ctx.config.basepoint_gap.unwrap_or(1.0),
            };
            let rho = chi_tree(&tree, &map, &chi)?;
            let defects = inner_lemma_defects(&tree, &map)?;
            ctx.check("inner bound 2C per stratum", defects.iter().all(|(w, b)| w <= b));
            Ok(json!({ "cross": ctx.emit_cross(&rho.metric)?, "map": map, "inner_defects": defects }))
        }
        Command::TreePsi => {
            let tree = ctx.tree()?;
            let rho = match &ctx.opts.input2 {
                Some(p) => cross_on(tree.space(), p)?,
                None => chi_tree(&tree, &fixtures::binary_swap(), &ChiConfig::default())?.metric,
            };
            let psi = PsiConfig {
                rays: ctx.ray_config(),
                stages: None,
            };
            let (rec, st) = psi_tree(&tree, &rho, &psi)?;
            ctx.check("strata are nested", st.is_nested());
            ctx.check("recovered map is injective", rec.is_injective());
            ctx.artifacts.push((".strata.csv".into(), strata_csv(&st)));
            Ok(serde_json::to_value(&rec)?)
        }
        Command::TreeRoundtrip => {
            let tree = ctx.tree()?;
            let map = ctx.prefix_map()?;
            let chi = ChiConfig {
                basepoint_gap: ctx.config.basepoint_gap.unwrap_or(1.0),
            };
            let psi = PsiConfig {
                rays: ctx.ray_config(),
                stages: None,
            };
            let rt = tree_round_trip(&tree, &map, &chi, &psi)?;
            let defects = inner_lemma_defects(&tree, &map)?;
            ctx.check("recovered = input", rt.matches);
            ctx.check("inner bound 2C per stratum", defects.iter().all(|(w, b)| w <= b));
            Ok(json!({
                "recovered = input": rt.matches,
                "resolvable": map.resolvable_at(tree.depth()),
                "round_trip": rt,
                "inner_defects": defects
            }))
        }
        Command::EuclidChi => {
            let (grid, pi) = ctx.grid_and_isometry()?;
            let rho = chi_euclid(&grid, &pi, ctx.snap_tol())?;
            ctx.check("result is a cross metric", rho.revalidate().is_ok());
            Ok(json!({ "cross": ctx.emit_cross(&rho)? }))
        }
        Command::EuclidPsi => {
            let (grid, pi) = ctx.grid_and_isometry()?;
            let rho = match &ctx.opts.input2 {
                Some(p) => cross_on(grid.space(), p)?,
                None => chi_euclid(&grid, &pi, ctx.snap_tol())?,
            };
            let (rec, st) = psi_euclid(&grid, &rho, &ctx.psi_euclid_config())?;
            ctx.check("orthogonal fit within tolerance", rec.status != crate::euclid::FitStatus::Nonconforming);
            ctx.artifacts.push((".strata.csv".into(), strata_csv(&st)));
            Ok(serde_json::to_value(&rec)?)
        }
        Command::EuclidRoundtrip => {
            let (grid, pi) = ctx.grid_and_isometry()?;
            let rt = euclid_round_trip(&grid, &pi, &ctx.psi_euclid_config())?;
            ctx.check("recovered domain = A", rt.domain_matches);
            ctx.check("recovered u within angular tolerance", rt.max_angle_error <= ctx.psi_euclid_config().angular_tol);
            Ok(serde_json::to_value(&rt)?)
        }
        Command::CorollaryCheck => {
            let rep = crate::tree::corollary_check(ctx.depth(6))?;
            ctx.check("half-line: only zero and unit", rep.zero_and_unit);
            ctx.check("line: all seven partial bijections", rep.all_seven);
            ctx.check("round trips exact", rep.half_line.round_trips_exact && rep.line.round_trips_exact);
            Ok(serde_json::to_value(&rep)?)
        }
    }
}

/// A space file or a cross file, checked without rejecting on the first failure.
fn validate(ctx: &mut Ctx) -> Result<Value> {
    let Some(path) = ctx.opts.input.clone() else {
        let rho = ctx.cross(false)?;
        ctx.check("metric axioms", metric_violations(rho.space().dist()).is_empty());
        ctx.check("cross metric invariants", rho.revalidate().is_ok());
        return Ok(json!({ "kind": "cross", "points": rho.dim(), "violations": [] }));
    };
    let raw: Value = io::read_json(&path)?;
    if raw.get("cross").is_some() {
        let doc: CrossDoc = serde_json::from_value(raw)?;
        let space_path = path.parent().unwrap_or(Path::new(".")).join(&doc.space_ref);
        let sdoc: SpaceDoc = io::read_json(&space_path)?;
        let dist = SquareMatrix::from_rows(sdoc.dist.clone())?;
        let mv = metric_violations(&dist);
        ctx.check("metric axioms", mv.is_empty());
        let cross = SquareMatrix::from_rows(doc.cross.clone())?;
        if cross.dim() != dist.dim() {
            return Err(Error::Dimension {
                expected: dist.dim(),
                got: cross.dim(),
            });
        }
        let space = FiniteMetricSpace::new_unchecked(sdoc.points.clone(), dist, 0);
        let cv = cross_violations(&space, &cross, doc.min_gap);
        ctx.check("cross metric invariants", cv.is_empty());
        Ok(json!({ "kind": "cross", "points": space.len(), "violations": mv.iter().chain(&cv).collect::<Vec<_>>() }))
    } else {
        let sdoc: SpaceDoc = serde_json::from_value(raw)?;
        let dist = SquareMatrix::from_rows(sdoc.dist.clone())?;
        let mut v = metric_violations(&dist);
        if !sdoc.points.contains(&sdoc.basepoint) {
            return Err(Error::UnknownLabel(sdoc.basepoint.clone()));
        }
        for j in 0..sdoc.points.len() {
            if let Some(i) = sdoc.points[..j].iter().position(|p| *p == sdoc.points[j]) {
                v.push(crate::metric::Violation::DuplicateLabel { i, j });
                break;
            }
        }
        if sdoc.points.len() != dist.dim() {
            return Err(Error::Dimension {
                expected: dist.dim(),
                got: sdoc.points.len(),
            });
        }
        ctx.check("metric axioms", v.is_empty());
        Ok(json!({ "kind": "space", "points": dist.dim(), "violations": v }))
    }
}

/// Replace every floating-point number by its decimal string.
fn stringify_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => Value::String(format_decimal(n.as_f64().unwrap())),
        Value::Array(a) => Value::Array(a.into_iter().map(stringify_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, stringify_floats(v))).collect()),
        other => other,
    }
}

fn inputs_digest(cmd: Command, opts: &Options) -> Result<String> {
    let mut parts: Vec<Vec<u8>> = vec![cmd.name().as_bytes().to_vec()];
    for p in [&opts.input, &opts.input2, &opts.config].into_iter().flatten() {
        parts.push(std::fs::read(p)?);
    }
    parts.push(format!("{:?}|{:?}|{:?}", opts.seed, opts.depth, opts.rmax).into_bytes());
    Ok(io::digest(parts.iter().map(Vec::as_slice)))
}

/// Errors that reject the input as data rather than as a syntactically broken file.
fn is_invariant_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidSpace(_)
            | Error::InvalidCross(_)
            | Error::SpaceMismatch
            | Error::EmptySubset
            | Error::Family(_)
            | Error::NoSamples { .. }
            | Error::Semigroup(_)
            | Error::NotInSPhi
            | Error::TooLarge(_)
            | Error::Tree(_)
            | Error::PrefixMap(_)
            | Error::Grid(_)
            | Error::Isometry(_)
    )
}

/// Run one subcommand. An invariant error becomes a failing checklist item;
/// parse and I/O errors are returned.
pub fn execute(cmd: Command, opts: &Options) -> Result<Outcome> {
    let start = Instant::now();
    let config = match &opts.config {
        Some(p) => io::read_json::<ConfigDoc>(p)?,
        None => ConfigDoc::default(),
    };
    let inputs_digest = inputs_digest(cmd, opts)?;
    let mut ctx = Ctx {
        opts: opts.clone(),
        config,
        checks: Vec::new(),
        artifacts: Vec::new(),
    };
    let results = match dispatch(cmd, &mut ctx) {
        Ok(v) => v,
        Err(e) if is_invariant_error(&e) => {
            ctx.check("input satisfies preconditions", false);
            json!({ "error": e.to_string() })
        }
        Err(e) => return Err(e),
    };
    Ok(Outcome {
        report: RunReport {
            subcommand: cmd.name().to_string(),
            inputs_digest,
            results: stringify_floats(results),
            checklist: ctx.checks,
            duration_ms: start.elapsed().as_millis() as u64,
        },
        artifacts: ctx.artifacts,
    })
}

fn artifact_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map_or_else(|| "result".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}{suffix}"))
}

fn write_outcome(outcome: &Outcome, out: Option<&Path>) -> Result<()> {
    let json = serde_json::to_string_pretty(&outcome.report)? + "\n";
    match out {
        Some(path) => {
            for (suffix, body) in &outcome.artifacts {
                io::write_atomic(&artifact_path(path, suffix), body.as_bytes())?;
            }
            io::write_atomic(path, json.as_bytes())
        }
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("WORKBENCH_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Parse `argv` (program name first), run, write the report, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::error::ErrorKind;
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                ErrorKind::InvalidSubcommand | ErrorKind::MissingSubcommand | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => EXIT_UNKNOWN,
                _ => EXIT_MALFORMED,
            };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    let outcome = match execute(cli.command, &cli.opts) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: malformed input: {e}");
            return EXIT_MALFORMED;
        }
    };
    if let Err(e) = write_outcome(&outcome, cli.opts.out.as_deref()) {
        eprintln!("error: {e}");
        return EXIT_MALFORMED;
    }
    if outcome.report.passed() {
        EXIT_OK
    } else {
        for c in outcome.report.checklist.iter().filter(|c| !c.pass) {
            eprintln!("FAIL {}", c.name);
        }
        EXIT_INVARIANT
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_become_strings() {
        let v = stringify_floats(json!({ "a": 2.5, "b": [1.0, 3], "c": "x" }));
        assert_eq!(v, json!({ "a": "2.5", "b": ["1", 3], "c": "x" }));
    }

    #[test]
    fn exit_codes_for_parsing() {
        assert_eq!(run(["double-metrics", "frobnicate"]), EXIT_UNKNOWN);
        assert_eq!(run(["double-metrics"]), EXIT_UNKNOWN);
        assert_eq!(run(["double-metrics", "validate", "--bogus"]), EXIT_MALFORMED);
    }

    #[test]
    fn random_fallbacks_pass() {
        for cmd in [Command::Validate, Command::Compose, Command::Star, Command::Idempotent, Command::SubsetMetric] {
            let o = execute(cmd, &Options { seed: Some(5), ..Default::default() }).unwrap();
            assert!(o.report.passed(), "{}", cmd.name());
        }
    }
}
