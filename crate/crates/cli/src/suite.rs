//! Suite files, job execution, and report emission.
//!
//! A suite is a TOML file with `[[job]]` sections; each job names a suite
//! kind, an algebra, operators, and parameters (caps, seeds, sample counts).
//! Jobs run independently (optionally in parallel) and the aggregated report
//! is deterministic for a fixed config and seed regardless of parallelism.

use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use bvkernel::algebra::Superalgebra;
use bvkernel::bracket::{
    check_d_derivation, check_gbva_identities, check_general_identities, check_leibniz,
    GbvaInstance,
};
use bvkernel::diffops::{classify_order, mutation, OrderLawReport};
use bvkernel::element::Element;
use bvkernel::error::KernelError;
use bvkernel::lie::{
    cartan_identity_check, check_boundary_order, homology_by_degree, iota_epsilon_bv_check,
    weil_prime_homology, ComplexCase, LieAlgebraData, LieComplex, ModuleSpec,
};
use bvkernel::linop::LinOp;
use bvkernel::master::{
    check_deformation, check_layered_master, check_power_lemmas,
    check_weight_obstruction, classical_master_check, exp_check, phi_expansion_check,
    search_master_solutions, MasterCandidate,
};
use bvkernel::poly::{make_polynomial_superalgebra, PolyAlgebra};
use bvkernel::random::{random_homogeneous, random_linop, SuiteRng};
use bvkernel::report::{IdentityChecker, IdentityReport, OrderReport};
use bvkernel::schouten::{check_gerstenhaber, check_sn_generation, SchoutenSpace};
use bvkernel::structconst::{make_structure_constant_algebra, random_superalgebra, ScWord};
use bvkernel::vosa::{
    check_g0_square_identity, check_l0_derivation, check_phi2_expansion, check_primary,
    check_residue_derivation, check_theorem22, commutator_check, make_bc_system, VosaBc,
};

use crate::parse::{
    parse_bc_op, parse_fock_state, parse_lie_op, parse_poly_element, parse_poly_op,
    parse_rational,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub cap: Option<i64>,
}

impl Overrides {
    fn seed(&self, job_seed: u64) -> u64 {
        self.seed.unwrap_or(job_seed)
    }

    fn cap(&self, job_cap: i64) -> i64 {
        self.cap.unwrap_or(job_cap)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AlgebraSpec {
    Poly {
        n_even: usize,
        n_odd: usize,
        cap: i64,
    },
    RandomSc {
        dim: usize,
        seed: u64,
    },
    LieExterior {
        lie: LieSpec,
        case: String,
    },
    Bc {
        cap: i64,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LieSpec {
    Named(String),
    Table {
        dim: usize,
        brackets: Vec<(usize, usize, usize, String)>,
    },
}

impl LieSpec {
    pub fn build(&self) -> Result<LieAlgebraData> {
        match self {
            LieSpec::Named(name) => match name.as_str() {
                "sl2" => Ok(LieAlgebraData::sl2()),
                "abelian2" => Ok(LieAlgebraData::abelian(2)),
                "nonabelian2" => Ok(LieAlgebraData::nonabelian2()),
                other => bail!("unknown Lie algebra {other:?}"),
            },
            LieSpec::Table { dim, brackets } => {
                let entries: Result<Vec<_>> = brackets
                    .iter()
                    .map(|(i, j, k, c)| Ok((*i, *j, *k, parse_rational(c)?)))
                    .collect();
                Ok(LieAlgebraData::new("custom", *dim, &entries?)?)
            }
        }
    }
}

enum Runtime {
    Poly(Arc<PolyAlgebra>),
    Lie(LieComplex),
    Bc(Arc<VosaBc>),
}

impl AlgebraSpec {
    fn build(&self, ov: &Overrides) -> Result<Runtime> {
        match self {
            AlgebraSpec::Poly { n_even, n_odd, cap } => Ok(Runtime::Poly(
                make_polynomial_superalgebra(*n_even, *n_odd, ov.cap(*cap))?,
            )),
            AlgebraSpec::RandomSc { dim, seed } => {
                if *dim > 16 {
                    bail!("structure-constant dimension too large");
                }
                let alg = random_superalgebra(*dim, ov.seed(*seed));
                // wrap in the same runtime as poly is not possible; handled
                // where needed (verify-general builds its own)
                let _ = alg;
                bail!("random-sc algebras are only used by verify-general jobs")
            }
            AlgebraSpec::LieExterior { lie, case } => {
                let case = match case.as_str() {
                    "homology" => ComplexCase::Homology,
                    "cohomology" => ComplexCase::Cohomology,
                    other => bail!("unknown complex case {other:?}"),
                };
                Ok(Runtime::Lie(LieComplex::new(
                    lie.build()?,
                    case,
                    ModuleSpec::Trivial,
                )?))
            }
            AlgebraSpec::Bc { cap } => Ok(Runtime::Bc(make_bc_system(ov.cap(*cap)))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OpClaim {
    pub op: String,
    pub order: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessExpect {
    pub r: usize,
    pub args: Vec<String>,
    pub value: String,
}

fn default_samples() -> usize {
    200
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "suite", rename_all = "kebab-case")]
pub enum JobSpec {
    CheckOrder {
        name: Option<String>,
        algebra: AlgebraSpec,
        op: String,
        r_max: usize,
        #[serde(default)]
        unital_adjust: bool,
        expect_order: Option<usize>,
        expect_witness: Option<WitnessExpect>,
    },
    OrderLaws {
        name: Option<String>,
        algebra: AlgebraSpec,
        ops: Vec<OpClaim>,
    },
    PhiKoszulAgreement {
        name: Option<String>,
        algebra: AlgebraSpec,
        r_max: usize,
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default)]
        seed: u64,
    },
    Phi4Agreement {
        name: Option<String>,
        algebra: AlgebraSpec,
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default)]
        seed: u64,
    },
    VerifyGbva {
        name: Option<String>,
        algebra: AlgebraSpec,
        delta: String,
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default)]
        seed: u64,
    },
    VerifyGeneral {
        name: Option<String>,
        dim: usize,
        #[serde(default)]
        algebra_seed: u64,
        op_count: usize,
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default)]
        seed: u64,
    },
    DDerivation {
        name: Option<String>,
        algebra: AlgebraSpec,
        delta: String,
        d: String,
        l: String,
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default)]
        seed: u64,
    },
    Leibniz {
        name: Option<String>,
        degrees: Vec<i64>,
        brackets: Vec<(usize, usize, usize, String)>,
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        shifted: bool,
    },
    LieSuite {
        name: Option<String>,
        lie: LieSpec,
        expect_homology: Option<Vec<usize>>,
        expect_cohomology: Option<Vec<usize>>,
    },
    Weil {
        name: Option<String>,
        lie: LieSpec,
        cap: i64,
    },
    SnCheck {
        name: Option<String>,
        dim: usize,
        cap: i64,
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default)]
        seed: u64,
    },
    VosaVerify {
        name: Option<String>,
        cap: i64,
        checks: Vec<String>,
    },
    PowerLemmas {
        name: Option<String>,
        algebra: AlgebraSpec,
        delta: String,
        w: String,
        lambda: String,
        k_max: usize,
    },
    ExpCheck {
        name: Option<String>,
        algebra: AlgebraSpec,
        delta: String,
        v: String,
        mu: String,
    },
    PhiExpansion {
        name: Option<String>,
        algebra: AlgebraSpec,
        op: Option<String>,
        #[serde(default)]
        random_ops: usize,
        w: Option<String>,
        k_max: usize,
        #[serde(default)]
        seed: u64,
    },
    Deformation {
        name: Option<String>,
        algebra: AlgebraSpec,
        delta: String,
        a: String,
        d: Option<String>,
        l: Option<String>,
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default)]
        seed: u64,
    },
    WeightObstruction {
        name: Option<String>,
        cap: i64,
        w: String,
        lambda: String,
    },
    MasterSearch {
        name: Option<String>,
        algebra: AlgebraSpec,
        delta: String,
        degree_bound: i64,
        coeff_bound: i64,
        #[serde(default)]
        expect_rigid_empty: bool,
    },
    ClassicalMaster {
        name: Option<String>,
        algebra: AlgebraSpec,
        delta: String,
        s: String,
    },
    LayeredMaster {
        name: Option<String>,
        algebra: AlgebraSpec,
        delta: String,
        s: String,
        #[serde(default)]
        ms: Vec<String>,
        c: String,
    },
    Mutation {
        name: Option<String>,
    },
}

impl JobSpec {
    pub fn suite_name(&self) -> &'static str {
        match self {
            JobSpec::CheckOrder { .. } => "check-order",
            JobSpec::OrderLaws { .. } => "order-laws",
            JobSpec::PhiKoszulAgreement { .. } => "phi-koszul-agreement",
            JobSpec::Phi4Agreement { .. } => "phi4-agreement",
            JobSpec::VerifyGbva { .. } => "verify-gbva",
            JobSpec::VerifyGeneral { .. } => "verify-general",
            JobSpec::DDerivation { .. } => "d-derivation",
            JobSpec::Leibniz { .. } => "leibniz",
            JobSpec::LieSuite { .. } => "lie-suite",
            JobSpec::Weil { .. } => "weil",
            JobSpec::SnCheck { .. } => "sn-check",
            JobSpec::VosaVerify { .. } => "vosa-verify",
            JobSpec::PowerLemmas { .. } => "power-lemmas",
            JobSpec::ExpCheck { .. } => "exp-check",
            JobSpec::PhiExpansion { .. } => "phi-expansion",
            JobSpec::Deformation { .. } => "deformation",
            JobSpec::WeightObstruction { .. } => "weight-obstruction",
            JobSpec::MasterSearch { .. } => "master-search",
            JobSpec::ClassicalMaster { .. } => "classical-master",
            JobSpec::LayeredMaster { .. } => "layered-master",
            JobSpec::Mutation { .. } => "mutation",
        }
    }

    pub fn display_name(&self) -> String {
        let explicit = match self {
            JobSpec::CheckOrder { name, .. }
            | JobSpec::OrderLaws { name, .. }
            | JobSpec::PhiKoszulAgreement { name, .. }
            | JobSpec::Phi4Agreement { name, .. }
            | JobSpec::VerifyGbva { name, .. }
            | JobSpec::VerifyGeneral { name, .. }
            | JobSpec::DDerivation { name, .. }
            | JobSpec::Leibniz { name, .. }
            | JobSpec::LieSuite { name, .. }
            | JobSpec::Weil { name, .. }
            | JobSpec::SnCheck { name, .. }
            | JobSpec::VosaVerify { name, .. }
            | JobSpec::PowerLemmas { name, .. }
            | JobSpec::ExpCheck { name, .. }
            | JobSpec::PhiExpansion { name, .. }
            | JobSpec::Deformation { name, .. }
            | JobSpec::WeightObstruction { name, .. }
            | JobSpec::MasterSearch { name, .. }
            | JobSpec::ClassicalMaster { name, .. }
            | JobSpec::LayeredMaster { name, .. }
            | JobSpec::Mutation { name } => name.clone(),
        };
        explicit.unwrap_or_else(|| self.suite_name().to_string())
    }
}

#[derive(Debug, Serialize)]
pub struct JobReport {
    pub name: String,
    pub suite: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub identities: Vec<IdentityReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub orders: Vec<OrderReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub law_reports: Vec<OrderLawReport>,
    #[serde(skip_serializing_if = "serde_json::Map::is_empty")]
    pub data: serde_json::Map<String, serde_json::Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub elapsed_ms: u64,
}

impl JobReport {
    fn new(name: String, suite: &str) -> Self {
        JobReport {
            name,
            suite: suite.to_string(),
            pass: true,
            identities: Vec::new(),
            orders: Vec::new(),
            law_reports: Vec::new(),
            data: serde_json::Map::new(),
            notes: Vec::new(),
            elapsed_ms: 0,
        }
    }

    fn push_identities(&mut self, reports: Vec<IdentityReport>) {
        for r in &reports {
            self.pass &= r.pass;
        }
        self.identities.extend(reports);
    }

    fn push_identity(&mut self, report: IdentityReport) {
        self.pass &= report.pass;
        self.identities.push(report);
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn datum(&mut self, key: &str, value: serde_json::Value) {
        self.data.insert(key.to_string(), value);
    }
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub overall_pass: bool,
    pub jobs: Vec<JobReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Deserialize)]
pub struct SuiteFile {
    #[serde(default)]
    pub job: Vec<JobSpec>,
}

pub fn parse_suite(text: &str) -> Result<SuiteFile> {
    toml::from_str(text).map_err(|e| anyhow!("suite parse error: {e}"))
}

pub fn run_suite(jobs: &[JobSpec], parallelism: usize, ov: &Overrides) -> Result<RunReport> {
    let mut warnings = Vec::new();
    if jobs.is_empty() {
        warnings.push("suite has no jobs; passing vacuously".to_string());
    }
    let results: Vec<Result<JobReport>> = if parallelism > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .context("building thread pool")?;
        pool.install(|| {
            use rayon::prelude::*;
            jobs.par_iter().map(|j| run_job(j, ov)).collect()
        })
    } else {
        jobs.iter().map(|j| run_job(j, ov)).collect()
    };
    let mut out = Vec::with_capacity(results.len());
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(rep) => out.push(rep),
            Err(e) => {
                // kernel precondition refusals surface on the job; anything
                // else is a configuration error
                match e.downcast::<KernelError>() {
                    Ok(ke) => {
                        let mut rep =
                            JobReport::new(jobs[i].display_name(), jobs[i].suite_name());
                        rep.pass = false;
                        rep.note(format!("refused: {ke}"));
                        out.push(rep);
                    }
                    Err(e) => return Err(e.context(format!("job {} failed", i + 1))),
                }
            }
        }
    }
    let overall_pass = out.iter().all(|j| j.pass);
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        overall_pass,
        jobs: out,
        warnings,
    })
}

fn run_job(job: &JobSpec, ov: &Overrides) -> Result<JobReport> {
    let start = Instant::now();
    let mut rep = JobReport::new(job.display_name(), job.suite_name());
    match job {
        JobSpec::CheckOrder {
            algebra,
            op,
            r_max,
            unital_adjust,
            expect_order,
            expect_witness,
            ..
        } => {
            let Runtime::Poly(alg) = algebra.build(ov)? else {
                bail!("check-order expects a polynomial algebra");
            };
            let linop = parse_poly_op(&alg, op)?;
            let order = classify_order(&*alg, &linop, *r_max, &alg.basis(), *unital_adjust)?;
            if let Some(expect) = expect_order {
                rep.pass &= order.order == Some(*expect);
                if order.order != Some(*expect) {
                    rep.note(format!(
                        "expected order {expect}, classified {:?}",
                        order.order
                    ));
                }
            }
            if let Some(we) = expect_witness {
                let found = order
                    .witnesses
                    .iter()
                    .any(|w| w.r == we.r && w.args == we.args && w.value == we.value);
                rep.pass &= found;
                if !found {
                    rep.note(format!("expected witness {we:?} not found"));
                }
            }
            rep.orders.push(order);
        }
        JobSpec::OrderLaws { algebra, ops, .. } => {
            let Runtime::Poly(alg) = algebra.build(ov)? else {
                bail!("order-laws expects a polynomial algebra");
            };
            let parsed: Result<Vec<(LinOp<_>, usize)>> = ops
                .iter()
                .map(|c| Ok((parse_poly_op(&alg, &c.op)?, c.order)))
                .collect();
            let reports = bvkernel::diffops::check_order_laws(&*alg, &parsed?, &alg.basis())?;
            for r in &reports {
                rep.pass &= r.pass;
            }
            rep.law_reports = reports;
        }
        JobSpec::PhiKoszulAgreement {
            algebra,
            r_max,
            samples,
            seed,
            ..
        } => {
            let Runtime::Poly(alg) = algebra.build(ov)? else {
                bail!("phi-koszul-agreement expects a polynomial algebra");
            };
            let seed = ov.seed(*seed);
            rep.push_identity(phi_koszul_agreement(&alg, *r_max, *samples, seed)?);
        }
        JobSpec::Phi4Agreement {
            algebra,
            samples,
            seed,
            ..
        } => {
            let Runtime::Poly(alg) = algebra.build(ov)? else {
                bail!("phi4-agreement expects a polynomial algebra");
            };
            let seed = ov.seed(*seed);
            rep.push_identity(phi4_agreement(&alg, *samples, seed)?);
        }
        JobSpec::VerifyGbva {
            algebra,
            delta,
            samples,
            seed,
            ..
        } => {
            let seed = ov.seed(*seed);
            match algebra.build(ov)? {
                Runtime::Poly(alg) => {
                    let op = parse_poly_op(&alg, delta)?;
                    let inst = GbvaInstance::validate(alg, op)?;
                    rep.datum("gbva_flags", serde_json::to_value(&inst.checked)?);
                    rep.push_identities(check_gbva_identities(&inst, *samples, seed)?);
                }
                Runtime::Lie(complex) => {
                    let op = parse_lie_op(&complex, delta)?;
                    let inst = GbvaInstance::validate(complex.algebra().clone(), op)?;
                    rep.datum("gbva_flags", serde_json::to_value(&inst.checked)?);
                    rep.push_identities(check_gbva_identities(&inst, *samples, seed)?);
                }
                Runtime::Bc(alg) => {
                    let op = parse_bc_op(&alg, delta)?;
                    let inst = GbvaInstance::validate(alg, op)?;
                    rep.datum("gbva_flags", serde_json::to_value(&inst.checked)?);
                    rep.push_identities(check_gbva_identities(&inst, *samples, seed)?);
                }
            }
        }
        JobSpec::VerifyGeneral {
            dim,
            algebra_seed,
            op_count,
            samples,
            seed,
            ..
        } => {
            if *dim > 6 {
                bail!("verify-general is specified for dimension ≤ 6");
            }
            let alg = random_superalgebra(*dim, ov.seed(*algebra_seed));
            let seed = ov.seed(*seed);
            let mut nonzero_total = 0usize;
            for k in 0..*op_count {
                let shift = if k % 2 == 0 { 1 } else { -1 };
                let delta = random_linop(
                    &alg,
                    seed.wrapping_add(k as u64),
                    shift,
                    false,
                    format!("random odd Δ#{k}"),
                );
                let reports =
                    check_general_identities(&*alg, &delta, *samples, seed.wrapping_add(k as u64))?;
                nonzero_total += reports.iter().map(|r| r.nonzero_cases).sum::<usize>();
                for r in &reports {
                    if !r.pass {
                        rep.push_identities(reports);
                        rep.note(format!("operator #{k} failed"));
                        rep.elapsed_ms = start.elapsed().as_millis() as u64;
                        return Ok(rep);
                    }
                }
                if k == 0 {
                    rep.push_identities(reports);
                }
            }
            rep.datum("operators_checked", serde_json::json!(op_count));
            rep.datum("nonzero_cases_total", serde_json::json!(nonzero_total));
            if nonzero_total == 0 {
                rep.pass = false;
                rep.note("all sampled identities were vacuous (0 = 0)");
            }
        }
        JobSpec::DDerivation {
            algebra,
            delta,
            d,
            l,
            samples,
            seed,
            ..
        } => {
            let seed = ov.seed(*seed);
            match algebra.build(ov)? {
                Runtime::Poly(alg) => {
                    let delta = parse_poly_op(&alg, delta)?;
                    let d = parse_poly_op(&alg, d)?;
                    let l = parse_poly_op(&alg, l)?;
                    let inst = GbvaInstance::validate(alg, delta)?;
                    rep.push_identity(check_d_derivation(&inst, &d, &l, *samples, seed)?);
                }
                Runtime::Bc(alg) => {
                    let delta = parse_bc_op(&alg, delta)?;
                    let d = parse_bc_op(&alg, d)?;
                    let l = parse_bc_op(&alg, l)?;
                    let inst = GbvaInstance::validate(alg, delta)?;
                    rep.push_identity(check_d_derivation(&inst, &d, &l, *samples, seed)?);
                }
                Runtime::Lie(_) => bail!("d-derivation supports poly and bc algebras"),
            }
        }
        JobSpec::Leibniz {
            degrees,
            brackets,
            samples,
            seed,
            shifted,
            ..
        } => {
            let seed = ov.seed(*seed);
            rep.push_identity(leibniz_job(degrees, brackets, *samples, seed, *shifted)?);
        }
        JobSpec::LieSuite {
            lie,
            expect_homology,
            expect_cohomology,
            ..
        } => {
            let lie = lie.build()?;
            run_lie_suite(&mut rep, &lie, expect_homology, expect_cohomology)?;
        }
        JobSpec::Weil { lie, cap, .. } => {
            let lie = lie.build()?;
            let weil = weil_prime_homology(&lie, ov.cap(*cap))?;
            rep.pass &= weil.pass;
            rep.push_identities(weil.identities);
            rep.datum("table", serde_json::to_value(&weil.table)?);
            if let Some(w) = weil.warning {
                rep.note(w);
            }
        }
        JobSpec::SnCheck {
            dim,
            cap,
            samples,
            seed,
            ..
        } => {
            let seed = ov.seed(*seed);
            let space = SchoutenSpace::new(*dim, ov.cap(*cap))?;
            let gen = check_sn_generation(&space, *samples, seed)?;
            rep.pass &= gen.pass;
            rep.datum("global_sign", serde_json::json!(gen.sign));
            rep.orders.push(gen.order.clone());
            rep.push_identities(gen.identities);
            rep.push_identities(check_gerstenhaber(&space, *samples, seed)?);
        }
        JobSpec::VosaVerify { cap, checks, .. } => {
            let alg = make_bc_system(ov.cap(*cap));
            run_vosa_checks(&mut rep, &alg, checks)?;
        }
        JobSpec::PowerLemmas {
            algebra,
            delta,
            w,
            lambda,
            k_max,
            ..
        } => {
            let Runtime::Poly(alg) = algebra.build(ov)? else {
                bail!("power-lemmas expects a polynomial algebra");
            };
            let delta = parse_poly_op(&alg, delta)?;
            let w = parse_poly_element(&alg, w)?;
            let lambda = parse_rational(lambda)?;
            let inst = GbvaInstance::validate(alg, delta)?;
            rep.push_identities(check_power_lemmas(
                &inst,
                &MasterCandidate::new(w, lambda),
                *k_max,
            )?);
        }
        JobSpec::ExpCheck {
            algebra,
            delta,
            v,
            mu,
            ..
        } => {
            let Runtime::Poly(alg) = algebra.build(ov)? else {
                bail!("exp-check expects a polynomial algebra");
            };
            let delta = parse_poly_op(&alg, delta)?;
            let v = parse_poly_element(&alg, v)?;
            let mu = parse_rational(mu)?;
            let inst = GbvaInstance::validate(alg, delta)?;
            rep.push_identities(exp_check(&inst, &v, &mu)?);
        }
        JobSpec::PhiExpansion {
            algebra,
            op,
            random_ops,
            w,
            k_max,
            seed,
            ..
        } => {
            let Runtime::Poly(alg) = algebra.build(ov)? else {
                bail!("phi-expansion expects a polynomial algebra");
            };
            let seed = ov.seed(*seed);
            let w_el = match w {
                Some(expr) => parse_poly_element(&alg, expr)?,
                None => {
                    let mut rng = SuiteRng::new(seed).fork("phi-expansion-w");
                    even_part(&random_homogeneous(&*alg, 1, rng.rng()))
                }
            };
            if let Some(opstr) = op {
                let delta = parse_poly_op(&alg, opstr)?;
                rep.push_identities(phi_expansion_check(&*alg, &delta, &w_el, *k_max)?);
            }
            for k in 0..*random_ops {
                let delta = random_linop(
                    &alg,
                    seed.wrapping_add(1000 + k as u64),
                    if k % 2 == 0 { -1 } else { 1 },
                    false,
                    format!("random odd op #{k}"),
                );
                rep.push_identities(phi_expansion_check(&*alg, &delta, &w_el, *k_max)?);
            }
        }
        JobSpec::Deformation {
            algebra,
            delta,
            a,
            d,
            l,
            samples,
            seed,
            ..
        } => {
            let Runtime::Poly(alg) = algebra.build(ov)? else {
                bail!("deformation expects a polynomial algebra");
            };
            let seed = ov.seed(*seed);
            let delta = parse_poly_op(&alg, delta)?;
            let a = parse_poly_element(&alg, a)?;
            let dl = match (d, l) {
                (Some(d), Some(l)) => Some((parse_poly_op(&alg, d)?, parse_poly_op(&alg, l)?)),
                _ => None,
            };
            let inst = GbvaInstance::validate(alg, delta)?;
            let result = match &dl {
                Some((d, l)) => check_deformation(&inst, &a, Some((d, l)), *samples, seed)?,
                None => check_deformation(&inst, &a, None, *samples, seed)?,
            };
            rep.pass &= result.pass;
            rep.datum(
                "is_master_solution",
                serde_json::json!(result.is_master_solution),
            );
            if !result.is_master_solution {
                rep.note("not a master solution: deformation equation fails");
                // the identities carry the residual; the job still reports
                // honestly (non-solutions fail the suite)
                rep.pass = false;
            }
            rep.identities.extend(result.identities);
        }
        JobSpec::WeightObstruction {
            cap, w, lambda, ..
        } => {
            let alg = make_bc_system(ov.cap(*cap));
            let w = parse_fock_state(&alg, w)?;
            let lambda = parse_rational(lambda)?;
            let result = check_weight_obstruction(&alg, &alg.b_state(), &w, &lambda)?;
            rep.pass &= result.pass;
            rep.datum("obstructed", serde_json::json!(result.obstructed));
            rep.identities.extend(result.identities);
        }
        JobSpec::MasterSearch {
            algebra,
            delta,
            degree_bound,
            coeff_bound,
            expect_rigid_empty,
            ..
        } => {
            let Runtime::Poly(alg) = algebra.build(ov)? else {
                bail!("master-search expects a polynomial algebra");
            };
            let delta = parse_poly_op(&alg, delta)?;
            let inst = GbvaInstance::validate(alg, delta)?;
            let report = search_master_solutions(&inst, *degree_bound, *coeff_bound)?;
            rep.datum("search", serde_json::to_value(&report)?);
            if *expect_rigid_empty && !report.rigid.is_empty() {
                rep.pass = false;
                rep.note("expected no rigid (λ ≠ 0, ΔW ≠ 0) solutions");
            }
            if report.solutions_any == 0 && report.solutions_value == 0 {
                rep.pass = false;
                rep.note("search found no solutions at all");
            }
        }
        JobSpec::ClassicalMaster {
            algebra, delta, s, ..
        } => {
            let Runtime::Poly(alg) = algebra.build(ov)? else {
                bail!("classical-master expects a polynomial algebra");
            };
            let delta = parse_poly_op(&alg, delta)?;
            let s = parse_poly_element(&alg, s)?;
            let inst = GbvaInstance::validate(alg, delta)?;
            rep.push_identity(classical_master_check(&inst, &s)?);
        }
        JobSpec::LayeredMaster {
            algebra,
            delta,
            s,
            ms,
            c,
            ..
        } => {
            let Runtime::Poly(alg) = algebra.build(ov)? else {
                bail!("layered-master expects a polynomial algebra");
            };
            let delta = parse_poly_op(&alg, delta)?;
            let s = parse_poly_element(&alg, s)?;
            let ms: Result<Vec<_>> = ms.iter().map(|m| parse_poly_element(&alg, m)).collect();
            let c = parse_rational(c)?;
            let inst = GbvaInstance::validate(alg, delta)?;
            rep.push_identities(check_layered_master(&inst, &s, &ms?, &c)?);
        }
        JobSpec::Mutation { .. } => {
            run_mutation_battery(&mut rep)?;
        }
    }
    rep.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(rep)
}

fn even_part(
    e: &Element<bvkernel::poly::GradedWord>,
) -> Element<bvkernel::poly::GradedWord> {
    Element::from_terms(
        e.iter()
            .filter(|(w, _)| bvkernel::element::Word::superdegree(*w) % 2 == 0)
            .map(|(w, c)| (w.clone(), c.clone())),
    )
}

/// Recursive Φ (plus unital adjustment) against Koszul's tensor forms on
/// random operators with `Δ(1) = 0`, for `r = 1..=r_max`.
fn phi_koszul_agreement(
    alg: &Arc<PolyAlgebra>,
    r_max: usize,
    samples: usize,
    seed: u64,
) -> Result<IdentityReport> {
    let mut rng = SuiteRng::new(seed).fork("koszul");
    let mut checker = IdentityChecker::new(
        "recursive Φ^r (unital-adjusted) = Koszul Φ^r, r ≤ r_max",
        format!("{samples} random tuples, r ≤ {r_max} (seed {seed})"),
    );
    let cap = alg.cap();
    for i in 0..samples {
        let r = (i % r_max) + 1;
        let shift = if i % 2 == 0 { -1 } else { 0 };
        let delta = random_linop(
            alg,
            seed.wrapping_add(i as u64),
            shift,
            true,
            format!("Δ#{i}"),
        );
        let budget = (cap / r as i64).max(0);
        let args: Vec<_> = (0..r)
            .map(|_| random_homogeneous(&**alg, budget, rng.rng()))
            .collect();
        let lhs = bvkernel::diffops::phi_form(&**alg, &delta, &args, true)?;
        let rhs = bvkernel::diffops::phi_form_koszul(&**alg, &delta, &args)?;
        let refs: Vec<&Element<_>> = args.iter().collect();
        checker.case(&**alg, &refs, &lhs, &rhs);
    }
    Ok(checker.finish())
}

/// The explicit fifteen-term Φ⁴ against the recursion on random tuples.
fn phi4_agreement(alg: &Arc<PolyAlgebra>, samples: usize, seed: u64) -> Result<IdentityReport> {
    let mut rng = SuiteRng::new(seed).fork("phi4");
    let mut checker = IdentityChecker::new(
        "explicit Φ⁴ formula = recursive Φ⁴",
        format!("{samples} random tuples (seed {seed})"),
    );
    let cap = alg.cap();
    for i in 0..samples {
        let shift = if i % 2 == 0 { -1 } else { 0 };
        let delta = random_linop(
            alg,
            seed.wrapping_add(7000 + i as u64),
            shift,
            false,
            format!("Δ#{i}"),
        );
        let budget = (cap / 4).max(0);
        let args: Vec<_> = (0..4)
            .map(|_| random_homogeneous(&**alg, budget, rng.rng()))
            .collect();
        let lhs =
            bvkernel::diffops::phi4_explicit(&**alg, &delta, &args[0], &args[1], &args[2], &args[3])?;
        let rhs = bvkernel::diffops::phi_form(&**alg, &delta, &args, false)?;
        let refs: Vec<&Element<_>> = args.iter().collect();
        checker.case(&**alg, &refs, &lhs, &rhs);
    }
    Ok(checker.finish())
}

/// A user-supplied bracket table checked for the Leibniz identity; the
/// carrier is a structure-constant space with zero multiplication.
fn leibniz_job(
    degrees: &[i64],
    brackets: &[(usize, usize, usize, String)],
    samples: usize,
    seed: u64,
    shifted: bool,
) -> Result<IdentityReport> {
    let dim = degrees.len();
    let zero_table = vec![vec![Element::zero(); dim]; dim];
    let alg = make_structure_constant_algebra(
        "bracket carrier",
        degrees.to_vec(),
        zero_table,
        Default::default(),
        None,
    )?;
    let mut table = vec![vec![Element::<ScWord>::zero(); dim]; dim];
    for (i, j, k, c) in brackets {
        if *i >= dim || *j >= dim || *k >= dim {
            bail!("bracket index out of range: ({i},{j},{k})");
        }
        table[*i][*j].add_term(
            ScWord {
                index: *k as u8,
                degree: degrees[*k],
            },
            parse_rational(c)?,
        );
    }
    let table = Arc::new(table);
    let shift = if shifted { 1 } else { 0 };
    let bracket = {
        let table = Arc::clone(&table);
        move |a: &Element<ScWord>, b: &Element<ScWord>| {
            let mut out = Element::zero();
            for (u, cu) in a.iter() {
                for (v, cv) in b.iter() {
                    out.add_scaled(&table[u.index as usize][v.index as usize], &(cu.clone() * cv));
                }
            }
            Ok(out)
        }
    };
    check_leibniz(
        &*alg,
        bracket,
        |e: &Element<ScWord>| e.superdegree().unwrap_or(0) + shift,
        samples,
        seed,
    )
    .map_err(Into::into)
}

fn run_lie_suite(
    rep: &mut JobReport,
    lie: &LieAlgebraData,
    expect_homology: &Option<Vec<usize>>,
    expect_cohomology: &Option<Vec<usize>>,
) -> Result<()> {
    for case in [ComplexCase::Homology, ComplexCase::Cohomology] {
        let complex = LieComplex::new(lie.clone(), case, ModuleSpec::Trivial)?;
        let d = complex.differential();
        let shift = match case {
            ComplexCase::Homology => -1,
            ComplexCase::Cohomology => 1,
        };
        // D² = 0 is verified inside the homology computation
        let dims = homology_by_degree(&complex, &d, shift)?;
        let label = match case {
            ComplexCase::Homology => "homology_dims",
            ComplexCase::Cohomology => "cohomology_dims",
        };
        rep.datum(label, serde_json::to_value(&dims)?);
        let expected = match case {
            ComplexCase::Homology => expect_homology,
            ComplexCase::Cohomology => expect_cohomology,
        };
        if let Some(exp) = expected {
            if &dims != exp {
                rep.pass = false;
                rep.note(format!("{label}: got {dims:?}, expected {exp:?}"));
            }
        }
        rep.push_identity(cartan_identity_check(&complex)?);
        let bo = check_boundary_order(&complex, 3)?;
        rep.pass &= bo.pass;
        rep.orders.push(bo.order.clone());
        rep.push_identity(bo.factorization);
        match case {
            ComplexCase::Homology => {
                if lie.is_semisimple() && bo.order.order != Some(2) {
                    rep.pass = false;
                    rep.note("∂ should have order exactly 2 on a semisimple algebra");
                }
            }
            ComplexCase::Cohomology => {
                if bo.order.order.map(|o| o > 1).unwrap_or(true) {
                    rep.pass = false;
                    rep.note("d should be a derivation (order ≤ 1)");
                }
            }
        }
    }
    if lie.is_semisimple() {
        let induced = iota_epsilon_bv_check(lie)?;
        rep.pass &= induced.pass;
        rep.identities.extend(induced.identities);
    } else {
        rep.note("non-semisimple control: homology-level claims reported, not asserted");
    }
    Ok(())
}

fn run_vosa_checks(rep: &mut JobReport, alg: &Arc<VosaBc>, checks: &[String]) -> Result<()> {
    for check in checks {
        let (kind, arg) = match check.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (check.as_str(), None),
        };
        match kind {
            "thm22" => {
                let n: i64 = arg
                    .ok_or_else(|| anyhow!("thm22 needs a mode index"))?
                    .parse()?;
                let result = check_theorem22(alg, &alg.b_state(), n)?;
                rep.pass &= result.pass;
                if let Some(r) = result.vanishing {
                    rep.push_identity(r);
                }
                if let Some(w) = result.order_witness {
                    rep.datum(
                        &format!("thm22_{n}_lower_witness"),
                        serde_json::to_value(&w)?,
                    );
                }
                if let Some(r) = result.left_mult {
                    rep.push_identity(r);
                }
            }
            "del" => {
                let r: i64 = arg
                    .ok_or_else(|| anyhow!("del needs an index"))?
                    .parse()?;
                rep.push_identity(check_phi2_expansion(alg, &alg.b_state(), r)?);
            }
            "l0" => {
                let n: i64 = arg
                    .ok_or_else(|| anyhow!("l0 needs a product index"))?
                    .parse()?;
                rep.push_identity(check_l0_derivation(alg, n)?);
            }
            "residue" => {
                let n: i64 = arg
                    .ok_or_else(|| anyhow!("residue needs a product index"))?
                    .parse()?;
                rep.push_identity(check_residue_derivation(alg, &alg.b_state(), n)?);
            }
            "primary" => {
                rep.push_identity(check_primary(
                    alg,
                    &alg.stress_state(),
                    &alg.b_state(),
                    2,
                    -2..=2,
                )?);
            }
            "commutators" => {
                for (m, n) in [(0, 1), (1, -1), (2, 0), (-1, 2)] {
                    rep.push_identity(commutator_check(
                        alg,
                        &alg.b_state(),
                        m,
                        &alg.c_state(),
                        n,
                    )?);
                    rep.push_identity(commutator_check(
                        alg,
                        &alg.b_state(),
                        m,
                        &alg.b_state(),
                        n,
                    )?);
                }
                rep.push_identity(commutator_check(
                    alg,
                    &alg.stress_state(),
                    1,
                    &alg.b_state(),
                    0,
                )?);
            }
            "g0" => {
                let result = check_g0_square_identity(alg)?;
                rep.pass &= result.pass;
                rep.identities.extend(result.identities);
            }
            "mode-order-laws" => {
                // spot checks of composition/bracket order laws for modes
                run_mode_order_laws(rep, alg)?;
            }
            other => bail!("unknown vosa check {other:?}"),
        }
    }
    Ok(())
}

fn run_mode_order_laws(rep: &mut JobReport, alg: &Arc<VosaBc>) -> Result<()> {
    // bracket side: supercommutators of modes land in low order, as in the
    // classical bracket law
    let basis = alg.basis();
    let mut zero_brackets = IdentityChecker::new(
        "supercommutators of b-modes vanish (bracket law, trivially)",
        format!("basis sweep, weight cap {}", alg.weight_cap()),
    );
    for (m, n) in [(0i64, 1i64), (0, 2), (1, 2)] {
        let a = alg.mode_op(alg.b_state(), m, format!("b_({m})"));
        let b = alg.mode_op(alg.b_state(), n, format!("b_({n})"));
        let br = a.supercommutator(&b);
        for w in &basis {
            let v = br.apply_word(w);
            zero_brackets.case(&**alg, &[&Element::basis(w.clone())], &v, &Element::zero());
        }
    }
    rep.push_identity(zero_brackets.finish());

    // a nonvanishing bracket: b_0 c_0 + c_0 b_0 = 1, i.e. the standard-index
    // supercommutator [b_(1), c_(-2)] is the identity, an order-0 operator
    let mut id_bracket = IdentityChecker::new(
        "[b_(1), c_(-2)] = id (bracket of modes has order 0)",
        format!("basis sweep, weight cap {}", alg.weight_cap()),
    );
    let br = alg
        .mode_op(alg.b_state(), 1, "b_(1)")
        .supercommutator(&alg.mode_op(alg.c_state(), -2, "c_(-2)"));
    for w in &basis {
        let v = br.apply_word(w);
        id_bracket.case(&**alg, &[&Element::basis(w.clone())], &v, &Element::basis(w.clone()));
    }
    rep.push_identity(id_bracket.finish());

    // composite side: b_(0)² vanishes (odd square-zero residue), and the
    // order of b_(0)∘b_(1) is measured on the capped sweep. The classical
    // subspace law D_r D_s ⊆ D_{r+s} is NOT asserted here: the Wick product
    // is neither commutative nor associative, and the measured order below
    // exceeds the classical bound, which is recorded as data.
    let mut square = IdentityChecker::new(
        "b_(0)∘b_(0) = 0 (composite of the residue with itself)",
        format!("basis sweep, weight cap {}", alg.weight_cap()),
    );
    let b0 = alg.mode_op(alg.b_state(), 0, "b_(0)");
    let sq = b0.compose(&b0);
    for w in &basis {
        let v = sq.apply_word(w);
        square.case(&**alg, &[&Element::basis(w.clone())], &v, &Element::zero());
    }
    rep.push_identity(square.finish());

    let comp = b0.compose(&alg.mode_op(alg.b_state(), 1, "b_(1)"));
    let mut measured: Option<usize> = None;
    for r in 2..=5usize {
        match bvkernel::diffops::phi_witness(&**alg, &comp, r + 1, &basis, false)? {
            None => {
                measured = Some(r);
                break;
            }
            Some((tuple, value)) => {
                // cross-check the witness through the element-level recursion
                let args: Vec<Element<bvkernel::vosa::FockWord>> =
                    tuple.iter().cloned().map(Element::basis).collect();
                let direct =
                    bvkernel::diffops::phi_form(&**alg, &comp, &args, false)?;
                if direct != value {
                    bail!("sweep and direct Φ evaluations disagree on a witness");
                }
            }
        }
    }
    rep.datum(
        "composite_b0_b1_measured_order",
        match measured {
            Some(r) => serde_json::json!(r),
            None => serde_json::json!("exceeds 5 on this sweep"),
        },
    );
    rep.note(
        "composite mode order measured, not asserted: the classical bound \
         D_r D_s ⊆ D_{r+s} presumes a classical algebra and fails on the \
         nose for the Wick product",
    );
    Ok(())
}

/// Criterion guard: every single-sign mutation of the Φ recursion or of the
/// bracket prefactor must break at least one of the agreement/identity
/// suites (Koszul agreement, the GBVA suite on a noncommutative instance,
/// or the general identities).
fn run_mutation_battery(rep: &mut JobReport) -> Result<()> {
    use bvkernel::bracket::mutation as bm;

    let flips = [
        mutation::SignFlip::PhiMiddle,
        mutation::SignFlip::PhiLast,
        mutation::SignFlip::PhiDropDelta,
        mutation::SignFlip::PhiDropSign,
        mutation::SignFlip::BracketPrefactor,
    ];
    for flip in flips {
        let mut caught = false;
        let mut caught_by = Vec::new();

        // (a) Koszul agreement on the classical instance
        if !matches!(flip, mutation::SignFlip::BracketPrefactor) {
            let alg = make_polynomial_superalgebra(2, 2, 4)?;
            let mut rng = SuiteRng::new(99).fork("mutation");
            'outer: for i in 0..40 {
                let r = (i % 3) + 2;
                let delta = random_linop(&alg, 300 + i as u64, -1, true, "Δ");
                let args: Vec<_> = (0..r)
                    .map(|_| random_homogeneous(&*alg, 1, rng.rng()))
                    .collect();
                let lhs = mutation::phi_form_flipped(&*alg, &delta, &args, true, flip)?;
                let rhs = bvkernel::diffops::phi_form_koszul(&*alg, &delta, &args)?;
                if lhs != rhs {
                    caught = true;
                    caught_by.push("koszul-agreement");
                    break 'outer;
                }
            }
        }

        // (b) GBVA identities on the noncommutative bc instance
        if !caught {
            let alg = make_bc_system(3);
            let inst = GbvaInstance::validate(alg.clone(), alg.delta_b0())?;
            let reports = bm::check_gbva_identities_flipped(&inst, 40, 13, flip)?;
            if reports.iter().any(|r| !r.pass) {
                caught = true;
                caught_by.push("gbva-bc");
            }
        }

        // (c) general identities on a random nonassociative algebra
        if !caught {
            let alg = random_superalgebra(5, 3);
            let delta = random_linop(&alg, 77, 1, false, "Δ");
            let reports = bm::check_general_identities_flipped(&*alg, &delta, 60, 5, flip)?;
            if reports.iter().any(|r| !r.pass) {
                caught = true;
                caught_by.push("general-identities");
            }
        }

        let mut checker = IdentityChecker::new(
            format!("mutant {flip:?} is caught"),
            "criteria 2/6/7 sub-suites".to_string(),
        );
        if caught {
            rep.datum(
                &format!("{flip:?}"),
                serde_json::json!(caught_by),
            );
            let alg = make_polynomial_superalgebra(1, 1, 2)?;
            let z: Element<bvkernel::poly::GradedWord> = Element::zero();
            checker.case(&*alg, &[], &z, &z);
        } else {
            checker.fail_raw(
                vec![format!("{flip:?}")],
                "mutant passed all suites".to_string(),
                "at least one failure".to_string(),
                "undetected sign mutation".to_string(),
            );
        }
        rep.push_identity(checker.finish());
    }
    Ok(())
}

/// Renders the stable, diff-friendly text report. Each failed identity
/// prints exactly one COUNTEREXAMPLE line.
pub fn render_text(report: &RunReport) -> String {
    let mut out = String::new();
    for w in &report.warnings {
        out.push_str(&format!("WARNING: {w}\n"));
    }
    for (i, job) in report.jobs.iter().enumerate() {
        out.push_str(&format!(
            "-- job {}: {} [{}] --\n",
            i + 1,
            job.name,
            job.suite
        ));
        for id in &job.identities {
            let status = if id.pass { "PASS" } else { "FAIL" };
            out.push_str(&format!(
                "{status} {} ({} cases, {} nonzero; {})\n",
                id.name, id.cases, id.nonzero_cases, id.domain
            ));
            if let Some(ce) = &id.counterexample {
                out.push_str(&format!(
                    "COUNTEREXAMPLE inputs=[{}] lhs={} rhs={} residual={}\n",
                    ce.inputs.join("; "),
                    ce.lhs,
                    ce.rhs,
                    ce.residual
                ));
            }
        }
        for o in &job.orders {
            out.push_str(&format!(
                "ORDER {}: {:?} (r_max {}, domain: {})\n",
                o.label, o.order, o.r_max, o.domain
            ));
            for w in &o.witnesses {
                out.push_str(&format!(
                    "  witness Φ^{}({}) = {}\n",
                    w.r,
                    w.args.join(", "),
                    w.value
                ));
            }
        }
        for l in &job.law_reports {
            out.push_str(&format!(
                "LAW ({}, {}): composite {:?} ≤ {}, bracket {:?} ≤ {:?} => {}\n",
                l.left,
                l.right,
                l.composite_order,
                l.composite_bound,
                l.bracket_order,
                l.bracket_bound,
                if l.pass { "PASS" } else { "FAIL" }
            ));
        }
        for (k, v) in &job.data {
            out.push_str(&format!("DATA {k} = {v}\n"));
        }
        for n in &job.notes {
            out.push_str(&format!("NOTE {n}\n"));
        }
        out.push_str(&format!(
            "-- job {} result: {} ({} ms) --\n",
            i + 1,
            if job.pass { "PASS" } else { "FAIL" },
            job.elapsed_ms
        ));
    }
    out.push_str(&format!(
        "OVERALL: {} ({} jobs)\n",
        if report.overall_pass { "PASS" } else { "FAIL" },
        report.jobs.len()
    ));
    out
}

pub fn render_json(report: &RunReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)? + "\n")
}
