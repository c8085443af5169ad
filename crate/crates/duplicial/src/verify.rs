//! Named verification suites with a uniform report format.
//!
//! Each suite is a battery of invariant checks over the other modules. A
//! check runs at a max order (per-check default, overridable, clamped to a
//! per-check cap), times itself, and records pass/fail plus a rendered
//! counterexample on failure. The `verify` subcommand is a thin wrapper.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::catalog::{self, Identity};
use crate::dyson::{
    self, aggregate_check, matrix_algebra_instance, non_bilinear_control, CoefficientAlgebra,
    Family, RatMatrix,
};
use crate::hopf::{
    antipode_e, coaction_a, convolve_over, convolve_under, delta_a, delta_a_monomial, delta_e,
    delta_e_recursive, delta_p, delta_p_recursive, ha_counit, inverse_via_antipode, HaElement,
    HaMonomial, TreeFunctional, TreePolynomial, TreeTensor,
};
use crate::ring::Coeff;
use crate::series::{Flavor, TreeSeries};
use crate::tamari::{interval_product_check, TamariLattice};
use crate::tree::{catalan, Tree};

/// The suites the CLI exposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Trees,
    Series,
    Propositions,
    Tamari,
    Hopf,
    Dyson,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::All,
        Suite::Trees,
        Suite::Series,
        Suite::Propositions,
        Suite::Tamari,
        Suite::Hopf,
        Suite::Dyson,
    ];

    pub fn parse(name: &str) -> Option<Suite> {
        Suite::ALL
            .into_iter()
            .find(|s| s.name().eq_ignore_ascii_case(name))
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Trees => "trees",
            Suite::Series => "series",
            Suite::Propositions => "propositions",
            Suite::Tamari => "tamari",
            Suite::Hopf => "hopf",
            Suite::Dyson => "dyson",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

impl CheckStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Skipped => "skipped",
        }
    }
}

/// One check's outcome. `counterexample` is present exactly when the status
/// is `Fail`.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub id: String,
    pub max_order: usize,
    pub status: CheckStatus,
    pub counterexample: Option<String>,
    pub millis: u128,
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        let mut pass = 0;
        let mut fail = 0;
        let mut skipped = 0;
        for c in &self.checks {
            match c.status {
                CheckStatus::Pass => pass += 1,
                CheckStatus::Fail => fail += 1,
                CheckStatus::Skipped => skipped += 1,
            }
        }
        (pass, fail, skipped)
    }

    /// Plain-text table. Timings are wall-clock and not reproducible; every
    /// other column is deterministic for a fixed invocation.
    pub fn render_table(&self) -> String {
        let id_width = self
            .checks
            .iter()
            .map(|c| c.id.len())
            .chain(std::iter::once("check".len()))
            .max()
            .unwrap_or(5);
        let mut out = String::new();
        out.push_str(&format!("suite {} (seed {})\n", self.suite, self.seed));
        out.push_str(&format!(
            "{:<id_width$}  {:>5}  {:<7}  {:>8}\n",
            "check", "order", "status", "time"
        ));
        for c in &self.checks {
            out.push_str(&format!(
                "{:<id_width$}  {:>5}  {:<7}  {:>5} ms\n",
                c.id,
                c.max_order,
                c.status.as_str(),
                c.millis
            ));
            if let Some(cx) = &c.counterexample {
                out.push_str(&format!("{:id_width$}  counterexample: {}\n", "", cx));
            }
        }
        let (pass, fail, skipped) = self.counts();
        let total = self.checks.len();
        out.push_str(&format!(
            "{}/{} checks passed ({} failed, {} skipped)\n",
            pass, total, fail, skipped
        ));
        out
    }

    pub fn to_json(&self) -> Value {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| {
                json!({
                    "id": c.id,
                    "max_order": c.max_order,
                    "status": c.status.as_str(),
                    "counterexample": c.counterexample,
                    "millis": c.millis,
                })
            })
            .collect();
        json!({
            "suite": self.suite,
            "seed": self.seed,
            "passed": self.passed(),
            "checks": checks,
        })
    }
}

struct Runner {
    requested: Option<usize>,
    seed: u64,
    stream: u64,
    checks: Vec<CheckResult>,
}

impl Runner {
    fn new(requested: Option<usize>, seed: u64) -> Runner {
        Runner {
            requested,
            seed,
            stream: 0,
            checks: Vec::new(),
        }
    }

    /// Effective order for a check: the requested override if given, else
    /// the check's default, clamped to the check's cap.
    fn order(&self, default: usize, cap: usize) -> usize {
        self.requested.unwrap_or(default).min(cap).max(1)
    }

    /// A fresh deterministic generator per randomized check.
    fn rng(&mut self) -> ChaCha8Rng {
        self.stream += 1;
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_add(self.stream.wrapping_mul(0x9e3779b9)))
    }

    fn check(&mut self, id: &str, order: usize, body: impl FnOnce() -> Result<(), String>) {
        let start = Instant::now();
        let outcome = body();
        let millis = start.elapsed().as_millis();
        let (status, counterexample) = match outcome {
            Ok(()) => (CheckStatus::Pass, None),
            Err(message) => (CheckStatus::Fail, Some(message)),
        };
        self.checks.push(CheckResult {
            id: id.to_string(),
            max_order: order,
            status,
            counterexample,
            millis,
        });
    }

    fn skip(&mut self, id: &str, order: usize) {
        self.checks.push(CheckResult {
            id: id.to_string(),
            max_order: order,
            status: CheckStatus::Skipped,
            counterexample: None,
            millis: 0,
        });
    }
}

/// Runs one suite (or all of them) and collects the report.
pub fn run_suite(suite: Suite, max_order: Option<usize>, seed: u64) -> VerificationReport {
    let mut runner = Runner::new(max_order, seed);
    match suite {
        Suite::All => {
            trees_suite(&mut runner);
            series_suite(&mut runner);
            propositions_suite(&mut runner);
            tamari_suite(&mut runner);
            hopf_suite(&mut runner);
            dyson_suite(&mut runner);
        }
        Suite::Trees => trees_suite(&mut runner),
        Suite::Series => series_suite(&mut runner),
        Suite::Propositions => propositions_suite(&mut runner),
        Suite::Tamari => tamari_suite(&mut runner),
        Suite::Hopf => hopf_suite(&mut runner),
        Suite::Dyson => dyson_suite(&mut runner),
    }
    VerificationReport {
        suite: suite.name().to_string(),
        seed,
        checks: runner.checks,
    }
}

fn fail<T: fmt::Display>(message: T) -> Result<(), String> {
    Err(message.to_string())
}

fn all_trees(n: usize) -> Vec<Tree> {
    Tree::enumerate_levels(n)
        .expect("order within the enumeration cap")
        .into_iter()
        .flatten()
        .collect()
}

// ---------------------------------------------------------------------------
// trees

fn trees_suite(r: &mut Runner) {
    let ord = r.order(8, 12);
    r.check("trees.catalan_counts", ord, || {
        for n in 0..=ord {
            let count = Tree::enumerate(n).map_err(|e| e.to_string())?.len() as u128;
            if count != catalan(n) {
                return fail(format!(
                    "order {}: enumerated {} trees, catalan says {}",
                    n,
                    count,
                    catalan(n)
                ));
            }
        }
        Ok(())
    });

    let ord = r.order(7, 10);
    r.check("trees.parse_roundtrip", ord, || {
        for n in 0..=ord {
            let level = Tree::enumerate(n).map_err(|e| e.to_string())?;
            let mut literals: Vec<String> = level.iter().map(Tree::to_string).collect();
            for (t, lit) in level.iter().zip(&literals) {
                match Tree::parse(lit) {
                    Ok(back) if &back == t => {}
                    Ok(back) => return fail(format!("{} reparsed as {}", lit, back)),
                    Err(e) => return fail(format!("{} failed to reparse: {}", lit, e)),
                }
            }
            let sorted = {
                let mut s = literals.clone();
                s.sort_unstable();
                s
            };
            if literals != sorted {
                return fail(format!("order {}: enumeration is not in literal order", n));
            }
            literals.dedup();
            if literals.len() != level.len() {
                return fail(format!("order {}: duplicate literals", n));
            }
        }
        Ok(())
    });

    let ord = r.order(6, 7);
    r.check("trees.product_laws", ord, || {
        let all = all_trees(ord);
        for a in &all {
            for b in &all {
                if a.order() + b.order() > ord {
                    continue;
                }
                for c in &all {
                    if a.order() + b.order() + c.order() > ord {
                        continue;
                    }
                    if a.over(b).over(c) != a.over(&b.over(c)) {
                        return fail(format!("over not associative at {} {} {}", a, b, c));
                    }
                    if a.under(b).under(c) != a.under(&b.under(c)) {
                        return fail(format!("under not associative at {} {} {}", a, b, c));
                    }
                    if !b.is_leaf() && a.over(b).under(c) != a.over(&b.under(c)) {
                        return fail(format!("duplicial relation fails at {} {} {}", a, b, c));
                    }
                }
            }
        }
        Ok(())
    });

    let ord = r.order(7, 10);
    r.check("trees.graft_bijection", ord, || {
        for n in 1..=ord {
            let mut grafted: Vec<Tree> = Vec::new();
            for p in 0..n {
                for l in Tree::enumerate(p).map_err(|e| e.to_string())? {
                    for t in Tree::enumerate(n - 1 - p).map_err(|e| e.to_string())? {
                        grafted.push(l.graft(&t));
                    }
                }
            }
            grafted.sort_unstable();
            let before = grafted.len();
            grafted.dedup();
            if grafted.len() != before {
                return fail(format!("order {}: graft produced duplicates", n));
            }
            if grafted != Tree::enumerate(n).map_err(|e| e.to_string())? {
                return fail(format!("order {}: graft image misses trees", n));
            }
        }
        Ok(())
    });

    let ord = r.order(7, 10);
    r.check("trees.spine_reconstruction", ord, || {
        for t in all_trees(ord) {
            let factors = t.left_spine_factors();
            let rebuilt = factors
                .iter()
                .fold(Tree::leaf(), |acc, s| acc.over(&s.v_wrap()));
            if rebuilt != t {
                return fail(format!("{} rebuilt as {}", t, rebuilt));
            }
            let total: usize = factors.iter().map(|s| s.order() + 1).sum();
            if total != t.order() {
                return fail(format!("{}: spine factor orders sum to {}", t, total));
            }
        }
        Ok(())
    });

    let ord = r.order(6, 8);
    r.check("trees.factorizations", ord, || {
        for t in all_trees(ord) {
            let over = t.over_factorizations();
            for (u, v) in &over {
                if u.over(v) != t {
                    return fail(format!("{}: bad over factor pair ({}, {})", t, u, v));
                }
            }
            let mut seen = over.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != over.len() {
                return fail(format!("{}: repeated over factorization", t));
            }
            let under = t.under_factorizations();
            for (u, v) in &under {
                if u.under(v) != t {
                    return fail(format!("{}: bad under factor pair ({}, {})", t, u, v));
                }
            }
            if over.len() != t.left_spine_factors().len() + 1 && !t.is_leaf() {
                return fail(format!("{}: over factorization count off", t));
            }
        }
        Ok(())
    });
}

// ---------------------------------------------------------------------------
// series

fn series_suite(r: &mut Runner) {
    let ord = r.order(8, 10);
    let mut rng = r.rng();
    r.check("series.unit_laws", ord, || {
        let x = TreeSeries::random(ord, Flavor::Invertible, &mut rng);
        let unit = TreeSeries::unit(ord);
        let over = x.over(&unit).map_err(|e| e.to_string())?;
        let under = unit.under(&x).map_err(|e| e.to_string())?;
        if over != x {
            return fail("x over 1 differs from x");
        }
        if under != x {
            return fail("1 under x differs from x");
        }
        Ok(())
    });

    let ord = r.order(6, 7);
    let mut rng = r.rng();
    r.check("series.over_group", ord, || {
        let x = TreeSeries::random(ord, Flavor::Invertible, &mut rng);
        let y = TreeSeries::random(ord, Flavor::Invertible, &mut rng);
        let z = TreeSeries::random(ord, Flavor::Invertible, &mut rng);
        let left = x
            .over(&y)
            .and_then(|xy| xy.over(&z))
            .map_err(|e| e.to_string())?;
        let right = y
            .over(&z)
            .and_then(|yz| x.over(&yz))
            .map_err(|e| e.to_string())?;
        if left != right {
            if let Some((t, a, b)) = left.first_difference(&right) {
                return fail(format!("associativity: tree {}: {} vs {}", t, a, b));
            }
        }
        let inv = x.inverse_over().map_err(|e| e.to_string())?;
        let unit = TreeSeries::unit(ord);
        if x.over(&inv).map_err(|e| e.to_string())? != unit {
            return fail("x over x^{-1} is not the unit");
        }
        if inv.over(&x).map_err(|e| e.to_string())? != unit {
            return fail("x^{-1} over x is not the unit");
        }
        Ok(())
    });

    let ord = r.order(6, 7);
    let mut rng = r.rng();
    r.check("series.under_group", ord, || {
        let x = TreeSeries::random(ord, Flavor::Invertible, &mut rng);
        let y = TreeSeries::random(ord, Flavor::Invertible, &mut rng);
        let z = TreeSeries::random(ord, Flavor::Invertible, &mut rng);
        let left = x
            .under(&y)
            .and_then(|xy| xy.under(&z))
            .map_err(|e| e.to_string())?;
        let right = y
            .under(&z)
            .and_then(|yz| x.under(&yz))
            .map_err(|e| e.to_string())?;
        if left != right {
            return fail("under is not associative");
        }
        let inv = x.inverse_under().map_err(|e| e.to_string())?;
        let unit = TreeSeries::unit(ord);
        if x.under(&inv).map_err(|e| e.to_string())? != unit
            || inv.under(&x).map_err(|e| e.to_string())? != unit
        {
            return fail("under inverse fails");
        }
        Ok(())
    });

    let ord = r.order(6, 8);
    let mut rng = r.rng();
    r.check("series.bilinearity", ord, || {
        let x = TreeSeries::random(ord, Flavor::General, &mut rng);
        let y = TreeSeries::random(ord, Flavor::General, &mut rng);
        let z = TreeSeries::random(ord, Flavor::General, &mut rng);
        let sum = x.add(&y).map_err(|e| e.to_string())?;
        let lhs = sum.over(&z).map_err(|e| e.to_string())?;
        let rhs = x
            .over(&z)
            .and_then(|a| y.over(&z).and_then(|b| a.add(&b)))
            .map_err(|e| e.to_string())?;
        if lhs != rhs {
            return fail("over is not left linear");
        }
        let lhs = z.under(&sum).map_err(|e| e.to_string())?;
        let rhs = z
            .under(&x)
            .and_then(|a| z.under(&y).and_then(|b| a.add(&b)))
            .map_err(|e| e.to_string())?;
        if lhs != rhs {
            return fail("under is not right linear");
        }
        let c = Coeff::from_int(-3);
        let lhs = x.scale(&c).over(&y).map_err(|e| e.to_string())?;
        let rhs = x.over(&y).map_err(|e| e.to_string())?.scale(&c);
        if lhs != rhs {
            return fail("over does not commute with scaling");
        }
        Ok(())
    });

    let ord = r.order(8, 10);
    r.check("series.comb_products", ord, || {
        let c = catalog::series_c(ord);
        let d = catalog::series_d(ord);
        let l = catalog::series_l(ord);
        let left = c
            .over(&d)
            .and_then(|cd| cd.over(&l))
            .map_err(|e| e.to_string())?;
        let right = d
            .over(&l)
            .and_then(|dl| c.over(&dl))
            .map_err(|e| e.to_string())?;
        if left != right {
            return fail("over not associative on comb series");
        }
        let left = c
            .over(&d)
            .and_then(|cd| cd.under(&l))
            .map_err(|e| e.to_string())?;
        let right = d
            .under(&l)
            .and_then(|dl| c.over(&dl))
            .map_err(|e| e.to_string())?;
        if left != right {
            return fail("duplicial relation fails on comb series");
        }
        Ok(())
    });

    let ord = r.order(6, 7);
    let mut rng = r.rng();
    r.check("series.compose_group", ord, || {
        let x = TreeSeries::random(ord, Flavor::Diffeo, &mut rng);
        let y = TreeSeries::random(ord, Flavor::Diffeo, &mut rng);
        let z = TreeSeries::random(ord, Flavor::Diffeo, &mut rng);
        let left = x
            .compose(&y)
            .and_then(|xy| xy.compose(&z))
            .map_err(|e| e.to_string())?;
        let right = y
            .compose(&z)
            .and_then(|yz| x.compose(&yz))
            .map_err(|e| e.to_string())?;
        if left != right {
            return fail("composition is not associative");
        }
        let id = TreeSeries::identity(ord).map_err(|e| e.to_string())?;
        if x.compose(&id).map_err(|e| e.to_string())? != x
            || id.compose(&x).map_err(|e| e.to_string())? != x
        {
            return fail("identity series is not neutral");
        }
        let inv = x.compose_inverse().map_err(|e| e.to_string())?;
        if x.compose(&inv).map_err(|e| e.to_string())? != id
            || inv.compose(&x).map_err(|e| e.to_string())? != id
        {
            return fail("compositional inverse fails");
        }
        Ok(())
    });

    let ord = r.order(6, 7);
    let mut rng = r.rng();
    r.check("series.compose_distributivity", ord, || {
        let strip = |s: &TreeSeries| {
            TreeSeries::from_terms(
                ord,
                s.terms()
                    .filter(|(t, _)| !t.is_leaf())
                    .map(|(t, c)| (t.clone(), c.clone()))
                    .collect(),
            )
            .expect("stripped terms stay within the order")
        };
        let x = strip(&TreeSeries::random(ord, Flavor::Invertible, &mut rng));
        let y = strip(&TreeSeries::random(ord, Flavor::Invertible, &mut rng));
        let z = TreeSeries::random(ord, Flavor::Diffeo, &mut rng);
        let lhs = x
            .over(&y)
            .and_then(|xy| xy.compose(&z))
            .map_err(|e| e.to_string())?;
        let rhs = x
            .compose(&z)
            .and_then(|xz| y.compose(&z).and_then(|yz| xz.over(&yz)))
            .map_err(|e| e.to_string())?;
        if !lhs.eq_terms(&rhs) {
            return fail("composition does not distribute over the over product");
        }
        let lhs = x
            .under(&y)
            .and_then(|xy| xy.compose(&z))
            .map_err(|e| e.to_string())?;
        let rhs = x
            .compose(&z)
            .and_then(|xz| y.compose(&z).and_then(|yz| xz.under(&yz)))
            .map_err(|e| e.to_string())?;
        if !lhs.eq_terms(&rhs) {
            return fail("composition does not distribute over the under product");
        }
        Ok(())
    });

    let ord = r.order(5, 6);
    let mut rng = r.rng();
    r.check("series.subgroup_closure", ord, || {
        let a = TreeSeries::random(ord, Flavor::Invertible, &mut rng);
        let b = TreeSeries::random(ord, Flavor::Invertible, &mut rng);
        let rho = a
            .rho_embed()
            .and_then(|ra| b.rho_embed().and_then(|rb| ra.compose(&rb)))
            .map_err(|e| e.to_string())?;
        if !rho.rho_solve().map_err(|e| e.to_string())?.is_member() {
            return fail("rho image is not closed under composition");
        }
        let lam = a
            .lambda_embed()
            .and_then(|la| b.lambda_embed().and_then(|lb| la.compose(&lb)))
            .map_err(|e| e.to_string())?;
        if !lam.lambda_solve().map_err(|e| e.to_string())?.is_member() {
            return fail("lambda image is not closed under composition");
        }
        let inner = ord.saturating_sub(2).max(1);
        let x = TreeSeries::random(inner, Flavor::General, &mut rng);
        let y = TreeSeries::random(inner, Flavor::General, &mut rng);
        let composed = x
            .alpha_build()
            .compose(&y.alpha_build())
            .map_err(|e| e.to_string())?;
        if !composed.alpha_solve().map_err(|e| e.to_string())?.is_member() {
            return fail("alpha image is not closed under composition");
        }
        Ok(())
    });

    let ord = r.order(8, 10);
    let mut rng = r.rng();
    r.check("series.suspension_involution", ord, || {
        let x = TreeSeries::random(ord, Flavor::General, &mut rng);
        if x.suspension().suspension() != x {
            return fail("suspension applied twice is not the identity");
        }
        Ok(())
    });

    let ord = r.order(6, 7);
    let mut rng = r.rng();
    r.check("series.suspension_morphism", ord, || {
        let f = TreeSeries::random(ord, Flavor::Diffeo, &mut rng);
        let g = TreeSeries::random(ord, Flavor::Diffeo, &mut rng);
        let lhs = f.compose(&g).map_err(|e| e.to_string())?.suspension();
        let rhs = f
            .suspension()
            .compose(&g.suspension())
            .map_err(|e| e.to_string())?;
        if lhs != rhs {
            if let Some((t, a, b)) = lhs.first_difference(&rhs) {
                return fail(format!("composition morphism fails at {}: {} vs {}", t, a, b));
            }
        }
        Ok(())
    });

    let ord = r.order(6, 7);
    let mut rng = r.rng();
    r.check("series.projection_morphism", ord, || {
        let x = TreeSeries::random(ord, Flavor::General, &mut rng);
        let y = TreeSeries::random(ord, Flavor::General, &mut rng);
        let over = x.over(&y).map_err(|e| e.to_string())?;
        let prod = x.project().mul(&y.project()).map_err(|e| e.to_string())?;
        if over.project() != prod {
            return fail("projection is not multiplicative for over");
        }
        let under = x.under(&y).map_err(|e| e.to_string())?;
        if under.project() != prod {
            return fail("projection is not multiplicative for under");
        }
        let f = TreeSeries::random(ord, Flavor::Diffeo, &mut rng);
        let g = TreeSeries::random(ord, Flavor::Diffeo, &mut rng);
        let composed = f.compose(&g).map_err(|e| e.to_string())?;
        let expected = f
            .project()
            .compose(&g.project())
            .map_err(|e| e.to_string())?;
        if composed.project() != expected {
            return fail("projection does not respect composition");
        }
        Ok(())
    });

    let ord = r.order(5, 6);
    let mut rng = r.rng();
    r.check("series.embeddings", ord, || {
        let x = TreeSeries::random(ord, Flavor::Invertible, &mut rng);
        let rho = x.rho_embed().map_err(|e| e.to_string())?;
        match rho.rho_solve().map_err(|e| e.to_string())? {
            crate::series::Membership::Member(back) if back == x => {}
            crate::series::Membership::Member(_) => return fail("rho round trip changed x"),
            crate::series::Membership::NotAMember { tree } => {
                return fail(format!("rho image rejected at {}", tree))
            }
        }
        let lambda = x.lambda_embed().map_err(|e| e.to_string())?;
        match lambda.lambda_solve().map_err(|e| e.to_string())? {
            crate::series::Membership::Member(back) if back == x => {}
            _ => return fail("lambda round trip failed"),
        }
        let alpha = x.alpha_build();
        match alpha.alpha_solve().map_err(|e| e.to_string())? {
            crate::series::Membership::Member(back) if back == x => {}
            _ => return fail("alpha round trip failed"),
        }
        Ok(())
    });

    let ord = r.order(6, 8);
    let mut rng = r.rng();
    r.check("series.json_roundtrip", ord, || {
        for flavor in [Flavor::Invertible, Flavor::Diffeo, Flavor::General] {
            let x = TreeSeries::random(ord, flavor, &mut rng);
            let back =
                TreeSeries::from_json_str(&x.to_json_string()).map_err(|e| e.to_string())?;
            if back != x {
                return fail(format!("round trip changed a {} series", flavor.as_str()));
            }
        }
        Ok(())
    });

    let ord = r.order(6, 8);
    let mut rng = r.rng();
    r.check("series.truncation_discipline", ord, || {
        let x = TreeSeries::random(ord, Flavor::General, &mut rng);
        let shorter = x.retruncate(ord - 1).map_err(|e| e.to_string())?;
        if x.add(&shorter).is_ok() {
            return fail("mixed truncation orders were accepted");
        }
        for (t, c) in shorter.terms() {
            if &x.coeff(t) != c {
                return fail(format!("retruncation changed the coefficient of {}", t));
            }
        }
        let general = TreeSeries::random(ord, Flavor::General, &mut rng);
        if general.inverse_over().is_ok() {
            return fail("a general series admitted an over inverse");
        }
        let invertible = TreeSeries::random(ord, Flavor::Invertible, &mut rng);
        if invertible.compose(&invertible).is_ok() {
            return fail("composition accepted a non-diffeo operand");
        }
        Ok(())
    });
}

// ---------------------------------------------------------------------------
// propositions

fn identity_check(r: &mut Runner, id: &str, identity: Identity, default: usize, cap: usize) {
    let ord = r.order(default, cap);
    r.check(id, ord, || match catalog::check(identity, ord) {
        Ok(report) => match report.counterexample {
            None => Ok(()),
            Some(cx) => fail(format!(
                "tree {}: lhs {}, rhs {}",
                cx.tree, cx.lhs, cx.rhs
            )),
        },
        Err(e) => fail(e),
    });
}

fn propositions_suite(r: &mut Runner) {
    identity_check(r, "propositions.prop1", Identity::Prop1, 6, 8);

    let ord = r.order(6, 8);
    r.check("propositions.prop1_specialized", ord, || {
        let a = catalog::series_a(ord);
        let b = catalog::series_b(ord).map_err(|e| e.to_string())?;
        let target = TreeSeries::monomial(ord, Tree::vertex(), Coeff::one())
            .map_err(|e| e.to_string())?;
        for (num, den) in [(0i64, 1i64), (1, 1), (-2, 1), (3, 5)] {
            let w = BigRational::new(BigInt::from(num), BigInt::from(den));
            let left = a
                .specialize_w(&w)
                .compose(&b.specialize_w(&w))
                .map_err(|e| e.to_string())?;
            if left != target {
                return fail(format!("composition misses the vertex at w = {}/{}", num, den));
            }
        }
        Ok(())
    });

    identity_check(r, "propositions.prop2a", Identity::Prop2a, 6, 10);
    identity_check(r, "propositions.prop2b", Identity::Prop2b, 6, 8);
    identity_check(r, "propositions.prop3a", Identity::Prop3a, 6, 7);
    identity_check(r, "propositions.prop3b", Identity::Prop3b, 6, 10);
    identity_check(r, "propositions.prop4a", Identity::Prop4a, 6, 10);
    identity_check(r, "propositions.prop4b", Identity::Prop4b, 6, 10);
    identity_check(r, "propositions.prop4c", Identity::Prop4c, 6, 8);
    identity_check(r, "propositions.remark", Identity::Remark, 6, 10);
}

// ---------------------------------------------------------------------------
// tamari

fn tamari_suite(r: &mut Runner) {
    let ord = r.order(6, 7);
    r.check("tamari.unique_extremes", ord, || {
        for n in 1..=ord {
            let lattice = TamariLattice::build(n).map_err(|e| e.to_string())?;
            let mins = lattice.minimal_elements();
            let maxs = lattice.maximal_elements();
            if mins.len() != 1 || mins[0] != &Tree::left_comb(n) {
                return fail(format!("order {}: minimum is not the left comb", n));
            }
            if maxs.len() != 1 || maxs[0] != &Tree::right_comb(n) {
                return fail(format!("order {}: maximum is not the right comb", n));
            }
        }
        Ok(())
    });

    let ord = r.order(5, 7);
    r.check("tamari.lattice_property", ord, || {
        for n in 1..=ord {
            let lattice = TamariLattice::build(n).map_err(|e| e.to_string())?;
            if let Some((s, t)) = lattice.lattice_property_counterexample() {
                return fail(format!("order {}: no meet or join for {} and {}", n, s, t));
            }
        }
        Ok(())
    });

    let ord = r.order(6, 7);
    r.check("tamari.mobius_row_sums", ord, || {
        for n in 2..=ord {
            let lattice = TamariLattice::build(n).map_err(|e| e.to_string())?;
            let row = lattice.mobius_from_min();
            let total: i64 = row.values().sum();
            if total != 0 {
                return fail(format!("order {}: mobius row from the minimum sums to {}", n, total));
            }
        }
        Ok(())
    });

    let ord = r.order(6, 7);
    r.check("tamari.zeta_mobius", ord, || {
        for n in 1..=ord {
            let lattice = TamariLattice::build(n).map_err(|e| e.to_string())?;
            let elements = lattice.elements().to_vec();
            for s in &elements {
                for t in &elements {
                    if !lattice.leq(s, t).map_err(|e| e.to_string())? {
                        continue;
                    }
                    let mut total = 0i64;
                    for z in &elements {
                        if lattice.leq(s, z).map_err(|e| e.to_string())?
                            && lattice.leq(z, t).map_err(|e| e.to_string())?
                        {
                            total += lattice.mobius(s, z).map_err(|e| e.to_string())?;
                        }
                    }
                    let expected = i64::from(s == t);
                    if total != expected {
                        return fail(format!(
                            "order {}: zeta * mobius at ({}, {}) is {}",
                            n, s, t, total
                        ));
                    }
                }
            }
        }
        Ok(())
    });

    let ord = r.order(5, 7);
    r.check("tamari.interval_factorization", ord, || {
        for p in 0..=ord {
            for q in 0..=(ord - p) {
                let report = interval_product_check(p, q).map_err(|e| e.to_string())?;
                if let Some(cx) = report.counterexample {
                    return fail(format!(
                        "(p, q) = ({}, {}): mobius {} at {} over {} but factors give {}",
                        p, q, cx.product_value, cx.left, cx.right, cx.factor_value
                    ));
                }
            }
        }
        Ok(())
    });

    let ord = r.order(6, 7);
    r.check("tamari.mobius_corollary", ord, || {
        for n in 1..=ord {
            let lattice = TamariLattice::build(n).map_err(|e| e.to_string())?;
            let row = lattice.mobius_from_min();
            for s in Tree::enumerate(n - 1).map_err(|e| e.to_string())? {
                let wrapped = s.v_wrap();
                let value = row[&wrapped];
                let expected_nonzero = s == Tree::right_comb(n - 1);
                if (value != 0) != expected_nonzero {
                    return fail(format!(
                        "order {}: mobius from the minimum at {} is {}",
                        n, wrapped, value
                    ));
                }
            }
        }
        Ok(())
    });

    let ord = r.order(5, 7);
    r.check("tamari.codec_roundtrip", ord, || {
        for n in 1..=ord {
            let lattice = TamariLattice::build(n).map_err(|e| e.to_string())?;
            let back = TamariLattice::from_json_str(&lattice.export_json_string())
                .map_err(|e| e.to_string())?;
            if back.elements() != lattice.elements()
                || back.cover_edge_count() != lattice.cover_edge_count()
            {
                return fail(format!("order {}: JSON round trip changed the lattice", n));
            }
            let dot = lattice.export_dot();
            let edges = dot.lines().filter(|l| l.contains(" -> ")).count();
            if edges != lattice.cover_edge_count() {
                return fail(format!(
                    "order {}: dot export has {} edges, expected {}",
                    n,
                    edges,
                    lattice.cover_edge_count()
                ));
            }
        }
        Ok(())
    });
}

// ---------------------------------------------------------------------------
// hopf

type Triple = BTreeMap<(Tree, Tree, Tree), Coeff>;

fn triple_insert(map: &mut Triple, key: (Tree, Tree, Tree), c: Coeff) {
    let entry = map.entry(key).or_insert_with(Coeff::zero);
    *entry = entry.add(&c);
    if entry.is_zero() {
        map.retain(|_, v| !v.is_zero());
    }
}

fn left_expand(delta: &dyn Fn(&Tree) -> TreeTensor, t: &Tree) -> Triple {
    let mut out = Triple::new();
    for (l, rgt, c) in delta(t).terms() {
        for (a, b, c2) in delta(l).terms() {
            triple_insert(&mut out, (a.clone(), b.clone(), rgt.clone()), c.mul(c2));
        }
    }
    out
}

fn right_expand(delta: &dyn Fn(&Tree) -> TreeTensor, t: &Tree) -> Triple {
    let mut out = Triple::new();
    for (l, rgt, c) in delta(t).terms() {
        for (a, b, c2) in delta(rgt).terms() {
            triple_insert(&mut out, (l.clone(), a.clone(), b.clone()), c.mul(c2));
        }
    }
    out
}

type ChargeTriple = BTreeMap<(HaMonomial, HaMonomial, HaMonomial), Coeff>;

fn charge_insert(map: &mut ChargeTriple, key: (HaMonomial, HaMonomial, HaMonomial), c: Coeff) {
    let entry = map.entry(key).or_insert_with(Coeff::zero);
    *entry = entry.add(&c);
    if entry.is_zero() {
        map.retain(|_, v| !v.is_zero());
    }
}

fn hopf_suite(r: &mut Runner) {
    let ord = r.order(7, 8);
    r.check("hopf.coproduct_forms", ord, || {
        for t in all_trees(ord) {
            if delta_e(&t) != delta_e_recursive(&t) {
                return fail(format!("the two forms of the under coproduct differ at {}", t));
            }
            if delta_p(&t) != delta_p_recursive(&t) {
                return fail(format!("the two forms of the over coproduct differ at {}", t));
            }
        }
        Ok(())
    });

    let ord = r.order(6, 7);
    r.check("hopf.coassociativity", ord, || {
        for t in all_trees(ord) {
            if left_expand(&delta_e, &t) != right_expand(&delta_e, &t) {
                return fail(format!("under coproduct not coassociative at {}", t));
            }
            if left_expand(&delta_p, &t) != right_expand(&delta_p, &t) {
                return fail(format!("over coproduct not coassociative at {}", t));
            }
        }
        Ok(())
    });

    let ord = r.order(7, 9);
    r.check("hopf.counit", ord, || {
        for t in all_trees(ord) {
            for delta in [&delta_e as &dyn Fn(&Tree) -> TreeTensor, &delta_p] {
                let mut keep_left: BTreeMap<Tree, Coeff> = BTreeMap::new();
                let mut keep_right: BTreeMap<Tree, Coeff> = BTreeMap::new();
                for (l, rgt, c) in delta(&t).terms() {
                    if rgt.is_leaf() {
                        let e = keep_left.entry(l.clone()).or_insert_with(Coeff::zero);
                        *e = e.add(c);
                    }
                    if l.is_leaf() {
                        let e = keep_right.entry(rgt.clone()).or_insert_with(Coeff::zero);
                        *e = e.add(c);
                    }
                }
                keep_left.retain(|_, v| !v.is_zero());
                keep_right.retain(|_, v| !v.is_zero());
                let expected = BTreeMap::from([(t.clone(), Coeff::one())]);
                if keep_left != expected || keep_right != expected {
                    return fail(format!("counit law fails at {}", t));
                }
            }
        }
        Ok(())
    });

    let ord = r.order(6, 7);
    r.check("hopf.antipode", ord, || {
        if antipode_e(&Tree::leaf()) != TreePolynomial::one() {
            return fail("the antipode does not fix the unit");
        }
        for t in all_trees(ord) {
            if t.is_leaf() {
                continue;
            }
            let mut total = TreePolynomial::zero();
            for (l, rgt, c) in delta_e(&t).terms() {
                total = total.add(&antipode_e(l).mul(&TreePolynomial::from_tree(rgt)).scale(c));
            }
            if !total.is_zero() {
                return fail(format!("antipode convolution identity fails at {}", t));
            }
        }
        Ok(())
    });

    let ord = r.order(6, 7);
    let mut rng = r.rng();
    r.check("hopf.convolution_duality", ord, || {
        let x = TreeSeries::random(ord, Flavor::Invertible, &mut rng);
        let y = TreeSeries::random(ord, Flavor::Invertible, &mut rng);
        let fx = TreeFunctional::from_series(&x);
        let fy = TreeFunctional::from_series(&y);
        let under = TreeFunctional::from_series(&x.under(&y).map_err(|e| e.to_string())?);
        let conv_under = convolve_under(&fx, &fy);
        let over = TreeFunctional::from_series(&x.over(&y).map_err(|e| e.to_string())?);
        let conv_over = convolve_over(&fx, &fy);
        for t in all_trees(ord) {
            let lhs = conv_under.eval(&t).map_err(|e| e.to_string())?;
            let rhs = under.eval(&t).map_err(|e| e.to_string())?;
            if lhs != rhs {
                return fail(format!("under convolution differs at {}: {} vs {}", t, lhs, rhs));
            }
            let lhs = conv_over.eval(&t).map_err(|e| e.to_string())?;
            let rhs = over.eval(&t).map_err(|e| e.to_string())?;
            if lhs != rhs {
                return fail(format!("over convolution differs at {}: {} vs {}", t, lhs, rhs));
            }
        }
        Ok(())
    });

    let ord = r.order(5, 6);
    let mut rng = r.rng();
    r.check("hopf.antipode_inverse", ord, || {
        let x = TreeSeries::random(ord, Flavor::Invertible, &mut rng);
        let via_antipode = inverse_via_antipode(&x).map_err(|e| e.to_string())?;
        let geometric = x.inverse_under().map_err(|e| e.to_string())?;
        if via_antipode != geometric {
            if let Some((t, a, b)) = via_antipode.first_difference(&geometric) {
                return fail(format!("inverses differ at {}: {} vs {}", t, a, b));
            }
        }
        Ok(())
    });

    let ord = r.order(5, 6);
    r.check("hopf.charge_counit", ord, || {
        for t in all_trees(ord) {
            let mut strip_right = HaElement::zero();
            let mut strip_left = HaElement::zero();
            for (l, rgt, c) in delta_a(&t).terms() {
                strip_right.accumulate(c.mul(&ha_counit(rgt)), l.clone());
                strip_left.accumulate(c.mul(&ha_counit(l)), rgt.clone());
            }
            let expected = HaElement::from_monomial(HaMonomial::generator(t.clone()));
            if strip_right != expected || strip_left != expected {
                return fail(format!("charge counit law fails at {}", t));
            }
        }
        Ok(())
    });

    let ord = r.order(4, 5);
    r.check("hopf.charge_coassociativity", ord, || {
        for t in all_trees(ord) {
            let mut lhs = ChargeTriple::new();
            let mut rhs = ChargeTriple::new();
            for (l, rgt, c) in delta_a(&t).terms() {
                for (a, b, c2) in delta_a_monomial(l).terms() {
                    charge_insert(&mut lhs, (a.clone(), b.clone(), rgt.clone()), c.mul(c2));
                }
                for (a, b, c2) in delta_a_monomial(rgt).terms() {
                    charge_insert(&mut rhs, (l.clone(), a.clone(), b.clone()), c.mul(c2));
                }
            }
            if lhs != rhs {
                return fail(format!("charge coproduct not coassociative at {}", t));
            }
        }
        Ok(())
    });

    let ord = r.order(4, 5);
    r.check("hopf.coaction_laws", ord, || {
        for t in all_trees(ord) {
            let mut lhs = ChargeTriple::new();
            let mut rhs = ChargeTriple::new();
            let mut stripped = HaElement::zero();
            for (l, rgt, c) in coaction_a(&t).terms() {
                if l.indices().len() != 1 {
                    return fail(format!("coaction first leg is not a generator at {}", t));
                }
                for (a, b, c2) in coaction_a(&l.indices()[0]).terms() {
                    charge_insert(&mut lhs, (a.clone(), b.clone(), rgt.clone()), c.mul(c2));
                }
                for (a, b, c2) in delta_a_monomial(rgt).terms() {
                    charge_insert(&mut rhs, (l.clone(), a.clone(), b.clone()), c.mul(c2));
                }
                stripped.accumulate(c.mul(&ha_counit(rgt)), l.clone());
            }
            if lhs != rhs {
                return fail(format!("coaction compatibility fails at {}", t));
            }
            if stripped != HaElement::from_monomial(HaMonomial::generator(t.clone())) {
                return fail(format!("coaction counit law fails at {}", t));
            }
        }
        Ok(())
    });
}

// ---------------------------------------------------------------------------
// dyson

fn random_matrix(dim: usize, rng: &mut impl Rng) -> RatMatrix {
    let mut m = RatMatrix::zero(dim);
    for i in 0..dim {
        for j in 0..dim {
            let num = rng.gen_range(-4i64..=4);
            let den = rng.gen_range(1i64..=3);
            m.set(i, j, BigRational::new(BigInt::from(num), BigInt::from(den)));
        }
    }
    m
}

fn dyson_suite(r: &mut Runner) {
    for dim in [2usize, 3] {
        let ord = r.order(6, 8);
        let seed = r.seed;
        let id = format!("dyson.aggregation_dim{}", dim);
        r.check(&id, ord, || {
            let alg = matrix_algebra_instance(dim, seed);
            let report = aggregate_check(&alg, ord).map_err(|e| e.to_string())?;
            match report.failure {
                None => Ok(()),
                Some(f) => fail(format!(
                    "order {} family {:?}: tree sum {} but order value {}",
                    f.order, f.family, f.tree_sum, f.order_value
                )),
            }
        });
    }

    let ord = r.order(6, 8);
    let seed = r.seed;
    let mut rng = r.rng();
    r.check("dyson.kernel_bilinearity", ord, || {
        for dim in [2usize, 3] {
            let alg = matrix_algebra_instance(dim, seed);
            let a = random_matrix(dim, &mut rng);
            let b = random_matrix(dim, &mut rng);
            let c = random_matrix(dim, &mut rng);
            let sum = a.add(&b);
            if alg.phi_s(&sum, &c) != alg.phi_s(&a, &c).add(&alg.phi_s(&b, &c)) {
                return fail(format!("phi_s is not left additive at dim {}", dim));
            }
            if alg.phi_s(&c, &sum) != alg.phi_s(&c, &a).add(&alg.phi_s(&c, &b)) {
                return fail(format!("phi_s is not right additive at dim {}", dim));
            }
            if alg.phi_d(&sum, &c) != alg.phi_d(&a, &c).add(&alg.phi_d(&b, &c)) {
                return fail(format!("phi_d is not left additive at dim {}", dim));
            }
            let half = BigRational::new(BigInt::from(1), BigInt::from(2));
            if alg.phi_d(&a.scale(&half), &c) != alg.phi_d(&a, &c).scale(&half) {
                return fail(format!("phi_d does not commute with scaling at dim {}", dim));
            }
        }
        Ok(())
    });

    let ord = r.order(6, 8);
    let seed = r.seed;
    if ord < 3 {
        r.skip("dyson.control_divergence", ord);
    } else {
        r.check("dyson.control_divergence", ord, || {
            for dim in [2usize, 3] {
                let control = non_bilinear_control(dim, seed);
                let clean = aggregate_check(&control, 2).map_err(|e| e.to_string())?;
                if !clean.passed() {
                    return fail(format!(
                        "dim {}: the control already fails below order 3",
                        dim
                    ));
                }
                let report = aggregate_check(&control, ord).map_err(|e| e.to_string())?;
                match report.failure {
                    Some(f) if f.order == 3 && f.family == Family::S => {}
                    Some(f) => {
                        return fail(format!(
                            "dim {}: control first diverges at order {} family {:?}",
                            dim, f.order, f.family
                        ))
                    }
                    None => {
                        return fail(format!(
                            "dim {}: the non-bilinear control never diverged",
                            dim
                        ))
                    }
                }
            }
            Ok(())
        });
    }
    let _ = dyson::DYSON_CAP;
}
