//! Acceptance run: one PASS/FAIL line per criterion, then a non-zero exit
//! if any criterion failed. Bounds are pinned here rather than read from
//! the library defaults.

use std::f64::consts::PI;
use std::time::Instant;

use carnot_polar::capacity::{ring_capacity, CapacityMethod, RingSpec};
use carnot_polar::group::builtin;
use carnot_polar::integrate::{catalog_integrand, IntegrationJob, Method, PolarSystem};
use carnot_polar::norms::{derive_kaplan_constant, HomNorm, KAPLAN_SEED};
use carnot_polar::verify::{verify, CheckResult, Condition, SamplingConfig, Tolerances, VerificationReport};
use carnot_polar::weak::{predicted_weak_ratio, weak_fundamental_check, Bump, BumpProfile};

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { pass: true, detail: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: String) {
        self.pass &= ok;
        self.detail.push(if ok { what } else { format!("{what} <-- FAIL") });
    }

    fn bound(&mut self, label: &str, value: f64, bound: f64) {
        self.check(value <= bound, format!("{label} = {value:.3e} (<= {bound:.0e})"));
    }
}

fn norm(name: &str) -> HomNorm {
    HomNorm::folland(&builtin(name).unwrap()).unwrap()
}

fn run(conds: &[Condition], group: &str, cfg: &SamplingConfig) -> (VerificationReport, f64) {
    let t = Instant::now();
    let r = verify(&builtin(group).unwrap(), conds, cfg, &Tolerances::default(), false).expect("verify runs");
    (r, t.elapsed().as_secs_f64())
}

fn max_of(r: &VerificationReport, key: &str) -> f64 {
    match r.check(key) {
        Some(CheckResult { stats: Some(s), .. }) => s.max,
        _ => f64::NAN,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn criterion_1(cfg: &SamplingConfig) -> Outcome {
    let mut o = Outcome::new();
    for (g, bound) in [("heis1", 1e-8), ("heis2", 1e-8), ("quaternionic", 1e-8), ("euclid3", 1e-10)] {
        let (r, secs) = run(&[Condition::I], g, cfg);
        o.check(r.points >= 1000, format!("{g}: {} points", r.points));
        o.bound(&format!("{g} max N|L_inf N|/|grad N|^4"), max_of(&r, "i.linf"), bound);
        o.bound(&format!("{g} seconds"), secs, 10.0);
    }
    o
}

fn criterion_2(cfg: &SamplingConfig) -> Outcome {
    let mut o = Outcome::new();
    for g in ["heis1", "heis2", "quaternionic", "euclid3"] {
        let q = builtin(g).unwrap().hom_dimension() as f64;
        let mut ps = vec![1.5, 2.0, 3.0, q, 10.0];
        ps.dedup();
        let cfg = SamplingConfig { p_values: Some(ps.clone()), ..cfg.clone() };
        let (r, secs) = run(&[Condition::II], g, &cfg);
        for p in ps {
            let bound = if p == 2.0 { 1e-9 } else { 1e-7 };
            o.bound(&format!("{g} p={p}"), max_of(&r, &format!("ii.p={p}")), bound);
        }
        o.bound(&format!("{g} seconds"), secs, 30.0);
    }
    o
}

fn criterion_3(reports: &[(&str, VerificationReport)]) -> Outcome {
    let mut o = Outcome::new();
    for (g, r) in reports.iter().filter(|(g, _)| g.starts_with("heis")) {
        let curves = r.check("iii.ode_closed").and_then(|c| c.stats).map_or(0, |s| s.samples);
        o.check(curves >= 100 * 21, format!("{g}: {curves} ode/closed samples"));
        o.bound(&format!("{g} ode vs closed"), max_of(r, "iii.ode_closed"), 1e-8);
        o.bound(&format!("{g} N(gamma)=s"), max_of(r, "iii.on_sphere"), 1e-9);
        o.bound(&format!("{g} collinearity"), max_of(r, "iii.collinearity"), 1e-9);
        o.bound(&format!("{g} speed"), max_of(r, "iii.speed"), 1e-9);
        o.bound(&format!("{g} semigroup"), max_of(r, "iii.semigroup"), 1e-8);
    }
    o
}

fn criterion_4(reports: &[(&str, VerificationReport)]) -> Outcome {
    let mut o = Outcome::new();
    for (g, r) in reports {
        o.bound(&format!("{g} sublaplacian identity"), max_of(r, "iii.sublaplacian_identity"), 1e-9);
        o.bound(&format!("{g} div identity"), max_of(r, "iii.div_identity"), 1e-7);
        o.bound(&format!("{g} s-spread"), max_of(r, "iii.density_spread"), 1e-6);
    }
    o
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::new();
    let t = Instant::now();
    let sys = PolarSystem::new(&norm("heis1")).unwrap();
    let value = |name: &str, m: Method| {
        let ig = catalog_integrand(name, sys.norm()).unwrap();
        sys.integrate(&IntegrationJob::new(ig, m).with_tol(1e-9)).unwrap()
    };
    let horizontal = value("gauss-quartic", Method::PolarHorizontal).value;
    let tensor = value("gauss-quartic", Method::AmbientTensor).value;
    o.bound("exp(-N^4) polar vs tensor", rel(horizontal, tensor), 1e-6);
    let nonradial = value("nonradial", Method::PolarHorizontal).value;
    let mc = value("nonradial", Method::AmbientMonteCarlo { samples: 10_000_000, seed: SEED });
    let z = (mc.value - nonradial).abs() / mc.error_estimate;
    o.check(z <= 3.0, format!("nonradial polar {nonradial:.6} vs mc {:.6} +- {:.1e}: {z:.2} se (<= 3)", mc.value, mc.error_estimate));
    for name in ["gauss-quartic", "shell", "ball"] {
        let h = value(name, Method::PolarHorizontal).value;
        o.bound(&format!("{name} dilation vs horizontal"), rel(value(name, Method::PolarDilation).value, h), 1e-6);
        o.bound(&format!("{name} arclength vs horizontal"), rel(value(name, Method::PolarArcLength).value, h), 1e-6);
    }
    o.bound("seconds", t.elapsed().as_secs_f64(), 120.0);
    o
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new();
    let e = PolarSystem::new(&norm("euclid3")).unwrap();
    let c = ring_capacity(&e, &RingSpec::new(1.0, 2.0, 2.0).unwrap(), CapacityMethod::Polar, 1e-10).unwrap();
    o.bound("R^3 cap_2(1,2) vs 8 pi", rel(c, 8.0 * PI), 1e-6);
    let h = PolarSystem::new(&norm("heis1")).unwrap();
    for p in [2.0, 3.0, 6.0] {
        let base = RingSpec::new(1.0, 1.5, p).unwrap();
        let c1 = ring_capacity(&h, &base, CapacityMethod::Polar, 1e-11).unwrap();
        let c2 = ring_capacity(&h, &base.scaled(2.0).unwrap(), CapacityMethod::Polar, 1e-11).unwrap();
        o.bound(&format!("H^1 p={p} scaling 2^(Q-p)"), rel(c2, 2f64.powf(4.0 - p) * c1), 1e-8);
    }
    let a = ring_capacity(&h, &RingSpec::new(1.0, 2.0, 4.0).unwrap(), CapacityMethod::Polar, 1e-10).unwrap();
    let b = ring_capacity(&h, &RingSpec::new(3.0, 6.0, 4.0).unwrap(), CapacityMethod::Polar, 1e-10).unwrap();
    o.bound("H^1 cap_Q(1,2) vs cap_Q(3,6)", rel(a, b), 1e-6);
    o
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::new();
    let fit = derive_kaplan_constant(&builtin("htype-heis1").unwrap(), KAPLAN_SEED).unwrap();
    o.bound("H^1 as H-type |c - 1|", (fit.c - 1.0).abs(), 1e-8);
    o.bound("H^1 as H-type residual", fit.max_residual, 1e-8);
    let q = builtin("quaternionic").unwrap();
    let a = derive_kaplan_constant(&q, KAPLAN_SEED).unwrap();
    let b = derive_kaplan_constant(&q, KAPLAN_SEED ^ 0x9e37_79b9).unwrap();
    o.bound("quaternionic c across seeds", rel(a.c, b.c), 1e-8);
    o.bound("quaternionic residual", a.max_residual.max(b.max_residual), 1e-8);
    o.detail.push(format!("quaternionic c = {:.12}", a.c));
    o
}

fn criterion_8() -> Outcome {
    let mut o = Outcome::new();
    let h = PolarSystem::new(&norm("heis1")).unwrap();
    let ratios: Vec<f64> = BumpProfile::catalog()
        .iter()
        .map(|p| weak_fundamental_check(&h, 2.0, &Bump::new(h.spec(), *p), 1e-9).unwrap().ratio)
        .collect();
    let mx = ratios.iter().copied().fold(f64::MIN, f64::max);
    let mn = ratios.iter().copied().fold(f64::MAX, f64::min);
    o.bound("H^1 p=2 spread across 3 bumps", (mx - mn) / mx.abs(), 1e-4);
    let predicted = predicted_weak_ratio(&h, 2.0, 1e-12).unwrap();
    o.bound("H^1 ratio vs sphere moment", rel(ratios[0], predicted), 1e-4);
    o.detail.push(format!("H^1 ratio = {:.10}", ratios[0]));
    let e = PolarSystem::new(&norm("euclid3")).unwrap();
    let w = weak_fundamental_check(&e, 2.0, &Bump::new(e.spec(), BumpProfile::Round { radius: 1.0 }), 1e-10).unwrap();
    o.bound("R^3 ratio vs 4 pi", rel(w.ratio, 4.0 * PI), 1e-6);
    o
}

fn criterion_9(cfg: &SamplingConfig) -> Outcome {
    let mut o = Outcome::new();
    let conds = [Condition::I, Condition::II, Condition::III];
    let a = run(&conds, "heis1", cfg).0.render();
    let b = run(&conds, "heis1", cfg).0.render();
    o.check(a == b, format!("two heis1 reports, {} bytes, identical = {}", a.len(), a == b));
    o
}

fn main() {
    let cfg = SamplingConfig { seed: SEED, ..Default::default() };
    let mut results: Vec<(u8, &str, Outcome, f64)> = Vec::new();
    let mut timed = |id: u8, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        results.push((id, name, o, t.elapsed().as_secs_f64()));
    };
    timed(1, "condition (i): infinity-Laplacian of N", &mut || criterion_1(&cfg));
    timed(2, "condition (ii): p-Laplacian of u_p", &mut || criterion_2(&cfg));
    let t = Instant::now();
    let reports: Vec<(&str, VerificationReport)> = ["heis1", "heis2", "quaternionic", "htype-heis1-j2"]
        .into_iter()
        .map(|g| (g, run(&[Condition::III], g, &cfg).0))
        .collect();
    let iii_secs = t.elapsed().as_secs_f64();
    timed(3, "condition (iii): polar flow", &mut || {
        let mut o = criterion_3(&reports);
        o.detail.push(format!("condition (iii) runs on 4 groups took {iii_secs:.2}s"));
        o
    });
    timed(4, "divergence identities and volume density", &mut || criterion_4(&reports));
    timed(5, "integration formulas", &mut criterion_5);
    timed(6, "ring capacity", &mut criterion_6);
    timed(7, "Kaplan constant", &mut criterion_7);
    timed(8, "weak representation", &mut criterion_8);
    timed(9, "determinism", &mut || criterion_9(&cfg));

    println!();
    let mut all = true;
    for (id, name, o, secs) in &results {
        all &= o.pass;
        println!("{} criterion {id}: {name} ({secs:.2}s)", if o.pass { "PASS" } else { "FAIL" });
        for d in &o.detail {
            println!("    {d}");
        }
    }
    let failed = results.iter().filter(|r| !r.2.pass).count();
    println!("\nacceptance: {} passed, {failed} failed", results.len() - failed);
    if !all {
        std::process::exit(1);
    }
}
