//! Acceptance checks. Prints one line per criterion and exits nonzero if any fails.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use optdesign_core::conditional::{
    dominates_matrices, find_dominator, marginal_model, recompose_check, Budget, SliceMap, Verdict,
};
use optdesign_core::linalg::SymEigen;
use optdesign_core::*;
use std::result::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn pt(c: &[f64]) -> Point {
    Point::new(c.to_vec())
}

fn linear2() -> (ModelSpec, CandidateSet) {
    let m = ModelSpec::with_default_space(Family::Linear2fNoIntercept).unwrap();
    let c = discretize(m.space(), &[0.01, 0.01]).unwrap();
    (m, c)
}

/// Weight at (1,1) of the optimal design on the two-factor linear model.
fn weight_law(p: f64) -> f64 {
    if p == f64::NEG_INFINITY {
        0.0
    } else {
        1.0 - 4.0 / (3.0 + 3f64.powf(1.0 / (1.0 - p)))
    }
}

const LAW_EXPONENTS: [f64; 5] = [0.5, 0.0, -1.0, -2.0, f64::NEG_INFINITY];

fn law_solves() -> Result<Vec<(f64, SolveReport, Duration)>, String> {
    let (m, c) = linear2();
    LAW_EXPONENTS
        .iter()
        .map(|&p| {
            let t = Instant::now();
            let r = solve(&m, &c, &Criterion::new(p).map_err(e)?, &SolverOptions::default()).map_err(e)?;
            Ok((p, r, t.elapsed()))
        })
        .collect()
}

fn c1_weight_law(runs: &[(f64, SolveReport, Duration)]) -> Check {
    const TOL: f64 = 1e-4;
    let mut worst: f64 = 0.0;
    let mut slowest = Duration::ZERO;
    for (p, r, dt) in runs {
        let w = weight_law(*p);
        let rest = (1.0 - w) / 2.0;
        let d = &r.design;
        ensure(r.converged, || format!("p={p}: not converged"))?;
        let expected: Vec<(Point, f64)> = [(pt(&[1.0, 1.0]), w), (pt(&[1.0, 0.0]), rest), (pt(&[0.0, 1.0]), rest)]
            .into_iter()
            .filter(|(_, w)| *w > 0.0)
            .collect();
        ensure(d.len() == expected.len(), || format!("p={p}: {} atoms, expected {}", d.len(), expected.len()))?;
        for (x, want) in &expected {
            let got = d.weight_at(x);
            worst = worst.max((got - want).abs());
            ensure((got - want).abs() <= TOL, || format!("p={p}: weight {got} at {x}, expected {want}"))?;
        }
        slowest = slowest.max(*dt);
        ensure(*dt < Duration::from_secs(5), || format!("p={p}: {dt:?} exceeds 5 s"))?;
    }
    Ok(format!("max weight error {worst:.1e} (tol {TOL:.0e}), slowest case {:.2} s", slowest.as_secs_f64()))
}

fn c2_matrices(runs: &[(f64, SolveReport, Duration)]) -> Check {
    const TOL: f64 = 1e-4;
    let (m, _) = linear2();
    let d_run = &runs.iter().find(|r| r.0 == 0.0).unwrap().1;
    let e_run = &runs.iter().find(|r| r.0 == f64::NEG_INFINITY).unwrap().1;
    let md = info_matrix(&d_run.design, &m).map_err(e)?.into_inner();
    let me = info_matrix(&e_run.design, &m).map_err(e)?.into_inner();
    let want_d = DMatrix::from_row_slice(2, 2, &[2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0]);
    let want_e = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.5]);
    let (ed, ee) = ((md - want_d).amax(), (me - want_e).amax());
    ensure(ed <= TOL && ee <= TOL, || format!("entry errors D {ed:.2e}, E {ee:.2e}"))?;
    Ok(format!("entry errors D {ed:.1e}, E {ee:.1e} (tol {TOL:.0e})"))
}

fn c3_duality(runs: &[(f64, SolveReport, Duration)]) -> Check {
    const TOL: f64 = 1e-5;
    let (m, c) = linear2();
    let mut worst: f64 = 0.0;
    for (p, r, _) in runs {
        let rep = certify(&r.design, &m, &c, &Criterion::new(*p).map_err(e)?, TOL).map_err(e)?;
        let devs = [
            (rep.trace_mn - 1.0).abs(),
            (rep.phi_times_polar - 1.0).abs(),
            rep.max_violation,
            rep.max_support_deviation,
        ];
        let m = devs.iter().copied().fold(0.0, f64::max);
        worst = worst.max(m);
        ensure(rep.optimal && m <= TOL, || format!("p={p}: deviations {devs:?}"))?;
    }
    Ok(format!("largest deviation {worst:.1e} (tol {TOL:.0e}) over {} designs", runs.len()))
}

fn c4_geometry(runs: &[(f64, SolveReport, Duration)]) -> Check {
    const TOL: f64 = 1e-4;
    let (m, c) = linear2();
    let d = &runs.iter().find(|r| r.0 == 0.0).unwrap().1.design;
    let rep = certify(d, &m, &c, &Criterion::D, 1e-5).map_err(e)?;
    let poly = polytope_report(&rep.certificate, d, &m, &c, 1e-5).map_err(e)?;
    ensure(poly.hyperplanes.len() == 2, || format!("{} hyperplanes", poly.hyperplanes.len()))?;
    let find = |want: [f64; 2]| {
        poly.hyperplanes
            .iter()
            .find(|h| (h.c[0] - want[0]).abs() <= TOL && (h.c[1] - want[1]).abs() <= TOL)
            .ok_or_else(|| format!("no hyperplane with c = {want:?}"))
    };
    let half = find([0.5, 0.5])?;
    let two = find([0.0, 2.0])?;
    let mut pair = half.active_support.clone();
    pair.sort_by(|a, b| a.coords().partial_cmp(b.coords()).unwrap());
    ensure(pair == vec![pt(&[0.0, 1.0]), pt(&[1.0, 0.0])], || format!("c=(1/2,1/2) holds {pair:?}"))?;
    ensure(two.active_support == vec![pt(&[1.0, 1.0])], || format!("c=(0,2) holds {:?}", two.active_support))?;
    ensure(half.lengths.iter().all(|l| (l - 1.0).abs() <= 1e-12), || format!("lengths {:?}", half.lengths))?;
    Ok("c=(1/2,1/2) at (1,0),(0,1) with lengths 1; c=(0,2) at (1,1)".into())
}

fn c5_saturation() -> Check {
    let mut times = Vec::new();
    for d in [2usize, 3, 4] {
        let m = ModelSpec::with_default_space(Family::WeightedPolynomial { degree: d, efficiency: Efficiency::Constant(1.0) })
            .map_err(e)?;
        let c = discretize(m.space(), &[0.001]).map_err(e)?;
        ensure(c.len() == 1001, || format!("{} grid points", c.len()))?;
        let t = Instant::now();
        let g = garza_report(&m, &c, 1e-12).map_err(e)?;
        ensure(g.injective && g.saturation_bound == d + 1, || format!("d={d}: injective {}, bound {}", g.injective, g.saturation_bound))?;
        let r = solve(&m, &c, &Criterion::D, &SolverOptions::default()).map_err(e)?;
        let dt = t.elapsed();
        ensure(r.converged && r.design.len() == d + 1, || format!("d={d}: {} atoms, converged {}", r.design.len(), r.converged))?;
        ensure(dt < Duration::from_secs(10), || format!("d={d}: {dt:?} exceeds 10 s"))?;
        times.push(format!("{:.1}", dt.as_secs_f64()));
    }
    Ok(format!("injective, d+1 atoms for d=2,3,4; times {} s", times.join("/")))
}

/// Random amplitudes and rates with `lambda_i >= |a_i| / 2`.
fn exp_draw(rng: &mut ChaCha8Rng, l: usize) -> (Vec<f64>, Vec<f64>) {
    let mut rates = Vec::with_capacity(l);
    let mut lam = rng.random_range(0.5..1.5);
    for _ in 0..l {
        rates.push(lam);
        lam += rng.random_range(0.5..2.0);
    }
    let amps = rates
        .iter()
        .map(|&r| {
            let a = rng.random_range(0.2..2.0 * r);
            if rng.random_bool(0.5) {
                a
            } else {
                -a
            }
        })
        .collect();
    (amps, rates)
}

/// Solves on `[0, 3/lambda_1]`, enlarging while certification flags the truncation.
fn exp_solve(a: &[f64], lam: &[f64]) -> Result<(CandidateSet, SolveReport, CertifyReport), String> {
    let mut hi = 3.0 / lam[0];
    for _ in 0..4 {
        let family = Family::ExponentialSum { amplitudes: a.to_vec(), rates: lam.to_vec() };
        let base = ModelSpec::with_default_space(family).map_err(e)?;
        let space = truncate(base.space(), 0, hi).map_err(e)?;
        let m = base.with_space(space.clone()).map_err(e)?;
        let c = discretize(&space, &[hi / 600.0]).map_err(e)?;
        let r = solve(&m, &c, &Criterion::D, &SolverOptions::default()).map_err(e)?;
        let rep = certify(&r.design, &m, &c, &Criterion::D, 2e-5).map_err(e)?;
        if rep.warnings.is_empty() {
            return Ok((c, r, rep));
        }
        hi *= 2.0;
    }
    Err(format!("a={a:?} lambda={lam:?}: truncation never slack"))
}

fn c6_exponential() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let draws: Vec<(usize, Vec<f64>, Vec<f64>)> =
        [1usize, 2].iter().flat_map(|&l| (0..5).map(move |_| l)).map(|l| {
            let (a, lam) = exp_draw(&mut rng, l);
            (l, a, lam)
        }).collect();
    let results: Vec<Result<String, String>> = draws
        .par_iter()
        .map(|(l, a, lam)| {
            ensure(exp_saturation_check(a, lam).map_err(e)?.holds, || format!("draw {a:?} {lam:?} violates the condition"))?;
            let (c, r, rep) = exp_solve(a, lam)?;
            ensure(rep.optimal, || format!("a={a:?} lambda={lam:?}: not certified"))?;
            ensure(r.design.len() == 2 * l, || format!("a={a:?} lambda={lam:?}: {} atoms", r.design.len()))?;
            for scale in [0.5, 2.0] {
                let chk = rescale_invariance_check(a, lam, scale, &c, &SolverOptions::default()).map_err(e)?;
                ensure(chk.coincide, || {
                    format!("a={a:?} lambda={lam:?} c={scale}: distance {}, weight diff {}", chk.max_support_distance, chk.max_weight_difference)
                })?;
            }
            Ok(format!("{}", r.design.len()))
        })
        .collect();
    let counts: Vec<String> = results.into_iter().collect::<Result<_, _>>()?;
    Ok(format!("atom counts {} over 5 draws per L; rescaled designs coincide for c=0.5,2", counts.join(",")))
}

fn c7_growth() -> Check {
    const TOL: f64 = 1e-3;
    let m = ModelSpec::with_default_space(Family::ExpGrowth2f { theta: [0.0, 1.0, 1.0] }).map_err(e)?;
    let c = discretize(m.space(), &[0.01, 0.01]).map_err(e)?;
    let r = solve(&m, &c, &Criterion::D, &SolverOptions::default()).map_err(e)?;
    ensure(certify(&r.design, &m, &c, &Criterion::D, 2e-5).map_err(e)?.optimal, || "not certified".into())?;
    ensure(r.design.len() == 4, || format!("{} atoms", r.design.len()))?;
    let mut worst: f64 = 0.0;
    for x in [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]] {
        worst = worst.max((r.design.weight_at(&pt(&x)) - 0.25).abs());
    }
    ensure(worst <= TOL, || format!("weight error {worst}"))?;
    Ok(format!("four corners at 1/4, max error {worst:.1e} (tol {TOL:.0e})"))
}

fn registered_pairs() -> Vec<(ModelSpec, SliceMap)> {
    let product = ModelSpec::new(Family::ExpProduct2f { theta: [1.0, 0.5, 0.8] }, DesignSpace::unit_cube(2)).unwrap();
    let inter = ModelSpec::with_default_space(Family::Interaction2f).unwrap();
    let growth = ModelSpec::with_default_space(Family::ExpGrowth2f { theta: [0.0, 1.0, 1.0] }).unwrap();
    let mix = ModelSpec::with_default_space(Family::MixturePolyExp { theta3: 1.0 }).unwrap();
    vec![
        (inter.clone(), SliceMap::coordinate(0)),
        (inter.clone(), SliceMap::coordinate(1)),
        (inter, SliceMap::linear(vec![1.0, 1.0]).unwrap()),
        (growth.clone(), SliceMap::coordinate(0)),
        (growth, SliceMap::coordinate(1)),
        (product.clone(), SliceMap::coordinate(0)),
        (product.clone(), SliceMap::coordinate(1)),
        (product, SliceMap::linear(vec![0.5, 0.8]).unwrap()),
        (mix.clone(), SliceMap::coordinate(0)),
        (mix, SliceMap::coordinate(1)),
        (ModelSpec::with_default_space(Family::Polynomial { degree: 3 }).unwrap(), SliceMap::coordinate(0)),
    ]
}

fn c8_recomposition() -> Check {
    const TOL: f64 = 1e-10;
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    let pairs = registered_pairs();
    for (model, tmap) in &pairs {
        let grid = discretize(model.space(), &vec![0.1; model.q()]).map_err(e)?;
        for _ in 0..50 {
            let n = rng.random_range(1..13);
            let atoms = (0..n)
                .map(|_| (grid.points()[rng.random_range(0..grid.len())].clone(), rng.random_range(0.05..1.0)))
                .collect();
            let d = Design::normalized(atoms).map_err(e)?;
            worst = worst.max(recompose_check(&d, tmap, model).map_err(e)?);
        }
    }
    let dt = t.elapsed();
    ensure(worst <= TOL, || format!("max error {worst:e}"))?;
    ensure(dt < Duration::from_secs(2), || format!("{dt:?} exceeds 2 s"))?;
    Ok(format!("max error {worst:.1e} (tol {TOL:.0e}) over {} pairs x 50 designs in {:.2} s", pairs.len(), dt.as_secs_f64()))
}

fn c9_admissibility() -> Check {
    const STEP: f64 = 0.05;
    let growth = ModelSpec::new(
        Family::ExpGrowth2f { theta: [0.0, 1.0, 1.0] },
        DesignSpace::new(vec![Interval::new(0.0, 3.0), Interval::new(0.0, 3.0)]).unwrap(),
    )
    .map_err(e)?;
    let (m, _) = marginal_model(&growth, 0).map_err(e)?;
    let c = discretize(m.space(), &[STEP]).map_err(e)?;
    let budget = Budget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let designs: Vec<Design> = (0..20)
        .map(|_| {
            let mut idx: Vec<usize> = Vec::new();
            while idx.len() < 3 {
                let i = rng.random_range(0..c.len());
                if !idx.contains(&i) {
                    idx.push(i);
                }
            }
            Design::normalized(idx.iter().map(|&i| (c.points()[i].clone(), rng.random_range(0.1..1.0))).collect()).unwrap()
        })
        .collect();
    let found: Vec<Result<f64, String>> = designs
        .par_iter()
        .map(|d| {
            let v = find_dominator(d, &c, &m, &budget).map_err(e)?;
            let dom = v.dominator.filter(|_| v.verdict == Verdict::Inadmissible).ok_or_else(|| format!("{d:?}: {}", v.verdict.name()))?;
            ensure(dominates(&dom, d, &m, budget.tol).map_err(e)?, || "returned dominator fails re-verification".into())?;
            let far = dom
                .points()
                .iter()
                .map(|p| p.coords()[0].abs().min((p.coords()[0] - 1.0).abs()))
                .fold(0.0, f64::max);
            ensure(far <= STEP * (1.0 + 1e-9), || format!("dominator support {:?} strays {far}", dom.points()))?;
            Ok(far)
        })
        .collect();
    let fars: Vec<f64> = found.into_iter().collect::<Result<_, _>>()?;
    let two = Design::new(vec![(pt(&[0.0]), 0.5), (pt(&[1.0]), 0.5)]).map_err(e)?;
    let v = find_dominator(&two, &c, &m, &budget).map_err(e)?;
    ensure(v.verdict == Verdict::NoDominatorFound, || format!("{{0,1}} design: {}", v.verdict.name()))?;
    let worst = fars.iter().copied().fold(0.0, f64::max);
    Ok(format!("20/20 dominated, dominator support within {worst:.2} of {{0,1}} (step {STEP}); {{0,1}} not dominated"))
}

fn c10_mixture() -> Check {
    const STEP: f64 = 0.02;
    let m = ModelSpec::with_default_space(Family::MixturePolyExp { theta3: 1.0 }).map_err(e)?;
    let c = discretize(m.space(), &[STEP, STEP]).map_err(e)?;
    let r = solve(&m, &c, &Criterion::D, &SolverOptions::default()).map_err(e)?;
    ensure(certify(&r.design, &m, &c, &Criterion::D, 2e-5).map_err(e)?.optimal, || "not certified".into())?;
    ensure(r.design.len() == 8, || format!("{} atoms", r.design.len()))?;
    let distinct = |axis: usize| {
        let mut v: Vec<f64> = r.design.points().iter().map(|p| p.coords()[axis]).collect();
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);
        v
    };
    let (x1, x2) = (distinct(0), distinct(1));
    ensure(x2.len() == 2 && x2[0] == 0.0 && (x2[1] - 1.0).abs() <= 2.0 * STEP, || format!("x2 levels {x2:?}"))?;
    ensure(x1.len() == 4 && x1[0] == -1.0 && x1[3] == 1.0, || format!("x1 levels {x1:?}"))?;
    ensure((x1[1] + x1[2]).abs() <= STEP * (1.0 + 1e-9), || format!("interior levels {x1:?} not symmetric"))?;
    for a in &x1 {
        for b in &x2 {
            ensure(r.design.weight_at(&pt(&[*a, *b])) > 0.0, || format!("({a}, {b}) missing from the product support"))?;
        }
    }
    let u = x1[2];
    let product = Design::uniform(x1.iter().flat_map(|a| x2.iter().map(move |b| pt(&[*a, *b]))).collect()).map_err(e)?;
    let uniform_ok = certify(&product, &m, &c, &Criterion::D, 2e-5).map_err(e)?.optimal;
    Ok(format!(
        "8 atoms on {{-1,-{u:.4},{u:.4},1}} x {{0,{:.4}}}; uniform product design certified: {uniform_ok}",
        x2[1]
    ))
}

fn pd(rng: &mut ChaCha8Rng, k: usize, shift: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(k, k, |_, _| rng.random_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(k, k) * shift
}

fn c11_properties() -> Check {
    const N: usize = 200;
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let exps = [f64::NEG_INFINITY, -5.0, -2.0, -1.0, -0.5, 0.0, 0.3, 0.5, 1.0];
    let info = |m: DMatrix<f64>| InfoMatrix::new(m).unwrap();
    let mut cases = 0;
    for i in 0..N {
        let p = exps[i % exps.len()];
        let crit = Criterion::new(p).map_err(e)?;
        let k = 1 + i % 4;
        let m1 = pd(&mut rng, k, 0.05);
        let s = rng.random_range(0.01..50.0);
        let a = phi(&crit, &info(m1.clone())).map_err(e)?;
        let b = phi(&crit, &info(&m1 * s)).map_err(e)?;
        ensure((b - s * a).abs() <= 1e-10 * s * a, || format!("homogeneity p={p}: {b} vs {}", s * a))?;
        let m2 = &m1 + pd(&mut rng, k, 0.0);
        let b = phi(&crit, &info(m2)).map_err(e)?;
        ensure(b >= a - 1e-10 * a.max(1.0), || format!("isotonicity p={p}: {b} < {a}"))?;
        cases += 2;
        if p < 1.0 {
            let n = pd(&mut rng, k, 0.1);
            let closed = polar(&crit, &info(n.clone())).map_err(e)?.value();
            let ratio = |c: &DMatrix<f64>| (c * &n).trace() / phi(&crit, &info(c.clone())).unwrap();
            let mut best = f64::INFINITY;
            for _ in 0..200 {
                best = best.min(ratio(&pd(&mut rng, k, 0.01)));
            }
            ensure(best >= closed - 1e-8 * closed.max(1.0), || format!("polar p={p}: probe {best} < {closed}"))?;
            if p.is_finite() {
                let q = crit.conjugate().p();
                let arg = SymEigen::new(&n).apply(|v| v.powf(q - 1.0));
                ensure((ratio(&arg) - closed).abs() <= 1e-6 * closed.max(1.0), || format!("polar p={p}: minimizer misses"))?;
            }
            cases += 1;
        }
    }
    let m = ModelSpec::with_default_space(Family::Interaction2f).map_err(e)?;
    let grid = discretize(m.space(), &[0.1, 0.1]).map_err(e)?;
    let random_design = |rng: &mut ChaCha8Rng| {
        let n = rng.random_range(1..8);
        Design::normalized((0..n).map(|_| (grid.points()[rng.random_range(0..grid.len())].clone(), rng.random_range(0.05..1.0))).collect())
            .unwrap()
    };
    for _ in 0..N {
        let (d1, d2) = (random_design(&mut rng), random_design(&mut rng));
        let alpha = rng.random_range(0.0..=1.0);
        let lhs = info_matrix(&d1.mix(&d2, alpha).map_err(e)?, &m).map_err(e)?.into_inner();
        let rhs = info_matrix(&d1, &m).map_err(e)?.into_inner() * alpha + info_matrix(&d2, &m).map_err(e)?.into_inner() * (1.0 - alpha);
        ensure((lhs - rhs).amax() <= 1e-12, || "information matrix not linear in the design".into())?;
        ensure(!dominates(&d1, &d1, &m, 1e-9).map_err(e)?, || "dominance not irreflexive".into())?;
        cases += 2;
    }
    for i in 0..N {
        let k = 1 + i % 4;
        let c = pd(&mut rng, k, 0.1);
        let b = &c + pd(&mut rng, k, 0.01);
        let a = &b + pd(&mut rng, k, 0.01);
        let tol = 1e-9;
        ensure(dominates_matrices(&a, &b, tol) && dominates_matrices(&b, &c, tol), || "chain not dominated".into())?;
        ensure(dominates_matrices(&a, &c, tol), || "dominance not transitive".into())?;
        ensure(!dominates_matrices(&c, &a, tol) && !dominates_matrices(&a, &a, tol), || "dominance not strict".into())?;
        cases += 3;
    }
    let dt = t.elapsed();
    ensure(dt < Duration::from_secs(60), || format!("{dt:?} exceeds 60 s"))?;
    Ok(format!("{cases} seeded instances passed in {:.2} s", dt.as_secs_f64()))
}

fn main() {
    let start = Instant::now();
    let runs = law_solves();
    let from_runs = |f: fn(&[(f64, SolveReport, Duration)]) -> Check| match &runs {
        Ok(r) => f(r),
        Err(msg) => Err(msg.clone()),
    };
    let results: Vec<(&str, Check)> = vec![
        ("weight law on the two-factor linear model", from_runs(c1_weight_law)),
        ("D- and E-optimal information matrices", from_runs(c2_matrices)),
        ("duality certificates for the weight-law designs", from_runs(c3_duality)),
        ("supporting hyperplanes of the D-optimal design", from_runs(c4_geometry)),
        ("injective norm and d+1 atoms for polynomial regression", c5_saturation()),
        ("2L atoms for exponential sums and rescale invariance", c6_exponential()),
        ("growth model masses at the four corners", c7_growth()),
        ("recomposition identity over registered slice maps", c8_recomposition()),
        ("admissibility oracle on the growth marginal", c9_admissibility()),
        ("product support of the mixture model", c10_mixture()),
        ("criteria, design and dominance property suites", c11_properties()),
    ];
    let mut failed = 0;
    for (i, (name, r)) in results.iter().enumerate() {
        match r {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("{}/{} criteria passed in {:.1} s", results.len() - failed, results.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
