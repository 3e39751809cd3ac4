//! Acceptance gate: one PASS/FAIL line per criterion. Criteria listed in
//! `KNOWN_UNATTAINABLE` may print FAIL; each one also asserts the values that
//! are derived by hand instead, so the FAIL is the documented discrepancy and
//! nothing else.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use nilgeom::cli::Session;
use nilgeom::config::parse_config;
use nilgeom_core::catalog::{match_example_cone, CatalogFamily};
use nilgeom_core::diffop::{t_pow, CPoly, DiffOp};
use nilgeom_core::example::{example_d_c, example_generators, example_osculating, xy};
use nilgeom_core::freelie::random_graded_algebra;
use nilgeom_core::grassmann::{annihilator, Subspace};
use nilgeom_core::hncone::{hn_at_point, nonsingular_filter, ConeReport};
use nilgeom_core::nilpotent::heisenberg;
use nilgeom_core::orbit::{rep_of_covector, Representation};
use nilgeom_core::osculating::OsculatingAlgebra;
use nilgeom_core::rational::{q, qr, to_f64};
use nilgeom_core::spectra::{anharmonic, eigenvalues, hermite_matrix, rockland_scan, SpectralParams};
use nilgeom_core::symbol::{parse_operator, principal_symbol};
use nilgeom_core::{NilpotentAlgebra, WeightVector, Q};
use num_traits::{One, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Criterion 5 compares against closed forms that disagree with the
/// definitions: the one-dimensional entries lack the N-th power and sign, and
/// the order-(0,4N) entry is not in the max part.
const KNOWN_UNATTAINABLE: &[u32] = &[5];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn config(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn session(name: &str) -> Session {
    Session::new(parse_config(&config(name)).unwrap(), None, 0).unwrap()
}

fn neg(v: &[Q]) -> Vec<Q> {
    v.iter().map(|c| -c.clone()).collect()
}

fn z(k: u32) -> usize {
    2 + k as usize
}

fn origin() -> [Q; 2] {
    [q(0), q(0)]
}

// 1 ------------------------------------------------------------------------

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for n in [2u32, 3] {
        let reg = example_osculating(n, &[q(1), q(0)], n + 3).unwrap();
        if reg.dim() != 4 || !reg.algebra().is_abelian() {
            bad.push(format!("N={n} at (1,0): dim {} abelian {}", reg.dim(), reg.algebra().is_abelian()));
        }
        let sing = example_osculating(n, &origin(), n + 3).unwrap();
        let a = sing.algebra();
        if a.dim() != n as usize + 3 {
            bad.push(format!("N={n} at (0,0): dim {}", a.dim()));
            continue;
        }
        for i in 0..a.dim() {
            for j in 0..a.dim() {
                let got = a.bracket(&a.basis_vector(i), &a.basis_vector(j)).unwrap();
                let mut want = vec![Q::zero(); a.dim()];
                // [Y, Z_k] = (N − k) Z_{k+1}, antisymmetric, nothing else
                for k in 1..n {
                    if (i, j) == (2, z(k)) {
                        want[z(k + 1)] = q((n - k) as i64);
                    }
                    if (i, j) == (z(k), 2) {
                        want[z(k + 1)] = q(-((n - k) as i64));
                    }
                }
                if got != want {
                    bad.push(format!("N={n} [e{i},e{j}] = {got:?}"));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(bad.is_empty() && elapsed < Duration::from_secs(1), format!("{:?}; {bad:?}", elapsed))
}

// 2 ------------------------------------------------------------------------

fn span(d: usize, rows: &[Vec<f64>]) -> DMatrix<f64> {
    let m = DMatrix::from_fn(d, rows.len(), |i, j| rows[j][i]);
    let qr = m.qr();
    qr.q().columns(0, rows.len()).into_owned()
}

fn projector(b: &DMatrix<f64>) -> DMatrix<f64> {
    b * b.transpose()
}

/// `‖P_A − P_B‖₂` for orthonormal bases of equal dimension.
fn gap(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let d = projector(a) - projector(b);
    d.singular_values().max()
}

fn unit(d: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[i] = 1.0;
    v
}

/// Closed-form cones of the example, independent of the catalog module.
fn oracle_cone(n: u32, x0: f64, fam: CatalogFamily, p: &[f64]) -> DMatrix<f64> {
    if x0 != 0.0 {
        let c = x0.powi(n as i32 - 1);
        return match fam {
            CatalogFamily::Lambda => span(4, &[vec![p[0], 0.0, -1.0, 0.0], vec![0.0, p[0] * c, 0.0, -1.0]]),
            _ => span(4, &[unit(4, 0), unit(4, 1)]),
        };
    }
    let d = n as usize + 3;
    let mut rows = Vec::new();
    match fam {
        CatalogFamily::Lambda => {
            let mut r = vec![0.0; d];
            r[0] = p[0];
            r[2] = -1.0;
            rows.push(r);
            rows.extend((1..=n).map(|k| unit(d, z(k))));
        }
        CatalogFamily::Infinity => {
            rows.push(unit(d, 0));
            rows.extend((1..=n).map(|k| unit(d, z(k))));
        }
        CatalogFamily::InfinityZeta => {
            rows.push(unit(d, 0));
            let mut r = unit(d, 1);
            r[z(1)] = -p[0];
            rows.push(r);
            rows.extend((2..=n).map(|k| unit(d, z(k))));
        }
        CatalogFamily::InfinityMuEta => {
            rows.push(unit(d, 0));
            let mut r = unit(d, 1);
            r[z(n)] = -p[1];
            rows.push(r);
            for k in 1..n {
                let mut r = unit(d, z(k));
                r[z(n)] = -p[0].powi((n - k) as i32);
                rows.push(r);
            }
        }
    }
    span(d, &rows)
}

fn bracket_residual(a: &NilpotentAlgebra, b: &DMatrix<f64>) -> f64 {
    let p = projector(b);
    let mut worst: f64 = 0.0;
    for i in 0..b.ncols() {
        for j in 0..b.ncols() {
            let u: Vec<f64> = b.column(i).iter().copied().collect();
            let v: Vec<f64> = b.column(j).iter().copied().collect();
            let w = nalgebra::DVector::from_vec(a.bracket_f64(&u, &v));
            worst = worst.max((&w - &p * &w).norm());
        }
    }
    worst
}

fn sampled(s: &Session, x: &[Q]) -> (OsculatingAlgebra, ConeReport) {
    let osc = s.osculating(x).unwrap();
    let rep = s.cones(&osc).unwrap();
    (osc, rep)
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let s = session("example_n2.toml");
    let n = 2;
    let mut notes = Vec::new();
    let mut ok = true;

    let (osc, rep) = sampled(&s, &[q(1), q(0)]);
    let bases: Vec<DMatrix<f64>> = rep.cones.iter().map(|c| c.subspace.float_basis()).collect();
    let targets: [(CatalogFamily, f64); 5] = [
        (CatalogFamily::Lambda, 0.0),
        (CatalogFamily::Lambda, 0.5),
        (CatalogFamily::Lambda, 1.0),
        (CatalogFamily::Lambda, 2.0),
        (CatalogFamily::Infinity, f64::INFINITY),
    ];
    for (fam, l) in targets {
        let want = oracle_cone(n, 1.0, fam, &[l]);
        let best = bases.iter().map(|b| gap(b, &want)).fold(f64::INFINITY, f64::min);
        if best >= 1e-6 {
            ok = false;
            notes.push(format!("(1,0) lambda={l}: nearest {best:.2e}"));
        }
    }
    let mut residual = bases.iter().map(|b| bracket_residual(osc.algebra(), b)).fold(0.0, f64::max);

    let (osc0, rep0) = sampled(&s, &origin());
    let mut regimes = std::collections::BTreeSet::new();
    for c in &rep0.cones {
        let b = c.subspace.float_basis();
        residual = residual.max(bracket_residual(osc0.algebra(), &b));
        match match_example_cone(n, &origin(), &c.subspace, 1e-6).unwrap() {
            Some(m) => {
                let d = gap(&b, &oracle_cone(n, 0.0, m.family, &m.params));
                if d < 1e-6 {
                    regimes.insert(m.family);
                } else {
                    ok = false;
                    notes.push(format!("(0,0) {:?}{:?}: oracle gap {d:.2e}", m.family, m.params));
                }
            }
            None => {
                ok = false;
                notes.push(format!("(0,0) unmatched cone {:?}", c.witness.key()));
            }
        }
    }
    if regimes.len() != 4 {
        ok = false;
        notes.push(format!("regimes at (0,0): {regimes:?}"));
    }
    if residual >= 1e-8 {
        ok = false;
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(30);
    outcome(
        ok,
        format!("{} + {} cones, bracket residual {residual:.1e}, {elapsed:?}; {notes:?}", rep.cones.len(), rep0.cones.len()),
    )
}

// 3 ------------------------------------------------------------------------

fn scalar(k: usize, re: Q, im: Q) -> DiffOp {
    DiffOp::multiplication(CPoly::constant(k, re, im))
}

fn rep_at_origin(n: u32, entries: &[(usize, Q)]) -> (OsculatingAlgebra, Representation) {
    let osc = example_osculating(n, &origin(), n + 3).unwrap();
    let mut xi = vec![Q::zero(); osc.dim()];
    for (i, v) in entries {
        xi[*i] = v.clone();
    }
    let r = rep_of_covector(osc.algebra(), &xi).unwrap();
    (osc, r)
}

fn grid() -> Vec<Q> {
    vec![qr(-2, 1), qr(-1, 2), q(1), qr(3, 2)]
}

fn criterion_3() -> Outcome {
    let mut bad = Vec::new();
    let mut checked = 0;
    for n in [2u32, 3] {
        let d = n as usize + 3;
        for xi in grid() {
            for eta in grid() {
                for mu in grid() {
                    // first family: ξX₁* + ηX₂* + μY*, μξ > 0
                    if &mu * &xi > Q::zero() {
                        let (_, r) = rep_at_origin(n, &[(0, xi.clone()), (1, eta.clone()), (2, mu.clone())]);
                        let mut want = vec![scalar(0, q(0), q(0)); d];
                        want[0] = scalar(0, q(0), xi.clone());
                        want[1] = scalar(0, q(0), eta.clone());
                        want[2] = scalar(0, q(0), mu.clone());
                        checked += 1;
                        if r.k != 0 || r.dpi != want {
                            bad.push(format!("pi1 N={n}"));
                        }
                    }
                    // second family: ηX₂* + μY* + bZ₁*, η > 0
                    let b = xi.clone();
                    if eta > Q::zero() {
                        let (_, r) = rep_at_origin(n, &[(1, eta.clone()), (2, mu.clone()), (z(1), b.clone())]);
                        let mut want = vec![scalar(0, q(0), q(0)); d];
                        want[1] = scalar(0, q(0), eta.clone());
                        want[2] = scalar(0, q(0), mu.clone());
                        want[z(1)] = scalar(0, q(0), b.clone());
                        checked += 1;
                        if r.k != 0 || r.dpi != want {
                            bad.push(format!("pi2 N={n}"));
                        }
                    }
                }
                // third family: ηX₂* + bZ_N*, bη > 0
                let b = xi.clone();
                if &b * &eta > Q::zero() {
                    let (_, r) = rep_at_origin(n, &[(1, eta.clone()), (z(n), b.clone())]);
                    let mut want = vec![DiffOp::zero(1); d];
                    want[1] = scalar(1, q(0), eta.clone());
                    want[2] = DiffOp::partial(1, 0);
                    for j in 1..=n {
                        want[z(j)] = DiffOp::multiplication(CPoly::imag(t_pow(1, 0, n - j).scale(&b)));
                    }
                    checked += 1;
                    if r.k != 1 || r.dpi != want {
                        bad.push(format!("pi3 N={n} eta={eta} b={b}"));
                    }
                }
            }
        }
    }
    bad.dedup();
    outcome(bad.is_empty(), format!("{checked} representations; {bad:?}"))
}

// 4 ------------------------------------------------------------------------

/// Defects of `dπ([eᵢ,eⱼ]) = dπ(eᵢ)dπ(eⱼ) − dπ(eⱼ)dπ(eᵢ)` from structure constants and composition.
fn hom_defects(a: &NilpotentAlgebra, r: &Representation) -> usize {
    let mut bad = 0;
    for i in 0..a.dim() {
        for j in (i + 1)..a.dim() {
            let mut lhs = DiffOp::zero(r.k);
            for k in 0..a.dim() {
                let c = a.constant(i, j, k);
                if !c.is_zero() {
                    lhs = lhs.add(&r.dpi[k].scale(&c)).unwrap();
                }
            }
            let ab = r.dpi[i].compose(&r.dpi[j]).unwrap();
            let ba = r.dpi[j].compose(&r.dpi[i]).unwrap();
            if lhs != ab.sub(&ba).unwrap() {
                bad += 1;
            }
        }
    }
    bad
}

fn covectors(d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<Q>> {
    let mut out = vec![vec![Q::zero(); d]];
    let mut top = vec![Q::zero(); d];
    top[d - 1] = q(1);
    out.push(top);
    for _ in 0..4 {
        out.push((0..d).map(|_| qr((rng.next_u32() % 7) as i64 - 3, 1 + (rng.next_u32() % 2) as i64)).collect());
    }
    out
}

fn criterion_4() -> Outcome {
    let mut algebras: Vec<(String, NilpotentAlgebra)> = vec![("heisenberg".into(), heisenberg())];
    for n in [2u32, 3] {
        for x in [origin(), [q(1), q(0)]] {
            algebras.push((format!("example N={n} x={x:?}"), example_osculating(n, &x, n + 3).unwrap().algebra().clone()));
        }
    }
    for seed in 0..20 {
        algebras.push((format!("random {seed}"), random_graded_algebra(seed)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut reps, mut failed) = (0, Vec::new());
    for (name, a) in &algebras {
        for xi in covectors(a.dim(), &mut rng) {
            let r = rep_of_covector(a, &xi).unwrap();
            reps += 1;
            let bad = hom_defects(a, &r);
            if bad > 0 {
                failed.push(format!("{name}: {bad} pairs"));
            }
        }
    }
    outcome(failed.is_empty(), format!("{} algebras, {reps} representations; {failed:?}", algebras.len()))
}

// 5 ------------------------------------------------------------------------

fn as_real(op: &DiffOp) -> Option<Q> {
    op.as_scalar().filter(|(_, im)| im.is_zero()).map(|(re, _)| re)
}

fn pow(x: &Q, e: u32) -> Q {
    (0..e).fold(Q::one(), |acc, _| acc * x)
}

fn sign(n: u32) -> Q {
    if n % 2 == 1 {
        q(1)
    } else {
        q(-1)
    }
}

fn d_vertical(n: u32, c: &Q) -> nilgeom_core::symbol::WeightedOperator {
    let expr = format!("(Y^2 + Z{n}^2)*(Y^2 + Z1^2)^{n} + c*Z{n}^4");
    parse_operator(&expr, example_generators(n), &xy(), &[("c".into(), c.clone())], WeightVector::new(vec![0, 4 * n])).unwrap()
}

fn criterion_5() -> Outcome {
    let cs = [q(0), q(1), qr(9, 2)];
    // literal table rows: (family, matches, total)
    let mut rows = [("pi1", 0, 0), ("pi2", 0, 0), ("pi3", 0, 0), ("pi1 order (0,4N)", 0, 0)];
    let mut derived_bad = Vec::new();
    for n in [2u32, 3] {
        for c in &cs {
            let op = example_d_c(n, c.clone()).unwrap();
            let vert = d_vertical(n, c);
            for xi in grid() {
                for eta in grid() {
                    for mu in grid() {
                        if &mu * &xi > Q::zero() {
                            let (osc, r) = rep_at_origin(n, &[(0, xi.clone()), (1, eta.clone()), (2, mu.clone())]);
                            let got = as_real(&principal_symbol(&op, &r, &osc).unwrap());
                            let literal = &mu * &mu * (&xi * &xi + &eta * &eta);
                            let derived = sign(n) * pow(&mu, 2 * n) * (&xi * &xi + &eta * &eta);
                            rows[0].2 += 1;
                            rows[0].1 += usize::from(got.as_ref() == Some(&literal));
                            if got.as_ref() != Some(&derived) {
                                derived_bad.push(format!("pi1 N={n}"));
                            }
                            let got = as_real(&principal_symbol(&vert, &r, &osc).unwrap());
                            let literal = sign(n) * pow(&mu, 2 + 2 * n);
                            rows[3].2 += 1;
                            rows[3].1 += usize::from(got.as_ref() == Some(&literal));
                            // dπ⁽¹⁾(Z_N) = 0 and every top-weight word contains Z_N
                            if got != Some(Q::zero()) {
                                derived_bad.push(format!("pi1 (0,4N) N={n}"));
                            }
                        }
                        let b = xi.clone();
                        if eta > Q::zero() {
                            let (osc, r) = rep_at_origin(n, &[(1, eta.clone()), (2, mu.clone()), (z(1), b.clone())]);
                            let got = as_real(&principal_symbol(&op, &r, &osc).unwrap());
                            let literal = &eta * &eta * (&mu * &mu + &b * &b);
                            let derived = sign(n) * &eta * &eta * pow(&(&mu * &mu + &b * &b), n);
                            rows[1].2 += 1;
                            rows[1].1 += usize::from(got.as_ref() == Some(&literal));
                            if got.as_ref() != Some(&derived) {
                                derived_bad.push(format!("pi2 N={n}"));
                            }
                        }
                    }
                    let b = xi.clone();
                    if &b * &eta > Q::zero() {
                        let (osc, r) = rep_at_origin(n, &[(1, eta.clone()), (z(n), b.clone())]);
                        let got = principal_symbol(&op, &r, &osc).unwrap();
                        let e2 = &eta * &eta;
                        let want = anharmonic(n, &b)
                            .pow(n)
                            .scale(&-e2.clone())
                            .add(&scalar(1, c * &b * &b * &e2, q(0)))
                            .unwrap();
                        rows[2].2 += 1;
                        rows[2].1 += usize::from(got == want);
                    }
                }
            }
        }
    }
    derived_bad.dedup();
    assert!(derived_bad.is_empty(), "hand-derived symbol values disagree: {derived_bad:?}");
    let pass = rows.iter().all(|(_, m, t)| m == t && *t > 0);
    let detail: Vec<String> = rows.iter().map(|(name, m, t)| format!("{name} {m}/{t}")).collect();
    outcome(pass, format!("{}; derived forms hold", detail.join(", ")))
}

// 6 ------------------------------------------------------------------------

fn example_reps(n: u32) -> (OsculatingAlgebra, Vec<(String, Representation)>) {
    let osc = example_osculating(n, &origin(), n + 3).unwrap();
    let mut reps = Vec::new();
    for (id, entries) in [
        ("pi1", vec![(0, q(1)), (1, q(2)), (2, q(1))]),
        ("pi2", vec![(1, q(1)), (2, q(1)), (z(1), q(1))]),
        ("pi3", vec![(1, q(1)), (z(n), q(1))]),
    ] {
        let (_, r) = rep_at_origin(n, &entries);
        reps.push((id.to_string(), r));
    }
    (osc, reps)
}

fn c_grid() -> Vec<Q> {
    (0..=30).map(q).collect()
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let params = SpectralParams {
        m: 256,
        count: 10,
        ..SpectralParams::default()
    };
    let (osc, reps) = example_reps(2);
    let report = rockland_scan(|c| example_d_c(2, c.clone()), &reps, &osc, &c_grid(), &params).unwrap();
    let obstructions = report.obstructions.clone();
    let set_ok = obstructions == vec![q(1), q(9), q(25)];

    // (1/b²)(d²/dt² − b²t²)² with b = 1; harmonic-oscillator oracle (2n+1)²
    let h = hermite_matrix(&anharmonic(2, &q(1)).pow(2), 256).unwrap();
    let mut ev: Vec<(f64, bool)> = eigenvalues(&h, 10).unwrap().iter().map(|e| (e.value.re, e.stable)).collect();
    ev.sort_by(|a, b| a.0.total_cmp(&b.0));
    let worst = ev
        .iter()
        .enumerate()
        .map(|(k, (v, _))| {
            let want = ((2 * k + 1) * (2 * k + 1)) as f64;
            (v - want).abs() / want
        })
        .fold(0.0, f64::max);
    let ev_ok = ev.len() == 10 && ev.iter().all(|e| e.1) && worst < 1e-8;
    let n2_time = start.elapsed();

    // N = 3: the computed obstruction set and ground state are stable under doubling
    let (osc3, reps3) = example_reps(3);
    let scan3 = |m: usize| {
        let p = SpectralParams {
            m,
            count: 10,
            ..SpectralParams::default()
        };
        rockland_scan(|c| example_d_c(3, c.clone()), &reps3, &osc3, &c_grid(), &p).unwrap()
    };
    let (a, b) = (scan3(256), scan3(512));
    let sig = |r: &nilgeom_core::spectra::ScanReport| {
        r.rows.iter().filter(|row| row.rep_id == "pi3").map(|row| row.sigma_min.unwrap()).collect::<Vec<_>>()
    };
    let drift = sig(&a)
        .iter()
        .zip(sig(&b))
        .map(|(x, y)| (x - y).abs() / y.abs().max(1.0))
        .fold(0.0, f64::max);
    let n3_ok = a.obstructions == b.obstructions && drift < 1e-6;
    let pass = set_ok && ev_ok && n3_ok && n2_time < Duration::from_secs(10);
    let fmt = |v: &[Q]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    outcome(
        pass,
        format!(
            "N=2 obstructions {{{}}} ({n2_time:?}), oscillator rel err {worst:.1e}; N=3 obstructions {{{}}} drift {drift:.1e}",
            fmt(&obstructions),
            fmt(&a.obstructions)
        ),
    )
}

// 7 ------------------------------------------------------------------------

fn random_element(rng: &mut ChaCha8Rng, d: usize) -> Vec<Q> {
    (0..d)
        .map(|_| qr((rng.next_u32() % 7) as i64 - 3, 1 + (rng.next_u32() % 3) as i64))
        .collect()
}

fn criterion_7() -> Outcome {
    let mut algebras: Vec<(String, NilpotentAlgebra)> = vec![("heisenberg".into(), heisenberg())];
    for n in [2u32, 3] {
        algebras.push((format!("example N={n}"), example_osculating(n, &origin(), n + 3).unwrap().algebra().clone()));
    }
    for seed in 0..3 {
        algebras.push((format!("random {seed}"), random_graded_algebra(seed)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut bad = Vec::new();
    for (name, a) in &algebras {
        let d = a.dim();
        if !a.validate().is_empty() {
            bad.push(format!("{name}: jacobi"));
        }
        for _ in 0..100 {
            let (x, y, w) = (random_element(&mut rng, d), random_element(&mut rng, d), random_element(&mut rng, d));
            let l = a.bch(&a.bch(&x, &y).unwrap(), &w).unwrap();
            let r = a.bch(&x, &a.bch(&y, &w).unwrap()).unwrap();
            let inv = a.bch(&x, &neg(&x)).unwrap().iter().all(Zero::is_zero) && a.bch(&neg(&x), &x).unwrap().iter().all(Zero::is_zero);
            if l != r || !inv {
                bad.push(format!("{name}: bch"));
            }
            let lam: Vec<Q> = (0..a.nu()).map(|_| qr(1 + (rng.next_u32() % 5) as i64, 1 + (rng.next_u32() % 3) as i64)).collect();
            let dl = |v: &[Q]| a.dilate(v, &lam).unwrap();
            if dl(&a.bracket(&x, &y).unwrap()) != a.bracket(&dl(&x), &dl(&y)).unwrap() || dl(&a.bch(&x, &y).unwrap()) != a.bch(&dl(&x), &dl(&y)).unwrap() {
                bad.push(format!("{name}: dilation"));
            }
        }
        // annihilator involution on spans of random elements
        for k in 0..=d.min(4) {
            let vs: Vec<Vec<Q>> = (0..k).map(|_| random_element(&mut rng, d)).collect();
            let s = Subspace::exact_span(d, &vs);
            let back = annihilator(&annihilator(&s).unwrap()).unwrap();
            let joint: Vec<Vec<Q>> = s.exact_basis().unwrap().iter().chain(back.exact_basis().unwrap()).cloned().collect();
            if back.dim() != s.dim() || Subspace::exact_span(d, &joint).dim() != s.dim() {
                bad.push(format!("{name}: annihilator"));
            }
        }
    }
    bad.dedup();
    outcome(bad.is_empty(), format!("{} algebras x 100 triples; {bad:?}", algebras.len()))
}

// 8 ------------------------------------------------------------------------

/// Distance of a unit covector `aX₁* + bX₂* + cY* + dZ₁*` from
/// `{ξX₁* + ηX₂* + μξY* + x^{N−1}μηZ₁*}`: for fixed `(a, b)` the admissible
/// `(c, d)` form the line spanned by `(a, x^{N−1}b)`.
fn family_residual(v: &[f64], xn: f64) -> f64 {
    let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    let (a, b, c, d) = (v[0] / norm, v[1] / norm, v[2] / norm, v[3] / norm);
    let (p, r) = (a, xn * b);
    let len = (p * p + r * r).sqrt();
    if len < 1e-12 {
        return (c * c + d * d).sqrt();
    }
    (c * r - d * p).abs() / len
}

fn criterion_8() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (file, n) in [("example_n2.toml", 2u32), ("example_n3.toml", 3)] {
        let s = session(file);
        for x in [[q(1), q(0)], [q(2), q(0)], [qr(-1, 2), q(1)]] {
            let (osc, rep) = sampled(&s, &x);
            let h = hn_at_point(&osc, &rep.cones, &s.cfg.numeric.hn_dilations, &[]).unwrap();
            let ns = nonsingular_filter(&osc, &h, s.cfg.numeric.nonsingular_threshold).unwrap();
            let xn = to_f64(&x[0]).powi(n as i32 - 1);
            let worst = ns.covectors.iter().map(|c| family_residual(&c.coords, xn)).fold(0.0, f64::max);
            ok &= !ns.covectors.is_empty() && worst < 1e-6;
            notes.push(format!("N={n} x={}: {} covectors, worst {worst:.1e}", x[0], ns.covectors.len()));
        }
    }
    outcome(ok, notes.join("; "))
}

// 9 ------------------------------------------------------------------------

fn criterion_9() -> Outcome {
    let commands = ["filtration", "osculate", "cones", "hn", "rep", "symbol", "spectrum", "verdict", "validate"];
    let mut differing = Vec::new();
    let mut runs = 0;
    for file in ["example_n2.toml", "example_n3.toml", "heisenberg.toml"] {
        let path = config(file);
        for cmd in commands {
            let once = || {
                let o = Command::new(env!("CARGO_BIN_EXE_nilgeom"))
                    .args([cmd, path.to_str().unwrap(), "--format", "jsonl", "--seed", "3"])
                    .output()
                    .unwrap();
                assert!(o.status.success(), "{cmd} {file}: {}", String::from_utf8_lossy(&o.stderr));
                o.stdout
            };
            runs += 1;
            if once() != once() {
                differing.push(format!("{file} {cmd}"));
            }
        }
    }
    outcome(differing.is_empty(), format!("{runs} command/config pairs; differing {differing:?}"))
}

#[test]
fn acceptance() {
    let criteria: [(u32, &str, fn() -> Outcome); 9] = [
        (1, "osculating algebras of the example", criterion_1),
        (2, "tangent-cone catalog", criterion_2),
        (3, "orbit-method tables", criterion_3),
        (4, "representation homomorphism suite", criterion_4),
        (5, "symbol table", criterion_5),
        (6, "spectral verdict", criterion_6),
        (7, "algebraic property suites", criterion_7),
        (8, "nonsingular HN covectors off the singular line", criterion_8),
        (9, "determinism of shipped configs", criterion_9),
    ];
    let mut unexpected = Vec::new();
    // written to the stderr handle directly so the report survives output capture
    let mut report = std::io::stderr();
    for (id, name, f) in criteria {
        let o = f();
        writeln!(report, "{} {id} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail).unwrap();
        if !o.pass && !KNOWN_UNATTAINABLE.contains(&id) {
            unexpected.push(id);
        }
    }
    assert!(unexpected.is_empty(), "criteria failed: {unexpected:?}");
}
