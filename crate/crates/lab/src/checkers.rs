use std::f64::consts::PI;

use lab_core::concentration::{
    concentration_check, marton_demo_with, to_csv, CenteredSet, McConfig, SetKind,
};
use lab_core::gaussian::{equality_family_gap, noncentered_counterexample, EqualityFamilyCase};
use lab_core::inequality::families::{
    case_rng, random_admissible_pair, random_ulc_pair, random_unconditional_convex, talagrand_sweep,
};
use lab_core::inequality::{
    duality_backward, km_product, reverse_gap, santalo_check, talagrand_gap, ulc_gap_1d,
    SantaloPair, Side,
};
use lab_core::moment_map::{
    density_l1, entropy_identity_gap, lsi_deficit, random_moment_target, reverse_lsi_gap,
    solve_fixed_point, solve_moment_map_with, solve_variational, x_dot_grad_phi_check,
    MomentMapConfig,
};
use lab_core::transport::{compare_backends, random_instance};
use lab_core::{
    ConvexPotential, DiscreteMeasure, GapReport, GaussianParams, Grid, GridDensity, GridFunction,
    LabError, Law, Result,
};
use rayon::prelude::*;

use crate::config::{Expect, Params};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Int,
    Float,
    Floats,
    Ints,
    Intervals,
    /// A string; when the list is non-empty, one of its entries.
    Str(&'static [&'static str]),
}

/// One checked inequality.
#[derive(Debug, Clone)]
pub struct Case {
    pub case: String,
    pub report: Result<GapReport>,
}

impl Case {
    fn new(case: impl Into<String>, report: Result<GapReport>) -> Self {
        Self {
            case: case.into(),
            report,
        }
    }
}

/// Rows of one scenario plus extra files to write next to the report,
/// keyed by file suffix.
#[derive(Debug, Default)]
pub struct Output {
    pub cases: Vec<Case>,
    pub artifacts: Vec<(String, String)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Checker {
    EqualityFamily,
    NoncenteredCounterexample,
    GaussianPair,
    TalagrandSweep,
    SantaloGaussian,
    DualityBackward,
    Ulc,
    KmProduct,
    ReverseLaplace,
    MomentMap,
    EntropyIdentity,
    ReverseLsi,
    LsiDeficit,
    Concentration,
    Marton,
    TransportBackends,
}

const SET_KEYS: [(&str, ParamKind); 6] = [
    (
        "set",
        ParamKind::Str(&["interval_union", "ball", "slab", "symmetric_union"]),
    ),
    ("intervals", ParamKind::Intervals),
    ("dim", ParamKind::Int),
    ("radius", ParamKind::Float),
    ("normal", ParamKind::Floats),
    ("center", ParamKind::Floats),
];

macro_rules! keys {
    ($($k:literal : $v:expr),* $(,)?) => { &[$(($k, $v)),*] };
}

use ParamKind::*;

impl Checker {
    pub const ALL: [Checker; 16] = [
        Checker::EqualityFamily,
        Checker::NoncenteredCounterexample,
        Checker::GaussianPair,
        Checker::TalagrandSweep,
        Checker::SantaloGaussian,
        Checker::DualityBackward,
        Checker::Ulc,
        Checker::KmProduct,
        Checker::ReverseLaplace,
        Checker::MomentMap,
        Checker::EntropyIdentity,
        Checker::ReverseLsi,
        Checker::LsiDeficit,
        Checker::Concentration,
        Checker::Marton,
        Checker::TransportBackends,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Checker::EqualityFamily => "equality_family",
            Checker::NoncenteredCounterexample => "noncentered_counterexample",
            Checker::GaussianPair => "gaussian_pair",
            Checker::TalagrandSweep => "talagrand_sweep",
            Checker::SantaloGaussian => "santalo_gaussian",
            Checker::DualityBackward => "duality_backward",
            Checker::Ulc => "ulc",
            Checker::KmProduct => "km_product",
            Checker::ReverseLaplace => "reverse_laplace",
            Checker::MomentMap => "moment_map",
            Checker::EntropyIdentity => "entropy_identity",
            Checker::ReverseLsi => "reverse_lsi",
            Checker::LsiDeficit => "lsi_deficit",
            Checker::Concentration => "concentration",
            Checker::Marton => "marton",
            Checker::TransportBackends => "transport_backends",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    pub fn about(self) -> &'static str {
        match self {
            Checker::EqualityFamily => "W2^2 = 2 Ent(mu) + 2 Ent(nu) for N(0, A), N(m, A^-1)",
            Checker::NoncenteredCounterexample => {
                "symmetrized bound for N(m1, I), N(m2, I), fails when m1.m2 < 0"
            }
            Checker::GaussianPair => "symmetrized bound for two scalar Gaussians",
            Checker::TalagrandSweep => "symmetrized bound over random centered mu and arbitrary nu",
            Checker::SantaloGaussian => {
                "functional Santalo for the Gaussian pair, log int e^f + log int e^g"
            }
            Checker::DualityBackward => {
                "Santalo to transport-entropy chain for random admissible pairs"
            }
            Checker::Ulc => "symmetrized bound against theta = e^-V with V'' >= alpha",
            Checker::KmProduct => "4^d <= int e^-f int e^-f* <= (2 pi)^d for unconditional f",
            Checker::ReverseLaplace => "reverse transport-entropy bound for the Laplace density",
            Checker::MomentMap => {
                "moment map solve: pushforward residual, x.grad phi, method agreement"
            }
            Checker::EntropyIdentity => "S(mu) - S(rho) = int log phi'' drho at the moment map",
            Checker::ReverseLsi => "reverse log-Sobolev inequality for log-concave rho",
            Checker::LsiDeficit => "deficit of the symmetrized bound for Gaussian pairs",
            Checker::Concentration => "1 - gamma(A_r) <= e^{-r^2/2} / gamma(A) for a centered set",
            Checker::Marton => "transport chain behind Gaussian concentration",
            Checker::TransportBackends => "Sinkhorn and quantile W2 against the exact solver",
        }
    }

    pub fn keys(self) -> &'static [(&'static str, ParamKind)] {
        match self {
            Checker::EqualityFamily => {
                keys!("cases": Int, "dims": Ints, "min_eig": Float, "max_eig": Float, "max_mean": Float)
            }
            Checker::NoncenteredCounterexample => keys!("m1": Floats, "m2": Floats),
            Checker::GaussianPair => {
                keys!("mu_mean": Float, "mu_var": Float, "nu_mean": Float, "nu_var": Float)
            }
            Checker::TalagrandSweep => keys!("cases": Int),
            Checker::SantaloGaussian => keys!("dim": Int, "n": Int, "half_width": Float),
            Checker::DualityBackward => keys!("cases": Int),
            Checker::Ulc => keys!("cases": Int, "alpha": Float, "n": Int, "half_width": Float),
            Checker::KmProduct => {
                keys!("potential": Str(&["abs", "random"]), "cases": Int, "dim": Int)
            }
            Checker::ReverseLaplace => keys!(),
            Checker::MomentMap => keys!(
                "target": Str(&["two_point", "gaussian", "random"]),
                "var": Float,
                "cases": Int,
                "n": Int,
                "tol": Float,
            ),
            Checker::EntropyIdentity => {
                keys!("var": Float, "n": Int, "tol": Float, "threshold": Float)
            }
            Checker::ReverseLsi => {
                keys!("density": Str(&["gaussian", "quartic"]), "var": Float, "n": Int)
            }
            Checker::LsiDeficit => keys!("mu_var": Float, "nu_mean": Float, "nu_var": Float),
            Checker::Concentration => {
                const K: [(&str, ParamKind); 8] = [
                    SET_KEYS[0],
                    SET_KEYS[1],
                    SET_KEYS[2],
                    SET_KEYS[3],
                    SET_KEYS[4],
                    SET_KEYS[5],
                    ("radii", Floats),
                    ("samples", Int),
                ];
                &K
            }
            Checker::Marton => {
                const K: [(&str, ParamKind); 8] = [
                    SET_KEYS[0],
                    SET_KEYS[1],
                    SET_KEYS[2],
                    SET_KEYS[3],
                    SET_KEYS[4],
                    SET_KEYS[5],
                    ("r", Float),
                    ("n", Int),
                ];
                &K
            }
            Checker::TransportBackends => keys!("cases": Int, "dim": Int, "max_atoms": Int),
        }
    }

    pub fn default_expect(self) -> Expect {
        match self {
            Checker::EqualityFamily => Expect::Tight,
            Checker::NoncenteredCounterexample => Expect::Violated,
            _ => Expect::Holds,
        }
    }

    /// Runs the scenario; errors that concern the whole scenario (bad
    /// parameters) come back as `Err`, per-case failures as error rows.
    pub fn run(self, p: &Params, seed: u64) -> Result<Output> {
        let cases = match self {
            Checker::EqualityFamily => equality_family(p, seed)?,
            Checker::NoncenteredCounterexample => {
                let m1 = p.floats("m1").unwrap_or_else(|| vec![1.0]);
                let m2 = p.floats("m2").unwrap_or_else(|| vec![-1.0]);
                vec![Case::new("gap", noncentered_counterexample(&m1, &m2))]
            }
            Checker::GaussianPair => {
                let mu = GaussianParams::scalar(p.f64("mu_mean", 0.0), p.f64("mu_var", 1.0))?;
                let nu = GaussianParams::scalar(p.f64("nu_mean", 0.0), p.f64("nu_var", 1.0))?;
                vec![Case::new(
                    "gap",
                    talagrand_gap(&Law::Gaussian(mu), &Law::Gaussian(nu)),
                )]
            }
            Checker::TalagrandSweep => talagrand_sweep(seed, p.usize("cases", 500))
                .into_iter()
                .enumerate()
                .map(|(i, (label, r))| Case::new(format!("{i:04}-{label}"), r))
                .collect(),
            Checker::SantaloGaussian => santalo_gaussian(p)?,
            Checker::DualityBackward => duality(p, seed),
            Checker::Ulc => ulc(p, seed)?,
            Checker::KmProduct => km(p, seed)?,
            Checker::ReverseLaplace => reverse_laplace()?,
            Checker::MomentMap => moment_map(p, seed)?,
            Checker::EntropyIdentity => {
                let cfg = MomentMapConfig {
                    n: p.usize("n", 2048),
                    tol: p.f64("tol", 1e-9),
                    ..Default::default()
                };
                let sol = solve_moment_map_with(
                    &Law::Gaussian(GaussianParams::scalar(0.0, p.f64("var", 4.0))?),
                    &cfg,
                )?;
                let e = entropy_identity_gap(&sol)?;
                vec![Case::new(
                    "identity",
                    Ok(GapReport::new(e.value, p.f64("threshold", 1e-6), e.error)),
                )]
            }
            Checker::ReverseLsi => reverse_lsi(p)?,
            Checker::LsiDeficit => {
                let mu = GaussianParams::scalar(0.0, p.f64("mu_var", 1.0))?;
                let nu = GaussianParams::scalar(p.f64("nu_mean", 0.0), p.f64("nu_var", 1.0))?;
                let d = lsi_deficit(&Law::Gaussian(mu), &Law::Gaussian(nu))?;
                vec![Case::new(
                    "deficit",
                    Ok(GapReport::new(0.0, d.value, d.error)),
                )]
            }
            Checker::Concentration => return concentration(p, seed),
            Checker::Marton => marton(p)?,
            Checker::TransportBackends => backends(p, seed),
        };
        Ok(Output {
            cases,
            artifacts: Vec::new(),
        })
    }
}

fn equality_family(p: &Params, seed: u64) -> Result<Vec<Case>> {
    let dims = p.usizes("dims").unwrap_or_else(|| vec![1, 2, 3, 5]);
    let n = p.usize("cases", 100);
    let eig = (p.f64("min_eig", 0.2), p.f64("max_eig", 5.0));
    let max_mean = p.f64("max_mean", 2.0);
    if !(eig.0 > 0.0 && eig.0 <= eig.1) || !(max_mean > 0.0) {
        return Err(LabError::Precondition(
            "need 0 < min_eig <= max_eig and max_mean > 0".into(),
        ));
    }
    let jobs: Vec<(usize, usize)> = dims
        .iter()
        .flat_map(|d| (0..n).map(move |i| (*d, i)))
        .collect();
    Ok(jobs
        .par_iter()
        .enumerate()
        .map(|(k, (d, i))| {
            let mut rng = case_rng(seed, k as u64);
            let r = EqualityFamilyCase::random(&mut rng, *d, eig, max_mean)
                .and_then(|c| equality_family_gap(&c));
            Case::new(format!("d{d}-{i:04}"), r)
        })
        .collect())
}

fn santalo_gaussian(p: &Params) -> Result<Vec<Case>> {
    let dim = p.usize("dim", 1);
    let l = p.f64("half_width", if dim == 1 { 10.0 } else { 9.0 });
    let n = p.usize("n", if dim == 1 { 2048 } else { 256 });
    let grid = match dim {
        1 => Grid::line(-l, l, n)?,
        2 => Grid::square(-l, l, n)?,
        _ => {
            return Err(LabError::DimensionMismatch {
                expected: 2,
                got: dim,
            })
        }
    };
    let f = GridFunction::from_fn(grid, |x| -0.5 * x.iter().map(|v| v * v).sum::<f64>())?;
    let pair = SantaloPair::new(f.clone(), f)?;
    Ok(vec![Case::new(
        "log_product",
        santalo_check(&pair, Side::F),
    )])
}

fn duality(p: &Params, seed: u64) -> Vec<Case> {
    let per_case: Vec<Vec<Case>> = (0..p.usize("cases", 20))
        .into_par_iter()
        .map(|i| {
            let chain = random_admissible_pair(&mut case_rng(seed, i as u64))
                .and_then(|(f, g)| duality_backward(&f, &g));
            let tag = |s: &str| format!("{i:03}-{s}");
            match chain {
                Ok(c) => vec![
                    Case::new(
                        tag("recentering"),
                        Ok(GapReport::new(c.barycenter_norm, 1e-7, 0.0)),
                    ),
                    Case::new(
                        tag("mass"),
                        Ok(GapReport::new(
                            c.mass_defect(),
                            1e-9 * c.mass_g.max(1.0),
                            0.0,
                        )),
                    ),
                    Case::new(tag("santalo"), Ok(c.santalo)),
                    Case::new(tag("first_link"), Ok(c.first_link)),
                    Case::new(tag("second_link"), Ok(c.second_link)),
                    Case::new(tag("endpoints"), Ok(c.endpoints)),
                ],
                Err(e) => vec![Case::new(tag("chain"), Err(e))],
            }
        })
        .collect();
    per_case.into_iter().flatten().collect()
}

fn ulc(p: &Params, seed: u64) -> Result<Vec<Case>> {
    let alpha = p.f64("alpha", 1.0);
    let l = p.f64("half_width", 10.0);
    let grid = Grid::line(-l, l, p.usize("n", 4096))?;
    // V'' = alpha + 3 x^2
    let v = GridFunction::from_fn(grid.clone(), |x| {
        0.5 * alpha * x[0] * x[0] + 0.25 * x[0].powi(4)
    })?;
    let per_case: Vec<Vec<Case>> = (0..p.usize("cases", 20))
        .into_par_iter()
        .map(|i| {
            let r = random_ulc_pair(&mut case_rng(seed, i as u64), &grid)
                .and_then(|(mu, nu)| ulc_gap_1d(&v, alpha, &mu, &nu));
            match r {
                Ok(r) => vec![
                    Case::new(format!("{i:03}-gap"), Ok(r.gap)),
                    Case::new(format!("{i:03}-lipschitz"), Ok(r.lipschitz)),
                ],
                Err(e) => vec![Case::new(format!("{i:03}-gap"), Err(e))],
            }
        })
        .collect();
    Ok(per_case.into_iter().flatten().collect())
}

fn km(p: &Params, seed: u64) -> Result<Vec<Case>> {
    if p.str("potential", "abs") == "abs" {
        let f = ConvexPotential::from_fn(Grid::line(-40.0, 40.0, 131_073)?, |x| x[0].abs())?;
        let out = Grid::line(-1.1, 1.1, 22_000)?;
        let r = km_product(&f, Some(&out))?;
        return Ok(vec![
            Case::new("lower", Ok(r.lower)),
            Case::new("upper", Ok(r.upper)),
        ]);
    }
    let dim = p.usize("dim", 1);
    let per_case: Vec<Vec<Case>> = (0..p.usize("cases", 20))
        .into_par_iter()
        .map(|i| {
            let r = random_unconditional_convex(&mut case_rng(seed, i as u64), dim)
                .and_then(|(f, out)| km_product(&f, Some(&out)));
            match r {
                Ok(r) => vec![
                    Case::new(format!("{i:03}-lower"), Ok(r.lower)),
                    Case::new(format!("{i:03}-upper"), Ok(r.upper)),
                ],
                Err(e) => vec![Case::new(format!("{i:03}-lower"), Err(e))],
            }
        })
        .collect();
    Ok(per_case.into_iter().flatten().collect())
}

fn reverse_laplace() -> Result<Vec<Case>> {
    // e^{-f} with f = |x| + log 2 is the Laplace density
    let f = ConvexPotential::from_fn(Grid::line(-40.0, 40.0, 40_001)?, |x| x[0].abs() + 2f64.ln())?;
    let out = Grid::line(-1.1, 1.1, 22_000)?;
    let r = reverse_gap(&f, Some(&out))?;
    Ok(vec![
        Case::new("gap", Ok(r.gap)),
        Case::new("lebesgue_chain", Ok(r.lebesgue_chain)),
    ])
}

fn moment_map(p: &Params, seed: u64) -> Result<Vec<Case>> {
    let cfg = MomentMapConfig {
        n: p.usize("n", 8192),
        tol: p.f64("tol", 1e-6),
        ..Default::default()
    };
    let target = p.str("target", "two_point");
    if target == "random" {
        let per_case: Vec<Case> = (0..p.usize("cases", 10))
            .into_par_iter()
            .map(|i| {
                let r = random_moment_target(&mut case_rng(seed, i as u64)).and_then(|mu| {
                    let a = solve_fixed_point(&mu, &cfg)?;
                    let b = solve_variational(&mu, &cfg)?;
                    Ok(GapReport::new(density_l1(&a.rho, &b.rho)?, 1e-4, 0.0))
                });
                Case::new(format!("{i:03}-agreement"), r)
            })
            .collect();
        return Ok(per_case);
    }
    let mu = if target == "gaussian" {
        Law::Gaussian(GaussianParams::scalar(0.0, p.f64("var", 4.0))?)
    } else {
        Law::Discrete(DiscreteMeasure::uniform(1, vec![-1.0, 1.0])?)
    };
    let sol = solve_moment_map_with(&mu, &cfg)?;
    let mut out = vec![
        Case::new(
            "pushforward",
            Ok(GapReport::new(sol.pushforward_residual, cfg.tol, 0.0)),
        ),
        Case::new(
            "x_dot_grad_phi",
            Ok(GapReport::new(x_dot_grad_phi_check(&sol).abs(), 1e-5, 0.0)),
        ),
    ];
    let xs = sol.grid().axis_centers(0);
    if target == "gaussian" {
        // rho = N(0, 1/var)
        let var = p.f64("var", 4.0);
        let exact = GridDensity::from_fn(sol.grid().clone(), |x| {
            (var / (2.0 * PI)).sqrt() * (-0.5 * var * x[0] * x[0]).exp()
        })?;
        out.push(Case::new(
            "density_l1",
            density_l1(&sol.rho, &exact).map(|d| GapReport::new(d, 1e-4, 0.0)),
        ));
    } else {
        let sup = xs
            .iter()
            .zip(sol.phi.values())
            .filter(|(x, _)| x.abs() < 10.0)
            .map(|(x, v)| (v - x.abs() - 2f64.ln()).abs())
            .fold(0.0, f64::max);
        out.push(Case::new("phi_is_abs", Ok(GapReport::new(sup, 1e-4, 0.0))));
    }
    Ok(out)
}

fn reverse_lsi(p: &Params) -> Result<Vec<Case>> {
    let rho = if p.str("density", "gaussian") == "gaussian" {
        let var = p.f64("var", 1.0);
        let l = 12.0 * var.sqrt();
        GridDensity::from_fn(Grid::line(-l, l, p.usize("n", 4001))?, |x| {
            (-x[0] * x[0] / (2.0 * var)).exp()
        })?
    } else {
        GridDensity::from_fn(Grid::line(-4.0, 4.0, p.usize("n", 8192))?, |x| {
            (-x[0].powi(4)).exp()
        })?
    };
    Ok(vec![Case::new("gap", reverse_lsi_gap(&rho))])
}

pub fn set_from(p: &Params) -> Result<CenteredSet> {
    let kind = match p.str("set", "interval_union") {
        "interval_union" => SetKind::IntervalUnion {
            intervals: p
                .intervals("intervals")
                .unwrap_or_else(|| vec![(-1.0, 1.0)]),
        },
        "ball" => SetKind::Ball {
            dim: p.usize("dim", 2),
            radius: p.f64("radius", 1.0),
        },
        "slab" => {
            let normal = p.floats("normal").unwrap_or_else(|| vec![1.0, 0.0]);
            SetKind::Slab {
                normal,
                half_width: p.f64("radius", 1.0),
            }
        }
        _ => SetKind::SymmetricUnion {
            center: p.floats("center").unwrap_or_else(|| vec![2.0, 0.0]),
            radius: p.f64("radius", 1.0),
        },
    };
    CenteredSet::new(kind)
}

fn concentration(p: &Params, seed: u64) -> Result<Output> {
    let a = set_from(p)?;
    let rs = p
        .floats("radii")
        .unwrap_or_else(|| (0..=16).map(|k| 0.25 * k as f64).collect());
    let mc = McConfig {
        samples: p.usize("samples", 1_000_000),
        seed,
    };
    let rows = concentration_check(&a, &rs, &mc)?;
    let cases = rows
        .iter()
        .map(|r| Case::new(format!("r={}", r.r), Ok(r.report.clone())))
        .collect();
    Ok(Output {
        cases,
        artifacts: vec![("enlargement.csv".into(), to_csv(&rows))],
    })
}

fn marton(p: &Params) -> Result<Vec<Case>> {
    let c = marton_demo_with(&set_from(p)?, p.f64("r", 1.0), p.usize("n", 1 << 16))?;
    let ent =
        |e: lab_core::concentration::ConditionalEntropy| GapReport::new(e.discrepancy(), 1e-6, 0.0);
    Ok(vec![
        Case::new("support", Ok(c.support.clone())),
        Case::new("transport", Ok(c.transport.clone())),
        Case::new("concentration", Ok(c.concentration())),
        Case::new("entropy_mu", Ok(ent(c.entropy_mu))),
        Case::new("entropy_nu", Ok(ent(c.entropy_nu))),
    ])
}

fn backends(p: &Params, seed: u64) -> Vec<Case> {
    let (dim, max_atoms) = (p.usize("dim", 1), p.usize("max_atoms", 30).max(1));
    let per_case: Vec<Vec<Case>> = (0..p.usize("cases", 100))
        .into_par_iter()
        .map(|i| {
            let c = random_instance(&mut case_rng(seed, i as u64), dim, max_atoms)
                .and_then(|(a, b)| compare_backends(&a, &b));
            match c {
                Ok(c) => {
                    let mut v = vec![Case::new(
                        format!("{i:03}-sinkhorn"),
                        Ok(c.sinkhorn_report()),
                    )];
                    if let Some(q) = c.quantile_report() {
                        v.push(Case::new(format!("{i:03}-quantile"), Ok(q)));
                    }
                    v
                }
                Err(e) => vec![Case::new(format!("{i:03}-sinkhorn"), Err(e))],
            }
        })
        .collect();
    per_case.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use toml::Table;

    fn run(c: Checker, src: &str) -> Output {
        let t: Table = src.parse().unwrap();
        c.run(&Params(&t), 0).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for c in Checker::ALL {
            assert_eq!(Checker::from_name(c.name()), Some(c));
        }
    }

    #[test]
    fn equality_family_is_tight() {
        let o = run(Checker::EqualityFamily, "cases = 3\ndims = [1, 4]");
        assert_eq!(o.cases.len(), 6);
        for c in o.cases {
            assert!(c.report.unwrap().gap.abs() < 1e-8);
        }
    }

    #[test]
    fn counterexample_is_violated() {
        let o = run(
            Checker::NoncenteredCounterexample,
            "m1 = [1.0, 0.0]\nm2 = [-1.0, 0.5]",
        );
        assert!(o.cases[0].report.as_ref().unwrap().is_violated());
    }

    #[test]
    fn noncentered_gaussian_pair_is_an_error_row() {
        let o = run(Checker::GaussianPair, "mu_mean = 1.0");
        assert!(matches!(
            o.cases[0].report,
            Err(LabError::NotCentered { .. })
        ));
    }

    #[test]
    fn concentration_emits_the_enlargement_table() {
        let o = run(
            Checker::Concentration,
            "intervals = [[-1, 1]]\nradii = [0, 1]",
        );
        assert_eq!(o.cases.len(), 2);
        assert_eq!(o.artifacts[0].1.lines().count(), 3);
    }

    #[test]
    fn lsi_deficit_is_nonnegative() {
        let o = run(
            Checker::LsiDeficit,
            "mu_var = 2.0\nnu_var = 0.5\nnu_mean = 0.3",
        );
        assert!(!o.cases[0].report.as_ref().unwrap().is_violated());
    }
}
