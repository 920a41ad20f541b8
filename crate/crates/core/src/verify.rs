//! Batch verification runners producing [`DefectReport`]s.

use nalgebra::DVector;
use rand::Rng;

use crate::bs_g2::{associative_closed_form, associative_frame, associative_defect, coassociative_defect, BsG2Structure, BsProfile, SurfaceFramePoint};
use crate::bs_spin7::{cayley_defect, cayley_frame, verify_clifford_identities, x_closure_check, BsSpin7Structure, CliffordRep};
use crate::exterior::InnerProductSpace;
use crate::error::{consistency, Error, Result};
use crate::immersions::{second_fundamental_form, CatalogEntry};
use crate::octonion::{comass_check, rank_by_eigencount, G2FlatStructure, OctonionTable, Spin7FlatStructure};
use crate::report::DefectReport;
use crate::sampling::{rng, uniform_ball};
use crate::stenzel::{conormal_samples, default_phase_power, slag_defect, StenzelProfile, T_MAX};
use crate::tolerances;

/// Default tolerance of `verify stenzel`.
pub const STENZEL_DEFAULT_TOL: f64 = 1e-8;
/// Default tolerance of `verify g2` and `verify spin7`.
pub const SURFACE_DEFAULT_TOL: f64 = 1e-6;
/// Fibre radius bound for the bundle samplers.
pub const FIBRE_RADIUS: f64 = 2.0;

#[derive(Debug, Clone)]
pub struct StenzelJob {
    pub entry: CatalogEntry,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub profile: StenzelProfile,
    /// Exponent `k` of the phase `i^k`; `None` uses `p − n`.
    pub phase_power: Option<i32>,
}

pub fn verify_stenzel(job: &StenzelJob) -> Result<DefectReport> {
    check_samples(job.samples)?;
    let imm = job.entry.build()?;
    let mut r = rng(job.seed);
    let samples = conormal_samples(&imm, job.samples, T_MAX, &mut r);
    let phase = job.phase_power.unwrap_or_else(|| default_phase_power(imm.p, imm.n));
    let slag = slag_defect(&imm, &samples, &job.profile, phase)?;
    let mut report = DefectReport::new("stenzel", job.samples, job.seed, job.tol);
    report.immersion = Some(job.entry.clone());
    report.profile = Some(job.profile.name());
    report.phase_power = Some(phase);
    report.defects.lagrangian = Some(slag.lagrangian_defect);
    report.defects.special = Some(slag.special_defect);
    report.judge("lagrangian", slag.lagrangian_defect);
    report.judge("special", slag.special_defect);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum G2Mode {
    Assoc,
    Coassoc,
}

impl G2Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Assoc => "assoc",
            Self::Coassoc => "coassoc",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SurfaceJob {
    pub entry: CatalogEntry,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub profile: BsProfile,
}

fn check_samples(samples: usize) -> Result<()> {
    if samples == 0 {
        return Err(Error::InvalidParameter {
            name: "samples",
            reason: "need at least one sample".into(),
        });
    }
    Ok(())
}

fn surface_points(job: &SurfaceJob) -> Result<Vec<(SurfaceFramePoint, [f64; 2])>> {
    check_samples(job.samples)?;
    let imm = job.entry.build()?;
    if imm.p != 2 || imm.n != 4 {
        return Err(Error::InvalidParameter {
            name: "surface",
            reason: format!("need a surface in S^4, `{}` has p={}, n={}", imm.name, imm.p, imm.n),
        });
    }
    let mut r = rng(job.seed);
    let params = imm.sample_random(job.samples, &mut r);
    params
        .iter()
        .map(|s| {
            let point = SurfaceFramePoint::from_sff(&second_fundamental_form(&imm, s)?)?;
            let t = uniform_ball(2, FIBRE_RADIUS, &mut r);
            Ok((point, [t[0], t[1]]))
        })
        .collect()
}

fn surface_report(structure: &str, job: &SurfaceJob) -> DefectReport {
    let mut report = DefectReport::new(structure, job.samples, job.seed, job.tol);
    report.immersion = Some(job.entry.clone());
    report.profile = Some(job.profile.name().to_string());
    report
}

pub fn verify_g2(job: &SurfaceJob, mode: G2Mode) -> Result<DefectReport> {
    let points = surface_points(job)?;
    let structure = BsG2Structure::new(job.profile);
    let mut report = surface_report("bs_g2", job);
    report.mode = Some(mode.name().to_string());
    match mode {
        G2Mode::Assoc => {
            let mut worst: f64 = 0.0;
            for (point, t) in &points {
                let t1 = t[0];
                let defect = associative_defect(point, t1, &structure)?;
                let closed = associative_closed_form(point, t1, &structure)?;
                consistency("associative closed form", (&defect - &closed).max_abs(), tolerances::EXACT * (1.0 + closed.max_abs()))?;
                let g = structure.at(t1.abs())?;
                worst = worst.max(defect.inner(&defect)?.sqrt() / frame_scale(&g.space, &associative_frame(point, t1)));
            }
            report.defects.associative = Some(worst);
            report.judge("associative", worst);
        }
        G2Mode::Coassoc => {
            let mut plus = [0.0f64; 4];
            let mut minus = [0.0f64; 4];
            for (point, t) in &points {
                let a = coassociative_defect(point, t[0], t[1], &structure)?;
                let b = coassociative_defect(&point.reversed(), t[0], t[1], &structure)?;
                for k in 0..4 {
                    plus[k] = plus[k].max(a[k].abs());
                    minus[k] = minus[k].max(b[k].abs());
                }
            }
            report.defects.coassociative = Some(plus);
            report.defects.coassociative_reversed = Some(minus);
            let best = max4(&plus).min(max4(&minus));
            report.judge("coassociative", best);
        }
    }
    Ok(report)
}

/// Product of the metric lengths of a frame; dividing by it makes a multilinear
/// defect independent of how the frame vectors are scaled.
fn frame_scale(space: &InnerProductSpace, frame: &[DVector<f64>]) -> f64 {
    frame.iter().map(|f| space.norm(f)).product()
}

fn max4(v: &[f64; 4]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn verify_spin7(job: &SurfaceJob) -> Result<DefectReport> {
    let points = surface_points(job)?;
    let structure = BsSpin7Structure::new(job.profile);
    let mut report = surface_report("bs_spin7", job);
    let (mut eta_worst, mut closure_worst) = (0.0f64, 0.0f64);
    for (point, [t1, t2]) in &points {
        let d = cayley_defect(&point.shape, *t1, *t2, &structure)?;
        for i in 0..2 {
            consistency("cayley closed form", (d.coefficients[i] - d.closed_form[i]).abs(), tolerances::ETA_DECOMPOSITION * (1.0 + d.closed_form[i].abs()))?;
        }
        let g = structure.at(t1.hypot(*t2))?;
        let frame = cayley_frame(&point.shape, *t1, *t2);
        eta_worst = eta_worst.max(d.eta.inner(&d.eta)?.sqrt() / frame_scale(&g.space, &frame));
        closure_worst = closure_worst.max(x_closure_check(&frame, &g)?);
    }
    report.defects.cayley = Some(eta_worst);
    report.defects.x_closure = Some(closure_worst);
    let a = report.judge("cayley", eta_worst);
    let b = report.judge("x_closure", closure_worst);
    report.set_verdict("verifiers_agree", a == b);
    Ok(report)
}

/// Sizes of the algebra self-test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelftestSizes {
    pub triples: usize,
    pub comass_frames: usize,
}

impl Default for SelftestSizes {
    fn default() -> Self {
        Self {
            triples: 1000,
            comass_frames: 2000,
        }
    }
}

fn random_vector<R: Rng>(dim: usize, r: &mut R) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| r.gen_range(-1.0..1.0))
}

/// Flat-model identities: associator, cross products, `π₇`, comass, Clifford relations.
pub fn algebra_selftest(seed: u64, sizes: SelftestSizes) -> Result<DefectReport> {
    let mut r = rng(seed);
    let mut report = DefectReport::new("algebra", sizes.triples, seed, tolerances::EXACT);
    let record = |report: &mut DefectReport, name: &str, count: usize, residual: f64, tol: f64| {
        report.checks.insert(name.to_string(), count);
        report.residuals.insert(name.to_string(), residual);
        report.set_verdict(name, residual <= tol);
    };
    let table = OctonionTable::cayley_dickson();
    let g2 = G2FlatStructure::flat();
    let spin7 = Spin7FlatStructure::flat();

    let (mut assoc, mut cross, mut triple) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..sizes.triples {
        let [a, b, c] = [0; 3].map(|_| random_vector(7, &mut r));
        let oct = g2.associator_octonion(&table, &a, &b, &c);
        let form = g2.associator_form(&a, &b, &c)?;
        assoc = assoc.max((&oct - &form).amax());
        let uv = g2.cross7(&a, &b)?;
        cross = cross.max((g2.phi.at(&[&a, &b, &c]) - g2.space.inner(&uv, &c)).abs());
        let [x, y, z, w] = [0; 4].map(|_| random_vector(8, &mut r));
        let xyz = spin7.triple_cross(&x, &y, &z)?;
        triple = triple.max((spin7.phi.at(&[&x, &y, &z, &w]) - spin7.space.inner(&xyz, &w)).abs());
    }
    record(&mut report, "associator", sizes.triples, assoc, tolerances::EXACT);
    record(&mut report, "cross_product", sizes.triples, cross, tolerances::EXACT);
    record(&mut report, "triple_cross_product", sizes.triples, triple, tolerances::EXACT);

    let hodge = (&g2.phi.hodge_star() - &g2.star_phi).max_abs();
    record(&mut report, "star_phi_is_hodge_dual", 1, hodge, tolerances::EXACT);
    let self_dual = (&spin7.phi.hodge_star() - &spin7.phi).max_abs();
    record(&mut report, "cayley_form_self_dual", 1, self_dual, tolerances::EXACT);

    let p = spin7.pi7_matrix();
    let idempotence = (&p * &p - &p).amax();
    record(&mut report, "pi7_idempotent", 1, idempotence, tolerances::EXACT);
    let rank = rank_by_eigencount(&p, 0.5);
    record(&mut report, "pi7_rank_7", 1, (rank as f64 - 7.0).abs(), 0.0);

    for (name, form) in [("comass_phi", &g2.phi), ("comass_star_phi", &g2.star_phi), ("comass_cayley_form", &spin7.phi)] {
        let worst = comass_check(form, sizes.comass_frames, &mut r);
        record(&mut report, name, sizes.comass_frames, (worst - 1.0).max(0.0), tolerances::COMASS);
    }

    let clifford = verify_clifford_identities(&CliffordRep::standard(), &nalgebra::Matrix4::identity())?;
    record(&mut report, "clifford_identities", clifford.identities_checked, clifford.max_residual(), tolerances::EXACT);
    Ok(report)
}
