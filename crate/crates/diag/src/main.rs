use nalgebra::DVector;
use num_complex::Complex;
use shockstab_core::contour::*;
use shockstab_core::evans::*;
use shockstab_core::model::*;
use shockstab_core::pipeline::*;
use shockstab_core::profile::*;
use std::time::Instant;

fn main() {
    let pot = ElasticPotential::w0();
    // 4-point configurations from the sweeps
    for (variant, a2, a3, s) in [
        (ModelVariant::Compressible2D, 0.08, 0.59, 0.75),
        (ModelVariant::Transverse, 0.1, 0.8, 0.8),
    ] {
        let alpha = DVector::from_vec(vec![a2, a3]);
        let t = Instant::now();
        let plan = plan_cases(variant, &pot, &alpha, s,
            TargetRule::FourPointConfigurations { n_interior: 5 }, CaseFilters::default()).unwrap();
        println!("--- {} ({a2},{a3},{s}): {} runs / {} skipped", variant.name(), plan.runs.len(), plan.skipped.len());
        for run in &plan.runs {
            match run_candidate(&run.cand, &pot, &CaseSettings::default(), run.seed.clone()) {
                Ok(res) => println!("  {:} fam={:?} w={} {}", run.cand.shock_class.name(),
                    run.family_index, res.report.winding, res.verdict.label()),
                Err(e) => println!("  ERROR [{} fam={:?}]: {e}", run.cand.shock_class.name(), run.family_index),
            }
        }
        println!("  elapsed {:?}", t.elapsed());
    }

    // 9x9 decoupling: in-plane comp2d profile embedded in 3D
    let alpha = DVector::from_vec(vec![0.1, 1.0]);
    let s = 1.9;
    let plan = plan_cases(ModelVariant::Compressible2D, &pot, &alpha, s, TargetRule::AllLaxPairs,
        CaseFilters::default()).unwrap();
    let run = &plan.runs[0];
    let grid2 = compute_profile(&run.cand, &pot, &ProfileOptions::default()).unwrap();
    let grid3 = grid2.embed_in_plane().unwrap();
    let t = Instant::now();
    let spec = ContourSpec::new(2.0);
    let windings: Vec<i64> = [
        (ModelVariant::Compressible3D, &grid3),
        (ModelVariant::Compressible2D, &grid2),
        (ModelVariant::Transverse, &grid2),
    ].iter().map(|(v, g)| {
        let sys = EvansSystem::new(*v, g, &pot).unwrap();
        let mut ev = EvansEvaluator::new(sys, 1.0, DruryOptions::default()).unwrap();
        let report = winding_number(&mut ev, &spec).unwrap();
        println!("  {}: k=({}, {}), winding {}, verdict {}", v.name(), ev.k_plus, ev.k_minus,
            report.winding, report.verdict.label());
        report.winding
    }).collect();
    println!("9x9 = {} vs 6x6 + 3x3 = {} + {} -> {}", windings[0], windings[1], windings[2],
        if windings[0] == windings[1] + windings[2] { "DECOUPLED OK" } else { "MISMATCH" });
    println!("elapsed {:?}", t.elapsed());

    // conjugate symmetry check on the embedded 9x9 for good measure
    let sys = EvansSystem::new(ModelVariant::Compressible3D, &grid3, &pot).unwrap();
    let mut ev = EvansEvaluator::new(sys, 1.0, DruryOptions::default()).unwrap();
    let lam = Complex::new(0.7, 0.9);
    let d1 = EvansEvaluator::eval(&mut ev, lam).unwrap().value;
    let d2 = EvansEvaluator::eval(&mut ev, lam.conj()).unwrap().value;
    println!("9x9 conj symmetry rel err: {:.2e}", (d1.conj() - d2).norm() / d1.norm());
}
