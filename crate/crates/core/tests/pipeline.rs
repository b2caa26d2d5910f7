use mtf_core::mesh::{extract_skeleton, generate_partitioned_disk, load_mesh, save_mesh};
use mtf_core::presets::disk_media;
use mtf_core::skeleton_solver::{
    estimate_coercivity, gmres, monolithic_reference, relative_l2_difference, richardson, DenseOperator, ProbeMethod,
    SkeletonSystem, SolverConfig, SystemForm,
};
use mtf_core::traces::Closure;
use mtf_core::Exec;

fn config(exec: Exec) -> SolverConfig {
    SolverConfig {
        exec,
        ..SolverConfig::default()
    }
}

#[test]
fn saved_mesh_solves_like_the_generated_one() {
    let mesh = generate_partitioned_disk(3, 1.0, 1.5, 0.15).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("disk.mesh");
    save_mesh(&mesh, &path).unwrap();
    let loaded = load_mesh(&path).unwrap();
    assert_eq!(loaded, mesh);

    let sk = extract_skeleton(&loaded).unwrap();
    let coeffs = disk_media(0.2).unwrap();
    let sys = SkeletonSystem::build(&loaded, &sk, &coeffs, &SolverConfig::default()).unwrap();
    let (p, rep) = richardson(&sys, 0.5, 1e-10, 10_000, None).unwrap();
    assert!(rep.converged);
    let rec = sys.reconstruct(&p).unwrap();
    let mono = monolithic_reference(&loaded, &coeffs).unwrap();
    assert!(relative_l2_difference(&loaded, &rec.global, &mono) <= 1e-6);
}

#[test]
fn execution_policies_give_identical_results() {
    let mesh = generate_partitioned_disk(3, 1.0, 1.5, 0.15).unwrap();
    let sk = extract_skeleton(&mesh).unwrap();
    let coeffs = disk_media(0.0).unwrap();
    let seq = SkeletonSystem::build(&mesh, &sk, &coeffs, &config(Exec::Sequential)).unwrap();
    let par = SkeletonSystem::build(&mesh, &sk, &coeffs, &config(Exec::Parallel)).unwrap();
    let (ps, rs) = gmres(&seq, SystemForm::Product, 1e-11, 300, 100, None).unwrap();
    let (pp, rp) = gmres(&par, SystemForm::Product, 1e-11, 300, 100, None).unwrap();
    assert_eq!(rs.residuals, rp.residuals);
    assert_eq!(ps, pp);
    let ds = DenseOperator::build(&seq, SystemForm::Product, 2000).unwrap();
    let dp = DenseOperator::build(&par, SystemForm::Product, 2000).unwrap();
    assert_eq!(ds.matrix(), dp.matrix());
}

#[test]
fn exact_closure_still_matches_the_monolithic_solve() {
    // the Yukawa closure only changes the transmission operator, not the limit
    let mesh = generate_partitioned_disk(3, 1.0, 1.5, 0.15).unwrap();
    let sk = extract_skeleton(&mesh).unwrap();
    let coeffs = disk_media(0.0).unwrap();
    let cfg = SolverConfig {
        closure: Closure::ExactCircle,
        gamma: Some(0.5),
        omega: Some(2.0),
        ..SolverConfig::default()
    };
    let sys = SkeletonSystem::build(&mesh, &sk, &coeffs, &cfg).unwrap();
    assert!(estimate_coercivity(&sys, ProbeMethod::Dense).unwrap().alpha > 0.0);
    let (p, rep) = gmres(&sys, SystemForm::Difference, 1e-11, 400, 200, None).unwrap();
    assert!(rep.converged);
    let rec = sys.reconstruct(&p).unwrap();
    let mono = monolithic_reference(&mesh, &coeffs).unwrap();
    assert!(relative_l2_difference(&mesh, &rec.global, &mono) <= 1e-6);
}
