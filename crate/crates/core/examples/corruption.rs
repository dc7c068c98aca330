//! Regret when test points are moved inside an L2 ball before classification.

use interpnn::evaluation::{run_attack_experiment, AttackSpec, CorruptionKind};

fn main() -> interpnn::Result<()> {
    let mut spec = AttackSpec {
        repetitions: 10,
        omega_grid: vec![0.0, 0.0221],
        ..AttackSpec::default()
    };
    spec.gamma_grid = vec![0.0, 0.2];
    let result = run_attack_experiment(&spec)?;
    println!("kind          omega    gamma/d   regret");
    for kind in CorruptionKind::ALL {
        for &omega in &spec.omega_grid {
            for &g in &spec.gamma_grid {
                let r = result.row(kind, omega, g).expect("row");
                println!("{:<12}  {omega:<7}  {g:<7}   {:.5}", kind.name(), r.regret_mean);
            }
        }
    }
    Ok(())
}
