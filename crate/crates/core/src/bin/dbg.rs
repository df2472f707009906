use benders_core::bench::{load_instance, InstanceSource};
use benders_core::model::StrategyKind;
use benders_core::separation::SepMode;
fn main() {
    let loaded = load_instance(&InstanceSource::Cst { n: 6, k: 8, r: 5.0, seed: 2 }).unwrap();
    let mut config = loaded.default_config();
    config.strategy = StrategyKind::L2;
    config.mode = SepMode::Gpa;
    let factory = loaded.oracle_factory();
    match benders_core::master::bd_solve(loaded.inst.clone(), &config, factory.as_ref()) {
        Ok(r) => println!("ok: {:?} {}", r.status, r.objective),
        Err(e) => println!("err: {}", e),
    }
}
