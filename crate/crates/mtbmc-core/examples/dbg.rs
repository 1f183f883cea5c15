use mtbmc_core::cfg::build_cfg;
use mtbmc_core::frontend::{load, SourceProgram};
use mtbmc_core::oracle::Oracle;
use mtbmc_core::strategies::{verify, VerifyConfig};
fn main() {
    let src = "thread ha;\nthread hb;\nthread A() { join(hb); }\nthread B() { join(ha); }\nmain { atomic { create(ha, A); create(hb, B); } }";
    let tp = load(&SourceProgram::inline(src)).unwrap();
    let cfgs = build_cfg(&tp);
    let oracle = Oracle::from_cfgs(&tp, &cfgs, 8);
    println!("oracle: {:?}", oracle.verdict());
    let cfg = VerifyConfig { width: 8, ..Default::default() };
    match verify(&tp, &cfg) {
        Ok(r) => println!("verify: {:?}", r.verdict),
        Err(e) => println!("verify err: {e}"),
    }
    // manual replay
    let session = mtbmc_core::symex::Session::prepare(&tp, 10, true);
    let o2 = Oracle::from_unrolled(&tp, &session.cfgs, 8);
    // main cfg: find create nodes
    let m = &session.cfgs.threads[0].cfg;
    for (i, n) in m.nodes.iter().enumerate() {
        println!("main node {i}: {:?} -> {:?}", std::mem::discriminant(&n.kind), n.succ);
    }
    let guide = vec![(0usize, 1usize), (0, 2)];
    println!("replay: {:?}", o2.replay(&guide, &[], &[]));
}
