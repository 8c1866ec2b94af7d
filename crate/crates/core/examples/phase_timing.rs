use std::time::Instant;
use weil_core::slstar::{Census, PresentationConfig, enumerate_group};
use weil_core::weildata::{verify_data_conditions, DatumCheckConfig, WeilDatum};
use weil_core::weilrep::*;
fn main() {
    let pc = PresentationConfig { exhaustive_limit: 500, samples: 64, seed: 0 };
    let d = WeilDatum::standard(5, 1, 1).unwrap();
    let t = Instant::now();
    let dcfg = DatumCheckConfig { exhaustive_limit: 1_000_000_000, seed: 0, census: pc.clone(), ..DatumCheckConfig::default() };
    let r = verify_data_conditions(&d, &dcfg).unwrap();
    eprintln!("datum {:?} {:?}", t.elapsed(), r.conditions.iter().map(|c| c.instances).collect::<Vec<_>>());
    let census = Census::build(d.group(), &pc).unwrap();
    let rep = WeilRep::new(d.clone()).unwrap();
    let rcfg = RepCheckConfig { census: pc.clone(), ..RepCheckConfig::default() };
    let t = Instant::now();
    verify_rep_relations(&rep, &census, &rcfg).unwrap();
    eprintln!("relations {:?}", t.elapsed());
    let t = Instant::now();
    let table = enumerate_group(d.group(), 10_000_000).unwrap();
    eprintln!("bfs {:?}", t.elapsed());
    let t = Instant::now();
    verify_homomorphism(&rep, &table, 1000, 0).unwrap();
    eprintln!("hom {:?}", t.elapsed());
    let t = Instant::now();
    verify_elements_unitary(&rep, &table, 100, 0).unwrap();
    eprintln!("el unitary {:?}", t.elapsed());
}
