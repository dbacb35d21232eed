use proptest::prelude::*;

use dcsp::cost::{cost_dcsp_general, cost_ssp, CostParams};
use dcsp::problem::{generate, ProblemConfig, ProblemInstance};
use dcsp::pursuit::{dcsp_run, ssp_run};
use dcsp::Topology;

#[test]
fn instance_file_round_trip() {
    let inst = generate(&ProblemConfig::new(40, 12, 3, 4, 77)).unwrap();
    let file = tempfile::NamedTempFile::new().unwrap();
    inst.dump(std::io::BufWriter::new(file.reopen().unwrap())).unwrap();
    let back = ProblemInstance::load(std::io::BufReader::new(file.reopen().unwrap())).unwrap();
    assert_eq!(back, inst);
    let ring = Topology::ring(4, 2).unwrap();
    assert_eq!(dcsp_run(&back, &ring, 9).unwrap(), dcsp_run(&inst, &ring, 9).unwrap());
}

#[test]
fn explicit_adjacency_is_costed_by_its_link_count() {
    let inst = generate(&ProblemConfig::new(50, 16, 4, 5, 3)).unwrap();
    let topo = Topology::parse_adjacency("1:2;2:3,4;3:1;4:5,1,2;5:").unwrap();
    let run = dcsp_run(&inst, &topo, 12).unwrap();
    assert_eq!(topo.neighbor_links(), 7);
    let expected = cost_dcsp_general(50, 4, 5, run.iterations as u64, 7);
    assert_eq!(run.wire.accounted(), expected);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn wire_counts_match_closed_forms(
        n in 12usize..80,
        k in 1usize..5,
        l in 2usize..9,
        g_off in 0usize..8,
        seed in any::<u64>(),
    ) {
        let m = (3 * k).max(4).min(n);
        let g = 2 + g_off % (l - 1);
        let inst = generate(&ProblemConfig::new(n, m, k, l, seed)).unwrap();
        let topo = Topology::ring(l, g).unwrap();
        if let Ok(run) = dcsp_run(&inst, &topo, 3 * k) {
            let want = cost_dcsp_general(n as u64, k as u64, l as u64, run.iterations as u64, topo.neighbor_links() as u64);
            prop_assert_eq!(run.wire.accounted(), want);
            prop_assert_eq!(run.wire.total(), want + (l * (l - 1)) as u64);
        }
        if let Ok(run) = ssp_run(&inst, 3 * k) {
            let p = CostParams::new(n as u64, k as u64, l as u64, l as u64, run.iterations as u64);
            prop_assert_eq!(run.wire.accounted(), cost_ssp(&p));
        }
    }

    #[test]
    fn reported_residual_is_the_minimum_seen(
        k in 1usize..5,
        l in 2usize..7,
        seed in any::<u64>(),
    ) {
        let inst = generate(&ProblemConfig::new(60, 3 * k + 2, k, l, seed)).unwrap();
        if let Ok(run) = dcsp_run(&inst, &Topology::ring(l, 2).unwrap(), 3 * k) {
            let min = run.residual_trace.iter().cloned().fold(f64::INFINITY, f64::min);
            let at_stop = run.log.iter().rev().find(|e| !e.reverted).map(|e| e.residual_sum)
                .unwrap_or(run.residual_trace[0]);
            prop_assert_eq!(at_stop, min);
            prop_assert_eq!(run.support.len(), k);
        }
    }
}
