use treepursuit::linalg::{norm2, residual, SupportSet};
use treepursuit::recovery::{preselect, tmp_with_theta, Preselection, TmpConfig};
use treepursuit::signals::measurement_instance;

#[test]
#[ignore]
fn debug_k_sweep() {
    for k in [10usize, 15, 20, 25, 30] {
        let cfg = TmpConfig::new(k); // gOMP L=2, |Theta| = 2k, unlimited
        let trials = 20;
        let mut hits = 0;
        let mut pre_hits = 0;
        for t in 0..trials {
            let inst = measurement_instance(100, 256, k, None, 20_000 + t).unwrap();
            let pre = preselect(&inst.phi, &inst.y, &cfg).unwrap();
            if inst.x.support.is_subset_of(&pre.theta) {
                pre_hits += 1;
            }
            let res = tmp_with_theta(&inst.phi, &inst.y, &cfg, &pre.theta).unwrap();
            if res.support == inst.x.support {
                hits += 1;
            }
        }
        println!("K={k}: TMP {hits}/{trials}, pre-containment {pre_hits}/{trials}");
    }
}

#[test]
#[ignore]
fn debug_one_failing_trial() {
    let k = 35;
    let cfg = TmpConfig {
        preselection: Preselection::OmpExtended,
        preselection_size: 70,
        ..TmpConfig::new(k)
    };
    let inst = measurement_instance(100, 256, k, None, 10_000).unwrap();
    let pre = preselect(&inst.phi, &inst.y, &cfg).unwrap();
    println!(
        "Theta contains T: {}",
        inst.x.support.is_subset_of(&pre.theta)
    );
    let r_t = residual(&inst.phi, &inst.y, &inst.x.support).unwrap();
    println!("||r_T|| = {:.3e}, ||y|| = {:.3e}", norm2(&r_t), norm2(&inst.y));
    // Candidate residual of the best k-subset reachable greedily from a true
    // prefix of each size: how good is the completion along the true path?
    for i in [1usize, 5, 10, 15, 20, 25, 30, 34] {
        let prefix: Vec<usize> = inst.x.support.as_slice()[..i].to_vec();
        let path = treepursuit::recovery::SearchPath::from_indices(prefix).unwrap();
        let eval =
            treepursuit::recovery::noncausal_completion(&inst.phi, &inst.y, &path, k).unwrap();
        let true_in_candidate = eval
            .candidate
            .iter()
            .filter(|&j| inst.x.support.contains(j))
            .count();
        println!(
            "true prefix {i}: candidate residual {:.4e}, |candidate ∩ T| = {true_in_candidate}/{k}",
            eval.candidate_residual_norm
        );
    }
    let res = tmp_with_theta(&inst.phi, &inst.y, &cfg, &pre.theta).unwrap();
    let overlap = res
        .support
        .iter()
        .filter(|&j| inst.x.support.contains(j))
        .count();
    let stats = res.stats.unwrap();
    println!(
        "TMP exact {} overlap {overlap}/{k} residual {:.4e} expanded {} eps_trace head {:?}",
        res.support == inst.x.support,
        res.residual_norm,
        stats.expanded,
        &stats.epsilon_trace[..8.min(stats.epsilon_trace.len())]
    );
    let tail = &stats.epsilon_trace[stats.epsilon_trace.len().saturating_sub(6)..];
    println!("eps_trace tail {tail:?}");
}
