//! Scratch: desk-scale sweep to eyeball blocking levels. Not a gate.

use eonsim::engine::{run_experiment, ExperimentConfig, Routing, SimContext};
use eonsim::partition::{BinSizeSet, LeftoverPolicy, PartitionPlan, PlanScheme};
use eonsim::spr::{SchedulerConfig, SprMethod};
use eonsim::topology::{load_network, PathTable};
use eonsim::traffic::TrafficConfig;
use std::path::PathBuf;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn dt_ctx(scheme: PlanScheme, routing: Routing, method: SprMethod) -> SimContext {
    let net = load_network(&data("dt14_nodes.csv"), &data("dt14_edges.csv")).unwrap();
    let paths = PathTable::compute(&net, 4);
    let sizes = BinSizeSet::contiguous(1, 10).unwrap();
    let plan = match scheme {
        PlanScheme::Sip => PartitionPlan::sip(
            360,
            &sizes,
            &LeftoverPolicy::ExtraBins(vec![3, 2, 1, 0, 0, 0, 0, 0, 0, 2]),
        )
        .unwrap(),
        PlanScheme::Sp => {
            PartitionPlan::sp(360, &sizes, &LeftoverPolicy::GreedySmallest).unwrap()
        }
    };
    SimContext {
        net,
        paths,
        plan,
        routing,
        sched: SchedulerConfig {
            t0: 0.05,
            margin: 0,
            method,
        },
    }
}

#[test]
#[ignore]
fn sweep() {
    let combos = [
        (PlanScheme::Sip, Routing::Pbr, SprMethod::Atm),
        (PlanScheme::Sp, Routing::Pbr, SprMethod::Atm),
        (PlanScheme::Sip, Routing::Pbr, SprMethod::Dpm),
        (PlanScheme::Sp, Routing::Pbr, SprMethod::Dpm),
        (PlanScheme::Sip, Routing::Llr, SprMethod::Atm),
        (PlanScheme::Sip, Routing::Llr, SprMethod::Dpm),
    ];
    for (scheme, routing, method) in combos {
        let ctx = dt_ctx(scheme, routing, method);
        let traffic = TrafficConfig {
            load: 0.0,
            mean_holding: 1.0,
            requests: 20_000,
            n_partitions: 10,
            vf: None,
        };
        let cfg = ExperimentConfig {
            loads: vec![400.0, 500.0, 600.0, 700.0, 800.0],
            trials_max: 3,
            requests_per_trial: 20_000,
            confidence: 0.90,
            ci_half_width_rel: 0.0,
            seed: 1,
        };
        let start = std::time::Instant::now();
        let results = run_experiment(&ctx, &traffic, &cfg, 1);
        println!(
            "== {} ({:.1}s)",
            ctx.scenario_name(),
            start.elapsed().as_secs_f64()
        );
        for r in &results {
            println!(
                "  load {:4}: bp {:.6e} ± {:.1e}  rf {:.5}  sur {:.4}  moves/trial {:.0}",
                r.load,
                r.bp.mean,
                r.bp.half_width,
                r.rf.mean,
                r.sur.mean,
                r.trials.iter().map(|t| t.moves).sum::<u64>() as f64 / r.trials.len() as f64
            );
        }
    }
}
