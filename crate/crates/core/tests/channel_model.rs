use hbf_bm::array::BeamVector;
use hbf_bm::channel::{beamformed_channel, draw_channel, evolve_channel, read_channel, write_channel, EvolveOptions};
use hbf_bm::sim::{trial_rng, SimConfig};

#[test]
fn average_energy_matches_array_sizes() {
    let cfg = SimConfig::default();
    let (bs, ue) = (cfg.array.bs().unwrap(), cfg.array.ue().unwrap());
    let n = 400;
    let mean: f64 = (0..n)
        .map(|i| {
            let mut rng = trial_rng(3, i);
            draw_channel(&cfg.channel, &bs, &ue, &mut rng).unwrap().h().norm_squared()
        })
        .sum::<f64>()
        / n as f64;
    let ratio = mean / (bs.len() * ue.len()) as f64;
    assert!((0.9..1.1).contains(&ratio), "{ratio}");
}

#[test]
fn evolution_keeps_powers_and_moves_angles() {
    let cfg = SimConfig::default();
    let mut rng = trial_rng(8, 0);
    let ch = draw_channel(&cfg.channel, &cfg.array.bs().unwrap(), &cfg.array.ue().unwrap(), &mut rng).unwrap();
    let next = evolve_channel(&ch, &EvolveOptions::default(), &mut rng).unwrap();
    assert_eq!(ch.paths().len(), next.paths().len());
    let mut moved = 0;
    for (a, b) in ch.paths().iter().zip(next.paths()) {
        assert_eq!(a.power, b.power);
        assert_eq!((a.cluster, a.subpath), (b.cluster, b.subpath));
        moved += usize::from(a.bs_dir != b.bs_dir);
    }
    assert_eq!(moved, ch.paths().len());
}

#[test]
fn sub_paths_of_a_cluster_drift_together() {
    let cfg = SimConfig::default();
    let mut rng = trial_rng(9, 0);
    let ch = draw_channel(&cfg.channel, &cfg.array.bs().unwrap(), &cfg.array.ue().unwrap(), &mut rng).unwrap();
    let opts = EvolveOptions {
        redraw_delays: false,
        ..EvolveOptions::default()
    };
    let next = evolve_channel(&ch, &opts, &mut rng).unwrap();
    for cluster in 0..cfg.channel.n_clusters {
        let shifts: Vec<f64> = ch
            .paths()
            .iter()
            .zip(next.paths())
            .filter(|(p, _)| p.cluster == cluster)
            .map(|(a, b)| b.bs_dir.azimuth_offset() - a.bs_dir.azimuth_offset())
            .collect();
        for s in &shifts {
            assert!((s - shifts[0]).abs() < 1e-9, "cluster {cluster}: {shifts:?}");
        }
    }
}

#[test]
fn dump_replays_bit_exactly() {
    let cfg = SimConfig::default();
    let mut rng = trial_rng(10, 0);
    let ch = draw_channel(&cfg.channel, &cfg.array.bs().unwrap(), &cfg.array.ue().unwrap(), &mut rng).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ch.json");
    write_channel(&ch, &path).unwrap();
    let back = read_channel(&path).unwrap();
    assert_eq!(back.h(), ch.h());
}

#[test]
fn beamformed_channel_has_one_column_per_aip() {
    let cfg = SimConfig::default();
    let cb = cfg.build_codebook().unwrap();
    let mut rng = trial_rng(11, 0);
    let ch = draw_channel(&cfg.channel, &cfg.array.bs().unwrap(), &cfg.array.ue().unwrap(), &mut rng).unwrap();
    let u: Vec<BeamVector> = (0..2).map(|k| cb.beam(1, 4 + k).unwrap().beam_vector()).collect();
    let eff = beamformed_channel(&ch, &u).unwrap();
    assert_eq!(eff.shape(), (4, 2));
    for (i, beam) in u.iter().enumerate() {
        let direct = ch.combine(i, beam.as_slice());
        for (c, x) in direct.iter().enumerate() {
            assert!((eff[(c, i)] - x).norm() < 1e-12);
        }
    }
    assert!(beamformed_channel(&ch, &u[..1]).is_err());
}
