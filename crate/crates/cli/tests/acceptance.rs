//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line for
//! each, and exits non-zero if any failed.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::Rng;

use specpcm::array::{MachineConfig, MachineLayout, MachineState};
use specpcm::cluster::{
    agglomerate, cluster_bucket, distance_matrix_from_trace, distance_program, score_to_distance, DistanceMatrix,
    LoweringParams, Merge,
};
use specpcm::config::{Config, Workload};
use specpcm::cost::{
    area_report, Catalog, Component, CostLedger, Event, Phase, CLOCK_MHZ, CYCLE_NS, MVM_CYCLES, PROGRAM_PULSE_CYCLES,
    PROGRAM_PULSE_NS,
};
use specpcm::device::{
    ber_at_sigma, sigma_for_ber, DeviceKind, DeviceModel, NoiseParams, SBTE_GST467, TITE_GST467,
};
use specpcm::dse::run_once;
use specpcm::dse::SweepWorkload;
use specpcm::encoder::Encoder;
use specpcm::hdc::{dot_bipolar, dot_packed, pack, padded_dimension, BipolarHv, PackedHv};
use specpcm::isa::{self, parse_program, render_program, Instruction};
use specpcm::rng::{seeded, SimRng};
use specpcm::search::{fdr_filter, search_spectra};
use specpcm::synth::{generate, SynthParams};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.1?}, limit {limit:?}"))?;
    Ok(t)
}

fn noiseless() -> NoiseParams {
    NoiseParams {
        fixed: Some(0.0),
        ..NoiseParams::default()
    }
}

fn random_packed<R: Rng>(dim: usize, n: u8, r: &mut R) -> PackedHv {
    pack(&BipolarHv::random(dim, r), n).unwrap()
}

fn c1_noiseless_fidelity() -> Check {
    let start = Instant::now();
    let mut r = seeded(101);
    let dim = padded_dimension(2048, 3);
    let len = dim / 3;
    let rows = 4;
    let mut cfg = MachineConfig::new(DeviceModel::new(DeviceKind::SbTe, noiseless()));
    cfg.adc_bypass = true;
    let mut cases = 0;
    for _ in 0..1000 / rows {
        let layout = MachineLayout::for_vectors(len, rows, 128, 128);
        let mut m = MachineState::new(layout, cfg.clone(), 1024).map_err(|e| e.to_string())?;
        let stored: Vec<PackedHv> = (0..rows).map(|_| random_packed(dim, 3, &mut r)).collect();
        for (i, v) in stored.iter().enumerate() {
            m.store_vector(i, v, 0, &mut r).map_err(|e| e.to_string())?;
        }
        let q = random_packed(dim, 3, &mut r);
        let got = m.mvm_full(&q, 0..rows, 6, &mut r).map_err(|e| e.to_string())?;
        for (v, y) in stored.iter().zip(got) {
            let want = dot_packed(&q, v).unwrap() as f64;
            ensure(y == want, || format!("mvm {y} != dot {want}"))?;
            cases += 1;
        }
    }
    let t = within_time(start, Duration::from_secs(10))?;
    Ok(format!("{cases}/{cases} exact at D=2048 n=3 in {t:.1?}"))
}

fn c2_packing_unbiased() -> Check {
    let mut r = seeded(202);
    let trials = 10_000;
    let dim = padded_dimension(2048, 3);
    let diffs: Vec<f64> = (0..trials)
        .map(|_| {
            let a = BipolarHv::random(dim, &mut r);
            let b = BipolarHv::random(dim, &mut r);
            let packed = dot_packed(&pack(&a, 3).unwrap(), &pack(&b, 3).unwrap()).unwrap();
            (packed - dot_bipolar(&a, &b).unwrap()) as f64
        })
        .collect();
    let mean = diffs.iter().sum::<f64>() / trials as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
    let se = (var / trials as f64).sqrt();
    ensure(mean.abs() <= 3.0 * se, || format!("mean bias {mean:.3} exceeds 3 SE ({se:.3})"))?;

    let mut wins = 0;
    for _ in 0..1000 {
        let a = random_packed(dim, 3, &mut r);
        let b = random_packed(dim, 3, &mut r);
        if dot_packed(&a, &a).unwrap() > dot_packed(&a, &b).unwrap() {
            wins += 1;
        }
    }
    ensure(wins == 1000, || format!("self-match dominated in only {wins}/1000"))?;
    Ok(format!("bias {mean:.3} (SE {se:.3}); self-match dominance 1000/1000"))
}

/// Complete linkage by exhaustive search over every cluster pair each step.
fn naive_linkage(dm: &DistanceMatrix, threshold: f64) -> (Vec<usize>, Vec<Merge>) {
    let n = dm.len();
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut log = Vec::new();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for x in 0..clusters.len() {
            for y in x + 1..clusters.len() {
                let mut d: f64 = 0.0;
                for &i in &clusters[x] {
                    for &j in &clusters[y] {
                        d = d.max(dm.get(i, j));
                    }
                }
                let (a, b) = (clusters[x][0].min(clusters[y][0]), clusters[x][0].max(clusters[y][0]));
                let better = match best {
                    None => true,
                    Some((bd, ba, bb)) => d < bd || (d == bd && (a, b) < (ba, bb)),
                };
                if better {
                    best = Some((d, a, b));
                }
            }
        }
        match best {
            Some((d, a, b)) if d <= threshold => {
                let xb = clusters.iter().position(|c| c[0] == b).unwrap();
                let moved = clusters.remove(xb);
                let xa = clusters.iter().position(|c| c[0] == a).unwrap();
                clusters[xa].extend(moved);
                clusters[xa].sort_unstable();
                log.push(Merge { a, b, distance: d });
            }
            _ => break,
        }
    }
    let mut of = vec![0; n];
    for c in &clusters {
        for &i in c {
            of[i] = c[0];
        }
    }
    (of, log)
}

fn c3_linkage_oracle() -> Check {
    let mut r = seeded(303);
    let mut merges = 0;
    for trial in 0..1000 {
        let n = r.random_range(2..=64);
        let coarse = trial % 2 == 0;
        let dm = DistanceMatrix::from_fn(n, |_, _| {
            if coarse {
                r.random_range(0..=10) as f64 / 10.0
            } else {
                r.random::<f64>()
            }
        })
        .unwrap();
        let threshold = r.random::<f64>();
        let got = agglomerate(&dm, threshold).map_err(|e| e.to_string())?;
        let (of, log) = naive_linkage(&dm, threshold);
        ensure(got.cluster_of == of, || format!("trial {trial}: assignments differ (N={n})"))?;
        ensure(got.merge_log == log, || format!("trial {trial}: merge logs differ (N={n})"))?;
        merges += log.len();
    }
    Ok(format!("1000 matrices, N in 2..=64, {merges} merges identical"))
}

fn c4_isa_round_trip() -> Check {
    let err = |e: specpcm::Error| e.to_string();
    let mut r = seeded(404);

    // Store then read back, noiselessly, through the ISA on every MLC width.
    let cfg = MachineConfig::new(DeviceModel::new(DeviceKind::SbTe, noiseless()));
    let layout = MachineLayout {
        rows: 128,
        cols: 128,
        stripes: 2,
        row_groups: 2,
    };
    let mut m = MachineState::new(layout, cfg, 16).map_err(err)?;
    let mut prog = Vec::new();
    let mut expected = Vec::new();
    for k in 0..48 {
        let n = (k % 3 + 1) as u8;
        let size = r.random_range(1..=128usize);
        let col = r.random_range(0..=128 - size);
        let data = random_packed(size * n as usize, n, &mut r).elems().to_vec();
        let (arr_idx, row_addr) = (r.random_range(0..4usize), r.random_range(0..128usize));
        prog.push(Instruction::StoreHv {
            data: data.clone(),
            arr_idx: arr_idx as i64,
            col_addr: col,
            row_addr,
            mlc_bits: n,
            write_cycles: k as u32 % 4,
        });
        prog.push(Instruction::ReadHv {
            data_size: size,
            arr_idx,
            col_addr: col,
            row_addr,
            mlc_bits: n,
        });
        expected.push(data.iter().map(|&v| v as f64).collect::<Vec<_>>());
    }
    let prog = parse_program(&render_program(&prog), None).map_err(err)?;
    let trace = isa::run(&prog, &mut m, &mut r).map_err(|a| a.to_string())?;
    for (k, want) in expected.iter().enumerate() {
        ensure(&trace.entries[2 * k + 1].outputs == want, || format!("read {k} differs from store"))?;
    }

    // Pipeline versus ISA text versus direct machine calls, on one bucket.
    let data = generate(&SynthParams {
        num_classes: 8,
        per_class: 8,
        seed: 4,
        ..SynthParams::default()
    })
    .map_err(err)?;
    let cfg = Config::default();
    let enc = Encoder::new(&cfg, Workload::Cluster).map_err(err)?;
    let hvs = enc.bipolar_all(&data.copies).map_err(err)?;
    let packed: Vec<PackedHv> = hvs.iter().map(|h| pack(h, cfg.pack_n).unwrap()).collect();
    let n = packed.len();
    let seed = 77;

    let pipeline = cluster_bucket(&hvs, &cfg, &mut seeded(seed)).map_err(err)?.distances;

    let layout = MachineLayout::for_vectors(packed[0].len(), n, cfg.array_rows, cfg.array_cols);
    let params = LoweringParams {
        adc_bits: cfg.adc_bits,
        write_cycles: cfg.write_cycles(Workload::Cluster),
    };
    let text = render_program(&distance_program(&packed, &layout, params).map_err(err)?);
    let mut m = MachineState::new(layout, cfg.machine_config(Workload::Cluster), cfg.num_arrays).map_err(err)?;
    let trace = isa::run(&parse_program(&text, None).map_err(err)?, &mut m, &mut seeded(seed))
        .map_err(|a| a.to_string())?;
    let via_text = distance_matrix_from_trace(&trace, n, enc.dim()).map_err(err)?;

    let mut m = MachineState::new(layout, cfg.machine_config(Workload::Cluster), cfg.num_arrays).map_err(err)?;
    let mut rr = seeded(seed);
    for (i, v) in packed.iter().enumerate() {
        m.store_vector(i, v, params.write_cycles, &mut rr).map_err(err)?;
    }
    let mut direct = DistanceMatrix::zeros(n);
    for i in 0..n {
        m.input_buffer.fill(0);
        for s in 0..layout.stripes {
            let tile = m.tile(layout.tile_index(i / layout.rows, s)).map_err(err)?;
            let (cells, _) = tile.read_row(i % layout.rows, None::<&mut SimRng>).map_err(err)?;
            let width = (packed[i].len() - s * layout.cols).min(layout.cols);
            let bound = cfg.pack_n as f64;
            let levels: Vec<i32> = cells[..width].iter().map(|c| c.round().clamp(-bound, bound) as i32).collect();
            m.input_buffer[s * layout.cols..s * layout.cols + width].copy_from_slice(&levels);
        }
        let scores = m.mvm_rows(0, n, params.adc_bits, cfg.pack_n, &mut rr).map_err(err)?;
        for (j, &y) in scores.iter().enumerate().skip(i + 1) {
            direct.set(i, j, score_to_distance(y, enc.dim())).map_err(err)?;
        }
    }

    let bits = |d: &DistanceMatrix| -> Vec<u64> {
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| d.get(i, j).to_bits())
            .collect()
    };
    ensure(bits(&pipeline) == bits(&via_text), || "pipeline and rendered program differ".into())?;
    ensure(bits(&pipeline) == bits(&direct), || "pipeline and direct machine calls differ".into())?;
    Ok(format!(
        "48 store/read pairs exact; {n}-spectrum distances byte-identical across pipeline, program text and direct calls"
    ))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1.0)
}

fn c5_constants() -> Check {
    let s = &SBTE_GST467;
    let t = &TITE_GST467;
    let table_s1 = [
        (s.prog_current_ua, 80.0),
        (s.prog_voltage_v, 0.7),
        (s.prog_energy_pj, 1.12),
        (s.retention_105c_hours, 30.0),
        (s.low_resistance_kohm, 30.0),
        (s.on_off_ratio, 150.0),
        (s.endurance_cycles, 1e8),
        (t.prog_current_ua, 160.0),
        (t.prog_voltage_v, 0.9),
        (t.prog_energy_pj, 2.88),
        (t.retention_105c_hours, 1e5),
        (t.low_resistance_kohm, 10.0),
        (t.on_off_ratio, 100.0),
        (t.endurance_cycles, 1e8),
    ];
    for (k, (got, want)) in table_s1.iter().enumerate() {
        ensure(close(*got, *want), || format!("device constant {k}: {got} != {want}"))?;
    }
    let ratio = t.prog_energy_pj / s.prog_energy_pj;
    ensure((ratio - 2.571).abs() < 1e-3 && (ratio * 10.0).round() == 26.0, || {
        format!("programming energy ratio {ratio}")
    })?;

    let c = Catalog::table_s3();
    let rows: [(Component, Option<f64>, Option<f64>, u32, f64, f64); 8] = [
        (Component::PcmArray, Some(0.22), Some(0.5), 16384, 3.58, 0.0082),
        (Component::FlashAdc, Some(320.0), Some(920.0), 16, 5.12, 0.0147),
        (Component::Dac, Some(6.56), Some(32.0), 128, 0.84, 0.0041),
        (Component::SlGenDrive, Some(52.5), Some(72.47), 64, 3.36, 0.0046),
        (Component::ReadGen, None, None, 256, 0.51, 0.0018),
        (Component::WlDecodeDrive, Some(4.05), Some(10.68), 256, 1.04, 0.0027),
        (Component::SenseAmp, Some(20.0), Some(75.9), 32, 0.64, 0.0024),
        (Component::Selectors, None, None, 1, 0.50, 0.0017),
    ];
    for (comp, p, a, units, mw, mm2) in rows {
        let e = c.entry(comp);
        ensure(
            e.unit_power_uw == p
                && e.unit_area_um2 == a
                && e.units_per_tile == units
                && close(e.total_power_mw, mw)
                && close(e.total_area_mm2, mm2),
            || format!("catalog entry {comp} differs"),
        )?;
    }
    ensure(close(c.total_power_mw(), 15.59), || format!("total power {}", c.total_power_mw()))?;
    ensure(close(c.total_area_mm2(), 0.0402), || format!("total area {}", c.total_area_mm2()))?;
    let area = area_report(1, &c).total_mm2();
    ensure((area - 0.0402).abs() <= 0.01 * 0.0402, || format!("unit-count area {area} not within 1%"))?;

    ensure(CLOCK_MHZ == 500.0 && CYCLE_NS == 2.0, || "clock".into())?;
    ensure(MVM_CYCLES == 10, || "MVM cycles".into())?;
    ensure(PROGRAM_PULSE_NS == 20.0 && PROGRAM_PULSE_CYCLES == 10, || "program pulse".into())?;

    let mut ledger = CostLedger::new();
    ledger.record(&Event::Program {
        cells: 128,
        wv_cycles: 3,
        prog_energy_pj: s.prog_energy_pj,
    });
    ensure(close(ledger.energy_pj(), 573.44) && ledger.latency_ns() == 80.0, || {
        format!("128-cell write-verify: {} pJ, {} ns", ledger.energy_pj(), ledger.latency_ns())
    })?;
    Ok(format!(
        "{} device values, 8 catalog rows, totals 15.59 mW / 0.0402 mm2, energy ratio {ratio:.2}",
        table_s1.len()
    ))
}

fn c6_adc_gating() -> Check {
    let err = |e: specpcm::Error| e.to_string();
    let adc_energy = |bits: u8| -> Result<f64, String> {
        let mut r = seeded(606);
        let dim = padded_dimension(2048, 3);
        let layout = MachineLayout::for_vectors(dim / 3, 200, 128, 128);
        let cfg = MachineConfig::new(DeviceModel::new(DeviceKind::SbTe, NoiseParams::default()));
        let mut m = MachineState::new(layout, cfg, 1024).map_err(err)?;
        for i in 0..200 {
            m.store_vector(i, &random_packed(dim, 3, &mut r), 0, &mut r).map_err(err)?;
        }
        for _ in 0..5 {
            m.mvm_full(&random_packed(dim, 3, &mut r), 0..200, bits, &mut r).map_err(err)?;
        }
        Ok(m.ledger.phase_energy_pj(Phase::Adc))
    };
    let (e4, e6) = (adc_energy(4)?, adc_energy(6)?);
    let ratio = e4 / e6;
    let want = 15.0 / 63.0;
    ensure(e6 > 0.0 && ((ratio - want) / want).abs() < 1e-3, || {
        format!("ratio {ratio:.6}, expected {want:.6}")
    })?;
    Ok(format!("4-bit/6-bit ADC energy {ratio:.6} (15/63 = {want:.6})"))
}

fn c7_ber_shape() -> Check {
    for kind in [DeviceKind::SbTe, DeviceKind::TiTe] {
        let model = DeviceModel::new(kind, NoiseParams::default());
        for bits in 1..=3u8 {
            let bers: Vec<f64> = (0..=5).map(|wv| model.bit_error_rate(bits, wv)).collect();
            ensure(bers.windows(2).all(|w| w[1] <= w[0]), || {
                format!("{} {bits}-bit BER increases with write-verify: {bers:?}", kind.key())
            })?;
        }
    }
    for sigma in [0.01, 0.03, 0.05, 0.1, 0.2, 0.4] {
        let bers: Vec<f64> = (1..=3).map(|b| ber_at_sigma(b, sigma)).collect();
        ensure(bers.windows(2).all(|w| w[1] > w[0]), || {
            format!("BER not increasing in MLC bits at sigma {sigma}: {bers:?}")
        })?;
    }
    Ok("non-increasing over write-verify 0..=5 for both devices; increasing in MLC bits at 6 sigmas".into())
}

fn c8_noise_robustness() -> Check {
    let start = Instant::now();
    let err = |e: specpcm::Error| e.to_string();
    let data = generate(&SynthParams {
        num_classes: 1000,
        per_class: 1,
        seed: 8,
        ..SynthParams::default()
    })
    .map_err(err)?;
    let sigma = sigma_for_ber(3, 0.10).map_err(err)?;
    let ber = ber_at_sigma(3, sigma);
    let mut cfg = Config::default();
    cfg.hd_dimension = Some(8192);
    cfg.pack_n = 3;
    cfg.noise.fixed = Some(sigma);
    let run = search_spectra(&data.copies, &data.templates, &cfg).map_err(err)?;
    let hits = run
        .results
        .iter()
        .zip(&data.copies)
        .filter(|(res, q)| q.label.as_deref() == Some(res.ref_id.as_str()))
        .count();
    let frac = hits as f64 / data.copies.len() as f64;
    ensure(frac >= 0.90, || format!("top-1 {:.1}% below 90%", 100.0 * frac))?;
    let t = within_time(start, Duration::from_secs(120))?;
    Ok(format!(
        "top-1 {:.1}% over 1000 refs at sigma {sigma:.4} (BER {:.3}) in {t:.1?}",
        100.0 * frac,
        ber
    ))
}

fn c9_trends() -> Check {
    let seeds = 1..=8u64;
    let quality = |edit: &dyn Fn(&mut Config)| -> Result<(f64, f64), String> {
        let (mut q, mut cr) = (0.0, 0.0);
        for seed in seeds.clone() {
            let data = generate(&SynthParams {
                seed,
                ..SynthParams::default()
            })
            .map_err(|e| e.to_string())?;
            let mut cfg = Config::default();
            cfg.seed = seed;
            edit(&mut cfg);
            let m = run_once(SweepWorkload::Cluster { spectra: &data.copies }, &cfg).map_err(|e| e.to_string())?;
            q += m.quality;
            cr += m.clustered_ratio.unwrap_or(0.0);
        }
        let k = seeds.clone().count() as f64;
        Ok((100.0 * q / k, 100.0 * cr / k))
    };

    let (wv0, cr0) = quality(&|c| c.wv_cycles = Some(0))?;
    let (wv3, cr3) = quality(&|c| c.wv_cycles = Some(3))?;
    ensure((wv0 - wv3).abs() < 2.0 && (cr0 - cr3).abs() < 2.0, || {
        format!("write-verify 0 vs 3: quality {wv0:.2} vs {wv3:.2}, clustered {cr0:.2} vs {cr3:.2}")
    })?;

    let by_n: Vec<f64> = (1..=3)
        .map(|n| quality(&|c| c.pack_n = n).map(|x| x.0))
        .collect::<Result<_, _>>()?;
    ensure(by_n.windows(2).all(|w| w[1] <= w[0]) && by_n[0] - by_n[2] <= 3.0, || {
        format!("quality over pack n 1..3: {by_n:.2?}")
    })?;

    let by_d: Vec<f64> = [1024, 2048, 4096]
        .into_iter()
        .map(|d| quality(&|c| c.hd_dimension = Some(d)).map(|x| x.0))
        .collect::<Result<_, _>>()?;
    ensure(by_d.windows(2).all(|w| w[1] >= w[0]), || format!("quality over D: {by_d:.2?}"))?;

    let (adc4, _) = quality(&|c| c.adc_bits = 4)?;
    let (adc6, _) = quality(&|c| c.adc_bits = 6)?;
    ensure((adc6 - adc4).abs() <= 5.0, || format!("ADC 4 vs 6 bits: {adc4:.2} vs {adc6:.2}"))?;

    Ok(format!(
        "8 seeds: wv {wv0:.2}/{wv3:.2}, n {:.2}/{:.2}/{:.2}, D {:.2}/{:.2}/{:.2}, ADC {adc4:.2}/{adc6:.2}",
        by_n[0], by_n[1], by_n[2], by_d[0], by_d[1], by_d[2]
    ))
}

/// Tries every distinct score as the cutoff and keeps the lowest that passes.
fn brute_fdr_threshold(scores: &[f64], decoy: &[bool], q: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    for &t in scores {
        let targets = scores.iter().zip(decoy).filter(|(&s, &d)| s >= t && !d).count();
        let decoys = scores.iter().zip(decoy).filter(|(&s, &d)| s >= t && d).count();
        if decoys as f64 / targets.max(1) as f64 <= q && best.is_none_or(|b| t < b) {
            best = Some(t);
        }
    }
    best
}

fn c10_fdr() -> Check {
    let mut r = seeded(1010);
    let qs = [0.0, 0.01, 0.05, 0.1, 0.25, 0.5];
    for set in 0..500 {
        let n = r.random_range(1..200);
        let coarse = set % 2 == 0;
        let scores: Vec<f64> = (0..n)
            .map(|_| if coarse { r.random_range(0..20) as f64 } else { r.random_range(-5.0..5.0) })
            .collect();
        let p_decoy = r.random_range(0.0..0.6);
        let decoy: Vec<bool> = (0..n).map(|_| r.random_bool(p_decoy)).collect();
        let mut last = 0;
        for q in qs {
            let out = fdr_filter(&scores, &decoy, q);
            let want = brute_fdr_threshold(&scores, &decoy, q);
            ensure(out.threshold == want, || format!("set {set} q {q}: {:?} != {want:?}", out.threshold))?;
            for i in 0..n {
                let expect = !decoy[i] && want.is_some_and(|t| scores[i] >= t);
                ensure(out.accepted[i] == expect, || format!("set {set} q {q}: acceptance of {i}"))?;
            }
            ensure(out.accepted_count() >= last, || format!("set {set}: accepted count falls at q {q}"))?;
            last = out.accepted_count();
        }
    }
    Ok("500 score sets at 6 levels match the exhaustive scan; counts monotone in q".into())
}

fn csv_check(path: &Path, header: &[&str]) -> Result<usize, String> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let h = rd.headers().map_err(|e| e.to_string())?.clone();
    ensure(h.iter().eq(header.iter().copied()), || format!("{}: header {h:?}", path.display()))?;
    let mut rows = 0;
    for rec in rd.records() {
        let rec = rec.map_err(|e| format!("{}: {e}", path.display()))?;
        ensure(rec.len() == header.len(), || format!("{}: ragged row", path.display()))?;
        rows += 1;
    }
    ensure(rows > 0, || format!("{}: no rows", path.display()))?;
    Ok(rows)
}

fn c11_end_to_end() -> Check {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let bin = env!("CARGO_BIN_EXE_specpcm");
    let run = |args: &[&str]| -> Result<String, String> {
        let out = Command::new(bin).args(args).current_dir(d).output().map_err(|e| e.to_string())?;
        ensure(out.status.success(), || {
            format!("`{}` failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr))
        })?;
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    };
    run(&["synth", "--out", "data"])?;
    run(&[
        "cluster", "--input", "data/spectra.mgf", "--out", "clusters.csv", "--metrics", "metrics.csv", "--ledger",
        "cluster.ledger",
    ])?;
    let summary = run(&[
        "search", "--query", "data/spectra.mgf", "--refs", "data/library.mgf", "--out", "psms.csv", "--ledger",
        "search.ledger",
    ])?;
    ensure(summary.contains("identified_count="), || format!("search summary: {summary}"))?;
    run(&["report", "--ledger", "cluster.ledger", "--format", "csv"])?;
    std::fs::write(d.join("report.csv"), run(&["report", "--ledger", "search.ledger", "--format", "csv"])?)
        .map_err(|e| e.to_string())?;

    let clustered = csv_check(&d.join("clusters.csv"), &["spectrum_id", "cluster_id"])?;
    csv_check(
        &d.join("metrics.csv"),
        &["threshold", "clustered_ratio", "incorrect_ratio", "energy_pj", "latency_ns"],
    )?;
    let psms = csv_check(&d.join("psms.csv"), &["query_id", "ref_id", "score", "is_decoy", "accepted"])?;
    csv_check(&d.join("report.csv"), &["section", "item", "energy_pj", "latency_cycles"])?;
    let t = within_time(start, Duration::from_secs(300))?;
    Ok(format!("{clustered} cluster rows, {psms} PSMs, report written in {t:.1?}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("noiseless fidelity", c1_noiseless_fidelity),
        ("packing unbiasedness", c2_packing_unbiased),
        ("clustering oracle equivalence", c3_linkage_oracle),
        ("ISA round trip", c4_isa_round_trip),
        ("constants audit", c5_constants),
        ("ADC gating", c6_adc_gating),
        ("BER shape", c7_ber_shape),
        ("noise robustness", c8_noise_robustness),
        ("trend suite", c9_trends),
        ("FDR correctness", c10_fdr),
        ("end-to-end smoke", c11_end_to_end),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS  {:>2}. {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {:>2}. {name}: {why}", k + 1);
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
