use std::io::{self, Write};

use ftn_core::detect::DetectorKind;
use ftn_core::modem::Modulation;
use ftn_core::sim::{
    run_ber_point, spectral_efficiency, sweep, ChannelPath, Coding, CsvSink, SimConfig, Simulator,
};
use ftn_core::Error;
use statrs::function::erf::erfc;

fn q(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

fn awgn_ber(ebn0_db: f64) -> f64 {
    q((2.0 * 10f64.powf(ebn0_db / 10.0)).sqrt())
}

fn uncoded(tau: f64, kind: DetectorKind) -> SimConfig {
    let mut cfg = SimConfig::new(tau, kind);
    cfg.coding = Coding::Uncoded { frame_len: 1024 };
    cfg
}

fn within_three_sigma(ber: f64, p: f64, bits: u64) -> bool {
    (ber - p).abs() <= 3.0 * (p * (1.0 - p) / bits as f64).sqrt()
}

#[test]
fn paper_spectral_efficiencies() {
    for (tau, se) in [(0.6, 1.28), (0.7, 1.10), (0.8, 0.96), (1.0, 0.77)] {
        let got = spectral_efficiency(&SimConfig::new(tau, DetectorKind::Sss));
        assert!((got - se).abs() < 0.005, "τ = {tau}: {got}");
    }
    let mut cfg = uncoded(1.0, DetectorKind::Sss);
    cfg.beta = 1e-12;
    assert!((spectral_efficiency(&cfg) - 2.0).abs() < 1e-9);
}

#[test]
fn awgn_ber_at_8_4_db() {
    let cfg = uncoded(1.0, DetectorKind::Sss);
    let rec = run_ber_point(&cfg, 8.4).unwrap();
    let p = awgn_ber(8.4);
    assert!((p - 1e-4).abs() < 1e-5);
    assert!(within_three_sigma(rec.ber, p, rec.bits_simulated), "{} vs {p}", rec.ber);
}

#[test]
fn bcjr_without_isi_follows_q_function() {
    let mut cfg = uncoded(1.0, DetectorKind::Bcjr);
    cfg.ebn0_grid = vec![4.0, 6.0, 8.0];
    cfg.min_bit_errors = 300;
    for rec in sweep(&cfg, None).unwrap() {
        let p = awgn_ber(rec.ebn0_db);
        assert!(
            within_three_sigma(rec.ber, p, rec.bits_simulated),
            "{} dB: {} vs {p}",
            rec.ebn0_db,
            rec.ber
        );
    }
}

#[test]
fn noiseless_surrogate_has_no_errors() {
    let mut cfg = uncoded(1.0, DetectorKind::Sss);
    cfg.max_frames = 200;
    let rec = run_ber_point(&cfg, 40.0).unwrap();
    assert_eq!(rec.bit_errors, 0);
    assert_eq!(rec.frames, 200);
    assert_eq!(rec.ber, 0.0);
}

#[test]
fn coded_pipeline_is_clean_at_high_snr() {
    let mut cfg = SimConfig::new(1.0, DetectorKind::Sss);
    cfg.max_frames = 10_000;
    let rec = run_ber_point(&cfg, 40.0).unwrap();
    assert_eq!(rec.frames, 10_000);
    assert_eq!(rec.bit_errors, 0);
    assert_eq!(rec.bits_simulated, 10_000 * 512);
}

#[test]
fn ber_decreases_along_the_grid() {
    let mut cfg = uncoded(1.0, DetectorKind::Sss);
    cfg.ebn0_grid = vec![2.0, 4.0, 6.0];
    cfg.min_bit_errors = 500;
    let recs = sweep(&cfg, None).unwrap();
    assert_eq!(recs.len(), 3);
    assert!(recs.windows(2).all(|w| w[1].ber < w[0].ber));
    assert!(recs.iter().all(|r| r.bit_errors >= 500));
}

#[test]
fn single_point_grid_equals_run_point() {
    let mut cfg = uncoded(0.8, DetectorKind::Sss);
    cfg.ebn0_grid = vec![5.0];
    let a = sweep(&cfg, None).unwrap();
    let b = run_ber_point(&cfg, 5.0).unwrap();
    assert_eq!(a.len(), 1);
    assert!(a[0].same_counts(&b));
}

#[test]
fn empty_grid_is_an_error() {
    let cfg = uncoded(0.8, DetectorKind::Sss);
    assert!(matches!(sweep(&cfg, None), Err(Error::Config(_))));
}

fn csv_bytes(cfg: &SimConfig) -> Vec<u8> {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ber.csv");
    let mut sink = CsvSink::create(&path).unwrap();
    sweep(cfg, Some(&mut sink)).unwrap();
    drop(sink);
    std::fs::read(&path).unwrap()
}

#[test]
fn same_seed_gives_identical_csv() {
    let mut cfg = SimConfig::new(0.8, DetectorKind::Sss);
    cfg.ebn0_grid = vec![2.0, 3.0];
    cfg.max_frames = 40;
    let a = csv_bytes(&cfg);
    let b = csv_bytes(&cfg);
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "ebn0_db,tau,beta,detector,K,coding,N,M,bits,bit_errors,frame_errors,ber,fer,seed"
    );
    assert_eq!(lines.count(), 2);

    cfg.master_seed = 2;
    assert_ne!(csv_bytes(&cfg), b);
}

#[test]
fn thread_count_does_not_change_results() {
    let mut cfg = uncoded(0.8, DetectorKind::Bcjr);
    cfg.min_bit_errors = 50;
    cfg.max_frames = 30;
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_ber_point(&cfg, 5.0).unwrap())
    };
    assert!(run(1).same_counts(&run(3)));
}

#[test]
fn editing_the_grid_leaves_other_points_alone() {
    let mut cfg = uncoded(0.8, DetectorKind::Sss);
    cfg.ebn0_grid = vec![4.0, 6.0];
    let a = sweep(&cfg, None).unwrap();
    cfg.ebn0_grid = vec![3.0, 5.0, 6.0];
    let b = sweep(&cfg, None).unwrap();
    assert!(a[1].same_counts(&b[2]));
}

#[test]
fn early_abort_after_two_clean_points() {
    let mut cfg = uncoded(1.0, DetectorKind::Sss);
    cfg.ebn0_grid = vec![30.0, 31.0, 32.0, 33.0];
    cfg.max_frames = 5;
    assert_eq!(sweep(&cfg, None).unwrap().len(), 2);
    cfg.early_abort = false;
    assert_eq!(sweep(&cfg, None).unwrap().len(), 4);
}

#[test]
fn waveform_and_discrete_paths_agree_statistically() {
    let mut cfg = uncoded(0.8, DetectorKind::Sss);
    cfg.min_bit_errors = 600;
    let d = run_ber_point(&cfg, 8.0).unwrap();
    cfg.channel_path = ChannelPath::Waveform;
    let w = run_ber_point(&cfg, 8.0).unwrap();
    let p = (d.bit_errors + w.bit_errors) as f64 / (d.bits_simulated + w.bits_simulated) as f64;
    let sd = (p * (1.0 - p) * (1.0 / d.bits_simulated as f64 + 1.0 / w.bits_simulated as f64)).sqrt();
    assert!((d.ber - w.ber).abs() <= 3.0 * sd, "{} vs {}", d.ber, w.ber);
}

#[test]
fn bcjr_beats_sss_under_isi() {
    let mut sss = uncoded(0.8, DetectorKind::Sss);
    sss.min_bit_errors = 300;
    let mut bcjr = uncoded(0.8, DetectorKind::Bcjr);
    bcjr.min_bit_errors = 300;
    let a = run_ber_point(&sss, 7.0).unwrap();
    let b = run_ber_point(&bcjr, 7.0).unwrap();
    assert!(b.ber < a.ber, "{} vs {}", b.ber, a.ber);
}

#[test]
fn qpsk_frames_have_half_as_many_symbols() {
    let mut cfg = SimConfig::new(0.8, DetectorKind::Bcjr);
    cfg.modulation = Modulation::Qpsk;
    cfg.coding = Coding::Polar {
        n: 256,
        m: 128,
        epsilon: 0.5,
    };
    cfg.ebn0_grid = vec![30.0];
    let sim = Simulator::new(cfg).unwrap();
    let f = sim.frame(30.0, 0).unwrap();
    assert_eq!(f.symbols.len(), 128);
    assert_eq!(f.llrs.len(), 256);
    assert_eq!(f.decoded_bits, f.info_bits);
}

/// Accepts `ok` lines, then fails.
struct FailingWriter {
    ok: usize,
}

impl Write for FailingWriter {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let lines = buf.iter().filter(|&&b| b == b'\n').count();
        if lines > self.ok {
            return Err(io::Error::other("disk full"));
        }
        self.ok -= lines;
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

#[test]
fn io_failure_keeps_completed_points() {
    let mut cfg = uncoded(1.0, DetectorKind::Sss);
    cfg.ebn0_grid = vec![0.0, 1.0, 2.0];
    let mut sink = CsvSink::from_writer(Box::new(FailingWriter { ok: 2 }));
    match sweep(&cfg, Some(&mut sink)) {
        Err(Error::PartialSweep { completed, .. }) => {
            assert_eq!(completed.len(), 1);
            assert_eq!(completed[0].ebn0_db, 0.0);
        }
        other => panic!("expected a partial sweep, got {other:?}"),
    }
}
