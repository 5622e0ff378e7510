use criterion::{black_box, criterion_group, criterion_main, Criterion};
use vsynth::dsp::{bandpass, baseline_rate, boxes_from_masks, detect_peaks, dft_rate, BaselineConfig};
use vsynth::io::{decode_vsv, encode_vsv};
use vsynth::model::{forward, loss_and_grads, ModelConfig, ModelParams, RunMode, UpsampleMode};
use vsynth::{generate_video, FrequencyRange, TimeSeries, VideoConfig};

fn series(n: usize) -> TimeSeries {
    let v = (0..n).map(|t| (t as f64 * 0.07).sin() + 0.3 * (t as f64 * 0.9).cos()).collect();
    TimeSeries::new(v, 27.0).unwrap()
}

fn generator(c: &mut Criterion) {
    let cfg = VideoConfig::default();
    c.bench_function("generate_video 64x64x256", |b| b.iter(|| generate_video(black_box(&cfg)).unwrap()));
}

fn dsp(c: &mut Criterion) {
    let s = series(1000);
    let band = FrequencyRange::new(0.1, 0.8).unwrap();
    c.bench_function("bandpass 1000", |b| b.iter(|| bandpass(black_box(&s), 0.1, 0.8).unwrap()));
    c.bench_function("dft_rate 1000", |b| b.iter(|| dft_rate(black_box(&s), &band).unwrap()));
    c.bench_function("detect_peaks 1000", |b| b.iter(|| detect_peaks(black_box(&s.values), 40)));

    let sample = generate_video(&VideoConfig {
        num_frames: 1000,
        ..VideoConfig::default()
    })
    .unwrap();
    let boxes = boxes_from_masks(&sample.gt_masks).unwrap();
    let cfg = BaselineConfig::default();
    c.bench_function("baseline_rate 64x64x1000", |b| {
        b.iter(|| baseline_rate(black_box(&sample.frames), &boxes, &cfg).unwrap())
    });
}

fn formats(c: &mut Criterion) {
    let video = generate_video(&VideoConfig::default()).unwrap().frames;
    let bytes = encode_vsv(&video);
    c.bench_function("encode_vsv 64x64x256", |b| b.iter(|| encode_vsv(black_box(&video))));
    c.bench_function("decode_vsv 64x64x256", |b| b.iter(|| decode_vsv(black_box(&bytes)).unwrap()));
}

fn model(c: &mut Criterion) {
    let cfg = ModelConfig {
        frames: 64,
        height: 32,
        width: 32,
        temporal_strides: vec![2, 2, 1, 1],
        skip_connections: true,
        center_input: true,
        upsample: UpsampleMode::Linear,
        ..ModelConfig::default()
    };
    let p = ModelParams::init(&cfg).unwrap();
    let batch = 2;
    let n = cfg.frames * cfg.height * cfg.width;
    let frames: Vec<f64> = (0..batch * n).map(|i| (i % 97) as f64 / 97.0).collect();
    let signal: Vec<f64> = (0..batch * cfg.frames).map(|i| (i % 13) as f64 / 13.0).collect();
    let masks: Vec<f64> = (0..batch * n).map(|i| (i % 7 == 0) as u8 as f64).collect();
    let mut group = c.benchmark_group("model 32x32x64 batch 2");
    group.sample_size(10);
    group.bench_function("forward eval", |b| {
        b.iter(|| forward(&p, &cfg, black_box(&frames), batch, RunMode::eval()).unwrap())
    });
    group.bench_function("loss and gradients", |b| {
        b.iter(|| loss_and_grads(&p, &cfg, black_box(&frames), &signal, &masks, batch, RunMode::train_without_dropout()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, generator, dsp, formats, model);
criterion_main!(benches);
