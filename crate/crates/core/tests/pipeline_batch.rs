//! Batch-level behavior: pairing, per-sample seeding, partial failure
//! handling, verification, and the cross-mode seam report.

mod common;

use std::fs;
use std::sync::atomic::{AtomicUsize, Ordering};

use mamsynth::error::Error;
use mamsynth::pipeline::{
    load_manifest, run_batch, seam_report, verify_batch, SynthesisMode,
};
use mamsynth::seed::derive_seed;

#[test]
fn batch_produces_one_labeled_sample_per_benign_entry() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = common::write_fixture_set(&dir.path().join("fixtures"));
    let out = dir.path().join("out");
    let cfg = common::fixture_cfg(SynthesisMode::SoftAdapted);

    let statuses = AtomicUsize::new(0);
    let report = run_batch(&manifest, &cfg, &out, |status| {
        assert!(status.ok, "{}: {}", status.id, status.detail);
        statuses.fetch_add(1, Ordering::Relaxed);
    })
    .unwrap();

    assert_eq!(statuses.load(Ordering::Relaxed), common::PAIR_COUNT);
    assert_eq!(report.records.len(), common::PAIR_COUNT);
    assert_eq!(report.summary.failed, 0);
    assert!(report.summary.mean_seam_gradient.is_some());

    // Output manifest is ordered by manifest index and every image exists.
    for (k, record) in report.records.iter().enumerate() {
        assert!(record.id.starts_with(&format!("{k:04}-b{k}")), "id {}", record.id);
        assert!(out.join(&record.image).exists());
        assert_eq!(record.provenance.synthesis.seed, derive_seed(cfg.seed, k as u64));
        // Round-robin pairing: six benign entries, six donors.
        assert_eq!(record.provenance.synthesis.donor_id, format!("d{k}"));
        // Provenance records fully populated for soft mode.
        assert!(record.provenance.synthesis.mask_params.is_some());
        assert!(record.provenance.synthesis.region_score > 0.0);
    }

    // All provenance fields survive a manifest read-back.
    let reread = mamsynth::pipeline::load_manifest(&manifest).unwrap();
    assert_eq!(reread.benign.len(), common::PAIR_COUNT);
}

#[test]
fn empty_manifest_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("manifest.jsonl");
    fs::write(&manifest, "").unwrap();
    let cfg = common::fixture_cfg(SynthesisMode::HardCutmix);
    assert!(matches!(
        run_batch(&manifest, &cfg, &dir.path().join("out"), |_| {}),
        Err(Error::EmptyManifest)
    ));

    // Donors without any benign entry are equally unusable.
    fs::write(
        &manifest,
        r#"{"id":"d0","image":"missing.png","bbox":[0,0,8,8],"lesion":"mass"}"#,
    )
    .unwrap();
    assert!(matches!(
        run_batch(&manifest, &cfg, &dir.path().join("out2"), |_| {}),
        Err(Error::EmptyManifest)
    ));
}

#[test]
fn per_entry_failures_are_recorded_and_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = dir.path().join("fixtures");
    let manifest = common::write_fixture_set(&fixtures);
    // Append a benign entry whose image does not exist.
    let mut text = fs::read_to_string(&manifest).unwrap();
    text.push_str("{\"id\":\"broken\",\"image\":\"images/nope.png\",\"saliency\":\"saliency/b0.pfm\"}\n");
    fs::write(&manifest, text).unwrap();

    let out = dir.path().join("out");
    let cfg = common::fixture_cfg(SynthesisMode::SoftAdapted);
    let report = run_batch(&manifest, &cfg, &out, |_| {}).unwrap();
    assert_eq!(report.records.len(), common::PAIR_COUNT);
    assert_eq!(report.summary.failed, 1);
    assert_eq!(report.summary.failures[0].benign_id, "broken");

    // The summary on disk records the same failure.
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["failed"], 1);
}

#[test]
fn fully_failing_batch_is_a_run_error() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("manifest.jsonl");
    fs::write(
        &manifest,
        concat!(
            "{\"id\":\"b0\",\"image\":\"gone.png\",\"saliency\":\"gone.pfm\"}\n",
            "{\"id\":\"d0\",\"image\":\"gone2.png\",\"bbox\":[0,0,8,8],\"lesion\":\"mass\"}\n",
        ),
    )
    .unwrap();
    let cfg = common::fixture_cfg(SynthesisMode::HardCutmix);
    assert!(matches!(
        run_batch(&manifest, &cfg, &dir.path().join("out"), |_| {}),
        Err(Error::BatchFailed { count: 1, .. })
    ));
}

#[test]
fn verify_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = common::write_fixture_set(&dir.path().join("fixtures"));
    let out = dir.path().join("out");
    let cfg = common::fixture_cfg(SynthesisMode::FdaCutmix);
    let report = run_batch(&manifest, &cfg, &out, |_| {}).unwrap();

    assert!(verify_batch(&out).unwrap().mismatches.is_empty());

    // Flip one byte of one stored image.
    let victim = out.join(&report.records[2].image);
    let mut bytes = fs::read(&victim).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 0xFF;
    fs::write(&victim, bytes).unwrap();

    let outcome = verify_batch(&out).unwrap();
    assert_eq!(outcome.checked, common::PAIR_COUNT);
    assert_eq!(outcome.mismatches.len(), 1);
    assert!(outcome.mismatches[0].starts_with(&report.records[2].id));
}

#[test]
fn seam_report_reproduces_mode_ordering_on_means() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = common::write_fixture_set(&dir.path().join("fixtures"));
    let cfg = common::fixture_cfg(SynthesisMode::SoftAdapted);
    let stats = seam_report(&manifest, &cfg).unwrap();
    assert_eq!(stats.len(), 3);
    let by_mode = |mode: SynthesisMode| {
        stats
            .iter()
            .find(|s| s.mode == mode)
            .and_then(|s| s.mean_seam_gradient)
            .unwrap()
    };
    let hard = by_mode(SynthesisMode::HardCutmix);
    let fda = by_mode(SynthesisMode::FdaCutmix);
    let soft = by_mode(SynthesisMode::SoftAdapted);
    assert!(soft < fda && fda <= hard, "soft {soft}, fda {fda}, hard {hard}");
    assert!(stats.iter().all(|s| s.samples == common::PAIR_COUNT));
}

#[test]
fn breast_mask_constrains_batch_selection() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = dir.path().join("fixtures");
    let manifest = common::write_fixture_set(&fixtures);

    // Mask out the left half of benign 0; its saliency blob sits around
    // column ~38, so selection must move right of the mask edge.
    let mask = mamsynth::imaging::GrayImage::from_fn(96, 96, |_, j| if j < 48 { 0.0 } else { 1.0 }).unwrap();
    mamsynth::imaging::io::save_image(
        &mask,
        &fixtures.join("images/mask0.png"),
        mamsynth::imaging::io::BitDepth::Eight,
    )
    .unwrap();
    let text = fs::read_to_string(&manifest).unwrap();
    let patched = text.replace(
        "{\"id\":\"b0\",\"image\":\"images/b0.png\",\"saliency\":\"saliency/b0.pfm\"}",
        "{\"id\":\"b0\",\"image\":\"images/b0.png\",\"saliency\":\"saliency/b0.pfm\",\"breast_mask\":\"images/mask0.png\"}",
    );
    assert_ne!(text, patched);
    fs::write(&manifest, patched).unwrap();

    let out = dir.path().join("out");
    let cfg = common::fixture_cfg(SynthesisMode::HardCutmix);
    let report = run_batch(&manifest, &cfg, &out, |_| {}).unwrap();
    let first = &report.records[0];
    assert_eq!(first.provenance.synthesis.benign_id, "b0");
    // Region must keep at most 10% overlap with the masked-out half.
    let region = first.provenance.synthesis.region;
    let overlap_cols = 48usize.saturating_sub(region.left).min(region.width);
    let overlap = (overlap_cols * region.height) as f64 / region.area() as f64;
    assert!(overlap <= 0.10, "region {region:?} overlaps background by {overlap:.2}");

    // Verification still reproduces the masked run.
    assert!(verify_batch(&out).unwrap().mismatches.is_empty());
}

#[test]
fn manifest_round_trip_preserves_donor_bboxes() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = common::write_fixture_set(&dir.path().join("fixtures"));
    let parsed = load_manifest(&manifest).unwrap();
    assert_eq!(parsed.donors.len(), common::PAIR_COUNT);
    for (k, donor) in parsed.donors.iter().enumerate() {
        let (_, bbox) = common::donor_fixture(k);
        assert_eq!(donor.bbox, [bbox.top, bbox.left, bbox.height, bbox.width]);
    }
}
