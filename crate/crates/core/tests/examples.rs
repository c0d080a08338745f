//! Smoke runs of every example at reduced sizes.

macro_rules! example {
    ($name:ident) => {
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", stringify!($name), ".rs"));
        }
    };
}

example!(benchmark);
example!(evaluate);
example!(fuse_sequence);
example!(guided_upsample);
example!(lut_visualize);
example!(mertens_baseline);
example!(synth_dataset);
example!(train_and_extract);

#[test]
fn examples_run() {
    let tmp = tempfile::tempdir().unwrap();
    benchmark::run(vec![32], 5).unwrap();
    evaluate::run().unwrap();
    fuse_sequence::run(&tmp.path().join("fuse")).unwrap();
    assert!(tmp.path().join("fuse/fused.png").is_file());
    guided_upsample::run().unwrap();
    lut_visualize::run(None, &tmp.path().join("lut.png")).unwrap();
    mertens_baseline::run(&tmp.path().join("mertens")).unwrap();
    synth_dataset::run(&tmp.path().join("data")).unwrap();
    train_and_extract::run(2).unwrap();
}
