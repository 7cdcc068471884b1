//! Benchmark fixtures shared by the criterion targets.

use fingersynth_core::impression::generate_impression;
use fingersynth_core::masterprint::{synthesize_master, MasterPrintParams};
use fingersynth_core::minutiae::minutiae_from_image;
use fingersynth_core::{derive_rng, FingerClass, GrayImage, MinutiaSet};

/// One live impression of a fixed finger.
pub fn sample_impression(subject: u64, class: u8, impression: u32) -> GrayImage {
    let class = FingerClass::new(class).expect("valid class");
    let mut rng = derive_rng(99, subject, class, 0);
    let params = MasterPrintParams::sample(class, &mut rng);
    let master = synthesize_master(&params, class, &mut rng).expect("master print");
    generate_impression(&master.image, &mut derive_rng(99, subject, class, impression))
}

/// Minutiae of [`sample_impression`].
pub fn sample_template(subject: u64, class: u8, impression: u32) -> MinutiaSet {
    minutiae_from_image(&sample_impression(subject, class, impression))
}
