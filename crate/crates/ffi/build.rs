//! Regenerate `include/ivse.h` from the exported signatures.
//!
//! The header is committed so C consumers can build without a Rust toolchain;
//! this script keeps it in lockstep with the source (cbindgen only rewrites
//! the file when the content changes).

use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    let header = crate_dir.join("include/ivse.h");

    let config = cbindgen::Config {
        language: cbindgen::Language::C,
        include_guard: Some("IVSE_H".into()),
        cpp_compat: true,
        documentation: true,
        header: Some("/* C interface to the ivse vortex-stretching laboratory. Generated; do not edit. */".into()),
        usize_is_size_t: true,
        enumeration: cbindgen::EnumConfig {
            prefix_with_name: true,
            ..Default::default()
        },
        ..Default::default()
    };

    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("header generation failed")
        .write_to_file(header);

    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=build.rs");
}
