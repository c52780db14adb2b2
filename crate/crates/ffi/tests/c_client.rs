//! Compiles a C program against the generated header and static library and
//! checks its output.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <math.h>
#include "decay.h"

int main(void) {
    DecayDeltaShell *sys = NULL;
    if (decay_delta_shell_new(5.0, &sys) != DECAY_STATUS_OK) return 10;
    DecayComplex a;
    if (decay_delta_shell_survival_amplitude(sys, 1.0, &a) != DECAY_STATUS_OK) return 11;
    DecayHistory d;
    if (decay_delta_shell_decompose_survival(sys, 10.0, 5.0, &d) != DECAY_STATUS_OK) return 12;
    if (fabs(d.pp + d.interference + d.qq - d.total) > 1e-10 * d.total) return 13;
    if (decay_delta_shell_decompose_survival(sys, 1.0, 2.0, &d) != DECAY_STATUS_DOMAIN) return 14;
    if (decay_last_error_message() == NULL) return 15;
    decay_delta_shell_free(sys);
    DecayComplex pole;
    DecayDetector *det = NULL;
    if (decay_detector_new(5.0, 1.0, &det) != DECAY_STATUS_OK) return 16;
    size_t n = 0;
    if (decay_detector_localized_count(det, &n) != DECAY_STATUS_OK || n < 1) return 17;
    if (decay_detector_localized_energy(det, n, &pole) != DECAY_STATUS_DOMAIN) return 18;
    decay_detector_free(det);
    printf("%.6f %.6f %s\n", a.re * a.re + a.im * a.im, d.total, decay_version());
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().and_then(|deps| deps.parent()).unwrap().to_path_buf();
    // Test builds link the rlib only, so refresh the static library.
    let built = Command::new(std::env::var("CARGO").unwrap_or_else(|_| "cargo".into()))
        .args(["build", "-q", "-p", "decay-ffi", "--lib", "--target-dir"])
        .arg(lib_dir.parent().unwrap())
        .status()
        .expect("cargo available");
    assert!(built.success());
    assert!(lib_dir.join("libdecay_ffi.a").exists(), "static library not found in {}", lib_dir.display());
    let work = tempfile::tempdir().unwrap();
    let src = work.path().join("client.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let bin = work.path().join("client");
    let status = Command::new(std::env::var("CC").unwrap_or_else(|_| "cc".into()))
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(lib_dir.join("libdecay_ffi.a"))
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "client exited with {:?}", out.status);
    let text = String::from_utf8(out.stdout).unwrap();
    let fields: Vec<&str> = text.split_whitespace().collect();
    assert_eq!(fields[0], "0.144434");
    assert_eq!(fields[2], env!("CARGO_PKG_VERSION"));
}
