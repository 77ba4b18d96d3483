//! Compiles and runs a small C program against the generated header and
//! the static library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "omc.h"

int main(void) {
    OmcScattering s;
    if (omc_scatter(0.0, 0.5, 0.5, 0.0, &s) != OMC_STATUS_OK) return 1;
    if (fabs(s.p_success - 1.0) > 1e-12) return 2;
    OmcUnitCell *cell = NULL;
    if (omc_unit_cell_new(300e-9, 0.65, 0.45, 0.6, 0.17, 2, &cell) != OMC_STATUS_INVALID_INPUT) return 3;
    char msg[128];
    if (omc_last_error_message(msg, sizeof msg) == 0) return 4;
    if (omc_unit_cell_new(300e-9, 0.65, 0.45, 0.6, 0.17, 32, &cell) != OMC_STATUS_OK) return 5;
    double fill = 0.0;
    omc_unit_cell_fill_fraction(cell, &fill);
    omc_unit_cell_free(cell);
    printf("%.3f\n", fill);
    return fill > 0.0 && fill < 1.0 ? 0 : 6;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // test binaries live in <target>/<profile>/deps
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libomc_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let exe = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler is available");
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
}
