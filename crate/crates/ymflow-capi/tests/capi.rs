//! Exercises the C surface through the exported symbols, then compiles and
//! runs a small C program against the generated header and shared library.

use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use tempfile::TempDir;

use ymflow_capi::ymf_status::*;
use ymflow_capi::*;

fn cfg_text(out_dir: &str) -> CString {
    CString::new(format!(
        "grid.dims = 6 6 6\n\
         grid.h = 0.25\n\
         grid.domain_kind = torus\n\
         group = su2\n\
         bc = periodic\n\
         mode = zds\n\
         initial_data.kind = smooth\n\
         initial_data.seed = 5\n\
         initial_data.amplitude = 0.5\n\
         stepper.dt_init = 0.001\n\
         stepper.t_end = 0.008\n\
         observables.list = energy dissipation\n\
         output.dir = {out_dir}\n\
         output.checkpoint_every = 0\n"
    ))
    .unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ymf_last_error()).to_string_lossy().into_owned() }
}

#[test]
fn config_parse_emit_hash_round_trip() {
    unsafe {
        let mut cfg: *mut ymf_config = ptr::null_mut();
        let text = cfg_text("out");
        assert_eq!(ymf_config_parse(text.as_ptr(), &mut cfg), YMF_OK);
        assert!(!cfg.is_null());

        let emitted = ymf_config_emit(cfg);
        assert!(!emitted.is_null());
        let mut again: *mut ymf_config = ptr::null_mut();
        assert_eq!(ymf_config_parse(emitted, &mut again), YMF_OK);
        assert_eq!(ymf_config_hash64(cfg), ymf_config_hash64(again));
        assert_ne!(ymf_config_hash64(cfg), 0);

        ymf_string_free(emitted);
        ymf_config_free(cfg);
        ymf_config_free(again);
    }
}

#[test]
fn bad_arguments_set_status_and_message() {
    unsafe {
        let mut cfg: *mut ymf_config = ptr::null_mut();

        let bad = CString::new("grid.dims = 8 8\nstepper.zeal = 3\n").unwrap();
        assert_eq!(ymf_config_parse(bad.as_ptr(), &mut cfg), YMF_ERR_INVALID);
        assert!(cfg.is_null());
        let msg = last_error();
        assert!(msg.contains("unknown key"), "{msg}");
        assert!(msg.contains("grid.dims"), "{msg}");

        assert_eq!(ymf_config_parse(ptr::null(), &mut cfg), YMF_ERR_NULL);
        let text = cfg_text("out");
        assert_eq!(ymf_config_parse(text.as_ptr(), ptr::null_mut()), YMF_ERR_NULL);

        let invalid = [0xffu8, 0];
        assert_eq!(
            ymf_config_parse(invalid.as_ptr().cast(), &mut cfg),
            YMF_ERR_UTF8
        );

        let missing = CString::new("nowhere.ymfc").unwrap();
        let mut field: *mut ymf_field = ptr::null_mut();
        let status = ymf_field_load(missing.as_ptr(), &mut field);
        assert!(status == YMF_ERR_IO || status == YMF_ERR_CHECKPOINT);
        assert!(field.is_null());

        // Null handles degrade to sentinels, never crashes.
        assert_eq!(ymf_run_all_pass(ptr::null()), 0);
        assert_eq!(ymf_run_series_len(ptr::null()), 0);
        assert!(ymf_field_l2_norm(ptr::null()) < 0.0);
        ymf_run_free(ptr::null_mut());
        ymf_field_free(ptr::null_mut());
        ymf_string_free(ptr::null_mut());
    }
}

#[test]
fn run_series_and_field_queries() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("out");
    unsafe {
        let mut cfg: *mut ymf_config = ptr::null_mut();
        let text = cfg_text("placeholder");
        assert_eq!(ymf_config_parse(text.as_ptr(), &mut cfg), YMF_OK);
        let dir = CString::new(out_dir.to_str().unwrap()).unwrap();
        assert_eq!(ymf_config_set_output_dir(cfg, dir.as_ptr()), YMF_OK);

        let mut run: *mut ymf_run = ptr::null_mut();
        assert_eq!(ymf_run_execute(cfg, &mut run), YMF_OK, "{}", last_error());
        assert_eq!(ymf_run_all_pass(run), 1);
        assert_eq!(ymf_run_steps(run), 8);
        assert!((ymf_run_time(run) - 0.008).abs() < 1e-12);

        let n = ymf_run_series_len(run);
        assert_eq!(n, 9);
        let (mut t, mut e, mut d, mut s) = (0.0, 0.0, 0.0, 0.0);
        assert_eq!(ymf_run_series_sample(run, 0, &mut t, &mut e, &mut d, &mut s), YMF_OK);
        assert_eq!(t, 0.0);
        assert!(e > 0.0 && d > 0.0 && s > 0.0);
        let mut e_last = 0.0;
        assert_eq!(
            ymf_run_series_sample(run, n - 1, ptr::null_mut(), &mut e_last, ptr::null_mut(), ptr::null_mut()),
            YMF_OK
        );
        assert!(e_last > 0.0 && e_last < e, "energy should drop: {e} -> {e_last}");
        assert_eq!(
            ymf_run_series_sample(run, n, &mut t, &mut e, &mut d, &mut s),
            YMF_ERR_INVALID
        );

        let ckpt = ymf_run_final_checkpoint(run);
        assert!(!ckpt.is_null());
        let mut field: *mut ymf_field = ptr::null_mut();
        assert_eq!(ymf_field_load(ckpt, &mut field), YMF_OK, "{}", last_error());
        assert!(ymf_field_l2_norm(field) > 0.0);

        // The loaded field is the recovered connection; its energy matches
        // the evolving one to gauge-invariance truncation accuracy.
        let mut energy = -1.0;
        assert_eq!(ymf_field_energy(field, &mut energy), YMF_OK);
        assert!((energy - e_last).abs() <= 2e-2 * (1.0 + e_last), "{energy} vs {e_last}");

        // |tr W| is bounded by the matrix dimension for a unitary holonomy.
        let corner = [0.25f64, 0.25, 0.75];
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(
            ymf_field_wilson_rect(field, 0, 1, corner.as_ptr(), 1.0, 0.5, 0.125, &mut re, &mut im),
            YMF_OK
        );
        assert!(re.hypot(im) <= 2.0 + 1e-9);

        // Same rectangle with bad axes is rejected.
        assert_eq!(
            ymf_field_wilson_rect(field, 1, 1, corner.as_ptr(), 1.0, 0.5, 0.125, &mut re, &mut im),
            YMF_ERR_INVALID
        );

        ymf_string_free(ckpt);
        ymf_field_free(field);
        ymf_run_free(run);
        ymf_config_free(cfg);
    }
}

#[test]
fn resume_reaches_new_end_time() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("out");
    unsafe {
        let mut cfg: *mut ymf_config = ptr::null_mut();
        let text = cfg_text(out_dir.to_str().unwrap());
        assert_eq!(ymf_config_parse(text.as_ptr(), &mut cfg), YMF_OK);
        let mut run: *mut ymf_run = ptr::null_mut();
        assert_eq!(ymf_run_execute(cfg, &mut run), YMF_OK, "{}", last_error());
        let ckpt = ymf_run_final_checkpoint(run);
        ymf_run_free(run);
        ymf_config_free(cfg);

        let mut longer: *mut ymf_run = ptr::null_mut();
        assert_eq!(ymf_run_resume(ckpt, 0.012, 0, &mut longer), YMF_OK, "{}", last_error());
        assert!((ymf_run_time(longer) - 0.012).abs() < 1e-12);
        // The resumed record counts only its own steps: 0.008 to 0.012.
        assert_eq!(ymf_run_steps(longer), 4);
        ymf_run_free(longer);
        ymf_string_free(ckpt);
    }
}

/// The generated header must compile as C and link against the cdylib.
#[test]
fn header_compiles_and_links_as_c() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include_dir = crate_dir.join("include");
    let header = include_dir.join("ymflow.h");
    assert!(header.exists(), "build.rs should have generated {header:?}");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in ["ymf_config_parse", "ymf_run_execute", "ymf_field_wilson_rect", "YMF_ERR_NULL"] {
        assert!(text.contains(sym), "header is missing {sym}");
    }

    let lib_dir = crate_dir.parent().unwrap().parent().unwrap().join("target/debug");
    if !lib_dir.join("libymflow_capi.so").exists() {
        eprintln!("skipping link test: {lib_dir:?} holds no libymflow_capi.so");
        return;
    }
    let tmp = TempDir::new().unwrap();
    let c_src = tmp.path().join("smoke.c");
    std::fs::write(
        &c_src,
        r#"
#include <stdio.h>
#include <string.h>
#include "ymflow.h"

int main(void) {
    if (ymf_abi_version() == 0) return 1;
    ymf_config *cfg = NULL;
    if (ymf_config_parse("grid.dims = nope", &cfg) != YMF_ERR_INVALID) return 2;
    if (cfg != NULL) return 3;
    if (strlen(ymf_last_error()) == 0) return 4;
    if (ymf_config_parse(NULL, &cfg) != YMF_ERR_NULL) return 5;
    ymf_config_free(cfg);
    printf("ok\n");
    return 0;
}
"#,
    )
    .unwrap();
    let exe = tmp.path().join("smoke");
    let compile = Command::new("gcc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg(&c_src)
        .arg("-I")
        .arg(&include_dir)
        .arg("-L")
        .arg(&lib_dir)
        .arg("-lymflow_capi")
        .arg(format!("-Wl,-rpath,{}", lib_dir.display()))
        .arg("-o")
        .arg(&exe)
        .output();
    let compile = match compile {
        Ok(out) => out,
        Err(e) => {
            eprintln!("skipping link test: gcc unavailable ({e})");
            return;
        }
    };
    assert!(
        compile.status.success(),
        "gcc failed:\n{}",
        String::from_utf8_lossy(&compile.stderr)
    );
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "smoke exit {:?}", run.status.code());
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
