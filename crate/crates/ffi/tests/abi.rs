use std::ffi::{CStr, CString};
use std::ptr;

use umbilic_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(umb_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn surface(name: &str, n: usize, params: &[(&str, f64)]) -> (UmbStatus, *mut UmbSurface) {
    let name = CString::new(name).unwrap();
    let keys: Vec<CString> = params
        .iter()
        .map(|(k, _)| CString::new(*k).unwrap())
        .collect();
    let key_ptrs: Vec<_> = keys.iter().map(|k| k.as_ptr()).collect();
    let values: Vec<f64> = params.iter().map(|(_, v)| *v).collect();
    let mut out = ptr::null_mut();
    let st = unsafe {
        umb_surface_new(
            name.as_ptr(),
            n,
            key_ptrs.as_ptr(),
            values.as_ptr(),
            params.len(),
            &mut out,
        )
    };
    (st, out)
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(umb_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn pansu_report_through_the_abi() {
    let (st, s) = surface("pansu", 2, &[("lambda", 2.0)]);
    assert_eq!(st, UmbStatus::Ok);
    let t = umbilic::catalog::pansu_height(2.0, 0.3);
    let p = [0.3, 0.0, 0.0, 0.0, t];
    let mut r = UmbReport::default();
    assert_eq!(
        unsafe { umb_surface_report(s, p.as_ptr(), p.len(), &mut r) },
        UmbStatus::Ok
    );
    assert!((r.k - 2.0).abs() < 1e-9 && (r.l - 4.0).abs() < 1e-9);
    assert!(r.umbilic);
    assert!(last_error().is_empty());

    let mut json = ptr::null_mut();
    assert_eq!(
        unsafe { umb_surface_report_json(s, p.as_ptr(), p.len(), &mut json) },
        UmbStatus::Ok
    );
    let text = unsafe { CStr::from_ptr(json) }
        .to_str()
        .unwrap()
        .to_string();
    unsafe { umb_string_free(json) };
    assert!(
        text.contains("\"umbilic\":true") || text.contains("\"umbilic\": true"),
        "{text}"
    );
    unsafe { umb_surface_free(s) };
}

#[test]
fn errors_map_to_status_codes() {
    let (st, s) = surface("torus", 2, &[]);
    assert_eq!(st, UmbStatus::InvalidArgument);
    assert!(s.is_null());
    assert!(!last_error().is_empty());

    let mut out = ptr::null_mut();
    let st = unsafe { umb_surface_new(ptr::null(), 2, ptr::null(), ptr::null(), 0, &mut out) };
    assert_eq!(st, UmbStatus::NullPointer);

    let bad = [0xffu8, 0];
    let st = unsafe {
        umb_surface_new(
            bad.as_ptr().cast(),
            2,
            ptr::null(),
            ptr::null(),
            0,
            &mut out,
        )
    };
    assert_eq!(st, UmbStatus::InvalidUtf8);

    let (_, s) = surface("heisenberg-sphere", 2, &[]);
    let p = [0.0; 4];
    let mut r = UmbReport::default();
    assert_eq!(
        unsafe { umb_surface_report(s, p.as_ptr(), p.len(), &mut r) },
        UmbStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { umb_surface_report(ptr::null(), p.as_ptr(), 5, &mut r) },
        UmbStatus::NullPointer
    );
    unsafe { umb_surface_free(s) };
    unsafe { umb_surface_free(ptr::null_mut()) };
    unsafe { umb_string_free(ptr::null_mut()) };
}

#[test]
fn phase_period_and_geodesic_end() {
    let (mut period, mut closure) = (0.0, 0.0);
    assert_eq!(
        unsafe { umb_phase_period(2, 1.0, 0.0, 2.0, &mut period, &mut closure) },
        UmbStatus::Ok
    );
    assert!(period > 0.0 && closure < 1e-6);

    let p = [0.0; 5];
    let v = [1.0, 0.0, 0.0, 0.0];
    let (mut end, mut w) = ([0.0; 5], [0.0; 4]);
    let st = unsafe {
        umb_geodesic_end(
            p.as_ptr(),
            v.as_ptr(),
            5,
            0.0,
            2.0,
            end.as_mut_ptr(),
            w.as_mut_ptr(),
        )
    };
    assert_eq!(st, UmbStatus::Ok);
    assert!((end[0] - 2.0).abs() < 1e-12 && end[1..].iter().all(|x| x.abs() < 1e-12));
    assert_eq!(w, v);
}

#[test]
fn verify_subset_passes() {
    let only = CString::new("prop2.1").unwrap();
    let mut out = ptr::null_mut();
    let mut passed = false;
    assert_eq!(
        unsafe { umb_verify_json(7, only.as_ptr(), &mut out, &mut passed) },
        UmbStatus::Ok
    );
    assert!(passed);
    let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_string();
    unsafe { umb_string_free(out) };
    assert!(text.contains("prop2.1-antisymmetry"));
}

#[test]
fn header_declares_every_entry_point() {
    let h =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/umbilic.h")).unwrap();
    for f in [
        "umb_version",
        "umb_last_error",
        "umb_string_free",
        "umb_surface_new",
        "umb_surface_free",
        "umb_surface_report",
        "umb_surface_report_json",
        "umb_phase_period",
        "umb_geodesic_end",
        "umb_verify_json",
    ] {
        assert!(h.contains(&format!("{f}(")), "{f}");
    }
    assert!(h.contains("typedef struct UmbSurface UmbSurface;"));
}

/// Compiles and runs a small C client against the header and the static
/// library, when a C compiler is available.
#[test]
fn c_client_links_and_runs() {
    let Ok(cc) = std::env::var("CC").or_else(|_| which("cc")) else {
        eprintln!("no C compiler, skipping");
        return;
    };
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libumbilic_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built, skipping", lib.display());
        return;
    }
    let dir = tempfile_dir();
    let src = dir.join("client.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "umbilic.h"
int main(void) {
    UmbSurface *s = NULL;
    const char *keys[] = {"rho"};
    double vals[] = {1.0};
    if (umb_surface_new("heisenberg-sphere", 2, keys, vals, 1, &s) != UMB_STATUS_OK) return 1;
    double pole[5] = {0.0, 0.0, 0.0, 0.0, 0.5};
    double p[5] = {1.0, 0.0, 0.0, 0.0, 0.0};
    UmbReport r;
    if (umb_surface_report(s, pole, 5, &r) != UMB_STATUS_DOMAIN) return 3;
    UmbStatus st = umb_surface_report(s, p, 5, &r);
    umb_surface_free(s);
    if (umb_surface_new("torus", 2, NULL, NULL, 0, &s) != UMB_STATUS_INVALID_ARGUMENT) return 2;
    printf("%d %.12f %.12f %s\n", (int)st, r.k, r.l, umb_version());
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.join("client");
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let status = std::process::Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-I", include])
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = std::process::Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{:?}", out.status);
    let text = String::from_utf8(out.stdout).unwrap();
    let f: Vec<&str> = text.split_whitespace().collect();
    assert_eq!(f[0], "0");
    assert_eq!(f[3], env!("CARGO_PKG_VERSION"));
    let (k, l): (f64, f64) = (f[1].parse().unwrap(), f[2].parse().unwrap());
    assert!((k - 1.0).abs() < 1e-9 && (l - 3.0).abs() < 1e-9, "{text}");
}

fn which(name: &str) -> Result<String, ()> {
    let path = std::env::var_os("PATH").ok_or(())?;
    std::env::split_paths(&path)
        .map(|d| d.join(name))
        .find(|p| p.is_file())
        .map(|p| p.to_string_lossy().into_owned())
        .ok_or(())
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = std::path::Path::new(env!("CARGO_TARGET_TMPDIR"))
        .join(format!("umbilic-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
