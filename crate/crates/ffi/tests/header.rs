use std::path::{Path, PathBuf};
use std::process::Command;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(crate_dir().join("include/fading_sched.h")).unwrap();
    for name in [
        "typedef struct FsDistribution FsDistribution;",
        "typedef struct FsChannel FsChannel;",
        "FS_STATUS_OK = 0",
        "FS_STATUS_PANIC = 8",
        "fs_last_error_message(void)",
        "fs_distribution_parse(",
        "fs_distribution_quantile(",
        "fs_channel_generate(",
        "fs_channel_from_gains(",
        "fs_throughput(",
        "fs_schedule(",
        "fs_solve(",
        "fs_g_inverse(",
        "fs_search_space_size(",
        "fs_string_free(",
    ] {
        assert!(header.contains(name), "header lacks `{name}`");
    }
}

fn static_lib() -> Option<PathBuf> {
    // CARGO_TARGET_TMPDIR is <target>/tmp; the library sits in the profile dir.
    let target = Path::new(env!("CARGO_TARGET_TMPDIR")).parent()?.to_path_buf();
    let exe = std::env::current_exe().ok()?;
    let profile_dir = exe.parent()?.parent()?.to_path_buf();
    [profile_dir, target.join("debug"), target.join("release")]
        .into_iter()
        .map(|d| d.join("libfading_sched_ffi.a"))
        .find(|p| p.exists())
}

#[test]
fn c_program_links_and_runs() {
    let Some(lib) = static_lib() else {
        eprintln!("static library not found; skipping C smoke test");
        return;
    };
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping C smoke test");
        return;
    }
    let out_dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("ffi-smoke");
    std::fs::create_dir_all(&out_dir).unwrap();
    let exe = out_dir.join("smoke");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(crate_dir().join("examples/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let run = Command::new(&exe).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "smoke binary failed: {}", String::from_utf8_lossy(&run.stderr));
    assert!(stdout.contains("count=21700"), "{stdout}");
    assert!(stdout.contains("mean=0.500"), "{stdout}");
}
