fn main() {
    std::process::exit(fading_sched::cli::main_with_args(std::env::args_os()));
}
