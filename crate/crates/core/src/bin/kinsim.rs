fn main() {
    std::process::exit(kinsim_core::runner::cli::run(std::env::args_os()));
}
