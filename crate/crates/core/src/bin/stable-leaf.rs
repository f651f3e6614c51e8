fn main() {
    std::process::exit(stable_leaf::cli::run_command(std::env::args_os()));
}
